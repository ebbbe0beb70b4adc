//! Level characters `xi_i(g) = k . psi_i(g)`, A-irrationality, and the
//! single-step factorization of a Taylor coefficient.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::linalg::{self, Vector};
use super::model::{FilteredNilmanifoldModel, UnitriangularElement};
use super::taylor::PolynomialSequence;
use crate::arith::{is_integer, smallest_prime_factor, vector_bezout};
use crate::error::{Error, Result};

/// Upper bound on the number of frequency vectors scanned per level.
pub const ENUMERATION_CAP: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LevelCharacter {
    pub level: usize,
    pub k: Vec<i64>,
}

impl LevelCharacter {
    pub fn complexity(&self) -> u64 {
        self.k.iter().map(|x| x.unsigned_abs()).sum()
    }

    /// `k . psi_i(g)` for `g in G_i`.
    pub fn eval(&self, model: &FilteredNilmanifoldModel, g: &UnitriangularElement) -> Result<BigRational> {
        Ok(linalg::dot_int(&self.k, &model.psi_level(g, self.level)?))
    }

    pub fn is_trivial(&self) -> bool {
        self.k.iter().all(|&x| x == 0)
    }
}

/// The image of `G_i^triangledown` in the level-`i` coordinates, and the
/// integer frequencies that kill it.
#[derive(Clone, Debug)]
pub struct LevelQuotient {
    pub level: usize,
    pub r: usize,
    /// Echelon basis of the span `W` of projected brackets.
    pub span: Vec<Vector>,
    /// Z-basis of `{k in Z^r : k . W = 0}`.
    pub annihilator: Vec<Vec<i64>>,
}

impl LevelQuotient {
    pub fn new(model: &FilteredNilmanifoldModel, i: usize) -> Result<Self> {
        let range = model.level_range(i);
        let r = range.len();
        let mut rows: Vec<Vector> = Vec::new();
        for j in 0..=i {
            let (sa, sb) = (model.level_start(j), model.level_start(i - j));
            for a in sa..model.m() {
                for b in sb..model.m() {
                    let br = model.basis()[a].bracket(&model.basis()[b]);
                    let c = model.lie_coords(&br)?;
                    let slice = c[range.clone()].to_vec();
                    if slice.iter().any(|x| !x.is_zero()) {
                        rows.push(slice);
                    }
                }
            }
        }
        let piv = linalg::rref(&mut rows);
        rows.truncate(piv.len());
        let annihilator = linalg::integer_annihilator(&rows, r)?;
        Ok(LevelQuotient {
            level: i,
            r,
            span: rows,
            annihilator,
        })
    }

    pub fn kills_span(&self, k: &[i64]) -> bool {
        self.span.iter().all(|w| linalg::dot_int(k, w).is_zero())
    }

    /// `v in W`.
    pub fn in_span(&self, v: &[BigRational]) -> bool {
        self.annihilator.iter().all(|k| linalg::dot_int(k, v).is_zero())
    }

    /// `v in Z^r + W`.
    pub fn integral_mod_span(&self, v: &[BigRational]) -> bool {
        self.annihilator.iter().all(|k| is_integer(&linalg::dot_int(k, v)))
    }
}

// per-entry order: larger magnitude first, positive before negative
fn entry_key(x: i64) -> (i64, bool) {
    (-(x.unsigned_abs() as i64), x < 0)
}

fn vectors_of_norm(r: usize, norm: u64, out: &mut Vec<Vec<i64>>) {
    fn rec(prefix: &mut Vec<i64>, left: u64, r: usize, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == r - 1 {
            let l = left as i64;
            if l == 0 {
                prefix.push(0);
                out.push(prefix.clone());
                prefix.pop();
            } else {
                for v in [l, -l] {
                    prefix.push(v);
                    out.push(prefix.clone());
                    prefix.pop();
                }
            }
            return;
        }
        for a in (0..=left).rev() {
            let a = a as i64;
            let choices: &[i64] = if a == 0 { &[0] } else { &[a, -a] };
            for &v in choices {
                prefix.push(v);
                rec(prefix, left - v.unsigned_abs(), r, out);
                prefix.pop();
            }
        }
    }
    if r == 0 {
        return;
    }
    rec(&mut Vec::with_capacity(r), norm, r, out);
}

fn count_bound(r: usize, a: u64) -> u128 {
    // |{k : |k|_1 <= A}| <= (2A + 1)^r
    (2 * a as u128 + 1).checked_pow(r as u32).unwrap_or(u128::MAX)
}

/// All nontrivial level-`i` characters of complexity at most `a`, ordered by
/// complexity and then by the per-entry key.
pub fn enumerate_characters(model: &FilteredNilmanifoldModel, i: usize, a: u64) -> Result<Vec<LevelCharacter>> {
    if i == 0 || i > model.degree() {
        return Err(Error::Precondition(format!(
            "level {i} is outside 1..={}",
            model.degree()
        )));
    }
    let quotient = LevelQuotient::new(model, i)?;
    enumerate_with(&quotient, a)
}

pub fn enumerate_with(quotient: &LevelQuotient, a: u64) -> Result<Vec<LevelCharacter>> {
    let r = quotient.r;
    if r == 0 || quotient.annihilator.is_empty() {
        return Ok(Vec::new());
    }
    let bound = count_bound(r, a);
    if bound > ENUMERATION_CAP {
        return Err(Error::budget("character enumeration", bound, ENUMERATION_CAP));
    }
    let mut out = Vec::new();
    for norm in 1..=a {
        let mut ks = Vec::new();
        vectors_of_norm(r, norm, &mut ks);
        ks.sort_by(|x, y| {
            x.iter()
                .map(|&v| entry_key(v))
                .cmp(y.iter().map(|&v| entry_key(v)))
        });
        out.extend(
            ks.into_iter()
                .filter(|k| quotient.kills_span(k))
                .map(|k| LevelCharacter { level: quotient.level, k }),
        );
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct IrrationalityCheck {
    pub irrational: bool,
    /// The first character with `xi_i(g_i)` integral, when one exists.
    pub witness: Option<LevelCharacter>,
}

/// `xi_i(g_i) not in Z` for every nontrivial level-`i` character of
/// complexity at most `a`, at every level `1..=s`.
pub fn is_irrational(p: &PolynomialSequence, a: u64) -> Result<IrrationalityCheck> {
    let model = p.model();
    for i in 1..=model.degree() {
        if let Some(w) = level_witness(model, i, p.coefficient(i), a)? {
            return Ok(IrrationalityCheck {
                irrational: false,
                witness: Some(w),
            });
        }
    }
    Ok(IrrationalityCheck {
        irrational: true,
        witness: None,
    })
}

/// First character of complexity at most `a` at level `i` with `xi(g)` integral.
pub fn level_witness(
    model: &FilteredNilmanifoldModel,
    i: usize,
    g: &UnitriangularElement,
    a: u64,
) -> Result<Option<LevelCharacter>> {
    let v = model.psi_level(g, i)?;
    Ok(enumerate_characters(model, i, a)?
        .into_iter()
        .find(|c| is_integer(&linalg::dot_int(&c.k, &v))))
}

/// `g in G_i^triangledown`.
pub fn in_nabla(model: &FilteredNilmanifoldModel, i: usize, g: &UnitriangularElement) -> Result<bool> {
    if !model.in_level(g, i)? {
        return Ok(false);
    }
    let q = LevelQuotient::new(model, i)?;
    Ok(q.in_span(&model.psi_level(g, i)?))
}

/// `x = y mod G_i^triangledown` for `x, y in G_i`.
pub fn congruent_mod_nabla(
    model: &FilteredNilmanifoldModel,
    i: usize,
    x: &UnitriangularElement,
    y: &UnitriangularElement,
) -> Result<bool> {
    in_nabla(model, i, &x.mul(&y.inverse()))
}

/// `x in Gamma_i G_i^triangledown` for `x in G_i`.
pub fn integral_mod_nabla(model: &FilteredNilmanifoldModel, i: usize, x: &UnitriangularElement) -> Result<bool> {
    let q = LevelQuotient::new(model, i)?;
    Ok(q.integral_mod_span(&model.psi_level(x, i)?))
}

#[derive(Clone, Debug)]
pub enum FactorOutcome {
    /// `g_i = g_i' gamma_i` with `gamma_i in Gamma_i` and `xi(g_i') = 0`.
    Factored {
        character: LevelCharacter,
        t: Vec<BigInt>,
        gamma: UnitriangularElement,
        reduced: UnitriangularElement,
    },
    /// No character of complexity at most `A` takes an integer value on `g_i`.
    NotApplicable,
}

/// Splits off a lattice element so that the violated character vanishes on
/// the remaining factor.
pub fn factor_coefficient(
    model: &FilteredNilmanifoldModel,
    i: usize,
    g: &UnitriangularElement,
    a: u64,
    q: u64,
) -> Result<FactorOutcome> {
    let Some(character) = level_witness(model, i, g, a)? else {
        return Ok(FactorOutcome::NotApplicable);
    };
    if q < 2 || a >= smallest_prime_factor(q) {
        return Err(Error::Precondition(format!(
            "factorization needs A < p_1(q); got A = {a}, q = {q}"
        )));
    }
    let value = character.eval(model, g)?.to_integer();
    let k: Vec<i128> = character.k.iter().map(|&x| i128::from(x)).collect();
    let (hcf, coeffs) = vector_bezout(&k);
    let hcf_big = BigInt::from(hcf);
    if hcf as u64 > a || (&value % &hcf_big) != BigInt::zero() {
        return Err(Error::Divisibility {
            hcf,
            value: value.to_string(),
        });
    }
    let scale = &value / &hcf_big;
    let t: Vec<BigInt> = coeffs.iter().map(|&c| BigInt::from(c) * &scale).collect();
    let level_t: Vec<BigRational> = t.iter().cloned().map(BigRational::from_integer).collect();
    let gamma = model.from_level_coords(i, &level_t);
    let reduced = g.mul(&gamma.inverse());
    if !character.eval(model, &reduced)?.is_zero() {
        return Err(Error::Internal("factorization left a nonzero character value".into()));
    }
    Ok(FactorOutcome::Factored {
        character,
        t,
        gamma,
        reduced,
    })
}

/// Convenience for callers that only need the integer vector as `i64`.
pub fn small_vector(t: &[BigInt]) -> Option<Vec<i64>> {
    t.iter().map(ToPrimitive::to_i64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nil::taylor::shared;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn ks(v: &[LevelCharacter]) -> Vec<Vec<i64>> {
        v.iter().map(|c| c.k.clone()).collect()
    }

    #[test]
    fn heisenberg_characters() {
        let h = FilteredNilmanifoldModel::heisenberg_lcs();
        assert!(enumerate_characters(&h, 2, 5).unwrap().is_empty());
        let c = enumerate_characters(&h, 1, 1).unwrap();
        assert_eq!(ks(&c), vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]]);
        assert_eq!(enumerate_characters(&h, 1, 3).unwrap().len(), 24);
        // degree-3 variant: level 3 is the center, with no bracket landing there
        let h3 = FilteredNilmanifoldModel::heisenberg_deg3();
        assert_eq!(ks(&enumerate_characters(&h3, 3, 2).unwrap()), vec![vec![1], vec![-1], vec![2], vec![-2]]);
        assert!(enumerate_characters(&h3, 2, 2).unwrap().is_empty());
    }

    #[test]
    fn abelian_characters() {
        let t = FilteredNilmanifoldModel::torus(1, 1).unwrap();
        assert_eq!(ks(&enumerate_characters(&t, 1, 2).unwrap()), vec![vec![1], vec![-1], vec![2], vec![-2]]);
        assert!(enumerate_characters(&t, 0, 2).is_err());
    }

    #[test]
    fn lattice_coefficients_are_rational() {
        let h = shared(FilteredNilmanifoldModel::heisenberg_lcs());
        let p = PolynomialSequence::new(
            h.clone(),
            vec![h.identity(), h.from_coords(&[q(2, 1), q(-1, 1), q(0, 1)]), h.from_coords(&[q(0, 1), q(0, 1), q(5, 1)])],
        )
        .unwrap();
        let check = is_irrational(&p, 1).unwrap();
        assert!(!check.irrational);
        assert_eq!(check.witness.unwrap().k, vec![1, 0]);
    }

    #[test]
    fn heisenberg_irrational_brute_force() {
        let h = shared(FilteredNilmanifoldModel::heisenberg_lcs());
        let (qq, a) = (11i64, 3i64);
        for tt in 1..qq {
            let g1 = h.from_coords(&[q(1, qq), q(tt, qq), q(0, 1)]);
            let p = PolynomialSequence::new(h.clone(), vec![h.identity(), g1]).unwrap();
            let exact = is_irrational(&p, a as u64).unwrap().irrational;
            let mut brute = true;
            for k1 in -a..=a {
                for k2 in -a..=a {
                    let nontrivial = (k1, k2) != (0, 0);
                    if nontrivial && k1.abs() + k2.abs() <= a && (k1 + k2 * tt) % qq == 0 {
                        brute = false;
                    }
                }
            }
            assert_eq!(exact, brute, "t = {tt}");
        }
    }

    #[test]
    fn abelian_half_is_not_irrational() {
        let t = shared(FilteredNilmanifoldModel::torus(1, 1).unwrap());
        let p = PolynomialSequence::new(t.clone(), vec![t.identity(), t.from_coords(&[q(1, 2)])]).unwrap();
        let check = is_irrational(&p, 2).unwrap();
        assert_eq!(check.witness.unwrap().k, vec![2]);
    }

    #[test]
    fn factor_examples() {
        let t = FilteredNilmanifoldModel::torus(1, 1).unwrap();
        match factor_coefficient(&t, 1, &t.from_coords(&[q(3, 1)]), 1, 5).unwrap() {
            FactorOutcome::Factored { t: v, reduced, .. } => {
                assert_eq!(v, vec![BigInt::from(3)]);
                assert!(reduced.is_identity());
            }
            FactorOutcome::NotApplicable => panic!("expected a factorization"),
        }
        let h = FilteredNilmanifoldModel::heisenberg_lcs();
        let g = h.from_coords(&[q(2, 1), q(1, 227), q(3, 7)]);
        match factor_coefficient(&h, 1, &g, 3, 227).unwrap() {
            FactorOutcome::Factored { character, gamma, reduced, .. } => {
                assert_eq!(character.k, vec![1, 0]);
                assert_eq!(h.psi_level(&gamma, 1).unwrap(), vec![q(2, 1), q(0, 1)]);
                assert!(h.malcev_coords(&reduced).unwrap()[0].is_zero());
                assert_eq!(reduced.mul(&gamma), g);
                assert!(h.in_gamma(&gamma).unwrap());
            }
            FactorOutcome::NotApplicable => panic!("expected a factorization"),
        }
        let irr = h.from_coords(&[q(1, 227), q(5, 227), q(0, 1)]);
        assert!(matches!(factor_coefficient(&h, 1, &irr, 3, 227).unwrap(), FactorOutcome::NotApplicable));
        assert!(factor_coefficient(&h, 1, &g, 3, 4).is_err());
    }

    #[test]
    fn gamma_factors_completely() {
        let h = FilteredNilmanifoldModel::heisenberg_lcs();
        let g = h.from_coords(&[q(-4, 1), q(9, 1), q(0, 1)]);
        let FactorOutcome::Factored { reduced, gamma, character, .. } = factor_coefficient(&h, 1, &g, 2, 7).unwrap() else {
            panic!("expected a factorization");
        };
        assert!(character.eval(&h, &reduced).unwrap().is_zero());
        assert!(h.in_gamma(&gamma).unwrap());
        assert_eq!(reduced.mul(&gamma), g);
    }

    #[test]
    fn nabla_membership() {
        let h = FilteredNilmanifoldModel::heisenberg_lcs();
        // at level 2 the center is all of G_2 and is generated by commutators
        let z = h.from_coords(&[q(0, 1), q(0, 1), q(1, 3)]);
        assert!(in_nabla(&h, 2, &z).unwrap());
        let x = h.from_coords(&[q(1, 3), q(0, 1), q(0, 1)]);
        assert!(!in_nabla(&h, 1, &x).unwrap());
        assert!(integral_mod_nabla(&h, 2, &z).unwrap());
        assert!(!integral_mod_nabla(&h, 1, &x).unwrap());
        let y = h.from_coords(&[q(1, 3), q(0, 1), q(5, 1)]);
        assert!(congruent_mod_nabla(&h, 1, &x, &y).unwrap());
    }
}
