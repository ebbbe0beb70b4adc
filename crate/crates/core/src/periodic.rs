//! Construction of q-periodic, A-irrational polynomial sequences and exact
//! checks of their equidistribution through character sums.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::arith::{binomial, frac, is_integer, smallest_prime_factor};
use crate::error::{Error, Result};
use crate::fourier::e;
use crate::gowers::rng;
use crate::nil::linalg::{dot_int, Vector};
use crate::nil::{
    enumerate_characters, is_irrational, taylor_coefficients, FilteredNilmanifoldModel, LevelCharacter, ModelRef,
    PolynomialSequence, UnitriangularElement,
};

/// Largest common denominator for which the cyclotomic zero test is run.
pub const CYCLOTOMIC_CAP: u64 = 50_000;

/// Outcome of the root search for one level.
#[derive(Clone, Debug, Serialize)]
pub struct RootChoice {
    pub level: usize,
    /// Level coordinates of the lattice element `gamma = w^q`.
    pub t: Vec<u64>,
    pub rejections: u64,
    pub swept: bool,
}

fn all_nonzero_frequencies(r: usize, a: u64) -> Vec<Vec<i64>> {
    let a = a as i64;
    let mut out = Vec::new();
    let mut k = vec![-a; r];
    loop {
        let norm: i64 = k.iter().map(|x| x.abs()).sum();
        if norm > 0 && norm <= a {
            out.push(k.clone());
        }
        let mut j = 0;
        loop {
            if j == r {
                return out;
            }
            if k[j] < a {
                k[j] += 1;
                break;
            }
            k[j] = -a;
            j += 1;
        }
    }
}

/// Finds `w in G_i` with `w^q in Gamma_i` such that `h w` is A-irrational at
/// level `i`.
///
/// The frequencies tested are all nonzero `k` with `|k|_1 <= A`, not only those
/// vanishing on the commutator part, so the product is irrational in the
/// stronger sense as well.
pub fn irrational_qth_root(
    model: &FilteredNilmanifoldModel,
    i: usize,
    h: &UnitriangularElement,
    q: u64,
    a: u64,
    seed: u64,
) -> Result<(UnitriangularElement, RootChoice)> {
    if i == 0 || i > model.degree() {
        return Err(Error::Precondition(format!("level {i} is outside 1..={}", model.degree())));
    }
    let r = model.r(i);
    let needed = (2 * a as u128).checked_pow(r as u32).unwrap_or(u128::MAX);
    if (q as u128) < needed {
        return Err(Error::Precondition(format!(
            "q = {q} is below (2A)^r = {needed} at level {i}"
        )));
    }
    if q < 2 || smallest_prime_factor(q) < a {
        return Err(Error::Precondition(format!("p_1(q) must be at least A = {a}")));
    }
    let v = model.psi_level(h, i)?;
    let qq = BigRational::from_integer(BigInt::from(q));
    // each k forbids k.t = -q k.psi_i(h) (mod q) when that target is integral
    let constraints: Vec<(Vec<i64>, i128)> = all_nonzero_frequencies(r, a)
        .into_iter()
        .filter_map(|k| {
            let target = -(&qq * dot_int(&k, &v));
            is_integer(&target).then(|| {
                let t = target.to_integer().mod_floor(&BigInt::from(q));
                (k, t.to_i128().expect("reduced mod q"))
            })
        })
        .collect();
    let good = |t: &[u64]| {
        constraints.iter().all(|(k, target)| {
            let s: i128 = k.iter().zip(t).map(|(&x, &y)| x as i128 * y as i128).sum();
            s.rem_euclid(q as i128) != *target
        })
    };
    let mut rng = rng(seed);
    let limit = 10 * (a + 1).pow(r as u32);
    let mut rejections = 0u64;
    let mut found: Option<(Vec<u64>, bool)> = None;
    if r == 0 {
        found = Some((Vec::new(), false));
    }
    while found.is_none() && rejections < limit {
        let t: Vec<u64> = (0..r).map(|_| rng.gen_range(0..q)).collect();
        if good(&t) {
            found = Some((t, false));
        } else {
            rejections += 1;
        }
    }
    if found.is_none() {
        let mut t = vec![0u64; r];
        loop {
            if good(&t) {
                found = Some((t, true));
                break;
            }
            if !crate::forms::odometer(&mut t, q) {
                break;
            }
        }
    }
    let (t, swept) = found.ok_or_else(|| Error::Internal("no admissible q-th root exists".into()))?;
    let level_t: Vector = t.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect();
    let gamma = model.from_level_coords(i, &level_t);
    let w = gamma.root(q);
    debug_assert!(model.in_gamma(&w.pow_int(&BigInt::from(q)))?);
    Ok((
        w,
        RootChoice {
            level: i,
            t,
            rejections,
            swept,
        },
    ))
}

/// `x in Gamma G_j`: the coordinates before `G_j` are integral.
fn in_gamma_mod_level(model: &FilteredNilmanifoldModel, x: &UnitriangularElement, j: usize) -> Result<bool> {
    let t = model.malcev_coords(x)?;
    Ok(t[..model.level_start(j)].iter().all(is_integer))
}

fn step_quotient(p: &PolynomialSequence, q: u64, n: i64) -> UnitriangularElement {
    p.eval(n + q as i64).inverse().mul(&p.eval(n))
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StageReport {
    pub level: usize,
    pub root: RootChoice,
    /// `g(n+q)^{-1} g(n) in Gamma G_{i+1}` on the sampled range.
    pub invariant_holds: bool,
    /// Earlier coefficients unchanged modulo `G_i`.
    pub lower_coefficients_kept: bool,
}

#[derive(Clone, Debug)]
pub struct PeriodicConstruction {
    pub sequence: PolynomialSequence,
    pub stages: Vec<StageReport>,
    pub periodic: bool,
    pub irrational: bool,
}

/// Builds `g in poly(Z, G_.)` that is q-periodic mod Gamma and A-irrational.
///
/// Requires `q >= (2A)^m`, `p_1(q) >= A`, and additionally `p_1(q) > s` so that
/// `C(q, j)` is a multiple of `q` for every `j <= s`.
pub fn build_periodic_irrational(model: ModelRef, q: u64, a: u64, seed: u64) -> Result<PeriodicConstruction> {
    let m = model.m();
    let s = model.degree();
    if model.is_prefiltration() {
        return Err(Error::Precondition("the construction needs a filtration".into()));
    }
    let needed = (2 * a as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if (q as u128) < needed {
        return Err(Error::Precondition(format!("q = {q} is below (2A)^m = {needed}")));
    }
    let p1 = if q >= 2 { smallest_prime_factor(q) } else { 0 };
    if p1 < a || p1 as usize <= s {
        return Err(Error::Precondition(format!(
            "p_1(q) = {p1} must be at least A = {a} and exceed the degree {s}"
        )));
    }
    let qi = q as i64;
    let mut g = PolynomialSequence::identity(model.clone());
    let mut stages = Vec::with_capacity(s);
    for i in 1..=s {
        let base = g.truncate(i);
        // h(n) = g(n+q)^{-1} g(n), a Gamma G_i-valued polynomial
        let h_values: Vec<_> = (0..=s as i64).map(|n| step_quotient(&base, q, n)).collect();
        let h = taylor_coefficients(&h_values);
        let cut = model.level_start(i);
        let mut gammas = Vec::with_capacity(s + 1);
        for (j, hj) in h.iter().enumerate() {
            if j >= i {
                gammas.push(model.identity());
                continue;
            }
            let mut t = model.malcev_coords(hj)?;
            if !t[..cut].iter().all(is_integer) {
                return Err(Error::Internal(format!("stage {i}: h_{j} is not Gamma G_{i}-valued")));
            }
            for x in t[cut..].iter_mut() {
                *x = BigRational::zero();
            }
            gammas.push(model.from_coords(&t));
        }
        let gamma = PolynomialSequence::new(model.clone(), gammas)?;
        let h_tilde_values: Vec<_> = h_values
            .iter()
            .enumerate()
            .map(|(n, hv)| gamma.eval(n as i64).inverse().mul(hv))
            .collect();
        let h_tilde = taylor_coefficients(&h_tilde_values);
        let mut levels: Vec<Vector> = Vec::with_capacity(h_tilde.len());
        for (k, hk) in h_tilde.iter().enumerate() {
            if !model.in_level(hk, i)? {
                return Err(Error::Internal(format!("stage {i}: h~_{k} leaves G_{i}")));
            }
            if k >= i && !model.in_level(hk, i + 1)? {
                return Err(Error::Internal(format!("stage {i}: h~_{k} is not trivial mod G_{}", i + 1)));
            }
            levels.push(model.psi_level(hk, i)?);
        }
        // sum_{j>k} C(q, j-k) l_j = h~_k for k = i-1 down to 0, in G_i / G_{i+1}
        let r = model.r(i);
        let mut ell: Vec<Vector> = vec![vec![BigRational::zero(); r]; i + 1];
        let q_rat = BigRational::from_integer(BigInt::from(q));
        for k in (0..i).rev() {
            let mut x = levels[k].clone();
            for j in k + 2..=i {
                let c = BigRational::from_integer(BigInt::from(binomial(q as i128, j - k)));
                for (xe, le) in x.iter_mut().zip(&ell[j]) {
                    *xe -= &c * le;
                }
            }
            ell[k + 1] = x.iter().map(|v| v / &q_rat).collect();
        }
        let ell_elems: Vec<UnitriangularElement> =
            ell.iter().map(|v| model.from_level_coords(i, v)).collect();
        let (w, root) = irrational_qth_root(&model, i, &ell_elems[i], q, a, seed.wrapping_add(i as u64))?;
        let mut taylor_ell = ell_elems.clone();
        taylor_ell[0] = model.identity();
        let ell_poly = PolynomialSequence::new(model.clone(), taylor_ell)?;
        let w_logs = w.log();
        let values: Vec<_> = (0..=s as i64)
            .map(|n| {
                let c = BigRational::from_integer(BigInt::from(binomial(n as i128, i)));
                let wn = UnitriangularElement::exp(&w_logs.scale(&c)).expect("strictly upper");
                base.eval(n).mul(&ell_poly.eval(n)).mul(&wn)
            })
            .collect();
        let next = PolynomialSequence::expand(model.clone(), &values)?;
        let sample: Vec<i64> = (-(s as i64) - 1..=2 * s as i64 + 2).collect();
        let mut invariant_holds = true;
        for &n in &sample {
            if !in_gamma_mod_level(&model, &step_quotient(&next, q, n), i + 1)? {
                invariant_holds = false;
            }
        }
        let mut lower_coefficients_kept = true;
        for j in 0..i {
            let diff = g.coefficient(j).inverse().mul(next.coefficient(j));
            if !model.in_level(&diff, i)? {
                lower_coefficients_kept = false;
            }
        }
        if !invariant_holds || !lower_coefficients_kept {
            return Err(Error::Internal(format!("stage {i} failed its exact checks")));
        }
        stages.push(StageReport {
            level: i,
            root,
            invariant_holds,
            lower_coefficients_kept,
        });
        g = next;
    }
    let periodic = verify_periodicity_range(&g, q, 0, 2 * qi)?;
    let irrational = is_irrational(&g, a)?.irrational;
    if !periodic || !irrational {
        return Err(Error::Internal("constructed sequence failed final verification".into()));
    }
    Ok(PeriodicConstruction {
        sequence: g,
        stages,
        periodic,
        irrational,
    })
}

/// `g(n+q)^{-1} g(n) in Gamma` for every `n` in `[-range, range]`.
pub fn verify_periodicity(p: &PolynomialSequence, q: u64, range: i64) -> Result<bool> {
    verify_periodicity_range(p, q, -range, range)
}

pub fn verify_periodicity_range(p: &PolynomialSequence, q: u64, lo: i64, hi: i64) -> Result<bool> {
    let model = p.model();
    for n in lo..=hi {
        if !model.in_gamma(&step_quotient(p, q, n))? {
            return Ok(false);
        }
    }
    Ok(true)
}

// A polynomial sequence is Gamma-valued everywhere once it is on s+1
// consecutive integers, so this window decides periodicity.
fn require_periodic(p: &PolynomialSequence, q: u64) -> Result<()> {
    let s = p.model().degree() as i64;
    if !verify_periodicity_range(p, q, 0, s)? {
        return Err(Error::Precondition(format!("sequence is not {q}-periodic mod Gamma")));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CharacterSum {
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    /// Decided exactly by reducing modulo a cyclotomic polynomial; absent when
    /// the common denominator exceeds [`CYCLOTOMIC_CAP`].
    pub exact_zero: Option<bool>,
}

/// `E_{n in [q]} e(k . psi_1({g(n)}))` for a level-1 character.
pub fn character_sum(p: &PolynomialSequence, xi: &LevelCharacter, q: u64) -> Result<CharacterSum> {
    let model = p.model();
    if xi.level != 1 || xi.k.len() != model.r(1) {
        return Err(Error::Precondition("characterSum needs a level-1 frequency of length r_1".into()));
    }
    require_periodic(p, q)?;
    let range = model.level_range(1);
    let phases: Vec<BigRational> = (0..q as i64)
        .map(|n| {
            let (f, _) = model.frac_int_parts(&p.eval(n))?;
            let t = model.malcev_coords(&f)?;
            Ok(frac(&dot_int(&xi.k, &t[range.clone()])))
        })
        .collect::<Result<_>>()?;
    Ok(exponential_average(&phases))
}

/// `|E_{n in [q]} e(last coordinate of psi({g(n)}))|`; for Heisenberg models
/// the last coordinate is the central one.
pub fn vertical_sum(p: &PolynomialSequence, q: u64) -> Result<f64> {
    let model = p.model();
    let last = model.m() - 1;
    let phases: Vec<BigRational> = (0..q as i64)
        .map(|n| {
            let (f, _) = model.frac_int_parts(&p.eval(n))?;
            Ok(model.malcev_coords(&f)?[last].clone())
        })
        .collect::<Result<_>>()?;
    Ok(exponential_average(&phases).abs)
}

/// The Gauss-sum scale `2 / sqrt(q)` used as the vertical tolerance.
pub fn vertical_tolerance(q: u64) -> f64 {
    2.0 / (q as f64).sqrt()
}

fn exponential_average(phases: &[BigRational]) -> CharacterSum {
    let count = phases.len().max(1) as f64;
    let denom = phases.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut z = Complex64::new(0.0, 0.0);
    for x in phases {
        z += e(crate::arith::rational_to_f64(&frac(x)));
    }
    z /= count;
    let exact_zero = denom.to_u64().filter(|&d| d <= CYCLOTOMIC_CAP).map(|d| {
        let mut counts = vec![0i128; d as usize];
        for x in phases {
            let a = (frac(x) * BigRational::from_integer(BigInt::from(d))).to_integer();
            counts[a.to_usize().expect("reduced residue")] += 1;
        }
        vanishes_at_primitive_root(&counts, d)
    });
    CharacterSum {
        re: z.re,
        im: z.im,
        abs: z.norm(),
        exact_zero,
    }
}

fn mobius(mut n: u64) -> i32 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Integer coefficients of the `d`-th cyclotomic polynomial, lowest degree first.
pub fn cyclotomic(d: u64) -> Vec<i128> {
    let d = d as usize;
    let divisors: Vec<usize> = (1..=d).filter(|x| d.is_multiple_of(*x)).collect();
    let mut poly = vec![1i128];
    // multiply by (x^e - 1) for mu(d/e) = 1
    for &e in &divisors {
        if mobius((d / e) as u64) == 1 {
            let mut next = vec![0i128; poly.len() + e];
            for (j, &c) in poly.iter().enumerate() {
                next[j + e] += c;
                next[j] -= c;
            }
            poly = next;
        }
    }
    // divide by (x^e - 1) for mu(d/e) = -1: solve (x^e - 1) b = poly
    for &e in &divisors {
        if mobius((d / e) as u64) == -1 {
            let n = poly.len() - e;
            let mut b = vec![0i128; n];
            for j in 0..n {
                // coefficient j of poly: b[j-e] - b[j]
                let prev = if j >= e { b[j - e] } else { 0 };
                b[j] = prev - poly[j];
            }
            poly = b;
        }
    }
    poly
}

/// Whether `sum_j c_j zeta^j = 0` for a primitive `d`-th root of unity `zeta`.
pub fn vanishes_at_primitive_root(coeffs: &[i128], d: u64) -> bool {
    let phi = cyclotomic(d);
    let deg = phi.len() - 1;
    let mut rem: Vec<i128> = coeffs.to_vec();
    // phi is monic; reduce from the top
    for top in (deg..rem.len()).rev() {
        let c = rem[top];
        if c == 0 {
            continue;
        }
        for (j, &p) in phi.iter().enumerate() {
            rem[top - deg + j] -= c * p;
        }
    }
    rem.iter().take(deg).all(|&c| c == 0)
}

/// Every nontrivial level-1 character of complexity at most `a`, with its sum.
pub fn level_one_sums(p: &PolynomialSequence, q: u64, a: u64) -> Result<Vec<(LevelCharacter, CharacterSum)>> {
    enumerate_characters(p.model(), 1, a)?
        .into_iter()
        .map(|c| {
            let s = character_sum(p, &c, q)?;
            Ok((c, s))
        })
        .collect()
}
