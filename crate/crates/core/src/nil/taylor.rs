//! Polynomial sequences `g(n) = g_0 g_1^n g_2^C(n,2) ... g_s^C(n,s)`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::matrix::RatMatrix;
use super::model::{FilteredNilmanifoldModel, ModelRef, UnitriangularElement};
use crate::arith::{binomial_big, format_rational};
use crate::error::{Error, Result};

/// Coefficients from values by `g_j = (g_0 g_1^C(j,1) ... g_{j-1}^C(j,j-1))^{-1} g(j)`,
/// with no level bookkeeping.
pub fn taylor_coefficients(values: &[UnitriangularElement]) -> Vec<UnitriangularElement> {
    let mut coeffs: Vec<UnitriangularElement> = Vec::with_capacity(values.len());
    let mut logs: Vec<RatMatrix> = Vec::with_capacity(values.len());
    for (j, v) in values.iter().enumerate() {
        let prefix = product(v.dim(), &logs, &BigInt::from(j));
        let c = prefix.inverse().mul(v);
        logs.push(c.log());
        coeffs.push(c);
    }
    coeffs
}

// prod_i exp(C(n, i) log g_i)
fn product(dim: usize, logs: &[RatMatrix], n: &BigInt) -> UnitriangularElement {
    let mut acc = UnitriangularElement::identity(dim);
    for (i, x) in logs.iter().enumerate() {
        let c = binomial_big(n, i);
        if c == BigInt::from(0) || x.is_zero() {
            continue;
        }
        let step = UnitriangularElement::exp(&x.scale(&BigRational::from_integer(c)))
            .expect("log of a unitriangular matrix is strictly upper");
        acc = acc.mul(&step);
    }
    acc
}

/// A polynomial sequence on a model, stored through its Taylor coefficients.
#[derive(Clone, Debug)]
pub struct PolynomialSequence {
    model: ModelRef,
    taylor: Vec<UnitriangularElement>,
    logs: Vec<RatMatrix>,
}

impl PartialEq for PolynomialSequence {
    fn eq(&self, other: &Self) -> bool {
        self.taylor == other.taylor
    }
}

impl PolynomialSequence {
    /// Validates `g_i in G_i` for every coefficient; missing trailing
    /// coefficients are the identity.
    pub fn new(model: ModelRef, mut taylor: Vec<UnitriangularElement>) -> Result<Self> {
        let s = model.degree();
        if taylor.len() > s + 1 {
            return Err(Error::Precondition(format!(
                "{} coefficients given for a degree-{s} model",
                taylor.len()
            )));
        }
        taylor.resize(s + 1, model.identity());
        for (i, g) in taylor.iter().enumerate() {
            if !model.in_level(g, i)? {
                return Err(Error::LevelViolation { index: i });
            }
        }
        let logs = taylor.iter().map(UnitriangularElement::log).collect();
        Ok(PolynomialSequence { model, taylor, logs })
    }

    pub fn constant(model: ModelRef, h: UnitriangularElement) -> Result<Self> {
        Self::new(model, vec![h])
    }

    pub fn identity(model: ModelRef) -> Self {
        let id = model.identity();
        Self::new(model, vec![id]).expect("identity is in every level")
    }

    /// Recovers the coefficients from `g(0), ..., g(s)`; fails with
    /// `LevelViolation` when the values are not a polynomial for this filtration.
    pub fn expand(model: ModelRef, values: &[UnitriangularElement]) -> Result<Self> {
        let s = model.degree();
        if values.len() != s + 1 {
            return Err(Error::Precondition(format!(
                "a degree-{s} expansion needs {} values, got {}",
                s + 1,
                values.len()
            )));
        }
        Self::new(model, taylor_coefficients(values))
    }

    pub fn model(&self) -> &ModelRef {
        &self.model
    }

    pub fn coefficients(&self) -> &[UnitriangularElement] {
        &self.taylor
    }

    pub fn coefficient(&self, i: usize) -> &UnitriangularElement {
        &self.taylor[i]
    }

    pub fn degree(&self) -> usize {
        self.taylor.len() - 1
    }

    pub fn eval(&self, n: i64) -> UnitriangularElement {
        self.eval_big(&BigInt::from(n))
    }

    pub fn eval_big(&self, n: &BigInt) -> UnitriangularElement {
        if self.taylor.len() == 1 {
            return self.taylor[0].clone();
        }
        product(self.model.dim(), &self.logs, n)
    }

    /// Values at `0..=s`, the data the expansion consumes.
    pub fn sample(&self) -> Vec<UnitriangularElement> {
        (0..=self.model.degree() as i64).map(|n| self.eval(n)).collect()
    }

    /// `n -> g(n) h(n)`; closure under this product is verified by re-expansion.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        let values: Vec<_> = (0..=self.model.degree() as i64)
            .map(|n| self.eval(n).mul(&other.eval(n)))
            .collect();
        Self::expand(self.model.clone(), &values)
    }

    /// `n -> g(a n + b)`.
    pub fn reparametrize(&self, a: i64, b: i64) -> Result<Self> {
        let values: Vec<_> = (0..=self.model.degree() as i64)
            .map(|n| self.eval(a * n + b))
            .collect();
        Self::expand(self.model.clone(), &values)
    }

    /// Coefficients `g_j` for `j < i` kept, the rest replaced by the identity.
    pub fn truncate(&self, i: usize) -> Self {
        let mut taylor = self.taylor.clone();
        for g in taylor.iter_mut().skip(i) {
            *g = self.model.identity();
        }
        let logs = taylor.iter().map(UnitriangularElement::log).collect();
        PolynomialSequence {
            model: self.model.clone(),
            taylor,
            logs,
        }
    }

    pub fn to_report(&self) -> Result<TaylorReport> {
        let coefficients = self
            .taylor
            .iter()
            .map(|g| {
                Ok(self
                    .model
                    .malcev_coords(g)?
                    .iter()
                    .map(format_rational)
                    .collect())
            })
            .collect::<Result<_>>()?;
        Ok(TaylorReport {
            model: self.model.name().to_string(),
            coefficients,
        })
    }
}

/// Mal'cev coordinates of each Taylor coefficient as exact rational strings.
#[derive(Clone, Debug, Serialize)]
pub struct TaylorReport {
    pub model: String,
    pub coefficients: Vec<Vec<String>>,
}

impl FilteredNilmanifoldModel {
    /// The shifted prefiltration `G'_j = G_{j+k}`.
    pub fn shifted(&self, k: usize) -> Result<FilteredNilmanifoldModel> {
        if k == 0 {
            return Ok(self.clone());
        }
        if k >= self.degree() {
            return Err(Error::Precondition(format!(
                "cannot shift a degree-{} filtration by {k}",
                self.degree()
            )));
        }
        FilteredNilmanifoldModel::new(
            format!("{}+{k}", self.name()),
            self.dim(),
            self.basis().to_vec(),
            self.level_dims()[k..].to_vec(),
            true,
        )
    }
}

pub fn shared(model: FilteredNilmanifoldModel) -> ModelRef {
    Arc::new(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gowers::rng;
    use num_traits::Zero;
    use proptest::prelude::*;
    use rand::Rng;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn constant_sequence() {
        let h = shared(FilteredNilmanifoldModel::heisenberg_lcs());
        let c = h.from_coords(&[q(1, 3), q(2, 5), q(-1, 7)]);
        let p = PolynomialSequence::expand(h.clone(), &vec![c.clone(); 3]).unwrap();
        assert_eq!(p.coefficient(0), &c);
        assert!(p.coefficient(1).is_identity() && p.coefficient(2).is_identity());
        assert_eq!(p.eval(-17), c);
    }

    #[test]
    fn abelian_quadratic() {
        let line = shared(FilteredNilmanifoldModel::torus(1, 2).unwrap());
        let (a, b) = (q(2, 7), q(-3, 5));
        let vals: Vec<_> = [q(0, 1), a.clone(), &a * q(2, 1) + &b]
            .iter()
            .map(|t| line.from_coords(std::slice::from_ref(t)))
            .collect();
        let p = PolynomialSequence::expand(line.clone(), &vals).unwrap();
        let coords: Vec<_> = p.coefficients().iter().map(|g| line.malcev_coords(g).unwrap()[0].clone()).collect();
        assert_eq!(coords, vec![q(0, 1), a, b]);
    }

    #[test]
    fn heisenberg_eval_by_hand() {
        let h = shared(FilteredNilmanifoldModel::heisenberg_lcs());
        let g1 = h.exp_coord(0, &q(1, 1));
        let g2 = h.exp_coord(2, &q(1, 1));
        let p = PolynomialSequence::new(h.clone(), vec![h.identity(), g1, g2]).unwrap();
        let mut expected = RatMatrix::identity(3);
        expected.set(0, 1, q(2, 1));
        expected.set(0, 2, q(1, 1));
        assert_eq!(p.eval(2).matrix(), &expected);
        assert_eq!(p.eval(0), h.identity());
    }

    #[test]
    fn non_polynomial_values_are_rejected() {
        let h = shared(FilteredNilmanifoldModel::heisenberg_lcs());
        // a quadratic in the horizontal direction is not in poly(Z, G_lcs)
        let vals: Vec<_> = [0, 1, 4].iter().map(|&n| h.exp_coord(0, &q(n, 1))).collect();
        assert!(matches!(
            PolynomialSequence::expand(h, &vals),
            Err(Error::LevelViolation { index: 2 })
        ));
    }

    #[test]
    fn identity_sequence() {
        let h = shared(FilteredNilmanifoldModel::heisenberg_deg3());
        let p = PolynomialSequence::identity(h);
        assert!((-5..5).all(|n| p.eval(n).is_identity()));
    }

    fn random_rational(r: &mut impl Rng) -> BigRational {
        q(r.gen_range(-30..30), r.gen_range(1..12))
    }

    fn random_sequence(model: &ModelRef, seed: u64) -> PolynomialSequence {
        let mut r = rng(seed);
        let taylor = (0..=model.degree())
            .map(|i| {
                let t: Vec<_> = (0..model.m())
                    .map(|j| {
                        if j < model.level_start(i) {
                            BigRational::zero()
                        } else {
                            random_rational(&mut r)
                        }
                    })
                    .collect();
                model.from_coords(&t)
            })
            .collect();
        PolynomialSequence::new(model.clone(), taylor).unwrap()
    }

    #[test]
    fn round_trip_100_seeds() {
        for model in [FilteredNilmanifoldModel::heisenberg_lcs(), FilteredNilmanifoldModel::heisenberg_deg3()] {
            let model = shared(model);
            for seed in 0..100 {
                let p = random_sequence(&model, seed);
                let back = PolynomialSequence::expand(model.clone(), &p.sample()).unwrap();
                assert_eq!(back, p);
            }
        }
    }

    #[test]
    fn products_stay_polynomial() {
        let model = shared(FilteredNilmanifoldModel::heisenberg_lcs());
        for seed in 0..20 {
            let a = random_sequence(&model, seed);
            let b = random_sequence(&model, seed + 1000);
            let ab = a.pointwise_mul(&b).unwrap();
            for n in -4..7 {
                assert_eq!(ab.eval(n), a.eval(n).mul(&b.eval(n)));
            }
        }
    }

    #[test]
    fn shifted_prefiltration() {
        let model = FilteredNilmanifoldModel::heisenberg_lcs();
        let sh = model.shifted(1).unwrap();
        assert_eq!(sh.level_dims(), &[3, 1]);
        assert!(sh.is_prefiltration());
        assert!(model.shifted(2).is_err());
        let deep = FilteredNilmanifoldModel::heisenberg_deg3().shifted(1).unwrap();
        assert_eq!(deep.level_dims(), &[3, 1, 1]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn eval_matches_dilation(seed in 0u64..1000, a in -3i64..4, b in -3i64..4) {
            let model = shared(FilteredNilmanifoldModel::heisenberg_deg3());
            let p = random_sequence(&model, seed);
            let d = p.reparametrize(a, b).unwrap();
            for n in -3..4 {
                prop_assert_eq!(d.eval(n), p.eval(a * n + b));
            }
        }
    }
}
