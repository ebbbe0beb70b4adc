//! Exact rational square matrices, with the terminating exp/log series for
//! unipotent and nilpotent upper-triangular matrices.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{format_rational, parse_rational};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    dim: usize,
    entries: Vec<BigRational>,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| format_rational(self.get(i, j))).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

impl RatMatrix {
    pub fn zero(dim: usize) -> Self {
        RatMatrix {
            dim,
            entries: vec![BigRational::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(dim);
        for i in 0..dim {
            m.set(i, i, BigRational::one());
        }
        m
    }

    /// The elementary matrix with a single entry `value` at (i, j).
    pub fn unit(dim: usize, i: usize, j: usize, value: BigRational) -> Self {
        let mut m = Self::zero(dim);
        m.set(i, j, value);
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidModel("matrix is not square".into()));
        }
        Ok(RatMatrix {
            dim,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<BigRational>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    pub fn is_strictly_upper(&self) -> bool {
        (0..self.dim).all(|i| (0..=i).all(|j| self.get(i, j).is_zero()))
    }

    pub fn is_unitriangular(&self) -> bool {
        (0..self.dim).all(|i| {
            self.get(i, i).is_one() && (0..i).all(|j| self.get(i, j).is_zero())
        })
    }

    /// Entries strictly above the diagonal, row-major.
    pub fn upper_entries(&self) -> Vec<BigRational> {
        let mut v = Vec::with_capacity(self.dim * (self.dim.saturating_sub(1)) / 2);
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                v.push(self.get(i, j).clone());
            }
        }
        v
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut out = Self::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * n + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        RatMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        RatMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        RatMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    /// Lie bracket `XY - YX`.
    pub fn bracket(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// `exp(X)` for strictly upper-triangular `X`; the series stops at `X^{dim-1}`.
    pub fn exp_nilpotent(&self) -> Self {
        let mut out = Self::identity(self.dim);
        let mut term = Self::identity(self.dim);
        for j in 1..self.dim {
            term = term.mul(self).scale(&BigRational::new(BigInt::one(), BigInt::from(j)));
            if term.is_zero() {
                break;
            }
            out = out.add(&term);
        }
        out
    }

    /// `log(g)` for unitriangular `g`: `sum_j (-1)^{j+1} (g - I)^j / j`.
    pub fn log_unipotent(&self) -> Self {
        let nil = self.sub(&Self::identity(self.dim));
        let mut out = Self::zero(self.dim);
        let mut power = Self::identity(self.dim);
        for j in 1..self.dim {
            power = power.mul(&nil);
            if power.is_zero() {
                break;
            }
            let sign = if j % 2 == 1 { 1 } else { -1 };
            out = out.add(&power.scale(&BigRational::new(BigInt::from(sign), BigInt::from(j))));
        }
        out
    }

    /// Inverse of a unitriangular matrix: `sum_j (I - g)^j`.
    pub fn inverse_unipotent(&self) -> Self {
        let nil = Self::identity(self.dim).sub(self);
        let mut out = Self::identity(self.dim);
        let mut power = Self::identity(self.dim);
        for _ in 1..self.dim {
            power = power.mul(&nil);
            if power.is_zero() {
                break;
            }
            out = out.add(&power);
        }
        out
    }

    pub fn max_height(&self) -> BigInt {
        self.entries
            .iter()
            .map(|q| {
                let n = num_traits::Signed::abs(q.numer());
                let d = q.denom().clone();
                n.max(d)
            })
            .max()
            .unwrap_or_else(BigInt::zero)
    }
}

/// JSON form: rows of rational strings "p/q".
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RatMatrixJson(pub Vec<Vec<String>>);

impl From<&RatMatrix> for RatMatrixJson {
    fn from(m: &RatMatrix) -> Self {
        RatMatrixJson(
            m.rows()
                .iter()
                .map(|r| r.iter().map(format_rational).collect())
                .collect(),
        )
    }
}

impl TryFrom<&RatMatrixJson> for RatMatrix {
    type Error = Error;
    fn try_from(j: &RatMatrixJson) -> Result<Self> {
        let rows = j
            .0
            .iter()
            .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        RatMatrix::from_rows(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn unitriangular(dim: usize, vals: &[(i64, i64)]) -> RatMatrix {
        let mut m = RatMatrix::identity(dim);
        let mut it = vals.iter();
        for i in 0..dim {
            for j in i + 1..dim {
                let &(n, d) = it.next().unwrap();
                m.set(i, j, q(n, d));
            }
        }
        m
    }

    #[test]
    fn identity_log_is_zero() {
        assert!(RatMatrix::identity(4).log_unipotent().is_zero());
        assert!(RatMatrix::zero(4).exp_nilpotent().is_identity());
    }

    #[test]
    fn single_entry_log() {
        let mut g = RatMatrix::identity(3);
        g.set(0, 1, q(5, 7));
        let log = g.log_unipotent();
        assert_eq!(log, RatMatrix::unit(3, 0, 1, q(5, 7)));
    }

    proptest! {
        #[test]
        fn exp_log_round_trip(vals in proptest::collection::vec((-9i64..9, 1i64..6), 6)) {
            let g = unitriangular(4, &vals);
            let x = g.log_unipotent();
            prop_assert!(x.is_strictly_upper());
            prop_assert_eq!(x.exp_nilpotent(), g.clone());
            prop_assert_eq!(x.exp_nilpotent().log_unipotent(), x);
            prop_assert!(g.mul(&g.inverse_unipotent()).is_identity());
        }
    }
}
