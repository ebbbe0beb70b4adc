//! Systems of integer linear forms `psi_1, ..., psi_t : Z^D -> Z`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::snf;

/// Default cap on `N^D` for exact image enumeration.
pub const DEFAULT_IMAGE_CAP: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem", into = "RawSystem")]
pub struct LinearFormSystem {
    forms: Vec<Vec<i64>>,
    name: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct RawSystem {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    forms: Vec<Vec<i64>>,
}

impl TryFrom<RawSystem> for LinearFormSystem {
    type Error = Error;
    fn try_from(raw: RawSystem) -> Result<Self> {
        let sys = LinearFormSystem::new(raw.forms)?;
        Ok(match raw.name {
            Some(n) => sys.with_name(n),
            None => sys,
        })
    }
}

impl From<LinearFormSystem> for RawSystem {
    fn from(s: LinearFormSystem) -> Self {
        RawSystem {
            name: s.name,
            forms: s.forms,
        }
    }
}

/// A presentation of the image `Lambda((Z/N)^D)` as the kernel of an integer matrix,
/// valid for every `N` coprime to `bad_modulus`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KernelPresentation {
    /// k x t matrix; each row is a homomorphism `Z^t -> Z` vanishing on the image.
    pub matrix: Vec<Vec<i64>>,
    /// Product of the nontrivial invariant factors of the cokernel's torsion.
    pub bad_modulus: u64,
    /// The nontrivial invariant factors themselves.
    pub torsion: Vec<u64>,
    pub num_forms: usize,
}

impl KernelPresentation {
    pub fn rank(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_compatible(&self, n: u64) -> bool {
        num_integer::gcd(n, self.bad_modulus) == 1
    }

    /// The kernel of the presentation mod `n`, by enumeration of `(Z/n)^t`.
    pub fn kernel_mod(&self, n: u64, cap: u128) -> Result<BTreeSet<Vec<u64>>> {
        let t = self.num_forms;
        let total = (n as u128).checked_pow(t as u32).unwrap_or(u128::MAX);
        if total > cap {
            return Err(Error::budget("kernel enumeration", total, cap));
        }
        let mut out = BTreeSet::new();
        let mut y = vec![0u64; t];
        loop {
            let ok = self.matrix.iter().all(|row| {
                let s: i128 = row.iter().zip(&y).map(|(&c, &v)| c as i128 * v as i128).sum();
                s.rem_euclid(n as i128) == 0
            });
            if ok {
                out.insert(y.clone());
            }
            if !odometer(&mut y, n) {
                break;
            }
        }
        Ok(out)
    }
}

pub(crate) fn odometer(v: &mut [u64], n: u64) -> bool {
    for x in v.iter_mut().rev() {
        *x += 1;
        if *x < n {
            return true;
        }
        *x = 0;
    }
    false
}

impl LinearFormSystem {
    pub fn new(forms: Vec<Vec<i64>>) -> Result<Self> {
        if forms.is_empty() {
            return Err(Error::InvalidSystem("at least one form is required".into()));
        }
        let d = forms[0].len();
        if d == 0 {
            return Err(Error::InvalidSystem("forms need at least one variable".into()));
        }
        for (i, f) in forms.iter().enumerate() {
            if f.len() != d {
                return Err(Error::InvalidSystem(format!(
                    "ragged rows: form {i} has {} coefficients, expected {d}",
                    f.len()
                )));
            }
            if f.iter().all(|&c| c == 0) {
                return Err(Error::InvalidSystem(format!("form {i} is identically zero")));
            }
        }
        Ok(LinearFormSystem { forms, name: None })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// (n1, n1+n2, ..., n1+(k-1)n2)
    pub fn arithmetic_progression(k: usize) -> Self {
        let forms = (0..k as i64).map(|j| vec![1, j]).collect();
        LinearFormSystem::new(forms)
            .expect("progression forms are valid")
            .with_name(format!("{k}AP"))
    }

    /// (n1, k n1)
    pub fn dependent_pair(k: i64) -> Self {
        LinearFormSystem::new(vec![vec![1], vec![k]])
            .expect("dependent pair is valid")
            .with_name(format!("(n1,{k}n1)"))
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn forms(&self) -> &[Vec<i64>] {
        &self.forms
    }

    /// Number of forms t.
    pub fn num_forms(&self) -> usize {
        self.forms.len()
    }

    /// Number of variables D.
    pub fn num_vars(&self) -> usize {
        self.forms[0].len()
    }

    pub fn max_coefficient(&self) -> u64 {
        self.forms
            .iter()
            .flatten()
            .map(|c| c.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// The size L = max(D, t, max |coefficient|).
    pub fn size(&self) -> u64 {
        (self.num_vars() as u64)
            .max(self.num_forms() as u64)
            .max(self.max_coefficient())
    }

    pub fn pairwise_independent(&self) -> bool {
        let t = self.num_forms();
        (0..t).all(|i| (i + 1..t).all(|j| rank_rational(&[&self.forms[i], &self.forms[j]]) == 2))
    }

    /// Whether `Lambda(x) = (1, ..., 1)` has a rational solution.
    pub fn is_invariant(&self) -> bool {
        let rows: Vec<&Vec<i64>> = self.forms.iter().collect();
        let base = rank_rational(&rows);
        let augmented: Vec<Vec<i64>> = self
            .forms
            .iter()
            .map(|f| {
                let mut r = f.clone();
                r.push(1);
                r
            })
            .collect();
        let aug_rows: Vec<&Vec<i64>> = augmented.iter().collect();
        rank_rational(&aug_rows) == base
    }

    /// t - 2 clamped below at 1, for pairwise-independent systems.
    pub fn default_degree(&self) -> Result<u32> {
        if !self.pairwise_independent() {
            return Err(Error::Precondition(
                "default degree requires a pairwise-independent system".into(),
            ));
        }
        Ok((self.num_forms() as u32).saturating_sub(2).max(1))
    }

    /// Presents `Lambda((Z/N)^D)` as the kernel of an integer matrix via the
    /// Smith normal form of the t x D coefficient matrix.
    pub fn kernelize(&self) -> Result<KernelPresentation> {
        let t = self.num_forms();
        let d = self.num_vars();
        let a: snf::IntMatrix = self
            .forms
            .iter()
            .map(|f| f.iter().map(|&c| c as i128).collect())
            .collect();
        let form = snf::smith_normal_form(&a, d)?;
        let r = form.rank();
        let matrix = form.left[r..]
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&x| {
                        i64::try_from(x)
                            .map_err(|_| Error::Internal("kernel entry overflow".into()))
                    })
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let torsion: Vec<u64> = form
            .invariants
            .iter()
            .filter(|&&x| x > 1)
            .map(|&x| x as u64)
            .collect();
        let bad_modulus = torsion.iter().product::<u64>().max(1);
        Ok(KernelPresentation {
            matrix,
            bad_modulus,
            torsion,
            num_forms: t,
        })
    }

    /// The point `(psi_1(n), ..., psi_t(n)) mod modulus`.
    pub fn evaluate_mod(&self, n: &[u64], modulus: u64) -> Vec<u64> {
        self.forms
            .iter()
            .map(|f| {
                let s: i128 = f.iter().zip(n).map(|(&c, &x)| c as i128 * x as i128).sum();
                s.rem_euclid(modulus as i128) as u64
            })
            .collect()
    }

    /// Exact enumeration of `Lambda((Z/N)^D)`.
    pub fn image_mod(&self, modulus: u64, cap: u128) -> Result<BTreeSet<Vec<u64>>> {
        if modulus == 0 {
            return Err(Error::Precondition("modulus must be positive".into()));
        }
        let d = self.num_vars();
        let total = (modulus as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
        if total > cap {
            return Err(Error::budget("image enumeration", total, cap));
        }
        let mut out = BTreeSet::new();
        let mut n = vec![0u64; d];
        loop {
            out.insert(self.evaluate_mod(&n, modulus));
            if !odometer(&mut n, modulus) {
                break;
            }
        }
        Ok(out)
    }

    /// Coefficients reduced mod `modulus`, as `u64` (for the counting kernels).
    pub(crate) fn reduced_forms(&self, modulus: u64) -> Vec<Vec<u64>> {
        self.forms
            .iter()
            .map(|f| f.iter().map(|&c| (c as i128).rem_euclid(modulus as i128) as u64).collect())
            .collect()
    }
}

/// Rank over Q of a list of integer rows, by fraction-free exact elimination.
pub fn rank_rational(rows: &[&Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&c| BigRational::from_integer(BigInt::from(c))).collect())
        .collect();
    rank_of(&mut m)
}

pub(crate) fn rank_of(m: &mut [Vec<BigRational>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let inv = BigRational::one() / &m[rank][c];
        for r in 0..rows {
            if r != rank && !m[r][c].is_zero() {
                let factor = &m[r][c] * &inv;
                for j in c..cols {
                    let delta = &factor * &m[rank][j];
                    m[r][j] -= delta;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}
