//! Solution measures `Sol_Lambda(f_1, ..., f_t)` over Z/N.
//!
//! The brute-force path averages over all of `(Z/N)^D` and is the correctness
//! oracle; indicator inputs are accumulated as exact integer counts. The Fourier
//! path sums over the dual of the kernel presentation and is floating point.

use num_complex::Complex64;
use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{odometer, KernelPresentation, LinearFormSystem};
use crate::fourier::Dft;

/// Default cap on `N^D` iterations for brute-force counting.
pub const DEFAULT_BRUTE_CAP: u128 = 1_000_000_000;
/// Default cap on `N^k` dual terms for the Fourier path.
pub const DEFAULT_FAST_CAP: u128 = 50_000_000;

const MAGNITUDE_SLACK: f64 = 1e-12;

/// A function `Z/N -> C` bounded by 1 in magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicFunction {
    values: Vec<Complex64>,
}

impl CyclicFunction {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Precondition("a cyclic function needs N >= 1 values".into()));
        }
        if let Some((x, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.norm() <= 1.0 + MAGNITUDE_SLACK))
        {
            return Err(Error::Precondition(format!(
                "value at {x} has magnitude {} > 1",
                v.norm()
            )));
        }
        Ok(CyclicFunction { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn constant(c: Complex64, n: u64) -> Result<Self> {
        Self::new(vec![c; n as usize])
    }

    /// The character `x -> e(r x / N)`.
    pub fn character(r: i64, n: u64) -> Self {
        let values = (0..n as i128)
            .map(|x| crate::fourier::e_frac(r as i128 * x, n))
            .collect();
        CyclicFunction { values }
    }

    pub fn indicator(set: &SubsetOfZN) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); set.modulus() as usize];
        for &x in set.members() {
            values[x as usize] = Complex64::new(1.0, 0.0);
        }
        CyclicFunction { values }
    }

    pub fn modulus(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, x: u64) -> Complex64 {
        self.values[x as usize]
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    /// Real parts, if the function is real-valued.
    pub fn real_values(&self) -> Option<Vec<f64>> {
        self.values
            .iter()
            .map(|z| (z.im == 0.0).then_some(z.re))
            .collect()
    }

    /// The support as a boolean mask, if the function is a {0,1} indicator.
    pub fn as_indicator(&self) -> Option<Vec<bool>> {
        self.values
            .iter()
            .map(|z| {
                if *z == Complex64::new(1.0, 0.0) {
                    Some(true)
                } else if *z == Complex64::new(0.0, 0.0) {
                    Some(false)
                } else {
                    None
                }
            })
            .collect()
    }

    /// `x -> f(x + c)`.
    pub fn translate(&self, c: i64) -> Self {
        let n = self.values.len() as i64;
        let values = (0..n)
            .map(|x| self.values[(x + c).rem_euclid(n) as usize])
            .collect();
        CyclicFunction { values }
    }

    /// Pointwise difference. The result may leave the unit disc, so it is
    /// returned as raw values.
    pub fn difference(&self, other: &Self) -> Result<Vec<Complex64>> {
        check_same(self.modulus(), other.modulus())?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect())
    }
}

fn check_same(expected: u64, found: u64) -> Result<()> {
    if expected != found {
        return Err(Error::ModulusMismatch { expected, found });
    }
    Ok(())
}

/// A subset of Z/N, stored as its sorted members.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsetOfZN {
    modulus: u64,
    members: Vec<u64>,
}

impl SubsetOfZN {
    pub fn new(modulus: u64, mut members: Vec<u64>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::Precondition("modulus must be positive".into()));
        }
        if let Some(&x) = members.iter().find(|&&x| x >= modulus) {
            return Err(Error::Precondition(format!("member {x} outside [0, {modulus})")));
        }
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition("members must be distinct".into()));
        }
        Ok(SubsetOfZN { modulus, members })
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        SubsetOfZN {
            modulus: mask.len() as u64,
            members: (0..mask.len() as u64).filter(|&x| mask[x as usize]).collect(),
        }
    }

    pub fn full(modulus: u64) -> Self {
        SubsetOfZN {
            modulus,
            members: (0..modulus).collect(),
        }
    }

    pub fn empty(modulus: u64) -> Self {
        SubsetOfZN {
            modulus,
            members: Vec::new(),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.modulus as usize];
        for &x in &self.members {
            m[x as usize] = true;
        }
        m
    }

    pub fn complement(&self) -> Self {
        let mask = self.mask();
        Self::from_mask(&mask.iter().map(|b| !b).collect::<Vec<_>>())
    }

    pub fn density(&self) -> Rational64 {
        Rational64::new(self.members.len() as i64, self.modulus as i64)
    }
}

/// Result of a solution-measure computation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolValue {
    pub value: Complex64,
    /// `(count, N^D)` when every input was a {0,1} indicator.
    pub exact: Option<(u128, u128)>,
}

impl SolValue {
    pub fn exact_rational(&self) -> Option<Rational64> {
        self.exact
            .map(|(c, total)| Rational64::new(c as i64, total as i64))
    }
}

fn validate_inputs(num: usize, moduli: impl Iterator<Item = u64>, system: &LinearFormSystem) -> Result<u64> {
    if num != system.num_forms() {
        return Err(Error::Precondition(format!(
            "{num} functions supplied for a system of {} forms",
            system.num_forms()
        )));
    }
    let mut moduli = moduli;
    let n = moduli.next().ok_or_else(|| Error::Precondition("no functions supplied".into()))?;
    for m in moduli {
        check_same(n, m)?;
    }
    Ok(n)
}

pub(crate) fn iteration_count(n: u64, d: usize, cap: u128) -> Result<u128> {
    let total = (n as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if total > cap {
        return Err(Error::budget("brute-force solution count", total, cap));
    }
    Ok(total)
}

/// Walks every `n` in `(Z/N)^D` with the first variable fixed to `first`,
/// calling `visit` with the current form values.
pub(crate) fn walk_slice(coeffs: &[Vec<u64>], n: u64, first: u64, mut visit: impl FnMut(&[u64])) {
    let t = coeffs.len();
    let d = coeffs[0].len();
    let mut vals: Vec<u64> = coeffs.iter().map(|c| (c[0] as u128 * first as u128 % n as u128) as u64).collect();
    let mut digits = vec![0u64; d - 1];
    loop {
        visit(&vals);
        // every digit change (increment or wrap) adds the coefficient mod n
        let mut j = d - 1;
        loop {
            if j == 0 {
                return;
            }
            for i in 0..t {
                vals[i] += coeffs[i][j];
                if vals[i] >= n {
                    vals[i] -= n;
                }
            }
            let slot = &mut digits[j - 1];
            *slot += 1;
            if *slot < n {
                break;
            }
            *slot = 0;
            j -= 1;
        }
    }
}

/// Exact count of `n in (Z/N)^D` with `psi_i(n) in A_i` for all i.
pub fn count_sets(masks: &[&[bool]], system: &LinearFormSystem, cap: u128) -> Result<(u128, u128)> {
    let n = validate_inputs(masks.len(), masks.iter().map(|m| m.len() as u64), system)?;
    let total = iteration_count(n, system.num_vars(), cap)?;
    let coeffs = system.reduced_forms(n);
    let per_first: Vec<u128> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut c = 0u128;
            walk_slice(&coeffs, n, first, |vals| {
                if vals.iter().zip(masks).all(|(&v, m)| m[v as usize]) {
                    c += 1;
                }
            });
            c
        })
        .collect();
    Ok((per_first.iter().sum(), total))
}

/// Whether no `n` has every `psi_i(n)` in `A`; stops at the first configuration.
pub fn is_free(mask: &[bool], system: &LinearFormSystem, cap: u128) -> Result<bool> {
    let n = mask.len() as u64;
    iteration_count(n, system.num_vars(), cap)?;
    let coeffs = system.reduced_forms(n);
    Ok((0..n).into_par_iter().all(|first| {
        let mut hit = false;
        walk_slice(&coeffs, n, first, |vals| {
            if !hit && vals.iter().all(|&v| mask[v as usize]) {
                hit = true;
            }
        });
        !hit
    }))
}

/// `Sol_Lambda` of a single set, exactly.
pub fn sol_set(set: &SubsetOfZN, system: &LinearFormSystem) -> Result<Rational64> {
    let mask = set.mask();
    let masks: Vec<&[bool]> = vec![&mask; system.num_forms()];
    let (c, total) = count_sets(&masks, system, DEFAULT_BRUTE_CAP)?;
    Ok(Rational64::new(c as i64, total as i64))
}

/// Brute-force `E_{n in (Z/N)^D} prod_i f_i(psi_i(n))`.
pub fn sol_brute(fs: &[CyclicFunction], system: &LinearFormSystem) -> Result<SolValue> {
    sol_brute_capped(fs, system, DEFAULT_BRUTE_CAP)
}

pub fn sol_brute_capped(fs: &[CyclicFunction], system: &LinearFormSystem, cap: u128) -> Result<SolValue> {
    let n = validate_inputs(fs.len(), fs.iter().map(|f| f.modulus()), system)?;
    let masks: Option<Vec<Vec<bool>>> = fs.iter().map(|f| f.as_indicator()).collect();
    if let Some(masks) = masks {
        let refs: Vec<&[bool]> = masks.iter().map(|m| m.as_slice()).collect();
        let (c, total) = count_sets(&refs, system, cap)?;
        return Ok(SolValue {
            value: Complex64::new(c as f64 / total as f64, 0.0),
            exact: Some((c, total)),
        });
    }
    let total = iteration_count(n, system.num_vars(), cap)?;
    let coeffs = system.reduced_forms(n);
    let partial: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut acc = Complex64::new(0.0, 0.0);
            walk_slice(&coeffs, n, first, |vals| {
                let mut p = Complex64::new(1.0, 0.0);
                for (f, &v) in fs.iter().zip(vals) {
                    p *= f.values[v as usize];
                }
                acc += p;
            });
            acc
        })
        .collect();
    let sum: Complex64 = partial.iter().sum();
    Ok(SolValue {
        value: sum / total as f64,
        exact: None,
    })
}

/// Fourier evaluation over the dual of the kernel presentation:
/// `Sol = sum_{u in (Z/N)^k} prod_i f_i^(-(M^T u)_i)`.
pub fn sol_fast(fs: &[CyclicFunction], system: &LinearFormSystem, kp: &KernelPresentation) -> Result<Complex64> {
    sol_fast_capped(fs, system, kp, DEFAULT_FAST_CAP)
}

pub fn sol_fast_capped(
    fs: &[CyclicFunction],
    system: &LinearFormSystem,
    kp: &KernelPresentation,
    cap: u128,
) -> Result<Complex64> {
    let n = validate_inputs(fs.len(), fs.iter().map(|f| f.modulus()), system)?;
    if kp.num_forms != system.num_forms() {
        return Err(Error::Precondition("kernel presentation belongs to another system".into()));
    }
    if !kp.is_compatible(n) {
        return Err(Error::Precondition(format!(
            "N = {n} shares a factor with the bad modulus {}",
            kp.bad_modulus
        )));
    }
    let k = kp.rank();
    let terms = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if terms > cap {
        return Err(Error::budget("Fourier dual sum", terms, cap));
    }
    let plan = Dft::new(n as usize);
    let hats: Vec<Vec<Complex64>> = fs.iter().map(|f| plan.forward(f.values())).collect();
    let t = system.num_forms();
    // columns of M^T u, reduced mod n
    let cols: Vec<Vec<u64>> = kp
        .matrix
        .iter()
        .map(|row| row.iter().map(|&c| (c as i128).rem_euclid(n as i128) as u64).collect())
        .collect();
    let mut u = vec![0u64; k];
    let mut acc = Complex64::new(0.0, 0.0);
    loop {
        let mut p = Complex64::new(1.0, 0.0);
        for i in 0..t {
            let mut c: u128 = 0;
            for (j, &uj) in u.iter().enumerate() {
                c += cols[j][i] as u128 * uj as u128;
            }
            let r = (n as u128 - c % n as u128) % n as u128;
            p *= hats[i][r as usize];
        }
        acc += p;
        if !odometer(&mut u, n) {
            break;
        }
    }
    Ok(acc)
}

/// `(Sol_3AP(A), Sol_3AP(A^c))` exactly; their sum is `1 - 3 alpha + 3 alpha^2`.
pub fn complement_sol(set: &SubsetOfZN) -> Result<(Rational64, Rational64)> {
    if set.modulus().is_multiple_of(2) {
        return Err(Error::Precondition("complement identity needs odd N".into()));
    }
    let ap = LinearFormSystem::arithmetic_progression(3);
    Ok((sol_set(set, &ap)?, sol_set(&set.complement(), &ap)?))
}

/// `E_x |f(x) - g(x)|`.
pub fn l1_deviation(f: &CyclicFunction, g: &CyclicFunction) -> Result<f64> {
    let d = f.difference(g)?;
    Ok(d.iter().map(|z| z.norm()).sum::<f64>() / d.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: u64, xs: &[u64]) -> SubsetOfZN {
        SubsetOfZN::new(n, xs.to_vec()).unwrap()
    }

    fn ap3() -> LinearFormSystem {
        LinearFormSystem::arithmetic_progression(3)
    }

    #[test]
    fn brute_examples() {
        let full = CyclicFunction::indicator(&SubsetOfZN::full(9));
        let v = sol_brute(&[full.clone(), full.clone(), full], &ap3()).unwrap();
        assert_eq!(v.exact_rational(), Some(Rational64::from_integer(1)));

        let a = CyclicFunction::indicator(&set(5, &[0, 1]));
        let v = sol_brute(&[a.clone(), a.clone(), a], &ap3()).unwrap();
        assert_eq!(v.exact, Some((2, 25)));

        let b = CyclicFunction::indicator(&set(5, &[2, 3, 4]));
        let v = sol_brute(&[b.clone(), b.clone(), b], &ap3()).unwrap();
        assert_eq!(v.exact, Some((5, 25)));
    }

    #[test]
    fn brute_rejects_bad_inputs() {
        let a = CyclicFunction::indicator(&set(5, &[0]));
        let b = CyclicFunction::indicator(&set(7, &[0]));
        assert!(matches!(
            sol_brute(&[a.clone(), a.clone(), b], &ap3()),
            Err(Error::ModulusMismatch { .. })
        ));
        assert!(sol_brute(&[a.clone(), a.clone()], &ap3()).is_err());
        let big = CyclicFunction::indicator(&SubsetOfZN::full(2000));
        assert!(sol_brute_capped(&[big.clone(), big.clone(), big], &ap3(), 1_000_000)
            .unwrap_err()
            .is_budget());
    }

    #[test]
    fn fast_constant_is_power() {
        let sys = LinearFormSystem::arithmetic_progression(4);
        let kp = sys.kernelize().unwrap();
        let c = Complex64::new(0.3, -0.4);
        let f = CyclicFunction::constant(c, 11).unwrap();
        let v = sol_fast(&vec![f; 4], &sys, &kp).unwrap();
        assert!((v - c.powu(4)).norm() < 1e-12);
    }

    #[test]
    fn fast_rejects_bad_modulus() {
        let sys = LinearFormSystem::new(vec![vec![1, 0], vec![1, 2]]).unwrap();
        let kp = sys.kernelize().unwrap();
        let f = CyclicFunction::constant(Complex64::new(0.5, 0.0), 6).unwrap();
        assert!(sol_fast(&[f.clone(), f], &sys, &kp).is_err());
    }

    #[test]
    fn complement_examples() {
        let (a, b) = complement_sol(&set(5, &[0, 1])).unwrap();
        assert_eq!(a, Rational64::new(2, 25));
        assert_eq!(b, Rational64::new(5, 25));
        assert_eq!(a + b, Rational64::new(7, 25));
        let (a, b) = complement_sol(&SubsetOfZN::empty(7)).unwrap();
        assert_eq!((a, b), (Rational64::from_integer(0), Rational64::from_integer(1)));
        let (a, b) = complement_sol(&SubsetOfZN::full(7)).unwrap();
        assert_eq!((a, b), (Rational64::from_integer(1), Rational64::from_integer(0)));
        assert!(complement_sol(&SubsetOfZN::full(8)).is_err());
    }

    #[test]
    fn l1_examples() {
        let one = CyclicFunction::constant(Complex64::new(1.0, 0.0), 4).unwrap();
        let zero = CyclicFunction::constant(Complex64::new(0.0, 0.0), 4).unwrap();
        assert_eq!(l1_deviation(&one, &one).unwrap(), 0.0);
        assert_eq!(l1_deviation(&one, &zero).unwrap(), 1.0);
        let delta = CyclicFunction::indicator(&set(4, &[0]));
        assert_eq!(l1_deviation(&delta, &zero).unwrap(), 0.25);
        let other = CyclicFunction::constant(Complex64::new(0.0, 0.0), 5).unwrap();
        assert!(l1_deviation(&one, &other).is_err());
    }

    #[test]
    fn subset_validation() {
        assert!(SubsetOfZN::new(5, vec![5]).is_err());
        assert!(SubsetOfZN::new(5, vec![1, 1]).is_err());
        assert_eq!(set(5, &[3, 1]).members(), &[1, 3]);
        assert_eq!(set(5, &[0, 1]).complement().members(), &[2, 3, 4]);
    }

    #[test]
    fn function_validation() {
        assert!(CyclicFunction::from_real(&[0.5, 1.5]).is_err());
        assert!(CyclicFunction::from_real(&[]).is_err());
        assert!(CyclicFunction::from_real(&[1.0 + 1e-13]).is_ok());
    }
}
