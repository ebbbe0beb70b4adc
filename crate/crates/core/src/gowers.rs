//! Gowers uniformity norms on Z/N, the generalized von Neumann harness, and
//! random rounding of [0,1]-valued functions to sets.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith;
use crate::counting::{self, CyclicFunction, SubsetOfZN};
use crate::error::{Error, Result};
use crate::forms::LinearFormSystem;
use crate::fourier::Dft;

/// Default work budget (roughly `N^{d-2} * N log N`) for [`gowers_norm`].
pub const DEFAULT_NORM_BUDGET: u128 = 20_000_000_000;
/// Cap on `N^{d+1}` for the definitional evaluation.
pub const DEFINITIONAL_CAP: u128 = 100_000_000;

/// The seeded generator behind every randomized routine in the crate.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn u2_fourth_power(plan: &Dft, buf: &mut [Complex64]) -> f64 {
    plan.transform(buf);
    buf.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum()
}

/// `x -> f(x) * conj(f(x + h))`
fn multiplicative_derivative(f: &[Complex64], h: usize) -> Vec<Complex64> {
    let n = f.len();
    (0..n).map(|x| f[x] * f[(x + h) % n].conj()).collect()
}

// E over the remaining `depth` difference parameters of the U^2 fourth power.
fn averaged_u2(plan: &Dft, f: &[Complex64], depth: usize) -> f64 {
    if depth == 0 {
        let mut buf = f.to_vec();
        return u2_fourth_power(plan, &mut buf);
    }
    let n = f.len();
    let total: f64 = (0..n)
        .map(|h| averaged_u2(plan, &multiplicative_derivative(f, h), depth - 1))
        .sum();
    total / n as f64
}

/// The 2^d-th power of the U^d norm, computed from raw values.
pub fn gowers_power(values: &[Complex64], d: u32) -> Result<f64> {
    gowers_power_budgeted(values, d, DEFAULT_NORM_BUDGET)
}

pub fn gowers_power_budgeted(values: &[Complex64], d: u32, budget: u128) -> Result<f64> {
    let n = values.len();
    if d == 0 {
        return Err(Error::Precondition("U^d needs d >= 1".into()));
    }
    if n == 0 {
        return Err(Error::Precondition("empty function".into()));
    }
    if d == 1 {
        let mean = values.iter().sum::<Complex64>() / n as f64;
        return Ok(mean.norm_sqr());
    }
    let log = (n as f64).log2().ceil().max(1.0) as u128;
    let work = (n as u128)
        .checked_pow(d - 2)
        .and_then(|w| w.checked_mul(n as u128 * log))
        .unwrap_or(u128::MAX);
    if work > budget {
        return Err(Error::budget(format!("U^{d} norm on Z/{n}"), work, budget));
    }
    let plan = Dft::new(n);
    if d == 2 {
        let mut buf = values.to_vec();
        return Ok(u2_fourth_power(&plan, &mut buf));
    }
    // parallel over the first difference; per-h values are summed in index order
    let per_h: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|h| averaged_u2(&plan, &multiplicative_derivative(values, h), d as usize - 3))
        .collect();
    Ok(per_h.iter().sum::<f64>() / n as f64)
}

/// `||f||_{U^d}` by recursive differencing down to the Fourier U^2 base case.
pub fn gowers_norm(f: &CyclicFunction, d: u32) -> Result<f64> {
    gowers_norm_of(f.values(), d)
}

/// Same as [`gowers_norm`] for values that may leave the unit disc (e.g. `f - g`).
pub fn gowers_norm_of(values: &[Complex64], d: u32) -> Result<f64> {
    let p = gowers_power(values, d)?;
    Ok(p.max(0.0).powf(1.0 / f64::from(1u32 << d)))
}

/// Direct evaluation of `E_{x, h} prod_eps C^|eps| f(x + eps.h)`.
///
/// Only used as an oracle: the products along each difference tuple are built
/// incrementally, so the cost is `O(N^{d+1})`.
pub fn gowers_norm_definitional(f: &CyclicFunction, d: u32) -> Result<f64> {
    gowers_definitional_of(f.values(), d)
}

pub fn gowers_definitional_of(values: &[Complex64], d: u32) -> Result<f64> {
    let n = values.len();
    if d == 0 {
        return Err(Error::Precondition("U^d needs d >= 1".into()));
    }
    let work = (n as u128).checked_pow(d + 1).unwrap_or(u128::MAX);
    if work > DEFINITIONAL_CAP {
        return Err(Error::budget("definitional Gowers norm", work, DEFINITIONAL_CAP));
    }
    fn sum_over(f: &[Complex64], depth: u32) -> Complex64 {
        let n = f.len();
        if depth == 0 {
            return f.iter().sum();
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let mut next = vec![Complex64::new(0.0, 0.0); n];
        for h in 0..n {
            for x in 0..n {
                next[x] = f[x] * f[(x + h) % n].conj();
            }
            acc += sum_over(&next, depth - 1);
        }
        acc
    }
    // the innermost level sums over x; the d outer levels over h_1..h_d
    let total = sum_over(values, d) / (work as f64);
    Ok(total.re.max(0.0).powf(1.0 / f64::from(1u32 << d)))
}

/// Both sides of `|Sol(f) - Sol(g)| <= L ||f - g||_{U^{s+1}}`.
#[derive(Clone, Debug, Serialize)]
pub struct GvnReport {
    pub lhs: f64,
    pub rhs: f64,
    pub size: u64,
    pub s: u32,
    pub passed: bool,
}

pub fn gvn_check(
    f: &CyclicFunction,
    g: &CyclicFunction,
    system: &LinearFormSystem,
    s: u32,
) -> Result<GvnReport> {
    if s == 0 {
        return Err(Error::Precondition("s must be positive".into()));
    }
    let n = f.modulus();
    if g.modulus() != n {
        return Err(Error::ModulusMismatch {
            expected: n,
            found: g.modulus(),
        });
    }
    for h in [f, g] {
        let ok = h
            .real_values()
            .is_some_and(|v| v.iter().all(|&x| (0.0..=1.0).contains(&x)));
        if !ok {
            return Err(Error::Precondition("gvn_check needs [0,1]-valued functions".into()));
        }
    }
    if !system.pairwise_independent() {
        return Err(Error::Precondition("system must be pairwise independent".into()));
    }
    if !arith::is_prime(n) {
        return Err(Error::Precondition(format!("N = {n} must be prime")));
    }
    let t = system.num_forms();
    let sf = counting::sol_brute(&vec![f.clone(); t], system)?.value;
    let sg = counting::sol_brute(&vec![g.clone(); t], system)?.value;
    let lhs = (sf - sg).norm();
    let size = system.size();
    let rhs = size as f64 * gowers_norm_of(&f.difference(g)?, s + 1)?;
    Ok(GvnReport {
        lhs,
        rhs,
        size,
        s,
        passed: lhs <= rhs,
    })
}

/// Includes each `x` independently with probability `f(x)`, using the pinned
/// ChaCha8 stream seeded by `seed` (one uniform draw per point, in order).
pub fn random_round(f: &CyclicFunction, seed: u64) -> Result<SubsetOfZN> {
    let values = f
        .real_values()
        .filter(|v| v.iter().all(|&x| (0.0..=1.0).contains(&x)))
        .ok_or_else(|| Error::Precondition("random rounding needs [0,1]-valued f".into()))?;
    let mut rng = rng(seed);
    let mask: Vec<bool> = values.iter().map(|&p| rng.gen::<f64>() < p).collect();
    Ok(SubsetOfZN::from_mask(&mask))
}
