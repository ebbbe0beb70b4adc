//! Small integer and rational helpers shared across the crate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for every `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// p_1(n), the smallest prime factor, with p_1(1) = 1.
pub fn smallest_prime_factor(n: u64) -> u64 {
    if n <= 1 {
        return 1;
    }
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return d;
        }
        d += 2;
    }
    n
}

pub fn next_prime(mut n: u64) -> u64 {
    while !is_prime(n) {
        n += 1;
    }
    n
}

/// Multiplicative order of `k` modulo `p`; `None` when `gcd(k, p) != 1`.
pub fn multiplicative_order(k: i64, p: u64) -> Option<u64> {
    let k = k.rem_euclid(p as i64) as u64;
    if p <= 1 || k.gcd(&p) != 1 {
        return None;
    }
    let mut x = k % p;
    let mut n = 1u64;
    while x != 1 {
        x = mul_mod(x, k, p);
        n += 1;
    }
    Some(n)
}

/// Binomial coefficient C(n, k) for any integer n (falling factorial / k!).
pub fn binomial(n: i128, k: usize) -> i128 {
    let mut acc: i128 = 1;
    for j in 0..k as i128 {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

pub fn binomial_big(n: &BigInt, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * (n - BigInt::from(j)) / BigInt::from(j + 1);
    }
    acc
}

/// Extended gcd on a vector: returns (g, c) with c . v = g = gcd(v) >= 0.
pub fn vector_bezout(v: &[i128]) -> (i128, Vec<i128>) {
    let mut coeffs = vec![0i128; v.len()];
    let mut g: i128 = 0;
    for (i, &x) in v.iter().enumerate() {
        if x == 0 {
            continue;
        }
        if g == 0 {
            g = x.abs();
            coeffs[i] = x.signum();
            continue;
        }
        let e = g.extended_gcd(&x);
        // e.gcd = e.x * g + e.y * x
        for c in coeffs.iter_mut().take(i) {
            *c *= e.x;
        }
        coeffs[i] = e.y;
        g = e.gcd;
        if g < 0 {
            g = -g;
            for c in coeffs.iter_mut() {
                *c = -*c;
            }
        }
    }
    (g, coeffs)
}

pub fn is_integer(q: &BigRational) -> bool {
    q.denom().is_one()
}

/// Reduce a rational into [0, 1).
pub fn frac(q: &BigRational) -> BigRational {
    q - q.floor()
}

pub fn big_to_i128(x: &BigInt) -> Result<i128> {
    x.to_i128()
        .ok_or_else(|| Error::Internal(format!("integer {x} does not fit in i128")))
}

/// Parses "p/q", an integer, or a finite decimal such as "0.4" into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: '{s}'"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, dec)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int_abs = int.trim_start_matches(['-', '+']);
        let int_val: BigInt = if int_abs.is_empty() {
            BigInt::zero()
        } else {
            int_abs.parse().map_err(|_| bad())?
        };
        if !dec.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let scale = num_traits::pow(BigInt::from(10), dec.len());
        let dec_val: BigInt = if dec.is_empty() {
            BigInt::zero()
        } else {
            dec.parse().map_err(|_| bad())?
        };
        let mut r = BigRational::new(int_val * &scale + dec_val, scale);
        if neg {
            r = -r;
        }
        return Ok(r);
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// ceil(alpha * n) for a non-negative rational alpha.
pub fn ceil_mul(alpha: &Rational64, n: u64) -> u64 {
    let prod = alpha * Rational64::from_integer(n as i64);
    prod.ceil().to_integer().max(0) as u64
}

/// floor(alpha * n) for a non-negative rational alpha.
pub fn floor_mul(alpha: &Rational64, n: u64) -> u64 {
    let prod = alpha * Rational64::from_integer(n as i64);
    prod.floor().to_integer().max(0) as u64
}

pub fn to_rational64(q: &BigRational) -> Result<Rational64> {
    let n = q
        .numer()
        .to_i64()
        .ok_or_else(|| Error::Parse(format!("{q} out of range")))?;
    let d = q
        .denom()
        .to_i64()
        .ok_or_else(|| Error::Parse(format!("{q} out of range")))?;
    Ok(Rational64::new(n, d))
}

pub fn abs_i128(v: &[i128]) -> i128 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn rational_abs(q: &BigRational) -> BigRational {
    q.abs()
}
