//! Randomized exact checks of the Taylor calculus: expansion round trips,
//! the scaling and Newton congruences mod `G_i^triangledown`, coefficients of
//! differenced sequences, and single-step coefficient factorization.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use super::character::{
    congruent_mod_nabla, enumerate_characters, factor_coefficient, integral_mod_nabla, FactorOutcome, LevelCharacter,
};
use super::model::{FilteredNilmanifoldModel, ModelRef, UnitriangularElement};
use super::taylor::{shared, taylor_coefficients, PolynomialSequence};
use crate::error::{Error, Result};

/// Numerator in `[-height, height]`, denominator in `[1, height]`.
pub fn random_rational(r: &mut impl Rng, height: i64) -> BigRational {
    BigRational::new(r.gen_range(-height..=height).into(), r.gen_range(1..=height).into())
}

/// A random element of `G_i`; integral coordinates when `integral` is set.
pub fn random_level_element(
    model: &FilteredNilmanifoldModel,
    i: usize,
    r: &mut impl Rng,
    height: i64,
    integral: bool,
) -> UnitriangularElement {
    let t: Vec<BigRational> = (0..model.m())
        .map(|j| {
            if j < model.level_start(i) {
                BigRational::zero()
            } else if integral {
                BigRational::from_integer(r.gen_range(-height..=height).into())
            } else {
                random_rational(r, height)
            }
        })
        .collect();
    model.from_coords(&t)
}

pub fn random_sequence(model: &ModelRef, r: &mut impl Rng, height: i64) -> PolynomialSequence {
    let taylor = (0..=model.degree())
        .map(|i| random_level_element(model, i, r, height, false))
        .collect();
    PolynomialSequence::new(model.clone(), taylor).expect("coefficients are drawn inside their levels")
}

/// Expansion of the values at `0..=s` returns the same coefficients, and the
/// product formula agrees with the re-expanded sequence on a wider window.
pub fn expand_eval_round_trip(p: &PolynomialSequence) -> Result<bool> {
    let back = PolynomialSequence::expand(p.model().clone(), &p.sample())?;
    let s = p.model().degree() as i64;
    Ok(back == *p && (-3..=s + 4).all(|n| back.eval(n) == p.eval(n)))
}

/// `h(n) = g(qn)` has `h_i = g_i^{q^i} mod G_i^triangledown` at every level.
pub fn scaling_holds(p: &PolynomialSequence, q: i64) -> Result<bool> {
    let model = p.model();
    let h = p.reparametrize(q, 0)?;
    for i in 1..=model.degree() {
        let power = p.coefficient(i).pow_int(&BigInt::from(q).pow(i as u32));
        if !congruent_mod_nabla(model, i, h.coefficient(i), &power)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `C(x, j)` for rational `x`.
fn binomial_rational(x: &BigRational, j: usize) -> BigRational {
    let mut acc = BigRational::one();
    for l in 0..j {
        acc = acc * (x - BigRational::from_integer(l.into())) / BigRational::from_integer((l + 1).into());
    }
    acc
}

/// A sequence with `g(qZ)` inside `Gamma`: `g(n) = prod_j c_j^{C(n/q, j)}` for
/// random lattice elements `c_j in Gamma_j`.
pub fn sequence_integral_on_multiples(model: &ModelRef, q: i64, r: &mut impl Rng, height: i64) -> Result<PolynomialSequence> {
    if q == 0 {
        return Err(Error::Precondition("q must be nonzero".into()));
    }
    let c: Vec<UnitriangularElement> = (0..=model.degree())
        .map(|j| random_level_element(model, j, r, height, true))
        .collect();
    let values: Vec<UnitriangularElement> = (0..=model.degree() as i64)
        .map(|n| {
            let x = BigRational::new(n.into(), q.into());
            c.iter()
                .enumerate()
                .fold(model.identity(), |acc, (j, cj)| acc.mul(&cj.pow(&binomial_rational(&x, j))))
        })
        .collect();
    PolynomialSequence::expand(model.clone(), &values)
}

/// For `g` with `g(qZ)` inside `Gamma`, each `g_i^{q^i}` lies in
/// `Gamma_i G_i^triangledown`. Errors if the hypothesis fails.
pub fn newton_holds(p: &PolynomialSequence, q: i64) -> Result<bool> {
    let model = p.model();
    // a polynomial that is Gamma-valued on s+1 consecutive points is Gamma-valued
    for n in 0..=model.degree() as i64 {
        if !model.in_gamma(&p.eval(q * n))? {
            return Err(Error::Precondition(format!("g({}) is not in Gamma", q * n)));
        }
    }
    for i in 1..=model.degree() {
        let power = p.coefficient(i).pow_int(&BigInt::from(q).pow(i as u32));
        if !integral_mod_nabla(model, i, &power)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `d_{e_i} ... d_{e_1} f(n)` with `d_e f(n) = f(n + e) f(n)^{-1}`.
fn iterated_derivative(f: &dyn Fn(i64) -> UnitriangularElement, steps: &[i64], n: i64) -> UnitriangularElement {
    match steps.split_last() {
        None => f(n),
        Some((&e, rest)) => iterated_derivative(f, rest, n + e).mul(&iterated_derivative(f, rest, n).inverse()),
    }
}

/// For `h(n) = g(n+q)^{-1} g(n)`: the sampled `i`-fold derivatives of `h` lie in
/// `G_{i+1}`, and then every Taylor coefficient `h_i` lies in `G_{i+1}`
/// (equivalently, `h` expands over the shifted prefiltration).
pub fn shifted_taylor_holds(p: &PolynomialSequence, q: i64, r: &mut impl Rng) -> Result<bool> {
    let model = p.model();
    let s = model.degree();
    let h = |n: i64| p.eval(n + q).inverse().mul(&p.eval(n));
    for i in 0..=s {
        for _ in 0..3 {
            let steps: Vec<i64> = (0..i).map(|_| r.gen_range(-3..=3)).collect();
            let n = r.gen_range(-5..=5);
            if !model.in_level(&iterated_derivative(&h, &steps, n), i + 1)? {
                return Err(Error::Internal("differenced sequence violates the derivative hypothesis".into()));
            }
        }
    }
    let values: Vec<UnitriangularElement> = (0..=s as i64).map(h).collect();
    let coefficients = taylor_coefficients(&values);
    for (i, hi) in coefficients.iter().enumerate() {
        if !model.in_level(hi, i + 1)? {
            return Ok(false);
        }
    }
    if s >= 2 {
        let shifted = shared(model.shifted(1)?);
        PolynomialSequence::expand(shifted, &values[..s])?;
    }
    Ok(true)
}

/// A level-`i` coefficient on which a random character of complexity at most
/// `a` is integral: level coordinates `u + w / q^i` with `k . w = 0 mod q^i`.
/// `None` when the level has no such character.
pub fn plant_non_irrational(
    model: &FilteredNilmanifoldModel,
    i: usize,
    a: u64,
    q: u64,
    r: &mut impl Rng,
) -> Result<Option<(UnitriangularElement, LevelCharacter)>> {
    let characters = enumerate_characters(model, i, a)?;
    let Some(xi) = characters.choose(r).cloned() else {
        return Ok(None);
    };
    let modulus = q
        .checked_pow(i as u32)
        .ok_or_else(|| Error::Precondition("q^i overflows".into()))?;
    let pivot = xi.k.iter().position(|&x| x != 0).expect("nontrivial character");
    let mut w: Vec<i128> = (0..xi.k.len()).map(|_| r.gen_range(0..modulus) as i128).collect();
    w[pivot] = 0;
    let rest: i128 = xi.k.iter().zip(&w).map(|(&k, &x)| k as i128 * x).sum();
    // k_pivot is invertible mod q since 0 < |k_pivot| <= a < p_1(q)
    let kp = xi.k[pivot].rem_euclid(modulus as i64) as u64;
    let inv = modular_inverse(kp, modulus).ok_or_else(|| Error::Precondition("k is not invertible mod q".into()))?;
    w[pivot] = ((-rest).rem_euclid(modulus as i128) * inv as i128).rem_euclid(modulus as i128);
    let mut t: Vec<BigRational> = (0..model.m()).map(|_| BigRational::zero()).collect();
    for (slot, j) in model.level_range(i).enumerate() {
        let u = BigInt::from(r.gen_range(-9..=9));
        t[j] = BigRational::from_integer(u) + BigRational::new(w[slot].into(), BigInt::from(modulus));
    }
    for slot in t.iter_mut().skip(model.level_start(i + 1)) {
        *slot = random_rational(r, 9);
    }
    Ok(Some((model.from_coords(&t), xi)))
}

fn modular_inverse(a: u64, m: u64) -> Option<u64> {
    use num_integer::Integer;
    let e = (a as i128).extended_gcd(&(m as i128));
    (e.gcd == 1).then(|| e.x.rem_euclid(m as i128) as u64)
}

/// Factorization of a coefficient: `gamma in Gamma_i`, `xi(g') = 0` for the
/// returned character, and `g' gamma = g`.
pub fn factorization_holds(
    model: &FilteredNilmanifoldModel,
    i: usize,
    g: &UnitriangularElement,
    a: u64,
    q: u64,
) -> Result<bool> {
    match factor_coefficient(model, i, g, a, q)? {
        FactorOutcome::NotApplicable => Ok(false),
        FactorOutcome::Factored {
            character,
            gamma,
            reduced,
            ..
        } => Ok(model.in_gamma(&gamma)?
            && model.in_level(&gamma, i)?
            && character.eval(model, &reduced)?.is_zero()
            && reduced.mul(&gamma) == *g
            && !character.is_trivial()),
    }
}
