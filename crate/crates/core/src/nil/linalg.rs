//! Small exact linear-algebra kernels over Q used by the model layer.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::big_to_i128;
use crate::error::{Error, Result};
use crate::snf::{integer_kernel, IntMatrix};

pub type Vector = Vec<BigRational>;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(rows: &mut [Vector]) -> Vec<usize> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = BigRational::one() / &rows[r][c];
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..cols {
                    let d = &f * &rows[r][j];
                    rows[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vector]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Inverse of a square matrix, or `None` when singular.
pub fn inverse(m: &[Vector]) -> Option<Vec<Vector>> {
    let n = m.len();
    let mut aug: Vec<Vector> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    let piv = rref(&mut aug);
    if piv.len() < n || piv[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// `v * M` for a row vector `v`.
pub fn row_times(v: &[BigRational], m: &[Vector]) -> Vector {
    let cols = m.first().map_or(0, Vec::len);
    let mut out = vec![BigRational::zero(); cols];
    for (a, row) in v.iter().zip(m) {
        if a.is_zero() {
            continue;
        }
        for (o, b) in out.iter_mut().zip(row) {
            *o += a * b;
        }
    }
    out
}

pub fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_int(k: &[i64], v: &[BigRational]) -> BigRational {
    k.iter()
        .zip(v)
        .map(|(&a, x)| x * BigRational::from_integer(BigInt::from(a)))
        .sum()
}

/// Clears denominators of a rational vector (row-wise primitive integer multiple).
pub fn integer_multiple(v: &[BigRational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect()
}

/// A Z-basis of `{k in Z^cols : k . w = 0 for all w in rows}`.
pub fn integer_annihilator(rows: &[Vector], cols: usize) -> Result<Vec<Vec<i64>>> {
    let mut echelon = rows.to_vec();
    let piv = rref(&mut echelon);
    echelon.truncate(piv.len());
    if echelon.is_empty() {
        return Ok((0..cols)
            .map(|i| (0..cols).map(|j| i64::from(i == j)).collect())
            .collect());
    }
    let int: IntMatrix = echelon
        .iter()
        .map(|r| integer_multiple(r).iter().map(big_to_i128).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    integer_kernel(&int, cols)?
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|x| i64::try_from(x).map_err(|_| Error::Internal("annihilator overflow".into())))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn inverse_round_trip() {
        let m = vec![vec![q(2), q(1)], vec![q(5), q(3)]];
        let inv = inverse(&m).unwrap();
        assert_eq!(inv, vec![vec![q(3), q(-1)], vec![q(-5), q(2)]]);
        assert!(inverse(&[vec![q(1), q(2)], vec![q(2), q(4)]]).is_none());
    }

    #[test]
    fn annihilator_of_line() {
        let rows = vec![vec![q(1), q(2), q(0)]];
        let ann = integer_annihilator(&rows, 3).unwrap();
        assert_eq!(ann.len(), 2);
        for k in &ann {
            assert_eq!(k[0] + 2 * k[1], 0);
        }
        assert_eq!(integer_annihilator(&[], 2).unwrap(), vec![vec![1, 0], vec![0, 1]]);
    }
}
