//! Smith normal form over the integers with unimodular transforms.

use num_integer::Integer;

use crate::error::{Error, Result};

pub type IntMatrix = Vec<Vec<i128>>;

#[derive(Clone, Debug)]
pub struct SmithForm {
    /// rows x rows unimodular, `left * a * right = diag`.
    pub left: IntMatrix,
    /// cols x cols unimodular.
    pub right: IntMatrix,
    /// Nonzero invariant factors d_1 | d_2 | ... | d_r, all positive.
    pub invariants: Vec<i128>,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.invariants.len()
    }
}

fn checked(v: Option<i128>) -> Result<i128> {
    v.ok_or_else(|| Error::Internal("integer overflow in Smith normal form".into()))
}

fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

// row_i <- a*row_i + b*row_j ; row_j <- c*row_i + d*row_j  (ad - bc = +-1)
fn combine_rows(m: &mut IntMatrix, i: usize, j: usize, a: i128, b: i128, c: i128, d: i128) -> Result<()> {
    for col in 0..m[i].len() {
        let (x, y) = (m[i][col], m[j][col]);
        let nx = checked(a.checked_mul(x).and_then(|p| b.checked_mul(y).and_then(|q| p.checked_add(q))))?;
        let ny = checked(c.checked_mul(x).and_then(|p| d.checked_mul(y).and_then(|q| p.checked_add(q))))?;
        m[i][col] = nx;
        m[j][col] = ny;
    }
    Ok(())
}

fn combine_cols(m: &mut IntMatrix, i: usize, j: usize, a: i128, b: i128, c: i128, d: i128) -> Result<()> {
    for row in m.iter_mut() {
        let (x, y) = (row[i], row[j]);
        let nx = checked(a.checked_mul(x).and_then(|p| b.checked_mul(y).and_then(|q| p.checked_add(q))))?;
        let ny = checked(c.checked_mul(x).and_then(|p| d.checked_mul(y).and_then(|q| p.checked_add(q))))?;
        row[i] = nx;
        row[j] = ny;
    }
    Ok(())
}

// Unimodular 2x2 step sending (p, x) to (g, 0). When p | x the pivot line is
// left untouched, so cleared entries elsewhere stay cleared.
fn elimination(p: i128, x: i128) -> (i128, i128, i128, i128) {
    if x % p == 0 {
        return (1, 0, -x / p, 1);
    }
    let e = p.extended_gcd(&x);
    (e.x, e.y, -x / e.gcd, p / e.gcd)
}

/// Computes the Smith normal form of an `rows x cols` integer matrix.
pub fn smith_normal_form(a: &IntMatrix, cols: usize) -> Result<SmithForm> {
    let rows = a.len();
    let mut m = a.clone();
    let mut left = identity(rows);
    let mut right = identity(cols);
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: smallest nonzero magnitude in the trailing block
        let mut pivot = None;
        for (i, row) in m.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                if x != 0 && pivot.is_none_or(|(_, _, v): (usize, usize, i128)| x.abs() < v) {
                    pivot = Some((i, j, x.abs()));
                }
            }
        }
        let Some((pi, pj, _)) = pivot else { break };
        m.swap(t, pi);
        left.swap(t, pi);
        if pj != t {
            for row in m.iter_mut() {
                row.swap(t, pj);
            }
            for row in right.iter_mut() {
                row.swap(t, pj);
            }
        }
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if m[i][t] != 0 {
                    let (a1, b1, c1, d1) = elimination(m[t][t], m[i][t]);
                    combine_rows(&mut m, t, i, a1, b1, c1, d1)?;
                    combine_rows(&mut left, t, i, a1, b1, c1, d1)?;
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                if m[t][j] != 0 {
                    let (a1, b1, c1, d1) = elimination(m[t][t], m[t][j]);
                    combine_cols(&mut m, t, j, a1, b1, c1, d1)?;
                    combine_cols(&mut right, t, j, a1, b1, c1, d1)?;
                    dirty = true;
                }
            }
            if !dirty {
                // enforce divisibility of the trailing block by the pivot
                let p = m[t][t];
                let offender = (t + 1..rows)
                    .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                    .find(|&(i, j)| m[i][j] % p != 0);
                match offender {
                    Some((i, _)) => {
                        // row_t += row_i, then reduce again
                        combine_rows(&mut m, t, i, 1, 1, 0, 1)?;
                        combine_rows(&mut left, t, i, 1, 1, 0, 1)?;
                    }
                    None => break,
                }
            }
        }
        if m[t][t] < 0 {
            for x in m[t].iter_mut() {
                *x = -*x;
            }
            for x in left[t].iter_mut() {
                *x = -*x;
            }
        }
        t += 1;
    }
    let invariants = (0..rows.min(cols))
        .map(|i| m[i][i])
        .take_while(|&d| d != 0)
        .collect();
    Ok(SmithForm {
        left,
        right,
        invariants,
    })
}

/// A Z-basis (as rows) of the integer vectors `x` with `a x = 0`.
pub fn integer_kernel(a: &IntMatrix, cols: usize) -> Result<IntMatrix> {
    if a.is_empty() {
        return Ok(identity(cols));
    }
    let snf = smith_normal_form(a, cols)?;
    let r = snf.rank();
    Ok((r..cols)
        .map(|j| snf.right.iter().map(|row| row[j]).collect())
        .collect())
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix, inner: usize, cols: usize) -> IntMatrix {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}
