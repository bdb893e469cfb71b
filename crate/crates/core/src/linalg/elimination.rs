//! Fraction-free Gauss-Jordan elimination.
//!
//! Rows are scaled to primitive integer vectors and combined with integer
//! cross-multiplication, so no rational reductions happen inside the loop.
//! The pivot in each column is the first nonzero entry at or below the
//! current pivot row, which makes the output deterministic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::QMat;
use crate::error::{Error, Result};
use crate::rational::Rat;

struct Reduced {
    rows: Vec<Vec<BigInt>>,
    /// `(row, col)` of each pivot, in row order.
    pivots: Vec<(usize, usize)>,
}

/// Clears denominators: returns the common multiplier and the integer row.
fn integer_row(row: &[Rat]) -> (BigInt, Vec<BigInt>) {
    let lcm = row
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints = row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    (lcm, ints)
}

fn make_primitive(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in row.iter_mut() {
            *x /= &g;
        }
    }
}

/// Reduced row echelon form up to row scaling, restricted to pivots in the
/// first `pivot_cols` columns.
fn reduce(rows: Vec<Vec<BigInt>>, pivot_cols: usize) -> Reduced {
    let mut rows = rows;
    let nrows = rows.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        if rows[r][c].is_negative() {
            for x in rows[r].iter_mut() {
                *x = -&*x;
            }
        }
        make_primitive(&mut rows[r]);
        let pivot_row = rows[r].clone();
        let pv = pivot_row[c].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = &pv * &*x - &f * y;
            }
            make_primitive(row);
        }
        pivots.push((r, c));
        r += 1;
    }
    Reduced { rows, pivots }
}

fn to_integer_rows(m: &QMat) -> Vec<Vec<BigInt>> {
    (0..m.rows()).map(|i| integer_row(m.row(i)).1).collect()
}

/// Exact inverse of a square matrix.
pub fn invert(m: &QMat) -> Result<QMat> {
    if !m.is_square() {
        return Err(Error::InvalidDimension(format!(
            "cannot invert a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    // Row i of [M | I], scaled by the multiplier that clears row i of M.
    let augmented: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let (scale, mut full) = integer_row(m.row(i));
            full.extend((0..n).map(|j| if i == j { scale.clone() } else { BigInt::zero() }));
            full
        })
        .collect();
    let red = reduce(augmented, n);
    if red.pivots.len() < n {
        return Err(Error::SingularMatrix);
    }
    let mut inv = QMat::zeros(n, n);
    for &(r, c) in &red.pivots {
        let pv = &red.rows[r][c];
        for j in 0..n {
            let v = &red.rows[r][n + j];
            if !v.is_zero() {
                inv[(c, j)] = Rat::from_bigints(v.clone(), pv.clone());
            }
        }
    }
    Ok(inv)
}

/// Basis of the right kernel, one column vector per free variable. Empty
/// when the kernel is trivial.
pub fn nullspace(m: &QMat) -> Vec<QMat> {
    let cols = m.cols();
    let red = reduce(to_integer_rows(m), cols);
    let pivot_cols: Vec<usize> = red.pivots.iter().map(|&(_, c)| c).collect();
    (0..cols)
        .filter(|c| !pivot_cols.contains(c))
        .map(|free| {
            let mut v = vec![Rat::zero(); cols];
            v[free] = Rat::one();
            for &(r, c) in &red.pivots {
                let a = &red.rows[r][free];
                if !a.is_zero() {
                    v[c] = Rat::from_bigints(-a, red.rows[r][c].clone());
                }
            }
            QMat::column(v)
        })
        .collect()
}

pub fn rank(m: &QMat) -> usize {
    reduce(to_integer_rows(m), m.cols()).pivots.len()
}
