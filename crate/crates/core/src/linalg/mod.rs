//! Dense matrices over the rationals.
//!
//! Everything here is exact. Arithmetic operators on `&QMat` panic on shape
//! mismatch (shapes are fixed by construction inside this crate); the
//! fallible tensor operations return [`Error::InvalidDimension`].

mod elimination;
mod tensor;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rat;

pub use elimination::{invert, nullspace, rank};
pub use tensor::{embed, embed_sites, kron, partial_trace, partial_transpose, TensorSpace};

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MatrixRecord", into = "MatrixRecord")]
pub struct QMat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

/// Wire form: `{"rows", "cols", "entries": [["p/q", ...], ...]}`.
#[derive(Serialize, Deserialize)]
struct MatrixRecord {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<Rat>>,
}

impl From<QMat> for MatrixRecord {
    fn from(m: QMat) -> Self {
        MatrixRecord {
            rows: m.rows,
            cols: m.cols,
            entries: m.data.chunks(m.cols).map(|r| r.to_vec()).collect(),
        }
    }
}

impl TryFrom<MatrixRecord> for QMat {
    type Error = Error;

    fn try_from(rec: MatrixRecord) -> Result<Self> {
        if rec.entries.len() != rec.rows || rec.entries.iter().any(|r| r.len() != rec.cols) {
            return Err(Error::InvalidDimension(format!(
                "matrix record does not match declared shape {}x{}",
                rec.rows, rec.cols
            )));
        }
        QMat::from_rows(rec.entries)
    }
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        QMat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, Rat::one())
    }

    pub fn scalar(n: usize, value: Rat) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = value.clone();
        }
        m
    }

    pub fn diagonal(values: &[Rat]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidDimension("ragged or empty row list".into()));
        }
        Ok(QMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Convenience for literals: `QMat::from_i64(&[[1, 2], [3, 4]])`.
    pub fn from_i64<const C: usize>(rows: &[[i64; C]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rat::from_int(v)).collect())
                .collect(),
        )
        .expect("literal matrix")
    }

    pub fn column(values: Vec<Rat>) -> Self {
        let n = values.len();
        assert!(n > 0, "empty column");
        QMat {
            rows: n,
            cols: 1,
            data: values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Rat] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> QMat {
        let mut t = QMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn trace(&self) -> Rat {
        assert!(self.is_square());
        (0..self.rows).map(|i| &self[(i, i)]).sum()
    }

    pub fn scale(&self, c: &Rat) -> QMat {
        if c.is_zero() {
            return QMat::zeros(self.rows, self.cols);
        }
        QMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    /// `self + c * Id`.
    pub fn shift(&self, c: &Rat) -> QMat {
        assert!(self.is_square());
        let mut m = self.clone();
        for i in 0..self.rows {
            m[(i, i)] += c;
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rat::is_zero)
    }

    pub fn pow(&self, exp: u32) -> QMat {
        assert!(self.is_square());
        let mut acc = QMat::identity(self.rows);
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    pub fn column_sums(&self) -> Vec<Rat> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| &self[(i, j)]).sum())
            .collect()
    }

    /// Zero column sums and nonnegative off-diagonal entries.
    pub fn is_markov_generator(&self) -> bool {
        self.is_square()
            && self.column_sums().iter().all(Rat::is_zero)
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| i == j || !self[(i, j)].is_negative())
            })
    }

    /// Position of the first entry (row-major) where `self` and `other` differ.
    pub fn first_mismatch(&self, other: &QMat) -> Option<(usize, usize)> {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        self.data
            .iter()
            .zip(&other.data)
            .position(|(a, b)| a != b)
            .map(|k| (k / self.cols, k % self.cols))
    }

    pub fn commutator(&self, other: &QMat) -> QMat {
        &(self * other) - &(other * self)
    }

    /// `by * self * by_inverse`.
    pub fn conjugate(&self, by: &QMat, by_inverse: &QMat) -> QMat {
        &(by * self) * by_inverse
    }

    pub fn map(&self, f: impl Fn(&Rat) -> Rat) -> QMat {
        QMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.cols)
            .map(|r| r.iter().map(Rat::to_f64).collect())
            .collect()
    }

    /// Entries as a flat list, for column vectors.
    pub fn into_vec(self) -> Vec<Rat> {
        self.data
    }
}

impl Index<(usize, usize)> for QMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for QMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMat {}x{} [", self.rows, self.cols)?;
        for r in self.data.chunks(self.cols) {
            let cells: Vec<String> = r.iter().map(ToString::to_string).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<'b> Add<&'b QMat> for &QMat {
    type Output = QMat;
    fn add(self, rhs: &'b QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        QMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'b> Sub<&'b QMat> for &QMat {
    type Output = QMat;
    fn sub(self, rhs: &'b QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        QMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &QMat {
    type Output = QMat;
    fn neg(self) -> QMat {
        self.map(|x| -x)
    }
}

impl<'b> Mul<&'b QMat> for &QMat {
    type Output = QMat;
    fn mul(self, rhs: &'b QMat) -> QMat {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in mul");
        let mut out = QMat::zeros(self.rows, rhs.cols);
        // The operators in this crate are sparse, so skip zero factors early.
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, a) in self.row(i).iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    if !b.is_zero() {
                        *o += a * b;
                    }
                }
            }
        }
        out
    }
}

macro_rules! owned_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<QMat> for QMat {
            type Output = QMat;
            fn $method(self, rhs: QMat) -> QMat {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a QMat> for QMat {
            type Output = QMat;
            fn $method(self, rhs: &'a QMat) -> QMat {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<QMat> for &'a QMat {
            type Output = QMat;
            fn $method(self, rhs: QMat) -> QMat {
                self.$method(&rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

/// Product of a non-empty sequence of matrices, left to right.
pub fn product<'a>(factors: impl IntoIterator<Item = &'a QMat>) -> QMat {
    let mut it = factors.into_iter();
    let first = it.next().expect("empty product").clone();
    it.fold(first, |acc, m| &acc * m)
}

/// The anti-diagonal permutation `U` reversing the species order.
pub fn reversal(n: usize) -> QMat {
    let mut u = QMat::zeros(n, n);
    for i in 0..n {
        u[(i, n - 1 - i)] = Rat::one();
    }
    u
}

/// The swap operator `P` on `C^n (x) C^n`.
pub fn swap_operator(n: usize) -> QMat {
    let mut p = QMat::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            p[(b * n + a, a * n + b)] = Rat::one();
        }
    }
    p
}

/// Elementary matrix `E_{ij}` (1-based indices).
pub fn elementary(n: usize, i: usize, j: usize) -> QMat {
    let mut e = QMat::zeros(n, n);
    e[(i - 1, j - 1)] = Rat::one();
    e
}
