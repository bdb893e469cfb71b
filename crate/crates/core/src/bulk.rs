//! Bulk dynamics: the two-site generator, the R-matrix and the Hecke
//! generator built from it.
//!
//! The Hecke generator `e = (m + q) / sqrt(q)` lives in a quadratic
//! extension. We only ever use `A = m + q`, for which the Hecke relations
//! read `A^2 = (q - 1) A + q` and `A_1 A_2 A_1 = A_2 A_1 A_2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{elementary, embed, kron, swap_operator, QMat, TensorSpace};
use crate::rational::Rat;

/// Number of species `N` (holes count as species 1) and the asymmetry `q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BulkParams {
    #[serde(rename = "N")]
    pub n_species: usize,
    pub q: Rat,
}

impl BulkParams {
    pub fn new(n_species: usize, q: Rat) -> Result<Self> {
        if n_species < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 species, got {n_species}"
            )));
        }
        if !q.is_positive() {
            return Err(Error::InvalidParameter(format!("q must be positive, got {q}")));
        }
        Ok(BulkParams { n_species, q })
    }

    /// Errors when `q = 1`, for formulas that divide by `q - 1`.
    pub fn require_asymmetric(&self) -> Result<()> {
        if self.q.is_one() {
            Err(Error::DegenerateQ)
        } else {
            Ok(())
        }
    }
}

/// Local generator on two sites: a pair `(i, j)` with `i > j` swaps at rate
/// 1, with `i < j` at rate `q`.
pub fn local_markov(p: &BulkParams) -> QMat {
    let n = p.n_species;
    let mut m = QMat::zeros(n * n, n * n);
    for i in 1..=n {
        for j in i + 1..=n {
            // (j, i) -> (i, j) at rate 1, (i, j) -> (j, i) at rate q.
            let rate_one = kron(&elementary(n, i, j), &elementary(n, j, i));
            let rate_one_exit = kron(&elementary(n, j, j), &elementary(n, i, i));
            let rate_q = kron(&elementary(n, j, i), &elementary(n, i, j));
            let rate_q_exit = kron(&elementary(n, i, i), &elementary(n, j, j));
            m = &m + &(&rate_one - &rate_one_exit);
            m = &m + &(&rate_q - &rate_q_exit).scale(&p.q);
        }
    }
    m
}

/// `R(x) = P (1 + (x - 1)/(q x - 1) m)`.
pub fn r_matrix(p: &BulkParams, x: &Rat) -> Result<QMat> {
    r_matrix_from_local(&local_markov(p), p, x)
}

/// Same as [`r_matrix`] with a caller-supplied local generator, so identity
/// checks can be run against perturbed generators.
pub fn r_matrix_from_local(m: &QMat, p: &BulkParams, x: &Rat) -> Result<QMat> {
    let denom = &(&p.q * x) - &Rat::one();
    if denom.is_zero() {
        return Err(Error::SpectralPole { x: x.clone() });
    }
    let coeff = &(x - &Rat::one()) / &denom;
    let inner = m.scale(&coeff).shift(&Rat::one());
    Ok(&swap_operator(p.n_species) * &inner)
}

/// `M_bulk = sum_i m_{i,i+1}`; the zero matrix for a single site.
pub fn bulk_markov(p: &BulkParams, sites: usize) -> Result<QMat> {
    let space = TensorSpace::new(p.n_species, sites)?;
    let mut total = QMat::zeros(space.dim(), space.dim());
    if sites < 2 {
        return Ok(total);
    }
    let m = local_markov(p);
    for i in 1..sites {
        total = &total + &embed(&m, i, space)?;
    }
    Ok(total)
}

/// `A = m + q Id`, the Hecke generator with the `sqrt(q)` cleared.
pub fn hecke_generator_rationalized(p: &BulkParams) -> QMat {
    local_markov(p).shift(&p.q)
}
