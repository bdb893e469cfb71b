//! Exact checks of the algebraic identities behind integrability.
//!
//! Identities in the spectral parameter are tested by exact evaluation at
//! seeded random rational points. Both sides are rational functions of
//! bounded degree, so agreement at random points is a polynomial identity
//! test; each report records the relevant degree bound in `notes`.
//!
//! Hecke-type relations are checked with `A = m + q` in place of
//! `(m + q)/sqrt(q)`; each relation is multiplied through by the power of
//! `sqrt(q)` that makes it rational.
//!
//! Every check has a `*_with` variant taking the ingredient matrices
//! directly, so perturbed inputs can be fed in.

use serde::{Deserialize, Serialize};

use crate::boundary::{decompose_boundary, BoundarySpec};
use crate::bulk::{local_markov, r_matrix_from_local, BulkParams};
use crate::error::{Error, Result};
use crate::kmatrix::{dual_k_matrix, e0_matrix, k_matrix, minimal_polynomial_degree};
use crate::linalg::{
    embed, embed_sites, invert, kron, partial_trace, product, swap_operator, QMat, TensorSpace,
};
use crate::markov::{full_markov, LatticeModel};
use crate::rational::Rat;
use crate::sampling::Sampler;

/// Default cap on `N^(L+1)` for transfer-matrix checks.
pub const TRANSFER_CAP: usize = 256;

/// Inputs a check was run with.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckParams {
    #[serde(rename = "N")]
    pub n_species: usize,
    pub q: Rat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<BoundarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_spec: Option<BoundarySpec>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
}

impl CheckParams {
    pub fn bulk(p: &BulkParams) -> Self {
        CheckParams {
            n_species: p.n_species,
            q: p.q.clone(),
            ..Default::default()
        }
    }

    pub fn boundary(spec: &BoundarySpec, q: &Rat) -> Self {
        CheckParams {
            n_species: spec.n_species(),
            q: q.clone(),
            spec: Some(spec.clone()),
            ..Default::default()
        }
    }

    pub fn model(model: &LatticeModel) -> Self {
        CheckParams {
            n_species: model.n_species(),
            q: model.q().clone(),
            spec: Some(model.left().clone()),
            right_spec: Some(model.right().clone()),
            sites: Some(model.sites()),
            k_max: None,
        }
    }
}

/// First entry where the two sides of a relation differ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<String>,
    pub row: usize,
    pub col: usize,
    pub lhs: Rat,
    pub rhs: Rat,
    /// Spectral sample at which the relation failed, if any.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub at: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub params: CheckParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub samples: Vec<Vec<Rat>>,
    pub passed: bool,
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(check: &str, params: CheckParams, seed: Option<u64>) -> Self {
        CheckReport {
            check: check.to_string(),
            params,
            seed,
            samples: Vec::new(),
            passed: true,
            witness: None,
            notes: Vec::new(),
        }
    }

    /// Records the comparison; keeps the first failure only.
    fn compare(&mut self, relation: &str, lhs: &QMat, rhs: &QMat, at: &[Rat]) {
        if self.witness.is_some() {
            return;
        }
        if let Some(w) = witness(relation, lhs, rhs, at) {
            self.passed = false;
            self.witness = Some(w);
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn finish(mut self, sampler: Option<&Sampler>) -> Self {
        if let Some(s) = sampler {
            if s.redraws() > 0 {
                self.notes.push(format!("{} sample draws hit a pole and were redrawn", s.redraws()));
            }
        }
        self
    }
}

/// `None` when equal, otherwise the first differing entry (row-major).
pub fn witness(relation: &str, lhs: &QMat, rhs: &QMat, at: &[Rat]) -> Option<Witness> {
    let (row, col) = if lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols() {
        (0, 0)
    } else {
        lhs.first_mismatch(rhs)?
    };
    let get = |m: &QMat| {
        if row < m.rows() && col < m.cols() {
            m[(row, col)].clone()
        } else {
            Rat::zero()
        }
    };
    Some(Witness {
        relation: Some(relation.to_string()),
        row,
        col,
        lhs: get(lhs),
        rhs: get(rhs),
        at: at.to_vec(),
    })
}

fn r21(r: &QMat, n: usize) -> QMat {
    let p = swap_operator(n);
    &(&p * r) * &p
}

fn seeded_samples(samples: usize) -> Result<usize> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    Ok(samples)
}

/// `R12(x1/x2) R13(x1/x3) R23(x2/x3) = R23(x2/x3) R13(x1/x3) R12(x1/x2)`.
pub fn check_ybe(p: &BulkParams, samples: usize, seed: u64) -> Result<CheckReport> {
    check_ybe_with(&local_markov(p), p, samples, seed)
}

pub fn check_ybe_with(local: &QMat, p: &BulkParams, samples: usize, seed: u64) -> Result<CheckReport> {
    seeded_samples(samples)?;
    let mut report = CheckReport::new("ybe", CheckParams::bulk(p), Some(seed));
    report.note("each side has entries of degree <= 3 in every spectral ratio after clearing (q x - 1)");
    let space = TensorSpace::new(p.n_species, 3)?;
    let mut sampler = Sampler::new(seed);
    for _ in 0..samples {
        let (xs, lhs, rhs) = sampler.draw(|s| {
            let xs = [s.point(), s.point(), s.point()];
            let r = |i: usize, j: usize, sites: [usize; 2]| -> Result<QMat> {
                let m = r_matrix_from_local(local, p, &(&xs[i] / &xs[j]))?;
                embed_sites(&m, &sites, space)
            };
            let r12 = r(0, 1, [1, 2])?;
            let r13 = r(0, 2, [1, 3])?;
            let r23 = r(1, 2, [2, 3])?;
            let lhs = &(&r12 * &r13) * &r23;
            let rhs = &(&r23 * &r13) * &r12;
            Ok((xs.to_vec(), lhs, rhs))
        })?;
        report.compare("yang-baxter", &lhs, &rhs, &xs);
        report.samples.push(xs);
    }
    Ok(report.finish(Some(&sampler)))
}

/// `R12(x) R21(1/x) = Id`.
pub fn check_r_unitarity(p: &BulkParams, samples: usize, seed: u64) -> Result<CheckReport> {
    check_r_unitarity_with(&local_markov(p), p, samples, seed)
}

pub fn check_r_unitarity_with(
    local: &QMat,
    p: &BulkParams,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    seeded_samples(samples)?;
    let mut report = CheckReport::new("r_unitarity", CheckParams::bulk(p), Some(seed));
    report.note("the product has entries of degree <= 2 in x after clearing (q x - 1)(q - x)");
    let mut sampler = Sampler::new(seed);
    let id = QMat::identity(p.n_species * p.n_species);
    for _ in 0..samples {
        let (x, prod) = sampler.draw(|s| {
            let x = s.point();
            let r = r_matrix_from_local(local, p, &x)?;
            let r_inv = r21(&r_matrix_from_local(local, p, &x.recip().expect("nonzero"))?, p.n_species);
            Ok((x, &r * &r_inv))
        })?;
        report.compare("r-unitarity", &prod, &id, std::slice::from_ref(&x));
        report.samples.push(vec![x]);
    }
    Ok(report.finish(Some(&sampler)))
}

/// `R12(x1/x2) K1(x1) R21(x1 x2) K2(x2) = K2(x2) R12(x1 x2) K1(x1) R21(x1/x2)`
/// for the spec's left form.
pub fn check_reflection(spec: &BoundarySpec, q: &Rat, samples: usize, seed: u64) -> Result<CheckReport> {
    let left = spec.left_form();
    let p = BulkParams::new(spec.n_species(), q.clone())?;
    check_reflection_with(
        &local_markov(&p),
        |x| k_matrix(&left, q, x),
        CheckParams::boundary(spec, q),
        samples,
        seed,
    )
}

pub fn check_reflection_with(
    local: &QMat,
    k: impl Fn(&Rat) -> Result<QMat>,
    params: CheckParams,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    seeded_samples(samples)?;
    let n = params.n_species;
    let p = BulkParams::new(n, params.q.clone())?;
    let mut report = CheckReport::new("reflection", params, Some(seed));
    report.note("each side has entries of degree <= 8 in (x1, x2) after clearing denominators");
    let id = QMat::identity(n);
    let mut sampler = Sampler::new(seed);
    for _ in 0..samples {
        let (xs, lhs, rhs) = sampler.draw(|s| {
            let (x1, x2) = (s.point(), s.point());
            let ratio = &x1 / &x2;
            let prod = &x1 * &x2;
            let r12_ratio = r_matrix_from_local(local, &p, &ratio)?;
            let r12_prod = r_matrix_from_local(local, &p, &prod)?;
            let k1 = kron(&k(&x1)?, &id);
            let k2 = kron(&id, &k(&x2)?);
            let lhs = product([&r12_ratio, &k1, &r21(&r12_prod, n), &k2]);
            let rhs = product([&k2, &r12_prod, &k1, &r21(&r12_ratio, n)]);
            Ok((vec![x1, x2], lhs, rhs))
        })?;
        report.compare("reflection", &lhs, &rhs, &xs);
        report.samples.push(xs);
    }
    Ok(report.finish(Some(&sampler)))
}

/// `K(x) K(1/x) = Id` (or the same for `Kbar` on a right spec).
pub fn check_k_unitarity(spec: &BoundarySpec, q: &Rat, samples: usize, seed: u64) -> Result<CheckReport> {
    check_k_unitarity_with(|x| k_matrix(spec, q, x), CheckParams::boundary(spec, q), samples, seed)
}

pub fn check_k_unitarity_with(
    k: impl Fn(&Rat) -> Result<QMat>,
    params: CheckParams,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    seeded_samples(samples)?;
    let id = QMat::identity(params.n_species);
    let mut report = CheckReport::new("k_unitarity", params, Some(seed));
    report.note("the product has entries of degree <= 6 in x after clearing denominators");
    let mut sampler = Sampler::new(seed);
    for _ in 0..samples {
        let (x, prod) = sampler.draw(|s| {
            let x = s.point();
            let prod = &k(&x)? * &k(&x.recip().expect("nonzero"))?;
            Ok((x, prod))
        })?;
        report.compare("k-unitarity", &prod, &id, std::slice::from_ref(&x));
        report.samples.push(vec![x]);
    }
    Ok(report.finish(Some(&sampler)))
}

/// `m^2 = -(1 + q) m` and `A1 A2 A1 = A2 A1 A2` with `A = m + q`.
pub fn check_hecke(p: &BulkParams) -> Result<CheckReport> {
    check_hecke_with(&local_markov(p), p)
}

pub fn check_hecke_with(local: &QMat, p: &BulkParams) -> Result<CheckReport> {
    let mut report = CheckReport::new("hecke", CheckParams::bulk(p), None);
    let q = &p.q;
    let factor = -(q + &Rat::one());
    report.compare("quadratic", &(local * local), &local.scale(&factor), &[]);
    let a = local.shift(q);
    let space = TensorSpace::new(p.n_species, 3)?;
    let a1 = embed(&a, 1, space)?;
    let a2 = embed(&a, 2, space)?;
    report.compare("braid", &(&(&a1 * &a2) * &a1), &(&(&a2 * &a1) * &a2), &[]);
    Ok(report)
}

/// Generators on two sites: `A = m + q` and `E = e0 (x) Id`.
struct TwoSite {
    a: QMat,
    e: QMat,
    q_minus_one: Rat,
}

impl TwoSite {
    fn new(local: &QMat, e0: &QMat, q: &Rat) -> Result<Self> {
        let space = TensorSpace::new(e0.rows(), 2)?;
        Ok(TwoSite {
            a: local.shift(q),
            e: embed(e0, 1, space)?,
            q_minus_one: q - &Rat::one(),
        })
    }

    /// `A X A E - E A X A` against `(q - 1)(Y A E - E A Y)`.
    fn sides(&self, x: &QMat, y: &QMat) -> (QMat, QMat) {
        let (a, e) = (&self.a, &self.e);
        let lhs = &product([a, x, a, e]) - &product([e, a, x, a]);
        let rhs = &product([y, a, e]) - &product([e, a, y]);
        (lhs, rhs.scale(&self.q_minus_one))
    }
}

/// `A E A E - E A E A = (q - 1)(E^2 A E - E A E^2)`.
pub fn check_boundary_algebra(spec: &BoundarySpec, q: &Rat) -> Result<CheckReport> {
    let p = BulkParams::new(spec.n_species(), q.clone())?;
    p.require_asymmetric()?;
    let e0 = e0_matrix(spec, q)?;
    check_boundary_algebra_with(&local_markov(&p), &e0, CheckParams::boundary(spec, q))
}

pub fn check_boundary_algebra_with(local: &QMat, e0: &QMat, params: CheckParams) -> Result<CheckReport> {
    if params.q.is_one() {
        return Err(Error::DegenerateQ);
    }
    let mut report = CheckReport::new("boundary_algebra", params.clone(), None);
    let g = TwoSite::new(local, e0, &params.q)?;
    let e = &g.e;
    let a = &g.a;
    let lhs = &product([a, e, a, e]) - &product([e, a, e, a]);
    let rhs = (&product([e, e, a, e]) - &product([e, a, e, e]))
        .scale(&g.q_minus_one);
    report.compare("boundary-algebra", &lhs, &rhs, &[]);
    Ok(report)
}

/// `e0` built straight from a boundary matrix and its rate sum, for
/// perturbation tests: `(B + s + q - 1)/(1 - q)`.
pub fn e0_from_boundary(b: &QMat, rate_sum: &Rat, q: &Rat) -> Result<QMat> {
    let one = Rat::one();
    let scale = (&one - q).recip().ok_or(Error::DegenerateQ)?;
    Ok(b.shift(&(&(rate_sum + q) - &one)).scale(&scale))
}

/// The four recursive families, `k = 0..=k_max`, with `F = E + 1`:
///
/// 1. `A E A E^k - E^k A E A = (q-1)(E^{k+1} A E - E A E^{k+1})`
/// 2. `A E^k A E - E A E^k A = (q-1)(E^{k+1} A E - E A E^{k+1} + E^k A E - E A E^k)`
/// 3. `A F^k A E - E A F^k A = (q-1)(F^{k+1} A E - E A F^{k+1})`
/// 4. `A E F^k A E - E A E F^k A = (q-1)(E F^{k+1} A E - E A E F^{k+1})`
///
/// Family 4 at `k = 0` is the boundary algebra relation itself.
pub fn check_lemma_relations(spec: &BoundarySpec, q: &Rat, k_max: u32) -> Result<CheckReport> {
    let p = BulkParams::new(spec.n_species(), q.clone())?;
    p.require_asymmetric()?;
    let e0 = e0_matrix(spec, q)?;
    let mut params = CheckParams::boundary(spec, q);
    params.k_max = Some(k_max);
    check_lemma_relations_with(&local_markov(&p), &e0, params, k_max)
}

pub fn check_lemma_relations_with(
    local: &QMat,
    e0: &QMat,
    params: CheckParams,
    k_max: u32,
) -> Result<CheckReport> {
    if params.q.is_one() {
        return Err(Error::DegenerateQ);
    }
    if k_max < 1 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    let mut report = CheckReport::new("lemma_relations", params.clone(), None);
    let g = TwoSite::new(local, e0, &params.q)?;
    let e = &g.e;
    let a = &g.a;
    let f = e.shift(&Rat::one());
    let mut e_k = QMat::identity(e.rows());
    let mut f_k = QMat::identity(e.rows());
    for k in 0..=k_max {
        let e_k1 = e * &e_k;
        let f_k1 = &f * &f_k;

        let lhs = &product([a, e, a, &e_k]) - &product([&e_k, a, e, a]);
        let rhs = (&product([&e_k1, a, e]) - &product([e, a, &e_k1]))
            .scale(&g.q_minus_one);
        report.compare(&format!("family 1, k = {k}"), &lhs, &rhs, &[]);

        let (lhs, rhs1) = g.sides(&e_k, &e_k1);
        let extra = (&product([&e_k, a, e]) - &product([e, a, &e_k]))
            .scale(&g.q_minus_one);
        report.compare(&format!("family 2, k = {k}"), &lhs, &(&rhs1 + &extra), &[]);

        let (lhs, rhs) = g.sides(&f_k, &f_k1);
        report.compare(&format!("family 3, k = {k}"), &lhs, &rhs, &[]);

        let (lhs, rhs) = g.sides(&(e * &f_k), &(e * &f_k1));
        report.compare(&format!("family 4, k = {k}"), &lhs, &rhs, &[]);

        e_k = e_k1;
        f_k = f_k1;
    }
    Ok(report)
}

/// Quadratic relations among `b0, b0+, b0-` and the quartic annihilating
/// `e0`.
pub fn check_poly_relations(spec: &BoundarySpec, q: &Rat) -> Result<CheckReport> {
    let mut report = CheckReport::new("poly_relations", CheckParams::boundary(spec, q), None);
    let left = spec.left_form();
    let parts = decompose_boundary(&left, q)?;
    let (a, c) = (left.rate_a(), left.rate_c());
    let (at, ct) = left.tilde_rates(q);
    let (b0, bp, bm) = (&parts.b0, &parts.b0_plus, &parts.b0_minus);
    let n = b0.rows();
    let zero = QMat::zeros(n, n);

    let b0_sq_rhs = &(&b0.scale(&-(a + &ct)) + &bp.scale(&at)) + &bm.scale(c);
    report.compare("b0^2", &(b0 * b0), &b0_sq_rhs, &[]);
    report.compare("b0+^2", &(bp * bp), &bp.scale(&-c), &[]);
    report.compare("b0-^2", &(bm * bm), &bm.scale(&-&at), &[]);
    report.compare("b0 b0+", &(b0 * bp), &bp.scale(&-a), &[]);
    report.compare("b0+ b0", &(bp * b0), &bp.scale(&-a), &[]);
    report.compare("b0 b0-", &(b0 * bm), &bm.scale(&-&ct), &[]);
    report.compare("b0- b0", &(bm * b0), &bm.scale(&-&ct), &[]);
    report.compare("b0+ b0-", &(bp * bm), &zero, &[]);
    report.compare("b0- b0+", &(bm * bp), &zero, &[]);

    if q.is_one() {
        report.note("q = 1: quartic in e0 skipped");
    } else {
        let e0 = e0_matrix(&left, q)?;
        let sum = a + c;
        let one = Rat::one();
        let r3 = a / &sum;
        let r4 = &(&(&sum + q) - &one) / &(q - &one);
        let quartic = product([&e0, &e0.shift(&one), &e0.shift(&r3), &e0.shift(&r4)]);
        report.compare("quartic", &quartic, &zero, &[]);
        report.note(format!("minimal polynomial of e0 has degree {}", minimal_polynomial_degree(&e0)));
    }
    Ok(report)
}

/// With `ebar = e0 (1 + e0)^{-1}`, checks `A ebar A ebar = ebar A ebar A`.
/// A singular `1 + e0` is reported in the notes, not as a failure.
pub fn check_cyclotomic(spec: &BoundarySpec, q: &Rat) -> Result<CheckReport> {
    let p = BulkParams::new(spec.n_species(), q.clone())?;
    p.require_asymmetric()?;
    let e0 = e0_matrix(spec, q)?;
    check_cyclotomic_with(&local_markov(&p), &e0, CheckParams::boundary(spec, q))
}

/// Note attached when `1 + e0` is singular.
pub const NOT_INVERTIBLE: &str = "not_invertible: e0 + 1 is singular, relation not applicable";

pub fn check_cyclotomic_with(local: &QMat, e0: &QMat, params: CheckParams) -> Result<CheckReport> {
    let mut report = CheckReport::new("cyclotomic", params.clone(), None);
    let shifted = e0.shift(&Rat::one());
    let inv = match invert(&shifted) {
        Ok(m) => m,
        Err(Error::SingularMatrix) => {
            report.note(NOT_INVERTIBLE);
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let ebar = e0 * &inv;
    let space = TensorSpace::new(e0.rows(), 2)?;
    let a = local.shift(&params.q);
    let e = embed(&ebar, 1, space)?;
    report.compare(
        "cyclotomic",
        &product([&a, &e, &a, &e]),
        &product([&e, &a, &e, &a]),
        &[],
    );
    Ok(report)
}

/// `t(x) = tr_0( R_0L(x) ... R_01(x) K_0(x) R_10(x) ... R_L0(x) Ktilde_0(x) )`.
/// The auxiliary space is the first tensor factor.
pub fn transfer_matrix(model: &LatticeModel, x: &Rat) -> Result<QMat> {
    let n = model.n_species();
    let l = model.sites();
    let space = TensorSpace::new(n, l + 1)?;
    let r = crate::bulk::r_matrix(&model.bulk(), x)?;
    let k = k_matrix(model.left(), model.q(), x)?;
    let k_dual = dual_k_matrix(model.right(), model.q(), x)?;
    let mut t = QMat::identity(space.dim());
    for j in (1..=l).rev() {
        t = &t * &embed_sites(&r, &[1, j + 1], space)?;
    }
    t = &t * &embed(&k, 1, space)?;
    for j in 1..=l {
        t = &t * &embed_sites(&r, &[j + 1, 1], space)?;
    }
    t = &t * &embed(&k_dual, 1, space)?;
    partial_trace(&t, 1, &vec![n; l + 1])
}

/// `[t(x), t(y)] = 0` and `[t(x), M] = 0`.
pub fn check_transfer_commutation(
    model: &LatticeModel,
    samples: usize,
    seed: u64,
    cap: usize,
) -> Result<CheckReport> {
    seeded_samples(samples)?;
    let dim = model
        .n_species()
        .checked_pow(model.sites() as u32 + 1)
        .unwrap_or(usize::MAX);
    if dim > cap {
        return Err(Error::DimensionCapExceeded { dim, cap });
    }
    let mut report = CheckReport::new("transfer_commutation", CheckParams::model(model), Some(seed));
    report.note("transfer matrix entries are rational in x of degree <= 2L + 8 after clearing denominators");
    let m = full_markov(model)?;
    let zero = QMat::zeros(m.rows(), m.cols());
    let mut sampler = Sampler::new(seed);
    for _ in 0..samples {
        let (xs, tx, ty) = sampler.draw(|s| {
            let (x, y) = (s.point(), s.point());
            let tx = transfer_matrix(model, &x)?;
            let ty = transfer_matrix(model, &y)?;
            Ok((vec![x, y], tx, ty))
        })?;
        report.compare("[t(x), t(y)]", &tx.commutator(&ty), &zero, &xs);
        report.compare("[t(x), M]", &tx.commutator(&m), &zero, &xs[..1]);
        report.samples.push(xs);
    }
    Ok(report.finish(Some(&sampler)))
}
