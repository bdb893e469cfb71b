//! Spectral-parameter boundary operators: `K(x)`, its right-boundary image
//! `Kbar(x)`, the dual `Ktilde(x)` entering the transfer matrix, and the
//! algebra generator `e0`.
//!
//! Functions dispatch on the spec's side the same way
//! [`build_boundary`](crate::boundary::build_boundary) does: a right spec
//! yields `Kbar(x) = U K(1/x) U` with `K` built from the spec's left form.

use crate::boundary::{build_boundary, decompose_boundary, BoundaryParts, BoundarySpec, Side};
use crate::bulk::{r_matrix, BulkParams};
use crate::error::{Error, Result};
use crate::linalg::{invert, kron, partial_trace, partial_transpose, reversal, swap_operator, QMat};
use crate::rational::Rat;

/// `k(x) = (x^2 - 1)(a + c) / ((c x + a)((a + c)(x - 1) + (q - 1) x))`.
pub fn k_scalar(a: &Rat, c: &Rat, q: &Rat, x: &Rat) -> Result<Rat> {
    let one = Rat::one();
    let sum = a + c;
    let left = &(c * x) + a;
    let right = &(&sum * &(x - &one)) + &(&(q - &one) * x);
    let denom = &left * &right;
    if denom.is_zero() {
        return Err(Error::SpectralPole { x: x.clone() });
    }
    Ok(&(&(&(x * x) - &one) * &sum) / &denom)
}

/// Hand-derived `k'(1) = 2 / (q - 1)`, independent of the rates.
pub fn k_prime_at_one(q: &Rat) -> Result<Rat> {
    let d = q - &Rat::one();
    if d.is_zero() {
        return Err(Error::DegenerateQ);
    }
    Ok(&Rat::from_int(2) / &d)
}

/// `Id + k (b0 + x b0+ + b0- / x)`.
pub fn k_from_parts(parts: &BoundaryParts, k: &Rat, x: &Rat) -> Result<QMat> {
    let inv_x = x.recip().ok_or_else(|| Error::SpectralPole { x: x.clone() })?;
    let inner = &(&parts.b0 + &parts.b0_plus.scale(x)) + &parts.b0_minus.scale(&inv_x);
    Ok(inner.scale(k).shift(&Rat::one()))
}

fn left_k(left: &BoundarySpec, q: &Rat, x: &Rat) -> Result<QMat> {
    let parts = decompose_boundary(left, q)?;
    let k = k_scalar(left.rate_a(), left.rate_c(), q, x)?;
    k_from_parts(&parts, &k, x)
}

fn reflect_through_u(spec: &BoundarySpec, x: &Rat, f: impl Fn(&Rat) -> Result<QMat>) -> Result<QMat> {
    let inv_x = x.recip().ok_or_else(|| Error::SpectralPole { x: x.clone() })?;
    let u = reversal(spec.n_species());
    Ok(f(&inv_x)?.conjugate(&u, &u))
}

/// `K(x)` for a left spec, `Kbar(x)` for a right spec.
pub fn k_matrix(spec: &BoundarySpec, q: &Rat, x: &Rat) -> Result<QMat> {
    match spec.side() {
        Side::Left => left_k(spec, q, x),
        Side::Right => kbar_matrix(spec, q, x),
    }
}

/// `Kbar(x) = U K(1/x) U`, with `K` from the left form of a right spec.
pub fn kbar_matrix(spec: &BoundarySpec, q: &Rat, x: &Rat) -> Result<QMat> {
    if spec.side() != Side::Right {
        return Err(Error::InvalidSpec("kbar_matrix needs a right-side spec".into()));
    }
    let left = spec.left_form();
    reflect_through_u(spec, x, |y| left_k(&left, q, y))
}

/// `dK/dx` at `x = 1` from the closed form `k'(1)`: `k'(1) B` on the left,
/// `-k'(1) B` on the right.
pub fn k_derivative_at_one(spec: &BoundarySpec, q: &Rat) -> Result<QMat> {
    let kp = k_prime_at_one(q)?;
    let b = build_boundary(spec, q)?;
    Ok(match spec.side() {
        Side::Left => b.scale(&kp),
        Side::Right => b.scale(&-kp),
    })
}

/// `e0 = (B + a + c + q - 1) / (1 - q)` with `B` the left-form boundary
/// matrix.
pub fn e0_matrix(spec: &BoundarySpec, q: &Rat) -> Result<QMat> {
    let one = Rat::one();
    if q.is_one() {
        return Err(Error::DegenerateQ);
    }
    let left = spec.left_form();
    let b = build_boundary(&left, q)?;
    let shift = &(&(left.rate_a() + left.rate_c()) + q) - &one;
    let scale = (&one - q).recip().expect("q != 1");
    Ok(b.shift(&shift).scale(&scale))
}

/// The factorized form
/// `n(x) (1 - (x - 1) e0) (1 - (1/x - 1) e0)^{-1}` with scalar prefactor
/// `n(x) = ((s + q - 1)(1/x - 1) + q - 1) / ((s + q - 1)(x - 1) + q - 1)`,
/// `s = a + c`. The inverse is an exact matrix inverse.
pub fn k_matrix_baxterised(spec: &BoundarySpec, q: &Rat, x: &Rat) -> Result<QMat> {
    match spec.side() {
        Side::Left => left_k_baxterised(spec, q, x),
        Side::Right => {
            let left = spec.left_form();
            reflect_through_u(spec, x, |y| left_k_baxterised(&left, q, y))
        }
    }
}

fn left_k_baxterised(left: &BoundarySpec, q: &Rat, x: &Rat) -> Result<QMat> {
    let one = Rat::one();
    let e0 = e0_matrix(left, q)?;
    let inv_x = x.recip().ok_or_else(|| Error::SpectralPole { x: x.clone() })?;
    let shifted_sum = &(&(left.rate_a() + left.rate_c()) + q) - &one;
    let q_minus_one = q - &one;
    let numer = &(&shifted_sum * &(&inv_x - &one)) + &q_minus_one;
    let denom = &(&shifted_sum * &(x - &one)) + &q_minus_one;
    if denom.is_zero() {
        return Err(Error::SpectralPole { x: x.clone() });
    }
    let n = e0.rows();
    let lhs = &QMat::identity(n) - &e0.scale(&(x - &one));
    let rhs = &QMat::identity(n) - &e0.scale(&(&inv_x - &one));
    let rhs_inv = invert(&rhs)?;
    Ok((&lhs * &rhs_inv).scale(&(&numer / &denom)))
}

/// Dual boundary operator
/// `Ktilde(x) = tr_0( Kbar_0(1/x) ((R_01(x^2)^{t_1})^{-1})^{t_1} P_01 )`
/// for a right spec. Factor 0 is the auxiliary space.
pub fn dual_k_matrix(spec: &BoundarySpec, q: &Rat, x: &Rat) -> Result<QMat> {
    if spec.side() != Side::Right {
        return Err(Error::InvalidSpec("dual_k_matrix needs a right-side spec".into()));
    }
    let n = spec.n_species();
    let dims = [n, n];
    let inv_x = x.recip().ok_or_else(|| Error::SpectralPole { x: x.clone() })?;
    let bulk = BulkParams::new(n, q.clone())?;
    let r = r_matrix(&bulk, &(x * x))?;
    let rt = partial_transpose(&r, 2, &dims)?;
    let rt_inv = invert(&rt).map_err(|_| Error::SingularAt { x: x.clone() })?;
    let crossed = partial_transpose(&rt_inv, 2, &dims)?;
    let kbar = kbar_matrix(spec, q, &inv_x)?;
    let full = &(&kron(&kbar, &QMat::identity(n)) * &crossed) * &swap_operator(n);
    partial_trace(&full, 1, &dims)
}

/// Degree of the minimal polynomial of a square matrix.
pub fn minimal_polynomial_degree(m: &QMat) -> usize {
    let n = m.rows();
    let mut powers = vec![QMat::identity(n)];
    loop {
        let next = &m.clone() * powers.last().expect("nonempty");
        powers.push(next);
        let d = powers.len();
        let mut stacked = QMat::zeros(n * n, d);
        for (k, p) in powers.iter().enumerate() {
            for (idx, v) in p.entries().iter().enumerate() {
                if !v.is_zero() {
                    stacked[(idx, k)] = v.clone();
                }
            }
        }
        if crate::linalg::rank(&stacked) < d {
            return d - 1;
        }
    }
}
