//! Tensor-product structure on `C^N (x) ... (x) C^N`.
//!
//! Index convention: the configuration `(t_1, ..., t_L)` with `t_i` in
//! `1..=N` sits at flat index `sum_i (t_i - 1) * N^(L - i)`, so site 1 is the
//! most significant digit. Every fixture in the crate assumes this.

use serde::{Deserialize, Serialize};

use super::QMat;
use crate::error::{Error, Result};

/// `factors` copies of `C^local_dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TensorSpace {
    pub local_dim: usize,
    pub factors: usize,
}

impl TensorSpace {
    pub fn new(local_dim: usize, factors: usize) -> Result<Self> {
        if local_dim < 2 || factors < 1 {
            return Err(Error::InvalidDimension(format!(
                "tensor space needs N >= 2 and L >= 1, got N = {local_dim}, L = {factors}"
            )));
        }
        Ok(TensorSpace { local_dim, factors })
    }

    pub fn dim(&self) -> usize {
        self.local_dim.pow(self.factors as u32)
    }

    /// Flat index of a configuration of 1-based species labels.
    pub fn encode(&self, config: &[usize]) -> usize {
        debug_assert_eq!(config.len(), self.factors);
        config
            .iter()
            .fold(0, |acc, &t| acc * self.local_dim + (t - 1))
    }

    /// Inverse of [`encode`](Self::encode).
    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut config = vec![0; self.factors];
        for slot in config.iter_mut().rev() {
            *slot = index % self.local_dim + 1;
            index /= self.local_dim;
        }
        config
    }
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &QMat, b: &QMat) -> QMat {
    let (br, bc) = (b.rows(), b.cols());
    let mut out = QMat::zeros(a.rows() * br, a.cols() * bc);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let x = &a[(i, j)];
            if x.is_zero() {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    let y = &b[(k, l)];
                    if !y.is_zero() {
                        out[(i * br + k, j * bc + l)] = x * y;
                    }
                }
            }
        }
    }
    out
}

fn support_width(op: &QMat, local_dim: usize) -> Result<usize> {
    if !op.is_square() {
        return Err(Error::InvalidDimension("operator is not square".into()));
    }
    let mut k = 0;
    let mut d = 1;
    while d < op.rows() {
        d *= local_dim;
        k += 1;
    }
    if d != op.rows() || k == 0 {
        return Err(Error::InvalidDimension(format!(
            "operator dimension {} is not a positive power of {local_dim}",
            op.rows()
        )));
    }
    Ok(k)
}

/// `Id (x) ... (x) op (x) ... (x) Id` with `op` acting on the consecutive
/// sites starting at `first_site` (1-based).
pub fn embed(op: &QMat, first_site: usize, space: TensorSpace) -> Result<QMat> {
    let k = support_width(op, space.local_dim)?;
    if first_site == 0 || first_site + k - 1 > space.factors {
        return Err(Error::InvalidDimension(format!(
            "{k}-site operator at site {first_site} does not fit in {} sites",
            space.factors
        )));
    }
    let n = space.local_dim;
    let left = QMat::identity(n.pow(first_site as u32 - 1));
    let right = QMat::identity(n.pow((space.factors - (first_site + k - 1)) as u32));
    Ok(kron(&kron(&left, op), &right))
}

/// Embeds an operator on `k` sites into the full space, acting on the listed
/// sites (1-based, distinct, any order). The first listed site corresponds to
/// the most significant tensor factor of `op`, so `embed_sites(R, &[2, 1])`
/// realizes `R_{21}`.
pub fn embed_sites(op: &QMat, sites: &[usize], space: TensorSpace) -> Result<QMat> {
    let k = support_width(op, space.local_dim)?;
    if sites.len() != k {
        return Err(Error::InvalidDimension(format!(
            "operator acts on {k} sites but {} were listed",
            sites.len()
        )));
    }
    for (idx, &s) in sites.iter().enumerate() {
        if s == 0 || s > space.factors || sites[..idx].contains(&s) {
            return Err(Error::InvalidDimension(format!("bad site list {sites:?}")));
        }
    }
    let n = space.local_dim;
    let dim = space.dim();
    let mut out = QMat::zeros(dim, dim);
    for col in 0..dim {
        let digits = space.decode(col);
        let op_col = sites.iter().fold(0, |acc, &s| acc * n + digits[s - 1] - 1);
        for op_row in 0..op.rows() {
            let v = &op[(op_row, op_col)];
            if v.is_zero() {
                continue;
            }
            let mut target = digits.clone();
            let mut r = op_row;
            for &s in sites.iter().rev() {
                target[s - 1] = r % n + 1;
                r /= n;
            }
            out[(space.encode(&target), col)] = v.clone();
        }
    }
    Ok(out)
}

fn check_factor(m: &QMat, factor: usize, dims: &[usize]) -> Result<()> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::InvalidDimension(format!(
            "{}x{} matrix does not match factor dims {dims:?}",
            m.rows(),
            m.cols()
        )));
    }
    if factor == 0 || factor > dims.len() {
        return Err(Error::InvalidDimension(format!(
            "factor {factor} out of range for {} factors",
            dims.len()
        )));
    }
    Ok(())
}

fn split_index(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (slot, &d) in digits.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    digits
}

fn join_index(digits: impl IntoIterator<Item = usize>, dims: impl IntoIterator<Item = usize>) -> usize {
    digits
        .into_iter()
        .zip(dims)
        .fold(0, |acc, (x, d)| acc * d + x)
}

/// Contracts tensor factor `traced_factor` (1-based) of a square matrix on
/// the space with factor dimensions `dims`.
pub fn partial_trace(m: &QMat, traced_factor: usize, dims: &[usize]) -> Result<QMat> {
    check_factor(m, traced_factor, dims)?;
    let f = traced_factor - 1;
    let kept: Vec<usize> = dims
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != f)
        .map(|(_, &d)| d)
        .collect();
    let out_dim: usize = kept.iter().product();
    let mut out = QMat::zeros(out_dim, out_dim);
    let strip = |digits: &[usize]| {
        join_index(
            digits.iter().enumerate().filter(|&(i, _)| i != f).map(|(_, &x)| x),
            kept.iter().copied(),
        )
    };
    for i in 0..m.rows() {
        let di = split_index(i, dims);
        for j in 0..m.cols() {
            let v = &m[(i, j)];
            if v.is_zero() {
                continue;
            }
            let dj = split_index(j, dims);
            if di[f] != dj[f] {
                continue;
            }
            out[(strip(&di), strip(&dj))] += v;
        }
    }
    Ok(out)
}

/// Transposes the indices of tensor factor `factor` (1-based) only.
pub fn partial_transpose(m: &QMat, factor: usize, dims: &[usize]) -> Result<QMat> {
    check_factor(m, factor, dims)?;
    let f = factor - 1;
    let mut out = QMat::zeros(m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = &m[(i, j)];
            if v.is_zero() {
                continue;
            }
            let mut di = split_index(i, dims);
            let mut dj = split_index(j, dims);
            std::mem::swap(&mut di[f], &mut dj[f]);
            out[(
                join_index(di, dims.iter().copied()),
                join_index(dj, dims.iter().copied()),
            )] = v.clone();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;
    use crate::rational::Rat;

    fn swap2() -> QMat {
        QMat::from_i64(&[[0, 1], [1, 0]])
    }

    #[test]
    fn codec_is_big_endian() {
        let s = TensorSpace::new(3, 3).unwrap();
        assert_eq!(s.encode(&[1, 1, 1]), 0);
        assert_eq!(s.encode(&[1, 1, 2]), 1);
        assert_eq!(s.encode(&[2, 1, 1]), 9);
        assert_eq!(s.encode(&[3, 3, 3]), 26);
        for i in 0..s.dim() {
            assert_eq!(s.encode(&s.decode(i)), i);
        }
    }

    #[test]
    fn kron_identities() {
        assert_eq!(kron(&QMat::identity(2), &QMat::identity(2)), QMat::identity(4));
        let expected = QMat::from_i64(&[
            [0, 0, 1, 0],
            [0, 0, 0, 1],
            [1, 0, 0, 0],
            [0, 1, 0, 0],
        ]);
        assert_eq!(kron(&swap2(), &QMat::identity(2)), expected);
    }

    #[test]
    fn embed_basic_cases() {
        let space = TensorSpace::new(2, 2).unwrap();
        let m = QMat::from_i64(&[[1, 2, 3, 4], [5, 6, 7, 8], [9, 1, 2, 3], [4, 5, 6, 7]]);
        assert_eq!(embed(&m, 1, space).unwrap(), m);
        let a = QMat::from_i64(&[[1, 2], [3, 4]]);
        assert_eq!(embed(&a, 2, space).unwrap(), kron(&QMat::identity(2), &a));
        assert!(matches!(embed(&m, 2, space), Err(Error::InvalidDimension(_))));
        assert!(matches!(
            embed(&QMat::identity(3), 1, space),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn embed_sites_matches_embed_on_consecutive_sites() {
        let space = TensorSpace::new(2, 3).unwrap();
        let m = QMat::from_i64(&[[1, 2, 0, 0], [0, 3, 0, 1], [5, 0, 0, 0], [0, 0, 7, 1]]);
        assert_eq!(embed_sites(&m, &[2, 3], space).unwrap(), embed(&m, 2, space).unwrap());
    }

    #[test]
    fn embed_sites_reversed_order_is_swap_conjugate() {
        let space = TensorSpace::new(3, 2).unwrap();
        let m = QMat::from_rows(
            (0..9)
                .map(|i| (0..9).map(|j| Rat::from_int(((i * 7 + j * 3) % 5) as i64 - 2)).collect())
                .collect(),
        )
        .unwrap();
        let p = super::super::swap_operator(3);
        assert_eq!(embed_sites(&m, &[2, 1], space).unwrap(), &(&p * &m) * &p);
    }

    #[test]
    fn partial_trace_cases() {
        let a = QMat::from_i64(&[[1, 2], [3, 4]]);
        let b = QMat::from_i64(&[[5, 6], [7, 8]]);
        let ab = kron(&a, &b);
        assert_eq!(partial_trace(&ab, 2, &[2, 2]).unwrap(), a.scale(&rat!(13)));
        assert_eq!(partial_trace(&ab, 1, &[2, 2]).unwrap(), b.scale(&rat!(5)));
        assert_eq!(
            partial_trace(&QMat::identity(4), 1, &[2, 2]).unwrap(),
            QMat::scalar(2, rat!(2))
        );
        assert!(partial_trace(&QMat::identity(4), 3, &[2, 2]).is_err());
        assert!(partial_trace(&QMat::identity(5), 1, &[2, 2]).is_err());
    }

    #[test]
    fn partial_transpose_cases() {
        let a = QMat::from_i64(&[[1, 2], [3, 4]]);
        let b = QMat::from_i64(&[[5, 6], [7, 8]]);
        let ab = kron(&a, &b);
        assert_eq!(partial_transpose(&ab, 1, &[2, 2]).unwrap(), kron(&a.transpose(), &b));
        let once = partial_transpose(&ab, 2, &[2, 2]).unwrap();
        assert_eq!(partial_transpose(&once, 2, &[2, 2]).unwrap(), ab);
    }
}
