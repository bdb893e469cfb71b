//! The open chain: full Markov generator, irreducibility and exact
//! stationary states.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::boundary::{build_boundary, BoundarySpec, Side};
use crate::bulk::{bulk_markov, BulkParams};
use crate::error::{Error, Result};
use crate::linalg::{embed, nullspace, QMat, TensorSpace};
use crate::rational::Rat;

/// Largest configuration space for the reachability graph.
pub const GRAPH_CAP: usize = 100_000;

/// Largest configuration space for exact kernel computations.
pub const KERNEL_CAP: usize = 4096;

/// `N` species on `L` sites with a left and a right boundary.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ModelRecord", into = "ModelRecord")]
pub struct LatticeModel {
    n_species: usize,
    sites: usize,
    q: Rat,
    left: BoundarySpec,
    right: BoundarySpec,
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "L")]
    l: usize,
    q: Rat,
    left: BoundarySpec,
    right: BoundarySpec,
}

impl From<LatticeModel> for ModelRecord {
    fn from(m: LatticeModel) -> Self {
        ModelRecord {
            n: m.n_species,
            l: m.sites,
            q: m.q,
            left: m.left,
            right: m.right,
        }
    }
}

impl TryFrom<ModelRecord> for LatticeModel {
    type Error = Error;

    fn try_from(r: ModelRecord) -> Result<Self> {
        LatticeModel::new(r.l, r.q, r.left, r.right)
    }
}

impl LatticeModel {
    pub fn new(sites: usize, q: Rat, left: BoundarySpec, right: BoundarySpec) -> Result<Self> {
        if sites < 1 {
            return Err(Error::InvalidParameter("need at least one site".into()));
        }
        if left.side() != Side::Left || right.side() != Side::Right {
            return Err(Error::InvalidSpec(
                "model needs a left-side and a right-side spec".into(),
            ));
        }
        if left.n_species() != right.n_species() {
            return Err(Error::InvalidSpec(format!(
                "left spec has N = {}, right spec has N = {}",
                left.n_species(),
                right.n_species()
            )));
        }
        BulkParams::new(left.n_species(), q.clone())?;
        left.check_q(&q)?;
        right.check_q(&q)?;
        Ok(LatticeModel {
            n_species: left.n_species(),
            sites,
            q,
            left,
            right,
        })
    }

    pub fn n_species(&self) -> usize {
        self.n_species
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn q(&self) -> &Rat {
        &self.q
    }

    pub fn left(&self) -> &BoundarySpec {
        &self.left
    }

    pub fn right(&self) -> &BoundarySpec {
        &self.right
    }

    pub fn bulk(&self) -> BulkParams {
        BulkParams {
            n_species: self.n_species,
            q: self.q.clone(),
        }
    }

    pub fn space(&self) -> TensorSpace {
        TensorSpace::new(self.n_species, self.sites).expect("validated model")
    }

    /// `N^L`, or `None` on overflow.
    pub fn configurations(&self) -> Option<usize> {
        self.n_species.checked_pow(u32::try_from(self.sites).ok()?)
    }

    /// Spatial reflection combined with species reversal: the boundaries
    /// swap sides and the labels are mirrored.
    pub fn reflected(&self) -> LatticeModel {
        LatticeModel {
            n_species: self.n_species,
            sites: self.sites,
            q: self.q.clone(),
            left: self.right.mirror(),
            right: self.left.mirror(),
        }
    }

    /// Index of the image of configuration `index` under [`reflected`](Self::reflected).
    pub fn reflect_index(&self, index: usize) -> usize {
        let space = self.space();
        let n1 = self.n_species + 1;
        let image: Vec<usize> = space.decode(index).iter().rev().map(|&t| n1 - t).collect();
        space.encode(&image)
    }

    fn checked_dim(&self, cap: usize) -> Result<usize> {
        match self.configurations() {
            Some(d) if d <= cap => Ok(d),
            Some(d) => Err(Error::DimensionCapExceeded { dim: d, cap }),
            None => Err(Error::DimensionCapExceeded {
                dim: usize::MAX,
                cap,
            }),
        }
    }
}

/// `M = M_bulk + B_1 + Bbar_L`.
pub fn full_markov(model: &LatticeModel) -> Result<QMat> {
    model.checked_dim(KERNEL_CAP)?;
    let space = model.space();
    let b_left = build_boundary(&model.left, &model.q)?;
    let b_right = build_boundary(&model.right, &model.q)?;
    let mut m = bulk_markov(&model.bulk(), model.sites)?;
    m = &m + &embed(&b_left, 1, space)?;
    m = &m + &embed(&b_right, model.sites, space)?;
    Ok(m)
}

/// Left and right boundary matrices of the model.
pub fn boundary_matrices(model: &LatticeModel) -> (QMat, QMat) {
    (
        build_boundary(&model.left, &model.q).expect("validated model"),
        build_boundary(&model.right, &model.q).expect("validated model"),
    )
}

/// Positive-rate transitions out of a configuration, as `(target, rate)`.
/// Bonds come first (left to right), then the left and right boundaries.
pub fn outgoing(
    model: &LatticeModel,
    boundaries: &(QMat, QMat),
    config: &[usize],
) -> Vec<(Vec<usize>, Rat)> {
    let mut out = Vec::new();
    let q = &model.q;
    for i in 0..model.sites.saturating_sub(1) {
        let (a, b) = (config[i], config[i + 1]);
        if a == b {
            continue;
        }
        let rate = if a > b { Rat::one() } else { q.clone() };
        let mut next = config.to_vec();
        next.swap(i, i + 1);
        out.push((next, rate));
    }
    for (b, site) in [(&boundaries.0, 0), (&boundaries.1, model.sites - 1)] {
        let from = config[site] - 1;
        for to in 0..model.n_species {
            let r = &b[(to, from)];
            if to != from && r.is_positive() {
                let mut next = config.to_vec();
                next[site] = to + 1;
                out.push((next, r.clone()));
            }
        }
    }
    out
}

/// Whether the configuration graph (edges where `M` has a positive
/// off-diagonal entry) is strongly connected.
pub fn is_irreducible(model: &LatticeModel) -> Result<bool> {
    let dim = model.checked_dim(GRAPH_CAP)?;
    let space = model.space();
    let boundaries = boundary_matrices(model);
    let mut graph = DiGraph::<(), ()>::with_capacity(dim, dim * 4);
    let nodes: Vec<_> = (0..dim).map(|_| graph.add_node(())).collect();
    for (idx, &node) in nodes.iter().enumerate() {
        let config = space.decode(idx);
        for (target, _) in outgoing(model, &boundaries, &config) {
            graph.add_edge(node, nodes[space.encode(&target)], ());
        }
    }
    Ok(tarjan_scc(&graph).len() == 1)
}

/// Exact kernel of `M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationaryResult {
    pub irreducible: bool,
    pub kernel_dimension: usize,
    /// Normalized stationary state, indexed by the configuration codec.
    /// Empty when the kernel is not one-dimensional.
    pub distribution: Vec<Rat>,
    /// Unnormalized kernel basis, present when the kernel dimension exceeds 1.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub basis: Vec<Vec<Rat>>,
}

pub fn stationary_distribution(model: &LatticeModel) -> Result<StationaryResult> {
    let m = full_markov(model)?;
    let irreducible = is_irreducible(model)?;
    let kernel = nullspace(&m);
    assert!(!kernel.is_empty(), "a generator always has a kernel");
    let kernel_dimension = kernel.len();
    if kernel_dimension == 1 {
        let v = kernel.into_iter().next().expect("one vector").into_vec();
        let total: Rat = v.iter().sum();
        let distribution = v.iter().map(|x| x / &total).collect();
        Ok(StationaryResult {
            irreducible,
            kernel_dimension,
            distribution,
            basis: Vec::new(),
        })
    } else {
        Ok(StationaryResult {
            irreducible,
            kernel_dimension,
            distribution: Vec::new(),
            basis: kernel.into_iter().map(QMat::into_vec).collect(),
        })
    }
}
