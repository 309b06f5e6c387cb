//! Placement of logical qubits on MPS sites.
//!
//! The spectral strategy sorts the entries of the Fiedler vector of the
//! coupling-magnitude Laplacian `L = D − A`, `A_ij = |J_ij|`, which relaxes
//! the placement cost `Σ A_ij (π_i − π_j)²`.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::IsingModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderingKind {
    Spectral,
    Shuffled,
    Hierarchical,
    Identity,
}

impl OrderingKind {
    pub fn name(self) -> &'static str {
        match self {
            OrderingKind::Spectral => "spectral",
            OrderingKind::Shuffled => "shuffled",
            OrderingKind::Hierarchical => "hierarchical",
            OrderingKind::Identity => "identity",
        }
    }
}

impl core::str::FromStr for OrderingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(OrderingKind::Spectral),
            "shuffled" => Ok(OrderingKind::Shuffled),
            "hierarchical" => Ok(OrderingKind::Hierarchical),
            "identity" => Ok(OrderingKind::Identity),
            other => Err(Error::Config(format!("unknown ordering '{other}'"))),
        }
    }
}

/// Dimensions of a portfolio variable layout (asset-major indexing).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyDims {
    pub assets: usize,
    pub times: usize,
    pub bits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingPermutation {
    /// `logical_to_site[i]` is the initial site of logical qubit `i`.
    pub logical_to_site: Vec<usize>,
    pub strategy: OrderingKind,
    /// Connected components of the coupling graph that were ordered
    /// separately (1 unless spectral ordering met a disconnected graph).
    pub components: usize,
}

impl OrderingPermutation {
    pub fn new(logical_to_site: Vec<usize>, strategy: OrderingKind) -> Result<Self> {
        if !crate::is_permutation(&logical_to_site) {
            return Err(Error::Validation("ordering is not a permutation".into()));
        }
        Ok(Self { logical_to_site, strategy, components: 1 })
    }

    pub fn len(&self) -> usize {
        self.logical_to_site.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logical_to_site.is_empty()
    }

    pub fn site_to_logical(&self) -> Vec<usize> {
        let mut inv = vec![0; self.len()];
        for (logical, &site) in self.logical_to_site.iter().enumerate() {
            inv[site] = logical;
        }
        inv
    }

    pub fn reversed(&self) -> Self {
        let n = self.len();
        Self {
            logical_to_site: self.logical_to_site.iter().map(|&s| n - 1 - s).collect(),
            ..self.clone()
        }
    }
}

fn from_site_order(site_to_logical: &[usize], strategy: OrderingKind, components: usize) -> OrderingPermutation {
    let mut logical_to_site = vec![0; site_to_logical.len()];
    for (site, &q) in site_to_logical.iter().enumerate() {
        logical_to_site[q] = site;
    }
    OrderingPermutation { logical_to_site, strategy, components }
}

pub fn identity_order(n: usize) -> OrderingPermutation {
    OrderingPermutation { logical_to_site: (0..n).collect(), strategy: OrderingKind::Identity, components: 1 }
}

/// Uniformly random placement, deterministic per seed.
pub fn shuffled_order(n: usize, seed: u64) -> OrderingPermutation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sites: Vec<usize> = (0..n).collect();
    sites.shuffle(&mut rng);
    OrderingPermutation { logical_to_site: sites, strategy: OrderingKind::Shuffled, components: 1 }
}

/// Variable `(asset, time, bit)` goes to site `bit + bits·asset + assets·bits·time`,
/// grouping all positions of one rebalancing step together.
pub fn hierarchical_order(dims: HierarchyDims) -> Result<OrderingPermutation> {
    let HierarchyDims { assets, times, bits } = dims;
    if assets == 0 || times == 0 || bits == 0 {
        return Err(Error::Config("hierarchical ordering needs positive dimensions".into()));
    }
    let mut logical_to_site = vec![0; assets * times * bits];
    for a in 0..assets {
        for t in 0..times {
            for q in 0..bits {
                logical_to_site[(a * times + t) * bits + q] = q + bits * a + assets * bits * t;
            }
        }
    }
    Ok(OrderingPermutation { logical_to_site, strategy: OrderingKind::Hierarchical, components: 1 })
}

/// `L = D − A` with `A_ij = |J_ij|`.
pub fn laplacian(model: &IsingModel) -> DMatrix<f64> {
    let n = model.n();
    let mut l = DMatrix::zeros(n, n);
    for ((i, j), v) in model.couplings() {
        let a = v.abs();
        l[(i, j)] -= a;
        l[(j, i)] -= a;
        l[(i, i)] += a;
        l[(j, j)] += a;
    }
    l
}

/// Second-smallest eigenpair of a symmetric matrix, with the sign fixed so
/// that the first entry of non-negligible magnitude is positive.
pub fn fiedler_pair(l: &DMatrix<f64>) -> Result<(f64, Vec<f64>)> {
    let n = l.nrows();
    if n < 2 {
        return Err(Error::InvalidSize { what: "Laplacian dimension", value: n });
    }
    let eig = l.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let k = idx[1];
    let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok((eig.eigenvalues[k], v))
}

fn components(model: &IsingModel) -> Vec<Vec<usize>> {
    let n = model.n();
    let mut adj = vec![Vec::new(); n];
    for (i, j) in model.coupled_pairs() {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    // descending size, ties by smallest member
    out.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    out
}

fn order_component(model: &IsingModel, comp: &[usize]) -> Result<Vec<usize>> {
    if comp.len() < 3 {
        return Ok(comp.to_vec());
    }
    let full = laplacian(model);
    let sub = DMatrix::from_fn(comp.len(), comp.len(), |a, b| full[(comp[a], comp[b])]);
    let (_, v) = fiedler_pair(&sub)?;
    let mut local: Vec<usize> = (0..comp.len()).collect();
    local.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(comp[a].cmp(&comp[b])));
    Ok(local.into_iter().map(|a| comp[a]).collect())
}

/// Fiedler-vector placement. Disconnected coupling graphs are ordered per
/// component and the components laid out by descending size.
pub fn spectral_order(model: &IsingModel) -> Result<OrderingPermutation> {
    let n = model.n();
    if n < 3 {
        let mut p = identity_order(n);
        p.strategy = OrderingKind::Spectral;
        return Ok(p);
    }
    let comps = components(model);
    if comps.len() > 1 {
        log::warn!(
            "coupling graph has {} connected components; ordering each separately",
            comps.len()
        );
    }
    let mut site_order = Vec::with_capacity(n);
    for comp in &comps {
        site_order.extend(order_component(model, comp)?);
    }
    Ok(from_site_order(&site_order, OrderingKind::Spectral, comps.len()))
}

/// `Σ_{i<j} |J_ij| (π_i − π_j)²`.
pub fn mapping_cost(model: &IsingModel, perm: &OrderingPermutation) -> Result<f64> {
    if perm.len() != model.n() {
        return Err(Error::Config(format!(
            "ordering has {} entries, model has {}",
            perm.len(),
            model.n()
        )));
    }
    let p = &perm.logical_to_site;
    Ok(model
        .couplings()
        .map(|((i, j), v)| {
            let d = p[i] as f64 - p[j] as f64;
            v.abs() * d * d
        })
        .sum())
}

/// Resolves a strategy to a permutation.
pub fn build_ordering(
    kind: OrderingKind,
    model: &IsingModel,
    seed: u64,
    dims: Option<HierarchyDims>,
) -> Result<OrderingPermutation> {
    match kind {
        OrderingKind::Identity => Ok(identity_order(model.n())),
        OrderingKind::Shuffled => Ok(shuffled_order(model.n(), seed)),
        OrderingKind::Spectral => spectral_order(model),
        OrderingKind::Hierarchical => {
            let dims = dims.ok_or_else(|| {
                Error::Config("hierarchical ordering needs a portfolio layout".into())
            })?;
            let p = hierarchical_order(dims)?;
            if p.len() != model.n() {
                return Err(Error::Config(format!(
                    "portfolio layout has {} variables, model has {}",
                    p.len(),
                    model.n()
                )));
            }
            Ok(p)
        }
    }
}
