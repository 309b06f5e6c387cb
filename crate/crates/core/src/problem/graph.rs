use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::IsingModel;
use crate::error::{Error, Result};

/// Simple undirected weighted graph.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    /// Edges are normalized to `i < j` and sorted.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for (i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), len: n });
            }
            if i == j {
                return Err(Error::Validation(format!("self-loop on vertex {i}")));
            }
            if !w.is_finite() {
                return Err(Error::Validation(format!("non-finite weight on ({i}, {j})")));
            }
            let key = (i.min(j), i.max(j));
            if !seen.insert(key) {
                return Err(Error::Validation(format!("duplicate edge ({}, {})", key.0, key.1)));
            }
            out.push((key.0, key.1, w));
        }
        out.sort_by_key(|e| (e.0, e.1));
        Ok(Self { n, edges: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = alloc::vec![0; self.n];
        for &(i, j, _) in &self.edges {
            d[i] += 1;
            d[j] += 1;
        }
        d
    }

    /// Total weight of edges crossing the partition given by `bits`.
    pub fn cut_weight(&self, bits: &[u8]) -> f64 {
        self.edges.iter().filter(|&&(i, j, _)| bits[i] != bits[j]).map(|e| e.2).sum()
    }

    /// `H = −Σ W_ij (1 − Z_i Z_j)/2`, so the minimum cost is minus the
    /// maximum cut.
    pub fn maxcut_ising(&self) -> IsingModel {
        let mut m = IsingModel::new(self.n);
        let mut constant = 0.0;
        for &(i, j, w) in &self.edges {
            m.add_coupling_unchecked(i, j, w / 2.0);
            constant -= w / 2.0;
        }
        m.set_constant(constant);
        m
    }
}

const MAX_PAIRING_ATTEMPTS: usize = 10_000;

/// Random 3-regular graph with unit weights, by the configuration model
/// with rejection of self-loops and multi-edges.
pub fn gen_3regular(n: usize, seed: u64) -> Result<WeightedGraph> {
    if n < 4 || !(3 * n).is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "no 3-regular graph on {n} vertices (need n ≥ 4 and 3n even)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| [v, v, v]).collect();
    'attempt: for _ in 0..MAX_PAIRING_ATTEMPTS {
        stubs.shuffle(&mut rng);
        let mut seen = BTreeSet::new();
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'attempt;
            }
        }
        return WeightedGraph::new(n, seen.into_iter().map(|(a, b)| (a, b, 1.0)).collect());
    }
    Err(Error::Numerical(format!("3-regular pairing did not succeed for n = {n}")))
}

/// Erdős–Rényi graph with unit weights; each pair is an edge with
/// probability `p`.
pub fn gen_er(n: usize, p: f64, seed: u64) -> Result<WeightedGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    WeightedGraph::new(n, edges)
}

/// Complete graph with uniformly random ±1 weights.
pub fn gen_sk(n: usize, seed: u64) -> Result<WeightedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j, if rng.gen::<bool>() { 1.0 } else { -1.0 }));
        }
    }
    WeightedGraph::new(n, edges)
}
