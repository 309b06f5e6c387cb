//! Rectangular and triangular SWAP networks.
//!
//! Both networks consist of `N(N−1)/2` nearest-neighbour slots. Each slot
//! swaps the two logical qubits sitting on its sites, and every unordered
//! logical pair is adjacent in exactly one slot. After a full pass the
//! logical order on the chain is reversed.
//!
//! The rectangular network is an odd-even transposition brick of depth `N`.
//! The triangular network is an insertion-style triangle: diagonal `p`
//! carries the qubit that started on site `p` down to site 0, and diagonals
//! are pipelined two layers apart, giving depth `2N − 3`.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    #[serde(rename = "rsn")]
    Rectangular,
    #[serde(rename = "tsn")]
    Triangular,
}

impl Architecture {
    pub fn expected_depth(self, n: usize) -> usize {
        match (self, n) {
            (_, 0 | 1) => 0,
            (Architecture::Rectangular, n) => n,
            (Architecture::Triangular, n) => 2 * n - 3,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Architecture::Rectangular => "rsn",
            Architecture::Triangular => "tsn",
        }
    }
}

impl core::str::FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rsn" | "rectangular" => Ok(Architecture::Rectangular),
            "tsn" | "triangular" => Ok(Architecture::Triangular),
            other => Err(Error::Config(alloc::format!("unknown architecture '{other}'"))),
        }
    }
}

/// One nearest-neighbour slot: interaction on the logical pair currently at
/// `(left_site, left_site + 1)`, followed by a SWAP.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSlot {
    pub layer: usize,
    pub left_site: usize,
    /// Unordered logical pair, stored as `(min, max)`.
    pub logical_pair: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSchedule {
    pub n: usize,
    pub architecture: Architecture,
    /// Number of layers in the mesh. A brick of two qubits keeps an empty
    /// second layer, so this can exceed the highest occupied layer.
    pub layers: usize,
    /// Site → logical map before the first slot.
    pub initial_order: Vec<usize>,
    /// Slots in application order; within a layer, left to right.
    pub slots: Vec<GateSlot>,
    /// Site → logical map after the last slot.
    pub final_permutation: Vec<usize>,
}

impl GateSchedule {
    pub fn depth(&self) -> usize {
        self.layers
    }

    /// Same slot layout with logical annotations recomputed for a different
    /// starting placement.
    pub fn relabeled(&self, initial_order: &[usize]) -> Result<Self> {
        if initial_order.len() != self.n || !crate::is_permutation(initial_order) {
            return Err(Error::Validation("initial order must be a permutation of 0..n".into()));
        }
        let sites: Vec<(usize, usize)> = self.slots.iter().map(|s| (s.layer, s.left_site)).collect();
        Ok(annotate(self.n, self.architecture, self.layers, initial_order.to_vec(), &sites))
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidSize { what: "swap network qubit count", value: n });
    }
    Ok(())
}

fn annotate(
    n: usize,
    architecture: Architecture,
    layers: usize,
    initial_order: Vec<usize>,
    sites: &[(usize, usize)],
) -> GateSchedule {
    let mut order = initial_order.clone();
    let slots = sites
        .iter()
        .map(|&(layer, k)| {
            let (a, b) = (order[k], order[k + 1]);
            order.swap(k, k + 1);
            GateSlot { layer, left_site: k, logical_pair: (a.min(b), a.max(b)) }
        })
        .collect();
    GateSchedule { n, architecture, layers, initial_order, slots, final_permutation: order }
}

/// Brick pattern: even layers act on site pairs (0,1),(2,3),…; odd layers on
/// (1,2),(3,4),…; `N` layers.
pub fn rectangular_schedule(n: usize) -> Result<GateSchedule> {
    check_size(n)?;
    let mut sites = Vec::with_capacity(n * (n - 1) / 2);
    for layer in 0..n {
        let mut k = layer % 2;
        while k + 1 < n {
            sites.push((layer, k));
            k += 2;
        }
    }
    Ok(annotate(n, Architecture::Rectangular, n, (0..n).collect(), &sites))
}

/// Triangular mesh of depth `2N − 3`. Diagonal `p ∈ 1..N` acts on sites
/// `p−1, p−2, …, 0`; the slot on site `k` of diagonal `p` sits in layer
/// `2(p−1) − k`.
pub fn triangular_schedule(n: usize) -> Result<GateSchedule> {
    check_size(n)?;
    let mut sites = Vec::with_capacity(n * (n - 1) / 2);
    for p in 1..n {
        for k in (0..p).rev() {
            sites.push((2 * (p - 1) - k, k));
        }
    }
    sites.sort_unstable();
    Ok(annotate(n, Architecture::Triangular, 2 * n - 3, (0..n).collect(), &sites))
}

pub fn schedule(architecture: Architecture, n: usize) -> Result<GateSchedule> {
    match architecture {
        Architecture::Rectangular => rectangular_schedule(n),
        Architecture::Triangular => triangular_schedule(n),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub gate_count: usize,
    pub depth: usize,
    pub pair_coverage_ok: bool,
    pub reversal_ok: bool,
    /// Slots within a layer act on disjoint sites and every annotation
    /// matches the replayed permutation.
    pub layers_ok: bool,
}

impl ScheduleReport {
    pub fn all_ok(&self) -> bool {
        self.pair_coverage_ok && self.reversal_ok && self.layers_ok
    }
}

/// Replays a schedule and checks its structural invariants. Failures are
/// reported, never raised.
pub fn validate_schedule(schedule: &GateSchedule) -> ScheduleReport {
    let n = schedule.n;
    let mut order = schedule.initial_order.clone();
    let mut pairs = BTreeSet::new();
    let mut duplicate = false;
    let mut layers_ok = order.len() == n && crate::is_permutation(&order);
    let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();

    if layers_ok {
        for slot in &schedule.slots {
            let k = slot.left_site;
            if k + 1 >= n || slot.layer >= schedule.layers {
                layers_ok = false;
                break;
            }
            if !used.insert((slot.layer, k)) || !used.insert((slot.layer, k + 1)) {
                layers_ok = false;
            }
            let (a, b) = (order[k], order[k + 1]);
            let pair = (a.min(b), a.max(b));
            if pair != slot.logical_pair {
                layers_ok = false;
            }
            if !pairs.insert(pair) {
                duplicate = true;
            }
            order.swap(k, k + 1);
        }
    }
    let expected = n * n.saturating_sub(1) / 2;
    let pair_coverage_ok = layers_ok && !duplicate && pairs.len() == expected;
    let reversal_ok = layers_ok
        && order == schedule.final_permutation
        && order.iter().eq(schedule.initial_order.iter().rev());
    ScheduleReport {
        gate_count: schedule.slots.len(),
        depth: schedule.depth(),
        pair_coverage_ok,
        reversal_ok,
        layers_ok,
    }
}
