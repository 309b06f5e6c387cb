//! Imaginary-time evolution loop.
//!
//! Each step applies `exp(−Δτ H)` to the MPS as one pass of a SWAP network:
//! every slot carries `exp(−Δτ J_ij (Z_i Z_j − ⟨Z_i Z_j⟩))` followed by a
//! SWAP, and the field factors `exp(−Δτ h_i (Z_i − ⟨Z_i⟩))` are applied after
//! the pass. The state is then renormalized, sampled, and the sample-cost
//! variance is compared against the variance of the initial state.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mps::{MpsState, TruncationPolicy, TwoSiteGate, C64};
use crate::ordering::{build_ordering, HierarchyDims, OrderingKind, OrderingPermutation};
use crate::problem::{budget_metrics, sharpe_ratio, BudgetMetrics, IsingModel, PortfolioSpec};
use crate::swap_network::{schedule, Architecture, GateSchedule};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub delta_tau: f64,
    pub n_step_max: usize,
    pub n_samples: usize,
    pub truncation: TruncationPolicy,
    pub architecture: Architecture,
    pub ordering: OrderingKind,
    pub ordering_seed: u64,
    /// Variable layout used by hierarchical ordering.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<HierarchyDims>,
    pub stop_ratio: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            delta_tau: 1.0,
            n_step_max: 30,
            n_samples: 1000,
            truncation: TruncationPolicy::with_chi(32).expect("valid default"),
            architecture: Architecture::Triangular,
            ordering: OrderingKind::Spectral,
            ordering_seed: 0,
            hierarchy: None,
            stop_ratio: 1e-3,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_tau > 0.0 && self.delta_tau.is_finite()) {
            return Err(Error::Config(format!("delta_tau {} must be positive", self.delta_tau)));
        }
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be at least 1".into()));
        }
        if self.n_step_max == 0 {
            return Err(Error::Config("n_step_max must be at least 1".into()));
        }
        if !(self.stop_ratio > 0.0 && self.stop_ratio < 1.0) {
            return Err(Error::Config(format!("stop_ratio {} outside (0, 1)", self.stop_ratio)));
        }
        // re-check in case the policy was deserialized
        TruncationPolicy::new(self.truncation.chi_max(), self.truncation.sv_cutoff())?;
        Ok(())
    }
}

/// `⟨Z_i⟩` and `⟨Z_i Z_j⟩` in logical indexing.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Moments {
    pub z: Vec<f64>,
    /// Keyed by `(i, j)` with `i < j`; only coupled pairs are present.
    pub zz: BTreeMap<(usize, usize), f64>,
}

impl Moments {
    pub fn zz(&self, i: usize, j: usize) -> f64 {
        self.zz.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
    }

    /// `⟨H⟩` from the moments.
    pub fn energy(&self, model: &IsingModel) -> f64 {
        model.constant()
            + model.couplings().map(|((i, j), v)| v * self.zz(i, j)).sum::<f64>()
            + model.fields().iter().zip(&self.z).map(|(h, z)| h * z).sum::<f64>()
    }
}

/// Exact single-site and coupled-pair moments of a normalized state.
pub fn compute_moments(state: &MpsState, model: &IsingModel) -> Result<Moments> {
    if state.len() != model.n() {
        return Err(Error::Config(format!(
            "state has {} qubits, model has {}",
            state.len(),
            model.n()
        )));
    }
    let l2s = state.logical_to_site();
    let pairs = model.coupled_pairs();
    let site_pairs: Vec<(usize, usize)> = pairs
        .iter()
        .map(|&(i, j)| (l2s[i].min(l2s[j]), l2s[i].max(l2s[j])))
        .collect();
    let (z_site, zz) = state.site_moments(&site_pairs)?;
    Ok(Moments {
        z: l2s.iter().map(|&s| z_site[s]).collect(),
        zz: pairs.into_iter().zip(zz).collect(),
    })
}

/// Truncation diagnostics of one network pass.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepTruncation {
    pub max_discarded_weight: f64,
    pub total_discarded_weight: f64,
}

fn shifted_zz_gate(dtau: f64, coupling: f64, shift: f64) -> Result<TwoSiteGate> {
    let d = |zz: f64| C64::new(libm::exp(-dtau * coupling * (zz - shift)), 0.0);
    Ok(TwoSiteGate::diagonal([d(1.0), d(-1.0), d(-1.0), d(1.0)])?.followed_by_swap())
}

/// One pass of the SWAP network plus field gates, with shifts frozen at
/// `moments`. The state is not renormalized.
pub fn ite_step(
    state: &mut MpsState,
    schedule: &GateSchedule,
    model: &IsingModel,
    cfg: &SolverConfig,
    moments: &Moments,
) -> Result<StepTruncation> {
    let n = model.n();
    if schedule.n != n || state.len() != n {
        return Err(Error::Config(format!(
            "size mismatch: schedule {}, model {n}, state {}",
            schedule.n,
            state.len()
        )));
    }
    let dtau = cfg.delta_tau;
    let mut diag = StepTruncation::default();
    let swap = TwoSiteGate::swap();
    for (idx, slot) in schedule.slots.iter().enumerate() {
        let k = slot.left_site;
        let (a, b) = (state.site_to_logical()[k], state.site_to_logical()[k + 1]);
        let j = model.coupling(a, b);
        let gate = if j != 0.0 { shifted_zz_gate(dtau, j, moments.zz(a, b))? } else { swap.clone() };
        match state.center() {
            Some(c) if c < k => state.move_center(k)?,
            Some(c) if c > k + 1 => state.move_center(k + 1)?,
            Some(_) => {}
            None => state.canonicalize(k)?,
        }
        let outcome = state
            .apply_two_site_gate(k, &gate, &cfg.truncation)
            .map_err(|e| slot_error(e, idx, slot.layer, k))?;
        state.swap_labels(k)?;
        diag.max_discarded_weight = diag.max_discarded_weight.max(outcome.discarded_weight);
        diag.total_discarded_weight += outcome.discarded_weight;
    }

    let l2s = state.logical_to_site();
    let mut targets: Vec<(usize, usize)> = model
        .fields()
        .iter()
        .enumerate()
        .filter(|(_, &h)| h != 0.0)
        .map(|(q, _)| (l2s[q], q))
        .collect();
    targets.sort_unstable();
    if state.center().is_some_and(|c| 2 * c > n) {
        targets.reverse();
    }
    for (site, q) in targets {
        let h = model.fields()[q];
        let m = moments.z[q];
        let z = C64::new(0.0, 0.0);
        let gate = [
            [C64::new(libm::exp(-dtau * h * (1.0 - m)), 0.0), z],
            [z, C64::new(libm::exp(-dtau * h * (-1.0 - m)), 0.0)],
        ];
        state.apply_single_site_gate(site, &gate).map_err(|e| match e {
            Error::Numerical(msg) => Error::Numerical(format!("field gate on qubit {q}: {msg}")),
            other => other,
        })?;
    }
    Ok(diag)
}

fn slot_error(e: Error, idx: usize, layer: usize, site: usize) -> Error {
    match e {
        Error::Numerical(msg) => {
            Error::Numerical(format!("slot {idx} (layer {layer}, site {site}): {msg}"))
        }
        Error::DegenerateState => Error::Numerical(format!(
            "slot {idx} (layer {layer}, site {site}): state collapsed to zero norm"
        )),
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleStats {
    pub costs: Vec<f64>,
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
    /// First index attaining the minimum cost.
    pub argmin: usize,
}

pub fn evaluate_samples(model: &IsingModel, samples: &[Vec<u8>]) -> Result<SampleStats> {
    if samples.is_empty() {
        return Err(Error::Validation("no samples to evaluate".into()));
    }
    let costs = samples.iter().map(|s| model.cost_of_bits(s)).collect::<Result<Vec<f64>>>()?;
    let count = costs.len() as f64;
    let mean = costs.iter().sum::<f64>() / count;
    let variance = costs.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / count;
    let mut argmin = 0;
    for (k, &c) in costs.iter().enumerate() {
        if c < costs[argmin] {
            argmin = k;
        }
    }
    Ok(SampleStats { costs, mean, variance, argmin })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortfolioMetrics {
    /// `None` when the positions carry no risk.
    pub sharpe_ratio: Option<f64>,
    pub budget: BudgetMetrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Exact `⟨H⟩` of the renormalized state.
    pub energy: f64,
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub best_cost: f64,
    pub best_sample: Vec<u8>,
    pub bond_entropies: Vec<f64>,
    /// Normalized cumulative entanglement `A(s)`.
    pub cumulative_entropy: f64,
    pub max_bond_dim: usize,
    pub max_discarded_weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub portfolio: Option<PortfolioMetrics>,
    /// Seconds since the start of the run; kept out of serialized reports so
    /// that they are reproducible byte for byte.
    #[serde(skip)]
    pub elapsed_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolveStatus {
    /// Sample variance fell below `stop_ratio · σ²_0` at `step`.
    Converged { step: usize },
    MaxSteps,
    Failed { message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub n: usize,
    pub best_bitstring: Vec<u8>,
    pub best_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approximation_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
    pub initial_variance: f64,
    pub status: SolveStatus,
    pub ordering: OrderingPermutation,
    pub config: SolverConfig,
    pub steps: Vec<StepRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub portfolio: Option<PortfolioMetrics>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        matches!(self.status, SolveStatus::Converged { .. })
    }

    pub fn failed(&self) -> bool {
        matches!(self.status, SolveStatus::Failed { .. })
    }

    /// Number of evolution steps taken (the step-0 record is not counted).
    pub fn steps_run(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    /// Fills Sharpe ratio and budget metrics for the best sample of every
    /// step and for the overall best bitstring.
    pub fn annotate_portfolio(&mut self, spec: &PortfolioSpec) -> Result<()> {
        let metrics = |bits: &[u8]| -> Result<PortfolioMetrics> {
            let omega = spec.decode(bits)?;
            let sharpe = match sharpe_ratio(&omega, &spec.returns, &spec.covariances) {
                Ok(v) => Some(v),
                Err(Error::UndefinedRatio) => None,
                Err(e) => return Err(e),
            };
            Ok(PortfolioMetrics { sharpe_ratio: sharpe, budget: budget_metrics(&omega) })
        };
        for rec in &mut self.steps {
            rec.portfolio = Some(metrics(&rec.best_sample)?);
        }
        self.portfolio = Some(metrics(&self.best_bitstring)?);
        Ok(())
    }
}

/// `C / C_ref`, undefined for a zero reference.
pub fn approximation_ratio(cost: f64, reference: f64) -> Option<f64> {
    (reference != 0.0).then(|| cost / reference)
}

/// `|+⟩^⊗n` with logical qubits placed by `ordering`.
pub fn initial_state(ordering: &OrderingPermutation) -> Result<MpsState> {
    let mut state = MpsState::plus_state(ordering.len())?;
    state.set_site_to_logical(ordering.site_to_logical())?;
    Ok(state)
}

/// Site schedule for `n` qubits; a single qubit has an empty network.
pub fn network_for(architecture: Architecture, n: usize) -> Result<GateSchedule> {
    if n == 1 {
        return Ok(GateSchedule {
            n,
            architecture,
            layers: 0,
            initial_order: vec![0],
            slots: Vec::new(),
            final_permutation: vec![0],
        });
    }
    schedule(architecture, n)
}

/// Bond dimension used to normalize `A(s)`: the configured limit, capped by
/// the largest bond an `n`-qubit state can need.
fn entropy_chi(n: usize, chi_max: usize) -> usize {
    let half = (n / 2).min(usize::BITS as usize - 2);
    chi_max.min(1usize << half)
}

#[cfg(feature = "std")]
fn default_clock() -> impl FnMut() -> f64 {
    let start = std::time::Instant::now();
    move || start.elapsed().as_secs_f64()
}

#[cfg(not(feature = "std"))]
fn default_clock() -> impl FnMut() -> f64 {
    || 0.0
}

pub fn solve(model: &IsingModel, cfg: &SolverConfig, reference_cost: Option<f64>) -> Result<SolveReport> {
    solve_with_clock(model, cfg, reference_cost, default_clock())
}

/// As [`solve`], with `clock` returning seconds since the run started.
pub fn solve_with_clock(
    model: &IsingModel,
    cfg: &SolverConfig,
    reference_cost: Option<f64>,
    mut clock: impl FnMut() -> f64,
) -> Result<SolveReport> {
    cfg.validate()?;
    let n = model.n();
    if n == 0 {
        return Err(Error::InvalidSize { what: "qubit count", value: 0 });
    }
    if let Some(r) = reference_cost {
        if !r.is_finite() {
            return Err(Error::Config("reference cost is not finite".into()));
        }
    }
    let ordering = build_ordering(cfg.ordering, model, cfg.ordering_seed, cfg.hierarchy)?;
    let network = network_for(cfg.architecture, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = initial_state(&ordering)?;

    let chi = entropy_chi(n, cfg.truncation.chi_max());
    let entropy_norm = if chi > 1 && n > 1 {
        (cfg.n_step_max * (n - 1)) as f64 * libm::log2(chi as f64)
    } else {
        0.0
    };

    let mut steps = Vec::with_capacity(cfg.n_step_max + 1);
    let mut moments = compute_moments(&state, model)?;
    let samples = state.perfect_sample(&mut rng, cfg.n_samples)?;
    let stats = evaluate_samples(model, &samples)?;
    let initial_variance = stats.variance;
    let mut best_cost = stats.costs[stats.argmin];
    let mut best_bits = samples[stats.argmin].clone();
    let mut entropy_sum = 0.0;
    steps.push(StepRecord {
        step: 0,
        energy: moments.energy(model),
        sample_mean: stats.mean,
        sample_variance: stats.variance,
        best_cost,
        best_sample: best_bits.clone(),
        bond_entropies: vec![0.0; n - 1],
        cumulative_entropy: 0.0,
        max_bond_dim: 1,
        max_discarded_weight: 0.0,
        portfolio: None,
        elapsed_seconds: clock(),
    });

    let mut status = SolveStatus::MaxSteps;
    for s in 1..=cfg.n_step_max {
        let outcome = (|| -> Result<(StepRecord, Moments)> {
            let trunc = ite_step(&mut state, &network, model, cfg, &moments)?;
            state.norm_and_renormalize()?;
            let next = compute_moments(&state, model)?;
            let samples = state.perfect_sample(&mut rng, cfg.n_samples)?;
            let stats = evaluate_samples(model, &samples)?;
            let entropies = state.bond_entropies()?;
            entropy_sum += entropies.iter().sum::<f64>();
            let cumulative = if entropy_norm > 0.0 { entropy_sum / entropy_norm } else { 0.0 };
            let rec = StepRecord {
                step: s,
                energy: next.energy(model),
                sample_mean: stats.mean,
                sample_variance: stats.variance,
                best_cost: stats.costs[stats.argmin],
                best_sample: samples[stats.argmin].clone(),
                bond_entropies: entropies,
                cumulative_entropy: cumulative,
                max_bond_dim: state.max_bond_dim(),
                max_discarded_weight: trunc.max_discarded_weight,
                portfolio: None,
                elapsed_seconds: clock(),
            };
            Ok((rec, next))
        })();
        match outcome {
            Ok((rec, next)) => {
                moments = next;
                if rec.best_cost < best_cost {
                    best_cost = rec.best_cost;
                    best_bits = rec.best_sample.clone();
                }
                let variance = rec.sample_variance;
                steps.push(rec);
                if variance < cfg.stop_ratio * initial_variance {
                    status = SolveStatus::Converged { step: s };
                    break;
                }
            }
            Err(e @ (Error::Numerical(_) | Error::DegenerateState | Error::Precondition(_))) => {
                log::warn!("run aborted at step {s}: {e}");
                status = SolveStatus::Failed { message: format!("step {s}: {e}") };
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let approximation = reference_cost.and_then(|r| approximation_ratio(best_cost, r));
    Ok(SolveReport {
        n,
        best_bitstring: best_bits,
        best_cost,
        reference_cost,
        approximation_ratio: approximation,
        error: approximation.map(|ar| 1.0 - ar),
        initial_variance,
        status,
        ordering,
        config: cfg.clone(),
        steps,
        portfolio: None,
    })
}
