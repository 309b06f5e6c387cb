//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::time::Instant;

use qite_core::mps::{MpsState, TruncationPolicy, C64};
use qite_core::oracle::{brute_force_ground, dense_ite, DenseState};
use qite_core::ordering::{identity_order, HierarchyDims, OrderingKind};
use qite_core::problem::{budget_metrics, gen_3regular, gen_sk, IsingModel, PortfolioSpec, QuboModel};
use qite_core::solver::{
    compute_moments, initial_state, ite_step, network_for, solve, SolveReport, SolverConfig,
};
use qite_core::swap_network::{schedule, validate_schedule, Architecture};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn bits_msb(k: usize, n: usize) -> Vec<u8> {
    (0..n).map(|q| ((k >> (n - 1 - q)) & 1) as u8).collect()
}

fn canonical_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_res: f64 = 0.0;
    let mut worst_amp: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.gen_range(2..=12);
        let chi = rng.gen_range(1..=16);
        let mut s = MpsState::random(n, chi, &mut rng).unwrap();
        s.canonicalize(rng.gen_range(0..n)).unwrap();
        s.norm_and_renormalize().unwrap();
        let reference = s.to_dense().unwrap();
        for _ in 0..5 {
            s.move_center(rng.gen_range(0..n)).unwrap();
            worst_res = worst_res.max(s.canonical_residual().unwrap());
            let amps = s.to_dense().unwrap();
            for (a, b) in amps.iter().zip(&reference) {
                worst_amp = worst_amp.max((a - b).norm());
            }
        }
    }
    outcome(
        worst_res < 1e-10 && worst_amp < 1e-12,
        format!("max residual {worst_res:.2e}, max amplitude drift {worst_amp:.2e}"),
    )
}

fn logical_trajectory(model: &IsingModel, arch: Architecture, dtau: f64, steps: usize) -> Vec<Vec<C64>> {
    let cfg = SolverConfig {
        delta_tau: dtau,
        truncation: TruncationPolicy::exact(),
        architecture: arch,
        ..SolverConfig::default()
    };
    let net = network_for(arch, model.n()).unwrap();
    let mut state = initial_state(&identity_order(model.n())).unwrap();
    let mut out = vec![state.to_dense_logical().unwrap()];
    for _ in 0..steps {
        let m = compute_moments(&state, model).unwrap();
        ite_step(&mut state, &net, model, &cfg, &m).unwrap();
        state.norm_and_renormalize().unwrap();
        out.push(state.to_dense_logical().unwrap());
    }
    out
}

fn sk_with_fields(n: usize, seed: u64) -> IsingModel {
    let mut m = gen_sk(n, seed).unwrap().maxcut_ising();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
    for q in 0..n {
        m.add_field(q, rng.gen_range(-0.5..0.5)).unwrap();
    }
    m
}

fn cross_engine() -> Outcome {
    let model = sk_with_fields(8, 17);
    let dense = dense_ite(&model, 0.05, 20, true).unwrap();
    let rsn = logical_trajectory(&model, Architecture::Rectangular, 0.05, 20);
    let tsn = logical_trajectory(&model, Architecture::Triangular, 0.05, 20);
    let min_fid = dense
        .iter()
        .zip(&tsn)
        .chain(dense.iter().zip(&rsn))
        .map(|(d, m)| d.fidelity(m))
        .fold(f64::INFINITY, f64::min);
    let arch_gap = rsn
        .iter()
        .zip(&tsn)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max);
    outcome(
        min_fid > 1.0 - 1e-8 && arch_gap < 1e-10,
        format!("min fidelity 1-{:.2e}, RSN/TSN max gap {arch_gap:.2e}", 1.0 - min_fid),
    )
}

fn schedules() -> Outcome {
    let mut failures = Vec::new();
    for n in 2..=16 {
        for arch in [Architecture::Rectangular, Architecture::Triangular] {
            let r = validate_schedule(&schedule(arch, n).unwrap());
            if r.gate_count != n * (n - 1) / 2 || r.depth != arch.expected_depth(n) || !r.all_ok() {
                failures.push(format!("{}:{n}", arch.short_name()));
            }
        }
    }
    outcome(failures.is_empty(), format!("30 schedules checked, failures {failures:?}"))
}

fn maxcut_cfg(chi: usize, ordering: OrderingKind, seed: u64) -> SolverConfig {
    SolverConfig {
        delta_tau: 1.0,
        n_step_max: 30,
        n_samples: 1000,
        truncation: TruncationPolicy::with_chi(chi).unwrap(),
        architecture: Architecture::Triangular,
        ordering,
        ordering_seed: seed,
        seed,
        ..SolverConfig::default()
    }
}

fn desk_optimality() -> Outcome {
    let mut hits = 0;
    for seed in 0..10 {
        let m = gen_3regular(16, seed).unwrap().maxcut_ising();
        let (opt, _) = brute_force_ground(&m).unwrap();
        let r = solve(&m, &maxcut_cfg(16, OrderingKind::Spectral, seed), Some(opt)).unwrap();
        if r.approximation_ratio == Some(1.0) {
            hits += 1;
        }
    }
    outcome(hits >= 9, format!("AR = 1 on {hits}/10 instances"))
}

/// Best cost from repeated single-flip descent.
fn local_search(m: &IsingModel, starts: usize, seed: u64) -> f64 {
    let n = m.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..starts {
        let mut bits: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let mut cost = m.cost_of_bits(&bits).unwrap();
        loop {
            let mut improved = false;
            for q in 0..n {
                bits[q] ^= 1;
                let c = m.cost_of_bits(&bits).unwrap();
                if c < cost - 1e-12 {
                    cost = c;
                    improved = true;
                } else {
                    bits[q] ^= 1;
                }
            }
            if !improved {
                break;
            }
        }
        best = best.min(cost);
    }
    best
}

fn ordering_effect() -> Outcome {
    let mut eps_spectral = Vec::new();
    let mut eps_shuffled = Vec::new();
    for seed in 0..10 {
        let m = gen_3regular(40, seed).unwrap().maxcut_ising();
        let spectral = solve(&m, &maxcut_cfg(8, OrderingKind::Spectral, seed), None).unwrap();
        let shuffled = solve(&m, &maxcut_cfg(8, OrderingKind::Shuffled, seed), None).unwrap();
        let reference = local_search(&m, 2000, seed).min(spectral.best_cost).min(shuffled.best_cost);
        eps_spectral.push(1.0 - spectral.best_cost / reference);
        eps_shuffled.push(1.0 - shuffled.best_cost / reference);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (a, b) = (mean(&eps_spectral), mean(&eps_shuffled));
    outcome(a <= b, format!("mean error spectral {a:.5}, shuffled {b:.5}"))
}

fn sampling_fidelity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut s = MpsState::random(8, 6, &mut rng).unwrap();
    s.canonicalize(3).unwrap();
    s.norm_and_renormalize().unwrap();
    let probs = DenseState::new(8, s.to_dense().unwrap()).unwrap().probabilities();
    let draw = |seed| s.perfect_sample(&mut ChaCha8Rng::seed_from_u64(seed), 100_000).unwrap();
    let samples = draw(99);
    let mut counts = vec![0usize; 256];
    for b in &samples {
        counts[b.iter().fold(0, |acc, &x| acc * 2 + x as usize)] += 1;
    }
    let tv = 0.5
        * counts.iter().zip(&probs).map(|(&c, p)| (c as f64 / 1e5 - p).abs()).sum::<f64>();
    let deterministic = samples == draw(99);
    outcome(tv < 0.02 && deterministic, format!("TV distance {tv:.4}, deterministic {deterministic}"))
}

fn entropies() -> Outcome {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut bell = vec![C64::new(0.0, 0.0); 4];
    bell[0] = C64::new(h, 0.0);
    bell[3] = C64::new(h, 0.0);
    let bell_s = MpsState::from_dense(2, &bell).unwrap().bond_entropies().unwrap();
    let mut ghz = vec![C64::new(0.0, 0.0); 16];
    ghz[0] = C64::new(h, 0.0);
    ghz[15] = C64::new(h, 0.0);
    let ghz_s = MpsState::from_dense(4, &ghz).unwrap().bond_entropies().unwrap();
    let product = MpsState::product_state(&[0, 1, 1, 0, 1]).unwrap().bond_entropies().unwrap();
    let plus = MpsState::plus_state(6).unwrap().bond_entropies().unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bound_ok = true;
    for _ in 0..50 {
        let n = rng.gen_range(2..=10);
        let mut s = MpsState::random(n, rng.gen_range(1..=8), &mut rng).unwrap();
        s.canonicalize(0).unwrap();
        s.norm_and_renormalize().unwrap();
        let dims = s.bond_dims();
        for (e, d) in s.bond_entropies().unwrap().iter().zip(dims) {
            bound_ok &= *e <= (d as f64).log2() + 1e-12;
        }
    }
    let pass = (bell_s[0] - 1.0).abs() < 1e-10
        && ghz_s.iter().all(|e| (e - 1.0).abs() < 1e-10)
        && product.iter().chain(&plus).all(|e| e.abs() < 1e-12)
        && bound_ok;
    outcome(pass, format!("Bell {:.12}, GHZ {ghz_s:.12?}, bound ok {bound_ok}", bell_s[0]))
}

fn energy_monotonicity() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for (k, model) in [
        sk_with_fields(8, 4),
        gen_3regular(8, 2).unwrap().maxcut_ising(),
        gen_sk(8, 5).unwrap().maxcut_ising(),
    ]
    .iter()
    .enumerate()
    {
        let arch = if k % 2 == 0 { Architecture::Triangular } else { Architecture::Rectangular };
        let cfg = SolverConfig {
            delta_tau: 0.1,
            truncation: TruncationPolicy::exact(),
            architecture: arch,
            ..SolverConfig::default()
        };
        let net = network_for(arch, 8).unwrap();
        let mut state = initial_state(&identity_order(8)).unwrap();
        let mut m = compute_moments(&state, model).unwrap();
        let mut energy = m.energy(model);
        for _ in 0..30 {
            ite_step(&mut state, &net, model, &cfg, &m).unwrap();
            state.norm_and_renormalize().unwrap();
            m = compute_moments(&state, model).unwrap();
            let next = m.energy(model);
            worst = worst.max(next - energy);
            energy = next;
        }
    }
    outcome(worst <= 1e-9, format!("largest per-step energy increase {worst:.2e}"))
}

fn portfolio_spec() -> PortfolioSpec {
    PortfolioSpec {
        assets: 2,
        times: 2,
        bits: 2,
        funds: None,
        risk_aversion: 1.0,
        transaction_cost: 0.01,
        budget_penalty: 1.0,
        returns: vec![vec![0.012, 0.004], vec![0.003, 0.010]],
        covariances: vec![
            vec![vec![0.040, 0.006], vec![0.006, 0.010]],
            vec![vec![0.030, -0.004], vec![-0.004, 0.020]],
        ],
    }
}

fn budget_violation(spec: &PortfolioSpec, bits: &[u8]) -> f64 {
    let omega = spec.decode(bits).unwrap();
    omega.iter().map(|w| (w.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
}

fn portfolio() -> Outcome {
    let spec = portfolio_spec();
    let qubo = spec.build_qubo().unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..256 {
        let bits = bits_msb(k, 8);
        let direct = spec.objective(&spec.decode(&bits).unwrap());
        worst = worst.max((qubo.cost(&bits).unwrap() - direct).abs());
    }
    let ising = qubo.to_ising();
    let (opt, opt_bits) = brute_force_ground(&ising).unwrap();
    let cfg = SolverConfig {
        delta_tau: 10.0,
        n_step_max: 40,
        n_samples: 1000,
        truncation: TruncationPolicy::with_chi(16).unwrap(),
        ordering: OrderingKind::Hierarchical,
        hierarchy: Some(HierarchyDims { assets: 2, times: 2, bits: 2 }),
        ..SolverConfig::default()
    };
    let mut report: SolveReport = solve(&ising, &cfg, Some(opt)).unwrap();
    report.annotate_portfolio(&spec).unwrap();
    let ar_ok = report.approximation_ratio.is_some_and(|ar| (ar - 1.0).abs() < 1e-12);
    let violation = budget_violation(&spec, &report.best_bitstring);
    let opt_violation = budget_violation(&spec, &opt_bits);
    let zeta = PortfolioSpec { bits: 2, ..spec.clone() }.zeta();
    let mean_budget = budget_metrics(&spec.decode(&report.best_bitstring).unwrap()).mean;
    let pass = worst < 1e-10
        && ar_ok
        && violation <= opt_violation + 1e-12
        && (zeta - 0.0125).abs() < 1e-15;
    outcome(
        pass,
        format!(
            "QUBO gap {worst:.1e}, AR {:?}, budget violation {violation:.4} (optimum {opt_violation:.4}), \
             mean budget {mean_budget:.4}, zeta {zeta}",
            report.approximation_ratio
        ),
    )
}

fn qubo_ising() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=10);
        let mut q = QuboModel::new(n);
        for i in 0..n {
            for j in i..n {
                if rng.gen_bool(0.7) {
                    q.add_term(i, j, rng.gen_range(-5.0..5.0)).unwrap();
                }
            }
        }
        q.add_offset(rng.gen_range(-1.0..1.0));
        let ising = q.to_ising();
        for k in 0..1usize << n {
            let bits = bits_msb(k, n);
            let spins: Vec<i8> = bits.iter().map(|&b| 1 - 2 * b as i8).collect();
            worst = worst.max((q.cost(&bits).unwrap() - ising.cost(&spins).unwrap()).abs());
        }
    }
    outcome(worst < 1e-12, format!("max cost gap {worst:.2e} over 50 models"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("canonical forms", canonical_forms),
        ("cross-engine exactness", cross_engine),
        ("schedule properties", schedules),
        ("optimality at N=16", desk_optimality),
        ("ordering effect at N=40", ordering_effect),
        ("sampling fidelity", sampling_fidelity),
        ("entropy correctness", entropies),
        ("energy monotonicity", energy_monotonicity),
        ("portfolio correctness", portfolio),
        ("QUBO/Ising equivalence", qubo_ising),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:2} {status} {name}: {} [{:.2}s]",
            k + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
