//! Exact reference engines: exhaustive ground-state search and dense
//! statevector imaginary-time evolution.
//!
//! Dense states index qubit 0 as the most significant bit.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mps::{SingleSiteGate, TwoSiteGate, C64};
use crate::problem::IsingModel;

pub const MAX_BRUTE_FORCE_QUBITS: usize = 24;
pub const MAX_DENSE_ORACLE_QUBITS: usize = 14;

/// Exact minimum over all `2ⁿ` assignments and the lexicographically first
/// bitstring attaining it.
pub fn brute_force_ground(model: &IsingModel) -> Result<(f64, Vec<u8>)> {
    let n = model.n();
    if n > MAX_BRUTE_FORCE_QUBITS {
        return Err(Error::TooLarge { n, max: MAX_BRUTE_FORCE_QUBITS });
    }
    let mut neighbors: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut scale = 1.0;
    for ((i, j), v) in model.couplings() {
        neighbors[i].push((j, v));
        neighbors[j].push((i, v));
        scale += v.abs();
    }
    scale += model.fields().iter().map(|h| h.abs()).sum::<f64>();
    let tol = 1e-9 * scale;

    let mut bits = vec![0u8; n];
    let mut spins = vec![1.0f64; n];
    let mut cost = model.cost_of_bits_unchecked(&bits);
    let mut best = cost;
    let mut best_bits = bits.clone();

    for step in 1u64..1u64 << n {
        // Gray code: flip the qubit matching the lowest set bit of the step
        let i = n - 1 - step.trailing_zeros() as usize;
        let local: f64 =
            model.fields()[i] + neighbors[i].iter().map(|&(j, v)| v * spins[j]).sum::<f64>();
        cost -= 2.0 * spins[i] * local;
        spins[i] = -spins[i];
        bits[i] ^= 1;
        if step % 4096 == 0 {
            cost = model.cost_of_bits_unchecked(&bits);
        }
        if cost <= best + tol {
            let exact = model.cost_of_bits_unchecked(&bits);
            if exact < best || (exact == best && bits < best_bits) {
                best = exact;
                best_bits.copy_from_slice(&bits);
            }
        }
    }
    Ok((best, best_bits))
}

/// Full `2ⁿ` amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amplitudes: Vec<C64>,
}

impl DenseState {
    pub fn new(n: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_dense_size(n)?;
        if amplitudes.len() != 1 << n {
            return Err(Error::Validation(format!(
                "{} amplitudes for {n} qubits",
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Numerical("non-finite amplitude".into()));
        }
        Ok(Self { n, amplitudes })
    }

    pub fn plus(n: usize) -> Result<Self> {
        check_dense_size(n)?;
        let a = C64::new(libm::pow(2.0, -(n as f64) / 2.0), 0.0);
        Ok(Self { n, amplitudes: vec![a; 1 << n] })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amplitudes.iter().map(|a| a.norm_sqr()).sum())
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let norm = self.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateState);
        }
        let inv = C64::new(1.0 / norm, 0.0);
        self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        Ok(norm)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.norm() * self.norm();
        self.amplitudes.iter().map(|a| a.norm_sqr() / total).collect()
    }

    /// `|⟨a|b⟩|² / (‖a‖² ‖b‖²)`.
    pub fn fidelity(&self, other: &[C64]) -> f64 {
        let overlap: C64 = self.amplitudes.iter().zip(other).map(|(a, b)| a.conj() * b).sum();
        let nb: f64 = other.iter().map(|b| b.norm_sqr()).sum();
        overlap.norm_sqr() / (self.norm() * self.norm() * nb)
    }

    fn bit(&self, index: usize, qubit: usize) -> usize {
        (index >> (self.n - 1 - qubit)) & 1
    }

    /// `⟨H⟩` for a diagonal Ising Hamiltonian.
    pub fn energy(&self, model: &IsingModel) -> f64 {
        let diag = diagonal(model);
        let total: f64 = self.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        self.amplitudes.iter().zip(&diag).map(|(a, e)| a.norm_sqr() * e).sum::<f64>() / total
    }

    /// Applies a two-qubit gate whose basis index is `2·s_first + s_second`.
    pub fn apply_two_qubit(&mut self, first: usize, second: usize, gate: &TwoSiteGate) -> Result<()> {
        if first >= self.n || second >= self.n || first == second {
            return Err(Error::Validation(format!("invalid targets ({first}, {second})")));
        }
        let g = gate.matrix();
        let (m1, m2) = (1 << (self.n - 1 - first), 1 << (self.n - 1 - second));
        for base in 0..self.amplitudes.len() {
            if base & (m1 | m2) != 0 {
                continue;
            }
            let idx = [base, base | m2, base | m1, base | m1 | m2];
            let v = idx.map(|k| self.amplitudes[k]);
            for (row, &k) in idx.iter().enumerate() {
                self.amplitudes[k] = (0..4).map(|c| g[row][c] * v[c]).sum();
            }
        }
        Ok(())
    }

    pub fn apply_single_qubit(&mut self, qubit: usize, gate: &SingleSiteGate) -> Result<()> {
        if qubit >= self.n {
            return Err(Error::IndexOutOfRange { index: qubit, len: self.n });
        }
        let m = 1 << (self.n - 1 - qubit);
        for base in 0..self.amplitudes.len() {
            if base & m != 0 {
                continue;
            }
            let (a, b) = (self.amplitudes[base], self.amplitudes[base | m]);
            self.amplitudes[base] = gate[0][0] * a + gate[0][1] * b;
            self.amplitudes[base | m] = gate[1][0] * a + gate[1][1] * b;
        }
        Ok(())
    }

    /// `⟨Z_i⟩` and `⟨Z_i Z_j⟩` for the requested pairs.
    pub fn moments(&self, pairs: &[(usize, usize)]) -> (Vec<f64>, Vec<f64>) {
        let probs = self.probabilities();
        let z = |k: usize, q: usize| 1.0 - 2.0 * self.bit(k, q) as f64;
        let single = (0..self.n).map(|q| probs.iter().enumerate().map(|(k, p)| p * z(k, q)).sum()).collect();
        let pair = pairs
            .iter()
            .map(|&(i, j)| probs.iter().enumerate().map(|(k, p)| p * z(k, i) * z(k, j)).sum())
            .collect();
        (single, pair)
    }
}

fn check_dense_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSize { what: "dense qubit count", value: 0 });
    }
    if n > MAX_DENSE_ORACLE_QUBITS {
        return Err(Error::TooLarge { n, max: MAX_DENSE_ORACLE_QUBITS });
    }
    Ok(())
}

/// `H(z)` for every basis index.
fn diagonal(model: &IsingModel) -> Vec<f64> {
    let n = model.n();
    (0..1usize << n)
        .map(|k| {
            let bits: Vec<u8> = (0..n).map(|q| ((k >> (n - 1 - q)) & 1) as u8).collect();
            model.cost_of_bits_unchecked(&bits)
        })
        .collect()
}

/// Evolution by `exp(−Δτ H)` as an elementwise product on the diagonal.
///
/// With `normalized_gates`, each factor is shifted by its expectation on the
/// state at the start of the step, which only changes the overall scale.
/// The returned trajectory starts at `|+⟩^⊗n` and has `steps + 1` entries,
/// each renormalized.
pub fn dense_ite(model: &IsingModel, dtau: f64, steps: usize, normalized_gates: bool) -> Result<Vec<DenseState>> {
    let n = model.n();
    let diag = diagonal(model);
    let mut state = DenseState::plus(n)?;
    let pairs: Vec<((usize, usize), f64)> = model.couplings().collect();
    let keys: Vec<(usize, usize)> = pairs.iter().map(|p| p.0).collect();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(state.clone());
    for _ in 0..steps {
        let shift = if normalized_gates {
            let (z, zz) = state.moments(&keys);
            model.constant()
                + pairs.iter().zip(&zz).map(|((_, j), c)| j * c).sum::<f64>()
                + model.fields().iter().zip(&z).map(|(h, m)| h * m).sum::<f64>()
        } else {
            0.0
        };
        for (a, e) in state.amplitudes.iter_mut().zip(&diag) {
            *a *= C64::new(libm::exp(-dtau * (e - shift)), 0.0);
        }
        if state.amplitudes.iter().any(|a| !a.re.is_finite()) {
            return Err(Error::Numerical("dense evolution overflowed".into()));
        }
        state.normalize()?;
        out.push(state.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mps::{hadamard, z_decay, MpsState, TruncationPolicy};
    use crate::problem::{gen_er, gen_sk, WeightedGraph};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exhaustive(model: &IsingModel) -> (f64, Vec<u8>) {
        let n = model.n();
        let mut best = (f64::INFINITY, Vec::new());
        // lexicographic order over bit vectors: qubit 0 is the leading digit
        for k in 0..1usize << n {
            let bits: Vec<u8> = (0..n).map(|q| ((k >> (n - 1 - q)) & 1) as u8).collect();
            let c = model.cost_of_bits(&bits).unwrap();
            if c < best.0 {
                best = (c, bits);
            }
        }
        best
    }

    #[test]
    fn small_ground_states() {
        let edge = WeightedGraph::new(2, vec![(0, 1, 1.0)]).unwrap().maxcut_ising();
        assert_eq!(brute_force_ground(&edge).unwrap(), (-1.0, vec![0, 1]));
        let tri = WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert_eq!(brute_force_ground(&tri.maxcut_ising()).unwrap().0, -2.0);
        let mut fields = IsingModel::new(2);
        fields.add_field(0, 1.0).unwrap();
        fields.add_field(1, -1.0).unwrap();
        let (c, bits) = brute_force_ground(&fields).unwrap();
        assert_eq!(c, -2.0);
        assert_eq!(bits, [1, 0]);
        assert!(matches!(brute_force_ground(&IsingModel::new(25)), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn matches_plain_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for seed in 0..10 {
            let mut m = gen_er(11, 0.5, seed).unwrap().maxcut_ising();
            for q in 0..11 {
                if rng.gen::<bool>() {
                    m.add_field(q, rng.gen_range(-1.0..1.0)).unwrap();
                }
            }
            assert_eq!(brute_force_ground(&m).unwrap(), exhaustive(&m));
        }
        let sk = gen_sk(9, 1).unwrap().maxcut_ising();
        assert_eq!(brute_force_ground(&sk).unwrap(), exhaustive(&sk));
    }

    #[test]
    fn ground_is_a_lower_bound() {
        let m = gen_sk(14, 3).unwrap().maxcut_ising();
        let (g, _) = brute_force_ground(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            let z: Vec<i8> = (0..14).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
            assert!(g <= m.cost(&z).unwrap());
        }
    }

    #[test]
    fn single_z_converges_to_one() {
        let mut m = IsingModel::new(1);
        m.add_field(0, 1.0).unwrap();
        let traj = dense_ite(&m, 1.0, 30, true).unwrap();
        let last = traj.last().unwrap();
        assert!(last.fidelity(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]) > 1.0 - 1e-10);
    }

    #[test]
    fn zero_hamiltonian_is_static() {
        let traj = dense_ite(&IsingModel::new(3), 0.5, 4, false).unwrap();
        for s in &traj {
            for (a, b) in s.amplitudes().iter().zip(traj[0].amplitudes()) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn shifts_do_not_change_normalized_states() {
        let m = gen_sk(6, 8).unwrap().maxcut_ising();
        let a = dense_ite(&m, 0.2, 5, true).unwrap();
        let b = dense_ite(&m, 0.2, 5, false).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.fidelity(y.amplitudes()) > 1.0 - 1e-12);
        }
    }

    #[test]
    fn energy_decreases() {
        let m = gen_sk(8, 4).unwrap().maxcut_ising();
        let traj = dense_ite(&m, 0.05, 20, true).unwrap();
        for w in traj.windows(2) {
            assert!(w[1].energy(&m) < w[0].energy(&m) + 1e-12);
        }
    }

    #[test]
    fn gate_application() {
        let mut s = DenseState::new(2, vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let before = s.clone();
        s.apply_two_qubit(0, 1, &TwoSiteGate::identity()).unwrap();
        assert_eq!(s, before);
        s.apply_two_qubit(0, 1, &TwoSiteGate::swap()).unwrap();
        assert_eq!(s.amplitudes()[2], C64::new(1.0, 0.0));
        assert!(s.apply_two_qubit(1, 1, &TwoSiteGate::swap()).is_err());

        let mut h = DenseState::new(1, vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        h.apply_single_qubit(0, &hadamard()).unwrap();
        assert!((h.amplitudes()[1].re - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn random_gate_agrees_with_mps() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for left in 0..4 {
            let mut m = [[C64::new(0.0, 0.0); 4]; 4];
            for row in m.iter_mut() {
                for c in row.iter_mut() {
                    *c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            let gate = TwoSiteGate::new(m, false).unwrap();
            let mut mps = MpsState::random(5, 4, &mut rng).unwrap();
            mps.canonicalize(left).unwrap();
            let mut dense = DenseState::new(5, mps.to_dense().unwrap()).unwrap();
            mps.apply_two_site_gate(left, &gate, &TruncationPolicy::exact()).unwrap();
            dense.apply_two_qubit(left, left + 1, &gate).unwrap();
            let got = mps.to_dense().unwrap();
            for (a, b) in got.iter().zip(dense.amplitudes()) {
                assert!((a - b).norm() < 1e-12);
            }
            mps.apply_single_site_gate(2, &z_decay(0.3)).unwrap();
            dense.apply_single_qubit(2, &z_decay(0.3)).unwrap();
            for (a, b) in mps.to_dense().unwrap().iter().zip(dense.amplitudes()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn size_limits() {
        assert!(matches!(DenseState::plus(15), Err(Error::TooLarge { .. })));
        assert!(DenseState::plus(0).is_err());
        assert!(DenseState::new(2, vec![C64::new(1.0, 0.0); 3]).is_err());
    }
}
