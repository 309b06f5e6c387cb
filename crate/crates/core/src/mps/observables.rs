use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{MpsState, SiteTensor, C64};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-8;

/// One step of the left environment: `Σ_s w_s A_s† E A_s`.
pub(crate) fn transfer(env: &DMatrix<C64>, t: &SiteTensor, weights: [f64; 2]) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(t.right_dim(), t.right_dim());
    for (s, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let a = t.slice(s);
        out += (a.adjoint() * env * &a) * C64::new(w, 0.0);
    }
    out
}

/// One step of the right environment: `Σ_s conj(A_s) R A_sᵀ`.
fn transfer_right(env: &DMatrix<C64>, t: &SiteTensor) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(t.left_dim(), t.left_dim());
    for s in 0..2 {
        let a = t.slice(s);
        out += a.conjugate() * env * a.transpose();
    }
    out
}

fn close(left: &DMatrix<C64>, right: &DMatrix<C64>) -> f64 {
    left.zip_fold(right, 0.0, |acc, a, b| acc + (a * b).re)
}

const Z: [f64; 2] = [1.0, -1.0];
const ONE: [f64; 2] = [1.0, 1.0];

/// Shannon entropy in bits of the squared, normalized Schmidt coefficients.
pub fn entropy_bits(schmidt: &[f64]) -> f64 {
    let total: f64 = schmidt.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return 0.0;
    }
    schmidt
        .iter()
        .map(|s| s * s / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * libm::log2(p))
        .sum::<f64>()
        .max(0.0)
}

impl MpsState {
    fn right_environments(&self) -> Vec<DMatrix<C64>> {
        let n = self.len();
        let mut envs = vec![DMatrix::from_element(1, 1, C64::new(1.0, 0.0)); n + 1];
        for k in (0..n).rev() {
            envs[k] = transfer_right(&envs[k + 1], &self.tensors[k]);
        }
        envs
    }

    fn check_normalized(&self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Precondition(format!("state norm {norm} is not 1")));
        }
        Ok(())
    }

    /// `⟨Z⟩` at an MPS site.
    pub fn expectation_z(&self, site: usize) -> Result<f64> {
        self.check_site(site)?;
        let (z, _) = self.site_moments(&[])?;
        Ok(z[site])
    }

    /// `⟨Z_i Z_j⟩` between two distinct MPS sites.
    pub fn correlator_zz(&self, i: usize, j: usize) -> Result<f64> {
        self.check_site(i)?;
        self.check_site(j)?;
        if i == j {
            return Err(Error::Precondition("correlator needs two distinct sites".into()));
        }
        let (_, zz) = self.site_moments(&[(i.min(j), i.max(j))])?;
        Ok(zz[0])
    }

    /// Single-site `⟨Z⟩` at every site plus `⟨Z_i Z_j⟩` for each requested
    /// site pair, from exact contractions. Pairs must satisfy `i < j`.
    pub fn site_moments(&self, pairs: &[(usize, usize)]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_normalized()?;
        let n = self.len();
        let right = self.right_environments();
        let mut left = Vec::with_capacity(n + 1);
        left.push(DMatrix::from_element(1, 1, C64::new(1.0, 0.0)));
        for k in 0..n {
            let next = transfer(&left[k], &self.tensors[k], ONE);
            left.push(next);
        }
        let norm_sqr = left[n][(0, 0)].re;
        if norm_sqr <= 0.0 {
            return Err(Error::DegenerateState);
        }

        let z = (0..n)
            .map(|k| close(&transfer(&left[k], &self.tensors[k], Z), &right[k + 1]) / norm_sqr)
            .collect();

        let mut by_first: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (idx, &(i, j)) in pairs.iter().enumerate() {
            if i >= j || j >= n {
                return Err(Error::Precondition(format!("invalid site pair ({i}, {j})")));
            }
            by_first.entry(i).or_default().push((j, idx));
        }
        let mut zz = vec![0.0; pairs.len()];
        for (i, mut targets) in by_first {
            targets.sort_unstable();
            let mut env = transfer(&left[i], &self.tensors[i], Z);
            let mut site = i + 1;
            for (j, idx) in targets {
                while site < j {
                    env = transfer(&env, &self.tensors[site], ONE);
                    site += 1;
                }
                zz[idx] = close(&transfer(&env, &self.tensors[j], Z), &right[j + 1]) / norm_sqr;
            }
        }
        Ok((z, zz))
    }

    /// Schmidt coefficients at each of the `N − 1` bonds.
    pub fn schmidt_values(&self) -> Result<Vec<Vec<f64>>> {
        let mut work = self.clone();
        work.focus(0)?;
        let n = work.len();
        let mut out = Vec::with_capacity(n.saturating_sub(1));
        for k in 0..n.saturating_sub(1) {
            let m = work.tensors[k].left_matrix();
            let sv = m
                .try_svd(false, false, f64::EPSILON, 10_000)
                .ok_or_else(|| Error::Numerical(format!("SVD failed at bond {k}")))?;
            out.push(sv.singular_values.iter().copied().collect());
            work.move_center(k + 1)?;
        }
        Ok(out)
    }

    /// Entanglement entropy in bits at each bond.
    pub fn bond_entropies(&self) -> Result<Vec<f64>> {
        Ok(self.schmidt_values()?.iter().map(|s| entropy_bits(s)).collect())
    }
}
