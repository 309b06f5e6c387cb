use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::QuboModel;
use crate::error::{Error, Result};

const PSD_TOL: f64 = 1e-10;

/// Parabolic fit `ζ = (5/4)·ν·K/K′` to a proportional transaction cost.
pub fn transaction_fit(nu: f64, funds: f64, capacity: f64) -> f64 {
    1.25 * nu * funds / capacity
}

/// Dynamic portfolio problem over `assets × times` positions, each encoded
/// in `bits` binary digits.
///
/// Binary variables are laid out asset-major: `(asset · times + time) · bits + bit`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortfolioSpec {
    pub assets: usize,
    pub times: usize,
    pub bits: usize,
    /// Total funds `K`; defaults to the binary capacity `2^bits − 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub funds: Option<f64>,
    pub risk_aversion: f64,
    pub transaction_cost: f64,
    pub budget_penalty: f64,
    /// `times × assets` log returns.
    pub returns: Vec<Vec<f64>>,
    /// `times` covariance matrices, each `assets × assets`.
    pub covariances: Vec<Vec<Vec<f64>>>,
}

impl PortfolioSpec {
    pub fn n_vars(&self) -> usize {
        self.assets * self.times * self.bits
    }

    pub fn var_index(&self, asset: usize, time: usize, bit: usize) -> usize {
        (asset * self.times + time) * self.bits + bit
    }

    /// `K′ = 2^bits − 1`.
    pub fn capacity(&self) -> f64 {
        libm::ldexp(1.0, self.bits as i32) - 1.0
    }

    pub fn funds(&self) -> f64 {
        self.funds.unwrap_or_else(|| self.capacity())
    }

    pub fn zeta(&self) -> f64 {
        transaction_fit(self.transaction_cost, self.funds(), self.capacity())
    }

    pub fn validate(&self) -> Result<()> {
        if self.assets == 0 || self.times == 0 {
            return Err(Error::Validation("portfolio needs at least one asset and one step".into()));
        }
        if self.bits == 0 || self.bits > 30 {
            return Err(Error::Validation(format!("bits per position {} outside 1..=30", self.bits)));
        }
        let k = self.funds();
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Validation(format!("funds {k} must be positive")));
        }
        for (name, v) in [
            ("risk aversion", self.risk_aversion),
            ("transaction cost", self.transaction_cost),
            ("budget penalty", self.budget_penalty),
        ] {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} is not finite")));
            }
        }
        if self.returns.len() != self.times || self.returns.iter().any(|r| r.len() != self.assets) {
            return Err(Error::Validation("returns must be times × assets".into()));
        }
        if self.returns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Validation("returns contain non-finite values".into()));
        }
        if self.covariances.len() != self.times {
            return Err(Error::Validation("need one covariance matrix per step".into()));
        }
        for (t, cov) in self.covariances.iter().enumerate() {
            check_psd(cov, self.assets).map_err(|e| match e {
                Error::Validation(m) => Error::Validation(format!("covariance at step {t}: {m}")),
                other => other,
            })?;
        }
        Ok(())
    }

    /// Positions `ω[t][asset]` as fractions of the funds.
    pub fn decode(&self, x: &[u8]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.n_vars() {
            return Err(Error::Validation(format!(
                "bitstring has {} entries, portfolio has {}",
                x.len(),
                self.n_vars()
            )));
        }
        let k = self.funds();
        let mut omega = vec![vec![0.0; self.assets]; self.times];
        for (t, row) in omega.iter_mut().enumerate() {
            for (a, w) in row.iter_mut().enumerate() {
                *w = (0..self.bits)
                    .filter(|&q| x[self.var_index(a, t, q)] == 1)
                    .map(|q| libm::ldexp(1.0, q as i32))
                    .sum::<f64>()
                    / k;
            }
        }
        Ok(omega)
    }

    /// Direct evaluation of the full cost at positions `ω`: returns,
    /// risk, budget penalty and parabolic transaction cost.
    pub fn objective(&self, omega: &[Vec<f64>]) -> f64 {
        let zeta = self.zeta();
        let mut cost = 0.0;
        for t in 0..self.times {
            let w = &omega[t];
            let mut ret = 0.0;
            let mut risk = 0.0;
            for a in 0..self.assets {
                ret += self.returns[t][a] * w[a];
                for b in 0..self.assets {
                    risk += w[a] * self.covariances[t][a][b] * w[b];
                }
            }
            let used: f64 = w.iter().sum();
            cost += -ret + self.risk_aversion * risk + self.budget_penalty * (used - 1.0) * (used - 1.0);
            if t + 1 < self.times {
                cost += zeta
                    * (0..self.assets)
                        .map(|a| (omega[t + 1][a] - w[a]) * (omega[t + 1][a] - w[a]))
                        .sum::<f64>();
            }
        }
        cost
    }

    /// Expands the objective into a QUBO over the encoding bits.
    pub fn build_qubo(&self) -> Result<QuboModel> {
        self.validate()?;
        let k = self.funds();
        let zeta = self.zeta();
        let mut qubo = QuboModel::new(self.n_vars());
        // ω_{a,t} as a linear form over its bits
        let position = |a: usize, t: usize| -> Vec<(usize, f64)> {
            (0..self.bits).map(|q| (self.var_index(a, t, q), libm::ldexp(1.0, q as i32) / k)).collect()
        };
        let add_product = |qubo: &mut QuboModel, u: &[(usize, f64)], v: &[(usize, f64)], scale: f64| {
            for &(i, ci) in u {
                for &(j, cj) in v {
                    qubo.add_term(i, j, scale * ci * cj)?;
                }
            }
            Ok::<(), Error>(())
        };
        let add_linear = |qubo: &mut QuboModel, u: &[(usize, f64)], scale: f64| {
            for &(i, ci) in u {
                qubo.add_term(i, i, scale * ci)?;
            }
            Ok::<(), Error>(())
        };

        for t in 0..self.times {
            let cols: Vec<Vec<(usize, f64)>> = (0..self.assets).map(|a| position(a, t)).collect();
            for a in 0..self.assets {
                add_linear(&mut qubo, &cols[a], -self.returns[t][a])?;
                add_linear(&mut qubo, &cols[a], -2.0 * self.budget_penalty)?;
                for b in 0..self.assets {
                    let s = self.risk_aversion * self.covariances[t][a][b] + self.budget_penalty;
                    add_product(&mut qubo, &cols[a], &cols[b], s)?;
                }
            }
            qubo.add_offset(self.budget_penalty);
            if t + 1 < self.times {
                for a in 0..self.assets {
                    let next = position(a, t + 1);
                    add_product(&mut qubo, &next, &next, zeta)?;
                    add_product(&mut qubo, &next, &cols[a], -2.0 * zeta)?;
                    add_product(&mut qubo, &cols[a], &cols[a], zeta)?;
                }
            }
        }
        Ok(qubo)
    }
}

fn check_psd(cov: &[Vec<f64>], n: usize) -> Result<()> {
    if cov.len() != n || cov.iter().any(|r| r.len() != n) {
        return Err(Error::Validation(format!("expected a {n}×{n} matrix")));
    }
    let m = DMatrix::from_fn(n, n, |i, j| cov[i][j]);
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("non-finite entry".into()));
    }
    if (&m - m.transpose()).amax() > PSD_TOL {
        return Err(Error::Validation("matrix is not symmetric".into()));
    }
    let min_eig = m.symmetric_eigen().eigenvalues.min();
    if min_eig < -PSD_TOL {
        return Err(Error::Validation(format!("not positive semidefinite (eigenvalue {min_eig})")));
    }
    Ok(())
}

/// `Σ_t μ_tᵀω_t / √(Σ_t ω_tᵀΣ_tω_t)`.
pub fn sharpe_ratio(
    omega: &[Vec<f64>],
    returns: &[Vec<f64>],
    covariances: &[Vec<Vec<f64>>],
) -> Result<f64> {
    let mut ret = 0.0;
    let mut risk = 0.0;
    for ((w, mu), cov) in omega.iter().zip(returns).zip(covariances) {
        for a in 0..w.len() {
            ret += mu[a] * w[a];
            for b in 0..w.len() {
                risk += w[a] * cov[a][b] * w[b];
            }
        }
    }
    if !(risk > 0.0) {
        return Err(Error::UndefinedRatio);
    }
    Ok(ret / libm::sqrt(risk))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetMetrics {
    /// `(1/N_t) Σ_t Σ_a ω_{a,t}`.
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

pub fn budget_metrics(omega: &[Vec<f64>]) -> BudgetMetrics {
    if omega.is_empty() {
        return BudgetMetrics { mean: 0.0, min: 0.0, max: 0.0 };
    }
    let sums: Vec<f64> = omega.iter().map(|w| w.iter().sum()).collect();
    BudgetMetrics {
        mean: sums.iter().sum::<f64>() / sums.len() as f64,
        min: sums.iter().copied().fold(f64::INFINITY, f64::min),
        max: sums.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}
