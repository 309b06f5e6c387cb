use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-step mean log returns and sample covariances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketEstimate {
    /// `times × assets`.
    pub returns: Vec<Vec<f64>>,
    /// `times × assets × assets`.
    pub covariances: Vec<Vec<Vec<f64>>>,
}

/// Estimates `μ_t` and `Σ_t` from a price history (`rows = dates`,
/// `columns = assets`).
///
/// With `R` log returns, rebalancing step `t` uses the `window` returns
/// ending at `R − (times − 1 − t)·interval`. `interval` defaults to
/// `⌊R / times⌋` and `window` to `interval`.
pub fn estimate_market(
    prices: &[Vec<f64>],
    times: usize,
    interval: Option<usize>,
    window: Option<usize>,
) -> Result<MarketEstimate> {
    if times == 0 {
        return Err(Error::Parameter("need at least one rebalancing step".into()));
    }
    let assets = prices.first().map_or(0, Vec::len);
    if assets == 0 {
        return Err(Error::Validation("price table has no assets".into()));
    }
    for (row, p) in prices.iter().enumerate() {
        if p.len() != assets {
            return Err(Error::Validation(format!(
                "price row {row} has {} values, expected {assets}",
                p.len()
            )));
        }
        if let Some(col) = p.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Validation(format!(
                "price row {row}, asset {col}: value {} is not a positive number",
                p[col]
            )));
        }
    }
    let r_count = prices.len().saturating_sub(1);
    let interval = interval.unwrap_or(r_count / times);
    if interval == 0 {
        return Err(Error::Parameter(format!(
            "{r_count} returns cannot cover {times} rebalancing steps"
        )));
    }
    let window = window.unwrap_or(interval);
    if window < 2 {
        return Err(Error::Parameter(format!("window {window} is shorter than 2 returns")));
    }
    let needed = window + (times - 1) * interval;
    if needed > r_count {
        return Err(Error::Parameter(format!(
            "window {window} with interval {interval} needs {needed} returns, history has {r_count}"
        )));
    }

    let log_returns: Vec<Vec<f64>> = prices
        .windows(2)
        .map(|w| w[1].iter().zip(&w[0]).map(|(b, a)| libm::log(b / a)).collect())
        .collect();

    let mut returns = Vec::with_capacity(times);
    let mut covariances = Vec::with_capacity(times);
    for t in 0..times {
        let end = r_count - (times - 1 - t) * interval;
        let rows = &log_returns[end - window..end];
        let mean: Vec<f64> =
            (0..assets).map(|a| rows.iter().map(|r| r[a]).sum::<f64>() / window as f64).collect();
        let mut cov = vec![vec![0.0; assets]; assets];
        for a in 0..assets {
            for b in a..assets {
                let c = rows.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum::<f64>()
                    / (window - 1) as f64;
                cov[a][b] = c;
                cov[b][a] = c;
            }
        }
        returns.push(mean);
        covariances.push(cov);
    }
    Ok(MarketEstimate { returns, covariances })
}
