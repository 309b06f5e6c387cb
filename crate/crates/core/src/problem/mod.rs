//! QUBO and Ising models, MaxCut instances, and the dynamic portfolio QUBO.
//!
//! Spin convention throughout: bit `x = 0` is spin `z = +1` and bit `x = 1`
//! is spin `z = −1`, i.e. `z = 1 − 2x`.

mod graph;
mod ising;
mod market;
mod portfolio;
mod qubo;

pub use graph::{gen_3regular, gen_er, gen_sk, WeightedGraph};
pub use ising::IsingModel;
pub use market::{estimate_market, MarketEstimate};
pub use portfolio::{budget_metrics, sharpe_ratio, transaction_fit, BudgetMetrics, PortfolioSpec};
pub use qubo::QuboModel;

#[inline]
pub fn spin_of_bit(bit: u8) -> i8 {
    1 - 2 * bit as i8
}
