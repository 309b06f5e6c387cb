use alloc::collections::BTreeMap;
use alloc::format;

use super::IsingModel;
use crate::error::{Error, Result};

/// `min xᵀQx + offset` over `x ∈ {0,1}ⁿ`, with `Q` upper triangular and
/// stored sparsely.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuboModel {
    n: usize,
    terms: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl QuboModel {
    pub fn new(n: usize) -> Self {
        Self { n, terms: BTreeMap::new(), offset: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds `value · x_i x_j`. The index order does not matter; `i == j`
    /// is a linear term.
    pub fn add_term(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::IndexOutOfRange { index: i.max(j), len: self.n });
        }
        if !value.is_finite() {
            return Err(Error::Validation(format!("non-finite QUBO entry at ({i}, {j})")));
        }
        *self.terms.entry((i.min(j), i.max(j))).or_insert(0.0) += value;
        Ok(())
    }

    pub fn add_offset(&mut self, value: f64) {
        self.offset += value;
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Entries `((i, j), q_ij)` with `i ≤ j`.
    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.terms.iter().map(|(&k, &v)| (k, v))
    }

    pub fn cost(&self, x: &[u8]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::Validation(format!(
                "assignment has {} entries, model has {}",
                x.len(),
                self.n
            )));
        }
        if let Some(b) = x.iter().find(|&&b| b > 1) {
            return Err(Error::Validation(format!("bit value {b} is not 0 or 1")));
        }
        Ok(self
            .terms
            .iter()
            .filter(|((i, j), _)| x[*i] == 1 && x[*j] == 1)
            .map(|(_, v)| v)
            .sum::<f64>()
            + self.offset)
    }

    /// Substitutes `x = (1 − z)/2`.
    pub fn to_ising(&self) -> IsingModel {
        let mut ising = IsingModel::new(self.n);
        let mut constant = self.offset;
        for (&(i, j), &q) in &self.terms {
            if i == j {
                constant += q / 2.0;
                ising.add_field_unchecked(i, -q / 2.0);
            } else {
                constant += q / 4.0;
                ising.add_field_unchecked(i, -q / 4.0);
                ising.add_field_unchecked(j, -q / 4.0);
                ising.add_coupling_unchecked(i, j, q / 4.0);
            }
        }
        ising.set_constant(constant);
        ising
    }
}
