use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `H(z) = Σ_{i<j} J_ij z_i z_j + Σ_i h_i z_i + constant` over `z ∈ {±1}ⁿ`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IsingModel {
    n: usize,
    couplings: BTreeMap<(usize, usize), f64>,
    fields: Vec<f64>,
    constant: f64,
}

impl IsingModel {
    pub fn new(n: usize) -> Self {
        Self { n, couplings: BTreeMap::new(), fields: vec![0.0; n], constant: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds `value` to `J_ij`.
    pub fn add_coupling(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::IndexOutOfRange { index: i.max(j), len: self.n });
        }
        if i == j {
            return Err(Error::Validation(format!("self-coupling on qubit {i}")));
        }
        if !value.is_finite() {
            return Err(Error::Validation(format!("non-finite coupling on ({i}, {j})")));
        }
        self.add_coupling_unchecked(i, j, value);
        Ok(())
    }

    pub(crate) fn add_coupling_unchecked(&mut self, i: usize, j: usize, value: f64) {
        *self.couplings.entry((i.min(j), i.max(j))).or_insert(0.0) += value;
    }

    /// Adds `value` to `h_i`.
    pub fn add_field(&mut self, i: usize, value: f64) -> Result<()> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, len: self.n });
        }
        if !value.is_finite() {
            return Err(Error::Validation(format!("non-finite field on qubit {i}")));
        }
        self.add_field_unchecked(i, value);
        Ok(())
    }

    pub(crate) fn add_field_unchecked(&mut self, i: usize, value: f64) {
        self.fields[i] += value;
    }

    pub fn set_constant(&mut self, constant: f64) {
        self.constant = constant;
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    /// `J_ij` for `i ≠ j`, zero when absent.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
    }

    /// Stored couplings `((i, j), J_ij)` with `i < j`, including explicit zeros.
    pub fn couplings(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.couplings.iter().map(|(&k, &v)| (k, v))
    }

    /// Pairs with a nonzero coupling.
    pub fn coupled_pairs(&self) -> Vec<(usize, usize)> {
        self.couplings.iter().filter(|(_, &v)| v != 0.0).map(|(&k, _)| k).collect()
    }

    pub fn cost(&self, spins: &[i8]) -> Result<f64> {
        if spins.len() != self.n {
            return Err(Error::Validation(format!(
                "spin vector has {} entries, model has {}",
                spins.len(),
                self.n
            )));
        }
        if let Some(s) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::Validation(format!("spin value {s} is not ±1")));
        }
        let mut e = self.constant;
        for (&(i, j), &v) in &self.couplings {
            e += v * (spins[i] * spins[j]) as f64;
        }
        for (h, &s) in self.fields.iter().zip(spins) {
            e += h * s as f64;
        }
        Ok(e)
    }

    /// Cost of a bit assignment under `z = 1 − 2x`.
    pub fn cost_of_bits(&self, bits: &[u8]) -> Result<f64> {
        if bits.len() != self.n {
            return Err(Error::Validation(format!(
                "bitstring has {} entries, model has {}",
                bits.len(),
                self.n
            )));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Validation(format!("bit value {b} is not 0 or 1")));
        }
        Ok(self.cost_of_bits_unchecked(bits))
    }

    pub(crate) fn cost_of_bits_unchecked(&self, bits: &[u8]) -> f64 {
        let z = |b: u8| if b == 0 { 1.0 } else { -1.0 };
        let mut e = self.constant;
        for (&(i, j), &v) in &self.couplings {
            e += if bits[i] == bits[j] { v } else { -v };
        }
        for (h, &b) in self.fields.iter().zip(bits) {
            e += h * z(b);
        }
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_formula() {
        let m = IsingModel::new(3);
        assert_eq!(m.cost(&[1, -1, 1]).unwrap(), 0.0);

        let mut m = IsingModel::new(2);
        m.add_coupling(1, 0, 1.0).unwrap();
        assert_eq!(m.cost(&[1, -1]).unwrap(), -1.0);
        assert_eq!(m.coupling(0, 1), 1.0);
        assert_eq!(m.cost_of_bits(&[0, 1]).unwrap(), -1.0);
    }

    #[test]
    fn rejects_bad_input() {
        let mut m = IsingModel::new(2);
        assert!(m.add_coupling(0, 0, 1.0).is_err());
        assert!(m.add_coupling(0, 2, 1.0).is_err());
        assert!(m.add_field(0, f64::INFINITY).is_err());
        assert!(matches!(m.cost(&[1, 0]), Err(Error::Validation(_))));
        assert!(m.cost(&[1]).is_err());
        assert!(m.cost_of_bits(&[0, 2]).is_err());
    }

    #[test]
    fn bit_and_spin_costs_agree() {
        let mut m = IsingModel::new(3);
        m.add_coupling(0, 1, 0.5).unwrap();
        m.add_coupling(1, 2, -1.25).unwrap();
        m.add_field(2, 0.75).unwrap();
        m.set_constant(0.1);
        for x in 0..8u8 {
            let bits = [(x >> 2) & 1, (x >> 1) & 1, x & 1];
            let spins: Vec<i8> = bits.iter().map(|&b| 1 - 2 * b as i8).collect();
            assert_eq!(m.cost_of_bits(&bits).unwrap(), m.cost(&spins).unwrap());
        }
    }
}
