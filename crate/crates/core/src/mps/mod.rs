//! Matrix product state engine.
//!
//! An `N`-qubit state is held as a chain of rank-3 tensors with open
//! boundaries. The chain is kept in mixed canonical form around an
//! orthogonality center whenever one has been established: tensors left of
//! the center are left-isometries, tensors right of it are right-isometries,
//! and the center carries the norm.
//!
//! Non-unitary gates change the norm of the state. Instead of letting the
//! tensor entries drift, every gate application rescales the center tensor to
//! unit norm and accumulates the logarithm of the removed factor in
//! [`MpsState::norm_log`]. The represented state is always
//! `exp(norm_log) · (tensor network)`.
//!
//! Sites carry a `site_to_logical` map so that SWAP networks can move logical
//! qubits around the chain while observables and samples are reported in
//! logical order.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

mod gates;
mod observables;
mod sampling;
mod tensor;

pub use gates::{hadamard, z_decay, GateOutcome, SingleSiteGate, TruncationPolicy, TwoSiteGate};
pub use observables::entropy_bits;
pub use tensor::SiteTensor;

pub type C64 = Complex64;

/// Largest qubit count for which dense reconstruction is allowed.
pub const MAX_DENSE_QUBITS: usize = 20;

const SVD_MAX_ITER: usize = 10_000;

#[derive(Clone, Debug)]
pub struct MpsState {
    tensors: Vec<SiteTensor>,
    center: Option<usize>,
    site_to_logical: Vec<usize>,
    norm_log: f64,
}

impl MpsState {
    /// `|+⟩^⊗n` with bond dimension one, center at site 0.
    pub fn plus_state(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize { what: "qubit count", value: 0 });
        }
        let amp = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        let site = SiteTensor::from_data(1, 1, vec![amp, amp])?;
        Ok(Self {
            tensors: vec![site; n],
            center: Some(0),
            site_to_logical: (0..n).collect(),
            norm_log: 0.0,
        })
    }

    /// Computational basis state; `bits[k]` is the value of site `k`.
    pub fn product_state(bits: &[u8]) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidSize { what: "qubit count", value: 0 });
        }
        let mut tensors = Vec::with_capacity(bits.len());
        for &b in bits {
            if b > 1 {
                return Err(Error::Validation(format!("bit value {b} is not 0 or 1")));
            }
            let mut t = SiteTensor::zeros(1, 1);
            t.set(0, b as usize, 0, C64::new(1.0, 0.0));
            tensors.push(t);
        }
        Ok(Self {
            site_to_logical: (0..bits.len()).collect(),
            tensors,
            center: Some(0),
            norm_log: 0.0,
        })
    }

    /// Wraps arbitrary tensors. No canonical form is assumed.
    pub fn from_tensors(tensors: Vec<SiteTensor>) -> Result<Self> {
        let n = tensors.len();
        if n == 0 {
            return Err(Error::InvalidSize { what: "qubit count", value: 0 });
        }
        if tensors[0].left_dim() != 1 || tensors[n - 1].right_dim() != 1 {
            return Err(Error::Validation("boundary bonds must have dimension 1".into()));
        }
        for k in 0..n - 1 {
            if tensors[k].right_dim() != tensors[k + 1].left_dim() {
                return Err(Error::Validation(format!(
                    "bond {k}: right dim {} does not match left dim {}",
                    tensors[k].right_dim(),
                    tensors[k + 1].left_dim()
                )));
            }
        }
        Ok(Self { tensors, center: None, site_to_logical: (0..n).collect(), norm_log: 0.0 })
    }

    /// Exact decomposition of a dense amplitude vector (site 0 is the most
    /// significant bit). The result is left-canonical with center at the last
    /// site and minimal bond dimensions.
    pub fn from_dense(n: usize, amplitudes: &[C64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize { what: "qubit count", value: 0 });
        }
        if n > MAX_DENSE_QUBITS {
            return Err(Error::TooLarge { n, max: MAX_DENSE_QUBITS });
        }
        if amplitudes.len() != 1 << n {
            return Err(Error::Validation(format!(
                "expected {} amplitudes, got {}",
                1usize << n,
                amplitudes.len()
            )));
        }
        let mut tensors = Vec::with_capacity(n);
        let mut left = 1;
        let mut rest = amplitudes.to_vec();
        for _ in 0..n - 1 {
            let cols = rest.len() / (2 * left);
            let m = DMatrix::from_row_slice(2 * left, cols, &rest);
            let svd = checked_svd(m, "dense decomposition")?;
            let s = &svd.singular_values;
            let s_max = s.iter().cloned().fold(0.0, f64::max);
            let rank = s.iter().filter(|&&x| x > 1e-14 * s_max).count().max(1);
            let u = svd.u.as_ref().expect("u requested");
            let v_t = svd.v_t.as_ref().expect("v_t requested");
            let u_keep = u.columns(0, rank).into_owned();
            tensors.push(SiteTensor::from_left_matrix(&u_keep, left));
            let mut sv = v_t.rows(0, rank).into_owned();
            for (i, mut row) in sv.row_iter_mut().enumerate() {
                row *= C64::new(s[i], 0.0);
            }
            rest = tensor::row_major(&sv);
            left = rank;
        }
        tensors.push(SiteTensor::from_data(left, 1, rest)?);
        Ok(Self {
            tensors,
            center: Some(n - 1),
            site_to_logical: (0..n).collect(),
            norm_log: 0.0,
        })
    }

    /// Random state with bond dimensions `min(chi, 2^k, 2^(n-k))` and
    /// entries drawn uniformly from the unit square. No canonical form.
    pub fn random<R: Rng + ?Sized>(n: usize, chi: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize { what: "qubit count", value: 0 });
        }
        if chi == 0 {
            return Err(Error::InvalidSize { what: "bond dimension", value: 0 });
        }
        let pow2 = |k: usize| 1usize.checked_shl(k as u32).unwrap_or(usize::MAX);
        let bond = |k: usize| chi.min(pow2(k)).min(pow2(n - k));
        let tensors = (0..n)
            .map(|k| {
                let (l, r) = (bond(k), bond(k + 1));
                let data = (0..l * 2 * r)
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                SiteTensor::from_data(l, r, data)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_tensors(tensors)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn tensors(&self) -> &[SiteTensor] {
        &self.tensors
    }

    pub fn center(&self) -> Option<usize> {
        self.center
    }

    pub fn site_to_logical(&self) -> &[usize] {
        &self.site_to_logical
    }

    /// Inverse of [`site_to_logical`](Self::site_to_logical).
    pub fn logical_to_site(&self) -> Vec<usize> {
        let mut out = vec![0; self.len()];
        for (site, &q) in self.site_to_logical.iter().enumerate() {
            out[q] = site;
        }
        out
    }

    pub fn set_site_to_logical(&mut self, map: Vec<usize>) -> Result<()> {
        if map.len() != self.len() || !crate::is_permutation(&map) {
            return Err(Error::Validation("site_to_logical must be a bijection".into()));
        }
        self.site_to_logical = map;
        Ok(())
    }

    /// Exchanges the logical labels of sites `left_site` and `left_site + 1`.
    /// Pair this with a SWAP gate on the same sites.
    pub fn swap_labels(&mut self, left_site: usize) -> Result<()> {
        self.check_bond(left_site)?;
        self.site_to_logical.swap(left_site, left_site + 1);
        Ok(())
    }

    pub fn norm_log(&self) -> f64 {
        self.norm_log
    }

    /// Dimensions of the `N − 1` interior bonds.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.len() - 1].iter().map(|t| t.right_dim()).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.len() {
            return Err(Error::IndexOutOfRange { index: site, len: self.len() });
        }
        Ok(())
    }

    fn check_bond(&self, left_site: usize) -> Result<()> {
        if left_site + 1 >= self.len() {
            return Err(Error::IndexOutOfRange { index: left_site, len: self.len() - 1 });
        }
        Ok(())
    }

    /// Establishes mixed canonical form with the center at `k`, regardless of
    /// the current gauge.
    pub fn canonicalize(&mut self, k: usize) -> Result<()> {
        self.check_site(k)?;
        for i in 0..k {
            self.shift_right(i);
        }
        for i in (k + 1..self.len()).rev() {
            self.shift_left(i);
        }
        self.center = Some(k);
        Ok(())
    }

    /// Moves an established orthogonality center to site `k`. The represented
    /// state is unchanged.
    pub fn move_center(&mut self, k: usize) -> Result<()> {
        self.check_site(k)?;
        let mut c = self
            .center
            .ok_or_else(|| Error::Precondition("no orthogonality center established".into()))?;
        while c < k {
            self.shift_right(c);
            c += 1;
        }
        while c > k {
            self.shift_left(c);
            c -= 1;
        }
        self.center = Some(k);
        Ok(())
    }

    /// Moves the center to `site`, establishing canonical form first if needed.
    pub(crate) fn focus(&mut self, site: usize) -> Result<()> {
        match self.center {
            Some(_) => self.move_center(site),
            None => self.canonicalize(site),
        }
    }

    /// Left-orthogonalizes site `i` and pushes the remainder into `i + 1`.
    fn shift_right(&mut self, i: usize) {
        let left = self.tensors[i].left_dim();
        let qr = self.tensors[i].left_matrix().qr();
        let (q, r) = (qr.q(), qr.r());
        self.tensors[i] = SiteTensor::from_left_matrix(&q, left);
        let next = &self.tensors[i + 1];
        let merged = r * next.right_matrix();
        self.tensors[i + 1] = SiteTensor::from_right_matrix(&merged, next.right_dim());
    }

    /// Right-orthogonalizes site `i` and pushes the remainder into `i - 1`.
    fn shift_left(&mut self, i: usize) {
        let right = self.tensors[i].right_dim();
        let qr = self.tensors[i].right_matrix().adjoint().qr();
        let (q, r) = (qr.q(), qr.r());
        self.tensors[i] = SiteTensor::from_right_matrix(&q.adjoint(), right);
        let prev = &self.tensors[i - 1];
        let merged = prev.left_matrix() * r.adjoint();
        self.tensors[i - 1] = SiteTensor::from_left_matrix(&merged, prev.left_dim());
    }

    /// Largest orthogonality residual over all non-center sites, or `None`
    /// if no center is established.
    pub fn canonical_residual(&self) -> Option<f64> {
        let c = self.center?;
        let left = self.tensors[..c].iter().map(|t| t.left_orthogonality_residual());
        let right = self.tensors[c + 1..].iter().map(|t| t.right_orthogonality_residual());
        Some(left.chain(right).fold(0.0, f64::max))
    }

    /// Multiplies the state by `factor`. The magnitude goes to `norm_log`.
    pub fn scale(&mut self, factor: C64) -> Result<()> {
        let mag = factor.norm();
        if mag == 0.0 || !mag.is_finite() {
            return Err(Error::Numerical(format!("cannot scale state by {factor}")));
        }
        self.norm_log += libm::log(mag);
        let phase = factor / mag;
        let site = self.center.unwrap_or(0);
        self.tensors[site].scale(phase);
        Ok(())
    }

    /// Squared norm of the tensor network alone, excluding `norm_log`.
    pub(crate) fn network_norm_sqr(&self) -> f64 {
        match self.center {
            Some(c) => self.tensors[c].norm_sqr(),
            None => self.contract_norm_sqr(),
        }
    }

    fn contract_norm_sqr(&self) -> f64 {
        let mut env = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for t in &self.tensors {
            env = observables::transfer(&env, t, [1.0, 1.0]);
        }
        env[(0, 0)].re
    }

    pub fn norm(&self) -> f64 {
        libm::exp(self.norm_log) * libm::sqrt(self.network_norm_sqr())
    }

    /// Rescales the state to unit norm and returns the norm it had before,
    /// including the accumulated `norm_log` factor.
    pub fn norm_and_renormalize(&mut self) -> Result<f64> {
        if self.center.is_none() {
            self.canonicalize(0)?;
        }
        let c = self.center.expect("center established above");
        let net = libm::sqrt(self.tensors[c].norm_sqr());
        if net == 0.0 || !net.is_finite() {
            return Err(Error::DegenerateState);
        }
        let norm = libm::exp(self.norm_log) * net;
        self.tensors[c].scale(C64::new(1.0 / net, 0.0));
        self.norm_log = 0.0;
        Ok(norm)
    }

    /// Folds the norm of the center tensor into `norm_log`.
    pub(crate) fn absorb_center_norm(&mut self) -> Result<()> {
        let c = self.center.expect("center required");
        let net = libm::sqrt(self.tensors[c].norm_sqr());
        if net == 0.0 {
            return Err(Error::DegenerateState);
        }
        if !net.is_finite() {
            return Err(Error::Numerical(format!("non-finite tensor at site {c}")));
        }
        self.tensors[c].scale(C64::new(1.0 / net, 0.0));
        self.norm_log += libm::log(net);
        Ok(())
    }

    /// Dense amplitudes in site order (site 0 is the most significant bit),
    /// including the `norm_log` factor.
    pub fn to_dense(&self) -> Result<Vec<C64>> {
        let n = self.len();
        if n > MAX_DENSE_QUBITS {
            return Err(Error::TooLarge { n, max: MAX_DENSE_QUBITS });
        }
        // acc[prefix * bond + a]
        let mut acc = vec![C64::new(libm::exp(self.norm_log), 0.0)];
        let mut bond = 1;
        for t in &self.tensors {
            let prefixes = acc.len() / bond;
            let r = t.right_dim();
            let mut next = vec![C64::new(0.0, 0.0); prefixes * 2 * r];
            for p in 0..prefixes {
                for a in 0..bond {
                    let coeff = acc[p * bond + a];
                    if coeff == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for s in 0..2 {
                        for b in 0..r {
                            next[(p * 2 + s) * r + b] += coeff * t.get(a, s, b);
                        }
                    }
                }
            }
            acc = next;
            bond = r;
        }
        Ok(acc)
    }

    /// Dense amplitudes indexed by logical qubits (logical qubit 0 is the
    /// most significant bit).
    pub fn to_dense_logical(&self) -> Result<Vec<C64>> {
        let n = self.len();
        let site_amps = self.to_dense()?;
        let mut out = vec![C64::new(0.0, 0.0); site_amps.len()];
        for (x, amp) in site_amps.into_iter().enumerate() {
            let mut y = 0usize;
            for site in 0..n {
                let bit = (x >> (n - 1 - site)) & 1;
                y |= bit << (n - 1 - self.site_to_logical[site]);
            }
            out[y] = amp;
        }
        Ok(out)
    }
}

pub(crate) fn checked_svd(
    m: DMatrix<C64>,
    context: &str,
) -> Result<nalgebra::SVD<C64, nalgebra::Dyn, nalgebra::Dyn>> {
    if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Numerical(format!("non-finite input to SVD ({context})")));
    }
    m.try_svd(true, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Numerical(format!("SVD did not converge ({context})")))
}
