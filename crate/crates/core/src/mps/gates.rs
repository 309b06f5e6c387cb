use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{checked_svd, MpsState, SiteTensor, C64};
use crate::error::{Error, Result};

/// Bond truncation rule applied after every two-site gate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    chi_max: usize,
    sv_cutoff: f64,
}

impl TruncationPolicy {
    pub const DEFAULT_CUTOFF: f64 = 1e-12;

    pub fn new(chi_max: usize, sv_cutoff: f64) -> Result<Self> {
        if chi_max == 0 {
            return Err(Error::Config("chi_max must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&sv_cutoff) {
            return Err(Error::Config(format!("sv_cutoff {sv_cutoff} outside [0, 1)")));
        }
        Ok(Self { chi_max, sv_cutoff })
    }

    pub fn with_chi(chi_max: usize) -> Result<Self> {
        Self::new(chi_max, Self::DEFAULT_CUTOFF)
    }

    /// No bond limit and no cutoff.
    pub fn exact() -> Self {
        Self { chi_max: usize::MAX, sv_cutoff: 0.0 }
    }

    pub fn chi_max(&self) -> usize {
        self.chi_max
    }

    pub fn sv_cutoff(&self) -> f64 {
        self.sv_cutoff
    }

    /// Number of leading values of a descending spectrum to keep.
    pub(crate) fn keep_count(&self, singular_values: &[f64]) -> usize {
        let s_max = singular_values.first().copied().unwrap_or(0.0);
        let threshold = self.sv_cutoff * s_max;
        singular_values
            .iter()
            .take(self.chi_max)
            .take_while(|&&s| s > threshold)
            .count()
            .max(1)
    }
}

/// 4×4 gate on an ordered pair of adjacent sites. Rows and columns are
/// indexed by `2·s_left + s_right`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSiteGate {
    matrix: [[C64; 4]; 4],
    unitary_hint: bool,
}

impl TwoSiteGate {
    pub fn new(matrix: [[C64; 4]; 4], unitary_hint: bool) -> Result<Self> {
        if matrix.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Numerical("gate matrix has non-finite entries".into()));
        }
        if unitary_hint {
            let mut dev = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..4 {
                        acc += matrix[k][i].conj() * matrix[k][j];
                    }
                    let target = if i == j { 1.0 } else { 0.0 };
                    dev += (acc - C64::new(target, 0.0)).norm_sqr();
                }
            }
            if libm::sqrt(dev) > 1e-12 {
                return Err(Error::Validation("gate flagged unitary but G†G ≠ 1".into()));
            }
        }
        Ok(Self { matrix, unitary_hint })
    }

    pub fn identity() -> Self {
        Self::diagonal_unchecked([C64::new(1.0, 0.0); 4], true)
    }

    pub fn swap() -> Self {
        let o = C64::new(1.0, 0.0);
        let z = C64::new(0.0, 0.0);
        Self {
            matrix: [[o, z, z, z], [z, z, o, z], [z, o, z, z], [z, z, z, o]],
            unitary_hint: true,
        }
    }

    pub fn diagonal(entries: [C64; 4]) -> Result<Self> {
        Self::new(Self::diagonal_unchecked(entries, false).matrix, false)
    }

    fn diagonal_unchecked(entries: [C64; 4], unitary_hint: bool) -> Self {
        let mut matrix = [[C64::new(0.0, 0.0); 4]; 4];
        for (i, e) in entries.into_iter().enumerate() {
            matrix[i][i] = e;
        }
        Self { matrix, unitary_hint }
    }

    /// `exp(−weight · Z⊗Z)`.
    pub fn zz_decay(weight: f64) -> Result<Self> {
        let d = |zz: f64| C64::new(libm::exp(-weight * zz), 0.0);
        Self::diagonal([d(1.0), d(-1.0), d(-1.0), d(1.0)])
    }

    /// `SWAP · self`.
    pub fn followed_by_swap(&self) -> Self {
        let mut matrix = self.matrix;
        matrix.swap(1, 2);
        Self { matrix, unitary_hint: self.unitary_hint }
    }

    pub fn matrix(&self) -> &[[C64; 4]; 4] {
        &self.matrix
    }

    pub fn is_unitary_hint(&self) -> bool {
        self.unitary_hint
    }
}

/// 2×2 single-qubit gate, row-major.
pub type SingleSiteGate = [[C64; 2]; 2];

pub fn hadamard() -> SingleSiteGate {
    let h = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

/// `exp(−weight · Z)`.
pub fn z_decay(weight: f64) -> SingleSiteGate {
    let z = C64::new(0.0, 0.0);
    [[C64::new(libm::exp(-weight), 0.0), z], [z, C64::new(libm::exp(weight), 0.0)]]
}

/// Result of a two-site gate application.
#[derive(Clone, Debug, PartialEq)]
pub struct GateOutcome {
    /// Discarded squared singular values over the total.
    pub discarded_weight: f64,
    /// Retained singular values, before the norm is folded into `norm_log`.
    pub kept_singular_values: Vec<f64>,
}

impl MpsState {
    /// Contracts `gate` onto sites `(left_site, left_site + 1)` and restores
    /// canonical form with one truncated SVD.
    ///
    /// The center must sit on one of the two sites and ends up on
    /// `left_site`.
    pub fn apply_two_site_gate(
        &mut self,
        left_site: usize,
        gate: &TwoSiteGate,
        policy: &TruncationPolicy,
    ) -> Result<GateOutcome> {
        self.check_bond(left_site)?;
        match self.center {
            Some(c) if c == left_site || c == left_site + 1 => {}
            other => {
                return Err(Error::Precondition(format!(
                    "two-site gate on ({left_site}, {}) needs the center there, found {other:?}",
                    left_site + 1
                )))
            }
        }
        let a = &self.tensors[left_site];
        let b = &self.tensors[left_site + 1];
        let (l, r) = (a.left_dim(), b.right_dim());
        // rows (l, s1), cols (s2, r)
        let theta = a.left_matrix() * b.right_matrix();
        let g = &gate.matrix;
        let mut out = theta.clone();
        for li in 0..l {
            for ri in 0..r {
                let v = [
                    theta[(li * 2, ri)],
                    theta[(li * 2, r + ri)],
                    theta[(li * 2 + 1, ri)],
                    theta[(li * 2 + 1, r + ri)],
                ];
                for (row, g_row) in g.iter().enumerate() {
                    let w = g_row[0] * v[0] + g_row[1] * v[1] + g_row[2] * v[2] + g_row[3] * v[3];
                    let (s1, s2) = (row >> 1, row & 1);
                    out[(li * 2 + s1, s2 * r + ri)] = w;
                }
            }
        }

        let svd = checked_svd(out, &format!("two-site gate at site {left_site}"))?;
        let s: Vec<f64> = svd.singular_values.iter().copied().collect();
        let total: f64 = s.iter().map(|x| x * x).sum();
        if total == 0.0 {
            return Err(Error::DegenerateState);
        }
        let keep = policy.keep_count(&s);
        let kept_sq: f64 = s[..keep].iter().map(|x| x * x).sum();
        let discarded_weight = ((total - kept_sq) / total).max(0.0);
        let kept_norm = libm::sqrt(kept_sq);

        let u = svd.u.as_ref().expect("u requested");
        let v_t = svd.v_t.as_ref().expect("v_t requested");
        let mut left_m = u.columns(0, keep).into_owned();
        for (j, mut col) in left_m.column_iter_mut().enumerate() {
            col *= C64::new(s[j] / kept_norm, 0.0);
        }
        let right_m = v_t.rows(0, keep).into_owned();
        let new_left = SiteTensor::from_left_matrix(&left_m, l);
        let new_right = SiteTensor::from_right_matrix(&right_m, r);
        if !new_left.is_finite() || !new_right.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite tensors after gate at site {left_site}"
            )));
        }
        self.tensors[left_site] = new_left;
        self.tensors[left_site + 1] = new_right;
        self.norm_log += libm::log(kept_norm);
        self.center = Some(left_site);
        Ok(GateOutcome { discarded_weight, kept_singular_values: s[..keep].to_vec() })
    }

    /// Contracts a 2×2 gate onto `site`. The center is moved to `site` first
    /// and stays there.
    pub fn apply_single_site_gate(&mut self, site: usize, gate: &SingleSiteGate) -> Result<()> {
        self.check_site(site)?;
        self.focus(site)?;
        let t = &self.tensors[site];
        let mut next = SiteTensor::zeros(t.left_dim(), t.right_dim());
        for l in 0..t.left_dim() {
            for r in 0..t.right_dim() {
                let (v0, v1) = (t.get(l, 0, r), t.get(l, 1, r));
                next.set(l, 0, r, gate[0][0] * v0 + gate[0][1] * v1);
                next.set(l, 1, r, gate[1][0] * v0 + gate[1][1] * v1);
            }
        }
        self.tensors[site] = next;
        self.absorb_center_norm()
    }
}
