use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use super::C64;
use crate::error::{Error, Result};

/// Rank-3 site tensor with index order (left bond, physical, right bond).
///
/// Stored row-major, so the `(left·2 + s) × right` and `left × (s·right + r)`
/// matricizations are both plain reinterpretations of the same buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteTensor {
    left: usize,
    right: usize,
    data: Vec<C64>,
}

impl SiteTensor {
    pub fn zeros(left: usize, right: usize) -> Self {
        Self { left, right, data: vec![C64::new(0.0, 0.0); left * 2 * right] }
    }

    pub fn from_data(left: usize, right: usize, data: Vec<C64>) -> Result<Self> {
        if left == 0 || right == 0 {
            return Err(Error::InvalidSize { what: "bond dimension", value: 0 });
        }
        if data.len() != left * 2 * right {
            return Err(Error::Validation(alloc::format!(
                "tensor buffer has {} entries, expected {}",
                data.len(),
                left * 2 * right
            )));
        }
        Ok(Self { left, right, data })
    }

    pub fn left_dim(&self) -> usize {
        self.left
    }

    pub fn right_dim(&self) -> usize {
        self.right
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    fn idx(&self, l: usize, s: usize, r: usize) -> usize {
        (l * 2 + s) * self.right + r
    }

    #[inline]
    pub fn get(&self, l: usize, s: usize, r: usize) -> C64 {
        self.data[self.idx(l, s, r)]
    }

    #[inline]
    pub fn set(&mut self, l: usize, s: usize, r: usize, value: C64) {
        let i = self.idx(l, s, r);
        self.data[i] = value;
    }

    /// `(left·2) × right` matricization.
    pub(crate) fn left_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(2 * self.left, self.right, &self.data)
    }

    /// `left × (2·right)` matricization.
    pub(crate) fn right_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.left, 2 * self.right, &self.data)
    }

    pub(crate) fn from_left_matrix(m: &DMatrix<C64>, left: usize) -> Self {
        debug_assert_eq!(m.nrows(), 2 * left);
        Self { left, right: m.ncols(), data: row_major(m) }
    }

    pub(crate) fn from_right_matrix(m: &DMatrix<C64>, right: usize) -> Self {
        debug_assert_eq!(m.ncols(), 2 * right);
        Self { left: m.nrows(), right, data: row_major(m) }
    }

    /// The `left × right` matrix selected by physical index `s`.
    pub(crate) fn slice(&self, s: usize) -> DMatrix<C64> {
        DMatrix::from_fn(self.left, self.right, |l, r| self.get(l, s, r))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    pub(crate) fn scale(&mut self, factor: C64) {
        for c in &mut self.data {
            *c *= factor;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Frobenius norm of `Σ_s A_s† A_s − 𝟙`.
    pub fn left_orthogonality_residual(&self) -> f64 {
        let m = self.left_matrix();
        let gram = m.adjoint() * m;
        identity_residual(&gram)
    }

    /// Frobenius norm of `Σ_s A_s A_s† − 𝟙`.
    pub fn right_orthogonality_residual(&self) -> f64 {
        let m = self.right_matrix();
        let gram = &m * m.adjoint();
        identity_residual(&gram)
    }
}

fn identity_residual(gram: &DMatrix<C64>) -> f64 {
    let mut acc = 0.0;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            acc += (gram[(i, j)] - C64::new(target, 0.0)).norm_sqr();
        }
    }
    libm::sqrt(acc)
}

pub(crate) fn row_major(m: &DMatrix<C64>) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}
