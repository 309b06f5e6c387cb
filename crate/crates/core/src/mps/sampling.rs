use alloc::borrow::Cow;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, RowDVector};
use rand::Rng;

use super::{MpsState, C64};
use crate::error::{Error, Result};

impl MpsState {
    /// Draws `count` bitstrings from `|ψ|²` by a left-to-right sweep of
    /// conditional probabilities over the right-canonical chain.
    ///
    /// Bitstrings are returned in logical order.
    pub fn perfect_sample<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        count: usize,
    ) -> Result<Vec<Vec<u8>>> {
        let norm = self.norm();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::Precondition(format!("cannot sample: state norm {norm} is not 1")));
        }
        let state: Cow<'_, MpsState> = if self.center == Some(0) {
            Cow::Borrowed(self)
        } else {
            let mut s = self.clone();
            s.focus(0)?;
            Cow::Owned(s)
        };
        let n = state.len();
        let slices: Vec<[DMatrix<C64>; 2]> =
            state.tensors.iter().map(|t| [t.slice(0), t.slice(1)]).collect();

        let mut samples = Vec::with_capacity(count);
        for _ in 0..count {
            let mut bits = vec![0u8; n];
            let mut v = RowDVector::from_element(1, C64::new(1.0, 0.0));
            for (site, pair) in slices.iter().enumerate() {
                let w0 = &v * &pair[0];
                let w1 = &v * &pair[1];
                let p0 = w0.norm_squared();
                let p1 = w1.norm_squared();
                let total = p0 + p1;
                if !(total > 0.0) {
                    return Err(Error::Numerical(format!(
                        "vanishing conditional probability at site {site}"
                    )));
                }
                let pick_one = rng.gen::<f64>() * total >= p0;
                let (w, p) = if pick_one { (w1, p1) } else { (w0, p0) };
                v = w / C64::new(libm::sqrt(p), 0.0);
                bits[state.site_to_logical[site]] = pick_one as u8;
            }
            samples.push(bits);
        }
        Ok(samples)
    }
}
