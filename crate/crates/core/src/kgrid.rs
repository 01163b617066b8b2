use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform symmetric wavenumber grid `k_j = j dk`, `j = -half..=half`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub half: usize,
    pub dk: f64,
}

impl KGrid {
    pub fn new(k_max: f64, dk: f64) -> Result<Self> {
        if !(dk > 0.0 && k_max > 0.0) {
            return Err(Error::Config(alloc::format!(
                "wavenumber grid needs positive extent and spacing (K = {k_max}, dk = {dk})"
            )));
        }
        let ratio = k_max / dk;
        let half = libm::round(ratio);
        if (ratio - half).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Config(alloc::format!(
                "K = {k_max} is not a multiple of dk = {dk}"
            )));
        }
        Ok(Self {
            half: half as usize,
            dk,
        })
    }

    pub fn len(&self) -> usize {
        2 * self.half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn k_max(&self) -> f64 {
        self.half as f64 * self.dk
    }

    /// Wavenumber at storage index `i`.
    pub fn k(&self, i: usize) -> f64 {
        self.signed(i) as f64 * self.dk
    }

    /// Signed offset `j` of storage index `i`.
    pub fn signed(&self, i: usize) -> i64 {
        i as i64 - self.half as i64
    }

    /// Storage index of signed offset `j`, if on the grid.
    pub fn index(&self, j: i64) -> Option<usize> {
        let i = j + self.half as i64;
        if i >= 0 && (i as usize) < self.len() {
            Some(i as usize)
        } else {
            None
        }
    }

    /// Storage index of wavenumber `k`, if it lies on the grid.
    pub fn index_of(&self, k: f64) -> Option<usize> {
        let j = libm::round(k / self.dk);
        if (k - j * self.dk).abs() > 1e-9 * self.dk {
            return None;
        }
        self.index(j as i64)
    }

    pub fn mirror(&self, i: usize) -> usize {
        self.len() - 1 - i
    }

    pub fn wavenumbers(&self) -> alloc::vec::Vec<f64> {
        (0..self.len()).map(|i| self.k(i)).collect()
    }
}
