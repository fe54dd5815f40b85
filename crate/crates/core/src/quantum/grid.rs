use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on [−x_max, x_max) with `n` points.
///
/// Index `n/2` is x = 0. Parity acts as k ↦ (n − k) mod n, which leaves the
/// centre and the edge point k = 0 fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub n: usize,
    pub x_max: f64,
}

pub const DEFAULT_POINTS: usize = 1024;
/// Half-extent. At κ = 1.2, ε = 0.9, ħ_eff = 0.5 the even island state
/// still feels the wall at 8; from 12 on its splitting is box-independent.
pub const DEFAULT_X_MAX: f64 = 12.0;

impl Default for SpatialGrid {
    fn default() -> Self {
        Self {
            n: DEFAULT_POINTS,
            x_max: DEFAULT_X_MAX,
        }
    }
}

impl SpatialGrid {
    pub fn new(n: usize, x_max: f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: format!("must be a power of two >= 2, got {n}"),
            });
        }
        if !(x_max.is_finite() && x_max > 0.0) {
            return Err(Error::InvalidParameter {
                name: "x_max",
                reason: format!("must be finite and > 0, got {x_max}"),
            });
        }
        Ok(Self { n, x_max })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.x_max / self.n as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.x(k)).collect()
    }

    pub fn center(&self) -> usize {
        self.n / 2
    }

    pub fn mirror(&self, k: usize) -> usize {
        (self.n - k) % self.n
    }

    /// Wavenumber of FFT bin `j` (unnormalized forward transform ordering).
    pub fn wavenumber(&self, j: usize) -> f64 {
        let n = self.n as i64;
        let j = j as i64;
        let signed = if j < n / 2 { j } else { j - n };
        2.0 * PI * signed as f64 / (n as f64 * self.dx())
    }

    /// Largest representable |p| = π ħ_eff / dx.
    pub fn momentum_cutoff(&self, hbar_eff: f64) -> f64 {
        PI * hbar_eff / self.dx()
    }

    /// Whether the cutoff exceeds `p_max` by `safety`.
    pub fn resolves_momentum(&self, hbar_eff: f64, p_max: f64, safety: f64) -> bool {
        self.momentum_cutoff(hbar_eff) >= safety * p_max
    }
}
