use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::grid::SpatialGrid;
use crate::error::{Error, Result};

/// Complex amplitudes on a [`SpatialGrid`] at scaled time `t`, normalized so
/// that Σ|ψ|² dx = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFunction {
    pub grid: SpatialGrid,
    pub amplitudes: Vec<Complex64>,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl WaveFunction {
    pub fn new(grid: SpatialGrid, amplitudes: Vec<Complex64>, t: f64) -> Self {
        assert_eq!(grid.n, amplitudes.len(), "amplitude count must match grid");
        Self { grid, amplitudes, t }
    }

    /// Builds ψ(x_k) = f(x_k) and normalizes.
    pub fn from_fn(grid: SpatialGrid, t: f64, f: impl Fn(f64) -> Complex64) -> Self {
        let amplitudes = (0..grid.n).map(|k| f(grid.x(k))).collect();
        let mut psi = Self::new(grid, amplitudes, t);
        psi.normalize();
        psi
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalize(&mut self) {
        let s = self.norm_sqr().sqrt();
        if s > 0.0 {
            let inv = 1.0 / s;
            self.amplitudes.iter_mut().for_each(|z| *z *= inv);
        }
    }

    /// ⟨self|other⟩ = Σ conj(ψ) φ dx.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        debug_assert_eq!(self.grid, other.grid);
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dx()
    }

    pub fn check_grid(&self, other: &WaveFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn mean_position(&self) -> f64 {
        let dx = self.grid.dx();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(k, z)| z.norm_sqr() * self.grid.x(k))
            .sum::<f64>()
            * dx
    }

    pub fn position_variance(&self) -> f64 {
        let dx = self.grid.dx();
        let mean = self.mean_position();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(k, z)| z.norm_sqr() * (self.grid.x(k) - mean).powi(2))
            .sum::<f64>()
            * dx
    }

    /// Probability on x > 0 plus half the weight of the centre point.
    pub fn right_weight(&self) -> f64 {
        let dx = self.grid.dx();
        let c = self.grid.center();
        let right: f64 = self.amplitudes[c + 1..].iter().map(|z| z.norm_sqr()).sum();
        (right + 0.5 * self.amplitudes[c].norm_sqr()) * dx
    }

    /// The state reflected through x = 0.
    pub fn mirrored(&self) -> WaveFunction {
        let amplitudes = (0..self.grid.n).map(|k| self.amplitudes[self.grid.mirror(k)]).collect();
        WaveFunction::new(self.grid, amplitudes, self.t)
    }

    /// ⟨ψ|P̂|ψ⟩.
    pub fn parity_expectation(&self) -> Complex64 {
        self.inner(&self.mirrored())
    }

    /// Bin momenta p_j = ħ_eff k_j and the momentum-space probability of each
    /// FFT bin (summing to one), in that order.
    pub fn momentum_distribution(&self, hbar_eff: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.n;
        let mut buf = self.amplitudes.clone();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let total: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
        let probs = buf.iter().map(|z| z.norm_sqr() / total).collect();
        let momenta = (0..n).map(|j| hbar_eff * self.grid.wavenumber(j)).collect();
        (momenta, probs)
    }

    pub fn mean_momentum(&self, hbar_eff: f64) -> f64 {
        let (p, w) = self.momentum_distribution(hbar_eff);
        p.iter().zip(&w).map(|(p, w)| p * w).sum()
    }

    /// Multiplies by a unit phase so the largest-magnitude amplitude on the
    /// x ≥ 0 half is real and positive.
    pub fn fix_phase(&mut self) {
        let c = self.grid.center();
        let mut best = c;
        let mut best_mag = -1.0;
        for k in c..self.grid.n {
            let m = self.amplitudes[k].norm_sqr();
            // strict comparison against a relative margin keeps the choice
            // stable under rounding-level perturbations
            if m > best_mag * (1.0 + 1e-9) {
                best = k;
                best_mag = m;
            }
        }
        let z = self.amplitudes[best];
        if z.norm() > 0.0 {
            let phase = z.conj() / z.norm();
            self.amplitudes.iter_mut().for_each(|a| *a *= phase);
        }
    }

    /// Fraction of the norm in the outer `fraction` of the momentum grid.
    pub fn momentum_tail(&self, fraction: f64) -> f64 {
        let n = self.grid.n;
        let kmax = self.grid.wavenumber(n / 2).abs();
        let limit = (1.0 - fraction) * kmax;
        let (_, probs) = self.momentum_distribution(1.0);
        (0..n)
            .filter(|&j| self.grid.wavenumber(j).abs() > limit)
            .map(|j| probs[j])
            .sum()
    }
}
