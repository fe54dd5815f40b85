//! Floquet states and quasi-energies from the one-period propagator.
//!
//! Each parity block is brought to complex Schur form U = Q T Q†. For a
//! unitary (hence normal) block T is diagonal up to rounding, so the columns
//! of Q are an orthonormal eigenbasis and diag(T) are the eigenvalues ξ_n.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::SpatialGrid;
use super::propagator::{ParityBasis, PropagatorBlocks};
use super::wavefunction::{Parity, WaveFunction};
use crate::error::{Error, Result};

/// Largest tolerated deviation of |ξ_n| from one.
pub const UNITARITY_TOLERANCE: f64 = 1e-6;
/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloquetState {
    /// Folded quasi-energy in [−ħ_eff/2, ħ_eff/2).
    pub quasi_energy: f64,
    pub parity: Parity,
    /// |ξ_n|.
    pub modulus: f64,
    /// Φ_n(t = 0).
    pub state: WaveFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloquetSpectrum {
    /// Sorted by increasing quasi-energy.
    pub states: Vec<FloquetState>,
    pub hbar_eff: f64,
    pub period: f64,
    pub grid: SpatialGrid,
    /// Largest off-diagonal Schur entry over both blocks.
    pub schur_residual: f64,
}

/// Folds a quasi-energy into [−ħ/2, ħ/2).
pub fn fold_quasi_energy(e: f64, hbar_eff: f64) -> f64 {
    let width = hbar_eff;
    let shifted = (e + 0.5 * width).rem_euclid(width);
    let folded = shifted - 0.5 * width;
    if folded >= 0.5 * width {
        -0.5 * width
    } else {
        folded
    }
}

/// Shortest distance between two quasi-energies on the circle of
/// circumference ħ_eff.
pub fn circular_distance(a: f64, b: f64, hbar_eff: f64) -> f64 {
    // |a − b| is exactly symmetric in a, b; a signed difference is not after rem_euclid.
    let d = (a - b).abs().rem_euclid(hbar_eff);
    d.min(hbar_eff - d)
}

/// E = −(ħ/T) arg ξ, folded.
pub fn quasi_energy_from_eigenvalue(xi: Complex64, hbar_eff: f64, period: f64) -> f64 {
    fold_quasi_energy(-hbar_eff / period * xi.arg(), hbar_eff)
}

impl FloquetSpectrum {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn quasi_energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.quasi_energy).collect()
    }

    pub fn parities(&self) -> Vec<Parity> {
        self.states.iter().map(|s| s.parity).collect()
    }

    pub fn eigenvalue_moduli(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.modulus).collect()
    }

    pub fn indices_of(&self, parity: Parity) -> impl Iterator<Item = usize> + '_ {
        self.states
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.parity == parity)
            .map(|(i, _)| i)
    }

    /// c_n = ⟨Φ_n(0)|ψ⟩.
    pub fn coefficients(&self, psi: &WaveFunction) -> Vec<Complex64> {
        self.states.iter().map(|s| s.state.inner(psi)).collect()
    }

    /// Ψ(sT) = Σ c_n exp(−i E_n s T/ħ) Φ_n(0).
    pub fn evolve(&self, coefficients: &[Complex64], periods: u64) -> WaveFunction {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.grid.n];
        for (c, st) in coefficients.iter().zip(&self.states) {
            let phase = Complex64::from_polar(1.0, -st.quasi_energy * (periods as f64 * self.period) / self.hbar_eff);
            let w = c * phase;
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (a, phi) in amplitudes.iter_mut().zip(&st.state.amplitudes) {
                *a += w * phi;
            }
        }
        WaveFunction::new(self.grid, amplitudes, periods as f64 * self.period)
    }
}

/// Diagonalizes both parity blocks.
pub fn floquet_decompose(blocks: &PropagatorBlocks) -> Result<FloquetSpectrum> {
    let basis = ParityBasis::new(blocks.grid);
    let inv_sqrt_dx = 1.0 / blocks.grid.dx().sqrt();
    let mut states = Vec::with_capacity(blocks.grid.n);
    let mut schur_residual = 0.0f64;
    let period = if blocks.duration > 0.0 { blocks.duration } else { TAU };
    for parity in [Parity::Even, Parity::Odd] {
        let u = blocks.block(parity);
        let (eigenvalues, vectors, off) = unitary_eigen(u, parity)?;
        schur_residual = schur_residual.max(off);
        for (xi, v) in eigenvalues.into_iter().zip(vectors) {
            let deviation = (xi.norm() - 1.0).abs();
            if deviation > UNITARITY_TOLERANCE {
                return Err(Error::NotUnitary { deviation });
            }
            let mut amplitudes = basis.embed(parity, &v);
            amplitudes.iter_mut().for_each(|z| *z *= inv_sqrt_dx);
            let mut state = WaveFunction::new(blocks.grid, amplitudes, 0.0);
            state.normalize();
            state.fix_phase();
            states.push(FloquetState {
                quasi_energy: quasi_energy_from_eigenvalue(xi, blocks.hbar_eff, period),
                parity,
                modulus: xi.norm(),
                state,
            });
        }
    }
    states.sort_by(|a, b| {
        a.quasi_energy
            .total_cmp(&b.quasi_energy)
            .then((a.parity as u8).cmp(&(b.parity as u8)))
    });
    Ok(FloquetSpectrum {
        states,
        hbar_eff: blocks.hbar_eff,
        period,
        grid: blocks.grid,
        schur_residual,
    })
}

type Eigenpairs = (Vec<Complex64>, Vec<Vec<Complex64>>, f64);

fn unitary_eigen(u: &DMatrix<Complex64>, parity: Parity) -> Result<Eigenpairs> {
    let n = u.nrows();
    if n == 0 {
        return Ok((Vec::new(), Vec::new(), 0.0));
    }
    let schur = u
        .clone()
        .try_schur(f64::EPSILON, 100 * n)
        .ok_or(Error::Eigensolver(parity.as_str()))?;
    let (q, t) = schur.unpack();
    let mut off = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            off = off.max(t[(i, j)].norm());
        }
    }
    let eigenvalues: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let mut vectors: Vec<Vec<Complex64>> = (0..n).map(|j| q.column(j).iter().copied().collect()).collect();
    reorthonormalize_clusters(&eigenvalues, &mut vectors);
    Ok((eigenvalues, vectors, off))
}

/// Modified Gram–Schmidt inside clusters of (near-)degenerate eigenvalues.
fn reorthonormalize_clusters(eigenvalues: &[Complex64], vectors: &mut [Vec<Complex64>]) {
    let n = eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[a].arg().total_cmp(&eigenvalues[b].arg()));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (eigenvalues[order[end]] - eigenvalues[order[end - 1]]).norm() < DEGENERACY_TOLERANCE {
            end += 1;
        }
        if end - start > 1 {
            let members: Vec<usize> = order[start..end].to_vec();
            for (a, &i) in members.iter().enumerate() {
                for &j in &members[..a] {
                    let proj: Complex64 = vectors[j].iter().zip(&vectors[i]).map(|(x, y)| x.conj() * y).sum();
                    let vj = vectors[j].clone();
                    vectors[i].iter_mut().zip(&vj).for_each(|(y, x)| *y -= proj * x);
                }
                let norm = vectors[i].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                vectors[i].iter_mut().for_each(|z| *z /= norm);
            }
        }
        start = end;
    }
}

/// Largest |⟨Φ_i|Φ_j⟩| for i ≠ j within each parity block.
pub fn orthonormality_defect(spectrum: &FloquetSpectrum) -> f64 {
    let mut worst = 0.0f64;
    for parity in [Parity::Even, Parity::Odd] {
        let idx: Vec<usize> = spectrum.indices_of(parity).collect();
        for (a, &i) in idx.iter().enumerate() {
            let si = &spectrum.states[i].state;
            worst = worst.max((si.norm_sqr() - 1.0).abs());
            for &j in &idx[..a] {
                worst = worst.max(si.inner(&spectrum.states[j].state).norm());
            }
        }
    }
    worst
}
