//! Scaled Schrödinger dynamics, the one-period propagator and its Floquet
//! spectrum.

mod floquet;
mod grid;
mod propagator;
mod wavefunction;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

pub use floquet::{
    circular_distance, floquet_decompose, fold_quasi_energy, orthonormality_defect, quasi_energy_from_eigenvalue,
    FloquetSpectrum, FloquetState, DEGENERACY_TOLERANCE, UNITARITY_TOLERANCE,
};
pub use grid::{SpatialGrid, DEFAULT_POINTS, DEFAULT_X_MAX};
pub use propagator::{
    build_blocks, build_propagator, check_momentum_tail, potential, GridWarning, ParityBasis, Potential,
    PropagatorBlocks, QuantumModel, SplitStepPropagator, TimeStepping, DEFAULT_SCHEME, DEFAULT_STEPS_PER_PERIOD,
    MOMENTUM_SAFETY, MOMENTUM_TAIL_LIMIT, P_MAX_OF_INTEREST,
};
pub use wavefunction::{Parity, WaveFunction};

use crate::error::Result;

/// Ψ(sT) reconstructed from Floquet coefficients.
pub fn floquet_evolve(
    coefficients: &[num_complex::Complex64],
    spectrum: &FloquetSpectrum,
    periods: u64,
) -> WaveFunction {
    spectrum.evolve(coefficients, periods)
}

/// Stroboscopic densities ρ(x, sT) for s = 0..=s_max, rows indexed by s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StroboscopicDensity {
    pub x: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    /// |‖ψ(sT)‖² − 1| per row.
    pub norm_drift: Vec<f64>,
}

/// Repeated one-period direct evolution of `psi0` with density snapshots.
pub fn stroboscopic_density(
    prop: &SplitStepPropagator,
    psi0: &WaveFunction,
    s_max: usize,
) -> Result<(StroboscopicDensity, WaveFunction)> {
    let mut psi = psi0.clone();
    let mut rows = vec![psi.density()];
    let mut norm_drift = vec![(psi.norm_sqr() - 1.0).abs()];
    for _ in 0..s_max {
        psi = prop.evolve(&psi, psi.t + TAU)?;
        rows.push(psi.density());
        norm_drift.push((psi.norm_sqr() - 1.0).abs());
    }
    Ok((
        StroboscopicDensity {
            x: psi0.grid.positions(),
            rows,
            norm_drift,
        },
        psi,
    ))
}

/// Builds the one-period propagator for `model` and diagonalizes it.
pub fn floquet_spectrum(
    model: QuantumModel,
    grid: SpatialGrid,
    stepping: TimeStepping,
) -> Result<(FloquetSpectrum, PropagatorBlocks)> {
    let prop = SplitStepPropagator::new(model, grid, stepping)?;
    let blocks = build_propagator(&prop)?;
    let spectrum = floquet_decompose(&blocks)?;
    Ok((spectrum, blocks))
}
