//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use dyntun::quantum::{circular_distance, fold_quasi_energy, FloquetSpectrum, Parity, SpatialGrid};
use nalgebra::{DMatrix, SymmetricEigen};

/// Eigenpairs of the static H = p²/2 + κx²/2 + κx⁴/4 discretized on `grid`
/// with the spectral (FFT) kinetic matrix, by dense symmetric diagonalization.
pub struct StaticSpectrum {
    /// Ascending energies.
    pub energies: Vec<f64>,
    pub parities: Vec<Parity>,
    /// ℓ²-normalized eigenvectors on the grid, one per energy.
    pub vectors: Vec<Vec<f64>>,
}

pub fn static_spectrum(kappa: f64, hbar_eff: f64, grid: SpatialGrid) -> StaticSpectrum {
    static_spectrum_of(kappa, kappa, hbar_eff, grid)
}

/// Same oracle for V = a₂x²/2 + a₄x⁴/4.
pub fn static_spectrum_of(quadratic: f64, quartic: f64, hbar_eff: f64, grid: SpatialGrid) -> StaticSpectrum {
    let n = grid.n;
    let dx = grid.dx();
    // T_jk = (1/n) Σ_m ħ²k_m²/2 cos(k_m (j − k) dx) depends on j − k only
    let kinetic: Vec<f64> = (0..n)
        .map(|d| {
            (0..n)
                .map(|m| {
                    let k = grid.wavenumber(m);
                    0.5 * hbar_eff * hbar_eff * k * k * (k * d as f64 * dx).cos()
                })
                .sum::<f64>()
                / n as f64
        })
        .collect();
    let h = DMatrix::from_fn(n, n, |j, k| {
        let mut v = kinetic[j.abs_diff(k)];
        if j == k {
            let x = grid.x(j);
            v += 0.5 * quadratic * x * x + 0.25 * quartic * x.powi(4);
        }
        v
    });
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let parities = order
        .iter()
        .map(|&i| {
            let v = eig.eigenvectors.column(i);
            let overlap: f64 = (0..n).map(|k| v[k] * v[grid.mirror(k)]).sum();
            if overlap > 0.0 {
                Parity::Even
            } else {
                Parity::Odd
            }
        })
        .collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    StaticSpectrum {
        energies,
        parities,
        vectors,
    }
}

/// Largest circular distance between each of the lowest `count` static levels
/// (folded mod ħ) and the nearest Floquet quasi-energy of the same parity.
pub fn folded_mismatch(
    oracle: &StaticSpectrum,
    quasi: &[f64],
    parities: &[Parity],
    hbar_eff: f64,
    count: usize,
) -> f64 {
    oracle.energies[..count]
        .iter()
        .zip(&oracle.parities)
        .map(|(&e, &par)| {
            let f = fold_quasi_energy(e, hbar_eff);
            quasi
                .iter()
                .zip(parities)
                .filter(|(_, p)| **p == par)
                .map(|(&q, _)| dyntun::quantum::circular_distance(q, f, hbar_eff))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// For each of the lowest `count` oracle levels, the same-parity Floquet
/// quasi-energy closest to it on the folded branch.
pub fn matched_levels(oracle: &StaticSpectrum, spectrum: &FloquetSpectrum, count: usize) -> Vec<f64> {
    let h = spectrum.hbar_eff;
    oracle.energies[..count]
        .iter()
        .zip(&oracle.parities)
        .map(|(&e, &par)| {
            let f = fold_quasi_energy(e, h);
            spectrum
                .states
                .iter()
                .filter(|s| s.parity == par)
                .map(|s| s.quasi_energy)
                .min_by(|a, b| circular_distance(*a, f, h).total_cmp(&circular_distance(*b, f, h)))
                .unwrap()
        })
        .collect()
}

use dyntun::params::{Constraint, HeffSweep, PhysicalParams, SweepAxis, SweepParam};
use std::f64::consts::TAU;

/// First worked set: m = 50 pg, ω_m/2π = 100 kHz, g4/2π = 0.4 Hz nm⁻⁴,
/// λ = 1064 nm, P0 = 5 µW, γ_c = 10 ω_m, Ω = ω_m/√1.2 (κ = 1.2).
pub fn worked_set_small() -> PhysicalParams {
    let omega_m = TAU * 1e5;
    PhysicalParams {
        m: 50e-15,
        omega_m,
        g4: TAU * 0.4e36,
        lambda_l: 1064e-9,
        p0: 5e-6,
        pa: 0.0,
        gamma_c: 10.0 * omega_m,
        omega: omega_m / 1.2f64.sqrt(),
        delta_c: 0.0,
    }
}

/// Second worked set: m = 1 pg, ω_m/2π = 10 kHz, g4/2π = 1 kHz nm⁻⁴,
/// P0 = 0.5 mW, γ_c = 10 ω_m, κ = 1.2.
pub fn worked_set_large() -> PhysicalParams {
    let omega_m = TAU * 1e4;
    PhysicalParams {
        m: 1e-15,
        omega_m,
        g4: TAU * 1e39,
        lambda_l: 1064e-9,
        p0: 5e-4,
        pa: 0.0,
        gamma_c: 10.0 * omega_m,
        omega: omega_m / 1.2f64.sqrt(),
        delta_c: 0.0,
    }
}

/// Slice of the (P0, ω_m) tunability map at ω_m/2π = 10 kHz with γ_c = 10 ω_m
/// and κ = 1.2: P0 from 12 µW to 1.2 mW.
pub fn tunability_slice(count: usize) -> HeffSweep {
    HeffSweep {
        axis1: SweepAxis {
            param: SweepParam::P0,
            start: 12e-6,
            end: 1.2e-3,
            count,
            log: true,
        },
        axis2: SweepAxis {
            param: SweepParam::OmegaM,
            start: TAU * 1e4,
            end: TAU * 1e4,
            count: 1,
            log: false,
        },
        base: worked_set_large(),
        constraints: vec![
            Constraint::GammaRatio { ratio: 10.0 },
            Constraint::FixedKappa { kappa: 1.2 },
        ],
    }
}

/// Relative deviation |a − b| / |b|.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
