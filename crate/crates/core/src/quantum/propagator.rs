//! Split-step spectral propagation of
//!
//! ```text
//! i ħ ∂ψ/∂t = [−ħ²/2 ∂²/∂x² + a₂ x²/2 + a₄ (1 + m cos t) x⁴/4] ψ
//! ```
//!
//! Each Strang substep applies half a potential kick sampled at the substep
//! midpoint, a full kinetic step in the Fourier representation and the other
//! half kick. Substeps are composed according to a [`Scheme`]; adjacent kicks
//! are merged into a single phase multiplication.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::grid::SpatialGrid;
use super::wavefunction::{Parity, WaveFunction};
use crate::error::{Error, Result};
use crate::splitting::Scheme;

/// Default number of time steps per drive period.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 1024;
/// Default composition for quantum propagation.
pub const DEFAULT_SCHEME: Scheme = Scheme::Yoshida6;

fn default_scheme() -> Scheme {
    DEFAULT_SCHEME
}

/// V(x, t) = a₂ x²/2 + a₄ (1 + m cos t) x⁴/4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub quadratic: f64,
    pub quartic: f64,
    pub modulation: f64,
}

impl Potential {
    /// The driven quartic oscillator: a₂ = a₄ = κ, m = ε.
    pub fn driven(kappa: f64, epsilon: f64) -> Self {
        Self {
            quadratic: kappa,
            quartic: kappa,
            modulation: epsilon,
        }
    }

    pub fn harmonic(quadratic: f64) -> Self {
        Self {
            quadratic,
            quartic: 0.0,
            modulation: 0.0,
        }
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        let x2 = x * x;
        0.5 * self.quadratic * x2 + 0.25 * self.quartic * (1.0 + self.modulation * t.cos()) * x2 * x2
    }
}

/// Scalar form of [`Potential::value`].
pub fn potential(x: f64, t: f64, kappa: f64, epsilon: f64) -> f64 {
    Potential::driven(kappa, epsilon).value(x, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumModel {
    pub potential: Potential,
    pub hbar_eff: f64,
}

impl QuantumModel {
    pub fn driven(kappa: f64, epsilon: f64, hbar_eff: f64) -> Self {
        Self {
            potential: Potential::driven(kappa, epsilon),
            hbar_eff,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeStepping {
    pub steps_per_period: usize,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
}

impl Default for TimeStepping {
    fn default() -> Self {
        Self {
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            scheme: DEFAULT_SCHEME,
        }
    }
}

impl TimeStepping {
    pub fn dt(&self) -> f64 {
        TAU / self.steps_per_period as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridWarning {
    /// Norm fraction in the outer 10% of the momentum grid.
    MomentumTail { fraction: f64 },
    /// Momentum cutoff below the safety margin over the momenta of interest.
    MomentumCutoff { cutoff: f64, required: f64 },
}

impl std::fmt::Display for GridWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GridWarning::MomentumTail { fraction } => {
                write!(
                    f,
                    "grid too small: {fraction:.3e} of the norm in the outer momentum band"
                )
            }
            GridWarning::MomentumCutoff { cutoff, required } => {
                write!(
                    f,
                    "grid too small: momentum cutoff {cutoff:.3} < required {required:.3}"
                )
            }
        }
    }
}

/// Momentum-tail fraction above which [`GridWarning::MomentumTail`] is raised.
pub const MOMENTUM_TAIL_LIMIT: f64 = 1e-6;

pub fn check_momentum_tail(psi: &WaveFunction) -> Option<GridWarning> {
    let fraction = psi.momentum_tail(0.1);
    (fraction >= MOMENTUM_TAIL_LIMIT).then_some(GridWarning::MomentumTail { fraction })
}

#[derive(Debug, Clone, Copy)]
enum Op {
    /// Potential phase exp(−i (a x²/2 + b x⁴/4)/ħ).
    Kick { a: f64, b: f64 },
    /// Kinetic step with the given substep weight index.
    Drift(usize),
}

pub struct SplitStepPropagator {
    model: QuantumModel,
    grid: SpatialGrid,
    stepping: TimeStepping,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    weights: Vec<f64>,
    /// Per substep weight, exp(−i w dt ħ k²/2) / n.
    kinetic: Vec<Vec<Complex64>>,
    half_x2: Vec<f64>,
    quarter_x4: Vec<f64>,
}

impl std::fmt::Debug for SplitStepPropagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SplitStepPropagator")
            .field("model", &self.model)
            .field("grid", &self.grid)
            .field("stepping", &self.stepping)
            .finish()
    }
}

impl SplitStepPropagator {
    pub fn new(model: QuantumModel, grid: SpatialGrid, stepping: TimeStepping) -> Result<Self> {
        if !(model.hbar_eff > 0.0 && model.hbar_eff.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "hbar_eff",
                reason: format!("must be finite and > 0, got {}", model.hbar_eff),
            });
        }
        if stepping.steps_per_period == 0 {
            return Err(Error::InvalidParameter {
                name: "steps_per_period",
                reason: "must be > 0".into(),
            });
        }
        let n = grid.n;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let weights = stepping.scheme.weights();
        let dt = stepping.dt();
        let hbar = model.hbar_eff;
        let inv_n = 1.0 / n as f64;
        let kinetic = weights
            .iter()
            .map(|w| {
                (0..n)
                    .map(|j| {
                        let k = grid.wavenumber(j);
                        Complex64::from_polar(inv_n, -w * dt * hbar * k * k / 2.0)
                    })
                    .collect()
            })
            .collect();
        let xs = grid.positions();
        Ok(Self {
            model,
            grid,
            stepping,
            fft,
            ifft,
            weights,
            kinetic,
            half_x2: xs.iter().map(|x| 0.5 * x * x).collect(),
            quarter_x4: xs.iter().map(|x| 0.25 * x.powi(4)).collect(),
        })
    }

    pub fn model(&self) -> &QuantumModel {
        &self.model
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn stepping(&self) -> &TimeStepping {
        &self.stepping
    }

    pub fn dt(&self) -> f64 {
        self.stepping.dt()
    }

    fn step_count(&self, t0: f64, t1: f64) -> Result<usize> {
        let dt = self.dt();
        let span = t1 - t0;
        let n = span / dt;
        let r = n.round();
        if span < 0.0 || (n - r).abs() > 1e-9 * r.max(1.0) {
            return Err(Error::IncommensurateStep { span, dt });
        }
        Ok(r as usize)
    }

    /// Operator sequence for `steps` steps starting at `t0`, kicks merged.
    fn program(&self, t0: f64, steps: usize) -> Vec<Op> {
        let dt = self.dt();
        let pot = self.model.potential;
        let kick = |c: f64, t: f64| (c * pot.quadratic, c * pot.quartic * (1.0 + pot.modulation * t.cos()));
        let mut ops = Vec::with_capacity(steps * self.weights.len() * 2 + 1);
        let mut pending = (0.0, 0.0);
        for s in 0..steps {
            let mut tau = t0 + s as f64 * dt;
            for (i, w) in self.weights.iter().enumerate() {
                let h = w * dt;
                let mid = tau + 0.5 * h;
                let (a, b) = kick(0.5 * h, mid);
                ops.push(Op::Kick {
                    a: pending.0 + a,
                    b: pending.1 + b,
                });
                ops.push(Op::Drift(i));
                pending = (a, b);
                tau += h;
            }
        }
        if steps > 0 {
            ops.push(Op::Kick {
                a: pending.0,
                b: pending.1,
            });
        }
        ops
    }

    fn kick_phases(&self, a: f64, b: f64, out: &mut [Complex64]) {
        let inv_hbar = 1.0 / self.model.hbar_eff;
        for ((o, x2), x4) in out.iter_mut().zip(&self.half_x2).zip(&self.quarter_x4) {
            let (s, c) = (-(a * x2 + b * x4) * inv_hbar).sin_cos();
            *o = Complex64::new(c, s);
        }
    }

    /// Applies the program to `columns` contiguous vectors of length n.
    fn apply(&self, ops: &[Op], buffer: &mut [Complex64]) {
        let n = self.grid.n;
        let mut phases = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![
            Complex64::new(0.0, 0.0);
            self.fft
                .get_inplace_scratch_len()
                .max(self.ifft.get_inplace_scratch_len())
        ];
        for op in ops {
            match *op {
                Op::Kick { a, b } => {
                    self.kick_phases(a, b, &mut phases);
                    for col in buffer.chunks_exact_mut(n) {
                        col.iter_mut().zip(&phases).for_each(|(z, p)| *z *= p);
                    }
                }
                Op::Drift(i) => {
                    let kin = &self.kinetic[i];
                    self.fft.process_with_scratch(buffer, &mut scratch);
                    for col in buffer.chunks_exact_mut(n) {
                        col.iter_mut().zip(kin).for_each(|(z, p)| *z *= p);
                    }
                    self.ifft.process_with_scratch(buffer, &mut scratch);
                }
            }
        }
    }

    /// Evolves `psi` from `psi.t` to `t_end`; the span must be a whole number
    /// of steps. Logs a momentum-tail warning when this call pushes the state
    /// over the limit, so period-by-period loops warn once.
    pub fn evolve(&self, psi: &WaveFunction, t_end: f64) -> Result<WaveFunction> {
        if psi.grid != self.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", psi.grid, self.grid)));
        }
        let steps = self.step_count(psi.t, t_end)?;
        let mut out = psi.clone();
        if steps > 0 {
            let ops = self.program(psi.t, steps);
            self.apply(&ops, &mut out.amplitudes);
        }
        out.t = t_end;
        if steps > 0 && check_momentum_tail(psi).is_none() {
            if let Some(w) = check_momentum_tail(&out) {
                log::warn!("{w}");
            }
        }
        Ok(out)
    }

    /// Evolves raw column vectors (each of length n, stored contiguously)
    /// from `t0` to `t1`.
    pub fn evolve_columns(&self, columns: &mut [Complex64], t0: f64, t1: f64) -> Result<()> {
        let steps = self.step_count(t0, t1)?;
        if steps > 0 {
            let ops = self.program(t0, steps);
            self.apply(&ops, columns);
        }
        Ok(())
    }
}

/// Orthonormal (ℓ²) parity-adapted position basis.
///
/// Even: the centre point, (δ_{c+j} + δ_{c−j})/√2 for j = 1..n/2−1, then the
/// self-mirrored edge point. Odd: (δ_{c+j} − δ_{c−j})/√2 for j = 1..n/2−1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityBasis {
    pub grid: SpatialGrid,
}

impl ParityBasis {
    pub fn new(grid: SpatialGrid) -> Self {
        Self { grid }
    }

    pub fn dim(&self, parity: Parity) -> usize {
        match parity {
            Parity::Even => self.grid.n / 2 + 1,
            Parity::Odd => self.grid.n / 2 - 1,
        }
    }

    /// Nonzero entries of basis vector `i` as (index, weight).
    pub fn vector(&self, parity: Parity, i: usize) -> Vec<(usize, f64)> {
        let c = self.grid.center();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        match parity {
            Parity::Even if i == 0 => vec![(c, 1.0)],
            Parity::Even if i == c => vec![(0, 1.0)],
            Parity::Even => vec![(c + i, r), (c - i, r)],
            Parity::Odd => vec![(c + i + 1, r), (c - i - 1, -r)],
        }
    }

    /// Coefficients of an ℓ² vector in one parity block.
    pub fn project(&self, parity: Parity, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim(parity))
            .map(|i| self.vector(parity, i).into_iter().map(|(k, w)| v[k] * w).sum())
            .collect()
    }

    /// ℓ² vector from block coefficients.
    pub fn embed(&self, parity: Parity, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.grid.n];
        for (i, c) in coeffs.iter().enumerate() {
            for (k, w) in self.vector(parity, i) {
                v[k] += c * w;
            }
        }
        v
    }
}

/// One-period evolution operator restricted to the two parity blocks.
#[derive(Debug, Clone)]
pub struct PropagatorBlocks {
    pub even: DMatrix<Complex64>,
    pub odd: DMatrix<Complex64>,
    pub grid: SpatialGrid,
    pub hbar_eff: f64,
    /// Duration covered by the blocks (2π for the Floquet operator).
    pub duration: f64,
    /// Largest ℓ² norm leaked into the opposite parity block by any column.
    pub parity_leakage: f64,
    pub warnings: Vec<GridWarning>,
}

impl PropagatorBlocks {
    pub fn block(&self, parity: Parity) -> &DMatrix<Complex64> {
        match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }

    /// max_ij |(U U†)_ij − δ_ij| over both blocks.
    pub fn unitarity_defect(&self) -> f64 {
        [&self.even, &self.odd]
            .iter()
            .map(|u| {
                let prod = *u * u.adjoint();
                let mut worst = 0.0f64;
                for i in 0..prod.nrows() {
                    for j in 0..prod.ncols() {
                        let target = if i == j { 1.0 } else { 0.0 };
                        worst = worst.max((prod[(i, j)] - target).norm());
                    }
                }
                worst
            })
            .fold(0.0, f64::max)
    }
}

/// Columns evolved together; amortizes the potential phase evaluation.
const COLUMN_BLOCK: usize = 32;

/// Safety factor by which the momentum cutoff must exceed `p_max_of_interest`.
pub const MOMENTUM_SAFETY: f64 = 2.0;
/// Largest |p| in the phase-space region of interest.
pub const P_MAX_OF_INTEREST: f64 = 4.0;

/// Evolves the parity-adapted position basis from `t0` to `t1` and returns
/// the two diagonal blocks.
pub fn build_blocks(prop: &SplitStepPropagator, t0: f64, t1: f64) -> Result<PropagatorBlocks> {
    let grid = *prop.grid();
    let n = grid.n;
    let basis = ParityBasis::new(grid);
    let mut warnings = Vec::new();
    let hbar = prop.model().hbar_eff;
    if !grid.resolves_momentum(hbar, P_MAX_OF_INTEREST, MOMENTUM_SAFETY) {
        let w = GridWarning::MomentumCutoff {
            cutoff: grid.momentum_cutoff(hbar),
            required: MOMENTUM_SAFETY * P_MAX_OF_INTEREST,
        };
        log::warn!("{w}");
        warnings.push(w);
    }
    prop.step_count(t0, t1)?;

    let jobs: Vec<(Parity, usize)> = [Parity::Even, Parity::Odd]
        .into_iter()
        .flat_map(|par| (0..basis.dim(par)).map(move |i| (par, i)))
        .collect();
    let evolved: Vec<Vec<(Parity, usize, Vec<Complex64>, f64)>> = jobs
        .par_chunks(COLUMN_BLOCK)
        .map(|chunk| {
            let mut buffer = vec![Complex64::new(0.0, 0.0); chunk.len() * n];
            for (col, &(par, i)) in buffer.chunks_exact_mut(n).zip(chunk) {
                for (k, w) in basis.vector(par, i) {
                    col[k] = Complex64::new(w, 0.0);
                }
            }
            prop.evolve_columns(&mut buffer, t0, t1)
                .expect("step count validated above");
            buffer
                .chunks_exact(n)
                .zip(chunk)
                .map(|(col, &(par, i))| {
                    let own = basis.project(par, col);
                    let other = match par {
                        Parity::Even => Parity::Odd,
                        Parity::Odd => Parity::Even,
                    };
                    let leak = basis
                        .project(other, col)
                        .iter()
                        .map(|z| z.norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    (par, i, own, leak)
                })
                .collect()
        })
        .collect();

    let mut even = DMatrix::zeros(basis.dim(Parity::Even), basis.dim(Parity::Even));
    let mut odd = DMatrix::zeros(basis.dim(Parity::Odd), basis.dim(Parity::Odd));
    let mut parity_leakage = 0.0f64;
    for (par, i, col, leak) in evolved.into_iter().flatten() {
        parity_leakage = parity_leakage.max(leak);
        let target = match par {
            Parity::Even => &mut even,
            Parity::Odd => &mut odd,
        };
        for (r, z) in col.into_iter().enumerate() {
            target[(r, i)] = z;
        }
    }
    Ok(PropagatorBlocks {
        even,
        odd,
        grid,
        hbar_eff: hbar,
        duration: t1 - t0,
        parity_leakage,
        warnings,
    })
}

/// One-period (t = 0 → 2π) Floquet operator in parity blocks.
///
/// H(t) is real symmetric and H(π + s) = H(π − s), so with W = U(π, 0) the
/// palindromic splitting gives U(2π, π) = Wᵀ exactly and U(2π, 0) = Wᵀ W.
/// An odd number of steps per period falls back to direct evolution.
pub fn build_propagator(prop: &SplitStepPropagator) -> Result<PropagatorBlocks> {
    if prop.stepping().steps_per_period % 2 == 1 {
        return build_blocks(prop, 0.0, TAU);
    }
    let half = build_blocks(prop, 0.0, PI)?;
    Ok(PropagatorBlocks {
        even: half.even.transpose() * &half.even,
        odd: half.odd.transpose() * &half.odd,
        duration: TAU,
        // ‖P_∓ Wᵀ W e‖ ≤ ‖P_∓ Wᵀ P_±‖ + ‖P_∓ W e‖ bounds the full-period leakage
        parity_leakage: 2.0 * half.parity_leakage,
        ..half
    })
}
