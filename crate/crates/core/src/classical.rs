//! Classical driven quartic oscillator
//!
//! ```text
//! ẋ = p,   ṗ = −κ x − κ [1 + ε cos t] x³
//! ```
//!
//! integrated with a symplectic kick-drift-kick splitting (optionally
//! composed to higher order), stroboscopic Poincaré sections at t = 2πs and
//! Newton search for period-one fixed points of the stroboscopic map.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::splitting::Scheme;

/// |x| or |p| beyond this is treated as numerical blow-up.
pub const ESCAPE_BOUND: f64 = 50.0;
/// Default number of steps per drive period.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub x: f64,
    pub p: f64,
    pub t: f64,
}

impl ClassicalState {
    pub fn new(x: f64, p: f64, t: f64) -> Self {
        Self { x, p, t }
    }

    fn escaped(&self) -> bool {
        !(self.x.abs() <= ESCAPE_BOUND && self.p.abs() <= ESCAPE_BOUND && self.t.is_finite())
    }
}

/// ṗ of the driven quartic oscillator.
#[inline]
pub fn force(x: f64, t: f64, kappa: f64, epsilon: f64) -> f64 {
    -kappa * x - kappa * (1.0 + epsilon * t.cos()) * x * x * x
}

#[inline]
fn force_gradient(x: f64, t: f64, kappa: f64, epsilon: f64) -> f64 {
    -kappa - 3.0 * kappa * (1.0 + epsilon * t.cos()) * x * x
}

/// Energy of the undriven (ε = 0) oscillator.
pub fn energy(x: f64, p: f64, kappa: f64) -> f64 {
    0.5 * p * p + 0.5 * kappa * x * x + 0.25 * kappa * x.powi(4)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrivenQuartic {
    pub kappa: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    #[serde(default)]
    pub scheme: Scheme,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: TAU / DEFAULT_STEPS_PER_PERIOD as f64,
            scheme: Scheme::default(),
        }
    }
}

impl IntegratorConfig {
    /// Number of equal steps covering `span`, each no longer than `dt`.
    fn steps_for(&self, span: f64) -> usize {
        let n = span / self.dt;
        let r = n.round();
        if (n - r).abs() < 1e-9 * n.max(1.0) {
            r as usize
        } else {
            n.ceil() as usize
        }
    }
}

/// Monodromy (tangent) matrix of a flow segment, row-major.
pub type Matrix2 = [[f64; 2]; 2];

impl DrivenQuartic {
    pub fn new(kappa: f64, epsilon: f64) -> Self {
        Self { kappa, epsilon }
    }

    pub fn force(&self, x: f64, t: f64) -> f64 {
        force(x, t, self.kappa, self.epsilon)
    }

    /// One composed step of length `h`, optionally carrying a tangent matrix.
    #[inline]
    fn step(&self, s: &mut ClassicalState, h: f64, weights: &[f64], mut tangent: Option<&mut Matrix2>) {
        for &w in weights {
            let hw = h * w;
            self.kick(s, 0.5 * hw, tangent.as_deref_mut());
            s.x += hw * s.p;
            s.t += hw;
            if let Some(m) = tangent.as_deref_mut() {
                m[0][0] += hw * m[1][0];
                m[0][1] += hw * m[1][1];
            }
            self.kick(s, 0.5 * hw, tangent.as_deref_mut());
        }
    }

    #[inline]
    fn kick(&self, s: &mut ClassicalState, h: f64, tangent: Option<&mut Matrix2>) {
        if let Some(m) = tangent {
            let g = h * force_gradient(s.x, s.t, self.kappa, self.epsilon);
            m[1][0] += g * m[0][0];
            m[1][1] += g * m[0][1];
        }
        s.p += h * self.force(s.x, s.t);
    }

    fn run(
        &self,
        s0: ClassicalState,
        t_end: f64,
        cfg: &IntegratorConfig,
        mut tangent: Option<&mut Matrix2>,
        mut observer: impl FnMut(&ClassicalState),
    ) -> Result<ClassicalState> {
        if !(cfg.dt > 0.0) || !(t_end >= s0.t) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!(
                    "need dt > 0 and t_end >= t0 (dt={}, t0={}, t_end={t_end})",
                    cfg.dt, s0.t
                ),
            });
        }
        let span = t_end - s0.t;
        let steps = cfg.steps_for(span);
        let weights = cfg.scheme.weights();
        let mut s = s0;
        if steps == 0 {
            return Ok(s);
        }
        let h = span / steps as f64;
        for k in 0..steps {
            let last = s;
            self.step(&mut s, h, &weights, tangent.as_deref_mut());
            // pin the clock to the step lattice to avoid accumulated drift
            s.t = s0.t + (k + 1) as f64 * h;
            if s.escaped() {
                return Err(Error::TrajectoryEscaped { last });
            }
            observer(&s);
        }
        s.t = t_end;
        Ok(s)
    }

    /// Advances `s0` to `t_end`.
    pub fn integrate(&self, s0: ClassicalState, t_end: f64, cfg: &IntegratorConfig) -> Result<ClassicalState> {
        self.run(s0, t_end, cfg, None, |_| {})
    }

    /// Like [`integrate`](Self::integrate) but records every step, starting with `s0`.
    pub fn trajectory(&self, s0: ClassicalState, t_end: f64, cfg: &IntegratorConfig) -> Result<Vec<ClassicalState>> {
        let mut out = vec![s0];
        self.run(s0, t_end, cfg, None, |s| out.push(*s))?;
        Ok(out)
    }

    /// One-period stroboscopic map from t = 0, with its tangent matrix.
    pub fn period_map(&self, x: f64, p: f64, cfg: &IntegratorConfig) -> Result<(ClassicalState, Matrix2)> {
        let mut m = [[1.0, 0.0], [0.0, 1.0]];
        let s = self.run(ClassicalState::new(x, p, 0.0), TAU, cfg, Some(&mut m), |_| {})?;
        Ok((s, m))
    }

    /// Linearized one-period map about `(x, p)`.
    pub fn monodromy(&self, x: f64, p: f64, cfg: &IntegratorConfig) -> Result<Matrix2> {
        Ok(self.period_map(x, p, cfg)?.1)
    }

    /// Stroboscopic samples at t = t0 + 2πs, s = 0..=n_periods, per seed.
    /// Seeds that escape keep the samples gathered so far.
    pub fn poincare_section(
        &self,
        seeds: &[ClassicalState],
        n_periods: usize,
        cfg: &IntegratorConfig,
    ) -> PoincareSection {
        let results: Vec<(Vec<(f64, f64)>, Option<ClassicalState>)> = seeds
            .par_iter()
            .map(|seed| {
                let mut points = vec![(seed.x, seed.p)];
                let mut s = *seed;
                for k in 1..=n_periods {
                    match self.integrate(s, seed.t + k as f64 * TAU, cfg) {
                        Ok(next) => {
                            points.push((next.x, next.p));
                            s = next;
                        }
                        Err(Error::TrajectoryEscaped { last }) => return (points, Some(last)),
                        Err(_) => return (points, Some(s)),
                    }
                }
                (points, None)
            })
            .collect();
        let (points, escaped) = results.into_iter().unzip();
        PoincareSection {
            seeds: seeds.to_vec(),
            points,
            escaped,
            n_periods,
        }
    }

    /// Newton iteration on P(z) − z with the tangent-map Jacobian.
    pub fn find_period_one_island(
        &self,
        guess: (f64, f64),
        cfg: &IntegratorConfig,
        opts: &NewtonOptions,
    ) -> Result<FixedPoint> {
        let (mut x, mut p) = guess;
        let mut best = (x, p, f64::INFINITY);
        for _ in 0..opts.max_iterations {
            let (image, m) = match self.period_map(x, p, cfg) {
                Ok(v) => v,
                Err(_) => break,
            };
            let fx = image.x - x;
            let fp = image.p - p;
            let residual = fx.abs().max(fp.abs());
            if residual < best.2 {
                best = (x, p, residual);
            }
            if residual < opts.tolerance {
                return Ok(FixedPoint::new(x, p, residual, m, opts.marginal_band));
            }
            // (M − I) δ = −F
            let a = m[0][0] - 1.0;
            let b = m[0][1];
            let c = m[1][0];
            let d = m[1][1] - 1.0;
            let det = a * d - b * c;
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let dx = (-d * fx + b * fp) / det;
            let dp = (c * fx - a * fp) / det;
            let scale = opts.max_step / dx.abs().max(dp.abs()).max(opts.max_step);
            x += dx * scale;
            p += dp * scale;
        }
        // Newton may stagnate just above the tolerance at the rounding floor
        if best.2.is_finite() && best.2 < opts.tolerance {
            let m = self.monodromy(best.0, best.1, cfg)?;
            return Ok(FixedPoint::new(best.0, best.1, best.2, m, opts.marginal_band));
        }
        Err(Error::NewtonDiverged {
            best: (best.0, best.1),
            residual: best.2,
            iterations: opts.max_iterations,
        })
    }

    /// Coarse scan of |P(z) − z| over a lattice; returns the lattice node
    /// with the smallest return distance, excluding nodes closer than
    /// `exclude_radius` to the origin.
    pub fn scan_return_distance(
        &self,
        window: PhaseWindow,
        resolution: (usize, usize),
        exclude_radius: f64,
        cfg: &IntegratorConfig,
    ) -> Option<(f64, f64, f64)> {
        let nodes: Vec<(f64, f64)> = window
            .lattice(resolution)
            .into_iter()
            .filter(|(x, p)| x.hypot(*p) >= exclude_radius)
            .collect();
        nodes
            .par_iter()
            .filter_map(|&(x, p)| {
                let s = self.integrate(ClassicalState::new(x, p, 0.0), TAU, cfg).ok()?;
                Some((x, p, (s.x - x).hypot(s.p - p)))
            })
            .collect::<Vec<_>>()
            .into_iter()
            .min_by(|a, b| a.2.total_cmp(&b.2))
    }

    /// Locates the Δ₊ island by a coarse scan of the x > 0 half plane followed
    /// by Newton refinement.
    pub fn locate_right_island(&self, cfg: &IntegratorConfig) -> Result<FixedPoint> {
        let window = PhaseWindow {
            x_min: 0.25,
            x_max: 3.0,
            p_min: -1.5,
            p_max: 1.5,
        };
        let (x, p, _) = self
            .scan_return_distance(window, (56, 61), 0.0, cfg)
            .ok_or(Error::NewtonDiverged {
                best: (f64::NAN, f64::NAN),
                residual: f64::INFINITY,
                iterations: 0,
            })?;
        self.find_period_one_island((x, p), cfg, &NewtonOptions::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseWindow {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl PhaseWindow {
    pub fn symmetric(half_x: f64, half_p: f64) -> Self {
        Self {
            x_min: -half_x,
            x_max: half_x,
            p_min: -half_p,
            p_max: half_p,
        }
    }

    /// Evenly spaced nodes including the window edges, x outer.
    pub fn lattice(&self, (nx, np): (usize, usize)) -> Vec<(f64, f64)> {
        let xs = linspace(self.x_min, self.x_max, nx);
        let ps = linspace(self.p_min, self.p_max, np);
        xs.iter().flat_map(|&x| ps.iter().map(move |&p| (x, p))).collect()
    }
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..n)
            .map(|i| {
                // symmetric about the midpoint so mirrored windows give mirrored nodes
                let f = (2.0 * i as f64 - (n - 1) as f64) / (n - 1) as f64;
                0.5 * (a + b) + 0.5 * (b - a) * f
            })
            .collect(),
    }
}

/// Default seed lattice at t = 0.
pub fn seed_lattice(window: PhaseWindow, resolution: (usize, usize)) -> Vec<ClassicalState> {
    window
        .lattice(resolution)
        .into_iter()
        .map(|(x, p)| ClassicalState::new(x, p, 0.0))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareSection {
    pub seeds: Vec<ClassicalState>,
    /// Per seed, (x, p) at t = t_seed + 2πs for s = 0, 1, ...
    pub points: Vec<Vec<(f64, f64)>>,
    /// Last valid state of seeds whose trajectory escaped.
    pub escaped: Vec<Option<ClassicalState>>,
    pub n_periods: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Elliptic,
    Hyperbolic,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Largest allowed Newton update in max-norm.
    pub max_step: f64,
    /// |trace| within this of 2 is reported as marginal.
    pub marginal_band: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 50,
            max_step: 0.5,
            marginal_band: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub x0: f64,
    pub p0: f64,
    pub residual: f64,
    #[serde(rename = "trace")]
    pub monodromy_trace: f64,
    #[serde(skip)]
    pub monodromy: Matrix2,
    pub stability: Stability,
}

impl FixedPoint {
    fn new(x0: f64, p0: f64, residual: f64, m: Matrix2, band: f64) -> Self {
        let trace = m[0][0] + m[1][1];
        let stability = if (trace.abs() - 2.0).abs() <= band {
            Stability::Marginal
        } else if trace.abs() < 2.0 {
            Stability::Elliptic
        } else {
            Stability::Hyperbolic
        };
        Self {
            x0,
            p0,
            residual,
            monodromy_trace: trace,
            monodromy: m,
            stability,
        }
    }

    pub fn determinant(&self) -> f64 {
        let m = self.monodromy;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}
