//! Husimi projections, tunnelling pairs and tunnelling periods.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{linspace, PhaseWindow};
use crate::error::{Error, Result};
use crate::quantum::{circular_distance, FloquetSpectrum, Parity, SpatialGrid, SplitStepPropagator, WaveFunction};

/// Largest normalized edge density tolerated for a coherent state.
pub const COHERENT_EDGE_LIMIT: f64 = 1e-12;
/// Default lower bound on the island overlap of a tunnelling state.
pub const DEFAULT_OVERLAP_FLOOR: f64 = 0.1;

/// Width σ_c = √(ħ_eff/2) of the unit-frequency oscillator ground state.
pub fn default_width(hbar_eff: f64) -> f64 {
    (0.5 * hbar_eff).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentState {
    pub x0: f64,
    pub p0: f64,
    /// Position standard deviation σ_c.
    pub width: f64,
}

impl CoherentState {
    /// Continuum-normalized amplitude
    /// (2πσ²)^(−1/4) exp(−(x−x0)²/(4σ²) + i p0 (x−x0)/ħ).
    #[inline]
    pub fn amplitude(&self, x: f64, hbar_eff: f64) -> Complex64 {
        let d = x - self.x0;
        let norm = (TAU * self.width * self.width).powf(-0.25);
        Complex64::from_polar(
            norm * (-d * d / (4.0 * self.width * self.width)).exp(),
            self.p0 * d / hbar_eff,
        )
    }
}

/// The coherent state sampled on `grid` and normalized there.
pub fn coherent_state(x0: f64, p0: f64, width: f64, hbar_eff: f64, grid: SpatialGrid) -> Result<WaveFunction> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "width",
            reason: format!("must be finite and > 0, got {width}"),
        });
    }
    let cs = CoherentState { x0, p0, width };
    let psi = WaveFunction::from_fn(grid, 0.0, |x| cs.amplitude(x, hbar_eff));
    let edge_density = psi.amplitudes[0].norm_sqr().max(psi.amplitudes[grid.n - 1].norm_sqr());
    if edge_density > COHERENT_EDGE_LIMIT {
        return Err(Error::CoherentStateSpill { edge_density });
    }
    Ok(psi)
}

/// Q(x, p) on a lattice, x outer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HusimiMap {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    /// Row-major, `xs` outer.
    pub values: Vec<f64>,
    pub width: f64,
    pub hbar_eff: f64,
}

impl HusimiMap {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ps.len() + j]
    }

    pub fn dx(&self) -> f64 {
        spacing(&self.xs)
    }

    pub fn dp(&self) -> f64 {
        spacing(&self.ps)
    }

    /// ΣQ dx dp.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx() * self.dp()
    }

    /// Share of ΣQ on nodes with x > 0 (nodes at x = 0 count half).
    pub fn right_fraction(&self) -> f64 {
        let total: f64 = self.values.iter().sum();
        let mut right = 0.0;
        for (i, &x) in self.xs.iter().enumerate() {
            let w = if x > 0.0 {
                1.0
            } else if x == 0.0 {
                0.5
            } else {
                0.0
            };
            right += w * (0..self.ps.len()).map(|j| self.get(i, j)).sum::<f64>();
        }
        right / total
    }

    /// Strict local maxima (8-neighbourhood) with Q ≥ `relative` · max Q, as
    /// (x, p, Q), largest first.
    pub fn dominant_maxima(&self, relative: f64) -> Vec<(f64, f64, f64)> {
        let (nx, np) = (self.xs.len(), self.ps.len());
        let qmax = self.values.iter().copied().fold(0.0, f64::max);
        let mut out = Vec::new();
        for i in 0..nx {
            for j in 0..np {
                let q = self.get(i, j);
                if q < relative * qmax {
                    continue;
                }
                let mut is_max = true;
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let (a, b) = (i as i64 + di, j as i64 + dj);
                        if a < 0 || b < 0 || a >= nx as i64 || b >= np as i64 {
                            continue;
                        }
                        if self.get(a as usize, b as usize) >= q {
                            is_max = false;
                        }
                    }
                }
                if is_max {
                    out.push((self.xs[i], self.ps[j], q));
                }
            }
        }
        out.sort_by(|a, b| b.2.total_cmp(&a.2));
        out
    }
}

fn spacing(v: &[f64]) -> f64 {
    if v.len() < 2 {
        1.0
    } else {
        (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64
    }
}

/// Q(x, p) = |⟨α_{x,p}|ψ⟩|² / (2π ħ_eff) on a `resolution` lattice spanning
/// `window` (edges included).
pub fn husimi(
    state: &WaveFunction,
    window: PhaseWindow,
    resolution: (usize, usize),
    width: f64,
    hbar_eff: f64,
) -> HusimiMap {
    let xs = linspace(window.x_min, window.x_max, resolution.0);
    let ps = linspace(window.p_min, window.p_max, resolution.1);
    let grid = state.grid;
    let dx = grid.dx();
    let positions = grid.positions();
    // Gaussian weights below exp(−40) relative are dropped
    let reach = (160.0f64).sqrt() * width;
    let norm = (TAU * width * width).powf(-0.25);
    let prefactor = 1.0 / (2.0 * PI * hbar_eff);
    let period = 2.0 * grid.x_max;
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&xc| {
            // minimum-image displacement on the periodic grid keeps the
            // self-mirrored edge point symmetric
            let support: Vec<(f64, Complex64)> = positions
                .iter()
                .zip(&state.amplitudes)
                .map(|(&x, &psi)| {
                    let d = x - xc;
                    (d - period * (d / period).round(), psi)
                })
                .filter(|(d, _)| d.abs() <= reach)
                .map(|(d, psi)| (d, psi * (norm * (-d * d / (4.0 * width * width)).exp())))
                .collect();
            ps.iter()
                .map(|&pc| {
                    let k = pc / hbar_eff;
                    let overlap: Complex64 = support
                        .iter()
                        .map(|&(d, w)| w * Complex64::from_polar(1.0, -k * d))
                        .sum::<Complex64>()
                        * dx;
                    prefactor * overlap.norm_sqr()
                })
                .collect()
        })
        .collect();
    HusimiMap {
        xs,
        ps,
        values: rows.into_iter().flatten().collect(),
        width,
        hbar_eff,
    }
}

/// The odd/even Floquet pair supported on the period-one islands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnellingPair {
    /// Spectrum index of the odd state.
    pub u: usize,
    /// Spectrum index of the even state.
    pub v: usize,
    pub e_u: f64,
    pub e_v: f64,
    /// Circular distance |E_u − E_v| on the folded branch.
    pub splitting: f64,
    /// 2π ħ_eff / splitting; `None` for an unresolvable splitting.
    pub t_tun: Option<f64>,
    pub overlap_u: f64,
    pub overlap_v: f64,
    pub hbar_eff: f64,
    #[serde(skip)]
    pub phi_u: Option<WaveFunction>,
    /// Even state rephased so that ⟨Φ_u|x|Φ_v⟩ is real and positive.
    #[serde(skip)]
    pub phi_v: Option<WaveFunction>,
}

/// Splittings below this multiple of ħ_eff are treated as exact degeneracy.
pub const DEGENERATE_SPLITTING: f64 = 1e-15;

/// T_tun = 2π ħ_eff / splitting.
pub fn tunnelling_period(splitting: f64, hbar_eff: f64) -> Result<f64> {
    if !(splitting > DEGENERATE_SPLITTING * hbar_eff) {
        return Err(Error::DegeneratePair { splitting });
    }
    Ok(TAU * hbar_eff / splitting)
}

fn position_matrix_element(a: &WaveFunction, b: &WaveFunction) -> Complex64 {
    let dx = a.grid.dx();
    a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .enumerate()
        .map(|(k, (x, y))| x.conj() * y * a.grid.x(k))
        .sum::<Complex64>()
        * dx
}

/// Picks the odd and even states with the largest overlap with a coherent
/// state on the island centre.
pub fn find_tunnelling_pair(
    spectrum: &FloquetSpectrum,
    island_center: (f64, f64),
    width: f64,
    overlap_floor: f64,
) -> Result<TunnellingPair> {
    let hbar = spectrum.hbar_eff;
    let probe = coherent_state(island_center.0, island_center.1, width, hbar, spectrum.grid)?;
    let best = |parity: Parity| -> Result<(usize, f64)> {
        spectrum
            .indices_of(parity)
            .map(|i| (i, spectrum.states[i].state.inner(&probe).norm_sqr()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or(Error::MissingParity(parity.as_str()))
    };
    let (u, overlap_u) = best(Parity::Odd)?;
    let (v, overlap_v) = best(Parity::Even)?;
    let worst = overlap_u.min(overlap_v);
    if worst < overlap_floor {
        return Err(Error::NoIslandState {
            best: worst,
            floor: overlap_floor,
        });
    }
    let e_u = spectrum.states[u].quasi_energy;
    let e_v = spectrum.states[v].quasi_energy;
    let splitting = circular_distance(e_u, e_v, hbar);
    let phi_u = spectrum.states[u].state.clone();
    let mut phi_v = spectrum.states[v].state.clone();
    let xuv = position_matrix_element(&phi_u, &phi_v);
    if xuv.norm() > 0.0 {
        let phase = xuv.conj() / xuv.norm();
        phi_v.amplitudes.iter_mut().for_each(|z| *z *= phase);
    }
    Ok(TunnellingPair {
        u,
        v,
        e_u,
        e_v,
        splitting,
        t_tun: tunnelling_period(splitting, hbar).ok(),
        overlap_u,
        overlap_v,
        hbar_eff: hbar,
        phi_u: Some(phi_u),
        phi_v: Some(phi_v),
    })
}

impl TunnellingPair {
    fn states(&self) -> (&WaveFunction, &WaveFunction) {
        (
            self.phi_u.as_ref().expect("pair carries its states"),
            self.phi_v.as_ref().expect("pair carries its states"),
        )
    }

    /// Φ± = (Φ_u ± Φ_v)/√2; `+` sits on the right island.
    pub fn combine(&self, sign: Sign) -> WaveFunction {
        let (u, v) = self.states();
        let s = match sign {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        };
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let amplitudes = u
            .amplitudes
            .iter()
            .zip(&v.amplitudes)
            .map(|(a, b)| (a + b * s) * r)
            .collect();
        WaveFunction::new(u.grid, amplitudes, 0.0)
    }

    pub fn period(&self) -> Result<f64> {
        tunnelling_period(self.splitting, self.hbar_eff)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// Φ± for `pair`.
pub fn combine_pair(pair: &TunnellingPair, sign: Sign) -> WaveFunction {
    pair.combine(sign)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PeriodEstimate {
    /// Twice the (parabolically refined) first minimum of P₊, in periods.
    FirstMinimum { periods: f64 },
    /// Least-squares fit of A + B cos ωs + C sin ωs, in periods.
    CosineFit { periods: f64 },
    /// P₊ never dropped through the midpoint within the horizon.
    ExceedsHorizon { horizon: usize },
    /// s_max = 0.
    NoEvolutionRequested,
}

impl PeriodEstimate {
    pub fn periods(&self) -> Option<f64> {
        match *self {
            PeriodEstimate::FirstMinimum { periods } | PeriodEstimate::CosineFit { periods } => Some(periods),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnellingSeries {
    pub s: Vec<usize>,
    pub p_plus: Vec<f64>,
    pub p_minus: Vec<f64>,
    pub estimate: PeriodEstimate,
    /// Cosine-fit period in drive periods, when a fit was possible.
    pub cosine_fit: Option<f64>,
}

impl TunnellingSeries {
    /// Fitted tunnelling period in scaled time.
    pub fn period(&self) -> Option<f64> {
        self.estimate.periods().map(|p| p * TAU)
    }
}

/// Stroboscopic P±(s) = |⟨Φ±|Ψ(sT)⟩|² by direct evolution, with a period
/// estimate.
pub fn measure_tunnelling(
    prop: &SplitStepPropagator,
    psi0: &WaveFunction,
    pair: &TunnellingPair,
    s_max: usize,
) -> Result<TunnellingSeries> {
    // s_max = 0 still records the s = 0 sample; the estimate then reports
    // that no evolution was requested.
    let plus = pair.combine(Sign::Plus);
    let minus = pair.combine(Sign::Minus);
    psi0.check_grid(&plus)?;
    let mut psi = psi0.clone();
    let mut p_plus = Vec::with_capacity(s_max + 1);
    let mut p_minus = Vec::with_capacity(s_max + 1);
    for s in 0..=s_max {
        if s > 0 {
            psi = prop.evolve(&psi, psi.t + TAU)?;
        }
        p_plus.push(plus.inner(&psi).norm_sqr());
        p_minus.push(minus.inner(&psi).norm_sqr());
    }
    Ok(series_with_estimate((0..=s_max).collect(), p_plus, p_minus))
}

pub(crate) fn series_with_estimate(s: Vec<usize>, p_plus: Vec<f64>, p_minus: Vec<f64>) -> TunnellingSeries {
    let cosine_fit = fit_cosine_period(&p_plus);
    let estimate = estimate_period(&p_plus, &p_minus, cosine_fit);
    TunnellingSeries {
        s,
        p_plus,
        p_minus,
        estimate,
        cosine_fit,
    }
}

/// Smallest initial imbalance P₊(0) − midpoint treated as a transfer.
pub const TRANSFER_RESOLUTION: f64 = 1e-6;

/// First-minimum estimate with parabolic refinement; falls back to the
/// cosine fit when the first excursion below the midpoint does not close
/// within the horizon.
pub fn estimate_period(p_plus: &[f64], p_minus: &[f64], cosine_fit: Option<f64>) -> PeriodEstimate {
    let horizon = p_plus.len().saturating_sub(1);
    if horizon == 0 {
        return PeriodEstimate::NoEvolutionRequested;
    }
    let mid = 0.5 * (p_plus[0] + p_minus[0]);
    // A state that starts balanced between the islands has no transfer to time.
    if p_plus[0] - mid <= TRANSFER_RESOLUTION {
        return PeriodEstimate::ExceedsHorizon { horizon };
    }
    let Some(first_below) = p_plus.iter().position(|&v| v < mid) else {
        return PeriodEstimate::ExceedsHorizon { horizon };
    };
    let end = p_plus[first_below..]
        .iter()
        .position(|&v| v >= mid)
        .map(|k| first_below + k)
        .unwrap_or(p_plus.len());
    let (k, _) = p_plus[first_below..end]
        .iter()
        .enumerate()
        .map(|(i, &v)| (first_below + i, v))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty excursion");
    if k + 1 >= p_plus.len() {
        return match cosine_fit {
            Some(periods) => PeriodEstimate::CosineFit { periods },
            None => PeriodEstimate::ExceedsHorizon { horizon },
        };
    }
    let (a, b, c) = (p_plus[k - 1], p_plus[k], p_plus[k + 1]);
    let denom = a - 2.0 * b + c;
    let offset = if denom > 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    PeriodEstimate::FirstMinimum {
        periods: 2.0 * (k as f64 + offset.clamp(-0.5, 0.5)),
    }
}

/// Least-squares fit of y(s) ≈ A + B cos ωs + C sin ωs over ω ∈ (0, π];
/// returns 2π/ω in samples. `None` when fewer than four samples exist.
pub fn fit_cosine_period(y: &[f64]) -> Option<f64> {
    let n = y.len();
    if n < 4 {
        return None;
    }
    let residual = |omega: f64| -> f64 {
        // normal equations for (A, B, C)
        let mut m = [[0.0f64; 3]; 3];
        let mut r = [0.0f64; 3];
        for (s, &v) in y.iter().enumerate() {
            let basis = [1.0, (omega * s as f64).cos(), (omega * s as f64).sin()];
            for i in 0..3 {
                r[i] += basis[i] * v;
                for j in 0..3 {
                    m[i][j] += basis[i] * basis[j];
                }
            }
        }
        let Some(coef) = solve3(m, r) else {
            return f64::INFINITY;
        };
        y.iter()
            .enumerate()
            .map(|(s, &v)| {
                let f = coef[0] + coef[1] * (omega * s as f64).cos() + coef[2] * (omega * s as f64).sin();
                (v - f).powi(2)
            })
            .sum()
    };
    // frequencies down to a quarter oscillation over the horizon
    let w_min = 0.5 * PI / (n - 1) as f64;
    let samples = 4 * n + 200;
    let mut best = (f64::INFINITY, w_min);
    for i in 0..=samples {
        let w = w_min * (PI / w_min).powf(i as f64 / samples as f64);
        let r = residual(w);
        if r < best.0 {
            best = (r, w);
        }
    }
    // golden-section refinement around the best sample
    let ratio = (PI / w_min).powf(1.0 / samples as f64);
    let (mut lo, mut hi) = (best.1 / ratio, (best.1 * ratio).min(PI));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (residual(c), residual(d));
    for _ in 0..100 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = residual(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = residual(d);
        }
    }
    let w = 0.5 * (lo + hi);
    Some(TAU / w)
}

fn solve3(m: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let det = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det(m);
    if d.abs() < 1e-300 {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut mk = m;
        for i in 0..3 {
            mk[i][k] = r[i];
        }
        *o = det(mk) / d;
    }
    Some(out)
}

/// Ground state of p²/2 + κ_ini x²/2, displaced to (x0, p0).
pub fn approx_initial_state(
    kappa_ini: f64,
    hbar_eff: f64,
    grid: SpatialGrid,
    offset: (f64, f64),
) -> Result<WaveFunction> {
    if !(kappa_ini > 0.0 && kappa_ini.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "kappa_ini",
            reason: format!("must be finite and > 0, got {kappa_ini}"),
        });
    }
    let width = initial_width(kappa_ini, hbar_eff);
    let limit = 3.0 * grid.dx();
    if width < limit {
        return Err(Error::UnderResolved { width, limit });
    }
    coherent_state(offset.0, offset.1, width, hbar_eff, grid)
}

/// σ_ini = √(ħ_eff / (2 √κ_ini)).
pub fn initial_width(kappa_ini: f64, hbar_eff: f64) -> f64 {
    (hbar_eff / (2.0 * kappa_ini.sqrt())).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SpatialGrid {
        SpatialGrid::new(512, 8.0).unwrap()
    }

    #[test]
    fn coherent_state_moments() {
        let hbar = 0.5;
        let w = default_width(hbar);
        let psi = coherent_state(0.0, 0.0, w, hbar, grid()).unwrap();
        assert!(psi.mean_position().abs() < 1e-14);
        assert!((psi.parity_expectation().re - 1.0).abs() < 1e-12);
        let psi = coherent_state(1.3, -0.7, 0.4, hbar, grid()).unwrap();
        assert!((psi.mean_position() - 1.3).abs() < 1e-8);
        assert!((psi.position_variance() - 0.16).abs() < 1e-8);
        assert!((psi.mean_momentum(hbar) + 0.7).abs() < 1e-8);
    }

    #[test]
    fn coherent_state_spill_is_rejected() {
        assert!(matches!(
            coherent_state(7.5, 0.0, 0.5, 0.5, grid()),
            Err(Error::CoherentStateSpill { .. })
        ));
    }

    #[test]
    fn husimi_of_coherent_state_peaks_at_centre() {
        let hbar = 0.5;
        let w = default_width(hbar);
        let psi = coherent_state(0.8, 0.4, w, hbar, grid()).unwrap();
        let window = PhaseWindow {
            x_min: -1.2,
            x_max: 2.8,
            p_min: -1.6,
            p_max: 2.4,
        };
        let map = husimi(&psi, window, (81, 81), w, hbar);
        let top = map.dominant_maxima(0.5);
        assert_eq!(top.len(), 1);
        assert!((top[0].0 - 0.8).abs() < 1e-12 && (top[0].1 - 0.4).abs() < 1e-12);
        // |⟨α|β⟩|² = exp(−Δx²/(4σ²) − Δp²σ²/ħ²) for equal widths... halved:
        // exp(−Δx²/(4σ²)) · exp(−σ²Δp²/ħ²)
        let q0 = top[0].2;
        let qx = map.get(50, 40); // x = 0.8 + 0.5·? check via coordinates
        let (dx, dp) = (map.xs[50] - 0.8, map.ps[40] - 0.4);
        let want = q0 * (-(dx * dx) / (4.0 * w * w) - w * w * dp * dp / (hbar * hbar)).exp();
        assert!((qx - want).abs() < 1e-10 * q0, "{qx} vs {want}");
    }

    #[test]
    fn husimi_normalization() {
        let hbar = 0.5;
        let w = default_width(hbar);
        let psi = coherent_state(0.3, 0.0, w, hbar, grid()).unwrap();
        // ±5 natural widths in x (σ_c) and p (ħ/2σ_c) around the centre
        let sp = hbar / (2.0 * w);
        let window = PhaseWindow {
            x_min: 0.3 - 5.0 * 2.0 * w,
            x_max: 0.3 + 5.0 * 2.0 * w,
            p_min: -5.0 * 2.0 * sp,
            p_max: 5.0 * 2.0 * sp,
        };
        let map = husimi(&psi, window, (101, 101), w, hbar);
        assert!((map.integral() - 1.0).abs() < 1e-3, "{}", map.integral());
    }

    #[test]
    fn period_formula() {
        assert!((tunnelling_period(0.125, 0.5).unwrap() - 8.0 * PI).abs() < 1e-12);
        assert!(matches!(tunnelling_period(0.0, 0.5), Err(Error::DegeneratePair { .. })));
    }

    #[test]
    fn initial_width_unit_frequency() {
        assert!((initial_width(1.0, 0.5) - 0.5).abs() < 1e-15);
        assert!(matches!(
            approx_initial_state(1e12, 0.5, grid(), (0.0, 0.0)),
            Err(Error::UnderResolved { .. })
        ));
    }

    #[test]
    fn period_estimators_on_synthetic_series() {
        // P₊ = cos²(π s / 37.3)
        let period = 37.3;
        let p_plus: Vec<f64> = (0..=60).map(|s| (PI * s as f64 / period).cos().powi(2)).collect();
        let p_minus: Vec<f64> = p_plus.iter().map(|p| 1.0 - p).collect();
        let series = series_with_estimate((0..=60).collect(), p_plus.clone(), p_minus.clone());
        match series.estimate {
            PeriodEstimate::FirstMinimum { periods } => assert!((periods - period).abs() < 0.02 * period),
            e => panic!("{e:?}"),
        }
        assert!((series.cosine_fit.unwrap() - period).abs() < 1e-6);
        let short = series_with_estimate((0..=5).collect(), p_plus[..6].to_vec(), p_minus[..6].to_vec());
        assert_eq!(short.estimate, PeriodEstimate::ExceedsHorizon { horizon: 5 });
    }

    #[test]
    fn balanced_series_has_no_transfer() {
        let flat = vec![0.5; 21];
        let jitter: Vec<f64> = (0..21).map(|s| 0.5 + 1e-13 * (s as f64).sin()).collect();
        for p in [flat, jitter] {
            let q: Vec<f64> = p.iter().map(|v| 1.0 - v).collect();
            assert_eq!(
                estimate_period(&p, &q, None),
                PeriodEstimate::ExceedsHorizon { horizon: 20 }
            );
        }
    }
}
