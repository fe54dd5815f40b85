//! Laboratory parameters of the membrane-in-the-middle device, the adiabatic
//! (bad-cavity) mean field and the map onto the dimensionless oscillator
//!
//! ```text
//! H = p²/2 + κ x²/2 + κ [1 + ε cos t] x⁴/4,    [x, p] = i ħ_eff.
//! ```
//!
//! All quantities are SI. Angular frequencies are in rad/s; the JSON form
//! ([`PhysicalSpec`]) additionally accepts ordinary frequencies in Hz under
//! `*_hz` keys, which are multiplied by 2π on load.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum [m/s].
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default ratio every timescale must exceed for the cavity to follow the drive.
pub const DEFAULT_ADIABATIC_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Effective mass [kg].
    pub m: f64,
    /// Mechanical angular frequency [rad/s].
    pub omega_m: f64,
    /// Quartic dispersive coupling [rad s⁻¹ m⁻⁴].
    pub g4: f64,
    /// Drive wavelength [m].
    pub lambda_l: f64,
    /// Mean drive power [W].
    #[serde(rename = "P0")]
    pub p0: f64,
    /// Power modulation amplitude [W].
    #[serde(rename = "PA")]
    pub pa: f64,
    /// Cavity amplitude decay rate [rad/s].
    pub gamma_c: f64,
    /// Power modulation angular frequency [rad/s].
    #[serde(rename = "Omega")]
    pub omega: f64,
    /// Cavity-laser detuning [rad/s]. Not part of the adiabatic mean field.
    #[serde(default)]
    pub delta_c: f64,
}

impl PhysicalParams {
    /// Checks every invariant and returns the parameters unchanged on success.
    pub fn validated(self) -> Result<Self> {
        match self.violations().into_iter().next() {
            None => Ok(self),
            Some(e) => Err(e),
        }
    }

    /// All invariant violations, in field order.
    pub fn violations(&self) -> Vec<Error> {
        let mut out = Vec::new();
        let positive = [
            ("m", self.m),
            ("omega_m", self.omega_m),
            ("g4", self.g4),
            ("lambda_l", self.lambda_l),
            ("P0", self.p0),
            ("gamma_c", self.gamma_c),
            ("Omega", self.omega),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                out.push(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {value}"),
                });
            }
        }
        if !(self.pa.is_finite() && self.pa >= 0.0) {
            out.push(Error::InvalidParameter {
                name: "PA",
                reason: format!("must be finite and >= 0, got {}", self.pa),
            });
        } else if self.pa > self.p0 {
            out.push(Error::InvalidParameter {
                name: "PA",
                reason: format!("epsilon > 1 (PA = {} > P0 = {})", self.pa, self.p0),
            });
        }
        if !self.delta_c.is_finite() {
            out.push(Error::InvalidParameter {
                name: "delta_c",
                reason: "must be finite".into(),
            });
        }
        out
    }

    /// Laser angular frequency ω_ℓ = 2πc/λ.
    pub fn omega_l(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.lambda_l
    }

    /// Mean intracavity photon number |α₀|² = 8 P0 / (ħ ω_ℓ γ_c).
    pub fn mean_photon_number(&self) -> f64 {
        8.0 * self.p0 / (HBAR * self.omega_l() * self.gamma_c)
    }

    /// Photon-number modulation amplitude |A|² = 8 PA / (ħ ω_ℓ γ_c).
    pub fn modulation_photon_number(&self) -> f64 {
        8.0 * self.pa / (HBAR * self.omega_l() * self.gamma_c)
    }

    /// Zero-point amplitude σ = √(ħ / 2 m ω_m).
    pub fn zero_point_amplitude(&self) -> f64 {
        (HBAR / (2.0 * self.m * self.omega_m)).sqrt()
    }
}

/// Adiabatically eliminated intracavity photon number at time `t` [s]:
/// |α(t)|² = |α₀|² + |A|² cos Ω t.
pub fn cavity_mean_field(p: &PhysicalParams, t: f64) -> f64 {
    p.mean_photon_number() + p.modulation_photon_number() * (p.omega * t).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams {
    pub kappa: f64,
    pub epsilon: f64,
    pub hbar_eff: f64,
    /// 𝓛 [m].
    pub length_scale: f64,
    /// τ = 1/Ω [s].
    pub time_scale: f64,
    /// σ [m].
    pub sigma_zpf: f64,
}

impl ScaledParams {
    pub fn to_scaled_position(&self, x: f64) -> f64 {
        x / self.length_scale
    }

    pub fn from_scaled_position(&self, x: f64) -> f64 {
        x * self.length_scale
    }

    pub fn to_scaled_time(&self, t: f64) -> f64 {
        t / self.time_scale
    }

    pub fn from_scaled_time(&self, t: f64) -> f64 {
        t * self.time_scale
    }
}

/// Effective Planck constant ħ_eff = 32 ħ g4 P0 / (m² ω_m² Ω ω_ℓ γ_c).
pub fn hbar_eff(p: &PhysicalParams) -> f64 {
    32.0 * HBAR * p.g4 * p.p0 / (p.m * p.m * p.omega_m * p.omega_m * p.omega * p.omega_l() * p.gamma_c)
}

/// Maps laboratory parameters onto (κ, ε, ħ_eff) and the scales 𝓛, τ.
pub fn scale(p: &PhysicalParams) -> Result<ScaledParams> {
    if !(p.p0 > 0.0) {
        return Err(Error::ZeroMeanField);
    }
    let sigma = p.zero_point_amplitude();
    let n0 = p.mean_photon_number();
    let length_scale = 1.0 / (sigma * (8.0 * p.g4 * n0 / p.omega_m).sqrt());
    Ok(ScaledParams {
        kappa: (p.omega_m * p.omega_m) / (p.omega * p.omega),
        epsilon: p.pa / p.p0,
        hbar_eff: hbar_eff(p),
        length_scale,
        time_scale: 1.0 / p.omega,
        sigma_zpf: sigma,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticityReport {
    pub gamma_over_omega_m: f64,
    /// γ_c / (g4 x⁴) with x the physical excursion.
    pub gamma_over_quartic_shift: f64,
    pub gamma_over_drive: f64,
    /// γ_c / |δ_c|, informational only; `None` when δ_c = 0.
    pub gamma_over_detuning: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
}

/// Compares γ_c with the mechanical, quartic and drive scales. `x_max` is the
/// largest excursion of interest in scaled units.
pub fn adiabaticity_check(p: &PhysicalParams, x_max: f64, threshold: f64) -> Result<AdiabaticityReport> {
    let scaled = scale(p)?;
    let x = scaled.from_scaled_position(x_max);
    let shift = p.g4 * x.powi(4);
    let gamma_over_omega_m = p.gamma_c / p.omega_m;
    let gamma_over_quartic_shift = p.gamma_c / shift;
    let gamma_over_drive = p.gamma_c / p.omega;
    let pass = [gamma_over_omega_m, gamma_over_quartic_shift, gamma_over_drive]
        .iter()
        .all(|r| *r > threshold);
    Ok(AdiabaticityReport {
        gamma_over_omega_m,
        gamma_over_quartic_shift,
        gamma_over_drive,
        gamma_over_detuning: (p.delta_c != 0.0).then(|| p.gamma_c / p.delta_c.abs()),
        threshold,
        pass,
    })
}

/// Parameters that can be swept in an ħ_eff map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "P0")]
    P0,
    #[serde(rename = "omega_m")]
    OmegaM,
    #[serde(rename = "Omega")]
    Omega,
    #[serde(rename = "gamma_c")]
    GammaC,
    #[serde(rename = "m")]
    Mass,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::P0 => "P0",
            SweepParam::OmegaM => "omega_m",
            SweepParam::Omega => "Omega",
            SweepParam::GammaC => "gamma_c",
            SweepParam::Mass => "m",
        }
    }

    fn set(self, p: &mut PhysicalParams, value: f64) {
        match self {
            SweepParam::P0 => p.p0 = value,
            SweepParam::OmegaM => p.omega_m = value,
            SweepParam::Omega => p.omega = value,
            SweepParam::GammaC => p.gamma_c = value,
            SweepParam::Mass => p.m = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub start: f64,
    pub end: f64,
    pub count: usize,
    /// Geometric spacing when true.
    #[serde(default)]
    pub log: bool,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|i| {
                    let f = i as f64 / (n - 1) as f64;
                    if self.log {
                        (self.start.ln() + f * (self.end.ln() - self.start.ln())).exp()
                    } else {
                        self.start + f * (self.end - self.start)
                    }
                })
                .collect(),
        }
    }
}

/// Ties applied after the axis values are substituted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    /// γ_c = ratio · ω_m.
    GammaRatio { ratio: f64 },
    /// Ω = ω_m / √κ.
    FixedKappa { kappa: f64 },
}

impl Constraint {
    fn determines(&self) -> SweepParam {
        match self {
            Constraint::GammaRatio { .. } => SweepParam::GammaC,
            Constraint::FixedKappa { .. } => SweepParam::Omega,
        }
    }

    fn apply(&self, p: &mut PhysicalParams) {
        match *self {
            Constraint::GammaRatio { ratio } => p.gamma_c = ratio * p.omega_m,
            Constraint::FixedKappa { kappa } => p.omega = p.omega_m / kappa.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeffSweep {
    pub axis1: SweepAxis,
    pub axis2: SweepAxis,
    pub base: PhysicalParams,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeffMap {
    pub axis1: SweepParam,
    pub axis2: SweepParam,
    pub values1: Vec<f64>,
    pub values2: Vec<f64>,
    /// Row-major, `axis1` outer.
    pub hbar_eff: Vec<f64>,
}

impl HeffMap {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.hbar_eff[i * self.values2.len() + j]
    }
}

impl HeffSweep {
    /// The full parameter set at one grid node, constraints applied.
    pub fn resolve(&self, v1: f64, v2: f64) -> PhysicalParams {
        let mut p = self.base;
        self.axis1.param.set(&mut p, v1);
        self.axis2.param.set(&mut p, v2);
        for c in &self.constraints {
            c.apply(&mut p);
        }
        p
    }

    /// Rejects sweeps where a parameter is both an axis and tied by a
    /// constraint, or tied twice.
    pub fn check(&self) -> Result<()> {
        if self.axis1.param == self.axis2.param {
            return Err(Error::DoublyDetermined(self.axis1.param.name()));
        }
        let mut determined = Vec::new();
        for c in &self.constraints {
            let target = c.determines();
            if target == self.axis1.param || target == self.axis2.param || determined.contains(&target) {
                return Err(Error::DoublyDetermined(target.name()));
            }
            determined.push(target);
        }
        Ok(())
    }
}

/// Evaluates ħ_eff over the sweep grid.
pub fn heff_map(sweep: &HeffSweep) -> Result<HeffMap> {
    sweep.check()?;
    let values1 = sweep.axis1.values();
    let values2 = sweep.axis2.values();
    let nodes: Vec<(f64, f64)> = values1
        .iter()
        .flat_map(|&a| values2.iter().map(move |&b| (a, b)))
        .collect();
    let hbar_eff = nodes.par_iter().map(|&(a, b)| hbar_eff(&sweep.resolve(a, b))).collect();
    Ok(HeffMap {
        axis1: sweep.axis1.param,
        axis2: sweep.axis2.param,
        values1,
        values2,
        hbar_eff,
    })
}

/// Flexible JSON form of [`PhysicalParams`]. Every angular frequency may be
/// given in rad/s under its field name, or in Hz under `<name>_hz`; γ_c may
/// instead be tied to ω_m via `gamma_c_ratio`, Ω may be derived from `kappa`
/// and PA from `epsilon`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSpec {
    pub m: Option<f64>,
    pub omega_m: Option<f64>,
    pub omega_m_hz: Option<f64>,
    pub g4: Option<f64>,
    /// g4/2π in Hz m⁻⁴.
    pub g4_hz: Option<f64>,
    pub lambda_l: Option<f64>,
    #[serde(rename = "P0")]
    pub p0: Option<f64>,
    #[serde(rename = "PA")]
    pub pa: Option<f64>,
    pub epsilon: Option<f64>,
    pub gamma_c: Option<f64>,
    pub gamma_c_hz: Option<f64>,
    pub gamma_c_ratio: Option<f64>,
    #[serde(rename = "Omega")]
    pub omega: Option<f64>,
    #[serde(rename = "Omega_hz")]
    pub omega_hz: Option<f64>,
    pub kappa: Option<f64>,
    pub delta_c: Option<f64>,
    pub delta_c_hz: Option<f64>,
}

fn pick(name: &'static str, options: &[(Option<f64>, f64)]) -> Result<Option<f64>> {
    let given: Vec<f64> = options.iter().filter_map(|(v, factor)| v.map(|v| v * factor)).collect();
    match given.len() {
        0 => Ok(None),
        1 => Ok(Some(given[0])),
        _ => Err(Error::DoublyDetermined(name)),
    }
}

fn required(name: &'static str, v: Option<f64>) -> Result<f64> {
    v.ok_or(Error::InvalidParameter {
        name,
        reason: "missing".into(),
    })
}

impl PhysicalSpec {
    /// Resolves the alternatives into SI parameters. Invariants are not
    /// checked here; call [`PhysicalParams::validated`].
    pub fn resolve(&self) -> Result<PhysicalParams> {
        let tau = 2.0 * PI;
        let m = required("m", self.m)?;
        let omega_m = required(
            "omega_m",
            pick("omega_m", &[(self.omega_m, 1.0), (self.omega_m_hz, tau)])?,
        )?;
        let g4 = required("g4", pick("g4", &[(self.g4, 1.0), (self.g4_hz, tau)])?)?;
        let lambda_l = required("lambda_l", self.lambda_l)?;
        let p0 = required("P0", self.p0)?;
        let pa = pick("PA", &[(self.pa, 1.0), (self.epsilon, p0)])?.unwrap_or(0.0);
        let gamma_c = required(
            "gamma_c",
            pick(
                "gamma_c",
                &[
                    (self.gamma_c, 1.0),
                    (self.gamma_c_hz, tau),
                    (self.gamma_c_ratio, omega_m),
                ],
            )?,
        )?;
        let omega = required(
            "Omega",
            pick(
                "Omega",
                &[
                    (self.omega, 1.0),
                    (self.omega_hz, tau),
                    (self.kappa.map(|k| 1.0 / k.sqrt()), omega_m),
                ],
            )?,
        )?;
        let delta_c = pick("delta_c", &[(self.delta_c, 1.0), (self.delta_c_hz, tau)])?.unwrap_or(0.0);
        Ok(PhysicalParams {
            m,
            omega_m,
            g4,
            lambda_l,
            p0,
            pa,
            gamma_c,
            omega,
            delta_c,
        })
    }
}
