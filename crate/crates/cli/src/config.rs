//! Experiment configuration: JSON schema, dotted-key overrides and
//! load-time validation.

use std::f64::consts::TAU;
use std::fmt;
use std::path::PathBuf;

use dyntun::analysis::DEFAULT_OVERLAP_FLOOR;
use dyntun::classical::{IntegratorConfig, PhaseWindow};
use dyntun::params::{scale, HeffSweep, PhysicalParams, PhysicalSpec};
use dyntun::quantum::{SpatialGrid, TimeStepping};
use dyntun::Scheme;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Scale,
    Poincare,
    Floquet,
    Husimi,
    Tunnel,
    HeffMap,
    Evolve,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Scale => "scale",
            Mode::Poincare => "poincare",
            Mode::Floquet => "floquet",
            Mode::Husimi => "husimi",
            Mode::Tunnel => "tunnel",
            Mode::HeffMap => "heff-map",
            Mode::Evolve => "evolve",
        }
    }

    fn is_quantum(self) -> bool {
        matches!(self, Mode::Floquet | Mode::Husimi | Mode::Tunnel | Mode::Evolve)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub physical: Option<PhysicalSpec>,
    #[serde(default)]
    pub scaled: Option<ScaledBlock>,
    #[serde(default)]
    pub grid: Option<SpatialGrid>,
    #[serde(default)]
    pub integrator: IntegratorBlock,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub scale: ScaleBlock,
    #[serde(default)]
    pub poincare: PoincareBlock,
    #[serde(default)]
    pub floquet: FloquetBlock,
    #[serde(default)]
    pub pair: PairBlock,
    #[serde(default)]
    pub husimi: HusimiBlock,
    #[serde(default)]
    pub tunnel: Option<TunnelBlock>,
    #[serde(default)]
    pub evolve: Option<EvolveBlock>,
    #[serde(default)]
    pub heff_map: Option<HeffSweep>,
}

/// Dimensionless model given directly. `hbar_eff` is only needed by the
/// quantum modes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaledBlock {
    pub kappa: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub hbar_eff: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorBlock {
    #[serde(default)]
    pub quantum: TimeStepping,
    #[serde(default)]
    pub classical: ClassicalStepping,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalStepping {
    pub steps_per_period: usize,
    #[serde(default)]
    pub scheme: Scheme,
}

impl Default for ClassicalStepping {
    fn default() -> Self {
        Self {
            steps_per_period: dyntun::classical::DEFAULT_STEPS_PER_PERIOD,
            scheme: Scheme::default(),
        }
    }
}

impl ClassicalStepping {
    pub fn config(&self) -> IntegratorConfig {
        IntegratorConfig {
            dt: TAU / self.steps_per_period as f64,
            scheme: self.scheme,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleBlock {
    /// Largest scaled excursion for the adiabaticity check; the island
    /// centre when absent.
    #[serde(default)]
    pub x_excursion: Option<f64>,
    #[serde(default = "default_threshold")]
    pub adiabatic_threshold: f64,
}

fn default_threshold() -> f64 {
    dyntun::params::DEFAULT_ADIABATIC_THRESHOLD
}

impl Default for ScaleBlock {
    fn default() -> Self {
        Self {
            x_excursion: None,
            adiabatic_threshold: default_threshold(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoincareBlock {
    #[serde(default = "default_section_window")]
    pub window: PhaseWindow,
    #[serde(default = "default_section_resolution")]
    pub resolution: (usize, usize),
    #[serde(default = "default_section_periods")]
    pub n_periods: usize,
    /// Also locate the two period-one islands.
    #[serde(default = "yes")]
    pub islands: bool,
}

fn default_section_window() -> PhaseWindow {
    PhaseWindow::symmetric(3.0, 3.0)
}

fn default_section_resolution() -> (usize, usize) {
    (40, 40)
}

fn default_section_periods() -> usize {
    300
}

fn yes() -> bool {
    true
}

impl Default for PoincareBlock {
    fn default() -> Self {
        Self {
            window: default_section_window(),
            resolution: default_section_resolution(),
            n_periods: default_section_periods(),
            islands: true,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetBlock {
    /// Spectrum indices whose states are written as `x,re,im` CSV.
    #[serde(default)]
    pub dump_states: Vec<usize>,
}

/// How the tunnelling pair is selected.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairBlock {
    /// Island centre; located classically when absent.
    #[serde(default)]
    pub island: Option<(f64, f64)>,
    /// Coherent-state width; √(ħ_eff/2) when absent.
    #[serde(default)]
    pub width: Option<f64>,
    #[serde(default = "default_floor")]
    pub overlap_floor: f64,
}

fn default_floor() -> f64 {
    DEFAULT_OVERLAP_FLOOR
}

impl Default for PairBlock {
    fn default() -> Self {
        Self {
            island: None,
            width: None,
            overlap_floor: default_floor(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairMember {
    U,
    V,
    Plus,
    Minus,
}

/// A named member of the tunnelling pair or a spectrum index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Target {
    Index(usize),
    Named(PairMember),
}

impl Target {
    pub fn label(&self) -> String {
        match self {
            Target::Index(i) => format!("{i:04}"),
            Target::Named(m) => serde_json::to_value(m).unwrap().as_str().unwrap().to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HusimiBlock {
    #[serde(default = "default_husimi_window")]
    pub window: PhaseWindow,
    #[serde(default = "default_husimi_resolution")]
    pub resolution: (usize, usize),
    #[serde(default)]
    pub width: Option<f64>,
    #[serde(default = "default_targets")]
    pub targets: Vec<Target>,
}

fn default_husimi_window() -> PhaseWindow {
    PhaseWindow::symmetric(4.0, 4.0)
}

fn default_husimi_resolution() -> (usize, usize) {
    (161, 161)
}

fn default_targets() -> Vec<Target> {
    vec![Target::Named(PairMember::U), Target::Named(PairMember::V)]
}

impl Default for HusimiBlock {
    fn default() -> Self {
        Self {
            window: default_husimi_window(),
            resolution: default_husimi_resolution(),
            width: None,
            targets: default_targets(),
        }
    }
}

/// Initial wave function; positions default to the island centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Φ₊ of the tunnelling pair.
    Plus,
    /// Φ₋ of the tunnelling pair.
    Minus,
    Coherent {
        #[serde(default)]
        x0: Option<f64>,
        #[serde(default)]
        p0: Option<f64>,
        #[serde(default)]
        width: Option<f64>,
    },
    /// Ground state of p²/2 + κ_ini x²/2, displaced.
    Harmonic {
        kappa_ini: f64,
        #[serde(default)]
        x0: Option<f64>,
        #[serde(default)]
        p0: Option<f64>,
    },
}

impl InitialState {
    pub fn needs_pair(&self) -> bool {
        matches!(self, InitialState::Plus | InitialState::Minus)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TunnelBlock {
    pub s_max: usize,
    #[serde(default = "default_tunnel_initial")]
    pub initial: InitialState,
}

fn default_tunnel_initial() -> InitialState {
    InitialState::Plus
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveBlock {
    pub s_max: usize,
    #[serde(default = "default_evolve_initial")]
    pub initial: InitialState,
}

fn default_evolve_initial() -> InitialState {
    InitialState::Coherent {
        x0: None,
        p0: None,
        width: None,
    }
}

/// One invariant violation, addressed by dotted key.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub key: String,
    pub message: String,
    /// 1-based line in the config file, when the key occurs there.
    pub line: Option<usize>,
}

impl Issue {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
            line: None,
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "{line}: ")?;
        }
        if self.key.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.key, self.message)
        }
    }
}

/// (κ, ε, ħ_eff) together with the laboratory set they came from.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Model {
    pub kappa: f64,
    pub epsilon: f64,
    pub hbar_eff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalParams>,
}

impl ExperimentConfig {
    /// The model triple. Assumes [`validate`](Self::validate) passed.
    pub fn model(&self) -> Option<Model> {
        if let Some(spec) = &self.physical {
            let p = spec.resolve().ok()?;
            let s = scale(&p).ok()?;
            return Some(Model {
                kappa: s.kappa,
                epsilon: s.epsilon,
                hbar_eff: Some(s.hbar_eff),
                physical: Some(p),
            });
        }
        self.scaled.map(|s| Model {
            kappa: s.kappa,
            epsilon: s.epsilon,
            hbar_eff: s.hbar_eff,
            physical: None,
        })
    }

    /// Every invariant violation for running `mode`, without computing.
    pub fn validate(&self, mode: Mode) -> Vec<Issue> {
        let mut out = Vec::new();
        if let Some(m) = self.mode {
            if m != mode {
                out.push(Issue::new(
                    "mode",
                    format!("config is for `{}` but `{}` was requested", m.as_str(), mode.as_str()),
                ));
            }
        }
        if mode == Mode::HeffMap {
            self.check_sweep(&mut out);
            return out;
        }
        match (&self.physical, &self.scaled) {
            (Some(_), Some(_)) => out.push(Issue::new("", "give exactly one of `physical` and `scaled`, not both")),
            (None, None) => out.push(Issue::new("", "missing parameter block: give `physical` or `scaled`")),
            _ => {}
        }
        if let Some(spec) = &self.physical {
            check_physical(spec, "physical", &mut out);
        }
        if let Some(s) = &self.scaled {
            if mode == Mode::Scale {
                out.push(Issue::new("scaled", "mode scale needs a `physical` block"));
            }
            if !(s.kappa.is_finite() && s.kappa > 0.0) {
                out.push(Issue::new(
                    "scaled.kappa",
                    format!("must be finite and > 0, got {}", s.kappa),
                ));
            }
            if !(s.epsilon.is_finite() && s.epsilon >= 0.0) {
                out.push(Issue::new(
                    "scaled.epsilon",
                    format!("must be finite and >= 0, got {}", s.epsilon),
                ));
            }
            match s.hbar_eff {
                Some(h) if !(h.is_finite() && h > 0.0) => out.push(Issue::new(
                    "scaled.hbar_eff",
                    format!("must be finite and > 0, got {h}"),
                )),
                None if mode.is_quantum() => out.push(Issue::new(
                    "scaled.hbar_eff",
                    format!("missing (required for mode {})", mode.as_str()),
                )),
                _ => {}
            }
        }
        let c = &self.integrator.classical;
        if c.steps_per_period == 0 {
            out.push(Issue::new("integrator.classical.steps_per_period", "must be > 0"));
        }
        match mode {
            Mode::Scale => {
                if let Some(x) = self.scale.x_excursion {
                    if !(x.is_finite() && x > 0.0) {
                        out.push(Issue::new(
                            "scale.x_excursion",
                            format!("must be finite and > 0, got {x}"),
                        ));
                    }
                }
                if !(self.scale.adiabatic_threshold > 0.0) {
                    out.push(Issue::new("scale.adiabatic_threshold", "must be > 0"));
                }
            }
            Mode::Poincare => {
                let b = &self.poincare;
                check_window(&b.window, "poincare.window", &mut out);
                if b.resolution.0 == 0 || b.resolution.1 == 0 {
                    out.push(Issue::new("poincare.resolution", "both counts must be >= 1"));
                }
            }
            _ => {}
        }
        if mode.is_quantum() {
            self.check_quantum(mode, &mut out);
        }
        out
    }

    fn check_quantum(&self, mode: Mode, out: &mut Vec<Issue>) {
        match self.grid {
            None => out.push(Issue::new(
                "grid",
                format!("missing grid block (required for mode {})", mode.as_str()),
            )),
            Some(g) => {
                if let Err(e) = SpatialGrid::new(g.n, g.x_max) {
                    out.push(Issue::new("grid", e.to_string()));
                }
            }
        }
        if self.integrator.quantum.steps_per_period == 0 {
            out.push(Issue::new("integrator.quantum.steps_per_period", "must be > 0"));
        }
        let pair = &self.pair;
        if let Some(w) = pair.width {
            if !(w.is_finite() && w > 0.0) {
                out.push(Issue::new("pair.width", format!("must be finite and > 0, got {w}")));
            }
        }
        if !(pair.overlap_floor >= 0.0 && pair.overlap_floor <= 1.0) {
            out.push(Issue::new("pair.overlap_floor", "must lie in [0, 1]"));
        }
        match mode {
            Mode::Husimi => {
                let h = &self.husimi;
                check_window(&h.window, "husimi.window", out);
                if h.resolution.0 < 2 || h.resolution.1 < 2 {
                    out.push(Issue::new("husimi.resolution", "both counts must be >= 2"));
                }
                if h.targets.is_empty() {
                    out.push(Issue::new("husimi.targets", "at least one target is required"));
                }
                if let Some(w) = h.width {
                    if !(w.is_finite() && w > 0.0) {
                        out.push(Issue::new("husimi.width", format!("must be finite and > 0, got {w}")));
                    }
                }
            }
            Mode::Tunnel => match &self.tunnel {
                None => out.push(Issue::new("tunnel", "missing tunnel block (required for mode tunnel)")),
                Some(t) => check_initial(&t.initial, "tunnel.initial", out),
            },
            Mode::Evolve => match &self.evolve {
                None => out.push(Issue::new("evolve", "missing evolve block (required for mode evolve)")),
                Some(e) => check_initial(&e.initial, "evolve.initial", out),
            },
            _ => {}
        }
    }

    fn check_sweep(&self, out: &mut Vec<Issue>) {
        let Some(sweep) = &self.heff_map else {
            out.push(Issue::new(
                "heff_map",
                "missing heff_map block (required for mode heff-map)",
            ));
            return;
        };
        if let Err(e) = sweep.check() {
            out.push(Issue::new("heff_map.constraints", e.to_string()));
        }
        for (name, axis) in [("axis1", &sweep.axis1), ("axis2", &sweep.axis2)] {
            let key = format!("heff_map.{name}");
            if axis.count == 0 {
                out.push(Issue::new(format!("{key}.count"), "must be >= 1"));
            }
            if !(axis.start.is_finite() && axis.end.is_finite() && axis.start > 0.0 && axis.end > 0.0) {
                out.push(Issue::new(key, "start and end must be finite and > 0"));
            }
        }
        for e in sweep.base.violations() {
            out.push(Issue::new("heff_map.base", e.to_string()));
        }
    }
}

fn check_physical(spec: &PhysicalSpec, key: &str, out: &mut Vec<Issue>) {
    match spec.resolve() {
        Err(e) => out.push(Issue::new(key, e.to_string())),
        Ok(p) => {
            for e in p.violations() {
                let field = match &e {
                    dyntun::Error::InvalidParameter { name, .. } => format!("{key}.{name}"),
                    _ => key.to_string(),
                };
                out.push(Issue::new(field, e.to_string()));
            }
        }
    }
}

fn check_window(w: &PhaseWindow, key: &str, out: &mut Vec<Issue>) {
    if !(w.x_min < w.x_max && w.p_min < w.p_max) {
        out.push(Issue::new(key, "needs x_min < x_max and p_min < p_max"));
    }
}

fn check_initial(init: &InitialState, key: &str, out: &mut Vec<Issue>) {
    match *init {
        InitialState::Harmonic { kappa_ini, .. } if !(kappa_ini.is_finite() && kappa_ini > 0.0) => {
            out.push(Issue::new(
                format!("{key}.kappa_ini"),
                format!("must be finite and > 0, got {kappa_ini}"),
            ))
        }
        InitialState::Coherent { width: Some(w), .. } if !(w.is_finite() && w > 0.0) => out.push(Issue::new(
            format!("{key}.width"),
            format!("must be finite and > 0, got {w}"),
        )),
        _ => {}
    }
}

/// Sets the leaf addressed by `dotted` to `raw`, parsed as JSON when
/// possible and as a string otherwise. Missing objects are created.
pub fn apply_override(root: &mut Value, dotted: &str, raw: &str) -> Result<(), String> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let segments: Vec<&str> = dotted.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(format!("malformed key `{dotted}`"));
    }
    let mut node = root;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(seg.to_string(), value);
                    return Ok(());
                }
                map.entry(seg.to_string())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = seg.parse().map_err(|_| {
                    format!(
                        "`{}` indexes an array; `{seg}` is not an index",
                        segments[..i].join(".")
                    )
                })?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| format!("index {idx} out of range (length {len}) in `{dotted}`"))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(format!("`{}` is not an object", segments[..i].join("."))),
        };
    }
    unreachable!("loop returns on the last segment")
}

/// 1-based line of the last segment of `dotted`, found by scanning for each
/// quoted key in turn.
pub fn locate(text: &str, dotted: &str) -> Option<usize> {
    if dotted.is_empty() {
        return None;
    }
    let mut from = 0;
    for seg in dotted.split('.') {
        let needle = format!("\"{seg}\"");
        let mut search = from;
        loop {
            let hit = search + text[search..].find(&needle)?;
            let after = text[hit + needle.len()..].trim_start();
            if after.starts_with(':') {
                from = hit;
                break;
            }
            search = hit + needle.len();
        }
    }
    Some(text[..from].matches('\n').count() + 1)
}
