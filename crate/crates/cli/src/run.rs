//! Mode runners. Each writes its files through [`Outputs`] and records the
//! derived inputs it used.

use std::io;

use dyntun::analysis::{
    approx_initial_state, coherent_state, combine_pair, default_width, find_tunnelling_pair, husimi,
    measure_tunnelling, PeriodEstimate, Sign, TunnellingPair,
};
use dyntun::classical::{seed_lattice, DrivenQuartic, NewtonOptions};
use dyntun::io as dio;
use dyntun::params::{adiabaticity_check, heff_map, scale};
use dyntun::quantum::{
    build_propagator, check_momentum_tail, floquet_decompose, stroboscopic_density, FloquetSpectrum, QuantumModel,
    SpatialGrid, SplitStepPropagator, WaveFunction,
};
use serde::Serialize;

use crate::config::{ExperimentConfig, InitialState, Mode, Model, PairMember, Target};
use crate::manifest::Outputs;

#[derive(Debug)]
pub enum RunError {
    Numeric(dyntun::Error),
    Io(io::Error),
}

impl From<dyntun::Error> for RunError {
    fn from(e: dyntun::Error) -> Self {
        RunError::Numeric(e)
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Numeric(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

type Result<T> = std::result::Result<T, RunError>;

/// Runs `mode`; `cfg` must have passed validation for it.
pub fn run(mode: Mode, cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    if mode == Mode::HeffMap {
        return run_heff_map(cfg, out);
    }
    let model = cfg.model().expect("validated config has a model");
    out.resolve("model", &model);
    match mode {
        Mode::Scale => run_scale(cfg, &model, out),
        Mode::Poincare => run_poincare(cfg, &model, out),
        Mode::Floquet => run_floquet(cfg, &model, out),
        Mode::Husimi => run_husimi(cfg, &model, out),
        Mode::Tunnel => run_tunnel(cfg, &model, out),
        Mode::Evolve => run_evolve(cfg, &model, out),
        Mode::HeffMap => unreachable!(),
    }
}

fn island(cfg: &ExperimentConfig, model: &Model, out: &mut Outputs) -> Result<(f64, f64)> {
    let center = match cfg.pair.island {
        Some(c) => c,
        None => {
            let fp = DrivenQuartic::new(model.kappa, model.epsilon)
                .locate_right_island(&cfg.integrator.classical.config())?;
            (fp.x0, fp.p0)
        }
    };
    out.resolve("island", &center);
    Ok(center)
}

struct Quantum {
    grid: SpatialGrid,
    hbar: f64,
    prop: SplitStepPropagator,
}

fn quantum(cfg: &ExperimentConfig, model: &Model, out: &mut Outputs) -> Result<Quantum> {
    let grid = cfg.grid.expect("validated quantum config has a grid");
    let grid = SpatialGrid::new(grid.n, grid.x_max)?;
    let hbar = model.hbar_eff.expect("validated quantum config has hbar_eff");
    let stepping = cfg.integrator.quantum;
    out.resolve("grid", &grid);
    out.resolve("stepping", &stepping);
    let prop = SplitStepPropagator::new(QuantumModel::driven(model.kappa, model.epsilon, hbar), grid, stepping)?;
    Ok(Quantum { grid, hbar, prop })
}

fn spectrum(q: &Quantum, out: &mut Outputs) -> Result<FloquetSpectrum> {
    let blocks = build_propagator(&q.prop)?;
    out.warnings.extend(blocks.warnings.iter().map(|w| w.to_string()));
    out.resolve("unitarity_defect", &blocks.unitarity_defect());
    out.resolve("parity_leakage", &blocks.parity_leakage);
    Ok(floquet_decompose(&blocks)?)
}

fn pair(
    cfg: &ExperimentConfig,
    model: &Model,
    q: &Quantum,
    spec: &FloquetSpectrum,
    out: &mut Outputs,
) -> Result<TunnellingPair> {
    let center = island(cfg, model, out)?;
    let width = cfg.pair.width.unwrap_or_else(|| default_width(q.hbar));
    let pair = find_tunnelling_pair(spec, center, width, cfg.pair.overlap_floor)?;
    out.write("pair.json", |w| dio::write_pair_json(w, &pair))?;
    Ok(pair)
}

fn initial_state(
    init: &InitialState,
    q: &Quantum,
    center: Option<(f64, f64)>,
    pair: Option<&TunnellingPair>,
) -> Result<WaveFunction> {
    let at = |x: Option<f64>, p: Option<f64>| {
        let c = center.unwrap_or((0.0, 0.0));
        (x.unwrap_or(c.0), p.unwrap_or(c.1))
    };
    Ok(match *init {
        InitialState::Plus => combine_pair(pair.expect("pair built for plus"), Sign::Plus),
        InitialState::Minus => combine_pair(pair.expect("pair built for minus"), Sign::Minus),
        InitialState::Coherent { x0, p0, width } => {
            let (x, p) = at(x0, p0);
            coherent_state(x, p, width.unwrap_or_else(|| default_width(q.hbar)), q.hbar, q.grid)?
        }
        InitialState::Harmonic { kappa_ini, x0, p0 } => approx_initial_state(kappa_ini, q.hbar, q.grid, at(x0, p0))?,
    })
}

/// Whether `init` falls back to the island centre for its position.
fn needs_center(init: &InitialState) -> bool {
    match *init {
        InitialState::Plus | InitialState::Minus => true,
        InitialState::Coherent { x0, p0, .. } | InitialState::Harmonic { x0, p0, .. } => x0.is_none() || p0.is_none(),
    }
}

#[derive(Serialize)]
struct ScaleRecord<'a> {
    physical: &'a dyntun::params::PhysicalParams,
    scaled: dyntun::params::ScaledParams,
    mean_photon_number: f64,
    modulation_photon_number: f64,
    x_excursion: f64,
    adiabaticity: dyntun::params::AdiabaticityReport,
}

fn run_scale(cfg: &ExperimentConfig, model: &Model, out: &mut Outputs) -> Result<()> {
    let p = model.physical.as_ref().expect("validated scale config has physical");
    let scaled = scale(p)?;
    out.resolve("scaled", &scaled);
    let x_excursion = match cfg.scale.x_excursion {
        Some(x) => x,
        None => island(cfg, model, out)?.0,
    };
    let adiabaticity = adiabaticity_check(p, x_excursion, cfg.scale.adiabatic_threshold)?;
    if !adiabaticity.pass {
        out.flags.push("adiabaticity check failed".into());
    }
    let record = ScaleRecord {
        physical: p,
        scaled,
        mean_photon_number: p.mean_photon_number(),
        modulation_photon_number: p.modulation_photon_number(),
        x_excursion,
        adiabaticity,
    };
    out.write("scaled.json", |w| dio::write_json(w, &record))?;
    Ok(())
}

fn run_poincare(cfg: &ExperimentConfig, model: &Model, out: &mut Outputs) -> Result<()> {
    let b = &cfg.poincare;
    let ic = cfg.integrator.classical.config();
    let sys = DrivenQuartic::new(model.kappa, model.epsilon);
    let seeds = seed_lattice(b.window, b.resolution);
    let section = sys.poincare_section(&seeds, b.n_periods, &ic);
    let escaped = section.escaped.iter().filter(|e| e.is_some()).count();
    if escaped > 0 {
        out.warnings.push(format!("{escaped} of {} seeds escaped", seeds.len()));
    }
    out.write("poincare.csv", |w| dio::write_poincare_csv(w, &section))?;
    if b.islands {
        let mut points = Vec::new();
        match sys.locate_right_island(&ic) {
            Ok(right) => {
                let left = sys.find_period_one_island((-right.x0, -right.p0), &ic, &NewtonOptions::default());
                points.push(right);
                match left {
                    Ok(l) => points.push(l),
                    Err(e) => out.warnings.push(format!("left island: {e}")),
                }
            }
            Err(e) => out.warnings.push(format!("right island: {e}")),
        }
        out.write("fixed_points.json", |w| dio::write_fixed_points_json(w, &points))?;
    }
    Ok(())
}

fn run_floquet(cfg: &ExperimentConfig, model: &Model, out: &mut Outputs) -> Result<()> {
    let q = quantum(cfg, model, out)?;
    let spec = spectrum(&q, out)?;
    out.write("spectrum.json", |w| dio::write_spectrum_json(w, &spec))?;
    for &i in &cfg.floquet.dump_states {
        let Some(st) = spec.states.get(i) else {
            out.warnings
                .push(format!("dump_states: index {i} beyond spectrum size {}", spec.len()));
            continue;
        };
        out.write(&format!("state_{i:04}.csv"), |w| {
            dio::write_wavefunction_csv(w, &st.state)
        })?;
    }
    Ok(())
}

fn run_husimi(cfg: &ExperimentConfig, model: &Model, out: &mut Outputs) -> Result<()> {
    let q = quantum(cfg, model, out)?;
    let spec = spectrum(&q, out)?;
    let needs_pair = cfg.husimi.targets.iter().any(|t| matches!(t, Target::Named(_)));
    let pair = if needs_pair {
        Some(pair(cfg, model, &q, &spec, out)?)
    } else {
        None
    };
    let h = &cfg.husimi;
    let width = h.width.or(cfg.pair.width).unwrap_or_else(|| default_width(q.hbar));
    for target in &h.targets {
        let state = match *target {
            Target::Index(i) => match spec.states.get(i) {
                Some(s) => s.state.clone(),
                None => {
                    out.warnings
                        .push(format!("husimi target {i} beyond spectrum size {}", spec.len()));
                    continue;
                }
            },
            Target::Named(m) => {
                let p = pair.as_ref().expect("pair built for named targets");
                match m {
                    PairMember::U => spec.states[p.u].state.clone(),
                    PairMember::V => spec.states[p.v].state.clone(),
                    PairMember::Plus => combine_pair(p, Sign::Plus),
                    PairMember::Minus => combine_pair(p, Sign::Minus),
                }
            }
        };
        let map = husimi(&state, h.window, h.resolution, width, q.hbar);
        out.write(&format!("husimi_{}.csv", target.label()), |w| {
            dio::write_husimi_csv(w, &map)
        })?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TunnelRecord {
    s_max: usize,
    estimate: PeriodEstimate,
    cosine_fit_periods: Option<f64>,
    /// 2πħ_eff / splitting, in drive periods.
    predicted_periods: Option<f64>,
    initial_overlap_plus: f64,
}

fn run_tunnel(cfg: &ExperimentConfig, model: &Model, out: &mut Outputs) -> Result<()> {
    let t = cfg.tunnel.expect("validated tunnel config has a tunnel block");
    let q = quantum(cfg, model, out)?;
    let spec = spectrum(&q, out)?;
    let pair = pair(cfg, model, &q, &spec, out)?;
    let center = island(cfg, model, out)?;
    let psi0 = initial_state(&t.initial, &q, Some(center), Some(&pair))?;
    let series = measure_tunnelling(&q.prop, &psi0, &pair, t.s_max)?;
    if series.estimate == PeriodEstimate::NoEvolutionRequested {
        out.flags.push("no evolution requested".into());
    }
    if let PeriodEstimate::ExceedsHorizon { .. } = series.estimate {
        out.flags.push("period exceeds horizon".into());
    }
    out.write("tunnelling.csv", |w| dio::write_tunnelling_csv(w, &series))?;
    let record = TunnelRecord {
        s_max: t.s_max,
        estimate: series.estimate,
        cosine_fit_periods: series.cosine_fit,
        predicted_periods: pair.t_tun.map(|t| t / std::f64::consts::TAU),
        initial_overlap_plus: combine_pair(&pair, Sign::Plus).inner(&psi0).norm_sqr(),
    };
    out.write("tunnelling.json", |w| dio::write_json(w, &record))?;
    Ok(())
}

#[derive(Serialize)]
struct EvolveRecord {
    s_max: usize,
    max_norm_drift: f64,
    final_mean_position: f64,
    final_right_weight: f64,
}

fn run_evolve(cfg: &ExperimentConfig, model: &Model, out: &mut Outputs) -> Result<()> {
    let e = cfg.evolve.expect("validated evolve config has an evolve block");
    let q = quantum(cfg, model, out)?;
    let (center, pair) = if e.initial.needs_pair() {
        let spec = spectrum(&q, out)?;
        let p = pair(cfg, model, &q, &spec, out)?;
        (Some(island(cfg, model, out)?), Some(p))
    } else if needs_center(&e.initial) {
        (Some(island(cfg, model, out)?), None)
    } else {
        (None, None)
    };
    let psi0 = initial_state(&e.initial, &q, center, pair.as_ref())?;
    if e.s_max == 0 {
        out.flags.push("no evolution requested".into());
    }
    let (density, last) = stroboscopic_density(&q.prop, &psi0, e.s_max)?;
    if let Some(w) = check_momentum_tail(&last) {
        out.warnings.push(w.to_string());
    }
    out.write("density.csv", |w| dio::write_density_csv(w, &density))?;
    out.write("final_state.csv", |w| dio::write_wavefunction_csv(w, &last))?;
    let record = EvolveRecord {
        s_max: e.s_max,
        max_norm_drift: density.norm_drift.iter().copied().fold(0.0, f64::max),
        final_mean_position: last.mean_position(),
        final_right_weight: last.right_weight(),
    };
    out.write("evolve.json", |w| dio::write_json(w, &record))?;
    Ok(())
}

fn run_heff_map(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let sweep = cfg.heff_map.as_ref().expect("validated heff-map config has a sweep");
    let map = heff_map(sweep)?;
    out.write("heff_map.csv", |w| dio::write_heff_csv(w, &map))?;
    out.write("heff_map.json", |w| {
        dio::write_json(w, &dio::HeffSidecar::new(sweep, &map))
    })?;
    Ok(())
}
