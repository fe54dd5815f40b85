//! Acceptance gate. Each criterion runs at its stated tolerance and prints a
//! single PASS/FAIL line; the test fails if any criterion fails.
//!
//! Run with `cargo test -p dyntun --test acceptance -- --nocapture` to see the
//! report.

mod common;

use std::f64::consts::TAU;
use std::io::Write;
use std::time::Instant;

use dyntun::analysis::{
    approx_initial_state, coherent_state, default_width, find_tunnelling_pair, husimi, measure_tunnelling,
    PeriodEstimate, Sign, TunnellingPair, DEFAULT_OVERLAP_FLOOR,
};
use dyntun::classical::{
    energy, seed_lattice, DrivenQuartic, FixedPoint, IntegratorConfig, NewtonOptions, PhaseWindow, Stability,
};
use dyntun::params::{heff_map, scale};
use dyntun::quantum::{
    build_propagator, floquet_decompose, stroboscopic_density, FloquetSpectrum, Parity, PropagatorBlocks, QuantumModel,
    SpatialGrid, SplitStepPropagator, TimeStepping,
};

const KAPPA: f64 = 1.2;
const EPSILON: f64 = 0.9;

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

/// The driven system at one ħ_eff with its Floquet data and tunnelling pair.
struct DrivenCase {
    hbar: f64,
    prop: SplitStepPropagator,
    blocks: PropagatorBlocks,
    spectrum: FloquetSpectrum,
    pair: TunnellingPair,
}

impl DrivenCase {
    fn new(hbar: f64, island: &FixedPoint) -> Self {
        let prop = SplitStepPropagator::new(
            QuantumModel::driven(KAPPA, EPSILON, hbar),
            SpatialGrid::default(),
            TimeStepping::default(),
        )
        .unwrap();
        let blocks = build_propagator(&prop).unwrap();
        let spectrum = floquet_decompose(&blocks).unwrap();
        let pair = find_tunnelling_pair(
            &spectrum,
            (island.x0, island.p0),
            default_width(hbar),
            DEFAULT_OVERLAP_FLOOR,
        )
        .unwrap();
        Self {
            hbar,
            prop,
            blocks,
            spectrum,
            pair,
        }
    }

    /// Periods of direct evolution that cover 3/4 of the predicted period.
    fn horizon(&self) -> usize {
        (0.75 * self.pair.t_tun.expect("resolvable pair") / TAU).ceil() as usize
    }
}

fn max_modulus_defect(spectrum: &FloquetSpectrum) -> f64 {
    spectrum
        .eigenvalue_moduli()
        .iter()
        .map(|m| (m - 1.0).abs())
        .fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let a = scale(&common::worked_set_small()).unwrap().hbar_eff;
    let b = scale(&common::worked_set_large()).unwrap().hbar_eff;
    let (ra, rb) = (common::rel(a, 6.7e-15), common::rel(b, 0.042));
    Outcome {
        id: 1,
        title: "hbar_eff reproduction",
        pass: ra < 0.03 && rb < 0.03,
        detail: format!(
            "set 1 {a:.4e} (target 6.7e-15, rel {ra:.2e}); set 2 {b:.5} (target 0.042, rel {rb:.2e}); tol 3%"
        ),
    }
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let map = heff_map(&common::tunability_slice(101)).unwrap();
    let elapsed = t.elapsed();
    let first = map.get(0, 0);
    let last = map.get(map.values1.len() - 1, 0);
    let (r_lo, r_hi) = (common::rel(first, 0.001), common::rel(last, 0.1));
    Outcome {
        id: 2,
        title: "hbar_eff map slice",
        pass: r_lo < 0.05 && r_hi < 0.05 && elapsed.as_secs_f64() < 1.0,
        detail: format!(
            "P0 12 uW -> 1.2 mW gives {first:.5e} .. {last:.5e} (rel {r_lo:.2e}, {r_hi:.2e}; tol 5%) in {elapsed:?}"
        ),
    }
}

fn criterion_3(hbar: f64, blocks: &PropagatorBlocks, spectrum: &FloquetSpectrum) -> Outcome {
    let oracle = common::static_spectrum(KAPPA, hbar, blocks.grid);
    let mismatch = common::folded_mismatch(&oracle, &spectrum.quasi_energies(), &spectrum.parities(), hbar, 20);
    Outcome {
        id: 3,
        title: "Floquet vs static oracle",
        pass: mismatch < 1e-6 * hbar,
        detail: format!(
            "lowest 20 folded levels, max deviation {:.3e} hbar_eff (tol 1e-6)",
            mismatch / hbar
        ),
    }
}

fn criterion_4(
    static_spectrum: &FloquetSpectrum,
    static_blocks: &PropagatorBlocks,
    case: &DrivenCase,
    island: &FixedPoint,
) -> Outcome {
    let moduli = max_modulus_defect(static_spectrum).max(max_modulus_defect(&case.spectrum));
    let leakage = static_blocks.parity_leakage.max(case.blocks.parity_leakage);
    let psi0 = coherent_state(
        island.x0,
        island.p0,
        default_width(case.hbar),
        case.hbar,
        SpatialGrid::default(),
    )
    .unwrap();
    let (density, _) = stroboscopic_density(&case.prop, &psi0, 20).unwrap();
    let drift = density
        .norm_drift
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(density.norm_drift[0], f64::max);
    Outcome {
        id: 4,
        title: "unitarity and norm",
        pass: moduli < 1e-8 && drift < 1e-10 && leakage < 1e-10,
        detail: format!(
            "max ||xi|-1| {moduli:.2e} (tol 1e-8); norm drift per period {drift:.2e} (tol 1e-10); parity leakage {leakage:.2e} (tol 1e-10)"
        ),
    }
}

fn criterion_5(case: &DrivenCase) -> (Outcome, Option<f64>) {
    let predicted = case.pair.t_tun.unwrap() / TAU;
    let plus = case.pair.combine(Sign::Plus);
    let series = measure_tunnelling(&case.prop, &plus, &case.pair, case.horizon()).unwrap();
    let measured = match series.estimate {
        PeriodEstimate::FirstMinimum { periods } => Some(periods),
        _ => None,
    };
    let r = measured.map(|m| common::rel(m, predicted));
    (
        Outcome {
            id: 5,
            title: "tunnelling self-consistency",
            pass: r.is_some_and(|r| r < 0.02),
            detail: format!(
                "predicted {predicted:.4} periods, direct first-minimum x2 {:?} ({:?}); rel {r:?}; tol 2%",
                measured, series.estimate
            ),
        },
        measured,
    )
}

fn criterion_6(reference: Option<f64>, island: &FixedPoint) -> Outcome {
    let Some(reference) = reference else {
        return Outcome {
            id: 6,
            title: "hbar_eff trend",
            pass: false,
            detail: "no reference period from criterion 5".into(),
        };
    };
    let case = DrivenCase::new(0.05, island);
    // P+ not crossing its midpoint within H periods bounds the period below by 2H
    let horizon = (10.0 * reference / 2.0).ceil() as usize;
    let plus = case.pair.combine(Sign::Plus);
    let series = measure_tunnelling(&case.prop, &plus, &case.pair, horizon).unwrap();
    let predicted_ratio = case.pair.t_tun.unwrap() / TAU / reference;
    let (pass, how) = match series.estimate {
        PeriodEstimate::ExceedsHorizon { horizon } => (
            2.0 * horizon as f64 > 10.0 * reference,
            format!(
                "period exceeds horizon of {horizon} periods, so ratio > {:.2}",
                2.0 * horizon as f64 / reference
            ),
        ),
        e => match e.periods() {
            Some(p) => (
                p / reference > 10.0,
                format!("fitted {p:.1} periods, ratio {:.2}", p / reference),
            ),
            None => (false, format!("{e:?}")),
        },
    };
    Outcome {
        id: 6,
        title: "hbar_eff trend",
        pass,
        detail: format!("hbar_eff 0.05 vs 0.5: {how}; splitting-based ratio {predicted_ratio:.0}; need > 10"),
    }
}

fn criterion_7() -> (Outcome, FixedPoint) {
    let sys = DrivenQuartic::new(KAPPA, EPSILON);
    let cfg = IntegratorConfig::default();
    let right = sys.locate_right_island(&cfg).unwrap();
    let left = sys
        .find_period_one_island((-right.x0, -right.p0), &cfg, &NewtonOptions::default())
        .unwrap();
    let islands_ok = [right, left]
        .iter()
        .all(|fp| fp.residual < 1e-10 && fp.monodromy_trace.abs() < 2.0 && fp.stability == Stability::Elliptic)
        && right.x0 > 0.0
        && (left.x0 + right.x0).abs() < 1e-8
        && right.p0.abs() < 1e-8
        && left.p0.abs() < 1e-8;

    let free = DrivenQuartic::new(KAPPA, 0.0);
    let seeds = seed_lattice(PhaseWindow::symmetric(3.0, 3.0), (12, 12));
    let section = free.poincare_section(&seeds, 100, &cfg);
    let spread = section
        .points
        .iter()
        .map(|pts| {
            let e: Vec<f64> = pts.iter().map(|&(x, p)| energy(x, p, KAPPA)).collect();
            let (lo, hi) = e
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            (hi - lo) / e[0]
        })
        .fold(0.0, f64::max);
    let complete = section.escaped.iter().all(Option::is_none);
    (
        Outcome {
            id: 7,
            title: "classical structure",
            pass: islands_ok && complete && spread < 1e-8,
            detail: format!(
                "islands at x0 = {:+.10} / {:+.10}, p0 = {:.1e} / {:.1e}, residuals {:.1e} / {:.1e}, traces {:.6} / {:.6}; eps=0 max relative energy spread {spread:.2e} over 144 orbits x 100 periods (tol 1e-8)",
                right.x0, left.x0, right.p0, left.p0, right.residual, left.residual, right.monodromy_trace, left.monodromy_trace
            ),
        },
        right,
    )
}

fn criterion_8(case: &DrivenCase, island: &FixedPoint, reference: Option<f64>) -> Outcome {
    let psi0 = approx_initial_state(150.0, case.hbar, SpatialGrid::default(), (island.x0, island.p0)).unwrap();
    let series = measure_tunnelling(&case.prop, &psi0, &case.pair, case.horizon()).unwrap();
    let swing = series.p_plus.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - series.p_plus.iter().copied().fold(f64::INFINITY, f64::min);
    let measured = series.estimate.periods();
    let r = measured.zip(reference).map(|(m, c)| common::rel(m, c));
    Outcome {
        id: 8,
        title: "approximate initial state",
        pass: r.is_some_and(|r| r < 0.10),
        detail: format!(
            "kappa_ini=150 offset to ({:.4}, 0): period {measured:?} vs {reference:?} (rel {r:?}; tol 10%); P+ swing {swing:.3}",
            island.x0
        ),
    }
}

fn criterion_9(case: &DrivenCase, island: &FixedPoint) -> Outcome {
    let hbar = case.hbar;
    let width = default_width(hbar);
    // coherent state on a window of ±5 natural widths
    let cs = coherent_state(0.0, 0.0, width, hbar, SpatialGrid::default()).unwrap();
    let (hx, hp) = (5.0 * 2.0 * width, 5.0 * 2.0 * hbar / (2.0 * width));
    let q_cs = husimi(&cs, PhaseWindow::symmetric(hx, hp), (101, 101), width, hbar);
    let norm_cs = (q_cs.integral() - 1.0).abs();

    let window = PhaseWindow::symmetric(6.0, 6.0);
    let resolution = (241, 241);
    let odd = case.pair.phi_u.as_ref().unwrap();
    let even = case.pair.phi_v.as_ref().unwrap();
    let q_odd = husimi(odd, window, resolution, width, hbar);
    let q_even = husimi(even, window, resolution, width, hbar);
    let norm_odd = (q_odd.integral() - 1.0).abs();
    let mirror_defect = [&q_odd, &q_even]
        .iter()
        .map(|q| {
            let (nx, np) = (q.xs.len(), q.ps.len());
            (0..nx)
                .flat_map(|i| (0..np).map(move |j| (i, j)))
                .map(|(i, j)| (q.get(i, j) - q.get(nx - 1 - i, np - 1 - j)).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    // dominant: local maxima at or above half the global maximum
    let maxima = q_odd.dominant_maxima(0.5);
    let (dx, dp) = (q_odd.dx(), q_odd.dp());
    let located = maxima.len() == 2
        && [island.x0, -island.x0].iter().all(|&xc| {
            maxima
                .iter()
                .any(|&(x, p, _)| (x - xc).abs() <= dx && (p - island.p0 * xc.signum()).abs() <= dp)
        });
    Outcome {
        id: 9,
        title: "Husimi suite",
        pass: norm_cs < 1e-3 && norm_odd < 1e-3 && mirror_defect < 1e-10 && located,
        detail: format!(
            "normalization defect coherent {norm_cs:.2e}, odd state {norm_odd:.2e} (tol 1e-3); mirrored-node defect {mirror_defect:.2e} (tol 1e-10); odd-state maxima {:?} vs (+-{:.4}, 0), cell {dx:.3} x {dp:.3}",
            maxima.iter().map(|m| (m.0, m.1)).collect::<Vec<_>>(),
            island.x0
        ),
    }
}

/// Writes to the stderr handle directly: libtest captures `println!` and
/// `eprintln!`, and the report should appear in a plain `cargo test` run.
fn report(line: std::fmt::Arguments) {
    let _ = writeln!(std::io::stderr().lock(), "{line}");
}

#[test]
fn acceptance_criteria() {
    let mut outcomes = Vec::new();
    let mut run = |f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        report(format_args!(
            "criterion {} [{}] {}: {} ({:.1} s)",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.title,
            o.detail,
            t.elapsed().as_secs_f64()
        ));
        outcomes.push((o.id, o.pass));
    };

    run(&mut criterion_1);
    run(&mut criterion_2);

    let hbar = 0.5;
    let static_prop = SplitStepPropagator::new(
        QuantumModel::driven(KAPPA, 0.0, hbar),
        SpatialGrid::default(),
        TimeStepping::default(),
    )
    .unwrap();
    let static_blocks = build_propagator(&static_prop).unwrap();
    let static_spectrum = floquet_decompose(&static_blocks).unwrap();
    run(&mut || criterion_3(hbar, &static_blocks, &static_spectrum));

    let mut island = None;
    run(&mut || {
        let (o, fp) = criterion_7();
        island = Some(fp);
        o
    });
    let island = island.unwrap();
    let case = DrivenCase::new(hbar, &island);
    assert_eq!(case.spectrum.states[case.pair.u].parity, Parity::Odd);

    run(&mut || criterion_4(&static_spectrum, &static_blocks, &case, &island));
    let mut reference = None;
    run(&mut || {
        let (o, r) = criterion_5(&case);
        reference = r;
        o
    });
    run(&mut || criterion_6(reference, &island));
    run(&mut || criterion_8(&case, &island, reference));
    run(&mut || criterion_9(&case, &island));

    outcomes.sort();
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.1).map(|o| o.0).collect();
    report(format_args!(
        "acceptance: {} of {} criteria passed",
        outcomes.len() - failed.len(),
        outcomes.len()
    ));
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
