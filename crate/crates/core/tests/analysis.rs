mod common;

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use dyntun::analysis::*;
use dyntun::classical::{DrivenQuartic, FixedPoint, IntegratorConfig, PhaseWindow};
use dyntun::quantum::*;

const KAPPA: f64 = 1.2;
const EPSILON: f64 = 0.9;
const HBAR: f64 = 0.5;

struct Fixture {
    prop: SplitStepPropagator,
    spectrum: FloquetSpectrum,
    pair: TunnellingPair,
    island: FixedPoint,
}

/// Default-grid spectrum and tunnelling pair at ħ_eff = 0.5, built once.
fn fixture() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    CELL.get_or_init(|| {
        let island = DrivenQuartic::new(KAPPA, EPSILON)
            .locate_right_island(&IntegratorConfig::default())
            .unwrap();
        let prop = SplitStepPropagator::new(
            QuantumModel::driven(KAPPA, EPSILON, HBAR),
            SpatialGrid::default(),
            TimeStepping::default(),
        )
        .unwrap();
        let spectrum = floquet_decompose(&build_propagator(&prop).unwrap()).unwrap();
        let pair = find_tunnelling_pair(
            &spectrum,
            (island.x0, island.p0),
            default_width(HBAR),
            DEFAULT_OVERLAP_FLOOR,
        )
        .unwrap();
        Fixture {
            prop,
            spectrum,
            pair,
            island,
        }
    })
}

fn distance(a: &WaveFunction, b: &WaveFunction) -> f64 {
    let dx = a.grid.dx();
    a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(u, v)| (u - v).norm_sqr() * dx)
        .sum::<f64>()
        .sqrt()
}

/// P₊(s) from the Floquet expansion of `psi0`.
fn floquet_p_plus(f: &Fixture, psi0: &WaveFunction, periods: impl Iterator<Item = u64>) -> Vec<f64> {
    let plus = combine_pair(&f.pair, Sign::Plus);
    let c = f.spectrum.coefficients(psi0);
    periods
        .map(|s| plus.inner(&floquet_evolve(&c, &f.spectrum, s)).norm_sqr())
        .collect()
}

#[test]
fn pair_has_opposite_parities_and_symmetric_island_overlaps() {
    let f = fixture();
    let p = &f.pair;
    assert_eq!(f.spectrum.states[p.u].parity, Parity::Odd);
    assert_eq!(f.spectrum.states[p.v].parity, Parity::Even);
    let rel = (p.overlap_u - p.overlap_v).abs() / p.overlap_u.max(p.overlap_v);
    assert!(rel < 0.1, "overlaps {} vs {}", p.overlap_u, p.overlap_v);
    assert!((p.t_tun.unwrap() * p.splitting - TAU * HBAR).abs() < 1e-12 * TAU * HBAR);
}

#[test]
fn combinations_are_orthogonal_mirror_images_on_single_islands() {
    let f = fixture();
    let plus = combine_pair(&f.pair, Sign::Plus);
    let minus = combine_pair(&f.pair, Sign::Minus);
    assert!(plus.inner(&minus).norm() < 1e-10);
    assert!(plus.mean_position() > 0.0);

    let mirrored = plus.mirrored();
    let z = minus.inner(&mirrored);
    let aligned = WaveFunction::new(minus.grid, minus.amplitudes.iter().map(|a| a * z).collect(), 0.0);
    assert!((z.norm() - 1.0).abs() < 1e-8);
    assert!(distance(&mirrored, &aligned) < 1e-8);

    let q = husimi(
        &plus,
        PhaseWindow::symmetric(6.0, 6.0),
        (121, 121),
        default_width(HBAR),
        HBAR,
    );
    assert!(q.right_fraction() > 0.9, "right fraction {}", q.right_fraction());
}

#[test]
fn definite_parity_states_have_point_symmetric_husimi_maps() {
    let f = fixture();
    for idx in [f.pair.u, f.pair.v, 0, f.spectrum.len() / 2] {
        let q = husimi(
            &f.spectrum.states[idx].state,
            PhaseWindow::symmetric(4.0, 4.0),
            (41, 41),
            default_width(HBAR),
            HBAR,
        );
        for i in 0..41 {
            for j in 0..41 {
                let d = (q.get(i, j) - q.get(40 - i, 40 - j)).abs();
                assert!(d < 1e-10, "state {idx} node ({i},{j}): {d:e}");
            }
        }
    }
}

#[test]
fn localized_state_follows_the_two_level_law() {
    let f = fixture();
    let t_tun = f.pair.t_tun.unwrap();
    let plus = combine_pair(&f.pair, Sign::Plus);
    let series = measure_tunnelling(&f.prop, &plus, &f.pair, 40).unwrap();
    for ((&s, &pp), &pm) in series.s.iter().zip(&series.p_plus).zip(&series.p_minus) {
        let expected = (PI * s as f64 * TAU / t_tun).cos().powi(2);
        assert!((pp - expected).abs() < 1e-6, "s = {s}: {pp} vs {expected}");
        assert!((pp + pm - 1.0).abs() < 1e-10, "s = {s}: sum {}", pp + pm);
    }
}

#[test]
fn density_moves_to_the_left_island_and_back() {
    let f = fixture();
    let periods = f.pair.t_tun.unwrap() / TAU;
    let plus = combine_pair(&f.pair, Sign::Plus);
    let c = f.spectrum.coefficients(&plus);
    let half = (periods / 2.0).round() as u64;
    let full = periods.round() as u64;
    assert!(plus.right_weight() > 0.9);
    assert!(floquet_evolve(&c, &f.spectrum, half).right_weight() < 0.1);
    assert!(floquet_evolve(&c, &f.spectrum, full).right_weight() > 0.9);
}

#[test]
fn floquet_state_input_keeps_equal_weights() {
    let f = fixture();
    let phi_u = &f.spectrum.states[f.pair.u].state;
    let series = measure_tunnelling(&f.prop, phi_u, &f.pair, 20).unwrap();
    for &pp in &series.p_plus {
        assert!((pp - 0.5).abs() < 1e-6, "P+ = {pp}");
    }
}

#[test]
fn floquet_and_direct_tunnelling_series_agree() {
    let f = fixture();
    let psi0 = coherent_state(
        f.island.x0,
        f.island.p0,
        default_width(HBAR),
        HBAR,
        SpatialGrid::default(),
    )
    .unwrap();
    let direct = measure_tunnelling(&f.prop, &psi0, &f.pair, 50).unwrap();
    let expanded = floquet_p_plus(f, &psi0, 0..=50);
    for (s, (a, b)) in direct.p_plus.iter().zip(&expanded).enumerate() {
        assert!((a - b).abs() < 1e-4, "s = {s}: {a} vs {b}");
    }
}

#[test]
fn stiffer_initial_trap_loads_the_tunnelling_state_better() {
    let f = fixture();
    let plus = combine_pair(&f.pair, Sign::Plus);
    let load =
        |kappa_ini| approx_initial_state(kappa_ini, HBAR, SpatialGrid::default(), (f.island.x0, f.island.p0)).unwrap();
    let (soft, stiff) = (load(1.2), load(150.0));
    assert!(plus.inner(&stiff).norm_sqr() > plus.inner(&soft).norm_sqr());

    // Both keep oscillating: each tunnelling cycle swings P₊ from near its
    // start value down close to zero.
    let periods = f.pair.t_tun.unwrap() / TAU;
    let horizon = (2.0 * periods).ceil() as u64;
    for psi0 in [&soft, &stiff] {
        let p = floquet_p_plus(f, psi0, 0..=horizon);
        let start = p[0];
        for cycle in 0..2 {
            let lo = (cycle as f64 * periods) as usize;
            let hi = (((cycle + 1) as f64 * periods) as usize).min(p.len() - 1);
            let window = &p[lo..=hi];
            let min = window.iter().copied().fold(f64::INFINITY, f64::min);
            let max = window.iter().copied().fold(0.0, f64::max);
            assert!(min < 0.1 * start, "cycle {cycle}: min {min} vs start {start}");
            assert!(max > 0.8 * start, "cycle {cycle}: max {max} vs start {start}");
        }
    }
}

#[test]
fn static_double_well_pair_is_the_ground_doublet() {
    // V = −x² + x⁴/8: wells at ±2, barrier height 2.
    let (a2, a4, hbar) = (-2.0, 0.5, 0.5);
    let grid = SpatialGrid::new(256, 8.0).unwrap();
    let model = QuantumModel {
        potential: Potential {
            quadratic: a2,
            quartic: a4,
            modulation: 0.0,
        },
        hbar_eff: hbar,
    };
    let (spectrum, _) = floquet_spectrum(model, grid, TimeStepping::default()).unwrap();
    let pair = find_tunnelling_pair(&spectrum, (2.0, 0.0), default_width(hbar), DEFAULT_OVERLAP_FLOOR).unwrap();
    let oracle = common::static_spectrum_of(a2, a4, hbar, grid);
    assert_eq!(oracle.parities[..2], [Parity::Even, Parity::Odd]);
    let (e0, e1) = (
        fold_quasi_energy(oracle.energies[0], hbar),
        fold_quasi_energy(oracle.energies[1], hbar),
    );
    assert!(circular_distance(pair.e_v, e0, hbar) < 1e-6 * hbar);
    assert!(circular_distance(pair.e_u, e1, hbar) < 1e-6 * hbar);
    let gap = oracle.energies[1] - oracle.energies[0];
    assert!(
        (pair.splitting - gap).abs() < 1e-6 * hbar,
        "{} vs {gap}",
        pair.splitting
    );
}

#[test]
fn unknown_island_is_rejected() {
    let f = fixture();
    // Far outside every bound state of interest at this ħ_eff.
    let err = find_tunnelling_pair(&f.spectrum, (0.0, 9.0), default_width(HBAR), 0.5).unwrap_err();
    assert!(err.to_string().contains("no island-supported state"), "{err}");
}

#[test]
fn husimi_of_the_island_state_is_bounded() {
    let f = fixture();
    let plus = combine_pair(&f.pair, Sign::Plus);
    let q = husimi(
        &plus,
        PhaseWindow::symmetric(6.0, 6.0),
        (61, 61),
        default_width(HBAR),
        HBAR,
    );
    // |⟨α|ψ⟩|² ≤ 1 for normalized states.
    let bound = 1.0 / (TAU * HBAR);
    assert!(q.values.iter().all(|&v| (0.0..=bound * (1.0 + 1e-12)).contains(&v)));
}
