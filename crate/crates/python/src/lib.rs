//! Python bindings: scaling, classical islands, Floquet spectra, the
//! tunnelling pair, Husimi maps and tunnelling series.
//!
//! States cross the boundary as lists of complex amplitudes on the grid
//! returned by `FloquetSpectrum.x`.

use dyntun::analysis::{self, Sign};
use dyntun::classical::{self, ClassicalState, IntegratorConfig, PhaseWindow};
use dyntun::params::{self, PhysicalParams};
use dyntun::quantum::{self, Parity, QuantumModel, SpatialGrid, TimeStepping, WaveFunction};
use dyntun::{Error, Scheme};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter { .. } | Error::DoublyDetermined(_) | Error::GridMismatch(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn scheme(name: &str) -> PyResult<Scheme> {
    match name {
        "strang" => Ok(Scheme::Strang),
        "yoshida4" => Ok(Scheme::Yoshida4),
        "yoshida6" => Ok(Scheme::Yoshida6),
        _ => Err(PyValueError::new_err(format!(
            "unknown scheme {name:?} (expected strang, yoshida4 or yoshida6)"
        ))),
    }
}

fn window(w: (f64, f64, f64, f64)) -> PhaseWindow {
    PhaseWindow {
        x_min: w.0,
        x_max: w.1,
        p_min: w.2,
        p_max: w.3,
    }
}

type HusimiRows = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

/// (xs, ps, rows) with `rows[i][j]` = Q(xs[i], ps[j]).
fn husimi_rows(
    state: &WaveFunction,
    win: (f64, f64, f64, f64),
    res: (usize, usize),
    width: f64,
    hbar: f64,
) -> HusimiRows {
    let map = analysis::husimi(state, window(win), res, width, hbar);
    let rows = map.values.chunks(map.ps.len().max(1)).map(<[f64]>::to_vec).collect();
    (map.xs, map.ps, rows)
}

/// Physical to scaled parameters (SI units, angular frequencies in rad/s).
#[pyfunction]
#[pyo3(signature = (m, omega_m, g4, lambda_l, P0, PA, gamma_c, Omega, delta_c = 0.0))]
#[allow(non_snake_case, clippy::too_many_arguments)]
fn scale<'py>(
    py: Python<'py>,
    m: f64,
    omega_m: f64,
    g4: f64,
    lambda_l: f64,
    P0: f64,
    PA: f64,
    gamma_c: f64,
    Omega: f64,
    delta_c: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let p = PhysicalParams {
        m,
        omega_m,
        g4,
        lambda_l,
        p0: P0,
        pa: PA,
        gamma_c,
        omega: Omega,
        delta_c,
    };
    let s = params::scale(&p.validated().map_err(err)?).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("kappa", s.kappa)?;
    d.set_item("epsilon", s.epsilon)?;
    d.set_item("hbar_eff", s.hbar_eff)?;
    d.set_item("length_scale", s.length_scale)?;
    d.set_item("time_scale", s.time_scale)?;
    d.set_item("sigma_zpf", s.sigma_zpf)?;
    Ok(d)
}

/// Classical driven quartic oscillator.
#[pyclass(frozen)]
struct DrivenQuartic {
    sys: classical::DrivenQuartic,
    cfg: IntegratorConfig,
}

#[pymethods]
impl DrivenQuartic {
    #[new]
    fn new(kappa: f64, epsilon: f64) -> Self {
        Self {
            sys: classical::DrivenQuartic::new(kappa, epsilon),
            cfg: IntegratorConfig::default(),
        }
    }

    /// Period-one elliptic island on the x > 0 side.
    fn right_island<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let fp = py.detach(|| self.sys.locate_right_island(&self.cfg)).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("x0", fp.x0)?;
        d.set_item("p0", fp.p0)?;
        d.set_item("residual", fp.residual)?;
        d.set_item("trace", fp.monodromy_trace)?;
        Ok(d)
    }

    /// Stroboscopic orbits, one list of (x, p) per seed; escaped orbits stop early.
    fn poincare(&self, py: Python<'_>, seeds: Vec<(f64, f64)>, n_periods: usize) -> Vec<Vec<(f64, f64)>> {
        let seeds: Vec<ClassicalState> = seeds.into_iter().map(|(x, p)| ClassicalState::new(x, p, 0.0)).collect();
        py.detach(|| self.sys.poincare_section(&seeds, n_periods, &self.cfg))
            .points
    }
}

/// One-period split-step propagator of the scaled quantum model.
#[pyclass(frozen)]
struct Propagator {
    inner: quantum::SplitStepPropagator,
    hbar: f64,
}

#[pymethods]
impl Propagator {
    #[new]
    #[pyo3(signature = (kappa, epsilon, hbar_eff, n = quantum::DEFAULT_POINTS, x_max = quantum::DEFAULT_X_MAX,
                        steps_per_period = quantum::DEFAULT_STEPS_PER_PERIOD, scheme = "yoshida6"))]
    fn new(
        kappa: f64,
        epsilon: f64,
        hbar_eff: f64,
        n: usize,
        x_max: f64,
        steps_per_period: usize,
        scheme: &str,
    ) -> PyResult<Self> {
        let grid = SpatialGrid::new(n, x_max).map_err(err)?;
        let stepping = TimeStepping {
            steps_per_period,
            scheme: self::scheme(scheme)?,
        };
        let inner = quantum::SplitStepPropagator::new(QuantumModel::driven(kappa, epsilon, hbar_eff), grid, stepping)
            .map_err(err)?;
        Ok(Self { inner, hbar: hbar_eff })
    }

    /// Diagonalizes the one-period propagator.
    fn floquet(&self, py: Python<'_>) -> PyResult<FloquetSpectrum> {
        let spec = py
            .detach(|| quantum::build_propagator(&self.inner).and_then(|b| quantum::floquet_decompose(&b)))
            .map_err(err)?;
        Ok(FloquetSpectrum { inner: spec })
    }

    /// P±(s) for s = 0..=s_max, starting from Φ₊ (or Φ₋ with `initial="minus"`).
    #[pyo3(signature = (pair, s_max, initial = "plus"))]
    fn tunnelling<'py>(
        &self,
        py: Python<'py>,
        pair: &Pair,
        s_max: usize,
        initial: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let psi0 = pair.inner.combine(sign(initial)?);
        let series = py
            .detach(|| analysis::measure_tunnelling(&self.inner, &psi0, &pair.inner, s_max))
            .map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("s", series.s.clone())?;
        d.set_item("p_plus", series.p_plus.clone())?;
        d.set_item("p_minus", series.p_minus.clone())?;
        d.set_item("periods", series.estimate.periods())?;
        d.set_item("cosine_fit", series.cosine_fit)?;
        Ok(d)
    }

    #[getter]
    fn hbar_eff(&self) -> f64 {
        self.hbar
    }
}

fn sign(name: &str) -> PyResult<Sign> {
    match name {
        "plus" => Ok(Sign::Plus),
        "minus" => Ok(Sign::Minus),
        _ => Err(PyValueError::new_err(format!(
            "expected \"plus\" or \"minus\", got {name:?}"
        ))),
    }
}

#[pyclass(frozen)]
struct FloquetSpectrum {
    inner: quantum::FloquetSpectrum,
}

#[pymethods]
impl FloquetSpectrum {
    fn __len__(&self) -> usize {
        self.inner.states.len()
    }

    /// Folded quasi-energies in [−ħ/2, ħ/2), ascending.
    #[getter]
    fn quasi_energies(&self) -> Vec<f64> {
        self.inner.states.iter().map(|s| s.quasi_energy).collect()
    }

    /// "even" or "odd" per state.
    #[getter]
    fn parities(&self) -> Vec<&'static str> {
        self.inner
            .states
            .iter()
            .map(|s| match s.parity {
                Parity::Even => "even",
                Parity::Odd => "odd",
            })
            .collect()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        let g = self.inner.grid;
        (0..g.n).map(|j| g.x(j)).collect()
    }

    /// Amplitudes of state `i` (ℓ²-normalized with weight dx).
    fn state(&self, i: usize) -> PyResult<Vec<Complex64>> {
        self.get(i).map(|w| w.amplitudes.clone())
    }

    /// Pair of opposite-parity states localized on the island at `island`.
    #[pyo3(signature = (island, width = None, overlap_floor = 0.1))]
    fn pair(&self, island: (f64, f64), width: Option<f64>, overlap_floor: f64) -> PyResult<Pair> {
        let width = width.unwrap_or_else(|| analysis::default_width(self.inner.hbar_eff));
        let inner = analysis::find_tunnelling_pair(&self.inner, island, width, overlap_floor).map_err(err)?;
        Ok(Pair { inner })
    }

    /// Husimi map of state `i` over `window` = (x_min, x_max, p_min, p_max).
    #[pyo3(signature = (i, window, resolution, width = None))]
    fn husimi(
        &self,
        py: Python<'_>,
        i: usize,
        window: (f64, f64, f64, f64),
        resolution: (usize, usize),
        width: Option<f64>,
    ) -> PyResult<HusimiRows> {
        let h = self.inner.hbar_eff;
        let state = self.get(i)?;
        let width = width.unwrap_or_else(|| analysis::default_width(h));
        Ok(py.detach(|| husimi_rows(state, window, resolution, width, h)))
    }
}

impl FloquetSpectrum {
    fn get(&self, i: usize) -> PyResult<&WaveFunction> {
        self.inner.states.get(i).map(|s| &s.state).ok_or_else(|| {
            PyValueError::new_err(format!(
                "state {i} out of range (spectrum has {})",
                self.inner.states.len()
            ))
        })
    }
}

/// Near-degenerate odd/even pair supported on a classical island.
#[pyclass(frozen)]
struct Pair {
    inner: analysis::TunnellingPair,
}

#[pymethods]
impl Pair {
    #[getter]
    fn u(&self) -> usize {
        self.inner.u
    }

    #[getter]
    fn v(&self) -> usize {
        self.inner.v
    }

    #[getter]
    fn splitting(&self) -> f64 {
        self.inner.splitting
    }

    /// 2πħ_eff / splitting in scaled time; None when unresolvable.
    #[getter]
    fn t_tun(&self) -> Option<f64> {
        self.inner.t_tun
    }

    #[getter]
    fn overlaps(&self) -> (f64, f64) {
        (self.inner.overlap_u, self.inner.overlap_v)
    }

    /// Amplitudes of Φ₊ or Φ₋.
    fn state(&self, sign: &str) -> PyResult<Vec<Complex64>> {
        Ok(self.inner.combine(self::sign(sign)?).amplitudes)
    }

    #[pyo3(signature = (sign, window, resolution, width = None))]
    fn husimi(
        &self,
        py: Python<'_>,
        sign: &str,
        window: (f64, f64, f64, f64),
        resolution: (usize, usize),
        width: Option<f64>,
    ) -> PyResult<HusimiRows> {
        let h = self.inner.hbar_eff;
        let state = self.inner.combine(self::sign(sign)?);
        let width = width.unwrap_or_else(|| analysis::default_width(h));
        Ok(py.detach(|| husimi_rows(&state, window, resolution, width, h)))
    }
}

#[pymodule]
fn dyntun_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", dyntun::VERSION)?;
    m.add_function(wrap_pyfunction!(scale, m)?)?;
    m.add_class::<DrivenQuartic>()?;
    m.add_class::<Propagator>()?;
    m.add_class::<FloquetSpectrum>()?;
    m.add_class::<Pair>()?;
    Ok(())
}
