//! CSV and JSON writers. Floats are written with Rust's shortest round-trip
//! formatting so files re-parse to identical values.

use std::io::{self, Write};

use serde::Serialize;

use crate::analysis::{HusimiMap, TunnellingPair, TunnellingSeries};
use crate::classical::{FixedPoint, PoincareSection};
use crate::params::{Constraint, HeffMap, HeffSweep, PhysicalParams};
use crate::quantum::{FloquetSpectrum, Parity, StroboscopicDensity, WaveFunction};

/// Rows `seed_id,s,x,p`; escaped seeds contribute the points they reached.
pub fn write_poincare_csv<W: Write>(mut w: W, section: &PoincareSection) -> io::Result<()> {
    writeln!(w, "seed_id,s,x,p")?;
    for (id, pts) in section.points.iter().enumerate() {
        for (s, (x, p)) in pts.iter().enumerate() {
            writeln!(w, "{id},{s},{x:?},{p:?}")?;
        }
    }
    Ok(())
}

/// Rows `x,re,im`.
pub fn write_wavefunction_csv<W: Write>(mut w: W, psi: &WaveFunction) -> io::Result<()> {
    writeln!(w, "x,re,im")?;
    for (k, z) in psi.amplitudes.iter().enumerate() {
        writeln!(w, "{:?},{:?},{:?}", psi.grid.x(k), z.re, z.im)?;
    }
    Ok(())
}

/// Rows `s,x,rho`.
pub fn write_density_csv<W: Write>(mut w: W, density: &StroboscopicDensity) -> io::Result<()> {
    writeln!(w, "s,x,rho")?;
    for (s, row) in density.rows.iter().enumerate() {
        for (x, rho) in density.x.iter().zip(row) {
            writeln!(w, "{s},{x:?},{rho:?}")?;
        }
    }
    Ok(())
}

/// Rows `x,p,Q`, x outer.
pub fn write_husimi_csv<W: Write>(mut w: W, map: &HusimiMap) -> io::Result<()> {
    writeln!(w, "x,p,Q")?;
    for (i, x) in map.xs.iter().enumerate() {
        for (j, p) in map.ps.iter().enumerate() {
            writeln!(w, "{x:?},{p:?},{:?}", map.get(i, j))?;
        }
    }
    Ok(())
}

/// Rows `s,P_plus,P_minus`.
pub fn write_tunnelling_csv<W: Write>(mut w: W, series: &TunnellingSeries) -> io::Result<()> {
    writeln!(w, "s,P_plus,P_minus")?;
    for ((s, a), b) in series.s.iter().zip(&series.p_plus).zip(&series.p_minus) {
        writeln!(w, "{s},{a:?},{b:?}")?;
    }
    Ok(())
}

/// Rows `axis1,axis2,hbar_eff`, axis1 outer.
pub fn write_heff_csv<W: Write>(mut w: W, map: &HeffMap) -> io::Result<()> {
    writeln!(w, "axis1,axis2,hbar_eff")?;
    for (i, a) in map.values1.iter().enumerate() {
        for (j, b) in map.values2.iter().enumerate() {
            writeln!(w, "{a:?},{b:?},{:?}", map.get(i, j))?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub parity: Parity,
    #[serde(rename = "E_n")]
    pub quasi_energy: f64,
    #[serde(rename = "abs_xi")]
    pub modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRecord {
    pub hbar_eff: f64,
    pub period: f64,
    pub n: usize,
    pub x_max: f64,
    pub schur_residual: f64,
    pub states: Vec<SpectrumEntry>,
}

impl From<&FloquetSpectrum> for SpectrumRecord {
    fn from(s: &FloquetSpectrum) -> Self {
        Self {
            hbar_eff: s.hbar_eff,
            period: s.period,
            n: s.grid.n,
            x_max: s.grid.x_max,
            schur_residual: s.schur_residual,
            states: s
                .states
                .iter()
                .map(|st| SpectrumEntry {
                    parity: st.parity,
                    quasi_energy: st.quasi_energy,
                    modulus: st.modulus,
                })
                .collect(),
        }
    }
}

/// Axes plus every fixed input of an ħ_eff map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeffSidecar<'a> {
    pub axis1: &'static str,
    pub axis2: &'static str,
    pub values1: &'a [f64],
    pub values2: &'a [f64],
    pub base: &'a PhysicalParams,
    pub constraints: &'a [Constraint],
}

impl<'a> HeffSidecar<'a> {
    pub fn new(sweep: &'a HeffSweep, map: &'a HeffMap) -> Self {
        Self {
            axis1: map.axis1.name(),
            axis2: map.axis2.name(),
            values1: &map.values1,
            values2: &map.values2,
            base: &sweep.base,
            constraints: &sweep.constraints,
        }
    }
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(w: W, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(w, value).map_err(io::Error::other)
}

pub fn write_spectrum_json<W: Write>(w: W, spectrum: &FloquetSpectrum) -> io::Result<()> {
    write_json(w, &SpectrumRecord::from(spectrum))
}

pub fn write_fixed_points_json<W: Write>(w: W, points: &[FixedPoint]) -> io::Result<()> {
    write_json(w, points)
}

pub fn write_pair_json<W: Write>(w: W, pair: &TunnellingPair) -> io::Result<()> {
    write_json(w, pair)
}
