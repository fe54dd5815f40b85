use thiserror::Error;

use crate::classical::ClassicalState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("zero mean field, length scale undefined")]
    ZeroMeanField,

    #[error("parameter doubly determined: `{0}` is both a sweep axis and fixed by a constraint")]
    DoublyDetermined(&'static str),

    #[error("trajectory escaped (last valid state x={:.6e}, p={:.6e}, t={:.6e})", last.x, last.p, last.t)]
    TrajectoryEscaped { last: ClassicalState },

    #[error("Newton iteration did not converge after {iterations} iterations (best x={:.6e}, p={:.6e}, residual {residual:.3e})", best.0, best.1)]
    NewtonDiverged {
        best: (f64, f64),
        residual: f64,
        iterations: usize,
    },

    #[error("time span {span} is not an integer multiple of the step {dt}")]
    IncommensurateStep { span: f64, dt: f64 },

    #[error("propagator not unitary: eigenvalue modulus deviates from one by {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("eigendecomposition failed to converge for the {0} block")]
    Eigensolver(&'static str),

    #[error("grid too small for coherent state: edge density {edge_density:.3e}")]
    CoherentStateSpill { edge_density: f64 },

    #[error("grid under-resolves initial state: width {width:.3e} < 3 dx = {limit:.3e}")]
    UnderResolved { width: f64, limit: f64 },

    #[error("no island-supported state; check hbar_eff vs island area (best overlap {best:.3e} < floor {floor:.3e})")]
    NoIslandState { best: f64, floor: f64 },

    #[error("degenerate pair, period unresolvable (splitting {splitting:.3e})")]
    DegeneratePair { splitting: f64 },

    #[error("spectrum lacks {0} states")]
    MissingParity(&'static str),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}
