//! Quadratic Hermite–Padé approximants to the exponential function.
//!
//! The crate computes the type-I triples `(p, q, r)` with
//! `p(z) e^{-z} + q(z) + r(z) e^{z} = O(z^{n1+n2+n3+2})` exactly, builds the
//! three-sheeted Riemann surface of `z = (w² - 1/3) / (w (w² - 1))` with its
//! trajectory system numerically, and evaluates the strong, two-term and
//! Airy-type asymptotic formulas so they can be compared with the exact
//! polynomials.

pub mod asymptotics;
pub mod curves;
pub mod exact;
pub mod mp;
pub mod polyline;
pub mod potentials;
pub mod quad;
pub mod surface;
pub mod zeros;

pub use num_complex::Complex64;

#[cfg(test)]
pub(crate) fn test_geometry() -> &'static curves::Geometry {
    static GEOM: std::sync::OnceLock<curves::Geometry> = std::sync::OnceLock::new();
    GEOM.get_or_init(|| curves::Geometry::build(&curves::TraceParams::default()).expect("geometry"))
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("singular Hermite-Pade system for indices ({n1},{n2},{n3}) with the requested normalization")]
    SingularSystem { n1: usize, n2: usize, n3: usize },
    #[error("remainder coefficient {index} below the guaranteed order is nonzero")]
    OrderViolation { index: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("the Q branch has a pole at the origin")]
    PoleAtOrigin,
    #[error("point {z} lies on the cut {cut:?}; a side is required")]
    OnCut { z: Complex64, cut: surface::Cut },
    #[error("branch continuation lost root separation near {z}")]
    ContinuationFailure { z: Complex64 },
    #[error("point {z} lies on {arc}")]
    OnArc { z: Complex64, arc: String },
    #[error("trajectory step underflow near {z}")]
    TraceFailure { z: Complex64 },
    #[error("unexpected curve structure: {0}")]
    Geometry(String),
    #[error("no sign change of the bracketing function on ({lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("quadrature did not converge: error estimate {estimate:e}")]
    Quadrature { estimate: f64 },
    #[error("{what} did not converge")]
    NonConvergence { what: String },
    #[error("a zero lies on a cell edge near {z}")]
    BoundaryZero { z: Complex64 },
}
