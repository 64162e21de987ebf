//! Coverage analysis for a cellular uplink shared with an underlay D2D network.
//!
//! The interferers form a Poisson field whose points carry Zipf-distributed
//! content ranks and are thinned by a pairing-proximity retention
//! probability. The crate evaluates the average coverage probability of the
//! power-controlled cellular user (general Zipf shape plus the digamma and
//! polygamma closed forms for `s = 1` and `s = 10`), the ergodic rate of a
//! D2D pair, and cross-checks every analytic quantity against a seeded Monte
//! Carlo simulator of the same point process.
//!
//! Module map:
//!
//! * [`specfun`]: harmonic numbers, digamma/polygamma, the Zipf law.
//! * [`model`]: scenario parameters, unit conversions and validation.
//! * [`quadrature`]: adaptive Gauss–Kronrod and Gauss–Legendre rules.
//! * [`analytic`]: Laplace functional, coverage integrals, D2D rate.
//! * [`montecarlo`]: the independent simulation oracle.
//! * [`sweep`]: config files, figure presets, parameter sweeps and CSV output.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod specfun;
pub mod sweep;

pub use analytic::{
    coverage_cellular, ergodic_rate_d2d, laplace_ia, retention_prob, Coverage, InterferenceKernel,
    LaplaceValue, Rate,
};
pub use error::{Error, Result};
pub use model::{BoundKind, ScenarioParams, Violation};
pub use montecarlo::{McEstimate, Realization, ThinningMode};
pub use quadrature::QuadratureSpec;
pub use specfun::ZipfLaw;
pub use sweep::{SweepResult, SweepRow, SweepSpec};
