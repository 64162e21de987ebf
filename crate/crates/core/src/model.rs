//! Scenario parameters, unit conversions and validation.
//!
//! Every field is linear/SI. dB and dBm only appear in the conversion helpers
//! used by the config parser.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::specfun::ZipfLaw;

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub fn dbm_to_watts(x_dbm: f64) -> f64 {
    10f64.powf((x_dbm - 30.0) / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Physical and model parameters of one single-cell scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    /// Cell radius `R` (m).
    pub cell_radius_m: f64,
    /// Protection radius `R0` around the base station (m).
    pub protection_radius_m: f64,
    /// Intensity `λ` of potential D2D interferers (m⁻²).
    pub density_per_m2: f64,
    /// D2D pairing proximity threshold `r_d` (m).
    pub pairing_distance_m: f64,
    /// SIR threshold `τ` (linear).
    pub sir_threshold_lin: f64,
    /// Cellular transmit power `p_c` (W).
    pub p_cellular_w: f64,
    /// Transmit power of each D2D interferer `p_i` (W).
    pub p_d2d_interferer_w: f64,
    /// Transmit power of the tagged D2D pair `p_d` (W).
    pub p_d2d_tx_w: f64,
    /// Path-loss exponent `α`.
    pub path_loss_exp: f64,
    /// Fractional power-control factor `ε` of the cellular user.
    pub power_control: f64,
    /// Rate `μ` of the exponential interferer fading.
    pub fading_rate: f64,
    /// Content popularity over the `N` ranked files.
    pub zipf: ZipfLaw,
    /// Outer radius of the interferer field. `None` integrates the
    /// interference out to infinity; `Some(r)` confines the interferers to
    /// the annulus `[R0, r]`.
    pub field_radius_m: Option<f64>,
}

impl ScenarioParams {
    /// Single small cell: `R = 500 m`, `R0 = 1 m`, `λ = 1e-4 m⁻²`,
    /// `r_d = 10 m`, `τ = 15 dB`, `p_c = 0.2 W`, `p_i = p_d = 1 mW`, `α = 4`,
    /// `ε = 0`, `μ = 1`, `N = 10` files with `s = 1`, unbounded field.
    pub fn baseline() -> Self {
        Self {
            cell_radius_m: 500.0,
            protection_radius_m: 1.0,
            density_per_m2: 0.1e-3,
            pairing_distance_m: 10.0,
            sir_threshold_lin: db_to_linear(15.0),
            p_cellular_w: 0.2,
            p_d2d_interferer_w: 1e-3,
            p_d2d_tx_w: 1e-3,
            path_loss_exp: 4.0,
            power_control: 0.0,
            fading_rate: 1.0,
            zipf: ZipfLaw::new(10, 1.0).expect("static Zipf parameters"),
            field_radius_m: None,
        }
    }

    /// Returns every violated invariant; empty means the scenario is usable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut bad = |field: &'static str, message: String| out.push(Violation { field, message });

        let r = self.cell_radius_m;
        let r0 = self.protection_radius_m;
        if !(r.is_finite() && r > 0.0) {
            bad(
                "cell_radius_m",
                format!("cell_radius_m must be positive, got {r}"),
            );
        }
        if !(r0.is_finite() && r0 > 0.0) {
            bad(
                "protection_radius_m",
                format!("protection_radius_m must be positive, got {r0}"),
            );
        } else if r0 > r / 100.0 {
            bad(
                "protection_radius_m",
                format!(
                    "protection_radius_m must not exceed cell_radius_m/100 ({r0} > {})",
                    r / 100.0
                ),
            );
        }
        if !(self.density_per_m2 >= 0.0 && self.density_per_m2.is_finite()) {
            bad(
                "density_per_m2",
                format!(
                    "density_per_m2 must be non-negative, got {}",
                    self.density_per_m2
                ),
            );
        }
        if !(self.pairing_distance_m >= 0.0 && self.pairing_distance_m.is_finite()) {
            bad(
                "pairing_distance_m",
                format!(
                    "pairing_distance_m must be non-negative, got {}",
                    self.pairing_distance_m
                ),
            );
        }
        if !(self.sir_threshold_lin > 0.0 && self.sir_threshold_lin.is_finite()) {
            bad(
                "sir_threshold_lin",
                format!(
                    "sir_threshold_lin must be positive, got {}",
                    self.sir_threshold_lin
                ),
            );
        }
        for (field, value) in [
            ("p_cellular_w", self.p_cellular_w),
            ("p_d2d_interferer_w", self.p_d2d_interferer_w),
            ("p_d2d_tx_w", self.p_d2d_tx_w),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                bad(field, format!("{field} must be positive, got {value}"));
            }
        }
        match self.field_radius_m {
            None => {
                if !(self.path_loss_exp > 2.0) {
                    bad("path_loss_exp", "path_loss_exp must exceed 2".to_string());
                }
            }
            Some(rf) => {
                if !(self.path_loss_exp > 0.0) {
                    bad(
                        "path_loss_exp",
                        "path_loss_exp must be positive".to_string(),
                    );
                }
                if !(rf.is_finite() && rf > r0) {
                    bad(
                        "field_radius_m",
                        format!("field_radius_m must be finite and exceed protection_radius_m, got {rf}"),
                    );
                }
            }
        }
        if !self.path_loss_exp.is_finite() {
            bad("path_loss_exp", "path_loss_exp must be finite".to_string());
        }
        if !(0.0..=1.0).contains(&self.power_control) {
            bad("power_control", "power_control outside [0,1]".to_string());
        }
        if !(self.fading_rate > 0.0 && self.fading_rate.is_finite()) {
            bad(
                "fading_rate",
                format!("fading_rate must be positive, got {}", self.fading_rate),
            );
        }
        out
    }

    /// [`validate`](Self::validate) as a `Result`.
    pub fn validated(self) -> Result<Self> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidScenario(v))
        }
    }

    /// Mean number of potential interferers in the annulus `[R0, R]`.
    pub fn expected_user_count(&self) -> f64 {
        let r = self.cell_radius_m;
        let r0 = self.protection_radius_m;
        self.density_per_m2 * PI * (r * r - r0 * r0)
    }

    /// Density putting `users` interferers on the disc of radius `R` on average.
    pub fn density_for_users(&self, users: f64) -> f64 {
        users / (PI * self.cell_radius_m * self.cell_radius_m)
    }
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self::baseline()
    }
}

/// A violated scenario invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Which form of the mark-averaged interference kernel `g(x, r_c)` to use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundKind {
    /// Direct `N`-term sum for an arbitrary Zipf shape.
    General(f64),
    /// Digamma closed form, Zipf shape fixed to 1. Upper-bounds coverage.
    Upper,
    /// Polygamma closed form, Zipf shape fixed to 10. Lower-bounds coverage.
    Lower,
}

impl BoundKind {
    pub fn zipf_shape(self) -> f64 {
        match self {
            BoundKind::General(s) => s,
            BoundKind::Upper => 1.0,
            BoundKind::Lower => 10.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BoundKind::General(_) => "general",
            BoundKind::Upper => "ub",
            BoundKind::Lower => "lb",
        }
    }
}
