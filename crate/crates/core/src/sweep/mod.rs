//! Parameter sweeps over a scenario.
//!
//! A sweep varies one parameter over a grid, optionally once per curve (a
//! set of further overrides), and evaluates the requested coverage bounds,
//! the Monte Carlo estimate and the D2D rate at every point.

mod config;
mod csv;
mod presets;

pub use config::{parse_bound, parse_config, parse_config_str, parse_mode, ConfigFile};
pub use csv::{format_value, write_csv, write_csv_to, CSV_HEADER};
pub use presets::{preset_figure, PRESET_NAMES};

use rayon::prelude::*;

use crate::analytic::{coverage_cellular, ergodic_rate_d2d};
use crate::error::{Error, Result};
use crate::model::{db_to_linear, dbm_to_watts, BoundKind, ScenarioParams};
use crate::montecarlo::{estimate_coverage, McEstimate, ThinningMode};
use crate::quadrature::QuadratureSpec;
use crate::specfun::ZipfLaw;

/// Numeric keys shared by config files, `--sweep` and curve overrides.
/// The second column lists the accepted `ScenarioParams` field aliases.
const PARAM_KEYS: &[(&str, &[&str])] = &[
    ("cell_radius", &["cell_radius_m"]),
    ("protection_radius", &["protection_radius_m"]),
    ("lambda", &["density_per_m2"]),
    ("users", &[]),
    ("r_d", &["pairing_distance_m"]),
    ("tau", &["sir_threshold_lin"]),
    ("tau_db", &[]),
    ("p_c", &["p_cellular_w"]),
    ("pc_dbm", &[]),
    ("p_i", &["p_d2d_interferer_w"]),
    ("pi_dbm", &[]),
    ("p_d", &["p_d2d_tx_w"]),
    ("pd_dbm", &[]),
    ("alpha", &["path_loss_exp"]),
    ("epsilon", &["power_control"]),
    ("mu", &["fading_rate"]),
    ("n_files", &[]),
    ("zipf_s", &[]),
    ("field_radius", &["field_radius_m"]),
];

/// Canonical name of a numeric parameter key, if it is one.
pub fn canonical_key(name: &str) -> Option<&'static str> {
    PARAM_KEYS
        .iter()
        .find(|(key, aliases)| *key == name || aliases.contains(&name))
        .map(|(key, _)| *key)
}

/// Sets one parameter from its key. dB/dBm keys convert here; `users`
/// sets the density giving that mean count on the disc of radius `R`.
pub fn set_param(params: &mut ScenarioParams, key: &str, value: f64) -> Result<()> {
    let key = canonical_key(key)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown parameter `{key}`")))?;
    match key {
        "cell_radius" => params.cell_radius_m = value,
        "protection_radius" => params.protection_radius_m = value,
        "lambda" => params.density_per_m2 = value,
        "users" => params.density_per_m2 = params.density_for_users(value),
        "r_d" => params.pairing_distance_m = value,
        "tau" => params.sir_threshold_lin = value,
        "tau_db" => params.sir_threshold_lin = db_to_linear(value),
        "p_c" => params.p_cellular_w = value,
        "pc_dbm" => params.p_cellular_w = dbm_to_watts(value),
        "p_i" => params.p_d2d_interferer_w = value,
        "pi_dbm" => params.p_d2d_interferer_w = dbm_to_watts(value),
        "p_d" => params.p_d2d_tx_w = value,
        "pd_dbm" => params.p_d2d_tx_w = dbm_to_watts(value),
        "alpha" => params.path_loss_exp = value,
        "epsilon" => params.power_control = value,
        "mu" => params.fading_rate = value,
        "n_files" => {
            if !(value >= 1.0 && value.fract() == 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "n_files must be a positive integer, got {value}"
                )));
            }
            params.zipf = ZipfLaw::new(value as usize, params.zipf.shape())?;
        }
        "zipf_s" => params.zipf = ZipfLaw::new(params.zipf.n_files(), value)?,
        "field_radius" => params.field_radius_m = Some(value),
        _ => unreachable!("key table and setter disagree on `{key}`"),
    }
    Ok(())
}

/// Points of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepValues {
    List(Vec<f64>),
    Grid {
        start: f64,
        stop: f64,
        steps: usize,
        log: bool,
    },
}

impl SweepValues {
    pub fn points(&self) -> Vec<f64> {
        match *self {
            SweepValues::List(ref v) => v.clone(),
            SweepValues::Grid {
                start,
                stop,
                steps,
                log,
            } => {
                let last = (steps - 1) as f64;
                (0..steps)
                    .map(|i| {
                        let t = i as f64 / last;
                        if i + 1 == steps {
                            stop
                        } else if log {
                            (start.ln() + t * (stop.ln() - start.ln())).exp()
                        } else {
                            start + t * (stop - start)
                        }
                    })
                    .collect()
            }
        }
    }

    /// Parses `start:stop:steps[:log]` or a comma-separated list.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidArgument(msg);
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("not a number: `{}`", s.trim())))
        };
        if text.contains(':') {
            let parts: Vec<&str> = text.split(':').collect();
            let log = match parts.get(3).map(|s| s.trim()) {
                None => false,
                Some("log") => true,
                Some(other) => return Err(bad(format!("unknown grid option `{other}`"))),
            };
            if parts.len() < 3 || parts.len() > 4 {
                return Err(bad(format!(
                    "grid must be start:stop:steps[:log], got `{text}`"
                )));
            }
            let steps: usize = parts[2].trim().parse().map_err(|_| {
                bad(format!(
                    "steps must be an integer, got `{}`",
                    parts[2].trim()
                ))
            })?;
            let grid = SweepValues::Grid {
                start: num(parts[0])?,
                stop: num(parts[1])?,
                steps,
                log,
            };
            grid.check()?;
            Ok(grid)
        } else {
            let v = text.split(',').map(num).collect::<Result<Vec<_>>>()?;
            Ok(SweepValues::List(v))
        }
    }

    fn check(&self) -> Result<()> {
        match *self {
            SweepValues::List(ref v) if v.is_empty() => {
                Err(Error::InvalidArgument("empty value list".into()))
            }
            SweepValues::Grid { steps, .. } if steps < 2 => Err(Error::InvalidArgument(format!(
                "grid needs at least 2 steps, got {steps}"
            ))),
            SweepValues::Grid {
                start, stop, log, ..
            } if log && !(start > 0.0 && stop > 0.0) => Err(Error::InvalidArgument(
                "log grid needs positive endpoints".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// One curve of a sweep: overrides applied on top of the base scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub overrides: Vec<(String, f64)>,
}

impl Curve {
    /// Parses `key=value[;key=value...]`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut overrides = Vec::new();
        for part in text.split(';') {
            let (k, v) = part.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "curve entry must be key=value, got `{}`",
                    part.trim()
                ))
            })?;
            let key = canonical_key(k.trim()).ok_or_else(|| {
                Error::InvalidArgument(format!("unknown parameter `{}`", k.trim()))
            })?;
            let value = v
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("not a number: `{}`", v.trim())))?;
            overrides.push((key.to_string(), value));
        }
        Ok(Self { overrides })
    }

    pub fn label(&self) -> String {
        self.overrides
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Monte Carlo cross-run settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub trials: u64,
    pub seed: u64,
    pub mode: ThinningMode,
}

/// What to evaluate and where.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Swept key; `None` evaluates the base scenario once.
    pub variable: Option<String>,
    pub values: SweepValues,
    /// Bounds to evaluate. The shape of `General` is taken from each row's
    /// scenario, not from the variant.
    pub bounds: Vec<BoundKind>,
    /// Empty means a single curve with no overrides.
    pub curves: Vec<Curve>,
    pub mc: Option<McSettings>,
    /// Also compute the D2D ergodic rate, with the first listed bound.
    pub rate: bool,
    pub quad: QuadratureSpec,
    /// Written as `#` lines above the CSV header.
    pub notes: Vec<String>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            variable: None,
            values: SweepValues::List(Vec::new()),
            bounds: vec![BoundKind::Upper, BoundKind::Lower],
            curves: Vec::new(),
            mc: None,
            rate: false,
            quad: QuadratureSpec::default(),
            notes: Vec::new(),
        }
    }
}

impl SweepSpec {
    /// Sweep of `variable` over `values`.
    pub fn over(variable: &str, values: SweepValues) -> Result<Self> {
        let key = canonical_key(variable).ok_or_else(|| {
            Error::InvalidArgument(format!("unknown sweep variable `{variable}`"))
        })?;
        values.check()?;
        Ok(Self {
            variable: Some(key.to_string()),
            values,
            ..Self::default()
        })
    }

    /// Parses `var=start:stop:steps[:log]` or `var=v1,v2,...`.
    pub fn parse_assignment(text: &str) -> Result<(String, SweepValues)> {
        let (var, values) = text.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("sweep must be var=values, got `{text}`"))
        })?;
        let key = canonical_key(var.trim()).ok_or_else(|| {
            Error::InvalidArgument(format!("unknown sweep variable `{}`", var.trim()))
        })?;
        let values = SweepValues::parse(values)?;
        values.check()?;
        Ok((key.to_string(), values))
    }

    pub fn check(&self) -> Result<()> {
        if self.bounds.is_empty() {
            return Err(Error::InvalidArgument("no bound selected".into()));
        }
        if self.variable.is_some() {
            self.values.check()?;
        }
        self.quad.check()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    Failed(String),
}

/// Results at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Swept key, with the curve overrides in brackets when there are any.
    pub sweep_var: String,
    pub value: Option<f64>,
    pub p_cov_ub: Option<f64>,
    pub p_cov_lb: Option<f64>,
    pub p_cov_general: Option<f64>,
    /// Largest error estimate among the evaluated bounds.
    pub quad_err: Option<f64>,
    pub mc: Option<McEstimate>,
    /// Bits per second per hertz.
    pub rate_d2d: Option<f64>,
    pub status: RowStatus,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub notes: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }
}

/// Evaluates every grid point of every curve. Points run in parallel; rows
/// come back in curve-major, grid order. A failing point yields a row
/// marked failed and does not stop the others.
pub fn run_sweep(params: &ScenarioParams, spec: &SweepSpec) -> Result<SweepResult> {
    spec.check()?;
    let curves = if spec.curves.is_empty() {
        vec![Curve {
            overrides: Vec::new(),
        }]
    } else {
        spec.curves.clone()
    };
    let values: Vec<Option<f64>> = match spec.variable {
        Some(_) => spec.values.points().into_iter().map(Some).collect(),
        None => vec![None],
    };
    let jobs: Vec<(&Curve, Option<f64>)> = curves
        .iter()
        .flat_map(|c| values.iter().map(move |&v| (c, v)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(curve, value)| evaluate_point(params, spec, curve, value))
        .collect();
    Ok(SweepResult {
        notes: spec.notes.clone(),
        rows,
    })
}

fn evaluate_point(
    base: &ScenarioParams,
    spec: &SweepSpec,
    curve: &Curve,
    value: Option<f64>,
) -> SweepRow {
    let var = spec.variable.as_deref().unwrap_or("none");
    let sweep_var = if curve.overrides.is_empty() {
        var.to_string()
    } else {
        format!("{var}[{}]", curve.label())
    };
    let mut row = SweepRow {
        sweep_var,
        value,
        p_cov_ub: None,
        p_cov_lb: None,
        p_cov_general: None,
        quad_err: None,
        mc: None,
        rate_d2d: None,
        status: RowStatus::Ok,
    };
    if let Err(e) = fill_row(base, spec, curve, value, &mut row) {
        row.status = RowStatus::Failed(e.to_string());
    }
    row
}

fn fill_row(
    base: &ScenarioParams,
    spec: &SweepSpec,
    curve: &Curve,
    value: Option<f64>,
    row: &mut SweepRow,
) -> Result<()> {
    let mut params = base.clone();
    for (k, v) in &curve.overrides {
        set_param(&mut params, k, *v)?;
    }
    if let (Some(var), Some(v)) = (spec.variable.as_deref(), value) {
        set_param(&mut params, var, v)?;
    }
    let params = params.validated()?;

    let resolve = |b: BoundKind| match b {
        BoundKind::General(_) => BoundKind::General(params.zipf.shape()),
        other => other,
    };
    let mut quad_err: f64 = 0.0;
    for &bound in &spec.bounds {
        let bound = resolve(bound);
        let cov = coverage_cellular(&params, bound, &spec.quad)?;
        quad_err = quad_err.max(cov.abs_err);
        match bound {
            BoundKind::Upper => row.p_cov_ub = Some(cov.value),
            BoundKind::Lower => row.p_cov_lb = Some(cov.value),
            BoundKind::General(_) => row.p_cov_general = Some(cov.value),
        }
    }
    row.quad_err = Some(quad_err);
    if let Some(mc) = spec.mc {
        row.mc = Some(estimate_coverage(&params, mc.mode, mc.trials, mc.seed)?);
    }
    if spec.rate {
        let rate = ergodic_rate_d2d(&params, resolve(spec.bounds[0]), &spec.quad)?;
        row.rate_d2d = Some(rate.bits_per_hz());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points() {
        let g = SweepValues::parse("1:2:3").unwrap();
        assert_eq!(g.points(), vec![1.0, 1.5, 2.0]);
        let g = SweepValues::parse("1e-5:1e-3:3:log").unwrap();
        let p = g.points();
        assert!((p[1] - 1e-4).abs() < 1e-16);
        assert_eq!(p[2], 1e-3);
        assert_eq!(
            SweepValues::parse("0.5, 2,3").unwrap(),
            SweepValues::List(vec![0.5, 2.0, 3.0])
        );
        assert!(SweepValues::parse("1:2:1").is_err());
        assert!(SweepValues::parse("0:2:5:log").is_err());
        assert!(SweepValues::parse("1:2:x").is_err());
        assert!(SweepValues::parse("1:2:3:lin").is_err());
    }

    #[test]
    fn keys_and_aliases() {
        assert_eq!(canonical_key("density_per_m2"), Some("lambda"));
        assert_eq!(canonical_key("tau_db"), Some("tau_db"));
        assert_eq!(canonical_key("bogus"), None);
        let mut p = ScenarioParams::baseline();
        set_param(&mut p, "tau_db", -5.0).unwrap();
        assert!((p.sir_threshold_lin - 0.316227766).abs() < 1e-9);
        set_param(&mut p, "pi_dbm", -15.0).unwrap();
        assert!((p.p_d2d_interferer_w - 3.16227766e-5).abs() < 1e-12);
        set_param(&mut p, "users", 250.0).unwrap();
        assert!((p.expected_user_count() - 250.0).abs() < 0.01);
        set_param(&mut p, "n_files", 20.0).unwrap();
        set_param(&mut p, "zipf_s", 0.7).unwrap();
        assert_eq!((p.zipf.n_files(), p.zipf.shape()), (20, 0.7));
        assert!(set_param(&mut p, "n_files", 2.5).is_err());
    }

    #[test]
    fn curve_labels() {
        let c = Curve::parse("alpha=1.8; epsilon=0.25").unwrap();
        assert_eq!(c.label(), "alpha=1.8;epsilon=0.25");
        let c = Curve::parse("power_control=0").unwrap();
        assert_eq!(c.label(), "epsilon=0");
        assert!(Curve::parse("alpha").is_err());
        assert!(Curve::parse("beta=2").is_err());
    }

    #[test]
    fn lambda_sweep_is_monotone() {
        let mut spec = SweepSpec::over("lambda", SweepValues::List(vec![0.03e-3, 0.1e-3])).unwrap();
        spec.bounds = vec![BoundKind::Upper];
        let res = run_sweep(&ScenarioParams::baseline(), &spec).unwrap();
        assert_eq!(res.rows.len(), 2);
        let (a, b) = (res.rows[0].p_cov_ub.unwrap(), res.rows[1].p_cov_ub.unwrap());
        assert!(a > b);
        assert!(res.rows[0].p_cov_lb.is_none());
    }

    #[test]
    fn failed_rows_do_not_abort() {
        let spec = SweepSpec::over("epsilon", SweepValues::List(vec![0.5, 1.5, 0.0])).unwrap();
        let res = run_sweep(&ScenarioParams::baseline(), &spec).unwrap();
        assert_eq!(res.failed_rows(), 1);
        assert!(res.rows[0].is_ok() && res.rows[2].is_ok());
        match &res.rows[1].status {
            RowStatus::Failed(msg) => assert!(msg.contains("power_control"), "{msg}"),
            RowStatus::Ok => panic!("row should fail"),
        }
        assert!(res.rows[1].p_cov_ub.is_none());
    }

    #[test]
    fn curves_are_curve_major() {
        let mut spec = SweepSpec::over("tau_db", SweepValues::List(vec![0.0, 10.0])).unwrap();
        spec.curves = vec![
            Curve::parse("epsilon=0").unwrap(),
            Curve::parse("epsilon=0.5").unwrap(),
        ];
        spec.bounds = vec![BoundKind::Lower];
        let res = run_sweep(&ScenarioParams::baseline(), &spec).unwrap();
        let vars: Vec<_> = res.rows.iter().map(|r| r.sweep_var.as_str()).collect();
        assert_eq!(
            vars,
            [
                "tau_db[epsilon=0]",
                "tau_db[epsilon=0]",
                "tau_db[epsilon=0.5]",
                "tau_db[epsilon=0.5]"
            ]
        );
        assert_eq!(res.rows[3].value, Some(10.0));
    }

    #[test]
    fn bound_ordering_rowwise() {
        let mut spec = SweepSpec::over("tau_db", SweepValues::parse("-5:25:4").unwrap()).unwrap();
        spec.bounds = vec![BoundKind::Upper, BoundKind::Lower, BoundKind::General(0.0)];
        let mut params = ScenarioParams::baseline();
        set_param(&mut params, "zipf_s", 3.0).unwrap();
        let res = run_sweep(&params, &spec).unwrap();
        for r in &res.rows {
            let (u, l, g) = (
                r.p_cov_ub.unwrap(),
                r.p_cov_lb.unwrap(),
                r.p_cov_general.unwrap(),
            );
            assert!(l <= g && g <= u, "{l} {g} {u}");
        }
    }
}
