//! Flat `key = value` scenario files.
//!
//! ```text
//! # comments run to the end of the line
//! tau_db = -5
//! epsilon = 0.25
//! users = 1000
//! sweep = tau_db=-5:30:15
//! curve = epsilon=0
//! curve = epsilon=0.25
//! bounds = ub, lb
//! ```
//!
//! Unset parameters keep their baseline values. Lines apply in file order,
//! so `users` uses whatever `cell_radius` has been set above it.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{BoundKind, ScenarioParams};
use crate::montecarlo::ThinningMode;
use crate::sweep::{canonical_key, set_param, Curve, McSettings, SweepSpec};

/// Parsed contents of a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub params: ScenarioParams,
    pub spec: SweepSpec,
}

/// Reads and validates a scenario file.
pub fn parse_config(path: &Path) -> Result<ConfigFile> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text, path)
}

/// As [`parse_config`] on text already in memory; `path` only labels errors.
pub fn parse_config_str(text: &str, path: &Path) -> Result<ConfigFile> {
    let mut params = ScenarioParams::baseline();
    let mut spec = SweepSpec::default();
    let mut sweep = None;
    let mut mc_trials = None;
    let mut mc_seed = 0;
    let mut mc_mode = ThinningMode::default();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |msg: String| Error::Config {
            path: PathBuf::from(path),
            line,
            msg,
        };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let number = || {
            value
                .parse::<f64>()
                .map_err(|_| err(format!("`{key}` expects a number, got `{value}`")))
        };
        let integer = || {
            value.parse::<u64>().map_err(|_| {
                err(format!(
                    "`{key}` expects a non-negative integer, got `{value}`"
                ))
            })
        };
        match key {
            "field_radius" if value.eq_ignore_ascii_case("none") => params.field_radius_m = None,
            _ if canonical_key(key).is_some() => {
                set_param(&mut params, key, number()?).map_err(|e| err(e.to_string()))?
            }
            "sweep" => {
                sweep = Some(SweepSpec::parse_assignment(value).map_err(|e| err(e.to_string()))?)
            }
            "curve" => spec
                .curves
                .push(Curve::parse(value).map_err(|e| err(e.to_string()))?),
            "bounds" => {
                spec.bounds = value
                    .split(',')
                    .map(|b| parse_bound(b.trim()))
                    .collect::<Result<_>>()
                    .map_err(|e| err(e.to_string()))?
            }
            "mc_trials" => mc_trials = Some(integer()?),
            "mc_seed" => mc_seed = integer()?,
            "mc_mode" => mc_mode = parse_mode(value).map_err(|e| err(e.to_string()))?,
            "rate" => {
                spec.rate = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(err(format!("`rate` expects true or false, got `{value}`"))),
                }
            }
            "quad_rtol" => {
                let quad = spec.quad.with_rel_tol(number()?);
                quad.check().map_err(|e| err(e.to_string()))?;
                spec.quad = quad;
            }
            _ => return Err(err(format!("unknown key `{key}`"))),
        }
    }
    if let Some((var, values)) = sweep {
        spec.variable = Some(var);
        spec.values = values;
    }
    if let Some(trials) = mc_trials {
        spec.mc = Some(McSettings {
            trials,
            seed: mc_seed,
            mode: mc_mode,
        });
    }
    let params = params.validated()?;
    Ok(ConfigFile { params, spec })
}

/// `ub`, `lb` or `general`.
pub fn parse_bound(text: &str) -> Result<BoundKind> {
    match text {
        "ub" => Ok(BoundKind::Upper),
        "lb" => Ok(BoundKind::Lower),
        "general" => Ok(BoundKind::General(0.0)),
        _ => Err(Error::InvalidArgument(format!(
            "unknown bound `{text}` (expected ub, lb or general)"
        ))),
    }
}

/// `independent` or `nearest`.
pub fn parse_mode(text: &str) -> Result<ThinningMode> {
    match text {
        "independent" => Ok(ThinningMode::IndependentRetention),
        "nearest" => Ok(ThinningMode::NearestNeighbor),
        _ => Err(Error::InvalidArgument(format!(
            "unknown thinning mode `{text}` (expected independent or nearest)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::SweepValues;

    fn parse(text: &str) -> Result<ConfigFile> {
        parse_config_str(text, Path::new("test.cfg"))
    }

    #[test]
    fn empty_is_baseline() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg.params, ScenarioParams::baseline());
        assert_eq!(cfg.spec, SweepSpec::default());
        let cfg = parse("# only a comment\n\n   \n").unwrap();
        assert_eq!(cfg.params, ScenarioParams::baseline());
    }

    #[test]
    fn db_conversion() {
        let cfg = parse("tau_db = -5").unwrap();
        assert!((cfg.params.sir_threshold_lin - 0.3162).abs() < 1e-4);
    }

    #[test]
    fn validation_names_field() {
        match parse("epsilon = 1.5") {
            Err(Error::InvalidScenario(v)) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].field, "power_control");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse("alpha = 4\n\nbogus = 1\n") {
            Err(Error::Config { line, msg, .. }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("bogus"));
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse("alpha = four") {
            Err(Error::Config { line: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse("# header\nalpha 4") {
            Err(e @ Error::Config { line: 2, .. }) => {
                assert!(e.to_string().starts_with("test.cfg:2:"), "{e}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn full_file() {
        let cfg = parse(
            "users = 250 # interferers on the cell\n\
             field_radius = 500\n\
             alpha = 1.8\n\
             sweep = tau_db=-10:30:5\n\
             curve = epsilon=0\n\
             curve = epsilon=0.25\n\
             bounds = ub, general\n\
             zipf_s = 2\n\
             mc_trials = 1000\n\
             mc_seed = 7\n\
             mc_mode = nearest\n\
             rate = true\n\
             quad_rtol = 1e-8\n",
        )
        .unwrap();
        assert_eq!(cfg.params.field_radius_m, Some(500.0));
        assert_eq!(cfg.params.zipf.shape(), 2.0);
        assert_eq!(cfg.spec.variable.as_deref(), Some("tau_db"));
        assert_eq!(
            cfg.spec.values,
            SweepValues::Grid {
                start: -10.0,
                stop: 30.0,
                steps: 5,
                log: false
            }
        );
        assert_eq!(cfg.spec.curves.len(), 2);
        assert_eq!(cfg.spec.bounds[0], BoundKind::Upper);
        assert!(matches!(cfg.spec.bounds[1], BoundKind::General(_)));
        let mc = cfg.spec.mc.unwrap();
        assert_eq!(
            (mc.trials, mc.seed, mc.mode),
            (1000, 7, ThinningMode::NearestNeighbor)
        );
        assert!(cfg.spec.rate);
        assert_eq!(cfg.spec.quad.rel_tol, 1e-8);
    }

    #[test]
    fn unbounded_field_keyword() {
        let cfg = parse("field_radius = 800\nfield_radius = none").unwrap();
        assert_eq!(cfg.params.field_radius_m, None);
    }

    #[test]
    fn missing_file() {
        let err = parse_config(Path::new("/nonexistent/d2dcov.cfg")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
