//! Ready-made sweeps reproducing the evaluation figures.

use crate::error::{Error, Result};
use crate::model::{linear_to_db, BoundKind, ScenarioParams};
use crate::sweep::{set_param, Curve, SweepSpec, SweepValues};

pub const PRESET_NAMES: [&str; 7] = ["fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10"];

fn curves(key: &str, values: &[f64]) -> Vec<Curve> {
    values
        .iter()
        .map(|&v| Curve {
            overrides: vec![(key.to_string(), v)],
        })
        .collect()
}

fn grid(start: f64, stop: f64, steps: usize) -> SweepValues {
    SweepValues::Grid {
        start,
        stop,
        steps,
        log: false,
    }
}

/// One-line summary of the base scenario for the CSV preamble.
fn describe(params: &ScenarioParams) -> String {
    let field = match params.field_radius_m {
        Some(r) => format!("{r} m"),
        None => "unbounded".to_string(),
    };
    format!(
        "base: R={} m, R0={} m, users={:.1}, r_d={} m, tau={:.2} dB, p_c={} W, p_i={} W, \
         p_d={} W, alpha={}, epsilon={}, mu={}, N={}, zipf_s={}, field={}",
        params.cell_radius_m,
        params.protection_radius_m,
        params.expected_user_count(),
        params.pairing_distance_m,
        linear_to_db(params.sir_threshold_lin),
        params.p_cellular_w,
        params.p_d2d_interferer_w,
        params.p_d2d_tx_w,
        params.path_loss_exp,
        params.power_control,
        params.fading_rate,
        params.zipf.n_files(),
        params.zipf.shape(),
        field,
    )
}

/// Scenario and sweep for one of [`PRESET_NAMES`].
///
/// | preset | swept | curves | base changes |
/// |---|---|---|---|
/// | fig4 | `lambda` 1e-5..2e-4 | `epsilon` 0, 0.1, 0.25, 0.5 | none |
/// | fig5 | `epsilon` 0..1 | `lambda` 0.03e-3, 0.1e-3, 0.3e-3, 1e-3 | none |
/// | fig6 | `tau_db` -5..30 | `users` 100, 250, 500, 1000 | `epsilon` 0 |
/// | fig7 | `tau_db` -5..30 | `users` 100, 250, 500, 1000 | `epsilon` 0.25 |
/// | fig8 | `r_d` 5..100 | `pi_dbm` -15, -10, -5, 0 | 100 users, `epsilon` 0.25 |
/// | fig9 | `tau_db` -10..30 | `alpha` 1.8, 4 by `epsilon` 0, 0.25 | 250 users, `p_c` 0.25 W, field bounded at `R` |
/// | fig10 | `pc_dbm` 0..24 | `r_d` 10, 100 | 1000 users, rate on |
pub fn preset_figure(name: &str) -> Result<(ScenarioParams, SweepSpec)> {
    let mut params = ScenarioParams::baseline();
    let mut spec = SweepSpec::default();
    let title;
    match name {
        "fig4" => {
            title = "coverage vs interferer density";
            spec.variable = Some("lambda".into());
            spec.values = grid(1e-5, 2e-4, 20);
            spec.curves = curves("epsilon", &[0.0, 0.1, 0.25, 0.5]);
        }
        "fig5" => {
            title = "coverage vs power-control factor";
            spec.variable = Some("epsilon".into());
            spec.values = grid(0.0, 1.0, 11);
            spec.curves = curves("lambda", &[0.03e-3, 0.1e-3, 0.3e-3, 1e-3]);
        }
        "fig6" | "fig7" => {
            title = "coverage vs SIR threshold for several user counts";
            set_param(
                &mut params,
                "epsilon",
                if name == "fig6" { 0.0 } else { 0.25 },
            )?;
            spec.variable = Some("tau_db".into());
            spec.values = grid(-5.0, 30.0, 15);
            spec.curves = curves("users", &[100.0, 250.0, 500.0, 1000.0]);
        }
        "fig8" => {
            title = "coverage vs pairing distance for several interferer powers";
            set_param(&mut params, "users", 100.0)?;
            set_param(&mut params, "epsilon", 0.25)?;
            spec.variable = Some("r_d".into());
            spec.values = grid(5.0, 100.0, 20);
            spec.curves = curves("pi_dbm", &[-15.0, -10.0, -5.0, 0.0]);
        }
        "fig9" => {
            title = "coverage vs SIR threshold, path-loss exponent by power control";
            set_param(&mut params, "users", 250.0)?;
            set_param(&mut params, "p_c", 0.25)?;
            params.field_radius_m = Some(params.cell_radius_m);
            spec.variable = Some("tau_db".into());
            spec.values = grid(-10.0, 30.0, 81);
            spec.curves = [(1.8, 0.0), (4.0, 0.0), (1.8, 0.25), (4.0, 0.25)]
                .iter()
                .map(|&(a, e)| Curve {
                    overrides: vec![("alpha".into(), a), ("epsilon".into(), e)],
                })
                .collect();
        }
        "fig10" => {
            title = "D2D ergodic rate vs cellular power";
            set_param(&mut params, "users", 1000.0)?;
            spec.variable = Some("pc_dbm".into());
            spec.values = grid(0.0, 24.0, 13);
            spec.curves = curves("r_d", &[10.0, 100.0]);
            spec.bounds = vec![BoundKind::Upper];
            spec.rate = true;
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unknown preset `{name}` (expected one of {})",
                PRESET_NAMES.join(", ")
            )))
        }
    }
    spec.notes = vec![format!("preset {name}: {title}"), describe(&params)];
    Ok((params, spec))
}
