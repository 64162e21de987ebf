//! Monte Carlo oracle for the analytic results.
//!
//! Every trial draws its own marked Poisson configuration on the annulus
//! `[R0, R]` around the base station. Trial `t` of a run with master seed
//! `seed` always reads from ChaCha8 stream `t` of that seed, so estimates do
//! not depend on how rayon splits the work.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Exp1, Poisson};
use rayon::prelude::*;

use crate::analytic::retention_prob;
use crate::error::{Error, Result};
use crate::model::ScenarioParams;

pub const MIN_TRIALS: u64 = 100;

/// How potential interferers are thinned to active ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThinningMode {
    /// Independent Bernoulli retention with probability `1 - exp(-π λ r_d²)`.
    #[default]
    IndependentRetention,
    /// Keep a point iff its nearest neighbour lies within `r_d`.
    NearestNeighbor,
}

impl ThinningMode {
    pub fn label(self) -> &'static str {
        match self {
            ThinningMode::IndependentRetention => "independent",
            ThinningMode::NearestNeighbor => "nearest",
        }
    }
}

/// One draw of the interferer field and the cellular user.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    /// Cartesian positions (m) relative to the base station.
    pub interferers: Vec<(f64, f64)>,
    pub marks: Vec<usize>,
    pub fading: Vec<f64>,
    pub retained: Vec<bool>,
    /// Polar position `(r_c, θ)` of the cellular user.
    pub cell_user: (f64, f64),
    pub cell_fading: f64,
}

impl Realization {
    pub fn len(&self) -> usize {
        self.interferers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interferers.is_empty()
    }

    pub fn retained_count(&self) -> usize {
        self.retained.iter().filter(|&&r| r).count()
    }

    /// Writes one `x_m,y_m,mark,fading,retained` line per interferer.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x_m,y_m,mark,fading,retained")?;
        for i in 0..self.len() {
            let (x, y) = self.interferers[i];
            writeln!(
                out,
                "{:.9e},{:.9e},{},{:.9e},{}",
                x,
                y,
                self.marks[i],
                self.fading[i],
                u8::from(self.retained[i])
            )?;
        }
        Ok(())
    }
}

/// Sample mean with a normal-approximation confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub trials: u64,
    pub ci95: (f64, f64),
}

impl McEstimate {
    pub fn new(mean: f64, std_err: f64, trials: u64) -> Self {
        Self {
            mean,
            std_err,
            trials,
            ci95: (mean - 1.96 * std_err, mean + 1.96 * std_err),
        }
    }

    /// Estimate of a probability from `hits` successes.
    pub fn from_hits(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Self::new(p, (p * (1.0 - p) / trials as f64).sqrt(), trials)
    }

    /// Estimate of a mean from samples, summed in slice order.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self::new(mean, (var / n).sqrt(), samples.len() as u64)
    }
}

/// Generator for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `sqrt(R0² + u (R² - R0²))`: inverse CDF of the radius of a uniform point
/// of the annulus.
fn annulus_radius(u: f64, inner: f64, outer: f64) -> f64 {
    (inner * inner + u * (outer * outer - inner * inner)).sqrt()
}

/// Draws one configuration. `params` is assumed valid.
pub fn sample_realization<R: Rng + ?Sized>(
    params: &ScenarioParams,
    mode: ThinningMode,
    rng: &mut R,
) -> Realization {
    let r = params.cell_radius_m;
    let r0 = params.protection_radius_m;
    let mean = params.expected_user_count();
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .expect("finite positive mean")
            .sample(rng) as usize
    } else {
        0
    };
    let fade = Exp::new(params.fading_rate).expect("validated fading rate");

    let mut interferers = Vec::with_capacity(count);
    let mut marks = Vec::with_capacity(count);
    let mut fading = Vec::with_capacity(count);
    for _ in 0..count {
        let ri = annulus_radius(rng.random(), r0, r);
        let theta = 2.0 * PI * rng.random::<f64>();
        interferers.push((ri * theta.cos(), ri * theta.sin()));
        marks.push(params.zipf.sample(rng.random()));
        fading.push(fade.sample(rng));
    }
    let retained = match mode {
        ThinningMode::IndependentRetention => {
            let p = retention_prob(params.density_per_m2, params.pairing_distance_m);
            (0..count).map(|_| rng.random::<f64>() < p).collect()
        }
        ThinningMode::NearestNeighbor => {
            nearest_neighbor_within(&interferers, params.pairing_distance_m)
        }
    };
    let r_c = annulus_radius(rng.random(), r0, r);
    let theta_c = 2.0 * PI * rng.random::<f64>();
    let cell_fading: f64 = Exp1.sample(rng);

    Realization {
        interferers,
        marks,
        fading,
        retained,
        cell_user: (r_c, theta_c),
        cell_fading,
    }
}

/// For each point, whether another point lies within `radius` of it.
pub fn nearest_neighbor_within(points: &[(f64, f64)], radius: f64) -> Vec<bool> {
    if !(radius > 0.0) {
        return vec![false; points.len()];
    }
    let key = |(x, y): (f64, f64)| ((x / radius).floor() as i64, (y / radius).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, &p) in points.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }
    let r2 = radius * radius;
    points
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            let (cx, cy) = key((x, y));
            (-1..=1).any(|dx| {
                (-1..=1).any(|dy| {
                    grid.get(&(cx + dx, cy + dy)).is_some_and(|cell| {
                        cell.iter().any(|&j| {
                            let (xj, yj) = points[j];
                            j != i && (xj - x).powi(2) + (yj - y).powi(2) <= r2
                        })
                    })
                })
            })
        })
        .collect()
}

/// SIR at the base station and whether it reaches `τ`. No retained
/// interferers gives an infinite SIR.
pub fn sir_trial(real: &Realization, params: &ScenarioParams) -> (f64, bool) {
    let alpha = params.path_loss_exp;
    let (r_c, _) = real.cell_user;
    let signal =
        params.p_cellular_w * real.cell_fading * r_c.powf(alpha * (params.power_control - 1.0));
    let interference = aggregate_interference(real, params);
    if interference == 0.0 {
        return (f64::INFINITY, true);
    }
    let sir = signal / interference;
    (sir, sir >= params.sir_threshold_lin)
}

/// `Σ p_i f_i r_i^-α / m_i` over retained points, measured at the origin.
fn aggregate_interference(real: &Realization, params: &ScenarioParams) -> f64 {
    let alpha = params.path_loss_exp;
    let mut total = 0.0;
    for i in 0..real.len() {
        if real.retained[i] {
            let (x, y) = real.interferers[i];
            let d2 = x * x + y * y;
            total += params.p_d2d_interferer_w * real.fading[i] * d2.powf(-alpha / 2.0)
                / real.marks[i] as f64;
        }
    }
    total
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    Ok(())
}

/// Empirical coverage of the cellular user over `trials` configurations.
pub fn estimate_coverage(
    params: &ScenarioParams,
    mode: ThinningMode,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_trials(trials)?;
    let params = params.clone().validated()?;
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let real = sample_realization(&params, mode, &mut trial_rng(seed, t));
            u64::from(sir_trial(&real, &params).1)
        })
        .sum();
    Ok(McEstimate::from_hits(hits, trials))
}

/// Uniform point of the disc of radius `r`.
fn disc_point<R: Rng + ?Sized>(r: f64, rng: &mut R) -> (f64, f64) {
    let rho = r * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    (rho * theta.cos(), rho * theta.sin())
}

/// Empirical ergodic rate (b/s/Hz) of the tagged D2D pair.
///
/// The D2D receiver sits at the centre of the interferer field. The
/// cellular user interferes from the distance between two independent
/// uniform points of the cell.
pub fn estimate_rate_d2d(
    params: &ScenarioParams,
    mode: ThinningMode,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    let p = retention_prob(params.density_per_m2, params.pairing_distance_m);
    if params.density_per_m2 * p == 0.0
        && (params.p_cellular_w == 0.0 || params.pairing_distance_m == 0.0)
    {
        return Err(Error::UnboundedRate);
    }
    check_trials(trials)?;
    if !(params.pairing_distance_m > 0.0) {
        return Err(Error::InvalidArgument(
            "rate estimate needs a positive pairing distance".into(),
        ));
    }
    let params = params.clone().validated()?;
    let alpha = params.path_loss_exp;
    let rates: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let real = sample_realization(&params, mode, &mut rng);
            let (ax, ay) = disc_point(params.cell_radius_m, &mut rng);
            let (bx, by) = disc_point(params.cell_radius_m, &mut rng);
            let d2 = (ax - bx).powi(2) + (ay - by).powi(2);
            let link: f64 = Exp1.sample(&mut rng);
            let signal = params.p_d2d_tx_w * link * params.pairing_distance_m.powf(-alpha);
            let cellular = params.p_cellular_w * real.cell_fading * d2.powf(-alpha / 2.0);
            let sir = signal / (cellular + aggregate_interference(&real, &params));
            sir.ln_1p() / LN_2
        })
        .collect();
    Ok(McEstimate::from_samples(&rates))
}
