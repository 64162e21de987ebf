//! Analytic coverage of the cellular user and ergodic rate of a D2D pair.
//!
//! With exponential fading the coverage conditioned on the cellular distance
//! is the Laplace functional of the thinned, marked interferer field:
//!
//! ```text
//! L(s) = exp(-2π λ p ∫_{R0}^{R_f} [1 - g(x)] x dx)
//! ```
//!
//! where `g(x)` averages `μ / (μ + s p_i x^-α / m)` over the Zipf marks `m`.
//! Writing `c = K / x^α` with `K = s p_i / μ`, the three kernel forms are
//!
//! * general: `Σ_m z(m) m / (m + c)`
//! * upper (`s = 1`): `[Ψ(N+1+c) - Ψ(1+c)] / H_N`
//! * lower (`s = 10`): `[ζ(10) - Ψ(9, N+1)/9!] / ((1+c) H_{N,10})`
//!
//! The integrand uses `1 - g` in a form free of cancellation, so the far
//! tail keeps full relative precision.

use std::cell::Cell;
use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::model::{BoundKind, ScenarioParams};
use crate::quadrature::{integrate, GaussLegendre, Integral, QuadratureSpec};
use crate::specfun::{
    digamma_difference_unchecked, harmonic_generalized, polygamma_unchecked, ZipfLaw,
    POLYGAMMA9_COEFF, ZETA10_COEFF,
};

/// Outer Gauss–Legendre order for the cellular-distance average; the
/// half-order rule supplies the error estimate.
const OUTER_ORDER: usize = 128;

/// Below this ratio the upper-bound complement switches from `1 - g` to the
/// difference of two digamma increments.
const UB_SWITCH: f64 = 1.0;

/// Retention probability of the pairing-proximity thinning,
/// `1 - exp(-π λ r_d²)`.
pub fn retention_prob(density: f64, pairing_distance: f64) -> f64 {
    -(-PI * density * pairing_distance * pairing_distance).exp_m1()
}

/// Mean distance between two uniform points of a disc of radius `R`,
/// `128 R / (45 π)`.
pub fn mean_disc_distance(cell_radius: f64) -> f64 {
    128.0 * cell_radius / (45.0 * PI)
}

/// General kernel `Σ_m z(m) m / (m + c)` for the ratio `c = K / x^α`.
pub fn g_general(c: f64, law: &ZipfLaw) -> f64 {
    (1..=law.n_files())
        .rev()
        .map(|m| {
            let mf = m as f64;
            law.pmf_unchecked(m) * mf / (mf + c)
        })
        .sum()
}

/// Digamma closed form for Zipf shape 1.
pub fn g_ub(c: f64, n_files: usize) -> f64 {
    let h = harmonic_number(n_files);
    digamma_difference_unchecked(1.0 + c, n_files as f64) / h
}

/// Polygamma closed form for Zipf shape 10, evaluated literally.
pub fn g_lb(c: f64, n_files: usize) -> f64 {
    lb_bracket(n_files) / ((1.0 + c) * harmonic_generalized(n_files, 10.0).expect("n >= 1"))
}

/// `ζ(10) - Ψ(9, N+1)/9!`, i.e. `Σ_{m<=N} m^-10` through the closed forms.
pub fn lb_bracket(n_files: usize) -> f64 {
    ZETA10_COEFF * PI.powi(10) - POLYGAMMA9_COEFF * polygamma_unchecked(9, n_files as f64 + 1.0)
}

fn harmonic_number(n: usize) -> f64 {
    harmonic_generalized(n, 1.0).expect("n >= 1")
}

/// Mark-averaged interference kernel at one Laplace argument.
#[derive(Debug, Clone)]
pub struct InterferenceKernel {
    laplace_arg: f64,
    a_const: f64,
    scale: f64,
    alpha: f64,
    bound: BoundKind,
    law: ZipfLaw,
    harmonic: f64,
}

impl InterferenceKernel {
    /// Kernel seen by the cellular user at distance `r_c`:
    /// `s_c = τ r_c^{α(1-ε)} / p_c`, `A = τ p_i / (p_c μ)`.
    pub fn cellular(params: &ScenarioParams, r_c: f64, bound: BoundKind) -> Result<Self> {
        let distance_gain = r_c.powf(params.path_loss_exp * (1.0 - params.power_control));
        Self::build(
            params,
            params.sir_threshold_lin,
            params.p_cellular_w,
            distance_gain,
            bound,
        )
    }

    /// Kernel seen by the D2D receiver at SIR level `γ`:
    /// `s_d = γ r_d^α / p_d`, `A = γ p_i / (p_d μ)`.
    pub fn d2d(params: &ScenarioParams, gamma: f64, bound: BoundKind) -> Result<Self> {
        let distance_gain = params.pairing_distance_m.powf(params.path_loss_exp);
        Self::build(params, gamma, params.p_d2d_tx_w, distance_gain, bound)
    }

    fn build(
        params: &ScenarioParams,
        threshold: f64,
        tx_power: f64,
        distance_gain: f64,
        bound: BoundKind,
    ) -> Result<Self> {
        let n = params.zipf.n_files();
        let law = match bound {
            BoundKind::General(s) => ZipfLaw::new(n, s)?,
            BoundKind::Upper => ZipfLaw::new(n, 1.0)?,
            BoundKind::Lower => {
                let law = ZipfLaw::new(n, 10.0)?;
                let ratio = lb_bracket(n) / law.norm();
                if (ratio - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "closed-form bracket disagrees with H_(N,10) for N = {n}: ratio {ratio}"
                    )));
                }
                law
            }
        };
        let laplace_arg = threshold / tx_power * distance_gain;
        let a_const = threshold * params.p_d2d_interferer_w / (tx_power * params.fading_rate);
        let implied = a_const * params.fading_rate / params.p_d2d_interferer_w;
        let expected = threshold / tx_power;
        if (implied - expected).abs() > 1e-12 * expected.abs() {
            return Err(Error::InvalidArgument(format!(
                "inconsistent kernel constant: A mu / p_i = {implied}, tau / p = {expected}"
            )));
        }
        if !(laplace_arg >= 0.0 && laplace_arg.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Laplace argument must be finite and non-negative, got {laplace_arg}"
            )));
        }
        Ok(Self {
            laplace_arg,
            a_const,
            scale: a_const * distance_gain,
            alpha: params.path_loss_exp,
            bound,
            harmonic: harmonic_number(n),
            law,
        })
    }

    /// `s_c` or `s_d`.
    pub fn laplace_arg(&self) -> f64 {
        self.laplace_arg
    }

    /// `A` of the closed forms.
    pub fn a_const(&self) -> f64 {
        self.a_const
    }

    /// `K`, so that the kernel ratio is `c(x) = K / x^α`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn bound(&self) -> BoundKind {
        self.bound
    }

    pub fn ratio(&self, x: f64) -> f64 {
        self.scale / x.powf(self.alpha)
    }

    /// `g(x)` in the form selected by the bound.
    pub fn g(&self, x: f64) -> f64 {
        let c = self.ratio(x);
        match self.bound {
            BoundKind::General(_) => g_general(c, &self.law),
            BoundKind::Upper => g_ub(c, self.law.n_files()),
            BoundKind::Lower => g_lb(c, self.law.n_files()),
        }
    }

    /// `1 - g(x)` without cancellation.
    pub fn complement(&self, x: f64) -> f64 {
        self.complement_at_ratio(self.ratio(x))
    }

    fn complement_at_ratio(&self, c: f64) -> f64 {
        match self.bound {
            BoundKind::General(_) => (1..=self.law.n_files())
                .rev()
                .map(|m| self.law.pmf_unchecked(m) * c / (m as f64 + c))
                .sum(),
            BoundKind::Upper => {
                let n = self.law.n_files() as f64;
                if c >= UB_SWITCH {
                    1.0 - digamma_difference_unchecked(1.0 + c, n) / self.harmonic
                } else {
                    // H_N - [Ψ(N+1+c) - Ψ(1+c)] = [Ψ(1+c) - Ψ(1)] - [Ψ(N+1+c) - Ψ(N+1)]
                    (digamma_difference_unchecked(1.0, c)
                        - digamma_difference_unchecked(n + 1.0, c))
                        / self.harmonic
                }
            }
            // bracket / H_(N,10) = 1 was checked at construction
            BoundKind::Lower => c / (1.0 + c),
        }
    }

    /// `∫ [1 - g(x)] x dx` over the interferer field `[R0, R_f]`.
    pub fn interference_integral(
        &self,
        inner_radius: f64,
        field_radius: Option<f64>,
        quad: &QuadratureSpec,
    ) -> Result<Integral> {
        if self.scale == 0.0 {
            return Ok(Integral::ZERO);
        }
        let alpha = self.alpha;
        let f = |x: f64| self.complement(x) * x;
        let knee = self.scale.powf(1.0 / alpha);
        let outer = field_radius.unwrap_or(f64::INFINITY);

        let mut total = Integral::ZERO;
        let mut lo = inner_radius;
        let split = 4.0 * knee.max(inner_radius);
        for cut in [knee, split] {
            if cut > lo {
                let hi = cut.min(outer);
                total = total.add(integrate(f, lo, hi, quad)?);
                lo = hi;
            }
        }
        if lo >= outer {
            return Ok(total);
        }
        let tail = match field_radius {
            Some(rf) => {
                // x = e^t
                integrate(
                    |t: f64| {
                        let x = t.exp();
                        f(x) * x
                    },
                    lo.ln(),
                    rf.ln(),
                    quad,
                )?
            }
            None => {
                // x = lo v^-β with β = 1/(α-2): the integrand tends to a
                // constant as v -> 0
                let beta = 1.0 / (alpha - 2.0);
                integrate(
                    |v: f64| {
                        if v <= 0.0 {
                            return 0.0;
                        }
                        let x = lo * v.powf(-beta);
                        let jac = beta * x / v;
                        let val = f(x) * jac;
                        if val.is_finite() {
                            val
                        } else {
                            0.0
                        }
                    },
                    0.0,
                    1.0,
                    quad,
                )?
            }
        };
        Ok(total.add(tail))
    }

    /// Closed form of the interference integral for `α = 4`: every kernel is
    /// a mixture of `b / (x⁴ + b)` terms and
    /// `∫ x b/(x⁴+b) dx = (√b/2) atan(x²/√b)`.
    pub fn interference_integral_alpha4(
        &self,
        inner_radius: f64,
        field_radius: Option<f64>,
    ) -> Result<f64> {
        if self.alpha != 4.0 {
            return Err(Error::InvalidArgument(format!(
                "arctangent form needs alpha = 4, got {}",
                self.alpha
            )));
        }
        let term = |b: f64| {
            if b == 0.0 {
                return 0.0;
            }
            let rb = b.sqrt();
            let lo = (inner_radius * inner_radius / rb).atan();
            let hi = match field_radius {
                Some(rf) => (rf * rf / rb).atan(),
                None => PI / 2.0,
            };
            0.5 * rb * (hi - lo)
        };
        let n = self.law.n_files();
        Ok(match self.bound {
            BoundKind::General(_) => (1..=n)
                .map(|m| self.law.pmf_unchecked(m) * term(self.scale / m as f64))
                .sum(),
            BoundKind::Upper => (1..=n)
                .map(|m| term(self.scale / m as f64) / (m as f64 * self.harmonic))
                .sum(),
            BoundKind::Lower => term(self.scale),
        })
    }
}

/// Value of a Laplace functional with the inner-integral estimate behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceValue {
    pub value: f64,
    /// `2π λ p`, the factor multiplying the interference integral.
    pub intensity: f64,
    pub interference: Integral,
}

impl LaplaceValue {
    /// First-order propagation of the inner quadrature error.
    pub fn abs_err(&self) -> f64 {
        self.value * self.intensity * self.interference.abs_err
    }
}

/// `L_{I_A}(s) = exp(-2π λ p ∫ [1 - g(x)] x dx)` for the kernel's argument.
pub fn laplace_ia(
    kernel: &InterferenceKernel,
    params: &ScenarioParams,
    quad: &QuadratureSpec,
) -> Result<LaplaceValue> {
    let p = retention_prob(params.density_per_m2, params.pairing_distance_m);
    let intensity = 2.0 * PI * params.density_per_m2 * p;
    if intensity == 0.0 || params.p_d2d_interferer_w == 0.0 {
        return Ok(LaplaceValue {
            value: 1.0,
            intensity,
            interference: Integral::ZERO,
        });
    }
    let interference =
        kernel.interference_integral(params.protection_radius_m, params.field_radius_m, quad)?;
    Ok(LaplaceValue {
        value: (-intensity * interference.value).exp(),
        intensity,
        interference,
    })
}

/// Coverage probability with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coverage {
    pub value: f64,
    /// Gauss–Legendre order-halving difference plus the propagated inner
    /// quadrature error.
    pub abs_err: f64,
}

/// Conditional coverage at a fixed cellular distance.
pub fn coverage_at_distance(
    params: &ScenarioParams,
    r_c: f64,
    bound: BoundKind,
    quad: &QuadratureSpec,
) -> Result<LaplaceValue> {
    let kernel = InterferenceKernel::cellular(params, r_c, bound)?;
    laplace_ia(&kernel, params, quad)
}

/// Average coverage `∫_{R0}^{R} L_{I_A}(s_c(r)) 2r/R² dr`.
pub fn coverage_cellular(
    params: &ScenarioParams,
    bound: BoundKind,
    quad: &QuadratureSpec,
) -> Result<Coverage> {
    let params = params.clone().validated()?;
    quad.check()?;
    let r0 = params.protection_radius_m;
    let r = params.cell_radius_m;
    let weight = |rc: f64| 2.0 * rc / (r * r);

    let fine = GaussLegendre::new(OUTER_ORDER);
    let coarse = GaussLegendre::new(OUTER_ORDER / 2);
    let mut fine_sum = 0.0;
    let mut propagated = 0.0;
    for (rc, w) in fine.mapped(r0, r) {
        let l = coverage_at_distance(&params, rc, bound, quad)?;
        fine_sum += w * weight(rc) * l.value;
        propagated += w * weight(rc) * l.abs_err();
    }
    let mut coarse_sum = 0.0;
    for (rc, w) in coarse.mapped(r0, r) {
        coarse_sum += w * weight(rc) * coverage_at_distance(&params, rc, bound, quad)?.value;
    }
    Ok(Coverage {
        value: fine_sum,
        abs_err: (fine_sum - coarse_sum).abs() + propagated,
    })
}

/// `exp(-σ² τ r_c^α / p_c)`, the factor noise would add to the conditional
/// coverage.
pub fn noise_negligibility(
    noise_w: f64,
    sir_threshold_lin: f64,
    p_cellular_w: f64,
    r_c: f64,
    alpha: f64,
) -> f64 {
    (-noise_w * sir_threshold_lin / p_cellular_w * r_c.powf(alpha)).exp()
}

/// Approximate Laplace transform of the cellular interference at the D2D
/// receiver, with the cellular user at the mean disc distance.
pub fn laplace_ic_approx(gamma: f64, params: &ScenarioParams) -> f64 {
    let dbar = mean_disc_distance(params.cell_radius_m);
    let rd = params.pairing_distance_m;
    let spread = (gamma * params.p_cellular_w / params.p_d2d_tx_w).powf(2.0 / params.path_loss_exp);
    1.0 / (1.0 + spread * rd * rd / (dbar * dbar))
}

/// Ergodic rate of a D2D pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub nats: f64,
    pub abs_err_nats: f64,
}

impl Rate {
    pub fn bits_per_hz(&self) -> f64 {
        self.nats / LN_2
    }
}

/// `∫_0^∞ L_{I_c}(s_d) L_{I_A}(s_d) / (1+γ) dγ` with `γ = e^u - 1`.
///
/// The `u` range is truncated where the tail bound
/// `∫_U^∞ L_{I_c} du <= (α/2) 2^{2/α} e^{-2U/α} / a` drops below `abs_tol`.
pub fn ergodic_rate_d2d(
    params: &ScenarioParams,
    bound: BoundKind,
    quad: &QuadratureSpec,
) -> Result<Rate> {
    let p = retention_prob(params.density_per_m2, params.pairing_distance_m);
    let spread_coeff = cellular_spread_coeff(params);
    if params.density_per_m2 * p == 0.0 && spread_coeff == 0.0 {
        return Err(Error::UnboundedRate);
    }
    if !(params.pairing_distance_m > 0.0) {
        return Err(Error::InvalidArgument(
            "ergodic rate needs a positive pairing distance".into(),
        ));
    }
    let params = params.clone().validated()?;
    quad.check()?;
    let alpha = params.path_loss_exp;

    let upper = ((alpha / 2.0)
        * (2f64.powf(2.0 / alpha) * alpha / 2.0 / (spread_coeff * quad.abs_tol)).ln())
    .max(LN_2);
    let tail_bound =
        alpha / 2.0 * 2f64.powf(2.0 / alpha) * (-2.0 * upper / alpha).exp() / spread_coeff;

    let failure: Cell<Option<Error>> = Cell::new(None);
    let integrand = |u: f64| -> f64 {
        let gamma = u.exp_m1();
        let lc = laplace_ic_approx(gamma, &params);
        match InterferenceKernel::d2d(&params, gamma, bound)
            .and_then(|k| laplace_ia(&k, &params, quad))
        {
            Ok(la) => lc * la.value,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        }
    };
    let outer = integrate(integrand, 0.0, upper, quad);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let outer = outer?;
    // |ΔL| <= L |ln L| δ <= δ/e per point for a relative inner error δ
    let propagated = quad.rel_tol * upper / std::f64::consts::E;
    Ok(Rate {
        nats: outer.value,
        abs_err_nats: outer.abs_err + tail_bound + propagated,
    })
}

/// `a` in `L_{I_c} = 1 / (1 + a γ^{2/α})`.
fn cellular_spread_coeff(params: &ScenarioParams) -> f64 {
    let dbar = mean_disc_distance(params.cell_radius_m);
    let rd = params.pairing_distance_m;
    (params.p_cellular_w / params.p_d2d_tx_w).powf(2.0 / params.path_loss_exp) * rd * rd
        / (dbar * dbar)
}
