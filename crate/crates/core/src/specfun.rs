//! Special functions and the Zipf popularity law.
//!
//! Everything here works on real, positive arguments only. Digamma and
//! polygamma shift the argument upwards with the recurrence and finish with
//! the Bernoulli asymptotic series.

use crate::error::{Error, Result};

/// `1/93555`, so that `ZETA10_COEFF * π^10 = ζ(10)`.
pub const ZETA10_COEFF: f64 = 1.0 / 93555.0;

/// `1/9!`, the normaliser turning `Ψ(9, N+1)` into the tail sum `Σ_{m>N} m^-10`.
pub const POLYGAMMA9_COEFF: f64 = 1.0 / 362880.0;

/// Bernoulli numbers `B_2, B_4, …, B_18`.
const BERNOULLI_EVEN: [f64; 9] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
];

/// Generalized harmonic number `H_{n,s} = Σ_{i=1..n} i^-s`, summed smallest
/// term first.
pub fn harmonic_generalized(n: usize, s: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "harmonic number needs n >= 1".into(),
        ));
    }
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "harmonic number needs a positive exponent, got {s}"
        )));
    }
    Ok((1..=n).rev().map(|i| (i as f64).powf(-s)).sum())
}

/// Digamma `Ψ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "digamma needs a finite positive argument, got {x}"
        )));
    }
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Σ B_2k / (2k x^2k), Horner in 1/x²
    let mut series = 0.0;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate().rev() {
        series = series * inv2 + b / (2.0 * (k as f64 + 1.0));
    }
    series *= inv2;
    acc + x.ln() - 0.5 / x - series
}

/// `Ψ(x + h) - Ψ(x)` for `x > 0`, `h >= 0`, without the cancellation of
/// subtracting two digamma values. Same recurrence shift and asymptotic
/// series as [`digamma`], differenced term by term.
pub fn digamma_difference(x: f64, h: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() || !(h >= 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "digamma difference needs x > 0 and h >= 0, got x = {x}, h = {h}"
        )));
    }
    Ok(digamma_difference_unchecked(x, h))
}

pub(crate) fn digamma_difference_unchecked(mut x: f64, h: f64) -> f64 {
    if h == 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    while x < 10.0 {
        // 1/x - 1/(x+h)
        acc += h / (x * (x + h));
        x += 1.0;
    }
    let log_ratio = (h / x).ln_1p();
    acc += log_ratio + 0.5 * h / (x * (x + h));
    let inv2 = 1.0 / (x * x);
    let mut pow = inv2;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let two_k = 2.0 * (k as f64 + 1.0);
        // x^-2k - (x+h)^-2k = x^-2k (1 - (1+h/x)^-2k)
        acc += b / two_k * pow * -(-two_k * log_ratio).exp_m1();
        pow *= inv2;
    }
    acc
}

/// Polygamma `Ψ(n, x)`, the `n`-th derivative of digamma, for `n >= 1` and
/// `x > 0`.
pub fn polygamma(order: u32, x: f64) -> Result<f64> {
    if order == 0 {
        return digamma(x);
    }
    if order > 40 {
        return Err(Error::InvalidArgument(format!(
            "polygamma order {order} is out of the supported range"
        )));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "polygamma needs a finite positive argument, got {x}"
        )));
    }
    Ok(polygamma_unchecked(order, x))
}

pub(crate) fn polygamma_unchecked(order: u32, mut x: f64) -> f64 {
    let n = order as i32;
    let nf = order as f64;
    let fact_n = factorial(order);
    let sign = if order % 2 == 1 { 1.0 } else { -1.0 };

    // Σ_j (x+j)^-(n+1) over the shifted-away head; every term has the same sign.
    let threshold = 20.0 + nf;
    let mut head = 0.0;
    while x < threshold {
        head += x.powi(-(n + 1));
        x += 1.0;
    }

    // Asymptotic tail: (n-1)!/x^n + n!/(2 x^(n+1)) + Σ_k B_2k (2k+n-1)!/((2k)! x^(2k+n))
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut tail = factorial(order - 1) * inv.powi(n) + 0.5 * fact_n * inv.powi(n + 1);
    let mut pow = inv.powi(n + 2);
    // ratio (2k+n-1)!/(2k)! built incrementally
    let mut ratio = fact_n * (nf + 1.0) / 2.0; // k = 1: (n+1)!/2!
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let k = k as f64 + 1.0;
        if k > 1.0 {
            ratio *= (2.0 * k + nf - 2.0) * (2.0 * k + nf - 1.0) / ((2.0 * k - 1.0) * (2.0 * k));
        }
        tail += b * ratio * pow;
        pow *= inv2;
    }
    sign * (fact_n * head + tail)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Zipf law over `n_files` ranks with shape `s`: `P(k) = k^-s / H_{N,s}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZipfLaw {
    n_files: usize,
    shape: f64,
    norm: f64,
    cdf: Vec<f64>,
}

impl ZipfLaw {
    pub fn new(n_files: usize, shape: f64) -> Result<Self> {
        let norm = harmonic_generalized(n_files, shape)?;
        let mut cdf = Vec::with_capacity(n_files);
        let mut acc = 0.0;
        for k in 1..=n_files {
            acc += (k as f64).powf(-shape) / norm;
            cdf.push(acc);
        }
        // the last entry must catch every u in [0, 1)
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Ok(Self {
            n_files,
            shape,
            norm,
            cdf,
        })
    }

    pub fn n_files(&self) -> usize {
        self.n_files
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    /// The cached normaliser `H_{N,s}`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn pmf(&self, rank: usize) -> Result<f64> {
        if rank == 0 || rank > self.n_files {
            return Err(Error::InvalidArgument(format!(
                "rank {rank} outside [1, {}]",
                self.n_files
            )));
        }
        Ok(self.pmf_unchecked(rank))
    }

    pub(crate) fn pmf_unchecked(&self, rank: usize) -> f64 {
        (rank as f64).powf(-self.shape) / self.norm
    }

    pub fn cdf(&self, rank: usize) -> f64 {
        match rank {
            0 => 0.0,
            k if k >= self.n_files => 1.0,
            k => self.cdf[k - 1],
        }
    }

    /// Inverse-CDF draw: the smallest rank whose cumulative mass exceeds `u`.
    pub fn sample(&self, u: f64) -> usize {
        debug_assert!((0.0..1.0).contains(&u), "u = {u} outside [0, 1)");
        let idx = self.cdf.partition_point(|&c| c <= u);
        idx.min(self.n_files - 1) + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Ψ(n, x) = (-1)^(n+1) n! Σ_j (x+j)^-(n+1), head summed directly and the
    /// remainder closed with Euler–Maclaurin (integral + half term + B2 term).
    fn polygamma_oracle(n: u32, x: f64) -> f64 {
        let p = (n + 1) as f64;
        let cut = 2000usize;
        let head: f64 = (0..cut).rev().map(|j| (x + j as f64).powf(-p)).sum();
        let a = x + cut as f64;
        let tail = a.powf(1.0 - p) / (p - 1.0) + 0.5 * a.powf(-p) + p / 12.0 * a.powf(-p - 1.0)
            - p * (p + 1.0) * (p + 2.0) / 720.0 * a.powf(-p - 3.0);
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        sign * factorial(n) * (head + tail)
    }

    fn tail_sum_oracle(n: usize, p: f64) -> f64 {
        // Σ_{m>n} m^-p for p = 10 converges after a few hundred terms
        (n + 1..=n + 5000).rev().map(|m| (m as f64).powf(-p)).sum()
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic_generalized(1, 3.7).unwrap(), 1.0);
        let h10: f64 = (1..=10).map(|i| 1.0 / i as f64).sum();
        assert!((harmonic_generalized(10, 1.0).unwrap() - 2.9289682539682538).abs() < 1e-15);
        assert!((h10 - 2.9289682539682538).abs() < 1e-15);
        let h10_10 = harmonic_generalized(10, 10.0).unwrap();
        assert!((h10_10 - 1.0009945750585496).abs() < 1e-14);
        assert!(h10_10 < ZETA10_COEFF * PI.powi(10));
    }

    #[test]
    fn harmonic_rejects_bad_input() {
        assert!(harmonic_generalized(0, 1.0).is_err());
        assert!(harmonic_generalized(5, 0.0).is_err());
        assert!(harmonic_generalized(5, -1.0).is_err());
        assert!(harmonic_generalized(5, f64::NAN).is_err());
    }

    #[test]
    fn digamma_examples() {
        assert!((digamma(1.0).unwrap() + 0.5772156649015329).abs() < 1e-12);
        for x in [0.5, 1.0, 7.25] {
            let d = digamma(x + 1.0).unwrap() - digamma(x).unwrap();
            assert!((d - 1.0 / x).abs() < 1e-12, "x = {x}");
        }
        let d = digamma(11.0).unwrap() - digamma(1.0).unwrap();
        assert!((d - 2.9289682539682538).abs() < 1e-12);
        assert!(digamma(0.0).is_err());
        assert!(digamma(-2.5).is_err());
    }

    #[test]
    fn digamma_small_and_large_arguments() {
        // Ψ(1/2) = -γ - 2 ln 2
        let expect = -0.5772156649015329 - 2.0 * std::f64::consts::LN_2;
        assert!((digamma(0.5).unwrap() - expect).abs() < 1e-13);
        // Ψ(x) ~ ln x - 1/(2x) for huge x
        let x = 1e12;
        assert!((digamma(x).unwrap() - (x.ln() - 0.5 / x)).abs() < 1e-12);
    }

    #[test]
    fn digamma_difference_agrees_with_plain_difference() {
        for &(x, h) in &[
            (0.3, 0.7),
            (1.0, 10.0),
            (2.5, 1e-3),
            (11.0, 4.0),
            (1e4, 3.0),
        ] {
            let plain = digamma(x + h).unwrap() - digamma(x).unwrap();
            let diff = digamma_difference(x, h).unwrap();
            assert!(
                (plain - diff).abs() <= 1e-13 * plain.abs().max(1.0),
                "x={x} h={h}"
            );
        }
        assert_eq!(digamma_difference(3.0, 0.0).unwrap(), 0.0);
        // small h: Ψ(1+h) - Ψ(1) ≈ h ζ(2)
        let h = 1e-12;
        let d = digamma_difference(1.0, h).unwrap();
        assert!((d / h - PI * PI / 6.0).abs() < 1e-9);
        assert!(digamma_difference(0.0, 1.0).is_err());
        assert!(digamma_difference(1.0, -1.0).is_err());
    }

    #[test]
    fn polygamma_examples() {
        let z2 = PI * PI / 6.0;
        assert!((polygamma(1, 1.0).unwrap() - z2).abs() < 1e-12);
        let tail = tail_sum_oracle(10, 10.0);
        let psi9 = polygamma(9, 11.0).unwrap();
        assert!((psi9 - 362880.0 * tail).abs() <= 1e-12 * psi9.abs());
        let h = harmonic_generalized(10, 10.0).unwrap();
        let bracket = ZETA10_COEFF * PI.powi(10) - POLYGAMMA9_COEFF * psi9;
        assert!((bracket - h).abs() < 1e-12);
        assert!(polygamma(3, 0.0).is_err());
    }

    #[test]
    fn polygamma_matches_series_oracle() {
        for n in 1..=12u32 {
            for &x in &[0.1, 0.5, 1.0, 2.5, 11.0, 37.0, 250.0] {
                let got = polygamma(n, x).unwrap();
                let want = polygamma_oracle(n, x);
                assert!(
                    (got - want).abs() <= 1e-12 * want.abs(),
                    "n={n} x={x}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn polygamma_tail_identity() {
        for n in [1usize, 10, 50] {
            let lhs = POLYGAMMA9_COEFF * polygamma(9, n as f64 + 1.0).unwrap();
            let rhs = tail_sum_oracle(n, 10.0);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs, "N = {n}");
        }
    }

    #[test]
    fn zipf_pmf_examples() {
        assert_eq!(ZipfLaw::new(1, 4.2).unwrap().pmf(1).unwrap(), 1.0);
        let law = ZipfLaw::new(10, 10.0).unwrap();
        assert!((law.pmf(1).unwrap() - 0.99901).abs() < 1e-4);
        let law = ZipfLaw::new(10, 1.0).unwrap();
        assert!((law.pmf(1).unwrap() - 0.3414171521474055).abs() < 1e-14);
        assert!(law.pmf(0).is_err());
        assert!(law.pmf(11).is_err());
    }

    #[test]
    fn zipf_sample_examples() {
        assert_eq!(ZipfLaw::new(10, 10.0).unwrap().sample(0.5), 1);
        assert_eq!(ZipfLaw::new(3, 1.0).unwrap().sample(0.0), 1);
        assert_eq!(ZipfLaw::new(10, 1.0).unwrap().sample(0.99999), 10);
        let law = ZipfLaw::new(10, 1.0).unwrap();
        // exactly at a CDF step the next rank is returned
        assert_eq!(law.sample(law.cdf(1)), 2);
    }

    proptest! {
        #[test]
        fn zipf_pmf_normalised_and_monotone(n in 1usize..=1000, s in 1e-3f64..=12.0) {
            let law = ZipfLaw::new(n, s).unwrap();
            // compensated forward sum, independent of the reverse summation
            let (mut direct, mut comp) = (0.0f64, 0.0f64);
            for i in 1..=n {
                let term = (i as f64).powf(-s);
                let t = direct + term;
                comp += if direct.abs() >= term { (direct - t) + term } else { (term - t) + direct };
                direct = t;
            }
            direct += comp;
            prop_assert!((law.norm() - direct).abs() <= 1e-14 * direct);
            let pmf: Vec<f64> = (1..=n).map(|k| law.pmf(k).unwrap()).collect();
            let total: f64 = pmf.iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert!(pmf.windows(2).all(|w| w[1] <= w[0]));
        }

        #[test]
        fn digamma_difference_identity(c in 1e-9f64..1e6, n in 1usize..=100) {
            let lhs = digamma_difference(1.0 + c, n as f64).unwrap();
            let rhs: f64 = (1..=n).rev().map(|m| 1.0 / (m as f64 + c)).sum();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs, "{} vs {}", lhs, rhs);
        }

        #[test]
        fn zipf_sample_stays_in_range(n in 1usize..50, s in 0.1f64..12.0, u in 0.0f64..1.0) {
            let k = ZipfLaw::new(n, s).unwrap().sample(u);
            prop_assert!((1..=n).contains(&k));
        }
    }
}
