//! Prior distribution on the polynomial order and the angular coefficients.
//!
//! The order `k` carries a shifted Poisson or negative-binomial prior with
//! support `{3, 4, ...}`. Given `k`, the vertex masses and the interior
//! coefficients are drawn sequentially, each uniform on the widest interval
//! that keeps the monotonicity and sum restrictions satisfiable. The last
//! interior coefficient is always forced by the sum constraint; forced
//! (degenerate) coordinates are treated as point masses contributing zero
//! to the log density, which keeps trans-dimensional acceptance ratios
//! well-defined down to `k = 3`.

use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bernstein::{AngularCoefficients, PickandsCoefficients, ValidationTolerances};
use crate::error::{Error, Result};
use crate::numerics::log_gamma_unchecked;

/// Smallest admissible polynomial order; lower orders carry no dependence
/// information.
pub const K_MIN: usize = 3;

/// Interval lengths at or below this are treated as forced points.
const DEGENERATE_EPS: f64 = 1e-12;
/// Membership slack when checking a coefficient against its interval.
const MEMBERSHIP_EPS: f64 = 1e-9;

/// Prior on the polynomial order `k` (offset so that `k >= 3`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PriorConfig {
    Poisson { mean: f64 },
    NegBin { mean: f64, variance: f64 },
}

impl PriorConfig {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PriorConfig::Poisson { mean } => {
                if !(mean > 0.0) || !mean.is_finite() {
                    return Err(Error::domain("Poisson mean must be positive"));
                }
            }
            PriorConfig::NegBin { mean, variance } => {
                if !(mean > 0.0) || !mean.is_finite() || !variance.is_finite() {
                    return Err(Error::domain("negative-binomial mean must be positive"));
                }
                if !(variance > mean) {
                    return Err(Error::domain(
                        "negative binomial requires variance > mean (overdispersion)",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Success probability and size of the negative binomial implied by
    /// `(mean, variance)`: `p = mean/variance`, `s = mean^2/(variance - mean)`.
    fn negbin_sp(mean: f64, variance: f64) -> (f64, f64) {
        (mean / variance, mean * mean / (variance - mean))
    }

    /// Probability mass at order `k >= 3`.
    pub fn pmf(&self, k: usize) -> Result<f64> {
        self.log_pmf(k).map(f64::exp)
    }

    /// Log probability mass at order `k >= 3`.
    pub fn log_pmf(&self, k: usize) -> Result<f64> {
        if k < K_MIN {
            return Err(Error::domain(format!("order prior is supported on k >= 3, got {k}")));
        }
        let x = (k - K_MIN) as f64;
        Ok(match *self {
            PriorConfig::Poisson { mean } => {
                -mean + x * mean.ln() - log_gamma_unchecked(x + 1.0)
            }
            PriorConfig::NegBin { mean, variance } => {
                let (p, s) = Self::negbin_sp(mean, variance);
                log_gamma_unchecked(x + s) - log_gamma_unchecked(s)
                    - log_gamma_unchecked(x + 1.0)
                    + s * p.ln()
                    + x * (1.0 - p).ln()
            }
        })
    }

    /// Draw an order from the prior by inverting the CDF.
    pub fn sample_k(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        let mut cum = 0.0;
        let mut k = K_MIN;
        loop {
            cum += self.pmf(k).expect("k >= 3");
            if u < cum || cum >= 1.0 - 1e-14 || k > K_MIN + 100_000 {
                return k;
            }
            k += 1;
        }
    }

    /// Modal order, used as the default chain initialization.
    pub fn mode_k(&self) -> usize {
        let mut best = K_MIN;
        let mut best_lp = f64::NEG_INFINITY;
        for k in K_MIN..K_MIN + 1000 {
            let lp = self.log_pmf(k).expect("k >= 3");
            if lp > best_lp {
                best_lp = lp;
                best = k;
            }
        }
        best
    }
}

impl FromStr for PriorConfig {
    type Err = Error;

    /// Parse `poisson:<mean>` or `negbin:<mean>,<variance>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s
            .split_once(':')
            .ok_or_else(|| Error::Format(format!("expected name:args in prior spec `{s}`")))?;
        let cfg = match name {
            "poisson" => {
                let mean: f64 = args
                    .parse()
                    .map_err(|_| Error::Format(format!("bad Poisson mean `{args}`")))?;
                PriorConfig::Poisson { mean }
            }
            "negbin" => {
                let (m, v) = args
                    .split_once(',')
                    .ok_or_else(|| Error::Format("negbin takes mean,variance".into()))?;
                PriorConfig::NegBin {
                    mean: m
                        .trim()
                        .parse()
                        .map_err(|_| Error::Format(format!("bad negbin mean `{m}`")))?,
                    variance: v
                        .trim()
                        .parse()
                        .map_err(|_| Error::Format(format!("bad negbin variance `{v}`")))?,
                }
            }
            other => return Err(Error::Format(format!("unknown prior family `{other}`"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Draw the lower vertex mass, uniform on `[0, 1/2]`.
pub fn sample_p0(rng: &mut impl Rng) -> f64 {
    0.5 * rng.random::<f64>()
}

/// Admissible interval `(a, b)` for the upper vertex mass given `(k, p0)`:
/// `a = max(0, (k-1) p0 - k/2 + 1)`, `b = (p0 + k/2 - 1)/(k - 1)`.
pub fn p1_bounds(k: usize, p0: f64) -> (f64, f64) {
    let kf = k as f64;
    let a = 0.0f64.max((kf - 1.0) * p0 - kf / 2.0 + 1.0);
    let b = (p0 + kf / 2.0 - 1.0) / (kf - 1.0);
    (a, b.max(a))
}

/// Widest interval for coefficient `j` (with `1 <= j <= k-2`) given the
/// prefix `eta_0..eta_{j-1}` and the last coefficient `eta_{k-1}`.
pub fn eta_interval(k: usize, j: usize, eta_prefix: &[f64], eta_last: f64) -> Result<(f64, f64)> {
    if j == 0 || j > k - 2 {
        return Err(Error::domain(format!("interval index must satisfy 1 <= j <= k-2, got {j}")));
    }
    if eta_prefix.len() != j {
        return Err(Error::domain(format!(
            "prefix must hold {j} coefficients, got {}",
            eta_prefix.len()
        )));
    }
    let kf = k as f64;
    let p1 = 1.0 - eta_last;
    let prefix_sum: f64 = eta_prefix.iter().sum();
    let remaining = kf / 2.0 + p1 - 1.0 - prefix_sum;
    let tail = (k - j - 1) as f64;

    let lower = eta_prefix[j - 1].max(kf / 2.0 + tail * (p1 - 1.0) - prefix_sum);
    let upper = eta_last.min(remaining / tail);
    if upper < lower - DEGENERATE_EPS {
        return Err(Error::InfeasiblePrefix(format!(
            "coefficient {j} has empty range [{lower}, {upper}]"
        )));
    }
    Ok((lower, upper.max(lower)))
}

/// Interval for the Pickands coefficient `beta_j` (with `2 <= j <= k-2`)
/// given the prefix `beta_0..beta_{j-1}` and `beta_{k-1}`.
pub fn beta_interval(k: usize, j: usize, beta_prefix: &[f64], beta_km1: f64) -> Result<(f64, f64)> {
    if j < 2 || j > k - 2 {
        return Err(Error::domain(format!("interval index must satisfy 2 <= j <= k-2, got {j}")));
    }
    if beta_prefix.len() != j {
        return Err(Error::domain(format!(
            "prefix must hold {j} coefficients, got {}",
            beta_prefix.len()
        )));
    }
    let tail = (k - j) as f64;
    let lower = (2.0 * beta_prefix[j - 1] - beta_prefix[j - 2]).max(tail * beta_km1 - (tail - 1.0));
    let upper = (beta_km1 + (tail - 1.0) * beta_prefix[j - 1]) / tail;
    if upper < lower - DEGENERATE_EPS {
        return Err(Error::InfeasiblePrefix(format!(
            "coefficient {j} has empty range [{lower}, {upper}]"
        )));
    }
    Ok((lower, upper.max(lower)))
}

/// Deterministic map from `k - 1` unit-cube coordinates to a valid
/// coefficient vector: `u[0]` places `p0`, `u[1]` places `p1`, and the rest
/// place the free interior coefficients in order. The final interior
/// coefficient is forced by the sum constraint.
pub fn eta_from_unit_cube(k: usize, u: &[f64]) -> Result<AngularCoefficients<f64>> {
    if k < K_MIN {
        return Err(Error::domain(format!("order must be at least 3, got {k}")));
    }
    if u.len() != k - 1 {
        return Err(Error::domain(format!(
            "need {} unit-cube coordinates for order {k}, got {}",
            k - 1,
            u.len()
        )));
    }
    let p0 = 0.5 * u[0];
    let (a, b) = p1_bounds(k, p0);
    let p1 = a + u[1] * (b - a);

    let mut eta = Vec::with_capacity(k);
    eta.push(p0);
    let eta_last = 1.0 - p1;
    for j in 1..=k - 2 {
        let (lo, hi) = eta_interval(k, j, &eta, eta_last)?;
        let value = if hi - lo <= DEGENERATE_EPS {
            lo
        } else {
            lo + u[j + 1] * (hi - lo)
        };
        eta.push(value);
    }
    eta.push(eta_last);
    Ok(AngularCoefficients::from_valid_parts(eta))
}

/// Draw a coefficient vector from the conditional prior given `k`.
pub fn sample_eta(k: usize, rng: &mut impl Rng) -> Result<AngularCoefficients<f64>> {
    let u: Vec<f64> = (0..k - 1).map(|_| rng.random()).collect();
    eta_from_unit_cube(k, &u)
}

/// Log density of the conditional prior at a coefficient vector; `-inf`
/// off the support. Degenerate (forced) coordinates contribute zero.
pub fn log_density_eta(c: &AngularCoefficients<f64>) -> f64 {
    log_density_eta_raw(c.eta())
}

/// Slice version of [`log_density_eta`]; invalid vectors map to `-inf`
/// rather than an error.
pub fn log_density_eta_raw(eta: &[f64]) -> f64 {
    if !AngularCoefficients::validate(eta, &ValidationTolerances::default()).is_valid() {
        return f64::NEG_INFINITY;
    }
    let k = eta.len();
    let p0 = eta[0];
    let p1 = 1.0 - eta[k - 1];
    if !(0.0 - MEMBERSHIP_EPS..=0.5 + MEMBERSHIP_EPS).contains(&p0) {
        return f64::NEG_INFINITY;
    }
    // p0 ~ Unif(0, 1/2)
    let mut log_density = std::f64::consts::LN_2;

    let (a, b) = p1_bounds(k, p0);
    if b - a <= DEGENERATE_EPS {
        if (p1 - a).abs() > MEMBERSHIP_EPS {
            return f64::NEG_INFINITY;
        }
    } else {
        if p1 < a - MEMBERSHIP_EPS || p1 > b + MEMBERSHIP_EPS {
            return f64::NEG_INFINITY;
        }
        log_density -= (b - a).ln();
    }

    for j in 1..=k - 2 {
        let (lo, hi) = match eta_interval(k, j, &eta[..j], eta[k - 1]) {
            Ok(iv) => iv,
            Err(_) => return f64::NEG_INFINITY,
        };
        if hi - lo <= DEGENERATE_EPS {
            if (eta[j] - lo).abs() > MEMBERSHIP_EPS {
                return f64::NEG_INFINITY;
            }
        } else {
            if eta[j] < lo - MEMBERSHIP_EPS || eta[j] > hi + MEMBERSHIP_EPS {
                return f64::NEG_INFINITY;
            }
            log_density -= (hi - lo).ln();
        }
    }
    log_density
}

/// Log density of the induced prior on Pickands coefficients: the angular
/// density plus the change-of-variables term `(k - 3) ln(k/2)`.
pub fn log_density_beta(c: &PickandsCoefficients<f64>) -> f64 {
    let k = c.k() as f64;
    log_density_eta(&c.to_angular()) + (k - 3.0) * (k / 2.0).ln()
}

/// Slice version of [`log_density_beta`].
pub fn log_density_beta_raw(beta: &[f64]) -> f64 {
    if !PickandsCoefficients::validate(beta, &ValidationTolerances::default()).is_valid() {
        return f64::NEG_INFINITY;
    }
    match PickandsCoefficients::new(beta.to_vec()) {
        Ok(c) => log_density_beta(&c),
        Err(_) => f64::NEG_INFINITY,
    }
}
