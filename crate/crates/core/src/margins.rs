//! Generalized extreme value margins and the unit-Fréchet transformation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cast, Real};

/// Shape values below this magnitude use the Gumbel limit forms, avoiding
/// catastrophic cancellation in `(1 + xi s)^(1/xi)`.
const GUMBEL_EPS: f64 = 1e-8;

/// Location/scale/shape triple of a GEV distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams<T> {
    pub mu: T,
    pub sigma: T,
    pub xi: T,
}

impl<T: Real> GevParams<T> {
    pub fn new(mu: T, sigma: T, xi: T) -> Result<Self> {
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(Error::domain(format!("scale must be positive, got {sigma}")));
        }
        if !mu.is_finite() || !xi.is_finite() {
            return Err(Error::domain("location and shape must be finite"));
        }
        Ok(GevParams { mu, sigma, xi })
    }

    #[inline]
    fn standardized(&self, z: T) -> T {
        (z - self.mu) / self.sigma
    }

    #[inline]
    fn is_gumbel(&self) -> bool {
        self.xi.abs() < cast(GUMBEL_EPS)
    }

    /// Distribution function; 0 or 1 outside the support.
    pub fn cdf(&self, z: T) -> T {
        let s = self.standardized(z);
        if self.is_gumbel() {
            return (-(-s).exp()).exp();
        }
        let u = T::one() + self.xi * s;
        if u <= T::zero() {
            return if self.xi > T::zero() { T::zero() } else { T::one() };
        }
        (-u.powf(-T::one() / self.xi)).exp()
    }

    /// Density; errors outside the support.
    pub fn pdf(&self, z: T) -> Result<T> {
        let s = self.standardized(z);
        if self.is_gumbel() {
            let e = (-s).exp();
            return Ok((-s - e).exp() / self.sigma);
        }
        let u = T::one() + self.xi * s;
        if u <= T::zero() {
            return Err(Error::domain(format!("{z} outside the distribution support")));
        }
        let inv_xi = T::one() / self.xi;
        let w = u.powf(-inv_xi);
        Ok(w.powf(T::one() + self.xi) / self.sigma * (-w).exp())
    }

    /// Quantile function for `q` in `(0, 1)`.
    pub fn quantile(&self, q: T) -> Result<T> {
        if !(q > T::zero() && q < T::one()) {
            return Err(Error::domain(format!("quantile level must be in (0,1), got {q}")));
        }
        let w = -q.ln();
        if self.is_gumbel() {
            return Ok(self.mu - self.sigma * w.ln());
        }
        Ok(self.mu + self.sigma * (w.powf(-self.xi) - T::one()) / self.xi)
    }

    /// Map an observation to the unit-Fréchet scale:
    /// `y = (1 + xi (z - mu)/sigma)^(1/xi)`, so that `P(Y <= y) = exp(-1/y)`.
    pub fn to_unit_frechet(&self, z: T) -> Result<T> {
        let s = self.standardized(z);
        if self.is_gumbel() {
            return Ok(s.exp());
        }
        let u = T::one() + self.xi * s;
        if u <= T::zero() {
            return Err(Error::domain(format!("{z} outside the distribution support")));
        }
        Ok(u.powf(T::one() / self.xi))
    }

    /// Inverse of [`Self::to_unit_frechet`].
    pub fn from_unit_frechet(&self, y: T) -> Result<T> {
        if !(y > T::zero()) {
            return Err(Error::domain("unit-Fréchet values must be positive"));
        }
        if self.is_gumbel() {
            return Ok(self.mu + self.sigma * y.ln());
        }
        Ok(self.mu + self.sigma * (y.powf(self.xi) - T::one()) / self.xi)
    }
}

/// Maximum-likelihood fit of a GEV distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GevFit {
    pub params: GevParams<f64>,
    /// Standard errors for (mu, sigma, xi) from the inverse observed
    /// information; `NaN` when the Hessian is not positive definite.
    pub std_errors: [f64; 3],
    pub log_likelihood: f64,
}

/// Negative GEV log-likelihood; `+inf` outside the feasible region.
fn gev_neg_loglik(data: &[f64], mu: f64, sigma: f64, xi: f64) -> f64 {
    if sigma <= 0.0 {
        return f64::INFINITY;
    }
    let n = data.len() as f64;
    let mut acc = n * sigma.ln();
    if xi.abs() < GUMBEL_EPS {
        for &z in data {
            let s = (z - mu) / sigma;
            acc += s + (-s).exp();
        }
    } else {
        let inv_xi = 1.0 / xi;
        for &z in data {
            let u = 1.0 + xi * (z - mu) / sigma;
            if u <= 0.0 {
                return f64::INFINITY;
            }
            let lu = u.ln();
            acc += (1.0 + inv_xi) * lu + (-inv_xi * lu).exp();
        }
    }
    if acc.is_nan() {
        f64::INFINITY
    } else {
        acc
    }
}

/// Probability-weighted-moment starting values (L-moment estimators).
fn pwm_start(data: &[f64]) -> GevParams<f64> {
    let n = data.len();
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = n as f64;
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    for (i, &x) in sorted.iter().enumerate() {
        let i = i as f64;
        b0 += x;
        b1 += x * i / (nf - 1.0);
        b2 += x * i * (i - 1.0) / ((nf - 1.0) * (nf - 2.0));
    }
    b0 /= nf;
    b1 /= nf;
    b2 /= nf;
    let l1 = b0;
    let l2 = 2.0 * b1 - b0;
    let l3 = 6.0 * b2 - 6.0 * b1 + b0;
    let t3 = l3 / l2;

    // Hosking's approximation, kappa = -xi in his parametrization
    let c = 2.0 / (3.0 + t3) - std::f64::consts::LN_2 / 3.0f64.ln();
    let kappa = 7.859_0 * c + 2.955_4 * c * c;
    const EULER: f64 = 0.577_215_664_901_532_9;
    if kappa.abs() < 1e-6 {
        let sigma = l2 / std::f64::consts::LN_2;
        return GevParams { mu: l1 - EULER * sigma, sigma, xi: 0.0 };
    }
    let gamma_term = crate::numerics::log_gamma_unchecked(1.0 + kappa).exp();
    let sigma = l2 * kappa / ((1.0 - 2.0f64.powf(-kappa)) * gamma_term);
    let mu = l1 - sigma * (1.0 - gamma_term) / kappa;
    GevParams { mu, sigma: sigma.abs().max(1e-12), xi: -kappa }
}

/// Derivative-free Nelder-Mead minimization in three dimensions.
fn nelder_mead<F: Fn(&[f64; 3]) -> f64>(
    f: F,
    start: [f64; 3],
    scale: [f64; 3],
    max_iter: usize,
) -> Result<([f64; 3], f64)> {
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;

    let mut simplex: Vec<[f64; 3]> = vec![start];
    for d in 0..3 {
        let mut v = start;
        v[d] += scale[d];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(&f).collect();

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = order[0];
        let worst = order[3];
        let second_worst = order[2];

        let spread = (values[worst] - values[best]).abs();
        if spread < 1e-12 * (1.0 + values[best].abs()) && values[best].is_finite() {
            return Ok((simplex[best], values[best]));
        }

        let mut centroid = [0.0; 3];
        for (i, v) in simplex.iter().enumerate() {
            if i != worst {
                for d in 0..3 {
                    centroid[d] += v[d] / 3.0;
                }
            }
        }

        let mut reflected = [0.0; 3];
        for d in 0..3 {
            reflected[d] = centroid[d] + ALPHA * (centroid[d] - simplex[worst][d]);
        }
        let f_reflected = f(&reflected);

        if f_reflected < values[best] {
            let mut expanded = [0.0; 3];
            for d in 0..3 {
                expanded[d] = centroid[d] + GAMMA * (reflected[d] - centroid[d]);
            }
            let f_expanded = f(&expanded);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        let mut contracted = [0.0; 3];
        for d in 0..3 {
            contracted[d] = centroid[d] + RHO * (simplex[worst][d] - centroid[d]);
        }
        let f_contracted = f(&contracted);
        if f_contracted < values[worst] {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        let best_point = simplex[best];
        for i in 0..4 {
            if i == best {
                continue;
            }
            for d in 0..3 {
                simplex[i][d] = best_point[d] + SIGMA * (simplex[i][d] - best_point[d]);
            }
            values[i] = f(&simplex[i]);
        }
    }
    Err(Error::NonConvergence { what: "GEV simplex search".into(), iterations: max_iter })
}

/// Invert a symmetric 3x3 matrix; `None` if singular.
fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 || !det.is_finite() {
        return None;
    }
    let inv_det = 1.0 / det;
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b, c, d) = (
                m[(i + 1) % 3][(j + 1) % 3],
                m[(i + 1) % 3][(j + 2) % 3],
                m[(i + 2) % 3][(j + 1) % 3],
                m[(i + 2) % 3][(j + 2) % 3],
            );
            // cofactor transpose
            inv[j][i] = (a * d - b * c) * inv_det;
        }
    }
    Some(inv)
}

/// Standard errors from the observed information (central differences).
fn gev_std_errors(data: &[f64], p: &GevParams<f64>) -> [f64; 3] {
    let theta = [p.mu, p.sigma, p.xi];
    let steps = [
        1e-5 * p.sigma.max(1e-6),
        1e-5 * p.sigma.max(1e-6),
        1e-5f64.max(1e-4 * p.xi.abs()),
    ];
    let f = |t: &[f64; 3]| gev_neg_loglik(data, t[0], t[1], t[2]);
    let mut hess = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let mut tpp = theta;
            let mut tpm = theta;
            let mut tmp = theta;
            let mut tmm = theta;
            tpp[i] += steps[i];
            tpp[j] += steps[j];
            tpm[i] += steps[i];
            tpm[j] -= steps[j];
            tmp[i] -= steps[i];
            tmp[j] += steps[j];
            tmm[i] -= steps[i];
            tmm[j] -= steps[j];
            let v = (f(&tpp) - f(&tpm) - f(&tmp) + f(&tmm)) / (4.0 * steps[i] * steps[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    match invert3(&hess) {
        Some(inv) => {
            let mut se = [f64::NAN; 3];
            for (i, s) in se.iter_mut().enumerate() {
                if inv[i][i] > 0.0 {
                    *s = inv[i][i].sqrt();
                }
            }
            se
        }
        None => [f64::NAN; 3],
    }
}

/// Fit a GEV distribution by maximum likelihood.
///
/// Starting values come from probability-weighted moments; the likelihood is
/// then maximized with a Nelder-Mead simplex (restarted once from the first
/// optimum). Deterministic for fixed input data.
pub fn fit_gev(data: &[f64]) -> Result<GevFit> {
    if data.len() < 10 {
        return Err(Error::DegenerateData(format!(
            "need at least 10 observations, got {}",
            data.len()
        )));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateData("observations must be finite".into()));
    }
    let mean = data.iter().sum::<f64>() / data.len() as f64;
    let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / data.len() as f64;
    if var == 0.0 {
        return Err(Error::DegenerateData("observations have zero variance".into()));
    }

    let mut start = pwm_start(data);
    if !gev_neg_loglik(data, start.mu, start.sigma, start.xi).is_finite() {
        // PWM start outside the feasible region: fall back to a Gumbel start
        let sigma = (var * 6.0).sqrt() / std::f64::consts::PI;
        start = GevParams { mu: mean - 0.577_215_664_901_532_9 * sigma, sigma, xi: 0.0 };
    }

    let obj = |t: &[f64; 3]| gev_neg_loglik(data, t[0], t[1].exp(), t[2]);
    let x0 = [start.mu, start.sigma.ln(), start.xi];
    let scale = [0.1 * start.sigma, 0.1, 0.1];
    let (opt, _) = nelder_mead(obj, x0, scale, 3000)?;
    let (opt, value) = nelder_mead(obj, opt, [0.01 * start.sigma, 0.01, 0.01], 3000)?;

    let params = GevParams::new(opt[0], opt[1].exp(), opt[2])?;
    let std_errors = gev_std_errors(data, &params);
    Ok(GevFit { params, std_errors, log_likelihood: -value })
}
