//! Bernstein-form representations of bivariate extremal dependence.
//!
//! The angular distribution on `[0, 1]` is represented by a polynomial of
//! degree `k - 1` in Bernstein form with coefficients `eta_0..eta_{k-1}`;
//! the Pickands dependence function by a degree-`k` polynomial with
//! coefficients `beta_0..beta_k`. The two coefficient systems are in
//! one-to-one correspondence, and the admissible sets are cut out by linear
//! restrictions: monotonicity and a fixed sum for `eta`, endpoint values,
//! endpoint slopes and convexity for `beta`. [`AngularCoefficients`] and
//! [`PickandsCoefficients`] own validated vectors and expose the usual
//! dependence summaries (CDF/density, derivatives, stable-tail function,
//! the tail coefficient `chi`, and closed-form joint-exceedance rates).

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numerics::regularized_incomplete_beta;
use crate::scalar::{cast, cast_usize, Real};

/// ln(i!) lookup shared by every basis evaluation.
static LN_FACTORIAL: OnceLock<Vec<f64>> = OnceLock::new();
const LN_FACTORIAL_LEN: usize = 4096;

fn ln_factorial(n: usize) -> f64 {
    let table = LN_FACTORIAL.get_or_init(|| {
        let mut t = vec![0.0f64; LN_FACTORIAL_LEN];
        for i in 1..LN_FACTORIAL_LEN {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    match table.get(n) {
        Some(&v) => v,
        None => crate::numerics::log_gamma_unchecked(n as f64 + 1.0),
    }
}

#[inline]
fn ln_choose(n: usize, j: usize) -> f64 {
    ln_factorial(n) - ln_factorial(j) - ln_factorial(n - j)
}

/// `sum_j coeffs[j] * b_j(x; n)` with `n = coeffs.len() - 1`.
///
/// Each basis value is formed in log space, so the sum stays accurate for
/// degrees in the hundreds. The endpoint identities `b_j(0) = delta_{j,0}`
/// and `b_j(1) = delta_{j,n}` are applied exactly.
pub(crate) fn bernstein_sum<T: Real>(coeffs: &[T], x: T) -> T {
    let n = coeffs.len() - 1;
    if x == T::zero() {
        return coeffs[0];
    }
    if x == T::one() {
        return coeffs[n];
    }
    let lx = x.ln();
    let l1x = (T::one() - x).ln();
    let mut acc = T::zero();
    for (j, &c) in coeffs.iter().enumerate() {
        let lw = cast::<T>(ln_choose(n, j)) + cast_usize::<T>(j) * lx + cast_usize::<T>(n - j) * l1x;
        acc += c * lw.exp();
    }
    acc
}

/// Slack values used when checking the coefficient restrictions.
///
/// Ordering and convexity are exact constraints checked with a tiny slack
/// for floating-point noise; the sum constraint accumulates over `k` terms
/// and gets a correspondingly looser default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationTolerances<T> {
    pub ordering_slack: T,
    pub sum_tol: T,
    pub convexity_slack: T,
}

impl<T: Real> Default for ValidationTolerances<T> {
    fn default() -> Self {
        ValidationTolerances {
            ordering_slack: cast(1e-12),
            sum_tol: cast(1e-9),
            convexity_slack: cast(1e-12),
        }
    }
}

/// One violated coefficient restriction.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation<T> {
    /// Fewer than three coefficients for `eta` (or four for `beta`).
    DegreeTooSmall { len: usize },
    /// A coefficient lies outside `[0, 1]`.
    CoefficientOutOfRange { index: usize, value: T },
    /// The `eta` sequence decreases at `index`.
    DecreasingCoefficient { index: usize },
    /// The `eta` coefficients do not sum to `k/2`.
    SumMismatch { sum: T, expected: T },
    /// A vertex mass (`eta_0` or `1 - eta_{k-1}`) lies outside `[0, 1/2]`.
    VertexMassOutOfRange { upper_vertex: bool, mass: T },
    /// `beta_0` or `beta_k` differs from one.
    EndpointNotOne { upper_end: bool, value: T },
    /// `beta_1` or `beta_{k-1}` lies below `1 - 1/k`, so no vertex mass in
    /// `[0, 1/2]` can produce it.
    SlopeCoefficientOutOfRange { upper_end: bool, value: T },
    /// A second difference of `beta` is negative: the polynomial is not convex.
    NegativeSecondDifference { index: usize, value: T },
}

impl<T: fmt::Display> fmt::Display for Violation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DegreeTooSmall { len } => {
                write!(f, "coefficient vector of length {len} is too short")
            }
            Violation::CoefficientOutOfRange { index, value } => {
                write!(f, "coefficient {index} = {value} outside [0, 1]")
            }
            Violation::DecreasingCoefficient { index } => {
                write!(f, "coefficients decrease at index {index}")
            }
            Violation::SumMismatch { sum, expected } => {
                write!(f, "coefficient sum {sum} differs from {expected}")
            }
            Violation::VertexMassOutOfRange { upper_vertex, mass } => {
                let v = if *upper_vertex { 1 } else { 0 };
                write!(f, "vertex mass p{v} = {mass} outside [0, 1/2]")
            }
            Violation::EndpointNotOne { upper_end, value } => {
                let which = if *upper_end { "last" } else { "first" };
                write!(f, "{which} coefficient {value} must equal 1")
            }
            Violation::SlopeCoefficientOutOfRange { upper_end, value } => {
                let which = if *upper_end { "penultimate" } else { "second" };
                write!(f, "{which} coefficient {value} below 1 - 1/k")
            }
            Violation::NegativeSecondDifference { index, value } => {
                write!(f, "second difference at {index} is negative ({value})")
            }
        }
    }
}

/// Outcome of a coefficient-restriction check.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidityReport<T> {
    pub violations: Vec<Violation<T>>,
}

impl<T> ValidityReport<T> {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl<T: fmt::Display> fmt::Display for ValidityReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let mut first = true;
        for v in &self.violations {
            if !first {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

/// Coefficients `eta_0 <= ... <= eta_{k-1}` of the Bernstein-form angular
/// distribution of order `k`, with vertex masses `p0 = eta_0` and
/// `p1 = 1 - eta_{k-1}` and coefficient sum `k/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularCoefficients<T> {
    eta: Vec<T>,
}

/// Coefficients `beta_0..beta_k` of the Bernstein-form Pickands dependence
/// function of degree `k`: endpoints one, convex, endpoint slopes encoding
/// vertex masses in `[0, 1/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PickandsCoefficients<T> {
    beta: Vec<T>,
}

impl<T: Real> AngularCoefficients<T> {
    /// Validate with default tolerances and take ownership.
    pub fn new(eta: Vec<T>) -> Result<Self> {
        Self::new_with(eta, &ValidationTolerances::default())
    }

    pub fn new_with(eta: Vec<T>, tol: &ValidationTolerances<T>) -> Result<Self> {
        let report = Self::validate(&eta, tol);
        if report.is_valid() {
            Ok(AngularCoefficients { eta })
        } else {
            Err(Error::InvalidCoefficients(report.to_string()))
        }
    }

    /// Check the restrictions without constructing; reports every violation.
    pub fn validate(eta: &[T], tol: &ValidationTolerances<T>) -> ValidityReport<T> {
        let mut violations = Vec::new();
        let k = eta.len();
        if k < 3 {
            violations.push(Violation::DegreeTooSmall { len: k });
            return ValidityReport { violations };
        }
        let slack = tol.ordering_slack;
        let half = cast::<T>(0.5);

        if eta[0] < -slack {
            violations.push(Violation::CoefficientOutOfRange { index: 0, value: eta[0] });
        }
        if eta[k - 1] > T::one() + slack {
            violations.push(Violation::CoefficientOutOfRange { index: k - 1, value: eta[k - 1] });
        }
        for j in 1..k {
            if eta[j] < eta[j - 1] - slack {
                violations.push(Violation::DecreasingCoefficient { index: j });
            }
        }
        if eta[0] > half + slack {
            violations.push(Violation::VertexMassOutOfRange { upper_vertex: false, mass: eta[0] });
        }
        if eta[k - 1] < half - slack {
            violations.push(Violation::VertexMassOutOfRange {
                upper_vertex: true,
                mass: T::one() - eta[k - 1],
            });
        }
        let sum: T = eta.iter().copied().sum();
        let expected = cast_usize::<T>(k) * half;
        if (sum - expected).abs() > tol.sum_tol {
            violations.push(Violation::SumMismatch { sum, expected });
        }
        ValidityReport { violations }
    }

    /// Polynomial order `k` (the vector length).
    pub fn k(&self) -> usize {
        self.eta.len()
    }

    pub fn eta(&self) -> &[T] {
        &self.eta
    }

    /// Mass at the lower vertex, `p0 = eta_0`.
    pub fn p0(&self) -> T {
        self.eta[0]
    }

    /// Mass at the upper vertex, `p1 = 1 - eta_{k-1}`.
    pub fn p1(&self) -> T {
        T::one() - self.eta[self.k() - 1]
    }

    /// Distribution function `H([0, w])`; right-continuous with a jump of
    /// `p1` at `w = 1`.
    pub fn cdf(&self, w: T) -> Result<T> {
        if !(w >= T::zero() && w <= T::one()) {
            return Err(Error::domain(format!("angular cdf requires w in [0,1], got {w}")));
        }
        if w == T::one() {
            return Ok(T::one());
        }
        Ok(bernstein_sum(&self.eta, w))
    }

    /// Density of the absolutely continuous part on the open interval.
    pub fn density(&self, w: T) -> Result<T> {
        if !(w > T::zero() && w < T::one()) {
            return Err(Error::domain(format!(
                "angular density requires w in (0,1), got {w}"
            )));
        }
        Ok(self.density_limit(w))
    }

    /// Density extended to the closed interval by its one-sided limits
    /// `h(0+) = (k-1)(eta_1 - eta_0)` and `h(1-) = (k-1)(eta_{k-1} - eta_{k-2})`.
    pub fn density_limit(&self, w: T) -> T {
        let k = self.k();
        let diffs: Vec<T> = self.eta.windows(2).map(|p| p[1] - p[0]).collect();
        cast_usize::<T>(k - 1) * bernstein_sum(&diffs, w)
    }

    /// Convert to the Pickands coefficients of the same order.
    ///
    /// `beta_{j+1} = (2 sum_{i<=j} eta_i + k - j - 1)/k` with `beta_0 = 1`;
    /// validity carries over exactly.
    pub fn to_pickands(&self) -> PickandsCoefficients<T> {
        let k = self.k();
        let k_t = cast_usize::<T>(k);
        let two = cast::<T>(2.0);
        let mut beta = Vec::with_capacity(k + 1);
        beta.push(T::one());
        let mut running = T::zero();
        for (j, &e) in self.eta.iter().enumerate() {
            running += e;
            let tail = cast_usize::<T>(k - j - 1);
            beta.push((two * running + tail) / k_t);
        }
        PickandsCoefficients { beta }
    }

    /// Joint-exceedance rate `R(1/y1, 1/y2)` in closed form.
    ///
    /// Writing `c = y1/(y1+y2)`, splitting the tail integral at its kink and
    /// using `w Be(w|a,b) = a/(a+b) Be(w|a+1,b)` gives
    /// `R = (2/k) sum_j (eta_{j+1}-eta_j) [(j+1) I_c(j+2, k-j-1)/y1 + (k-j-1) I_{1-c}(k-j, j+1)/y2]`,
    /// which agrees with direct quadrature of the angular density.
    pub fn exceedance_prob(&self, y1: T, y2: T) -> Result<T> {
        if !(y1 > T::zero()) || !(y2 > T::zero()) {
            return Err(Error::domain("exceedance thresholds must be positive"));
        }
        let k = self.k();
        let k_t = cast_usize::<T>(k);
        let c = y1 / (y1 + y2);
        let mut total = T::zero();
        for j in 0..k - 1 {
            let diff = self.eta[j + 1] - self.eta[j];
            if diff == T::zero() {
                continue;
            }
            let a1 = cast_usize::<T>(j + 2);
            let b1 = cast_usize::<T>(k - j - 1);
            let first = cast_usize::<T>(j + 1) * regularized_incomplete_beta(c, a1, b1)? / y1;
            let a2 = cast_usize::<T>(k - j);
            let b2 = cast_usize::<T>(j + 1);
            let second =
                cast_usize::<T>(k - j - 1) * regularized_incomplete_beta(T::one() - c, a2, b2)? / y2;
            total += diff * (first + second);
        }
        Ok(cast::<T>(2.0) / k_t * total)
    }

    /// Raise the representation order by one without changing the function.
    pub fn degree_elevated(&self) -> AngularCoefficients<T> {
        let k = self.k();
        let k_t = cast_usize::<T>(k);
        let mut out = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let hi = if j < k {
                self.eta[j] * cast_usize::<T>(k - j) / k_t
            } else {
                T::zero()
            };
            let lo = if j > 0 {
                self.eta[j - 1] * cast_usize::<T>(j) / k_t
            } else {
                T::zero()
            };
            out.push(hi + lo);
        }
        AngularCoefficients { eta: out }
    }

    /// Build from parts already known to satisfy the restrictions.
    pub(crate) fn from_valid_parts(eta: Vec<T>) -> Self {
        debug_assert!(
            Self::validate(&eta, &ValidationTolerances::default()).is_valid(),
            "from_valid_parts received invalid coefficients"
        );
        AngularCoefficients { eta }
    }
}

impl<T: Real> PickandsCoefficients<T> {
    pub fn new(beta: Vec<T>) -> Result<Self> {
        Self::new_with(beta, &ValidationTolerances::default())
    }

    pub fn new_with(beta: Vec<T>, tol: &ValidationTolerances<T>) -> Result<Self> {
        let report = Self::validate(&beta, tol);
        if report.is_valid() {
            Ok(PickandsCoefficients { beta })
        } else {
            Err(Error::InvalidCoefficients(report.to_string()))
        }
    }

    pub fn validate(beta: &[T], tol: &ValidationTolerances<T>) -> ValidityReport<T> {
        let mut violations = Vec::new();
        if beta.len() < 4 {
            violations.push(Violation::DegreeTooSmall { len: beta.len() });
            return ValidityReport { violations };
        }
        let k = beta.len() - 1;
        let slack = tol.ordering_slack;
        let one = T::one();

        if (beta[0] - one).abs() > slack {
            violations.push(Violation::EndpointNotOne { upper_end: false, value: beta[0] });
        }
        if (beta[k] - one).abs() > slack {
            violations.push(Violation::EndpointNotOne { upper_end: true, value: beta[k] });
        }
        for (j, &b) in beta.iter().enumerate() {
            if (b > one + slack || b < -slack) && j != 0 && j != k {
                violations.push(Violation::CoefficientOutOfRange { index: j, value: b });
            }
        }
        let slope_floor = one - one / cast_usize::<T>(k);
        if beta[1] < slope_floor - slack {
            violations.push(Violation::SlopeCoefficientOutOfRange { upper_end: false, value: beta[1] });
        }
        if beta[k - 1] < slope_floor - slack {
            violations.push(Violation::SlopeCoefficientOutOfRange { upper_end: true, value: beta[k - 1] });
        }
        let two = cast::<T>(2.0);
        for j in 0..=k - 2 {
            let d2 = beta[j + 2] - two * beta[j + 1] + beta[j];
            if d2 < -tol.convexity_slack {
                violations.push(Violation::NegativeSecondDifference { index: j, value: d2 });
            }
        }
        ValidityReport { violations }
    }

    /// Polynomial degree `k` (one less than the vector length).
    pub fn k(&self) -> usize {
        self.beta.len() - 1
    }

    pub fn beta(&self) -> &[T] {
        &self.beta
    }

    /// Lower vertex mass implied by the endpoint slope, `p0 = (k(beta_1 - 1) + 1)/2`.
    pub fn p0(&self) -> T {
        let k_t = cast_usize::<T>(self.k());
        (k_t * (self.beta[1] - T::one()) + T::one()) / cast::<T>(2.0)
    }

    /// Upper vertex mass implied by the endpoint slope, `p1 = (k(beta_{k-1} - 1) + 1)/2`.
    pub fn p1(&self) -> T {
        let k = self.k();
        let k_t = cast_usize::<T>(k);
        (k_t * (self.beta[k - 1] - T::one()) + T::one()) / cast::<T>(2.0)
    }

    /// Dependence function value `A(t)`.
    pub fn pickands(&self, t: T) -> Result<T> {
        if !(t >= T::zero() && t <= T::one()) {
            return Err(Error::domain(format!("pickands requires t in [0,1], got {t}")));
        }
        Ok(bernstein_sum(&self.beta, t))
    }

    /// First derivative `A'(t)`, one-sided at the endpoints:
    /// `A'(0) = 2 p0 - 1`, `A'(1) = 1 - 2 p1`.
    pub fn pickands_d1(&self, t: T) -> Result<T> {
        if !(t >= T::zero() && t <= T::one()) {
            return Err(Error::domain(format!("pickands_d1 requires t in [0,1], got {t}")));
        }
        Ok(self.evaluator().d1(t))
    }

    /// Second derivative `A''(t)` on the open interval; nonnegative for
    /// valid coefficients.
    pub fn pickands_d2(&self, t: T) -> Result<T> {
        if !(t > T::zero() && t < T::one()) {
            return Err(Error::domain(format!("pickands_d2 requires t in (0,1), got {t}")));
        }
        Ok(self.evaluator().d2(t))
    }

    /// Reusable evaluator with precomputed difference vectors; worthwhile
    /// when `A`, `A'`, `A''` are needed at many points.
    pub fn evaluator(&self) -> PickandsEvaluator<'_, T> {
        PickandsEvaluator::new(self)
    }

    /// Stable-tail dependence function `L(x1, x2) = (x1 + x2) A(x2/(x1+x2))`.
    pub fn stable_tail(&self, x1: T, x2: T) -> Result<T> {
        if x1 < T::zero() || x2 < T::zero() {
            return Err(Error::domain("stable_tail requires nonnegative arguments"));
        }
        let s = x1 + x2;
        if s == T::zero() {
            return Ok(T::zero());
        }
        let t = x2 / s;
        Ok(s * bernstein_sum(&self.beta, t))
    }

    /// Tail-dependence function `R(x1, x2) = x1 + x2 - L(x1, x2)`.
    pub fn tail_dependence(&self, x1: T, x2: T) -> Result<T> {
        let l = self.stable_tail(x1, x2)?;
        Ok((x1 + x2 - l).max(T::zero()))
    }

    /// Upper tail-dependence coefficient `chi = R(1, 1) = 2 - 2 A(1/2)`.
    pub fn chi(&self) -> T {
        let two = cast::<T>(2.0);
        two - two * bernstein_sum(&self.beta, cast::<T>(0.5))
    }

    /// Convert to the angular coefficients of the same order:
    /// `eta_j = (k/2)(beta_{j+1} - beta_j + 1/k)`.
    pub fn to_angular(&self) -> AngularCoefficients<T> {
        let k = self.k();
        let k_t = cast_usize::<T>(k);
        let half_k = k_t / cast::<T>(2.0);
        let inv_k = T::one() / k_t;
        let eta = self
            .beta
            .windows(2)
            .map(|p| half_k * (p[1] - p[0] + inv_k))
            .collect();
        AngularCoefficients { eta }
    }

    /// Degree-`k` Bernstein projection `beta_j = a(j/k)` of a dependence
    /// function. For any function satisfying the Pickands conditions the
    /// projection is itself valid.
    pub fn project<F: Fn(T) -> T>(a: F, k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::domain("projection requires k >= 3"));
        }
        let k_t = cast_usize::<T>(k);
        let beta: Vec<T> = (0..=k).map(|j| a(cast_usize::<T>(j) / k_t)).collect();
        Self::new(beta)
    }

}

/// Precomputed difference vectors for repeated `A`, `A'`, `A''` evaluation.
pub struct PickandsEvaluator<'a, T> {
    beta: &'a [T],
    dbeta: Vec<T>,
    d2beta: Vec<T>,
    k: usize,
}

impl<'a, T: Real> PickandsEvaluator<'a, T> {
    fn new(c: &'a PickandsCoefficients<T>) -> Self {
        let beta = c.beta();
        let dbeta: Vec<T> = beta.windows(2).map(|p| p[1] - p[0]).collect();
        let d2beta: Vec<T> = dbeta.windows(2).map(|p| p[1] - p[0]).collect();
        PickandsEvaluator { beta, dbeta, d2beta, k: c.k() }
    }

    /// `A(t)`.
    #[inline]
    pub fn a(&self, t: T) -> T {
        bernstein_sum(self.beta, t)
    }

    /// `A'(t)` (one-sided limits at the endpoints).
    #[inline]
    pub fn d1(&self, t: T) -> T {
        cast_usize::<T>(self.k) * bernstein_sum(&self.dbeta, t)
    }

    /// `A''(t)` extended to the closed interval by continuity.
    #[inline]
    pub fn d2(&self, t: T) -> T {
        let k = self.k;
        cast_usize::<T>(k) * cast_usize::<T>(k - 1) * bernstein_sum(&self.d2beta, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quadrature;
    use approx::assert_abs_diff_eq;

    fn angular(eta: &[f64]) -> AngularCoefficients<f64> {
        AngularCoefficients::new(eta.to_vec()).unwrap()
    }

    fn pickands(beta: &[f64]) -> PickandsCoefficients<f64> {
        PickandsCoefficients::new(beta.to_vec()).unwrap()
    }

    #[test]
    fn angular_validation_examples() {
        let tol = ValidationTolerances::default();
        assert!(AngularCoefficients::validate(&[0.5, 0.5, 0.5], &tol).is_valid());
        assert!(AngularCoefficients::validate(&[0.0, 0.5, 1.0], &tol).is_valid());
        let report = AngularCoefficients::validate(&[0.6, 0.5, 0.4], &tol);
        assert!(!report.is_valid());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::DecreasingCoefficient { .. })));
    }

    #[test]
    fn angular_validation_reports_sum_and_mass() {
        let tol = ValidationTolerances::default();
        let report = AngularCoefficients::validate(&[0.0, 0.1, 1.0], &tol);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::SumMismatch { .. })));
        // p0 above one half
        let report = AngularCoefficients::validate(&[0.6, 0.6, 0.6], &tol);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::VertexMassOutOfRange { upper_vertex: false, .. })));
        let report = AngularCoefficients::validate(&[0.5, 0.5], &tol);
        assert!(matches!(report.violations[0], Violation::DegreeTooSmall { len: 2 }));
    }

    #[test]
    fn pickands_validation_examples() {
        let tol = ValidationTolerances::default();
        assert!(PickandsCoefficients::validate(&[1.0, 1.0, 1.0, 1.0], &tol).is_valid());
        let c = 2.0 / 3.0;
        assert!(PickandsCoefficients::validate(&[1.0, c, c, 1.0], &tol).is_valid());
        let report = PickandsCoefficients::validate(&[1.0, 0.5, 0.9, 1.0], &tol);
        assert!(!report.is_valid());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::SlopeCoefficientOutOfRange { upper_end: false, .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NegativeSecondDifference { .. })));
    }

    #[test]
    fn conversion_examples() {
        let c = 2.0 / 3.0;
        let eta = pickands(&[1.0, c, c, 1.0]).to_angular();
        assert_eq!(eta.k(), 3);
        for (got, want) in eta.eta().iter().zip([0.0, 0.5, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }

        let eta = pickands(&[1.0, 0.8, 0.75, 0.8, 1.0]).to_angular();
        for (got, want) in eta.eta().iter().zip([0.1, 0.4, 0.6, 0.9]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }

        let eta = pickands(&[1.0, 1.0, 1.0, 1.0]).to_angular();
        for &got in eta.eta() {
            assert_abs_diff_eq!(got, 0.5, epsilon = 1e-15);
        }

        let beta = angular(&[0.5, 0.5, 0.5]).to_pickands();
        for &got in beta.beta() {
            assert_abs_diff_eq!(got, 1.0, epsilon = 1e-15);
        }
        let beta = angular(&[0.1, 0.4, 0.6, 0.9]).to_pickands();
        for (got, want) in beta.beta().iter().zip([1.0, 0.8, 0.75, 0.8, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        let beta = angular(&[0.0, 0.5, 1.0]).to_pickands();
        for (got, want) in beta.beta().iter().zip([1.0, c, c, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn angular_cdf_examples() {
        let c = angular(&[0.5, 0.5, 0.5]);
        assert_abs_diff_eq!(c.cdf(0.3).unwrap(), 0.5, epsilon = 1e-14);
        let c = angular(&[0.0, 0.5, 1.0]);
        assert_eq!(c.cdf(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(c.cdf(0.5).unwrap(), 0.5, epsilon = 1e-14);
        assert_eq!(c.cdf(1.0).unwrap(), 1.0);
        assert!(c.cdf(-0.1).is_err());
        assert!(c.cdf(1.1).is_err());
    }

    #[test]
    fn angular_density_examples() {
        // eta = (0, 0.5, 1) is the uniform density
        let c = angular(&[0.0, 0.5, 1.0]);
        for w in [0.1, 0.37, 0.5, 0.93] {
            assert_abs_diff_eq!(c.density(w).unwrap(), 1.0, epsilon = 1e-13);
        }
        // independence has no continuous part
        let c = angular(&[0.5, 0.5, 0.5]);
        assert_abs_diff_eq!(c.density(0.42).unwrap(), 0.0, epsilon = 1e-15);
        // 0.3 Be(.5|1,3) + 0.2 Be(.5|2,2) + 0.3 Be(.5|3,1)
        // = 0.3 * 0.75 + 0.2 * 1.5 + 0.3 * 0.75 = 0.75
        let c = angular(&[0.1, 0.4, 0.6, 0.9]);
        assert_abs_diff_eq!(c.density(0.5).unwrap(), 0.75, epsilon = 1e-13);
        assert!(c.density(0.0).is_err());
        assert!(c.density(1.0).is_err());
        // one-sided limits at the vertices
        assert_abs_diff_eq!(c.density_limit(0.0), 3.0 * 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(c.density_limit(1.0), 3.0 * 0.3, epsilon = 1e-15);
    }

    #[test]
    fn angular_density_integrates_to_continuous_mass() {
        let c = angular(&[0.1, 0.4, 0.6, 0.9]);
        let mass = quadrature(|w| c.density(w).unwrap(), 1e-12, 1.0 - 1e-12, 2001).unwrap();
        assert_abs_diff_eq!(mass, 1.0 - c.p0() - c.p1(), epsilon = 1e-8);
    }

    #[test]
    fn pickands_examples() {
        let c = pickands(&[1.0, 1.0, 1.0, 1.0]);
        assert_abs_diff_eq!(c.pickands(0.37).unwrap(), 1.0, epsilon = 1e-14);
        let b = 2.0 / 3.0;
        let c = pickands(&[1.0, b, b, 1.0]);
        assert_abs_diff_eq!(c.pickands(0.5).unwrap(), 0.75, epsilon = 1e-14);
        let c = pickands(&[1.0, 0.8, 0.75, 0.8, 1.0]);
        assert_abs_diff_eq!(c.pickands(0.5).unwrap(), 0.80625, epsilon = 1e-14);
        assert!(c.pickands(-0.01).is_err());
    }

    #[test]
    fn pickands_derivative_examples() {
        let b = 2.0 / 3.0;
        let c = pickands(&[1.0, b, b, 1.0]);
        assert_abs_diff_eq!(c.pickands_d1(0.5).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.pickands_d2(0.5).unwrap(), 2.0, epsilon = 1e-13);
        let ind = pickands(&[1.0, 1.0, 1.0, 1.0]);
        for t in [0.0, 0.25, 0.5, 1.0] {
            assert_abs_diff_eq!(ind.pickands_d1(t).unwrap(), 0.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(ind.pickands_d2(0.3).unwrap(), 0.0, epsilon = 1e-14);
        assert!(ind.pickands_d2(0.0).is_err());
        // endpoint slopes recover the vertex masses
        let c = pickands(&[1.0, 0.8, 0.75, 0.8, 1.0]);
        assert_abs_diff_eq!(c.pickands_d1(0.0).unwrap(), 2.0 * c.p0() - 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.pickands_d1(1.0).unwrap(), 1.0 - 2.0 * c.p1(), epsilon = 1e-14);
        assert_abs_diff_eq!(c.p0(), 0.1, epsilon = 1e-14);
        assert_abs_diff_eq!(c.p1(), 0.1, epsilon = 1e-14);
    }

    /// Quadrature oracle for R(1/y1, 1/y2), splitting at the integrand kink.
    fn tail_dep_quadrature(c: &AngularCoefficients<f64>, y1: f64, y2: f64) -> f64 {
        let kink = y1 / (y1 + y2);
        let f = |w: f64| (w / y1).min((1.0 - w) / y2) * c.density_limit(w);
        let mut total = 0.0;
        if kink > 0.0 {
            total += quadrature(f, 0.0, kink, 2001).unwrap();
        }
        if kink < 1.0 {
            total += quadrature(f, kink, 1.0, 2001).unwrap();
        }
        2.0 * total
    }

    #[test]
    fn stable_tail_and_r_examples() {
        let ind = pickands(&[1.0, 1.0, 1.0, 1.0]);
        assert_abs_diff_eq!(ind.stable_tail(0.3, 0.9).unwrap(), 1.2, epsilon = 1e-14);
        assert_abs_diff_eq!(ind.tail_dependence(0.3, 0.9).unwrap(), 0.0, epsilon = 1e-14);

        let b = 2.0 / 3.0;
        let c = pickands(&[1.0, b, b, 1.0]);
        assert_abs_diff_eq!(c.tail_dependence(1.0, 1.0).unwrap(), 0.5, epsilon = 1e-13);
        let oracle = tail_dep_quadrature(&c.to_angular(), 1.0, 1.0);
        assert_abs_diff_eq!(oracle, 0.5, epsilon = 1e-9);

        for x in [0.2, 1.0, 7.5] {
            assert_abs_diff_eq!(c.stable_tail(x, 0.0).unwrap(), x, epsilon = 1e-14);
            assert_abs_diff_eq!(c.stable_tail(0.0, x).unwrap(), x, epsilon = 1e-14);
        }
        assert_eq!(c.stable_tail(0.0, 0.0).unwrap(), 0.0);
        assert!(c.stable_tail(-1.0, 1.0).is_err());
    }

    #[test]
    fn chi_examples() {
        assert_abs_diff_eq!(pickands(&[1.0, 1.0, 1.0, 1.0]).chi(), 0.0, epsilon = 1e-14);
        let b = 2.0 / 3.0;
        assert_abs_diff_eq!(pickands(&[1.0, b, b, 1.0]).chi(), 0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(
            pickands(&[1.0, 0.8, 0.75, 0.8, 1.0]).chi(),
            0.3875,
            epsilon = 1e-13
        );
    }

    #[test]
    fn exceedance_examples() {
        let ind = angular(&[0.5, 0.5, 0.5]);
        assert_eq!(ind.exceedance_prob(10.0, 10.0).unwrap(), 0.0);

        let c = angular(&[0.0, 0.5, 1.0]);
        let got = c.exceedance_prob(10.0, 10.0).unwrap();
        assert_abs_diff_eq!(got, 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(got, tail_dep_quadrature(&c, 10.0, 10.0), epsilon = 1e-9);

        let c = angular(&[0.1, 0.4, 0.6, 0.9]);
        let got = c.exceedance_prob(10.0, 10.0).unwrap();
        assert_abs_diff_eq!(got, 0.03875, epsilon = 1e-12);
        assert_abs_diff_eq!(got, tail_dep_quadrature(&c, 10.0, 10.0), epsilon = 1e-9);

        assert!(c.exceedance_prob(0.0, 1.0).is_err());
    }

    #[test]
    fn exceedance_matches_quadrature_asymmetric() {
        let c = angular(&[0.05, 0.3, 0.55, 0.6, 1.0]);
        for (y1, y2) in [(10.0, 10.0), (5.0, 40.0), (100.0, 12.0), (3.0, 3.0)] {
            let closed = c.exceedance_prob(y1, y2).unwrap();
            let oracle = tail_dep_quadrature(&c, y1, y2);
            assert!(
                (closed - oracle).abs() < 1e-9,
                "closed {closed} vs quadrature {oracle} at ({y1},{y2})"
            );
        }
    }

    #[test]
    fn exceedance_homogeneity() {
        let c = angular(&[0.1, 0.4, 0.6, 0.9]);
        let base = c.exceedance_prob(10.0, 25.0).unwrap();
        for lambda in [0.5, 2.0, 13.0] {
            let scaled = c.exceedance_prob(lambda * 10.0, lambda * 25.0).unwrap();
            assert_abs_diff_eq!(scaled, base / lambda, epsilon = 1e-12);
        }
    }

    #[test]
    fn exceedance_agrees_with_tail_dependence() {
        let c = angular(&[0.1, 0.4, 0.6, 0.9]);
        let beta = c.to_pickands();
        let via_l = beta.tail_dependence(1.0 / 10.0, 1.0 / 25.0).unwrap();
        let closed = c.exceedance_prob(10.0, 25.0).unwrap();
        assert_abs_diff_eq!(via_l, closed, epsilon = 1e-12);
    }

    #[test]
    fn degree_elevation_preserves_function() {
        let c = angular(&[0.1, 0.4, 0.6, 0.9]);
        let up = c.degree_elevated();
        assert_eq!(up.k(), 5);
        assert!(AngularCoefficients::validate(up.eta(), &ValidationTolerances::default()).is_valid());
        for i in 0..=50 {
            let w = i as f64 / 50.0;
            if w < 1.0 {
                assert_abs_diff_eq!(c.cdf(w).unwrap(), up.cdf(w).unwrap(), epsilon = 1e-10);
            }
        }
        assert_abs_diff_eq!(up.eta().iter().sum::<f64>(), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn derivative_identities_on_grid() {
        let c = angular(&[0.05, 0.3, 0.55, 0.6, 1.0]);
        let beta = c.to_pickands();
        for i in 0..=100 {
            let t = i as f64 / 101.0;
            let lhs = beta.pickands_d1(t).unwrap();
            let rhs = 2.0 * c.cdf(t).unwrap() - 1.0;
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
            if t > 0.0 {
                let lhs2 = beta.pickands_d2(t).unwrap();
                let rhs2 = 2.0 * c.density(t).unwrap();
                assert_abs_diff_eq!(lhs2, rhs2, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn mean_constraint_via_quadrature() {
        for eta in [vec![0.0, 0.5, 1.0], vec![0.1, 0.4, 0.6, 0.9], vec![0.05, 0.3, 0.55, 0.6, 1.0]] {
            let c = angular(&eta);
            let m = quadrature(|w| w * c.density_limit(w), 0.0, 1.0, 2001).unwrap();
            assert!(
                (m + c.p1() - 0.5).abs() < 1e-8,
                "mean constraint violated for {eta:?}: {m}"
            );
        }
    }

    #[test]
    fn projection_of_convex_function_is_valid() {
        // A(t) = 1 - c t (1 - t) is convex with A(0) = A(1) = 1
        for k in [3usize, 7, 20, 60] {
            let proj = PickandsCoefficients::project(|t: f64| 1.0 - 0.8 * t * (1.0 - t), k).unwrap();
            assert_eq!(proj.k(), k);
            for i in 1..=19 {
                let t = i as f64 / 20.0;
                let want = 1.0 - 0.8 * t * (1.0 - t);
                // Bernstein approximation error is O(1/k)
                assert!((proj.pickands(t).unwrap() - want).abs() < 0.45 / k as f64 + 1e-12);
            }
        }
    }

    #[test]
    fn bernstein_sum_partition_of_unity() {
        let ones = vec![1.0f64; 31];
        for i in 0..=40 {
            let x = i as f64 / 40.0;
            assert_abs_diff_eq!(bernstein_sum(&ones, x), 1.0, epsilon = 5e-14);
        }
        // beyond the factorial table
        let ones = vec![1.0f64; 5000];
        assert_abs_diff_eq!(bernstein_sum(&ones, 0.37), 1.0, epsilon = 1e-9);
    }
}
