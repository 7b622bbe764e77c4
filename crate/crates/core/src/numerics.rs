//! Special functions, quadrature and root finding used throughout the crate.
//!
//! All routines are pure and allocation-free; they are generic over the
//! scalar type via [`Real`].

use crate::error::{Error, Result};
use crate::scalar::{cast, Real};

/// Numerical tolerances shared by iterative routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_iter: usize,
    /// Grid size for composite Simpson quadrature; must be odd and >= 3.
    pub quadrature_points: usize,
}

impl<T: Real> Default for ToleranceConfig<T> {
    fn default() -> Self {
        ToleranceConfig {
            abs_tol: cast(1e-10),
            rel_tol: cast(1e-10),
            max_iter: 200,
            quadrature_points: 1001,
        }
    }
}

impl<T: Real> ToleranceConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > T::zero()) || !(self.rel_tol > T::zero()) {
            return Err(Error::domain("tolerances must be positive"));
        }
        if self.max_iter < 1 {
            return Err(Error::domain("max_iter must be at least 1"));
        }
        if self.quadrature_points < 3 || self.quadrature_points.is_multiple_of(2) {
            return Err(Error::domain("quadrature_points must be odd and >= 3"));
        }
        Ok(())
    }
}

/// Lanczos coefficients (g = 7, n = 9).
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_1,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_312e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked<T: Real>(x: T) -> T {
    let half = cast::<T>(0.5);
    if x < half {
        // reflection keeps the Lanczos sum well conditioned for small x
        let pi = T::from(std::f64::consts::PI).unwrap();
        return (pi / (pi * x).sin()).ln() - log_gamma_unchecked(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = cast::<T>(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += cast::<T>(c) / (x + cast_usize_t::<T>(i));
    }
    let g = cast::<T>(7.0);
    let t = x + g + half;
    let ln_sqrt_two_pi = cast::<T>(0.918_938_533_204_672_7); // ln(sqrt(2*pi))
    ln_sqrt_two_pi + (x + half) * t.ln() - t + acc.ln()
}

#[inline]
fn cast_usize_t<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable")
}

/// `ln B(a, b)`.
pub(crate) fn log_beta<T: Real>(a: T, b: T) -> T {
    log_gamma_unchecked(a) + log_gamma_unchecked(b) - log_gamma_unchecked(a + b)
}

/// Beta density `Be(x | a, b)` on `[0, 1]`.
///
/// At the boundary the finite limit is returned whenever it exists
/// (`Be(0|1,b) = b`, `Be(1|a,1) = a`); a diverging limit yields `+inf`.
pub fn beta_density<T: Real>(x: T, a: T, b: T) -> Result<T> {
    if !(a > T::zero()) || !(b > T::zero()) {
        return Err(Error::domain("beta_density requires a > 0 and b > 0"));
    }
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::domain(format!("beta_density requires x in [0,1], got {x}")));
    }
    let one = T::one();
    if x == T::zero() {
        return Ok(if a > one {
            T::zero()
        } else if a == one {
            b
        } else {
            T::infinity()
        });
    }
    if x == one {
        return Ok(if b > one {
            T::zero()
        } else if b == one {
            a
        } else {
            T::infinity()
        });
    }
    let log_pdf = (a - one) * x.ln() + (b - one) * (one - x).ln() - log_beta(a, b);
    Ok(log_pdf.exp())
}

/// Regularized incomplete beta function `I_x(a, b)`.
///
/// Continued-fraction evaluation (modified Lentz) with the symmetry switch
/// at `x > a/(a+b)`, which keeps the fraction in its fast-converging region
/// for shape parameters into the hundreds.
pub fn regularized_incomplete_beta<T: Real>(x: T, a: T, b: T) -> Result<T> {
    if !(a > T::zero()) || !(b > T::zero()) {
        return Err(Error::domain("incomplete beta requires a > 0 and b > 0"));
    }
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::domain(format!(
            "incomplete beta requires x in [0,1], got {x}"
        )));
    }
    let one = T::one();
    if x == T::zero() {
        return Ok(T::zero());
    }
    if x == one {
        return Ok(one);
    }
    let front = (a * x.ln() + b * (one - x).ln() - log_beta(a, b)).exp();
    if x > a / (a + b) {
        let tail = front / b * beta_cf(one - x, b, a);
        Ok(one - tail)
    } else {
        Ok(front / a * beta_cf(x, a, b))
    }
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf<T: Real>(x: T, a: T, b: T) -> T {
    let one = T::one();
    let two = cast::<T>(2.0);
    let tiny = cast::<T>(1e-30);
    let eps = T::epsilon() * cast::<T>(4.0);

    let qab = a + b;
    let qap = a + one;
    let qam = a - one;

    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;

    // Typical calls exit in well under 50 iterations; huge shape parameters
    // (Student-t with df ~ 1e6) need a few thousand near the switch point.
    for m in 1..=8000usize {
        let m_t = cast_usize_t::<T>(m);
        let m2 = two * m_t;

        // even step
        let aa = m_t * (b - m_t) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        h *= d * c;

        // odd step
        let aa = -(a + m_t) * (qab + m_t) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let del = d * c;
        h *= del;

        if (del - one).abs() < eps {
            break;
        }
    }
    h
}

/// Complementary error function, accurate to ~1e-15 absolute.
pub(crate) fn erfc<T: Real>(x: T) -> T {
    if x < T::zero() {
        return cast::<T>(2.0) - erfc(-x);
    }
    if x > cast::<T>(30.0) {
        // exp(-x^2) underflows; also covers +inf arguments from log-ratios
        return T::zero();
    }
    if x < cast::<T>(2.0) {
        T::one() - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

/// Taylor series for erf, used on [0, 2).
fn erf_series<T: Real>(x: T) -> T {
    let two_over_sqrt_pi = T::from(std::f64::consts::FRAC_2_SQRT_PI).unwrap();
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let eps = T::epsilon();
    for n in 1..200usize {
        let n_t = cast_usize_t::<T>(n);
        term = -term * x2 / n_t;
        let inc = term / (cast::<T>(2.0) * n_t + T::one());
        sum += inc;
        if inc.abs() < eps * sum.abs() {
            break;
        }
    }
    two_over_sqrt_pi * sum
}

/// Continued fraction for erfc, used for x >= 2 (Lentz).
fn erfc_cf<T: Real>(x: T) -> T {
    let one = T::one();
    let half = cast::<T>(0.5);
    let tiny = cast::<T>(1e-300);
    let eps = T::epsilon() * cast::<T>(4.0);
    let sqrt_pi = T::from(std::f64::consts::PI).unwrap().sqrt();

    let mut c = cast::<T>(1e300);
    let mut d = x;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;
    for m in 1..200usize {
        let am = half * cast_usize_t::<T>(m);
        // b terms alternate between x and x with the a_m = m/2 numerators
        d = x + am * d;
        if d.abs() < tiny {
            d = tiny;
        }
        d = one / d;
        c = x + am / c;
        if c.abs() < tiny {
            c = tiny;
        }
        let del = d * c;
        h *= del;
        if (del - one).abs() < eps {
            break;
        }
    }
    (-(x * x)).exp() / sqrt_pi * h
}

/// Standard normal cumulative distribution function.
pub fn std_normal_cdf<T: Real>(x: T) -> T {
    let inv_sqrt2 = cast::<T>(std::f64::consts::FRAC_1_SQRT_2);
    cast::<T>(0.5) * erfc(-x * inv_sqrt2)
}

/// Student-t cumulative distribution function with `df > 0` degrees of freedom.
///
/// Closed forms are used for df in {1, 2, 3}; otherwise the CDF is obtained
/// from the regularized incomplete beta function.
pub fn student_t_cdf<T: Real>(x: T, df: T) -> Result<T> {
    if !(df > T::zero()) {
        return Err(Error::domain("student_t_cdf requires df > 0"));
    }
    if x.is_infinite() {
        return Ok(if x > T::zero() { T::one() } else { T::zero() });
    }
    let one = T::one();
    let half = cast::<T>(0.5);
    let pi = T::from(std::f64::consts::PI).unwrap();

    let rounded = df.round();
    if (df - rounded).abs() < cast::<T>(1e-12) {
        if rounded == one {
            return Ok(half + x.atan() / pi);
        }
        if rounded == cast::<T>(2.0) {
            return Ok(half + x / (cast::<T>(2.0) * (cast::<T>(2.0) + x * x).sqrt()));
        }
        if rounded == cast::<T>(3.0) {
            let s3 = cast::<T>(3.0).sqrt();
            let u = x / s3;
            return Ok(half + (u / (one + u * u) + u.atan()) / pi);
        }
    }

    let h = df / (df + x * x);
    let tail = half * regularized_incomplete_beta(h, half * df, half)?;
    Ok(if x <= T::zero() { tail } else { one - tail })
}

/// Invert a monotone scalar function by bisection.
///
/// `f(lo)` and `f(hi)` must bracket `target`; the function may be increasing
/// or decreasing. Returns the midpoint once the bracket width falls below
/// `rel_tol * |x| + abs_tol`.
pub fn bisection_invert<T, F>(f: F, target: T, lo: T, hi: T, tol: &ToleranceConfig<T>) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    tol.validate()?;
    if !(lo < hi) {
        return Err(Error::domain("bisection requires lo < hi"));
    }
    let flo = f(lo) - target;
    let fhi = f(hi) - target;
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracket(format!(
            "target {target} not enclosed by f({lo}), f({hi})"
        )));
    }
    let half = cast::<T>(0.5);
    let (mut lo, mut hi, mut flo) = (lo, hi, flo);
    for _ in 0..tol.max_iter {
        let mid = half * (lo + hi);
        let width = hi - lo;
        if width <= tol.rel_tol * mid.abs() + tol.abs_tol {
            return Ok(mid);
        }
        let fm = f(mid) - target;
        if fm == T::zero() {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence {
        what: "bisection bracket did not shrink to tolerance".into(),
        iterations: tol.max_iter,
    })
}

/// Composite Simpson quadrature of `f` over `[a, b]` with `n` grid points
/// (`n` odd, `n >= 3`).
pub fn quadrature<T, F>(f: F, a: T, b: T, n: usize) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::domain("quadrature requires an odd n >= 3"));
    }
    if !(a < b) {
        return Err(Error::domain("quadrature requires a < b"));
    }
    let n_t = cast_usize_t::<T>(n - 1);
    let h = (b - a) / n_t;
    let mut sum = f(a) + f(b);
    let four = cast::<T>(4.0);
    let two = cast::<T>(2.0);
    for i in 1..n - 1 {
        let x = a + h * cast_usize_t::<T>(i);
        let w = if i % 2 == 1 { four } else { two };
        sum += w * f(x);
    }
    Ok(sum * h / cast::<T>(3.0))
}
