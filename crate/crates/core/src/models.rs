//! Benchmark parametric dependence families: closed-form Pickands
//! functions, vertex masses, exact bivariate samplers and the integrated
//! squared error used to measure estimation accuracy.

use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::likelihood::FrechetSample;
use crate::numerics::{bisection_invert, quadrature, std_normal_cdf, student_t_cdf, ToleranceConfig};
use crate::scalar::{cast, Real};

/// Step for the one-sided endpoint derivatives that recover vertex masses.
const MASS_STEP: f64 = 1e-7;
/// Step for interior central differences where no analytic derivative is used.
const DIFF_STEP: f64 = 1e-6;

/// A parametric bivariate extremal dependence model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DependenceModel<T> {
    /// Symmetric logistic; `alpha` in (0, 1], 1 is independence.
    SymmetricLogistic { alpha: T },
    /// Asymmetric logistic with asymmetry weights `tau1`, `tau2` in [0, 1].
    AsymmetricLogistic { alpha: T, tau1: T, tau2: T },
    /// Hüsler-Reiss; dependence decreases as `lambda` grows.
    HuslerReiss { lambda: T },
    /// Extremal-t with pseudo-correlation `omega` in (-1, 1) and `nu > 0`
    /// degrees of freedom; carries point masses at both vertices.
    ExtremalT { omega: T, nu: T },
}

impl<T: Real> DependenceModel<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DependenceModel::SymmetricLogistic { alpha } => alpha > T::zero() && alpha <= T::one(),
            DependenceModel::AsymmetricLogistic { alpha, tau1, tau2 } => {
                alpha > T::zero()
                    && alpha <= T::one()
                    && (T::zero()..=T::one()).contains(&tau1)
                    && (T::zero()..=T::one()).contains(&tau2)
            }
            DependenceModel::HuslerReiss { lambda } => lambda > T::zero() && lambda.is_finite(),
            DependenceModel::ExtremalT { omega, nu } => {
                omega.abs() < T::one() && nu > T::zero() && nu.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("parameters out of range: {self:?}")))
        }
    }

    /// True Pickands dependence function `A(t)`.
    pub fn pickands(&self, t: T) -> Result<T> {
        if !(t >= T::zero() && t <= T::one()) {
            return Err(Error::domain(format!("pickands requires t in [0,1], got {t}")));
        }
        let one = T::one();
        Ok(match *self {
            DependenceModel::SymmetricLogistic { alpha } => {
                ((one - t).powf(one / alpha) + t.powf(one / alpha)).powf(alpha)
            }
            DependenceModel::AsymmetricLogistic { alpha, tau1, tau2 } => {
                let inv = one / alpha;
                (one - tau1) * (one - t)
                    + (one - tau2) * t
                    + ((tau1 * (one - t)).powf(inv) + (tau2 * t).powf(inv)).powf(alpha)
            }
            DependenceModel::HuslerReiss { lambda } => {
                let half = cast::<T>(0.5);
                let z1 = lambda + ((one - t) / t).ln() * half / lambda;
                let z2 = lambda + (t / (one - t)).ln() * half / lambda;
                (one - t) * std_normal_cdf(z1) + t * std_normal_cdf(z2)
            }
            DependenceModel::ExtremalT { omega, nu } => {
                let df = nu + one;
                let scale = (df / (one - omega * omega)).sqrt();
                let z = |w: T| -> Result<T> {
                    let ratio = if w == one {
                        T::infinity()
                    } else {
                        (w / (one - w)).powf(one / nu)
                    };
                    student_t_cdf((ratio - omega) * scale, df)
                };
                t * z(t)? + (one - t) * z(one - t)?
            }
        })
    }

    /// First derivative of the Pickands function; analytic for the logistic
    /// and Hüsler-Reiss families, central differences otherwise.
    pub fn pickands_d1(&self, t: T) -> Result<T> {
        if !(t >= T::zero() && t <= T::one()) {
            return Err(Error::domain(format!("pickands_d1 requires t in [0,1], got {t}")));
        }
        let one = T::one();
        match *self {
            DependenceModel::SymmetricLogistic { alpha } => {
                let inv = one / alpha;
                let u = (one - t).powf(inv) + t.powf(inv);
                Ok(u.powf(alpha - one) * (t.powf(inv - one) - (one - t).powf(inv - one)))
            }
            DependenceModel::HuslerReiss { lambda } => {
                // (1-t) phi(z1) cancels t phi(z2) exactly, leaving the CDFs
                let half = cast::<T>(0.5);
                let z1 = lambda + ((one - t) / t).ln() * half / lambda;
                let z2 = lambda + (t / (one - t)).ln() * half / lambda;
                Ok(std_normal_cdf(z2) - std_normal_cdf(z1))
            }
            _ => {
                let h = cast::<T>(DIFF_STEP);
                let tiny = cast::<T>(1e-9);
                let step = cast::<T>(MASS_STEP);
                if t < tiny {
                    Ok((self.pickands(t + step)? - self.pickands(t)?) / step)
                } else if t > one - tiny {
                    Ok((self.pickands(t)? - self.pickands(t - step)?) / step)
                } else {
                    let h = h.min(t * cast::<T>(0.5)).min((one - t) * cast::<T>(0.5));
                    Ok((self.pickands(t + h)? - self.pickands(t - h)?) / (h + h))
                }
            }
        }
    }

    /// Vertex masses `(p0, p1)` from the one-sided endpoint slopes,
    /// `p0 = (1 + A'(0))/2` and `p1 = (1 - A'(1))/2`.
    pub fn point_masses(&self) -> Result<(T, T)> {
        let one = T::one();
        let two = cast::<T>(2.0);
        let h = cast::<T>(MASS_STEP);
        let d0 = (self.pickands(h)? - one) / h;
        let d1 = (one - self.pickands(one - h)?) / h;
        let clamp = |x: T| x.max(T::zero()).min(cast::<T>(0.5));
        Ok((clamp((one + d0) / two), clamp((one - d1) / two)))
    }

    /// Upper tail-dependence coefficient `chi = 2 - 2 A(1/2)`.
    pub fn chi(&self) -> Result<T> {
        let two = cast::<T>(2.0);
        Ok(two - two * self.pickands(cast::<T>(0.5))?)
    }
}

impl DependenceModel<f64> {
    /// Conditional CDF of the second coordinate given the first,
    /// `F(y2 | y1) = exp(1/y1) G(y1, y2) (A(t) - t A'(t))`.
    pub(crate) fn conditional_cdf(&self, y1: f64, y2: f64) -> Result<f64> {
        let t = y1 / (y1 + y2);
        let a = self.pickands(t)?;
        let a1 = self.pickands_d1(t)?;
        let exponent = 1.0 / y1 - (1.0 / y1 + 1.0 / y2) * a;
        Ok(exponent.exp() * (a - t * a1).max(0.0))
    }

    /// Draw `n` i.i.d. pairs with unit-Fréchet margins and this dependence
    /// structure: the first coordinate by inversion, the second by solving
    /// the conditional CDF on a log-scale bracket.
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Result<FrechetSample<f64>> {
        self.validate()?;
        let tol = ToleranceConfig { abs_tol: 1e-10, rel_tol: 1e-12, max_iter: 200, quadrature_points: 1001 };
        let (lo, hi) = (1e-8f64.ln(), 1e12f64.ln());
        let mut pairs = Vec::with_capacity(n);
        for _ in 0..n {
            let y1 = -1.0 / positive_uniform(rng).ln();
            let u2 = positive_uniform(rng);
            let zeta = bisection_invert(
                |z: f64| self.conditional_cdf(y1, z.exp()).expect("t in range"),
                u2,
                lo,
                hi,
                &tol,
            )?;
            pairs.push((y1, zeta.exp()));
        }
        FrechetSample::new(pairs)
    }
}

fn positive_uniform(rng: &mut impl Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

impl FromStr for DependenceModel<f64> {
    type Err = Error;

    /// Parse `sl:a`, `al:a,t1,t2`, `hr:l` or `et:w,v`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s
            .split_once(':')
            .ok_or_else(|| Error::Format(format!("expected family:params in model spec `{s}`")))?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Format(format!("bad model parameter `{p}`")))
            })
            .collect::<Result<_>>()?;
        let expect = |n: usize| -> Result<()> {
            if nums.len() == n {
                Ok(())
            } else {
                Err(Error::Format(format!("family `{name}` takes {n} parameters, got {}", nums.len())))
            }
        };
        let model = match name {
            "sl" => {
                expect(1)?;
                DependenceModel::SymmetricLogistic { alpha: nums[0] }
            }
            "al" => {
                expect(3)?;
                DependenceModel::AsymmetricLogistic { alpha: nums[0], tau1: nums[1], tau2: nums[2] }
            }
            "hr" => {
                expect(1)?;
                DependenceModel::HuslerReiss { lambda: nums[0] }
            }
            "et" => {
                expect(2)?;
                DependenceModel::ExtremalT { omega: nums[0], nu: nums[1] }
            }
            other => return Err(Error::Format(format!("unknown model family `{other}`"))),
        };
        model.validate()?;
        Ok(model)
    }
}

/// Integrated squared error between a fitted dependence function and the
/// model truth, by composite Simpson on `n_points` grid points.
pub fn ise<F: Fn(f64) -> f64>(
    a_hat: F,
    model: &DependenceModel<f64>,
    n_points: usize,
) -> Result<f64> {
    quadrature(
        |t| {
            let d = a_hat(t) - model.pickands(t).expect("t in [0,1]");
            d * d
        },
        0.0,
        1.0,
        n_points,
    )
}
