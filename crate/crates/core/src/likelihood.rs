//! Max-stable density and log-likelihood in the Bernstein parametrization.
//!
//! For unit-Fréchet pairs the joint CDF is
//! `G(y1, y2) = exp(-(1/y1 + 1/y2) A(t))` with `t = y1/(y1 + y2)`, and the
//! density factors as
//! `g = G [ (A - t A')(A + (1-t) A') / (y1 y2)^2 + A'' / (y1 + y2)^3 ]`.
//! All Bernstein sums go through the shared coefficient types, so the
//! analytic identities proved there carry over to the likelihood.

use crate::bernstein::{AngularCoefficients, PickandsCoefficients, PickandsEvaluator};
use crate::error::{Error, Result};
use crate::scalar::{cast, Real};

/// Values of the bracketed density factor at or below this floor are
/// treated as underflow and yield a `-inf` log density.
const BRACKET_FLOOR: f64 = 1e-300;

/// Bivariate observations on the unit-Fréchet scale.
#[derive(Debug, Clone, PartialEq)]
pub struct FrechetSample<T> {
    pairs: Vec<(T, T)>,
}

impl<T: Real> FrechetSample<T> {
    pub fn new(pairs: Vec<(T, T)>) -> Result<Self> {
        for (i, &(y1, y2)) in pairs.iter().enumerate() {
            if !(y1 > T::zero()) || !(y2 > T::zero()) || !y1.is_finite() || !y2.is_finite() {
                return Err(Error::domain(format!(
                    "pair {i} = ({y1}, {y2}) is not strictly positive and finite"
                )));
            }
        }
        Ok(FrechetSample { pairs })
    }

    pub fn pairs(&self) -> &[(T, T)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Joint CDF `G(y1, y2)` of the max-stable distribution with Pickands
/// coefficients `c`.
pub fn max_stable_cdf<T: Real>(c: &PickandsCoefficients<T>, y1: T, y2: T) -> Result<T> {
    if !(y1 > T::zero()) || !(y2 > T::zero()) {
        return Err(Error::domain("max_stable_cdf requires positive arguments"));
    }
    let t = y1 / (y1 + y2);
    let a = c.pickands(t)?;
    Ok((-(T::one() / y1 + T::one() / y2) * a).exp())
}

#[derive(Debug, Clone, Copy)]
struct PreparedPair<T> {
    /// `1/y1 + 1/y2`
    inv_sum: T,
    /// `y1/(y1 + y2)`
    t: T,
    /// `(y1 y2)^-2`
    inv_prod_sq: T,
    /// `(y1 + y2)^-3`
    inv_sum_cube: T,
}

impl<T: Real> PreparedPair<T> {
    fn new(y1: T, y2: T) -> Self {
        let sum = y1 + y2;
        let prod = y1 * y2;
        PreparedPair {
            inv_sum: T::one() / y1 + T::one() / y2,
            t: y1 / sum,
            inv_prod_sq: T::one() / (prod * prod),
            inv_sum_cube: T::one() / (sum * sum * sum),
        }
    }

    #[inline]
    fn log_density(&self, eval: &PickandsEvaluator<'_, T>) -> T {
        let one = T::one();
        let a = eval.a(self.t);
        let a1 = eval.d1(self.t);
        let a2 = eval.d2(self.t);
        let bracket = (a - self.t * a1) * (a + (one - self.t) * a1) * self.inv_prod_sq
            + a2 * self.inv_sum_cube;
        if bracket <= cast::<T>(BRACKET_FLOOR) {
            return T::neg_infinity();
        }
        -self.inv_sum * a + bracket.ln()
    }
}

/// Precomputed per-observation terms for repeated likelihood evaluation
/// (the MCMC evaluates thousands of coefficient proposals per data set).
#[derive(Debug, Clone)]
pub struct LikelihoodEvaluator<T> {
    prepared: Vec<PreparedPair<T>>,
}

impl<T: Real> LikelihoodEvaluator<T> {
    pub fn new(data: &FrechetSample<T>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::DegenerateData("likelihood needs at least one pair".into()));
        }
        Ok(LikelihoodEvaluator {
            prepared: data.pairs().iter().map(|&(y1, y2)| PreparedPair::new(y1, y2)).collect(),
        })
    }

    /// Log-likelihood of the Pickands coefficients.
    pub fn log_likelihood(&self, c: &PickandsCoefficients<T>) -> T {
        let eval = c.evaluator();
        let mut total = T::zero();
        for p in &self.prepared {
            let ld = p.log_density(&eval);
            if ld == T::neg_infinity() {
                return T::neg_infinity();
            }
            total += ld;
        }
        total
    }

    /// Log-likelihood of the angular coefficients (converted internally).
    pub fn log_likelihood_eta(&self, c: &AngularCoefficients<T>) -> T {
        self.log_likelihood(&c.to_pickands())
    }

    pub fn n_obs(&self) -> usize {
        self.prepared.len()
    }
}

/// Log of the max-stable density at one pair; `-inf` when the density
/// factor underflows.
pub fn log_density<T: Real>(c: &PickandsCoefficients<T>, y1: T, y2: T) -> Result<T> {
    if !(y1 > T::zero()) || !(y2 > T::zero()) {
        return Err(Error::domain("log_density requires positive arguments"));
    }
    let eval = c.evaluator();
    Ok(PreparedPair::new(y1, y2).log_density(&eval))
}

/// Log-likelihood over a sample of unit-Fréchet pairs.
pub fn log_likelihood<T: Real>(c: &PickandsCoefficients<T>, data: &FrechetSample<T>) -> Result<T> {
    Ok(LikelihoodEvaluator::new(data)?.log_likelihood(c))
}

/// Log-likelihood in the angular parametrization.
pub fn log_likelihood_eta<T: Real>(
    c: &AngularCoefficients<T>,
    data: &FrechetSample<T>,
) -> Result<T> {
    Ok(LikelihoodEvaluator::new(data)?.log_likelihood_eta(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pick(beta: &[f64]) -> PickandsCoefficients<f64> {
        PickandsCoefficients::new(beta.to_vec()).unwrap()
    }

    #[test]
    fn cdf_examples() {
        let ind = pick(&[1.0, 1.0, 1.0, 1.0]);
        assert_abs_diff_eq!(
            max_stable_cdf(&ind, 1.0, 1.0).unwrap(),
            (-2.0f64).exp(),
            epsilon = 1e-12
        );
        let b = 2.0 / 3.0;
        let c = pick(&[1.0, b, b, 1.0]);
        assert_abs_diff_eq!(
            max_stable_cdf(&c, 1.0, 1.0).unwrap(),
            (-1.5f64).exp(),
            epsilon = 1e-12
        );
        // marginal recovery as the other coordinate grows
        let g = max_stable_cdf(&c, 2.0, 1e12).unwrap();
        assert_abs_diff_eq!(g, (-0.5f64).exp(), epsilon = 1e-9);
        assert!(max_stable_cdf(&c, 0.0, 1.0).is_err());
    }

    #[test]
    fn log_density_examples() {
        let ind = pick(&[1.0, 1.0, 1.0, 1.0]);
        assert_abs_diff_eq!(log_density(&ind, 1.0, 1.0).unwrap(), -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            log_density(&ind, 2.0, 2.0).unwrap(),
            -1.0 - 16.0f64.ln(),
            epsilon = 1e-12
        );
        // A(1/2) = 3/4, A' = 0, A'' = 2 at t = 1/2:
        // g = e^{-3/2} (0.5625 + 0.25)
        let b = 2.0 / 3.0;
        let c = pick(&[1.0, b, b, 1.0]);
        assert_abs_diff_eq!(
            log_density(&c, 1.0, 1.0).unwrap(),
            -1.5 + 0.8125f64.ln(),
            epsilon = 1e-12
        );
        assert!(log_density(&c, -1.0, 1.0).is_err());
    }

    #[test]
    fn log_likelihood_sums_pairs() {
        let ind = pick(&[1.0, 1.0, 1.0, 1.0]);
        let data = FrechetSample::new(vec![(1.0, 1.0), (2.0, 2.0)]).unwrap();
        assert_abs_diff_eq!(
            log_likelihood(&ind, &data).unwrap(),
            -3.0 - 16.0f64.ln(),
            epsilon = 1e-12
        );
        let empty = FrechetSample::new(vec![]).unwrap();
        assert!(log_likelihood(&ind, &empty).is_err());
        assert!(FrechetSample::new(vec![(1.0, -2.0)]).is_err());
    }

    #[test]
    fn eta_parametrization_matches() {
        let c = pick(&[1.0, 0.8, 0.75, 0.8, 1.0]);
        let eta = c.to_angular();
        let data = FrechetSample::new(vec![(0.7, 1.3), (4.0, 0.4), (2.0, 2.0)]).unwrap();
        let via_beta = log_likelihood(&c, &data).unwrap();
        let via_eta = log_likelihood_eta(&eta, &data).unwrap();
        assert_abs_diff_eq!(via_beta, via_eta, epsilon = 1e-10);
    }

    /// Central finite-difference mixed partial of the CDF.
    fn density_fd_oracle(c: &PickandsCoefficients<f64>, y1: f64, y2: f64) -> f64 {
        let h1 = 1e-4 * y1;
        let h2 = 1e-4 * y2;
        let g = |a: f64, b: f64| max_stable_cdf(c, a, b).unwrap();
        (g(y1 + h1, y2 + h2) - g(y1 + h1, y2 - h2) - g(y1 - h1, y2 + h2) + g(y1 - h1, y2 - h2))
            / (4.0 * h1 * h2)
    }

    #[test]
    fn density_matches_finite_difference() {
        // asymmetric-logistic projection exercises the orientation of t
        let al = crate::models::DependenceModel::AsymmetricLogistic {
            alpha: 0.6,
            tau1: 0.3,
            tau2: 0.8,
        };
        let cases = [
            pick(&[1.0, 2.0 / 3.0, 2.0 / 3.0, 1.0]),
            pick(&[1.0, 0.8, 0.75, 0.8, 1.0]),
            PickandsCoefficients::project(|t| al.pickands(t).unwrap(), 6).unwrap(),
        ];
        for c in &cases {
            for &(y1, y2) in &[(1.0, 1.0), (0.5, 2.0), (3.0, 0.3), (10.0, 25.0)] {
                let want = density_fd_oracle(c, y1, y2);
                let got = log_density(c, y1, y2).unwrap().exp();
                assert!(
                    (got - want).abs() / want.abs() < 1e-4,
                    "density mismatch at ({y1},{y2}): {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn palindromic_coefficients_give_exchangeable_density() {
        let c = pick(&[1.0, 0.8, 0.75, 0.8, 1.0]);
        for &(y1, y2) in &[(0.5, 2.0), (1.0, 7.0), (3.3, 0.2)] {
            let a = log_density(&c, y1, y2).unwrap();
            let b = log_density(&c, y2, y1).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn density_integrates_to_one() {
        // transform to the unit square via y = -1/ln(u), dy/du = y^2/u
        let b = 2.0 / 3.0;
        for c in [pick(&[1.0, 1.0, 1.0, 1.0]), pick(&[1.0, b, b, 1.0])] {
            let m = 400;
            let mut total = 0.0;
            for i in 0..m {
                let u1 = (i as f64 + 0.5) / m as f64;
                let y1 = -1.0 / u1.ln();
                for j in 0..m {
                    let u2 = (j as f64 + 0.5) / m as f64;
                    let y2 = -1.0 / u2.ln();
                    let g = log_density(&c, y1, y2).unwrap().exp();
                    total += g * y1 * y1 * y2 * y2 / (u1 * u2);
                }
            }
            total /= (m * m) as f64;
            assert!((total - 1.0).abs() < 0.01, "density mass {total}");
        }
    }
}
