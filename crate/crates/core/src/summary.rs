//! Posterior summaries and predictive exceedance probabilities.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::margins::GevParams;
use crate::mcmc::KeptState;
use crate::models::{ise, DependenceModel};

/// Median and 90% credibility bounds of a scalar posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarSummary {
    pub median: f64,
    pub q05: f64,
    pub q95: f64,
}

/// Pointwise mean and 0.05/0.95 quantile bands of a function-valued
/// posterior on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionBand {
    pub mean: Vec<f64>,
    pub q05: Vec<f64>,
    pub q95: Vec<f64>,
}

/// Posterior summary of a chain: function bands for the Pickands function
/// and the angular density, the order posterior, and vertex-mass and
/// tail-coefficient summaries.
#[derive(Debug, Clone, Serialize)]
pub struct PosteriorSummary {
    pub grid: Vec<f64>,
    pub pickands: FunctionBand,
    pub angular_density: FunctionBand,
    pub k_posterior: BTreeMap<usize, f64>,
    pub p0: ScalarSummary,
    pub p1: ScalarSummary,
    pub chi: ScalarSummary,
}

/// `n` equispaced points spanning `[0, 1]`.
pub fn default_grid(n: usize) -> Vec<f64> {
    let m = n.max(2);
    (0..m).map(|i| i as f64 / (m - 1) as f64).collect()
}

/// Linear-interpolation quantile of a sorted sample.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

fn scalar_summary(values: &mut [f64]) -> ScalarSummary {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ScalarSummary {
        median: quantile_sorted(values, 0.5),
        q05: quantile_sorted(values, 0.05),
        q95: quantile_sorted(values, 0.95),
    }
}

fn band_from_columns(columns: Vec<Vec<f64>>) -> FunctionBand {
    let n = columns.first().map_or(0, Vec::len) as f64;
    let mut mean = Vec::with_capacity(columns.len());
    let mut q05 = Vec::with_capacity(columns.len());
    let mut q95 = Vec::with_capacity(columns.len());
    for mut col in columns {
        mean.push(col.iter().sum::<f64>() / n);
        col.sort_by(|a, b| a.partial_cmp(b).unwrap());
        q05.push(quantile_sorted(&col, 0.05));
        q95.push(quantile_sorted(&col, 0.95));
    }
    FunctionBand { mean, q05, q95 }
}

/// Pointwise posterior summaries over the grid. The angular density is
/// evaluated with its one-sided limits at the interval endpoints.
pub fn summarize(states: &[KeptState], grid: &[f64]) -> Result<PosteriorSummary> {
    if states.is_empty() {
        return Err(Error::EmptyChain);
    }
    if grid.len() < 2 || grid.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
        return Err(Error::domain("summary grid must hold points in [0, 1]"));
    }
    let n_grid = grid.len();
    let mut a_cols = vec![Vec::with_capacity(states.len()); n_grid];
    let mut h_cols = vec![Vec::with_capacity(states.len()); n_grid];
    let mut p0s = Vec::with_capacity(states.len());
    let mut p1s = Vec::with_capacity(states.len());
    let mut chis = Vec::with_capacity(states.len());
    let mut k_counts: BTreeMap<usize, usize> = BTreeMap::new();

    for state in states {
        let coeffs = state.coefficients()?;
        let beta = coeffs.to_pickands();
        let eval = beta.evaluator();
        for (j, &t) in grid.iter().enumerate() {
            a_cols[j].push(eval.a(t));
            h_cols[j].push(coeffs.density_limit(t));
        }
        p0s.push(coeffs.p0());
        p1s.push(coeffs.p1());
        chis.push(beta.chi());
        *k_counts.entry(state.k).or_insert(0) += 1;
    }

    let total = states.len() as f64;
    let k_posterior = k_counts.into_iter().map(|(k, c)| (k, c as f64 / total)).collect();

    Ok(PosteriorSummary {
        grid: grid.to_vec(),
        pickands: band_from_columns(a_cols),
        angular_density: band_from_columns(h_cols),
        k_posterior,
        p0: scalar_summary(&mut p0s),
        p1: scalar_summary(&mut p1s),
        chi: scalar_summary(&mut chis),
    })
}

/// Posterior predictive probability of a joint exceedance: the average of
/// the per-state closed-form rates `R(1/y1, 1/y2)`.
pub fn predictive_exceedance(states: &[KeptState], y1: f64, y2: f64) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::EmptyChain);
    }
    let mut total = 0.0;
    for state in states {
        total += state.coefficients()?.exceedance_prob(y1, y2)?;
    }
    Ok(total / states.len() as f64)
}

/// Conditional exceedance probability on the data scale.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConditionalExceedance {
    /// Thresholds mapped to the unit-Fréchet scale, one per margin.
    pub y_star: (f64, f64),
    /// Posterior predictive joint exceedance probability.
    pub joint: f64,
    /// Marginal exceedance probability of the conditioning coordinate.
    pub marginal: f64,
    /// `joint / marginal`, clamped to `[0, 1]`.
    pub conditional: f64,
}

/// Probability that the non-conditioning coordinate exceeds the data-scale
/// threshold `q` given that coordinate `condition_on` (1 or 2) does.
///
/// The threshold is pushed through each fitted margin, the joint predictive
/// probability comes from the chain, and the conditioning margin
/// contributes `1 - exp(-1/y*)`.
pub fn conditional_exceedance(
    states: &[KeptState],
    margins: (&GevParams<f64>, &GevParams<f64>),
    q: f64,
    condition_on: usize,
) -> Result<ConditionalExceedance> {
    if condition_on != 1 && condition_on != 2 {
        return Err(Error::domain("condition_on must be 1 or 2"));
    }
    let y1 = margins.0.to_unit_frechet(q)?;
    let y2 = margins.1.to_unit_frechet(q)?;
    let joint = predictive_exceedance(states, y1, y2)?;
    let y_cond = if condition_on == 1 { y1 } else { y2 };
    let marginal = -(-1.0 / y_cond).exp_m1();
    let conditional = if marginal > 0.0 { (joint / marginal).clamp(0.0, 1.0) } else { 0.0 };
    Ok(ConditionalExceedance { y_star: (y1, y2), joint, marginal, conditional })
}

/// Posterior mean and 0.05/0.95 quantiles of the per-state integrated
/// squared error against a reference model.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IseSummary {
    pub mean: f64,
    pub q05: f64,
    pub q95: f64,
}

/// Accuracy of a posterior sample: the integrated squared error of every
/// kept state against the true dependence function, summarized by its mean
/// and credibility bounds.
pub fn posterior_mean_ise(
    states: &[KeptState],
    model: &DependenceModel<f64>,
) -> Result<IseSummary> {
    if states.is_empty() {
        return Err(Error::EmptyChain);
    }
    let mut ises = Vec::with_capacity(states.len());
    for state in states {
        let beta = state.coefficients()?.to_pickands();
        let eval = beta.evaluator();
        ises.push(ise(|t| eval.a(t), model, 101)?);
    }
    let mean = ises.iter().sum::<f64>() / ises.len() as f64;
    ises.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(IseSummary {
        mean,
        q05: quantile_sorted(&ises, 0.05),
        q95: quantile_sorted(&ises, 0.95),
    })
}
