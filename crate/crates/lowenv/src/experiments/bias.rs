//! Empirical bias studies: the shared-sample estimator's bias is always
//! non-positive and shrinks monotonically with the sample size, while the
//! naive independent-samples estimator only gets worse as distributions are
//! added.

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{Distribution, Family};
use crate::estimator::{lower_envelope_estimate, naive_lower_envelope, SolverConfig};
use crate::experiments::mean_and_stderr;
use crate::sampling::{derive_seed, Backend};
use crate::Result;

/// Replication summary of the estimator across a grid of sample sizes.
#[derive(Debug, Clone, Serialize)]
pub struct BiasSweepResult {
    pub n_grid: Vec<usize>,
    pub replication_means: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub oracle_envelope: f64,
    /// True iff the means are non-decreasing in `n` within 3 combined
    /// standard errors and every mean is at most `oracle + 3 stderr`.
    pub monotone_ok: bool,
}

/// Inputs for one sweep; the oracle is supplied by the caller (closed form
/// or quadrature).
pub struct BiasSetup<'a> {
    pub f: &'a (dyn Fn(f64) -> f64 + Sync),
    pub family: &'a Family,
    pub central: &'a Distribution,
    pub backend: Backend,
    pub oracle_envelope: f64,
    pub solver: &'a SolverConfig,
}

pub fn bias_sweep(
    setup: &BiasSetup,
    n_grid: &[usize],
    replications: usize,
    seed: u64,
) -> Result<BiasSweepResult> {
    let mut means = Vec::with_capacity(n_grid.len());
    let mut stderrs = Vec::with_capacity(n_grid.len());
    for (i, &n) in n_grid.iter().enumerate() {
        let block_seed = derive_seed(seed, i as u64);
        // Indexed parallel replications: aggregation order is fixed by the
        // replication index, not the schedule.
        let estimates: Vec<Result<f64>> = (0..replications)
            .into_par_iter()
            .map(|rep| {
                let est = lower_envelope_estimate(
                    setup.f,
                    setup.family,
                    setup.central,
                    setup.backend,
                    n,
                    derive_seed(block_seed, rep as u64),
                    setup.solver,
                )?;
                Ok(est.value)
            })
            .collect();
        let values: Vec<f64> = estimates.into_iter().collect::<Result<_>>()?;
        let (mean, stderr) = mean_and_stderr(&values)?;
        means.push(mean);
        stderrs.push(stderr);
    }
    let monotone_ok = monotone_within_bands(&means, &stderrs, setup.oracle_envelope);
    Ok(BiasSweepResult {
        n_grid: n_grid.to_vec(),
        replication_means: means,
        stderrs,
        oracle_envelope: setup.oracle_envelope,
        monotone_ok,
    })
}

fn monotone_within_bands(means: &[f64], stderrs: &[f64], oracle: f64) -> bool {
    for i in 0..means.len() {
        if means[i] > oracle + 3.0 * stderrs[i] {
            return false;
        }
        if i + 1 < means.len() {
            let band = 3.0 * (stderrs[i] * stderrs[i] + stderrs[i + 1] * stderrs[i + 1]).sqrt();
            if means[i + 1] < means[i] - band {
                return false;
            }
        }
    }
    true
}

/// Naive-estimator companion: sweep over the number `m` of identical copies
/// of one distribution, each estimated from an independent sample.
#[derive(Debug, Clone, Serialize)]
pub struct NaiveSweepResult {
    pub m_list: Vec<usize>,
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// True iff the means do not increase with `m` within 3 combined
    /// standard errors.
    pub non_increasing: bool,
}

pub fn naive_identical_sweep(
    f: &(dyn Fn(f64) -> f64 + Sync),
    dist: &Distribution,
    m_list: &[usize],
    n_per_dist: usize,
    replications: usize,
    seed: u64,
) -> Result<NaiveSweepResult> {
    let mut means = Vec::with_capacity(m_list.len());
    let mut stderrs = Vec::with_capacity(m_list.len());
    for (i, &m) in m_list.iter().enumerate() {
        let block_seed = derive_seed(seed, i as u64);
        let family: Vec<Distribution> = vec![dist.clone(); m];
        let estimates: Vec<Result<f64>> = (0..replications)
            .into_par_iter()
            .map(|rep| {
                naive_lower_envelope(f, &family, n_per_dist, derive_seed(block_seed, rep as u64))
            })
            .collect();
        let values: Vec<f64> = estimates.into_iter().collect::<Result<_>>()?;
        let (mean, stderr) = mean_and_stderr(&values)?;
        means.push(mean);
        stderrs.push(stderr);
    }
    let mut non_increasing = true;
    for i in 0..means.len().saturating_sub(1) {
        let band = 3.0 * (stderrs[i] * stderrs[i] + stderrs[i + 1] * stderrs[i + 1]).sqrt();
        if means[i + 1] > means[i] + band {
            non_increasing = false;
        }
    }
    Ok(NaiveSweepResult {
        m_list: m_list.to_vec(),
        means,
        stderrs,
        non_increasing,
    })
}

/// The standard indicator setup used in the acceptance battery: normal mean
/// family over `[-1, 1]` with unit scale, `f` the indicator of `x > 0`, and
/// the inverse transform backend (closed-form oracle `Phi(-1)`).
pub struct IndicatorSetup {
    pub family: Family,
    pub central: Distribution,
    pub oracle_envelope: f64,
    pub solver: SolverConfig,
}

pub fn indicator_mean_family_setup() -> Result<IndicatorSetup> {
    Ok(IndicatorSetup {
        family: Family::normal_mean_box([-1.0, 1.0], 1.0)?,
        central: Distribution::uniform(0.0, 1.0)?,
        oracle_envelope: crate::distributions::normal_cdf(-1.0, 0.0, 1.0),
        solver: SolverConfig {
            grid_points_per_dim: 21,
            refine: false,
            refine_iters: 0,
        },
    })
}

pub fn indicator_positive(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        0.0
    }
}
