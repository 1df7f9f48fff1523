//! Desk-scale studies: the bias behaviour of the shared-sample and naive
//! estimators, the spring-supported beam reliability example, and the
//! adversarial family for which importance sampling silently fails.

pub mod beam;
pub mod bias;
pub mod no_consistency;

use crate::distributions::{density_eval, Distribution, Family};
use crate::estimator::compensated_sum;
use crate::quad::integrate;
use crate::{Error, Result};

/// Mean and standard error of the mean over replications.
pub fn mean_and_stderr(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = values.len() as f64;
    let mean = compensated_sum(values) / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = compensated_sum(&sq) / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Expectation `E^{P_t}(f)` by adaptive quadrature against the density
/// (normals truncated at 12 standard deviations).
pub fn quadrature_expectation(
    f: &(dyn Fn(f64) -> f64 + Sync),
    dist: &Distribution,
) -> Result<f64> {
    if !dist.has_density() {
        return Err(Error::DensityUnavailable);
    }
    let (lo, hi) = match dist {
        Distribution::Normal { mu, sigma } => (mu - 12.0 * sigma, mu + 12.0 * sigma),
        other => other.support(),
    };
    let (value, _) = integrate(&|x| f(x) * density_eval(dist, x).unwrap_or(0.0), lo, hi, 1e-10);
    Ok(value)
}

/// Envelope reference independent of the sampling path: the quadrature
/// expectation minimized over a dense parameter grid.
pub fn quadrature_envelope_oracle(
    f: &(dyn Fn(f64) -> f64 + Sync),
    family: &Family,
    grid_per_dim: usize,
) -> Result<(Vec<f64>, f64)> {
    let grid = family.box_ref()?.grid(grid_per_dim);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for t in grid {
        let v = quadrature_expectation(f, &family.dist_at(&t)?)?;
        if best.as_ref().map_or(true, |(_, bv)| v < *bv) {
            best = Some((t, v));
        }
    }
    best.ok_or(Error::AllObjectivesNan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_for_indicator_mean_family() {
        // min over mu in [-1, 1] of P(N(mu,1) > 0) is Phi(-1)
        let fam = Family::normal_mean_box([-1.0, 1.0], 1.0).unwrap();
        let f = |x: f64| if x > 0.0 { 1.0 } else { 0.0 };
        let (argmin, value) = quadrature_envelope_oracle(&f, &fam, 101).unwrap();
        assert_eq!(argmin, vec![-1.0]);
        assert!((value - crate::distributions::normal_cdf(-1.0, 0.0, 1.0)).abs() < 1e-6);
    }

    #[test]
    fn stderr_examples() {
        let (m, se) = mean_and_stderr(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((m, se), (1.0, 0.0));
        let (m, se) = mean_and_stderr(&[0.0, 2.0]).unwrap();
        assert_eq!(m, 1.0);
        // sample sd sqrt(2), se = sqrt(2)/sqrt(2) = 1
        assert!((se - 1.0).abs() < 1e-15);
        assert!(mean_and_stderr(&[]).is_err());
    }
}
