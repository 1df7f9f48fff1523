//! Lower-envelope estimators and the infimum solver over the parameter box.
//!
//! The shared-sample estimator draws one immutable sample from a single
//! central distribution and minimizes `t -> mean(f_t(samples))` over the box;
//! the naive estimator draws an independent sample per distribution and is
//! kept only to demonstrate its bias growth.

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{Distribution, Family, ParamBox};
use crate::sampling::{
    derive_seed, draw_uniform_stream, evaluate_f_t, inverse_transform_sample, Backend,
};
use crate::{Error, Result};

/// Arithmetic mean with Neumaier-compensated summation.
pub fn sample_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(compensated_sum(values) / values.len() as f64)
}

pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

/// Grid-then-refine solver settings.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub grid_points_per_dim: usize,
    pub refine: bool,
    pub refine_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid_points_per_dim: 21,
            refine: true,
            refine_iters: 3,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points_per_dim < 2 {
            return Err(Error::InvalidSpec("grid_points_per_dim must be >= 2".into()));
        }
        Ok(())
    }
}

/// Result of a lower-envelope estimation run.
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeEstimate {
    pub value: f64,
    pub argmin_t: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    /// Every `(t, objective)` pair the solver visited.
    pub solver_trace: Vec<(Vec<f64>, f64)>,
    pub support_violations: usize,
    pub nan_objectives: usize,
}

struct Minimum {
    t: Vec<f64>,
    value: f64,
    trace: Vec<(Vec<f64>, f64)>,
    nan_count: usize,
}

/// Minimizes the objective over a dense grid, then optionally refines the
/// best point by coordinate-wise golden-section search within one grid cell.
/// Ties break toward the lexicographically smallest parameter; NaN objectives
/// are recorded and excluded.
pub fn minimize_over_box(
    objective: &(dyn Fn(&[f64]) -> f64 + Sync),
    box_: &ParamBox,
    solver: &SolverConfig,
) -> Result<(Vec<f64>, f64)> {
    solver.validate()?;
    let minimum = minimize_impl(objective, box_, solver)?;
    Ok((minimum.t, minimum.value))
}

fn minimize_impl(
    objective: &(dyn Fn(&[f64]) -> f64 + Sync),
    box_: &ParamBox,
    solver: &SolverConfig,
) -> Result<Minimum> {
    let grid = box_.grid(solver.grid_points_per_dim);
    // Parallel evaluation over a read-only grid; the reduction below is
    // sequential in grid order, so the result is schedule-independent.
    let values: Vec<f64> = grid.par_iter().map(|t| objective(t)).collect();

    let mut trace: Vec<(Vec<f64>, f64)> = Vec::with_capacity(grid.len());
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut nan_count = 0;
    for (t, &v) in grid.iter().zip(&values) {
        trace.push((t.clone(), v));
        if v.is_nan() {
            nan_count += 1;
            continue;
        }
        // Strict improvement only: grid order is lexicographic, so the first
        // of several equal minima (the lexicographically smallest t) wins.
        if best.as_ref().map_or(true, |(_, bv)| v < *bv) {
            best = Some((t.clone(), v));
        }
    }
    let (mut best_t, mut best_v) = best.ok_or(Error::AllObjectivesNan)?;

    if solver.refine {
        let step: Vec<f64> = box_
            .lower
            .iter()
            .zip(&box_.upper)
            .map(|(lo, hi)| (hi - lo) / (solver.grid_points_per_dim - 1) as f64)
            .collect();
        for _ in 0..solver.refine_iters {
            for d in 0..box_.dim() {
                let lo = (best_t[d] - step[d]).max(box_.lower[d]);
                let hi = (best_t[d] + step[d]).min(box_.upper[d]);
                if hi <= lo {
                    continue;
                }
                let line = |x: f64, t: &[f64]| {
                    let mut point = t.to_vec();
                    point[d] = x;
                    point
                };
                let (x, v, visited) =
                    golden_section(&|x| objective(&line(x, &best_t)), lo, hi);
                for (xv, vv) in visited {
                    trace.push((line(xv, &best_t), vv));
                }
                if v < best_v {
                    best_t = line(x, &best_t);
                    best_v = v;
                }
            }
        }
    }

    Ok(Minimum {
        t: best_t,
        value: best_v,
        trace,
        nan_count,
    })
}

/// Golden-section minimization on `[lo, hi]`; returns the best point, its
/// value, and all visited evaluations.
fn golden_section(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64, Vec<(f64, f64)>) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = lo;
    let mut b = hi;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut visited = vec![(c, fc), (d, fd)];
    for _ in 0..60 {
        if b - a < 1e-10 {
            break;
        }
        if fc.is_nan() || fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            visited.push((c, fc));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            visited.push((d, fd));
        }
    }
    let mut best = (f64::NAN, f64::INFINITY);
    for &(x, v) in &visited {
        if !v.is_nan() && (v < best.1 || (v == best.1 && x < best.0)) {
            best = (x, v);
        }
    }
    (best.0, best.1, visited)
}

/// The shared-sample lower-envelope estimate: one stream of `n` samples is
/// drawn from the central distribution (importance backend) or from the
/// uniform on (0,1) (inverse transform backend) and reused for every
/// parameter point during the minimization.
pub fn lower_envelope_estimate(
    f: &(dyn Fn(f64) -> f64 + Sync),
    family: &Family,
    central: &Distribution,
    backend: Backend,
    n: usize,
    seed: u64,
    solver: &SolverConfig,
) -> Result<EnvelopeEstimate> {
    let box_ = family.box_ref()?.clone();
    // Backend compatibility is checked once, on the box's lower corner.
    let probe = family.dist_at(&box_.lower)?;
    if backend == Backend::Importance && !(central.has_density() && probe.has_density()) {
        return Err(Error::DensityUnavailable);
    }

    let uniforms = draw_uniform_stream(seed, n);
    let samples = match backend {
        Backend::InverseTransform => uniforms,
        Backend::Importance => inverse_transform_sample(central, &uniforms)?,
    };

    let violations = std::sync::atomic::AtomicUsize::new(0);
    let objective = |t: &[f64]| -> f64 {
        match evaluate_f_t(f, family, central, t, &samples, backend) {
            Ok(ev) => {
                violations.fetch_add(ev.support_violations, std::sync::atomic::Ordering::Relaxed);
                sample_mean(&ev.values).unwrap_or(f64::NAN)
            }
            Err(_) => f64::NAN,
        }
    };

    let minimum = minimize_impl(&objective, &box_, solver)?;
    Ok(EnvelopeEstimate {
        value: minimum.value,
        argmin_t: minimum.t,
        n,
        seed,
        solver_trace: minimum.trace,
        support_violations: violations.load(std::sync::atomic::Ordering::Relaxed),
        nan_objectives: minimum.nan_count,
    })
}

/// Upper envelope via `-inf(-f)`.
pub fn upper_envelope_estimate(
    f: &(dyn Fn(f64) -> f64 + Sync),
    family: &Family,
    central: &Distribution,
    backend: Backend,
    n: usize,
    seed: u64,
    solver: &SolverConfig,
) -> Result<EnvelopeEstimate> {
    let negated = |x: f64| -f(x);
    let mut est = lower_envelope_estimate(&negated, family, central, backend, n, seed, solver)?;
    est.value = -est.value;
    for (_, v) in &mut est.solver_trace {
        *v = -*v;
    }
    Ok(est)
}

/// The naive estimator: an independent sample per distribution, minimum of
/// the independent sample means. Kept for the bias-growth demonstration.
pub fn naive_lower_envelope(
    f: &(dyn Fn(f64) -> f64 + Sync),
    finite_family: &[Distribution],
    n_per_dist: usize,
    seed: u64,
) -> Result<f64> {
    if finite_family.is_empty() {
        return Err(Error::InvalidSpec("naive estimator needs at least one member".into()));
    }
    let mut best = f64::INFINITY;
    for (i, dist) in finite_family.iter().enumerate() {
        let us = draw_uniform_stream(derive_seed(seed, i as u64), n_per_dist);
        let xs = inverse_transform_sample(dist, &us)?;
        let values: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let mean = sample_mean(&values)?;
        if mean < best {
            best = mean;
        }
    }
    Ok(best)
}
