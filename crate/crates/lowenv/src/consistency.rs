//! Numerical verification of the hypotheses behind the consistency results,
//! plus covering/bracketing complexity bounds.
//!
//! The underlying theorems quantify over continua; the checks here certify
//! that a hypothesis holds on a configurable grid, which is the honest
//! computational statement. A [`ConsistencyCertificate`] is only issued when
//! every checked inequality holds (max violation <= 0).

use serde::{Deserialize, Serialize};

use crate::distributions::{density_eval, linspace, Distribution, Family, NormKind, ParamBox};
use crate::quad::integrate_real_line;
use crate::{Error, Result};

/// Relative-error tolerance for the analytic-gradient / finite-difference
/// cross-check.
pub const GRADIENT_FD_TOL: f64 = 1e-4;

/// Sufficient conditions that can back a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    /// Finite index set: consistency holds unconditionally.
    #[serde(rename = "finite_T")]
    FiniteT,
    /// Parameter-Lipschitz evaluation maps with an integrable envelope.
    #[serde(rename = "lipschitz_box")]
    LipschitzBox,
    /// Parameter-gradient of the evaluation maps dominated by an envelope.
    #[serde(rename = "gradient_box")]
    GradientBox,
    /// Compact box, jointly smooth evaluation maps, integrable supremum.
    #[serde(rename = "compact_smooth")]
    CompactSmooth,
    /// Importance-sampling variant of the Lipschitz route (density level).
    #[serde(rename = "is_lipschitz_density")]
    IsLipschitzDensity,
    /// Importance-sampling variant of the gradient route (density level).
    #[serde(rename = "is_gradient_density")]
    IsGradientDensity,
    /// Importance sampling with bounded integrand and integrable sup-density.
    #[serde(rename = "is_compact_bounded_f")]
    IsCompactBoundedF,
}

impl Route {
    pub fn name(&self) -> &'static str {
        match self {
            Route::FiniteT => "finite_T",
            Route::LipschitzBox => "lipschitz_box",
            Route::GradientBox => "gradient_box",
            Route::CompactSmooth => "compact_smooth",
            Route::IsLipschitzDensity => "is_lipschitz_density",
            Route::IsGradientDensity => "is_gradient_density",
            Route::IsCompactBoundedF => "is_compact_bounded_f",
        }
    }

    pub fn parse(s: &str) -> Result<Route> {
        match s {
            "finite_T" => Ok(Route::FiniteT),
            "lipschitz_box" => Ok(Route::LipschitzBox),
            "gradient_box" => Ok(Route::GradientBox),
            "compact_smooth" => Ok(Route::CompactSmooth),
            "is_lipschitz_density" => Ok(Route::IsLipschitzDensity),
            "is_gradient_density" => Ok(Route::IsGradientDensity),
            "is_compact_bounded_f" => Ok(Route::IsCompactBoundedF),
            other => Err(Error::Config(format!("unknown route '{other}'"))),
        }
    }
}

/// Grids used by the hypothesis checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub x_points: usize,
    /// Explicit x-range; when absent, callers derive a 6-sigma-padded range.
    pub x_range: Option<(f64, f64)>,
    pub t_points_per_dim: usize,
    /// Per-side inflation of the box used to realize an open superset of the
    /// convex hull for the gradient routes.
    pub inflate_fraction: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            x_points: 201,
            x_range: None,
            t_points_per_dim: 21,
            inflate_fraction: 0.01,
        }
    }
}

/// Sampled record of a bound as a function of the radius epsilon.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionRecord {
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
}

/// Outcome of a successful hypothesis verification.
#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyCertificate {
    pub theorem_applied: Route,
    /// `||F||_{P,1}` for the evaluation-level routes, or the weighted
    /// integral of the envelope for the density-level routes.
    pub envelope_norm: Option<f64>,
    pub covering_bound: Option<FunctionRecord>,
    /// Bracket sizes `2 eps ||F||` paired with the matching count bounds.
    pub bracket_sizes: Option<FunctionRecord>,
    pub bracketing_bound: Option<FunctionRecord>,
    /// Largest observed residual of the checked inequality; a certificate is
    /// only issued when this is <= 0.
    pub max_violation: f64,
    pub sup_density_integral: Option<f64>,
    pub grid_spec: GridSpec,
}

const EPS_SAMPLES: [f64; 5] = [0.01, 0.05, 0.1, 0.5, 1.0];

/// Upper bound `(2 c sqrt(m) / eps)^m` on the covering number of a bounded
/// box, floored at 1 since at least one ball is always needed.
pub fn covering_number_bound(box_: &ParamBox, eps: f64) -> Result<f64> {
    if eps <= 0.0 {
        return Err(Error::InvalidSpec(format!("covering radius {eps} must be positive")));
    }
    let m = box_.dim() as f64;
    let c = box_.sup_norm();
    Ok(((2.0 * c * m.sqrt() / eps).powf(m)).max(1.0))
}

/// Transfers a parameter-space cover to a bracket count: maps covering
/// `N(eps, T, d)` into at most that many brackets of size `2 eps ||F||`.
pub fn bracketing_bound_from_lipschitz(
    covering_bound_at_eps: f64,
    eps: f64,
    f_norm: f64,
) -> (f64, f64) {
    (2.0 * eps * f_norm, covering_bound_at_eps)
}

/// Max over the grids of `|map(x,s) - map(x,t)| - ||s - t|| F(x)`; a
/// non-positive result means the Lipschitz hypothesis holds on the grid.
pub fn check_lipschitz_envelope(
    map: &(dyn Fn(f64, &[f64]) -> f64 + Sync),
    envelope: &(dyn Fn(f64) -> f64 + Sync),
    x_grid: &[f64],
    t_pairs: &[(Vec<f64>, Vec<f64>)],
    norm: NormKind,
) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for (s, t) in t_pairs {
        let dist = norm.distance(s, t);
        for &x in x_grid {
            let lhs = (map(x, s) - map(x, t)).abs();
            let residual = lhs - dist * envelope(x);
            if residual > worst {
                worst = residual;
            }
        }
    }
    worst
}

/// All unordered pairs of a parameter grid.
pub fn all_pairs(t_grid: &[Vec<f64>]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut pairs = Vec::with_capacity(t_grid.len() * (t_grid.len() - 1) / 2);
    for i in 0..t_grid.len() {
        for j in (i + 1)..t_grid.len() {
            pairs.push((t_grid[i].clone(), t_grid[j].clone()));
        }
    }
    pairs
}

/// Max over the grids of `||grad(x,t)|| - F(x)`, with the analytic gradient
/// cross-checked against central finite differences at every grid point.
pub fn check_gradient_envelope(
    grad: &(dyn Fn(f64, &[f64]) -> Vec<f64> + Sync),
    value: &(dyn Fn(f64, &[f64]) -> f64 + Sync),
    envelope: &(dyn Fn(f64) -> f64 + Sync),
    x_grid: &[f64],
    t_grid: &[Vec<f64>],
    norm: NormKind,
) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for t in t_grid {
        for &x in x_grid {
            let g = grad(x, t);
            let fd = finite_difference_gradient(value, x, t);
            let gn = NormKind::Euclidean.norm(&g);
            let fdn = NormKind::Euclidean.norm(&fd);
            let denom = gn.max(fdn);
            if denom > 1e-290 {
                let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
                let rel = NormKind::Euclidean.norm(&diff) / denom;
                if rel > GRADIENT_FD_TOL {
                    return Err(Error::GradientMismatch {
                        x,
                        t: t.clone(),
                        rel_err: rel,
                        tol: GRADIENT_FD_TOL,
                    });
                }
            }
            let residual = norm.norm(&g) - envelope(x);
            if residual > worst {
                worst = residual;
            }
        }
    }
    Ok(worst)
}

/// Central finite differences in the parameter, step `1e-6 * scale`.
pub fn finite_difference_gradient(
    value: &(dyn Fn(f64, &[f64]) -> f64 + Sync),
    x: f64,
    t: &[f64],
) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    for d in 0..t.len() {
        let h = 1e-6 * t[d].abs().max(1.0);
        let mut tp = t.to_vec();
        let mut tm = t.to_vec();
        tp[d] += h;
        tm[d] -= h;
        out.push((value(x, &tp) - value(x, &tm)) / (2.0 * h));
    }
    out
}

/// Numerically integrates `x -> max_{t in grid} p_t(x)` over the effective
/// support. Returns the integral and whether the adaptive tail contribution
/// settled.
pub fn check_sup_density_integrable(
    family: &Family,
    t_grid: &[Vec<f64>],
    center: f64,
    initial_half_width: f64,
) -> Result<(f64, bool)> {
    let dists: Vec<Distribution> = t_grid
        .iter()
        .map(|t| family.dist_at(t))
        .collect::<Result<_>>()?;
    if dists.iter().any(|d| !d.has_density()) {
        return Err(Error::DensityUnavailable);
    }
    let sup = |x: f64| {
        dists
            .iter()
            .map(|d| density_eval(d, x).unwrap_or(0.0))
            .fold(0.0, f64::max)
    };
    let (value, settled) = integrate_real_line(&sup, center, initial_half_width, 1e-8);
    Ok((value, settled))
}

/// Route-specific inputs for [`certify`]. The evaluation- and density-level
/// routes need the map being bounded, its parameter-gradient where
/// applicable, and the candidate envelope built for the *inflated* box.
pub struct CertifySetup<'a> {
    pub family: &'a Family,
    pub central: Option<&'a Distribution>,
    pub route: Route,
    pub grid: GridSpec,
    /// Integrand `f` (used for the density-route envelope norms and the
    /// bounded-f route).
    pub f: Option<&'a (dyn Fn(f64) -> f64 + Sync)>,
    /// Evaluation map `(x, t) -> f_t(x)` or density map `(x, t) -> p_t(x)`,
    /// matching the route level.
    pub map: Option<&'a (dyn Fn(f64, &[f64]) -> f64 + Sync)>,
    /// Parameter-gradient of `map` for the gradient routes.
    pub map_grad: Option<&'a (dyn Fn(f64, &[f64]) -> Vec<f64> + Sync)>,
    /// Candidate envelope `F`.
    pub envelope: Option<&'a (dyn Fn(f64) -> f64 + Sync)>,
    /// A bound `M` with `|f| <= M` for the bounded-f route.
    pub f_bound: Option<f64>,
    /// Closed-form upper bound on the sup-density integral, when available;
    /// the quadrature result is asserted against it.
    pub closed_form_sup_density_bound: Option<f64>,
}

impl<'a> CertifySetup<'a> {
    pub fn new(family: &'a Family, route: Route) -> Self {
        CertifySetup {
            family,
            central: None,
            route,
            grid: GridSpec::default(),
            f: None,
            map: None,
            map_grad: None,
            envelope: None,
            f_bound: None,
            closed_form_sup_density_bound: None,
        }
    }
}

fn inapplicable(route: Route, reason: &str) -> Error {
    Error::RouteInapplicable {
        route: route.name().into(),
        reason: reason.into(),
    }
}

/// Runs the checks matching the route and issues a certificate iff they all
/// hold. The finite-T route certifies unconditionally.
pub fn certify(setup: &CertifySetup) -> Result<ConsistencyCertificate> {
    let route = setup.route;
    match route {
        Route::FiniteT => {
            if !setup.family.is_finite() {
                return Err(inapplicable(route, "the index set is not finite"));
            }
            Ok(ConsistencyCertificate {
                theorem_applied: route,
                envelope_norm: None,
                covering_bound: None,
                bracket_sizes: None,
                bracketing_bound: None,
                max_violation: 0.0,
                sup_density_integral: None,
                grid_spec: setup.grid.clone(),
            })
        }
        Route::LipschitzBox | Route::IsLipschitzDensity => {
            let box_ = setup
                .family
                .box_ref()
                .map_err(|_| inapplicable(route, "no bounded parameter box"))?;
            let map = setup
                .map
                .ok_or_else(|| inapplicable(route, "no evaluation map supplied"))?;
            let envelope = setup
                .envelope
                .ok_or_else(|| inapplicable(route, "no envelope supplied"))?;
            let x_grid = x_grid_for(setup, box_)?;
            let t_grid = box_.grid(setup.grid.t_points_per_dim);
            let pairs = all_pairs(&t_grid);
            let max_violation =
                check_lipschitz_envelope(map, envelope, &x_grid, &pairs, box_.norm);
            finish(setup, box_, max_violation, None)
        }
        Route::GradientBox | Route::IsGradientDensity => {
            let box_ = setup
                .family
                .box_ref()
                .map_err(|_| inapplicable(route, "no bounded parameter box"))?;
            let map = setup
                .map
                .ok_or_else(|| inapplicable(route, "no evaluation map supplied"))?;
            let grad = setup
                .map_grad
                .ok_or_else(|| inapplicable(route, "no parameter-gradient supplied"))?;
            let envelope = setup
                .envelope
                .ok_or_else(|| inapplicable(route, "no envelope supplied"))?;
            // The gradient hypothesis quantifies over an open superset of the
            // convex hull; check on the inflated box.
            let inflated = box_.inflate(setup.grid.inflate_fraction);
            let x_grid = x_grid_for(setup, box_)?;
            let t_grid = inflated.grid(setup.grid.t_points_per_dim);
            let max_violation =
                check_gradient_envelope(grad, map, envelope, &x_grid, &t_grid, box_.norm)?;
            finish(setup, box_, max_violation, None)
        }
        Route::CompactSmooth => {
            let box_ = setup
                .family
                .box_ref()
                .map_err(|_| inapplicable(route, "no bounded parameter box"))?;
            let map = setup
                .map
                .ok_or_else(|| inapplicable(route, "no evaluation map supplied"))?;
            let x_grid = x_grid_for(setup, box_)?;
            let t_grid = box_.grid(setup.grid.t_points_per_dim);
            let max_violation = joint_smoothness_probe(map, &x_grid, &t_grid);
            finish(setup, box_, max_violation, None)
        }
        Route::IsCompactBoundedF => {
            let box_ = setup
                .family
                .box_ref()
                .map_err(|_| inapplicable(route, "no bounded parameter box"))?;
            if setup.family.density_grad_at.is_none() {
                return Err(inapplicable(
                    route,
                    "densities are not continuously differentiable in the parameter",
                ));
            }
            if setup.f_bound.is_none() {
                return Err(inapplicable(route, "no bound on |f| supplied"));
            }
            let t_grid = box_.grid(setup.grid.t_points_per_dim);
            let center = 0.5 * (box_.lower[0] + box_.upper[0]);
            let half = effective_half_width(setup, box_);
            let (integral, settled) =
                check_sup_density_integrable(setup.family, &t_grid, center, half)?;
            let max_violation = if !settled {
                f64::INFINITY
            } else if let Some(bound) = setup.closed_form_sup_density_bound {
                integral - (bound + 1e-6)
            } else {
                -1.0
            };
            finish(setup, box_, max_violation, Some(integral))
        }
    }
}

fn effective_half_width(setup: &CertifySetup, box_: &ParamBox) -> f64 {
    if let Some((lo, hi)) = setup.grid.x_range {
        return 0.5 * (hi - lo).abs().max(1.0);
    }
    // Width heuristic from the box extent; the expanding integrator widens
    // further as needed.
    let extent: f64 = box_
        .lower
        .iter()
        .zip(&box_.upper)
        .map(|(lo, hi)| hi - lo)
        .sum();
    (box_.sup_norm() + 6.0 * extent).max(10.0)
}

fn x_grid_for(setup: &CertifySetup, box_: &ParamBox) -> Result<Vec<f64>> {
    let (lo, hi) = match setup.grid.x_range {
        Some(range) => range,
        None => {
            // 6-sigma-style padding from the family's own scale: evaluate the
            // member distributions on the box corners and pad their supports.
            let corners = [box_.lower.clone(), box_.upper.clone()];
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for corner in &corners {
                let d = setup.family.dist_at(corner)?;
                let (a, b) = d.support();
                if a.is_finite() {
                    lo = lo.min(a);
                    hi = hi.max(b);
                } else if let Distribution::Normal { mu, sigma } = d {
                    lo = lo.min(mu - 6.0 * sigma);
                    hi = hi.max(mu + 6.0 * sigma);
                }
            }
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidSpec("cannot derive an x-grid range".into()));
            }
            (lo, hi)
        }
    };
    Ok(linspace(lo, hi, setup.grid.x_points))
}

/// Two-scale slope probe: at a jump discontinuity the central finite
/// difference doubles when the step halves; for a C1 map the two slopes
/// agree. Residual is positive where slope growth exceeds the smooth budget.
fn joint_smoothness_probe(
    map: &(dyn Fn(f64, &[f64]) -> f64 + Sync),
    x_grid: &[f64],
    t_grid: &[Vec<f64>],
) -> f64 {
    let spacing = if x_grid.len() > 1 {
        x_grid[1] - x_grid[0]
    } else {
        1.0
    };
    let delta = spacing * 1e-3;
    let mut worst = f64::NEG_INFINITY;
    for t in t_grid {
        for &x in x_grid {
            let s1 = (map(x + delta, t) - map(x - delta, t)) / (2.0 * delta);
            let s2 = (map(x + 0.5 * delta, t) - map(x - 0.5 * delta, t)) / delta;
            let denom = s1.abs().max(1e-12);
            let residual = s2.abs() / denom - 1.5;
            if residual > worst {
                worst = residual;
            }
        }
    }
    worst
}

fn finish(
    setup: &CertifySetup,
    box_: &ParamBox,
    max_violation: f64,
    sup_density_integral: Option<f64>,
) -> Result<ConsistencyCertificate> {
    if !(max_violation <= 0.0) {
        return Err(Error::CertificationFailed {
            route: setup.route.name().into(),
            max_violation,
        });
    }
    let envelope_norm = envelope_norm(setup)?;
    let eps: Vec<f64> = EPS_SAMPLES.to_vec();
    let covering: Vec<f64> = eps
        .iter()
        .map(|&e| covering_number_bound(box_, e))
        .collect::<Result<_>>()?;
    let (sizes, counts) = match envelope_norm {
        Some(norm) => {
            let mut sizes = Vec::new();
            let mut counts = Vec::new();
            for (&e, &cov) in eps.iter().zip(&covering) {
                let (size, count) = bracketing_bound_from_lipschitz(cov, e, norm);
                sizes.push(size);
                counts.push(count);
            }
            (Some(sizes), Some(counts))
        }
        None => (None, None),
    };
    Ok(ConsistencyCertificate {
        theorem_applied: setup.route,
        envelope_norm,
        covering_bound: Some(FunctionRecord {
            eps: eps.clone(),
            values: covering,
        }),
        bracket_sizes: sizes.map(|values| FunctionRecord {
            eps: eps.clone(),
            values,
        }),
        bracketing_bound: counts.map(|values| FunctionRecord { eps, values }),
        max_violation,
        sup_density_integral,
        grid_spec: setup.grid.clone(),
    })
}

/// `||F||_{P,1}` against the central density for the evaluation-level
/// routes, or the `|f|`-weighted integral of `F` for the density-level
/// routes.
fn envelope_norm(setup: &CertifySetup) -> Result<Option<f64>> {
    let Some(envelope) = setup.envelope else {
        return Ok(None);
    };
    match setup.route {
        Route::LipschitzBox | Route::GradientBox => {
            let Some(central) = setup.central else {
                return Ok(None);
            };
            if !central.has_density() {
                return Ok(None);
            }
            let weighted =
                |x: f64| envelope(x) * density_eval(central, x).unwrap_or(0.0);
            let (lo, hi) = central.support();
            let (center, half) = if lo.is_finite() && hi.is_finite() {
                (0.5 * (lo + hi), 0.5 * (hi - lo))
            } else if let Distribution::Normal { mu, sigma } = central {
                (*mu, 8.0 * sigma)
            } else {
                (0.0, 10.0)
            };
            let (value, settled) = integrate_real_line(&weighted, center, half, 1e-8);
            if !settled {
                return Err(Error::Computation(
                    "envelope norm integral did not settle".into(),
                ));
            }
            Ok(Some(value))
        }
        Route::IsLipschitzDensity | Route::IsGradientDensity => {
            let Some(f) = setup.f else {
                return Ok(None);
            };
            let weighted = |x: f64| f(x).abs() * envelope(x);
            let box_ = setup.family.box_ref()?;
            let center = 0.5 * (box_.lower[0] + box_.upper[0]);
            let (value, settled) =
                integrate_real_line(&weighted, center, effective_half_width(setup, box_), 1e-8);
            if !settled {
                return Err(Error::Computation(
                    "weighted envelope integral did not settle".into(),
                ));
            }
            Ok(Some(value))
        }
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_binary_density, BinaryDensitySpec};
    use proptest::prelude::*;

    #[test]
    fn covering_examples() {
        let b = ParamBox::new(vec![0.0], vec![1.0], NormKind::Euclidean).unwrap();
        assert!((covering_number_bound(&b, 0.5).unwrap() - 4.0).abs() < 1e-12);
        let b2 = ParamBox::new(vec![0.0, 0.0], vec![1.0, 1.0], NormKind::Euclidean).unwrap();
        assert!((covering_number_bound(&b2, 0.1).unwrap() - 1600.0).abs() < 1e-9);
        // floors at one ball
        assert_eq!(covering_number_bound(&b, 1e9).unwrap(), 1.0);
        assert!(covering_number_bound(&b, 0.0).is_err());
    }

    #[test]
    fn bracketing_examples() {
        assert_eq!(bracketing_bound_from_lipschitz(4.0, 0.5, 1.0), (1.0, 4.0));
        assert_eq!(bracketing_bound_from_lipschitz(7.0, 0.5, 0.0), (0.0, 7.0));
        assert_eq!(
            bracketing_bound_from_lipschitz(1600.0, 0.1, 2.5),
            (0.5, 1600.0)
        );
    }

    #[test]
    fn lipschitz_check_trivial_and_failing() {
        let x_grid = linspace(-2.0, 2.0, 41);
        let pairs = vec![(vec![0.0], vec![1.0]), (vec![0.25], vec![0.75])];
        // constant in t: zero left side
        let v = check_lipschitz_envelope(
            &|_, _| 3.0,
            &|_| 0.0,
            &x_grid,
            &pairs,
            NormKind::Euclidean,
        );
        assert!(v <= 0.0);
        // f_t(x) = t*x with F = |x|/2 violates deliberately
        let v = check_lipschitz_envelope(
            &|x, t| t[0] * x,
            &|x: f64| x.abs() / 2.0,
            &x_grid,
            &pairs,
            NormKind::Euclidean,
        );
        assert!(v > 0.0);
        assert!((v - 1.0).abs() < 1e-12); // sup |x|/2 = 1 on this grid
    }

    #[test]
    fn gradient_check_constant_family() {
        let x_grid = linspace(-1.0, 1.0, 11);
        let t_grid = vec![vec![0.0], vec![0.5], vec![1.0]];
        let v = check_gradient_envelope(
            &|_, _| vec![0.0],
            &|_, _| 2.0,
            &|_| 0.0,
            &x_grid,
            &t_grid,
            NormKind::Euclidean,
        )
        .unwrap();
        assert!(v <= 0.0);
    }

    #[test]
    fn gradient_mismatch_detected() {
        let x_grid = vec![0.0];
        let t_grid = vec![vec![1.0]];
        let err = check_gradient_envelope(
            &|_, _| vec![5.0], // wrong analytic gradient for value t^2
            &|_, t| t[0] * t[0],
            &|_| 100.0,
            &x_grid,
            &t_grid,
            NormKind::Euclidean,
        );
        assert!(matches!(err, Err(Error::GradientMismatch { .. })));
    }

    #[test]
    fn singleton_family_sup_density_is_one() {
        let fam = Family::normal_box([0.0, 0.0], [1.0, 1.0]).unwrap();
        let t_grid = vec![vec![0.0, 1.0]];
        let (v, settled) = check_sup_density_integrable(&fam, &t_grid, 0.0, 8.0).unwrap();
        assert!(settled);
        assert!((v - 1.0).abs() < 1e-6);
    }

    #[test]
    fn finite_route_unconditional() {
        let fam = Family::finite(vec![
            Distribution::normal(0.0, 1.0).unwrap(),
            Distribution::normal(0.5, 1.0).unwrap(),
            Distribution::normal(1.0, 2.0).unwrap(),
        ])
        .unwrap();
        let cert = certify(&CertifySetup::new(&fam, Route::FiniteT)).unwrap();
        assert_eq!(cert.theorem_applied, Route::FiniteT);
        assert!(cert.max_violation <= 0.0);
    }

    #[test]
    fn countable_binary_family_never_certifies() {
        let fam = Family::countable_binary();
        for route in [
            Route::FiniteT,
            Route::LipschitzBox,
            Route::GradientBox,
            Route::CompactSmooth,
            Route::IsLipschitzDensity,
            Route::IsGradientDensity,
            Route::IsCompactBoundedF,
        ] {
            assert!(
                certify(&CertifySetup::new(&fam, route)).is_err(),
                "route {:?} unexpectedly certified",
                route
            );
        }
    }

    #[test]
    fn finite_binary_subfamily_certifies_by_finite_route_only() {
        let members: Vec<_> = [
            vec![1u8, 0],
            vec![0, 1],
        ]
        .into_iter()
        .map(|bits| make_binary_density(BinaryDensitySpec::new(1, bits).unwrap()))
        .collect();
        let fam = Family::finite(members).unwrap();
        assert!(certify(&CertifySetup::new(&fam, Route::FiniteT)).is_ok());
        assert!(certify(&CertifySetup::new(&fam, Route::IsCompactBoundedF)).is_err());
    }

    proptest! {
        #[test]
        fn covering_bound_monotonicity(
            c_scale in 0.1f64..10.0,
            eps1 in 0.01f64..5.0,
            eps2 in 0.01f64..5.0,
        ) {
            let b = ParamBox::new(vec![0.0, 0.0], vec![c_scale, c_scale], NormKind::Euclidean).unwrap();
            let (lo, hi) = if eps1 < eps2 { (eps1, eps2) } else { (eps2, eps1) };
            let at_lo = covering_number_bound(&b, lo).unwrap();
            let at_hi = covering_number_bound(&b, hi).unwrap();
            prop_assert!(at_lo >= at_hi);

            let bigger = ParamBox::new(
                vec![0.0, 0.0],
                vec![c_scale * 2.0, c_scale * 2.0],
                NormKind::Euclidean,
            ).unwrap();
            prop_assert!(
                covering_number_bound(&bigger, lo).unwrap() >= at_lo
            );
        }
    }
}
