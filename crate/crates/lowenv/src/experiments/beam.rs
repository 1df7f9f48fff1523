//! Reliability of a beam bedded on a spring with imprecisely known spring
//! stiffness.
//!
//! The stiffness is modelled by a normal family over a `(mu, sigma)` box and
//! the quantity of interest is the upper failure probability
//! `sup_t P_t(g(X) <= 0) = 1 - inf_t E^{P_t}(1_{g > 0})`, estimated by
//! importance sampling from a single central normal distribution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consistency::{certify, CertifySetup, ConsistencyCertificate, GridSpec, Route};
use crate::distributions::{density_eval, Distribution, Family};
use crate::estimator::{lower_envelope_estimate, EnvelopeEstimate, SolverConfig};
use crate::quad::integrate;
use crate::sampling::Backend;
use crate::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Mechanical constants plus the parameter box and the central distribution.
///
/// The defaults are desk-scale: unit length, load and rigidity, yield moment
/// tuned so the oracle failure probability is a few percent, and a stiffness
/// box tight enough that the importance weights have finite variance under
/// the central distribution (`sigma_upper < sigma_central * sqrt(2)` is
/// required for that; wider boxes make the estimator useless in practice).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamParams {
    pub l: f64,
    pub q: f64,
    pub ei: f64,
    pub m_yield: f64,
    pub mu_lower: f64,
    pub mu_upper: f64,
    pub sigma_lower: f64,
    pub sigma_upper: f64,
    pub mu_central: f64,
    pub sigma_central: f64,
}

impl Default for BeamParams {
    fn default() -> Self {
        BeamParams {
            l: 1.0,
            q: 1.0,
            ei: 1.0,
            m_yield: 0.07,
            mu_lower: 44.0,
            mu_upper: 52.0,
            sigma_lower: 5.0,
            sigma_upper: 7.0,
            mu_central: 48.0,
            sigma_central: 6.0,
        }
    }
}

impl BeamParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("l", self.l),
            ("q", self.q),
            ("ei", self.ei),
            ("m_yield", self.m_yield),
            ("sigma_lower", self.sigma_lower),
            ("sigma_central", self.sigma_central),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidSpec(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.mu_lower <= self.mu_upper) {
            return Err(Error::InvalidSpec("mu_lower must be <= mu_upper".into()));
        }
        if !(self.sigma_lower <= self.sigma_upper) {
            return Err(Error::InvalidSpec("sigma_lower must be <= sigma_upper".into()));
        }
        Ok(())
    }

    pub fn family(&self) -> Result<Family> {
        self.validate()?;
        Family::normal_box(
            [self.mu_lower, self.mu_upper],
            [self.sigma_lower, self.sigma_upper],
        )
    }

    pub fn central(&self) -> Result<Distribution> {
        Distribution::normal(self.mu_central, self.sigma_central)
    }
}

/// Spring participation factor `c(x) = 5x / (384 EI/L^3 + 8x)`, in `[0, 5/8)`
/// for non-negative stiffness.
pub fn beam_c(x: f64, params: &BeamParams) -> f64 {
    5.0 * x / (384.0 * params.ei / params.l.powi(3) + 8.0 * x)
}

/// Limit state `g(x) = M_yield - (q L^2 / 4) max{(1-c)^2/2, c - 1/2}`;
/// failure occurs where `g(x) <= 0`.
pub fn beam_limit_state(x: f64, params: &BeamParams) -> f64 {
    let c = beam_c(x, params);
    let moment = ((1.0 - c) * (1.0 - c) / 2.0).max(c - 0.5);
    params.m_yield - params.q * params.l * params.l / 4.0 * moment
}

/// Maximal stiffness grid value scanned for survival-set boundaries.
fn scan_limit(params: &BeamParams) -> f64 {
    (params.mu_upper + 12.0 * params.sigma_upper).max(384.0 * params.ei / params.l.powi(3))
}

/// Intervals of `x >= 0` where `g(x) > 0`, found by a dense scan plus
/// bisection of each sign change; the last interval extends to infinity when
/// `g` stays positive at the scan limit.
pub fn survival_set(params: &BeamParams) -> Vec<(f64, f64)> {
    let x_max = scan_limit(params);
    let cells = 8192;
    let g = |x: f64| beam_limit_state(x, params);
    let mut intervals = Vec::new();
    let mut open: Option<f64> = if g(0.0) > 0.0 { Some(0.0) } else { None };
    let mut prev = 0.0;
    for i in 1..=cells {
        let x = x_max * i as f64 / cells as f64;
        let was_positive = open.is_some();
        let is_positive = g(x) > 0.0;
        if is_positive != was_positive {
            let boundary = bisect_sign_change(&g, prev, x);
            if let Some(start) = open.take() {
                intervals.push((start, boundary));
            } else {
                open = Some(boundary);
            }
        }
        prev = x;
    }
    if let Some(start) = open {
        intervals.push((start, f64::INFINITY));
    }
    intervals
}

fn bisect_sign_change(g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0) == (g(lo) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Quadrature reference for the envelope, independent of the sampling path.
#[derive(Debug, Clone, Serialize)]
pub struct BeamOracle {
    pub envelope: f64,
    pub argmin: Vec<f64>,
    pub upper_failure_prob: f64,
    pub failure_boundaries: Vec<(f64, f64)>,
}

/// Survival probability `P_t(g(X) > 0)` by adaptive quadrature of the
/// density over the survival set, truncated at 12 standard deviations.
pub fn survival_probability(
    dist: &Distribution,
    intervals: &[(f64, f64)],
) -> Result<f64> {
    let (mu, sigma) = match dist {
        Distribution::Normal { mu, sigma } => (*mu, *sigma),
        _ => return Err(Error::InvalidSpec("beam oracle expects a normal member".into())),
    };
    let window = (mu - 12.0 * sigma, mu + 12.0 * sigma);
    let mut total = 0.0;
    for &(a, b) in intervals {
        let lo = a.max(window.0);
        let hi = b.min(window.1);
        if hi <= lo {
            continue;
        }
        let (mass, _) = integrate(&|x| density_eval(dist, x).unwrap_or(0.0), lo, hi, 1e-10);
        total += mass;
    }
    Ok(total)
}

/// Minimizes the quadrature survival probability over a dense `(mu, sigma)`
/// grid (`grid_per_dim` points per coordinate; the default 101 is five times
/// the solver default).
pub fn beam_oracle(params: &BeamParams, grid_per_dim: usize) -> Result<BeamOracle> {
    params.validate()?;
    let family = params.family()?;
    let intervals = survival_set(params);
    let grid = family.box_ref()?.grid(grid_per_dim);
    let values: Vec<Result<f64>> = grid
        .par_iter()
        .map(|t| survival_probability(&family.dist_at(t)?, &intervals))
        .collect();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (t, value) in grid.iter().zip(values) {
        let v = value?;
        if best.as_ref().map_or(true, |(_, bv)| v < *bv) {
            best = Some((t.clone(), v));
        }
    }
    let (argmin, envelope) = best.ok_or(Error::AllObjectivesNan)?;
    Ok(BeamOracle {
        envelope,
        argmin,
        upper_failure_prob: 1.0 - envelope,
        failure_boundaries: intervals.clone(),
    })
}

/// Box constants feeding the closed-form envelope maps; kept separate from
/// [`BeamParams`] so the maps can be instantiated on an inflated box.
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeConsts {
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub mu_o: f64,
    pub sigma_o: f64,
}

impl EnvelopeConsts {
    pub fn from_params(params: &BeamParams) -> Self {
        EnvelopeConsts {
            mu_lo: params.mu_lower,
            mu_hi: params.mu_upper,
            sigma_lo: params.sigma_lower,
            sigma_hi: params.sigma_upper,
            mu_o: params.mu_central,
            sigma_o: params.sigma_central,
        }
    }

    /// Constants for the box inflated by `fraction` per side; the gradient
    /// hypothesis is checked on an open superset of the box, so the envelope
    /// must be built for that superset too.
    pub fn inflated(params: &BeamParams, fraction: f64) -> Self {
        let mu_pad = fraction * (params.mu_upper - params.mu_lower);
        let sigma_pad = fraction * (params.sigma_upper - params.sigma_lower);
        EnvelopeConsts {
            mu_lo: params.mu_lower - mu_pad,
            mu_hi: params.mu_upper + mu_pad,
            sigma_lo: params.sigma_lower - sigma_pad,
            sigma_hi: params.sigma_upper + sigma_pad,
            mu_o: params.mu_central,
            sigma_o: params.sigma_central,
        }
    }

    fn pieces(&self, x: f64) -> (f64, f64) {
        // Shared three-piece structure: a quadratic prefactor around the far
        // box edge and the worst-case exponent over the box.
        if x < self.mu_lo {
            let d = x - self.mu_hi;
            let near = x - self.mu_lo;
            (
                d * d / (self.sigma_lo * self.sigma_lo) + 1.0,
                -near * near / (2.0 * self.sigma_hi * self.sigma_hi),
            )
        } else if x < self.mu_hi {
            let d = self.mu_hi - self.mu_lo;
            (d * d / (self.sigma_lo * self.sigma_lo) + 1.0, 0.0)
        } else {
            let d = x - self.mu_lo;
            let near = x - self.mu_hi;
            (
                d * d / (self.sigma_lo * self.sigma_lo) + 1.0,
                -near * near / (2.0 * self.sigma_hi * self.sigma_hi),
            )
        }
    }
}

/// Envelope dominating the parameter-gradient of the weighted evaluation
/// maps `f_t = f * p_t / p_o`.
pub fn envelope_weighted(x: f64, c: &EnvelopeConsts) -> f64 {
    let (poly, exponent) = c.pieces(x);
    let zo = (x - c.mu_o) / c.sigma_o;
    c.sigma_o / (c.sigma_lo * c.sigma_lo) * poly * (0.5 * zo * zo + exponent).exp()
}

/// Envelope dominating the parameter-gradient of the densities `p_t`.
pub fn envelope_density(x: f64, c: &EnvelopeConsts) -> f64 {
    let (poly, exponent) = c.pieces(x);
    poly * exponent.exp() / (SQRT_2PI * c.sigma_lo * c.sigma_lo)
}

/// Closed-form bound on the integral of the pointwise supremum of the
/// family's densities: `(1/sigma_lo)(sigma_hi + (mu_hi - mu_lo)/sqrt(2 pi))`.
pub fn sup_density_closed_form(params: &BeamParams) -> f64 {
    (params.sigma_upper + (params.mu_upper - params.mu_lower) / SQRT_2PI) / params.sigma_lower
}

/// Importance weight of a box member against the central distribution, with
/// its analytic `(mu, sigma)` gradient.
fn weight(x: f64, t: &[f64], c: &EnvelopeConsts) -> f64 {
    let (mu, sigma) = (t[0], t[1]);
    let z = (x - mu) / sigma;
    let zo = (x - c.mu_o) / c.sigma_o;
    c.sigma_o / sigma * (-0.5 * z * z + 0.5 * zo * zo).exp()
}

fn weight_grad(x: f64, t: &[f64], c: &EnvelopeConsts) -> Vec<f64> {
    let (mu, sigma) = (t[0], t[1]);
    let w = weight(x, t, c);
    let d = x - mu;
    vec![
        w * d / (sigma * sigma),
        w * (d * d - sigma * sigma) / (sigma * sigma * sigma),
    ]
}

/// One full run: importance-backend envelope estimate of the survival
/// probability plus the requested consistency certificates.
#[derive(Debug, Clone, Serialize)]
pub struct BeamRunResult {
    /// `1 - envelope estimate`, clamped into `[0, 1]`.
    pub upper_failure_prob: f64,
    pub estimate: EnvelopeEstimate,
    pub certificates: Vec<ConsistencyCertificate>,
}

pub fn run_beam_example(
    params: &BeamParams,
    n: usize,
    seed: u64,
    solver: &SolverConfig,
    routes: &[Route],
) -> Result<BeamRunResult> {
    params.validate()?;
    let family = params.family()?;
    let central = params.central()?;
    let f = move |x: f64| {
        if beam_limit_state(x, params) > 0.0 {
            1.0
        } else {
            0.0
        }
    };
    let estimate =
        lower_envelope_estimate(&f, &family, &central, Backend::Importance, n, seed, solver)?;
    let mut certificates = Vec::with_capacity(routes.len());
    for &route in routes {
        certificates.push(certify_beam_route(params, route, &GridSpec::default())?);
    }
    Ok(BeamRunResult {
        upper_failure_prob: (1.0 - estimate.value).clamp(0.0, 1.0),
        estimate,
        certificates,
    })
}

/// Builds the route-specific setup for the beam family and runs the checks.
pub fn certify_beam_route(
    params: &BeamParams,
    route: Route,
    grid: &GridSpec,
) -> Result<ConsistencyCertificate> {
    params.validate()?;
    let family = params.family()?;
    let central = params.central()?;
    let consts = EnvelopeConsts::from_params(params);
    let inflated = EnvelopeConsts::inflated(params, grid.inflate_fraction);
    let p = params.clone();
    let f = move |x: f64| {
        if beam_limit_state(x, &p) > 0.0 {
            1.0
        } else {
            0.0
        }
    };

    match route {
        Route::GradientBox => {
            let map = |x: f64, t: &[f64]| f(x) * weight(x, t, &consts);
            let map_grad = |x: f64, t: &[f64]| {
                let g = weight_grad(x, t, &consts);
                g.into_iter().map(|v| f(x) * v).collect::<Vec<f64>>()
            };
            let envelope = |x: f64| envelope_weighted(x, &inflated);
            let mut setup = CertifySetup::new(&family, route);
            setup.grid = grid.clone();
            setup.central = Some(&central);
            setup.map = Some(&map);
            setup.map_grad = Some(&map_grad);
            setup.envelope = Some(&envelope);
            certify(&setup)
        }
        Route::IsGradientDensity => {
            let map = |x: f64, t: &[f64]| {
                density_eval(&Distribution::Normal { mu: t[0], sigma: t[1] }, x).unwrap_or(0.0)
            };
            let map_grad =
                |x: f64, t: &[f64]| crate::distributions::normal_density_grad(x, t[0], t[1]);
            let envelope = |x: f64| envelope_density(x, &inflated);
            let mut setup = CertifySetup::new(&family, route);
            setup.grid = grid.clone();
            setup.f = Some(&f);
            setup.map = Some(&map);
            setup.map_grad = Some(&map_grad);
            setup.envelope = Some(&envelope);
            certify(&setup)
        }
        Route::IsCompactBoundedF => {
            let mut setup = CertifySetup::new(&family, route);
            setup.grid = grid.clone();
            setup.f_bound = Some(1.0);
            setup.closed_form_sup_density_bound = Some(sup_density_closed_form(params));
            certify(&setup)
        }
        other => Err(Error::RouteInapplicable {
            route: other.name().into(),
            reason: "the beam example certifies gradient_box, is_gradient_density and \
                     is_compact_bounded_f only"
                .into(),
        }),
    }
}
