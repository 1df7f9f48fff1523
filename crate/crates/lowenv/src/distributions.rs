//! One-dimensional probability distributions and parametric families.
//!
//! A [`Distribution`] exposes cdf, quantile (pseudo-inverse of the cdf) and,
//! where available, a density. A [`Family`] maps points of a bounded
//! parameter box to distributions and optionally carries the analytic
//! parameter-gradient of the density plus an envelope map used by the
//! consistency checks.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_74; // ln(sqrt(2*pi))

/// Bisection tolerance for quantiles of table-backed cdfs.
const BISECT_X_TOL: f64 = 1e-12;
/// Leftward snap for flat cdf segments: the pseudo-inverse is the infimum,
/// so a bisection result inside a flat segment is walked back to its left end.
const SNAP_STEP: f64 = 1e-9;
const SNAP_MAX_STEPS: usize = 64;

/// Membership ticket for the adversarial piecewise-constant density family:
/// a balanced binary sequence of length `2k`, encoding `k` unit-height
/// intervals of width `1/k` on `[0, 2]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryDensitySpec {
    pub k: usize,
    pub bits: Vec<u8>,
}

impl BinaryDensitySpec {
    pub fn new(k: usize, bits: Vec<u8>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidSpec("k must be positive".into()));
        }
        if bits.len() != 2 * k {
            return Err(Error::InvalidSpec(format!(
                "expected {} bits, got {}",
                2 * k,
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidSpec("bits must be 0 or 1".into()));
        }
        let ones: usize = bits.iter().map(|&b| b as usize).sum();
        if ones != k {
            return Err(Error::InvalidSpec(format!(
                "expected exactly {} ones, got {}",
                k, ones
            )));
        }
        Ok(Self { k, bits })
    }

    /// Cell `ell` (0-based) covers `[ell/k, (ell+1)/k]`.
    pub fn cell_bounds(&self, ell: usize) -> (f64, f64) {
        let k = self.k as f64;
        (ell as f64 / k, (ell + 1) as f64 / k)
    }
}

/// One-dimensional law. Immutable after construction; all operations pure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Uniform { a: f64, b: f64 },
    Normal { mu: f64, sigma: f64 },
    Binary(BinaryDensitySpec),
    /// Piecewise-linear cdf through the given knots; no density exposed.
    CdfTable { xs: Vec<f64>, ps: Vec<f64> },
}

impl Distribution {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidSpec(format!("bad uniform bounds [{a}, {b}]")));
        }
        Ok(Distribution::Uniform { a, b })
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        if !(mu.is_finite() && sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidSpec(format!("bad normal params ({mu}, {sigma})")));
        }
        Ok(Distribution::Normal { mu, sigma })
    }

    pub fn cdf_table(xs: Vec<f64>, ps: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ps.len() {
            return Err(Error::InvalidSpec("cdf table needs >= 2 matching knots".into()));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSpec("cdf table x-knots must increase".into()));
        }
        if ps.windows(2).any(|w| w[0] > w[1]) || ps[0] != 0.0 || *ps.last().unwrap() != 1.0 {
            return Err(Error::InvalidSpec(
                "cdf table values must be non-decreasing from 0 to 1".into(),
            ));
        }
        Ok(Distribution::CdfTable { xs, ps })
    }

    /// Support as a closed interval.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Distribution::Uniform { a, b } => (*a, *b),
            Distribution::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Distribution::Binary(_) => (0.0, 2.0),
            Distribution::CdfTable { xs, .. } => (xs[0], *xs.last().unwrap()),
        }
    }

    pub fn has_density(&self) -> bool {
        !matches!(self, Distribution::CdfTable { .. })
    }

    /// Re-applies the constructor checks; needed after deserialization,
    /// which bypasses the constructors.
    pub fn validate(&self) -> Result<()> {
        match self {
            Distribution::Uniform { a, b } => Distribution::uniform(*a, *b).map(drop),
            Distribution::Normal { mu, sigma } => Distribution::normal(*mu, *sigma).map(drop),
            Distribution::Binary(spec) => {
                BinaryDensitySpec::new(spec.k, spec.bits.clone()).map(drop)
            }
            Distribution::CdfTable { xs, ps } => {
                Distribution::cdf_table(xs.clone(), ps.clone()).map(drop)
            }
        }
    }
}

/// Cumulative distribution function `F(x) = P(X <= x)`.
pub fn cdf_eval(dist: &Distribution, x: f64) -> f64 {
    match dist {
        Distribution::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
        Distribution::Normal { mu, sigma } => normal_cdf(x, *mu, *sigma),
        Distribution::Binary(spec) => {
            if x <= 0.0 {
                return 0.0;
            }
            if x >= 2.0 {
                return 1.0;
            }
            let k = spec.k as f64;
            let mut mass = 0.0;
            for (ell, &bit) in spec.bits.iter().enumerate() {
                if bit == 0 {
                    continue;
                }
                let (left, right) = spec.cell_bounds(ell);
                if x >= right {
                    mass += 1.0 / k;
                } else if x > left {
                    mass += x - left;
                    break;
                } else {
                    break;
                }
            }
            mass.min(1.0)
        }
        Distribution::CdfTable { xs, ps } => {
            if x <= xs[0] {
                return ps[0];
            }
            if x >= *xs.last().unwrap() {
                return *ps.last().unwrap();
            }
            let i = xs.partition_point(|&knot| knot <= x) - 1;
            let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
            ps[i] + w * (ps[i + 1] - ps[i])
        }
    }
}

/// Quantile function `F†(u) = inf{ y : u <= F(y) }`, on the open interval
/// `(0,1)` only; endpoint arguments are rejected so downstream values stay
/// finite.
pub fn quantile(dist: &Distribution, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::QuantileArgOutOfRange(u));
    }
    match dist {
        Distribution::Uniform { a, b } => Ok(a + u * (b - a)),
        Distribution::Normal { mu, sigma } => Ok(normal_quantile(u, *mu, *sigma)),
        Distribution::Binary(spec) => {
            // The cdf rises with unit slope inside one-cells and is flat in
            // zero-cells; walking the cells gives the infimum exactly.
            let k = spec.k as f64;
            let mut cum = 0.0;
            for (ell, &bit) in spec.bits.iter().enumerate() {
                if bit == 0 {
                    continue;
                }
                let (left, _) = spec.cell_bounds(ell);
                let next = cum + 1.0 / k;
                if u <= next {
                    return Ok(left + (u - cum));
                }
                cum = next;
            }
            Ok(2.0)
        }
        Distribution::CdfTable { .. } => {
            let (lo, hi) = dist.support();
            Ok(bisect_quantile(dist, u, lo, hi))
        }
    }
}

/// Bisection on a monotone cdf, then a leftward scan that lands the result on
/// the left endpoint of any flat cdf segment.
fn bisect_quantile(dist: &Distribution, u: f64, mut lo: f64, mut hi: f64) -> f64 {
    debug_assert!(cdf_eval(dist, hi) >= u);
    if cdf_eval(dist, lo) >= u {
        return lo;
    }
    while hi - lo > BISECT_X_TOL {
        let mid = 0.5 * (lo + hi);
        if cdf_eval(dist, mid) >= u {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut y = hi;
    for _ in 0..SNAP_MAX_STEPS {
        let left = y - SNAP_STEP;
        if cdf_eval(dist, left) >= u {
            y = left;
        } else {
            break;
        }
    }
    y
}

/// Density `p(x)`; zero outside the support.
pub fn density_eval(dist: &Distribution, x: f64) -> Result<f64> {
    match dist {
        Distribution::Uniform { a, b } => {
            Ok(if x >= *a && x <= *b { 1.0 / (b - a) } else { 0.0 })
        }
        Distribution::Normal { mu, sigma } => {
            let z = (x - mu) / sigma;
            Ok((-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt()))
        }
        Distribution::Binary(spec) => {
            // Literal sum of closed-interval indicators: a sample sitting on a
            // shared cell boundary sees both neighbouring cells.
            let mut value = 0.0;
            for (ell, &bit) in spec.bits.iter().enumerate() {
                if bit == 0 {
                    continue;
                }
                let (left, right) = spec.cell_bounds(ell);
                if x >= left && x <= right {
                    value += 1.0;
                }
            }
            Ok(value)
        }
        Distribution::CdfTable { .. } => Err(Error::DensityUnavailable),
    }
}

/// Natural log of the density, `-inf` where the density vanishes.
pub fn log_density_eval(dist: &Distribution, x: f64) -> Result<f64> {
    match dist {
        Distribution::Normal { mu, sigma } => {
            let z = (x - mu) / sigma;
            Ok(-0.5 * z * z - sigma.ln() - LN_SQRT_2PI)
        }
        _ => {
            let p = density_eval(dist, x)?;
            Ok(p.ln())
        }
    }
}

/// Standard accurate normal cdf via the complementary error function.
/// `libm::erfc` is the fdlibm routine, accurate to a few ulps; the `statrs`
/// erfc loses ~5 digits near the center, which is why it is not used here.
pub fn normal_cdf(x: f64, mu: f64, sigma: f64) -> f64 {
    0.5 * libm::erfc(-(x - mu) / (sigma * SQRT_2))
}

pub fn normal_quantile(u: f64, mu: f64, sigma: f64) -> f64 {
    mu - sigma * SQRT_2 * erfc_inv(2.0 * u)
}

/// Norm choices on the parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    #[default]
    Euclidean,
    Max,
    Sum,
}

impl NormKind {
    pub fn norm(&self, v: &[f64]) -> f64 {
        match self {
            NormKind::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormKind::Max => v.iter().fold(0.0, |acc, x| acc.max(x.abs())),
            NormKind::Sum => v.iter().map(|x| x.abs()).sum(),
        }
    }

    pub fn distance(&self, s: &[f64], t: &[f64]) -> f64 {
        let diff: Vec<f64> = s.iter().zip(t).map(|(a, b)| a - b).collect();
        self.norm(&diff)
    }
}

/// Axis-aligned bounded parameter box `T` in `R^m` with a norm choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default)]
    pub norm: NormKind,
}

impl ParamBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, norm: NormKind) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidSpec("box bounds must match and be non-empty".into()));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidSpec(format!("bad box coordinate [{lo}, {hi}]")));
            }
        }
        Ok(Self { lower, upper, norm })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// `c = sup_{t in T} ||t||`, attained coordinatewise at the endpoint of
    /// larger magnitude for all three norm choices.
    pub fn sup_norm(&self) -> f64 {
        let corner: Vec<f64> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| lo.abs().max(hi.abs()))
            .collect();
        self.norm.norm(&corner)
    }

    pub fn contains(&self, t: &[f64]) -> bool {
        t.len() == self.dim()
            && t.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    /// The box inflated by the given fraction per side; realizes an open
    /// superset of the convex hull for the gradient-route checks.
    pub fn inflate(&self, fraction: f64) -> ParamBox {
        let lower = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| lo - fraction * (hi - lo))
            .collect();
        let upper = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi + fraction * (hi - lo))
            .collect();
        ParamBox {
            lower,
            upper,
            norm: self.norm,
        }
    }

    /// Uniform grid with `points_per_dim` points per coordinate (row-major,
    /// lexicographically ascending).
    pub fn grid(&self, points_per_dim: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| linspace(*lo, *hi, points_per_dim))
            .collect();
        let mut out = Vec::with_capacity(points_per_dim.pow(self.dim() as u32));
        let mut idx = vec![0usize; self.dim()];
        loop {
            out.push(idx.iter().enumerate().map(|(d, &i)| axes[d][i]).collect());
            let mut d = self.dim();
            loop {
                if d == 0 {
                    return out;
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < axes[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

type DistAt = Arc<dyn Fn(&[f64]) -> Distribution + Send + Sync>;
type DensityGradAt = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
type EnvelopeMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum FamilyKind {
    /// Continuously parametrized over the box.
    Parametric { dist_at: DistAt },
    /// Finitely many members, indexed by the nearest integer of a 1-d
    /// parameter over `[0, m-1]`.
    Finite { members: Vec<Distribution> },
    /// The countable adversarial family of balanced piecewise-constant
    /// densities; it has no bounded parameter box.
    CountableBinary,
}

/// A parametrized set of distributions `{P_t : t in T}`.
#[derive(Clone)]
pub struct Family {
    pub box_: Option<ParamBox>,
    pub kind: FamilyKind,
    pub density_grad_at: Option<DensityGradAt>,
    pub envelope: Option<EnvelopeMap>,
}

impl Family {
    pub fn parametric(
        box_: ParamBox,
        dist_at: impl Fn(&[f64]) -> Distribution + Send + Sync + 'static,
    ) -> Self {
        Family {
            box_: Some(box_),
            kind: FamilyKind::Parametric {
                dist_at: Arc::new(dist_at),
            },
            density_grad_at: None,
            envelope: None,
        }
    }

    pub fn finite(members: Vec<Distribution>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidSpec("finite family needs members".into()));
        }
        let m = members.len();
        let box_ = ParamBox::new(vec![0.0], vec![(m - 1) as f64], NormKind::Euclidean)?;
        Ok(Family {
            box_: Some(box_),
            kind: FamilyKind::Finite { members },
            density_grad_at: None,
            envelope: None,
        })
    }

    pub fn countable_binary() -> Self {
        Family {
            box_: None,
            kind: FamilyKind::CountableBinary,
            density_grad_at: None,
            envelope: None,
        }
    }

    /// Normal family over `(mu, sigma)` with the analytic parameter-gradient
    /// of the density attached.
    pub fn normal_box(mu_range: [f64; 2], sigma_range: [f64; 2]) -> Result<Self> {
        if sigma_range[0] <= 0.0 {
            return Err(Error::InvalidSpec("sigma lower bound must be positive".into()));
        }
        let box_ = ParamBox::new(
            vec![mu_range[0], sigma_range[0]],
            vec![mu_range[1], sigma_range[1]],
            NormKind::Euclidean,
        )?;
        let mut fam = Family::parametric(box_, |t| Distribution::Normal {
            mu: t[0],
            sigma: t[1],
        });
        fam.density_grad_at = Some(Arc::new(|x, t| normal_density_grad(x, t[0], t[1])));
        Ok(fam)
    }

    /// Normal family over `mu` with fixed `sigma`.
    pub fn normal_mean_box(mu_range: [f64; 2], sigma: f64) -> Result<Self> {
        if sigma <= 0.0 {
            return Err(Error::InvalidSpec("sigma must be positive".into()));
        }
        let box_ = ParamBox::new(vec![mu_range[0]], vec![mu_range[1]], NormKind::Euclidean)?;
        let mut fam =
            Family::parametric(box_, move |t| Distribution::Normal { mu: t[0], sigma });
        fam.density_grad_at = Some(Arc::new(move |x, t| {
            vec![normal_density_grad(x, t[0], sigma)[0]]
        }));
        Ok(fam)
    }

    pub fn dist_at(&self, t: &[f64]) -> Result<Distribution> {
        match &self.kind {
            FamilyKind::Parametric { dist_at } => Ok(dist_at(t)),
            FamilyKind::Finite { members } => {
                let idx = t[0].round() as usize;
                members
                    .get(idx)
                    .cloned()
                    .ok_or_else(|| Error::InvalidSpec(format!("finite index {idx} out of range")))
            }
            FamilyKind::CountableBinary => Err(Error::InvalidSpec(
                "the countable binary family has no parametric access".into(),
            )),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, FamilyKind::Finite { .. })
    }

    fn kind_name(&self) -> &'static str {
        match self.kind {
            FamilyKind::Parametric { .. } => "parametric",
            FamilyKind::Finite { .. } => "finite",
            FamilyKind::CountableBinary => "countable_binary",
        }
    }

    pub fn box_ref(&self) -> Result<&ParamBox> {
        self.box_.as_ref().ok_or(Error::NoParamBox)
    }
}

impl std::fmt::Debug for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Family")
            .field("kind", &self.kind_name())
            .field("box", &self.box_)
            .field("has_density_grad", &self.density_grad_at.is_some())
            .finish()
    }
}

/// Gradient of the normal density with respect to `(mu, sigma)`.
pub fn normal_density_grad(x: f64, mu: f64, sigma: f64) -> Vec<f64> {
    let z = (x - mu) / sigma;
    let p = (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    vec![z / sigma * p, (z * z - 1.0) / sigma * p]
}

/// Piecewise-constant density from a balanced binary sequence.
pub fn make_binary_density(spec: BinaryDensitySpec) -> Distribution {
    Distribution::Binary(spec)
}

/// Search for a family member whose density vanishes on all given samples:
/// the `2k` grid cells containing samples are zeroed (a sample sitting
/// exactly on a cell boundary conservatively marks both neighbours) and the
/// first `k` free cells are filled. `None` if fewer than `k` cells are free.
pub fn find_vanishing_bits(samples: &[f64], k: usize) -> Option<BinaryDensitySpec> {
    if k == 0 {
        return None;
    }
    let cells = 2 * k;
    let mut occupied = vec![false; cells];
    for &x in samples {
        if !(0.0..=2.0).contains(&x) {
            continue;
        }
        let pos = x * k as f64;
        let idx = (pos.floor() as usize).min(cells - 1);
        occupied[idx] = true;
        // A sample exactly on a cell boundary marks both adjacent cells.
        if pos.fract() == 0.0 && pos > 0.0 {
            let j = (pos as usize).min(cells - 1);
            occupied[j.saturating_sub(1)] = true;
        }
    }
    let free = occupied.iter().filter(|&&o| !o).count();
    if free < k {
        return None;
    }
    let mut bits = vec![0u8; cells];
    let mut remaining = k;
    for (cell, bit) in bits.iter_mut().enumerate() {
        if remaining == 0 {
            break;
        }
        if !occupied[cell] {
            *bit = 1;
            remaining -= 1;
        }
    }
    Some(BinaryDensitySpec { k, bits })
}

/// Number of distinct cells of the `2k`-cell grid on `[0,2]` hit by samples.
pub fn occupied_cell_count(samples: &[f64], k: usize) -> usize {
    let cells = 2 * k;
    let mut occupied = vec![false; cells];
    for &x in samples {
        if !(0.0..=2.0).contains(&x) {
            continue;
        }
        let idx = ((x * k as f64).floor() as usize).min(cells - 1);
        occupied[idx] = true;
    }
    occupied.iter().filter(|&&o| o).count()
}
