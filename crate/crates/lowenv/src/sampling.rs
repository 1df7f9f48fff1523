//! Reproducible uniform sample streams, inverse-transform sample generation,
//! and importance-sampling weight/evaluation maps.

use rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::distributions::{density_eval, log_density_eval, quantile, Distribution, Family};
use crate::{Error, Result};

const TWO_53: f64 = 9_007_199_254_740_992.0; // 2^53

/// Deterministic stream of uniforms strictly inside (0,1), backed by a
/// counter-based ChaCha generator: the same `(seed, counter)` pair yields
/// bit-identical output on every platform.
pub struct SampleStream {
    seed: u64,
    counter: u64,
    rng: ChaCha8Rng,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        SampleStream {
            seed,
            counter: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Next uniform: top 53 bits of the raw word, mapped by `(i + 0.5)/2^53`
    /// so 0 and 1 are unreachable.
    pub fn next_uniform(&mut self) -> f64 {
        self.counter += 1;
        let mantissa = self.rng.next_u64() >> 11;
        (mantissa as f64 + 0.5) / TWO_53
    }

    pub fn take(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next_uniform()).collect()
    }
}

/// One splitmix64 scramble; used to derive disjoint per-replication seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replication `index` of a run seeded with `seed`; distinct indexes
/// get statistically disjoint streams.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(1)))
}

/// `n` uniforms in the open unit interval, a pure function of the seed.
pub fn draw_uniform_stream(seed: u64, n: usize) -> Vec<f64> {
    SampleStream::new(seed).take(n)
}

/// Elementwise quantile application: maps uniforms to samples with the
/// distribution's cdf.
pub fn inverse_transform_sample(dist: &Distribution, uniforms: &[f64]) -> Result<Vec<f64>> {
    uniforms.iter().map(|&u| quantile(dist, u)).collect()
}

/// Importance weight `p_t(x)/p(x)`, with the extension convention that the
/// weight is 0 where the central density vanishes. Normal/normal pairs are
/// computed in log space to avoid spurious overflow.
pub fn importance_weight(
    family: &Family,
    central: &Distribution,
    t: &[f64],
    x: f64,
) -> Result<f64> {
    let target = family.dist_at(t)?;
    weight_between(&target, central, x).map(|(w, _)| w)
}

/// Weight plus a support-violation flag (`p_t(x) > 0` while `p(x) = 0`).
fn weight_between(target: &Distribution, central: &Distribution, x: f64) -> Result<(f64, bool)> {
    if !central.has_density() || !target.has_density() {
        return Err(Error::DensityUnavailable);
    }
    if let (Distribution::Normal { .. }, Distribution::Normal { .. }) = (target, central) {
        let log_w = log_density_eval(target, x)? - log_density_eval(central, x)?;
        return Ok((log_w.exp(), false));
    }
    let p = density_eval(central, x)?;
    if p == 0.0 {
        let p_t = density_eval(target, x)?;
        return Ok((0.0, p_t > 0.0));
    }
    Ok((density_eval(target, x)? / p, false))
}

/// Evaluations `f_t(X_k)` for one parameter point over a shared sample.
#[derive(Debug, Clone, Serialize)]
pub struct WeightedEval {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    pub n: usize,
    /// Samples where the central density vanished while the target density
    /// did not (violates the support-superset assumption).
    pub support_violations: usize,
    /// Samples where the weight was set to 0 by the extension convention.
    pub zero_density_hits: usize,
}

/// Which construction turns central samples into per-parameter evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// `f_t = f ∘ F†_{P_t}` applied to uniform samples.
    InverseTransform,
    /// `f_t = f · p_t / p` applied to central samples.
    #[default]
    Importance,
}

/// Evaluates `f_t` on the shared sample. For the importance backend,
/// `samples` are draws from the central distribution; for the inverse
/// transform backend they are uniforms in (0,1).
pub fn evaluate_f_t(
    f: &(dyn Fn(f64) -> f64 + Sync),
    family: &Family,
    central: &Distribution,
    t: &[f64],
    samples: &[f64],
    backend: Backend,
) -> Result<WeightedEval> {
    let target = family.dist_at(t)?;
    let mut values = Vec::with_capacity(samples.len());
    let mut support_violations = 0;
    let mut zero_density_hits = 0;
    match backend {
        Backend::InverseTransform => {
            for &u in samples {
                values.push(f(quantile(&target, u)?));
            }
        }
        Backend::Importance => {
            for &x in samples {
                let (w, violated) = weight_between(&target, central, x)?;
                if violated {
                    support_violations += 1;
                }
                if w == 0.0 {
                    zero_density_hits += 1;
                }
                values.push(f(x) * w);
            }
        }
    }
    Ok(WeightedEval {
        t: t.to_vec(),
        n: values.len(),
        values,
        support_violations,
        zero_density_hits,
    })
}
