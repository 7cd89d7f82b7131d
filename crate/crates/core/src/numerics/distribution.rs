use rand::Rng;
use rand_distr::{Distribution as _, Exp};
use statrs::function::gamma::gamma_lr;

use crate::config::DistributionSpec;

/// A nonnegative random length with the functionals renewal arguments need.
///
/// `survival_integral(t)` is `∫₀ᵗ (1 − F(x)) dx`; it is the primitive because
/// the coverage probability is exactly that integral over the mean, and it
/// avoids the cancellation in `t − ∫₀ᵗ F`.
pub trait RenewalLaw {
    fn cdf(&self, x: f64) -> f64;
    fn mean(&self) -> f64;
    fn survival_integral(&self, t: f64) -> f64;

    /// `∫₀ᵗ F(x) dx`.
    fn partial_integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            t - self.survival_integral(t)
        }
    }
}

/// Probability that a stationary renewal process with inter-point law `law`
/// has at least one point in a fixed interval of length `t`.
pub fn renewal_coverage_probability<L: RenewalLaw + ?Sized>(law: &L, t: f64) -> f64 {
    if !(t > 0.0) {
        return 0.0;
    }
    let mean = law.mean();
    if !mean.is_finite() {
        return 0.0;
    }
    (law.survival_integral(t) / mean).clamp(0.0, 1.0)
}

/// Gap law built from a [`DistributionSpec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distribution {
    spec: DistributionSpec,
}

impl Distribution {
    pub fn new(spec: DistributionSpec) -> Self {
        Self { spec }
    }

    pub fn exponential(mean: f64) -> Self {
        Self::new(DistributionSpec::exponential(mean))
    }

    pub fn spec(&self) -> DistributionSpec {
        self.spec
    }

    /// The mean, if the family is exponential.
    pub fn exponential_mean(&self) -> Option<f64> {
        match self.spec {
            DistributionSpec::Exponential { mean } => Some(mean),
            _ => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.spec {
            DistributionSpec::Exponential { mean } => Exp::new(1.0 / mean).expect("positive rate").sample(rng),
            DistributionSpec::Deterministic { value } => value,
            DistributionSpec::Uniform { low, high } => rng.random_range(low..high),
        }
    }

    /// Distance from an arbitrary point to the next renewal of a stationary
    /// process with this inter-point law (the equilibrium residual).
    pub fn sample_residual<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.spec {
            DistributionSpec::Exponential { .. } => self.sample(rng),
            DistributionSpec::Deterministic { value } => rng.random::<f64>() * value,
            DistributionSpec::Uniform { low, high } => {
                // Length-biased draw, then a uniform split.
                let u: f64 = rng.random();
                let biased = (low * low + u * (high * high - low * low)).sqrt();
                rng.random::<f64>() * biased
            }
        }
    }
}

impl From<DistributionSpec> for Distribution {
    fn from(spec: DistributionSpec) -> Self {
        Self::new(spec)
    }
}

impl RenewalLaw for Distribution {
    fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self.spec {
            DistributionSpec::Exponential { mean } => -(-x / mean).exp_m1(),
            DistributionSpec::Deterministic { value } => {
                if x >= value {
                    1.0
                } else {
                    0.0
                }
            }
            DistributionSpec::Uniform { low, high } => ((x - low) / (high - low)).clamp(0.0, 1.0),
        }
    }

    fn mean(&self) -> f64 {
        self.spec.mean()
    }

    fn survival_integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.spec {
            DistributionSpec::Exponential { mean } => -mean * (-t / mean).exp_m1(),
            DistributionSpec::Deterministic { value } => t.min(value),
            DistributionSpec::Uniform { low, high } => {
                if t <= low {
                    t
                } else if t < high {
                    let w = high - low;
                    low + (t - low) - (t - low) * (t - low) / (2.0 * w)
                } else {
                    0.5 * (low + high)
                }
            }
        }
    }
}

/// CDF of the Erlang law with `shape` stages and rate `rate` at `y`.
pub fn erlang_cdf(shape: u32, rate: f64, y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        gamma_lr(shape as f64, rate * y)
    }
}

/// `∫₀ʸ P(shape, rate·u) du` in closed form.
pub fn erlang_cdf_integral(shape: u32, rate: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let n = shape as f64;
    let v = y * gamma_lr(n, rate * y) - n / rate * gamma_lr(n + 1.0, rate * y);
    v.max(0.0)
}

/// Empirical law of a fixed sample, with exact partial integrals.
#[derive(Debug, Clone)]
pub struct Ecdf {
    sorted: Vec<f64>,
    prefix: Vec<f64>,
}

impl Ecdf {
    pub fn new(mut samples: Vec<f64>) -> Self {
        assert!(!samples.is_empty(), "empirical law needs samples");
        samples.sort_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(samples.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for &s in &samples {
            acc += s;
            prefix.push(acc);
        }
        Self { sorted: samples, prefix }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    fn rank(&self, x: f64) -> usize {
        self.sorted.partition_point(|&s| s <= x)
    }
}

impl RenewalLaw for Ecdf {
    fn cdf(&self, x: f64) -> f64 {
        self.rank(x) as f64 / self.sorted.len() as f64
    }

    fn mean(&self) -> f64 {
        self.prefix[self.sorted.len()] / self.sorted.len() as f64
    }

    fn survival_integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        // ∫₀ᵗ F = Σ_{s ≤ t} (t − s) / n
        let k = self.rank(t);
        let n = self.sorted.len() as f64;
        t - (k as f64 * t - self.prefix[k]) / n
    }
}
