//! Compound spacing laws of the vehicle chain.
//!
//! A lane is a renewal chain of (vehicle, gap) pairs. Each vehicle is a bus
//! with probability `p_bus`, otherwise a car, and each car is a COW with
//! probability `p_relay`. Two derived spacings matter:
//!
//! * `D_B`, the distance from the rear of one bus to the front of the next:
//!   `N·ℓ_C + Σ_{i=1}^{N+1} d_i` with `N ~ Geom(p_bus)` counted from zero.
//! * `L_R`, the center-to-center distance between consecutive COWs.
//!
//! With exponential gaps both are mixtures of shifted Erlang laws and every
//! functional is closed form. Other gap families use an empirical law of
//! [`FALLBACK_SAMPLES`] draws, built once on first use.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::distribution::{erlang_cdf, erlang_cdf_integral, Distribution, Ecdf, RenewalLaw};

/// Mixture terms are dropped once the remaining mass is below this.
pub const TAIL_MASS: f64 = 1e-15;
pub const FALLBACK_SAMPLES: usize = 1_000_000;
const FALLBACK_SEED: u64 = 0x5eed_d15c;

/// Distance between consecutive buses in one lane.
#[derive(Debug)]
pub struct BusGapDistribution {
    p_bus: f64,
    car_length: f64,
    gap: Distribution,
    empirical: OnceLock<Ecdf>,
}

impl Clone for BusGapDistribution {
    fn clone(&self) -> Self {
        Self::new(self.p_bus, self.car_length, self.gap)
    }
}

impl BusGapDistribution {
    pub fn new(p_bus: f64, car_length: f64, gap: Distribution) -> Self {
        Self { p_bus, car_length, gap, empirical: OnceLock::new() }
    }

    pub fn p_bus(&self) -> f64 {
        self.p_bus
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut total = self.gap.sample(rng);
        while rng.random::<f64>() >= self.p_bus {
            total += self.car_length + self.gap.sample(rng);
        }
        total
    }

    fn empirical(&self) -> &Ecdf {
        self.empirical.get_or_init(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(FALLBACK_SEED);
            Ecdf::new((0..FALLBACK_SAMPLES).map(|_| self.sample(&mut rng)).collect())
        })
    }

    // Σ_k p(1−p)^k g(k+1, x − kℓ_C), skipping shifts beyond x.
    fn mixture(&self, x: f64, rate: f64, g: impl Fn(u32, f64, f64) -> f64) -> f64 {
        let p = self.p_bus;
        let mut weight = p;
        let mut tail = 1.0;
        let mut acc = 0.0;
        let mut k = 0u32;
        while tail > TAIL_MASS {
            let y = x - k as f64 * self.car_length;
            if y <= 0.0 {
                break;
            }
            acc += weight * g(k + 1, rate, y);
            weight *= 1.0 - p;
            tail *= 1.0 - p;
            k += 1;
        }
        acc
    }

    fn degenerate(&self) -> bool {
        !(self.p_bus > 0.0)
    }
}

impl RenewalLaw for BusGapDistribution {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 || self.degenerate() {
            return 0.0;
        }
        match self.gap.exponential_mean() {
            Some(m) => self.mixture(x, 1.0 / m, erlang_cdf).clamp(0.0, 1.0),
            None => self.empirical().cdf(x),
        }
    }

    fn mean(&self) -> f64 {
        if self.degenerate() {
            return f64::INFINITY;
        }
        (self.gap.mean() + self.car_length * (1.0 - self.p_bus)) / self.p_bus
    }

    fn survival_integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if self.degenerate() {
            return t;
        }
        match self.gap.exponential_mean() {
            Some(m) => (t - self.mixture(t, 1.0 / m, erlang_cdf_integral)).max(0.0),
            None => self.empirical().survival_integral(t),
        }
    }
}

/// Center-to-center distance between consecutive COWs in one lane.
///
/// Between two COWs sit `M ~ Geom(q)` other vehicles with
/// `q = (1 − p_bus)·p_relay`; each is a bus with probability
/// `p_bus / (1 − q)`. Then `L_R = ℓ_C + D_0 + Σ_{i=1}^M (len_i + D_i)`.
#[derive(Debug)]
pub struct CowSpacingDistribution {
    p_bus: f64,
    p_relay: f64,
    car_length: f64,
    bus_length: f64,
    gap: Distribution,
    empirical: OnceLock<Ecdf>,
}

impl Clone for CowSpacingDistribution {
    fn clone(&self) -> Self {
        Self::new(self.p_bus, self.p_relay, self.car_length, self.bus_length, self.gap)
    }
}

impl CowSpacingDistribution {
    pub fn new(p_bus: f64, p_relay: f64, car_length: f64, bus_length: f64, gap: Distribution) -> Self {
        Self { p_bus, p_relay, car_length, bus_length, gap, empirical: OnceLock::new() }
    }

    /// Probability that a given vehicle is a COW.
    pub fn cow_probability(&self) -> f64 {
        (1.0 - self.p_bus) * self.p_relay
    }

    fn degenerate(&self) -> bool {
        !(self.cow_probability() > 0.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let q = self.cow_probability();
        let bus_given_other = self.p_bus / (1.0 - q);
        let mut total = self.car_length + self.gap.sample(rng);
        while rng.random::<f64>() >= q {
            let len = if rng.random::<f64>() < bus_given_other { self.bus_length } else { self.car_length };
            total += len + self.gap.sample(rng);
        }
        total
    }

    fn empirical(&self) -> &Ecdf {
        self.empirical.get_or_init(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(FALLBACK_SEED ^ 0xc0);
            Ecdf::new((0..FALLBACK_SAMPLES).map(|_| self.sample(&mut rng)).collect())
        })
    }

    // Σ_{m,k} q(1−q)^m C(m,k) bᵏ(1−b)^{m−k} g(m+1, x − s_{m,k}),
    // s_{m,k} = (m+1)ℓ_C + k(ℓ_T − ℓ_C).
    fn mixture(&self, x: f64, rate: f64, g: impl Fn(u32, f64, f64) -> f64) -> f64 {
        let q = self.cow_probability();
        let b = if q < 1.0 { (self.p_bus / (1.0 - q)).clamp(0.0, 1.0) } else { 0.0 };
        let extra = self.bus_length - self.car_length;
        let mut geo = q;
        let mut tail = 1.0;
        let mut acc = 0.0;
        let mut m = 0u32;
        while tail > TAIL_MASS {
            let base = x - (m as f64 + 1.0) * self.car_length;
            if base <= 0.0 && extra >= 0.0 {
                break;
            }
            let mut inner = 0.0;
            for (k, w) in binomial_pmf(m, b).into_iter().enumerate() {
                let y = base - k as f64 * extra;
                if w > 0.0 && y > 0.0 {
                    inner += w * g(m + 1, rate, y);
                }
            }
            acc += geo * inner;
            geo *= 1.0 - q;
            tail *= 1.0 - q;
            m += 1;
        }
        acc
    }
}

fn binomial_pmf(n: u32, p: f64) -> Vec<f64> {
    let n_us = n as usize;
    if p <= 0.0 {
        let mut v = vec![0.0; n_us + 1];
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        let mut v = vec![0.0; n_us + 1];
        v[n_us] = 1.0;
        return v;
    }
    let ratio = p / (1.0 - p);
    let mut out = Vec::with_capacity(n_us + 1);
    let mut w = (n as f64 * (1.0 - p).ln()).exp();
    for k in 0..=n {
        out.push(w);
        w *= (n - k) as f64 / (k as f64 + 1.0) * ratio;
    }
    out
}

impl RenewalLaw for CowSpacingDistribution {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 || self.degenerate() {
            return 0.0;
        }
        match self.gap.exponential_mean() {
            Some(m) => self.mixture(x, 1.0 / m, erlang_cdf).clamp(0.0, 1.0),
            None => self.empirical().cdf(x),
        }
    }

    fn mean(&self) -> f64 {
        let q = self.cow_probability();
        if !(q > 0.0) {
            return f64::INFINITY;
        }
        (self.car_length * (1.0 - self.p_bus) + self.gap.mean() + self.p_bus * self.bus_length)
            / (self.p_relay * (1.0 - self.p_bus))
    }

    fn survival_integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if self.degenerate() {
            return t;
        }
        match self.gap.exponential_mean() {
            Some(m) => (t - self.mixture(t, 1.0 / m, erlang_cdf_integral)).max(0.0),
            None => self.empirical().survival_integral(t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::DistributionSpec;
    use approx::assert_relative_eq;

    fn bus_gap(p: f64) -> BusGapDistribution {
        BusGapDistribution::new(p, 4.5, Distribution::exponential(20.0))
    }

    #[test]
    fn bus_gap_edge_cases() {
        assert_eq!(bus_gap(0.05).cdf(0.0), 0.0);
        let single = bus_gap(1.0);
        let gap = Distribution::exponential(20.0);
        for x in [1.0, 13.0, 70.0] {
            assert_relative_eq!(single.cdf(x), gap.cdf(x), max_relative = 1e-12);
        }
        assert_eq!(bus_gap(0.0).cdf(1e4), 0.0);
        assert!(bus_gap(0.0).mean().is_infinite());
    }

    #[test]
    fn bus_gap_mean_identity() {
        let bg = bus_gap(0.05);
        assert_relative_eq!(bg.mean(), (20.0 + 4.5 * 0.95) / 0.05, max_relative = 1e-12);
        // Mixture survival integral converges to the same mean.
        assert_relative_eq!(bg.survival_integral(2e4), bg.mean(), max_relative = 1e-6);
    }

    #[test]
    fn bus_gap_sampling_matches_mixture() {
        let bg = bus_gap(0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let mut s: Vec<f64> = (0..n).map(|_| bg.sample(&mut rng)).collect();
        s.sort_by(f64::total_cmp);
        let ks = s
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = bg.cdf(x);
                (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.005, "KS {ks}");
    }

    #[test]
    fn bus_gap_fallback_is_consistent() {
        let bg = BusGapDistribution::new(0.25, 4.5, Distribution::new(DistributionSpec::Deterministic { value: 10.0 }));
        // D_B = 10 + N(14.5) with N ~ Geom(0.25) from zero.
        assert_relative_eq!(bg.cdf(10.5), 0.25, epsilon = 3e-3);
        assert_relative_eq!(bg.cdf(25.0), 0.25 + 0.25 * 0.75, epsilon = 3e-3);
        assert_relative_eq!(bg.survival_integral(1e5), bg.mean(), max_relative = 5e-3);
    }

    fn spacing(p_relay: f64) -> CowSpacingDistribution {
        CowSpacingDistribution::new(0.05, p_relay, 4.5, 12.0, Distribution::exponential(20.125))
    }

    #[test]
    fn cow_spacing_mean_matches_closed_form() {
        let s = spacing(0.3);
        let expected = (4.5 * 0.95 + 20.125 + 0.05 * 12.0) / (0.3 * 0.95);
        assert_relative_eq!(s.mean(), expected, max_relative = 1e-12);
        assert_relative_eq!(s.survival_integral(1e4), expected, max_relative = 1e-6);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 400_000;
        let m: f64 = (0..n).map(|_| s.sample(&mut rng)).sum::<f64>() / n as f64;
        assert_relative_eq!(m, expected, max_relative = 0.01);
    }

    #[test]
    fn cow_spacing_cdf_matches_sampling() {
        let s = spacing(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| s.sample(&mut rng)).collect();
        for x in [10.0, 30.0, 60.0, 120.0] {
            let emp = draws.iter().filter(|&&d| d <= x).count() as f64 / n as f64;
            assert!((emp - s.cdf(x)).abs() < 5e-3, "x={x}: {emp} vs {}", s.cdf(x));
        }
    }

    #[test]
    fn cow_spacing_without_relays() {
        let s = spacing(0.0);
        assert!(s.mean().is_infinite());
        assert_eq!(s.cdf(1e3), 0.0);
    }

    #[test]
    fn binomial_sums_to_one() {
        for (n, p) in [(0, 0.3), (7, 0.05), (60, 0.5)] {
            let s: f64 = binomial_pmf(n, p).iter().sum();
            assert_relative_eq!(s, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn near_certain_coverage_keeps_its_tail() {
        // Reference from a 40-digit evaluation of E[(L_R - t)^+] / E[L_R].
        let law = CowSpacingDistribution::new(
            0.252_167_849_931_513_2,
            1.0,
            4.5,
            12.0,
            Distribution::exponential(3.463_331_393_921_605),
        );
        let p = crate::numerics::renewal_coverage_probability(&law, 257.999_603_482_322_9);
        assert!((p - 0.999_999_999_750_262_4).abs() < 1e-13, "{p:.17}");
    }
}
