//! Per-strategy mean SE: the direct link alone, or the best of the direct link
//! and a relay path through a random COW in range.
//!
//! The relay path SE is limited by the COW-AP hop under the Aggressive
//! strategy (spatially reused resources) and is the harmonic combination of
//! both hops under the Conservative strategy (orthogonal resources).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blockage::{
    cow_coverage_probability, cow_half_window, human_blockage_ue_cow, joint_blockage_cow_ap, joint_blockage_ue_ap,
    same_lane_zone_length,
};
use crate::link::{link_budget, mean_se_baseline, LinkBudget, LinkClass};
use crate::numerics::{Quadrature, QuadratureError};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PmfError {
    #[error("support and mass lengths differ ({0} vs {1})")]
    Length(usize, usize),
    #[error("masses must be nonnegative and sum to 1 (sum {0})")]
    Mass(f64),
    #[error("SE values must be finite and nonnegative")]
    Support,
}

/// Finite distribution of spectral-efficiency values.
#[derive(Debug, Clone, PartialEq)]
pub struct SeDistribution {
    support: Vec<f64>,
    mass: Vec<f64>,
}

impl SeDistribution {
    pub fn new(support: Vec<f64>, mass: Vec<f64>) -> Result<Self, PmfError> {
        if support.len() != mass.len() {
            return Err(PmfError::Length(support.len(), mass.len()));
        }
        if support.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(PmfError::Support);
        }
        let total: f64 = mass.iter().sum();
        if mass.iter().any(|m| !(*m >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(PmfError::Mass(total));
        }
        Ok(Self { support, mass })
    }

    pub fn degenerate(value: f64) -> Self {
        Self { support: vec![value], mass: vec![1.0] }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.mass.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(v, m)| v * m).sum()
    }
}

/// `E[max(X, Y)]` for independent `X ~ baseline`, `Y ~ relay`.
pub fn best_connection_mean(baseline: &SeDistribution, relay: &SeDistribution) -> f64 {
    let mut acc = 0.0;
    for (x, px) in baseline.iter() {
        for (y, py) in relay.iter() {
            acc += px * py * x.max(y);
        }
    }
    acc
}

/// `E[max(0, Y − X)]`, what the relay adds on top of the direct link.
pub fn relay_gain(baseline: &SeDistribution, relay: &SeDistribution) -> f64 {
    let mut acc = 0.0;
    for (x, px) in baseline.iter() {
        for (y, py) in relay.iter() {
            acc += px * py * (y - x).max(0.0);
        }
    }
    acc
}

/// Harmonic combination of two hops sharing time-frequency resources.
///
/// Clamped to the weaker hop so the bound also holds after rounding.
pub fn harmonic_se(a: f64, b: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        return 0.0;
    }
    (1.0 / (1.0 / a + 1.0 / b)).min(a).min(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Baseline,
    Conservative,
    Aggressive,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Baseline, Strategy::Conservative, Strategy::Aggressive];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Baseline => "baseline",
            Strategy::Conservative => "conservative",
            Strategy::Aggressive => "aggressive",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(Strategy::Baseline),
            "conservative" => Ok(Strategy::Conservative),
            "aggressive" => Ok(Strategy::Aggressive),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

/// Per-point quantities shared by every pmf at one `(x0, x_s)`.
#[derive(Debug, Clone, Copy)]
struct RelayPoint {
    direct: LinkBudget,
    p_direct: f64,
    access: LinkBudget,
    p_access: f64,
    backhaul: LinkBudget,
    p_backhaul: f64,
}

impl RelayPoint {
    fn new(s: &Scenario, x0: f64, x_s: f64) -> Self {
        let x1 = (x0 + x_s).abs();
        Self {
            direct: link_budget(&s.street, LinkClass::UeAp, x0),
            p_direct: joint_blockage_ue_ap(s, x0).p_joint,
            access: link_budget(&s.street, LinkClass::UeCow, x_s),
            p_access: human_blockage_ue_cow(s, x_s),
            backhaul: link_budget(&s.street, LinkClass::CowAp, x1),
            p_backhaul: joint_blockage_cow_ap(s, x1),
        }
    }

    fn baseline(&self) -> [(f64, f64); 2] {
        [(self.direct.se_los(), 1.0 - self.p_direct), (self.direct.se_nlos(), self.p_direct)]
    }

    fn access_states(&self) -> [(f64, f64); 2] {
        [(self.access.se_los(), 1.0 - self.p_access), (self.access.se_nlos(), self.p_access)]
    }

    fn backhaul_states(&self) -> [(f64, f64); 2] {
        [(self.backhaul.se_los(), 1.0 - self.p_backhaul), (self.backhaul.se_nlos(), self.p_backhaul)]
    }

    /// Relay gains `[conservative, aggressive]` with coverage `p_c`.
    ///
    /// Both sums run over the same (direct, access, backhaul) states with the
    /// same weights, and the conservative term never exceeds the aggressive
    /// one, so the ordering survives rounding.
    fn gains(&self, p_c: f64) -> [f64; 2] {
        let mut cons = 0.0;
        let mut agg = 0.0;
        for (x, px) in self.baseline() {
            for (a, pa) in self.access_states() {
                for (b, pb) in self.backhaul_states() {
                    let w = px * pa * pb;
                    cons += w * (harmonic_se(a, b) - x).max(0.0);
                    agg += w * (b - x).max(0.0);
                }
            }
        }
        [p_c * cons, p_c * agg]
    }
}

fn pmf_from(states: Vec<(f64, f64)>) -> SeDistribution {
    let (support, mass) = states.into_iter().unzip();
    SeDistribution { support, mass }
}

pub fn baseline_pmf(s: &Scenario, x0: f64) -> SeDistribution {
    let direct = link_budget(&s.street, LinkClass::UeAp, x0);
    let p = joint_blockage_ue_ap(s, x0).p_joint;
    pmf_from(vec![(direct.se_los(), 1.0 - p), (direct.se_nlos(), p)])
}

fn aggressive_from(point: &RelayPoint, p_c: f64) -> SeDistribution {
    let [(los, p_los), (nlos, p_nlos)] = point.backhaul_states();
    pmf_from(vec![(nlos, p_c * p_nlos), (los, p_c * p_los), (0.0, 1.0 - p_c)])
}

fn conservative_from(point: &RelayPoint, p_c: f64) -> SeDistribution {
    let mut states = Vec::with_capacity(5);
    for (a, pa) in point.access_states() {
        for (b, pb) in point.backhaul_states() {
            states.push((harmonic_se(a, b), p_c * pa * pb));
        }
    }
    states.push((0.0, 1.0 - p_c));
    pmf_from(states)
}

pub fn aggressive_relay_pmf(s: &Scenario, x0: f64, x_s: f64) -> SeDistribution {
    aggressive_from(&RelayPoint::new(s, x0, x_s), cow_coverage_probability(s))
}

pub fn conservative_relay_pmf(s: &Scenario, x0: f64, x_s: f64) -> SeDistribution {
    conservative_from(&RelayPoint::new(s, x0, x_s), cow_coverage_probability(s))
}

/// Expected Conservative relay-path SE written as the four blockage-state terms.
pub fn conservative_relay_mean_terms(s: &Scenario, x0: f64, x_s: f64) -> f64 {
    let pt = RelayPoint::new(s, x0, x_s);
    let (ps, pss) = (pt.p_access, pt.p_backhaul);
    let (sl, sn) = (pt.access.se_los(), pt.access.se_nlos());
    let (cl, cn) = (pt.backhaul.se_los(), pt.backhaul.se_nlos());
    cow_coverage_probability(s)
        * (ps * pss / (1.0 / sn + 1.0 / cn)
            + (1.0 - ps) * pss / (1.0 / sl + 1.0 / cn)
            + ps * (1.0 - pss) / (1.0 / sn + 1.0 / cl)
            + (1.0 - ps) * (1.0 - pss) / (1.0 / sl + 1.0 / cl))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyMeans {
    pub baseline: f64,
    pub conservative: f64,
    pub aggressive: f64,
}

impl StrategyMeans {
    pub fn get(&self, strategy: Strategy) -> f64 {
        match strategy {
            Strategy::Baseline => self.baseline,
            Strategy::Conservative => self.conservative,
            Strategy::Aggressive => self.aggressive,
        }
    }

    /// `strategy / baseline − 1`.
    pub fn relative_gain(&self, strategy: Strategy) -> f64 {
        self.get(strategy) / self.baseline - 1.0
    }
}

/// Tolerances of the nested relay integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayQuadrature {
    pub outer: Quadrature,
    pub inner: Quadrature,
}

impl Default for RelayQuadrature {
    fn default() -> Self {
        Self { outer: Quadrature::with_rel_tol(1e-5), inner: Quadrature::with_rel_tol(1e-6) }
    }
}

/// Mean SE of all three strategies for a UE uniform between two APs and a
/// serving COW uniform over the coverage window.
pub fn strategy_means(s: &Scenario) -> Result<StrategyMeans, QuadratureError> {
    strategy_means_with(s, RelayQuadrature::default())
}

pub fn strategy_means_with(s: &Scenario, q: RelayQuadrature) -> Result<StrategyMeans, QuadratureError> {
    let baseline = mean_se_baseline(s)?;
    let flat = StrategyMeans { baseline, conservative: baseline, aggressive: baseline };
    let Some(x_r) = cow_half_window(&s.street) else {
        return Ok(flat);
    };
    let p_c = cow_coverage_probability(s);
    if !(p_c > 0.0) {
        return Ok(flat);
    }
    let half = 0.5 * s.street.ap_spacing;
    // x1 where the same-lane blockage zone first exceeds half a car.
    let onset = {
        let unit = same_lane_zone_length(&s.street, 1.0);
        if unit > 0.0 {
            0.5 * s.street.car.length / unit
        } else {
            f64::INFINITY
        }
    };
    let [cons, agg] = q.outer.integrate_vec_try(
        |x0| {
            let breaks = [-x0, -x0 - onset, -x0 + onset];
            q.inner.integrate_vec(|x_s| RelayPoint::new(s, x0, x_s).gains(p_c), -x_r, x_r, &breaks)
        },
        0.0,
        half,
        &[],
    )?;
    let norm = s.street.ap_spacing * x_r;
    Ok(StrategyMeans { baseline, conservative: baseline + cons / norm, aggressive: baseline + agg / norm })
}

pub fn mean_se_strategy(s: &Scenario, strategy: Strategy) -> Result<f64, QuadratureError> {
    match strategy {
        Strategy::Baseline => mean_se_baseline(s),
        _ => strategy_means(s).map(|m| m.get(strategy)),
    }
}

/// Best-connection mean at one `(x0, x_s)` for `strategy`.
pub fn best_connection_at(s: &Scenario, strategy: Strategy, x0: f64, x_s: f64) -> f64 {
    let point = RelayPoint::new(s, x0, x_s);
    let base = pmf_from(point.baseline().to_vec());
    let p_c = cow_coverage_probability(s);
    match strategy {
        Strategy::Baseline => base.mean(),
        Strategy::Conservative => best_connection_mean(&base, &conservative_from(&point, p_c)),
        Strategy::Aggressive => best_connection_mean(&base, &aggressive_from(&point, p_c)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{density_to_pedestrian_gap, StochasticConfig, StreetConfig};
    use crate::link::{mean_se_cow_ap, mean_se_ue_ap};
    use approx::assert_relative_eq;

    fn scenario(rho_h: f64, p_relay: f64) -> Scenario {
        let traffic = StochasticConfig {
            pedestrian_gap: density_to_pedestrian_gap(rho_h, 3.0).unwrap(),
            p_relay,
            ..StochasticConfig::default()
        };
        Scenario::new(StreetConfig::default(), traffic)
    }

    #[test]
    fn hand_enumerated_max() {
        let x = SeDistribution::new(vec![2.0, 4.0], vec![0.5, 0.5]).unwrap();
        let y = SeDistribution::new(vec![0.0, 3.0], vec![0.5, 0.5]).unwrap();
        assert_relative_eq!(best_connection_mean(&x, &y), 3.25, max_relative = 1e-15);
        assert_relative_eq!(relay_gain(&x, &y), 0.25, max_relative = 1e-15);
        assert_eq!(best_connection_mean(&x, &SeDistribution::degenerate(0.0)), x.mean());
        assert_eq!(best_connection_mean(&x, &SeDistribution::degenerate(5.0)), 5.0);
    }

    #[test]
    fn pmf_validation() {
        assert!(SeDistribution::new(vec![1.0], vec![0.9]).is_err());
        assert!(SeDistribution::new(vec![-1.0], vec![1.0]).is_err());
        assert!(SeDistribution::new(vec![1.0, 2.0], vec![1.0]).is_err());
    }

    #[test]
    fn pmf_means_match_expectations() {
        let s = scenario(0.5, 0.3);
        let p_c = cow_coverage_probability(&s);
        for (x0, x_s) in [(0.0, 0.0), (40.0, -25.0), (100.0, 10.0), (150.0, 45.0)] {
            let b = baseline_pmf(&s, x0);
            assert!((b.mean() - mean_se_ue_ap(&s, x0)).abs() < 1e-12);
            assert!((b.mass().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let a = aggressive_relay_pmf(&s, x0, x_s);
            assert!((a.mean() - p_c * mean_se_cow_ap(&s, x0 + x_s)).abs() < 1e-12);
            let c = conservative_relay_pmf(&s, x0, x_s);
            assert_eq!(c.support().len(), 5);
            assert!((c.mean() - conservative_relay_mean_terms(&s, x0, x_s)).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonic_bound() {
        assert_relative_eq!(harmonic_se(6.0, 6.0), 3.0);
        for (a, b) in [(1.0, 3.0), (0.1, 17.0), (12.5, 12.5000001)] {
            assert!(harmonic_se(a, b) <= a.min(b));
        }
        assert_eq!(harmonic_se(0.0, 4.0), 0.0);
    }

    #[test]
    fn no_relays_means_baseline() {
        let s = scenario(0.5, 0.0);
        let m = strategy_means(&s).unwrap();
        assert_eq!(m.baseline, m.conservative);
        assert_eq!(m.baseline, m.aggressive);
        let a = aggressive_relay_pmf(&s, 50.0, 3.0);
        assert_eq!(a.mean(), 0.0);
    }

    #[test]
    fn gains_agree_with_best_connection() {
        let s = scenario(0.7, 0.4);
        let p_c = cow_coverage_probability(&s);
        for (x0, x_s) in [(10.0, 5.0), (90.0, -40.0), (149.0, 30.0)] {
            let pt = RelayPoint::new(&s, x0, x_s);
            let base = baseline_pmf(&s, x0).mean();
            let [gc, ga] = pt.gains(p_c);
            let c = best_connection_at(&s, Strategy::Conservative, x0, x_s);
            let a = best_connection_at(&s, Strategy::Aggressive, x0, x_s);
            assert!((base + gc - c).abs() < 1e-12);
            assert!((base + ga - a).abs() < 1e-12);
            assert!(gc <= ga && gc >= 0.0);
        }
    }

    #[test]
    fn strategy_ordering_and_names() {
        let m = strategy_means(&scenario(1.0, 0.5)).unwrap();
        assert!(m.aggressive >= m.conservative && m.conservative >= m.baseline);
        assert!(m.relative_gain(Strategy::Aggressive) > 0.0);
        for st in Strategy::ALL {
            assert_eq!(st.name().parse::<Strategy>().unwrap(), st);
        }
        assert!("relay".parse::<Strategy>().is_err());
    }
}
