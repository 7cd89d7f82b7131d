//! Pathloss, conditional SNRs and per-link mean spectral efficiency.

use thiserror::Error;

use crate::blockage::{human_blockage_ue_cow, joint_blockage_cow_ap, joint_blockage_ue_ap};
use crate::config::{LinkDirection, StreetConfig};
use crate::numerics::{Quadrature, QuadratureError};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("pathloss needs a positive distance, got {0} m")]
pub struct DistanceError(pub f64);

const LOS_EXPONENT: f64 = 21.0;
const NLOS_EXPONENT: f64 = 31.9;

/// Urban-micro pathloss in dB.
pub fn pathloss_db(d_3d: f64, carrier_ghz: f64, los: bool) -> Result<f64, DistanceError> {
    if !(d_3d > 0.0) {
        return Err(DistanceError(d_3d));
    }
    let exponent = if los { LOS_EXPONENT } else { NLOS_EXPONENT };
    Ok(32.4 + exponent * d_3d.log10() + 20.0 * carrier_ghz.log10())
}

/// Shannon spectral efficiency, bits/s/Hz.
pub fn spectral_efficiency(snr: f64) -> f64 {
    snr.ln_1p() / std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkClass {
    UeAp,
    UeCow,
    CowAp,
}

impl LinkClass {
    /// Lateral and vertical offsets between the two ends.
    pub fn offsets(self, st: &StreetConfig) -> (f64, f64) {
        match self {
            LinkClass::UeAp => (st.ue_ap_lateral(), st.ap_height - st.ue_height),
            LinkClass::UeCow => (st.ue_cow_lateral(), st.ue_height - st.cow_antenna_height),
            LinkClass::CowAp => (st.cow_ap_lateral(), st.ap_height - st.cow_antenna_height),
        }
    }

    /// Transmit power and summed antenna gains.
    pub fn budget_dbm(self, st: &StreetConfig) -> (f64, f64) {
        let power = match (st.link_direction, self) {
            (LinkDirection::Uplink, LinkClass::UeAp | LinkClass::UeCow) => st.power_ue_dbm,
            (LinkDirection::Uplink, LinkClass::CowAp) => st.power_cow_dbm,
            (LinkDirection::Downlink, LinkClass::UeAp | LinkClass::CowAp) => st.power_ap_dbm,
            (LinkDirection::Downlink, LinkClass::UeCow) => st.power_cow_dbm,
        };
        let gains = match self {
            LinkClass::UeAp => st.gain_ap_db + st.gain_ue_db,
            LinkClass::UeCow => st.gain_ue_db + st.gain_cow_db,
            LinkClass::CowAp => st.gain_cow_db + st.gain_ap_db,
        };
        (power, gains)
    }
}

/// Linear SNRs of one link with and without line of sight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub snr_los: f64,
    pub snr_nlos: f64,
    pub d_3d: f64,
    pub class: LinkClass,
}

impl LinkBudget {
    pub fn se_los(&self) -> f64 {
        spectral_efficiency(self.snr_los)
    }

    pub fn se_nlos(&self) -> f64 {
        spectral_efficiency(self.snr_nlos)
    }

    pub fn se(&self, los: bool) -> f64 {
        if los {
            self.se_los()
        } else {
            self.se_nlos()
        }
    }

    /// Expected SE when the link is blocked with probability `p_block`.
    pub fn mean_se(&self, p_block: f64) -> f64 {
        p_block * self.se_nlos() + (1.0 - p_block) * self.se_los()
    }
}

/// Budget of `class` with the two ends `longitudinal` meters apart along the street.
pub fn link_budget(st: &StreetConfig, class: LinkClass, longitudinal: f64) -> LinkBudget {
    let (lateral, vertical) = class.offsets(st);
    let d_3d = (longitudinal * longitudinal + lateral * lateral + vertical * vertical).sqrt();
    let (power, gains) = class.budget_dbm(st);
    let head = power + gains - st.noise_dbm() - 32.4 - 20.0 * st.carrier_ghz.log10();
    let lg = d_3d.log10();
    LinkBudget {
        snr_los: 10f64.powf((head - LOS_EXPONENT * lg) / 10.0),
        snr_nlos: 10f64.powf((head - NLOS_EXPONENT * lg) / 10.0),
        d_3d,
        class,
    }
}

pub fn mean_se_ue_ap(s: &Scenario, x0: f64) -> f64 {
    let b = link_budget(&s.street, LinkClass::UeAp, x0);
    b.mean_se(joint_blockage_ue_ap(s, x0).p_joint)
}

pub fn mean_se_ue_cow(s: &Scenario, x_s: f64) -> f64 {
    let b = link_budget(&s.street, LinkClass::UeCow, x_s);
    b.mean_se(human_blockage_ue_cow(s, x_s))
}

pub fn mean_se_cow_ap(s: &Scenario, x1: f64) -> f64 {
    let b = link_budget(&s.street, LinkClass::CowAp, x1);
    b.mean_se(joint_blockage_cow_ap(s, x1))
}

/// Spatial average of the direct-link SE over a UE uniform between APs.
pub fn mean_se_baseline(s: &Scenario) -> Result<f64, QuadratureError> {
    let half = 0.5 * s.street.ap_spacing;
    let total = Quadrature::with_rel_tol(1e-6).integrate(|x0| mean_se_ue_ap(s, x0), 0.0, half)?;
    Ok(total / half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{density_to_pedestrian_gap, StochasticConfig};
    use approx::assert_relative_eq;

    #[test]
    fn pathloss_examples() {
        assert_relative_eq!(pathloss_db(1.0, 1.0, true).unwrap(), 32.4);
        assert_relative_eq!(pathloss_db(1.0, 1.0, false).unwrap(), 32.4);
        let expected = 32.4 + 42.0 + 20.0 * 28f64.log10();
        assert_relative_eq!(pathloss_db(100.0, 28.0, true).unwrap(), expected, max_relative = 1e-14);
        assert_relative_eq!(expected, 103.34, epsilon = 5e-3);
        assert!(pathloss_db(0.0, 28.0, true).is_err());
        for d in [1.0, 2.0, 50.0, 400.0] {
            assert!(pathloss_db(d, 28.0, false).unwrap() >= pathloss_db(d, 28.0, true).unwrap());
        }
    }

    #[test]
    fn budget_distances() {
        let st = StreetConfig::default();
        let b = link_budget(&st, LinkClass::UeAp, 0.0);
        assert_relative_eq!(b.d_3d, (9.25f64.powi(2) + 8.5f64.powi(2)).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(b.d_3d, 12.56, epsilon = 5e-3);
        let c = link_budget(&st, LinkClass::UeCow, 0.0);
        assert_relative_eq!(c.d_3d, (16.0f64 + 0.01).sqrt(), max_relative = 1e-12);
        let r = link_budget(&st, LinkClass::CowAp, 0.0);
        assert_relative_eq!(r.d_3d, (5.25f64.powi(2) + 8.6f64.powi(2)).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn los_over_nlos_ratio_depends_on_distance_only() {
        let st = StreetConfig::default();
        for (class, x) in [(LinkClass::UeAp, 40.0), (LinkClass::UeCow, 7.0), (LinkClass::CowAp, 120.0)] {
            let b = link_budget(&st, class, x);
            assert_relative_eq!(b.snr_los / b.snr_nlos, b.d_3d.powf(1.09), max_relative = 1e-10);
            assert!(b.snr_los > b.snr_nlos && b.snr_nlos > 0.0);
            assert!(b.se_los() > b.se_nlos());
        }
    }

    #[test]
    fn snr_arithmetic() {
        let st = StreetConfig::default();
        let b = link_budget(&st, LinkClass::UeAp, 100.0);
        let noise = -174.0 + 90.0 + 7.0;
        let db = 23.0 + 27.0 + 15.0 - noise - pathloss_db(b.d_3d, 28.0, true).unwrap();
        assert_relative_eq!(10.0 * b.snr_los.log10(), db, max_relative = 1e-12);
    }

    #[test]
    fn downlink_swaps_powers() {
        let st = StreetConfig { link_direction: LinkDirection::Downlink, ..Default::default() };
        assert_eq!(LinkClass::UeAp.budget_dbm(&st).0, 33.0);
        assert_eq!(LinkClass::UeCow.budget_dbm(&st).0, 27.0);
        assert_eq!(LinkClass::CowAp.budget_dbm(&st).0, 33.0);
    }

    #[test]
    fn mean_se_endpoints_and_symmetry() {
        let b = link_budget(&StreetConfig::default(), LinkClass::UeAp, 30.0);
        assert_eq!(b.mean_se(0.0), b.se_los());
        assert_eq!(b.mean_se(1.0), b.se_nlos());
        let s = Scenario::default();
        assert_relative_eq!(mean_se_ue_cow(&s, 9.0), mean_se_ue_cow(&s, -9.0));
    }

    fn at_density(rho: f64) -> Scenario {
        let traffic = StochasticConfig {
            pedestrian_gap: density_to_pedestrian_gap(rho, 3.0).unwrap(),
            ..StochasticConfig::default()
        };
        Scenario::new(StreetConfig::default(), traffic)
    }

    #[test]
    fn baseline_average_is_bracketed() {
        let s = at_density(0.5);
        let e = mean_se_baseline(&s).unwrap();
        let hi = mean_se_ue_ap(&s, 0.0);
        let lo = mean_se_ue_ap(&s, 150.0);
        assert!(lo < e && e < hi);
        let mut prev = f64::INFINITY;
        for i in 0..=150 {
            let c = mean_se_ue_ap(&s, i as f64);
            assert!(c <= prev);
            prev = c;
        }
    }

    #[test]
    fn baseline_decreases_with_density() {
        let values: Vec<f64> =
            [0.1, 0.4, 0.7, 1.0].iter().map(|&r| mean_se_baseline(&at_density(r)).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    }
}
