//! Closed-form blockage probabilities of the UE-AP, UE-COW and COW-AP links.
//!
//! Longitudinal positions are distances from the AP along the street. The UE
//! walks on the inner path of its sidewalk, `3w_S/4` from the curb; COWs drive
//! in the lane next to that sidewalk; the AP hangs between the central lanes.

use crate::config::StreetConfig;
use crate::numerics::{renewal_coverage_probability, RenewalLaw};
use crate::scenario::Scenario;

/// Blockage-zone geometry of the UE-AP link for a UE `x0` meters from the AP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeApGeometry {
    pub x0: f64,
    /// Lateral UE-AP offset `w_H = 2w_L + 3w_S/4`.
    pub w_h: f64,
    pub d_2d: f64,
    /// Half-window on the UE's own path inside which a body center blocks.
    pub z: f64,
    /// Widest sidewalk for which the zone still reaches the other path.
    pub w_u: f64,
    /// Ground length of the blockage zone.
    pub zone_length: f64,
    /// Angle between the link's ground projection and the path, `z = r_P / sin α`.
    pub alpha: f64,
}

impl UeApGeometry {
    pub fn new(street: &StreetConfig, x0: f64) -> Self {
        let w_h = street.ue_ap_lateral();
        let k = 8.0 * street.lane_width + 3.0 * street.sidewalk_width;
        let z = street.body_radius * (k * k + 16.0 * x0 * x0).sqrt() / k;
        let d_2d = x0.hypot(w_h);
        let rise = (street.body_height - street.ue_height) / (street.ap_height - street.ue_height);
        Self {
            x0,
            w_h,
            d_2d,
            z,
            w_u: other_path_threshold(street),
            zone_length: street.body_radius + d_2d * rise,
            alpha: (w_h / d_2d).asin(),
        }
    }

    pub fn reaches_other_path(&self, street: &StreetConfig) -> bool {
        street.sidewalk_width <= self.w_u
    }
}

/// `2r_P + 2w_H(h_P − h_U)/(h_A − h_U)`.
pub fn other_path_threshold(street: &StreetConfig) -> f64 {
    let rise = (street.body_height - street.ue_height) / (street.ap_height - street.ue_height);
    2.0 * street.body_radius + 2.0 * street.ue_ap_lateral() * rise
}

/// Probability that a pedestrian on the UE's own path blocks the UE-AP link.
pub fn human_blockage_same_path(s: &Scenario, x0: f64) -> f64 {
    let g = UeApGeometry::new(&s.street, x0);
    s.pedestrian_gap().cdf(g.z)
}

/// Probability that a pedestrian on the other path of the sidewalk blocks.
pub fn human_blockage_other_path(s: &Scenario, x0: f64) -> f64 {
    let g = UeApGeometry::new(&s.street, x0);
    if g.reaches_other_path(&s.street) {
        renewal_coverage_probability(s.pedestrian_gap(), 2.0 * g.z)
    } else {
        0.0
    }
}

pub fn human_blockage_ue_ap(s: &Scenario, x0: f64) -> f64 {
    let p1 = human_blockage_same_path(s, x0);
    let p2 = human_blockage_other_path(s, x0);
    p1 + (1.0 - p1) * p2
}

/// Lowest bus roof that cuts the UE-AP ray; independent of `x0`.
pub fn min_blocking_bus_height_ue_ap(street: &StreetConfig) -> f64 {
    let (wl, ws, wt) = (street.lane_width, street.sidewalk_width, street.bus.width);
    street.ue_height + (3.0 * ws + 2.0 * wl - 2.0 * wt) * (street.ap_height - street.ue_height) / (8.0 * wl + 3.0 * ws)
}

/// Fraction of the lane occupied by buses, seen through the bus-to-bus spacing.
fn bus_occupancy(s: &Scenario) -> f64 {
    let mean_gap = s.bus_gap().mean();
    if !mean_gap.is_finite() {
        return 0.0;
    }
    let lt = s.street.bus.length;
    lt / (lt + mean_gap)
}

pub fn vehicle_blockage_ue_ap(s: &Scenario) -> f64 {
    if s.street.bus.height < min_blocking_bus_height_ue_ap(&s.street) {
        0.0
    } else {
        bus_occupancy(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockageProfile {
    pub p_human: f64,
    pub p_vehicle: f64,
    pub p_joint: f64,
}

pub fn joint_blockage_ue_ap(s: &Scenario, x0: f64) -> BlockageProfile {
    let p_human = human_blockage_ue_ap(s, x0);
    let p_vehicle = vehicle_blockage_ue_ap(s);
    BlockageProfile { p_human, p_vehicle, p_joint: 1.0 - (1.0 - p_human) * (1.0 - p_vehicle) }
}

/// The joint UE-AP blockage written out as four cases over
/// (bus height vs `h*_T`) × (sidewalk width vs the other-path threshold).
pub fn joint_blockage_ue_ap_cases(s: &Scenario, x0: f64) -> f64 {
    let st = &s.street;
    let law = s.pedestrian_gap();
    let g = UeApGeometry::new(st, x0);
    let f = law.cdf(g.z);
    let narrow = g.reaches_other_path(st);
    let tall = st.bus.height >= min_blocking_bus_height_ue_ap(st);
    let p_t = s.traffic.p_bus;
    let (lc, lt, ed) = (st.car.length, st.bus.length, s.vehicle_gap().mean());
    let other = (1.0 - f) / law.mean() * (2.0 * g.z - law.partial_integral(2.0 * g.z));
    match (tall, narrow) {
        (false, true) => f + other,
        (false, false) => f,
        (true, true) => 1.0 - (lc - p_t * lc + ed) * (1.0 - f - other) / (p_t * lt + (1.0 - p_t) * lc + ed),
        (true, false) => 1.0 - (lc - p_t * lc + ed) * (1.0 - f) / (p_t * lt + (1.0 - p_t) * lc + ed),
    }
}

/// Longitudinal half-window `x_R` of COW positions that cover the UE.
pub fn cow_half_window(street: &StreetConfig) -> Option<f64> {
    let lateral = street.ue_cow_lateral();
    (street.cow_range > lateral).then(|| (street.cow_range.powi(2) - lateral * lateral).sqrt())
}

/// Probability that at least one COW is within range of the UE.
pub fn cow_coverage_probability(s: &Scenario) -> f64 {
    match cow_half_window(&s.street) {
        Some(x_r) => renewal_coverage_probability(s.cow_spacing(), 2.0 * x_r),
        None => 0.0,
    }
}

/// Human blockage of the UE-COW link for a COW `x_s` meters along the street.
pub fn human_blockage_ue_cow(s: &Scenario, x_s: f64) -> f64 {
    let st = &s.street;
    let k = 2.0 * st.lane_width + 3.0 * st.sidewalk_width;
    let z1 = st.body_radius * (k * k + 16.0 * x_s * x_s).sqrt() / k;
    let law = s.pedestrian_gap();
    let f = law.cdf(z1);
    f + (1.0 - f) * renewal_coverage_probability(law, 2.0 * z1)
}

/// Lowest roof of a central-lane bus that cuts the COW-AP ray.
pub fn min_blocking_bus_height_cow_ap(street: &StreetConfig) -> f64 {
    street.cow_antenna_height
        + (2.0 * street.lane_width - street.bus.width) * (street.ap_height - street.cow_antenna_height)
            / (3.0 * street.lane_width)
}

/// Same-lane zone length in front of a COW `x1` meters from the AP.
pub fn same_lane_zone_length(street: &StreetConfig, x1: f64) -> f64 {
    let vertical = (street.bus.height - street.cow_antenna_height) / (street.ap_height - street.cow_antenna_height);
    let horizontal = street.bus.width / (3.0 * street.lane_width);
    x1.abs() * vertical.min(horizontal)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CowApBlockage {
    pub neighbor_lane: f64,
    pub same_lane: f64,
    pub joint: f64,
}

pub fn cow_ap_blockage(s: &Scenario, x1: f64) -> CowApBlockage {
    let st = &s.street;
    let neighbor_lane = if st.bus.height < min_blocking_bus_height_cow_ap(st) { 0.0 } else { bus_occupancy(s) };
    let same_lane = s.bus_gap().cdf(same_lane_zone_length(st, x1) - 0.5 * st.car.length);
    CowApBlockage { neighbor_lane, same_lane, joint: 1.0 - (1.0 - neighbor_lane) * (1.0 - same_lane) }
}

pub fn joint_blockage_cow_ap(s: &Scenario, x1: f64) -> f64 {
    cow_ap_blockage(s, x1).joint
}

/// The COW-AP joint blockage written as the two bus-height cases.
pub fn joint_blockage_cow_ap_cases(s: &Scenario, x1: f64) -> f64 {
    let st = &s.street;
    let fdb = s.bus_gap().cdf(same_lane_zone_length(st, x1) - 0.5 * st.car.length);
    if st.bus.height < min_blocking_bus_height_cow_ap(st) {
        fdb
    } else {
        let p_t = s.traffic.p_bus;
        let lt = st.bus.length;
        let occ = p_t * lt / (p_t * lt + (1.0 - p_t) * st.car.length + s.vehicle_gap().mean());
        1.0 - (1.0 - occ) * (1.0 - fdb)
    }
}
