//! Random street realizations.
//!
//! Every chain is sampled over a finite window only. Stationary chains start
//! in their equilibrium state at the window edge (length-biased vehicle or
//! residual gap), so no burn-in is needed; Palm chains grow outwards from a
//! tagged object (the UE on its path, or a tagged COW in the near lane).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Poisson};

use super::geometry::{Cylinder, GroundBox, Point3};
use super::{PedestrianPlacement, SimulationMode, VehicleLateral};
use crate::config::StreetConfig;
use crate::numerics::{Distribution, RenewalLaw};
use crate::scenario::Scenario;

pub const LANES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VehicleKind {
    Car,
    Bus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vehicle {
    pub body: GroundBox,
    pub kind: VehicleKind,
    pub is_cow: bool,
}

impl Vehicle {
    pub fn center_x(&self) -> f64 {
        0.5 * (self.body.x_lo + self.body.x_hi)
    }

    pub fn center_y(&self) -> f64 {
        0.5 * (self.body.y_lo + self.body.y_hi)
    }
}

/// One sampled street.
///
/// Lane 0 is the outer lane next to the UE sidewalk, lane 3 the far outer
/// lane. Lanes or paths outside the sampled window are simply empty.
#[derive(Debug, Clone, Default)]
pub struct DeploymentInstance {
    pub pedestrians: Vec<Cylinder>,
    pub lanes: [Vec<Vehicle>; LANES],
    pub ue: Option<Point3>,
    pub aps: Vec<Point3>,
    pub seed: u64,
}

impl DeploymentInstance {
    pub fn clear(&mut self) {
        self.pedestrians.clear();
        for lane in &mut self.lanes {
            lane.clear();
        }
        self.ue = None;
        self.aps.clear();
    }

    pub fn vehicles(&self) -> impl Iterator<Item = &Vehicle> {
        self.lanes.iter().flatten()
    }

    pub fn cows(&self) -> impl Iterator<Item = &Vehicle> {
        self.lanes.iter().flatten().filter(|v| v.is_cow)
    }
}

/// Lateral landmarks of the cross-section.
#[derive(Debug, Clone, Copy)]
pub struct CrossSection {
    pub lane_width: f64,
    pub curb: f64,
    pub sidewalk_width: f64,
}

impl CrossSection {
    pub fn new(st: &StreetConfig) -> Self {
        Self { lane_width: st.lane_width, curb: 2.0 * st.lane_width, sidewalk_width: st.sidewalk_width }
    }

    pub fn lane_center(&self, lane: usize) -> f64 {
        (1.5 - lane as f64) * self.lane_width
    }

    /// The UE's own path, three quarters of the sidewalk from the curb.
    pub fn ue_path(&self) -> f64 {
        self.curb + 0.75 * self.sidewalk_width
    }

    pub fn other_path(&self) -> f64 {
        self.curb + 0.25 * self.sidewalk_width
    }
}

/// Which chains to draw and over which longitudinal spans.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Plan {
    pub pedestrians: Option<(f64, f64)>,
    /// Longitudinal UE position when the UE is a point of its path process.
    pub ue_anchor: Option<f64>,
    pub lanes: [Option<(f64, f64)>; LANES],
    /// Center of a tagged COW in lane 0.
    pub cow_anchor: Option<f64>,
}

pub(crate) struct Sampler<'a> {
    pub scenario: &'a Scenario,
    pub mode: SimulationMode,
    cross: CrossSection,
}

impl<'a> Sampler<'a> {
    pub fn new(scenario: &'a Scenario, mode: SimulationMode) -> Self {
        Self { scenario, mode, cross: CrossSection::new(&scenario.street) }
    }

    pub fn cross(&self) -> CrossSection {
        self.cross
    }

    pub fn fill<R: Rng + ?Sized>(&self, plan: &Plan, out: &mut DeploymentInstance, rng: &mut R) {
        out.clear();
        let st = &self.scenario.street;
        if let Some((lo, hi)) = plan.pedestrians {
            match self.mode.pedestrian_placement {
                PedestrianPlacement::OnPaths => {
                    let law = self.scenario.pedestrian_gap();
                    let own = self.cross.ue_path();
                    match plan.ue_anchor {
                        Some(x) => palm_points(law, x, lo, hi, rng, |x| out.pedestrians.push(self.person(x, own))),
                        None => stationary_points(law, lo, hi, rng, |x| out.pedestrians.push(self.person(x, own))),
                    }
                    let other = self.cross.other_path();
                    stationary_points(law, lo, hi, rng, |x| out.pedestrians.push(self.person(x, other)));
                }
                PedestrianPlacement::UniformOnSidewalk => {
                    let law = self.scenario.pedestrian_gap();
                    // Two paths of 1/E[L] per meter each, spread over the sidewalk.
                    let rate = 2.0 / law.mean() * (hi - lo);
                    let n = if rate > 0.0 && rate.is_finite() {
                        Poisson::new(rate).expect("positive rate").sample(rng) as usize
                    } else {
                        0
                    };
                    for _ in 0..n {
                        let x = rng.random_range(lo..hi);
                        let y = self.cross.curb + rng.random::<f64>() * st.sidewalk_width;
                        out.pedestrians.push(self.person(x, y));
                    }
                }
            }
        }
        for lane in 0..LANES {
            let Some((lo, hi)) = plan.lanes[lane] else { continue };
            let target = &mut out.lanes[lane];
            match (lane, plan.cow_anchor) {
                (0, Some(x)) => self.palm_lane(lane, x, lo, hi, rng, target),
                _ => self.stationary_lane(lane, lo, hi, rng, target),
            }
        }
    }

    fn person(&self, x: f64, y: f64) -> Cylinder {
        let st = &self.scenario.street;
        Cylinder { x, y, radius: st.body_radius, height: st.body_height }
    }

    fn draw_kind<R: Rng + ?Sized>(&self, rng: &mut R) -> (VehicleKind, bool) {
        let t = &self.scenario.traffic;
        if rng.random::<f64>() < t.p_bus {
            (VehicleKind::Bus, false)
        } else {
            (VehicleKind::Car, rng.random::<f64>() < t.p_relay)
        }
    }

    fn vehicle<R: Rng + ?Sized>(
        &self,
        lane: usize,
        x_lo: f64,
        kind: VehicleKind,
        is_cow: bool,
        rng: &mut R,
    ) -> Vehicle {
        let st = &self.scenario.street;
        let dims = match kind {
            VehicleKind::Car => st.car,
            VehicleKind::Bus => st.bus,
        };
        let mut yc = self.cross.lane_center(lane);
        if self.mode.vehicle_lateral == VehicleLateral::Jittered {
            let slack = (st.lane_width - dims.width).max(0.0);
            yc += (rng.random::<f64>() - 0.5) * slack;
        }
        Vehicle {
            body: GroundBox {
                x_lo,
                x_hi: x_lo + dims.length,
                y_lo: yc - 0.5 * dims.width,
                y_hi: yc + 0.5 * dims.width,
                height: dims.height,
            },
            kind,
            is_cow,
        }
    }

    fn length(&self, kind: VehicleKind) -> f64 {
        match kind {
            VehicleKind::Car => self.scenario.street.car.length,
            VehicleKind::Bus => self.scenario.street.bus.length,
        }
    }

    /// Vehicles forward from `cursor` (a rear bumper position if
    /// `vehicle_next`, otherwise the end of a vehicle) up to `hi`.
    fn grow_forward<R: Rng + ?Sized>(
        &self,
        lane: usize,
        mut cursor: f64,
        mut vehicle_next: bool,
        hi: f64,
        rng: &mut R,
        out: &mut Vec<Vehicle>,
    ) {
        let gap = self.scenario.vehicle_gap();
        loop {
            if vehicle_next {
                if cursor > hi {
                    break;
                }
                let (kind, cow) = self.draw_kind(rng);
                let v = self.vehicle(lane, cursor, kind, cow, rng);
                cursor = v.body.x_hi;
                out.push(v);
            } else {
                cursor += gap.sample(rng);
            }
            vehicle_next = !vehicle_next;
        }
    }

    fn stationary_lane<R: Rng + ?Sized>(&self, lane: usize, lo: f64, hi: f64, rng: &mut R, out: &mut Vec<Vehicle>) {
        let st = &self.scenario.street;
        let t = &self.scenario.traffic;
        let gap = self.scenario.vehicle_gap();
        let bus_len = t.p_bus * st.bus.length;
        let mean_len = bus_len + (1.0 - t.p_bus) * st.car.length;
        let inside = mean_len / (mean_len + gap.mean());
        if rng.random::<f64>() < inside {
            // The window edge falls inside a length-biased vehicle.
            let (kind, cow) = if rng.random::<f64>() * mean_len < bus_len {
                (VehicleKind::Bus, false)
            } else {
                (VehicleKind::Car, rng.random::<f64>() < t.p_relay)
            };
            let start = lo - rng.random::<f64>() * self.length(kind);
            let v = self.vehicle(lane, start, kind, cow, rng);
            let end = v.body.x_hi;
            out.push(v);
            self.grow_forward(lane, end, false, hi, rng, out);
        } else {
            let first = lo + gap.sample_residual(rng);
            self.grow_forward(lane, first, true, hi, rng, out);
        }
    }

    fn palm_lane<R: Rng + ?Sized>(
        &self,
        lane: usize,
        center: f64,
        lo: f64,
        hi: f64,
        rng: &mut R,
        out: &mut Vec<Vehicle>,
    ) {
        let half = 0.5 * self.scenario.street.car.length;
        let tagged = self.vehicle(lane, center - half, VehicleKind::Car, true, rng);
        let (rear, front) = (tagged.body.x_lo, tagged.body.x_hi);
        out.push(tagged);
        self.grow_forward(lane, front, false, hi, rng, out);
        let gap = self.scenario.vehicle_gap();
        let mut cursor = rear;
        loop {
            cursor -= gap.sample(rng);
            if cursor < lo {
                break;
            }
            let (kind, cow) = self.draw_kind(rng);
            let len = self.length(kind);
            let v = self.vehicle(lane, cursor - len, kind, cow, rng);
            cursor = v.body.x_lo;
            out.push(v);
        }
    }
}

fn stationary_points<R: Rng + ?Sized>(law: &Distribution, lo: f64, hi: f64, rng: &mut R, mut push: impl FnMut(f64)) {
    let mut x = lo + law.sample_residual(rng);
    while x <= hi {
        push(x);
        x += law.sample(rng);
    }
}

fn palm_points<R: Rng + ?Sized>(
    law: &Distribution,
    anchor: f64,
    lo: f64,
    hi: f64,
    rng: &mut R,
    mut push: impl FnMut(f64),
) {
    let mut x = anchor - law.sample(rng);
    while x >= lo {
        push(x);
        x -= law.sample(rng);
    }
    let mut x = anchor + law.sample(rng);
    while x <= hi {
        push(x);
        x += law.sample(rng);
    }
}

/// Per-drop generator: the master seed picks the key, the drop index the stream.
pub(crate) fn drop_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Samples a full street section between the two APs around a UE at a
/// uniform position `x0 ∈ [0, d_I/2]`.
pub fn sample_deployment(s: &Scenario, mode: SimulationMode, seed: u64) -> DeploymentInstance {
    let mut rng = drop_rng(seed, 0);
    let st = &s.street;
    let half = 0.5 * st.ap_spacing;
    let x0 = rng.random::<f64>() * half;
    let span = (-half - st.bus.length, half + st.bus.length);
    let plan = Plan { pedestrians: Some(span), ue_anchor: Some(x0), lanes: [Some(span); LANES], cow_anchor: None };
    let sampler = Sampler::new(s, mode);
    let mut inst = DeploymentInstance { seed, ..Default::default() };
    sampler.fill(&plan, &mut inst, &mut rng);
    inst.seed = seed;
    inst.ue = Some(Point3::new(x0, sampler.cross().ue_path(), st.ue_height));
    inst.aps = vec![
        Point3::new(-st.ap_spacing, 0.0, st.ap_height),
        Point3::new(0.0, 0.0, st.ap_height),
        Point3::new(st.ap_spacing, 0.0, st.ap_height),
    ];
    inst
}
