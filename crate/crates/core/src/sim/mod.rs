//! Monte Carlo street simulator.
//!
//! Each drop samples a fresh street around the links under test and records
//! one value (a blockage indicator or a spectral efficiency). Two modes:
//!
//! * analytic-assumptions: pedestrians on the two walking paths, vehicles
//!   centered in their lanes, and the same 2-D footprint tests the closed-form
//!   model uses (blockage zone for bodies, facing face for vehicles), with
//!   the model's blocker set per link;
//! * relaxed: pedestrians uniform over the sidewalk, vehicles shifted at
//!   random within their lane, exact 3-D intersection against every body.
//!
//! Drop `i` draws from stream `i` of a ChaCha8 generator keyed by the master
//! seed, and drops are reduced in index order, so results do not depend on
//! the number of worker threads.

mod deploy;
mod geometry;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use deploy::{sample_deployment, CrossSection, DeploymentInstance, Vehicle, VehicleKind, LANES};
pub use geometry::{
    facing_face_hits_box, segment_hits_box, segment_hits_cylinder, zone_hits_cylinder, Cylinder, GroundBox, Point3,
};

use crate::blockage::{
    cow_coverage_probability, cow_half_window, human_blockage_ue_ap, human_blockage_ue_cow, joint_blockage_cow_ap,
    joint_blockage_ue_ap, vehicle_blockage_ue_ap, UeApGeometry,
};
use crate::link::{link_budget, mean_se_cow_ap, mean_se_ue_ap, mean_se_ue_cow, LinkClass};
use crate::numerics::QuadratureError;
use crate::scenario::Scenario;
use crate::strategy::{harmonic_se, mean_se_strategy, Strategy};
use deploy::{drop_rng, Plan, Sampler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PedestrianPlacement {
    OnPaths,
    UniformOnSidewalk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleLateral {
    Centered,
    Jittered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockingFaces {
    FacingOnly,
    AllFaces,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationMode {
    pub pedestrian_placement: PedestrianPlacement,
    pub vehicle_lateral: VehicleLateral,
    pub blocking_faces: BlockingFaces,
}

impl SimulationMode {
    pub const fn analytic() -> Self {
        Self {
            pedestrian_placement: PedestrianPlacement::OnPaths,
            vehicle_lateral: VehicleLateral::Centered,
            blocking_faces: BlockingFaces::FacingOnly,
        }
    }

    pub const fn relaxed() -> Self {
        Self {
            pedestrian_placement: PedestrianPlacement::UniformOnSidewalk,
            vehicle_lateral: VehicleLateral::Jittered,
            blocking_faces: BlockingFaces::AllFaces,
        }
    }
}

/// Which bodies may occlude a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Blockers {
    pedestrians: bool,
    vehicles: bool,
}

const ALL_BLOCKERS: Blockers = Blockers { pedestrians: true, vehicles: true };

fn blockers_for(mode: SimulationMode, class: LinkClass) -> Blockers {
    match (mode.blocking_faces, class) {
        (BlockingFaces::AllFaces, _) => ALL_BLOCKERS,
        (BlockingFaces::FacingOnly, LinkClass::UeAp) => ALL_BLOCKERS,
        (BlockingFaces::FacingOnly, LinkClass::UeCow) => Blockers { pedestrians: true, vehicles: false },
        (BlockingFaces::FacingOnly, LinkClass::CowAp) => Blockers { pedestrians: false, vehicles: true },
    }
}

fn blocked_by(inst: &DeploymentInstance, a: Point3, b: Point3, mode: SimulationMode, who: Blockers) -> bool {
    let exact = mode.blocking_faces == BlockingFaces::AllFaces;
    if who.pedestrians {
        let hit = if exact {
            inst.pedestrians.iter().any(|c| segment_hits_cylinder(a, b, c))
        } else {
            inst.pedestrians.iter().any(|c| zone_hits_cylinder(a, b, c))
        };
        if hit {
            return true;
        }
    }
    if who.vehicles {
        for v in inst.vehicles() {
            // The relay's own body never blocks its links.
            if v.body.contains(a) || v.body.contains(b) {
                continue;
            }
            let hit = if exact { segment_hits_box(a, b, &v.body) } else { facing_face_hits_box(a, b, &v.body) };
            if hit {
                return true;
            }
        }
    }
    false
}

/// Whether any body of `inst` occludes the segment `a`-`b` under `mode`.
pub fn is_blocked(inst: &DeploymentInstance, a: Point3, b: Point3, mode: SimulationMode) -> bool {
    blocked_by(inst, a, b, mode, ALL_BLOCKERS)
}

/// A quantity the simulator can estimate, with its closed-form counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantity {
    HumanBlockageUeAp { x0: f64 },
    VehicleBlockageUeAp { x0: f64 },
    JointBlockageUeAp { x0: f64 },
    CowCoverage,
    HumanBlockageUeCow { x_s: f64 },
    JointBlockageCowAp { x1: f64 },
    SeUeAp { x0: f64 },
    SeUeCow { x_s: f64 },
    SeCowAp { x1: f64 },
    StrategySe(Strategy),
}

impl Quantity {
    /// Names accepted by [`Quantity::parse`], with whether they take a position.
    pub const NAMES: [(&'static str, bool); 12] = [
        ("p_human", true),
        ("p_vehicle", true),
        ("p_joint", true),
        ("p_coverage", false),
        ("p_ue_cow", true),
        ("p_cow_ap", true),
        ("se_ue_ap", true),
        ("se_ue_cow", true),
        ("se_cow_ap", true),
        ("se_baseline", false),
        ("se_conservative", false),
        ("se_aggressive", false),
    ];

    pub fn parse(name: &str, position: Option<f64>) -> Result<Self, String> {
        let needs = Self::NAMES.iter().find(|(n, _)| *n == name).map(|(_, p)| *p).ok_or_else(|| {
            let names: Vec<_> = Self::NAMES.iter().map(|(n, _)| *n).collect();
            format!("unknown quantity `{name}` (expected one of {})", names.join(", "))
        })?;
        let at = match (needs, position) {
            (true, Some(x)) => x,
            (true, None) => return Err(format!("quantity `{name}` needs a position in meters")),
            (false, Some(_)) => return Err(format!("quantity `{name}` takes no position")),
            (false, None) => 0.0,
        };
        Ok(match name {
            "p_human" => Quantity::HumanBlockageUeAp { x0: at },
            "p_vehicle" => Quantity::VehicleBlockageUeAp { x0: at },
            "p_joint" => Quantity::JointBlockageUeAp { x0: at },
            "p_coverage" => Quantity::CowCoverage,
            "p_ue_cow" => Quantity::HumanBlockageUeCow { x_s: at },
            "p_cow_ap" => Quantity::JointBlockageCowAp { x1: at },
            "se_ue_ap" => Quantity::SeUeAp { x0: at },
            "se_ue_cow" => Quantity::SeUeCow { x_s: at },
            "se_cow_ap" => Quantity::SeCowAp { x1: at },
            "se_baseline" => Quantity::StrategySe(Strategy::Baseline),
            "se_conservative" => Quantity::StrategySe(Strategy::Conservative),
            _ => Quantity::StrategySe(Strategy::Aggressive),
        })
    }

    pub fn analytic(&self, s: &Scenario) -> Result<f64, QuadratureError> {
        Ok(match *self {
            Quantity::HumanBlockageUeAp { x0 } => human_blockage_ue_ap(s, x0),
            Quantity::VehicleBlockageUeAp { .. } => vehicle_blockage_ue_ap(s),
            Quantity::JointBlockageUeAp { x0 } => joint_blockage_ue_ap(s, x0).p_joint,
            Quantity::CowCoverage => cow_coverage_probability(s),
            Quantity::HumanBlockageUeCow { x_s } => human_blockage_ue_cow(s, x_s),
            Quantity::JointBlockageCowAp { x1 } => joint_blockage_cow_ap(s, x1),
            Quantity::SeUeAp { x0 } => mean_se_ue_ap(s, x0),
            Quantity::SeUeCow { x_s } => mean_se_ue_cow(s, x_s),
            Quantity::SeCowAp { x1 } => mean_se_cow_ap(s, x1),
            Quantity::StrategySe(st) => return mean_se_strategy(s, st),
        })
    }

    pub fn is_probability(&self) -> bool {
        !matches!(
            self,
            Quantity::SeUeAp { .. } | Quantity::SeUeCow { .. } | Quantity::SeCowAp { .. } | Quantity::StrategySe(_)
        )
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Quantity::HumanBlockageUeAp { x0 } => write!(f, "p_human@{x0}"),
            Quantity::VehicleBlockageUeAp { x0 } => write!(f, "p_vehicle@{x0}"),
            Quantity::JointBlockageUeAp { x0 } => write!(f, "p_joint@{x0}"),
            Quantity::CowCoverage => write!(f, "p_coverage"),
            Quantity::HumanBlockageUeCow { x_s } => write!(f, "p_ue_cow@{x_s}"),
            Quantity::JointBlockageCowAp { x1 } => write!(f, "p_cow_ap@{x1}"),
            Quantity::SeUeAp { x0 } => write!(f, "se_ue_ap@{x0}"),
            Quantity::SeUeCow { x_s } => write!(f, "se_ue_cow@{x_s}"),
            Quantity::SeCowAp { x1 } => write!(f, "se_cow_ap@{x1}"),
            Quantity::StrategySe(st) => write!(f, "se_{st}"),
        }
    }
}

impl FromStr for Quantity {
    type Err = String;

    /// `name` or `name@position`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('@') {
            Some((name, at)) => {
                let x = at.parse::<f64>().map_err(|e| format!("bad position `{at}`: {e}"))?;
                Self::parse(name, Some(x))
            }
            None => Self::parse(s, None),
        }
    }
}

/// Sample mean with a normal-approximation 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub n_drops: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    fn estimate(&self) -> SimEstimate {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = if self.n > 1 { ((self.sum_sq - self.sum * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        SimEstimate { mean, half_width_95: 1.96 * (var / n).sqrt(), n_drops: self.n }
    }
}

const CHUNK: u64 = 4096;

fn run_drops<const N: usize>(
    n_drops: u64,
    seed: u64,
    drop: impl Fn(&mut ChaCha8Rng, &mut DeploymentInstance) -> [f64; N] + Sync,
) -> [SimEstimate; N] {
    assert!(n_drops >= 1, "at least one drop");
    let chunks = n_drops.div_ceil(CHUNK);
    let partial: Vec<[Moments; N]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut inst = DeploymentInstance { seed, ..Default::default() };
            let mut m = [Moments::default(); N];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_drops) {
                let mut rng = drop_rng(seed, i);
                let v = drop(&mut rng, &mut inst);
                for k in 0..N {
                    m[k].push(v[k]);
                }
            }
            m
        })
        .collect();
    let mut total = [Moments::default(); N];
    for m in &partial {
        for k in 0..N {
            total[k].merge(&m[k]);
        }
    }
    total.map(|m| m.estimate())
}

/// Per-drop evaluator bound to one scenario and mode.
struct Engine<'a> {
    s: &'a Scenario,
    mode: SimulationMode,
    sampler: Sampler<'a>,
    cross: CrossSection,
    x_r: Option<f64>,
}

impl<'a> Engine<'a> {
    fn new(s: &'a Scenario, mode: SimulationMode) -> Self {
        let sampler = Sampler::new(s, mode);
        let cross = sampler.cross();
        Self { s, mode, sampler, cross, x_r: cow_half_window(&s.street) }
    }

    fn ue(&self, x0: f64) -> Point3 {
        Point3::new(x0, self.cross.ue_path(), self.s.street.ue_height)
    }

    fn ap(&self) -> Point3 {
        Point3::new(0.0, 0.0, self.s.street.ap_height)
    }

    fn antenna(&self, v: &Vehicle) -> Point3 {
        Point3::new(v.center_x(), v.center_y(), self.s.street.cow_antenna_height)
    }

    fn blocked(&self, inst: &DeploymentInstance, a: Point3, b: Point3, class: LinkClass) -> bool {
        blocked_by(inst, a, b, self.mode, blockers_for(self.mode, class))
    }

    /// Longitudinal reach of bodies that can touch the UE-AP ray near the UE.
    fn body_reach(&self, x0: f64) -> f64 {
        let g = UeApGeometry::new(&self.s.street, x0);
        g.zone_length + 2.0 * self.s.street.body_radius + 0.5
    }

    fn tagged_cow<'i>(&self, inst: &'i DeploymentInstance) -> &'i Vehicle {
        &inst.lanes[0][0]
    }

    fn ue_ap_plan(&self, x0: f64, peds: bool, vehicles: bool) -> Plan {
        let r = self.s.street.body_radius + 0.5;
        let reach = self.body_reach(x0);
        let span = (x0.min(0.0) - 1.0, x0.max(0.0) + 1.0);
        Plan {
            pedestrians: peds.then_some((x0 - reach, x0 + r)),
            ue_anchor: Some(x0),
            lanes: if vehicles { [Some(span), Some(span), None, None] } else { [None; LANES] },
            cow_anchor: None,
        }
    }

    fn ue_ap_drop(
        &self,
        x0: f64,
        peds: bool,
        vehicles: bool,
        rng: &mut ChaCha8Rng,
        inst: &mut DeploymentInstance,
    ) -> bool {
        self.sampler.fill(&self.ue_ap_plan(x0, peds, vehicles), inst, rng);
        self.blocked(inst, self.ue(x0), self.ap(), LinkClass::UeAp)
    }

    fn ue_cow_drop(&self, x_s: f64, rng: &mut ChaCha8Rng, inst: &mut DeploymentInstance) -> bool {
        let relaxed = self.mode.blocking_faces == BlockingFaces::AllFaces;
        let m = self.s.street.bus.length + 1.0;
        let plan = Plan {
            pedestrians: Some((x_s.min(0.0) - 1.0, x_s.max(0.0) + 1.0)),
            ue_anchor: Some(0.0),
            lanes: [relaxed.then_some((x_s.min(0.0) - m, x_s.max(0.0) + m)), None, None, None],
            cow_anchor: Some(x_s),
        };
        self.sampler.fill(&plan, inst, rng);
        let cow = if relaxed {
            self.antenna(self.tagged_cow(inst))
        } else {
            Point3::new(x_s, self.cross.lane_center(0), self.s.street.cow_antenna_height)
        };
        self.blocked(inst, self.ue(0.0), cow, LinkClass::UeCow)
    }

    fn cow_ap_drop(&self, x1: f64, rng: &mut ChaCha8Rng, inst: &mut DeploymentInstance) -> bool {
        let relaxed = self.mode.blocking_faces == BlockingFaces::AllFaces;
        let span = (x1.min(0.0) - 1.0, x1.max(0.0) + 1.0);
        let plan = Plan {
            pedestrians: relaxed.then_some(span),
            ue_anchor: None,
            lanes: [Some(span), Some(span), None, None],
            cow_anchor: Some(x1),
        };
        self.sampler.fill(&plan, inst, rng);
        let cow = self.antenna(self.tagged_cow(inst));
        self.blocked(inst, cow, self.ap(), LinkClass::CowAp)
    }

    fn coverage_drop(&self, rng: &mut ChaCha8Rng, inst: &mut DeploymentInstance) -> bool {
        let Some(x_r) = self.x_r else { return false };
        let plan = Plan { lanes: [Some((-x_r - 1.0, x_r + 1.0)), None, None, None], ..Plan::default() };
        self.sampler.fill(&plan, inst, rng);
        inst.lanes[0].iter().any(|v| v.is_cow && v.center_x().abs() <= x_r)
    }

    /// `[baseline, conservative, aggressive]` SE for a UE uniform between APs.
    fn strategy_drop(&self, rng: &mut ChaCha8Rng, inst: &mut DeploymentInstance) -> [f64; 3] {
        let st = &self.s.street;
        let x0 = rng.random::<f64>() * 0.5 * st.ap_spacing;
        let x_r = self.x_r.unwrap_or(0.0);
        let reach = self.body_reach(x0).max(x_r) + 1.0;
        let span = ((x0 - x_r).min(0.0) - 1.0, x0 + x_r + 1.0);
        let plan = Plan {
            pedestrians: Some((x0 - reach, x0 + x_r + 1.0)),
            ue_anchor: Some(x0),
            lanes: [Some(span), Some(span), None, None],
            cow_anchor: None,
        };
        self.sampler.fill(&plan, inst, rng);
        let ue = self.ue(x0);
        let ap = self.ap();
        let direct = link_budget(st, LinkClass::UeAp, x0).se(!self.blocked(inst, ue, ap, LinkClass::UeAp));
        if self.x_r.is_none() {
            return [direct; 3];
        }
        let in_range = inst.lanes[0].iter().filter(|v| v.is_cow && (v.center_x() - x0).abs() <= x_r).count();
        if in_range == 0 {
            return [direct; 3];
        }
        let pick = rng.random_range(0..in_range);
        let cow = *inst.lanes[0]
            .iter()
            .filter(|v| v.is_cow && (v.center_x() - x0).abs() <= x_r)
            .nth(pick)
            .expect("index within count");
        let antenna = self.antenna(&cow);
        let x_c = cow.center_x();
        let access = link_budget(st, LinkClass::UeCow, x_c - x0).se(!self.blocked(inst, ue, antenna, LinkClass::UeCow));
        let backhaul =
            link_budget(st, LinkClass::CowAp, x_c.abs()).se(!self.blocked(inst, antenna, ap, LinkClass::CowAp));
        [direct, direct.max(harmonic_se(access, backhaul)), direct.max(backhaul)]
    }

    fn value(&self, q: Quantity, rng: &mut ChaCha8Rng, inst: &mut DeploymentInstance) -> f64 {
        let st = &self.s.street;
        let ind = |b: bool| if b { 1.0 } else { 0.0 };
        match q {
            Quantity::HumanBlockageUeAp { x0 } => ind(self.ue_ap_drop(x0, true, false, rng, inst)),
            Quantity::VehicleBlockageUeAp { x0 } => ind(self.ue_ap_drop(x0, false, true, rng, inst)),
            Quantity::JointBlockageUeAp { x0 } => ind(self.ue_ap_drop(x0, true, true, rng, inst)),
            Quantity::CowCoverage => ind(self.coverage_drop(rng, inst)),
            Quantity::HumanBlockageUeCow { x_s } => ind(self.ue_cow_drop(x_s, rng, inst)),
            Quantity::JointBlockageCowAp { x1 } => ind(self.cow_ap_drop(x1, rng, inst)),
            Quantity::SeUeAp { x0 } => {
                link_budget(st, LinkClass::UeAp, x0).se(!self.ue_ap_drop(x0, true, true, rng, inst))
            }
            Quantity::SeUeCow { x_s } => link_budget(st, LinkClass::UeCow, x_s).se(!self.ue_cow_drop(x_s, rng, inst)),
            Quantity::SeCowAp { x1 } => link_budget(st, LinkClass::CowAp, x1).se(!self.cow_ap_drop(x1, rng, inst)),
            Quantity::StrategySe(s) => {
                let v = self.strategy_drop(rng, inst);
                v[Strategy::ALL.iter().position(|&x| x == s).expect("listed")]
            }
        }
    }
}

/// Monte Carlo estimate of `quantity` from `n_drops` independent drops.
pub fn estimate(s: &Scenario, mode: SimulationMode, quantity: Quantity, n_drops: u64, seed: u64) -> SimEstimate {
    let engine = Engine::new(s, mode);
    let [e] = run_drops(n_drops, seed, |rng, inst| [engine.value(quantity, rng, inst)]);
    e
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyEstimates {
    pub baseline: SimEstimate,
    pub conservative: SimEstimate,
    pub aggressive: SimEstimate,
}

impl StrategyEstimates {
    pub fn get(&self, strategy: Strategy) -> SimEstimate {
        match strategy {
            Strategy::Baseline => self.baseline,
            Strategy::Conservative => self.conservative,
            Strategy::Aggressive => self.aggressive,
        }
    }
}

/// All three strategy means from one shared set of drops.
pub fn estimate_strategies(s: &Scenario, mode: SimulationMode, n_drops: u64, seed: u64) -> StrategyEstimates {
    let engine = Engine::new(s, mode);
    let [baseline, conservative, aggressive] = run_drops(n_drops, seed, |rng, inst| engine.strategy_drop(rng, inst));
    StrategyEstimates { baseline, conservative, aggressive }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{density_to_pedestrian_gap, DistributionSpec, StochasticConfig, StreetConfig};

    fn scenario(rho_h: f64) -> Scenario {
        let traffic = StochasticConfig {
            pedestrian_gap: density_to_pedestrian_gap(rho_h, 3.0).unwrap(),
            ..StochasticConfig::default()
        };
        Scenario::new(StreetConfig::default(), traffic)
    }

    #[test]
    fn empty_instance_blocks_nothing() {
        let inst = DeploymentInstance::default();
        let a = Point3::new(10.0, 9.25, 1.5);
        let b = Point3::new(0.0, 0.0, 10.0);
        assert!(!is_blocked(&inst, a, b, SimulationMode::analytic()));
        assert!(!is_blocked(&inst, a, b, SimulationMode::relaxed()));
    }

    #[test]
    fn no_pedestrians_at_zero_density() {
        let mut s = scenario(0.5);
        s.traffic.pedestrian_gap = DistributionSpec::exponential(f64::INFINITY);
        let s = Scenario::new(s.street, s.traffic);
        for mode in [SimulationMode::analytic(), SimulationMode::relaxed()] {
            let inst = sample_deployment(&s, mode, 3);
            assert!(inst.pedestrians.is_empty());
            assert!(!inst.lanes[0].is_empty());
        }
    }

    #[test]
    fn deployment_invariants() {
        let s = scenario(0.5);
        for mode in [SimulationMode::analytic(), SimulationMode::relaxed()] {
            let inst = sample_deployment(&s, mode, 17);
            for lane in &inst.lanes {
                for w in lane.windows(2) {
                    assert!(w[1].body.x_lo > w[0].body.x_hi);
                }
                for v in lane {
                    assert!(!(v.is_cow && v.kind == VehicleKind::Bus));
                }
            }
            let ys = (2.0 * 3.5, 2.0 * 3.5 + 3.0);
            assert!(inst.pedestrians.iter().all(|p| p.y >= ys.0 && p.y <= ys.1));
        }
    }

    #[test]
    fn path_spacing_matches_gap_law() {
        let s = scenario(0.5);
        let inst = sample_deployment(&s, SimulationMode::analytic(), 1);
        let y = CrossSection::new(&s.street).other_path();
        let mut xs: Vec<f64> = inst.pedestrians.iter().filter(|p| p.y == y).map(|p| p.x).collect();
        xs.sort_by(f64::total_cmp);
        let gaps: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        assert!((mean - 4.0 / 3.0).abs() / (4.0 / 3.0) < 0.1, "{mean}");
    }

    #[test]
    fn deterministic_across_runs() {
        let s = scenario(0.5);
        let q = Quantity::JointBlockageUeAp { x0: 60.0 };
        let a = estimate(&s, SimulationMode::analytic(), q, 10_000, 42);
        let b = estimate(&s, SimulationMode::analytic(), q, 10_000, 42);
        assert_eq!(a, b);
        let c = estimate(&s, SimulationMode::analytic(), q, 10_000, 43);
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn coverage_is_zero_without_relays() {
        let mut s = scenario(0.5);
        s.traffic.p_relay = 0.0;
        let s = Scenario::new(s.street, s.traffic);
        let e = estimate(&s, SimulationMode::analytic(), Quantity::CowCoverage, 2_000, 1);
        assert_eq!((e.mean, e.half_width_95), (0.0, 0.0));
    }

    #[test]
    fn quantity_names_round_trip() {
        for (name, positioned) in Quantity::NAMES {
            let text = if positioned { format!("{name}@12.5") } else { name.to_string() };
            let q: Quantity = text.parse().unwrap();
            assert_eq!(q.to_string(), text);
        }
        assert!("p_joint".parse::<Quantity>().is_err());
        assert!("p_coverage@3".parse::<Quantity>().is_err());
        assert!("nonsense".parse::<Quantity>().is_err());
    }
}
