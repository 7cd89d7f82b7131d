//! Scenario parameters: street geometry, radio budget, and traffic laws.
//!
//! Everything the analytic model and the simulator consume lives here, so the
//! two engines can never disagree about a default. Configuration files are
//! TOML; any field can be overridden by a dotted path (`street.bus.height=4.5`)
//! before the file is deserialized, which is what the CLI `--set` flag and the
//! sweep runner both use.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Parse(String),
    #[error("bad override `{0}`: expected dotted.path=value")]
    Override(String),
    #[error("pedestrian density must be positive, got {0}")]
    PedestrianDensity(f64),
    #[error("sidewalk width must be positive, got {0}")]
    SidewalkWidth(f64),
    #[error("vehicle density must be positive, got {0}")]
    VehicleDensity(f64),
    #[error(
        "jam density: {density} vehicles/100 m leaves no room between bumpers \
         (mean footprint {footprint:.3} m)"
    )]
    JamDensity { density: f64, footprint: f64 },
    #[error("inadmissible configuration:\n{0}")]
    Invalid(ValidationReport),
}

/// Length, width and height of a vehicle body, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleDims {
    pub length: f64,
    pub width: f64,
    pub height: f64,
}

/// Which end of the UE-AP link transmits.
///
/// The uplink form uses the UE power on the access links and the COW power on
/// the backhaul hop; the downlink form uses the AP power on every link that
/// touches the AP and the COW power towards the UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkDirection {
    #[default]
    Uplink,
    Downlink,
}

/// Deterministic scenario parameters.
///
/// Lateral coordinates follow the street cross-section: four lanes of
/// `lane_width`, APs on lampposts between the two central lanes, one sidewalk
/// of `sidewalk_width` on each side with two walking paths at one and three
/// quarters of its width from the curb.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StreetConfig {
    pub lane_width: f64,
    pub sidewalk_width: f64,
    pub ap_height: f64,
    pub ap_spacing: f64,
    pub body_radius: f64,
    pub body_height: f64,
    pub ue_height: f64,
    /// Height of the rooftop relay antenna on a COW.
    pub cow_antenna_height: f64,
    pub car: VehicleDims,
    pub bus: VehicleDims,
    /// COW coverage radius.
    pub cow_range: f64,
    pub carrier_ghz: f64,
    pub bandwidth_hz: f64,
    pub power_ap_dbm: f64,
    pub power_ue_dbm: f64,
    pub power_cow_dbm: f64,
    pub gain_ap_db: f64,
    pub gain_ue_db: f64,
    pub gain_cow_db: f64,
    pub noise_figure_db: f64,
    pub link_direction: LinkDirection,
}

impl Default for StreetConfig {
    fn default() -> Self {
        Self {
            lane_width: 3.5,
            sidewalk_width: 3.0,
            ap_height: 10.0,
            ap_spacing: 300.0,
            body_radius: 0.3,
            body_height: 1.75,
            ue_height: 1.5,
            cow_antenna_height: 1.4,
            car: VehicleDims { length: 4.5, width: 1.8, height: 1.4 },
            bus: VehicleDims { length: 12.0, width: 2.5, height: 3.2 },
            cow_range: 50.0,
            carrier_ghz: 28.0,
            bandwidth_hz: 1e9,
            power_ap_dbm: 33.0,
            power_ue_dbm: 23.0,
            power_cow_dbm: 27.0,
            gain_ap_db: 27.0,
            gain_ue_db: 15.0,
            gain_cow_db: 26.0,
            noise_figure_db: 7.0,
            link_direction: LinkDirection::Uplink,
        }
    }
}

impl StreetConfig {
    /// Thermal noise over the band plus the receiver noise figure, dBm.
    pub fn noise_dbm(&self) -> f64 {
        -174.0 + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db
    }

    /// Lateral UE-to-AP offset, `2 w_L + 3 w_S / 4`.
    pub fn ue_ap_lateral(&self) -> f64 {
        2.0 * self.lane_width + 0.75 * self.sidewalk_width
    }

    /// Lateral UE-to-COW offset (COW centered in the near side lane).
    pub fn ue_cow_lateral(&self) -> f64 {
        0.75 * self.sidewalk_width + 0.5 * self.lane_width
    }

    /// Lateral COW-to-AP offset.
    pub fn cow_ap_lateral(&self) -> f64 {
        1.5 * self.lane_width
    }
}

/// Inter-object spacing law, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum DistributionSpec {
    Exponential { mean: f64 },
    Deterministic { value: f64 },
    Uniform { low: f64, high: f64 },
}

impl DistributionSpec {
    pub fn exponential(mean: f64) -> Self {
        DistributionSpec::Exponential { mean }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DistributionSpec::Exponential { mean } => mean,
            DistributionSpec::Deterministic { value } => value,
            DistributionSpec::Uniform { low, high } => 0.5 * (low + high),
        }
    }

    /// `allow_empty` admits an infinite exponential mean (no objects at all).
    fn check(&self, name: &'static str, allow_empty: bool, out: &mut Vec<Violation>) {
        let ok = match *self {
            DistributionSpec::Exponential { mean } => {
                mean > 0.0 && (mean.is_finite() || (allow_empty && mean == f64::INFINITY))
            }
            DistributionSpec::Deterministic { value } => value > 0.0 && value.is_finite(),
            DistributionSpec::Uniform { low, high } => low >= 0.0 && low < high && high.is_finite(),
        };
        if !ok {
            out.push(Violation::new(
                Rule::GapLaw(name),
                format!("{name}: {self:?} needs a finite positive mean and 0 <= low < high"),
            ));
        }
    }
}

/// Random-variable specifications of the deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticConfig {
    /// Spacing `L` between consecutive pedestrians on one path.
    pub pedestrian_gap: DistributionSpec,
    /// Bumper-to-bumper spacing `D` between consecutive vehicles in a lane.
    pub vehicle_gap: DistributionSpec,
    /// Probability that a vehicle is a bus.
    pub p_bus: f64,
    /// Fraction of cars acting as COWs.
    pub p_relay: f64,
}

impl Default for StochasticConfig {
    fn default() -> Self {
        let street = StreetConfig::default();
        Self {
            pedestrian_gap: density_to_pedestrian_gap(0.5, street.sidewalk_width).expect("default density is positive"),
            vehicle_gap: density_to_vehicle_gap(4.0, 0.05, &street.car, &street.bus)
                .expect("default traffic is below jam density"),
            p_bus: 0.05,
            p_relay: 0.3,
        }
    }
}

/// Maps an areal pedestrian density (humans/m²) to the per-path spacing law.
///
/// The density is split evenly over the two paths of a sidewalk, so each path
/// carries `rho_h * w_S / 2` pedestrians per meter. A zero density gives an
/// infinite mean spacing, i.e. empty sidewalks.
pub fn density_to_pedestrian_gap(rho_h: f64, sidewalk_width: f64) -> Result<DistributionSpec, ConfigError> {
    if !(rho_h >= 0.0 && rho_h.is_finite()) {
        return Err(ConfigError::PedestrianDensity(rho_h));
    }
    if !(sidewalk_width > 0.0) {
        return Err(ConfigError::SidewalkWidth(sidewalk_width));
    }
    Ok(DistributionSpec::exponential(2.0 / (rho_h * sidewalk_width)))
}

/// Inverse of [`density_to_pedestrian_gap`]: humans/m² for a mean spacing.
pub fn pedestrian_density(gap: &DistributionSpec, sidewalk_width: f64) -> f64 {
    2.0 / (gap.mean() * sidewalk_width)
}

/// Maps vehicles per 100 m of lane to the bumper-to-bumper spacing law.
pub fn density_to_vehicle_gap(
    rho_v: f64,
    p_bus: f64,
    car: &VehicleDims,
    bus: &VehicleDims,
) -> Result<DistributionSpec, ConfigError> {
    if !(rho_v > 0.0) {
        return Err(ConfigError::VehicleDensity(rho_v));
    }
    let footprint = p_bus * bus.length + (1.0 - p_bus) * car.length;
    let gap = 100.0 / rho_v - footprint;
    if !(gap > 0.0) {
        return Err(ConfigError::JamDensity { density: rho_v, footprint });
    }
    Ok(DistributionSpec::exponential(gap))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    PositiveLength(&'static str),
    HeightOrder,
    GainOrder,
    BusWidth,
    Probability(&'static str),
    GapLaw(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub rule: Rule,
    pub message: String,
}

impl Violation {
    fn new(rule: Rule, message: String) -> Self {
        Self { rule, message }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  - {}", v.message)?;
        }
        Ok(())
    }
}

/// Lists every violated invariant; an empty report means admissible.
pub fn validate(street: &StreetConfig, stochastic: &StochasticConfig) -> ValidationReport {
    let mut out = Vec::new();
    let positive = [
        ("lane_width", street.lane_width),
        ("sidewalk_width", street.sidewalk_width),
        ("ap_height", street.ap_height),
        ("ap_spacing", street.ap_spacing),
        ("body_radius", street.body_radius),
        ("body_height", street.body_height),
        ("ue_height", street.ue_height),
        ("cow_antenna_height", street.cow_antenna_height),
        ("car.length", street.car.length),
        ("car.width", street.car.width),
        ("car.height", street.car.height),
        ("bus.length", street.bus.length),
        ("bus.width", street.bus.width),
        ("bus.height", street.bus.height),
        ("cow_range", street.cow_range),
        ("carrier_ghz", street.carrier_ghz),
        ("bandwidth_hz", street.bandwidth_hz),
    ];
    for (name, value) in positive {
        if !(value > 0.0 && value.is_finite()) {
            out.push(Violation::new(
                Rule::PositiveLength(name),
                format!("{name} must be finite and > 0 (got {value})"),
            ));
        }
    }
    let s = street;
    if !(s.cow_antenna_height < s.ue_height && s.ue_height < s.body_height && s.body_height < s.ap_height) {
        out.push(Violation::new(
            Rule::HeightOrder,
            format!(
                "heights must satisfy h_C < h_U < h_P < h_A (got {} / {} / {} / {})",
                s.cow_antenna_height, s.ue_height, s.body_height, s.ap_height
            ),
        ));
    }
    if !(s.gain_ue_db <= s.gain_cow_db && s.gain_cow_db <= s.gain_ap_db) {
        out.push(Violation::new(
            Rule::GainOrder,
            format!(
                "gains must satisfy G_U <= G_C <= G_A (got {} / {} / {})",
                s.gain_ue_db, s.gain_cow_db, s.gain_ap_db
            ),
        ));
    }
    if !(s.bus.width < 3.0 * s.lane_width) {
        out.push(Violation::new(Rule::BusWidth, format!("bus width {} must be below 3 lane widths", s.bus.width)));
    }
    for (name, p) in [("p_bus", stochastic.p_bus), ("p_relay", stochastic.p_relay)] {
        if !(0.0..=1.0).contains(&p) {
            out.push(Violation::new(Rule::Probability(name), format!("{name} in [0,1] (got {p})")));
        }
    }
    stochastic.pedestrian_gap.check("pedestrian_gap", true, &mut out);
    stochastic.vehicle_gap.check("vehicle_gap", false, &mut out);
    ValidationReport { violations: out }
}

/// Traffic section of a configuration file.
///
/// Densities are the convenient knobs; an explicit gap law, when present,
/// takes precedence over the corresponding density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    /// Humans per square meter of sidewalk.
    pub pedestrian_density: f64,
    /// Vehicles per 100 m of lane.
    pub vehicle_density: f64,
    pub bus_fraction: f64,
    pub relay_fraction: f64,
    pub pedestrian_gap: Option<DistributionSpec>,
    pub vehicle_gap: Option<DistributionSpec>,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            pedestrian_density: 0.5,
            vehicle_density: 4.0,
            bus_fraction: 0.05,
            relay_fraction: 0.3,
            pedestrian_gap: None,
            vehicle_gap: None,
        }
    }
}

/// On-disk configuration: `[street]` and `[traffic]` tables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub street: StreetConfig,
    pub traffic: TrafficConfig,
}

impl ConfigFile {
    pub fn stochastic(&self) -> Result<StochasticConfig, ConfigError> {
        let t = &self.traffic;
        let pedestrian_gap = match t.pedestrian_gap {
            Some(spec) => spec,
            None => density_to_pedestrian_gap(t.pedestrian_density, self.street.sidewalk_width)?,
        };
        let vehicle_gap = match t.vehicle_gap {
            Some(spec) => spec,
            None => density_to_vehicle_gap(t.vehicle_density, t.bus_fraction, &self.street.car, &self.street.bus)?,
        };
        Ok(StochasticConfig { pedestrian_gap, vehicle_gap, p_bus: t.bus_fraction, p_relay: t.relay_fraction })
    }

    pub fn into_parts(self) -> Result<(StreetConfig, StochasticConfig), ConfigError> {
        let sto = self.stochastic()?;
        Ok((self.street, sto))
    }
}

/// A TOML document with pending dotted-path overrides.
#[derive(Debug, Clone)]
pub struct ConfigSource {
    doc: toml::Table,
}

impl Default for ConfigSource {
    fn default() -> Self {
        Self { doc: toml::Table::new() }
    }
}

impl ConfigSource {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let doc: toml::Table = text.parse().map_err(|e| ConfigError::Parse(format!("{e}")))?;
        Ok(Self { doc })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn from_table(doc: toml::Table) -> Self {
        Self { doc }
    }

    /// Applies `dotted.path=value`; the value is parsed as a TOML literal and
    /// falls back to a bare string.
    pub fn apply_assignment(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (path, raw) = assignment.split_once('=').ok_or_else(|| ConfigError::Override(assignment.to_string()))?;
        let value = parse_literal(raw.trim());
        self.set(path.trim(), value)
    }

    pub fn set(&mut self, path: &str, value: toml::Value) -> Result<(), ConfigError> {
        let keys: Vec<&str> = path.split('.').filter(|k| !k.is_empty()).collect();
        let Some((last, parents)) = keys.split_last() else {
            return Err(ConfigError::Override(path.to_string()));
        };
        let mut table = &mut self.doc;
        for key in parents {
            let entry = table.entry(key.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            table = entry.as_table_mut().ok_or_else(|| ConfigError::Override(path.to_string()))?;
        }
        table.insert(last.to_string(), value);
        Ok(())
    }

    pub fn set_number(&mut self, path: &str, value: f64) -> Result<(), ConfigError> {
        self.set(path, toml::Value::Float(value))
    }

    pub fn table(&self) -> &toml::Table {
        &self.doc
    }

    /// Layers the document over the defaults and deserializes the result.
    pub fn resolve(&self) -> Result<ConfigFile, ConfigError> {
        let mut base = toml::Table::try_from(ConfigFile::default()).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let mut doc = self.doc.clone();
        promote_integers(&mut doc);
        merge(&mut base, doc);
        toml::Value::Table(base).try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

// Every numeric field is f64; accept `lane_width = 3` as well as `3.0`.
fn promote_integers(table: &mut toml::Table) {
    for (_, value) in table.iter_mut() {
        match value {
            toml::Value::Integer(i) => *value = toml::Value::Float(*i as f64),
            toml::Value::Table(t) => promote_integers(t),
            _ => {}
        }
    }
}
