use crate::config::{validate, ConfigError, StochasticConfig, StreetConfig, ValidationReport};
use crate::numerics::{BusGapDistribution, CowSpacingDistribution, Distribution};

/// A street with its traffic laws, plus the derived spacing laws both engines share.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub street: StreetConfig,
    pub traffic: StochasticConfig,
    pedestrian_gap: Distribution,
    vehicle_gap: Distribution,
    bus_gap: BusGapDistribution,
    cow_spacing: CowSpacingDistribution,
}

impl Scenario {
    /// Builds the scenario without checking admissibility.
    pub fn new(street: StreetConfig, traffic: StochasticConfig) -> Self {
        let pedestrian_gap = Distribution::new(traffic.pedestrian_gap);
        let vehicle_gap = Distribution::new(traffic.vehicle_gap);
        let bus_gap = BusGapDistribution::new(traffic.p_bus, street.car.length, vehicle_gap);
        let cow_spacing = CowSpacingDistribution::new(
            traffic.p_bus,
            traffic.p_relay,
            street.car.length,
            street.bus.length,
            vehicle_gap,
        );
        Self { street, traffic, pedestrian_gap, vehicle_gap, bus_gap, cow_spacing }
    }

    /// Builds the scenario, rejecting inadmissible configurations.
    pub fn checked(street: StreetConfig, traffic: StochasticConfig) -> Result<Self, ConfigError> {
        let report = validate(&street, &traffic);
        if !report.is_admissible() {
            return Err(ConfigError::Invalid(report));
        }
        Ok(Self::new(street, traffic))
    }

    pub fn validate(&self) -> ValidationReport {
        validate(&self.street, &self.traffic)
    }

    pub fn pedestrian_gap(&self) -> &Distribution {
        &self.pedestrian_gap
    }

    pub fn vehicle_gap(&self) -> &Distribution {
        &self.vehicle_gap
    }

    pub fn bus_gap(&self) -> &BusGapDistribution {
        &self.bus_gap
    }

    pub fn cow_spacing(&self) -> &CowSpacingDistribution {
        &self.cow_spacing
    }
}

impl Default for Scenario {
    fn default() -> Self {
        Self::new(StreetConfig::default(), StochasticConfig::default())
    }
}
