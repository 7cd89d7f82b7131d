//! Distribution functionals, compound spacing laws and adaptive quadrature.

mod compound;
mod distribution;
mod quadrature;

pub use compound::{BusGapDistribution, CowSpacingDistribution, FALLBACK_SAMPLES, TAIL_MASS};
pub use distribution::{erlang_cdf, erlang_cdf_integral, renewal_coverage_probability, Distribution, Ecdf, RenewalLaw};
pub use quadrature::{integrate, Quadrature, QuadratureError};

/// `F_{D_B}(x)`, the CDF of the distance between consecutive buses.
pub fn bus_gap_cdf(bg: &BusGapDistribution, x: f64) -> f64 {
    bg.cdf(x)
}
