use proptest::prelude::*;

use mmwave_relay::blockage::{
    cow_coverage_probability, human_blockage_ue_ap, human_blockage_ue_cow, joint_blockage_cow_ap, joint_blockage_ue_ap,
    joint_blockage_ue_ap_cases,
};
use mmwave_relay::config::{validate, ConfigSource};
use mmwave_relay::numerics::{renewal_coverage_probability, Distribution, RenewalLaw};
use mmwave_relay::strategy::{harmonic_se, strategy_means};
use mmwave_relay::Scenario;

fn build(assignments: &[(&str, f64)]) -> Option<Scenario> {
    let mut src = ConfigSource::default();
    for (path, v) in assignments {
        src.set_number(path, *v).ok()?;
    }
    let (street, traffic) = src.resolve().ok()?.into_parts().ok()?;
    validate(&street, &traffic).is_admissible().then(|| Scenario::new(street, traffic))
}

fn config() -> impl Strategy<Value = Vec<(&'static str, f64)>> {
    (0.02f64..1.5, 0.5f64..14.0, 0.0f64..0.4, 0.0f64..1.0, 5.0f64..150.0, 2.5f64..6.0, 1.5f64..5.0).prop_map(
        |(rho_h, rho_v, p_bus, p_relay, range, bus_h, ws)| {
            vec![
                ("traffic.pedestrian_density", rho_h),
                ("traffic.vehicle_density", rho_v),
                ("traffic.bus_fraction", p_bus),
                ("traffic.relay_fraction", p_relay),
                ("street.cow_range", range),
                ("street.bus.height", bus_h),
                ("street.sidewalk_width", ws),
            ]
        },
    )
}

fn with(mut base: Vec<(&'static str, f64)>, path: &'static str, v: f64) -> Vec<(&'static str, f64)> {
    base.retain(|(p, _)| *p != path);
    base.push((path, v));
    base
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn strategies_are_ordered(cfg in config()) {
        if let Some(s) = build(&cfg) {
            let m = strategy_means(&s).unwrap();
            prop_assert!(m.aggressive >= m.conservative - 1e-9);
            prop_assert!(m.conservative >= m.baseline - 1e-9);
            prop_assert!(m.baseline > 0.0);
        }
    }
}

proptest! {
    #[test]
    fn probabilities_are_bounded(cfg in config(), x0 in 0.5f64..150.0, x_s in -150.0f64..150.0) {
        if let Some(s) = build(&cfg) {
            let j = joint_blockage_ue_ap(&s, x0);
            for p in [j.p_human, j.p_vehicle, j.p_joint, cow_coverage_probability(&s),
                      human_blockage_ue_cow(&s, x_s), joint_blockage_cow_ap(&s, x_s)] {
                prop_assert!((0.0..=1.0).contains(&p), "{p}");
            }
            prop_assert!(j.p_joint >= j.p_human.max(j.p_vehicle) - 1e-15);
            prop_assert!((joint_blockage_ue_ap_cases(&s, x0) - j.p_joint).abs() < 1e-12);
        }
    }

    #[test]
    fn human_blockage_grows_with_density(cfg in config(), x0 in 0.5f64..150.0, bump in 1.01f64..3.0) {
        let rho = cfg[0].1;
        let (Some(lo), Some(hi)) = (build(&cfg), build(&with(cfg.clone(), "traffic.pedestrian_density", rho * bump)))
        else { return Ok(()) };
        prop_assert!(human_blockage_ue_ap(&hi, x0) >= human_blockage_ue_ap(&lo, x0));
    }

    #[test]
    fn human_blockage_grows_with_distance(cfg in config(), x0 in 0.5f64..140.0, dx in 0.1f64..10.0) {
        if let Some(s) = build(&cfg) {
            prop_assert!(human_blockage_ue_ap(&s, x0 + dx) >= human_blockage_ue_ap(&s, x0) - 1e-15);
        }
    }

    #[test]
    fn coverage_grows_with_range_and_relays(cfg in config(), bump in 1.01f64..3.0) {
        let Some(s) = build(&cfg) else { return Ok(()) };
        let p = cow_coverage_probability(&s);
        let range = cfg[4].1;
        if let Some(wider) = build(&with(cfg.clone(), "street.cow_range", range * bump)) {
            prop_assert!(cow_coverage_probability(&wider) >= p - 1e-12);
        }
        let p_relay = cfg[3].1;
        if let Some(more) = build(&with(cfg.clone(), "traffic.relay_fraction", (p_relay * bump).min(1.0))) {
            prop_assert!(cow_coverage_probability(&more) >= p - 1e-12);
        }
    }

    #[test]
    fn harmonic_combination_is_below_both_hops(a in 0.0f64..30.0, b in 0.0f64..30.0) {
        let h = harmonic_se(a, b);
        prop_assert!(h >= 0.0 && h <= a.min(b));
    }

    #[test]
    fn renewal_coverage_is_monotone(mean in 0.05f64..50.0, t in 0.0f64..100.0, dt in 0.0f64..10.0) {
        let d = Distribution::exponential(mean);
        let (a, b) = (renewal_coverage_probability(&d, t), renewal_coverage_probability(&d, t + dt));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a);
        prop_assert!(d.survival_integral(t) <= t.min(mean) + 1e-12);
    }
}
