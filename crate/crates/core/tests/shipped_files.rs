use std::path::PathBuf;

use mmwave_relay::config::{validate, ConfigFile, ConfigSource};
use mmwave_relay::sweep::SweepSpec;

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

#[test]
fn default_config_file_matches_built_in_defaults() {
    let file = ConfigSource::from_path(repo().join("configs/default.toml")).unwrap().resolve().unwrap();
    assert_eq!(file, ConfigFile::default());
}

#[test]
fn recipes_parse_and_resolve() {
    let mut seen = 0;
    for entry in std::fs::read_dir(repo().join("recipes")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        let spec = SweepSpec::from_path(&path).unwrap();
        spec.check().unwrap();
        assert!(spec.base.as_ref().unwrap().exists(), "{}", path.display());
        let mut doc = ConfigSource::from_path(spec.base.as_ref().unwrap()).unwrap().table().clone();
        for (k, v) in spec.config.clone() {
            match (doc.get_mut(&k), v) {
                (Some(toml::Value::Table(t)), toml::Value::Table(o)) => t.extend(o),
                (_, v) => {
                    doc.insert(k, v);
                }
            }
        }
        for &x in &spec.grid {
            let mut src = ConfigSource::from_table(doc.clone());
            src.set_number(spec.parameter.config_path(), x).unwrap();
            let (street, traffic) = src.resolve().unwrap().into_parts().unwrap();
            assert!(validate(&street, &traffic).is_admissible(), "{} at {x}", path.display());
        }
        seen += 1;
    }
    assert_eq!(seen, 5);
}
