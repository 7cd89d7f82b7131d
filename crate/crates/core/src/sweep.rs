//! Parameter sweeps over the analytic and simulated engines, CSV output and
//! gnuplot scripts.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, ConfigSource};
use crate::scenario::Scenario;
use crate::sim::{estimate_strategies, SimulationMode};
use crate::strategy::{strategy_means, Strategy};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("sweep spec: {0}")]
    Parse(String),
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("sweep grid must be strictly increasing (at index {0})")]
    UnsortedGrid(usize),
    #[error("sweep needs at least one engine")]
    NoEngines,
    #[error("sweep needs at least one strategy")]
    NoStrategies,
    #[error("drop count must be at least 1")]
    NoDrops,
    #[error("unknown plot template `{0}`")]
    UnknownTemplate(String),
    #[error("no rows to plot")]
    NoRows,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Evaluation engine for a sweep row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Analytic,
    SimAnalyticMode,
    SimRelaxed,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::Analytic, Engine::SimAnalyticMode, Engine::SimRelaxed];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::SimAnalyticMode => "sim_analytic_mode",
            Engine::SimRelaxed => "sim_relaxed",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Engine::Analytic => "analysis",
            Engine::SimAnalyticMode => "simulation (model assumptions)",
            Engine::SimRelaxed => "simulation",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The swept knob: a named density/relay parameter or any dotted config path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum SweptParameter {
    PedestrianDensity,
    VehicleDensity,
    CowRange,
    RelayFraction,
    Path(String),
}

impl SweptParameter {
    pub fn config_path(&self) -> &str {
        match self {
            SweptParameter::PedestrianDensity => "traffic.pedestrian_density",
            SweptParameter::VehicleDensity => "traffic.vehicle_density",
            SweptParameter::CowRange => "street.cow_range",
            SweptParameter::RelayFraction => "traffic.relay_fraction",
            SweptParameter::Path(p) => p,
        }
    }

    pub fn axis_label(&self) -> String {
        match self {
            SweptParameter::PedestrianDensity => "Pedestrian density [humans/m^2]".into(),
            SweptParameter::VehicleDensity => "Vehicle density [vehicles per 100 m of lane]".into(),
            SweptParameter::CowRange => "COW range R [m]".into(),
            SweptParameter::RelayFraction => "Fraction of COWs among cars p_R".into(),
            SweptParameter::Path(p) => p.clone(),
        }
    }
}

impl From<String> for SweptParameter {
    fn from(s: String) -> Self {
        match s.as_str() {
            "pedestrian_density" => SweptParameter::PedestrianDensity,
            "vehicle_density" => SweptParameter::VehicleDensity,
            "cow_range" => SweptParameter::CowRange,
            "relay_fraction" => SweptParameter::RelayFraction,
            _ => SweptParameter::Path(s),
        }
    }
}

impl From<SweptParameter> for String {
    fn from(p: SweptParameter) -> Self {
        match p {
            SweptParameter::PedestrianDensity => "pedestrian_density".into(),
            SweptParameter::VehicleDensity => "vehicle_density".into(),
            SweptParameter::CowRange => "cow_range".into(),
            SweptParameter::RelayFraction => "relay_fraction".into(),
            SweptParameter::Path(p) => p,
        }
    }
}

fn default_engines() -> Vec<Engine> {
    vec![Engine::Analytic]
}

fn default_strategies() -> Vec<Strategy> {
    Strategy::ALL.to_vec()
}

fn default_drops() -> u64 {
    100_000
}

fn default_seed() -> u64 {
    1
}

fn default_template() -> String {
    "generic".into()
}

/// A sweep recipe as read from TOML.
///
/// `base` names a configuration file (relative to the recipe) and `config`
/// holds `[street]`/`[traffic]` overrides layered on top of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub name: String,
    pub parameter: SweptParameter,
    pub grid: Vec<f64>,
    #[serde(default = "default_engines")]
    pub engines: Vec<Engine>,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_drops")]
    pub drops: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_template")]
    pub template: String,
    #[serde(default)]
    pub x_label: Option<String>,
    #[serde(default)]
    pub base: Option<PathBuf>,
    #[serde(default)]
    pub config: toml::Table,
}

impl SweepSpec {
    pub fn new(parameter: SweptParameter, grid: Vec<f64>) -> Self {
        Self {
            name: String::new(),
            parameter,
            grid,
            engines: default_engines(),
            strategies: default_strategies(),
            drops: default_drops(),
            seed: default_seed(),
            out: None,
            template: default_template(),
            x_label: None,
            base: None,
            config: toml::Table::new(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SweepError> {
        toml::from_str(text).map_err(|e| SweepError::Parse(e.to_string()))
    }

    /// Reads a recipe; relative `base` and `out` paths resolve against the
    /// recipe's directory.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, SweepError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| SweepError::Io { path: path.display().to_string(), source })?;
        let mut spec = Self::from_toml_str(&text)?;
        let dir = path.parent().unwrap_or(Path::new(""));
        if let Some(base) = spec.base.as_mut() {
            if base.is_relative() {
                *base = dir.join(&*base);
            }
        }
        Ok(spec)
    }

    pub fn check(&self) -> Result<(), SweepError> {
        if self.grid.is_empty() {
            return Err(SweepError::EmptyGrid);
        }
        if let Some(i) = self.grid.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(SweepError::UnsortedGrid(i + 1));
        }
        if self.engines.is_empty() {
            return Err(SweepError::NoEngines);
        }
        if self.strategies.is_empty() {
            return Err(SweepError::NoStrategies);
        }
        if self.drops == 0 {
            return Err(SweepError::NoDrops);
        }
        Ok(())
    }

    pub fn x_label(&self) -> String {
        self.x_label.clone().unwrap_or_else(|| self.parameter.axis_label())
    }

    fn source(&self) -> Result<ConfigSource, SweepError> {
        let mut doc = match &self.base {
            Some(path) => ConfigSource::from_path(path)?.table().clone(),
            None => toml::Table::new(),
        };
        overlay(&mut doc, self.config.clone());
        Ok(ConfigSource::from_table(doc))
    }
}

fn overlay(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => overlay(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// One `(grid point, strategy, engine)` result.
///
/// Numeric fields are empty when the point failed; `error` then says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub swept_value: f64,
    pub strategy: Strategy,
    pub engine: Engine,
    pub mean_se: Option<f64>,
    pub half_width_95: Option<f64>,
    pub relative_gain: Option<f64>,
    pub error: Option<String>,
}

type Means = [(f64, f64); 3];

fn evaluate(source: &ConfigSource, engine: Engine, drops: u64, seed: u64) -> Result<Means, String> {
    let (street, traffic) = source.resolve().and_then(|c| c.into_parts()).map_err(|e| e.to_string())?;
    let s = Scenario::checked(street, traffic).map_err(|e| e.to_string())?;
    let mode = match engine {
        Engine::Analytic => {
            let m = strategy_means(&s).map_err(|e| e.to_string())?;
            return Ok(Strategy::ALL.map(|st| (m.get(st), 0.0)));
        }
        Engine::SimAnalyticMode => SimulationMode::analytic(),
        Engine::SimRelaxed => SimulationMode::relaxed(),
    };
    let e = estimate_strategies(&s, mode, drops, seed);
    Ok(Strategy::ALL.map(|st| {
        let x = e.get(st);
        (x.mean, x.half_width_95)
    }))
}

/// Evaluates every grid point, strategy and engine.
///
/// Simulated engines reuse the master seed at every grid point (common random
/// numbers), so neighbouring points differ only through the swept parameter.
/// Rows come out in grid order, then engine order, then strategy order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>, SweepError> {
    spec.check()?;
    let base = spec.source()?;
    let path = spec.parameter.config_path();
    let jobs: Vec<(f64, Engine)> = spec.grid.iter().flat_map(|&v| spec.engines.iter().map(move |&e| (v, e))).collect();
    let results: Vec<Result<Means, String>> = jobs
        .par_iter()
        .map(|&(value, engine)| {
            let mut source = base.clone();
            source.set_number(path, value).map_err(|e| e.to_string())?;
            evaluate(&source, engine, spec.drops, spec.seed)
        })
        .collect();
    let mut rows = Vec::with_capacity(jobs.len() * spec.strategies.len());
    for (&(value, engine), result) in jobs.iter().zip(results) {
        for &strategy in &spec.strategies {
            let idx = Strategy::ALL.iter().position(|&s| s == strategy).expect("listed");
            rows.push(match &result {
                Ok(means) => {
                    let baseline = means[0].0;
                    let (mean, hw) = means[idx];
                    ResultRow {
                        swept_value: value,
                        strategy,
                        engine,
                        mean_se: Some(mean),
                        half_width_95: Some(hw),
                        relative_gain: Some(if baseline > 0.0 { mean / baseline - 1.0 } else { 0.0 }),
                        error: None,
                    }
                }
                Err(msg) => ResultRow {
                    swept_value: value,
                    strategy,
                    engine,
                    mean_se: None,
                    half_width_95: None,
                    relative_gain: None,
                    error: Some(msg.clone()),
                },
            });
        }
    }
    Ok(rows)
}

pub fn write_csv<W: io::Write>(rows: &[ResultRow], out: W) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<ResultRow>, SweepError> {
    let mut r = csv::Reader::from_reader(input);
    let rows = r.deserialize().collect::<Result<Vec<ResultRow>, _>>()?;
    Ok(rows)
}

/// Plot layout for a figure id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Template {
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Generic,
}

impl FromStr for Template {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig5" => Ok(Template::Fig5),
            "fig6" => Ok(Template::Fig6),
            "fig7" => Ok(Template::Fig7),
            "fig8" => Ok(Template::Fig8),
            "generic" => Ok(Template::Generic),
            other => Err(SweepError::UnknownTemplate(other.to_string())),
        }
    }
}

/// Gnuplot script that reads `csv_name` and draws one curve per
/// `(strategy, engine)` pair present in `rows`.
pub fn emit_plot_script(
    rows: &[ResultRow],
    template: &str,
    csv_name: &str,
    x_label: &str,
) -> Result<String, SweepError> {
    let template: Template = template.parse()?;
    if rows.is_empty() {
        return Err(SweepError::NoRows);
    }
    let mut curves: Vec<(Strategy, Engine)> = Vec::new();
    for r in rows {
        if !curves.contains(&(r.strategy, r.engine)) {
            curves.push((r.strategy, r.engine));
        }
    }
    let gain = template == Template::Fig8;
    if gain {
        curves.retain(|(s, _)| *s != Strategy::Baseline);
        if curves.is_empty() {
            return Err(SweepError::NoRows);
        }
    }
    let x_label = match template {
        Template::Fig5 => "Pedestrian density [humans/m^2]",
        Template::Fig6 => "Vehicle density [vehicles per 100 m of lane]",
        Template::Fig7 => "COW range R [m]",
        Template::Fig8 => "Fraction of COWs among cars p_R",
        Template::Generic => x_label,
    };
    let (y_label, column) =
        if gain { ("Relative SE gain vs Baseline [%]", "(100*$6)") } else { ("Mean SE [bits/s/Hz]", "($4)") };
    let stem = csv_name.trim_end_matches(".csv");
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str(&format!("set terminal pngcairo size 900,600\nset output '{stem}.png'\n"));
    s.push_str(&format!("set xlabel '{}'\nset ylabel '{}'\n", escape(x_label), y_label));
    s.push_str("set key outside right\nset grid\n");
    s.push_str("plot \\\n");
    let lines: Vec<String> = curves
        .iter()
        .enumerate()
        .map(|(i, (st, en))| {
            let dash = match en {
                Engine::Analytic => "lines",
                _ => "linespoints",
            };
            format!(
                "  '{csv_name}' every ::1 using 1:((strcol(2) eq '{st}' && strcol(3) eq '{}') ? {column} : 1/0) with {dash} lc {} title '{st} ({})'",
                en.name(),
                i + 1,
                en.title()
            )
        })
        .collect();
    s.push_str(&lines.join(", \\\n"));
    s.push('\n');
    Ok(s)
}

fn escape(label: &str) -> String {
    label.replace('\'', "''")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parses_with_defaults() {
        let spec = SweepSpec::from_toml_str(
            "parameter = \"pedestrian_density\"\ngrid = [0.1, 0.5]\n[config.traffic]\nvehicle_density = 4\n",
        )
        .unwrap();
        assert_eq!(spec.parameter, SweptParameter::PedestrianDensity);
        assert_eq!(spec.engines, vec![Engine::Analytic]);
        assert_eq!(spec.strategies.len(), 3);
        assert!(spec.check().is_ok());
        let custom = SweepSpec::from_toml_str("parameter = \"street.bus.height\"\ngrid = [3]\n").unwrap();
        assert_eq!(custom.parameter.config_path(), "street.bus.height");
    }

    #[test]
    fn spec_rejections() {
        let mut spec = SweepSpec::new(SweptParameter::CowRange, vec![]);
        assert!(matches!(spec.check(), Err(SweepError::EmptyGrid)));
        spec.grid = vec![1.0, 1.0];
        assert!(matches!(spec.check(), Err(SweepError::UnsortedGrid(1))));
        spec.grid = vec![1.0];
        spec.strategies.clear();
        assert!(matches!(spec.check(), Err(SweepError::NoStrategies)));
        assert!(SweepSpec::from_toml_str("parameter = \"x\"\ngrid = [1]\nbogus = 1\n").is_err());
    }

    #[test]
    fn no_relays_means_no_gain() {
        let mut spec = SweepSpec::new(SweptParameter::RelayFraction, vec![0.0]);
        spec.engines = vec![Engine::Analytic, Engine::SimAnalyticMode];
        spec.drops = 2_000;
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows {
            assert_eq!(r.relative_gain, Some(0.0), "{r:?}");
        }
    }

    #[test]
    fn failures_are_recorded_in_rows() {
        let spec = SweepSpec::new(SweptParameter::Path("street.sidewalk_width".into()), vec![-1.0, 3.0]);
        let rows = run_sweep(&spec).unwrap();
        assert!(rows[..3].iter().all(|r| r.error.is_some() && r.mean_se.is_none()));
        assert!(rows[3..].iter().all(|r| r.error.is_none()));
    }

    #[test]
    fn plot_script_templates() {
        let row = |strategy, engine| ResultRow {
            swept_value: 0.1,
            strategy,
            engine,
            mean_se: Some(10.0),
            half_width_95: Some(0.0),
            relative_gain: Some(0.0),
            error: None,
        };
        let rows: Vec<_> =
            Strategy::ALL.iter().flat_map(|&s| [row(s, Engine::Analytic), row(s, Engine::SimRelaxed)]).collect();
        let script = emit_plot_script(&rows, "fig5", "fig5.csv", "").unwrap();
        assert_eq!(script.matches("every ::1").count(), 6);
        let fig8 = emit_plot_script(&rows, "fig8", "fig8.csv", "").unwrap();
        assert_eq!(fig8.matches("every ::1").count(), 4);
        let generic = emit_plot_script(&rows, "generic", "x.csv", "Bus height [m]").unwrap();
        assert!(generic.contains("Bus height [m]"));
        assert!(matches!(emit_plot_script(&rows, "fig9", "x.csv", ""), Err(SweepError::UnknownTemplate(_))));
        assert!(matches!(emit_plot_script(&[], "fig5", "x.csv", ""), Err(SweepError::NoRows)));
    }
}
