//! Run configuration: TOML parsing, defaulting, validation, and assembly
//! of the simulation objects a run needs.
//!
//! The file format is flat TOML sections (`[model]`, `[lattice]`,
//! `[partition]`, `[schedule]`, `[run]`, `[observables]`, `[balance]`).
//! Unknown keys are rejected, and every validation error names the
//! offending key path.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::lattice::{Configuration, Lattice, SpinSpace};
use crate::models::{Arrhenius, ArrheniusParams, Kawasaki, Model, RateModel, Zgb, ZgbParams};
use crate::partition::Partition;
use crate::schedule::{make_schedule_with_draw, GroupOrder, Schedule, SchemeKind};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: RawModel,
    lattice: RawLattice,
    partition: RawPartition,
    schedule: RawSchedule,
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    observables: RawObservables,
    #[serde(default)]
    balance: RawBalance,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    name: String,
    c_a: Option<f64>,
    c_d: Option<f64>,
    beta: Option<f64>,
    coupling: Option<f64>,
    field: Option<f64>,
    k1: Option<f64>,
    k2: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLattice {
    dims: Vec<u32>,
    #[serde(default)]
    initial_spin: u8,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPartition {
    cells_per_axis: Vec<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    scheme: String,
    dt: f64,
    total_time: f64,
    group_order: Option<String>,
    rescale_random_time: Option<bool>,
    /// Draw distribution (odd, even) for the randomized scheme.
    draw: Option<[f64; 2]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    run_id: Option<String>,
    seed: Option<u64>,
    workers: Option<usize>,
    output: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObservables {
    names: Option<Vec<String>>,
    stride: Option<u64>,
    burn_in: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBalance {
    enabled: Option<bool>,
    cadence: Option<u64>,
    threshold: Option<f64>,
    granularity: Option<u32>,
}

/// One observable sampled on window boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observable {
    /// Fraction of sites carrying the spin.
    Coverage { spin: u8 },
    /// Two-point occupation correlation at lag k along axis 0.
    Correlation { spin: u8, k: u32 },
}

impl Observable {
    /// The name used in config files and CSV output.
    pub fn name(&self) -> String {
        match self {
            Observable::Coverage { spin } => format!("coverage_{spin}"),
            Observable::Correlation { spin: _, k } => format!("correlation_{k}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BalanceSettings {
    pub enabled: bool,
    pub cadence: u64,
    pub threshold: f64,
    pub granularity: u32,
}

/// Fully validated run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model_name: String,
    pub model: ModelParams,
    pub dims: Vec<u32>,
    pub initial_spin: u8,
    pub cells_per_axis: Vec<u32>,
    pub scheme: SchemeKind,
    pub dt: f64,
    pub total_time: f64,
    pub group_order: GroupOrder,
    pub rescale_random_time: bool,
    pub p_odd: f64,
    pub run_id: String,
    pub seed: u64,
    /// Requested worker count; zero means all available parallelism.
    pub workers: usize,
    pub output: PathBuf,
    pub observables: Vec<Observable>,
    pub stride: u64,
    pub burn_in: f64,
    pub balance: BalanceSettings,
}

#[derive(Debug, Clone)]
pub enum ModelParams {
    Arrhenius(ArrheniusParams),
    Kawasaki(ArrheniusParams),
    Zgb(ZgbParams),
}

/// CLI flag overrides applied between parsing and validation.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub output: Option<String>,
    pub schedule: Option<String>,
    pub dt: Option<f64>,
    pub time: Option<f64>,
}

fn key_err(path: &str, key: &str, msg: impl std::fmt::Display) -> Error {
    Error::ConfigFile {
        path: path.to_string(),
        message: format!("{key}: {msg}"),
    }
}

fn require<T: Copy>(path: &str, key: &str, v: Option<T>) -> Result<T> {
    v.ok_or_else(|| key_err(path, key, "missing required key"))
}

/// Load, apply overrides, validate. Parse errors carry the TOML line
/// number; validation errors name the offending key.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigFile {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let p = path.display().to_string();
    let mut raw: RawConfig = toml::from_str(&text).map_err(|e| Error::ConfigFile {
        path: p.clone(),
        message: e.to_string(),
    })?;

    if let Some(seed) = overrides.seed {
        raw.run.seed = Some(seed);
    }
    if let Some(workers) = overrides.workers {
        raw.run.workers = Some(workers);
    }
    if let Some(output) = &overrides.output {
        raw.run.output = Some(output.clone());
    }
    if let Some(schedule) = &overrides.schedule {
        raw.schedule.scheme = schedule.clone();
    }
    if let Some(dt) = overrides.dt {
        raw.schedule.dt = dt;
    }
    if let Some(time) = overrides.time {
        raw.schedule.total_time = time;
    }

    validate(&p, raw)
}

fn parse_model(p: &str, raw: &RawModel) -> Result<(String, ModelParams)> {
    let name = raw.model_name_normalized();
    let params = match name.as_str() {
        "arrhenius" | "kawasaki" => {
            let params = ArrheniusParams {
                c_a: require(p, "model.c_a", raw.c_a)?,
                c_d: require(p, "model.c_d", raw.c_d)?,
                beta: require(p, "model.beta", raw.beta)?,
                coupling: require(p, "model.coupling", raw.coupling)?,
                field: require(p, "model.field", raw.field)?,
            };
            if raw.k1.is_some() || raw.k2.is_some() {
                return Err(key_err(p, "model.k1", "only valid for the zgb model"));
            }
            if name == "arrhenius" {
                ModelParams::Arrhenius(params)
            } else {
                ModelParams::Kawasaki(params)
            }
        }
        "zgb" => {
            for (key, set) in [
                ("model.c_a", raw.c_a.is_some()),
                ("model.c_d", raw.c_d.is_some()),
                ("model.beta", raw.beta.is_some()),
                ("model.coupling", raw.coupling.is_some()),
                ("model.field", raw.field.is_some()),
            ] {
                if set {
                    return Err(key_err(p, key, "only valid for arrhenius/kawasaki"));
                }
            }
            ModelParams::Zgb(ZgbParams {
                k1: require(p, "model.k1", raw.k1)?,
                k2: require(p, "model.k2", raw.k2)?,
            })
        }
        other => {
            return Err(key_err(
                p,
                "model.name",
                format!("unknown model `{other}` (expected arrhenius, kawasaki, or zgb)"),
            ))
        }
    };
    Ok((name, params))
}

impl RawModel {
    fn model_name_normalized(&self) -> String {
        self.name.trim().to_ascii_lowercase()
    }
}

fn parse_observable(p: &str, key: &str, name: &str, space: SpinSpace) -> Result<Observable> {
    let named = match name {
        "coverage" => Some(Observable::Coverage { spin: 1 }),
        "coverage_vacant" => Some(Observable::Coverage { spin: 0 }),
        "coverage_co" => Some(Observable::Coverage { spin: 1 }),
        "coverage_o" => Some(Observable::Coverage { spin: 2 }),
        _ => None,
    };
    let obs = if let Some(obs) = named {
        obs
    } else if let Some(rest) = name.strip_prefix("coverage_") {
        let spin: u8 = rest
            .parse()
            .map_err(|_| key_err(p, key, format!("unknown observable `{name}`")))?;
        Observable::Coverage { spin }
    } else if let Some(rest) = name.strip_prefix("correlation_") {
        let k: u32 = rest
            .parse()
            .map_err(|_| key_err(p, key, format!("unknown observable `{name}`")))?;
        Observable::Correlation { spin: 1, k }
    } else {
        return Err(key_err(p, key, format!("unknown observable `{name}`")));
    };
    let spin = match &obs {
        Observable::Coverage { spin } => *spin,
        Observable::Correlation { spin, .. } => *spin,
    };
    if !space.contains(spin) {
        return Err(key_err(
            p,
            key,
            format!("spin {spin} outside the model's {} states", space.num_states()),
        ));
    }
    Ok(obs)
}

fn validate(p: &str, raw: RawConfig) -> Result<RunConfig> {
    let (model_name, model) = parse_model(p, &raw.model)?;
    let space = instantiate(&model)?.spin_space();

    if raw.lattice.dims.is_empty() {
        return Err(key_err(p, "lattice.dims", "must list at least one axis"));
    }
    if raw.lattice.dims.iter().any(|&n| n == 0) {
        return Err(key_err(p, "lattice.dims", "axis lengths must be positive"));
    }
    if !space.contains(raw.lattice.initial_spin) {
        return Err(key_err(
            p,
            "lattice.initial_spin",
            format!(
                "spin {} outside the model's {} states",
                raw.lattice.initial_spin,
                space.num_states()
            ),
        ));
    }

    if raw.partition.cells_per_axis.len() != raw.lattice.dims.len() {
        return Err(key_err(
            p,
            "partition.cells_per_axis",
            format!(
                "{} axes but lattice.dims has {}",
                raw.partition.cells_per_axis.len(),
                raw.lattice.dims.len()
            ),
        ));
    }
    for (a, (&c, &n)) in raw
        .partition
        .cells_per_axis
        .iter()
        .zip(raw.lattice.dims.iter())
        .enumerate()
    {
        if c == 0 || n % c != 0 {
            return Err(key_err(
                p,
                &format!("partition.cells_per_axis[{a}]"),
                format!("{c} does not divide lattice.dims[{a}] = {n}"),
            ));
        }
    }

    let scheme = match raw.schedule.scheme.trim().to_ascii_lowercase().as_str() {
        "lie" => SchemeKind::Lie,
        "strang" => SchemeKind::Strang,
        "random" => SchemeKind::Random,
        other => {
            return Err(key_err(
                p,
                "schedule.scheme",
                format!("unknown scheme `{other}` (expected lie, strang, or random)"),
            ))
        }
    };
    if !(raw.schedule.dt.is_finite() && raw.schedule.dt > 0.0) {
        return Err(key_err(p, "schedule.dt", "must be positive"));
    }
    if !(raw.schedule.total_time.is_finite() && raw.schedule.total_time > 0.0) {
        return Err(key_err(p, "schedule.total_time", "must be positive"));
    }
    let group_order = match raw
        .schedule
        .group_order
        .as_deref()
        .unwrap_or("oe")
        .trim()
        .to_ascii_lowercase()
        .as_str()
    {
        "oe" => GroupOrder::OE,
        "eo" => GroupOrder::EO,
        other => {
            return Err(key_err(
                p,
                "schedule.group_order",
                format!("unknown order `{other}` (expected oe or eo)"),
            ))
        }
    };
    let p_odd = match raw.schedule.draw {
        None => 0.5,
        Some([po, pe]) => {
            if !(po.is_finite() && pe.is_finite() && po >= 0.0 && pe >= 0.0) {
                return Err(key_err(p, "schedule.draw", "entries must be non-negative"));
            }
            if (po + pe - 1.0).abs() > 1e-9 {
                return Err(key_err(p, "schedule.draw", "entries must sum to 1"));
            }
            po
        }
    };
    if raw.schedule.draw.is_some() && scheme != SchemeKind::Random {
        return Err(key_err(
            p,
            "schedule.draw",
            "only meaningful for the random scheme",
        ));
    }

    let run_id = raw.run.run_id.unwrap_or_else(|| "run".to_string());
    if run_id.is_empty() || run_id.contains(',') || run_id.contains('\n') {
        return Err(key_err(
            p,
            "run.run_id",
            "must be non-empty and free of commas/newlines",
        ));
    }

    let stride = raw.observables.stride.unwrap_or(1);
    if stride == 0 {
        return Err(key_err(p, "observables.stride", "must be at least 1"));
    }
    let burn_in = raw.observables.burn_in.unwrap_or(0.2);
    if !(burn_in.is_finite() && (0.0..1.0).contains(&burn_in)) {
        return Err(key_err(p, "observables.burn_in", "must lie in [0, 1)"));
    }
    let names = raw
        .observables
        .names
        .unwrap_or_else(|| vec!["coverage".to_string()]);
    if names.is_empty() {
        return Err(key_err(p, "observables.names", "must list at least one"));
    }
    let mut observables = Vec::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        observables.push(parse_observable(
            p,
            &format!("observables.names[{i}]"),
            name,
            space,
        )?);
    }

    let balance = BalanceSettings {
        enabled: raw.balance.enabled.unwrap_or(false),
        cadence: raw.balance.cadence.unwrap_or(10),
        threshold: raw.balance.threshold.unwrap_or(2.0),
        granularity: raw.balance.granularity.unwrap_or(1),
    };
    if balance.enabled && raw.lattice.dims.len() != 1 {
        return Err(key_err(
            p,
            "balance.enabled",
            "strip rebalancing works on one-dimensional lattices only",
        ));
    }
    if balance.cadence == 0 {
        return Err(key_err(p, "balance.cadence", "must be at least 1"));
    }
    if !(balance.threshold.is_finite() && balance.threshold >= 1.0) {
        return Err(key_err(p, "balance.threshold", "must be at least 1"));
    }
    if balance.granularity == 0 {
        return Err(key_err(p, "balance.granularity", "must be at least 1"));
    }

    Ok(RunConfig {
        model_name,
        model,
        dims: raw.lattice.dims,
        initial_spin: raw.lattice.initial_spin,
        cells_per_axis: raw.partition.cells_per_axis,
        scheme,
        dt: raw.schedule.dt,
        total_time: raw.schedule.total_time,
        group_order,
        rescale_random_time: raw.schedule.rescale_random_time.unwrap_or(true),
        p_odd,
        run_id,
        seed: raw.run.seed.unwrap_or(1),
        workers: raw.run.workers.unwrap_or(0),
        output: PathBuf::from(raw.run.output.unwrap_or_else(|| "out".to_string())),
        observables,
        stride,
        burn_in,
        balance,
    })
}

/// Construct the rate model from validated parameters.
pub fn instantiate(params: &ModelParams) -> Result<Model> {
    Ok(match params {
        ModelParams::Arrhenius(p) => Model::Arrhenius(Arrhenius::new(p.clone())?),
        ModelParams::Kawasaki(p) => Model::Kawasaki(Kawasaki::new(p.clone())?),
        ModelParams::Zgb(p) => Model::Zgb(Zgb::new(p.clone())?),
    })
}

impl RunConfig {
    /// Worker count with zero resolved to the machine's parallelism.
    pub fn effective_workers(&self) -> usize {
        if self.workers > 0 {
            self.workers
        } else {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        }
    }

    /// Build the model, lattice, start configuration, partition, and
    /// schedule this config describes.
    pub fn assemble(
        &self,
    ) -> Result<(Model, Arc<Lattice>, Configuration, Partition, Schedule)> {
        let model = instantiate(&self.model)?;
        let lattice = Lattice::new(&self.dims)?;
        let start = Configuration::constant(
            lattice.clone(),
            model.spin_space(),
            self.initial_spin,
        )?;
        let partition =
            Partition::build(lattice.clone(), &self.cells_per_axis, model.locality())?;
        let schedule = make_schedule_with_draw(
            self.scheme,
            self.total_time,
            self.dt,
            self.group_order,
            self.rescale_random_time,
            self.p_odd,
        )?;
        Ok((model, lattice, start, partition, schedule))
    }
}
