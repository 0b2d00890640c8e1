//! Config-driven experiment orchestration.
//!
//! Each command consumes a [`RunConfig`], writes its artifacts into the
//! output directory and finishes with a `manifest.json` that embeds the
//! resolved config. Re-running a manifest reproduces every CSV byte for byte:
//! all randomness flows from the master seed through the labeled splits
//! `noise`, `shots` and `chain` (see [`crate::seeds`]).

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_current, build_schwinger, load_hamiltonian, load_observable, Hamiltonian, Observable,
};
use crate::hierarchy::{partition_full, HierarchyGraph, ZMode};
use crate::metrics::{assemble_observable, fit_quadratic_unweighted, l_norm, p_metric, Trajectory};
use crate::mitigation::{mitigate, AnnealSchedule, MitigationResult};
use crate::pauli::PauliString;
use crate::seeds;
use crate::simulator::{
    ground_state, measure_table, trotter_evolve, MeasurementTable, NoiseSpec, StateVector,
    TableMeta,
};

/// Short-time window of the quadratic fits.
pub const FIT_TMAX: f64 = 1.2;

/// Refinement factor of the reference Trotter run.
const REFERENCE_REFINEMENT: usize = 10;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SchwingerModel {
    pub nqubits: usize,
    pub omega: f64,
    pub mass: f64,
    pub mu5: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FileModel {
    pub hamiltonian: PathBuf,
    pub observable: PathBuf,
    pub nqubits: Option<usize>,
}

/// Exactly one of the two model sources must be present.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct ModelConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schwinger: Option<SchwingerModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<FileModel>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridConfig {
    pub total_time: f64,
    pub trotter_steps: usize,
    pub shots: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NoiseConfig {
    pub p_dep: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MitigationConfig {
    pub radius: usize,
    pub zmode: ZMode,
    pub sweeps: usize,
    pub thermalization: usize,
    pub samples: usize,
    pub dlambda: f64,
    pub proposal_scale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub seed: u64,
    pub jobs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub noise: NoiseConfig,
    pub mitigation: MitigationConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelConfig {
                schwinger: Some(SchwingerModel {
                    nqubits: 8,
                    omega: 1.0,
                    mass: 0.5,
                    mu5: 0.2,
                }),
                file: None,
            },
            grid: GridConfig {
                total_time: 3.0,
                trotter_steps: 10,
                shots: 10_000,
            },
            noise: NoiseConfig {
                p_dep: 0.004,
                eta: 0.9,
            },
            mitigation: MitigationConfig {
                radius: 1,
                zmode: ZMode::Next,
                sweeps: 10_000,
                thermalization: 2_500,
                samples: 30,
                dlambda: 1.0,
                proposal_scale: 0.05,
            },
            output: OutputConfig {
                dir: PathBuf::from("out"),
                seed: 1,
                jobs: 1,
            },
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        RunConfig::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Re-validates every invariant owned by the downstream modules.
    pub fn validate(&self) -> Result<()> {
        match (&self.model.schwinger, &self.model.file) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => {
                return Err(Error::config(
                    "exactly one of model.schwinger / model.file is required",
                ))
            }
        }
        if let Some(s) = &self.model.schwinger {
            if s.nqubits % 2 != 0 || s.nqubits < 4 {
                return Err(Error::config("schwinger nqubits must be even and >= 4"));
            }
            if s.omega <= 0.0 {
                return Err(Error::config("omega must be positive"));
            }
            if s.mass < 0.0 {
                return Err(Error::config("mass must be nonnegative"));
            }
        }
        if self.grid.total_time <= 0.0 || self.grid.trotter_steps == 0 || self.grid.shots == 0 {
            return Err(Error::config("grid values must be positive"));
        }
        NoiseSpec {
            p_dep: self.noise.p_dep,
            eta: self.noise.eta,
            seed: 0,
        }
        .validate()?;
        self.schedule().validate()?;
        if self.output.jobs == 0 {
            return Err(Error::config("jobs must be at least 1"));
        }
        Ok(())
    }

    /// Subsystem seeds derived from the master seed.
    pub fn derived_seeds(&self) -> DerivedSeeds {
        DerivedSeeds {
            noise: seeds::split(self.output.seed, "noise"),
            shots: seeds::split(self.output.seed, "shots"),
            chain: seeds::split(self.output.seed, "chain"),
        }
    }

    pub fn noise_spec(&self) -> NoiseSpec {
        NoiseSpec {
            p_dep: self.noise.p_dep,
            eta: self.noise.eta,
            seed: self.derived_seeds().shots,
        }
    }

    pub fn schedule(&self) -> AnnealSchedule {
        AnnealSchedule {
            sweeps: self.mitigation.sweeps,
            thermalization: self.mitigation.thermalization,
            samples: self.mitigation.samples,
            dlambda: self.mitigation.dlambda,
            proposal_scale: self.mitigation.proposal_scale,
            seed: self.derived_seeds().chain,
            randomize_order: false,
        }
    }

    fn build_model(&self) -> Result<(Hamiltonian, Observable)> {
        if let Some(s) = &self.model.schwinger {
            Ok((
                build_schwinger(s.nqubits, s.omega, s.mass, s.mu5)?,
                build_current(s.nqubits, s.omega)?,
            ))
        } else {
            let f = self.model.file.as_ref().expect("validated");
            let (h, _report) = load_hamiltonian(&f.hamiltonian, f.nqubits)?;
            let obs = load_observable(&f.observable)?;
            Ok((h, obs))
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivedSeeds {
    pub noise: u64,
    pub shots: u64,
    pub chain: u64,
}

/// Record of one command execution; enough to re-run it exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub wall_clock_seconds: f64,
    pub config: RunConfig,
    pub seeds: DerivedSeeds,
    pub artifacts: Vec<String>,
    pub summary: serde_json::Value,
}

impl RunManifest {
    fn write(&self, dir: &Path) -> Result<()> {
        write_text(
            dir,
            "manifest.json",
            &serde_json::to_string_pretty(self).expect("manifest serializes"),
        )
    }
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

struct ManifestBuilder {
    command: String,
    started: Instant,
    artifacts: Vec<String>,
}

impl ManifestBuilder {
    fn new(command: &str) -> ManifestBuilder {
        ManifestBuilder {
            command: command.to_string(),
            started: Instant::now(),
            artifacts: Vec::new(),
        }
    }

    fn add(&mut self, dir: &Path, name: &str, text: &str) -> Result<()> {
        write_text(dir, name, text)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn finish(
        self,
        cfg: &RunConfig,
        dir: &Path,
        summary: serde_json::Value,
    ) -> Result<RunManifest> {
        let manifest = RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            config: cfg.clone(),
            seeds: cfg.derived_seeds(),
            artifacts: self.artifacts,
            summary,
        };
        manifest.write(dir)?;
        Ok(manifest)
    }
}

/// Expands the hierarchy far enough to cover the configured radius.
fn expand_graph(q0: &[PauliString], h: &Hamiltonian, radius: usize) -> Result<HierarchyGraph> {
    HierarchyGraph::expand(q0, h, radius + 1)
}

fn coarse_times(nt: usize, total_time: f64) -> Vec<f64> {
    (0..=nt)
        .map(|s| s as f64 * total_time / nt as f64)
        .collect()
}

/// Expectations of the observable's strings on a Trotter trajectory,
/// downsampled by `stride`, assembled with zero errors.
fn assemble_ideal(
    obs: &Observable,
    states: &[StateVector],
    stride: usize,
    times: &[f64],
    label: &str,
) -> Result<Trajectory> {
    let strings = obs.strings();
    let npoints = times.len();
    let mut values = vec![Vec::with_capacity(npoints); strings.len()];
    for (q, string) in strings.iter().enumerate() {
        for s in 0..npoints {
            values[q].push(states[s * stride].expectation(string));
        }
    }
    let errors = vec![vec![0.0; npoints]; strings.len()];
    assemble_observable(obs, &strings, &values, &errors, times, label)
}

fn assemble_from_table(
    obs: &Observable,
    table: &MeasurementTable,
    times: &[f64],
    label: &str,
) -> Result<Trajectory> {
    let errors: Vec<Vec<f64>> = (0..table.quantities())
        .map(|q| {
            (0..=table.ntrotter())
                .map(|s| table.shot_error(q, s))
                .collect()
        })
        .collect();
    assemble_observable(obs, &table.strings, &table.xbar, &errors, times, label)
}

fn assemble_from_mitigation(
    obs: &Observable,
    strings: &[PauliString],
    result: &MitigationResult,
    times: &[f64],
) -> Result<Trajectory> {
    assemble_observable(
        obs,
        &strings[..result.quantities()],
        &result.chi,
        &result.sigma,
        times,
        "MH",
    )
}

fn metric_json(value: f64, error: f64) -> serde_json::Value {
    json!({ "value": value, "error": error })
}

/// Hierarchy census, the full-hierarchy partition and graph exports.
pub fn cmd_hierarchy(cfg: &RunConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let dir = cfg.output.dir.clone();
    let mut mb = ManifestBuilder::new("hierarchy");
    let (h, obs) = cfg.build_model()?;
    let q0 = obs.strings();
    let (radius, graph) = HierarchyGraph::subhierarchy_radius(&q0, &h)?;
    mb.add(
        &dir,
        "census.json",
        &serde_json::to_string_pretty(&graph.census_json()).unwrap(),
    )?;
    mb.add(&dir, "graph.dot", &graph.to_dot())?;
    mb.add(
        &dir,
        "graph.json",
        &serde_json::to_string_pretty(&graph.to_json()).unwrap(),
    )?;
    let partition = partition_full(&h, Some(&q0))?;
    mb.add(
        &dir,
        "partition.json",
        &serde_json::to_string_pretty(&partition.to_json()).unwrap(),
    )?;
    let summary = json!({
        "radius": radius,
        "q0": graph.layer_size(0)?,
        "subhierarchy": graph.layer_size(radius)?,
        "components_nonidentity": partition.count(),
        "z_next": (0..=radius).map(|r| graph.z_ratio(r, ZMode::Next).unwrap()).collect::<Vec<_>>(),
        "z_full": (0..=radius).map(|r| graph.z_ratio(r, ZMode::Full).unwrap()).collect::<Vec<_>>(),
    });
    mb.finish(cfg, &dir, summary)
}

/// Ideal and reference Trotter runs, the noisy measurement table and the
/// assembled current trajectories.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let dir = cfg.output.dir.clone();
    let mut mb = ManifestBuilder::new("simulate");
    let (h, obs) = cfg.build_model()?;
    let q0 = obs.strings();
    let graph = expand_graph(&q0, &h, cfg.mitigation.radius)?;
    let quantities: Vec<PauliString> =
        graph.nodes()[..graph.layer_size(cfg.mitigation.radius + 1)?].to_vec();

    let nt = cfg.grid.trotter_steps;
    let total = cfg.grid.total_time;
    let times = coarse_times(nt, total);
    let initial = ground_state(&h)?;

    let coarse_states = trotter_evolve(&initial, &h, nt, total)?;
    let fine_states = trotter_evolve(&initial, &h, nt * REFERENCE_REFINEMENT, total)?;
    let j_ed = assemble_ideal(&obs, &coarse_states, 1, &times, "ed")?;
    let j_ed_ref = assemble_ideal(&obs, &fine_states, REFERENCE_REFINEMENT, &times, "ED")?;

    let table = measure_table(
        &h,
        &quantities,
        nt,
        total,
        cfg.grid.shots,
        &cfg.noise_spec(),
        &initial,
    )?;
    let j_noisy = assemble_from_table(&obs, &table, &times, "Noisy")?;

    let (l_trotter, l_trotter_err) = l_norm(&j_ed, &j_ed_ref)?;
    let (l_noisy, l_noisy_err) = l_norm(&j_noisy, &j_ed_ref)?;

    mb.add(&dir, "measurements.csv", &table.to_csv())?;
    mb.add(
        &dir,
        "measurements.meta.json",
        &serde_json::to_string_pretty(&table.meta).unwrap(),
    )?;
    mb.add(&dir, "j_ed_coarse.csv", &j_ed.to_csv())?;
    mb.add(&dir, "j_ed_fine.csv", &j_ed_ref.to_csv())?;
    mb.add(&dir, "j_noisy.csv", &j_noisy.to_csv())?;

    let summary = json!({
        "quantities": quantities.len(),
        "l_trotter": metric_json(l_trotter, l_trotter_err),
        "l_noisy": metric_json(l_noisy, l_noisy_err),
    });
    mb.finish(cfg, &dir, summary)
}

fn read_table(dir: &Path) -> Result<MeasurementTable> {
    let meta_path = dir.join("measurements.meta.json");
    let csv_path = dir.join("measurements.csv");
    if !meta_path.exists() || !csv_path.exists() {
        return Err(Error::config(format!(
            "no measurement table in {}; run `simulate` first",
            dir.display()
        )));
    }
    let meta: TableMeta = serde_json::from_str(&std::fs::read_to_string(meta_path)?)
        .map_err(|e| Error::config(format!("bad table meta: {e}")))?;
    MeasurementTable::from_csv(&std::fs::read_to_string(csv_path)?, meta)
}

fn read_trajectory(dir: &Path, name: &str, label: &str) -> Result<Trajectory> {
    let path = dir.join(name);
    if !path.exists() {
        return Err(Error::config(format!(
            "missing {}; run the producing command first",
            path.display()
        )));
    }
    Trajectory::from_csv(&std::fs::read_to_string(path)?, label)
}

/// Runs the annealed chain against the stored measurement table and reports
/// the mitigated trajectory with its norms and fit metrics.
pub fn cmd_mitigate(cfg: &RunConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let dir = cfg.output.dir.clone();
    let mut mb = ManifestBuilder::new("mitigate");
    let (h, obs) = cfg.build_model()?;
    let table = read_table(&dir)?;
    let j_ed_ref = read_trajectory(&dir, "j_ed_fine.csv", "ED")?;
    let j_noisy = read_trajectory(&dir, "j_noisy.csv", "Noisy")?;
    let j_ed = read_trajectory(&dir, "j_ed_coarse.csv", "ed")?;

    let q0 = obs.strings();
    // The full z definition needs the saturated subhierarchy.
    let graph = match cfg.mitigation.zmode {
        ZMode::Next => expand_graph(&q0, &h, cfg.mitigation.radius)?,
        ZMode::Full => HierarchyGraph::subhierarchy_radius(&q0, &h)?.1,
    };
    let r = cfg.mitigation.radius;
    let result = mitigate(&table, &graph, &h, r, &cfg.schedule(), cfg.mitigation.zmode)?;
    let times = coarse_times(table.ntrotter(), table.meta.total_time);
    let j_mh = assemble_from_mitigation(&obs, graph.nodes(), &result, &times)?;

    let (l_trotter, l_trotter_err) = l_norm(&j_ed, &j_ed_ref)?;
    let (l_noisy, l_noisy_err) = l_norm(&j_noisy, &j_ed_ref)?;
    let (l_mh, l_mh_err) = l_norm(&j_mh, &j_ed_ref)?;
    let fit_ref = fit_quadratic_unweighted(&j_ed_ref, FIT_TMAX)?;
    let fit_noisy = fit_quadratic_unweighted(&j_noisy, FIT_TMAX)?;
    let fit_mh = fit_quadratic_unweighted(&j_mh, FIT_TMAX)?;
    let (p_noisy, p_noisy_err) = p_metric(&fit_noisy, &fit_ref)?;
    let (p_mh, p_mh_err) = p_metric(&fit_mh, &fit_ref)?;

    mb.add(&dir, "mitigation.csv", &result.to_csv())?;
    mb.add(
        &dir,
        "diagnostics.json",
        &serde_json::to_string_pretty(&result.diagnostics).unwrap(),
    )?;
    mb.add(&dir, "j_mh.csv", &j_mh.to_csv())?;

    let model_key = cfg.model.schwinger.as_ref().map(|s| (s.mass, s.mu5));
    let metrics = json!({
        "m": model_key.map(|k| k.0),
        "mu5": model_key.map(|k| k.1),
        "r": r,
        "seed": cfg.output.seed,
        "zmode": cfg.mitigation.zmode,
        "z": result.diagnostics.z,
        "z_next": graph.z_ratio(r, ZMode::Next)?,
        "z_full": graph.z_ratio(r, ZMode::Full).ok(),
        "l_trotter": metric_json(l_trotter, l_trotter_err),
        "l_noisy": metric_json(l_noisy, l_noisy_err),
        "l_mh": metric_json(l_mh, l_mh_err),
        "p_noisy": metric_json(p_noisy, p_noisy_err),
        "p_mh": metric_json(p_mh, p_mh_err),
        "acceptance": result.diagnostics.overall_acceptance,
    });
    mb.add(
        &dir,
        "metrics.json",
        &serde_json::to_string_pretty(&metrics).unwrap(),
    )?;
    mb.finish(cfg, &dir, metrics)
}

/// Recomputes norms and fit metrics from the serialized trajectories.
pub fn cmd_metrics(cfg: &RunConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let dir = cfg.output.dir.clone();
    let mut mb = ManifestBuilder::new("metrics");
    let j_ed = read_trajectory(&dir, "j_ed_coarse.csv", "ed")?;
    let j_ed_ref = read_trajectory(&dir, "j_ed_fine.csv", "ED")?;
    let j_noisy = read_trajectory(&dir, "j_noisy.csv", "Noisy")?;
    let (l_trotter, l_trotter_err) = l_norm(&j_ed, &j_ed_ref)?;
    let (l_noisy, l_noisy_err) = l_norm(&j_noisy, &j_ed_ref)?;
    let fit_ref = fit_quadratic_unweighted(&j_ed_ref, FIT_TMAX)?;
    let fit_noisy = fit_quadratic_unweighted(&j_noisy, FIT_TMAX)?;
    let (p_noisy, p_noisy_err) = p_metric(&fit_noisy, &fit_ref)?;
    let mut report = json!({
        "seed": cfg.output.seed,
        "l_trotter": metric_json(l_trotter, l_trotter_err),
        "l_noisy": metric_json(l_noisy, l_noisy_err),
        "p_noisy": metric_json(p_noisy, p_noisy_err),
        "fit_ed_p": [fit_ref.p[0], fit_ref.p[1]],
    });
    if dir.join("j_mh.csv").exists() {
        let j_mh = read_trajectory(&dir, "j_mh.csv", "MH")?;
        let (l_mh, l_mh_err) = l_norm(&j_mh, &j_ed_ref)?;
        let fit_mh = fit_quadratic_unweighted(&j_mh, FIT_TMAX)?;
        let (p_mh, p_mh_err) = p_metric(&fit_mh, &fit_ref)?;
        report["l_mh"] = metric_json(l_mh, l_mh_err);
        report["p_mh"] = metric_json(p_mh, p_mh_err);
    }
    mb.add(
        &dir,
        "metrics.json",
        &serde_json::to_string_pretty(&report).unwrap(),
    )?;
    mb.finish(cfg, &dir, report)
}

/// Named reproduction presets over the four model realizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// `m = 0.1` error-vs-radius sweep with both z definitions.
    Fig5Like,
    /// `m = 0.5` error-vs-radius sweep with both z definitions.
    Fig6Like,
    /// All four realizations, fit-metric table over `r = 0..=3`.
    Table1Like,
}

impl Preset {
    pub fn parse(name: &str) -> Result<Preset> {
        match name {
            "fig5-like" => Ok(Preset::Fig5Like),
            "fig6-like" => Ok(Preset::Fig6Like),
            "table1-like" => Ok(Preset::Table1Like),
            other => Err(Error::config(format!(
                "unknown preset `{other}` (expected fig5-like, fig6-like or table1-like)"
            ))),
        }
    }

    fn masses(&self) -> Vec<f64> {
        match self {
            Preset::Fig5Like => vec![0.1],
            Preset::Fig6Like => vec![0.5],
            Preset::Table1Like => vec![0.1, 0.5],
        }
    }
}

/// Per-(realization, radius) metric row produced by a reproduction run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub m: f64,
    pub mu5: f64,
    pub r: usize,
    pub z_next: f64,
    pub z_full: f64,
    pub l_trotter: (f64, f64),
    pub l_noisy: (f64, f64),
    pub l_mh: (f64, f64),
    pub p_noisy: (f64, f64),
    pub p_mh: (f64, f64),
}

/// Simulates one realization once and mitigates it at every radius
/// `0..=rmax`, reusing the same measurement table (hence the same noise and
/// shot streams) across radii.
pub fn radius_sweep(cfg: &RunConfig, rmax: usize) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let (h, obs) = cfg.build_model()?;
    let model = cfg
        .model
        .schwinger
        .as_ref()
        .ok_or_else(|| Error::config("radius sweeps need a schwinger model"))?;
    let q0 = obs.strings();
    let graph = expand_graph(&q0, &h, rmax)?;

    let nt = cfg.grid.trotter_steps;
    let total = cfg.grid.total_time;
    let times = coarse_times(nt, total);
    let initial = ground_state(&h)?;
    let coarse_states = trotter_evolve(&initial, &h, nt, total)?;
    let fine_states = trotter_evolve(&initial, &h, nt * REFERENCE_REFINEMENT, total)?;
    let j_ed = assemble_ideal(&obs, &coarse_states, 1, &times, "ed")?;
    let j_ed_ref = assemble_ideal(&obs, &fine_states, REFERENCE_REFINEMENT, &times, "ED")?;
    let quantities: Vec<PauliString> = graph.nodes()[..graph.layer_size(rmax + 1)?].to_vec();
    let table = measure_table(
        &h,
        &quantities,
        nt,
        total,
        cfg.grid.shots,
        &cfg.noise_spec(),
        &initial,
    )?;
    let j_noisy = assemble_from_table(&obs, &table, &times, "Noisy")?;

    let (l_trotter, l_trotter_err) = l_norm(&j_ed, &j_ed_ref)?;
    let (l_noisy, l_noisy_err) = l_norm(&j_noisy, &j_ed_ref)?;
    let fit_ref = fit_quadratic_unweighted(&j_ed_ref, FIT_TMAX)?;
    let fit_noisy = fit_quadratic_unweighted(&j_noisy, FIT_TMAX)?;
    let (p_noisy, p_noisy_err) = p_metric(&fit_noisy, &fit_ref)?;

    let mut rows = Vec::new();
    for r in 0..=rmax {
        let result = mitigate(&table, &graph, &h, r, &cfg.schedule(), cfg.mitigation.zmode)?;
        let j_mh = assemble_from_mitigation(&obs, graph.nodes(), &result, &times)?;
        let (l_mh, l_mh_err) = l_norm(&j_mh, &j_ed_ref)?;
        let fit_mh = fit_quadratic_unweighted(&j_mh, FIT_TMAX)?;
        let (p_mh, p_mh_err) = p_metric(&fit_mh, &fit_ref)?;
        rows.push(SweepRow {
            m: model.mass,
            mu5: model.mu5,
            r,
            z_next: graph.z_ratio(r, ZMode::Next)?,
            z_full: graph.z_ratio(r, ZMode::Full)?,
            l_trotter: (l_trotter, l_trotter_err),
            l_noisy: (l_noisy, l_noisy_err),
            l_mh: (l_mh, l_mh_err),
            p_noisy: (p_noisy, p_noisy_err),
            p_mh: (p_mh, p_mh_err),
        });
    }
    Ok(rows)
}

fn dat_l_vs_r(rows: &[SweepRow]) -> String {
    let mut out = String::from("# r l_noisy err l_mh err l_trotter\n");
    for row in rows {
        out.push_str(&format!(
            "{} {} {} {} {} {}\n",
            row.r, row.l_noisy.0, row.l_noisy.1, row.l_mh.0, row.l_mh.1, row.l_trotter.0
        ));
    }
    out
}

fn dat_z_vs_r(rows: &[SweepRow]) -> String {
    let mut out = String::from("# r z_next z_full\n");
    for row in rows {
        out.push_str(&format!("{} {} {}\n", row.r, row.z_next, row.z_full));
    }
    out
}

fn dat_p_table(rows: &[SweepRow]) -> String {
    let mut out = String::from("# r m mu5 p_noisy err p_mh err\n");
    for row in rows {
        out.push_str(&format!(
            "{} {} {} {} {} {} {}\n",
            row.r, row.m, row.mu5, row.p_noisy.0, row.p_noisy.1, row.p_mh.0, row.p_mh.1
        ));
    }
    out
}

/// Runs a preset: the `(m, mu5)` realizations at every radius `0..=3`,
/// emitting plot-ready `.dat` files and the metric tables.
pub fn cmd_reproduce(cfg: &RunConfig, preset: Preset) -> Result<RunManifest> {
    cfg.validate()?;
    let dir = cfg.output.dir.clone();
    let mut mb = ManifestBuilder::new("reproduce");
    let rmax = 3;
    let mut jobs: Vec<(f64, f64)> = Vec::new();
    for &m in &preset.masses() {
        for &mu5 in &[0.1, 0.2] {
            jobs.push((m, mu5));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.output.jobs.max(1))
        .build()
        .map_err(|e| Error::config(format!("worker pool: {e}")))?;
    let results: Vec<Result<Vec<SweepRow>>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(m, mu5)| {
                let mut sub = cfg.clone();
                let model = sub
                    .model
                    .schwinger
                    .as_mut()
                    .ok_or_else(|| Error::config("reproduce presets need a schwinger model"))?;
                model.mass = m;
                model.mu5 = mu5;
                sub.output.dir = cfg.output.dir.join(format!("m{m}_mu{mu5}"));
                radius_sweep(&sub, rmax)
            })
            .collect()
    });
    let mut all_rows = Vec::new();
    for ((m, mu5), result) in jobs.iter().zip(results) {
        let rows = result?;
        mb.add(
            &dir,
            &format!("l_vs_r_m{m}_mu{mu5}.dat"),
            &dat_l_vs_r(&rows),
        )?;
        mb.add(
            &dir,
            &format!("z_vs_r_m{m}_mu{mu5}.dat"),
            &dat_z_vs_r(&rows),
        )?;
        all_rows.extend(rows);
    }
    mb.add(&dir, "p_table.dat", &dat_p_table(&all_rows))?;
    let summary = json!({
        "preset": format!("{preset:?}"),
        "rows": all_rows.len(),
        "realizations": jobs.len(),
    });
    mb.finish(cfg, &dir, summary)
}

/// Re-executes the command recorded in a manifest, optionally into another
/// directory; outputs are byte-identical to the original run.
pub fn rerun_manifest(path: &Path, out_override: Option<&Path>) -> Result<RunManifest> {
    let manifest: RunManifest = serde_json::from_str(&std::fs::read_to_string(path)?)
        .map_err(|e| Error::config(format!("bad manifest: {e}")))?;
    let mut cfg = manifest.config.clone();
    if let Some(dir) = out_override {
        cfg.output.dir = dir.to_path_buf();
    }
    match manifest.command.as_str() {
        "hierarchy" => cmd_hierarchy(&cfg),
        "simulate" => cmd_simulate(&cfg),
        "mitigate" => cmd_mitigate(&cfg),
        "metrics" => cmd_metrics(&cfg),
        "reproduce" => {
            let preset = manifest
                .summary
                .get("preset")
                .and_then(|p| p.as_str())
                .map(|p| match p {
                    "Fig5Like" => Ok(Preset::Fig5Like),
                    "Fig6Like" => Ok(Preset::Fig6Like),
                    "Table1Like" => Ok(Preset::Table1Like),
                    other => Preset::parse(other),
                })
                .transpose()?
                .ok_or_else(|| Error::config("manifest lacks the preset"))?;
            cmd_reproduce(&cfg, preset)
        }
        other => Err(Error::config(format!("unknown command `{other}`"))),
    }
}
