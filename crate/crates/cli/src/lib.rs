//! Configuration-driven benchmark runs and result export.

pub mod config;
pub mod export;
pub mod problem;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fibermem_core::fem::StateProblem;
use fibermem_core::optimizer::{initial_design, optimize, OptimizationResult};
use log::info;
use serde::{Deserialize, Serialize};

pub use config::{load_config, parse_config, ExportFormat, GeometryConfig, InitMode, RunConfig};
pub use export::export_fields;
pub use problem::{build_benchmark, Benchmark};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] fibermem_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Machine-readable outcome of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub converged: bool,
    pub compliance: f64,
    pub volume: f64,
    pub volume_budget: f64,
    pub oc_updates: usize,
    pub rotation_updates: usize,
    pub elements: usize,
    pub nodes: usize,
    /// Largest `|A/Lambda - 1|` over interior design variables.
    pub kkt_stationarity: Option<f64>,
    pub kkt_bound_sign: Option<f64>,
    pub kkt_complementarity: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub benchmark: Benchmark,
    pub result: OptimizationResult,
    pub summary: Summary,
}

impl RunOutcome {
    /// 0 when converged, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.summary.converged {
            0
        } else {
            2
        }
    }
}

/// Builds the problem, optimizes it and returns the result without writing anything.
pub fn solve(config: &RunConfig) -> Result<RunOutcome, CliError> {
    config.validate()?;
    let start = Instant::now();
    let benchmark = build_benchmark(config)?;
    let material = config.material()?;
    let problem = StateProblem::new(&benchmark.mesh, material, &benchmark.loads)?;
    let design0 = initial_design(
        &problem,
        config.bounds()?,
        config.design.volume,
        config.design.init_direction.into(),
    )?;
    let result = optimize(&problem, &design0, &config.settings())?;
    let kkt = result.kkt;
    let summary = Summary {
        converged: result.converged,
        compliance: result.state.compliance,
        volume: result.design.volume(),
        volume_budget: result.design.volume_budget,
        oc_updates: result.oc_updates,
        rotation_updates: result.rotation_updates,
        elements: benchmark.mesh.num_elements(),
        nodes: benchmark.mesh.num_nodes(),
        kkt_stationarity: kkt.map(|k| k.stationarity),
        kkt_bound_sign: kkt.map(|k| k.bound_sign),
        kkt_complementarity: kkt.map(|k| k.complementarity),
        seconds: start.elapsed().as_secs_f64(),
    };
    info!(
        "{} after {} OC and {} orientation updates: compliance {:e}",
        if summary.converged {
            "converged"
        } else {
            "not converged"
        },
        summary.oc_updates,
        summary.rotation_updates,
        summary.compliance
    );
    drop(problem);
    Ok(RunOutcome {
        benchmark,
        result,
        summary,
    })
}

/// Runs `config` and writes its artifacts into the configured output directory.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    let dir = &config.output.directory;
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    export::write_bytes(&dir.join("config.toml"), config.to_toml().as_bytes())?;
    let outcome = solve(config)?;
    write_artifacts(config, &outcome, dir)?;
    Ok(outcome)
}

fn write_artifacts(config: &RunConfig, outcome: &RunOutcome, dir: &Path) -> Result<(), CliError> {
    let mesh = &outcome.benchmark.mesh;
    let r = &outcome.result;
    let mut formats = config.output.formats.clone();
    formats.sort();
    formats.dedup();
    for format in formats {
        match format {
            ExportFormat::Csv => {
                export::write_bytes(&dir.join("history.csv"), &export::history_csv(&r.history)?)?;
                export::write_bytes(
                    &dir.join("design.csv"),
                    &export::design_csv(mesh, &r.design, &r.state)?,
                )?;
            }
            ExportFormat::Vtk => export_fields(mesh, &r.design, &r.state, &dir.join("fields.vtk"))?,
            ExportFormat::Json => {
                let json = serde_json::to_string_pretty(&outcome.summary)
                    .map_err(|e| CliError::Config(format!("summary: {e}")))?;
                export::write_bytes(&dir.join("summary.json"), json.as_bytes())?;
            }
        }
    }
    Ok(())
}
