//! The `run` command: adaptive loop plus artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sgfem::adapt::{run_with_observer, AdaptiveResult, MarkingParams, Status, CONVERGENCE_HEADER};
use sgfem::mesh::write_mesh;

use crate::config::RunConfig;
use crate::error::{io_err, CliError, Result};

pub const CONFIG_FILE: &str = "config.json";
pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const INDEX_LOG_FILE: &str = "index_sets.log";
pub const MESH_FILE: &str = "final_mesh.txt";
pub const SUMMARY_FILE: &str = "summary.json";
/// Final-iteration indicators: (file name, primal?, spatial?).
pub const INDICATOR_FILES: [(&str, bool, bool); 4] = [
    ("indicators_primal_spatial.csv", true, true),
    ("indicators_primal_parametric.csv", true, false),
    ("indicators_dual_spatial.csv", false, true),
    ("indicators_dual_parametric.csv", false, false),
];

/// Rounds to the nine significant digits used in every artifact.
pub fn sig9(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.8e}").parse().unwrap_or(x)
    } else {
        x
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub problem: String,
    /// "converged", "max_iterations" or "failed".
    pub status: String,
    pub error: Option<String>,
    /// Index L of the last iteration.
    pub final_iteration: Option<usize>,
    pub mu: Option<f64>,
    pub zeta: Option<f64>,
    pub product: Option<f64>,
    pub goal_value: Option<f64>,
    /// Σ_ℓ dim V_ℓ.
    pub n_total: usize,
    pub n_elements: Option<usize>,
    pub card_p: Option<usize>,
    pub active_m: Option<usize>,
    /// Final index set, each index in parenthesized form.
    pub index_set: Vec<String>,
    pub marking: MarkingSummary,
    pub seed: u64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkingSummary {
    pub theta_x: f64,
    pub theta_p: f64,
    pub m_bar: usize,
    pub tol: f64,
    pub max_iterations: usize,
}

impl From<MarkingParams> for MarkingSummary {
    fn from(p: MarkingParams) -> Self {
        MarkingSummary { theta_x: p.theta_x, theta_p: p.theta_p, m_bar: p.m_bar, tol: p.tol, max_iterations: p.max_iterations }
    }
}

impl Summary {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(SUMMARY_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Artifact { path, msg: e.to_string() })
    }
}

/// A finished run and where its artifacts went.
#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub result: AdaptiveResult,
    pub summary: Summary,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable artifact");
    write_file(path, &(text + "\n"))
}

/// Validates `config`, runs the adaptive loop and writes all artifacts to `dir`.
///
/// Nothing is written if the configuration is invalid. If the loop fails, the
/// rows produced so far and a summary with status "failed" remain on disk.
pub fn run_experiment(config: &RunConfig, dir: &Path) -> Result<RunOutcome> {
    config.validate()?;
    let problem = config.problem_spec()?;
    let params = config.marking(&problem);
    params.validate()?;
    let opts = config.solver_options();

    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_json(&dir.join(CONFIG_FILE), config)?;
    let conv_path = dir.join(CONVERGENCE_FILE);
    let log_path = dir.join(INDEX_LOG_FILE);
    let mut conv = create(&conv_path)?;
    let mut log = create(&log_path)?;
    writeln!(conv, "{CONVERGENCE_HEADER}").map_err(io_err(&conv_path))?;

    let mut io_error = None;
    let mut n_total = 0;
    let mut last_seconds = 0.0;
    let outcome = run_with_observer(&problem, &params, &opts, |record, enrichment| {
        n_total += record.dofs;
        last_seconds = record.seconds;
        let mut step = || -> std::io::Result<()> {
            writeln!(conv, "{}", record.csv_row())?;
            conv.flush()?;
            if let Some(e) = enrichment {
                writeln!(log, "{}", e.log_line())?;
                log.flush()?;
            }
            Ok(())
        };
        if let Err(e) = step() {
            io_error.get_or_insert(e);
        }
    });
    drop((conv, log));
    if let Some(e) = io_error {
        return Err(io_err(dir)(e));
    }

    let mut summary = Summary {
        problem: config.problem.clone(),
        status: "failed".into(),
        error: None,
        final_iteration: None,
        mu: None,
        zeta: None,
        product: None,
        goal_value: None,
        n_total,
        n_elements: None,
        card_p: None,
        active_m: None,
        index_set: Vec::new(),
        marking: params.into(),
        seed: config.seed,
        seconds: sig9(last_seconds),
    };
    let result = match outcome {
        Ok(r) => r,
        Err(e) => {
            summary.error = Some(e.to_string());
            write_json(&dir.join(SUMMARY_FILE), &summary)?;
            return Err(e.into());
        }
    };

    let last = result.records.last().expect("at least one iteration");
    summary.status = match result.status {
        Status::Converged => "converged",
        Status::MaxIterations => "max_iterations",
    }
    .into();
    summary.final_iteration = Some(last.iter);
    summary.mu = Some(sig9(last.mu));
    summary.zeta = Some(sig9(last.zeta));
    summary.product = Some(sig9(last.product()));
    summary.goal_value = Some(sig9(last.goal_value));
    summary.n_total = result.total_dofs();
    summary.n_elements = Some(last.n_elements);
    summary.card_p = Some(last.card_p);
    summary.active_m = Some(last.active_m);
    summary.index_set = result.index_set.iter().map(|nu| nu.to_string()).collect();

    write_file(&dir.join(MESH_FILE), &write_mesh(&result.mesh))?;
    for (name, primal, spatial) in INDICATOR_FILES {
        let bundle = if primal { &result.primal_indicators } else { &result.dual_indicators };
        let csv = if spatial { bundle.spatial_csv() } else { bundle.parametric_csv() };
        write_file(&dir.join(name), &csv)?;
    }
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    Ok(RunOutcome { dir: dir.to_path_buf(), result, summary })
}
