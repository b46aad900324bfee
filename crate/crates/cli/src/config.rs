//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sgfem::adapt::{MarkingParams, SolverOptions};
use sgfem::problems::{by_name, ProblemSpec, PROBLEM_NAMES};

use crate::error::{io_err, CliError, Result};

/// Environment variable overriding the directory that relative output paths resolve against.
pub const OUTPUT_ROOT_ENV: &str = "SGFEM_OUTPUT_ROOT";

/// Output root used when [`OUTPUT_ROOT_ENV`] is unset.
pub const DEFAULT_OUTPUT_ROOT: &str = "runs";

/// One adaptive run plus the settings of its reference solution.
///
/// Marking fields left out take the problem's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// One of [`PROBLEM_NAMES`].
    pub problem: String,
    pub theta_x: Option<f64>,
    pub theta_p: Option<f64>,
    pub m_bar: Option<usize>,
    pub tol: Option<f64>,
    pub max_iterations: Option<usize>,
    /// Relative tolerance of the conjugate gradient solves.
    pub solver_tol: Option<f64>,
    /// Run directory; relative paths resolve against the output root.
    /// Defaults to the problem name.
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub reference: ReferenceConfig,
    /// Recorded in the summary; the algorithm itself is deterministic.
    #[serde(default)]
    pub seed: u64,
}

/// Overkill reference: uniform refinements of the final mesh and an enlarged index set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    /// Number of uniform refinements applied to the final mesh, 1 or 2.
    #[serde(default = "default_extra_refinements")]
    pub extra_refinements: usize,
    /// Whether the detail index set of the final index set is added.
    #[serde(default = "default_true")]
    pub include_detail_set: bool,
    /// Refuse to build references with more degrees of freedom than this.
    #[serde(default = "default_max_dofs")]
    pub max_dofs: usize,
}

fn default_extra_refinements() -> usize {
    2
}

fn default_true() -> bool {
    true
}

fn default_max_dofs() -> usize {
    4_000_000
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig {
            extra_refinements: default_extra_refinements(),
            include_detail_set: true,
            max_dofs: default_max_dofs(),
        }
    }
}

impl ReferenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.extra_refinements) {
            return Err(CliError::ConfigValue {
                field: "reference.extra_refinements",
                msg: format!("{} is not 1 or 2", self.extra_refinements),
            });
        }
        Ok(())
    }
}

impl RunConfig {
    /// Minimal configuration for `problem` with all defaults.
    pub fn for_problem(problem: &str) -> Self {
        RunConfig {
            problem: problem.into(),
            theta_x: None,
            theta_p: None,
            m_bar: None,
            tol: None,
            max_iterations: None,
            solver_tol: None,
            output_dir: None,
            reference: ReferenceConfig::default(),
            seed: 0,
        }
    }

    /// Parses and validates JSON text; `origin` names the source in diagnostics.
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::ConfigParse {
            path: origin.into(),
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if !PROBLEM_NAMES.contains(&self.problem.as_str()) {
            return Err(CliError::ConfigValue {
                field: "problem",
                msg: format!("'{}' is not one of {}", self.problem, PROBLEM_NAMES.join(", ")),
            });
        }
        let open_unit = |field, v: Option<f64>| match v {
            Some(v) if !(v > 0.0 && v <= 1.0) => Err(CliError::ConfigValue { field, msg: format!("{v} is outside (0, 1]") }),
            _ => Ok(()),
        };
        open_unit("theta_x", self.theta_x)?;
        open_unit("theta_p", self.theta_p)?;
        let positive = |field, v: Option<f64>| match v {
            Some(v) if !(v > 0.0 && v.is_finite()) => Err(CliError::ConfigValue { field, msg: format!("{v} must be positive") }),
            _ => Ok(()),
        };
        positive("tol", self.tol)?;
        positive("solver_tol", self.solver_tol)?;
        if self.m_bar == Some(0) {
            return Err(CliError::ConfigValue { field: "m_bar", msg: "must be at least 1".into() });
        }
        if self.max_iterations == Some(0) {
            return Err(CliError::ConfigValue { field: "max_iterations", msg: "must be at least 1".into() });
        }
        self.reference.validate()
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        Ok(by_name(&self.problem)?)
    }

    /// Problem defaults overridden by the fields that are set.
    pub fn marking(&self, problem: &ProblemSpec) -> MarkingParams {
        let d = problem.default_marking;
        MarkingParams {
            theta_x: self.theta_x.unwrap_or(d.theta_x),
            theta_p: self.theta_p.unwrap_or(d.theta_p),
            m_bar: self.m_bar.unwrap_or(d.m_bar),
            tol: self.tol.unwrap_or(d.tol),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        let d = SolverOptions::default();
        SolverOptions { tol: self.solver_tol.unwrap_or(d.tol), ..d }
    }

    /// Run directory: `output_dir` resolved against `root`, or `root/<problem>`.
    pub fn run_dir(&self, root: &Path) -> PathBuf {
        match &self.output_dir {
            Some(d) if d.is_absolute() => d.clone(),
            Some(d) => root.join(d),
            None => root.join(&self.problem),
        }
    }
}

/// Output root from [`OUTPUT_ROOT_ENV`], else [`DEFAULT_OUTPUT_ROOT`].
pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_problem_defaults() {
        let cfg = RunConfig::from_json(r#"{"problem": "experiment2_sigma2"}"#, "inline").unwrap();
        let problem = cfg.problem_spec().unwrap();
        assert_eq!(cfg.marking(&problem), problem.default_marking);
        assert_eq!(cfg.reference, ReferenceConfig::default());
        assert_eq!(cfg.run_dir(Path::new("/out")), PathBuf::from("/out/experiment2_sigma2"));
    }

    #[test]
    fn overrides_apply() {
        let cfg = RunConfig::from_json(
            r#"{"problem": "experiment1", "theta_x": 0.25, "tol": 1e-3, "output_dir": "a/b", "reference": {"extra_refinements": 1}}"#,
            "inline",
        )
        .unwrap();
        let m = cfg.marking(&cfg.problem_spec().unwrap());
        assert_eq!((m.theta_x, m.theta_p, m.tol), (0.25, 0.9, 1e-3));
        assert_eq!(cfg.reference.extra_refinements, 1);
        assert!(cfg.reference.include_detail_set);
        assert_eq!(cfg.run_dir(Path::new("r")), PathBuf::from("r/a/b"));
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let err = RunConfig::from_json("{\n  \"problem\": \"experiment1\",\n  \"theta\": 0.5\n}", "cfg.json").unwrap_err();
        match err {
            CliError::ConfigParse { line, msg, .. } => {
                assert_eq!(line, 3);
                assert!(msg.contains("theta"), "{msg}");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn invalid_values_name_the_field() {
        for (json, field) in [
            (r#"{"problem": "experiment1", "theta_x": 0}"#, "theta_x"),
            (r#"{"problem": "experiment1", "theta_p": 1.5}"#, "theta_p"),
            (r#"{"problem": "experiment1", "tol": -1}"#, "tol"),
            (r#"{"problem": "experiment1", "m_bar": 0}"#, "m_bar"),
            (r#"{"problem": "nope"}"#, "problem"),
            (r#"{"problem": "experiment1", "reference": {"extra_refinements": 3}}"#, "reference.extra_refinements"),
        ] {
            match RunConfig::from_json(json, "inline").unwrap_err() {
                CliError::ConfigValue { field: f, .. } => assert_eq!(f, field),
                e => panic!("{json}: unexpected {e}"),
            }
        }
    }

    #[test]
    fn output_root_follows_the_environment() {
        std::env::set_var(OUTPUT_ROOT_ENV, "/tmp/elsewhere");
        assert_eq!(output_root(), PathBuf::from("/tmp/elsewhere"));
        std::env::remove_var(OUTPUT_ROOT_ENV);
        assert_eq!(output_root(), PathBuf::from(DEFAULT_OUTPUT_ROOT));
    }

    #[test]
    fn shipped_configs_are_valid() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut n = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            let cfg = RunConfig::load(&path).unwrap();
            let problem = cfg.problem_spec().unwrap();
            assert_eq!(cfg.marking(&problem), problem.default_marking, "{}", path.display());
            n += 1;
        }
        assert_eq!(n, sgfem::problems::PROBLEM_NAMES.len());
    }
}
