use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sgfem::problems::{by_name, PROBLEM_NAMES};
use sgfem_cli::{output_root, reference_run, run_experiment, ReferenceConfig, RunConfig, OUTPUT_ROOT_ENV};

/// Goal-oriented adaptive stochastic Galerkin FEM experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the adaptive loop described by a JSON config.
    Run {
        config: PathBuf,
    },
    /// Compute the overkill reference of a finished run and its effectivity indices.
    Reference {
        run_dir: PathBuf,
        /// Override the configured number of uniform refinements (1 or 2).
        #[arg(long)]
        extra_refinements: Option<usize>,
        /// Override the configured cap on reference degrees of freedom.
        #[arg(long)]
        max_dofs: Option<usize>,
    },
    /// List the built-in problems.
    ListProblems,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command, &output_root()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command, root: &Path) -> sgfem_cli::Result<()> {
    match command {
        Command::Run { config } => {
            let cfg = RunConfig::load(&config)?;
            let dir = cfg.run_dir(root);
            let out = run_experiment(&cfg, &dir)?;
            let s = &out.summary;
            println!(
                "{}: {} after iteration {}, mu*zeta = {:.8e}, G = {:.8e}, N_total = {}",
                s.problem,
                s.status,
                s.final_iteration.unwrap_or(0),
                s.product.unwrap_or(f64::NAN),
                s.goal_value.unwrap_or(f64::NAN),
                s.n_total
            );
            println!("artifacts in {}", out.dir.display());
        }
        Command::Reference { run_dir, extra_refinements, max_dofs } => {
            let overrides = if extra_refinements.is_some() || max_dofs.is_some() {
                let base = RunConfig::load(&run_dir.join(sgfem_cli::run::CONFIG_FILE))?.reference;
                let cfg = ReferenceConfig {
                    extra_refinements: extra_refinements.unwrap_or(base.extra_refinements),
                    max_dofs: max_dofs.unwrap_or(base.max_dofs),
                    ..base
                };
                cfg.validate()?;
                Some(cfg)
            } else {
                None
            };
            let (reference, rows) = reference_run(&run_dir, overrides.as_ref())?;
            println!(
                "G_ref = {:.8e} ({} dofs, {} elements, {} indices)",
                reference.goal_value, reference.dofs, reference.n_elements, reference.card_index_set
            );
            for r in rows {
                println!("iter {:>3}: effectivity {:.8e}", r.iter, r.effectivity);
            }
        }
        Command::ListProblems => {
            for name in PROBLEM_NAMES {
                let p = by_name(name)?;
                let m = p.default_marking;
                println!(
                    "{name}: domain {}, {} terms, tau {:.8e}, theta_x {}, theta_p {}, m_bar {}, tol {:e}",
                    p.domain,
                    p.coefficient.len(),
                    p.coefficient.tau(),
                    m.theta_x,
                    m.theta_p,
                    m.m_bar,
                    m.tol
                );
            }
            println!("output root: {} (set {OUTPUT_ROOT_ENV} to override)", root.display());
        }
    }
    Ok(())
}
