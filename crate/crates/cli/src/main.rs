use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use strata_chern::geometry::{continuum_chern, filtered_chern_from_qgt};
use strata_chern_cli::config::{load_config, parse_mesh, RunConfig};
use strata_chern_cli::pipeline::{self, prepare};
use strata_chern_cli::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "strata-chern",
    version,
    about = "Lattice Chern numbers and witness-filtered responses of the Haldane model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Random seed (overrides `qfi_scan.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Mesh as NxM (overrides `mesh`).
    #[arg(long, global = true)]
    mesh: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// FHS and analytic Chern numbers at the configured point.
    Chern,
    /// Stagger sweep with jump detection (panels d, e).
    Sweep,
    /// Two-setting tomography of the coherence (panel f).
    Tomography,
    /// Multi-orbital basis-probe scans and reconstruction (panel g).
    Multiorbital,
    /// Continuum integrals of the curvature and filtered curvature.
    Qgt,
    /// Sampled geometric inequalities (panel h).
    Inequalities,
    /// Emit a single panel.
    Figure {
        #[arg(value_parser = ["a", "b", "c", "d", "e", "f", "g", "h"])]
        panel: String,
    },
    /// Emit every panel and summary.json.
    All,
}

fn configure(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.qfi_scan.seed = seed;
    }
    if let Some(mesh) = &cli.mesh {
        cfg.mesh = parse_mesh(mesh)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_json(value: serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(&value).expect("json serializes")
    );
}

fn run(cli: &Cli) -> CliResult<()> {
    let cfg = configure(cli)?;
    match &cli.command {
        Command::Chern => {
            let prep = prepare(&cfg)?;
            print_json(json!({
                "chern_fhs": prep.report.mu,
                "chern_analytic": prep.chern_analytic,
                "total_flux_over_2pi": prep.curvature.total_over_2pi(),
                "mesh": cfg.mesh,
            }));
        }
        Command::Sweep => {
            let sweep = pipeline::run_sweep(&cfg)?;
            let d = pipeline::run_panel(&cfg, 'd')?;
            let e = pipeline::run_panel(&cfg, 'e')?;
            let jumps: Vec<_> = sweep
                .jumps
                .iter()
                .map(|j| json!({"wall_location": j.wall_location, "delta_mu": j.delta_mu, "delta_nu_s": j.delta_nu_s}))
                .collect();
            print_json(
                json!({"jump_records": jumps, "total_delta_mu": sweep.total_delta_mu(), "panels": [d, e]}),
            );
        }
        Command::Tomography => {
            let prep = prepare(&cfg)?;
            let points = pipeline::run_tomography(&prep)?;
            let out = pipeline::run_panel(&cfg, 'f')?;
            print_json(json!({
                "jf": [prep.report.jf.re, prep.report.jf.im],
                "tomography_max_err": pipeline::tomography_max_err(&points),
                "panel": out,
            }));
        }
        Command::Multiorbital => {
            let prep = prepare(&cfg)?;
            let run = pipeline::run_multi(&cfg, &prep)?;
            let out = pipeline::run_panel(&cfg, 'g')?;
            print_json(json!({
                "reconstruction_max_err": run.reconstruction_max_err,
                "probe_max_err": run.probe_max_err,
                "panel": out,
            }));
        }
        Command::Qgt => {
            let prep = prepare(&cfg)?;
            let (nx, ny) = (cfg.mesh.nx, cfg.mesh.ny);
            print_json(json!({
                "theta": prep.theta,
                "continuum_chern": continuum_chern(&prep.params, nx, ny)?,
                "filtered_chern_continuum": filtered_chern_from_qgt(&prep.params, prep.theta, nx, ny)?,
                "nu_s": prep.report.nu_s,
                "chern_fhs": prep.report.mu,
            }));
        }
        Command::Inequalities => {
            let prep = prepare(&cfg)?;
            let report = pipeline::run_inequalities(&cfg, &prep)?;
            let out = pipeline::run_panel(&cfg, 'h')?;
            let stats: Vec<_> = report
                .stats
                .iter()
                .map(|s| json!({"name": s.name, "worst_margin": s.worst_margin, "violations": s.violations.len()}))
                .collect();
            let violations = report.violation_count();
            print_json(json!({
                "seed": report.seed,
                "samples": report.samples,
                "inequalities": stats,
                "global_nu_s_bound": [report.global_lhs, report.global_rhs],
                "inequality_violations": violations,
                "panel": out,
            }));
            if violations > 0 {
                return Err(CliError::Violations(violations));
            }
        }
        Command::Figure { panel } => {
            let ch = panel.chars().next().expect("clap enforces a panel id");
            print_json(json!(pipeline::run_panel(&cfg, ch)?));
        }
        Command::All => {
            let summary = pipeline::run_all(&cfg)?;
            print!("{}", pipeline::describe(&summary));
        }
    }
    Ok(())
}

fn init_threads() {
    if let Some(n) = std::env::var("STRATA_CHERN_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
