mod checks;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gbc_lab::flow;
use gbc_lab::inequalities::penrose_check;
use gbc_lab::rotmass::{self, MetricSpec};
use rayon::prelude::*;
use serde::Serialize;

use checks::Checked;
use config::{Overrides, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] gbc_lab::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for a failed assertion, 2 for configuration and domain errors.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(gbc_lab::Error::NoLimit(_)) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gbc-lab", version, about = "Verification batteries for Gauss-Bonnet curvature integrals in hyperbolic space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; the built-in default battery when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; reports go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Quadrature nodes.
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// One relative tolerance for every check.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Restrict to ambient dimension n.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Restrict to order k.
    #[arg(long, global = true)]
    k: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Minkowski formulas, neighbouring-curvature propositions, tensor and evolution identities.
    VerifyIdentities,
    /// The surface inequality battery with hypothesis flags.
    VerifyInequalities,
    /// Mass limits and Penrose checks for rotationally symmetric metrics (JSON).
    Mass,
    /// Flow traces (CSV).
    Flow,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::VerifyIdentities => "verify-identities",
            Command::VerifyInequalities => "verify-inequalities",
            Command::Mass => "mass",
            Command::Flow => "flow",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let over = Overrides { out: cli.out, nodes: cli.nodes, tol: cli.tol, seed: cli.seed, n: cli.n, k: cli.k };
    let result = RunConfig::load(cli.config.as_deref(), cli.command.name(), &over).and_then(|cfg| match cli.command {
        Command::VerifyIdentities => cmd_verify_identities(&cfg),
        Command::VerifyInequalities => cmd_verify_inequalities(&cfg),
        Command::Mass => cmd_mass(&cfg),
        Command::Flow => cmd_flow(&cfg),
    });
    match result {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            eprintln!("{} assertion(s) failed:", failures.len());
            for f in &failures {
                eprintln!("  {f}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Descriptions of failed assertions.
type Failures = Vec<String>;

fn output(dir: Option<&Path>, file: &str) -> Result<Box<dyn Write>, CliError> {
    Ok(match dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            Box::new(std::io::BufWriter::new(std::fs::File::create(d.join(file))?))
        }
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_csv<R: Serialize>(dir: Option<&Path>, file: &str, rows: impl IntoIterator<Item = R>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(output(dir, file)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn describe(row: &checks::DefectRow) -> String {
    let k = row.k.map_or(String::new(), |k| format!(" k={k}"));
    format!("{} n={}{k} {}: lhs={:e} rhs={:e} defect={:e}", row.inequality, row.n, row.surface, row.lhs, row.rhs, row.defect)
}

fn cmd_verify_identities(cfg: &RunConfig) -> Result<Failures, CliError> {
    let rows = checks::identities(cfg)?;
    let failures = rows.iter().filter(|c| c.failed).map(|c| describe(&c.row)).collect();
    write_csv(cfg.out.as_deref(), "identities.csv", rows.iter().map(|c| &c.row))?;
    eprintln!("verify-identities: {} rows", rows.len());
    Ok(failures)
}

fn cmd_verify_inequalities(cfg: &RunConfig) -> Result<Failures, CliError> {
    let rows = checks::inequality_rows(cfg)?;
    let failures = rows
        .iter()
        .filter(|c| c.failed)
        .map(|Checked { row, .. }| {
            let k = row.k.map_or(String::new(), |k| format!(" k={k}"));
            format!("{} n={}{k} {}: defect={:e}", row.inequality, row.n, row.surface, row.defect)
        })
        .collect();
    write_csv(cfg.out.as_deref(), "inequalities.csv", rows.iter().map(|c| &c.row))?;
    eprintln!("verify-inequalities: {} rows", rows.len());
    Ok(failures)
}

fn cmd_mass(cfg: &RunConfig) -> Result<Failures, CliError> {
    let runs: Vec<_> = cfg.mass.iter().filter(|r| cfg.slice_n.is_none_or(|n| n == r.metric.dim()) && cfg.order_selected(r.order().ok())).collect();
    let reports: Vec<rotmass::MassReport> = runs
        .par_iter()
        .map(|run| Ok(rotmass::mass_report(&run.metric, run.order()?, &run.radii)?))
        .collect::<Result<_, CliError>>()?;
    let mut failures = Vec::new();
    for r in &reports {
        let label = checks::metric_label(&r.metric);
        if matches!(r.metric, MetricSpec::AdsSchwarzschild { .. }) && !r.saturated {
            failures.push(format!("{label}: Penrose bound not saturated (limit {:e}, rhs {:?})", r.limit, r.penrose_rhs));
        }
        if let Some(area) = rotmass::horizon_area(&r.metric.build()?) {
            if penrose_check(r.limit, area, r.n, r.k, r.energy_condition_ok)?.fails(cfg.tolerances.penrose) {
                failures.push(format!("{label}: mass {:e} below Penrose bound {:?}", r.limit, r.penrose_rhs));
            }
        }
    }
    let mut w = output(cfg.out.as_deref(), "mass.json")?;
    serde_json::to_writer_pretty(&mut w, &reports)?;
    writeln!(w)?;
    w.flush()?;
    Ok(failures)
}

fn cmd_flow(cfg: &RunConfig) -> Result<Failures, CliError> {
    let runs: Vec<_> = cfg.flow.iter().filter(|r| cfg.slice_n.is_none_or(|n| n == r.n) && cfg.order_selected(Some(r.k))).collect();
    if runs.len() > 1 && cfg.out.is_none() {
        return Err(CliError::Config(format!("{} flow runs need an output directory (--out)", runs.len())));
    }
    let traces: Vec<(String, flow::FlowTrace)> = runs
        .par_iter()
        .map(|run| {
            let s = run.surface.build(run.n)?;
            Ok((s.label().to_string(), flow::run(&s, run.k, run.t_max, &cfg.flow_policy)?))
        })
        .collect::<Result<_, CliError>>()?;
    let mut failures = Vec::new();
    for (i, (label, trace)) in traces.iter().enumerate() {
        let scale = trace.rows[0].e.abs().max(1.0);
        let rise = trace.max_e_increase();
        if rise > cfg.tolerances.flow_monotone * scale {
            failures.push(format!("flow {i} {label}: E increased by {rise:e}"));
        }
        if let Some(row) = trace.rows.iter().find(|r| !r.horo_flag) {
            failures.push(format!("flow {i} {label}: horospherical convexity lost at t = {} (kappa_min {})", row.t, row.kappa_min));
        }
        write_csv(cfg.out.as_deref(), &format!("flow_{i}.csv"), &trace.rows)?;
        eprintln!("flow {i} {label}: {} rows, stop {:?}, extinction estimate {:.6}", trace.rows.len(), trace.stop, trace.extinction_estimate());
    }
    Ok(failures)
}
