use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use tgp_bench::config::{ExperimentConfig, ExperimentId};
use tgp_bench::demo::{demo_csv, eigenvalue_demo};
use tgp_bench::probes::{parse_manifold, probe_csv, run_probes, Lemma};
use tgp_bench::report::{write_report, Format};
use tgp_bench::runner::run_experiment;
use tgp_bench::sweep::{parse_grid, sweep_csv, sweep_parameter, SweepParam};

#[derive(Parser)]
#[command(name = "tgp-bench", about = "Benchmarks and probes for transformed gradient projection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of instances; overrides the config file (use 500 for the full batch).
    #[arg(long, global = true)]
    instances: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a config file.
    Run { config: PathBuf },
    /// Sweep a or ρ over a grid `start:step:stop`.
    Sweep {
        config: PathBuf,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long)]
        grid: String,
    },
    /// Geometry probes on `st:r:n`, `gr:p:n` or `sphere:n`.
    Probe {
        manifold: String,
        #[arg(long, value_enum, default_value = "all")]
        lemma: Lemma,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Trajectory data for the small demo scenarios.
    Demo {
        #[arg(value_parser = ["eigenvalue"])]
        which: String,
    },
}

fn load(path: &Path, common: &Common) -> anyhow::Result<ExperimentConfig> {
    let mut c = ExperimentConfig::load(path)?;
    if let Some(s) = common.seed {
        c.seed = s;
    }
    if let Some(n) = common.instances {
        c.instances = n;
    }
    c.validate()?;
    Ok(c)
}

fn write(out_dir: &Path, name: &str, text: &str) -> anyhow::Result<()> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let path = out_dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: serde::Serialize>(out_dir: &Path, name: &str, value: &T) -> anyhow::Result<()> {
    write(out_dir, name, &serde_json::to_string_pretty(value)?)
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let common = &cli.common;
    let seed = common.seed.unwrap_or(tgp_bench::config::DEFAULT_SEED);
    match &cli.command {
        Command::Run { config } => {
            let c = load(config, common)?;
            match c.experiment {
                ExperimentId::EigenvalueDemo => return demo(common),
                ExperimentId::GeometryProbe => {
                    let kind = parse_manifold(&c.manifold)?;
                    return probe(common, run_probes(kind, Lemma::All, c.samples, c.seed)?);
                }
                _ => {}
            }
            let result = run_experiment(&c)?;
            write_report(&result, &common.out_dir, common.format)?;
            for row in &result.metrics.rows {
                eprintln!(
                    "{:10} niter {:8.2} nglobal {:>4} nsuper {:>4} nfail {}",
                    row.algorithm,
                    row.n_iter_mean,
                    row.n_global.map_or("-".to_string(), |n| n.to_string()),
                    row.n_super,
                    row.n_fail
                );
            }
            eprintln!("wrote {}", common.out_dir.display());
        }
        Command::Sweep { config, param, grid } => {
            let c = load(config, common)?;
            let res = sweep_parameter(&c, *param, &parse_grid(grid)?)?;
            match common.format {
                Format::Csv => write(&common.out_dir, "sweep.csv", &sweep_csv(&res)?)?,
                Format::Json => write_json(&common.out_dir, "sweep.json", &res)?,
            }
        }
        Command::Probe { manifold, lemma, samples } => {
            let kind = parse_manifold(manifold)?;
            probe(common, run_probes(kind, *lemma, *samples, seed)?)?;
        }
        Command::Demo { .. } => demo(common)?,
    }
    Ok(())
}

fn demo(common: &Common) -> anyhow::Result<()> {
    let rows = eigenvalue_demo()?;
    match common.format {
        Format::Csv => write(&common.out_dir, "demo.csv", &demo_csv(&rows)?),
        Format::Json => write_json(&common.out_dir, "demo.json", &rows),
    }
}

fn probe(common: &Common, reports: Vec<tgp_core::probe::ProbeReport>) -> anyhow::Result<()> {
    for r in &reports {
        eprintln!(
            "{:20} delta {:>8} violations {:>5} {:?}",
            r.lemma,
            r.delta.map_or("-".into(), |d| format!("{d:.4}")),
            r.violations,
            r.fitted
        );
    }
    match common.format {
        Format::Csv => write(&common.out_dir, "probe.csv", &probe_csv(&reports)?),
        Format::Json => write_json(&common.out_dir, "probe.json", &reports),
    }
}
