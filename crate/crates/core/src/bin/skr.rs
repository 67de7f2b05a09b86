use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use skr_core::config::{parse_config, Mode, RunConfig};
use skr_core::presets::{figure_preset, FIGURE_IDS};
use skr_core::sweep::{evaluate_point, optimize_mu, run_sweep, MuSearch, Parallelism};
use skr_core::table::{format_g12, ResultTable};

#[derive(Parser)]
#[command(name = "skr", version, about = "Secret-key-rate bounds for free-space links with a restricted eavesdropper")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bounds at a single operating point (needs `mu`).
    Rate {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Run the sweep described in the config and write CSV.
    Sweep {
        #[arg(short, long)]
        config: PathBuf,
        /// Defaults to the config's `output` key, then stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Optimise the input power for the config's `scheme`.
    Optimize {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Write the curve family of a figure as ID_curveN.csv.
    Figure {
        id: String,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Problems with the user's input, as opposed to failed evaluations.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

enum Outcome {
    Clean,
    RowErrors,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::RowErrors) => {
            eprintln!("skr: some rows could not be evaluated (see the flags column)");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("skr: {e:#}");
            if e.downcast_ref::<Invalid>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn parallelism() -> anyhow::Result<Parallelism> {
    match std::env::var("SKR_THREADS") {
        Err(_) => Ok(Parallelism::Auto),
        Ok(v) if v.trim().is_empty() => Ok(Parallelism::Auto),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) => Ok(Parallelism::from_count(n)),
            Err(_) => Err(Invalid(format!("SKR_THREADS must be a non-negative integer, got {v:?}")).into()),
        },
    }
}

fn load(path: &Path, mode: Mode) -> anyhow::Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config = parse_config(&text).map_err(|e| Invalid(format!("{}: {e}", path.display())))?;
    if let Some(m) = config.mode {
        if m != mode {
            bail!(Invalid(format!(
                "{}: mode = {} does not match the `{}` command",
                path.display(),
                m.as_str(),
                mode.as_str()
            )));
        }
    }
    Ok(config)
}

fn run(command: Command) -> anyhow::Result<Outcome> {
    match command {
        Command::Rate { config } => {
            let cfg = load(&config, Mode::Rate)?;
            let Some(mu) = cfg.fixed.mu else {
                bail!(Invalid(format!("{}: mu is required for `rate`", config.display())));
            };
            let mut row = evaluate_point(&cfg.fixed, false, &MuSearch::default())?;
            row.var = mu;
            write_stdout(&ResultTable {
                variable: skr_core::sweep::SweepVariable::Mu,
                comments: Vec::new(),
                rows: vec![row],
            })?;
            Ok(Outcome::Clean)
        }
        Command::Optimize { config } => {
            let cfg = load(&config, Mode::Optimize)?;
            let channel = cfg.fixed.channel()?;
            let params = cfg.fixed.rate_params(0.0)?;
            let report = optimize_mu(&params, cfg.scheme, &MuSearch::default())?;
            let mut out = io::stdout().lock();
            writeln!(out, "scheme = {}", cfg.scheme.as_str())?;
            writeln!(out, "eta = {}", format_g12(channel.eta))?;
            writeln!(out, "kappa = {}", format_g12(channel.kappa))?;
            writeln!(out, "n_e = {}", format_g12(channel.n_e))?;
            writeln!(out, "mu_star = {}", format_g12(report.mu_star))?;
            writeln!(out, "rate_at_star = {}", format_g12(report.rate_at_star))?;
            writeln!(out, "unbounded = {}", report.unbounded)?;
            Ok(Outcome::Clean)
        }
        Command::Sweep { config, output } => {
            let cfg = load(&config, Mode::Sweep)?;
            let Some(spec) = cfg.sweep_spec() else {
                bail!(Invalid(format!("{}: no sweep_var given", config.display())));
            };
            let mut table = run_sweep(&spec, parallelism()?).map_err(|e| Invalid(e.to_string()))?;
            if let Some(label) = &spec.label {
                table.comments.push(format!("label: {label}"));
            }
            match output.or(cfg.output.map(PathBuf::from)) {
                Some(path) => write_file(&path, &table)?,
                None => write_stdout(&table)?,
            }
            Ok(outcome(&[table]))
        }
        Command::Figure { id, output } => {
            let Some(preset) = figure_preset(&id) else {
                bail!(Invalid(format!("unknown figure {id:?}; expected one of {}", FIGURE_IDS.join(", "))));
            };
            let threads = parallelism()?;
            fs::create_dir_all(&output).with_context(|| format!("creating {}", output.display()))?;
            let mut tables = Vec::new();
            for (i, curve) in preset.curves.iter().enumerate() {
                let spec = curve.sweep_spec().expect("presets always describe a sweep");
                let mut table = run_sweep(&spec, threads)?;
                table.comments.push(format!("{}: {}", preset.id, preset.title));
                if let Some(label) = &spec.label {
                    table.comments.push(format!("curve {}: {label}", i + 1));
                }
                table.comments.push(format!(
                    "var: {} [{}]; schemes: {}",
                    spec.variable.as_str(),
                    spec.variable.unit(),
                    spec.schemes.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(",")
                ));
                for note in &preset.notes {
                    table.comments.push(format!("note: {note}"));
                }
                table.comments.push("config:".into());
                for line in curve.to_config_string().lines() {
                    table.comments.push(format!("  {line}"));
                }
                let path = output.join(format!("{}_curve{}.csv", preset.id, i + 1));
                write_file(&path, &table)?;
                tables.push(table);
            }
            Ok(outcome(&tables))
        }
    }
}

fn outcome(tables: &[ResultTable]) -> Outcome {
    if tables.iter().any(ResultTable::has_errors) {
        Outcome::RowErrors
    } else {
        Outcome::Clean
    }
}

fn write_file(path: &Path, table: &ResultTable) -> anyhow::Result<()> {
    table
        .emit_csv(path)
        .with_context(|| format!("writing {}", path.display()))
}

fn write_stdout(table: &ResultTable) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    table.write_csv(&mut out)?;
    Ok(out.flush()?)
}
