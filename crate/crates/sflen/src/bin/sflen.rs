use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use sflen::formats::{fmt_f64, read_lds, write_bank, write_data_csv, write_lds};
use sflen::rundir::{execute_run, regret_of_run, RunArgs};
use sflen::{run_sweep, stream_seed, write_sweep, ExperimentConfig, RegionSpec};
use sflen_core::filterbank::{build_filter_bank, build_tensor_bank, BankKind, DEFAULT_TOL_EIG};
use sflen_core::lds::{gen_inputs, make_random_system, region_bounds, sample_region, simulate, DKind, InputKind};
use sflen_core::learner::Variant;
use sflen_core::regret::DEFAULT_TOL_OPT;

#[derive(Parser)]
#[command(name = "sflen", version, about = "Spectral filtering with limited context: filters, systems, runs, regret and sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral filter banks.
    Filters {
        #[command(subcommand)]
        command: FiltersCmd,
    },
    /// Linear dynamical systems and eigenvalue regions.
    Lds {
        #[command(subcommand)]
        command: LdsCmd,
    },
    /// One online run on data simulated from a system file.
    Run {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, value_parser = parse_variant)]
        variant: Variant,
        #[arg(long = "T")]
        horizon: usize,
        /// Context length is round(T^q).
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 24)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        /// Step scale; the default depends on the slot count and T.
        #[arg(long)]
        eta0: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "unit-sphere", value_parser = parse_inputs)]
        inputs: InputKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Asymmetric regret of a run directory against the full-context comparator.
    Regret {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL_OPT)]
        tol: f64,
    },
    /// A seeded sweep over the q grid of a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a named sweep config (desk or full) as JSON.
    Preset { name: String },
}

#[derive(Subcommand)]
enum FiltersCmd {
    Build {
        #[arg(long = "T")]
        horizon: usize,
        #[arg(long)]
        k: usize,
        /// h, n or tensor.
        #[arg(long, value_parser = parse_bank_kind)]
        kind: BankKind,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum LdsCmd {
    /// Sample eigenvalues from a region and draw B and C with unit spectral norm.
    Make {
        #[arg(long)]
        d_hidden: usize,
        #[arg(long, default_value_t = 8)]
        d_in: usize,
        #[arg(long, default_value_t = 8)]
        d_out: usize,
        /// a, b or interval:LO,HI.
        #[arg(long, value_parser = parse_region)]
        region: RegionSpec,
        #[arg(long = "T")]
        horizon: usize,
        /// Where regions a and b are anchored.
        #[arg(long, default_value_t = 0.875)]
        q: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// zero or identity.
        #[arg(long, default_value = "zero", value_parser = parse_d_kind)]
        d: DKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a system on generated inputs and write the data table.
    Simulate {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, value_parser = parse_inputs)]
        inputs: InputKind,
        #[arg(long = "T")]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bad-band edges for a range of horizons, as CSV.
    Region {
        /// Comma-separated q values.
        #[arg(long, value_delimiter = ',', default_value = "0.875")]
        q: Vec<f64>,
        #[arg(long = "Tmin", default_value_t = 256)]
        t_min: usize,
        #[arg(long = "Tmax", default_value_t = 65536)]
        t_max: usize,
        /// Number of horizons, spaced geometrically.
        #[arg(long, default_value_t = 33)]
        points: usize,
        /// Output path; `-` writes to stdout.
        #[arg(long)]
        emit_csv: PathBuf,
    },
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    Variant::parse(s).ok_or_else(|| format!("expected vanilla, two-ar or tensor, got {s:?}"))
}

fn parse_inputs(s: &str) -> Result<InputKind, String> {
    InputKind::parse(s).ok_or_else(|| format!("expected unit-sphere, rademacher-scaled or constant, got {s:?}"))
}

fn parse_bank_kind(s: &str) -> Result<BankKind, String> {
    BankKind::parse(s).ok_or_else(|| format!("expected h, n or tensor, got {s:?}"))
}

fn parse_region(s: &str) -> Result<RegionSpec, String> {
    RegionSpec::parse(s).ok_or_else(|| format!("expected a, b or interval:LO,HI, got {s:?}"))
}

fn parse_d_kind(s: &str) -> Result<DKind, String> {
    DKind::parse(s).ok_or_else(|| format!("expected zero or identity, got {s:?}"))
}

fn region_csv(qs: &[f64], t_min: usize, t_max: usize, points: usize) -> Result<String> {
    if t_min < 2 || t_max < t_min || points == 0 {
        bail!("need 2 <= Tmin <= Tmax and at least one point");
    }
    let mut horizons: Vec<usize> = (0..points)
        .map(|i| {
            let f = if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
            ((t_min as f64).ln() + f * ((t_max as f64).ln() - (t_min as f64).ln())).exp().round() as usize
        })
        .collect();
    horizons.dedup();
    let mut s = String::from("T,q,variant,lo,hi,empty\n");
    for &q in qs {
        for &t in &horizons {
            for variant in [Variant::Vanilla, Variant::TwoAr] {
                let band = region_bounds(t, q, variant)?.components[0];
                s.push_str(&format!("{t},{q},{},{},{},{}\n", variant.as_str(), fmt_f64(band.lo), fmt_f64(band.hi), band.is_empty()));
            }
        }
    }
    Ok(s)
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Filters { command: FiltersCmd::Build { horizon, k, kind, out } } => {
            let bank = match kind {
                BankKind::Tensor => build_tensor_bank(horizon, k, DEFAULT_TOL_EIG)?,
                _ => build_filter_bank(horizon, k, kind, DEFAULT_TOL_EIG)?,
            };
            write_bank(&out, &bank)?;
            eprintln!("wrote {} filters of length {} to {}", bank.num_filters(), bank.filter_length(), out.display());
        }
        Command::Lds { command } => match command {
            LdsCmd::Make { d_hidden, d_in, d_out, region, horizon, q, seed, d, out } => {
                let reg = region.resolve(horizon, q)?;
                let eig = sample_region(&reg, d_hidden, stream_seed(seed, 0)).context("sampling eigenvalues")?;
                let sys = make_random_system(d_hidden, d_in, d_out, &eig, stream_seed(seed, 1), d)?;
                let notes = [("region", region.name()), ("T", horizon.to_string()), ("q", q.to_string()), ("seed", seed.to_string()), ("D", d.as_str().into())];
                write_lds(&out, &sys, &notes)?;
            }
            LdsCmd::Simulate { system, inputs, horizon, seed, out } => {
                let sys = read_lds(&system)?;
                let u = gen_inputs(inputs, sys.d_in(), horizon, stream_seed(seed, 2))?;
                let y = simulate(&sys, &u, None)?;
                write_data_csv(&out, &u.values, &y)?;
            }
            LdsCmd::Region { q, t_min, t_max, points, emit_csv } => {
                let csv = region_csv(&q, t_min, t_max, points)?;
                if emit_csv.as_os_str() == "-" {
                    emit(&csv)?;
                } else {
                    if let Some(dir) = emit_csv.parent().filter(|d| !d.as_os_str().is_empty()) {
                        std::fs::create_dir_all(dir)?;
                    }
                    std::fs::write(&emit_csv, csv).with_context(|| format!("writing {}", emit_csv.display()))?;
                }
            }
        },
        Command::Run { system, variant, horizon, q, k, r, eta0, seed, inputs, out } => {
            if !(0.0..=1.0).contains(&q) {
                bail!("q must lie in [0, 1]");
            }
            let sys = read_lds(&system)?;
            let meta = execute_run(&sys, &RunArgs { variant, horizon, q, k, r, eta0, seed, inputs }, &out)?;
            if !meta.conditioning_pass {
                eprintln!("warning: inputs fail the conditioning check ({:e} < {:e})", meta.conditioning_min_eigenvalue, meta.conditioning_threshold);
            }
            emit(&(serde_json::to_string_pretty(&meta)? + "\n"))?;
        }
        Command::Regret { run, tol } => {
            let rep = regret_of_run(&run, tol)?;
            emit(&(serde_json::to_string_pretty(&rep)? + "\n"))?;
        }
        Command::Sweep { config, jobs, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let result = run_sweep(&cfg, jobs)?;
            write_sweep(&result, &out)?;
            for s in result.seeds.iter().flatten().filter(|s| !s.conditioning.pass) {
                eprintln!("warning: seed {} fails the conditioning check", s.seed);
            }
            let failed: Vec<_> = result.cells.iter().filter(|c| c.outcome.is_err()).collect();
            for c in &failed {
                eprintln!("cell q={} seed={} failed: {}", c.q, c.seed, c.outcome.as_ref().unwrap_err());
            }
            for a in &result.aggregates {
                if let Some(agg) = &a.aggregate {
                    eprintln!("q={} L={} final-window loss {:.4e}", a.q, a.context, agg.final_window);
                }
            }
            if !failed.is_empty() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Preset { name } => {
            let cfg = ExperimentConfig::preset(&name).with_context(|| format!("unknown preset {name:?}, expected desk or full"))?;
            emit(&(serde_json::to_string_pretty(&cfg)? + "\n"))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
