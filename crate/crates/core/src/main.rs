use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hqram::analytics::{
    bb_infidelity_bound, bb_resources, ft_infidelity_bound, ft_resources, uniform_resources, AnalyticsError,
    BoundInputs,
};
use hqram::circuit::Architecture;
use hqram::harness::config::{parse_pairs, KEYS};
use hqram::harness::report::ReportError;
use hqram::harness::{
    compare_resources, emit_report, fit_scaling, matching_bound, run_sweep, ExperimentConfig, ExperimentReport, Format,
    HarnessError, HeteroSource,
};
use hqram::noise::ProfileKind;

#[derive(Parser)]
#[command(name = "hqram", version, about = "QRAM error-scaling simulator and resource estimator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo infidelity sweep.
    Sim(Common),
    /// Closed-form infidelity bounds.
    Bounds(Common),
    /// Physical qubit counts per architecture.
    Resources(Common),
    /// Uniform-vs-heterogeneous qubit counts at equal infidelity.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Use simulated heterogeneous infidelities where the depth allows.
        #[arg(long)]
        simulate: bool,
    },
    /// Log-log scaling exponents from a `sim` CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat key=value file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    arch: Option<String>,
    #[arg(long)]
    routers: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long = "p-prime")]
    p_prime: Option<String>,
    #[arg(long = "epsilon-prime")]
    epsilon_prime: Option<String>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long = "address-mode")]
    address_mode: Option<String>,
    #[arg(long)]
    database: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    format: Option<String>,
}

impl Common {
    fn flags(&self) -> [(&'static str, &Option<String>); 14] {
        [
            ("arch", &self.arch),
            ("routers", &self.routers),
            ("n", &self.n),
            ("p-prime", &self.p_prime),
            ("epsilon-prime", &self.epsilon_prime),
            ("c", &self.c),
            ("s", &self.s),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("profile", &self.profile),
            ("address-mode", &self.address_mode),
            ("database", &self.database),
            ("out", &self.out),
            ("format", &self.format),
        ]
    }

    fn resolve(&self) -> Result<ExperimentConfig, HarnessError> {
        debug_assert!(self.flags().iter().all(|(k, _)| KEYS.contains(k)));
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(ReportError::Io)?;
            for (k, v) in parse_pairs(&text)? {
                cfg.set(&k, &v)?;
            }
        }
        for (k, v) in self.flags() {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_rows<T: Serialize>(rows: &[T], format: Format, out: Option<&PathBuf>) -> Result<(), HarnessError> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut buf);
            for r in rows {
                w.serialize(r).map_err(ReportError::Csv)?;
            }
            w.flush().map_err(ReportError::Io)?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, rows).map_err(ReportError::Json)?;
            buf.push(b'\n');
        }
    }
    match out {
        Some(p) => fs::write(p, buf).map_err(ReportError::Io)?,
        None => io::stdout().lock().write_all(&buf).map_err(ReportError::Io)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundRow {
    architecture: Architecture,
    router_kind: String,
    n: u32,
    p_prime: f64,
    bound: f64,
    vacuous: bool,
    /// Large-n closed form, where one exists.
    limit: Option<f64>,
}

#[derive(Serialize)]
struct ResourceRow {
    architecture: Architecture,
    n: u32,
    profile: String,
    physical_qubits: u128,
    per_address: f64,
}

#[derive(Serialize)]
struct FitRow {
    architecture: Architecture,
    router_kind: String,
    exponent: f64,
    r_squared: f64,
    used_points: usize,
}

fn bounds(cfg: &ExperimentConfig) -> Result<Vec<BoundRow>, HarnessError> {
    let mut rows = Vec::new();
    for &arch in &cfg.architectures {
        for n in cfg.n.iter() {
            let inputs = BoundInputs::new(n, cfg.params, cfg.cost)?;
            let bound = matching_bound(arch, cfg.router_kind, &inputs, cfg.profile_for(arch))?;
            let limit = match arch {
                Architecture::FtHetero => Some(ft_infidelity_bound(&inputs).closed_form),
                Architecture::BbHetero => Some(bb_infidelity_bound(&inputs).asymptotic),
                _ => None,
            };
            rows.push(BoundRow {
                architecture: arch,
                router_kind: cfg.router_kind.to_string(),
                n,
                p_prime: cfg.params.p_ratio(),
                bound,
                vacuous: bound > 1.0,
                limit,
            });
        }
    }
    Ok(rows)
}

fn resources(cfg: &ExperimentConfig) -> Result<Vec<ResourceRow>, HarnessError> {
    let mut rows = Vec::new();
    for &arch in &cfg.architectures {
        let profile = cfg.profile_for(arch);
        for n in cfg.n.iter() {
            let est = match (arch, profile) {
                (Architecture::FtHetero, p) => ft_resources(n, p == ProfileKind::OddPaired)?,
                (Architecture::BbHetero, p) => bb_resources(n, p == ProfileKind::OddPaired)?,
                (Architecture::UniformBb, ProfileKind::Uniform(d)) => uniform_resources(n, d)?,
                _ => return Err(HarnessError::NoBound { arch, profile }),
            };
            rows.push(ResourceRow {
                architecture: arch,
                n,
                profile: profile.to_string(),
                physical_qubits: est.physical_total,
                per_address: est.physical_total as f64 / (1u128 << n) as f64,
            });
        }
    }
    Ok(rows)
}

fn fit(input: &PathBuf) -> Result<Vec<FitRow>, HarnessError> {
    let text = fs::read_to_string(input).map_err(ReportError::Io)?;
    let report = ExperimentReport::parse_csv(&text)?;
    let mut groups: BTreeMap<_, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &report.rows {
        groups.entry((r.architecture, r.router_kind)).or_default().push((r.n as f64, r.mean_infidelity));
    }
    groups
        .into_iter()
        .map(|((arch, rk), pts)| {
            let f = fit_scaling(&pts)?;
            Ok(FitRow {
                architecture: arch,
                router_kind: rk.to_string(),
                exponent: f.exponent,
                r_squared: f.r_squared,
                used_points: f.used_points,
            })
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Sim(common) => {
            let cfg = common.resolve()?;
            if cfg.exceeds_superposition_cap() {
                log::warn!("depths above the superposition ceiling will be refused; use --address-mode basis");
            }
            let report = run_sweep(&cfg)?;
            emit_report(&report, cfg.format, cfg.out.as_deref())?;
        }
        Command::Bounds(common) => {
            let cfg = common.resolve()?;
            write_rows(&bounds(&cfg)?, cfg.format, cfg.out.as_ref())?;
        }
        Command::Resources(common) => {
            let cfg = common.resolve()?;
            write_rows(&resources(&cfg)?, cfg.format, cfg.out.as_ref())?;
        }
        Command::Compare { common, simulate } => {
            let cfg = common.resolve()?;
            let source = if simulate {
                HeteroSource::Simulated { trials: cfg.trials, seed: cfg.seed }
            } else {
                HeteroSource::Analytic
            };
            let efficient = cfg.profile == Some(ProfileKind::OddPaired);
            let mut rows = Vec::new();
            for &arch in cfg.architectures.iter().filter(|a| a.is_heterogeneous()) {
                for n in cfg.n.iter() {
                    let inputs = BoundInputs::new(n, cfg.params, cfg.cost)?;
                    match compare_resources(n, arch, &inputs, efficient, source) {
                        Ok(row) => rows.push(row),
                        Err(HarnessError::Analytics(AnalyticsError::Target(t))) => {
                            log::warn!(
                                "skipping {arch} n={n}: heterogeneous infidelity {t:.4} leaves nothing to match"
                            );
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
            write_rows(&rows, cfg.format, cfg.out.as_ref())?;
        }
        Command::Fit { input, out, format } => {
            let format = match format {
                Some(f) => f.parse().map_err(|e: String| hqram::harness::config::ConfigError::Invalid(e))?,
                None => Format::Csv,
            };
            write_rows(&fit(&input)?, format, out.as_ref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
