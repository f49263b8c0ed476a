use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use whh_cli::config::ParamValues;
use whh_cli::plots::emit_plot_data;
use whh_cli::{run, AnalysisConfig, AnalysisReport, ConfigError};
use whh_core::classify::Property;

const EXIT_VALIDATION: u8 = 1;
const EXIT_PIPELINE: u8 = 2;

#[derive(Parser)]
#[command(name = "whh", version, about = "Regularity analysis of Wiener-Hopf plus Hankel operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline on a JSON config; writes report.json and plot data.
    Analyze {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Classify one symbol given on the command line.
    Classify {
        #[arg(long)]
        symbol: String,
        /// `name=value` or `name=v1,v2,...` for a sweep.
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Regenerate the CSV plot data of an existing report.
    Plots {
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    grid_size: Option<usize>,
    /// Comma-separated section sizes.
    #[arg(long, value_delimiter = ',')]
    schedule: Option<Vec<usize>>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    no_certificates: bool,
    #[arg(long)]
    no_operator_lab: bool,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, cfg: &mut AnalysisConfig) {
        if let Some(m) = self.grid_size {
            cfg.grid_size = m;
        }
        if let Some(s) = &self.schedule {
            cfg.schedule = s.clone();
        }
        if let Some(d) = self.margin {
            cfg.margin = d;
        }
        if self.no_certificates {
            cfg.certificates = false;
        }
        if self.no_operator_lab {
            cfg.operator_lab = false;
        }
        if let Some(dir) = &self.cache_dir {
            cfg.cache_dir = Some(dir.clone());
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
    }
}

fn parse_param(text: &str) -> Result<(String, ParamValues), ConfigError> {
    let bad = || ConfigError::Invalid(format!("expected NAME=VALUE[,VALUE...], got '{text}'"));
    let (name, values) = text.split_once('=').ok_or_else(bad)?;
    let values: Vec<f64> = values
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let values = match values.as_slice() {
        [v] => ParamValues::One(*v),
        _ => ParamValues::Sweep(values),
    };
    Ok((name.trim().to_string(), values))
}

fn print_summary(report: &AnalysisReport) {
    for p in &report.points {
        let bindings: Vec<String> = p.bindings.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!("point {} [{}]", p.index, bindings.join(", "));
        match (&p.result, &p.error) {
            (Some(r), _) => {
                println!("  M = {}, certificates: {}", r.grid_size, r.certificates.len());
                for prop in Property::ALL {
                    let e = r.verdict.get(prop);
                    let flag = if e.heuristic { " (heuristic)" } else { "" };
                    println!("  {:<17} {}{flag}", prop.name(), e.value);
                }
            }
            (None, Some(e)) => println!("  error: {e}"),
            (None, None) => {}
        }
    }
}

fn write_outputs(report: &AnalysisReport, out: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let path = out.join("report.json");
    std::fs::write(&path, report.to_json()?).with_context(|| format!("cannot write {}", path.display()))?;
    emit_plot_data(report, out)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn execute(cfg: AnalysisConfig, write: bool) -> ExitCode {
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    print_summary(&report);
    if write {
        if let Err(e) = write_outputs(&report, &cfg.out_dir) {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_PIPELINE);
        }
    }
    if !report.points.is_empty() && report.failed_points() == report.points.len() {
        return ExitCode::from(EXIT_PIPELINE);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Analyze { config, overrides } => {
            let mut cfg = match AnalysisConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_VALIDATION);
                }
            };
            overrides.apply(&mut cfg);
            execute(cfg, true)
        }
        Command::Classify {
            symbol,
            params,
            overrides,
        } => {
            let mut cfg = AnalysisConfig::new(&symbol);
            for p in &params {
                match parse_param(p) {
                    Ok((name, values)) => {
                        cfg.params.insert(name, values);
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(EXIT_VALIDATION);
                    }
                }
            }
            let write = overrides.out.is_some();
            overrides.apply(&mut cfg);
            execute(cfg, write)
        }
        Command::Plots { report, out } => {
            let parsed = std::fs::read_to_string(&report)
                .map_err(anyhow::Error::from)
                .and_then(|t| Ok(serde_json::from_str::<AnalysisReport>(&t)?));
            let parsed = match parsed {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: cannot read report {}: {e}", report.display());
                    return ExitCode::from(EXIT_VALIDATION);
                }
            };
            let out = out.unwrap_or_else(|| report.parent().map(Path::to_path_buf).unwrap_or_default());
            match emit_plot_data(&parsed, &out) {
                Ok(dirs) => {
                    for d in dirs {
                        println!("{}", d.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(EXIT_PIPELINE)
                }
            }
        }
    }
}
