use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use camrobust::bench::{
    cmd_correlate, cmd_degrade, cmd_iqa, cmd_pq, cmd_report, default_workers, parse_factors, parse_severities,
    parse_size, CorrelateOptions, DegradeOptions, IqaOptions, PqOptions, ReportOptions,
};
use camrobust::correlate::CorrelationMode;
use camrobust::degrade::Factor;
use camrobust::iqa::IqaConfig;
use camrobust::pq::Averaging;
use camrobust::{DepthIngest, DepthMode, Error, Result};

#[derive(Parser)]
#[command(name = "camrobust", version, about = "Camera degradation benchmark pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Workers {
    /// Worker threads [default: $CAMROBUST_WORKERS or all cores]
    #[arg(long)]
    workers: Option<usize>,
}

impl Workers {
    fn get(&self) -> usize {
        self.workers.unwrap_or_else(default_workers)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize degraded copies of a directory of images
    Degrade {
        #[arg(long)]
        input: PathBuf,
        /// Directory of 16-bit depth PNGs named after the image stems
        #[arg(long)]
        depth: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated factor names, or `all`
        #[arg(long, default_value = "all")]
        factors: String,
        /// Comma-separated severities in 1..=3, or `all`
        #[arg(long, default_value = "all")]
        severities: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// WIDTHxHEIGHT or `original`
        #[arg(long, default_value = "1024x512")]
        size: String,
        #[arg(long, value_enum, default_value = "depth")]
        depth_mode: DepthModeArg,
        /// Meters (depth) or disparity pixels (disparity) per raw unit
        #[arg(long, default_value_t = 1.0)]
        depth_scale: f64,
        /// Baseline times focal length for disparity input
        #[arg(long)]
        baseline_focal: Option<f64>,
        /// Parameter override as factor.key=value (repeatable)
        #[arg(long = "set", value_name = "FACTOR.KEY=VALUE")]
        overrides: Vec<String>,
        #[command(flatten)]
        workers: Workers,
    },
    /// Score a degraded tree against its clean references
    Iqa {
        #[arg(long)]
        input: PathBuf,
        /// Root of the degraded tree
        #[arg(long)]
        degraded: PathBuf,
        /// Per-image CSV (a `_summary` CSV is written next to it)
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        workers: Workers,
    },
    /// Panoptic quality of a prediction tree against ground truth
    Pq {
        /// Ground-truth panoptic PNG + JSON pairs
        #[arg(long)]
        gt: PathBuf,
        /// Root of the prediction tree
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Pool counts over categories instead of averaging per category
        #[arg(long)]
        global: bool,
        #[command(flatten)]
        workers: Workers,
    },
    /// PLCC / SRCC between IQ and PQ tables
    Correlate {
        #[arg(long)]
        iqa: PathBuf,
        #[arg(long)]
        pq: PathBuf,
        #[arg(long, value_enum, default_value = "factor")]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated IQ columns [default: all numeric columns]
        #[arg(long)]
        iq_columns: Option<String>,
        /// Comma-separated PQ columns [default: pq]
        #[arg(long)]
        pq_columns: Option<String>,
    },
    /// Render a Markdown report from the pipeline outputs
    Report {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        iqa: Option<PathBuf>,
        #[arg(long)]
        pq: Option<PathBuf>,
        #[arg(long)]
        correlation: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum DepthModeArg {
    Depth,
    Disparity,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Image,
    Factor,
}

fn parse_overrides(items: &[String]) -> Result<BTreeMap<Factor, BTreeMap<String, f64>>> {
    let mut out: BTreeMap<Factor, BTreeMap<String, f64>> = BTreeMap::new();
    for item in items {
        let bad = || Error::InvalidArgument(format!("override must be factor.key=value, got `{item}`"));
        let (lhs, value) = item.split_once('=').ok_or_else(bad)?;
        let (factor, key) = lhs.split_once('.').ok_or_else(bad)?;
        let value = value.trim().parse::<f64>().map_err(|_| bad())?;
        out.entry(factor.trim().parse()?).or_default().insert(key.trim().to_string(), value);
    }
    Ok(out)
}

fn split_list(s: Option<String>) -> Option<Vec<String>> {
    s.map(|s| s.split(',').map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Degrade {
            input,
            depth,
            out,
            factors,
            severities,
            seed,
            size,
            depth_mode,
            depth_scale,
            baseline_focal,
            overrides,
            workers,
        } => {
            let mut opts = DegradeOptions::new(input, out);
            opts.depth = depth;
            opts.depth_ingest = DepthIngest {
                mode: match depth_mode {
                    DepthModeArg::Depth => DepthMode::Depth,
                    DepthModeArg::Disparity => DepthMode::Disparity,
                },
                scale: depth_scale,
                baseline_focal,
            };
            opts.factors = parse_factors(&factors)?;
            opts.severities = parse_severities(&severities)?;
            opts.seed = seed;
            opts.size = parse_size(&size)?;
            opts.overrides = parse_overrides(&overrides)?;
            opts.workers = workers.get();
            let outcome = cmd_degrade(&opts)?;
            eprintln!(
                "wrote {} images and {} ({} tasks skipped)",
                outcome.manifest.records.len(),
                outcome.manifest_path.display(),
                outcome.manifest.skipped.len()
            );
            Ok(if outcome.is_partial() { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Iqa {
            input,
            degraded,
            out,
            workers,
        } => {
            let rows = cmd_iqa(&IqaOptions {
                reference: input,
                test_root: degraded,
                out_csv: out.clone(),
                config: IqaConfig::default(),
                workers: workers.get(),
            })?;
            eprintln!("scored {} images into {}", rows.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Pq {
            gt,
            pred,
            out,
            global,
            workers,
        } => {
            let outcome = cmd_pq(&PqOptions {
                gt,
                pred_root: pred,
                out: out.clone(),
                averaging: if global { Averaging::Global } else { Averaging::Category },
                workers: workers.get(),
            })?;
            eprintln!(
                "evaluated {} predictions ({} missing) into {}",
                outcome.rows.len(),
                outcome.missing.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Correlate {
            iqa,
            pq,
            mode,
            out,
            iq_columns,
            pq_columns,
        } => {
            let report = cmd_correlate(&CorrelateOptions {
                iqa_csv: iqa,
                pq_csv: pq,
                mode: match mode {
                    ModeArg::Image => CorrelationMode::Image,
                    ModeArg::Factor => CorrelationMode::Factor,
                },
                out: out.clone(),
                iq_columns: split_list(iq_columns),
                pq_columns: split_list(pq_columns),
            })?;
            eprintln!(
                "{}x{} correlation matrix written to {}",
                report.rows.len(),
                report.cols.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Report {
            manifest,
            iqa,
            pq,
            correlation,
            out,
        } => {
            cmd_report(&ReportOptions {
                manifest,
                iqa,
                pq,
                correlation,
                out: out.clone(),
            })?;
            eprintln!("report written to {}", out.join("report.md").display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
