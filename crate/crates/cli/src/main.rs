use std::path::PathBuf;
use std::process::ExitCode;

use celm_core::bench::{
    emit_report, parse_seeds, run_experiment, run_suite, CkksProfile, ExperimentConfig, HiddenSpec, ReportFormat,
    SuiteManifest, Variant,
};
use celm_core::elm::OutputMode;
use celm_core::CoreError;
use clap::{Args, Parser, Subcommand};

mod fetch;
mod split;

#[derive(Parser)]
#[command(name = "celm", version, about = "Chaotic extreme learning machines on plaintext and CKKS-encrypted data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its report.
    Run(RunArgs),
    /// Download the public datasets and record their checksums.
    FetchData {
        #[arg(long, default_value = "data")]
        dir: PathBuf,
        /// Only these datasets (default: every schema with a source).
        #[arg(long, value_delimiter = ',')]
        dataset: Vec<String>,
        #[arg(long)]
        allow_checksum_mismatch: bool,
    },
    /// Run a batch of experiments from a manifest.
    Suite {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Key-holder steps of a two-party run.
    #[command(subcommand)]
    Owner(split::OwnerCommand),
    /// Evaluator steps of a two-party run. Never reads the secret key.
    #[command(subcommand)]
    Evaluator(split::EvaluatorCommand),
}

#[derive(Args)]
struct RunArgs {
    /// key = value manifest; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    variants: Option<String>,
    /// Hidden node counts, `input` for the feature count.
    #[arg(long)]
    hidden: Option<String>,
    /// Seeds, e.g. `0-9` or `1,5,7`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    split: Option<f64>,
    #[arg(long)]
    split_seed: Option<u64>,
    #[arg(long)]
    output_mode: Option<String>,
    #[arg(long)]
    ckks_profile: Option<String>,
    #[arg(long)]
    smote_after_split: bool,
    #[arg(long)]
    scale_on_all: bool,
    #[arg(long)]
    allow_checksum_mismatch: bool,
    #[arg(long, default_value = "reports")]
    report_dir: PathBuf,
    #[arg(long, default_value = "md,csv")]
    format: String,
}

fn list<T>(s: &str, f: impl Fn(&str) -> celm_core::Result<T>) -> celm_core::Result<Vec<T>> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(f).collect()
}

fn build_config(a: &RunArgs) -> celm_core::Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::from_manifest(&std::fs::read_to_string(path)?)?,
        None => {
            let name = a.dataset.as_deref().ok_or_else(|| CoreError::Invalid("--dataset is required".into()))?;
            ExperimentConfig::new(name)
        }
    };
    if let Some(d) = &a.dataset {
        cfg.dataset = d.clone();
    }
    if let Some(d) = &a.data_dir {
        cfg.data_dir = d.clone();
    }
    if let Some(v) = &a.variants {
        cfg.variants = list(v, Variant::parse)?;
    }
    if let Some(h) = &a.hidden {
        cfg.hidden = list(h, HiddenSpec::parse)?;
    }
    if let Some(s) = &a.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    if let Some(f) = a.split {
        cfg.split.train_fraction = f;
    }
    if let Some(s) = a.split_seed {
        cfg.split.seed = s;
    }
    if let Some(m) = &a.output_mode {
        cfg.output_modes = list(m, OutputMode::parse)?;
    }
    if let Some(p) = &a.ckks_profile {
        cfg.ckks_profile = CkksProfile::parse(p)?;
    }
    cfg.smote_before_split &= !a.smote_after_split;
    cfg.scale_on_all |= a.scale_on_all;
    cfg.allow_checksum_mismatch |= a.allow_checksum_mismatch;
    cfg.validate()?;
    Ok(cfg)
}

fn run(a: RunArgs) -> celm_core::Result<()> {
    let cfg = build_config(&a)?;
    let formats = list(&a.format, ReportFormat::parse)?;
    let report = run_experiment(&cfg)?;
    for f in formats {
        let path = emit_report(&report, f, &a.report_dir)?;
        eprintln!("wrote {}", path.display());
    }
    print!("{}", report.to_markdown().split("\n## ").next().unwrap_or_default());
    Ok(())
}

fn suite(manifest: PathBuf) -> celm_core::Result<ExitCode> {
    let text = std::fs::read_to_string(&manifest)?;
    let base = manifest.parent().map(PathBuf::from).unwrap_or_default();
    let m = SuiteManifest::parse(&text, &base)?;
    let out = run_suite(&m)?;
    for e in &out.entries {
        match &e.outcome {
            Ok((_, paths)) => {
                for p in paths {
                    eprintln!("wrote {}", p.display());
                }
            }
            Err(msg) => eprintln!("{}: failed: {msg}", e.dataset),
        }
    }
    eprintln!("wrote {}", out.summary.display());
    if out.failures() > 0 {
        eprintln!("{} of {} datasets failed", out.failures(), out.entries.len());
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_code(e: &CoreError) -> ExitCode {
    if e.is_validation() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let ok = |r: celm_core::Result<()>| r.map(|()| ExitCode::SUCCESS);
    let result = match cli.command {
        Command::Run(a) => ok(run(a)),
        Command::FetchData { dir, dataset, allow_checksum_mismatch } => {
            ok(fetch::fetch_all(&dir, &dataset, allow_checksum_mismatch))
        }
        Command::Suite { manifest } => suite(manifest),
        Command::Owner(c) => ok(split::owner(c)),
        Command::Evaluator(c) => ok(split::evaluator(c)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
