use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::{parse_key_values, ExperimentConfig, Variant};
use super::report::{emit_report, ExperimentReport, ReportFormat};
use super::runner::run_experiment;
use crate::elm::OutputMode;
use crate::error::{CoreError, Result};

pub const SUMMARY_FILE: &str = "summary.md";

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteManifest {
    pub datasets: Vec<String>,
    pub report_dir: PathBuf,
    pub formats: Vec<ReportFormat>,
    /// Settings applied to every dataset, then `<dataset>.<key>` overrides.
    pub settings: Vec<(String, String)>,
}

impl SuiteManifest {
    /// Relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let kv = parse_key_values(text)?;
        let datasets: Vec<String> = kv
            .get("datasets")
            .ok_or_else(|| CoreError::Invalid("suite manifest missing 'datasets'".into()))?
            .split(',')
            .map(str::trim)
            .filter(|d| !d.is_empty())
            .map(String::from)
            .collect();
        if datasets.is_empty() {
            return Err(CoreError::Invalid("suite manifest lists no datasets".into()));
        }
        let report_dir = base.join(kv.get("report_dir").map_or("reports", String::as_str));
        let formats = kv
            .get("formats")
            .map_or("md,csv", String::as_str)
            .split(',')
            .map(ReportFormat::parse)
            .collect::<Result<Vec<_>>>()?;
        let mut settings = Vec::new();
        for (k, v) in kv {
            match k.as_str() {
                "datasets" | "report_dir" | "formats" => {}
                "data_dir" => settings.push((k, base.join(&v).display().to_string())),
                _ => settings.push((k, v)),
            }
        }
        Ok(Self { datasets, report_dir, formats, settings })
    }

    pub fn config_for(&self, dataset: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(dataset);
        let prefix = format!("{dataset}.");
        for (k, v) in &self.settings {
            if !k.contains('.') {
                cfg.set(k, v)?;
            }
        }
        for (k, v) in &self.settings {
            if let Some(key) = k.strip_prefix(&prefix) {
                cfg.set(key, v)?;
            }
        }
        cfg.dataset = dataset.to_string();
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug)]
pub struct SuiteEntry {
    pub dataset: String,
    pub outcome: std::result::Result<(ExperimentReport, Vec<PathBuf>), String>,
}

#[derive(Debug)]
pub struct SuiteOutcome {
    pub entries: Vec<SuiteEntry>,
    pub summary: PathBuf,
}

impl SuiteOutcome {
    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.outcome.is_err()).count()
    }
}

/// Runs every dataset in turn; a failing dataset is recorded in the summary and skipped.
pub fn run_suite(manifest: &SuiteManifest) -> Result<SuiteOutcome> {
    fs::create_dir_all(&manifest.report_dir)?;
    let mut entries = Vec::new();
    for name in &manifest.datasets {
        let outcome = manifest
            .config_for(name)
            .and_then(|cfg| run_experiment(&cfg))
            .and_then(|report| {
                let paths = manifest
                    .formats
                    .iter()
                    .map(|&f| emit_report(&report, f, &manifest.report_dir))
                    .collect::<Result<Vec<_>>>()?;
                Ok((report, paths))
            })
            .map_err(|e| e.to_string());
        entries.push(SuiteEntry { dataset: name.clone(), outcome });
    }
    let summary = manifest.report_dir.join(SUMMARY_FILE);
    fs::write(&summary, summarize(&entries))?;
    Ok(SuiteOutcome { entries, summary })
}

fn pair_holds(report: &ExperimentReport, chaotic: Variant, traditional: Variant, mode: OutputMode) -> Option<bool> {
    let mut any = false;
    for &h in &report.hidden {
        match (report.median_accuracy(chaotic, h, mode), report.median_accuracy(traditional, h, mode)) {
            (Some(c), Some(t)) => {
                any = true;
                if c < t {
                    return Some(false);
                }
            }
            _ => continue,
        }
    }
    any.then_some(true)
}

fn yes_no(x: Option<bool>) -> &'static str {
    match x {
        Some(true) => "yes",
        Some(false) => "no",
        None => "n/a",
    }
}

/// Chaotic versus traditional median accuracy per dataset, linear output.
pub fn summarize(entries: &[SuiteEntry]) -> String {
    let mode = OutputMode::Linear;
    let mut s = String::from("# Suite summary\n\n");
    s.push_str("Median linear-output accuracy. A dataset is marked when the chaotic variant is at least as\n");
    s.push_str("accurate as the traditional one at every hidden-node setting.\n\n");
    s.push_str("| Dataset | Hidden Nodes | Plain chaotic | Plain traditional | Encrypted chaotic | Encrypted traditional |\n");
    s.push_str("|---|---|---|---|---|---|\n");
    let cell = |r: &ExperimentReport, v, h| r.median_accuracy(v, h, mode).map_or("-".into(), |a| format!("{a:.2}"));
    for e in entries {
        if let Ok((r, _)) = &e.outcome {
            for &h in &r.hidden {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} | {} |",
                    e.dataset,
                    h.label(),
                    cell(r, Variant::PlainChaotic, h),
                    cell(r, Variant::PlainTraditional, h),
                    cell(r, Variant::EncChaotic, h),
                    cell(r, Variant::EncTraditional, h)
                );
            }
        }
    }
    s.push_str("\n| Dataset | Plain chaotic ≥ traditional | Encrypted chaotic ≥ traditional |\n|---|---|---|\n");
    for e in entries {
        if let Ok((r, _)) = &e.outcome {
            let _ = writeln!(
                s,
                "| {} | {} | {} |",
                e.dataset,
                yes_no(pair_holds(r, Variant::PlainChaotic, Variant::PlainTraditional, mode)),
                yes_no(pair_holds(r, Variant::EncChaotic, Variant::EncTraditional, mode))
            );
        }
    }
    let failed: Vec<&SuiteEntry> = entries.iter().filter(|e| e.outcome.is_err()).collect();
    if !failed.is_empty() {
        s.push_str("\n## Failed datasets\n\n");
        for e in failed {
            if let Err(msg) = &e.outcome {
                let _ = writeln!(s, "- {}: {}", e.dataset, msg.replace('\n', " "));
            }
        }
    }
    s
}
