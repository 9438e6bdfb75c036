use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::{parse_key_values, HiddenSpec, Variant};
use crate::elm::OutputMode;
use crate::error::{CoreError, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseSeconds {
    pub encrypt: f64,
    pub train: f64,
    pub predict: f64,
    pub decrypt: f64,
}

impl PhaseSeconds {
    pub fn total(&self) -> f64 {
        self.encrypt + self.train + self.predict + self.decrypt
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArmResult {
    pub variant: Variant,
    pub hidden: HiddenSpec,
    pub hidden_nodes: usize,
    pub seed: u64,
    pub accuracies: Vec<(OutputMode, f64)>,
    pub time: PhaseSeconds,
    /// Training rows whose pre-activation left the polynomial's range.
    pub range_violations: usize,
}

impl ArmResult {
    pub fn accuracy(&self, mode: OutputMode) -> Option<f64> {
        self.accuracies.iter().find(|(m, _)| *m == mode).map(|&(_, a)| a)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub dataset: String,
    pub title: String,
    pub n_features: usize,
    pub variants: Vec<Variant>,
    pub hidden: Vec<HiddenSpec>,
    pub output_modes: Vec<OutputMode>,
    pub arms: Vec<ArmResult>,
    pub config: Vec<(String, String)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(CoreError::Invalid(format!("unknown report format '{other}'"))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Markdown => "md",
            ReportFormat::Csv => "csv",
        }
    }
}

/// Median of a non-empty slice; the mean of the middle pair for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

const CSV_HEADER: &str =
    "variant,hidden,hidden_nodes,seed,linear,sigmoid,encrypt_s,train_s,predict_s,decrypt_s,total_s,range_violations";

impl ExperimentReport {
    pub fn arms_for(&self, variant: Variant, hidden: HiddenSpec) -> impl Iterator<Item = &ArmResult> {
        self.arms.iter().filter(move |a| a.variant == variant && a.hidden == hidden)
    }

    pub fn accuracies(&self, variant: Variant, hidden: HiddenSpec, mode: OutputMode) -> Vec<f64> {
        self.arms_for(variant, hidden).filter_map(|a| a.accuracy(mode)).collect()
    }

    pub fn median_accuracy(&self, variant: Variant, hidden: HiddenSpec, mode: OutputMode) -> Option<f64> {
        median(&self.accuracies(variant, hidden, mode))
    }

    /// Median end-to-end seconds.
    pub fn median_time(&self, variant: Variant, hidden: HiddenSpec) -> Option<f64> {
        median(&self.arms_for(variant, hidden).map(|a| a.time.total()).collect::<Vec<_>>())
    }

    pub fn median_phases(&self, variant: Variant, hidden: HiddenSpec) -> Option<PhaseSeconds> {
        let arms: Vec<&ArmResult> = self.arms_for(variant, hidden).collect();
        let m = |f: fn(&PhaseSeconds) -> f64| median(&arms.iter().map(|a| f(&a.time)).collect::<Vec<_>>());
        Some(PhaseSeconds {
            encrypt: m(|t| t.encrypt)?,
            train: m(|t| t.train)?,
            predict: m(|t| t.predict)?,
            decrypt: m(|t| t.decrypt)?,
        })
    }

    fn config_value(&self, key: &str) -> Option<&str> {
        self.config.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {} ({})\n", self.title, self.dataset);

        let mut header = vec!["Hidden Nodes".to_string()];
        for v in &self.variants {
            for m in &self.output_modes {
                header.push(format!("{} {}", v.title(), mode_title(*m)));
            }
            header.push(format!("{} Time", v.title()));
        }
        let _ = writeln!(s, "| {} |", header.join(" | "));
        let _ = writeln!(s, "|{}", "---|".repeat(header.len()));
        if !self.variants.is_empty() {
            for &h in &self.hidden {
                let mut row = vec![h.label()];
                for &v in &self.variants {
                    for &m in &self.output_modes {
                        row.push(fmt2(self.median_accuracy(v, h, m)));
                    }
                    row.push(fmt2(self.median_time(v, h)));
                }
                let _ = writeln!(s, "| {} |", row.join(" | "));
            }
        }
        let seeds = self.config_value("seeds").map_or(0, |v| v.split(',').filter(|x| !x.is_empty()).count());
        let _ = writeln!(
            s,
            "\nAccuracies are medians over {seeds} seed(s). Time is the median end-to-end wall time in seconds."
        );

        if !self.variants.is_empty() {
            let _ = writeln!(s, "\n## Phase times (median seconds)\n");
            let _ = writeln!(s, "| Variant | Hidden Nodes | Encrypt | Train | Predict | Decrypt | Range violations |");
            let _ = writeln!(s, "|---|---|---|---|---|---|---|");
            for &v in &self.variants {
                for &h in &self.hidden {
                    let Some(p) = self.median_phases(v, h) else { continue };
                    let viol: usize = self.arms_for(v, h).map(|a| a.range_violations).sum();
                    let _ = writeln!(
                        s,
                        "| {} | {} | {:.2} | {:.2} | {:.2} | {:.2} | {} |",
                        v.title(),
                        h.label(),
                        p.encrypt,
                        p.train,
                        p.predict,
                        p.decrypt,
                        viol
                    );
                }
            }
        }

        let _ = writeln!(s, "\n## Configuration\n");
        for (k, v) in &self.config {
            let _ = writeln!(s, "- {k}: {v}");
        }
        s
    }

    /// Per-seed rows preceded by `# key = value` configuration comments.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# title = {}", self.title);
        for (k, v) in &self.config {
            let _ = writeln!(s, "# {k} = {v}");
        }
        let _ = writeln!(s, "{CSV_HEADER}");
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        for a in &self.arms {
            let t = &a.time;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                a.variant.name(),
                a.hidden,
                a.hidden_nodes,
                a.seed,
                opt(a.accuracy(OutputMode::Linear)),
                opt(a.accuracy(OutputMode::Sigmoid)),
                t.encrypt,
                t.train,
                t.predict,
                t.decrypt,
                t.total(),
                a.range_violations
            );
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let comments: String = text
            .lines()
            .filter_map(|l| l.strip_prefix("# "))
            .map(|l| format!("{l}\n"))
            .collect();
        let mut config = Vec::new();
        let mut title = String::new();
        for line in comments.lines() {
            let kv = parse_key_values(line)?;
            for (k, v) in kv {
                if k == "title" {
                    title = v;
                } else {
                    config.push((k, v));
                }
            }
        }
        let get = |key: &str| {
            config
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| CoreError::Invalid(format!("report csv missing '{key}'")))
        };
        let list = |v: String| v.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect::<Vec<_>>();
        let variants = list(get("variants")?).iter().map(|v| Variant::parse(v)).collect::<Result<Vec<_>>>()?;
        let hidden = list(get("hidden")?).iter().map(|v| HiddenSpec::parse(v)).collect::<Result<Vec<_>>>()?;
        let output_modes = list(get("output_modes")?).iter().map(|v| OutputMode::parse(v)).collect::<Result<Vec<_>>>()?;
        let n_features = get("n_features")?.parse().map_err(|_| CoreError::Invalid("bad n_features".into()))?;
        let dataset = get("dataset")?;

        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(csv_err)?.clone();
        if headers.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
            return Err(CoreError::Invalid("unexpected report csv header".into()));
        }
        let mut arms = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            let f = |i: usize| -> Result<f64> {
                rec[i].parse().map_err(|_| CoreError::Invalid(format!("bad number '{}'", &rec[i])))
            };
            let mut accuracies = Vec::new();
            for (i, m) in [(4, OutputMode::Linear), (5, OutputMode::Sigmoid)] {
                if !rec[i].is_empty() {
                    accuracies.push((m, f(i)?));
                }
            }
            let int = |i: usize| -> Result<u64> {
                rec[i].parse().map_err(|_| CoreError::Invalid(format!("bad integer '{}'", &rec[i])))
            };
            arms.push(ArmResult {
                variant: Variant::parse(&rec[0])?,
                hidden: HiddenSpec::parse(&rec[1])?,
                hidden_nodes: int(2)? as usize,
                seed: int(3)?,
                accuracies,
                time: PhaseSeconds { encrypt: f(6)?, train: f(7)?, predict: f(8)?, decrypt: f(9)? },
                range_violations: int(11)? as usize,
            });
        }
        // Accuracies are written in the report's mode order.
        for a in &mut arms {
            a.accuracies.sort_by_key(|(m, _)| output_modes.iter().position(|x| x == m));
        }
        Ok(Self { dataset, title, n_features, variants, hidden, output_modes, arms, config })
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Markdown => self.to_markdown(),
            ReportFormat::Csv => self.to_csv(),
        }
    }
}

fn csv_err(e: csv::Error) -> CoreError {
    CoreError::Invalid(format!("report csv: {e}"))
}

fn mode_title(m: OutputMode) -> &'static str {
    match m {
        OutputMode::Linear => "Linear",
        OutputMode::Sigmoid => "Sigmoid",
    }
}

fn fmt2(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.2}"))
}

/// Writes `<dir>/<dataset>.<ext>` and returns its path.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.{}", report.dataset, format.extension()));
    fs::write(&path, report.render(format))?;
    Ok(path)
}

/// Median accuracy per (variant, hidden) for the given mode.
pub fn median_table(report: &ExperimentReport, mode: OutputMode) -> BTreeMap<(Variant, HiddenSpec), f64> {
    let mut out = BTreeMap::new();
    for &v in &report.variants {
        for &h in &report.hidden {
            if let Some(m) = report.median_accuracy(v, h, mode) {
                out.insert((v, h), m);
            }
        }
    }
    out
}
