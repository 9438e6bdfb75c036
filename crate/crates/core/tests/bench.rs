use std::path::{Path, PathBuf};

use celm_core::bench::*;
use celm_core::elm::OutputMode;
use celm_core::CoreError;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn arm(variant: Variant, hidden: HiddenSpec, nodes: usize, seed: u64, lin: f64, sig: f64, t: f64) -> ArmResult {
    ArmResult {
        variant,
        hidden,
        hidden_nodes: nodes,
        seed,
        accuracies: vec![(OutputMode::Linear, lin), (OutputMode::Sigmoid, sig)],
        time: if variant.encrypted() {
            PhaseSeconds { encrypt: t / 4.0, train: t / 2.0, predict: t / 8.0, decrypt: t / 8.0 }
        } else {
            PhaseSeconds { train: t, ..PhaseSeconds::default() }
        },
        range_violations: 0,
    }
}

fn tiny_report() -> ExperimentReport {
    let mut cfg = ExperimentConfig::new("tiny");
    cfg.variants = vec![Variant::EncChaotic, Variant::PlainTraditional];
    cfg.hidden = vec![HiddenSpec::Count(1), HiddenSpec::InputDim];
    cfg.seeds = vec![0, 1, 2];
    cfg.ckks_profile = CkksProfile::Test;
    let mut config = cfg.echo();
    config.push(("n_features".into(), "3".into()));
    let mut arms = Vec::new();
    for (s, (a, b)) in [(0.74, 0.26), (0.71, 0.26), (0.77, 0.3)].into_iter().enumerate() {
        arms.push(arm(Variant::EncChaotic, HiddenSpec::Count(1), 1, s as u64, a, b, 2.0 + s as f64));
        arms.push(arm(Variant::EncChaotic, HiddenSpec::InputDim, 3, s as u64, a + 0.01, b, 6.5 + s as f64));
        arms.push(arm(Variant::PlainTraditional, HiddenSpec::Count(1), 1, s as u64, a - 0.02, b, 0.001));
        arms.push(arm(Variant::PlainTraditional, HiddenSpec::InputDim, 3, s as u64, a, b, 0.002));
    }
    ExperimentReport {
        dataset: "tiny".into(),
        title: "Tiny".into(),
        n_features: 3,
        variants: cfg.variants.clone(),
        hidden: cfg.hidden.clone(),
        output_modes: cfg.output_modes.clone(),
        arms,
        config,
    }
}

#[test]
fn markdown_matches_golden() {
    let md = tiny_report().to_markdown();
    if std::env::var_os("BLESS").is_some() {
        std::fs::write(golden("tiny.md"), &md).unwrap();
    }
    let want = std::fs::read_to_string(golden("tiny.md")).unwrap();
    assert_eq!(md, want);
    assert_eq!(md, tiny_report().to_markdown());
}

#[test]
fn csv_round_trips() {
    let r = tiny_report();
    let csv = r.to_csv();
    let back = ExperimentReport::from_csv(&csv).unwrap();
    assert_eq!(back, r);
    assert_eq!(back.to_csv(), csv);
    assert!(ExperimentReport::from_csv("variant\nx\n").is_err());
}

#[test]
fn emitted_files_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let r = tiny_report();
    let md = emit_report(&r, ReportFormat::Markdown, dir.path()).unwrap();
    let csv = emit_report(&r, ReportFormat::Csv, dir.path()).unwrap();
    assert_eq!(md.file_name().unwrap(), "tiny.md");
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), r.to_csv());
    let first = std::fs::read(&md).unwrap();
    emit_report(&r, ReportFormat::Markdown, dir.path()).unwrap();
    assert_eq!(std::fs::read(&md).unwrap(), first);
}

#[test]
fn empty_variant_set_gives_header_only_table() {
    let mut r = tiny_report();
    r.variants.clear();
    r.arms.clear();
    let md = r.to_markdown();
    let table: Vec<&str> = md.lines().filter(|l| l.starts_with('|')).collect();
    assert_eq!(table, vec!["| Hidden Nodes |", "|---|"]);
}

#[test]
fn medians() {
    assert_eq!(median(&[]), None);
    assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
    assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    let r = tiny_report();
    assert_eq!(r.median_accuracy(Variant::EncChaotic, HiddenSpec::Count(1), OutputMode::Linear), Some(0.74));
    assert_eq!(r.median_time(Variant::EncChaotic, HiddenSpec::InputDim), Some(7.5));
    assert_eq!(r.median_accuracy(Variant::PlainChaotic, HiddenSpec::Count(1), OutputMode::Linear), None);
}

#[test]
fn config_validation() {
    let mut cfg = ExperimentConfig::new("haberman");
    cfg.validate().unwrap();
    cfg.hidden = vec![HiddenSpec::Count(0)];
    assert!(matches!(cfg.validate(), Err(CoreError::Invalid(_))));
    assert!(HiddenSpec::parse("0").is_err());

    let mut cfg = ExperimentConfig::new("haberman");
    cfg.seeds.clear();
    assert!(cfg.validate().is_err());
    let mut cfg = ExperimentConfig::new("haberman");
    cfg.split.train_fraction = 1.0;
    assert!(cfg.validate().is_err());
    let mut cfg = ExperimentConfig::new("haberman");
    cfg.output_modes.clear();
    assert!(cfg.validate().is_err());
}

#[test]
fn config_manifest_parses() {
    let text = "\
# comment
dataset = haberman
variants = plain_chaotic, enc_traditional
hidden = 1, input
seeds = 0-2, 7
split = 0.75
output_modes = linear
ckks_profile = test
smote_before_split = false
";
    let cfg = ExperimentConfig::from_manifest(text).unwrap();
    assert_eq!(cfg.variants, vec![Variant::PlainChaotic, Variant::EncTraditional]);
    assert_eq!(cfg.hidden, vec![HiddenSpec::Count(1), HiddenSpec::InputDim]);
    assert_eq!(cfg.seeds, vec![0, 1, 2, 7]);
    assert_eq!(cfg.split.train_fraction, 0.75);
    assert_eq!(cfg.output_modes, vec![OutputMode::Linear]);
    assert_eq!(cfg.ckks_profile, CkksProfile::Test);
    assert!(!cfg.smote_before_split);

    assert!(ExperimentConfig::from_manifest("variants = plain_chaotic").is_err());
    assert!(ExperimentConfig::from_manifest("dataset = x\ncolour = red").is_err());
    assert!(ExperimentConfig::from_manifest("dataset = x\nhidden = 0").is_err());
    assert!(ExperimentConfig::from_manifest("dataset = x\nseeds = 5-2").is_err());
    assert!(parse_seeds("a").is_err());
}

#[test]
fn echo_lists_every_default() {
    let echo = ExperimentConfig::new("haberman").echo();
    let keys: Vec<&str> = echo.iter().map(|(k, _)| k.as_str()).collect();
    for k in ["variants", "hidden", "seeds", "split", "split_seed", "ckks_degree", "ckks_scale_bits", "smote_k", "time_unit"] {
        assert!(keys.contains(&k), "{k}");
    }
    let get = |k: &str| echo.iter().find(|(key, _)| key == k).unwrap().1.clone();
    assert_eq!(get("ckks_degree"), "8192");
    assert_eq!(get("seeds"), "0,1,2,3,4,5,6,7,8,9");
    assert_eq!(get("hidden"), "1,2,input_dim");
}

fn plain_config(dataset: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(dataset);
    cfg.data_dir = data_dir();
    cfg.variants = vec![Variant::PlainChaotic, Variant::PlainTraditional];
    cfg.seeds = (0..4).collect();
    cfg
}

#[test]
fn plain_run_is_reproducible() {
    let cfg = plain_config("haberman");
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.arms.len(), 2 * 3 * 4);
    for (x, y) in a.arms.iter().zip(&b.arms) {
        assert_eq!(x.accuracies, y.accuracies);
        assert!(x.accuracies.iter().all(|(_, v)| (0.0..=1.0).contains(v)));
        assert!(x.time.total() >= 0.0);
    }
    let input = a.arms.iter().find(|x| x.hidden == HiddenSpec::InputDim).unwrap();
    assert_eq!(input.hidden_nodes, 3);
    assert_eq!(a.title, "Haberman's Survival");
}

#[test]
fn encrypted_arm_runs_on_test_profile() {
    let mut cfg = plain_config("haberman");
    cfg.variants = vec![Variant::EncChaotic, Variant::PlainChaotic];
    cfg.hidden = vec![HiddenSpec::Count(1)];
    cfg.seeds = vec![0];
    cfg.ckks_profile = CkksProfile::Test;
    let r = run_experiment(&cfg).unwrap();
    let enc = r.median_accuracy(Variant::EncChaotic, HiddenSpec::Count(1), OutputMode::Linear).unwrap();
    let plain = r.median_accuracy(Variant::PlainChaotic, HiddenSpec::Count(1), OutputMode::Linear).unwrap();
    assert!((enc - plain).abs() < 0.1, "{enc} vs {plain}");
    assert!(r.median_time(Variant::EncChaotic, HiddenSpec::Count(1)) > r.median_time(Variant::PlainChaotic, HiddenSpec::Count(1)));
}

#[test]
fn missing_dataset_is_an_error() {
    let mut cfg = plain_config("haberman");
    cfg.dataset = "no_such_set".into();
    assert!(run_experiment(&cfg).is_err());
}

#[test]
fn suite_writes_reports_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = format!(
        "datasets = haberman, diabetes, no_such_set\n\
         report_dir = out\n\
         data_dir = {}\n\
         variants = plain_chaotic, plain_traditional\n\
         seeds = 0-3\n\
         diabetes.hidden = 1, input\n",
        data_dir().display()
    );
    let m = SuiteManifest::parse(&manifest, dir.path()).unwrap();
    assert_eq!(m.config_for("diabetes").unwrap().hidden, vec![HiddenSpec::Count(1), HiddenSpec::InputDim]);
    assert_eq!(m.config_for("haberman").unwrap().hidden.len(), 3);

    let out = run_suite(&m).unwrap();
    assert_eq!(out.entries.len(), 3);
    assert_eq!(out.failures(), 1);
    for name in ["haberman.md", "haberman.csv", "diabetes.md", "diabetes.csv", SUMMARY_FILE] {
        assert!(dir.path().join("out").join(name).exists(), "{name}");
    }
    let summary = std::fs::read_to_string(&out.summary).unwrap();
    assert!(summary.contains("| haberman | 1 |"));
    assert!(summary.contains("## Failed datasets"));
    assert!(summary.contains("no_such_set"));
    let marks = summary.lines().filter(|l| l.starts_with("| haberman | yes") || l.starts_with("| haberman | no"));
    assert_eq!(marks.count(), 1);

    let csv = std::fs::read_to_string(dir.path().join("out/haberman.csv")).unwrap();
    let back = ExperimentReport::from_csv(&csv).unwrap();
    assert_eq!(back.arms.len(), 2 * 3 * 4);

    // accuracy content is identical on rerun; timings are wall-clock
    run_suite(&m).unwrap();
    assert_eq!(std::fs::read_to_string(&out.summary).unwrap(), summary);
}

#[test]
fn suite_manifest_errors() {
    assert!(SuiteManifest::parse("report_dir = x", Path::new(".")).is_err());
    assert!(SuiteManifest::parse("datasets = a\nformats = pdf", Path::new(".")).is_err());
    let m = SuiteManifest::parse("datasets = a\nhidden = 0", Path::new(".")).unwrap();
    assert!(m.config_for("a").is_err());
}
