use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use celm_ckks::CkksParams;

use crate::chaos::DEFAULT_BURN_IN;
use crate::data::{DEFAULT_SMOTE_K, DEFAULT_SPLIT_SEED, DEFAULT_TRAIN_FRACTION};
use crate::elm::OutputMode;
use crate::error::{CoreError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    EncChaotic,
    PlainChaotic,
    EncTraditional,
    PlainTraditional,
}

impl Variant {
    pub const ALL: [Variant; 4] =
        [Variant::EncChaotic, Variant::PlainChaotic, Variant::EncTraditional, Variant::PlainTraditional];

    pub fn name(self) -> &'static str {
        match self {
            Variant::EncChaotic => "enc_chaotic",
            Variant::PlainChaotic => "plain_chaotic",
            Variant::EncTraditional => "enc_traditional",
            Variant::PlainTraditional => "plain_traditional",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Variant::EncChaotic => "Encrypted Chaotic ELM",
            Variant::PlainChaotic => "Unencrypted Chaotic ELM",
            Variant::EncTraditional => "Encrypted Traditional ELM",
            Variant::PlainTraditional => "Unencrypted Traditional ELM",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s.trim())
            .ok_or_else(|| CoreError::Invalid(format!("unknown variant '{s}'")))
    }

    pub fn encrypted(self) -> bool {
        matches!(self, Variant::EncChaotic | Variant::EncTraditional)
    }

    pub fn chaotic(self) -> bool {
        matches!(self, Variant::EncChaotic | Variant::PlainChaotic)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HiddenSpec {
    Count(usize),
    /// As many hidden nodes as input features.
    InputDim,
}

impl HiddenSpec {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "input" | "input_dim" => Ok(HiddenSpec::InputDim),
            t => t
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .map(HiddenSpec::Count)
                .ok_or_else(|| CoreError::Invalid(format!("hidden node count '{t}' must be ≥ 1 or 'input'"))),
        }
    }

    pub fn resolve(self, n_features: usize) -> usize {
        match self {
            HiddenSpec::Count(n) => n,
            HiddenSpec::InputDim => n_features,
        }
    }

    pub fn label(self) -> String {
        match self {
            HiddenSpec::Count(n) => n.to_string(),
            HiddenSpec::InputDim => "Same as input Nodes".into(),
        }
    }
}

impl fmt::Display for HiddenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HiddenSpec::Count(n) => write!(f, "{n}"),
            HiddenSpec::InputDim => f.write_str("input_dim"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CkksProfile {
    Standard,
    Test,
}

impl CkksProfile {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "standard" => Ok(CkksProfile::Standard),
            "test" => Ok(CkksProfile::Test),
            other => Err(CoreError::Invalid(format!("unknown ckks profile '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CkksProfile::Standard => "standard",
            CkksProfile::Test => "test",
        }
    }

    pub fn params(self) -> CkksParams {
        match self {
            CkksProfile::Standard => CkksParams::standard(),
            CkksProfile::Test => CkksParams::test_profile(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { train_fraction: DEFAULT_TRAIN_FRACTION, seed: DEFAULT_SPLIT_SEED, stratified: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: String,
    pub data_dir: PathBuf,
    pub variants: Vec<Variant>,
    pub hidden: Vec<HiddenSpec>,
    pub seeds: Vec<u64>,
    pub split: SplitSpec,
    pub ckks_profile: CkksProfile,
    pub output_modes: Vec<OutputMode>,
    pub smote_before_split: bool,
    pub smote_k: usize,
    pub scale_on_all: bool,
    pub burn_in: usize,
    pub allow_checksum_mismatch: bool,
}

/// Parses `a,b,c` where each item may be a range `lo-hi` (inclusive).
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let bad = || CoreError::Invalid(format!("bad seed '{item}'"));
        if let Some((lo, hi)) = item.split_once('-') {
            let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
            if hi < lo {
                return Err(bad());
            }
            out.extend(lo..=hi);
        } else {
            out.push(item.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(f).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CoreError::Invalid(format!("{key}: expected true/false, got '{v}'"))),
    }
}

/// Reads `key = value` lines, ignoring blanks and `#` comments.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut kv = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CoreError::Invalid(format!("line {}: expected key = value", i + 1)))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(kv)
}

impl ExperimentConfig {
    pub fn new(dataset: &str) -> Self {
        Self {
            dataset: dataset.to_string(),
            data_dir: PathBuf::from("data"),
            variants: Variant::ALL.to_vec(),
            hidden: vec![HiddenSpec::Count(1), HiddenSpec::Count(2), HiddenSpec::InputDim],
            seeds: (0..10).collect(),
            split: SplitSpec::default(),
            ckks_profile: CkksProfile::Standard,
            output_modes: vec![OutputMode::Linear, OutputMode::Sigmoid],
            smote_before_split: true,
            smote_k: DEFAULT_SMOTE_K,
            scale_on_all: false,
            burn_in: DEFAULT_BURN_IN,
            allow_checksum_mismatch: false,
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dataset" => self.dataset = value.trim().to_string(),
            "data_dir" => self.data_dir = PathBuf::from(value.trim()),
            "variants" => self.variants = parse_list(value, Variant::parse)?,
            "hidden" => self.hidden = parse_list(value, HiddenSpec::parse)?,
            "seeds" => self.seeds = parse_seeds(value)?,
            "split" => {
                self.split.train_fraction =
                    value.trim().parse().map_err(|_| CoreError::Invalid(format!("split: '{value}'")))?
            }
            "split_seed" => {
                self.split.seed = value.trim().parse().map_err(|_| CoreError::Invalid(format!("split_seed: '{value}'")))?
            }
            "output_modes" | "output_mode" => self.output_modes = parse_list(value, OutputMode::parse)?,
            "ckks_profile" => self.ckks_profile = CkksProfile::parse(value)?,
            "smote_before_split" => self.smote_before_split = parse_bool(key, value)?,
            "smote_k" => {
                self.smote_k = value.trim().parse().map_err(|_| CoreError::Invalid(format!("smote_k: '{value}'")))?
            }
            "scale_on_all" => self.scale_on_all = parse_bool(key, value)?,
            "burn_in" => {
                self.burn_in = value.trim().parse().map_err(|_| CoreError::Invalid(format!("burn_in: '{value}'")))?
            }
            "allow_checksum_mismatch" => self.allow_checksum_mismatch = parse_bool(key, value)?,
            other => return Err(CoreError::Invalid(format!("unknown setting '{other}'"))),
        }
        Ok(())
    }

    pub fn from_manifest(text: &str) -> Result<Self> {
        let kv = parse_key_values(text)?;
        let dataset = kv.get("dataset").ok_or_else(|| CoreError::Invalid("manifest missing 'dataset'".into()))?;
        let mut cfg = Self::new(dataset);
        for (k, v) in &kv {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CoreError::Invalid(m.to_string()));
        if self.dataset.is_empty() {
            return bad("dataset name is empty");
        }
        if self.hidden.is_empty() {
            return bad("at least one hidden node count is required");
        }
        if self.hidden.iter().any(|h| matches!(h, HiddenSpec::Count(0))) {
            return bad("hidden node counts must be ≥ 1");
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        if self.output_modes.is_empty() {
            return bad("at least one output mode is required");
        }
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return bad("split fraction must lie in (0, 1)");
        }
        if self.smote_k == 0 {
            return bad("smote_k must be ≥ 1");
        }
        if self.variants.iter().any(|v| v.encrypted()) {
            self.ckks_profile.params().validate()?;
        }
        Ok(())
    }

    /// Every setting, resolved, in a fixed order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let join = |v: Vec<String>| v.join(",");
        let p = self.ckks_profile.params();
        vec![
            ("dataset".into(), self.dataset.clone()),
            ("data_dir".into(), self.data_dir.display().to_string()),
            ("variants".into(), join(self.variants.iter().map(|v| v.name().to_string()).collect())),
            ("hidden".into(), join(self.hidden.iter().map(|h| h.to_string()).collect())),
            ("seeds".into(), join(self.seeds.iter().map(|s| s.to_string()).collect())),
            ("split".into(), format!("{}", self.split.train_fraction)),
            ("split_seed".into(), self.split.seed.to_string()),
            ("stratified".into(), self.split.stratified.to_string()),
            ("output_modes".into(), join(self.output_modes.iter().map(|m| m.name().to_string()).collect())),
            ("ckks_profile".into(), self.ckks_profile.name().into()),
            ("ckks_degree".into(), p.degree().to_string()),
            ("ckks_modulus_bits".into(), join(p.coeff_modulus_bits.iter().map(|b| b.to_string()).collect())),
            ("ckks_scale_bits".into(), p.scale_bits.to_string()),
            ("ckks_error_stddev".into(), p.error_stddev.to_string()),
            ("ckks_secret_weight".into(), p.secret_weight.map_or("dense".into(), |h| h.to_string())),
            ("smote_before_split".into(), self.smote_before_split.to_string()),
            ("smote_k".into(), self.smote_k.to_string()),
            ("scale_on_all".into(), self.scale_on_all.to_string()),
            ("burn_in".into(), self.burn_in.to_string()),
            ("traditional_init".into(), "uniform(0,1)".into()),
            ("time_unit".into(), "seconds".into()),
        ]
    }
}
