//! Plain-text dataset manifests: one `key = value` per line, `#` comments.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{io_at, CoreError, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum FeatureKind {
    Numeric,
    /// Allowed levels, sorted lexicographically; the index is the encoded value.
    Categorical(Vec<String>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSchema {
    pub name: String,
    pub title: String,
    pub file: String,
    pub header: bool,
    /// All columns in file order, label included.
    pub columns: Vec<String>,
    pub label: String,
    /// Raw label value to class index.
    pub label_map: Vec<(String, u8)>,
    pub feature_kinds: Vec<FeatureKind>,
    pub expected_rows: Option<usize>,
    pub expected_class_counts: Option<[usize; 2]>,
    pub standardize: bool,
    pub smote: bool,
    pub source: Option<String>,
    /// Archive member to extract from the download, if the source is a zip file.
    pub source_member: Option<String>,
}

fn list(v: &str) -> Vec<String> {
    v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" => Ok(true),
        "false" | "no" => Ok(false),
        _ => Err(CoreError::Invalid(format!("{key}: expected true/false, got '{v}'"))),
    }
}

impl DatasetSchema {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CoreError::Invalid(format!("schema line {}: expected key = value", i + 1)))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| kv.get(k).cloned().ok_or_else(|| CoreError::Invalid(format!("schema missing '{k}'")));
        let name = get("name")?;
        let columns = list(&get("columns")?);
        let label = get("label")?;
        if !columns.contains(&label) {
            return Err(CoreError::Invalid(format!("label '{label}' is not a column")));
        }
        let n_features = columns.len() - 1;

        let mut label_map = Vec::new();
        for item in list(&get("label_map")?) {
            let (raw, class) = item
                .split_once(':')
                .ok_or_else(|| CoreError::Invalid(format!("label_map entry '{item}'")))?;
            let class: u8 = class.trim().parse().map_err(|_| CoreError::Invalid(format!("label_map entry '{item}'")))?;
            if class > 1 {
                return Err(CoreError::Invalid("labels must map to 0 or 1".into()));
            }
            label_map.push((raw.trim().to_string(), class));
        }

        let levels = {
            let mut l = kv.get("levels").map(|v| list(v)).unwrap_or_default();
            l.sort();
            l
        };
        let feature_kinds = match kv.get("kinds") {
            None => vec![FeatureKind::Numeric; n_features],
            Some(v) => {
                let kinds = list(v);
                let kinds = if kinds.len() == 1 { vec![kinds[0].clone(); n_features] } else { kinds };
                if kinds.len() != n_features {
                    return Err(CoreError::Invalid(format!("{} kinds for {n_features} features", kinds.len())));
                }
                kinds
                    .iter()
                    .map(|k| match k.as_str() {
                        "num" => Ok(FeatureKind::Numeric),
                        "cat" if !levels.is_empty() => Ok(FeatureKind::Categorical(levels.clone())),
                        "cat" => Err(CoreError::Invalid("categorical columns need 'levels'".into())),
                        other => Err(CoreError::Invalid(format!("unknown kind '{other}'"))),
                    })
                    .collect::<Result<_>>()?
            }
        };
        let opt_usize = |k: &str| -> Result<Option<usize>> {
            kv.get(k)
                .map(|v| v.parse().map_err(|_| CoreError::Invalid(format!("{k}: '{v}'"))))
                .transpose()
        };
        let expected_class_counts = match kv.get("expected_class_counts") {
            None => None,
            Some(v) => {
                let c: Vec<usize> = list(v)
                    .iter()
                    .map(|x| x.parse().map_err(|_| CoreError::Invalid(format!("expected_class_counts: '{v}'"))))
                    .collect::<Result<_>>()?;
                if c.len() != 2 {
                    return Err(CoreError::Invalid("expected_class_counts needs two values".into()));
                }
                Some([c[0], c[1]])
            }
        };
        Ok(Self {
            title: kv.get("title").cloned().unwrap_or_else(|| name.clone()),
            file: kv.get("file").cloned().unwrap_or_else(|| format!("{name}.csv")),
            name,
            header: kv.get("header").map(|v| parse_bool("header", v)).transpose()?.unwrap_or(false),
            columns,
            label,
            label_map,
            feature_kinds,
            expected_rows: opt_usize("expected_rows")?,
            expected_class_counts,
            standardize: kv.get("standardize").map(|v| parse_bool("standardize", v)).transpose()?.unwrap_or(true),
            smote: kv.get("smote").map(|v| parse_bool("smote", v)).transpose()?.unwrap_or(false),
            source: kv.get("source").cloned(),
            source_member: kv.get("source_member").cloned(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_at(path, e))?;
        Self::parse(&text).map_err(|e| CoreError::Data { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.columns.iter().filter(|c| **c != self.label).cloned().collect()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len() - 1
    }

    pub fn label_index(&self) -> usize {
        self.columns.iter().position(|c| *c == self.label).unwrap()
    }

    pub fn class_of(&self, raw: &str) -> Option<u8> {
        self.label_map.iter().find(|(r, _)| r == raw).map(|&(_, c)| c)
    }
}

/// Locates `<dir>/schemas/<name>.schema`.
pub fn schema_path(data_dir: &Path, name: &str) -> PathBuf {
    data_dir.join("schemas").join(format!("{name}.schema"))
}

/// All schemas under `<dir>/schemas`, sorted by name.
pub fn list_schemas(data_dir: &Path) -> Result<Vec<DatasetSchema>> {
    let dir = data_dir.join("schemas");
    let mut out = Vec::new();
    for entry in std::fs::read_dir(&dir).map_err(|e| CoreError::Data { path: dir.clone(), message: e.to_string() })? {
        let p = entry?.path();
        if p.extension().and_then(|e| e.to_str()) == Some("schema") {
            out.push(DatasetSchema::load(&p)?);
        }
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}
