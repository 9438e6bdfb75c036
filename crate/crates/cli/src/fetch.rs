use std::io::{Cursor, Read};
use std::path::Path;

use celm_core::data::{
    list_schemas, load_csv, parse_csv, read_checksums, sha256_hex, validate_counts, write_checksums, DatasetSchema,
    LoadOptions,
};
use celm_core::{CoreError, Result};

const MAX_DOWNLOAD: u64 = 64 << 20;

fn runtime(msg: String) -> CoreError {
    CoreError::Io(std::io::Error::other(msg))
}

fn download(url: &str) -> Result<Vec<u8>> {
    let mut resp = ureq::get(url).call().map_err(|e| runtime(format!("{url}: {e}")))?;
    resp.body_mut()
        .with_config()
        .limit(MAX_DOWNLOAD)
        .read_to_vec()
        .map_err(|e| runtime(format!("{url}: {e}")))
}

fn extract(bytes: Vec<u8>, member: Option<&str>) -> Result<Vec<u8>> {
    let Some(member) = member else { return Ok(bytes) };
    let mut archive = zip::ZipArchive::new(Cursor::new(bytes)).map_err(|e| runtime(format!("archive: {e}")))?;
    let mut file = archive.by_name(member).map_err(|e| runtime(format!("{member}: {e}")))?;
    let mut out = Vec::new();
    file.read_to_end(&mut out)?;
    Ok(out)
}

fn fetch_one(dir: &Path, schema: &DatasetSchema, url: &str, recorded: Option<&String>, allow: bool) -> Result<String> {
    let path = dir.join(&schema.file);
    let bytes = extract(download(url)?, schema.source_member.as_deref())?;
    let ds = parse_csv(&bytes, schema, &path)?;
    validate_counts(&ds, schema)?;
    let sum = sha256_hex(&bytes);
    if let Some(expected) = recorded {
        if *expected != sum && !allow {
            return Err(CoreError::Checksum { path, expected: expected.clone(), actual: sum });
        }
    }
    std::fs::write(&path, &bytes)?;
    Ok(sum)
}

/// Downloads every schema's source that is not already present, validates
/// counts, and records first-seen checksums in the directory's ledger.
pub fn fetch_all(dir: &Path, only: &[String], allow_checksum_mismatch: bool) -> Result<()> {
    let mut sums = read_checksums(dir)?;
    let mut failed = Vec::new();
    for schema in list_schemas(dir)? {
        if !only.is_empty() && !only.contains(&schema.name) {
            continue;
        }
        let path = dir.join(&schema.file);
        if path.exists() {
            let opts = LoadOptions { allow_checksum_mismatch, ..LoadOptions::default() };
            match load_csv(&path, &schema, opts) {
                Ok(ds) => {
                    let p = ds.provenance.expect("loader sets provenance");
                    sums.entry(schema.file.clone()).or_insert(p.sha256);
                    eprintln!("{}: present ({} rows)", schema.name, ds.labels.len());
                }
                Err(e) => {
                    eprintln!("{}: present but invalid: {e}", schema.name);
                    failed.push(schema.name.clone());
                }
            }
            continue;
        }
        let Some(url) = schema.source.clone() else {
            eprintln!("{}: no public source; place {} in {} by hand", schema.name, schema.file, dir.display());
            failed.push(schema.name.clone());
            continue;
        };
        match fetch_one(dir, &schema, &url, sums.get(&schema.file), allow_checksum_mismatch) {
            Ok(sum) => {
                eprintln!("{}: fetched {}", schema.name, schema.file);
                sums.insert(schema.file.clone(), sum);
            }
            Err(e) => {
                eprintln!("{}: {e}", schema.name);
                failed.push(schema.name.clone());
            }
        }
    }
    write_checksums(dir, &sums)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(runtime(format!("unavailable: {}", failed.join(", "))))
    }
}
