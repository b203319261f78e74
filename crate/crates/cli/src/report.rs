//! Deterministic CSV and manifest writers. Floats are rendered with the
//! shortest-roundtrip formatter, so the same config on the same build yields
//! byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

pub fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        v.to_string()
    }
}

/// Write one CSV with a header row; fields are written verbatim (all our
/// fields are numeric or bare identifiers, never quoted).
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)
}

/// The run manifest: sorted key=value lines echoing the full configuration,
/// grid parameters, versions and wall time.
pub fn write_manifest(
    dir: &Path,
    entries: &BTreeMap<String, String>,
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut f = fs::File::create(dir.join("run.manifest"))?;
    for (k, v) in entries {
        writeln!(f, "{k}={v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_bytes_are_stable() {
        let dir = std::env::temp_dir().join("fockbench-report-test");
        let path = dir.join("t.csv");
        let rows = vec![
            vec![fmt_f64(0.5), fmt_f64(1.0 / 3.0)],
            vec![fmt_f64(f64::INFINITY), fmt_f64(-2.25)],
        ];
        write_csv(&path, &["a", "b"], &rows).unwrap();
        let first = fs::read(&path).unwrap();
        write_csv(&path, &["a", "b"], &rows).unwrap();
        let second = fs::read(&path).unwrap();
        assert_eq!(first, second);
        let text = String::from_utf8(first).unwrap();
        assert!(text.starts_with("a,b\n0.5,0.3333333333333333\n"));
        fs::remove_dir_all(&dir).ok();
    }
}
