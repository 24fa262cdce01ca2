//! CSV sample files with `#` header comments, JSON reports and .dat curves.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context};

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `# key=value` lines for every record entry, command first.
pub fn header(command: &str, record: &BTreeMap<String, String>) -> String {
    let mut s = format!("# kpzlab {command}\n");
    for (k, v) in record {
        let _ = writeln!(s, "# {k}={v}");
    }
    s
}

/// A table with named columns and header comments.
pub fn table(command: &str, record: &BTreeMap<String, String>, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header(command, record);
    s.push_str(&columns.join(","));
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// A parsed sample file.
#[derive(Debug, Clone)]
pub struct SampleFile {
    pub params: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SampleFile {
    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let mut params = BTreeMap::new();
        let mut columns = None;
        let mut rows = Vec::new();
        for line in text.lines() {
            if let Some(c) = line.strip_prefix('#') {
                if let Some((k, v)) = c.trim().split_once('=') {
                    params.insert(k.to_string(), v.to_string());
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            match columns {
                None => columns = Some(line.split(',').map(str::to_string).collect::<Vec<_>>()),
                Some(ref cols) => {
                    let row = line
                        .split(',')
                        .map(|x| x.trim().parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .with_context(|| format!("bad row `{line}`"))?;
                    if row.len() != cols.len() {
                        bail!("row `{line}` has {} fields, header has {}", row.len(), cols.len());
                    }
                    rows.push(row);
                }
            }
        }
        let columns = columns.context("missing column header")?;
        Ok(Self { params, columns, rows })
    }

    pub fn column(&self, name: &str) -> anyhow::Result<Vec<f64>> {
        let i = self
            .columns
            .iter()
            .position(|c| c == name)
            .with_context(|| format!("no column `{name}`"))?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Shortest round-trip form, in exponent notation for very small or large
/// magnitudes.
pub fn fmt(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// Two-column whitespace-separated curve.
pub fn dat(points: &[(f64, f64)]) -> String {
    let mut s = String::new();
    for (x, y) in points {
        let _ = writeln!(s, "{} {}", fmt(*x), fmt(*y));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_roundtrip() {
        let mut rec = BTreeMap::new();
        rec.insert("alpha".to_string(), "1".to_string());
        let t = table(
            "sample-airy",
            &rec,
            &["replica", "value"],
            &[vec!["0".into(), "0.5".into()], vec!["1".into(), "1e-3".into()]],
        );
        let f = SampleFile::parse(&t).unwrap();
        assert_eq!(f.params["alpha"], "1");
        assert_eq!(f.column("value").unwrap(), vec![0.5, 1e-3]);
        assert!(f.column("nope").is_err());
    }

    #[test]
    fn numbers_roundtrip() {
        for x in [0.0, 1.5, -2.25e-12, 3e20, 0.30661, f64::MIN_POSITIVE] {
            assert_eq!(fmt(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt(1.7e-12), "1.7e-12");
        assert_eq!(fmt(0.25), "0.25");
    }

    #[test]
    fn header_only_file_has_no_rows() {
        let f = SampleFile::parse("# kpzlab x\nreplica,value\n").unwrap();
        assert!(f.rows.is_empty());
    }
}
