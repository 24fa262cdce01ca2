//! Key/value config files merged under command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Invalid configuration; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

const KNOWN_KEYS: &[&str] = &[
    "beta", "alpha", "n", "n_sim", "k", "reps", "seed", "workers", "out", "ensemble", "noise_seed",
    "n_excursions", "n_steps", "u_grid", "order", "left", "right", "test", "p_threshold", "se_multiplier",
    "slack", "n_bootstrap", "level", "mc_reps", "log_scale", "max_distance", "dat", "s_min", "s_max", "points",
    "moments",
];

/// Resolved settings of one run.
pub struct Resolver {
    file: BTreeMap<String, String>,
    used: Vec<String>,
    /// Every resolved value, echoed into output headers.
    pub record: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(path: Option<&Path>) -> anyhow::Result<Self> {
        let file = match path {
            Some(p) => parse_file(p)?,
            None => BTreeMap::new(),
        };
        Ok(Self {
            file,
            used: Vec::new(),
            record: BTreeMap::new(),
        })
    }

    /// Flag value, else file value, else `default`. Recorded under `key`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: Option<T>) -> anyhow::Result<Option<T>>
    where
        T: FromStr + ToString,
        T::Err: fmt::Display,
    {
        self.used.push(key.to_string());
        let from_file = match self.file.get(key) {
            Some(raw) => Some(
                raw.parse::<T>()
                    .map_err(|e| usage(format!("config key `{key}`: cannot parse `{raw}`: {e}")))?,
            ),
            None => None,
        };
        let v = flag.or(from_file).or(default);
        if let Some(v) = &v {
            self.record.insert(key.to_string(), v.to_string());
        }
        Ok(v)
    }

    pub fn require<T>(&mut self, key: &str, flag: Option<T>, default: Option<T>) -> anyhow::Result<T>
    where
        T: FromStr + ToString,
        T::Err: fmt::Display,
    {
        self.get(key, flag, default)?
            .ok_or_else(|| usage(format!("missing required setting `{key}`")))
    }

    /// Like [`Resolver::get`] but not echoed into outputs.
    pub fn get_quiet<T>(&mut self, key: &str, flag: Option<T>, default: Option<T>) -> anyhow::Result<Option<T>>
    where
        T: FromStr + ToString,
        T::Err: fmt::Display,
    {
        let v = self.get(key, flag, default)?;
        self.record.remove(key);
        Ok(v)
    }

    /// Errors on file keys that no command understands. Keys of other
    /// commands are ignored so one file can serve several commands.
    pub fn finish(&self) -> anyhow::Result<()> {
        let unknown: Vec<&String> = self
            .file
            .keys()
            .filter(|k| !self.used.contains(k) && !KNOWN_KEYS.contains(&k.as_str()))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(usage(format!(
                "unknown config keys: {}",
                unknown.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            )))
        }
    }
}

/// `key = value` lines; `#` starts a comment; dashes in keys read as
/// underscores.
pub fn parse_file(path: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> anyhow::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value", i + 1)))?;
        out.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(out)
}

/// Comma-separated list of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(Grid)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_dashes() {
        let m = parse_str("# header\nn-sim = 400\nalpha=1 # trailing\n\n").unwrap();
        assert_eq!(m["n_sim"], "400");
        assert_eq!(m["alpha"], "1");
        assert!(parse_str("oops").is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut r = Resolver {
            file: parse_str("alpha=2\nn=10").unwrap(),
            used: vec![],
            record: BTreeMap::new(),
        };
        assert_eq!(r.get("alpha", Some(1.0), None).unwrap(), Some(1.0));
        assert_eq!(r.get::<usize>("n", None, Some(5)).unwrap(), Some(10));
        assert_eq!(r.get::<usize>("reps", None, Some(5)).unwrap(), Some(5));
        assert!(r.finish().is_ok());
        assert_eq!(r.record["alpha"], "1");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let r = Resolver {
            file: parse_str("bogus=1").unwrap(),
            used: vec![],
            record: BTreeMap::new(),
        };
        assert!(r.finish().is_err());
    }

    #[test]
    fn grid_roundtrip() {
        let g: Grid = "0.1, 0.5,2".parse().unwrap();
        assert_eq!(g.0, vec![0.1, 0.5, 2.0]);
        assert_eq!(g.to_string(), "0.1,0.5,2");
    }
}
