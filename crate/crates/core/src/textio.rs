//! Plain-text companions to Matrix Market files: complex value lists and
//! `key=value` metadata sidecars.
//!
//! A complex list has one value per line, written as `re im` (whitespace or
//! a comma between the parts) or just `re`. Blank lines and lines starting
//! with `#` or `%` are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TextError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: duplicate key \"{key}\"")]
    DuplicateKey { line: usize, key: String },
    #[error("missing key \"{0}\"")]
    MissingKey(String),
    #[error("key \"{key}\": invalid value \"{value}\"")]
    InvalidValue { key: String, value: String },
}

fn is_comment(line: &str) -> bool {
    line.is_empty() || line.starts_with('#') || line.starts_with('%')
}

fn parse_finite(tok: &str, line: usize) -> Result<f64, TextError> {
    let v: f64 = tok.parse().map_err(|_| TextError::Parse { line, msg: format!("invalid number \"{tok}\"") })?;
    if !v.is_finite() {
        return Err(TextError::Parse { line, msg: format!("non-finite value \"{tok}\"") });
    }
    Ok(v)
}

pub fn parse_complex_list(text: &str) -> Result<Vec<Complex64>, TextError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if is_comment(trimmed) {
            continue;
        }
        let toks: Vec<&str> =
            trimmed.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).collect();
        let value = match toks.as_slice() {
            [re] => Complex64::new(parse_finite(re, line)?, 0.0),
            [re, im] => Complex64::new(parse_finite(re, line)?, parse_finite(im, line)?),
            _ => return Err(TextError::Parse { line, msg: format!("expected 1 or 2 numbers, found {}", toks.len()) }),
        };
        out.push(value);
    }
    Ok(out)
}

/// One `re im` line per value, shortest round-trip formatting.
pub fn format_complex_list(values: &[Complex64]) -> String {
    let mut s = String::with_capacity(values.len() * 24);
    for v in values {
        let _ = writeln!(s, "{} {}", v.re, v.im);
    }
    s
}

/// Ordered `key=value` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metadata(BTreeMap<String, String>);

impl Metadata {
    pub fn new() -> Self {
        Self::default()
    }

    /// Keys must be nonempty and free of `=`, `#` and whitespace; values must
    /// be single-line.
    pub fn insert(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let value = value.to_string();
        assert!(
            !key.is_empty() && !key.contains(|c: char| c == '=' || c == '#' || c.is_whitespace()),
            "invalid metadata key {key:?}"
        );
        assert!(!value.contains('\n'), "metadata values are single-line");
        self.0.insert(key.to_string(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T, TextError> {
        let value = self.get(key).ok_or_else(|| TextError::MissingKey(key.to_string()))?;
        value.parse().map_err(|_| TextError::InvalidValue { key: key.to_string(), value: value.to_string() })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parse(text: &str) -> Result<Self, TextError> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) =
                trimmed.split_once('=').ok_or_else(|| TextError::Parse { line, msg: "expected key=value".into() })?;
            let key = key.trim();
            if key.is_empty() || key.contains(|c: char| c == '#' || c.is_whitespace()) {
                return Err(TextError::Parse { line, msg: format!("invalid key \"{key}\"") });
            }
            if map.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(TextError::DuplicateKey { line, key: key.to_string() });
            }
        }
        Ok(Self(map))
    }
}

impl std::fmt::Display for Metadata {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, v) in &self.0 {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_list_forms() {
        let text = "# eigenvalues\n0.9 0\n0.4, 0.7\n\n  -0.5\n% also a comment\n1e-3\t-2\n";
        let v = parse_complex_list(text).unwrap();
        assert_eq!(
            v,
            vec![
                Complex64::new(0.9, 0.0),
                Complex64::new(0.4, 0.7),
                Complex64::new(-0.5, 0.0),
                Complex64::new(1e-3, -2.0)
            ]
        );
        assert_eq!(parse_complex_list(&format_complex_list(&v)).unwrap(), v);
    }

    #[test]
    fn complex_list_errors() {
        for bad in ["1 2 3", "abc", "1 inf", "nan"] {
            assert!(parse_complex_list(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn metadata_round_trip() {
        let mut m = Metadata::new();
        m.insert("n", 1000).insert("lambda1", 0.9).insert("seed", 42u64);
        let parsed = Metadata::parse(&m.to_string()).unwrap();
        assert_eq!(parsed, m);
        assert_eq!(parsed.require::<usize>("n").unwrap(), 1000);
        assert!(matches!(parsed.require::<usize>("lambda1"), Err(TextError::InvalidValue { .. })));
        assert!(matches!(parsed.require::<usize>("nnz"), Err(TextError::MissingKey(_))));
    }

    #[test]
    fn metadata_errors() {
        assert!(matches!(Metadata::parse("a=1\na=2"), Err(TextError::DuplicateKey { line: 2, .. })));
        assert!(Metadata::parse("novalue").is_err());
        assert!(Metadata::parse("=1").is_err());
        assert!(Metadata::parse("a b=1").is_err());
        assert_eq!(Metadata::parse("# c\n a = x=y \n").unwrap().get("a"), Some("x=y"));
    }
}
