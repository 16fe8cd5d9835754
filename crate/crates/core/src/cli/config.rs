//! Flat `key = value` parameter files.

use std::collections::BTreeMap;

/// Parse `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; keys may be written with or without a leading `--`.
pub fn parse(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value, got {line:?}", n + 1))?;
        let key = key.trim().trim_start_matches("--").to_string();
        if key.is_empty() {
            return Err(format!("line {}: empty key", n + 1));
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(format!("line {}: duplicate key {key}", n + 1));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs() {
        let m = parse("# sweep\neta = 0.6\n\n--a2=0.5\nvar=t1\n").unwrap();
        assert_eq!(m["eta"], "0.6");
        assert_eq!(m["a2"], "0.5");
        assert_eq!(m["var"], "t1");
        assert_eq!(m.len(), 3);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse("eta 0.6").is_err());
        assert!(parse("=3").is_err());
        assert!(parse("eta=1\neta=2").is_err());
    }
}
