//! Plain-text and JSON input formats.
//!
//! * set file: a line `N <modulus>`, then one member per line;
//! * function CSV: `index,value` or `index,re,im` rows covering `0..N`;
//! * family JSON: an array of form systems or `{"family": [...]}`;
//! * model JSON or a built-in model name.

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::counting::{CyclicFunction, SubsetOfZN};
use crate::error::{Error, Result};
use crate::forms::LinearFormSystem;
use crate::nil::FilteredNilmanifoldModel;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn parse_set(text: &str) -> Result<SubsetOfZN> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("empty set file".into()))?;
    let modulus = header
        .strip_prefix('N')
        .map(str::trim)
        .and_then(|m| m.parse::<u64>().ok())
        .ok_or_else(|| Error::Parse(format!("expected 'N <modulus>', got '{header}'")))?;
    let members = lines
        .map(|l| l.parse::<u64>().map_err(|_| Error::Parse(format!("bad member '{l}'"))))
        .collect::<Result<Vec<_>>>()?;
    SubsetOfZN::new(modulus, members)
}

pub fn format_set(set: &SubsetOfZN) -> String {
    let mut out = format!("N {}\n", set.modulus());
    for x in set.members() {
        out.push_str(&format!("{x}\n"));
    }
    out
}

pub fn read_set(path: &Path) -> Result<SubsetOfZN> {
    parse_set(&read(path)?)
}

pub fn parse_function(text: &str) -> Result<CyclicFunction> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<(u64, Complex64)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{}'", &record[i])))
        };
        if record.len() < 2 || record.len() > 3 {
            return Err(Error::Parse(format!("expected 2 or 3 columns, got {}", record.len())));
        }
        // a non-numeric first row is a header
        if rows.is_empty() && record[0].parse::<u64>().is_err() {
            continue;
        }
        let index = record[0]
            .parse::<u64>()
            .map_err(|_| Error::Parse(format!("bad index '{}'", &record[0])))?;
        let im = if record.len() == 3 { field(2)? } else { 0.0 };
        rows.push((index, Complex64::new(field(1)?, im)));
    }
    rows.sort_by_key(|r| r.0);
    if rows.iter().enumerate().any(|(i, r)| r.0 != i as u64) {
        return Err(Error::Parse("function rows must cover 0..N-1 exactly once".into()));
    }
    CyclicFunction::new(rows.into_iter().map(|r| r.1).collect())
}

pub fn read_function(path: &Path) -> Result<CyclicFunction> {
    parse_function(&read(path)?)
}

pub fn read_system(path: &Path) -> Result<LinearFormSystem> {
    LinearFormSystem::from_json(&read(path)?)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FamilyJson {
    List(Vec<LinearFormSystem>),
    Wrapped { family: Vec<LinearFormSystem> },
}

pub fn parse_family(text: &str) -> Result<Vec<LinearFormSystem>> {
    Ok(match serde_json::from_str::<FamilyJson>(text)? {
        FamilyJson::List(v) | FamilyJson::Wrapped { family: v } => v,
    })
}

pub fn read_family(path: &Path) -> Result<Vec<LinearFormSystem>> {
    parse_family(&read(path)?)
}

/// A built-in model name, or a path to a model JSON file.
pub fn load_model(spec: &str) -> Result<FilteredNilmanifoldModel> {
    match FilteredNilmanifoldModel::builtin(spec) {
        Ok(m) => Ok(m),
        Err(builtin_err) => {
            let path = Path::new(spec);
            if path.exists() {
                FilteredNilmanifoldModel::from_json_str(&read(path)?)
            } else {
                Err(builtin_err)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_round_trip() {
        let set = SubsetOfZN::new(11, vec![0, 3, 7]).unwrap();
        assert_eq!(parse_set(&format_set(&set)).unwrap(), set);
        assert_eq!(parse_set("# comment\nN 5\n\n1\n2\n").unwrap().members(), &[1, 2]);
        assert!(parse_set("5\n1").is_err());
        assert!(parse_set("N 5\n7").is_err());
    }

    #[test]
    fn function_csv() {
        let f = parse_function("index,value\n1,0.5\n0,1\n2,0.25\n").unwrap();
        assert_eq!(f.real_values().unwrap(), vec![1.0, 0.5, 0.25]);
        let g = parse_function("0,0.6,0.8\n1,0,1\n").unwrap();
        assert_eq!(g.value(0), Complex64::new(0.6, 0.8));
        assert!(parse_function("0,1\n2,1\n").is_err());
        assert!(parse_function("0,2\n").is_err());
    }

    #[test]
    fn family_forms() {
        let a = parse_family(r#"[{"forms": [[1],[2]]}]"#).unwrap();
        let b = parse_family(r#"{"family": [{"forms": [[1],[2]]}]}"#).unwrap();
        assert_eq!(a, b);
        assert!(parse_family(r#"[{"forms": [[1,2],[2]]}]"#).is_err());
    }

    #[test]
    fn models_by_name() {
        assert_eq!(load_model("heisenberg-lcs").unwrap().dim(), 3);
        assert!(load_model("no-such-model").is_err());
    }
}
