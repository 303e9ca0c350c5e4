//! Instance files.
//!
//! JSON (`format: "kspin-1"`) carries arbitrary K-local terms plus generator
//! metadata. The plain-text 2-local format has one `i j J` line per term,
//! where `i == j` denotes a field on variable `i`; `#` starts a comment.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{IsingProblem, ProblemError, SpinConfig, Term};

pub const KSPIN_FORMAT: &str = "kspin-1";

#[derive(Debug, Error)]
pub enum InstanceIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {msg}")]
    Text { line: usize, msg: String },
    #[error("unsupported instance format {0:?}")]
    Format(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetadata {
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_optimum: Option<SpinConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub format: String,
    pub n: usize,
    pub terms: Vec<Term>,
    pub metadata: InstanceMetadata,
}

impl InstanceFile {
    pub fn new(problem: &IsingProblem, metadata: InstanceMetadata) -> Self {
        Self {
            format: KSPIN_FORMAT.to_owned(),
            n: problem.num_vars(),
            terms: problem.terms().to_vec(),
            metadata,
        }
    }

    pub fn problem(&self) -> Result<IsingProblem, InstanceIoError> {
        if self.format != KSPIN_FORMAT {
            return Err(InstanceIoError::Format(self.format.clone()));
        }
        Ok(IsingProblem::new(self.n, self.terms.iter().map(|t| (t.vars.clone(), t.coeff)))?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Parses the plain-text 2-local format. The variable count is one more than
/// the largest index seen.
pub fn parse_text(src: &str) -> Result<IsingProblem, InstanceIoError> {
    let mut terms = Vec::new();
    let mut n = 0;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| InstanceIoError::Text { line: i + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(err(format!("expected `i j J`, got {line:?}")));
        }
        let a: usize = fields[0].parse().map_err(|e| err(format!("{e}")))?;
        let b: usize = fields[1].parse().map_err(|e| err(format!("{e}")))?;
        let c: f64 = fields[2].parse().map_err(|e| err(format!("{e}")))?;
        n = n.max(a + 1).max(b + 1);
        terms.push(if a == b { (vec![a], c) } else { (vec![a, b], c) });
    }
    Ok(IsingProblem::new(n, terms)?)
}

/// Writes a ≤2-local problem in the plain-text format.
pub fn to_text(problem: &IsingProblem) -> Result<String, ProblemError> {
    let order = problem.order();
    if order > 2 {
        return Err(ProblemError::Unsupported { order, max: 2 });
    }
    let mut out = String::new();
    for t in problem.terms() {
        let (a, b) = match t.vars.as_slice() {
            [a] => (*a, *a),
            [a, b] => (*a, *b),
            _ => unreachable!(),
        };
        out.push_str(&format!("{a} {b} {}\n", t.coeff));
    }
    Ok(out)
}

/// Reads either format, deciding by the first non-blank character.
pub fn read_instance(path: &Path) -> Result<InstanceFile, InstanceIoError> {
    let src = std::fs::read_to_string(path)?;
    if src.trim_start().starts_with('{') {
        let file: InstanceFile = serde_json::from_str(&src)?;
        file.problem()?;
        Ok(file)
    } else {
        let problem = parse_text(&src)?;
        Ok(InstanceFile::new(
            &problem,
            InstanceMetadata { generator: "text".into(), ..Default::default() },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::weak_strong_pair;

    #[test]
    fn json_round_trip_keeps_metadata() {
        let p = weak_strong_pair(0.44, -1.0);
        let meta = InstanceMetadata {
            generator: "weak-strong-pair".into(),
            h1: Some(0.44),
            h2: Some(-1.0),
            reference_optimum: Some(SpinConfig::uniform(16, -1)),
            reference_energy: Some(-40.48),
            ..Default::default()
        };
        let file = InstanceFile::new(&p, meta);
        let json = file.to_json();
        assert!(json.contains("\"format\": \"kspin-1\""));
        assert!(!json.contains("pattern"));
        let back: InstanceFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.problem().unwrap(), p);
    }

    #[test]
    fn wrong_format_tag() {
        let mut file = InstanceFile::new(&weak_strong_pair(0.44, -1.0), Default::default());
        file.format = "kspin-9".into();
        assert!(matches!(file.problem(), Err(InstanceIoError::Format(_))));
    }

    #[test]
    fn text_format() {
        let p = parse_text("# ring\n0 1 1.0\n1 2 -0.5\n2 2 0.25 # field\n\n").unwrap();
        assert_eq!(p.num_vars(), 3);
        assert_eq!(p.terms().len(), 3);
        assert_eq!(parse_text(&to_text(&p).unwrap()).unwrap(), p);
        assert!(matches!(parse_text("0 1"), Err(InstanceIoError::Text { line: 1, .. })));
        let cubic = IsingProblem::new(3, [(vec![0, 1, 2], 1.0)]).unwrap();
        assert!(to_text(&cubic).is_err());
    }
}
