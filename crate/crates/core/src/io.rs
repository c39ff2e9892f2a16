//! JSON file formats for ansatz specs and reduced equations.
//!
//! ```json
//! {"y": "x0", "z": "sqrt(x1^2 + x2^2 + x3^2)",
//!  "opaque": {"Phi": "square"},
//!  "domain": {"min": [-2, -2, -2, -2], "max": [2, 2, 2, 2],
//!             "exclude": ["sqrt(x1^2 + x2^2 + x3^2)", {"expr": "x0", "radius": 0.01}]}}
//! ```
//!
//! A bare string in `exclude` is a tube of the default radius.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ansatz::{AnsatzError, AnsatzSpec, Invariants, ReducedEquation};
use crate::expr::{Builtin, Exclusion, Expr, OpaqueImpls, SamplingBox, COORDS};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Ansatz(#[from] AnsatzError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExclusionFile {
    Tube(Expr),
    Sized { expr: Expr, radius: f64 },
}

impl From<ExclusionFile> for Exclusion {
    fn from(e: ExclusionFile) -> Self {
        match e {
            ExclusionFile::Tube(expr) => Exclusion::tube(expr),
            ExclusionFile::Sized { expr, radius } => Exclusion { expr, radius },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub min: [f64; 4],
    pub max: [f64; 4],
    #[serde(default)]
    pub exclude: Vec<ExclusionFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzFile {
    pub y: Expr,
    pub z: Expr,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub opaque: BTreeMap<String, Builtin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainFile>,
}

impl AnsatzFile {
    pub fn into_spec(self) -> Result<AnsatzSpec, AnsatzError> {
        let opaque: OpaqueImpls = self.opaque.into_iter().map(|(k, b)| (k, b.into_impl())).collect();
        let domain = match self.domain {
            None => SamplingBox::spacetime(),
            Some(d) => {
                let mut b = SamplingBox::new(&COORDS, &d.min, &d.max);
                b.exclude = d.exclude.into_iter().map(Exclusion::from).collect();
                b
            }
        };
        AnsatzSpec::with_parts(self.y, self.z, opaque, domain)
    }
}

pub fn parse_ansatz_json(text: &str) -> Result<AnsatzSpec, IoError> {
    let file: AnsatzFile = serde_json::from_str(text)?;
    Ok(file.into_spec()?)
}

/// Coefficients plus an optional `F`, which defaults to the opaque `F(phi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedFile {
    #[serde(flatten)]
    pub coeffs: Invariants,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Expr>,
}

pub fn parse_reduced_json(text: &str) -> Result<ReducedEquation, IoError> {
    let file: ReducedFile = serde_json::from_str(text)?;
    let rhs = file.rhs.unwrap_or_else(ReducedEquation::generic_rhs);
    Ok(ReducedEquation::new(file.coeffs, rhs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn ansatz_file_with_everything() {
        let text = r#"{"y": "x1 + Phi(x0 + x3)", "z": "x2", "opaque": {"Phi": "sin"},
            "domain": {"min": [0, -1, -1, -1], "max": [1, 1, 1, 1],
                       "exclude": ["x2", {"expr": "x1", "radius": 0.25}]}}"#;
        let spec = parse_ansatz_json(text).unwrap();
        assert_eq!(spec.z, parse("x2").unwrap());
        assert!(spec.opaque.contains_key("Phi"));
        assert_eq!(spec.domain.min, vec![0.0, -1.0, -1.0, -1.0]);
        assert_eq!(spec.domain.exclude[0].radius, crate::expr::DEFAULT_TUBE);
        assert_eq!(spec.domain.exclude[1].radius, 0.25);
    }

    #[test]
    fn ansatz_file_errors() {
        assert!(matches!(parse_ansatz_json(r#"{"y": "x0 +", "z": "x1"}"#), Err(IoError::Json(_))));
        assert!(matches!(parse_ansatz_json(r#"{"y": "x0", "z": "x1", "opaque": {"Phi": "tan"}}"#), Err(IoError::Json(_))));
        assert!(matches!(parse_ansatz_json(r#"{"y": "Phi(x0)", "z": "x1"}"#), Err(IoError::Ansatz(AnsatzError::MissingOpaque(_)))));
        assert!(parse_ansatz_json(r#"{"y": "x0", "z": "x1", "extra": 1}"#).is_err());
    }

    #[test]
    fn reduced_file_defaults_rhs() {
        let eq = parse_reduced_json(r#"{"r": "1", "q": "0", "s": "-1", "R": "0", "S": "-2/z"}"#).unwrap();
        assert_eq!(eq.rhs, ReducedEquation::generic_rhs());
        assert_eq!(eq.coeffs.box_z, parse("-2/z").unwrap());
        let eq = parse_reduced_json(r#"{"r": "1", "q": "0", "s": "-1", "R": "0", "S": "0", "F": "sin(phi)"}"#).unwrap();
        assert_eq!(eq.rhs, parse("sin(phi)").unwrap());
        assert!(parse_reduced_json(r#"{"r": "x0", "q": "0", "s": "-1", "R": "0", "S": "0"}"#).is_err());
    }
}
