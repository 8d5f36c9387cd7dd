//! Instance files: JSON with `alpha`, `beta`, `k` and an optional `label`.

use std::path::Path;

use ctbounds::{Cap, CapMatrix, Marginals};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// A cell bound: a nonnegative integer or the token `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellSpec {
    Finite(u64),
    Token(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KSpec {
    Token(String),
    Matrix(Vec<Vec<CellSpec>>),
}

impl Default for KSpec {
    fn default() -> Self {
        KSpec::Token("inf".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub alpha: Vec<u64>,
    pub beta: Vec<u64>,
    #[serde(default)]
    pub k: KSpec,
}

fn inf_token(s: &str) -> Result<Cap, CliError> {
    if s == "inf" {
        Ok(Cap::Inf)
    } else {
        Err(CliError::Input(format!("unknown cell bound token '{s}' (only \"inf\" is accepted)")))
    }
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<InstanceFile, CliError> {
        let inst: InstanceFile =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed instance: {e}")))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn load(path: &Path) -> Result<InstanceFile, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        InstanceFile::from_json(&text)
    }

    pub fn from_parts(label: Option<String>, marginals: &Marginals, k: &CapMatrix) -> InstanceFile {
        let k = if k.is_all_infinity() {
            KSpec::default()
        } else {
            KSpec::Matrix(
                (0..k.rows())
                    .map(|i| {
                        (0..k.cols())
                            .map(|j| match k.get(i, j) {
                                Cap::Finite(v) => CellSpec::Finite(v),
                                Cap::Inf => CellSpec::Token("inf".into()),
                            })
                            .collect()
                    })
                    .collect(),
            )
        };
        InstanceFile { label, alpha: marginals.alpha().to_vec(), beta: marginals.beta().to_vec(), k }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.marginals()?;
        self.caps()?;
        Ok(())
    }

    pub fn marginals(&self) -> Result<Marginals, CliError> {
        Ok(Marginals::new(self.alpha.clone(), self.beta.clone())?)
    }

    pub fn caps(&self) -> Result<CapMatrix, CliError> {
        let (m, n) = (self.alpha.len(), self.beta.len());
        match &self.k {
            KSpec::Token(t) => {
                inf_token(t)?;
                Ok(CapMatrix::infinite(m, n))
            }
            KSpec::Matrix(rows) => {
                if rows.len() != m || rows.iter().any(|r| r.len() != n) {
                    return Err(CliError::Input(format!("k must be a {m}x{n} array")));
                }
                let rows = rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|c| match c {
                                CellSpec::Finite(v) => Ok(Cap::Finite(*v)),
                                CellSpec::Token(t) => inf_token(t),
                            })
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(CapMatrix::from_rows(rows)?)
            }
        }
    }

    /// Label for report rows: the explicit label or the given fallback.
    pub fn name(&self, fallback: &str) -> String {
        self.label.clone().unwrap_or_else(|| fallback.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixed_caps() {
        let inst = InstanceFile::from_json(r#"{"alpha":[1,1],"beta":[2],"k":[[1],["inf"]]}"#).unwrap();
        assert_eq!(inst.caps().unwrap().get(1, 0), Cap::Inf);
        assert_eq!(inst.caps().unwrap().get(0, 0), Cap::Finite(1));
    }

    #[test]
    fn rejects_bad_token_and_shape() {
        assert!(InstanceFile::from_json(r#"{"alpha":[1],"beta":[1],"k":"Infinity"}"#).is_err());
        assert!(InstanceFile::from_json(r#"{"alpha":[1],"beta":[1],"k":[[1,1]]}"#).is_err());
        assert!(InstanceFile::from_json(r#"{"alpha":[1],"beta":[1],"k":[["INF"]]}"#).is_err());
    }

    #[test]
    fn unequal_sums_name_both() {
        let err = InstanceFile::from_json(r#"{"alpha":[2,1],"beta":[1,1]}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('3') && msg.contains('2'), "{msg}");
    }
}
