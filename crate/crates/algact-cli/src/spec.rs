//! The versioned action-specification file format.

use algact::action::{Action, MatrixAction, ShiftAction};
use algact::analysis::AnalysisOptions;
use algact::matrix::{int, IntMatrix};
use algact::monoid::{MonoidKind, MonoidPresentation};
use algact::shift::FiniteGroup;
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub enum SpecError {
    /// Malformed JSON or a schema violation: exit code 3.
    Schema(String),
    /// A well-formed spec describing an invalid action: exit code 2.
    InvalidAction(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpecFile {
    pub version: u32,
    pub backend: String,
    pub monoid: MonoidSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<Vec<i64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<SigmaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonoidSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub letters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<u64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaSpec {
    pub order: usize,
    /// "cyclic" (default) or an explicit row-major multiplication table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<serde_json::Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_bound: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<String>>,
}

impl ActionSpecFile {
    pub fn parse(text: &str) -> Result<ActionSpecFile, SpecError> {
        serde_json::from_str(text).map_err(|e| {
            SpecError::Schema(format!(
                "malformed spec at line {}, column {}: {}",
                e.line(),
                e.column(),
                e
            ))
        })
    }

    pub fn monoid(&self) -> Result<MonoidPresentation, SpecError> {
        let kind = match self.monoid.kind.as_str() {
            "free" => MonoidKind::Free {
                letters: self
                    .monoid
                    .letters
                    .ok_or_else(|| SpecError::Schema("free monoid needs \"letters\"".into()))?,
            },
            "free_abelian" => MonoidKind::FreeAbelian {
                rank: self
                    .monoid
                    .rank
                    .ok_or_else(|| SpecError::Schema("free_abelian monoid needs \"rank\"".into()))?,
            },
            "numerical" => MonoidKind::Numerical {
                generators: self
                    .monoid
                    .generators
                    .clone()
                    .ok_or_else(|| SpecError::Schema("numerical monoid needs \"generators\"".into()))?,
            },
            other => {
                return Err(SpecError::Schema(format!(
                    "unsupported monoid kind {:?}; expected free | free_abelian | numerical",
                    other
                )))
            }
        };
        MonoidPresentation::new(kind).map_err(|e| SpecError::Schema(e.to_string()))
    }

    pub fn to_action(&self) -> Result<Action, SpecError> {
        if self.version != 1 {
            return Err(SpecError::Schema(format!(
                "unsupported spec version {} (expected 1)",
                self.version
            )));
        }
        let monoid = self.monoid()?;
        match self.backend.as_str() {
            "matrix" => {
                let n = self
                    .n
                    .ok_or_else(|| SpecError::Schema("matrix backend needs \"n\"".into()))?;
                let gens_raw = self
                    .generators
                    .as_ref()
                    .ok_or_else(|| SpecError::Schema("matrix backend needs \"generators\"".into()))?;
                let mut gens = Vec::new();
                for (i, rows) in gens_raw.iter().enumerate() {
                    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                        return Err(SpecError::Schema(format!(
                            "generator {} is not an {}x{} matrix",
                            i, n, n
                        )));
                    }
                    let mut data = Vec::with_capacity(n * n);
                    for row in rows {
                        data.extend(row.iter().map(|&v| int(v)));
                    }
                    gens.push(IntMatrix::new(n, n, data));
                }
                let act = MatrixAction::new(monoid, n, gens)
                    .map_err(|e| SpecError::InvalidAction(e.to_string()))?;
                // injectivity is a hard requirement of the format
                for (i, g) in act.gens.iter().enumerate() {
                    if g.det() == int(0) {
                        return Err(SpecError::InvalidAction(format!(
                            "generator {} is singular",
                            act.monoid.generator_name(i)
                        )));
                    }
                }
                Ok(Action::Matrix(act))
            }
            "shift" => {
                let sigma_spec = self
                    .sigma
                    .as_ref()
                    .ok_or_else(|| SpecError::Schema("shift backend needs \"sigma\"".into()))?;
                if sigma_spec.order < 2 {
                    return Err(SpecError::Schema("sigma order must be >= 2".into()));
                }
                let sigma = match &sigma_spec.table {
                    None => FiniteGroup::cyclic(sigma_spec.order)
                        .map_err(|e| SpecError::Schema(e.to_string()))?,
                    Some(serde_json::Value::String(s)) if s == "cyclic" => {
                        FiniteGroup::cyclic(sigma_spec.order)
                            .map_err(|e| SpecError::Schema(e.to_string()))?
                    }
                    Some(serde_json::Value::Array(rows)) => {
                        let mut table = Vec::new();
                        for row in rows {
                            let row = row.as_array().ok_or_else(|| {
                                SpecError::Schema("sigma table must be an array of arrays".into())
                            })?;
                            for v in row {
                                let v = v.as_u64().ok_or_else(|| {
                                    SpecError::Schema("sigma table entries must be indices".into())
                                })?;
                                table.push(v as usize);
                            }
                        }
                        FiniteGroup::from_table(table, format!("table({})", sigma_spec.order))
                            .map_err(|e| SpecError::Schema(e.to_string()))?
                    }
                    Some(other) => {
                        return Err(SpecError::Schema(format!(
                            "sigma table must be \"cyclic\" or an explicit table, got {}",
                            other
                        )))
                    }
                };
                let act = ShiftAction::new(monoid, sigma)
                    .map_err(|e| SpecError::InvalidAction(e.to_string()))?;
                Ok(Action::Shift(act))
            }
            other => Err(SpecError::Schema(format!(
                "unsupported backend {:?}; expected matrix | shift",
                other
            ))),
        }
    }

    pub fn options(&self) -> AnalysisOptions {
        let mut opts = AnalysisOptions::default();
        if let Some(a) = &self.analysis {
            if let Some(d) = a.depth {
                opts.depth = d;
            }
            if let Some(w) = a.word_bound {
                opts.word_bound = w;
            }
            if let Some(l) = a.level {
                opts.level = l;
            }
            if let Some(c) = &a.checks {
                opts.checks = c.clone();
            }
        }
        opts
    }
}
