//! Three-valued verdicts and the structural report emitted by the analyzer.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Result of a property check that may quantify over an infinite set:
/// HOLDS and FAILS carry a witness, UNKNOWN carries the search bound.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "UPPERCASE")]
pub enum Verdict {
    Holds { witness: String },
    Fails { witness: String },
    Unknown { bound: usize },
}

impl Verdict {
    pub fn holds(witness: impl Into<String>) -> Verdict {
        Verdict::Holds { witness: witness.into() }
    }

    pub fn fails(witness: impl Into<String>) -> Verdict {
        Verdict::Fails { witness: witness.into() }
    }

    pub fn unknown(bound: usize) -> Verdict {
        Verdict::Unknown { bound }
    }

    pub fn is_holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }

    pub fn is_fails(&self) -> bool {
        matches!(self, Verdict::Fails { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown { .. })
    }

    pub fn short(&self) -> &'static str {
        match self {
            Verdict::Holds { .. } => "HOLDS",
            Verdict::Fails { .. } => "FAILS",
            Verdict::Unknown { .. } => "UNKNOWN",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds { witness } => write!(f, "HOLDS ({})", witness),
            Verdict::Fails { witness } => write!(f, "FAILS ({})", witness),
            Verdict::Unknown { bound } => write!(f, "UNKNOWN (searched up to bound {})", bound),
        }
    }
}

/// One property check with the level it was computed at and the supporting
/// mathematical fact.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    #[serde(flatten)]
    pub verdict: Verdict,
    /// Depth / word bound / level the verdict is relative to.
    pub level: String,
    /// The mathematical fact the verdict rests on, self-contained.
    pub citation: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructuralReport {
    pub version: u32,
    pub action: String,
    pub checks: Vec<CheckResult>,
    pub classification: String,
    pub notes: Vec<String>,
    /// Always 0 in emitted files so reports are byte-identical across runs;
    /// measured wall time goes to stderr.
    pub timing_ms: u64,
}

impl StructuralReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<StructuralReport, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("structural report (v{})\n", self.version));
        out.push_str(&format!("action: {}\n", self.action));
        out.push_str(&format!("{}\n", "-".repeat(72)));
        for c in &self.checks {
            out.push_str(&format!(
                "{:<22} {:<8} {}\n",
                c.name,
                c.verdict.short(),
                match &c.verdict {
                    Verdict::Holds { witness } | Verdict::Fails { witness } => witness.clone(),
                    Verdict::Unknown { bound } => format!("searched up to bound {}", bound),
                }
            ));
            out.push_str(&format!("{:<22} {:<8} level: {}; by: {}\n", "", "", c.level, c.citation));
        }
        out.push_str(&format!("{}\n", "-".repeat(72)));
        out.push_str(&format!("classification: {}\n", self.classification));
        for n in &self.notes {
            out.push_str(&format!("note: {}\n", n));
        }
        out
    }
}
