//! Report data model: the JSON contract emitted by every command.
//!
//! A report echoes the parsed problem spec, lists one record per check with
//! its anchor string, measured residual or witness, and the tolerance it was
//! judged against, and rolls the verdicts up into `overall`. Serialization
//! order is fixed by the struct layout and all maps are ordered, so a report
//! is byte-identical across runs given the same spec and seed (timestamps
//! are optional and excluded under `--no-timestamp`).

use serde::Serialize;
use serde_json::Value;

use crate::matrix::ComplexMatrix;

pub const SCHEMA: &str = "formkit/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// Theorem/example anchor the check traces back to, e.g. "Thm 4.13".
    pub anchor: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    /// Pass/fail from a residual measured against a tolerance.
    pub fn bounded(name: &str, anchor: &str, residual: f64, tolerance: f64) -> Self {
        CheckRecord {
            name: name.to_string(),
            anchor: anchor.to_string(),
            verdict: if residual <= tolerance {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            residual: Some(residual),
            tolerance: Some(tolerance),
            witness: None,
            note: None,
        }
    }

    pub fn asserted(name: &str, anchor: &str, ok: bool) -> Self {
        CheckRecord {
            name: name.to_string(),
            anchor: anchor.to_string(),
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            residual: None,
            tolerance: None,
            witness: None,
            note: None,
        }
    }

    /// A value-reporting record that always passes (the value itself is the
    /// deliverable, e.g. a semiboundedness constant).
    pub fn reported(name: &str, anchor: &str, witness: Value) -> Self {
        CheckRecord {
            name: name.to_string(),
            anchor: anchor.to_string(),
            verdict: Verdict::Pass,
            residual: None,
            tolerance: None,
            witness: Some(witness),
            note: None,
        }
    }

    pub fn inconclusive(name: &str, anchor: &str, note: &str) -> Self {
        CheckRecord {
            name: name.to_string(),
            anchor: anchor.to_string(),
            verdict: Verdict::Inconclusive,
            residual: None,
            tolerance: None,
            witness: None,
            note: Some(note.to_string()),
        }
    }

    pub fn with_witness(mut self, witness: Value) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: String,
    pub tool_version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub seed: u64,
    pub spec: Value,
    pub checks: Vec<CheckRecord>,
    pub overall: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Value>,
}

impl Report {
    pub fn new(command: &str, seed: u64, spec: Value, timestamp: bool) -> Self {
        Report {
            schema: SCHEMA.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            generated_at: timestamp.then(unix_timestamp),
            seed,
            spec,
            checks: Vec::new(),
            overall: Verdict::Pass,
        outputs: None,
        }
    }

    pub fn push(&mut self, check: CheckRecord) {
        self.checks.push(check);
    }

    pub fn set_outputs(&mut self, outputs: Value) {
        self.outputs = Some(outputs);
    }

    /// fail if any check failed, else inconclusive if any check was, else pass.
    pub fn finalize(mut self) -> Self {
        let mut overall = Verdict::Pass;
        for c in &self.checks {
            match c.verdict {
                Verdict::Fail => {
                    overall = Verdict::Fail;
                    break;
                }
                Verdict::Inconclusive => overall = Verdict::Inconclusive,
                Verdict::Pass => {}
            }
        }
        self.overall = overall;
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "formkit {} — {} (seed {})\n",
            self.tool_version, self.command, self.seed
        ));
        for c in &self.checks {
            let verdict = match c.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "FAIL",
                Verdict::Inconclusive => "inconclusive",
            };
            out.push_str(&format!("  [{verdict:>12}] {} ({})", c.name, c.anchor));
            if let Some(r) = c.residual {
                out.push_str(&format!("  residual {r:.3e}"));
            }
            if let Some(t) = c.tolerance {
                out.push_str(&format!(" <= {t:.3e}"));
            }
            if let Some(n) = &c.note {
                out.push_str(&format!("  — {n}"));
            }
            out.push('\n');
        }
        let overall = match self.overall {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "inconclusive",
        };
        out.push_str(&format!("overall: {overall}\n"));
        out
    }
}

fn unix_timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    secs.to_string()
}

/// Complex matrix as nested rows of `[re, im]` pairs.
pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|i| {
            let row: Vec<Value> = (0..m.cols())
                .map(|j| {
                    let e = m[(i, j)];
                    serde_json::json!([e.re, e.im])
                })
                .collect();
            Value::Array(row)
        })
        .collect();
    Value::Array(rows)
}
