//! JSON problem-spec format: parsing, validation, and conversion into the
//! domain types.
//!
//! Complex scalars are `[re, im]` pairs and matrices are row-major nested
//! arrays of them. Exactly one payload kind is present, selected by `kind`:
//! `matrix_form` (gram + optional metric + optional perturbation),
//! `diagonal` (alpha as expression or table, optional beta and metric
//! expressions), or `grid` (plane expression + window/resolution).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagonal::{GridMultiplication, GridSpec, GrowthClass, SequenceSymbol, TailRule};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::spectral::ToleranceConfig;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(flatten)]
    pub payload: Payload,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    MatrixForm {
        gram: JsonMatrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metric: Option<JsonMatrix>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        perturbation: Option<JsonMatrix>,
    },
    Diagonal {
        alpha: SymbolSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<SymbolSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metric: Option<SymbolSpec>,
    },
    Grid {
        r: String,
        grid: GridSpec,
    },
}

/// A sequence symbol as either a closed-form expression or a table with a
/// tail rule; optional declared growth class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthClass>,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond_guard: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: ToleranceConfig) -> ToleranceConfig {
        ToleranceConfig {
            rel_tol: self.rel_tol.unwrap_or(base.rel_tol),
            rank_cutoff: self.rank_cutoff.unwrap_or(base.rank_cutoff),
            cond_guard: self.cond_guard.unwrap_or(base.cond_guard),
        }
    }
}

impl ProblemSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: ProblemSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != crate::report::SCHEMA {
            return Err(Error::Spec(format!(
                "unsupported schema `{}` (expected `{}`)",
                self.schema,
                crate::report::SCHEMA
            )));
        }
        if let Some(dims) = &self.sweep {
            if dims.is_empty() || dims[0] == 0 || dims.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Spec(
                    "sweep must be a nonempty ascending list of positive dims".into(),
                ));
            }
        }
        match &self.payload {
            Payload::MatrixForm {
                gram,
                metric,
                perturbation,
            } => {
                let g = parse_matrix(gram, "gram")?;
                g.ensure_square()?;
                for (field, m) in [("metric", metric), ("perturbation", perturbation)] {
                    if let Some(m) = m {
                        let m = parse_matrix(m, field)?;
                        if m.rows() != g.rows() || !m.is_square() {
                            return Err(Error::Spec(format!(
                                "{field} must be square with the gram dimension {}",
                                g.rows()
                            )));
                        }
                    }
                }
            }
            Payload::Diagonal {
                alpha,
                beta,
                metric,
            } => {
                alpha.to_symbol("alpha")?;
                if let Some(b) = beta {
                    b.to_symbol("beta")?;
                }
                if let Some(h) = metric {
                    h.to_symbol("metric")?;
                }
            }
            Payload::Grid { r, grid } => {
                GridMultiplication::from_expr(r, *grid)?;
            }
        }
        Ok(())
    }

    /// Spec echo for embedding in reports.
    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("spec reserialization")
    }
}

impl SymbolSpec {
    pub fn to_symbol(&self, label: &str) -> Result<SequenceSymbol> {
        let sym = match (&self.expr, &self.table) {
            (Some(text), None) => SequenceSymbol::from_expr(label, text)?,
            (None, Some(table)) => {
                if table.is_empty() {
                    return Err(Error::Spec(format!("{label}: table must be nonempty")));
                }
                let values: Vec<Complex64> =
                    table.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                for (k, v) in values.iter().enumerate() {
                    if !v.re.is_finite() || !v.im.is_finite() {
                        return Err(Error::Spec(format!(
                            "{label}: non-finite table entry at index {k}"
                        )));
                    }
                }
                SequenceSymbol::tabulated(label, values, self.tail.unwrap_or(TailRule::Zero))
            }
            (Some(_), Some(_)) => {
                return Err(Error::Spec(format!(
                    "{label}: give either `expr` or `table`, not both"
                )))
            }
            (None, None) => {
                return Err(Error::Spec(format!(
                    "{label}: one of `expr` or `table` is required"
                )))
            }
        };
        Ok(match self.growth {
            Some(g) => sym.with_growth(g),
            None => sym,
        })
    }
}

pub fn parse_matrix(raw: &JsonMatrix, field: &str) -> Result<ComplexMatrix> {
    let rows = raw.len();
    if rows == 0 {
        return Err(Error::Spec(format!("{field}: matrix must be nonempty")));
    }
    let cols = raw[0].len();
    if raw.iter().any(|r| r.len() != cols) || cols == 0 {
        return Err(Error::Spec(format!("{field}: ragged or empty matrix rows")));
    }
    let entries: Vec<Complex64> = raw
        .iter()
        .flatten()
        .map(|[re, im]| Complex64::new(*re, *im))
        .collect();
    ComplexMatrix::new(rows, cols, entries)
}
