//! Data tables for the eight reference plots of the generalized functions.
//!
//! Each column is scanned away from the well-conditioned end of its range: ascending
//! series from the left, descending series (negative step) from the right. The first
//! conditioning failure ends the column and every later cell is left empty.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::series::{eval, SeriesError, SummationPolicy};
use crate::special::{gfn, Family, GFunctionKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FigureError {
    #[error("unknown figure {0} (expected 1..8)")]
    UnknownFigure(u32),
    #[error("invalid range [{0}, {1}]")]
    InvalidRange(f64, f64),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureSpec {
    pub figure_id: u32,
    pub family: Family,
    pub orders: Vec<f64>,
    pub x_range: (f64, f64),
    pub samples: usize,
}

pub const DEFAULT_SAMPLES: usize = 301;

impl FigureSpec {
    pub fn get(figure_id: u32) -> Result<Self, FigureError> {
        const POS: [f64; 3] = [0.0, 2.0, 10.0];
        const NEG: [f64; 2] = [-4.0, -10.0];
        let (family, orders, x_range): (Family, &[f64], (f64, f64)) = match figure_id {
            1 => (Family::GenExp, &POS, (0.0, 3.0)),
            2 => (Family::GenCos, &POS, (0.0, 5.0)),
            3 => (Family::GenSin, &POS, (0.0, 5.0)),
            4 => (Family::GenCos, &NEG, (0.2, 10.0)),
            5 => (Family::GenSin, &NEG, (0.2, 10.0)),
            6 => (Family::GenCosh, &POS, (0.0, 3.0)),
            7 => (Family::GenCosh, &NEG, (0.2, 10.0)),
            8 => (Family::GenSinh, &NEG, (0.2, 10.0)),
            other => return Err(FigureError::UnknownFigure(other)),
        };
        Ok(Self {
            figure_id,
            family,
            orders: orders.to_vec(),
            x_range,
            samples: DEFAULT_SAMPLES,
        })
    }

    pub fn all() -> Vec<FigureSpec> {
        (1..=8)
            .map(|id| Self::get(id).expect("ids 1..8 exist"))
            .collect()
    }

    pub fn with_range(mut self, a: f64, b: f64) -> Result<Self, FigureError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(FigureError::InvalidRange(a, b));
        }
        self.x_range = (a, b);
        Ok(self)
    }

    pub fn with_samples(mut self, samples: usize) -> Result<Self, FigureError> {
        if samples < 2 {
            return Err(FigureError::TooFewSamples(samples));
        }
        self.samples = samples;
        Ok(self)
    }

    pub fn kinds(&self) -> Vec<GFunctionKind> {
        self.orders
            .iter()
            .map(|&n| GFunctionKind::new(self.family, n))
            .collect()
    }

    /// Equally spaced abscissae, the last one pinned to the right end.
    pub fn xs(&self) -> Vec<f64> {
        let (a, b) = self.x_range;
        let n = self.samples;
        let h = (b - a) / (n - 1) as f64;
        (0..n)
            .map(|i| if i + 1 == n { b } else { a + i as f64 * h })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanDirection {
    Ascending,
    Descending,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub label: String,
    pub direction: ScanDirection,
    #[serde(skip)]
    pub values: Vec<Option<f64>>,
    /// First abscissa that failed, if any.
    pub truncated_at: Option<f64>,
    pub reason: Option<String>,
}

impl Column {
    pub fn defined(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureTable {
    pub spec: FigureSpec,
    #[serde(skip)]
    pub xs: Vec<f64>,
    pub columns: Vec<Column>,
}

pub fn figure_table(
    spec: &FigureSpec,
    policy: &SummationPolicy,
) -> Result<FigureTable, FigureError> {
    let xs = spec.xs();
    let columns = spec
        .kinds()
        .into_iter()
        .map(|kind| column(kind, &xs, policy))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FigureTable {
        spec: spec.clone(),
        xs,
        columns,
    })
}

fn column(
    kind: GFunctionKind,
    xs: &[f64],
    policy: &SummationPolicy,
) -> Result<Column, FigureError> {
    let series = gfn(kind)?;
    let direction = if series.step() < 0.0 {
        ScanDirection::Descending
    } else {
        ScanDirection::Ascending
    };
    let order: Vec<usize> = match direction {
        ScanDirection::Ascending => (0..xs.len()).collect(),
        ScanDirection::Descending => (0..xs.len()).rev().collect(),
    };
    let mut values = vec![None; xs.len()];
    let mut truncated_at = None;
    let mut reason = None;
    for i in order {
        match eval(&series, xs[i], policy) {
            Ok(r) => values[i] = Some(r.value),
            Err(
                e @ (SeriesError::CancellationLoss { .. }
                | SeriesError::NoConvergence { .. }
                | SeriesError::Overflow { .. }
                | SeriesError::Domain { .. }),
            ) => {
                truncated_at = Some(xs[i]);
                reason = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Column {
        label: kind.label(),
        direction,
        values,
        truncated_at,
        reason,
    })
}

/// 17 significant digits, enough to round-trip every `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

impl FigureTable {
    /// Header `x,<labels>` then one row per abscissa; failed cells are empty. LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x");
        for c in &self.columns {
            out.push(',');
            out.push_str(&c.label);
        }
        out.push('\n');
        for (i, &x) in self.xs.iter().enumerate() {
            out.push_str(&format_value(x));
            for c in &self.columns {
                out.push(',');
                if let Some(v) = c.values[i] {
                    out.push_str(&format_value(v));
                }
            }
            out.push('\n');
        }
        out
    }

    /// One-line summary of where each column was cut, for logs.
    pub fn truncation_summary(&self) -> String {
        let mut s = format!("figure {}:", self.spec.figure_id);
        for c in &self.columns {
            match c.truncated_at {
                Some(x) => write!(s, " {}@{}", c.label, format_value(x)),
                None => write!(s, " {}@none", c.label),
            }
            .expect("writing to a String");
        }
        s
    }

    pub fn column(&self, label: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.label == label)
    }
}
