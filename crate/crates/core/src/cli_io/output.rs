use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{DecomposedCurve, LagCurve};

/// Fixed-precision, locale-independent float: 12 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        "NaN".into()
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_else(|| "NA".into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Total,
    Same,
    Diff,
    Excess,
}

impl Part {
    pub fn code(self) -> &'static str {
        match self {
            Part::Total => "total",
            Part::Same => "same",
            Part::Diff => "diff",
            Part::Excess => "excess",
        }
    }
}

/// JSON header written on the first line of every curve CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    /// `response`, `correlation` or `excess_probability`.
    pub quantity: String,
    pub pi1: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi2: Option<String>,
    pub part: Part,
    pub units: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stock: Option<String>,
}

impl CurveMeta {
    pub fn response(pi1: &str, part: Part) -> Self {
        CurveMeta {
            quantity: "response".into(),
            pi1: pi1.into(),
            pi2: None,
            part,
            units: "half-ticks".into(),
            stock: None,
        }
    }

    pub fn correlation(pi1: &str, pi2: &str, part: Part) -> Self {
        let quantity = if part == Part::Excess {
            "excess_probability"
        } else {
            "correlation"
        };
        CurveMeta {
            quantity: quantity.into(),
            pi1: pi1.into(),
            pi2: Some(pi2.into()),
            part,
            units: "dimensionless".into(),
            stock: None,
        }
    }

    pub fn with_part(&self, part: Part) -> Self {
        CurveMeta {
            part,
            ..self.clone()
        }
    }

    /// `R_MOp_same`, `C_MO0_LOp_diff`, ...
    pub fn file_stem(&self) -> String {
        let prefix = if self.quantity == "response" {
            "R"
        } else {
            "C"
        };
        match &self.pi2 {
            Some(p2) => format!("{prefix}_{}_{p2}_{}", self.pi1, self.part.code()),
            None => format!("{prefix}_{}_{}", self.pi1, self.part.code()),
        }
    }
}

/// `# {meta}` line, then `lag,value,count`.
pub fn curve_csv(meta: &CurveMeta, curve: &LagCurve) -> String {
    let mut s = String::with_capacity(64 + 32 * curve.len());
    s.push_str("# ");
    s.push_str(&serde_json::to_string(meta).expect("meta serializes"));
    s.push_str("\nlag,value,count\n");
    for (l, v, c) in curve.iter() {
        s.push_str(&format!("{l},{},{c}\n", fmt_f64(v)));
    }
    s
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    Ok(())
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<PathBuf> {
    create_parent(path)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

pub fn write_curve_csv(dir: &Path, meta: &CurveMeta, curve: &LagCurve) -> Result<PathBuf> {
    write_text(
        &dir.join(format!("{}.csv", meta.file_stem())),
        &curve_csv(meta, curve),
    )
}

/// Write the requested parts of a decomposed curve, one file each.
pub fn write_decomposed(
    dir: &Path,
    meta: &CurveMeta,
    curve: &DecomposedCurve,
    parts: &[Part],
) -> Result<Vec<PathBuf>> {
    parts
        .iter()
        .map(|&p| {
            let c = match p {
                Part::Total => &curve.total,
                Part::Same => &curve.same,
                Part::Diff => &curve.diff,
                Part::Excess => {
                    return Err(Error::Config(
                        "excess is not a part of a decomposed curve".into(),
                    ))
                }
            };
            write_curve_csv(dir, &meta.with_part(p), c)
        })
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Plain table; cells are already formatted.
pub(crate) fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}
