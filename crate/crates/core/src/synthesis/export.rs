//! Sampled fields and paths with CSV and JSON export.

use serde::{Deserialize, Serialize};

use super::{HurstFunction, TruncationSpec};

/// Everything needed to regenerate a sample bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisMeta {
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
    pub scale: f64,
    pub coef_scale: f64,
    pub wavelet_order: usize,
    pub truncation: TruncationSpec,
    pub q: usize,
    /// Size of the truncated index set.
    pub terms: u64,
    /// `sup |outermost-level terms| / sup |total|` over the grid.
    pub shell_fraction: f64,
    pub shell_threshold: f64,
    /// Set when the outermost shell still carries more than the threshold.
    pub truncation_warning: bool,
    pub table_v_range: (f64, f64),
    /// Kernel terms with argument beyond this are dropped.
    pub table_x_max: f64,
}

fn header_lines(provenance: &[String]) -> String {
    provenance.iter().map(|l| format!("# {l}\n")).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldSample {
    pub u_grid: Vec<f64>,
    pub v_grid: Vec<f64>,
    pub q: usize,
    /// `values[i][m]` at `(u_grid[i], v_grid[m])`.
    pub values: Vec<Vec<f64>>,
    pub meta: SynthesisMeta,
}

impl FieldSample {
    /// Rows `u,v,X` preceded by `# `-prefixed provenance lines.
    pub fn to_csv(&self, provenance: &[String]) -> String {
        let mut out = header_lines(provenance);
        out.push_str("u,v,X\n");
        for (i, &u) in self.u_grid.iter().enumerate() {
            for (m, &v) in self.v_grid.iter().enumerate() {
                out.push_str(&format!("{u:.17e},{v:.17e},{:.17e}\n", self.values[i][m]));
            }
        }
        out
    }

    /// Row of values at one v index.
    pub fn column(&self, m: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[m]).collect()
    }

    pub fn sidecar(&self, provenance: serde_json::Value) -> serde_json::Value {
        serde_json::json!({ "kind": "field", "q": self.q, "points": self.u_grid.len() * self.v_grid.len(),
            "meta": self.meta, "provenance": provenance })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathSample {
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub hurst: HurstFunction,
    pub meta: SynthesisMeta,
}

impl PathSample {
    /// Rows `t,Y,H` preceded by `# `-prefixed provenance lines.
    pub fn to_csv(&self, provenance: &[String]) -> String {
        let mut out = header_lines(provenance);
        out.push_str("t,Y,H\n");
        for (&t, &y) in self.t_grid.iter().zip(&self.values) {
            out.push_str(&format!("{t:.17e},{y:.17e},{:.17e}\n", self.hurst.eval(t)));
        }
        out
    }

    /// Parses the `t,Y` columns of [`PathSample::to_csv`] output (comment
    /// lines and any further columns are ignored).
    pub fn parse_csv(text: &str) -> crate::Result<(Vec<f64>, Vec<f64>)> {
        let mut t = Vec::new();
        let mut y = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(|c: char| c.is_ascii_alphabetic()) {
                continue;
            }
            let mut cols = line.split(',');
            let mut next = || -> crate::Result<f64> {
                cols.next()
                    .and_then(|c| c.trim().parse::<f64>().ok())
                    .ok_or_else(|| crate::LabError::Format(format!("line {}: expected two numeric columns", n + 1)))
            };
            t.push(next()?);
            y.push(next()?);
        }
        Ok((t, y))
    }

    pub fn sidecar(&self, provenance: serde_json::Value) -> serde_json::Value {
        serde_json::json!({ "kind": "path", "points": self.t_grid.len(), "hurst": self.hurst,
            "meta": self.meta, "provenance": provenance })
    }
}
