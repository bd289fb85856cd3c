use std::fmt::Write as _;
use std::path::Path;

use cvmux_core::CovarianceState;
use serde::{Deserialize, Serialize};

use super::{fmt_f64, parse_json, read_bytes, sha256_hex, write_text};
use crate::error::{AppError, AppResult};

pub const UNITS: &str = "snu_vacuum_1";

/// Quadrature order of the matrix rows in a file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// `x1, p1, x2, p2, …`
    #[default]
    Interleaved,
    /// `x1, …, xN, p1, …, pN`
    XxPpBlocks,
}

impl Ordering {
    fn name(self) -> &'static str {
        match self {
            Ordering::Interleaved => "interleaved",
            Ordering::XxPpBlocks => "xx_pp_blocks",
        }
    }

    /// Interleaved row of file row `r`.
    fn to_interleaved(self, r: usize, n_modes: usize) -> usize {
        match self {
            Ordering::Interleaved => r,
            Ordering::XxPpBlocks if r < n_modes => 2 * r,
            Ordering::XxPpBlocks => 2 * (r - n_modes) + 1,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CovarianceDoc {
    n_modes: usize,
    units: String,
    ordering: Ordering,
    matrix: Vec<f64>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

/// A covariance file as read, with its hash for provenance.
#[derive(Debug, Clone)]
pub struct CovarianceInput {
    pub state: CovarianceState,
    pub ordering: Ordering,
    pub sha256: String,
}

pub fn parse_covariance(path: &Path, bytes: &[u8]) -> AppResult<CovarianceInput> {
    let doc: CovarianceDoc = parse_json(path, bytes)?;
    let bad = |msg: String| AppError::Validation(format!("{}: {msg}", path.display()));
    if doc.units != UNITS {
        return Err(bad(format!("units {:?}, expected {UNITS:?}", doc.units)));
    }
    if doc.n_modes == 0 {
        return Err(bad("n_modes must be at least 1".into()));
    }
    let dim = 2 * doc.n_modes;
    if doc.matrix.len() != dim * dim {
        return Err(bad(format!(
            "matrix has {} entries, {} modes need {}",
            doc.matrix.len(),
            doc.n_modes,
            dim * dim
        )));
    }
    let mut data = vec![0.0; dim * dim];
    for r in 0..dim {
        let ri = doc.ordering.to_interleaved(r, doc.n_modes);
        for c in 0..dim {
            let ci = doc.ordering.to_interleaved(c, doc.n_modes);
            data[ri * dim + ci] = doc.matrix[r * dim + c];
        }
    }
    let mut state =
        CovarianceState::from_row_major(doc.n_modes, &data).map_err(|e| bad(e.to_string()))?;
    if let Some(labels) = doc.labels {
        state = state.with_labels(labels).map_err(|e| bad(e.to_string()))?;
    }
    Ok(CovarianceInput {
        state,
        ordering: doc.ordering,
        sha256: sha256_hex(bytes),
    })
}

pub fn read_covariance(path: &Path) -> AppResult<CovarianceInput> {
    parse_covariance(path, &read_bytes(path)?)
}

/// JSON text of `state`, one matrix row per line.
pub fn render_covariance(state: &CovarianceState, ordering: Ordering) -> String {
    let n = state.n_modes();
    let dim = 2 * n;
    let m = state.matrix();
    let mut s = String::new();
    let _ = writeln!(s, "{{\n  \"n_modes\": {n},\n  \"units\": \"{UNITS}\",");
    let _ = writeln!(
        s,
        "  \"ordering\": \"{}\",\n  \"matrix\": [",
        ordering.name()
    );
    for r in 0..dim {
        let ri = ordering.to_interleaved(r, n);
        let row: Vec<String> = (0..dim)
            .map(|c| fmt_f64(m[(ri, ordering.to_interleaved(c, n))]))
            .collect();
        let sep = if r + 1 == dim { "" } else { "," };
        let _ = writeln!(s, "    {}{sep}", row.join(", "));
    }
    match state.labels() {
        Some(labels) => {
            let labels = serde_json::to_string(labels).expect("strings serialize");
            let _ = write!(s, "  ],\n  \"labels\": {labels}\n}}\n");
        }
        None => s.push_str("  ]\n}\n"),
    }
    s
}

pub fn write_covariance(path: &Path, state: &CovarianceState, ordering: Ordering) -> AppResult<()> {
    write_text(path, &render_covariance(state, ordering))
}
