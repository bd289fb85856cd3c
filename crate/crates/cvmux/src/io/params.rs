use std::fmt::Write as _;
use std::path::Path;

use cvmux_core::decoupler::NetworkParams;
use serde::Deserialize;

use super::{fmt_f64, parse_json, read_bytes, write_text};
use crate::error::{AppError, AppResult};

/// Coupler order tag: lexicographic pairs per party, first applied first.
pub const PARAMS_ORDERING: &str = "eq6_eq7_product";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsDoc {
    alice_t: Vec<f64>,
    bob_t: Vec<f64>,
    ordering: String,
}

pub fn parse_params(path: &Path, bytes: &[u8]) -> AppResult<NetworkParams> {
    let doc: ParamsDoc = parse_json(path, bytes)?;
    if doc.ordering != PARAMS_ORDERING {
        return Err(AppError::Validation(format!(
            "{}: ordering {:?}, expected {PARAMS_ORDERING:?}",
            path.display(),
            doc.ordering
        )));
    }
    NetworkParams::new(doc.alice_t, doc.bob_t)
        .map_err(|e| AppError::Validation(format!("{}: {e}", path.display())))
}

pub fn read_params(path: &Path) -> AppResult<NetworkParams> {
    parse_params(path, &read_bytes(path)?)
}

pub fn render_params(params: &NetworkParams) -> String {
    let list = |v: &[f64]| v.iter().map(|&t| fmt_f64(t)).collect::<Vec<_>>().join(", ");
    let mut s = String::new();
    let _ = write!(
        s,
        "{{\n  \"alice_t\": [{}],\n  \"bob_t\": [{}],\n  \"ordering\": \"{PARAMS_ORDERING}\"\n}}\n",
        list(params.alice()),
        list(params.bob())
    );
    s
}

pub fn write_params(path: &Path, params: &NetworkParams) -> AppResult<()> {
    write_text(path, &render_params(params))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let p = NetworkParams::new(vec![0.1, 1.0 / 3.0, 1.0], vec![0.0, 0.5, 0.999_999_999_999])
            .unwrap();
        let back = parse_params(Path::new("mem"), render_params(&p).as_bytes()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn rejects_other_orderings_and_bounds() {
        let p = Path::new("mem");
        let wrong = r#"{"alice_t": [0.5], "bob_t": [0.5], "ordering": "reversed"}"#;
        assert!(parse_params(p, wrong.as_bytes()).is_err());
        let out = r#"{"alice_t": [1.5], "bob_t": [0.5], "ordering": "eq6_eq7_product"}"#;
        assert!(parse_params(p, out.as_bytes()).is_err());
    }
}
