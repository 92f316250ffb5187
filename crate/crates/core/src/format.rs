//! The `densecomplex-v1` matrix file format.
//!
//! ```json
//! {"format":"densecomplex-v1","n":2,"entries":[[0.0,0.0],[1.0,0.0],[1.0,0.0],[0.0,0.0]]}
//! ```
//!
//! `entries` holds `n*n` row-major `[re, im]` pairs. Floats are written in
//! shortest round-trip form, so writing and re-reading is exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{HermitianMatrix, Matrix, C64};

pub const FORMAT_TAG: &str = "densecomplex-v1";

#[derive(Serialize, Deserialize)]
struct DenseComplexFile {
    format: String,
    n: usize,
    entries: Vec<[f64; 2]>,
}

pub fn matrix_to_json(m: &Matrix) -> String {
    let file = DenseComplexFile {
        format: FORMAT_TAG.to_string(),
        n: m.dim(),
        entries: m.as_slice().iter().map(|z| [z.re, z.im]).collect(),
    };
    serde_json::to_string(&file).expect("plain data serialises")
}

pub fn hermitian_to_json(h: &HermitianMatrix) -> String {
    matrix_to_json(h.matrix())
}

pub fn matrix_from_json(s: &str) -> Result<Matrix> {
    let file: DenseComplexFile = serde_json::from_str(s)?;
    if file.format != FORMAT_TAG {
        return Err(Error::Format(format!("unexpected format tag `{}`", file.format)));
    }
    let entries = file.entries.into_iter().map(|[re, im]| C64::new(re, im)).collect();
    Matrix::from_row_major(file.n, entries)
}

/// Reads a matrix and runs it through the Hermitian constructor.
pub fn hermitian_from_json(s: &str) -> Result<HermitianMatrix> {
    HermitianMatrix::new(matrix_from_json(s)?)
}
