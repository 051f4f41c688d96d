//! JSON state files:
//! `{"n_modes": k, "ordering": "xp-interleaved", "matrix": [[...], ...]}`.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{CovarianceMatrix, ORDERING};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub n_modes: usize,
    pub ordering: String,
    pub matrix: Vec<Vec<f64>>,
}

impl StateFile {
    /// Negative zeros are written as `0.0`.
    pub fn from_cm(g: &CovarianceMatrix) -> Self {
        let m = g.matrix();
        StateFile {
            n_modes: g.n_modes(),
            ordering: ORDERING.to_string(),
            matrix: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)] + 0.0).collect())
                .collect(),
        }
    }

    /// Checks ordering and shape, then symmetry (via [`CovarianceMatrix::new`]).
    /// Physicality is left to the caller.
    pub fn to_cm(&self) -> Result<CovarianceMatrix> {
        if self.ordering != ORDERING {
            return Err(Error::StateFormat(format!(
                "unsupported ordering {:?}, expected {ORDERING:?}",
                self.ordering
            )));
        }
        let dim = 2 * self.n_modes;
        if self.n_modes == 0 {
            return Err(Error::StateFormat("n_modes must be at least 1".into()));
        }
        if self.matrix.len() != dim || self.matrix.iter().any(|row| row.len() != dim) {
            return Err(Error::StateFormat(format!(
                "matrix must be {dim}x{dim} for {} modes",
                self.n_modes
            )));
        }
        if self.matrix.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::StateFormat("matrix entries must be finite".into()));
        }
        let m = DMatrix::from_fn(dim, dim, |i, j| self.matrix[i][j]);
        CovarianceMatrix::new(m)
    }
}

pub fn parse_state(json: &str) -> Result<CovarianceMatrix> {
    let f: StateFile = serde_json::from_str(json)?;
    f.to_cm()
}

pub fn read_state(path: impl AsRef<Path>) -> Result<CovarianceMatrix> {
    parse_state(&std::fs::read_to_string(path)?)
}

pub fn state_to_json(g: &CovarianceMatrix) -> String {
    serde_json::to_string_pretty(&StateFile::from_cm(g)).expect("state serializes")
}

pub fn write_state(path: impl AsRef<Path>, g: &CovarianceMatrix) -> Result<()> {
    std::fs::write(path, state_to_json(g) + "\n")?;
    Ok(())
}
