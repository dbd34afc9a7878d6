//! JSON state files: `{"matrix": [[[re, im], ...], ...]}`, a 4x4 row-major
//! array of complex entries in the computational basis.

use serde::{Deserialize, Serialize};

use super::DensityMatrix;
use crate::error::{Error, Result};
use crate::matcore::{Mat4, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let m = rho.mat();
        Self {
            matrix: (0..4)
                .map(|i| (0..4).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        }
    }

    pub fn to_mat(&self) -> Result<Mat4> {
        let cols: Vec<usize> = self.matrix.iter().map(Vec::len).collect();
        if self.matrix.len() != 4 || cols.iter().any(|&c| c != 4) {
            return Err(Error::Dimension {
                expected: 4,
                rows: self.matrix.len(),
                cols,
            });
        }
        Ok(Mat4::from_fn(|i, j| {
            let [re, im] = self.matrix[i][j];
            C64::new(re, im)
        }))
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_mat()?)
    }
}

/// Parses and validates a state file.
pub fn from_json(text: &str) -> Result<DensityMatrix> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_density()
}

pub fn to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string_pretty(&StateFile::from_density(rho)).expect("plain data serializes")
}
