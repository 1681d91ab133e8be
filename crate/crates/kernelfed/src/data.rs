//! Datasets as owned input/label pairs.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One party's private data: inputs as rows of an n×d matrix and a label
/// per row.
#[derive(Debug, Clone, PartialEq)]
pub struct PartyDataset {
    pub inputs: DMatrix<f64>,
    pub labels: DVector<f64>,
}

impl PartyDataset {
    pub fn new(inputs: DMatrix<f64>, labels: DVector<f64>) -> Result<Self> {
        if inputs.nrows() != labels.len() {
            return Err(Error::Config(format!(
                "dataset has {} input rows but {} labels",
                inputs.nrows(),
                labels.len()
            )));
        }
        Ok(Self { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.inputs.ncols()
    }

    /// Serialize as CSV with header `x_1,..,x_d,y`.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = String::new();
        for j in 1..=d {
            out.push_str(&format!("x_{j},"));
        }
        out.push_str("y\n");
        for i in 0..self.len() {
            for j in 0..d {
                out.push_str(&format!("{},", self.inputs[(i, j)]));
            }
            out.push_str(&format!("{}\n", self.labels[i]));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_length_mismatch() {
        let r = PartyDataset::new(DMatrix::zeros(3, 1), DVector::zeros(2));
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn csv_round_shape() {
        let ds = PartyDataset::new(
            DMatrix::from_row_slice(2, 2, &[0.25, 0.5, 0.75, 1.0]),
            DVector::from_vec(vec![1.0, -2.0]),
        )
        .unwrap();
        let csv = ds.to_csv();
        assert!(csv.starts_with("x_1,x_2,y\n"));
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.contains("0.75,1,-2"));
    }
}
