//! JSON encoding of complex matrices as nested `[re, im]` pairs.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

pub type PairRows = Vec<Vec<[f64; 2]>>;

pub fn to_pairs(m: &ComplexMatrix) -> PairRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn from_pairs(rows: &PairRows) -> Result<ComplexMatrix> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::Serialization("empty matrix".into()));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Serialization("ragged or empty matrix rows".into()));
    }
    Ok(ComplexMatrix::from_fn(nrows, ncols, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

/// `#[serde(with = "crate::serde_util::matrix")]` adapter.
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_pairs(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ComplexMatrix, D::Error> {
        let rows = PairRows::deserialize(d)?;
        from_pairs(&rows).map_err(serde::de::Error::custom)
    }
}

/// Same as [`matrix`] for a list of matrices.
pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[ComplexMatrix], s: S) -> std::result::Result<S::Ok, S::Error> {
        ms.iter().map(to_pairs).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<ComplexMatrix>, D::Error> {
        let list = Vec::<PairRows>::deserialize(d)?;
        list.iter()
            .map(|rows| from_pairs(rows).map_err(serde::de::Error::custom))
            .collect()
    }
}
