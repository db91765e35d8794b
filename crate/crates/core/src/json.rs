//! JSON encoding of complex scalars and matrices.
//!
//! A complex number is written `[re, im]`; a plain number is read as real.
//! A matrix is a list of rows, each a list of complex numbers. A bare scalar
//! where a matrix is expected stands for that multiple of the identity.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{Mat, C64};

/// Complex number, `[re, im]` or a real number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexJson(pub C64);

impl From<C64> for ComplexJson {
    fn from(z: C64) -> Self {
        ComplexJson(z)
    }
}

fn parse_complex(v: &Value) -> Option<C64> {
    match v {
        Value::Number(n) => n.as_f64().map(|x| C64::new(x, 0.0)),
        Value::Array(a) if a.len() == 2 => match (a[0].as_f64(), a[1].as_f64()) {
            (Some(x), Some(y)) => Some(C64::new(x, y)),
            _ => None,
        },
        _ => None,
    }
}

impl Serialize for ComplexJson {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexJson {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        parse_complex(&v)
            .map(ComplexJson)
            .ok_or_else(|| D::Error::custom("expected a number or a [re, im] pair"))
    }
}

/// Matrix as nested rows, or a scalar multiple of the identity.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixJson {
    Scalar(C64),
    Rows(Vec<Vec<C64>>),
}

impl From<&Mat> for MatrixJson {
    fn from(m: &Mat) -> Self {
        MatrixJson::Rows(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect(),
        )
    }
}

impl MatrixJson {
    /// Matrix of the given shape; scalars expand to multiples of the identity.
    pub fn to_matrix_sized(&self, rows: usize, cols: usize) -> Result<Mat> {
        match self {
            MatrixJson::Scalar(z) => {
                if rows != cols {
                    return Err(Error::DimensionMismatch(format!(
                        "scalar shorthand needs a square shape, got {rows}x{cols}"
                    )));
                }
                Ok(Mat::identity(rows, cols) * *z)
            }
            MatrixJson::Rows(_) => {
                let m = self.to_matrix()?;
                if m.shape() != (rows, cols) {
                    return Err(Error::DimensionMismatch(format!(
                        "expected a {rows}x{cols} matrix, got {}x{}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                Ok(m)
            }
        }
    }

    /// Explicit matrix; a scalar becomes `1 x 1`.
    pub fn to_matrix(&self) -> Result<Mat> {
        match self {
            MatrixJson::Scalar(z) => Ok(Mat::from_element(1, 1, *z)),
            MatrixJson::Rows(rows) => {
                let r = rows.len();
                let c = rows.first().map(|x| x.len()).unwrap_or(0);
                if rows.iter().any(|x| x.len() != c) {
                    return Err(Error::InvalidInput("ragged matrix rows".into()));
                }
                Ok(Mat::from_fn(r, c, |i, j| rows[i][j]))
            }
        }
    }

    /// Square dimension if it is determined by the data.
    pub fn explicit_dim(&self) -> Option<usize> {
        match self {
            MatrixJson::Scalar(_) => None,
            MatrixJson::Rows(rows) => Some(rows.len()),
        }
    }
}

impl Serialize for MatrixJson {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MatrixJson::Scalar(z) => ComplexJson(*z).serialize(s),
            MatrixJson::Rows(rows) => {
                let v: Vec<Vec<ComplexJson>> = rows
                    .iter()
                    .map(|r| r.iter().map(|z| ComplexJson(*z)).collect())
                    .collect();
                v.serialize(s)
            }
        }
    }
}

impl<'de> Deserialize<'de> for MatrixJson {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        if let Some(z) = parse_complex(&v) {
            return Ok(MatrixJson::Scalar(z));
        }
        let rows = v
            .as_array()
            .ok_or_else(|| D::Error::custom("expected a matrix (list of rows) or a scalar"))?;
        let mut out = Vec::with_capacity(rows.len());
        for row in rows {
            let row = row
                .as_array()
                .ok_or_else(|| D::Error::custom("matrix rows must be lists"))?;
            let parsed: Option<Vec<C64>> = row.iter().map(parse_complex).collect();
            out.push(parsed.ok_or_else(|| {
                D::Error::custom("matrix entries must be numbers or [re, im] pairs")
            })?);
        }
        Ok(MatrixJson::Rows(out))
    }
}
