//! State files: JSON objects with `dims` and either `amplitudes` or
//! `matrix`, every complex entry written as `[re, im]`. A matrix may be a
//! flat row-major list or a list of rows.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DiscordError, Result};
use crate::linalg::{hermiticity_defect, CMatrix, CVector, C64};
use crate::states::{DensityMatrix, PureState, State};

/// Largest deviation from unit norm or trace accepted before rescaling.
pub const FILE_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixEntries {
    Rows(Vec<Vec<[f64; 2]>>),
    Flat(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixEntries>,
}

fn complex(p: &[f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

impl StateFile {
    pub fn from_state(state: &State) -> Self {
        match state {
            State::Pure(p) => Self {
                dims: p.dims().to_vec(),
                amplitudes: Some(p.amplitudes().iter().map(|z| [z.re, z.im]).collect()),
                matrix: None,
            },
            State::Mixed(m) => {
                let mat = m.matrix();
                Self {
                    dims: m.dims().to_vec(),
                    amplitudes: None,
                    matrix: Some(MatrixEntries::Rows(
                        (0..mat.nrows())
                            .map(|i| (0..mat.ncols()).map(|j| [mat[(i, j)].re, mat[(i, j)].im]).collect())
                            .collect(),
                    )),
                }
            }
        }
    }

    pub fn into_state(self) -> Result<State> {
        let d: usize = self.dims.iter().product();
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(DiscordError::Parse(format!("invalid dims {:?}", self.dims)));
        }
        match (self.amplitudes, self.matrix) {
            (Some(_), Some(_)) => Err(DiscordError::Parse(
                "give either `amplitudes` or `matrix`, not both".into(),
            )),
            (None, None) => Err(DiscordError::Parse(
                "state file needs `amplitudes` or `matrix`".into(),
            )),
            (Some(amps), None) => {
                if amps.len() != d {
                    return Err(DiscordError::Parse(format!(
                        "expected {d} amplitudes for dims {:?}, got {}",
                        self.dims,
                        amps.len()
                    )));
                }
                let v = CVector::from_iterator(d, amps.iter().map(complex));
                let norm = v.norm_squared();
                if !norm.is_finite() || (norm - 1.0).abs() > FILE_NORM_TOL {
                    return Err(DiscordError::Parse(format!(
                        "amplitudes have squared norm {norm}, expected 1 within {FILE_NORM_TOL:e}"
                    )));
                }
                Ok(State::Pure(PureState::normalized(v, self.dims)?))
            }
            (None, Some(entries)) => {
                let flat: Vec<[f64; 2]> = match entries {
                    MatrixEntries::Flat(f) => f,
                    MatrixEntries::Rows(rows) => {
                        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                            return Err(DiscordError::Parse(format!(
                                "matrix must be {d}×{d} for dims {:?}",
                                self.dims
                            )));
                        }
                        rows.into_iter().flatten().collect()
                    }
                };
                if flat.len() != d * d {
                    return Err(DiscordError::Parse(format!(
                        "expected {} matrix entries for dims {:?}, got {}",
                        d * d,
                        self.dims,
                        flat.len()
                    )));
                }
                let m = CMatrix::from_row_iterator(d, d, flat.iter().map(complex));
                let tr = m.trace();
                if !tr.re.is_finite() || (tr.re - 1.0).abs() > FILE_NORM_TOL || tr.im.abs() > FILE_NORM_TOL {
                    return Err(DiscordError::Parse(format!(
                        "matrix trace is {tr}, expected 1 within {FILE_NORM_TOL:e}"
                    )));
                }
                let defect = hermiticity_defect(&m);
                if defect > FILE_NORM_TOL {
                    return Err(DiscordError::Parse(format!(
                        "matrix is not Hermitian (defect {defect:e})"
                    )));
                }
                let rho = DensityMatrix::from_numeric(m, self.dims).map_err(|e| match e {
                    DiscordError::NotPsd(w) => DiscordError::Parse(format!(
                        "matrix is not positive semidefinite (eigenvalue {w:e})"
                    )),
                    other => other,
                })?;
                Ok(State::Mixed(rho))
            }
        }
    }
}

pub fn parse_state(text: &str) -> Result<State> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| DiscordError::Parse(e.to_string()))?;
    file.into_state()
}

pub fn read_state(path: &Path) -> Result<State> {
    let text = std::fs::read_to_string(path)?;
    parse_state(&text)
}

pub fn state_to_json(state: &State) -> String {
    serde_json::to_string_pretty(&StateFile::from_state(state)).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::linalg::frobenius;

    #[test]
    fn pure_round_trip() {
        let s = State::Pure(catalog::schmidt_example());
        let back = parse_state(&state_to_json(&s)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn mixed_round_trip() {
        let s = State::Mixed(catalog::werner_2qubit(0.3).unwrap());
        let State::Mixed(back) = parse_state(&state_to_json(&s)).unwrap() else {
            panic!("expected a mixed state")
        };
        let State::Mixed(orig) = s else { unreachable!() };
        assert!(frobenius(&(back.matrix() - orig.matrix())) < 1e-15);
    }

    #[test]
    fn flat_matrix_row_major() {
        let text = r#"{"dims":[2],"matrix":[[0.5,0],[0,0.5],[0,-0.5],[0.5,0]]}"#;
        let State::Mixed(m) = parse_state(text).unwrap() else { panic!() };
        assert_eq!(m.matrix()[(0, 1)], C64::new(0.0, 0.5));
        assert_eq!(m.matrix()[(1, 0)], C64::new(0.0, -0.5));
    }

    #[test]
    fn small_deviation_is_renormalized() {
        let text = r#"{"dims":[2],"amplitudes":[[1.0000001,0],[0,0]]}"#;
        let State::Pure(p) = parse_state(text).unwrap() else { panic!() };
        assert!((p.amplitudes().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_files() {
        for bad in [
            r#"{"dims":[2],"amplitudes":[[1,0],[1,0]]}"#,
            r#"{"dims":[2],"amplitudes":[[1,0]]}"#,
            r#"{"dims":[2],"matrix":[[[0.6,0],[0,0]],[[0,0],[0.6,0]]]}"#,
            r#"{"dims":[2],"matrix":[[[0.5,0],[0.2,0]],[[0,0],[0.5,0]]]}"#,
            r#"{"dims":[2],"matrix":[[[1.5,0],[0,0]],[[0,0],[-0.5,0]]]}"#,
            r#"{"dims":[2]}"#,
            r#"{"dims":[2],"amplitudes":[[1,0],[0,0]],"extra":1}"#,
            r#"not json"#,
        ] {
            assert!(matches!(parse_state(bad), Err(DiscordError::Parse(_))), "{bad}");
        }
    }
}
