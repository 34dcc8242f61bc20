//! JSON encodings for states and matrices.
//!
//! A state file looks like
//!
//! ```json
//! {"dim": 2, "kind": "vector", "data": [[0.7071067811865476, 0.0], [0.0, 0.7071067811865476]]}
//! ```
//!
//! Vectors carry `dim` pairs, densities carry `dim * dim` pairs in row-major
//! order. Each pair is `[re, im]` as a 64-bit float.

use crate::error::{Error, Result};
use crate::linalg::{outer, CMatrix, DensityOperator, PureDensity, StateVector, C64};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Vector,
    Density,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dim: usize,
    pub kind: StateKind,
    pub data: Vec<[f64; 2]>,
}

/// A decoded state file.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedState {
    Vector(StateVector),
    Density(DensityOperator),
}

impl LoadedState {
    pub fn dim(&self) -> usize {
        match self {
            LoadedState::Vector(v) => v.dim(),
            LoadedState::Density(d) => d.dim(),
        }
    }

    /// The pure density this file describes.
    pub fn to_pure(&self) -> Result<PureDensity> {
        match self {
            LoadedState::Vector(v) => outer(v),
            LoadedState::Density(d) => PureDensity::new(d.matrix().clone()),
        }
    }

    /// Unit vector for vector files; errors for density files.
    pub fn as_vector(&self) -> Result<&StateVector> {
        match self {
            LoadedState::Vector(v) => Ok(v),
            LoadedState::Density(_) => Err(Error::Malformed("expected a vector state".into())),
        }
    }
}

impl StateFile {
    pub fn from_vector(v: &StateVector) -> Self {
        Self { dim: v.dim(), kind: StateKind::Vector, data: encode_entries(v.amplitudes().iter()) }
    }

    pub fn from_density(rho: &DensityOperator) -> Self {
        Self { dim: rho.dim(), kind: StateKind::Density, data: encode_matrix(rho.matrix()) }
    }

    pub fn decode(&self) -> Result<LoadedState> {
        if self.dim == 0 {
            return Err(Error::Malformed("dim must be positive".into()));
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Malformed("non-finite entry".into()));
        }
        match self.kind {
            StateKind::Vector => {
                if self.data.len() != self.dim {
                    return Err(Error::Malformed(format!(
                        "vector of dim {} needs {} entries, got {}",
                        self.dim,
                        self.dim,
                        self.data.len()
                    )));
                }
                let amps = self.data.iter().map(|&[re, im]| C64::new(re, im)).collect();
                Ok(LoadedState::Vector(StateVector::new(amps)?))
            }
            StateKind::Density => {
                let m = decode_matrix(self.dim, &self.data)?;
                Ok(LoadedState::Density(DensityOperator::new(m)?))
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state file serializes")
    }
}

pub fn encode_entries<'a>(it: impl Iterator<Item = &'a C64>) -> Vec<[f64; 2]> {
    it.map(|z| [z.re, z.im]).collect()
}

/// Row-major `[re, im]` pairs.
pub fn encode_matrix(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            out.push([z.re, z.im]);
        }
    }
    out
}

pub fn decode_matrix(dim: usize, data: &[[f64; 2]]) -> Result<CMatrix> {
    if data.len() != dim * dim {
        return Err(Error::Malformed(format!(
            "matrix of dim {dim} needs {} entries, got {}",
            dim * dim,
            data.len()
        )));
    }
    Ok(CMatrix::from_fn(dim, dim, |r, c| {
        let [re, im] = data[r * dim + c];
        C64::new(re, im)
    }))
}

pub fn load_state(path: impl AsRef<Path>) -> Result<LoadedState> {
    let text = std::fs::read_to_string(path)?;
    StateFile::from_json(&text)?.decode()
}

pub fn save_state(path: impl AsRef<Path>, file: &StateFile) -> Result<()> {
    std::fs::write(path, file.to_json())?;
    Ok(())
}

/// `#[serde(with = ...)]` adapter writing a [`StateVector`] as a vector state file.
pub mod vector_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &StateVector, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateFile::from_vector(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<StateVector, D::Error> {
        let file = StateFile::deserialize(d)?;
        match file.decode().map_err(serde::de::Error::custom)? {
            LoadedState::Vector(v) => Ok(v),
            LoadedState::Density(_) => Err(serde::de::Error::custom("expected a vector state")),
        }
    }
}

/// Adapter writing a [`PureDensity`] as a density state file.
pub mod pure_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rho: &PureDensity, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateFile::from_density(rho.as_density()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<PureDensity, D::Error> {
        StateFile::deserialize(d)?.decode().and_then(|st| st.to_pure()).map_err(serde::de::Error::custom)
    }
}

/// Adapter writing a [`DensityOperator`] as a density state file.
pub mod density_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rho: &DensityOperator, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateFile::from_density(rho).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DensityOperator, D::Error> {
        match StateFile::deserialize(d)?.decode().map_err(serde::de::Error::custom)? {
            LoadedState::Density(rho) => Ok(rho),
            LoadedState::Vector(_) => Err(serde::de::Error::custom("expected a density state")),
        }
    }
}
