//! Maps from pure densities back to representative vectors.
//!
//! No continuous global choice exists, so the family here is piecewise:
//! `vec_i` reads off column `i` of `ρ` (skipping zero columns cyclically) and
//! the selection rule `r(x)` only ever picks a column whose diagonal weight is
//! at least `1/d`, where `vec_r` is continuous.

use crate::error::{Error, Result};
use crate::linalg::{euclidean_distance, outer, trace_distance, CVector, PureDensity, StateVector, C64};
use crate::tol::TOL;
use serde::{Deserialize, Serialize};

/// Column index `i ∈ [0, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VecIndex(usize);

impl VecIndex {
    pub fn new(i: usize, dim: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::OutOfRange { name: "vec index", value: i as f64, expected: "0 <= i < dim" });
        }
        Ok(Self(i))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for VecIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// `ρ|i⟩ / √⟨i|ρ|i⟩`, with the `i`-th entry forced real.
fn column_vector(rho: &PureDensity, i: usize) -> StateVector {
    let w = rho.diag(i);
    let s = w.sqrt();
    let mut col: CVector = rho.matrix().column(i).map(|z| z / s);
    col[i] = C64::new(s, 0.0);
    // Unit norm up to rounding; renormalize so the result passes `outer`.
    StateVector::normalize_vector(col).expect("column with positive weight")
}

/// `vec_i(ρ)`: the first column at or after `i` (cyclically) with nonzero
/// diagonal weight, renormalized. At most `d` steps.
pub fn vec_i(rho: &PureDensity, i: VecIndex) -> Result<StateVector> {
    let d = rho.dim();
    if i.0 >= d {
        return Err(Error::DimensionMismatch { left: i.0, right: d });
    }
    (0..d)
        .map(|step| (i.0 + step) % d)
        .find(|&j| rho.diag(j) > TOL.nonzero_diag)
        .map(|j| column_vector(rho, j))
        .ok_or(Error::CorruptedInput { threshold: TOL.nonzero_diag })
}

/// The first nonzero column of `ρ`, renormalized; its first nonzero entry
/// is real positive.
pub fn canonical_vec(rho: &PureDensity) -> Result<StateVector> {
    vec_i(rho, VecIndex(0))
}

/// `r(x) = min{i : ⟨i|x|i⟩ ≥ 1/d}`.
///
/// The comparison is exact. Diagonals of a trace-one state always contain
/// one entry `≥ 1/d` in exact arithmetic; if rounding pushes all of them
/// just below, the largest diagonal (first on ties) is returned.
pub fn select_r(x: &PureDensity) -> VecIndex {
    let d = x.dim();
    let threshold = 1.0 / d as f64;
    let diags: Vec<f64> = (0..d).map(|i| x.diag(i)).collect();
    let i = diags.iter().position(|&w| w >= threshold).unwrap_or_else(|| {
        diags
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &w)| if w > best.1 { (i, w) } else { best })
            .0
    });
    VecIndex(i)
}

/// Paired rule: reuse `x`'s index when `y` is within `1/(2d)` of `x`.
pub fn select_r_paired(x: &PureDensity, y: &PureDensity) -> Result<VecIndex> {
    let dist = trace_distance(x.as_density(), y.as_density())?;
    let d = x.dim() as f64;
    Ok(if dist < 1.0 / (2.0 * d) { select_r(x) } else { select_r(y) })
}

/// `|1_ε⟩ = −√ε|0⟩ + √(1−ε)|1⟩`.
pub fn one_eps(eps: f64) -> Result<StateVector> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::OutOfRange { name: "eps", value: eps, expected: "0 < eps <= 1" });
    }
    Ok(StateVector::unnormalized(vec![C64::new(-eps.sqrt(), 0.0), C64::new((1.0 - eps).sqrt(), 0.0)]))
        .and_then(|v| StateVector::normalize_vector(v.amplitudes().clone()))
}

/// Euclidean jump of `canonical_vec` between `|1_ε⟩⟨1_ε|` and `|1⟩⟨1|`.
pub fn discontinuity_probe(eps: f64) -> Result<f64> {
    let near = outer(&one_eps(eps)?)?;
    let at = outer(&StateVector::basis(2, 1))?;
    euclidean_distance(&canonical_vec(&near)?, &canonical_vec(&at)?)
}
