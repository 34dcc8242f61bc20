//! Winding numbers, homogeneity defects and the obstruction audit.
//!
//! For a candidate map `A` built from density inputs, `g(x)` is
//! 2-homogeneous, so along the phase loop `e^{2πit}x₀` its normalization
//! winds twice while along the constant loop it winds zero times. Both
//! loops are contractible on `S³`, so no continuous nonvanishing `ĝ` can
//! exist and every candidate must either let `g` vanish, be discontinuous,
//! or miss the threshold somewhere.

use crate::circuit::{g_functional, padded_pair, CandidateMap, GValue};
use crate::error::{Error, Result};
use crate::linalg::{outer, outer_matrix, trace_norm, CMatrix, CVector, DensityOperator, PureDensity, StateVector, C64};
use crate::rng::{haar_state, random_phase, SeedStream};
use crate::superposer::{threshold, SuperpositionSpec};
use crate::tol::TOL;
use crate::vecfun::{canonical_vec, vec_i, VecIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Smallest admissible loop.
pub const MIN_LOOP_POINTS: usize = 8;
/// Refinement stops here.
pub const MAX_LOOP_POINTS: usize = 1 << 20;

/// Something a loop can be made of.
pub trait LoopPoint: Clone {
    fn gap(&self, other: &Self) -> f64;
}

impl LoopPoint for C64 {
    fn gap(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

impl LoopPoint for StateVector {
    fn gap(&self, other: &Self) -> f64 {
        (self.amplitudes() - other.amplitudes()).norm()
    }
}

/// Samples `p(j/n)`, `j = 0..n`, of a closed loop; the step from the last
/// point back to the first is part of the loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopSample<T> {
    points: Vec<T>,
}

impl<T: LoopPoint> LoopSample<T> {
    pub fn periodic(points: Vec<T>) -> Result<Self> {
        if points.len() < MIN_LOOP_POINTS {
            return Err(Error::InvalidLoop(format!("{} points, need at least {MIN_LOOP_POINTS}", points.len())));
        }
        Ok(Self { points })
    }

    /// `n + 1` samples including `t = 1`, which must repeat `t = 0`.
    pub fn from_endpoints(mut points: Vec<T>) -> Result<Self> {
        let (first, last) = match (points.first(), points.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::InvalidLoop("empty loop".into())),
        };
        let gap = first.gap(last);
        if gap > TOL.loop_closure {
            return Err(Error::InvalidLoop(format!("loop not closed, endpoint gap {gap:e}")));
        }
        points.pop();
        Self::periodic(points)
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Cyclic shift by `k` samples.
    pub fn rotated(&self, k: usize) -> Self {
        let mut points = self.points.clone();
        let n = points.len().max(1);
        points.rotate_left(k % n);
        Self { points }
    }
}

impl LoopSample<C64> {
    /// Principal-branch phase increments, wrap-around last.
    pub fn phase_steps(&self) -> Result<Vec<f64>> {
        if let Some(index) = self.points.iter().position(|z| !(z.norm() >= TOL.nonzero_diag)) {
            return Err(Error::ZeroModulus { index });
        }
        let n = self.points.len();
        Ok((0..n).map(|j| (self.points[(j + 1) % n] / self.points[j]).arg()).collect())
    }

    /// Pointwise product.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { left: self.len(), right: other.len() });
        }
        Ok(Self { points: self.points.iter().zip(&other.points).map(|(a, b)| a * b).collect() })
    }
}

/// Number of turns around the origin.
pub fn winding_number(l: &LoopSample<C64>) -> Result<i64> {
    let steps = l.phase_steps()?;
    if let Some((index, &step)) = steps.iter().enumerate().find(|(_, s)| s.abs() >= PI) {
        return Err(Error::RefinementNeeded { index, step });
    }
    let turns = steps.iter().sum::<f64>() / TAU;
    let w = turns.round();
    if (turns - w).abs() >= 0.1 {
        return Err(Error::RefinementNeeded { index: 0, step: turns });
    }
    Ok(w as i64)
}

/// `e^{2πik j/n} x₀`, `j = 0..n`.
pub fn phase_loop(x0: &StateVector, k: i64, n: usize) -> Result<LoopSample<StateVector>> {
    if !x0.is_normalized() {
        return Err(Error::Normalization { norm: x0.norm() });
    }
    LoopSample::periodic((0..n).map(|j| x0.rephase(TAU * k as f64 * j as f64 / n as f64)).collect())
}

/// `cos(πt) x₀ + sin(πt) (−b*, a*)` for `x₀ = (a, b)`: a half great circle
/// ending at `−x₀`, hence a closed loop of densities through every
/// real-relative-phase superposition of `x₀` and its orthogonal partner.
pub fn sweep_loop(x0: &StateVector, n: usize) -> Result<Vec<StateVector>> {
    if x0.dim() != 2 {
        return Err(Error::DimensionMismatch { left: x0.dim(), right: 2 });
    }
    let (a, b) = (x0.amplitudes()[0], x0.amplitudes()[1]);
    let partner = CVector::from_vec(vec![-b.conj(), a.conj()]);
    (0..n)
        .map(|j| {
            let t = PI * j as f64 / n as f64;
            StateVector::normalize_vector(x0.amplitudes().scale(t.cos()) + partner.scale(t.sin()))
        })
        .collect()
}

/// `max |g(e^{iθ}x) − e^{imθ} g(x)|` over random `(x, θ)` in `C^dim`.
pub fn homogeneity_defect(g: &dyn Fn(&StateVector) -> C64, dim: usize, m: i32, samples: usize, seed: SeedStream) -> f64 {
    (0..samples as u64)
        .map(|k| {
            let mut rng = seed.child(k).rng();
            let x = haar_state(dim, &mut rng);
            let theta = random_phase(&mut rng);
            (g(&x.rephase(theta)) - C64::from_polar(1.0, m as f64 * theta) * g(&x)).norm()
        })
        .fold(0.0, f64::max)
}

/// Built-in candidate maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateKind {
    /// `αe^{iφ₀} canonical_vec(ρ) + β canonical_vec(σ)`, discontinuous.
    Ideal,
    /// `canonical_vec` blended with `vec_1` across `⟨0|ρ|0⟩ ∈ [0, h]`; continuous.
    Mollified,
    /// Always `|+⟩⟨+|`.
    Constant,
}

impl std::str::FromStr for CandidateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(Self::Ideal),
            "mollified" => Ok(Self::Mollified),
            "constant" => Ok(Self::Constant),
            other => Err(Error::Malformed(format!("unknown candidate {other:?}"))),
        }
    }
}

impl CandidateKind {
    pub const ALL: [CandidateKind; 3] = [CandidateKind::Ideal, CandidateKind::Mollified, CandidateKind::Constant];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ideal => "ideal",
            Self::Mollified => "mollified",
            Self::Constant => "constant",
        }
    }
}

pub const MOLLIFIER_BANDWIDTH: f64 = 0.05;
/// Identity admixture keeping the mollified output strictly positive.
pub const MOLLIFIER_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub kind: CandidateKind,
    pub spec: SuperpositionSpec,
    /// Fixed phase `φ₀` of the ideal candidate.
    pub phi: f64,
}

impl Candidate {
    pub fn new(kind: CandidateKind, spec: SuperpositionSpec) -> Self {
        Self { kind, spec, phi: 0.0 }
    }
}

fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

/// `w vec_0(ρ) + (1 − w) vec_1(ρ)` with `w = smoothstep(⟨0|ρ|0⟩ / h)`; unnormalized.
pub fn mollified_vec(rho: &PureDensity, h: f64) -> Result<CVector> {
    let d = rho.dim();
    if d < 2 {
        return Ok(canonical_vec(rho)?.amplitudes().clone());
    }
    let w = smoothstep(rho.diag(0) / h);
    let v1 = vec_i(rho, VecIndex::new(1, d)?)?;
    if w == 0.0 {
        return Ok(v1.amplitudes().scale(1.0));
    }
    let v0 = vec_i(rho, VecIndex::new(0, d)?)?;
    Ok(v0.amplitudes().scale(w) + v1.amplitudes().scale(1.0 - w))
}

impl CandidateMap for Candidate {
    fn apply(&self, u: &PureDensity, v: &PureDensity) -> Result<DensityOperator> {
        let d = u.dim();
        if v.dim() != d {
            return Err(Error::DimensionMismatch { left: d, right: v.dim() });
        }
        let a = self.spec.alpha() * C64::from_polar(1.0, self.phi);
        let b = self.spec.beta();
        match self.kind {
            CandidateKind::Ideal => {
                let s = canonical_vec(u)?.amplitudes() * a + canonical_vec(v)?.amplitudes() * b;
                Ok(outer(&StateVector::normalize_vector(s)?)?.into_density())
            }
            CandidateKind::Mollified => {
                let s = mollified_vec(u, MOLLIFIER_BANDWIDTH)? * a + mollified_vec(v, MOLLIFIER_BANDWIDTH)? * b;
                let m = outer_matrix(&s) + CMatrix::identity(d, d).scale(MOLLIFIER_FLOOR / d as f64);
                DensityOperator::new(m)
            }
            CandidateKind::Constant => {
                let plus = StateVector::normalize(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)])?.pad(d)?;
                Ok(outer(&plus)?.into_density())
            }
        }
    }
}

/// `min_φ ‖A/tr A − s_φ‖_tr` for orthonormal `u ⊥ v`, and the minimizing `φ`.
///
/// The fidelity-optimal phase `arg(α*β⟨u|ρ|v⟩)` is exact for pure `ρ`;
/// mixed outputs are refined by a grid plus golden-section search.
pub fn best_phase_error(a: &DensityOperator, u: &StateVector, v: &StateVector, spec: &SuperpositionSpec) -> Result<(f64, f64)> {
    let tr = a.trace();
    if !(tr > 0.0) {
        return Err(Error::InvalidMap(format!("output trace {tr:e} is not positive")));
    }
    let rho = a.matrix().unscale(tr);
    let err = |phi: f64| -> f64 {
        let s = u.amplitudes() * (spec.alpha() * C64::from_polar(1.0, phi)) + v.amplitudes() * spec.beta();
        let s = s.unscale(s.norm());
        trace_norm(&(&rho - outer_matrix(&s)))
    };
    let cross = (u.amplitudes().adjoint() * &rho * v.amplitudes())[(0, 0)];
    let phi0 = (spec.alpha().conj() * spec.beta() * cross).arg();
    let mut best = (err(phi0), phi0);
    let purity = (&rho * &rho).trace().re;
    if purity < 1.0 - TOL.property || cross.norm() < TOL.nonzero_diag {
        let grid = 32;
        for k in 0..grid {
            let phi = TAU * k as f64 / grid as f64;
            let e = err(phi);
            if e < best.0 {
                best = (e, phi);
            }
        }
        let (mut lo, mut hi) = (best.1 - TAU / grid as f64, best.1 + TAU / grid as f64);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..40 {
            let m1 = hi - g * (hi - lo);
            let m2 = lo + g * (hi - lo);
            if err(m1) < err(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let mid = 0.5 * (lo + hi);
        let e = err(mid);
        if e < best.0 {
            best = (e, mid);
        }
    }
    Ok((best.0, best.1.rem_euclid(TAU)))
}

/// Error of `A` at the orthogonal pair built from qubit `x`, padded into `C^dim`.
pub fn point_error(a: &dyn CandidateMap, spec: &SuperpositionSpec, x: &StateVector, dim: usize) -> Result<f64> {
    let (u, up) = padded_pair(x, dim)?;
    let out = a.apply(&outer(&u)?, &outer(&up)?)?;
    Ok(best_phase_error(&out, &u, &up, spec)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Obstructed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Winding of `ĝ` on the constant loop; absent when `g` vanishes.
    pub winding_constant: Option<i64>,
    pub winding_phase_loop: Option<i64>,
    pub g_vanishes: bool,
    /// Phase-loop samples after refinement.
    pub phase_loop_points: usize,
    pub max_error: f64,
    /// Loop (`"phase"` or `"sweep"`) and parameter `t` of the worst point.
    pub max_error_at: (String, f64),
    pub threshold: f64,
    pub verdict: Verdict,
}

/// `g` along the phase loop of `x₀`, doubling `n` until every step of `ĝ`
/// is below `π/2`. `None` when `g` vanishes somewhere.
pub fn refined_phase_loop_g(a: &dyn CandidateMap, x0: &StateVector, n: usize, dim: usize) -> Result<(usize, Option<LoopSample<C64>>)> {
    let mut n = n.max(MIN_LOOP_POINTS);
    loop {
        let pts = phase_loop(x0, 1, n)?;
        let gs = evaluate_g(a, pts.points(), dim)?;
        if gs.iter().any(|g| g.vanishes) {
            return Ok((n, None));
        }
        let l = LoopSample::periodic(gs.iter().map(|g| g.normalized().unwrap()).collect())?;
        let max_step = l.phase_steps()?.iter().map(|s| s.abs()).fold(0.0, f64::max);
        if max_step < PI / 2.0 {
            return Ok((n, Some(l)));
        }
        if n >= MAX_LOOP_POINTS {
            return Err(Error::RefinementNeeded { index: 0, step: max_step });
        }
        n *= 2;
    }
}

fn evaluate_g(a: &dyn CandidateMap, xs: &[StateVector], dim: usize) -> Result<Vec<GValue>> {
    xs.par_iter().map(|x| g_functional(a, x, dim)).collect()
}

/// Error profile `(t, error)` along a list of loop points.
pub fn error_profile(a: &dyn CandidateMap, spec: &SuperpositionSpec, xs: &[StateVector], dim: usize) -> Result<Vec<(f64, f64)>> {
    let n = xs.len() as f64;
    xs.par_iter()
        .enumerate()
        .map(|(j, x)| point_error(a, spec, x, dim).map(|e| (j as f64 / n, e)))
        .collect()
}

/// Runs both loops, both windings and the error scan.
pub fn obstruction_audit(a: &dyn CandidateMap, spec: &SuperpositionSpec, x0: &StateVector, n: usize, dim: usize) -> Result<AuditReport> {
    if x0.dim() != 2 {
        return Err(Error::DimensionMismatch { left: x0.dim(), right: 2 });
    }
    if n < MIN_LOOP_POINTS {
        return Err(Error::InvalidLoop(format!("{n} points, need at least {MIN_LOOP_POINTS}")));
    }
    let (points, phase) = refined_phase_loop_g(a, x0, n, dim)?;
    let g0 = g_functional(a, x0, dim)?;
    let (winding_phase_loop, winding_constant) = match (&phase, g0.normalized()) {
        (Some(l), Some(z)) => (Some(winding_number(l)?), Some(winding_number(&LoopSample::periodic(vec![z; n])?)?)),
        _ => (None, None),
    };
    let g_vanishes = winding_phase_loop.is_none();

    let phase_pts = phase_loop(x0, 1, n)?;
    let sweep_pts = sweep_loop(x0, n)?;
    let mut max_error = 0.0;
    let mut max_error_at = ("phase".to_string(), 0.0);
    for (name, pts) in [("phase", phase_pts.points()), ("sweep", &sweep_pts[..])] {
        for (t, e) in error_profile(a, spec, pts, dim)? {
            if e > max_error {
                max_error = e;
                max_error_at = (name.to_string(), t);
            }
        }
    }
    let thr = threshold(spec);
    let mismatch = winding_phase_loop != winding_constant;
    let verdict = if g_vanishes || mismatch || max_error >= thr { Verdict::Obstructed } else { Verdict::Consistent };
    Ok(AuditReport {
        winding_constant,
        winding_phase_loop,
        g_vanishes,
        phase_loop_points: points,
        max_error,
        max_error_at,
        threshold: thr,
        verdict,
    })
}
