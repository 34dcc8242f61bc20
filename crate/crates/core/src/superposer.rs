//! Superposition targets and the tomography-based random superposition pipeline.
//!
//! The pipeline learns `vec_{r_x}(x) ≈ vec_{r_x}(u)` and
//! `vec_{r_y}(y) ≈ vec_{r_y}(v)` by vector tomography, then prepares
//! `|α|vec_{r_x}(x) + |β|vec_{r_y}(y)`. Relative to `αe^{iφ}u + βv` the
//! implied phase `φ_r` depends on the random index pair `r`.

use crate::error::{Error, Result};
use crate::linalg::{outer, trace_norm, CVector, DensityOperator, PureDensity, StateVector, C64};
use crate::rng::{haar_state, random_phase, SeedStream};
use crate::tol::TOL;
use crate::tomo::{budget_schedule, vector_tomography_oracle, Mode, StateOracle, TomographySchedule, VectorEstimate};
use crate::vecfun::{canonical_vec, vec_i, VecIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Coefficients `(α, β)`, both nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct SuperpositionSpec {
    alpha: C64,
    beta: C64,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    alpha: [f64; 2],
    beta: [f64; 2],
}

impl TryFrom<RawSpec> for SuperpositionSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        Self::new(C64::new(raw.alpha[0], raw.alpha[1]), C64::new(raw.beta[0], raw.beta[1]))
    }
}

impl From<SuperpositionSpec> for RawSpec {
    fn from(s: SuperpositionSpec) -> Self {
        Self { alpha: [s.alpha.re, s.alpha.im], beta: [s.beta.re, s.beta.im] }
    }
}

impl SuperpositionSpec {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        for (name, z) in [("alpha", alpha), ("beta", beta)] {
            if !(z.norm() > 0.0 && z.norm().is_finite()) {
                return Err(Error::OutOfRange { name, value: z.norm(), expected: "nonzero and finite" });
            }
        }
        Ok(Self { alpha, beta })
    }

    pub fn real(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(C64::new(alpha, 0.0), C64::new(beta, 0.0))
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    /// `|α| = |β|` up to a relative tolerance.
    pub fn magnitudes_equal(&self) -> bool {
        let (a, b) = (self.alpha.norm(), self.beta.norm());
        (a - b).abs() <= TOL.magnitude_equal * a.max(b)
    }
}

/// `αe^{iφ}u + βv`, normalized.
pub fn target_superposition(u: &StateVector, v: &StateVector, spec: &SuperpositionSpec, phi: f64) -> Result<PureDensity> {
    let s = target_vector(u, v, spec, phi)?;
    outer(&StateVector::normalize_vector(s)?)
}

fn target_vector(u: &StateVector, v: &StateVector, spec: &SuperpositionSpec, phi: f64) -> Result<CVector> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { left: u.dim(), right: v.dim() });
    }
    let a = spec.alpha * C64::from_polar(1.0, phi);
    let s: CVector = u.amplitudes().map(|z| z * a) + v.amplitudes().map(|z| z * spec.beta);
    if s.norm() <= TOL.construction * (spec.alpha.norm() + spec.beta.norm()) {
        return Err(Error::DegenerateSuperposition);
    }
    Ok(s)
}

/// `|α||β| / (|α|² + |β|²)`.
pub fn threshold(spec: &SuperpositionSpec) -> f64 {
    let (a, b) = (spec.alpha.norm(), spec.beta.norm());
    a * b / (a * a + b * b)
}

/// Guaranteed lower bound on `tr[s_r(x, y)]`.
pub fn trace_floor(spec: &SuperpositionSpec, d: usize) -> f64 {
    let (a, b) = (spec.alpha.norm(), spec.beta.norm());
    if spec.magnitudes_equal() {
        a * a / (16.0 * (d * d) as f64)
    } else {
        (a - b) * (a - b)
    }
}

/// Bound required of `ε_N + 2δ_N` for the first tomography.
pub fn n_threshold(spec: &SuperpositionSpec, d: usize, eps: f64) -> f64 {
    let (a, b) = (spec.alpha.norm(), spec.beta.norm());
    if spec.magnitudes_equal() {
        eps / (512.0 * (d * d) as f64)
    } else {
        eps / 8.0 * (a - b).powi(2) / (a + b).powi(2)
    }
}

/// Bound required of `2ε_M + 4δ_M` for the second tomography.
pub fn m_threshold(spec: &SuperpositionSpec, eps: f64) -> f64 {
    eps / (16.0 * spec.beta.norm())
}

/// Shot counts the budget search considers: quarter decades from `10²` to `10¹⁵`.
pub fn shot_table() -> Vec<u64> {
    (0..=52).map(|k| 10f64.powf(2.0 + k as f64 / 4.0).round() as u64).collect()
}

/// Copy budgets and the schedules behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub n: u64,
    pub m: u64,
    pub n_threshold: f64,
    pub m_threshold: f64,
    pub schedule_n: TomographySchedule,
    pub schedule_m: TomographySchedule,
}

fn smallest_schedule(d: usize, target: f64, cost: impl Fn(&TomographySchedule) -> f64) -> Result<TomographySchedule> {
    let table = shot_table();
    for &n in &table {
        let s = budget_schedule(d, n)?;
        if cost(&s) <= target {
            return Ok(s);
        }
    }
    Err(Error::BudgetExceeded { target, max_shots: *table.last().unwrap() })
}

/// Smallest tabulated `(N, M)` meeting both thresholds.
pub fn copies_budget(spec: &SuperpositionSpec, d: usize, eps: f64) -> Result<Budget> {
    if !(eps > 0.0 && eps < 2.0) {
        return Err(Error::OutOfRange { name: "eps", value: eps, expected: "0 < eps < 2" });
    }
    let n_threshold = n_threshold(spec, d, eps);
    let m_threshold = m_threshold(spec, eps);
    let schedule_n = smallest_schedule(d, n_threshold, |s| s.eps_vec + 2.0 * s.delta_vec)?;
    let schedule_m = smallest_schedule(d, m_threshold, |s| 2.0 * s.eps_vec + 4.0 * s.delta_vec)?;
    Ok(Budget { n: schedule_n.shots, m: schedule_m.shots, n_threshold, m_threshold, schedule_n, schedule_m })
}

/// Index pair `(r_x, r_y)` chosen by the two tomographies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RPair {
    pub rx: VecIndex,
    pub ry: VecIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSuperpositionOutcome {
    pub r: RPair,
    #[serde(with = "crate::format::pure_serde")]
    pub state: PureDensity,
    /// Implied phase in `[0, 2π)`, diagnostic only.
    pub phi_r: f64,
    /// `tr[s_r(x, y)]`.
    pub trace: f64,
    pub floor: f64,
    pub budget: Option<Budget>,
    pub x: VectorEstimate,
    pub y: VectorEstimate,
}

/// `γ_i(ρ)`: phase of `vec_i(ρ)` relative to `canonical_vec(ρ)`.
pub fn gamma(rho: &PureDensity, i: VecIndex) -> Result<f64> {
    Ok(canonical_vec(rho)?.inner(&vec_i(rho, i)?)?.arg())
}

fn wrap(phi: f64) -> f64 {
    let p = phi.rem_euclid(TAU);
    if p >= TAU {
        0.0
    } else {
        p
    }
}

/// The phase `φ` for which `αe^{iφ}u + βv ∝ |α|vec_{r_x}(uu†) + |β|vec_{r_y}(vv†)`.
pub fn implied_phase(u: &StateVector, v: &StateVector, spec: &SuperpositionSpec, r: RPair) -> Result<f64> {
    let gu = u.inner(&vec_i(&outer(u)?, r.rx)?)?.arg();
    let gv = v.inner(&vec_i(&outer(v)?, r.ry)?)?.arg();
    Ok(wrap(gu - gv + spec.beta.arg() - spec.alpha.arg()))
}

fn combine(spec: &SuperpositionSpec, a: &StateVector, b: &StateVector) -> CVector {
    a.amplitudes().map(|z| z * spec.alpha.norm()) + b.amplitudes().map(|z| z * spec.beta.norm())
}

/// Oracle-only pipeline: `u`, `v` are reached solely through [`StateOracle`].
pub fn random_superposition_oracles(
    u: &StateOracle,
    v: &StateOracle,
    spec: &SuperpositionSpec,
    eps: f64,
    seed: SeedStream,
    mode: Mode,
) -> Result<RandomSuperpositionOutcome> {
    let d = u.dim();
    if v.dim() != d {
        return Err(Error::DimensionMismatch { left: d, right: v.dim() });
    }
    let budget = match mode {
        Mode::Sampled => Some(copies_budget(spec, d, eps)?),
        Mode::Exact => copies_budget(spec, d, eps).ok(),
    };
    let (n, m) = budget.as_ref().map_or((0, 0), |b| (b.n, b.m));
    let x = vector_tomography_oracle(u, n, seed.named("u"), mode, None)?;
    let paired = spec.magnitudes_equal().then_some(&x.x);
    let y = vector_tomography_oracle(v, m, seed.named("v"), mode, paired)?;

    let s = combine(spec, &x.v, &y.v);
    let trace = s.norm_squared();
    let floor = trace_floor(spec, d);
    if !(trace >= floor * (1.0 - TOL.construction)) {
        return Err(Error::InvariantViolation(format!("tr s_r = {trace:e} below floor {floor:e}")));
    }
    let state = outer(&StateVector::normalize_vector(s)?)?;
    let phi_r = wrap(gamma(&x.x, x.r)? - gamma(&y.x, y.r)? + spec.beta.arg() - spec.alpha.arg());
    Ok(RandomSuperpositionOutcome { r: RPair { rx: x.r, ry: y.r }, state, phi_r, trace, floor, budget, x, y })
}

pub fn random_superposition(
    u: &PureDensity,
    v: &PureDensity,
    spec: &SuperpositionSpec,
    eps: f64,
    seed: SeedStream,
    mode: Mode,
) -> Result<RandomSuperpositionOutcome> {
    random_superposition_oracles(&StateOracle::new(u.clone())?, &StateOracle::new(v.clone())?, spec, eps, seed, mode)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub r: RPair,
    pub weight: f64,
    #[serde(with = "crate::format::pure_serde")]
    pub state: PureDensity,
    pub phi_r: f64,
    /// `tr[s_r]` before normalization.
    pub trace: f64,
}

/// `Σ_r p_r (superposition)_r ⊗ |r⟩⟨r|`, blocks sorted by `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntangledSuperposition {
    pub blocks: Vec<Block>,
    pub trials: usize,
}

impl EntangledSuperposition {
    pub fn block(&self, r: RPair) -> Option<&Block> {
        self.blocks.iter().find(|b| b.r == r)
    }

    pub fn total_weight(&self) -> f64 {
        self.blocks.iter().map(|b| b.weight).sum()
    }
}

/// `p_r` from `trials` pipeline runs (child streams `0..trials`); each
/// block's state is built from exact-frequency tomography with that `r`.
pub fn entangled_superposition(
    u: &PureDensity,
    v: &PureDensity,
    spec: &SuperpositionSpec,
    eps: f64,
    seed: SeedStream,
    trials: usize,
    mode: Mode,
) -> Result<EntangledSuperposition> {
    if trials == 0 {
        return Err(Error::OutOfRange { name: "trials", value: 0.0, expected: ">= 1" });
    }
    let ou = StateOracle::new(u.clone())?;
    let ov = StateOracle::new(v.clone())?;
    let rs = (0..trials as u64)
        .into_par_iter()
        .map(|k| random_superposition_oracles(&ou, &ov, spec, eps, seed.child(k), mode).map(|o| o.r))
        .collect::<Result<Vec<RPair>>>()?;
    let mut counts: BTreeMap<RPair, usize> = BTreeMap::new();
    for r in rs {
        *counts.entry(r).or_default() += 1;
    }
    let x = vector_tomography_oracle(&ou, 0, seed, Mode::Exact, None)?.x;
    let y = vector_tomography_oracle(&ov, 0, seed, Mode::Exact, None)?.x;
    let floor = trace_floor(spec, u.dim());
    let blocks = counts
        .into_iter()
        .map(|(r, c)| {
            let s = combine(spec, &vec_i(&x, r.rx)?, &vec_i(&y, r.ry)?);
            let trace = s.norm_squared();
            if !(trace >= floor * (1.0 - TOL.construction)) {
                return Err(Error::InvariantViolation(format!("tr s_r = {trace:e} below floor {floor:e}")));
            }
            Ok(Block {
                trace,
                r,
                weight: c as f64 / trials as f64,
                state: outer(&StateVector::normalize_vector(s)?)?,
                phi_r: wrap(gamma(&x, r.rx)? - gamma(&y, r.ry)? + spec.beta.arg() - spec.alpha.arg()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntangledSuperposition { blocks, trials })
}

/// Success-normalized error `(1/p) Σ_r ‖Ã_r − tr[Ã_r] s_r‖_tr` with
/// `Ã_r = w_r A_r`, `p = Σ_r tr[Ã_r]` and `s_r` the unit-trace target at
/// phase `phis[r]`.
pub fn figure_of_merit<K: Ord + std::fmt::Debug>(
    outcomes: &BTreeMap<K, (f64, DensityOperator)>,
    u: &StateVector,
    v: &StateVector,
    spec: &SuperpositionSpec,
    phis: &BTreeMap<K, f64>,
) -> Result<f64> {
    let mut p_succ = 0.0;
    let mut total = 0.0;
    for (r, (w, a)) in outcomes {
        if !(*w >= 0.0) {
            return Err(Error::OutOfRange { name: "weight", value: *w, expected: ">= 0" });
        }
        let eff = a.matrix().map(|z| z * *w);
        let tr = eff.trace().re;
        p_succ += tr;
        if tr == 0.0 {
            total += trace_norm(&eff);
            continue;
        }
        let phi = *phis.get(r).ok_or_else(|| Error::Malformed(format!("no phase for outcome {r:?}")))?;
        let s = target_superposition(u, v, spec, phi)?;
        total += trace_norm(&(eff - s.matrix().map(|z| z * tr)));
    }
    if !(p_succ > 0.0) {
        return Err(Error::ZeroSuccess);
    }
    Ok(total / p_succ)
}

/// Figure of merit of a single pipeline output against its implied target.
pub fn outcome_merit(out: &RandomSuperpositionOutcome, u: &StateVector, v: &StateVector, spec: &SuperpositionSpec) -> Result<f64> {
    let phi = implied_phase(u, v, spec, out.r)?;
    let outcomes = BTreeMap::from([(out.r, (1.0, out.state.as_density().clone()))]);
    figure_of_merit(&outcomes, u, v, spec, &BTreeMap::from([(out.r, phi)]))
}

/// Figure of merit of the block state against the implied targets.
pub fn entangled_merit(ent: &EntangledSuperposition, u: &StateVector, v: &StateVector, spec: &SuperpositionSpec) -> Result<f64> {
    let mut outcomes = BTreeMap::new();
    let mut phis = BTreeMap::new();
    for b in &ent.blocks {
        outcomes.insert(b.r, (b.weight, b.state.as_density().clone()));
        phis.insert(b.r, implied_phase(u, v, spec, b.r)?);
    }
    figure_of_merit(&outcomes, u, v, spec, &phis)
}

/// A random task instance: Haar `u`, `v` in `C^d` and unit-norm `(α, β)`
/// with random phases. Every third index has `|α| = |β|`; otherwise the
/// larger magnitude exceeds the smaller by a factor in `[1.25, 4]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(with = "crate::format::vector_serde")]
    pub u: StateVector,
    #[serde(with = "crate::format::vector_serde")]
    pub v: StateVector,
    pub spec: SuperpositionSpec,
}

pub fn random_instance(d: usize, index: u64, seed: SeedStream) -> Result<Instance> {
    use rand::Rng;
    let mut rng = seed.child(index).rng();
    let u = haar_state(d, &mut rng);
    let v = haar_state(d, &mut rng);
    let ratio: f64 = if index.is_multiple_of(3) { 1.0 } else { rng.random_range(1.25..=4.0) };
    let (mut a, mut b) = (ratio, 1.0);
    if rng.random::<bool>() {
        std::mem::swap(&mut a, &mut b);
    }
    let norm = (a * a + b * b).sqrt();
    let alpha = C64::from_polar(a / norm, random_phase(&mut rng));
    let beta = C64::from_polar(b / norm, random_phase(&mut rng));
    Ok(Instance { u, v, spec: SuperpositionSpec::new(alpha, beta)? })
}
