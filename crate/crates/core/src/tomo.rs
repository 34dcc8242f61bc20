//! Simulated pure-state tomography with vector output.
//!
//! The measurement family is the computational basis plus, for every index
//! pair `j < k`, the eigenbases of the embedded `σ_X` and `σ_Y` on
//! `span{|j⟩, |k⟩}` (all other basis vectors kept). Within an `X(j, k)`
//! setting, outcome `j` is `(|j⟩ + |k⟩)/√2` and outcome `k` is
//! `(|j⟩ − |k⟩)/√2`; for `Y(j, k)` the second component carries a factor
//! `±i`. Every other outcome `l` is `|l⟩`.
//!
//! Reconstruction is least-squares linear inversion followed by
//! [`project_to_pure`](crate::linalg::project_to_pure).

use crate::error::{Error, Result};
use crate::linalg::{
    euclidean_distance, outer, project_matrix_to_pure, trace_distance, CMatrix, PureDensity, StateVector, C64,
};
use crate::rng::{haar_state, SeedStream};
use crate::vecfun::{select_r, select_r_paired, vec_i, VecIndex};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest dimension the tomography simulator accepts.
pub const MAX_TOMO_DIM: usize = 16;
/// Smallest shot count a schedule accepts.
pub const MIN_SHOTS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type", content = "pair")]
pub enum Setting {
    Computational,
    X(usize, usize),
    Y(usize, usize),
}

/// The fixed setting family for dimension `d`, `1 + d(d − 1)` entries.
pub fn settings(d: usize) -> Vec<Setting> {
    let mut out = vec![Setting::Computational];
    for j in 0..d {
        for k in j + 1..d {
            out.push(Setting::X(j, k));
            out.push(Setting::Y(j, k));
        }
    }
    out
}

pub fn setting_count(d: usize) -> usize {
    1 + d * d.saturating_sub(1)
}

impl Setting {
    /// Basis vectors, indexed by outcome.
    pub fn basis(self, d: usize) -> Vec<StateVector> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut out: Vec<StateVector> = (0..d).map(|l| StateVector::basis(d, l)).collect();
        let (j, k, phase) = match self {
            Setting::Computational => return out,
            Setting::X(j, k) => (j, k, C64::new(1.0, 0.0)),
            Setting::Y(j, k) => (j, k, C64::new(0.0, 1.0)),
        };
        let make = |sign: f64| {
            let mut a = vec![C64::new(0.0, 0.0); d];
            a[j] = C64::new(s, 0.0);
            a[k] = phase * (sign * s);
            StateVector::unnormalized(a)
        };
        out[j] = make(1.0);
        out[k] = make(-1.0);
        out
    }

    /// Born probabilities `⟨e_o|ρ|e_o⟩` as closed forms in the entries of `ρ`.
    pub fn probabilities(self, rho: &CMatrix) -> Vec<f64> {
        let d = rho.nrows();
        let mut p: Vec<f64> = (0..d).map(|l| rho[(l, l)].re).collect();
        match self {
            Setting::Computational => {}
            Setting::X(j, k) => {
                let mean = 0.5 * (rho[(j, j)].re + rho[(k, k)].re);
                let re = rho[(j, k)].re;
                p[j] = mean + re;
                p[k] = mean - re;
            }
            Setting::Y(j, k) => {
                let mean = 0.5 * (rho[(j, j)].re + rho[(k, k)].re);
                let im = rho[(j, k)].im;
                p[j] = mean - im;
                p[k] = mean + im;
            }
        }
        p.iter_mut().for_each(|x| *x = x.max(0.0));
        p
    }
}

/// Shot counts for one setting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub setting_id: usize,
    pub counts: Vec<u64>,
}

impl MeasurementRecord {
    pub fn shots(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.shots().max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Outcome frequencies for one setting, empirical or exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRecord {
    pub setting_id: usize,
    pub frequencies: Vec<f64>,
}

impl From<&MeasurementRecord> for FrequencyRecord {
    fn from(r: &MeasurementRecord) -> Self {
        Self { setting_id: r.setting_id, frequencies: r.frequencies() }
    }
}

/// Whether outcomes are drawn or replaced by their exact probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Sampled,
    Exact,
}

/// Multinomial draw by sequential conditional binomials; `O(d)` for any `n`.
fn multinomial<R: Rng + ?Sized>(n: u64, p: &[f64], rng: &mut R) -> Vec<u64> {
    let mut suffix = vec![0.0; p.len() + 1];
    for o in (0..p.len()).rev() {
        suffix[o] = suffix[o + 1] + p[o];
    }
    let mut left = n;
    let mut counts = vec![0; p.len()];
    for o in 0..p.len() {
        if left == 0 {
            break;
        }
        if o + 1 == p.len() {
            counts[o] = left;
            break;
        }
        let q = if suffix[o] > 0.0 { (p[o] / suffix[o]).clamp(0.0, 1.0) } else { 0.0 };
        let c = Binomial::new(left, q).expect("probability in [0, 1]").sample(rng);
        counts[o] = c;
        left -= c;
    }
    counts
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_TOMO_DIM {
        return Err(Error::DimensionCap { dim: d, max: MAX_TOMO_DIM });
    }
    Ok(())
}

/// Black-box access to an unknown pure state: only measurement statistics
/// leave this type.
#[derive(Debug, Clone)]
pub struct StateOracle {
    rho: PureDensity,
}

impl StateOracle {
    pub fn new(rho: PureDensity) -> Result<Self> {
        check_dim(rho.dim())?;
        Ok(Self { rho })
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// `shots` draws in every setting; setting `s` uses the child stream `s`.
    pub fn sample(&self, shots: u64, seed: SeedStream) -> Vec<MeasurementRecord> {
        let d = self.dim();
        settings(d)
            .into_par_iter()
            .enumerate()
            .map(|(id, s)| {
                let p = s.probabilities(self.rho.matrix());
                let mut rng = seed.child(id as u64).rng();
                MeasurementRecord { setting_id: id, counts: multinomial(shots, &p, &mut rng) }
            })
            .collect()
    }

    /// The infinite-shot limit of [`StateOracle::sample`].
    pub fn exact_frequencies(&self) -> Vec<FrequencyRecord> {
        settings(self.dim())
            .into_iter()
            .enumerate()
            .map(|(id, s)| FrequencyRecord { setting_id: id, frequencies: s.probabilities(self.rho.matrix()) })
            .collect()
    }

    /// Frequencies in the requested mode.
    pub fn frequencies(&self, shots: u64, seed: SeedStream, mode: Mode) -> Vec<FrequencyRecord> {
        match mode {
            Mode::Sampled => self.sample(shots, seed).iter().map(FrequencyRecord::from).collect(),
            Mode::Exact => self.exact_frequencies(),
        }
    }
}

/// Draws `schedule.shots` outcomes in every setting.
pub fn sample_measurements(
    rho: &PureDensity,
    schedule: &TomographySchedule,
    seed: SeedStream,
) -> Result<Vec<MeasurementRecord>> {
    Ok(StateOracle::new(rho.clone())?.sample(schedule.shots, seed))
}

/// Least-squares Hermitian estimate from frequencies covering every setting once.
///
/// The objective decouples: each off-diagonal pair is fixed by the
/// difference of its two outcomes, and the diagonal solves a `d × d`
/// normal system.
pub fn linear_inversion(records: &[FrequencyRecord]) -> Result<CMatrix> {
    let d = records.first().map(|r| r.frequencies.len()).ok_or_else(|| Error::IncompleteSettings("no records".into()))?;
    check_dim(d)?;
    let family = settings(d);
    let mut by_id: Vec<Option<&[f64]>> = vec![None; family.len()];
    for r in records {
        if r.frequencies.len() != d {
            return Err(Error::InconsistentDims(format!("record {} has {} outcomes, expected {d}", r.setting_id, r.frequencies.len())));
        }
        let slot = by_id
            .get_mut(r.setting_id)
            .ok_or_else(|| Error::IncompleteSettings(format!("unknown setting {}", r.setting_id)))?;
        if slot.replace(&r.frequencies).is_some() {
            return Err(Error::IncompleteSettings(format!("setting {} repeated", r.setting_id)));
        }
    }
    if let Some(missing) = by_id.iter().position(Option::is_none) {
        return Err(Error::IncompleteSettings(format!("setting {missing} missing")));
    }

    let mut h = CMatrix::zeros(d, d);
    let mut gram = DMatrix::<f64>::zeros(d, d);
    let mut rhs = DVector::<f64>::zeros(d);
    for (s, f) in family.iter().zip(by_id.iter().map(|f| f.unwrap())) {
        let pair = match *s {
            Setting::Computational => None,
            Setting::X(j, k) | Setting::Y(j, k) => Some((j, k)),
        };
        for l in (0..d).filter(|&l| pair.is_none_or(|(j, k)| l != j && l != k)) {
            gram[(l, l)] += 1.0;
            rhs[l] += f[l];
        }
        if let Some((j, k)) = pair {
            let mean = 0.5 * (f[j] + f[k]);
            for (a, b) in [(j, j), (k, k), (j, k), (k, j)] {
                gram[(a, b)] += 0.5;
            }
            rhs[j] += mean;
            rhs[k] += mean;
            let half = 0.5 * (f[j] - f[k]);
            let z = match *s {
                Setting::X(..) => C64::new(half, 0.0),
                _ => C64::new(0.0, -half),
            };
            h[(j, k)] += z;
            h[(k, j)] += z.conj();
        }
    }
    let diag = gram.cholesky().expect("computational basis makes the system definite").solve(&rhs);
    for l in 0..d {
        h[(l, l)] = C64::new(diag[l], 0.0);
    }
    Ok(h)
}

/// Linear inversion of empirical counts, purified.
pub fn reconstruct(records: &[MeasurementRecord]) -> Result<PureDensity> {
    let freqs: Vec<FrequencyRecord> = records.iter().map(FrequencyRecord::from).collect();
    reconstruct_frequencies(&freqs)
}

pub fn reconstruct_frequencies(records: &[FrequencyRecord]) -> Result<PureDensity> {
    project_matrix_to_pure(&linear_inversion(records)?)
}

/// Accuracy guarantees attached to a shot count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TomographySchedule {
    pub dim: usize,
    /// Shots per setting.
    pub shots: u64,
    pub eps_tr: f64,
    pub delta_tr: f64,
    pub eps_vec: f64,
    pub delta_vec: f64,
}

/// Frozen calibration, `C_d` for `d = 2..=16` such that
/// `C_d · d / √N` bounds the trace error with empirical failure rate at most
/// [`CALIBRATION_FAILURE_RATE`] on every benchmarked shot count.
pub const CALIBRATION_VERSION: &str = "v1";
pub const CALIBRATION_FAILURE_RATE: f64 = 0.01;
pub const CALIBRATION_SHOTS: [u64; 5] = [100, 1_000, 10_000, 100_000, 1_000_000];
pub const CALIBRATION_STATES: usize = 500;
pub const CALIBRATION_SEED: u64 = 0x5eed_ca11;
const CALIBRATION: [f64; 15] = [
    1.3476, 0.9315, 0.7270, 0.5641, 0.4823, 0.4204, 0.3653, 0.3305, 0.2967, 0.2727, 0.2467, 0.2343, 0.2145,
    0.1968, 0.1833,
];

/// Calibrated constant for dimension `d` (`d = 1` reuses `d = 2`).
pub fn calibration_constant(d: usize) -> Result<f64> {
    check_dim(d)?;
    Ok(CALIBRATION[d.max(2) - 2])
}

/// `(√d + ½)ε + ¼ε²` once `ε ≤ 1/d`, else the vacuous radius 2.
pub fn eps_vec_from_tr(d: usize, eps_tr: f64) -> f64 {
    if eps_tr <= 1.0 / d as f64 {
        ((d as f64).sqrt() + 0.5) * eps_tr + 0.25 * eps_tr * eps_tr
    } else {
        2.0
    }
}

/// Upper standard-normal quantile at `0.005`, the two-sided level of
/// [`CALIBRATION_FAILURE_RATE`].
const Z_CALIBRATED: f64 = 2.575_829_303_548_901;

/// Radius multiplier for a failure rate below the calibrated one,
/// `√(2 ln(2/δ)) / z_{0.995}`: the sub-Gaussian quantile bound relative to
/// the calibrated quantile.
pub fn tail_factor(delta: f64) -> f64 {
    if delta >= CALIBRATION_FAILURE_RATE {
        1.0
    } else {
        ((2.0 * (2.0 / delta).ln()).sqrt() / Z_CALIBRATED).max(1.0)
    }
}

fn schedule_with(d: usize, shots: u64, delta: f64) -> Result<TomographySchedule> {
    if shots < MIN_SHOTS {
        return Err(Error::OutOfRange { name: "shots", value: shots as f64, expected: ">= 100" });
    }
    let c = calibration_constant(d)? * tail_factor(delta);
    let eps_tr = (c * d as f64 / (shots as f64).sqrt()).min(2.0);
    Ok(TomographySchedule { dim: d, shots, eps_tr, delta_tr: delta, eps_vec: eps_vec_from_tr(d, eps_tr), delta_vec: delta })
}

/// Fixed-confidence schedule, `δ = 0.05`.
pub fn calibrate_schedule(d: usize, shots: u64) -> Result<TomographySchedule> {
    schedule_with(d, shots, 0.05)
}

/// Schedule whose failure probability also vanishes, `δ_N = min(0.05, N^{-1/2})`.
pub fn budget_schedule(d: usize, shots: u64) -> Result<TomographySchedule> {
    schedule_with(d, shots, 0.05f64.min(1.0 / (shots as f64).sqrt()))
}

/// Trace-norm error of one tomography run on a Haar state, scaled to the
/// calibration variable `t · √N / d`.
fn scaled_error(d: usize, shots: u64, seed: SeedStream) -> Result<f64> {
    let rho = outer(&haar_state(d, &mut seed.named("state").rng()))?;
    let x = StateOracle::new(rho.clone())?.sample(shots, seed.named("shots"));
    let t = trace_distance(reconstruct(&x)?.as_density(), rho.as_density())?;
    Ok(t * (shots as f64).sqrt() / d as f64)
}

/// One calibration cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationCell {
    pub dim: usize,
    pub shots: u64,
    pub constant: f64,
    pub failure_rate: f64,
}

/// Smallest `C` (bisection) whose failure rate on `errors` is at most `target`.
pub fn bisect_constant(errors: &[f64], target: f64) -> f64 {
    let rate = |c: f64| errors.iter().filter(|&&e| e > c).count() as f64 / errors.len() as f64;
    let (mut lo, mut hi) = (0.0, errors.iter().cloned().fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if rate(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Benchmarks `states` Haar states per shot count; stream `(d, N, k)` is fixed.
pub fn calibrate_cells(d: usize, shots: &[u64], states: usize, target: f64, seed: SeedStream) -> Result<Vec<CalibrationCell>> {
    check_dim(d)?;
    shots
        .iter()
        .map(|&n| {
            let cell = seed.child(d as u64).child(n);
            let errors = (0..states as u64)
                .into_par_iter()
                .map(|k| scaled_error(d, n, cell.child(k)))
                .collect::<Result<Vec<f64>>>()?;
            let constant = bisect_constant(&errors, target);
            let failure_rate = errors.iter().filter(|&&e| e > constant).count() as f64 / states as f64;
            Ok(CalibrationCell { dim: d, shots: n, constant, failure_rate })
        })
        .collect()
}

/// Output of vector tomography.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorEstimate {
    #[serde(with = "crate::format::pure_serde")]
    pub x: PureDensity,
    pub r: VecIndex,
    #[serde(with = "crate::format::vector_serde")]
    pub v: StateVector,
}

/// `x` from tomography on `oracle`, then `r = r(x)` (or the paired rule
/// against `paired_with`) and `v = vec_r(x)`.
pub fn vector_tomography_oracle(
    oracle: &StateOracle,
    shots: u64,
    seed: SeedStream,
    mode: Mode,
    paired_with: Option<&PureDensity>,
) -> Result<VectorEstimate> {
    let x = reconstruct_frequencies(&oracle.frequencies(shots, seed, mode))?;
    let r = match paired_with {
        Some(first) => select_r_paired(first, &x)?,
        None => select_r(&x),
    };
    let v = vec_i(&x, r)?;
    Ok(VectorEstimate { x, r, v })
}

pub fn vector_tomography(
    rho: &PureDensity,
    schedule: &TomographySchedule,
    seed: SeedStream,
    mode: Mode,
    paired_with: Option<&PureDensity>,
) -> Result<VectorEstimate> {
    vector_tomography_oracle(&StateOracle::new(rho.clone())?, schedule.shots, seed, mode, paired_with)
}

/// Diagnostics for one tomography run against a known truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// `‖x − ρ‖_tr`.
    pub trace_error: f64,
    /// `‖vec_r(x) − vec_r(ρ)‖₂`.
    pub vec_error: f64,
    pub r: VecIndex,
    /// `⟨r|x|r⟩`.
    pub weight: f64,
}

pub fn tomography_trial(rho: &PureDensity, schedule: &TomographySchedule, seed: SeedStream, mode: Mode) -> Result<TrialOutcome> {
    let est = vector_tomography(rho, schedule, seed, mode, None)?;
    Ok(TrialOutcome {
        trace_error: trace_distance(est.x.as_density(), rho.as_density())?,
        vec_error: euclidean_distance(&est.v, &vec_i(rho, est.r)?)?,
        r: est.r,
        weight: est.x.diag(est.r.get()),
    })
}

/// Fraction of `trials` runs (child streams `0..trials`) with
/// `‖vec_r(x) − vec_r(ρ)‖₂ ≤ eps_vec`.
pub fn empirical_success_rate(rho: &PureDensity, schedule: &TomographySchedule, trials: usize, seed: SeedStream, mode: Mode) -> Result<f64> {
    if trials == 0 {
        return Ok(1.0);
    }
    let ok = (0..trials as u64)
        .into_par_iter()
        .map(|k| tomography_trial(rho, schedule, seed.child(k), mode).map(|t| t.vec_error <= schedule.eps_vec))
        .collect::<Result<Vec<bool>>>()?;
    Ok(ok.iter().filter(|&&b| b).count() as f64 / trials as f64)
}
