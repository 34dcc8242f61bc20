//! Postselection circuits, their multi-outcome generalization, the
//! bra-ket circuit identities used in the obstruction argument, and the
//! functional `g` that turns a candidate superposer into a map `S³ → C`.
//!
//! Register layout: `N` copies of `u`, then `M` copies of `v`, then one
//! ancilla of dimension `d_anc` prepared in `|0⟩`. The first factor is the
//! most significant index.

use crate::error::{Error, Result};
use crate::format::{decode_matrix, encode_matrix};
use crate::linalg::{
    hermitian_part, kron_checked, max_abs, max_entries, partial_trace_matrix, tensor_power, CMatrix, CVector,
    DensityOperator, PureDensity, StateVector, C64,
};
use crate::rng::{haar_state, SeedStream};
use crate::tol::TOL;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDims {
    /// Dimension `d` of each input copy.
    pub input: usize,
    /// `(N, M)`.
    pub copies: [usize; 2],
    pub ancilla: usize,
}

impl CircuitDims {
    /// Factor dimensions, ancilla last.
    pub fn factors(&self) -> Vec<usize> {
        let mut f = vec![self.input; self.copies[0] + self.copies[1]];
        f.push(self.ancilla);
        f
    }

    pub fn total(&self) -> Result<usize> {
        self.factors()
            .iter()
            .try_fold(1usize, |acc, &f| acc.checked_mul(f))
            .ok_or_else(|| Error::InvalidCircuit("dimension overflow".into()))
    }

    fn validate(&self) -> Result<usize> {
        if self.input == 0 || self.ancilla == 0 {
            return Err(Error::InvalidCircuit("dimensions must be positive".into()));
        }
        let total = self.total()?;
        let entries = total.saturating_mul(total);
        if entries > max_entries() {
            return Err(Error::TensorCap { entries, cap: max_entries() });
        }
        Ok(total)
    }
}

fn check_square(name: &str, m: &CMatrix, total: usize) -> Result<()> {
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::InvalidCircuit(format!("{name} is {}x{}, expected {total}x{total}", m.nrows(), m.ncols())));
    }
    Ok(())
}

fn check_unitary(v: &CMatrix, total: usize) -> Result<()> {
    check_square("V", v, total)?;
    let dev = max_abs(&(v.adjoint() * v - CMatrix::identity(total, total)));
    if dev > TOL.property {
        return Err(Error::InvalidCircuit(format!("V is not unitary (deviation {dev:e})")));
    }
    Ok(())
}

fn check_projector(name: &str, p: &CMatrix, total: usize) -> Result<()> {
    check_square(name, p, total)?;
    let herm = max_abs(&(p - p.adjoint()));
    let idem = max_abs(&(p * p - p));
    if herm > TOL.property || idem > TOL.property {
        return Err(Error::InvalidCircuit(format!("{name} is not a projector (hermiticity {herm:e}, idempotence {idem:e})")));
    }
    Ok(())
}

fn check_keep(keep: &[usize], dims: &CircuitDims) -> Result<()> {
    let n = dims.factors().len();
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if keep.is_empty() || sorted.len() != keep.len() || sorted.iter().any(|&k| k >= n) {
        return Err(Error::InvalidCircuit(format!("keep {keep:?} invalid for {n} registers")));
    }
    Ok(())
}

/// `V` followed by a success projector.
#[derive(Debug, Clone, PartialEq)]
pub struct PostselectionCircuit {
    dims: CircuitDims,
    v: CMatrix,
    pi_succ: CMatrix,
    keep: Vec<usize>,
}

impl PostselectionCircuit {
    pub fn new(dims: CircuitDims, v: CMatrix, pi_succ: CMatrix, keep: Vec<usize>) -> Result<Self> {
        let total = dims.validate()?;
        check_unitary(&v, total)?;
        check_projector("pi_succ", &pi_succ, total)?;
        check_keep(&keep, &dims)?;
        Ok(Self { dims, v, pi_succ, keep })
    }

    pub fn dims(&self) -> CircuitDims {
        self.dims
    }

    pub fn keep(&self) -> &[usize] {
        &self.keep
    }
}

/// `V` followed by `{Π_0, …, Π_{m−1}, Π_fail}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiOutcomeCircuit {
    dims: CircuitDims,
    v: CMatrix,
    projectors: Vec<CMatrix>,
    fail: CMatrix,
    keep: Vec<usize>,
}

impl MultiOutcomeCircuit {
    /// `fail = None` completes the measurement with `I − Σ_r Π_r`.
    pub fn new(dims: CircuitDims, v: CMatrix, projectors: Vec<CMatrix>, fail: Option<CMatrix>, keep: Vec<usize>) -> Result<Self> {
        let total = dims.validate()?;
        check_unitary(&v, total)?;
        if projectors.is_empty() {
            return Err(Error::InvalidCircuit("no outcome projectors".into()));
        }
        for (r, p) in projectors.iter().enumerate() {
            check_projector(&format!("projector {r}"), p, total)?;
        }
        let sum: CMatrix = projectors.iter().fold(CMatrix::zeros(total, total), |acc, p| acc + p);
        let fail = fail.unwrap_or_else(|| CMatrix::identity(total, total) - &sum);
        check_projector("fail", &fail, total)?;
        let dev = max_abs(&(sum + &fail - CMatrix::identity(total, total)));
        if dev > TOL.property {
            return Err(Error::InvalidCircuit(format!("projectors are not complete (deviation {dev:e})")));
        }
        check_keep(&keep, &dims)?;
        Ok(Self { dims, v, projectors, fail, keep })
    }

    pub fn outcomes(&self) -> usize {
        self.projectors.len()
    }

    pub fn dims(&self) -> CircuitDims {
        self.dims
    }
}

impl From<PostselectionCircuit> for MultiOutcomeCircuit {
    fn from(c: PostselectionCircuit) -> Self {
        let total = c.v.nrows();
        let fail = CMatrix::identity(total, total) - &c.pi_succ;
        Self { dims: c.dims, v: c.v, projectors: vec![c.pi_succ], fail, keep: c.keep }
    }
}

fn prepared_input(dims: &CircuitDims, u: &PureDensity, v: &PureDensity) -> Result<CMatrix> {
    for rho in [u, v] {
        if rho.dim() != dims.input {
            return Err(Error::DimensionMismatch { left: rho.dim(), right: dims.input });
        }
    }
    let cap = max_entries();
    let mut anc = CMatrix::zeros(dims.ancilla, dims.ancilla);
    anc[(0, 0)] = C64::new(1.0, 0.0);
    let un = tensor_power(u.as_density(), dims.copies[0])?;
    let vm = tensor_power(v.as_density(), dims.copies[1])?;
    kron_checked(&kron_checked(un.matrix(), vm.matrix(), cap)?, &anc, cap)
}

fn branch(dims: &CircuitDims, keep: &[usize], evolved: &CMatrix, p: &CMatrix) -> Result<DensityOperator> {
    let projected = p * evolved * p.adjoint();
    let reduced = partial_trace_matrix(&projected, keep, &dims.factors())?;
    Ok(DensityOperator::from_matrix_unchecked(hermitian_part(&reduced)))
}

/// `tr_K[Π V (u^{⊗N} ⊗ v^{⊗M} ⊗ |0⟩⟨0|) V† Π]`, unnormalized.
pub fn apply_postselection(c: &PostselectionCircuit, u: &PureDensity, v: &PureDensity) -> Result<DensityOperator> {
    let rho = prepared_input(&c.dims, u, v)?;
    let evolved = &c.v * rho * c.v.adjoint();
    branch(&c.dims, &c.keep, &evolved, &c.pi_succ)
}

/// Unnormalized branch states per outcome, plus the failure branch.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiOutcomeResult {
    pub outcomes: Vec<DensityOperator>,
    pub fail: DensityOperator,
}

impl MultiOutcomeResult {
    pub fn success_probability(&self) -> f64 {
        self.outcomes.iter().map(DensityOperator::trace).sum()
    }
}

pub fn apply_multioutcome(c: &MultiOutcomeCircuit, u: &PureDensity, v: &PureDensity) -> Result<MultiOutcomeResult> {
    let rho = prepared_input(&c.dims, u, v)?;
    let evolved = &c.v * rho * c.v.adjoint();
    let outcomes = c.projectors.iter().map(|p| branch(&c.dims, &c.keep, &evolved, p)).collect::<Result<Vec<_>>>()?;
    let fail = branch(&c.dims, &c.keep, &evolved, &c.fail)?;
    Ok(MultiOutcomeResult { outcomes, fail })
}

/// Swaps two registers of equal dimension `d` in a two-register space.
pub fn swap_unitary(d: usize) -> CMatrix {
    CMatrix::from_fn(d * d, d * d, |r, c| {
        let (a, b) = (c / d, c % d);
        if r == b * d + a {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Matrix file format; matrices are row-major `[re, im]` lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub dims: CircuitDims,
    #[serde(rename = "V")]
    pub v: Vec<[f64; 2]>,
    pub projectors: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fail: Option<Vec<[f64; 2]>>,
    pub keep: Vec<usize>,
}

impl CircuitFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("circuit file serializes")
    }

    fn decode(&self, data: &[[f64; 2]]) -> Result<CMatrix> {
        let total = self.dims.validate()?;
        decode_matrix(total, data)
    }

    pub fn to_multioutcome(&self) -> Result<MultiOutcomeCircuit> {
        let projectors = self.projectors.iter().map(|p| self.decode(p)).collect::<Result<Vec<_>>>()?;
        let fail = self.fail.as_ref().map(|f| self.decode(f)).transpose()?;
        MultiOutcomeCircuit::new(self.dims, self.decode(&self.v)?, projectors, fail, self.keep.clone())
    }

    pub fn to_postselection(&self) -> Result<PostselectionCircuit> {
        if self.projectors.len() != 1 {
            return Err(Error::InvalidCircuit(format!("expected one projector, got {}", self.projectors.len())));
        }
        PostselectionCircuit::new(self.dims, self.decode(&self.v)?, self.decode(&self.projectors[0])?, self.keep.clone())
    }

    pub fn from_postselection(c: &PostselectionCircuit) -> Self {
        Self { dims: c.dims, v: encode_matrix(&c.v), projectors: vec![encode_matrix(&c.pi_succ)], fail: None, keep: c.keep.clone() }
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn bell() -> CVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_vec(vec![c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)])
}

fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

fn check_qubit(x: &StateVector) -> Result<()> {
    if x.dim() != 2 {
        return Err(Error::DimensionMismatch { left: x.dim(), right: 2 });
    }
    Ok(())
}

/// `(⟨ψ+| ⊗ I)(|x⟩ ⊗ |ψ+⟩)`, contracted literally on `C⁸`.
pub fn teleport_identity_check(x: &StateVector) -> Result<StateVector> {
    check_qubit(x)?;
    let state = x.amplitudes().kronecker(&bell());
    let bra = bell().adjoint().kronecker(&CMatrix::identity(2, 2));
    Ok(StateVector::unnormalized((bra * state).iter().cloned().collect()))
}

/// Components of the bra `⟨ψ+|(|x⟩ ⊗ I)`, which is `⟨x*|/√2`.
pub fn conjugate_bra(x: &StateVector) -> Result<StateVector> {
    check_qubit(x)?;
    let op = x.amplitudes().kronecker(&CMatrix::identity(2, 2));
    Ok(StateVector::unnormalized((bell().adjoint() * op).iter().cloned().collect()))
}

/// Components of `⟨x⊥| = (⟨00| + ⟨11|)(|x⟩ ⊗ σ_Y)`; for `x = (a, b)` this is `(ib, −ia)`.
pub fn orthogonal_complement(x: &StateVector) -> Result<StateVector> {
    check_qubit(x)?;
    let op = x.amplitudes().kronecker(&sigma_y());
    let bra = bell().adjoint().scale(std::f64::consts::SQRT_2);
    Ok(StateVector::unnormalized((bra * op).iter().cloned().collect()))
}

/// The ket `|x⊥⟩`, the conjugate of [`orthogonal_complement`]'s components.
pub fn orthogonal_complement_ket(x: &StateVector) -> Result<StateVector> {
    Ok(orthogonal_complement(x)?.conj())
}

/// `|u⟩, |u⊥⟩` for a qubit `x` padded into `C^dim`.
pub fn padded_pair(x: &StateVector, dim: usize) -> Result<(StateVector, StateVector)> {
    check_qubit(x)?;
    let u = StateVector::normalize_vector(x.pad(dim)?.amplitudes().clone())?;
    let up = StateVector::normalize_vector(orthogonal_complement_ket(x)?.pad(dim)?.amplitudes().clone())?;
    Ok((u, up))
}

/// Result of checking one circuit identity on random inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub samples: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks the three bra-ket identities on `samples` random qubit states.
pub fn identity_suite(samples: usize, seed: SeedStream) -> Result<Vec<IdentityCheck>> {
    let tol = 1e-12;
    let mut errs = [0.0f64; 3];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for k in 0..samples as u64 {
        let x = haar_state(2, &mut seed.child(k).rng());
        let (a, b) = (x.amplitudes()[0], x.amplitudes()[1]);
        let t = teleport_identity_check(&x)?;
        errs[0] = errs[0].max((t.amplitudes() - x.amplitudes().unscale(2.0)).norm());
        let cb = conjugate_bra(&x)?;
        errs[1] = errs[1].max((cb.amplitudes() - x.amplitudes().scale(s)).norm());
        let oc = orthogonal_complement(&x)?;
        let expect = CVector::from_vec(vec![c(0., 1.) * b, c(0., -1.) * a]);
        let orth = (oc.amplitudes().transpose() * x.amplitudes())[(0, 0)].norm();
        errs[2] = errs[2].max((oc.amplitudes() - expect).norm()).max(orth).max((oc.norm() - 1.0).abs());
    }
    let names = ["teleportation", "conjugate_bra", "orthogonal_complement"];
    Ok(names
        .iter()
        .zip(errs)
        .map(|(n, e)| IdentityCheck { name: n.to_string(), samples, max_error: e, tolerance: tol, pass: e <= tol })
        .collect())
}

/// A candidate superposition map `(uu†, vv†) ↦ A ≥ 0`.
///
/// Implementations must be reentrant; the audit may evaluate them in parallel.
pub trait CandidateMap: Sync {
    fn apply(&self, u: &PureDensity, v: &PureDensity) -> Result<DensityOperator>;
}

impl<F> CandidateMap for F
where
    F: Fn(&PureDensity, &PureDensity) -> Result<DensityOperator> + Sync,
{
    fn apply(&self, u: &PureDensity, v: &PureDensity) -> Result<DensityOperator> {
        self(u, v)
    }
}

/// `g(x)` and its normalized form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GValue {
    pub g: [f64; 2],
    /// `g/|g|`, absent when `g` vanishes.
    pub g_hat: Option<[f64; 2]>,
    pub vanishes: bool,
}

impl GValue {
    pub fn value(&self) -> C64 {
        c(self.g[0], self.g[1])
    }

    pub fn normalized(&self) -> Option<C64> {
        self.g_hat.map(|z| c(z[0], z[1]))
    }
}

/// `g(x) = ⟨u⊥| A(uu†, u⊥u⊥†)/tr[A] |u⟩` with `u`, `u⊥` padded into `C^dim`.
pub fn g_functional(a: &dyn CandidateMap, x: &StateVector, dim: usize) -> Result<GValue> {
    let (u, up) = padded_pair(x, dim)?;
    let out = a.apply(&crate::linalg::outer(&u)?, &crate::linalg::outer(&up)?)?;
    if out.dim() != dim {
        return Err(Error::InvalidMap(format!("output dimension {} != {dim}", out.dim())));
    }
    let tr = out.trace();
    if !(tr > 0.0) {
        return Err(Error::InvalidMap(format!("output trace {tr:e} is not positive")));
    }
    let g = (up.amplitudes().adjoint() * out.matrix() * u.amplitudes())[(0, 0)] / tr;
    let vanishes = g.norm() < TOL.nonzero_diag;
    let g_hat = (!vanishes).then(|| g / g.norm()).map(|z| [z.re, z.im]);
    Ok(GValue { g: [g.re, g.im], g_hat, vanishes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{outer, partial_trace, trace_distance};
    use crate::rng::random_phase;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn qubit(a: C64, b: C64) -> StateVector {
        StateVector::new(vec![a, b]).unwrap()
    }

    fn dims(d: usize, n: usize, m: usize, anc: usize) -> CircuitDims {
        CircuitDims { input: d, copies: [n, m], ancilla: anc }
    }

    fn pure(seed: u64, d: usize) -> PureDensity {
        outer(&haar_state(d, &mut SeedStream::new(seed).rng())).unwrap()
    }

    fn random_unitary(n: usize, rng: &mut impl Rng) -> CMatrix {
        let m = CMatrix::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        m.qr().q()
    }

    #[test]
    fn identity_and_swap_circuits() {
        let (u, v) = (pure(1, 2), pure(2, 2));
        let id = PostselectionCircuit::new(dims(2, 1, 1, 1), CMatrix::identity(4, 4), CMatrix::identity(4, 4), vec![0]).unwrap();
        let out = apply_postselection(&id, &u, &v).unwrap();
        assert!(max_abs(&(out.matrix() - u.matrix())) < 1e-15);
        let zero = PostselectionCircuit::new(dims(2, 1, 1, 1), CMatrix::identity(4, 4), CMatrix::zeros(4, 4), vec![0]).unwrap();
        assert_eq!(apply_postselection(&zero, &u, &v).unwrap().trace(), 0.0);
        let swap = PostselectionCircuit::new(dims(2, 1, 1, 1), swap_unitary(2), CMatrix::identity(4, 4), vec![0]).unwrap();
        let out = apply_postselection(&swap, &u, &v).unwrap();
        assert!(max_abs(&(out.matrix() - v.matrix())) < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_circuits() {
        let d = dims(2, 1, 0, 1);
        let not_unitary = CMatrix::identity(2, 2).scale(2.0);
        assert!(PostselectionCircuit::new(d, not_unitary, CMatrix::identity(2, 2), vec![0]).is_err());
        let not_proj = CMatrix::identity(2, 2).scale(0.5);
        assert!(PostselectionCircuit::new(d, CMatrix::identity(2, 2), not_proj, vec![0]).is_err());
        assert!(PostselectionCircuit::new(d, CMatrix::identity(2, 2), CMatrix::identity(2, 2), vec![3]).is_err());
        assert!(PostselectionCircuit::new(d, CMatrix::identity(3, 3), CMatrix::identity(3, 3), vec![0]).is_err());
        let mut p0 = CMatrix::zeros(2, 2);
        p0[(0, 0)] = c(1., 0.);
        let incomplete = MultiOutcomeCircuit::new(d, CMatrix::identity(2, 2), vec![p0.clone()], Some(CMatrix::zeros(2, 2)), vec![0]);
        assert!(incomplete.is_err());
        let big = dims(4, 6, 6, 1);
        assert!(matches!(big.validate(), Err(Error::TensorCap { .. })));
    }

    #[test]
    fn multioutcome_born_probabilities_and_completeness() {
        // Measure the first copy of u in the computational basis; keep it.
        let u = pure(5, 3);
        let projs: Vec<CMatrix> = (0..3)
            .map(|i| {
                let mut p = CMatrix::zeros(3, 3);
                p[(i, i)] = c(1., 0.);
                p
            })
            .collect();
        let circ = MultiOutcomeCircuit::new(dims(3, 1, 0, 1), CMatrix::identity(3, 3), projs, None, vec![0]).unwrap();
        let res = apply_multioutcome(&circ, &u, &u).unwrap();
        for (i, a) in res.outcomes.iter().enumerate() {
            assert_abs_diff_eq!(a.trace(), u.diag(i), epsilon = 1e-15);
        }
        assert_abs_diff_eq!(res.success_probability() + res.fail.trace(), 1.0, epsilon = 1e-12);
        assert!(res.fail.trace().abs() < 1e-15);

        let post = PostselectionCircuit::new(dims(3, 1, 0, 1), CMatrix::identity(3, 3), circ.projectors[0].clone(), vec![0]).unwrap();
        let single: MultiOutcomeCircuit = post.clone().into();
        let a = apply_multioutcome(&single, &u, &u).unwrap();
        assert_eq!(a.outcomes[0], apply_postselection(&post, &u, &u).unwrap());
    }

    #[test]
    fn random_circuits_are_trace_nonincreasing_and_continuous() {
        let mut rng = SeedStream::new(8).rng();
        let mut worst = 0.0f64;
        for k in 0..30u64 {
            let d = dims(2, 1, 1, 2);
            let v = random_unitary(8, &mut rng);
            let w = random_unitary(8, &mut rng);
            let mut p = CMatrix::zeros(8, 8);
            for i in 0..4 {
                p[(i, i)] = c(1., 0.);
            }
            let pi = &w * p * w.adjoint();
            let circ = PostselectionCircuit::new(d, v, pi, vec![0, 1]).unwrap();
            let multi: MultiOutcomeCircuit = circ.clone().into();
            let u0 = haar_state(2, &mut rng);
            let v0 = haar_state(2, &mut rng);
            let out = apply_postselection(&circ, &outer(&u0).unwrap(), &outer(&v0).unwrap()).unwrap();
            assert!(out.trace() <= 1.0 + 1e-12);
            assert!(out.eigenvalues()[0] >= -1e-12);
            let res = apply_multioutcome(&multi, &outer(&u0).unwrap(), &outer(&v0).unwrap()).unwrap();
            assert_abs_diff_eq!(res.success_probability() + res.fail.trace(), 1.0, epsilon = 1e-10);
            // Finite-difference continuity with δ ≤ 1e-3.
            let t = 1e-4 * (1 + k % 5) as f64;
            let pert = StateVector::normalize_vector(u0.amplitudes() + haar_state(2, &mut rng).amplitudes().scale(t)).unwrap();
            let (a, b) = (outer(&u0).unwrap(), outer(&pert).unwrap());
            let delta = trace_distance(a.as_density(), b.as_density()).unwrap();
            assert!(delta <= 1e-3);
            let out2 = apply_postselection(&circ, &b, &outer(&v0).unwrap()).unwrap();
            let ratio = trace_distance(&out, &out2).unwrap() / delta;
            worst = worst.max(ratio);
        }
        // One copy of u: the map is a contraction in u.
        assert!(worst <= 1.0 + 1e-6, "{worst}");
    }

    #[test]
    fn copies_are_ordered_u_then_v() {
        let (u, v) = (pure(11, 2), pure(12, 2));
        let circ = PostselectionCircuit::new(dims(2, 2, 1, 2), CMatrix::identity(16, 16), CMatrix::identity(16, 16), vec![2]).unwrap();
        let out = apply_postselection(&circ, &u, &v).unwrap();
        assert!(max_abs(&(out.matrix() - v.matrix())) < 1e-14);
        let anc = PostselectionCircuit::new(dims(2, 2, 1, 2), CMatrix::identity(16, 16), CMatrix::identity(16, 16), vec![3]).unwrap();
        let out = apply_postselection(&anc, &u, &v).unwrap();
        assert_abs_diff_eq!(out.diag(0), 1.0, epsilon = 1e-14);
        let full = PostselectionCircuit::new(dims(2, 2, 1, 2), CMatrix::identity(16, 16), CMatrix::identity(16, 16), vec![0, 1]).unwrap();
        let out = apply_postselection(&full, &u, &v).unwrap();
        let second = partial_trace(&out, &[1], &[2, 2]).unwrap();
        assert!(max_abs(&(second.matrix() - u.matrix())) < 1e-14);
    }

    #[test]
    fn circuit_file_round_trip() {
        let circ = PostselectionCircuit::new(dims(2, 1, 1, 1), swap_unitary(2), CMatrix::identity(4, 4), vec![0]).unwrap();
        let file = CircuitFile::from_postselection(&circ);
        let back = CircuitFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back.to_postselection().unwrap(), circ);
        assert_eq!(back.to_multioutcome().unwrap().outcomes(), 1);
        assert!(CircuitFile::from_json(r#"{"dims":{"input":2,"copies":[1,0],"ancilla":1},"V":[[1,0]],"projectors":[],"keep":[0]}"#)
            .unwrap()
            .to_multioutcome()
            .is_err());
    }

    #[test]
    fn fig2_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = qubit(c(1., 0.), c(0., 0.));
        let t = teleport_identity_check(&z).unwrap();
        assert!((t.amplitudes() - z.amplitudes().unscale(2.0)).norm() < 1e-15);
        let plus = qubit(c(s, 0.), c(s, 0.));
        let t = teleport_identity_check(&plus).unwrap();
        assert!((t.amplitudes() - plus.amplitudes().unscale(2.0)).norm() < 1e-15);
        let one = qubit(c(0., 0.), c(1., 0.)).rephase(0.7);
        let t = teleport_identity_check(&one).unwrap();
        assert!((t.amplitudes() - one.amplitudes().unscale(2.0)).norm() < 1e-15);

        let cb = conjugate_bra(&z).unwrap();
        assert!((cb.amplitudes() - CVector::from_vec(vec![c(s, 0.), c(0., 0.)])).norm() < 1e-15);
        let i1 = qubit(c(0., 0.), c(0., 1.));
        // Explicit contraction: Σ_a ψ+_{a k} x_a = x_k/√2.
        let cb = conjugate_bra(&i1).unwrap();
        assert!((cb.amplitudes() - CVector::from_vec(vec![c(0., 0.), c(0., s)])).norm() < 1e-15);
        let real = qubit(c(0.6, 0.), c(-0.8, 0.));
        assert!((conjugate_bra(&real).unwrap().amplitudes() - real.amplitudes().scale(s)).norm() < 1e-15);

        let oc = orthogonal_complement(&z).unwrap();
        assert!((oc.amplitudes() - CVector::from_vec(vec![c(0., 0.), c(0., -1.)])).norm() < 1e-15);
        let oc = orthogonal_complement(&qubit(c(0., 0.), c(1., 0.))).unwrap();
        assert!((oc.amplitudes() - CVector::from_vec(vec![c(0., 1.), c(0., 0.)])).norm() < 1e-15);
        assert!(orthogonal_complement(&StateVector::basis(3, 0)).is_err());
    }

    #[test]
    fn identity_suite_passes() {
        let checks = identity_suite(100, SeedStream::new(7)).unwrap();
        assert_eq!(checks.len(), 3);
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }

    proptest! {
        #[test]
        fn complement_is_linear(seed in any::<u64>(), lr in -2.0f64..2.0, li in -2.0f64..2.0, mr in -2.0f64..2.0, mi in -2.0f64..2.0) {
            let mut rng = SeedStream::new(seed).rng();
            let x = haar_state(2, &mut rng);
            let y = haar_state(2, &mut rng);
            let (l, m) = (c(lr, li), c(mr, mi));
            let comb = StateVector::unnormalized((x.amplitudes() * l + y.amplitudes() * m).iter().cloned().collect());
            let lhs = orthogonal_complement(&comb).unwrap();
            let rhs = orthogonal_complement(&x).unwrap().amplitudes() * l + orthogonal_complement(&y).unwrap().amplitudes() * m;
            prop_assert!((lhs.amplitudes() - rhs).norm() < 1e-14);
            prop_assert!(x.inner(&orthogonal_complement_ket(&x).unwrap()).unwrap().norm() < 1e-15);
        }

        #[test]
        fn padded_pair_is_orthonormal(seed in any::<u64>(), d in 2usize..6) {
            let x = haar_state(2, &mut SeedStream::new(seed).rng());
            let (u, up) = padded_pair(&x, d).unwrap();
            prop_assert!(u.inner(&up).unwrap().norm() < 1e-15);
            prop_assert!((up.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn g_vanishes_for_orthogonal_sector() {
        let two = |_: &PureDensity, _: &PureDensity| Ok(outer(&StateVector::basis(3, 2))?.into_density());
        let mut rng = SeedStream::new(3).rng();
        for _ in 0..20 {
            let x = haar_state(2, &mut rng);
            let g = g_functional(&two, &x, 3).unwrap();
            assert!(g.vanishes && g.g_hat.is_none());
        }
        let zero = |_: &PureDensity, _: &PureDensity| Ok(outer(&StateVector::basis(3, 0))?.into_density());
        assert!(g_functional(&zero, &StateVector::basis(2, 0), 3).unwrap().vanishes);
        let bad = |_: &PureDensity, _: &PureDensity| Ok(DensityOperator::zeros(3));
        assert!(matches!(g_functional(&bad, &StateVector::basis(2, 0), 3), Err(Error::InvalidMap(_))));
    }

    #[test]
    fn density_built_maps_give_two_homogeneous_g() {
        let a = |u: &PureDensity, v: &PureDensity| {
            let fixed = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0.2, -0.4), c(0.2, 0.4), c(0.1, 0.)]);
            let m = u.matrix() * &fixed * v.matrix() + v.matrix() * &fixed * u.matrix() + u.matrix() * c(0.3, 0.0);
            DensityOperator::new(m + CMatrix::identity(2, 2).scale(2.0))
        };
        let mut rng = SeedStream::new(4).rng();
        for _ in 0..100 {
            let x = haar_state(2, &mut rng);
            let theta = random_phase(&mut rng);
            let g0 = g_functional(&a, &x, 2).unwrap().value();
            assert!(g0.norm() > 1e-3);
            let g1 = g_functional(&a, &x.rephase(theta), 2).unwrap().value();
            assert!((g1 - g0 * C64::from_polar(1.0, 2.0 * theta)).norm() < 1e-12);
        }
    }
}
