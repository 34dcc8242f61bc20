//! Dense complex linear algebra for pure and mixed states.
//!
//! Conventions:
//!
//! - The trace norm is the unnormalized sum of singular values, so two
//!   orthogonal pure states sit at distance 2.
//! - Tensor products put the first factor on the most significant index.
//! - Hermitian spectra come from a Hermitian eigendecomposition; singular
//!   values of a Hermitian difference are the absolute eigenvalues.

use crate::error::{Error, Result};
use crate::tol::TOL;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default cap on the number of entries of a tensored operator.
pub const DEFAULT_MAX_ENTRIES: usize = 1 << 20;

/// Environment variable overriding the largest operator dimension.
pub const MAX_DIM_ENV: &str = "SUPERSIM_MAX_DIM";

/// Maximum number of matrix entries a tensor product may produce.
///
/// `SUPERSIM_MAX_DIM=D` sets the cap to `D * D` entries.
pub fn max_entries() -> usize {
    std::env::var(MAX_DIM_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&d| d > 0)
        .map(|d| d.saturating_mul(d))
        .unwrap_or(DEFAULT_MAX_ENTRIES)
}

/// A vector in `C^d`. Normalized unless built with [`StateVector::unnormalized`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: CVector,
    normalized: bool,
}

impl StateVector {
    /// Wraps amplitudes that already have unit norm (within 1e-12).
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let amps = CVector::from_vec(amps);
        let norm = amps.norm();
        if amps.is_empty() || (norm - 1.0).abs() > TOL.construction {
            return Err(Error::Normalization { norm });
        }
        Ok(Self { amps, normalized: true })
    }

    /// Rescales to unit norm; rejects the zero vector.
    pub fn normalize(amps: Vec<C64>) -> Result<Self> {
        Self::normalize_vector(CVector::from_vec(amps))
    }

    pub fn normalize_vector(amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if amps.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::Normalization { norm });
        }
        Ok(Self { amps: amps.unscale(norm), normalized: true })
    }

    /// Arbitrary vector, flagged as unnormalized.
    pub fn unnormalized(amps: Vec<C64>) -> Self {
        Self { amps: CVector::from_vec(amps), normalized: false }
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = CVector::zeros(dim);
        amps[index] = C64::new(1.0, 0.0);
        Self { amps, normalized: true }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn to_vec(&self) -> Vec<C64> {
        self.amps.iter().copied().collect()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// `e^{iθ}|self⟩`.
    pub fn rephase(&self, theta: f64) -> Self {
        Self { amps: self.amps.scale_complex(C64::from_polar(1.0, theta)), normalized: self.normalized }
    }

    /// Embeds into `C^dim` on the leading coordinates.
    pub fn pad(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: dim });
        }
        let mut amps = CVector::zeros(dim);
        amps.rows_mut(0, self.dim()).copy_from(&self.amps);
        Ok(Self { amps, normalized: self.normalized })
    }

    /// Component-wise complex conjugate.
    pub fn conj(&self) -> Self {
        Self { amps: self.amps.map(|z| z.conj()), normalized: self.normalized }
    }
}

trait ScaleComplex {
    fn scale_complex(&self, c: C64) -> CVector;
}

impl ScaleComplex for CVector {
    fn scale_complex(&self, c: C64) -> CVector {
        self.map(|z| z * c)
    }
}

/// Positive semidefinite Hermitian operator.
///
/// [`DensityOperator::new`] additionally requires a positive trace;
/// [`DensityOperator::psd`] admits the zero operator, which unnormalized
/// circuit branches can legitimately produce.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    m: CMatrix,
}

impl DensityOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        let op = Self::psd(m)?;
        let trace = op.trace();
        if trace <= 0.0 {
            return Err(Error::NonPositiveTrace { trace });
        }
        Ok(op)
    }

    pub fn psd(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let deviation = hermitian_deviation(&m);
        if deviation > TOL.construction {
            return Err(Error::NotHermitian { deviation });
        }
        let m = hermitian_part(&m);
        let min_eigenvalue = hermitian_eigen(&m).0.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eigenvalue < -TOL.psd_floor {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { m })
    }

    /// Skips validation; for results that are PSD by construction.
    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: CMatrix::zeros(dim, dim) }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim).unscale(dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// `⟨i|ρ|i⟩`.
    pub fn diag(&self, i: usize) -> f64 {
        self.m[(i, i)].re
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { m: self.m.scale(factor.max(0.0)) }
    }

    /// Rescales to unit trace.
    pub fn normalized(&self) -> Result<Self> {
        let trace = self.trace();
        if trace <= 0.0 {
            return Err(Error::NonPositiveTrace { trace });
        }
        Ok(Self { m: self.m.unscale(trace) })
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.m).0
    }
}

/// Rank-one, unit-trace projector `|ψ⟩⟨ψ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureDensity(DensityOperator);

impl PureDensity {
    pub fn new(m: CMatrix) -> Result<Self> {
        let op = DensityOperator::new(m)?;
        let trace = op.trace();
        if (trace - 1.0).abs() > TOL.construction {
            return Err(Error::NotPure { reason: format!("trace {trace} != 1") });
        }
        let eig = op.eigenvalues();
        if eig.len() >= 2 && eig[eig.len() - 2] > TOL.property {
            return Err(Error::NotPure {
                reason: format!("second eigenvalue {:e}", eig[eig.len() - 2]),
            });
        }
        let idem = max_abs(&(&op.m * &op.m - &op.m));
        if idem > TOL.property {
            return Err(Error::NotPure { reason: format!("rho^2 - rho deviates by {idem:e}") });
        }
        Ok(Self(op))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(DensityOperator::from_matrix_unchecked(m))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.0.matrix()
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.0.diag(i)
    }

    pub fn as_density(&self) -> &DensityOperator {
        &self.0
    }

    pub fn into_density(self) -> DensityOperator {
        self.0
    }
}

impl AsRef<DensityOperator> for PureDensity {
    fn as_ref(&self) -> &DensityOperator {
        &self.0
    }
}

impl AsRef<DensityOperator> for DensityOperator {
    fn as_ref(&self) -> &DensityOperator {
        self
    }
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues (ascending) and matching eigenvector columns of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = hermitian_part(m);
    let n = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Trace norm of the Hermitian part of `m`.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    hermitian_eigen(m).0.iter().map(|l| l.abs()).sum()
}

/// `|ψ⟩⟨ψ|` for a unit vector.
pub fn outer(psi: &StateVector) -> Result<PureDensity> {
    let norm = psi.norm();
    if !psi.is_normalized() || (norm - 1.0).abs() > TOL.construction {
        return Err(Error::Normalization { norm });
    }
    Ok(PureDensity::from_matrix_unchecked(outer_matrix(psi.amplitudes())))
}

pub(crate) fn outer_matrix(v: &CVector) -> CMatrix {
    let d = v.len();
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = C64::new(v[i].norm_sqr(), 0.0);
        for j in i + 1..d {
            let z = v[i] * v[j].conj();
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Sum of singular values of `a - b`.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    Ok(trace_norm(&(a.matrix() - b.matrix())))
}

pub fn euclidean_distance(u: &StateVector, v: &StateVector) -> Result<f64> {
    check_dims(u.dim(), v.dim())?;
    Ok((u.amplitudes() - v.amplitudes()).norm())
}

/// Kronecker product under the default (or environment) size cap.
pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    tensor_with_cap(a, b, max_entries())
}

pub fn tensor_with_cap(a: &DensityOperator, b: &DensityOperator, cap: usize) -> Result<DensityOperator> {
    let m = kron_checked(a.matrix(), b.matrix(), cap)?;
    Ok(DensityOperator::from_matrix_unchecked(m))
}

pub(crate) fn kron_checked(a: &CMatrix, b: &CMatrix, cap: usize) -> Result<CMatrix> {
    let rows = a.nrows() * b.nrows();
    let cols = a.ncols() * b.ncols();
    let entries = rows.saturating_mul(cols);
    if entries > cap {
        return Err(Error::TensorCap { entries, cap });
    }
    Ok(a.kronecker(b))
}

/// `ρ^{⊗n}`.
pub fn tensor_power(rho: &DensityOperator, n: usize) -> Result<DensityOperator> {
    let cap = max_entries();
    let mut acc = CMatrix::identity(1, 1);
    for _ in 0..n {
        acc = kron_checked(&acc, rho.matrix(), cap)?;
    }
    Ok(DensityOperator::from_matrix_unchecked(acc))
}

/// Reduces `rho` onto the subsystems in `keep` (output ordered by index).
pub fn partial_trace(rho: &DensityOperator, keep: &[usize], dims: &[usize]) -> Result<DensityOperator> {
    Ok(DensityOperator::from_matrix_unchecked(partial_trace_matrix(rho.matrix(), keep, dims)?))
}

pub(crate) fn partial_trace_matrix(m: &CMatrix, keep: &[usize], dims: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || total != m.nrows() || !m.is_square() {
        return Err(Error::InconsistentDims(format!(
            "factors {dims:?} do not multiply to {}",
            m.nrows()
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InconsistentDims(format!("keep set {keep:?} invalid for {} factors", dims.len())));
    }
    let is_kept: Vec<bool> = (0..dims.len()).map(|i| kept.contains(&i)).collect();
    let out_dim: usize = kept.iter().map(|&k| dims[k]).product();

    // Split every full index into (kept index, traced index).
    let split: Vec<(usize, usize)> = (0..total)
        .map(|mut idx| {
            let (mut k_idx, mut k_stride, mut t_idx, mut t_stride) = (0, 1, 0, 1);
            for f in (0..dims.len()).rev() {
                let digit = idx % dims[f];
                idx /= dims[f];
                if is_kept[f] {
                    k_idx += digit * k_stride;
                    k_stride *= dims[f];
                } else {
                    t_idx += digit * t_stride;
                    t_stride *= dims[f];
                }
            }
            (k_idx, t_idx)
        })
        .collect();

    let mut out = CMatrix::zeros(out_dim, out_dim);
    for (r, &(kr, tr)) in split.iter().enumerate() {
        for (c, &(kc, tc)) in split.iter().enumerate() {
            if tr == tc {
                out[(kr, kc)] += m[(r, c)];
            }
        }
    }
    Ok(out)
}

/// Dominant-eigenvector purification of a Hermitian estimate.
///
/// Within a degenerate top eigenspace `P`, the representative is
/// `P|i⟩ / √⟨i|P|i⟩` for the smallest `i` with nonzero weight, which is
/// basis-independent and gives `diag(½, ½) ↦ |0⟩⟨0|`.
pub fn project_to_pure(h: &DensityOperator) -> Result<PureDensity> {
    project_matrix_to_pure(h.matrix())
}

pub fn project_matrix_to_pure(h: &CMatrix) -> Result<PureDensity> {
    if !h.is_square() {
        return Err(Error::NotSquare { rows: h.nrows(), cols: h.ncols() });
    }
    let scale = max_abs(h);
    if h.is_empty() || scale == 0.0 || !scale.is_finite() {
        return Err(Error::ZeroMatrix);
    }
    Ok(PureDensity::from_matrix_unchecked(outer_matrix(&top_eigenvector(h)?)))
}

pub(crate) fn top_eigenvector(h: &CMatrix) -> Result<CVector> {
    let d = h.nrows();
    let scale = max_abs(h);
    let (values, vectors) = hermitian_eigen(h);
    let top = values[d - 1];
    let gap = TOL.degenerate_eigen * scale.max(1.0);
    let top_space: Vec<usize> = (0..d).filter(|&k| top - values[k] <= gap).collect();
    if top_space.len() == 1 {
        return Ok(vectors.column(d - 1).into_owned());
    }
    let mut proj = CMatrix::zeros(d, d);
    for &k in &top_space {
        proj += outer_matrix(&vectors.column(k).into_owned());
    }
    let i = (0..d)
        .position(|i| proj[(i, i)].re > TOL.nonzero_diag)
        .ok_or(Error::ZeroMatrix)?;
    let col = proj.column(i).into_owned();
    Ok(col.unscale(col.norm()))
}
