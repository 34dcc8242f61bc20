//! Numerical tolerances shared by every module.

/// One record holding every tolerance knob.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Normalization, Hermiticity and trace checks at construction time.
    pub construction: f64,
    /// Property checks (purity, idempotence, unitarity, reconstruction).
    pub property: f64,
    /// Smallest eigenvalue still accepted as nonnegative.
    pub psd_floor: f64,
    /// Diagonal weight below which a column counts as zero.
    pub nonzero_diag: f64,
    /// Loop closure `last ≈ first`.
    pub loop_closure: f64,
    /// `|alpha| == |beta|` detection.
    pub magnitude_equal: f64,
    /// Eigenvalues within this (relative) gap of the maximum share the top eigenspace.
    pub degenerate_eigen: f64,
}

pub const TOL: Tolerances = Tolerances {
    construction: 1e-12,
    property: 1e-10,
    psd_floor: 1e-10,
    nonzero_diag: 1e-12,
    loop_closure: 1e-9,
    magnitude_equal: 1e-12,
    degenerate_eigen: 1e-10,
};
