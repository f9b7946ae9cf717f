//! Numerical tolerances shared by every module.
//!
//! Acceptance tests and `verify` read their thresholds from here.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative asymmetry allowed in a "symmetric" input.
    pub symmetry: f64,
    /// Eigenpair residual and orthonormality for `sym_eigen`.
    pub eigen_residual: f64,
    /// Trace agreement and symmetric agreement for `general_spectrum`.
    pub spectrum: f64,
    /// Relative residual of triangular solves.
    pub triangular: f64,
    /// Scaled polynomial residual accepted for a root.
    pub root_residual: f64,
    /// Relative threshold below which an eigenvalue is treated as zero.
    pub rank: f64,
    /// Relative negative eigenvalue accepted as round-off in a PSD matrix.
    pub psd_negative: f64,
    /// `|sin(φ/2)|` below which the cosine sum is evaluated directly.
    pub cos_sum_singular: f64,
    /// `‖Ax* − b‖ ≤ tol·(1 + ‖b‖)` for a valid problem.
    pub optimum_residual: f64,
}

pub const DEFAULT: Tolerances = Tolerances {
    symmetry: 1e-12,
    eigen_residual: 1e-9,
    spectrum: 1e-8,
    triangular: 1e-12,
    root_residual: 1e-11,
    rank: 1e-10,
    psd_negative: 1e-9,
    cos_sum_singular: 1e-12,
    optimum_residual: 1e-9,
};

impl Default for Tolerances {
    fn default() -> Self {
        DEFAULT
    }
}

/// Shifted-QR iterations allowed per matrix row before giving up.
pub const SCHUR_ITER_PER_ROW: usize = 100;
/// Sweep cap of the Aberth iteration.
pub const ABERTH_MAX_SWEEPS: usize = 500;
