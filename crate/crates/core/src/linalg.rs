//! Dense linear-algebra kernels.
//!
//! Symmetric eigendecompositions and the real Schur form are backed by
//! nalgebra; triangular solves, the PSD pseudo-inverse, Aberth root finding
//! and the closed-form cosine sum are implemented here.

use std::f64::consts::PI;

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

/// Row/column-indexed real matrix. Storage is column-major (nalgebra).
pub type DenseMatrix = DMatrix<f64>;

pub fn ensure_square(m: &DenseMatrix) -> Result<usize> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::Contract("empty matrix".into()));
    }
    if m.nrows() != m.ncols() {
        return Err(Error::Contract(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub fn ensure_finite(m: &DenseMatrix) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Contract("matrix has non-finite entries".into()))
    }
}

/// Largest absolute entry.
pub fn max_abs(m: &DenseMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Square, finite and `|s_ij − s_ji| ≤ tol·max|s|`.
pub fn ensure_symmetric(s: &DenseMatrix, tol: f64) -> Result<usize> {
    let n = ensure_square(s)?;
    ensure_finite(s)?;
    let scale = max_abs(s);
    for j in 0..n {
        for i in (j + 1)..n {
            let d = (s[(i, j)] - s[(j, i)]).abs();
            if d > tol * scale {
                return Err(Error::Contract(format!(
                    "matrix not symmetric: |s[{i},{j}] - s[{j},{i}]| = {d:e}"
                )));
            }
        }
    }
    Ok(n)
}

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub eigenvalues: DVector<f64>,
    /// Orthonormal eigenvectors, column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: DenseMatrix,
}

impl SymEigen {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Smallest eigenvalue above `rank_tol·λ_max`.
    pub fn min_nonzero(&self, rank_tol: f64) -> Option<f64> {
        let cut = rank_tol * self.max().abs();
        self.eigenvalues.iter().copied().find(|&l| l > cut)
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let v = &self.eigenvectors;
        v * DMatrix::from_diagonal(&self.eigenvalues) * v.transpose()
    }
}

pub fn sym_eigen(s: &DenseMatrix) -> Result<SymEigen> {
    let n = ensure_symmetric(s, tol::DEFAULT.symmetry)?;
    let sym = (s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 100 * n.max(10)).ok_or(
        Error::NoConvergence {
            what: "symmetric eigensolver",
            iterations: 100 * n.max(10),
            residual: f64::NAN,
        },
    )?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SymEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues of a general real square matrix.
#[derive(Debug, Clone)]
pub struct ComplexSpectrum {
    /// With multiplicity; complex eigenvalues appear in conjugate pairs.
    pub eigenvalues: Vec<Complex64>,
    pub radius: f64,
}

impl ComplexSpectrum {
    pub fn one_minus_radius(&self) -> f64 {
        1.0 - self.radius
    }
}

/// Spectrum via Hessenberg reduction and Francis double-shift QR.
pub fn general_spectrum(m: &DenseMatrix) -> Result<ComplexSpectrum> {
    let n = ensure_square(m)?;
    ensure_finite(m)?;
    let cap = tol::SCHUR_ITER_PER_ROW * n.max(10);
    let schur = Schur::try_new(m.clone(), f64::EPSILON, cap).ok_or_else(|| {
        // Residual reported is the largest subdiagonal entry of the Hessenberg
        // form, which is what failed to deflate.
        let h = m.clone().hessenberg().h();
        let residual = (1..n).map(|i| h[(i, i - 1)].abs()).fold(0.0, f64::max);
        Error::NoConvergence {
            what: "shifted QR",
            iterations: cap,
            residual,
        }
    })?;
    let eigenvalues: Vec<Complex64> = schur
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    let radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(ComplexSpectrum {
        eigenvalues,
        radius,
    })
}

/// Largest singular value, `sqrt(λ_max(MᵀM))`.
pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    ensure_finite(m)?;
    let gram = if m.nrows() >= m.ncols() {
        m.transpose() * m
    } else {
        m * m.transpose()
    };
    Ok(sym_eigen(&gram)?.max().max(0.0).sqrt())
}

/// Solve `Γ·x = v` for lower-triangular `Γ` by forward substitution.
///
/// Entries above the diagonal are ignored.
pub fn forward_solve(gamma: &DenseMatrix, v: &DVector<f64>) -> Result<DVector<f64>> {
    let n = ensure_square(gamma)?;
    if v.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: v.len(),
        });
    }
    let mut x = v.clone();
    for i in 0..n {
        let d = gamma[(i, i)];
        if d == 0.0 {
            return Err(Error::SingularTriangular { index: i });
        }
        let mut acc = x[i];
        for j in 0..i {
            acc -= gamma[(i, j)] * x[j];
        }
        x[i] = acc / d;
    }
    Ok(x)
}

/// Inverse of a lower-triangular matrix, column by column.
pub fn lower_triangular_inverse(gamma: &DenseMatrix) -> Result<DenseMatrix> {
    let n = ensure_square(gamma)?;
    let mut inv = DMatrix::zeros(n, n);
    for j in 0..n {
        let col = forward_solve(gamma, &DVector::from_fn(n, |i, _| (i == j) as u8 as f64))?;
        inv.set_column(j, &col);
    }
    Ok(inv)
}

/// Evaluate `Σ coeffs[k]·z^k` and its derivative by Horner's rule.
pub fn poly_eval(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// `Σ |coeffs[k]|·|z|^k`, the scale of the rounding error in `poly_eval`.
fn poly_abs_eval(coeffs: &[Complex64], r: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
}

/// Newton correction `p(z)/p'(z)` together with `p(z)` and its rounding
/// scale, both divided by `max(1, |z|)^n` so nothing overflows.
///
/// Outside the unit disc the reversed polynomial is evaluated at `1/z`:
/// `p(z) = zⁿ·r(1/z)` and `p/p' = z·r/(n·r − r'/z)`.
struct Eval {
    ratio: Complex64,
    scaled_p: f64,
    scaled_abs: f64,
    /// `(1 + |z|)ⁿ / max(1, |z|)ⁿ`.
    scaled_growth: f64,
}

fn eval_scaled(coeffs: &[Complex64], reversed: &[Complex64], z: Complex64) -> Eval {
    let n = (coeffs.len() - 1) as f64;
    let m = z.norm();
    if m <= 1.0 {
        let (p, dp) = poly_eval(coeffs, z);
        Eval {
            ratio: p / dp,
            scaled_p: p.norm(),
            scaled_abs: poly_abs_eval(coeffs, m),
            scaled_growth: (1.0 + m).powf(n),
        }
    } else {
        let y = z.inv();
        let (r, dr) = poly_eval(reversed, y);
        Eval {
            ratio: z * r / (r * n - dr * y),
            scaled_p: r.norm(),
            scaled_abs: poly_abs_eval(reversed, y.norm()),
            scaled_growth: (1.0 + y.norm()).powf(n),
        }
    }
}

/// All roots of `Σ coeffs[k]·q^k` (ascending powers) by the Aberth–Ehrlich
/// iteration with Gauss–Seidel updates.
///
/// Initial guesses sit on the circle of radius `(max|a_k| / |a_n|)^{1/n}` at
/// angles `2πk/n + 0.3`.
pub fn aberth_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    if coeffs.len() < 2 {
        return Err(Error::Contract(
            "polynomial degree must be at least 1".into(),
        ));
    }
    let degree = coeffs.len() - 1;
    let lead = coeffs[degree];
    if lead.norm() == 0.0 {
        return Err(Error::Contract("leading coefficient is zero".into()));
    }
    if coeffs.iter().any(|a| !a.is_finite()) {
        return Err(Error::Contract("non-finite coefficient".into()));
    }
    let reversed: Vec<Complex64> = coeffs.iter().rev().copied().collect();
    let max_coeff = coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let radius = (max_coeff / lead.norm()).powf(1.0 / degree as f64);
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / degree as f64 + 0.3))
        .collect();

    let eps = f64::EPSILON;
    let noise_factor = 4.0 * degree as f64 * eps;
    let mut done = vec![false; degree];
    let mut sweeps = 0;
    while sweeps < tol::ABERTH_MAX_SWEEPS && done.iter().any(|d| !d) {
        sweeps += 1;
        for i in 0..degree {
            if done[i] {
                continue;
            }
            let zi = z[i];
            let e = eval_scaled(coeffs, &reversed, zi);
            if e.scaled_p <= noise_factor * e.scaled_abs {
                done[i] = true;
                continue;
            }
            let ratio = if e.ratio.is_finite() {
                e.ratio
            } else {
                Complex64::new(eps.sqrt(), 0.0) * (1.0 + zi.norm())
            };
            let repulsion: Complex64 = z
                .iter()
                .enumerate()
                .filter(|&(j, &zj)| j != i && zj != zi)
                .map(|(_, &zj)| (zi - zj).inv())
                .sum();
            let mut w = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !w.is_finite() {
                w = ratio;
            }
            let next = zi - w;
            if !next.is_finite() {
                continue;
            }
            z[i] = next;
            if w.norm() <= 4.0 * eps * next.norm() {
                done[i] = true;
            }
        }
    }

    let unconverged: Vec<usize> = (0..degree)
        .filter(|&i| {
            let e = eval_scaled(coeffs, &reversed, z[i]);
            !(e.scaled_p <= tol::DEFAULT.root_residual * max_coeff * e.scaled_growth)
        })
        .collect();
    if !unconverged.is_empty() {
        return Err(Error::RootsUnconverged {
            iterations: sweeps,
            unconverged,
        });
    }
    Ok(z)
}

/// Moore–Penrose inverse of a symmetric PSD matrix.
///
/// Eigenvalues at or below `rank_tol·λ_max` are treated as zero.
pub fn pseudo_inverse_psd(s: &DenseMatrix, rank_tol: f64) -> Result<DenseMatrix> {
    let eig = sym_eigen(s)?;
    let top = eig.max().abs().max(eig.min().abs());
    if eig.min() < -tol::DEFAULT.psd_negative * top.max(f64::MIN_POSITIVE) {
        return Err(Error::NotPsd {
            eigenvalue: eig.min(),
        });
    }
    let cut = rank_tol * eig.max().max(0.0);
    let inv = eig
        .eigenvalues
        .map(|l| if l > cut && l > 0.0 { 1.0 / l } else { 0.0 });
    let v = &eig.eigenvectors;
    let out = v * DMatrix::from_diagonal(&inv) * v.transpose();
    Ok((&out + out.transpose()) * 0.5)
}

/// `Σ_{j=1..n} cos(z + jφ)` in closed form
/// `sin(nφ/2)·cos(z + (n+1)φ/2) / sin(φ/2)`.
///
/// Falls back to the direct sum where `sin(φ/2)` vanishes.
pub fn cos_sum_closed(z: f64, phi: f64, n: usize) -> f64 {
    let half = (phi / 2.0).sin();
    if half.abs() < tol::DEFAULT.cos_sum_singular {
        return cos_sum_direct(z, phi, n);
    }
    let nf = n as f64;
    (nf * phi / 2.0).sin() * (z + (nf + 1.0) * phi / 2.0).cos() / half
}

pub fn cos_sum_direct(z: f64, phi: f64, n: usize) -> f64 {
    (1..=n).map(|j| (z + j as f64 * phi).cos()).sum()
}
