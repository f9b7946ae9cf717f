//! Quadratic problems `f(x) = xᵀAx − 2bᵀx` and their conditioning metrics.
//!
//! This objective is twice the `½xᵀAx − bᵀx` form: both share the minimizer
//! `x* = A†b`, and the gradient here is `2(Ax − b)`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, SymEigen};
use crate::rng;
use crate::tol;

/// A convex quadratic with symmetric PSD `A` and `b ∈ range(A)`.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    a: DenseMatrix,
    b: DVector<f64>,
    x_star: DVector<f64>,
    f_star: f64,
    eigen: SymEigen,
}

impl QuadraticProblem {
    /// Validates `A` (symmetric, PSD, positive diagonal) and `b ∈ range(A)`,
    /// and caches `x* = A†b`, `f* = −bᵀA†b`.
    pub fn new(a: DenseMatrix, b: DVector<f64>) -> Result<Self> {
        let n = linalg::ensure_symmetric(&a, tol::DEFAULT.symmetry)?;
        if b.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: b.len(),
            });
        }
        if let Some(i) = (0..n).find(|&i| !(a[(i, i)] > 0.0)) {
            return Err(Error::Domain(format!(
                "diagonal entry A[{i},{i}] is not positive"
            )));
        }
        let a = (&a + a.transpose()) * 0.5;
        let eigen = linalg::sym_eigen(&a)?;
        let top = eigen.max();
        if eigen.min() < -tol::DEFAULT.psd_negative * top {
            return Err(Error::NotPsd {
                eigenvalue: eigen.min(),
            });
        }
        let (x_star, f_star) = if b.iter().all(|&v| v == 0.0) {
            (DVector::zeros(n), 0.0)
        } else {
            let pinv = pseudo_inverse_from(&eigen, tol::DEFAULT.rank);
            let x = &pinv * &b;
            let resid = (&a * &x - &b).norm();
            if resid > tol::DEFAULT.optimum_residual * (1.0 + b.norm()) {
                return Err(Error::Domain(format!(
                    "b is not in the range of A (residual {resid:e})"
                )));
            }
            let f = -b.dot(&x);
            (x, f)
        };
        Ok(Self {
            a,
            b,
            x_star,
            f_star,
            eigen,
        })
    }

    /// Problem with `b = 0`, so `x* = 0` and `f* = 0`.
    pub fn homogeneous(a: DenseMatrix) -> Result<Self> {
        let n = a.nrows();
        Self::new(a, DVector::zeros(n))
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn x_star(&self) -> &DVector<f64> {
        &self.x_star
    }

    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    pub fn eigen(&self) -> &SymEigen {
        &self.eigen
    }

    /// `L = λ_max(A)`.
    pub fn lambda_max(&self) -> f64 {
        self.eigen.max()
    }

    /// Smallest eigenvalue above the rank threshold.
    pub fn lambda_min_nonzero(&self) -> f64 {
        self.eigen
            .min_nonzero(tol::DEFAULT.rank)
            .unwrap_or_else(|| self.eigen.max())
    }

    /// Numerically singular: smallest eigenvalue under the rank threshold.
    pub fn is_singular(&self) -> bool {
        self.eigen.min() <= tol::DEFAULT.rank * self.eigen.max()
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.a * x)) - 2.0 * self.b.dot(x)
    }

    /// `f(x) − f* = (x − x*)ᵀA(x − x*)`, evaluated without cancellation.
    pub fn suboptimality(&self, x: &DVector<f64>) -> f64 {
        let e = x - &self.x_star;
        e.dot(&(&self.a * &e)).max(0.0)
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (&self.a * x - &self.b) * 2.0
    }
}

fn pseudo_inverse_from(eigen: &SymEigen, rank_tol: f64) -> DenseMatrix {
    let cut = rank_tol * eigen.max().max(0.0);
    let inv = eigen
        .eigenvalues
        .map(|l| if l > cut { 1.0 / l } else { 0.0 });
    let v = &eigen.eigenvectors;
    v * DMatrix::from_diagonal(&inv) * v.transpose()
}

/// The constant-off-diagonal family: unit diagonal, every off-diagonal `c`.
pub fn ac_matrix(n: usize, c: f64) -> Result<DenseMatrix> {
    if n < 2 {
        return Err(Error::Domain(format!("A_c needs n >= 2, got {n}")));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!("A_c needs 0 < c < 1, got {c}")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { c }))
}

/// `min xᵀA_c x` with `b = 0`. Spectrum `{1−c (×n−1), 1−c+cn}`.
pub fn make_ac(n: usize, c: f64) -> Result<QuadraticProblem> {
    QuadraticProblem::homogeneous(ac_matrix(n, c)?)
}

/// `κ(A_c) = (1 − c + cn)/(1 − c)`.
pub fn ac_kappa(n: usize, c: f64) -> f64 {
    (1.0 - c + c * n as f64) / (1.0 - c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Distribution {
    Gaussian { mean: f64, variance: f64 },
    Uniform { lo: f64, hi: f64 },
    LogNormal { mu: f64, sigma: f64 },
}

impl Distribution {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Distribution::Gaussian { mean, variance } => mean.is_finite() && variance > 0.0,
            Distribution::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && hi > lo,
            Distribution::LogNormal { mu, sigma } => mu.is_finite() && sigma > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid distribution {self:?}")))
        }
    }

    fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match *self {
            Distribution::Gaussian { mean, variance } => {
                rng::fill_standard_normal(rng, out);
                let sd = variance.sqrt();
                out.iter_mut().for_each(|v| *v = mean + sd * *v);
            }
            Distribution::Uniform { lo, hi } => {
                out.iter_mut()
                    .for_each(|v| *v = lo + (hi - lo) * rng.gen::<f64>());
            }
            Distribution::LogNormal { mu, sigma } => {
                rng::fill_standard_normal(rng, out);
                out.iter_mut().for_each(|v| *v = (mu + sigma * *v).exp());
            }
        }
    }
}

/// Random `A = UᵀU` with `U` an `n × n` matrix of i.i.d. entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub distribution: Distribution,
    pub seed: u64,
    pub normalize_diagonal: bool,
}

/// Draws `U` row by row from the stream `split_seed(seed, 0)`; with
/// `normalize_diagonal` returns `D_A^{-1/2} A D_A^{-1/2}`. `b = 0`.
pub fn make_random(spec: &EnsembleSpec) -> Result<QuadraticProblem> {
    if spec.n < 2 {
        return Err(Error::Domain(format!(
            "ensemble needs n >= 2, got {}",
            spec.n
        )));
    }
    spec.distribution.validate()?;
    let n = spec.n;
    let mut rng = rng::stream(rng::split_seed(spec.seed, 0));
    let mut entries = vec![0.0; n * n];
    spec.distribution.fill(&mut rng, &mut entries);
    let u = DMatrix::from_row_slice(n, n, &entries);
    let mut a = u.transpose() * &u;
    a = (&a + a.transpose()) * 0.5;
    if spec.normalize_diagonal {
        a = jacobi_precondition(&a)?;
    }
    QuadraticProblem::homogeneous(a)
}

/// `D_A^{-1/2} A D_A^{-1/2}`, entrywise `A_ij / sqrt(A_ii A_jj)`.
pub fn jacobi_precondition(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = linalg::ensure_square(a)?;
    let d: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    if let Some(i) = d.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Domain(format!(
            "diagonal entry A[{i},{i}] is not positive"
        )));
    }
    let s: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            a[(i, j)] / (s[i] * s[j])
        }
    }))
}

/// `Γ`: entries on and below the diagonal, zero above.
pub fn lower_triangular_part(a: &DenseMatrix) -> DenseMatrix {
    DMatrix::from_fn(
        a.nrows(),
        a.ncols(),
        |i, j| if i >= j { a[(i, j)] } else { 0.0 },
    )
}

/// The problem `min (z − x0 + v − x*)ᵀA(z − x0 + v − x*)`.
///
/// Its optimum is `x* + x0 − v`; coordinate descent started at `x0` on it
/// follows the original started at `v`, shifted by `x0 − v`.
pub fn translate_problem(
    p: &QuadraticProblem,
    x0: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<QuadraticProblem> {
    let n = p.dim();
    for w in [x0, v] {
        if w.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: w.len(),
            });
        }
    }
    let x_star = p.x_star() + x0 - v;
    let b = p.a() * &x_star;
    let f_star = -b.dot(&x_star);
    Ok(QuadraticProblem {
        a: p.a.clone(),
        b,
        x_star,
        f_star,
        eigen: p.eigen.clone(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub n: usize,
    /// `λ_max(A)`.
    pub l: f64,
    /// Smallest nonzero eigenvalue.
    pub lambda_min: f64,
    pub kappa: f64,
    /// `L_avg / λ_min`.
    pub kappa_cd: f64,
    /// Diagonal entries `L_i = A_ii`.
    pub l_i: Vec<f64>,
    pub l_min: f64,
    pub l_max: f64,
    pub l_avg: f64,
    /// `L / L_min`.
    pub tau: f64,
    /// `Σ_{j≠i} |A_ij| / A_ii`.
    pub chi: Vec<f64>,
    pub chi_avg: f64,
    pub chi_max: f64,
    /// Condition number of the Jacobi-preconditioned matrix.
    pub hat_kappa: f64,
    /// `λ_max` of the Jacobi-preconditioned matrix.
    pub hat_l: f64,
    /// `λ_min` (nonzero) of the Jacobi-preconditioned matrix.
    pub hat_lambda_min: f64,
    pub singular: bool,
}

pub fn metrics(p: &QuadraticProblem) -> Result<MetricsReport> {
    let a = p.a();
    let n = p.dim();
    let l = p.lambda_max();
    let lambda_min = p.lambda_min_nonzero();
    let l_i: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let l_min = l_i.iter().copied().fold(f64::INFINITY, f64::min);
    let l_max = l_i.iter().copied().fold(0.0, f64::max);
    let l_avg = l_i.iter().sum::<f64>() / n as f64;
    let chi: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| a[(i, j)].abs())
                .sum::<f64>()
                / a[(i, i)]
        })
        .collect();
    let chi_avg = chi.iter().sum::<f64>() / n as f64;
    let chi_max = chi.iter().copied().fold(0.0, f64::max);
    let hat = linalg::sym_eigen(&jacobi_precondition(a)?)?;
    let hat_l = hat.max();
    let hat_lambda_min = hat.min_nonzero(tol::DEFAULT.rank).unwrap_or(hat_l);
    Ok(MetricsReport {
        n,
        l,
        lambda_min,
        kappa: l / lambda_min,
        kappa_cd: l_avg / lambda_min,
        l_i,
        l_min,
        l_max,
        l_avg,
        tau: l / l_min,
        chi,
        chi_avg,
        chi_max,
        hat_kappa: hat_l / hat_lambda_min,
        hat_l,
        hat_lambda_min,
        singular: p.is_singular(),
    })
}

/// Round-trippable `%.16e` rendering (17 significant digits).
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.16e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Plain-text problem format: a line with `n`, then `n` rows of `A`, then
/// one line with `b`; whitespace separated, 17 significant digits.
pub fn write_problem(p: &QuadraticProblem) -> String {
    let n = p.dim();
    let mut out = String::new();
    writeln!(out, "{n}").unwrap();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| fmt_float(p.a()[(i, j)])).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    let b: Vec<String> = p.b().iter().map(|&v| fmt_float(v)).collect();
    writeln!(out, "{}", b.join(" ")).unwrap();
    out
}

pub fn read_problem(text: &str) -> Result<QuadraticProblem> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (first, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty input".into(),
    })?;
    let n: usize = header.trim().parse().map_err(|_| Error::Parse {
        line: first + 1,
        message: format!("expected dimension, found {header:?}"),
    })?;
    if n == 0 {
        return Err(Error::Parse {
            line: first + 1,
            message: "dimension must be positive".into(),
        });
    }
    let mut row = |what: &str| -> Result<Vec<f64>> {
        let (idx, line) = lines.next().ok_or(Error::Parse {
            line: 0,
            message: format!("missing {what}"),
        })?;
        let vals = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?;
        if vals.len() != n {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected {n} values, found {}", vals.len()),
            });
        }
        Ok(vals)
    };
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        data.extend(row(&format!("matrix row {}", i + 1))?);
    }
    let b = row("b")?;
    QuadraticProblem::new(DMatrix::from_row_slice(n, n, &data), DVector::from_vec(b))
}
