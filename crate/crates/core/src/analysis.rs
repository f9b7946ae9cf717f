//! Iteration matrices, spectral-radius reports, the eigen-polynomial of the
//! constant-off-diagonal family, and rate / iteration-count formulas.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::problems::{self, QuadraticProblem};
use crate::rng;
use crate::tol;

/// Per-epoch linear maps `x ← M x` (for `b = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IterationMethod {
    /// `I − A/L`.
    Gd,
    /// `I − Γ⁻¹A`.
    Ccd,
    /// `(I − D⁻¹A/n)ⁿ`: `n` expected single-coordinate steps.
    RcdExpected,
    /// `I − E(Γ_σ⁻¹)A` over uniform permutations `σ`.
    RpcdExpected(InverseMode),
}

pub fn iteration_matrix(method: IterationMethod, p: &QuadraticProblem) -> Result<DenseMatrix> {
    let a = p.a();
    let n = p.dim();
    let id = DMatrix::identity(n, n);
    Ok(match method {
        IterationMethod::Gd => &id - a / p.lambda_max(),
        IterationMethod::Ccd => {
            let ginv = linalg::lower_triangular_inverse(&problems::lower_triangular_part(a))?;
            &id - ginv * a
        }
        IterationMethod::RcdExpected => {
            let d_inv_a = DMatrix::from_fn(n, n, |i, j| a[(i, j)] / a[(i, i)]);
            let step = &id - d_inv_a / n as f64;
            let mut m = id.clone();
            for _ in 0..n {
                m = &step * m;
            }
            m
        }
        IterationMethod::RpcdExpected(mode) => &id - expected_inverse_lower(a, mode)?.mean * a,
    })
}

/// `1 − ρ(M)` from the complex spectrum.
pub fn one_minus_rho(m: &DenseMatrix) -> Result<f64> {
    Ok(linalg::general_spectrum(m)?.one_minus_radius())
}

/// `Γ_σ` for the update order `order`: `Γ_σ[a][b] = A[a][b]` when `b` is
/// updated no later than `a`, zero otherwise.
pub fn gamma_sigma(a: &DenseMatrix, order: &[usize]) -> DenseMatrix {
    let n = a.nrows();
    let mut pos = vec![0; n];
    for (k, &i) in order.iter().enumerate() {
        pos[i] = k;
    }
    DMatrix::from_fn(n, n, |i, j| if pos[j] <= pos[i] { a[(i, j)] } else { 0.0 })
}

/// `Γ_σ⁻¹` by substitution in update order.
pub fn gamma_sigma_inverse(a: &DenseMatrix, order: &[usize]) -> Result<DenseMatrix> {
    let n = a.nrows();
    let mut inv = DMatrix::zeros(n, n);
    for col in 0..n {
        for (k, &i) in order.iter().enumerate() {
            let d = a[(i, i)];
            if d == 0.0 {
                return Err(Error::SingularTriangular { index: i });
            }
            let mut acc = if i == col { 1.0 } else { 0.0 };
            for &j in &order[..k] {
                acc -= a[(i, j)] * inv[(j, col)];
            }
            inv[(i, col)] = acc / d;
        }
    }
    Ok(inv)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InverseMode {
    /// Exact average over all `n!` orders; refused above `n = 8`.
    Enumerate,
    MonteCarlo {
        samples: usize,
        seed: u64,
    },
    /// Unit diagonal with the closed-form off-diagonal `γ(n, c)`; only
    /// meaningful for the constant-off-diagonal family.
    ClosedFormAc {
        c: f64,
    },
}

pub const ENUMERATE_MAX_N: usize = 8;

#[derive(Debug, Clone)]
pub struct ExpectedInverse {
    pub mean: DenseMatrix,
    /// Entrywise standard error, Monte-Carlo mode only.
    pub standard_error: Option<DenseMatrix>,
}

/// Off-diagonal of `E(Γ_σ⁻¹)` for the constant-off-diagonal family,
/// `(−n + (1 − ĉⁿ)/c) / (n(n−1))` with `ĉ = 1 − c`.
pub fn closed_form_gamma(n: usize, c: f64) -> f64 {
    let nf = n as f64;
    (-nf + (1.0 - (1.0 - c).powi(n as i32)) / c) / (nf * (nf - 1.0))
}

/// Visits every permutation of `0..n` (Heap's algorithm).
fn for_each_permutation<F: FnMut(&[usize]) -> Result<()>>(n: usize, mut f: F) -> Result<()> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    f(&p)?;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p)?;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(())
}

pub fn expected_inverse_lower(a: &DenseMatrix, mode: InverseMode) -> Result<ExpectedInverse> {
    let n = linalg::ensure_square(a)?;
    match mode {
        InverseMode::Enumerate => {
            if n > ENUMERATE_MAX_N {
                return Err(Error::Refused(format!(
                    "enumerating {n}! orders; use Monte-Carlo above n = {ENUMERATE_MAX_N}"
                )));
            }
            let mut sum = DMatrix::zeros(n, n);
            let mut count = 0usize;
            for_each_permutation(n, |order| {
                sum += gamma_sigma_inverse(a, order)?;
                count += 1;
                Ok(())
            })?;
            Ok(ExpectedInverse {
                mean: sum / count as f64,
                standard_error: None,
            })
        }
        InverseMode::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::Contract(
                    "Monte-Carlo needs at least 2 samples".into(),
                ));
            }
            let mut r = rng::stream(seed);
            let mut sum = DMatrix::zeros(n, n);
            let mut sum_sq = DMatrix::zeros(n, n);
            for _ in 0..samples {
                let inv = gamma_sigma_inverse(a, &rng::permutation(&mut r, n))?;
                sum_sq += inv.component_mul(&inv);
                sum += inv;
            }
            let m = samples as f64;
            let mean = &sum / m;
            let se = DMatrix::from_fn(n, n, |i, j| {
                let var = ((sum_sq[(i, j)] - m * mean[(i, j)].powi(2)) / (m - 1.0)).max(0.0);
                (var / m).sqrt()
            });
            Ok(ExpectedInverse {
                mean,
                standard_error: Some(se),
            })
        }
        InverseMode::ClosedFormAc { c } => {
            if !(c > 0.0 && c < 1.0) || n < 2 {
                return Err(Error::Domain(format!(
                    "closed form needs n >= 2 and 0 < c < 1, got n={n}, c={c}"
                )));
            }
            let g = closed_form_gamma(n, c);
            Ok(ExpectedInverse {
                mean: DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { g }),
                standard_error: None,
            })
        }
    }
}

/// Eigen-structure of cyclic CD on the constant-off-diagonal family.
///
/// The eigenvalues of `Γ⁻¹A_c` other than the trivial `1` are
/// `λ_k = 1 − q_kⁿ`, where `q_k` runs over the roots of
/// `qⁿ + (c−1)q^{n−1} − c` other than `q = 1`. Using `qⁿ(q − ĉ) = cq`,
/// `1 − λ_k = cq_k/(q_k − ĉ)`, which is what is evaluated.
#[derive(Debug, Clone)]
pub struct AcAnalysis {
    pub n: usize,
    pub c: f64,
    /// Nontrivial roots sorted by argument in `[0, 2π)`; index `k−1` is `q_k`.
    pub roots: Vec<Complex64>,
    /// `λ_k`, aligned with `roots`.
    pub eigenvalues: Vec<Complex64>,
    /// `max_k |1 − λ_k|`.
    pub rho_ccd: f64,
    /// Index into `roots` of the dominant root `q = r e^{iθ}`.
    pub dominant: usize,
    pub r: f64,
    pub theta: f64,
}

fn arg_2pi(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

impl AcAnalysis {
    pub fn new(n: usize, c: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("need n >= 2, got {n}")));
        }
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::Domain(format!("need 0 < c < 1, got {c}")));
        }
        // qⁿ + (c−1)q^{n−1} − c; its root q = 1 is dropped below.
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[0] = Complex64::new(-c, 0.0);
        coeffs[n - 1] += Complex64::new(c - 1.0, 0.0);
        coeffs[n] = Complex64::new(1.0, 0.0);
        let mut roots = linalg::aberth_roots(&coeffs)?;
        let one = Complex64::new(1.0, 0.0);
        let trivial = (0..roots.len())
            .min_by(|&i, &j| (roots[i] - one).norm().total_cmp(&(roots[j] - one).norm()))
            .expect("degree >= 2");
        roots.swap_remove(trivial);
        roots.sort_by(|a, b| arg_2pi(*a).total_cmp(&arg_2pi(*b)));

        let ch = 1.0 - c;
        let eigenvalues: Vec<Complex64> = roots
            .iter()
            .map(|&q| Complex64::new(1.0, 0.0) - c * q / (q - ch))
            .collect();
        let rho_ccd = eigenvalues
            .iter()
            .map(|l| (Complex64::new(1.0, 0.0) - l).norm())
            .fold(0.0, f64::max);

        let target = 2.0 * PI / n as f64;
        let dominant = (0..roots.len())
            .filter(|&k| roots[k].norm() <= 1.0 + 1e-9)
            .min_by(|&i, &j| {
                let di = (arg_2pi(roots[i]) - target).abs();
                let dj = (arg_2pi(roots[j]) - target).abs();
                if (di - dj).abs() <= 1e-12 {
                    roots[j].norm().total_cmp(&roots[i].norm())
                } else {
                    di.total_cmp(&dj)
                }
            })
            .ok_or_else(|| Error::Domain("no root inside the unit disc".into()))?;
        let q = roots[dominant];
        Ok(Self {
            n,
            c,
            roots,
            eigenvalues,
            rho_ccd,
            dominant,
            r: q.norm(),
            theta: arg_2pi(q),
        })
    }

    pub fn one_minus_rho(&self) -> f64 {
        1.0 - self.rho_ccd
    }

    pub fn dominant_root(&self) -> Complex64 {
        self.roots[self.dominant]
    }

    /// `|q^n(q − 1 + c) − cq|` for every root, including `q = 1`.
    pub fn residuals(&self) -> Vec<f64> {
        let n = self.n as i32;
        let c = self.c;
        self.roots
            .iter()
            .copied()
            .chain(std::iter::once(Complex64::new(1.0, 0.0)))
            .map(|q| (q.powi(n) * (q - 1.0 + c) - c * q).norm())
            .collect()
    }

    /// Full spectrum of `Γ⁻¹A_c`: the trivial `1` and every `λ_k`.
    pub fn z_spectrum(&self) -> Vec<Complex64> {
        std::iter::once(Complex64::new(1.0, 0.0))
            .chain(self.eigenvalues.iter().copied())
            .collect()
    }

    /// `x⁰_j = Re(q^j) = r^j cos(jθ)`, `j = 1..n`: the real part of the
    /// eigenvector of `Γ⁻¹A_c` at the dominant root.
    pub fn worst_init(&self) -> DVector<f64> {
        let q = self.dominant_root();
        let mut z = Complex64::new(1.0, 0.0);
        DVector::from_fn(self.n, |_, _| {
            z *= q;
            z.re
        })
    }

    /// `|sin nθ / sin θ|`.
    pub fn s(&self) -> f64 {
        let n = self.n as f64;
        let st = self.theta.sin();
        if st.abs() < 1e-300 {
            n
        } else {
            ((n * self.theta).sin() / st).abs()
        }
    }

    pub fn asymptotics(&self) -> Asymptotics {
        let n = self.n as f64;
        let c = self.c;
        let ch = 1.0 - c;
        let s = self.s();
        let q = self.dominant_root();
        let omega_c = (n - s) / (n + s);
        let alpha_c = c * ch * (q / (ch - q)).norm_sqr() + 0.5 * (n + s);
        let beta_c = (n - s) / (2.0 * alpha_c);
        let kappa = problems::ac_kappa(self.n, c);
        let j = self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let k = (i + 1) as f64;
                JValue {
                    k: i + 1,
                    limit: 1.0 / (2.0 * n * (k * PI / n).sin().powi(2)),
                    empirical: (1.0 / kappa) / (1.0 - (Complex64::new(1.0, 0.0) - l).norm()),
                }
            })
            .collect();
        Asymptotics {
            omega_c,
            alpha_c,
            beta_c,
            j,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct JValue {
    pub k: usize,
    /// `1/(2n sin²(kπ/n))`, the `c → 1` limit.
    pub limit: f64,
    /// `(1/κ)/(1 − |1 − λ_k|)` at the given `c`.
    pub empirical: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Asymptotics {
    pub omega_c: f64,
    pub alpha_c: f64,
    pub beta_c: f64,
    pub j: Vec<JValue>,
}

pub fn ac_roots(n: usize, c: f64) -> Result<AcAnalysis> {
    AcAnalysis::new(n, c)
}

pub fn worst_init(n: usize, c: f64) -> Result<DVector<f64>> {
    Ok(AcAnalysis::new(n, c)?.worst_init())
}

pub fn asymptotic_quantities(n: usize, c: f64) -> Result<Asymptotics> {
    Ok(AcAnalysis::new(n, c)?.asymptotics())
}

fn envelope(base: f64, k: usize, delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Domain(format!(
            "delta must lie in [0, 1], got {delta}"
        )));
    }
    if !(base > 0.0) {
        return Err(Error::Domain(format!(
            "envelope base {base} is not positive"
        )));
    }
    Ok((1.0 - delta) * base.powf(2.0 * k as f64 + 2.0))
}

/// `(1 − δ)(1 − 2π²/(nκ))^{2k+2}`.
pub fn thm1_envelope(n: usize, kappa: f64, k: usize, delta: f64) -> Result<f64> {
    let nk = n as f64 * kappa;
    if !(nk > 2.0 * PI * PI) {
        return Err(Error::Domain(format!("need n·κ > 2π², got {nk}")));
    }
    envelope(1.0 - 2.0 * PI * PI / nk, k, delta)
}

/// `(1 − δ)(1 − 2π²/(n²κ_CD))^{2k+2}`.
pub fn thm1_envelope_cd(n: usize, kappa_cd: f64, k: usize, delta: f64) -> Result<f64> {
    let nk = (n * n) as f64 * kappa_cd;
    if !(nk > 2.0 * PI * PI) {
        return Err(Error::Domain(format!("need n²·κ_CD > 2π², got {nk}")));
    }
    envelope(1.0 - 2.0 * PI * PI / nk, k, delta)
}

/// `(2 + ln(n)/π)²`.
fn log_factor(n: usize) -> f64 {
    (2.0 + (n as f64).ln() / PI).powi(2)
}

/// Upper bounds on the per-cycle objective ratio of cyclic CD.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateFactors {
    /// The two factors in terms of `κ`.
    pub kappa: [f64; 2],
    /// The two factors in terms of `κ_CD`.
    pub kappa_cd: [f64; 2],
}

impl RateFactors {
    pub fn all(&self) -> [f64; 4] {
        [
            self.kappa[0],
            self.kappa[1],
            self.kappa_cd[0],
            self.kappa_cd[1],
        ]
    }

    pub fn min(&self) -> f64 {
        self.all().into_iter().fold(f64::INFINITY, f64::min)
    }
}

pub fn prop1_rates(p: &QuadraticProblem) -> Result<RateFactors> {
    let m = problems::metrics(p)?;
    let n = m.n as f64;
    let lf = log_factor(m.n);
    let ratio = m.l_min / m.l_avg;
    Ok(RateFactors {
        kappa: [
            1.0 - ratio / (n * m.kappa),
            1.0 - m.l_min / (m.l * lf * m.kappa),
        ],
        kappa_cd: [
            1.0 - ratio / (n * n * m.kappa_cd),
            1.0 - m.l_min * m.l_avg / (m.l * m.l * lf * m.kappa_cd),
        ],
    })
}

/// The same bounds on the Jacobi-preconditioned matrix, where every
/// diagonal is 1 and `κ̂_CD = 1/λ_min(Â)`.
pub fn prop2_rates(p: &QuadraticProblem) -> Result<RateFactors> {
    let m = problems::metrics(p)?;
    let n = m.n as f64;
    let lf = log_factor(m.n);
    let hat_kappa_cd = 1.0 / m.hat_lambda_min;
    Ok(RateFactors {
        kappa: [
            1.0 - 1.0 / (n * m.hat_kappa),
            1.0 - 1.0 / (m.hat_l * lf * m.hat_kappa),
        ],
        kappa_cd: [
            1.0 - 1.0 / (n * n * hat_kappa_cd),
            1.0 - 1.0 / (m.hat_l * m.hat_l * lf * hat_kappa_cd),
        ],
    })
}

/// `C = ‖D^{-1/2} Γᵀ A† Γ D^{-1/2}‖`; cyclic CD contracts the objective
/// error by at least `1 − 1/C` per cycle.
pub fn contraction_certificate(p: &QuadraticProblem) -> Result<f64> {
    let a = p.a();
    let n = p.dim();
    let gamma = problems::lower_triangular_part(a);
    let pinv = linalg::pseudo_inverse_psd(a, tol::DEFAULT.rank)?;
    let core = gamma.transpose() * pinv * &gamma;
    let s: Vec<f64> = (0..n).map(|i| 1.0 / a[(i, i)].sqrt()).collect();
    let scaled = DMatrix::from_fn(n, n, |i, j| s[i] * core[(i, j)] * s[j]);
    let scaled = (&scaled + scaled.transpose()) * 0.5;
    Ok(linalg::sym_eigen(&scaled)?.max())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GammaNormBounds {
    /// `‖Γ‖`.
    pub gamma_norm: f64,
    /// `(2 + ln(n)/π)·‖A‖`.
    pub bound_log: f64,
    /// `sqrt(L·Σ L_i)`.
    pub bound_frob: f64,
}

pub fn gamma_norm_bounds(a: &DenseMatrix) -> Result<GammaNormBounds> {
    let n = linalg::ensure_square(a)?;
    let gamma_norm = linalg::spectral_norm(&problems::lower_triangular_part(a))?;
    let norm_a = linalg::spectral_norm(a)?;
    let trace: f64 = (0..n).map(|i| a[(i, i)]).sum();
    Ok(GammaNormBounds {
        gamma_norm,
        bound_log: (2.0 + (n as f64).ln() / PI) * norm_a,
        bound_frob: (norm_a * trace).sqrt(),
    })
}

/// Asymptotic (`c → 1`) lower bounds on how many times more epochs cyclic
/// CD needs than each method.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TheoryRatios {
    /// `n/(2π²)`.
    pub gd: f64,
    /// `n²/(4π²)`, objective version.
    pub rcd_objective: f64,
    /// `n²/(2π²)`, iterate version.
    pub rcd: f64,
    /// `n(n+1)/(2π²)`.
    pub rpcd: f64,
}

pub fn theory_ratios(n: usize) -> TheoryRatios {
    let n = n as f64;
    let d = 2.0 * PI * PI;
    TheoryRatios {
        gd: n / d,
        rcd_objective: n * n / (2.0 * d),
        rcd: n * n / d,
        rpcd: n * (n + 1.0) / d,
    }
}

/// Epoch counts to reach relative accuracy `ε` on the constant-off-diagonal
/// family. Lowercase `k` counts objective error, uppercase `K` squared
/// iterate error; GD and the randomized methods get upper bounds, cyclic CD
/// lower bounds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IterationCounts {
    pub k_gd: f64,
    pub k_rcd: f64,
    pub big_k_rcd: f64,
    pub big_k_rpcd: f64,
    pub k_ccd: f64,
    pub big_k_ccd: f64,
    pub ratio_ccd_gd: f64,
    pub ratio_ccd_rcd: f64,
    pub ratio_big_ccd_rcd: f64,
    pub ratio_big_ccd_rpcd: f64,
    pub theory: TheoryRatios,
}

pub fn iteration_counts(n: usize, c: f64, eps: f64) -> Result<IterationCounts> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1], got {eps}")));
    }
    let ac = AcAnalysis::new(n, c)?;
    let theory = theory_ratios(n);
    if eps == 1.0 {
        return Ok(IterationCounts {
            k_gd: 0.0,
            k_rcd: 0.0,
            big_k_rcd: 0.0,
            big_k_rpcd: 0.0,
            k_ccd: 0.0,
            big_k_ccd: 0.0,
            ratio_ccd_gd: f64::NAN,
            ratio_ccd_rcd: f64::NAN,
            ratio_big_ccd_rcd: f64::NAN,
            ratio_big_ccd_rpcd: f64::NAN,
            theory,
        });
    }
    let nf = n as f64;
    let kappa = problems::ac_kappa(n, c);
    let kappa_cd = 1.0 / (1.0 - c);
    let le = eps.ln();
    let k_gd = 0.5 * le / (1.0 - 1.0 / kappa).ln() + 1.0;
    let k_rcd = le / (nf * (1.0 - 1.0 / kappa_cd).ln()) + 1.0;
    let big_k_rcd = le / (2.0 * nf * (1.0 - 1.0 / kappa_cd).ln()) + 1.0;
    let rate_rpcd = (1.0 - c) * (1.0 - closed_form_gamma(n, c));
    let big_k_rpcd = 0.5 * le / (1.0 - rate_rpcd).ln() + 1.0;

    let asym = ac.asymptotics();
    let q = ac.dominant_root();
    let mod_1_minus_l1 = (c * q / (q - (1.0 - c))).norm();
    let denom = (1.0 / mod_1_minus_l1).ln();
    let k_ccd = (0.5 * (-le + asym.beta_c.ln()) / denom - 1.0).max(0.0);
    let big_k_ccd = (0.5 * (-le + asym.omega_c.ln()) / denom - 1.0).max(0.0);
    Ok(IterationCounts {
        k_gd,
        k_rcd,
        big_k_rcd,
        big_k_rpcd,
        k_ccd,
        big_k_ccd,
        ratio_ccd_gd: k_ccd / k_gd,
        ratio_ccd_rcd: k_ccd / k_rcd,
        ratio_big_ccd_rcd: big_k_ccd / big_k_rcd,
        ratio_big_ccd_rpcd: big_k_ccd / big_k_rpcd,
        theory,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TableMethod {
    Ccd,
    Gd,
    Rcd,
    Rpcd,
}

impl TableMethod {
    pub const ORDER: [TableMethod; 4] = [
        TableMethod::Ccd,
        TableMethod::Gd,
        TableMethod::Rcd,
        TableMethod::Rpcd,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TableMethod::Ccd => "CCD",
            TableMethod::Gd => "GD",
            TableMethod::Rcd => "RCD",
            TableMethod::Rpcd => "RPCD",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectrumRow {
    pub method: TableMethod,
    pub one_minus_rho: f64,
    pub ratio_over_ccd: f64,
}

/// `1 − ρ` of each method's (expected) epoch map on `A_c(n, c)`.
///
/// Cyclic CD comes from the eigen-polynomial; GD is `1/κ`, checked against
/// the symmetric eigensolver; R-CD is `1 − (1 − (1−c)/n)ⁿ`; RP-CD is
/// `(1 − c)(1 − γ)`.
pub fn table1_row(n: usize, c: f64) -> Result<Vec<SpectrumRow>> {
    let ccd = AcAnalysis::new(n, c)?.one_minus_rho();
    let kappa = problems::ac_kappa(n, c);
    let gd = 1.0 / kappa;
    let eig = linalg::sym_eigen(&problems::ac_matrix(n, c)?)?;
    let gd_eig = eig.min() / eig.max();
    if (gd_eig - gd).abs() > tol::DEFAULT.spectrum * gd {
        return Err(Error::NoConvergence {
            what: "GD radius cross-check",
            iterations: 0,
            residual: (gd_eig - gd).abs(),
        });
    }
    let rcd = 1.0 - (1.0 - (1.0 - c) / n as f64).powi(n as i32);
    let rpcd = (1.0 - c) * (1.0 - closed_form_gamma(n, c));
    Ok(TableMethod::ORDER
        .iter()
        .zip([ccd, gd, rcd, rpcd])
        .map(|(&method, v)| SpectrumRow {
            method,
            one_minus_rho: v,
            ratio_over_ccd: v / ccd,
        })
        .collect())
}

/// Everything the bounds report prints for one problem.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub prop1: RateFactors,
    pub prop2: RateFactors,
    pub certificate: f64,
    pub gamma: GammaNormBounds,
    /// Envelope parameters `n` and `κ`; `None` when `nκ ≤ 2π²`.
    pub envelope_base: Option<f64>,
}

pub fn bound_report(p: &QuadraticProblem) -> Result<BoundReport> {
    let m = problems::metrics(p)?;
    let nk = m.n as f64 * m.kappa;
    Ok(BoundReport {
        prop1: prop1_rates(p)?,
        prop2: prop2_rates(p)?,
        certificate: contraction_certificate(p)?,
        gamma: gamma_norm_bounds(p.a())?,
        envelope_base: (nk > 2.0 * PI * PI).then(|| 1.0 - 2.0 * PI * PI / nk),
    })
}
