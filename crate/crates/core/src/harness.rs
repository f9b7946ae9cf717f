//! Experiment drivers behind the command-line tool: each returns CSV text
//! (and any check failures) so the binary only parses flags and writes files.
//!
//! Floats are written with 17 significant digits in scientific notation;
//! row order is fixed by the inputs, never by thread scheduling.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{self, InverseMode, IterationMethod, TableMethod};
use crate::error::{Error, Result};
use crate::linalg;
use crate::problems::{self, fmt_float, EnsembleSpec, MetricsReport, QuadraticProblem};
use crate::rng;
use crate::solvers::{self, Method, SolverConfig};

pub const TABLE1_HEADER: &str = "n,c,method,one_minus_rho,ratio_over_ccd";
pub const TRAJECTORY_HEADER: &str = "epoch,method,rel_obj_err,rel_iter_err";
pub const LOWERBOUND_HEADER: &str = "epoch,observed_rel_obj_err,envelope";
pub const BOUNDS_HEADER: &str = "quantity,value";

/// Parameters that determine a command's output. The timestamp is carried
/// for the record but left out of the hash.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            params: BTreeMap::new(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).expect("serializable parameter");
        self.params.insert(key.into(), v);
        self
    }

    /// Hex SHA-256 of the canonical JSON without the timestamp.
    pub fn hash(&self) -> String {
        let hashed = RunManifest {
            timestamp: None,
            ..self.clone()
        };
        let json = serde_json::to_string(&hashed).expect("manifest serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

/// CSV text plus descriptions of any failed numerical checks.
#[derive(Debug, Clone, Default)]
pub struct CsvOutput {
    pub csv: String,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

impl CsvOutput {
    fn with_header(header: &str) -> Self {
        Self {
            csv: format!("{header}\n"),
            ..Default::default()
        }
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Standard-normal starting point drawn from its own seed stream.
pub fn initial_point(n: usize, seed: u64) -> DVector<f64> {
    let mut r = rng::stream(rng::split_seed(seed, 1));
    let mut v = vec![0.0; n];
    rng::fill_standard_normal(&mut r, &mut v);
    DVector::from_vec(v)
}

/// Seed of a randomized method's run, distinct per method.
pub fn method_seed(seed: u64, method: Method) -> u64 {
    let stream = match method {
        Method::Rcd => 2,
        Method::Rpcd => 3,
        _ => 4,
    };
    rng::split_seed(seed, stream)
}

pub fn table1(ns: &[usize], cs: &[f64]) -> CsvOutput {
    let mut cells: Vec<(usize, f64)> = ns
        .iter()
        .flat_map(|&n| cs.iter().map(move |&c| (n, c)))
        .collect();
    cells.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let rows: Vec<_> = cells
        .par_iter()
        .map(|&(n, c)| (n, c, analysis::table1_row(n, c)))
        .collect();
    let mut out = CsvOutput::with_header(TABLE1_HEADER);
    for (n, c, row) in rows {
        match row {
            Ok(row) => {
                for r in row {
                    writeln!(
                        out.csv,
                        "{n},{c},{},{},{}",
                        r.method.name(),
                        fmt_float(r.one_minus_rho),
                        fmt_float(r.ratio_over_ccd)
                    )
                    .unwrap();
                }
            }
            Err(e) => {
                for m in TableMethod::ORDER {
                    writeln!(out.csv, "{n},{c},{},NaN,NaN", m.name()).unwrap();
                }
                out.failures.push(format!("n={n} c={c}: {e}"));
            }
        }
    }
    out
}

/// Per-epoch errors of each method, one run per method from the same `x0`.
pub fn trajectory(
    p: &QuadraticProblem,
    x0: &DVector<f64>,
    methods: &[Method],
    epochs: usize,
    seed: u64,
) -> Result<CsvOutput> {
    let runs: Vec<_> = methods
        .par_iter()
        .map(|&method| {
            let cfg = SolverConfig {
                method,
                epochs,
                seed: method_seed(seed, method),
                record_iterates: false,
            };
            solvers::run(p, x0, &cfg)
        })
        .collect::<Result<_>>()?;
    let mut out = CsvOutput::with_header(TRAJECTORY_HEADER);
    for (m, t) in methods.iter().zip(&runs) {
        if t.degenerate_start {
            out.warnings
                .push(format!("{}: start is already optimal", m.name()));
        }
        let name = m.name();
        for k in 0..=epochs {
            writeln!(
                out.csv,
                "{k},{name},{},{}",
                fmt_float(t.rel_obj_err[k]),
                fmt_float(t.rel_iter_err[k])
            )
            .unwrap();
        }
    }
    Ok(out)
}

/// Cyclic CD from the worst starting point against the lower-bound
/// envelope; every epoch where the observation drops below is a failure.
pub fn lowerbound(n: usize, c: f64, delta: f64, epochs: usize) -> Result<CsvOutput> {
    let p = problems::make_ac(n, c)?;
    let kappa = problems::ac_kappa(n, c);
    analysis::thm1_envelope(n, kappa, 0, delta)?;
    let x0 = analysis::worst_init(n, c)?;
    let t = solvers::run_ccd(&p, &x0, epochs)?;
    let mut out = CsvOutput::with_header(LOWERBOUND_HEADER);
    if c < 0.9 {
        out.warnings.push(format!(
            "c = {c} is below 0.9; the envelope is only guaranteed as c approaches 1"
        ));
    }
    for (k, &obs) in t.rel_obj_err.iter().enumerate() {
        let env = analysis::thm1_envelope(n, kappa, k, delta)?;
        writeln!(out.csv, "{k},{},{}", fmt_float(obs), fmt_float(env)).unwrap();
        if obs < env {
            out.failures
                .push(format!("epoch {k}: observed {obs:e} < envelope {env:e}"));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsSummary {
    pub l: f64,
    pub kappa: f64,
    pub kappa_cd: f64,
    pub tau: f64,
    pub chi_avg: f64,
    pub chi_max: f64,
    pub singular: bool,
}

impl From<&MetricsReport> for MetricsSummary {
    fn from(m: &MetricsReport) -> Self {
        Self {
            l: m.l,
            kappa: m.kappa,
            kappa_cd: m.kappa_cd,
            tau: m.tau,
            chi_avg: m.chi_avg,
            chi_max: m.chi_max,
            singular: m.singular,
        }
    }
}

/// Metrics of the matrix the methods ran on, and of `UᵀU` before diagonal
/// normalization when that was applied.
#[derive(Debug, Clone, Serialize)]
pub struct RandbenchSidecar {
    pub spec: EnsembleSpec,
    pub metrics: MetricsSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unnormalized: Option<MetricsSummary>,
}

pub struct RandbenchOutput {
    pub csv: CsvOutput,
    pub sidecar: RandbenchSidecar,
}

/// Mean trajectories on one random instance. With `repeats ≥ 2` the
/// randomized methods are averaged over split seeds and a standard-error
/// column is added.
pub fn randbench(
    spec: &EnsembleSpec,
    methods: &[Method],
    epochs: usize,
    repeats: usize,
) -> Result<RandbenchOutput> {
    if repeats == 0 {
        return Err(Error::Contract("repeats must be at least 1".into()));
    }
    let p = problems::make_random(spec)?;
    let x0 = initial_point(spec.n, spec.seed);
    let header = if repeats >= 2 {
        format!("{TRAJECTORY_HEADER},se_rel_obj_err")
    } else {
        TRAJECTORY_HEADER.to_string()
    };
    let mut out = CsvOutput::with_header(&header);
    for &m in methods {
        let name = m.name();
        let seed = method_seed(spec.seed, m);
        if repeats >= 2 && m.is_randomized() {
            let mc = solvers::mc_mean_trajectory(m, &p, &x0, epochs, repeats, seed)?;
            for k in 0..=epochs {
                writeln!(
                    out.csv,
                    "{k},{name},{},{},{}",
                    fmt_float(mc.mean.rel_obj_err[k]),
                    fmt_float(mc.mean.rel_iter_err[k]),
                    fmt_float(mc.se_rel_obj_err[k])
                )
                .unwrap();
            }
        } else {
            let cfg = SolverConfig {
                method: m,
                epochs,
                seed,
                record_iterates: false,
            };
            let t = solvers::run(&p, &x0, &cfg)?;
            for k in 0..=epochs {
                write!(
                    out.csv,
                    "{k},{name},{},{}",
                    fmt_float(t.rel_obj_err[k]),
                    fmt_float(t.rel_iter_err[k])
                )
                .unwrap();
                if repeats >= 2 {
                    write!(out.csv, ",{}", fmt_float(0.0)).unwrap();
                }
                out.csv.push('\n');
            }
        }
    }
    let metrics = MetricsSummary::from(&problems::metrics(&p)?);
    let unnormalized = if spec.normalize_diagonal {
        let raw = problems::make_random(&EnsembleSpec {
            normalize_diagonal: false,
            ..*spec
        })?;
        Some(MetricsSummary::from(&problems::metrics(&raw)?))
    } else {
        None
    };
    Ok(RandbenchOutput {
        csv: out,
        sidecar: RandbenchSidecar {
            spec: *spec,
            metrics,
            unnormalized,
        },
    })
}

/// Rate factors, certificate, norm bounds and (for the constant
/// off-diagonal family) iteration counts, as `quantity,value` rows.
pub fn bounds(p: &QuadraticProblem, ac: Option<(usize, f64)>, eps: f64) -> Result<CsvOutput> {
    let r = analysis::bound_report(p)?;
    let m = problems::metrics(p)?;
    let mut rows: Vec<(&str, f64)> = vec![
        ("n", m.n as f64),
        ("L", m.l),
        ("lambda_min", m.lambda_min),
        ("kappa", m.kappa),
        ("kappa_cd", m.kappa_cd),
        ("tau", m.tau),
        ("hat_kappa", m.hat_kappa),
        ("hat_L", m.hat_l),
        ("prop1_kappa_1", r.prop1.kappa[0]),
        ("prop1_kappa_2", r.prop1.kappa[1]),
        ("prop1_kappacd_1", r.prop1.kappa_cd[0]),
        ("prop1_kappacd_2", r.prop1.kappa_cd[1]),
        ("prop2_kappa_1", r.prop2.kappa[0]),
        ("prop2_kappa_2", r.prop2.kappa[1]),
        ("prop2_kappacd_1", r.prop2.kappa_cd[0]),
        ("prop2_kappacd_2", r.prop2.kappa_cd[1]),
        ("certificate", r.certificate),
        ("certificate_factor", 1.0 - 1.0 / r.certificate),
        ("gamma_norm", r.gamma.gamma_norm),
        ("gamma_bound_log", r.gamma.bound_log),
        ("gamma_bound_frob", r.gamma.bound_frob),
        ("envelope_base", r.envelope_base.unwrap_or(f64::NAN)),
    ];
    let t = analysis::theory_ratios(m.n);
    rows.extend([
        ("theory_ratio_gd", t.gd),
        ("theory_ratio_rcd_objective", t.rcd_objective),
        ("theory_ratio_rcd", t.rcd),
        ("theory_ratio_rpcd", t.rpcd),
    ]);
    if let Some((n, c)) = ac {
        let k = analysis::iteration_counts(n, c, eps)?;
        rows.extend([
            ("eps", eps),
            ("k_gd", k.k_gd),
            ("k_rcd", k.k_rcd),
            ("K_rcd", k.big_k_rcd),
            ("K_rpcd", k.big_k_rpcd),
            ("k_ccd_lower", k.k_ccd),
            ("K_ccd_lower", k.big_k_ccd),
            ("ratio_k_ccd_over_k_gd", k.ratio_ccd_gd),
            ("ratio_k_ccd_over_k_rcd", k.ratio_ccd_rcd),
            ("ratio_K_ccd_over_K_rcd", k.ratio_big_ccd_rcd),
            ("ratio_K_ccd_over_K_rpcd", k.ratio_big_ccd_rpcd),
        ]);
    }
    let mut out = CsvOutput::with_header(BOUNDS_HEADER);
    for (q, v) in rows {
        writeln!(out.csv, "{q},{}", fmt_float(v)).unwrap();
    }
    let mut factors = r.prop1.all().to_vec();
    factors.extend(r.prop2.all());
    if let Some(f) = factors.iter().find(|f| !(0.0..1.0).contains(*f)) {
        out.failures.push(format!("rate factor {f} outside [0, 1)"));
    }
    if r.certificate < 1.0 - 1e-9 {
        out.failures
            .push(format!("certificate {} below 1", r.certificate));
    }
    Ok(out)
}

/// One line of the verification report.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Injectable pieces of the verification suite, so negative controls can
/// swap in a deliberately wrong formula.
#[derive(Debug, Clone, Copy)]
pub struct VerifyFixture {
    pub gamma: fn(usize, f64) -> f64,
}

impl Default for VerifyFixture {
    fn default() -> Self {
        Self {
            gamma: analysis::closed_form_gamma,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(
                s,
                "{tag} {:<44} residual {:.3e} (tol {:.1e})",
                c.name, c.residual, c.tolerance
            )
            .unwrap();
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        writeln!(s, "{} checks, {failed} failed", self.checks.len()).unwrap();
        s
    }
}

fn check(name: impl Into<String>, residual: f64, tolerance: f64) -> Check {
    Check {
        name: name.into(),
        residual,
        tolerance,
        passed: residual <= tolerance,
    }
}

fn failed(name: impl Into<String>, e: Error) -> Check {
    Check {
        name: format!("{} ({e})", name.into()),
        residual: f64::INFINITY,
        tolerance: 0.0,
        passed: false,
    }
}

/// Largest distance in a greedy nearest-neighbour matching of two multisets.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut pool = b.to_vec();
    let mut worst = 0.0_f64;
    for x in a {
        let (i, d) = pool
            .iter()
            .enumerate()
            .map(|(i, y)| (i, (y - x).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("same length");
        worst = worst.max(d);
        pool.swap_remove(i);
    }
    worst
}

fn roots_vs_qr(n: usize, c: f64) -> Result<f64> {
    let ac = analysis::ac_roots(n, c)?;
    let m = analysis::iteration_matrix(IterationMethod::Ccd, &problems::make_ac(n, c)?)?;
    let z: Vec<Complex64> = linalg::general_spectrum(&m)?
        .eigenvalues
        .iter()
        .map(|l| Complex64::new(1.0, 0.0) - l)
        .collect();
    Ok(multiset_distance(&ac.z_spectrum(), &z))
}

fn enumerate_vs_gamma(n: usize, c: f64, gamma: fn(usize, f64) -> f64) -> Result<f64> {
    let a = problems::ac_matrix(n, c)?;
    let e = analysis::expected_inverse_lower(&a, InverseMode::Enumerate)?;
    let g = gamma(n, c);
    let want = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { g });
    Ok((e.mean - want).amax())
}

/// Coordinate-by-coordinate sweeps against the epoch matrices.
fn simulation_vs_matrix(n: usize, seed: u64) -> Result<f64> {
    let spec = EnsembleSpec {
        n,
        distribution: problems::Distribution::Gaussian {
            mean: 0.0,
            variance: 1.0,
        },
        seed,
        normalize_diagonal: false,
    };
    let p = problems::make_random(&spec)?;
    let x0 = initial_point(n, seed);
    let epochs = 5;
    let scale = x0.amax();
    let mut worst = 0.0_f64;

    let m = analysis::iteration_matrix(IterationMethod::Ccd, &p)?;
    let cfg = SolverConfig {
        method: Method::Ccd,
        epochs,
        seed,
        record_iterates: true,
    };
    let its = solvers::run(&p, &x0, &cfg)?.iterates.expect("recorded");
    for k in 1..=epochs {
        worst = worst.max((&its[k] - &m * &its[k - 1]).amax() / scale);
    }

    let cfg = SolverConfig {
        method: Method::Rpcd,
        epochs,
        seed,
        record_iterates: true,
    };
    let its = solvers::run(&p, &x0, &cfg)?.iterates.expect("recorded");
    let id = DMatrix::identity(n, n);
    for (k, order) in solvers::PermutationSchedule::new(seed, n)
        .take(epochs)
        .enumerate()
    {
        let m = &id - analysis::gamma_sigma_inverse(p.a(), &order)? * p.a();
        worst = worst.max((&its[k + 1] - &m * &its[k]).amax() / scale);
    }

    let m = analysis::iteration_matrix(IterationMethod::Gd, &p)?;
    let cfg = SolverConfig {
        method: Method::Gd,
        epochs,
        seed,
        record_iterates: true,
    };
    let its = solvers::run(&p, &x0, &cfg)?.iterates.expect("recorded");
    for k in 1..=epochs {
        worst = worst.max((&its[k] - &m * &its[k - 1]).amax() / scale);
    }
    Ok(worst)
}

/// Closed-form cosine sum against direct summation on random triples.
pub fn cos_sum_max_error(triples: usize, seed: u64) -> f64 {
    let mut r = rng::stream(seed);
    (0..triples)
        .map(|_| {
            let z = r.gen_range(-PI..PI);
            let phi = r.gen_range(-PI..PI);
            let n = r.gen_range(1..=64);
            (linalg::cos_sum_closed(z, phi, n) - linalg::cos_sum_direct(z, phi, n)).abs()
        })
        .fold(0.0, f64::max)
}

fn shift_invariance(n: usize, seed: u64) -> Result<f64> {
    let spec = EnsembleSpec {
        n,
        distribution: problems::Distribution::Uniform { lo: -1.0, hi: 1.0 },
        seed,
        normalize_diagonal: true,
    };
    let p = problems::make_random(&spec)?;
    let x0 = initial_point(n, seed);
    let v = initial_point(n, seed.wrapping_add(1));
    let shifted = problems::translate_problem(&p, &x0, &v)?;
    let cfg = SolverConfig {
        method: Method::Ccd,
        epochs: 10,
        seed,
        record_iterates: true,
    };
    let a = solvers::run(&shifted, &x0, &cfg)?
        .iterates
        .expect("recorded");
    let b = solvers::run(&p, &v, &cfg)?.iterates.expect("recorded");
    let d = &x0 - &v;
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y - &d).amax())
        .fold(0.0, f64::max))
}

/// Leja ordering: each next point maximizes the product of distances to
/// those already taken, which keeps partial products of `(q − qᵢ)` tame.
fn leja_order(mut pts: Vec<Complex64>) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(pts.len());
    let mut score: Vec<f64> = vec![0.0; pts.len()];
    while !pts.is_empty() {
        let i = if out.is_empty() {
            (0..pts.len())
                .max_by(|&a, &b| pts[a].norm().total_cmp(&pts[b].norm()))
                .unwrap()
        } else {
            (0..pts.len())
                .max_by(|&a, &b| score[a].total_cmp(&score[b]))
                .unwrap()
        };
        let q = pts.swap_remove(i);
        score.swap_remove(i);
        for (s, p) in score.iter_mut().zip(&pts) {
            *s += (p - q).norm().ln();
        }
        out.push(q);
    }
    out
}

fn aberth_recompose(degree: usize, seed: u64) -> Result<f64> {
    let mut r = rng::stream(seed);
    let coeffs: Vec<Complex64> = (0..=degree)
        .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
        .collect();
    let roots = leja_order(linalg::aberth_roots(&coeffs)?);
    let mut poly = vec![coeffs[degree]];
    for q in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (k, &a) in poly.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= a * q;
        }
        poly = next;
    }
    let scale = coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max);
    Ok(poly
        .iter()
        .zip(&coeffs)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale)
}

fn gd_radius(n: usize, c: f64) -> Result<f64> {
    let m = analysis::iteration_matrix(IterationMethod::Gd, &problems::make_ac(n, c)?)?;
    let e = linalg::sym_eigen(&((&m + m.transpose()) * 0.5))?;
    let rho = e.max().abs().max(e.min().abs());
    Ok(((1.0 - rho) - (1.0 - c) / (1.0 - c + c * n as f64)).abs())
}

/// Runs the oracle cross-checks and reports each residual.
pub fn verify(fixture: VerifyFixture) -> VerifyReport {
    let mut checks = Vec::new();
    let mut push = |name: String, r: Result<f64>, tol: f64| {
        checks.push(match r {
            Ok(v) => check(name, v, tol),
            Err(e) => failed(name, e),
        })
    };
    for &n in &[5, 10, 20, 50] {
        for &c in &[0.3, 0.5, 0.8, 0.99] {
            push(
                format!("roots vs QR spectrum n={n} c={c}"),
                roots_vs_qr(n, c),
                1e-8,
            );
        }
    }
    for n in 2..=6 {
        for &c in &[0.3, 0.5, 0.9] {
            push(
                format!("enumerated E(inv) vs gamma n={n} c={c}"),
                enumerate_vs_gamma(n, c, fixture.gamma),
                1e-12,
            );
        }
    }
    for (i, &n) in [4usize, 17, 60, 100].iter().enumerate() {
        push(
            format!("sweeps vs epoch matrices n={n}"),
            simulation_vs_matrix(n, 40 + i as u64),
            1e-12,
        );
    }
    push(
        "closed cosine sum, 1000 triples".into(),
        Ok(cos_sum_max_error(1000, 7)),
        1e-10,
    );
    for &n in &[5, 30] {
        push(
            format!("shift invariance of cyclic CD n={n}"),
            shift_invariance(n, 3),
            1e-10,
        );
    }
    for &d in &[5, 40, 100] {
        push(
            format!("root recomposition degree {d}"),
            aberth_recompose(d, d as u64),
            1e-8,
        );
    }
    for &(n, c) in &[(20, 0.5), (100, 0.99)] {
        push(
            format!("GD radius closed form n={n} c={c}"),
            gd_radius(n, c),
            1e-12,
        );
    }
    VerifyReport { checks }
}
