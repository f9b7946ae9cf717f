//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so every criterion reports even
//! when an earlier one fails. The process exits nonzero if any criterion
//! fails, except those listed in `KNOWN_RED`: those are reproduced faithfully,
//! still print FAIL, and are explained in the project notes.

use std::time::Instant;

use cyclecd::analysis::{self, InverseMode, IterationMethod, TableMethod};
use cyclecd::harness;
use cyclecd::linalg;
use cyclecd::problems::{self, Distribution, EnsembleSpec, QuadraticProblem};
use cyclecd::rng;
use cyclecd::solvers::{self, Method, SolverConfig};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

// Pinned tolerances.
const TABLE_REL_TOL: f64 = 0.02;
const TABLE_N20_RATIO_REL_TOL: f64 = 0.05;
const TABLE_RUNTIME_S: f64 = 60.0;
const THEORY_REL_TOL: f64 = 0.01;
const ENVELOPE_DELTA: f64 = 0.2;
const ENVELOPE_EPOCHS: usize = 200;
const ENVELOPE_C: f64 = 0.999;
const ENVELOPE_RUNTIME_S: f64 = 5.0;
const J_REL_TOL: f64 = 0.02;
const ROOTS_QR_TOL: f64 = 1e-8;
const ENUM_TOL: f64 = 1e-12;
const RECURSION_TOL: f64 = 1e-12;
const COS_TOL: f64 = 1e-10;
const BOUND_SLACK: f64 = 1e-9;
/// Cycles are scored only while the relative error is above this floor;
/// below it the computed `eᵀAe` is dominated by rounding.
const RATIO_ERR_FLOOR: f64 = 1e-10;
const LONG_RUN_EPOCHS: usize = 10_000;
const LONG_RUN_GD_CCD: (f64, f64) = (3.0, 5.5);
const LONG_RUN_RCD_GD: (f64, f64) = (55.0, 95.0);
const ENSEMBLE_EPOCHS: usize = 200;
const ENSEMBLE_SEEDS: u64 = 10;
const ENSEMBLE_MIN_PASSING: usize = 8;
const ENSEMBLE_UNIFORM_FACTOR: f64 = 10.0;
const RCD_SEEDS: usize = 2000;
const RCD_EPOCHS: usize = 20;
const RCD_SE_MULT: f64 = 4.0;

/// Criteria reproduced faithfully that do not hold; see the project notes.
const KNOWN_RED: &[&str] = &["1b", "8b"];

struct Outcome {
    id: &'static str,
    title: &'static str,
    passed: bool,
    detail: String,
}

fn rel(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

fn row_values(n: usize, c: f64) -> Vec<(TableMethod, f64, f64)> {
    analysis::table1_row(n, c)
        .unwrap()
        .into_iter()
        .map(|r| (r.method, r.one_minus_rho, r.ratio_over_ccd))
        .collect()
}

/// Reference 1 − ρ for CCD, GD, RCD, RPCD and ratios GD, RCD, RPCD over CCD.
const REFERENCE_TABLE: &[(usize, f64, [f64; 4], [f64; 3])] = &[
    (
        20,
        0.99,
        [4.98e-4, 5.05e-4, 1e-2, 1.03e-2],
        [1.01, 20.0, 20.7],
    ),
    (100, 0.5, [3.8e-3, 9.9e-3, 0.39, 0.50], [2.6, 103.0, 132.0]),
    (100, 0.8, [6.1e-4, 2.5e-3, 0.18, 0.20], [4.08, 297.0, 328.0]),
    (
        100,
        0.99,
        [2.0e-5, 1.01e-4, 0.01, 0.01],
        [5.02, 494.0, 497.0],
    ),
    (
        1000,
        0.5,
        [3.9e-5, 9.99e-4, 0.39, 0.50],
        [25.4, 9999.0, 12717.0],
    ),
    (
        1000,
        0.8,
        [6.2e-6, 2.5e-4, 0.18, 0.20],
        [40.5, 29411.0, 32480.0],
    ),
    (
        1000,
        0.99,
        [2.01e-7, 1.01e-5, 0.01, 0.01],
        [50.2, 49407.0, 49704.0],
    ),
];

fn criterion_1a() -> Outcome {
    let start = Instant::now();
    let mut worst = (0.0, String::new());
    let mut note = |got: f64, want: f64, what: String| {
        let e = rel(got, want);
        if e > worst.0 {
            worst = (e, format!("{what}: {got:.4e} vs {want:.3e}"));
        }
    };
    for &(n, c, vals, ratios) in REFERENCE_TABLE {
        let row = row_values(n, c);
        for (i, &(m, v, _)) in row.iter().enumerate() {
            note(v, vals[i], format!("n={n} c={c} {}", m.name()));
        }
        for (i, &(m, _, r)) in row.iter().skip(1).enumerate() {
            note(r, ratios[i], format!("n={n} c={c} {}/CCD", m.name()));
        }
    }
    // n = 20 rows whose absolute entries carry exponent typos: ratios only.
    for &(c, ratios) in &[(0.8, [0.85, 12.6, 14.3])] {
        for (i, &(m, _, r)) in row_values(20, c).iter().skip(1).enumerate() {
            let e = rel(r, ratios[i]);
            if e > TABLE_N20_RATIO_REL_TOL {
                worst = (
                    f64::INFINITY,
                    format!("n=20 c={c} {}/CCD: {r:.4} vs {}", m.name(), ratios[i]),
                );
            }
        }
    }
    let gd = row_values(20, 0.5)[1].2;
    if rel(gd, 0.63) > TABLE_N20_RATIO_REL_TOL {
        worst = (f64::INFINITY, format!("n=20 c=0.5 GD/CCD: {gd:.4} vs 0.63"));
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        id: "1a",
        title: "spectral-gap table: reconciling rows within 2%, n=20 ratio columns within 5%",
        passed: worst.0 <= TABLE_REL_TOL && secs < TABLE_RUNTIME_S,
        detail: format!("worst {:.2}% ({}), {secs:.1}s", 100.0 * worst.0, worst.1),
    }
}

fn criterion_1b() -> Outcome {
    let row = row_values(20, 0.5);
    let reference = [0.53, 0.68];
    let got = [row[2].2, row[3].2];
    let passed = got
        .iter()
        .zip(reference)
        .all(|(g, p)| rel(*g, p) <= TABLE_N20_RATIO_REL_TOL);
    Outcome {
        id: "1b",
        title: "spectral-gap table: n=20 c=0.5 R-CD/RP-CD ratio columns within 5%",
        passed,
        detail: format!(
            "computed {:.3} / {:.3} vs reference {} / {}",
            got[0], got[1], reference[0], reference[1]
        ),
    }
}

fn criterion_2() -> Outcome {
    let reference = [
        (20, [1.01, 20.2, 21.2]),
        (100, [5.07, 506.0, 512.0]),
        (1000, [50.7, 50600.0, 50760.0]),
    ];
    let mut worst = 0.0_f64;
    for (n, want) in reference {
        let t = analysis::theory_ratios(n);
        for (g, w) in [t.gd, t.rcd, t.rpcd].into_iter().zip(want) {
            worst = worst.max(rel(g, w));
        }
        // The same ratios come back from the count table.
        let k = analysis::iteration_counts(n, 0.9, 1e-6).unwrap().theory;
        worst = worst.max(rel(k.rpcd, want[2]));
    }
    Outcome {
        id: "2",
        title: "theory ratio row within 1%",
        passed: worst <= THEORY_REL_TOL,
        detail: format!("worst {:.3}%", 100.0 * worst),
    }
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut violations = 0;
    let mut margin = f64::INFINITY;
    for n in [10, 20, 50] {
        let p = problems::make_ac(n, ENVELOPE_C).unwrap();
        let kappa = problems::ac_kappa(n, ENVELOPE_C);
        let x0 = analysis::worst_init(n, ENVELOPE_C).unwrap();
        let t = solvers::run_ccd(&p, &x0, ENVELOPE_EPOCHS).unwrap();
        for (k, &obs) in t.rel_obj_err.iter().enumerate() {
            let env = analysis::thm1_envelope(n, kappa, k, ENVELOPE_DELTA).unwrap();
            margin = margin.min(obs / env);
            if obs < env {
                violations += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        id: "3",
        title: "lower-bound envelope, zero violations",
        passed: violations == 0 && secs < ENVELOPE_RUNTIME_S,
        detail: format!("{violations} violations, min observed/envelope {margin:.4}, {secs:.2}s"),
    }
}

fn criterion_4() -> Outcome {
    let a = analysis::asymptotic_quantities(8, 0.999).unwrap();
    let worst =
        a.j.iter()
            .map(|j| rel(j.empirical, j.limit))
            .fold(0.0, f64::max);
    Outcome {
        id: "4",
        title: "J_k empirical vs limit at n=8, c=0.999",
        passed: a.j.len() == 7 && worst <= J_REL_TOL,
        detail: format!("{} values, worst {:.3}%", a.j.len(), 100.0 * worst),
    }
}

fn random_problem(n: usize, seed: u64) -> QuadraticProblem {
    problems::make_random(&EnsembleSpec {
        n,
        distribution: Distribution::Gaussian {
            mean: 0.0,
            variance: 1.0,
        },
        seed,
        normalize_diagonal: false,
    })
    .unwrap()
}

fn criterion_5() -> Outcome {
    // (a) polynomial roots vs QR.
    let mut a = 0.0_f64;
    for n in [2, 3, 4, 5, 8, 10, 15, 20, 30, 40, 50] {
        for c in [0.3, 0.5, 0.8, 0.99] {
            let ac = analysis::ac_roots(n, c).unwrap();
            let m =
                analysis::iteration_matrix(IterationMethod::Ccd, &problems::make_ac(n, c).unwrap())
                    .unwrap();
            let z: Vec<Complex64> = linalg::general_spectrum(&m)
                .unwrap()
                .eigenvalues
                .iter()
                .map(|l| Complex64::new(1.0, 0.0) - l)
                .collect();
            a = a.max(harness::multiset_distance(&ac.z_spectrum(), &z));
        }
    }
    // (b) enumerated expected inverse vs closed form.
    let mut b = 0.0_f64;
    for n in 2..=6 {
        for c in [0.1, 0.3, 0.5, 0.8, 0.99] {
            let am = problems::ac_matrix(n, c).unwrap();
            let e = analysis::expected_inverse_lower(&am, InverseMode::Enumerate)
                .unwrap()
                .mean;
            let cf = analysis::expected_inverse_lower(&am, InverseMode::ClosedFormAc { c })
                .unwrap()
                .mean;
            b = b.max((e - cf).amax());
        }
    }
    // (c) sweeps vs epoch matrices.
    let mut cc = 0.0_f64;
    for (i, n) in [3usize, 10, 25, 60, 100].into_iter().enumerate() {
        let p = random_problem(n, 500 + i as u64);
        let x0 = harness::initial_point(n, i as u64);
        let scale = x0.amax();
        let m = analysis::iteration_matrix(IterationMethod::Ccd, &p).unwrap();
        let cfg = SolverConfig {
            method: Method::Ccd,
            epochs: 5,
            seed: 0,
            record_iterates: true,
        };
        let its = solvers::run(&p, &x0, &cfg).unwrap().iterates.unwrap();
        for k in 1..its.len() {
            cc = cc.max((&its[k] - &m * &its[k - 1]).amax() / scale);
        }
        let seed = 900 + i as u64;
        let cfg = SolverConfig {
            method: Method::Rpcd,
            epochs: 5,
            seed,
            record_iterates: true,
        };
        let its = solvers::run(&p, &x0, &cfg).unwrap().iterates.unwrap();
        let id = DMatrix::<f64>::identity(n, n);
        for (k, order) in solvers::PermutationSchedule::new(seed, n)
            .take(5)
            .enumerate()
        {
            let m = &id - analysis::gamma_sigma_inverse(p.a(), &order).unwrap() * p.a();
            cc = cc.max((&its[k + 1] - &m * &its[k]).amax() / scale);
        }
    }
    // (d) closed cosine sum.
    let d = harness::cos_sum_max_error(1000, 2024);
    Outcome {
        id: "5",
        title: "oracle equivalences (roots/QR, enumeration, recursion, cosine sum)",
        passed: a <= ROOTS_QR_TOL && b <= ENUM_TOL && cc <= RECURSION_TOL && d <= COS_TOL,
        detail: format!("(a) {a:.1e} (b) {b:.1e} (c) {cc:.1e} (d) {d:.1e}"),
    }
}

/// `UᵀU` with `U` of size `m × n`; singular when `m < n`. Each instance also
/// gets a random positive diagonal scaling so the diagonals differ.
fn corpus_instance(i: u64) -> QuadraticProblem {
    let mut r = rng::stream(rng::split_seed(77, i));
    let n = 2 + (i as usize * 7) % 59;
    let singular = i % 5 == 0;
    let m = if singular {
        (n / 2).max(1)
    } else {
        n + (i as usize % 3)
    };
    let mut u = vec![0.0; m * n];
    rng::fill_standard_normal(&mut r, &mut u);
    if i % 3 == 1 {
        u.iter_mut().for_each(|v| *v += 1.0);
    }
    let u = DMatrix::from_row_slice(m, n, &u);
    let mut s = vec![0.0; n];
    rng::fill_standard_normal(&mut r, &mut s);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        s.iter().map(|v| (0.5 * v).exp()),
    ));
    let a = &d * u.transpose() * &u * &d;
    QuadraticProblem::homogeneous((&a + a.transpose()) * 0.5).unwrap()
}

/// Largest observed per-cycle ratio of the objective error of cyclic CD,
/// over cycles whose error is still above [`RATIO_ERR_FLOOR`].
fn observed_ccd_ratio(p: &QuadraticProblem, seed: u64) -> f64 {
    let x0 = harness::initial_point(p.dim(), seed);
    let t = solvers::run_ccd(p, &x0, 30).unwrap();
    t.rel_obj_err
        .windows(2)
        .filter(|w| w[0] > RATIO_ERR_FLOOR)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max)
}

fn criterion_6() -> Outcome {
    let mut violations = Vec::new();
    let mut singular = 0;
    for i in 0..100 {
        let p = corpus_instance(i);
        if p.is_singular() {
            singular += 1;
        }
        let obs = observed_ccd_ratio(&p, i);
        let f1 = analysis::prop1_rates(&p).unwrap();
        let f2 = analysis::prop2_rates(&p).unwrap();
        let cert = 1.0 - 1.0 / analysis::contraction_certificate(&p).unwrap();
        for (name, f) in [
            ("prop1", f1.min()),
            ("prop2", f2.min()),
            ("certificate", cert),
        ] {
            if obs > f * (1.0 + BOUND_SLACK) {
                violations.push(format!("#{i} {name}: {obs:.6} > {f:.6}"));
            }
        }
        let g = analysis::gamma_norm_bounds(p.a()).unwrap();
        let tol = 1.0 + BOUND_SLACK;
        if g.gamma_norm > g.bound_log * tol || g.gamma_norm > g.bound_frob * tol {
            violations.push(format!(
                "#{i} gamma norm {:.4} vs {:.4}/{:.4}",
                g.gamma_norm, g.bound_log, g.bound_frob
            ));
        }
    }
    Outcome {
        id: "6",
        title: "bound soundness on 100 random PSD instances",
        passed: violations.is_empty() && singular >= 10,
        detail: format!(
            "{} violations, {singular} singular{}",
            violations.len(),
            violations
                .first()
                .map(|v| format!(", first {v}"))
                .unwrap_or_default()
        ),
    }
}

/// Least-squares slope of `−ln(err)` against epoch over `range`.
fn decay_rate(err: &[f64], range: impl Iterator<Item = usize>) -> f64 {
    let pts: Vec<(f64, f64)> = range.map(|k| (k as f64, -err[k].ln())).collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    num / den
}

/// Epochs where the error lies in `[1e-200, 1e-10]`, past the transient and
/// before underflow.
fn asymptotic_window(err: &[f64]) -> Vec<usize> {
    (0..err.len())
        .filter(|&k| err[k] >= 1e-200 && err[k] <= 1e-10)
        .collect()
}

fn criterion_7() -> Outcome {
    let p = problems::make_ac(100, 0.8).unwrap();
    let x0 = harness::initial_point(100, 2017);
    let run = |method| {
        let cfg = SolverConfig {
            method,
            epochs: LONG_RUN_EPOCHS,
            seed: harness::method_seed(2017, method),
            record_iterates: false,
        };
        solvers::run(&p, &x0, &cfg).unwrap().rel_obj_err
    };
    let (ccd, gd, rcd, rpcd) = (
        run(Method::Ccd),
        run(Method::Gd),
        run(Method::Rcd),
        run(Method::Rpcd),
    );
    let last = LONG_RUN_EPOCHS;
    let ordered = ccd[last] > gd[last] && gd[last] > rcd[last] && gd[last] > rpcd[last];
    let late = || LONG_RUN_EPOCHS / 2..=LONG_RUN_EPOCHS;
    let (r_ccd, r_gd) = (decay_rate(&ccd, late()), decay_rate(&gd, late()));
    let w = asymptotic_window(&rcd);
    let r_rcd = if w.len() >= 5 {
        decay_rate(&rcd, w.into_iter())
    } else {
        f64::NAN
    };
    let (gd_ccd, rcd_gd) = (r_gd / r_ccd, r_rcd / r_gd);
    let passed = ordered
        && (LONG_RUN_GD_CCD.0..=LONG_RUN_GD_CCD.1).contains(&gd_ccd)
        && (LONG_RUN_RCD_GD.0..=LONG_RUN_RCD_GD.1).contains(&rcd_gd);
    Outcome {
        id: "7",
        title: "long run on A_c(100, 0.8): ordering and asymptotic rate ratios",
        passed,
        detail: format!(
            "final CCD {:.2e} GD {:.2e} RCD {:.2e} RPCD {:.2e}; GD/CCD {gd_ccd:.2} RCD/GD {rcd_gd:.1}",
            ccd[last], gd[last], rcd[last], rpcd[last]
        ),
    }
}

/// Final objective errors of cyclic and randomized CD on one instance.
fn ensemble_pair(distribution: Distribution, seed: u64) -> (f64, f64) {
    let spec = EnsembleSpec {
        n: 100,
        distribution,
        seed,
        normalize_diagonal: true,
    };
    let p = problems::make_random(&spec).unwrap();
    let x0 = harness::initial_point(100, seed);
    let fin = |method| {
        let cfg = SolverConfig {
            method,
            epochs: ENSEMBLE_EPOCHS,
            seed: harness::method_seed(seed, method),
            record_iterates: false,
        };
        *solvers::run(&p, &x0, &cfg)
            .unwrap()
            .rel_obj_err
            .last()
            .unwrap()
    };
    (fin(Method::Ccd), fin(Method::Rcd))
}

fn criterion_8a() -> Outcome {
    let wins = (0..ENSEMBLE_SEEDS)
        .filter(|&s| {
            let (ccd, rcd) = ensemble_pair(
                Distribution::Gaussian {
                    mean: 0.0,
                    variance: 1.0,
                },
                s,
            );
            ccd <= rcd
        })
        .count();
    Outcome {
        id: "8a",
        title: "random ensemble, zero-mean Gaussian: C-CD final error <= R-CD",
        passed: wins >= ENSEMBLE_MIN_PASSING,
        detail: format!("{wins}/{ENSEMBLE_SEEDS} seeds at {ENSEMBLE_EPOCHS} epochs"),
    }
}

fn criterion_8b() -> Outcome {
    let mut ratios = Vec::new();
    let wins = (0..ENSEMBLE_SEEDS)
        .filter(|&s| {
            let (ccd, rcd) = ensemble_pair(Distribution::Uniform { lo: 0.0, hi: 1.0 }, s);
            ratios.push(ccd / rcd);
            ccd >= ENSEMBLE_UNIFORM_FACTOR * rcd
        })
        .count();
    ratios.sort_by(f64::total_cmp);
    Outcome {
        id: "8b",
        title: "random ensemble, uniform(0,1): C-CD final error >= 10x R-CD",
        passed: wins >= ENSEMBLE_MIN_PASSING,
        detail: format!(
            "{wins}/{ENSEMBLE_SEEDS} seeds at {ENSEMBLE_EPOCHS} epochs; CCD/RCD ratios {:.2e}..{:.2e}",
            ratios[0],
            ratios[ratios.len() - 1]
        ),
    }
}

fn criterion_9() -> Outcome {
    let n = 5;
    let p = problems::make_ac(n, 0.5).unwrap();
    let x0 = harness::initial_point(n, 9);
    let f0 = p.suboptimality(&x0);
    let mc = solvers::mc_mean_trajectory(Method::Rcd, &p, &x0, RCD_EPOCHS, RCD_SEEDS, 9).unwrap();
    let lmin = p.lambda_min_nonzero();
    let mut worst = f64::NEG_INFINITY;
    for k in 0..=RCD_EPOCHS {
        let bound = (1.0 - lmin / n as f64).powi((k * n) as i32) * f0;
        let mean = mc.mean.rel_obj_err[k] * f0;
        let se = mc.se_rel_obj_err[k] * f0;
        worst = worst.max((mean - bound - RCD_SE_MULT * se) / f0);
    }
    Outcome {
        id: "9",
        title: "R-CD expected objective under the rate bound (2000 seeds)",
        passed: worst <= 0.0,
        detail: format!("max (mean - bound - 4 SE)/f(x0) = {worst:.3e}"),
    }
}

fn main() {
    let criteria: [fn() -> Outcome; 11] = [
        criterion_1a,
        criterion_1b,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8a,
        criterion_8b,
        criterion_9,
    ];
    let mut unexpected = Vec::new();
    for f in criteria {
        let o = f();
        let known = KNOWN_RED.contains(&o.id);
        let tag = match (o.passed, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known, documented)",
            (false, false) => "FAIL",
        };
        println!("criterion {:<3} {tag}: {} | {}", o.id, o.title, o.detail);
        if !o.passed && !known {
            unexpected.push(o.id);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
