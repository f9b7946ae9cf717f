//! Epoch-structured GD, cyclic / randomized / random-permutation CD, and
//! cyclic CGD with a configurable stepsize.
//!
//! One epoch is `n` coordinate updates (or one full-gradient step for GD).
//! Errors are measured relative to the start:
//! `rel_obj_err = (f(x^k) − f*)/(f(x^0) − f*)`,
//! `rel_iter_err = ‖x^k − x*‖²/‖x^0 − x*‖²`.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::QuadraticProblem;
use crate::rng;

/// Per-coordinate stepsize of cyclic CGD on `f = xᵀAx − 2bᵀx`, whose partial
/// derivative is `∇_j f = 2(Ax − b)_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepsizeMode {
    /// `1/(2A_jj)`: exact coordinate minimization, identical to C-CD.
    PerCoordinate,
    /// `1/(2λ_max)` for every coordinate.
    Global,
    /// `α/(2A_jj)`, i.e. successive over-relaxation with factor `α`.
    Scaled(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Method {
    Gd,
    Ccd,
    Ccgd(StepsizeMode),
    Rcd,
    Rpcd,
}

impl Method {
    /// The five methods compared in the trajectory plots.
    pub const ALL: [Method; 5] = [
        Method::Ccd,
        Method::Gd,
        Method::Rcd,
        Method::Rpcd,
        Method::Ccgd(StepsizeMode::Global),
    ];

    pub fn name(&self) -> String {
        match self {
            Method::Gd => "GD".into(),
            Method::Ccd => "CCD".into(),
            Method::Ccgd(StepsizeMode::PerCoordinate) => "CCGD-coord".into(),
            Method::Ccgd(StepsizeMode::Global) => "CCGD-small".into(),
            Method::Ccgd(StepsizeMode::Scaled(a)) => format!("CCGD-scaled:{a}"),
            Method::Rcd => "RCD".into(),
            Method::Rpcd => "RPCD".into(),
        }
    }

    /// Case-insensitive inverse of [`Method::name`]; `CCGD` alone means the
    /// small global stepsize.
    pub fn parse(s: &str) -> Result<Method> {
        let t = s.trim().to_ascii_uppercase();
        let m = match t.as_str() {
            "GD" => Method::Gd,
            "CCD" | "C-CD" => Method::Ccd,
            "RCD" | "R-CD" => Method::Rcd,
            "RPCD" | "RP-CD" => Method::Rpcd,
            "CCGD" | "CCGD-SMALL" => Method::Ccgd(StepsizeMode::Global),
            "CCGD-COORD" => Method::Ccgd(StepsizeMode::PerCoordinate),
            _ => match t.strip_prefix("CCGD-SCALED:") {
                Some(a) => {
                    let a: f64 = a
                        .parse()
                        .map_err(|_| Error::Contract(format!("bad relaxation factor in {s:?}")))?;
                    Method::Ccgd(StepsizeMode::Scaled(a))
                }
                None => return Err(Error::Contract(format!("unknown method {s:?}"))),
            },
        };
        Ok(m)
    }

    pub fn is_randomized(&self) -> bool {
        matches!(self, Method::Rcd | Method::Rpcd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    pub epochs: usize,
    /// Ignored by the deterministic methods.
    pub seed: u64,
    pub record_iterates: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Length `epochs + 1`, entry 0 is the start.
    pub rel_obj_err: Vec<f64>,
    pub rel_iter_err: Vec<f64>,
    pub iterates: Option<Vec<DVector<f64>>>,
    /// `f(x^0) = f*`: objective errors are reported as zeros.
    pub degenerate_start: bool,
}

/// Records errors after every epoch.
struct Recorder<'a> {
    p: &'a QuadraticProblem,
    obj0: f64,
    iter0: f64,
    traj: Trajectory,
}

impl<'a> Recorder<'a> {
    fn new(p: &'a QuadraticProblem, x0: &DVector<f64>, epochs: usize, keep: bool) -> Self {
        let obj0 = p.suboptimality(x0);
        let iter0 = (x0 - p.x_star()).norm_squared();
        let mut rec = Recorder {
            p,
            obj0,
            iter0,
            traj: Trajectory {
                rel_obj_err: Vec::with_capacity(epochs + 1),
                rel_iter_err: Vec::with_capacity(epochs + 1),
                iterates: keep.then(|| Vec::with_capacity(epochs + 1)),
                degenerate_start: obj0 == 0.0,
            },
        };
        rec.push(x0);
        rec
    }

    fn push(&mut self, x: &DVector<f64>) {
        let t = &mut self.traj;
        t.rel_obj_err.push(if self.obj0 > 0.0 {
            self.p.suboptimality(x) / self.obj0
        } else {
            0.0
        });
        t.rel_iter_err.push(if self.iter0 > 0.0 {
            (x - self.p.x_star()).norm_squared() / self.iter0
        } else {
            0.0
        });
        if let Some(it) = t.iterates.as_mut() {
            it.push(x.clone());
        }
    }
}

fn check_start(p: &QuadraticProblem, x0: &DVector<f64>) -> Result<()> {
    if x0.len() != p.dim() {
        return Err(Error::Dimension {
            expected: p.dim(),
            found: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract(
            "initial point has non-finite entries".into(),
        ));
    }
    Ok(())
}

/// `(A x − b)_t`, reading column `t` of the symmetric `A` (contiguous storage).
#[inline]
fn residual(p: &QuadraticProblem, x: &DVector<f64>, t: usize) -> f64 {
    p.a().column(t).dot(x) - p.b()[t]
}

/// Exact minimization along coordinate `t`.
#[inline]
pub fn coordinate_step(p: &QuadraticProblem, x: &mut DVector<f64>, t: usize) {
    let d = residual(p, x, t) / p.a()[(t, t)];
    x[t] -= d;
}

/// One sweep of exact coordinate minimization in the given order.
pub fn sweep_in_order(p: &QuadraticProblem, x: &mut DVector<f64>, order: &[usize]) {
    for &t in order {
        coordinate_step(p, x, t);
    }
}

fn run_with<F>(
    p: &QuadraticProblem,
    x0: &DVector<f64>,
    epochs: usize,
    keep: bool,
    mut epoch: F,
) -> Result<Trajectory>
where
    F: FnMut(&mut DVector<f64>),
{
    check_start(p, x0)?;
    if epochs == 0 {
        return Err(Error::Contract("epochs must be at least 1".into()));
    }
    let mut rec = Recorder::new(p, x0, epochs, keep);
    let mut x = x0.clone();
    for _ in 0..epochs {
        epoch(&mut x);
        rec.push(&x);
    }
    Ok(rec.traj)
}

/// Gradient descent `x ← x − (Ax − b)/L`.
pub fn run_gd(p: &QuadraticProblem, x0: &DVector<f64>, epochs: usize) -> Result<Trajectory> {
    run_gd_inner(p, x0, epochs, false)
}

fn run_gd_inner(
    p: &QuadraticProblem,
    x0: &DVector<f64>,
    epochs: usize,
    keep: bool,
) -> Result<Trajectory> {
    let l = p.lambda_max();
    if !(l > 0.0) {
        return Err(Error::Domain("GD needs λ_max > 0".into()));
    }
    run_with(p, x0, epochs, keep, |x| {
        let g = p.a() * &*x - p.b();
        x.axpy(-1.0 / l, &g, 1.0);
    })
}

/// Cyclic CD in the natural order `0..n`.
pub fn run_ccd(p: &QuadraticProblem, x0: &DVector<f64>, epochs: usize) -> Result<Trajectory> {
    run_ccd_inner(p, x0, epochs, false)
}

fn run_ccd_inner(
    p: &QuadraticProblem,
    x0: &DVector<f64>,
    epochs: usize,
    keep: bool,
) -> Result<Trajectory> {
    let order: Vec<usize> = (0..p.dim()).collect();
    run_with(p, x0, epochs, keep, |x| sweep_in_order(p, x, &order))
}

/// Stepsize for coordinate `j` under `mode`, applied to `∇_j f = 2(Ax − b)_j`.
pub fn ccgd_step(p: &QuadraticProblem, mode: StepsizeMode, j: usize) -> f64 {
    match mode {
        StepsizeMode::PerCoordinate => 1.0 / (2.0 * p.a()[(j, j)]),
        StepsizeMode::Global => 1.0 / (2.0 * p.lambda_max()),
        StepsizeMode::Scaled(alpha) => alpha / (2.0 * p.a()[(j, j)]),
    }
}

/// Cyclic coordinate gradient descent.
pub fn run_ccgd(
    p: &QuadraticProblem,
    x0: &DVector<f64>,
    epochs: usize,
    mode: StepsizeMode,
) -> Result<Trajectory> {
    run_ccgd_inner(p, x0, epochs, mode, false)
}

fn run_ccgd_inner(
    p: &QuadraticProblem,
    x0: &DVector<f64>,
    epochs: usize,
    mode: StepsizeMode,
    keep: bool,
) -> Result<Trajectory> {
    if let StepsizeMode::Scaled(a) = mode {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!(
                "relaxation factor must be positive, got {a}"
            )));
        }
    }
    if !(p.lambda_max() > 0.0) {
        return Err(Error::Domain("CGD needs λ_max > 0".into()));
    }
    let steps: Vec<f64> = (0..p.dim()).map(|j| ccgd_step(p, mode, j)).collect();
    run_with(p, x0, epochs, keep, |x| {
        for (j, &s) in steps.iter().enumerate() {
            let g = 2.0 * residual(p, x, j);
            x[j] -= s * g;
        }
    })
}

/// Randomized CD: `n` independent uniform coordinate picks per epoch.
pub fn run_rcd(
    p: &QuadraticProblem,
    x0: &DVector<f64>,
    epochs: usize,
    seed: u64,
) -> Result<Trajectory> {
    run_rcd_inner(p, x0, epochs, seed, false)
}

fn run_rcd_inner(
    p: &QuadraticProblem,
    x0: &DVector<f64>,
    epochs: usize,
    seed: u64,
    keep: bool,
) -> Result<Trajectory> {
    let n = p.dim();
    let mut r = rng::stream(seed);
    run_with(p, x0, epochs, keep, |x| {
        for _ in 0..n {
            let t = r.gen_range(0..n);
            coordinate_step(p, x, t);
        }
    })
}

/// Permutations drawn by [`run_rpcd`] for `seed`, one per epoch.
pub struct PermutationSchedule {
    rng: ChaCha8Rng,
    n: usize,
}

impl PermutationSchedule {
    pub fn new(seed: u64, n: usize) -> Self {
        Self {
            rng: rng::stream(seed),
            n,
        }
    }
}

impl Iterator for PermutationSchedule {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        Some(rng::permutation(&mut self.rng, self.n))
    }
}

/// Random-permutation CD: a fresh uniform order every epoch.
pub fn run_rpcd(
    p: &QuadraticProblem,
    x0: &DVector<f64>,
    epochs: usize,
    seed: u64,
) -> Result<Trajectory> {
    run_rpcd_inner(p, x0, epochs, seed, false)
}

fn run_rpcd_inner(
    p: &QuadraticProblem,
    x0: &DVector<f64>,
    epochs: usize,
    seed: u64,
    keep: bool,
) -> Result<Trajectory> {
    let mut schedule = PermutationSchedule::new(seed, p.dim());
    run_with(p, x0, epochs, keep, |x| {
        let order = schedule.next().expect("infinite schedule");
        sweep_in_order(p, x, &order);
    })
}

pub fn run(p: &QuadraticProblem, x0: &DVector<f64>, cfg: &SolverConfig) -> Result<Trajectory> {
    let keep = cfg.record_iterates;
    match cfg.method {
        Method::Gd => run_gd_inner(p, x0, cfg.epochs, keep),
        Method::Ccd => run_ccd_inner(p, x0, cfg.epochs, keep),
        Method::Ccgd(mode) => run_ccgd_inner(p, x0, cfg.epochs, mode, keep),
        Method::Rcd => run_rcd_inner(p, x0, cfg.epochs, cfg.seed, keep),
        Method::Rpcd => run_rpcd_inner(p, x0, cfg.epochs, cfg.seed, keep),
    }
}

/// Monte-Carlo average over independent runs.
#[derive(Debug, Clone)]
pub struct McTrajectory {
    /// `rel_obj_err` is the mean over runs; `rel_iter_err` is
    /// `‖E(x^k) − x*‖²/‖x^0 − x*‖²` built from the mean iterate.
    pub mean: Trajectory,
    /// Standard error of the mean `rel_obj_err`.
    pub se_rel_obj_err: Vec<f64>,
    pub repeats: usize,
}

/// Seed of run `r` in a Monte-Carlo batch.
pub fn repeat_seed(seed: u64, r: usize) -> u64 {
    rng::split_seed(seed, r as u64)
}

/// Runs `repeats` copies of `method` on split seeds in parallel; the
/// reduction is done sequentially in run order, so results do not depend on
/// the thread count.
pub fn mc_mean_trajectory(
    method: Method,
    p: &QuadraticProblem,
    x0: &DVector<f64>,
    epochs: usize,
    repeats: usize,
    seed: u64,
) -> Result<McTrajectory> {
    if repeats < 2 {
        return Err(Error::Contract(format!(
            "need at least 2 repeats, got {repeats}"
        )));
    }
    let seeds: Vec<u64> = (0..repeats).map(|r| repeat_seed(seed, r)).collect();
    let mut sorted = seeds.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != repeats {
        return Err(Error::Contract("derived seeds collide".into()));
    }
    let runs: Vec<Trajectory> = seeds
        .par_iter()
        .map(|&s| {
            run(
                p,
                x0,
                &SolverConfig {
                    method,
                    epochs,
                    seed: s,
                    record_iterates: true,
                },
            )
        })
        .collect::<Result<_>>()?;

    let m = repeats as f64;
    let len = epochs + 1;
    let mut mean = vec![0.0; len];
    let mut mean_x = vec![DVector::zeros(p.dim()); len];
    for t in &runs {
        let its = t.iterates.as_ref().expect("iterates recorded");
        for k in 0..len {
            mean[k] += t.rel_obj_err[k] / m;
            mean_x[k] += &its[k] / m;
        }
    }
    let se: Vec<f64> = (0..len)
        .map(|k| {
            let var = runs
                .iter()
                .map(|t| (t.rel_obj_err[k] - mean[k]).powi(2))
                .sum::<f64>()
                / (m - 1.0);
            (var / m).sqrt()
        })
        .collect();
    let iter0 = (x0 - p.x_star()).norm_squared();
    let rel_iter: Vec<f64> = mean_x
        .iter()
        .map(|x| {
            if iter0 > 0.0 {
                (x - p.x_star()).norm_squared() / iter0
            } else {
                0.0
            }
        })
        .collect();
    Ok(McTrajectory {
        mean: Trajectory {
            rel_obj_err: mean,
            rel_iter_err: rel_iter,
            iterates: Some(mean_x),
            degenerate_start: runs[0].degenerate_start,
        },
        se_rel_obj_err: se,
        repeats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::problems::{lower_triangular_part, make_ac};
    use nalgebra::DMatrix;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_vec(xs.to_vec())
    }

    fn one_epoch(
        method: Method,
        p: &QuadraticProblem,
        x0: &DVector<f64>,
        seed: u64,
    ) -> DVector<f64> {
        let cfg = SolverConfig {
            method,
            epochs: 1,
            seed,
            record_iterates: true,
        };
        run(p, x0, &cfg).unwrap().iterates.unwrap().pop().unwrap()
    }

    #[test]
    fn gd_on_min_eigenvector() {
        let p = make_ac(6, 0.7).unwrap();
        let x0 = p.eigen().eigenvectors.column(0).into_owned();
        let kappa = p.lambda_max() / p.lambda_min_nonzero();
        let t = run_gd(&p, &x0, 30).unwrap();
        for (k, e) in t.rel_obj_err.iter().enumerate() {
            let want = (1.0 - 1.0 / kappa).powi(2 * k as i32);
            assert!((e - want).abs() <= 1e-10, "epoch {k}: {e} vs {want}");
        }
    }

    #[test]
    fn gd_matches_matrix_power() {
        let p = make_ac(5, 0.4).unwrap();
        let m = DMatrix::identity(5, 5) - p.a() / p.lambda_max();
        let x0 = v(&[1.0, -2.0, 0.5, 3.0, 0.0]);
        let t = run(
            &p,
            &x0,
            &SolverConfig {
                method: Method::Gd,
                epochs: 10,
                seed: 0,
                record_iterates: true,
            },
        )
        .unwrap();
        let mut y = x0.clone();
        for x in t.iterates.unwrap().iter().skip(1) {
            y = &m * y;
            assert!((x - &y).amax() < 1e-10);
        }
    }

    #[test]
    fn start_at_optimum_is_degenerate() {
        let p = make_ac(4, 0.5).unwrap();
        let x0 = DVector::zeros(4);
        for method in Method::ALL {
            let cfg = SolverConfig {
                method,
                epochs: 3,
                seed: 1,
                record_iterates: false,
            };
            let t = run(&p, &x0, &cfg).unwrap();
            assert!(t.degenerate_start);
            assert!(t.rel_obj_err.iter().all(|&e| e == 0.0));
            assert!(t.rel_iter_err.iter().all(|&e| e == 0.0));
        }
    }

    #[test]
    fn ccd_example_one_cycle() {
        let p = make_ac(2, 0.5).unwrap();
        let x1 = one_epoch(Method::Ccd, &p, &v(&[1.0, 0.0]), 0);
        assert!(x1.amax() < 1e-15);
    }

    #[test]
    fn ccd_matches_gauss_seidel_matrix() {
        let p = make_ac(7, 0.6).unwrap();
        let gamma = lower_triangular_part(p.a());
        let ginv = linalg::lower_triangular_inverse(&gamma).unwrap();
        let m = DMatrix::identity(7, 7) - ginv * p.a();
        let x0 = DVector::from_fn(7, |i, _| (i as f64 * 1.3).sin());
        let cfg = SolverConfig {
            method: Method::Ccd,
            epochs: 5,
            seed: 0,
            record_iterates: true,
        };
        let its = run(&p, &x0, &cfg).unwrap().iterates.unwrap();
        for k in 1..its.len() {
            assert!((&its[k] - &m * &its[k - 1]).amax() < 1e-12);
        }
    }

    #[test]
    fn ccd_per_cycle_decrease_identity() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, -1.0, 1.0, 3.0, 0.5, -1.0, 0.5, 2.0]);
        let p = QuadraticProblem::new(a, v(&[1.0, 2.0, -1.0])).unwrap();
        let mut x = v(&[3.0, -1.0, 2.0]);
        for _ in 0..5 {
            let before = p.objective(&x);
            let mut decrease = 0.0;
            for t in 0..3 {
                let d = residual(&p, &x, t) / p.a()[(t, t)];
                decrease += p.a()[(t, t)] * d * d;
                x[t] -= d;
            }
            assert!((before - p.objective(&x) - decrease).abs() < 1e-10);
        }
    }

    #[test]
    fn ccgd_modes() {
        let p = make_ac(2, 0.5).unwrap();
        let x0 = v(&[1.0, 0.0]);
        let coord = one_epoch(Method::Ccgd(StepsizeMode::PerCoordinate), &p, &x0, 0);
        assert!((&coord - one_epoch(Method::Ccd, &p, &x0, 0)).amax() < 1e-12);
        // Step 1/(2·1.5) on 2(Ax)_j: x_1 = 1 − 2/3 = 1/3, then x_2 = −(2/3)(0.5/3).
        let global = one_epoch(Method::Ccgd(StepsizeMode::Global), &p, &x0, 0);
        assert!((global - v(&[1.0 / 3.0, -1.0 / 9.0])).amax() < 1e-15);
        let sor = one_epoch(Method::Ccgd(StepsizeMode::Scaled(1.0)), &p, &x0, 0);
        assert!((sor - coord).amax() < 1e-15);
        let bad = run_ccgd(&p, &x0, 1, StepsizeMode::Scaled(-1.0));
        assert!(matches!(bad, Err(Error::Domain(_))));
    }

    #[test]
    fn rcd_single_coordinate() {
        let p = QuadraticProblem::new(DMatrix::from_element(1, 1, 2.0), v(&[3.0])).unwrap();
        for seed in 0..5 {
            let t = run_rcd(&p, &v(&[10.0]), 1, seed).unwrap();
            assert_eq!(t.rel_obj_err[1], 0.0);
        }
    }

    #[test]
    fn randomized_runs_are_deterministic() {
        let p = make_ac(6, 0.8).unwrap();
        let x0 = DVector::from_element(6, 1.0) + v(&[0.0, 1.0, 0.0, -1.0, 0.5, 0.0]);
        for m in [Method::Rcd, Method::Rpcd] {
            let cfg = SolverConfig {
                method: m,
                epochs: 20,
                seed: 99,
                record_iterates: true,
            };
            assert_eq!(run(&p, &x0, &cfg).unwrap(), run(&p, &x0, &cfg).unwrap());
            let other = SolverConfig { seed: 100, ..cfg };
            assert_ne!(run(&p, &x0, &cfg).unwrap(), run(&p, &x0, &other).unwrap());
        }
    }

    #[test]
    fn rpcd_two_orders_equally_likely() {
        let first = PermutationSchedule::new(5, 2)
            .take(1000)
            .filter(|s| s[0] == 0)
            .count();
        assert!((420..=580).contains(&first), "{first}");
    }

    #[test]
    fn rpcd_follows_its_schedule() {
        let p = make_ac(5, 0.3).unwrap();
        let x0 = v(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let cfg = SolverConfig {
            method: Method::Rpcd,
            epochs: 4,
            seed: 3,
            record_iterates: true,
        };
        let its = run(&p, &x0, &cfg).unwrap().iterates.unwrap();
        let mut x = x0.clone();
        for (k, order) in PermutationSchedule::new(3, 5).take(4).enumerate() {
            sweep_in_order(&p, &mut x, &order);
            assert_eq!(x, its[k + 1]);
        }
    }

    #[test]
    fn method_names_roundtrip() {
        for m in Method::ALL.into_iter().chain([
            Method::Ccgd(StepsizeMode::PerCoordinate),
            Method::Ccgd(StepsizeMode::Scaled(0.5)),
        ]) {
            assert_eq!(Method::parse(&m.name()).unwrap(), m);
        }
        assert!(Method::parse("newton").is_err());
    }

    #[test]
    fn mc_contracts() {
        let p = make_ac(3, 0.5).unwrap();
        let x0 = v(&[1.0, 0.0, 0.0]);
        assert!(mc_mean_trajectory(Method::Rcd, &p, &x0, 2, 1, 0).is_err());
        let det = mc_mean_trajectory(Method::Ccd, &p, &x0, 5, 4, 0).unwrap();
        assert!(det.se_rel_obj_err.iter().all(|&s| s == 0.0));
        assert_ne!(repeat_seed(7, 0), repeat_seed(7, 1));
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = make_ac(3, 0.5).unwrap();
        assert!(matches!(
            run_ccd(&p, &v(&[1.0, 2.0]), 1),
            Err(Error::Dimension { .. })
        ));
        assert!(run_ccd(&p, &v(&[1.0, f64::NAN, 0.0]), 1).is_err());
        assert!(run_ccd(&p, &v(&[1.0, 0.0, 0.0]), 0).is_err());
    }
}
