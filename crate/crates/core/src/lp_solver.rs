//! Direct minimization of the smoothed p-energy
//! `J_ε(c) = Σ_q w_q (|g(z_q)|² + ε)^{p/2} e^{-φ(z_q)}` over the extensions of `f`.
//!
//! Projected gradient descent with Armijo backtracking and Barzilai–Borwein
//! steps, run in the free coordinates `c = c_0 + Z y` so every iterate is
//! feasible, with warm-started ε-continuation and multiple starts.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function_space::{energy_from_values, gram_from_design, HoloFunction};
use crate::instance::Discretization;
use crate::l2_solver::{solve_l2, L2Problem};

/// Smoothing levels of the continuation, coarse to fine.
pub const EPS_SCHEDULE: [f64; 4] = [1e-2, 1e-4, 1e-6, 1e-8];
/// The smoothing at which results are reported.
pub const FINAL_EPS: f64 = 1e-8;

/// The L^p extension problem at a fixed exponent and smoothing.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub disc: Arc<Discretization>,
    pub p: f64,
    pub eps: f64,
}

impl LpProblem {
    /// `p` in `(0, 2]`; `p = 2` is handled by the L² solver.
    pub fn new(disc: Arc<Discretization>, p: f64, eps: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 2.0) {
            return Err(Error::Config(format!("exponent p must lie in (0, 2], got {p}")));
        }
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::Config(format!("smoothing must be >= 0, got {eps}")));
        }
        Ok(LpProblem { disc, p, eps })
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        LpProblem { disc: Arc::clone(&self.disc), p: self.p, eps }
    }

    /// `w_q e^{-φ(z_q)}`.
    fn node_mass(&self) -> Vec<f64> {
        self.disc.quad.weights.iter().zip(&self.disc.base_density.values).map(|(w, d)| w * d).collect()
    }

    /// The L² problem whose density is `ω = (|F|² + ε)^{(p-2)/2} e^{-φ}`.
    pub fn reweighted_l2(&self, density: &crate::function_space::WeightField) -> Result<L2Problem> {
        let gram = gram_from_design(&self.disc.design, density, &self.disc.quad)?;
        Ok(L2Problem::new(self.disc.basis.clone(), self.disc.feasible.clone(), gram))
    }

    /// Unsmoothed energy `Σ w |F|^p e^{-φ}`.
    pub fn energy(&self, f: &HoloFunction) -> f64 {
        let vals = self.disc.values(&f.coeffs);
        energy_from_values(&vals, self.p, &self.disc.quad.weights, &self.disc.base_density.values)
    }

    /// Smoothed energy `J_ε`.
    pub fn smoothed_energy(&self, coeffs: &DVector<Complex64>) -> f64 {
        let vals = self.disc.values(coeffs);
        let mass = self.node_mass();
        smoothed(&vals, &mass, self.p, self.eps)
    }
}

fn smoothed(vals: &DVector<Complex64>, mass: &[f64], p: f64, eps: f64) -> f64 {
    vals.iter().zip(mass).map(|(v, m)| m * (v.norm_sqr() + eps).powf(0.5 * p)).sum()
}

/// `J_ε(c)` and its gradient `∂J/∂Re c + i ∂J/∂Im c`, projected onto the free subspace.
pub fn objective_and_gradient(c: &DVector<Complex64>, prob: &LpProblem) -> (f64, DVector<Complex64>) {
    let disc = &prob.disc;
    let vals = disc.values(c);
    let mass = prob.node_mass();
    let mut j = 0.0;
    let mut kernel = DVector::<Complex64>::zeros(vals.len());
    for (q, v) in vals.iter().enumerate() {
        let s = v.norm_sqr() + prob.eps;
        j += mass[q] * s.powf(0.5 * prob.p);
        kernel[q] = v * (prob.p * mass[q] * s.powf(0.5 * prob.p - 1.0));
    }
    let full = disc.design.ad_mul(&kernel);
    let z = &disc.feasible.nullspace;
    let projected = z * z.ad_mul(&full);
    (j, projected)
}

/// Convergence and continuation settings of [`solve_lp_direct`].
#[derive(Debug, Clone, PartialEq)]
pub struct DirectOptions {
    pub schedule: Vec<f64>,
    pub max_iter: usize,
    pub armijo: f64,
    pub backtrack: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Normalized stationarity residual ending an intermediate stage.
    pub stage_tol: f64,
    /// Normalized stationarity residual ending the final stage.
    pub final_tol: f64,
    /// A stage also ends when this many accepted steps leave `J_ε` unchanged
    /// to within roundoff.
    pub stall_window: usize,
}

impl Default for DirectOptions {
    fn default() -> Self {
        DirectOptions {
            schedule: EPS_SCHEDULE.to_vec(),
            max_iter: 10_000,
            armijo: 1e-4,
            backtrack: 0.5,
            min_step: 1e-8,
            max_step: 1e2,
            stage_tol: 1e-7,
            final_tol: 1e-9,
            stall_window: 50,
        }
    }
}

/// Accepted descent steps: `(ε, J_ε)` after each step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DescentTrace {
    pub rows: Vec<(f64, f64)>,
}

impl DescentTrace {
    /// True iff `J_ε` never increases between consecutive rows sharing `ε`.
    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].0 != w[1].0 || w[1].1 <= w[0].1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartOutcome {
    pub coeffs: DVector<Complex64>,
    /// `J_ε` at the final smoothing.
    pub objective: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Backtracking hit the floating-point floor before the tolerance.
    pub stalled: bool,
    pub trace: DescentTrace,
}

/// Evidence that the returned function is a (local) minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizerCertificate {
    /// `J_ε` at the final smoothing.
    pub objective: f64,
    /// Unsmoothed `m_p = Σ w |F|^p e^{-φ}`.
    pub energy: f64,
    pub variational_residual: f64,
    /// Largest pairwise coefficient distance among the starts.
    pub dispersion: f64,
    /// `p >= 1` yet the starts disagree beyond `1e-6`.
    pub convexity_flag: bool,
    pub selected_start: usize,
    pub starts: Vec<StartOutcome>,
}

/// Dispersion allowed among starts in the convex regime.
pub const CONVEX_DISPERSION: f64 = 1e-6;

/// Feasible starts: the particular solution, then Gaussian perturbations of its free part.
///
/// Start `k` draws from a ChaCha stream keyed by `(seed, k)` so any start replays alone.
pub fn random_starts(disc: &Discretization, count: usize, seed: u64, include_particular: bool) -> Vec<DVector<Complex64>> {
    let fs = &disc.feasible;
    let free_part = fs.free_coords(&fs.particular).norm();
    let scale = if free_part > 0.0 { 0.5 * free_part } else { fs.particular.norm() };
    (0..count)
        .map(|k| {
            if include_particular && k == 0 {
                return fs.particular.clone();
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let y = DVector::from_fn(fs.free_dim(), |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im) * (scale / std::f64::consts::SQRT_2)
            });
            fs.point(&y)
        })
        .collect()
}

/// Free-coordinate workspace: `g = v0 + VZ y`, with `y = L^H u` where
/// `L L^H` is the `e^{-φ}` Gram matrix of the nullspace basis, so the descent
/// runs in coordinates `u` orthonormal for the base inner product.
struct FreeModel {
    vz: DMatrix<Complex64>,
    v0: DVector<Complex64>,
    mass: Vec<f64>,
    p: f64,
    /// `y = to_free * u`
    to_free: DMatrix<Complex64>,
}

struct Eval {
    j: f64,
    grad: DVector<Complex64>,
    residual: f64,
}

impl FreeModel {
    fn new(prob: &LpProblem) -> Result<Self> {
        let disc = &prob.disc;
        let vz = &disc.design * &disc.feasible.nullspace;
        let mass = prob.node_mass();
        let k = vz.ncols();
        let mut weighted = vz.clone();
        for (q, m) in mass.iter().enumerate() {
            weighted.row_mut(q).scale_mut(*m);
        }
        let mut g0 = vz.ad_mul(&weighted);
        crate::linalg::hermitize(&mut g0);
        let to_free = if k == 0 {
            DMatrix::zeros(0, 0)
        } else {
            let chol = nalgebra::Cholesky::new(g0)
                .ok_or_else(|| Error::DegenerateRule("free-block Gram matrix is not positive definite".into()))?;
            // y = L^{-H} u
            let l = chol.l();
            l.adjoint()
                .solve_upper_triangular(&DMatrix::identity(k, k))
                .ok_or_else(|| Error::DegenerateRule("free-block Cholesky factor is singular".into()))?
        };
        Ok(FreeModel { vz: &vz * &to_free, v0: disc.values(&disc.feasible.particular), mass, p: prob.p, to_free })
    }

    fn values(&self, y: &DVector<Complex64>) -> DVector<Complex64> {
        &self.v0 + &self.vz * y
    }

    fn objective(&self, y: &DVector<Complex64>, eps: f64) -> f64 {
        smoothed(&self.values(y), &self.mass, self.p, eps)
    }

    fn eval(&self, y: &DVector<Complex64>, eps: f64) -> Eval {
        let vals = self.values(y);
        let mut j = 0.0;
        let mut kernel = DVector::<Complex64>::zeros(vals.len());
        let mut density = vec![0.0; vals.len()];
        let mut norm_f = 0.0;
        for (q, v) in vals.iter().enumerate() {
            let s = v.norm_sqr() + eps;
            let pw = s.powf(0.5 * self.p - 1.0);
            // same expression as `smoothed`, so accepted steps never raise the recorded J
            j += self.mass[q] * s.powf(0.5 * self.p);
            density[q] = self.mass[q] * pw;
            norm_f += density[q] * v.norm_sqr();
            kernel[q] = v * (self.p * density[q]);
        }
        let grad = self.vz.ad_mul(&kernel);
        let mut residual = 0.0f64;
        if norm_f > 0.0 {
            for (a, col) in self.vz.column_iter().enumerate() {
                let norm_h: f64 = col.iter().zip(&density).map(|(h, d)| d * h.norm_sqr()).sum();
                if norm_h > 0.0 {
                    residual = residual.max(grad[a].norm() / (self.p * (norm_f * norm_h).sqrt()));
                }
            }
        }
        Eval { j, grad, residual }
    }
}

fn descend(model: &FreeModel, start: DVector<Complex64>, opts: &DirectOptions) -> Result<(DVector<Complex64>, f64, f64, usize, bool, DescentTrace)> {
    let mut y = start;
    let mut trace = DescentTrace::default();
    let mut total = 0usize;
    let mut stalled = false;
    let mut last = Eval { j: 0.0, grad: DVector::zeros(0), residual: 0.0 };
    for (stage, &eps) in opts.schedule.iter().enumerate() {
        let tol = if stage + 1 == opts.schedule.len() { opts.final_tol } else { opts.stage_tol };
        let mut cur = model.eval(&y, eps);
        let mut prev: Option<(DVector<Complex64>, DVector<Complex64>)> = None;
        let mut iter = 0usize;
        stalled = false;
        let mut history = Vec::new();
        let mut flat_steps = 0usize;
        while cur.residual > tol {
            if iter == opts.max_iter {
                let keep = history.len().saturating_sub(100);
                return Err(Error::Convergence {
                    stage: format!("direct descent at eps = {eps:e}"),
                    iterations: iter,
                    residual: cur.residual,
                    trace: history.split_off(keep),
                });
            }
            if flat_steps >= opts.stall_window {
                stalled = true;
                break;
            }
            let gnorm2 = cur.grad.norm_squared();
            let mut t = match &prev {
                Some((py, pg)) => {
                    let s = &y - py;
                    let r = &cur.grad - pg;
                    let sr = s.dotc(&r).re;
                    if sr > 0.0 { s.norm_squared() / sr } else { opts.max_step }
                }
                None => 1.0 / gnorm2.sqrt().max(1.0),
            }
            .clamp(opts.min_step, opts.max_step);

            let mut accepted = None;
            while t > 1e-20 {
                let trial = &y - &cur.grad * Complex64::new(t, 0.0);
                let jt = model.objective(&trial, eps);
                if jt <= cur.j - opts.armijo * t * gnorm2 {
                    accepted = Some(trial);
                    break;
                }
                t *= opts.backtrack;
            }
            let Some(next) = accepted else {
                stalled = true;
                break;
            };
            prev = Some((y, cur.grad.clone()));
            y = next;
            let before = cur.j;
            cur = model.eval(&y, eps);
            if before - cur.j <= 1e-14 * before.abs() {
                flat_steps += 1;
            } else {
                flat_steps = 0;
            }
            trace.rows.push((eps, cur.j));
            history.push(cur.j);
            iter += 1;
        }
        total += iter;
        last = cur;
    }
    Ok((y, last.j, last.residual, total, stalled, trace))
}

fn lex_less(a: &DVector<Complex64>, b: &DVector<Complex64>) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Minimizes `J_ε` from every start and returns the best final iterate.
///
/// Starts within `1e-9` (relative) of the best objective tie; the
/// lexicographically smallest coefficient vector wins. The last smoothing in
/// `opts.schedule` should equal `prob.eps`.
pub fn solve_lp_direct(prob: &LpProblem, starts: &[DVector<Complex64>], opts: &DirectOptions) -> Result<(HoloFunction, MinimizerCertificate)> {
    if starts.is_empty() {
        return Err(Error::Config("direct solve needs at least one start".into()));
    }
    let disc = &prob.disc;
    for (k, s) in starts.iter().enumerate() {
        if s.len() != disc.basis.len() || disc.feasible.violation(s) > 1e-9 * (1.0 + s.norm()) {
            return Err(Error::Config(format!("start {k} is not a feasible coefficient vector")));
        }
    }

    if prob.p == 2.0 {
        // quadratic: the L² minimizer, independent of ε and of the start
        let l2 = prob.reweighted_l2(&disc.base_density)?;
        let (f, rep) = solve_l2(&l2)?;
        let outcome = StartOutcome {
            coeffs: f.coeffs.clone(),
            objective: prob.smoothed_energy(&f.coeffs),
            residual: rep.orthogonality_residual,
            iterations: 0,
            stalled: false,
            trace: DescentTrace::default(),
        };
        let cert = MinimizerCertificate {
            objective: outcome.objective,
            energy: rep.objective,
            variational_residual: variational_residual_p(&f, prob),
            dispersion: 0.0,
            convexity_flag: false,
            selected_start: 0,
            starts: vec![outcome],
        };
        return Ok((f, cert));
    }

    let model = FreeModel::new(prob)?;
    let from_free = model
        .to_free
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateRule("free-coordinate change is singular".into()))?;
    let outcomes: Vec<Result<StartOutcome>> = starts
        .par_iter()
        .map(|s| {
            let u0 = &from_free * disc.feasible.free_coords(s);
            let (u, objective, residual, iterations, stalled, trace) = descend(&model, u0, opts)?;
            let coeffs = disc.feasible.point(&(&model.to_free * u));
            Ok(StartOutcome { coeffs, objective, residual, iterations, stalled, trace })
        })
        .collect();
    let outcomes: Vec<StartOutcome> = outcomes.into_iter().collect::<Result<_>>()?;

    let best_j = outcomes.iter().map(|o| o.objective).fold(f64::INFINITY, f64::min);
    let tie = 1e-9 * best_j.abs().max(1.0);
    let mut selected = None::<usize>;
    for (k, o) in outcomes.iter().enumerate() {
        if o.objective - best_j > tie {
            continue;
        }
        selected = match selected {
            Some(s) if !lex_less(&o.coeffs, &outcomes[s].coeffs) => Some(s),
            _ => Some(k),
        };
    }
    let selected = selected.expect("at least one start");

    let mut dispersion = 0.0f64;
    for i in 0..outcomes.len() {
        for j in 0..i {
            dispersion = dispersion.max((&outcomes[i].coeffs - &outcomes[j].coeffs).norm());
        }
    }
    let f = disc.function(outcomes[selected].coeffs.clone());
    let cert = MinimizerCertificate {
        objective: outcomes[selected].objective,
        energy: prob.energy(&f),
        variational_residual: variational_residual_p(&f, prob),
        dispersion,
        convexity_flag: prob.p >= 1.0 && dispersion > CONVEX_DISPERSION,
        selected_start: selected,
        starts: outcomes,
    };
    Ok((f, cert))
}

/// `max_h |Σ w ω conj(F) h| / (‖F‖_ω ‖h‖_ω)` over the nullspace basis, with
/// `ω = (|F|² + ε)^{p/2-1} e^{-φ}`: the discrete first-order condition of the
/// p-energy minimizer.
pub fn variational_residual_p(f: &HoloFunction, prob: &LpProblem) -> f64 {
    let disc = &prob.disc;
    let vals = disc.values(&f.coeffs);
    let mass = prob.node_mass();
    let density: Vec<f64> = vals
        .iter()
        .zip(&mass)
        .map(|(v, m)| m * (v.norm_sqr() + prob.eps).powf(0.5 * prob.p - 1.0))
        .collect();
    let norm_f: f64 = vals.iter().zip(&density).map(|(v, d)| d * v.norm_sqr()).sum();
    if norm_f == 0.0 || disc.feasible.free_dim() == 0 {
        return 0.0;
    }
    let weighted = DVector::from_fn(vals.len(), |q, _| vals[q] * density[q]);
    let mut worst = 0.0f64;
    for col in disc.feasible.nullspace.column_iter() {
        let h = &disc.design * col;
        let norm_h: f64 = h.iter().zip(&density).map(|(h, d)| d * h.norm_sqr()).sum();
        if norm_h == 0.0 {
            continue;
        }
        let inner = weighted.dotc(&h);
        worst = worst.max(inner.norm() / (norm_f * norm_h).sqrt());
    }
    worst
}

/// A group of starts that converged to the same point.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub coeffs: DVector<Complex64>,
    pub objective: f64,
    pub energy: f64,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub clusters: Vec<Cluster>,
    pub dispersion: f64,
}

/// Coefficient distance separating clusters.
pub const CLUSTER_RADIUS: f64 = 1e-4;

/// Runs the direct solver from `trials` random starts (`0 < p < 1`) and groups
/// the limits. Records evidence about distinct local minimizers; claims nothing.
pub fn uniqueness_probe(prob: &LpProblem, trials: usize, seed: u64, opts: &DirectOptions) -> Result<ProbeReport> {
    if !(prob.p > 0.0 && prob.p < 1.0) {
        return Err(Error::Config(format!("the uniqueness probe needs 0 < p < 1, got {}", prob.p)));
    }
    if trials == 0 {
        return Err(Error::Config("the uniqueness probe needs at least one trial".into()));
    }
    let starts = random_starts(&prob.disc, trials, seed, false);
    let (_, cert) = solve_lp_direct(prob, &starts, opts)?;
    let mut clusters: Vec<Cluster> = Vec::new();
    for (k, o) in cert.starts.iter().enumerate() {
        match clusters.iter_mut().find(|c| (&c.coeffs - &o.coeffs).norm() <= CLUSTER_RADIUS) {
            Some(c) => c.members.push(k),
            None => clusters.push(Cluster {
                coeffs: o.coeffs.clone(),
                objective: o.objective,
                energy: prob.energy(&prob.disc.function(o.coeffs.clone())),
                members: vec![k],
            }),
        }
    }
    Ok(ProbeReport { clusters, dispersion: cert.dispersion })
}
