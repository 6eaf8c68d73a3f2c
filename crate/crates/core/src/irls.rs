//! Iteratively reweighted least squares for the p-energy: reweight by
//! `e^{-φ̃} = (|F|² + ε)^{(p-2)/2} e^{-φ}`, take the minimal L² extension for
//! that density, repeat. A minimizer of the p-energy is a fixed point of this map.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{HoloFunction, WeightField};
use crate::geometry::{eval_weight, QuadratureRule, WeightSpec};
use crate::l2_solver::solve_l2;
use crate::lp_solver::{LpProblem, MinimizerCertificate};

/// `(|F(z_q)|² + ε)^{(p-2)/2} e^{-φ(z_q)}`, or exactly `e^{-φ}` when `p = 2`.
pub fn reweight(f: &HoloFunction, p: f64, weight: &WeightSpec, eps: f64, quad: &QuadratureRule) -> WeightField {
    let base = eval_weight(weight, &quad.nodes);
    let vals: Vec<Complex64> = quad.nodes.iter().map(|z| f.at(z)).collect();
    WeightField { values: reweight_values(&vals, &base, p, eps) }
}

pub(crate) fn reweight_values(vals: &[Complex64], base: &[f64], p: f64, eps: f64) -> Vec<f64> {
    if p == 2.0 {
        return base.to_vec();
    }
    vals.iter().zip(base).map(|(v, b)| b * (v.norm_sqr() + eps).powf(0.5 * (p - 2.0))).collect()
}

fn density_for(prob: &LpProblem, coeffs: &DVector<Complex64>, eps: f64) -> WeightField {
    let vals = prob.disc.values(coeffs);
    WeightField { values: reweight_values(vals.as_slice(), &prob.disc.base_density.values, prob.p, eps) }
}

/// Smoothing schedule `ε_m = max(floor, initial · factor^{-m})` and stopping rule.
#[derive(Debug, Clone, PartialEq)]
pub struct IrlsSchedule {
    pub initial: f64,
    pub factor: f64,
    pub floor: f64,
    pub max_iter: usize,
    /// Stop when `‖F^{m+1} - F^m‖ <= tol (1 + ‖F^m‖)` at the floor.
    pub tol: f64,
}

impl Default for IrlsSchedule {
    fn default() -> Self {
        IrlsSchedule { initial: 1e-2, factor: 4.0, floor: 1e-8, max_iter: 200, tol: 1e-8 }
    }
}

impl IrlsSchedule {
    pub fn eps(&self, m: usize) -> f64 {
        (self.initial * self.factor.powi(-(m as i32))).max(self.floor)
    }
}

/// One reweighted solve `F^m -> F^{m+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrlsRow {
    pub iteration: usize,
    pub eps: f64,
    /// `J_ε(F^m)`.
    pub objective_before: f64,
    /// `J_ε(F^{m+1})`.
    pub objective: f64,
    pub iterate_diff: f64,
    /// L² stationarity of `F^{m+1}` for its own density.
    pub orthogonality_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrlsOutcome {
    pub solution: HoloFunction,
    pub trace: Vec<IrlsRow>,
    pub iterations: usize,
    pub iterate_diff: f64,
}

/// Default start: the minimal L² extension for `e^{-φ}`.
pub fn l2_start(prob: &LpProblem) -> Result<HoloFunction> {
    let l2 = prob.reweighted_l2(&prob.disc.base_density)?;
    Ok(solve_l2(&l2)?.0)
}

/// Iterates `F^{m+1} = argmin_{g|_S = f} Σ w |g|² (|F^m|² + ε_m)^{(p-2)/2} e^{-φ}`.
///
/// Stops once the iterates stall at the smoothing floor. When they stall
/// above the floor the schedule jumps straight to the floor. With `p = 2` a
/// single solve is performed.
pub fn irls_solve(prob: &LpProblem, start: &HoloFunction, schedule: &IrlsSchedule) -> Result<IrlsOutcome> {
    let disc = &prob.disc;
    if disc.feasible.violation(&start.coeffs) > 1e-9 * (1.0 + start.coeff_norm()) {
        return Err(Error::Config("IRLS start is not feasible".into()));
    }
    let mut current = start.coeffs.clone();
    let mut trace = Vec::new();
    let mut at_floor = false;
    for m in 0..schedule.max_iter {
        let eps = if at_floor { schedule.floor } else { schedule.eps(m) };
        let density = density_for(prob, &current, eps);
        let l2 = prob.reweighted_l2(&density)?;
        let (next, rep) = solve_l2(&l2)?;
        let diff = (&next.coeffs - &current).norm();
        let at_eps = prob.with_eps(eps);
        trace.push(IrlsRow {
            iteration: m,
            eps,
            objective_before: at_eps.smoothed_energy(&current),
            objective: at_eps.smoothed_energy(&next.coeffs),
            iterate_diff: diff,
            orthogonality_residual: rep.orthogonality_residual,
        });
        let stalled = diff <= schedule.tol * (1.0 + current.norm());
        current = next.coeffs;
        if prob.p == 2.0 || (stalled && eps <= schedule.floor) {
            return Ok(IrlsOutcome { solution: disc.function(current), iterations: m + 1, iterate_diff: diff, trace });
        }
        if stalled {
            at_floor = true;
        }
    }
    let last = trace.last().map_or(f64::NAN, |r| r.iterate_diff);
    Err(Error::Convergence {
        stage: "IRLS".into(),
        iterations: schedule.max_iter,
        residual: last,
        trace: trace.iter().map(|r| r.objective).collect(),
    })
}

/// `‖F - F_2‖ / (1 + ‖F‖)` where `F_2` is the minimal L² extension for the
/// density reweighted by `F` itself at `prob.eps`. Zero exactly at fixed points.
pub fn fixed_point_residual(f: &HoloFunction, prob: &LpProblem) -> Result<f64> {
    let density = density_for(prob, &f.coeffs, prob.eps);
    let (f2, _) = solve_l2(&prob.reweighted_l2(&density)?)?;
    Ok(f.distance(&f2) / (1.0 + f.coeff_norm()))
}

/// Largest of `|<d, h>_ω| / (‖F‖_ω ‖h‖_ω)` over `h = d` and the nullspace basis,
/// where `d = F_direct - F_irls` and `ω` is the density reweighted by `F_direct`.
pub fn difference_orthogonality(direct: &HoloFunction, irls: &HoloFunction, prob: &LpProblem) -> Result<f64> {
    let density = density_for(prob, &direct.coeffs, prob.eps);
    let l2 = prob.reweighted_l2(&density)?;
    let norm_f = l2.gram.quadratic_form(&direct.coeffs).max(0.0).sqrt();
    if norm_f == 0.0 {
        return Ok(0.0);
    }
    let d = &direct.coeffs - &irls.coeffs;
    let mut worst = l2.gram.quadratic_form(&d).abs() / (norm_f * norm_f);
    for col in prob.disc.feasible.nullspace.column_iter() {
        let h = col.clone_owned();
        let norm_h = l2.gram.quadratic_form(&h).max(0.0).sqrt();
        if norm_h > 0.0 {
            worst = worst.max(l2.gram.inner(&d, &h).norm() / (norm_f * norm_h));
        }
    }
    Ok(worst)
}

/// `|Σ w |F|² ω - Σ w |F|^p e^{-φ}| / Σ w |F|^p e^{-φ}`: the squared norm of `F`
/// under the reweighted density reproduces its p-energy.
pub fn norm_transfer(f: &HoloFunction, prob: &LpProblem) -> f64 {
    let vals = prob.disc.values(&f.coeffs);
    let density = reweight_values(vals.as_slice(), &prob.disc.base_density.values, prob.p, prob.eps);
    let w = &prob.disc.quad.weights;
    let base = &prob.disc.base_density.values;
    let two: f64 = vals.iter().zip(w).zip(&density).map(|((v, w), d)| w * d * v.norm_sqr()).sum();
    let pe: f64 = vals.iter().zip(w).zip(base).map(|((v, w), b)| w * b * v.norm().powf(prob.p)).sum();
    if pe == 0.0 {
        return 0.0;
    }
    (two - pe).abs() / pe
}

/// Slack allowed in the monotonicity of IRLS objectives.
pub const DESCENT_SLACK: f64 = 1e-12;

/// True iff `J_ε` never increases, neither within a row nor between
/// consecutive rows sharing the same `ε`.
pub fn descent_check(trace: &[IrlsRow]) -> bool {
    trace.iter().all(|r| r.objective <= r.objective_before + DESCENT_SLACK)
        && trace.windows(2).all(|w| w[0].eps != w[1].eps || w[1].objective <= w[0].objective + DESCENT_SLACK)
}

/// Numerical evidence for `F_p = F_{2, φ̃_p}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointCertificate {
    pub iterate_diff: f64,
    /// `‖F_irls - F_direct‖` against the selected direct minimizer.
    pub cross_check_distance: f64,
    /// Distance to the nearest direct start limit.
    pub nearest_start_distance: f64,
    pub difference_orthogonality: f64,
}

pub fn certify(prob: &LpProblem, outcome: &IrlsOutcome, direct: &HoloFunction, cert: &MinimizerCertificate) -> Result<FixedPointCertificate> {
    let nearest = cert
        .starts
        .iter()
        .map(|s| (&s.coeffs - &outcome.solution.coeffs).norm())
        .fold(f64::INFINITY, f64::min);
    Ok(FixedPointCertificate {
        iterate_diff: outcome.iterate_diff,
        cross_check_distance: outcome.solution.distance(direct),
        nearest_start_distance: nearest,
        difference_orthogonality: difference_orthogonality(direct, &outcome.solution, prob)?,
    })
}
