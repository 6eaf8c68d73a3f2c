//! Minimal weighted L² extension: minimize `c^H G c` over the affine set of
//! coefficient vectors that restrict to `f`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::function_space::{Basis, FeasibleKind, FeasibleSet, GramOperator, HoloFunction};
use crate::linalg::hermitian_solve;

/// A constrained weighted least-squares problem for an arbitrary sampled density.
#[derive(Debug, Clone)]
pub struct L2Problem {
    pub basis: Basis,
    pub feasible: FeasibleSet,
    pub gram: GramOperator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct L2Report {
    /// `c^H G c`, the discrete `∫|F|² ω`.
    pub objective: f64,
    pub orthogonality_residual: f64,
    /// The free block was near-singular and the thresholded pseudo-solve was used.
    pub pseudo_inverse: bool,
}

impl L2Problem {
    pub fn new(basis: Basis, feasible: FeasibleSet, gram: GramOperator) -> Self {
        assert_eq!(gram.matrix.nrows(), basis.len());
        L2Problem { basis, feasible, gram }
    }
}

/// Solves by normal equations on the free block (coordinate subspaces) or by
/// nullspace parametrization (point sets).
pub fn solve_l2(prob: &L2Problem) -> Result<(HoloFunction, L2Report)> {
    let (coeffs, pseudo) = match &prob.feasible.kind {
        FeasibleKind::Coordinate { constrained, free, fixed } => {
            let g = &prob.gram.matrix;
            let mut coeffs = prob.feasible.particular.clone();
            if !free.is_empty() {
                let gff = DMatrix::from_fn(free.len(), free.len(), |i, j| g[(free[i], free[j])]);
                let rhs = DVector::from_fn(free.len(), |i, _| {
                    -constrained
                        .iter()
                        .zip(fixed)
                        .map(|(&c, v)| g[(free[i], c)] * v)
                        .sum::<Complex64>()
                });
                let sol = hermitian_solve(&gff, &rhs)
                    .ok_or_else(|| Error::DegenerateRule("free-block Gram matrix vanishes".into()))?;
                for (i, &f) in free.iter().enumerate() {
                    coeffs[f] = sol.x[i];
                }
                (coeffs, sol.pseudo_inverse)
            } else {
                (coeffs, false)
            }
        }
        FeasibleKind::Points { .. } => solve_nullspace(&prob.feasible, &prob.gram)?,
    };
    finish(prob, coeffs, pseudo)
}

/// Solves through an explicit orthonormal nullspace basis of the constraint
/// rows, whatever the submanifold kind. Independent of [`solve_l2`]'s
/// normal-equation route for coordinate subspaces.
pub fn solve_l2_nullspace(prob: &L2Problem) -> Result<(HoloFunction, L2Report)> {
    let feasible = prob.feasible.as_constraints()?;
    let (coeffs, pseudo) = solve_nullspace(&feasible, &prob.gram)?;
    finish(prob, coeffs, pseudo)
}

fn solve_nullspace(feasible: &FeasibleSet, gram: &GramOperator) -> Result<(DVector<Complex64>, bool)> {
    let z = &feasible.nullspace;
    if z.ncols() == 0 {
        return Ok((feasible.particular.clone(), false));
    }
    let gz = &gram.matrix * z;
    let reduced = z.ad_mul(&gz);
    let rhs = -(gz.ad_mul(&feasible.particular));
    let sol = hermitian_solve(&reduced, &rhs)
        .ok_or_else(|| Error::DegenerateRule("reduced Gram matrix vanishes".into()))?;
    Ok((feasible.point(&sol.x), sol.pseudo_inverse))
}

fn finish(prob: &L2Problem, coeffs: DVector<Complex64>, pseudo_inverse: bool) -> Result<(HoloFunction, L2Report)> {
    let f = HoloFunction::new(prob.basis.clone(), coeffs);
    let report = L2Report {
        objective: prob.gram.quadratic_form(&f.coeffs),
        orthogonality_residual: orthogonality_residual(&f, prob),
        pseudo_inverse,
    };
    Ok((f, report))
}

/// `max_h |<F, h>_ω| / (‖F‖_ω ‖h‖_ω)` over the nullspace basis `h`, the
/// discrete stationarity condition of the L² minimizer.
pub fn orthogonality_residual(f: &HoloFunction, prob: &L2Problem) -> f64 {
    let z = &prob.feasible.nullspace;
    let norm_f = prob.gram.quadratic_form(&f.coeffs).max(0.0).sqrt();
    if z.ncols() == 0 || norm_f == 0.0 {
        return 0.0;
    }
    let gf = &prob.gram.matrix * &f.coeffs;
    let mut worst = 0.0f64;
    for col in z.column_iter() {
        let h = col.clone_owned();
        let norm_h = prob.gram.quadratic_form(&h).max(0.0).sqrt();
        if norm_h == 0.0 {
            continue;
        }
        let inner = h.dotc(&gf);
        worst = worst.max(inner.norm() / (norm_f * norm_h));
    }
    worst
}
