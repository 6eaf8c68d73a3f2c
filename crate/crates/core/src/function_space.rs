//! Truncated monomial model of `A^p(Ω, φ)`: bases, evaluation, restriction to
//! `S`, Gram matrices, weighted p-energies and the affine set of extensions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{eval_weight, Point, QuadratureRule, SubmanifoldSpec, WeightSpec};
use crate::linalg::{col_piv_qr, hermitize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Exponent vector of a monomial `z^a`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// All monomials of total degree `<= degree` in `n` variables, graded
/// lexicographically: by total degree, then by exponent of `z_1` descending, and so on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub n: usize,
    pub degree: u32,
    pub indices: Vec<MultiIndex>,
}

impl Basis {
    pub fn new(n: usize, degree: u32) -> Self {
        let mut indices = Vec::new();
        for d in 0..=degree {
            let mut level = Vec::new();
            compositions(n, d, &mut Vec::with_capacity(n), &mut level);
            indices.extend(level.into_iter().map(MultiIndex));
        }
        Basis { n, degree, indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position(&self, a: &[u32]) -> Option<usize> {
        self.indices.iter().position(|m| m.0 == a)
    }

    /// Monomial values at a point via per-variable power tables.
    pub fn monomials_at(&self, z: &[Complex64]) -> Vec<Complex64> {
        let d = self.degree as usize;
        let powers: Vec<Vec<Complex64>> = z
            .iter()
            .map(|&zj| {
                let mut row = Vec::with_capacity(d + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                for _ in 0..=d {
                    row.push(acc);
                    acc *= zj;
                }
                row
            })
            .collect();
        self.indices
            .iter()
            .map(|a| {
                a.0.iter()
                    .enumerate()
                    .fold(Complex64::new(1.0, 0.0), |acc, (j, &e)| acc * powers[j][e as usize])
            })
            .collect()
    }

    /// `V[q, a] = m_a(z_q)`.
    pub fn design_matrix(&self, points: &[Point]) -> DMatrix<Complex64> {
        let mut v = DMatrix::zeros(points.len(), self.len());
        for (q, z) in points.iter().enumerate() {
            for (a, m) in self.monomials_at(z).into_iter().enumerate() {
                v[(q, a)] = m;
            }
        }
        v
    }
}

// exponent vectors of length `n` summing to `d`, first coordinate descending
fn compositions(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if n == 0 {
        if d == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    if n == 1 {
        prefix.push(d);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=d).rev() {
        prefix.push(first);
        compositions(n - 1, d - first, prefix, out);
        prefix.pop();
    }
}

/// How the basis splits against `S`.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisSplit {
    /// Coordinate subspace: `constrained` monomials survive restriction,
    /// `free` monomials vanish on `S`.
    Coordinate { constrained: Vec<usize>, free: Vec<usize> },
    /// Point set: rows are point-evaluation functionals.
    Points { matrix: DMatrix<Complex64> },
}

pub fn build_basis(n: usize, degree: u32, sub: &SubmanifoldSpec) -> (Basis, BasisSplit) {
    let basis = Basis::new(n, degree);
    let split = match sub {
        SubmanifoldSpec::CoordinateSubspace { codim } => {
            let keep = n.saturating_sub(*codim);
            let (constrained, free): (Vec<usize>, Vec<usize>) =
                (0..basis.len()).partition(|&i| basis.indices[i].0[keep..].iter().all(|&e| e == 0));
            BasisSplit::Coordinate { constrained, free }
        }
        SubmanifoldSpec::PointSet { points, .. } => BasisSplit::Points { matrix: basis.design_matrix(points) },
    };
    (basis, split)
}

/// A holomorphic polynomial `g = Σ c_a z^a` on the truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HoloFunction {
    pub basis: Basis,
    pub coeffs: DVector<Complex64>,
}

impl HoloFunction {
    pub fn new(basis: Basis, coeffs: DVector<Complex64>) -> Self {
        assert_eq!(basis.len(), coeffs.len(), "coefficient vector does not match basis");
        HoloFunction { basis, coeffs }
    }

    pub fn zero(basis: Basis) -> Self {
        let n = basis.len();
        HoloFunction { basis, coeffs: DVector::zeros(n) }
    }

    /// Builds a function from `(multi-index, coefficient)` terms.
    pub fn from_terms(basis: Basis, terms: &[(&[u32], Complex64)]) -> Self {
        let mut coeffs = DVector::zeros(basis.len());
        for (a, c) in terms {
            let i = basis.position(a).expect("monomial outside the basis");
            coeffs[i] += *c;
        }
        HoloFunction { basis, coeffs }
    }

    pub fn at(&self, z: &[Complex64]) -> Complex64 {
        self.basis.monomials_at(z).iter().zip(self.coeffs.iter()).map(|(m, c)| m * c).sum()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn distance(&self, other: &HoloFunction) -> f64 {
        (&self.coeffs - &other.coeffs).norm()
    }
}

pub fn evaluate(g: &HoloFunction, points: &[Point]) -> Vec<Complex64> {
    points.iter().map(|z| g.at(z)).collect()
}

/// Restriction to `S`.
#[derive(Debug, Clone, PartialEq)]
pub enum Restriction {
    /// A polynomial in the first `n - k` variables.
    Function(HoloFunction),
    /// Values at the points of a point set.
    Values(Vec<Complex64>),
}

pub fn restrict(g: &HoloFunction, sub: &SubmanifoldSpec) -> Restriction {
    match sub {
        SubmanifoldSpec::CoordinateSubspace { codim } => {
            let keep = g.basis.n.saturating_sub(*codim);
            let target = Basis::new(keep, g.basis.degree);
            let mut coeffs = DVector::zeros(target.len());
            for (i, a) in g.basis.indices.iter().enumerate() {
                if a.0[keep..].iter().all(|&e| e == 0) {
                    let j = target.position(&a.0[..keep]).expect("restricted monomial in target basis");
                    coeffs[j] = g.coeffs[i];
                }
            }
            Restriction::Function(HoloFunction::new(target, coeffs))
        }
        SubmanifoldSpec::PointSet { points, .. } => Restriction::Values(evaluate(g, points)),
    }
}

/// A positive density sampled at quadrature nodes: `e^{-φ}` or a reweighting of it.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    pub values: Vec<f64>,
}

impl WeightField {
    pub fn from_weight(w: &WeightSpec, quad: &QuadratureRule) -> Self {
        WeightField { values: eval_weight(w, &quad.nodes) }
    }

    pub fn constant(value: f64, len: usize) -> Self {
        WeightField { values: vec![value; len] }
    }
}

/// Hermitian matrix `G_ab = Σ_q w_q ω(z_q) conj(m_a(z_q)) m_b(z_q)`, so that
/// `c^H G c = Σ_q w_q ω(z_q) |g(z_q)|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramOperator {
    pub matrix: DMatrix<Complex64>,
}

impl GramOperator {
    pub fn quadratic_form(&self, c: &DVector<Complex64>) -> f64 {
        c.dotc(&(&self.matrix * c)).re
    }

    /// `<u, v> = u^H G v`.
    pub fn inner(&self, u: &DVector<Complex64>, v: &DVector<Complex64>) -> Complex64 {
        u.dotc(&(&self.matrix * v))
    }
}

/// Gram matrix from a precomputed design matrix.
pub fn gram_from_design(
    design: &DMatrix<Complex64>,
    density: &WeightField,
    quad: &QuadratureRule,
) -> Result<GramOperator> {
    let scale: Vec<f64> = quad.weights.iter().zip(&density.values).map(|(w, d)| w * d).collect();
    let mut weighted = design.clone();
    for (q, s) in scale.iter().enumerate() {
        weighted.row_mut(q).scale_mut(*s);
    }
    let mut g = design.ad_mul(&weighted);
    hermitize(&mut g);
    if g.nrows() > 0 && density.values.iter().all(|&d| d > 0.0) && !positive_definite(&g) {
        return Err(Error::DegenerateRule(format!(
            "Gram matrix of size {} is not positive definite on {} nodes",
            g.nrows(),
            quad.len()
        )));
    }
    Ok(GramOperator { matrix: g })
}

/// Cholesky succeeds with pivots clear of roundoff.
fn positive_definite(g: &DMatrix<Complex64>) -> bool {
    match nalgebra::Cholesky::new(g.clone()) {
        Some(chol) => {
            let pivots = chol.l_dirty().diagonal().map(|d| d.norm_sqr());
            pivots.min() > 1e-13 * pivots.max()
        }
        None => false,
    }
}

/// Gram matrix of `basis` for the density `ω` under `quad`.
///
/// Positive definiteness is only enforced for strictly positive densities.
pub fn gram(basis: &Basis, density: &WeightField, quad: &QuadratureRule) -> Result<GramOperator> {
    gram_from_design(&basis.design_matrix(&quad.nodes), density, quad)
}

/// Weighted p-energy `Σ_q w_q |g(z_q)|^p ω(z_q)`; not its p-th root.
pub fn p_norm_p(g: &HoloFunction, p: f64, density: &WeightField, quad: &QuadratureRule) -> f64 {
    evaluate(g, &quad.nodes)
        .iter()
        .zip(&quad.weights)
        .zip(&density.values)
        .map(|((v, w), d)| w * d * v.norm().powf(p))
        .sum()
}

/// Same as [`p_norm_p`] on precomputed node values.
pub(crate) fn energy_from_values(values: &DVector<Complex64>, p: f64, weights: &[f64], density: &[f64]) -> f64 {
    values
        .iter()
        .zip(weights)
        .zip(density)
        .map(|((v, w), d)| w * d * v.norm().powf(p))
        .sum()
}

/// The data `f` prescribed on `S`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtensionData {
    /// Coefficients on the graded-lex basis of the first `n - k` variables.
    Coefficients(Vec<Complex64>),
    /// Values at the points of a point set (taken from the submanifold description).
    PointValues(Vec<Complex64>),
}

/// The affine set `{c = particular + Z y}` of coefficient vectors restricting to `f`.
///
/// `nullspace` has orthonormal columns spanning the admissible variations `h`
/// with `h|_S = 0`; `particular` is orthogonal to them.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    pub particular: DVector<Complex64>,
    pub nullspace: DMatrix<Complex64>,
    pub kind: FeasibleKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleKind {
    Coordinate { constrained: Vec<usize>, free: Vec<usize>, fixed: Vec<Complex64> },
    Points { matrix: DMatrix<Complex64>, values: DVector<Complex64> },
}

impl FeasibleSet {
    pub fn build(basis: &Basis, split: &BasisSplit, sub: &SubmanifoldSpec, data: &ExtensionData) -> Result<Self> {
        let size = basis.len();
        match (split, data) {
            (BasisSplit::Coordinate { constrained, free }, ExtensionData::Coefficients(f)) => {
                let keep = match sub {
                    SubmanifoldSpec::CoordinateSubspace { codim } => basis.n - codim,
                    SubmanifoldSpec::PointSet { .. } => {
                        return Err(Error::Config("coordinate split with a point set".into()))
                    }
                };
                let sbasis = Basis::new(keep, basis.degree);
                if f.len() > sbasis.len() {
                    return Err(Error::Config(format!(
                        "f has {} coefficients but the degree-{} basis on S has {}",
                        f.len(),
                        basis.degree,
                        sbasis.len()
                    )));
                }
                let mut particular = DVector::zeros(size);
                let mut fixed = Vec::with_capacity(constrained.len());
                for &i in constrained {
                    let j = sbasis.position(&basis.indices[i].0[..keep]).expect("constrained monomial on S");
                    let v = f.get(j).copied().unwrap_or(ZERO);
                    particular[i] = v;
                    fixed.push(v);
                }
                let mut nullspace = DMatrix::zeros(size, free.len());
                for (col, &i) in free.iter().enumerate() {
                    nullspace[(i, col)] = Complex64::new(1.0, 0.0);
                }
                Ok(FeasibleSet {
                    particular,
                    nullspace,
                    kind: FeasibleKind::Coordinate { constrained: constrained.clone(), free: free.clone(), fixed },
                })
            }
            (BasisSplit::Points { matrix }, ExtensionData::PointValues(values)) => {
                let values = DVector::from_vec(values.clone());
                Self::from_constraints(matrix.clone(), values)
            }
            _ => Err(Error::Config("extension data does not match the submanifold kind".into())),
        }
    }

    /// Minimal-norm particular solution and orthonormal nullspace of `A c = b`
    /// by column-pivoted Householder QR of `A^H`.
    pub fn from_constraints(matrix: DMatrix<Complex64>, values: DVector<Complex64>) -> Result<Self> {
        let (m, size) = matrix.shape();
        let qr = col_piv_qr(&matrix.adjoint());
        let rank = qr.rank;
        // A^H P = Q R  =>  P^T A = R^H Q^H; with y = Q^H c: R^H y = P^T b
        let pb: Vec<Complex64> = qr.perm.iter().map(|&i| values[i]).collect();
        let mut y = DVector::<Complex64>::zeros(size);
        for i in 0..rank {
            let mut s = pb[i];
            for j in 0..i {
                s -= qr.r[(j, i)].conj() * y[j];
            }
            y[i] = s / qr.r[(i, i)].conj();
        }
        let scale = values.iter().map(|v| v.norm()).fold(1.0, f64::max);
        for i in rank..m {
            let mut s = pb[i];
            for j in 0..rank {
                s -= qr.r[(j, i)].conj() * y[j];
            }
            if s.norm() > 1e-9 * scale {
                return Err(Error::NoExtension(format!(
                    "point constraints are inconsistent (residual {:.3e} in row {})",
                    s.norm(),
                    qr.perm[i]
                )));
            }
        }
        let particular = &qr.q * &y;
        let nullspace = qr.q.columns(rank, size - rank).clone_owned();
        Ok(FeasibleSet { particular, nullspace, kind: FeasibleKind::Points { matrix, values } })
    }

    /// The same affine set seen through explicit constraint rows, so a
    /// coordinate problem can also be solved by the nullspace route.
    pub fn as_constraints(&self) -> Result<Self> {
        match &self.kind {
            FeasibleKind::Points { .. } => Ok(self.clone()),
            FeasibleKind::Coordinate { constrained, fixed, .. } => {
                let size = self.particular.len();
                let mut a = DMatrix::zeros(constrained.len(), size);
                for (row, &i) in constrained.iter().enumerate() {
                    a[(row, i)] = Complex64::new(1.0, 0.0);
                }
                Self::from_constraints(a, DVector::from_vec(fixed.clone()))
            }
        }
    }

    pub fn free_dim(&self) -> usize {
        self.nullspace.ncols()
    }

    pub fn point(&self, y: &DVector<Complex64>) -> DVector<Complex64> {
        &self.particular + &self.nullspace * y
    }

    /// Coordinates of `c - particular` in the nullspace basis.
    pub fn free_coords(&self, c: &DVector<Complex64>) -> DVector<Complex64> {
        self.nullspace.ad_mul(&(c - &self.particular))
    }

    /// Largest violation of `g|_S = f`.
    pub fn violation(&self, c: &DVector<Complex64>) -> f64 {
        match &self.kind {
            FeasibleKind::Coordinate { constrained, fixed, .. } => constrained
                .iter()
                .zip(fixed)
                .map(|(&i, v)| (c[i] - v).norm())
                .fold(0.0, f64::max),
            FeasibleKind::Points { matrix, values } => {
                (matrix * c - values).iter().map(|v| v.norm()).fold(0.0, f64::max)
            }
        }
    }
}
