//! Small dense complex kernels: column-pivoted Householder QR and a Hermitian
//! solve with an eigenvalue-thresholded fallback.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// `A P = Q R` with `Q` square unitary, `R` upper trapezoidal and `P` a column permutation.
#[derive(Debug, Clone)]
pub struct ColPivQr {
    pub q: DMatrix<Complex64>,
    pub r: DMatrix<Complex64>,
    /// `perm[j]` is the original column placed at position `j`.
    pub perm: Vec<usize>,
    pub rank: usize,
}

/// Relative threshold on `|R_kk| / |R_00|` below which a pivot counts as zero.
pub const RANK_TOL: f64 = 1e-10;

pub fn col_piv_qr(a: &DMatrix<Complex64>) -> ColPivQr {
    let (rows, cols) = a.shape();
    let mut r = a.clone();
    let mut q = DMatrix::<Complex64>::identity(rows, rows);
    let mut perm: Vec<usize> = (0..cols).collect();
    let steps = rows.min(cols);

    for k in 0..steps {
        // pivot: largest remaining column norm
        let (best, _) = (k..cols)
            .map(|j| (j, r.view((k, j), (rows - k, 1)).norm_squared()))
            .fold((k, -1.0), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc });
        if best != k {
            r.swap_columns(k, best);
            perm.swap(k, best);
        }

        let x = r.view((k, k), (rows - k, 1)).clone_owned();
        let xnorm = x.norm();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.norm();
        if vnorm == 0.0 {
            continue;
        }
        v /= Complex64::new(vnorm, 0.0);

        // R <- (I - 2 v v^H) R on the trailing block
        let mut block = r.view_mut((k, k), (rows - k, cols - k));
        let proj = v.ad_mul(&block); // 1 x (cols-k)
        block -= &v * proj * Complex64::new(2.0, 0.0);
        for i in (k + 1)..rows {
            r[(i, k)] = Complex64::new(0.0, 0.0);
        }

        // Q <- Q (I - 2 v v^H)
        let mut qblock = q.view_mut((0, k), (rows, rows - k));
        let qv = &qblock * &v;
        qblock -= qv * v.adjoint() * Complex64::new(2.0, 0.0);
    }

    let lead = if steps > 0 { r[(0, 0)].norm() } else { 0.0 };
    let rank = (0..steps).take_while(|&k| lead > 0.0 && r[(k, k)].norm() > RANK_TOL * lead).count();
    ColPivQr { q, r, perm, rank }
}

/// Result of a Hermitian positive (semi)definite solve.
#[derive(Debug, Clone)]
pub struct HermitianSolve {
    pub x: DVector<Complex64>,
    /// True when Cholesky failed and the eigenvalue-thresholded pseudo-solve was used.
    pub pseudo_inverse: bool,
}

/// Relative eigenvalue floor of the pseudo-solve fallback.
pub const PSEUDO_TOL: f64 = 1e-12;

/// Solves `G x = b` for Hermitian PSD `G`.
///
/// Returns `None` only when `G` is numerically zero.
pub fn hermitian_solve(g: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Option<HermitianSolve> {
    if g.nrows() == 0 {
        return Some(HermitianSolve { x: DVector::zeros(0), pseudo_inverse: false });
    }
    if let Some(chol) = Cholesky::new(g.clone()) {
        let pivots = chol.l_dirty().diagonal().map(|d| d.norm_sqr());
        let well_posed = pivots.min() > PSEUDO_TOL * pivots.max();
        let x = chol.solve(b);
        if well_posed && x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Some(HermitianSolve { x, pseudo_inverse: false });
        }
    }
    let eig = SymmetricEigen::new(g.clone());
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    if lmax <= 0.0 {
        return None;
    }
    let floor = PSEUDO_TOL * lmax;
    let coords = eig.eigenvectors.ad_mul(b);
    let mut scaled = coords;
    for (i, lambda) in eig.eigenvalues.iter().enumerate() {
        scaled[i] = if *lambda > floor { scaled[i] / *lambda } else { Complex64::new(0.0, 0.0) };
    }
    Some(HermitianSolve { x: &eig.eigenvectors * scaled, pseudo_inverse: true })
}

/// Forces exact Hermitian symmetry.
pub fn hermitize(g: &mut DMatrix<Complex64>) {
    let n = g.nrows();
    for i in 0..n {
        g[(i, i)].im = 0.0;
        for j in 0..i {
            let avg = (g[(i, j)] + g[(j, i)].conj()) * 0.5;
            g[(i, j)] = avg;
            g[(j, i)] = avg.conj();
        }
    }
}
