//! One-dimensional Gauss rules by the Golub–Welsch eigenvalue method.

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights of an `n`-point rule on `[0, 1]` for the weight `(1 - u)^alpha`.
///
/// The rule integrates `(1 - u)^alpha * q(u)` exactly for every polynomial `q`
/// of degree at most `2n - 1`. `alpha = 0` gives Gauss–Legendre.
pub fn gauss_jacobi_unit(n: usize, alpha: u32) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_jacobi(n, alpha, 0);
    // u = (1 + x) / 2 and (1 - u)^alpha = 2^-alpha (1 - x)^alpha, du = dx / 2
    let scale = 0.5f64.powi(alpha as i32 + 1);
    let mut pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(&w)
        .map(|(&x, &w)| (0.5 * (1.0 + x), w * scale))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `n`-point Gauss–Jacobi rule on `[-1, 1]` for the weight `(1 - x)^alpha (1 + x)^beta`.
pub fn gauss_jacobi(n: usize, alpha: u32, beta: u32) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "a Gauss rule needs at least one node");
    let a = alpha as f64;
    let b = beta as f64;
    let ab = a + b;

    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        jacobi[(k, k)] = diag;
        if k + 1 < n {
            let j = kf + 1.0;
            let num = 4.0 * j * (j + a) * (j + b) * (j + ab);
            let den = (2.0 * j + ab).powi(2) * (2.0 * j + ab + 1.0) * (2.0 * j + ab - 1.0);
            let off = (num / den).sqrt();
            jacobi[(k, k + 1)] = off;
            jacobi[(k + 1, k)] = off;
        }
    }

    // mu0 = 2^(a+b+1) Γ(a+1) Γ(b+1) / Γ(a+b+2)
    let mu0 = 2f64.powi(alpha as i32 + beta as i32 + 1) * factorial(alpha) * factorial(beta)
        / factorial(alpha + beta + 1);

    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

pub(crate) fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}
