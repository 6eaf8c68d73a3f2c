//! Direct minimization of the smoothed p-energy on the flat disc with S = {0}
//! and f = 1. Subharmonicity of |g|^p gives ∫|g|^p >= π|g(0)|^p, so F = 1 and
//! m_p = π for every p.

use std::f64::consts::PI;

use minext::geometry::{DomainSpec, SubmanifoldSpec, WeightSpec};
use minext::instance::Instance;
use minext::lp_solver::{random_starts, solve_lp_direct, DirectOptions, LpProblem, FINAL_EPS};
use num_complex::Complex64;

fn main() -> minext::Result<()> {
    let disc = Instance {
        domain: DomainSpec::disc(1.0),
        submanifold: SubmanifoldSpec::CoordinateSubspace { codim: 1 },
        weight: WeightSpec::flat(),
        data: vec![Complex64::new(1.0, 0.0)],
        degree: 8,
        order: 12,
    }
    .discretize()?;
    let starts = random_starts(&disc, 4, 7, true);

    for p in [0.5, 1.0, 1.5] {
        let prob = LpProblem::new(disc.clone(), p, FINAL_EPS)?;
        let clock = std::time::Instant::now();
        let (f, cert) = solve_lp_direct(&prob, &starts, &DirectOptions::default())?;
        let iterations: Vec<usize> = cert.starts.iter().map(|s| s.iterations).collect();
        println!(
            "p = {p:<3}  m_p = {:.12}  rel err {:.1e}  |F - 1| = {:.1e}  residual {:.1e}  dispersion {:.1e}  iterations {:?}  {:.0?}",
            cert.energy,
            (cert.energy - PI).abs() / PI,
            (&f.coeffs - &disc.feasible.particular).norm(),
            cert.variational_residual,
            cert.dispersion,
            iterations,
            clock.elapsed()
        );
    }
    Ok(())
}
