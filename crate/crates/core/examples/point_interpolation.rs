//! Minimal interpolation: prescribed values at interior points of the disc,
//! minimal L^p extension for several p, compared with the L² interpolant.

use minext::geometry::{DomainSpec, SubmanifoldSpec, WeightSpec};
use minext::instance::Instance;
use minext::irls::{irls_solve, l2_start, IrlsSchedule};
use minext::lp_solver::{LpProblem, FINAL_EPS};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn main() -> minext::Result<()> {
    let points = vec![vec![c(0.5, 0.0)], vec![c(0.0, -0.4)], vec![c(-0.6, 0.0)]];
    let values = vec![c(1.0, 0.0), c(0.2, 0.3), c(-0.5, 0.0)];
    let disc = Instance {
        domain: DomainSpec::disc(1.0),
        submanifold: SubmanifoldSpec::PointSet { points: points.clone(), values: values.clone() },
        weight: WeightSpec { alpha: 1.0, beta: vec![], c: 0.0 },
        data: vec![],
        degree: 8,
        order: 12,
    }
    .discretize()?;

    let l2 = l2_start(&LpProblem::new(disc.clone(), 2.0, FINAL_EPS)?)?;
    for p in [1.0, 1.25, 1.5, 2.0] {
        let prob = LpProblem::new(disc.clone(), p, FINAL_EPS)?;
        let out = irls_solve(&prob, &l2, &IrlsSchedule::default())?;
        let f = &out.solution;
        let worst = points.iter().zip(&values).map(|(z, v)| (f.at(z) - v).norm()).fold(0.0, f64::max);
        println!(
            "p = {p:<4}  m_p {:.10}  iterations {:3}  interpolation err {:.1e}  distance to L² interpolant {:.3e}  F(0) = {:.6}",
            prob.energy(f),
            out.iterations,
            worst,
            f.distance(&l2),
            f.at(&[c(0.0, 0.0)])
        );
    }
    Ok(())
}
