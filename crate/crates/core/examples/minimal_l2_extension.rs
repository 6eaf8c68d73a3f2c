//! The minimal L² extension: compared with the obvious extension it is
//! orthogonal to every function vanishing on S, and the Pythagorean identity
//! ‖g‖² = ‖F‖² + ‖g - F‖² holds for any other extension g.

use minext::geometry::{DomainSpec, SubmanifoldSpec, WeightSpec};
use minext::instance::Instance;
use minext::l2_solver::{orthogonality_residual, solve_l2, solve_l2_nullspace, L2Problem};
use minext::function_space::gram;
use num_complex::Complex64;

fn main() -> minext::Result<()> {
    let disc = Instance {
        domain: DomainSpec::polydisc(2, 1.0),
        submanifold: SubmanifoldSpec::CoordinateSubspace { codim: 1 },
        weight: WeightSpec { alpha: 0.5, beta: vec![0.0, 2.0], c: 0.0 },
        // f = 1 + z1 on {z2 = 0}
        data: vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
        degree: 4,
        order: 4,
    }
    .discretize()?;

    let g = gram(&disc.basis, &disc.base_density, &disc.quad)?;
    let prob = L2Problem::new(disc.basis.clone(), disc.feasible.clone(), g);
    let (f, report) = solve_l2(&prob)?;
    let (f2, _) = solve_l2_nullspace(&prob)?;
    let naive = disc.naive_extension();

    println!("minimal energy      {:.15}", report.objective);
    println!("naive energy        {:.15}", prob.gram.quadratic_form(&naive.coeffs));
    println!("orthogonality       minimal {:.1e}   naive {:.1e}", report.orthogonality_residual, orthogonality_residual(&naive, &prob));
    println!("second route        distance {:.1e}", f.distance(&f2));
    let d = &naive.coeffs - &f.coeffs;
    let pythagoras = prob.gram.quadratic_form(&naive.coeffs) - report.objective - prob.gram.quadratic_form(&d);
    println!("pythagoras defect   {:.1e}", pythagoras.abs());
    Ok(())
}
