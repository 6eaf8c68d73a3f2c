//! For 0 < p < 1 the energy is not convex and uniqueness of the minimizer is
//! open. The probe runs the direct solver from many random starts and groups
//! the limits; it reports what it finds and asserts nothing.

use minext::geometry::{DomainSpec, SubmanifoldSpec, WeightSpec};
use minext::instance::Instance;
use minext::lp_solver::{uniqueness_probe, DirectOptions, LpProblem, FINAL_EPS};
use num_complex::Complex64;

fn main() -> minext::Result<()> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let cases = [
        ("disc, S = {0}, f = 1", DomainSpec::disc(1.0), vec![one], 8, 12, 8),
        ("bidisc, S = {z2 = 0}, f = z1", DomainSpec::polydisc(2, 1.0), vec![zero, one], 4, 4, 16),
    ];
    for (label, domain, data, degree, order, trials) in cases {
        let disc = Instance {
            domain,
            submanifold: SubmanifoldSpec::CoordinateSubspace { codim: 1 },
            weight: WeightSpec::flat(),
            data,
            degree,
            order,
        }
        .discretize()?;
        let prob = LpProblem::new(disc, 0.5, FINAL_EPS)?;
        let report = uniqueness_probe(&prob, trials, 2024, &DirectOptions::default())?;
        println!("{label}: {trials} trials, {} cluster(s), dispersion {:.1e}", report.clusters.len(), report.dispersion);
        for c in &report.clusters {
            println!("    m_p {:.12}  members {:?}", c.energy, c.members);
        }
    }
    Ok(())
}
