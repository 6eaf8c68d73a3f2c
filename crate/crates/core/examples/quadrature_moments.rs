//! Product and collapsed-simplex quadrature on the disc, bidisc and ball,
//! checked against closed-form monomial moments.

use minext::geometry::{build_domain_quadrature, build_submanifold_quadrature, sigma, DomainSpec, SubmanifoldSpec};
use num_complex::Complex64;

fn main() -> minext::Result<()> {
    let order = 6;
    for domain in [DomainSpec::disc(1.0), DomainSpec::polydisc(2, 0.8), DomainSpec::ball(2, 1.0), DomainSpec::ball(3, 1.0)] {
        let rule = build_domain_quadrature(&domain, order)?;
        let volume: f64 = rule.weights.iter().sum();
        // |z_1|^4 |z_n|^2 is exact since its degree 6 is at most 2 * order
        let n = domain.n;
        let mut a = vec![0u32; n];
        a[0] += 2;
        a[n - 1] += 1;
        let q = rule.integrate(|z| Complex64::new(z[0].norm_sqr().powi(2) * z[n - 1].norm_sqr(), 0.0));
        let exact = domain.monomial_moment(&a, &a);
        println!(
            "{:?} n={} nodes={:5}  volume {:.15} (exact {:.15})  moment err {:.1e}",
            domain.kind,
            n,
            rule.len(),
            volume,
            domain.volume(),
            (q.re - exact).abs() / exact
        );
    }

    // off-diagonal moments vanish by rotation invariance
    let disc = DomainSpec::disc(1.0);
    let rule = build_domain_quadrature(&disc, order)?;
    let odd = rule.integrate(|z| z[0].powu(3) * z[0].conj());
    println!("disc  ∫ z^3 conj(z) = {:.1e}", odd.norm());

    let slice = build_submanifold_quadrature(&DomainSpec::polydisc(2, 1.0), &SubmanifoldSpec::CoordinateSubspace { codim: 1 }, order)?;
    println!("rule on {{z2 = 0}}: {} nodes, area {:.15}", slice.len(), slice.weights.iter().sum::<f64>());

    for k in 1..=4 {
        println!("sigma({k}) = {:.15}", sigma(k));
    }
    Ok(())
}
