//! IRLS against the direct minimizer: the p-minimizer is the minimal L²
//! extension for its own reweighted density e^{-φ}|F|^{p-2}.

use minext::config::InstanceConfig;
use minext::irls::{certify, fixed_point_residual, norm_transfer};
use minext::verifier::{problem, solve_direct, solve_irls};

fn main() -> minext::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/disc_points.cfg").into());
    let base = InstanceConfig::load(&path)?;
    println!("{path}");
    for p in [0.75, 1.0, 1.5] {
        let cfg = base.with_cell(p, base.solve.degree)?;
        let disc = cfg.instance().discretize()?;
        let prob = problem(&cfg, &disc)?;
        let (direct, cert) = solve_direct(&cfg, &prob)?;
        let out = solve_irls(&cfg, &prob)?;
        let fp = certify(&prob, &out, &direct, &cert)?;
        println!(
            "p = {p:<4}  m_p {:.12}  irls iterations {:3}  |F_irls - F_direct| {:.1e}  fixed point {:.1e}  norm transfer {:.1e}  diff orth {:.1e}",
            cert.energy,
            out.iterations,
            fp.cross_check_distance,
            fixed_point_residual(&direct, &prob)?,
            norm_transfer(&direct, &prob),
            fp.difference_orthogonality
        );
        for row in out.trace.iter().take(3) {
            println!("    m = {:2}  eps {:.1e}  J {:.12} -> {:.12}", row.iteration, row.eps, row.objective_before, row.objective);
        }
    }
    Ok(())
}
