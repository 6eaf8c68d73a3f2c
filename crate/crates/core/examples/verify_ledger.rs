//! Residual ledgers for the shipped instance configs.

use minext::config::InstanceConfig;
use minext::verifier::{run_ledger, CheckStatus};

fn main() -> minext::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/configs");
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .expect("configs directory")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
        .collect();
    paths.sort();
    for path in paths {
        let cfg = InstanceConfig::load(&path)?;
        let run = run_ledger(&cfg)?;
        let failed: Vec<&str> = run
            .ledger
            .entries
            .iter()
            .filter(|e| e.status != CheckStatus::Pass)
            .map(|e| e.name.as_str())
            .collect();
        println!(
            "{:<22} p = {:<3} {:2} checks  exit {}  {}",
            path.file_stem().unwrap().to_string_lossy(),
            cfg.solve.p,
            run.ledger.entries.len(),
            run.ledger.exit_code(),
            if failed.is_empty() { "all pass".to_string() } else { format!("not passing: {failed:?}") }
        );
        for name in ["variational_residual_p", "fixed_point_residual", "norm_transfer"] {
            let e = run.ledger.entry(name).unwrap();
            println!("    {name:<24} {:.2e}", e.residual.unwrap_or(f64::NAN));
        }
    }
    Ok(())
}
