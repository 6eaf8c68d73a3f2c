//! Both solvers across exponents and degrees, as a CSV table.

use minext::cli::{sweep, sweep_csv};
use minext::config::InstanceConfig;

fn main() -> minext::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/polydisc_slice.cfg").into());
    let cfg = InstanceConfig::load(&path)?;
    let rows = sweep(&cfg, &[0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75], &[2, 3, 4])?;
    print!("{}", sweep_csv(&rows));
    Ok(())
}
