#![allow(dead_code)]

use std::path::PathBuf;

pub fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

pub fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden").join(name)
}

/// Compares a sweep table against a golden one: header, `p`, `D` and
/// `iterations` exactly; the energies to 1e-9 relative; the residual columns,
/// which are roundoff-level noise, to 1e-7 absolute.
pub fn sweep_matches(actual: &str, expected: &str) -> Result<(), String> {
    let a: Vec<&str> = actual.lines().collect();
    let e: Vec<&str> = expected.lines().collect();
    if a.len() != e.len() {
        return Err(format!("{} rows, expected {}", a.len(), e.len()));
    }
    if a[0] != e[0] {
        return Err(format!("header {:?}, expected {:?}", a[0], e[0]));
    }
    for (row, (la, le)) in a.iter().zip(&e).enumerate().skip(1) {
        let ca: Vec<&str> = la.split(',').collect();
        let ce: Vec<&str> = le.split(',').collect();
        if ca.len() != ce.len() {
            return Err(format!("row {row}: {} cells, expected {}", ca.len(), ce.len()));
        }
        for (col, (x, y)) in ca.iter().zip(&ce).enumerate() {
            let ok = match col {
                0 | 1 | 5 => x == y,
                _ => {
                    let (x, y): (f64, f64) = (x.parse().map_err(|_| format!("bad cell {x}"))?, y.parse().map_err(|_| format!("bad cell {y}"))?);
                    if col == 2 || col == 3 {
                        (x - y).abs() <= 1e-9 * y.abs().max(1.0)
                    } else {
                        (x - y).abs() <= 1e-7
                    }
                }
            };
            if !ok {
                return Err(format!("row {row} column {col}: {x} vs golden {y}"));
            }
        }
    }
    Ok(())
}
