//! Instance configuration files.
//!
//! TOML with the sections `[domain]`, `[submanifold]`, `[weight]`, `[data]`,
//! `[solve]` and `[tolerances]`. Complex numbers may be written as `"re,im"`,
//! `[re, im]` or a plain real.
//!
//! ```toml
//! [domain]
//! kind = "disc"
//! radius = 1.0
//!
//! [submanifold]
//! kind = "coordinate"
//! codim = 1
//!
//! [data]
//! f = ["1,0"]
//!
//! [solve]
//! p = 1.0
//! degree = 8
//! order = 12
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{DomainKind, DomainSpec, Point, SubmanifoldSpec, WeightSpec};
use crate::instance::Instance;
use crate::irls::IrlsSchedule;
use crate::lp_solver::{DirectOptions, EPS_SCHEDULE};
use crate::verifier::default_tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSettings {
    pub p: f64,
    pub degree: u32,
    pub order: usize,
    pub seed: u64,
    /// Number of direct-solver starts, the particular solution included.
    pub starts: usize,
    pub eps_schedule: Vec<f64>,
    pub max_iter: usize,
    pub irls_max_iter: usize,
}

/// A validated configuration. Serializes canonically; see [`InstanceConfig::fingerprint`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceConfig {
    pub domain: DomainSpec,
    pub submanifold: SubmanifoldSpec,
    pub weight: WeightSpec,
    /// Coefficients of `f` on the basis of `S`; empty for point sets.
    pub data: Vec<Complex64>,
    pub solve: SolveSettings,
    /// Full tolerance table, defaults merged with overrides.
    pub tolerances: BTreeMap<String, f64>,
}

impl InstanceConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        raw.resolve()
    }

    pub fn instance(&self) -> Instance {
        Instance {
            domain: self.domain.clone(),
            submanifold: self.submanifold.clone(),
            weight: self.weight.clone(),
            data: self.data.clone(),
            degree: self.solve.degree,
            order: self.solve.order,
        }
    }

    /// Same problem at another exponent and degree; the quadrature order is
    /// raised to `degree` if needed so the Gram matrix stays exact.
    pub fn with_cell(&self, p: f64, degree: u32) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.solve.p = p;
        cfg.solve.degree = degree;
        cfg.solve.order = cfg.solve.order.max(degree as usize);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn direct_options(&self) -> DirectOptions {
        DirectOptions { schedule: self.solve.eps_schedule.clone(), max_iter: self.solve.max_iter, ..DirectOptions::default() }
    }

    /// IRLS bottoms out at the last smoothing of the schedule.
    pub fn irls_schedule(&self) -> IrlsSchedule {
        IrlsSchedule {
            floor: *self.solve.eps_schedule.last().expect("validated schedule"),
            max_iter: self.solve.irls_max_iter,
            ..IrlsSchedule::default()
        }
    }

    /// Smoothing at which results are reported.
    pub fn final_eps(&self) -> f64 {
        *self.solve.eps_schedule.last().expect("validated schedule")
    }

    pub fn tolerance(&self, check: &str) -> f64 {
        self.tolerances[check]
    }

    /// Hex SHA-256 of the canonical JSON form: identical inputs, identical fingerprint.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn validate(&self) -> Result<()> {
        self.instance().validate()?;
        let s = &self.solve;
        if !(s.p > 0.0 && s.p <= 2.0) {
            return Err(Error::Config(format!("solve.p must lie in (0, 2], got {}", s.p)));
        }
        if s.starts == 0 {
            return Err(Error::Config("solve.starts must be at least 1".into()));
        }
        if s.eps_schedule.is_empty() || s.eps_schedule.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::Config("solve.eps_schedule must be a nonempty list of positive numbers".into()));
        }
        if s.max_iter == 0 || s.irls_max_iter == 0 {
            return Err(Error::Config("solve.max_iter and solve.irls_max_iter must be positive".into()));
        }
        if let SubmanifoldSpec::CoordinateSubspace { codim } = &self.submanifold {
            let expect = crate::function_space::Basis::new(self.domain.n - codim, s.degree).len();
            if self.data.len() > expect {
                return Err(Error::Config(format!(
                    "data.f has {} coefficients but the degree-{} basis of S has {expect}",
                    self.data.len(),
                    s.degree
                )));
            }
        }
        for (name, tol) in &self.tolerances {
            if !(*tol >= 0.0) {
                return Err(Error::Config(format!("tolerances.{name} must be >= 0, got {tol}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
enum RawComplex {
    Real(f64),
    Pair([f64; 2]),
    Text(#[serde(deserialize_with = "complex_text")] Complex64),
}

fn complex_text<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Complex64, D::Error> {
    let s = String::deserialize(d)?;
    parse_complex(&s).map_err(serde::de::Error::custom)
}

/// `"re,im"` or `"re"`.
pub fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let mut parts = s.split(',').map(str::trim);
    let re = parts.next().unwrap_or("");
    let im = parts.next().unwrap_or("0");
    if parts.next().is_some() {
        return Err(format!("expected `re,im`, got {s:?}"));
    }
    let re: f64 = re.parse().map_err(|_| format!("bad real part in {s:?}"))?;
    let im: f64 = im.parse().map_err(|_| format!("bad imaginary part in {s:?}"))?;
    Ok(Complex64::new(re, im))
}

impl From<RawComplex> for Complex64 {
    fn from(c: RawComplex) -> Self {
        match c {
            RawComplex::Real(re) => Complex64::new(re, 0.0),
            RawComplex::Pair([re, im]) => Complex64::new(re, im),
            RawComplex::Text(z) => z,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    domain: RawDomain,
    submanifold: RawSubmanifold,
    #[serde(default)]
    weight: RawWeight,
    #[serde(default)]
    data: RawData,
    solve: RawSolve,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    kind: DomainKind,
    #[serde(default = "one")]
    n: usize,
    #[serde(default = "unit")]
    radius: f64,
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
enum RawSubmanifold {
    Coordinate { codim: usize },
    Points { points: Vec<Vec<RawComplex>>, values: Vec<RawComplex> },
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawWeight {
    #[serde(default)]
    alpha: f64,
    #[serde(default)]
    beta: Vec<f64>,
    #[serde(default)]
    c: f64,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawData {
    #[serde(default)]
    f: Vec<RawComplex>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolve {
    p: f64,
    degree: i64,
    order: Option<usize>,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_starts")]
    starts: usize,
    eps_schedule: Option<Vec<f64>>,
    max_iter: Option<usize>,
    irls_max_iter: Option<usize>,
}

fn default_starts() -> usize {
    4
}

impl RawConfig {
    fn resolve(self) -> Result<InstanceConfig> {
        let domain = DomainSpec { kind: self.domain.kind, n: self.domain.n, radius: self.domain.radius };
        if self.solve.degree < 0 {
            return Err(Error::Config(format!("solve.degree must be >= 0, got {}", self.solve.degree)));
        }
        let degree = self.solve.degree as u32;
        let (submanifold, data) = match self.submanifold {
            RawSubmanifold::Coordinate { codim } => {
                (SubmanifoldSpec::CoordinateSubspace { codim }, self.data.f.into_iter().map(Into::into).collect())
            }
            RawSubmanifold::Points { points, values } => {
                if !self.data.f.is_empty() {
                    return Err(Error::Config("data.f is not used with a point set; give submanifold.values".into()));
                }
                let points: Vec<Point> = points.into_iter().map(|z| z.into_iter().map(Into::into).collect()).collect();
                (SubmanifoldSpec::PointSet { points, values: values.into_iter().map(Into::into).collect() }, Vec::new())
            }
        };
        let defaults = DirectOptions::default();
        let mut tolerances = default_tolerances();
        for (name, tol) in self.tolerances {
            match tolerances.get_mut(&name) {
                Some(slot) => *slot = tol,
                None => return Err(Error::Config(format!("tolerances.{name}: no such check"))),
            }
        }
        let cfg = InstanceConfig {
            domain,
            submanifold,
            weight: WeightSpec { alpha: self.weight.alpha, beta: self.weight.beta, c: self.weight.c },
            data,
            solve: SolveSettings {
                p: self.solve.p,
                degree,
                order: self.solve.order.unwrap_or((degree as usize).max(1)),
                seed: self.solve.seed,
                starts: self.solve.starts,
                eps_schedule: self.solve.eps_schedule.unwrap_or_else(|| EPS_SCHEDULE.to_vec()),
                max_iter: self.solve.max_iter.unwrap_or(defaults.max_iter),
                irls_max_iter: self.solve.irls_max_iter.unwrap_or(IrlsSchedule::default().max_iter),
            },
            tolerances,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DISC: &str = r#"
[domain]
kind = "disc"
radius = 1.0

[submanifold]
kind = "coordinate"
codim = 1

[weight]
alpha = 1.0

[data]
f = ["1,0"]

[solve]
p = 1.0
degree = 8
order = 12
seed = 3
"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = InstanceConfig::parse(DISC).unwrap();
        assert_eq!(cfg.domain, DomainSpec::disc(1.0));
        assert_eq!(cfg.data, vec![Complex64::new(1.0, 0.0)]);
        assert_eq!(cfg.solve.starts, 4);
        assert_eq!(cfg.solve.eps_schedule, EPS_SCHEDULE.to_vec());
        assert_eq!(cfg.tolerances, default_tolerances());
        assert_eq!(cfg.final_eps(), 1e-8);
    }

    #[test]
    fn complex_forms_agree() {
        assert_eq!(parse_complex("0.5, -2").unwrap(), Complex64::new(0.5, -2.0));
        assert_eq!(parse_complex("3").unwrap(), Complex64::new(3.0, 0.0));
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("x").is_err());
        let a = InstanceConfig::parse(&DISC.replace(r#"["1,0"]"#, "[[1.0, 0.0]]")).unwrap();
        let b = InstanceConfig::parse(&DISC.replace(r#"["1,0"]"#, "[1.0]")).unwrap();
        assert_eq!(a.data, b.data);
    }

    #[test]
    fn point_sets() {
        let text = r#"
[domain]
kind = "polydisc"
n = 2

[submanifold]
kind = "points"
points = [["0.5,0", "0,0"], [[0.0, -0.4], "0.3"]]
values = ["1", "0.2,0.3"]

[solve]
p = 1.5
degree = 3
"#;
        let cfg = InstanceConfig::parse(text).unwrap();
        match &cfg.submanifold {
            SubmanifoldSpec::PointSet { points, values } => {
                assert_eq!(points[1], vec![Complex64::new(0.0, -0.4), Complex64::new(0.3, 0.0)]);
                assert_eq!(values[1], Complex64::new(0.2, 0.3));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(cfg.solve.order, 3);
    }

    #[test]
    fn errors_name_the_field() {
        let bad_p = InstanceConfig::parse(&DISC.replace("p = 1.0", "p = -1")).unwrap_err().to_string();
        assert!(bad_p.contains("solve.p"), "{bad_p}");
        let unknown = InstanceConfig::parse(&DISC.replace("seed = 3", "seed = 3\nsede = 4")).unwrap_err().to_string();
        assert!(unknown.contains("sede") && unknown.contains("line"), "{unknown}");
        let tol = InstanceConfig::parse(&format!("{DISC}\n[tolerances]\nnot_a_check = 1.0\n")).unwrap_err().to_string();
        assert!(tol.contains("not_a_check"), "{tol}");
        let deg = InstanceConfig::parse(&DISC.replace("degree = 8", "degree = -1")).unwrap_err().to_string();
        assert!(deg.contains("solve.degree"), "{deg}");
        let radius = InstanceConfig::parse(&DISC.replace("radius = 1.0", "radius = 0.0")).unwrap_err();
        assert!(matches!(radius, Error::Config(_)));
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = InstanceConfig::parse(DISC).unwrap();
        let b = InstanceConfig::parse(&format!("# comment\n{DISC}")).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = InstanceConfig::parse(&DISC.replace("seed = 3", "seed = 4")).unwrap();
        assert_ne!(a.fingerprint(), c.fingerprint());
        let d = InstanceConfig::parse(&format!("{DISC}\n[tolerances]\nfeasibility = 0.0\n")).unwrap();
        assert_ne!(a.fingerprint(), d.fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }

    #[test]
    fn json_round_trip() {
        let a = InstanceConfig::parse(DISC).unwrap();
        let back: InstanceConfig = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn cells_keep_the_rule_exact() {
        let a = InstanceConfig::parse(DISC).unwrap();
        let cell = a.with_cell(0.5, 16).unwrap();
        assert_eq!(cell.solve.order, 16);
        assert!(a.with_cell(2.5, 4).is_err());
    }
}
