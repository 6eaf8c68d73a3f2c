//! Model domains, submanifolds, psh weights and the quadrature rules that turn
//! every integral over the domain (or over the submanifold) into a finite sum.

mod gauss;

pub use gauss::{gauss_jacobi, gauss_jacobi_unit};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use gauss::factorial;

/// A point of `C^n`.
pub type Point = Vec<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Disc,
    Polydisc,
    Ball,
}

/// A model pseudoconvex domain: the disc, a polydisc of equal radii, or a ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub n: usize,
    pub radius: f64,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, n: usize, radius: f64) -> Result<Self> {
        let d = DomainSpec { kind, n, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn disc(radius: f64) -> Self {
        DomainSpec { kind: DomainKind::Disc, n: 1, radius }
    }

    pub fn polydisc(n: usize, radius: f64) -> Self {
        DomainSpec { kind: DomainKind::Polydisc, n, radius }
    }

    pub fn ball(n: usize, radius: f64) -> Self {
        DomainSpec { kind: DomainKind::Ball, n, radius }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("domain dimension n must be at least 1".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Config(format!("domain radius must be positive, got {}", self.radius)));
        }
        if self.kind == DomainKind::Disc && self.n != 1 {
            return Err(Error::Config(format!("a disc has n = 1, got n = {}", self.n)));
        }
        Ok(())
    }

    /// Strict interior membership.
    pub fn contains(&self, z: &[Complex64]) -> bool {
        if z.len() != self.n {
            return false;
        }
        match self.kind {
            DomainKind::Disc | DomainKind::Polydisc => z.iter().all(|c| c.norm() < self.radius),
            DomainKind::Ball => z.iter().map(|c| c.norm_sqr()).sum::<f64>() < self.radius * self.radius,
        }
    }

    /// Euclidean volume in real dimension `2n`.
    pub fn volume(&self) -> f64 {
        let r2 = self.radius * self.radius;
        match self.kind {
            DomainKind::Disc | DomainKind::Polydisc => (PI * r2).powi(self.n as i32),
            DomainKind::Ball => sigma(self.n as u32) * r2.powi(self.n as i32),
        }
    }

    /// Closed-form `∫ z^a conj(z)^b dV`.
    ///
    /// Zero unless `a == b`; for `a == b` it is `∏ π r^(2a_j+2) / (a_j+1)` on a
    /// polydisc and `π^n a! r^(2|a|+2n) / (n+|a|)!` on a ball.
    pub fn monomial_moment(&self, a: &[u32], b: &[u32]) -> f64 {
        if a != b {
            return 0.0;
        }
        let r = self.radius;
        match self.kind {
            DomainKind::Disc | DomainKind::Polydisc => a
                .iter()
                .map(|&m| PI * r.powi(2 * m as i32 + 2) / (m as f64 + 1.0))
                .product(),
            DomainKind::Ball => {
                let total: u32 = a.iter().sum();
                let num: f64 = a.iter().map(|&m| factorial(m)).product();
                PI.powi(self.n as i32) * num * r.powi(2 * (total + self.n as u32) as i32)
                    / factorial(total + self.n as u32)
            }
        }
    }

    /// The slice `{z_(m+1) = ... = z_n = 0}` seen as a model domain in `C^m`.
    fn slice(&self, m: usize) -> DomainSpec {
        match (self.kind, m) {
            (DomainKind::Ball, _) => DomainSpec::ball(m, self.radius),
            (_, 1) => DomainSpec::disc(self.radius),
            _ => DomainSpec::polydisc(m, self.radius),
        }
    }
}

/// The submanifold `S`: a coordinate subspace `{z_(n-k+1) = ... = z_n = 0}` or a
/// finite set of interior points carrying prescribed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SubmanifoldSpec {
    CoordinateSubspace { codim: usize },
    PointSet { points: Vec<Point>, values: Vec<Complex64> },
}

impl SubmanifoldSpec {
    pub fn codim(&self, domain: &DomainSpec) -> usize {
        match self {
            SubmanifoldSpec::CoordinateSubspace { codim } => *codim,
            SubmanifoldSpec::PointSet { .. } => domain.n,
        }
    }

    pub fn validate(&self, domain: &DomainSpec) -> Result<()> {
        match self {
            SubmanifoldSpec::CoordinateSubspace { codim } => {
                if *codim == 0 || *codim > domain.n {
                    return Err(Error::Config(format!(
                        "codimension must lie in 1..={}, got {codim}",
                        domain.n
                    )));
                }
            }
            SubmanifoldSpec::PointSet { points, values } => {
                if points.is_empty() {
                    return Err(Error::Config("point set is empty".into()));
                }
                if points.len() != values.len() {
                    return Err(Error::Config(format!(
                        "{} points but {} values",
                        points.len(),
                        values.len()
                    )));
                }
                for (i, p) in points.iter().enumerate() {
                    if p.len() != domain.n {
                        return Err(Error::Config(format!("point {i} has dimension {}, expected {}", p.len(), domain.n)));
                    }
                    if !domain.contains(p) {
                        return Err(Error::Config(format!("point {i} is not interior to the domain")));
                    }
                }
                let min_sep = 1e-6 * domain.radius;
                for i in 0..points.len() {
                    for j in 0..i {
                        let d2: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b).norm_sqr()).sum();
                        if d2.sqrt() < min_sep {
                            return Err(Error::Config(format!("points {j} and {i} are closer than {min_sep:e}")));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Diagonal quadratic weight `φ(z) = α|z|² + Σ β_j |z_j|² + c`.
///
/// Non-negative `α` and `β_j` keep `φ` smooth and plurisubharmonic. An empty
/// `beta` means all zeros.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WeightSpec {
    pub alpha: f64,
    #[serde(default)]
    pub beta: Vec<f64>,
    #[serde(default)]
    pub c: f64,
}

impl WeightSpec {
    /// `φ ≡ 0`.
    pub fn flat() -> Self {
        WeightSpec::default()
    }

    pub fn validate(&self, domain: &DomainSpec) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!("weight alpha must be >= 0, got {}", self.alpha)));
        }
        if !self.beta.is_empty() && self.beta.len() != domain.n {
            return Err(Error::Config(format!(
                "weight beta has {} entries, expected 0 or {}",
                self.beta.len(),
                domain.n
            )));
        }
        if let Some(b) = self.beta.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
            return Err(Error::Config(format!("weight beta entries must be >= 0, got {b}")));
        }
        if !self.c.is_finite() {
            return Err(Error::Config("weight constant must be finite".into()));
        }
        Ok(())
    }

    pub fn phi(&self, z: &[Complex64]) -> f64 {
        let mut v = self.c;
        for (j, zj) in z.iter().enumerate() {
            let beta = self.beta.get(j).copied().unwrap_or(0.0);
            v += (self.alpha + beta) * zj.norm_sqr();
        }
        v
    }
}

/// `e^{-φ}` at each point.
pub fn eval_weight(w: &WeightSpec, points: &[Point]) -> Vec<f64> {
    points.iter().map(|z| (-w.phi(z)).exp()).collect()
}

/// Volume of the unit ball in `C^k`, `π^k / k!`.
pub fn sigma(k: u32) -> f64 {
    PI.powi(k as i32) / factorial(k)
}

/// Nodes and positive volume weights discretizing an integral.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    /// Total degree in `(z, conj z)` integrated exactly; `None` for atomic rules.
    pub exact_degree: Option<usize>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ_q w_q f(z_q)`.
    pub fn integrate<F: Fn(&[Complex64]) -> Complex64>(&self, f: F) -> Complex64 {
        self.nodes.iter().zip(&self.weights).map(|(z, &w)| f(z) * w).sum()
    }
}

/// Tensor-product rule on the domain, exact for `z^a conj(z)^b` with `|a| + |b| <= 2 * order`.
///
/// Each complex direction uses `z_j = sqrt(t_j) e^{iθ_j}`. The angles get a
/// `4 * order + 1` point trapezoidal rule. Polydisc factors get Gauss–Legendre
/// in `t_j`; the ball uses the collapsed simplex `Σ t_j < r²` with Gauss–Jacobi
/// factors absorbing the Jacobian.
pub fn build_domain_quadrature(domain: &DomainSpec, order: usize) -> Result<QuadratureRule> {
    domain.validate()?;
    if order == 0 {
        return Err(Error::Config("quadrature order must be at least 1".into()));
    }
    let n = domain.n;
    let r2 = domain.radius * domain.radius;
    let radial_nodes = order + 1;
    let angles = 4 * order + 1;
    let dtheta = 2.0 * PI / angles as f64;
    let phases: Vec<Complex64> = (0..angles).map(|j| Complex64::from_polar(1.0, j as f64 * dtheta)).collect();

    // (t-vector, weight) pairs for the moduli, weight includes the (1/2)^n from dt/2.
    let moduli: Vec<(Vec<f64>, f64)> = match domain.kind {
        DomainKind::Disc | DomainKind::Polydisc => {
            let (u, w) = gauss_jacobi_unit(radial_nodes, 0);
            let one: Vec<(f64, f64)> = u.iter().zip(&w).map(|(&u, &w)| (r2 * u, 0.5 * r2 * w)).collect();
            let mut acc: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
            for _ in 0..n {
                acc = acc
                    .into_iter()
                    .flat_map(|(t, w)| {
                        one.iter().map(move |&(tj, wj)| {
                            let mut t = t.clone();
                            t.push(tj);
                            (t, w * wj)
                        })
                    })
                    .collect();
            }
            acc
        }
        DomainKind::Ball => {
            // t_1 = R u_1, t_j = R (1-u_1)...(1-u_{j-1}) u_j, Jacobian R^n ∏ (1-u_j)^(n-j)
            let rules: Vec<(Vec<f64>, Vec<f64>)> =
                (1..=n).map(|j| gauss_jacobi_unit(radial_nodes, (n - j) as u32)).collect();
            let mut acc: Vec<(Vec<f64>, f64, f64)> = vec![(Vec::new(), 0.5f64.powi(n as i32) * r2.powi(n as i32), r2)];
            for (u, w) in &rules {
                acc = acc
                    .into_iter()
                    .flat_map(|(t, wt, remaining)| {
                        u.iter().zip(w).map(move |(&uj, &wj)| {
                            let mut t = t.clone();
                            t.push(remaining * uj);
                            (t, wt * wj, remaining * (1.0 - uj))
                        })
                    })
                    .collect();
            }
            acc.into_iter().map(|(t, w, _)| (t, w)).collect()
        }
    };

    let angle_weight = dtheta.powi(n as i32);
    let total_angles = angles.pow(n as u32);
    let mut nodes = Vec::with_capacity(moduli.len() * total_angles);
    let mut weights = Vec::with_capacity(moduli.len() * total_angles);
    for (t, w) in &moduli {
        let rho: Vec<f64> = t.iter().map(|t| t.sqrt()).collect();
        for mut idx in 0..total_angles {
            let mut z = Vec::with_capacity(n);
            for r in &rho {
                z.push(phases[idx % angles] * *r);
                idx /= angles;
            }
            nodes.push(z);
            weights.push(w * angle_weight);
        }
    }
    Ok(QuadratureRule { nodes, weights, exact_degree: Some(2 * order) })
}

/// Rule on `S`. A coordinate subspace is the model domain of the first `n - k`
/// coordinates (nodes are padded with zeros back to `C^n`); `S = {0}` and point
/// sets are atomic with unit weights.
pub fn build_submanifold_quadrature(
    domain: &DomainSpec,
    sub: &SubmanifoldSpec,
    order: usize,
) -> Result<QuadratureRule> {
    domain.validate()?;
    sub.validate(domain)?;
    match sub {
        SubmanifoldSpec::PointSet { points, .. } => Ok(QuadratureRule {
            nodes: points.clone(),
            weights: vec![1.0; points.len()],
            exact_degree: None,
        }),
        SubmanifoldSpec::CoordinateSubspace { codim } => {
            let m = domain.n - codim;
            if m == 0 {
                return Ok(QuadratureRule {
                    nodes: vec![vec![Complex64::new(0.0, 0.0); domain.n]],
                    weights: vec![1.0],
                    exact_degree: None,
                });
            }
            let mut rule = build_domain_quadrature(&domain.slice(m), order)?;
            for z in &mut rule.nodes {
                z.resize(domain.n, Complex64::new(0.0, 0.0));
            }
            Ok(rule)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn moment(rule: &QuadratureRule, a: &[u32], b: &[u32]) -> Complex64 {
        rule.integrate(|z| {
            z.iter()
                .zip(a.iter().zip(b))
                .map(|(z, (&a, &b))| z.powu(a) * z.conj().powu(b))
                .product()
        })
    }

    #[test]
    fn disc_area_and_second_moment() {
        let rule = build_domain_quadrature(&DomainSpec::disc(1.0), 4).unwrap();
        let area: f64 = rule.weights.iter().sum();
        assert!((area - PI).abs() < 1e-12);
        let m = moment(&rule, &[1], &[1]);
        assert!((m.re - PI / 2.0).abs() < 1e-12 && m.im.abs() < 1e-12);
    }

    #[test]
    fn ball_first_coordinate_moment() {
        let rule = build_domain_quadrature(&DomainSpec::ball(2, 1.0), 6).unwrap();
        let m = moment(&rule, &[1, 0], &[1, 0]);
        assert!((m.re - PI * PI / 6.0).abs() < 1e-10);
    }

    #[test]
    fn ball_volume_scales_with_radius() {
        let d = DomainSpec::ball(3, 0.7);
        let rule = build_domain_quadrature(&d, 2).unwrap();
        let vol: f64 = rule.weights.iter().sum();
        assert!((vol - sigma(3) * 0.7f64.powi(6)).abs() < 1e-12);
        assert!(rule.nodes.iter().all(|z| d.contains(z)));
    }

    #[test]
    fn submanifold_rules() {
        let ball = DomainSpec::ball(2, 1.0);
        let s = SubmanifoldSpec::CoordinateSubspace { codim: 1 };
        let rule = build_submanifold_quadrature(&ball, &s, 4).unwrap();
        let area: f64 = rule.weights.iter().sum();
        assert!((area - PI).abs() < 1e-12);
        assert!(rule.nodes.iter().all(|z| z[1] == c(0.0, 0.0)));

        let pd = DomainSpec::polydisc(2, 1.0);
        let rule = build_submanifold_quadrature(&pd, &s, 4).unwrap();
        let m = moment(&rule, &[2, 0], &[2, 0]);
        assert!((m.re - PI / 3.0).abs() < 1e-12);

        let pts = SubmanifoldSpec::PointSet {
            points: vec![vec![c(0.1, 0.0)], vec![c(0.0, 0.2)], vec![c(-0.3, 0.1)]],
            values: vec![c(1.0, 0.0); 3],
        };
        let rule = build_submanifold_quadrature(&DomainSpec::disc(1.0), &pts, 4).unwrap();
        assert_eq!(rule.len(), 3);
        assert!(rule.weights.iter().all(|&w| w == 1.0));

        let origin = SubmanifoldSpec::CoordinateSubspace { codim: 2 };
        let rule = build_submanifold_quadrature(&ball, &origin, 4).unwrap();
        assert_eq!(rule.nodes, vec![vec![c(0.0, 0.0); 2]]);
    }

    #[test]
    fn weight_evaluation() {
        let flat = WeightSpec::flat();
        assert_eq!(eval_weight(&flat, &[vec![c(0.3, 0.4)]]), vec![1.0]);
        let w = WeightSpec { alpha: 1.0, beta: vec![], c: 0.0 };
        let v = eval_weight(&w, &[vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]);
        assert_eq!(v[0], 1.0);
        assert!((v[1] - 0.3678794412).abs() < 1e-10);
        let w = WeightSpec { alpha: 0.5, beta: vec![1.0, 2.0], c: 0.25 };
        assert_eq!(eval_weight(&w, &[vec![c(0.0, 0.0); 2]])[0], (-0.25f64).exp());
    }

    #[test]
    fn sigma_values() {
        assert!((sigma(1) - PI).abs() < 1e-15);
        assert!((sigma(2) - 4.9348022).abs() < 1e-7);
        assert!((sigma(3) - 5.1677127).abs() < 1e-7);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DomainSpec::new(DomainKind::Disc, 2, 1.0).is_err());
        assert!(DomainSpec::new(DomainKind::Ball, 0, 1.0).is_err());
        assert!(DomainSpec::new(DomainKind::Ball, 2, -1.0).is_err());
        assert!(build_domain_quadrature(&DomainSpec::disc(1.0), 0).is_err());
        let d = DomainSpec::disc(1.0);
        let outside = SubmanifoldSpec::PointSet { points: vec![vec![c(1.5, 0.0)]], values: vec![c(1.0, 0.0)] };
        assert!(outside.validate(&d).is_err());
        let clustered = SubmanifoldSpec::PointSet {
            points: vec![vec![c(0.1, 0.0)], vec![c(0.1 + 1e-9, 0.0)]],
            values: vec![c(1.0, 0.0); 2],
        };
        assert!(clustered.validate(&d).is_err());
        assert!(SubmanifoldSpec::CoordinateSubspace { codim: 2 }.validate(&d).is_err());
        assert!(WeightSpec { alpha: -1.0, beta: vec![], c: 0.0 }.validate(&d).is_err());
    }
}
