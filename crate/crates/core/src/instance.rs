//! A fully specified extension problem and its discretization.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::function_space::{
    build_basis, Basis, BasisSplit, ExtensionData, FeasibleKind, FeasibleSet, HoloFunction, WeightField,
};
use crate::geometry::{build_domain_quadrature, DomainSpec, QuadratureRule, SubmanifoldSpec, WeightSpec};

/// Domain, submanifold, weight, data on `S`, and the discretization knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub domain: DomainSpec,
    pub submanifold: SubmanifoldSpec,
    pub weight: WeightSpec,
    /// Coefficients of `f` on the basis of `S` (ignored for point sets, whose
    /// values live in the submanifold description).
    pub data: Vec<Complex64>,
    pub degree: u32,
    pub order: usize,
}

impl Instance {
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.submanifold.validate(&self.domain)?;
        self.weight.validate(&self.domain)?;
        if self.order == 0 {
            return Err(Error::Config("quadrature order must be at least 1".into()));
        }
        Ok(())
    }

    pub fn extension_data(&self) -> ExtensionData {
        match &self.submanifold {
            SubmanifoldSpec::CoordinateSubspace { .. } => ExtensionData::Coefficients(self.data.clone()),
            SubmanifoldSpec::PointSet { values, .. } => ExtensionData::PointValues(values.clone()),
        }
    }

    pub fn discretize(&self) -> Result<Arc<Discretization>> {
        self.validate()?;
        let (basis, split) = build_basis(self.domain.n, self.degree, &self.submanifold);
        let feasible = FeasibleSet::build(&basis, &split, &self.submanifold, &self.extension_data())?;
        let quad = build_domain_quadrature(&self.domain, self.order)?;
        let design = basis.design_matrix(&quad.nodes);
        let base_density = WeightField::from_weight(&self.weight, &quad);
        Ok(Arc::new(Discretization { instance: self.clone(), basis, split, feasible, quad, design, base_density }))
    }
}

/// Everything the solvers share: basis, feasible set, quadrature, the design
/// matrix `V[q, a] = m_a(z_q)` and `e^{-φ}` at the nodes.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub instance: Instance,
    pub basis: Basis,
    pub split: BasisSplit,
    pub feasible: FeasibleSet,
    pub quad: QuadratureRule,
    pub design: DMatrix<Complex64>,
    pub base_density: WeightField,
}

impl Discretization {
    pub fn function(&self, coeffs: DVector<Complex64>) -> HoloFunction {
        HoloFunction::new(self.basis.clone(), coeffs)
    }

    /// Node values `V c`.
    pub fn values(&self, coeffs: &DVector<Complex64>) -> DVector<Complex64> {
        &self.design * coeffs
    }

    /// The obvious extension with a nonzero free part: the particular solution
    /// plus every lowest-degree free monomial (coordinate subspaces), or plus
    /// the first nullspace direction scaled to the particular solution (point sets).
    pub fn naive_extension(&self) -> HoloFunction {
        let mut c = self.feasible.particular.clone();
        match &self.feasible.kind {
            FeasibleKind::Coordinate { free, .. } => {
                if let Some(low) = free.iter().map(|&i| self.basis.indices[i].degree()).min() {
                    for &i in free.iter().filter(|&&i| self.basis.indices[i].degree() == low) {
                        c[i] += Complex64::new(1.0, 0.0);
                    }
                }
            }
            FeasibleKind::Points { .. } => {
                if self.feasible.free_dim() > 0 {
                    let scale = self.feasible.particular.norm().max(1.0);
                    c += self.feasible.nullspace.column(0) * Complex64::new(scale, 0.0);
                }
            }
        }
        self.function(c)
    }
}
