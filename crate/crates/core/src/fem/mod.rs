//! Membrane finite elements: stiffness, loads, the linear solve and force recovery.

mod element;
mod recovery;
mod skyline;
mod state;

use std::collections::BTreeMap;

pub use element::{
    element_stiffness, element_stiffness_with, point_strain, pressure_forces, strain_operator,
    ElementGeometry, ElementMatrix, ElementVector, StrainOperator,
};
pub use recovery::{
    canonical_sign, pointwise_sensitivity, pointwise_sensitivity_local, principal_values,
    PointForce, Principal, DEFAULT_TIE_TOL,
};
pub use skyline::{reverse_cuthill_mckee, SkylineFactor, SkylineMatrix};
pub use state::{assemble_and_solve, recover_membrane_forces, MembraneState, StateProblem};

use crate::geometry::Vec3;

/// Prescribed displacement components of a node set; `None` leaves a component free.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Constraint {
    pub components: [Option<f64>; 3],
}

impl Constraint {
    /// All three components held at zero.
    pub fn pinned() -> Self {
        Self {
            components: [Some(0.0); 3],
        }
    }

    /// The listed components (0 = x, 1 = y, 2 = z) held at zero.
    pub fn zero(components: &[usize]) -> Self {
        let mut c = Self::default();
        for &k in components {
            c.components[k] = Some(0.0);
        }
        c
    }
}

/// Loads and supports of a state problem.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LoadCase {
    /// Force per area along the outward normal.
    pub pressure: f64,
    /// Constant tangent force per length on each labelled boundary.
    pub edge_tractions: BTreeMap<String, Vec3>,
    /// Supports on labelled node sets.
    pub dirichlet: BTreeMap<String, Constraint>,
}

impl LoadCase {
    pub fn with_pressure(mut self, p: f64) -> Self {
        self.pressure = p;
        self
    }

    pub fn with_traction(mut self, label: &str, q: Vec3) -> Self {
        self.edge_tractions.insert(label.to_string(), q);
        self
    }

    pub fn with_support(mut self, label: &str, c: Constraint) -> Self {
        self.dirichlet.insert(label.to_string(), c);
        self
    }

    /// Same supports, every load multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.pressure *= factor;
        for q in out.edge_tractions.values_mut() {
            *q *= factor;
        }
        out
    }
}
