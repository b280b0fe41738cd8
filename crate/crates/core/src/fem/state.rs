use nalgebra::{Matrix2, Vector3};
use rayon::prelude::*;

use super::element::{
    element_stiffness_with, pressure_forces, ElementGeometry, ElementMatrix, ElementVector,
};
use super::recovery::{pointwise_sensitivity_local, principal_values, PointForce, DEFAULT_TIE_TOL};
use super::skyline::{reverse_cuthill_mckee, SkylineMatrix};
use super::LoadCase;
use crate::error::{Error, Result};
use crate::geometry::{SurfaceMesh, Vec3};
use crate::material::{membrane_tangent_local, MembraneMaterial};
use crate::optimizer::{DesignField, DesignPoint};

/// Relative tangency tolerance for edge tractions.
const TRACTION_NORMAL_TOL: f64 = 1e-10;

/// Solution of one state problem.
#[derive(Debug, Clone)]
pub struct MembraneState {
    /// Nodal displacements, `(x, y, z)` per node.
    pub u: Vec<f64>,
    /// `1/2 F . u`.
    pub compliance: f64,
    /// Recovered forces at the element centres.
    pub point_forces: Vec<PointForce>,
    /// Voigt strains at the four Gauss points of each element.
    pub gauss_strains: Vec<[Vector3<f64>; 4]>,
    /// `|K u - F| / |F|` over the free components (zero when `F = 0`).
    pub relative_residual: f64,
}

impl MembraneState {
    pub fn displacement(&self, node: usize) -> Vec3 {
        Vec3::new(self.u[3 * node], self.u[3 * node + 1], self.u[3 * node + 2])
    }
}

/// A mesh, material and load case prepared for repeated solves with
/// changing designs. Dof numbering, skyline profile and load vector are
/// computed once.
#[derive(Debug, Clone)]
pub struct StateProblem<'a> {
    mesh: &'a SurfaceMesh,
    material: MembraneMaterial,
    geometry: Vec<ElementGeometry>,
    /// Equation number of each global dof, `None` if prescribed.
    equation: Vec<Option<usize>>,
    /// Prescribed values (zero for free dofs).
    prescribed: Vec<f64>,
    /// External load vector over all dofs.
    load: Vec<f64>,
    profile: Vec<usize>,
}

impl<'a> StateProblem<'a> {
    pub fn new(
        mesh: &'a SurfaceMesh,
        material: MembraneMaterial,
        loads: &LoadCase,
    ) -> Result<Self> {
        if mesh.num_elements() == 0 {
            return Err(Error::InvalidArgument("mesh has no elements".into()));
        }
        let geometry = (0..mesh.num_elements())
            .into_par_iter()
            .map(|e| ElementGeometry::new(mesh, e))
            .collect::<Result<Vec<_>>>()?;
        let ndof = 3 * mesh.num_nodes();

        let mut constrained = vec![false; ndof];
        let mut prescribed = vec![0.0; ndof];
        for (label, c) in &loads.dirichlet {
            for &node in mesh.node_set(label)? {
                for (k, value) in c.components.iter().enumerate() {
                    let Some(value) = *value else { continue };
                    let dof = 3 * node + k;
                    if constrained[dof] && prescribed[dof] != value {
                        return Err(Error::InvalidLoad(format!(
                            "node {node} component {k} prescribed as both {} and {value}",
                            prescribed[dof]
                        )));
                    }
                    constrained[dof] = true;
                    prescribed[dof] = value;
                }
            }
        }
        if let Some(n) = mesh.planar_normal() {
            // A flat membrane has no stiffness normal to its plane.
            let k = (0..3).find(|&k| n[k].abs() >= 1.0 - 1e-12).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "planar mesh with normal {n:?} must lie in a coordinate plane"
                ))
            })?;
            for node in 0..mesh.num_nodes() {
                constrained[3 * node + k] = true;
            }
        }

        let load = load_vector(mesh, &geometry, loads)?;

        // Node ordering for a narrow profile.
        let mut adjacency = vec![Vec::new(); mesh.num_nodes()];
        for conn in mesh.elements() {
            for &a in conn {
                for &b in conn {
                    if a != b {
                        adjacency[a].push(b);
                    }
                }
            }
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
            adj.dedup();
        }
        let order = reverse_cuthill_mckee(&adjacency);
        let mut equation = vec![None; ndof];
        let mut next = 0;
        for &node in &order {
            for k in 0..3 {
                if !constrained[3 * node + k] {
                    equation[3 * node + k] = Some(next);
                    next += 1;
                }
            }
        }
        let mut profile: Vec<usize> = (0..next).collect();
        let eq_of = &equation;
        for conn in mesh.elements() {
            let eqs: Vec<usize> = conn
                .iter()
                .flat_map(|&a| (0..3).filter_map(move |k| eq_of[3 * a + k]))
                .collect();
            if let Some(&lo) = eqs.iter().min() {
                for &j in &eqs {
                    profile[j] = profile[j].min(lo);
                }
            }
        }
        Ok(Self {
            mesh,
            material,
            geometry,
            equation,
            prescribed,
            load,
            profile,
        })
    }

    pub fn mesh(&self) -> &SurfaceMesh {
        self.mesh
    }

    pub fn material(&self) -> &MembraneMaterial {
        &self.material
    }

    pub fn geometry(&self) -> &[ElementGeometry] {
        &self.geometry
    }

    /// External load vector over all dofs.
    pub fn load_vector(&self) -> &[f64] {
        &self.load
    }

    /// Whether global dof `dof` is free.
    pub fn is_free(&self, dof: usize) -> bool {
        self.equation[dof].is_some()
    }

    pub fn num_equations(&self) -> usize {
        self.profile.len()
    }

    fn element_dofs(&self, element: usize) -> [usize; 12] {
        let conn = self.mesh.elements()[element];
        std::array::from_fn(|i| 3 * conn[i / 3] + i % 3)
    }

    fn element_displacements(&self, element: usize, u: &[f64]) -> ElementVector {
        let dofs = self.element_dofs(element);
        ElementVector::from_fn(|i, _| u[dofs[i]])
    }

    fn check_design(&self, design: &DesignField) -> Result<()> {
        if design.points.len() != self.mesh.num_elements() {
            return Err(Error::InvalidArgument(format!(
                "design has {} points for {} elements",
                design.points.len(),
                self.mesh.num_elements()
            )));
        }
        Ok(())
    }

    /// Element stiffness matrices for `design`, computed in parallel.
    pub fn element_matrices(&self, design: &[DesignPoint]) -> Result<Vec<ElementMatrix>> {
        self.geometry
            .par_iter()
            .zip(design.par_iter())
            .map(|(geo, p)| element_stiffness_with(geo, p, &self.material))
            .collect()
    }

    /// `K u` over all dofs, element by element.
    pub fn apply_stiffness(&self, design: &DesignField, u: &[f64]) -> Result<Vec<f64>> {
        self.check_design(design)?;
        let ke = self.element_matrices(&design.points)?;
        let mut out = vec![0.0; u.len()];
        for (e, k) in ke.iter().enumerate() {
            let f = k * self.element_displacements(e, u);
            for (i, dof) in self.element_dofs(e).into_iter().enumerate() {
                out[dof] += f[i];
            }
        }
        Ok(out)
    }

    /// Solves `K u = F` with the supports and recovers forces at the element centres.
    pub fn solve(&self, design: &DesignField) -> Result<MembraneState> {
        self.check_design(design)?;
        let ke = self.element_matrices(&design.points)?;
        let n = self.num_equations();
        let mut k = SkylineMatrix::with_profile(self.profile.clone());
        let mut rhs = vec![0.0; n];
        for (dof, eq) in self.equation.iter().enumerate() {
            if let Some(j) = eq {
                rhs[*j] = self.load[dof];
            }
        }
        for (e, kmat) in ke.iter().enumerate() {
            let dofs = self.element_dofs(e);
            for (a, &da) in dofs.iter().enumerate() {
                let Some(i) = self.equation[da] else { continue };
                for (b, &db) in dofs.iter().enumerate() {
                    match self.equation[db] {
                        Some(j) if j >= i => k.add(i, j, kmat[(a, b)]),
                        Some(_) => {}
                        None => rhs[i] -= kmat[(a, b)] * self.prescribed[db],
                    }
                }
            }
        }
        let x = if n == 0 {
            Vec::new()
        } else {
            let factor = k.clone().factorize()?;
            factor.solve(&rhs)
        };
        let residual: f64 = k
            .mul_vec(&x)
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let relative_residual = if rhs_norm > 0.0 {
            residual / rhs_norm
        } else {
            residual
        };

        let mut u = self.prescribed.clone();
        for (dof, eq) in self.equation.iter().enumerate() {
            if let Some(j) = eq {
                u[dof] = x[*j];
            }
        }
        let compliance = 0.5 * self.load.iter().zip(&u).map(|(f, v)| f * v).sum::<f64>();
        let (point_forces, gauss_strains) = self.recover(design, &u)?;
        Ok(MembraneState {
            u,
            compliance,
            point_forces,
            gauss_strains,
            relative_residual,
        })
    }

    /// Centre forces and Gauss point strains for a displacement field.
    #[allow(clippy::type_complexity)]
    pub fn recover(
        &self,
        design: &DesignField,
        u: &[f64],
    ) -> Result<(Vec<PointForce>, Vec<[Vector3<f64>; 4]>)> {
        self.check_design(design)?;
        let results = (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|e| {
                let geo = &self.geometry[e];
                let p = &design.points[e];
                let ue = self.element_displacements(e, u);
                let centre = &geo.centre;
                let strain = super::element::point_strain(centre, &ue);
                let dir = super::element::local_fiber_direction(centre, &p.s, e)?;
                let m = membrane_tangent_local(&self.material, p.t1, p.t2, &dir).force(&strain);
                let force = Matrix2::new(m.x, m.z, m.z, m.y);
                let point = PointForce {
                    element: e,
                    frame: centre.frame,
                    strain,
                    force,
                    principal: principal_values(&force, DEFAULT_TIE_TOL),
                };
                let gauss: [Vector3<f64>; 4] =
                    std::array::from_fn(|q| super::element::point_strain(&geo.gauss[q], &ue));
                Ok((point, gauss))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(results.into_iter().unzip())
    }

    /// Per-element sensitivities `(A_1, A_2)`: the pointwise value
    /// `alpha (s_a . eps s_a)^2` averaged over the element with the
    /// quadrature weights, so that `dC/dt_a = -1/2 area A_a` holds exactly
    /// for the discrete model.
    pub fn sensitivities(
        &self,
        design: &DesignField,
        state: &MembraneState,
    ) -> Result<Vec<[f64; 2]>> {
        self.check_design(design)?;
        let alpha = self.material.fiber_modulus;
        (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|e| {
                let geo = &self.geometry[e];
                let weights = geo.area_weights();
                let area: f64 = weights.iter().sum();
                let mut acc = [0.0; 2];
                for ((point, w), strain) in
                    geo.gauss.iter().zip(weights).zip(&state.gauss_strains[e])
                {
                    let dir = super::element::local_fiber_direction(point, &design.points[e].s, e)?;
                    let a = pointwise_sensitivity_local(&dir, strain, alpha);
                    acc[0] += w * a[0];
                    acc[1] += w * a[1];
                }
                Ok([acc[0] / area, acc[1] / area])
            })
            .collect()
    }
}

fn load_vector(
    mesh: &SurfaceMesh,
    geometry: &[ElementGeometry],
    loads: &LoadCase,
) -> Result<Vec<f64>> {
    if !loads.pressure.is_finite() {
        return Err(Error::InvalidLoad(format!(
            "pressure {} is not finite",
            loads.pressure
        )));
    }
    let mut f = vec![0.0; 3 * mesh.num_nodes()];
    if loads.pressure != 0.0 {
        for (e, geo) in geometry.iter().enumerate() {
            let fe = pressure_forces(geo, loads.pressure);
            for (a, &node) in mesh.elements()[e].iter().enumerate() {
                for k in 0..3 {
                    f[3 * node + k] += fe[a][k];
                }
            }
        }
    }
    for (label, q) in &loads.edge_tractions {
        if !q.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidLoad(format!(
                "traction on `{label}` is not finite"
            )));
        }
        let edges = mesh.boundary(label)?;
        if edges.is_empty() && q.norm() > 0.0 {
            return Err(Error::InvalidLoad(format!(
                "boundary `{label}` has no edges to carry its traction"
            )));
        }
        for &edge in edges {
            let (xi, eta) = SurfaceMesh::edge_midpoint_reference(edge.local_edge);
            let n = mesh.surface_point(edge.element, xi, eta)?.frame.n;
            if q.dot(&n).abs() > TRACTION_NORMAL_TOL * q.norm() {
                return Err(Error::InvalidLoad(format!(
                    "traction {q:?} on `{label}` has normal component {:e} at element {}",
                    q.dot(&n),
                    edge.element
                )));
            }
            let half = q * (0.5 * mesh.edge_length(edge));
            let (a, b) = mesh.edge_nodes(edge);
            for node in [a, b] {
                for k in 0..3 {
                    f[3 * node + k] += half[k];
                }
            }
        }
    }
    Ok(f)
}

/// One-shot solve of the state problem for `design`.
pub fn assemble_and_solve(
    mesh: &SurfaceMesh,
    design: &DesignField,
    material: &MembraneMaterial,
    loads: &LoadCase,
) -> Result<MembraneState> {
    StateProblem::new(mesh, *material, loads)?.solve(design)
}

/// Centre forces for a given displacement field.
pub fn recover_membrane_forces(
    mesh: &SurfaceMesh,
    design: &DesignField,
    material: &MembraneMaterial,
    u: &[f64],
) -> Result<Vec<PointForce>> {
    if u.len() != 3 * mesh.num_nodes() {
        return Err(Error::InvalidArgument(format!(
            "displacement has {} components for {} nodes",
            u.len(),
            mesh.num_nodes()
        )));
    }
    let problem = StateProblem::new(mesh, *material, &LoadCase::default())?;
    Ok(problem.recover(design, u)?.0)
}
