use nalgebra::{SMatrix, SVector, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{SurfaceMesh, SurfacePoint, Vec3, GAUSS_2X2};
use crate::material::{membrane_tangent_local, MembraneMaterial, MembraneTangent};
use crate::optimizer::DesignPoint;

pub type ElementMatrix = SMatrix<f64, 12, 12>;
pub type ElementVector = SVector<f64, 12>;
/// Maps the 12 nodal displacement components to `(eps11, eps22, gamma12)`.
pub type StrainOperator = SMatrix<f64, 3, 12>;

/// Geometry of one element at its four Gauss points and its centre.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub gauss: [SurfacePoint; 4],
    pub weights: [f64; 4],
    pub centre: SurfacePoint,
}

impl ElementGeometry {
    pub fn new(mesh: &SurfaceMesh, element: usize) -> Result<Self> {
        let mut gauss = Vec::with_capacity(4);
        let mut weights = [0.0; 4];
        for (q, &(xi, eta, w)) in GAUSS_2X2.iter().enumerate() {
            gauss.push(mesh.surface_point(element, xi, eta)?);
            weights[q] = w;
        }
        Ok(Self {
            gauss: [gauss[0], gauss[1], gauss[2], gauss[3]],
            weights,
            centre: mesh.surface_point(element, 0.0, 0.0)?,
        })
    }

    /// `w_q |g1 x g2|` at each Gauss point.
    pub fn area_weights(&self) -> [f64; 4] {
        std::array::from_fn(|q| self.weights[q] * self.gauss[q].jacobian)
    }

    pub fn area(&self) -> f64 {
        self.area_weights().iter().sum()
    }
}

/// Strain operator at one point: the in-plane part of the symmetric
/// tangential displacement gradient in the point's frame.
pub fn strain_operator(point: &SurfacePoint) -> StrainOperator {
    let (e1, e2) = (point.frame.e1, point.frame.e2);
    let mut b = StrainOperator::zeros();
    for a in 0..4 {
        let g = point.grad[a];
        for k in 0..3 {
            b[(0, 3 * a + k)] = g.x * e1[k];
            b[(1, 3 * a + k)] = g.y * e2[k];
            b[(2, 3 * a + k)] = g.y * e1[k] + g.x * e2[k];
        }
    }
    b
}

/// Fibre direction `s` in the frame of `point`, after projection onto its tangent plane.
pub fn local_fiber_direction(
    point: &SurfacePoint,
    s: &Vec3,
    element: usize,
) -> Result<Vector2<f64>> {
    point.frame.local_direction(s).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "element {element}: fibre direction {s:?} is normal to the surface"
        ))
    })
}

/// Membrane stiffness at a point for the design of its element.
pub fn point_tangent(
    point: &SurfacePoint,
    design: &DesignPoint,
    material: &MembraneMaterial,
) -> Result<MembraneTangent> {
    let dir = local_fiber_direction(point, &design.s, design.element)?;
    Ok(membrane_tangent_local(material, design.t1, design.t2, &dir))
}

/// `K_e = sum_q w_q J_q B_q^T S_q B_q` with 2x2 Gauss quadrature.
pub fn element_stiffness_with(
    geometry: &ElementGeometry,
    design: &DesignPoint,
    material: &MembraneMaterial,
) -> Result<ElementMatrix> {
    let mut k = ElementMatrix::zeros();
    let weights = geometry.area_weights();
    for (point, w) in geometry.gauss.iter().zip(weights) {
        let b = strain_operator(point);
        let d = point_tangent(point, design, material)?.matrix;
        let db = d * b * w;
        k += b.transpose() * db;
    }
    // Remove round-off asymmetry so the assembled matrix is exactly symmetric.
    Ok((k + k.transpose()) * 0.5)
}

/// Element stiffness matrix for `design` on `element` of `mesh`. Rows and
/// columns follow local node order with `(x, y, z)` components per node.
pub fn element_stiffness(
    mesh: &SurfaceMesh,
    element: usize,
    design: &DesignPoint,
    material: &MembraneMaterial,
) -> Result<ElementMatrix> {
    if design.element != element {
        return Err(Error::InvalidArgument(format!(
            "design point of element {} used for element {element}",
            design.element
        )));
    }
    element_stiffness_with(&ElementGeometry::new(mesh, element)?, design, material)
}

/// Consistent nodal forces of a uniform pressure along the outward normal:
/// `f_a = p sum_q w_q N_a(q) (g1 x g2)(q)`.
pub fn pressure_forces(geometry: &ElementGeometry, pressure: f64) -> [Vec3; 4] {
    let mut f = [Vec3::zeros(); 4];
    for (q, point) in geometry.gauss.iter().enumerate() {
        let scaled_normal = point.frame.n * (point.jacobian * geometry.weights[q] * pressure);
        for (fa, &na) in f.iter_mut().zip(point.shape.iter()) {
            *fa += scaled_normal * na;
        }
    }
    f
}

/// Voigt strain at a point from the 12 element displacement components.
pub fn point_strain(point: &SurfacePoint, u_e: &ElementVector) -> Vector3<f64> {
    strain_operator(point) * u_e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_spheroid_mesh;
    use approx::assert_relative_eq;

    fn square(side: f64) -> SurfaceMesh {
        SurfaceMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(side, 0.0, 0.0),
                Vec3::new(side, side, 0.0),
                Vec3::new(0.0, side, 0.0),
            ],
            vec![[0, 1, 2, 3]],
        )
        .unwrap()
    }

    fn design(t1: f64, t2: f64, s: Vec3) -> DesignPoint {
        DesignPoint {
            element: 0,
            t1,
            t2,
            s,
        }
    }

    fn skewed_element() -> SurfaceMesh {
        SurfaceMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.3, 0.1, 0.2),
                Vec3::new(1.1, 0.9, 0.5),
                Vec3::new(-0.2, 1.0, 0.1),
            ],
            vec![[0, 1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn rigid_translation_has_no_energy() {
        let mesh = skewed_element();
        let mat = MembraneMaterial::new(1.0, 0.3, 0.005, 1.0).unwrap();
        let k = element_stiffness(&mesh, 0, &design(0.002, 0.001, Vec3::x()), &mat).unwrap();
        let t = Vec3::new(0.3, -1.2, 0.7);
        let v = ElementVector::from_fn(|i, _| t[i % 3]);
        assert!((k * v).norm() < 1e-10);
        assert_relative_eq!(k, k.transpose(), epsilon = 0.0);
    }

    #[test]
    fn uniaxial_stretch_energy() {
        // u_x = x on the unit square gives eps11 = 1 and nothing else.
        let mesh = square(1.0);
        let mat = MembraneMaterial::new(2.5, 0.0, 0.005, 1.0).unwrap();
        let k = element_stiffness(&mesh, 0, &design(0.0, 0.0, Vec3::x()), &mat).unwrap();
        let mut v = ElementVector::zeros();
        for (a, x) in mesh.nodes().iter().enumerate() {
            v[3 * a] = x.x;
        }
        assert_relative_eq!(
            0.5 * v.dot(&(k * v)),
            0.5 * 2.5 * 0.005,
            max_relative = 1e-13
        );
    }

    #[test]
    fn stiffness_is_linear_in_thicknesses() {
        let mesh = skewed_element();
        let s = Vec3::new(1.0, 0.4, 0.0);
        let base = MembraneMaterial::new(1.0, 0.3, 0.005, 2.0).unwrap();
        let scaled = MembraneMaterial::new(1.0, 0.3, 0.015, 2.0).unwrap();
        let k1 = element_stiffness(&mesh, 0, &design(0.002, 0.001, s), &base).unwrap();
        let k3 = element_stiffness(&mesh, 0, &design(0.006, 0.003, s), &scaled).unwrap();
        assert_relative_eq!(k3, k1 * 3.0, max_relative = 1e-12);
    }

    #[test]
    fn stiffness_is_positive_semidefinite() {
        let mesh = skewed_element();
        let mat = MembraneMaterial::new(1.0, 0.3, 0.005, 1.0).unwrap();
        let k = element_stiffness(&mesh, 0, &design(0.004, 0.0, Vec3::y()), &mat).unwrap();
        let eig = k.symmetric_eigenvalues();
        let max = eig.max();
        assert!(eig.iter().all(|&l| l > -1e-12 * max));
        // Rigid translations and rotations span six zero-energy modes.
        let null = eig.iter().filter(|&&l| l.abs() <= 1e-10 * max).count();
        assert!(null >= 6, "only {null} zero modes");
    }

    #[test]
    fn design_point_must_match_element() {
        let mesh = square(1.0);
        let mat = MembraneMaterial::new(1.0, 0.3, 0.005, 1.0).unwrap();
        let mut d = design(0.0, 0.0, Vec3::x());
        d.element = 3;
        assert!(element_stiffness(&mesh, 0, &d, &mat).is_err());
        let normal = design(0.0, 0.0, Vec3::z());
        assert!(element_stiffness(&mesh, 0, &normal, &mat).is_err());
    }

    #[test]
    fn pressure_forces_sum_to_projected_area() {
        let mesh = square(2.0);
        let geo = ElementGeometry::new(&mesh, 0).unwrap();
        let f = pressure_forces(&geo, 3.0);
        let total: Vec3 = f.iter().sum();
        assert_relative_eq!(total, Vec3::new(0.0, 0.0, 12.0), epsilon = 1e-13);
        for fa in f {
            assert_relative_eq!(fa.z, 3.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn area_matches_mesh() {
        let mesh = make_spheroid_mesh(4, 16, true).unwrap();
        for e in [0, 7, 40] {
            let geo = ElementGeometry::new(&mesh, e).unwrap();
            assert_relative_eq!(
                geo.area(),
                mesh.element_area(e).unwrap(),
                max_relative = 1e-13
            );
        }
    }
}
