//! Discrete surfaces made of bilinear quadrilaterals, tangent frames and the
//! projection operators the membrane law is written in.
//!
//! Elements use the usual counter-clockwise node order of the reference square
//! `(-1,-1), (1,-1), (1,1), (-1,1)`. The element normal is `g1 x g2` where
//! `g1 = dx/dxi` and `g2 = dx/deta`, so the node order fixes the orientation.

mod generate;

pub use generate::{
    make_ellipsoid_mesh, make_spheroid_mesh, make_strip_mesh, make_strip_mesh_with, StripLayout,
};

use std::collections::{BTreeMap, HashSet};

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Abscissa of the two-point Gauss rule, `1/sqrt(3)`.
pub const GAUSS_ABSCISSA: f64 = 0.577_350_269_189_625_8;

/// 2x2 Gauss points `(xi, eta, weight)` of the reference square.
pub const GAUSS_2X2: [(f64, f64, f64); 4] = [
    (-GAUSS_ABSCISSA, -GAUSS_ABSCISSA, 1.0),
    (GAUSS_ABSCISSA, -GAUSS_ABSCISSA, 1.0),
    (GAUSS_ABSCISSA, GAUSS_ABSCISSA, 1.0),
    (-GAUSS_ABSCISSA, GAUSS_ABSCISSA, 1.0),
];

const REFERENCE_NODES: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

/// Relative threshold below which `|g1 x g2|` counts as a collapsed element.
const DEGENERACY_TOL: f64 = 1e-12;

/// Bilinear shape functions at a reference point.
pub fn shape_functions(xi: f64, eta: f64) -> [f64; 4] {
    let mut n = [0.0; 4];
    for (a, &(xa, ya)) in REFERENCE_NODES.iter().enumerate() {
        n[a] = 0.25 * (1.0 + xa * xi) * (1.0 + ya * eta);
    }
    n
}

/// Derivatives `[dN/dxi, dN/deta]` of the bilinear shape functions.
pub fn shape_derivatives(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    let mut d = [[0.0; 2]; 4];
    for (a, &(xa, ya)) in REFERENCE_NODES.iter().enumerate() {
        d[a][0] = 0.25 * xa * (1.0 + ya * eta);
        d[a][1] = 0.25 * ya * (1.0 + xa * xi);
    }
    d
}

/// One side of an element: local edge `k` runs from local node `k` to `(k + 1) % 4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoundaryEdge {
    pub element: usize,
    pub local_edge: usize,
}

/// Orthonormal frame of the tangent plane plus the unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentFrame {
    pub n: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
}

impl TangentFrame {
    /// Frame with `e1` along the projection of `g1` onto the plane normal to `n`.
    pub fn from_normal_and_tangent(n: Vec3, g1: Vec3) -> Option<Self> {
        let n = n.try_normalize(0.0)?;
        let t = g1 - n * n.dot(&g1);
        let e1 = t.try_normalize(DEGENERACY_TOL * g1.norm())?;
        let e2 = n.cross(&e1);
        Some(Self { n, e1, e2 })
    }

    /// `P = I - n (x) n`.
    pub fn tangent_projector(&self) -> Matrix3<f64> {
        Matrix3::identity() - self.normal_projector()
    }

    /// `N = n (x) n`.
    pub fn normal_projector(&self) -> Matrix3<f64> {
        self.n * self.n.transpose()
    }

    /// Components of `v` along `(e1, e2)`.
    pub fn to_local(&self, v: &Vec3) -> Vector2<f64> {
        Vector2::new(v.dot(&self.e1), v.dot(&self.e2))
    }

    pub fn from_local(&self, v: &Vector2<f64>) -> Vec3 {
        self.e1 * v.x + self.e2 * v.y
    }

    /// Unit in-plane direction of `s` expressed in `(e1, e2)`. The normal part
    /// of `s` is discarded, so `s` only has to be tangent up to discretisation error.
    pub fn local_direction(&self, s: &Vec3) -> Option<Vector2<f64>> {
        self.to_local(s).try_normalize(1e-14)
    }

    /// `s_perp = n x s`, the second fibre direction.
    pub fn perpendicular(&self, s: &Vec3) -> Vec3 {
        self.n.cross(s)
    }
}

/// Fibre projector `S = s (x) s`.
pub fn fiber_projector(s: &Vec3) -> Matrix3<f64> {
    s * s.transpose()
}

/// Geometric data of an element at one reference point.
#[derive(Debug, Clone, Copy)]
pub struct SurfacePoint {
    pub position: Vec3,
    pub frame: TangentFrame,
    /// Area scale `|g1 x g2|` of the isoparametric map.
    pub jacobian: f64,
    /// Tangential gradients of the four shape functions in frame components.
    pub grad: [Vector2<f64>; 4],
    pub shape: [f64; 4],
}

#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    nodes: Vec<Vec3>,
    elements: Vec<[usize; 4]>,
    boundary_edges: BTreeMap<String, Vec<BoundaryEdge>>,
    node_sets: BTreeMap<String, Vec<usize>>,
}

impl SurfaceMesh {
    /// Builds a mesh after checking that every element has four distinct, valid node indices.
    pub fn new(nodes: Vec<Vec3>, elements: Vec<[usize; 4]>) -> Result<Self> {
        for (e, conn) in elements.iter().enumerate() {
            for (k, &a) in conn.iter().enumerate() {
                if a >= nodes.len() {
                    return Err(Error::InvalidArgument(format!(
                        "element {e} references node {a}, mesh has {} nodes",
                        nodes.len()
                    )));
                }
                if conn[..k].contains(&a) {
                    return Err(Error::InvalidArgument(format!(
                        "element {e} repeats node {a}"
                    )));
                }
            }
        }
        Ok(Self {
            nodes,
            elements,
            boundary_edges: BTreeMap::new(),
            node_sets: BTreeMap::new(),
        })
    }

    pub fn with_boundary(mut self, label: &str, mut edges: Vec<BoundaryEdge>) -> Result<Self> {
        for edge in &edges {
            if edge.element >= self.elements.len() || edge.local_edge >= 4 {
                return Err(Error::InvalidArgument(format!(
                    "boundary `{label}` has invalid edge {edge:?}"
                )));
            }
        }
        edges.sort();
        edges.dedup();
        self.boundary_edges.insert(label.to_string(), edges);
        Ok(self)
    }

    pub fn with_node_set(mut self, label: &str, mut nodes: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = nodes.iter().find(|&&a| a >= self.nodes.len()) {
            return Err(Error::InvalidArgument(format!(
                "node set `{label}` references node {bad}"
            )));
        }
        nodes.sort_unstable();
        nodes.dedup();
        self.node_sets.insert(label.to_string(), nodes);
        Ok(self)
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 4]] {
        &self.elements
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn boundary(&self, label: &str) -> Result<&[BoundaryEdge]> {
        self.boundary_edges
            .get(label)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn node_set(&self, label: &str) -> Result<&[usize]> {
        self.node_sets
            .get(label)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn boundary_labels(&self) -> impl Iterator<Item = &str> {
        self.boundary_edges.keys().map(String::as_str)
    }

    pub fn node_set_labels(&self) -> impl Iterator<Item = &str> {
        self.node_sets.keys().map(String::as_str)
    }

    pub fn element_coords(&self, element: usize) -> [Vec3; 4] {
        let conn = self.elements[element];
        [
            self.nodes[conn[0]],
            self.nodes[conn[1]],
            self.nodes[conn[2]],
            self.nodes[conn[3]],
        ]
    }

    /// Global node indices `(start, end)` of a boundary edge.
    pub fn edge_nodes(&self, edge: BoundaryEdge) -> (usize, usize) {
        let conn = self.elements[edge.element];
        (conn[edge.local_edge], conn[(edge.local_edge + 1) % 4])
    }

    pub fn edge_length(&self, edge: BoundaryEdge) -> f64 {
        let (a, b) = self.edge_nodes(edge);
        (self.nodes[b] - self.nodes[a]).norm()
    }

    /// Reference coordinates of the midpoint of a local edge.
    pub fn edge_midpoint_reference(local_edge: usize) -> (f64, f64) {
        let (x0, y0) = REFERENCE_NODES[local_edge];
        let (x1, y1) = REFERENCE_NODES[(local_edge + 1) % 4];
        (0.5 * (x0 + x1), 0.5 * (y0 + y1))
    }

    pub fn surface_point(&self, element: usize, xi: f64, eta: f64) -> Result<SurfacePoint> {
        let x = self.element_coords(element);
        let dn = shape_derivatives(xi, eta);
        let shape = shape_functions(xi, eta);
        let mut g1 = Vec3::zeros();
        let mut g2 = Vec3::zeros();
        let mut position = Vec3::zeros();
        for a in 0..4 {
            g1 += x[a] * dn[a][0];
            g2 += x[a] * dn[a][1];
            position += x[a] * shape[a];
        }
        let cross = g1.cross(&g2);
        let jacobian = cross.norm();
        if !(jacobian > DEGENERACY_TOL * g1.norm() * g2.norm()) {
            return Err(Error::DegenerateElement {
                element,
                detail: format!("area scale {jacobian:e} at ({xi}, {eta})"),
            });
        }
        let frame =
            TangentFrame::from_normal_and_tangent(cross / jacobian, g1).ok_or_else(|| {
                Error::DegenerateElement {
                    element,
                    detail: "zero tangent vector".into(),
                }
            })?;
        let jac = Matrix2::new(
            g1.dot(&frame.e1),
            g1.dot(&frame.e2),
            g2.dot(&frame.e1),
            g2.dot(&frame.e2),
        );
        let inv = jac.try_inverse().ok_or_else(|| Error::DegenerateElement {
            element,
            detail: "singular in-plane Jacobian".into(),
        })?;
        let mut grad = [Vector2::zeros(); 4];
        for a in 0..4 {
            grad[a] = inv * Vector2::new(dn[a][0], dn[a][1]);
        }
        Ok(SurfacePoint {
            position,
            frame,
            jacobian,
            grad,
            shape,
        })
    }

    /// Isoparametric centre `x(0, 0)`, the design and recovery point of the element.
    pub fn centroid(&self, element: usize) -> Vec3 {
        let x = self.element_coords(element);
        (x[0] + x[1] + x[2] + x[3]) * 0.25
    }

    /// Element area by 2x2 Gauss quadrature (exact for the bilinear area density of flat quads).
    pub fn element_area(&self, element: usize) -> Result<f64> {
        let mut area = 0.0;
        for &(xi, eta, w) in &GAUSS_2X2 {
            area += w * self.surface_point(element, xi, eta)?.jacobian;
        }
        Ok(area)
    }

    pub fn element_areas(&self) -> Result<Vec<f64>> {
        (0..self.num_elements())
            .map(|e| self.element_area(e))
            .collect()
    }

    pub fn total_area(&self) -> Result<f64> {
        Ok(self.element_areas()?.iter().sum())
    }

    /// `(1/3) * integral of x . n dA`; the enclosed volume for a closed, outward oriented mesh.
    pub fn enclosed_volume(&self) -> Result<f64> {
        let mut vol = 0.0;
        for e in 0..self.num_elements() {
            for &(xi, eta, w) in &GAUSS_2X2 {
                let p = self.surface_point(e, xi, eta)?;
                vol += w * p.jacobian * p.position.dot(&p.frame.n) / 3.0;
            }
        }
        Ok(vol)
    }

    /// Checks Jacobian positivity at every quadrature point and centre, and
    /// that no directed edge is shared by two elements (consistent orientation).
    pub fn validate(&self) -> Result<()> {
        for e in 0..self.num_elements() {
            self.surface_point(e, 0.0, 0.0)?;
            for &(xi, eta, _) in &GAUSS_2X2 {
                self.surface_point(e, xi, eta)?;
            }
        }
        let mut seen = HashSet::new();
        for (e, conn) in self.elements.iter().enumerate() {
            for k in 0..4 {
                if !seen.insert((conn[k], conn[(k + 1) % 4])) {
                    return Err(Error::InvalidArgument(format!(
                        "element {e} traverses edge ({}, {}) in the same direction as a neighbour",
                        conn[k],
                        conn[(k + 1) % 4]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Common unit normal if every node lies in one plane, else `None`.
    pub fn planar_normal(&self) -> Option<Vec3> {
        if self.elements.is_empty() {
            return None;
        }
        let n0 = self.surface_point(0, 0.0, 0.0).ok()?.frame.n;
        let origin = self.nodes[self.elements[0][0]];
        let scale = self
            .nodes
            .iter()
            .map(|x| (x - origin).norm())
            .fold(0.0, f64::max)
            .max(1.0);
        let flat = self
            .nodes
            .iter()
            .all(|x| (x - origin).dot(&n0).abs() <= 1e-12 * scale);
        flat.then_some(n0)
    }

    /// Node of `set` closest to `point`.
    pub fn nearest_node(&self, set: &[usize], point: &Vec3) -> Option<usize> {
        set.iter().copied().min_by(|&a, &b| {
            (self.nodes[a] - point)
                .norm_squared()
                .total_cmp(&(self.nodes[b] - point).norm_squared())
        })
    }
}

/// Tangent frame of `element` at reference coordinates `local`.
pub fn tangent_frame_at(
    mesh: &SurfaceMesh,
    element: usize,
    local: (f64, f64),
) -> Result<TangentFrame> {
    if element >= mesh.num_elements() {
        return Err(Error::InvalidArgument(format!("no element {element}")));
    }
    let (xi, eta) = local;
    if !(-1.0..=1.0).contains(&xi) || !(-1.0..=1.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!(
            "reference point ({xi}, {eta}) outside the reference square"
        )));
    }
    Ok(mesh.surface_point(element, xi, eta)?.frame)
}
