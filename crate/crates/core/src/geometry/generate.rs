//! Structured meshes of the two benchmark surfaces.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use super::{BoundaryEdge, SurfaceMesh, Vec3};
use crate::error::{Error, Result};

/// Oblate spheroid `x^2 + y^2 + (2z)^2 = 1`.
pub fn make_spheroid_mesh(n_lat: usize, n_lon: usize, half: bool) -> Result<SurfaceMesh> {
    make_ellipsoid_mesh(n_lat, n_lon, half, 1.0, 0.5)
}

/// Quad mesh of the ellipsoid of revolution `(x^2 + y^2)/a^2 + z^2/c^2 = 1`.
///
/// Each hemisphere is a polar cap plus `n_lat` latitude bands of `n_lon`
/// elements. The cap is the equiangular gnomonic image of a cube face with
/// `k = n_lon / 4` elements per side, so its `4k` boundary nodes sit at
/// uniformly spaced longitudes and every band node shares its meridian with
/// one of them. A hemisphere therefore has `k^2 + n_lat * n_lon` elements.
///
/// With `half = true` only `z >= 0` is meshed; the equator is labelled
/// `symmetry` (node set and boundary edges). Both variants label the node set
/// `equator` and the single-node sets `anchor_a`, `anchor_b`, `anchor_c` at
/// equator longitudes -45, 45 and 135 degrees; `anchor_a` and `anchor_c` are
/// diametrically opposite.
pub fn make_ellipsoid_mesh(
    n_lat: usize,
    n_lon: usize,
    half: bool,
    equatorial_radius: f64,
    polar_radius: f64,
) -> Result<SurfaceMesh> {
    if n_lat < 2 || n_lon < 4 {
        return Err(Error::InvalidArgument(format!(
            "spheroid resolution needs n_lat >= 2 and n_lon >= 4, got ({n_lat}, {n_lon})"
        )));
    }
    if !n_lon.is_multiple_of(4) {
        return Err(Error::InvalidArgument(format!(
            "n_lon must be a multiple of 4, got {n_lon}"
        )));
    }
    if !(equatorial_radius > 0.0 && polar_radius > 0.0) {
        return Err(Error::InvalidArgument("radii must be positive".into()));
    }
    let k = n_lon / 4;
    let scale = |d: Vec3| {
        let d = d.normalize();
        Vec3::new(
            equatorial_radius * d.x,
            equatorial_radius * d.y,
            polar_radius * d.z,
        )
    };

    let mut nodes = Vec::new();
    let cap = |i: usize, j: usize| i + j * (k + 1);
    let angle = |i: usize| -FRAC_PI_4 + FRAC_PI_2 * i as f64 / k as f64;
    for j in 0..=k {
        for i in 0..=k {
            nodes.push(scale(Vec3::new(angle(i).tan(), angle(j).tan(), 1.0)));
        }
    }

    // Cap boundary walked with increasing longitude, starting at -45 degrees.
    let mut ring0 = Vec::with_capacity(n_lon);
    ring0.extend((0..k).map(|j| cap(k, j)));
    ring0.extend((1..=k).rev().map(|i| cap(i, k)));
    ring0.extend((1..=k).rev().map(|j| cap(0, j)));
    ring0.extend((0..k).map(|i| cap(i, 0)));

    let mut rings = vec![ring0];
    for r in 1..=n_lat {
        let mut ring = Vec::with_capacity(n_lon);
        for m in 0..n_lon {
            let phi = -FRAC_PI_4 + std::f64::consts::TAU * m as f64 / n_lon as f64;
            let boundary = (1.0 / phi.cos().abs().max(phi.sin().abs())).atan();
            let theta = boundary + (FRAC_PI_2 - boundary) * r as f64 / n_lat as f64;
            let z = if r == n_lat { 0.0 } else { theta.cos() };
            ring.push(nodes.len());
            nodes.push(scale(Vec3::new(
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                z,
            )));
        }
        rings.push(ring);
    }

    let mut elements = Vec::with_capacity(2 * (k * k + n_lat * n_lon));
    for j in 0..k {
        for i in 0..k {
            elements.push([cap(i, j), cap(i + 1, j), cap(i + 1, j + 1), cap(i, j + 1)]);
        }
    }
    let mut symmetry_edges = Vec::with_capacity(n_lon);
    for r in 0..n_lat {
        for m in 0..n_lon {
            let m1 = (m + 1) % n_lon;
            if r == n_lat - 1 {
                symmetry_edges.push(BoundaryEdge {
                    element: elements.len(),
                    local_edge: 1,
                });
            }
            elements.push([rings[r][m], rings[r + 1][m], rings[r + 1][m1], rings[r][m1]]);
        }
    }

    let equator = rings[n_lat].clone();
    let pole = k.is_multiple_of(2).then(|| cap(k / 2, k / 2));

    let mut south_pole = None;
    if !half {
        let north_nodes = nodes.len();
        let mut mirror: Vec<usize> = (0..north_nodes).collect();
        for a in 0..north_nodes {
            if !equator.contains(&a) {
                mirror[a] = nodes.len();
                let x = nodes[a];
                nodes.push(Vec3::new(x.x, x.y, -x.z));
            }
        }
        let north = elements.len();
        for e in 0..north {
            let [a, b, c, d] = elements[e];
            elements.push([mirror[a], mirror[d], mirror[c], mirror[b]]);
        }
        south_pole = pole.map(|p| mirror[p]);
    }

    let mut mesh = SurfaceMesh::new(nodes, elements)?
        .with_node_set("equator", equator.clone())?
        .with_node_set("anchor_a", vec![equator[0]])?
        .with_node_set("anchor_b", vec![equator[k]])?
        .with_node_set("anchor_c", vec![equator[2 * k]])?;
    if let Some(p) = pole {
        mesh = mesh.with_node_set("north_pole", vec![p])?;
    }
    if let Some(p) = south_pole {
        mesh = mesh.with_node_set("south_pole", vec![p])?;
    }
    if half {
        mesh = mesh
            .with_node_set("symmetry", equator)?
            .with_boundary("symmetry", symmetry_edges)?;
    }
    Ok(mesh)
}

/// Geometry of the rectangular strip and the position of its loaded edge segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripLayout {
    pub length: f64,
    pub width: f64,
    pub load_length: f64,
    /// `y` coordinate of the centre of the loaded segment on the side `x = length`.
    pub load_center: f64,
}

impl Default for StripLayout {
    fn default() -> Self {
        Self {
            length: 1.0,
            width: 0.5,
            load_length: 0.1,
            load_center: 0.25,
        }
    }
}

/// `nx x ny` grid on `[0, 1] x [0, 0.5]` with a centred load segment of length 0.1.
pub fn make_strip_mesh(nx: usize, ny: usize) -> Result<SurfaceMesh> {
    make_strip_mesh_with(nx, ny, &StripLayout::default())
}

/// Planar strip in the `z = 0` plane.
///
/// Boundary labels: `clamped` (side `x = 0`), `loaded` (edges of side
/// `x = length` whose midpoint lies in the load segment), `right` (all of side
/// `x = length`) and `free` (every boundary edge not clamped or loaded). The
/// node set `clamped` holds the nodes on `x = 0`.
pub fn make_strip_mesh_with(nx: usize, ny: usize, layout: &StripLayout) -> Result<SurfaceMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!(
            "strip needs nx, ny >= 1, got ({nx}, {ny})"
        )));
    }
    let StripLayout {
        length,
        width,
        load_length,
        load_center,
    } = *layout;
    if !(length > 0.0 && width > 0.0 && load_length >= 0.0) {
        return Err(Error::InvalidArgument(
            "strip dimensions must be positive".into(),
        ));
    }
    let half_load = 0.5 * load_length;
    if load_center - half_load < -1e-12 || load_center + half_load > width + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "load segment centred at {load_center} does not fit on a side of width {width}"
        )));
    }

    let id = |i: usize, j: usize| i + j * (nx + 1);
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push(Vec3::new(
                length * i as f64 / nx as f64,
                width * j as f64 / ny as f64,
                0.0,
            ));
        }
    }
    let mut elements = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            elements.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let element = |i: usize, j: usize| i + j * nx;

    let clamped: Vec<_> = (0..ny)
        .map(|j| BoundaryEdge {
            element: element(0, j),
            local_edge: 3,
        })
        .collect();
    let right: Vec<_> = (0..ny)
        .map(|j| BoundaryEdge {
            element: element(nx - 1, j),
            local_edge: 1,
        })
        .collect();
    let tol = 1e-9 * width;
    let loaded: Vec<_> = (0..ny)
        .filter(|&j| {
            let mid = width * (j as f64 + 0.5) / ny as f64;
            (mid - load_center).abs() <= half_load + tol
        })
        .map(|j| BoundaryEdge {
            element: element(nx - 1, j),
            local_edge: 1,
        })
        .collect();
    let mut free: Vec<_> = (0..nx)
        .flat_map(|i| {
            [
                BoundaryEdge {
                    element: element(i, 0),
                    local_edge: 0,
                },
                BoundaryEdge {
                    element: element(i, ny - 1),
                    local_edge: 2,
                },
            ]
        })
        .collect();
    free.extend(right.iter().filter(|e| !loaded.contains(e)).copied());

    SurfaceMesh::new(nodes, elements)?
        .with_boundary("clamped", clamped)?
        .with_boundary("loaded", loaded)?
        .with_boundary("right", right)?
        .with_boundary("free", free)?
        .with_node_set("clamped", (0..=ny).map(|j| id(0, j)).collect())
}
