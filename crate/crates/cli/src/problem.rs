use fibermem_core::fem::{Constraint, LoadCase};
use fibermem_core::geometry::{make_spheroid_mesh, make_strip_mesh, SurfaceMesh, Vec3};

use crate::config::{GeometryConfig, RunConfig};
use crate::CliError;

/// Mesh and load case of a benchmark.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub mesh: SurfaceMesh,
    pub loads: LoadCase,
}

/// Builds the mesh and the supports and loads that go with it.
///
/// The half spheroid is held by its symmetry ring (z fixed) plus x, y at
/// one equator node and x at the opposite one. The closed spheroid uses
/// three equator nodes to remove the six rigid modes. The strip is clamped
/// along its short side and loaded on the edge segment of the other.
pub fn build_benchmark(config: &RunConfig) -> Result<Benchmark, CliError> {
    let load = &config.load;
    match config.geometry {
        GeometryConfig::Spheroid { n_lat, n_lon, half } => {
            let mesh = make_spheroid_mesh(n_lat, n_lon, half)?;
            let loads = if half {
                LoadCase::default()
                    .with_support("symmetry", Constraint::zero(&[2]))
                    .with_support("anchor_a", Constraint::zero(&[0, 1]))
                    .with_support("anchor_c", Constraint::zero(&[0]))
            } else {
                closed_spheroid_supports()
            };
            Ok(Benchmark {
                mesh,
                loads: loads.with_pressure(load.pressure),
            })
        }
        GeometryConfig::Strip { nx, ny } => {
            let mesh = make_strip_mesh(nx, ny)?;
            let d = Vec3::from(load.traction_direction);
            let q = if load.traction == 0.0 {
                Vec3::zeros()
            } else {
                d.normalize() * load.traction
            };
            let loads = LoadCase::default()
                .with_support("clamped", Constraint::pinned())
                .with_traction("loaded", q);
            Ok(Benchmark { mesh, loads })
        }
    }
}

/// Statically determinate supports for a closed spheroid.
pub fn closed_spheroid_supports() -> LoadCase {
    LoadCase::default()
        .with_support("anchor_a", Constraint::pinned())
        .with_support("anchor_c", Constraint::zero(&[0, 2]))
        .with_support("anchor_b", Constraint::zero(&[2]))
}
