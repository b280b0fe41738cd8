use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fibermem_core::fem::MembraneState;
use fibermem_core::geometry::SurfaceMesh;
use fibermem_core::optimizer::{DesignField, RunHistory};
use serde::Serialize;

use crate::CliError;

/// VTK cell type of a 4-node quadrilateral.
const VTK_QUAD: u8 = 9;

fn check_sizes(
    mesh: &SurfaceMesh,
    design: &DesignField,
    state: &MembraneState,
) -> Result<(), CliError> {
    let n = mesh.num_elements();
    if design.len() != n || state.point_forces.len() != n {
        return Err(CliError::Config(format!(
            "{n} elements but {} design points and {} force points",
            design.len(),
            state.point_forces.len()
        )));
    }
    Ok(())
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Legacy ASCII unstructured grid with cell data `t1`, `t2`, `fiber`,
/// `M_I` and `M_II`. Numbers use the shortest round-trip representation,
/// so identical inputs give identical bytes.
pub fn vtk_string(
    mesh: &SurfaceMesh,
    design: &DesignField,
    state: &MembraneState,
) -> Result<String, CliError> {
    check_sizes(mesh, design, state)?;
    let mut out = String::new();
    let nodes = mesh.nodes();
    let elements = mesh.elements();
    let ne = elements.len();
    // Writing to a String cannot fail.
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "fibre reinforced membrane");
    let _ = writeln!(out, "ASCII");
    let _ = writeln!(out, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(out, "POINTS {} double", nodes.len());
    for p in nodes {
        let _ = writeln!(out, "{:e} {:e} {:e}", p.x, p.y, p.z);
    }
    let _ = writeln!(out, "CELLS {ne} {}", 5 * ne);
    for e in elements {
        let _ = writeln!(out, "4 {} {} {} {}", e[0], e[1], e[2], e[3]);
    }
    let _ = writeln!(out, "CELL_TYPES {ne}");
    for _ in elements {
        let _ = writeln!(out, "{VTK_QUAD}");
    }
    let _ = writeln!(out, "CELL_DATA {ne}");
    let scalar = |out: &mut String, name: &str, values: &mut dyn Iterator<Item = f64>| {
        let _ = writeln!(out, "SCALARS {name} double 1");
        let _ = writeln!(out, "LOOKUP_TABLE default");
        for v in values {
            let _ = writeln!(out, "{v:e}");
        }
    };
    scalar(&mut out, "t1", &mut design.points.iter().map(|p| p.t1));
    scalar(&mut out, "t2", &mut design.points.iter().map(|p| p.t2));
    let _ = writeln!(out, "VECTORS fiber double");
    for p in &design.points {
        let _ = writeln!(out, "{:e} {:e} {:e}", p.s.x, p.s.y, p.s.z);
    }
    scalar(
        &mut out,
        "M_I",
        &mut state.point_forces.iter().map(|f| f.principal.major),
    );
    scalar(
        &mut out,
        "M_II",
        &mut state.point_forces.iter().map(|f| f.principal.minor),
    );
    Ok(out)
}

pub fn export_fields(
    mesh: &SurfaceMesh,
    design: &DesignField,
    state: &MembraneState,
    path: &Path,
) -> Result<(), CliError> {
    let text = vtk_string(mesh, design, state)?;
    write_file(path, text.as_bytes())
}

#[derive(Serialize)]
struct HistoryRow {
    iteration: usize,
    compliance: f64,
    volume: f64,
    max_direction_change: f64,
    inner_iterations: usize,
}

#[derive(Serialize)]
struct DesignRow {
    element: usize,
    x: f64,
    y: f64,
    z: f64,
    t1: f64,
    t2: f64,
    s_x: f64,
    s_y: f64,
    s_z: f64,
    m_i: f64,
    m_ii: f64,
    dir_x: f64,
    dir_y: f64,
    dir_z: f64,
}

fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| CliError::Config(format!("csv: {e}")))?;
    }
    w.into_inner()
        .map_err(|e| CliError::Config(format!("csv: {e}")))
}

pub fn history_csv(history: &RunHistory) -> Result<Vec<u8>, CliError> {
    csv_bytes(history.entries.iter().map(|h| HistoryRow {
        iteration: h.iteration,
        compliance: h.compliance,
        volume: h.volume,
        max_direction_change: h.max_direction_change,
        inner_iterations: h.inner_iterations,
    }))
}

pub fn design_csv(
    mesh: &SurfaceMesh,
    design: &DesignField,
    state: &MembraneState,
) -> Result<Vec<u8>, CliError> {
    check_sizes(mesh, design, state)?;
    csv_bytes(design.points.iter().zip(&state.point_forces).map(|(p, f)| {
        let c = mesh.centroid(p.element);
        let d = f.major_direction();
        DesignRow {
            element: p.element,
            x: c.x,
            y: c.y,
            z: c.z,
            t1: p.t1,
            t2: p.t2,
            s_x: p.s.x,
            s_y: p.s.y,
            s_z: p.s.z,
            m_i: f.principal.major,
            m_ii: f.principal.minor,
            dir_x: d.x,
            dir_y: d.y,
            dir_z: d.z,
        }
    }))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_file(path, bytes)
}
