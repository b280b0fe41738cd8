use super::design::DesignField;
use crate::error::{Error, Result};
use crate::fem::PointForce;

/// Outcome of one orientation update.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotationReport {
    /// Largest `1 - |cos|` between the thick family's direction before and after.
    pub max_change: f64,
    /// Points whose families were exchanged so that `t1 >= t2`.
    pub swapped: usize,
    /// Points whose principal values tie; their direction was kept.
    pub ties: usize,
}

/// Turns the thicker family towards the major principal force direction.
///
/// At each point the families are first exchanged if `t1 < t2` (with `s`
/// replaced by `n x s`, so the layout is unchanged), then `s` is set to the
/// direction of `M_I`, signed to agree with the previous `s`. Points where
/// `||M_I| - |M_II|| <= tie_tol (|M_I| + |M_II| + eps)` keep their direction.
pub fn rotate_fibers(
    forces: &[PointForce],
    design: &mut DesignField,
    tie_tol: f64,
) -> Result<RotationReport> {
    if forces.len() != design.points.len() {
        return Err(Error::InvalidArgument(format!(
            "{} force points for {} design points",
            forces.len(),
            design.points.len()
        )));
    }
    let mut report = RotationReport::default();
    for (i, f) in forces.iter().enumerate() {
        let p = &mut design.points[i];
        if f.element != p.element {
            return Err(Error::InvalidArgument(format!(
                "force point {i} belongs to element {}, design point to {}",
                f.element, p.element
            )));
        }
        let frame = &f.frame;
        if p.t1 < p.t2 {
            std::mem::swap(&mut p.t1, &mut p.t2);
            let b = &mut design.bounds[i];
            b.lower.swap(0, 1);
            b.upper.swap(0, 1);
            p.s = frame.perpendicular(&p.s);
            report.swapped += 1;
        }
        let (m1, m2) = (f.principal.major.abs(), f.principal.minor.abs());
        if (m1 - m2).abs() <= tie_tol * (m1 + m2 + f64::EPSILON) {
            report.ties += 1;
            continue;
        }
        let mut s = f.major_direction();
        if s.dot(&p.s) < 0.0 {
            s = -s;
        }
        let change = 1.0 - s.dot(&p.s).abs().min(1.0);
        report.max_change = report.max_change.max(change);
        p.s = s;
    }
    Ok(report)
}
