use crate::error::{Error, Result};
use crate::geometry::{SurfaceMesh, Vec3};

/// Design variables of one element, evaluated at its centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignPoint {
    pub element: usize,
    /// Thickness of the family along `s`.
    pub t1: f64,
    /// Thickness of the family along `n x s`.
    pub t2: f64,
    /// Unit tangent fibre direction; `s` and `-s` describe the same layout.
    pub s: Vec3,
}

/// Thickness bounds `[lower, upper]` for the two families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThicknessBounds {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
}

impl ThicknessBounds {
    pub fn new(lower: [f64; 2], upper: [f64; 2]) -> Result<Self> {
        for k in 0..2 {
            if !(lower[k] >= 0.0 && upper[k] >= lower[k] && upper[k].is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "family {}: bounds [{}, {}] must satisfy 0 <= lower <= upper < inf",
                    k + 1,
                    lower[k],
                    upper[k]
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn clamp(&self, family: usize, t: f64) -> f64 {
        t.clamp(self.lower[family], self.upper[family])
    }
}

/// Design of the whole surface: one point per element plus the volume budget.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignField {
    pub points: Vec<DesignPoint>,
    pub bounds: Vec<ThicknessBounds>,
    /// Area weight of each point (the element area).
    pub areas: Vec<f64>,
    pub volume_budget: f64,
}

/// How the initial fibre directions are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitDirection {
    /// Global coordinate axes projected onto the tangent plane.
    AxisAligned,
    /// Principal directions of a preliminary solve without fibres.
    PrincipalFromUnreinforced,
}

impl DesignField {
    /// Uniform design `t1 = t2` that spends the whole budget, clamped to the
    /// bounds when the budget exceeds what the bounds allow. Directions are
    /// axis aligned; see [`crate::optimizer::initial_design`] for the other mode.
    pub fn uniform(
        mesh: &SurfaceMesh,
        bounds: ThicknessBounds,
        volume_budget: f64,
    ) -> Result<Self> {
        if !(volume_budget > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "volume budget must be positive, got {volume_budget}"
            )));
        }
        let areas = mesh.element_areas()?;
        let total: f64 = areas.iter().sum();
        let t = volume_budget / (2.0 * total);
        let mut points = Vec::with_capacity(mesh.num_elements());
        for e in 0..mesh.num_elements() {
            let frame = mesh.surface_point(e, 0.0, 0.0)?.frame;
            points.push(DesignPoint {
                element: e,
                t1: bounds.clamp(0, t),
                t2: bounds.clamp(1, t),
                s: axis_aligned_direction(&frame.n),
            });
        }
        let field = Self {
            points,
            bounds: vec![bounds; mesh.num_elements()],
            areas,
            volume_budget,
        };
        if field.volume() > volume_budget * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "lower bounds alone need volume {:e}, budget is {volume_budget:e}",
                field.volume()
            )));
        }
        Ok(field)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fibre volume `sum_i (t1_i + t2_i) area_i`.
    pub fn volume(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.areas)
            .map(|(p, a)| (p.t1 + p.t2) * a)
            .sum()
    }

    pub fn thickness(&self, i: usize, family: usize) -> f64 {
        match family {
            0 => self.points[i].t1,
            _ => self.points[i].t2,
        }
    }

    pub fn set_thickness(&mut self, i: usize, family: usize, t: f64) {
        match family {
            0 => self.points[i].t1 = t,
            _ => self.points[i].t2 = t,
        }
    }

    /// Checks the bound and volume constraints and unit tangent directions.
    pub fn check_admissible(&self, mesh: &SurfaceMesh) -> Result<()> {
        if self.points.len() != mesh.num_elements()
            || self.bounds.len() != self.points.len()
            || self.areas.len() != self.points.len()
        {
            return Err(Error::InvalidArgument(
                "design field size does not match the mesh".into(),
            ));
        }
        for (i, p) in self.points.iter().enumerate() {
            if p.element != i {
                return Err(Error::InvalidArgument(format!(
                    "design point {i} refers to element {}",
                    p.element
                )));
            }
            let b = &self.bounds[i];
            for (k, t) in [p.t1, p.t2].into_iter().enumerate() {
                if !(t >= b.lower[k] && t <= b.upper[k]) {
                    return Err(Error::InvalidArgument(format!(
                        "point {i}: t{} = {t} outside [{}, {}]",
                        k + 1,
                        b.lower[k],
                        b.upper[k]
                    )));
                }
            }
            let n = mesh.surface_point(i, 0.0, 0.0)?.frame.n;
            if (p.s.norm() - 1.0).abs() > 1e-10 || p.s.dot(&n).abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "point {i}: fibre direction is not a unit tangent"
                )));
            }
        }
        if self.volume() > self.volume_budget * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "fibre volume {:e} exceeds budget {:e}",
                self.volume(),
                self.volume_budget
            )));
        }
        Ok(())
    }
}

/// First global axis whose tangential projection is not small, normalised.
pub fn axis_aligned_direction(n: &Vec3) -> Vec3 {
    let mut best = Vec3::x();
    let mut best_norm = -1.0;
    for axis in [Vec3::x(), Vec3::y(), Vec3::z()] {
        let t = axis - n * n.dot(&axis);
        let norm = t.norm();
        if norm >= 0.5 {
            return t / norm;
        }
        if norm > best_norm {
            best_norm = norm;
            best = t / norm;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_spheroid_mesh, make_strip_mesh};
    use approx::assert_relative_eq;

    #[test]
    fn uniform_design_spends_budget() {
        let mesh = make_spheroid_mesh(4, 16, true).unwrap();
        let bounds = ThicknessBounds::new([0.0, 0.0], [0.004, 0.004]).unwrap();
        let d = DesignField::uniform(&mesh, bounds, 0.01).unwrap();
        assert_relative_eq!(d.volume(), 0.01, max_relative = 1e-12);
        assert_eq!(d.points[0].t1, d.points[0].t2);
        d.check_admissible(&mesh).unwrap();
    }

    #[test]
    fn uniform_design_respects_upper_bound() {
        // Strip data: the budget exceeds what the bounds allow.
        let mesh = make_strip_mesh(4, 2).unwrap();
        let bounds = ThicknessBounds::new([0.0, 0.0], [0.008, 0.008]).unwrap();
        let d = DesignField::uniform(&mesh, bounds, 0.01).unwrap();
        assert!(d.points.iter().all(|p| p.t1 == 0.008 && p.t2 == 0.008));
        assert!(d.volume() < 0.01);
        assert_eq!(d.points[3].s, Vec3::x());
    }

    #[test]
    fn bounds_validation() {
        assert!(ThicknessBounds::new([0.0, 0.0], [-1.0, 1.0]).is_err());
        assert!(ThicknessBounds::new([0.2, 0.0], [0.1, 1.0]).is_err());
        assert!(ThicknessBounds::new([-0.1, 0.0], [0.1, 1.0]).is_err());
    }

    #[test]
    fn axis_direction_is_tangent() {
        for n in [Vec3::x(), Vec3::z(), Vec3::new(1.0, 1.0, 0.2).normalize()] {
            let s = axis_aligned_direction(&n);
            assert!(s.dot(&n).abs() < 1e-14);
            assert_relative_eq!(s.norm(), 1.0, epsilon = 1e-14);
        }
    }
}
