use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::geometry::{TangentFrame, Vec3};
use crate::material::fiber_voigt;

/// Relative tolerance below which `|M_I|` and `|M_II|` count as equal.
pub const DEFAULT_TIE_TOL: f64 = 1e-6;

/// Membrane force at one recovery point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointForce {
    pub element: usize,
    pub frame: TangentFrame,
    /// Voigt strain `(eps11, eps22, gamma12)` in `frame`.
    pub strain: Vector3<f64>,
    /// Membrane force tensor in `frame`.
    pub force: Matrix2<f64>,
    pub principal: Principal,
}

impl PointForce {
    /// Unit tangent direction of `M_I` in 3D.
    pub fn major_direction(&self) -> Vec3 {
        self.frame.from_local(&self.principal.major_direction)
    }

    /// Force tensor as a 3x3 tangential tensor.
    pub fn force_tensor(&self) -> Matrix3<f64> {
        let (e1, e2) = (self.frame.e1, self.frame.e2);
        let m = &self.force;
        e1 * e1.transpose() * m[(0, 0)]
            + e2 * e2.transpose() * m[(1, 1)]
            + (e1 * e2.transpose() + e2 * e1.transpose()) * m[(0, 1)]
    }
}

/// Eigen-decomposition of a symmetric 2x2 tensor ordered by magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Principal {
    /// Value with the larger magnitude.
    pub major: f64,
    pub minor: f64,
    /// Unit eigenvector of `major` in frame components.
    pub major_direction: Vector2<f64>,
    /// `|major|` and `|minor|` agree within the tie tolerance, so the
    /// direction carries no information.
    pub degenerate: bool,
}

/// Closed-form eigen-decomposition of a symmetric 2x2 matrix. Ties in
/// magnitude select the larger signed value as `major`.
pub fn principal_values(m: &Matrix2<f64>, tie_tol: f64) -> Principal {
    let (a, b, d) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let (hi, lo) = (mean + radius, mean - radius);
    // Direction of the larger eigenvalue; perpendicular for the smaller.
    let angle = 0.5 * (2.0 * b).atan2(a - d);
    let hi_dir = Vector2::new(angle.cos(), angle.sin());
    let lo_dir = Vector2::new(-hi_dir.y, hi_dir.x);
    let (major, minor, dir) = if hi.abs() >= lo.abs() {
        (hi, lo, hi_dir)
    } else {
        (lo, hi, lo_dir)
    };
    let degenerate =
        (major.abs() - minor.abs()).abs() <= tie_tol * (major.abs() + minor.abs() + f64::EPSILON);
    Principal {
        major,
        minor,
        major_direction: dir,
        degenerate,
    }
}

/// Flips `v` so that its largest-magnitude component is positive (first one on ties).
pub fn canonical_sign(v: Vec3) -> Vec3 {
    let mut k = 0;
    for i in 1..3 {
        if v[i].abs() > v[k].abs() * (1.0 + 1e-12) {
            k = i;
        }
    }
    if v[k] < 0.0 {
        -v
    } else {
        v
    }
}

/// Sensitivities `A_a = alpha (s_a . eps s_a)^2` for `s_1 = s` and
/// `s_2 = n x s`, with `s` given in frame components and Voigt strain.
pub fn pointwise_sensitivity_local(
    dir: &Vector2<f64>,
    strain: &Vector3<f64>,
    alpha: f64,
) -> [f64; 2] {
    let perp = Vector2::new(-dir.y, dir.x);
    let e1 = fiber_voigt(dir).dot(strain);
    let e2 = fiber_voigt(&perp).dot(strain);
    [alpha * e1 * e1, alpha * e2 * e2]
}

/// Sensitivities from a 3D fibre direction and strain tensor. `s` is
/// projected onto the tangent plane of `frame` first.
pub fn pointwise_sensitivity(
    s: &Vec3,
    frame: &TangentFrame,
    strain: &Matrix3<f64>,
    alpha: f64,
) -> [f64; 2] {
    let p = frame.tangent_projector();
    let Some(s1) = (p * s).try_normalize(1e-14) else {
        return [0.0, 0.0];
    };
    let s2 = frame.perpendicular(&s1);
    let a1 = s1.dot(&(strain * s1));
    let a2 = s2.dot(&(strain * s2));
    [alpha * a1 * a1, alpha * a2 * a2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn diagonal_tensor() {
        let p = principal_values(&Matrix2::new(2.0, 0.0, 0.0, 1.0), DEFAULT_TIE_TOL);
        assert_eq!((p.major, p.minor), (2.0, 1.0));
        assert_relative_eq!(p.major_direction, Vector2::new(1.0, 0.0));
        assert!(!p.degenerate);
    }

    #[test]
    fn compression_dominates_by_magnitude() {
        let p = principal_values(&Matrix2::new(1.0, 0.0, 0.0, -3.0), DEFAULT_TIE_TOL);
        assert_eq!((p.major, p.minor), (-3.0, 1.0));
        assert_relative_eq!(p.major_direction.y.abs(), 1.0);
    }

    #[test]
    fn pure_shear_is_a_tie_at_45_degrees() {
        let p = principal_values(&Matrix2::new(0.0, 1.0, 1.0, 0.0), DEFAULT_TIE_TOL);
        assert_relative_eq!(p.major, 1.0, epsilon = 1e-15);
        assert_relative_eq!(p.minor, -1.0, epsilon = 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(p.major_direction, Vector2::new(h, h), epsilon = 1e-15);
        assert!(p.degenerate);
    }

    #[test]
    fn hydrostatic_is_degenerate() {
        assert!(principal_values(&Matrix2::identity(), DEFAULT_TIE_TOL).degenerate);
    }

    #[test]
    fn sensitivity_examples() {
        let frame = TangentFrame::from_normal_and_tangent(Vec3::z(), Vec3::x()).unwrap();
        let zero = pointwise_sensitivity(&Vec3::x(), &frame, &Matrix3::zeros(), 1.0);
        assert_eq!(zero, [0.0, 0.0]);
        let eps = Matrix3::from_diagonal(&Vec3::new(0.01, 0.0, 0.0));
        let a = pointwise_sensitivity(&Vec3::x(), &frame, &eps, 2.0);
        assert_relative_eq!(a[0], 2.0e-4, max_relative = 1e-14);
        assert_eq!(a[1], 0.0);
        let b = pointwise_sensitivity(&Vec3::y(), &frame, &eps, 2.0);
        assert_relative_eq!(b[1], a[0], max_relative = 1e-14);
        assert_eq!(b[0], 0.0);
    }

    proptest! {
        #[test]
        fn eigenpairs_reconstruct(a in -5.0..5.0f64, b in -5.0..5.0f64, d in -5.0..5.0f64) {
            let m = Matrix2::new(a, b, b, d);
            let p = principal_values(&m, DEFAULT_TIE_TOL);
            let v = p.major_direction;
            prop_assert!((v.norm() - 1.0).abs() < 1e-14);
            prop_assert!((m * v - v * p.major).norm() < 1e-12);
            prop_assert!(p.major.abs() >= p.minor.abs());
            prop_assert!((p.major + p.minor - a - d).abs() < 1e-12);
        }

        #[test]
        fn voigt_and_tensor_sensitivities_agree(
            theta in 0.0..std::f64::consts::PI,
            e11 in -1.0..1.0f64, e22 in -1.0..1.0f64, g12 in -1.0..1.0f64,
        ) {
            let frame = TangentFrame::from_normal_and_tangent(
                Vec3::new(0.2, -0.3, 1.0), Vec3::new(1.0, 0.5, 0.0)).unwrap();
            let dir = Vector2::new(theta.cos(), theta.sin());
            let voigt = Vector3::new(e11, e22, g12);
            let eps = crate::material::voigt_to_strain(&frame, &voigt);
            let s = frame.from_local(&dir);
            let a = pointwise_sensitivity_local(&dir, &voigt, 1.5);
            let b = pointwise_sensitivity(&s, &frame, &eps, 1.5);
            prop_assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
            prop_assert!(a[0] >= 0.0 && a[1] >= 0.0);
        }
    }
}
