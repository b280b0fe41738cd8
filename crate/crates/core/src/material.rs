//! Fibre-reinforced membrane material.
//!
//! The base material is transversely isotropic about the surface normal. Under
//! plane stress with no transverse shear it reduces to an isotropic in-plane law
//! with moduli `delta` and `mu`. Two orthogonal fibre families of thickness `t1`
//! (along `s`) and `t2` (along `s_perp = n x s`) add `alpha * t_i * S_i (S_i : eps)`.
//!
//! The computational form is a 3x3 matrix in the Voigt basis of a tangent frame,
//! components `(11, 22, 12)` with engineering shear `2 eps_12`.

use nalgebra::{Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{fiber_projector, TangentFrame, Vec3};

/// Transversely isotropic 3D base material, symmetry axis along the surface normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseMaterial3D {
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub gamma: f64,
    pub mu: f64,
}

impl BaseMaterial3D {
    /// Full 3D stress for strain tensor `eps` at a point with unit normal `n`.
    pub fn stress(&self, n: &Vec3, eps: &Matrix3<f64>) -> Matrix3<f64> {
        let nn = n * n.transpose();
        let p = Matrix3::identity() - nn;
        let n_eps = nn.component_mul(eps).sum();
        let p_eps = p.component_mul(eps).sum();
        nn * (self.delta1 * n_eps + self.delta2 * p_eps)
            + p * (self.delta2 * n_eps + self.delta3 * p_eps)
            + p * eps * p * (2.0 * self.mu)
            + (nn * eps * p + p * eps * nn) * self.gamma
    }

    /// Normal strain `N : eps` that makes the normal stress vanish.
    pub fn plane_stress_normal_strain(&self, n: &Vec3, eps: &Matrix3<f64>) -> f64 {
        let p = Matrix3::identity() - n * n.transpose();
        -self.delta2 / self.delta1 * p.component_mul(eps).sum()
    }
}

/// Membrane moduli `(delta, mu)` of a base material that admits the membrane
/// stress state. Fails unless the out-of-plane shear coupling `gamma` vanishes.
pub fn reduce_transverse_isotropic(base: &BaseMaterial3D) -> Result<(f64, f64)> {
    if !(base.delta1 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "delta1 must be positive, got {}",
            base.delta1
        )));
    }
    if !(base.mu > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mu must be positive, got {}",
            base.mu
        )));
    }
    let scale = base
        .delta1
        .abs()
        .max(base.delta2.abs())
        .max(base.delta3.abs())
        .max(base.mu.abs());
    if base.gamma.abs() > 1e-12 * scale {
        return Err(Error::MembraneIncompatible { gamma: base.gamma });
    }
    Ok((
        base.delta3 - base.delta2 * base.delta2 / base.delta1,
        base.mu,
    ))
}

/// Plane-stress Lamé-type moduli `delta = nu E / (1 - nu^2)` and `mu = E / (2 (1 + nu))`.
pub fn plane_stress_moduli(young: f64, poisson: f64) -> Result<(f64, f64)> {
    if !(young > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "E must be positive, got {young}"
        )));
    }
    if !(0.0..1.0).contains(&poisson) {
        return Err(Error::InvalidArgument(format!(
            "nu must lie in [0, 1), got {poisson}"
        )));
    }
    Ok((
        poisson * young / (1.0 - poisson * poisson),
        young / (2.0 * (1.0 + poisson)),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembraneMaterial {
    pub young: f64,
    pub poisson: f64,
    pub base_thickness: f64,
    /// Young-type coefficient `alpha` shared by both fibre families.
    pub fiber_modulus: f64,
}

impl MembraneMaterial {
    pub fn new(young: f64, poisson: f64, base_thickness: f64, fiber_modulus: f64) -> Result<Self> {
        plane_stress_moduli(young, poisson)?;
        if !(base_thickness > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "base thickness must be positive, got {base_thickness}"
            )));
        }
        if !(fiber_modulus >= 0.0) || !fiber_modulus.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "fibre modulus must be non-negative, got {fiber_modulus}"
            )));
        }
        Ok(Self {
            young,
            poisson,
            base_thickness,
            fiber_modulus,
        })
    }

    /// `(delta, mu)`; valid by construction.
    pub fn moduli(&self) -> (f64, f64) {
        let nu = self.poisson;
        (
            nu * self.young / (1.0 - nu * nu),
            self.young / (2.0 * (1.0 + nu)),
        )
    }
}

/// Per-thickness orthotropic constants in the fibre basis `{s, s_perp}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthotropicConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Low-shear indicator `A + C - 2B - 4D`.
    pub beta: f64,
}

pub fn orthotropic_constants(
    mat: &MembraneMaterial,
    t1: f64,
    t2: f64,
) -> Result<OrthotropicConstants> {
    let t = mat.base_thickness + t1 + t2;
    if !(t > 0.0) || t1 < 0.0 || t2 < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "thicknesses must be non-negative with positive total, got t1={t1}, t2={t2}"
        )));
    }
    let (delta, mu) = mat.moduli();
    let tb = mat.base_thickness / t;
    let alpha = mat.fiber_modulus;
    let a = tb * (delta + 2.0 * mu) + t1 / t * alpha;
    let b = tb * delta;
    let c = tb * (delta + 2.0 * mu) + t2 / t * alpha;
    let d = tb * mu;
    Ok(OrthotropicConstants {
        a,
        b,
        c,
        d,
        beta: a + c - 2.0 * b - 4.0 * d,
    })
}

/// Voigt image `(c^2, s^2, c s)` of the fibre projector for local direction `(c, s)`.
pub fn fiber_voigt(dir: &Vector2<f64>) -> Vector3<f64> {
    Vector3::new(dir.x * dir.x, dir.y * dir.y, dir.x * dir.y)
}

/// Thickness-integrated membrane stiffness in a frame's Voigt basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembraneTangent {
    pub matrix: Matrix3<f64>,
}

impl MembraneTangent {
    /// Membrane force `M = S[eps]` in Voigt form `(M11, M22, M12)`.
    pub fn force(&self, strain: &Vector3<f64>) -> Vector3<f64> {
        self.matrix * strain
    }
}

/// Surface elasticity `S = t_b (delta P (x) P + 2 mu sym) + alpha t1 S (x) S + alpha t2 S_perp (x) S_perp`.
pub fn membrane_tangent(
    mat: &MembraneMaterial,
    t1: f64,
    t2: f64,
    s: &Vec3,
    frame: &TangentFrame,
) -> Result<MembraneTangent> {
    let dir = frame.local_direction(s).ok_or_else(|| {
        Error::InvalidArgument(format!("fibre direction {s:?} has no tangential component"))
    })?;
    Ok(membrane_tangent_local(mat, t1, t2, &dir))
}

/// As [`membrane_tangent`] with the fibre direction already in frame components.
pub fn membrane_tangent_local(
    mat: &MembraneMaterial,
    t1: f64,
    t2: f64,
    dir: &Vector2<f64>,
) -> MembraneTangent {
    let (delta, mu) = mat.moduli();
    let tb = mat.base_thickness;
    let lam = delta + 2.0 * mu;
    let mut matrix = Matrix3::new(lam, delta, 0.0, delta, lam, 0.0, 0.0, 0.0, mu) * tb;
    let v1 = fiber_voigt(dir);
    let v2 = fiber_voigt(&Vector2::new(-dir.y, dir.x));
    matrix += v1 * v1.transpose() * (mat.fiber_modulus * t1);
    matrix += v2 * v2.transpose() * (mat.fiber_modulus * t2);
    MembraneTangent { matrix }
}

/// Applies the surface elasticity to a 3x3 strain tensor directly with the
/// projectors `P`, `S`, `S_perp`. Returns the membrane force tensor.
pub fn membrane_stress_tensor(
    mat: &MembraneMaterial,
    t1: f64,
    t2: f64,
    s: &Vec3,
    frame: &TangentFrame,
    eps: &Matrix3<f64>,
) -> Matrix3<f64> {
    let (delta, mu) = mat.moduli();
    let p = frame.tangent_projector();
    let s = (p * s).normalize();
    let s_perp = frame.perpendicular(&s);
    let sp = fiber_projector(&s);
    let sq = fiber_projector(&s_perp);
    let ddot = |a: &Matrix3<f64>, b: &Matrix3<f64>| a.component_mul(b).sum();
    (p * ddot(&p, eps) * delta + p * eps * p * (2.0 * mu)) * mat.base_thickness
        + sp * (mat.fiber_modulus * t1 * ddot(&sp, eps))
        + sq * (mat.fiber_modulus * t2 * ddot(&sq, eps))
}

/// Voigt strain `(eps11, eps22, 2 eps12)` of a tensor in the given frame.
pub fn strain_to_voigt(frame: &TangentFrame, eps: &Matrix3<f64>) -> Vector3<f64> {
    let (e1, e2) = (frame.e1, frame.e2);
    Vector3::new(
        e1.dot(&(eps * e1)),
        e2.dot(&(eps * e2)),
        2.0 * e1.dot(&(eps * e2)),
    )
}

/// In-plane strain tensor from Voigt components.
pub fn voigt_to_strain(frame: &TangentFrame, v: &Vector3<f64>) -> Matrix3<f64> {
    let (e1, e2) = (frame.e1, frame.e2);
    e1 * e1.transpose() * v.x
        + e2 * e2.transpose() * v.y
        + (e1 * e2.transpose() + e2 * e1.transpose()) * (0.5 * v.z)
}

/// Membrane force tensor from Voigt components `(M11, M22, M12)`.
pub fn voigt_to_force(frame: &TangentFrame, m: &Vector3<f64>) -> Matrix3<f64> {
    let (e1, e2) = (frame.e1, frame.e2);
    e1 * e1.transpose() * m.x
        + e2 * e2.transpose() * m.y
        + (e1 * e2.transpose() + e2 * e1.transpose()) * m.z
}

/// `1/2 (S[eps]) : eps`, energy per unit area.
pub fn strain_energy_density(tangent: &MembraneTangent, strain: &Vector3<f64>) -> f64 {
    0.5 * strain.dot(&(tangent.matrix * strain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn xy_frame() -> TangentFrame {
        TangentFrame {
            n: Vec3::z(),
            e1: Vec3::x(),
            e2: Vec3::y(),
        }
    }

    fn paper_material() -> MembraneMaterial {
        MembraneMaterial::new(1.0, 0.3, 0.005, 1.0).unwrap()
    }

    #[test]
    fn reduction_examples() {
        let base = BaseMaterial3D {
            delta1: 1.0,
            delta2: 0.0,
            delta3: 1.0,
            gamma: 0.0,
            mu: 1.0,
        };
        assert_eq!(reduce_transverse_isotropic(&base).unwrap(), (1.0, 1.0));
        let base = BaseMaterial3D {
            delta1: 2.0,
            delta2: 1.0,
            ..base
        };
        assert_relative_eq!(
            reduce_transverse_isotropic(&base).unwrap().0,
            0.5,
            epsilon = 1e-15
        );
        let coupled = BaseMaterial3D { gamma: 0.1, ..base };
        assert!(matches!(
            reduce_transverse_isotropic(&coupled),
            Err(Error::MembraneIncompatible { .. })
        ));
        let bad = BaseMaterial3D {
            delta1: 0.0,
            ..base
        };
        assert!(matches!(
            reduce_transverse_isotropic(&bad),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn reduced_law_satisfies_membrane_stress_state() {
        let base = BaseMaterial3D {
            delta1: 3.0,
            delta2: 0.7,
            delta3: 1.9,
            gamma: 0.0,
            mu: 0.8,
        };
        let (delta, mu) = reduce_transverse_isotropic(&base).unwrap();
        let n = Vec3::new(1.0, 2.0, 2.0).normalize();
        let frame = TangentFrame::from_normal_and_tangent(n, Vec3::x()).unwrap();
        let p = frame.tangent_projector();
        let nn = frame.normal_projector();
        // Arbitrary in-plane strain plus the transverse strain the reduction prescribes.
        let raw = Matrix3::new(0.3, -0.1, 0.2, -0.1, 0.5, 0.05, 0.2, 0.05, -0.4);
        let raw = (raw + raw.transpose()) * 0.5;
        let in_plane = p * raw * p;
        let eps = in_plane + nn * base.plane_stress_normal_strain(&n, &in_plane);
        let sigma = base.stress(&n, &eps);
        assert!((nn * sigma * nn).norm() < 1e-14);
        assert!((p * sigma * nn).norm() < 1e-14);
        let trace = p.component_mul(&eps).sum();
        let expected = p * (delta * trace) + p * eps * p * (2.0 * mu);
        assert!((p * sigma * p - expected).norm() < 1e-14);

        // Transverse shear strain produces transverse shear stress when gamma != 0.
        let coupled = BaseMaterial3D { gamma: 0.4, ..base };
        let shear = n * frame.e1.transpose() + frame.e1 * n.transpose();
        assert!((p * coupled.stress(&n, &shear) * nn).norm() > 0.1);
    }

    #[test]
    fn plane_stress_moduli_examples() {
        assert_eq!(plane_stress_moduli(1.0, 0.0).unwrap(), (0.0, 0.5));
        let (d, m) = plane_stress_moduli(1.0, 0.3).unwrap();
        assert_relative_eq!(d, 0.3 / 0.91, epsilon = 1e-15);
        assert_relative_eq!(d, 0.329_670, epsilon = 1e-6);
        assert_relative_eq!(m, 0.384_615, epsilon = 1e-6);
        let (d2, m2) = plane_stress_moduli(2.0, 0.3).unwrap();
        assert_eq!((d2, m2), (2.0 * d, 2.0 * m));
        assert!(plane_stress_moduli(1.0, 1.5).is_err());
        assert!(plane_stress_moduli(1.0, -0.1).is_err());
        assert!(plane_stress_moduli(1.0, 1.0).is_err());
    }

    #[test]
    fn material_validation() {
        assert!(MembraneMaterial::new(1.0, 1.5, 0.005, 1.0).is_err());
        assert!(MembraneMaterial::new(0.0, 0.3, 0.005, 1.0).is_err());
        assert!(MembraneMaterial::new(1.0, 0.3, 0.0, 1.0).is_err());
        assert!(MembraneMaterial::new(1.0, 0.3, 0.005, -1.0).is_err());
    }

    #[test]
    fn unreinforced_tangent_is_plane_stress() {
        let mat = MembraneMaterial::new(1.0, 0.0, 0.005, 1.0).unwrap();
        let tan = membrane_tangent(&mat, 0.0, 0.0, &Vec3::x(), &xy_frame()).unwrap();
        let f = tan.force(&Vector3::new(0.2, -0.1, 0.0));
        assert_relative_eq!(f, Vector3::new(0.2, -0.1, 0.0) * 0.005, epsilon = 1e-16);
    }

    #[test]
    fn uniaxial_fibre_stress_matches_appendix_constant() {
        let mat = paper_material();
        let (t1, t2) = (0.002, 0.001);
        let tan = membrane_tangent(&mat, t1, t2, &Vec3::x(), &xy_frame()).unwrap();
        let f = tan.force(&Vector3::new(1.0, 0.0, 0.0));
        let (delta, mu) = mat.moduli();
        assert_relative_eq!(f.x, 0.005 * (delta + 2.0 * mu) + t1, epsilon = 1e-15);
        let k = orthotropic_constants(&mat, t1, t2).unwrap();
        assert_relative_eq!(f.x, k.a * (0.005 + t1 + t2), epsilon = 1e-15);
    }

    #[test]
    fn rotating_fibres_by_right_angle_swaps_families() {
        let mat = paper_material();
        let frame = xy_frame();
        let s = Vec3::new(0.6, 0.8, 0.0);
        let a = membrane_tangent(&mat, 0.003, 0.001, &s, &frame).unwrap();
        let b = membrane_tangent(&mat, 0.001, 0.003, &frame.perpendicular(&s), &frame).unwrap();
        assert_relative_eq!(a.matrix, b.matrix, epsilon = 1e-15);
    }

    #[test]
    fn orthotropic_constant_examples() {
        let mat = paper_material();
        assert!(orthotropic_constants(&mat, 0.0, 0.0).unwrap().beta.abs() < 1e-15);
        let k = orthotropic_constants(&mat, 0.002, 0.001).unwrap();
        assert_relative_eq!(k.beta, 0.375, epsilon = 1e-12);
        assert!(k.a >= k.c);
        assert!(orthotropic_constants(&mat, -0.001, 0.0).is_err());
    }

    #[test]
    fn energy_examples() {
        let mat = paper_material();
        let s = Vec3::new(1.0, 1.0, 0.0).normalize();
        let tan = membrane_tangent(&mat, 0.002, 0.0, &s, &xy_frame()).unwrap();
        assert_eq!(strain_energy_density(&tan, &Vector3::zeros()), 0.0);
        let eps = Vector3::new(0.01, -0.004, 0.003);
        assert_relative_eq!(
            strain_energy_density(&tan, &(eps * 2.0)),
            4.0 * strain_energy_density(&tan, &eps),
            max_relative = 1e-14
        );

        let thin = MembraneMaterial::new(1.0, 0.3, 1e-9, 1.0).unwrap();
        let tan = membrane_tangent(&thin, 0.002, 0.0, &s, &xy_frame()).unwrap();
        let fibre_strain = s.dot(&(voigt_to_strain(&xy_frame(), &eps) * s));
        let expected = 0.5 * 0.002 * fibre_strain * fibre_strain;
        assert_relative_eq!(
            strain_energy_density(&tan, &eps),
            expected,
            max_relative = 1e-5
        );
    }

    fn arb_frame() -> impl Strategy<Value = TangentFrame> {
        (
            -1.0f64..1.0,
            -1.0f64..1.0,
            -1.0f64..1.0,
            0.0f64..std::f64::consts::TAU,
        )
            .prop_filter_map("frame", |(x, y, z, a)| {
                let n = Vec3::new(x, y, z).try_normalize(1e-2)?;
                let g = Vec3::new(a.cos(), a.sin(), 0.3);
                if n.cross(&g).norm() < 1e-2 {
                    return None;
                }
                TangentFrame::from_normal_and_tangent(n, g)
            })
    }

    fn arb_strain() -> impl Strategy<Value = Vector3<f64>> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b, c)| Vector3::new(a, b, c))
    }

    proptest! {
        #[test]
        fn voigt_and_tensor_routes_agree(
            frame in arb_frame(), eps in arb_strain(), theta in 0.0f64..3.2,
            t1 in 0.0f64..0.004, t2 in 0.0f64..0.004, nu in 0.0f64..0.49, alpha in 0.0f64..3.0,
        ) {
            let mat = MembraneMaterial::new(1.0, nu, 0.005, alpha).unwrap();
            let s = frame.e1 * theta.cos() + frame.e2 * theta.sin();
            let tan = membrane_tangent(&mat, t1, t2, &s, &frame).unwrap();
            let tensor = voigt_to_strain(&frame, &eps);
            let m_tensor = membrane_stress_tensor(&mat, t1, t2, &s, &frame, &tensor);
            let m_voigt = voigt_to_force(&frame, &tan.force(&eps));
            prop_assert!((m_tensor - m_voigt).norm() < 1e-12);
            // Membrane force is tangential.
            prop_assert!((m_tensor * frame.n).norm() < 1e-12);
        }

        #[test]
        fn tangent_is_symmetric_and_positive(
            frame in arb_frame(), e1 in arb_strain(), e2 in arb_strain(), theta in 0.0f64..3.2,
            t1 in 0.0f64..0.004, t2 in 0.0f64..0.004, nu in 0.0f64..0.49,
        ) {
            let mat = MembraneMaterial::new(1.0, nu, 0.005, 2.0).unwrap();
            let s = frame.e1 * theta.cos() + frame.e2 * theta.sin();
            let tan = membrane_tangent(&mat, t1, t2, &s, &frame).unwrap();
            let lhs = tan.force(&e1).dot(&e2);
            let rhs = tan.force(&e2).dot(&e1);
            prop_assert!((lhs - rhs).abs() < 1e-14);
            let norm2 = e1.norm_squared();
            prop_assume!(norm2 > 1e-6);
            prop_assert!(strain_energy_density(&tan, &e1) > 0.0);
        }

        #[test]
        fn energy_is_frame_indifferent(
            eps in arb_strain(), theta in 0.0f64..3.2, rot in 0.0f64..std::f64::consts::TAU,
            t1 in 0.0f64..0.004, t2 in 0.0f64..0.004,
        ) {
            let mat = paper_material();
            let a = xy_frame();
            let b = TangentFrame::from_normal_and_tangent(Vec3::z(), Vec3::new(rot.cos(), rot.sin(), 0.0)).unwrap();
            let s = Vec3::new(theta.cos(), theta.sin(), 0.0);
            let tensor = voigt_to_strain(&a, &eps);
            let wa = strain_energy_density(&membrane_tangent(&mat, t1, t2, &s, &a).unwrap(), &eps);
            let wb = strain_energy_density(
                &membrane_tangent(&mat, t1, t2, &s, &b).unwrap(),
                &strain_to_voigt(&b, &tensor),
            );
            prop_assert!((wa - wb).abs() <= 1e-12 * wa.abs().max(1e-12));
        }

        #[test]
        fn no_normal_shear_coupling_in_fibre_basis(
            eps in arb_strain(), theta in 0.0f64..3.2,
            t1 in 0.0f64..0.004, t2 in 0.0f64..0.004, nu in 0.0f64..0.49, alpha in 0.0f64..3.0,
        ) {
            let mat = MembraneMaterial::new(1.0, nu, 0.005, alpha).unwrap();
            let s = Vec3::new(theta.cos(), theta.sin(), 0.0);
            let fibre = TangentFrame::from_normal_and_tangent(Vec3::z(), s).unwrap();
            let tan = membrane_tangent(&mat, t1, t2, &s, &xy_frame()).unwrap();
            let m = voigt_to_force(&xy_frame(), &tan.force(&eps));
            let e = strain_to_voigt(&fibre, &voigt_to_strain(&xy_frame(), &eps));
            let t = mat.base_thickness + t1 + t2;
            let k = orthotropic_constants(&mat, t1, t2).unwrap();
            let (e11, e22, e12) = (e.x, e.y, 0.5 * e.z);
            let sigma = |a: &Vec3, b: &Vec3| a.dot(&(m * b)) / t;
            prop_assert!((sigma(&fibre.e1, &fibre.e1) - (k.a * e11 + k.b * e22)).abs() < 1e-12);
            prop_assert!((sigma(&fibre.e2, &fibre.e2) - (k.c * e22 + k.b * e11)).abs() < 1e-12);
            prop_assert!((sigma(&fibre.e1, &fibre.e2) - 2.0 * k.d * e12).abs() < 1e-12);
        }

        #[test]
        fn low_shear_indicator(t1 in 0.0f64..0.01, t2 in 0.0f64..0.01, nu in 0.0f64..0.49, alpha in 0.0f64..5.0) {
            let mat = MembraneMaterial::new(1.0, nu, 0.005, alpha).unwrap();
            let k = orthotropic_constants(&mat, t1, t2).unwrap();
            let t = 0.005 + t1 + t2;
            prop_assert!(k.beta >= 0.0);
            prop_assert!((k.beta - (t1 + t2) * alpha / t).abs() < 1e-12);
            prop_assert!((k.beta - (k.a + k.c - 2.0 * k.b - 4.0 * k.d)).abs() < 1e-12);
        }
    }
}
