//! Pointwise Gibbons-Hawking geometry in the coframe `(omega, dx, dy, dz)`
//! with `omega = dt + theta`.
//!
//! Orientation of R^3 is fixed by `*(dx ^ dy) = dz`. The connection is a sum
//! of Dirac monopoles, one per center, each with its string along
//! `gauge_axis`. With this orientation `d theta = CURVATURE_SIGN * (*dV)`,
//! i.e. `curl theta = CURVATURE_SIGN * grad V` for the quarter-pi potential,
//! and the flux of `curl theta` through a small sphere around a unit-weight
//! center is `-1`.

use nalgebra::Matrix4;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::config::{Point3, PunctureConfig};
use crate::potential::{eval_potential, grad_potential, Normalization};
use crate::{Error, Result};

/// Sign `s` in `curl theta = s * grad V`.
pub const CURVATURE_SIGN: f64 = 1.0;

/// Points closer than this to a Dirac string are rejected.
pub const STRING_TOLERANCE: f64 = 1e-8;

pub const DEFAULT_GAUGE_AXIS: Point3 = Point3::new(0.0, 0.0, -1.0);

const UNIT_TOLERANCE: f64 = 1e-12;

/// Coframe index of `omega`; `dx`, `dy`, `dz` follow at 1, 2, 3.
pub const OMEGA: usize = 0;

/// One of the three complex structures, or the combination along a unit vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureAxis {
    X,
    Y,
    Z,
    Along(Point3),
}

impl StructureAxis {
    pub const BASIS: [StructureAxis; 3] = [StructureAxis::X, StructureAxis::Y, StructureAxis::Z];
}

fn require_unit(v: Point3) -> Result<()> {
    let norm = v.norm();
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NonUnitVector { norm });
    }
    Ok(())
}

/// Distance from `x` to the ray `{p + t a : t >= 0}` (`a` unit).
pub fn distance_to_ray(x: Point3, p: Point3, a: Point3) -> f64 {
    let d = x - p;
    let t = d.dot(a);
    if t <= 0.0 {
        d.norm()
    } else {
        (d - a * t).norm()
    }
}

/// Smallest distance from `x` to a center or to one of the Dirac strings.
pub fn clearance(config: &PunctureConfig, x: Point3, gauge_axis: Point3) -> f64 {
    config
        .punctures()
        .iter()
        .map(|&p| distance_to_ray(x, p, gauge_axis))
        .fold(f64::INFINITY, f64::min)
}

/// Connection components `theta(x)`.
pub fn monopole_theta(config: &PunctureConfig, x: Point3, gauge_axis: Point3) -> Result<Point3> {
    require_unit(gauge_axis)?;
    let n = -gauge_axis;
    let mut theta = Point3::ORIGIN;
    for (index, (p, e)) in config.centers().enumerate() {
        let distance = distance_to_ray(x, p, gauge_axis);
        if distance < STRING_TOLERANCE {
            return Err(Error::StringProximity { index, distance });
        }
        let d = x - p;
        let r = d.norm();
        // curl of (n x d) / (r (r + n.d)) is d / r^3
        let g = -(e.unsigned_abs() as f64) / (4.0 * std::f64::consts::PI);
        let axial = n.dot(d);
        let perp = n.cross(d);
        // r + n.d cancels badly below a distant center; use |n x d|^2 / (r - n.d)
        let sum = if axial >= 0.0 {
            r + axial
        } else {
            perp.dot(perp) / (r - axial)
        };
        theta = theta + perp * (g / (r * sum));
    }
    Ok(theta)
}

/// Central-difference curl of a vector field with step `h`.
pub fn fd_curl<F>(field: F, x: Point3, h: f64) -> Result<Point3>
where
    F: Fn(Point3) -> Result<Point3>,
{
    let mut jac = [[0.0; 3]; 3]; // jac[i][j] = d field_i / d x_j
    for j in 0..3 {
        let e = Point3::axis(j) * h;
        let plus = field(x + e)?;
        let minus = field(x - e)?;
        for (i, row) in jac.iter_mut().enumerate() {
            row[j] = (plus.component(i) - minus.component(i)) / (2.0 * h);
        }
    }
    Ok(Point3::new(
        jac[2][1] - jac[1][2],
        jac[0][2] - jac[2][0],
        jac[1][0] - jac[0][1],
    ))
}

/// Max-norm of `curl theta - CURVATURE_SIGN * grad V` at `x`, with the curl
/// taken by central differences of step `h` and the default gauge.
pub fn curvature_residual(config: &PunctureConfig, x: Point3, h: f64) -> Result<f64> {
    curvature_residual_in_gauge(config, x, h, DEFAULT_GAUGE_AXIS)
}

pub fn curvature_residual_in_gauge(config: &PunctureConfig, x: Point3, h: f64, gauge_axis: Point3) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    monopole_theta(config, x, gauge_axis)?;
    let room = clearance(config, x, gauge_axis);
    if room <= 10.0 * h {
        return Err(Error::StepTooLarge { h, clearance: room });
    }
    let curl = fd_curl(|p| monopole_theta(config, p, gauge_axis), x, h)?;
    let grad = grad_potential(config, x, Normalization::QuarterPi)?;
    Ok((curl - grad * CURVATURE_SIGN).max_abs())
}

/// `diag(1/V, V, V, V)` in the coframe.
pub fn metric_matrix(config: &PunctureConfig, x: Point3) -> Result<Matrix4<f64>> {
    let v = eval_potential(config, x, Normalization::QuarterPi)?;
    Ok(metric_from_potential(v))
}

pub fn metric_from_potential(v: f64) -> Matrix4<f64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0 / v, v, v, v))
}

/// Action of a complex structure on the coframe: column `j` holds the image
/// of the `j`-th basis covector. For `J_x`: `dx -> omega / V`,
/// `omega -> -V dx`, `dy -> dz`, `dz -> -dy`; the others cyclically.
pub fn complex_structure_from_potential(axis: StructureAxis, v: f64) -> Result<Matrix4<f64>> {
    let basic = |a: usize| {
        let (b, c) = ((a % 3) + 1, ((a + 1) % 3) + 1);
        let mut m = Matrix4::zeros();
        m[(OMEGA, a)] = 1.0 / v;
        m[(a, OMEGA)] = -v;
        m[(c, b)] = 1.0;
        m[(b, c)] = -1.0;
        m
    };
    Ok(match axis {
        StructureAxis::X => basic(1),
        StructureAxis::Y => basic(2),
        StructureAxis::Z => basic(3),
        StructureAxis::Along(dir) => {
            require_unit(dir)?;
            basic(1) * dir.x + basic(2) * dir.y + basic(3) * dir.z
        }
    })
}

pub fn complex_structure(config: &PunctureConfig, x: Point3, axis: StructureAxis) -> Result<Matrix4<f64>> {
    let v = eval_potential(config, x, Normalization::QuarterPi)?;
    complex_structure_from_potential(axis, v)
}

/// Matrix of `J` acting on tangent vectors in the frame dual to the coframe.
/// Covectors transform by the inverse transpose, so this is `-M^T`.
pub fn tangent_action(covector_action: &Matrix4<f64>) -> Matrix4<f64> {
    -covector_action.transpose()
}

/// Antisymmetric matrix `K` with `Omega(X, Y) = X^T K Y`. For `Omega_x` the
/// nonzero entries are `K[dx][omega] = 1` and `K[dy][dz] = V`.
pub fn kahler_form(axis: StructureAxis, config: &PunctureConfig, x: Point3) -> Result<Matrix4<f64>> {
    let v = eval_potential(config, x, Normalization::QuarterPi)?;
    kahler_form_from_potential(axis, v)
}

pub fn kahler_form_from_potential(axis: StructureAxis, v: f64) -> Result<Matrix4<f64>> {
    let two_form = |a: usize| {
        let (b, c) = ((a % 3) + 1, ((a + 1) % 3) + 1);
        let mut k = Matrix4::zeros();
        k[(a, OMEGA)] = 1.0;
        k[(OMEGA, a)] = -1.0;
        k[(b, c)] = v;
        k[(c, b)] = -v;
        k
    };
    Ok(match axis {
        StructureAxis::X => two_form(1),
        StructureAxis::Y => two_form(2),
        StructureAxis::Z => two_form(3),
        StructureAxis::Along(dir) => {
            require_unit(dir)?;
            two_form(1) * dir.x + two_form(2) * dir.y + two_form(3) * dir.z
        }
    })
}

fn max_abs(m: &Matrix4<f64>) -> f64 {
    m.iter().fold(0.0, |acc, e| acc.max(e.abs()))
}

/// Algebraic residuals of the hyperkähler structure at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlgebraResiduals {
    /// `max |J_a^2 + I|`, `|J_x J_y - J_z|`, `|J_y J_x + J_z|`.
    pub quaternion: f64,
    /// `max |J^T g J - g| / max |g|` over the three structures (tangent action).
    pub compatibility: f64,
    /// `max |Omega_a - J_a^T g| / max |g|`.
    pub kahler: f64,
}

impl AlgebraResiduals {
    pub fn worst(&self) -> f64 {
        self.quaternion.max(self.compatibility).max(self.kahler)
    }
}

pub fn algebra_residuals(config: &PunctureConfig, x: Point3) -> Result<AlgebraResiduals> {
    let v = eval_potential(config, x, Normalization::QuarterPi)?;
    algebra_residuals_from_potential(v)
}

pub fn algebra_residuals_from_potential(v: f64) -> Result<AlgebraResiduals> {
    let g = metric_from_potential(v);
    let scale = max_abs(&g);
    let id = Matrix4::<f64>::identity();
    let [jx, jy, jz] = StructureAxis::BASIS.map(|a| complex_structure_from_potential(a, v));
    let (jx, jy, jz) = (jx?, jy?, jz?);
    let mut quaternion = max_abs(&(jx * jy - jz)).max(max_abs(&(jy * jx + jz)));
    let mut compatibility: f64 = 0.0;
    let mut kahler: f64 = 0.0;
    for (axis, j) in StructureAxis::BASIS.iter().zip([jx, jy, jz]) {
        quaternion = quaternion.max(max_abs(&(j * j + id)));
        let t = tangent_action(&j);
        compatibility = compatibility.max(max_abs(&(t.transpose() * g * t - g)) / scale);
        let omega = kahler_form_from_potential(*axis, v)?;
        kahler = kahler.max(max_abs(&(omega - t.transpose() * g)) / scale);
    }
    Ok(AlgebraResiduals {
        quaternion,
        compatibility,
        kahler,
    })
}

/// Deterministic sample points for the finite-difference checks: a random
/// center plus an offset of length in `[0.5, 3]`, kept only if it stays at
/// least `0.5` away from every center and Dirac string of the default gauge.
/// An empty configuration samples the ball of radius 3.
pub fn sample_points(config: &PunctureConfig, count: usize, seed: u64) -> Result<Vec<Point3>> {
    const MIN_CLEARANCE: f64 = 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let max_attempts = 1000 * count.max(1);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::InvalidParameter(format!(
                "could not place {count} sample points with clearance {MIN_CLEARANCE}"
            )));
        }
        let dir: [f64; 3] = UnitSphere.sample(&mut rng);
        let radius = rng.random_range(MIN_CLEARANCE..3.0);
        let base = if config.is_empty() {
            Point3::ORIGIN
        } else {
            config.punctures()[rng.random_range(0..config.len())]
        };
        let x = base + Point3::from(dir) * radius;
        if config.is_empty() || clearance(config, x, DEFAULT_GAUGE_AXIS) >= MIN_CLEARANCE {
            out.push(x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{generate_config, GenerateKind};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn single() -> PunctureConfig {
        PunctureConfig::with_unit_weights(vec![Point3::ORIGIN], "one").unwrap()
    }

    fn two_center() -> PunctureConfig {
        generate_config(GenerateKind::CollinearX { spacing: 1.0, count: 2 }).unwrap()
    }

    #[test]
    fn theta_vanishes_on_the_axis_opposite_the_string() {
        let t = monopole_theta(&single(), Point3::new(0.0, 0.0, 2.0), DEFAULT_GAUGE_AXIS).unwrap();
        assert_eq!(t.z, 0.0);
        let t = monopole_theta(&single(), Point3::new(0.3, 0.4, 2.0), DEFAULT_GAUGE_AXIS).unwrap();
        assert_eq!(t.z, 0.0);
    }

    #[test]
    fn string_is_rejected() {
        let c = two_center();
        let x = c.punctures()[0] + Point3::new(0.0, 0.0, -0.5);
        match monopole_theta(&c, x, DEFAULT_GAUGE_AXIS) {
            Err(Error::StringProximity { index: 0, distance }) => assert!(distance < 1e-8),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            monopole_theta(&c, Point3::new(2.0, 0.0, 0.0), Point3::new(0.0, 0.0, -2.0)),
            Err(Error::NonUnitVector { .. })
        ));
    }

    #[test]
    fn curl_matches_gradient_single_center() {
        let x = Point3::new(1.0, 0.0, 0.0);
        let curl = fd_curl(|p| monopole_theta(&single(), p, DEFAULT_GAUGE_AXIS), x, 1e-3).unwrap();
        let grad = grad_potential(&single(), x, Normalization::QuarterPi).unwrap();
        assert!((curl - grad).max_abs() <= 1e-5);
        assert_relative_eq!(curl.x, -1.0 / (4.0 * PI), max_relative = 1e-5);
    }

    #[test]
    fn chern_flux_is_minus_one() {
        // flux of curl theta through a small sphere, by midpoint rule
        let c = single();
        let (nt, np) = (200, 400);
        let r = 0.1;
        let mut flux = 0.0;
        for i in 0..nt {
            let th = (i as f64 + 0.5) * PI / nt as f64;
            for k in 0..np {
                let ph = (k as f64 + 0.5) * 2.0 * PI / np as f64;
                let n = Point3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos());
                let g = grad_potential(&c, n * r, Normalization::QuarterPi).unwrap() * CURVATURE_SIGN;
                flux += g.dot(n) * r * r * th.sin() * (PI / nt as f64) * (2.0 * PI / np as f64);
            }
        }
        assert_relative_eq!(flux, -1.0, epsilon = 1e-4);
    }

    #[test]
    fn curvature_examples() {
        let r = curvature_residual(&two_center(), Point3::new(0.5, 1.0, 0.0), 1e-3).unwrap();
        assert!(r <= 1e-5, "{r}");
        let pts = sample_points(&single(), 50, 3).unwrap();
        for x in pts {
            assert!(x.norm() >= 0.5);
            let r = curvature_residual(&single(), x, 1e-3).unwrap();
            assert!(r <= 1e-5, "{r} at {x}");
        }
    }

    #[test]
    fn curvature_is_second_order() {
        let x = Point3::new(0.7, -0.4, 0.9);
        let fine = curvature_residual(&single(), x, 1e-2).unwrap();
        let coarse = curvature_residual(&single(), x, 2e-2).unwrap();
        let ratio = coarse / fine;
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn curvature_step_gate() {
        let x = Point3::new(0.005, 0.0, 0.0);
        assert!(matches!(
            curvature_residual(&single(), x, 1e-3),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn gauge_change_is_pure_gauge() {
        let c = two_center();
        let other = Point3::new(1.0, 2.0, 2.0).normalized().unwrap();
        let diff = |p: Point3| -> Result<Point3> {
            Ok(monopole_theta(&c, p, DEFAULT_GAUGE_AXIS)? - monopole_theta(&c, p, other)?)
        };
        for x in [Point3::new(0.5, 1.0, 0.3), Point3::new(-1.0, 0.2, 1.5)] {
            let curl = fd_curl(diff, x, 1e-3).unwrap();
            assert!(curl.max_abs() <= 1e-5, "{curl}");
        }
    }

    #[test]
    fn metric_examples() {
        let g = metric_from_potential(2.0);
        assert_eq!(g, Matrix4::from_diagonal(&nalgebra::Vector4::new(0.5, 2.0, 2.0, 2.0)));
        let x = Point3::new(0.3, 0.1, -0.2);
        let g = metric_matrix(&two_center(), x).unwrap();
        let v = eval_potential(&two_center(), x, Normalization::QuarterPi).unwrap();
        assert_relative_eq!(g.determinant(), v * v, max_relative = 1e-12);
        assert!(metric_matrix(&two_center(), Point3::ORIGIN).is_err());
    }

    #[test]
    fn j_x_at_unit_potential() {
        let j = complex_structure_from_potential(StructureAxis::X, 1.0).unwrap();
        let image = |k: usize| j.column(k).into_owned();
        let e = |k: usize| {
            let mut v = nalgebra::Vector4::zeros();
            v[k] = 1.0;
            v
        };
        assert_eq!(image(1), e(0));
        assert_eq!(image(0), -e(1));
        assert_eq!(image(2), e(3));
        assert_eq!(image(3), -e(2));
    }

    #[test]
    fn quaternion_relations() {
        for v in [0.3, 1.0, 7.5] {
            let [x, y, z] = StructureAxis::BASIS.map(|a| complex_structure_from_potential(a, v).unwrap());
            assert!(max_abs(&(x * y - z)) <= 1e-12);
            assert!(max_abs(&(y * x + z)) <= 1e-12);
        }
        let along = complex_structure_from_potential(StructureAxis::Along(Point3::new(1.0, 0.0, 0.0)), 2.0).unwrap();
        assert_eq!(along, complex_structure_from_potential(StructureAxis::X, 2.0).unwrap());
        assert!(complex_structure_from_potential(StructureAxis::Along(Point3::new(1.0, 1.0, 0.0)), 2.0).is_err());
    }

    #[test]
    fn kahler_x_entries() {
        let k = kahler_form_from_potential(StructureAxis::X, 3.0).unwrap();
        assert_eq!(k[(1, 0)], 1.0);
        assert_eq!(k[(0, 1)], -1.0);
        assert_eq!(k[(2, 3)], 3.0);
        assert_eq!(k[(3, 2)], -3.0);
        assert_eq!(k.iter().filter(|e| **e != 0.0).count(), 4);
        assert_eq!(k.transpose(), -k);
    }

    fn arb_unit() -> impl Strategy<Value = Point3> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_filter_map("nonzero", |(a, b, c)| {
            let p = Point3::new(a, b, c);
            (p.norm() > 1e-3).then(|| p.normalized().unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn combined_structure_squares_to_minus_one(dir in arb_unit(), v in 0.01f64..100.0) {
            let j = complex_structure_from_potential(StructureAxis::Along(dir), v).unwrap();
            let res = max_abs(&(j * j + Matrix4::identity()));
            prop_assert!(res <= 1e-12 * v.max(1.0 / v), "{}", res);
        }

        #[test]
        fn structures_preserve_the_metric_on_vector_pairs(
            v in 0.01f64..100.0,
            a in proptest::array::uniform4(-1.0f64..1.0),
            b in proptest::array::uniform4(-1.0f64..1.0),
        ) {
            let g = metric_from_potential(v);
            let (a, b) = (nalgebra::Vector4::from(a), nalgebra::Vector4::from(b));
            let scale = (a.transpose() * g * a)[0].abs().max((b.transpose() * g * b)[0].abs()).max(1e-300);
            for axis in StructureAxis::BASIS {
                let t = tangent_action(&complex_structure_from_potential(axis, v).unwrap());
                let lhs = ((t * a).transpose() * g * (t * b))[0];
                let rhs = (a.transpose() * g * b)[0];
                prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
                let omega = kahler_form_from_potential(axis, v).unwrap();
                let direct = (a.transpose() * omega * b)[0];
                let via_metric = ((t * a).transpose() * g * b)[0];
                prop_assert!((direct - via_metric).abs() <= 1e-10 * scale);
            }
        }

        #[test]
        fn algebra_holds_at_sampled_points(seed in 0u64..1000) {
            let c = two_center();
            for x in sample_points(&c, 5, seed).unwrap() {
                let r = algebra_residuals(&c, x).unwrap();
                prop_assert!(r.worst() <= 1e-12, "{:?}", r);
            }
        }
    }
}
