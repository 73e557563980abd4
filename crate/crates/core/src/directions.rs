//! Projection of the centers onto the plane orthogonal to a direction `v`,
//! clustering of the projected points, and the spherical-cap estimates that
//! bound the set of bad directions.

use std::f64::consts::PI;

use petgraph::unionfind::UnionFind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Point3, PunctureConfig};
use crate::{Complex, Error, Result};

/// Rule that produced a [`DirectionFrame`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum FrameRule {
    /// Gram-Schmidt of the coordinate axis least aligned with `v`.
    LeastAlignedAxis { axis: usize },
    /// A least-aligned frame turned through `angle` inside `v^perp`.
    Rotated { axis: usize, angle: f64 },
}

/// Right-handed orthonormal frame `(f1, f2, v)`; `v^perp` is identified with
/// the complex line by `x -> <x, f1> + i <x, f2>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectionFrame {
    pub v: Point3,
    pub f1: Point3,
    pub f2: Point3,
    pub derivation: FrameRule,
}

const AXIS_NAMES: [char; 3] = ['x', 'y', 'z'];

pub fn make_frame(v: Point3) -> Result<DirectionFrame> {
    if !v.is_finite() {
        return Err(Error::InvalidParameter(format!("direction {v} is not finite")));
    }
    let v = v.normalized().ok_or(Error::ZeroVector)?;
    let mut axis = 0;
    for i in 1..3 {
        if v.component(i).abs() < v.component(axis).abs() {
            axis = i;
        }
    }
    let e = Point3::axis(axis);
    let f1 = (e - v * v.dot(e)).normalized().ok_or(Error::ZeroVector)?;
    let f2 = v.cross(f1);
    Ok(DirectionFrame {
        v,
        f1,
        f2,
        derivation: FrameRule::LeastAlignedAxis { axis },
    })
}

impl DirectionFrame {
    /// Stable textual id of the frame rule, e.g. `least_aligned_axis:y`.
    pub fn id(&self) -> String {
        match self.derivation {
            FrameRule::LeastAlignedAxis { axis } => format!("least_aligned_axis:{}", AXIS_NAMES[axis]),
            FrameRule::Rotated { axis, angle } => {
                format!("least_aligned_axis:{}+rotation:{angle}", AXIS_NAMES[axis])
            }
        }
    }

    /// Frame turned by `angle` in `v^perp`; coordinates pick up `e^{i angle}`.
    pub fn rotated(&self, angle: f64) -> DirectionFrame {
        let (s, c) = angle.sin_cos();
        let axis = match self.derivation {
            FrameRule::LeastAlignedAxis { axis } | FrameRule::Rotated { axis, .. } => axis,
        };
        let base_angle = match self.derivation {
            FrameRule::Rotated { angle, .. } => angle,
            FrameRule::LeastAlignedAxis { .. } => 0.0,
        };
        DirectionFrame {
            v: self.v,
            f1: self.f1 * c - self.f2 * s,
            f2: self.f1 * s + self.f2 * c,
            derivation: FrameRule::Rotated {
                axis,
                angle: base_angle + angle,
            },
        }
    }

    pub fn project(&self, p: Point3) -> Complex {
        Complex::new(p.dot(self.f1), p.dot(self.f2))
    }

    /// Largest deviation of the Gram matrix of `(f1, f2, v)` from the identity,
    /// together with `|det - 1|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let vs = [self.f1, self.f2, self.v];
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((vs[i].dot(vs[j]) - target).abs());
            }
        }
        let det = self.f1.cross(self.f2).dot(self.v);
        worst.max((det - 1.0).abs())
    }
}

/// A set of centers whose projections coincide up to the clustering tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    /// Representative value; exactly zero for the cluster through the origin.
    pub b: Complex,
    /// 0-based center indices, increasing.
    pub members: Vec<usize>,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionReport {
    pub frame: DirectionFrame,
    pub a: Vec<Complex>,
    /// Ordered by smallest member index.
    pub clusters: Vec<Cluster>,
    pub m0: usize,
    pub generic: bool,
    pub accumulation_flag: bool,
    pub tolerance: f64,
    /// The configuration declares an infinite tail, so the clusters are a
    /// truncation of an infinite zero set.
    pub truncated: bool,
}

impl ProjectionReport {
    /// Clusters of multiplicity at least two, i.e. the `A_{m-1}` points.
    pub fn singular_clusters(&self) -> impl Iterator<Item = &Cluster> {
        self.clusters.iter().filter(|c| c.m >= 2)
    }

    /// Clusters away from the origin, the zeros of the entire function.
    pub fn nonzero_clusters(&self) -> impl Iterator<Item = &Cluster> {
        self.clusters.iter().filter(|c| c.b != Complex::new(0.0, 0.0))
    }
}

/// Default clustering tolerance: `1e-9` times the configuration diameter.
pub fn default_tolerance(config: &PunctureConfig) -> f64 {
    let d = config.diameter();
    if d > 0.0 {
        1e-9 * d
    } else {
        1e-9
    }
}

/// Components of the graph joining projections closer than `eps`.
fn cluster_indices(a: &[Complex], eps: f64) -> Vec<Vec<usize>> {
    let n = a.len();
    let mut uf = UnionFind::<usize>::new(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i].re.total_cmp(&a[j].re));
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if a[j].re - a[i].re >= eps {
                break;
            }
            if (a[i] - a[j]).norm() < eps {
                uf.union(i, j);
            }
        }
    }
    let labels = uf.into_labeling();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for (i, &root) in labels.iter().enumerate() {
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

/// Projects every center with `frame` and clusters the images.
/// `tolerance` defaults to [`default_tolerance`].
pub fn project(config: &PunctureConfig, frame: &DirectionFrame, tolerance: Option<f64>) -> ProjectionReport {
    let eps = tolerance.unwrap_or_else(|| default_tolerance(config));
    let a: Vec<Complex> = config.punctures().iter().map(|&p| frame.project(p)).collect();
    let mut m0 = 0;
    let clusters: Vec<Cluster> = cluster_indices(&a, eps)
        .into_iter()
        .map(|members| {
            let m = members.len();
            let b = if members.iter().any(|&i| a[i].norm() < eps) {
                m0 = m;
                Complex::new(0.0, 0.0)
            } else {
                members.iter().map(|&i| a[i]).sum::<Complex>() / m as f64
            };
            Cluster { b, members, m }
        })
        .collect();
    let generic = clusters.iter().all(|c| c.m == 1);
    let accumulation_flag = accumulation_heuristic(config, &a, eps);
    ProjectionReport {
        frame: *frame,
        a,
        clusters,
        m0,
        generic,
        accumulation_flag,
        tolerance: eps,
        truncated: config.tail().is_some(),
    }
}

/// Advisory test for projections piling up in a bounded region.
///
/// Only configurations that declare an infinite tail are considered. With the
/// centers ordered by distance from the origin, `R0` is the largest projected
/// modulus in the nearer half; the flag is raised when the outermost quarter
/// still adds new clusters inside the disk of radius `R0`.
fn accumulation_heuristic(config: &PunctureConfig, a: &[Complex], eps: f64) -> bool {
    let n = a.len();
    if config.tail().is_none() || n < 4 {
        return false;
    }
    let mut order: Vec<usize> = (0..n).collect();
    let pts = config.punctures();
    order.sort_by(|&i, &j| pts[i].norm().total_cmp(&pts[j].norm()));
    let radius = order[..n / 2].iter().map(|&i| a[i].norm()).fold(0.0, f64::max);
    let clusters_inside = |prefix: usize| {
        let inside: Vec<Complex> = order[..prefix]
            .iter()
            .map(|&i| a[i])
            .filter(|z| z.norm() <= radius)
            .collect();
        cluster_indices(&inside, eps).len()
    };
    clusters_inside(n) > clusters_inside((3 * n).div_ceil(4))
}

/// Index pairs `(i, j)`, `i < j`, 0-based, whose difference is aligned with
/// `v` to within `tol` (sine of the angle). Empty means the projection is
/// injective on the listed centers.
pub fn bad_set_membership(config: &PunctureConfig, v: Point3, tol: f64) -> Result<Vec<(usize, usize)>> {
    let v = v.normalized().ok_or(Error::ZeroVector)?;
    let pts = config.punctures();
    let mut out = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = pts[i] - pts[j];
            if d.cross(v).norm() / d.norm() < tol {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}

/// Spherical-cap measures for the bad directions near each center.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapEstimate {
    pub n: u32,
    /// `2 pi (1 - cos s_j)` with `s_j = min(n / |p_j|, pi)`.
    pub exact_measures: Vec<f64>,
    /// `sum pi (n / |p_j|)^2`.
    pub bound: f64,
    /// Monte Carlo measure of the union of the caps `angle(v, p_j) <= s_j`.
    pub mc_union_estimate: f64,
    pub mc_stddev: f64,
    /// Two-sided family `|sin angle(v, p_j)| <= n / |p_j|`, measure
    /// `4 pi (1 - sqrt(1 - s^2))`, or `4 pi` once `s >= 1`.
    pub sine_measures: Vec<f64>,
    pub mc_sine_union_estimate: f64,
    pub mc_sine_stddev: f64,
    pub samples: u64,
    pub seed: u64,
}

impl CapEstimate {
    pub fn exact_sum(&self) -> f64 {
        self.exact_measures.iter().sum()
    }
}

const MC_CHUNK: u64 = 1 << 16;

/// Uniform direction `k` of the counter-based stream for `seed`: chunk
/// `k / MC_CHUNK` owns its own ChaCha stream, so results do not depend on
/// how chunks are spread over threads.
fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

pub fn cap_estimate(config: &PunctureConfig, n: u32, samples: u64, seed: u64) -> Result<CapEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let mut axes = Vec::with_capacity(config.len());
    let mut ratios = Vec::with_capacity(config.len());
    for (index, &p) in config.punctures().iter().enumerate() {
        let norm = p.norm();
        if norm == 0.0 {
            return Err(Error::OriginPuncture { index });
        }
        axes.push(p * (1.0 / norm));
        ratios.push(n as f64 / norm);
    }
    let exact_measures = ratios.iter().map(|&s| 2.0 * PI * (1.0 - s.min(PI).cos())).collect();
    let sine_measures = ratios
        .iter()
        .map(|&s| {
            if s < 1.0 {
                4.0 * PI * (1.0 - (1.0 - s * s).sqrt())
            } else {
                4.0 * PI
            }
        })
        .collect();
    let bound = ratios.iter().map(|&s| PI * s * s).sum();

    let cos_limits: Vec<f64> = ratios.iter().map(|&s| s.min(PI).cos()).collect();
    let sin_sq_limits: Vec<f64> = ratios.iter().map(|&s| s * s).collect();
    let chunks = samples.div_ceil(MC_CHUNK);
    let (hits, sine_hits) = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(seed, chunk);
            let len = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let (mut hit, mut sine_hit) = (0u64, 0u64);
            for _ in 0..len {
                let v = Point3::from(UnitSphere.sample(&mut rng));
                let mut in_cap = false;
                let mut in_sine = false;
                for (j, axis) in axes.iter().enumerate() {
                    let c = v.dot(*axis);
                    in_cap |= c >= cos_limits[j];
                    in_sine |= 1.0 - c * c <= sin_sq_limits[j];
                    if in_cap && in_sine {
                        break;
                    }
                }
                hit += in_cap as u64;
                sine_hit += in_sine as u64;
            }
            (hit, sine_hit)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let estimate = |h: u64| {
        let p = h as f64 / samples as f64;
        (4.0 * PI * p, 4.0 * PI * (p * (1.0 - p) / samples as f64).sqrt())
    };
    let (mc_union_estimate, mc_stddev) = estimate(hits);
    let (mc_sine_union_estimate, mc_sine_stddev) = estimate(sine_hits);
    Ok(CapEstimate {
        n,
        exact_measures,
        bound,
        mc_union_estimate,
        mc_stddev,
        sine_measures,
        mc_sine_union_estimate,
        mc_sine_stddev,
        samples,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveySummary {
    pub directions: usize,
    pub seed: u64,
    pub fraction_generic: f64,
    pub fraction_accumulating_heuristic: f64,
}

/// Draws `num_directions` uniform directions from `seed` and projects along each.
pub fn genericity_survey(config: &PunctureConfig, num_directions: usize, seed: u64) -> Result<SurveySummary> {
    if num_directions == 0 {
        return Err(Error::InvalidParameter("survey needs at least one direction".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<Point3> = (0..num_directions)
        .map(|_| Point3::from(UnitSphere.sample(&mut rng)))
        .collect();
    let flags: Vec<(bool, bool)> = dirs
        .par_iter()
        .map(|&v| {
            let frame = make_frame(v)?;
            let r = project(config, &frame, None);
            Ok((r.generic, r.accumulation_flag))
        })
        .collect::<Result<_>>()?;
    let total = num_directions as f64;
    Ok(SurveySummary {
        directions: num_directions,
        seed,
        fraction_generic: flags.iter().filter(|f| f.0).count() as f64 / total,
        fraction_accumulating_heuristic: flags.iter().filter(|f| f.1).count() as f64 / total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{generate_config, GenerateKind, TailKind, TailModel};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn two_center() -> PunctureConfig {
        generate_config(GenerateKind::CollinearX { spacing: 1.0, count: 2 }).unwrap()
    }

    #[test]
    fn axis_frames() {
        let f = make_frame(Point3::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!((f.f1, f.f2), (Point3::new(0.0, 1.0, 0.0), Point3::new(0.0, 0.0, 1.0)));
        assert_eq!(f.id(), "least_aligned_axis:y");
        let f = make_frame(Point3::new(0.0, 0.0, 3.0)).unwrap();
        assert_eq!((f.f1, f.f2), (Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)));
        assert!(matches!(make_frame(Point3::ORIGIN), Err(Error::ZeroVector)));
    }

    #[test]
    fn random_frames_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let v = Point3::from(UnitSphere.sample(&mut rng)) * 3.7;
            let f = make_frame(v).unwrap();
            assert!(f.orthonormality_residual() <= 1e-12);
        }
    }

    #[test]
    fn two_center_along_x() {
        let c = two_center();
        let r = project(&c, &make_frame(Point3::new(1.0, 0.0, 0.0)).unwrap(), None);
        assert_eq!(r.a, vec![Complex::new(0.0, 0.0); 2]);
        assert_eq!(r.clusters.len(), 1);
        assert_eq!(r.clusters[0].members, vec![0, 1]);
        assert_eq!(r.m0, 2);
        assert!(!r.generic);
        assert_eq!(r.singular_clusters().count(), 1);
        let r = project(&c, &make_frame(Point3::new(0.0, 0.0, 1.0)).unwrap(), None);
        assert!(r.generic);
        assert_eq!(r.m0, 1);
    }

    #[test]
    fn single_point_projection() {
        let c = PunctureConfig::with_unit_weights(vec![Point3::new(5.0, 2.0, 3.0)], "").unwrap();
        let r = project(&c, &make_frame(Point3::new(1.0, 0.0, 0.0)).unwrap(), None);
        assert_eq!(r.a, vec![Complex::new(2.0, 3.0)]);
        assert_eq!(r.m0, 0);
    }

    #[test]
    fn geometric_chain_projects_to_distinct_imaginary_points() {
        let c = generate_config(GenerateKind::GeometricZ { ratio: 2.0, count: 20 }).unwrap();
        let r = project(&c, &make_frame(Point3::new(1.0, 0.0, 0.0)).unwrap(), None);
        for (j, a) in r.a.iter().enumerate() {
            assert_eq!(*a, Complex::new(0.0, 2f64.powi(j as i32 + 1)));
        }
        assert!(r.generic);
        assert!(!r.accumulation_flag);
    }

    #[test]
    fn accumulating_projections_are_flagged() {
        let pts: Vec<Point3> = (1..=40)
            .map(|j| Point3::new((j * j) as f64, 0.0, 1.0 / j as f64))
            .collect();
        let tail = TailModel::new(TailKind::PowerLaw { exponent: 2.0 }, 40).unwrap();
        let c = PunctureConfig::new(pts, vec![-1; 40], Some(tail), "").unwrap();
        let r = project(&c, &make_frame(Point3::new(1.0, 0.0, 0.0)).unwrap(), None);
        assert!(r.generic);
        assert!(r.accumulation_flag);
        let r = project(&c, &make_frame(Point3::new(0.0, 0.0, 1.0)).unwrap(), None);
        assert!(!r.accumulation_flag);
    }

    #[test]
    fn bad_pairs() {
        let c = two_center();
        assert_eq!(
            bad_set_membership(&c, Point3::new(1.0, 0.0, 0.0), 1e-12).unwrap(),
            vec![(0, 1)]
        );
        assert!(bad_set_membership(&c, Point3::new(0.0, 0.0, 1.0), 1e-12)
            .unwrap()
            .is_empty());
        let ball = generate_config(GenerateKind::RandomBall {
            radius: 1.0,
            count: 20,
            seed: 5,
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let v = Point3::from(UnitSphere.sample(&mut rng));
            assert!(bad_set_membership(&ball, v, 1e-12).unwrap().is_empty());
        }
    }

    #[test]
    fn cap_single_center() {
        let c = PunctureConfig::with_unit_weights(vec![Point3::new(0.0, 2.0, 0.0)], "").unwrap();
        let e = cap_estimate(&c, 1, 1000, 1).unwrap();
        assert_relative_eq!(
            e.exact_measures[0],
            2.0 * PI * (1.0 - 0.5f64.cos()),
            max_relative = 1e-15
        );
        assert_relative_eq!(e.bound, PI / 4.0, max_relative = 1e-15);
        assert!(e.exact_measures[0] <= e.bound);
        let z = cap_estimate(&c, 0, 1000, 1).unwrap();
        assert_eq!(z.exact_measures, vec![0.0]);
        assert_eq!((z.bound, z.mc_union_estimate), (0.0, 0.0));
    }

    #[test]
    fn cap_errors() {
        let c = PunctureConfig::with_unit_weights(vec![Point3::new(1.0, 0.0, 0.0), Point3::ORIGIN], "").unwrap();
        assert!(matches!(
            cap_estimate(&c, 1, 10, 0),
            Err(Error::OriginPuncture { index: 1 })
        ));
        assert!(cap_estimate(&two_center(), 1, 0, 0).is_err());
    }

    #[test]
    fn whole_sphere_caps() {
        let c = PunctureConfig::with_unit_weights(vec![Point3::new(0.0, 0.0, 0.25)], "").unwrap();
        let e = cap_estimate(&c, 1, 5000, 2).unwrap();
        assert_relative_eq!(e.exact_measures[0], 4.0 * PI, max_relative = 1e-15);
        assert_eq!(e.mc_union_estimate, 4.0 * PI);
        assert_eq!(e.sine_measures[0], 4.0 * PI);
    }

    #[test]
    fn monte_carlo_matches_a_single_cap() {
        let c = PunctureConfig::with_unit_weights(vec![Point3::new(0.0, 0.0, 1.5)], "").unwrap();
        let e = cap_estimate(&c, 1, 400_000, 8).unwrap();
        assert!((e.mc_union_estimate - e.exact_measures[0]).abs() <= 4.0 * e.mc_stddev);
        assert!((e.mc_sine_union_estimate - e.sine_measures[0]).abs() <= 4.0 * e.mc_sine_stddev);
    }

    #[test]
    fn monte_carlo_is_reproducible_across_chunks() {
        let c = generate_config(GenerateKind::GeometricZ { ratio: 2.0, count: 5 }).unwrap();
        let a = cap_estimate(&c, 1, 3 * MC_CHUNK + 17, 4).unwrap();
        let b = cap_estimate(&c, 1, 3 * MC_CHUNK + 17, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn survey_examples() {
        let ball = generate_config(GenerateKind::RandomBall {
            radius: 1.0,
            count: 10,
            seed: 7,
        })
        .unwrap();
        let s = genericity_survey(&ball, 2000, 1).unwrap();
        assert_eq!(s.fraction_generic, 1.0);
        assert_eq!(s, genericity_survey(&ball, 2000, 1).unwrap());
        let line = generate_config(GenerateKind::CollinearX { spacing: 1.0, count: 3 }).unwrap();
        assert_eq!(genericity_survey(&line, 2000, 2).unwrap().fraction_generic, 1.0);
    }

    fn arb_dir() -> impl Strategy<Value = Point3> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("nonzero", |(a, b, c)| a * a + b * b + c * c > 1e-4)
            .prop_map(|(a, b, c)| Point3::new(a, b, c))
    }

    fn arb_int_config() -> impl Strategy<Value = PunctureConfig> {
        proptest::collection::vec((-4i32..5, -4i32..5, -4i32..5), 1..10).prop_filter_map("distinct", |raw| {
            let pts = raw
                .into_iter()
                .map(|(x, y, z)| Point3::new(x as f64, y as f64, z as f64))
                .collect();
            PunctureConfig::with_unit_weights(pts, "").ok()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn rotation_multiplies_by_phase(c in arb_int_config(), v in arb_dir(), phi in -3.0f64..3.0) {
            let frame = make_frame(v).unwrap();
            let base = project(&c, &frame, None);
            let turned = project(&c, &frame.rotated(phi), None);
            let phase = Complex::from_polar(1.0, phi);
            for (a, b) in base.a.iter().zip(&turned.a) {
                prop_assert!((a * phase - b).norm() <= 1e-12 * (1.0 + a.norm()));
            }
            prop_assert!(turned.frame.orthonormality_residual() <= 1e-12);
            prop_assert_eq!(base.m0, turned.m0);
            let shape = |r: &ProjectionReport| {
                let mut s: Vec<Vec<usize>> = r.clusters.iter().map(|c| c.members.clone()).collect();
                s.sort();
                s
            };
            prop_assert_eq!(shape(&base), shape(&turned));
        }

        #[test]
        fn multiplicities_partition_the_centers(c in arb_int_config(), v in arb_dir()) {
            let r = project(&c, &make_frame(v).unwrap(), None);
            prop_assert_eq!(r.clusters.iter().map(|k| k.m).sum::<usize>(), c.len());
            let mut all: Vec<usize> = r.clusters.iter().flat_map(|k| k.members.clone()).collect();
            all.sort();
            prop_assert_eq!(all, (0..c.len()).collect::<Vec<_>>());
            prop_assert_eq!(r.generic, r.clusters.iter().all(|k| k.m == 1));
        }

        #[test]
        fn bad_pairs_match_collisions(c in arb_int_config(), i in 0usize..10, j in 0usize..10, k in 0usize..3) {
            let pts = c.punctures();
            // directions through integer differences hit collisions on purpose
            let v = if i % pts.len() != j % pts.len() {
                pts[i % pts.len()] - pts[j % pts.len()]
            } else {
                Point3::axis(k)
            };
            let tol = 1e-9;
            let frame = make_frame(v).unwrap();
            let bad = bad_set_membership(&c, v, tol).unwrap();
            let r = project(&c, &frame, Some(tol));
            prop_assert_eq!(!bad.is_empty(), !r.generic);
        }

        #[test]
        fn cap_terms_respect_the_quadratic_bound(
            radii in proptest::collection::vec(0.4f64..50.0, 1..8),
            n in 0u32..4,
        ) {
            let pts = radii.iter().enumerate().map(|(j, r)| Point3::new(0.0, *r, j as f64 * 1e-3)).collect();
            let c = PunctureConfig::with_unit_weights(pts, "");
            prop_assume!(c.is_ok());
            let c = c.unwrap();
            let e = cap_estimate(&c, n, 64, 0).unwrap();
            for (m, p) in e.exact_measures.iter().zip(c.punctures()) {
                let s = n as f64 / p.norm();
                prop_assert!(*m <= PI * s * s + 1e-15);
            }
        }
    }
}
