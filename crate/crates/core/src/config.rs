//! Puncture configurations: centers in R^3, integer Chern weights and an
//! optional analytic model for the part of the sequence that a finite list
//! cannot hold.

use std::cmp::Ordering;
use std::fmt;
use std::io::Read;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Separation below which two distinct punctures are reported as near-duplicates.
pub const MIN_SEPARATION_WARNING: f64 = 1e-9;

/// Point (or vector) in R^3.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Point3) -> Point3 {
        Point3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Point3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Component `i` (0 = x, 1 = y, 2 = z).
    pub fn component(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("component index {i} out of range"),
        }
    }

    /// Unit coordinate vector along axis `i`.
    pub fn axis(i: usize) -> Point3 {
        match i {
            0 => Point3::new(1.0, 0.0, 0.0),
            1 => Point3::new(0.0, 1.0, 0.0),
            2 => Point3::new(0.0, 0.0, 1.0),
            _ => panic!("axis index {i} out of range"),
        }
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        p.to_array()
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Growth law assumed for the punctures that follow the listed ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailKind {
    /// The sequence continues, but nothing is known about it.
    None,
    /// Radii grow geometrically with the given ratio (> 1).
    Geometric { ratio: f64 },
    /// Radii grow like `j^exponent` in the 1-based index `j`.
    PowerLaw { exponent: f64 },
    /// A caller-supplied bound on the omitted part of `sum |e_j| / |p_j|`.
    Custom { value: f64 },
}

/// Analytic tail of an infinite configuration.
///
/// `anchor` is the 0-based index at which the model takes over: the radius of
/// puncture `anchor - 1` seeds the model, and every index at or beyond the
/// end of the listed punctures is described by the model only. Modelled
/// punctures carry unit weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub kind: TailKind,
    pub anchor: usize,
}

impl TailModel {
    pub fn new(kind: TailKind, anchor: usize) -> Result<Self> {
        match kind {
            TailKind::Geometric { ratio } if !(ratio > 1.0 && ratio.is_finite()) => {
                return Err(Error::InvalidParameter(format!(
                    "geometric tail ratio must exceed 1, got {ratio}"
                )))
            }
            TailKind::PowerLaw { exponent } if !exponent.is_finite() => {
                return Err(Error::InvalidParameter(format!(
                    "power-law exponent must be finite, got {exponent}"
                )))
            }
            TailKind::Custom { value } if value.is_nan() || value < 0.0 => {
                return Err(Error::InvalidParameter(format!(
                    "custom tail bound must be non-negative, got {value}"
                )))
            }
            _ => {}
        }
        Ok(TailModel { kind, anchor })
    }
}

/// Ordered list of distinct centers with one Chern weight each.
///
/// `tail == None` means the listed punctures are the whole configuration.
/// Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct PunctureConfig {
    punctures: Vec<Point3>,
    weights: Vec<i64>,
    tail: Option<TailModel>,
    label: String,
}

impl PunctureConfig {
    /// Validates and builds a configuration.
    pub fn new(
        punctures: Vec<Point3>,
        weights: Vec<i64>,
        tail: Option<TailModel>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if punctures.len() != weights.len() {
            return Err(Error::LengthMismatch {
                punctures: punctures.len(),
                weights: weights.len(),
            });
        }
        if let Some(index) = punctures.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if let Some((first, second)) = first_duplicate(&punctures) {
            return Err(Error::DuplicatePuncture { first, second });
        }
        if let Some(t) = &tail {
            if t.anchor == 0 || t.anchor > punctures.len() {
                return Err(Error::InvalidParameter(format!(
                    "tail anchor {} outside 1..={}",
                    t.anchor,
                    punctures.len()
                )));
            }
        }
        Ok(PunctureConfig {
            punctures,
            weights,
            tail,
            label: label.into(),
        })
    }

    /// All weights set to -1.
    pub fn with_unit_weights(punctures: Vec<Point3>, label: impl Into<String>) -> Result<Self> {
        let weights = vec![-1; punctures.len()];
        Self::new(punctures, weights, None, label)
    }

    pub fn punctures(&self) -> &[Point3] {
        &self.punctures
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn tail(&self) -> Option<&TailModel> {
        self.tail.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.punctures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.punctures.is_empty()
    }

    /// `(point, weight)` pairs in input order.
    pub fn centers(&self) -> impl Iterator<Item = (Point3, i64)> + '_ {
        self.punctures.iter().copied().zip(self.weights.iter().copied())
    }

    /// Largest pairwise distance (0 for fewer than two punctures).
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.punctures.iter().enumerate() {
            for q in &self.punctures[i + 1..] {
                d = d.max(p.distance(*q));
            }
        }
        d
    }

    /// Distance from `x` to the closest puncture together with its index.
    pub fn nearest(&self, x: Point3) -> Option<(usize, f64)> {
        self.punctures
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.distance(x)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Pairs of distinct punctures closer than `min_separation`.
    pub fn near_duplicates(&self, min_separation: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, p) in self.punctures.iter().enumerate() {
            for (j, q) in self.punctures.iter().enumerate().skip(i + 1) {
                if p.distance(*q) < min_separation {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Serializes to the JSON interchange format.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&ConfigDoc::from(self)).expect("config serializes") + "\n"
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: ConfigDoc = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        doc.try_into()
    }
}

fn first_duplicate(points: &[Point3]) -> Option<(usize, usize)> {
    // +0.0 folds negative zero onto positive zero so that total_cmp agrees with ==.
    let key = |p: &Point3| [p.x + 0.0, p.y + 0.0, p.z + 0.0];
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (ka, kb) = (key(&points[a]), key(&points[b]));
        ka.iter()
            .zip(kb.iter())
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
        .windows(2)
        .filter(|w| points[w[0]] == points[w[1]])
        .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
        .min()
}

/// Input formats accepted by [`load_config`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
}

/// Reads and validates a configuration.
pub fn load_config<R: Read>(mut source: R, format: Format) -> Result<PunctureConfig> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    match format {
        Format::Json => PunctureConfig::from_json_str(&text),
    }
}

/// Built-in configuration families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenerateKind {
    /// `p_j = (0, 0, ratio^j)` for `j = 1..=count`, with a geometric tail.
    GeometricZ { ratio: f64, count: usize },
    /// `p_j = (j * spacing, 0, 0)` for `j = 0..count`; finite.
    CollinearX { spacing: f64, count: usize },
    /// `count` points uniform in the ball of the given radius; finite.
    RandomBall { radius: f64, count: usize, seed: u64 },
}

/// Deterministic generator for the built-in families. All weights are -1.
pub fn generate_config(kind: GenerateKind) -> Result<PunctureConfig> {
    match kind {
        GenerateKind::GeometricZ { ratio, count } => {
            check_count(count)?;
            if !(ratio > 1.0 && ratio.is_finite()) {
                return Err(Error::InvalidParameter(format!("ratio must exceed 1, got {ratio}")));
            }
            let mut z = 1.0;
            let punctures = (0..count)
                .map(|_| {
                    z *= ratio;
                    Point3::new(0.0, 0.0, z)
                })
                .collect::<Vec<_>>();
            let tail = TailModel::new(TailKind::Geometric { ratio }, count)?;
            PunctureConfig::new(
                punctures,
                vec![-1; count],
                Some(tail),
                format!("geometric_z(ratio={ratio},count={count})"),
            )
        }
        GenerateKind::CollinearX { spacing, count } => {
            check_count(count)?;
            if !(spacing > 0.0 && spacing.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "spacing must be positive, got {spacing}"
                )));
            }
            let punctures = (0..count).map(|j| Point3::new(j as f64 * spacing, 0.0, 0.0)).collect();
            PunctureConfig::new(
                punctures,
                vec![-1; count],
                None,
                format!("collinear_x(spacing={spacing},count={count})"),
            )
        }
        GenerateKind::RandomBall { radius, count, seed } => {
            check_count(count)?;
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "radius must be positive, got {radius}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut punctures = Vec::with_capacity(count);
            while punctures.len() < count {
                let p = Point3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                if p.dot(p) <= 1.0 && !punctures.contains(&(p * radius)) {
                    punctures.push(p * radius);
                }
            }
            PunctureConfig::new(
                punctures,
                vec![-1; count],
                None,
                format!("random_ball(radius={radius},count={count},seed={seed})"),
            )
        }
    }
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct ConfigDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    punctures: Vec<Point3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<TailDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TailDoc {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    anchor: Option<usize>,
}

impl TryFrom<ConfigDoc> for PunctureConfig {
    type Error = Error;

    fn try_from(doc: ConfigDoc) -> Result<Self> {
        let n = doc.punctures.len();
        let weights = doc.weights.unwrap_or_else(|| vec![-1; n]);
        let tail = doc
            .tail
            .map(|t| {
                let missing = |field: &str| Error::Parse(format!("tail kind '{}' requires field '{field}'", t.kind));
                let kind = match t.kind.as_str() {
                    "none" => TailKind::None,
                    "geometric" => TailKind::Geometric {
                        ratio: t.ratio.ok_or_else(|| missing("ratio"))?,
                    },
                    "powerlaw" => TailKind::PowerLaw {
                        exponent: t.exponent.ok_or_else(|| missing("exponent"))?,
                    },
                    "custom" => TailKind::Custom {
                        value: t.value.ok_or_else(|| missing("value"))?,
                    },
                    other => return Err(Error::Parse(format!("unknown tail kind '{other}'"))),
                };
                TailModel::new(kind, t.anchor.unwrap_or(n))
            })
            .transpose()?;
        PunctureConfig::new(doc.punctures, weights, tail, doc.label.unwrap_or_default())
    }
}

impl From<&PunctureConfig> for ConfigDoc {
    fn from(c: &PunctureConfig) -> Self {
        let tail = c.tail.map(|t| {
            let (kind, ratio, exponent, value) = match t.kind {
                TailKind::None => ("none", None, None, None),
                TailKind::Geometric { ratio } => ("geometric", Some(ratio), None, None),
                TailKind::PowerLaw { exponent } => ("powerlaw", None, Some(exponent), None),
                TailKind::Custom { value } => ("custom", None, None, Some(value)),
            };
            TailDoc {
                kind: kind.to_string(),
                ratio,
                exponent,
                value,
                anchor: Some(t.anchor),
            }
        });
        ConfigDoc {
            label: (!c.label.is_empty()).then(|| c.label.clone()),
            punctures: c.punctures.clone(),
            weights: Some(c.weights.clone()),
            tail,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_two_centers() {
        let c = PunctureConfig::from_json_str(r#"{"punctures":[[0,0,2],[0,0,4]], "weights":[-1,-1]}"#).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.punctures()[1], Point3::new(0.0, 0.0, 4.0));
        assert_eq!(c.weights(), &[-1, -1]);
        assert!(c.tail().is_none());
    }

    #[test]
    fn rejects_duplicates_with_index_pair() {
        let err = PunctureConfig::from_json_str(r#"{"punctures":[[0,0,1],[5,5,5],[0,0,1]], "weights":[-1,-1,-1]}"#)
            .unwrap_err();
        assert!(matches!(err, Error::DuplicatePuncture { first: 0, second: 2 }), "{err}");
    }

    #[test]
    fn negative_zero_is_a_duplicate() {
        let err = PunctureConfig::with_unit_weights(vec![Point3::new(0.0, 0.0, 1.0), Point3::new(-0.0, 0.0, 1.0)], "")
            .unwrap_err();
        assert!(matches!(err, Error::DuplicatePuncture { .. }));
    }

    #[test]
    fn rejects_length_mismatch() {
        let err = PunctureConfig::from_json_str(r#"{"punctures":[[0,0,1]], "weights":[-1,-1]}"#).unwrap_err();
        assert!(matches!(
            err,
            Error::LengthMismatch {
                punctures: 1,
                weights: 2
            }
        ));
    }

    #[test]
    fn weights_default_to_minus_one() {
        let c = PunctureConfig::from_json_str(r#"{"punctures":[[1,0,0],[2,0,0]]}"#).unwrap();
        assert_eq!(c.weights(), &[-1, -1]);
    }

    #[test]
    fn accepts_exponent_notation_and_tail() {
        let c = PunctureConfig::from_json_str(
            r#"{"label":"t","punctures":[[0,0,2e0],[0,0,4.0E+0]],
                "tail":{"kind":"geometric","ratio":2,"anchor":2}}"#,
        )
        .unwrap();
        assert_eq!(c.label(), "t");
        assert_eq!(c.tail().unwrap().kind, TailKind::Geometric { ratio: 2.0 });
    }

    #[test]
    fn rejects_bad_tails() {
        for doc in [
            r#"{"punctures":[[0,0,1]], "tail":{"kind":"geometric","ratio":0.5}}"#,
            r#"{"punctures":[[0,0,1]], "tail":{"kind":"custom","value":-1}}"#,
            r#"{"punctures":[[0,0,1]], "tail":{"kind":"geometric"}}"#,
            r#"{"punctures":[[0,0,1]], "tail":{"kind":"zeta"}}"#,
            r#"{"punctures":[[0,0,1]], "tail":{"kind":"none","anchor":7}}"#,
        ] {
            assert!(PunctureConfig::from_json_str(doc).is_err(), "{doc}");
        }
    }

    #[test]
    fn rejects_malformed_json() {
        assert!(matches!(
            PunctureConfig::from_json_str("{\"punctures\": [[0,0]]}"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn near_duplicates_are_reported() {
        let c =
            PunctureConfig::with_unit_weights(vec![Point3::new(0.0, 0.0, 1.0), Point3::new(0.0, 0.0, 1.0 + 1e-12)], "")
                .unwrap();
        assert_eq!(c.near_duplicates(MIN_SEPARATION_WARNING), vec![(0, 1)]);
    }

    #[test]
    fn geometric_z_fixture() {
        let c = generate_config(GenerateKind::GeometricZ { ratio: 2.0, count: 3 }).unwrap();
        assert_eq!(
            c.punctures(),
            &[
                Point3::new(0.0, 0.0, 2.0),
                Point3::new(0.0, 0.0, 4.0),
                Point3::new(0.0, 0.0, 8.0)
            ]
        );
        assert_eq!(c.weights(), &[-1, -1, -1]);
        assert_eq!(
            c.tail(),
            Some(&TailModel {
                kind: TailKind::Geometric { ratio: 2.0 },
                anchor: 3
            })
        );
    }

    #[test]
    fn geometric_ratio_is_exact_for_powers_of_two() {
        let c = generate_config(GenerateKind::GeometricZ { ratio: 2.0, count: 60 }).unwrap();
        for w in c.punctures().windows(2) {
            assert_eq!(w[1].norm() / w[0].norm(), 2.0);
        }
    }

    #[test]
    fn collinear_pair() {
        let c = generate_config(GenerateKind::CollinearX { spacing: 1.0, count: 2 }).unwrap();
        assert_eq!(c.punctures(), &[Point3::ORIGIN, Point3::new(1.0, 0.0, 0.0)]);
    }

    #[test]
    fn random_ball_is_seeded() {
        let kind = GenerateKind::RandomBall {
            radius: 1.0,
            count: 5,
            seed: 42,
        };
        let a = generate_config(kind).unwrap();
        let b = generate_config(kind).unwrap();
        assert_eq!(a, b);
        assert!(a.punctures().iter().all(|p| p.norm() <= 1.0));
        let c = generate_config(GenerateKind::RandomBall {
            radius: 1.0,
            count: 5,
            seed: 43,
        })
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generator_rejects_bad_parameters() {
        for kind in [
            GenerateKind::GeometricZ { ratio: 1.0, count: 3 },
            GenerateKind::GeometricZ { ratio: 2.0, count: 0 },
            GenerateKind::CollinearX { spacing: 0.0, count: 2 },
            GenerateKind::RandomBall {
                radius: -1.0,
                count: 2,
                seed: 0,
            },
        ] {
            assert!(matches!(generate_config(kind), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn json_round_trip_is_identity() {
        let c = generate_config(GenerateKind::RandomBall {
            radius: 3.0,
            count: 7,
            seed: 9,
        })
        .unwrap();
        let back = PunctureConfig::from_json_str(&c.to_json_string()).unwrap();
        assert_eq!(c, back);
        let g = generate_config(GenerateKind::GeometricZ { ratio: 1.5, count: 9 }).unwrap();
        assert_eq!(PunctureConfig::from_json_str(&g.to_json_string()).unwrap(), g);
    }
}
