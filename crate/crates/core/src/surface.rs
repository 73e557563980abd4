//! The hypersurface `u1 u2 = P(u3)` in C^3, the chart atlas of its minimal
//! resolution and the transition cocycle between charts.
//!
//! Zero ids: `0` is the origin, `k >= 1` is the `k`-th active zero of the
//! product (sorted by modulus). Chart `alpha` carries the gauge function
//! `g_alpha(u) = u^{J_0} * prod_k E_{l_k}(u/b_k)^{J_k}` and the map
//! `chi_alpha(u, v) = (P(u) / (g_alpha(u) v), g_alpha(u) v, u)`. A point with
//! coordinate `v` in chart `alpha` has coordinate `f_{alpha beta}(u) v` in
//! chart `beta`, where `f_{alpha beta} = g_alpha / g_beta`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::entire::{winding_number, EntireProduct};
use crate::{Complex, Error, Result};

/// Chart of the resolved surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChartLabel {
    Minus,
    /// Intermediate chart `(zero, level)`, `1 <= level <= m - 1`.
    Mid {
        zero: usize,
        level: u32,
    },
    Plus,
}

impl fmt::Display for ChartLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartLabel::Minus => f.write_str("minus"),
            ChartLabel::Plus => f.write_str("plus"),
            ChartLabel::Mid { zero, level } => write!(f, "({zero},{level})"),
        }
    }
}

impl FromStr for ChartLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "minus" | "-" => Ok(ChartLabel::Minus),
            "plus" | "+" => Ok(ChartLabel::Plus),
            other => {
                let inner = other
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::UnknownChart(s.to_string()))?;
                let (k, l) = inner
                    .split_once(',')
                    .ok_or_else(|| Error::UnknownChart(s.to_string()))?;
                let zero = k.trim().parse().map_err(|_| Error::UnknownChart(s.to_string()))?;
                let level = l.trim().parse().map_err(|_| Error::UnknownChart(s.to_string()))?;
                Ok(ChartLabel::Mid { zero, level })
            }
        }
    }
}

impl Serialize for ChartLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Atlas `{minus, plus} + {(k,l)}` with the index functions `J_r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartAtlas {
    pub charts: Vec<ChartLabel>,
    pub product: EntireProduct,
    /// `orders[r] = m_r`, with `orders[0] = delta`.
    pub orders: Vec<u32>,
    /// `points[r] = b_r`, with `points[0] = 0`.
    #[serde(skip)]
    pub points: Vec<Complex>,
}

impl ChartAtlas {
    pub fn new(product: EntireProduct) -> Self {
        let mut orders = vec![product.delta];
        let mut points = vec![Complex::new(0.0, 0.0)];
        for z in product.active_zeros() {
            orders.push(z.m);
            points.push(z.b);
        }
        let mut charts = vec![ChartLabel::Minus];
        for (zero, &m) in orders.iter().enumerate() {
            charts.extend((1..m).map(|level| ChartLabel::Mid { zero, level }));
        }
        charts.push(ChartLabel::Plus);
        ChartAtlas {
            charts,
            product,
            orders,
            points,
        }
    }

    pub fn contains(&self, chart: ChartLabel) -> bool {
        self.charts.contains(&chart)
    }

    fn require(&self, chart: ChartLabel) -> Result<()> {
        if self.contains(chart) {
            Ok(())
        } else {
            Err(Error::UnknownChart(chart.to_string()))
        }
    }

    /// `J_r(chart)`.
    pub fn index(&self, chart: ChartLabel, r: usize) -> u32 {
        match chart {
            ChartLabel::Minus => 0,
            ChartLabel::Plus => self.orders[r],
            ChartLabel::Mid { zero, level } => {
                if zero == r {
                    level
                } else {
                    0
                }
            }
        }
    }

    /// Rows `chart -> [J_0, J_1, ...]`.
    pub fn index_table(&self) -> BTreeMap<String, Vec<u32>> {
        self.charts
            .iter()
            .map(|&c| {
                (
                    c.to_string(),
                    (0..self.orders.len()).map(|r| self.index(c, r)).collect(),
                )
            })
            .collect()
    }

    /// `log` of the zero-`r` building block at `u`: `log u` or `log E_{l}(u/b_r)`.
    fn log_block(&self, r: usize, u: Complex) -> Option<Complex> {
        if r == 0 {
            (u != Complex::new(0.0, 0.0)).then(|| u.ln())
        } else {
            self.product.log_factor(r - 1, u)
        }
    }

    /// `prod_r block_r(u)^{e_r}` in log space. `Ok(None)` means the value is 0.
    fn log_monomial(&self, exponents: &[i64], u: Complex) -> Result<Option<Complex>> {
        let mut sum = Complex::new(0.0, 0.0);
        let mut vanishes = false;
        for (r, &e) in exponents.iter().enumerate() {
            if e == 0 {
                continue;
            }
            match self.log_block(r, u) {
                Some(l) => sum += l * e as f64,
                None if e < 0 => return Err(Error::PoleAtU { u }),
                None => vanishes = true,
            }
        }
        Ok((!vanishes).then_some(sum))
    }

    fn exponent_difference(&self, alpha: ChartLabel, beta: ChartLabel) -> Vec<i64> {
        (0..self.orders.len())
            .map(|r| self.index(alpha, r) as i64 - self.index(beta, r) as i64)
            .collect()
    }

    /// `f_{alpha beta}(u)`.
    pub fn transition(&self, alpha: ChartLabel, beta: ChartLabel, u: Complex) -> Result<Complex> {
        self.require(alpha)?;
        self.require(beta)?;
        let exps = self.exponent_difference(alpha, beta);
        Ok(self.log_monomial(&exps, u)?.map_or(Complex::new(0.0, 0.0), |l| l.exp()))
    }

    /// Signed order of `f_{alpha beta}` at zero `r`, measured as a winding
    /// number on a circle of a quarter of the distance to the nearest other
    /// zero.
    pub fn pole_order(&self, alpha: ChartLabel, beta: ChartLabel, r: usize) -> Result<i64> {
        self.require(alpha)?;
        self.require(beta)?;
        if r >= self.points.len() {
            return Err(Error::InvalidParameter(format!("no zero with id {r}")));
        }
        let b = self.points[r];
        let separation = self
            .points
            .iter()
            .enumerate()
            .filter(|&(s, _)| s != r && (s != 0 || self.orders[0] > 0))
            .map(|(_, p)| (p - b).norm())
            .fold(f64::INFINITY, f64::min);
        let scale = b.norm().max(1.0);
        let radius = if separation.is_finite() {
            0.25 * separation
        } else {
            0.25 * scale
        };
        if radius <= 1e-9 * scale {
            return Err(Error::ZeroSeparationTooSmall { separation });
        }
        let exps = self.exponent_difference(alpha, beta);
        winding_number(
            |u| {
                self.log_monomial(&exps, u)?
                    .ok_or(Error::ContourThroughZero { distance: 0.0 })
            },
            b,
            radius,
            0,
        )
    }

    /// `|f_ab f_bg - f_ag| / |f_ag|`.
    pub fn cocycle_check(&self, alpha: ChartLabel, beta: ChartLabel, gamma: ChartLabel, u: Complex) -> Result<f64> {
        let ab = self.transition(alpha, beta, u)?;
        let bg = self.transition(beta, gamma, u)?;
        let ag = self.transition(alpha, gamma, u)?;
        Ok((ab * bg - ag).norm() / ag.norm())
    }

    /// Image of `(u, v)` in chart `alpha` on the surface.
    pub fn chi_map(&self, alpha: ChartLabel, u: Complex, v: Complex) -> Result<[Complex; 3]> {
        self.require(alpha)?;
        if v == Complex::new(0.0, 0.0) {
            return Err(Error::ZeroFibre);
        }
        let gauge: Vec<i64> = (0..self.orders.len()).map(|r| self.index(alpha, r) as i64).collect();
        let cofactor: Vec<i64> = (0..self.orders.len())
            .map(|r| self.orders[r] as i64 - self.index(alpha, r) as i64)
            .collect();
        let exp_or_zero = |l: Option<Complex>| l.map_or(Complex::new(0.0, 0.0), |l| l.exp());
        let g = exp_or_zero(self.log_monomial(&gauge, u)?);
        let rest = exp_or_zero(self.log_monomial(&cofactor, u)?);
        Ok([rest / v, g * v, u])
    }

    /// Pairs of charts that are adjacent in the chain `minus, (.,.)..., plus`.
    pub fn adjacent_pairs(&self) -> Vec<(ChartLabel, ChartLabel)> {
        self.charts.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// `|u1 u2 - P(u3)|`.
pub fn surface_residual(p: &EntireProduct, u1: Complex, u2: Complex, u3: Complex) -> f64 {
    (u1 * u2 - p.value(u3)).norm()
}

/// [`surface_residual`] divided by `max(|u1 u2|, |P(u3)|)` (or 1 if both vanish).
pub fn relative_surface_residual(p: &EntireProduct, u: [Complex; 3]) -> f64 {
    let lhs = u[0] * u[1];
    let rhs = p.value(u[2]);
    let scale = lhs.norm().max(rhs.norm());
    let scale = if scale > 0.0 { scale } else { 1.0 };
    (lhs - rhs).norm() / scale
}

/// A singular point `(0, 0, b)` of type `A_{m-1}` and its exceptional chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularPoint {
    pub zero: usize,
    pub b: Complex,
    pub m: u32,
    #[serde(rename = "type")]
    pub kind: String,
    pub point: [Complex; 3],
    pub chain: Vec<String>,
    /// Consecutive chain members meet in one point.
    pub adjacency: Vec<(usize, usize)>,
    /// Carried as metadata for every curve of the chain.
    pub self_intersection: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityReport {
    pub singular: Vec<SingularPoint>,
}

/// Singular points of `u1 u2 = P(u3)`: `(0, 0, b)` for every zero of order
/// at least two, where `grad(u1 u2 - P(u3)) = (u2, u1, -P'(u3))` vanishes.
pub fn singular_points(p: &EntireProduct) -> SingularityReport {
    let atlas = ChartAtlas::new(p.clone());
    let singular = atlas
        .orders
        .iter()
        .enumerate()
        .filter(|&(_, &m)| m >= 2)
        .map(|(zero, &m)| {
            let b = atlas.points[zero];
            let len = (m - 1) as usize;
            SingularPoint {
                zero,
                b,
                m,
                kind: format!("A{}", m - 1),
                point: [Complex::new(0.0, 0.0), Complex::new(0.0, 0.0), b],
                chain: (1..m).map(|l| format!("E_{zero}_{l}")).collect(),
                adjacency: (1..len).map(|i| (i - 1, i)).collect(),
                self_intersection: -2,
            }
        })
        .collect();
    SingularityReport { singular }
}

/// Outcome of the two-center blow-up fixture.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport {
    pub grid: usize,
    /// Worst of the five defining equations of the blow-up, relative.
    pub max_equation_residual: f64,
    /// Worst disagreement between chart images of the same point.
    pub max_overlap_residual: f64,
    /// Worst `|Theta(chi(u, v)) - (u, v)|`, relative.
    pub max_roundtrip_residual: f64,
    /// Limits of the charts at the two points removed from the blow-up.
    pub deleted_point_limits: Vec<DeletedLimit>,
    pub failures: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeletedLimit {
    pub description: String,
    pub affine: [Complex; 3],
    pub projective: [Complex; 3],
}

type BlowupPoint = ([Complex; 3], [Complex; 3]);

/// Explicit map of the two-center example into the blow-up of `u1 u2 = u3^2`
/// at the origin, chart `j` in `1..=3`.
pub fn blowup_chi(chart: usize, u: Complex, v: Complex) -> BlowupPoint {
    let one = Complex::new(1.0, 0.0);
    match chart {
        1 => {
            let w = u / v;
            ([u * u / v, v, u], [w * w, one, w])
        }
        2 => ([u / v, u * v, u], [one / v, v, one]),
        3 => {
            let w = u * v;
            ([one / v, u * u * v, u], [one, w * w, w])
        }
        _ => panic!("chart index {chart} out of range"),
    }
}

/// Inverse map on the chart domains `u2 != 0`, `U3 != 0`, `u1 != 0`.
pub fn blowup_theta(chart: usize, point: &BlowupPoint) -> (Complex, Complex) {
    let (a, p) = point;
    match chart {
        1 => (a[2], a[1]),
        2 => (a[2], p[1] / p[2]),
        3 => (a[2], Complex::new(1.0, 0.0) / a[0]),
        _ => panic!("chart index {chart} out of range"),
    }
}

fn normalise_projective(p: [Complex; 3]) -> [Complex; 3] {
    let pivot = *p
        .iter()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("three entries");
    p.map(|z| z / pivot)
}

/// Relative residuals of `u_j U_k = u_k U_j` and the two quadrics.
fn blowup_equations(point: &BlowupPoint) -> f64 {
    let (a, raw) = point;
    let p = normalise_projective(*raw);
    let rel = |x: Complex, y: Complex| {
        let s = x.norm().max(y.norm());
        if s == 0.0 {
            0.0
        } else {
            (x - y).norm() / s
        }
    };
    [
        rel(a[0] * p[1], a[1] * p[0]),
        rel(a[0] * p[2], a[2] * p[0]),
        rel(a[1] * p[2], a[2] * p[1]),
        rel(p[0] * p[1], p[2] * p[2]),
        rel(a[0] * a[1], a[2] * a[2]),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn point_distance(x: &BlowupPoint, y: &BlowupPoint) -> f64 {
    let affine_scale = x.0.iter().chain(y.0.iter()).map(|z| z.norm()).fold(1e-300, f64::max);
    let affine = (0..3).map(|i| (x.0[i] - y.0[i]).norm()).fold(0.0, f64::max) / affine_scale;
    // [x] = [y] iff all 2x2 minors vanish
    let (px, py) = (x.1, y.1);
    let size = |p: &[Complex; 3]| p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut minors: f64 = 0.0;
    for i in 0..3 {
        for j in i + 1..3 {
            minors = minors.max((px[i] * py[j] - px[j] * py[i]).norm());
        }
    }
    affine.max(minors / (size(&px) * size(&py)))
}

/// Runs the two-center fixture on a `grid x grid` set of `(u, v)` per chart.
pub fn blowup_fixture_check(grid: usize) -> BlowupReport {
    const TOL: f64 = 1e-10;
    let sample = |i: usize, phase: f64| {
        let t = i as f64 / grid.max(2) as f64;
        Complex::from_polar(0.2 + 1.8 * t, phase + 2.4 * i as f64)
    };
    let mut eq: f64 = 0.0;
    let mut overlap: f64 = 0.0;
    let mut roundtrip: f64 = 0.0;
    let mut failures = Vec::new();
    for chart in 1..=3 {
        for i in 0..grid {
            for j in 0..grid {
                let (u, v) = (sample(i, 0.3), sample(j, 1.1));
                let image = blowup_chi(chart, u, v);
                let e = blowup_equations(&image);
                eq = eq.max(e);
                if e > TOL {
                    failures.push(format!("chart M{chart} ({u}, {v}): equation residual {e:e}"));
                }
                let (bu, bv) = blowup_theta(chart, &image);
                let r = (bu - u).norm().max((bv - v).norm()) / u.norm().max(v.norm());
                roundtrip = roundtrip.max(r);
                if r > TOL {
                    failures.push(format!("chart M{chart} ({u}, {v}): round trip {r:e}"));
                }
                // the same point in the other charts: v1 = u v2 = u^2 v3
                let v1 = match chart {
                    1 => v,
                    2 => u * v,
                    _ => u * u * v,
                };
                for other in 1..=3 {
                    let w = match other {
                        1 => v1,
                        2 => v1 / u,
                        _ => v1 / (u * u),
                    };
                    let d = point_distance(&image, &blowup_chi(other, u, w));
                    overlap = overlap.max(d);
                    if d > TOL {
                        failures.push(format!("charts M{chart}/M{other} ({u}, {v}): overlap {d:e}"));
                    }
                }
            }
        }
    }
    let (tiny, huge) = (Complex::new(1e-12, 0.0), Complex::new(1e12, 0.0));
    let zero = Complex::new(0.0, 0.0);
    let limit = |description: &str, chart: usize, v: Complex| {
        let (affine, projective) = blowup_chi(chart, zero, v);
        DeletedLimit {
            description: description.to_string(),
            affine,
            projective: normalise_projective(projective),
        }
    };
    let deleted_point_limits = vec![
        limit("M1, u = 0, v -> 0", 1, tiny),
        limit("M3, u = 0, v -> infinity", 3, huge),
    ];
    BlowupReport {
        grid,
        max_equation_residual: eq,
        max_overlap_residual: overlap,
        max_roundtrip_residual: roundtrip,
        deleted_point_limits,
        passed: failures.is_empty(),
        failures,
    }
}
