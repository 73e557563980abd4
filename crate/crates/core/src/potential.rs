//! The harmonic potential `V_e(x) = sum |e_j| / (4 pi |x - p_j|)`, its
//! derivatives, and the summability criterion deciding whether a weighted
//! puncture set carries a positive harmonic potential at all.

use std::f64::consts::PI;

use serde::Serialize;

use crate::config::{Point3, PunctureConfig, TailKind};
use crate::{Error, Result};

/// Overall constant in front of the Newton kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `sum |e_j| / (4 pi r_j)`; the flux of `grad V` through a small sphere
    /// around `p_j` equals `e_j` when `e_j <= 0`.
    #[default]
    QuarterPi,
    /// `(1/2) sum |e_j| / r_j`, which is `2 pi` times the quarter-pi potential.
    Half,
}

impl Normalization {
    pub fn scale(self) -> f64 {
        match self {
            Normalization::QuarterPi => 1.0 / (4.0 * PI),
            Normalization::Half => 0.5,
        }
    }
}

fn check_off_punctures(config: &PunctureConfig, x: Point3) -> Result<()> {
    match config.nearest(x) {
        Some((index, distance)) if distance == 0.0 => Err(Error::AtPuncture { index, distance }),
        _ => Ok(()),
    }
}

/// Truncated potential at `x`.
pub fn eval_potential(config: &PunctureConfig, x: Point3, norm: Normalization) -> Result<f64> {
    check_off_punctures(config, x)?;
    let sum: f64 = config
        .centers()
        .map(|(p, e)| e.unsigned_abs() as f64 / x.distance(p))
        .sum();
    Ok(norm.scale() * sum)
}

/// Analytic gradient `-sum |e_j| (x - p_j) / |x - p_j|^3`, scaled by `norm`.
pub fn grad_potential(config: &PunctureConfig, x: Point3, norm: Normalization) -> Result<Point3> {
    check_off_punctures(config, x)?;
    let g = config.centers().fold(Point3::ORIGIN, |acc, (p, e)| {
        let d = x - p;
        let r = d.norm();
        acc - d * (e.unsigned_abs() as f64 / (r * r * r))
    });
    Ok(g * norm.scale())
}

/// Step `rel * dist(x, nearest puncture)`, the scale-aware choice used by the
/// finite-difference checks.
pub fn relative_step(config: &PunctureConfig, x: Point3, rel: f64) -> f64 {
    config.nearest(x).map_or(rel, |(_, d)| rel * d)
}

/// Absolute value of the 7-point finite-difference Laplacian of the
/// (quarter-pi) potential at `x`. Harmonicity makes this `O(h^2)`.
pub fn laplacian_residual(config: &PunctureConfig, x: Point3, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    let clearance = config.nearest(x).map_or(f64::INFINITY, |(_, d)| d);
    if clearance <= 10.0 * h {
        return Err(Error::StepTooLarge { h, clearance });
    }
    let v = |p: Point3| eval_potential(config, p, Normalization::QuarterPi);
    let centre = v(x)?;
    let mut acc = -6.0 * centre;
    for axis in 0..3 {
        let e = Point3::axis(axis) * h;
        acc += v(x + e)? + v(x - e)?;
    }
    Ok((acc / (h * h)).abs())
}

/// Closed form of the Riesz-measure integral `int_1^inf n(t) / t^2 dt`
/// over the listed punctures: centers inside the closed unit ball contribute
/// `|e_j|`, the others `|e_j| / |p_j|`.
pub fn riesz_integral(config: &PunctureConfig) -> f64 {
    config
        .centers()
        .map(|(p, e)| e.unsigned_abs() as f64 / p.norm().max(1.0))
        .sum()
}

/// `n(t) = mu(closed ball of radius t)` for the atomic Riesz measure with mass
/// `|e_j|` at `p_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingFunction {
    /// Distinct radii `|p_j|` in increasing order.
    pub thresholds: Vec<f64>,
    /// `cumulative[i] = n(thresholds[i])`.
    pub cumulative: Vec<f64>,
}

impl CountingFunction {
    pub fn from_config(config: &PunctureConfig) -> Self {
        let mut pairs: Vec<(f64, f64)> = config
            .centers()
            .map(|(p, e)| (p.norm(), e.unsigned_abs() as f64))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut thresholds: Vec<f64> = Vec::new();
        let mut cumulative: Vec<f64> = Vec::new();
        let mut total = 0.0;
        for (r, mass) in pairs {
            total += mass;
            if thresholds.last() == Some(&r) {
                *cumulative.last_mut().unwrap() = total;
            } else {
                thresholds.push(r);
                cumulative.push(total);
            }
        }
        CountingFunction { thresholds, cumulative }
    }

    /// Evaluates `n(t)`; closed balls, so a center at radius exactly `t` counts.
    pub fn value(&self, t: f64) -> f64 {
        let idx = self.thresholds.partition_point(|&r| r <= t);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }

    /// Total mass of the measure.
    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Why a configuration was accepted or rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum CriterionReason {
    Ok,
    /// First puncture (0-based) with a positive weight.
    PositiveWeight(usize),
    /// Every weight is zero, so the class is trivial and no positive potential exists.
    TrivialClass,
    TailDivergent,
    TailUnknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionVerdict {
    pub accepted: bool,
    pub reason: CriterionReason,
    /// [`riesz_integral`] over the listed punctures.
    pub series_value: f64,
    /// Upper bound on the omitted part of the series, when one is known.
    pub tail_bound: Option<f64>,
}

/// Decides whether the weighted puncture set admits a positive harmonic
/// potential: all weights non-positive and `sum |e_j| / |p_j|` finite.
///
/// Summability is tested at the origin. A configuration without a tail
/// model is finite and therefore summable; a tail of kind `none` cannot be
/// decided from the listed punctures.
pub fn check_criterion(config: &PunctureConfig) -> CriterionVerdict {
    let series_value = riesz_integral(config);
    let tail_bound = tail_bound(config);
    let reason = if let Some(i) = config.weights().iter().position(|&e| e > 0) {
        CriterionReason::PositiveWeight(i)
    } else if config.weights().iter().all(|&e| e == 0) {
        CriterionReason::TrivialClass
    } else {
        match tail_bound {
            None => CriterionReason::TailUnknown,
            Some(b) if !b.is_finite() => CriterionReason::TailDivergent,
            Some(_) => CriterionReason::Ok,
        }
    };
    CriterionVerdict {
        accepted: reason == CriterionReason::Ok && series_value.is_finite(),
        reason,
        series_value,
        tail_bound,
    }
}

/// Bound on `sum_{unlisted j} 1 / |p_j|` implied by the tail model.
/// `Some(inf)` means the model forces divergence, `None` that nothing is known.
fn tail_bound(config: &PunctureConfig) -> Option<f64> {
    let Some(tail) = config.tail() else {
        return Some(0.0);
    };
    let n = config.len();
    let base = config.punctures()[tail.anchor - 1].norm();
    match tail.kind {
        TailKind::None => None,
        TailKind::Custom { value } => Some(value),
        _ if base == 0.0 => Some(f64::INFINITY),
        TailKind::Geometric { ratio } => {
            // radii base * ratio^k, k >= first_power
            let first_power = (n - tail.anchor + 1) as f64;
            Some(ratio.powf(1.0 - first_power) / (base * (ratio - 1.0)))
        }
        TailKind::PowerLaw { exponent } => {
            if exponent <= 1.0 {
                return Some(f64::INFINITY);
            }
            // radii base * (j / anchor)^s for 1-based j > n; integral test
            let a = tail.anchor as f64;
            Some(a.powf(exponent) / base * (n as f64).powf(1.0 - exponent) / (exponent - 1.0))
        }
    }
}
