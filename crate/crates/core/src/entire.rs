//! Weierstrass elementary factors and entire functions with prescribed zeros,
//! `P(u) = u^delta * prod_k E_{l_k}(u / b_k)^{m_k}`, evaluated in log space.

use std::f64::consts::PI;

use serde::Serialize;

use crate::directions::ProjectionReport;
use crate::{Complex, Error, Result};

/// Largest genus tried by the minimal-genus search.
pub const MAX_GENUS: u32 = 64;

/// Minimum number of contour samples used by the argument-principle counts.
pub const MIN_WINDING_SAMPLES: usize = 4096;

const MAX_WINDING_SAMPLES: usize = 1 << 24;

/// Distinct zeros closer than this (relative to their modulus) are treated as
/// an accumulation.
pub const MIN_RELATIVE_GAP: f64 = 1e-6;

/// `log E_m(u / b)` with `1 - u/b` formed as `(b - u) / b`; `None` when the
/// factor vanishes.
fn log_factor_at(m: u32, u: Complex, b: Complex) -> Option<Complex> {
    if u == b {
        return None;
    }
    let z = u / b;
    if z.norm() <= 0.5 {
        // log E_m(z) = -sum_{k>m} z^k / k
        let mut pow = z.powu(m + 1);
        let first = pow.norm();
        let mut sum = Complex::new(0.0, 0.0);
        let mut k = m as f64 + 1.0;
        while pow.norm() > 1e-18 * first && pow.norm() > f64::MIN_POSITIVE {
            sum -= pow / k;
            pow *= z;
            k += 1.0;
        }
        Some(sum)
    } else {
        let mut sum = ((b - u) / b).ln();
        let mut pow = Complex::new(1.0, 0.0);
        for k in 1..=m {
            pow *= z;
            sum += pow / k as f64;
        }
        Some(sum)
    }
}

/// A logarithm of `E_m(z)`, or `None` at `z = 1`.
pub fn log_weierstrass_factor(m: u32, z: Complex) -> Option<Complex> {
    log_factor_at(m, z, Complex::new(1.0, 0.0))
}

/// `E_m(z) = (1 - z) exp(z + z^2/2 + ... + z^m/m)`.
pub fn weierstrass_factor(m: u32, z: Complex) -> Complex {
    if m == 0 {
        return Complex::new(1.0, 0.0) - z;
    }
    log_weierstrass_factor(m, z).map_or(Complex::new(0.0, 0.0), |l| l.exp())
}

/// Rule for the genera `l_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GenusMode {
    /// `l_k = k` (1-based), safe for any zero set.
    PaperIndex,
    /// Smallest uniform genus whose tail is certified below `tol` on `|u| <= radius`.
    MinimalGenus { radius: f64, tol: f64 },
}

/// Simple description of a zero before a genus is attached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroSpec {
    pub b: Complex,
    pub m: u32,
}

/// Zero data for [`build_product`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroInput {
    /// Order of the zero at the origin.
    pub delta: u32,
    pub zeros: Vec<ZeroSpec>,
    /// The list is a truncation of an infinite zero set.
    pub truncated: bool,
}

impl ZeroInput {
    pub fn finite(delta: u32, zeros: Vec<ZeroSpec>) -> Self {
        ZeroInput {
            delta,
            zeros,
            truncated: false,
        }
    }

    pub fn from_report(report: &ProjectionReport) -> Self {
        ZeroInput {
            delta: report.m0 as u32,
            zeros: report
                .nonzero_clusters()
                .map(|c| ZeroSpec { b: c.b, m: c.m as u32 })
                .collect(),
            truncated: report.truncated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductZero {
    pub b: Complex,
    pub m: u32,
    pub genus: u32,
}

/// `u^delta * prod_{k <= N} E_{l_k}(u / b_k)^{m_k}`, zeros sorted by modulus.
/// Zeros past the truncation index are kept for reference; their effect on
/// `|u| <= R` is bounded by `tail_log_bound`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntireProduct {
    pub delta: u32,
    pub zeros: Vec<ProductZero>,
    pub mode: GenusMode,
    #[serde(rename = "N")]
    pub truncation: usize,
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    /// Bound on `|sum_{k>N} m_k log E_{l_k}(u/b_k)|` for `|u| <= R`; `None`
    /// when no certificate is available.
    pub tail_log_bound: Option<f64>,
}

/// Merges exact duplicates, sorts by modulus and rejects zeros at the origin
/// or closer than [`MIN_RELATIVE_GAP`].
fn normalise_zeros(zeros: &[ZeroSpec]) -> Result<Vec<ZeroSpec>> {
    let mut out: Vec<ZeroSpec> = Vec::with_capacity(zeros.len());
    for z in zeros {
        if z.b == Complex::new(0.0, 0.0) {
            return Err(Error::InvalidParameter("zero at the origin belongs in delta".into()));
        }
        if !(z.b.re.is_finite() && z.b.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("zero {} is not finite", z.b)));
        }
        if z.m == 0 {
            return Err(Error::InvalidParameter(format!("zero {} has multiplicity 0", z.b)));
        }
        match out.iter_mut().find(|o| o.b == z.b) {
            Some(o) => o.m += z.m,
            None => out.push(*z),
        }
    }
    out.sort_by(|a, b| a.b.norm().total_cmp(&b.b.norm()).then(a.b.arg().total_cmp(&b.b.arg())));
    for (i, a) in out.iter().enumerate() {
        for b in &out[i + 1..] {
            if b.b.norm() - a.b.norm() >= MIN_RELATIVE_GAP * b.b.norm() {
                break;
            }
            if (a.b - b.b).norm() < MIN_RELATIVE_GAP * b.b.norm() {
                return Err(Error::ConvergenceUnattainable(format!(
                    "zeros {} and {} are closer than {MIN_RELATIVE_GAP} relative; the zero set accumulates",
                    a.b, b.b
                )));
            }
        }
    }
    Ok(out)
}

/// Builds `P` from a zero list.
///
/// Finite lists keep every zero (genus `0` in minimal-genus mode, where the
/// product is a polynomial). Truncated lists in minimal-genus mode pick the
/// smallest uniform genus `l` whose certified tail allows a truncation index
/// `N` with `ceil(1.25 N)` still inside the list, so the stability of the
/// partial products can be checked on data that is actually present.
pub fn build_product(input: &ZeroInput, mode: GenusMode) -> Result<EntireProduct> {
    let zeros = normalise_zeros(&input.zeros)?;
    let len = zeros.len();
    let with_genus = |genus: &dyn Fn(usize) -> u32| -> Vec<ProductZero> {
        zeros
            .iter()
            .enumerate()
            .map(|(k, z)| ProductZero {
                b: z.b,
                m: z.m,
                genus: genus(k),
            })
            .collect()
    };
    match mode {
        GenusMode::PaperIndex => Ok(EntireProduct {
            delta: input.delta,
            zeros: with_genus(&|k| k as u32 + 1),
            mode,
            truncation: len,
            radius: None,
            tail_log_bound: (!input.truncated).then_some(0.0),
        }),
        GenusMode::MinimalGenus { radius, tol } => {
            if !(radius > 0.0 && radius.is_finite() && tol > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "minimal genus needs radius > 0 and tol > 0, got R={radius}, tol={tol}"
                )));
            }
            if !input.truncated {
                return Ok(EntireProduct {
                    delta: input.delta,
                    zeros: with_genus(&|_| 0),
                    mode,
                    truncation: len,
                    radius: Some(radius),
                    tail_log_bound: Some(0.0),
                });
            }
            let rho: Vec<f64> = zeros.iter().map(|z| radius / z.b.norm()).collect();
            let first_small = rho.partition_point(|&r| r > 0.5);
            for genus in 0..=MAX_GENUS {
                // suffix[n] = sum_{k >= n} m_k rho_k^{l+1} / (1 - rho_k), 0-based
                let mut suffix = vec![0.0; len + 1];
                for k in (first_small..len).rev() {
                    let term = zeros[k].m as f64 * rho[k].powi(genus as i32 + 1) / (1.0 - rho[k]);
                    suffix[k] = suffix[k + 1] + term;
                }
                let mut n = (first_small..=len).find(|&n| suffix[n] <= tol).unwrap_or(len);
                // never split a circle of zeros, e.g. a conjugate pair
                while n > 0 && n < len && zeros[n].b.norm() == zeros[n - 1].b.norm() {
                    n += 1;
                }
                if (5 * n).div_ceil(4) <= len {
                    return Ok(EntireProduct {
                        delta: input.delta,
                        zeros: with_genus(&|_| genus),
                        mode,
                        truncation: n,
                        radius: Some(radius),
                        tail_log_bound: Some(suffix[n]),
                    });
                }
            }
            Err(Error::ConvergenceUnattainable(format!(
                "no genus up to {MAX_GENUS} certifies tol={tol} on |u|<={radius} with {len} listed zeros"
            )))
        }
    }
}

/// Value of `P(u)` with its certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductValue {
    pub value: Complex,
    /// Bound on `|log P(u) - log P_true(u)|`; infinite when uncertified.
    pub log_abs_error_bound: f64,
    /// `u` lies in the disk where the tail bound applies.
    pub certified: bool,
}

impl EntireProduct {
    /// Zeros that enter the evaluated product.
    pub fn active_zeros(&self) -> &[ProductZero] {
        &self.zeros[..self.truncation]
    }

    /// `log E_{l_k}(u / b_k)` for the `k`-th zero (0-based), `None` at `u = b_k`.
    pub fn log_factor(&self, k: usize, u: Complex) -> Option<Complex> {
        let z = &self.zeros[k];
        log_factor_at(z.genus, u, z.b)
    }

    /// A logarithm of `P(u)`, `None` where `P` vanishes.
    pub fn log_value(&self, u: Complex) -> Option<Complex> {
        self.log_value_truncated(u, self.truncation)
    }

    /// Same as [`Self::log_value`] with the first `n` zeros.
    pub fn log_value_truncated(&self, u: Complex, n: usize) -> Option<Complex> {
        let mut sum = Complex::new(0.0, 0.0);
        if self.delta > 0 {
            if u == Complex::new(0.0, 0.0) {
                return None;
            }
            sum += u.ln() * self.delta as f64;
        }
        for k in 0..n.min(self.zeros.len()) {
            sum += self.log_factor(k, u)? * self.zeros[k].m as f64;
        }
        Some(sum)
    }

    pub fn value(&self, u: Complex) -> Complex {
        self.log_value(u).map_or(Complex::new(0.0, 0.0), |l| l.exp())
    }

    /// Whether every active zero is simple (and the origin at most simple).
    pub fn is_generic(&self) -> bool {
        self.delta <= 1 && self.active_zeros().iter().all(|z| z.m == 1)
    }
}

pub fn eval_product(p: &EntireProduct, u: Complex) -> ProductValue {
    let certified = match p.radius {
        Some(r) => u.norm() <= r,
        None => p.tail_log_bound == Some(0.0),
    };
    ProductValue {
        value: p.value(u),
        log_abs_error_bound: p.tail_log_bound.unwrap_or(f64::INFINITY),
        certified,
    }
}

/// Total winding of `exp(log_f)` around the circle `|u - center| = radius`,
/// from principal phase increments. Starts at `samples` (at least
/// [`MIN_WINDING_SAMPLES`]) points and doubles while any increment exceeds
/// `pi/2`.
pub fn winding_number<F>(log_f: F, center: Complex, radius: f64, samples: usize) -> Result<i64>
where
    F: Fn(Complex) -> Result<Complex>,
{
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "contour radius must be positive, got {radius}"
        )));
    }
    let mut n = samples.max(MIN_WINDING_SAMPLES);
    while n <= MAX_WINDING_SAMPLES {
        let point = |i: usize| center + Complex::from_polar(radius, 2.0 * PI * i as f64 / n as f64);
        let mut previous = log_f(point(0))?.im;
        let mut total = 0.0;
        let mut resolved = true;
        for i in 1..=n {
            let current = log_f(point(i % n))?.im;
            let step = (current - previous + PI).rem_euclid(2.0 * PI) - PI;
            if step.abs() > PI / 2.0 {
                resolved = false;
                break;
            }
            total += step;
            previous = current;
        }
        if resolved {
            return Ok((total / (2.0 * PI)).round() as i64);
        }
        n *= 2;
    }
    Err(Error::ConvergenceUnattainable(format!(
        "phase still jumps by more than pi/2 with {MAX_WINDING_SAMPLES} contour samples"
    )))
}

/// Argument-principle count of the zeros of `P` inside the circle.
pub fn zero_audit(p: &EntireProduct, center: Complex, radius: f64, samples: usize) -> Result<i64> {
    let guard = 1e-6 * radius;
    let origin = (p.delta > 0).then_some(Complex::new(0.0, 0.0));
    for b in origin.into_iter().chain(p.active_zeros().iter().map(|z| z.b)) {
        let distance = ((b - center).norm() - radius).abs();
        if distance < guard {
            return Err(Error::ContourThroughZero { distance });
        }
    }
    winding_number(
        |u| p.log_value(u).ok_or(Error::ContourThroughZero { distance: 0.0 }),
        center,
        radius,
        samples,
    )
}
