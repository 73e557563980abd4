//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use ghlab_core::config::{generate_config, GenerateKind};
use ghlab_core::entire::{build_product, EntireProduct, GenusMode, ZeroInput, ZeroSpec};
use ghlab_core::{Complex, Point3, PunctureConfig, TailKind, TailModel};

pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

pub fn single_center() -> PunctureConfig {
    PunctureConfig::with_unit_weights(vec![Point3::ORIGIN], "single").unwrap()
}

pub fn two_center() -> PunctureConfig {
    generate_config(GenerateKind::CollinearX { spacing: 1.0, count: 2 }).unwrap()
}

pub fn geometric() -> PunctureConfig {
    generate_config(GenerateKind::GeometricZ { ratio: 2.0, count: 20 }).unwrap()
}

pub fn random_ten() -> PunctureConfig {
    generate_config(GenerateKind::RandomBall {
        radius: 1.0,
        count: 10,
        seed: 7,
    })
    .unwrap()
}

/// Centers `(j^2, 0, 1/j)`: distinct in R^3, projections along `x` pile up at 0.
pub fn adversarial(count: usize) -> PunctureConfig {
    let pts = (1..=count)
        .map(|j| Point3::new((j * j) as f64, 0.0, 1.0 / j as f64))
        .collect();
    let tail = TailModel::new(TailKind::PowerLaw { exponent: 2.0 }, count).unwrap();
    PunctureConfig::new(pts, vec![-1; count], Some(tail), "adversarial").unwrap()
}

pub fn fd_fixtures() -> Vec<(&'static str, PunctureConfig)> {
    vec![
        ("single", single_center()),
        ("two_center", two_center()),
        ("geometric_z(2,20)", geometric()),
        ("random_ball(1,10,7)", random_ten()),
    ]
}

pub fn product(delta: u32, zeros: &[(Complex, u32)]) -> EntireProduct {
    let spec = zeros.iter().map(|&(b, m)| ZeroSpec { b, m }).collect();
    build_product(&ZeroInput::finite(delta, spec), GenusMode::PaperIndex).unwrap()
}

/// Genus-zero product with zeros `i 2^k`, `k = 1..=count`, as a truncation.
pub fn doubling_product(count: i32, radius: f64, tol: f64) -> EntireProduct {
    let zeros = (1..=count)
        .map(|k| ZeroSpec {
            b: c(0.0, 2f64.powi(k)),
            m: 1,
        })
        .collect();
    let input = ZeroInput {
        delta: 0,
        zeros,
        truncated: true,
    };
    build_product(&input, GenusMode::MinimalGenus { radius, tol }).unwrap()
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// from Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `n(t)` by brute force over the centers.
pub fn counting_brute(config: &PunctureConfig, t: f64) -> f64 {
    config
        .centers()
        .filter(|(p, _)| p.norm() <= t)
        .map(|(_, e)| e.unsigned_abs() as f64)
        .sum()
}

/// `int_1^inf n(t)/t^2 dt`: Gauss-Legendre on log-spaced pieces of `[1, T]`
/// between the jumps of `n`, plus the exact remainder `n(T)/T`.
pub fn riesz_quadrature(config: &PunctureConfig) -> f64 {
    let rule = gauss_legendre(20);
    let mut breaks: Vec<f64> = config
        .punctures()
        .iter()
        .map(|p| p.norm())
        .filter(|&r| r > 1.0)
        .collect();
    breaks.push(1.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let top = 2.0 * breaks.last().copied().unwrap_or(1.0);
    breaks.push(top);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        // n is constant on (a, b); sample it at the midpoint
        let n_mid = counting_brute(config, 0.5 * (a + b));
        let pieces = 8;
        let ratio = (b / a).powf(1.0 / pieces as f64);
        let mut lo = a;
        for _ in 0..pieces {
            let hi = lo * ratio;
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            total += rule
                .iter()
                .map(|&(x, wt)| wt * n_mid / (mid + half * x).powi(2))
                .sum::<f64>()
                * half;
            lo = hi;
        }
    }
    total + counting_brute(config, top) / top
}
