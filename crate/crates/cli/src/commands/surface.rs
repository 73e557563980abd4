use std::collections::BTreeMap;
use std::f64::consts::PI;

use ghlab_core::directions::{make_frame, project};
use ghlab_core::entire::{build_product, zero_audit, EntireProduct, GenusMode, ZeroInput};
use ghlab_core::surface::{relative_surface_residual, singular_points, ChartAtlas, ChartLabel, SingularityReport};
use ghlab_core::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{load_accepted, math, to_csv, to_json, Failure, Outcome, Report};
use crate::manifest::RunManifest;
use crate::{ModeArg, OutputFormat, SurfaceArgs};

const COCYCLE_TOL: f64 = 1e-10;
const IDENTITY_TOL: f64 = 1e-10;
const CHI_TOL: f64 = 1e-10;
const COCYCLE_SAMPLES: usize = 25;

#[derive(Serialize)]
struct Projection {
    frame_id: String,
    m0: usize,
    generic: bool,
    truncated: bool,
    clusters: usize,
}

#[derive(Serialize)]
struct Atlas {
    charts: Vec<ChartLabel>,
    index_table: BTreeMap<String, Vec<u32>>,
}

#[derive(Serialize)]
struct MaxCheck {
    samples: usize,
    max_residual: f64,
    passed: bool,
}

#[derive(Serialize)]
struct OrderCheck {
    alpha: ChartLabel,
    beta: ChartLabel,
    zero: usize,
    expected: i64,
    measured: Option<i64>,
    error: Option<String>,
    passed: bool,
}

#[derive(Serialize)]
struct ZeroCheck {
    zero: usize,
    b: Complex,
    radius: f64,
    expected: i64,
    measured: Option<i64>,
    error: Option<String>,
    passed: bool,
}

#[derive(Serialize)]
struct Audits {
    /// Disk `|u| <= radius` in which the transition checks are sampled.
    radius: f64,
    cocycle: MaxCheck,
    chart_agreement: MaxCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    generic_identity: Option<MaxCheck>,
    pole_orders: Vec<OrderCheck>,
    zero_audits: Vec<ZeroCheck>,
    residual_grid: MaxCheck,
}

impl Audits {
    fn passed(&self) -> bool {
        self.cocycle.passed
            && self.chart_agreement.passed
            && self.generic_identity.as_ref().is_none_or(|c| c.passed)
            && self.pole_orders.iter().all(|c| c.passed)
            && self.zero_audits.iter().all(|c| c.passed)
            && self.residual_grid.passed
    }
}

#[derive(Debug, Clone, Serialize)]
struct GridRow {
    chart: String,
    u_re: f64,
    u_im: f64,
    v_re: f64,
    v_im: f64,
    relative_residual: f64,
}

#[derive(Serialize)]
struct Body<'a> {
    projection: Projection,
    product: &'a EntireProduct,
    singularities: SingularityReport,
    atlas: Atlas,
    audits: Audits,
    passed: bool,
    grid: Vec<GridRow>,
}

pub fn run(args: &SurfaceArgs) -> Result<Outcome, Failure> {
    let config = load_accepted(&args.io.config)?;
    let mode = match (args.mode, args.radius) {
        (ModeArg::PaperIndex, _) => GenusMode::PaperIndex,
        (ModeArg::MinimalGenus, Some(radius)) => GenusMode::MinimalGenus { radius, tol: args.tol },
        (ModeArg::MinimalGenus, None) => return Err(Failure::Usage("--mode minimal_genus needs --radius".into())),
    };
    if args.radius.is_some_and(|r| !(r > 0.0 && r.is_finite())) {
        return Err(Failure::Usage("--radius must be positive".into()));
    }
    if args.grid < 2 {
        return Err(Failure::Usage("--grid must be at least 2".into()));
    }
    let frame = make_frame(args.v).map_err(|e| Failure::Usage(format!("--v: {e}")))?;
    let report = project(&config, &frame, None);
    if report.accumulation_flag {
        return Err(Failure::Math(
            "projected zeros accumulate; no entire product with these zeros can be certified".into(),
        ));
    }
    let product = build_product(&ZeroInput::from_report(&report), mode).map_err(math)?;
    let singularities = singular_points(&product);
    let atlas = ChartAtlas::new(product.clone());
    let radius = args.radius.unwrap_or_else(|| default_radius(&atlas));

    let samples = sample_disk(&atlas, radius, args.seed);
    let grid = residual_grid(&atlas, radius, args.grid).map_err(math)?;
    let grid_max = grid.iter().map(|r| r.relative_residual).fold(0.0, f64::max);
    let audits = Audits {
        radius,
        cocycle: cocycle(&atlas, &samples).map_err(math)?,
        chart_agreement: chart_agreement(&atlas, &samples).map_err(math)?,
        generic_identity: product.is_generic().then(|| generic_identity(&atlas, &samples)),
        pole_orders: pole_orders(&atlas, radius),
        zero_audits: zero_audits(&atlas, radius),
        residual_grid: MaxCheck {
            samples: grid.len(),
            max_residual: grid_max,
            passed: grid_max <= CHI_TOL,
        },
    };
    let passed = audits.passed();

    let mut manifest = RunManifest::new("surface", &config, Some(args.seed))
        .tolerance("cluster", report.tolerance)
        .tolerance("cocycle", COCYCLE_TOL)
        .tolerance("generic_identity", IDENTITY_TOL)
        .tolerance("chi", CHI_TOL);
    if let GenusMode::MinimalGenus { tol, .. } = mode {
        manifest = manifest.tolerance("tail", tol);
    }
    let text = match args.format {
        OutputFormat::Csv => to_csv(&manifest, &grid)?,
        OutputFormat::Json => {
            let body = Body {
                projection: Projection {
                    frame_id: frame.id(),
                    m0: report.m0,
                    generic: report.generic,
                    truncated: report.truncated,
                    clusters: report.clusters.len(),
                },
                product: &product,
                singularities,
                atlas: Atlas {
                    charts: atlas.charts.clone(),
                    index_table: atlas.index_table(),
                },
                audits,
                passed,
                grid,
            };
            to_json(&Report {
                manifest: &manifest,
                body,
            })
        }
    };
    let failure = (!passed).then(|| "surface audits failed".to_string());
    Ok(Outcome { text, failure })
}

/// Twice the smallest nonzero zero modulus, at least 1. Keeps every factor
/// well inside its range when no radius is given.
fn default_radius(atlas: &ChartAtlas) -> f64 {
    let nearest = atlas.points[1..].iter().map(|b| b.norm()).fold(f64::INFINITY, f64::min);
    if nearest.is_finite() {
        (2.0 * nearest).max(1.0)
    } else {
        1.0
    }
}

/// Zero ids that actually vanish: the origin only when `delta > 0`.
fn live_zeros(atlas: &ChartAtlas) -> impl Iterator<Item = usize> + '_ {
    (0..atlas.points.len()).filter(|&r| atlas.orders[r] > 0)
}

fn sample_disk(atlas: &ChartAtlas, radius: f64, seed: u64) -> Vec<Complex> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(COCYCLE_SAMPLES);
    while out.len() < COCYCLE_SAMPLES {
        let u = Complex::from_polar(radius * rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>());
        let clear = atlas.points.iter().all(|b| (u - b).norm() > 1e-3 * b.norm().max(1.0));
        if clear {
            out.push(u);
        }
    }
    out
}

fn cocycle(atlas: &ChartAtlas, samples: &[Complex]) -> ghlab_core::Result<MaxCheck> {
    let mut worst: f64 = 0.0;
    for &u in samples {
        for &a in &atlas.charts {
            for &b in &atlas.charts {
                for &g in &atlas.charts {
                    worst = worst.max(atlas.cocycle_check(a, b, g, u)?);
                }
            }
        }
    }
    Ok(MaxCheck {
        samples: samples.len(),
        max_residual: worst,
        passed: worst <= COCYCLE_TOL,
    })
}

/// `chi_a(u, v)` and `chi_b(u, f_ab(u) v)` name the same point of the surface.
fn chart_agreement(atlas: &ChartAtlas, samples: &[Complex]) -> ghlab_core::Result<MaxCheck> {
    let v = Complex::new(1.0, 0.0);
    let mut worst: f64 = 0.0;
    for &u in samples {
        for (a, b) in atlas.adjacent_pairs() {
            let p = atlas.chi_map(a, u, v)?;
            let q = atlas.chi_map(b, u, atlas.transition(a, b, u)? * v)?;
            for (x, y) in p.iter().zip(q.iter()) {
                worst = worst.max((x - y).norm() / x.norm().max(y.norm()).max(1.0));
            }
        }
    }
    Ok(MaxCheck {
        samples: samples.len(),
        max_residual: worst,
        passed: worst <= CHI_TOL,
    })
}

fn generic_identity(atlas: &ChartAtlas, samples: &[Complex]) -> MaxCheck {
    let worst = samples
        .iter()
        .map(|&u| match atlas.transition(ChartLabel::Minus, ChartLabel::Plus, u) {
            Ok(f) => (f * atlas.product.value(u) - Complex::new(1.0, 0.0)).norm(),
            Err(_) => f64::INFINITY,
        })
        .fold(0.0, f64::max);
    MaxCheck {
        samples: samples.len(),
        max_residual: worst,
        passed: worst <= IDENTITY_TOL,
    }
}

fn pole_orders(atlas: &ChartAtlas, radius: f64) -> Vec<OrderCheck> {
    let mut pairs = atlas.adjacent_pairs();
    if atlas.charts.len() > 2 {
        pairs.push((ChartLabel::Minus, ChartLabel::Plus));
    }
    let mut out = Vec::new();
    for (alpha, beta) in pairs {
        for r in live_zeros(atlas).filter(|&r| atlas.points[r].norm() <= radius) {
            let expected = atlas.index(alpha, r) as i64 - atlas.index(beta, r) as i64;
            let (measured, error) = split(atlas.pole_order(alpha, beta, r));
            let passed = measured == Some(expected);
            out.push(OrderCheck {
                alpha,
                beta,
                zero: r,
                expected,
                measured,
                error,
                passed,
            });
        }
    }
    out
}

fn zero_audits(atlas: &ChartAtlas, radius: f64) -> Vec<ZeroCheck> {
    let live: Vec<usize> = live_zeros(atlas).collect();
    live.iter()
        .copied()
        .filter(|&r| atlas.points[r].norm() <= radius)
        .map(|r| {
            let b = atlas.points[r];
            let separation = live
                .iter()
                .filter(|&&s| s != r)
                .map(|&s| (atlas.points[s] - b).norm())
                .fold(f64::INFINITY, f64::min);
            let contour = if separation.is_finite() {
                0.25 * separation
            } else {
                0.25 * b.norm().max(1.0)
            };
            let expected = atlas.orders[r] as i64;
            let (measured, error) = split(zero_audit(&atlas.product, b, contour, 0));
            let passed = measured == Some(expected);
            ZeroCheck {
                zero: r,
                b,
                radius: contour,
                expected,
                measured,
                error,
                passed,
            }
        })
        .collect()
}

fn split(result: ghlab_core::Result<i64>) -> (Option<i64>, Option<String>) {
    match result {
        Ok(w) => (Some(w), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

/// Relative residual of `u1 u2 = P(u3)` at `chi_a(u, v)` on a square lattice
/// over `[-radius, radius]^2`, for two fibre values, in every chart.
fn residual_grid(atlas: &ChartAtlas, radius: f64, n: usize) -> ghlab_core::Result<Vec<GridRow>> {
    let fibres = [Complex::new(1.0, 0.0), Complex::new(0.5, 0.5)];
    let step = 2.0 * radius / (n - 1) as f64;
    let mut rows = Vec::with_capacity(atlas.charts.len() * n * n * fibres.len());
    for &chart in &atlas.charts {
        for i in 0..n {
            for j in 0..n {
                let u = Complex::new(-radius + i as f64 * step, -radius + j as f64 * step);
                for &v in &fibres {
                    let point = atlas.chi_map(chart, u, v)?;
                    rows.push(GridRow {
                        chart: chart.to_string(),
                        u_re: u.re,
                        u_im: u.im,
                        v_re: v.re,
                        v_im: v.im,
                        relative_residual: relative_surface_residual(&atlas.product, point),
                    });
                }
            }
        }
    }
    Ok(rows)
}
