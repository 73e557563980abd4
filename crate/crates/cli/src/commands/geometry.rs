use ghlab_core::geometry::{algebra_residuals, curvature_residual, sample_points};
use ghlab_core::potential::{eval_potential, laplacian_residual, Normalization};
use serde::Serialize;

use super::{load_accepted, math, to_csv, to_json, Failure, Outcome, Report};
use crate::manifest::RunManifest;
use crate::{GeometryArgs, OutputFormat};

const HARMONICITY_TOL: f64 = 1e-4;
const CURVATURE_TOL: f64 = 1e-4;
const QUATERNION_TOL: f64 = 1e-10;
const COMPATIBILITY_TOL: f64 = 1e-10;
const KAHLER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
struct Row {
    index: usize,
    x: f64,
    y: f64,
    z: f64,
    potential: f64,
    harmonicity: f64,
    curvature: f64,
    quaternion: f64,
    compatibility: f64,
    kahler: f64,
}

impl Row {
    /// Largest residual relative to its threshold; above 1 means a breach.
    fn severity(&self) -> f64 {
        [
            self.harmonicity / HARMONICITY_TOL,
            self.curvature / CURVATURE_TOL,
            self.quaternion / QUATERNION_TOL,
            self.compatibility / COMPATIBILITY_TOL,
            self.kahler / KAHLER_TOL,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Serialize)]
struct Body<'a> {
    h: f64,
    passed: bool,
    worst: Option<&'a Row>,
    rows: &'a [Row],
}

pub fn run(args: &GeometryArgs) -> Result<Outcome, Failure> {
    let config = load_accepted(&args.io.config)?;
    if !(args.h > 0.0 && args.h.is_finite()) {
        return Err(Failure::Usage(format!("--h must be positive, got {}", args.h)));
    }
    let points = sample_points(&config, args.points, args.seed).map_err(math)?;
    let rows = points
        .iter()
        .enumerate()
        .map(|(index, &x)| {
            let alg = algebra_residuals(&config, x)?;
            Ok(Row {
                index,
                x: x.x,
                y: x.y,
                z: x.z,
                potential: eval_potential(&config, x, Normalization::QuarterPi)?,
                harmonicity: laplacian_residual(&config, x, args.h)?,
                curvature: curvature_residual(&config, x, args.h)?,
                quaternion: alg.quaternion,
                compatibility: alg.compatibility,
                kahler: alg.kahler,
            })
        })
        .collect::<ghlab_core::Result<Vec<Row>>>()
        .map_err(math)?;

    let worst = rows.iter().max_by(|a, b| a.severity().total_cmp(&b.severity()));
    let passed = worst.is_none_or(|r| r.severity() <= 1.0);
    let manifest = RunManifest::new("verify-geometry", &config, Some(args.seed))
        .tolerance("harmonicity", HARMONICITY_TOL)
        .tolerance("curvature", CURVATURE_TOL)
        .tolerance("quaternion", QUATERNION_TOL)
        .tolerance("compatibility", COMPATIBILITY_TOL)
        .tolerance("kahler", KAHLER_TOL)
        .tolerance("h", args.h);
    let text = match args.format {
        OutputFormat::Json => to_json(&Report {
            manifest: &manifest,
            body: Body {
                h: args.h,
                passed,
                worst,
                rows: &rows,
            },
        }),
        OutputFormat::Csv => to_csv(&manifest, &rows)?,
    };
    let failure = (!passed).then(|| {
        format!(
            "threshold exceeded, worst row: {}",
            serde_json::to_string(worst.expect("a failing run has rows")).unwrap_or_default()
        )
    });
    Ok(Outcome { text, failure })
}
