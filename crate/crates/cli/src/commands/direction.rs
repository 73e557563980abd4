use ghlab_core::directions::{
    cap_estimate, genericity_survey, make_frame, project, CapEstimate, Cluster, SurveySummary,
};
use ghlab_core::{Complex, Point3};
use serde::Serialize;

use super::{load_accepted, math, to_json, Failure, Outcome, Report};
use crate::manifest::RunManifest;
use crate::DirectionArgs;

#[derive(Serialize)]
struct Singularity {
    b: Complex,
    m: usize,
    #[serde(rename = "type")]
    kind: String,
    members: Vec<usize>,
}

#[derive(Serialize)]
struct DirectionBody {
    v: Point3,
    frame_id: String,
    f1: Point3,
    f2: Point3,
    tolerance: f64,
    clusters: Vec<Cluster>,
    m0: usize,
    generic: bool,
    accumulation_flag: bool,
    truncated: bool,
    singularities: Vec<Singularity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cap: Option<CapEstimate>,
}

#[derive(Serialize)]
struct SurveyBody {
    survey: SurveySummary,
}

pub fn run(args: &DirectionArgs) -> Result<Outcome, Failure> {
    let config = load_accepted(&args.io.config)?;
    let manifest = RunManifest::new("direction", &config, Some(args.seed));
    if let Some(n) = args.survey {
        let survey = genericity_survey(&config, n, args.seed).map_err(math)?;
        let text = to_json(&Report {
            manifest: &manifest,
            body: SurveyBody { survey },
        });
        return Ok(Outcome { text, failure: None });
    }
    let v = args.v.expect("clap requires --v or --survey");
    let frame = make_frame(v).map_err(|e| Failure::Usage(format!("--v: {e}")))?;
    let report = project(&config, &frame, args.tol);
    let singularities = report
        .singular_clusters()
        .map(|c| Singularity {
            b: c.b,
            m: c.m,
            kind: format!("A{}", c.m - 1),
            members: c.members.clone(),
        })
        .collect();
    let cap = args
        .cap
        .map(|n| cap_estimate(&config, n, args.samples, args.seed))
        .transpose()
        .map_err(math)?;
    let manifest = manifest.tolerance("cluster", report.tolerance);
    let body = DirectionBody {
        v: frame.v,
        frame_id: frame.id(),
        f1: frame.f1,
        f2: frame.f2,
        tolerance: report.tolerance,
        m0: report.m0,
        generic: report.generic,
        accumulation_flag: report.accumulation_flag,
        truncated: report.truncated,
        clusters: report.clusters,
        singularities,
        cap,
    };
    Ok(Outcome {
        text: to_json(&Report {
            manifest: &manifest,
            body,
        }),
        failure: None,
    })
}
