use ghlab_core::potential::{check_criterion, CriterionVerdict};
use serde::Serialize;

use super::{load, to_json, Failure, Outcome, Report};
use crate::manifest::RunManifest;
use crate::ValidateArgs;

#[derive(Serialize)]
struct Body<'a> {
    verdict: &'a CriterionVerdict,
}

pub fn run(args: &ValidateArgs) -> Result<Outcome, Failure> {
    let config = load(&args.io.config)?;
    let verdict = check_criterion(&config);
    let manifest = RunManifest::new("validate", &config, None);
    let text = to_json(&Report {
        manifest: &manifest,
        body: Body { verdict: &verdict },
    });
    let failure = (!verdict.accepted).then(|| {
        format!(
            "rejected: {}",
            serde_json::to_string(&verdict.reason).unwrap_or_default()
        )
    });
    Ok(Outcome { text, failure })
}
