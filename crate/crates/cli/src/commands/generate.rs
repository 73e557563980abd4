use ghlab_core::config::{generate_config, GenerateKind};

use super::{Failure, Outcome};
use crate::{GenerateArgs, GenerateKindArg};

/// Emits the plain configuration document, so the output loads back as is.
pub fn run(args: &GenerateArgs) -> Result<Outcome, Failure> {
    let kind = match args.kind {
        GenerateKindArg::GeometricZ { ratio, count } => GenerateKind::GeometricZ { ratio, count },
        GenerateKindArg::CollinearX { spacing, count } => GenerateKind::CollinearX { spacing, count },
        GenerateKindArg::RandomBall { radius, count, seed } => GenerateKind::RandomBall { radius, count, seed },
    };
    let config = generate_config(kind).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(Outcome {
        text: config.to_json_string(),
        failure: None,
    })
}
