use std::path::PathBuf;

use fdrkit::ingest::save_scores;
use fdrkit::synthetic::{generate, preset, SyntheticSpec};

use crate::{create_dir, CliError, SynthArgs, DEFAULT_OUT, EXIT_OK};

pub(crate) fn run(args: &SynthArgs) -> Result<i32, CliError> {
    let mut spec = match (&args.preset, &args.spec) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Input {
                path: path.clone(),
                source: fdrkit::Error::Io {
                    path: path.clone(),
                    source: e,
                },
            })?;
            SyntheticSpec::from_json(&text).map_err(|source| CliError::Input {
                path: path.clone(),
                source,
            })?
        }
        (None, None) => return Err(CliError::Usage("give a preset name or --spec".into())),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let data = generate(&spec)?;

    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let dev = args.dev.clone().unwrap_or_else(|| dir.join("dev.csv"));
    let test = args.test.clone().unwrap_or_else(|| dir.join("test.csv"));
    for p in [&dev, &test] {
        if let Some(parent) = p.parent().filter(|p| !p.as_os_str().is_empty()) {
            create_dir(parent)?;
        }
    }
    save_scores(&dev, data.dev())?;
    save_scores(&test, data.test())?;
    log::info!(
        "wrote {} dev and {} test comparisons (seed {})",
        data.dev().len(),
        data.test().len(),
        spec.seed
    );
    Ok(EXIT_OK)
}
