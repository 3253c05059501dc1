use fdrkit::fdr::evaluate_grid;
use fdrkit::ingest;

use crate::report::EvaluationReport;
use crate::{create_dir, svg, to_json, write_file, CliError, EvaluateArgs, RunConfig, EXIT_OK};

pub(crate) fn run(args: &EvaluateArgs) -> Result<i32, CliError> {
    let cfg = RunConfig::resolve(
        &args.io,
        args.dev.as_deref(),
        args.test.as_deref(),
        args.grid.as_deref(),
        args.alpha,
        args.epsilon,
        args.label.as_deref(),
    )?;
    let data = match &args.data {
        Some(path) => ingest::load_combined(path, cfg.csv, cfg.polarity)
            .map_err(|source| CliError::Input {
                path: path.clone(),
                source,
            })?,
        None => cfg.load_split()?,
    };
    let ops = evaluate_grid(&data, &cfg.grid)?;
    let report = EvaluationReport::build(cfg.label.clone(), &ops, cfg.alpha, cfg.epsilon)?;

    let dir = &cfg.output_dir;
    create_dir(dir)?;
    write_file(&dir.join("report.txt"), &report.render())?;
    if cfg.formats.json {
        write_file(&dir.join("report.json"), &to_json(&report))?;
    }
    if cfg.formats.csv {
        write_file(&dir.join("rates.csv"), &report.rates_csv())?;
        write_file(&dir.join("fdr.csv"), &report.fdr_csv())?;
    }
    if cfg.formats.svg {
        let name = report.system.clone().unwrap_or_else(|| "system".into());
        let series = vec![svg::Series {
            name,
            points: report.points.iter().map(|p| (p.exponent, p.fdr.value)).collect(),
        }];
        write_file(&dir.join("fdr.svg"), &svg::fdr_chart(&series))?;
    }

    if report.all_degenerate() {
        return Err(CliError::Degenerate(format!(
            "every grid point calibrated to a reject-all threshold; the dev set has too few impostors for FMR 10^-{}",
            cfg.grid.exponents()[0]
        )));
    }
    Ok(EXIT_OK)
}
