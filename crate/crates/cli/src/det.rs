use std::io::Write;

use fdrkit::ingest;
use fdrkit::rates::{DetPoint, RateIndex};
use fdrkit::DemographicLabel;

use crate::format::csv_field;
use crate::{create_dir, svg, to_json, write_file, CliError, DetArgs, RunConfig, EXIT_OK};

pub(crate) fn run(args: &DetArgs) -> Result<i32, CliError> {
    let cfg = RunConfig::resolve(
        &args.io,
        None,
        args.test.as_deref(),
        None,
        None,
        None,
        args.label.as_deref(),
    )?;
    let path = cfg
        .test
        .clone()
        .ok_or_else(|| CliError::Usage("--test is required".into()))?;
    let test = ingest::load_scores(&path, cfg.csv, cfg.polarity).map_err(|source| {
        CliError::Input {
            path: path.clone(),
            source,
        }
    })?;
    let index = RateIndex::new(&test);
    let requested: Vec<String> = if args.demos.is_empty() {
        index.labels().iter().map(|l| l.to_string()).collect()
    } else {
        args.demos.clone()
    };

    let mut series: Vec<(String, Vec<DetPoint>)> = Vec::new();
    let mut skipped = Vec::new();
    for name in requested {
        let result = DemographicLabel::new(&name).and_then(|l| index.det_points(&l));
        match result {
            Ok(points) => series.push((name, points)),
            Err(e) => {
                let _ = writeln!(std::io::stderr(), "skipped demographic '{name}': {e}");
                skipped.push(name);
            }
        }
    }

    if series.is_empty() {
        return Err(CliError::Usage(
            "none of the requested demographics has both impostor and genuine scores".into(),
        ));
    }

    let dir = &cfg.output_dir;
    create_dir(dir)?;
    let mut summary = String::new();
    if let Some(l) = &cfg.label {
        summary.push_str(&format!("system: {l}\n"));
    }
    for (name, points) in &series {
        summary.push_str(&format!("{name}: {} operating points\n", points.len()));
    }
    for name in &skipped {
        summary.push_str(&format!("{name}: skipped (no data)\n"));
    }
    write_file(&dir.join("det.txt"), &summary)?;
    if cfg.formats.csv {
        let mut csv = String::from("demo,tau,fmr,fnmr\n");
        for (name, points) in &series {
            for p in points {
                csv.push_str(&format!("{},{},{},{}\n", csv_field(name), p.tau, p.fmr, p.fnmr));
            }
        }
        write_file(&dir.join("det.csv"), &csv)?;
    }
    if cfg.formats.json {
        #[derive(serde::Serialize)]
        struct Out<'a> {
            system: Option<&'a str>,
            series: Vec<(&'a str, &'a [DetPoint])>,
            skipped: &'a [String],
        }
        let out = Out {
            system: cfg.label.as_deref(),
            series: series.iter().map(|(n, p)| (n.as_str(), p.as_slice())).collect(),
            skipped: &skipped,
        };
        write_file(&dir.join("det.json"), &to_json(&out))?;
    }
    if cfg.formats.svg {
        let plotted: Vec<svg::Series> = series
            .iter()
            .map(|(name, points)| svg::Series {
                name: name.clone(),
                points: points.iter().map(|p| (p.fmr, p.fnmr)).collect(),
            })
            .collect();
        write_file(&dir.join("det.svg"), &svg::det_chart(&plotted))?;
    }
    Ok(EXIT_OK)
}
