use fdrkit::fdr::{fdr_curve, FdrCurve};
use serde::Serialize;

use crate::format::{self, csv_field, Num};
use crate::{
    create_dir, load_pair, parse_grid, svg, to_json, write_file, CliError, CurveArgs, RunConfig,
    EXIT_OK,
};

#[derive(Debug, Serialize)]
struct CurvePoint {
    exponent: f64,
    tau: Num,
    degenerate: bool,
    a_gap: Num,
    b_gap: Num,
    fdr: Num,
}

#[derive(Debug, Serialize)]
struct SystemCurve {
    label: String,
    points: Vec<CurvePoint>,
    aufdr: Option<Num>,
}

#[derive(Debug, Serialize)]
struct CurveReport {
    alpha: f64,
    grid: Vec<f64>,
    systems: Vec<SystemCurve>,
}

impl SystemCurve {
    fn new(label: String, curve: &FdrCurve) -> Self {
        Self {
            label,
            points: curve
                .points
                .iter()
                .map(|p| CurvePoint {
                    exponent: p.exponent,
                    tau: Num::score(p.threshold.tau),
                    degenerate: p.threshold.degenerate,
                    a_gap: Num::rate(p.a_gap),
                    b_gap: Num::rate(p.b_gap),
                    fdr: Num::fdr(p.fdr),
                })
                .collect(),
            aufdr: curve.aufdr.map(Num::fdr),
        }
    }
}

pub(crate) fn run(args: &CurveArgs) -> Result<i32, CliError> {
    if args.dev.len() != args.test.len() {
        return Err(CliError::Usage(format!(
            "{} --dev but {} --test; give one of each per system",
            args.dev.len(),
            args.test.len()
        )));
    }
    let cfg = RunConfig::resolve(
        &args.io,
        args.dev.first().map(|p| p.as_path()),
        args.test.first().map(|p| p.as_path()),
        args.grid.first().map(String::as_str),
        args.alpha,
        None,
        args.label.first().map(String::as_str),
    )?;
    let pairs: Vec<_> = if args.dev.is_empty() {
        match (&cfg.dev, &cfg.test) {
            (Some(d), Some(t)) => vec![(d.clone(), t.clone())],
            _ => return Err(CliError::Usage("--dev and --test are required".into())),
        }
    } else {
        args.dev.iter().cloned().zip(args.test.iter().cloned()).collect()
    };
    let n = pairs.len();

    let labels: Vec<String> = match args.label.len() {
        0 if n == 1 => vec![cfg.label.clone().unwrap_or_else(|| "system".into())],
        0 => (1..=n).map(|i| format!("system{i}")).collect(),
        k if k == n => args.label.clone(),
        k => {
            return Err(CliError::Usage(format!(
                "{k} --label for {n} systems; give one per system or none"
            )))
        }
    };

    for (i, g) in args.grid.iter().enumerate().skip(1) {
        if parse_grid(g)? != cfg.grid {
            return Err(CliError::Usage(format!(
                "grid of system {} ({g}) differs from the first ({}); overlaid systems must share the grid",
                i + 1,
                args.grid[0]
            )));
        }
    }
    if args.grid.len() > 1 && args.grid.len() != n {
        return Err(CliError::Usage(format!(
            "{} --grid for {n} systems; give one shared grid or one per system",
            args.grid.len()
        )));
    }

    let mut systems = Vec::with_capacity(n);
    let mut any_live = false;
    for ((dev, test), label) in pairs.iter().zip(labels) {
        let data = load_pair(dev, test, cfg.csv, cfg.polarity)?;
        let curve = fdr_curve(&data, &cfg.grid, cfg.alpha)?;
        any_live |= curve.points.iter().any(|p| !p.threshold.degenerate);
        systems.push(SystemCurve::new(label, &curve));
    }
    let report = CurveReport {
        alpha: cfg.alpha,
        grid: cfg.grid.exponents().to_vec(),
        systems,
    };

    let dir = &cfg.output_dir;
    create_dir(dir)?;
    write_file(&dir.join("fdr_curve.txt"), &render(&report))?;
    if cfg.formats.csv {
        let mut csv = String::from("system,exponent,tau,fdr\n");
        for s in &report.systems {
            for p in &s.points {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    csv_field(&s.label),
                    p.exponent,
                    p.tau.value,
                    p.fdr.value
                ));
            }
        }
        write_file(&dir.join("fdr_curve.csv"), &csv)?;
    }
    if cfg.formats.json {
        write_file(&dir.join("fdr_curve.json"), &to_json(&report))?;
    }
    if cfg.formats.svg {
        let series: Vec<svg::Series> = report
            .systems
            .iter()
            .map(|s| svg::Series {
                name: s.label.clone(),
                points: s.points.iter().map(|p| (p.exponent, p.fdr.value)).collect(),
            })
            .collect();
        write_file(&dir.join("fdr_curve.svg"), &svg::fdr_chart(&series))?;
    }
    if !any_live {
        return Err(CliError::Degenerate(
            "every grid point of every system calibrated to a reject-all threshold".into(),
        ));
    }
    Ok(EXIT_OK)
}

fn render(report: &CurveReport) -> String {
    let mut header = vec!["system".to_string()];
    header.extend(report.grid.iter().map(|&x| format!("FMR={}", format::exponent(x))));
    header.push("AUFDR".into());
    let rows: Vec<Vec<String>> = report
        .systems
        .iter()
        .map(|s| {
            let mut r = vec![s.label.clone()];
            r.extend(s.points.iter().map(|p| p.fdr.text.clone()));
            r.push(s.aufdr.as_ref().map_or("-".into(), |a| a.text.clone()));
            r
        })
        .collect();
    format!("FDR(tau), alpha = {}\n\n{}", report.alpha, format::table(&header, &rows))
}
