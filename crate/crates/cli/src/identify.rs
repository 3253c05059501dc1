use std::io::Write;

use fdrkit::identification::{
    closed_set_discrepancy, dir, far_open, fdr_prime, load_trials, open_set_gaps, rank_n_rate,
    Cohort, FdrPrimeMode, GallerySet,
};
use fdrkit::rates::Calibrator;
use fdrkit::Polarity;
use serde::Serialize;

use crate::format::{self, csv_field, Num};
use crate::{
    create_dir, parse_grid, parse_polarity, to_json, unit, write_file, CliError, Formats,
    IdentifyArgs, DEFAULT_OUT, EXIT_INPUT, EXIT_OK,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Modes {
    literal: bool,
    complement: bool,
}

fn parse_modes(raw: &str) -> Result<Modes, CliError> {
    match raw.to_ascii_lowercase().as_str() {
        "literal" => Ok(Modes { literal: true, complement: false }),
        "complement" => Ok(Modes { literal: false, complement: true }),
        "both" => Ok(Modes { literal: true, complement: true }),
        other => Err(CliError::Usage(format!(
            "--mode must be literal, complement or both, got '{other}'"
        ))),
    }
}

fn parse_ranks(raw: &str) -> Result<Vec<usize>, CliError> {
    let mut ranks = raw
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| CliError::Usage(format!("--rank: '{s}' is not a positive integer")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    ranks.sort_unstable();
    ranks.dedup();
    Ok(ranks)
}

fn parse_taus(raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|t| t.is_finite())
                .ok_or_else(|| CliError::Usage(format!("--tau: '{s}' is not a finite number")))
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct RankRow {
    cohort: String,
    probes: usize,
    rates: Vec<Num>,
}

#[derive(Debug, Serialize)]
struct DemoOpenSet {
    demo: String,
    dir: Option<Num>,
    far: Option<Num>,
}

#[derive(Debug, Serialize)]
struct OpenSetPoint {
    /// Threshold in the input file's score units.
    tau: Num,
    /// FAR target exponent when calibrated.
    exponent: Option<f64>,
    per_demo: Vec<DemoOpenSet>,
    far_gap: Option<Num>,
    dir_gap: Option<Num>,
    fdr_prime_literal: Option<Num>,
    fdr_prime_complement: Option<Num>,
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct IdentifyReport {
    probes: usize,
    gallery_size: usize,
    alpha: f64,
    ranks: Vec<usize>,
    rank_table: Vec<RankRow>,
    closed_set_discrepancy: Vec<Num>,
    open_set: Vec<OpenSetPoint>,
}

pub(crate) fn run(args: &IdentifyArgs) -> Result<i32, CliError> {
    let polarity = parse_polarity(args.polarity.as_deref())?;
    let alpha = unit("alpha", args.alpha)?;
    let modes = parse_modes(&args.mode)?;
    let ranks = parse_ranks(&args.rank)?;
    let formats = match &args.format {
        Some(f) => Formats::parse(f)?,
        None => Formats::default(),
    };
    let set = load_trials(&args.trials, polarity).map_err(|source| CliError::Input {
        path: args.trials.clone(),
        source,
    })?;

    // (internal tau, exponent)
    let thresholds: Vec<(f64, Option<f64>)> = match (&args.tau, &args.grid) {
        (Some(t), _) => parse_taus(t)?
            .into_iter()
            .map(|t| (polarity.orient(t), None))
            .collect(),
        (None, Some(g)) => {
            let grid = parse_grid(g)?;
            let dev_path = args.dev.as_ref().expect("clap requires --dev with --grid");
            let dev = load_trials(dev_path, polarity).map_err(|source| CliError::Input {
                path: dev_path.clone(),
                source,
            })?;
            let cal = Calibrator::from_scores(dev.non_mated_max_scores()).map_err(|source| {
                CliError::Input {
                    path: dev_path.clone(),
                    source,
                }
            })?;
            grid.exponents()
                .iter()
                .map(|&x| (cal.threshold(x).tau, Some(x)))
                .collect()
        }
        (None, None) => Vec::new(),
    };

    let mut rank_table = Vec::new();
    let mut cohorts = vec![("all".to_string(), Cohort::All)];
    cohorts.extend(
        set.mated_labels()
            .into_iter()
            .map(|l| (l.to_string(), Cohort::Demo(l))),
    );
    let mut closed = Vec::new();
    if !set.mated_labels().is_empty() {
        for (name, cohort) in &cohorts {
            let rates = ranks
                .iter()
                .map(|&n| rank_n_rate(&set, n, cohort).map(Num::rate))
                .collect::<Result<Vec<_>, _>>()?;
            let probes = set
                .trials()
                .iter()
                .filter(|t| t.in_gallery() && cohort.admits(t))
                .count();
            rank_table.push(RankRow {
                cohort: name.clone(),
                probes,
                rates,
            });
        }
        closed = ranks
            .iter()
            .map(|&n| closed_set_discrepancy(&set, n).map(Num::rate))
            .collect::<Result<Vec<_>, _>>()?;
    } else {
        let _ = writeln!(std::io::stderr(), "no in-gallery probes; closed-set table is empty");
    }

    let mut failed = false;
    let open_set: Vec<OpenSetPoint> = thresholds
        .iter()
        .map(|&(tau, exponent)| {
            let point = open_set_point(&set, tau, exponent, alpha, modes, polarity);
            if let Some(e) = &point.error {
                failed = true;
                let _ = writeln!(
                    std::io::stderr(),
                    "open-set rates at tau {}: {e}",
                    point.tau.text
                );
            }
            point
        })
        .collect();

    let report = IdentifyReport {
        probes: set.trials().len(),
        gallery_size: set.gallery_size(),
        alpha,
        ranks,
        rank_table,
        closed_set_discrepancy: closed,
        open_set,
    };
    let out = args.out.clone().unwrap_or_else(|| DEFAULT_OUT.into());
    create_dir(&out)?;
    write_file(&out.join("identify.txt"), &render(&report))?;
    if formats.json {
        write_file(&out.join("identify.json"), &to_json(&report))?;
    }
    if formats.csv {
        write_file(&out.join("identify.csv"), &long_csv(&report))?;
    }
    Ok(if failed { EXIT_INPUT } else { EXIT_OK })
}

fn open_set_point(
    set: &GallerySet,
    tau: f64,
    exponent: Option<f64>,
    alpha: f64,
    modes: Modes,
    polarity: Polarity,
) -> OpenSetPoint {
    let mut labels = set.mated_labels();
    labels.extend(set.non_mated_labels());
    let per_demo = labels
        .into_iter()
        .map(|l| {
            let c = Cohort::Demo(l.clone());
            DemoOpenSet {
                demo: l.to_string(),
                dir: dir(set, tau, &c).ok().map(Num::rate),
                far: far_open(set, tau, &c).ok().map(Num::rate),
            }
        })
        .collect();
    let mut point = OpenSetPoint {
        tau: Num::score(polarity.orient(tau)),
        exponent,
        per_demo,
        far_gap: None,
        dir_gap: None,
        fdr_prime_literal: None,
        fdr_prime_complement: None,
        error: None,
    };
    let gaps = open_set_gaps(set, tau).and_then(|g| {
        let literal = modes
            .literal
            .then(|| fdr_prime(set, tau, alpha, FdrPrimeMode::Literal))
            .transpose()?;
        let complement = modes
            .complement
            .then(|| fdr_prime(set, tau, alpha, FdrPrimeMode::Complement))
            .transpose()?;
        Ok((g, literal, complement))
    });
    match gaps {
        Ok((g, literal, complement)) => {
            point.far_gap = Some(Num::rate(g.far_gap));
            point.dir_gap = Some(Num::rate(g.dir_gap));
            point.fdr_prime_literal = literal.map(Num::fdr);
            point.fdr_prime_complement = complement.map(Num::fdr);
        }
        Err(e) => point.error = Some(e.to_string()),
    }
    point
}

fn text(n: &Option<Num>) -> String {
    n.as_ref().map_or("-".into(), |n| n.text.clone())
}

fn render(r: &IdentifyReport) -> String {
    let mut out = format!(
        "probes: {}\ngallery identities: {}\nalpha: {}\n\n",
        r.probes, r.gallery_size, r.alpha
    );
    let mut header = vec!["rank-n".to_string(), "probes".into()];
    header.extend(r.ranks.iter().map(|n| format!("n={n}")));
    let mut rows: Vec<Vec<String>> = r
        .rank_table
        .iter()
        .map(|row| {
            let mut v = vec![row.cohort.clone(), row.probes.to_string()];
            v.extend(row.rates.iter().map(|n| n.text.clone()));
            v
        })
        .collect();
    if !r.closed_set_discrepancy.is_empty() {
        let mut v = vec!["C (max gap)".to_string(), String::new()];
        v.extend(r.closed_set_discrepancy.iter().map(|n| n.text.clone()));
        rows.push(v);
    }
    out.push_str(&format::table(&header, &rows));

    for p in &r.open_set {
        out.push('\n');
        match p.exponent {
            Some(x) => out.push_str(&format!("open set at tau {} (FAR {})\n", p.tau.text, format::exponent(x))),
            None => out.push_str(&format!("open set at tau {}\n", p.tau.text)),
        }
        let header = vec!["demographic".to_string(), "DIR".into(), "FAR".into()];
        let rows: Vec<Vec<String>> = p
            .per_demo
            .iter()
            .map(|d| vec![d.demo.clone(), text(&d.dir), text(&d.far)])
            .collect();
        out.push_str(&format::table(&header, &rows));
        match &p.error {
            Some(e) => out.push_str(&format!("FDR' unavailable: {e}\n")),
            None => {
                out.push_str(&format!(
                    "FAR gap {}  DIR gap {}\n",
                    text(&p.far_gap),
                    text(&p.dir_gap)
                ));
                if let Some(l) = &p.fdr_prime_literal {
                    out.push_str(&format!("FDR' literal: {}\n", l.text));
                }
                if let Some(c) = &p.fdr_prime_complement {
                    out.push_str(&format!("FDR' complement: {}\n", c.text));
                }
            }
        }
    }
    out
}

fn long_csv(r: &IdentifyReport) -> String {
    let mut out = String::from("section,tau,cohort,metric,value\n");
    for row in &r.rank_table {
        for (n, v) in r.ranks.iter().zip(&row.rates) {
            out.push_str(&format!("closed,,{},rank{n},{}\n", csv_field(&row.cohort), v.value));
        }
    }
    for (n, v) in r.ranks.iter().zip(&r.closed_set_discrepancy) {
        out.push_str(&format!("closed,,all,c_rank{n},{}\n", v.value));
    }
    for p in &r.open_set {
        let tau = p.tau.value;
        for d in &p.per_demo {
            let demo = csv_field(&d.demo);
            if let Some(v) = &d.dir {
                out.push_str(&format!("open,{tau},{demo},dir,{}\n", v.value));
            }
            if let Some(v) = &d.far {
                out.push_str(&format!("open,{tau},{demo},far,{}\n", v.value));
            }
        }
        for (name, v) in [
            ("far_gap", &p.far_gap),
            ("dir_gap", &p.dir_gap),
            ("fdr_prime_literal", &p.fdr_prime_literal),
            ("fdr_prime_complement", &p.fdr_prime_complement),
        ] {
            if let Some(v) = v {
                out.push_str(&format!("open,{tau},all,{name},{}\n", v.value));
            }
        }
    }
    out
}
