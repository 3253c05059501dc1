//! Brute-force reference implementations and random instance generators.
//! Everything here is deliberately naive: plain loops over records, no
//! sorting or indexing, so it shares no code paths with the library.
#![allow(dead_code)]

pub mod props;

use std::collections::{BTreeMap, BTreeSet};

use fdrkit::identification::{GallerySet, IdentificationTrial};
use fdrkit::{ComparisonRecord, DemographicLabel, ScoreKind, ScoreSet};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const DEMOS: [&str; 4] = ["A", "B", "C", "D"];

pub fn label(s: &str) -> DemographicLabel {
    DemographicLabel::new(s).unwrap()
}

/// Scores on a quarter grid so ties are common.
pub fn grid_score<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(-8i32..=8) as f64 / 4.0
}

/// Up to `max_records` records over up to four demographics, with at least
/// one homogeneous impostor and one genuine record.
pub fn random_score_set<R: Rng>(rng: &mut R, max_records: usize) -> ScoreSet {
    let n_demo = rng.random_range(1..=DEMOS.len());
    let demos = &DEMOS[..n_demo];
    let n = rng.random_range(2..=max_records);
    let mut records = Vec::with_capacity(n);
    let d0 = label(demos.choose(rng).unwrap());
    records.push(ComparisonRecord::impostor(d0.clone(), d0.clone(), grid_score(rng)).unwrap());
    records.push(ComparisonRecord::genuine(d0, grid_score(rng)).unwrap());
    while records.len() < n {
        let e = label(demos.choose(rng).unwrap());
        if rng.random_bool(0.6) {
            let p = label(demos.choose(rng).unwrap());
            records.push(ComparisonRecord::impostor(e, p, grid_score(rng)).unwrap());
        } else {
            records.push(ComparisonRecord::genuine(e, grid_score(rng)).unwrap());
        }
    }
    ScoreSet::new(records)
}

pub fn naive_fmr(set: &ScoreSet, tau: f64, e: &DemographicLabel, p: &DemographicLabel) -> Option<f64> {
    let mut total = 0usize;
    let mut hits = 0usize;
    for r in set.records() {
        if r.kind() == ScoreKind::Impostor && r.enroll_demo() == e && r.probe_demo() == p {
            total += 1;
            if r.score() >= tau {
                hits += 1;
            }
        }
    }
    (total > 0).then(|| hits as f64 / total as f64)
}

pub fn naive_fnmr(set: &ScoreSet, tau: f64, d: &DemographicLabel) -> Option<f64> {
    let mut total = 0usize;
    let mut misses = 0usize;
    for r in set.records() {
        if r.kind() == ScoreKind::Genuine && r.enroll_demo() == d {
            total += 1;
            if r.score() < tau {
                misses += 1;
            }
        }
    }
    (total > 0).then(|| misses as f64 / total as f64)
}

fn labels_of(set: &ScoreSet) -> Vec<DemographicLabel> {
    let mut v = Vec::new();
    for r in set.records() {
        for l in [r.enroll_demo(), r.probe_demo()] {
            if !v.contains(l) {
                v.push(l.clone());
            }
        }
    }
    v
}

/// Largest pairwise absolute difference, by enumeration of all pairs.
pub fn pairwise_gap(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut gap = 0.0f64;
    for a in values {
        for b in values {
            gap = gap.max((a - b).abs());
        }
    }
    Some(gap)
}

pub fn naive_a_gap(set: &ScoreSet, tau: f64) -> Option<f64> {
    let fmrs: Vec<f64> = labels_of(set)
        .iter()
        .filter_map(|d| naive_fmr(set, tau, d, d))
        .collect();
    pairwise_gap(&fmrs)
}

pub fn naive_b_gap(set: &ScoreSet, tau: f64) -> Option<f64> {
    let fnmrs: Vec<f64> = labels_of(set)
        .iter()
        .filter_map(|d| naive_fnmr(set, tau, d))
        .collect();
    pairwise_gap(&fnmrs)
}

pub fn naive_fdr(a: f64, b: f64, alpha: f64) -> f64 {
    1.0 - (alpha * a + (1.0 - alpha) * b)
}

/// Smallest impostor score s with count(>= s) / N <= 10^-x, by scanning every
/// candidate score.
pub fn naive_threshold(set: &ScoreSet, x: f64) -> f64 {
    let imp: Vec<f64> = set
        .records()
        .iter()
        .filter(|r| r.kind() == ScoreKind::Impostor)
        .map(|r| r.score())
        .collect();
    let n = imp.len() as f64;
    let mut best = f64::INFINITY;
    for &s in &imp {
        let count = imp.iter().filter(|&&v| v >= s).count() as f64;
        if count * 10f64.powf(x) <= n && s < best {
            best = s;
        }
    }
    best
}

/// Random gallery: up to `max_ids` identities, a handful of probes over two or
/// three demographics, mixing in-gallery and out-of-gallery probes.
pub fn random_gallery<R: Rng>(rng: &mut R, max_ids: usize) -> GallerySet {
    let n_ids = rng.random_range(1..=max_ids);
    let ids: Vec<String> = (0..n_ids).map(|i| format!("g{i}")).collect();
    let demos = &DEMOS[..rng.random_range(1..=3)];
    let n_probes = rng.random_range(1..=12);
    let mut trials = Vec::with_capacity(n_probes);
    for k in 0..n_probes {
        let scores: BTreeMap<String, f64> = ids
            .iter()
            .map(|g| (g.clone(), grid_score(rng)))
            .collect();
        let demo = label(demos.choose(rng).unwrap());
        let (in_gallery, mate) = match rng.random_range(0..3) {
            0 => (false, None),
            1 => (false, Some("absent".to_string())),
            _ => (true, Some(ids.choose(rng).unwrap().clone())),
        };
        trials.push(
            IdentificationTrial::new(format!("p{k}"), demo, in_gallery, mate, scores).unwrap(),
        );
    }
    let gallery: BTreeSet<String> = ids.into_iter().collect();
    GallerySet::new(trials, gallery).unwrap()
}

/// Position of the mate after sorting the gallery by descending score with the
/// mate placed first among equal scores.
pub fn naive_rank(t: &IdentificationTrial) -> Option<usize> {
    if !t.in_gallery() {
        return None;
    }
    let mate = t.mate_id()?;
    let mut order: Vec<(&String, f64)> = t.gallery_scores().iter().map(|(g, s)| (g, *s)).collect();
    order.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then_with(|| (a.0 != mate).cmp(&(b.0 != mate)))
    });
    order.iter().position(|(g, _)| g.as_str() == mate).map(|i| i + 1)
}

fn demo_filter<'a>(
    set: &'a GallerySet,
    demo: Option<&'a DemographicLabel>,
) -> impl Iterator<Item = &'a IdentificationTrial> {
    set.trials()
        .iter()
        .filter(move |t| demo.is_none_or(|d| t.probe_demo() == d))
}

pub fn naive_rank_n(set: &GallerySet, n: usize, demo: Option<&DemographicLabel>) -> Option<f64> {
    let ranks: Vec<usize> = demo_filter(set, demo).filter_map(naive_rank).collect();
    (!ranks.is_empty()).then(|| ranks.iter().filter(|&&r| r <= n).count() as f64 / ranks.len() as f64)
}

pub fn naive_dir(set: &GallerySet, tau: f64, demo: Option<&DemographicLabel>) -> Option<f64> {
    let mut total = 0usize;
    let mut hits = 0usize;
    for t in demo_filter(set, demo).filter(|t| t.in_gallery()) {
        total += 1;
        let mate = t.gallery_scores()[t.mate_id().unwrap()];
        if naive_rank(t) == Some(1) && mate >= tau {
            hits += 1;
        }
    }
    (total > 0).then(|| hits as f64 / total as f64)
}

pub fn naive_far(set: &GallerySet, tau: f64, demo: Option<&DemographicLabel>) -> Option<f64> {
    let mut total = 0usize;
    let mut hits = 0usize;
    for t in demo_filter(set, demo).filter(|t| !t.in_gallery()) {
        total += 1;
        if t.gallery_scores().values().any(|&s| s >= tau) {
            hits += 1;
        }
    }
    (total > 0).then(|| hits as f64 / total as f64)
}

/// Literal open-set discrepancy, or None when either cohort is empty.
pub fn naive_fdr_prime(set: &GallerySet, tau: f64, alpha: f64) -> Option<f64> {
    let demos: Vec<DemographicLabel> = {
        let mut v: Vec<DemographicLabel> = Vec::new();
        for t in set.trials() {
            if !v.contains(t.probe_demo()) {
                v.push(t.probe_demo().clone());
            }
        }
        v
    };
    let fars: Vec<f64> = demos.iter().filter_map(|d| naive_far(set, tau, Some(d))).collect();
    let dirs: Vec<f64> = demos.iter().filter_map(|d| naive_dir(set, tau, Some(d))).collect();
    Some(alpha * pairwise_gap(&fars)? + (1.0 - alpha) * pairwise_gap(&dirs)?)
}

pub fn naive_closed_set(set: &GallerySet, n: usize) -> Option<f64> {
    let mut demos: Vec<DemographicLabel> = Vec::new();
    for t in set.trials().iter().filter(|t| t.in_gallery()) {
        if !demos.contains(t.probe_demo()) {
            demos.push(t.probe_demo().clone());
        }
    }
    let rates: Vec<f64> = demos.iter().filter_map(|d| naive_rank_n(set, n, Some(d))).collect();
    pairwise_gap(&rates)
}

fn same(what: &str, lib: Option<f64>, naive: Option<f64>) -> Result<(), String> {
    if lib == naive {
        Ok(())
    } else {
        Err(format!("{what}: library {lib:?} vs enumeration {naive:?}"))
    }
}

/// Candidate thresholds: every distinct score, one past each end, and the
/// calibrated thresholds for a few exponents.
fn candidate_taus(set: &ScoreSet) -> Vec<f64> {
    let mut taus: Vec<f64> = set.records().iter().map(|r| r.score()).collect();
    taus.extend([-100.0, 100.0, 0.1]);
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    taus
}

/// Compares rate tables, gaps and FDR against enumeration at every candidate
/// threshold, and calibration against a scan of all impostor scores.
pub fn check_score_set(set: &ScoreSet) -> Result<(), String> {
    use fdrkit::fdr::{a_gap, b_gap, fdr};
    use fdrkit::rates::{calibrate_threshold, fmr, fnmr, rate_table, Threshold};

    let labels: Vec<DemographicLabel> = set.labels().iter().cloned().collect();
    for tau in candidate_taus(set) {
        let table = rate_table(set, Threshold::fixed(tau));
        for e in &labels {
            for p in &labels {
                same(
                    &format!("fmr {e}-{p} at {tau}"),
                    table.fmr_cell(e, p).map(|c| c.rate),
                    naive_fmr(set, tau, e, p),
                )?;
                let cell: Vec<&ComparisonRecord> = set
                    .impostors()
                    .filter(|r| r.enroll_demo() == e && r.probe_demo() == p)
                    .collect();
                same(
                    &format!("fmr() {e}-{p} at {tau}"),
                    fmr(cell.iter().copied(), tau).ok(),
                    naive_fmr(set, tau, e, p),
                )?;
            }
            same(
                &format!("fnmr {e} at {tau}"),
                table.fnmr_cell(e).map(|c| c.rate),
                naive_fnmr(set, tau, e),
            )?;
            let gen: Vec<&ComparisonRecord> =
                set.genuines().filter(|r| r.enroll_demo() == e).collect();
            same(
                &format!("fnmr() {e} at {tau}"),
                fnmr(gen.iter().copied(), tau).ok(),
                naive_fnmr(set, tau, e),
            )?;
        }
        let a = a_gap(&table).ok();
        let b = b_gap(&table).ok();
        same(&format!("a_gap at {tau}"), a, naive_a_gap(set, tau))?;
        same(&format!("b_gap at {tau}"), b, naive_b_gap(set, tau))?;
        if let (Some(a), Some(b)) = (a, b) {
            for alpha in [0.0, 0.25, 0.5, 0.8, 1.0] {
                same(
                    &format!("fdr alpha={alpha} at {tau}"),
                    fdr(a, b, alpha).ok(),
                    Some(naive_fdr(a, b, alpha)),
                )?;
            }
        }
    }
    for x in [0.0, 0.5, 1.0, 2.0, 3.0] {
        let t = calibrate_threshold(set, x).map_err(|e| e.to_string())?;
        same(
            &format!("threshold x={x}"),
            Some(t.tau),
            Some(naive_threshold(set, x)),
        )?;
    }
    Ok(())
}

/// Compares rank, rank-n, DIR, FAR, closed-set gap and FDR' against
/// enumeration at every distinct score used as a threshold.
pub fn check_gallery(set: &GallerySet) -> Result<(), String> {
    use fdrkit::identification::{
        closed_set_discrepancy, dir, far_open, fdr_prime, rank_n_rate, rank_of, Cohort,
        FdrPrimeMode,
    };

    for t in set.trials() {
        same(
            &format!("rank of {}", t.probe_id()),
            rank_of(t).ok().map(|r| r as f64),
            naive_rank(t).map(|r| r as f64),
        )?;
    }
    let demos: Vec<DemographicLabel> = set.labels().into_iter().collect();
    let mut cohorts = vec![(None, Cohort::All)];
    cohorts.extend(demos.iter().map(|d| (Some(d), Cohort::Demo(d.clone()))));
    for n in 1..=set.gallery_size() + 1 {
        for (d, c) in &cohorts {
            same(
                &format!("rank-{n} for {c:?}"),
                rank_n_rate(set, n, c).ok(),
                naive_rank_n(set, n, *d),
            )?;
        }
        same(
            &format!("closed-set gap n={n}"),
            closed_set_discrepancy(set, n).ok(),
            naive_closed_set(set, n),
        )?;
    }
    let mut taus: Vec<f64> = set
        .trials()
        .iter()
        .flat_map(|t| t.gallery_scores().values().copied())
        .collect();
    taus.push(100.0);
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    for tau in taus {
        for (d, c) in &cohorts {
            same(&format!("dir {c:?} at {tau}"), dir(set, tau, c).ok(), naive_dir(set, tau, *d))?;
            same(
                &format!("far {c:?} at {tau}"),
                far_open(set, tau, c).ok(),
                naive_far(set, tau, *d),
            )?;
        }
        for alpha in [0.0, 0.5, 1.0] {
            let naive = naive_fdr_prime(set, tau, alpha);
            same(
                &format!("fdr' alpha={alpha} at {tau}"),
                fdr_prime(set, tau, alpha, FdrPrimeMode::Literal).ok(),
                naive,
            )?;
            same(
                &format!("fdr' complement alpha={alpha} at {tau}"),
                fdr_prime(set, tau, alpha, FdrPrimeMode::Complement).ok(),
                naive.map(|v| 1.0 - v),
            )?;
        }
    }
    Ok(())
}
