//! Closed-set (rank-n) and open-set (DIR / FAR) identification rates and their
//! demographic discrepancies.
//!
//! Trial file format, long form, one row per (probe, gallery identity):
//!
//! ```text
//! probe_id,probe_demo,in_gallery,mate_id,gallery_id,score
//! p1,Female,true,g7,g7,0.91
//! p1,Female,true,g7,g3,0.42
//! p2,Male,false,,g7,0.18
//! ```
//!
//! Rows are grouped by `probe_id` in order of first appearance.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::{check_unit, Error, Result};
use crate::fdr::max_gap;
use crate::rates::accepts;
use crate::score::{DemographicLabel, Polarity};

pub const TRIAL_HEADER: [&str; 6] = [
    "probe_id",
    "probe_demo",
    "in_gallery",
    "mate_id",
    "gallery_id",
    "score",
];

/// One probe searched against the gallery. Scores are similarity-oriented.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationTrial {
    probe_id: String,
    probe_demo: DemographicLabel,
    in_gallery: bool,
    mate_id: Option<String>,
    gallery_scores: BTreeMap<String, f64>,
}

impl IdentificationTrial {
    pub fn new(
        probe_id: impl Into<String>,
        probe_demo: DemographicLabel,
        in_gallery: bool,
        mate_id: Option<String>,
        gallery_scores: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let probe_id = probe_id.into();
        if gallery_scores.is_empty() {
            return Err(Error::InvalidTrial(format!("probe {probe_id} has no gallery scores")));
        }
        if let Some((g, s)) = gallery_scores.iter().find(|(_, s)| !s.is_finite()) {
            return Err(Error::InvalidTrial(format!(
                "probe {probe_id}: non-finite score {s} against {g}"
            )));
        }
        let mate_in_gallery = mate_id
            .as_ref()
            .is_some_and(|m| gallery_scores.contains_key(m));
        if in_gallery != mate_in_gallery {
            return Err(Error::InvalidTrial(format!(
                "probe {probe_id}: in_gallery={in_gallery} but mate {} scored in gallery",
                if mate_in_gallery { "is" } else { "is not" }
            )));
        }
        Ok(Self {
            probe_id,
            probe_demo,
            in_gallery,
            mate_id,
            gallery_scores,
        })
    }

    pub fn probe_id(&self) -> &str {
        &self.probe_id
    }

    pub fn probe_demo(&self) -> &DemographicLabel {
        &self.probe_demo
    }

    pub fn in_gallery(&self) -> bool {
        self.in_gallery
    }

    pub fn mate_id(&self) -> Option<&str> {
        self.mate_id.as_deref()
    }

    pub fn gallery_scores(&self) -> &BTreeMap<String, f64> {
        &self.gallery_scores
    }

    /// Score against the mate, when the mate is enrolled.
    pub fn mate_score(&self) -> Option<f64> {
        self.mate_id
            .as_ref()
            .and_then(|m| self.gallery_scores.get(m))
            .copied()
    }

    pub fn max_score(&self) -> f64 {
        self.gallery_scores
            .values()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// How a non-mate scoring exactly the mate's score is ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Ties rank the mate first.
    #[default]
    MateFavorable,
    /// Ties rank the mate last.
    Adversarial,
}

/// Rank of the mate among the gallery identities, 1 being best. Ties favour
/// the mate.
pub fn rank_of(trial: &IdentificationTrial) -> Result<usize> {
    rank_with(trial, TieBreak::MateFavorable)
}

pub fn rank_with(trial: &IdentificationTrial, ties: TieBreak) -> Result<usize> {
    let mate = trial
        .mate_score()
        .filter(|_| trial.in_gallery)
        .ok_or_else(|| Error::NotInGallery(trial.probe_id.clone()))?;
    let mate_id = trial.mate_id.as_deref();
    let above = trial
        .gallery_scores
        .iter()
        .filter(|(g, _)| Some(g.as_str()) != mate_id)
        .filter(|(_, &s)| match ties {
            TieBreak::MateFavorable => s > mate,
            TieBreak::Adversarial => s >= mate,
        })
        .count();
    Ok(1 + above)
}

/// Which probes a rate is computed over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cohort {
    All,
    Demo(DemographicLabel),
}

impl Cohort {
    pub fn admits(&self, trial: &IdentificationTrial) -> bool {
        match self {
            Cohort::All => true,
            Cohort::Demo(d) => trial.probe_demo() == d,
        }
    }

    fn describe(&self) -> String {
        match self {
            Cohort::All => "all probes".into(),
            Cohort::Demo(d) => format!("demographic {d}"),
        }
    }
}

/// Trials against a declared set of gallery identities.
#[derive(Debug, Clone, PartialEq)]
pub struct GallerySet {
    trials: Vec<IdentificationTrial>,
    gallery: BTreeSet<String>,
}

impl GallerySet {
    pub fn new(trials: Vec<IdentificationTrial>, gallery: BTreeSet<String>) -> Result<Self> {
        if gallery.is_empty() {
            return Err(Error::InvalidTrial("gallery is empty".into()));
        }
        for t in &trials {
            if let Some(g) = t.gallery_scores.keys().find(|g| !gallery.contains(*g)) {
                return Err(Error::InvalidTrial(format!(
                    "probe {} scored against {g}, which is not in the gallery",
                    t.probe_id
                )));
            }
        }
        Ok(Self { trials, gallery })
    }

    /// Gallery taken as the union of all scored identities.
    pub fn from_trials(trials: Vec<IdentificationTrial>) -> Result<Self> {
        let gallery = trials
            .iter()
            .flat_map(|t| t.gallery_scores.keys().cloned())
            .collect();
        Self::new(trials, gallery)
    }

    pub fn trials(&self) -> &[IdentificationTrial] {
        &self.trials
    }

    pub fn gallery_size(&self) -> usize {
        self.gallery.len()
    }

    pub fn labels(&self) -> BTreeSet<DemographicLabel> {
        self.trials.iter().map(|t| t.probe_demo.clone()).collect()
    }

    fn mated<'a>(&'a self, cohort: &'a Cohort) -> impl Iterator<Item = &'a IdentificationTrial> {
        self.trials
            .iter()
            .filter(move |t| t.in_gallery && cohort.admits(t))
    }

    fn non_mated<'a>(&'a self, cohort: &'a Cohort) -> impl Iterator<Item = &'a IdentificationTrial> {
        self.trials
            .iter()
            .filter(move |t| !t.in_gallery && cohort.admits(t))
    }

    /// Labels with at least one in-gallery probe.
    pub fn mated_labels(&self) -> BTreeSet<DemographicLabel> {
        self.trials
            .iter()
            .filter(|t| t.in_gallery)
            .map(|t| t.probe_demo.clone())
            .collect()
    }

    /// Labels with at least one out-of-gallery probe.
    pub fn non_mated_labels(&self) -> BTreeSet<DemographicLabel> {
        self.trials
            .iter()
            .filter(|t| !t.in_gallery)
            .map(|t| t.probe_demo.clone())
            .collect()
    }

    /// Highest score of every out-of-gallery probe, pooled over demographics.
    pub fn non_mated_max_scores(&self) -> Vec<f64> {
        self.non_mated(&Cohort::All).map(|t| t.max_score()).collect()
    }
}

fn fraction<'a>(
    trials: impl Iterator<Item = &'a IdentificationTrial>,
    what: impl FnOnce() -> String,
    mut hit: impl FnMut(&IdentificationTrial) -> Result<bool>,
) -> Result<f64> {
    let mut total = 0usize;
    let mut hits = 0usize;
    for t in trials {
        total += 1;
        if hit(t)? {
            hits += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyCohort(what()));
    }
    Ok(hits as f64 / total as f64)
}

/// Fraction of in-gallery probes whose mate ranks within the top `n`.
pub fn rank_n_rate(set: &GallerySet, n: usize, cohort: &Cohort) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidTrial("rank n must be at least 1".into()));
    }
    fraction(
        set.mated(cohort),
        || format!("no in-gallery probes for {}", cohort.describe()),
        |t| Ok(rank_of(t)? <= n),
    )
}

/// Widest rank-n gap between demographics with in-gallery probes.
pub fn closed_set_discrepancy(set: &GallerySet, n: usize) -> Result<f64> {
    let rates = set
        .mated_labels()
        .into_iter()
        .map(|d| rank_n_rate(set, n, &Cohort::Demo(d)))
        .collect::<Result<Vec<_>>>()?;
    max_gap(rates).ok_or_else(|| Error::EmptyCohort("no in-gallery probes".into()))
}

/// Detection and identification rate: in-gallery probes whose mate ranks
/// first and scores at least `tau`.
pub fn dir(set: &GallerySet, tau: f64, cohort: &Cohort) -> Result<f64> {
    fraction(
        set.mated(cohort),
        || format!("no in-gallery probes for {}", cohort.describe()),
        |t| {
            let mate = t.mate_score().ok_or_else(|| Error::NotInGallery(t.probe_id.clone()))?;
            Ok(rank_of(t)? == 1 && accepts(mate, tau))
        },
    )
}

/// Open-set false-alarm rate: out-of-gallery probes whose best gallery score
/// reaches `tau`.
pub fn far_open(set: &GallerySet, tau: f64, cohort: &Cohort) -> Result<f64> {
    fraction(
        set.non_mated(cohort),
        || format!("no out-of-gallery probes for {}", cohort.describe()),
        |t| Ok(accepts(t.max_score(), tau)),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FdrPrimeMode {
    /// `alpha * max FAR gap + (1 - alpha) * max DIR gap`; 0 is parity.
    #[default]
    Literal,
    /// One minus the literal value, oriented like FDR (1 is parity).
    Complement,
}

/// The two open-set gaps at `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpenSetGaps {
    pub far_gap: f64,
    pub dir_gap: f64,
}

/// FAR gap over demographics with out-of-gallery probes and DIR gap over
/// demographics with in-gallery probes.
pub fn open_set_gaps(set: &GallerySet, tau: f64) -> Result<OpenSetGaps> {
    let fars = set
        .non_mated_labels()
        .into_iter()
        .map(|d| far_open(set, tau, &Cohort::Demo(d)))
        .collect::<Result<Vec<_>>>()?;
    let dirs = set
        .mated_labels()
        .into_iter()
        .map(|d| dir(set, tau, &Cohort::Demo(d)))
        .collect::<Result<Vec<_>>>()?;
    Ok(OpenSetGaps {
        far_gap: max_gap(fars)
            .ok_or_else(|| Error::EmptyCohort("no out-of-gallery probes".into()))?,
        dir_gap: max_gap(dirs).ok_or_else(|| Error::EmptyCohort("no in-gallery probes".into()))?,
    })
}

pub fn fdr_prime(set: &GallerySet, tau: f64, alpha: f64, mode: FdrPrimeMode) -> Result<f64> {
    check_unit("alpha", alpha)?;
    let gaps = open_set_gaps(set, tau)?;
    let literal = alpha * gaps.far_gap + (1.0 - alpha) * gaps.dir_gap;
    Ok(match mode {
        FdrPrimeMode::Literal => literal,
        FdrPrimeMode::Complement => 1.0 - literal,
    })
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

struct PendingTrial {
    line: u64,
    demo: DemographicLabel,
    in_gallery: bool,
    mate: Option<String>,
    scores: BTreeMap<String, f64>,
}

/// Parses an identification trial file; the gallery is the union of all
/// `gallery_id` values.
pub fn read_trials<R: Read>(reader: R, polarity: Polarity) -> Result<GallerySet> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::MalformedRow {
        line: 1,
        reason: e.to_string(),
    })?;
    if header.iter().collect::<Vec<_>>() != TRIAL_HEADER {
        if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
            return Err(Error::EmptyFile);
        }
        return Err(Error::MalformedRow {
            line: 1,
            reason: format!("header must be '{}'", TRIAL_HEADER.join(",")),
        });
    }

    let mut order: Vec<String> = Vec::new();
    let mut pending: HashMap<String, PendingTrial> = HashMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::MalformedRow {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let malformed = |reason: String| Error::MalformedRow { line, reason };

        let probe = &row[0];
        if probe.is_empty() {
            return Err(malformed("empty probe_id".into()));
        }
        let demo =
            DemographicLabel::new(&row[1]).map_err(|_| malformed("empty probe_demo".into()))?;
        let in_gallery = parse_bool(&row[2])
            .ok_or_else(|| malformed(format!("in_gallery '{}' is not a boolean", &row[2])))?;
        let mate = (!row[3].is_empty()).then(|| row[3].to_owned());
        let gallery_id = &row[4];
        if gallery_id.is_empty() {
            return Err(malformed("empty gallery_id".into()));
        }
        let raw = row[5].trim();
        let score: f64 = raw
            .parse()
            .map_err(|_| malformed(format!("score '{raw}' is not a number")))?;
        if !score.is_finite() {
            return Err(Error::NonFiniteScore { line });
        }

        let entry = pending.entry(probe.to_owned()).or_insert_with(|| {
            order.push(probe.to_owned());
            PendingTrial {
                line,
                demo: demo.clone(),
                in_gallery,
                mate: mate.clone(),
                scores: BTreeMap::new(),
            }
        });
        if entry.demo != demo || entry.in_gallery != in_gallery || entry.mate != mate {
            return Err(malformed(format!(
                "probe {probe} disagrees with its first row (line {}) on probe_demo, in_gallery or mate_id",
                entry.line
            )));
        }
        if entry
            .scores
            .insert(gallery_id.to_owned(), polarity.orient(score))
            .is_some()
        {
            return Err(malformed(format!(
                "probe {probe} scored twice against {gallery_id}"
            )));
        }
    }
    if order.is_empty() {
        return Err(Error::EmptyFile);
    }

    let trials = order
        .into_iter()
        .map(|id| {
            let p = pending.remove(&id).expect("grouped probe");
            let line = p.line;
            IdentificationTrial::new(id, p.demo, p.in_gallery, p.mate, p.scores).map_err(|e| {
                Error::MalformedRow {
                    line,
                    reason: e.to_string(),
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    GallerySet::from_trials(trials)
}

pub fn load_trials(path: &Path, polarity: Polarity) -> Result<GallerySet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_trials(file, polarity)
}
