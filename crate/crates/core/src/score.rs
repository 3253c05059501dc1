//! Domain types shared by every other module.
//!
//! Scores are held in similarity orientation: a comparison is accepted at
//! threshold `tau` iff `score >= tau`. Distance-valued exports are negated on
//! the way in (see [`normalize_orientation`]).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Name of a demographic group, compared by exact (case-sensitive) string equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DemographicLabel(Arc<str>);

impl DemographicLabel {
    pub fn new(name: &str) -> Result<Self> {
        if name.is_empty() {
            return Err(Error::InvalidRecord("empty demographic label".into()));
        }
        Ok(Self(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for DemographicLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for DemographicLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for DemographicLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl FromStr for DemographicLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    Genuine,
    Impostor,
}

impl ScoreKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreKind::Genuine => "genuine",
            ScoreKind::Impostor => "impostor",
        }
    }
}

impl FromStr for ScoreKind {
    type Err = Error;

    /// Case-insensitive.
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("genuine") {
            Ok(ScoreKind::Genuine)
        } else if s.eq_ignore_ascii_case("impostor") {
            Ok(ScoreKind::Impostor)
        } else {
            Err(Error::InvalidRecord(format!(
                "kind must be 'genuine' or 'impostor', got '{s}'"
            )))
        }
    }
}

/// Orientation of raw scores in an input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Larger score means more likely the same identity.
    #[default]
    Similarity,
    /// Smaller score means more likely the same identity.
    Distance,
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "similarity" => Ok(Polarity::Similarity),
            "distance" => Ok(Polarity::Distance),
            _ => Err(Error::InvalidRecord(format!(
                "polarity must be 'similarity' or 'distance', got '{s}'"
            ))),
        }
    }
}

impl Polarity {
    /// Maps a raw score to similarity orientation.
    pub fn orient(self, score: f64) -> f64 {
        match self {
            Polarity::Similarity => score,
            Polarity::Distance => -score,
        }
    }
}

/// One enrollment/probe comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRecord {
    enroll_demo: DemographicLabel,
    probe_demo: DemographicLabel,
    score: f64,
    kind: ScoreKind,
}

impl ComparisonRecord {
    /// Rejects non-finite scores and genuine pairs whose two sides carry
    /// different demographic labels.
    pub fn new(
        enroll_demo: DemographicLabel,
        probe_demo: DemographicLabel,
        score: f64,
        kind: ScoreKind,
    ) -> Result<Self> {
        if !score.is_finite() {
            return Err(Error::InvalidRecord(format!("non-finite score {score}")));
        }
        if kind == ScoreKind::Genuine && enroll_demo != probe_demo {
            return Err(Error::InvalidRecord(format!(
                "genuine pair with mismatched demographics {enroll_demo}-{probe_demo}"
            )));
        }
        Ok(Self {
            enroll_demo,
            probe_demo,
            score,
            kind,
        })
    }

    pub fn genuine(demo: DemographicLabel, score: f64) -> Result<Self> {
        Self::new(demo.clone(), demo, score, ScoreKind::Genuine)
    }

    pub fn impostor(enroll: DemographicLabel, probe: DemographicLabel, score: f64) -> Result<Self> {
        Self::new(enroll, probe, score, ScoreKind::Impostor)
    }

    pub fn enroll_demo(&self) -> &DemographicLabel {
        &self.enroll_demo
    }

    pub fn probe_demo(&self) -> &DemographicLabel {
        &self.probe_demo
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    pub fn is_homogeneous(&self) -> bool {
        self.enroll_demo == self.probe_demo
    }

    /// Same record with `score` replaced; finiteness is re-checked.
    pub fn with_score(&self, score: f64) -> Result<Self> {
        Self::new(
            self.enroll_demo.clone(),
            self.probe_demo.clone(),
            score,
            self.kind,
        )
    }
}

/// Negates every score when `polarity` is [`Polarity::Distance`]; identity otherwise.
pub fn normalize_orientation(
    records: Vec<ComparisonRecord>,
    polarity: Polarity,
) -> Vec<ComparisonRecord> {
    match polarity {
        Polarity::Similarity => records,
        Polarity::Distance => records
            .into_iter()
            .map(|mut r| {
                r.score = -r.score;
                r
            })
            .collect(),
    }
}

/// An ordered collection of comparisons and the set of labels it mentions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    records: Vec<ComparisonRecord>,
    labels: BTreeSet<DemographicLabel>,
}

impl ScoreSet {
    pub fn new(records: Vec<ComparisonRecord>) -> Self {
        let labels = records
            .iter()
            .flat_map(|r| [r.enroll_demo.clone(), r.probe_demo.clone()])
            .collect();
        Self { records, labels }
    }

    pub fn records(&self) -> &[ComparisonRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<ComparisonRecord> {
        self.records
    }

    pub fn labels(&self) -> &BTreeSet<DemographicLabel> {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn impostors(&self) -> impl Iterator<Item = &ComparisonRecord> {
        self.records
            .iter()
            .filter(|r| r.kind == ScoreKind::Impostor)
    }

    pub fn genuines(&self) -> impl Iterator<Item = &ComparisonRecord> {
        self.records.iter().filter(|r| r.kind == ScoreKind::Genuine)
    }

    pub fn has_impostors(&self) -> bool {
        self.impostors().next().is_some()
    }

    /// Scores of all impostor comparisons, pooled across demographics.
    pub fn impostor_scores(&self) -> Vec<f64> {
        self.impostors().map(|r| r.score).collect()
    }

    /// Applies `f` to the score of every record whose enrollment demographic is `demo`.
    pub fn map_scores_for(
        &self,
        demo: &DemographicLabel,
        f: impl Fn(f64) -> f64,
    ) -> Result<ScoreSet> {
        let records = self
            .records
            .iter()
            .map(|r| {
                if &r.enroll_demo == demo {
                    r.with_score(f(r.score))
                } else {
                    Ok(r.clone())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScoreSet::new(records))
    }
}

/// Development (calibration) and test partitions of one system's scores.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    dev: ScoreSet,
    test: ScoreSet,
}

impl SplitDataset {
    pub fn new(dev: ScoreSet, test: ScoreSet) -> Result<Self> {
        if !dev.has_impostors() {
            return Err(Error::NoImpostorsInDev);
        }
        let split = Self { dev, test };
        for label in split.labels_missing_from_dev() {
            log::warn!("test set label '{label}' does not appear in the development set");
        }
        Ok(split)
    }

    pub fn dev(&self) -> &ScoreSet {
        &self.dev
    }

    pub fn test(&self) -> &ScoreSet {
        &self.test
    }

    /// Labels that occur in the test partition but not in the development one.
    /// These are still evaluated; the thresholds are demographic-blind.
    pub fn labels_missing_from_dev(&self) -> Vec<DemographicLabel> {
        self.test
            .labels()
            .difference(self.dev.labels())
            .cloned()
            .collect()
    }
}

/// Strictly increasing positive exponents `x`; each defines the operating
/// point where the development FMR reaches `10^-x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatingPointGrid {
    exponents: Vec<f64>,
}

impl OperatingPointGrid {
    pub fn new(exponents: Vec<f64>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if let Some(bad) = exponents.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidGrid(format!(
                "exponent {bad} is not a positive finite number"
            )));
        }
        if exponents.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(
                "exponents must be strictly increasing".into(),
            ));
        }
        Ok(Self { exponents })
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.exponents[0], self.exponents[self.exponents.len() - 1])
    }
}

impl FromStr for OperatingPointGrid {
    type Err = Error;

    /// Parses a comma-separated list such as `1,2,3,4,5`.
    fn from_str(s: &str) -> Result<Self> {
        let exponents = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidGrid(format!("'{}' is not a number", t.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(exponents)
    }
}
