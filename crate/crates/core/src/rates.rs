//! False match / false non-match rates, operating-point calibration, per
//! demographic-pair rate tables and DET sweeps.
//!
//! A comparison is accepted iff `score >= tau`; ties at the threshold count as
//! matches (a tied impostor is a false match, a tied genuine is not a false
//! non-match).

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::score::{ComparisonRecord, DemographicLabel, ScoreKind, ScoreSet};

#[inline]
pub fn accepts(score: f64, tau: f64) -> bool {
    score >= tau
}

/// A decision threshold obtained from a development impostor distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    /// Score units. `+inf` when `degenerate` (every comparison is rejected).
    pub tau: f64,
    pub target_exponent: f64,
    pub achieved_dev_fmr: f64,
    /// The target FMR `10^-x` is finer than one impostor in the calibration
    /// set, so no observed score satisfies it.
    pub degenerate: bool,
}

impl Threshold {
    /// The FMR target `10^-x`.
    pub fn target_fmr(&self) -> f64 {
        10f64.powf(-self.target_exponent)
    }

    /// A threshold not tied to any calibration run, e.g. one supplied by the user.
    pub fn fixed(tau: f64) -> Self {
        Self {
            tau,
            target_exponent: f64::NAN,
            achieved_dev_fmr: f64::NAN,
            degenerate: false,
        }
    }
}

/// Sorted pooled impostor scores, reusable across operating points.
#[derive(Debug, Clone)]
pub struct Calibrator {
    sorted: Vec<f64>,
}

impl Calibrator {
    /// Pools impostor scores across all demographics.
    pub fn new(calibration: &ScoreSet) -> Result<Self> {
        Self::from_scores(calibration.impostor_scores())
    }

    pub fn from_scores(mut scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::NoImpostors);
        }
        scores.par_sort_unstable_by(f64::total_cmp);
        Ok(Self { sorted: scores })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Smallest observed impostor score `s` with `#{scores >= s} / N <= 10^-x`.
    ///
    /// The comparison is carried out as `count * 10^x <= N`, which is exact for
    /// integral exponents.
    pub fn threshold(&self, x: f64) -> Threshold {
        let n = self.sorted.len();
        let scale = 10f64.powf(x);
        let within = |count: usize| (count as f64) * scale <= n as f64;

        // First index whose suffix is short enough, ignoring ties.
        let mut lo = 0;
        let mut hi = n;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if within(n - mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        // A candidate tied with a rejected predecessor would admit that
        // predecessor as well; move to the next distinct value.
        let idx = if lo > 0 && lo < n {
            let prev = self.sorted[lo - 1];
            self.sorted.partition_point(|&s| s <= prev)
        } else {
            lo
        };

        if idx >= n {
            return Threshold {
                tau: f64::INFINITY,
                target_exponent: x,
                achieved_dev_fmr: 0.0,
                degenerate: true,
            };
        }
        let tau = self.sorted[idx];
        let accepted = n - self.sorted.partition_point(|&s| s < tau);
        Threshold {
            tau,
            target_exponent: x,
            achieved_dev_fmr: accepted as f64 / n as f64,
            degenerate: false,
        }
    }
}

/// Calibrates `tau` on the pooled impostors of `calibration` so that the
/// development FMR does not exceed `10^-x`.
pub fn calibrate_threshold(calibration: &ScoreSet, x: f64) -> Result<Threshold> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::InvalidGrid(format!("exponent {x} must be >= 0")));
    }
    Ok(Calibrator::new(calibration)?.threshold(x))
}

fn rate_over<'a>(
    records: impl IntoIterator<Item = &'a ComparisonRecord>,
    expected: ScoreKind,
    what: &str,
    is_error: impl Fn(f64) -> bool,
) -> Result<f64> {
    let mut total = 0usize;
    let mut errors = 0usize;
    for r in records {
        if r.kind() != expected {
            return Err(Error::InvalidRecord(format!(
                "{what} expects {} records only",
                expected.as_str()
            )));
        }
        total += 1;
        if is_error(r.score()) {
            errors += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyCell(what.to_owned()));
    }
    Ok(errors as f64 / total as f64)
}

/// Fraction of impostor comparisons accepted at `tau`.
pub fn fmr<'a>(records: impl IntoIterator<Item = &'a ComparisonRecord>, tau: f64) -> Result<f64> {
    rate_over(records, ScoreKind::Impostor, "FMR", |s| accepts(s, tau))
}

/// Fraction of genuine comparisons rejected at `tau`.
pub fn fnmr<'a>(records: impl IntoIterator<Item = &'a ComparisonRecord>, tau: f64) -> Result<f64> {
    rate_over(records, ScoreKind::Genuine, "FNMR", |s| !accepts(s, tau))
}

/// A rate with the counts behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateCell {
    pub rate: f64,
    pub errors: usize,
    pub total: usize,
}

impl RateCell {
    fn new(errors: usize, total: usize) -> Self {
        Self {
            rate: errors as f64 / total as f64,
            errors,
            total,
        }
    }
}

pub type PairKey = (DemographicLabel, DemographicLabel);

/// Per-pair FMR and per-demographic FNMR at one threshold. Cells with no data
/// are absent rather than zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub threshold: Threshold,
    pub labels: Vec<DemographicLabel>,
    pub fmr: BTreeMap<PairKey, RateCell>,
    pub fnmr: BTreeMap<DemographicLabel, RateCell>,
}

impl RateTable {
    pub fn fmr_cell(&self, enroll: &DemographicLabel, probe: &DemographicLabel) -> Option<&RateCell> {
        self.fmr.get(&(enroll.clone(), probe.clone()))
    }

    pub fn fnmr_cell(&self, demo: &DemographicLabel) -> Option<&RateCell> {
        self.fnmr.get(demo)
    }

    /// FMR cells where enrollment and probe share a demographic.
    pub fn homogeneous_fmr(&self) -> impl Iterator<Item = (&DemographicLabel, &RateCell)> {
        self.fmr
            .iter()
            .filter(|((e, p), _)| e == p)
            .map(|((e, _), c)| (e, c))
    }

    pub fn impostor_count(&self) -> usize {
        self.fmr.values().map(|c| c.total).sum()
    }

    pub fn genuine_count(&self) -> usize {
        self.fnmr.values().map(|c| c.total).sum()
    }
}

/// Count of sorted scores at or above `tau`.
fn count_at_or_above(sorted: &[f64], tau: f64) -> usize {
    sorted.len() - sorted.partition_point(|&s| s < tau)
}

/// Scores of one partition grouped by cell and sorted, so that rate tables at
/// many thresholds cost a binary search per cell.
#[derive(Debug, Clone)]
pub struct RateIndex {
    labels: Vec<DemographicLabel>,
    impostor: BTreeMap<PairKey, Vec<f64>>,
    genuine: BTreeMap<DemographicLabel, Vec<f64>>,
}

impl RateIndex {
    pub fn new(set: &ScoreSet) -> Self {
        let mut impostor: BTreeMap<PairKey, Vec<f64>> = BTreeMap::new();
        let mut genuine: BTreeMap<DemographicLabel, Vec<f64>> = BTreeMap::new();
        for r in set.records() {
            match r.kind() {
                ScoreKind::Impostor => impostor
                    .entry((r.enroll_demo().clone(), r.probe_demo().clone()))
                    .or_default()
                    .push(r.score()),
                ScoreKind::Genuine => genuine
                    .entry(r.enroll_demo().clone())
                    .or_default()
                    .push(r.score()),
            }
        }
        impostor
            .values_mut()
            .chain(genuine.values_mut())
            .collect::<Vec<_>>()
            .into_par_iter()
            .for_each(|v| v.sort_unstable_by(f64::total_cmp));
        Self {
            labels: set.labels().iter().cloned().collect(),
            impostor,
            genuine,
        }
    }

    pub fn labels(&self) -> &[DemographicLabel] {
        &self.labels
    }

    pub fn has_impostor_cell(&self, enroll: &DemographicLabel, probe: &DemographicLabel) -> bool {
        self.impostor.contains_key(&(enroll.clone(), probe.clone()))
    }

    pub fn table(&self, threshold: Threshold) -> RateTable {
        let tau = threshold.tau;
        let fmr = self
            .impostor
            .iter()
            .map(|(k, v)| (k.clone(), RateCell::new(count_at_or_above(v, tau), v.len())))
            .collect();
        let fnmr = self
            .genuine
            .iter()
            .map(|(k, v)| {
                let accepted = count_at_or_above(v, tau);
                (k.clone(), RateCell::new(v.len() - accepted, v.len()))
            })
            .collect();
        RateTable {
            threshold,
            labels: self.labels.clone(),
            fmr,
            fnmr,
        }
    }

    /// Homogeneous impostor and genuine scores of one demographic.
    fn demographic(&self, demo: &DemographicLabel) -> Result<(&[f64], &[f64])> {
        let imp = self
            .impostor
            .get(&(demo.clone(), demo.clone()))
            .ok_or_else(|| Error::EmptyCell(format!("{demo}-{demo} impostors")))?;
        let gen = self
            .genuine
            .get(demo)
            .ok_or_else(|| Error::EmptyCell(format!("{demo} genuine")))?;
        Ok((imp, gen))
    }

    pub fn det_points(&self, demo: &DemographicLabel) -> Result<Vec<DetPoint>> {
        let (imp, gen) = self.demographic(demo)?;
        let taus: BTreeSet<u64> = imp
            .iter()
            .chain(gen)
            .map(|s| ordered_bits(*s))
            .collect();
        Ok(taus
            .into_iter()
            .map(|bits| {
                let tau = from_ordered_bits(bits);
                DetPoint {
                    tau,
                    fmr: count_at_or_above(imp, tau) as f64 / imp.len() as f64,
                    fnmr: (gen.len() - count_at_or_above(gen, tau)) as f64 / gen.len() as f64,
                }
            })
            .collect())
    }
}

// Total-order-preserving bit mapping, so f64 can be a BTreeSet key.
fn ordered_bits(x: f64) -> u64 {
    let b = (x + 0.0).to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

fn from_ordered_bits(b: u64) -> f64 {
    if b >> 63 == 1 {
        f64::from_bits(b & !(1 << 63))
    } else {
        f64::from_bits(!b)
    }
}

/// Per-pair FMR and per-demographic FNMR of `test` at `threshold`.
pub fn rate_table(test: &ScoreSet, threshold: Threshold) -> RateTable {
    RateIndex::new(test).table(threshold)
}

/// One point of a DET sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetPoint {
    pub tau: f64,
    pub fmr: f64,
    pub fnmr: f64,
}

/// Sweeps `tau` over the distinct scores of `demo`'s homogeneous impostor and
/// genuine comparisons, in increasing order.
///
/// Each demographic is swept against its own scores, so the curve is
/// unchanged by any strictly increasing transform of that demographic's
/// scores. Comparing such curves across demographics therefore hides
/// disparities that a shared threshold exposes.
pub fn det_points(test: &ScoreSet, demo: &DemographicLabel) -> Result<Vec<DetPoint>> {
    RateIndex::new(test).det_points(demo)
}
