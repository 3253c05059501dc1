//! Fairness Discrepancy Rate.
//!
//! At a shared threshold `tau`, `A(tau)` is the largest FMR difference between
//! demographics (homogeneous enrollment/probe pairs only) and `B(tau)` the
//! largest FNMR difference. The discrepancy rate is
//!
//! ```text
//! FDR(tau) = 1 - (alpha * A(tau) + (1 - alpha) * B(tau))
//! ```
//!
//! so 1 means parity. Curves are evaluated over an [`OperatingPointGrid`] and
//! summarised by the area under FDR with the exponent axis rescaled to [0, 1].

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_unit, Error, Result};
use crate::rates::{Calibrator, RateIndex, RateTable, Threshold};
use crate::score::{OperatingPointGrid, SplitDataset};

pub const DEFAULT_ALPHA: f64 = 0.5;

/// Largest pairwise absolute difference, i.e. `max - min`. Zero for a single value.
pub fn max_gap(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut it = values.into_iter();
    let first = it.next()?;
    let (lo, hi) = it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Some(hi - lo)
}

/// `A(tau)`: the widest FMR gap across demographics, homogeneous cells only.
pub fn a_gap(table: &RateTable) -> Result<f64> {
    max_gap(table.homogeneous_fmr().map(|(_, c)| c.rate)).ok_or(Error::NoHomogeneousCells)
}

/// `B(tau)`: the widest FNMR gap across demographics.
pub fn b_gap(table: &RateTable) -> Result<f64> {
    max_gap(table.fnmr.values().map(|c| c.rate)).ok_or(Error::NoGenuineCells)
}

pub fn fdr(a_gap: f64, b_gap: f64, alpha: f64) -> Result<f64> {
    check_unit("A(tau)", a_gap)?;
    check_unit("B(tau)", b_gap)?;
    check_unit("alpha", alpha)?;
    Ok(1.0 - (alpha * a_gap + (1.0 - alpha) * b_gap))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict {
    pub fair: bool,
    pub epsilon: f64,
}

/// Fair iff `fdr_value >= 1 - epsilon`.
pub fn verdict(fdr_value: f64, epsilon: f64) -> Result<Verdict> {
    check_unit("FDR", fdr_value)?;
    check_unit("epsilon", epsilon)?;
    Ok(Verdict {
        fair: fdr_value >= 1.0 - epsilon,
        epsilon,
    })
}

/// One grid point: the threshold, the test-set rate table, and its gaps.
/// Independent of alpha.
#[derive(Debug, Clone)]
pub struct OperatingPoint {
    pub exponent: f64,
    pub table: RateTable,
    pub a_gap: f64,
    pub b_gap: f64,
}

impl OperatingPoint {
    pub fn threshold(&self) -> Threshold {
        self.table.threshold
    }

    pub fn point(&self, alpha: f64) -> Result<FdrPoint> {
        Ok(FdrPoint {
            exponent: self.exponent,
            threshold: self.table.threshold,
            a_gap: self.a_gap,
            b_gap: self.b_gap,
            fdr: fdr(self.a_gap, self.b_gap, alpha)?,
            alpha,
        })
    }
}

/// Calibrates every grid point on the pooled development impostors and
/// builds the test-set rate table at each resulting threshold.
pub fn evaluate_grid(data: &SplitDataset, grid: &OperatingPointGrid) -> Result<Vec<OperatingPoint>> {
    let calibrator = Calibrator::new(data.dev())?;
    let index = RateIndex::new(data.test());
    for label in data.labels_missing_from_dev() {
        log::info!("label '{label}' is evaluated but absent from the development set");
    }
    for label in index.labels() {
        if !index.has_impostor_cell(label, label) {
            log::warn!("no homogeneous impostors for '{label}'; excluded from A(tau)");
        }
    }
    grid.exponents()
        .par_iter()
        .map(|&x| {
            let table = index.table(calibrator.threshold(x));
            Ok(OperatingPoint {
                exponent: x,
                a_gap: a_gap(&table)?,
                b_gap: b_gap(&table)?,
                table,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdrPoint {
    pub exponent: f64,
    pub threshold: Threshold,
    pub a_gap: f64,
    pub b_gap: f64,
    pub fdr: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdrCurve {
    pub points: Vec<FdrPoint>,
    pub alpha: f64,
    /// `None` for single-point grids, where no area is defined.
    pub aufdr: Option<f64>,
    pub exponent_range: (f64, f64),
}

impl FdrCurve {
    pub fn from_points(points: Vec<FdrPoint>, alpha: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::TooFewPoints(0));
        }
        let exponent_range = (points[0].exponent, points[points.len() - 1].exponent);
        let mut curve = Self {
            points,
            alpha,
            aufdr: None,
            exponent_range,
        };
        if curve.points.len() >= 2 {
            curve.aufdr = Some(area_under_fdr(&curve)?);
        }
        Ok(curve)
    }

    pub fn from_operating_points(ops: &[OperatingPoint], alpha: f64) -> Result<Self> {
        let points = ops.iter().map(|op| op.point(alpha)).collect::<Result<Vec<_>>>()?;
        Self::from_points(points, alpha)
    }
}

pub fn fdr_curve(data: &SplitDataset, grid: &OperatingPointGrid, alpha: f64) -> Result<FdrCurve> {
    check_unit("alpha", alpha)?;
    FdrCurve::from_operating_points(&evaluate_grid(data, grid)?, alpha)
}

/// Trapezoidal area under FDR against the exponent, with the exponent axis
/// affinely mapped onto [0, 1].
pub fn area_under_fdr(curve: &FdrCurve) -> Result<f64> {
    let pts = &curve.points;
    if pts.len() < 2 {
        return Err(Error::TooFewPoints(pts.len()));
    }
    let (x0, x1) = (pts[0].exponent, pts[pts.len() - 1].exponent);
    let span = x1 - x0;
    if span <= 0.0 {
        return Err(Error::InvalidGrid("exponents must be strictly increasing".into()));
    }
    let area: f64 = pts
        .windows(2)
        .map(|w| (w[1].exponent - w[0].exponent) / span * (w[0].fdr + w[1].fdr) / 2.0)
        .sum();
    Ok(area.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaRow {
    pub alpha: f64,
    pub aufdr: f64,
}

/// AUFDR for each alpha. Thresholds and gaps are computed once and shared.
pub fn alpha_sweep(
    data: &SplitDataset,
    grid: &OperatingPointGrid,
    alphas: &[f64],
) -> Result<Vec<AlphaRow>> {
    for &a in alphas {
        check_unit("alpha", a)?;
    }
    let ops = evaluate_grid(data, grid)?;
    sweep_operating_points(&ops, alphas)
}

pub fn sweep_operating_points(ops: &[OperatingPoint], alphas: &[f64]) -> Result<Vec<AlphaRow>> {
    alphas
        .iter()
        .map(|&alpha| {
            let curve = FdrCurve::from_operating_points(ops, alpha)?;
            Ok(AlphaRow {
                alpha,
                aufdr: area_under_fdr(&curve)?,
            })
        })
        .collect()
}
