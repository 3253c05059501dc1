//! Invariant checks shared by the proptest suite and the acceptance runner.
//! Each returns a description of the first violation.

use fdrkit::fdr::{a_gap, b_gap, evaluate_grid, fdr, FdrCurve};
use fdrkit::rates::{calibrate_threshold, det_points, rate_table, Calibrator, RateIndex, Threshold};
use fdrkit::synthetic::{generate, preset};
use fdrkit::{OperatingPointGrid, RateTable, ScoreSet, SplitDataset};

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// FDR lies in [0, 1], equals 1 - a at alpha 1 and 1 - b at alpha 0, and is
/// linear in between.
pub fn check_fdr_formula(a: f64, b: f64, alpha: f64) -> Result<(), String> {
    let v = fdr(a, b, alpha).map_err(|e| e.to_string())?;
    ensure((0.0..=1.0).contains(&v), || format!("fdr({a},{b},{alpha}) = {v}"))?;
    let hi = fdr(a, b, 1.0).map_err(|e| e.to_string())?;
    let lo = fdr(a, b, 0.0).map_err(|e| e.to_string())?;
    ensure(hi == 1.0 - a && lo == 1.0 - b, || format!("endpoints {hi} {lo} for a={a} b={b}"))?;
    let mixed = alpha * hi + (1.0 - alpha) * lo;
    ensure((v - mixed).abs() <= 1e-12, || format!("fdr({a},{b},{alpha}) = {v}, linear {mixed}"))
}

/// FDR of the rate table at tau lies in [0, 1] for several alphas.
pub fn check_fdr_of_set(set: &ScoreSet, tau: f64) -> Result<(), String> {
    let table = rate_table(set, Threshold::fixed(tau));
    let a = a_gap(&table).map_err(|e| e.to_string())?;
    let b = b_gap(&table).map_err(|e| e.to_string())?;
    for alpha in [0.0, 0.5, 1.0] {
        let v = fdr(a, b, alpha).map_err(|e| e.to_string())?;
        ensure((0.0..=1.0).contains(&v), || format!("fdr {v} at tau {tau}"))?;
    }
    Ok(())
}

/// Every FMR cell is non-increasing and every FNMR cell non-decreasing as
/// tau rises across the score range.
pub fn check_rate_monotonicity(set: &ScoreSet) -> Result<(), String> {
    let index = RateIndex::new(set);
    let mut prev: Option<RateTable> = None;
    for k in -10..=10 {
        let tau = k as f64 / 4.0;
        let table = index.table(Threshold::fixed(tau));
        if let Some(p) = &prev {
            for (key, cell) in &table.fmr {
                ensure(cell.rate <= p.fmr[key].rate, || format!("fmr {key:?} rose at {tau}"))?;
            }
            for (key, cell) in &table.fnmr {
                ensure(cell.rate >= p.fnmr[key].rate, || format!("fnmr {key} fell at {tau}"))?;
            }
        }
        prev = Some(table);
    }
    Ok(())
}

fn dev_fmr(set: &ScoreSet, tau: f64) -> f64 {
    let imp: Vec<f64> = set.impostor_scores();
    imp.iter().filter(|&&s| s >= tau).count() as f64 / imp.len() as f64
}

/// Thresholds rise with x, and each one achieves FMR <= 10^-x on the set it
/// was calibrated on.
pub fn check_calibration(set: &ScoreSet) -> Result<(), String> {
    let cal = Calibrator::new(set).map_err(|e| e.to_string())?;
    let mut prev = f64::NEG_INFINITY;
    for k in 0..=12 {
        let x = k as f64 / 4.0;
        let t = cal.threshold(x);
        ensure(t.tau >= prev, || format!("x={x} tau={} below {prev}", t.tau))?;
        prev = t.tau;
        let achieved = dev_fmr(set, t.tau);
        ensure(achieved <= t.target_fmr() + 1e-15, || format!("x={x} fmr={achieved}"))?;
        ensure(achieved == t.achieved_dev_fmr, || format!("x={x} reported {}", t.achieved_dev_fmr))?;
        let direct = calibrate_threshold(set, x).map_err(|e| e.to_string())?;
        ensure(t == direct, || format!("x={x} calibrator {t:?} vs direct {direct:?}"))?;
    }
    Ok(())
}

fn det_pairs(set: &ScoreSet, d: &fdrkit::DemographicLabel) -> Option<Vec<(f64, f64)>> {
    det_points(set, d)
        .ok()
        .map(|v| v.into_iter().map(|p| (p.fmr, p.fnmr)).collect())
}

/// Applying s * scale + shift to one demographic leaves every per-demographic
/// DET curve unchanged.
pub fn check_det_invariance(set: &ScoreSet, scale: f64, shift: f64) -> Result<(), String> {
    let demo = set.labels().iter().next().unwrap().clone();
    let moved = set
        .map_scores_for(&demo, |s| s * scale + shift)
        .map_err(|e| e.to_string())?;
    for d in set.labels() {
        ensure(det_pairs(set, d) == det_pairs(&moved, d), || {
            format!("DET of {d} changed under {scale}s{shift:+}")
        })?;
    }
    Ok(())
}

fn shifted(data: &SplitDataset, demo: &str, f: impl Fn(f64) -> f64 + Copy) -> SplitDataset {
    let d = super::label(demo);
    SplitDataset::new(
        data.dev().map_scores_for(&d, f).unwrap(),
        data.test().map_scores_for(&d, f).unwrap(),
    )
    .unwrap()
}

/// Lowers one demographic's scores in a fair dataset. Every per-demographic
/// DET curve stays identical while FDR at the shared thresholds drops below
/// the fair value at each grid point, and by more than 0.05 at the strictest.
/// Returns the two FDR curves on success.
pub fn check_det_pitfall() -> Result<(Vec<f64>, Vec<f64>), String> {
    let mut spec = preset("fair3").unwrap();
    for p in spec.per_demo.values_mut() {
        p.n_impostor = 100_000;
        p.n_genuine = 10_000;
    }
    let fair = generate(&spec).map_err(|e| e.to_string())?;
    let unfair = shifted(&fair, "2", |s| s - 1.5);
    for d in fair.test().labels() {
        ensure(det_pairs(fair.test(), d) == det_pairs(unfair.test(), d), || {
            format!("DET of {d} changed")
        })?;
    }
    let grid = OperatingPointGrid::new(vec![2.0, 3.0, 4.0]).unwrap();
    let curve = |data: &SplitDataset| -> Result<Vec<f64>, String> {
        let ops = evaluate_grid(data, &grid).map_err(|e| e.to_string())?;
        let c = FdrCurve::from_operating_points(&ops, 0.5).map_err(|e| e.to_string())?;
        Ok(c.points.iter().map(|p| p.fdr).collect())
    };
    let (f, u) = (curve(&fair)?, curve(&unfair)?);
    ensure(f.iter().all(|&v| v >= 0.99), || format!("fair curve {f:?}"))?;
    ensure(f.iter().zip(&u).all(|(a, b)| b < a), || format!("fair {f:?} unfair {u:?}"))?;
    ensure(u[u.len() - 1] < f[f.len() - 1] - 0.05, || format!("fair {f:?} unfair {u:?}"))?;
    Ok((f, u))
}
