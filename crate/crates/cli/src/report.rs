//! Evaluation report: per-grid-point rate tables in enroll-probe layout, the
//! FDR row, AUFDR and verdicts. The text table is rendered from the same
//! strings the JSON carries.

use std::collections::BTreeSet;

use fdrkit::fdr::{verdict, FdrCurve, OperatingPoint};
use fdrkit::Result;
use serde::Serialize;

use crate::format::{self, csv_field, Num};

#[derive(Debug, Clone, Serialize)]
pub struct FnmrRow {
    pub demo: String,
    pub errors: usize,
    pub total: usize,
    pub rate: Num,
}

#[derive(Debug, Clone, Serialize)]
pub struct FmrRow {
    pub enroll: String,
    pub probe: String,
    pub errors: usize,
    pub total: usize,
    pub rate: Num,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub fair: bool,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointReport {
    pub exponent: f64,
    pub label: String,
    pub target_fmr: f64,
    pub tau: Num,
    pub achieved_dev_fmr: f64,
    pub degenerate: bool,
    pub fnmr: Vec<FnmrRow>,
    pub fmr: Vec<FmrRow>,
    pub a_gap: Num,
    pub b_gap: Num,
    pub fdr: Num,
    pub verdict: Option<VerdictReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AreaReport {
    pub value: Num,
    pub exponent_range: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub system: Option<String>,
    pub alpha: f64,
    pub epsilon: Option<f64>,
    pub grid: Vec<f64>,
    pub points: Vec<PointReport>,
    pub aufdr: Option<AreaReport>,
}

impl EvaluationReport {
    pub fn build(
        system: Option<String>,
        ops: &[OperatingPoint],
        alpha: f64,
        epsilon: Option<f64>,
    ) -> Result<Self> {
        let curve = FdrCurve::from_operating_points(ops, alpha)?;
        let mut points = Vec::with_capacity(ops.len());
        for (op, p) in ops.iter().zip(&curve.points) {
            let t = op.threshold();
            points.push(PointReport {
                exponent: op.exponent,
                label: format::exponent(op.exponent),
                target_fmr: t.target_fmr(),
                tau: Num::score(t.tau),
                achieved_dev_fmr: t.achieved_dev_fmr,
                degenerate: t.degenerate,
                fnmr: op
                    .table
                    .fnmr
                    .iter()
                    .map(|(d, c)| FnmrRow {
                        demo: d.to_string(),
                        errors: c.errors,
                        total: c.total,
                        rate: Num::rate(c.rate),
                    })
                    .collect(),
                fmr: op
                    .table
                    .fmr
                    .iter()
                    .map(|((e, pr), c)| FmrRow {
                        enroll: e.to_string(),
                        probe: pr.to_string(),
                        errors: c.errors,
                        total: c.total,
                        rate: Num::rate(c.rate),
                    })
                    .collect(),
                a_gap: Num::rate(op.a_gap),
                b_gap: Num::rate(op.b_gap),
                fdr: Num::fdr(p.fdr),
                verdict: epsilon
                    .map(|eps| verdict(p.fdr, eps))
                    .transpose()?
                    .map(|v| VerdictReport {
                        fair: v.fair,
                        epsilon: v.epsilon,
                    }),
            });
        }
        Ok(Self {
            system,
            alpha,
            epsilon,
            grid: ops.iter().map(|o| o.exponent).collect(),
            points,
            aufdr: curve.aufdr.map(|a| AreaReport {
                value: Num::fdr(a),
                exponent_range: [curve.exponent_range.0, curve.exponent_range.1],
            }),
        })
    }

    pub fn all_degenerate(&self) -> bool {
        self.points.iter().all(|p| p.degenerate)
    }

    pub fn fdr_texts(&self) -> Vec<&str> {
        self.points.iter().map(|p| p.fdr.text.as_str()).collect()
    }

    /// Fixed-width text table: one column per grid point.
    pub fn render(&self) -> String {
        let mut header = vec![String::new()];
        header.extend(self.points.iter().map(|p| format!("FMR={}", p.label)));

        let mut rows: Vec<Vec<String>> = Vec::new();
        let mut row = |name: String, cell: &dyn Fn(&PointReport) -> String| {
            let mut r = vec![name];
            r.extend(self.points.iter().map(cell));
            rows.push(r);
        };
        row("tau".into(), &|p| p.tau.text.clone());

        let demos: BTreeSet<&str> = self
            .points
            .iter()
            .flat_map(|p| p.fnmr.iter().map(|r| r.demo.as_str()))
            .collect();
        for d in &demos {
            row(format!("FNMR(tau) {d}"), &|p| {
                p.fnmr
                    .iter()
                    .find(|r| r.demo == *d)
                    .map_or("-".into(), |r| r.rate.text.clone())
            });
        }
        let pairs: BTreeSet<(&str, &str)> = self
            .points
            .iter()
            .flat_map(|p| p.fmr.iter().map(|r| (r.enroll.as_str(), r.probe.as_str())))
            .collect();
        for (e, pr) in &pairs {
            row(format!("FMR(tau) {e}-{pr}"), &|p| {
                p.fmr
                    .iter()
                    .find(|r| r.enroll == *e && r.probe == *pr)
                    .map_or("-".into(), |r| r.rate.text.clone())
            });
        }
        row("A(tau)".into(), &|p| p.a_gap.text.clone());
        row("B(tau)".into(), &|p| p.b_gap.text.clone());
        row("FDR(tau)".into(), &|p| p.fdr.text.clone());
        if self.epsilon.is_some() {
            row("fair".into(), &|p| match &p.verdict {
                Some(v) if v.fair => "yes".into(),
                Some(_) => "no".into(),
                None => "-".into(),
            });
        }

        let mut out = String::new();
        if let Some(s) = &self.system {
            out.push_str(&format!("system: {s}\n"));
        }
        out.push_str(&format!("alpha: {}\n", self.alpha));
        if let Some(e) = self.epsilon {
            out.push_str(&format!("epsilon: {e} (fair iff FDR >= 1 - {e})\n"));
        }
        out.push('\n');
        out.push_str(&format::table(&header, &rows));
        out.push('\n');
        match &self.aufdr {
            Some(a) => out.push_str(&format!(
                "AUFDR over x in [{}, {}]: {}\n",
                a.exponent_range[0], a.exponent_range[1], a.value.text
            )),
            None => out.push_str("AUFDR: undefined for a single grid point\n"),
        }
        let degenerate: Vec<&str> = self
            .points
            .iter()
            .filter(|p| p.degenerate)
            .map(|p| p.label.as_str())
            .collect();
        if !degenerate.is_empty() {
            out.push_str(&format!(
                "reject-all thresholds (target finer than the dev impostor count): {}\n",
                degenerate.join(", ")
            ));
        }
        out
    }

    /// Long-form rate rows: exponent,tau,rate,enroll,probe,errors,total,value.
    pub fn rates_csv(&self) -> String {
        let mut out = String::from("exponent,tau,rate,enroll,probe,errors,total,value\n");
        for p in &self.points {
            for r in &p.fnmr {
                out.push_str(&format!(
                    "{},{},fnmr,{},{},{},{},{}\n",
                    p.exponent,
                    p.tau.value,
                    csv_field(&r.demo),
                    csv_field(&r.demo),
                    r.errors,
                    r.total,
                    r.rate.value
                ));
            }
            for r in &p.fmr {
                out.push_str(&format!(
                    "{},{},fmr,{},{},{},{},{}\n",
                    p.exponent,
                    p.tau.value,
                    csv_field(&r.enroll),
                    csv_field(&r.probe),
                    r.errors,
                    r.total,
                    r.rate.value
                ));
            }
        }
        out
    }

    /// exponent,tau,a_gap,b_gap,fdr
    pub fn fdr_csv(&self) -> String {
        let mut out = String::from("exponent,tau,a_gap,b_gap,fdr\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.exponent, p.tau.value, p.a_gap.value, p.b_gap.value, p.fdr.value
            ));
        }
        out
    }
}
