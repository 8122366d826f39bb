use std::fmt::Write as _;

use serde_json::json;

use crate::error::{invalid, Result};
use crate::scalar::Real;
use crate::solver::{NormRow, Trajectory};

/// One tabulated value.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub t: f64,
    pub quantity: String,
    pub value: f64,
}

/// One verdict with the metric it was decided on.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub label: String,
    pub pass: bool,
    pub metric: f64,
}

/// Rows, verdicts and the tolerance they were judged with.
#[derive(Clone, Debug, PartialEq)]
pub struct NormReport {
    pub name: String,
    pub rows: Vec<ReportRow>,
    pub checks: Vec<Check>,
    pub tolerance: f64,
}

impl NormReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Worst metric across checks.
    pub fn metric(&self) -> f64 {
        self.checks.iter().map(|c| c.metric).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `PASS name metric=… tol=…` in one line.
    pub fn verdict(&self) -> String {
        format!(
            "{} {} metric={:e} tol={:e}",
            if self.pass() { "PASS" } else { "FAIL" },
            self.name,
            self.metric(),
            self.tolerance
        )
    }

    pub fn verdict_json(&self) -> serde_json::Value {
        json!({
            "check": self.name,
            "pass": self.pass(),
            "metric": self.metric(),
            "tolerance": self.tolerance,
            "details": self.checks.iter().map(|c| json!({"label": c.label, "pass": c.pass, "metric": c.metric})).collect::<Vec<_>>(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,quantity,value\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{}", r.t, r.quantity, r.value);
        }
        s
    }
}

fn p_label(p: f64) -> String {
    if p.is_infinite() {
        "Linf".into()
    } else {
        format!("L{p}")
    }
}

/// Monotonicity of each `L^p` column with slack `1e-6·‖θ₀‖_p`.
///
/// The metric is the largest increase between consecutive rows in units of
/// `‖θ₀‖_p`. Only the table is read, so the verdict does not depend on how
/// the snapshots were labelled.
pub fn max_principle_check(norms: &[NormRow], p_list: &[f64]) -> NormReport {
    const SLACK: f64 = 1e-6;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &p in p_list {
        let label = p_label(p);
        let Some(n0) = norms.first().and_then(|r| r.norm(p)) else {
            checks.push(Check { label, pass: norms.is_empty(), metric: 0.0 });
            continue;
        };
        let mut worst = 0.0f64;
        for w in norms.windows(2) {
            let (a, b) = (w[0].norm(p).unwrap_or(0.0), w[1].norm(p).unwrap_or(0.0));
            let scale = if n0 > 0.0 { n0 } else { 1.0 };
            worst = worst.max((b - a) / scale);
        }
        for r in norms {
            rows.push(ReportRow { t: r.t, quantity: label.clone(), value: r.norm(p).unwrap_or(f64::NAN) });
        }
        checks.push(Check { label, pass: worst <= SLACK, metric: worst });
    }
    NormReport { name: "max_principle".into(), rows, checks, tolerance: SLACK }
}

/// `−1e-6 ≤ θ ≤ M + 1e-6` at every snapshot, given `0 ≤ θ₀ ≤ M`.
pub fn positivity_check<T: Real>(traj: &Trajectory<T>, m: f64) -> Result<NormReport> {
    const SLACK: f64 = 1e-6;
    let first = traj.initial();
    let (lo, hi) = (first.min().as_f64(), first.max().as_f64());
    if lo < -1e-12 || hi > m + 1e-12 {
        return invalid(format!("initial datum spans [{lo}, {hi}], outside [0, {m}]"));
    }
    let mut rows = Vec::new();
    let mut under = 0.0f64;
    let mut over = 0.0f64;
    for s in &traj.snapshots {
        let t = s.time.unwrap_or(T::zero()).as_f64();
        let (a, b) = (s.min().as_f64(), s.max().as_f64());
        rows.push(ReportRow { t, quantity: "min".into(), value: a });
        rows.push(ReportRow { t, quantity: "max".into(), value: b });
        under = under.max(-a);
        over = over.max(b - m);
    }
    Ok(NormReport {
        name: "positivity".into(),
        rows,
        checks: vec![
            Check { label: "min".into(), pass: under <= SLACK, metric: under },
            Check { label: "max".into(), pass: over <= SLACK, metric: over },
        ],
        tolerance: SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64, v: f64) -> NormRow {
        NormRow { t, l1: v, l2: v, l4: v, linf: v, boundary_mass: 0.0, picard_iters: 0 }
    }

    #[test]
    fn monotone_tables_pass_and_perturbed_fail() {
        let good = vec![row(0.0, 1.0), row(0.1, 0.9), row(0.2, 0.9 + 5e-7)];
        let ps = [1.0, 2.0, 4.0, f64::INFINITY];
        let r = max_principle_check(&good, &ps);
        assert!(r.pass(), "{}", r.verdict());
        assert!(r.verdict().starts_with("PASS max_principle"));
        let bad = vec![row(0.0, 1.0), row(0.1, 0.9), row(0.2, 0.95)];
        assert!(!max_principle_check(&bad, &ps).pass());
        let zero = vec![row(0.0, 0.0), row(0.1, 0.0)];
        assert!(max_principle_check(&zero, &ps).pass());
        assert_eq!(r.to_csv().lines().count(), 1 + 3 * 4);
    }
}
