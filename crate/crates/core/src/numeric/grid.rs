use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EmbeddingEvaluator, PlanePoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub samples: usize,
    pub failed: usize,
    pub worst_residual: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub check: String,
    pub at: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub check: String,
    pub t: f64,
    pub u: f64,
    pub value: f64,
}

/// Outcome of a grid verification. Only the first few failures of each check are kept;
/// the per-check counters are complete.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub checks: Vec<CheckOutcome>,
    pub failures: Vec<Failure>,
    #[serde(skip)]
    pub residuals: Vec<Residual>,
}

const KEPT_FAILURES: usize = 20;

impl GridReport {
    pub fn new() -> Self {
        GridReport::default()
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.checks.iter().all(CheckOutcome::passed)
    }

    fn outcome(&mut self, check: &str) -> &mut CheckOutcome {
        if let Some(i) = self.checks.iter().position(|c| c.name == check) {
            return &mut self.checks[i];
        }
        self.checks.push(CheckOutcome { name: check.to_string(), samples: 0, failed: 0, worst_residual: 0.0 });
        self.checks.last_mut().expect("just pushed")
    }

    /// Registers a check with no samples yet, so it shows up even if nothing is recorded.
    pub fn declare(&mut self, check: &str) {
        self.outcome(check);
    }

    pub fn pass(&mut self, check: &str) {
        self.outcome(check).samples += 1;
    }

    pub fn fail(&mut self, check: &str, at: impl Into<String>, detail: impl Into<String>) {
        let o = self.outcome(check);
        o.samples += 1;
        o.failed += 1;
        if o.failed <= KEPT_FAILURES {
            self.failures.push(Failure { check: check.to_string(), at: at.into(), detail: detail.into() });
        }
    }

    pub fn record(&mut self, check: &str, ok: bool, at: impl FnOnce() -> String, detail: impl FnOnce() -> String) {
        if ok {
            self.pass(check);
        } else {
            self.fail(check, at(), detail());
        }
    }

    /// Records a residual against a tolerance.
    pub fn residual(&mut self, check: &str, t: f64, u: f64, value: f64, tol: f64) {
        let ok = value <= tol;
        {
            let o = self.outcome(check);
            if value.is_finite() && value > o.worst_residual {
                o.worst_residual = value;
            }
        }
        self.residuals.push(Residual { check: check.to_string(), t, u, value });
        self.record(check, ok, || format!("({t}, {u})"), || format!("residual {value:e} > {tol:e}"));
    }

    pub fn merge(&mut self, other: GridReport) {
        for c in other.checks {
            let o = self.outcome(&c.name);
            let kept = o.failed.min(KEPT_FAILURES);
            o.samples += c.samples;
            o.failed += c.failed;
            o.worst_residual = o.worst_residual.max(c.worst_residual);
            let room = KEPT_FAILURES - kept;
            self.failures.extend(other.failures.iter().filter(|f| f.check == c.name).take(room).cloned());
        }
        self.residuals.extend(other.residuals);
    }

    /// Prefixes every check name, for reports that aggregate several charts.
    pub fn prefixed(mut self, prefix: &str) -> GridReport {
        for c in &mut self.checks {
            c.name = format!("{prefix}{}", c.name);
        }
        for f in &mut self.failures {
            f.check = format!("{prefix}{}", f.check);
        }
        for r in &mut self.residuals {
            r.check = format!("{prefix}{}", r.check);
        }
        self
    }

    pub fn failures_of(&self, check: &str) -> usize {
        self.checks.iter().filter(|c| c.name == check || c.name.ends_with(&format!("/{check}"))).map(|c| c.failed).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Residual samples as CSV with header `check,t,u,value`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.residuals {
            w.serialize(r).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:<28} {:>8} samples {:>6} failed  worst {:.3e}\n",
                c.name, c.samples, c.failed, c.worst_residual
            ));
        }
        out
    }
}

/// `n` sample points of an interval: inclusive of finite ends when `closed`, strictly
/// interior otherwise. Infinite ends are replaced by a window of width 20.
pub fn grid_points((lo, hi): (f64, f64), n: usize, closed: bool) -> Vec<f64> {
    let (lo, hi, closed) = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo, hi, closed),
        (true, false) => (lo, lo + 20.0, closed),
        (false, true) => (hi - 20.0, hi, closed),
        (false, false) => (-10.0, 10.0, true),
    };
    let n = n.max(2);
    (0..n)
        .map(|k| {
            if closed {
                if k == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            } else {
                lo + (hi - lo) * (k + 1) as f64 / (n + 1) as f64
            }
        })
        .collect()
}

struct LineResult {
    report: GridReport,
    points: Vec<(usize, PlanePoint)>,
    label: Option<String>,
}

fn check_line<E: EmbeddingEvaluator + ?Sized>(e: &E, ts: &[f64], u: f64, tol: f64) -> LineResult {
    let mut report = GridReport::new();
    let domain = e.domain();
    let mut points = Vec::with_capacity(ts.len());
    let mut prev: Option<(f64, PlanePoint)> = None;
    let mut label: Option<String> = None;
    for (k, &t) in ts.iter().enumerate() {
        let p = match e.eval(t, u) {
            Ok(p) => p,
            Err(err) => {
                report.fail("domain", format!("({t}, {u})"), err.to_string());
                continue;
            }
        };
        report.pass("domain");
        points.push((k, p));

        if let Some((pt, pp)) = prev {
            report.record(
                "monotone",
                p.fiber > pp.fiber,
                || format!("({pt}, {u})..({t}, {u})"),
                || format!("fiber coordinate {} then {}", pp.fiber, p.fiber),
            );
        }

        match (e.leaf_label(&p), &label) {
            (Some(l), None) => label = Some(l),
            (Some(l), Some(first)) => {
                report.record("leaf", &l == first, || format!("({t}, {u})"), || format!("leaf {l} but line starts on {first}"))
            }
            (None, _) => {
                let base0 = points[0].1.base;
                let r = (p.base - base0).abs();
                report.residual("leaf", t, u, r, tol);
            }
        }

        match e.inverse(p) {
            Ok((bt, bu)) => {
                let r = (bt - t).abs().max((bu - u).abs());
                report.residual("roundtrip", t, u, r, tol);
            }
            Err(err) => report.fail("roundtrip", format!("({t}, {u})"), err.to_string()),
        }
        prev = Some((t, p));
    }

    if e.fixed_fiber_ends() && domain.t_closed {
        for end in [domain.t.0, domain.t.1] {
            match e.eval(end, u) {
                Ok(p) => report.residual("fixed_ends", end, u, p.dist(&PlanePoint::new(end, u)), tol),
                Err(err) => report.fail("fixed_ends", format!("({end}, {u})"), err.to_string()),
            }
        }
    }
    LineResult { report, points, label }
}

/// Grid verification of a fibered embedding: strict monotonicity along fibers,
/// injectivity, fixed fiber ends where declared, inverse round trip within `tol`, and
/// leaf preservation.
pub fn check_fibered_homeo<E: EmbeddingEvaluator + ?Sized>(e: &E, grid: usize, tol: f64) -> GridReport {
    let domain = e.domain();
    let ts = grid_points(domain.t, grid, domain.t_closed);
    let us = grid_points(domain.u, grid, domain.u_closed);
    let lines: Vec<LineResult> = us.par_iter().map(|&u| check_line(e, &ts, u, tol)).collect();

    let mut report = GridReport::new();
    for name in ["domain", "monotone", "injective", "roundtrip", "leaf"] {
        report.declare(name);
    }
    let mut image: Vec<(PlanePoint, usize, usize)> = Vec::new();
    let mut labels: BTreeMap<String, usize> = BTreeMap::new();
    for (j, line) in lines.into_iter().enumerate() {
        image.extend(line.points.iter().map(|(k, p)| (*p, j, *k)));
        if let Some(l) = line.label {
            if let Some(&other) = labels.get(&l) {
                report.fail("leaf", format!("u = {} and u = {}", us[other], us[j]), format!("both lines lie on {l}"));
            } else {
                labels.insert(l, j);
            }
        }
        report.merge(line.report);
    }

    image.sort_by(|a, b| a.0.base.total_cmp(&b.0.base).then(a.0.fiber.total_cmp(&b.0.fiber)));
    for i in 0..image.len() {
        let (p, j, k) = image[i];
        let mut ok = true;
        for &(q, j2, k2) in image[i + 1..].iter().take_while(|(q, _, _)| q.base - p.base <= tol) {
            if (q.fiber - p.fiber).abs() <= tol && (j, k) != (j2, k2) {
                ok = false;
                report.fail(
                    "injective",
                    format!("({}, {}) and ({}, {})", ts[k], us[j], ts[k2], us[j2]),
                    format!("images coincide near ({}, {})", p.fiber, p.base),
                );
            }
        }
        if ok {
            report.pass("injective");
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{Domain, FnChart, IdentityChart};

    #[test]
    fn grids() {
        assert_eq!(grid_points((0.0, 1.0), 3, true), vec![0.0, 0.5, 1.0]);
        assert_eq!(grid_points((0.0, 1.0), 3, false), vec![0.25, 0.5, 0.75]);
        assert_eq!(grid_points((f64::NEG_INFINITY, 0.0), 2, false).len(), 2);
    }

    #[test]
    fn identity_passes_with_zero_residuals() {
        let r = check_fibered_homeo(&IdentityChart::new(Domain::closed((0.0, 1.0), (0.0, 1.0))), 51, 1e-9);
        assert!(r.passed(), "{}", r.summary());
        assert!(r.checks.iter().all(|c| c.worst_residual == 0.0));
        assert_eq!(r.checks.iter().find(|c| c.name == "injective").unwrap().samples, 51 * 51);
    }

    #[test]
    fn planted_jump_is_caught() {
        let jump = |t: f64| if t < 0.5 { t } else { t - 0.3 };
        let c = FnChart::new(Domain::closed((0.0, 1.0), (0.0, 1.0)), move |t, u| PlanePoint::new(jump(t), u), |p| {
            Some((p.fiber, p.base))
        });
        let r = check_fibered_homeo(&c, 21, 1e-9);
        assert!(!r.passed());
        assert!(r.failures_of("monotone") > 0);
        assert!(r.failures_of("injective") > 0);
    }

    #[test]
    fn csv_and_json_exports() {
        let r = check_fibered_homeo(&IdentityChart::new(Domain::closed((0.0, 1.0), (0.0, 1.0))), 3, 1e-9);
        let csv = r.to_csv();
        assert!(csv.starts_with("check,t,u,value\n"));
        let back: GridReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back.checks, r.checks);
    }
}
