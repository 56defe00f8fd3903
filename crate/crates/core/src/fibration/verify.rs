use std::collections::BTreeSet;

use rayon::prelude::*;

use super::chart::TrivChart;
use super::FibrationError;
use crate::model::{Involution, LeafDescriptor, ModelPoint, StripModel};
use crate::numeric::GridReport;
use crate::rational::{fmt_q, q, qf, ExtRat, Q};

/// Bound used by the exhaustion check.
pub const EXHAUSTION_BOUND: i64 = 1000;
/// Fiber values are sampled on `[-FIBER_SPAN, FIBER_SPAN]`.
pub const FIBER_SPAN: i64 = 10;

/// `n` rational points of `(lo, hi)`, including whichever ends are closed.
pub fn rational_grid(lo: &Q, hi: &Q, n: usize, lo_closed: bool, hi_closed: bool) -> Vec<Q> {
    let n = n.max(2);
    let (skip_lo, skip_hi) = (usize::from(!lo_closed), usize::from(!hi_closed));
    let steps = (n - 1 + skip_lo + skip_hi) as i64;
    (0..n).map(|k| lo + (hi - lo) * qf((k + skip_lo) as i64, steps)).collect()
}

fn fiber_grid(n: usize) -> Vec<Q> {
    rational_grid(&q(-FIBER_SPAN), &q(FIBER_SPAN), n, true, true)
}

fn at(s: &Q, v: &Q) -> String {
    format!("(s={}, v={})", fmt_q(s), fmt_q(v))
}

/// Whether some section of the chart passes beyond `bound` towards the `upper` end of
/// the leaf over `v`. Past a finite end means within `1/bound` of it.
fn exhausts(model: &StripModel, chart: &TrivChart, v: &Q, leaf: &LeafDescriptor, upper: bool) -> bool {
    let Ok(interval) = model.leaf_interval(leaf) else { return false };
    let bound = q(EXHAUSTION_BOUND);
    let beyond = |x: &Q| match (upper, if upper { &interval.hi } else { &interval.lo }) {
        (true, ExtRat::Finite(end)) => end - x < q(1) / &bound,
        (false, ExtRat::Finite(end)) => x - end < q(1) / &bound,
        (true, _) => *x > bound,
        (false, _) => *x < -bound.clone(),
    };
    (0..62).any(|k| {
        [1i64 << k, -(1i64 << k)]
            .iter()
            .any(|i| chart.eval(&q(*i), v).is_ok_and(|pt| beyond(pt.leaf_coordinate())))
    })
}

fn verify_row(model: &StripModel, chart: &TrivChart, v: &Q, fibers: &[Q]) -> (GridReport, Vec<ModelPoint>) {
    let mut r = GridReport::new();
    let mut points = Vec::with_capacity(fibers.len());
    let sat = chart.saturation();
    let leaf = chart.leaf_at(v);
    let mut prev: Option<Q> = None;
    for s in fibers {
        let evaluated = chart.coordinate(s, v).and_then(|c| {
            let pt = chart.base().point(v, &c).ok_or_else(|| FibrationError::OutsideBase(fmt_q(v)))?;
            Ok((pt, c))
        });
        let (pt, c) = match evaluated {
            Ok(found) => {
                r.pass("domain");
                found
            }
            Err(e) => {
                r.fail("domain", at(s, v), e.to_string());
                continue;
            }
        };
        r.record("saturation", sat.contains_point(model, &pt), || at(s, v), || format!("{pt} outside the saturation"));
        let got = model.leaf_of(&pt).ok();
        r.record("leaf", got.is_some() && got == leaf, || at(s, v), || format!("{pt} on {got:?}, expected {leaf:?}"));
        let back = chart.inverse(&pt);
        let ok = matches!(&back, Ok((s2, v2)) if s2 == s && v2 == v);
        r.record("roundtrip", ok, || at(s, v), || format!("inverse gave {back:?}"));
        if let Some(p) = &prev {
            r.record("monotone", *p < c, || at(s, v), || format!("coordinate {} after {}", fmt_q(&c), fmt_q(p)));
        }
        prev = Some(c);
        points.push(pt);
    }
    for i in -20..20 {
        let (a, b) = (chart.level(i, v), chart.level(i + 1, v));
        let ok = matches!((&a, &b), (Some(a), Some(b)) if a < b);
        r.record("monotone", ok, || format!("(i={i}, v={})", fmt_q(v)), || "sections out of order".to_string());
    }
    if let Some(leaf) = &leaf {
        for upper in [false, true] {
            let ok = exhausts(model, chart, v, leaf, upper);
            let end = if upper { "upper" } else { "lower" };
            r.record("exhaustion", ok, || format!("v={}", fmt_q(v)), || format!("{end} end never passed"));
        }
    }
    (r, points)
}

/// Certifies a chart on a `grid × grid` sample of fiber values in `[-10, 10]` and base
/// parameters: images lie in the declared saturation, each row stays on one leaf,
/// `Φ` is injective and strictly increasing along leaves, the inverse round-trips
/// exactly, the sections exhaust every sampled leaf, sample points of the saturation are
/// covered, and the declared saturation matches the saturation of the section image.
pub fn verify_trivialization(model: &StripModel, chart: &TrivChart, grid: usize) -> GridReport {
    let mut report = GridReport::new();
    for check in ["domain", "saturation", "leaf", "injective", "roundtrip", "monotone", "exhaustion", "cover"] {
        report.declare(check);
    }
    let base = chart.base();
    let (lo, hi) = base.v_range();
    let vs = rational_grid(&lo, &hi, grid, base.start_closed(), base.finish_closed());
    let fibers = fiber_grid(grid);
    let rows: Vec<_> = vs.par_iter().map(|v| verify_row(model, chart, v, &fibers)).collect();
    let mut evaluated = 0;
    let mut points = BTreeSet::new();
    for (row, pts) in rows {
        report.merge(row);
        evaluated += pts.len();
        points.extend(pts);
    }

    let leaves: Vec<_> = vs.iter().map(|v| chart.leaf_at(v)).collect();
    let distinct: BTreeSet<_> = leaves.iter().collect();
    report.record(
        "injective",
        distinct.len() == leaves.len(),
        || "base".to_string(),
        || format!("{} base samples on {} leaves", leaves.len(), distinct.len()),
    );
    report.record(
        "injective",
        points.len() == evaluated,
        || "grid".to_string(),
        || format!("{evaluated} samples hit {} points", points.len()),
    );

    for pt in chart.saturation().edge_samples(model, 8) {
        let ok = chart.inverse(&pt).and_then(|(s, v)| chart.eval(&s, &v)).is_ok_and(|p| p == pt);
        report.record("cover", ok, || pt.to_string(), || "not reached by the chart".to_string());
    }

    if let Some(bx) = chart.section_box() {
        let expected = model.saturate_basic(&bx);
        let got = chart.saturation();
        let ok = expected.as_ref().is_ok_and(|e| *e == got);
        report.record(
            "saturation_consistency",
            ok,
            || "section".to_string(),
            || match &expected {
                Ok(e) => format!("declared {} but the section saturates to {}", got.describe(model), e.describe(model)),
                Err(e) => e.to_string(),
            },
        );
    }
    report
}

/// Checks a chart around a seam leaf of a doubled model against the copy swap `σ`:
/// `σ ∘ σ = id` on the image, and `σ ∘ Φ = Φ ∘ ξ` with `ξ(s, v) = (s, −v)`.
pub fn verify_involution(doubled: &StripModel, sigma: &Involution, chart: &TrivChart, grid: usize) -> GridReport {
    let mut report = GridReport::new();
    report.declare("involution");
    report.declare("equivariance");
    let (lo, hi) = chart.v_range();
    let vs = rational_grid(&lo, &hi, grid, false, false);
    let fibers = fiber_grid(grid);
    for v in &vs {
        for s in &fibers {
            let Ok(pt) = chart.eval(s, v) else {
                report.fail("equivariance", at(s, v), "chart undefined");
                continue;
            };
            let swapped = sigma.point(&pt);
            report.record(
                "involution",
                sigma.point(&swapped) == pt && doubled.check_point(&swapped).is_ok(),
                || at(s, v),
                || format!("σσ({pt}) = {}", sigma.point(&swapped)),
            );
            let mirrored = chart.eval(s, &-v.clone());
            report.record(
                "equivariance",
                mirrored.as_ref().is_ok_and(|m| *m == swapped),
                || at(s, v),
                || format!("σ(Φ) = {swapped} but Φ(ξ) = {mirrored:?}"),
            );
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibration::trivialize_leaf_neighborhood;
    use crate::fixtures;
    use crate::model::{GluingId, StripId};
    use crate::rational::half;

    #[test]
    fn grids_hit_the_centre() {
        let g = rational_grid(&qf(-1, 2), &half(), 101, false, false);
        assert_eq!(g.len(), 101);
        assert!(g.contains(&q(0)));
        assert!(!g.contains(&half()));
        let g = rational_grid(&q(0), &half(), 5, true, false);
        assert_eq!(g[0], q(0));
        assert_eq!(g[4], qf(2, 5));
    }

    #[test]
    fn vertex_charts_pass() {
        for (name, g) in [("M0", 0), ("M1", 0), ("M1", 1), ("M2", 2)] {
            let m = fixtures::model(name);
            let chart = trivialize_leaf_neighborhood(&m, &LeafDescriptor::Arc { gluing: GluingId(g) }).unwrap();
            let r = verify_trivialization(&m, &chart, 21);
            assert!(r.passed(), "{name} g{g}: {:?}", r.failures);
            assert!(r.checks.iter().all(|c| c.samples > 0), "{:?}", r.checks);
        }
    }

    #[test]
    fn m1_vertex_chart_misses_the_other_arc() {
        let m1 = fixtures::model("M1");
        let chart = trivialize_leaf_neighborhood(&m1, &LeafDescriptor::Arc { gluing: GluingId(0) }).unwrap();
        let sat = chart.saturation();
        assert!(sat.contains_leaf(&LeafDescriptor::Arc { gluing: GluingId(0) }));
        assert!(!sat.contains_leaf(&LeafDescriptor::Arc { gluing: GluingId(1) }));
        assert!(sat.contains_leaf(&LeafDescriptor::Interior { strip: StripId(0), y: qf(7, 8) }));
    }

    #[test]
    fn seam_charts_commute_with_the_involution() {
        let (doubled, sigma) = fixtures::model("M3").double().unwrap();
        for g in doubled.gluing_ids().filter(|g| sigma.is_seam(*g)) {
            let chart = trivialize_leaf_neighborhood(&doubled, &LeafDescriptor::Arc { gluing: g }).unwrap();
            let r = verify_involution(&doubled, &sigma, &chart, 50);
            assert!(r.passed(), "{:?}", r.failures);
        }
    }

    #[test]
    fn swapped_sections_are_caught() {
        let m0 = fixtures::model("M0");
        let chart = trivialize_leaf_neighborhood(&m0, &LeafDescriptor::Arc { gluing: GluingId(0) }).unwrap();
        let r = verify_trivialization(&m0, &chart.with_swapped_levels(2, 3), 11);
        assert!(r.failures_of("monotone") > 0);
        assert!(!r.passed());
    }
}
