use std::sync::Arc;

use super::straighten::straighten_steps;
use super::{bisect, Domain, EmbeddingEvaluator, NumericError, PlanePoint};

/// A transversal curve `x ↦ γ(x)` over an open base interval `W`, in chart codomain
/// coordinates.
pub trait SectionCurve: Send + Sync {
    fn base(&self) -> (f64, f64);
    fn point(&self, x: f64) -> PlanePoint;
}

type CurveFn = dyn Fn(f64) -> PlanePoint + Send + Sync;

#[derive(Clone)]
pub struct FnSection {
    base: (f64, f64),
    f: Arc<CurveFn>,
}

impl FnSection {
    pub fn new(base: (f64, f64), f: impl Fn(f64) -> PlanePoint + Send + Sync + 'static) -> Self {
        FnSection { base, f: Arc::new(f) }
    }
}

impl SectionCurve for FnSection {
    fn base(&self) -> (f64, f64) {
        self.base
    }
    fn point(&self, x: f64) -> PlanePoint {
        (self.f)(x)
    }
}

/// The chart `φ(t, x) = chart(H_x(t), σ_w(x))` where `(σ_t, σ_w) = chart⁻¹ ∘ γ` and
/// `H_x` is the straightening homeomorphism of the window taking `c` to `σ_t(x)`.
/// Hence `φ(c, x) = γ(x)`, and `φ` agrees with the relabelled chart off the window.
pub struct NormalizedChart<C, S> {
    chart: C,
    section: S,
    level: f64,
    window: (f64, f64),
    increasing: bool,
}

fn unit(x: f64, (lo, hi): (f64, f64)) -> f64 {
    (x - lo) / (hi - lo)
}

fn from_unit(r: f64, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * r
}

impl<C: EmbeddingEvaluator, S: SectionCurve> NormalizedChart<C, S> {
    fn pulled_back(&self, x: f64) -> Result<(f64, f64), NumericError> {
        let (st, sw) = self
            .chart
            .inverse(self.section.point(x))
            .map_err(|e| NumericError::SectionOutsideChart(format!("section at x = {x}: {e}")))?;
        let (lo, hi) = self.window;
        if !(lo < st && st < hi) {
            return Err(NumericError::SectionOutsideChart(format!("section level {st} at x = {x} outside ({lo}, {hi})")));
        }
        Ok((st, sw))
    }

    /// `H_x` on the window, or its inverse.
    fn window_map(&self, t: f64, level: f64, forward: bool) -> f64 {
        let (lo, hi) = self.window;
        if t <= lo || t >= hi {
            return t;
        }
        if forward && t == self.level {
            return level;
        }
        if !forward && t == level {
            return self.level;
        }
        let steps = straighten_steps(&[unit(level, self.window)], &[unit(self.level, self.window)]);
        let r = unit(t, self.window);
        let out = if forward { steps[0].backward(r) } else { steps[0].forward(r) };
        from_unit(out, self.window)
    }

    pub fn section(&self) -> &S {
        &self.section
    }

    pub fn level(&self) -> f64 {
        self.level
    }
}

/// Normalizes `chart` so that its level `c` runs through the section `γ`. Straightening
/// happens inside `window` (the whole fiber interval of the chart when `None`, which must
/// then be finite).
pub fn normalize_chart<C: EmbeddingEvaluator, S: SectionCurve>(
    section: S,
    c: f64,
    chart: C,
    window: Option<(f64, f64)>,
) -> Result<NormalizedChart<C, S>, NumericError> {
    let domain = chart.domain();
    let window = window.unwrap_or(domain.t);
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && domain.t.0 <= lo && hi <= domain.t.1 && lo < c && c < hi) {
        return Err(NumericError::SectionOutsideChart(format!(
            "level {c} and window ({lo}, {hi}) must sit inside the fiber interval ({}, {})",
            domain.t.0, domain.t.1
        )));
    }
    let (w0, w1) = section.base();
    if !(w0.is_finite() && w1.is_finite() && w0 < w1) {
        return Err(NumericError::SectionOutsideChart("section base must be a finite interval".into()));
    }
    let mut out = NormalizedChart { chart, section, level: c, window, increasing: true };
    let xs = super::grid_points((w0, w1), 101, false);
    let ws = xs.iter().map(|&x| out.pulled_back(x).map(|p| p.1)).collect::<Result<Vec<_>, _>>()?;
    let up = ws.windows(2).all(|w| w[0] < w[1]);
    let down = ws.windows(2).all(|w| w[0] > w[1]);
    if !(up || down) {
        return Err(NumericError::SectionOutsideChart("section is not transverse: base coordinate not monotone".into()));
    }
    out.increasing = up;
    Ok(out)
}

impl<C: EmbeddingEvaluator, S: SectionCurve> EmbeddingEvaluator for NormalizedChart<C, S> {
    fn domain(&self) -> Domain {
        let t = self.chart.domain();
        Domain { t: t.t, u: self.section.base(), t_closed: t.t_closed, u_closed: false }
    }

    fn eval(&self, t: f64, x: f64) -> Result<PlanePoint, NumericError> {
        self.domain().check(t, x)?;
        let (st, sw) = self.pulled_back(x)?;
        self.chart.eval(self.window_map(t, st, true), sw)
    }

    fn inverse(&self, p: PlanePoint) -> Result<(f64, f64), NumericError> {
        let (tau, w) = self.chart.inverse(p)?;
        let (w0, w1) = self.section.base();
        let sign = if self.increasing { 1.0 } else { -1.0 };
        let base_of = |x: f64| self.pulled_back(x).map(|s| sign * s.1).unwrap_or(f64::NAN);
        let x = bisect(w0, w1, sign * w, base_of);
        let (st, sw) = self.pulled_back(x)?;
        if (sw - w).abs() > 1e-9 * (1.0 + w.abs()) {
            return Err(NumericError::InverseFailed(format!("base value {w} not reached by the section")));
        }
        Ok((self.window_map(tau, st, false), x))
    }

    fn leaf_label(&self, p: &PlanePoint) -> Option<String> {
        self.chart.leaf_label(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{check_fibered_homeo, IdentityChart};

    fn plane() -> IdentityChart {
        IdentityChart::new(Domain::open((-1.0, 1.0), (-1.0, 1.0)))
    }

    #[test]
    fn constant_section_gives_identity() {
        let phi = normalize_chart(FnSection::new((-0.5, 0.5), |x| PlanePoint::new(0.25, x)), 0.25, plane(), None).unwrap();
        for &(t, x) in &[(-0.9, -0.4), (0.0, 0.1), (0.25, 0.3), (0.7, 0.0)] {
            assert_eq!(phi.eval(t, x).unwrap(), PlanePoint::new(t, x));
        }
    }

    #[test]
    fn parabola_is_straightened() {
        let phi = normalize_chart(FnSection::new((-0.5, 0.5), |x| PlanePoint::new(x * x, x)), 0.0, plane(), None).unwrap();
        for i in 0..101 {
            let x = -0.5 + (i as f64 + 0.5) / 101.0;
            let g = PlanePoint::new(x * x, x);
            assert!(phi.eval(0.0, x).unwrap().dist(&g) < 1e-12);
            let (t, back) = phi.inverse(g).unwrap();
            assert!(t.abs() < 1e-9 && (back - x).abs() < 1e-9, "{t} {back} {x}");
        }
        // property (iii): the section passes through (c, 0)
        for i in 0..21 {
            let t = -0.95 + 0.09 * i as f64;
            assert_eq!(phi.eval(t, 0.0).unwrap(), PlanePoint::new(t, 0.0));
        }
        assert!(check_fibered_homeo(&phi, 41, 1e-9).passed());
    }

    #[test]
    fn section_outside_chart_is_rejected() {
        let r = normalize_chart(FnSection::new((-0.5, 0.5), |x| PlanePoint::new(2.0, x)), 0.0, plane(), None);
        assert!(matches!(r, Err(NumericError::SectionOutsideChart(_))));
    }
}
