use std::sync::Arc;

use super::normalize::{normalize_chart, NormalizedChart, SectionCurve};
use super::{grid_points, Domain, EmbeddingEvaluator, NumericError, PlanePoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapSpec {
    /// Fiber value `b` where the charts are joined.
    pub seam: f64,
    /// Half-width `δ` of the window around the seam where the lower chart is adjusted.
    pub half_width: f64,
    pub tol: f64,
}

impl OverlapSpec {
    pub fn new(seam: f64, half_width: f64) -> Self {
        OverlapSpec { seam, half_width, tol: super::DEFAULT_TOL }
    }
}

/// The seam curve `u ↦ φ₂(b, u)`.
pub struct SeamCurve<C> {
    chart: Arc<C>,
    seam: f64,
}

impl<C: EmbeddingEvaluator> SectionCurve for SeamCurve<C> {
    fn base(&self) -> (f64, f64) {
        self.chart.domain().u
    }

    fn point(&self, u: f64) -> PlanePoint {
        self.chart.eval(self.seam, u).unwrap_or(PlanePoint::new(f64::NAN, f64::NAN))
    }
}

/// `φ̄₁` below the seam and `φ₂` above it.
pub struct ConcatChart<C1, C2> {
    lower: NormalizedChart<C1, SeamCurve<C2>>,
    upper: Arc<C2>,
    seam: f64,
    domain: Domain,
}

/// Joins `lower` and `upper` along the fiber direction at `spec.seam`. The lower chart is
/// normalized so that its seam level runs through `upper(seam, ·)`, with the adjustment
/// confined to the window `seam ± half_width`.
pub fn concat_charts<C1: EmbeddingEvaluator, C2: EmbeddingEvaluator>(
    lower: C1,
    upper: C2,
    spec: OverlapSpec,
) -> Result<ConcatChart<C1, C2>, NumericError> {
    let (d1, d2) = (lower.domain(), upper.domain());
    let b = spec.seam;
    let (lo, hi) = (b - spec.half_width, b + spec.half_width);
    if !(spec.half_width > 0.0 && d1.t.0 <= lo && hi <= d1.t.1 && d2.t.0 < b && b < d2.t.1) {
        return Err(NumericError::OverlapEmpty);
    }
    let upper = Arc::new(upper);
    let curve = SeamCurve { chart: Arc::clone(&upper), seam: b };
    let lower = normalize_chart(curve, b, lower, Some((lo, hi))).map_err(|e| match e {
        NumericError::SectionOutsideChart(_) | NumericError::InverseFailed(_) => NumericError::OverlapEmpty,
        other => other,
    })?;
    let domain = Domain { t: (d1.t.0, d2.t.1), u: d2.u, t_closed: false, u_closed: d2.u_closed };
    let out = ConcatChart { lower, upper, seam: b, domain };
    let mut worst: f64 = 0.0;
    for u in grid_points(d2.u, 101, d2.u_closed) {
        let below = out.lower.eval(b, u)?;
        let above = out.upper.eval(b, u)?;
        worst = worst.max(below.dist(&above));
    }
    if worst > spec.tol {
        return Err(NumericError::SeamMismatch(worst));
    }
    Ok(out)
}

impl<C1: EmbeddingEvaluator, C2: EmbeddingEvaluator> EmbeddingEvaluator for ConcatChart<C1, C2> {
    fn domain(&self) -> Domain {
        self.domain
    }

    fn eval(&self, t: f64, u: f64) -> Result<PlanePoint, NumericError> {
        self.domain.check(t, u)?;
        if t <= self.seam {
            self.lower.eval(t, u)
        } else {
            self.upper.eval(t, u)
        }
    }

    fn inverse(&self, p: PlanePoint) -> Result<(f64, f64), NumericError> {
        if let Ok((t, u)) = self.upper.inverse(p) {
            if t >= self.seam && self.domain.contains(t, u) {
                return Ok((t, u));
            }
        }
        let (t, u) = self.lower.inverse(p)?;
        if t <= self.seam {
            Ok((t, u))
        } else {
            Err(NumericError::InverseFailed(format!("({}, {}) not in the concatenated image", p.fiber, p.base)))
        }
    }

    fn leaf_label(&self, p: &PlanePoint) -> Option<String> {
        self.upper.leaf_label(p).or_else(|| self.lower.leaf_label(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{check_fibered_homeo, FnChart, IdentityChart};

    fn slab(t: (f64, f64)) -> IdentityChart {
        IdentityChart::new(Domain::open(t, (-1.0, 1.0)))
    }

    #[test]
    fn identity_slabs_concatenate_to_identity() {
        let phi = concat_charts(slab((-2.0, 1.0)), slab((0.0, 3.0)), OverlapSpec::new(0.5, 0.25)).unwrap();
        for &(t, u) in &[(-1.5, 0.2), (0.5, -0.3), (0.6, 0.9), (2.9, 0.0)] {
            assert_eq!(phi.eval(t, u).unwrap(), PlanePoint::new(t, u));
        }
        assert!(check_fibered_homeo(&phi, 41, 1e-9).passed());
    }

    #[test]
    fn disjoint_slabs_have_empty_overlap() {
        let r = concat_charts(slab((-2.0, 0.0)), slab((1.0, 3.0)), OverlapSpec::new(0.5, 0.25));
        assert!(matches!(r, Err(NumericError::OverlapEmpty)));
    }

    #[test]
    fn sheared_upper_chart_joins_continuously() {
        let upper = FnChart::new(
            Domain::open((0.0, 3.0), (-0.5, 0.5)),
            |t, u| PlanePoint::new(t + 0.2 * u.sin(), u),
            |p| Some((p.fiber - 0.2 * p.base.sin(), p.base)),
        );
        let phi = concat_charts(slab((-2.0, 1.0)), upper, OverlapSpec::new(0.5, 0.25)).unwrap();
        let report = check_fibered_homeo(&phi, 61, 1e-9);
        assert!(report.passed(), "{}", report.summary());
    }
}
