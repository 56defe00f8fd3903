//! Floating-point kernels for the explicit homeomorphisms: graph straightening, chart
//! normalization and concatenation, partition-of-unity gluing, and a grid harness.
//!
//! Charts here map a rectangle `(t, u)` of fiber and base coordinates into a plane
//! whose leaves are the horizontal lines `base = const`, unless the evaluator supplies
//! its own leaf labels.

mod concat;
mod grid;
mod normalize;
mod pou;
mod straighten;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use concat::{concat_charts, ConcatChart, OverlapSpec};
pub use grid::{check_fibered_homeo, grid_points, CheckOutcome, Failure, GridReport, Residual};
pub use normalize::{normalize_chart, FnSection, NormalizedChart, SectionCurve};
pub use pou::{check_pou, pou_glue, GluedFiber, PouPiece, PouSpec};
pub use straighten::{straighten_graphs, straighten_point, straighten_steps, GraphSample, StraightenStep, Straightening};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("invalid graph sample: {0}")]
    InvalidSample(String),
    #[error("target {0} outside the interval")]
    TargetOutsideInterval(f64),
    #[error("point ({t}, {u}) outside the domain")]
    OutsideDomain { t: f64, u: f64 },
    #[error("section not within chart: {0}")]
    SectionOutsideChart(String),
    #[error("overlap empty")]
    OverlapEmpty,
    #[error("seam mismatch: residual {0:e}")]
    SeamMismatch(f64),
    #[error("weight sum deviates from 1 by {0:e}")]
    WeightSum(f64),
    #[error("local piece {0} is not increasing")]
    NonMonotonePiece(usize),
    #[error("inverse failed: {0}")]
    InverseFailed(String),
}

/// A point of the chart codomain: `fiber` runs along leaves, `base` across them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub fiber: f64,
    pub base: f64,
}

impl PlanePoint {
    pub fn new(fiber: f64, base: f64) -> Self {
        PlanePoint { fiber, base }
    }

    pub fn dist(&self, other: &PlanePoint) -> f64 {
        (self.fiber - other.fiber).abs().max((self.base - other.base).abs())
    }
}

/// A closed or open rectangle `T × U` of fiber and base parameters. Infinite ends are
/// allowed; grids then sample a finite window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub t: (f64, f64),
    pub u: (f64, f64),
    pub t_closed: bool,
    pub u_closed: bool,
}

impl Domain {
    pub fn open(t: (f64, f64), u: (f64, f64)) -> Self {
        Domain { t, u, t_closed: false, u_closed: false }
    }

    pub fn closed(t: (f64, f64), u: (f64, f64)) -> Self {
        Domain { t, u, t_closed: true, u_closed: true }
    }

    fn inside(x: f64, (lo, hi): (f64, f64), closed: bool) -> bool {
        if closed {
            lo <= x && x <= hi
        } else {
            lo < x && x < hi
        }
    }

    pub fn contains(&self, t: f64, u: f64) -> bool {
        Self::inside(t, self.t, self.t_closed) && Self::inside(u, self.u, self.u_closed)
    }

    pub fn check(&self, t: f64, u: f64) -> Result<(), NumericError> {
        if self.contains(t, u) {
            Ok(())
        } else {
            Err(NumericError::OutsideDomain { t, u })
        }
    }
}

/// An evaluable fibered embedding `(t, u) ↦ point`.
pub trait EmbeddingEvaluator: Send + Sync {
    fn domain(&self) -> Domain;

    fn eval(&self, t: f64, u: f64) -> Result<PlanePoint, NumericError>;

    fn inverse(&self, p: PlanePoint) -> Result<(f64, f64), NumericError>;

    /// Whether both fiber ends of a closed domain are fixed pointwise.
    fn fixed_fiber_ends(&self) -> bool {
        false
    }

    /// The leaf containing an image point, when the codomain has its own leaves.
    fn leaf_label(&self, _p: &PlanePoint) -> Option<String> {
        None
    }
}

impl<E: EmbeddingEvaluator + ?Sized> EmbeddingEvaluator for Arc<E> {
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn eval(&self, t: f64, u: f64) -> Result<PlanePoint, NumericError> {
        (**self).eval(t, u)
    }
    fn inverse(&self, p: PlanePoint) -> Result<(f64, f64), NumericError> {
        (**self).inverse(p)
    }
    fn fixed_fiber_ends(&self) -> bool {
        (**self).fixed_fiber_ends()
    }
    fn leaf_label(&self, p: &PlanePoint) -> Option<String> {
        (**self).leaf_label(p)
    }
}

impl<E: EmbeddingEvaluator + ?Sized> EmbeddingEvaluator for Box<E> {
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn eval(&self, t: f64, u: f64) -> Result<PlanePoint, NumericError> {
        (**self).eval(t, u)
    }
    fn inverse(&self, p: PlanePoint) -> Result<(f64, f64), NumericError> {
        (**self).inverse(p)
    }
    fn fixed_fiber_ends(&self) -> bool {
        (**self).fixed_fiber_ends()
    }
    fn leaf_label(&self, p: &PlanePoint) -> Option<String> {
        (**self).leaf_label(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityChart {
    pub domain: Domain,
}

impl IdentityChart {
    pub fn new(domain: Domain) -> Self {
        IdentityChart { domain }
    }
}

impl EmbeddingEvaluator for IdentityChart {
    fn domain(&self) -> Domain {
        self.domain
    }

    fn eval(&self, t: f64, u: f64) -> Result<PlanePoint, NumericError> {
        self.domain.check(t, u)?;
        Ok(PlanePoint::new(t, u))
    }

    fn inverse(&self, p: PlanePoint) -> Result<(f64, f64), NumericError> {
        self.domain.check(p.fiber, p.base)?;
        Ok((p.fiber, p.base))
    }

    fn fixed_fiber_ends(&self) -> bool {
        self.domain.t_closed
    }
}

type PointFn = dyn Fn(f64, f64) -> PlanePoint + Send + Sync;
type InverseFn = dyn Fn(PlanePoint) -> Option<(f64, f64)> + Send + Sync;
type LabelFn = dyn Fn(&PlanePoint) -> String + Send + Sync;

/// A chart given by closures.
#[derive(Clone)]
pub struct FnChart {
    domain: Domain,
    forward: Arc<PointFn>,
    backward: Arc<InverseFn>,
    label: Option<Arc<LabelFn>>,
    fixed_ends: bool,
}

impl FnChart {
    pub fn new(
        domain: Domain,
        forward: impl Fn(f64, f64) -> PlanePoint + Send + Sync + 'static,
        backward: impl Fn(PlanePoint) -> Option<(f64, f64)> + Send + Sync + 'static,
    ) -> Self {
        FnChart { domain, forward: Arc::new(forward), backward: Arc::new(backward), label: None, fixed_ends: false }
    }

    pub fn with_leaf_labels(mut self, label: impl Fn(&PlanePoint) -> String + Send + Sync + 'static) -> Self {
        self.label = Some(Arc::new(label));
        self
    }

    pub fn with_fixed_ends(mut self) -> Self {
        self.fixed_ends = true;
        self
    }
}

impl std::fmt::Debug for FnChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnChart").field("domain", &self.domain).finish_non_exhaustive()
    }
}

impl EmbeddingEvaluator for FnChart {
    fn domain(&self) -> Domain {
        self.domain
    }

    fn eval(&self, t: f64, u: f64) -> Result<PlanePoint, NumericError> {
        self.domain.check(t, u)?;
        Ok((self.forward)(t, u))
    }

    fn inverse(&self, p: PlanePoint) -> Result<(f64, f64), NumericError> {
        (self.backward)(p).ok_or_else(|| NumericError::InverseFailed(format!("({}, {})", p.fiber, p.base)))
    }

    fn fixed_fiber_ends(&self) -> bool {
        self.fixed_ends
    }

    fn leaf_label(&self, p: &PlanePoint) -> Option<String> {
        self.label.as_ref().map(|l| l(p))
    }
}

/// Bisection for the root of an increasing function on `[lo, hi]`.
pub(crate) fn bisect(mut lo: f64, mut hi: f64, target: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domains() {
        let d = Domain::open((0.0, 1.0), (f64::NEG_INFINITY, f64::INFINITY));
        assert!(d.contains(0.5, -1e9));
        assert!(!d.contains(0.0, 0.0));
        assert!(Domain::closed((0.0, 1.0), (0.0, 1.0)).contains(0.0, 1.0));
    }

    #[test]
    fn bisection_finds_roots() {
        let r = bisect(0.0, 2.0, 2.0, |x| x * x);
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn fn_chart_round_trip() {
        let c = FnChart::new(Domain::open((-1.0, 1.0), (-1.0, 1.0)), |t, u| PlanePoint::new(t + u, u), |p| {
            Some((p.fiber - p.base, p.base))
        });
        let p = c.eval(0.25, 0.5).unwrap();
        assert_eq!(c.inverse(p).unwrap(), (0.25, 0.5));
        assert!(c.eval(2.0, 0.0).is_err());
        assert!(c.leaf_label(&p).is_none());
    }
}
