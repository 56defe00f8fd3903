//! Saturations of basic open sets.
//!
//! A saturated open set is stored as a union of open height intervals per strip (each
//! standing for all interior leaves at those heights) together with a set of vertex
//! leaves (arc leaves and boundary leaves).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{GluingId, LeafDescriptor, ModelError, ModelPoint, Side, SideEnd, SideSpec, StripId, StripModel};
use crate::rational::{fmt_q, half, max_q, min_q, q, Q};

/// A leaf that becomes a vertex of the leaf space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VertexLeaf {
    Arc { gluing: GluingId },
    Boundary { end: SideEnd },
}

impl VertexLeaf {
    pub fn leaf(self) -> LeafDescriptor {
        match self {
            VertexLeaf::Arc { gluing } => LeafDescriptor::Arc { gluing },
            VertexLeaf::Boundary { end } => LeafDescriptor::Boundary { strip: end.strip, side: end.side },
        }
    }

    pub fn from_leaf(leaf: &LeafDescriptor) -> Option<VertexLeaf> {
        match leaf {
            LeafDescriptor::Arc { gluing } => Some(VertexLeaf::Arc { gluing: *gluing }),
            LeafDescriptor::Boundary { strip, side } => {
                Some(VertexLeaf::Boundary { end: SideEnd { strip: *strip, side: *side } })
            }
            LeafDescriptor::Interior { .. } => None,
        }
    }

    /// Strip ends the vertex is attached to.
    pub fn ends(self, model: &StripModel) -> Vec<SideEnd> {
        match self {
            VertexLeaf::Arc { gluing } => model.gluings.get(gluing.0).map(|g| g.ends().to_vec()).unwrap_or_default(),
            VertexLeaf::Boundary { end } => vec![end],
        }
    }
}

/// A basic open set of the surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasicBox {
    /// Open rectangle `x × y` inside the open strip.
    Rect { strip: StripId, x: (Q, Q), y: (Q, Q) },
    /// Sub-arc `x` of an arc leaf (first-arc coordinates) plus collars of depth
    /// `collar_a` / `collar_b` on the two glued sides.
    ArcNbhd { gluing: GluingId, x: (Q, Q), collar_a: Q, collar_b: Q },
    /// Half-disc around a boundary segment.
    BoundaryNbhd { end: SideEnd, x: (Q, Q), collar: Q },
}

impl BasicBox {
    pub fn contains(&self, model: &StripModel, pt: &ModelPoint) -> bool {
        let inside = |r: &(Q, Q), v: &Q| &r.0 < v && v < &r.1;
        match (self, pt) {
            (BasicBox::Rect { strip, x, y }, ModelPoint::InStrip { strip: s, x: px, y: py }) => {
                strip == s && inside(x, px) && inside(y, py)
            }
            (BasicBox::ArcNbhd { gluing, x, .. }, ModelPoint::OnArc { gluing: g, x: px }) => gluing == g && inside(x, px),
            (BasicBox::ArcNbhd { gluing, x, collar_a, collar_b }, ModelPoint::InStrip { strip, x: px, y }) => {
                let Ok(g) = model.gluing(*gluing) else { return false };
                let Ok(map) = model.affine_gluing_map(g) else { return false };
                let (b0, b1) = (map.apply(&x.0), map.apply(&x.1));
                let bx = (min_q(&b0, &b1), max_q(&b0, &b1));
                let in_a = g.a.strip == *strip && &g.a.side.depth_of(y) < collar_a && inside(x, px);
                let in_b = g.b.strip == *strip && &g.b.side.depth_of(y) < collar_b && inside(&bx, px);
                in_a || in_b
            }
            (BasicBox::BoundaryNbhd { end, x, .. }, ModelPoint::OnBoundary { strip, side, x: px }) => {
                end.strip == *strip && end.side == *side && inside(x, px)
            }
            (BasicBox::BoundaryNbhd { end, x, collar }, ModelPoint::InStrip { strip, x: px, y }) => {
                end.strip == *strip && &end.side.depth_of(y) < collar && inside(x, px)
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripHeights {
    pub strip: StripId,
    #[serde(with = "crate::rational::q_pairs")]
    pub intervals: Vec<(Q, Q)>,
}

/// Normalized description of a saturated set.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SaturatedSet {
    pub strips: Vec<StripHeights>,
    pub vertices: BTreeSet<VertexLeaf>,
}

fn merge_open(mut intervals: Vec<(Q, Q)>) -> Vec<(Q, Q)> {
    intervals.retain(|(lo, hi)| lo < hi);
    intervals.sort();
    let mut out: Vec<(Q, Q)> = Vec::with_capacity(intervals.len());
    for (lo, hi) in intervals {
        match out.last_mut() {
            // Open intervals sharing only an endpoint stay apart: the endpoint is missing.
            Some(last) if lo < last.1 => {
                if hi > last.1 {
                    last.1 = hi;
                }
            }
            _ => out.push((lo, hi)),
        }
    }
    out
}

impl SaturatedSet {
    pub fn empty() -> Self {
        Self::default()
    }

    fn heights_map(&self) -> BTreeMap<StripId, Vec<(Q, Q)>> {
        self.strips.iter().map(|s| (s.strip, s.intervals.clone())).collect()
    }

    fn from_parts(heights: BTreeMap<StripId, Vec<(Q, Q)>>, vertices: BTreeSet<VertexLeaf>) -> Self {
        let strips = heights
            .into_iter()
            .map(|(strip, iv)| StripHeights { strip, intervals: merge_open(iv) })
            .filter(|s| !s.intervals.is_empty())
            .collect();
        SaturatedSet { strips, vertices }
    }

    pub fn with_heights(mut self, strip: StripId, lo: Q, hi: Q) -> Self {
        let mut map = self.heights_map();
        map.entry(strip).or_default().push((lo, hi));
        self.strips = Self::from_parts(map, BTreeSet::new()).strips;
        self
    }

    pub fn with_vertex(mut self, v: VertexLeaf) -> Self {
        self.vertices.insert(v);
        self
    }

    pub fn union(&self, other: &SaturatedSet) -> SaturatedSet {
        let mut map = self.heights_map();
        for s in &other.strips {
            map.entry(s.strip).or_default().extend(s.intervals.iter().cloned());
        }
        let vertices = self.vertices.union(&other.vertices).copied().collect();
        Self::from_parts(map, vertices)
    }

    pub fn heights(&self, strip: StripId) -> &[(Q, Q)] {
        self.strips.iter().find(|s| s.strip == strip).map(|s| s.intervals.as_slice()).unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.strips.is_empty() && self.vertices.is_empty()
    }

    pub fn contains_leaf(&self, leaf: &LeafDescriptor) -> bool {
        match leaf {
            LeafDescriptor::Interior { strip, y } => self.heights(*strip).iter().any(|(lo, hi)| lo < y && y < hi),
            other => VertexLeaf::from_leaf(other).is_some_and(|v| self.vertices.contains(&v)),
        }
    }

    pub fn contains_point(&self, model: &StripModel, pt: &ModelPoint) -> bool {
        model.leaf_of(pt).is_ok_and(|leaf| self.contains_leaf(&leaf))
    }

    /// Whether the two sets share a leaf.
    pub fn intersects(&self, other: &SaturatedSet) -> bool {
        if self.vertices.intersection(&other.vertices).next().is_some() {
            return true;
        }
        self.strips.iter().any(|s| {
            other.heights(s.strip).iter().any(|(lo2, hi2)| {
                s.intervals.iter().any(|(lo1, hi1)| max_q(lo1, lo2) < min_q(hi1, hi2))
            })
        })
    }

    pub fn is_subset(&self, other: &SaturatedSet) -> bool {
        self.vertices.is_subset(&other.vertices)
            && self.strips.iter().all(|s| {
                s.intervals
                    .iter()
                    .all(|(lo, hi)| other.heights(s.strip).iter().any(|(lo2, hi2)| lo2 <= lo && hi <= hi2))
            })
    }

    /// Largest collar depth next to `end` entirely contained in the set.
    pub fn collar_at(&self, end: SideEnd) -> Option<Q> {
        self.heights(end.strip).iter().find_map(|(lo, hi)| match end.side {
            Side::Top if hi == &q(1) => Some(q(1) - lo),
            Side::Bottom if lo == &q(0) => Some(hi.clone()),
            _ => None,
        })
    }

    /// A basic open box around `pt` whose points all lie in the set, if any.
    pub fn neighborhood_within(&self, model: &StripModel, pt: &ModelPoint) -> Option<BasicBox> {
        if !self.contains_point(model, pt) {
            return None;
        }
        let bx = match pt {
            ModelPoint::InStrip { strip, x, y } => {
                let (lo, hi) = self.heights(*strip).iter().find(|(lo, hi)| lo < y && y < hi)?;
                let delta = min_q(&(y - lo), &(hi - y));
                BasicBox::Rect { strip: *strip, x: (x - q(1), x + q(1)), y: (y - &delta, y + &delta) }
            }
            ModelPoint::OnArc { gluing, x } => {
                let g = model.gluing(*gluing).ok()?;
                let collar_a = self.collar_at(g.a.end())?;
                let collar_b = self.collar_at(g.b.end())?;
                let arc = model.arc(g.a)?;
                let mut lo = x - q(1);
                let mut hi = x + q(1);
                if let Some(a) = arc.lo.finite() {
                    lo = max_q(&lo, &((a + x) * half()));
                }
                if let Some(b) = arc.hi.finite() {
                    hi = min_q(&hi, &((b + x) * half()));
                }
                BasicBox::ArcNbhd { gluing: *gluing, x: (lo, hi), collar_a: min_q(&collar_a, &q(1)), collar_b }
            }
            ModelPoint::OnBoundary { strip, side, x } => {
                let end = SideEnd { strip: *strip, side: *side };
                let collar = self.collar_at(end)?;
                BasicBox::BoundaryNbhd { end, x: (x - q(1), x + q(1)), collar }
            }
        };
        let sat = saturate_basic(model, &bx).ok()?;
        sat.is_subset(self).then_some(bx)
    }

    /// Basic boxes whose saturations union to the set. Vertex leaves are covered with
    /// the collar the set already provides next to them.
    pub fn basic_cover(&self, model: &StripModel) -> Vec<BasicBox> {
        let mut boxes = Vec::new();
        for s in &self.strips {
            for (lo, hi) in &s.intervals {
                boxes.push(BasicBox::Rect { strip: s.strip, x: (q(-1), q(1)), y: (lo.clone(), hi.clone()) });
            }
        }
        for v in &self.vertices {
            let leaf = v.leaf();
            let Ok(interval) = model.leaf_interval(&leaf) else { continue };
            let anchor = interval.anchor();
            let Ok(pt) = model.point_on_leaf(&leaf, anchor) else { continue };
            if let Some(bx) = self.neighborhood_within(model, &pt) {
                boxes.push(bx);
            }
        }
        boxes
    }

    /// Sample points hugging the edges of every piece of the set.
    pub fn edge_samples(&self, model: &StripModel, per_piece: usize) -> Vec<ModelPoint> {
        let mut out = Vec::new();
        for s in &self.strips {
            for (lo, hi) in &s.intervals {
                let width = hi - lo;
                for k in 0..per_piece {
                    let frac = q(1) / crate::rational::pow2(k as u32 + 1);
                    let x = q(k as i64 - (per_piece as i64) / 2);
                    out.push(ModelPoint::InStrip { strip: s.strip, x: x.clone(), y: lo + &width * &frac });
                    out.push(ModelPoint::InStrip { strip: s.strip, x, y: hi - &width * &frac });
                }
            }
        }
        for v in &self.vertices {
            let leaf = v.leaf();
            let Ok(interval) = model.leaf_interval(&leaf) else { continue };
            let anchor = interval.anchor();
            for k in 0..per_piece {
                let step = q(1) - q(1) / crate::rational::pow2(k as u32 + 1);
                for x in [&anchor - &step, &anchor + &step] {
                    if interval.contains(&x) {
                        if let Ok(pt) = model.point_on_leaf(&leaf, x) {
                            out.push(pt);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn describe(&self, model: &StripModel) -> String {
        let mut parts = Vec::new();
        for s in &self.strips {
            for (lo, hi) in &s.intervals {
                parts.push(format!("{}:({},{})", model.strip_name(s.strip), fmt_q(lo), fmt_q(hi)));
            }
        }
        for v in &self.vertices {
            parts.push(model.describe_leaf(&v.leaf()));
        }
        format!("{{{}}}", parts.join(", "))
    }
}

fn check_range(range: &(Q, Q), what: &str) -> Result<(), ModelError> {
    if range.0 < range.1 {
        Ok(())
    } else {
        Err(ModelError::DegenerateBox(format!("{what} ({}, {}) is empty", fmt_q(&range.0), fmt_q(&range.1))))
    }
}

fn check_collar(c: &Q) -> Result<(), ModelError> {
    if c > &q(0) && c <= &q(1) {
        Ok(())
    } else {
        Err(ModelError::DegenerateBox(format!("collar {} not in (0,1]", fmt_q(c))))
    }
}

fn collar_heights(side: Side, depth: &Q) -> (Q, Q) {
    match side {
        Side::Bottom => (q(0), depth.clone()),
        Side::Top => (q(1) - depth, q(1)),
    }
}

/// Saturation of a basic open box: every leaf meeting the box.
pub fn saturate_basic(model: &StripModel, bx: &BasicBox) -> Result<SaturatedSet, ModelError> {
    let mut heights: BTreeMap<StripId, Vec<(Q, Q)>> = BTreeMap::new();
    let mut vertices = BTreeSet::new();
    match bx {
        BasicBox::Rect { strip, x, y } => {
            model.strip(*strip)?;
            check_range(x, "x-range")?;
            check_range(y, "y-range")?;
            if y.0 < q(0) || y.1 > q(1) {
                return Err(ModelError::DegenerateBox("rectangle leaves the strip".into()));
            }
            heights.entry(*strip).or_default().push(y.clone());
        }
        BasicBox::ArcNbhd { gluing, x, collar_a, collar_b } => {
            let g = model.gluing(*gluing)?;
            check_range(x, "sub-arc")?;
            check_collar(collar_a)?;
            check_collar(collar_b)?;
            let arc = model.arc(g.a).ok_or_else(|| ModelError::DegenerateBox("missing arc".into()))?;
            if !(arc.contains(&x.0) || arc.lo == crate::rational::ExtRat::Finite(x.0.clone()))
                || !(arc.contains(&x.1) || arc.hi == crate::rational::ExtRat::Finite(x.1.clone()))
            {
                return Err(ModelError::DegenerateBox(format!("sub-arc leaves the arc {arc}")));
            }
            heights.entry(g.a.strip).or_default().push(collar_heights(g.a.side, collar_a));
            heights.entry(g.b.strip).or_default().push(collar_heights(g.b.side, collar_b));
            vertices.insert(VertexLeaf::Arc { gluing: *gluing });
        }
        BasicBox::BoundaryNbhd { end, x, collar } => {
            if model.side(*end) != Some(&SideSpec::Boundary) {
                return Err(ModelError::DegenerateBox("boundary box on a non-boundary side".into()));
            }
            check_range(x, "x-range")?;
            check_collar(collar)?;
            heights.entry(end.strip).or_default().push(collar_heights(end.side, collar));
            vertices.insert(VertexLeaf::Boundary { end: *end });
        }
    }
    Ok(SaturatedSet::from_parts(heights, vertices))
}

/// Saturation of an arbitrary saturated-set descriptor, via its basic cover.
pub fn saturate_set(model: &StripModel, set: &SaturatedSet) -> Result<SaturatedSet, ModelError> {
    let mut out = SaturatedSet::empty();
    for bx in set.basic_cover(model) {
        out = out.union(&saturate_basic(model, &bx)?);
    }
    Ok(out)
}

impl StripModel {
    pub fn saturate_basic(&self, bx: &BasicBox) -> Result<SaturatedSet, ModelError> {
        saturate_basic(self, bx)
    }

    pub fn saturate_set(&self, set: &SaturatedSet) -> Result<SaturatedSet, ModelError> {
        saturate_set(self, set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::qf;

    #[test]
    fn rectangle_saturates_to_its_heights() {
        let m0 = fixtures::model("M0");
        let bx = BasicBox::Rect { strip: StripId(0), x: (q(0), q(1)), y: (qf(1, 4), qf(1, 2)) };
        let sat = saturate_basic(&m0, &bx).unwrap();
        assert_eq!(sat, SaturatedSet::empty().with_heights(StripId(0), qf(1, 4), qf(1, 2)));
    }

    #[test]
    fn arc_neighborhood_saturation_in_m1() {
        let m1 = fixtures::model("M1");
        let bx = BasicBox::ArcNbhd { gluing: GluingId(0), x: (q(-2), q(-1)), collar_a: qf(1, 8), collar_b: qf(1, 8) };
        let sat = saturate_basic(&m1, &bx).unwrap();
        let expected = SaturatedSet::empty()
            .with_heights(StripId(0), qf(7, 8), q(1))
            .with_heights(StripId(1), q(0), qf(1, 8))
            .with_vertex(VertexLeaf::Arc { gluing: GluingId(0) });
        assert_eq!(sat, expected);
        assert!(!sat.contains_leaf(&LeafDescriptor::Arc { gluing: GluingId(1) }));
    }

    #[test]
    fn interior_rectangle_near_arcs_has_no_vertices() {
        let m1 = fixtures::model("M1");
        let bx = BasicBox::Rect { strip: StripId(0), x: (q(-1), q(1)), y: (qf(7, 8), q(1)) };
        let sat = saturate_basic(&m1, &bx).unwrap();
        assert!(sat.vertices.is_empty());
        assert_eq!(sat.heights(StripId(0)), &[(qf(7, 8), q(1))]);
    }

    #[test]
    fn degenerate_boxes_are_rejected() {
        let m0 = fixtures::model("M0");
        let bx = BasicBox::Rect { strip: StripId(0), x: (q(1), q(1)), y: (qf(1, 4), qf(1, 2)) };
        assert!(matches!(saturate_basic(&m0, &bx), Err(ModelError::DegenerateBox(_))));
        let bx = BasicBox::ArcNbhd { gluing: GluingId(0), x: (q(0), q(1)), collar_a: q(0), collar_b: q(1) };
        assert!(saturate_basic(&m0, &bx).is_err());
    }

    #[test]
    fn merging_keeps_missing_endpoints() {
        let set = SaturatedSet::empty()
            .with_heights(StripId(0), q(0), qf(1, 2))
            .with_heights(StripId(0), qf(1, 2), q(1))
            .with_heights(StripId(0), qf(1, 4), qf(3, 8));
        assert_eq!(set.heights(StripId(0)).len(), 2);
        assert!(!set.contains_leaf(&LeafDescriptor::Interior { strip: StripId(0), y: qf(1, 2) }));
    }

    #[test]
    fn saturation_is_idempotent_on_fixtures() {
        let m1 = fixtures::model("M1");
        let bx = BasicBox::ArcNbhd { gluing: GluingId(1), x: (q(1), q(2)), collar_a: qf(1, 3), collar_b: qf(1, 5) };
        let sat = saturate_basic(&m1, &bx).unwrap();
        assert_eq!(saturate_set(&m1, &sat).unwrap(), sat);
    }

    #[test]
    fn arc_without_collar_is_not_open() {
        let m1 = fixtures::model("M1");
        let set = SaturatedSet::empty().with_vertex(VertexLeaf::Arc { gluing: GluingId(0) });
        let pt = ModelPoint::OnArc { gluing: GluingId(0), x: q(-1) };
        assert!(set.neighborhood_within(&m1, &pt).is_none());
    }
}
