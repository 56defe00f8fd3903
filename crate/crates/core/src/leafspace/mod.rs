//! The leaf space `Y = X/𝒫` of a striped model as a finite non-Hausdorff 1-manifold.
//!
//! Every strip contributes an open edge `(0,1)` (its interior leaves, by height), every
//! arc leaf and boundary leaf contributes a vertex attached at the strip ends it lies
//! on. Two vertices are non-separated exactly when they share an attached strip end.

mod export;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    is_properly_embedded, BasicBox, GluingId, LeafDescriptor, ModelError, ModelPoint, SaturatedSet, Side, SideEnd,
    SideSpec, StripId, StripModel, VertexLeaf,
};
use crate::rational::{fmt_q, half, max_q, min_q, pow2, q, Q};

pub use export::{export_graph, ExportFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub strip: StripId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub label: String,
    pub leaf: VertexLeaf,
    pub ends: Vec<SideEnd>,
}

/// The vertices hosted by one strip end, in the order of their arcs along the side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    pub end: SideEnd,
    pub vertices: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafSpaceGraph {
    pub edges: Vec<Edge>,
    pub vertices: Vec<Vertex>,
    pub attachments: Vec<Attachment>,
    /// Unordered non-separated pairs, stored with the smaller id first.
    pub nonseparated: Vec<(VertexId, VertexId)>,
}

/// A point of the leaf space.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum YPoint {
    Edge { strip: StripId, height: Q },
    Vertex(VertexId),
}

impl fmt::Display for YPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YPoint::Edge { strip, height } => write!(f, "e{}@{}", strip.0, fmt_q(height)),
            YPoint::Vertex(v) => write!(f, "v{}", v.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LeafSpaceError {
    #[error("unknown point {0}")]
    UnknownPoint(String),
    #[error("the two leaves coincide")]
    SameLeaf,
    #[error("unknown export format `{0}`")]
    UnknownFormat(String),
    #[error("malformed graph json: {0}")]
    Json(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn build_leaf_space(model: &StripModel) -> LeafSpaceGraph {
    let edges = model.strip_ids().map(|strip| Edge { strip, name: model.strip_name(strip).to_string() }).collect();
    let vertices: Vec<Vertex> = model
        .vertex_leaves()
        .into_iter()
        .filter_map(|leaf| VertexLeaf::from_leaf(&leaf))
        .map(|v| {
            let label = match v {
                VertexLeaf::Arc { gluing } => format!("g{}", gluing.0),
                VertexLeaf::Boundary { end } => format!("{}.{}", model.strip_name(end.strip), end.side),
            };
            Vertex { label, leaf: v, ends: v.ends(model) }
        })
        .collect();
    let vertex_of = |leaf: VertexLeaf| vertices.iter().position(|v| v.leaf == leaf).map(VertexId);

    let mut attachments = Vec::new();
    for strip in model.strip_ids() {
        for side in Side::BOTH {
            let end = SideEnd { strip, side };
            let hosted: Vec<VertexId> = match model.side(end) {
                Some(SideSpec::Boundary) => vertex_of(VertexLeaf::Boundary { end }).into_iter().collect(),
                Some(SideSpec::Glued(_)) => model
                    .gluings_on(end)
                    .into_iter()
                    .filter_map(|gluing| vertex_of(VertexLeaf::Arc { gluing }))
                    .collect(),
                _ => Vec::new(),
            };
            attachments.push(Attachment { end, vertices: hosted });
        }
    }

    let mut pairs = BTreeSet::new();
    for att in &attachments {
        for (i, a) in att.vertices.iter().enumerate() {
            for b in &att.vertices[i + 1..] {
                if a != b {
                    pairs.insert((*a.min(b), *a.max(b)));
                }
            }
        }
    }
    LeafSpaceGraph { edges, vertices, attachments, nonseparated: pairs.into_iter().collect() }
}

impl LeafSpaceGraph {
    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.vertices.get(id.0)
    }

    pub fn vertex_of_leaf(&self, leaf: &LeafDescriptor) -> Option<VertexId> {
        let v = VertexLeaf::from_leaf(leaf)?;
        self.vertices.iter().position(|x| x.leaf == v).map(VertexId)
    }

    pub fn vertex_by_label(&self, label: &str) -> Option<VertexId> {
        self.vertices.iter().position(|v| v.label == label).map(VertexId)
    }

    pub fn are_nonseparated(&self, a: VertexId, b: VertexId) -> bool {
        a != b && self.nonseparated.contains(&(a.min(b), a.max(b)))
    }

    pub fn attached(&self, end: SideEnd) -> &[VertexId] {
        self.attachments.iter().find(|a| a.end == end).map(|a| a.vertices.as_slice()).unwrap_or(&[])
    }

    /// The projection `p` of a leaf.
    pub fn project(&self, leaf: &LeafDescriptor) -> Option<YPoint> {
        match leaf {
            LeafDescriptor::Interior { strip, y } => {
                (strip.0 < self.edges.len()).then(|| YPoint::Edge { strip: *strip, height: y.clone() })
            }
            other => self.vertex_of_leaf(other).map(YPoint::Vertex),
        }
    }

    fn check_point(&self, u: &YPoint) -> Result<(), LeafSpaceError> {
        let ok = match u {
            YPoint::Edge { strip, height } => strip.0 < self.edges.len() && height > &q(0) && height < &q(1),
            YPoint::Vertex(v) => v.0 < self.vertices.len(),
        };
        if ok {
            Ok(())
        } else {
            Err(LeafSpaceError::UnknownPoint(u.to_string()))
        }
    }

    /// Every vertex and every strip interior as points of `Y` worth testing.
    pub fn sample_points(&self) -> Vec<YPoint> {
        let mut pts: Vec<YPoint> = (0..self.vertices.len()).map(|i| YPoint::Vertex(VertexId(i))).collect();
        for e in &self.edges {
            for h in [crate::rational::qf(1, 3), half()] {
                pts.push(YPoint::Edge { strip: e.strip, height: h });
            }
        }
        pts
    }
}

/// `ncl(u)`: the points that cannot be separated from `u`, including `u` itself.
pub fn hausdorff_closure(graph: &LeafSpaceGraph, u: &YPoint) -> Result<BTreeSet<YPoint>, LeafSpaceError> {
    graph.check_point(u)?;
    let mut out = BTreeSet::from([u.clone()]);
    if let YPoint::Vertex(v) = u {
        for (a, b) in &graph.nonseparated {
            if a == v {
                out.insert(YPoint::Vertex(*b));
            } else if b == v {
                out.insert(YPoint::Vertex(*a));
            }
        }
    }
    Ok(out)
}

/// Vertices whose Hausdorff closure is not a singleton.
pub fn special_points(graph: &LeafSpaceGraph) -> Vec<VertexId> {
    let mut out: BTreeSet<VertexId> = BTreeSet::new();
    for (a, b) in &graph.nonseparated {
        out.insert(*a);
        out.insert(*b);
    }
    out.into_iter().collect()
}

/// A basic open box around `leaf` whose saturation is a collar of depth `delta`.
pub fn leaf_neighborhood(model: &StripModel, leaf: &LeafDescriptor, delta: &Q) -> Result<BasicBox, ModelError> {
    model.check_leaf(leaf)?;
    Ok(match leaf {
        LeafDescriptor::Interior { strip, y } => BasicBox::Rect {
            strip: *strip,
            x: (q(-1), q(1)),
            y: (max_q(&(y - delta), &q(0)), min_q(&(y + delta), &q(1))),
        },
        LeafDescriptor::Arc { gluing } => {
            let arc = model.leaf_interval(leaf)?;
            let anchor = arc.anchor();
            let mut w = q(1);
            for end in [arc.lo.finite(), arc.hi.finite()].into_iter().flatten() {
                let d = (end - &anchor).abs() * half();
                w = min_q(&w, &d);
            }
            BasicBox::ArcNbhd {
                gluing: *gluing,
                x: (&anchor - &w, &anchor + &w),
                collar_a: delta.clone(),
                collar_b: delta.clone(),
            }
        }
        LeafDescriptor::Boundary { strip, side } => BasicBox::BoundaryNbhd {
            end: SideEnd { strip: *strip, side: *side },
            x: (q(-1), q(1)),
            collar: delta.clone(),
        },
    })
}

use num_traits::Signed;

/// Brute-force non-separation test: for scales `ε/2^k`, `k = 1..=depth`, builds basic
/// neighborhoods of both leaves, saturates them and checks that the saturations meet.
pub fn nonseparated_oracle(
    model: &StripModel,
    a: &LeafDescriptor,
    b: &LeafDescriptor,
    depth: u32,
) -> Result<bool, LeafSpaceError> {
    if a == b {
        return Err(LeafSpaceError::SameLeaf);
    }
    let collar = model.default_collar();
    for k in 1..=depth {
        let delta = &collar / pow2(k);
        let na = model.saturate_basic(&leaf_neighborhood(model, a, &delta)?)?;
        let nb = model.saturate_basic(&leaf_neighborhood(model, b, &delta)?)?;
        if !na.intersects(&nb) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the projection of a saturated set is open in `Y`: every vertex it contains
/// comes with a collar on each attached edge end.
pub fn is_open_in_leaf_space(graph: &LeafSpaceGraph, set: &SaturatedSet) -> bool {
    set.vertices.iter().all(|v| {
        graph
            .vertices
            .iter()
            .find(|x| x.leaf == *v)
            .is_some_and(|vertex| vertex.ends.iter().all(|end| set.collar_at(*end).is_some_and(|c| c > q(0))))
    })
}

/// A basic neighborhood of `pt` whose saturation misses `leaf`; its existence for every
/// point off the leaf shows the leaf is closed.
pub fn complement_neighborhood(model: &StripModel, pt: &ModelPoint, leaf: &LeafDescriptor) -> Option<BasicBox> {
    let own = model.leaf_of(pt).ok()?;
    if &own == leaf {
        return None;
    }
    let mut delta = model.default_collar();
    if let (LeafDescriptor::Interior { strip: s1, y: y1 }, LeafDescriptor::Interior { strip: s2, y: y2 }) = (&own, leaf) {
        if s1 == s2 {
            delta = min_q(&delta, &((y1 - y2).abs() * half()));
        }
    }
    for _ in 0..64 {
        let bx = match &own {
            LeafDescriptor::Interior { strip, y } => BasicBox::Rect {
                strip: *strip,
                x: (pt.leaf_coordinate() - q(1), pt.leaf_coordinate() + q(1)),
                y: (max_q(&(y - &delta), &q(0)), min_q(&(y + &delta), &q(1))),
            },
            other => leaf_neighborhood(model, other, &delta).ok()?,
        };
        let sat = model.saturate_basic(&bx).ok()?;
        if !sat.contains_leaf(leaf) {
            return Some(bx);
        }
        delta *= half();
    }
    None
}

/// A yes/no property together with the finite evidence for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certified {
    pub holds: bool,
    pub certificate: String,
}

impl Certified {
    fn new(holds: bool, certificate: impl Into<String>) -> Self {
        Certified { holds, certificate: certificate.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypothesisReport {
    pub all_leaves_noncompact: Certified,
    pub special_family_locally_finite: Certified,
    pub t1: Certified,
    pub hausdorff: Certified,
    pub locally_euclidean: Certified,
    /// Vertices charted onto ℝ (two attached ends).
    pub line_charts: Vec<String>,
    /// Vertices charted onto the half-line (boundary leaves).
    pub half_line_charts: Vec<String>,
}

pub fn hypothesis_report(model: &StripModel, graph: &LeafSpaceGraph) -> HypothesisReport {
    let labels = |ids: &[VertexId]| ids.iter().map(|v| graph.vertices[v.0].label.clone()).collect::<Vec<_>>();
    let special = special_points(graph);

    let noncompact = Certified::new(
        true,
        "all leaf types parametrized by open intervals: interior and boundary leaves by R, arc leaves by their arc",
    );
    let finite = Certified::new(
        true,
        format!("finitely many vertices ({}), hence finitely many special leaves ({})", graph.vertices.len(), special.len()),
    );

    let mut closed_failures = Vec::new();
    let mut leaves = model.vertex_leaves();
    leaves.extend(model.strip_ids().map(|strip| LeafDescriptor::Interior { strip, y: half() }));
    for leaf in &leaves {
        match is_properly_embedded(model, leaf) {
            Ok(cert) if cert.holds() => {}
            _ => closed_failures.push(model.describe_leaf(leaf)),
        }
    }
    let t1 = if closed_failures.is_empty() {
        Certified::new(true, format!("all {} leaf classes are closed, properly embedded lines", leaves.len()))
    } else {
        Certified::new(false, format!("leaves not closed: {}", closed_failures.join(", ")))
    };

    let hausdorff = if special.is_empty() {
        Certified::new(true, "no special points")
    } else {
        Certified::new(false, format!("special points: {}", labels(&special).join(", ")))
    };

    let mut line = Vec::new();
    let mut half_line = Vec::new();
    let mut bad = Vec::new();
    for (i, v) in graph.vertices.iter().enumerate() {
        match (v.leaf, v.ends.len()) {
            (VertexLeaf::Arc { .. }, 2) => line.push(VertexId(i)),
            (VertexLeaf::Boundary { .. }, 1) => half_line.push(VertexId(i)),
            _ => bad.push(VertexId(i)),
        }
    }
    let locally_euclidean = if bad.is_empty() {
        Certified::new(
            true,
            format!(
                "edges are open intervals; {} vertices with two ends chart to R, {} boundary vertices chart to R+",
                line.len(),
                half_line.len()
            ),
        )
    } else {
        Certified::new(false, format!("vertices with a bad end count: {}", labels(&bad).join(", ")))
    };

    HypothesisReport {
        all_leaves_noncompact: noncompact,
        special_family_locally_finite: finite,
        t1,
        hausdorff,
        locally_euclidean,
        line_charts: labels(&line),
        half_line_charts: labels(&half_line),
    }
}

impl LeafSpaceGraph {
    pub fn vertex_gluing(&self, id: VertexId) -> Option<GluingId> {
        match self.vertex(id)?.leaf {
            VertexLeaf::Arc { gluing } => Some(gluing),
            VertexLeaf::Boundary { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::qf;

    #[test]
    fn leaf_space_shapes() {
        let g0 = build_leaf_space(&fixtures::model("M0"));
        assert_eq!((g0.edges.len(), g0.vertices.len()), (2, 1));
        assert_eq!(g0.vertices[0].ends.len(), 2);
        assert!(g0.nonseparated.is_empty());

        let g1 = build_leaf_space(&fixtures::model("M1"));
        assert_eq!((g1.edges.len(), g1.vertices.len()), (2, 2));
        assert_eq!(g1.nonseparated, vec![(VertexId(0), VertexId(1))]);
        for v in &g1.vertices {
            assert_eq!(v.ends, g1.vertices[0].ends);
        }

        let g3 = build_leaf_space(&fixtures::model("M3"));
        assert_eq!((g3.edges.len(), g3.vertices.len()), (2, 3));
        assert!(g3.nonseparated.is_empty());
    }

    #[test]
    fn closures_and_special_points() {
        let g1 = build_leaf_space(&fixtures::model("M1"));
        let closure = hausdorff_closure(&g1, &YPoint::Vertex(VertexId(0))).unwrap();
        assert_eq!(closure, BTreeSet::from([YPoint::Vertex(VertexId(0)), YPoint::Vertex(VertexId(1))]));
        let edge_pt = YPoint::Edge { strip: StripId(0), height: qf(1, 3) };
        assert_eq!(hausdorff_closure(&g1, &edge_pt).unwrap(), BTreeSet::from([edge_pt]));
        assert!(hausdorff_closure(&g1, &YPoint::Vertex(VertexId(9))).is_err());

        let g0 = build_leaf_space(&fixtures::model("M0"));
        assert_eq!(hausdorff_closure(&g0, &YPoint::Vertex(VertexId(0))).unwrap().len(), 1);
        assert!(special_points(&g0).is_empty());
        assert_eq!(special_points(&g1).len(), 2);
        assert_eq!(special_points(&build_leaf_space(&fixtures::model("M2"))).len(), 3);
    }

    #[test]
    fn m2_non_transitivity() {
        let g2 = build_leaf_space(&fixtures::model("M2"));
        let (a, b, c) = (VertexId(0), VertexId(1), VertexId(2));
        assert!(g2.are_nonseparated(a, b));
        assert!(g2.are_nonseparated(b, c));
        assert!(!g2.are_nonseparated(a, c));
    }

    #[test]
    fn oracle_examples() {
        let arc = |i| LeafDescriptor::Arc { gluing: GluingId(i) };
        let m1 = fixtures::model("M1");
        assert!(nonseparated_oracle(&m1, &arc(0), &arc(1), 20).unwrap());
        let m0 = fixtures::model("M0");
        let interior = LeafDescriptor::Interior { strip: StripId(0), y: half() };
        assert!(!nonseparated_oracle(&m0, &arc(0), &interior, 20).unwrap());
        let m2 = fixtures::model("M2");
        assert!(!nonseparated_oracle(&m2, &arc(0), &arc(2), 20).unwrap());
        assert!(nonseparated_oracle(&m2, &arc(1), &arc(2), 20).unwrap());
        assert_eq!(nonseparated_oracle(&m2, &arc(1), &arc(1), 20), Err(LeafSpaceError::SameLeaf));
    }

    #[test]
    fn hypothesis_reports() {
        let m0 = fixtures::model("M0");
        let r0 = hypothesis_report(&m0, &build_leaf_space(&m0));
        assert!(r0.hausdorff.holds && r0.t1.holds && r0.locally_euclidean.holds);
        assert!(r0.all_leaves_noncompact.holds && r0.special_family_locally_finite.holds);

        let m1 = fixtures::model("M1");
        let r1 = hypothesis_report(&m1, &build_leaf_space(&m1));
        assert!(!r1.hausdorff.holds);
        assert!(r1.t1.holds && r1.locally_euclidean.holds && r1.all_leaves_noncompact.holds);

        let m3 = fixtures::model("M3");
        let r3 = hypothesis_report(&m3, &build_leaf_space(&m3));
        assert!(r3.hausdorff.holds && r3.locally_euclidean.holds);
        assert_eq!(r3.half_line_charts.len(), 2);
        assert_eq!(r3.line_charts, vec!["g0".to_string()]);
    }

    #[test]
    fn leaves_are_closed_on_samples() {
        let m1 = fixtures::model("M1");
        let target = LeafDescriptor::Arc { gluing: GluingId(0) };
        let pts = [
            ModelPoint::OnArc { gluing: GluingId(1), x: q(1) },
            ModelPoint::InStrip { strip: StripId(0), x: q(-1), y: qf(999, 1000) },
            ModelPoint::InStrip { strip: StripId(1), x: q(3), y: qf(1, 1000) },
        ];
        for pt in &pts {
            assert!(complement_neighborhood(&m1, pt, &target).is_some(), "{pt}");
        }
    }
}
