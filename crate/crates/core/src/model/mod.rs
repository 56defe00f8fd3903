//! Striped presentations of foliated surfaces.
//!
//! A model is a finite family of strips `ℝ × (0,1)`, each foliated by the horizontal
//! lines `ℝ × {y}`, whose bottom and top boundary lines are either removed (`open`),
//! kept as boundary of the surface (`boundary`), or cut into open arcs that are glued
//! pairwise. Glued arcs become single leaves of the resulting surface; everything on a
//! glued side outside the arcs is removed. All coordinates are exact rationals.

mod double;
mod geometry;
mod parse;
pub mod random;
mod saturation;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{fmt_q, ExtRat, Q};

pub use double::{double_model, Involution};
pub use geometry::{is_properly_embedded, AffineMap, EmbeddingCertificate};
pub use parse::{parse_model, ParseError};
pub use saturation::{BasicBox, SaturatedSet, VertexLeaf};
pub use validate::{validate_model, ValidationIssue, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StripId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GluingId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bottom,
    Top,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Bottom, Side::Top];

    /// Height of the boundary line carrying this side.
    pub fn height(self) -> Q {
        match self {
            Side::Bottom => crate::rational::q(0),
            Side::Top => crate::rational::q(1),
        }
    }

    /// Height at distance `depth` from this side, measured into the strip.
    pub fn height_at_depth(self, depth: &Q) -> Q {
        match self {
            Side::Bottom => depth.clone(),
            Side::Top => crate::rational::q(1) - depth,
        }
    }

    /// Distance of height `y` from this side.
    pub fn depth_of(self, y: &Q) -> Q {
        match self {
            Side::Bottom => y.clone(),
            Side::Top => crate::rational::q(1) - y,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Bottom => "bottom",
            Side::Top => "top",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An open interval `(lo, hi)` of the extended line.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: ExtRat,
    pub hi: ExtRat,
}

impl Interval {
    pub fn new(lo: impl Into<ExtRat>, hi: impl Into<ExtRat>) -> Self {
        Interval { lo: lo.into(), hi: hi.into() }
    }

    pub fn full() -> Self {
        Interval { lo: ExtRat::NegInf, hi: ExtRat::PosInf }
    }

    pub fn contains(&self, x: &Q) -> bool {
        self.lo.lt_q(x) && self.hi.gt_q(x)
    }

    pub fn is_full(&self) -> bool {
        self.lo == ExtRat::NegInf && self.hi == ExtRat::PosInf
    }

    pub fn kind(&self) -> EndpointKind {
        match (&self.lo, &self.hi) {
            (ExtRat::NegInf, ExtRat::PosInf) => EndpointKind::Full,
            (ExtRat::NegInf, _) => EndpointKind::LeftRay,
            (_, ExtRat::PosInf) => EndpointKind::RightRay,
            _ => EndpointKind::Bounded,
        }
    }

    /// Canonical interior point: the midpoint of a bounded arc, otherwise `0` when
    /// inside, otherwise one unit away from the finite end.
    pub fn anchor(&self) -> Q {
        use crate::rational::q;
        match (&self.lo, &self.hi) {
            (ExtRat::Finite(a), ExtRat::Finite(b)) => (a + b) / q(2),
            (ExtRat::NegInf, ExtRat::Finite(b)) => {
                if b > &q(0) {
                    q(0)
                } else {
                    b - q(1)
                }
            }
            (ExtRat::Finite(a), ExtRat::PosInf) => {
                if a < &q(0) {
                    q(0)
                } else {
                    a + q(1)
                }
            }
            _ => q(0),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointKind {
    Bounded,
    LeftRay,
    RightRay,
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "arcs", rename_all = "lowercase")]
pub enum SideSpec {
    Open,
    Boundary,
    Glued(Vec<Interval>),
}

impl SideSpec {
    pub fn arcs(&self) -> &[Interval] {
        match self {
            SideSpec::Glued(arcs) => arcs,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strip {
    pub name: String,
    pub bottom: SideSpec,
    pub top: SideSpec,
}

impl Strip {
    pub fn new(name: impl Into<String>) -> Self {
        Strip { name: name.into(), bottom: SideSpec::Open, top: SideSpec::Open }
    }

    pub fn side(&self, side: Side) -> &SideSpec {
        match side {
            Side::Bottom => &self.bottom,
            Side::Top => &self.top,
        }
    }

    pub fn side_mut(&mut self, side: Side) -> &mut SideSpec {
        match side {
            Side::Bottom => &mut self.bottom,
            Side::Top => &mut self.top,
        }
    }
}

/// Reference to the `index`-th arc on a strip side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ArcRef {
    pub strip: StripId,
    pub side: Side,
    pub index: usize,
}

impl ArcRef {
    pub fn end(&self) -> SideEnd {
        SideEnd { strip: self.strip, side: self.side }
    }
}

/// One end of a strip, i.e. one of its two boundary lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SideEnd {
    pub strip: StripId,
    pub side: Side,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Keep,
    Flip,
}

impl Orientation {
    pub fn sign(self) -> i8 {
        match self {
            Orientation::Keep => 1,
            Orientation::Flip => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gluing {
    pub a: ArcRef,
    pub b: ArcRef,
    pub orientation: Orientation,
}

impl Gluing {
    pub fn ends(&self) -> [SideEnd; 2] {
        [self.a.end(), self.b.end()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StripModel {
    pub strips: Vec<Strip>,
    pub gluings: Vec<Gluing>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("point outside the model: {0}")]
    OutsideDomain(String),
    #[error("unknown strip {0:?}")]
    UnknownStrip(StripId),
    #[error("unknown gluing {0:?}")]
    UnknownGluing(GluingId),
    #[error("degenerate box: {0}")]
    DegenerateBox(String),
    #[error("invalid model:\n{0}")]
    Invalid(ValidationReport),
}

/// A leaf of the foliation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LeafDescriptor {
    Interior {
        strip: StripId,
        #[serde(with = "crate::rational::q_string")]
        y: Q,
    },
    Arc {
        gluing: GluingId,
    },
    Boundary {
        strip: StripId,
        side: Side,
    },
}

/// A point of the surface. `OnArc` coordinates are taken in the chart of the gluing's
/// first arc.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelPoint {
    InStrip {
        strip: StripId,
        #[serde(with = "crate::rational::q_string")]
        x: Q,
        #[serde(with = "crate::rational::q_string")]
        y: Q,
    },
    OnArc {
        gluing: GluingId,
        #[serde(with = "crate::rational::q_string")]
        x: Q,
    },
    OnBoundary {
        strip: StripId,
        side: Side,
        #[serde(with = "crate::rational::q_string")]
        x: Q,
    },
}

impl ModelPoint {
    /// Coordinate of the point along its leaf.
    pub fn leaf_coordinate(&self) -> &Q {
        match self {
            ModelPoint::InStrip { x, .. } | ModelPoint::OnArc { x, .. } | ModelPoint::OnBoundary { x, .. } => x,
        }
    }
}

impl fmt::Display for ModelPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelPoint::InStrip { strip, x, y } => write!(f, "s#{}({}, {})", strip.0, fmt_q(x), fmt_q(y)),
            ModelPoint::OnArc { gluing, x } => write!(f, "g{}({})", gluing.0, fmt_q(x)),
            ModelPoint::OnBoundary { strip, side, x } => write!(f, "s#{}.{}({})", strip.0, side, fmt_q(x)),
        }
    }
}

impl StripModel {
    pub fn strip(&self, id: StripId) -> Result<&Strip, ModelError> {
        self.strips.get(id.0).ok_or(ModelError::UnknownStrip(id))
    }

    pub fn gluing(&self, id: GluingId) -> Result<&Gluing, ModelError> {
        self.gluings.get(id.0).ok_or(ModelError::UnknownGluing(id))
    }

    pub fn strip_by_name(&self, name: &str) -> Option<StripId> {
        self.strips.iter().position(|s| s.name == name).map(StripId)
    }

    pub fn strip_ids(&self) -> impl Iterator<Item = StripId> {
        (0..self.strips.len()).map(StripId)
    }

    pub fn gluing_ids(&self) -> impl Iterator<Item = GluingId> {
        (0..self.gluings.len()).map(GluingId)
    }

    pub fn side(&self, end: SideEnd) -> Option<&SideSpec> {
        self.strips.get(end.strip.0).map(|s| s.side(end.side))
    }

    pub fn arc(&self, arc: ArcRef) -> Option<&Interval> {
        self.side(arc.end())?.arcs().get(arc.index)
    }

    /// Gluings whose arcs lie on `end`, ordered by arc position.
    pub fn gluings_on(&self, end: SideEnd) -> Vec<GluingId> {
        let mut found: Vec<(usize, GluingId)> = self
            .gluings
            .iter()
            .enumerate()
            .flat_map(|(i, g)| {
                [g.a, g.b].into_iter().filter(move |r| r.end() == end).map(move |r| (r.index, GluingId(i)))
            })
            .collect();
        found.sort();
        found.into_iter().map(|(_, g)| g).collect()
    }

    pub fn boundary_ends(&self) -> Vec<SideEnd> {
        self.strip_ids()
            .flat_map(|strip| Side::BOTH.into_iter().map(move |side| SideEnd { strip, side }))
            .filter(|end| matches!(self.side(*end), Some(SideSpec::Boundary)))
            .collect()
    }

    pub fn strip_name(&self, id: StripId) -> &str {
        self.strips.get(id.0).map(|s| s.name.as_str()).unwrap_or("?")
    }

    /// Default collar width: half of the minimum of `1` and every finite positive gap
    /// between consecutive finite arc endpoints on a side.
    pub fn default_collar(&self) -> Q {
        let mut smallest = crate::rational::q(1);
        for strip in &self.strips {
            for side in Side::BOTH {
                let mut ends: Vec<&Q> = strip
                    .side(side)
                    .arcs()
                    .iter()
                    .flat_map(|a| [a.lo.finite(), a.hi.finite()])
                    .flatten()
                    .collect();
                ends.sort();
                ends.dedup();
                for pair in ends.windows(2) {
                    let gap = pair[1] - pair[0];
                    if gap < smallest {
                        smallest = gap;
                    }
                }
            }
        }
        smallest / crate::rational::q(2)
    }

    /// Leaves of the vertex type (arc leaves, then boundary leaves).
    pub fn vertex_leaves(&self) -> Vec<LeafDescriptor> {
        let mut leaves: Vec<LeafDescriptor> = self.gluing_ids().map(|gluing| LeafDescriptor::Arc { gluing }).collect();
        leaves.extend(
            self.boundary_ends().into_iter().map(|e| LeafDescriptor::Boundary { strip: e.strip, side: e.side }),
        );
        leaves
    }

    pub fn describe_leaf(&self, leaf: &LeafDescriptor) -> String {
        match leaf {
            LeafDescriptor::Interior { strip, y } => format!("{}@{}", self.strip_name(*strip), fmt_q(y)),
            LeafDescriptor::Arc { gluing } => format!("g{}", gluing.0),
            LeafDescriptor::Boundary { strip, side } => format!("{}.{}", self.strip_name(*strip), side),
        }
    }

    /// Parses and validates in one step.
    pub fn load(text: &str) -> Result<StripModel, LoadError> {
        let model = parse_model(text)?;
        let report = validate_model(&model);
        if report.is_valid() {
            Ok(model)
        } else {
            Err(LoadError::Invalid(report))
        }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Invalid(ValidationReport),
}

impl fmt::Display for StripModel {
    /// Writes the line-oriented model format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for strip in &self.strips {
            writeln!(f, "strip {}", strip.name)?;
        }
        for strip in &self.strips {
            for side in Side::BOTH {
                write!(f, "side {} {} ", strip.name, side)?;
                match strip.side(side) {
                    SideSpec::Open => writeln!(f, "open")?,
                    SideSpec::Boundary => writeln!(f, "boundary")?,
                    SideSpec::Glued(arcs) => {
                        write!(f, "arcs")?;
                        for arc in arcs {
                            write!(f, " {arc}")?;
                        }
                        writeln!(f)?;
                    }
                }
            }
        }
        for g in &self.gluings {
            let orient = match g.orientation {
                Orientation::Keep => "keep",
                Orientation::Flip => "flip",
            };
            writeln!(
                f,
                "glue {}.{}.{} {}.{}.{} {}",
                self.strip_name(g.a.strip),
                g.a.side,
                g.a.index,
                self.strip_name(g.b.strip),
                g.b.side,
                g.b.index,
                orient
            )?;
        }
        Ok(())
    }
}
