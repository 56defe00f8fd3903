use serde::{Deserialize, Serialize};

use super::FibrationError;
use crate::model::{
    AffineMap, GluingId, Interval, LeafDescriptor, ModelPoint, SaturatedSet, Side, SideEnd, StripId, StripModel,
    VertexLeaf,
};
use crate::rational::{fmt_q, q, Q};

/// A run of interior leaves of one strip, parametrized by an interval of `v` on which the
/// height moves at unit speed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub strip: StripId,
    #[serde(with = "crate::rational::q_string")]
    pub start_height: Q,
    pub ascending: bool,
    #[serde(with = "crate::rational::q_string")]
    pub len: Q,
    /// Strip coordinate `x = orient · x̃` of the chain's oriented leaf coordinate `x̃`.
    pub orient: i8,
    /// Lattice anchor, in strip coordinates.
    #[serde(with = "crate::rational::q_string")]
    pub anchor: Q,
}

impl Piece {
    pub fn height_at(&self, offset: &Q) -> Q {
        if self.ascending {
            &self.start_height + offset
        } else {
            &self.start_height - offset
        }
    }

    pub fn end_height(&self) -> Q {
        self.height_at(&self.len)
    }

    pub fn offset_of(&self, y: &Q) -> Q {
        if self.ascending {
            y - &self.start_height
        } else {
            &self.start_height - y
        }
    }

    /// The open height range swept by the piece.
    pub fn heights(&self) -> (Q, Q) {
        let (a, b) = (self.start_height.clone(), self.end_height());
        if a < b {
            (a, b)
        } else {
            (b, a)
        }
    }
}

/// An arc leaf crossed by the chain between two consecutive pieces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Joint {
    pub gluing: GluingId,
    /// Whether the piece before the joint lies on the first arc's side.
    pub a_before: bool,
    /// First-arc coordinate `x_a = orient · x̃`.
    pub orient: i8,
    /// Centre of the joint's section, in first-arc coordinates.
    #[serde(with = "crate::rational::q_string")]
    pub anchor: Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChainEnd {
    Open,
    /// The chain is closed at this end by the boundary leaf of `end`.
    Boundary { end: SideEnd },
}

/// Where a chain parameter value lands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    Piece { index: usize, offset: Q },
    Joint { index: usize },
    Start(SideEnd),
    Finish(SideEnd),
}

/// A connected transversal base: pieces of strips joined across arc leaves, optionally
/// closed off by boundary leaves. `v` runs from `origin` over the pieces in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainBase {
    #[serde(with = "crate::rational::q_string")]
    pub origin: Q,
    pub pieces: Vec<Piece>,
    pub joints: Vec<Joint>,
    pub start: ChainEnd,
    pub finish: ChainEnd,
}

fn side_height(side: Side) -> Q {
    match side {
        Side::Bottom => q(0),
        Side::Top => q(1),
    }
}

/// A piece of `depth` next to `end`, with `v` moving away from (`outward`) or toward the side.
fn collar_piece(end: SideEnd, depth: &Q, outward: bool, orient: i8, anchor: Q) -> Piece {
    let toward_top = end.side == Side::Bottom;
    let (start_height, ascending) = if outward {
        (side_height(end.side), toward_top)
    } else {
        (end.side.height_at_depth(depth), !toward_top)
    };
    Piece { strip: end.strip, start_height, ascending, len: depth.clone(), orient, anchor }
}

impl ChainBase {
    /// Heights `(lo, hi)` of one strip, `v` equal to the height.
    pub fn slab(strip: StripId, lo: Q, hi: Q, start: ChainEnd, finish: ChainEnd) -> ChainBase {
        let len = &hi - &lo;
        ChainBase {
            origin: lo.clone(),
            pieces: vec![Piece { strip, start_height: lo, ascending: true, len, orient: 1, anchor: q(0) }],
            joints: Vec::new(),
            start,
            finish,
        }
    }

    /// The arc leaf of `gluing` with collars of depth `collar` on both sides, `v ∈ (−ε, ε)`
    /// with the first arc's side at `v < 0`.
    pub fn vertex(model: &StripModel, gluing: GluingId, collar: &Q) -> Result<ChainBase, FibrationError> {
        let g = model.gluing(gluing)?;
        let arc = model.arc(g.a).ok_or(FibrationError::Model(crate::model::ModelError::UnknownGluing(gluing)))?;
        let anchor = arc.anchor();
        let map = model.affine_gluing_map(g)?;
        let rho = if map.scale > q(0) { 1 } else { -1 };
        Ok(ChainBase {
            origin: -collar.clone(),
            pieces: vec![
                collar_piece(g.a.end(), collar, false, 1, anchor.clone()),
                collar_piece(g.b.end(), collar, true, rho, map.apply(&anchor)),
            ],
            joints: vec![Joint { gluing, a_before: true, orient: 1, anchor }],
            start: ChainEnd::Open,
            finish: ChainEnd::Open,
        })
    }

    /// The boundary leaf of `end` with a collar, `v ∈ [0, ε)`.
    pub fn boundary(end: SideEnd, collar: &Q) -> ChainBase {
        ChainBase {
            origin: q(0),
            pieces: vec![collar_piece(end, collar, true, 1, q(0))],
            joints: Vec::new(),
            start: ChainEnd::Boundary { end },
            finish: ChainEnd::Open,
        }
    }

    pub fn length(&self) -> Q {
        self.pieces.iter().fold(q(0), |acc, p| acc + &p.len)
    }

    pub fn v_range(&self) -> (Q, Q) {
        (self.origin.clone(), &self.origin + self.length())
    }

    pub fn start_closed(&self) -> bool {
        matches!(self.start, ChainEnd::Boundary { .. })
    }

    pub fn finish_closed(&self) -> bool {
        matches!(self.finish, ChainEnd::Boundary { .. })
    }

    pub fn contains_v(&self, v: &Q) -> bool {
        let (lo, hi) = self.v_range();
        (lo < *v || (self.start_closed() && lo == *v)) && (*v < hi || (self.finish_closed() && hi == *v))
    }

    /// Start parameter of each piece.
    pub fn piece_starts(&self) -> Vec<Q> {
        let mut out = Vec::with_capacity(self.pieces.len());
        let mut at = self.origin.clone();
        for p in &self.pieces {
            out.push(at.clone());
            at += &p.len;
        }
        out
    }

    pub fn locate(&self, v: &Q) -> Option<Location> {
        if !self.contains_v(v) {
            return None;
        }
        let (lo, hi) = self.v_range();
        if *v == lo {
            if let ChainEnd::Boundary { end } = self.start {
                return Some(Location::Start(end));
            }
        }
        if *v == hi {
            if let ChainEnd::Boundary { end } = self.finish {
                return Some(Location::Finish(end));
            }
        }
        let starts = self.piece_starts();
        for (j, (p, s)) in self.pieces.iter().zip(&starts).enumerate() {
            let offset = v - s;
            if offset > q(0) && offset < p.len {
                return Some(Location::Piece { index: j, offset });
            }
            if offset == p.len && j < self.joints.len() {
                return Some(Location::Joint { index: j });
            }
        }
        None
    }

    pub fn leaf_at(&self, v: &Q) -> Option<LeafDescriptor> {
        Some(match self.locate(v)? {
            Location::Piece { index, offset } => {
                let p = &self.pieces[index];
                LeafDescriptor::Interior { strip: p.strip, y: p.height_at(&offset) }
            }
            Location::Joint { index } => LeafDescriptor::Arc { gluing: self.joints[index].gluing },
            Location::Start(end) | Location::Finish(end) => LeafDescriptor::Boundary { strip: end.strip, side: end.side },
        })
    }

    /// The model point at chain parameter `v` and oriented leaf coordinate `x̃`.
    pub fn point(&self, v: &Q, xt: &Q) -> Option<ModelPoint> {
        Some(match self.locate(v)? {
            Location::Piece { index, offset } => {
                let p = &self.pieces[index];
                ModelPoint::InStrip { strip: p.strip, x: signed(p.orient, xt), y: p.height_at(&offset) }
            }
            Location::Joint { index } => {
                let j = &self.joints[index];
                ModelPoint::OnArc { gluing: j.gluing, x: signed(j.orient, xt) }
            }
            Location::Start(end) => {
                ModelPoint::OnBoundary { strip: end.strip, side: end.side, x: signed(self.pieces[0].orient, xt) }
            }
            Location::Finish(end) => {
                let p = self.pieces.last().expect("chains have pieces");
                ModelPoint::OnBoundary { strip: end.strip, side: end.side, x: signed(p.orient, xt) }
            }
        })
    }

    /// Inverse of [`ChainBase::point`]: `(v, x̃)` for a point on the chain's saturation.
    pub fn param_of_point(&self, pt: &ModelPoint) -> Option<(Q, Q)> {
        let starts = self.piece_starts();
        match pt {
            ModelPoint::InStrip { strip, x, y } => self.pieces.iter().zip(&starts).find_map(|(p, s)| {
                let offset = p.offset_of(y);
                (p.strip == *strip && offset > q(0) && offset < p.len).then(|| (s + offset, signed(p.orient, x)))
            }),
            ModelPoint::OnArc { gluing, x } => self.joints.iter().enumerate().find_map(|(k, j)| {
                (j.gluing == *gluing).then(|| (&starts[k] + &self.pieces[k].len, signed(j.orient, x)))
            }),
            ModelPoint::OnBoundary { strip, side, x } => {
                let target = SideEnd { strip: *strip, side: *side };
                let (lo, hi) = self.v_range();
                match (self.start, self.finish) {
                    (ChainEnd::Boundary { end }, _) if end == target => Some((lo, signed(self.pieces[0].orient, x))),
                    (_, ChainEnd::Boundary { end }) if end == target => {
                        Some((hi, signed(self.pieces.last().expect("pieces").orient, x)))
                    }
                    _ => None,
                }
            }
        }
    }

    /// Chain parameter of a leaf met by the chain.
    pub fn param_of_leaf(&self, model: &StripModel, leaf: &LeafDescriptor) -> Option<Q> {
        let interval = model.leaf_interval(leaf).ok()?;
        let pt = model.point_on_leaf(leaf, interval.anchor()).ok()?;
        self.param_of_point(&pt).map(|(v, _)| v)
    }

    /// The saturated set swept by the chain.
    pub fn saturation(&self) -> SaturatedSet {
        let mut set = SaturatedSet::empty();
        for p in &self.pieces {
            let (lo, hi) = p.heights();
            set = set.with_heights(p.strip, lo, hi);
        }
        for j in &self.joints {
            set = set.with_vertex(VertexLeaf::Arc { gluing: j.gluing });
        }
        for end in [self.start, self.finish] {
            if let ChainEnd::Boundary { end } = end {
                set = set.with_vertex(VertexLeaf::Boundary { end });
            }
        }
        set
    }

    /// Checks that the chain is consistent with the model: pieces stay inside their
    /// strips, joints connect the right strip sides with compatible orientations, and
    /// boundary ends sit on boundary sides.
    pub fn check(&self, model: &StripModel) -> Result<(), FibrationError> {
        let bad = |m: String| Err(FibrationError::InvalidChain(m));
        if self.pieces.is_empty() || self.joints.len() + 1 != self.pieces.len() {
            return bad(format!("{} pieces with {} joints", self.pieces.len(), self.joints.len()));
        }
        for (j, p) in self.pieces.iter().enumerate() {
            model.strip(p.strip)?;
            let (lo, hi) = p.heights();
            if p.len <= q(0) || lo < q(0) || hi > q(1) || p.orient.abs() != 1 {
                return bad(format!("piece {j} leaves its strip or has a bad orientation"));
            }
        }
        for (k, j) in self.joints.iter().enumerate() {
            let g = model.gluing(j.gluing)?;
            let (before, after) = (&self.pieces[k], &self.pieces[k + 1]);
            let end_of = |p: &Piece, at_end: bool| {
                let h = if at_end { p.end_height() } else { p.start_height.clone() };
                let side = if h == q(1) {
                    Side::Top
                } else if h == q(0) {
                    Side::Bottom
                } else {
                    return None;
                };
                Some(SideEnd { strip: p.strip, side })
            };
            let (a_piece, b_piece, a_end, b_end) = if j.a_before {
                (before, after, end_of(before, true), end_of(after, false))
            } else {
                (after, before, end_of(after, false), end_of(before, true))
            };
            if a_end != Some(g.a.end()) || b_end != Some(g.b.end()) {
                return bad(format!("joint {k} does not connect the sides of gluing g{}", j.gluing.0));
            }
            let map = model.affine_gluing_map(g)?;
            let rho: i8 = if map.scale > q(0) { 1 } else { -1 };
            if a_piece.orient != j.orient || b_piece.orient != j.orient * rho || j.orient.abs() != 1 {
                return bad(format!("joint {k} orientations are inconsistent"));
            }
            let arc = model.arc(g.a).expect("checked gluing");
            if !arc.contains(&j.anchor) {
                return bad(format!("joint {k} anchor {} outside its arc", fmt_q(&j.anchor)));
            }
        }
        let check_end = |end: ChainEnd, piece: &Piece, at_end: bool| match end {
            ChainEnd::Open => Ok(()),
            ChainEnd::Boundary { end } => {
                let h = if at_end { piece.end_height() } else { piece.start_height.clone() };
                let ok = end.strip == piece.strip
                    && h == side_height(end.side)
                    && matches!(model.side(end), Some(crate::model::SideSpec::Boundary));
                if ok {
                    Ok(())
                } else {
                    bad("boundary end does not match a boundary side".to_string())
                }
            }
        };
        check_end(self.start, &self.pieces[0], false)?;
        check_end(self.finish, self.pieces.last().expect("nonempty"), true)
    }
}

pub(crate) fn signed(orient: i8, x: &Q) -> Q {
    if orient < 0 {
        -x.clone()
    } else {
        x.clone()
    }
}

/// Model data a chart needs to evaluate joints: the gluing map and first arc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointData {
    pub map: AffineMap,
    pub arc: Interval,
}

impl ChainBase {
    pub fn joint_data(&self, model: &StripModel) -> Result<Vec<JointData>, FibrationError> {
        self.joints
            .iter()
            .map(|j| {
                let g = model.gluing(j.gluing)?;
                let map = model.affine_gluing_map(g)?;
                let arc = model.arc(g.a).cloned().ok_or(FibrationError::InvalidChain("missing arc".into()))?;
                Ok(JointData { map, arc })
            })
            .collect()
    }
}
