use std::collections::BTreeMap;

use serde::Serialize;

use super::{
    validate_model, ArcRef, Gluing, GluingId, Interval, LeafDescriptor, ModelError, ModelPoint, Orientation, SideEnd,
    SideSpec, Strip, StripId, StripModel,
};

/// The copy-swapping involution of a doubled model.
///
/// Strips `0..n` form the first copy and `n..2n` the second. Gluings `0..k` and
/// `k..2k` are the two copies of the original gluings; the remaining gluings are the
/// seams that replace boundary sides, with the second copy's arc listed first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Involution {
    pub strip_map: Vec<StripId>,
    pub gluing_map: Vec<GluingId>,
    /// Seam gluing for each boundary end of the original model (first-copy strip ids).
    pub seams: BTreeMap<SideEnd, GluingId>,
    pub copies: usize,
}

impl Involution {
    pub fn strip(&self, s: StripId) -> StripId {
        self.strip_map[s.0]
    }

    pub fn gluing(&self, g: GluingId) -> GluingId {
        self.gluing_map[g.0]
    }

    pub fn is_seam(&self, g: GluingId) -> bool {
        self.seams.values().any(|s| *s == g)
    }

    /// Seams are pointwise fixed: the two copies are glued by the identity there.
    pub fn point(&self, pt: &ModelPoint) -> ModelPoint {
        match pt {
            ModelPoint::InStrip { strip, x, y } => ModelPoint::InStrip { strip: self.strip(*strip), x: x.clone(), y: y.clone() },
            ModelPoint::OnArc { gluing, x } => ModelPoint::OnArc { gluing: self.gluing(*gluing), x: x.clone() },
            ModelPoint::OnBoundary { strip, side, x } => {
                ModelPoint::OnBoundary { strip: self.strip(*strip), side: *side, x: x.clone() }
            }
        }
    }

    pub fn leaf(&self, leaf: &LeafDescriptor) -> LeafDescriptor {
        match leaf {
            LeafDescriptor::Interior { strip, y } => LeafDescriptor::Interior { strip: self.strip(*strip), y: y.clone() },
            LeafDescriptor::Arc { gluing } => LeafDescriptor::Arc { gluing: self.gluing(*gluing) },
            LeafDescriptor::Boundary { strip, side } => LeafDescriptor::Boundary { strip: self.strip(*strip), side: *side },
        }
    }

    /// Recovers the first copy as a model with boundary, undoing the doubling.
    pub fn fixed_half(&self, doubled: &StripModel) -> StripModel {
        let n = self.copies;
        let seam_ends: Vec<SideEnd> = self.seams.keys().copied().collect();
        let strips = doubled.strips[..n]
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut strip = Strip {
                    name: s.name.strip_suffix("@1").unwrap_or(&s.name).to_string(),
                    bottom: s.bottom.clone(),
                    top: s.top.clone(),
                };
                for end in seam_ends.iter().filter(|e| e.strip.0 == i) {
                    *strip.side_mut(end.side) = SideSpec::Boundary;
                }
                strip
            })
            .collect();
        let k = (doubled.gluings.len() - self.seams.len()) / 2;
        StripModel { strips, gluings: doubled.gluings[..k].to_vec() }
    }
}

/// Doubles a model along its boundary sides.
pub fn double_model(model: &StripModel) -> Result<(StripModel, Involution), ModelError> {
    let report = validate_model(model);
    if !report.is_valid() {
        return Err(ModelError::Invalid(report));
    }
    let n = model.strips.len();
    let k = model.gluings.len();
    let shift = |r: ArcRef, by: usize| ArcRef { strip: StripId(r.strip.0 + by), ..r };

    let mut strips = Vec::with_capacity(2 * n);
    for copy in 1..=2 {
        for s in &model.strips {
            let convert = |spec: &SideSpec| match spec {
                SideSpec::Boundary => SideSpec::Glued(vec![Interval::full()]),
                other => other.clone(),
            };
            strips.push(Strip { name: format!("{}@{copy}", s.name), bottom: convert(&s.bottom), top: convert(&s.top) });
        }
    }

    let mut gluings = Vec::with_capacity(2 * k);
    for by in [0, n] {
        gluings.extend(model.gluings.iter().map(|g| Gluing { a: shift(g.a, by), b: shift(g.b, by), orientation: g.orientation }));
    }
    let mut seams = BTreeMap::new();
    for end in model.boundary_ends() {
        let first = ArcRef { strip: end.strip, side: end.side, index: 0 };
        seams.insert(end, GluingId(gluings.len()));
        gluings.push(Gluing { a: shift(first, n), b: first, orientation: Orientation::Keep });
    }

    let strip_map = (0..2 * n).map(|i| StripId((i + n) % (2 * n))).collect();
    let mut gluing_map: Vec<GluingId> = (0..2 * k).map(|i| GluingId((i + k) % (2 * k).max(1))).collect();
    gluing_map.extend(seams.values().copied());
    let doubled = StripModel { strips, gluings };
    Ok((doubled, Involution { strip_map, gluing_map, seams, copies: n }))
}

impl StripModel {
    pub fn double(&self) -> Result<(StripModel, Involution), ModelError> {
        double_model(self)
    }
}
