use std::fmt;

use serde::Serialize;

use super::validate::compatible;
use super::{
    EndpointKind, Gluing, GluingId, Interval, LeafDescriptor, ModelError, ModelPoint, Orientation, SideSpec,
    StripModel,
};
use crate::rational::{fmt_q, q, ExtRat, Q};

/// `x ↦ scale·x + shift` with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineMap {
    pub scale: Q,
    pub shift: Q,
}

impl AffineMap {
    pub fn identity() -> Self {
        AffineMap { scale: q(1), shift: q(0) }
    }

    pub fn apply(&self, x: &Q) -> Q {
        &self.scale * x + &self.shift
    }

    pub fn inverse(&self) -> AffineMap {
        let scale = q(1) / &self.scale;
        let shift = -(&self.shift * &scale);
        AffineMap { scale, shift }
    }

    pub fn apply_ext(&self, x: &ExtRat) -> ExtRat {
        match x {
            ExtRat::Finite(v) => ExtRat::Finite(self.apply(v)),
            inf if self.scale > q(0) => inf.clone(),
            inf => inf.neg(),
        }
    }
}

impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x -> {}*x + {}", fmt_q(&self.scale), fmt_q(&self.shift))
    }
}

impl StripModel {
    /// The canonical identification of the first arc of `gluing` with the second one.
    pub fn gluing_map(&self, gluing: GluingId) -> Result<AffineMap, ModelError> {
        let g = self.gluing(gluing)?;
        self.affine_gluing_map(g)
    }

    pub fn affine_gluing_map(&self, g: &Gluing) -> Result<AffineMap, ModelError> {
        let missing = || ModelError::OutsideDomain("gluing references a missing arc".into());
        let a = self.arc(g.a).ok_or_else(missing)?;
        let b = self.arc(g.b).ok_or_else(missing)?;
        affine_between(a, b, g.orientation).ok_or_else(|| {
            ModelError::OutsideDomain(format!("incompatible endpoint types {a} and {b} under {:?}", g.orientation))
        })
    }

    /// Validates a point and returns the leaf it lies on.
    pub fn leaf_of(&self, pt: &ModelPoint) -> Result<LeafDescriptor, ModelError> {
        self.check_point(pt)?;
        Ok(match pt {
            ModelPoint::InStrip { strip, y, .. } => LeafDescriptor::Interior { strip: *strip, y: y.clone() },
            ModelPoint::OnArc { gluing, .. } => LeafDescriptor::Arc { gluing: *gluing },
            ModelPoint::OnBoundary { strip, side, .. } => LeafDescriptor::Boundary { strip: *strip, side: *side },
        })
    }

    pub fn check_point(&self, pt: &ModelPoint) -> Result<(), ModelError> {
        let outside = || ModelError::OutsideDomain(pt.to_string());
        match pt {
            ModelPoint::InStrip { strip, y, .. } => {
                self.strip(*strip)?;
                if y <= &q(0) || y >= &q(1) {
                    return Err(outside());
                }
            }
            ModelPoint::OnArc { gluing, x } => {
                let g = self.gluing(*gluing)?;
                let arc = self.arc(g.a).ok_or_else(outside)?;
                if !arc.contains(x) {
                    return Err(outside());
                }
            }
            ModelPoint::OnBoundary { strip, side, .. } => {
                if self.strip(*strip)?.side(*side) != &SideSpec::Boundary {
                    return Err(outside());
                }
            }
        }
        Ok(())
    }

    pub fn check_leaf(&self, leaf: &LeafDescriptor) -> Result<(), ModelError> {
        match leaf {
            LeafDescriptor::Interior { strip, y } => {
                self.strip(*strip)?;
                if y <= &q(0) || y >= &q(1) {
                    return Err(ModelError::OutsideDomain(format!("height {} not in (0,1)", fmt_q(y))));
                }
            }
            LeafDescriptor::Arc { gluing } => {
                self.gluing(*gluing)?;
            }
            LeafDescriptor::Boundary { strip, side } => {
                if self.strip(*strip)?.side(*side) != &SideSpec::Boundary {
                    return Err(ModelError::OutsideDomain(format!("strip #{} {side} is not a boundary", strip.0)));
                }
            }
        }
        Ok(())
    }

    /// Parameter interval of a leaf in its canonical coordinate.
    pub fn leaf_interval(&self, leaf: &LeafDescriptor) -> Result<Interval, ModelError> {
        self.check_leaf(leaf)?;
        Ok(match leaf {
            LeafDescriptor::Arc { gluing } => {
                let g = self.gluing(*gluing)?;
                self.arc(g.a).cloned().ok_or_else(|| ModelError::OutsideDomain("missing arc".into()))?
            }
            _ => Interval::full(),
        })
    }

    /// The point of `leaf` at canonical coordinate `x`.
    pub fn point_on_leaf(&self, leaf: &LeafDescriptor, x: Q) -> Result<ModelPoint, ModelError> {
        let pt = match leaf {
            LeafDescriptor::Interior { strip, y } => ModelPoint::InStrip { strip: *strip, x, y: y.clone() },
            LeafDescriptor::Arc { gluing } => ModelPoint::OnArc { gluing: *gluing, x },
            LeafDescriptor::Boundary { strip, side } => ModelPoint::OnBoundary { strip: *strip, side: *side, x },
        };
        self.check_point(&pt)?;
        Ok(pt)
    }
}

pub(crate) fn affine_between(a: &Interval, b: &Interval, orientation: Orientation) -> Option<AffineMap> {
    use EndpointKind::*;
    if !compatible(a.kind(), b.kind(), orientation) {
        return None;
    }
    let map = match (a.kind(), orientation) {
        (Bounded, _) => {
            let (p, qq) = (a.lo.finite()?, a.hi.finite()?);
            let (p2, q2) = (b.lo.finite()?, b.hi.finite()?);
            let ratio = (q2 - p2) / (qq - p);
            match orientation {
                Orientation::Keep => AffineMap { shift: p2 - p * &ratio, scale: ratio },
                Orientation::Flip => AffineMap { shift: q2 + p * &ratio, scale: -ratio },
            }
        }
        (Full, Orientation::Keep) => AffineMap::identity(),
        (Full, Orientation::Flip) => AffineMap { scale: q(-1), shift: q(0) },
        (LeftRay, Orientation::Keep) => AffineMap { scale: q(1), shift: b.hi.finite()? - a.hi.finite()? },
        (RightRay, Orientation::Keep) => AffineMap { scale: q(1), shift: b.lo.finite()? - a.lo.finite()? },
        (LeftRay, Orientation::Flip) => AffineMap { scale: q(-1), shift: a.hi.finite()? + b.lo.finite()? },
        (RightRay, Orientation::Flip) => AffineMap { scale: q(-1), shift: a.lo.finite()? + b.hi.finite()? },
    };
    Some(map)
}

/// Evidence for conditions (m) embedded and (c) closed of a leaf's parametrization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmbeddingCertificate {
    pub embedded: bool,
    pub closed: bool,
    pub evidence: Vec<String>,
}

impl EmbeddingCertificate {
    pub fn holds(&self) -> bool {
        self.embedded && self.closed
    }
}

/// Checks that the canonical parametrization of `leaf` is an embedding with closed image.
///
/// Interior and boundary leaves are full lines of a strip and have no limit points.
/// An arc leaf is closed exactly when the finite endpoints of both glued arcs are
/// missing from the surface, i.e. lie in no arc of their side.
pub fn is_properly_embedded(model: &StripModel, leaf: &LeafDescriptor) -> Result<EmbeddingCertificate, ModelError> {
    model.check_leaf(leaf)?;
    let mut evidence = Vec::new();
    let mut closed = true;
    let embedded = match leaf {
        LeafDescriptor::Interior { .. } => {
            evidence.push("horizontal line x -> (x, y) is injective and proper on R".to_string());
            true
        }
        LeafDescriptor::Boundary { .. } => {
            evidence.push("boundary line x -> (x, side) is injective and proper on R".to_string());
            true
        }
        LeafDescriptor::Arc { gluing } => {
            let g = model.gluing(*gluing)?;
            let map = model.affine_gluing_map(g)?;
            let injective = map.scale != q(0);
            evidence.push(format!("gluing map {map} is a bijection of the glued arcs"));
            for arc_ref in [g.a, g.b] {
                let arc = model.arc(arc_ref).expect("checked by affine_gluing_map");
                let siblings = model.strips[arc_ref.strip.0].side(arc_ref.side).arcs();
                for end in [&arc.lo, &arc.hi] {
                    let ExtRat::Finite(e) = end else { continue };
                    let present = siblings.iter().any(|s| s.contains(e));
                    if present {
                        closed = false;
                        evidence.push(format!("endpoint {} of {arc} lies inside another arc", fmt_q(e)));
                    } else {
                        evidence.push(format!("endpoint {} of {arc} is removed from the surface", fmt_q(e)));
                    }
                }
            }
            injective
        }
    };
    Ok(EmbeddingCertificate { embedded, closed, evidence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{Side, StripId};
    use crate::rational::qf;

    #[test]
    fn affine_maps_from_endpoint_equations() {
        let keep = affine_between(&Interval::new(0, 1), &Interval::new(2, 4), Orientation::Keep).unwrap();
        assert_eq!(keep, AffineMap { scale: q(2), shift: q(2) });
        let flip = affine_between(&Interval::new(0, 1), &Interval::new(2, 4), Orientation::Flip).unwrap();
        assert_eq!(flip.apply(&q(0)), q(4));
        assert_eq!(flip.apply(&q(1)), q(2));
        let ray = affine_between(
            &Interval::new(ExtRat::NegInf, 0),
            &Interval::new(ExtRat::NegInf, 3),
            Orientation::Keep,
        )
        .unwrap();
        assert_eq!(ray, AffineMap { scale: q(1), shift: q(3) });
        let opposite = affine_between(
            &Interval::new(ExtRat::NegInf, 1),
            &Interval::new(5, ExtRat::PosInf),
            Orientation::Flip,
        )
        .unwrap();
        assert_eq!(opposite.apply(&q(1)), q(5));
        assert_eq!(opposite.apply(&q(0)), q(6));
        let full = affine_between(&Interval::full(), &Interval::full(), Orientation::Keep).unwrap();
        assert_eq!(full, AffineMap::identity());
        let full_flip = affine_between(&Interval::full(), &Interval::full(), Orientation::Flip).unwrap();
        assert_eq!(full_flip.apply(&q(3)), q(-3));
        assert!(affine_between(&Interval::full(), &Interval::new(0, 1), Orientation::Keep).is_none());
    }

    #[test]
    fn inverse_map_roundtrip() {
        let map = AffineMap { scale: qf(-3, 2), shift: qf(7, 5) };
        let x = qf(11, 13);
        assert_eq!(map.inverse().apply(&map.apply(&x)), x);
    }

    #[test]
    fn leaf_of_examples() {
        let m0 = crate::model::parse_model(fixtures::M0).unwrap();
        let pt = ModelPoint::InStrip { strip: StripId(0), x: q(7), y: qf(1, 2) };
        assert_eq!(m0.leaf_of(&pt).unwrap(), LeafDescriptor::Interior { strip: StripId(0), y: qf(1, 2) });
        let m1 = crate::model::parse_model(fixtures::M1).unwrap();
        let pt = ModelPoint::OnArc { gluing: GluingId(0), x: q(-5) };
        assert_eq!(m1.leaf_of(&pt).unwrap(), LeafDescriptor::Arc { gluing: GluingId(0) });
        let outside = ModelPoint::OnArc { gluing: GluingId(0), x: q(0) };
        assert!(m1.leaf_of(&outside).is_err());
        let m3 = crate::model::parse_model(fixtures::M3).unwrap();
        let pt = ModelPoint::OnBoundary { strip: StripId(0), side: Side::Bottom, x: q(0) };
        assert_eq!(
            m3.leaf_of(&pt).unwrap(),
            LeafDescriptor::Boundary { strip: StripId(0), side: Side::Bottom }
        );
        let bad = ModelPoint::InStrip { strip: StripId(0), x: q(0), y: q(1) };
        assert!(m3.leaf_of(&bad).is_err());
    }

    #[test]
    fn proper_embedding_examples() {
        let m0 = crate::model::parse_model(fixtures::M0).unwrap();
        let leaf = LeafDescriptor::Interior { strip: StripId(0), y: qf(1, 2) };
        assert!(is_properly_embedded(&m0, &leaf).unwrap().holds());
        let m1 = crate::model::parse_model(fixtures::M1).unwrap();
        let cert = is_properly_embedded(&m1, &LeafDescriptor::Arc { gluing: GluingId(0) }).unwrap();
        assert!(cert.holds());
        assert!(cert.evidence.iter().any(|e| e.contains("removed")));
        let m3 = crate::model::parse_model(fixtures::M3).unwrap();
        let leaf = LeafDescriptor::Boundary { strip: StripId(0), side: Side::Bottom };
        assert!(is_properly_embedded(&m3, &leaf).unwrap().holds());
    }
}
