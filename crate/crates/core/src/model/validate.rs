use std::fmt;

use serde::Serialize;

use super::{ArcRef, EndpointKind, GluingId, Orientation, SideEnd, SideSpec, StripModel};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum ValidationIssue {
    EmptyArc { end: SideEnd, index: usize },
    OverlappingArcs { end: SideEnd, first: usize, second: usize },
    UnsortedArcs { end: SideEnd },
    GluedSideWithoutArcs { end: SideEnd },
    UnmatchedArc { arc: ArcRef },
    ArcGluedTwice { arc: ArcRef },
    UnknownArcReference { gluing: GluingId, arc: ArcRef },
    SameSideGluing { gluing: GluingId },
    IncompatibleEndpoints { gluing: GluingId },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let end = |e: &SideEnd| format!("strip #{} {}", e.strip.0, e.side);
        match self {
            ValidationIssue::EmptyArc { end: e, index } => write!(f, "empty arc: {} arc {index} has p >= q", end(e)),
            ValidationIssue::OverlappingArcs { end: e, first, second } => {
                write!(f, "overlapping arcs: {} arcs {first} and {second}", end(e))
            }
            ValidationIssue::UnsortedArcs { end: e } => write!(f, "unsorted arcs: {}", end(e)),
            ValidationIssue::GluedSideWithoutArcs { end: e } => write!(f, "glued side without arcs: {}", end(e)),
            ValidationIssue::UnmatchedArc { arc } => {
                write!(f, "unmatched arc: {} arc {}", end(&arc.end()), arc.index)
            }
            ValidationIssue::ArcGluedTwice { arc } => {
                write!(f, "arc glued more than once: {} arc {}", end(&arc.end()), arc.index)
            }
            ValidationIssue::UnknownArcReference { gluing, arc } => {
                write!(f, "unknown arc reference: gluing g{} names {} arc {}", gluing.0, end(&arc.end()), arc.index)
            }
            ValidationIssue::SameSideGluing { gluing } => write!(f, "same-side gluing: g{}", gluing.0),
            ValidationIssue::IncompatibleEndpoints { gluing } => {
                write!(f, "incompatible endpoint types: g{}", gluing.0)
            }
        }
    }
}

/// Every violated invariant of a model; empty means valid.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Whether two arc shapes may be identified under `orientation`.
pub(crate) fn compatible(a: EndpointKind, b: EndpointKind, orientation: Orientation) -> bool {
    use EndpointKind::*;
    match (a, b) {
        (Bounded, Bounded) | (Full, Full) => true,
        (LeftRay, LeftRay) | (RightRay, RightRay) => orientation == Orientation::Keep,
        (LeftRay, RightRay) | (RightRay, LeftRay) => orientation == Orientation::Flip,
        _ => false,
    }
}

pub fn validate_model(model: &StripModel) -> ValidationReport {
    let mut issues = Vec::new();

    for strip in model.strip_ids() {
        for side in super::Side::BOTH {
            let end = SideEnd { strip, side };
            let spec = model.strips[strip.0].side(side);
            let SideSpec::Glued(arcs) = spec else { continue };
            if arcs.is_empty() {
                issues.push(ValidationIssue::GluedSideWithoutArcs { end });
            }
            for (index, arc) in arcs.iter().enumerate() {
                if arc.lo >= arc.hi {
                    issues.push(ValidationIssue::EmptyArc { end, index });
                }
            }
            if arcs.windows(2).any(|w| w[0].lo > w[1].lo) {
                issues.push(ValidationIssue::UnsortedArcs { end });
            }
            let mut order: Vec<usize> = (0..arcs.len()).collect();
            order.sort_by(|&i, &j| arcs[i].lo.cmp(&arcs[j].lo));
            for pair in order.windows(2) {
                let (i, j) = (pair[0], pair[1]);
                if arcs[j].lo < arcs[i].hi {
                    issues.push(ValidationIssue::OverlappingArcs { end, first: i.min(j), second: i.max(j) });
                }
            }
        }
    }

    let mut uses = std::collections::BTreeMap::<ArcRef, usize>::new();
    for (i, g) in model.gluings.iter().enumerate() {
        let gluing = GluingId(i);
        let mut known = true;
        for arc in [g.a, g.b] {
            if model.arc(arc).is_none() {
                issues.push(ValidationIssue::UnknownArcReference { gluing, arc });
                known = false;
            } else {
                *uses.entry(arc).or_default() += 1;
            }
        }
        if g.a.end() == g.b.end() {
            issues.push(ValidationIssue::SameSideGluing { gluing });
        }
        if known {
            let (a, b) = (model.arc(g.a).unwrap(), model.arc(g.b).unwrap());
            if !compatible(a.kind(), b.kind(), g.orientation) {
                issues.push(ValidationIssue::IncompatibleEndpoints { gluing });
            }
        }
    }

    for strip in model.strip_ids() {
        for side in super::Side::BOTH {
            for index in 0..model.strips[strip.0].side(side).arcs().len() {
                let arc = ArcRef { strip, side, index };
                match uses.get(&arc).copied().unwrap_or(0) {
                    0 => issues.push(ValidationIssue::UnmatchedArc { arc }),
                    1 => {}
                    _ => issues.push(ValidationIssue::ArcGluedTwice { arc }),
                }
            }
        }
    }

    ValidationReport { issues }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{parse_model, Interval, Side, StripId};

    #[test]
    fn fixtures_m0_to_m3_are_valid() {
        for text in [fixtures::M0, fixtures::M1, fixtures::M2, fixtures::M3] {
            let report = validate_model(&parse_model(text).unwrap());
            assert!(report.is_valid(), "{report}");
        }
    }

    #[test]
    fn m4_has_overlapping_arcs() {
        let report = validate_model(&parse_model(fixtures::M4).unwrap());
        assert!(report.to_string().contains("overlapping arcs"), "{report}");
    }

    #[test]
    fn deleting_a_gluing_leaves_unmatched_arcs() {
        let mut m1 = parse_model(fixtures::M1).unwrap();
        m1.gluings.pop();
        let report = validate_model(&m1);
        let unmatched = report.issues.iter().filter(|i| matches!(i, ValidationIssue::UnmatchedArc { .. })).count();
        assert_eq!(unmatched, 2);
        assert!(report.to_string().contains("unmatched arc"));
    }

    #[test]
    fn endpoint_compatibility_table() {
        use EndpointKind::*;
        use Orientation::*;
        assert!(compatible(Bounded, Bounded, Flip));
        assert!(compatible(LeftRay, LeftRay, Keep));
        assert!(!compatible(LeftRay, LeftRay, Flip));
        assert!(compatible(LeftRay, RightRay, Flip));
        assert!(!compatible(RightRay, LeftRay, Keep));
        assert!(compatible(Full, Full, Flip));
        assert!(!compatible(Full, LeftRay, Keep));
        assert!(!compatible(Bounded, RightRay, Keep));
    }

    #[test]
    fn detects_incompatible_and_duplicate_use() {
        let mut m0 = parse_model(fixtures::M0).unwrap();
        m0.strips[1].bottom = SideSpec::Glued(vec![Interval::new(0, 1)]);
        let report = validate_model(&m0);
        assert!(report.to_string().contains("incompatible endpoint types"), "{report}");

        let mut m0 = parse_model(fixtures::M0).unwrap();
        let extra = m0.gluings[0].clone();
        m0.gluings.push(extra);
        let report = validate_model(&m0);
        assert!(report.to_string().contains("arc glued more than once"), "{report}");
    }

    #[test]
    fn detects_empty_and_unknown() {
        let mut m0 = parse_model(fixtures::M0).unwrap();
        m0.strips[0].top = SideSpec::Glued(vec![Interval::new(2, 1)]);
        m0.gluings[0].b = ArcRef { strip: StripId(1), side: Side::Top, index: 0 };
        let text = validate_model(&m0).to_string();
        assert!(text.contains("empty arc"), "{text}");
        assert!(text.contains("unknown arc reference"), "{text}");
    }
}
