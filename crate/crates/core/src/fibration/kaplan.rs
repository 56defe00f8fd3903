use std::collections::BTreeSet;

use serde::Serialize;

use super::chain::{ChainBase, ChainEnd, Joint, Piece};
use super::chart::{TowerParams, TrivChart};
use super::FibrationError;
use crate::leafspace::{build_leaf_space, special_points};
use crate::model::{GluingId, LeafDescriptor, Side, SideEnd, SideSpec, StripId, StripModel};
use crate::numeric::{check_fibered_homeo, Domain, EmbeddingEvaluator, GridReport, NumericError, PlanePoint};
use crate::rational::{from_f64, half, q, to_f64, Q};

/// Topological type of a component of the complement of the special leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentShape {
    /// `(0, 1) × ℝ`, or a half-open version of it when boundary leaves close it off.
    Strip,
    /// `S¹ × ℝ`: the strips close up into a cycle without flipping leaves.
    Annulus,
    /// An open Möbius band foliated by lines: a cycle whose gluings flip leaves an odd
    /// number of times.
    Mobius,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KaplanComponent {
    /// Strips in chain order.
    pub strips: Vec<StripId>,
    /// Non-special arc leaves inside the component.
    pub joints: Vec<GluingId>,
    /// Boundary leaves inside the component.
    pub boundary: Vec<SideEnd>,
    pub shape: ComponentShape,
    /// Chain bases of certificate charts covering the component.
    pub charts: Vec<ChainBase>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KaplanDecomposition {
    pub special_leaves: Vec<LeafDescriptor>,
    pub components: Vec<KaplanComponent>,
}

fn opposite(side: Side) -> Side {
    match side {
        Side::Bottom => Side::Top,
        Side::Top => Side::Bottom,
    }
}

fn side_height(side: Side) -> Q {
    match side {
        Side::Bottom => q(0),
        Side::Top => q(1),
    }
}

struct Links<'a> {
    model: &'a StripModel,
    special: BTreeSet<GluingId>,
}

impl Links<'_> {
    /// The non-special gluing on `end` and the side end across it.
    fn across(&self, end: SideEnd) -> Option<(GluingId, SideEnd)> {
        let gs = self.model.gluings_on(end);
        let [g] = gs.as_slice() else { return None };
        if self.special.contains(g) {
            return None;
        }
        let [a, b] = self.model.gluing(*g).ok()?.ends();
        Some((*g, if a == end { b } else { a }))
    }

    /// Walks from `strip`, entered through `enter`, until the chain stops or closes up.
    /// Returns the visited `(strip, entry side)` steps, the gluings between them and
    /// whether the walk came back to its start.
    fn walk(&self, strip: StripId, enter: Side) -> (Vec<(StripId, Side)>, Vec<GluingId>, bool) {
        let mut steps = vec![(strip, enter)];
        let mut gluings = Vec::new();
        let (mut s, mut e) = (strip, enter);
        while let Some((g, next)) = self.across(SideEnd { strip: s, side: opposite(e) }) {
            gluings.push(g);
            if next == (SideEnd { strip, side: enter }) {
                return (steps, gluings, true);
            }
            (s, e) = (next.strip, next.side);
            steps.push((s, e));
        }
        (steps, gluings, false)
    }
}

/// Span of a step's piece: the full strip, or its half starting or ending mid-strip.
#[derive(Clone, Copy, PartialEq)]
enum Span {
    Full,
    FromMiddle,
    ToMiddle,
}

fn chain_from_steps(
    model: &StripModel,
    steps: &[(StripId, Side)],
    gluings: &[GluingId],
    spans: (Span, Span),
) -> Result<ChainBase, FibrationError> {
    let mut pieces = Vec::with_capacity(steps.len());
    let mut joints = Vec::with_capacity(gluings.len());
    let mut orient: i8 = 1;
    let mut anchor = q(0);
    for (k, &(strip, enter)) in steps.iter().enumerate() {
        let span = match k {
            0 => spans.0,
            _ if k + 1 == steps.len() => spans.1,
            _ => Span::Full,
        };
        let (start_height, len) = match span {
            Span::Full => (side_height(enter), q(1)),
            Span::FromMiddle => (half(), half()),
            Span::ToMiddle => (side_height(enter), half()),
        };
        pieces.push(Piece { strip, start_height, ascending: enter == Side::Bottom, len, orient, anchor: anchor.clone() });
        if let Some(&g) = gluings.get(k) {
            let gl = model.gluing(g)?;
            let map = model.affine_gluing_map(gl)?;
            let rho: i8 = if map.scale > q(0) { 1 } else { -1 };
            let arc_anchor = model.arc(gl.a).map(|a| a.anchor()).unwrap_or_else(|| q(0));
            let a_before = gl.a.end() == (SideEnd { strip, side: opposite(enter) });
            let j_orient = if a_before { orient } else { orient * rho };
            (orient, anchor) = if a_before {
                (j_orient * rho, map.apply(&arc_anchor))
            } else {
                (j_orient, arc_anchor.clone())
            };
            joints.push(Joint { gluing: g, a_before, orient: j_orient, anchor: arc_anchor });
        }
    }
    let end_of = |(strip, side): (StripId, Side)| {
        let end = SideEnd { strip, side };
        match model.side(end) {
            Some(SideSpec::Boundary) => ChainEnd::Boundary { end },
            _ => ChainEnd::Open,
        }
    };
    let first = steps[0];
    let last = *steps.last().expect("steps are nonempty");
    let start = if spans.0 == Span::Full { end_of(first) } else { ChainEnd::Open };
    let finish = if spans.1 == Span::Full { end_of((last.0, opposite(last.1))) } else { ChainEnd::Open };
    let base = ChainBase { origin: q(0), pieces, joints, start, finish };
    base.check(model)?;
    Ok(base)
}

/// Splits the surface along its special leaves. Components are chains of strips joined
/// across non-special arc leaves, each with certificate charts that cover it.
pub fn kaplan_decomposition(model: &StripModel) -> Result<KaplanDecomposition, FibrationError> {
    let graph = build_leaf_space(model);
    let special_ids = special_points(&graph);
    let special_leaves: Vec<LeafDescriptor> =
        special_ids.iter().filter_map(|id| graph.vertex(*id).map(|v| v.leaf.leaf())).collect();
    let special: BTreeSet<GluingId> = special_ids.iter().filter_map(|id| graph.vertex_gluing(*id)).collect();
    let links = Links { model, special };

    let mut seen = BTreeSet::new();
    let mut components = Vec::new();
    for s0 in model.strip_ids() {
        if seen.contains(&s0) {
            continue;
        }
        let (back, _, cyclic) = links.walk(s0, Side::Top);
        let component = if cyclic {
            let (steps, gluings, _) = links.walk(s0, Side::Bottom);
            let cut = chain_from_steps(model, &steps, &gluings[..gluings.len() - 1], (Span::Full, Span::Full))?;
            let mut around = steps.clone();
            around.push(steps[0]);
            let middle = chain_from_steps(model, &around, &gluings, (Span::FromMiddle, Span::ToMiddle))?;
            let last = middle.pieces.last().expect("nonempty");
            let shape = if last.orient == middle.pieces[0].orient {
                ComponentShape::Annulus
            } else {
                ComponentShape::Mobius
            };
            KaplanComponent {
                strips: steps.iter().map(|s| s.0).collect(),
                joints: gluings,
                boundary: Vec::new(),
                shape,
                charts: vec![cut, middle],
            }
        } else {
            let &(first, enter) = back.last().expect("nonempty");
            let (steps, gluings, _) = links.walk(first, opposite(enter));
            let chain = chain_from_steps(model, &steps, &gluings, (Span::Full, Span::Full))?;
            let boundary = [chain.start, chain.finish]
                .into_iter()
                .filter_map(|e| match e {
                    ChainEnd::Boundary { end } => Some(end),
                    ChainEnd::Open => None,
                })
                .collect();
            KaplanComponent {
                strips: steps.iter().map(|s| s.0).collect(),
                joints: gluings,
                boundary,
                shape: ComponentShape::Strip,
                charts: vec![chain],
            }
        };
        seen.extend(component.strips.iter().copied());
        components.push(component);
    }
    Ok(KaplanDecomposition { special_leaves, components })
}

/// A certificate chart seen in its own plane coordinates: the image point `Φ(t, u)` is
/// recorded by its oriented leaf coordinate and base parameter, and leaves are labelled
/// by the model.
pub struct ComponentEvaluator {
    model: StripModel,
    chart: TrivChart,
}

impl ComponentEvaluator {
    pub fn new(model: &StripModel, base: ChainBase) -> Result<Self, FibrationError> {
        let chart = TrivChart::new(model, base, TowerParams::for_model(model))?;
        Ok(ComponentEvaluator { model: model.clone(), chart })
    }

    pub fn chart(&self) -> &TrivChart {
        &self.chart
    }
}

fn exact(x: f64) -> Result<Q, NumericError> {
    from_f64(x).ok_or_else(|| NumericError::InverseFailed(format!("{x} is not finite")))
}

impl EmbeddingEvaluator for ComponentEvaluator {
    fn domain(&self) -> Domain {
        let (lo, hi) = self.chart.v_range();
        let closed = self.chart.base().start_closed() && self.chart.base().finish_closed();
        Domain { t: (f64::NEG_INFINITY, f64::INFINITY), u: (to_f64(&lo), to_f64(&hi)), t_closed: false, u_closed: closed }
    }

    fn eval(&self, t: f64, u: f64) -> Result<PlanePoint, NumericError> {
        self.domain().check(t, u)?;
        let (s, v) = (exact(t)?, exact(u)?);
        let pt = self.chart.eval(&s, &v).map_err(|_| NumericError::OutsideDomain { t, u })?;
        let (v, xt) = self.chart.base().param_of_point(&pt).ok_or(NumericError::OutsideDomain { t, u })?;
        Ok(PlanePoint::new(to_f64(&xt), to_f64(&v)))
    }

    fn inverse(&self, p: PlanePoint) -> Result<(f64, f64), NumericError> {
        let pt = self
            .chart
            .base()
            .point(&exact(p.base)?, &exact(p.fiber)?)
            .ok_or_else(|| NumericError::InverseFailed(format!("({}, {}) off the base", p.fiber, p.base)))?;
        let (s, v) = self.chart.inverse(&pt).map_err(|e| NumericError::InverseFailed(e.to_string()))?;
        Ok((to_f64(&s), to_f64(&v)))
    }

    fn leaf_label(&self, p: &PlanePoint) -> Option<String> {
        let pt = self.chart.base().point(&from_f64(p.base)?, &from_f64(p.fiber)?)?;
        self.model.leaf_of(&pt).ok().map(|leaf| self.model.describe_leaf(&leaf))
    }
}

/// Runs the fibered-homeomorphism check on every certificate chart of every component.
pub fn kaplan_certificates(model: &StripModel, decomposition: &KaplanDecomposition, grid: usize, tol: f64) -> GridReport {
    let mut report = GridReport::new();
    for (k, comp) in decomposition.components.iter().enumerate() {
        for (j, base) in comp.charts.iter().enumerate() {
            let prefix = format!("component{k}/chart{j}/");
            match ComponentEvaluator::new(model, base.clone()) {
                Ok(e) => report.merge(check_fibered_homeo(&e, grid, tol).prefixed(&prefix)),
                Err(e) => report.fail(&format!("{prefix}build"), "chart", e.to_string()),
            }
        }
    }
    report
}
