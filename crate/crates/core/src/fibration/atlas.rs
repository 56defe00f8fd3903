use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::chain::{ChainBase, ChainEnd};
use super::chart::{ChartSpec, TowerParams, TrivChart};
use super::section::trivialize_with;
use super::verify::{rational_grid, verify_trivialization};
use super::FibrationError;
use crate::model::{GluingId, LeafDescriptor, Side, SideEnd, SideSpec, StripId, StripModel, VertexLeaf};
use crate::numeric::GridReport;
use crate::rational::{fmt_q, half, q, Q};

pub const ATLAS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChartKind {
    Slab { strip: StripId },
    Vertex { label: String, gluing: GluingId },
    Boundary { label: String, end: SideEnd },
}

/// What the chart's base interval is homeomorphic to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YTarget {
    Line,
    HalfLine,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtlasChart {
    pub kind: ChartKind,
    pub y_target: YTarget,
    pub chart: TrivChart,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrivAtlas {
    pub model: StripModel,
    pub charts: Vec<AtlasChart>,
}

#[derive(Serialize, Deserialize)]
struct AtlasChartJson {
    #[serde(flatten)]
    kind: ChartKind,
    y_target: YTarget,
    #[serde(with = "crate::rational::q_pair")]
    y_interval: (Q, Q),
    saturation: String,
    spec: ChartSpec,
}

#[derive(Serialize, Deserialize)]
struct AtlasJson {
    version: u32,
    model: String,
    charts: Vec<AtlasChartJson>,
}

impl TrivAtlas {
    pub fn to_json(&self) -> String {
        let charts = self
            .charts
            .iter()
            .map(|c| AtlasChartJson {
                kind: c.kind.clone(),
                y_target: c.y_target,
                y_interval: c.chart.v_range(),
                saturation: c.chart.saturation().describe(&self.model),
                spec: c.chart.spec(),
            })
            .collect();
        let model = self.model.to_string();
        serde_json::to_string_pretty(&AtlasJson { version: ATLAS_SCHEMA_VERSION, model, charts }).expect("atlas serializes")
    }

    /// Rebuilds an atlas from its JSON form. The embedded model is parsed and validated,
    /// and chart data is re-derived from it.
    pub fn from_json(text: &str) -> Result<TrivAtlas, FibrationError> {
        let parsed: AtlasJson = serde_json::from_str(text).map_err(|e| FibrationError::InvalidAtlas(e.to_string()))?;
        if parsed.version != ATLAS_SCHEMA_VERSION {
            return Err(FibrationError::InvalidAtlas(format!("unsupported version {}", parsed.version)));
        }
        let model = &StripModel::load(&parsed.model).map_err(|e| FibrationError::InvalidAtlas(e.to_string()))?;
        let charts = parsed
            .charts
            .into_iter()
            .map(|c| {
                Ok(AtlasChart { kind: c.kind, y_target: c.y_target, chart: TrivChart::from_spec(model, c.spec)? })
            })
            .collect::<Result<_, FibrationError>>()?;
        Ok(TrivAtlas { model: model.clone(), charts })
    }
}

/// One slab chart per strip over heights `(δ, 1 − δ)` with `δ = ε/2`, extended to the
/// side at open sides; one chart per arc leaf; one half-open chart per boundary leaf.
pub fn build_atlas(model: &StripModel) -> Result<TrivAtlas, FibrationError> {
    build_atlas_with(model, TowerParams::for_model(model))
}

/// [`build_atlas`] with explicit tower spacing and collar.
pub fn build_atlas_with(model: &StripModel, params: TowerParams) -> Result<TrivAtlas, FibrationError> {
    let params = TowerParams::new(params.spacing, params.collar)?;
    let delta = &params.collar * half();
    let mut charts = Vec::new();
    for s in model.strip_ids() {
        let open = |side| matches!(model.side(SideEnd { strip: s, side }), Some(SideSpec::Open));
        let lo = if open(Side::Bottom) { q(0) } else { delta.clone() };
        let hi = if open(Side::Top) { q(1) } else { q(1) - &delta };
        let base = ChainBase::slab(s, lo, hi, ChainEnd::Open, ChainEnd::Open);
        charts.push(AtlasChart {
            kind: ChartKind::Slab { strip: s },
            y_target: YTarget::Line,
            chart: TrivChart::new(model, base, params.clone())?,
        });
    }
    for g in model.gluing_ids() {
        let chart = trivialize_with(model, &LeafDescriptor::Arc { gluing: g }, params.clone())?;
        charts.push(AtlasChart {
            kind: ChartKind::Vertex { label: format!("g{}", g.0), gluing: g },
            y_target: YTarget::Line,
            chart,
        });
    }
    for end in model.boundary_ends() {
        let leaf = LeafDescriptor::Boundary { strip: end.strip, side: end.side };
        let chart = trivialize_with(model, &leaf, params.clone())?;
        let label = format!("{}.{}", model.strip_name(end.strip), end.side);
        charts.push(AtlasChart { kind: ChartKind::Boundary { label, end }, y_target: YTarget::HalfLine, chart });
    }
    Ok(TrivAtlas { model: model.clone(), charts })
}

fn check_transition(model: &StripModel, from: &TrivChart, to: &TrivChart, grid: usize, report: &mut GridReport) {
    let target = to.saturation();
    let (lo, hi) = from.v_range();
    let vs = rational_grid(&lo, &hi, grid, from.base().start_closed(), from.base().finish_closed());
    let fibers = rational_grid(&q(-5), &q(5), grid, true, true);
    for v in &vs {
        let Some(leaf) = from.leaf_at(v) else { continue };
        if !target.contains_leaf(&leaf) {
            continue;
        }
        let mut prev: Option<Q> = None;
        let mut sign = 0;
        for s in &fibers {
            let at = || format!("(s={}, v={})", fmt_q(s), fmt_q(v));
            let Ok(pt) = from.eval(s, v) else { continue };
            let Ok((s2, v2)) = to.inverse(&pt) else {
                report.fail("transition_exact", at(), format!("{pt} not covered by the target chart"));
                continue;
            };
            let back = to.eval(&s2, &v2);
            report.record("transition_exact", back.as_ref().is_ok_and(|p| *p == pt), at, || format!("{back:?}"));
            let same = to.leaf_at(&v2).as_ref() == Some(&leaf) && model.leaf_of(&pt).ok().as_ref() == Some(&leaf);
            report.record("transition_leaf", same, at, || format!("base {} lands on another leaf", fmt_q(&v2)));
            if let Some(p) = &prev {
                let step = if s2 > *p { 1 } else if s2 < *p { -1 } else { 0 };
                let ok = step != 0 && (sign == 0 || step == sign);
                report.record("transition_monotone", ok, at, || "fiber map not strictly monotone".to_string());
                sign = step;
            }
            prev = Some(s2);
        }
    }
}

/// Verifies every chart of the atlas, that the chart bases cover every sampled point of
/// the leaf space, and that transitions between overlapping charts preserve fibers.
pub fn verify_atlas(atlas: &TrivAtlas, grid: usize) -> GridReport {
    let mut report = GridReport::new();
    for (k, c) in atlas.charts.iter().enumerate() {
        report.merge(verify_trivialization(&atlas.model, &c.chart, grid).prefixed(&format!("chart{k}/")));
    }
    report.merge(verify_atlas_cover(atlas, grid));
    report
}

/// The atlas-level part of [`verify_atlas`]: base shapes, coverage of the leaf space, and
/// transitions (sampled on at most 21 × 21 points per chart pair).
pub fn verify_atlas_cover(atlas: &TrivAtlas, grid: usize) -> GridReport {
    let model = &atlas.model;
    let mut report = GridReport::new();
    for (k, c) in atlas.charts.iter().enumerate() {
        let (lo, hi) = c.chart.v_range();
        let closed = (c.chart.base().start_closed(), c.chart.base().finish_closed());
        let ok = match c.y_target {
            YTarget::Line => !closed.0 && !closed.1,
            YTarget::HalfLine => closed.0 != closed.1,
        };
        report.record(
            "y_chart",
            ok && lo < hi,
            || format!("chart{k}"),
            || format!("base ({}, {}) does not match {:?}", fmt_q(&lo), fmt_q(&hi), c.y_target),
        );
    }
    report.declare("y_cover");
    let sats: Vec<_> = atlas.charts.iter().map(|c| c.chart.saturation()).collect();
    let covered = |leaf: &LeafDescriptor| sats.iter().any(|s| s.contains_leaf(leaf));
    for s in model.strip_ids() {
        let mut heights = rational_grid(&q(0), &q(1), grid.max(3), false, false);
        for k in 1..=30 {
            let tiny = q(1) / crate::rational::pow2(k);
            heights.push(tiny.clone());
            heights.push(q(1) - tiny);
        }
        for y in heights {
            let leaf = LeafDescriptor::Interior { strip: s, y: y.clone() };
            report.record("y_cover", covered(&leaf), || model.describe_leaf(&leaf), || "no chart".to_string());
        }
    }
    let vertices: BTreeSet<VertexLeaf> = model
        .gluing_ids()
        .map(|gluing| VertexLeaf::Arc { gluing })
        .chain(model.boundary_ends().into_iter().map(|end| VertexLeaf::Boundary { end }))
        .collect();
    for v in vertices {
        let leaf = v.leaf();
        report.record("y_cover", covered(&leaf), || model.describe_leaf(&leaf), || "no chart".to_string());
    }
    let tgrid = grid.clamp(3, 21);
    for (i, a) in atlas.charts.iter().enumerate() {
        for (j, b) in atlas.charts.iter().enumerate() {
            if i != j && sats[i].intersects(&sats[j]) {
                let mut r = GridReport::new();
                check_transition(model, &a.chart, &b.chart, tgrid, &mut r);
                report.merge(r.prefixed(&format!("chart{i}->chart{j}/")));
            }
        }
    }
    report
}
