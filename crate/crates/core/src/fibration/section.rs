use serde::Serialize;

use super::chain::ChainBase;
use super::chart::{TowerParams, TrivChart};
use super::{ChainEnd, FibrationError};
use crate::model::{is_properly_embedded, LeafDescriptor, ModelPoint, SideEnd, StripModel};
use crate::rational::{fmt_q, half, max_q, min_q, q, Q};

/// A transversal `v ↦ Φ(s, v)`: the level-`s` section of a chart over the chart's base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossSection {
    chart: TrivChart,
    fiber: Q,
}

impl CrossSection {
    pub fn chart(&self) -> &TrivChart {
        &self.chart
    }

    pub fn fiber(&self) -> &Q {
        &self.fiber
    }

    pub fn base(&self) -> &ChainBase {
        self.chart.base()
    }

    pub fn point(&self, v: &Q) -> Result<ModelPoint, FibrationError> {
        self.chart.eval(&self.fiber, v)
    }

    /// Leaf coordinate of the section on `leaf`, if the section meets it.
    pub fn meets(&self, model: &StripModel, leaf: &LeafDescriptor) -> Option<Q> {
        let v = self.base().param_of_leaf(model, leaf)?;
        if !self.base().contains_v(&v) {
            return None;
        }
        self.point(&v).ok().map(|pt| pt.leaf_coordinate().clone())
    }
}

/// The chain base of the elementary chart around `leaf`.
pub fn base_for_leaf(model: &StripModel, leaf: &LeafDescriptor, collar: &Q) -> Result<ChainBase, FibrationError> {
    model.check_leaf(leaf)?;
    Ok(match leaf {
        LeafDescriptor::Interior { strip, y } => {
            let w = min_q(&min_q(collar, y), &(q(1) - y));
            ChainBase::slab(*strip, y - &w, y + &w, ChainEnd::Open, ChainEnd::Open)
        }
        LeafDescriptor::Arc { gluing } => ChainBase::vertex(model, *gluing, collar)?,
        LeafDescriptor::Boundary { strip, side } => ChainBase::boundary(SideEnd { strip: *strip, side: *side }, collar),
    })
}

/// A cross section through `leaf`: a vertical segment through `x₀` inside a strip, or a
/// segment crossing an arc or leaving a boundary line, with `x₀` the centre of the leaf's
/// parameter interval.
pub fn cross_section_through(model: &StripModel, leaf: &LeafDescriptor) -> Result<CrossSection, FibrationError> {
    let cert = is_properly_embedded(model, leaf)?;
    if !cert.holds() {
        return Err(FibrationError::NotProperlyEmbedded(model.describe_leaf(leaf)));
    }
    let params = TowerParams::for_model(model);
    let base = base_for_leaf(model, leaf, &params.collar)?;
    Ok(CrossSection { chart: TrivChart::new(model, base, params)?, fiber: q(0) })
}

/// The level-`s` section of a chart.
pub fn section_from_chart(chart: &TrivChart, s: Q) -> Result<CrossSection, FibrationError> {
    let limit = q(1 << 62);
    if s >= limit || s <= -limit {
        return Err(FibrationError::FiberOutOfRange(fmt_q(&s)));
    }
    Ok(CrossSection { chart: chart.clone(), fiber: s })
}

/// The bi-infinite family `γ_i`, generated lazily from its chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionTower {
    chart: TrivChart,
}

impl SectionTower {
    pub fn section(&self, i: i64) -> CrossSection {
        CrossSection { chart: self.chart.clone(), fiber: q(i) }
    }

    pub fn level(&self, i: i64, v: &Q) -> Option<Q> {
        self.chart.level(i, v)
    }

    pub fn params(&self) -> &TowerParams {
        self.chart.params()
    }

    pub fn chart(&self) -> &TrivChart {
        &self.chart
    }

    pub fn into_chart(self) -> TrivChart {
        self.chart
    }
}

/// Grows the tower of parallel sections around a seed section.
pub fn parallel_tower(model: &StripModel, seed: &CrossSection, params: TowerParams) -> Result<SectionTower, FibrationError> {
    if seed.fiber != q(0) {
        return Err(FibrationError::InvalidSeed(format!("seed sits at level {}", fmt_q(&seed.fiber))));
    }
    let params = TowerParams::new(params.spacing, params.collar)?;
    Ok(SectionTower { chart: TrivChart::new(model, seed.base().clone(), params)? })
}

/// Runs section, tower and assembly for a leaf with default parameters.
pub fn trivialize_leaf_neighborhood(model: &StripModel, leaf: &LeafDescriptor) -> Result<TrivChart, FibrationError> {
    trivialize_with(model, leaf, TowerParams::for_model(model))
}

/// [`trivialize_leaf_neighborhood`] with explicit tower parameters. The collar of the
/// parameters also sets the depth of the section.
pub fn trivialize_with(model: &StripModel, leaf: &LeafDescriptor, params: TowerParams) -> Result<TrivChart, FibrationError> {
    let cert = is_properly_embedded(model, leaf)?;
    if !cert.holds() {
        return Err(FibrationError::NotProperlyEmbedded(model.describe_leaf(leaf)));
    }
    let params = TowerParams::new(params.spacing, params.collar)?;
    let seed = CrossSection { chart: TrivChart::new(model, base_for_leaf(model, leaf, &params.collar)?, params.clone())?, fiber: q(0) };
    Ok(parallel_tower(model, &seed, params)?.into_chart())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailSide {
    Left,
    Right,
}

/// The closed half-leaf beyond `cutoff` in leaf coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HalfLeafTail {
    pub leaf: LeafDescriptor,
    pub side: TailSide,
    #[serde(with = "crate::rational::q_string")]
    pub cutoff: Q,
}

impl HalfLeafTail {
    pub fn contains(&self, x: &Q) -> bool {
        match self.side {
            TailSide::Left => x <= &self.cutoff,
            TailSide::Right => x >= &self.cutoff,
        }
    }
}

/// The two closed tails of `leaf` beyond every point where the sections meet it, pushed
/// out by the tower spacing. A cutoff that would pass a finite end of the leaf is placed
/// halfway between the outermost section point and that end instead.
pub fn half_leaf_tails(
    model: &StripModel,
    sections: &[CrossSection],
    leaf: &LeafDescriptor,
) -> Result<(HalfLeafTail, HalfLeafTail), FibrationError> {
    let first = sections.first().ok_or(FibrationError::EmptyFamily)?;
    let hits: Vec<Q> = sections.iter().filter_map(|s| s.meets(model, leaf)).collect();
    let (Some(lo), Some(hi)) = (hits.iter().min(), hits.iter().max()) else {
        return Err(FibrationError::LeafNotMet(model.describe_leaf(leaf)));
    };
    let margin = &first.chart.params().spacing;
    let interval = model.leaf_interval(leaf)?;
    let mut left = lo - margin;
    if let Some(end) = interval.lo.finite() {
        if left <= *end {
            left = (end + lo) * half();
        }
    }
    let mut right = hi + margin;
    if let Some(end) = interval.hi.finite() {
        if right >= *end {
            right = (end + hi) * half();
        }
    }
    debug_assert!(left == min_q(&left, lo) && right == max_q(&right, hi));
    Ok((
        HalfLeafTail { leaf: leaf.clone(), side: TailSide::Left, cutoff: left },
        HalfLeafTail { leaf: leaf.clone(), side: TailSide::Right, cutoff: right },
    ))
}
