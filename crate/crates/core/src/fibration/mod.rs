//! Trivializing charts for the leaf-space projection: cross sections through leaves,
//! towers of parallel sections, the charts they assemble into, atlases, and the
//! decomposition into strip components.

mod atlas;
mod chain;
mod chart;
mod kaplan;
mod section;
mod verify;

use thiserror::Error;

use crate::model::ModelError;

pub use atlas::{build_atlas, build_atlas_with, verify_atlas, verify_atlas_cover, AtlasChart, ChartKind, TrivAtlas, YTarget, ATLAS_SCHEMA_VERSION};
pub use chain::{ChainBase, ChainEnd, Joint, JointData, Location, Piece};
pub use kaplan::{
    kaplan_certificates, kaplan_decomposition, ComponentEvaluator, ComponentShape, KaplanComponent, KaplanDecomposition,
};
pub use chart::{ChartSpec, TowerParams, TrivChart};
pub use verify::{rational_grid, verify_involution, verify_trivialization, EXHAUSTION_BOUND, FIBER_SPAN};
pub use section::{
    base_for_leaf, cross_section_through, half_leaf_tails, parallel_tower, section_from_chart,
    trivialize_leaf_neighborhood, trivialize_with, CrossSection, HalfLeafTail, SectionTower, TailSide,
};

#[derive(Debug, Error)]
pub enum FibrationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("tower parameters must be positive: {0}")]
    NonPositiveParams(String),
    #[error("base parameter {0} outside the chart base")]
    OutsideBase(String),
    #[error("point {0} is not covered by the chart")]
    NotOnChart(String),
    #[error("fiber coordinate {0} out of range")]
    FiberOutOfRange(String),
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("leaf {0} is not properly embedded")]
    NotProperlyEmbedded(String),
    #[error("no section meets leaf {0}")]
    LeafNotMet(String),
    #[error("empty section family")]
    EmptyFamily,
    #[error("invalid seed section: {0}")]
    InvalidSeed(String),
    #[error("invalid atlas: {0}")]
    InvalidAtlas(String),
}
