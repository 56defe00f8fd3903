//! Reference models shipped with the crate.

use crate::model::StripModel;

pub const M0: &str = include_str!("../fixtures/m0.model");
pub const M1: &str = include_str!("../fixtures/m1.model");
pub const M2: &str = include_str!("../fixtures/m2.model");
pub const M3: &str = include_str!("../fixtures/m3.model");
/// Deliberately invalid (overlapping arcs).
pub const M4: &str = include_str!("../fixtures/m4.model");

pub const ALL: [&str; 5] = [M0, M1, M2, M3, M4];

/// The valid fixtures by name.
pub const VALID: [(&str, &str); 4] = [("M0", M0), ("M1", M1), ("M2", M2), ("M3", M3)];

/// Loads a valid fixture by name. Panics on unknown names or invalid fixtures.
pub fn model(name: &str) -> StripModel {
    let text = VALID
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|(_, t)| *t)
        .unwrap_or_else(|| panic!("unknown fixture {name}"));
    StripModel::load(text).expect("fixture is valid")
}

/// Source text of any fixture, including the invalid `M4`, by case-insensitive name.
pub fn source(name: &str) -> Option<&'static str> {
    VALID.iter().chain([("M4", M4)].iter()).find(|(n, _)| n.eq_ignore_ascii_case(name)).map(|(_, t)| *t)
}
