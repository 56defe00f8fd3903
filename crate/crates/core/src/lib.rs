//! Leaf spaces of striped foliated surfaces and constructive certificates that the
//! leaf-space projection is a locally trivial fibration with fiber ℝ.
//!
//! * [`model`]: exact-rational striped models, validation, saturation, doubling.
//! * [`leafspace`]: the non-Hausdorff leaf space, special points, hypothesis checks.
//! * [`fibration`]: cross sections, parallel section towers, trivializing charts and
//!   atlases, strip decompositions.
//! * [`numeric`]: floating-point kernels for graph straightening, chart normalization
//!   and concatenation, partition-of-unity gluing, and grid verification.
//! * [`cli`]: the `foliate` command-line front end.

pub mod cli;
pub mod fibration;
pub mod fixtures;
pub mod leafspace;
pub mod model;
pub mod numeric;
pub mod rational;
