//! Toolkit for spatio-temporal task specifications over 2D disk scenes.
//!
//! The crate is organized around a small formula calculus ([`formula`]) whose
//! atoms are geometric relations between disk-shaped objects. On top of it sit:
//!
//! - [`scene`] / [`monitor`] — trajectory data and quantitative robustness
//!   evaluation (signed satisfaction margins, min/max temporal semantics),
//! - [`render`] — a deterministic controlled-English realization of formulas
//!   and its inverse parser, suitable for exact round-tripping,
//! - [`hlt`] — hierarchical logical trees that decompose an instruction into
//!   span-aligned subformulas, with composition back to a flat formula,
//! - [`datagen`] — a seeded, reproducible generator of formula/text corpora,
//! - [`rollout`] — scoring and selection of candidate trajectories against a
//!   specification,
//! - [`gateway`] — the language-service boundary (paraphrasing, span/formula
//!   alignment checking) with a deterministic offline mock.

pub mod datagen;
pub mod fixtures;
pub mod formula;
pub mod gateway;
pub mod hlt;
pub mod monitor;
pub mod render;
pub mod rollout;
pub mod scene;

pub use formula::{parse_formula, serialize_formula, Formula, Ident, Interval, SpatialAtom};
pub use monitor::{robustness_at, robustness_trace, satisfies, RobustnessTrace};
pub use render::{parse_controlled_english, render_canonical, CanonicalText, RenderOptions};
pub use scene::{DiskObject, SceneState, Trajectory};
