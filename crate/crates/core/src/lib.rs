//! Self-avoiding walk bounds from graph height functions.

pub mod graphs;
pub mod heights;
pub mod linalg;
pub mod locality;
pub mod presentations;
pub mod presets;
pub mod saw;
