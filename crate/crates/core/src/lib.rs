//! Spectral convex-integration engine for approximate dissipative Euler
//! flows on the 3-torus.

pub mod beltrami;
pub mod calculus;
pub mod diagnostics;
pub mod fft;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod lattice;
pub mod linalg;
pub mod operators;
pub mod partition;
pub mod profile;
pub mod stage;
