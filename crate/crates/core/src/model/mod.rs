//! Boxes, potentials and the lattice algebra.

pub mod cosine;
pub mod directional;
pub mod geometry;
pub mod potential;

pub use cosine::{build_potential, CosineSpec, CosineTerm};
pub use directional::{
    directional_decomposition, reduce_potential, reflect_potential, DirectionalComponent,
};
pub use geometry::{irrationality_scan, Bc, BoxProblem, IrrationalityReport};
pub use potential::TrigPotential;
