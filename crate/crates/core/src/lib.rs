//! Finite-element simulator for a Cahn–Hilliard phase field coupled to
//! quasi-static linear elasticity and a reaction–diffusion nutrient.

pub mod assembly;
pub mod cli;
pub mod diagnostics;
pub mod elasticity;
pub mod experiments;
pub mod grid;
pub mod linalg;
pub mod materials;
pub mod steppers;
pub mod tensor;
