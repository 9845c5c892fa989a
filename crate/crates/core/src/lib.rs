pub mod alignment;
pub mod classes;
pub mod cli;
pub mod cloud;
pub mod config;
pub mod crossmodal;
pub mod evaluation;
pub mod geometry;
pub mod io;
pub mod mask;
pub mod semantic_map;
pub mod solver;
pub mod synth;
