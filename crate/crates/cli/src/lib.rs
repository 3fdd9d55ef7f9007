//! Command-line front end for the navigation simulator: scenario lookup,
//! single and comparative runs, trajectory CSV emission, and SVG plots.
//!
//! The binary (`nav`) is a thin wrapper over [`commands`]; everything with
//! behavior worth testing lives in the library.

pub mod commands;
pub mod csv;
pub mod resolve;
pub mod svg;
