//! Analysis pipeline for a Bazykin-type prey-predator model with group defense
//! and repellent prey-taxis.
//!
//! The crate covers the temporal model (equilibria, local and global
//! bifurcations, long transients), the linear spatial analysis (dispersion
//! relation, Turing threshold), a weakly nonlinear amplitude expansion at the
//! Turing point, and a 1-D method-of-lines solver for the full
//! reaction-diffusion-taxis system.

pub mod error;
pub mod linalg;
pub mod kinetics;
pub mod equilibria;
pub mod ode;
pub mod bifurcation;
pub mod integrate;
pub mod cycles;
pub mod spatial;
pub mod pde;
pub mod wna;

pub use error::{Error, Result};
pub use kinetics::{Params, State};
