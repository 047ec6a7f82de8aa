//! Exact piecewise-linear interval dynamics.
//!
//! Computes rigorous topological-entropy brackets (lap-number and Lipschitz
//! upper bounds, horseshoe lower bounds), crossing/variation/Lipschitz rate
//! sequences, periodic-orbit inventories with Sharkovsky checks, and the
//! depth-width bounds relating ReLU-style networks to the entropy of the
//! maps they approximate. All map arithmetic is over exact rationals.

pub mod analysis;
pub mod catalog;
pub mod entropy;
pub mod error;
pub mod network;
pub mod periods;
pub mod pwl;
pub mod rational;
pub mod report;

pub use error::{Error, Result};
pub use pwl::{Homeomorphism, PwlMap};
pub use rational::Rational;
