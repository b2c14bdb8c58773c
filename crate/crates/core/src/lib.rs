//! Learning human-inspired contact search strategies from demonstrations.
//!
//! The crate is `no_std` (with `alloc`) and holds the numerical pipeline:
//! fitting an exploration distribution and a location-invariant dynamics
//! model from demonstrations, planning covering search trajectories
//! (sampled TSP itineraries or ergodic optimization), predicting
//! feed-forward wrenches along them, and executing the result with an
//! impedance controller in a quasi-static contact simulator.
//!
//! File formats, the command line and the experiment harness live in the
//! `hisearch` crate.

#![no_std]

extern crate alloc;

pub mod controller;
pub mod demo;
pub mod dynamics;
pub mod ergodic;
mod error;
pub mod gaussian;
pub mod math;
pub mod rng;
pub mod synth;
pub mod trajectory;
pub mod tshix;
pub mod world;
pub mod ziggurat;

pub use error::{Error, Result};
pub use nalgebra::{DMatrix, DVector};
