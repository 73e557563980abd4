//! Desk-scale numerics for Gibbons-Hawking hyperkähler spaces with countably
//! many centers.
//!
//! The crate is organised bottom-up:
//!
//! * [`config`] holds puncture configurations (centers, Chern weights, tail models).
//! * [`potential`] evaluates the harmonic potential and decides summability.
//! * [`geometry`] builds the monopole connection, metric, Kähler forms and
//!   the hyperkähler triple at sample points.
//! * [`directions`] projects the centers along a direction, clusters the
//!   images and runs the spherical-cap measure estimates.
//! * [`entire`] builds Weierstrass products with prescribed zeros.
//! * [`surface`] materialises the hypersurface `u1 u2 = P(u3)`, its chart
//!   atlas, transition cocycle and exceptional chains.

pub mod config;
pub mod directions;
pub mod entire;
mod error;
pub mod geometry;
pub mod potential;
pub mod surface;

pub use config::{Point3, PunctureConfig, TailKind, TailModel};
pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type Complex = num_complex::Complex64;
