//! Numerical substrate: parameter arrays, a reverse-mode tape, dense and
//! gated recurrent layers, finite-difference checking, an adaptive first-order
//! optimizer, and a seeded deterministic generator.

pub mod adam;
pub mod dense;
pub mod gradcheck;
pub mod gru;
pub mod params;
pub mod rng;
pub mod tape;

pub use adam::Adam;
pub use dense::DenseLayer;
pub use gradcheck::{grad_check, DEFAULT_EPS};
pub use gru::GruCellParams;
pub use params::{ParamArray, ParamId, ParamStore};
pub use rng::Rng;
pub use tape::{Gradients, NodeId, Tape};
