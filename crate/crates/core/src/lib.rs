//! Multi-agent beam-search tracking at desk scale.
//!
//! The library implements a full tracking-by-detection loop on a synthetic
//! environment: a proposal generator with controllable occlusion and
//! distractors ([`env`]), a bidirectional recurrent state encoder
//! ([`encoder`]), a chain of actor-critic agents that each pick one proposal
//! per frame ([`agents`]), PPO training for the whole stack ([`ppo`]),
//! greedy / naive-beam / multi-agent tracking strategies ([`track`]), and an
//! evaluation toolkit with an ablation runner ([`eval`]).
//!
//! Everything learnable is built on a small f64 reverse-mode tape ([`math`])
//! so analytic gradients can be checked against central finite differences
//! ([`gradsuite`]).

pub mod agents;
pub mod checkpoint;
pub mod config;
pub mod encoder;
pub mod env;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod gradsuite;
pub mod math;
pub mod model;
pub mod ppo;
pub mod track;

pub use error::{CoreError, Result};
