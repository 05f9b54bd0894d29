//! A desk-scale laboratory for algorithmic information dynamics.
//!
//! The crate builds everything on one concrete reference machine
//! ([`refmachine`]): complexity estimators ([`complexity`]), finite
//! deterministic dynamical systems ([`dynsys`]), algorithmic perturbations
//! ([`perturb`]), formal observers and emergence verdicts ([`observer`]),
//! and the two open-ended models ([`evomodel`], [`algonet`]), plus the
//! coupled-automata detectors ([`ueinn`]) and the experiment driver
//! ([`labctl`]).

pub mod algonet;
pub mod bits;
pub mod complexity;
pub mod dynsys;
pub mod error;
pub mod evomodel;
pub mod labctl;
pub mod observer;
pub mod perturb;
pub mod refmachine;
pub mod seeds;
pub mod ueinn;

pub use bits::Bits;
pub use error::{LabError, Result};
