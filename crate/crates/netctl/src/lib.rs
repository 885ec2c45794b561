//! Target control of linear dynamical networks.
//!
//! Builds weighted directed networks (scale-free static model, Erdos-Renyi
//! limit, or real edge lists), selects driver nodes that guarantee
//! controllability, synthesizes minimum-energy and finite-horizon
//! linear-quadratic control inputs for arbitrary target subsets, and measures
//! how the worst-case control energy scales with the targeted fraction of the
//! network. Gramian spectra are computed in configurable-digit extended
//! precision so that energies spanning many orders of magnitude stay
//! resolvable.

pub mod ctrlcfg;
pub mod error;
pub mod gramian;
pub mod netgen;
pub mod linalg;
pub mod lqcontrol;
pub mod minenergy;
pub mod mp;
pub mod ode;
pub mod quad;
pub mod scaling;
pub mod rng;

pub use error::{Error, Result};
