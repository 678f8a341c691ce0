//! Cavity optomechanics with a phase-diffusing drive laser.
//!
//! The library computes how a finite laser linewidth changes radiation-
//! pressure back-action on a mechanical oscillator coupled to a driven
//! cavity: the optical damping rate and spring shift, the occupation noise
//! spectrum and the minimum phonon number reachable by sideband cooling, and
//! the heating of the measured quadrature in a back-action-evading
//! modulated-drive measurement. A stochastic time-domain integrator provides
//! an independent check of the closed forms.

pub mod analytics;
pub mod cli;
pub mod error;
pub mod langevin;
pub mod quad;
pub mod quadratures;
pub mod spectrum;
pub mod system;
pub mod validate;

pub use error::{Error, Result};
pub use system::SystemParams;
