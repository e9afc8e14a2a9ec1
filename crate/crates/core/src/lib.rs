//! Quantum-limited sensitivity bounds for optical resonance sensors.
//!
//! The crate models a two-mode Gaussian probe (coherent or bright two-mode
//! squeezed) sent through a resonant sensor, and computes:
//!
//! - quantum Cramér-Rao bounds on transmission and phase estimation for
//!   arbitrary sensor transmission and external losses ([`bounds`]), checked
//!   against a first-principles Gaussian-state oracle ([`gaussian`]);
//! - sensor transfer functions — Lorentzian, Butterworth, and tabulated —
//!   with minimum-phase response reconstruction ([`lineshape`]);
//! - sensitivity-per-photon curves, optimal operating wavelengths, the
//!   phase-vs-transmission figure of merit, and quantum-enhancement loss
//!   sweeps ([`sensitivity`]);
//! - an optimized dual-homodyne measurement model that saturates the bounds
//!   ([`homodyne`]).

pub mod bounds;
pub mod error;
pub mod gaussian;
pub mod homodyne;
pub mod lineshape;
pub mod numerics;
pub mod sensitivity;

pub use bounds::{BoundQuery, Probe};
pub use error::{Error, Result};
pub use gaussian::{Estimand, GaussianState, LossBudget, ProbeSpec};
pub use lineshape::{Family, LineshapeSpec, TransferModel};
pub use sensitivity::{SensitivityQuery, SensitivityResult};
