//! Closed-form quantum Cramér-Rao bounds for transmission and phase
//! estimation with coherent and bright two-mode squeezed probes, plus the
//! reference-loss factor and the quantum enhancement factor.
//!
//! All bounds are variances; sensitivity pipelines invert them. `N` is the
//! mean photon number incident on the sensor, the resource held fixed in
//! every comparison.

use crate::error::{Error, Result};
use crate::gaussian::{Estimand, LossBudget};

/// Probe state family entering a bound query.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Probe {
    Coherent,
    /// Bright two-mode squeezed state with squeezing parameter `s`.
    Btmss { s: f64 },
}

impl Probe {
    pub fn squeezing(&self) -> f64 {
        match self {
            Probe::Coherent => 0.0,
            Probe::Btmss { s } => *s,
        }
    }
}

/// A fully specified bound evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery {
    pub estimand: Estimand,
    pub probe: Probe,
    /// Sensor intensity transmission.
    pub t: f64,
    /// Mean photons incident on the sensor.
    pub n: f64,
    pub losses: LossBudget,
}

impl BoundQuery {
    pub fn new(estimand: Estimand, probe: Probe, t: f64, n: f64, losses: LossBudget) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfRange { name: "t", value: t, range: "[0, 1]" });
        }
        if !(n > 0.0) {
            return Err(Error::OutOfRange { name: "n", value: n, range: "(0, inf)" });
        }
        if probe.squeezing() < 0.0 {
            return Err(Error::OutOfRange { name: "s", value: probe.squeezing(), range: "[0, inf)" });
        }
        Ok(Self { estimand, probe, t, n, losses })
    }

    /// Evaluates the bound matching the query's estimand and probe.
    pub fn evaluate(&self) -> f64 {
        match (self.estimand, self.probe) {
            (Estimand::Transmission, Probe::Coherent) => qcrb_transmission_coherent(self),
            (Estimand::Transmission, Probe::Btmss { .. }) => qcrb_transmission_btmss(self),
            (Estimand::Phase, Probe::Coherent) => qcrb_phase_coherent(self),
            (Estimand::Phase, Probe::Btmss { .. }) => qcrb_phase_btmss(self),
        }
    }
}

/// Reference-loss factor `(2η_r−1)[1+2sinh²s] / (1+2η_r sinh²s)`.
///
/// Negative for `η_r < 1/2`, where the squeezed probe loses to the coherent
/// one.
pub fn d_r(eta_r: f64, s: f64) -> f64 {
    let sh2 = s.sinh().powi(2);
    (2.0 * eta_r - 1.0) * (1.0 + 2.0 * sh2) / (1.0 + 2.0 * eta_r * sh2)
}

/// Transmission bound for the squeezed probe:
/// `T/(η_p2 N) − (T²/N) η_p1 D_r [1−sech 2s]`.
pub fn qcrb_transmission_btmss(q: &BoundQuery) -> f64 {
    let s = q.probe.squeezing();
    let corr = d_r(q.losses.eta_r, s) * (1.0 - 1.0 / (2.0 * s).cosh());
    q.t / (q.losses.eta_p2 * q.n) - q.t * q.t / q.n * q.losses.eta_p1 * corr
}

/// Phase bound for the squeezed probe:
/// `1/(4Tη_p2N) − (1/4N) η_p1 D_r [1−sech 2s]`; `+inf` at `T = 0`.
pub fn qcrb_phase_btmss(q: &BoundQuery) -> f64 {
    if q.t == 0.0 {
        return f64::INFINITY;
    }
    let s = q.probe.squeezing();
    let corr = d_r(q.losses.eta_r, s) * (1.0 - 1.0 / (2.0 * s).cosh());
    1.0 / (4.0 * q.t * q.losses.eta_p2 * q.n) - q.losses.eta_p1 * corr / (4.0 * q.n)
}

/// Coherent (shot-noise-limit) transmission bound `T/(η_p2 N)`.
pub fn qcrb_transmission_coherent(q: &BoundQuery) -> f64 {
    q.t / (q.losses.eta_p2 * q.n)
}

/// Coherent (shot-noise-limit) phase bound `1/(4Tη_p2N)`; `+inf` at `T = 0`.
pub fn qcrb_phase_coherent(q: &BoundQuery) -> f64 {
    if q.t == 0.0 {
        return f64::INFINITY;
    }
    1.0 / (4.0 * q.t * q.losses.eta_p2 * q.n)
}

/// Quantum enhancement factor, identical for both estimands:
/// `{1 − Tη_p1η_p2 D_r [1−sech 2s]}⁻¹`.
pub fn qef(t: f64, s: f64, losses: &LossBudget) -> f64 {
    let corr = d_r(losses.eta_r, s) * (1.0 - 1.0 / (2.0 * s).cosh());
    1.0 / (1.0 - t * losses.eta_p1 * losses.eta_p2 * corr)
}

/// Intensity-difference squeezing level in dB, `10 log10(sech 2s)`.
pub fn squeezing_db(s: f64) -> f64 {
    10.0 * (1.0 / (2.0 * s).cosh()).log10()
}
