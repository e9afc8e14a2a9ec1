//! First-principles two-mode Gaussian state engine.
//!
//! States are carried in the complex (annihilation/creation) representation:
//! a displacement vector `d = <(a_p, a_r, a_p†, a_r†)>` and the 4x4 covariance
//! matrix `sigma_ij = <A_i A_j† + A_j† A_i> - 2 <A_i><A_j†>`. Vacuum has
//! `d = 0`, `sigma = I`. The mode ordering `(p, r, p†, r†)` is the wire
//! contract for everything downstream.
//!
//! Channels (displacement, two-mode squeezing, pure loss, phase rotation) are
//! pure functions returning new states, so sweeps can evaluate concurrently.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MODE_PROBE: usize = 0;
pub const MODE_REFERENCE: usize = 1;

/// Which of the two optical modes a channel acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Probe,
    Reference,
}

impl Mode {
    fn index(self) -> usize {
        match self {
            Mode::Probe => MODE_PROBE,
            Mode::Reference => MODE_REFERENCE,
        }
    }
}

/// Parameter a Cramér-Rao bound is taken with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimand {
    Phase,
    Transmission,
}

/// Two-mode Gaussian state in the (p, r, p†, r†) ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub d: Vector4<Complex64>,
    pub sigma: Matrix4<Complex64>,
}

/// Bright two-mode squeezed seed: squeezing after displacement (Yuen order).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProbeSpec {
    /// Squeezing parameter, >= 0. Zero gives a coherent state.
    pub s: f64,
    /// Process phase of the parametric interaction (radians).
    pub theta: f64,
    /// Probe seed magnitude and phase.
    pub alpha_mag: f64,
    pub chi: f64,
    /// Reference seed magnitude and phase.
    pub beta_mag: f64,
    pub xi: f64,
}

impl ProbeSpec {
    pub fn new(s: f64, theta: f64, alpha_mag: f64, chi: f64, beta_mag: f64, xi: f64) -> Result<Self> {
        if !(s >= 0.0) {
            return Err(Error::OutOfRange { name: "s", value: s, range: "[0, inf)" });
        }
        if !(alpha_mag >= 0.0) {
            return Err(Error::OutOfRange { name: "alpha_mag", value: alpha_mag, range: "[0, inf)" });
        }
        if !(beta_mag >= 0.0) {
            return Err(Error::OutOfRange { name: "beta_mag", value: beta_mag, range: "[0, inf)" });
        }
        let tau = 2.0 * std::f64::consts::PI;
        Ok(Self {
            s,
            theta: theta.rem_euclid(tau),
            alpha_mag,
            chi: chi.rem_euclid(tau),
            beta_mag,
            xi: xi.rem_euclid(tau),
        })
    }

    /// Coherent probe of `n` mean photons (s = 0, no reference seed).
    pub fn coherent(n: f64) -> Self {
        Self { s: 0.0, theta: 0.0, alpha_mag: n.sqrt(), chi: 0.0, beta_mag: 0.0, xi: 0.0 }
    }

    /// Probe seeded so that the generated probe-photon number is `n`,
    /// with the reference unseeded.
    pub fn seeded_for_photons(s: f64, n: f64) -> Self {
        Self { s, theta: 0.0, alpha_mag: n.sqrt() / s.cosh(), chi: 0.0, beta_mag: 0.0, xi: 0.0 }
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar(self.alpha_mag, self.chi)
    }

    pub fn beta(&self) -> Complex64 {
        Complex64::from_polar(self.beta_mag, self.xi)
    }

    /// Stimulated (bright) probe photon number,
    /// `|α|² cosh²s + |β|² sinh²s − |α||β| cos(θ−χ−ξ) sinh 2s`.
    ///
    /// The spontaneously scattered `sinh²s` photons are excluded: this is
    /// the `N` entering the bright-limit bounds, where they are negligible.
    pub fn generated_probe_photons(&self) -> f64 {
        let (c, sh) = (self.s.cosh(), self.s.sinh());
        self.alpha_mag.powi(2) * c * c + self.beta_mag.powi(2) * sh * sh
            - self.alpha_mag * self.beta_mag * (self.theta - self.chi - self.xi).cos() * (2.0 * self.s).sinh()
    }
}

/// Intensity transmissions of the loss channels external to the sensor.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossBudget {
    pub eta_p1: f64,
    pub eta_p2: f64,
    pub eta_r: f64,
}

impl LossBudget {
    pub fn new(eta_p1: f64, eta_p2: f64, eta_r: f64) -> Result<Self> {
        for (name, v) in [("eta_p1", eta_p1), ("eta_p2", eta_p2), ("eta_r", eta_r)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::OutOfRange { name, value: v, range: "(0, 1]" });
            }
        }
        Ok(Self { eta_p1, eta_p2, eta_r })
    }

    pub const LOSSLESS: LossBudget = LossBudget { eta_p1: 1.0, eta_p2: 1.0, eta_r: 1.0 };
}

pub fn vacuum_state() -> GaussianState {
    GaussianState { d: Vector4::zeros(), sigma: Matrix4::identity() }
}

pub fn displace(state: &GaussianState, mode: Mode, amplitude: Complex64) -> GaussianState {
    let mut out = state.clone();
    let i = mode.index();
    out.d[i] += amplitude;
    out.d[i + 2] += amplitude.conj();
    out
}

/// Two-mode squeezing `a_p → a_p cosh s − a_r† e^{iθ} sinh s` (and p ↔ r).
pub fn two_mode_squeeze(state: &GaussianState, s: f64, theta: f64) -> GaussianState {
    let c = Complex64::new(s.cosh(), 0.0);
    let sh = Complex64::from_polar(s.sinh(), theta);
    let shc = sh.conj();
    let z = Complex64::new(0.0, 0.0);
    let m = Matrix4::new(
        c, z, z, -sh, //
        z, c, -sh, z, //
        z, -shc, c, z, //
        -shc, z, z, c,
    );
    GaussianState { d: m * state.d, sigma: m * state.sigma * m.adjoint() }
}

/// Beam-splitter loss with an uncorrelated vacuum ancilla.
pub fn pure_loss(state: &GaussianState, mode: Mode, transmission: f64) -> Result<GaussianState> {
    if !(0.0..=1.0).contains(&transmission) {
        return Err(Error::OutOfRange { name: "transmission", value: transmission, range: "[0, 1]" });
    }
    let i = mode.index();
    let rt = transmission.sqrt();
    let mut scale = Vector4::from_element(Complex64::new(1.0, 0.0));
    scale[i] = Complex64::new(rt, 0.0);
    scale[i + 2] = Complex64::new(rt, 0.0);

    let mut out = state.clone();
    for r in 0..4 {
        for c in 0..4 {
            out.sigma[(r, c)] *= scale[r] * scale[c].conj();
        }
    }
    out.sigma[(i, i)] += Complex64::new(1.0 - transmission, 0.0);
    out.sigma[(i + 2, i + 2)] += Complex64::new(1.0 - transmission, 0.0);
    out.d[i] *= scale[i];
    out.d[i + 2] *= scale[i + 2];
    Ok(out)
}

/// Phase rotation of the probe mode only, `a_p → e^{iφ} a_p`.
pub fn phase_rotate(state: &GaussianState, phi: f64) -> GaussianState {
    let e = Complex64::from_polar(1.0, phi);
    let mut rot = Vector4::from_element(Complex64::new(1.0, 0.0));
    rot[MODE_PROBE] = e;
    rot[MODE_PROBE + 2] = e.conj();
    let mut out = state.clone();
    for r in 0..4 {
        for c in 0..4 {
            out.sigma[(r, c)] *= rot[r] * rot[c].conj();
        }
    }
    out.d[MODE_PROBE] *= e;
    out.d[MODE_PROBE + 2] *= e.conj();
    out
}

/// Full channel composition: seed, squeeze, pre-sensor loss, the sensor
/// itself (beam splitter `sensor_t` plus rotation `sensor_phi`), post-sensor
/// loss, and reference loss.
pub fn build_lossy_btmss(
    spec: &ProbeSpec,
    losses: &LossBudget,
    sensor_t: f64,
    sensor_phi: f64,
) -> Result<GaussianState> {
    if !(0.0..=1.0).contains(&sensor_t) {
        return Err(Error::OutOfRange { name: "sensor_t", value: sensor_t, range: "[0, 1]" });
    }
    let state = vacuum_state();
    let state = displace(&state, Mode::Probe, spec.alpha());
    let state = displace(&state, Mode::Reference, spec.beta());
    let state = two_mode_squeeze(&state, spec.s, spec.theta);
    let state = pure_loss(&state, Mode::Probe, losses.eta_p1)?;
    let state = pure_loss(&state, Mode::Probe, sensor_t)?;
    let state = phase_rotate(&state, sensor_phi);
    let state = pure_loss(&state, Mode::Probe, losses.eta_p2)?;
    let state = pure_loss(&state, Mode::Reference, losses.eta_r)?;
    Ok(state)
}

/// `<a†a>` of one mode, reconstructed from the diagonal and displacement.
pub fn mean_photons(state: &GaussianState, mode: Mode) -> f64 {
    let i = mode.index();
    (state.sigma[(i, i)].re - 1.0) / 2.0 + state.d[i].norm_sqr()
}

/// Bright-limit quantum Cramér-Rao bound `(2 ḋ† σ⁻¹ ḋ)⁻¹`.
///
/// The phase derivative of the displacement is analytic (probe entries pick
/// up ±i); the transmission derivative is a central finite difference in the
/// sensor transmission with step 1e-6. Returns `+inf` when the derivative
/// vanishes (no information), e.g. at `sensor_t = 0`.
pub fn qcrb_bright(
    spec: &ProbeSpec,
    losses: &LossBudget,
    sensor_t: f64,
    sensor_phi: f64,
    parameter: Estimand,
) -> Result<f64> {
    let state = build_lossy_btmss(spec, losses, sensor_t, sensor_phi)?;
    let d_dot: Vector4<Complex64> = match parameter {
        Estimand::Phase => {
            let i = Complex64::new(0.0, 1.0);
            Vector4::new(i * state.d[0], Complex64::new(0.0, 0.0), -i * state.d[2], Complex64::new(0.0, 0.0))
        }
        Estimand::Transmission => {
            // The displacement is not differentiable in T at T = 0; the
            // closed forms in `bounds` cover that endpoint.
            if sensor_t == 0.0 {
                return Err(Error::OutOfRange {
                    name: "sensor_t",
                    value: sensor_t,
                    range: "(0, 1] for transmission bounds",
                });
            }
            let h = 1e-6;
            if sensor_t + h <= 1.0 && sensor_t - h >= 0.0 {
                let plus = build_lossy_btmss(spec, losses, sensor_t + h, sensor_phi)?;
                let minus = build_lossy_btmss(spec, losses, sensor_t - h, sensor_phi)?;
                (plus.d - minus.d) / Complex64::new(2.0 * h, 0.0)
            } else if sensor_t + h > 1.0 {
                // second-order backward difference at the T = 1 endpoint
                let m1 = build_lossy_btmss(spec, losses, sensor_t - h, sensor_phi)?;
                let m2 = build_lossy_btmss(spec, losses, sensor_t - 2.0 * h, sensor_phi)?;
                (state.d * Complex64::new(3.0, 0.0) - m1.d * Complex64::new(4.0, 0.0) + m2.d)
                    / Complex64::new(2.0 * h, 0.0)
            } else {
                let p1 = build_lossy_btmss(spec, losses, sensor_t + h, sensor_phi)?;
                let p2 = build_lossy_btmss(spec, losses, sensor_t + 2.0 * h, sensor_phi)?;
                (state.d * Complex64::new(-3.0, 0.0) + p1.d * Complex64::new(4.0, 0.0) - p2.d)
                    / Complex64::new(2.0 * h, 0.0)
            }
        }
    };
    if d_dot.iter().all(|z| z.norm() == 0.0) {
        return Ok(f64::INFINITY);
    }
    let inv = state
        .sigma
        .try_inverse()
        .ok_or(Error::SingularCovariance { cond: f64::INFINITY })?;
    // 1-norm condition estimate
    let norm1 = |m: &Matrix4<Complex64>| {
        (0..4)
            .map(|c| (0..4).map(|r| m[(r, c)].norm()).sum::<f64>())
            .fold(0.0_f64, f64::max)
    };
    let cond = norm1(&state.sigma) * norm1(&inv);
    if cond > 1e12 {
        return Err(Error::SingularCovariance { cond });
    }
    let quad = (d_dot.adjoint() * inv * d_dot)[(0, 0)].re;
    Ok(1.0 / (2.0 * quad))
}

/// Panics in tests if the state drifts off the physical manifold.
pub fn check_physical(state: &GaussianState) -> Result<()> {
    for r in 0..4 {
        for c in 0..4 {
            let h = (state.sigma[(r, c)] - state.sigma[(c, r)].conj()).norm();
            if h > 1e-12 {
                return Err(Error::OutOfRange { name: "sigma hermiticity", value: h, range: "< 1e-12" });
            }
        }
        let diag = state.sigma[(r, r)].re;
        if diag < 1.0 - 1e-12 {
            return Err(Error::OutOfRange { name: "sigma diagonal", value: diag, range: ">= 1 (vacuum floor)" });
        }
    }
    let c0 = (state.d[2] - state.d[0].conj()).norm();
    let c1 = (state.d[3] - state.d[1].conj()).norm();
    if c0 > 1e-12 || c1 > 1e-12 {
        return Err(Error::OutOfRange { name: "displacement conjugate structure", value: c0.max(c1), range: "< 1e-12" });
    }
    Ok(())
}
