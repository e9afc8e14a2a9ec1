//! Minimum-phase reconstruction via the Bode gain-phase relation, by two
//! independent numerical routes that cross-validate each other:
//!
//! 1. an FFT (cepstral folding) Hilbert transform of `½ ln T` on a wide grid,
//!    trusted only well inside the grid where spectral leakage is negligible;
//! 2. direct evaluation of the gain-phase kernel integral with the
//!    quadrature split at the logarithmic singularity.
//!
//! Sign convention: the phase is `arg t(Λ)` of the amplitude transfer
//! function, which is the negative of the textbook minimum-phase Hilbert
//! sign; the Lorentzian closed form anchors it.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::numerics::{five_point_derivative, tanh_sinh, unwrap_phase};

use super::{Family, LineshapeSpec};

/// Transmission floor applied inside phase reconstruction so perfect dips
/// do not break the logarithm.
pub const EPS_FLOOR: f64 = 1e-12;

/// Range of generalized wavelengths over which the FFT reconstruction is
/// free of leakage error; also the search domain used downstream.
pub const TRUSTED_RANGE: (f64, f64) = (-3.0, 3.0);

/// Half-width of the FFT sampling range.
const FFT_SPAN: f64 = 1000.0;
/// Sample count; chosen so the trusted-range discretization error of the
/// reconstruction stays below 1e-4 rad against the Lorentzian closed form.
const FFT_SAMPLES: usize = 1 << 20;

/// A sampled, unwrapped phase spectrum with trusted-range metadata.
#[derive(Debug, Clone)]
pub struct PhaseSpectrum {
    lambdas: Vec<f64>,
    phases: Vec<f64>,
    trusted: (f64, f64),
    /// Floor value applied to the transmission, if any sample needed it.
    pub floor: Option<f64>,
}

impl PhaseSpectrum {
    pub fn trusted_range(&self) -> (f64, f64) {
        self.trusted
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.lambdas.iter().copied().zip(self.phases.iter().copied())
    }

    fn eval_unchecked(&self, lambda: f64) -> f64 {
        let n = self.lambdas.len();
        let lo = self.lambdas[0];
        let step = self.lambdas[1] - lo;
        let pos = (lambda - lo) / step;
        let idx = (pos.floor() as usize).min(n - 2);
        let frac = pos - idx as f64;
        self.phases[idx] * (1.0 - frac) + self.phases[idx + 1] * frac
    }

    /// Linear interpolation inside the trusted range.
    pub fn eval(&self, lambda: f64) -> Result<f64> {
        self.check_range(lambda)?;
        Ok(self.eval_unchecked(lambda))
    }

    /// Five-point central difference of the interpolated spectrum.
    pub fn derivative(&self, lambda: f64) -> Result<f64> {
        self.check_range(lambda)?;
        let h = 1e-4;
        let l = lambda.clamp(self.trusted.0 + 2.0 * h, self.trusted.1 - 2.0 * h);
        Ok(five_point_derivative(|x| self.eval_unchecked(x), l, h))
    }

    fn check_range(&self, lambda: f64) -> Result<()> {
        if lambda < self.trusted.0 || lambda > self.trusted.1 {
            return Err(Error::OutsideTrustedRange { lambda, lo: self.trusted.0, hi: self.trusted.1 });
        }
        Ok(())
    }
}

/// FFT-based minimum-phase reconstruction of `transmission_fn`.
///
/// Samples `½ ln T` over `Λ ∈ [-1000, 1000)` with 2^20 points, computes the
/// folded-cepstrum Hilbert transform, and keeps only the trusted range.
/// With `apply_floor` false, a non-positive transmission anywhere on the
/// grid is an error; with it true the transmission is floored at
/// [`EPS_FLOOR`] and the floor is recorded in the output metadata.
///
/// `reference_order` handles lineshapes whose transmission decays to zero
/// like `Λ^(-2 order)` off resonance (`t_off = 0`): their log-magnitude tail
/// `−order·ln|Λ|` decays too slowly for the finite sampling span and leaves
/// a spurious linear phase ramp. The reference `(1 + Λ²)^(-order)`, whose
/// minimum phase is exactly `order·atan Λ`, is subtracted before the FFT and
/// its phase added back, so the FFT only sees a fast-decaying residual.
/// Pass 0 for lineshapes with a nonzero off-resonance transmission.
pub fn minimum_phase_fft<F: Fn(f64) -> f64>(
    transmission_fn: F,
    trusted: (f64, f64),
    apply_floor: bool,
    reference_order: f64,
) -> Result<PhaseSpectrum> {
    let n = FFT_SAMPLES;
    let step = 2.0 * FFT_SPAN / n as f64;
    let mut floored = false;

    // half log-magnitude with the reference removed, Λ = 0 at index n/2
    let mut logmag = vec![0.0_f64; n];
    for (k, v) in logmag.iter_mut().enumerate() {
        let lambda = -FFT_SPAN + step * k as f64;
        let mut t = transmission_fn(lambda);
        if t <= 0.0 || t < EPS_FLOOR {
            if !apply_floor && t <= 0.0 {
                return Err(Error::NonPositiveTransmission { lambda });
            }
            t = EPS_FLOOR;
            floored = true;
        }
        *v = 0.5 * t.ln() + 0.5 * reference_order * (1.0 + lambda * lambda).ln();
    }

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    // ifftshift so Λ = 0 sits at bin 0, then the cepstrum
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(logmag[(k + n / 2) % n], 0.0))
        .collect();
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;

    // causal folding: keep quefrency 0 and n/2, double 1..n/2, zero the rest
    for (k, z) in buf.iter_mut().enumerate() {
        let w = if k == 0 || k == n / 2 {
            1.0
        } else if k < n / 2 {
            2.0
        } else {
            0.0
        };
        *z *= scale * w;
    }
    fwd.process(&mut buf);

    // phase = -Im, shifted back so index k corresponds to Λ_k
    let lo_idx = ((trusted.0 + FFT_SPAN) / step).ceil() as usize;
    let hi_idx = ((trusted.1 + FFT_SPAN) / step).floor() as usize;
    let mut lambdas = Vec::with_capacity(hi_idx - lo_idx + 1);
    let mut phases = Vec::with_capacity(hi_idx - lo_idx + 1);
    for k in lo_idx..=hi_idx {
        let lambda = -FFT_SPAN + step * k as f64;
        lambdas.push(lambda);
        phases.push(-buf[(k + n / 2) % n].im + reference_order * lambda.atan());
    }
    unwrap_phase(&mut phases);

    Ok(PhaseSpectrum {
        lambdas,
        phases,
        trusted,
        floor: floored.then_some(EPS_FLOOR),
    })
}

/// Gain-phase kernel integral
/// `φ(Λ) = -(1/π) ∫₀^∞ ln|(L+Λ)/(L−Λ)| · d/dL[½ ln T(L)] dL`
/// for lineshape families with a differentiable log-magnitude.
///
/// The quadrature is split at the singularity `L = Λ`, with the tail mapped
/// to a finite interval by `L → 1/u`. Absolute tolerance 1e-8 per panel;
/// a combined error estimate above 1e-6 rad is reported as non-convergence.
pub fn minimum_phase_kernel(lambda: f64, spec: &LineshapeSpec) -> Result<f64> {
    if matches!(spec.family, Family::Tabulated { .. }) {
        return Err(Error::UnsupportedLineshape("tabulated (no differentiable log-magnitude)".into()));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let sign = lambda.signum();
    let lam = lambda.abs();

    let g = |x: f64| spec.d_half_log_transmission(x, EPS_FLOOR);
    let kernel = |x: f64| ((x + lam) / (x - lam)).abs().ln();
    let f = |x: f64| kernel(x) * g(x);

    let cut = (10.0 * lam).max(10.0);
    let (v1, e1) = tanh_sinh(f, 0.0, lam, 12);
    let (v2, e2) = tanh_sinh(f, lam, 2.0 * lam, 12);
    let (v3, e3) = tanh_sinh(f, 2.0 * lam, cut, 12);
    // tail via u = 1/L
    let tail = |u: f64| {
        let x = 1.0 / u;
        kernel(x) * g(x) * x * x
    };
    let (v4, e4) = tanh_sinh(tail, 0.0, 1.0 / cut, 12);

    let err = (e1 + e2 + e3 + e4) / std::f64::consts::PI;
    if err > 1e-6 {
        return Err(Error::QuadratureDidNotConverge { estimate: err, tolerance: 1e-6 });
    }
    Ok(-sign * (v1 + v2 + v3 + v4) / std::f64::consts::PI)
}
