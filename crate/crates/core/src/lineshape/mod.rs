//! Sensor transfer functions: analytic Lorentzian amplitude/transmission/
//! phase, Butterworth transmission of order m, tabulated lineshapes, and the
//! minimum-phase reconstruction that supplies phase spectra for families
//! without a closed form.
//!
//! The generalized wavelength `Λ = (λ − λ0)/ΔL` (detuning in half-widths) is
//! the only abscissa used anywhere; it makes every transfer function
//! independent of the physical resonance wavelength and width.

mod minphase;

pub use minphase::{minimum_phase_fft, minimum_phase_kernel, PhaseSpectrum, EPS_FLOOR, TRUSTED_RANGE};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::five_point_derivative;

/// Resonance family of a lineshape.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Family {
    Lorentzian,
    Butterworth { m: u32 },
    /// Two-column (Λ, T) samples, strictly increasing in Λ.
    Tabulated { samples: Vec<(f64, f64)> },
}

/// A resonance lineshape with on- and far-off-resonance transmissions.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LineshapeSpec {
    pub family: Family,
    pub t_res: f64,
    pub t_off: f64,
}

impl LineshapeSpec {
    pub fn new(family: Family, t_res: f64, t_off: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t_res) {
            return Err(Error::OutOfRange { name: "t_res", value: t_res, range: "[0, 1]" });
        }
        if !(0.0..=1.0).contains(&t_off) {
            return Err(Error::OutOfRange { name: "t_off", value: t_off, range: "[0, 1]" });
        }
        if t_res == t_off {
            return Err(Error::FlatLineshape(t_res));
        }
        if let Family::Butterworth { m } = family {
            if m < 1 {
                return Err(Error::OutOfRange { name: "m", value: m as f64, range: ">= 1" });
            }
        }
        if let Family::Tabulated { ref samples } = family {
            if samples.len() < 4 {
                return Err(Error::Tabulated("need at least 4 samples".into()));
            }
            if !samples.windows(2).all(|w| w[1].0 > w[0].0) {
                return Err(Error::Tabulated("Λ column must be strictly increasing".into()));
            }
        }
        Ok(Self { family, t_res, t_off })
    }

    pub fn lorentzian(t_res: f64, t_off: f64) -> Result<Self> {
        Self::new(Family::Lorentzian, t_res, t_off)
    }

    pub fn butterworth(m: u32, t_res: f64, t_off: f64) -> Result<Self> {
        Self::new(Family::Butterworth { m }, t_res, t_off)
    }

    /// Intensity transmission `T(Λ)`.
    pub fn transmission(&self, lambda: f64) -> f64 {
        // the rational form (T_res + Λ^p T_off) / (1 + Λ^p) avoids the
        // catastrophic cancellation of T_off + (T_res - T_off)/(1 + Λ^p)
        // near perfect dips
        match &self.family {
            Family::Lorentzian => {
                let l2 = lambda * lambda;
                (self.t_res + l2 * self.t_off) / (1.0 + l2)
            }
            Family::Butterworth { m } => {
                let lp = lambda.powi(2 * *m as i32);
                (self.t_res + lp * self.t_off) / (1.0 + lp)
            }
            Family::Tabulated { samples } => interp_linear(samples, lambda),
        }
    }

    /// Analytic `dT/dΛ` (finite differences for tabulated samples).
    pub fn d_transmission(&self, lambda: f64) -> f64 {
        match &self.family {
            Family::Lorentzian => {
                -2.0 * lambda * (self.t_res - self.t_off) / (1.0 + lambda * lambda).powi(2)
            }
            Family::Butterworth { m } => {
                let p = 2 * *m as i32;
                -(p as f64) * lambda.powi(p - 1) * (self.t_res - self.t_off)
                    / (1.0 + lambda.powi(p)).powi(2)
            }
            Family::Tabulated { samples } => {
                five_point_derivative(|x| interp_linear(samples, x), lambda, 1e-4)
            }
        }
    }

    /// Polynomial decay order of the transmission tail for zero
    /// off-resonance transmission (`T ~ Λ^(-2 order)`); 0 when the tail
    /// settles to a nonzero constant. Feeds the FFT reference subtraction
    /// in [`minimum_phase_fft`].
    pub fn reference_order(&self) -> f64 {
        match &self.family {
            Family::Lorentzian if self.t_off == 0.0 => 1.0,
            Family::Butterworth { m } if self.t_off == 0.0 => *m as f64,
            _ => 0.0,
        }
    }

    /// Derivative of the half log-magnitude, `d/dΛ [½ ln T(Λ)]`, the factor
    /// multiplying the gain-phase kernel. Closed form for the analytic
    /// families.
    pub(crate) fn d_half_log_transmission(&self, lambda: f64, floor: f64) -> f64 {
        let t = self.transmission(lambda).max(floor);
        self.d_transmission(lambda) / (2.0 * t)
    }
}

fn interp_linear(samples: &[(f64, f64)], x: f64) -> f64 {
    let n = samples.len();
    if x <= samples[0].0 {
        return samples[0].1;
    }
    if x >= samples[n - 1].0 {
        return samples[n - 1].1;
    }
    let idx = samples.partition_point(|&(l, _)| l < x);
    let (x0, y0) = samples[idx - 1];
    let (x1, y1) = samples[idx];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Complex amplitude of the generalized Lorentzian,
/// `t(Λ) = (√T_res − √T_off)/(1 − iΛ) + √T_off`.
pub fn lorentzian_amplitude(lambda: f64, t_res: f64, t_off: f64) -> Complex64 {
    let a = t_res.sqrt() - t_off.sqrt();
    Complex64::new(a, 0.0) / Complex64::new(1.0, -lambda) + t_off.sqrt()
}

/// `T(Λ)` for a Lorentzian spec (same value as `spec.transmission`).
pub fn lorentzian_transmission(lambda: f64, spec: &LineshapeSpec) -> f64 {
    spec.t_off + (spec.t_res - spec.t_off) / (1.0 + lambda * lambda)
}

/// Minimum phase of the Lorentzian amplitude, `arg t(Λ)` on the principal
/// branch: `atan2(Λ(√T_res − √T_off), √T_res + Λ²√T_off)`. Continuous for
/// `T_res > 0`; the perfect dip winds through ±π/2 at resonance.
pub fn lorentzian_phase(lambda: f64, spec: &LineshapeSpec) -> f64 {
    let r = spec.t_res.sqrt();
    let o = spec.t_off.sqrt();
    (lambda * (r - o)).atan2(r + lambda * lambda * o)
}

/// Analytic `dφ/dΛ` for the Lorentzian,
/// `(√T_res − √T_off)(√T_res − Λ²√T_off) / [(1+Λ²)(T_res + Λ²T_off)]`.
pub fn lorentzian_d_phase(lambda: f64, spec: &LineshapeSpec) -> f64 {
    let r = spec.t_res.sqrt();
    let o = spec.t_off.sqrt();
    let l2 = lambda * lambda;
    (r - o) * (r - l2 * o) / ((1.0 + l2) * (spec.t_res + l2 * spec.t_off))
}

/// Butterworth transmission `(T_res−T_off)/(1+Λ^{2m}) + T_off`.
pub fn butterworth_transmission(lambda: f64, spec: &LineshapeSpec) -> Result<f64> {
    match spec.family {
        Family::Butterworth { .. } => Ok(spec.transmission(lambda)),
        _ => Err(Error::UnsupportedLineshape(format!("{:?}", spec.family))),
    }
}

/// Transfer function plus the phase route appropriate for its family:
/// analytic for Lorentzian, reconstructed minimum phase otherwise.
#[derive(Debug, Clone)]
pub struct TransferModel {
    pub spec: LineshapeSpec,
    phase: Option<PhaseSpectrum>,
}

impl TransferModel {
    /// Builds the model, running the FFT minimum-phase reconstruction when
    /// the family has no analytic phase.
    pub fn new(spec: LineshapeSpec) -> Result<Self> {
        let phase = match spec.family {
            Family::Lorentzian => None,
            _ => Some(minimum_phase_fft(
                |l| spec.transmission(l),
                TRUSTED_RANGE,
                true,
                spec.reference_order(),
            )?),
        };
        Ok(Self { spec, phase })
    }

    pub fn transmission(&self, lambda: f64) -> f64 {
        self.spec.transmission(lambda)
    }

    pub fn phase(&self, lambda: f64) -> Result<f64> {
        match &self.phase {
            None => Ok(lorentzian_phase(lambda, &self.spec)),
            Some(ps) => ps.eval(lambda),
        }
    }

    /// `(dT/dΛ, dφ/dΛ)` at `lambda`.
    pub fn transfer_derivatives(&self, lambda: f64) -> Result<(f64, f64)> {
        let dt = self.spec.d_transmission(lambda);
        let dphi = match &self.phase {
            None => lorentzian_d_phase(lambda, &self.spec),
            Some(ps) => ps.derivative(lambda)?,
        };
        Ok((dt, dphi))
    }
}

/// Loads a tabulated lineshape from two-column `Λ T` text with `#` comments.
pub fn load_tabulated(text: &str) -> Result<LineshapeSpec> {
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<f64> {
            tok.and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Tabulated(format!("line {}: expected two numeric columns", lineno + 1)))
        };
        let l = parse(cols.next())?;
        let t = parse(cols.next())?;
        samples.push((l, t));
    }
    if samples.is_empty() {
        return Err(Error::Tabulated("no samples".into()));
    }
    let t_res = interp_linear(&samples, 0.0);
    let t_off = 0.5 * (samples[0].1 + samples[samples.len() - 1].1);
    LineshapeSpec::new(Family::Tabulated { samples }, t_res, t_off)
}

/// Exports a reconstructed spectrum as three-column `Λ T φ` text.
pub fn export_spectrum(model: &TransferModel, lambdas: &[f64]) -> Result<String> {
    let mut out = String::from("# Lambda T phi\n");
    for &l in lambdas {
        out.push_str(&format!("{} {} {}\n", l, model.transmission(l), model.phase(l)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn flat_lineshape_rejected() {
        assert!(LineshapeSpec::lorentzian(0.5, 0.5).is_err());
    }

    #[test]
    fn perfect_peak_amplitude_is_unity_on_resonance() {
        let t = lorentzian_amplitude(0.0, 1.0, 0.0);
        assert_relative_eq!(t.re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(t.im, 0.0, epsilon = 1e-15);

        // off-resonance limit
        let far = lorentzian_amplitude(1e6, 0.75, 0.1);
        assert_relative_eq!(far.norm(), 0.1_f64.sqrt(), max_relative = 1e-6);
    }

    #[test]
    fn perfect_peak_phase_is_arctan() {
        let spec = LineshapeSpec::lorentzian(1.0, 0.0).unwrap();
        for l in [-2.0, -0.5, 0.0, 0.3, 1.7] {
            assert_relative_eq!(lorentzian_phase(l, &spec), l.atan(), epsilon = 1e-14);
        }
        // steepest transmission slope at |Λ| = 1/sqrt(3)
        let l_star = (1.0_f64 / 3.0).sqrt();
        let slope = |l: f64| spec.d_transmission(l).abs();
        assert!(slope(l_star) > slope(l_star + 1e-3));
        assert!(slope(l_star) > slope(l_star - 1e-3));
    }

    #[test]
    fn butterworth_first_order_is_lorentzian() {
        let b = LineshapeSpec::butterworth(1, 0.8, 0.2).unwrap();
        let l = LineshapeSpec::lorentzian(0.8, 0.2).unwrap();
        for x in [-3.0, -1.0, -0.2, 0.0, 0.4, 2.5] {
            assert_relative_eq!(b.transmission(x), l.transmission(x), epsilon = 1e-15);
            assert_relative_eq!(b.d_transmission(x), l.d_transmission(x), epsilon = 1e-13);
        }
    }

    #[test]
    fn butterworth_values() {
        let spec = LineshapeSpec::butterworth(3, 1.0, 0.0).unwrap();
        assert_relative_eq!(spec.transmission(0.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(spec.transmission(1.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(spec.transmission(2.0), 1.0 / 65.0, epsilon = 1e-15);
    }

    #[test]
    fn lorentzian_d_phase_anchors() {
        let peak = LineshapeSpec::lorentzian(1.0, 0.0).unwrap();
        assert_relative_eq!(lorentzian_d_phase(0.0, &peak), 1.0, epsilon = 1e-15);
        assert_relative_eq!(peak.d_transmission(0.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn analytic_phase_derivative_matches_finite_difference() {
        let spec = LineshapeSpec::lorentzian(0.75, 0.1).unwrap();
        for l in [-2.0, -0.4, 0.1, 0.9, 2.3] {
            let fd = five_point_derivative(|x| lorentzian_phase(x, &spec), l, 1e-4);
            assert_relative_eq!(lorentzian_d_phase(l, &spec), fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn tabulated_roundtrip() {
        let spec = LineshapeSpec::lorentzian(0.9, 0.2).unwrap();
        let mut text = String::from("# generated\n");
        let mut l = -50.0;
        while l <= 50.0 {
            text.push_str(&format!("{} {}\n", l, spec.transmission(l)));
            l += 0.01;
        }
        let tab = load_tabulated(&text).unwrap();
        assert_relative_eq!(tab.transmission(0.7), spec.transmission(0.7), max_relative = 1e-4);
        assert_relative_eq!(tab.t_res, 0.9, max_relative = 1e-4);
    }

    proptest! {
        #[test]
        fn amplitude_squared_equals_transmission(
            l in -50.0..50.0f64,
            t_res in 0.0..1.0f64,
            t_off in 0.0..1.0f64,
        ) {
            prop_assume!((t_res - t_off).abs() > 1e-6);
            let spec = LineshapeSpec::lorentzian(t_res, t_off).unwrap();
            let amp = lorentzian_amplitude(l, t_res, t_off);
            prop_assert!((amp.norm_sqr() - spec.transmission(l)).abs() < 1e-12);
        }

        #[test]
        fn transmission_derivative_antisymmetric(
            l in 0.0..5.0f64,
            m in 1u32..5,
        ) {
            let spec = LineshapeSpec::butterworth(m, 0.9, 0.1).unwrap();
            prop_assert!((spec.d_transmission(l) + spec.d_transmission(-l)).abs() < 1e-12);
        }
    }
}
