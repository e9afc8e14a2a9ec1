//! Optimized dual-homodyne measurement model: the probe and reference
//! quadratures are detected at local-oscillator angles `γ_p`, `γ_r` and
//! combined as `Q_p − g Q_r` with the electronic gain `g` minimizing the
//! variance. With the angles set to the even-parity (amplitude) quadrature
//! the estimator saturates the transmission bound; with odd parity (phase
//! quadrature) it saturates the phase bound, including all external losses.
//!
//! The optimal angle rule used throughout is `γ = (nπ + φ + θ)/2`, which
//! zeroes the angle sum `γ_p + γ_r − φ − θ` modulo π and minimizes the
//! difference variance.

use crate::bounds::{BoundQuery, Probe};
use crate::error::{Error, Result};
use crate::gaussian::{Estimand, LossBudget, ProbeSpec};

/// Quadrature parity: even n selects the amplitude quadrature, odd n the
/// phase quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Parity used to estimate the given parameter.
    pub fn for_estimand(estimand: Estimand) -> Self {
        match estimand {
            Estimand::Transmission => Parity::Even,
            Estimand::Phase => Parity::Odd,
        }
    }

    fn n(self) -> f64 {
        match self {
            Parity::Even => 0.0,
            Parity::Odd => 1.0,
        }
    }
}

/// Local-oscillator angles for the two homodyne detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSetting {
    pub gamma_p: f64,
    pub gamma_r: f64,
    pub parity: Parity,
}

impl QuadratureSetting {
    /// Optimal equal-angle setting `γ = (nπ + φ + θ)/2` for the scenario's
    /// phases.
    pub fn optimal(parity: Parity, sensor_phi: f64, theta: f64) -> Self {
        let gamma = (parity.n() * std::f64::consts::PI + sensor_phi + theta) / 2.0;
        Self { gamma_p: gamma, gamma_r: gamma, parity }
    }

    /// Checks the angle rule `2γ = nπ + φ + θ (mod π)` against the declared
    /// parity.
    pub fn is_consistent(&self, sensor_phi: f64, theta: f64) -> bool {
        let expect = (self.parity.n() * std::f64::consts::PI + sensor_phi + theta) / 2.0;
        let d = (self.gamma_p - expect).rem_euclid(std::f64::consts::PI);
        d < 1e-12 || d > std::f64::consts::PI - 1e-12
    }
}

/// One homodyne estimation scenario: probe state, losses, the sensor point,
/// and what is being estimated. Phase matching `ξ = χ + φ` and the
/// process-phase convention `θ = χ + ξ` are enforced at construction.
#[derive(Debug, Clone, Copy)]
pub struct HdScenario {
    pub probe: ProbeSpec,
    pub losses: LossBudget,
    pub sensor_t: f64,
    pub sensor_phi: f64,
    pub estimand: Estimand,
}

impl HdScenario {
    pub fn new(
        probe: ProbeSpec,
        losses: LossBudget,
        sensor_t: f64,
        sensor_phi: f64,
        estimand: Estimand,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&sensor_t) {
            return Err(Error::OutOfRange { name: "sensor_t", value: sensor_t, range: "[0, 1]" });
        }
        let tau = 2.0 * std::f64::consts::PI;
        let xi_err = (probe.xi - probe.chi - sensor_phi).rem_euclid(tau);
        if xi_err.min(tau - xi_err) > 1e-9 {
            return Err(Error::OutOfRange {
                name: "xi (phase matching requires xi = chi + phi)",
                value: probe.xi,
                range: "chi + phi mod 2pi",
            });
        }
        let th_err = (probe.theta - probe.chi - probe.xi).rem_euclid(tau);
        if th_err.min(tau - th_err) > 1e-9 {
            return Err(Error::OutOfRange {
                name: "theta (convention theta = chi + xi)",
                value: probe.theta,
                range: "chi + xi mod 2pi",
            });
        }
        Ok(Self { probe, losses, sensor_t, sensor_phi, estimand })
    }

    /// Scenario with the seed phases derived from `chi` so that both phase
    /// conditions hold.
    pub fn phase_matched(
        s: f64,
        alpha_mag: f64,
        beta_mag: f64,
        chi: f64,
        losses: LossBudget,
        sensor_t: f64,
        sensor_phi: f64,
        estimand: Estimand,
    ) -> Result<Self> {
        let xi = chi + sensor_phi;
        let theta = chi + xi;
        let probe = ProbeSpec::new(s, theta, alpha_mag, chi, beta_mag, xi)?;
        Self::new(probe, losses, sensor_t, sensor_phi, estimand)
    }

    /// Probe-path transmission through everything, `η_p1 T η_p2`.
    pub fn t_p(&self) -> f64 {
        self.losses.eta_p1 * self.sensor_t * self.losses.eta_p2
    }

    pub fn t_r(&self) -> f64 {
        self.losses.eta_r
    }

    /// Photons incident on the sensor, `η_p1 <n_p>_0`.
    pub fn photons_on_sensor(&self) -> f64 {
        self.losses.eta_p1 * self.probe.generated_probe_photons()
    }

    pub fn optimal_setting(&self) -> QuadratureSetting {
        QuadratureSetting::optimal(
            Parity::for_estimand(self.estimand),
            self.sensor_phi,
            self.probe.theta,
        )
    }

    fn angle_sum(&self, q: &QuadratureSetting) -> f64 {
        q.gamma_p + q.gamma_r - self.sensor_phi - self.probe.theta
    }
}

/// Electronic gain minimizing the difference variance,
/// `−√(T_pT_r) sinh 2s cos(angle_sum) / (T_r cosh 2s + 1 − T_r)`.
pub fn optimal_gain(t_p: f64, t_r: f64, s: f64, angle_sum: f64) -> f64 {
    -(t_p * t_r).sqrt() * (2.0 * s).sinh() * angle_sum.cos() / (t_r * (2.0 * s).cosh() + 1.0 - t_r)
}

/// Variance of `Q_p − g Q_r` for an arbitrary gain.
pub fn difference_variance(scn: &HdScenario, q: &QuadratureSetting, gain: f64) -> f64 {
    let (t_p, t_r) = (scn.t_p(), scn.t_r());
    let c2s = (2.0 * scn.probe.s).cosh();
    let s2s = (2.0 * scn.probe.s).sinh();
    let var_p = t_p * c2s + 1.0 - t_p;
    let var_r = t_r * c2s + 1.0 - t_r;
    let cov = -(t_p * t_r).sqrt() * s2s * scn.angle_sum(q).cos();
    var_p + gain * gain * var_r - 2.0 * gain * cov
}

/// Difference variance at the optimal gain:
/// `T_p cosh 2s + 1 − T_p − T_pT_r sinh²2s cos²(angle_sum)/(T_r cosh 2s + 1 − T_r)`.
pub fn optimized_difference_variance(scn: &HdScenario, q: &QuadratureSetting) -> f64 {
    let (t_p, t_r) = (scn.t_p(), scn.t_r());
    let c2s = (2.0 * scn.probe.s).cosh();
    let s2s = (2.0 * scn.probe.s).sinh();
    let cos = scn.angle_sum(q).cos();
    t_p * c2s + 1.0 - t_p - t_p * t_r * s2s * s2s * cos * cos / (t_r * c2s + 1.0 - t_r)
}

/// Mean probe quadrature
/// `2√T_p [|α| cosh s cos(χ−γ+φ) − |β| sinh s cos(ξ+γ−θ−φ)]`.
pub fn quadrature_mean_probe(scn: &HdScenario, gamma: f64) -> f64 {
    let p = &scn.probe;
    2.0 * scn.t_p().sqrt()
        * (p.alpha_mag * p.s.cosh() * (p.chi - gamma + scn.sensor_phi).cos()
            - p.beta_mag * p.s.sinh() * (p.xi + gamma - p.theta - scn.sensor_phi).cos())
}

/// Analytic derivative of the mean probe quadrature with respect to the
/// scenario's estimand.
fn d_quadrature_mean(scn: &HdScenario, gamma: f64) -> f64 {
    let p = &scn.probe;
    match scn.estimand {
        // <Q_p> scales as sqrt(T) through T_p
        Estimand::Transmission => quadrature_mean_probe(scn, gamma) / (2.0 * scn.sensor_t),
        Estimand::Phase => {
            2.0 * scn.t_p().sqrt()
                * (-p.alpha_mag * p.s.cosh() * (p.chi - gamma + scn.sensor_phi).sin()
                    - p.beta_mag * p.s.sinh() * (p.xi + gamma - p.theta - scn.sensor_phi).sin())
        }
    }
}

/// Error-propagated estimator variance of the optimized homodyne difference
/// at the optimal quadrature setting for the scenario's estimand.
pub fn hd_estimator_variance(scn: &HdScenario) -> f64 {
    hd_estimator_variance_at(scn, &scn.optimal_setting())
}

/// Same, but at an arbitrary (possibly detuned) quadrature setting.
pub fn hd_estimator_variance_at(scn: &HdScenario, q: &QuadratureSetting) -> f64 {
    let var = optimized_difference_variance(scn, q);
    let slope = d_quadrature_mean(scn, q.gamma_p);
    if slope == 0.0 {
        return f64::INFINITY;
    }
    var / (slope * slope)
}

/// Saturation verification grid and per-point residuals against the
/// closed-form bounds.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SaturationReport {
    pub max_residual: f64,
    pub points: Vec<SaturationPoint>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SaturationPoint {
    pub s: f64,
    pub t: f64,
    pub eta_p1: f64,
    pub eta_p2: f64,
    pub eta_r: f64,
    pub estimand: String,
    pub hd_variance: f64,
    pub qcrb: f64,
    pub residual: f64,
}

/// Sweeps the verification grid and reports `|HD − QCRB|/QCRB` per point.
pub fn verify_saturation(
    s_values: &[f64],
    t_values: &[f64],
    eta_values: &[f64],
) -> Result<SaturationReport> {
    let mut points = Vec::new();
    let mut max_residual = 0.0_f64;
    let alpha_mag = 100.0;
    let sensor_phi = 0.3;
    for &s in s_values {
        for &t in t_values {
            for &ep1 in eta_values {
                for &ep2 in eta_values {
                    for &er in eta_values {
                        let losses = LossBudget::new(ep1, ep2, er)?;
                        for estimand in [Estimand::Transmission, Estimand::Phase] {
                            let scn = HdScenario::phase_matched(
                                s, alpha_mag, 0.0, 0.2, losses, t, sensor_phi, estimand,
                            )?;
                            let n = scn.photons_on_sensor();
                            let probe = if s == 0.0 { Probe::Coherent } else { Probe::Btmss { s } };
                            let qcrb = BoundQuery::new(estimand, probe, t, n, losses)?.evaluate();
                            let hd = hd_estimator_variance(&scn);
                            let residual = (hd - qcrb).abs() / qcrb;
                            max_residual = max_residual.max(residual);
                            points.push(SaturationPoint {
                                s,
                                t,
                                eta_p1: ep1,
                                eta_p2: ep2,
                                eta_r: er,
                                estimand: format!("{estimand:?}"),
                                hd_variance: hd,
                                qcrb,
                                residual,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(SaturationReport { max_residual, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scenario(s: f64, t: f64, losses: LossBudget, estimand: Estimand) -> HdScenario {
        HdScenario::phase_matched(s, 50.0, 0.0, 0.1, losses, t, 0.7, estimand).unwrap()
    }

    #[test]
    fn gain_vanishes_without_correlations() {
        assert_eq!(optimal_gain(0.5, 0.8, 0.0, 0.0), 0.0);
        assert_eq!(optimal_gain(0.5, 0.8, 1.0, std::f64::consts::FRAC_PI_2).abs() < 1e-15, true);
        // sign flips under angle_sum -> angle_sum + pi
        let g0 = optimal_gain(0.5, 0.8, 1.0, 0.2);
        let g1 = optimal_gain(0.5, 0.8, 1.0, 0.2 + std::f64::consts::PI);
        assert_relative_eq!(g0, -g1, epsilon = 1e-12);
    }

    #[test]
    fn coherent_difference_variance_is_shot_noise() {
        let scn = scenario(0.0, 1.0, LossBudget::LOSSLESS, Estimand::Transmission);
        let q = scn.optimal_setting();
        assert_relative_eq!(optimized_difference_variance(&scn, &q), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lossless_variance_floor_is_sech() {
        for s in [0.5, 1.0, 2.0] {
            let scn = scenario(s, 1.0, LossBudget::LOSSLESS, Estimand::Transmission);
            let q = scn.optimal_setting();
            assert_relative_eq!(
                optimized_difference_variance(&scn, &q),
                1.0 / (2.0 * s).cosh(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn variance_minimized_at_multiples_of_pi() {
        let scn = scenario(1.0, 0.8, LossBudget::LOSSLESS, Estimand::Transmission);
        let opt = scn.optimal_setting();
        let best = optimized_difference_variance(&scn, &opt);
        for detune in [0.1, 0.5, 1.0] {
            let q = QuadratureSetting { gamma_p: opt.gamma_p + detune, ..opt };
            assert!(optimized_difference_variance(&scn, &q) > best);
        }
    }

    #[test]
    fn optimal_gain_is_a_true_minimum() {
        let scn = scenario(1.2, 0.6, LossBudget::new(0.9, 0.8, 0.85).unwrap(), Estimand::Phase);
        let q = scn.optimal_setting();
        let g = optimal_gain(scn.t_p(), scn.t_r(), scn.probe.s, scn.angle_sum(&q));
        let best = difference_variance(&scn, &q, g);
        assert_relative_eq!(best, optimized_difference_variance(&scn, &q), max_relative = 1e-12);
        for delta in [0.01, -0.01, 0.1, -0.1] {
            assert!(difference_variance(&scn, &q, g + delta) > best);
        }
    }

    #[test]
    fn conjugate_quadrature_symmetry() {
        let scn = scenario(1.0, 0.7, LossBudget::new(0.9, 0.95, 0.8).unwrap(), Estimand::Transmission);
        let q = scn.optimal_setting();
        let conj = QuadratureSetting {
            gamma_p: q.gamma_p + std::f64::consts::FRAC_PI_2,
            gamma_r: q.gamma_r + std::f64::consts::FRAC_PI_2,
            parity: Parity::Odd,
        };
        let g = optimal_gain(scn.t_p(), scn.t_r(), scn.probe.s, 0.0);
        let gc = optimal_gain(scn.t_p(), scn.t_r(), scn.probe.s, std::f64::consts::PI);
        assert_relative_eq!(g, -gc, epsilon = 1e-12);
        assert_relative_eq!(
            difference_variance(&scn, &q, g),
            difference_variance(&scn, &conj, gc),
            max_relative = 1e-12
        );
    }

    #[test]
    fn coherent_mean_reduces() {
        let scn = HdScenario::phase_matched(
            0.0, 3.0, 0.0, 0.4, LossBudget::LOSSLESS, 0.81, 0.2, Estimand::Transmission,
        )
        .unwrap();
        let gamma = 0.15_f64;
        let expect = 2.0 * scn.t_p().sqrt() * 3.0 * (0.4 - gamma + 0.2).cos();
        assert_relative_eq!(quadrature_mean_probe(&scn, gamma), expect, epsilon = 1e-12);

        let dark = HdScenario::phase_matched(
            0.0, 3.0, 0.0, 0.4, LossBudget::LOSSLESS, 0.0, 0.2, Estimand::Transmission,
        )
        .unwrap();
        assert_eq!(quadrature_mean_probe(&dark, gamma), 0.0);
    }

    #[test]
    fn phase_derivative_matches_finite_difference() {
        let losses = LossBudget::new(0.9, 0.8, 0.85).unwrap();
        let base_chi = 0.3;
        let gamma_of = |scn: &HdScenario| scn.optimal_setting().gamma_p;
        let scn0 = HdScenario::phase_matched(1.0, 5.0, 2.0, base_chi, losses, 0.6, 0.7, Estimand::Phase).unwrap();
        let gamma = gamma_of(&scn0);
        let f = |phi: f64| {
            let scn =
                HdScenario::phase_matched(1.0, 5.0, 2.0, base_chi, losses, 0.6, phi, Estimand::Phase).unwrap();
            quadrature_mean_probe(&scn, gamma)
        };
        let fd = crate::numerics::five_point_derivative(f, 0.7, 1e-4);
        assert_relative_eq!(d_quadrature_mean(&scn0, gamma), fd, max_relative = 1e-8);
    }

    #[test]
    fn saturates_both_bounds_on_grid() {
        let report = verify_saturation(
            &[0.0, 0.5, 1.0, 2.0],
            &[0.1, 0.4, 0.7, 1.0],
            &[0.6, 0.8, 1.0],
        )
        .unwrap();
        assert!(report.max_residual < 1e-10, "max residual {}", report.max_residual);
    }

    #[test]
    fn detuned_angle_is_suboptimal() {
        let scn = scenario(1.0, 0.8, LossBudget::new(0.9, 0.9, 0.9).unwrap(), Estimand::Phase);
        let opt = scn.optimal_setting();
        let detuned = QuadratureSetting { gamma_p: opt.gamma_p + 0.15, gamma_r: opt.gamma_r + 0.15, ..opt };
        let probe = Probe::Btmss { s: scn.probe.s };
        let qcrb = BoundQuery::new(Estimand::Phase, probe, 0.8, scn.photons_on_sensor(), scn.losses)
            .unwrap()
            .evaluate();
        assert!(hd_estimator_variance_at(&scn, &detuned) > qcrb * (1.0 + 1e-6));
        assert_relative_eq!(hd_estimator_variance(&scn), qcrb, max_relative = 1e-10);
    }

    #[test]
    fn theta_shift_compensated_by_seed_phases() {
        let losses = LossBudget::new(0.95, 0.9, 0.8).unwrap();
        let a = HdScenario::phase_matched(1.5, 4.0, 1.0, 0.2, losses, 0.5, 0.6, Estimand::Phase).unwrap();
        // shift chi; xi and theta follow to keep theta = chi + xi
        let b = HdScenario::phase_matched(1.5, 4.0, 1.0, 0.9, losses, 0.5, 0.6, Estimand::Phase).unwrap();
        assert_relative_eq!(hd_estimator_variance(&a), hd_estimator_variance(&b), max_relative = 1e-12);
    }

    #[test]
    fn angle_rule_consistency_check() {
        let scn = scenario(1.0, 0.5, LossBudget::LOSSLESS, Estimand::Phase);
        let q = scn.optimal_setting();
        assert!(q.is_consistent(scn.sensor_phi, scn.probe.theta));
        let bad = QuadratureSetting { gamma_p: q.gamma_p + 0.3, ..q };
        assert!(!bad.is_consistent(scn.sensor_phi, scn.probe.theta));
    }
}
