//! Sensitivity-per-photon curves, optimal-wavelength maxima, the
//! phase-vs-transmission figure of merit, and quantum-enhancement loss
//! sweeps. The sensitivity per probing photon is
//! `S(Λ|X)/N = |dX/dΛ|² / (N · Δ²X_QCRB(T(Λ)))`, with the photon number
//! cancelling; everything here is stored per photon.

use rayon::prelude::*;

use crate::bounds::{self, BoundQuery, Probe};
use crate::error::{Error, Result};
use crate::gaussian::{Estimand, LossBudget};
use crate::lineshape::{Family, LineshapeSpec, TransferModel, TRUSTED_RANGE};
use crate::numerics::golden_section_max;

/// Search grid step over the trusted range.
const COARSE_STEP: f64 = 1e-3;
/// Golden-section bracket tolerance on the optimal wavelength.
const REFINE_TOL: f64 = 1e-8;
/// Offset used to evaluate the continuous extension of 0/0 points.
const SINGULARITY_OFFSET: f64 = 1e-6;

/// One sensitivity evaluation context: lineshape, estimand, probe, losses.
#[derive(Debug, Clone)]
pub struct SensitivityQuery {
    pub model: TransferModel,
    pub estimand: Estimand,
    pub probe: Probe,
    pub losses: LossBudget,
}

impl SensitivityQuery {
    pub fn new(spec: LineshapeSpec, estimand: Estimand, probe: Probe, losses: LossBudget) -> Result<Self> {
        Ok(Self { model: TransferModel::new(spec)?, estimand, probe, losses })
    }

    pub fn with_probe(&self, probe: Probe) -> Self {
        Self { probe, ..self.clone() }
    }

    fn with_losses(&self, losses: LossBudget) -> Self {
        Self { losses, ..self.clone() }
    }
}

/// Optimal wavelength, maximum per-photon sensitivity, and the sampled curve.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SensitivityResult {
    pub lambda_star: f64,
    pub s_max_per_photon: f64,
    /// `(Λ, S/N)` samples over the search grid.
    pub curve: Vec<(f64, f64)>,
    /// True if the maximum sits on a removable 0/0 point that was resolved
    /// by the continuous extension.
    pub substituted: bool,
    pub estimand: String,
    pub probe_squeezing: f64,
}

/// `N · Δ²X` — the bound with the photon number factored out.
fn per_photon_bound(estimand: Estimand, probe: Probe, t: f64, losses: &LossBudget) -> f64 {
    // N = 1 makes evaluate() return the per-photon variance
    BoundQuery { estimand, probe, t, n: 1.0, losses: *losses }.evaluate()
}

fn sensitivity_raw(q: &SensitivityQuery, lambda: f64) -> Result<(f64, bool)> {
    let t = q.model.transmission(lambda).clamp(0.0, 1.0);
    let (dt, dphi) = q.model.transfer_derivatives(lambda)?;
    let slope = match q.estimand {
        Estimand::Transmission => dt,
        Estimand::Phase => dphi,
    };
    let num = slope * slope;
    let den = per_photon_bound(q.estimand, q.probe, t, &q.losses);
    if den.is_infinite() {
        return Ok((0.0, false));
    }
    if num < 1e-12 && den < 1e-12 {
        // removable 0/0 (e.g. perfect-dip transmission on resonance):
        // continuous extension from just off the singular point
        let off = if lambda >= 0.0 { lambda + SINGULARITY_OFFSET } else { lambda - SINGULARITY_OFFSET };
        let (v, _) = sensitivity_raw(q, off)?;
        return Ok((v, true));
    }
    Ok((num / den, false))
}

/// Sensitivity per probing photon at one generalized wavelength.
pub fn sensitivity_per_photon(q: &SensitivityQuery, lambda: f64) -> Result<f64> {
    sensitivity_raw(q, lambda).map(|(v, _)| v)
}

/// Closed-form Lorentzian sensitivity (transmission and phase routes),
/// agreeing with the generic pipeline away from removable singularities.
pub fn sensitivity_closed_lorentzian(q: &SensitivityQuery, lambda: f64) -> Result<f64> {
    if q.model.spec.family != Family::Lorentzian {
        return Err(Error::UnsupportedLineshape(format!("{:?}", q.model.spec.family)));
    }
    let (tr, to) = (q.model.spec.t_res, q.model.spec.t_off);
    let s = q.probe.squeezing();
    let corr = q.losses.eta_p1 * bounds::d_r(q.losses.eta_r, s) * (1.0 - 1.0 / (2.0 * s).cosh());
    let l2 = lambda * lambda;
    let u = 1.0 + l2;
    let w = l2 * to + tr;
    match q.estimand {
        Estimand::Transmission => {
            if lambda == 0.0 {
                // limit: zero unless the dip is perfect, where the bound
                // vanishes with the slope
                return Ok(if tr == 0.0 { 4.0 * q.losses.eta_p2 * to } else { 0.0 });
            }
            let dd = (to - tr).powi(2);
            let a = u.powi(3) * w / (4.0 * l2 * q.losses.eta_p2 * dd);
            let b = u.powi(2) * w * w / (4.0 * l2 * dd) * corr;
            Ok(1.0 / (a - b))
        }
        Estimand::Phase => {
            let rr = tr.sqrt();
            let oo = to.sqrt();
            let dd = (oo - rr).powi(2) * (l2 * oo - rr).powi(2);
            if dd == 0.0 {
                // zero-sensitivity wavelength (inflection) or flat phase
                return Ok(0.0);
            }
            let a = u.powi(3) * w / (4.0 * q.losses.eta_p2 * dd);
            let b = u.powi(2) * w * w / (4.0 * dd) * corr;
            Ok(1.0 / (a - b))
        }
    }
}

/// Grid search plus golden-section refinement of the per-photon sensitivity
/// over the trusted wavelength range. Symmetric double maxima are reported
/// at the non-negative wavelength.
pub fn max_sensitivity(q: &SensitivityQuery) -> Result<SensitivityResult> {
    let (lo, hi) = TRUSTED_RANGE;
    let n = ((hi - lo) / COARSE_STEP).round() as usize;
    let mut curve = Vec::with_capacity(n + 1);
    let mut best_idx = 0;
    let mut best = f64::NEG_INFINITY;
    let mut any_substituted = false;
    for i in 0..=n {
        let lambda = lo + COARSE_STEP * i as f64;
        let (v, sub) = sensitivity_raw(q, lambda)?;
        any_substituted |= sub;
        curve.push((lambda, v));
        if v > best {
            best = v;
            best_idx = i;
        }
    }
    let bracket_lo = (curve[best_idx].0 - COARSE_STEP).max(lo);
    let bracket_hi = (curve[best_idx].0 + COARSE_STEP).min(hi);
    let eval = |l: f64| sensitivity_raw(q, l).map(|(v, _)| v).unwrap_or(0.0);
    let (mut lambda_star, mut s_max) = golden_section_max(eval, bracket_lo, bracket_hi, REFINE_TOL);
    if lambda_star.abs() < 1e-6 {
        lambda_star = 0.0;
        s_max = eval(0.0);
    }
    // tie-break mirrored maxima toward positive wavelengths
    if lambda_star < 0.0 {
        let mirror = eval(-lambda_star);
        if (mirror - s_max).abs() <= 1e-9 * s_max.abs().max(1e-300) {
            lambda_star = -lambda_star;
            s_max = mirror.max(s_max);
        }
    }
    Ok(SensitivityResult {
        lambda_star,
        s_max_per_photon: s_max,
        curve,
        substituted: any_substituted,
        estimand: format!("{:?}", q.estimand),
        probe_squeezing: q.probe.squeezing(),
    })
}

fn max_only(q: &SensitivityQuery) -> Result<f64> {
    max_sensitivity(q).map(|r| r.s_max_per_photon)
}

/// Figure of merit: best phase-route sensitivity over best transmission-route
/// sensitivity, both with the squeezed probe.
pub fn fom(model: &TransferModel, s: f64, losses: &LossBudget) -> Result<f64> {
    let probe = Probe::Btmss { s };
    let phase = SensitivityQuery {
        model: model.clone(),
        estimand: Estimand::Phase,
        probe,
        losses: *losses,
    };
    let trans = SensitivityQuery { estimand: Estimand::Transmission, ..phase.clone() };
    Ok(max_only(&phase)? / max_only(&trans)?)
}

/// Figure-of-merit map over on/off-resonance transmissions, with the unit
/// contour extracted as line segments.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FomMap {
    pub t_res: Vec<f64>,
    pub t_off: Vec<f64>,
    /// Row-major `[i_t_res][j_t_off]`; NaN marks the degenerate diagonal.
    pub values: Vec<f64>,
    /// Segments of the FOM = 1 contour in (t_res, t_off) coordinates.
    pub unity_contour: Vec<((f64, f64), (f64, f64))>,
}

impl FomMap {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.t_off.len() + j]
    }
}

/// Computes the FOM on a `grid_n x grid_n` open grid of
/// `(T_res, T_off) ∈ (0,1)²`, cells distributed across workers.
pub fn fom_map(family: &Family, s: f64, losses: &LossBudget, grid_n: usize) -> Result<FomMap> {
    if grid_n < 2 {
        return Err(Error::OutOfRange { name: "grid_n", value: grid_n as f64, range: ">= 2" });
    }
    let axis: Vec<f64> = (0..grid_n).map(|i| (i + 1) as f64 / (grid_n + 1) as f64).collect();
    let cells: Vec<(usize, usize)> =
        (0..grid_n).flat_map(|i| (0..grid_n).map(move |j| (i, j))).collect();
    let values: Result<Vec<f64>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let (tr, to) = (axis[i], axis[j]);
            if tr == to {
                return Ok(f64::NAN);
            }
            let spec = LineshapeSpec::new(family.clone(), tr, to)?;
            let model = TransferModel::new(spec)?;
            fom(&model, s, losses)
        })
        .collect();
    let values = values?;

    // marching-squares extraction of the FOM = 1 contour
    let mut unity_contour = Vec::new();
    let at = |i: usize, j: usize| values[i * grid_n + j];
    for i in 0..grid_n - 1 {
        for j in 0..grid_n - 1 {
            let corners = [
                (at(i, j), axis[i], axis[j]),
                (at(i + 1, j), axis[i + 1], axis[j]),
                (at(i + 1, j + 1), axis[i + 1], axis[j + 1]),
                (at(i, j + 1), axis[i], axis[j + 1]),
            ];
            if corners.iter().any(|c| c.0.is_nan()) {
                continue;
            }
            let mut crossings = Vec::new();
            for k in 0..4 {
                let (v0, x0, y0) = corners[k];
                let (v1, x1, y1) = corners[(k + 1) % 4];
                if (v0 - 1.0) * (v1 - 1.0) < 0.0 {
                    let t = (1.0 - v0) / (v1 - v0);
                    crossings.push((x0 + t * (x1 - x0), y0 + t * (y1 - y0)));
                }
            }
            if crossings.len() >= 2 {
                unity_contour.push((crossings[0], crossings[1]));
            }
        }
    }
    Ok(FomMap { t_res: axis.clone(), t_off: axis, values, unity_contour })
}

/// Effective quantum enhancement factor: squeezed-probe maximum over
/// coherent-probe maximum, each at its own optimal wavelength.
pub fn eqef(q: &SensitivityQuery) -> Result<f64> {
    let s = q.probe.squeezing();
    let squeezed = q.with_probe(Probe::Btmss { s });
    let coherent = q.with_probe(Probe::Coherent);
    Ok(max_only(&squeezed)? / max_only(&coherent)?)
}

/// Which external loss the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LossSweep {
    /// Total probe-path transmission `η_p = η_p1 η_p2`, applied entirely as
    /// `η_p1` (the split is immaterial for the enhancement factor).
    Probe,
    Reference,
}

/// Sampled enhancement-vs-loss curve.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EqefCurve {
    pub sweep: LossSweep,
    pub samples: Vec<(f64, f64)>,
    /// True when the curve is non-decreasing in the swept transmission.
    pub monotone_nondecreasing: bool,
}

/// Sweeps the enhancement factor against one external transmission, the
/// other losses held at the query's budget.
pub fn eqef_loss_sweep(
    q: &SensitivityQuery,
    sweep: LossSweep,
    n_samples: usize,
) -> Result<EqefCurve> {
    let mut samples = Vec::with_capacity(n_samples);
    for k in 1..=n_samples {
        let eta = k as f64 / n_samples as f64;
        let losses = match sweep {
            LossSweep::Probe => LossBudget { eta_p1: eta, eta_p2: 1.0, ..q.losses },
            LossSweep::Reference => LossBudget { eta_r: eta, ..q.losses },
        };
        let v = eqef(&q.with_losses(losses))?;
        samples.push((eta, v));
    }
    let monotone = samples.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12);
    Ok(EqefCurve { sweep, samples, monotone_nondecreasing: monotone })
}

/// Bisects for the reference transmission where the enhancement crosses one.
pub fn eqef_unity_crossing(q: &SensitivityQuery) -> Result<f64> {
    let f = |eta: f64| -> Result<f64> {
        let losses = LossBudget { eta_r: eta, ..q.losses };
        Ok(eqef(&q.with_losses(losses))? - 1.0)
    };
    let (mut lo, mut hi) = (0.05_f64, 1.0_f64);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo * fhi > 0.0 {
        return Err(Error::OutOfRange {
            name: "eqef crossing",
            value: flo,
            range: "sign change on (0.05, 1]",
        });
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? * f(lo)? <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
