//! One function per subcommand. Each writes CSV data plus a JSON sidecar
//! into the configured output directory and returns the written paths.

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde_json::json;

use resb_core::bounds::{self, BoundQuery, Probe};
use resb_core::gaussian::{qcrb_bright, Estimand, LossBudget, ProbeSpec};
use resb_core::lineshape::{
    lorentzian_phase, minimum_phase_fft, minimum_phase_kernel, Family, TRUSTED_RANGE,
};
use resb_core::homodyne::verify_saturation;
use resb_core::sensitivity::{
    self, eqef_loss_sweep, eqef_unity_crossing, fom_map, max_sensitivity, LossSweep,
    SensitivityQuery,
};

use crate::config::RunConfig;
use crate::output::Writer;

fn base_metadata(cfg: &RunConfig) -> Vec<(&'static str, String)> {
    vec![
        ("version", env!("CARGO_PKG_VERSION").to_string()),
        ("probe.s", format!("{}", cfg.probe.s)),
        ("losses", format!("eta_p1={} eta_p2={} eta_r={}", cfg.losses.eta_p1, cfg.losses.eta_p2, cfg.losses.eta_r)),
        ("lineshape", format!("{} t_res={} t_off={}", cfg.lineshape.family, cfg.lineshape.t_res, cfg.lineshape.t_off)),
    ]
}

fn query(cfg: &RunConfig, estimand: Estimand, probe: Probe) -> Result<SensitivityQuery> {
    Ok(SensitivityQuery::new(cfg.lineshape_spec()?, estimand, probe, cfg.losses())?)
}

/// Tabulates all four bounds, the reference-arm degradation factor, and the
/// quantum enhancement factor over an inclusive sensor-transmission grid.
pub fn cmd_bounds(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let losses = cfg.losses();
    let s = cfg.probe.s;
    let n = cfg.probe.n_display;
    let rows: Vec<Vec<f64>> = (0..cfg.grid.t_points)
        .map(|k| {
            let t = k as f64 / (cfg.grid.t_points - 1) as f64;
            let q = |estimand, probe| BoundQuery { estimand, probe, t, n, losses }.evaluate();
            vec![
                t,
                q(Estimand::Transmission, Probe::Btmss { s }),
                q(Estimand::Phase, Probe::Btmss { s }),
                q(Estimand::Transmission, Probe::Coherent),
                q(Estimand::Phase, Probe::Coherent),
                bounds::qef(t, s, &losses),
            ]
        })
        .collect();
    let mut meta = base_metadata(cfg);
    meta.push(("n_display", format!("{n}")));
    meta.push(("d_r", format!("{}", bounds::d_r(losses.eta_r, s))));
    meta.push(("squeezing_db", format!("{}", bounds::squeezing_db(s))));
    w.csv(
        "bounds.csv",
        &meta,
        &["t", "qcrb_transmission_btmss", "qcrb_phase_btmss", "qcrb_transmission_coherent", "qcrb_phase_coherent", "qef"],
        &rows,
    )?;
    w.json(
        "bounds.json",
        json!({
            "t_grid": { "points": cfg.grid.t_points, "min": 0.0, "max": 1.0 },
            "d_r": bounds::d_r(losses.eta_r, s),
            "squeezing_db": bounds::squeezing_db(s),
        }),
    )
}

/// Sensitivity-per-photon curve for both estimands, with the transmission
/// and phase response alongside; extrema go to the sidecar.
pub fn cmd_sensitivity_curve(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let probe = Probe::Btmss { s: cfg.probe.s };
    let qt = query(cfg, Estimand::Transmission, probe)?;
    let qp = SensitivityQuery { estimand: Estimand::Phase, ..qt.clone() };
    let grid = cfg.lambda_grid();
    let rows: Result<Vec<Vec<f64>>> = grid
        .iter()
        .map(|&l| {
            Ok(vec![
                l,
                sensitivity::sensitivity_per_photon(&qt, l)?,
                sensitivity::sensitivity_per_photon(&qp, l)?,
                qt.model.transmission(l),
                qt.model.phase(l)?,
            ])
        })
        .collect();
    w.csv(
        "sensitivity_curve.csv",
        &base_metadata(cfg),
        &["lambda", "s_transmission_per_photon", "s_phase_per_photon", "transmission", "phase"],
        &rows?,
    )?;
    let rt = max_sensitivity(&qt)?;
    let rp = max_sensitivity(&qp)?;
    w.json(
        "sensitivity_curve.json",
        json!({
            "lambda_grid": { "min": cfg.grid.lambda_min, "max": cfg.grid.lambda_max, "step": cfg.grid.lambda_step },
            "extrema": {
                "transmission": { "lambda_star": rt.lambda_star, "s_max_per_photon": rt.s_max_per_photon, "substituted": rt.substituted },
                "phase": { "lambda_star": rp.lambda_star, "s_max_per_photon": rp.s_max_per_photon, "substituted": rp.substituted },
            },
        }),
    )
}

/// Maximum sensitivity per photon versus the squeezing parameter.
pub fn cmd_max_vs_s(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let base = query(cfg, Estimand::Transmission, Probe::Coherent)?;
    let s_grid: Vec<f64> = (0..cfg.grid.s_points)
        .map(|k| cfg.grid.s_max * k as f64 / (cfg.grid.s_points - 1) as f64)
        .collect();
    let rows: Result<Vec<Vec<f64>>> = s_grid
        .par_iter()
        .map(|&s| {
            let qt = SensitivityQuery { probe: Probe::Btmss { s }, ..base.clone() };
            let qp = SensitivityQuery { estimand: Estimand::Phase, ..qt.clone() };
            let rt = max_sensitivity(&qt)?;
            let rp = max_sensitivity(&qp)?;
            Ok(vec![s, rt.s_max_per_photon, rt.lambda_star, rp.s_max_per_photon, rp.lambda_star])
        })
        .collect();
    w.csv(
        "max_vs_s.csv",
        &base_metadata(cfg),
        &["s", "s_max_transmission", "lambda_star_transmission", "s_max_phase", "lambda_star_phase"],
        &rows?,
    )?;
    w.json(
        "max_vs_s.json",
        json!({ "s_grid": { "points": cfg.grid.s_points, "min": 0.0, "max": cfg.grid.s_max } }),
    )
}

/// Figure-of-merit map over `(T_res, T_off)` with the unit contour.
pub fn cmd_fom_map(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let family = cfg.family()?;
    if matches!(family, Family::Tabulated { .. }) {
        bail!("fom-map sweeps (t_res, t_off) and does not apply to tabulated lineshapes");
    }
    let map = fom_map(&family, cfg.probe.s, &cfg.losses(), cfg.grid.map_n)?;
    let mut header: Vec<String> = vec!["t_res".into()];
    header.extend(map.t_off.iter().map(|v| format!("{v}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = map
        .t_res
        .iter()
        .enumerate()
        .map(|(i, &tr)| {
            let mut row = vec![tr];
            row.extend((0..map.t_off.len()).map(|j| map.value(i, j)));
            row
        })
        .collect();
    let mut meta = base_metadata(cfg);
    meta.push(("note", "NaN marks the degenerate t_res = t_off diagonal".into()));
    w.csv("fom_map.csv", &meta, &header_refs, &rows)?;
    w.json(
        "fom_map.json",
        json!({
            "grid": { "n": cfg.grid.map_n, "open_interval": "(0, 1) both axes" },
            "unity_contour_segments": map.unity_contour,
        }),
    )
}

/// Quantum enhancement factor versus external loss, per sweep arm.
pub fn cmd_eqef_sweep(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let q = query(cfg, Estimand::Transmission, Probe::Btmss { s: cfg.probe.s })?;
    let sweeps: Vec<LossSweep> = match cfg.eqef.sweep.as_str() {
        "probe" => vec![LossSweep::Probe],
        "reference" => vec![LossSweep::Reference],
        _ => vec![LossSweep::Probe, LossSweep::Reference],
    };
    let mut curves = Vec::new();
    for sweep in &sweeps {
        curves.push(eqef_loss_sweep(&q, *sweep, cfg.grid.sweep_points)?);
    }
    let mut header: Vec<&str> = vec!["eta"];
    for sweep in &sweeps {
        header.push(match sweep {
            LossSweep::Probe => "eqef_probe",
            LossSweep::Reference => "eqef_reference",
        });
    }
    let rows: Vec<Vec<f64>> = (0..cfg.grid.sweep_points)
        .map(|k| {
            let mut row = vec![curves[0].samples[k].0];
            row.extend(curves.iter().map(|c| c.samples[k].1));
            row
        })
        .collect();
    w.csv("eqef_sweep.csv", &base_metadata(cfg), &header, &rows)?;
    let crossing = if sweeps.contains(&LossSweep::Reference) {
        eqef_unity_crossing(&q).ok()
    } else {
        None
    };
    w.json(
        "eqef_sweep.json",
        json!({
            "sweeps": curves.iter().map(|c| json!({
                "arm": format!("{:?}", c.sweep),
                "monotone_nondecreasing": c.monotone_nondecreasing,
            })).collect::<Vec<_>>(),
            "reference_unity_crossing": crossing,
        }),
    )
}

/// Cross-validates the FFT minimum-phase reconstruction against the
/// kernel-integral route (and, for Lorentzian, the closed form).
pub fn cmd_kk_phase(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let spec = cfg.lineshape_spec()?;
    if matches!(spec.family, Family::Tabulated { .. }) {
        bail!("kk-phase needs a differentiable log-magnitude; tabulated lineshapes are not supported");
    }
    let spectrum = minimum_phase_fft(|l| spec.transmission(l), TRUSTED_RANGE, true, spec.reference_order())?;
    let grid: Vec<f64> = cfg
        .lambda_grid()
        .into_iter()
        .filter(|l| (TRUSTED_RANGE.0..=TRUSTED_RANGE.1).contains(l))
        .collect();
    let rows: Result<Vec<Vec<f64>>> = grid
        .par_iter()
        .map(|&l| {
            let fft = spectrum.eval(l)?;
            let kernel = minimum_phase_kernel(l, &spec)?;
            Ok(vec![l, spec.transmission(l), fft, kernel, (fft - kernel).abs()])
        })
        .collect();
    let rows = rows?;
    let max_delta = rows.iter().map(|r| r[4]).fold(0.0_f64, f64::max);
    let analytic_delta = if spec.family == Family::Lorentzian {
        Some(
            rows.iter()
                .map(|r| (r[2] - lorentzian_phase(r[0], &spec)).abs())
                .fold(0.0_f64, f64::max),
        )
    } else {
        None
    };
    let mut meta = base_metadata(cfg);
    meta.push(("trusted_range", format!("[{}, {}]", TRUSTED_RANGE.0, TRUSTED_RANGE.1)));
    w.csv(
        "kk_phase.csv",
        &meta,
        &["lambda", "transmission", "phi_fft", "phi_kernel", "abs_delta_phi"],
        &rows,
    )?;
    w.json(
        "kk_phase.json",
        json!({
            "trusted_range": { "min": TRUSTED_RANGE.0, "max": TRUSTED_RANGE.1 },
            "max_abs_delta_phi": max_delta,
            "max_abs_delta_vs_analytic": analytic_delta,
        }),
    )
}

/// First-principles verification: the Gaussian state engine against the
/// closed-form bounds, and the optimized homodyne model against both.
/// Exits nonzero when any residual exceeds its configured tolerance.
pub fn cmd_verify(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let s_values = [0.5, 1.0, 1.5, 2.0];
    let t_values: Vec<f64> = (0..10).map(|k| 0.05 + 0.1 * k as f64).collect();
    let eta_values = [0.8, 1.0];

    // With `total_photons` false the closed form is fed the stimulated
    // (bright-seed) photon number, the convention of its derivation, so the
    // residual is pure numerical noise. With it true the closed form sees
    // the actual photon count including the spontaneously scattered sinh²s,
    // and the residual is the bright-limit approximation error, which
    // shrinks with brightness.
    let oracle_max = |estimand: Estimand, n: f64, total_photons: bool| -> Result<f64> {
        let mut max_res = 0.0_f64;
        for &s in &s_values {
            for &t in &t_values {
                for &ep1 in &eta_values {
                    for &ep2 in &eta_values {
                        for &er in &eta_values {
                            let losses = LossBudget::new(ep1, ep2, er)?;
                            let spec = ProbeSpec::seeded_for_photons(s, n / ep1);
                            let engine = qcrb_bright(&spec, &losses, t, 0.4, estimand)?;
                            let n_closed = if total_photons {
                                n + ep1 * spec.s.sinh().powi(2)
                            } else {
                                n
                            };
                            let closed = BoundQuery::new(estimand, Probe::Btmss { s }, t, n_closed, losses)?
                                .evaluate();
                            max_res = max_res.max((engine - closed).abs() / closed);
                        }
                    }
                }
            }
        }
        Ok(max_res)
    };

    let phase_res = oracle_max(Estimand::Phase, cfg.verify.n_bright, false)?;
    let trans_res = oracle_max(Estimand::Transmission, cfg.verify.n_bright, true)?;
    let trans_res_10x = oracle_max(Estimand::Transmission, 10.0 * cfg.verify.n_bright, true)?;

    // coherent limit: the engine at s = 0 against the coherent closed forms
    let mut coherent_res = 0.0_f64;
    for &t in &t_values {
        for &ep2 in &eta_values {
            let losses = LossBudget::new(1.0, ep2, 1.0)?;
            for estimand in [Estimand::Phase, Estimand::Transmission] {
                let spec = ProbeSpec::coherent(cfg.verify.n_bright);
                let engine = qcrb_bright(&spec, &losses, t, 0.4, estimand)?;
                let closed =
                    BoundQuery::new(estimand, Probe::Coherent, t, cfg.verify.n_bright, losses)?.evaluate();
                coherent_res = coherent_res.max((engine - closed).abs() / closed);
            }
        }
    }

    let hd = verify_saturation(&[0.0, 0.5, 1.0, 2.0], &[0.1, 0.35, 0.6, 0.85, 1.0], &[0.7, 1.0])?;

    let pass = phase_res < cfg.verify.phase_tol
        && trans_res < cfg.verify.transmission_tol
        && trans_res_10x < trans_res
        && coherent_res < cfg.verify.coherent_tol
        && hd.max_residual < cfg.verify.hd_tol;
    w.json(
        "verify.json",
        json!({
            "grid": {
                "s": s_values, "t": t_values, "eta": eta_values,
                "n_bright": cfg.verify.n_bright,
            },
            "phase_oracle": { "max_residual": phase_res, "tolerance": cfg.verify.phase_tol },
            "transmission_oracle": {
                "max_residual": trans_res,
                "tolerance": cfg.verify.transmission_tol,
                "max_residual_at_10x_brightness": trans_res_10x,
                "residual_decreases_with_brightness": trans_res_10x < trans_res,
            },
            "coherent_oracle": { "max_residual": coherent_res, "tolerance": cfg.verify.coherent_tol },
            "homodyne_saturation": {
                "max_residual": hd.max_residual,
                "tolerance": cfg.verify.hd_tol,
                "points": hd.points.len(),
            },
            "pass": pass,
        }),
    )?;
    if !pass {
        bail!(
            "verification failed: phase {phase_res:.3e}, transmission {trans_res:.3e} (10x: {trans_res_10x:.3e}), coherent {coherent_res:.3e}, homodyne {:.3e}",
            hd.max_residual
        );
    }
    Ok(())
}
