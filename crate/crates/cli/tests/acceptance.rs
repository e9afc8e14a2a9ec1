//! End-to-end acceptance suite. Each numbered criterion prints one PASS/FAIL
//! line; the test fails if any criterion does.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use resb_core::bounds::{self, BoundQuery, Probe};
use resb_core::gaussian::{qcrb_bright, Estimand, LossBudget, ProbeSpec};
use resb_core::homodyne::verify_saturation;
use resb_core::lineshape::{
    lorentzian_phase, minimum_phase_fft, minimum_phase_kernel, Family, LineshapeSpec,
    TRUSTED_RANGE,
};
use resb_core::numerics::golden_section_max;
use resb_core::sensitivity::{
    eqef, eqef_loss_sweep, eqef_unity_crossing, fom, fom_map, max_sensitivity,
    sensitivity_closed_lorentzian, sensitivity_per_photon, LossSweep, SensitivityQuery,
};
use resb_core::TransferModel;

struct Suite {
    failures: Vec<String>,
}

impl Suite {
    fn run(
        &mut self,
        number: u32,
        description: &str,
        budget: Option<Duration>,
        check: impl FnOnce() -> Result<(), String>,
    ) {
        let start = Instant::now();
        let mut outcome = check();
        let elapsed = start.elapsed();
        if let Some(budget) = budget {
            if outcome.is_ok() && elapsed > budget {
                outcome = Err(format!("runtime {elapsed:?} exceeds budget {budget:?}"));
            }
        }
        match outcome {
            Ok(()) => println!("acceptance criterion {number:2}: PASS — {description} ({elapsed:.2?})"),
            Err(why) => {
                println!("acceptance criterion {number:2}: FAIL — {description}: {why}");
                self.failures.push(format!("criterion {number}: {why}"));
            }
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Oracle grid shared by criteria 1 and 2: 4 x 10 x 2 x 2 x 2 points of
/// (s, T, eta_p1, eta_p2, eta_r).
fn oracle_grid() -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let s = vec![0.5, 1.0, 1.5, 2.0];
    let t = (0..10).map(|k| 0.05 + 0.1 * k as f64).collect();
    let eta = vec![0.8, 1.0];
    (s, t, eta)
}

/// Max relative residual of the state-engine bound against the closed form
/// over the oracle grid. With `total_photons` the closed form is evaluated
/// at the full photon count including the spontaneous sinh^2 s, exposing the
/// bright-limit approximation error.
fn oracle_residual(estimand: Estimand, n: f64, total_photons: bool) -> f64 {
    let (s_values, t_values, eta_values) = oracle_grid();
    let mut max_res = 0.0_f64;
    for &s in &s_values {
        for &t in &t_values {
            for &ep1 in &eta_values {
                for &ep2 in &eta_values {
                    for &er in &eta_values {
                        let losses = LossBudget::new(ep1, ep2, er).unwrap();
                        let spec = ProbeSpec::seeded_for_photons(s, n / ep1);
                        let engine = qcrb_bright(&spec, &losses, t, 0.4, estimand).unwrap();
                        let n_closed =
                            if total_photons { n + ep1 * s.sinh().powi(2) } else { n };
                        let closed = BoundQuery::new(estimand, Probe::Btmss { s }, t, n_closed, losses)
                            .unwrap()
                            .evaluate();
                        max_res = max_res.max(rel(engine, closed));
                    }
                }
            }
        }
    }
    max_res
}

fn lorentzian_query(t_res: f64, t_off: f64, estimand: Estimand, probe: Probe, losses: LossBudget) -> SensitivityQuery {
    SensitivityQuery::new(LineshapeSpec::lorentzian(t_res, t_off).unwrap(), estimand, probe, losses).unwrap()
}

/// Tiny deterministic xorshift64* generator for the random draws of
/// criterion 5 (no RNG dependency, fully reproducible).
struct Rng(u64);

impl Rng {
    fn next_unit(&mut self) -> f64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        (self.0.wrapping_mul(0x2545_F491_4F6C_DD1D) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_unit()
    }
}

fn criterion_1() -> Result<(), String> {
    let res = oracle_residual(Estimand::Phase, 1e6, false);
    if res < 1e-6 {
        Ok(())
    } else {
        Err(format!("max relative residual {res:.3e} >= 1e-6"))
    }
}

fn criterion_2() -> Result<(), String> {
    let res = oracle_residual(Estimand::Transmission, 1e6, true);
    let res_10x = oracle_residual(Estimand::Transmission, 1e7, true);
    if res >= 1e-3 {
        return Err(format!("max relative residual {res:.3e} >= 1e-3"));
    }
    if res_10x >= res {
        return Err(format!("residual did not decrease with brightness: {res:.3e} -> {res_10x:.3e}"));
    }
    Ok(())
}

fn criterion_3() -> Result<(), String> {
    let report = verify_saturation(&[0.0, 0.5, 1.0, 2.0], &[0.1, 0.35, 0.6, 0.85, 1.0], &[0.7, 1.0])
        .map_err(|e| e.to_string())?;
    if report.max_residual < 1e-10 {
        Ok(())
    } else {
        Err(format!("max saturation residual {:.3e} >= 1e-10", report.max_residual))
    }
}

fn criterion_4() -> Result<(), String> {
    // FFT vs analytic Lorentzian, modulo a global constant
    for (t_res, t_off) in [(1.0, 0.0), (0.75, 0.1)] {
        let spec = LineshapeSpec::lorentzian(t_res, t_off).unwrap();
        let ps = minimum_phase_fft(|l| spec.transmission(l), TRUSTED_RANGE, true, spec.reference_order())
            .map_err(|e| e.to_string())?;
        let deltas: Vec<f64> = ps
            .samples()
            .map(|(l, p)| p - lorentzian_phase(l, &spec))
            .collect();
        let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
        let max = deltas.iter().map(|d| (d - mean).abs()).fold(0.0, f64::max);
        if max >= 1e-3 {
            return Err(format!("FFT vs analytic ({t_res}, {t_off}): {max:.3e} rad >= 1e-3"));
        }
    }
    // FFT vs kernel integral, Butterworth m = 3
    let spec = LineshapeSpec::butterworth(3, 0.9, 0.1).unwrap();
    let ps = minimum_phase_fft(|l| spec.transmission(l), TRUSTED_RANGE, true, spec.reference_order())
        .map_err(|e| e.to_string())?;
    let mut max = 0.0_f64;
    for i in 0..=24 {
        let l = -3.0 + 0.25 * i as f64;
        let fft = ps.eval(l).map_err(|e| e.to_string())?;
        let ker = minimum_phase_kernel(l, &spec).map_err(|e| e.to_string())?;
        max = max.max((fft - ker).abs());
    }
    if max >= 2e-3 {
        return Err(format!("FFT vs kernel (Butterworth m=3): {max:.3e} rad >= 2e-3"));
    }
    Ok(())
}

fn criterion_5() -> Result<(), String> {
    let mut rng = Rng(0x9E3779B97F4A7C15);
    for draw in 0..100 {
        let t_res = rng.range(0.05, 1.0);
        let mut t_off = rng.range(0.0, 0.95);
        if (t_res - t_off).abs() < 1e-3 {
            t_off = (t_off + 0.1).min(0.95);
        }
        let s = rng.range(0.0, 2.5);
        let losses = LossBudget::new(rng.range(0.5, 1.0), rng.range(0.5, 1.0), rng.range(0.5, 1.0)).unwrap();
        let lambda = rng.range(0.05, 2.9);
        for estimand in [Estimand::Transmission, Estimand::Phase] {
            let q = lorentzian_query(t_res, t_off, estimand, Probe::Btmss { s }, losses);
            let closed = sensitivity_closed_lorentzian(&q, lambda).map_err(|e| e.to_string())?;
            let generic = sensitivity_per_photon(&q, lambda).map_err(|e| e.to_string())?;
            if rel(generic, closed) >= 1e-9 {
                return Err(format!(
                    "draw {draw} ({estimand:?}): generic {generic:.12e} vs closed {closed:.12e}"
                ));
            }
        }
    }
    Ok(())
}

fn criterion_6() -> Result<(), String> {
    let lossless = LossBudget::LOSSLESS;
    // independent scalar-search oracles for the perfect peak at s = 2
    let sech4 = 1.0 / 4.0_f64.cosh();
    let phase_oracle = 4.0 / sech4; // the phase curve peaks exactly on resonance
    let (x_star, trans_oracle) =
        golden_section_max(|x| 4.0 * x / ((1.0 + x).powi(2) * (x + sech4)), 1e-9, 9.0, 1e-12);

    let qp = lorentzian_query(1.0, 0.0, Estimand::Phase, Probe::Btmss { s: 2.0 }, lossless);
    let rp = max_sensitivity(&qp).map_err(|e| e.to_string())?;
    if rp.lambda_star != 0.0 || rel(rp.s_max_per_photon, phase_oracle) >= 1e-3 {
        return Err(format!("peak phase: S*={} at {}", rp.s_max_per_photon, rp.lambda_star));
    }
    if rel(phase_oracle, 109.24) >= 1e-3 {
        return Err("phase oracle drifted from 109.24".into());
    }

    let qt = lorentzian_query(1.0, 0.0, Estimand::Transmission, Probe::Btmss { s: 2.0 }, lossless);
    let rt = max_sensitivity(&qt).map_err(|e| e.to_string())?;
    if rel(rt.s_max_per_photon, trans_oracle) >= 1e-3 || rel(rt.lambda_star, x_star.sqrt()) >= 1e-3 {
        return Err(format!("peak transmission: S*={} at {}", rt.s_max_per_photon, rt.lambda_star));
    }
    if rel(trans_oracle, 2.444) >= 1e-3 || rel(x_star.sqrt(), 0.356) >= 2e-3 {
        return Err("transmission oracle drifted from 2.444 @ 0.356".into());
    }

    let qd = lorentzian_query(0.0, 1.0, Estimand::Transmission, Probe::Btmss { s: 2.0 }, lossless);
    let rd = max_sensitivity(&qd).map_err(|e| e.to_string())?;
    if rel(rd.s_max_per_photon, 4.0) >= 1e-6 {
        return Err(format!("perfect dip: S*={} (expected 4 within 1e-6)", rd.s_max_per_photon));
    }
    Ok(())
}

fn criterion_7() -> Result<(), String> {
    let lossless = LossBudget::LOSSLESS;
    let peak = TransferModel::new(LineshapeSpec::lorentzian(1.0, 0.0).unwrap()).unwrap();
    let f = fom(&peak, 2.0, &lossless).map_err(|e| e.to_string())?;
    if rel(f, 44.7) >= 1e-2 || f <= 10.0 {
        return Err(format!("perfect-peak FOM {f}"));
    }
    // Lorentzian map: above one away from the T_res -> 0 boundary
    let map = fom_map(&Family::Lorentzian, 2.0, &lossless, 15).map_err(|e| e.to_string())?;
    for i in 1..15 {
        for j in 0..15 {
            let v = map.value(i, j);
            if i != j && !(v > 1.0) {
                return Err(format!("Lorentzian FOM({}, {}) = {v}", map.t_res[i], map.t_off[j]));
            }
        }
    }
    // Butterworth m = 3: a nonempty FOM < 1 region near the diagonal
    let map3 = fom_map(&Family::Butterworth { m: 3 }, 2.0, &lossless, 5).map_err(|e| e.to_string())?;
    let below: usize = (0..5)
        .flat_map(|i| (0..5).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && map3.value(i, j) < 1.0)
        .count();
    if below == 0 {
        return Err("Butterworth m=3 map has no FOM < 1 cells".into());
    }
    Ok(())
}

fn criterion_8() -> Result<(), String> {
    let lossless = LossBudget::LOSSLESS;
    for (t_res, t_off) in [(1.0, 0.0), (0.75, 0.1), (0.3, 0.9), (0.6, 0.2)] {
        for estimand in [Estimand::Phase, Estimand::Transmission] {
            let q = lorentzian_query(t_res, t_off, estimand, Probe::Btmss { s: 2.0 }, lossless);
            let crossing = eqef_unity_crossing(&q).map_err(|e| e.to_string())?;
            if (crossing - 0.5).abs() >= 1e-6 {
                return Err(format!("({t_res}, {t_off}, {estimand:?}): crossing at {crossing}"));
            }
        }
    }
    let q = lorentzian_query(1.0, 0.0, Estimand::Phase, Probe::Btmss { s: 2.0 }, lossless);
    let curve = eqef_loss_sweep(&q, LossSweep::Probe, 25).map_err(|e| e.to_string())?;
    if !curve.monotone_nondecreasing {
        return Err("probe sweep is not monotone".into());
    }
    if curve.samples.iter().any(|(_, v)| *v < 1.0 - 1e-9) {
        return Err("probe sweep dips below 1".into());
    }
    let dip = lorentzian_query(0.0, 1.0, Estimand::Transmission, Probe::Btmss { s: 2.0 }, lossless);
    let e = eqef(&dip).map_err(|e| e.to_string())?;
    if (e - 1.0).abs() >= 1e-9 {
        return Err(format!("full-dip transmission EQEF {e}"));
    }
    Ok(())
}

fn criterion_9() -> Result<(), String> {
    let lossless = LossBudget::LOSSLESS;
    for (t_res, t_off) in [(0.8, 0.2), (0.95, 0.35), (0.1, 0.7)] {
        let a = lorentzian_query(t_res, t_off, Estimand::Transmission, Probe::Btmss { s: 20.0 }, lossless);
        let b = lorentzian_query(1.0 - t_res, 1.0 - t_off, Estimand::Transmission, Probe::Btmss { s: 20.0 }, lossless);
        let ra = max_sensitivity(&a).map_err(|e| e.to_string())?;
        let rb = max_sensitivity(&b).map_err(|e| e.to_string())?;
        if rel(ra.s_max_per_photon, rb.s_max_per_photon) >= 1e-6 {
            return Err(format!(
                "complementary pair ({t_res}, {t_off}): {} vs {}",
                ra.s_max_per_photon, rb.s_max_per_photon
            ));
        }
    }
    let db = bounds::squeezing_db(2.0);
    if (db + 14.36).abs() >= 0.01 {
        return Err(format!("squeezing_db(2) = {db}"));
    }
    if bounds::qef(0.0, 2.0, &lossless) != 1.0 {
        return Err("QEF(T=0) != 1".into());
    }
    Ok(())
}

fn criterion_10() -> Result<(), String> {
    let exe = env!("CARGO_BIN_EXE_resb");
    let root = std::env::temp_dir().join(format!("resb-acceptance-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&root);
    let subcommands = [
        "bounds",
        "sensitivity-curve",
        "max-vs-s",
        "fom-map",
        "eqef-sweep",
        "kk-phase",
        "verify",
    ];
    for cmd in subcommands {
        let mut outputs: Vec<std::collections::BTreeMap<String, Vec<u8>>> = Vec::new();
        for run in ["a", "b"] {
            // identical default config, distinct working directories, so the
            // emitted bytes (including the config echo) must coincide
            let cwd = root.join(cmd).join(run);
            std::fs::create_dir_all(&cwd).map_err(|e| e.to_string())?;
            let status = Command::new(exe)
                .arg(cmd)
                .current_dir(&cwd)
                .output()
                .map_err(|e| e.to_string())?;
            if !status.status.success() {
                return Err(format!(
                    "{cmd} run {run} failed: {}",
                    String::from_utf8_lossy(&status.stderr)
                ));
            }
            let mut files = std::collections::BTreeMap::new();
            for entry in std::fs::read_dir(cwd.join("out")).map_err(|e| e.to_string())? {
                let entry = entry.map_err(|e| e.to_string())?;
                files.insert(
                    entry.file_name().to_string_lossy().into_owned(),
                    std::fs::read(entry.path()).map_err(|e| e.to_string())?,
                );
            }
            if files.is_empty() {
                return Err(format!("{cmd} produced no output files"));
            }
            outputs.push(files);
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{cmd}: outputs differ between runs"));
        }
    }
    let _ = std::fs::remove_dir_all(Path::new(&root));
    Ok(())
}

#[test]
fn acceptance() {
    let mut suite = Suite { failures: Vec::new() };
    let s = Duration::from_secs;
    suite.run(1, "phase oracle equivalence (state engine vs closed form, 1e-6)", Some(s(5)), criterion_1);
    suite.run(2, "transmission oracle equivalence with bright-limit trend (1e-3)", Some(s(5)), criterion_2);
    suite.run(3, "optimized homodyne saturates both bounds (1e-10)", Some(s(1)), criterion_3);
    suite.run(4, "minimum-phase cross-validation (FFT vs analytic vs kernel)", Some(s(30)), criterion_4);
    suite.run(5, "closed-form Lorentzian sensitivity vs generic pipeline (1e-9, 100 draws)", Some(s(2)), criterion_5);
    suite.run(6, "sensitivity-curve anchors: 109.24 @ 0, 2.444 @ 0.356, dip 4", None, criterion_6);
    suite.run(7, "figure of merit: peak ~44.7, Lorentzian map > 1, m=3 map has < 1 region", None, criterion_7);
    suite.run(8, "enhancement-factor loss behavior: crossing at 0.5, monotone probe sweep", None, criterion_8);
    suite.run(9, "symmetry suite: complementary transmissions, -14.36 dB, QEF(0) = 1", None, criterion_9);
    suite.run(10, "byte-identical CLI outputs across two runs of every subcommand", None, criterion_10);
    assert!(suite.failures.is_empty(), "failed criteria:\n{}", suite.failures.join("\n"));
}
