//! Scalar search and quadrature helpers shared by the bound and lineshape
//! modules.

/// Golden-section refinement of a maximum inside the bracket `[a, b]`.
///
/// Returns `(x, f(x))` once the bracket width drops below `xtol`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Tanh-sinh (double-exponential) quadrature on `[a, b]`.
///
/// Tolerates integrable endpoint singularities such as the logarithmic
/// kernel of the gain-phase integral. Returns `(value, error_estimate)`,
/// the estimate being the difference between the last two refinement
/// levels.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, max_level: u32) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    // x = mid + half*tanh(pi/2 sinh t), weight = half * pi/2 cosh t / cosh^2(pi/2 sinh t)
    let eval = |t: f64| -> f64 {
        let st = (std::f64::consts::FRAC_PI_2) * t.sinh();
        let x = mid + half * st.tanh();
        if x <= a || x >= b {
            return 0.0;
        }
        let w = half * std::f64::consts::FRAC_PI_2 * t.cosh() / st.cosh().powi(2);
        let v = f(x) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };

    let tmax = 3.5;
    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut err = f64::INFINITY;
    // level 0 seed points
    let mut k = 1;
    while (k as f64) * h <= tmax {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut result = sum * h;
    for _ in 1..=max_level {
        let prev = result;
        h *= 0.5;
        // add the new midpoints only
        let mut t = h;
        let mut add = 0.0;
        while t <= tmax {
            add += eval(t) + eval(-t);
            t += 2.0 * h;
        }
        sum += add;
        result = sum * h;
        err = (result - prev).abs();
        if err < 1e-14 * result.abs().max(1.0) {
            break;
        }
    }
    (result, err)
}

/// Five-point central finite difference for the first derivative.
pub fn five_point_derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Unwrap a sampled phase in place so adjacent samples never jump by >= pi.
pub fn unwrap_phase(phase: &mut [f64]) {
    for i in 1..phase.len() {
        let mut d = phase[i] - phase[i - 1];
        while d > std::f64::consts::PI {
            phase[i] -= 2.0 * std::f64::consts::PI;
            d = phase[i] - phase[i - 1];
        }
        while d < -std::f64::consts::PI {
            phase[i] += 2.0 * std::f64::consts::PI;
            d = phase[i] - phase[i - 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_section_max(|x| -(x - 1.3).powi(2) + 2.0, -3.0, 3.0, 1e-10);
        // near a smooth maximum the abscissa is only resolvable to ~sqrt(eps)
        assert_relative_eq!(x, 1.3, epsilon = 1e-6);
        assert_relative_eq!(fx, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn tanh_sinh_handles_log_singularity() {
        // int_0^1 ln(x) dx = -1
        let (v, _) = tanh_sinh(|x| x.ln(), 0.0, 1.0, 10);
        assert_relative_eq!(v, -1.0, epsilon = 1e-10);
    }

    #[test]
    fn tanh_sinh_smooth() {
        let (v, _) = tanh_sinh(|x| x.sin(), 0.0, std::f64::consts::PI, 10);
        assert_relative_eq!(v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn unwrap_removes_jumps() {
        let mut p = vec![3.0, -3.0, 3.0];
        unwrap_phase(&mut p);
        for w in p.windows(2) {
            assert!((w[1] - w[0]).abs() < std::f64::consts::PI);
        }
    }
}
