//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.
//!
//! The integrator marches through a list of stop points, never stepping
//! across one, so right-hand sides that are only piecewise smooth are
//! handled by putting their breakpoints in the list. Linear homogeneous
//! systems can grow past the floating-point range (large wavenumbers), so
//! the state is renormalized whenever it exceeds [`RESCALE_AT`] and the
//! accumulated logarithmic scale is returned with the trajectory.

use crate::error::{Error, Result};

/// Step-control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest admissible step, relative to segments longer than it.
    pub h_min: f64,
    pub max_steps: usize,
    /// Allow renormalization of the state (only valid for linear
    /// homogeneous systems).
    pub rescale: bool,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-11,
            atol: 1e-13,
            h_min: 1e-12,
            max_steps: 2_000_000,
            rescale: true,
        }
    }
}

pub const RESCALE_AT: f64 = 1e100;

/// States at the stop points. The true state at `t[i]` is
/// `y[i] * exp(log_scale)`.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub log_scale: f64,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> &[f64; N] {
        self.y.last().expect("trajectory is never empty")
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrate `y' = f(t, y)` from `stops[0]` through every later stop.
///
/// `stops` must be strictly monotone (either direction).
pub fn integrate<const N: usize, F>(mut f: F, y0: [f64; N], stops: &[f64], opts: &OdeOptions) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    assert!(!stops.is_empty());
    let mut y = y0;
    let mut t = stops[0];
    let mut ts = vec![t];
    let mut ys = vec![y];
    let mut scales = vec![0.0];
    let mut log_scale = 0.0;
    let span = (stops[stops.len() - 1] - stops[0]).abs();
    let mut h_abs = 0.0f64;
    let mut k1 = f(t, &y);
    let mut steps = 0usize;

    for &target in &stops[1..] {
        let dir = (target - t).signum();
        let seg = (target - t).abs();
        if h_abs == 0.0 {
            h_abs = (1e-3 * span).min(seg);
        }
        let h_floor = opts.h_min.min(1e-3 * seg).max(4.0 * f64::EPSILON * t.abs().max(target.abs()));
        loop {
            let remaining = (target - t).abs();
            if remaining <= 0.0 {
                break;
            }
            let last = h_abs >= remaining;
            let h = if last { remaining } else { h_abs } * dir;

            let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(
                t + h,
                &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let t_new = if last { target } else { t + h };
            let k7 = f(t_new, &y_new);

            let mut err = 0.0;
            for i in 0..N {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sk = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sk) * (e / sk);
            }
            let err = (err / N as f64).sqrt();
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::IntegrationFailure {
                    p: t,
                    reason: "step budget exhausted".into(),
                });
            }
            if !err.is_finite() {
                h_abs *= 0.1;
                if h_abs < h_floor {
                    return Err(Error::IntegrationFailure {
                        p: t,
                        reason: "non-finite right-hand side".into(),
                    });
                }
                continue;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = t_new;
                y = y_new;
                k1 = k7;
                if !last || fac < 1.0 {
                    h_abs = (h.abs() * fac).max(h_floor);
                }
                if opts.rescale {
                    let m = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if m > RESCALE_AT {
                        for v in y.iter_mut() {
                            *v /= m;
                        }
                        for v in k1.iter_mut() {
                            *v /= m;
                        }
                        log_scale += m.ln();
                    }
                }
            } else {
                let next = h.abs() * fac.min(1.0);
                if next < h_floor {
                    return Err(Error::IntegrationFailure {
                        p: t,
                        reason: format!("step size fell below {h_floor:e}"),
                    });
                }
                h_abs = next;
            }
        }
        ts.push(target);
        ys.push(y);
        scales.push(log_scale);
    }

    for (yi, si) in ys.iter_mut().zip(&scales) {
        let factor = (si - log_scale).exp();
        if factor != 1.0 {
            for v in yi.iter_mut() {
                *v *= factor;
            }
        }
    }
    Ok(Trajectory { t: ts, y: ys, log_scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_one_period() {
        let n = 64;
        let stops: Vec<f64> = (0..=n).map(|i| 2.0 * std::f64::consts::PI * i as f64 / n as f64).collect();
        let tr = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], [1.0, 0.0], &stops, &OdeOptions::default()).unwrap();
        for (t, y) in tr.t.iter().zip(&tr.y) {
            assert!((y[0] - t.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn backward_integration() {
        let stops = [0.0, -0.5, -1.0];
        let tr = integrate(|_, y: &[f64; 1]| [y[0]], [1.0], &stops, &OdeOptions::default()).unwrap();
        assert!((tr.last()[0] - (-1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn renormalization_tracks_scale() {
        // y' = 500 y over [0, 1]: exp(500) overflows the rescale threshold.
        let stops: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let tr = integrate(|_, y: &[f64; 1]| [500.0 * y[0]], [1.0], &stops, &OdeOptions::default()).unwrap();
        assert!(tr.log_scale > 0.0);
        let log_end = tr.last()[0].ln() + tr.log_scale;
        assert!((log_end - 500.0).abs() < 1e-8, "{log_end}");
    }
}
