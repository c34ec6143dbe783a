//! Bracketed scalar root finders.

use crate::error::{Error, Result};

/// Brent's method on a bracket `[a, b]` with `f(a)·f(b) ≤ 0`.
pub fn brent<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootNotFound(format!("no sign change on [{a}, {b}]")));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::RootNotFound("Brent iteration limit".into()))
}

/// Newton iteration safeguarded by bisection on a sign-change bracket.
///
/// `f` returns `(value, derivative)`. A Newton step that leaves the current
/// bracket, or does not shrink fast enough, is replaced by bisection. Converges when
/// the step falls below `xtol`.
pub fn newton_bracketed<F: FnMut(f64) -> Result<(f64, f64)>>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    xtol: f64,
) -> Result<f64> {
    let (flo, _) = f(lo)?;
    let (fhi, _) = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::RootNotFound(format!("no sign change on [{lo}, {hi}]")));
    }
    let lo_sign = flo.signum();
    let mut x = if x0 > lo && x0 < hi { x0 } else { 0.5 * (lo + hi) };
    let mut dx_old = hi - lo;
    let mut dx = dx_old;
    for _ in 0..200 {
        let (fx, dfx) = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        // Bisect when Newton leaves the bracket or is not converging fast enough.
        let next = if dfx != 0.0 && newton > lo && newton < hi && (2.0 * fx).abs() <= (dx_old * dfx).abs() {
            newton
        } else {
            0.5 * (lo + hi)
        };
        dx_old = dx;
        dx = next - x;
        x = next;
        if dx.abs() <= xtol || hi - lo <= xtol {
            return Ok(x);
        }
    }
    Err(Error::RootNotFound("safeguarded Newton iteration limit".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_cubic() {
        let r = brent(|x| Ok(x * x * x - 2.0), 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn newton_bracketed_matches_sqrt() {
        let r = newton_bracketed(|x| Ok((x * x - 3.0, 2.0 * x)), 0.0, 3.0, 2.5, 1e-14).unwrap();
        assert!((r - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn newton_bracketed_survives_flat_derivative() {
        // atan has a vanishing derivative far from the root; bisection rescues it.
        let r = newton_bracketed(|x| Ok((x.atan(), 1.0 / (1.0 + x * x))), -50.0, 1000.0, 900.0, 1e-13).unwrap();
        assert!(r.abs() < 1e-12);
    }
}
