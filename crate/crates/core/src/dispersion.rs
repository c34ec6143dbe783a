//! The dispersion relation W(0; λ, μ) = 0: the threshold λ₀, the map μ(λ),
//! bifurcation points λ_n with μ(λ_n) = n², the minimal wavenumber N, and
//! the a-priori bounds used in the asymptotic analysis.

use log::warn;

use crate::error::{Error, Result};
use crate::laminar::{Problem, LAMBDA_GUARD};
use crate::ode::{self, OdeOptions};
use crate::roots;
use crate::sturm::{self, DispersionPoint};

/// Largest gap λ − 2Γ_M scanned for λ₀.
pub const LAMBDA_SCAN_MAX: f64 = 1e6;
/// Cap of the μ bracketing.
pub const MU_MAX: f64 = 1e8;
/// Absolute tolerance on roots in μ and λ (a relative floor applies to
/// large values).
pub const ROOT_TOL: f64 = 1e-10;

/// Result of [`lambda_threshold`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub lambda0: f64,
    /// True when W(0; ·, 0) stays positive down to 2Γ_M (g > 0 only).
    pub no_root: bool,
}

/// `1 − g ∫ a⁻³`, which has the sign of W(0; λ, 0) = a³(p0)·(1 − g∫a⁻³).
fn w0_reduced(problem: &Problem, lambda: f64) -> Result<f64> {
    let model = &problem.model;
    let j = model.integrate(|p| (lambda - 2.0 * model.primitive(p)).powf(-1.5), problem.p0(), 0.0)?;
    Ok(1.0 - problem.params.g * j)
}

/// W(0; λ, 0) by quadrature of the explicit μ = 0 solution.
pub fn wronskian_mu_zero(problem: &Problem, lambda: f64) -> Result<f64> {
    problem.check_lambda(lambda)?;
    let a0 = problem.a(lambda, problem.p0());
    Ok(a0 * a0 * a0 * w0_reduced(problem, lambda)?)
}

/// λ₀: the minimal λ ≥ 2Γ_M beyond which W(0; λ, 0) > 0.
pub fn lambda_threshold(problem: &Problem) -> Result<Threshold> {
    let base = problem.lambda_min();
    if problem.params.g == 0.0 {
        return Ok(Threshold {
            lambda0: base,
            no_root: false,
        });
    }
    // Quadrature near a non-integrable 1/a³ may fail; that means W < 0 there.
    let f = |gap: f64| -> Result<f64> {
        match w0_reduced(problem, base + gap) {
            Err(Error::QuadratureFailure { .. }) | Err(Error::NonFinite(_)) => Ok(-1.0),
            other => other,
        }
    };
    let mut hi = 1.0;
    let mut lo;
    if f(hi)? <= 0.0 {
        loop {
            lo = hi;
            hi *= 2.0;
            if hi > LAMBDA_SCAN_MAX {
                let last = base + LAMBDA_SCAN_MAX;
                if f(LAMBDA_SCAN_MAX)? <= 0.0 {
                    return Err(Error::ScanExhausted { lambda_max: last });
                }
                hi = LAMBDA_SCAN_MAX;
                break;
            }
            if f(hi)? > 0.0 {
                break;
            }
        }
    } else {
        lo = hi;
        loop {
            lo *= 0.1;
            if lo < 10.0 * LAMBDA_GUARD {
                lo = 2.0 * LAMBDA_GUARD;
                if f(lo)? > 0.0 {
                    return Ok(Threshold {
                        lambda0: base,
                        no_root: true,
                    });
                }
                break;
            }
            if f(lo)? <= 0.0 {
                break;
            }
            hi = lo;
        }
    }
    let tol = 1e-14 * base.max(1.0);
    let gap = roots::brent(f, lo, hi, tol)?;
    Ok(Threshold {
        lambda0: base + gap,
        no_root: false,
    })
}

fn mu_tol(mu: f64) -> f64 {
    ROOT_TOL.max(1e-13 * mu.abs())
}

/// The unique μ > 0 with W(0; λ, μ) = 0, for λ > λ₀.
pub fn mu_of_lambda(problem: &Problem, lambda: f64) -> Result<f64> {
    let w_at = |mu: f64| -> Result<f64> { Ok(sturm::wronskian_at_surface(problem, lambda, mu)?.w) };
    if w_at(0.0)? <= 0.0 {
        return Err(Error::ParameterError(format!(
            "W(0; {lambda}, 0) <= 0: lambda does not exceed lambda0"
        )));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while w_at(hi)? >= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > MU_MAX {
            return Err(Error::BracketFailure { limit: MU_MAX });
        }
    }
    let f = |mu: f64| -> Result<(f64, f64)> {
        let d = sturm::wronskian_partials(problem, lambda, mu)?;
        Ok((d.w, d.w_mu.unwrap()))
    };
    roots::newton_bracketed(f, lo, hi, 0.5 * (lo + hi), mu_tol(hi))
}

/// λ_n solving W(0; λ, n²) = 0, searched upwards from `lo` where
/// W(0; lo, n²) < 0.
fn lambda_for_mu(problem: &Problem, mu: f64, lo: f64) -> Result<f64> {
    let w_at = |lambda: f64| -> Result<f64> { Ok(sturm::wronskian_at_surface(problem, lambda, mu)?.w) };
    if w_at(lo)? >= 0.0 {
        return Err(Error::BracketFailure { limit: lo });
    }
    let base = problem.lambda_min();
    let mut lo = lo;
    let mut gap = (lo - base).max(1.0);
    let mut hi = lo + gap;
    while w_at(hi)? <= 0.0 {
        lo = hi;
        gap *= 2.0;
        hi = lo + gap;
        if gap > LAMBDA_SCAN_MAX * 1e2 {
            return Err(Error::BracketFailure { limit: hi });
        }
    }
    let f = |lambda: f64| -> Result<(f64, f64)> {
        let d = sturm::wronskian_partials(problem, lambda, mu)?;
        Ok((d.w, d.w_lambda.unwrap()))
    };
    roots::newton_bracketed(f, lo, hi, 0.5 * (lo + hi), ROOT_TOL.max(1e-14 * hi))
}

/// Estimate of inf μ over (λ₀, ∞) and the minimal wavenumber N.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalWavenumber {
    pub n: u32,
    pub mu_inf: f64,
    pub threshold: Threshold,
    /// μ(λ₀ + ε·max(1, λ₀)) for ε = 1e-2, 1e-3, 1e-4.
    pub estimates: [f64; 3],
}

const INF_OFFSETS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// N: the smallest positive integer with N² > inf μ.
///
/// μ is increasing, so inf μ is its limit at λ₀. It is estimated from three
/// evaluations approaching λ₀ and a linear extrapolation in the offset,
/// clamped to `[0, μ(λ₀ + smallest offset)]`.
pub fn minimal_wavenumber(problem: &Problem) -> Result<MinimalWavenumber> {
    let threshold = lambda_threshold(problem)?;
    let l0 = threshold.lambda0;
    let scale = l0.max(1.0);
    let mut est = [0.0; 3];
    for (e, m) in INF_OFFSETS.iter().zip(est.iter_mut()) {
        *m = mu_of_lambda(problem, l0 + e * scale)?;
    }
    if !(est[0] > est[1] && est[1] > est[2]) {
        return Err(Error::InfimumUnresolved { estimates: est.to_vec() });
    }
    let (e2, e3) = (INF_OFFSETS[1], INF_OFFSETS[2]);
    let slope = (est[1] - est[2]) / (e2 - e3);
    let mu_inf = (est[2] - slope * e3).clamp(0.0, est[2]);
    Ok(MinimalWavenumber {
        n: smallest_wavenumber_above(mu_inf),
        mu_inf,
        threshold,
        estimates: est,
    })
}

/// Smallest positive integer N with N² > x.
pub fn smallest_wavenumber_above(x: f64) -> u32 {
    let mut n = (x.max(0.0).sqrt().floor() as u32).max(1);
    while (n as f64) * (n as f64) <= x {
        n += 1;
    }
    while n > 1 && ((n - 1) as f64) * ((n - 1) as f64) > x {
        n -= 1;
    }
    n
}

/// A bifurcation point λ_n with μ(λ_n) = n².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifurcationPoint {
    pub n: u32,
    pub lambda: f64,
}

/// λ_n for n = N..=n_max, increasing.
///
/// Each λ_n is the root of λ ↦ W(0; λ, n²), found by a bracketed Newton
/// iteration using W_λ > 0 (equivalent to solving μ(λ) = n², since μ is
/// the unique zero of W(0; λ, ·)).
pub fn bifurcation_points(problem: &Problem, n_max: u32) -> Result<Vec<BifurcationPoint>> {
    let mw = minimal_wavenumber(problem)?;
    bifurcation_points_from(problem, &mw, n_max)
}

/// As [`bifurcation_points`] with N and λ₀ already known.
pub fn bifurcation_points_from(problem: &Problem, mw: &MinimalWavenumber, n_max: u32) -> Result<Vec<BifurcationPoint>> {
    let l0 = mw.threshold.lambda0;
    let mut out = Vec::new();
    let mut lo = None;
    for n in mw.n..=n_max {
        let mu = (n as f64) * (n as f64);
        let start = match lo {
            Some(l) => l,
            None => start_below(problem, l0, mu)?,
        };
        let lambda = lambda_for_mu(problem, mu, start)?;
        out.push(BifurcationPoint { n, lambda });
        lo = Some(lambda);
    }
    Ok(out)
}

/// A λ slightly above λ₀ with W(0; λ, μ) < 0.
fn start_below(problem: &Problem, l0: f64, mu: f64) -> Result<f64> {
    let scale = l0.max(1.0);
    for k in 2..=12 {
        let lam = l0 + 10f64.powi(-k) * scale;
        if lam - problem.lambda_min() <= LAMBDA_GUARD {
            break;
        }
        if sturm::wronskian_at_surface(problem, lam, mu)?.w < 0.0 {
            return Ok(lam);
        }
    }
    Err(Error::BracketFailure { limit: l0 })
}

/// Sampled dispersion curve.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionCurve {
    pub lambda_samples: Vec<f64>,
    pub mu_values: Vec<f64>,
    /// W(0; λ, 0) at the samples.
    pub w0_values: Vec<f64>,
    pub lambda0: f64,
    pub no_root: bool,
    pub mu_inf: f64,
    pub n: u32,
}

/// μ(λ) at the given samples (all above λ₀) plus the threshold data.
pub fn dispersion_curve(problem: &Problem, lambdas: &[f64]) -> Result<DispersionCurve> {
    let mw = minimal_wavenumber(problem)?;
    let mut mu_values = Vec::with_capacity(lambdas.len());
    let mut w0_values = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        if l <= mw.threshold.lambda0 {
            return Err(Error::ParameterError(format!("lambda sample {l} is not above lambda0")));
        }
        mu_values.push(mu_of_lambda(problem, l)?);
        w0_values.push(wronskian_mu_zero(problem, l)?);
    }
    Ok(DispersionCurve {
        lambda_samples: lambdas.to_vec(),
        mu_values,
        w0_values,
        lambda0: mw.threshold.lambda0,
        no_root: mw.threshold.no_root,
        mu_inf: mw.mu_inf,
        n: mw.n,
    })
}

/// Both sides of the N = 1 criterion `∫ a(λ₀)(∫_{p0}^p a⁻³(λ₀))² dp < σ/g²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondCg {
    pub lambda0: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluate the N = 1 criterion at λ₀ by nested quadrature.
pub fn check_cond_cg(problem: &Problem) -> Result<CondCg> {
    let g = problem.params.g;
    if g <= 0.0 {
        return Err(Error::ParameterError("the criterion needs g > 0".into()));
    }
    if problem.params.r < 3.0 {
        warn!("criterion evaluated with r = {} < 3", problem.params.r);
    }
    let th = lambda_threshold(problem)?;
    if th.no_root {
        return Err(Error::ParameterError("the criterion needs a root lambda0 > 2*Gamma_M".into()));
    }
    let l0 = th.lambda0;
    let model = &problem.model;
    let p0 = problem.p0();
    let a = |p: f64| (l0 - 2.0 * model.primitive(p)).sqrt();
    let inner = |p: f64| model.integrate(|s| a(s).powi(-3), p0, p).unwrap_or(f64::NAN);
    let lhs = model.integrate(|p| a(p) * inner(p).powi(2), p0, 0.0)?;
    if !lhs.is_finite() {
        return Err(Error::NonFinite("criterion integral".into()));
    }
    let rhs = problem.params.sigma / (g * g);
    Ok(CondCg {
        lambda0: l0,
        lhs,
        rhs,
        holds: lhs < rhs,
    })
}

/// Both sides of the integral bounds on `[p1, 0]` and their verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub fe1_lhs: f64,
    pub fe1_rhs: f64,
    pub fe2_lhs: f64,
    pub fe2_rhs: f64,
    pub pass: bool,
}

/// Relative slack allowed in the bound comparison (integration error).
pub const BOUND_TOL: f64 = 1e-9;

// sinh(x)/x, (cosh x − 1)/x², (sinh x − x)/x³ without cancellation.
fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0))
    } else {
        x.sinh() / x
    }
}

fn coshm(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        0.5 * (1.0 + x2 / 12.0 * (1.0 + x2 / 30.0 * (1.0 + x2 / 56.0)))
    } else {
        // cosh x − 1 = 2 sinh²(x/2)
        let s = (0.5 * x).sinh();
        2.0 * s * s / (x * x)
    }
}

fn sinhm(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let x2 = x * x;
        let mut term = 1.0 / 6.0;
        let mut sum = term;
        for k in 1..12 {
            let k = k as f64;
            term *= x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
            sum += term;
        }
        sum
    } else {
        (x.sinh() - x) / (x * x * x)
    }
}

/// Solve `(a³v')' = μ a v` on `[p1, 0]` with `v(p1) = A`, `v'(p1) = B` and
/// compare `∫ v` and `∫ (−p) v` with their hyperbolic comparison bounds.
///
/// The constants are `C̲, C̄` = min/max of `a³(p1)/a³(p)` and `D̲, D̄` =
/// min/max of `a(s)/a³(p)` over `[p1, 0]`.
pub fn bound_check_l3(problem: &Problem, lambda: f64, mu: f64, p1: f64, a_init: f64, b_init: f64) -> Result<BoundCheck> {
    problem.check_lambda(lambda)?;
    if !(p1 > problem.p0() && p1 < 0.0) {
        return Err(Error::DomainError { p: p1, p0: problem.p0() });
    }
    if !(a_init > 0.0 && b_init > 0.0 && mu >= 0.0) {
        return Err(Error::ParameterError("bounds need A, B > 0 and mu >= 0".into()));
    }
    let (g_min, g_max) = problem.model.primitive_range(p1, 0.0);
    let a_min = (lambda - 2.0 * g_max).sqrt();
    let a_max = (lambda - 2.0 * g_min).sqrt();
    let a1 = problem.a(lambda, p1);
    let c_lo = (a1 / a_max).powi(3);
    let c_hi = (a1 / a_min).powi(3);
    let d_lo = a_min / a_max.powi(3);
    let d_hi = a_max / a_min.powi(3);

    let (mut stops, _) = sturm::stops(problem, &[]);
    stops.retain(|&p| p > p1);
    stops.insert(0, p1);
    // State: v, w = a³v', ∫v, ∫(−p)v.
    let rhs = |p: f64, y: &[f64; 4]| {
        let a = problem.a(lambda, p);
        [y[1] / (a * a * a), mu * a * y[0], y[0], -p * y[0]]
    };
    let opts = OdeOptions {
        rescale: false,
        ..OdeOptions::default()
    };
    let tr = ode::integrate(rhs, [a_init, a1.powi(3) * b_init, 0.0, 0.0], &stops, &opts)?;
    let y = tr.last();
    let len = -p1;
    let x_hi = (d_hi * mu).sqrt() * len;
    let x_lo = (d_lo * mu).sqrt() * len;
    let fe1_rhs = a_init * len * sinhc(x_hi) + b_init * c_hi * len * len * coshm(x_hi);
    let fe2_rhs = a_init * len * len * coshm(x_lo) + b_init * c_lo * len.powi(3) * sinhm(x_lo);
    let fe1_lhs = y[2];
    let fe2_lhs = y[3];
    let pass = fe1_lhs <= fe1_rhs * (1.0 + BOUND_TOL) && fe2_lhs >= fe2_rhs * (1.0 - BOUND_TOL);
    Ok(BoundCheck {
        fe1_lhs,
        fe1_rhs,
        fe2_lhs,
        fe2_rhs,
        pass,
    })
}

/// W(0; λ, μ) for each μ in `mu_list`.
pub fn asymptote_check_l4(problem: &Problem, lambda: f64, mu_list: &[f64]) -> Result<Vec<DispersionPoint>> {
    mu_list
        .iter()
        .map(|&mu| sturm::wronskian_at_surface(problem, lambda, mu))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vorticity::{FluidParams, VorticitySpec};

    fn problem(spec: VorticitySpec, g: f64, sigma: f64) -> Problem {
        Problem::new(FluidParams::new(-1.0, g, sigma, 2.0).unwrap(), spec).unwrap()
    }

    /// Closed-form zero-vorticity Wronskian, as a function of κ = sqrt(μ/λ).
    fn w_closed(lambda: f64, mu: f64, g: f64, sigma: f64) -> f64 {
        let k = (mu / lambda).sqrt();
        lambda.powf(1.5) * k.cosh() - (g + sigma * mu) * k.sinh() / k
    }

    #[test]
    fn threshold_zero_vorticity() {
        let pb = problem(VorticitySpec::Zero, 9.8, 0.07);
        let th = lambda_threshold(&pb).unwrap();
        assert!(!th.no_root);
        assert!((th.lambda0 - 9.8f64.powf(2.0 / 3.0)).abs() < 1e-10);
        let cap = problem(VorticitySpec::Constant { c: -1.0 }, 0.0, 1.0);
        assert_eq!(lambda_threshold(&cap).unwrap().lambda0, 2.0);
    }

    #[test]
    fn threshold_singular_no_root() {
        let pb = problem(VorticitySpec::PowerLaw { delta: 50.0, k: 1.4, r: 2.0 }, 9.8, 1.0);
        let th = lambda_threshold(&pb).unwrap();
        assert!(th.no_root);
        assert_eq!(th.lambda0, 0.0);
    }

    #[test]
    fn mu_matches_closed_form() {
        let (g, s) = (9.8, 0.07);
        let pb = problem(VorticitySpec::Zero, g, s);
        for lam in [5.0, 8.0, 20.0] {
            let mu = mu_of_lambda(&pb, lam).unwrap();
            assert!(w_closed(lam, mu, g, s).abs() < 1e-8 * lam.powf(1.5) * (mu / lam).sqrt().cosh());
        }
    }

    #[test]
    fn mu_sign_change_constant_vorticity() {
        let pb = problem(VorticitySpec::Constant { c: -1.0 }, 1.0, 1.0);
        let l0 = lambda_threshold(&pb).unwrap().lambda0;
        let mu = mu_of_lambda(&pb, l0 + 1.0).unwrap();
        let wp = sturm::wronskian_at_surface(&pb, l0 + 1.0, mu + 1e-4).unwrap().w;
        let wm = sturm::wronskian_at_surface(&pb, l0 + 1.0, mu - 1e-4).unwrap().w;
        assert!(mu > 0.0 && wp < 0.0 && wm > 0.0);
    }

    #[test]
    fn bifurcation_points_capillary_closed_form() {
        let pb = problem(VorticitySpec::Zero, 0.0, 1.0);
        let pts = bifurcation_points(&pb, 3).unwrap();
        assert!(pts.windows(2).all(|w| w[0].lambda < w[1].lambda));
        for bp in &pts {
            let mu = (bp.n * bp.n) as f64;
            let scale = bp.lambda.powf(1.5) * (mu / bp.lambda).sqrt().cosh();
            assert!(w_closed(bp.lambda, mu, 0.0, 1.0).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn wavenumber_helper() {
        assert_eq!(smallest_wavenumber_above(0.0), 1);
        assert_eq!(smallest_wavenumber_above(0.99), 1);
        assert_eq!(smallest_wavenumber_above(1.0), 2);
        assert_eq!(smallest_wavenumber_above(8.5), 3);
        assert_eq!(smallest_wavenumber_above(9.0), 4);
    }

    #[test]
    fn series_helpers_are_continuous() {
        for x in [1e-2f64, 0.5] {
            let l = x * (1.0 - 1e-12);
            let r = x * (1.0 + 1e-12);
            assert!((sinhc(l) - sinhc(r)).abs() < 1e-11);
            assert!((coshm(l) - coshm(r)).abs() < 1e-11);
            assert!((sinhm(l) - sinhm(r)).abs() < 1e-11);
        }
    }

    #[test]
    fn bounds_are_equalities_without_vorticity() {
        let pb = problem(VorticitySpec::Zero, 9.8, 1.0);
        for mu in [0.0, 1.0, 100.0] {
            let b = bound_check_l3(&pb, 2.0, mu, -0.5, 1.0, 2.0).unwrap();
            assert!(b.pass, "{b:?}");
            assert!((b.fe1_lhs - b.fe1_rhs).abs() < 1e-9 * b.fe1_rhs);
            assert!((b.fe2_lhs - b.fe2_rhs).abs() < 1e-9 * b.fe2_rhs);
        }
    }

    #[test]
    fn asymptote_capillary_closed_form() {
        let pb = problem(VorticitySpec::Zero, 0.0, 1.0);
        let w = asymptote_check_l4(&pb, 1.0, &[10.0, 100.0]).unwrap();
        assert!(w.iter().all(|d| d.value() < 0.0));
        assert!((w[0].value() - w_closed(1.0, 10.0, 0.0, 1.0)).abs() < 1e-8 * 10.0f64.sqrt().cosh());
    }
}
