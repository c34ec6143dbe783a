//! The Sturm–Liouville problem `(a³ v')' = μ a v` on `(p0, 0)`.
//!
//! Solutions are carried in the variables `(v, w)` with `w = a³ v'`, so the
//! system `v' = w / a³, w' = μ a v` has a continuous right-hand side even
//! when γ is unbounded. The dispersion Wronskian is
//! `W(0; λ, μ) = w1(0) − (g + σμ) v1(0)`, using `a³(λ; 0) = λ^{3/2}`.

use crate::error::{Error, Result};
use crate::laminar::Problem;
use crate::ode::{self, OdeOptions};
use crate::quad;

/// Which fundamental solution a [`SturmSolution`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    /// `v(p0) = 0`, `v'(p0) = 1`.
    V1,
    /// `v(0) = λ^{3/2}`, `v'(0) = g + σμ`.
    V2,
}

/// A fundamental solution sampled on a p-grid. The true values are
/// `v[i] · exp(log_scale)` and `flux[i] · exp(log_scale)`; `log_scale` is
/// zero unless the solution outgrew the floating-point range.
#[derive(Debug, Clone, PartialEq)]
pub struct SturmSolution {
    pub lambda: f64,
    pub mu: f64,
    pub pgrid: Vec<f64>,
    pub v: Vec<f64>,
    pub flux: Vec<f64>,
    pub which: Which,
    pub log_scale: f64,
}

impl SturmSolution {
    /// v' = flux / a³ at the nodes.
    pub fn derivative(&self, problem: &Problem) -> Vec<f64> {
        self.pgrid
            .iter()
            .zip(&self.flux)
            .map(|(&p, &w)| w / problem.a(self.lambda, p).powi(3))
            .collect()
    }
}

/// `W(0; λ, μ)` and, optionally, its partial derivatives. Values are
/// mantissas: multiply by `exp(log_scale)` for the true magnitudes (the
/// signs are exact either way).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub lambda: f64,
    pub mu: f64,
    pub w: f64,
    pub w_lambda: Option<f64>,
    pub w_mu: Option<f64>,
    pub log_scale: f64,
}

impl DispersionPoint {
    /// W with the scale applied; may be infinite for very large μ.
    pub fn value(&self) -> f64 {
        scaled(self.w, self.log_scale)
    }

    /// Sign structure expected at a root: `W_λ > 0` and `W_μ < 0`.
    pub fn signs_ok(&self) -> Option<bool> {
        Some(self.w_lambda? > 0.0 && self.w_mu? < 0.0)
    }
}

fn scaled(x: f64, log_scale: f64) -> f64 {
    if log_scale == 0.0 {
        x
    } else {
        x * log_scale.exp()
    }
}

/// Depth of the geometric grading towards a singular `p = 0`.
const GRADING_FLOOR: f64 = 1e-14;

/// Integration stops: the grid (if any), the model breakpoints and, for a
/// singular model, a geometric refinement towards `p = 0`. Returns the
/// ascending stops and the position of every grid node among them.
pub(crate) fn stops(problem: &Problem, pgrid: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let p0 = problem.p0();
    let mut s: Vec<f64> = vec![p0, 0.0];
    s.extend_from_slice(pgrid);
    s.extend(problem.model.breakpoints());
    if problem.model.is_singular() {
        let below = pgrid
            .iter()
            .copied()
            .filter(|&p| p < 0.0)
            .fold(p0, f64::max)
            .max(0.25 * p0);
        let mut x = below * 0.5;
        while x.abs() > GRADING_FLOOR * p0.abs() {
            s.push(x);
            x *= 0.5;
        }
    }
    s.sort_by(f64::total_cmp);
    s.dedup();
    let idx = pgrid
        .iter()
        .map(|p| s.binary_search_by(|x| x.total_cmp(p)).expect("grid node is a stop"))
        .collect();
    (s, idx)
}

fn check_inputs(problem: &Problem, lambda: f64, mu: f64, pgrid: &[f64]) -> Result<()> {
    problem.check_lambda(lambda)?;
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::ParameterError(format!("mu must be non-negative, got {mu}")));
    }
    if pgrid.len() < 2
        || pgrid[0] != problem.p0()
        || *pgrid.last().unwrap() != 0.0
        || !pgrid.windows(2).all(|w| w[0] < w[1])
    {
        return Err(Error::ParameterError("pgrid must increase strictly from p0 to 0".into()));
    }
    Ok(())
}

/// v1 with `v(p0) = 0`, `v'(p0) = 1`, integrated forwards.
pub fn solve_v1(problem: &Problem, lambda: f64, mu: f64, pgrid: &[f64]) -> Result<SturmSolution> {
    check_inputs(problem, lambda, mu, pgrid)?;
    let (s, idx) = stops(problem, pgrid);
    let a0 = problem.a(lambda, problem.p0());
    let rhs = |p: f64, y: &[f64; 2]| {
        let a = problem.a(lambda, p);
        [y[1] / (a * a * a), mu * a * y[0]]
    };
    let tr = ode::integrate(rhs, [0.0, a0 * a0 * a0], &s, &OdeOptions::default())?;
    Ok(SturmSolution {
        lambda,
        mu,
        pgrid: pgrid.to_vec(),
        v: idx.iter().map(|&i| tr.y[i][0]).collect(),
        flux: idx.iter().map(|&i| tr.y[i][1]).collect(),
        which: Which::V1,
        log_scale: tr.log_scale,
    })
}

/// v2 with `v(0) = λ^{3/2}`, `v'(0) = g + σμ`, integrated backwards.
pub fn solve_v2(problem: &Problem, lambda: f64, mu: f64, pgrid: &[f64]) -> Result<SturmSolution> {
    check_inputs(problem, lambda, mu, pgrid)?;
    let (mut s, idx) = stops(problem, pgrid);
    s.reverse();
    let n = s.len();
    let l32 = lambda * lambda.sqrt();
    let (g, sigma) = (problem.params.g, problem.params.sigma);
    let rhs = |p: f64, y: &[f64; 2]| {
        let a = problem.a(lambda, p);
        [y[1] / (a * a * a), mu * a * y[0]]
    };
    let tr = ode::integrate(rhs, [l32, l32 * (g + sigma * mu)], &s, &OdeOptions::default())?;
    Ok(SturmSolution {
        lambda,
        mu,
        pgrid: pgrid.to_vec(),
        v: idx.iter().map(|&i| tr.y[n - 1 - i][0]).collect(),
        flux: idx.iter().map(|&i| tr.y[n - 1 - i][1]).collect(),
        which: Which::V2,
        log_scale: tr.log_scale,
    })
}

/// Surface values `(v1(0), w1(0), log_scale)`, integrating only through
/// the stops the model needs.
pub fn surface_v1(problem: &Problem, lambda: f64, mu: f64) -> Result<(f64, f64, f64)> {
    problem.check_lambda(lambda)?;
    let (s, _) = stops(problem, &[]);
    let a0 = problem.a(lambda, problem.p0());
    let rhs = |p: f64, y: &[f64; 2]| {
        let a = problem.a(lambda, p);
        [y[1] / (a * a * a), mu * a * y[0]]
    };
    let tr = ode::integrate(rhs, [0.0, a0 * a0 * a0], &s, &OdeOptions::default())?;
    let y = tr.last();
    Ok((y[0], y[1], tr.log_scale))
}

/// W(0; λ, μ) = λ^{3/2} v1'(0) − (g + σμ) v1(0).
pub fn wronskian_at_surface(problem: &Problem, lambda: f64, mu: f64) -> Result<DispersionPoint> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::ParameterError(format!("mu must be non-negative, got {mu}")));
    }
    let (v, w, log_scale) = surface_v1(problem, lambda, mu)?;
    let (g, sigma) = (problem.params.g, problem.params.sigma);
    Ok(DispersionPoint {
        lambda,
        mu,
        w: w - (g + sigma * mu) * v,
        w_lambda: None,
        w_mu: None,
        log_scale,
    })
}

/// Relative tolerance of the `W_μ` cross-check at roots.
const COLLINEARITY_TOL: f64 = 1e-6;
/// |W| below this fraction of its terms counts as a root for the cross-check.
const ROOT_FRACTION: f64 = 1e-6;

/// W together with `W_λ` and `W_μ` from the variational systems.
///
/// The λ-derivative solves `(a³ v_λ')' − μ a v_λ = −(3a² a_λ v')' + μ a_λ v`
/// with `a_λ = 1/(2a)`, the μ-derivative `(a³ v_μ')' − μ a v_μ = a v`, both
/// with zero data for `v` at `p0`. Near a root `W_μ` is also checked against
/// the Green identity `v(0) W_μ = ∫ a v² − σ v(0)² + v_μ(0) W`.
pub fn wronskian_partials(problem: &Problem, lambda: f64, mu: f64) -> Result<DispersionPoint> {
    problem.check_lambda(lambda)?;
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::ParameterError(format!("mu must be non-negative, got {mu}")));
    }
    let (s, _) = stops(problem, &[]);
    let a0 = problem.a(lambda, problem.p0());
    // State: v, w, v_λ, w_λ, v_μ, w_μ, ∫ a v².
    let rhs = |p: f64, y: &[f64; 7]| {
        let a = problem.a(lambda, p);
        let a3 = a * a * a;
        [
            y[1] / a3,
            mu * a * y[0],
            y[3] / a3 - 1.5 * y[1] / (a3 * a * a),
            mu * y[0] / (2.0 * a) + mu * a * y[2],
            y[5] / a3,
            a * y[0] + mu * a * y[4],
            a * y[0] * y[0],
        ]
    };
    let y0 = [0.0, a0 * a0 * a0, 0.0, 1.5 * a0, 0.0, 0.0, 0.0];
    let tr = ode::integrate(rhs, y0, &s, &OdeOptions::default())?;
    let y = tr.last();
    let (g, sigma) = (problem.params.g, problem.params.sigma);
    let gs = g + sigma * mu;
    let w = y[1] - gs * y[0];
    let w_lambda = y[3] - gs * y[2];
    let w_mu = y[5] - sigma * y[0] - gs * y[4];
    let point = DispersionPoint {
        lambda,
        mu,
        w,
        w_lambda: Some(w_lambda),
        w_mu: Some(w_mu),
        log_scale: tr.log_scale,
    };
    // The quadratic moment is only meaningful without renormalization.
    let near_root = w.abs() <= ROOT_FRACTION * (y[1].abs() + gs * y[0].abs());
    if tr.log_scale == 0.0 && near_root && y[0] > 0.0 {
        let identity = (y[6] - sigma * y[0] * y[0] + y[4] * w) / y[0];
        if (identity - w_mu).abs() > COLLINEARITY_TOL * w_mu.abs().max(identity.abs()) {
            return Err(Error::CollinearityViolation {
                variational: w_mu,
                quadrature: identity,
            });
        }
    }
    Ok(point)
}

/// Maximum sweeps of the Volterra fixed-point iteration.
pub const VOLTERRA_MAX_SWEEPS: usize = 200;
const VOLTERRA_NODES: usize = 12;

/// v1 from the Volterra equation
/// `v(p) = ∫_{p0}^p a³(p0)/a³(s) ds + μ ∫_{p0}^p a⁻³(s) ∫_{p0}^s a v dr ds`
/// by successive substitution on composite Gauss–Legendre panels.
///
/// Independent of the ODE path; used as an oracle.
pub fn volterra_oracle_v1(problem: &Problem, lambda: f64, mu: f64, pgrid: &[f64]) -> Result<SturmSolution> {
    check_inputs(problem, lambda, mu, pgrid)?;
    let (s, idx) = stops(problem, pgrid);
    let (xg, wg) = quad::gauss_legendre(VOLTERRA_NODES);
    let cum = quad::cumulative_matrix(&xg);
    let m = VOLTERRA_NODES;
    let panels = s.len() - 1;
    let mut nodes = Vec::with_capacity(panels * m);
    for w in s.windows(2) {
        let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        nodes.extend(xg.iter().map(|x| c + h * x));
    }
    let a: Vec<f64> = nodes.iter().map(|&p| problem.a(lambda, p)).collect();
    let inv_a3: Vec<f64> = a.iter().map(|a| 1.0 / (a * a * a)).collect();
    let a0 = problem.a(lambda, problem.p0());
    let a03 = a0 * a0 * a0;

    // Cumulative integral of nodal data f from p0: values at the panel
    // nodes and at the stops.
    let cumulate = |f: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let mut at_nodes = vec![0.0; f.len()];
        let mut at_stops = vec![0.0; panels + 1];
        let mut base = 0.0;
        for k in 0..panels {
            let h = 0.5 * (s[k + 1] - s[k]);
            let fk = &f[k * m..(k + 1) * m];
            for i in 0..m {
                let row: f64 = (0..m).map(|j| cum[(i, j)] * fk[j]).sum();
                at_nodes[k * m + i] = base + h * row;
            }
            base += h * wg.iter().zip(fk).map(|(w, f)| w * f).sum::<f64>();
            at_stops[k + 1] = base;
        }
        (at_nodes, at_stops)
    };

    let mut v = vec![0.0; nodes.len()];
    let mut v_stops = vec![0.0; panels + 1];
    let mut w_stops = vec![a03; panels + 1];
    for sweep in 1..=VOLTERRA_MAX_SWEEPS {
        let av: Vec<f64> = a.iter().zip(&v).map(|(a, v)| a * v).collect();
        let (inner, inner_stops) = cumulate(&av);
        let w: Vec<f64> = inner.iter().map(|i| a03 + mu * i).collect();
        let integrand: Vec<f64> = w.iter().zip(&inv_a3).map(|(w, i)| w * i).collect();
        let (v_new, v_new_stops) = cumulate(&integrand);
        let scale = v_new_stops.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        let update = v_new_stops
            .iter()
            .zip(&v_stops)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / scale;
        v = v_new;
        v_stops = v_new_stops;
        w_stops = inner_stops.iter().map(|i| a03 + mu * i).collect();
        if !update.is_finite() {
            return Err(Error::NonFinite("Volterra iteration".into()));
        }
        if update < 1e-12 && sweep > 1 {
            return Ok(SturmSolution {
                lambda,
                mu,
                pgrid: pgrid.to_vec(),
                v: idx.iter().map(|&i| v_stops[i]).collect(),
                flux: idx.iter().map(|&i| w_stops[i]).collect(),
                which: Which::V1,
                log_scale: 0.0,
            });
        }
        if sweep == VOLTERRA_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps: sweep, update });
        }
    }
    unreachable!()
}

/// Relative spread of `a³(v1 v2' − v2 v1') = v1 w2 − v2 w1` over the grid.
pub fn wronskian_spread(v1: &SturmSolution, v2: &SturmSolution) -> f64 {
    let vals: Vec<f64> = (0..v1.v.len()).map(|i| v1.v[i] * v2.flux[i] - v2.v[i] * v1.flux[i]).collect();
    let scale = (0..v1.v.len())
        .map(|i| (v1.v[i] * v2.flux[i]).abs() + (v2.v[i] * v1.flux[i]).abs())
        .fold(0.0f64, f64::max);
    let (lo, hi) = vals
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    (hi - lo) / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid;
    use crate::vorticity::{FluidParams, VorticitySpec};

    fn problem(spec: VorticitySpec, g: f64, sigma: f64) -> Problem {
        Problem::new(FluidParams::new(-1.0, g, sigma, 2.0).unwrap(), spec).unwrap()
    }

    #[test]
    fn v1_zero_vorticity_closed_form() {
        let pb = problem(VorticitySpec::Zero, 0.0, 1.0);
        let g = grid::chebyshev_grid(-1.0, 33);
        let s = solve_v1(&pb, 1.0, 1.0, &g).unwrap();
        for (i, p) in g.iter().enumerate() {
            assert!((s.v[i] - (p + 1.0).sinh()).abs() < 1e-10);
        }
        let dv = s.derivative(&pb);
        assert!((s.v[32] - 1f64.sinh()).abs() < 1e-10);
        assert!((dv[32] - 1f64.cosh()).abs() < 1e-10);
    }

    #[test]
    fn v1_mu_zero_is_single_integral() {
        let pb = problem(VorticitySpec::Constant { c: -1.0 }, 1.0, 1.0);
        let g = grid::chebyshev_grid(-1.0, 17);
        let s = solve_v1(&pb, 4.0, 0.0, &g).unwrap();
        let a03 = pb.a(4.0, -1.0).powi(3);
        for (i, &p) in g.iter().enumerate() {
            let direct = pb.model.integrate(|x| a03 / pb.a(4.0, x).powi(3), -1.0, p).unwrap();
            assert!((s.v[i] - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn v2_examples() {
        let pb = problem(VorticitySpec::Zero, 0.0, 1.0);
        let g = grid::chebyshev_grid(-1.0, 17);
        let s = solve_v2(&pb, 1.0, 0.0, &g).unwrap();
        assert!(s.v.iter().all(|v| (v - 1.0).abs() < 1e-13));
        let s = solve_v2(&pb, 1.0, 1.0, &g).unwrap();
        for (i, p) in g.iter().enumerate() {
            assert!((s.v[i] - p.exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn wronskian_examples() {
        let pb = problem(VorticitySpec::Zero, 0.0, 1.0);
        let w = wronskian_at_surface(&pb, 1.0, 1.0).unwrap();
        assert!((w.value() - (-1f64).exp()).abs() < 1e-10);
        let pb = problem(VorticitySpec::Zero, 9.8, 1.0);
        let w = wronskian_at_surface(&pb, 4.0, 0.0).unwrap();
        assert!((w.value() + 1.8).abs() < 1e-10);
    }

    #[test]
    fn wronskian_mu_zero_formula() {
        let pb = problem(VorticitySpec::PowerLaw { delta: 1.0, k: 1.4, r: 2.0 }, 9.8, 1.0);
        let lam = 6.0;
        let a03 = pb.a(lam, -1.0).powi(3);
        let j = pb.model.integrate(|x| pb.a(lam, x).powi(-3), -1.0, 0.0).unwrap();
        let w = wronskian_at_surface(&pb, lam, 0.0).unwrap();
        assert!((w.value() - a03 * (1.0 - 9.8 * j)).abs() < 1e-9 * a03);
    }

    #[test]
    fn partials_match_finite_differences() {
        let pb = problem(VorticitySpec::Zero, 0.0, 1.0);
        let d = wronskian_partials(&pb, 1.0, 1.0).unwrap();
        let h = 1e-5;
        let fd_mu = (wronskian_at_surface(&pb, 1.0, 1.0 + h).unwrap().w
            - wronskian_at_surface(&pb, 1.0, 1.0 - h).unwrap().w)
            / (2.0 * h);
        let fd_lam = (wronskian_at_surface(&pb, 1.0 + h, 1.0).unwrap().w
            - wronskian_at_surface(&pb, 1.0 - h, 1.0).unwrap().w)
            / (2.0 * h);
        assert!((d.w_mu.unwrap() - fd_mu).abs() < 1e-6 * fd_mu.abs());
        assert!((d.w_lambda.unwrap() - fd_lam).abs() < 1e-6 * fd_lam.abs());
    }

    #[test]
    fn volterra_matches_closed_form_and_ode() {
        let pb = problem(VorticitySpec::Zero, 0.0, 1.0);
        let g = grid::chebyshev_grid(-1.0, 33);
        let s = volterra_oracle_v1(&pb, 1.0, 1.0, &g).unwrap();
        for (i, p) in g.iter().enumerate() {
            assert!((s.v[i] - (p + 1.0).sinh()).abs() < 1e-9);
        }
        let pb = problem(VorticitySpec::Constant { c: -1.0 }, 1.0, 1.0);
        let a = volterra_oracle_v1(&pb, 4.0, 2.0, &g).unwrap();
        let b = solve_v1(&pb, 4.0, 2.0, &g).unwrap();
        for i in 0..g.len() {
            assert!((a.v[i] - b.v[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn volterra_matches_ode_for_power_law() {
        let pb = problem(VorticitySpec::PowerLaw { delta: 1.0, k: 1.4, r: 2.0 }, 9.8, 1.0);
        let g = grid::chebyshev_grid(-1.0, 65);
        let a = volterra_oracle_v1(&pb, 6.0, 4.0, &g).unwrap();
        let b = solve_v1(&pb, 6.0, 4.0, &g).unwrap();
        let err = a.v.iter().zip(&b.v).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn wronskian_constant_between_v1_and_v2() {
        let pb = problem(VorticitySpec::Constant { c: 1.0 }, 9.8, 1.0);
        let g = grid::chebyshev_grid(-1.0, 65);
        let v1 = solve_v1(&pb, 5.0, 3.0, &g).unwrap();
        let v2 = solve_v2(&pb, 5.0, 3.0, &g).unwrap();
        assert!(wronskian_spread(&v1, &v2) < 1e-9);
    }

    #[test]
    fn large_mu_is_renormalized() {
        let pb = problem(VorticitySpec::Constant { c: 1.0 }, 9.8, 1.0);
        let w = wronskian_at_surface(&pb, 5.0, 1e6).unwrap();
        assert!(w.w < 0.0);
        assert!(w.log_scale > 0.0);
    }
}
