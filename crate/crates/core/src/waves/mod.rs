//! Small-amplitude periodic waves bifurcating from laminar flows.
//!
//! The unknown is the height perturbation h̃(q, p) on `[0, 2π/n] × [p0, 0]`,
//! even in q, with `h = H(p; λ) + h̃`. The discrete system is described in
//! [`operator`]; it is solved by Newton's method bordered with λ and the
//! amplitude condition `⟨h̃, w⟩ = s⟨w, w⟩`, where `w` is the kernel of the
//! discrete linearization at the discrete bifurcation point.

mod blocklu;
mod operator;
pub mod spectral;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use operator::ResidualVector;
use operator::System;
pub use spectral::QBasis;

use crate::dispersion;
use crate::error::{Error, Result};
use crate::grid;
use crate::laminar::{build_laminar, LaminarFlow, Problem};
use crate::roots;
use crate::sturm;

/// Resolution and solver settings for the wave problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Discretization {
    /// Cosine modes in q (harmonics of the wavenumber n).
    pub m: usize,
    /// Chebyshev nodes in p.
    pub k: usize,
    pub newton_tol: f64,
    pub newton_max: usize,
    /// Largest admissible |s|.
    pub s_max: f64,
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization {
            m: 16,
            k: 257,
            newton_tol: 1e-11,
            newton_max: 25,
            s_max: 0.05,
        }
    }
}

impl Discretization {
    pub fn new(m: usize, k: usize) -> Self {
        Discretization { m, k, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.m < 2 || self.k < 9 || self.newton_max == 0 || !(self.newton_tol > 0.0) || !(self.s_max > 0.0) {
            return Err(Error::ParameterError(format!("invalid discretization {self:?}")));
        }
        Ok(())
    }
}

/// A computed wave on the collocation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile {
    pub n: u32,
    pub s: f64,
    pub lambda: f64,
    /// Bernoulli head Q(λ).
    pub q_head: f64,
    /// Mean surface height: H(0; λ) plus the mean of h̃ at the surface.
    pub depth: f64,
    pub pgrid: Vec<f64>,
    /// Half-period q-nodes `(i + 1/2)π/(nM)`.
    pub qgrid: Vec<f64>,
    /// h̃ at `(qgrid[i], pgrid[j])`, indexed `[j][i]`.
    pub h_tilde: Vec<Vec<f64>>,
    /// Cosine coefficients of h̃ in `cos(k n q)`, indexed `[j][k]`.
    pub h_coeffs: Vec<Vec<f64>>,
    /// Surface elevation `h(q, 0) − depth` at the q-nodes.
    pub eta: Vec<f64>,
    pub laminar: LaminarFlow,
    pub hp_min: f64,
    pub newton_iterations: usize,
    pub residual: f64,
}

impl WaveProfile {
    /// h = H + h̃ at `(qgrid[i], pgrid[j])`.
    pub fn height(&self, j: usize, i: usize) -> f64 {
        self.laminar.h_values[j] + self.h_tilde[j][i]
    }

    /// h̃ at an arbitrary q on row j, from the cosine series.
    pub fn h_tilde_at(&self, j: usize, q: f64) -> f64 {
        QBasis::eval_cos(&self.h_coeffs[j], self.n, q)
    }

    /// max |h̃(−q) − h̃(q)| over the nodes, evaluated from the series.
    pub fn evenness_error(&self) -> f64 {
        let mut e: f64 = 0.0;
        for j in 0..self.pgrid.len() {
            for &q in &self.qgrid {
                e = e.max((self.h_tilde_at(j, q) - self.h_tilde_at(j, -q)).abs());
            }
        }
        e
    }

    pub fn hp_positive(&self) -> bool {
        self.hp_min > 0.0
    }
}

/// The kernel `w(q, p) = v(p) cos(nq)` with `v(0) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMode {
    pub n: u32,
    pub lambda: f64,
    /// Factor applied to the unnormalized solution to get `v(0) = 1`.
    pub scale: f64,
    pub pgrid: Vec<f64>,
    pub qgrid: Vec<f64>,
    pub v: Vec<f64>,
    /// w at `(qgrid[i], pgrid[j])`, indexed `[j][i]`.
    pub values: Vec<Vec<f64>>,
}

fn outer(v: &[f64], q: &[f64], n: u32) -> Vec<Vec<f64>> {
    v.iter()
        .map(|vj| q.iter().map(|qi| vj * (n as f64 * qi).cos()).collect())
        .collect()
}

fn check_wavenumber(problem: &Problem, n: u32) -> Result<dispersion::MinimalWavenumber> {
    let mw = dispersion::minimal_wavenumber(problem)?;
    if n < mw.n {
        return Err(Error::ParameterError(format!(
            "wavenumber {n} is below the minimal wavenumber {}",
            mw.n
        )));
    }
    Ok(mw)
}

fn bifurcation_lambda(problem: &Problem, mw: &dispersion::MinimalWavenumber, n: u32) -> Result<f64> {
    let pts = dispersion::bifurcation_points_from(problem, mw, n)?;
    Ok(pts.last().expect("n >= N gives at least one point").lambda)
}

/// The kernel of the continuous linearization at λ_n, from the
/// Sturm–Liouville solution v1 on the Chebyshev p-grid.
pub fn kernel_mode(problem: &Problem, n: u32, disc: &Discretization) -> Result<KernelMode> {
    disc.validate()?;
    let mw = check_wavenumber(problem, n)?;
    let lambda = bifurcation_lambda(problem, &mw, n)?;
    let pgrid = grid::chebyshev_grid(problem.p0(), disc.k);
    let sol = sturm::solve_v1(problem, lambda, (n as f64).powi(2), &pgrid)?;
    let top = *sol.v.last().unwrap();
    if top == 0.0 {
        return Err(Error::NonFinite("v1 vanishes at the surface".into()));
    }
    let scale = 1.0 / top;
    let v: Vec<f64> = sol.v.iter().map(|x| x * scale).collect();
    let basis = QBasis::new(n, disc.m);
    Ok(KernelMode {
        n,
        lambda,
        scale: scale * (-sol.log_scale).exp(),
        values: outer(&v, &basis.q, n),
        qgrid: basis.q,
        pgrid,
        v,
    })
}

/// F(λ, h̃) for h̃ given as `[j][i]` nodal values (row 0 must be zero).
pub fn assemble_residual(
    problem: &Problem,
    lambda: f64,
    h_tilde: &[Vec<f64>],
    n: u32,
    disc: &Discretization,
) -> Result<ResidualVector> {
    disc.validate()?;
    problem.check_lambda(lambda)?;
    let sys = System::new(problem, n, disc.m, disc.k);
    let u = to_state(&sys, h_tilde)?;
    sys.residual(lambda, &u)
}

fn to_state(sys: &System, h: &[Vec<f64>]) -> Result<Vec<DVector<f64>>> {
    if h.len() != sys.k() || h.iter().any(|r| r.len() != sys.m()) {
        return Err(Error::ParameterError(format!(
            "h_tilde must be {} x {}",
            sys.k(),
            sys.m()
        )));
    }
    if h[0].iter().any(|v| *v != 0.0) {
        return Err(Error::ParameterError("h_tilde must vanish at the bed".into()));
    }
    Ok(h.iter().map(|r| DVector::from_column_slice(r)).collect())
}

/// The linearization ∂F/∂h̃ at h̃ = 0, one matrix per cosine mode k,
/// acting on `(u_1, …, u_{K−1})` for `h̃ = u(p) cos(k n q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedOperator {
    pub lambda: f64,
    pub n: u32,
    pub modes: Vec<DMatrix<f64>>,
}

impl LinearizedOperator {
    /// Smallest singular value of mode k relative to the largest.
    pub fn relative_min_singular(&self, k: usize) -> f64 {
        let sv = self.modes[k].clone().singular_values();
        sv.min() / sv.max()
    }
}

pub fn linearized_operator(problem: &Problem, lambda: f64, n: u32, disc: &Discretization) -> Result<LinearizedOperator> {
    disc.validate()?;
    problem.check_lambda(lambda)?;
    let sys = System::new(problem, n, disc.m, disc.k);
    Ok(LinearizedOperator {
        lambda,
        n,
        modes: (0..disc.m).map(|k| sys.mode_matrix(lambda, k)).collect(),
    })
}

/// The discrete bifurcation point near `lambda_guess` and its kernel
/// profile, normalized to 1 at the surface.
fn discrete_kernel(sys: &System, lambda_guess: f64) -> Result<(f64, Vec<f64>)> {
    let base = sys.problem.lambda_min() + crate::laminar::LAMBDA_GUARD;
    let d = |l: f64| -> Result<f64> { Ok(sys.shoot(l, 1).0) };
    let mut h = 1e-6 * lambda_guess.abs().max(1.0);
    let (mut lo, mut hi);
    loop {
        lo = (lambda_guess - h).max(base + 0.5 * (lambda_guess - base).min(h));
        hi = lambda_guess + h;
        if d(lo)? * d(hi)? <= 0.0 {
            break;
        }
        h *= 4.0;
        if h > lambda_guess.abs().max(1.0) {
            return Err(Error::RootNotFound("discrete bifurcation point".into()));
        }
    }
    let lambda = roots::brent(d, lo, hi, 1e-15 * lambda_guess.abs().max(1.0))?;
    let (_, u) = sys.shoot(lambda, 1);
    let top = *u.last().unwrap();
    Ok((lambda, u.iter().map(|x| x / top).collect()))
}

/// Transversality at λ_n: W_λ(0; λ_n, n²) ≠ 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transversality {
    pub n: u32,
    pub lambda: f64,
    pub w_lambda: f64,
    pub holds: bool,
}

/// Whether a dispersion point has a usable nonzero W_λ.
pub fn transversality_holds(point: &sturm::DispersionPoint) -> bool {
    matches!(point.w_lambda, Some(w) if w.is_finite() && w != 0.0)
}

pub fn transversality_check(problem: &Problem, n: u32) -> Result<Transversality> {
    let mw = check_wavenumber(problem, n)?;
    let lambda = bifurcation_lambda(problem, &mw, n)?;
    let pt = sturm::wronskian_partials(problem, lambda, (n as f64).powi(2))?;
    Ok(Transversality {
        n,
        lambda,
        w_lambda: pt.w_lambda.unwrap_or(f64::NAN),
        holds: transversality_holds(&pt),
    })
}

/// Waves along the branch bifurcating at λ_n.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub n: u32,
    /// λ_n of the continuous problem.
    pub lambda_n: f64,
    /// The corresponding root of the discrete problem.
    pub lambda_n_discrete: f64,
    /// Discrete kernel used as predictor and in the amplitude condition.
    pub kernel: KernelMode,
    pub profiles: Vec<WaveProfile>,
    pub disc: Discretization,
}

impl Branch {
    /// max |h̃(s) − s·w| over the grid.
    pub fn kernel_defect(&self, profile: &WaveProfile) -> f64 {
        let mut e: f64 = 0.0;
        for (hr, wr) in profile.h_tilde.iter().zip(&self.kernel.values) {
            for (h, w) in hr.iter().zip(wr) {
                e = e.max((h - profile.s * w).abs());
            }
        }
        e
    }
}

/// Solve for the waves with amplitudes `s_values` on the n-th branch.
/// `s = 0` gives the laminar flow at λ_n.
pub fn continue_branch(problem: &Problem, n: u32, s_values: &[f64], disc: &Discretization) -> Result<Branch> {
    disc.validate()?;
    if let Some(s) = s_values.iter().find(|s| !s.is_finite() || s.abs() > disc.s_max) {
        return Err(Error::ParameterError(format!(
            "|s| = {} exceeds s_max = {}",
            s.abs(),
            disc.s_max
        )));
    }
    let mw = check_wavenumber(problem, n)?;
    let lambda_n = bifurcation_lambda(problem, &mw, n)?;
    let sys = System::new(problem, n, disc.m, disc.k);
    let (lambda_d, v) = discrete_kernel(&sys, lambda_n)?;
    let kernel = KernelMode {
        n,
        lambda: lambda_d,
        scale: 1.0,
        pgrid: sys.p.clone(),
        qgrid: sys.basis.q.clone(),
        values: outer(&v, &sys.basis.q, n),
        v,
    };
    let mut profiles = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let (lambda, u, iters, res) = if s == 0.0 {
            (lambda_n, sys.zero_state(), 0, 0.0)
        } else {
            newton(&sys, &kernel, s, disc)?
        };
        profiles.push(make_profile(&sys, s, lambda, &u, iters, res)?);
    }
    Ok(Branch {
        n,
        lambda_n,
        lambda_n_discrete: lambda_d,
        kernel,
        profiles,
        disc: *disc,
    })
}

fn newton(
    sys: &System,
    kernel: &KernelMode,
    s: f64,
    disc: &Discretization,
) -> Result<(f64, Vec<DVector<f64>>, usize, f64)> {
    let m = sys.m();
    let pw = sys.p_weights();
    let w_state: Vec<DVector<f64>> = kernel.values.iter().map(|r| DVector::from_column_slice(r)).collect();
    let mut c = sys.flatten(&w_state);
    for j in 1..sys.k() {
        c.rows_mut((j - 1) * m, m).scale_mut(pw[j]);
    }
    let ww = c.dot(&sys.flatten(&w_state));
    let c = c / ww;
    let eval = |lambda: f64, x: &DVector<f64>| -> Result<(ResidualVector, f64, f64)> {
        let r = sys.residual(lambda, &sys.unflatten(x))?;
        let g = c.dot(x) - s;
        let norm = r.scaled_norm().max(g.abs());
        Ok((r, g, norm))
    };
    let mut lambda = kernel.lambda;
    let mut x = sys.flatten(&w_state) * s;
    let (mut r, mut g, mut norm) = eval(lambda, &x)?;
    for it in 0..=disc.newton_max {
        if norm <= disc.newton_tol {
            return Ok((lambda, sys.unflatten(&x), it, norm));
        }
        if it == disc.newton_max {
            break;
        }
        let (jac, col) = sys.jacobian(lambda, &sys.unflatten(&x))?;
        let mut rhs = DMatrix::zeros(x.len(), 2);
        rhs.set_column(0, &r.flatten());
        rhs.set_column(1, &col);
        let sol = jac.solve(&rhs)?;
        let (y, z) = (sol.column(0), sol.column(1));
        let cz = c.dot(&z);
        if cz == 0.0 || !cz.is_finite() {
            return Err(Error::NonFinite("bordered Newton system".into()));
        }
        let dl = (g - c.dot(&y)) / cz;
        let dx = -(y + z * dl);
        let mut t = 1.0;
        let mut last_err = None;
        loop {
            match eval(lambda + t * dl, &(&x + &dx * t)) {
                Ok((r2, g2, n2)) if n2 < norm || n2 <= disc.newton_tol => {
                    lambda += t * dl;
                    x += &dx * t;
                    (r, g, norm) = (r2, g2, n2);
                    break;
                }
                Ok(_) => {}
                Err(e @ Error::StagnationDetected { .. }) => last_err = Some(e),
                Err(e) => return Err(e),
            }
            t *= 0.5;
            if t < 1.0 / 1024.0 {
                return Err(last_err.unwrap_or(Error::NewtonDivergence {
                    iterations: it + 1,
                    residual: norm,
                }));
            }
        }
    }
    Err(Error::NewtonDivergence {
        iterations: disc.newton_max,
        residual: norm,
    })
}

fn make_profile(
    sys: &System,
    s: f64,
    lambda: f64,
    u: &[DVector<f64>],
    iters: usize,
    res: f64,
) -> Result<WaveProfile> {
    let b = &sys.basis;
    let laminar = build_laminar(sys.problem, lambda, &sys.p)?;
    let k = sys.k();
    let coeffs: Vec<Vec<f64>> = u.iter().map(|v| (&b.cos_inv * v).iter().copied().collect()).collect();
    let mean = coeffs[k - 1][0];
    let eta = u[k - 1].iter().map(|v| v - mean).collect();
    let hp_min = hp_min(sys, u, &laminar);
    Ok(WaveProfile {
        n: b.n,
        s,
        lambda,
        q_head: laminar.q,
        depth: laminar.d + mean,
        pgrid: sys.p.clone(),
        qgrid: b.q.clone(),
        h_tilde: u.iter().map(|v| v.iter().copied().collect()).collect(),
        h_coeffs: coeffs,
        eta,
        laminar,
        hp_min,
        newton_iterations: iters,
        residual: res,
    })
}

/// Smallest h_p over the grid (second-order differences of h̃).
fn hp_min(sys: &System, u: &[DVector<f64>], lam: &LaminarFlow) -> f64 {
    let m = sys.m();
    let mut out = f64::INFINITY;
    for i in 0..m {
        let col: Vec<f64> = u.iter().map(|v| v[i]).collect();
        let dp = grid::differentiate(&sys.p, &col, 3);
        for (j, d) in dp.iter().enumerate() {
            let hp = 1.0 / lam.a_values[j] + d;
            out = out.min(hp);
        }
    }
    out
}

/// Residual of the dynamic surface condition
/// `1 + h_q² + (2gh − Q) h_p² − 2σ h_p² h_qq / (1 + h_q²)^{3/2}` at p = 0,
/// with h_q, h_qq spectral and h_p from an independent fourth-order
/// one-sided difference. Returns the max over the q-nodes.
pub fn strong_form_residual(problem: &Problem, profile: &WaveProfile) -> Result<f64> {
    let k = profile.pgrid.len();
    let m = profile.qgrid.len();
    let basis = QBasis::new(profile.n, m);
    let (g, sigma) = (problem.params.g, problem.params.sigma);
    let lambda = profile.lambda;
    let c = lambda.sqrt();
    let nodes: Vec<f64> = (0..5).map(|i| profile.pgrid[k - 1 - i]).collect();
    let w = grid::fd_weights(0.0, &nodes, 1);
    let us = DVector::from_column_slice(&profile.h_tilde[k - 1]);
    let hq = &basis.dq_even * &us;
    let hqq = &basis.dqq_even * &us;
    let mut out: f64 = 0.0;
    for i in 0..m {
        let delta: f64 = (0..5).map(|r| w[r] * profile.h_tilde[k - 1 - r][i]).sum();
        let hp = 1.0 / c + delta;
        let cd = c * delta;
        let q2 = hq[i] * hq[i];
        let val = q2 - cd * (2.0 + cd) + 2.0 * g * us[i] * hp * hp - 2.0 * sigma * hp * hp * hqq[i] / (1.0 + q2).powf(1.5);
        if !val.is_finite() {
            return Err(Error::NonFinite("strong-form residual".into()));
        }
        out = out.max(val.abs());
    }
    Ok(out)
}

/// max |h̃(−s)(q, p) − h̃(s)(q + π/n, p)|; on the half-period nodes the
/// shift is the reflection `i ↦ M − 1 − i`.
pub fn pitchfork_defect(plus: &WaveProfile, minus: &WaveProfile) -> f64 {
    let m = plus.qgrid.len();
    let mut e: f64 = 0.0;
    for (rp, rm) in plus.h_tilde.iter().zip(&minus.h_tilde) {
        for i in 0..m {
            e = e.max((rm[i] - rp[m - 1 - i]).abs());
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vorticity::{FluidParams, VorticitySpec};

    fn zero_problem() -> Problem {
        Problem::new(FluidParams::new(-1.0, 9.8, 1.0, 2.0).unwrap(), VorticitySpec::Zero).unwrap()
    }

    #[test]
    fn laminar_residual_vanishes() {
        let pr = zero_problem();
        let disc = Discretization::new(8, 65);
        let h = vec![vec![0.0; 8]; 65];
        let r = assemble_residual(&pr, 12.0, &h, 1, &disc).unwrap();
        assert!(r.max_norm() < 1e-10);
    }

    #[test]
    fn discrete_kernel_makes_mode_singular() {
        let pr = zero_problem();
        let disc = Discretization::new(8, 65);
        let mw = dispersion::minimal_wavenumber(&pr).unwrap();
        let ln = bifurcation_lambda(&pr, &mw, 1).unwrap();
        let sys = System::new(&pr, 1, disc.m, disc.k);
        let (ld, _) = discrete_kernel(&sys, ln).unwrap();
        assert!(((ld - ln) / ln).abs() < 1e-3);
        let op = linearized_operator(&pr, ld, 1, &disc).unwrap();
        let (s1, s2) = (op.relative_min_singular(1), op.relative_min_singular(2));
        assert!(s1 < 1e-12 && s2 > 1e4 * s1, "{s1} {s2}");
    }

    #[test]
    fn kernel_mode_matches_closed_form() {
        // Zero vorticity: v ∝ sinh(n(p − p0)/√λ).
        let pr = zero_problem();
        let km = kernel_mode(&pr, 1, &Discretization::new(8, 65)).unwrap();
        let c = km.lambda.sqrt();
        for (p, v) in km.pgrid.iter().zip(&km.v) {
            let e = ((p + 1.0) / c).sinh() / (1.0 / c).sinh();
            assert!((v - e).abs() < 1e-8);
        }
    }

    #[test]
    fn small_wave_on_first_branch() {
        let pr = zero_problem();
        let disc = Discretization::new(8, 65);
        let br = continue_branch(&pr, 1, &[0.0, 1e-3, -1e-3], &disc).unwrap();
        let (p0, pp, pm) = (&br.profiles[0], &br.profiles[1], &br.profiles[2]);
        assert_eq!(p0.lambda, br.lambda_n);
        assert!(pp.newton_iterations <= 6);
        assert!(pp.residual <= 1e-11);
        assert!(pp.hp_positive());
        assert!(pp.evenness_error() < 1e-12);
        assert!(pitchfork_defect(pp, pm) < 1e-9);
        assert!(br.kernel_defect(pp) < 1e-4);
        assert!((pp.lambda - br.lambda_n_discrete).abs() < 1e-3);
        assert!(strong_form_residual(&pr, pp).unwrap() < 1e-6);
    }

    #[test]
    fn rejects_large_amplitude_and_low_wavenumber() {
        let pr = zero_problem();
        let disc = Discretization::new(8, 65);
        let e = continue_branch(&pr, 1, &[0.5], &disc).unwrap_err();
        assert_eq!(e.name(), "ParameterError");
    }
}
