//! Laminar (q-independent) flows: a(λ; p), H(p; λ), the head Q(λ) and depth d.

use log::warn;

use crate::error::{Error, Result};
use crate::grid;
use crate::vorticity::{FluidParams, VorticityModel, VorticitySpec};

/// Smallest admissible gap λ − 2Γ_M.
pub const LAMBDA_GUARD: f64 = 1e-12;
/// Below this gap 1/a is close to non-integrable and a warning is logged.
pub const NEAR_SINGULAR_GAP: f64 = 1e-8;

/// A vorticity model together with the fluid constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub params: FluidParams,
    pub model: VorticityModel,
}

impl Problem {
    pub fn new(params: FluidParams, spec: VorticitySpec) -> Result<Self> {
        params.validate()?;
        let model = VorticityModel::new(spec, params.p0)?;
        Ok(Problem { params, model })
    }

    pub fn p0(&self) -> f64 {
        self.params.p0
    }

    /// Lower end of the admissible λ range, 2Γ_M.
    pub fn lambda_min(&self) -> f64 {
        2.0 * self.model.gamma_max()
    }

    /// Reject λ ≤ 2Γ_M + [`LAMBDA_GUARD`].
    pub fn check_lambda(&self, lambda: f64) -> Result<()> {
        check_lambda(&self.model, lambda)
    }

    /// a(λ; p) = sqrt(λ − 2Γ(p)), without the λ guard.
    pub fn a(&self, lambda: f64, p: f64) -> f64 {
        (lambda - 2.0 * self.model.primitive(p)).sqrt()
    }
}

fn check_lambda(model: &VorticityModel, lambda: f64) -> Result<()> {
    let gap = lambda - 2.0 * model.gamma_max();
    if !lambda.is_finite() || gap <= LAMBDA_GUARD {
        return Err(Error::ParameterError(format!(
            "lambda = {lambda} must exceed 2*Gamma_M = {}",
            2.0 * model.gamma_max()
        )));
    }
    if gap < NEAR_SINGULAR_GAP {
        warn!("NearSingularWarning: lambda - 2*Gamma_M = {gap:e}; 1/a is close to non-integrable");
    }
    Ok(())
}

/// a(λ; p) = sqrt(λ − 2Γ(p)).
pub fn coefficient_a(model: &VorticityModel, lambda: f64, p: f64) -> Result<f64> {
    check_lambda(model, lambda)?;
    if !(p >= model.p0() && p <= 0.0) {
        return Err(Error::DomainError { p, p0: model.p0() });
    }
    Ok((lambda - 2.0 * model.primitive(p)).sqrt())
}

/// H(p; λ) = ∫_{p0}^p 1/a(λ; s) ds.
pub fn laminar_height(model: &VorticityModel, lambda: f64, p: f64) -> Result<f64> {
    check_lambda(model, lambda)?;
    if !(p >= model.p0() && p <= 0.0) {
        return Err(Error::DomainError { p, p0: model.p0() });
    }
    model.integrate(|s| 1.0 / (lambda - 2.0 * model.primitive(s)).sqrt(), model.p0(), p)
}

/// Q(λ) = λ + 2g·H(0; λ).
pub fn head_constant(problem: &Problem, lambda: f64) -> Result<f64> {
    let d = laminar_height(&problem.model, lambda, 0.0)?;
    Ok(lambda + 2.0 * problem.params.g * d)
}

/// The laminar flow for a given λ, sampled on a p-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LaminarFlow {
    pub lambda: f64,
    pub pgrid: Vec<f64>,
    pub a_values: Vec<f64>,
    pub h_values: Vec<f64>,
    pub q: f64,
    pub d: f64,
}

/// Assemble the laminar flow on `pgrid` (ascending, from `p0` to `0`).
pub fn build_laminar(problem: &Problem, lambda: f64, pgrid: &[f64]) -> Result<LaminarFlow> {
    problem.check_lambda(lambda)?;
    let p0 = problem.p0();
    if pgrid.len() < 2 || pgrid[0] != p0 || *pgrid.last().unwrap() != 0.0 || !pgrid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::ParameterError("pgrid must increase strictly from p0 to 0".into()));
    }
    let model = &problem.model;
    let inv_a = |s: f64| 1.0 / (lambda - 2.0 * model.primitive(s)).sqrt();
    let mut h_values = Vec::with_capacity(pgrid.len());
    let mut acc = 0.0;
    h_values.push(0.0);
    for w in pgrid.windows(2) {
        acc += model.integrate(inv_a, w[0], w[1])?;
        h_values.push(acc);
    }
    let a_values: Vec<f64> = pgrid.iter().map(|&p| problem.a(lambda, p)).collect();
    let d = acc;
    Ok(LaminarFlow {
        lambda,
        pgrid: pgrid.to_vec(),
        a_values,
        h_values,
        q: lambda + 2.0 * problem.params.g * d,
        d,
    })
}

/// Default grid: 257 Chebyshev nodes on `[p0, 0]`.
pub fn default_pgrid(p0: f64) -> Vec<f64> {
    grid::chebyshev_grid(p0, 257)
}
