//! The discretized operator F(λ, h̃) and its Jacobian.
//!
//! Unknowns are the nodal values `U_j` of h̃ on the q-nodes at the p-nodes
//! `j = 1..K` (`U_0 = 0` at the bed). Interior rows use the flux form
//!
//! `F₁_j = ∂_q(A_j) − (B_{j+½} − B_{j−½}) / Δc_j`
//!
//! with `A = h_q / h_p` at nodes and
//! `B = Γ + (1 + h_q²) / (2h_p²) − λ/2` at midpoints, written as
//! `(t_q² − aδ(2 + aδ)) / (2t_p²)` so the laminar part cancels exactly.
//! The surface row is `F₂ = U_s + (1 − ∂_q²)⁻¹ (X − U_s)` with
//! `X = S^{3/2} [(1 + h_q²)/h_p² + 2gU_s − λ] / (2σ)`, `S = 1 + h_q²`.

use nalgebra::{DMatrix, DVector};

use super::blocklu::BlockSystem;
use super::spectral::QBasis;
use crate::error::{Error, Result};
use crate::grid;
use crate::laminar::Problem;

/// F(λ, h̃) split into interior rows (p-nodes 1..K−1) and the surface row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualVector {
    pub interior: Vec<Vec<f64>>,
    pub surface: Vec<f64>,
    /// Δc_j for each interior row, used by [`ResidualVector::scaled_norm`].
    pub row_widths: Vec<f64>,
}

impl ResidualVector {
    pub fn max_norm(&self) -> f64 {
        self.interior
            .iter()
            .flatten()
            .chain(&self.surface)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// max(|F₁_j|·Δc_j, |F₂|), the norm used by the Newton solver.
    pub fn scaled_norm(&self) -> f64 {
        let inner = self
            .interior
            .iter()
            .zip(&self.row_widths)
            .flat_map(|(row, w)| row.iter().map(move |v| v.abs() * w))
            .fold(0.0, f64::max);
        self.surface.iter().fold(inner, |m, v| m.max(v.abs()))
    }

    pub(crate) fn flatten(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.interior.len() * self.surface.len() + self.surface.len(),
            self.interior.iter().flatten().chain(&self.surface).copied(),
        )
    }
}

/// Grid, stencils and Γ samples for one (problem, n, M, K).
#[derive(Debug, Clone)]
pub(crate) struct System<'a> {
    pub problem: &'a Problem,
    pub basis: QBasis,
    pub p: Vec<f64>,
    gam_node: Vec<f64>,
    gam_mid: Vec<f64>,
    /// Centered weights for ∂_p at node j (index j; unused at 0 and K−1).
    node_w: Vec<[f64; 3]>,
    /// One-sided weights at p = 0 on (U_s, U_{s−1}, U_{s−2}).
    surf_w: [f64; 3],
    dmid: Vec<f64>,
    dc: Vec<f64>,
}

fn rows_scaled(v: &DVector<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = a.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= v[i];
    }
    out
}

fn cols_scaled(a: &DMatrix<f64>, v: &DVector<f64>) -> DMatrix<f64> {
    let mut out = a.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= v[j];
    }
    out
}

impl<'a> System<'a> {
    pub fn new(problem: &'a Problem, n: u32, m: usize, k: usize) -> Self {
        let p = grid::chebyshev_grid(problem.p0(), k);
        let model = &problem.model;
        let gam_node = p.iter().map(|&x| model.primitive(x)).collect();
        let gam_mid = p.windows(2).map(|w| model.primitive(0.5 * (w[0] + w[1]))).collect();
        let mut node_w = vec![[0.0; 3]; k];
        let mut dc = vec![0.0; k];
        for j in 1..k - 1 {
            let w = grid::fd_weights(p[j], &p[j - 1..=j + 1], 1);
            node_w[j] = [w[0], w[1], w[2]];
            dc[j] = 0.5 * (p[j + 1] - p[j - 1]);
        }
        let w = grid::fd_weights(0.0, &[p[k - 1], p[k - 2], p[k - 3]], 1);
        System {
            problem,
            basis: QBasis::new(n, m),
            dmid: p.windows(2).map(|w| w[1] - w[0]).collect(),
            p,
            gam_node,
            gam_mid,
            node_w,
            surf_w: [w[0], w[1], w[2]],
            dc,
        }
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }

    pub fn m(&self) -> usize {
        self.basis.m
    }

    pub fn a_nodes(&self, lambda: f64) -> Vec<f64> {
        self.gam_node.iter().map(|g| (lambda - 2.0 * g).sqrt()).collect()
    }

    pub fn a_mids(&self, lambda: f64) -> Vec<f64> {
        self.gam_mid.iter().map(|g| (lambda - 2.0 * g).sqrt()).collect()
    }

    pub fn zero_state(&self) -> Vec<DVector<f64>> {
        vec![DVector::zeros(self.m()); self.k()]
    }

    pub fn flatten(&self, u: &[DVector<f64>]) -> DVector<f64> {
        DVector::from_iterator((self.k() - 1) * self.m(), u[1..].iter().flat_map(|v| v.iter().copied()))
    }

    pub fn unflatten(&self, x: &DVector<f64>) -> Vec<DVector<f64>> {
        let m = self.m();
        let mut u = vec![DVector::zeros(m)];
        u.extend((0..self.k() - 1).map(|j| x.rows(j * m, m).into_owned()));
        u
    }

    fn hp_check(&self, j: usize, hp: &DVector<f64>) -> Result<()> {
        if let Some(v) = hp.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::StagnationDetected { p: self.p[j], hp: *v });
        }
        Ok(())
    }

    /// ∂_p h̃ at interior node j.
    fn dp_node(&self, u: &[DVector<f64>], j: usize) -> DVector<f64> {
        let w = self.node_w[j];
        &u[j - 1] * w[0] + &u[j] * w[1] + &u[j + 1] * w[2]
    }

    fn dp_surface(&self, u: &[DVector<f64>]) -> DVector<f64> {
        let s = self.k() - 1;
        let w = self.surf_w;
        &u[s] * w[0] + &u[s - 1] * w[1] + &u[s - 2] * w[2]
    }

    pub fn residual(&self, lambda: f64, u: &[DVector<f64>]) -> Result<ResidualVector> {
        let (k, b) = (self.k(), &self.basis);
        let an = self.a_nodes(lambda);
        let am = self.a_mids(lambda);
        let hq: Vec<DVector<f64>> = u.iter().map(|v| &b.dq_even * v).collect();
        let mut flux = Vec::with_capacity(k - 1);
        for mid in 0..k - 1 {
            let tq = (&hq[mid] + &hq[mid + 1]) * 0.5;
            let delta = (&u[mid + 1] - &u[mid]) / self.dmid[mid];
            let a = am[mid];
            let tp = delta.map(|d| 1.0 / a + d);
            self.hp_check(mid, &tp)?;
            flux.push(DVector::from_fn(self.m(), |i, _| {
                let ad = a * delta[i];
                (tq[i] * tq[i] - ad * (2.0 + ad)) / (2.0 * tp[i] * tp[i])
            }));
        }
        let mut interior = Vec::with_capacity(k - 2);
        for j in 1..k - 1 {
            let hp = self.dp_node(u, j).map(|d| 1.0 / an[j] + d);
            self.hp_check(j, &hp)?;
            let aj = hq[j].component_div(&hp);
            let f = &b.dq_odd * aj - (&flux[j] - &flux[j - 1]) / self.dc[j];
            interior.push(f.iter().copied().collect());
        }
        let surface = self.surface_residual(lambda, u, &hq[k - 1])?;
        let out = ResidualVector {
            interior,
            surface: surface.iter().copied().collect(),
            row_widths: self.dc[1..k - 1].to_vec(),
        };
        if out.interior.iter().flatten().chain(&out.surface).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("wave residual".into()));
        }
        Ok(out)
    }

    fn surface_residual(&self, lambda: f64, u: &[DVector<f64>], hq: &DVector<f64>) -> Result<DVector<f64>> {
        let s = self.k() - 1;
        let (g, sigma) = (self.problem.params.g, self.problem.params.sigma);
        let c = lambda.sqrt();
        let delta = self.dp_surface(u);
        let hp = delta.map(|d| 1.0 / c + d);
        self.hp_check(s, &hp)?;
        let us = &u[s];
        let gx = DVector::from_fn(self.m(), |i, _| {
            let q2 = hq[i] * hq[i];
            let cd = c * delta[i];
            let x = (1.0 + q2).powf(1.5) * ((q2 - cd * (2.0 + cd)) / (hp[i] * hp[i]) + 2.0 * g * us[i]) / (2.0 * sigma);
            x - us[i]
        });
        Ok(us + &self.basis.hinv * gx)
    }

    /// Block Jacobian ∂F/∂h̃ and the column ∂F/∂λ.
    pub fn jacobian(&self, lambda: f64, u: &[DVector<f64>]) -> Result<(BlockSystem, DVector<f64>)> {
        let (k, m, b) = (self.k(), self.m(), &self.basis);
        let an = self.a_nodes(lambda);
        let am = self.a_mids(lambda);
        let hq: Vec<DVector<f64>> = u.iter().map(|v| &b.dq_even * v).collect();
        let rows = k - 1;
        let mut sys = BlockSystem::zeros(rows, m);
        let mut col = DVector::zeros(rows * m);
        let half_dq = &b.dq_even * 0.5;

        // Midpoint flux derivatives: (w.r.t. lower node, w.r.t. upper node, w.r.t. λ).
        let mut dflux = Vec::with_capacity(k - 1);
        for mid in 0..k - 1 {
            let tq = (&hq[mid] + &hq[mid + 1]) * 0.5;
            let delta = (&u[mid + 1] - &u[mid]) / self.dmid[mid];
            let a = am[mid];
            let tp = delta.map(|d| 1.0 / a + d);
            self.hp_check(mid, &tp)?;
            let b_tq = tq.component_div(&tp.map(|t| t * t));
            let b_tp = DVector::from_fn(m, |i, _| -(1.0 + tq[i] * tq[i]) / tp[i].powi(3));
            let via_q = rows_scaled(&b_tq, &half_dq);
            let via_p = DMatrix::from_diagonal(&(&b_tp / self.dmid[mid]));
            let d_lower = &via_q - &via_p;
            let d_upper = &via_q + &via_p;
            let a3 = a * a * a;
            let d_lam = DVector::from_fn(m, |i, _| {
                let ad = a * delta[i];
                (tq[i] * tq[i] - ad * (3.0 + 3.0 * ad + ad * ad)) / (2.0 * a3 * tp[i].powi(3))
            });
            dflux.push((d_lower, d_upper, d_lam));
        }

        for j in 1..k - 1 {
            let r = j - 1;
            let w = self.node_w[j];
            let hp = self.dp_node(u, j).map(|d| 1.0 / an[j] + d);
            self.hp_check(j, &hp)?;
            let inv_hp = hp.map(|h| 1.0 / h);
            let a_hp = -hq[j].component_div(&hp.map(|h| h * h));
            let dq_odd_diag = |scale: f64| cols_scaled(&b.dq_odd, &(&a_hp * scale));
            let a_self = &b.dq_odd * (rows_scaled(&inv_hp, &b.dq_even)) + dq_odd_diag(w[1]);
            let inv_dc = 1.0 / self.dc[j];
            let (lo_lower, lo_upper, lo_lam) = &dflux[j - 1];
            let (hi_lower, hi_upper, hi_lam) = &dflux[j];
            sys.diag[r] = a_self - (hi_lower - lo_upper) * inv_dc;
            sys.upper[r] = dq_odd_diag(w[2]) - hi_upper * inv_dc;
            if j > 1 {
                sys.lower[r] = dq_odd_diag(w[0]) + lo_lower * inv_dc;
            }
            let a3 = an[j].powi(3);
            let da = DVector::from_fn(m, |i, _| hq[j][i] / (2.0 * a3 * hp[i] * hp[i]));
            let dl = &b.dq_odd * da - (hi_lam - lo_lam) * inv_dc;
            col.rows_mut(r * m, m).copy_from(&dl);
        }

        // Surface row.
        let s = k - 1;
        let r = rows - 1;
        let (g, sigma) = (self.problem.params.g, self.problem.params.sigma);
        let c = lambda.sqrt();
        let delta = self.dp_surface(u);
        let hp = delta.map(|d| 1.0 / c + d);
        self.hp_check(s, &hp)?;
        let hqs = &hq[s];
        let us = &u[s];
        let mut x_q = DVector::zeros(m);
        let mut x_p = DVector::zeros(m);
        let mut x_u = DVector::zeros(m);
        let mut x_l = DVector::zeros(m);
        for i in 0..m {
            let q2 = hqs[i] * hqs[i];
            let sv = 1.0 + q2;
            let (h, h2) = (hp[i], hp[i] * hp[i]);
            x_q[i] = hqs[i] * sv.sqrt() * (5.0 * sv / h2 + 3.0 * (2.0 * g * us[i] - lambda)) / (2.0 * sigma);
            x_p[i] = -sv.powf(2.5) / (sigma * h * h2);
            x_u[i] = g * sv.powf(1.5) / sigma - 1.0;
            let cd = c * delta[i];
            x_l[i] = sv.powf(1.5) * (q2 - cd * (3.0 + 3.0 * cd + cd * cd)) / (2.0 * sigma * (c * h).powi(3));
        }
        let sw = self.surf_w;
        let inner = rows_scaled(&x_q, &b.dq_even) + DMatrix::from_diagonal(&(&x_p * sw[0] + &x_u));
        sys.diag[r] = DMatrix::identity(m, m) + &b.hinv * inner;
        sys.lower[r] = &b.hinv * DMatrix::from_diagonal(&(&x_p * sw[1]));
        sys.extra = &b.hinv * DMatrix::from_diagonal(&(&x_p * sw[2]));
        col.rows_mut(r * m, m).copy_from(&(&b.hinv * x_l));
        Ok((sys, col))
    }

    /// Mode-k linearization at h̃ = 0 acting on `(u_1, …, u_{K−1})`.
    pub fn mode_matrix(&self, lambda: f64, mode: usize) -> DMatrix<f64> {
        let k = self.k();
        let an = self.a_nodes(lambda);
        let am = self.a_mids(lambda);
        let kk = self.basis.wavenumber(mode).powi(2);
        let mut a = DMatrix::zeros(k - 1, k - 1);
        for j in 1..k - 1 {
            let r = j - 1;
            let lo = am[j - 1].powi(3) / (self.dmid[j - 1] * self.dc[j]);
            let hi = am[j].powi(3) / (self.dmid[j] * self.dc[j]);
            a[(r, r)] = -kk * an[j] - lo - hi;
            a[(r, r + 1)] = hi;
            if j > 1 {
                a[(r, r - 1)] = lo;
            }
        }
        let (g, sigma) = (self.problem.params.g, self.problem.params.sigma);
        let l32 = lambda.powf(1.5);
        let sw = self.surf_w;
        let r = k - 2;
        let f = 1.0 / (1.0 + kk);
        a[(r, r)] = 1.0 + f * (g / sigma - 1.0 - l32 * sw[0] / sigma);
        a[(r, r - 1)] = -f * l32 * sw[1] / sigma;
        a[(r, r - 2)] = -f * l32 * sw[2] / sigma;
        a
    }

    /// Shooting for the discrete mode-`mode` kernel: `u_0 = 0`, `u_1 = 1`,
    /// interior rows solved upwards. Returns the surface defect and the
    /// profile (unnormalized).
    pub fn shoot(&self, lambda: f64, mode: usize) -> (f64, Vec<f64>) {
        let k = self.k();
        let an = self.a_nodes(lambda);
        let am = self.a_mids(lambda);
        let kk = self.basis.wavenumber(mode).powi(2);
        let mut u = vec![0.0; k];
        u[1] = 1.0;
        for j in 1..k - 1 {
            let lo = am[j - 1].powi(3) * (u[j] - u[j - 1]) / self.dmid[j - 1];
            u[j + 1] = u[j] + self.dmid[j] / am[j].powi(3) * (lo + self.dc[j] * kk * an[j] * u[j]);
        }
        let (g, sigma) = (self.problem.params.g, self.problem.params.sigma);
        let sw = self.surf_w;
        let s = k - 1;
        let dp = sw[0] * u[s] + sw[1] * u[s - 1] + sw[2] * u[s - 2];
        let defect = ((g + sigma * kk) * u[s] - lambda.powf(1.5) * dp) / u[s].abs().max(f64::MIN_POSITIVE);
        (defect, u)
    }

    /// Trapezoid weights in p (uniform weight in q is implicit).
    pub fn p_weights(&self) -> Vec<f64> {
        grid::trapezoid_weights(&self.p)
    }
}
