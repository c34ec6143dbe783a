//! Physical flow fields from a computed wave.
//!
//! At `x = q` the streamline `ψ = −p` sits at `y = h(q, p) − d`, and
//! `u − c = −1/h_p`, `v = −h_q/h_p`. The pressure is
//! `P = −|∇ψ|²/2 − g(y + d) − Γ(p) + Q/2` (with `P_0 = 0`), so the
//! Bernoulli quantity `E = P + |∇ψ|²/2 + g(y + d) + Γ(−ψ)` equals `Q/2`.
//!
//! Residuals are evaluated on the curvilinear grid itself: for a field
//! `f(x, p)`, `∂_y f = f_p/h_p` and `∂_x f|_y = f_x − (h_x/h_p) f_p`, with
//! spectral derivatives in x and fourth-order differences in p.

use crate::error::{Error, Result};
use crate::grid;
use crate::laminar::Problem;
use crate::waves::WaveProfile;

/// Fields on the `x × p` grid, indexed `[l][j]` (x-node l, p-node j).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub n: u32,
    pub lambda: f64,
    pub q_head: f64,
    /// One period `[0, 2π/n)`, `2M` equispaced nodes.
    pub x_nodes: Vec<f64>,
    pub pgrid: Vec<f64>,
    /// Streamline ordinates `y = h − d`.
    pub y_maps: Vec<Vec<f64>>,
    pub psi: Vec<Vec<f64>>,
    pub u_minus_c: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    /// Empty until [`reconstruct_pressure`] runs.
    pub pressure: Vec<Vec<f64>>,
    pub eta: Vec<f64>,
    pub d: f64,
    /// Bernoulli constant (Q/2); `None` before the pressure is known.
    pub e: Option<f64>,
    /// max |E(x, y) − Q/2| over the grid.
    pub bernoulli_defect: f64,
    /// h_x and h_p at the nodes.
    pub h_x: Vec<Vec<f64>>,
    pub h_p: Vec<Vec<f64>>,
}

/// Sup-norm residuals of the Euler system and boundary conditions. For
/// singular γ the values near the surface (`p > −|p0|/10`) are grid L_r
/// averages instead of maxima.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerResiduals {
    pub div_max: f64,
    pub momentum_x_max: f64,
    pub momentum_y_max: f64,
    pub kinematic_max: f64,
    pub dynamic_max: f64,
    /// |u_y − v_x − γ(−ψ)|, measured like the momentum residuals.
    pub vorticity: f64,
}

fn x_nodes(n: u32, nx: usize) -> Vec<f64> {
    let period = 2.0 * std::f64::consts::PI / n as f64;
    (0..nx).map(|l| l as f64 * period / nx as f64).collect()
}

/// ψ, the streamline geometry and the velocity field.
pub fn reconstruct_stream(profile: &WaveProfile) -> Result<FieldGrid> {
    let k = profile.pgrid.len();
    let m = profile.qgrid.len();
    let nx = 2 * m;
    let n = profile.n;
    let nf = n as f64;
    let xs = x_nodes(n, nx);
    let lam = &profile.laminar;
    let mut out = FieldGrid {
        n,
        lambda: profile.lambda,
        q_head: profile.q_head,
        x_nodes: xs.clone(),
        pgrid: profile.pgrid.clone(),
        y_maps: Vec::with_capacity(nx),
        psi: Vec::with_capacity(nx),
        u_minus_c: Vec::with_capacity(nx),
        v: Vec::with_capacity(nx),
        pressure: Vec::new(),
        eta: Vec::with_capacity(nx),
        d: profile.depth,
        e: None,
        bernoulli_defect: f64::NAN,
        h_x: Vec::with_capacity(nx),
        h_p: Vec::with_capacity(nx),
    };
    for &x in &xs {
        let mut ht = vec![0.0; k];
        let mut hx = vec![0.0; k];
        for j in 0..k {
            for (kk, c) in profile.h_coeffs[j].iter().enumerate() {
                let w = kk as f64 * nf;
                ht[j] += c * (w * x).cos();
                hx[j] -= c * w * (w * x).sin();
            }
        }
        let dht = grid::differentiate(&profile.pgrid, &ht, 5);
        let hp: Vec<f64> = dht.iter().zip(&lam.a_values).map(|(d, a)| 1.0 / a + d).collect();
        if let Some(j) = hp.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::StagnationDetected { p: profile.pgrid[j], hp: hp[j] });
        }
        let y: Vec<f64> = (0..k).map(|j| lam.h_values[j] + ht[j] - profile.depth).collect();
        out.eta.push(y[k - 1]);
        out.psi.push(profile.pgrid.iter().map(|p| -p).collect());
        out.u_minus_c.push(hp.iter().map(|h| -1.0 / h).collect());
        out.v.push(hx.iter().zip(&hp).map(|(q, h)| -q / h).collect());
        out.y_maps.push(y);
        out.h_x.push(hx);
        out.h_p.push(hp);
    }
    Ok(out)
}

/// Fill the pressure and the Bernoulli constant.
pub fn reconstruct_pressure(problem: &Problem, mut fg: FieldGrid) -> Result<FieldGrid> {
    let g = problem.params.g;
    let gam: Vec<f64> = fg.pgrid.iter().map(|&p| problem.model.primitive(p)).collect();
    let half_q = 0.5 * fg.q_head;
    let mut defect: f64 = 0.0;
    let mut pressure = Vec::with_capacity(fg.x_nodes.len());
    for l in 0..fg.x_nodes.len() {
        let row: Vec<f64> = (0..fg.pgrid.len())
            .map(|j| {
                let speed2 = fg.u_minus_c[l][j].powi(2) + fg.v[l][j].powi(2);
                let h = fg.y_maps[l][j] + fg.d;
                let p = -0.5 * speed2 - g * h - gam[j] + half_q;
                let e = p + 0.5 * speed2 + g * h + gam[j];
                defect = defect.max((e - half_q).abs());
                p
            })
            .collect();
        pressure.push(row);
    }
    if pressure.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("pressure".into()));
    }
    fg.pressure = pressure;
    fg.e = Some(half_q);
    fg.bernoulli_defect = defect;
    Ok(fg)
}

/// Both reconstruction steps.
pub fn reconstruct(problem: &Problem, profile: &WaveProfile) -> Result<FieldGrid> {
    reconstruct_pressure(problem, reconstruct_stream(profile)?)
}

/// ∫ (u − c) dy along each vertical, as ∫ (u − c) y_p dp with y_p from
/// differencing the streamline ordinates (Clenshaw–Curtis in p).
pub fn mass_flux(fg: &FieldGrid) -> Vec<f64> {
    let k = fg.pgrid.len();
    let w = grid::clenshaw_curtis_weights(fg.pgrid[0], k);
    (0..fg.x_nodes.len())
        .map(|l| {
            let yp = grid::differentiate(&fg.pgrid, &fg.y_maps[l], 5);
            (0..k).map(|j| w[j] * fg.u_minus_c[l][j] * yp[j]).sum()
        })
        .collect()
}

fn dx_rows(d: &[Vec<f64>], f: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let nx = f.len();
    let k = f[0].len();
    (0..nx)
        .map(|l| (0..k).map(|j| (0..nx).map(|i| d[l][i] * f[i][j]).sum()).collect())
        .collect()
}

fn dp_rows(p: &[f64], f: &[Vec<f64>]) -> Vec<Vec<f64>> {
    f.iter().map(|row| grid::differentiate(p, row, 5)).collect()
}

/// Euler, kinematic, dynamic and vorticity residuals.
pub fn euler_residuals(problem: &Problem, fg: &FieldGrid) -> Result<EulerResiduals> {
    if fg.pressure.is_empty() {
        return Err(Error::ParameterError("pressure not reconstructed".into()));
    }
    let (g, sigma, r) = (problem.params.g, problem.params.sigma, problem.params.r);
    let nx = fg.x_nodes.len();
    let k = fg.pgrid.len();
    let period = 2.0 * std::f64::consts::PI / fg.n as f64;
    let d = grid::periodic_diff_matrix(nx, period);
    let (u, v, pr) = (&fg.u_minus_c, &fg.v, &fg.pressure);
    let (ux, vx, px) = (dx_rows(&d, u), dx_rows(&d, v), dx_rows(&d, pr));
    let (up, vp, pp) = (dp_rows(&fg.pgrid, u), dp_rows(&fg.pgrid, v), dp_rows(&fg.pgrid, pr));
    let singular = problem.model.is_singular();
    let near = |j: usize| singular && fg.pgrid[j] > 0.1 * fg.pgrid[0];
    let tw = grid::trapezoid_weights(&fg.pgrid);
    let near_w: f64 = (0..k).filter(|&j| near(j)).map(|j| tw[j]).sum::<f64>() * nx as f64;

    let mut acc = [0.0f64; 4];
    let mut near_acc = [0.0f64; 4];
    for l in 0..nx {
        for j in 0..k {
            let (hx, hp) = (fg.h_x[l][j], fg.h_p[l][j]);
            let dy = |fp: f64| fp / hp;
            let dxy = |fx: f64, fp: f64| fx - hx / hp * fp;
            let vals = [
                dxy(ux[l][j], up[l][j]) + dy(vp[l][j]),
                u[l][j] * dxy(ux[l][j], up[l][j]) + v[l][j] * dy(up[l][j]) + dxy(px[l][j], pp[l][j]),
                u[l][j] * dxy(vx[l][j], vp[l][j]) + v[l][j] * dy(vp[l][j]) + dy(pp[l][j]) + g,
                {
                    let omega = dy(up[l][j]) - dxy(vx[l][j], vp[l][j]);
                    match problem.model.gamma(fg.pgrid[j]) {
                        Ok(gm) => omega - gm,
                        Err(_) => 0.0,
                    }
                },
            ];
            for (c, val) in vals.iter().enumerate() {
                if near(j) {
                    if j < k - 1 {
                        near_acc[c] += tw[j] * val.abs().powf(r);
                    }
                } else {
                    acc[c] = acc[c].max(val.abs());
                }
            }
        }
    }
    if singular && near_w > 0.0 {
        for c in 0..4 {
            acc[c] = acc[c].max((near_acc[c] / near_w).powf(1.0 / r));
        }
    }

    // Surface conditions, with η′ and η″ from the surface samples.
    let s = k - 1;
    let mut kin: f64 = 0.0;
    let mut dynm: f64 = 0.0;
    for l in 0..nx {
        let e1: f64 = (0..nx).map(|i| d[l][i] * fg.eta[i]).sum();
        let e2: f64 = (0..nx)
            .map(|i| d[l][i] * (0..nx).map(|m| d[i][m] * fg.eta[m]).sum::<f64>())
            .sum();
        kin = kin.max((v[l][s] - u[l][s] * e1).abs());
        dynm = dynm.max((pr[l][s] + sigma * e2 / (1.0 + e1 * e1).powf(1.5)).abs());
    }
    let out = EulerResiduals {
        div_max: acc[0],
        momentum_x_max: acc[1],
        momentum_y_max: acc[2],
        kinematic_max: kin,
        dynamic_max: dynm,
        vorticity: acc[3],
    };
    if [out.div_max, out.momentum_x_max, out.momentum_y_max, out.kinematic_max, out.dynamic_max, out.vorticity]
        .iter()
        .any(|v| !v.is_finite())
    {
        return Err(Error::NonFinite("Euler residuals".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vorticity::{FluidParams, VorticitySpec};
    use crate::waves::{continue_branch, Discretization};

    fn problem(spec: VorticitySpec) -> Problem {
        Problem::new(FluidParams::new(-1.0, 9.8, 1.0, 2.0).unwrap(), spec).unwrap()
    }

    #[test]
    fn laminar_fields() {
        let pr = problem(VorticitySpec::Constant { c: -1.0 });
        let br = continue_branch(&pr, 1, &[0.0], &Discretization::new(8, 65)).unwrap();
        let prof = &br.profiles[0];
        let fg = reconstruct(&pr, prof).unwrap();
        for l in 0..fg.x_nodes.len() {
            assert!(fg.v[l].iter().all(|v| *v == 0.0));
            assert_eq!(fg.eta[l], 0.0);
            assert_eq!(fg.psi[l][64], 0.0);
            assert_eq!(fg.psi[l][0], 1.0);
            for (j, u) in fg.u_minus_c[l].iter().enumerate() {
                assert!((u + prof.laminar.a_values[j]).abs() < 1e-9);
            }
        }
        // Bed pressure: Q/2 − a(p0)²/2 − g·0 − Γ(p0).
        let a0 = prof.laminar.a_values[0];
        let gp0 = pr.model.primitive(-1.0);
        let expect = 0.5 * prof.q_head - 0.5 * a0 * a0 - gp0;
        assert!((fg.pressure[0][0] - expect).abs() < 1e-8);
        let res = euler_residuals(&pr, &fg).unwrap();
        assert!(res.div_max < 1e-7 && res.momentum_y_max < 1e-7 && res.vorticity < 1e-6, "{res:?}");
        assert!(fg.bernoulli_defect < 1e-12);
    }

    #[test]
    fn small_wave_fields() {
        let pr = problem(VorticitySpec::Constant { c: -1.0 });
        let br = continue_branch(&pr, 1, &[2e-3], &Discretization::new(16, 257)).unwrap();
        let fg = reconstruct(&pr, &br.profiles[0]).unwrap();
        let res = euler_residuals(&pr, &fg).unwrap();
        assert!(res.momentum_x_max < 1e-6 && res.dynamic_max < 1e-6, "{res:?}");
        for f in mass_flux(&fg) {
            assert!((f + 1.0).abs() < 1e-8);
        }
        let mean: f64 = fg.eta.iter().sum::<f64>() / fg.eta.len() as f64;
        assert!(mean.abs() < 1e-15);
        assert!(fg.u_minus_c.iter().flatten().all(|u| *u < 0.0));
    }
}
