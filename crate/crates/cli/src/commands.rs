//! One function per subcommand. Each writes its artifacts into the output
//! directory and returns the text printed on stdout.

use std::path::Path;

use serde_json::{json, Map, Value};

use rotwave::dispersion::{self, bifurcation_points_from, dispersion_curve, minimal_wavenumber};
use rotwave::fields::{euler_residuals, mass_flux, reconstruct};
use rotwave::grid::chebyshev_grid;
use rotwave::laminar::build_laminar;
use rotwave::sturm::{self, solve_v1, solve_v2, wronskian_spread};
use rotwave::waves::{self, continue_branch, strong_form_residual, QBasis};
use rotwave::Problem;

use crate::config::RunConfig;
use crate::output::{num, nums, svg_plot, write_csv, write_json, write_svg, Series};
use crate::Failure;

fn default_n(problem: &Problem, n: Option<u32>) -> Result<u32, Failure> {
    match n {
        Some(n) => Ok(n),
        None => Ok(minimal_wavenumber(problem)?.n),
    }
}

pub fn laminar(cfg: &RunConfig, problem: &Problem, out: &Path) -> Result<String, Failure> {
    let lambda = cfg.laminar.lambda.unwrap_or(problem.lambda_min() + 1.0);
    if cfg.laminar.points < 2 {
        return Err(Failure::Config("laminar.points must be at least 2".into()));
    }
    let grid = chebyshev_grid(problem.p0(), cfg.laminar.points);
    let lam = build_laminar(problem, lambda, &grid)?;
    let rows: Vec<Vec<f64>> = (0..grid.len())
        .map(|j| vec![grid[j], lam.a_values[j], lam.h_values[j]])
        .collect();
    write_csv(&out.join("laminar.csv"), &["p", "a", "H"], &rows)?;
    write_json(
        &out.join("laminar.json"),
        &json!({
            "lambda": num(lambda, "lambda")?,
            "lambda_min": num(problem.lambda_min(), "lambda_min")?,
            "Q": num(lam.q, "Q")?,
            "d": num(lam.d, "d")?,
        }),
    )?;
    Ok(format!("lambda = {lambda:.10}, Q = {:.10}, d = {:.10}", lam.q, lam.d))
}

pub fn dispersion(cfg: &RunConfig, problem: &Problem, out: &Path) -> Result<String, Failure> {
    let th = dispersion::lambda_threshold(problem)?;
    let l0 = th.lambda0;
    let scale = l0.max(1.0);
    let lo = cfg.dispersion.lambda_min.unwrap_or(l0 + 0.01 * scale);
    let hi = cfg.dispersion.lambda_max.unwrap_or(l0 + 10.0 * scale);
    let ns = cfg.dispersion.samples;
    if ns < 2 || !(hi > lo) {
        return Err(Failure::Config("dispersion needs samples >= 2 and lambda_max > lambda_min".into()));
    }
    let lambdas: Vec<f64> = (0..ns).map(|i| lo + (hi - lo) * i as f64 / (ns - 1) as f64).collect();
    let curve = dispersion_curve(problem, &lambdas)?;
    let rows: Vec<Vec<f64>> = (0..ns)
        .map(|i| vec![lambdas[i], curve.mu_values[i], curve.w0_values[i]])
        .collect();
    write_csv(&out.join("dispersion.csv"), &["lambda", "mu", "W0"], &rows)?;
    write_json(
        &out.join("dispersion.json"),
        &json!({
            "lambda0": num(curve.lambda0, "lambda0")?,
            "no_root": curve.no_root,
            "lambda_min": num(problem.lambda_min(), "lambda_min")?,
            "mu_inf": num(curve.mu_inf, "mu_inf")?,
            "N": curve.n,
        }),
    )?;
    let svg = svg_plot(
        "dispersion map",
        "lambda",
        "mu",
        &[Series {
            label: "mu(lambda)",
            points: lambdas.iter().copied().zip(curve.mu_values.iter().copied()).collect(),
        }],
    );
    write_svg(&out.join("dispersion.svg"), &svg)?;
    Ok(format!(
        "lambda0 = {:.12}{}, inf mu = {:.6}, N = {}",
        curve.lambda0,
        if curve.no_root { " (no root)" } else { "" },
        curve.mu_inf,
        curve.n
    ))
}

pub fn bifurcate(cfg: &RunConfig, problem: &Problem, out: &Path) -> Result<String, Failure> {
    let mw = minimal_wavenumber(problem)?;
    let n_max = cfg.bifurcate.n_max.unwrap_or(mw.n + 4);
    if n_max < mw.n {
        return Err(Failure::Config(format!("n_max = {n_max} is below N = {}", mw.n)));
    }
    let pts = bifurcation_points_from(problem, &mw, n_max)?;
    let mut rows = Vec::new();
    let mut list = Vec::new();
    for p in &pts {
        let d = sturm::wronskian_partials(problem, p.lambda, (p.n as f64).powi(2))?;
        let wl = d.w_lambda.unwrap_or(f64::NAN);
        rows.push(vec![p.n as f64, p.lambda, wl]);
        list.push(json!({
            "n": p.n,
            "lambda": num(p.lambda, "lambda_n")?,
            "W_lambda": num(wl, "W_lambda")?,
            "transversal": waves::transversality_holds(&d),
        }));
    }
    write_csv(&out.join("bifurcation.csv"), &["n", "lambda", "W_lambda"], &rows)?;
    write_json(
        &out.join("bifurcation.json"),
        &json!({ "N": mw.n, "lambda0": num(mw.threshold.lambda0, "lambda0")?, "points": list }),
    )?;
    let lines: Vec<String> = pts.iter().map(|p| format!("lambda_{} = {:.12}", p.n, p.lambda)).collect();
    Ok(lines.join("\n"))
}

/// Surface elevation on `2M` equispaced x over one period.
fn surface_samples(p: &waves::WaveProfile) -> Vec<(f64, f64)> {
    let m = p.qgrid.len();
    let nx = 2 * m;
    let period = 2.0 * std::f64::consts::PI / p.n as f64;
    let top = p.pgrid.len() - 1;
    let mut c = p.h_coeffs[top].clone();
    c[0] = 0.0;
    (0..nx)
        .map(|l| {
            let x = l as f64 * period / nx as f64;
            (x, QBasis::eval_cos(&c, p.n, x))
        })
        .collect()
}

pub fn branch(cfg: &RunConfig, problem: &Problem, out: &Path) -> Result<String, Failure> {
    let n = default_n(problem, cfg.branch.n)?;
    if cfg.branch.s.is_empty() {
        return Err(Failure::Config("branch.s is empty".into()));
    }
    let br = continue_branch(problem, n, &cfg.branch.s, &cfg.disc)?;
    let mut rows = Vec::new();
    let mut profiles = Vec::new();
    let mut series_pts = Vec::new();
    let mut lines = vec![format!("n = {n}, lambda_n = {:.12}", br.lambda_n)];
    for p in &br.profiles {
        let surf = surface_samples(p);
        for &(x, e) in &surf {
            rows.push(vec![p.s, x, e]);
        }
        let sf = strong_form_residual(problem, p)?;
        let mut obj = Map::new();
        obj.insert("s".into(), num(p.s, "s")?);
        obj.insert("lambda".into(), num(p.lambda, "lambda")?);
        obj.insert("Q".into(), num(p.q_head, "Q")?);
        obj.insert("depth".into(), num(p.depth, "depth")?);
        obj.insert("hp_min".into(), num(p.hp_min, "hp_min")?);
        obj.insert("hp_positive".into(), Value::Bool(p.hp_positive()));
        obj.insert("newton_iterations".into(), json!(p.newton_iterations));
        obj.insert("residual".into(), num(p.residual, "residual")?);
        obj.insert("strong_form_residual".into(), num(sf, "strong-form residual")?);
        obj.insert("qgrid".into(), nums(&p.qgrid, "qgrid")?);
        obj.insert("eta".into(), nums(&p.eta, "eta")?);
        obj.insert("surface_coeffs".into(), nums(&p.h_coeffs[p.pgrid.len() - 1], "coefficients")?);
        profiles.push(Value::Object(obj));
        series_pts.push((format!("s = {}", p.s), surf));
        lines.push(format!(
            "s = {:<10} lambda = {:.12}  iterations = {}  hp_min = {:.6}",
            p.s, p.lambda, p.newton_iterations, p.hp_min
        ));
    }
    write_csv(&out.join("surface.csv"), &["s", "x", "eta"], &rows)?;
    write_json(
        &out.join("branch.json"),
        &json!({
            "n": n,
            "lambda_n": num(br.lambda_n, "lambda_n")?,
            "lambda_n_discrete": num(br.lambda_n_discrete, "lambda_n")?,
            "disc": serde_json::to_value(br.disc).expect("plain struct"),
            "profiles": profiles,
        }),
    )?;
    let series: Vec<Series> = series_pts
        .iter()
        .map(|(label, pts)| Series { label, points: pts.clone() })
        .collect();
    write_svg(&out.join("surface.svg"), &svg_plot("surface elevation", "x", "eta", &series))?;
    Ok(lines.join("\n"))
}

pub fn fields(cfg: &RunConfig, problem: &Problem, out: &Path) -> Result<String, Failure> {
    let n = default_n(problem, cfg.fields.n)?;
    let s = cfg.fields.s;
    let c = cfg.fields.wave_speed;
    let br = continue_branch(problem, n, &[s], &cfg.disc)?;
    let prof = &br.profiles[0];
    let fg = reconstruct(problem, prof)?;
    let res = euler_residuals(problem, &fg)?;
    let flux_err = mass_flux(&fg)
        .iter()
        .map(|f| (f - problem.p0()).abs())
        .fold(0.0, f64::max);
    let mut rows = Vec::new();
    for l in 0..fg.x_nodes.len() {
        for j in 0..fg.pgrid.len() {
            rows.push(vec![
                fg.x_nodes[l],
                fg.y_maps[l][j],
                fg.psi[l][j],
                fg.u_minus_c[l][j] + c,
                fg.v[l][j],
                fg.pressure[l][j],
            ]);
        }
    }
    write_csv(&out.join("fields.csv"), &["x", "y", "psi", "u", "v", "P"], &rows)?;
    let e = fg.e.unwrap_or(f64::NAN);
    write_json(
        &out.join("fields.json"),
        &json!({
            "n": n,
            "s": num(s, "s")?,
            "lambda": num(prof.lambda, "lambda")?,
            "Q": num(prof.q_head, "Q")?,
            "E": num(e, "E")?,
            "d": num(fg.d, "d")?,
            "wave_speed": num(c, "wave_speed")?,
            "bernoulli_defect": num(fg.bernoulli_defect, "bernoulli defect")?,
            "mass_flux_error": num(flux_err, "mass flux")?,
            "residuals": {
                "div_max": num(res.div_max, "residual")?,
                "momentum_x_max": num(res.momentum_x_max, "residual")?,
                "momentum_y_max": num(res.momentum_y_max, "residual")?,
                "kinematic_max": num(res.kinematic_max, "residual")?,
                "dynamic_max": num(res.dynamic_max, "residual")?,
                "vorticity": num(res.vorticity, "residual")?,
            },
        }),
    )?;
    let k = fg.pgrid.len();
    let levels: Vec<usize> = (0..=10).map(|i| i * (k - 1) / 10).collect();
    let labels: Vec<String> = levels.iter().map(|&j| format!("psi = {:.3}", fg.psi[0][j])).collect();
    let series: Vec<Series> = levels
        .iter()
        .zip(&labels)
        .map(|(&j, label)| Series {
            label: if j == 0 || j == k - 1 { label } else { "" },
            points: (0..fg.x_nodes.len()).map(|l| (fg.x_nodes[l], fg.y_maps[l][j])).collect(),
        })
        .collect();
    write_svg(&out.join("streamlines.svg"), &svg_plot("streamlines", "x", "y", &series))?;
    Ok(format!(
        "n = {n}, s = {s}, lambda = {:.12}, E = {:.12}, max residuals: div {:.2e}, kinematic {:.2e}, dynamic {:.2e}",
        prof.lambda, e, res.div_max, res.kinematic_max, res.dynamic_max
    ))
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

pub fn verify(cfg: &RunConfig, problem: &Problem, out: &Path) -> Result<String, Failure> {
    let base = problem.lambda_min();
    let mut checks = Vec::new();

    let grid = chebyshev_grid(problem.p0(), 257);
    let mut spread: f64 = 0.0;
    for gap in [0.5, 2.0, 8.0] {
        for mu in [0.1, 10.0, 1000.0] {
            let v1 = solve_v1(problem, base + gap, mu, &grid)?;
            let v2 = solve_v2(problem, base + gap, mu, &grid)?;
            spread = spread.max(wronskian_spread(&v1, &v2));
        }
    }
    checks.push(Check {
        name: "Wronskian constancy",
        pass: spread < 1e-8,
        detail: format!("max relative spread {spread:.2e}"),
    });

    let l0 = dispersion::lambda_threshold(problem)?.lambda0;
    let mut signs = true;
    for f in [0.5, 1.0, 2.0, 4.0] {
        let lambda = l0 + f * l0.max(1.0);
        let mu = dispersion::mu_of_lambda(problem, lambda)?;
        let d = sturm::wronskian_partials(problem, lambda, mu)?;
        signs &= d.signs_ok().unwrap_or(false);
    }
    checks.push(Check {
        name: "signs at roots",
        pass: signs,
        detail: "W_lambda > 0, W_mu < 0 at 4 roots".into(),
    });

    let mut asym = true;
    for gap in [0.5, 2.0, 8.0] {
        asym &= dispersion::asymptote_check_l4(problem, base + gap, &[1e6])?[0].w < 0.0;
    }
    checks.push(Check {
        name: "large-mu asymptote",
        pass: asym,
        detail: "W(0; lambda, 1e6) < 0 at 3 lambda".into(),
    });

    let mut bounds = 0;
    let mut total = 0;
    for mu in [0.1, 10.0, 1e3, 1e4] {
        for t in [0.25, 0.5, 0.75] {
            total += 1;
            if dispersion::bound_check_l3(problem, base + 2.0, mu, t * problem.p0(), 1.0, 1.0)?.pass {
                bounds += 1;
            }
        }
    }
    checks.push(Check {
        name: "integral bounds",
        pass: bounds == total,
        detail: format!("{bounds}/{total} cases"),
    });

    let (m, k) = (cfg.disc.m, cfg.disc.k);
    let zero = vec![vec![0.0; m]; k];
    let r = waves::assemble_residual(problem, base + 1.0, &zero, 1, &cfg.disc)?.max_norm();
    checks.push(Check {
        name: "laminar residual",
        pass: r < 1e-10,
        detail: format!("|F(lambda, 0)| = {r:.2e}"),
    });

    let mut table = format!("{:<24} {:<6} detail\n", "check", "result");
    let mut report = Vec::new();
    for c in &checks {
        table.push_str(&format!("{:<24} {:<6} {}\n", c.name, if c.pass { "PASS" } else { "FAIL" }, c.detail));
        report.push(json!({ "check": c.name, "pass": c.pass, "detail": c.detail }));
    }
    write_json(&out.join("verify.json"), &Value::Array(report))?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    if !failed.is_empty() {
        print!("{table}");
        return Err(Failure::Verification(format!("failed checks: {}", failed.join(", "))));
    }
    Ok(table.trim_end().to_string())
}
