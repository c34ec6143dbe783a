//! Vorticity functions γ on `(p0, 0)` and their primitive Γ(p) = ∫_0^p γ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// Physical and structural constants of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidParams {
    /// Relative mass flux, negative.
    pub p0: f64,
    /// Gravitational constant; zero gives the pure capillary problem.
    pub g: f64,
    /// Surface tension coefficient.
    pub sigma: f64,
    /// Integrability exponent of the vorticity.
    #[serde(default = "default_r")]
    pub r: f64,
}

fn default_r() -> f64 {
    2.0
}

impl FluidParams {
    pub fn new(p0: f64, g: f64, sigma: f64, r: f64) -> Result<Self> {
        let p = FluidParams { p0, g, sigma, r };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p0 < 0.0 && self.p0.is_finite()) {
            return Err(Error::ParameterError(format!("p0 must be negative, got {}", self.p0)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::ParameterError(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::ParameterError(format!("g must be non-negative, got {}", self.g)));
        }
        if !(self.r > 1.0) {
            return Err(Error::ParameterError(format!("r must exceed 1, got {}", self.r)));
        }
        Ok(())
    }
}

/// User-facing description of a vorticity function, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum VorticitySpec {
    Zero,
    Constant {
        c: f64,
    },
    /// γ(p) = delta·(−p)^(−1/(k·r)).
    PowerLaw {
        delta: f64,
        k: f64,
        r: f64,
    },
    /// `values[i]` holds on `[b_{i}, b_{i+1})` where `b` is `breakpoints`
    /// padded with `p0` and `0`.
    Piecewise {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// Interpolated table; `order` 0 is piecewise constant (right-continuous),
    /// 1 is piecewise linear. The nodes must cover `[p0, 0]`.
    Tabulated {
        nodes: Vec<f64>,
        values: Vec<f64>,
        #[serde(default = "default_order")]
        order: u8,
    },
}

fn default_order() -> u8 {
    1
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Zero,
    Constant(f64),
    PowerLaw { delta: f64, e: f64 },
    /// Piecewise polynomial of degree ≤ 1: cell `i` is `[x[i], x[i+1])`
    /// with value `y0[i] + slope[i]·(p − x[i])`; `cum[i] = Γ(x[i])`.
    Table {
        x: Vec<f64>,
        y0: Vec<f64>,
        slope: Vec<f64>,
        cum: Vec<f64>,
    },
}

/// A validated vorticity function on `(p0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VorticityModel {
    spec: VorticitySpec,
    kind: Kind,
    p0: f64,
    gamma_max: f64,
}

const GAMMA_MAX_GRID: usize = 2048;

impl VorticityModel {
    pub fn new(spec: VorticitySpec, p0: f64) -> Result<Self> {
        if !(p0 < 0.0 && p0.is_finite()) {
            return Err(Error::ParameterError(format!("p0 must be negative, got {p0}")));
        }
        let bad = |m: &str| Err(Error::InvalidModel(m.to_string()));
        let kind = match &spec {
            VorticitySpec::Zero => Kind::Zero,
            VorticitySpec::Constant { c } => {
                if !c.is_finite() {
                    return bad("constant vorticity must be finite");
                }
                Kind::Constant(*c)
            }
            VorticitySpec::PowerLaw { delta, k, r } => {
                if !(*delta > 0.0 && delta.is_finite()) {
                    return bad("power law needs delta > 0");
                }
                if !(*k > 1.0 && *k < 3.0 && *r > 1.0 && *r < 3.0) {
                    return bad("power law needs k and r in (1, 3)");
                }
                if k * r >= 3.0 {
                    return bad("power law needs k*r < 3");
                }
                Kind::PowerLaw {
                    delta: *delta,
                    e: 1.0 / (k * r),
                }
            }
            VorticitySpec::Piecewise { breakpoints, values } => {
                if values.len() != breakpoints.len() + 1 {
                    return bad("piecewise model needs one more value than breakpoints");
                }
                let mut x = Vec::with_capacity(breakpoints.len() + 2);
                x.push(p0);
                x.extend_from_slice(breakpoints);
                x.push(0.0);
                if !x.windows(2).all(|w| w[0] < w[1]) {
                    return bad("breakpoints must be strictly increasing inside (p0, 0)");
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("piecewise values must be finite");
                }
                table(x, values.clone(), vec![0.0; values.len()])
            }
            VorticitySpec::Tabulated { nodes, values, order } => {
                if nodes.len() != values.len() || nodes.len() < 2 {
                    return bad("tabulated model needs matching nodes/values, at least two");
                }
                if !nodes.windows(2).all(|w| w[0] < w[1]) {
                    return bad("tabulated nodes must be strictly increasing");
                }
                let slack = 1e-12 * p0.abs();
                if nodes[0] > p0 + slack || *nodes.last().unwrap() < -slack {
                    return bad("tabulated nodes must cover [p0, 0]");
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("tabulated values must be finite");
                }
                // Restrict the table to [p0, 0].
                let eval = |p: f64| tab_eval(nodes, values, *order, p);
                let mut x = vec![p0];
                x.extend(nodes.iter().copied().filter(|&n| n > p0 && n < 0.0));
                x.push(0.0);
                let cells = x.len() - 1;
                let mut y0 = Vec::with_capacity(cells);
                let mut slope = Vec::with_capacity(cells);
                for i in 0..cells {
                    let v = eval(x[i]);
                    y0.push(v);
                    slope.push(match order {
                        0 => 0.0,
                        1 => {
                            // Left limit at the right end of the cell.
                            let xr = x[i + 1];
                            let j = nodes.partition_point(|&n| n <= x[i]).clamp(1, nodes.len() - 1);
                            let vr = values[j - 1]
                                + (values[j] - values[j - 1]) / (nodes[j] - nodes[j - 1]) * (xr - nodes[j - 1]);
                            (vr - v) / (xr - x[i])
                        }
                        _ => return bad("tabulated order must be 0 or 1"),
                    });
                }
                table(x, y0, slope)
            }
        };
        let mut model = VorticityModel {
            spec,
            kind,
            p0,
            gamma_max: 0.0,
        };
        model.gamma_max = model.compute_gamma_max();
        Ok(model)
    }

    pub fn spec(&self) -> &VorticitySpec {
        &self.spec
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    /// Γ_M = max over `[p0, 0]` of Γ, cached at construction.
    pub fn gamma_max(&self) -> f64 {
        self.gamma_max
    }

    /// Whether γ is unbounded at `p = 0`.
    pub fn is_singular(&self) -> bool {
        matches!(self.kind, Kind::PowerLaw { .. })
    }

    /// Interior points in `(p0, 0)` where γ jumps or has a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Table { x, .. } => x[1..x.len() - 1].to_vec(),
            _ => Vec::new(),
        }
    }

    fn check_domain(&self, p: f64) -> Result<()> {
        if !(p >= self.p0 && p <= 0.0) {
            return Err(Error::DomainError { p, p0: self.p0 });
        }
        Ok(())
    }

    /// γ(p).
    pub fn gamma(&self, p: f64) -> Result<f64> {
        self.check_domain(p)?;
        Ok(match &self.kind {
            Kind::Zero => 0.0,
            Kind::Constant(c) => *c,
            Kind::PowerLaw { delta, e } => {
                if p == 0.0 {
                    return Err(Error::SingularPoint { p });
                }
                delta * (-p).powf(-e)
            }
            Kind::Table { x, y0, slope, .. } => {
                let i = cell(x, p);
                y0[i] + slope[i] * (p - x[i])
            }
        })
    }

    /// Γ(p) = ∫_0^p γ in closed form. `p` is clamped to `[p0, 0]`.
    pub fn primitive(&self, p: f64) -> f64 {
        let p = p.clamp(self.p0, 0.0);
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::Constant(c) => c * p,
            Kind::PowerLaw { delta, e } => -delta * (-p).powf(1.0 - e) / (1.0 - e),
            Kind::Table { x, y0, slope, cum } => {
                let i = cell(x, p);
                let t = p - x[i];
                cum[i] + y0[i] * t + 0.5 * slope[i] * t * t
            }
        }
    }

    /// Γ(p) by adaptive quadrature of γ, independent of the closed forms.
    pub fn primitive_quadrature(&self, p: f64) -> Result<f64> {
        self.check_domain(p)?;
        let g = |s: f64| self.gamma(s).unwrap_or(0.0);
        Ok(-self.integrate(g, p, 0.0)?)
    }

    /// ∫_a^b f over a sub-interval of `[p0, 0]`, split at the breakpoints,
    /// with tanh–sinh on a panel ending at a singular `p = 0`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        self.integrate_tol(f, a, b, Tolerance::default())
    }

    pub fn integrate_tol<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        if a > b {
            return Ok(-self.integrate_tol(f, b, a, tol)?);
        }
        let mut cuts = vec![a];
        cuts.extend(self.breakpoints().into_iter().filter(|&x| x > a && x < b));
        cuts.push(b);
        let mut sum = 0.0;
        for w in cuts.windows(2) {
            let est = if self.is_singular() && w[1] == 0.0 {
                quad::tanh_sinh(&f, w[0], w[1], tol)?
            } else {
                quad::gauss_kronrod(&f, w[0], w[1], tol)?
            };
            sum += est.value;
        }
        Ok(sum)
    }

    fn compute_gamma_max(&self) -> f64 {
        match &self.kind {
            Kind::Zero => return 0.0,
            Kind::Constant(c) => return if *c < 0.0 { c * self.p0 } else { 0.0 },
            Kind::PowerLaw { .. } => return 0.0,
            Kind::Table { .. } => {}
        }
        let mut pts: Vec<f64> = (0..=GAMMA_MAX_GRID)
            .map(|i| self.p0 * (1.0 - i as f64 / GAMMA_MAX_GRID as f64))
            .collect();
        pts.extend(self.breakpoints());
        pts.sort_by(f64::total_cmp);
        let (imax, _) = pts
            .iter()
            .enumerate()
            .map(|(i, &p)| (i, self.primitive(p)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let lo = pts[imax.saturating_sub(1)];
        let hi = pts[(imax + 1).min(pts.len() - 1)];
        let (_, best) = quad::golden_max(|p| self.primitive(p), lo, hi, 1e-14 * self.p0.abs());
        best.max(self.primitive(pts[imax])).max(0.0)
    }

    /// Minimum and maximum of Γ over `[lo, hi] ⊂ [p0, 0]`: a dense grid plus
    /// the breakpoints, refined by golden-section search.
    pub fn primitive_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut pts: Vec<f64> = (0..=GAMMA_MAX_GRID)
            .map(|i| lo + (hi - lo) * i as f64 / GAMMA_MAX_GRID as f64)
            .collect();
        pts.extend(self.breakpoints().into_iter().filter(|&b| b > lo && b < hi));
        pts.sort_by(f64::total_cmp);
        let vals: Vec<f64> = pts.iter().map(|&p| self.primitive(p)).collect();
        let refine = |sign: f64| {
            let (i, _) = vals
                .iter()
                .enumerate()
                .max_by(|a, b| (sign * a.1).total_cmp(&(sign * b.1)))
                .unwrap();
            let a = pts[i.saturating_sub(1)];
            let b = pts[(i + 1).min(pts.len() - 1)];
            let (_, best) = quad::golden_max(|p| sign * self.primitive(p), a, b, 1e-14 * (hi - lo).abs().max(1e-300));
            sign * best.max(sign * vals[i])
        };
        (refine(-1.0), refine(1.0))
    }

    /// (∫ |γ|^r)^(1/r) over `(p0, 0)`.
    pub fn lr_norm(&self, r: f64) -> Result<f64> {
        if !(r > 1.0) {
            return Err(Error::ParameterError(format!("r must exceed 1, got {r}")));
        }
        let f = |p: f64| self.gamma(p).map(|g| g.abs().powf(r)).unwrap_or(0.0);
        if self.is_singular() {
            // Truncated integrals over (p0, -eps) must settle as eps -> 0.
            let mut prev = 0.0;
            let mut increments = Vec::new();
            for j in 1..=4 {
                let eps = self.p0.abs() * 10f64.powi(-4 * j);
                let t = self.integrate(f, self.p0, -eps)?;
                increments.push(t - prev);
                prev = t;
            }
            let n = increments.len();
            if increments[n - 1] >= 0.9 * increments[n - 2] {
                return Err(Error::DivergentNorm { r });
            }
        }
        Ok(self.integrate(f, self.p0, 0.0)?.powf(1.0 / r))
    }
}

fn table(x: Vec<f64>, y0: Vec<f64>, slope: Vec<f64>) -> Kind {
    // Γ(x[i]) = -∫_{x[i]}^0 γ, accumulated from the top cell downwards.
    let cells = y0.len();
    let mut cum = vec![0.0; cells + 1];
    for i in (0..cells).rev() {
        let h = x[i + 1] - x[i];
        cum[i] = cum[i + 1] - (y0[i] * h + 0.5 * slope[i] * h * h);
    }
    cum.truncate(cells);
    Kind::Table { x, y0, slope, cum }
}

fn cell(x: &[f64], p: f64) -> usize {
    x.partition_point(|&xi| xi <= p).clamp(1, x.len() - 1) - 1
}

fn tab_eval(nodes: &[f64], values: &[f64], order: u8, p: f64) -> f64 {
    let n = nodes.len();
    let j = nodes.partition_point(|&x| x <= p).clamp(1, n - 1);
    match order {
        0 => {
            if p >= nodes[n - 1] {
                values[n - 1]
            } else {
                values[j - 1]
            }
        }
        _ => values[j - 1] + (values[j] - values[j - 1]) / (nodes[j] - nodes[j - 1]) * (p - nodes[j - 1]),
    }
}

/// γ(p); see [`VorticityModel::gamma`].
pub fn gamma_eval(model: &VorticityModel, p: f64) -> Result<f64> {
    model.gamma(p)
}

/// Γ(p) with `Γ(0) = 0`.
pub fn gamma_primitive(model: &VorticityModel, p: f64) -> Result<f64> {
    model.check_domain(p)?;
    Ok(model.primitive(p))
}

/// Γ_M = max over `[p0, 0]` of Γ.
pub fn gamma_max_primitive(model: &VorticityModel) -> f64 {
    model.gamma_max()
}

/// L_r norm of γ over `(p0, 0)`.
pub fn gamma_lr_norm(model: &VorticityModel, r: f64) -> Result<f64> {
    model.lr_norm(r)
}
