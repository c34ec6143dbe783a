//! Quadrature building blocks: adaptive Gauss–Kronrod, tanh–sinh for
//! endpoint singularities, Gauss–Legendre rules, and golden-section search.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Absolute/relative tolerance pair. A quadrature is accepted once its error
/// estimate drops below `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-12, rel: 1e-10 }
    }
}

impl Tolerance {
    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

// G7K15 abscissae, inner to outer; Gauss nodes sit at even positions.
const XGK: [f64; 8] = [
    0.0,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.991_455_371_120_812_639_206_854_697_526_329,
];
const WGK: [f64; 8] = [
    0.209_482_141_084_727_828_012_999_174_891_714,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.022_935_322_010_529_224_963_732_008_058_970,
];
const WG: [f64; 4] = [
    0.417_959_183_673_469_387_755_102_040_816_327,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.129_484_966_168_869_693_270_611_432_679_082,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[0] * fc;
    let mut g = WG[0] * fc;
    for i in 1..8 {
        let s = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        k += WGK[i] * s;
        if i % 2 == 0 {
            g += WG[i / 2] * s;
        }
    }
    Estimate {
        value: h * k,
        error: (h * (k - g)).abs(),
    }
}

const MAX_INTERVALS: usize = 4000;

/// Globally adaptive G7K15 quadrature of `f` over `[a, b]`.
///
/// The interval with the largest local error is bisected until the summed
/// error estimate meets `tol`.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let mut parts = vec![(a, b, gk15(&f, a, b))];
    loop {
        let value: f64 = parts.iter().map(|p| p.2.value).sum();
        let error: f64 = parts.iter().map(|p| p.2.error).sum();
        if !value.is_finite() {
            return Err(Error::NonFinite("quadrature".into()));
        }
        if error <= tol.target(value) {
            return Ok(Estimate { value, error });
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.error.total_cmp(&y.1 .2.error))
            .unwrap();
        let (lo, hi, _) = parts[idx];
        let mid = 0.5 * (lo + hi);
        // Nothing left to split: accept if the remaining error is at rounding level.
        if parts.len() >= MAX_INTERVALS || mid <= lo || mid >= hi {
            if error <= 1e3 * f64::EPSILON * value.abs().max(tol.abs) {
                return Ok(Estimate { value, error });
            }
            return Err(Error::QuadratureFailure { a, b, estimate: error });
        }
        parts[idx] = (lo, mid, gk15(&f, lo, mid));
        parts.push((mid, hi, gk15(&f, mid, hi)));
    }
}

/// Tanh–sinh quadrature over `[a, b]`, robust to integrable singularities
/// and cusps at either endpoint.
///
/// Abscissae near an endpoint are formed from the complement `1 - x`, so an
/// endpoint at `0.0` is approached without cancellation.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let half = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    let pi2 = std::f64::consts::FRAC_PI_2;
    // Sum of weight*f over nodes t = j*h for the given h, restricted to the
    // indices selected by `odd_only`.
    let sweep = |h: f64, odd_only: bool| -> f64 {
        let mut s = 0.0;
        let mut j: usize = 1;
        loop {
            if odd_only && j % 2 == 0 {
                j += 1;
                continue;
            }
            let t = j as f64 * h;
            let u = pi2 * t.sinh();
            let ch = u.cosh();
            // 1 - tanh(u) = exp(-u)/cosh(u)
            let comp = (-u).exp() / ch;
            let w = pi2 * t.cosh() / (ch * ch);
            if comp < 1e-300 || w * half.abs() < 1e-300 {
                break;
            }
            let xl = a + half * comp;
            let xr = b - half * comp;
            let fl = if xl > a && xl < b { f(xl) } else { 0.0 };
            let fr = if xr > a && xr < b { f(xr) } else { 0.0 };
            s += w * (fl + fr);
            j += 1;
            if j > 10_000 {
                break;
            }
        }
        s
    };
    let mut h = 1.0;
    let mut sum = pi2 * f(c) + sweep(h, false);
    let mut value = half * h * sum;
    for _ in 0..12 {
        h *= 0.5;
        sum += sweep(h, true);
        let next = half * h * sum;
        let err = (next - value).abs();
        value = next;
        if !value.is_finite() {
            return Err(Error::NonFinite("tanh-sinh quadrature".into()));
        }
        if err <= tol.target(value) {
            return Ok(Estimate { value, error: err });
        }
    }
    Err(Error::QuadratureFailure { a, b, estimate: f64::NAN })
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Cumulative integration matrix on Gauss–Legendre nodes: for a polynomial
/// `f` of degree < n sampled at `nodes`, `(S f)_i = ∫_{-1}^{x_i} f`.
pub fn cumulative_matrix(nodes: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let mut v = DMatrix::zeros(n, n);
    let mut vint = DMatrix::zeros(n, n);
    for (i, &x) in nodes.iter().enumerate() {
        let mut p = vec![0.0; n + 1];
        p[0] = 1.0;
        if n > 0 {
            p[1] = x;
        }
        for k in 2..=n {
            let kf = k as f64;
            p[k] = ((2.0 * kf - 1.0) * x * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
        }
        for k in 0..n {
            v[(i, k)] = p[k];
            vint[(i, k)] = if k == 0 {
                x + 1.0
            } else {
                (p[k + 1] - p[k - 1]) / (2.0 * k as f64 + 1.0)
            };
        }
    }
    let vinv = v.try_inverse().expect("Legendre Vandermonde matrix is nonsingular");
    vint * vinv
}

/// Maximize a unimodal `f` on `[a, b]` by golden-section search.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > xtol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    let best = [(a, f(a)), (b, f(b)), (x1, f1), (x2, f2)]
        .into_iter()
        .max_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap();
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_polynomial_and_transcendental() {
        let t = Tolerance::default();
        let r = gauss_kronrod(|x| x * x, 0.0, 1.0, t).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-15);
        let r = gauss_kronrod(f64::sin, 0.0, std::f64::consts::PI, t).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        // ∫_{-1}^0 (-x)^{-1/2.8} dx = 1 / (1 - 1/2.8)
        let e = 1.0 / 2.8;
        let r = tanh_sinh(|x: f64| (-x).powf(-e), -1.0, 0.0, Tolerance::default()).unwrap();
        assert!((r.value - 1.0 / (1.0 - e)).abs() < 1e-11, "{}", r.value);
        // ∫_0^1 ln x dx = -1
        let r = tanh_sinh(f64::ln, 0.0, 1.0, Tolerance::default()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-11);
    }

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((s - 2.0 / 23.0).abs() < 1e-14);
    }

    #[test]
    fn cumulative_matrix_integrates_polynomials() {
        let (x, _) = gauss_legendre(10);
        let s = cumulative_matrix(&x);
        for i in 0..10 {
            let row: f64 = (0..10).map(|j| s[(i, j)] * 3.0 * x[j] * x[j]).sum();
            assert!((row - (x[i].powi(3) + 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn golden_section_finds_interior_max() {
        let (x, fx) = golden_max(|x| -(x - 0.3) * (x - 0.3), -1.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!(fx.abs() < 1e-12);
    }
}
