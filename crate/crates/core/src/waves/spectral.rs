//! Cosine/sine collocation in q for functions of period 2π/n.
//!
//! Even functions are stored by their values at the half-period nodes
//! `q_i = (i + 1/2)π/(nM)`, `i = 0..M`, and expanded in `cos(k n q)`,
//! `k = 0..M`. Odd functions use `sin(k n q)`, `k = 1..=M`. On these nodes
//! both transforms are exactly invertible (DCT-II / DST-II pairs).

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct QBasis {
    pub n: u32,
    pub m: usize,
    pub q: Vec<f64>,
    /// Nodal values from cosine coefficients.
    pub cos: DMatrix<f64>,
    /// Cosine coefficients from nodal values.
    pub cos_inv: DMatrix<f64>,
    /// d/dq of an even function, returning odd nodal values.
    pub dq_even: DMatrix<f64>,
    /// d/dq of an odd function, returning even nodal values.
    pub dq_odd: DMatrix<f64>,
    /// d²/dq² of an even function.
    pub dqq_even: DMatrix<f64>,
    /// (1 − ∂_q²)⁻¹ on even functions: cosine mode k divided by 1 + (kn)².
    pub hinv: DMatrix<f64>,
}

impl QBasis {
    pub fn new(n: u32, m: usize) -> Self {
        assert!(n >= 1 && m >= 2);
        let nf = n as f64;
        let q: Vec<f64> = (0..m)
            .map(|i| (i as f64 + 0.5) * std::f64::consts::PI / (nf * m as f64))
            .collect();
        let cos = DMatrix::from_fn(m, m, |i, k| (k as f64 * nf * q[i]).cos());
        let sin = DMatrix::from_fn(m, m, |i, k| ((k + 1) as f64 * nf * q[i]).sin());
        let mf = m as f64;
        let cos_inv = DMatrix::from_fn(m, m, |k, i| {
            let c = if k == 0 { 1.0 / mf } else { 2.0 / mf };
            c * cos[(i, k)]
        });
        let sin_inv = DMatrix::from_fn(m, m, |k, i| {
            let c = if k == m - 1 { 1.0 / mf } else { 2.0 / mf };
            c * sin[(i, k)]
        });
        // cos(knq)' = −kn sin(knq): cosine index k feeds sine index k − 1.
        let mut p_even = DMatrix::zeros(m, m);
        for k in 1..m {
            p_even[(k - 1, k)] = -(k as f64) * nf;
        }
        // sin(knq)' = kn cos(knq); the top sine mode k = M has cos(Mnq_i) = 0.
        let mut p_odd = DMatrix::zeros(m, m);
        for k in 1..m {
            p_odd[(k, k - 1)] = k as f64 * nf;
        }
        let dq_even = &sin * p_even * &cos_inv;
        let dq_odd = &cos * p_odd * &sin_inv;
        let kk = DVector::from_fn(m, |k, _| (k as f64 * nf).powi(2));
        let dqq_even = &cos * DMatrix::from_diagonal(&kk.map(|x| -x)) * &cos_inv;
        let hinv = &cos * DMatrix::from_diagonal(&kk.map(|x| 1.0 / (1.0 + x))) * &cos_inv;
        QBasis {
            n,
            m,
            q,
            cos,
            cos_inv,
            dq_even,
            dq_odd,
            dqq_even,
            hinv,
        }
    }

    /// Wavenumber of cosine mode `k`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        k as f64 * self.n as f64
    }

    /// Evaluate an even function given by cosine coefficients at any q.
    pub fn eval_cos(coeffs: &[f64], n: u32, q: f64) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * (k as f64 * n as f64 * q).cos())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transforms_invert() {
        let b = QBasis::new(2, 8);
        let id = &b.cos * &b.cos_inv;
        assert!((id - DMatrix::identity(8, 8)).amax() < 1e-13);
    }

    #[test]
    fn derivatives_of_trigonometric_functions() {
        let b = QBasis::new(3, 16);
        let f = DVector::from_iterator(16, b.q.iter().map(|q| (6.0 * q).cos() + 0.5));
        let df = &b.dq_even * &f;
        let ddf = &b.dq_odd * &df;
        for (i, q) in b.q.iter().enumerate() {
            assert!((df[i] + 6.0 * (6.0 * q).sin()).abs() < 1e-12);
            assert!((ddf[i] + 36.0 * (6.0 * q).cos()).abs() < 1e-11);
        }
        let h = &b.hinv * &f;
        assert!((h[0] - ((6.0 * b.q[0]).cos() / 37.0 + 0.5)).abs() < 1e-14);
    }
}
