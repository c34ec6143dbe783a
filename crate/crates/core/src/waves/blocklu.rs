//! Block elimination for the wave Jacobian.
//!
//! Block rows `r = 0..R` couple `X_{r-1}, X_r, X_{r+1}`, except the last
//! row, which additionally couples `X_{R-3}` (the one-sided surface
//! stencil).

use nalgebra::{DMatrix, LU, Dyn};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub lower: Vec<DMatrix<f64>>,
    pub diag: Vec<DMatrix<f64>>,
    pub upper: Vec<DMatrix<f64>>,
    /// Last-row block in column `R - 3`.
    pub extra: DMatrix<f64>,
}

impl BlockSystem {
    pub fn zeros(rows: usize, m: usize) -> Self {
        let z = DMatrix::zeros(m, m);
        BlockSystem {
            lower: vec![z.clone(); rows],
            diag: vec![z.clone(); rows],
            upper: vec![z.clone(); rows],
            extra: z,
        }
    }

    pub fn rows(&self) -> usize {
        self.diag.len()
    }

    pub fn block_size(&self) -> usize {
        self.diag[0].nrows()
    }

    /// Dense copy, for tests.
    #[cfg(test)]
    pub fn to_dense(&self) -> DMatrix<f64> {
        let (r, m) = (self.rows(), self.block_size());
        let mut a = DMatrix::zeros(r * m, r * m);
        for i in 0..r {
            a.view_mut((i * m, i * m), (m, m)).copy_from(&self.diag[i]);
            if i > 0 {
                a.view_mut((i * m, (i - 1) * m), (m, m)).copy_from(&self.lower[i]);
            }
            if i + 1 < r {
                a.view_mut((i * m, (i + 1) * m), (m, m)).copy_from(&self.upper[i]);
            }
        }
        a.view_mut(((r - 1) * m, (r - 3) * m), (m, m)).copy_from(&self.extra);
        a
    }

    /// y = A x.
    #[cfg(test)]
    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let (r, m) = (self.rows(), self.block_size());
        let blk = |i: usize| x.rows(i * m, m).into_owned();
        let mut y = DMatrix::zeros(r * m, x.ncols());
        for i in 0..r {
            let mut yi = &self.diag[i] * blk(i);
            if i > 0 {
                yi += &self.lower[i] * blk(i - 1);
            }
            if i + 1 < r {
                yi += &self.upper[i] * blk(i + 1);
            }
            if i == r - 1 {
                yi += &self.extra * blk(r - 3);
            }
            y.rows_mut(i * m, m).copy_from(&yi);
        }
        y
    }

    /// Solve A X = B for all columns of B.
    pub fn solve(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let (r, m) = (self.rows(), self.block_size());
        assert!(r >= 3 && b.nrows() == r * m);
        let singular = || Error::NonFinite("singular block in wave Jacobian".into());
        let solve_with = |lu: &LU<f64, Dyn, Dyn>, rhs: &DMatrix<f64>| lu.solve(rhs).ok_or_else(singular);
        // Forward sweep: X_i = Y_i - G_i X_{i+1} for i < r - 1.
        let mut g: Vec<DMatrix<f64>> = Vec::with_capacity(r);
        let mut y: Vec<DMatrix<f64>> = Vec::with_capacity(r);
        for i in 0..r - 1 {
            let mut d = self.diag[i].clone();
            let mut rhs = b.rows(i * m, m).into_owned();
            if i > 0 {
                d -= &self.lower[i] * &g[i - 1];
                rhs -= &self.lower[i] * &y[i - 1];
            }
            let lu = d.lu();
            g.push(solve_with(&lu, &self.upper[i])?);
            y.push(solve_with(&lu, &rhs)?);
        }
        // Last row: eliminate X_{r-3}, then X_{r-2}.
        let last = r - 1;
        let mut rhs = b.rows(last * m, m).into_owned() - &self.extra * &y[r - 3];
        let l2 = &self.lower[last] - &self.extra * &g[r - 3];
        rhs -= &l2 * &y[r - 2];
        let d = &self.diag[last] - &l2 * &g[r - 2];
        let xl = solve_with(&d.lu(), &rhs)?;
        let mut x = DMatrix::zeros(r * m, b.ncols());
        x.rows_mut(last * m, m).copy_from(&xl);
        let mut next = xl;
        for i in (0..r - 1).rev() {
            let xi = &y[i] - &g[i] * &next;
            x.rows_mut(i * m, m).copy_from(&xi);
            next = xi;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("wave Jacobian solve".into()));
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn matches_dense_solve() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let (r, m) = (6, 3);
        let mut sys = BlockSystem::zeros(r, m);
        let mut rand_block = |scale: f64| DMatrix::from_fn(m, m, |_, _| scale * rng.gen_range(-1.0..1.0));
        for i in 0..r {
            sys.diag[i] = rand_block(1.0) + DMatrix::identity(m, m) * 6.0;
            sys.lower[i] = rand_block(1.0);
            sys.upper[i] = rand_block(1.0);
        }
        sys.extra = rand_block(1.0);
        let b = DMatrix::from_fn(r * m, 2, |i, j| (i + 3 * j) as f64 * 0.1 - 0.4);
        let x = sys.solve(&b).unwrap();
        let dense = sys.to_dense().lu().solve(&b).unwrap();
        assert!((x - &dense).amax() < 1e-12);
        assert!((sys.apply(&dense) - b).amax() < 1e-12);
    }
}
