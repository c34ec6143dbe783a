//! Grids on `[p0, 0]` and finite-difference weights.

/// Chebyshev–Gauss–Lobatto nodes mapped to `[p0, 0]`, ascending, with the
/// endpoints exactly `p0` and `0`.
pub fn chebyshev_grid(p0: f64, k: usize) -> Vec<f64> {
    assert!(k >= 2);
    let len = -p0;
    let mut g: Vec<f64> = (0..k)
        .map(|j| {
            let c = (std::f64::consts::PI * j as f64 / (k - 1) as f64).cos();
            p0 + len * 0.5 * (1.0 - c)
        })
        .collect();
    g[0] = p0;
    g[k - 1] = 0.0;
    // Measure the last nodes from the top end so they stay accurate near 0.
    for (j, gj) in g.iter_mut().enumerate().skip(k / 2) {
        let i = k - 1 - j;
        let c = (std::f64::consts::PI * i as f64 / (k - 1) as f64).cos();
        *gj = -len * 0.5 * (1.0 - c);
    }
    g
}

/// Uniform grid with `k` nodes on `[p0, 0]`.
pub fn uniform_grid(p0: f64, k: usize) -> Vec<f64> {
    assert!(k >= 2);
    let mut g: Vec<f64> = (0..k).map(|j| p0 + (-p0) * j as f64 / (k - 1) as f64).collect();
    g[k - 1] = 0.0;
    g
}

/// Composite trapezoid weights for a (possibly nonuniform) ascending grid.
pub fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// Fornberg's algorithm: weights of the `m`-th derivative at `z` using
/// the given nodes.
pub fn fd_weights(z: f64, nodes: &[f64], m: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// First derivative of nodal data by `width`-point finite differences:
/// centered stencils in the interior, one-sided near the ends.
pub fn differentiate(x: &[f64], f: &[f64], width: usize) -> Vec<f64> {
    let n = x.len();
    assert!(n >= width && width >= 2);
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(n - width);
            let w = fd_weights(x[i], &x[start..start + width], 1);
            w.iter().zip(&f[start..start + width]).map(|(a, b)| a * b).sum()
        })
        .collect()
}

/// Clenshaw–Curtis weights for the `k` Chebyshev nodes of [`chebyshev_grid`].
pub fn clenshaw_curtis_weights(p0: f64, k: usize) -> Vec<f64> {
    assert!(k >= 2);
    let n = k - 1;
    let nf = n as f64;
    (0..k)
        .map(|j| {
            let theta = std::f64::consts::PI * j as f64 / nf;
            let mut s = 1.0;
            for m in 1..=n / 2 {
                let b = if 2 * m == n { 1.0 } else { 2.0 };
                s -= b * (2.0 * m as f64 * theta).cos() / (4.0 * (m * m) as f64 - 1.0);
            }
            let c = if j == 0 || j == n { 1.0 } else { 2.0 };
            c * s / nf * (-p0) * 0.5
        })
        .collect()
}

/// Fourier differentiation matrix on `n` (even) equispaced nodes
/// `x_l = l·period/n`.
pub fn periodic_diff_matrix(n: usize, period: f64) -> Vec<Vec<f64>> {
    assert!(n >= 2 && n % 2 == 0);
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let scale = 2.0 * std::f64::consts::PI / period;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        let d = i as f64 - j as f64;
                        let sign = if (i + n - j) % 2 == 0 { 1.0 } else { -1.0 };
                        scale * 0.5 * sign / (0.5 * d * h).tan()
                    }
                })
                .collect()
        })
        .collect()
}
