//! Gauss-Legendre rules.

/// Nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    x.iter()
        .zip(&w)
        .map(|(xi, wi)| (mid + half * xi, half * wi))
        .collect()
}

/// Tensor-product rule over `[a1, b1] x [a2, b2]`.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    (a1, b1): (f64, f64),
    (a2, b2): (f64, f64),
    order: usize,
) -> f64 {
    let u = gauss_legendre_on(order, a1, b1);
    let v = gauss_legendre_on(order, a2, b2);
    u.iter()
        .map(|&(x, wx)| wx * v.iter().map(|&(y, wy)| wy * f(x, y)).sum::<f64>())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_small_rules() {
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(3);
        assert!(x[1].abs() < 1e-15 && (w[1] - 8.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_integrals() {
        let v = integrate_2d(|x, y| (2.0 * x).exp() * y.sin(), (0.0, 1.0), (0.0, 2.0), 32);
        let exact = ((2f64).exp() - 1.0) / 2.0 * (1.0 - 2f64.cos());
        assert!((v - exact).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn exact_for_polynomials(n in 1usize..40, k in 0u32..8) {
            let deg = (2 * n as u32 - 1).min(k);
            let q: f64 = gauss_legendre_on(n, 0.0, 1.0).iter().map(|(x, w)| w * x.powi(deg as i32)).sum();
            prop_assert!((q - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13);
        }

        #[test]
        fn weights_sum_to_two(n in 1usize..64) {
            let (_, w) = gauss_legendre(n);
            prop_assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        }
    }
}
