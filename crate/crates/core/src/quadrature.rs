//! Gauss–Legendre quadrature, used by the model computations (cusp tail
//! integrals, bump-profile norms, hyperbolic ball averages).
//!
//! Nodes are the roots of the Legendre polynomial P_n, found by Newton
//! iteration from the Chebyshev-angle initial guess; weights are
//! w_i = 2/((1−x_i²)·P_n'(x_i)²). An n-point rule integrates polynomials of
//! degree 2n−1 exactly and converges geometrically for analytic integrands,
//! which all of ours are.

/// Nodes and weights of the n-point rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut full = vec![(0.0, 0.0); n];
    for i in 0..n.div_ceil(2) {
        // Tricomi-style initial guess: roots interlace Chebyshev points.
        // i = 0 gives the root nearest +1; for odd n the last i lands on 0.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' by the three-term recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        full[n - 1 - i] = (x, w);
        full[i] = (-x, w);
    }
    full
}

/// The n-point rule mapped to [a, b].
pub fn on_interval(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    gauss_legendre(n)
        .into_iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// ∫_a^b f with the n-point rule.
pub fn integrate<F: FnMut(f64) -> f64>(n: usize, a: f64, b: f64, mut f: F) -> f64 {
    on_interval(n, a, b).iter().map(|&(x, w)| w * f(x)).sum()
}
