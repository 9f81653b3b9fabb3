//! Composite Simpson rule on uniform grids over `[0, 1]`.

/// Composite Simpson weights for `n` equally spaced nodes on `[0, 1]`
/// (`n` odd, at least 3): `h/3 · [1, 4, 2, 4, …, 2, 4, 1]`.
pub fn simpson_weights(n: usize) -> Vec<f64> {
    debug_assert!(n >= 3 && n % 2 == 1, "simpson needs an odd node count >= 3");
    let h3 = 1.0 / (3.0 * (n - 1) as f64);
    (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                h3
            } else if i % 2 == 1 {
                4.0 * h3
            } else {
                2.0 * h3
            }
        })
        .collect()
}

/// `∫₀¹ f` from samples at uniform nodes.
pub fn simpson(samples: &[f64]) -> f64 {
    simpson_weights(samples.len())
        .iter()
        .zip(samples)
        .map(|(w, f)| w * f)
        .sum()
}
