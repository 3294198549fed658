//! Small dense-vector helpers shared across the crate.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `a + s * b`, freshly allocated.
pub(crate) fn add_scaled(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// Specular reflection of `v` against the hyperplane orthogonal to `axis`:
/// `v - 2 <v, axis> / <axis, axis> * axis`.
pub(crate) fn reflect(v: &[f64], axis: &[f64]) -> Vec<f64> {
    let scale = 2.0 * dot(v, axis) / dot(axis, axis);
    add_scaled(v, -scale, axis)
}

/// Maximum absolute componentwise difference.
pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
