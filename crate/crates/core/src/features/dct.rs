//! Orthonormal DCT-II and its inverse.

use crate::scalar::{real, Real};

/// Orthonormal DCT-II of `x`, returning the first `n_out` coefficients.
///
/// `y[k] = s_k * sum_n x[n] * cos(pi * k * (2n + 1) / (2N))` with
/// `s_0 = sqrt(1/N)` and `s_k = sqrt(2/N)` otherwise, so the transform is
/// orthonormal and invertible by [`dct3`].
pub fn dct2<R: Real>(x: &[R], n_out: usize) -> Vec<R> {
    let n = x.len();
    assert!(n > 0 && n_out <= n);
    let scale0 = real::<R>((1.0 / n as f64).sqrt());
    let scale = real::<R>((2.0 / n as f64).sqrt());
    (0..n_out)
        .map(|k| {
            let mut acc = R::zero();
            for (i, &v) in x.iter().enumerate() {
                let ang = std::f64::consts::PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n as f64);
                acc = acc + v * real::<R>(ang.cos());
            }
            if k == 0 {
                acc * scale0
            } else {
                acc * scale
            }
        })
        .collect()
}

/// Inverse of [`dct2`] when given all `N` coefficients.
pub fn dct3<R: Real>(y: &[R]) -> Vec<R> {
    let n = y.len();
    assert!(n > 0);
    let scale0 = real::<R>((1.0 / n as f64).sqrt());
    let scale = real::<R>((2.0 / n as f64).sqrt());
    (0..n)
        .map(|i| {
            let mut acc = y[0] * scale0;
            for (k, &v) in y.iter().enumerate().skip(1) {
                let ang = std::f64::consts::PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n as f64);
                acc = acc + v * scale * real::<R>(ang.cos());
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_input_loads_only_coefficient_zero() {
        let x = vec![2.5f64; 40];
        let y = dct2(&x, 40);
        assert!((y[0] - 40f64.sqrt() * 2.5).abs() < 1e-12);
        for &c in &y[1..] {
            assert!(c.abs() < 1e-12);
        }
    }

    #[test]
    fn dct2_dct3_roundtrip_within_1e9() {
        let x: Vec<f64> = (0..40).map(|i| ((i * 31 + 7) % 17) as f64 / 17.0 - 0.5).collect();
        let y = dct2(&x, 40);
        let back = dct3(&y);
        for (a, b) in x.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn transform_is_orthonormal() {
        // Energy is preserved under an orthonormal transform.
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let y = dct2(&x, 40);
        let ex: f64 = x.iter().map(|v| v * v).sum();
        let ey: f64 = y.iter().map(|v| v * v).sum();
        assert!((ex - ey).abs() < 1e-10);
    }
}
