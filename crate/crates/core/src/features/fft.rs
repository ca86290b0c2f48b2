//! Iterative radix-2 FFT, enough for power-of-two analysis frames.

use crate::scalar::{real, Real};

/// In-place Cooley-Tukey FFT over separate real/imaginary buffers.
///
/// Both slices must have the same power-of-two length.
pub fn fft_in_place<R: Real>(re: &mut [R], im: &mut [R]) {
    let n = re.len();
    assert_eq!(n, im.len(), "re/im length mismatch");
    assert!(n.is_power_of_two(), "FFT length must be a power of two");
    if n <= 1 {
        return;
    }

    // Bit-reversal permutation.
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }

    let mut len = 2;
    while len <= n {
        let ang = -std::f64::consts::TAU / len as f64;
        let (w_re, w_im) = (real::<R>(ang.cos()), real::<R>(ang.sin()));
        for start in (0..n).step_by(len) {
            let mut cur_re = R::one();
            let mut cur_im = R::zero();
            for k in 0..len / 2 {
                let a = start + k;
                let b = a + len / 2;
                let t_re = re[b] * cur_re - im[b] * cur_im;
                let t_im = re[b] * cur_im + im[b] * cur_re;
                re[b] = re[a] - t_re;
                im[b] = im[a] - t_im;
                re[a] = re[a] + t_re;
                im[a] = im[a] + t_im;
                let next_re = cur_re * w_re - cur_im * w_im;
                cur_im = cur_re * w_im + cur_im * w_re;
                cur_re = next_re;
            }
        }
        len <<= 1;
    }
}

/// Magnitude-squared spectrum of a real frame: `len/2 + 1` bins.
pub fn power_spectrum<R: Real>(frame: &[R]) -> Vec<R> {
    let n = frame.len();
    let mut re = frame.to_vec();
    let mut im = vec![R::zero(); n];
    fft_in_place(&mut re, &mut im);
    (0..=n / 2).map(|k| re[k] * re[k] + im[k] * im[k]).collect()
}
