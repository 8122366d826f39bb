//! Multi-axis FFT helpers over row-major complex arrays.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::scalar::Real;

pub(crate) type C<T> = Complex<T>;

/// Unnormalized in-place transform along one axis of a `shape` array.
pub(crate) fn fft_axis<T: Real>(data: &mut [C<T>], shape: [usize; 3], axis: usize, inverse: bool) {
    let n = shape[axis];
    if n <= 1 {
        return;
    }
    let mut planner = FftPlanner::<T>::new();
    let plan = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    if axis == 2 {
        plan.process(data);
        return;
    }
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut line = vec![C::new(T::zero(), T::zero()); n];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * n * stride + s;
            for (k, l) in line.iter_mut().enumerate() {
                *l = data[base + k * stride];
            }
            plan.process(&mut line);
            for (k, l) in line.iter().enumerate() {
                data[base + k * stride] = *l;
            }
        }
    }
}

/// Unnormalized transform over the first `dims` axes.
pub(crate) fn fft_nd<T: Real>(data: &mut [C<T>], shape: [usize; 3], dims: usize, inverse: bool) {
    // Axes beyond `dims` have extent 1 except the contiguous one, so map
    // logical axes onto storage axes.
    for axis in storage_axes(shape, dims) {
        fft_axis(data, shape, axis, inverse);
    }
}

fn storage_axes(shape: [usize; 3], dims: usize) -> Vec<usize> {
    (0..dims).filter(|&a| shape[a] > 1).collect()
}

/// Signed frequency of DFT index `k` on `n` points.
#[inline]
pub(crate) fn freq(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

pub(crate) fn to_complex<T: Real>(v: &[T]) -> Vec<C<T>> {
    v.iter().map(|&x| C::new(x, T::zero())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_2d() {
        let shape = [8, 6, 1];
        let orig: Vec<C<f64>> = (0..48).map(|k| C::new((k as f64).sin(), 0.0)).collect();
        let mut d = orig.clone();
        fft_nd(&mut d, shape, 2, false);
        fft_nd(&mut d, shape, 2, true);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a.re / 48.0 - b.re).abs() < 1e-12);
        }
    }
}
