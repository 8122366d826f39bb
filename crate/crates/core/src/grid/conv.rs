//! Group convolution `(f∗k)(x) = Σ_y f(y)·k(y⁻¹·x)·Πh_i`.
//!
//! [`convolve_direct`] is the exact lattice sum and serves as the reference.
//! [`ConvolutionPlan`] precomputes a kernel transform: an FFT product in the
//! Euclidean case and, on periodic H¹ grids, an FFT along the abelian x₃
//! axis combined with a twisted sum over horizontal offsets.

use rayon::prelude::*;

use crate::error::Result;
use crate::fft::{fft_axis, fft_nd, to_complex, C};
use crate::scalar::Real;

use super::{Boundary, Grid, ScalarField};

/// Reference convolution by exhaustive lattice summation.
pub fn convolve_direct<T: Real>(f: &ScalarField<T>, k: &ScalarField<T>) -> Result<ScalarField<T>> {
    f.grid.check_same(&k.grid)?;
    let g = &f.grid;
    let vol = g.cell_volume();
    let ys: Vec<(crate::grid::Lattice, T)> =
        (0..g.len()).filter(|&j| f.values[j] != T::zero()).map(|j| (g.lattice(j), f.values[j])).collect();
    let values: Vec<T> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let x = g.lattice(i);
            let mut s = T::zero();
            for (y, fy) in &ys {
                if let Some(idx) = g.index_of(&g.relative(&x, y)) {
                    s += *fy * k.values[idx];
                }
            }
            s * vol
        })
        .collect();
    Ok(f.with_values(values))
}

/// Convolution with the fastest available method for the grid.
pub fn convolve<T: Real>(f: &ScalarField<T>, k: &ScalarField<T>) -> Result<ScalarField<T>> {
    f.grid.check_same(&k.grid)?;
    ConvolutionPlan::new(k).apply(f)
}

enum Method<T> {
    /// Circular FFT product over `shape` (padded when the box is zero-padded).
    Spectral { shape: [usize; 3], kernel_hat: Vec<C<T>> },
    /// Periodic H¹: x₃-transformed kernel columns plus the horizontal support.
    Twisted { kernel_hat: Vec<C<T>>, support: Vec<(usize, usize)>, phase: Vec<C<T>> },
    Direct { kernel: ScalarField<T> },
}

/// A kernel prepared for repeated right-convolution `f ↦ f∗k`.
pub struct ConvolutionPlan<T> {
    grid: Grid<T>,
    method: Method<T>,
}

impl<T: Real> ConvolutionPlan<T> {
    pub fn new(k: &ScalarField<T>) -> Self {
        let g = &k.grid;
        let method = if g.group().is_heisenberg() {
            if g.is_periodic() {
                twisted(k)
            } else {
                Method::Direct { kernel: k.clone() }
            }
        } else {
            spectral(k)
        };
        Self { grid: g.clone(), method }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn apply(&self, f: &ScalarField<T>) -> Result<ScalarField<T>> {
        self.grid.check_same(&f.grid)?;
        let vol = self.grid.cell_volume();
        match &self.method {
            Method::Direct { kernel } => convolve_direct(f, kernel),
            Method::Spectral { shape, kernel_hat } => {
                let g = &self.grid;
                let total: usize = shape.iter().product();
                let mut data = vec![C::new(T::zero(), T::zero()); total];
                let index = |i: [usize; 3]| (i[0] * shape[1] + i[1]) * shape[2] + i[2];
                for k in 0..g.len() {
                    data[index(g.unflat(k))] = C::new(f.values[k], T::zero());
                }
                fft_nd(&mut data, *shape, 3, false);
                for (d, kh) in data.iter_mut().zip(kernel_hat) {
                    *d = *d * *kh;
                }
                fft_nd(&mut data, *shape, 3, true);
                let norm = vol / T::count(total);
                let values = (0..g.len()).map(|k| data[index(g.unflat(k))].re * norm).collect();
                Ok(f.with_values(values))
            }
            Method::Twisted { kernel_hat, support, phase } => Ok(f.with_values(twisted_apply(
                &self.grid, &f.values, kernel_hat, support, phase,
            ))),
        }
    }
}

fn spectral<T: Real>(k: &ScalarField<T>) -> Method<T> {
    let g = &k.grid;
    let c = g.counts();
    let padded = g.boundary() == Boundary::ZeroPadded;
    let mut shape = c;
    if padded {
        for (a, s) in shape.iter_mut().enumerate().take(g.dims()) {
            *s = 2 * c[a];
        }
    }
    let total: usize = shape.iter().product();
    let mut data = vec![C::new(T::zero(), T::zero()); total];
    for idx in 0..g.len() {
        let l = g.lattice(idx);
        let mut t = [0usize; 3];
        for a in 0..3 {
            t[a] = l[a].rem_euclid(shape[a] as i64) as usize;
        }
        data[(t[0] * shape[1] + t[1]) * shape[2] + t[2]] = C::new(k.values[idx], T::zero());
    }
    fft_nd(&mut data, shape, 3, false);
    Method::Spectral { shape, kernel_hat: data }
}

fn twisted<T: Real>(k: &ScalarField<T>) -> Method<T> {
    let g = &k.grid;
    let [m0, m1, m2] = g.counts();
    // Roll every axis so the kernel origin sits at index 0.
    let mut rolled = vec![T::zero(); g.len()];
    for idx in 0..g.len() {
        let l = g.lattice(idx);
        let t = [
            l[0].rem_euclid(m0 as i64) as usize,
            l[1].rem_euclid(m1 as i64) as usize,
            l[2].rem_euclid(m2 as i64) as usize,
        ];
        rolled[g.flat(t)] = k.values[idx];
    }
    let peak = rolled.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let cutoff = peak * T::lit(1e-22);
    let mut support = Vec::new();
    for da in 0..m0 {
        for db in 0..m1 {
            let col = &rolled[(da * m1 + db) * m2..(da * m1 + db + 1) * m2];
            if col.iter().any(|v| v.abs() > cutoff) {
                support.push((da, db));
            }
        }
    }
    let mut kernel_hat = to_complex(&rolled);
    fft_axis(&mut kernel_hat, [m0, m1, m2], 2, false);
    let phase = (0..m2)
        .map(|j| {
            let th = T::TAU() * T::count(j) / T::count(m2);
            C::new(th.cos(), th.sin())
        })
        .collect();
    Method::Twisted { kernel_hat, support, phase }
}

fn twisted_apply<T: Real>(
    g: &Grid<T>,
    f: &[T],
    kernel_hat: &[C<T>],
    support: &[(usize, usize)],
    phase: &[C<T>],
) -> Vec<T> {
    let [m0, m1, m2] = g.counts();
    let mut fh = to_complex(f);
    fft_axis(&mut fh, [m0, m1, m2], 2, false);
    let half0 = (m0 / 2) as i64;
    let half1 = (m1 / 2) as i64;
    let mut out = vec![C::new(T::zero(), T::zero()); g.len()];
    out.par_chunks_mut(m2).enumerate().for_each(|(xh, col)| {
        let (xi, xj) = (xh / m1, xh % m1);
        let ax = xi as i64 - half0;
        let bx = xj as i64 - half1;
        for &(da, db) in support {
            let yi = (xi + m0 - da) % m0;
            let yj = (xj + m1 - db) % m1;
            let ay = yi as i64 - half0;
            let by = yj as i64 - half1;
            let s = (ax * by - ay * bx).rem_euclid(m2 as i64) as usize;
            let fcol = &fh[(yi * m1 + yj) * m2..(yi * m1 + yj + 1) * m2];
            let kcol = &kernel_hat[(da * m1 + db) * m2..(da * m1 + db + 1) * m2];
            let mut p = 0usize;
            for q in 0..m2 {
                col[q] = col[q] + fcol[q] * kcol[q] * phase[p];
                p += s;
                if p >= m2 {
                    p -= m2;
                }
            }
        }
    });
    fft_axis(&mut out, [m0, m1, m2], 2, true);
    let norm = g.cell_volume() / T::count(m2);
    out.iter().map(|c| c.re * norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: &ScalarField<f64>, b: &ScalarField<f64>) -> f64 {
        let d = a.values.iter().zip(&b.values).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        d / b.max_abs()
    }

    #[test]
    fn heisenberg_fast_matches_direct() {
        let g = Grid::<f64>::heisenberg(4.0, 8, 16, Boundary::Periodic).unwrap();
        let f = g.sample(|x| (-(x[0] - 0.3).powi(2) - x[1].powi(2) - 2.0 * x[2].powi(2)).exp() + 0.1 * x[0].sin());
        let k = g.sample(|x| (-(x[0] * x[0] + x[1] * x[1]) - 3.0 * (x[2] - 0.1).powi(2)).exp() * (1.0 + 0.3 * x[1]));
        let d = convolve_direct(&f, &k).unwrap();
        let fast = convolve(&f, &k).unwrap();
        assert!(rel_err(&fast, &d) < 1e-12, "{}", rel_err(&fast, &d));
    }

    #[test]
    fn euclidean_matches_brute_force() {
        for boundary in [Boundary::Periodic, Boundary::ZeroPadded] {
            let g = Grid::<f64>::euclidean(&[3.0, 2.0], &[12, 10], boundary).unwrap();
            let f = g.sample(|x| (x[0] + 0.5 * x[1]).cos() + x[1]);
            let k = g.sample(|x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp() + 0.2 * x[0]);
            let brute = g.sample(|_| 0.0).with_values(
                (0..g.len())
                    .map(|i| {
                        let x = g.lattice(i);
                        let mut s = 0.0;
                        for j in 0..g.len() {
                            let y = g.lattice(j);
                            let mut d = [x[0] - y[0], x[1] - y[1], 0];
                            if boundary == Boundary::Periodic {
                                d[0] = g.wrap_centered(0, d[0]);
                                d[1] = g.wrap_centered(1, d[1]);
                            }
                            if let Some(idx) = g.index_of(&d) {
                                s += f.values[j] * k.values[idx];
                            }
                        }
                        s * g.cell_volume()
                    })
                    .collect(),
            );
            let fast = convolve(&f, &k).unwrap();
            assert!(rel_err(&fast, &brute) < 1e-10, "{boundary:?}");
            let direct = convolve_direct(&f, &k).unwrap();
            assert!(rel_err(&direct, &brute) < 1e-12);
        }
    }
}
