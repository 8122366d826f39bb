//! First-order upwind finite volumes for `∂_t θ + ∇·(uθ) = 0` on the
//! lattice, with faces between `x` and `x·e_j`.

use rayon::prelude::*;

use crate::grid::{Grid, Side, VectorField};
use crate::scalar::Real;

/// Face velocities `½(u_j(x) + u_j(x·e_j))` and their left neighbours.
pub(crate) struct Transport<T> {
    grid: Grid<T>,
    faces: Vec<Vec<T>>,
    faces_left: Vec<Vec<T>>,
}

fn unit(j: usize, s: i64) -> [i64; 3] {
    let mut d = [0; 3];
    d[j] = s;
    d
}

impl<T: Real> Transport<T> {
    pub fn new(u: &VectorField<T>) -> Self {
        let grid = u.grid.clone();
        let mut faces = Vec::new();
        let mut faces_left = Vec::new();
        for (j, c) in u.components.iter().enumerate() {
            let next = grid.translate(c, &unit(j, 1), Side::Right);
            let f: Vec<T> = c.iter().zip(&next).map(|(&a, &b)| (a + b) / T::lit(2.0)).collect();
            faces_left.push(grid.translate(&f, &unit(j, -1), Side::Right));
            faces.push(f);
        }
        Self { grid, faces, faces_left }
    }

    /// `max_x Σ_j (|u_f(x)| + |u_f(x·e_j⁻¹)|)/h_j`, a bound on the outflow rate.
    pub fn rate_bound(&self) -> T {
        let mut best = T::zero();
        for k in 0..self.grid.len() {
            let mut s = T::zero();
            for j in 0..self.faces.len() {
                s += (self.faces[j][k].abs() + self.faces_left[j][k].abs()) / self.grid.spacing(j);
            }
            best = best.max(s);
        }
        best
    }

    /// `max |Σ_j (u_f(x) − u_f(x·e_j⁻¹))/h_j| / (max|u_f| / h_min)`.
    pub fn divergence_residual(&self) -> T {
        let scale = self.faces.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs())) / self.grid.h_min();
        if scale == T::zero() {
            return T::zero();
        }
        let mut worst = T::zero();
        for k in 0..self.grid.len() {
            let mut d = T::zero();
            for j in 0..self.faces.len() {
                d += (self.faces[j][k] - self.faces_left[j][k]) / self.grid.spacing(j);
            }
            worst = worst.max(d.abs());
        }
        worst / scale
    }

    /// Adds `c·(−∇·(uθ))` to `out`.
    pub fn add_rate(&self, theta: &[T], c: T, out: &mut [T]) {
        for j in 0..self.faces.len() {
            let h = self.grid.spacing(j);
            let next = self.grid.translate(theta, &unit(j, 1), Side::Right);
            let flux: Vec<T> = (0..theta.len())
                .into_par_iter()
                .map(|k| {
                    let u = c * self.faces[j][k];
                    if u > T::zero() {
                        u * theta[k]
                    } else {
                        u * next[k]
                    }
                })
                .collect();
            let prev = self.grid.translate(&flux, &unit(j, -1), Side::Right);
            out.par_iter_mut().enumerate().for_each(|(k, o)| *o -= (flux[k] - prev[k]) / h);
        }
    }

    /// Adds the exact transpose of [`Self::add_rate`] applied to `psi`.
    pub fn add_rate_transpose(&self, psi: &[T], c: T, out: &mut [T]) {
        for j in 0..self.faces.len() {
            let h = self.grid.spacing(j);
            let next = self.grid.translate(psi, &unit(j, 1), Side::Right);
            let prev = self.grid.translate(psi, &unit(j, -1), Side::Right);
            out.par_iter_mut().enumerate().for_each(|(k, o)| {
                let up = (c * self.faces[j][k]).max(T::zero());
                let down = (-(c * self.faces_left[j][k])).max(T::zero());
                *o += (up * (next[k] - psi[k]) + down * (prev[k] - psi[k])) / h;
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;
    use crate::solver::VelocityRecipe;
    use rand::{Rng, SeedableRng};

    fn random(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn transpose_identity_and_conservation() {
        for boundary in [Boundary::Periodic, Boundary::ZeroPadded] {
            let g = Grid::<f64>::heisenberg(6.0, 16, 32, boundary).unwrap();
            let v = VelocityRecipe::Cellular { amplitude: 0.7, modes: 1 }.build(&g).unwrap();
            let tr = Transport::new(&v);
            if boundary == Boundary::Periodic {
                assert!(tr.divergence_residual() < 1e-12);
            }
            let (a, b) = (random(g.len(), 1), random(g.len(), 2));
            let mut ra = vec![0.0; g.len()];
            let mut rb = vec![0.0; g.len()];
            tr.add_rate(&a, -0.8, &mut ra);
            tr.add_rate_transpose(&b, -0.8, &mut rb);
            let l: f64 = ra.iter().zip(&b).map(|(x, y)| x * y).sum();
            let r: f64 = a.iter().zip(&rb).map(|(x, y)| x * y).sum();
            assert!((l - r).abs() < 1e-10 * l.abs().max(1.0), "{l} {r}");
            if boundary == Boundary::Periodic {
                assert!(ra.iter().sum::<f64>().abs() < 1e-10);
                // Divergence-free faces preserve constants.
                let mut rc = vec![0.0; g.len()];
                tr.add_rate(&vec![1.0; g.len()], 1.0, &mut rc);
                assert!(rc.iter().all(|x| x.abs() < 1e-12));
            }
        }
    }
}
