//! Invariant derivatives on grids.
//!
//! On H¹ the left-invariant field `X₁ = ∂₁ − (x₂/2)∂₃` moves along the line
//! `s ↦ x + s·q₁(x)`, which coincides with `x·(s e₁)`. The centred difference
//! along this line therefore reads lattice values exactly:
//! `X_j f(x) ≈ [f(x·h e_j) − f(x·(−h e_j))] / 2h`. Right-invariant fields
//! use left translations.

use crate::error::{invalid, Result};
use crate::grid::{Grid, Lattice, ScalarField, Side, VectorField};
use crate::scalar::Real;

fn unit(j: usize, s: i64) -> Lattice {
    let mut l = [0i64; 3];
    l[j] = s;
    l
}

fn centred<T: Real>(grid: &Grid<T>, j: usize, f: &[T], side: Side) -> Result<Vec<T>> {
    if j >= grid.group().m {
        return invalid(format!("horizontal index {j} out of range 0..{}", grid.group().m));
    }
    let fwd = grid.translate(f, &unit(j, 1), side);
    let bwd = grid.translate(f, &unit(j, -1), side);
    let inv = T::one() / (T::lit(2.0) * grid.spacing(j));
    Ok(fwd.iter().zip(&bwd).map(|(&a, &b)| (a - b) * inv).collect())
}

/// Left-invariant derivative `X_j f` (`j` counts from 0).
pub fn left_derivative<T: Real>(j: usize, f: &ScalarField<T>) -> Result<ScalarField<T>> {
    Ok(f.with_values(centred(&f.grid, j, &f.values, Side::Right)?))
}

/// Right-invariant derivative `Y_j f` (`j` counts from 0).
pub fn right_derivative<T: Real>(j: usize, f: &ScalarField<T>) -> Result<ScalarField<T>> {
    Ok(f.with_values(centred(&f.grid, j, &f.values, Side::Left)?))
}

/// Horizontal gradient `(X_1 f, …, X_m f)`.
pub fn horizontal_gradient<T: Real>(f: &ScalarField<T>) -> Result<VectorField<T>> {
    let comps = (0..f.grid.group().m)
        .map(|j| centred(&f.grid, j, &f.values, Side::Right))
        .collect::<Result<Vec<_>>>()?;
    let mut v = VectorField::new(f.grid.clone(), comps)?;
    v.time = f.time;
    Ok(v)
}

/// Horizontal divergence `Σ_j X_j v_j`.
pub fn divergence<T: Real>(v: &VectorField<T>) -> Result<ScalarField<T>> {
    let mut out = vec![T::zero(); v.grid.len()];
    for (j, c) in v.components.iter().enumerate() {
        for (o, d) in out.iter_mut().zip(centred(&v.grid, j, c, Side::Right)?) {
            *o += d;
        }
    }
    let mut f = ScalarField::new(v.grid.clone(), out)?;
    f.time = v.time;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;

    fn interior(grid: &Grid<f64>, k: usize, margin: i64) -> bool {
        let l = grid.lattice(k);
        (0..3).all(|a| l[a].abs() < grid.count(a) as i64 / 2 - margin)
    }

    #[test]
    fn vertical_coordinate_derivatives_are_exact() {
        let g = Grid::<f64>::heisenberg(4.0, 16, 64, Boundary::ZeroPadded).unwrap();
        let f = g.sample(|x| x[2]);
        let x1 = left_derivative(0, &f).unwrap();
        let x2 = left_derivative(1, &f).unwrap();
        for k in (0..g.len()).filter(|&k| interior(&g, k, 10)) {
            let c = g.coords(k);
            assert!((x1.values[k] + c[1] / 2.0).abs() < 1e-12);
            assert!((x2.values[k] - c[0] / 2.0).abs() < 1e-12);
        }
        let y1 = right_derivative(0, &f).unwrap();
        for k in (0..g.len()).filter(|&k| interior(&g, k, 10)) {
            assert!((y1.values[k] - g.coords(k)[1] / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constants_and_range() {
        let g = Grid::<f64>::heisenberg(4.0, 8, 16, Boundary::Periodic).unwrap();
        let c = ScalarField::constant(&g, 3.0);
        let grad = horizontal_gradient(&c).unwrap();
        assert_eq!(grad.max_abs(), 0.0);
        assert!(left_derivative(2, &c).is_err());
    }

    #[test]
    fn rotation_field_is_divergence_free() {
        let g = Grid::<f64>::euclidean(&[4.0, 4.0], &[32, 32], Boundary::ZeroPadded).unwrap();
        let v1 = g.sample(|x| -x[1]).values;
        let v2 = g.sample(|x| x[0]).values;
        let d = divergence(&VectorField::new(g.clone(), vec![v1, v2]).unwrap()).unwrap();
        for k in (0..g.len()).filter(|&k| {
            let l = g.lattice(k);
            l[0].abs() < 15 && l[1].abs() < 15
        }) {
            assert!(d.values[k].abs() < 1e-12);
        }
    }
}
