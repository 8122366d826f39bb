use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{Grid, Lattice, ScalarField, Side, VectorField};

/// The bump `ω_ε(x) ∝ (1 − ρ(δ_{1/ε}x)²)⁴` on the gauge ball of radius `ε`,
/// normalized so that its lattice quadrature equals 1.
pub fn mollifier_bump<T: Real>(grid: &Grid<T>, eps: T) -> Result<ScalarField<T>> {
    let res = grid.gauge_resolution();
    if !(eps > T::zero()) || eps < T::lit(2.0) * res {
        return Err(Error::Resolution(format!(
            "mollifier radius {eps} is below twice the lattice gauge resolution {res}"
        )));
    }
    if eps >= grid.inner_radius() {
        return Err(Error::Resolution(format!("mollifier radius {eps} does not fit in the box")));
    }
    let mut f = ScalarField::zeros(grid);
    for (k, v) in f.values.iter_mut().enumerate() {
        let r = grid.lattice_gauge(&grid.lattice(k)) / eps;
        if r < T::one() {
            *v = (T::one() - r * r).powi(4);
        }
    }
    let mass = f.integrate();
    Ok(f.scale(T::one() / mass))
}

/// Lattice offsets and weights of the bump support.
fn bump_support<T: Real>(bump: &ScalarField<T>) -> Vec<(Lattice, T)> {
    let g = &bump.grid;
    let vol = g.cell_volume();
    (0..g.len())
        .filter(|&k| bump.values[k] != T::zero())
        .map(|k| (g.lattice(k), bump.values[k] * vol))
        .collect()
}

/// `v_ε = ω_ε ∗ v` componentwise (kernel on the left, so left-invariant
/// derivatives commute with mollification).
pub fn mollify<T: Real>(v: &VectorField<T>, eps: T) -> Result<VectorField<T>> {
    let bump = mollifier_bump(&v.grid, eps)?;
    let support = bump_support(&bump);
    let g = &v.grid;
    let mut buf = vec![T::zero(); g.len()];
    let components = v
        .components
        .iter()
        .map(|c| {
            let mut acc = vec![T::zero(); g.len()];
            for (y, w) in &support {
                // (ω∗v)(x) = Σ_y ω(y) v(y⁻¹·x)
                let inv = [-y[0], -y[1], -y[2]];
                g.translate_into(c, &inv, Side::Left, &mut buf);
                for (a, b) in acc.iter_mut().zip(&buf) {
                    *a += *w * *b;
                }
            }
            acc
        })
        .collect();
    Ok(VectorField { grid: g.clone(), components, time: v.time })
}
