use crate::error::{invalid, Result};
use crate::grid::{convolve, Grid};
use crate::scalar::Real;

use super::heat::{heat_kernel_with, Stencil};

/// Measured properties of the tabulated heat kernel `h_t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelProperties {
    pub t: f64,
    /// `∫h_t`.
    pub mass: f64,
    pub min: f64,
    /// `max |h_t(x) − h_t(x⁻¹)| / max h_t`.
    pub asymmetry: f64,
    /// `‖h_t ∗ h_s − h_{t+s}‖_{L¹}` with `s = t`.
    pub semigroup_l1: f64,
    /// `Σ|α^N h_{α²t}(δ_α x) − h_t(x)| / Σ h_t(x)` over points with
    /// `δ_α x` in the inner half of the box, away from wrap effects.
    pub scaling_error: f64,
    pub alpha: i64,
}

/// Tabulates `h_t`, `h_{2t}` and `h_{α²t}` and measures mass, inversion
/// symmetry, the semigroup law and dilation covariance.
///
/// The dilation is checked on the lattice itself: `δ_α` maps index
/// `(a, b, c)` to `(αa, αb, α²c)` on H¹ and `αk` on ℝⁿ.
pub fn kernel_properties<T: Real>(grid: &Grid<T>, t: T, alpha: i64, stencil: Stencil) -> Result<KernelProperties> {
    if alpha < 2 {
        return invalid(format!("dilation factor must be an integer ≥ 2, got {alpha}"));
    }
    let h = heat_kernel_with(grid, t, stencil)?;
    let h2 = heat_kernel_with(grid, t + t, stencil)?;
    let a = T::count(alpha as usize);
    let ha = heat_kernel_with(grid, a * a * t, stencil)?;
    let peak = h.max_abs();
    let mut asym = T::zero();
    let heis = grid.group().is_heisenberg();
    let n_hom = grid.group().homogeneous_dim as i32;
    let scale = a.powi(n_hom);
    let (mut num, mut den) = (T::zero(), T::zero());
    for i in 0..grid.len() {
        let l = grid.lattice(i);
        if let Some(j) = grid.index_of(&[-l[0], -l[1], -l[2]]) {
            asym = asym.max((h.values[i] - h.values[j]).abs());
        }
        let mut d = [l[0] * alpha, l[1] * alpha, l[2] * alpha];
        if heis {
            d[2] = l[2] * alpha * alpha;
        }
        let inside = (0..grid.dims()).all(|ax| {
            let quarter = (grid.count(ax) / 4) as i64;
            d[ax].abs() <= quarter
        });
        if inside {
            if let Some(j) = grid.index_of(&d) {
                num += (scale * ha.values[j] - h.values[i]).abs();
                den += h.values[i].abs();
            }
        }
    }
    let comp = convolve(&h, &h)?;
    Ok(KernelProperties {
        t: t.as_f64(),
        mass: h.integrate().as_f64(),
        min: h.min().as_f64(),
        asymmetry: (asym / peak).as_f64(),
        semigroup_l1: comp.sub(&h2)?.lp_norm(1.0)?.as_f64(),
        scaling_error: (num / den).as_f64(),
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;

    #[test]
    fn heisenberg_kernel_properties_on_a_coarse_grid() {
        let g = Grid::<f64>::heisenberg(6.0, 24, 96, Boundary::Periodic).unwrap();
        let p = kernel_properties(&g, 0.15, 2, Stencil::Sixth).unwrap();
        assert!((p.mass - 1.0).abs() < 1e-10);
        assert!(p.asymmetry < 1e-8, "{p:?}");
        assert!(p.semigroup_l1 < 1e-2, "{p:?}");
        assert!(p.scaling_error < 0.1, "{p:?}");
    }

    #[test]
    fn euclidean_kernels_are_exact() {
        let g = Grid::<f64>::euclidean(&[16.0, 16.0], &[128, 128], Boundary::Periodic).unwrap();
        let p = kernel_properties(&g, 0.1, 2, Stencil::Sixth).unwrap();
        assert!((p.mass - 1.0).abs() < 1e-12);
        assert!(p.asymmetry < 1e-12);
        assert!(p.semigroup_l1 < 1e-8);
        assert!(p.scaling_error < 1e-10, "{p:?}");
        assert!(kernel_properties(&g, 0.1, 1, Stencil::Sixth).is_err());
    }
}
