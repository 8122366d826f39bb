//! Divergence-free velocity recipes and their time modulation.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{Grid, ScalarField, VectorField};
use crate::group::left_derivative;
use crate::scalar::Real;

/// Named velocity constructions. Every recipe except `Constant` is built
/// from a stream function `ψ(x₁, x₂)` as `v = (−X₂ψ, X₁ψ)`, which has zero
/// discrete divergence because `ψ` does not depend on the centre.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VelocityRecipe {
    Zero,
    /// Uniform horizontal field.
    Constant { components: Vec<f64> },
    /// Localized swirl: `ψ = A·w·exp(−|x'|²/(2w²))`.
    Stream { amplitude: f64, width: f64 },
    /// Periodic cells: `ψ = A·L/(2πn)·sin(2πn x₁/L₁)·sin(2πn x₂/L₂)`.
    Cellular { amplitude: f64, modes: usize },
    /// Horizontal shear: `ψ = A·L₂/(2πn)·cos(2πn x₂/L₂)`, so `v₁ = A sin(2πn x₂/L₂)`.
    Shear { amplitude: f64, modes: usize },
}

impl VelocityRecipe {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Constant { .. } => "constant",
            Self::Stream { .. } => "stream",
            Self::Cellular { .. } => "cellular",
            Self::Shear { .. } => "shear",
        }
    }

    /// Samples the recipe on a grid.
    pub fn build<T: Real>(&self, grid: &Grid<T>) -> Result<VectorField<T>> {
        let m = grid.group().m;
        let stream = |psi: ScalarField<T>| -> Result<VectorField<T>> {
            if m < 2 {
                return invalid(format!("recipe needs two horizontal directions, grid has {m}"));
            }
            let mut comps = vec![vec![T::zero(); grid.len()]; m];
            comps[0] = left_derivative(1, &psi)?.scale(-T::one()).values;
            comps[1] = left_derivative(0, &psi)?.values;
            VectorField::new(grid.clone(), comps)
        };
        let tau = std::f64::consts::TAU;
        match self {
            Self::Zero => Ok(VectorField::zeros(grid)),
            Self::Constant { components } => {
                if components.len() != m {
                    return invalid(format!("constant velocity needs {m} components, got {}", components.len()));
                }
                VectorField::new(grid.clone(), components.iter().map(|&c| vec![T::lit(c); grid.len()]).collect())
            }
            &Self::Stream { amplitude, width } => {
                if !(width > 0.0) {
                    return invalid("stream width must be positive");
                }
                stream(grid.sample(|x| {
                    let r2 = x[0].as_f64().powi(2) + x.get(1).map_or(0.0, |y| y.as_f64().powi(2));
                    T::lit(amplitude * width * (-r2 / (2.0 * width * width)).exp())
                }))
            }
            &Self::Cellular { amplitude, modes } => {
                if modes == 0 || m < 2 {
                    return invalid("cellular recipe needs modes ≥ 1 and two horizontal directions");
                }
                let (l1, l2) = (grid.extent(0).as_f64(), grid.extent(1).as_f64());
                let n = modes as f64;
                stream(grid.sample(|x| {
                    let (a, b) = (x[0].as_f64(), x[1].as_f64());
                    T::lit(amplitude * l1 / (tau * n) * (tau * n * a / l1).sin() * (tau * n * b / l2).sin())
                }))
            }
            &Self::Shear { amplitude, modes } => {
                if modes == 0 || m < 2 {
                    return invalid("shear recipe needs modes ≥ 1 and two horizontal directions");
                }
                let l2 = grid.extent(1).as_f64();
                let n = modes as f64;
                stream(grid.sample(|x| T::lit(amplitude * l2 / (tau * n) * (tau * n * x[1].as_f64() / l2).cos())))
            }
        }
    }
}

/// Scalar time modulation `v(x, t) = m(t)·v(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Modulation {
    #[default]
    Steady,
    /// `m(t) = 1 + a·sin(2πft)`.
    Oscillating { amplitude: f64, frequency: f64 },
}

impl Modulation {
    pub fn factor<T: Real>(&self, t: T) -> T {
        match *self {
            Self::Steady => T::one(),
            Self::Oscillating { amplitude, frequency } => {
                T::one() + T::lit(amplitude) * (T::TAU() * T::lit(frequency) * t).sin()
            }
        }
    }

    /// Upper bound of `|m(t)|`.
    pub fn bound<T: Real>(&self) -> T {
        match *self {
            Self::Steady => T::one(),
            Self::Oscillating { amplitude, .. } => T::one() + T::lit(amplitude.abs()),
        }
    }
}

/// A velocity field with separable time dependence.
#[derive(Clone, Debug)]
pub struct TimeVelocity<T> {
    pub field: VectorField<T>,
    pub modulation: Modulation,
}

impl<T: Real> TimeVelocity<T> {
    pub fn steady(field: VectorField<T>) -> Self {
        Self { field, modulation: Modulation::Steady }
    }

    pub fn modulated(field: VectorField<T>, modulation: Modulation) -> Self {
        Self { field, modulation }
    }

    pub fn zero(grid: &Grid<T>) -> Self {
        Self::steady(VectorField::zeros(grid))
    }

    pub fn factor(&self, t: T) -> T {
        self.modulation.factor(t)
    }

    pub fn at(&self, t: T) -> VectorField<T> {
        self.field.scale(self.factor(t))
    }

    /// `sup_t ‖v(·, t)‖_∞`.
    pub fn sup_norm(&self) -> T {
        self.field.max_abs() * self.modulation.bound::<T>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;
    use crate::group::divergence;

    #[test]
    fn recipes_are_divergence_free() {
        let h = Grid::<f64>::heisenberg(8.0, 32, 64, Boundary::Periodic).unwrap();
        let e = Grid::<f64>::euclidean(&[8.0, 8.0], &[32, 32], Boundary::Periodic).unwrap();
        let recipes = [
            VelocityRecipe::Stream { amplitude: 1.0, width: 1.0 },
            VelocityRecipe::Cellular { amplitude: 1.0, modes: 1 },
            VelocityRecipe::Shear { amplitude: 1.0, modes: 2 },
            VelocityRecipe::Constant { components: vec![0.3, -0.2] },
        ];
        for g in [&h, &e] {
            for r in &recipes {
                let v = r.build(g).unwrap();
                assert!(v.max_abs() > 0.1);
                assert!(divergence(&v).unwrap().max_abs() < 1e-12, "{}", r.name());
            }
        }
        let line = Grid::<f64>::euclidean(&[8.0], &[64], Boundary::Periodic).unwrap();
        assert!(VelocityRecipe::Stream { amplitude: 1.0, width: 1.0 }.build(&line).is_err());
        assert!(VelocityRecipe::Constant { components: vec![0.5] }.build(&line).is_ok());
    }

    #[test]
    fn modulation_factor() {
        let m = Modulation::Oscillating { amplitude: 0.5, frequency: 1.0 };
        assert!((m.factor(0.25f64) - 1.5).abs() < 1e-12);
        assert_eq!(m.bound::<f64>(), 1.5);
        assert_eq!(Modulation::Steady.factor(3.0f64), 1.0);
    }
}
