use crate::error::{invalid, Result};
use crate::scalar::Real;

use super::Grid;

/// A scalar function sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    pub grid: Grid<T>,
    pub values: Vec<T>,
    /// Simulation time the field refers to, if any.
    pub time: Option<T>,
}

/// Horizontal components of a vector field sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<T> {
    pub grid: Grid<T>,
    pub components: Vec<Vec<T>>,
    pub time: Option<T>,
}

/// Compensated sequential sum; the summation order is fixed.
pub(crate) fn stable_sum<T: Real>(it: impl Iterator<Item = T>) -> T {
    let mut s = T::zero();
    let mut c = T::zero();
    for x in it {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

impl<T: Real> ScalarField<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!("field has {} values for a grid of {}", values.len(), grid.len()));
        }
        Ok(Self { grid, values, time: None })
    }

    pub fn zeros(grid: &Grid<T>) -> Self {
        Self { grid: grid.clone(), values: vec![T::zero(); grid.len()], time: None }
    }

    pub fn constant(grid: &Grid<T>, c: T) -> Self {
        Self { grid: grid.clone(), values: vec![c; grid.len()], time: None }
    }

    pub fn with_values(&self, values: Vec<T>) -> Self {
        Self { grid: self.grid.clone(), values, time: self.time }
    }

    pub fn at_time(mut self, t: T) -> Self {
        self.time = Some(t);
        self
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Riemann sum `Σ f·Πh_i`.
    pub fn integrate(&self) -> T {
        stable_sum(self.values.iter().copied()) * self.grid.cell_volume()
    }

    /// Quadrature L^p norm; `p = ∞` gives the grid maximum of `|f|`.
    pub fn lp_norm(&self, p: f64) -> Result<T> {
        if p.is_nan() || p < 1.0 {
            return invalid(format!("lp_norm needs p >= 1, got {p}"));
        }
        if p.is_infinite() {
            return Ok(self.max_abs());
        }
        let vol = self.grid.cell_volume();
        if p == 1.0 {
            return Ok(stable_sum(self.values.iter().map(|v| v.abs())) * vol);
        }
        let pt = T::lit(p);
        let scale = self.max_abs();
        if scale == T::zero() {
            return Ok(T::zero());
        }
        let s = stable_sum(self.values.iter().map(|v| (v.abs() / scale).powf(pt)));
        Ok(scale * (s * vol).powf(T::one() / pt))
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn max(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    /// `⟨f, g⟩ = Σ f·g·Πh_i`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.grid.check_same(&other.grid)?;
        Ok(stable_sum(self.values.iter().zip(&other.values).map(|(&a, &b)| a * b)) * self.grid.cell_volume())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| v * c)
    }

    /// Fraction of the L¹ mass carried by the outer eighth of every axis.
    pub fn boundary_mass(&self) -> T {
        let total = stable_sum(self.values.iter().map(|v| v.abs()));
        if total == T::zero() {
            return T::zero();
        }
        let g = &self.grid;
        let outer = stable_sum((0..g.len()).filter_map(|k| {
            let i = g.unflat(k);
            let near = (0..g.dims()).any(|a| {
                let m = g.count(a);
                let band = (m / 8).max(1);
                i[a] < band || i[a] >= m - band
            });
            near.then(|| self.values[k].abs())
        }));
        outer / total
    }
}

impl<T: Real> VectorField<T> {
    pub fn new(grid: Grid<T>, components: Vec<Vec<T>>) -> Result<Self> {
        if components.len() != grid.group().m {
            return invalid(format!(
                "vector field needs {} components, got {}",
                grid.group().m,
                components.len()
            ));
        }
        if components.iter().any(|c| c.len() != grid.len()) {
            return invalid("vector component length does not match the grid");
        }
        Ok(Self { grid, components, time: None })
    }

    pub fn zeros(grid: &Grid<T>) -> Self {
        Self { grid: grid.clone(), components: vec![vec![T::zero(); grid.len()]; grid.group().m], time: None }
    }

    pub fn component(&self, j: usize) -> ScalarField<T> {
        ScalarField { grid: self.grid.clone(), values: self.components[j].clone(), time: self.time }
    }

    /// Largest pointwise component magnitude.
    pub fn max_abs(&self) -> T {
        self.components.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().flatten().all(|v| v.is_finite())
    }

    pub fn scale(&self, c: T) -> Self {
        Self {
            grid: self.grid.clone(),
            components: self.components.iter().map(|v| v.iter().map(|&x| x * c).collect()).collect(),
            time: self.time,
        }
    }
}

/// Componentwise truncation to `[−k, k]`.
pub fn clamp_velocity<T: Real>(v: &VectorField<T>, k: T) -> Result<VectorField<T>> {
    if !(k > T::zero()) {
        return invalid(format!("clamp level must be positive, got {k}"));
    }
    Ok(VectorField {
        grid: v.grid.clone(),
        components: v.components.iter().map(|c| c.iter().map(|&x| x.max(-k).min(k)).collect()).collect(),
        time: v.time,
    })
}
