//! Coordinate arithmetic of the supported stratified groups.
//!
//! Two families are hard-instantiated: the first Heisenberg group H¹ with
//! law `(x·y)₃ = x₃ + y₃ + ½(x₁y₂ − y₁x₂)` and the abelian groups ℝⁿ
//! (n ≤ 3). Distances use the Korányi gauge on H¹ and the Euclidean norm on ℝⁿ.

mod derivative;

pub use derivative::{divergence, horizontal_gradient, left_derivative, right_derivative};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Which group a descriptor instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Heisenberg1,
    Euclidean(usize),
}

/// Static data of a stratified group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupDescriptor {
    pub family: Family,
    /// Topological dimension.
    pub n: usize,
    /// Dilation exponents `a_1..a_n`.
    pub exponents: Vec<u32>,
    /// Homogeneous dimension `Σ a_i`.
    pub homogeneous_dim: u32,
    /// Number of horizontal directions.
    pub m: usize,
}

/// A group element in exponential coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point<T> {
    pub coords: Vec<T>,
}

impl<T: Real> Point<T> {
    pub fn new(coords: Vec<T>) -> Self {
        Self { coords }
    }

    pub fn origin(n: usize) -> Self {
        Self { coords: vec![T::zero(); n] }
    }

    pub fn from_f64(coords: &[f64]) -> Self {
        Self { coords: coords.iter().map(|&c| T::lit(c)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }
}

impl GroupDescriptor {
    pub fn heisenberg() -> Self {
        Self {
            family: Family::Heisenberg1,
            n: 3,
            exponents: vec![1, 1, 2],
            homogeneous_dim: 4,
            m: 2,
        }
    }

    /// ℝⁿ with isotropic dilations; `n` must be 1, 2 or 3.
    pub fn euclidean(n: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return invalid(format!("euclidean dimension must be 1..=3, got {n}"));
        }
        Ok(Self {
            family: Family::Euclidean(n),
            n,
            exponents: vec![1; n],
            homogeneous_dim: n as u32,
            m: n,
        })
    }

    pub fn is_heisenberg(&self) -> bool {
        self.family == Family::Heisenberg1
    }

    /// Short identifier used in file metadata.
    pub fn id(&self) -> String {
        match self.family {
            Family::Heisenberg1 => "heisenberg1".into(),
            Family::Euclidean(n) => format!("euclidean{n}"),
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "heisenberg1" => Ok(Self::heisenberg()),
            "euclidean1" => Self::euclidean(1),
            "euclidean2" => Self::euclidean(2),
            "euclidean3" => Self::euclidean(3),
            _ => invalid(format!("unknown group id `{id}`")),
        }
    }

    fn check<T: Real>(&self, x: &Point<T>) -> Result<()> {
        if x.dim() != self.n {
            return invalid(format!("point of dimension {} for a group of dimension {}", x.dim(), self.n));
        }
        Ok(())
    }

    /// Group product `x·y`.
    pub fn multiply<T: Real>(&self, x: &Point<T>, y: &Point<T>) -> Result<Point<T>> {
        self.check(x)?;
        self.check(y)?;
        let mut c: Vec<T> = x.coords.iter().zip(&y.coords).map(|(&a, &b)| a + b).collect();
        if self.is_heisenberg() {
            let (x1, x2, y1, y2) = (x.coords[0], x.coords[1], y.coords[0], y.coords[1]);
            c[2] += T::lit(0.5) * (x1 * y2 - y1 * x2);
        }
        Ok(Point::new(c))
    }

    /// Group inverse; both families use `x⁻¹ = −x`.
    pub fn inverse<T: Real>(&self, x: &Point<T>) -> Result<Point<T>> {
        self.check(x)?;
        Ok(Point::new(x.coords.iter().map(|&a| -a).collect()))
    }

    /// Anisotropic dilation `δ_α`.
    pub fn dilate<T: Real>(&self, alpha: T, x: &Point<T>) -> Result<Point<T>> {
        self.check(x)?;
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return invalid(format!("dilation factor must be positive, got {alpha}"));
        }
        Ok(Point::new(
            x.coords
                .iter()
                .zip(&self.exponents)
                .map(|(&c, &a)| c * alpha.powi(a as i32))
                .collect(),
        ))
    }

    /// Homogeneous gauge: Korányi on H¹, Euclidean norm otherwise.
    pub fn gauge<T: Real>(&self, x: &Point<T>) -> Result<T> {
        self.check(x)?;
        Ok(gauge_coords(self.is_heisenberg(), &x.coords))
    }

    /// Left-invariant quasi-distance `ρ(y⁻¹·x)`.
    pub fn dist<T: Real>(&self, x: &Point<T>, y: &Point<T>) -> Result<T> {
        let d = self.multiply(&self.inverse(y)?, x)?;
        self.gauge(&d)
    }
}

/// Gauge of raw coordinates without dimension checks.
#[inline]
pub(crate) fn gauge_coords<T: Real>(heisenberg: bool, c: &[T]) -> T {
    if heisenberg {
        let r2 = c[0] * c[0] + c[1] * c[1];
        (r2 * r2 + T::lit(16.0) * c[2] * c[2]).sqrt().sqrt()
    } else {
        c.iter().fold(T::zero(), |s, &a| s + a * a).sqrt()
    }
}

/// Volume of the unit gauge ball, computed by midpoint quadrature on a
/// `res`-per-axis grid of the bounding box.
pub fn unit_ball_volume(g: &GroupDescriptor, res: usize) -> f64 {
    let bounds: Vec<f64> = if g.is_heisenberg() { vec![1.0, 1.0, 0.25] } else { vec![1.0; g.n] };
    let cell: f64 = bounds.iter().map(|b| 2.0 * b / res as f64).product();
    let mut count = 0usize;
    let total = res.pow(g.n as u32);
    let mut c = vec![0.0f64; g.n];
    for k in 0..total {
        let mut r = k;
        for (i, b) in bounds.iter().enumerate() {
            let j = r % res;
            r /= res;
            c[i] = -b + (j as f64 + 0.5) * 2.0 * b / res as f64;
        }
        if gauge_coords(g.is_heisenberg(), &c) < 1.0 {
            count += 1;
        }
    }
    count as f64 * cell
}

/// Largest residuals of the group identities over random samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxiomResiduals {
    pub samples: usize,
    /// `|(x·y)·z − x·(y·z)|_∞`.
    pub associativity: f64,
    /// `|δ_α(x·y) − δ_α x·δ_α y|_∞`.
    pub homomorphism: f64,
    /// `|x·x⁻¹|_∞` and `|x·e − x|_∞`.
    pub inverse: f64,
    /// `|ρ(δ_α x) − αρ(x)|`, relative.
    pub gauge_homogeneity: f64,
}

impl AxiomResiduals {
    pub fn max(&self) -> f64 {
        self.associativity.max(self.homomorphism).max(self.inverse).max(self.gauge_homogeneity)
    }
}

/// Checks the group identities on `samples` random triples with
/// coordinates in `[−2, 2]` and dilations in `[1/4, 4]`.
pub fn axiom_residuals<R: rand::Rng + ?Sized>(g: &GroupDescriptor, samples: usize, rng: &mut R) -> Result<AxiomResiduals> {
    let draw = |rng: &mut R| Point::new((0..g.n).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<f64>>());
    let mut out = AxiomResiduals { samples, associativity: 0.0, homomorphism: 0.0, inverse: 0.0, gauge_homogeneity: 0.0 };
    let e = Point::origin(g.n);
    for _ in 0..samples {
        let (x, y, z) = (draw(rng), draw(rng), draw(rng));
        let alpha: f64 = 4f64.powf(rng.random_range(-1.0..1.0));
        let lhs = g.multiply(&g.multiply(&x, &y)?, &z)?;
        let rhs = g.multiply(&x, &g.multiply(&y, &z)?)?;
        out.associativity = out.associativity.max(lhs.max_abs_diff(&rhs));
        let lhs = g.dilate(alpha, &g.multiply(&x, &y)?)?;
        let rhs = g.multiply(&g.dilate(alpha, &x)?, &g.dilate(alpha, &y)?)?;
        out.homomorphism = out.homomorphism.max(lhs.max_abs_diff(&rhs));
        out.inverse = out.inverse.max(g.multiply(&x, &g.inverse(&x)?)?.max_abs_diff(&e));
        out.inverse = out.inverse.max(g.multiply(&x, &e)?.max_abs_diff(&x));
        let rho = g.gauge(&x)?;
        if rho > 0.0 {
            out.gauge_homogeneity = out.gauge_homogeneity.max((g.gauge(&g.dilate(alpha, &x)?)? - alpha * rho).abs() / (alpha * rho));
        }
    }
    Ok(out)
}
