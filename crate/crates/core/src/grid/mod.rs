//! Uniform coordinate grids, sampled fields and their basic calculus.
//!
//! Grid points sit at `x_i = (k_i − M_i/2)·h_i`. On H¹ the vertical spacing
//! is tied to the horizontal ones by `h₃ = h₁h₂/2`, so the group law maps
//! lattice points to lattice points: with integer coordinates `(a, b, c)`
//! the product is `(a+a', b+b', c+c' + ab' − a'b)`. Storage is row-major
//! with the last axis contiguous.

mod conv;
mod field;
mod mollify;
pub mod snapshot;

pub use conv::{convolve, convolve_direct, ConvolutionPlan};
pub use field::{clamp_velocity, ScalarField, VectorField};
pub(crate) use field::stable_sum;
pub use mollify::{mollifier_bump, mollify};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::group::{gauge_coords, GroupDescriptor, Point};
use crate::scalar::Real;

/// Integer lattice coordinates, padded with zeros beyond the group dimension.
pub type Lattice = [i64; 3];

/// Treatment of points outside the coordinate box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Periodic,
    ZeroPadded,
}

/// Which side a lattice element multiplies from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `x ↦ x·d` (generates left-invariant differences).
    Right,
    /// `x ↦ d·x` (generates right-invariant differences).
    Left,
}

/// A uniform grid over a coordinate box centred at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    group: GroupDescriptor,
    extents: [T; 3],
    counts: [usize; 3],
    spacing: [T; 3],
    boundary: Boundary,
}

impl<T: Real> Grid<T> {
    /// Builds a grid from per-axis extents and counts.
    ///
    /// Counts must be even and at least 8. On H¹ the spacings must satisfy
    /// `h₃ = h₁h₂/2`.
    pub fn new(group: GroupDescriptor, extents: &[T], counts: &[usize], boundary: Boundary) -> Result<Self> {
        let n = group.n;
        if extents.len() != n || counts.len() != n {
            return invalid(format!(
                "grid needs {n} extents and counts, got {} and {}",
                extents.len(),
                counts.len()
            ));
        }
        let mut e = [T::one(); 3];
        let mut c = [1usize; 3];
        let mut h = [T::one(); 3];
        for i in 0..n {
            if counts[i] < 8 || counts[i] % 2 != 0 {
                return invalid(format!("axis {i}: count must be even and >= 8, got {}", counts[i]));
            }
            if !(extents[i] > T::zero()) || !extents[i].is_finite() {
                return invalid(format!("axis {i}: extent must be positive, got {}", extents[i]));
            }
            e[i] = extents[i];
            c[i] = counts[i];
            h[i] = extents[i] / T::count(counts[i]);
        }
        if group.is_heisenberg() {
            let want = h[0] * h[1] / T::lit(2.0);
            if ((h[2] - want) / want).abs() > T::lit(1e-9).max(T::structural_tol()) {
                return invalid(format!(
                    "heisenberg grid must satisfy h3 = h1*h2/2 (h3 = {}, expected {})",
                    h[2], want
                ));
            }
            h[2] = want;
        }
        Ok(Self { group, extents: e, counts: c, spacing: h, boundary })
    }

    /// H¹ grid with equal horizontal axes and the aligned vertical spacing.
    pub fn heisenberg(horizontal_extent: T, horizontal_count: usize, vertical_count: usize, boundary: Boundary) -> Result<Self> {
        let h = horizontal_extent / T::count(horizontal_count);
        let ext3 = T::count(vertical_count) * h * h / T::lit(2.0);
        Self::new(
            GroupDescriptor::heisenberg(),
            &[horizontal_extent, horizontal_extent, ext3],
            &[horizontal_count, horizontal_count, vertical_count],
            boundary,
        )
    }

    /// Euclidean grid of dimension `extents.len()`.
    pub fn euclidean(extents: &[T], counts: &[usize], boundary: Boundary) -> Result<Self> {
        Self::new(GroupDescriptor::euclidean(extents.len())?, extents, counts, boundary)
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn dims(&self) -> usize {
        self.group.n
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn with_boundary(&self, boundary: Boundary) -> Self {
        Self { boundary, ..self.clone() }
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn count(&self, axis: usize) -> usize {
        self.counts[axis]
    }

    pub fn extent(&self, axis: usize) -> T {
        self.extents[axis]
    }

    pub fn extents(&self) -> Vec<T> {
        self.extents[..self.dims()].to_vec()
    }

    pub fn spacing(&self, axis: usize) -> T {
        self.spacing[axis]
    }

    /// Smallest spacing over the horizontal axes.
    pub fn h_min(&self) -> T {
        (0..self.group.m).fold(T::infinity(), |m, i| m.min(self.spacing[i]))
    }

    /// Largest spacing over the horizontal axes.
    pub fn h_max(&self) -> T {
        (0..self.group.m).fold(T::zero(), |m, i| m.max(self.spacing[i]))
    }

    /// Gauge size of one lattice cell: the largest gauge of a unit lattice step.
    pub fn gauge_resolution(&self) -> T {
        let mut r = T::zero();
        for axis in 0..self.dims() {
            let mut l = [0i64; 3];
            l[axis] = 1;
            r = r.max(self.lattice_gauge(&l));
        }
        r
    }

    /// Largest gauge radius of a ball that fits in the box around the origin.
    pub fn inner_radius(&self) -> T {
        let half = |i: usize| self.extents[i] / T::lit(2.0);
        if self.group.is_heisenberg() {
            let r_h = half(0).min(half(1));
            r_h.min(T::lit(2.0) * half(2).sqrt())
        } else {
            (0..self.dims()).fold(T::infinity(), |m, i| m.min(half(i)))
        }
    }

    pub fn cell_volume(&self) -> T {
        (0..self.dims()).fold(T::one(), |v, i| v * self.spacing[i])
    }

    pub fn volume(&self) -> T {
        (0..self.dims()).fold(T::one(), |v, i| v * self.extents[i])
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Structural compatibility of two grids.
    pub fn same_as(&self, other: &Self) -> bool {
        self == other
    }

    pub fn check_same(&self, other: &Self) -> Result<()> {
        if !self.same_as(other) {
            return invalid("fields live on different grids");
        }
        Ok(())
    }

    #[inline]
    pub fn flat(&self, i: [usize; 3]) -> usize {
        (i[0] * self.counts[1] + i[1]) * self.counts[2] + i[2]
    }

    #[inline]
    pub fn unflat(&self, k: usize) -> [usize; 3] {
        let i2 = k % self.counts[2];
        let r = k / self.counts[2];
        [r / self.counts[1], r % self.counts[1], i2]
    }

    /// Centred integer coordinates of a flat index.
    #[inline]
    pub fn lattice(&self, k: usize) -> Lattice {
        let i = self.unflat(k);
        let mut l = [0i64; 3];
        for a in 0..self.dims() {
            l[a] = i[a] as i64 - (self.counts[a] / 2) as i64;
        }
        l
    }

    /// Index along `axis` of centred coordinate `v`; `None` outside a
    /// zero-padded box.
    #[inline]
    pub fn axis_index(&self, axis: usize, v: i64) -> Option<usize> {
        let m = self.counts[axis] as i64;
        let i = v + m / 2;
        match self.boundary {
            Boundary::Periodic => Some(i.rem_euclid(m) as usize),
            Boundary::ZeroPadded => (0..m).contains(&i).then_some(i as usize),
        }
    }

    /// Flat index of centred lattice coordinates, if inside the grid.
    #[inline]
    pub fn index_of(&self, l: &Lattice) -> Option<usize> {
        let mut idx = [0usize; 3];
        for a in 0..self.dims() {
            idx[a] = self.axis_index(a, l[a])?;
        }
        Some(self.flat(idx))
    }

    /// Wraps a centred coordinate into `[−M/2, M/2)`.
    #[inline]
    pub fn wrap_centered(&self, axis: usize, v: i64) -> i64 {
        let m = self.counts[axis] as i64;
        (v + m / 2).rem_euclid(m) - m / 2
    }

    /// Lattice group product.
    #[inline]
    pub fn lattice_mul(&self, x: &Lattice, y: &Lattice) -> Lattice {
        let mut z = [x[0] + y[0], x[1] + y[1], x[2] + y[2]];
        if self.group.is_heisenberg() {
            z[2] += x[0] * y[1] - y[0] * x[1];
        }
        z
    }

    /// Lattice coordinates of `y⁻¹·x`, wrapped into the centred range on a
    /// periodic grid.
    #[inline]
    pub fn relative(&self, x: &Lattice, y: &Lattice) -> Lattice {
        let mut d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
        if self.group.is_heisenberg() {
            d[2] += x[0] * y[1] - y[0] * x[1];
        }
        if self.is_periodic() {
            for (a, v) in d.iter_mut().enumerate().take(self.dims()) {
                *v = self.wrap_centered(a, *v);
            }
        }
        d
    }

    /// Physical coordinates of lattice coordinates.
    #[inline]
    pub fn lattice_coords(&self, l: &Lattice) -> [T; 3] {
        let mut c = [T::zero(); 3];
        for a in 0..self.dims() {
            c[a] = T::from_i64(l[a]).unwrap() * self.spacing[a];
        }
        c
    }

    /// Gauge of lattice coordinates.
    #[inline]
    pub fn lattice_gauge(&self, l: &Lattice) -> T {
        let c = self.lattice_coords(l);
        gauge_coords(self.group.is_heisenberg(), &c[..self.dims()])
    }

    /// Physical coordinates of a flat index.
    #[inline]
    pub fn coords(&self, k: usize) -> [T; 3] {
        self.lattice_coords(&self.lattice(k))
    }

    pub fn point(&self, k: usize) -> Point<T> {
        Point::new(self.coords(k)[..self.dims()].to_vec())
    }

    /// Nearest lattice coordinates of a point (rounded per axis).
    pub fn nearest_lattice(&self, p: &Point<T>) -> Lattice {
        let mut l = [0i64; 3];
        for a in 0..self.dims() {
            l[a] = (p.coords[a] / self.spacing[a]).round().to_i64().unwrap_or(0);
        }
        l
    }

    /// Values `g(x) = f(x·d)` (right) or `g(x) = f(d·x)` (left) for a lattice
    /// element `d`. Outside a zero-padded box `f` reads as zero.
    pub fn translate(&self, f: &[T], d: &Lattice, side: Side) -> Vec<T> {
        let mut out = vec![T::zero(); f.len()];
        self.translate_into(f, d, side, &mut out);
        out
    }

    pub(crate) fn translate_into(&self, f: &[T], d: &Lattice, side: Side, out: &mut [T]) {
        let [m0, m1, m2] = self.counts;
        let heis = self.group.is_heisenberg();
        for i0 in 0..m0 {
            let a = i0 as i64 - (m0 / 2) as i64;
            let s0 = if self.dims() >= 1 { self.axis_index(0, a + d[0]) } else { Some(i0) };
            for i1 in 0..m1 {
                let dst = (i0 * m1 + i1) * m2;
                let b = i1 as i64 - (m1 / 2) as i64;
                let s1 = if self.dims() >= 2 { self.axis_index(1, b + d[1]) } else { Some(i1) };
                let (Some(j0), Some(j1)) = (s0, s1) else {
                    out[dst..dst + m2].fill(T::zero());
                    continue;
                };
                let src = (j0 * m1 + j1) * m2;
                let mut shift = if self.dims() >= 3 { d[2] } else { 0 };
                if heis {
                    shift += match side {
                        Side::Right => a * d[1] - d[0] * b,
                        Side::Left => d[0] * b - a * d[1],
                    };
                }
                copy_shifted(&f[src..src + m2], shift, self.is_periodic(), &mut out[dst..dst + m2]);
            }
        }
    }

    /// Samples a function of physical coordinates.
    pub fn sample(&self, f: impl Fn(&[T]) -> T) -> ScalarField<T> {
        let n = self.dims();
        let values = (0..self.len()).map(|k| f(&self.coords(k)[..n])).collect();
        ScalarField::new(self.clone(), values).expect("sampled length")
    }
}

/// `out[k] = src[k + shift]` with wrap or zero fill.
#[inline]
fn copy_shifted<T: Real>(src: &[T], shift: i64, periodic: bool, out: &mut [T]) {
    let m = src.len() as i64;
    if periodic {
        let s = shift.rem_euclid(m) as usize;
        let m = m as usize;
        out[..m - s].copy_from_slice(&src[s..]);
        out[m - s..].copy_from_slice(&src[..s]);
    } else {
        for (k, o) in out.iter_mut().enumerate() {
            let j = k as i64 + shift;
            *o = if (0..m).contains(&j) { src[j as usize] } else { T::zero() };
        }
    }
}
