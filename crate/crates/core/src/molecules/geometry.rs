use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::group::gauge_coords;
use crate::scalar::Real;

/// Distances `‖x·c⁻¹‖` from grid points to a free-moving centre.
///
/// Periodic Euclidean axes use the minimum image; every other axis is
/// taken literally, so balls must fit in the box.
#[derive(Clone, Debug)]
pub(crate) struct Frame<T> {
    heis: bool,
    dims: usize,
    period: [Option<T>; 3],
    half: [T; 3],
}

impl<T: Real> Frame<T> {
    pub fn new(grid: &Grid<T>) -> Self {
        let heis = grid.group().is_heisenberg();
        let wrap = grid.is_periodic() && !heis;
        let mut period = [None; 3];
        let mut half = [T::zero(); 3];
        for a in 0..grid.dims() {
            if wrap {
                period[a] = Some(grid.extent(a));
            }
            half[a] = grid.extent(a) / T::lit(2.0);
        }
        Self { heis, dims: grid.dims(), period, half }
    }

    fn wrap(&self, a: usize, d: T) -> T {
        match self.period[a] {
            Some(p) => d - p * (d / p).round(),
            None => d,
        }
    }

    /// Coordinates of `x·c⁻¹`.
    pub fn rel(&self, x: &[T; 3], c: &[T]) -> [T; 3] {
        let mut d = [T::zero(); 3];
        for a in 0..self.dims {
            d[a] = self.wrap(a, x[a] - c[a]);
        }
        if self.heis {
            d[2] -= T::lit(0.5) * (x[0] * c[1] - c[0] * x[1]);
        }
        d
    }

    pub fn rho(&self, x: &[T; 3], c: &[T]) -> T {
        gauge_coords(self.heis, &self.rel(x, c)[..self.dims])
    }

    /// Brings a centre back into the box along periodic axes.
    pub fn normalize(&self, c: &mut [T]) {
        for (a, ca) in c.iter_mut().enumerate().take(self.dims) {
            if let Some(p) = self.period[a] {
                *ca = *ca - p * ((*ca + self.half[a]) / p).floor();
            }
        }
    }

    /// Fails when the ball `B(c, radius)` is not covered by the box.
    pub fn check_ball(&self, c: &[T], radius: T) -> Result<()> {
        for a in 0..self.dims {
            let reach = if self.heis && a == 2 {
                radius * radius / T::lit(4.0) + T::lit(0.5) * radius * (c[0].abs() + c[1].abs())
            } else {
                radius
            };
            let fits = match self.period[a] {
                Some(p) => reach < p / T::lit(2.0),
                None => c[a].abs() + reach < self.half[a],
            };
            if !fits {
                return Err(Error::Geometry(format!(
                    "ball of radius {radius} around {:?} leaves the box along axis {a}",
                    c.iter().map(|v| v.as_f64()).collect::<Vec<_>>()
                )));
            }
        }
        Ok(())
    }
}
