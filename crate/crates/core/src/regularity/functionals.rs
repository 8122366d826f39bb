use std::sync::OnceLock;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::grid::{Grid, Lattice, ScalarField, Side, VectorField};
use crate::group::{unit_ball_volume, GroupDescriptor};
use crate::operators::SubordinationOperator;
use crate::scalar::Real;

/// Volume of the unit gauge ball, computed once per group.
pub(crate) fn unit_volume(g: &GroupDescriptor) -> f64 {
    static CACHE: [OnceLock<f64>; 4] = [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let (slot, res) = if g.is_heisenberg() { (0, 160) } else { (g.n, if g.n == 3 { 120 } else { 400 }) };
    *CACHE[slot].get_or_init(|| unit_ball_volume(g, res))
}

/// Lattice offsets `d` with `ρ(d) < r`, without periodic duplicates.
pub fn ball_offsets<T: Real>(grid: &Grid<T>, r: T) -> Vec<Lattice> {
    let heis = grid.group().is_heisenberg();
    let mut reach = [0i64; 3];
    for (a, reach_a) in reach.iter_mut().enumerate().take(grid.dims()) {
        let span = if heis && a == 2 { r * r / T::lit(4.0) } else { r };
        let cap = (grid.count(a) / 2) as i64 - 1;
        *reach_a = (span / grid.spacing(a)).ceil().to_i64().unwrap_or(0).min(cap).max(0);
    }
    let mut out = Vec::new();
    for a in -reach[0]..=reach[0] {
        for b in -reach[1]..=reach[1] {
            for c in -reach[2]..=reach[2] {
                let d = [a, b, c];
                if grid.lattice_gauge(&d) < r {
                    out.push(d);
                }
            }
        }
    }
    out
}

/// Sampled bmo norm: the larger of the sup of mean oscillations over balls
/// of volume at most 1 and the sup of `|f|` averages over larger balls.
///
/// Radii are drawn log-uniformly from 16 levels between twice the lattice
/// resolution and the inner radius of the box; centres uniformly. A ball
/// counts as small when `v_N r^N ≤ 1`.
pub fn bmo_norm<T: Real, R: Rng + ?Sized>(f: &ScalarField<T>, ball_samples: usize, rng: &mut R) -> f64 {
    let g = &f.grid;
    let n = g.group().homogeneous_dim as i32;
    let lo = (g.gauge_resolution() * T::lit(2.0)).as_f64();
    let hi = g.inner_radius().as_f64().max(lo);
    let levels = 16;
    let radii: Vec<f64> = (0..levels).map(|i| lo * (hi / lo).powf(i as f64 / (levels - 1) as f64)).collect();
    let offsets: Vec<Vec<Lattice>> = radii.iter().map(|&r| ball_offsets(g, T::lit(r))).collect();
    let v_n = unit_volume(g.group());
    let (mut small, mut large) = (0.0f64, 0.0f64);
    let mut vals = Vec::new();
    for _ in 0..ball_samples {
        let level = rng.random_range(0..levels);
        let centre = g.lattice(rng.random_range(0..g.len()));
        vals.clear();
        for d in &offsets[level] {
            if let Some(k) = g.index_of(&g.lattice_mul(&centre, d)) {
                vals.push(f.values[k].as_f64());
            }
        }
        if vals.is_empty() {
            continue;
        }
        let count = vals.len() as f64;
        if v_n * radii[level].powi(n) <= 1.0 {
            let mean = vals.iter().sum::<f64>() / count;
            small = small.max(vals.iter().map(|v| (v - mean).abs()).sum::<f64>() / count);
        } else {
            large = large.max(vals.iter().map(|v| v.abs()).sum::<f64>() / count);
        }
    }
    small.max(large)
}

/// Largest component-wise [`bmo_norm`] of a vector field.
pub fn bmo_norm_vector<T: Real, R: Rng + ?Sized>(v: &VectorField<T>, ball_samples: usize, rng: &mut R) -> f64 {
    (0..v.components.len()).map(|j| bmo_norm(&v.component(j), ball_samples, rng)).fold(0.0, f64::max)
}

/// `(∫∫ |f(x·y) − f(x)|^p / ρ(y)^{N+sp} dy dx)^{1/p}` over lattice offsets
/// with `ρ(y)` at least the lattice resolution.
pub fn besov_seminorm<T: Real>(f: &ScalarField<T>, s: f64, p: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) || !(p >= 1.0) || !p.is_finite() {
        return invalid(format!("besov_seminorm needs s ∈ (0,1) and finite p ≥ 1, got s={s}, p={p}"));
    }
    let g = &f.grid;
    let n = g.group().homogeneous_dim as f64;
    let res = g.gauge_resolution().as_f64() * (1.0 - 1e-12);
    let vol = g.cell_volume().as_f64();
    let mut reach = [0i64; 3];
    for (a, r) in reach.iter_mut().enumerate().take(g.dims()) {
        *r = (g.count(a) / 2) as i64 - 1;
    }
    let mut total = 0.0;
    for a in -reach[0]..=reach[0] {
        for b in -reach[1]..=reach[1] {
            for c in -reach[2]..=reach[2] {
                let d = [a, b, c];
                let rho = g.lattice_gauge(&d).as_f64();
                if rho < res {
                    continue;
                }
                let shifted = g.translate(&f.values, &d, Side::Right);
                let inner: f64 = shifted.iter().zip(&f.values).map(|(x, y)| (*x - *y).abs().as_f64().powf(p)).sum();
                total += inner * vol * vol / rho.powf(n + s * p);
            }
        }
    }
    Ok(total.powf(1.0 / p))
}

/// Sampled `sup |f(x·y) − f(x)| / ρ(y)^γ`.
///
/// `x` runs over an 8-per-axis sublattice (which contains the origin when
/// the counts are multiples of 16) plus `samples` uniform points; `y` over
/// dyadic lattice-axis steps plus `samples` uniform offsets, all with
/// `ρ(y)` between the lattice resolution and half the inner radius.
pub fn holder_seminorm<T: Real, R: Rng + ?Sized>(f: &ScalarField<T>, gamma: f64, samples: usize, rng: &mut R) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return invalid(format!("holder exponent must lie in (0,1), got {gamma}"));
    }
    let g = &f.grid;
    let lo = g.gauge_resolution().as_f64() * (1.0 - 1e-12);
    let hi = g.inner_radius().as_f64() / 2.0;
    let mut xs: Vec<Lattice> = Vec::new();
    let stride: Vec<usize> = (0..3).map(|a| if a < g.dims() { (g.count(a) / 8).max(1) } else { 1 }).collect();
    for k in 0..g.len() {
        let i = g.unflat(k);
        if (0..g.dims()).all(|a| i[a] % stride[a] == 0) {
            xs.push(g.lattice(k));
        }
    }
    for _ in 0..samples {
        xs.push(g.lattice(rng.random_range(0..g.len())));
    }
    let mut ys: Vec<(Lattice, f64)> = Vec::new();
    for a in 0..g.dims() {
        let mut step = 1i64;
        while step < (g.count(a) / 2) as i64 {
            for sgn in [-1, 1] {
                let mut d = [0i64; 3];
                d[a] = sgn * step;
                let rho = g.lattice_gauge(&d).as_f64();
                if rho >= lo && rho <= hi {
                    ys.push((d, rho));
                }
            }
            step *= 2;
        }
    }
    let mut tries = 0;
    let mut drawn = 0;
    while drawn < samples && tries < 100 * samples.max(1) {
        tries += 1;
        let mut d = [0i64; 3];
        for (a, v) in d.iter_mut().enumerate().take(g.dims()) {
            let m = (g.count(a) / 2) as i64;
            *v = rng.random_range(-m + 1..m);
        }
        let rho = g.lattice_gauge(&d).as_f64();
        if rho >= lo && rho <= hi {
            ys.push((d, rho));
            drawn += 1;
        }
    }
    let mut best = 0.0f64;
    for x in &xs {
        let Some(kx) = g.index_of(x) else { continue };
        let fx = f.values[kx].as_f64();
        for (d, rho) in &ys {
            if let Some(k) = g.index_of(&g.lattice_mul(x, d)) {
                best = best.max((f.values[k].as_f64() - fx).abs() / rho.powf(gamma));
            }
        }
    }
    Ok(best)
}

/// Smooth radial cut-off `φ(δ_{1/R} x)`: 1 for `ρ ≤ R/2`, 0 for `ρ ≥ R`.
pub fn cutoff<T: Real>(grid: &Grid<T>, r: T) -> ScalarField<T> {
    let bump = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let vals = (0..grid.len())
        .map(|k| {
            let s = (grid.lattice_gauge(&grid.lattice(k)) / r).as_f64();
            let (a, b) = (bump(1.0 - s), bump(s - 0.5));
            T::lit(if a + b > 0.0 { a / (a + b) } else { 0.0 })
        })
        .collect();
    ScalarField::new(grid.clone(), vals).expect("grid-sized")
}

/// `[Λ, φ]f = Λ(φf) − φΛf`.
pub fn commutator<T: Real>(op: &SubordinationOperator<T>, phi: &ScalarField<T>, f: &ScalarField<T>) -> Result<ScalarField<T>> {
    let a = op.apply(&phi.mul(f)?)?;
    let b = phi.mul(&op.apply(f)?)?;
    a.sub(&b)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutatorRow {
    pub r: f64,
    pub commutator_norm: f64,
    pub f_norm: f64,
    /// `‖[Λ, φ_R] f_R‖_p / ‖f_R‖_p`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorReport {
    pub p: f64,
    pub rows: Vec<CommutatorRow>,
    /// Least-squares slope of `ln ratio` against `ln R`.
    pub slope: f64,
}

/// Evaluates the normalized commutator for each radius with `f = make_f(R)`.
pub fn commutator_check<T: Real>(
    op: &SubordinationOperator<T>,
    radii: &[T],
    make_f: impl Fn(T) -> ScalarField<T>,
    p: f64,
) -> Result<CommutatorReport> {
    let mut rows = Vec::new();
    for &r in radii {
        let f = make_f(r);
        let phi = cutoff(&op.kernel().grid, r);
        let c = commutator(op, &phi, &f)?;
        let (cn, fnorm) = (c.lp_norm(p)?.as_f64(), f.lp_norm(p)?.as_f64());
        rows.push(CommutatorRow { r: r.as_f64(), commutator_norm: cn, f_norm: fnorm, ratio: if fnorm > 0.0 { cn / fnorm } else { 0.0 } });
    }
    let slope = log_log_slope(&rows.iter().map(|r| r.r).collect::<Vec<_>>(), &rows.iter().map(|r| r.ratio).collect::<Vec<_>>());
    Ok(CommutatorReport { p, rows, slope })
}

/// Least-squares slope of `ln y` against `ln x` (NaN with fewer than two
/// positive pairs).
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    num / den
}
