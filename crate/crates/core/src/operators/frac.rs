//! Two realizations of `J^{1/2}`.
//!
//! *Subordination*: `J^{1/2}f = (2√π)^{-1} ∫₀^∞ t^{-3/2}(f − e^{−tJ}f) dt`,
//! discretized by the trapezoid rule in `ln t` on a geometric grid plus
//! closed tails. The result has the form `a·f − Q∗f` with a nonnegative
//! kernel `Q` of mass `a`, so constants are annihilated exactly.
//!
//! *Singular integral*: `c·v.p.∫(f(x) − f(y)) ρ(y⁻¹x)^{-(N+1)} dy`, with the
//! ball `ρ < r_cut` replaced by its second-order Taylor contribution and the
//! region outside the box by a tail term. The constant `c` is calibrated on
//! ℝⁿ against `|k|cos(kx)` and transferred to H¹ through the x₃-fibre
//! integral of the kernel.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::fft::{fft_nd, to_complex};
use crate::grid::{Boundary, ConvolutionPlan, Grid, ScalarField};
use crate::group::gauge_coords;
use crate::scalar::Real;

use super::heat::{gaussian_kernel, march, resolvable_time, spike, Stencil};
use super::sublaplacian::sublaplacian_apply;

/// Quadrature controls of the subordination integral.
#[derive(Clone, Copy, Debug)]
pub struct SubordinationConfig<T> {
    pub nodes_per_decade: usize,
    /// Lower end of the time grid (defaults to the resolvable scale).
    pub t_min: Option<T>,
    /// Upper end (defaults to a box-size fraction squared).
    pub t_max: Option<T>,
    /// H¹ heat-kernel stencil.
    pub stencil: Stencil,
}

impl<T: Real> Default for SubordinationConfig<T> {
    fn default() -> Self {
        Self { nodes_per_decade: 64, t_min: None, t_max: None, stencil: Stencil::Sixth }
    }
}

/// Default lower time. On H¹ the quadrature is taken well inside the lattice
/// scale so that the lower tail `2√t·Jf` is negligible and the operator
/// converges to the square root of the discrete generator.
pub fn default_t_min<T: Real>(grid: &Grid<T>) -> T {
    if grid.group().is_heisenberg() {
        grid.h_min().powi(2) / T::lit(64.0)
    } else {
        resolvable_time(grid)
    }
}

/// Default upper time: `(L/4)²` on H¹ and zero-padded boxes, `(L/2)²` on
/// periodic ℝⁿ where the kernel is periodized exactly.
pub fn default_t_max<T: Real>(grid: &Grid<T>) -> T {
    let l = (0..grid.group().m).fold(T::infinity(), |m, a| m.min(grid.extent(a)));
    let frac = if !grid.group().is_heisenberg() && grid.is_periodic() { T::lit(0.5) } else { T::lit(0.25) };
    (l * frac).powi(2)
}

/// `J^{1/2} ≈ a − Q∗ − m·mean` from the subordination integral (`m = 0` on
/// zero-padded boxes).
pub struct SubordinationOperator<T> {
    grid: Grid<T>,
    a: T,
    mean_coef: T,
    kernel: ScalarField<T>,
    plan: ConvolutionPlan<T>,
    nodes: Vec<T>,
}

impl<T: Real> SubordinationOperator<T> {
    pub fn new(grid: &Grid<T>, cfg: SubordinationConfig<T>) -> Result<Self> {
        let t_min = cfg.t_min.unwrap_or_else(|| default_t_min(grid));
        let t_max = cfg.t_max.unwrap_or_else(|| default_t_max(grid));
        // Sampled Gaussians stop being a semigroup below the resolvable time;
        // the lattice march is exact for every t.
        let floor = if grid.group().is_heisenberg() { T::zero() } else { resolvable_time(grid) };
        if !(t_min > T::zero()) || t_min < floor {
            return Err(Error::Resolution(format!("t_min {t_min} below the resolvable scale {floor}")));
        }
        if !(t_max > t_min) {
            return Err(Error::Resolution(format!("empty subordination range [{t_min}, {t_max}]: box too small")));
        }
        let span = (t_max / t_min).ln();
        let decades = span / T::LN_10();
        let n = (decades * T::count(cfg.nodes_per_decade.max(1))).ceil().to_usize().unwrap_or(1).max(1);
        let du = span / T::count(n);
        let nodes: Vec<T> = (0..=n).map(|i| t_min * (du * T::count(i)).exp()).collect();
        let pref = T::one() / (T::lit(2.0) * T::PI().sqrt());
        let mut coef: Vec<T> = nodes
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let w = if i == 0 || i == n { du / T::lit(2.0) } else { du };
                pref * w / t.sqrt()
            })
            .collect();
        // Lower tail: f − P_t f ≈ t·Jf below t_min. Upper tail: P_t f relaxes
        // to the box mean like (t_max/t)^β with β = N/2.
        coef[0] += pref * T::lit(2.0) / t_min.sqrt();
        let beta = T::count(grid.group().homogeneous_dim as usize) / T::lit(2.0);
        let upper = pref / (t_max.sqrt() * (beta + T::lit(0.5)));
        let a: T = coef.iter().copied().sum::<T>() + pref * T::lit(2.0) / t_max.sqrt();
        coef[n] += upper;
        let mean_coef = if grid.is_periodic() { a - coef.iter().copied().sum::<T>() } else { T::zero() };

        let mut q = vec![T::zero(); grid.len()];
        if grid.group().is_heisenberg() {
            march(grid, cfg.stencil, spike(grid, cfg.stencil), &nodes, |i, u| {
                for (acc, v) in q.iter_mut().zip(u) {
                    *acc += coef[i] * *v;
                }
            });
        } else {
            for (i, &t) in nodes.iter().enumerate() {
                let mut g = gaussian_kernel(grid, t);
                if grid.is_periodic() {
                    let m = g.integrate();
                    g = g.scale(T::one() / m);
                }
                for (acc, v) in q.iter_mut().zip(&g.values) {
                    *acc += coef[i] * *v;
                }
            }
        }
        let kernel = symmetrize(&ScalarField::new(grid.clone(), q)?);
        let plan = ConvolutionPlan::new(&kernel);
        Ok(Self { grid: grid.clone(), a, mean_coef, kernel, plan, nodes })
    }

    /// Diagonal coefficient `a` (the mass of `Q` plus the mean coefficient).
    pub fn diagonal(&self) -> T {
        self.a
    }

    /// The kernel `Q`.
    pub fn kernel(&self) -> &ScalarField<T> {
        &self.kernel
    }

    /// Coefficient of the box-mean term.
    pub fn mean_coefficient(&self) -> T {
        self.mean_coef
    }

    /// Net diagonal rate `a − vol·Q(e) − m·vol/|box|`; an explicit Euler step
    /// of length `dt` is monotone iff `dt·rate ≤ 1`.
    pub fn diagonal_rate(&self) -> T {
        let g = &self.grid;
        let q0 = g.index_of(&[0, 0, 0]).map_or(T::zero(), |k| self.kernel.values[k]);
        self.a - g.cell_volume() * q0 - self.mean_coef * g.cell_volume() / g.volume()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn plan(&self) -> &ConvolutionPlan<T> {
        &self.plan
    }

    pub fn apply(&self, f: &ScalarField<T>) -> Result<ScalarField<T>> {
        self.grid.check_same(&f.grid)?;
        let q = self.plan.apply(f)?;
        let mean = if self.grid.is_periodic() { f.integrate() / self.grid.volume() } else { T::zero() };
        let shift = self.mean_coef * mean;
        Ok(f.with_values(f.values.iter().zip(&q.values).map(|(&v, &w)| self.a * v - w - shift).collect()))
    }

    /// Fourier multiplier of the operator on a periodic Euclidean grid, in
    /// FFT index order.
    pub fn spectral_symbol(&self) -> Result<Vec<T>> {
        let g = &self.grid;
        if g.group().is_heisenberg() || !g.is_periodic() {
            return Err(Error::InvalidInput("spectral symbol needs a periodic Euclidean grid".into()));
        }
        let counts = g.counts();
        let mut rolled = vec![T::zero(); g.len()];
        for k in 0..g.len() {
            let l = g.lattice(k);
            let t = [
                l[0].rem_euclid(counts[0] as i64) as usize,
                l[1].rem_euclid(counts[1] as i64) as usize,
                l[2].rem_euclid(counts[2] as i64) as usize,
            ];
            rolled[g.flat(t)] = self.kernel.values[k];
        }
        let mut c = to_complex(&rolled);
        fft_nd(&mut c, counts, 3, false);
        let vol = g.cell_volume();
        let mut symbol: Vec<T> = c.iter().map(|z| self.a - z.re * vol).collect();
        symbol[0] -= self.mean_coef;
        Ok(symbol)
    }
}

/// `Q(x) ← (Q(x) + Q(x⁻¹))/2`.
fn symmetrize<T: Real>(k: &ScalarField<T>) -> ScalarField<T> {
    let g = &k.grid;
    let mut out = k.clone();
    for i in 0..g.len() {
        let l = g.lattice(i);
        if let Some(j) = g.index_of(&[-l[0], -l[1], -l[2]]) {
            out.values[i] = (k.values[i] + k.values[j]) / T::lit(2.0);
        }
    }
    out
}

/// `J^{1/2} f` by subordination with default quadrature.
pub fn frac_half_subordination<T: Real>(f: &ScalarField<T>) -> Result<ScalarField<T>> {
    SubordinationOperator::new(&f.grid, SubordinationConfig::default())?.apply(f)
}

/// Principal-value quadrature of the singular-integral form of `J^{1/2}`.
pub struct SingularOperator<T> {
    grid: Grid<T>,
    constant: T,
    r_cut: T,
    lattice_mass: T,
    tail: T,
    inner: T,
    plan: ConvolutionPlan<T>,
}

/// Images summed on each side for periodic Euclidean kernels.
fn image_count(dims: usize) -> i64 {
    match dims {
        1 => 64,
        2 => 6,
        _ => 2,
    }
}

/// `∫_{outside the box} ρ^{-(N+1)} dz` for a box of half-extents `half`.
///
/// In dilation-polar coordinates this is `N·∫_{ρ<1} dz / r_box(z/ρ(z))`,
/// where `r_box(ω)` is the dilation factor at which `δ_r ω` leaves the box.
fn exterior_integral(heis: bool, exps: &[u32], half: &[f64]) -> f64 {
    let n = half.len();
    let nh: f64 = exps.iter().map(|&a| a as f64).sum();
    let bounds: Vec<f64> = if heis { vec![1.0, 1.0, 0.25] } else { vec![1.0; n] };
    let res: usize = match n {
        1 => 2,
        2 => 600,
        _ => 120,
    };
    let cell: f64 = bounds.iter().map(|b| 2.0 * b / res as f64).product();
    let mut sum = 0.0;
    let mut c = vec![0.0; n];
    for k in 0..res.pow(n as u32) {
        let mut r = k;
        for i in 0..n {
            let j = r % res;
            r /= res;
            c[i] = -bounds[i] + (j as f64 + 0.5) * 2.0 * bounds[i] / res as f64;
        }
        let rho = gauge_coords(heis, &c);
        if rho >= 1.0 || rho == 0.0 {
            continue;
        }
        let mut rbox = f64::INFINITY;
        for i in 0..n {
            let w = (c[i] / rho.powi(exps[i] as i32)).abs();
            if w > 0.0 {
                rbox = rbox.min((half[i] / w).powf(1.0 / exps[i] as f64));
            }
        }
        sum += 1.0 / rbox;
    }
    nh * sum * cell
}

/// Taylor coefficient of the excluded ball: `∫_{ρ<r}(f(x) − f(x·z))K ≈ inner·r·Jf`.
fn inner_coefficient(heis: bool, n: usize) -> f64 {
    use std::f64::consts::PI;
    if heis {
        PI / 4.0
    } else {
        let sphere = match n {
            1 => 2.0,
            2 => 2.0 * PI,
            _ => 4.0 * PI,
        };
        sphere / (2.0 * n as f64)
    }
}

impl<T: Real> SingularOperator<T> {
    /// Operator with the calibrated constant and default cut-off radius
    /// (twice the lattice gauge resolution).
    pub fn new(grid: &Grid<T>) -> Result<Self> {
        let c = T::lit(calibrated_constant(grid.group().is_heisenberg(), grid.dims()));
        Self::with(grid, c, None)
    }

    /// Operator with an explicit constant and optional cut-off.
    pub fn with(grid: &Grid<T>, constant: T, r_cut: Option<T>) -> Result<Self> {
        let res = grid.gauge_resolution();
        let r_cut = r_cut.unwrap_or(T::lit(2.0) * res);
        if r_cut < res {
            return Err(Error::Resolution(format!("r_cut {r_cut} is below the lattice gauge resolution {res}")));
        }
        let heis = grid.group().is_heisenberg();
        let dims = grid.dims();
        let exps = grid.group().exponents.clone();
        let power = (grid.group().homogeneous_dim + 1) as i32;
        let images: Vec<i64> = (0..3)
            .map(|a| match (grid.is_periodic(), heis, a < dims) {
                (true, false, true) => image_count(dims),
                // The centre wraps consistently; take enough vertical images
                // for the vertical gauge reach to double the horizontal one.
                (true, true, true) if a == 2 => {
                    let reach = grid.extent(0).min(grid.extent(1)).as_f64();
                    let z = reach * reach / 4.0;
                    ((z / grid.extent(2).as_f64() - 0.5).ceil().max(0.0)) as i64
                }
                _ => 0,
            })
            .collect();
        let mut k = ScalarField::zeros(grid);
        for i in 0..grid.len() {
            let z = grid.coords(i);
            let mut s = T::zero();
            let span = |a: usize| images[a];
            for n0 in -span(0)..=span(0) {
                for n1 in -span(1)..=span(1) {
                    for n2 in -span(2)..=span(2) {
                        let shift = [n0, n1, n2];
                        let mut w = [T::zero(); 3];
                        for a in 0..dims {
                            w[a] = z[a] + T::from_i64(shift[a]).unwrap() * grid.extent(a);
                        }
                        let rho = gauge_coords(heis, &w[..dims]);
                        if rho >= r_cut {
                            s += rho.powi(-power);
                        }
                    }
                }
            }
            k.values[i] = s;
        }
        let half: Vec<f64> = (0..dims)
            .map(|a| grid.extent(a).as_f64() * (2 * images[a] + 1) as f64 / 2.0)
            .collect();
        let tail = T::lit(exterior_integral(heis, &exps, &half));
        let lattice_mass = k.integrate();
        let plan = ConvolutionPlan::new(&k);
        Ok(Self {
            grid: grid.clone(),
            constant,
            r_cut,
            lattice_mass,
            tail,
            inner: T::lit(inner_coefficient(heis, dims)) * r_cut,
            plan,
        })
    }

    pub fn constant(&self) -> T {
        self.constant
    }

    pub fn r_cut(&self) -> T {
        self.r_cut
    }

    /// Applies the operator.
    ///
    /// On a periodic box the exterior region sees the box mean of `f`; on a
    /// zero-padded box it sees zero.
    pub fn apply(&self, f: &ScalarField<T>) -> Result<ScalarField<T>> {
        self.grid.check_same(&f.grid)?;
        let kf = self.plan.apply(f)?;
        let jf = sublaplacian_apply(f)?;
        let outside = match self.grid.boundary() {
            Boundary::Periodic => f.integrate() / self.grid.volume(),
            Boundary::ZeroPadded => T::zero(),
        };
        let c = self.constant;
        let values = (0..f.values.len())
            .map(|i| {
                let v = f.values[i];
                c * (v * self.lattice_mass - kf.values[i] + self.tail * (v - outside) + self.inner * jf.values[i])
            })
            .collect();
        Ok(f.with_values(values))
    }
}

/// `J^{1/2} f` by the singular-integral realization.
pub fn frac_half_singular<T: Real>(f: &ScalarField<T>) -> Result<ScalarField<T>> {
    SingularOperator::new(&f.grid)?.apply(f)
}

/// `B = ∫_ℝ (1+u²)^{-5/4} du = √π Γ(3/4)/Γ(5/4)`.
pub const FIBRE_INTEGRAL: f64 = 1.772_453_850_905_516 * 1.225_416_702_465_177_6 / 0.906_402_477_055_477_1;

/// Least-squares constant matching the unit-constant singular quadrature to
/// `|k|` on cosines of the `dims`-torus of side 2π.
pub fn calibrate_euclidean(dims: usize) -> f64 {
    let m = match dims {
        1 => 256,
        2 => 64,
        _ => 24,
    };
    let tau = std::f64::consts::TAU;
    let grid = Grid::<f64>::euclidean(&vec![tau; dims], &vec![m; dims], Boundary::Periodic).expect("torus");
    let op = SingularOperator::with(&grid, 1.0, None).expect("operator");
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 1..=3 {
        let kf = k as f64;
        let f = grid.sample(|x| (kf * x[0]).cos() + if x.len() > 1 { (kf * x[1]).sin() } else { 0.0 });
        let s = op.apply(&f).expect("apply");
        let target = f.scale(kf);
        num += s.inner(&target).unwrap();
        den += s.inner(&s).unwrap();
    }
    num / den
}

/// Calibrated normalization of the singular integral.
///
/// ℝⁿ uses [`calibrate_euclidean`]. On H¹, for `f` independent of x₃ one has
/// `J = −Δ_{x₁x₂}` and `∫ρ^{-5}dx₃ = (B/4)|x'|^{-3}`, so `c_H = 4c₂/B`.
pub fn calibrated_constant(heisenberg: bool, dims: usize) -> f64 {
    static CACHE: [OnceLock<f64>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    if heisenberg {
        let c2 = *CACHE[1].get_or_init(|| calibrate_euclidean(2));
        4.0 * c2 / FIBRE_INTEGRAL
    } else {
        *CACHE[dims - 1].get_or_init(|| calibrate_euclidean(dims))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exterior_integral_closed_forms() {
        // ℝ¹: ∫_{|z|>R} z^{-2} = 2/R.
        assert!((exterior_integral(false, &[1], &[3.0]) - 2.0 / 3.0).abs() < 1e-12);
        // ℝ² with a huge box in one direction behaves like a slab: compare to
        // a direct polar evaluation of ∫_{outside square} |z|^{-3}.
        let half = 2.0;
        let mut direct = 0.0;
        let n = 20000;
        for i in 0..n {
            let th = (i as f64 + 0.5) * std::f64::consts::TAU / n as f64;
            let r = (half / th.cos().abs()).min(half / th.sin().abs());
            direct += 1.0 / r * std::f64::consts::TAU / n as f64;
        }
        let got = exterior_integral(false, &[1, 1], &[half, half]);
        assert!((got - direct).abs() / direct < 2e-3, "{got} {direct}");
    }

    #[test]
    fn fibre_integral_value() {
        let n = 400000;
        let l = 4000.0;
        let mut s = 0.0;
        for i in 0..n {
            let u = -l + (i as f64 + 0.5) * 2.0 * l / n as f64;
            s += (1.0 + u * u).powf(-1.25) * 2.0 * l / n as f64;
        }
        // Tail beyond |u| > L: 2∫_L^∞ u^{-5/2} du.
        s += 4.0 / (3.0 * l.powf(1.5));
        assert!((s - FIBRE_INTEGRAL).abs() < 1e-4, "{s} {FIBRE_INTEGRAL}");
    }

    #[test]
    fn heisenberg_inner_moment() {
        // ∫_{ρ<r} |z'|² ρ^{-5} dz = πr; check on the shell 1/4 < ρ < 1.
        let res = 200;
        let mut s = 0.0;
        let cell = (2.0 / res as f64) * (2.0 / res as f64) * (0.5 / res as f64);
        for i in 0..res {
            for j in 0..res {
                for k in 0..res {
                    let x = -1.0 + (i as f64 + 0.5) * 2.0 / res as f64;
                    let y = -1.0 + (j as f64 + 0.5) * 2.0 / res as f64;
                    let z = -0.25 + (k as f64 + 0.5) * 0.5 / res as f64;
                    let r = gauge_coords(true, &[x, y, z]);
                    if r < 1.0 && r > 0.25 {
                        s += (x * x + y * y) * r.powi(-5) * cell;
                    }
                }
            }
        }
        assert!((s - 0.75 * std::f64::consts::PI).abs() < 0.02, "{s}");
    }

    fn rel_err(a: &ScalarField<f64>, b: &ScalarField<f64>) -> f64 {
        a.sub(b).unwrap().lp_norm(2.0).unwrap() / b.lp_norm(2.0).unwrap()
    }

    #[test]
    fn euclidean_cosines_match_the_symbol() {
        let tau = std::f64::consts::TAU;
        let g = Grid::<f64>::euclidean(&[tau], &[256], Boundary::Periodic).unwrap();
        let sub = SubordinationOperator::new(&g, SubordinationConfig::default()).unwrap();
        let sing = SingularOperator::new(&g).unwrap();
        for k in [1.0, 3.0, 8.0] {
            let f = g.sample(|x| (k * x[0]).cos());
            assert!(rel_err(&sub.apply(&f).unwrap(), &f.scale(k)) < 1e-3);
            assert!(rel_err(&sing.apply(&f).unwrap(), &f.scale(k)) < 0.05);
        }
        let sym = sub.spectral_symbol().unwrap();
        for k in [1usize, 3, 8] {
            assert!((sym[k] - k as f64).abs() < 1e-3 * k as f64, "{}", sym[k]);
        }
        assert!(sym[0].abs() < 1e-10);
    }

    #[test]
    fn calibration_lands_near_closed_forms() {
        use std::f64::consts::PI;
        for (n, exact) in [(1, 1.0 / PI), (2, 0.5 / PI), (3, 1.0 / (PI * PI))] {
            let c = calibrated_constant(false, n);
            assert!((c - exact).abs() / exact < 0.03, "{n}: {c} vs {exact}");
        }
    }

    /// For x₃-independent data `J` reduces to the planar Laplacian, so both
    /// H¹ realizations must reproduce the planar symbol `|ξ|`.
    #[test]
    fn heisenberg_planar_reduction() {
        let h = Grid::<f64>::heisenberg(8.0, 32, 64, Boundary::Periodic).unwrap();
        let p = Grid::<f64>::euclidean(&[8.0, 8.0], &[32, 32], Boundary::Periodic).unwrap();
        let prof = |x: &[f64]| (-(x[0] * x[0] + 0.5 * x[1] * x[1])).exp();
        let f = h.sample(prof);
        let mut c = to_complex(&p.sample(prof).values);
        fft_nd(&mut c, p.counts(), 3, false);
        let dk = std::f64::consts::TAU / 8.0;
        for k in 0..p.len() {
            let l = p.unflat(k);
            let kx = crate::fft::freq(l[0], 32) as f64 * dk;
            let ky = crate::fft::freq(l[1], 32) as f64 * dk;
            c[k] *= (kx * kx + ky * ky).sqrt();
        }
        fft_nd(&mut c, p.counts(), 3, true);
        let exact = f.with_values((0..h.len()).map(|k| {
            let l = h.unflat(k);
            c[p.flat([l[0], l[1], 0])].re / p.len() as f64
        }).collect());
        let sub = frac_half_subordination(&f).unwrap();
        let sing = frac_half_singular(&f).unwrap();
        assert!(rel_err(&sub, &exact) < 0.01);
        assert!(rel_err(&sing, &exact) < 0.05);
    }

    #[test]
    fn constants_vanish_and_form_is_symmetric_positive() {
        let h = Grid::<f64>::heisenberg(6.0, 16, 64, Boundary::Periodic).unwrap();
        let sub = SubordinationOperator::new(&h, SubordinationConfig { stencil: Stencil::Second, ..Default::default() }).unwrap();
        let sing = SingularOperator::new(&h).unwrap();
        let one = ScalarField::constant(&h, 1.0);
        assert!(sub.apply(&one).unwrap().max_abs() < 1e-10);
        assert!(sing.apply(&one).unwrap().max_abs() < 1e-10);
        assert!(sub.kernel().min() >= 0.0);
        let f = h.sample(|x| (-(x[0] - 0.5).powi(2) - x[1] * x[1] - 4.0 * x[2] * x[2]).exp());
        let g = h.sample(|x| (x[0] + 2.0 * x[1]).cos() * (-x[2] * x[2]).exp());
        let af = sub.apply(&f).unwrap();
        let ag = sub.apply(&g).unwrap();
        let (l, r) = (af.inner(&g).unwrap(), f.inner(&ag).unwrap());
        assert!((l - r).abs() < 1e-6 * l.abs().max(1.0), "{l} {r}");
        assert!(af.inner(&f).unwrap() > 0.0 && ag.inner(&g).unwrap() > 0.0);
    }

    #[test]
    fn degenerate_ranges_are_rejected() {
        let g = Grid::<f64>::euclidean(&[1.0], &[64], Boundary::Periodic).unwrap();
        let cfg = SubordinationConfig { t_min: Some(1e-9), ..Default::default() };
        assert!(matches!(SubordinationOperator::new(&g, cfg), Err(Error::Resolution(_))));
        let cfg = SubordinationConfig { t_min: Some(0.1), t_max: Some(0.05), ..Default::default() };
        assert!(matches!(SubordinationOperator::new(&g, cfg), Err(Error::Resolution(_))));
        assert!(matches!(SingularOperator::with(&g, 1.0, Some(1e-4)), Err(Error::Resolution(_))));
    }
}
