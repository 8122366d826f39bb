use crate::error::Result;
use crate::grid::ScalarField;
use crate::group::left_derivative;
use crate::scalar::Real;

/// `J f = −Σ_j X_j(X_j f)` by composing centred differences.
pub fn sublaplacian_apply<T: Real>(f: &ScalarField<T>) -> Result<ScalarField<T>> {
    let mut out = ScalarField::zeros(&f.grid);
    out.time = f.time;
    for j in 0..f.grid.group().m {
        let xx = left_derivative(j, &left_derivative(j, f)?)?;
        for (o, v) in out.values.iter_mut().zip(&xx.values) {
            *o -= *v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Boundary, Grid};

    #[test]
    fn cosine_eigenfunction_on_torus() {
        let m = 128;
        let g = Grid::<f64>::euclidean(&[std::f64::consts::TAU], &[m], Boundary::Periodic).unwrap();
        let h = g.spacing(0);
        for k in [1.0, 3.0] {
            let f = g.sample(|x| (k * x[0]).cos());
            let jf = sublaplacian_apply(&f).unwrap();
            let err = jf.values.iter().zip(&f.values).fold(0.0f64, |a, (j, c)| a.max((j - k * k * c).abs()));
            assert!(err < 0.5 * k.powi(4) * h * h, "k={k} err={err}");
        }
    }

    #[test]
    fn constants_and_positivity() {
        let g = Grid::<f64>::heisenberg(4.0, 16, 32, Boundary::Periodic).unwrap();
        let c = ScalarField::constant(&g, 2.0);
        assert!(sublaplacian_apply(&c).unwrap().max_abs() < 1e-12);
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let vals: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f = ScalarField::new(g.clone(), vals).unwrap();
            let jf = sublaplacian_apply(&f).unwrap();
            assert!(jf.inner(&f).unwrap() >= -1e-10);
        }
    }
}
