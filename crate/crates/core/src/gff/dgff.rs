//! Discrete Gaussian free field on `(1/N) Z^2 ∩ [0,1]^2` with zero boundary.
//!
//! The density `exp(-1/2 sum_{x~y} (h(x) - h(y))^2)`, each edge counted
//! once, has precision matrix `L = 4I - A` on the interior vertices.

use std::f64::consts::PI;

use ndarray::{s, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::StreamSeed;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteField {
    n: usize,
    /// `(N+1) x (N+1)`, indexed by lattice coordinates; boundary is zero.
    values: Array2<f64>,
    seed: Option<StreamSeed>,
}

impl DiscreteField {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn seed(&self) -> Option<StreamSeed> {
        self.seed
    }

    /// Value at lattice point `(i/N, l/N)`.
    pub fn at(&self, i: usize, l: usize) -> f64 {
        self.values[[i, l]]
    }
}

fn check_side(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("grid side must be >= 2, got {n}")));
    }
    Ok(())
}

/// Orthonormal eigenvectors of the 1-D Dirichlet Laplacian:
/// `Phi[a-1, j-1] = sqrt(2/N) sin(j pi a / N)`.
fn eigenbasis(n: usize) -> Array2<f64> {
    let norm = (2.0 / n as f64).sqrt();
    Array2::from_shape_fn((n - 1, n - 1), |(a, j)| {
        norm * (((a + 1) * (j + 1)) as f64 * PI / n as f64).sin()
    })
}

fn eigenvalue(n: usize, j: usize, k: usize) -> f64 {
    let t = PI / n as f64;
    4.0 - 2.0 * (j as f64 * t).cos() - 2.0 * (k as f64 * t).cos()
}

/// Exact sample via the Laplacian eigenbasis: independent normals per mode
/// scaled by `1/sqrt(lambda)`, then the inverse transform.
pub fn sample_dgff(n: usize, seed: StreamSeed) -> Result<DiscreteField> {
    check_side(n)?;
    let sampler = DgffSampler::new(n)?;
    Ok(sampler.sample(seed))
}

/// Reusable basis and spectrum for repeated draws at one grid side.
#[derive(Clone, Debug)]
pub struct DgffSampler {
    n: usize,
    basis: Array2<f64>,
    inv_sqrt_lambda: Array2<f64>,
}

impl DgffSampler {
    pub fn new(n: usize) -> Result<Self> {
        check_side(n)?;
        let inv_sqrt_lambda =
            Array2::from_shape_fn((n - 1, n - 1), |(j, k)| 1.0 / eigenvalue(n, j + 1, k + 1).sqrt());
        Ok(Self {
            n,
            basis: eigenbasis(n),
            inv_sqrt_lambda,
        })
    }

    pub fn sample(&self, seed: StreamSeed) -> DiscreteField {
        let m = self.n - 1;
        let mut rng = seed.rng();
        let z = Array2::from_shape_fn((m, m), |(j, k)| {
            rng.sample::<f64, _>(StandardNormal) * self.inv_sqrt_lambda[[j, k]]
        });
        let interior = self.basis.dot(&z).dot(&self.basis.t());
        let mut values = Array2::zeros((self.n + 1, self.n + 1));
        values.slice_mut(s![1..self.n, 1..self.n]).assign(&interior);
        DiscreteField {
            n: self.n,
            values,
            seed: Some(seed),
        }
    }
}

fn interior_index(n: usize, p: (usize, usize)) -> Result<(usize, usize)> {
    let (i, l) = p;
    if i == 0 || l == 0 || i >= n || l >= n {
        return Err(Error::OutOfDomain {
            x: i as f64 / n as f64,
            y: l as f64 / n as f64,
            domain: "interior lattice",
        });
    }
    Ok((i - 1, l - 1))
}

/// `L u` on the interior block, zero outside.
fn apply_laplacian(u: &Array2<f64>, out: &mut Array2<f64>) {
    let (r, c) = u.dim();
    for i in 0..r {
        for l in 0..c {
            let mut v = 4.0 * u[[i, l]];
            if i > 0 {
                v -= u[[i - 1, l]];
            }
            if i + 1 < r {
                v -= u[[i + 1, l]];
            }
            if l > 0 {
                v -= u[[i, l - 1]];
            }
            if l + 1 < c {
                v -= u[[i, l + 1]];
            }
            out[[i, l]] = v;
        }
    }
}

/// Discrete Green's function column `G_N(., y)` on the interior block,
/// from a conjugate-gradient solve of `L g = 1_y`.
pub fn dgff_green_column(n: usize, y: (usize, usize)) -> Result<Array2<f64>> {
    check_side(n)?;
    let (yi, yl) = interior_index(n, y)?;
    let m = n - 1;
    let mut b = Array2::<f64>::zeros((m, m));
    b[[yi, yl]] = 1.0;
    let mut x = Array2::<f64>::zeros((m, m));
    let mut r = b.clone();
    let mut p = r.clone();
    let mut ap = Array2::<f64>::zeros((m, m));
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    // L is SPD with condition number ~ N^2; CG converges in O(N) steps.
    for _ in 0..(20 * m * m).max(50) {
        if rr.sqrt() < 1e-14 {
            break;
        }
        apply_laplacian(&p, &mut ap);
        let pap: f64 = p.iter().zip(ap.iter()).map(|(a, b)| a * b).sum();
        let alpha = rr / pap;
        x.scaled_add(alpha, &p);
        r.scaled_add(-alpha, &ap);
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        p *= rr_new / rr;
        p += &r;
        rr = rr_new;
    }
    Ok(x)
}

/// `G_N(x, y) = (L^{-1})_{xy}` for interior lattice points given as
/// integer coordinates `(i, l)` of `(i/N, l/N)`.
pub fn dgff_covariance(n: usize, x: (usize, usize), y: (usize, usize)) -> Result<f64> {
    let (xi, xl) = interior_index(n, x)?;
    Ok(dgff_green_column(n, y)?[[xi, xl]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_is_zero() {
        let f = sample_dgff(16, StreamSeed::new(2, 0)).unwrap();
        for i in 0..=16 {
            for v in [f.at(0, i), f.at(16, i), f.at(i, 0), f.at(i, 16)] {
                assert_eq!(v, 0.0);
            }
        }
        assert!(f.at(8, 8) != 0.0);
    }

    #[test]
    fn single_vertex() {
        assert!((dgff_covariance(2, (1, 1), (1, 1)).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(
            dgff_covariance(2, (0, 1), (1, 1)),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(sample_dgff(1, StreamSeed::new(0, 0)).is_err());
    }

    #[test]
    fn green_solves_laplacian() {
        let n = 6;
        let g = dgff_green_column(n, (2, 3)).unwrap();
        let mut lg = Array2::zeros(g.dim());
        apply_laplacian(&g, &mut lg);
        for ((i, l), v) in lg.indexed_iter() {
            let want = if (i, l) == (1, 2) { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_covariance_matches_solver() {
        // Phi diag(1/lambda) Phi^T is the eigen-route inverse.
        let n = 7;
        let phi = eigenbasis(n);
        let lam = Array2::from_shape_fn((n - 1, n - 1), |(j, k)| 1.0 / eigenvalue(n, j + 1, k + 1));
        let (x, y) = ((2, 5), (4, 1));
        let mut s = 0.0;
        for j in 0..n - 1 {
            for k in 0..n - 1 {
                s += phi[[x.0 - 1, j]] * phi[[x.1 - 1, k]] * lam[[j, k]] * phi[[y.0 - 1, j]] * phi[[y.1 - 1, k]];
            }
        }
        assert!((s - dgff_covariance(n, x, y).unwrap()).abs() < 1e-12);
    }
}
