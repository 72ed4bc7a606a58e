//! The analytic model: the probability measure `nu_m`, monomial inner products,
//! the orthonormal basis `(e_p)`, the reproducing kernel, and a seeded sampler
//! for `nu_m`.
//!
//! The monomials satisfy `<z^p, z^q>_m = delta_pq * p!(m-|p|)!/m!`, so
//! `e_p(z) = (m!/(p!(m-|p|)!))^(1/2) z^p` is an orthonormal basis of the
//! polynomials of degree at most `m`. The closed forms are the canonical
//! definitions here; quadrature and Monte Carlo only appear as validation.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::combinatorics::{binomial, factorial_ratio_f64, BasisOrder, MultiIndex};
use crate::error::{Error, Result};
use crate::C64;

/// The pair `(n, m)`: complex dimension of the affine chart and Bergman weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpaceParams {
    n: usize,
    m: u32,
}

impl SpaceParams {
    pub fn new(n: usize, m: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        Ok(SpaceParams { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `dim P_m(C^n) = C(n+m, n)`.
    pub fn space_dimension(&self) -> usize {
        binomial(self.n as u32 + self.m, self.m) as usize
    }
}

fn check_index(params: SpaceParams, p: &MultiIndex) -> Result<()> {
    if p.len() != params.n {
        return Err(Error::DimensionMismatch(format!(
            "multi-index has length {}, expected {}",
            p.len(),
            params.n
        )));
    }
    if p.degree() > params.m {
        return Err(Error::InvalidParameter(format!(
            "|p| = {} exceeds weight m = {}",
            p.degree(),
            params.m
        )));
    }
    Ok(())
}

/// `<z^p, z^q>_m`: zero for `p != q`, and `p!(m-|p|)!/m!` on the diagonal,
/// evaluated exactly and converted to double.
pub fn monomial_inner_product(params: SpaceParams, p: &MultiIndex, q: &MultiIndex) -> Result<f64> {
    check_index(params, p)?;
    check_index(params, q)?;
    if p != q {
        return Ok(0.0);
    }
    let mut num: Vec<u32> = p.entries().to_vec();
    num.push(params.m - p.degree());
    Ok(factorial_ratio_f64(&num, &[params.m]))
}

/// The normalizing constant of `e_p`: `(m!/(p!(m-|p|)!))^(1/2)`.
pub fn orthonormal_coefficient(params: SpaceParams, p: &MultiIndex) -> Result<f64> {
    let norm2 = monomial_inner_product(params, p, p)?;
    Ok((1.0 / norm2).sqrt())
}

/// The reproducing kernel `K_m(z, w) = (1 + z_1 conj(w_1) + ... + z_n conj(w_n))^m`.
pub fn kernel(params: SpaceParams, z: &[C64], w: &[C64]) -> C64 {
    let mut pairing = C64::new(1.0, 0.0);
    for (zi, wi) in z.iter().zip(w.iter()) {
        pairing += zi * wi.conj();
    }
    pairing.powu(params.m)
}

fn mix_seed(seed: u64, n: usize, m: u32) -> u64 {
    // splitmix64 over (seed, n, m) so per-call generators are independent of
    // scheduling and of each other.
    let mut x = seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (u64::from(m) << 32);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Draws `count` i.i.d. samples from `nu_m`.
///
/// The squared moduli follow the inverted-Dirichlet law with density
/// proportional to `(1 + sum s_i)^-(n+m+1)` on the positive orthant. This is
/// sampled exactly as `s_i = G_i / G_0` with `G_i` standard exponential and
/// `G_0 ~ Gamma(m+1)`; phases are independent and uniform.
pub fn sample_measure(params: SpaceParams, seed: u64, count: usize) -> Result<Vec<Vec<C64>>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, params.n, params.m));
    let gamma = Gamma::new(f64::from(params.m) + 1.0, 1.0)
        .map_err(|e| Error::InvalidParameter(format!("gamma sampler: {e}")))?;
    let exponential = Gamma::new(1.0, 1.0).expect("unit exponential");
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let g0: f64 = gamma.sample(&mut rng).max(f64::MIN_POSITIVE);
        let mut z = Vec::with_capacity(params.n);
        for _ in 0..params.n {
            let s = exponential.sample(&mut rng) / g0;
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            z.push(Complex::from_polar(s.sqrt(), theta));
        }
        out.push(z);
    }
    Ok(out)
}

/// Evaluates every basis function at `z`, in basis order:
/// entry at `position(p)` is `orthonormal_coefficient(p) * z^p`.
pub fn evaluate_basis(params: SpaceParams, order: &BasisOrder, z: &[C64]) -> Result<Vec<C64>> {
    if z.len() != params.n {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, expected {}",
            z.len(),
            params.n
        )));
    }
    let mut out = Vec::with_capacity(order.len());
    for p in order.indices() {
        let mut v = C64::new(orthonormal_coefficient(params, p)?, 0.0);
        for (zi, &pi) in z.iter().zip(p.entries()) {
            v *= zi.powu(pi);
        }
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::enumerate_multi_indices;
    use crate::quadrature::{integrate_halfline, QuadratureSpec};
    use rand::Rng;

    const I: C64 = C64::new(0.0, 1.0);

    #[test]
    fn space_dimension_matches_binomial() {
        let p = SpaceParams::new(2, 2).unwrap();
        assert_eq!(p.space_dimension(), 6);
        let p = SpaceParams::new(3, 5).unwrap();
        assert_eq!(p.space_dimension(), 56);
    }

    #[test]
    fn inner_product_against_beta_integral_oracle() {
        // n = 1, m = 2, p = (1): <z, z>_2 = int |z|^2 dnu_2.
        // In polar coordinates with t = r^2 this is
        //   (n+m)!/m! * int_0^inf t (1+t)^-(n+m+1) dt  (n = 1)
        // evaluated here by 1-D quadrature as an independent oracle.
        let spec = QuadratureSpec::with_order(64).unwrap();
        let oracle = integrate_halfline(|t| 3.0 * t / (1.0 + t).powi(4), &spec).unwrap();
        let params = SpaceParams::new(1, 2).unwrap();
        let p = MultiIndex::new(vec![1]);
        let ip = monomial_inner_product(params, &p, &p).unwrap();
        assert!((ip - 0.5).abs() < 1e-14);
        assert!((oracle.value - ip).abs() < 1e-12);
    }

    #[test]
    fn inner_product_off_diagonal_and_constant() {
        let params = SpaceParams::new(2, 3).unwrap();
        let p = MultiIndex::new(vec![1, 0]);
        let q = MultiIndex::new(vec![0, 1]);
        assert_eq!(monomial_inner_product(params, &p, &q).unwrap(), 0.0);
        let zero = MultiIndex::zero(2);
        assert_eq!(monomial_inner_product(params, &zero, &zero).unwrap(), 1.0);
    }

    #[test]
    fn inner_product_rejects_degree_above_m() {
        let params = SpaceParams::new(1, 1).unwrap();
        let p = MultiIndex::new(vec![2]);
        assert!(monomial_inner_product(params, &p, &p).is_err());
    }

    #[test]
    fn orthonormal_coefficients() {
        let params = SpaceParams::new(1, 2).unwrap();
        let c = orthonormal_coefficient(params, &MultiIndex::new(vec![1])).unwrap();
        assert!((c - 2f64.sqrt()).abs() < 1e-15);

        let params = SpaceParams::new(2, 2).unwrap();
        assert_eq!(
            orthonormal_coefficient(params, &MultiIndex::zero(2)).unwrap(),
            1.0
        );
        let c = orthonormal_coefficient(params, &MultiIndex::new(vec![1, 1])).unwrap();
        assert!((c - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn kernel_values() {
        let params = SpaceParams::new(2, 5).unwrap();
        let z = [C64::new(0.3, -0.7), C64::new(1.2, 0.1)];
        let w = [C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        assert_eq!(kernel(params, &z, &w), C64::new(1.0, 0.0));

        let params = SpaceParams::new(1, 1).unwrap();
        let one = [C64::new(1.0, 0.0)];
        assert_eq!(kernel(params, &one, &one), C64::new(2.0, 0.0));

        let params = SpaceParams::new(2, 3).unwrap();
        let zi = [I, C64::new(0.0, 0.0)];
        let k = kernel(params, &zi, &zi);
        assert!((k - C64::new(8.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn kernel_hermitian_symmetry() {
        let params = SpaceParams::new(3, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let z: Vec<C64> = (0..3)
                .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let w: Vec<C64> = (0..3)
                .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let kzw = kernel(params, &z, &w);
            let kwz = kernel(params, &w, &z);
            assert!((kzw - kwz.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn basis_expansion_reproduces_kernel_diagonal() {
        let params = SpaceParams::new(2, 4).unwrap();
        let order = enumerate_multi_indices(2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let z: Vec<C64> = (0..2)
                .map(|_| C64::new(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0))
                .collect();
            let basis = evaluate_basis(params, &order, &z).unwrap();
            let sum: f64 = basis.iter().map(|v| v.norm_sqr()).sum();
            let k = kernel(params, &z, &z).re;
            assert!((sum - k).abs() <= 1e-12 * k.abs());
        }
    }

    #[test]
    fn basis_at_zero_and_explicit_point() {
        let params = SpaceParams::new(1, 1).unwrap();
        let order = enumerate_multi_indices(1, 1).unwrap();
        let z0 = [C64::new(0.0, 0.0)];
        let b = evaluate_basis(params, &order, &z0).unwrap();
        assert_eq!(b[0], C64::new(1.0, 0.0));
        assert_eq!(b[1], C64::new(0.0, 0.0));

        let z2 = [C64::new(2.0, 0.0)];
        let b = evaluate_basis(params, &order, &z2).unwrap();
        assert!((b[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((b[1] - C64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sampler_is_deterministic_and_finite() {
        let params = SpaceParams::new(2, 0).unwrap();
        let a = sample_measure(params, 42, 100).unwrap();
        let b = sample_measure(params, 42, 100).unwrap();
        assert_eq!(a.len(), 100);
        for (x, y) in a.iter().zip(b.iter()) {
            for (xi, yi) in x.iter().zip(y.iter()) {
                assert_eq!(xi, yi);
                // m = 0: moments of degree >= 1 diverge, but every sample is finite.
                assert!(xi.re.is_finite() && xi.im.is_finite());
            }
        }
    }

    #[test]
    fn sampler_moment_n1_m2() {
        let params = SpaceParams::new(1, 2).unwrap();
        let count = 1_000_000;
        let samples = sample_measure(params, 7, count).unwrap();
        let vals: Vec<f64> = samples.iter().map(|z| z[0].norm_sqr()).collect();
        let mean: f64 = vals.iter().sum::<f64>() / count as f64;
        let var: f64 = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count as f64;
        let se = (var / count as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn sampler_moment_n2_m3() {
        let params = SpaceParams::new(2, 3).unwrap();
        let count = 1_000_000;
        let samples = sample_measure(params, 13, count).unwrap();
        let vals: Vec<f64> = samples
            .iter()
            .map(|z| z[0].norm_sqr() * z[1].norm_sqr())
            .collect();
        let mean: f64 = vals.iter().sum::<f64>() / count as f64;
        let var: f64 = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count as f64;
        let se = (var / count as f64).sqrt();
        // Exact moment: p!(m-|p|)!/m! at p = (1,1), m = 3 is 1/6.
        assert!((mean - 1.0 / 6.0).abs() < 3.0 * se, "mean {mean}, se {se}");
    }
}
