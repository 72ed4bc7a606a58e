//! The representation of `U(n)` on polynomials of degree at most `m` by
//! `(A . f)(z) = f(A^{-1} z)`, Haar sampling of block subgroups, isotypic
//! decompositions, operator averaging `T -> T~`, and the commutant-dimension
//! check of multiplicity-freeness.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bergman::{orthonormal_coefficient, SpaceParams};
use crate::combinatorics::{binomial, BasisOrder, MultiIndex};
use crate::error::{Error, Result};
use crate::symbols::BlockPartition;
use crate::toeplitz::{OperatorMatrix, Provenance};
use crate::{C64, CMatrix};

/// Maximum allowed unitarity defect (max entry of `k* k - I`) for inputs.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Eigenvalues of the averaging chain this close to 1 are treated as fixed.
const FIXED_SPACE_TOL: f64 = 1e-9;

/// Relative singular-value cutoff for the commutant rank decision.
pub const RANK_TOL: f64 = 1e-6;

/// An element of `U(n)`, optionally carrying the block partition it respects.
#[derive(Clone, Debug)]
pub struct GroupElement {
    matrix: CMatrix,
    block_structure: Option<BlockPartition>,
}

impl GroupElement {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let defect = unitarity_defect(&matrix);
        if defect > UNITARITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "matrix is not unitary (defect {defect:.3e})"
            )));
        }
        Ok(GroupElement {
            matrix,
            block_structure: None,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn block_structure(&self) -> Option<&BlockPartition> {
        self.block_structure.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Max-entry defect of `k* k - I`.
pub fn unitarity_defect(matrix: &CMatrix) -> f64 {
    let n = matrix.nrows();
    let gram = matrix.adjoint() * matrix;
    let mut defect: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            defect = defect.max((gram[(i, j)] - expect).norm());
        }
    }
    defect
}

/// Haar-uniform element of `U(dim)`: QR of a complex Ginibre matrix with the
/// phase correction `Q <- Q diag(R_ii / |R_ii|)` that makes the law exactly
/// Haar.
pub fn haar_unitary(dim: usize, rng: &mut impl RngCore) -> CMatrix {
    let ginibre = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Block-diagonal matrix with an independent Haar-uniform block per factor.
/// Off-block entries are exactly zero.
pub fn haar_block_unitary(kappa: &BlockPartition, rng: &mut impl RngCore) -> CMatrix {
    let n = kappa.n();
    let mut out = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    let mut start = 0;
    for &k in kappa.blocks() {
        if k == 1 {
            let theta = rng.next_u64() as f64 / u64::MAX as f64 * std::f64::consts::TAU;
            out[(start, start)] = C64::from_polar(1.0, theta);
        } else {
            let block = haar_unitary(k, rng);
            for i in 0..k {
                for j in 0..k {
                    out[(start + i, start + j)] = block[(i, j)];
                }
            }
        }
        start += k;
    }
    out
}

/// Seeded Haar sample of `U(k_1) x ... x U(k_s)`.
pub fn haar_sample(kappa: &BlockPartition, seed: u64) -> GroupElement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GroupElement {
        matrix: haar_block_unitary(kappa, &mut rng),
        block_structure: Some(kappa.clone()),
    }
}

/// The matrix of `pi_m(k)` on the orthonormal basis `(e_p)`: column `p` holds
/// the expansion of `e_p(k^{-1} z)`, computed by exact multinomial expansion
/// (iterated convolution against the rows of `k^{-1}`).
pub fn rep_matrix(params: SpaceParams, order: &BasisOrder, k: &GroupElement) -> Result<CMatrix> {
    if k.dim() != params.n() {
        return Err(Error::DimensionMismatch(format!(
            "group element is {}x{}, expected {}",
            k.dim(),
            k.dim(),
            params.n()
        )));
    }
    let defect = unitarity_defect(&k.matrix);
    if defect > UNITARITY_TOL {
        return Err(Error::InvalidParameter(format!(
            "group element is not unitary (defect {defect:.3e})"
        )));
    }
    let n = params.n();
    let dim = order.len();
    // k is unitary, so k^{-1} = k*.
    let inv = k.matrix.adjoint();
    let mut out = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    let coeffs: Vec<f64> = order
        .indices()
        .iter()
        .map(|p| orthonormal_coefficient(params, p))
        .collect::<Result<_>>()?;
    for (col, p) in order.iter() {
        // Expand ((k^{-1} z)_1)^{p_1} ... ((k^{-1} z)_n)^{p_n} in monomials.
        let mut poly: HashMap<Vec<u32>, C64> = HashMap::new();
        poly.insert(vec![0u32; n], C64::new(1.0, 0.0));
        for (i, &pi) in p.entries().iter().enumerate() {
            for _ in 0..pi {
                let mut next: HashMap<Vec<u32>, C64> = HashMap::with_capacity(poly.len() * n);
                for (exps, coef) in &poly {
                    for j in 0..n {
                        let factor = inv[(i, j)];
                        if factor.norm_sqr() == 0.0 {
                            continue;
                        }
                        let mut e = exps.clone();
                        e[j] += 1;
                        *next.entry(e).or_insert_with(|| C64::new(0.0, 0.0)) += coef * factor;
                    }
                }
                poly = next;
            }
        }
        for (exps, coef) in poly {
            let q = MultiIndex::new(exps);
            let row = order
                .position(&q)
                .expect("expansion stays within the degree bound");
            out[(row, col)] = coef * coeffs[col] / coeffs[row];
        }
    }
    Ok(out)
}

/// One isotypic component of the block subgroup action: the span of the
/// monomials whose block-degree vector equals `degrees`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotypicComponent {
    pub degrees: Vec<u32>,
    pub dimension: usize,
    pub basis_positions: Vec<usize>,
}

/// The full decomposition for a block partition; every component has
/// multiplicity one.
#[derive(Clone, Debug)]
pub struct IsotypicDecomposition {
    params: SpaceParams,
    partition: BlockPartition,
    components: Vec<IsotypicComponent>,
}

impl IsotypicDecomposition {
    pub fn params(&self) -> SpaceParams {
        self.params
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn components(&self) -> &[IsotypicComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Component index of a basis position.
    pub fn component_of(&self, position: usize) -> usize {
        self.components
            .iter()
            .position(|c| c.basis_positions.contains(&position))
            .expect("positions partition the basis")
    }
}

/// Decomposes `P_m(C^n)` under `U(k_1) x ... x U(k_s)`: components are indexed
/// by block-degree vectors `d` with `|d| <= m`, ordered graded-lexicographically,
/// and collect the monomials whose per-block degree sums match `d`.
pub fn isotypic_decomposition(
    params: SpaceParams,
    kappa: &BlockPartition,
    order: &BasisOrder,
) -> Result<IsotypicDecomposition> {
    if kappa.n() != params.n() {
        return Err(Error::DimensionMismatch(format!(
            "partition sums to {}, expected n = {}",
            kappa.n(),
            params.n()
        )));
    }
    let mut buckets: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
    for (pos, p) in order.iter() {
        buckets
            .entry(p.block_degrees(kappa.blocks()))
            .or_default()
            .push(pos);
    }
    let mut keys: Vec<Vec<u32>> = buckets.keys().cloned().collect();
    keys.sort_by_key(|d| (d.iter().sum::<u32>(), d.clone()));
    let components = keys
        .into_iter()
        .map(|degrees| {
            let basis_positions = buckets.remove(&degrees).expect("key from map");
            let dimension: u128 = kappa
                .blocks()
                .iter()
                .zip(degrees.iter())
                .map(|(&kb, &db)| binomial(kb as u32 + db.max(1) - 1, db))
                .product();
            debug_assert_eq!(dimension as usize, basis_positions.len());
            IsotypicComponent {
                degrees,
                dimension: basis_positions.len(),
                basis_positions,
            }
        })
        .collect();
    Ok(IsotypicDecomposition {
        params,
        partition: kappa.clone(),
        components,
    })
}

/// The averaging projection `T -> integral over K of pi(k) T pi(k)^{-1}`.
///
/// For the torus this is computed exactly: character orthogonality kills every
/// off-diagonal entry in the monomial basis, so the average is the diagonal
/// part. For general block partitions it is the Monte Carlo mean over seeded
/// Haar conjugations.
pub fn average_operator(
    params: SpaceParams,
    kappa: &BlockPartition,
    order: &BasisOrder,
    t: &OperatorMatrix,
    samples: usize,
    seed: u64,
) -> Result<OperatorMatrix> {
    let dim = params.space_dimension();
    if t.entries().nrows() != dim || t.entries().ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, expected {dim}x{dim}",
            t.entries().nrows(),
            t.entries().ncols()
        )));
    }
    if kappa.is_torus() {
        let mut out = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for i in 0..dim {
            out[(i, i)] = t.entries()[(i, i)];
        }
        return Ok(OperatorMatrix::new(
            params,
            out,
            t.error_estimate(),
            Provenance::Averaged,
        ));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for _ in 0..samples {
        let g = GroupElement {
            matrix: haar_block_unitary(kappa, &mut rng),
            block_structure: Some(kappa.clone()),
        };
        let rep = rep_matrix(params, order, &g)?;
        acc += &rep * t.entries() * rep.adjoint();
    }
    acc /= C64::new(samples as f64, 0.0);
    // Statistical error of the conjugation mean, on top of the input's own.
    let mc_err = t.entries().norm() / (samples as f64).sqrt();
    Ok(OperatorMatrix::new(
        params,
        acc,
        t.error_estimate() + mc_err,
        Provenance::Averaged,
    ))
}

/// Result of the commutant-rank computation.
#[derive(Clone, Copy, Debug)]
pub struct CommutantEstimate {
    /// Numerical rank of the span of the averaged probes: `sum r_j^2`.
    pub dimension: usize,
    /// Smallest ratio separating accepted from rejected singular values at
    /// the decision threshold; the decision is sound when this is >= 10.
    pub rank_margin: f64,
}

/// Dimension of `End_K(P_m(C^n))` as the numerical rank of the span of
/// `probes` Haar-averaged random matrices.
///
/// Since the torus sits inside every block group, the commutant consists of
/// diagonal matrices, and averaging factors through exact diagonal extraction.
/// The remaining block average is the fixed-space projection of the
/// doubly-stochastic conjugation chain `S[p][q] = |pi_m(g)_{pq}|^2` built from
/// `samples` Haar draws; its fixed vectors are exactly the diagonals commuting
/// with the sampled group elements, so the projection is accurate to machine
/// precision rather than Monte Carlo accuracy.
pub fn commutant_dimension(
    params: SpaceParams,
    kappa: &BlockPartition,
    order: &BasisOrder,
    probes: usize,
    samples: usize,
    seed: u64,
) -> Result<CommutantEstimate> {
    let dim = params.space_dimension();
    if probes == 0 {
        return Err(Error::InvalidParameter("probes must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Random diagonals: the exact torus average of random matrices.
    let mut probe_rows: Vec<Vec<C64>> = (0..probes)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    C64::new(re, im)
                })
                .collect()
        })
        .collect();

    if !kappa.is_torus() {
        if samples == 0 {
            return Err(Error::InvalidParameter("samples must be >= 1".into()));
        }
        // Symmetrized transition matrix of the conjugation chain.
        let mut chain = DMatrix::from_element(dim, dim, 0.0f64);
        for _ in 0..samples {
            let g = GroupElement {
                matrix: haar_block_unitary(kappa, &mut rng),
                block_structure: Some(kappa.clone()),
            };
            let rep = rep_matrix(params, order, &g)?;
            for i in 0..dim {
                for j in 0..dim {
                    let w = rep[(i, j)].norm_sqr();
                    chain[(i, j)] += w;
                    chain[(j, i)] += w;
                }
            }
        }
        chain /= 2.0 * samples as f64;
        let eig = chain.symmetric_eigen();
        // Fixed space of the chain: eigenvalues at 1.
        let fixed: Vec<usize> = (0..dim)
            .filter(|&i| eig.eigenvalues[i] >= 1.0 - FIXED_SPACE_TOL)
            .collect();
        for row in probe_rows.iter_mut() {
            let mut projected = vec![C64::new(0.0, 0.0); dim];
            for &e in &fixed {
                let v = eig.eigenvectors.column(e);
                let dot: C64 = (0..dim).map(|i| row[i] * v[i]).sum();
                for i in 0..dim {
                    projected[i] += dot * v[i];
                }
            }
            *row = projected;
        }
    }

    let stacked = DMatrix::from_fn(probes, dim, |r, c| probe_rows[r][c]);
    let svd = stacked.svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let max_sv = sv.first().copied().unwrap_or(0.0);
    let threshold = RANK_TOL * max_sv;
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    let margin = if rank == 0 {
        0.0
    } else {
        let accepted = sv[rank - 1] / threshold;
        let rejected = sv
            .get(rank)
            .map(|&s| threshold / s.max(f64::MIN_POSITIVE))
            .unwrap_or(f64::INFINITY);
        accepted.min(rejected)
    };
    Ok(CommutantEstimate {
        dimension: rank,
        rank_margin: margin,
    })
}
