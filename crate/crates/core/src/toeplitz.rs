//! Toeplitz matrices by integration and their closed-form spectra.
//!
//! For a symbol invariant under the block group `U(k_1) x ... x U(k_s)` the
//! Toeplitz operator is diagonal in the monomial basis, constant on each
//! isotypic component, with eigenvalue
//!
//! ```text
//! gamma(d) = (n+m)! / (prod_b (k_b + d_b - 1)! * (m - |d|)!)
//!          * int_{(0,inf)^s} a(sqrt t) prod_b t_b^(k_b + d_b - 1) (1 + sum t)^-(n+m+1) dt
//! ```
//!
//! where `a(sqrt t)` is the block-radial profile at block norms `sqrt t_b`.
//! The prefactor is normalized so that `a = 1` gives `gamma = 1` identically
//! (the Dirichlet integral cancels it exactly). Numerically the integral is
//! evaluated after the substitution `t_b = x_b / (1 - sum x)` onto the unit
//! simplex, which turns the Dirichlet weight into the polynomial
//! `prod x_b^(k_b+d_b-1) (1 - sum x)^(m-|d|)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::bergman::{evaluate_basis, sample_measure, SpaceParams};
use crate::combinatorics::{factorial_ratio_f64, BasisOrder, MultiIndex};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_simplex, simplex_rule, QuadratureSpec};
use crate::representation::{isotypic_decomposition, IsotypicDecomposition};
use crate::symbols::{BlockPartition, Invariance, Symbol};
use crate::{C64, CMatrix, CVector};

/// How a matrix was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Quadrature,
    MonteCarlo,
    Averaged,
}

/// A dense operator matrix in the canonical graded-lex orthonormal basis
/// `(e_p)`, with an error estimate and provenance tag.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    params: SpaceParams,
    entries: CMatrix,
    error_estimate: f64,
    provenance: Provenance,
    /// Per-entry standard errors (Monte Carlo matrices only).
    standard_errors: Option<DMatrix<f64>>,
}

impl OperatorMatrix {
    pub fn new(
        params: SpaceParams,
        entries: CMatrix,
        error_estimate: f64,
        provenance: Provenance,
    ) -> Self {
        OperatorMatrix {
            params,
            entries,
            error_estimate,
            provenance,
            standard_errors: None,
        }
    }

    pub fn params(&self) -> SpaceParams {
        self.params
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn error_estimate(&self) -> f64 {
        self.error_estimate
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn standard_errors(&self) -> Option<&DMatrix<f64>> {
        self.standard_errors.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Frobenius distance to the own adjoint.
    pub fn hermitian_defect(&self) -> f64 {
        (&self.entries - self.entries.adjoint()).norm()
    }
}

/// Matrix construction method.
#[derive(Clone, Debug)]
pub enum Method {
    Quadrature(QuadratureSpec),
    MonteCarlo { count: usize, seed: u64 },
}

/// The spectrum of a block-invariant Toeplitz operator: one eigenvalue per
/// isotypic component (degree vector `d`), constant across the component.
#[derive(Clone, Debug)]
pub struct SpectrumTable {
    pub params: SpaceParams,
    pub partition: BlockPartition,
    /// `(degrees, eigenvalue, component dimension)`, graded-lex in degrees.
    pub entries: Vec<(Vec<u32>, f64, usize)>,
    pub error_estimate: f64,
    pub method: String,
}

impl SpectrumTable {
    /// Eigenvalue of the component containing the given multi-index.
    pub fn per_index(&self, p: &MultiIndex) -> Option<f64> {
        let d = p.block_degrees(self.partition.blocks());
        self.entries
            .iter()
            .find(|(deg, _, _)| *deg == d)
            .map(|&(_, ev, _)| ev)
    }
}

/// One check of a verification report.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Diagnostics comparing a Monte Carlo Toeplitz matrix against the
/// closed-form spectrum.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn check_compatible(params: SpaceParams, a: &Symbol, kappa: &BlockPartition) -> Result<()> {
    if kappa.n() != params.n() {
        return Err(Error::DimensionMismatch(format!(
            "partition sums to {}, expected n = {}",
            kappa.n(),
            params.n()
        )));
    }
    if !a.invariance().contains_group(kappa) {
        return Err(Error::InvarianceMismatch(format!(
            "symbol `{}` has invariance `{}`, which does not contain U({:?})",
            a.family(),
            a.invariance().name(),
            kappa.blocks()
        )));
    }
    Ok(())
}

/// Evaluation point with the prescribed block norms: `sqrt(rho2_b)` placed in
/// the first coordinate of each block, zeros elsewhere. For a block-invariant
/// symbol this evaluates the block-radial profile.
fn block_representative_point(kappa: &BlockPartition, rho2: &[f64]) -> Vec<C64> {
    let mut z = vec![C64::new(0.0, 0.0); kappa.n()];
    let mut start = 0;
    for (&k, &r2) in kappa.blocks().iter().zip(rho2.iter()) {
        z[start] = C64::new(r2.max(0.0).sqrt(), 0.0);
        start += k;
    }
    z
}

/// `C(d) = (n+m)! / (prod_b (k_b + d_b - 1)! * (m - |d|)!)`, exactly.
fn spectrum_prefactor(params: SpaceParams, kappa: &BlockPartition, degrees: &[u32]) -> f64 {
    let total: u32 = degrees.iter().sum();
    let mut den: Vec<u32> = kappa
        .blocks()
        .iter()
        .zip(degrees.iter())
        .map(|(&kb, &db)| kb as u32 + db - 1)
        .collect();
    den.push(params.m() - total);
    factorial_ratio_f64(&[params.n() as u32 + params.m()], &den)
}

/// Radial (U(n)-invariant) eigenvalue by the 1-D half-line integral in simplex
/// form: `x = r/(1+r)` maps the integrand to
/// `a(sqrt(x/(1-x))) x^(n+k-1) (1-x)^(m-k)` on `(0,1)`; a jump of the profile
/// at radius `R` lands at `x = R^2/(1+R^2)`.
fn radial_eigenvalue(
    params: SpaceParams,
    a: &Symbol,
    level: u32,
    order: usize,
) -> Result<(f64, f64, usize)> {
    let n = params.n() as u32;
    let m = params.m();
    let splits: Vec<f64> = a
        .radial_jump()
        .map(|rad| vec![rad * rad / (1.0 + rad * rad)])
        .unwrap_or_default();
    let kappa_full = BlockPartition::full(params.n());
    let g = |x: &[f64]| {
        let x = x[0];
        let t = x / (1.0 - x);
        let z = block_representative_point(&kappa_full, &[t]);
        let prof = a.evaluate(&z).re;
        prof * x.powi((n + level - 1) as i32) * (1.0 - x).powi((m - level) as i32)
    };
    let integral = integrate_simplex(g, 1, order, &splits)?;
    let c = spectrum_prefactor(params, &kappa_full, &[level]);
    Ok((
        c * integral.value,
        c * integral.error_estimate,
        integral.evaluations,
    ))
}

/// Closed-form spectrum of `T_a` for a symbol invariant under
/// `U(k_1) x ... x U(k_s)`: one eigenvalue per degree vector `d`, `|d| <= m`.
///
/// Radial symbols route to the 1-D integral per level (where profile jumps are
/// resolvable by interval splitting); other invariances use the s-dimensional
/// simplex rule with a grid shared across components.
pub fn block_radial_spectrum(
    params: SpaceParams,
    kappa: &BlockPartition,
    a: &Symbol,
    spec: &QuadratureSpec,
    order: &BasisOrder,
) -> Result<SpectrumTable> {
    check_compatible(params, a, kappa)?;
    let decomposition = isotypic_decomposition(params, kappa, order)?;
    let s = kappa.num_blocks();
    let m = params.m();
    let radial = matches!(a.invariance(), Invariance::Unitary);
    let mut entries = Vec::with_capacity(decomposition.len());
    let mut max_err: f64 = 0.0;

    if radial {
        // One integral per level, shared across components of equal |d|.
        let mut per_level: Vec<(f64, f64)> = Vec::with_capacity(m as usize + 1);
        for k in 0..=m {
            let (v, e, _) = radial_eigenvalue(params, a, k, spec.order)?;
            per_level.push((v, e));
        }
        for c in decomposition.components() {
            let level: u32 = c.degrees.iter().sum();
            let (v, e) = per_level[level as usize];
            entries.push((c.degrees.clone(), v, c.dimension));
            max_err = max_err.max(e);
        }
    } else {
        if !spec.split_points.is_empty() {
            return Err(Error::InvalidParameter(
                "split points are only supported for radial profiles".into(),
            ));
        }
        for &ord in &[spec.order, spec.order * 2] {
            let (points, weights) = simplex_rule(s, ord);
            // Shared symbol factor over the grid.
            let shared: Vec<(f64, f64)> = points
                .iter()
                .zip(weights.iter())
                .map(|(x, &w)| {
                    let sigma: f64 = x.iter().sum();
                    let rho2: Vec<f64> = x.iter().map(|&xi| xi / (1.0 - sigma)).collect();
                    let z = block_representative_point(kappa, &rho2);
                    (w * a.evaluate(&z).re, sigma)
                })
                .collect();
            let mut values = Vec::with_capacity(decomposition.len());
            for c in decomposition.components() {
                let total: u32 = c.degrees.iter().sum();
                let mut acc = 0.0;
                for (x, &(fw, sigma)) in points.iter().zip(shared.iter()) {
                    let mut term = fw * (1.0 - sigma).powi((m - total) as i32);
                    for (b, &xb) in x.iter().enumerate() {
                        let e = kappa.blocks()[b] as u32 + c.degrees[b] - 1;
                        term *= xb.powi(e as i32);
                    }
                    acc += term;
                }
                values.push(spectrum_prefactor(params, kappa, &c.degrees) * acc);
            }
            if entries.is_empty() {
                for (c, v) in decomposition.components().iter().zip(values.iter()) {
                    entries.push((c.degrees.clone(), *v, c.dimension));
                }
            } else {
                for (entry, v) in entries.iter_mut().zip(values.iter()) {
                    max_err = max_err.max((entry.1 - v).abs());
                    entry.1 = *v;
                }
            }
        }
    }
    Ok(SpectrumTable {
        params,
        partition: kappa.clone(),
        entries,
        error_estimate: max_err,
        method: format!("quadrature(order={})", spec.order),
    })
}

/// Toeplitz matrix of a bounded symbol: entry `(q, p)` estimates
/// `int a e_p conj(e_q) dnu_m`.
///
/// The quadrature path requires a declared (torus or coarser) invariance: the
/// matrix is then diagonal by character orthogonality, with diagonal given by
/// the per-index Dirichlet integrals. The Monte Carlo path accepts any bounded
/// symbol; real symbols are Hermitian-symmetrized with the asymmetry defect
/// folded into the error estimate.
pub fn toeplitz_matrix(
    params: SpaceParams,
    order: &BasisOrder,
    a: &Symbol,
    method: &Method,
) -> Result<OperatorMatrix> {
    match method {
        Method::Quadrature(spec) => toeplitz_matrix_quadrature(params, order, a, spec),
        Method::MonteCarlo { count, seed } => {
            toeplitz_matrix_monte_carlo(params, order, a, *count, *seed)
        }
    }
}

fn toeplitz_matrix_quadrature(
    params: SpaceParams,
    order: &BasisOrder,
    a: &Symbol,
    spec: &QuadratureSpec,
) -> Result<OperatorMatrix> {
    if matches!(a.invariance(), Invariance::General) {
        return Err(Error::InvarianceMismatch(
            "quadrature construction requires torus, block, or unitary invariance".into(),
        ));
    }
    let dim = order.len();
    let n = params.n();
    let m = params.m();
    let mut diag = vec![0.0f64; dim];
    let mut max_err: f64 = 0.0;

    if matches!(a.invariance(), Invariance::Unitary) {
        for (pos, p) in order.iter() {
            let (v, e, _) = radial_eigenvalue(params, a, p.degree(), spec.order)?;
            diag[pos] = v;
            max_err = max_err.max(e);
        }
    } else {
        // Per-index n-dimensional Dirichlet integral over the shared simplex
        // grid: gamma(p) = C(p) * int prof(x) prod x^p (1 - sum x)^(m-|p|) dx.
        let torus = BlockPartition::torus(n);
        let mut previous: Option<Vec<f64>> = None;
        for &ord in &[spec.order, spec.order * 2] {
            if ord.pow(n as u32) > 50_000_000 {
                return Err(Error::InvalidParameter(format!(
                    "quadrature order {ord} in dimension {n} exceeds the evaluation budget"
                )));
            }
            let (points, weights) = simplex_rule(n, ord);
            let shared: Vec<(f64, f64)> = points
                .iter()
                .zip(weights.iter())
                .map(|(x, &w)| {
                    let sigma: f64 = x.iter().sum();
                    let rho2: Vec<f64> = x.iter().map(|&xi| xi / (1.0 - sigma)).collect();
                    let z = block_representative_point(&torus, &rho2);
                    (w * a.evaluate(&z).re, sigma)
                })
                .collect();
            let mut values = vec![0.0f64; dim];
            for (pos, p) in order.iter() {
                let deg = p.degree();
                let mut acc = 0.0;
                for (x, &(fw, sigma)) in points.iter().zip(shared.iter()) {
                    let mut term = fw * (1.0 - sigma).powi((m - deg) as i32);
                    for (xi, &pi) in x.iter().zip(p.entries()) {
                        term *= xi.powi(pi as i32);
                    }
                    acc += term;
                }
                let mut den: Vec<u32> = p.entries().to_vec();
                den.push(m - deg);
                values[pos] = factorial_ratio_f64(&[n as u32 + m], &den) * acc;
            }
            if let Some(prev) = previous {
                for (pv, v) in prev.iter().zip(values.iter()) {
                    max_err = max_err.max((pv - v).abs());
                }
            }
            diag.copy_from_slice(&values);
            previous = Some(values);
        }
    }

    let mut entries = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for (i, &v) in diag.iter().enumerate() {
        entries[(i, i)] = C64::new(v, 0.0);
    }
    Ok(OperatorMatrix::new(
        params,
        entries,
        max_err,
        Provenance::Quadrature,
    ))
}

fn toeplitz_matrix_monte_carlo(
    params: SpaceParams,
    order: &BasisOrder,
    a: &Symbol,
    count: usize,
    seed: u64,
) -> Result<OperatorMatrix> {
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    let dim = order.len();
    // Importance sampling from nu_0 with weight d nu_m / d nu_0
    //   w(z) = C(n+m, n) (1 + |z|^2)^{-m}.
    // Sampling nu_m directly gives infinite variance for high-degree entries
    // (the second moment of |e_p|^2 diverges once 2|p| >= m + 1), so its
    // standard errors are meaningless; with this weight Cauchy-Schwarz gives
    // |w e_p conj(e_q)| <= C(n+m, n), a uniformly bounded estimator.
    let base = SpaceParams::new(params.n(), 0)?;
    let weight_scale =
        factorial_ratio_f64(&[params.n() as u32 + params.m()], &[params.m(), params.n() as u32]);
    let samples = sample_measure(base, seed, count)?;
    let mut sum = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    let mut sum_sq = DMatrix::from_element(dim, dim, 0.0f64);
    for z in &samples {
        let norm1 = 1.0 + z.iter().map(|v| v.norm_sqr()).sum::<f64>();
        let w = weight_scale * norm1.powi(-(params.m() as i32));
        let av = a.evaluate(z) * w;
        let basis = evaluate_basis(params, order, z)?;
        for q in 0..dim {
            let bq = basis[q].conj();
            for p in 0..dim {
                let term = av * basis[p] * bq;
                sum[(q, p)] += term;
                sum_sq[(q, p)] += term.norm_sqr();
            }
        }
    }
    let fcount = count as f64;
    let mut entries = sum / C64::new(fcount, 0.0);
    let se = DMatrix::from_fn(dim, dim, |q, p| {
        let mean = entries[(q, p)];
        let var = (sum_sq[(q, p)] / fcount - mean.norm_sqr()).max(0.0);
        (var / fcount).sqrt()
    });
    let mut error = se.iter().fold(0.0f64, |acc, &v| acc.max(v));
    if a.is_real() {
        let defect = (&entries - entries.adjoint()).norm();
        entries = (&entries + entries.adjoint()) * C64::new(0.5, 0.0);
        error += defect;
    }
    let mut out = OperatorMatrix::new(params, entries, error, Provenance::MonteCarlo);
    out.standard_errors = Some(se);
    Ok(out)
}

/// Coefficients (in the monomial basis positions) of the product of per-block
/// homogeneous polynomials `f_{d_b}(z^(b)) = sum_{|p|=d_b} sqrt(C(d_b, p)) z^p`,
/// supported exactly on the component with block-degree vector `d`.
pub fn representative_vector(
    params: SpaceParams,
    kappa: &BlockPartition,
    degrees: &[u32],
    order: &BasisOrder,
) -> Result<CVector> {
    if degrees.len() != kappa.num_blocks() {
        return Err(Error::DimensionMismatch(format!(
            "degree vector has {} entries, partition has {} blocks",
            degrees.len(),
            kappa.num_blocks()
        )));
    }
    let total: u32 = degrees.iter().sum();
    if total > params.m() {
        return Err(Error::InvalidParameter(format!(
            "|d| = {total} exceeds m = {}",
            params.m()
        )));
    }
    let mut out = CVector::from_element(order.len(), C64::new(0.0, 0.0));
    for (pos, p) in order.iter() {
        if p.block_degrees(kappa.blocks()) != degrees {
            continue;
        }
        // prod_b multinomial(d_b, p^(b)), via the factorial ratio.
        let mut coef = 1.0;
        let mut start = 0;
        for (&kb, &db) in kappa.blocks().iter().zip(degrees.iter()) {
            let block = &p.entries()[start..start + kb];
            coef *= factorial_ratio_f64(&[db], block);
            start += kb;
        }
        out[pos] = C64::new(coef.sqrt(), 0.0);
    }
    Ok(out)
}

/// Frobenius norm of the commutator `T1 T2 - T2 T1`.
pub fn commutator_norm(t1: &OperatorMatrix, t2: &OperatorMatrix) -> Result<f64> {
    if t1.dim() != t2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operators have dimensions {} and {}",
            t1.dim(),
            t2.dim()
        )));
    }
    let c = t1.entries() * t2.entries() - t2.entries() * t1.entries();
    Ok(c.norm())
}

/// Component-diagonal averages of a matrix: the matrix eigenvalue estimate per
/// isotypic component, read without a general eigensolver.
pub fn component_eigenvalues(
    matrix: &OperatorMatrix,
    decomposition: &IsotypicDecomposition,
) -> Vec<f64> {
    decomposition
        .components()
        .iter()
        .map(|c| {
            let sum: f64 = c
                .basis_positions
                .iter()
                .map(|&p| matrix.entries()[(p, p)].re)
                .sum();
            sum / c.dimension as f64
        })
        .collect()
}

/// Cross-verifies the closed-form spectrum against a Monte Carlo matrix:
/// off-component-diagonal magnitudes, eigenvalue agreement per component, and
/// the commutator norm against a second invariant symbol.
#[allow(clippy::too_many_arguments)]
pub fn spectrum_vs_matrix(
    params: SpaceParams,
    kappa: &BlockPartition,
    a: &Symbol,
    b: &Symbol,
    spec: &QuadratureSpec,
    mc_count: usize,
    mc_seed: u64,
    order: &BasisOrder,
) -> Result<VerificationReport> {
    check_compatible(params, a, kappa)?;
    check_compatible(params, b, kappa)?;
    let decomposition = isotypic_decomposition(params, kappa, order)?;
    let spectrum = block_radial_spectrum(params, kappa, a, spec, order)?;
    let mc = toeplitz_matrix(
        params,
        order,
        a,
        &Method::MonteCarlo {
            count: mc_count,
            seed: mc_seed,
        },
    )?;
    let se = mc.standard_errors().expect("Monte Carlo matrix").clone();
    let dim = order.len();

    // Component membership per position.
    let mut comp_of = vec![0usize; dim];
    for (ci, c) in decomposition.components().iter().enumerate() {
        for &p in &c.basis_positions {
            comp_of[p] = ci;
        }
    }

    // (i) Off-component-diagonal magnitude, normalized by 4 standard errors.
    let mut worst_off = 0.0f64;
    let mut worst_tol = 0.0f64;
    let mut off_pass = true;
    for q in 0..dim {
        for p in 0..dim {
            if comp_of[q] == comp_of[p] && q == p {
                continue;
            }
            let mag = mc.entries()[(q, p)].norm();
            let tol = 4.0 * se[(q, p)] + 1e-12;
            if mag > worst_off {
                worst_off = mag;
                worst_tol = tol;
            }
            if mag > tol {
                off_pass = false;
            }
        }
    }

    // (ii) Eigenvalues: component-diagonal averages vs the closed form.
    let matrix_evs = component_eigenvalues(&mc, &decomposition);
    let mut ev_dev = 0.0f64;
    let mut ev_tol = 0.0f64;
    let mut ev_pass = true;
    for (c, &mat_ev) in decomposition.components().iter().zip(matrix_evs.iter()) {
        let closed = spectrum
            .entries
            .iter()
            .find(|(d, _, _)| *d == c.degrees)
            .map(|&(_, v, _)| v)
            .expect("component in spectrum table");
        // Standard error of the averaged diagonal.
        let se_comp: f64 = (c
            .basis_positions
            .iter()
            .map(|&p| se[(p, p)].powi(2))
            .sum::<f64>())
        .sqrt()
            / c.dimension as f64;
        let tol = 4.0 * se_comp + spectrum.error_estimate + 1e-12;
        let dev = (mat_ev - closed).abs();
        if dev > ev_dev {
            ev_dev = dev;
            ev_tol = tol;
        }
        if dev > tol {
            ev_pass = false;
        }
    }

    // (iii) Commutator of the quadrature matrices of a and b.
    let ta = toeplitz_matrix(params, order, a, &Method::Quadrature(spec.clone()))?;
    let tb = toeplitz_matrix(params, order, b, &Method::Quadrature(spec.clone()))?;
    let comm = commutator_norm(&ta, &tb)?;
    let comm_tol = (ta.error_estimate() + tb.error_estimate()) * dim as f64 + 1e-10;

    Ok(VerificationReport {
        checks: vec![
            Check {
                name: "off_component_diagonal".into(),
                measured: worst_off,
                tolerance: worst_tol,
                pass: off_pass,
            },
            Check {
                name: "eigenvalue_match".into(),
                measured: ev_dev,
                tolerance: ev_tol,
                pass: ev_pass,
            },
            Check {
                name: "commutator_norm".into(),
                measured: comm,
                tolerance: comm_tol,
                pass: comm <= comm_tol,
            },
        ],
    })
}
