//! Bounded symbols with a declared invariance class, the built-in catalogue,
//! and the Haar-averaging projections `a -> a~` for the torus, block, and
//! full-unitary subgroups of `U(n)`.
//!
//! A symbol declared invariant under the block subgroup
//! `K = U(k_1) x ... x U(k_s)` depends only on the block norms
//! `rho_b = |z^(b)}|`; torus-invariant symbols depend only on the moduli
//! `(|z_1|, ..., |z_n|)`, and `U(n)`-invariant (radial) symbols only on `|z|`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::representation::haar_block_unitary;
use crate::{C64, CMatrix};

/// An ordered composition `(k_1, ..., k_s)` of `n` designating the subgroup
/// `U(k_1) x ... x U(k_s)` of block-diagonal unitaries. `(1, ..., 1)` is the
/// diagonal torus and `(n)` the full group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockPartition {
    blocks: Vec<usize>,
}

impl BlockPartition {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(Error::InvalidParameter(
                "partition blocks must be positive".into(),
            ));
        }
        Ok(BlockPartition { blocks })
    }

    pub fn torus(n: usize) -> Self {
        BlockPartition { blocks: vec![1; n] }
    }

    pub fn full(n: usize) -> Self {
        BlockPartition { blocks: vec![n] }
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_torus(&self) -> bool {
        self.blocks.iter().all(|&k| k == 1)
    }

    pub fn is_full(&self) -> bool {
        self.blocks.len() == 1
    }

    /// Cumulative block boundaries `k_1, k_1+k_2, ..., n`.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut acc = 0;
        self.blocks
            .iter()
            .map(|&k| {
                acc += k;
                acc
            })
            .collect()
    }

    /// Whether every block of `self` lies inside a block of `coarser`, i.e.
    /// `U(self) <= U(coarser)` as subgroups.
    pub fn refines(&self, coarser: &BlockPartition) -> bool {
        if self.n() != coarser.n() {
            return false;
        }
        let fine: std::collections::HashSet<usize> = self.boundaries().into_iter().collect();
        coarser.boundaries().iter().all(|b| fine.contains(b))
    }

    /// The common refinement: boundaries of both partitions merged.
    pub fn meet(&self, other: &BlockPartition) -> Result<BlockPartition> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch(
                "partitions of different n".into(),
            ));
        }
        let mut bounds: Vec<usize> = self
            .boundaries()
            .into_iter()
            .chain(other.boundaries())
            .collect();
        bounds.sort_unstable();
        bounds.dedup();
        let mut blocks = Vec::new();
        let mut prev = 0;
        for b in bounds {
            blocks.push(b - prev);
            prev = b;
        }
        BlockPartition::new(blocks)
    }

    /// Block norms `rho_b = |z^(b)|` of a point.
    pub fn block_norms(&self, z: &[C64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut start = 0;
        for &k in &self.blocks {
            let s: f64 = z[start..start + k].iter().map(|v| v.norm_sqr()).sum();
            out.push(s.sqrt());
            start += k;
        }
        out
    }
}

/// Declared invariance class of a symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Invariance {
    General,
    Torus,
    Block(BlockPartition),
    Unitary,
}

impl Invariance {
    /// The block partition whose group this class designates, for a given `n`.
    pub fn partition(&self, n: usize) -> Option<BlockPartition> {
        match self {
            Invariance::General => None,
            Invariance::Torus => Some(BlockPartition::torus(n)),
            Invariance::Block(p) => Some(p.clone()),
            Invariance::Unitary => Some(BlockPartition::full(n)),
        }
    }

    /// Whether the declared invariance group contains `U(k_1) x ... x U(k_s)`.
    pub fn contains_group(&self, kappa: &BlockPartition) -> bool {
        match self.partition(kappa.n()) {
            None => false,
            Some(own) => kappa.refines(&own),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Invariance::General => "general",
            Invariance::Torus => "torus",
            Invariance::Block(_) => "block",
            Invariance::Unitary => "unitary",
        }
    }
}

type Evaluator = Arc<dyn Fn(&[C64]) -> C64 + Send + Sync>;

/// A bounded symbol: a pure pointwise map `C^n -> C` with a declared
/// invariance class. Immutable and cheap to clone.
#[derive(Clone)]
pub struct Symbol {
    family: String,
    parameters: BTreeMap<String, f64>,
    invariance: Invariance,
    real: bool,
    /// For radial symbols with a jump: the radius `R` in `|z|` at which the
    /// profile is discontinuous. Spectral quadrature splits there.
    radial_jump: Option<f64>,
    eval: Evaluator,
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Symbol")
            .field("family", &self.family)
            .field("parameters", &self.parameters)
            .field("invariance", &self.invariance)
            .finish_non_exhaustive()
    }
}

impl Symbol {
    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn parameters(&self) -> &BTreeMap<String, f64> {
        &self.parameters
    }

    pub fn invariance(&self) -> &Invariance {
        &self.invariance
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn radial_jump(&self) -> Option<f64> {
        self.radial_jump
    }

    /// Pointwise evaluation.
    pub fn evaluate(&self, z: &[C64]) -> C64 {
        (self.eval)(z)
    }

    /// The pointwise affine combination `alpha * a + beta * b`. The declared
    /// invariance is the common refinement of the two classes.
    pub fn affine(alpha: f64, a: &Symbol, beta: f64, b: &Symbol) -> Result<Symbol> {
        let invariance = match (&a.invariance, &b.invariance) {
            (Invariance::General, _) | (_, Invariance::General) => Invariance::General,
            (Invariance::Unitary, Invariance::Unitary) => Invariance::Unitary,
            (x, y) => {
                // Both are block-type groups of some n; the meet is only
                // computable once n is known, so take it from either partition.
                let pa = match x {
                    Invariance::Block(p) => Some(p.clone()),
                    _ => None,
                };
                let pb = match y {
                    Invariance::Block(p) => Some(p.clone()),
                    _ => None,
                };
                let n = pa
                    .as_ref()
                    .or(pb.as_ref())
                    .map(|p| p.n())
                    .ok_or_else(|| {
                        Error::InvalidParameter(
                            "affine combination of torus/unitary symbols needs a block operand \
                             to determine n; combine via block invariance"
                                .into(),
                        )
                    })?;
                let xa = x.partition(n).expect("non-general");
                let xb = y.partition(n).expect("non-general");
                let meet = xa.meet(&xb)?;
                if meet.is_torus() {
                    Invariance::Torus
                } else {
                    Invariance::Block(meet)
                }
            }
        };
        let (fa, fb) = (a.eval.clone(), b.eval.clone());
        Ok(Symbol {
            family: format!("affine({}, {})", a.family, b.family),
            parameters: BTreeMap::new(),
            invariance,
            real: a.real && b.real,
            radial_jump: a.radial_jump.or(b.radial_jump),
            eval: Arc::new(move |z| alpha * fa(z) + beta * fb(z)),
        })
    }
}

fn get_param(parameters: &BTreeMap<String, f64>, key: &str, family: &str) -> Result<f64> {
    parameters.get(key).copied().ok_or_else(|| {
        Error::InvalidParameter(format!("symbol family `{family}` requires parameter `{key}`"))
    })
}

fn get_index(parameters: &BTreeMap<String, f64>, key: &str, family: &str, max: usize) -> Result<usize> {
    let raw = get_param(parameters, key, family)?;
    let idx = raw as usize;
    if raw.fract() != 0.0 || idx < 1 || idx > max {
        return Err(Error::InvalidParameter(format!(
            "parameter `{key}` of `{family}` must be an integer in 1..={max}, got {raw}"
        )));
    }
    Ok(idx)
}

/// Builds a symbol from the documented catalogue.
///
/// Families (all bounded on `C^n`):
/// - `constant`: `a(z) = c`; radial.
/// - `coordinate_weight`: `|z_i|^2 / (1 + |z|^2)`, bound 1; separately radial.
/// - `block_weight`: `rho_b^2 / (1 + |z|^2)` for a block of `partition`, bound 1.
/// - `total_weight`: `|z|^2 / (1 + |z|^2)`, bound 1; radial.
/// - `ball_indicator`: `1` on `|z| <= R`, else `0`; radial, discontinuous.
/// - `gaussian`: `exp(-alpha |z|^2)`, bound 1; radial.
/// - `phase`: `Re(z_i) / (1 + |z|)`, bound 1; no invariance (general class).
pub fn make_symbol(
    family: &str,
    parameters: &BTreeMap<String, f64>,
    n: usize,
    partition: Option<&BlockPartition>,
) -> Result<Symbol> {
    let params = parameters.clone();
    let total_norm_sqr = |z: &[C64]| -> f64 { z.iter().map(|v| v.norm_sqr()).sum() };
    let sym = match family {
        "constant" => {
            let c = get_param(parameters, "c", family)?;
            Symbol {
                family: family.into(),
                parameters: params,
                invariance: Invariance::Unitary,
                real: true,
                radial_jump: None,
                eval: Arc::new(move |_| C64::new(c, 0.0)),
            }
        }
        "coordinate_weight" => {
            let i = get_index(parameters, "index", family, n)?;
            Symbol {
                family: family.into(),
                parameters: params,
                invariance: Invariance::Torus,
                real: true,
                radial_jump: None,
                eval: Arc::new(move |z| {
                    C64::new(z[i - 1].norm_sqr() / (1.0 + total_norm_sqr(z)), 0.0)
                }),
            }
        }
        "block_weight" => {
            let kappa = partition
                .ok_or_else(|| {
                    Error::InvalidParameter("block_weight requires a partition".into())
                })?
                .clone();
            if kappa.n() != n {
                return Err(Error::DimensionMismatch(format!(
                    "partition sums to {} but n = {n}",
                    kappa.n()
                )));
            }
            let b = get_index(parameters, "block", family, kappa.num_blocks())?;
            let kap = kappa.clone();
            Symbol {
                family: family.into(),
                parameters: params,
                invariance: Invariance::Block(kappa),
                real: true,
                radial_jump: None,
                eval: Arc::new(move |z| {
                    let rho = kap.block_norms(z);
                    C64::new(rho[b - 1].powi(2) / (1.0 + total_norm_sqr(z)), 0.0)
                }),
            }
        }
        "total_weight" => Symbol {
            family: family.into(),
            parameters: params,
            invariance: Invariance::Unitary,
            real: true,
            radial_jump: None,
            eval: Arc::new(move |z| {
                let t = total_norm_sqr(z);
                C64::new(t / (1.0 + t), 0.0)
            }),
        },
        "ball_indicator" => {
            let radius = get_param(parameters, "radius", family)?;
            if radius <= 0.0 || !radius.is_finite() {
                return Err(Error::InvalidParameter(
                    "ball_indicator radius must be positive and finite".into(),
                ));
            }
            Symbol {
                family: family.into(),
                parameters: params,
                invariance: Invariance::Unitary,
                real: true,
                radial_jump: Some(radius),
                eval: Arc::new(move |z| {
                    let inside = total_norm_sqr(z).sqrt() <= radius;
                    C64::new(if inside { 1.0 } else { 0.0 }, 0.0)
                }),
            }
        }
        "gaussian" => {
            let alpha = get_param(parameters, "alpha", family)?;
            if alpha < 0.0 {
                return Err(Error::InvalidParameter(
                    "gaussian alpha must be non-negative".into(),
                ));
            }
            Symbol {
                family: family.into(),
                parameters: params,
                invariance: Invariance::Unitary,
                real: true,
                radial_jump: None,
                eval: Arc::new(move |z| C64::new((-alpha * total_norm_sqr(z)).exp(), 0.0)),
            }
        }
        "phase" => {
            let i = get_index(parameters, "index", family, n)?;
            Symbol {
                family: family.into(),
                parameters: params,
                invariance: Invariance::General,
                real: true,
                radial_jump: None,
                eval: Arc::new(move |z| {
                    C64::new(z[i - 1].re / (1.0 + total_norm_sqr(z).sqrt()), 0.0)
                }),
            }
        }
        other => return Err(Error::UnknownSymbolFamily(other.into())),
    };
    Ok(sym)
}

/// Haar average of `a` over the diagonal torus, by the tensor-trapezoid rule
/// with `phase_grid` nodes per circle. The trapezoid rule on the circle is
/// exact for trigonometric polynomials of degree below the grid size, so
/// smooth phase dependence is resolved spectrally.
pub fn radialize_torus(a: &Symbol, phase_grid: usize) -> Result<Symbol> {
    if phase_grid == 0 {
        return Err(Error::InvalidParameter("phase_grid must be >= 1".into()));
    }
    let phases: Vec<C64> = (0..phase_grid)
        .map(|j| C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / phase_grid as f64))
        .collect();
    let inner = a.eval.clone();
    let real = a.real;
    Ok(Symbol {
        family: format!("torus_avg({})", a.family),
        parameters: a.parameters.clone(),
        invariance: Invariance::Torus,
        real,
        radial_jump: a.radial_jump,
        eval: Arc::new(move |z| {
            let n = z.len();
            let mut idx = vec![0usize; n];
            let mut rotated = vec![C64::new(0.0, 0.0); n];
            let mut acc = C64::new(0.0, 0.0);
            let total = phases.len().pow(n as u32);
            loop {
                for i in 0..n {
                    rotated[i] = z[i] * phases[idx[i]];
                }
                acc += inner(&rotated);
                let mut axis = 0;
                loop {
                    idx[axis] += 1;
                    if idx[axis] < phases.len() {
                        break;
                    }
                    idx[axis] = 0;
                    axis += 1;
                    if axis == n {
                        let mean = acc / total as f64;
                        return if real { C64::new(mean.re, 0.0) } else { mean };
                    }
                }
            }
        }),
    })
}

/// Haar average of `a` over `U(k_1) x ... x U(k_s)`: a seeded Monte Carlo mean
/// over `sphere_samples` independent Haar-uniform block rotations, precomputed
/// at construction so evaluation is read-only and deterministic.
pub fn radialize_block(
    a: &Symbol,
    kappa: &BlockPartition,
    sphere_samples: usize,
    seed: u64,
) -> Result<Symbol> {
    if sphere_samples == 0 {
        return Err(Error::InvalidParameter("sphere_samples must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rotations: Vec<CMatrix> = (0..sphere_samples)
        .map(|_| haar_block_unitary(kappa, &mut rng))
        .collect();
    let inner = a.eval.clone();
    let real = a.real;
    let n = kappa.n();
    Ok(Symbol {
        family: format!("block_avg({})", a.family),
        parameters: a.parameters.clone(),
        invariance: Invariance::Block(kappa.clone()),
        real,
        radial_jump: a.radial_jump,
        eval: Arc::new(move |z| {
            debug_assert_eq!(z.len(), n);
            let mut acc = C64::new(0.0, 0.0);
            let mut rotated = vec![C64::new(0.0, 0.0); z.len()];
            for u in &rotations {
                for (i, r) in rotated.iter_mut().enumerate() {
                    *r = (0..z.len()).map(|j| u[(i, j)] * z[j]).sum();
                }
                acc += inner(&rotated);
            }
            let mean = acc / rotations.len() as f64;
            if real {
                C64::new(mean.re, 0.0)
            } else {
                mean
            }
        }),
    })
}

/// JSON schema for a symbol at the CLI boundary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub family: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    /// Optional declared invariance; checked against the family when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariance: Option<String>,
    /// Block partition, required by `block_weight`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<usize>>,
}

impl SymbolSpec {
    pub fn build(&self, n: usize) -> Result<Symbol> {
        let partition = match &self.partition {
            Some(blocks) => Some(BlockPartition::new(blocks.clone())?),
            None => None,
        };
        let sym = make_symbol(&self.family, &self.parameters, n, partition.as_ref())?;
        if let Some(declared) = &self.invariance {
            if declared != sym.invariance().name() {
                return Err(Error::InvalidParameter(format!(
                    "symbol `{}` has invariance `{}`, config declares `{declared}`",
                    self.family,
                    sym.invariance().name()
                )));
            }
        }
        Ok(sym)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::representation::haar_block_unitary;
    use rand::Rng;

    fn random_point(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
        (0..n)
            .map(|_| C64::new(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0))
            .collect()
    }

    fn apply(u: &CMatrix, z: &[C64]) -> Vec<C64> {
        (0..z.len())
            .map(|i| (0..z.len()).map(|j| u[(i, j)] * z[j]).sum())
            .collect()
    }

    #[test]
    fn catalogue_values() {
        let c1 = make_symbol("constant", &BTreeMap::from([("c".into(), 1.0)]), 2, None).unwrap();
        assert_eq!(c1.evaluate(&[C64::new(3.0, -2.0), C64::new(0.1, 0.0)]), C64::new(1.0, 0.0));

        let cw = make_symbol(
            "coordinate_weight",
            &BTreeMap::from([("index".into(), 1.0)]),
            3,
            None,
        )
        .unwrap();
        let z = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        assert!((cw.evaluate(&z).re - 0.5).abs() < 1e-15);

        let ball = make_symbol(
            "ball_indicator",
            &BTreeMap::from([("radius".into(), 1.0)]),
            1,
            None,
        )
        .unwrap();
        assert_eq!(ball.evaluate(&[C64::new(2.0, 0.0)]), C64::new(0.0, 0.0));

        let tw = make_symbol("total_weight", &BTreeMap::new(), 1, None).unwrap();
        assert!((tw.evaluate(&[C64::new(3f64.sqrt(), 0.0)]).re - 0.75).abs() < 1e-15);

        let g = make_symbol("gaussian", &BTreeMap::from([("alpha".into(), 1.0)]), 2, None).unwrap();
        assert_eq!(g.evaluate(&[C64::new(0.0, 0.0); 2]), C64::new(1.0, 0.0));
    }

    #[test]
    fn unknown_family_and_bad_parameters() {
        assert!(matches!(
            make_symbol("nope", &BTreeMap::new(), 2, None),
            Err(Error::UnknownSymbolFamily(_))
        ));
        assert!(make_symbol(
            "coordinate_weight",
            &BTreeMap::from([("index".into(), 5.0)]),
            2,
            None
        )
        .is_err());
        assert!(make_symbol(
            "ball_indicator",
            &BTreeMap::from([("radius".into(), -1.0)]),
            2,
            None
        )
        .is_err());
    }

    #[test]
    fn invariance_certification() {
        // For each exact family and 100 random (k, z) with k in the declared
        // group: |a(kz) - a(z)| <= 1e-12.
        let n = 3;
        let kappa21 = BlockPartition::new(vec![2, 1]).unwrap();
        let symbols: Vec<Symbol> = vec![
            make_symbol("constant", &BTreeMap::from([("c".into(), 2.5)]), n, None).unwrap(),
            make_symbol(
                "coordinate_weight",
                &BTreeMap::from([("index".into(), 2.0)]),
                n,
                None,
            )
            .unwrap(),
            make_symbol(
                "block_weight",
                &BTreeMap::from([("block".into(), 1.0)]),
                n,
                Some(&kappa21),
            )
            .unwrap(),
            make_symbol("total_weight", &BTreeMap::new(), n, None).unwrap(),
            make_symbol(
                "ball_indicator",
                &BTreeMap::from([("radius".into(), 1.0)]),
                n,
                None,
            )
            .unwrap(),
            make_symbol("gaussian", &BTreeMap::from([("alpha".into(), 0.7)]), n, None).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for sym in &symbols {
            let group = sym.invariance().partition(n).unwrap();
            for _ in 0..100 {
                let z = random_point(n, &mut rng);
                let k = haar_block_unitary(&group, &mut rng);
                let kz = apply(&k, &z);
                let diff = (sym.evaluate(&kz) - sym.evaluate(&z)).norm();
                assert!(diff <= 1e-12, "{}: defect {diff}", sym.family());
            }
        }
    }

    #[test]
    fn torus_radialization_fixes_invariants_and_kills_phase() {
        let n = 2;
        let c = make_symbol("constant", &BTreeMap::from([("c".into(), 3.0)]), n, None).unwrap();
        let avg = radialize_torus(&c, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let z = random_point(n, &mut rng);
            assert!((avg.evaluate(&z) - C64::new(3.0, 0.0)).norm() < 1e-14);
        }

        let ph = make_symbol("phase", &BTreeMap::from([("index".into(), 1.0)]), n, None).unwrap();
        let avg = radialize_torus(&ph, 8).unwrap();
        for _ in 0..20 {
            let z = random_point(n, &mut rng);
            assert!(avg.evaluate(&z).norm() < 1e-15);
        }
    }

    #[test]
    fn affine_combinations() {
        let n = 3;
        let tw = make_symbol("total_weight", &BTreeMap::new(), n, None).unwrap();
        let g = make_symbol("gaussian", &BTreeMap::from([("alpha".into(), 0.5)]), n, None).unwrap();
        let mixed = Symbol::affine(2.0, &tw, -1.0, &g).unwrap();
        assert!(matches!(mixed.invariance(), Invariance::Unitary));
        assert!(mixed.is_real());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let z = random_point(n, &mut rng);
            let expect = 2.0 * tw.evaluate(&z) - g.evaluate(&z);
            assert!((mixed.evaluate(&z) - expect).norm() < 1e-15);
        }

        // Block + unitary meet: the block partition wins.
        let kappa = BlockPartition::new(vec![2, 1]).unwrap();
        let bw = make_symbol(
            "block_weight",
            &BTreeMap::from([("block".into(), 1.0)]),
            n,
            Some(&kappa),
        )
        .unwrap();
        let combined = Symbol::affine(1.0, &bw, 1.0, &tw).unwrap();
        match combined.invariance() {
            Invariance::Block(p) => assert_eq!(p.blocks(), kappa.blocks()),
            other => panic!("expected block invariance, got {}", other.name()),
        }

        // Torus + unitary has no partition to fix n: rejected.
        let cw = make_symbol(
            "coordinate_weight",
            &BTreeMap::from([("index".into(), 1.0)]),
            n,
            None,
        )
        .unwrap();
        assert!(Symbol::affine(1.0, &cw, 1.0, &tw).is_err());
    }

    #[test]
    fn torus_radialization_is_idempotent() {
        let n = 2;
        let ph = make_symbol("phase", &BTreeMap::from([("index".into(), 2.0)]), n, None).unwrap();
        let once = radialize_torus(&ph, 16).unwrap();
        let twice = radialize_torus(&once, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let z = random_point(n, &mut rng);
            let d = (once.evaluate(&z) - twice.evaluate(&z)).norm();
            assert!(d <= 1e-12, "idempotence defect {d}");
        }
    }

    #[test]
    fn block_radialization_full_group_sphere_average() {
        // kappa = (n): averaging |z_1|^2/(1+|z|^2) over U(n) gives |z|^2/(n(1+|z|^2)).
        let n = 2;
        let cw = make_symbol(
            "coordinate_weight",
            &BTreeMap::from([("index".into(), 1.0)]),
            n,
            None,
        )
        .unwrap();
        let kappa = BlockPartition::full(n);
        let samples = 20_000;
        let avg = radialize_block(&cw, &kappa, samples, 77).unwrap();
        let tw = make_symbol("total_weight", &BTreeMap::new(), n, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let z = random_point(n, &mut rng);
            let got = avg.evaluate(&z).re;
            let expect = tw.evaluate(&z).re / n as f64;
            // Values of |z_1|^2/(1+|z|^2) lie in [0, tw]; 3 standard errors.
            let se = tw.evaluate(&z).re / (samples as f64).sqrt();
            assert!((got - expect).abs() <= 3.0 * se, "got {got}, expect {expect}");
        }
    }

    #[test]
    fn block_radialization_agrees_with_torus_on_all_ones() {
        let n = 2;
        let ph = make_symbol("phase", &BTreeMap::from([("index".into(), 1.0)]), n, None).unwrap();
        let torus_avg = radialize_torus(&ph, 32).unwrap();
        let samples = 40_000;
        let block_avg = radialize_block(&ph, &BlockPartition::torus(n), samples, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let z = random_point(n, &mut rng);
            let d = (torus_avg.evaluate(&z) - block_avg.evaluate(&z)).norm();
            let se = 1.0 / (samples as f64).sqrt();
            assert!(d <= 4.0 * se, "defect {d}");
        }
    }

    #[test]
    fn block_radialization_fixes_invariant_symbols() {
        let n = 3;
        let kappa = BlockPartition::new(vec![2, 1]).unwrap();
        let bw = make_symbol(
            "block_weight",
            &BTreeMap::from([("block".into(), 1.0)]),
            n,
            Some(&kappa),
        )
        .unwrap();
        let avg = radialize_block(&bw, &kappa, 200, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let z = random_point(n, &mut rng);
            // Exact invariance: every rotation evaluates to the same value.
            assert!((avg.evaluate(&z) - bw.evaluate(&z)).norm() <= 1e-12);
        }
    }

    #[test]
    fn averaging_is_linear_and_positive() {
        let n = 2;
        let ph = make_symbol("phase", &BTreeMap::from([("index".into(), 1.0)]), n, None).unwrap();
        let cw = make_symbol(
            "coordinate_weight",
            &BTreeMap::from([("index".into(), 2.0)]),
            n,
            None,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a1 = radialize_torus(&ph, 16).unwrap();
        let a2 = radialize_torus(&cw, 16).unwrap();
        for _ in 0..50 {
            let z = random_point(n, &mut rng);
            // Linearity checked pointwise on the evaluators.
            let lhs = 2.0 * a1.evaluate(&z) + 3.0 * a2.evaluate(&z);
            let combined = 2.0 * ph.evaluate(&z) + 3.0 * cw.evaluate(&z);
            // Average of the combination, computed with the same grid.
            let avg_combined = {
                let f = |zz: &[C64]| 2.0 * ph.evaluate(zz) + 3.0 * cw.evaluate(zz);
                // Inline trapezoid average over the torus grid.
                let grid = 16;
                let mut acc = C64::new(0.0, 0.0);
                for j1 in 0..grid {
                    for j2 in 0..grid {
                        let t1 = C64::from_polar(1.0, std::f64::consts::TAU * j1 as f64 / grid as f64);
                        let t2 = C64::from_polar(1.0, std::f64::consts::TAU * j2 as f64 / grid as f64);
                        acc += f(&[z[0] * t1, z[1] * t2]);
                    }
                }
                acc / (grid * grid) as f64
            };
            assert!((lhs - avg_combined).norm() < 1e-12);
            let _ = combined;
            // Positivity: nonnegative symbol averages to nonnegative values.
            assert!(a2.evaluate(&z).re >= -1e-15);
        }
    }

    #[test]
    fn partition_refinement_and_meet() {
        let torus = BlockPartition::torus(3);
        let k21 = BlockPartition::new(vec![2, 1]).unwrap();
        let full = BlockPartition::full(3);
        assert!(torus.refines(&k21));
        assert!(k21.refines(&full));
        assert!(!k21.refines(&torus));
        let k12 = BlockPartition::new(vec![1, 2]).unwrap();
        assert_eq!(k21.meet(&k12).unwrap().blocks(), &[1, 1, 1]);
    }

    #[test]
    fn invariance_containment() {
        let k21 = BlockPartition::new(vec![2, 1]).unwrap();
        assert!(Invariance::Unitary.contains_group(&k21));
        assert!(Invariance::Block(k21.clone()).contains_group(&BlockPartition::torus(3)));
        assert!(!Invariance::Torus.contains_group(&k21));
        assert!(!Invariance::General.contains_group(&BlockPartition::torus(3)));
    }
}
