//! Exact multi-index arithmetic: enumeration of the index set
//! `J_n(m) = { p in N_0^n : |p| <= m }`, multinomial coefficients, and dimensions
//! of homogeneous polynomial components.
//!
//! Everything here is exact integer arithmetic; factorial ratios that feed the
//! floating-point layers are computed as big-integer quotients first and
//! converted to `f64` at the very end.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::bergman::SpaceParams;
use crate::error::{Error, Result};

/// Largest factorial argument kept in exact big-integer form. Beyond this the
/// callers fall back to log-gamma in double precision.
pub const EXACT_FACTORIAL_LIMIT: u32 = 60;

/// A multi-index `p = (p_1, ..., p_n)` of non-negative integers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// The total degree `|p| = p_1 + ... + p_n`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Sum of the entries over each block of the partition: the block-degree
    /// vector that labels isotypic components.
    pub fn block_degrees(&self, blocks: &[usize]) -> Vec<u32> {
        let mut out = Vec::with_capacity(blocks.len());
        let mut start = 0usize;
        for &k in blocks {
            out.push(self.0[start..start + k].iter().sum());
            start += k;
        }
        out
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// The index set `J_n(m)` in a fixed graded lexicographic order, together with
/// the inverse position map. Immutable after construction.
#[derive(Clone, Debug)]
pub struct BasisOrder {
    params: SpaceParams,
    indices: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
}

impl BasisOrder {
    pub fn params(&self) -> SpaceParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn multi_index(&self, pos: usize) -> &MultiIndex {
        &self.indices[pos]
    }

    pub fn position(&self, p: &MultiIndex) -> Option<usize> {
        self.position.get(p).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &MultiIndex)> {
        self.indices.iter().enumerate()
    }
}

/// Enumerates `J_n(m)` in graded lexicographic order: ascending total degree,
/// ties broken lexicographically. The order is total and deterministic, and
/// components of the `U(n)` decomposition (levels `|p| = k`) occupy contiguous
/// position ranges.
pub fn enumerate_multi_indices(n: usize, m: u32) -> Result<BasisOrder> {
    let params = SpaceParams::new(n, m)?;
    let mut indices = Vec::with_capacity(params.space_dimension());
    for k in 0..=m {
        let mut level = Vec::new();
        collect_degree(n, k, &mut Vec::with_capacity(n), &mut level);
        level.sort();
        indices.extend(level);
    }
    let position = indices
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    Ok(BasisOrder {
        params,
        indices,
        position,
    })
}

fn collect_degree(n: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if prefix.len() == n - 1 {
        prefix.push(remaining);
        out.push(MultiIndex::new(prefix.clone()));
        prefix.pop();
        return;
    }
    for v in 0..=remaining {
        prefix.push(v);
        collect_degree(n, remaining - v, prefix, out);
        prefix.pop();
    }
}

pub fn factorial_big(k: u32) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=u64::from(k) {
        acc *= i;
    }
    acc
}

/// ln(k!) via Stirling-backed `ln_gamma`, for arguments beyond the exact range.
pub fn ln_factorial(k: u32) -> f64 {
    ln_gamma(f64::from(k) + 1.0)
}

/// Lanczos approximation of ln Gamma(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    // g = 7, n = 9 Lanczos coefficients, kept at full published precision.
    #[allow(clippy::excessive_precision)]
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Binomial coefficient `C(n, k)` as an exact integer.
pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..u128::from(k) {
        acc = acc * (u128::from(n) - i) / (i + 1);
    }
    acc
}

/// Multinomial coefficient `C(k, p) = k! / (p_1! ... p_n!)` for `|p| = k`,
/// exact and overflow-free for `k <= 60`.
pub fn multinomial(k: u32, p: &MultiIndex) -> Result<u128> {
    if p.degree() != k {
        return Err(Error::InvalidParameter(format!(
            "multinomial requires |p| = k, got |p| = {}, k = {}",
            p.degree(),
            k
        )));
    }
    if k <= EXACT_FACTORIAL_LIMIT {
        let mut num = factorial_big(k);
        for &pi in p.entries() {
            num /= factorial_big(pi);
        }
        num.to_u128().ok_or_else(|| {
            Error::InvalidParameter(format!("multinomial C({k}, {p:?}) exceeds u128"))
        })
    } else {
        Err(Error::InvalidParameter(format!(
            "multinomial argument k = {k} exceeds exact range {EXACT_FACTORIAL_LIMIT}"
        )))
    }
}

/// `C(k, p)` as a double, usable past the exact range.
pub fn multinomial_f64(k: u32, p: &MultiIndex) -> f64 {
    let mut ln = ln_factorial(k);
    for &pi in p.entries() {
        ln -= ln_factorial(pi);
    }
    ln.exp()
}

/// Dimension of the space of homogeneous polynomials of degree `k` on `C^n`:
/// `C(n+k-1, k)`.
pub fn homogeneous_dimension(n: usize, k: u32) -> Result<u128> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    Ok(binomial(n as u32 + k - 1, k))
}

/// Exact ratio of factorial products `prod(num_i!) / prod(den_i!)` converted to
/// `f64` at the end. Falls back to log-gamma when any argument is out of the
/// exact range.
pub fn factorial_ratio_f64(num: &[u32], den: &[u32]) -> f64 {
    let exact = num
        .iter()
        .chain(den.iter())
        .all(|&k| k <= EXACT_FACTORIAL_LIMIT);
    if exact {
        let mut a = BigUint::one();
        for &k in num {
            a *= factorial_big(k);
        }
        let mut b = BigUint::one();
        for &k in den {
            b *= factorial_big(k);
        }
        a.to_f64().unwrap_or(f64::INFINITY) / b.to_f64().unwrap_or(f64::INFINITY)
    } else {
        let ln: f64 = num.iter().map(|&k| ln_factorial(k)).sum::<f64>()
            - den.iter().map(|&k| ln_factorial(k)).sum::<f64>();
        ln.exp()
    }
}
