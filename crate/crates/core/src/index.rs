//! Multi-index arithmetic, exact combinatorial weights and degree-graded
//! basis enumeration.
//!
//! Every occupation-number basis vector of the truncated symmetric Fock
//! space is labeled by a [`MultiIndex`]; the ordering fixed here (degree
//! first, then higher leading entries first) is what makes operator
//! matrices reproducible across runs.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// Total degree above which combinatorial weights switch from exact
/// big-integer arithmetic to log-gamma evaluation.
pub const EXACT_WEIGHT_DEGREE: u32 = 40;

/// Occupation-number tuple over a fixed number of modes.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    entries: Box<[u32]>,
}

impl MultiIndex {
    pub fn new(entries: impl Into<Vec<u32>>) -> Self {
        Self { entries: entries.into().into_boxed_slice() }
    }

    /// The zero index (vacuum label) over `modes` modes.
    pub fn zero(modes: usize) -> Self {
        Self { entries: vec![0; modes].into_boxed_slice() }
    }

    /// The unit index e_j (0-based mode `j`).
    pub fn unit(modes: usize, j: usize) -> Self {
        let mut e = vec![0; modes];
        e[j] = 1;
        Self { entries: e.into_boxed_slice() }
    }

    pub fn modes(&self) -> usize {
        self.entries.len()
    }

    /// Total degree |α| = Σ_j α_j.
    pub fn degree(&self) -> u32 {
        self.entries.iter().sum()
    }

    pub fn entry(&self, j: usize) -> u32 {
        self.entries[j]
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// Component-wise sum α + β.
    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.modes(), other.modes());
        Self {
            entries: self
                .entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// α + e_j.
    pub fn raised(&self, j: usize) -> Self {
        let mut e = self.entries.to_vec();
        e[j] += 1;
        Self { entries: e.into_boxed_slice() }
    }

    /// α − e_j, or `None` when α_j = 0.
    pub fn lowered(&self, j: usize) -> Option<Self> {
        if self.entries[j] == 0 {
            return None;
        }
        let mut e = self.entries.to_vec();
        e[j] -= 1;
        Some(Self { entries: e.into_boxed_slice() })
    }

    /// Component-wise difference α − β, or `None` if any component would
    /// go negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        debug_assert_eq!(self.modes(), other.modes());
        let mut e = Vec::with_capacity(self.modes());
        for (a, b) in self.entries.iter().zip(other.entries.iter()) {
            e.push(a.checked_sub(*b)?);
        }
        Some(Self { entries: e.into_boxed_slice() })
    }

    /// Exact α! = Π_j α_j! as a big integer.
    pub fn factorial(&self) -> BigUint {
        let mut acc = BigUint::one();
        for &a in self.entries.iter() {
            for k in 2..=a {
                acc *= k;
            }
        }
        acc
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "α{:?}", self.entries)
    }
}

/// Degree-graded order: lower degree first; within a degree, larger
/// leading entries first, so (1,0) precedes (0,1).
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.entries.cmp(&self.entries))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Mode count and degree cutoff of a truncated Fock space.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub modes: usize,
    pub max_degree: u32,
}

impl TruncationSpec {
    pub fn new(modes: usize, max_degree: u32) -> Self {
        assert!(modes >= 1, "mode count must be positive");
        Self { modes, max_degree }
    }

    /// Number of basis elements, binomial(modes + max_degree, modes).
    pub fn basis_size(&self) -> usize {
        binomial(self.modes as u64 + self.max_degree as u64, self.modes as u64)
            .to_usize()
            .expect("basis size fits in usize")
    }

    /// Whether α belongs to this truncated space.
    pub fn contains(&self, alpha: &MultiIndex) -> bool {
        alpha.modes() == self.modes && alpha.degree() <= self.max_degree
    }

    /// All multi-indices with |α| ≤ max_degree in graded order.
    pub fn enumerate_basis(&self) -> Vec<MultiIndex> {
        let mut out = Vec::with_capacity(self.basis_size());
        let mut current = vec![0u32; self.modes];
        for degree in 0..=self.max_degree {
            push_compositions(degree, 0, &mut current, &mut out);
        }
        out
    }
}

/// Basis list of a truncation together with a position lookup.
#[derive(Clone, Debug)]
pub struct BasisTable {
    spec: TruncationSpec,
    list: Vec<MultiIndex>,
    pos: std::collections::HashMap<MultiIndex, usize>,
}

impl BasisTable {
    pub fn new(spec: TruncationSpec) -> Self {
        let list = spec.enumerate_basis();
        let pos = list.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        Self { spec, list, pos }
    }

    pub fn spec(&self) -> TruncationSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn at(&self, i: usize) -> &MultiIndex {
        &self.list[i]
    }

    pub fn index_of(&self, alpha: &MultiIndex) -> Option<usize> {
        self.pos.get(alpha).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.list.iter()
    }
}

fn push_compositions(left: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = left;
        out.push(MultiIndex::new(current.clone()));
        return;
    }
    for first in (0..=left).rev() {
        current[pos] = first;
        push_compositions(left - first, pos + 1, current, out);
    }
}

/// All multi-indices over `parts` slots with total degree exactly `degree`,
/// in the same order the graded basis uses within one degree.
pub fn compositions_of_degree(degree: u32, parts: usize) -> Vec<MultiIndex> {
    assert!(parts >= 1);
    let mut out = Vec::new();
    let mut current = vec![0u32; parts];
    push_compositions(degree, 0, &mut current, &mut out);
    out
}

/// Exact binomial coefficient as a big integer.
pub fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k.min(n));
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// sqrt((α+β)! / (α! β!)), the coefficient with which u_{α+β} appears in
/// the composition of u_α and u_β.
///
/// Exact big-integer arithmetic below [`EXACT_WEIGHT_DEGREE`] total
/// degree, log-gamma evaluation above it (the ratio overflows f64 long
/// before the weights stop being useful).
pub fn merge_weight(alpha: &MultiIndex, beta: &MultiIndex) -> f64 {
    assert_eq!(alpha.modes(), beta.modes(), "mode count mismatch");
    if alpha.degree() + beta.degree() <= EXACT_WEIGHT_DEGREE {
        merge_weight_exact(alpha, beta)
    } else {
        merge_weight_logspace(alpha, beta)
    }
}

/// (α+β)!/(α!β!) = Π_j binomial(α_j+β_j, α_j), an exact integer.
pub(crate) fn merge_weight_exact(alpha: &MultiIndex, beta: &MultiIndex) -> f64 {
    let mut ratio = BigUint::one();
    for j in 0..alpha.modes() {
        ratio *= binomial((alpha.entry(j) + beta.entry(j)) as u64, alpha.entry(j) as u64);
    }
    ratio.to_f64().expect("weight ratio representable").sqrt()
}

pub(crate) fn merge_weight_logspace(alpha: &MultiIndex, beta: &MultiIndex) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let mut log_ratio = 0.0;
    for j in 0..alpha.modes() {
        let a = alpha.entry(j) as f64;
        let b = beta.entry(j) as f64;
        log_ratio += ln_gamma(a + b + 1.0) - ln_gamma(a + 1.0) - ln_gamma(b + 1.0);
    }
    (0.5 * log_ratio).exp()
}
