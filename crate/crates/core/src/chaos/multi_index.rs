use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Finitely supported multi-index; entry `k` is the degree in parameter y_{k+1}.
///
/// Trailing zeros are never stored, so equal indices have equal representations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    /// The zero index.
    pub fn zero() -> Self {
        MultiIndex(Vec::new())
    }

    /// Builds an index from degrees, trimming trailing zeros.
    pub fn new(mut degrees: Vec<u32>) -> Self {
        while degrees.last() == Some(&0) {
            degrees.pop();
        }
        MultiIndex(degrees)
    }

    /// Kronecker index ε^(m) for zero-based parameter `m`.
    pub fn unit(m: usize) -> Self {
        let mut d = vec![0; m + 1];
        d[m] = 1;
        MultiIndex(d)
    }

    /// Degree in zero-based parameter `m`.
    pub fn get(&self, m: usize) -> u32 {
        self.0.get(m).copied().unwrap_or(0)
    }

    /// Stored degrees (no trailing zeros).
    pub fn degrees(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// One past the largest parameter with a positive degree.
    pub fn support_len(&self) -> usize {
        self.0.len()
    }

    /// Zero-based parameters with positive degree.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &d)| d > 0).map(|(m, _)| m)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// This index with the degree of parameter `m` shifted by `delta`; `None` if negative.
    pub fn shifted(&self, m: usize, delta: i32) -> Option<Self> {
        let cur = self.get(m) as i64 + delta as i64;
        if cur < 0 {
            return None;
        }
        let mut d = self.0.clone();
        if d.len() <= m {
            d.resize(m + 1, 0);
        }
        d[m] = cur as u32;
        Some(MultiIndex::new(d))
    }

    /// Parenthesized form padded with zeros to `width` entries, e.g. "(1 0 1 0)".
    pub fn format_padded(&self, width: usize) -> String {
        let w = width.max(self.0.len()).max(1);
        let parts: Vec<String> = (0..w).map(|m| self.get(m).to_string()).collect();
        format!("({})", parts.join(" "))
    }

    /// Parses the parenthesized form; surrounding whitespace is ignored.
    pub fn parse(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::input(format!("multi-index '{s}' is not parenthesized")))?;
        let degrees = inner
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<u32>().map_err(|_| Error::input(format!("invalid degree '{t}' in '{s}'"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiIndex::new(degrees))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format_padded(0))
    }
}

/// Graded order: total degree first, then larger degrees in earlier parameters first,
/// so ε^(1) precedes ε^(2).
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree().cmp(&other.total_degree()).then_with(|| {
            let n = self.0.len().max(other.0.len());
            for m in 0..n {
                match other.get(m).cmp(&self.get(m)) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sorted set of distinct multi-indices that always contains the zero index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexSet {
    indices: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
}

impl Default for MultiIndexSet {
    fn default() -> Self {
        Self::zero()
    }
}

impl MultiIndexSet {
    /// The set {0}.
    pub fn zero() -> Self {
        Self::from_indices([MultiIndex::zero()])
    }

    /// Builds a set from arbitrary indices; duplicates are dropped and zero is added.
    pub fn from_indices(indices: impl IntoIterator<Item = MultiIndex>) -> Self {
        let mut v: Vec<MultiIndex> = indices.into_iter().collect();
        v.push(MultiIndex::zero());
        v.sort();
        v.dedup();
        let position = v.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        MultiIndexSet { indices: v, position }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    /// Never true: the zero index is always present.
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }

    pub fn as_slice(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn contains(&self, mi: &MultiIndex) -> bool {
        self.position.contains_key(mi)
    }

    /// Block position of `mi` in the sorted order.
    pub fn position(&self, mi: &MultiIndex) -> Option<usize> {
        self.position.get(mi).copied()
    }

    /// M_P: 0 for {0}, otherwise the largest active (one-based) parameter.
    pub fn max_active(&self) -> usize {
        self.indices.iter().map(MultiIndex::support_len).max().unwrap_or(0)
    }

    /// Zero-based parameters that are active in some index.
    pub fn active_parameters(&self) -> Vec<usize> {
        let mut a: Vec<usize> = self.indices.iter().flat_map(|mi| mi.support().collect::<Vec<_>>()).collect();
        a.sort();
        a.dedup();
        a
    }

    /// Largest degree of parameter `m` present.
    pub fn max_degree(&self, m: usize) -> u32 {
        self.indices.iter().map(|mi| mi.get(m)).max().unwrap_or(0)
    }

    /// Largest degree over all parameters.
    pub fn max_degree_overall(&self) -> u32 {
        self.indices.iter().flat_map(|mi| mi.degrees().iter().copied()).max().unwrap_or(0)
    }

    /// Set union.
    pub fn union(&self, other: impl IntoIterator<Item = MultiIndex>) -> Self {
        Self::from_indices(self.indices.iter().cloned().chain(other))
    }
}

/// Detail index set Q: all μ ∉ P of the form ν ± ε^(m) with ν ∈ P and
/// m ≤ M_P + M̄ (one-based), sorted.
pub fn detail_index_set(p: &MultiIndexSet, m_bar: usize) -> Vec<MultiIndex> {
    let m_range = p.max_active() + m_bar;
    let mut q = Vec::new();
    for nu in p.iter() {
        for m in 0..m_range {
            for delta in [1, -1] {
                if let Some(mu) = nu.shifted(m, delta) {
                    if !p.contains(&mu) {
                        q.push(mu);
                    }
                }
            }
        }
    }
    q.sort();
    q.dedup();
    q
}
