//! Finitely supported multi-indices and downward-closed index sets.
//!
//! A multi-index is a map from (1-based) dimension to a positive exponent;
//! zero entries are never stored, so equality of the sparse maps is equality
//! of the mathematical objects even though the ambient dimension is
//! unbounded. Index sets iterate in a canonical order (lexicographic on the
//! densified prefix), which fixes the floating-point reduction order of every
//! downstream sum.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::UqError;

/// A finitely supported multi-index in `N_0^N`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    /// dimension (1-based) -> exponent, exponents strictly positive
    entries: BTreeMap<usize, u32>,
}

impl MultiIndex {
    /// The zero multi-index.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Build from a dense prefix `[nu_1, nu_2, ...]`; zeros are dropped.
    pub fn from_dense(dense: &[u32]) -> Self {
        let entries = dense
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(i, &v)| (i + 1, v))
            .collect();
        Self { entries }
    }

    /// Exponent in dimension `dim` (1-based).
    pub fn get(&self, dim: usize) -> u32 {
        self.entries.get(&dim).copied().unwrap_or(0)
    }

    /// Set the exponent in dimension `dim`; zero removes the entry.
    pub fn set(&mut self, dim: usize, value: u32) {
        assert!(dim >= 1, "dimensions are 1-based");
        if value == 0 {
            self.entries.remove(&dim);
        } else {
            self.entries.insert(dim, value);
        }
    }

    /// Iterator over `(dimension, exponent)` pairs in increasing dimension.
    pub fn support(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.entries.iter().map(|(&d, &v)| (d, v))
    }

    /// `|nu| = sum_j nu_j`.
    pub fn total_degree(&self) -> u64 {
        self.entries.values().map(|&v| v as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest dimension with a nonzero exponent; 0 for the zero index.
    pub fn max_dim(&self) -> usize {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    /// Componentwise partial order `self <= other`.
    pub fn leq(&self, other: &Self) -> bool {
        self.entries.iter().all(|(&d, &v)| v <= other.get(d))
    }

    /// `self + e_dim`.
    pub fn plus_unit(&self, dim: usize) -> Self {
        let mut out = self.clone();
        out.set(dim, out.get(dim) + 1);
        out
    }

    /// `self - e_dim`, or `None` if the entry is zero.
    pub fn minus_unit(&self, dim: usize) -> Option<Self> {
        let v = self.get(dim);
        if v == 0 {
            None
        } else {
            let mut out = self.clone();
            out.set(dim, v - 1);
            Some(out)
        }
    }

    /// Dense prefix of length `len` (entries beyond `len` are dropped).
    pub fn to_dense(&self, len: usize) -> Vec<u32> {
        let mut out = vec![0; len];
        for (&d, &v) in &self.entries {
            if d <= len {
                out[d - 1] = v;
            }
        }
        out
    }

    /// Dense prefix just covering the support.
    pub fn to_dense_trimmed(&self) -> Vec<u32> {
        self.to_dense(self.max_dim())
    }
}

impl Ord for MultiIndex {
    /// Lexicographic order on the densified prefix.
    fn cmp(&self, other: &Self) -> Ordering {
        let mut a = self.entries.iter().peekable();
        let mut b = other.entries.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => return Ordering::Equal,
                // the remaining side has a nonzero entry where the other is zero
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(&da, &va)), Some(&(&db, &vb))) => {
                    if da < db {
                        return Ordering::Greater;
                    } else if db < da {
                        return Ordering::Less;
                    } else if va != vb {
                        return va.cmp(&vb);
                    }
                    a.next();
                    b.next();
                }
            }
        }
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        let dense = self.to_dense_trimmed();
        for (i, v) in dense.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_dense_trimmed().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let dense = Vec::<u32>::deserialize(deserializer)?;
        Ok(MultiIndex::from_dense(&dense))
    }
}

/// A finite set of multi-indices with canonical iteration order.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct IndexSet {
    members: BTreeSet<MultiIndex>,
}

impl IndexSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// The set `{0}`.
    pub fn singleton_zero() -> Self {
        let mut s = Self::new();
        s.insert(MultiIndex::zero());
        s
    }

    pub fn insert(&mut self, nu: MultiIndex) -> bool {
        self.members.insert(nu)
    }

    pub fn contains(&self, nu: &MultiIndex) -> bool {
        self.members.contains(nu)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Canonical (densified-lexicographic) iteration.
    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.members.iter()
    }

    /// Largest dimension active in any member.
    pub fn max_dim(&self) -> usize {
        self.members.iter().map(|nu| nu.max_dim()).max().unwrap_or(0)
    }

    /// Checks the downward-closedness property by one-step predecessors.
    pub fn is_downward_closed(&self) -> bool {
        self.validate_downward_closed().is_ok()
    }

    /// As `is_downward_closed`, reporting the first missing predecessor.
    pub fn validate_downward_closed(&self) -> Result<(), UqError> {
        for nu in &self.members {
            for (dim, _) in nu.support() {
                let mu = nu.minus_unit(dim).expect("support entries are positive");
                if !self.members.contains(&mu) {
                    return Err(UqError::NotDownwardClosed {
                        missing: mu.to_string(),
                        of: nu.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Smallest downward-closed superset.
    pub fn downward_closure(&self) -> IndexSet {
        let mut out = BTreeSet::new();
        let mut stack: Vec<MultiIndex> = self.members.iter().cloned().collect();
        while let Some(nu) = stack.pop() {
            if out.contains(&nu) {
                continue;
            }
            for (dim, _) in nu.support() {
                let mu = nu.minus_unit(dim).expect("support entries are positive");
                if !out.contains(&mu) {
                    stack.push(mu);
                }
            }
            out.insert(nu);
        }
        if out.is_empty() {
            // closure of the empty set is empty
            return IndexSet::new();
        }
        IndexSet { members: out }
    }

    /// Combination coefficients `c_nu = sum_{e in {0,1}^N : nu+e in set} (-1)^|e|`
    /// for every member, in canonical order.
    ///
    /// Rather than enumerating `e`, this scans members `mu >= nu` with
    /// `mu - nu` binary, which is exact and `O(|set|^2)`.
    pub fn combination_coefficients(&self) -> Result<Vec<(MultiIndex, i64)>, UqError> {
        self.validate_downward_closed()?;
        let members: Vec<&MultiIndex> = self.members.iter().collect();
        let mut out = Vec::with_capacity(members.len());
        for nu in &members {
            let mut c: i64 = 0;
            'mu: for mu in &members {
                if !nu.leq(mu) {
                    continue;
                }
                // check mu - nu is a 0/1 vector
                let mut ones: u32 = 0;
                for (dim, v) in mu.support() {
                    let diff = v - nu.get(dim);
                    match diff {
                        0 => {}
                        1 => ones += 1,
                        _ => continue 'mu,
                    }
                }
                c += if ones % 2 == 0 { 1 } else { -1 };
            }
            out.push(((*nu).clone(), c));
        }
        Ok(out)
    }
}

impl FromIterator<MultiIndex> for IndexSet {
    fn from_iter<T: IntoIterator<Item = MultiIndex>>(iter: T) -> Self {
        IndexSet {
            members: iter.into_iter().collect(),
        }
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members.iter()).finish()
    }
}

impl Serialize for IndexSet {
    /// JSON form: array of dense-prefix arrays, in canonical order.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let dense: Vec<Vec<u32>> = self.members.iter().map(|nu| nu.to_dense_trimmed()).collect();
        dense.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let dense = Vec::<Vec<u32>>::deserialize(deserializer)?;
        let set: IndexSet = dense.iter().map(|v| MultiIndex::from_dense(v)).collect();
        if set.len() != dense.len() {
            return Err(D::Error::custom("duplicate multi-indices in index set"));
        }
        Ok(set)
    }
}

/// Deterministic pseudo-random downward-closed set, used by tests and the
/// acceptance suite. Grows from `{0}` by admissible one-step successors.
pub fn random_downward_closed(seed: u64, max_dim: usize, max_size: usize) -> IndexSet {
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    let mut next = move || {
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        state.wrapping_mul(0x2545f4914f6cdd1d)
    };
    let mut set = IndexSet::singleton_zero();
    let target = 1 + (next() as usize % max_size.max(1));
    let mut attempts = 0usize;
    while set.len() < target && attempts < 20 * max_size.max(4) {
        attempts += 1;
        let pick = next() as usize % set.len();
        let base = set.iter().nth(pick).expect("pick < len").clone();
        let dim = 1 + next() as usize % max_dim.max(1);
        let cand = base.plus_unit(dim);
        let admissible = cand
            .support()
            .all(|(d, _)| set.contains(&cand.minus_unit(d).expect("positive entry")));
        if admissible {
            set.insert(cand);
        }
    }
    set
}
