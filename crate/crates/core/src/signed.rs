//! Signed graphs and the balanced-module checkers.
//!
//! A strong-correlation balanced module (SCBM) is a node set of size at least
//! three in which every pair carries a nonzero sign and every triangle has a
//! positive sign product. On complete signed subgraphs this is the same as a
//! split into two factions, positive inside each and negative across.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corrnet::ValidatedCorrMatrix;
use crate::error::{invalid, Result};

pub const DEFAULT_SIGMA: f64 = 0.7;

/// Smallest node set that can be an SCBM.
pub const MIN_MODULE_SIZE: usize = 3;

/// Symmetric {-1, 0, +1} adjacency with zero diagonal, stored as one
/// positive and one negative bitset per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedGraph {
    pos: Vec<FixedBitSet>,
    neg: Vec<FixedBitSet>,
}

impl SignedGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            pos: vec![FixedBitSet::with_capacity(n); n],
            neg: vec![FixedBitSet::with_capacity(n); n],
        }
    }

    /// Builds from `(i, j, sign)` triples; later triples overwrite earlier ones.
    pub fn from_edges(n: usize, edges: &[(usize, usize, i8)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(i, j, s) in edges {
            g.set_sign(i, j, s)?;
        }
        Ok(g)
    }

    /// Builds from a full square sign matrix, checking symmetry, the zero
    /// diagonal and the entry domain.
    pub fn from_dense(signs: &[Vec<i8>]) -> Result<Self> {
        let n = signs.len();
        let mut g = Self::empty(n);
        for (i, row) in signs.iter().enumerate() {
            if row.len() != n {
                return Err(invalid("sign matrix is not square"));
            }
            if row[i] != 0 {
                return Err(invalid(format!("nonzero diagonal at {i}")));
            }
            for j in i + 1..n {
                if signs[j][i] != row[j] {
                    return Err(invalid(format!("asymmetric signs at ({i}, {j})")));
                }
                g.set_sign(i, j, row[j])?;
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.pos.len()
    }

    pub fn set_sign(&mut self, i: usize, j: usize, s: i8) -> Result<()> {
        let n = self.n();
        if i >= n || j >= n {
            return Err(invalid(format!("edge ({i}, {j}) out of range for {n} nodes")));
        }
        if i == j {
            return Err(invalid(format!("self-loop at {i}")));
        }
        if !(-1..=1).contains(&s) {
            return Err(invalid(format!("sign {s} not in {{-1, 0, 1}}")));
        }
        self.pos[i].set(j, s == 1);
        self.pos[j].set(i, s == 1);
        self.neg[i].set(j, s == -1);
        self.neg[j].set(i, s == -1);
        Ok(())
    }

    #[inline]
    pub fn sign(&self, i: usize, j: usize) -> i8 {
        if self.pos[i].contains(j) {
            1
        } else if self.neg[i].contains(j) {
            -1
        } else {
            0
        }
    }

    /// Nodes joined to `i` by a positive edge.
    pub fn positive(&self, i: usize) -> &FixedBitSet {
        &self.pos[i]
    }

    /// Nodes joined to `i` by a negative edge.
    pub fn negative(&self, i: usize) -> &FixedBitSet {
        &self.neg[i]
    }

    /// Count of nonzero signs incident to `i`.
    pub fn degree(&self, i: usize) -> usize {
        self.pos[i].count_ones(..) + self.neg[i].count_ones(..)
    }

    pub fn positive_edge_count(&self) -> usize {
        self.pos.iter().map(|r| r.count_ones(..)).sum::<usize>() / 2
    }

    pub fn negative_edge_count(&self) -> usize {
        self.neg.iter().map(|r| r.count_ones(..)).sum::<usize>() / 2
    }

    /// Nonzero edges `(i, j, sign)` with `i < j`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, i8)> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            for j in self.pos[i].union(&self.neg[i]).filter(|&j| j > i) {
                out.push((i, j, self.sign(i, j)));
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<i8>> {
        let n = self.n();
        (0..n).map(|i| (0..n).map(|j| self.sign(i, j)).collect()).collect()
    }
}

/// Signs of the entries of `v` with |C̃_ij| >= sigma; everything else is 0.
pub fn to_signed(v: &ValidatedCorrMatrix, sigma: f64) -> Result<SignedGraph> {
    check_sigma(sigma)?;
    let n = v.n();
    let mut g = SignedGraph::empty(n);
    for i in 0..n {
        for (k, &c) in v.values().upper_row(i).iter().enumerate() {
            if c.abs() >= sigma {
                let j = i + 1 + k;
                let rows = if c > 0.0 { &mut g.pos } else { &mut g.neg };
                rows[i].insert(j);
                rows[j].insert(i);
            }
        }
    }
    Ok(g)
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("sigma must be in (0, 1], got {sigma}")))
    }
}

/// A detected balanced module with its two factions. Factions are kept sorted,
/// and the lowest-indexed node always sits in `faction_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Module {
    faction_a: Vec<usize>,
    faction_b: Vec<usize>,
    sigma: f64,
}

impl Module {
    pub fn new(mut faction_a: Vec<usize>, mut faction_b: Vec<usize>, sigma: f64) -> Self {
        faction_a.sort_unstable();
        faction_b.sort_unstable();
        let swap = match (faction_a.first(), faction_b.first()) {
            (None, Some(_)) => true,
            (Some(a), Some(b)) => b < a,
            _ => false,
        };
        if swap {
            std::mem::swap(&mut faction_a, &mut faction_b);
        }
        Self {
            faction_a,
            faction_b,
            sigma,
        }
    }

    pub fn empty(sigma: f64) -> Self {
        Self::new(Vec::new(), Vec::new(), sigma)
    }

    pub fn faction_a(&self) -> &[usize] {
        &self.faction_a
    }

    pub fn faction_b(&self) -> &[usize] {
        &self.faction_b
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn size(&self) -> usize {
        self.faction_a.len() + self.faction_b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    /// Nonempty with every internal edge positive.
    pub fn all_positive(&self) -> bool {
        !self.faction_a.is_empty() && self.faction_b.is_empty()
    }

    /// All member nodes, ascending.
    pub fn nodes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.faction_a.iter().chain(&self.faction_b).copied().collect();
        v.sort_unstable();
        v
    }

    /// Number of negative edges among members.
    pub fn negative_internal_edges(&self) -> usize {
        self.faction_a.len() * self.faction_b.len()
    }

    pub fn report(&self) -> ModuleReport {
        ModuleReport {
            sigma: self.sigma,
            size: self.size(),
            nodes: self.nodes(),
            faction_a: self.faction_a.clone(),
            faction_b: self.faction_b.clone(),
            all_positive: self.all_positive(),
        }
    }
}

/// JSON form of a [`Module`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleReport {
    pub sigma: f64,
    pub size: usize,
    pub nodes: Vec<usize>,
    pub faction_a: Vec<usize>,
    pub faction_b: Vec<usize>,
    pub all_positive: bool,
}

impl From<ModuleReport> for Module {
    fn from(r: ModuleReport) -> Self {
        Module::new(r.faction_a, r.faction_b, r.sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum BalanceError {
    #[error("nodes {0} and {1} share no strong edge")]
    Incomplete(usize, usize),
    #[error("edge ({0}, {1}) contradicts every faction split")]
    Unbalanced(usize, usize),
    #[error("triangle has a missing edge")]
    ZeroSign,
}

/// True iff the sign product of a complete triangle is positive.
pub fn is_balanced_triangle(s1: i8, s2: i8, s3: i8) -> std::result::Result<bool, BalanceError> {
    if s1 == 0 || s2 == 0 || s3 == 0 {
        return Err(BalanceError::ZeroSign);
    }
    Ok(s1 * s2 * s3 > 0)
}

/// Checks the SCBM definition directly: at least three distinct nodes, a
/// nonzero sign on every pair and a balanced sign product on every triangle.
pub fn is_scbm(g: &SignedGraph, nodes: &[usize]) -> bool {
    if nodes.len() < MIN_MODULE_SIZE {
        return false;
    }
    let mut seen = FixedBitSet::with_capacity(g.n());
    for &u in nodes {
        if u >= g.n() || seen.put(u) {
            return false;
        }
    }
    for (x, &u) in nodes.iter().enumerate() {
        for &v in &nodes[x + 1..] {
            if g.sign(u, v) == 0 {
                return false;
            }
        }
    }
    for (x, &u) in nodes.iter().enumerate() {
        for (y, &v) in nodes.iter().enumerate().skip(x + 1) {
            let uv = g.sign(u, v);
            for &w in &nodes[y + 1..] {
                if uv * g.sign(u, w) * g.sign(v, w) < 0 {
                    return false;
                }
            }
        }
    }
    true
}

/// Splits a complete signed subgraph into factions (positive inside, negative
/// across). The lowest-indexed node is placed in the first faction.
pub fn bipartition(
    g: &SignedGraph,
    nodes: &[usize],
) -> std::result::Result<(Vec<usize>, Vec<usize>), BalanceError> {
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for (x, &u) in sorted.iter().enumerate() {
        for &v in &sorted[x + 1..] {
            if g.sign(u, v) == 0 {
                return Err(BalanceError::Incomplete(u, v));
            }
        }
    }
    let Some(&anchor) = sorted.first() else {
        return Ok((Vec::new(), Vec::new()));
    };
    let (a, b): (Vec<usize>, Vec<usize>) = sorted
        .iter()
        .partition(|&&u| u == anchor || g.sign(anchor, u) == 1);
    for (x, &u) in sorted.iter().enumerate() {
        let u_in_a = u == anchor || g.sign(anchor, u) == 1;
        for &v in &sorted[x + 1..] {
            let v_in_a = g.sign(anchor, v) == 1;
            let expected = if u_in_a == v_in_a { 1 } else { -1 };
            if g.sign(u, v) != expected {
                return Err(BalanceError::Unbalanced(u, v));
            }
        }
    }
    Ok((a, b))
}
