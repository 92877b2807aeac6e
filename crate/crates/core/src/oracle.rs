//! Exact largest balanced module and SCBM counts for small graphs.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::signed::{is_scbm, Module, SignedGraph, MIN_MODULE_SIZE};

/// Largest graph the exhaustive search accepts.
pub const MAX_ORACLE_NODES: usize = 22;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best: Module,
    /// SCBM count per size, filled for sizes 3..=n when requested.
    pub z_counts: BTreeMap<usize, u64>,
}

struct Masks {
    pos: Vec<u32>,
    neg: Vec<u32>,
}

impl Masks {
    fn new(g: &SignedGraph) -> Result<Self> {
        let n = g.n();
        if n > MAX_ORACLE_NODES {
            return Err(Error::BudgetExceeded {
                n,
                max: MAX_ORACLE_NODES,
            });
        }
        let mask = |row: &fixedbitset::FixedBitSet| row.ones().fold(0u32, |m, j| m | 1 << j);
        Ok(Self {
            pos: (0..n).map(|i| mask(g.positive(i))).collect(),
            neg: (0..n).map(|i| mask(g.negative(i))).collect(),
        })
    }

    fn n(&self) -> usize {
        self.pos.len()
    }

    /// Side `v` is forced onto given factions `a`, `b` (a nonempty), if any.
    fn side(&self, v: usize, a: u32, b: u32) -> Option<bool> {
        let (p, q) = (self.pos[v], self.neg[v]);
        if a & p == a && b & q == b {
            Some(true)
        } else if a & q == a && b & p == b {
            Some(false)
        } else {
            None
        }
    }
}

/// Depth-first search for the lexicographically first balanced set of
/// exactly `target` nodes, extending factions `a`, `b` with nodes >= `from`.
fn find_of_size(m: &Masks, from: usize, a: u32, b: u32, target: u32) -> Option<(u32, u32)> {
    let have = (a | b).count_ones();
    if have == target {
        return Some((a, b));
    }
    let compatible: Vec<(usize, bool)> = (from..m.n())
        .filter_map(|v| {
            if have == 0 {
                Some((v, true))
            } else {
                m.side(v, a, b).map(|s| (v, s))
            }
        })
        .collect();
    if have + (compatible.len() as u32) < target {
        return None;
    }
    for (k, &(v, in_a)) in compatible.iter().enumerate() {
        if have + ((compatible.len() - k) as u32) < target {
            break;
        }
        let (na, nb) = if in_a { (a | 1 << v, b) } else { (a, b | 1 << v) };
        if let Some(found) = find_of_size(m, v + 1, na, nb, target) {
            return Some(found);
        }
    }
    None
}

fn bits(mask: u32) -> Vec<usize> {
    (0..32).filter(|&k| mask >> k & 1 == 1).collect()
}

/// Maximum-cardinality SCBM, ties broken by the lexicographically smallest
/// node set. Sizes are tried from `n` downward and the first hit is returned.
pub fn exact_lscbm(g: &SignedGraph, sigma: f64) -> Result<Module> {
    let m = Masks::new(g)?;
    for s in (MIN_MODULE_SIZE..=m.n()).rev() {
        if let Some((a, b)) = find_of_size(&m, 0, 0, 0, s as u32) {
            return Ok(Module::new(bits(a), bits(b), sigma));
        }
    }
    Ok(Module::empty(sigma))
}

/// Number of node subsets of size `s` that satisfy the SCBM definition.
///
/// Walks cliques of the nonzero-sign graph and applies the triangle checker
/// to each one, independently of the faction-tracking search in
/// [`exact_lscbm`].
pub fn count_scbm(g: &SignedGraph, s: usize) -> Result<u64> {
    let m = Masks::new(g)?;
    if s < MIN_MODULE_SIZE {
        return Err(crate::error::invalid(format!("size must be >= {MIN_MODULE_SIZE}")));
    }
    let nonzero: Vec<u32> = m.pos.iter().zip(&m.neg).map(|(p, q)| p | q).collect();
    let mut chosen = Vec::with_capacity(s);
    let all = if m.n() == 32 { u32::MAX } else { (1u32 << m.n()) - 1 };
    Ok(count_cliques(g, &nonzero, all, &mut chosen, s))
}

fn count_cliques(g: &SignedGraph, nonzero: &[u32], cand: u32, chosen: &mut Vec<usize>, s: usize) -> u64 {
    if chosen.len() == s {
        return u64::from(is_scbm(g, chosen));
    }
    if chosen.len() + (cand.count_ones() as usize) < s {
        return 0;
    }
    let mut total = 0;
    let mut rest = cand;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        chosen.push(v);
        total += count_cliques(g, nonzero, rest & nonzero[v], chosen, s);
        chosen.pop();
    }
    total
}

/// Exact module plus, when `with_counts` is set, Z_s for every s in 3..=n.
pub fn solve(g: &SignedGraph, sigma: f64, with_counts: bool) -> Result<OracleResult> {
    let best = exact_lscbm(g, sigma)?;
    let mut z_counts = BTreeMap::new();
    if with_counts {
        for s in MIN_MODULE_SIZE..=g.n() {
            let z = count_scbm(g, s)?;
            if z == 0 {
                break;
            }
            z_counts.insert(s, z);
        }
    }
    Ok(OracleResult { best, z_counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randgen::{plant_lscbm, sample_signed, SignedModelParams};
    use crate::signed::to_signed;

    fn complete_positive(n: usize) -> SignedGraph {
        let mut g = SignedGraph::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.set_sign(i, j, 1).unwrap();
            }
        }
        g
    }

    #[test]
    fn exact_examples() {
        let k5 = exact_lscbm(&complete_positive(5), 0.7).unwrap();
        assert_eq!(k5.faction_a(), &[0, 1, 2, 3, 4]);
        assert!(k5.faction_b().is_empty());

        let g = SignedGraph::from_edges(4, &[(0, 1, 1), (0, 2, 1), (1, 2, -1)]).unwrap();
        assert!(exact_lscbm(&g, 0.7).unwrap().is_empty());

        let inst = plant_lscbm(10, 2, 3, 0.7, 21).unwrap();
        let g = to_signed(&inst.matrix, 0.7).unwrap();
        let best = exact_lscbm(&g, 0.7).unwrap();
        assert_eq!(best, inst.truth());
    }

    #[test]
    fn count_examples() {
        let k4 = complete_positive(4);
        assert_eq!(count_scbm(&k4, 3).unwrap(), 4);
        assert_eq!(count_scbm(&k4, 4).unwrap(), 1);
        assert_eq!(count_scbm(&SignedGraph::empty(6), 3).unwrap(), 0);
        assert!(count_scbm(&k4, 2).is_err());
    }

    #[test]
    fn lexicographic_tie_break() {
        // two disjoint balanced triangles, listed largest-index first
        let g = SignedGraph::from_edges(
            6,
            &[(1, 3, 1), (1, 5, -1), (3, 5, -1), (0, 2, 1), (0, 4, 1), (2, 4, 1)],
        )
        .unwrap();
        assert_eq!(exact_lscbm(&g, 0.7).unwrap().nodes(), vec![0, 2, 4]);
    }

    #[test]
    fn budget_enforced() {
        let g = SignedGraph::empty(MAX_ORACLE_NODES + 1);
        assert!(matches!(exact_lscbm(&g, 0.7), Err(Error::BudgetExceeded { n: 23, max: 22 })));
        assert!(matches!(count_scbm(&g, 3), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn exact_size_matches_counts() {
        for seed in 0..60u64 {
            let n = 6 + (seed as usize % 7);
            let (a, b) = [(0.6, 0.3), (0.3, 0.6), (0.5, 0.5)][seed as usize % 3];
            let g = sample_signed(&SignedModelParams { n, alpha_edge: a, beta_edge: b, seed }).unwrap();
            let r = solve(&g, 0.7, true).unwrap();
            let max_s = r.z_counts.keys().next_back().copied().unwrap_or(0);
            assert_eq!(r.best.size(), max_s, "seed {seed}");
            if !r.best.is_empty() {
                assert!(is_scbm(&g, &r.best.nodes()));
                assert!(r.z_counts[&r.best.size()] >= 1);
            }
            // hereditary: a module of size s has sub-modules of every smaller size
            for s in 4..=n {
                if count_scbm(&g, s).unwrap() > 0 {
                    assert!(count_scbm(&g, s - 1).unwrap() > 0);
                }
            }
        }
    }

    #[test]
    fn deleting_edges_never_grows_optimum() {
        let mut g = sample_signed(&SignedModelParams { n: 12, alpha_edge: 0.6, beta_edge: 0.3, seed: 4 }).unwrap();
        let mut last = exact_lscbm(&g, 0.7).unwrap().size();
        for (i, j, _) in g.edges() {
            g.set_sign(i, j, 0).unwrap();
            let now = exact_lscbm(&g, 0.7).unwrap().size();
            assert!(now <= last);
            last = now;
        }
        assert_eq!(last, 0);
    }
}
