//! MaxBalanceCore: seed-and-expand search for the largest strong-correlation
//! balanced module.
//!
//! For each high-impact seed the strong neighbours are split by sign into two
//! factions, pruned until the factions are internally positive and mutually
//! negative, then grown by one ascending sweep over the remaining nodes. The
//! largest module over all seeds wins; ties keep the earliest seed.
//!
//! Every node set here is a bitset over `0..n`, so the subset tests that
//! dominate the search cost O(n / 64) words each.

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::signed::{check_sigma, Module, SignedGraph, DEFAULT_SIGMA, MIN_MODULE_SIZE};

pub const DEFAULT_MAX_SEEDS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    pub sigma: f64,
    pub max_seeds: usize,
    pub min_size: usize,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            sigma: DEFAULT_SIGMA,
            max_seeds: DEFAULT_MAX_SEEDS,
            min_size: MIN_MODULE_SIZE,
        }
    }
}

impl DetectConfig {
    pub fn with_sigma(sigma: f64) -> Self {
        Self {
            sigma,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_sigma(self.sigma)?;
        if self.max_seeds < 1 {
            return Err(invalid("max_seeds must be >= 1"));
        }
        if self.min_size < MIN_MODULE_SIZE {
            return Err(invalid(format!("min_size must be >= {MIN_MODULE_SIZE}")));
        }
        Ok(())
    }
}

/// Number of nonzero signs incident to each node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImpactVector(pub Vec<usize>);

impl ImpactVector {
    /// Node indices by impact descending, ties by ascending index.
    pub fn order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.0.len()).collect();
        order.sort_by_key(|&i| (std::cmp::Reverse(self.0[i]), i));
        order
    }
}

pub fn node_impacts(g: &SignedGraph) -> ImpactVector {
    ImpactVector((0..g.n()).map(|i| g.degree(i)).collect())
}

fn to_set(n: usize, nodes: &[usize]) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(n);
    for &u in nodes {
        s.insert(u);
    }
    s
}

/// Removes, in ascending index order, every node with a non-positive tie to
/// another current member. Removal only lowers the other nodes' violation
/// counts, so a single ascending pass reaches the same fixed point as
/// rescanning from the lowest index after each removal.
fn prune_within(group: &mut FixedBitSet, g: &SignedGraph) {
    if group.count_ones(..) < 2 {
        return;
    }
    let members: Vec<usize> = group.ones().collect();
    for u in members {
        group.set(u, false);
        if group.is_subset(g.positive(u)) {
            group.insert(u);
        }
    }
}

/// Removes every member of `side` not joined negatively to all of `other`.
fn prune_across(side: &mut FixedBitSet, other: &FixedBitSet, g: &SignedGraph) {
    let members: Vec<usize> = side.ones().collect();
    for u in members {
        if !other.is_subset(g.negative(u)) {
            side.set(u, false);
        }
    }
}

fn prune_sets(a: &mut FixedBitSet, b: &mut FixedBitSet, g: &SignedGraph) {
    prune_within(a, g);
    prune_within(b, g);
    if !a.is_clear() && !b.is_clear() {
        prune_across(a, b, g);
        prune_across(b, a, g);
    }
}

/// Prunes factions to the fixed point where each faction is internally
/// all-positive and, if both are nonempty, every cross pair is negative.
/// Faction A is pruned internally first, then B, then A against B and B
/// against A.
pub fn prune_factions(a: &[usize], b: &[usize], g: &SignedGraph) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = g.n();
    check_nodes(n, a.iter().chain(b))?;
    let mut sa = to_set(n, a);
    let mut sb = to_set(n, b);
    if !sa.is_disjoint(&sb) {
        return Err(invalid("factions overlap"));
    }
    prune_sets(&mut sa, &mut sb, g);
    Ok((sa.ones().collect(), sb.ones().collect()))
}

/// Single ascending sweep over `candidates`: a node joins A when it is
/// positive to all of A and negative to all of B, or B under the mirrored
/// condition. Factions grow during the sweep.
fn expand_sets(a: &mut FixedBitSet, b: &mut FixedBitSet, g: &SignedGraph, candidates: impl Iterator<Item = usize>) {
    for u in candidates {
        if a.contains(u) || b.contains(u) {
            continue;
        }
        let (pos, neg) = (g.positive(u), g.negative(u));
        if a.is_subset(pos) && b.is_subset(neg) {
            a.insert(u);
        } else if a.is_subset(neg) && b.is_subset(pos) {
            b.insert(u);
        }
    }
}

/// Grows the factions with the given candidates, visited in ascending order.
pub fn expand(
    a: &[usize],
    b: &[usize],
    g: &SignedGraph,
    candidates: &[usize],
) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = g.n();
    check_nodes(n, a.iter().chain(b).chain(candidates))?;
    let mut sa = to_set(n, a);
    let mut sb = to_set(n, b);
    let mut order = candidates.to_vec();
    order.sort_unstable();
    order.dedup();
    expand_sets(&mut sa, &mut sb, g, order.into_iter());
    Ok((sa.ones().collect(), sb.ones().collect()))
}

fn check_nodes<'a>(n: usize, mut nodes: impl Iterator<Item = &'a usize>) -> Result<()> {
    match nodes.find(|&&u| u >= n) {
        Some(u) => Err(invalid(format!("node {u} out of range for {n} nodes"))),
        None => Ok(()),
    }
}

/// Module grown from one seed.
fn explore_seed(g: &SignedGraph, seed: usize) -> (FixedBitSet, FixedBitSet) {
    let n = g.n();
    let mut a = g.positive(seed).clone();
    a.insert(seed);
    let mut b = g.negative(seed).clone();
    prune_sets(&mut a, &mut b, g);

    let mut module = a.clone();
    module.union_with(&b);
    // strong candidates: nonzero to every member of the pruned module
    let strong: Vec<usize> = (0..n)
        .filter(|&u| {
            if module.contains(u) {
                return false;
            }
            let mut nonzero = g.positive(u).clone();
            nonzero.union_with(g.negative(u));
            module.is_subset(&nonzero)
        })
        .collect();
    expand_sets(&mut a, &mut b, g, strong.into_iter());
    (a, b)
}

/// Runs MaxBalanceCore on a signed graph. Returns the empty module when no
/// module of at least `cfg.min_size` nodes is found.
pub fn detect(g: &SignedGraph, cfg: &DetectConfig) -> Result<Module> {
    cfg.validate()?;
    let impacts = node_impacts(g);
    let seeds: Vec<usize> = impacts
        .order()
        .into_iter()
        .take(cfg.max_seeds.min(g.n()))
        .filter(|&s| impacts.0[s] > 0)
        .collect();

    let found: Vec<(FixedBitSet, FixedBitSet)> = seeds.par_iter().map(|&s| explore_seed(g, s)).collect();

    // strict improvement in seed-rank order keeps the earliest of equal sizes
    let mut best: Option<&(FixedBitSet, FixedBitSet)> = None;
    let mut best_size = 0;
    for m in &found {
        let size = m.0.count_ones(..) + m.1.count_ones(..);
        if size > best_size {
            best = Some(m);
            best_size = size;
        }
    }
    match best {
        Some((a, b)) if best_size >= cfg.min_size => Ok(Module::new(a.ones().collect(), b.ones().collect(), cfg.sigma)),
        _ => Ok(Module::empty(cfg.sigma)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signed::is_scbm;

    fn complete(n: usize, sign: impl Fn(usize, usize) -> i8) -> SignedGraph {
        let mut g = SignedGraph::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.set_sign(i, j, sign(i, j)).unwrap();
            }
        }
        g
    }

    /// Literal transcription of the removal rule: rescan from the lowest index
    /// after every single removal.
    fn prune_within_by_rescan(group: &mut Vec<usize>, g: &SignedGraph) {
        if group.len() < 2 {
            return;
        }
        'outer: loop {
            for (k, &u) in group.iter().enumerate() {
                if group.iter().any(|&v| v != u && g.sign(u, v) != 1) {
                    group.remove(k);
                    continue 'outer;
                }
            }
            return;
        }
    }

    #[test]
    fn impacts_examples() {
        assert_eq!(node_impacts(&SignedGraph::empty(4)).0, vec![0; 4]);
        let path = SignedGraph::from_edges(3, &[(0, 1, 1), (1, 2, -1)]).unwrap();
        assert_eq!(node_impacts(&path).0, vec![1, 2, 1]);
        assert_eq!(node_impacts(&path).order(), vec![1, 0, 2]);
        assert_eq!(node_impacts(&complete(5, |_, _| 1)).0, vec![4; 5]);
    }

    #[test]
    fn prune_examples() {
        let g = SignedGraph::from_edges(3, &[(0, 1, 1), (0, 2, 1)]).unwrap();
        assert_eq!(prune_factions(&[0, 1, 2], &[], &g).unwrap(), (vec![0, 2], vec![]));

        // A = {seed 0, x 1}, B = {y 2}, S(x, y) = +1
        let g = SignedGraph::from_edges(3, &[(0, 1, 1), (0, 2, -1), (1, 2, 1)]).unwrap();
        assert_eq!(prune_factions(&[0, 1], &[2], &g).unwrap(), (vec![0], vec![2]));

        let side = |u: usize| u < 2;
        let g = complete(5, |i, j| if side(i) == side(j) { 1 } else { -1 });
        assert_eq!(prune_factions(&[0, 1], &[2, 3, 4], &g).unwrap(), (vec![0, 1], vec![2, 3, 4]));

        assert!(prune_factions(&[0, 1], &[1], &g).is_err());
        assert!(prune_factions(&[0, 9], &[], &g).is_err());
    }

    #[test]
    fn single_pass_matches_rescan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.random_range(2..25);
            let mut g = SignedGraph::empty(n);
            for i in 0..n {
                for j in i + 1..n {
                    let s = [1i8, 1, 1, 0, -1][rng.random_range(0..5)];
                    g.set_sign(i, j, s).unwrap();
                }
            }
            let mut group: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.7)).collect();
            let (fast, _) = prune_factions(&group, &[], &g).unwrap();
            prune_within_by_rescan(&mut group, &g);
            assert_eq!(fast, group);
        }
    }

    #[test]
    fn expand_examples() {
        let g = complete(3, |_, _| 1);
        assert_eq!(expand(&[0, 1], &[], &g, &[2]).unwrap(), (vec![0, 1, 2], vec![]));

        let g = SignedGraph::from_edges(3, &[(0, 1, 1), (0, 2, 1)]).unwrap();
        assert_eq!(expand(&[0, 1], &[], &g, &[2]).unwrap(), (vec![0, 1], vec![]));

        let g = SignedGraph::from_edges(3, &[(0, 1, -1), (0, 2, -1), (1, 2, 1)]).unwrap();
        let (a, b) = expand(&[0], &[1], &g, &[2]).unwrap();
        assert_eq!((a.clone(), b.clone()), (vec![0], vec![1, 2]));
        assert!(is_scbm(&g, &[0, 1, 2]));
    }

    #[test]
    fn expansion_sees_growing_factions() {
        // 2 joins A first; 3 is positive to 0 and 1 but has no edge to 2
        let g = SignedGraph::from_edges(4, &[(0, 1, 1), (0, 2, 1), (1, 2, 1), (0, 3, 1), (1, 3, 1)]).unwrap();
        assert_eq!(expand(&[0, 1], &[], &g, &[3, 2]).unwrap(), (vec![0, 1, 2], vec![]));
    }

    #[test]
    fn detect_trivial_graphs() {
        let cfg = DetectConfig::default();
        assert!(detect(&SignedGraph::empty(10), &cfg).unwrap().is_empty());
        let k5 = detect(&complete(5, |_, _| 1), &cfg).unwrap();
        assert_eq!(k5.faction_a(), &[0, 1, 2, 3, 4]);
        // a lone edge never reaches three nodes
        let edge = SignedGraph::from_edges(4, &[(1, 2, 1)]).unwrap();
        assert!(detect(&edge, &cfg).unwrap().is_empty());
    }

    #[test]
    fn detect_two_faction_module() {
        let side = |u: usize| u.is_multiple_of(3);
        let mut g = complete(9, |i, j| if side(i) == side(j) { 1 } else { -1 });
        // pair (2, 8) loses its edge; the ascending prune drops the lower node
        g.set_sign(8, 2, 0).unwrap();
        let m = detect(&g, &DetectConfig::default()).unwrap();
        assert_eq!(m.nodes(), vec![0, 1, 3, 4, 5, 6, 7, 8]);
        assert_eq!(m.faction_a(), &[0, 3, 6]);
        assert!(is_scbm(&g, &m.nodes()));
    }

    #[test]
    fn config_validation() {
        let g = SignedGraph::empty(3);
        for cfg in [
            DetectConfig::with_sigma(0.0),
            DetectConfig { max_seeds: 0, ..Default::default() },
            DetectConfig { min_size: 2, ..Default::default() },
        ] {
            assert!(detect(&g, &cfg).is_err());
        }
    }
}
