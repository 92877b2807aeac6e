//! Random signed graphs and planted-module benchmark instances.
//!
//! Every pair `(i, j)`, `i < j`, draws from its own addressable position of a
//! ChaCha8 keystream: the key comes from the seed, the stream id is the row
//! `i`, and the word offset is fixed by the column. Rows can therefore be
//! generated in any order or in parallel without changing the sample.

use rand::distr::Open01;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corrnet::ValidatedCorrMatrix;
use crate::error::{invalid, Result};
use crate::matrix::SymMatrix;
use crate::signed::{check_sigma, Module, SignedGraph, MIN_MODULE_SIZE};

/// Stream reserved for non-pair draws (node shuffles).
const AUX_STREAM: u64 = u64::MAX;

/// Probability that a pair touching the weak remainder has no edge.
pub const WEAK_ZERO_PROB: f64 = 0.3;
/// Probability that such a pair is weakly positive (the rest is weakly negative).
pub const WEAK_POSITIVE_PROB: f64 = 0.35;

fn row_stream(seed: u64, row: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64);
    rng
}

/// Draw `k` (of `per_pair`) for pair `(i, j)`, `i < j`, read directly at its
/// keystream offset. Matches what the row-sequential generators consume.
pub fn pair_draw(seed: u64, i: usize, j: usize, per_pair: usize, k: usize) -> u64 {
    assert!(i < j && k < per_pair);
    let mut rng = row_stream(seed, i);
    // two 32-bit words per u64
    rng.set_word_pos(2 * (per_pair * (j - i - 1) + k) as u128);
    rng.next_u64()
}

/// Independent sub-seed for item `index` of a run driven by `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// Uniform in [0, 1) from a raw draw, as `rand` maps u64 to f64.
fn unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedModelParams {
    pub n: usize,
    pub alpha_edge: f64,
    pub beta_edge: f64,
    pub seed: u64,
}

impl SignedModelParams {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.alpha_edge, self.beta_edge);
        if !(a > 0.0 && a <= 1.0) {
            return Err(invalid(format!("alpha_edge must be in (0, 1], got {a}")));
        }
        if !(0.0..1.0).contains(&b) {
            return Err(invalid(format!("beta_edge must be in [0, 1), got {b}")));
        }
        if a + b > 1.0 + 1e-12 {
            return Err(invalid(format!("alpha_edge + beta_edge = {} exceeds 1", a + b)));
        }
        Ok(())
    }
}

/// One sample of the random signed graph model: each pair independently
/// +1 with probability `alpha_edge`, -1 with `beta_edge`, 0 otherwise.
pub fn sample_signed(p: &SignedModelParams) -> Result<SignedGraph> {
    p.validate()?;
    let n = p.n;
    let pos_cut = p.alpha_edge;
    let neg_cut = p.alpha_edge + p.beta_edge;
    let rows: Vec<Vec<i8>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = row_stream(p.seed, i);
            (i + 1..n)
                .map(|_| {
                    let u = unit(rng.next_u64());
                    if u < pos_cut {
                        1
                    } else if u < neg_cut {
                        -1
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    let mut g = SignedGraph::empty(n);
    for (i, row) in rows.iter().enumerate() {
        for (k, &s) in row.iter().enumerate() {
            if s != 0 {
                g.set_sign(i, i + 1 + k, s)?;
            }
        }
    }
    Ok(g)
}

/// Synthetic validated matrix with a known largest balanced module.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub matrix: ValidatedCorrMatrix,
    pub truth_a: Vec<usize>,
    pub truth_b: Vec<usize>,
    pub sigma: f64,
}

impl PlantedInstance {
    pub fn truth(&self) -> Module {
        Module::new(self.truth_a.clone(), self.truth_b.clone(), self.sigma)
    }
}

/// Ground-truth file contents for a planted instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub truth_a: Vec<usize>,
    pub truth_b: Vec<usize>,
}

/// Checks the preconditions of [`plant_lscbm`] without generating anything.
pub fn check_plant_params(n: usize, n_a: usize, n_b: usize, sigma: f64) -> Result<()> {
    check_sigma(sigma)?;
    let core = n_a + n_b;
    if core > n {
        return Err(invalid(format!("n_a + n_b = {core} exceeds n = {n}")));
    }
    if core != 0 && core < MIN_MODULE_SIZE {
        return Err(invalid(format!("planted module needs >= {MIN_MODULE_SIZE} nodes or none, got {core}")));
    }
    Ok(())
}

/// Plants factions A (`n_a` nodes) and B (`n_b` nodes) on randomly chosen
/// nodes: +1 inside each faction, -1 across. Every pair involving any other
/// node is 0 with probability 0.3, uniform on (0, sigma) with probability
/// 0.35 and uniform on (-sigma, 0) otherwise.
pub fn plant_lscbm(n: usize, n_a: usize, n_b: usize, sigma: f64, seed: u64) -> Result<PlantedInstance> {
    check_plant_params(n, n_a, n_b, sigma)?;
    let core = n_a + n_b;

    let mut nodes: Vec<usize> = (0..n).collect();
    let mut aux = ChaCha8Rng::seed_from_u64(seed);
    aux.set_stream(AUX_STREAM);
    nodes.shuffle(&mut aux);
    // 0 = remainder, 1 = A, 2 = B
    let mut role = vec![0u8; n];
    let mut truth_a: Vec<usize> = nodes[..n_a].to_vec();
    let mut truth_b: Vec<usize> = nodes[n_a..core].to_vec();
    truth_a.sort_unstable();
    truth_b.sort_unstable();
    for &u in &truth_a {
        role[u] = 1;
    }
    for &u in &truth_b {
        role[u] = 2;
    }

    let below_sigma = f64::from_bits(sigma.to_bits() - 1);
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = row_stream(seed, i);
            (i + 1..n)
                .map(|j| {
                    // both draws are always consumed so offsets stay fixed
                    let kind = unit(rng.next_u64());
                    let mag: f64 = rng.sample(Open01);
                    match (role[i], role[j]) {
                        (0, _) | (_, 0) => {
                            let w = (mag * sigma).min(below_sigma);
                            if kind < WEAK_ZERO_PROB {
                                0.0
                            } else if kind < WEAK_ZERO_PROB + WEAK_POSITIVE_PROB {
                                w
                            } else {
                                -w
                            }
                        }
                        (x, y) if x == y => 1.0,
                        _ => -1.0,
                    }
                })
                .collect()
        })
        .collect();

    let matrix = ValidatedCorrMatrix::synthetic(SymMatrix::from_upper_rows(n, rows))?;
    Ok(PlantedInstance {
        matrix,
        truth_a,
        truth_b,
        sigma,
    })
}
