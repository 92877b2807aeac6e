//! Monte Carlo studies: planted-module recovery, size scaling of the largest
//! balanced module across random-graph regimes, and existence/multiplicity
//! probes against the exact oracle.
//!
//! All randomness is derived from one master seed. Trial `k` of a study uses
//! `derive_seed(master, k)` (scaling studies first key by N), so trials can
//! run in parallel and reports do not depend on scheduling.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corrnet::ValidatedCorrMatrix;
use crate::detect::{detect, DetectConfig};
use crate::error::{invalid, Result};
use crate::oracle::{count_scbm, exact_lscbm, MAX_ORACLE_NODES};
use crate::randgen::{check_plant_params, derive_seed, plant_lscbm, sample_signed, SignedModelParams};
use crate::signed::{to_signed, MIN_MODULE_SIZE};

pub const DEFAULT_TRIALS: usize = 100;

/// Node grid {10, 20, ..., 200}.
pub fn small_grid() -> Vec<usize> {
    (1..=20).map(|k| 10 * k).collect()
}

/// Node grid {300, 600, ..., 6000}.
pub fn large_grid() -> Vec<usize> {
    (1..=20).map(|k| 300 * k).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyConfig {
    pub n: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub sigma: f64,
    pub trials: usize,
    pub seed: u64,
    pub max_seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub config: AccuracyConfig,
    pub correct: usize,
    /// Fraction of trials whose detected node set equals the planted one.
    pub accuracy: f64,
    /// Fraction of trials that also matched the planted faction split.
    pub split_accuracy: f64,
    pub mean_runtime_secs: f64,
    pub max_runtime_secs: f64,
}

impl AccuracyReport {
    pub const COLUMNS: [&'static str; 11] = [
        "n",
        "n_a",
        "n_b",
        "sigma",
        "trials",
        "seed",
        "correct",
        "accuracy",
        "split_accuracy",
        "mean_runtime_secs",
        "max_runtime_secs",
    ];

    pub fn row(&self) -> Vec<String> {
        let c = &self.config;
        vec![
            c.n.to_string(),
            c.n_a.to_string(),
            c.n_b.to_string(),
            c.sigma.to_string(),
            c.trials.to_string(),
            c.seed.to_string(),
            self.correct.to_string(),
            self.accuracy.to_string(),
            self.split_accuracy.to_string(),
            self.mean_runtime_secs.to_string(),
            self.max_runtime_secs.to_string(),
        ]
    }
}

/// Plants a module per trial, detects it and scores exact node-set recovery.
/// Runtime covers sign thresholding and detection, not instance generation.
pub fn run_accuracy(cfg: &AccuracyConfig) -> Result<AccuracyReport> {
    if cfg.trials < 1 {
        return Err(invalid("trials must be >= 1"));
    }
    let detect_cfg = DetectConfig {
        sigma: cfg.sigma,
        max_seeds: cfg.max_seeds,
        ..DetectConfig::default()
    };
    detect_cfg.validate()?;
    check_plant_params(cfg.n, cfg.n_a, cfg.n_b, cfg.sigma)?;

    let outcomes: Vec<(bool, bool, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<(bool, bool, f64)> {
            let inst = plant_lscbm(cfg.n, cfg.n_a, cfg.n_b, cfg.sigma, derive_seed(cfg.seed, trial as u64))?;
            let start = Instant::now();
            let g = to_signed(&inst.matrix, cfg.sigma)?;
            let found = detect(&g, &detect_cfg)?;
            let secs = start.elapsed().as_secs_f64();
            let truth = inst.truth();
            Ok((found.nodes() == truth.nodes(), found == truth, secs))
        })
        .collect::<Result<_>>()?;

    let trials = outcomes.len() as f64;
    let correct = outcomes.iter().filter(|o| o.0).count();
    let split = outcomes.iter().filter(|o| o.1).count();
    Ok(AccuracyReport {
        config: *cfg,
        correct,
        accuracy: correct as f64 / trials,
        split_accuracy: split as f64 / trials,
        mean_runtime_secs: outcomes.iter().map(|o| o.2).sum::<f64>() / trials,
        max_runtime_secs: outcomes.iter().map(|o| o.2).fold(0.0, f64::max),
    })
}

/// Parameter territory of the random signed graph model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "lowercase")]
pub enum Regime {
    /// Fixed edge probabilities.
    General { alpha_edge: f64, beta_edge: f64 },
    /// `alpha = 1 - b/N`, `beta = b/N`.
    Dense { b: f64 },
    /// `alpha = 1/sqrt(N)`, `beta = 1 - 1/sqrt(N)`.
    Negative,
}

impl Regime {
    pub fn tag(&self) -> &'static str {
        match self {
            Regime::General { .. } => "general",
            Regime::Dense { .. } => "dense",
            Regime::Negative => "negative",
        }
    }

    /// Edge probabilities at `n` nodes.
    pub fn edge_params(&self, n: usize) -> Result<(f64, f64)> {
        let nf = n as f64;
        let (a, b) = match *self {
            Regime::General { alpha_edge, beta_edge } => {
                if !(alpha_edge > 0.0 && beta_edge > 0.0 && alpha_edge + beta_edge <= 1.0) {
                    return Err(invalid(format!(
                        "general regime needs alpha, beta > 0 with alpha + beta <= 1, got ({alpha_edge}, {beta_edge})"
                    )));
                }
                (alpha_edge, beta_edge)
            }
            Regime::Dense { b } => {
                if !(b > 1.0 && b < nf) {
                    return Err(invalid(format!("dense regime needs 1 < b < N, got b = {b}, N = {n}")));
                }
                (1.0 - b / nf, b / nf)
            }
            Regime::Negative => {
                if n < 2 {
                    return Err(invalid("negative regime needs N >= 2"));
                }
                let a = 1.0 / nf.sqrt();
                (a, 1.0 - a)
            }
        };
        Ok((a, b))
    }
}

/// Logarithmic scaling constant: |ln a| / 2 when a >= b, else
/// (|ln a| + |ln b|) / 4.
pub fn lambda(alpha_edge: f64, beta_edge: f64) -> f64 {
    if alpha_edge >= beta_edge {
        0.5 * alpha_edge.ln().abs()
    } else {
        0.25 * (alpha_edge.ln().abs() + beta_edge.ln().abs())
    }
}

/// Predicted largest-module size at `n` nodes:
/// general `ln N / lambda`, dense `N ln b / b`, negative `ln N / |ln alpha|`.
pub fn theoretical_size(regime: &Regime, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(invalid("need N >= 2"));
    }
    let (alpha_edge, beta_edge) = regime.edge_params(n)?;
    let ln_n = (n as f64).ln();
    Ok(match *regime {
        Regime::General { .. } => ln_n / lambda(alpha_edge, beta_edge),
        Regime::Dense { b } => n as f64 * b.ln() / b,
        Regime::Negative => ln_n / alpha_edge.ln().abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub alpha_edge: f64,
    pub beta_edge: f64,
    pub mean_size: f64,
    pub min_size: usize,
    pub max_size: usize,
    pub prediction: f64,
    /// Mean over trials of detected size / prediction.
    pub mean_ratio: f64,
    /// `mean_ratio` divided by the average of `mean_ratio` over the grid.
    pub normalized_ratio: f64,
    /// Fraction of trials whose module has no negative internal edge.
    pub all_positive_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub regime: Regime,
    pub trials: usize,
    pub seed: u64,
    pub max_seeds: usize,
    pub lambda: Option<f64>,
    pub rows: Vec<ScalingRow>,
}

impl ScalingReport {
    pub const COLUMNS: [&'static str; 11] = [
        "regime",
        "n",
        "alpha_edge",
        "beta_edge",
        "mean_size",
        "min_size",
        "max_size",
        "prediction",
        "mean_ratio",
        "normalized_ratio",
        "all_positive_fraction",
    ];

    pub fn table_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    self.regime.tag().to_string(),
                    r.n.to_string(),
                    r.alpha_edge.to_string(),
                    r.beta_edge.to_string(),
                    r.mean_size.to_string(),
                    r.min_size.to_string(),
                    r.max_size.to_string(),
                    r.prediction.to_string(),
                    r.mean_ratio.to_string(),
                    r.normalized_ratio.to_string(),
                    r.all_positive_fraction.to_string(),
                ]
            })
            .collect()
    }
}

/// For each N in the grid, samples `trials` graphs from the regime, runs
/// detection and averages size / prediction. The per-N mean ratios are then
/// divided by their grand mean over the grid (all zero if that mean is zero).
pub fn run_scaling(
    regime: &Regime,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
    max_seeds: usize,
) -> Result<ScalingReport> {
    if n_grid.is_empty() {
        return Err(invalid("empty node grid"));
    }
    if trials < 1 {
        return Err(invalid("trials must be >= 1"));
    }
    let cfg = DetectConfig {
        max_seeds,
        ..DetectConfig::default()
    };
    cfg.validate()?;

    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let prediction = theoretical_size(regime, n)?;
        let (alpha_edge, beta_edge) = regime.edge_params(n)?;
        let grid_seed = derive_seed(seed, n as u64);
        let found: Vec<(usize, bool)> = (0..trials)
            .into_par_iter()
            .map(|trial| -> Result<(usize, bool)> {
                let g = sample_signed(&SignedModelParams {
                    n,
                    alpha_edge,
                    beta_edge,
                    seed: derive_seed(grid_seed, trial as u64),
                })?;
                let m = detect(&g, &cfg)?;
                Ok((m.size(), m.negative_internal_edges() == 0))
            })
            .collect::<Result<_>>()?;
        let t = trials as f64;
        rows.push(ScalingRow {
            n,
            alpha_edge,
            beta_edge,
            mean_size: found.iter().map(|f| f.0 as f64).sum::<f64>() / t,
            min_size: found.iter().map(|f| f.0).min().unwrap_or(0),
            max_size: found.iter().map(|f| f.0).max().unwrap_or(0),
            prediction,
            mean_ratio: found.iter().map(|f| f.0 as f64 / prediction).sum::<f64>() / t,
            normalized_ratio: 0.0,
            all_positive_fraction: found.iter().filter(|f| f.1).count() as f64 / t,
        });
    }
    let grand = rows.iter().map(|r| r.mean_ratio).sum::<f64>() / rows.len() as f64;
    for r in &mut rows {
        r.normalized_ratio = if grand > 0.0 { r.mean_ratio / grand } else { 0.0 };
    }
    let lambda = match *regime {
        Regime::General { alpha_edge, beta_edge } => Some(lambda(alpha_edge, beta_edge)),
        _ => None,
    };
    Ok(ScalingReport {
        regime: *regime,
        trials,
        seed,
        max_seeds,
        lambda,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMethod {
    /// Exhaustive: exact for N <= 22.
    Oracle,
    /// Heuristic lower bound.
    Detect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonemptyReport {
    pub n: usize,
    pub alpha_edge: f64,
    pub beta_edge: f64,
    pub trials: usize,
    pub seed: u64,
    pub method: CheckMethod,
    pub nonempty: usize,
    pub fraction: f64,
}

/// Fraction of samples containing an SCBM of size >= 3. Uses the exact
/// oracle when N is within its budget, detection otherwise.
pub fn run_nonempty_check(n: usize, alpha_edge: f64, beta_edge: f64, trials: usize, seed: u64) -> Result<NonemptyReport> {
    if trials < 1 {
        return Err(invalid("trials must be >= 1"));
    }
    SignedModelParams { n, alpha_edge, beta_edge, seed }.validate()?;
    let method = if n <= MAX_ORACLE_NODES {
        CheckMethod::Oracle
    } else {
        CheckMethod::Detect
    };
    let cfg = DetectConfig::default();
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<bool> {
            let g = sample_signed(&SignedModelParams {
                n,
                alpha_edge,
                beta_edge,
                seed: derive_seed(seed, trial as u64),
            })?;
            Ok(match method {
                // any balanced triangle is an SCBM
                CheckMethod::Oracle => n >= MIN_MODULE_SIZE && count_scbm(&g, MIN_MODULE_SIZE)? > 0,
                CheckMethod::Detect => !detect(&g, &cfg)?.is_empty(),
            })
        })
        .collect::<Result<_>>()?;
    let nonempty = hits.iter().filter(|&&h| h).count();
    Ok(NonemptyReport {
        n,
        alpha_edge,
        beta_edge,
        trials,
        seed,
        method,
        nonempty,
        fraction: nonempty as f64 / trials as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityReport {
    pub n: usize,
    pub alpha_edge: f64,
    pub beta_edge: f64,
    pub trials: usize,
    pub seed: u64,
    pub mean_lscbm_size: f64,
    /// Trials in which at least two SCBMs attain the maximum size.
    pub multiple: usize,
    pub fraction_multiple: f64,
}

/// Exact probe of how often the largest SCBM size is attained more than once.
pub fn run_multiplicity(n: usize, alpha_edge: f64, beta_edge: f64, trials: usize, seed: u64) -> Result<MultiplicityReport> {
    if trials < 1 {
        return Err(invalid("trials must be >= 1"));
    }
    if n > MAX_ORACLE_NODES {
        return Err(crate::error::Error::BudgetExceeded {
            n,
            max: MAX_ORACLE_NODES,
        });
    }
    SignedModelParams { n, alpha_edge, beta_edge, seed }.validate()?;
    let results: Vec<(usize, bool)> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<(usize, bool)> {
            let g = sample_signed(&SignedModelParams {
                n,
                alpha_edge,
                beta_edge,
                seed: derive_seed(seed, trial as u64),
            })?;
            let size = exact_lscbm(&g, 1.0)?.size();
            let multiple = size >= MIN_MODULE_SIZE && count_scbm(&g, size)? >= 2;
            Ok((size, multiple))
        })
        .collect::<Result<_>>()?;
    let multiple = results.iter().filter(|r| r.1).count();
    Ok(MultiplicityReport {
        n,
        alpha_edge,
        beta_edge,
        trials,
        seed,
        mean_lscbm_size: results.iter().map(|r| r.0 as f64).sum::<f64>() / trials as f64,
        multiple,
        fraction_multiple: multiple as f64 / trials as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub sigma: f64,
    pub lscbm_size: usize,
    pub varsigma: f64,
    pub all_positive: bool,
}

/// Evenly spaced thresholds from `from` to `to` inclusive.
pub fn sigma_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && from > 0.0 && to <= 1.0 && from <= to) {
        return Err(invalid(format!("bad sigma grid {from}..{to} step {step}")));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| from + k as f64 * step).collect())
}

/// Detected module size and ς = |S*| / N at each threshold.
pub fn sigma_sweep(v: &ValidatedCorrMatrix, sigmas: &[f64], max_seeds: usize) -> Result<Vec<SweepPoint>> {
    sigmas
        .iter()
        .map(|&sigma| {
            let cfg = DetectConfig {
                sigma,
                max_seeds,
                ..DetectConfig::default()
            };
            let m = detect(&to_signed(v, sigma)?, &cfg)?;
            Ok(SweepPoint {
                sigma,
                lscbm_size: m.size(),
                varsigma: if v.n() == 0 { 0.0 } else { m.size() as f64 / v.n() as f64 },
                all_positive: m.all_positive(),
            })
        })
        .collect()
}

/// Pearson correlation of two equal-length samples.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Least-squares line `y = slope * x + intercept` and its R².
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let r = correlation(xs, ys);
    (slope, my - slope * mx, r * r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_branches() {
        assert!((lambda(0.6, 0.3) - 0.5 * 0.6f64.ln().abs()).abs() < 1e-15);
        assert!((lambda(0.2, 0.5) - 0.25 * (0.2f64.ln().abs() + 0.5f64.ln().abs())).abs() < 1e-15);
        // at alpha = beta both branches agree
        let a = 0.4f64;
        assert!((0.5 * a.ln().abs() - 0.25 * 2.0 * a.ln().abs()).abs() < 1e-15);
        assert_eq!(lambda(a, a), 0.5 * a.ln().abs());
    }

    #[test]
    fn predictions() {
        let general = Regime::General { alpha_edge: 0.6, beta_edge: 0.3 };
        let p = theoretical_size(&general, 1000).unwrap();
        assert!((p - 27.045_453_311_663).abs() < 1e-9, "{p}");
        let dense = theoretical_size(&Regime::Dense { b: 2.0 }, 3000).unwrap();
        assert!((dense - 1_039.720_770_839_918).abs() < 1e-9);
        for n in [300, 1234, 6000] {
            assert!((theoretical_size(&Regime::Negative, n).unwrap() - 2.0).abs() < 1e-12);
        }
        assert!(theoretical_size(&Regime::Dense { b: 0.5 }, 100).is_err());
        assert!(theoretical_size(&Regime::General { alpha_edge: 0.8, beta_edge: 0.3 }, 100).is_err());
    }

    #[test]
    fn regime_edge_params() {
        assert_eq!(Regime::Dense { b: 2.0 }.edge_params(400).unwrap(), (0.995, 0.005));
        let (a, b) = Regime::Negative.edge_params(400).unwrap();
        assert_eq!((a, b), (0.05, 0.95));
    }

    #[test]
    fn grids() {
        assert_eq!(small_grid().first(), Some(&10));
        assert_eq!(small_grid().last(), Some(&200));
        assert_eq!(large_grid().len(), 20);
        assert_eq!(large_grid().last(), Some(&6000));
        let s = sigma_grid(0.4, 0.9, 0.05).unwrap();
        assert_eq!(s.len(), 11);
        assert!((s[10] - 0.9).abs() < 1e-12);
        assert!(sigma_grid(0.5, 0.4, 0.1).is_err());
    }

    #[test]
    fn empty_truth_accuracy() {
        let r = run_accuracy(&AccuracyConfig {
            n: 200,
            n_a: 0,
            n_b: 0,
            sigma: 0.7,
            trials: 5,
            seed: 1,
            max_seeds: 100,
        })
        .unwrap();
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn accuracy_is_reproducible() {
        let cfg = AccuracyConfig {
            n: 300,
            n_a: 30,
            n_b: 60,
            sigma: 0.7,
            trials: 4,
            seed: 9,
            max_seeds: 100,
        };
        let a = run_accuracy(&cfg).unwrap();
        let b = run_accuracy(&cfg).unwrap();
        assert_eq!((a.correct, a.accuracy, a.split_accuracy), (b.correct, b.accuracy, b.split_accuracy));
        assert_eq!(a.accuracy, 1.0);
        assert!(run_accuracy(&AccuracyConfig { trials: 0, ..cfg }).is_err());
        assert!(run_accuracy(&AccuracyConfig { n_a: 200, n_b: 200, ..cfg }).is_err());
    }

    #[test]
    fn normalized_ratios_average_one() {
        for regime in [
            Regime::General { alpha_edge: 0.6, beta_edge: 0.3 },
            Regime::Dense { b: 2.0 },
            Regime::Negative,
        ] {
            let r = run_scaling(&regime, &[30, 60, 90], 3, 5, 100).unwrap();
            let mean = r.rows.iter().map(|x| x.normalized_ratio).sum::<f64>() / 3.0;
            assert!((mean - 1.0).abs() < 1e-12, "{}", regime.tag());
        }
        assert!(run_scaling(&Regime::Negative, &[], 3, 5, 100).is_err());
    }

    #[test]
    fn complete_positive_always_nonempty() {
        let r = run_nonempty_check(5, 1.0, 0.0, 20, 3).unwrap();
        assert_eq!(r.fraction, 1.0);
        assert_eq!(r.method, CheckMethod::Oracle);
        let r = run_nonempty_check(40, 1.0, 0.0, 5, 3).unwrap();
        assert_eq!((r.fraction, r.method), (1.0, CheckMethod::Detect));
    }

    #[test]
    fn fit_helpers() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let (slope, icpt, r2) = linear_fit(&xs, &ys);
        assert!((slope - 2.0).abs() < 1e-12 && (icpt - 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
        assert!((correlation(&xs, &[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
    }
}
