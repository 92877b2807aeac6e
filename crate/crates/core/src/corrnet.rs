//! Pearson correlation, per-pair significance testing and the statistically
//! validated correlation matrix.

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::ingest::ReturnMatrix;
use crate::matrix::SymMatrix;
use crate::signed::Module;
use crate::tdist;

pub const DEFAULT_ALPHA_LEVEL: f64 = 0.05;

/// Pearson correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrix {
    values: SymMatrix,
    labels: Vec<String>,
    zero_variance: Vec<bool>,
}

impl CorrMatrix {
    /// Wraps a precomputed matrix; every off-diagonal entry must lie in [-1, 1].
    pub fn from_values(values: SymMatrix) -> Result<Self> {
        check_range(&values)?;
        let n = values.n();
        Ok(Self {
            values,
            labels: index_labels(n),
            zero_variance: vec![false; n],
        })
    }

    pub fn n(&self) -> usize {
        self.values.n()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    pub fn values(&self) -> &SymMatrix {
        &self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Rows whose returns were constant; their correlations are reported as 0.
    pub fn zero_variance(&self) -> &[bool] {
        &self.zero_variance
    }
}

/// Correlation matrix with insignificant entries zeroed. Synthetic matrices
/// that never went through the t-test carry no `t_len` / `alpha_level`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedCorrMatrix {
    values: SymMatrix,
    labels: Vec<String>,
    t_len: Option<usize>,
    alpha_level: Option<f64>,
}

impl ValidatedCorrMatrix {
    pub fn new(
        values: SymMatrix,
        labels: Vec<String>,
        t_len: Option<usize>,
        alpha_level: Option<f64>,
    ) -> Result<Self> {
        check_range(&values)?;
        if labels.len() != values.n() {
            return Err(invalid(format!(
                "{} labels for a {}-node matrix",
                labels.len(),
                values.n()
            )));
        }
        Ok(Self {
            values,
            labels,
            t_len,
            alpha_level,
        })
    }

    /// Synthetic matrix labelled by node index.
    pub fn synthetic(values: SymMatrix) -> Result<Self> {
        let labels = index_labels(values.n());
        Self::new(values, labels, None, None)
    }

    pub fn n(&self) -> usize {
        self.values.n()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    pub fn values(&self) -> &SymMatrix {
        &self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn t_len(&self) -> Option<usize> {
        self.t_len
    }

    pub fn alpha_level(&self) -> Option<f64> {
        self.alpha_level
    }

    /// Nonzero off-diagonal pairs `(i, j)` with `i < j`.
    pub fn support(&self) -> Vec<(usize, usize)> {
        self.values
            .pairs()
            .filter(|&(_, _, v)| v != 0.0)
            .map(|(i, j, _)| (i, j))
            .collect()
    }
}

fn check_range(values: &SymMatrix) -> Result<()> {
    match values.pairs().find(|&(_, _, v)| !(-1.0..=1.0).contains(&v)) {
        Some((i, j, v)) => Err(invalid(format!("entry ({i}, {j}) = {v} outside [-1, 1]"))),
        None => Ok(()),
    }
}

fn index_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Pearson correlation matrix of the return rows. Constant rows get zero
/// correlation with every other row and are flagged in
/// [`CorrMatrix::zero_variance`].
pub fn pearson_matrix(r: &ReturnMatrix) -> CorrMatrix {
    let n = r.n();
    let t_len = r.t_len();
    let mut zero_variance = vec![false; n];
    let mut z = vec![0.0; n * t_len];
    for i in 0..n {
        let row = r.row(i);
        let (lo, hi) = row
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if lo == hi {
            zero_variance[i] = true;
            continue;
        }
        let mean = row.iter().sum::<f64>() / t_len as f64;
        let ss: f64 = row.iter().map(|x| (x - mean) * (x - mean)).sum();
        let norm = ss.sqrt();
        for (dst, x) in z[i * t_len..(i + 1) * t_len].iter_mut().zip(row) {
            *dst = (x - mean) / norm;
        }
    }

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let zi = &z[i * t_len..(i + 1) * t_len];
            (i + 1..n)
                .map(|j| {
                    if zero_variance[i] || zero_variance[j] {
                        return 0.0;
                    }
                    let zj = &z[j * t_len..(j + 1) * t_len];
                    let dot: f64 = zi.iter().zip(zj).map(|(a, b)| a * b).sum();
                    dot.clamp(-1.0, 1.0)
                })
                .collect()
        })
        .collect();

    CorrMatrix {
        values: SymMatrix::from_upper_rows(n, rows),
        labels: r.tickers().to_vec(),
        zero_variance,
    }
}

fn check_t_len(t_len: usize, min: usize) -> Result<()> {
    if t_len < min {
        return Err(invalid(format!("sample length must be >= {min}, got {t_len}")));
    }
    Ok(())
}

/// `c * sqrt((T - 2) / (1 - c^2))`; infinite with the sign of `c` when |c| = 1.
pub fn t_statistic(c: f64, t_len: usize) -> Result<f64> {
    check_t_len(t_len, 3)?;
    if !(-1.0..=1.0).contains(&c) {
        return Err(invalid(format!("correlation {c} outside [-1, 1]")));
    }
    let denom = 1.0 - c * c;
    if denom <= 0.0 {
        return Ok(if c > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY });
    }
    Ok(c * ((t_len - 2) as f64 / denom).sqrt())
}

/// Two-sided critical value t_nu(alpha_level / 2).
pub fn t_critical(nu: usize, alpha_level: f64) -> Result<f64> {
    if nu < 1 {
        return Err(invalid("degrees of freedom must be >= 1"));
    }
    tdist::critical_value(nu as f64, alpha_level)
}

/// Correlation magnitude r* above which the t-test rejects:
/// `t* / sqrt(nu + t*^2)` with `nu = T - 2`.
pub fn critical_correlation(t_len: usize, alpha_level: f64) -> Result<f64> {
    check_t_len(t_len, 4)?;
    let nu = t_len - 2;
    let t = t_critical(nu, alpha_level)?;
    Ok(t / (nu as f64 + t * t).sqrt())
}

/// Keeps `C[i][j]` iff |C[i][j]| > r*(T, alpha_level), zeroing the rest.
pub fn validate(c: &CorrMatrix, t_len: usize, alpha_level: f64) -> Result<ValidatedCorrMatrix> {
    let r_star = critical_correlation(t_len, alpha_level)?;
    let values = SymMatrix::from_fn(c.n(), |i, j| {
        let v = c.get(i, j);
        if v.abs() > r_star {
            v
        } else {
            0.0
        }
    });
    ValidatedCorrMatrix::new(values, c.labels.clone(), Some(t_len), Some(alpha_level))
}

/// Same result as [`validate`], computed by testing |t_ij| > t* for every pair.
pub fn validate_by_t_test(c: &CorrMatrix, t_len: usize, alpha_level: f64) -> Result<ValidatedCorrMatrix> {
    check_t_len(t_len, 4)?;
    let t_star = t_critical(t_len - 2, alpha_level)?;
    let mut values = SymMatrix::identity(c.n());
    for (i, j, v) in c.values.pairs() {
        if t_statistic(v, t_len)?.abs() > t_star {
            values.set(i, j, v);
        }
    }
    ValidatedCorrMatrix::new(values, c.labels.clone(), Some(t_len), Some(alpha_level))
}

/// Classic unsigned threshold network: edge iff |C| > rho.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdNetwork {
    rows: Vec<FixedBitSet>,
}

impl ThresholdNetwork {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i].contains(j)
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones(..)).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.ones().filter(move |&j| j > i).map(move |j| (i, j)))
            .collect()
    }
}

pub fn threshold_network(c: &CorrMatrix, rho: f64) -> Result<ThresholdNetwork> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(invalid(format!("threshold must be in (0, 1), got {rho}")));
    }
    let n = c.n();
    let mut rows = vec![FixedBitSet::with_capacity(n); n];
    for (i, j, v) in c.values.pairs() {
        if v.abs() > rho {
            rows[i].insert(j);
            rows[j].insert(i);
        }
    }
    Ok(ThresholdNetwork { rows })
}

/// Network-level summary in the column order of the yearly summary table:
/// N, T, ξ+, ξ−, μ+, μ−, |S*|, ς.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub n: usize,
    pub t_len: Option<usize>,
    pub xi_plus: f64,
    pub xi_minus: f64,
    /// `None` when there are no positive off-diagonal entries.
    pub mu_plus: Option<f64>,
    /// `None` when there are no negative off-diagonal entries.
    pub mu_minus: Option<f64>,
    pub lscbm_size: usize,
    pub varsigma: f64,
}

impl NetworkStats {
    pub const COLUMNS: [&'static str; 8] =
        ["n", "t_len", "xi_plus", "xi_minus", "mu_plus", "mu_minus", "lscbm_size", "varsigma"];

    /// Values formatted in [`Self::COLUMNS`] order; undefined entries are `NA`.
    pub fn row(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
        vec![
            self.n.to_string(),
            self.t_len.map_or_else(|| "NA".to_string(), |t| t.to_string()),
            self.xi_plus.to_string(),
            self.xi_minus.to_string(),
            opt(self.mu_plus),
            opt(self.mu_minus),
            self.lscbm_size.to_string(),
            self.varsigma.to_string(),
        ]
    }
}

pub fn network_stats(v: &ValidatedCorrMatrix, module: &Module) -> Result<NetworkStats> {
    let n = v.n();
    if let Some(&bad) = module.nodes().iter().find(|&&k| k >= n) {
        return Err(invalid(format!("module node {bad} out of range for {n} nodes")));
    }
    let (mut n_pos, mut sum_pos, mut n_neg, mut sum_neg) = (0usize, 0.0, 0usize, 0.0);
    for (_, _, x) in v.values.pairs() {
        if x > 0.0 {
            n_pos += 1;
            sum_pos += x;
        } else if x < 0.0 {
            n_neg += 1;
            sum_neg += x;
        }
    }
    let pairs = (n * n.saturating_sub(1) / 2).max(1) as f64;
    let mean = |count: usize, sum: f64| (count > 0).then(|| sum / count as f64);
    Ok(NetworkStats {
        n,
        t_len: v.t_len,
        xi_plus: n_pos as f64 / pairs,
        xi_minus: n_neg as f64 / pairs,
        mu_plus: mean(n_pos, sum_pos),
        mu_minus: mean(n_neg, sum_neg),
        lscbm_size: module.size(),
        varsigma: if n == 0 { 0.0 } else { module.size() as f64 / n as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn returns(rows: Vec<Vec<f64>>) -> ReturnMatrix {
        let tickers = (0..rows.len()).map(|i| format!("T{i}")).collect();
        ReturnMatrix::from_rows(tickers, rows).unwrap()
    }

    #[test]
    fn perfect_linearity() {
        let x = vec![0.01, -0.02, 0.03, 0.005, -0.011];
        let up: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        let down: Vec<f64> = x.iter().map(|v| -v).collect();
        let c = pearson_matrix(&returns(vec![x, up, down]));
        assert!((c.get(0, 1) - 1.0).abs() < 1e-12);
        assert!((c.get(0, 2) + 1.0).abs() < 1e-12);
        assert_eq!(c.get(1, 1), 1.0);
    }

    #[test]
    fn hand_evaluated_pair() {
        // deviations (-1.5, -.5, .5, 1.5) and (-25.5, -24.5, -23.5, 73.5):
        // Sxy = 149, Sxx = 5, Syy = 7205
        let expected = 149.0 / (5.0f64 * 7205.0).sqrt();
        let c = pearson_matrix(&returns(vec![vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 2.0, 3.0, 100.0]]));
        assert!((c.get(0, 1) - expected).abs() < 1e-12);
        assert!((c.get(0, 1) - 0.785_026).abs() < 1e-4);
    }

    #[test]
    fn zero_variance_rows_flagged() {
        let c = pearson_matrix(&returns(vec![vec![0.1; 6], vec![0.1, 0.2, 0.0, 0.3, 0.1, 0.2]]));
        assert_eq!(c.zero_variance(), &[true, false]);
        assert_eq!(c.get(0, 1), 0.0);
    }

    #[test]
    fn t_statistic_examples() {
        assert_eq!(t_statistic(0.0, 100).unwrap(), 0.0);
        assert!((t_statistic(0.5, 27).unwrap() - 2.886_751_345_948_129).abs() < 1e-12);
        assert_eq!(t_statistic(1.0, 50).unwrap(), f64::INFINITY);
        assert_eq!(t_statistic(-1.0, 50).unwrap(), f64::NEG_INFINITY);
        assert!(t_statistic(0.3, 2).is_err());
        assert!(t_statistic(1.2, 20).is_err());
    }

    #[test]
    fn t_critical_examples() {
        assert!((t_critical(241, 0.05).unwrap() - 1.96984).abs() < 1e-4);
        assert!((t_critical(1, 0.5).unwrap() - 1.0).abs() < 1e-10);
        assert!((t_critical(1_000_000, 0.05).unwrap() - 1.95996).abs() < 1e-3);
        assert!(t_critical(0, 0.05).is_err());
    }

    fn pair_matrix(v: f64) -> CorrMatrix {
        CorrMatrix::from_values(SymMatrix::from_fn(3, |i, j| if (i, j) == (0, 1) { v } else { 0.0 })).unwrap()
    }

    #[test]
    fn validate_examples() {
        let r_star = critical_correlation(243, 0.05).unwrap();
        assert!((r_star - 0.1259).abs() < 5e-4);

        let kept = validate(&pair_matrix(0.9), 243, 0.05).unwrap();
        assert_eq!(kept.get(0, 1), 0.9);
        let zeroed = validate(&pair_matrix(0.10), 243, 0.05).unwrap();
        assert_eq!(zeroed.get(0, 1), 0.0);
        let empty = validate(&pair_matrix(0.0), 243, 0.05).unwrap();
        assert!(empty.support().is_empty());
        assert_eq!(empty.get(2, 2), 1.0);

        assert!(validate(&pair_matrix(0.9), 3, 0.05).is_err());
    }

    #[test]
    fn threshold_examples() {
        let mut m = SymMatrix::identity(4);
        m.set(0, 1, 0.85);
        m.set(0, 2, 0.55);
        m.set(1, 3, -0.7);
        m.set(2, 3, 0.3);
        let c = CorrMatrix::from_values(m).unwrap();
        let g = threshold_network(&c, 0.5).unwrap();
        assert!(g.is_edge(0, 1) && g.is_edge(0, 2) && g.is_edge(3, 1));
        assert!(!g.is_edge(2, 3) && !g.is_edge(0, 0));
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 3)]);
        assert_eq!(threshold_network(&c, 0.999).unwrap().edge_count(), 0);
        assert!(threshold_network(&c, 1.0).is_err());
        assert!(threshold_network(&c, 0.0).is_err());
    }

    #[test]
    fn stats_examples() {
        let mut m = SymMatrix::identity(3);
        m.set(0, 1, 0.5);
        m.set(0, 2, -0.2);
        let v = ValidatedCorrMatrix::synthetic(m).unwrap();
        let s = network_stats(&v, &Module::empty(0.7)).unwrap();
        assert!((s.xi_plus - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.xi_minus - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.mu_plus, Some(0.5));
        assert_eq!(s.mu_minus, Some(-0.2));

        let z = ValidatedCorrMatrix::synthetic(SymMatrix::identity(4)).unwrap();
        let s = network_stats(&z, &Module::empty(0.7)).unwrap();
        assert_eq!((s.xi_plus, s.xi_minus, s.mu_plus, s.mu_minus), (0.0, 0.0, None, None));
        assert_eq!(s.varsigma, 0.0);

        let big = ValidatedCorrMatrix::synthetic(SymMatrix::identity(1462)).unwrap();
        let module = Module::new((0..13).collect(), vec![], 0.7);
        let s = network_stats(&big, &module).unwrap();
        assert!((s.varsigma - 0.0089).abs() < 5e-5);
    }

    proptest! {
        #[test]
        fn affine_maps(rows in prop::collection::vec(prop::collection::vec(-0.1f64..0.1, 12), 3),
                       a in 0.1f64..10.0, b in -1.0f64..1.0) {
            let base = pearson_matrix(&returns(rows.clone()));
            let mut mapped = rows.clone();
            mapped[0] = rows[0].iter().map(|x| a * x + b).collect();
            let pos = pearson_matrix(&returns(mapped.clone()));
            mapped[0] = rows[0].iter().map(|x| -a * x + b).collect();
            let neg = pearson_matrix(&returns(mapped));
            for j in 1..3 {
                prop_assert!((pos.get(0, j) - base.get(0, j)).abs() < 1e-12);
                prop_assert!((neg.get(0, j) + base.get(0, j)).abs() < 1e-12);
            }
        }

        #[test]
        fn shortcut_matches_t_test(vals in prop::collection::vec(-1.0f64..=1.0, 45), t_len in 4usize..400) {
            let mut it = vals.into_iter();
            let c = CorrMatrix::from_values(SymMatrix::from_fn(10, |_, _| it.next().unwrap())).unwrap();
            let a = validate(&c, t_len, 0.05).unwrap();
            let b = validate_by_t_test(&c, t_len, 0.05).unwrap();
            prop_assert_eq!(a.support(), b.support());
        }
    }
}
