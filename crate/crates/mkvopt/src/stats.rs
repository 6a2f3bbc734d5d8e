//! Comparison statistics over collections of seeded runs: mean best values,
//! averaged ranks, the empirical competitive ratio, and Mann-Whitney U tests
//! with the asymmetric best-vs-vanilla significance protocol.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Final best values of one method on one benchmark, one entry per seeded run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub benchmark: String,
    pub known_min: f64,
    pub finals: Vec<f64>,
}

impl BenchmarkResult {
    pub fn mean_final(&self) -> f64 {
        self.finals.iter().sum::<f64>() / self.finals.len() as f64
    }

    /// `mean(final_best) - known_min`, clamped at 0. Errors if the mean beats
    /// the known optimum by more than 1e-9 (that means the registry minimum
    /// is wrong, not that the optimizer is good).
    pub fn distance_to_optimum(&self) -> Result<f64> {
        let df = self.mean_final() - self.known_min;
        if df < -1e-9 {
            return Err(Error::InvalidConfig(format!(
                "{}: mean final best {} undercuts the known minimum {}",
                self.benchmark,
                self.mean_final(),
                self.known_min
            )));
        }
        Ok(df.max(0.0))
    }
}

/// Per-benchmark run results for one method.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodResults {
    pub method: String,
    pub results: Vec<BenchmarkResult>,
}

fn check_aligned(methods: &[MethodResults]) -> Result<()> {
    if methods.is_empty() || methods[0].results.is_empty() {
        return Err(Error::InvalidConfig(
            "statistics need at least one method and one benchmark".into(),
        ));
    }
    let names: Vec<&str> = methods[0]
        .results
        .iter()
        .map(|r| r.benchmark.as_str())
        .collect();
    for m in methods {
        let these: Vec<&str> = m.results.iter().map(|r| r.benchmark.as_str()).collect();
        if these != names {
            return Err(Error::InvalidConfig(format!(
                "benchmark lists differ between methods ({} vs {})",
                methods[0].method, m.method
            )));
        }
    }
    Ok(())
}

/// Empirical competitive ratio per method:
/// `mean over benchmarks of min(100, df_m / df*)`, `df*` the best distance to
/// optimum among the methods. When `df* = 0` the ratio is 1 for methods that
/// also hit the optimum exactly and 100 otherwise.
pub fn ecr(methods: &[MethodResults]) -> Result<Vec<f64>> {
    check_aligned(methods)?;
    let n_bench = methods[0].results.len();
    let mut totals = vec![0.0; methods.len()];
    for b in 0..n_bench {
        let dfs: Vec<f64> = methods
            .iter()
            .map(|m| m.results[b].distance_to_optimum())
            .collect::<Result<_>>()?;
        let df_star = dfs.iter().copied().fold(f64::INFINITY, f64::min);
        for (t, &df) in totals.iter_mut().zip(&dfs) {
            let ratio = if df_star > 0.0 {
                (df / df_star).min(100.0)
            } else if df == 0.0 {
                1.0
            } else {
                100.0
            };
            *t += ratio;
        }
    }
    Ok(totals.into_iter().map(|t| t / n_bench as f64).collect())
}

/// Average rank per method: on each benchmark, methods are ranked by mean
/// final best ascending with ties given averaged ranks; ranks are then
/// averaged over benchmarks.
pub fn average_rank(methods: &[MethodResults]) -> Result<Vec<f64>> {
    check_aligned(methods)?;
    if methods.len() < 2 {
        return Err(Error::InvalidConfig(
            "average rank needs at least two methods".into(),
        ));
    }
    let n_bench = methods[0].results.len();
    let mut totals = vec![0.0; methods.len()];
    for b in 0..n_bench {
        let means: Vec<f64> = methods.iter().map(|m| m.results[b].mean_final()).collect();
        let ranks = averaged_ranks(&means);
        for (t, r) in totals.iter_mut().zip(&ranks) {
            *t += r;
        }
    }
    Ok(totals.into_iter().map(|t| t / n_bench as f64).collect())
}

/// Ranks 1..=n ascending with tied values sharing the average of their ranks.
fn averaged_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j are tied; average of ranks i+1 ..= j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        i = j;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    #[default]
    TwoSided,
    Less,
    Greater,
}

/// Two-sided Mann-Whitney U test; see [`mann_whitney_u_sided`].
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> (f64, f64) {
    mann_whitney_u_sided(a, b, Sidedness::TwoSided)
}

/// Mann-Whitney U statistic of `a` (averaged-rank tie handling) and its
/// p-value. Tie-free samples with `n + m <= 12` get the exact permutation
/// p-value; everything else uses the normal approximation with tie and
/// continuity corrections. The p-value is clamped into `(0, 1]`.
pub fn mann_whitney_u_sided(a: &[f64], b: &[f64], side: Sidedness) -> (f64, f64) {
    let n = a.len();
    let m = b.len();
    assert!(n >= 1 && m >= 1, "both samples must be non-empty");

    let mut combined: Vec<(f64, usize)> = a
        .iter()
        .map(|&v| (v, 0))
        .chain(b.iter().map(|&v| (v, 1)))
        .collect();
    combined.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite samples"));

    // averaged ranks and tie-group sizes
    let total = n + m;
    let mut ranks = vec![0.0; total];
    let mut tie_term = 0.0; // sum of t^3 - t over tie groups
    let mut has_ties = false;
    let mut i = 0;
    while i < total {
        let mut j = i + 1;
        while j < total && combined[j].0 == combined[i].0 {
            j += 1;
        }
        let t = (j - i) as f64;
        if j - i > 1 {
            has_ties = true;
            tie_term += t * t * t - t;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        for r in ranks[i..j].iter_mut() {
            *r = avg;
        }
        i = j;
    }

    let rank_sum_a: f64 = combined
        .iter()
        .zip(&ranks)
        .filter(|((_, group), _)| *group == 0)
        .map(|(_, r)| *r)
        .sum();
    let u_a = rank_sum_a - (n * (n + 1)) as f64 / 2.0;

    let p = if total <= 12 && !has_ties {
        exact_p(n, total, u_a, side)
    } else {
        approx_p(n, m, u_a, tie_term, side)
    };
    (u_a, p.clamp(f64::MIN_POSITIVE, 1.0))
}

/// Exact permutation p-value: enumerate all rank assignments of the first
/// sample (no ties, so U is a function of the occupied rank positions).
fn exact_p(n: usize, total: usize, u_obs: f64, side: Sidedness) -> f64 {
    let offset = (n * (n + 1)) as f64 / 2.0;
    let mut count_le = 0u64;
    let mut count_ge = 0u64;
    let mut arrangements = 0u64;
    let nm = (n * (total - n)) as f64;
    let (lo_target, hi_target) = match side {
        Sidedness::TwoSided => {
            let u_min = u_obs.min(nm - u_obs);
            (u_min, nm - u_min)
        }
        Sidedness::Less => (u_obs, f64::INFINITY),
        Sidedness::Greater => (f64::NEG_INFINITY, u_obs),
    };
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize != n {
            continue;
        }
        arrangements += 1;
        let rank_sum: u32 = (0..total as u32)
            .filter(|bit| mask & (1 << bit) != 0)
            .map(|bit| bit + 1)
            .sum();
        let u = rank_sum as f64 - offset;
        if u <= lo_target + 1e-12 {
            count_le += 1;
        }
        if u >= hi_target - 1e-12 {
            count_ge += 1;
        }
    }
    let total_f = arrangements as f64;
    match side {
        Sidedness::TwoSided => ((count_le + count_ge) as f64 / total_f).min(1.0),
        Sidedness::Less => count_le as f64 / total_f,
        Sidedness::Greater => count_ge as f64 / total_f,
    }
}

/// Normal approximation with tie and continuity corrections.
fn approx_p(n: usize, m: usize, u: f64, tie_term: f64, side: Sidedness) -> f64 {
    let nf = n as f64;
    let mf = m as f64;
    let total = nf + mf;
    let mu = nf * mf / 2.0;
    let var = nf * mf / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
    if var <= 0.0 {
        return 1.0; // all observations identical
    }
    let sd = var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    match side {
        Sidedness::TwoSided => {
            let z = ((u - mu).abs() - 0.5).max(0.0) / sd;
            2.0 * normal.cdf(-z)
        }
        Sidedness::Less => {
            let z = (u - mu + 0.5) / sd;
            normal.cdf(z)
        }
        Sidedness::Greater => {
            let z = (u - mu - 0.5) / sd;
            1.0 - normal.cdf(z)
        }
    }
}

/// Significance annotation of one benchmark row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignificanceAnnotation {
    pub benchmark: String,
    /// Index into the methods slice of the best (lowest mean) cell.
    pub best_index: usize,
    /// Maximum p-value over the performed tests; `None` when no tests ran
    /// (single method).
    pub max_p: Option<f64>,
    pub significant: bool,
}

/// The asymmetric test protocol: when the vanilla method is best it is
/// compared against every variant; when a variant is best it is compared
/// against the vanilla method only. The best cell is flagged significant
/// when the maximum p-value over the performed tests is below `alpha`.
pub fn significance_protocol(
    methods: &[MethodResults],
    vanilla: usize,
    side: Sidedness,
    alpha: f64,
) -> Result<Vec<SignificanceAnnotation>> {
    check_aligned(methods)?;
    if vanilla >= methods.len() {
        return Err(Error::InvalidConfig(format!(
            "vanilla index {vanilla} out of range for {} methods",
            methods.len()
        )));
    }
    let n_bench = methods[0].results.len();
    let mut out = Vec::with_capacity(n_bench);
    for b in 0..n_bench {
        let means: Vec<f64> = methods.iter().map(|m| m.results[b].mean_final()).collect();
        let best_index = means
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.partial_cmp(y.1).expect("finite means"))
            .map(|(i, _)| i)
            .expect("non-empty");
        let opponents: Vec<usize> = if methods.len() == 1 {
            Vec::new()
        } else if best_index == vanilla {
            (0..methods.len()).filter(|&i| i != vanilla).collect()
        } else {
            vec![vanilla]
        };
        let mut max_p: Option<f64> = None;
        for opp in opponents {
            let (_, p) = mann_whitney_u_sided(
                &methods[best_index].results[b].finals,
                &methods[opp].results[b].finals,
                side,
            );
            max_p = Some(max_p.map_or(p, |cur| cur.max(p)));
        }
        let significant = max_p.is_some_and(|p| p < alpha);
        out.push(SignificanceAnnotation {
            benchmark: methods[0].results[b].benchmark.clone(),
            best_index,
            max_p,
            significant,
        });
    }
    Ok(out)
}
