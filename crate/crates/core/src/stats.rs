//! Non-parametric comparison of methods across datasets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of non-zero paired differences handled exactly.
pub const WILCOXON_MAX_N: usize = 25;

/// Relative tolerance under which two absolute differences count as tied,
/// and a difference counts as zero. Differences of decimal inputs rarely
/// compare equal bit-for-bit.
const TIE_TOLERANCE: f64 = 1e-9;

/// 1-based ascending ranks; tied values share the mean of their positions.
/// Values within `tolerance` (relative to the first of a run) are tied.
fn average_ranks_of(values: &[f64], tolerance: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let anchor = values[order[start]];
        let mut end = start + 1;
        while end < order.len() && values[order[end]] - anchor <= tolerance * anchor.abs().max(f64::MIN_POSITIVE) {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub w_plus: f64,
    pub w_minus: f64,
    /// `min(w_plus, w_minus)`.
    pub statistic: f64,
    /// Pairs left after dropping zero differences.
    pub n_effective: usize,
    /// Exact two-sided p-value.
    pub p_value: f64,
}

/// Exact two-sided Wilcoxon signed-rank test.
///
/// Zero differences are dropped; tied absolute differences share average
/// ranks. The null distribution of the positive rank sum is counted over
/// all `2^n'` sign assignments (via a subset-sum table on doubled ranks) and
/// `p = min(1, 2·P(W⁺ ≤ min(W⁺, W⁻)))`.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<WilcoxonResult> {
    if x.len() != y.len() {
        return Err(Error::arg(format!(
            "paired samples differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() > WILCOXON_MAX_N {
        return Err(Error::arg(format!(
            "exact test supports at most {WILCOXON_MAX_N} pairs, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::arg("paired samples must be finite"));
    }
    let diffs: Vec<f64> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| (*a - *b).abs() > TIE_TOLERANCE * a.abs().max(b.abs()))
        .map(|(a, b)| a - b)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            w_plus: 0.0,
            w_minus: 0.0,
            statistic: 0.0,
            n_effective: 0,
            p_value: 1.0,
        });
    }

    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks_of(&magnitudes, TIE_TOLERANCE);
    // Average ranks are multiples of one half; double them to count exactly.
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let w_plus2: usize = doubled
        .iter()
        .zip(&diffs)
        .filter(|(_, &d)| d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let total2: usize = doubled.iter().sum();
    let w_minus2 = total2 - w_plus2;
    let stat2 = w_plus2.min(w_minus2);

    let mut counts = vec![0u64; total2 + 1];
    counts[0] = 1;
    for &r in &doubled {
        for s in (r..=total2).rev() {
            counts[s] += counts[s - r];
        }
    }
    let at_or_below: u64 = counts[..=stat2].iter().sum();
    let p_value = (2.0 * at_or_below as f64 / (1u64 << n) as f64).min(1.0);

    Ok(WilcoxonResult {
        w_plus: w_plus2 as f64 / 2.0,
        w_minus: w_minus2 as f64 / 2.0,
        statistic: stat2 as f64 / 2.0,
        n_effective: n,
        p_value,
    })
}

fn check_table(scores: &[Vec<f64>], min_methods: usize, min_blocks: usize) -> Result<usize> {
    let k = scores.len();
    if k < min_methods {
        return Err(Error::arg(format!("need at least {min_methods} methods, got {k}")));
    }
    let blocks = scores[0].len();
    if scores.iter().any(|row| row.len() != blocks) {
        return Err(Error::arg("score table is ragged"));
    }
    if blocks < min_blocks {
        return Err(Error::arg(format!("need at least {min_blocks} datasets, got {blocks}")));
    }
    if scores.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::arg("scores must be finite"));
    }
    Ok(blocks)
}

/// Per-dataset ranks, `ranks[method][dataset]`, with 1 = best.
fn block_ranks(scores: &[Vec<f64>], higher_is_better: bool) -> Vec<Vec<f64>> {
    let k = scores.len();
    let blocks = scores[0].len();
    let mut ranks = vec![vec![0.0; blocks]; k];
    for b in 0..blocks {
        let column: Vec<f64> = scores
            .iter()
            .map(|row| if higher_is_better { -row[b] } else { row[b] })
            .collect();
        for (m, r) in average_ranks_of(&column, 0.0).into_iter().enumerate() {
            ranks[m][b] = r;
        }
    }
    ranks
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    pub mean_ranks: Vec<f64>,
    /// Datasets on which each method holds the best rank, ties included.
    pub best_counts: Vec<usize>,
}

/// Mean per-dataset rank of each method (`scores[method][dataset]`).
pub fn average_ranks(scores: &[Vec<f64>], higher_is_better: bool) -> Result<RankSummary> {
    let blocks = check_table(scores, 2, 1)?;
    let ranks = block_ranks(scores, higher_is_better);
    let mean_ranks = ranks.iter().map(|r| r.iter().sum::<f64>() / blocks as f64).collect();
    let mut best_counts = vec![0; scores.len()];
    for b in 0..blocks {
        let best = ranks.iter().map(|r| r[b]).fold(f64::INFINITY, f64::min);
        for (m, r) in ranks.iter().enumerate() {
            if r[b] == best {
                best_counts[m] += 1;
            }
        }
    }
    Ok(RankSummary {
        mean_ranks,
        best_counts,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Friedman test over `scores[method][dataset]` with the chi-square
/// approximation (no tie correction).
pub fn friedman(scores: &[Vec<f64>]) -> Result<FriedmanResult> {
    let blocks = check_table(scores, 3, 5)?;
    let k = scores.len() as f64;
    let n = blocks as f64;
    let ranks = block_ranks(scores, true);
    let sum_sq: f64 = ranks.iter().map(|r| (r.iter().sum::<f64>() / n).powi(2)).sum();
    let statistic = (12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0).powi(2) / 4.0)).max(0.0);
    let df = scores.len() - 1;
    Ok(FriedmanResult {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df as f64),
    })
}

/// Upper tail `P(X > x)` of the chi-square distribution with `df` degrees
/// of freedom.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    regularized_gamma_q(df / 2.0, x / 2.0)
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7, n = 9.
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let series = COEF[1..]
        .iter()
        .enumerate()
        .fold(COEF[0], |acc, (i, c)| acc + c / (x + i as f64 + 1.0));
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
}

/// `Q(a, x) = Γ(a, x) / Γ(a)`.
fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 1000;
    let prefix = (a * x.ln() - x - ln_gamma(a)).exp();
    if x < a + 1.0 {
        // Series for P(a, x).
        let mut term = 1.0 / a;
        let mut sum = term;
        for k in 1..MAX_ITER {
            term *= x / (a + k as f64);
            sum += term;
            if term.abs() < sum.abs() * EPS {
                break;
            }
        }
        (1.0 - sum * prefix).max(0.0)
    } else {
        // Continued fraction for Q(a, x), modified Lentz.
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < EPS {
                break;
            }
        }
        prefix * h
    }
}
