//! Classification quality measures.
//!
//! Two-class problems treat class 1 as the positive class. With more than
//! two classes, precision, recall and F1 are computed one-vs-rest per class
//! and averaged without weighting (macro average). A class with no predicted
//! (actual) members contributes precision (recall) 0, and F1 is 0 when its
//! denominator vanishes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts indexed by (true class, predicted class).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn from_predictions(truths: &[usize], predictions: &[usize], classes: usize) -> Result<Self> {
        if truths.len() != predictions.len() {
            return Err(Error::arg(format!(
                "{} truths but {} predictions",
                truths.len(),
                predictions.len()
            )));
        }
        if truths.is_empty() {
            return Err(Error::arg("no samples to score"));
        }
        let mut counts = vec![0u64; classes * classes];
        for (&t, &p) in truths.iter().zip(predictions) {
            if t >= classes || p >= classes {
                return Err(Error::arg(format!("class id out of range for {classes} classes")));
            }
            counts[t * classes + p] += 1;
        }
        Ok(Self { classes, counts })
    }

    /// Wraps raw counts (row-major, rows are true classes).
    pub fn from_counts(classes: usize, counts: Vec<u64>) -> Result<Self> {
        if classes < 2 || counts.len() != classes * classes {
            return Err(Error::arg("confusion matrix shape mismatch"));
        }
        Ok(Self { classes, counts })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|c| self.get(c, c)).sum()
    }

    /// One-vs-rest `(tp, fp, fn)` for `class`.
    pub fn one_vs_rest(&self, class: usize) -> (u64, u64, u64) {
        let tp = self.get(class, class);
        let predicted: u64 = (0..self.classes).map(|t| self.get(t, class)).sum();
        let actual: u64 = (0..self.classes).map(|p| self.get(class, p)).sum();
        (tp, predicted - tp, actual - tp)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasicMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn basic_metrics(cm: &ConfusionMatrix) -> Result<BasicMetrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::arg("confusion matrix is empty"));
    }
    let accuracy = cm.trace() as f64 / total as f64;
    let per_class = |c: usize| {
        let (tp, fp, fneg) = cm.one_vs_rest(c);
        (
            ratio(tp, tp + fp),
            ratio(tp, tp + fneg),
            ratio(2 * tp, 2 * tp + fp + fneg),
        )
    };
    let (precision, recall, f1) = if cm.classes() == 2 {
        per_class(1)
    } else {
        let k = cm.classes() as f64;
        let (p, r, f) = (0..cm.classes())
            .map(per_class)
            .fold((0.0, 0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1, acc.2 + x.2));
        (p / k, r / k, f / k)
    };
    Ok(BasicMetrics {
        accuracy,
        precision,
        recall,
        f1,
    })
}

/// Accuracy times the fraction of discarded features.
pub fn acc_pdf(accuracy: f64, subset_size: usize, n: usize) -> Result<f64> {
    if subset_size < 1 || subset_size > n {
        return Err(Error::arg(format!("subset size {subset_size} outside 1..={n}")));
    }
    Ok(accuracy * (n - subset_size) as f64 / n as f64)
}

/// Final test-set figures for one selected subset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub acc_pdf: f64,
    pub subset_size: usize,
    pub sfr: f64,
}

impl MetricsReport {
    pub fn new(cm: &ConfusionMatrix, subset_size: usize, n: usize) -> Result<Self> {
        let m = basic_metrics(cm)?;
        Ok(Self {
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            acc_pdf: acc_pdf(m.accuracy, subset_size, n)?,
            subset_size,
            sfr: subset_size as f64 / n as f64,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn confusion_counts() {
        let cm = ConfusionMatrix::from_predictions(&[0, 0, 1, 1], &[0, 1, 1, 1], 2).unwrap();
        assert_eq!((cm.get(0, 0), cm.get(0, 1), cm.get(1, 0), cm.get(1, 1)), (1, 1, 0, 2));
        assert_eq!(cm.total(), 4);

        let diag = ConfusionMatrix::from_predictions(&[0, 1, 2], &[0, 1, 2], 3).unwrap();
        assert_eq!(diag.trace(), 3);

        assert!(ConfusionMatrix::from_predictions(&[], &[], 2).is_err());
        assert!(ConfusionMatrix::from_predictions(&[0], &[0, 1], 2).is_err());
        assert!(ConfusionMatrix::from_predictions(&[2], &[0], 2).is_err());
    }

    #[test]
    fn binary_substitution() {
        // TP=2, TN=1, FP=1, FN=0
        let cm = ConfusionMatrix::from_counts(2, vec![1, 1, 0, 2]).unwrap();
        let m = basic_metrics(&cm).unwrap();
        assert_eq!(m.accuracy, 0.75);
        assert_eq!(m.precision, 2.0 / 3.0);
        assert_eq!(m.recall, 1.0);
        assert_eq!(m.f1, 0.8);
    }

    #[test]
    fn perfect_predictions() {
        for classes in [2, 4] {
            let truths: Vec<usize> = (0..20).map(|i| i % classes).collect();
            let cm = ConfusionMatrix::from_predictions(&truths, &truths, classes).unwrap();
            let m = basic_metrics(&cm).unwrap();
            assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn missing_predicted_class_scores_zero() {
        // class 2 never predicted
        let cm = ConfusionMatrix::from_predictions(&[0, 1, 2], &[0, 1, 1], 3).unwrap();
        let m = basic_metrics(&cm).unwrap();
        assert!((m.precision - (1.0 + 0.5 + 0.0) / 3.0).abs() < 1e-15);
        assert!((m.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!(basic_metrics(&ConfusionMatrix::from_counts(2, vec![0; 4]).unwrap()).is_err());
    }

    #[test]
    fn acc_pdf_values() {
        assert_eq!(acc_pdf(0.93, 10, 10).unwrap(), 0.0);
        assert!((acc_pdf(0.8, 2, 10).unwrap() - 0.64).abs() < 1e-15);
        assert!(acc_pdf(1.0, 1, 100_000).unwrap() > 0.9999);
        assert!(acc_pdf(0.5, 0, 10).is_err());
        assert!(acc_pdf(0.5, 11, 10).is_err());
    }

    proptest! {
        #[test]
        fn bounded_and_relabel_invariant(
            counts in proptest::collection::vec(0u64..20, 16),
            perm_seed in 0usize..24,
        ) {
            prop_assume!(counts.iter().sum::<u64>() > 0);
            let cm = ConfusionMatrix::from_counts(4, counts.clone()).unwrap();
            let m = basic_metrics(&cm).unwrap();
            for v in [m.accuracy, m.precision, m.recall, m.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }

            // Relabel classes by the permutation indexed by perm_seed.
            let mut perm = [0, 1, 2, 3];
            let mut s = perm_seed;
            for i in (1..4).rev() {
                perm.swap(i, s % (i + 1));
                s /= i + 1;
            }
            let mut relabeled = vec![0; 16];
            for t in 0..4 {
                for p in 0..4 {
                    relabeled[perm[t] * 4 + perm[p]] = counts[t * 4 + p];
                }
            }
            let r = basic_metrics(&ConfusionMatrix::from_counts(4, relabeled).unwrap()).unwrap();
            prop_assert!((r.precision - m.precision).abs() < 1e-12);
            prop_assert!((r.recall - m.recall).abs() < 1e-12);
            prop_assert!((r.f1 - m.f1).abs() < 1e-12);
            prop_assert_eq!(r.accuracy, m.accuracy);
        }

        #[test]
        fn binary_f1_matches_harmonic_mean(counts in proptest::collection::vec(0u64..50, 4)) {
            prop_assume!(counts.iter().sum::<u64>() > 0);
            let m = basic_metrics(&ConfusionMatrix::from_counts(2, counts).unwrap()).unwrap();
            if m.precision + m.recall > 0.0 {
                let harmonic = 2.0 * m.precision * m.recall / (m.precision + m.recall);
                prop_assert!((harmonic - m.f1).abs() < 1e-12);
            }
        }

        #[test]
        fn acc_pdf_never_exceeds_accuracy(acc in 0.0f64..=1.0, n in 1usize..200, s in 1usize..200) {
            prop_assume!(s <= n);
            prop_assert!(acc_pdf(acc, s, n).unwrap() <= acc);
        }
    }
}
