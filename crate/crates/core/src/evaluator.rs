//! Subset evaluation: the accuracy oracle behind the wrapper search.
//!
//! The built-in classifier is k-nearest-neighbours with Euclidean distance.
//! Distance ties go to the lower training index; vote ties go to the lower
//! class id.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, SplitDataset};
use crate::eda::FeatureSubset;
use crate::error::{Error, Result};
use crate::metrics::{ConfusionMatrix, MetricsReport};
use crate::rng::RandomSource;

/// Fraction of the train partition used for fitting under the holdout
/// protocol; the remainder scores candidate subsets.
pub const INNER_TRAIN_FRACTION: f64 = 0.75;

/// Which data the search-time accuracy is measured on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Fit on an inner split of train, score on its held-out remainder. The
    /// test partition is never touched during search.
    #[default]
    Holdout,
    /// Fit on the full train partition and score on the test partition.
    PaperMirror,
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "holdout" => Ok(Protocol::Holdout),
            "paper-mirror" => Ok(Protocol::PaperMirror),
            other => Err(Error::Config(format!(
                "unknown protocol {other:?} (expected holdout or paper-mirror)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self { k: 5 }
    }
}

/// Anything that can score a feature subset. Every call counts as one
/// fitness evaluation, repeats included.
pub trait SubsetEvaluator {
    fn evaluate(&mut self, subset: &FeatureSubset) -> Result<f64>;
    fn evaluations(&self) -> u64;
}

fn squared_distance(a: &[f64], b: &[f64], columns: &[usize]) -> f64 {
    columns.iter().map(|&c| (a[c] - b[c]).powi(2)).sum()
}

fn predict(fit: &Dataset, query: &[f64], columns: &[usize], k: usize, scratch: &mut Vec<(f64, usize)>) -> usize {
    scratch.clear();
    scratch.extend((0..fit.samples()).map(|i| (squared_distance(fit.row(i), query, columns), i)));
    let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < scratch.len() {
        scratch.select_nth_unstable_by(k - 1, by_distance);
    }
    let mut votes = vec![0usize; fit.class_count()];
    for &(_, i) in &scratch[..k] {
        votes[fit.labels()[i]] += 1;
    }
    // max_by_key keeps the last maximum, so scan in reverse for the lowest id
    votes
        .iter()
        .enumerate()
        .rev()
        .max_by_key(|&(_, &v)| v)
        .map(|(c, _)| c)
        .unwrap_or(0)
}

fn check_k(k: usize, fit: &Dataset) -> Result<()> {
    if k < 1 || k > fit.samples() {
        return Err(Error::Config(format!(
            "k = {k} must lie in 1..={} (training samples)",
            fit.samples()
        )));
    }
    Ok(())
}

pub fn knn_classify(train: &Dataset, query: &[f64], cfg: &KnnConfig) -> Result<usize> {
    if query.len() != train.feature_count() {
        return Err(Error::arg(format!(
            "query has {} features, training set has {}",
            query.len(),
            train.feature_count()
        )));
    }
    check_k(cfg.k, train)?;
    let columns: Vec<usize> = (0..train.feature_count()).collect();
    Ok(predict(train, query, &columns, cfg.k, &mut Vec::new()))
}

fn accuracy_on(fit: &Dataset, score: &Dataset, columns: &[usize], k: usize) -> f64 {
    let mut scratch = Vec::with_capacity(fit.samples());
    let correct = (0..score.samples())
        .filter(|&i| predict(fit, score.row(i), columns, k, &mut scratch) == score.labels()[i])
        .count();
    correct as f64 / score.samples() as f64
}

fn subset_columns(subset: &FeatureSubset, n: usize) -> Result<Vec<usize>> {
    if subset.is_empty() {
        return Err(Error::arg("cannot evaluate an empty subset"));
    }
    if subset.total_features() != n {
        return Err(Error::arg(format!(
            "subset is over {} features, dataset has {n}",
            subset.total_features()
        )));
    }
    // Sorted so that summation order, and hence every distance bit, does not
    // depend on the order features were selected in.
    Ok(subset.sorted())
}

/// k-NN accuracy oracle over a split dataset.
#[derive(Debug)]
pub struct KnnEvaluator<'a> {
    fit: Cow<'a, Dataset>,
    score: Cow<'a, Dataset>,
    k: usize,
    count: u64,
}

impl<'a> KnnEvaluator<'a> {
    /// `src` fixes the inner partition under [`Protocol::Holdout`]; it is
    /// not consumed by [`Protocol::PaperMirror`].
    pub fn new(split: &'a SplitDataset, protocol: Protocol, knn: KnnConfig, src: &mut RandomSource) -> Result<Self> {
        let (fit, score) = match protocol {
            Protocol::Holdout => {
                let (inner, held) = src.split_indices(split.train.labels(), INNER_TRAIN_FRACTION)?;
                (
                    Cow::Owned(split.train.select_rows(&inner)),
                    Cow::Owned(split.train.select_rows(&held)),
                )
            }
            Protocol::PaperMirror => (Cow::Borrowed(&split.train), Cow::Borrowed(&split.test)),
        };
        check_k(knn.k, &fit)?;
        if score.samples() == 0 {
            return Err(Error::arg("scoring partition is empty"));
        }
        Ok(Self {
            fit,
            score,
            k: knn.k,
            count: 0,
        })
    }

    pub fn feature_count(&self) -> usize {
        self.fit.feature_count()
    }
}

impl SubsetEvaluator for KnnEvaluator<'_> {
    fn evaluate(&mut self, subset: &FeatureSubset) -> Result<f64> {
        let columns = subset_columns(subset, self.fit.feature_count())?;
        self.count += 1;
        Ok(accuracy_on(&self.fit, &self.score, &columns, self.k))
    }

    fn evaluations(&self) -> u64 {
        self.count
    }
}

/// Fits on the full train partition and scores the test partition.
pub fn final_report(split: &SplitDataset, subset: &FeatureSubset, knn: &KnnConfig) -> Result<MetricsReport> {
    let n = split.feature_count();
    let columns = subset_columns(subset, n)?;
    check_k(knn.k, &split.train)?;
    let mut scratch = Vec::new();
    let predictions: Vec<usize> = (0..split.test.samples())
        .map(|i| predict(&split.train, split.test.row(i), &columns, knn.k, &mut scratch))
        .collect();
    let cm = ConfusionMatrix::from_predictions(split.test.labels(), &predictions, split.class_count())?;
    MetricsReport::new(&cm, subset.len(), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, normalize_minmax};

    fn two_clusters() -> Dataset {
        Dataset::new(
            vec![0.0, 0.0, 0.0, 0.1, 0.1, 0.0, 1.0, 1.0, 1.0, 0.9, 0.9, 1.0],
            vec!["x".into(), "y".into()],
            vec![0, 0, 0, 1, 1, 1],
            2,
        )
        .unwrap()
    }

    #[test]
    fn nearest_point_wins_with_k1() {
        let ds = two_clusters();
        for i in 0..ds.samples() {
            let c = knn_classify(&ds, ds.row(i), &KnnConfig { k: 1 }).unwrap();
            assert_eq!(c, ds.labels()[i]);
        }
    }

    #[test]
    fn all_points_vote_tie_goes_to_lowest_class() {
        let ds = two_clusters();
        let c = knn_classify(&ds, &[0.9, 0.9], &KnnConfig { k: 6 }).unwrap();
        assert_eq!(c, 0);
    }

    #[test]
    fn cluster_query() {
        let ds = two_clusters();
        assert_eq!(knn_classify(&ds, &[0.1, 0.1], &KnnConfig { k: 3 }).unwrap(), 0);
        assert!(knn_classify(&ds, &[0.1], &KnnConfig { k: 3 }).is_err());
        assert!(knn_classify(&ds, &[0.1, 0.1], &KnnConfig { k: 7 }).is_err());
    }

    #[test]
    fn distance_ties_prefer_lower_index() {
        // two equidistant neighbours of different classes, k = 1
        let ds = Dataset::new(vec![0.0, 0.0, 2.0, 0.0], vec!["x".into(), "y".into()], vec![1, 0], 2).unwrap();
        assert_eq!(knn_classify(&ds, &[1.0, 0.0], &KnnConfig { k: 1 }).unwrap(), 1);
    }

    fn threshold_split(seed: u64) -> SplitDataset {
        // label = (f1 > 0.5), f2 independent noise
        let mut src = RandomSource::new(seed);
        let m = 200;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..m {
            let (a, b) = (src.next_uniform(), src.next_uniform());
            features.extend_from_slice(&[a, b]);
            labels.push(usize::from(a > 0.5));
        }
        let ds = Dataset::new(features, vec!["f1".into(), "f2".into()], labels, 2).unwrap();
        normalize_minmax(SplitDataset::stratified(&ds, &mut src, 0.75).unwrap())
    }

    #[test]
    fn separable_feature_scores_high_and_noise_scores_chance() {
        let split = threshold_split(1);
        let mut ev =
            KnnEvaluator::new(&split, Protocol::Holdout, KnnConfig { k: 1 }, &mut RandomSource::new(2)).unwrap();
        let acc = ev.evaluate(&FeatureSubset::new(vec![0], 2).unwrap()).unwrap();
        assert!(acc >= 0.95, "{acc}");
        let noise = ev.evaluate(&FeatureSubset::new(vec![1], 2).unwrap()).unwrap();
        assert!((noise - 0.5).abs() <= 0.15, "{noise}");
        assert_eq!(ev.evaluations(), 2);
    }

    #[test]
    fn repeated_evaluation_counts_and_agrees() {
        let ds = generate_synthetic(&mut RandomSource::new(3), 250, 0.02).unwrap();
        let split = normalize_minmax(SplitDataset::stratified(&ds, &mut RandomSource::new(4), 0.75).unwrap());
        let mut ev = KnnEvaluator::new(
            &split,
            Protocol::Holdout,
            KnnConfig::default(),
            &mut RandomSource::new(5),
        )
        .unwrap();
        let s = FeatureSubset::new(vec![0, 1, 2], 10).unwrap();
        let a = ev.evaluate(&s).unwrap();
        let b = ev.evaluate(&s).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(ev.evaluations(), 2);

        let shuffled = FeatureSubset::new(vec![2, 0, 1], 10).unwrap();
        assert_eq!(ev.evaluate(&shuffled).unwrap().to_bits(), a.to_bits());
    }

    #[test]
    fn paper_mirror_scores_test_partition() {
        let split = threshold_split(7);
        let mut ev = KnnEvaluator::new(
            &split,
            Protocol::PaperMirror,
            KnnConfig { k: 1 },
            &mut RandomSource::new(0),
        )
        .unwrap();
        let s = FeatureSubset::new(vec![0], 2).unwrap();
        let acc = ev.evaluate(&s).unwrap();
        let report = final_report(&split, &s, &KnnConfig { k: 1 }).unwrap();
        assert_eq!(acc, report.accuracy);
        assert_eq!(ev.evaluations(), 1);
    }

    #[test]
    fn final_report_on_full_set_has_zero_acc_pdf() {
        let split = threshold_split(9);
        let r = final_report(&split, &FeatureSubset::full(2), &KnnConfig::default()).unwrap();
        assert_eq!(r.acc_pdf, 0.0);
        assert_eq!(r.sfr, 1.0);
    }

    #[test]
    fn perfect_predictor_report() {
        let train = two_clusters();
        let split = SplitDataset::new(train.clone(), train).unwrap();
        let r = final_report(&split, &FeatureSubset::full(2), &KnnConfig { k: 1 }).unwrap();
        assert_eq!((r.accuracy, r.precision, r.recall, r.f1), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn protocol_parsing() {
        assert_eq!("holdout".parse::<Protocol>().unwrap(), Protocol::Holdout);
        assert_eq!("paper-mirror".parse::<Protocol>().unwrap(), Protocol::PaperMirror);
        assert!("svm".parse::<Protocol>().is_err());
    }
}
