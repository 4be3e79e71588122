//! Datasets: CSV ingestion, train/test partitioning, min-max scaling,
//! column projection and the correlated synthetic benchmark.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Dense numeric samples with integer class labels.
///
/// Features are stored row-major. A dataset built with [`Dataset::new`] has
/// every class id in `0..class_count` present; row subsets produced by
/// [`Dataset::select_rows`] keep the parent's `class_count` even if a class
/// ends up absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    samples: usize,
    feature_names: Vec<String>,
    labels: Vec<usize>,
    class_count: usize,
}

impl Dataset {
    pub fn new(features: Vec<f64>, feature_names: Vec<String>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        let samples = labels.len();
        let n = feature_names.len();
        if samples < 2 {
            return Err(Error::InvalidDataset(format!("need at least 2 samples, got {samples}")));
        }
        if n < 2 {
            return Err(Error::InvalidDataset(format!("need at least 2 features, got {n}")));
        }
        if class_count < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 classes, got {class_count}"
            )));
        }
        if features.len() != samples * n {
            return Err(Error::InvalidDataset(format!(
                "feature matrix has {} cells, expected {samples} x {n}",
                features.len()
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value at sample {}, feature {}",
                pos / n,
                pos % n
            )));
        }
        let mut seen = vec![false; class_count];
        for &c in &labels {
            if c >= class_count {
                return Err(Error::InvalidDataset(format!(
                    "label {c} out of range for {class_count} classes"
                )));
            }
            seen[c] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidDataset(format!("class {missing} has no samples")));
        }
        let mut names = HashSet::new();
        for name in &feature_names {
            if !names.insert(name.as_str()) {
                return Err(Error::InvalidDataset(format!("duplicate feature name {name:?}")));
            }
        }
        Ok(Self {
            features,
            samples,
            feature_names,
            labels,
            class_count,
        })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.feature_count();
        &self.features[i * n..(i + 1) * n]
    }

    pub fn value(&self, sample: usize, feature: usize) -> f64 {
        self.features[sample * self.feature_count() + feature]
    }

    pub fn column(&self, feature: usize) -> Vec<f64> {
        (0..self.samples).map(|i| self.value(i, feature)).collect()
    }

    /// The samples at `rows`, in that order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(rows.len() * self.feature_count());
        for &r in rows {
            features.extend_from_slice(self.row(r));
        }
        Dataset {
            features,
            samples: rows.len(),
            feature_names: self.feature_names.clone(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            class_count: self.class_count,
        }
    }

    /// Restricts the dataset to `columns`, in the given order.
    pub fn project(&self, columns: &[usize]) -> Result<Dataset> {
        let n = self.feature_count();
        if columns.is_empty() {
            return Err(Error::arg("cannot project onto an empty feature subset"));
        }
        let mut seen = vec![false; n];
        for &c in columns {
            if c >= n {
                return Err(Error::arg(format!("feature index {c} out of range for {n} features")));
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::arg(format!("duplicate feature index {c}")));
            }
        }
        let mut features = Vec::with_capacity(self.samples * columns.len());
        for i in 0..self.samples {
            let row = self.row(i);
            features.extend(columns.iter().map(|&c| row[c]));
        }
        Ok(Dataset {
            features,
            samples: self.samples,
            feature_names: columns.iter().map(|&c| self.feature_names[c].clone()).collect(),
            labels: self.labels.clone(),
            class_count: self.class_count,
        })
    }

    /// Renders the dataset as CSV with the feature names followed by a
    /// `label` column holding class ids.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.feature_names.join(","));
        out.push_str(",label\n");
        for i in 0..self.samples {
            for v in self.row(i) {
                write!(out, "{v},").unwrap();
            }
            writeln!(out, "{}", self.labels[i]).unwrap();
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

/// How the label column of a CSV file is addressed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl LabelColumn {
    /// Interprets a command-line token: all digits means a 0-based index.
    pub fn parse(token: &str) -> Self {
        match token.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(token.to_string()),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, label, path)
}

/// Parses comma-delimited text. Label tokens are mapped to contiguous class
/// ids in order of first appearance.
pub fn parse_csv(text: &str, label: &LabelColumn, path: &Path) -> Result<Dataset> {
    let parse_err = |row: usize, column: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        row,
        column,
        message,
    };

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::InvalidDataset(format!("{}: empty file", path.display())))?;
    let header: Vec<String> = header.split(',').map(|h| h.trim().to_string()).collect();

    let mut names = HashSet::new();
    for (col, name) in header.iter().enumerate() {
        if !names.insert(name.as_str()) {
            return Err(parse_err(1, col + 1, format!("duplicate header name {name:?}")));
        }
    }

    let label_idx = match label {
        LabelColumn::Index(i) if *i < header.len() => *i,
        LabelColumn::Index(i) => {
            return Err(Error::InvalidDataset(format!(
                "label column {i} out of range for {} columns",
                header.len()
            )))
        }
        LabelColumn::Name(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidDataset(format!("no column named {name:?} in {}", path.display())))?,
    };
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut class_ids: HashMap<String, usize> = HashMap::new();
    for (row, line) in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(parse_err(
                row,
                cells.len().min(header.len()) + 1,
                format!("expected {} cells, found {}", header.len(), cells.len()),
            ));
        }
        for (col, cell) in cells.iter().enumerate() {
            let cell = cell.trim();
            if col == label_idx {
                let next = class_ids.len();
                labels.push(*class_ids.entry(cell.to_string()).or_insert(next));
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(row, col + 1, format!("cannot parse {cell:?} as a number")))?;
            if !v.is_finite() {
                return Err(parse_err(row, col + 1, format!("non-finite value {cell:?}")));
            }
            features.push(v);
        }
    }

    if class_ids.len() < 2 {
        return Err(Error::InvalidDataset(format!(
            "{}: label column has {} distinct class(es), need at least 2",
            path.display(),
            class_ids.len()
        )));
    }
    Dataset::new(features, feature_names, labels, class_ids.len())
}

/// Per-feature `(min, max)` over a training partition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

/// A train/test partition plus the scaling parameters learned from train.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitDataset {
    pub train: Dataset,
    pub test: Dataset,
    ranges: Vec<FeatureRange>,
    normalized: bool,
}

impl SplitDataset {
    pub fn new(train: Dataset, test: Dataset) -> Result<Self> {
        if train.samples() == 0 {
            return Err(Error::arg("train partition is empty"));
        }
        if train.feature_count() != test.feature_count() {
            return Err(Error::arg("train and test feature counts differ"));
        }
        let n = train.feature_count();
        let mut ranges = vec![
            FeatureRange {
                min: f64::INFINITY,
                max: f64::NEG_INFINITY
            };
            n
        ];
        for i in 0..train.samples() {
            for (r, &v) in ranges.iter_mut().zip(train.row(i)) {
                r.min = r.min.min(v);
                r.max = r.max.max(v);
            }
        }
        Ok(Self {
            train,
            test,
            ranges,
            normalized: false,
        })
    }

    /// Stratified random split of `ds`.
    pub fn stratified(ds: &Dataset, src: &mut RandomSource, train_fraction: f64) -> Result<Self> {
        let (train, test) = src.split_indices(ds.labels(), train_fraction)?;
        Self::new(ds.select_rows(&train), ds.select_rows(&test))
    }

    pub fn ranges(&self) -> &[FeatureRange] {
        &self.ranges
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn feature_count(&self) -> usize {
        self.train.feature_count()
    }

    pub fn class_count(&self) -> usize {
        self.train.class_count()
    }
}

/// Maps every feature through `(x - min_train) / (max_train - min_train)`.
///
/// Constant training features map to 0 in both partitions. Test values are
/// not clipped. Applying this to an already normalized split is a no-op.
pub fn normalize_minmax(split: SplitDataset) -> SplitDataset {
    if split.normalized {
        return split;
    }
    let scale = |ds: &Dataset, ranges: &[FeatureRange]| {
        let n = ds.feature_count();
        let mut out = ds.clone();
        for (i, v) in out.features.iter_mut().enumerate() {
            let r = ranges[i % n];
            let width = r.max - r.min;
            *v = if width > 0.0 { (*v - r.min) / width } else { 0.0 };
        }
        out
    };
    SplitDataset {
        train: scale(&split.train, &split.ranges),
        test: scale(&split.test, &split.ranges),
        ranges: split.ranges,
        normalized: true,
    }
}

fn feature_name(i: usize) -> String {
    format!("f{}", i + 1)
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

fn threshold_labels(src: &mut RandomSource, scores: &[f64], noise_rate: f64) -> Vec<usize> {
    let cut = median(scores);
    scores
        .iter()
        .map(|&s| {
            let label = usize::from(s > cut);
            if src.next_uniform() < noise_rate {
                1 - label
            } else {
                label
            }
        })
        .collect()
}

/// The ten-feature correlated benchmark.
///
/// `f1..f6` are i.i.d. Uniform(0,1); `f7 = 10·f1`, `f8 = f2 + 3·f3`,
/// `f9 = f4`, `f10 = f5 / 1000`. The label is 1 when
/// `f1 + 0.8·f2 + 0.6·f3 + 0.4·f4 + 0.2·f5` exceeds its sample median, then
/// flipped independently with probability `noise_rate`. `f6` carries no
/// label information.
pub fn generate_synthetic(src: &mut RandomSource, m: usize, noise_rate: f64) -> Result<Dataset> {
    if m < 10 {
        return Err(Error::arg(format!(
            "synthetic dataset needs at least 10 samples, got {m}"
        )));
    }
    if !(0.0..=0.5).contains(&noise_rate) {
        return Err(Error::arg(format!("noise rate must lie in [0, 0.5], got {noise_rate}")));
    }
    let mut features = Vec::with_capacity(m * 10);
    let mut scores = Vec::with_capacity(m);
    for _ in 0..m {
        let mut base = [0.0; 6];
        for b in &mut base {
            *b = src.next_uniform();
        }
        let [f1, f2, f3, f4, f5, f6] = base;
        features.extend_from_slice(&[f1, f2, f3, f4, f5, f6, 10.0 * f1, f2 + 3.0 * f3, f4, f5 / 1000.0]);
        scores.push(f1 + 0.8 * f2 + 0.6 * f3 + 0.4 * f4 + 0.2 * f5);
    }
    let labels = threshold_labels(src, &scores, noise_rate);
    Dataset::new(features, (0..10).map(feature_name).collect(), labels, 2)
}

/// A wider variant of the correlated benchmark with `n >= 10` features.
///
/// The first ten columns follow [`generate_synthetic`]'s construction. Of
/// the remaining columns, every fourth is a scaled copy of one of `f1..f5`
/// (cycling) and the rest are independent Uniform(0,1) noise, so the
/// selector faces both redundancy and irrelevance at scale.
pub fn generate_wide_synthetic(src: &mut RandomSource, m: usize, n: usize, noise_rate: f64) -> Result<Dataset> {
    if n < 10 {
        return Err(Error::arg(format!("wide synthetic dataset needs n >= 10, got {n}")));
    }
    let base = generate_synthetic(src, m, noise_rate)?;
    let mut features = Vec::with_capacity(m * n);
    for i in 0..m {
        let row = base.row(i);
        features.extend_from_slice(row);
        for extra in 0..n - 10 {
            if extra % 4 == 0 {
                let source = (extra / 4) % 5;
                features.push(row[source] * (2.0 + (extra / 20) as f64));
            } else {
                features.push(src.next_uniform());
            }
        }
    }
    Dataset::new(features, (0..n).map(feature_name).collect(), base.labels.clone(), 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        Dataset::new(
            vec![0.0, 1.0, 5.0, 2.0, 10.0, 3.0],
            vec!["a".into(), "b".into()],
            vec![0, 1, 1],
            2,
        )
        .unwrap()
    }

    fn pearson(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        cov / (vx * vy).sqrt()
    }

    #[test]
    fn parses_small_file() {
        let text = "x,y,class\n1,2,a\n3,4,b\n5,6,a\n";
        let ds = parse_csv(text, &LabelColumn::Name("class".into()), Path::new("t.csv")).unwrap();
        assert_eq!((ds.samples(), ds.feature_count(), ds.class_count()), (3, 2, 2));
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.row(2), &[5.0, 6.0]);

        let by_index = parse_csv(text, &LabelColumn::Index(2), Path::new("t.csv")).unwrap();
        assert_eq!(ds, by_index);
    }

    #[test]
    fn label_column_can_be_first() {
        let text = "class,x,y\nb,1,2\na,3,4\n";
        let ds = parse_csv(text, &LabelColumn::parse("0"), Path::new("t.csv")).unwrap();
        assert_eq!(ds.feature_names(), &["x".to_string(), "y".to_string()]);
        assert_eq!(ds.labels(), &[0, 1]);
    }

    #[test]
    fn parse_error_names_row_and_column() {
        let text = "x,y,class\n1,2,a\n3,oops,b\n";
        let err = parse_csv(text, &LabelColumn::Name("class".into()), Path::new("t.csv")).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => assert_eq!((row, column), (3, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicate_header_and_single_class() {
        let dup = "x,x,class\n1,2,a\n3,4,b\n";
        assert!(parse_csv(dup, &LabelColumn::Index(2), Path::new("t.csv")).is_err());
        let single = "x,y,class\n1,2,a\n3,4,a\n";
        let err = parse_csv(single, &LabelColumn::Index(2), Path::new("t.csv")).unwrap_err();
        assert!(err.to_string().contains("distinct class"));
        assert!(load_csv("/nonexistent/file.csv", &LabelColumn::Index(0)).is_err());
    }

    #[test]
    fn minmax_maps_train_range_to_unit() {
        let train = Dataset::new(
            vec![0.0, 7.0, 5.0, 7.0, 10.0, 7.0],
            vec!["a".into(), "b".into()],
            vec![0, 1, 0],
            2,
        )
        .unwrap();
        let test = Dataset::new(vec![12.0, 3.0, -5.0, 7.0], vec!["a".into(), "b".into()], vec![0, 1], 2).unwrap();
        let split = normalize_minmax(SplitDataset::new(train, test).unwrap());
        assert_eq!(split.train.column(0), vec![0.0, 0.5, 1.0]);
        assert_eq!(split.train.column(1), vec![0.0; 3]);
        assert_eq!(split.test.column(0), vec![1.2, -0.5]);
        assert_eq!(split.test.column(1), vec![0.0; 2]);
        assert!(split.is_normalized());
        let again = normalize_minmax(split.clone());
        assert_eq!(again, split);
    }

    #[test]
    fn projection() {
        let ds = toy();
        assert_eq!(ds.project(&[0, 1]).unwrap(), ds);
        let one = ds.project(&[1]).unwrap();
        assert_eq!(one.column(0), ds.column(1));
        assert_eq!(one.feature_names(), &["b".to_string()]);
        assert!(ds.project(&[]).is_err());
        assert!(ds.project(&[2]).is_err());
        assert!(ds.project(&[0, 0]).is_err());
    }

    #[test]
    fn synthetic_structure() {
        let ds = generate_synthetic(&mut RandomSource::new(5), 250, 0.02).unwrap();
        assert_eq!((ds.samples(), ds.feature_count()), (250, 10));
        for i in 0..250 {
            let r = ds.row(i);
            assert_eq!(r[6], 10.0 * r[0]);
            assert_eq!(r[7], r[1] + 3.0 * r[2]);
            assert_eq!(r[8], r[3]);
            assert_eq!(r[9], r[4] / 1000.0);
        }
        assert!((pearson(&ds.column(3), &ds.column(8)) - 1.0).abs() < 1e-12);
        assert!((pearson(&ds.column(4), &ds.column(9)) - 1.0).abs() < 1e-12);
        let ones = ds.labels().iter().filter(|&&l| l == 1).count();
        assert!(ones >= 100 && 250 - ones >= 100, "{ones}");

        let again = generate_synthetic(&mut RandomSource::new(5), 250, 0.02).unwrap();
        assert_eq!(ds.to_csv_string(), again.to_csv_string());
        assert_ne!(
            ds.to_csv_string(),
            generate_synthetic(&mut RandomSource::new(6), 250, 0.02)
                .unwrap()
                .to_csv_string()
        );
    }

    #[test]
    fn noise_feature_is_uninformative() {
        // Point-biserial |r| of f6 with the label exceeds 0.15 in about 1.5%
        // of datasets at m = 250 (Monte Carlo over 2000 draws).
        let within = (0..200)
            .filter(|&seed| {
                let ds = generate_synthetic(&mut RandomSource::new(seed), 250, 0.02).unwrap();
                let y: Vec<f64> = ds.labels().iter().map(|&l| l as f64).collect();
                pearson(&ds.column(5), &y).abs() < 0.15
            })
            .count();
        assert!(within >= 194, "{within}/200");
    }

    #[test]
    fn synthetic_csv_round_trip() {
        let ds = generate_synthetic(&mut RandomSource::new(9), 40, 0.0).unwrap();
        let text = ds.to_csv_string();
        assert_eq!(text.lines().count(), 41);
        assert!(text.starts_with("f1,f2,f3,f4,f5,f6,f7,f8,f9,f10,label\n"));
        let back = parse_csv(&text, &LabelColumn::Name("label".into()), Path::new("s.csv")).unwrap();
        for i in 0..40 {
            assert_eq!(back.row(i), ds.row(i));
        }
    }

    #[test]
    fn wide_variant_extends_base() {
        let wide = generate_wide_synthetic(&mut RandomSource::new(3), 120, 100, 0.02).unwrap();
        assert_eq!(wide.feature_count(), 100);
        for i in 0..wide.samples() {
            let r = wide.row(i);
            assert_eq!(r[6], 10.0 * r[0]);
            assert_eq!(r[10], 2.0 * r[0]);
        }
    }
}
