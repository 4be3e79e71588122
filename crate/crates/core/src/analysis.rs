//! Post-run inspection of finished models and traces.

use std::fmt::Write as _;
use std::path::Path;

use crate::eda::{IterationRecord, ProbabilityModel};
use crate::error::{Error, Result};

/// `n × n` conditional selection probabilities; entry `(i, j)` is the
/// probability of picking feature `j` right after feature `i`. Rows sum to
/// one and the diagonal is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapMatrix {
    n: usize,
    values: Vec<f64>,
}

impl HeatmapMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Column of the smallest off-diagonal entry in row `i` (lowest index
    /// on ties).
    pub fn row_argmin(&self, i: usize) -> usize {
        (0..self.n)
            .filter(|&j| j != i)
            .min_by(|&a, &b| self.get(i, a).total_cmp(&self.get(i, b)))
            .expect("n >= 2")
    }

    fn renormalize_rows(&mut self) {
        let n = self.n;
        for i in 0..n {
            let row = &mut self.values[i * n..(i + 1) * n];
            row[i] = 0.0;
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                for v in row.iter_mut() {
                    *v /= total;
                }
            }
        }
    }

    /// Plain CSV, one line per row, six decimal places, no header.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let cells: Vec<String> = self.row(i).iter().map(|v| format!("{v:.6}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

pub fn conditional_heatmap(model: &ProbabilityModel) -> HeatmapMatrix {
    let n = model.n();
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        let row = model
            .conditional_distribution(&[i])
            .expect("a single valid index always leaves candidates when n >= 2");
        values.extend(row);
    }
    HeatmapMatrix { n, values }
}

/// Elementwise mean of several heatmaps, rows renormalized.
pub fn aggregate_heatmaps(runs: &[HeatmapMatrix]) -> Result<HeatmapMatrix> {
    let first = runs
        .first()
        .ok_or_else(|| Error::arg("need at least one heatmap to aggregate"))?;
    if runs.iter().any(|h| h.n != first.n) {
        return Err(Error::arg("heatmaps differ in shape"));
    }
    let mut values = vec![0.0; first.values.len()];
    for h in runs {
        for (acc, v) in values.iter_mut().zip(&h.values) {
            *acc += v;
        }
    }
    let count = runs.len() as f64;
    for v in &mut values {
        *v /= count;
    }
    let mut out = HeatmapMatrix { n: first.n, values };
    out.renormalize_rows();
    Ok(out)
}

/// `(iteration, winner size)` for each recorded iteration.
pub fn size_trajectory(trace: &[IterationRecord]) -> Vec<(usize, usize)> {
    trace.iter().map(|r| (r.iteration, r.winner_size)).collect()
}

/// Pointwise mean winner size across equally long traces.
pub fn mean_size_trajectory(traces: &[&[IterationRecord]]) -> Result<Vec<(usize, f64)>> {
    let first = traces
        .first()
        .ok_or_else(|| Error::arg("need at least one trace to average"))?;
    if first.is_empty() {
        return Err(Error::arg("trace is empty"));
    }
    if traces.iter().any(|t| t.len() != first.len()) {
        return Err(Error::arg("traces differ in length"));
    }
    let count = traces.len() as f64;
    Ok((0..first.len())
        .map(|i| {
            let sum: usize = traces.iter().map(|t| t[i].winner_size).sum();
            (first[i].iteration, sum as f64 / count)
        })
        .collect())
}

/// Two-column CSV with an `iteration,size` header.
pub fn trajectory_csv(points: &[(usize, f64)]) -> String {
    let mut out = String::from("iteration,size\n");
    for (it, size) in points {
        writeln!(out, "{it},{size:.6}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eda::UpdateParams;

    fn record(iteration: usize, winner_size: usize) -> IterationRecord {
        IterationRecord {
            iteration,
            d: 1,
            winner_size,
            winner_fitness: 1.0,
            loser_fitness: 0.5,
            best_fitness: 1.0,
            model_updated: true,
        }
    }

    #[test]
    fn uniform_model_gives_uniform_rows() {
        let model = ProbabilityModel::init(10, UpdateParams::default()).unwrap();
        let hm = conditional_heatmap(&model);
        for i in 0..10 {
            for j in 0..10 {
                let expected = if i == j { 0.0 } else { 1.0 / 9.0 };
                assert!((hm.get(i, j) - expected).abs() < 1e-15);
            }
            assert!((hm.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn low_interaction_is_row_minimum() {
        let n = 10;
        let mut im = vec![1.0; n * n];
        im[4 * n + 9] = 0.3;
        im[9 * n + 4] = 0.3;
        let model = ProbabilityModel::from_parts(vec![1.0; n], im, UpdateParams::default()).unwrap();
        let hm = conditional_heatmap(&model);
        assert_eq!(hm.row_argmin(4), 9);
        assert_eq!(hm.row_argmin(9), 4);
    }

    #[test]
    fn aggregation_rules() {
        let uniform = conditional_heatmap(&ProbabilityModel::init(4, UpdateParams::default()).unwrap());
        let mut im = vec![1.0; 16];
        im[1] = 2.0;
        im[4] = 2.0;
        let skewed =
            conditional_heatmap(&ProbabilityModel::from_parts(vec![1.0; 4], im, UpdateParams::default()).unwrap());

        assert_eq!(aggregate_heatmaps(std::slice::from_ref(&skewed)).unwrap(), skewed);
        assert_eq!(aggregate_heatmaps(&[skewed.clone(), skewed.clone()]).unwrap(), skewed);
        assert_eq!(
            aggregate_heatmaps(&[uniform.clone(), uniform.clone()]).unwrap(),
            uniform
        );

        let ab = aggregate_heatmaps(&[uniform.clone(), skewed.clone()]).unwrap();
        let ba = aggregate_heatmaps(&[skewed, uniform]).unwrap();
        assert_eq!(ab, ba);
        for i in 0..4 {
            assert!((ab.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        let small = conditional_heatmap(&ProbabilityModel::init(3, UpdateParams::default()).unwrap());
        assert!(aggregate_heatmaps(&[ab, small]).is_err());
        assert!(aggregate_heatmaps(&[]).is_err());
    }

    #[test]
    fn heatmap_csv_shape() {
        let hm = conditional_heatmap(&ProbabilityModel::init(3, UpdateParams::default()).unwrap());
        assert_eq!(
            hm.to_csv_string(),
            "0.000000,0.500000,0.500000\n0.500000,0.000000,0.500000\n0.500000,0.500000,0.000000\n"
        );
    }

    #[test]
    fn trajectories() {
        let constant: Vec<IterationRecord> = (0..250).map(|i| record(i, 4)).collect();
        let series = size_trajectory(&constant);
        assert_eq!(series.len(), 250);
        assert!(series.iter().all(|&(_, s)| s == 4));

        let rising: Vec<IterationRecord> = (0..250).map(|i| record(i, 2 + i % 3)).collect();
        let mean = mean_size_trajectory(&[&constant, &rising]).unwrap();
        assert_eq!(mean[0], (0, 3.0));
        assert_eq!(mean[2], (2, 4.0));
        assert!(mean_size_trajectory(&[&constant, &rising[..10]]).is_err());

        let csv = trajectory_csv(&mean[..2]);
        assert_eq!(csv, "iteration,size\n0,3.000000\n1,3.500000\n");
    }
}
