//! The significance vector / interaction matrix model and its update rules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_CHANGE_FACTOR: f64 = 0.01;
pub const DEFAULT_STRONG_MULTIPLIER: u32 = 2;
pub const VALUE_FLOOR: f64 = 1e-6;
pub const VALUE_CAP: f64 = 1e6;

/// Learning-rate settings shared by both update tables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpdateParams {
    pub change_factor: f64,
    pub strong_multiplier: u32,
}

impl Default for UpdateParams {
    fn default() -> Self {
        Self {
            change_factor: DEFAULT_CHANGE_FACTOR,
            strong_multiplier: DEFAULT_STRONG_MULTIPLIER,
        }
    }
}

impl UpdateParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.change_factor > 0.0 && self.change_factor.is_finite()) {
            return Err(Error::Config(format!(
                "change factor must be positive, got {}",
                self.change_factor
            )));
        }
        if self.strong_multiplier < 1 {
            return Err(Error::Config("strong multiplier must be >= 1".into()));
        }
        Ok(())
    }
}

/// One cell of an update table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Adjustment {
    Keep,
    Increase,
    StrongIncrease,
    Decrease,
    StrongDecrease,
}

impl Adjustment {
    pub fn delta(self, params: &UpdateParams) -> f64 {
        let cf = params.change_factor;
        let strong = f64::from(params.strong_multiplier) * cf;
        match self {
            Adjustment::Keep => 0.0,
            Adjustment::Increase => cf,
            Adjustment::StrongIncrease => strong,
            Adjustment::Decrease => -cf,
            Adjustment::StrongDecrease => -strong,
        }
    }
}

use Adjustment::{Decrease as Dn, Increase as Up, Keep as Kp, StrongDecrease as Dn2, StrongIncrease as Up2};

/// SV rule indexed by `[winner bit][loser bit]`.
pub const SV_TABLE: [[Adjustment; 2]; 2] = [[Kp, Dn], [Up, Kp]];

/// IM rule indexed by `[2·wᵢ + wⱼ][2·lᵢ + lⱼ]`.
pub const IM_TABLE: [[Adjustment; 4]; 4] = [
    [Kp, Kp, Kp, Dn],
    [Kp, Kp, Kp, Dn2],
    [Kp, Kp, Kp, Dn2],
    [Up, Up2, Up2, Kp],
];

/// Per-feature significance `sv` and symmetric pairwise interaction `im`.
///
/// All SV entries and off-diagonal IM entries stay within
/// `[VALUE_FLOOR, VALUE_CAP]`. The IM diagonal is stored but never read.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityModel {
    n: usize,
    sv: Vec<f64>,
    im: Vec<f64>,
    params: UpdateParams,
}

impl ProbabilityModel {
    /// Every SV and IM entry set to 1.
    pub fn init(n: usize, params: UpdateParams) -> Result<Self> {
        if n < 2 {
            return Err(Error::arg(format!("model needs at least 2 features, got {n}")));
        }
        params.validate()?;
        Ok(Self {
            n,
            sv: vec![1.0; n],
            im: vec![1.0; n * n],
            params,
        })
    }

    /// Builds a model from explicit entries. `im` is row-major `n × n` and
    /// must be symmetric off the diagonal.
    pub fn from_parts(sv: Vec<f64>, im: Vec<f64>, params: UpdateParams) -> Result<Self> {
        let n = sv.len();
        if n < 2 || im.len() != n * n {
            return Err(Error::arg("model shape mismatch"));
        }
        params.validate()?;
        let in_range = |v: f64| (VALUE_FLOOR..=VALUE_CAP).contains(&v);
        if let Some(j) = sv.iter().position(|&v| !in_range(v)) {
            return Err(Error::arg(format!("SV({j}) = {} outside bounds", sv[j])));
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let v = im[i * n + j];
                if !in_range(v) {
                    return Err(Error::arg(format!("IM({i},{j}) = {v} outside bounds")));
                }
                if v != im[j * n + i] {
                    return Err(Error::arg(format!("IM not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { n, sv, im, params })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> &UpdateParams {
        &self.params
    }

    pub fn sv(&self) -> &[f64] {
        &self.sv
    }

    pub fn im(&self, i: usize, j: usize) -> f64 {
        self.im[i * self.n + j]
    }

    /// Row-major IM including the unused diagonal.
    pub fn im_matrix(&self) -> &[f64] {
        &self.im
    }

    /// `SV(j) / Σₖ SV(k)`.
    pub fn first_feature_distribution(&self) -> Vec<f64> {
        let total: f64 = self.sv.iter().sum();
        self.sv.iter().map(|&v| v / total).collect()
    }

    /// Probability of each feature being picked next given the features
    /// already chosen: proportional to `SV(j) · ∏_{l∈A} IM(j,l)` over the
    /// unchosen `j`, and 0 for chosen ones.
    pub fn conditional_distribution(&self, selected: &[usize]) -> Result<Vec<f64>> {
        if selected.is_empty() {
            return Err(Error::arg(
                "conditional distribution needs at least one selected feature",
            ));
        }
        let mut chosen = vec![false; self.n];
        for &l in selected {
            if l >= self.n || std::mem::replace(&mut chosen[l], true) {
                return Err(Error::arg(format!("invalid selected feature {l}")));
            }
        }
        if selected.len() >= self.n {
            return Err(Error::arg("every feature is already selected"));
        }
        let mut logs = self.log_significance();
        for &l in selected {
            self.accumulate_interaction(&mut logs, l);
        }
        Ok(normalize_log_weights(&logs, &chosen))
    }

    pub(crate) fn log_significance(&self) -> Vec<f64> {
        self.sv.iter().map(|v| v.ln()).collect()
    }

    /// Adds `ln IM(j, added)` to every running log-weight. Products over
    /// many factors underflow, sums of logs do not.
    pub(crate) fn accumulate_interaction(&self, logs: &mut [f64], added: usize) {
        let row = &self.im[added * self.n..(added + 1) * self.n];
        for (acc, &v) in logs.iter_mut().zip(row) {
            *acc += v.ln();
        }
    }

    fn clamp(v: f64) -> f64 {
        v.clamp(VALUE_FLOOR, VALUE_CAP)
    }

    pub fn apply_sv_update(&mut self, winner: &[bool], loser: &[bool]) -> Result<()> {
        self.check_lengths(winner, loser)?;
        for i in 0..self.n {
            let adj = SV_TABLE[usize::from(winner[i])][usize::from(loser[i])];
            if adj != Adjustment::Keep {
                self.sv[i] = Self::clamp(self.sv[i] + adj.delta(&self.params));
            }
        }
        Ok(())
    }

    pub fn apply_im_update(&mut self, winner: &[bool], loser: &[bool]) -> Result<()> {
        self.check_lengths(winner, loser)?;
        let n = self.n;
        for i in 0..n {
            for j in i + 1..n {
                let w = 2 * usize::from(winner[i]) + usize::from(winner[j]);
                let l = 2 * usize::from(loser[i]) + usize::from(loser[j]);
                let adj = IM_TABLE[w][l];
                if adj == Adjustment::Keep {
                    continue;
                }
                let v = Self::clamp(self.im[i * n + j] + adj.delta(&self.params));
                self.im[i * n + j] = v;
                self.im[j * n + i] = v;
            }
        }
        Ok(())
    }

    fn check_lengths(&self, winner: &[bool], loser: &[bool]) -> Result<()> {
        if winner.len() != self.n || loser.len() != self.n {
            return Err(Error::arg(format!(
                "winner/loser vectors must have length {}, got {} and {}",
                self.n,
                winner.len(),
                loser.len()
            )));
        }
        Ok(())
    }
}

/// Exponentiates log-weights relative to their maximum and normalizes,
/// giving zero mass to excluded entries.
pub(crate) fn normalize_log_weights(logs: &[f64], excluded: &[bool]) -> Vec<f64> {
    let max = logs
        .iter()
        .zip(excluded)
        .filter(|(_, &x)| !x)
        .map(|(&v, _)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = logs
        .iter()
        .zip(excluded)
        .map(|(&v, &x)| if x { 0.0 } else { (v - max).exp() })
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    weights
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> UpdateParams {
        UpdateParams::default()
    }

    #[test]
    fn init_is_uniform() {
        let m = ProbabilityModel::init(9, params()).unwrap();
        assert_eq!(m.sv(), &[1.0; 9]);
        for p in m.first_feature_distribution() {
            assert!((p - 1.0 / 9.0).abs() < 1e-15);
        }
        for i in 0..9 {
            for j in 0..9 {
                assert_eq!(m.im(i, j), m.im(j, i));
            }
        }
        assert!(ProbabilityModel::init(1, params()).is_err());
    }

    #[test]
    fn first_feature_distribution_arithmetic() {
        let m = ProbabilityModel::from_parts(vec![2.0, 1.0, 1.0], vec![1.0; 9], params()).unwrap();
        assert_eq!(m.first_feature_distribution(), vec![0.5, 0.25, 0.25]);
        let scaled = ProbabilityModel::from_parts(vec![20.0, 10.0, 10.0], vec![1.0; 9], params()).unwrap();
        assert_eq!(scaled.first_feature_distribution(), vec![0.5, 0.25, 0.25]);
    }

    #[test]
    fn conditional_hand_example() {
        let mut im = vec![1.0; 9];
        im[1] = 0.5;
        im[3] = 0.5;
        let m = ProbabilityModel::from_parts(vec![1.0; 3], im, params()).unwrap();
        let p = m.conditional_distribution(&[0]).unwrap();
        assert_eq!(p[0], 0.0);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((p[2] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn conditional_uniform_on_all_ones() {
        let m = ProbabilityModel::init(6, params()).unwrap();
        let p = m.conditional_distribution(&[4, 1]).unwrap();
        for (j, &v) in p.iter().enumerate() {
            let expected = if j == 4 || j == 1 { 0.0 } else { 0.25 };
            assert_eq!(v, expected);
        }
        assert!(m.conditional_distribution(&[0, 1, 2, 3, 4, 5]).is_err());
        assert!(m.conditional_distribution(&[]).is_err());
        assert!(m.conditional_distribution(&[1, 1]).is_err());
    }

    #[test]
    fn sv_update_cases() {
        let mut m = ProbabilityModel::init(4, params()).unwrap();
        m.apply_sv_update(&[true, true, false, false], &[false, true, true, false])
            .unwrap();
        assert_eq!(m.sv(), &[1.0 + 0.01, 1.0, 1.0 - 0.01, 1.0]);
        assert_eq!(m.sv()[0], 1.01);

        let mut floor = ProbabilityModel::from_parts(vec![VALUE_FLOOR, 1.0], vec![1.0; 4], params()).unwrap();
        floor.apply_sv_update(&[false, false], &[true, false]).unwrap();
        assert_eq!(floor.sv()[0], VALUE_FLOOR);

        assert!(m.apply_sv_update(&[true], &[false]).is_err());
    }

    #[test]
    fn im_update_examples() {
        let cases = [
            ((true, true), (false, true), 1.02),
            ((false, false), (true, true), 0.99),
            ((false, true), (false, false), 1.0),
        ];
        for ((wi, wj), (li, lj), expected) in cases {
            let mut m = ProbabilityModel::init(2, params()).unwrap();
            m.apply_im_update(&[wi, wj], &[li, lj]).unwrap();
            assert_eq!(m.im(0, 1), expected);
            assert_eq!(m.im(1, 0), expected);
        }
    }

    fn arb_model(max_n: usize) -> impl Strategy<Value = ProbabilityModel> {
        (2..=max_n).prop_flat_map(|n| {
            (
                proptest::collection::vec(-6.0f64..6.0, n),
                proptest::collection::vec(-6.0f64..6.0, n * (n - 1) / 2),
            )
                .prop_map(move |(sv, upper)| {
                    let mut im = vec![1.0; n * n];
                    let mut it = upper.into_iter();
                    for i in 0..n {
                        for j in i + 1..n {
                            let v = 10f64.powf(it.next().unwrap());
                            im[i * n + j] = v;
                            im[j * n + i] = v;
                        }
                    }
                    let sv = sv.into_iter().map(|e| 10f64.powf(e)).collect();
                    ProbabilityModel::from_parts(sv, im, UpdateParams::default()).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn updates_preserve_validity(
            model in arb_model(8),
            bits in proptest::collection::vec(any::<(bool, bool)>(), 8),
        ) {
            let mut m = model;
            let n = m.n();
            let w: Vec<bool> = bits.iter().take(n).map(|b| b.0).collect();
            let l: Vec<bool> = bits.iter().take(n).map(|b| b.1).collect();
            m.apply_sv_update(&w, &l).unwrap();
            m.apply_im_update(&w, &l).unwrap();
            let rebuilt = ProbabilityModel::from_parts(
                m.sv().to_vec(), m.im_matrix().to_vec(), *m.params());
            prop_assert!(rebuilt.is_ok());
        }

        #[test]
        fn conditional_sums_to_one(model in arb_model(12), pick in any::<u64>()) {
            let n = model.n();
            let k = 1 + (pick as usize) % (n - 1);
            let selected: Vec<usize> = (0..n).map(|i| (i + pick as usize) % n).take(k).collect();
            let p = model.conditional_distribution(&selected).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for &s in &selected {
                prop_assert_eq!(p[s], 0.0);
            }
        }
    }
}
