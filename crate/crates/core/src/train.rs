//! Extreme-learning training of fuzzy classifiers and their baselines.
//!
//! Every trainer fixes its nonlinear parameters at random (seeded) and fits
//! the linear output layer by minimum-norm least squares:
//!
//! * [`fit_fit2felm`]: interval type-2 TSK antecedents, SC type reduction
//!   inside the hidden-layer mapping.
//! * [`fit_it2felm_km`]: same pipeline with Karnik-Mendel reduction.
//! * [`fit_t1felm`]: type-1 antecedents (collapsed FOU), normalised firings.
//! * [`fit_elm`]: plain single-hidden-layer ELM with sigmoid units.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{FelmError, Result};
use crate::fuzzy::{random_init_antecedents, AntecedentGrid, FiringInterval, InitConfig};
use crate::reduce::{ReductionInput, Reducer};
use crate::rng;
use crate::tsk::{build_h_row, phi_coefficients, ContourClass, TskModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub rules: usize,
    pub seed: u64,
    pub bias: bool,
    /// Ridge penalty; 0 selects the pseudoinverse.
    pub ridge: f64,
    /// Number of solve passes; passes after the first refine the switch indicators.
    pub passes: usize,
    pub reducer: Reducer,
    pub init: InitConfig,
    /// ELM hidden width; defaults to `rules * inputs`.
    pub hidden: Option<usize>,
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            rules: 6,
            seed: 0,
            bias: false,
            ridge: 0.0,
            passes: 2,
            reducer: Reducer::Sc,
            init: InitConfig::default(),
            hidden: None,
            threshold: ContourClass::DEFAULT_THRESHOLD,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rules == 0 {
            return Err(FelmError::InvalidConfig("rule count must be >= 1".into()));
        }
        if self.passes == 0 {
            return Err(FelmError::InvalidConfig("pass count must be >= 1".into()));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(FelmError::InvalidConfig(format!("ridge must be finite and >= 0, got {}", self.ridge)));
        }
        if self.hidden == Some(0) {
            return Err(FelmError::InvalidConfig("ELM hidden width must be >= 1".into()));
        }
        Ok(())
    }
}

/// Minimum-norm least squares `argmin ||H q - t||` (smallest `||q||` among
/// minimisers) via SVD, or the ridge solution `(H'H + lambda I)^-1 H't`.
pub fn pseudoinverse_solve(h: &DMatrix<f64>, t: &DVector<f64>, ridge: f64) -> Result<DVector<f64>> {
    if h.nrows() != t.len() {
        return Err(FelmError::DimensionMismatch { expected: h.nrows(), got: t.len() });
    }
    if h.iter().chain(t.iter()).any(|v| !v.is_finite()) {
        return Err(FelmError::NonFinite("least-squares system"));
    }
    if ridge > 0.0 {
        let d = h.ncols();
        let gram = h.transpose() * h + DMatrix::<f64>::identity(d, d) * ridge;
        let rhs = h.transpose() * t;
        return gram
            .cholesky()
            .map(|c| c.solve(&rhs))
            .ok_or_else(|| FelmError::InvalidConfig("ridge system is not positive definite".into()));
    }
    // nalgebra's SVD mis-factorises exactly rank-deficient matrices, which is
    // the case that matters here, so the decompositions come from faer
    let (p, d) = h.shape();
    let rtol = f64::EPSILON * p.max(d) as f64;
    if p <= d {
        let dense = faer::Mat::<f64>::from_fn(p, d, |i, j| h[(i, j)]);
        let rhs: Vec<f64> = t.iter().copied().collect();
        return min_norm_svd(dense.as_ref(), &rhs, rtol);
    }
    // tall systems: QR of [H | t] leaves R and Q't in its triangle, so
    // ||Hq - t|| differs from ||Rq - Q't|| by a constant and the SVD runs on R
    let qr = faer::Mat::<f64>::from_fn(p, d + 1, |i, j| if j < d { h[(i, j)] } else { t[i] }).qr();
    let r = qr.thin_R();
    let rhs: Vec<f64> = (0..d).map(|i| r[(i, d)]).collect();
    min_norm_svd(r.subrows(0, d).subcols(0, d), &rhs, rtol)
}

/// `V S+ U' b`, dropping singular values at or below `rtol * sigma_max`.
fn min_norm_svd(a: faer::MatRef<'_, f64>, b: &[f64], rtol: f64) -> Result<DVector<f64>> {
    let (p, d) = (a.nrows(), a.ncols());
    let svd = a.thin_svd().map_err(|e| FelmError::InvalidConfig(format!("SVD did not converge: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let sigma_max = (0..s.nrows()).map(|k| s[k]).fold(0.0, f64::max);
    let cutoff = (rtol * sigma_max).max(f64::MIN_POSITIVE);
    let mut q = DVector::zeros(d);
    for k in 0..s.nrows() {
        if s[k] <= cutoff {
            continue;
        }
        let coef = (0..p).map(|i| u[(i, k)] * b[i]).sum::<f64>() / s[k];
        for j in 0..d {
            q[j] += coef * v[(j, k)];
        }
    }
    Ok(q)
}

/// 2x2 counts with corner as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_positive: usize,
    pub false_positive: usize,
    pub false_negative: usize,
    pub true_negative: usize,
}

impl ConfusionMatrix {
    pub fn record(&mut self, actual: u8, predicted: u8) {
        match (actual, predicted) {
            (1, 1) => self.true_positive += 1,
            (0, 1) => self.false_positive += 1,
            (1, _) => self.false_negative += 1,
            _ => self.true_negative += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_positive + self.false_positive + self.false_negative + self.true_negative
    }

    /// Fraction correct in `[0, 1]`; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => (self.true_positive + self.true_negative) as f64 / n as f64,
        }
    }

    /// `counts[actual][predicted]` with index 0 = wall, 1 = corner.
    pub fn counts(&self) -> [[usize; 2]; 2] {
        [[self.true_negative, self.false_positive], [self.false_negative, self.true_positive]]
    }

    pub fn merge(&mut self, other: &Self) {
        self.true_positive += other.true_positive;
        self.false_positive += other.false_positive;
        self.false_negative += other.false_negative;
        self.true_negative += other.true_negative;
    }
}

pub fn confusion_matrix(predictions: &[u8], labels: &[u8]) -> Result<ConfusionMatrix> {
    if predictions.len() != labels.len() {
        return Err(FelmError::DimensionMismatch { expected: labels.len(), got: predictions.len() });
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &l) in predictions.iter().zip(labels) {
        cm.record(l, p);
    }
    Ok(cm)
}

/// Standard ELM: `y = sum_i beta_i sigmoid(a_i . x + b_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElmModel {
    pub input_weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub output_weights: Vec<f64>,
}

impl ElmModel {
    pub fn inputs(&self) -> usize {
        self.input_weights.first().map_or(0, Vec::len)
    }

    fn hidden(&self, x: &[f64]) -> impl Iterator<Item = f64> + '_ {
        let x = x.to_vec();
        self.input_weights.iter().zip(&self.biases).map(move |(a, b)| {
            let z: f64 = a.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() + b;
            1.0 / (1.0 + (-z).exp())
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.inputs() {
            return Err(FelmError::DimensionMismatch { expected: self.inputs(), got: x.len() });
        }
        Ok(self.hidden(x).zip(&self.output_weights).map(|(h, b)| h * b).sum())
    }
}

/// Any trained classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Tsk(TskModel),
    Elm(ElmModel),
}

impl Model {
    pub fn inputs(&self) -> usize {
        match self {
            Model::Tsk(m) => m.inputs(),
            Model::Elm(m) => m.inputs(),
        }
    }

    /// Raw (unclipped) class score.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        match self {
            Model::Tsk(m) => m.predict(x),
            Model::Elm(m) => m.predict(x),
        }
    }

    pub fn as_tsk(&self) -> Option<&TskModel> {
        match self {
            Model::Tsk(m) => Some(m),
            Model::Elm(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Trainer {
    #[serde(rename = "fit2felm")]
    Fit2Felm,
    #[serde(rename = "it2felm-km")]
    It2FelmKm,
    #[serde(rename = "t1felm")]
    T1Felm,
    #[serde(rename = "elm")]
    Elm,
}

impl Trainer {
    pub const ALL: [Trainer; 4] = [Trainer::Elm, Trainer::T1Felm, Trainer::Fit2Felm, Trainer::It2FelmKm];

    pub fn name(self) -> &'static str {
        match self {
            Trainer::Fit2Felm => "fit2felm",
            Trainer::It2FelmKm => "it2felm-km",
            Trainer::T1Felm => "t1felm",
            Trainer::Elm => "elm",
        }
    }

    pub fn fit(self, data: &Dataset, cfg: &TrainConfig) -> Result<Fitted<Model>> {
        match self {
            Trainer::Fit2Felm => fit_fit2felm(data, cfg).map(Fitted::boxed),
            Trainer::It2FelmKm => fit_it2felm_km(data, cfg).map(Fitted::boxed),
            Trainer::T1Felm => fit_t1felm(data, cfg).map(Fitted::boxed),
            Trainer::Elm => fit_elm(data, cfg).map(|f| Fitted { model: Model::Elm(f.model), report: f.report }),
        }
    }
}

impl fmt::Display for Trainer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Trainer {
    type Err = FelmError;

    fn from_str(s: &str) -> Result<Self> {
        Trainer::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| FelmError::InvalidConfig(format!("unknown trainer `{s}` (expected fit2felm, it2felm-km, t1felm or elm)")))
    }
}

/// Training-set summary of one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Percent correct on the training data.
    pub train_accuracy: f64,
    /// Wall-clock seconds spent fitting the output layer.
    pub train_time_s: f64,
    pub passes: usize,
    /// Sum of squared errors of the returned model on the training data.
    pub residual: f64,
    /// `||H q - t||^2` of the last accepted linear solve.
    pub system_residual: f64,
    pub confusion: ConfusionMatrix,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fitted<M> {
    pub model: M,
    pub report: TrainReport,
}

impl Fitted<TskModel> {
    fn boxed(self) -> Fitted<Model> {
        Fitted { model: Model::Tsk(self.model), report: self.report }
    }
}

fn check_data(data: &Dataset, cfg: &TrainConfig) -> Result<Vec<String>> {
    cfg.validate()?;
    let [walls, corners] = data.class_counts();
    if walls == 0 || corners == 0 {
        return Err(FelmError::InvalidDataset("training data contains a single class".into()));
    }
    Ok(data
        .constant_columns()
        .into_iter()
        .map(|k| format!("feature column {} ({}) is constant", k, data.names()[k]))
        .collect())
}

/// Feature ranges with constant columns widened so antecedents stay non-degenerate.
fn init_ranges(data: &Dataset) -> Vec<(f64, f64)> {
    data.feature_ranges()
        .into_iter()
        .map(|(lo, hi)| if lo < hi { (lo, hi) } else { (lo - 0.5, hi + 0.5) })
        .collect()
}

fn rows_to_matrix(rows: &[Vec<f64>], cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

fn sse_and_confusion(scores: &[f64], data: &Dataset, threshold: f64) -> (f64, ConfusionMatrix) {
    let mut cm = ConfusionMatrix::default();
    let mut sse = 0.0;
    for (&s, &label) in scores.iter().zip(data.labels()) {
        let t = f64::from(label);
        if s.is_finite() {
            sse += (s - t) * (s - t);
            cm.record(label, ContourClass::from_score(s, threshold).label());
        } else {
            sse += t * t;
            cm.record(label, 1 - label);
        }
    }
    (sse, cm)
}

/// Shared interval type-2 pipeline: random antecedents, then alternating
/// solve / indicator refinement with the configured reducer.
fn fit_it2_with(data: &Dataset, cfg: &TrainConfig, grid: AntecedentGrid, reducer: Reducer, mut warnings: Vec<String>) -> Result<Fitted<TskModel>> {
    let p = data.len();
    let width = data.inputs() + usize::from(cfg.bias);
    let d = cfg.rules * width;
    let xs = data.features();
    let targets = DVector::from_vec(data.targets());

    let start = Instant::now();
    let firings: Vec<Vec<FiringInterval>> = xs.iter().map(|x| grid.firings(x)).collect::<Result<_>>()?;
    let silent = firings.iter().filter(|f| f.iter().all(|fi| fi.upper <= 0.0)).count();
    if silent > 0 {
        warnings.push(format!("{silent} training samples fire no rule"));
    }

    let build = |z: &[(Vec<bool>, Vec<bool>)]| -> Result<DMatrix<f64>> {
        let mut rows = Vec::with_capacity(p);
        for ((x, f), (zl, zr)) in xs.iter().zip(&firings).zip(z) {
            match phi_coefficients(f, zl, zr) {
                Ok(phi) => rows.push(build_h_row(x, &phi, cfg.bias)),
                Err(FelmError::NoRuleFires) => rows.push(vec![0.0; d]),
                Err(e) => return Err(e),
            }
        }
        Ok(rows_to_matrix(&rows, d))
    };

    // evaluates a coefficient vector: per-sample scores and switch indicators
    let evaluate = |q: &[f64]| -> Result<(Vec<f64>, Vec<(Vec<bool>, Vec<bool>)>)> {
        let mut scores = Vec::with_capacity(p);
        let mut z = Vec::with_capacity(p);
        for (x, f) in xs.iter().zip(&firings) {
            let w: Vec<f64> = q
                .chunks(width)
                .map(|c| c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + if cfg.bias { c[width - 1] } else { 0.0 })
                .collect();
            match ReductionInput::new(f, &w) {
                Ok(input) => {
                    let set = reducer.reduce(&input)?;
                    scores.push(0.5 * (set.y_left + set.y_right));
                    z.push((set.z_left, set.z_right));
                }
                Err(FelmError::NoRuleFires) => {
                    scores.push(f64::NAN);
                    z.push((vec![true; cfg.rules], vec![true; cfg.rules]));
                }
                Err(e) => return Err(e),
            }
        }
        Ok((scores, z))
    };

    let solve = |h: DMatrix<f64>| -> Result<(Vec<f64>, f64)> {
        let q = pseudoinverse_solve(&h, &targets, cfg.ridge)?;
        let r = (&h * &q - &targets).norm_squared();
        Ok((q.as_slice().to_vec(), r))
    };

    let mut z: Vec<(Vec<bool>, Vec<bool>)> = vec![(vec![true; cfg.rules], vec![true; cfg.rules]); p];
    let (mut q, mut system_residual) = solve(build(&z)?)?;
    let (mut scores, mut z_next) = evaluate(&q)?;
    let mut sse = sse_and_confusion(&scores, data, cfg.threshold).0;
    let mut passes = 1;

    while passes < cfg.passes {
        if z_next == z {
            break;
        }
        z = z_next;
        let (candidate, cand_system) = solve(build(&z)?)?;
        let (cand_scores, cand_z) = evaluate(&candidate)?;
        let cand_sse = sse_and_confusion(&cand_scores, data, cfg.threshold).0;
        if cand_sse > sse {
            // refinement made the fit worse: keep the previous pass
            break;
        }
        q = candidate;
        system_residual = cand_system;
        scores = cand_scores;
        z_next = cand_z;
        sse = cand_sse;
        passes += 1;
    }
    let train_time_s = start.elapsed().as_secs_f64();

    let (residual, confusion) = sse_and_confusion(&scores, data, cfg.threshold);
    let model = TskModel::from_flat(grid, &q, cfg.bias, reducer)?;
    Ok(Fitted {
        model,
        report: TrainReport {
            train_accuracy: 100.0 * confusion.accuracy(),
            train_time_s,
            passes,
            residual,
            system_residual,
            confusion,
            warnings,
        },
    })
}

fn fit_it2(data: &Dataset, cfg: &TrainConfig, reducer: Reducer) -> Result<Fitted<TskModel>> {
    let warnings = check_data(data, cfg)?;
    let grid = random_init_antecedents(cfg.rules, data.inputs(), &init_ranges(data), cfg.seed, &cfg.init)?;
    fit_it2_with(data, cfg, grid, reducer, warnings)
}

/// FIT2-FELM: interval type-2 TSK trained with SC switch indicators.
pub fn fit_fit2felm(data: &Dataset, cfg: &TrainConfig) -> Result<Fitted<TskModel>> {
    fit_it2(data, cfg, Reducer::Sc)
}

/// IT2-FELM with Karnik-Mendel switch points.
pub fn fit_it2felm_km(data: &Dataset, cfg: &TrainConfig) -> Result<Fitted<TskModel>> {
    fit_it2(data, cfg, Reducer::Km)
}

/// Type-1 fuzzy ELM: same antecedent draws with a zero FOU, one solve on
/// normalised firings.
pub fn fit_t1felm(data: &Dataset, cfg: &TrainConfig) -> Result<Fitted<TskModel>> {
    let warnings = check_data(data, cfg)?;
    let grid = random_init_antecedents(cfg.rules, data.inputs(), &init_ranges(data), cfg.seed, &cfg.init.type1())?;
    let single = TrainConfig { passes: 1, ..cfg.clone() };
    fit_it2_with(data, &single, grid, Reducer::Sc, warnings)
}

/// Single-hidden-layer ELM with sigmoid units and uniform(-1, 1) input weights and biases.
pub fn fit_elm(data: &Dataset, cfg: &TrainConfig) -> Result<Fitted<ElmModel>> {
    let warnings = check_data(data, cfg)?;
    let n = data.inputs();
    let hidden = cfg.hidden.unwrap_or(cfg.rules * n);

    let mut rng = rng::stream(cfg.seed, rng::streams::INIT);
    let input_weights: Vec<Vec<f64>> = (0..hidden).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let biases: Vec<f64> = (0..hidden).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let start = Instant::now();
    let mut model = ElmModel { input_weights, biases, output_weights: vec![0.0; hidden] };
    let rows: Vec<Vec<f64>> = data.features().iter().map(|x| model.hidden(x).collect()).collect();
    let h = rows_to_matrix(&rows, hidden);
    let targets = DVector::from_vec(data.targets());
    let beta = pseudoinverse_solve(&h, &targets, cfg.ridge)?;
    let system_residual = (&h * &beta - &targets).norm_squared();
    model.output_weights = beta.as_slice().to_vec();
    let train_time_s = start.elapsed().as_secs_f64();

    let scores: Vec<f64> = data.features().iter().map(|x| model.predict(x)).collect::<Result<_>>()?;
    let (residual, confusion) = sse_and_confusion(&scores, data, cfg.threshold);
    Ok(Fitted {
        model,
        report: TrainReport {
            train_accuracy: 100.0 * confusion.accuracy(),
            train_time_s,
            passes: 1,
            residual,
            system_residual,
            confusion,
            warnings,
        },
    })
}

/// Scores a model on a dataset; samples the model cannot score count as errors.
pub fn evaluate(model: &Model, data: &Dataset, threshold: f64) -> ConfusionMatrix {
    let scores: Vec<f64> = data.features().iter().map(|x| model.score(x).unwrap_or(f64::NAN)).collect();
    sse_and_confusion(&scores, data, threshold).1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub train_time_s: f64,
    pub confusion: ConfusionMatrix,
}

/// Aggregated k-fold results. Accuracies are percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub trainer: Trainer,
    pub folds: usize,
    pub samples: usize,
    pub mean_train_accuracy: f64,
    pub std_train_accuracy: f64,
    pub mean_test_accuracy: f64,
    pub std_test_accuracy: f64,
    pub mean_train_time_s: f64,
    /// Test-set confusion summed over folds; totals the sample count.
    pub confusion: ConfusionMatrix,
    pub per_fold: Vec<FoldReport>,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Content-based ordering of rows, so fold construction does not depend on
/// the order rows appear in the file.
fn canonical_order(data: &Dataset) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.sort_by(|&a, &b| {
        data.labels()[a].cmp(&data.labels()[b]).then_with(|| {
            data.features()[a]
                .iter()
                .zip(&data.features()[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    idx
}

/// Stratified fold index of every sample, seeded.
pub fn stratified_folds(data: &Dataset, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(FelmError::InvalidConfig(format!("folds must be >= 2, got {folds}")));
    }
    if folds > data.len() {
        return Err(FelmError::InvalidConfig(format!("{folds} folds exceed the {} available samples", data.len())));
    }
    let order = canonical_order(data);
    let mut rng = rng::stream(seed, rng::streams::FOLDS);
    let mut assignment = vec![0; data.len()];
    // deal shuffled walls then shuffled corners round-robin, continuing the
    // count across classes so every fold gets a test sample
    let mut pos = 0;
    for class in [0u8, 1] {
        let mut members: Vec<usize> = order.iter().copied().filter(|&i| data.labels()[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = pos % folds;
            pos += 1;
        }
    }
    Ok(assignment)
}

/// Stratified k-fold cross-validation of one trainer.
pub fn cross_validate(data: &Dataset, cfg: &TrainConfig, trainer: Trainer, folds: usize) -> Result<EvalReport> {
    cfg.validate()?;
    let assignment = stratified_folds(data, folds, cfg.seed)?;
    let order = canonical_order(data);

    let mut per_fold = Vec::with_capacity(folds);
    let mut confusion = ConfusionMatrix::default();
    for fold in 0..folds {
        let train_idx: Vec<usize> = order.iter().copied().filter(|&i| assignment[i] != fold).collect();
        let test_idx: Vec<usize> = order.iter().copied().filter(|&i| assignment[i] == fold).collect();
        let train = data.subset(&train_idx)?;
        let fitted = trainer.fit(&train, cfg)?;
        let cm = if test_idx.is_empty() {
            ConfusionMatrix::default()
        } else {
            // single-row test sets cannot form a Dataset; score them directly
            let mut cm = ConfusionMatrix::default();
            for &i in &test_idx {
                let label = data.labels()[i];
                match fitted.model.score(&data.features()[i]) {
                    Ok(s) if s.is_finite() => cm.record(label, ContourClass::from_score(s, cfg.threshold).label()),
                    _ => cm.record(label, 1 - label),
                }
            }
            cm
        };
        confusion.merge(&cm);
        per_fold.push(FoldReport {
            fold,
            train_size: train_idx.len(),
            test_size: test_idx.len(),
            train_accuracy: fitted.report.train_accuracy,
            test_accuracy: 100.0 * cm.accuracy(),
            train_time_s: fitted.report.train_time_s,
            confusion: cm,
        });
    }

    let (mean_train_accuracy, std_train_accuracy) = mean_std(per_fold.iter().map(|f| f.train_accuracy));
    let (mean_test_accuracy, std_test_accuracy) = mean_std(per_fold.iter().map(|f| f.test_accuracy));
    let (mean_train_time_s, _) = mean_std(per_fold.iter().map(|f| f.train_time_s));
    Ok(EvalReport {
        trainer,
        folds,
        samples: data.len(),
        mean_train_accuracy,
        std_train_accuracy,
        mean_test_accuracy,
        std_test_accuracy,
        mean_train_time_s,
        confusion,
        per_fold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_blobs(n: usize, seed: u64) -> Dataset {
        let mut rng = rng::stream(seed, "blobs");
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..n {
            let label = (i % 2) as u8;
            let c = if label == 1 { 1.5 } else { 0.5 };
            xs.push((0..3).map(|_| c + rng.gen_range(-0.3..0.3)).collect());
            ys.push(label);
        }
        Dataset::new(xs, ys, vec!["a".into(), "b".into(), "c".into()]).unwrap()
    }

    #[test]
    fn identity_system_returns_targets() {
        let h = DMatrix::<f64>::identity(3, 3);
        let t = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let q = pseudoinverse_solve(&h, &t, 0.0).unwrap();
        assert_abs_diff_eq!((q - &t).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn overdetermined_mean() {
        let h = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let q = pseudoinverse_solve(&h, &DVector::from_vec(vec![1.0, 3.0]), 0.0).unwrap();
        assert_abs_diff_eq!(q[0], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn rank_deficient_minimum_norm() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let q = pseudoinverse_solve(&h, &DVector::from_vec(vec![2.0, 2.0]), 0.0).unwrap();
        assert_abs_diff_eq!(q[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_one_outer_product() {
        // H = a b', so H+ t = b (a.t) / (|a|^2 |b|^2)
        let a = DVector::from_vec(vec![-2.5, -1.5, -0.5, 0.5, 1.5, 2.5]);
        let b = DVector::from_vec(vec![1.0, 1.3, 1.6, 1.9, 2.2]);
        let h = &a * b.transpose();
        let t = DVector::from_vec(vec![0.3, -1.0, 0.7, 0.2, -0.4, 0.9]);
        let q = pseudoinverse_solve(&h, &t, 0.0).unwrap();
        let expected = &b * (a.dot(&t) / (a.norm_squared() * b.norm_squared()));
        assert!((q - expected).norm() <= 1e-13);
    }

    #[test]
    fn ridge_matches_normal_equations() {
        let h = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let t = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let q = pseudoinverse_solve(&h, &t, 0.5).unwrap();
        // (H'H + 0.5 I) = [[2.5, 1], [1, 2.5]], H't = [4, 5]
        let det = 2.5 * 2.5 - 1.0;
        assert_abs_diff_eq!(q[0], (2.5 * 4.0 - 5.0) / det, epsilon = 1e-12);
        assert_abs_diff_eq!(q[1], (2.5 * 5.0 - 4.0) / det, epsilon = 1e-12);
    }

    #[test]
    fn solve_rejects_non_finite() {
        let h = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(pseudoinverse_solve(&h, &DVector::from_vec(vec![1.0]), 0.0).is_err());
    }

    #[test]
    fn confusion_examples() {
        let cm = confusion_matrix(&[1, 0, 1, 1], &[1, 0, 0, 1]).unwrap();
        assert_eq!((cm.true_positive, cm.true_negative, cm.false_positive, cm.false_negative), (2, 1, 1, 0));
        assert_eq!(cm.accuracy(), 0.75);
        assert_eq!(cm.counts(), [[1, 1], [0, 2]]);
        let perfect = confusion_matrix(&[0, 1, 1], &[0, 1, 1]).unwrap();
        assert_eq!(perfect.false_positive + perfect.false_negative, 0);
        let wrong = confusion_matrix(&[1, 0, 0], &[0, 1, 1]).unwrap();
        assert_eq!(wrong.true_positive + wrong.true_negative, 0);
        assert!(confusion_matrix(&[1], &[1, 0]).is_err());
    }

    #[test]
    fn trainers_are_deterministic_and_separate_blobs() {
        let data = two_blobs(120, 3);
        let cfg = TrainConfig { seed: 11, ..TrainConfig::default() };
        for trainer in Trainer::ALL {
            let a = trainer.fit(&data, &cfg).unwrap();
            let b = trainer.fit(&data, &cfg).unwrap();
            assert_eq!(a.model, b.model, "{trainer}");
            assert!(a.report.train_accuracy >= 95.0, "{trainer}: {}", a.report.train_accuracy);
        }
    }

    #[test]
    fn sc_and_km_trainers_agree() {
        let data = two_blobs(80, 5);
        let cfg = TrainConfig { seed: 2, ..TrainConfig::default() };
        let sc = fit_fit2felm(&data, &cfg).unwrap().model;
        let km = fit_it2felm_km(&data, &cfg).unwrap().model;
        for (a, b) in sc.flat_consequents().iter().zip(km.flat_consequents()) {
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn interpolation_regime_fits_exactly() {
        // P <= D with distinct samples: H has full row rank
        let data = two_blobs(6, 9);
        let cfg = TrainConfig { rules: 4, seed: 1, ..TrainConfig::default() };
        let fitted = fit_fit2felm(&data, &cfg).unwrap();
        assert!(fitted.report.system_residual < 1e-20, "{}", fitted.report.system_residual);
        assert_eq!(fitted.report.train_accuracy, 100.0);
    }

    #[test]
    fn single_rule_is_linear_regression() {
        let data = two_blobs(40, 4);
        let cfg = TrainConfig { rules: 1, seed: 3, ..TrainConfig::default() };
        let h = rows_to_matrix(data.features(), 3);
        let direct = pseudoinverse_solve(&h, &DVector::from_vec(data.targets()), 0.0).unwrap();
        for trainer in [Trainer::Fit2Felm, Trainer::It2FelmKm, Trainer::T1Felm] {
            let m = trainer.fit(&data, &cfg).unwrap().model;
            let q = m.as_tsk().unwrap().flat_consequents();
            for (a, b) in q.iter().zip(direct.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn rejects_single_class_and_bad_config() {
        let d = Dataset::new(vec![vec![1.0], vec![2.0]], vec![0, 0], vec!["a".into()]).unwrap();
        assert!(fit_fit2felm(&d, &TrainConfig::default()).is_err());
        let data = two_blobs(10, 1);
        assert!(fit_fit2felm(&data, &TrainConfig { rules: 0, ..TrainConfig::default() }).is_err());
        assert!(fit_fit2felm(&data, &TrainConfig { passes: 0, ..TrainConfig::default() }).is_err());
        assert!("nope".parse::<Trainer>().is_err());
        assert_eq!("it2felm-km".parse::<Trainer>().unwrap(), Trainer::It2FelmKm);
    }

    #[test]
    fn constant_column_warns() {
        let mut data = two_blobs(20, 2);
        let xs: Vec<Vec<f64>> = data.features().iter().map(|r| vec![r[0], 1.0]).collect();
        data = Dataset::new(xs, data.labels().to_vec(), vec!["a".into(), "k".into()]).unwrap();
        let fitted = fit_fit2felm(&data, &TrainConfig::default()).unwrap();
        assert!(fitted.report.warnings.iter().any(|w| w.contains("constant")));
    }

    #[test]
    fn leave_one_out_bookkeeping() {
        let data = two_blobs(10, 6);
        let cfg = TrainConfig { rules: 2, ..TrainConfig::default() };
        let report = cross_validate(&data, &cfg, Trainer::Fit2Felm, 5).unwrap();
        assert_eq!(report.confusion.total(), 10);
        let loo = cross_validate(&data, &cfg, Trainer::T1Felm, 10).unwrap();
        assert!(loo.per_fold.iter().all(|f| f.test_size == 1));
        assert_eq!(loo.confusion.total(), 10);
        assert!(cross_validate(&data, &cfg, Trainer::Fit2Felm, 1).is_err());
        assert!(cross_validate(&data, &cfg, Trainer::Fit2Felm, 11).is_err());
    }

    #[test]
    fn fold_assignment_ignores_row_order() {
        let data = two_blobs(60, 8);
        let cfg = TrainConfig { seed: 4, ..TrainConfig::default() };
        let mut perm: Vec<usize> = (0..data.len()).collect();
        perm.shuffle(&mut rng::stream(99, "perm"));
        let shuffled = data.subset(&perm).unwrap();
        let a = cross_validate(&data, &cfg, Trainer::Fit2Felm, 5).unwrap();
        let b = cross_validate(&shuffled, &cfg, Trainer::Fit2Felm, 5).unwrap();
        assert_eq!(a.mean_test_accuracy, b.mean_test_accuracy);
        assert_eq!(a.mean_train_accuracy, b.mean_train_accuracy);
    }
}
