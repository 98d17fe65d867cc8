//! TSK interval type-2 inference: consequents, prediction, the training
//! linearisation (`phi` and H rows) and score smoothing.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{FelmError, Result};
use crate::fuzzy::{AntecedentGrid, FiringInterval};
use crate::reduce::{defuzz, ReductionInput, Reducer, TypeReducedSet};

/// Rule base with linear consequents `w_j = sum_k q_jk x_k (+ q_j0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TskModel {
    antecedents: AntecedentGrid,
    /// Row `j` holds rule `j`'s coefficients; with `bias` the intercept is last.
    consequents: Vec<Vec<f64>>,
    bias: bool,
    reducer: Reducer,
}

impl TskModel {
    pub fn new(antecedents: AntecedentGrid, consequents: Vec<Vec<f64>>, bias: bool, reducer: Reducer) -> Result<Self> {
        let width = antecedents.inputs() + usize::from(bias);
        if consequents.len() != antecedents.rules() {
            return Err(FelmError::DimensionMismatch { expected: antecedents.rules(), got: consequents.len() });
        }
        if let Some(row) = consequents.iter().find(|r| r.len() != width) {
            return Err(FelmError::DimensionMismatch { expected: width, got: row.len() });
        }
        if consequents.iter().flatten().any(|q| !q.is_finite()) {
            return Err(FelmError::NonFinite("consequent coefficients"));
        }
        Ok(Self { antecedents, consequents, bias, reducer })
    }

    /// Builds a model from the flattened (row-major) coefficient vector.
    pub fn from_flat(antecedents: AntecedentGrid, flat: &[f64], bias: bool, reducer: Reducer) -> Result<Self> {
        let width = antecedents.inputs() + usize::from(bias);
        if flat.len() != width * antecedents.rules() {
            return Err(FelmError::DimensionMismatch { expected: width * antecedents.rules(), got: flat.len() });
        }
        let rows = flat.chunks(width).map(<[f64]>::to_vec).collect();
        Self::new(antecedents, rows, bias, reducer)
    }

    pub fn antecedents(&self) -> &AntecedentGrid {
        &self.antecedents
    }

    pub fn consequents(&self) -> &[Vec<f64>] {
        &self.consequents
    }

    pub fn flat_consequents(&self) -> Vec<f64> {
        self.consequents.iter().flatten().copied().collect()
    }

    pub fn bias(&self) -> bool {
        self.bias
    }

    pub fn reducer(&self) -> Reducer {
        self.reducer
    }

    pub fn with_reducer(mut self, reducer: Reducer) -> Self {
        self.reducer = reducer;
        self
    }

    pub fn rules(&self) -> usize {
        self.antecedents.rules()
    }

    pub fn inputs(&self) -> usize {
        self.antecedents.inputs()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.inputs() {
            return Err(FelmError::DimensionMismatch { expected: self.inputs(), got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(FelmError::NonFinite("model input"));
        }
        Ok(())
    }

    pub fn consequent_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.consequent_values_unchecked(x))
    }

    fn consequent_values_unchecked(&self, x: &[f64]) -> Vec<f64> {
        self.consequents
            .iter()
            .map(|q| {
                let linear: f64 = q.iter().zip(x).map(|(a, b)| a * b).sum();
                if self.bias {
                    linear + q[x.len()]
                } else {
                    linear
                }
            })
            .collect()
    }

    /// Firings, consequent values and the reduced set for `x`.
    pub fn infer(&self, x: &[f64]) -> Result<Inference> {
        self.check_input(x)?;
        let firings = self.antecedents.firings(x)?;
        let values = self.consequent_values_unchecked(x);
        let reduced = self.reducer.reduce(&ReductionInput::new(&firings, &values)?)?;
        Ok(Inference { firings, values, reduced })
    }

    /// Crisp output `(y_l + y_r) / 2`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.infer(x).map(|inf| defuzz(&inf.reduced))
    }

    pub fn classify(&self, x: &[f64], threshold: f64) -> Result<(ContourClass, f64)> {
        let score = self.predict(x)?;
        Ok((ContourClass::from_score(score, threshold), score))
    }
}

/// Intermediate quantities of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub firings: Vec<FiringInterval>,
    pub values: Vec<f64>,
    pub reduced: TypeReducedSet,
}

/// Free-function form of [`TskModel::consequent_values`].
pub fn consequent_values(model: &TskModel, x: &[f64]) -> Result<Vec<f64>> {
    model.consequent_values(x)
}

pub fn predict(model: &TskModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

/// Type-1 TSK output `sum f w / sum f` using the upper firings only. Reference
/// for models whose FOU has been collapsed.
pub fn type1_output(model: &TskModel, x: &[f64]) -> Result<f64> {
    let firings = model.antecedents.firings(x)?;
    let values = model.consequent_values(x)?;
    let den: f64 = firings.iter().map(|f| f.upper).sum();
    if den <= 0.0 {
        return Err(FelmError::NoRuleFires);
    }
    Ok(firings.iter().zip(&values).map(|(f, w)| f.upper * w).sum::<f64>() / den)
}

/// Per-rule weights that turn the two endpoint formulas into one linear map:
/// `y = 1/2 sum_j phi_j w_j`. Sums to 2.
pub fn phi_coefficients(firings: &[FiringInterval], z_left: &[bool], z_right: &[bool]) -> Result<Vec<f64>> {
    let m = firings.len();
    for z in [z_left, z_right] {
        if z.len() != m {
            return Err(FelmError::DimensionMismatch { expected: m, got: z.len() });
        }
    }
    let weight = |f: &FiringInterval, z: bool| if z { f.upper } else { f.lower };
    let den_left: f64 = firings.iter().zip(z_left).map(|(f, &z)| weight(f, z)).sum();
    let den_right: f64 = firings.iter().zip(z_right).map(|(f, &z)| weight(f, z)).sum();
    if den_left <= 0.0 || den_right <= 0.0 {
        return Err(FelmError::NoRuleFires);
    }
    Ok(firings
        .iter()
        .zip(z_left.iter().zip(z_right))
        .map(|(f, (&zl, &zr))| weight(f, zl) / den_left + weight(f, zr) / den_right)
        .collect())
}

/// `h = 1/2 [phi_1 x, ..., phi_M x]`, each block extended by `phi_j` when the
/// consequents carry an intercept.
pub fn build_h_row(x: &[f64], phi: &[f64], bias: bool) -> Vec<f64> {
    let block = x.len() + usize::from(bias);
    let mut row = Vec::with_capacity(block * phi.len());
    for &p in phi {
        let half = 0.5 * p;
        row.extend(x.iter().map(|&xk| half * xk));
        if bias {
            row.push(half);
        }
    }
    row
}

/// Checked form of [`build_h_row`] against a model's dimensions.
pub fn build_h_row_for(model: &TskModel, x: &[f64], phi: &[f64]) -> Result<Vec<f64>> {
    if x.len() != model.inputs() {
        return Err(FelmError::DimensionMismatch { expected: model.inputs(), got: x.len() });
    }
    if phi.len() != model.rules() {
        return Err(FelmError::DimensionMismatch { expected: model.rules(), got: phi.len() });
    }
    Ok(build_h_row(x, phi, model.bias))
}

/// Binary sonar contour label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContourClass {
    Wall = 0,
    Corner = 1,
}

impl ContourClass {
    pub const DEFAULT_THRESHOLD: f64 = 0.5;

    /// Corner iff `score >= threshold`.
    pub fn from_score(score: f64, threshold: f64) -> Self {
        if score >= threshold {
            ContourClass::Corner
        } else {
            ContourClass::Wall
        }
    }

    pub fn label(self) -> u8 {
        self as u8
    }

    pub fn from_label(label: u8) -> Option<Self> {
        match label {
            0 => Some(ContourClass::Wall),
            1 => Some(ContourClass::Corner),
            _ => None,
        }
    }
}

/// Moving average over the last `len` raw class scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassScoreWindow {
    scores: VecDeque<f64>,
    len: usize,
}

impl Default for ClassScoreWindow {
    fn default() -> Self {
        Self::new(4)
    }
}

impl ClassScoreWindow {
    pub fn new(len: usize) -> Self {
        let len = len.max(1);
        Self { scores: VecDeque::with_capacity(len), len }
    }

    pub fn capacity(&self) -> usize {
        self.len
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Pushes `score` and returns the mean of what the window now holds.
    /// Non-finite scores are ignored.
    pub fn push(&mut self, score: f64) -> f64 {
        if score.is_finite() {
            if self.scores.len() == self.len {
                self.scores.pop_front();
            }
            self.scores.push_back(score);
        }
        self.mean()
    }

    pub fn mean(&self) -> f64 {
        if self.scores.is_empty() {
            0.0
        } else {
            self.scores.iter().sum::<f64>() / self.scores.len() as f64
        }
    }

    pub fn clear(&mut self) {
        self.scores.clear();
    }
}

pub fn smooth_score(window: &mut ClassScoreWindow, new_score: f64) -> f64 {
    window.push(new_score)
}
