//! Single-hidden-layer extreme learning machine.

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};

/// Cubic approximation `0.5 + 0.197x - 0.004x³` of the logistic sigmoid on [-5, 5].
pub const POLY_C0: f64 = 0.5;
pub const POLY_C1: f64 = 0.197;
pub const POLY_C3: f64 = -0.004;
/// Interval on which the cubic tracks the sigmoid.
pub const POLY_RANGE: f64 = 5.0;

pub fn exact_sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn poly_sigmoid(x: f64) -> f64 {
    POLY_C0 + POLY_C1 * x + POLY_C3 * x * x * x
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    Sigmoid,
    PolySigmoid,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => exact_sigmoid(x),
            Activation::PolySigmoid => poly_sigmoid(x),
        }
    }
}

/// How output scores become labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OutputMode {
    /// Label 1 when the raw score exceeds 0.5.
    Linear,
    /// Label 1 when the sigmoid of the score exceeds 0.5, i.e. the score is positive.
    Sigmoid,
}

impl OutputMode {
    pub fn name(self) -> &'static str {
        match self {
            OutputMode::Linear => "linear",
            OutputMode::Sigmoid => "sigmoid",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(OutputMode::Linear),
            "sigmoid" | "extra_sigmoid" => Ok(OutputMode::Sigmoid),
            other => Err(CoreError::Invalid(format!("unknown output mode '{other}'"))),
        }
    }
}

/// `H[i][j] = g(w_j · x_i + b_j)`, shape `samples × hidden`.
pub fn hidden_matrix(x: &DMatrix<f64>, w: &DMatrix<f64>, b: &DVector<f64>, g: Activation) -> Result<DMatrix<f64>> {
    if x.ncols() != w.ncols() {
        return Err(CoreError::Shape(format!("inputs have {} features, weights expect {}", x.ncols(), w.ncols())));
    }
    if b.len() != w.nrows() {
        return Err(CoreError::Shape(format!("{} biases for {} hidden nodes", b.len(), w.nrows())));
    }
    let mut h = x * w.transpose();
    for mut row in h.row_iter_mut() {
        for (v, &bj) in row.iter_mut().zip(b.iter()) {
            *v = g.apply(*v + bj);
        }
    }
    Ok(h)
}

/// Moore-Penrose inverse by SVD, dropping singular values below `ε·max(rows, cols)·σ_max`.
pub fn moore_penrose(h: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = h.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let svd = h.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let s = &svd.singular_values;
    let s_max = s.iter().cloned().fold(0.0, f64::max);
    let cutoff = f64::EPSILON * r.max(c) as f64 * s_max;
    let inv = DVector::from_iterator(s.len(), s.iter().map(|&x| if x > cutoff && x > 0.0 { 1.0 / x } else { 0.0 }));
    v_t.transpose() * DMatrix::from_diagonal(&inv) * u.transpose()
}

/// Least-squares output weights `β = H⁺ T`.
pub fn solve_output_weights(h: &DMatrix<f64>, t: &DVector<f64>) -> Result<DVector<f64>> {
    if h.nrows() != t.len() {
        return Err(CoreError::Shape(format!("{} rows for {} targets", h.nrows(), t.len())));
    }
    Ok(moore_penrose(h) * t)
}

#[derive(Clone, Debug)]
pub struct ElmModel {
    pub weights: DMatrix<f64>,
    pub biases: DVector<f64>,
    pub activation: Activation,
    pub beta: Option<DVector<f64>>,
}

impl ElmModel {
    pub fn new(weights: DMatrix<f64>, biases: DVector<f64>, activation: Activation) -> Result<Self> {
        if biases.len() != weights.nrows() || weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(CoreError::Shape(format!(
                "weights {}x{} with {} biases",
                weights.nrows(),
                weights.ncols(),
                biases.len()
            )));
        }
        Ok(Self { weights, biases, activation, beta: None })
    }

    pub fn hidden_nodes(&self) -> usize {
        self.weights.nrows()
    }

    pub fn hidden(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        hidden_matrix(x, &self.weights, &self.biases, self.activation)
    }

    pub fn fit(&mut self, x: &DMatrix<f64>, t: &DVector<f64>) -> Result<&DVector<f64>> {
        let h = self.hidden(x)?;
        self.beta = Some(solve_output_weights(&h, t)?);
        Ok(self.beta.as_ref().unwrap())
    }

    pub fn predict_scores(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        let beta = self.beta.as_ref().ok_or(CoreError::NotFit)?;
        Ok(self.hidden(x)? * beta)
    }
}

pub fn classify(scores: &[f64], mode: OutputMode) -> Vec<u8> {
    scores
        .iter()
        .map(|&s| match mode {
            OutputMode::Linear => (s > 0.5) as u8,
            OutputMode::Sigmoid => (s > 0.0) as u8,
        })
        .collect()
}

pub fn accuracy(predicted: &[u8], truth: &[u8]) -> Result<f64> {
    if predicted.len() != truth.len() || truth.is_empty() {
        return Err(CoreError::Shape(format!("{} predictions for {} labels", predicted.len(), truth.len())));
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

pub fn labels_to_targets(labels: &[u8]) -> DVector<f64> {
    DVector::from_iterator(labels.len(), labels.iter().map(|&l| l as f64))
}
