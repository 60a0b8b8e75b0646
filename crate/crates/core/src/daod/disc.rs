//! Domain discriminator over concatenated features and class logits.
//!
//! The discriminator is logistic-linear: `sigmoid(w . [f, eta] + b)`, read
//! as the probability that a sample is from the source domain. Note the
//! label convention differs from [`super::Domain`]: here source is 1.

use super::{DaodError, PROB_EPS};

#[derive(Debug, Clone, PartialEq)]
pub struct DiscSample {
    pub feature: Vec<f64>,
    /// Class probabilities (post-softmax) for the sample.
    pub logits: Vec<f64>,
}

impl DiscSample {
    pub fn new(feature: Vec<f64>, logits: Vec<f64>) -> Self {
        Self { feature, logits }
    }

    fn dim(&self) -> usize {
        self.feature.len() + self.logits.len()
    }

    fn concat(&self) -> impl Iterator<Item = &f64> {
        self.feature.iter().chain(&self.logits)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscParams {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl DiscParams {
    pub fn zeros(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    fn score(&self, s: &DiscSample) -> f64 {
        self.weights.iter().zip(s.concat()).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn check(src: &[DiscSample], tgt: &[DiscSample], params: &DiscParams) -> Result<(), DaodError> {
    if src.is_empty() {
        return Err(DaodError::Empty("source samples"));
    }
    if tgt.is_empty() {
        return Err(DaodError::Empty("target samples"));
    }
    let dim = params.weights.len();
    if let Some(bad) = src.iter().chain(tgt).find(|s| s.dim() != dim) {
        return Err(DaodError::DimensionMismatch(format!(
            "sample has {} features+logits, discriminator expects {dim}",
            bad.dim()
        )));
    }
    Ok(())
}

/// Summed binary cross-entropy with source labelled 1 and target 0.
pub fn eagr_disc_loss(src: &[DiscSample], tgt: &[DiscSample], params: &DiscParams) -> Result<f64, DaodError> {
    check(src, tgt, params)?;
    let prob = |s: &DiscSample| sigmoid(params.score(s)).clamp(PROB_EPS, 1.0 - PROB_EPS);
    let l_src: f64 = src.iter().map(|s| -prob(s).ln()).sum();
    let l_tgt: f64 = tgt.iter().map(|s| -(1.0 - prob(s)).ln()).sum();
    Ok(l_src + l_tgt)
}

/// Gradients of [`eagr_disc_loss`].
#[derive(Debug, Clone, PartialEq)]
pub struct EagrGrad {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Per source sample, with respect to the concatenated input.
    pub src_inputs: Vec<Vec<f64>>,
    pub tgt_inputs: Vec<Vec<f64>>,
}

pub fn eagr_disc_grad(src: &[DiscSample], tgt: &[DiscSample], params: &DiscParams) -> Result<EagrGrad, DaodError> {
    check(src, tgt, params)?;
    let dim = params.weights.len();
    let mut grad = EagrGrad {
        weights: vec![0.0; dim],
        bias: 0.0,
        src_inputs: Vec::with_capacity(src.len()),
        tgt_inputs: Vec::with_capacity(tgt.len()),
    };
    for (samples, label, inputs) in [(src, 1.0, 0usize), (tgt, 0.0, 1usize)] {
        for s in samples {
            let p = sigmoid(params.score(s));
            // Inside the clamp region the loss is flat.
            let dscore = if (PROB_EPS..=1.0 - PROB_EPS).contains(&p) {
                p - label
            } else {
                0.0
            };
            for (g, x) in grad.weights.iter_mut().zip(s.concat()) {
                *g += dscore * x;
            }
            grad.bias += dscore;
            let gx: Vec<f64> = params.weights.iter().map(|w| dscore * w).collect();
            if inputs == 0 {
                grad.src_inputs.push(gx);
            } else {
                grad.tgt_inputs.push(gx);
            }
        }
    }
    Ok(grad)
}
