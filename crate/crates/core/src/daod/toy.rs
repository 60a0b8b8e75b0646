//! Adversarial domain alignment on 2-D point clouds.
//!
//! A linear feature map feeds a softmax class head (trained on labelled
//! source points) and a logistic domain discriminator. Updates alternate:
//! the feature map and head descend `L_det - lambda1 * L_dis`, then the
//! discriminator descends `L_dis`. Gradients are full-batch.
//!
//! `L_det` is the mean class cross-entropy over source points. For `L_dis`
//! each domain's points are split into a fixed number of consecutive
//! "images", every point contributing one activation, and the loss is
//! [`image_domain_loss`](super::image_domain_loss) over that batch.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::disc::sigmoid;
use super::losses::{image_domain_grad, image_domain_loss, Domain, DomainBatch, DomainImage};
use super::{total_loss, DaodError};

pub type Point = [f64; 2];

/// Labelled source points and unlabelled target points, each with a
/// held-out copy used only for reporting accuracies.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyDomains {
    pub source: Vec<(Point, usize)>,
    pub target: Vec<Point>,
    pub held_source: Vec<(Point, usize)>,
    pub held_target: Vec<Point>,
}

impl ToyDomains {
    pub fn new(
        source: Vec<(Point, usize)>,
        target: Vec<Point>,
        held_source: Vec<(Point, usize)>,
        held_target: Vec<Point>,
    ) -> Result<Self, DaodError> {
        if source.is_empty() || held_source.is_empty() {
            return Err(DaodError::Empty("source points"));
        }
        if target.is_empty() || held_target.is_empty() {
            return Err(DaodError::Empty("target points"));
        }
        let labelled = source.iter().chain(&held_source).map(|s| &s.0);
        if labelled.chain(&target).chain(&held_target).flatten().any(|v| !v.is_finite()) {
            return Err(DaodError::InvalidConfig("non-finite point".into()));
        }
        let classes: std::collections::BTreeSet<usize> = source.iter().map(|s| s.1).collect();
        if classes.len() < 2 {
            return Err(DaodError::InvalidConfig("source needs at least two classes".into()));
        }
        Ok(Self {
            source,
            target,
            held_source,
            held_target,
        })
    }

    /// Two isotropic Gaussian classes centred at `(-1, 0)` and `(1, 0)`;
    /// the target is the same mixture translated by `shift`. Classes
    /// alternate point by point.
    pub fn shifted_gaussians(seed: u64, points_per_class: usize, std: f64, shift: Point) -> Result<Self, DaodError> {
        if points_per_class == 0 {
            return Err(DaodError::Empty("points per class"));
        }
        let noise = Normal::new(0.0, std).map_err(|e| DaodError::InvalidConfig(format!("std {std}: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |offset: Point| -> Vec<(Point, usize)> {
            (0..2 * points_per_class)
                .map(|i| {
                    let class = i % 2;
                    let cx = if class == 0 { -1.0 } else { 1.0 };
                    let x = cx + offset[0] + noise.sample(&mut rng);
                    let y = offset[1] + noise.sample(&mut rng);
                    ([x, y], class)
                })
                .collect()
        };
        let source = draw([0.0, 0.0]);
        let target = draw(shift).into_iter().map(|(p, _)| p).collect();
        let held_source = draw([0.0, 0.0]);
        let held_target = draw(shift).into_iter().map(|(p, _)| p).collect();
        Self::new(source, target, held_source, held_target)
    }

    pub fn num_classes(&self) -> usize {
        self.source.iter().chain(&self.held_source).map(|s| s.1).max().map_or(0, |m| m + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyConfig {
    pub steps: usize,
    pub lr: f64,
    pub lambda1: f64,
    /// Number of images each domain's training points are split into.
    pub images_per_domain: usize,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            steps: 2000,
            lr: 0.05,
            lambda1: super::DEFAULT_LAMBDA1,
            images_per_domain: 10,
        }
    }
}

impl ToyConfig {
    fn validate(&self) -> Result<(), DaodError> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(DaodError::InvalidConfig(format!("lr must be positive, got {}", self.lr)));
        }
        if !(self.lambda1 >= 0.0 && self.lambda1.is_finite()) {
            return Err(DaodError::InvalidConfig(format!("lambda1 must be >= 0, got {}", self.lambda1)));
        }
        if self.images_per_domain == 0 {
            return Err(DaodError::InvalidConfig("images_per_domain must be >= 1".into()));
        }
        Ok(())
    }
}

/// One row of the training history. Losses are measured on the training
/// points before the step's updates, accuracies on the held-out points
/// after them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyRecord {
    pub step: usize,
    pub l_det: f64,
    pub l_dis: f64,
    /// `l_det + lambda1 * l_dis`.
    pub l_total: f64,
    pub disc_acc: f64,
    pub class_acc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyAdaptState {
    /// Feature map `f = W x + b`, row-major.
    pub feature_w: [[f64; 2]; 2],
    pub feature_b: [f64; 2],
    /// Class head, one row per class.
    pub head_w: Vec<[f64; 2]>,
    pub head_b: Vec<f64>,
    /// Discriminator: `P(target | f) = sigmoid(u . f + d)`.
    pub disc_w: [f64; 2],
    pub disc_b: f64,
    pub step: usize,
    pub history: Vec<ToyRecord>,
}

impl ToyAdaptState {
    fn init(classes: usize) -> Self {
        Self {
            feature_w: [[1.0, 0.0], [0.0, 1.0]],
            feature_b: [0.0; 2],
            head_w: vec![[0.0; 2]; classes],
            head_b: vec![0.0; classes],
            disc_w: [0.0; 2],
            disc_b: 0.0,
            step: 0,
            history: Vec::new(),
        }
    }

    pub fn feature(&self, p: &Point) -> Point {
        let w = &self.feature_w;
        [
            w[0][0] * p[0] + w[0][1] * p[1] + self.feature_b[0],
            w[1][0] * p[0] + w[1][1] * p[1] + self.feature_b[1],
        ]
    }

    fn class_probs(&self, f: &Point) -> Vec<f64> {
        let mut z: Vec<f64> = self
            .head_w
            .iter()
            .zip(&self.head_b)
            .map(|(w, b)| w[0] * f[0] + w[1] * f[1] + b)
            .collect();
        let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in z.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        z.iter_mut().for_each(|v| *v /= sum);
        z
    }

    /// Probability that the point is from the target domain.
    pub fn target_prob(&self, p: &Point) -> f64 {
        let f = self.feature(p);
        sigmoid(self.disc_w[0] * f[0] + self.disc_w[1] * f[1] + self.disc_b)
    }

    /// Held-out class accuracy (argmax, lowest index on ties).
    pub fn class_accuracy(&self, points: &[(Point, usize)]) -> f64 {
        let hits = points
            .iter()
            .filter(|(p, c)| {
                let probs = self.class_probs(&self.feature(p));
                let best = probs
                    .iter()
                    .enumerate()
                    .fold(0, |best, (i, &v)| if v > probs[best] { i } else { best });
                best == *c
            })
            .count();
        hits as f64 / points.len() as f64
    }

    /// Fraction of points the discriminator assigns to the right domain,
    /// thresholding at 0.5 (ties go to target).
    pub fn disc_accuracy(&self, source: &[Point], target: &[Point]) -> f64 {
        let s = source.iter().filter(|p| self.target_prob(p) < 0.5).count();
        let t = target.iter().filter(|p| self.target_prob(p) >= 0.5).count();
        (s + t) as f64 / (source.len() + target.len()) as f64
    }
}

fn chunk_bounds(n: usize, parts: usize) -> Vec<(usize, usize)> {
    let parts = parts.min(n);
    (0..parts).map(|k| (k * n / parts, (k + 1) * n / parts)).collect()
}

/// Builds the discriminator batch; returns it with the per-point feature
/// vectors in batch order (source images first).
fn domain_batch(
    state: &ToyAdaptState,
    source: &[Point],
    target: &[Point],
    parts: usize,
) -> Result<(DomainBatch, Vec<Point>), DaodError> {
    let mut images = Vec::new();
    let mut feats = Vec::with_capacity(source.len() + target.len());
    for (points, domain) in [(source, Domain::Source), (target, Domain::Target)] {
        for (lo, hi) in chunk_bounds(points.len(), parts) {
            let chunk = &points[lo..hi];
            feats.extend(chunk.iter().map(|p| state.feature(p)));
            images.push(DomainImage {
                activations: chunk.iter().map(|p| state.target_prob(p)).collect(),
                instance_probs: Vec::new(),
                domain,
            });
        }
    }
    Ok((DomainBatch::new(images)?, feats))
}

/// Runs the alternating min-max updates. Deterministic for fixed inputs.
pub fn toy_adapt(domains: &ToyDomains, cfg: &ToyConfig) -> Result<ToyAdaptState, DaodError> {
    cfg.validate()?;
    let classes = domains.num_classes();
    let mut st = ToyAdaptState::init(classes);
    let src_points: Vec<Point> = domains.source.iter().map(|s| s.0).collect();
    let held_src: Vec<Point> = domains.held_source.iter().map(|s| s.0).collect();
    let n_src = domains.source.len() as f64;
    let lr = cfg.lr;

    for step in 0..cfg.steps {
        // Feature map and class head: descend l_det - lambda1 * l_dis.
        let mut l_det = 0.0;
        let mut g_fw = [[0.0; 2]; 2];
        let mut g_fb = [0.0; 2];
        let mut g_hw = vec![[0.0; 2]; classes];
        let mut g_hb = vec![0.0; classes];
        for (x, c) in &domains.source {
            let f = st.feature(x);
            let probs = st.class_probs(&f);
            l_det -= probs[*c].max(f64::MIN_POSITIVE).ln() / n_src;
            let mut g_f = [0.0; 2];
            for (k, p) in probs.iter().enumerate() {
                let dz = (p - if k == *c { 1.0 } else { 0.0 }) / n_src;
                g_hw[k][0] += dz * f[0];
                g_hw[k][1] += dz * f[1];
                g_hb[k] += dz;
                g_f[0] += dz * st.head_w[k][0];
                g_f[1] += dz * st.head_w[k][1];
            }
            accumulate(&mut g_fw, &mut g_fb, &g_f, x);
        }

        let nonfinite = |_| DaodError::NonFinite { step };
        let (batch, _) = domain_batch(&st, &src_points, &domains.target, cfg.images_per_domain).map_err(nonfinite)?;
        let l_dis = image_domain_loss(&batch);
        if !l_det.is_finite() || !l_dis.is_finite() {
            return Err(DaodError::NonFinite { step });
        }
        let dscores = score_grads(&batch);
        let points = src_points.iter().chain(&domains.target);
        for (x, ds) in points.zip(&dscores) {
            let g_f = [-cfg.lambda1 * ds * st.disc_w[0], -cfg.lambda1 * ds * st.disc_w[1]];
            accumulate(&mut g_fw, &mut g_fb, &g_f, x);
        }
        for r in 0..2 {
            for c in 0..2 {
                st.feature_w[r][c] -= lr * g_fw[r][c];
            }
            st.feature_b[r] -= lr * g_fb[r];
        }
        for k in 0..classes {
            st.head_w[k][0] -= lr * g_hw[k][0];
            st.head_w[k][1] -= lr * g_hw[k][1];
            st.head_b[k] -= lr * g_hb[k];
        }

        // Discriminator: descend l_dis on the updated features.
        let (batch, feats) =
            domain_batch(&st, &src_points, &domains.target, cfg.images_per_domain).map_err(nonfinite)?;
        let dscores = score_grads(&batch);
        let mut g_u = [0.0; 2];
        let mut g_d = 0.0;
        for (f, ds) in feats.iter().zip(&dscores) {
            g_u[0] += ds * f[0];
            g_u[1] += ds * f[1];
            g_d += ds;
        }
        st.disc_w[0] -= lr * g_u[0];
        st.disc_w[1] -= lr * g_u[1];
        st.disc_b -= lr * g_d;

        if !params_finite(&st) {
            return Err(DaodError::NonFinite { step });
        }
        st.step = step + 1;
        st.history.push(ToyRecord {
            step: step + 1,
            l_det,
            l_dis,
            l_total: total_loss(l_det, &[l_dis], 0.0, 0.0, cfg.lambda1, 0.0),
            disc_acc: st.disc_accuracy(&held_src, &domains.held_target),
            class_acc: st.class_accuracy(&domains.held_source),
        });
    }
    Ok(st)
}

fn accumulate(g_w: &mut [[f64; 2]; 2], g_b: &mut [f64; 2], g_f: &[f64; 2], x: &Point) {
    for r in 0..2 {
        g_w[r][0] += g_f[r] * x[0];
        g_w[r][1] += g_f[r] * x[1];
        g_b[r] += g_f[r];
    }
}

/// Chains the image-level loss gradient through the sigmoid, one value per
/// point in batch order.
fn score_grads(batch: &DomainBatch) -> Vec<f64> {
    let g = image_domain_grad(batch);
    batch
        .images()
        .iter()
        .zip(&g.activations)
        .flat_map(|(img, ga)| img.activations.iter().zip(ga).map(|(p, gp)| gp * p * (1.0 - p)))
        .collect()
}

fn params_finite(st: &ToyAdaptState) -> bool {
    st.feature_w.iter().flatten().chain(&st.feature_b).chain(st.head_w.iter().flatten()).chain(&st.head_b).chain(&st.disc_w).all(|v| v.is_finite())
        && st.disc_b.is_finite()
}
