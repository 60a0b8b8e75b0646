use super::DaodError;

/// Probabilities are clamped into `[PROB_EPS, 1 - PROB_EPS]` before any log.
pub const PROB_EPS: f64 = 1e-7;

/// Domain label of an image in the domain-classifier losses: source is 0,
/// target is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Source,
    Target,
}

impl Domain {
    pub fn label(self) -> f64 {
        match self {
            Domain::Source => 0.0,
            Domain::Target => 1.0,
        }
    }
}

/// Domain-classifier outputs for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainImage {
    /// Image-level classifier map, one probability per activation.
    pub activations: Vec<f64>,
    /// Instance-level classifier output, one probability per proposal.
    pub instance_probs: Vec<f64>,
    pub domain: Domain,
}

/// A batch of images with clamped classifier probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBatch {
    images: Vec<DomainImage>,
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

impl DomainBatch {
    /// Validates and clamps every probability into `[eps, 1 - eps]`.
    pub fn new(images: Vec<DomainImage>) -> Result<Self, DaodError> {
        let mut images = images;
        for (i, img) in images.iter_mut().enumerate() {
            if img.activations.is_empty() {
                return Err(DaodError::NoActivations(i));
            }
            for p in img.activations.iter_mut().chain(img.instance_probs.iter_mut()) {
                if !(0.0..=1.0).contains(p) {
                    return Err(DaodError::InvalidProbability { image: i, value: *p });
                }
                *p = clamp_prob(*p);
            }
        }
        Ok(Self { images })
    }

    pub fn images(&self) -> &[DomainImage] {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn instance_count(&self) -> usize {
        self.images.iter().map(|i| i.instance_probs.len()).sum()
    }
}

/// Gradient with the same layout as a [`DomainBatch`].
#[derive(Debug, Clone, PartialEq)]
pub struct BatchGrad {
    pub activations: Vec<Vec<f64>>,
    pub instance_probs: Vec<Vec<f64>>,
}

impl BatchGrad {
    fn zeros(batch: &DomainBatch) -> Self {
        Self {
            activations: batch.images.iter().map(|i| vec![0.0; i.activations.len()]).collect(),
            instance_probs: batch.images.iter().map(|i| vec![0.0; i.instance_probs.len()]).collect(),
        }
    }
}

#[inline]
fn bce(label: f64, p: f64) -> f64 {
    -(label * p.ln() + (1.0 - label) * (1.0 - p).ln())
}

#[inline]
fn bce_dp(label: f64, p: f64) -> f64 {
    -(label / p - (1.0 - label) / (1.0 - p))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Image-level domain loss: binary cross-entropy averaged over each image's
/// activations and summed over images.
pub fn image_domain_loss(batch: &DomainBatch) -> f64 {
    batch
        .images
        .iter()
        .map(|img| {
            let d = img.domain.label();
            img.activations.iter().map(|&a| bce(d, a)).sum::<f64>() / img.activations.len() as f64
        })
        .sum()
}

pub fn image_domain_grad(batch: &DomainBatch) -> BatchGrad {
    let mut g = BatchGrad::zeros(batch);
    for (img, ga) in batch.images.iter().zip(&mut g.activations) {
        let d = img.domain.label();
        let k = img.activations.len() as f64;
        for (a, slot) in img.activations.iter().zip(ga) {
            *slot = bce_dp(d, *a) / k;
        }
    }
    g
}

/// Instance-level domain loss: binary cross-entropy summed over all proposals.
pub fn instance_domain_loss(batch: &DomainBatch) -> f64 {
    batch
        .images
        .iter()
        .map(|img| {
            let d = img.domain.label();
            img.instance_probs.iter().map(|&p| bce(d, p)).sum::<f64>()
        })
        .sum()
}

pub fn instance_domain_grad(batch: &DomainBatch) -> BatchGrad {
    let mut g = BatchGrad::zeros(batch);
    for (img, gp) in batch.images.iter().zip(&mut g.instance_probs) {
        let d = img.domain.label();
        for (p, slot) in img.instance_probs.iter().zip(gp) {
            *slot = bce_dp(d, *p);
        }
    }
    g
}

/// Consistency between the image-level map and each instance prediction:
/// `sum_{i,j} |mean_k a_{i,k} - p_{i,j}|`.
pub fn consistency_loss(batch: &DomainBatch) -> f64 {
    batch
        .images
        .iter()
        .map(|img| {
            let m = mean(&img.activations);
            img.instance_probs.iter().map(|&p| (m - p).abs()).sum::<f64>()
        })
        .sum()
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Subgradient of [`consistency_loss`]; ties contribute 0.
pub fn consistency_grad(batch: &DomainBatch) -> BatchGrad {
    let mut g = BatchGrad::zeros(batch);
    for (i, img) in batch.images.iter().enumerate() {
        let m = mean(&img.activations);
        let k = img.activations.len() as f64;
        let mut dm = 0.0;
        for (p, slot) in img.instance_probs.iter().zip(&mut g.instance_probs[i]) {
            let s = sign(p - m);
            *slot = s;
            dm -= s;
        }
        g.activations[i].fill(dm / k);
    }
    g
}

/// Combined objective `l_det + lambda1 * sum(dis) + lambda2 * l_mgrm + l_eagr`.
pub fn total_loss(l_det: f64, dis_losses: &[f64], l_mgrm: f64, l_eagr: f64, lambda1: f64, lambda2: f64) -> f64 {
    l_det + lambda1 * dis_losses.iter().sum::<f64>() + lambda2 * l_mgrm + l_eagr
}
