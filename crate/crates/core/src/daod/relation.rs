//! Class relation matrices.
//!
//! A local matrix is built from one batch's features: each class prototype
//! is the mean feature of that class, and row `r` is the softmax over `c`
//! of the cosine similarity between prototypes `r` and `c`. Classes absent
//! from the batch have a zero prototype (cosine 0 against everything) and a
//! uniform row. The global matrix is an exponential moving average of local
//! matrices.

use super::DaodError;

/// Row-stochastic `R x R` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationMatrix {
    size: usize,
    entries: Vec<f64>,
}

const ROW_SUM_TOL: f64 = 1e-9;

impl RelationMatrix {
    pub fn new(size: usize, entries: Vec<f64>) -> Result<Self, DaodError> {
        if size == 0 {
            return Err(DaodError::Empty("relation matrix size"));
        }
        if entries.len() != size * size {
            return Err(DaodError::DimensionMismatch(format!(
                "{} entries for a {size}x{size} matrix",
                entries.len()
            )));
        }
        for (row, chunk) in entries.chunks(size).enumerate() {
            let sum: f64 = chunk.iter().sum();
            if chunk.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) || (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(DaodError::NotStochastic { row, sum });
            }
        }
        Ok(Self { size, entries })
    }

    pub fn uniform(size: usize) -> Self {
        Self {
            size,
            entries: vec![1.0 / size as f64; size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.size + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.size..(row + 1) * self.size]
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn softmax_in_place(xs: &mut [f64]) {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in xs.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in xs.iter_mut() {
        *x /= sum;
    }
}

/// Builds a local relation matrix from `(feature, class)` pairs.
pub fn build_relation_matrix(features: &[(Vec<f64>, usize)], num_classes: usize) -> Result<RelationMatrix, DaodError> {
    if features.is_empty() {
        return Err(DaodError::Empty("features"));
    }
    if num_classes == 0 {
        return Err(DaodError::Empty("classes"));
    }
    let dim = features[0].0.len();
    let mut sums = vec![vec![0.0; dim]; num_classes];
    let mut counts = vec![0usize; num_classes];
    for (v, c) in features {
        if v.len() != dim {
            return Err(DaodError::DimensionMismatch(format!(
                "feature of length {} where {dim} expected",
                v.len()
            )));
        }
        if *c >= num_classes {
            return Err(DaodError::ClassOutOfRange {
                index: *c,
                classes: num_classes,
            });
        }
        counts[*c] += 1;
        for (s, x) in sums[*c].iter_mut().zip(v) {
            *s += x;
        }
    }
    let prototypes: Vec<Vec<f64>> = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &n)| {
            if n == 0 {
                s
            } else {
                s.into_iter().map(|x| x / n as f64).collect()
            }
        })
        .collect();
    let mut entries = Vec::with_capacity(num_classes * num_classes);
    for r in 0..num_classes {
        if counts[r] == 0 {
            entries.extend(std::iter::repeat_n(1.0 / num_classes as f64, num_classes));
            continue;
        }
        let mut row: Vec<f64> = (0..num_classes).map(|c| cosine(&prototypes[r], &prototypes[c])).collect();
        softmax_in_place(&mut row);
        entries.extend(row);
    }
    Ok(RelationMatrix {
        size: num_classes,
        entries,
    })
}

/// `momentum * grm + (1 - momentum) * lrm`, rows renormalized.
pub fn update_grm(grm: &RelationMatrix, lrm: &RelationMatrix, momentum: f64) -> Result<RelationMatrix, DaodError> {
    if !(0.0..1.0).contains(&momentum) {
        return Err(DaodError::InvalidMomentum(momentum));
    }
    if grm.size != lrm.size {
        return Err(DaodError::DimensionMismatch(format!(
            "global matrix is {0}x{0}, local is {1}x{1}",
            grm.size, lrm.size
        )));
    }
    let n = grm.size;
    let mut entries: Vec<f64> = grm
        .entries
        .iter()
        .zip(&lrm.entries)
        .map(|(g, l)| momentum * g + (1.0 - momentum) * l)
        .collect();
    for row in entries.chunks_mut(n) {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
    }
    Ok(RelationMatrix { size: n, entries })
}

fn check_present(size: usize, other: usize, present: &[usize]) -> Result<Vec<usize>, DaodError> {
    if size != other {
        return Err(DaodError::DimensionMismatch(format!(
            "matrices are {size}x{size} and {other}x{other}"
        )));
    }
    let mut rows: Vec<usize> = present.to_vec();
    rows.sort_unstable();
    rows.dedup();
    if rows.is_empty() {
        return Err(DaodError::Empty("present classes"));
    }
    if let Some(&bad) = rows.iter().find(|&&r| r >= size) {
        return Err(DaodError::ClassOutOfRange {
            index: bad,
            classes: size,
        });
    }
    Ok(rows)
}

/// L1 discrepancy between local and global rows of the classes present in
/// the batch, divided by the number of such classes.
pub fn mgrm_loss(lrm: &RelationMatrix, grm: &RelationMatrix, present: &[usize]) -> Result<f64, DaodError> {
    let rows = check_present(lrm.size, grm.size, present)?;
    let total: f64 = rows
        .iter()
        .map(|&r| lrm.row(r).iter().zip(grm.row(r)).map(|(a, b)| (a - b).abs()).sum::<f64>())
        .sum();
    Ok(total / rows.len() as f64)
}

/// Subgradient of [`mgrm_loss`] with respect to the local matrix entries
/// (row-major); ties contribute 0.
pub fn mgrm_grad(lrm: &RelationMatrix, grm: &RelationMatrix, present: &[usize]) -> Result<Vec<f64>, DaodError> {
    let rows = check_present(lrm.size, grm.size, present)?;
    let n = lrm.size;
    let scale = 1.0 / rows.len() as f64;
    let mut g = vec![0.0; n * n];
    for &r in &rows {
        for c in 0..n {
            let d = lrm.get(r, c) - grm.get(r, c);
            g[r * n + c] = if d > 0.0 {
                scale
            } else if d < 0.0 {
                -scale
            } else {
                0.0
            };
        }
    }
    Ok(g)
}
