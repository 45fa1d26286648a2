//! Labelled sample matrices, synthetic generators and CSV IO.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, mismatch, Result};
use crate::exponent::Exponent;
use crate::linalg::{p_norm, DenseMatrix};
use crate::network::Label;

/// Labels of a dataset: `±1` for binary tasks or class indices `0..classes`.
#[derive(Clone, Debug, PartialEq)]
pub enum Labels {
    Signed(Vec<f64>),
    Class { labels: Vec<usize>, classes: usize },
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Signed(v) => v.len(),
            Labels::Class { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> Label {
        match self {
            Labels::Signed(v) => Label::Signed(v[i]),
            Labels::Class { labels, .. } => Label::Class(labels[i]),
        }
    }

    /// Width of the network head these labels train: 1 or `classes`.
    pub fn head_dim(&self) -> usize {
        match self {
            Labels::Signed(_) => 1,
            Labels::Class { classes, .. } => *classes,
        }
    }
}

/// Samples (one per row) with labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    x: DenseMatrix<f64>,
    labels: Labels,
}

impl Dataset {
    pub fn new(x: DenseMatrix<f64>, labels: Labels) -> Result<Self> {
        if x.rows() != labels.len() {
            return Err(mismatch(format!("{} samples but {} labels", x.rows(), labels.len())));
        }
        match &labels {
            Labels::Signed(v) => {
                if let Some(bad) = v.iter().find(|&&y| y != 1.0 && y != -1.0) {
                    return Err(invalid(format!("binary labels must be ±1, got {bad}")));
                }
            }
            Labels::Class { labels, classes } => {
                if *classes < 2 {
                    return Err(invalid("multi-class labels need at least two classes"));
                }
                if let Some(bad) = labels.iter().find(|&&y| y >= *classes) {
                    return Err(invalid(format!("class {bad} out of range for {classes} classes")));
                }
            }
        }
        Ok(Self { x, labels })
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn x(&self) -> &DenseMatrix<f64> {
        &self.x
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        self.x.row(i)
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels.get(i)
    }

    pub fn is_binary(&self) -> bool {
        matches!(self.labels, Labels::Signed(_))
    }

    /// `‖X‖_{p,∞}`, the largest sample p-norm (the constant B).
    pub fn group_norm(&self, p: Exponent) -> f64 {
        self.x.row_iter().map(|r| p_norm(r, p)).fold(0.0, f64::max)
    }

    /// Subset of the rows listed in `idx`.
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = idx.iter().map(|&i| self.x.row(i).to_vec()).collect();
        let labels = match &self.labels {
            Labels::Signed(v) => Labels::Signed(idx.iter().map(|&i| v[i]).collect()),
            Labels::Class { labels, classes } => Labels::Class {
                labels: idx.iter().map(|&i| labels[i]).collect(),
                classes: *classes,
            },
        };
        Self::new(DenseMatrix::from_rows(&rows)?, labels)
    }

    /// CSV with header `f0,…,f{d−1},label`; values in 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (0..self.dim()).map(|j| format!("f{j}")).collect();
        header.push("label".into());
        wr.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.sample(i).iter().map(|v| format!("{v:.16e}")).collect();
            rec.push(match self.label(i) {
                Label::Signed(y) => format!("{}", y as i64),
                Label::Class(k) => k.to_string(),
            });
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads the CSV format of [`Dataset::write_csv`]. Labels that are all
    /// in {−1, +1} are read as binary; otherwise as classes `0..=max`.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        let d = header.len().checked_sub(1).filter(|&d| d > 0).ok_or_else(|| {
            invalid("dataset CSV needs at least one feature column and a label column")
        })?;
        for (j, name) in header.iter().take(d).enumerate() {
            if name != format!("f{j}") {
                return Err(invalid(format!("expected column f{j}, found {name:?}")));
            }
        }
        if &header[d] != "label" {
            return Err(invalid(format!("expected last column \"label\", found {:?}", &header[d])));
        }
        let mut rows = Vec::new();
        let mut raw = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .take(d)
                .map(|s| s.trim().parse::<f64>().map_err(|e| invalid(format!("bad value {s:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let y: i64 = rec[d].trim().parse().map_err(|e| invalid(format!("bad label {:?}: {e}", &rec[d])))?;
            rows.push(row);
            raw.push(y);
        }
        if rows.is_empty() {
            return Err(invalid("dataset has no samples"));
        }
        let labels = if raw.iter().all(|&y| y == 1 || y == -1) {
            Labels::Signed(raw.iter().map(|&y| y as f64).collect())
        } else {
            if let Some(bad) = raw.iter().find(|&&y| y < 0) {
                return Err(invalid(format!("negative class label {bad}")));
            }
            let classes = (*raw.iter().max().expect("non-empty") as usize + 1).max(2);
            Labels::Class { labels: raw.iter().map(|&y| y as usize).collect(), classes }
        };
        Self::new(DenseMatrix::from_rows(&rows)?, labels)
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// Gaussian-blob generator settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobSpec {
    pub n: usize,
    pub dim: usize,
    pub classes: usize,
    /// Distance of each class mean from the origin.
    pub separation: f64,
    /// Per-coordinate standard deviation around each mean.
    pub noise: f64,
    /// Target `‖X‖_{p,∞}`.
    pub radius: f64,
    pub p: Exponent,
}

/// Random class means: `±u` for two classes, otherwise independent random
/// unit directions, all scaled by `separation`.
pub fn blob_means<R: Rng + ?Sized>(spec: &BlobSpec, rng: &mut R) -> Vec<Vec<f64>> {
    let mut unit = || {
        let g: Vec<f64> = (0..spec.dim).map(|_| StandardNormal.sample(&mut *rng)).collect();
        let n = p_norm(&g, Exponent::TWO).max(f64::MIN_POSITIVE);
        g.into_iter().map(|v| spec.separation * v / n).collect::<Vec<f64>>()
    };
    if spec.classes == 2 {
        let u = unit();
        let neg = u.iter().map(|v| -v).collect();
        vec![neg, u]
    } else {
        (0..spec.classes).map(|_| unit()).collect()
    }
}

/// Isotropic Gaussian blobs around `means`, labelled round-robin, then
/// rescaled so that `‖X‖_{p,∞}` equals `spec.radius` exactly: samples beyond
/// the radius are projected radially onto it, and if none reaches it the
/// whole set is scaled up uniformly.
///
/// Two classes give `±1` labels (class 0 ↦ −1).
pub fn gaussian_blobs_with_means<R: Rng + ?Sized>(
    spec: &BlobSpec,
    means: &[Vec<f64>],
    rng: &mut R,
) -> Result<Dataset> {
    validate_blobs(spec)?;
    let mut rows = Vec::with_capacity(spec.n);
    let mut classes = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let k = i % spec.classes;
        let row: Vec<f64> = means[k]
            .iter()
            .map(|&m| {
                let g: f64 = StandardNormal.sample(rng);
                m + spec.noise * g
            })
            .collect();
        rows.push(row);
        classes.push(k);
    }
    let max = rows.iter().map(|r| p_norm(r, spec.p)).fold(0.0, f64::max);
    if max == 0.0 {
        return Err(invalid("all samples are zero; cannot rescale to the target radius"));
    }
    for r in &mut rows {
        let nr = p_norm(r, spec.p);
        let s = if max < spec.radius { spec.radius / max } else if nr > spec.radius { spec.radius / nr } else { 1.0 };
        r.iter_mut().for_each(|v| *v *= s);
    }
    let labels = if spec.classes == 2 {
        Labels::Signed(classes.iter().map(|&k| if k == 0 { -1.0 } else { 1.0 }).collect())
    } else {
        Labels::Class { labels: classes, classes: spec.classes }
    };
    Dataset::new(DenseMatrix::from_rows(&rows)?, labels)
}

pub fn gaussian_blobs<R: Rng + ?Sized>(spec: &BlobSpec, rng: &mut R) -> Result<Dataset> {
    validate_blobs(spec)?;
    let means = blob_means(spec, rng);
    gaussian_blobs_with_means(spec, &means, rng)
}

fn validate_blobs(spec: &BlobSpec) -> Result<()> {
    if spec.n == 0 {
        return Err(invalid("n must be positive"));
    }
    if spec.dim == 0 {
        return Err(invalid("dim must be positive"));
    }
    if spec.classes < 2 {
        return Err(invalid("need at least two classes"));
    }
    if !(spec.radius > 0.0 && spec.radius.is_finite()) {
        return Err(invalid(format!("radius must be positive, got {}", spec.radius)));
    }
    if !(spec.noise >= 0.0 && spec.separation >= 0.0) {
        return Err(invalid("noise and separation must be non-negative"));
    }
    Ok(())
}

/// Lower-bound construction: every sample is the same vector with equal
/// entries and `‖x‖_p = b`; labels are independent uniform `±1`.
pub fn equal_entries_dataset<R: Rng + ?Sized>(
    n: usize,
    dim: usize,
    b: f64,
    p: Exponent,
    rng: &mut R,
) -> Result<Dataset> {
    if n == 0 || dim == 0 {
        return Err(invalid("n and dim must be positive"));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(invalid(format!("B must be positive, got {b}")));
    }
    let entry = b * (dim as f64).powf(-p.recip());
    let rows = vec![vec![entry; dim]; n];
    let labels = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    Dataset::new(DenseMatrix::from_rows(&rows)?, Labels::Signed(labels))
}

/// True when every sample equals the first one and has equal entries.
pub fn is_equal_entries(data: &Dataset) -> bool {
    let first = data.sample(0);
    first.iter().all(|&v| v == first[0]) && (1..data.len()).all(|i| data.sample(i) == first)
}
