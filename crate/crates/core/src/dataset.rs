//! Labeled feature-vector data split into positive and negative sets.

use std::fmt;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, streams};

/// Smallest standard deviation a [`Standardizer`] will divide by.
pub const STDDEV_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Positive,
    Negative,
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Class::Positive => f.write_str("positive"),
            Class::Negative => f.write_str("negative"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: Class,
}

/// Positive set `S+` and negative set `S-`, both nonempty and of one
/// shared dimension. Insertion order is preserved inside each class.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    positives: Vec<Vec<f64>>,
    negatives: Vec<Vec<f64>>,
    dim: usize,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(positives: Vec<Vec<f64>>, negatives: Vec<Vec<f64>>) -> Result<Self> {
        let dim = positives
            .first()
            .or(negatives.first())
            .map(Vec::len)
            .unwrap_or(0);
        let names = (0..dim).map(|i| format!("x{i}")).collect();
        Self::with_feature_names(positives, negatives, names)
    }

    pub fn with_feature_names(
        positives: Vec<Vec<f64>>,
        negatives: Vec<Vec<f64>>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if positives.is_empty() {
            return Err(Error::EmptyClass(Class::Positive));
        }
        if negatives.is_empty() {
            return Err(Error::EmptyClass(Class::Negative));
        }
        let dim = feature_names.len();
        for (class, rows) in [(Class::Positive, &positives), (Class::Negative, &negatives)] {
            for (i, row) in rows.iter().enumerate() {
                if row.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
                }
                if row.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteFeature(class, i));
                }
            }
        }
        Ok(Self { positives, negatives, dim, feature_names })
    }

    pub fn from_samples(samples: impl IntoIterator<Item = Sample>) -> Result<Self> {
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for s in samples {
            match s.label {
                Class::Positive => pos.push(s.features),
                Class::Negative => neg.push(s.features),
            }
        }
        Self::new(pos, neg)
    }

    pub fn positives(&self) -> &[Vec<f64>] {
        &self.positives
    }

    pub fn negatives(&self) -> &[Vec<f64>] {
        &self.negatives
    }

    pub fn class(&self, class: Class) -> &[Vec<f64>] {
        match class {
            Class::Positive => &self.positives,
            Class::Negative => &self.negatives,
        }
    }

    pub fn n_pos(&self) -> usize {
        self.positives.len()
    }

    pub fn n_neg(&self) -> usize {
        self.negatives.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// All samples, positives first, each with its label.
    pub fn samples(&self) -> impl Iterator<Item = Sample> + '_ {
        let pos = self.positives.iter().map(|f| Sample { features: f.clone(), label: Class::Positive });
        let neg = self.negatives.iter().map(|f| Sample { features: f.clone(), label: Class::Negative });
        pos.chain(neg)
    }

    /// Builds a dataset from index subsets of this one, keeping feature names.
    pub fn subset(&self, pos_idx: &[usize], neg_idx: &[usize]) -> Result<Self> {
        let pos = pos_idx.iter().map(|&i| self.positives[i].clone()).collect();
        let neg = neg_idx.iter().map(|&i| self.negatives[i].clone()).collect();
        Self::with_feature_names(pos, neg, self.feature_names.clone())
    }
}

/// How the label column is named and valued in CSV files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvLabels {
    pub column: String,
    pub positive: String,
    pub negative: String,
}

impl Default for CsvLabels {
    fn default() -> Self {
        Self { column: "label".into(), positive: "1".into(), negative: "0".into() }
    }
}

/// Reads a headered CSV. Rows whose label equals `positive_value` are
/// positives; every other row is a negative.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str, positive_value: &str) -> Result<Dataset> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let file = std::fs::File::open(path)?;
    read_csv(file, label_column, positive_value)
}

pub fn read_csv(reader: impl io::Read, label_column: &str, positive_value: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let label_idx = header
        .iter()
        .position(|h| h.trim() == label_column)
        .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?;
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.trim().to_string())
        .collect();

    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::RaggedRows { row });
        }
        let mut features = Vec::with_capacity(names.len());
        for (col, cell) in record.iter().enumerate() {
            if col == label_idx {
                continue;
            }
            match cell.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => features.push(v),
                _ => return Err(Error::UnparseableCell { row, col }),
            }
        }
        if record[label_idx].trim() == positive_value {
            pos.push(features);
        } else {
            neg.push(features);
        }
    }
    Dataset::with_feature_names(pos, neg, names)
}

/// Writes features then the label column, positives first. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_csv(ds: &Dataset, writer: impl io::Write, labels: &CsvLabels) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = ds.feature_names.iter().map(String::as_str).collect();
    header.push(&labels.column);
    wtr.write_record(&header)?;
    for (rows, tag) in [(&ds.positives, &labels.positive), (&ds.negatives, &labels.negative)] {
        for row in rows {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(tag.clone());
            wtr.write_record(&rec)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>, labels: &CsvLabels) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(ds, io::BufWriter::new(file), labels)
}

fn split_count(n: usize, fraction: f64) -> usize {
    // guard against 0.7 * 100 = 69.999...
    (fraction * n as f64 + 1e-9).floor() as usize
}

/// Shuffles each class independently and cuts it at
/// `floor(train_fraction * n)`. Each part keeps the original row order.
pub fn split_stratified(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!("train fraction {train_fraction} not in (0, 1)")));
    }
    let cut = |n: usize, stream: u64| -> Result<(Vec<usize>, Vec<usize>)> {
        let k = split_count(n, train_fraction);
        if k == 0 || k >= n {
            return Err(Error::DegenerateSplit);
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng::stream(seed, stream));
        let (a, b) = idx.split_at(k);
        let (mut a, mut b) = (a.to_vec(), b.to_vec());
        a.sort_unstable();
        b.sort_unstable();
        Ok((a, b))
    };
    let (pos_a, pos_b) = cut(ds.n_pos(), streams::SPLIT_POSITIVE)?;
    let (neg_a, neg_b) = cut(ds.n_neg(), streams::SPLIT_NEGATIVE)?;
    Ok((ds.subset(&pos_a, &neg_a)?, ds.subset(&pos_b, &neg_b)?))
}

/// Per-dimension affine map `x -> (x - mean) / stddev`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
}

impl Standardizer {
    /// Mean and population standard deviation over both classes.
    pub fn fit(ds: &Dataset) -> Self {
        let d = ds.dim();
        let n = (ds.n_pos() + ds.n_neg()) as f64;
        let all = || ds.positives.iter().chain(ds.negatives.iter());
        let mut mean = vec![0.0; d];
        for row in all() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for row in all() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let stddev = var.into_iter().map(|s| (s / n).sqrt().max(STDDEV_FLOOR)).collect();
        Self { mean, stddev }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.stddev)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        if self.dim() != ds.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: ds.dim() });
        }
        let map = |rows: &[Vec<f64>]| rows.iter().map(|x| self.transform(x)).collect();
        Dataset::with_feature_names(map(&ds.positives), map(&ds.negatives), ds.feature_names.clone())
    }
}

/// Two-dimensional XOR mixture. Positives come from isotropic Gaussians at
/// (+1,+1) and (-1,-1), negatives from (+1,-1) and (-1,+1), each component
/// chosen with probability 1/2 and noise `spread` per coordinate. No linear
/// score separates the classes.
pub fn synth_xor_gmm(n_pos: usize, n_neg: usize, spread: f64, seed: u64) -> Result<Dataset> {
    if n_pos == 0 {
        return Err(Error::EmptyClass(Class::Positive));
    }
    if n_neg == 0 {
        return Err(Error::EmptyClass(Class::Negative));
    }
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::Config(format!("spread {spread} must be finite and nonnegative")));
    }
    let mut rng = rng::stream(seed, streams::SYNTH);
    let mut draw = |anchors: [[f64; 2]; 2], n: usize| -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                let c = anchors[rng.random_range(0..2)];
                c.iter()
                    .map(|&m| {
                        let z: f64 = rng.sample(StandardNormal);
                        m + spread * z
                    })
                    .collect()
            })
            .collect()
    };
    let pos = draw([[1.0, 1.0], [-1.0, -1.0]], n_pos);
    let neg = draw([[1.0, -1.0], [-1.0, 1.0]], n_neg);
    Dataset::new(pos, neg)
}

/// Two-dimensional data with one-sided overlap. Positives are
/// `N((1.5, 0), 0.6^2 I)`. Negatives are mostly a broad, easy cluster
/// `N((-1, 0), I)`; a fraction 0.15 forms a tight cluster `N((1.5, 1.2),
/// 0.3^2 I)` pressed against the positives. The hard negatives dominate the
/// low-FPR end of the ROC curve, so training for a small FPR band and
/// training for the full AUC favour different scorers.
pub fn synth_asymmetric_overlap(n_pos: usize, n_neg: usize, seed: u64) -> Result<Dataset> {
    const HARD_FRACTION: f64 = 0.15;
    if n_pos == 0 {
        return Err(Error::EmptyClass(Class::Positive));
    }
    if n_neg == 0 {
        return Err(Error::EmptyClass(Class::Negative));
    }
    let mut rng = rng::stream(seed, streams::SYNTH);
    let gauss = |center: [f64; 2], sd: f64, rng: &mut rng::Rng| -> Vec<f64> {
        center.iter().map(|&c| c + sd * rng.sample::<f64, _>(StandardNormal)).collect()
    };
    let pos = (0..n_pos).map(|_| gauss([1.5, 0.0], 0.6, &mut rng)).collect();
    let neg = (0..n_neg)
        .map(|_| {
            if rng.random::<f64>() < HARD_FRACTION {
                gauss([1.5, 1.2], 0.3, &mut rng)
            } else {
                gauss([-1.0, 0.0], 1.0, &mut rng)
            }
        })
        .collect();
    Dataset::new(pos, neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_ds(text: &str) -> Result<Dataset> {
        read_csv(text.as_bytes(), "label", "real")
    }

    #[test]
    fn load_partitions_by_label() {
        let ds = csv_ds("a,b,label\n1,2,real\n3,4,bogus\n5,6,real\n").unwrap();
        assert_eq!((ds.n_pos(), ds.n_neg()), (2, 1));
        assert_eq!(ds.positives(), &[vec![1.0, 2.0], vec![5.0, 6.0]]);
        assert_eq!(ds.feature_names(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            csv_ds("a,label\n1,real\nabc,bogus\n"),
            Err(Error::UnparseableCell { row: 1, col: 0 })
        ));
        assert!(matches!(csv_ds("a,label\n1,bogus\n2,bogus\n"), Err(Error::EmptyClass(Class::Positive))));
        assert!(matches!(csv_ds("a,label\n1,real\n2,3,bogus\n"), Err(Error::RaggedRows { row: 1 })));
        assert!(matches!(csv_ds("a,b\n1,2\n"), Err(Error::MissingLabelColumn(_))));
        assert!(matches!(csv_ds("a,label\nNaN,real\n1,bogus\n"), Err(Error::UnparseableCell { .. })));
        assert!(matches!(
            load_csv("/definitely/not/here.csv", "label", "1"),
            Err(Error::MissingFile(_))
        ));
    }

    #[test]
    fn split_counts_and_determinism() {
        let ds = synth_xor_gmm(10, 100, 0.5, 3).unwrap();
        let (tr, te) = split_stratified(&ds, 0.7, 11).unwrap();
        assert_eq!((tr.n_pos(), tr.n_neg()), (7, 70));
        assert_eq!((te.n_pos(), te.n_neg()), (3, 30));
        let (tr2, te2) = split_stratified(&ds, 0.7, 11).unwrap();
        assert_eq!(tr, tr2);
        assert_eq!(te, te2);
    }

    #[test]
    fn split_rejects_empty_part() {
        let ds = synth_xor_gmm(1, 100, 0.5, 3).unwrap();
        assert!(matches!(split_stratified(&ds, 0.7, 0), Err(Error::DegenerateSplit)));
    }

    #[test]
    fn standardizer_two_points() {
        let ds = Dataset::new(vec![vec![0.0]], vec![vec![2.0]]).unwrap();
        let st = Standardizer::fit(&ds);
        assert_eq!(st.mean, vec![1.0]);
        assert_eq!(st.stddev, vec![1.0]);
        let out = st.apply(&ds).unwrap();
        assert_eq!(out.positives(), &[vec![-1.0]]);
        assert_eq!(out.negatives(), &[vec![1.0]]);
    }

    #[test]
    fn standardizer_constant_column() {
        let ds = Dataset::new(vec![vec![5.0], vec![5.0]], vec![vec![5.0]]).unwrap();
        let st = Standardizer::fit(&ds);
        assert_eq!(st.stddev, vec![STDDEV_FLOOR]);
        let out = st.apply(&ds).unwrap();
        assert!(out.samples().all(|s| s.features == vec![0.0]));
    }

    #[test]
    fn standardizer_dimension_mismatch() {
        let st = Standardizer { mean: vec![0.0; 3], stddev: vec![1.0; 3] };
        let ds = Dataset::new(vec![vec![0.0, 1.0]], vec![vec![1.0, 0.0]]).unwrap();
        assert!(matches!(st.apply(&ds), Err(Error::DimensionMismatch { expected: 3, got: 2 })));
    }

    #[test]
    fn xor_zero_noise_hits_anchors() {
        let ds = synth_xor_gmm(4, 4, 0.0, 99).unwrap();
        for p in ds.positives() {
            assert!(p == &vec![1.0, 1.0] || p == &vec![-1.0, -1.0], "{p:?}");
        }
        for n in ds.negatives() {
            assert!(n == &vec![1.0, -1.0] || n == &vec![-1.0, 1.0], "{n:?}");
        }
        assert_eq!(synth_xor_gmm(50, 60, 0.5, 7).unwrap(), synth_xor_gmm(50, 60, 0.5, 7).unwrap());
    }

    #[test]
    fn xor_class_means_approach_anchors() {
        // each class is a ±(1,1) or ±(1,-1) mix, so |x0| and |x1| concentrate at 1
        let ds = synth_xor_gmm(400, 400, 1e-4, 5).unwrap();
        for row in ds.samples() {
            for v in &row.features {
                assert!((v.abs() - 1.0).abs() < 1e-2);
            }
            let prod = row.features[0] * row.features[1];
            match row.label {
                Class::Positive => assert!(prod > 0.0),
                Class::Negative => assert!(prod < 0.0),
            }
        }
    }
}
