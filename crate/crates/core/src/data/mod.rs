//! LIBSVM datasets and their partition across agents.

pub mod surrogate;

use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: label {label} is not allowed under the {scheme:?} label scheme")]
    BadLabel { line: usize, label: String, scheme: LabelScheme },
    #[error("dataset has no samples")]
    Empty,
    #[error("feature index {index} exceeds declared dimension {dim}")]
    DimensionTooSmall { index: usize, dim: usize },
    #[error("cannot partition {samples} samples across {agents} agents")]
    TooManyAgents { samples: usize, agents: usize },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// How raw labels are mapped onto `{−1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelScheme {
    /// `±1` as is, `0 → −1`, and the `1/2` convention `2 → −1`.
    #[default]
    Auto,
    /// Only `−1` and `+1`.
    PlusMinusOne,
    /// `0 → −1`, `1 → +1`.
    ZeroOne,
    /// `1 → +1`, `2 → −1` (e.g. the `mushrooms` file).
    OneTwo,
}

impl LabelScheme {
    fn map(self, raw: f64) -> Option<f64> {
        use LabelScheme::*;
        match (self, raw) {
            (Auto | PlusMinusOne | ZeroOne | OneTwo, 1.0) => Some(1.0),
            (Auto | PlusMinusOne, -1.0) => Some(-1.0),
            (Auto | ZeroOne, 0.0) => Some(-1.0),
            (Auto | OneTwo, 2.0) => Some(-1.0),
            _ => None,
        }
    }
}

/// One labelled sparse feature vector (0-based, strictly increasing indices).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    indices: Vec<u32>,
    values: Vec<f64>,
    label: f64,
}

impl Sample {
    /// Builds a sample; panics if indices are not strictly increasing or the
    /// label is not ±1.
    pub fn new(features: Vec<(u32, f64)>, label: f64) -> Self {
        assert!(label == 1.0 || label == -1.0, "label must be ±1");
        assert!(features.windows(2).all(|w| w[0].0 < w[1].0), "indices must increase");
        let (indices, values) = features.into_iter().unzip();
        Self { indices, values, label }
    }

    pub fn label(&self) -> f64 {
        self.label
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn features(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().map(|&i| i as usize).zip(self.values.iter().copied())
    }

    /// `⟨a, x⟩`.
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.indices.iter().zip(&self.values).map(|(&i, &v)| v * x[i as usize]).sum()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn max_index(&self) -> Option<usize> {
        self.indices.last().map(|&i| i as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(dim: usize, samples: Vec<Sample>) -> Result<Self, DataError> {
        if samples.is_empty() {
            return Err(DataError::Empty);
        }
        if let Some(max) = samples.iter().filter_map(Sample::max_index).max() {
            if max >= dim {
                return Err(DataError::DimensionTooSmall { index: max + 1, dim });
            }
        }
        Ok(Self { dim, samples })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn sample(&self, i: usize) -> &Sample {
        &self.samples[i]
    }

    /// Keeps only the samples at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self, DataError> {
        Self::new(self.dim, indices.iter().map(|&i| self.samples[i].clone()).collect())
    }

    /// Divides every feature by its maximum absolute value over the dataset.
    pub fn scale_max_abs(&mut self) {
        let mut max = vec![0.0_f64; self.dim];
        for s in &self.samples {
            for (i, v) in s.features() {
                max[i] = max[i].max(v.abs());
            }
        }
        for s in &mut self.samples {
            for (i, v) in s.indices.iter().zip(s.values.iter_mut()) {
                let m = max[*i as usize];
                if m > 0.0 {
                    *v /= m;
                }
            }
        }
    }

    /// Serializes back to LIBSVM lines (`+1`/`-1` labels, 1-based indices).
    pub fn to_libsvm(&self) -> String {
        let mut out = String::new();
        for s in &self.samples {
            out.push_str(if s.label > 0.0 { "+1" } else { "-1" });
            for (i, v) in s.features() {
                let _ = write!(out, " {}:{}", i + 1, v);
            }
            out.push('\n');
        }
        out
    }

    /// SHA-256 over the canonical LIBSVM serialization and the dimension.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.dim.to_le_bytes());
        h.update(self.to_libsvm().as_bytes());
        hex::encode(h.finalize())
    }
}

/// Parser knobs.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Explicit feature dimension; defaults to the largest index seen.
    pub dim: Option<usize>,
    pub labels: LabelScheme,
}

/// Parses LIBSVM text: `<label> <idx>:<val> ...`, `#` comments, blank lines skipped.
pub fn parse_libsvm(reader: impl BufRead, opts: ParseOptions) -> Result<Dataset, DataError> {
    let mut samples = Vec::new();
    let mut max_index = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line_no = lineno + 1;
        let line = line.map_err(|e| DataError::Malformed { line: line_no, msg: e.to_string() })?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("nonempty line has a token");
        let raw: f64 = label_tok.parse().map_err(|_| DataError::Malformed {
            line: line_no,
            msg: format!("unparsable label {label_tok:?}"),
        })?;
        let label = opts.labels.map(raw).ok_or_else(|| DataError::BadLabel {
            line: line_no,
            label: label_tok.to_string(),
            scheme: opts.labels,
        })?;
        let mut features: Vec<(u32, f64)> = Vec::new();
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| DataError::Malformed {
                line: line_no,
                msg: format!("expected idx:val, got {tok:?}"),
            })?;
            let idx: u32 = idx.parse().map_err(|_| DataError::Malformed {
                line: line_no,
                msg: format!("bad feature index {idx:?}"),
            })?;
            if idx == 0 {
                return Err(DataError::Malformed { line: line_no, msg: "feature indices are 1-based".into() });
            }
            let val: f64 = val.parse().map_err(|_| DataError::Malformed {
                line: line_no,
                msg: format!("bad feature value {val:?}"),
            })?;
            let idx0 = idx - 1;
            if let Some(&(prev, _)) = features.last() {
                if idx0 <= prev {
                    return Err(DataError::Malformed {
                        line: line_no,
                        msg: format!("feature index {idx} does not increase"),
                    });
                }
            }
            max_index = max_index.max(idx as usize);
            features.push((idx0, val));
        }
        samples.push(Sample::new(features, label));
    }
    let dim = match opts.dim {
        Some(d) if d < max_index => return Err(DataError::DimensionTooSmall { index: max_index, dim: d }),
        Some(d) => d,
        None => max_index,
    };
    Dataset::new(dim, samples)
}

pub fn parse_libsvm_str(text: &str, opts: ParseOptions) -> Result<Dataset, DataError> {
    parse_libsvm(text.as_bytes(), opts)
}

pub fn load_libsvm(path: impl AsRef<Path>, opts: ParseOptions) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| DataError::Io { path: path.display().to_string(), source })?;
    parse_libsvm(std::io::BufReader::new(file), opts)
}

/// `max_a ‖a‖₂`, the Lipschitz constant of the hinge loss over this data.
pub fn max_feature_norm(ds: &Dataset) -> Result<f64, DataError> {
    ds.samples.iter().map(Sample::norm).reduce(f64::max).ok_or(DataError::Empty)
}

/// Disjoint sample-index blocks, one per agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn agents(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, agent: usize) -> &[usize] {
        &self.blocks[agent]
    }
}

/// Seeded shuffle of `0..samples` cut into `agents` contiguous blocks; the
/// first `samples mod agents` blocks get one extra index.
pub fn partition_iid(samples: usize, agents: usize, seed: u64) -> Result<Partition, DataError> {
    if agents == 0 || agents > samples {
        return Err(DataError::TooManyAgents { samples, agents });
    }
    let mut order: Vec<usize> = (0..samples).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = samples / agents;
    let extra = samples % agents;
    let mut blocks = Vec::with_capacity(agents);
    let mut start = 0;
    for a in 0..agents {
        let len = base + usize::from(a < extra);
        blocks.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(Partition { blocks })
}
