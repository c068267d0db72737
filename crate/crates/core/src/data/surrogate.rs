//! Seeded synthetic stand-ins for the `mushrooms`, `a9a` and `w8a` files.
//!
//! Each surrogate matches the original's feature dimension, sample count,
//! row sparsity pattern (binary one-hot blocks, one active feature per block)
//! and class balance. Labels come from a planted linear rule over the one-hot
//! features, optionally with label noise. They are used whenever the real
//! LIBSVM files are not available locally.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DataError, Dataset, Sample};

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateSpec {
    pub name: &'static str,
    /// Cardinality of each one-hot block; the dimension is their sum.
    pub blocks: Vec<usize>,
    pub samples: usize,
    pub positive_fraction: f64,
    /// Probability of flipping each planted label.
    pub label_noise: f64,
    pub seed: u64,
}

impl SurrogateSpec {
    /// 22 categorical attributes, 112 binary features, 8124 rows, separable.
    pub fn mushrooms() -> Self {
        Self {
            name: "mushrooms",
            blocks: vec![6, 4, 8, 2, 9, 2, 2, 2, 10, 2, 5, 4, 4, 9, 9, 1, 4, 3, 5, 8, 6, 7],
            samples: 8124,
            positive_fraction: 3916.0 / 8124.0,
            label_noise: 0.0,
            seed: 0x6d75_7368,
        }
    }

    /// 14 attributes, 123 binary features, 32561 rows, ~24% positive.
    pub fn a9a() -> Self {
        Self {
            name: "a9a",
            blocks: vec![5, 8, 16, 16, 7, 14, 6, 5, 2, 10, 10, 5, 4, 15],
            samples: 32561,
            positive_fraction: 0.2408,
            label_noise: 0.08,
            seed: 0x0061_3961,
        }
    }

    /// 12 blocks of 25, 300 binary features, 49749 rows, ~3% positive.
    pub fn w8a() -> Self {
        Self {
            name: "w8a",
            blocks: vec![25; 12],
            samples: 49749,
            positive_fraction: 0.0297,
            label_noise: 0.01,
            seed: 0x0077_3861,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "mushrooms" => Some(Self::mushrooms()),
            "a9a" => Some(Self::a9a()),
            "w8a" => Some(Self::w8a()),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn generate(&self) -> Result<Dataset, DataError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let dim = self.dim();
        let planted: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();

        // skewed category frequencies per block
        let block_probs: Vec<Vec<f64>> = self
            .blocks
            .iter()
            .map(|&k| {
                let w: Vec<f64> = (0..k).map(|_| (1.2 * rng.sample::<f64, _>(StandardNormal)).exp()).collect();
                let total: f64 = w.iter().sum();
                w.into_iter().map(|x| x / total).collect()
            })
            .collect();

        let mut rows: Vec<Vec<u32>> = Vec::with_capacity(self.samples);
        let mut scores = Vec::with_capacity(self.samples);
        for _ in 0..self.samples {
            let mut offset = 0usize;
            let mut active = Vec::with_capacity(self.blocks.len());
            for (k, probs) in self.blocks.iter().zip(&block_probs) {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = k - 1;
                for (c, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        pick = c;
                        break;
                    }
                }
                active.push((offset + pick) as u32);
                offset += k;
            }
            scores.push(active.iter().map(|&i| planted[i as usize]).sum::<f64>());
            rows.push(active);
        }

        let mut sorted = scores.clone();
        sorted.sort_by(f64::total_cmp);
        let cut = ((1.0 - self.positive_fraction) * self.samples as f64) as usize;
        let threshold = sorted[cut.min(self.samples - 1)];

        let samples = rows
            .into_iter()
            .zip(scores)
            .map(|(active, score)| {
                let mut label = if score >= threshold { 1.0 } else { -1.0 };
                if self.label_noise > 0.0 && rng.random::<f64>() < self.label_noise {
                    label = -label;
                }
                Sample::new(active.into_iter().map(|i| (i, 1.0)).collect(), label)
            })
            .collect();
        Dataset::new(dim, samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_reference_shapes() {
        assert_eq!(SurrogateSpec::mushrooms().dim(), 112);
        assert_eq!(SurrogateSpec::a9a().dim(), 123);
        assert_eq!(SurrogateSpec::w8a().dim(), 300);
    }

    #[test]
    fn mushrooms_surrogate_shape_and_balance() {
        let ds = SurrogateSpec::mushrooms().generate().unwrap();
        assert_eq!(ds.dim(), 112);
        assert_eq!(ds.len(), 8124);
        assert!(ds.samples().iter().all(|s| s.indices().len() == 22));
        let pos = ds.samples().iter().filter(|s| s.label() > 0.0).count() as f64 / 8124.0;
        assert!((pos - 0.482).abs() < 0.01, "{pos}");
        assert_eq!(ds, SurrogateSpec::mushrooms().generate().unwrap());
    }
}
