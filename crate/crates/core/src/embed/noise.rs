use rand::Rng;

/// Maximum redraws when a negative collides with the excluded node.
pub const MAX_REDRAWS: usize = 100;

/// Noise distribution for negative sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseDist {
    /// Unigram counts raised to the 3/4 power, via inverse-CDF lookup.
    Unigram {
        cumulative: Vec<f64>,
    },
    Uniform {
        n: usize,
    },
}

impl NoiseDist {
    /// Unigram^0.75 over how often each node is a center in `pairs`.
    pub fn from_pairs(num_nodes: usize, pairs: &[(u32, u32)]) -> Self {
        let mut counts = vec![0u64; num_nodes];
        for &(i, _) in pairs {
            counts[i as usize] += 1;
        }
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        NoiseDist::Unigram { cumulative }
    }

    pub fn uniform(n: usize) -> Self {
        NoiseDist::Uniform { n }
    }

    pub fn probability(&self, node: usize) -> f64 {
        match self {
            NoiseDist::Uniform { n } => 1.0 / *n as f64,
            NoiseDist::Unigram { cumulative } => {
                let total = *cumulative.last().unwrap_or(&0.0);
                let prev = if node == 0 { 0.0 } else { cumulative[node - 1] };
                (cumulative[node] - prev) / total
            }
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        match self {
            NoiseDist::Uniform { n } => rng.gen_range(0..*n),
            NoiseDist::Unigram { cumulative } => {
                let total = *cumulative.last().expect("non-empty");
                let u = rng.gen::<f64>() * total;
                cumulative
                    .partition_point(|&c| c <= u)
                    .min(cumulative.len() - 1)
            }
        }
    }

    /// Draws up to `k` samples different from `exclude`, redrawing collisions
    /// at most [`MAX_REDRAWS`] times before skipping that negative.
    pub fn negatives<R: Rng>(&self, k: usize, exclude: usize, rng: &mut R, out: &mut Vec<usize>) {
        out.clear();
        for _ in 0..k {
            for _ in 0..MAX_REDRAWS {
                let u = self.sample(rng);
                if u != exclude {
                    out.push(u);
                    break;
                }
            }
        }
    }
}
