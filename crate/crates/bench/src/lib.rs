//! Deterministic inputs shared by the benchmarks.

use pacbound::threshold::LabeledDataset;
use pacbound::FiniteHypothesisClass;

/// SplitMix64, enough for reproducible fixtures without extra dependencies.
pub struct Stream(u64);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

pub fn finite_class(h: usize, n: usize, seed: u64) -> FiniteHypothesisClass {
    let mut s = Stream::new(seed);
    let prior: Vec<f64> = (0..h).map(|_| 0.1 + s.unit()).collect();
    let losses: Vec<Vec<bool>> = (0..h)
        .map(|_| {
            let p = 0.05 + 0.4 * s.unit();
            (0..n).map(|_| s.unit() < p).collect()
        })
        .collect();
    FiniteHypothesisClass::new(&prior, &losses).expect("valid fixture")
}

pub fn threshold_data(n: usize, h: usize, seed: u64) -> LabeledDataset {
    let mut s = Stream::new(seed);
    let patterns: Vec<Vec<f64>> = (0..n).map(|_| (0..h).map(|_| 0.001 + 0.998 * s.unit()).collect()).collect();
    let labels = patterns.iter().map(|x| if x.iter().sum::<f64>() > h as f64 / 2.0 { 2 } else { 1 }).collect();
    LabeledDataset::new(patterns, labels).expect("valid fixture")
}

/// Two separated clusters in the plane with ±1 labels.
pub fn clusters(m: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<i8>) {
    let mut s = Stream::new(seed);
    (0..m)
        .map(|i| {
            let y: i8 = if i % 2 == 0 { 1 } else { -1 };
            (vec![2.0 * y as f64 + 2.0 * s.unit() - 1.0, 2.0 * s.unit() - 1.0], y)
        })
        .unzip()
}
