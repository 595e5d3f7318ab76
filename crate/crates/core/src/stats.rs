//! Order-fixed summaries used for Monte Carlo aggregation.

/// Sum with a fixed binary tree shape, so the result depends only on the
/// order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if xs.len() <= LEAF {
        return xs.iter().fold(0.0, |a, &x| a + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    /// sd/√n with the n − 1 sample sd; 0 for a single observation.
    pub se: f64,
    pub n: usize,
}

impl MeanSe {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, se: f64::NAN, n };
        }
        let mean = pairwise_sum(xs) / n as f64;
        if n == 1 || !mean.is_finite() {
            return Self { mean, se: if n == 1 { 0.0 } else { f64::NAN }, n };
        }
        let mut dev = alloc::vec::Vec::with_capacity(n);
        dev.extend(xs.iter().map(|x| (x - mean) * (x - mean)));
        let var = pairwise_sum(&dev) / (n - 1) as f64;
        Self { mean, se: libm::sqrt(var / n as f64), n }
    }

    /// True when `mean ≤ bound + k·se`.
    pub fn at_most(&self, bound: f64, k: f64) -> bool {
        self.mean <= bound + k * self.se
    }
}
