//! Two-sample t-test with unequal variances.

use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::special::{student_t_sf, student_t_two_sided};

/// Direction of a one-sided test of mean(A) against mean(B).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    /// Evidence that A's mean is larger.
    Plus,
    /// Evidence that A's mean is smaller.
    Minus,
}

impl Sign {
    /// Plus for a nonnegative difference.
    pub fn of(diff: f64) -> Self {
        if diff < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Alternative {
    Plus,
    Minus,
    TwoSided,
}

impl From<Sign> for Alternative {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Plus => Alternative::Plus,
            Sign::Minus => Alternative::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchStatistic {
    /// (mean(A) − mean(B)) / √(s²_A/n_A + s²_B/n_B).
    pub t: f64,
    /// Satterthwaite degrees of freedom; +∞ when both variances vanish.
    pub df: f64,
    pub mean_diff: f64,
}

impl WelchStatistic {
    pub fn p_value(&self, alt: Alternative) -> f64 {
        match alt {
            Alternative::Plus => student_t_sf(self.t, self.df),
            Alternative::Minus => student_t_sf(-self.t, self.df),
            Alternative::TwoSided => student_t_two_sided(self.t, self.df),
        }
    }
}

/// Mean and unbiased variance. Summation runs over sorted values so the
/// result does not depend on the order of the sample.
fn moments(xs: &[f64], scratch: &mut Vec<f64>) -> (f64, f64) {
    scratch.clear();
    scratch.extend_from_slice(xs);
    scratch.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mean = scratch.iter().sum::<f64>() / n;
    let ss: f64 = scratch.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

pub fn welch_statistic(a: &[f64], b: &[f64]) -> Result<WelchStatistic> {
    if a.len() < 2 || b.len() < 2 {
        bail!(Contract, "each sample needs at least two values, got {} and {}", a.len(), b.len());
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        bail!(Validation, "samples must be finite");
    }
    let mut scratch = Vec::with_capacity(a.len().max(b.len()));
    let (ma, va) = moments(a, &mut scratch);
    let (mb, vb) = moments(b, &mut scratch);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (qa, qb) = (va / na, vb / nb);
    let diff = ma - mb;
    let se2 = qa + qb;
    if se2 == 0.0 {
        // continuous limit: t = 0 for equal means, ±∞ otherwise
        let t = if diff == 0.0 { 0.0 } else { diff * f64::INFINITY };
        return Ok(WelchStatistic { t, df: f64::INFINITY, mean_diff: diff });
    }
    let t = diff / libm::sqrt(se2);
    let df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    Ok(WelchStatistic { t, df, mean_diff: diff })
}

pub fn welch_p_two_sided(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(welch_statistic(a, b)?.p_value(Alternative::TwoSided))
}

pub fn welch_p_one_sided(a: &[f64], b: &[f64], direction: Sign) -> Result<f64> {
    Ok(welch_statistic(a, b)?.p_value(direction.into()))
}
