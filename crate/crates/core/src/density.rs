//! Distributions of non-null p-values on [0, 1].

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{bail, Result};
use crate::piecewise::PiecewiseConstant;
use crate::special::{ln_gamma, normal_isf, normal_sf, reg_inc_beta, two_sided_z_pvalue};

/// Law of a non-null p-value.
#[derive(Debug, Clone, PartialEq)]
pub enum AlternativeDensity {
    /// p ~ Uniform[0, 1] (no signal).
    Uniform,
    /// p = 2(1 − Φ(|Z|)) with Z ~ N(mu, 1).
    TwoSidedZ { mu: f64 },
    /// p ~ Beta(a, b).
    Beta { a: f64, b: f64 },
    /// Step density; levels must integrate to one.
    PiecewiseConstant(PiecewiseConstant),
}

impl AlternativeDensity {
    pub fn two_sided_z(mu: f64) -> Result<Self> {
        let d = Self::TwoSidedZ { mu };
        d.validate()?;
        Ok(d)
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        let d = Self::Beta { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn piecewise(levels: PiecewiseConstant) -> Result<Self> {
        let d = Self::PiecewiseConstant(levels);
        d.validate()?;
        Ok(d)
    }

    /// Checks parameters and that the density integrates to one.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Uniform => {}
            Self::TwoSidedZ { mu } => {
                if !mu.is_finite() {
                    bail!(Validation, "z-test mean must be finite, got {mu}");
                }
            }
            Self::Beta { a, b } => {
                if !(*a > 0.0 && *b > 0.0) || !a.is_finite() || !b.is_finite() {
                    bail!(Validation, "beta parameters must be positive, got ({a}, {b})");
                }
            }
            Self::PiecewiseConstant(pc) => {
                let total = pc.integral();
                if libm::fabs(total - 1.0) > 1e-9 {
                    bail!(Validation, "piecewise density integrates to {total}, not 1");
                }
            }
        }
        Ok(())
    }

    /// Density at `t`; may be +∞ at t = 0 for singular forms.
    pub fn pdf(&self, t: f64) -> f64 {
        match self {
            Self::Uniform => 1.0,
            Self::TwoSidedZ { mu } => {
                let z = normal_isf(0.5 * t);
                let half_mu2 = 0.5 * mu * mu;
                0.5 * (libm::exp(mu * z - half_mu2) + libm::exp(-mu * z - half_mu2))
            }
            Self::Beta { a, b } => {
                let ln_beta = ln_gamma(*a) + ln_gamma(*b) - ln_gamma(a + b);
                // skip zero exponents so that 0 · ln 0 never appears
                let mut ln_f = -ln_beta;
                if *a != 1.0 {
                    ln_f += (a - 1.0) * libm::log(t);
                }
                if *b != 1.0 {
                    ln_f += (b - 1.0) * libm::log1p(-t);
                }
                libm::exp(ln_f)
            }
            Self::PiecewiseConstant(pc) => pc.eval(t),
        }
    }

    /// P(p ≤ t).
    pub fn cdf(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            Self::Uniform => t,
            Self::TwoSidedZ { mu } => {
                if t == 0.0 {
                    return 0.0;
                }
                let z = normal_isf(0.5 * t);
                (normal_sf(z - mu) + normal_sf(z + mu)).min(1.0)
            }
            Self::Beta { a, b } => reg_inc_beta(t, *a, *b),
            Self::PiecewiseConstant(pc) => pc.integral_to(t),
        }
    }

    /// True when the density is nonincreasing on [0, 1], the shape required
    /// by the bounded-optimality comparison.
    pub fn is_nonincreasing(&self) -> bool {
        match self {
            Self::Uniform | Self::TwoSidedZ { .. } => true,
            Self::Beta { a, b } => *a <= 1.0 && *b >= 1.0,
            Self::PiecewiseConstant(pc) => pc.is_nonincreasing(),
        }
    }

    /// True when the density is unbounded near t = 0.
    pub(crate) fn singular_at_zero(&self) -> bool {
        match self {
            Self::TwoSidedZ { mu } => *mu != 0.0,
            Self::Beta { a, .. } => *a < 1.0,
            _ => false,
        }
    }

    /// Interior points where the density has a jump.
    pub(crate) fn breakpoints(&self) -> alloc::vec::Vec<f64> {
        match self {
            Self::PiecewiseConstant(pc) => pc.breakpoints().collect(),
            _ => alloc::vec::Vec::new(),
        }
    }

    /// Draws one p-value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Uniform => rng.random::<f64>(),
            Self::TwoSidedZ { mu } => {
                let z: f64 = StandardNormal.sample(rng);
                two_sided_z_pvalue(z + mu)
            }
            Self::Beta { a, b } => rand_distr::Beta::new(*a, *b).expect("validated beta parameters").sample(rng),
            Self::PiecewiseConstant(pc) => {
                let u: f64 = rng.random::<f64>();
                let mut acc = 0.0;
                for p in pc.pieces() {
                    let mass = (p.end - p.start) * p.level;
                    if p.level > 0.0 && u < acc + mass {
                        return p.start + (u - acc) / p.level;
                    }
                    acc += mass;
                }
                pc.pieces().last().map_or(1.0, |p| p.end)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_pieces;

    #[test]
    fn z_density_integrates_to_one() {
        for mu in [0.5, 2.0, 3.0] {
            let d = AlternativeDensity::two_sided_z(mu).unwrap();
            // mass near zero taken from the cdf, the rest by quadrature
            let lo = 1e-8;
            let body = integrate_pieces(&|t| d.pdf(t), &[lo, 1e-4, 0.01, 0.5, 1.0], 1e-11).unwrap();
            assert!((d.cdf(lo) + body - 1.0).abs() < 1e-8, "mu={mu}");
            assert!((d.cdf(1.0) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn z_density_endpoint_value() {
        // f(1) = e^{-mu^2/2}: z = Φ⁻¹(1/2) = 0
        let d = AlternativeDensity::two_sided_z(2.0).unwrap();
        assert!((d.pdf(1.0) - libm::exp(-2.0)).abs() < 1e-15);
        assert!(d.pdf(0.0).is_infinite());
    }

    #[test]
    fn beta_density_and_cdf() {
        let d = AlternativeDensity::beta(1.0, 2.0).unwrap();
        assert!((d.pdf(0.25) - 1.5).abs() < 1e-14);
        assert!((d.cdf(0.5) - 0.75).abs() < 1e-14);
        assert!(d.is_nonincreasing());
        assert!(!AlternativeDensity::Beta { a: 2.0, b: 1.0 }.is_nonincreasing());
    }

    #[test]
    fn validation_rejects_bad_forms() {
        assert!(AlternativeDensity::beta(0.0, 1.0).is_err());
        let pc: PiecewiseConstant = "0,1,2".parse().unwrap();
        assert!(AlternativeDensity::piecewise(pc).is_err());
    }
}
