//! Accumulation functions h : [0, 1] → [0, ∞] with ∫₀¹ h = 1.
//!
//! The estimated false discovery proportion of an ordered list is the
//! running mean of `h(p_i)`; the built-in families are ForwardStop,
//! SeqStep, HingeExp, and a serializable step-function family used for
//! optimality experiments.
//!
//! Integrals are computed by adaptive Simpson quadrature, split at the
//! known kinks of `h`. The logarithmic singularity of the unbounded
//! families at t = 1 is handled by integrating up to `1 − ε` and adding the
//! closed-form tail.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::density::AlternativeDensity;
use crate::error::{bail, Error, Result};
use crate::piecewise::{parse_f64, PiecewiseConstant};
use crate::quad::integrate_pieces;

/// Absolute tolerance for the integrals in this module.
pub const QUAD_TOL: f64 = 1e-9;
/// Width of the excluded neighbourhood of a singular endpoint.
pub const SINGULAR_EPS: f64 = 1e-12;

/// The named families of accumulation functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    ForwardStop,
    SeqStep,
    HingeExp,
    PiecewiseConstant,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    ForwardStop,
    SeqStep(f64),
    HingeExp(f64),
    Piecewise(PiecewiseConstant),
}

/// A validated accumulation function.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulationSpec {
    kind: Kind,
}

impl AccumulationSpec {
    /// h(t) = log(1 / (1 − t)).
    pub fn forward_stop() -> Self {
        Self { kind: Kind::ForwardStop }
    }

    /// h(t) = C · 1{t > 1 − 1/C}, C > 1.
    pub fn seq_step(c: f64) -> Result<Self> {
        check_c(c, "SeqStep")?;
        Ok(Self { kind: Kind::SeqStep(c) })
    }

    /// h(t) = C · log(1 / (C(1 − t))) for t > 1 − 1/C, else 0; C > 1.
    pub fn hinge_exp(c: f64) -> Result<Self> {
        check_c(c, "HingeExp")?;
        Ok(Self { kind: Kind::HingeExp(c) })
    }

    /// A step function; its levels must integrate to one within 1e−9.
    pub fn piecewise(levels: PiecewiseConstant) -> Result<Self> {
        let total = levels.integral();
        if libm::fabs(total - 1.0) > QUAD_TOL {
            bail!(Validation, "piecewise accumulation function integrates to {total}, not 1");
        }
        Ok(Self { kind: Kind::Piecewise(levels) })
    }

    pub fn family(&self) -> Family {
        match self.kind {
            Kind::ForwardStop => Family::ForwardStop,
            Kind::SeqStep(_) => Family::SeqStep,
            Kind::HingeExp(_) => Family::HingeExp,
            Kind::Piecewise(_) => Family::PiecewiseConstant,
        }
    }

    /// The parameter C, for the families that have one.
    pub fn c_param(&self) -> Option<f64> {
        match self.kind {
            Kind::SeqStep(c) | Kind::HingeExp(c) => Some(c),
            _ => None,
        }
    }

    pub fn levels(&self) -> Option<&PiecewiseConstant> {
        match &self.kind {
            Kind::Piecewise(pc) => Some(pc),
            _ => None,
        }
    }

    /// sup h, or `None` when h is unbounded.
    pub fn upper_bound(&self) -> Option<f64> {
        match &self.kind {
            Kind::ForwardStop | Kind::HingeExp(_) => None,
            Kind::SeqStep(c) => Some(*c),
            Kind::Piecewise(pc) => Some(pc.max_level()),
        }
    }

    /// h(1) = +∞ for the unbounded families.
    pub fn is_unbounded(&self) -> bool {
        self.upper_bound().is_none()
    }

    /// Evaluates h(t). Returns +∞ at t = 1 for ForwardStop and HingeExp.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            bail!(Domain, "accumulation function argument {t} is outside [0, 1]");
        }
        Ok(self.eval(t))
    }

    /// Evaluation without the domain check; `t` must lie in [0, 1].
    #[inline]
    pub(crate) fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::ForwardStop => -libm::log1p(-t),
            Kind::SeqStep(c) => {
                if t > 1.0 - 1.0 / c {
                    *c
                } else {
                    0.0
                }
            }
            Kind::HingeExp(c) => {
                if t > 1.0 - 1.0 / c {
                    (-c * (libm::log(*c) + libm::log1p(-t))).max(0.0)
                } else {
                    0.0
                }
            }
            Kind::Piecewise(pc) => pc.eval(t),
        }
    }

    /// Points in (0, 1) where h has a kink or a jump.
    pub(crate) fn kinks(&self) -> Vec<f64> {
        match &self.kind {
            Kind::ForwardStop => Vec::new(),
            Kind::SeqStep(c) | Kind::HingeExp(c) => alloc::vec![1.0 - 1.0 / c],
            Kind::Piecewise(pc) => pc.breakpoints().collect(),
        }
    }

    /// The t in (0, 1) where h crosses `cap` (unbounded families only).
    fn cap_crossing(&self, cap: f64) -> Option<f64> {
        match self.kind {
            Kind::ForwardStop => Some(-libm::expm1(-cap)),
            Kind::HingeExp(c) => Some(1.0 - libm::exp(-cap / c) / c),
            _ => None,
        }
    }

    /// ∫_{1−ε}^{1} h(t) dt for the unbounded families.
    fn right_tail(&self, eps: f64) -> f64 {
        match self.kind {
            Kind::ForwardStop => eps * (1.0 - libm::log(eps)),
            Kind::HingeExp(c) => c * eps * (1.0 - libm::log(eps) - libm::log(c)),
            _ => 0.0,
        }
    }

    /// ∫₀¹ h(t) dt by quadrature; equals 1 within 1e−9 for valid specs.
    pub fn unit_integral(&self) -> Result<f64> {
        weighted_integral(self, f64::INFINITY, None)
    }

    /// ∫₀¹ min(h(t), cap) dt.
    pub fn truncated_integral(&self, cap: f64) -> Result<f64> {
        if cap.is_nan() || cap < 0.0 {
            bail!(Domain, "truncation cap must be nonnegative, got {cap}");
        }
        if cap == 0.0 {
            return Ok(0.0);
        }
        weighted_integral(self, cap, None)
    }

    /// E[h(p)] for p drawn from `density`.
    pub fn nonnull_mean(&self, density: &AlternativeDensity) -> Result<f64> {
        density.validate()?;
        weighted_integral(self, f64::INFINITY, Some(density))
    }
}

fn check_c(c: f64, name: &str) -> Result<()> {
    if !(c > 1.0) || !c.is_finite() {
        bail!(Validation, "{name} requires a finite C > 1, got {c}");
    }
    Ok(())
}

/// ∫₀¹ min(h, cap) · w with w = density (or 1).
fn weighted_integral(spec: &AccumulationSpec, cap: f64, density: Option<&AlternativeDensity>) -> Result<f64> {
    let weight = |t: f64| density.map_or(1.0, |d| d.pdf(t));
    let capped = |t: f64| {
        let h = spec.eval(t);
        let v = if h > cap { cap } else { h };
        // 0 · ∞ at a singular density endpoint counts as 0
        if v == 0.0 {
            0.0
        } else {
            v * weight(t)
        }
    };

    let mut breaks: Vec<f64> = alloc::vec![0.0, 1.0];
    breaks.extend(spec.kinks());
    if let Some(d) = density {
        breaks.extend(d.breakpoints());
    }
    let crossing = if cap.is_finite() { spec.cap_crossing(cap) } else { None };
    breaks.extend(crossing);

    // Where the integrand is still unbounded at the right end, stop short
    // of 1 and add the closed-form tail.
    let right_singular = spec.is_unbounded() && crossing.is_none();
    let mut tail = 0.0;
    if right_singular {
        let w_end = weight(1.0 - SINGULAR_EPS);
        tail = spec.right_tail(SINGULAR_EPS) * w_end;
        breaks.push(1.0 - SINGULAR_EPS);
    }
    let mut head = 0.0;
    if density.is_some_and(AlternativeDensity::singular_at_zero) {
        let d = density.unwrap();
        head = capped_plain(spec, cap, SINGULAR_EPS) * d.cdf(SINGULAR_EPS);
        breaks.push(SINGULAR_EPS);
    }

    breaks.retain(|x| x.is_finite() && *x >= 0.0 && *x <= 1.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let lo = if density.is_some_and(AlternativeDensity::singular_at_zero) { SINGULAR_EPS } else { 0.0 };
    let hi = if right_singular { 1.0 - SINGULAR_EPS } else { 1.0 };
    breaks.retain(|x| *x >= lo && *x <= hi);

    let body = integrate_pieces(&capped, &breaks, QUAD_TOL / 10.0)?;
    let total = head + body + tail;
    if !total.is_finite() {
        bail!(Validation, "integral diverges");
    }
    Ok(total)
}

fn capped_plain(spec: &AccumulationSpec, cap: f64, t: f64) -> f64 {
    spec.eval(t).min(cap)
}

impl fmt::Display for AccumulationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::ForwardStop => f.write_str("forwardstop"),
            Kind::SeqStep(c) => write!(f, "seqstep:C={c}"),
            Kind::HingeExp(c) => write!(f, "hingeexp:C={c}"),
            Kind::Piecewise(pc) => write!(f, "piecewise:{pc}"),
        }
    }
}

/// Parses `forwardstop`, `seqstep:C=2`, `hingeexp:C=2` or
/// `piecewise:0,0.5,0.4;0.5,1,1.6`.
impl FromStr for AccumulationSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r.trim())),
            None => (s, None),
        };
        match name.to_ascii_lowercase().as_str() {
            "forwardstop" => match rest {
                None | Some("") => Ok(Self::forward_stop()),
                Some(r) => Err(Error::Parse(alloc::format!("forwardstop takes no parameters, got `{r}`"))),
            },
            fam @ ("seqstep" | "hingeexp") => {
                let c = parse_c(rest)?;
                if fam == "seqstep" {
                    Self::seq_step(c)
                } else {
                    Self::hinge_exp(c)
                }
            }
            "piecewise" => {
                let body = rest.ok_or_else(|| Error::Parse("piecewise needs segments".into()))?;
                Self::piecewise(body.parse()?)
            }
            other => Err(Error::Parse(alloc::format!("unknown accumulation function `{other}`"))),
        }
    }
}

fn parse_c(rest: Option<&str>) -> Result<f64> {
    let rest = rest.ok_or_else(|| Error::Parse("missing parameter `C=<value>`".into()))?;
    let (key, value) =
        rest.split_once('=').ok_or_else(|| Error::Parse(alloc::format!("expected `C=<value>`, got `{rest}`")))?;
    if key.trim() != "C" {
        return Err(Error::Parse(alloc::format!("unknown parameter `{}`", key.trim())));
    }
    parse_f64("C", value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> AccumulationSpec {
        s.parse().unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(AccumulationSpec::forward_stop().evaluate(0.0).unwrap(), 0.0);
        let ss = spec("seqstep:C=2");
        assert_eq!(ss.evaluate(0.4).unwrap(), 0.0);
        assert_eq!(ss.evaluate(0.6).unwrap(), 2.0);
        let he = spec("hingeexp:C=2");
        assert!((he.evaluate(0.75).unwrap() - 2.0 * core::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(he.evaluate(0.5).unwrap(), 0.0);
    }

    #[test]
    fn unbounded_families_are_infinite_at_one() {
        assert_eq!(AccumulationSpec::forward_stop().evaluate(1.0).unwrap(), f64::INFINITY);
        assert_eq!(spec("hingeexp:C=3").evaluate(1.0).unwrap(), f64::INFINITY);
        assert_eq!(spec("seqstep:C=3").evaluate(1.0).unwrap(), 3.0);
    }

    #[test]
    fn evaluate_rejects_out_of_domain() {
        let fs = AccumulationSpec::forward_stop();
        assert!(matches!(fs.evaluate(-0.1), Err(Error::Domain(_))));
        assert!(matches!(fs.evaluate(1.5), Err(Error::Domain(_))));
        assert!(matches!(fs.evaluate(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn constructor_validation() {
        assert!(AccumulationSpec::seq_step(1.0).is_err());
        assert!(AccumulationSpec::hinge_exp(0.5).is_err());
        assert!(AccumulationSpec::seq_step(f64::INFINITY).is_err());
        assert!("piecewise:0,1,0.5".parse::<AccumulationSpec>().is_err());
    }

    #[test]
    fn unit_integral_examples() {
        let v = AccumulationSpec::forward_stop().unit_integral().unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
        let v = spec("seqstep:C=3").unit_integral().unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
        let v = spec("piecewise:0,0.5,0.4;0.5,1,1.6").unit_integral().unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn truncated_integral_examples() {
        let v = spec("seqstep:C=2").truncated_integral(2.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        // closed form 1 - 1/e
        let v = AccumulationSpec::forward_stop().truncated_integral(1.0).unwrap();
        assert!((v - 0.632_120_558_828_557_7).abs() < 1e-9, "{v}");
        let he = spec("hingeexp:C=2");
        assert_eq!(he.truncated_integral(0.0).unwrap(), 0.0);
        assert!(he.truncated_integral(1e-6).unwrap() < 1e-5);
        assert!((he.truncated_integral(f64::INFINITY).unwrap() - 1.0).abs() < 1e-9);
        assert!((he.truncated_integral(200.0).unwrap() - 1.0).abs() < 1e-9);
        assert!(he.truncated_integral(-1.0).is_err());
    }

    #[test]
    fn nonnull_mean_examples() {
        let uniform = AlternativeDensity::Uniform;
        for s in ["forwardstop", "seqstep:C=2", "hingeexp:C=3", "piecewise:0,0.5,0.4;0.5,1,1.6"] {
            let v = spec(s).nonnull_mean(&uniform).unwrap();
            assert!((v - 1.0).abs() < 1e-9, "{s}: {v}");
        }
        let tri = AlternativeDensity::beta(1.0, 2.0).unwrap();
        let v = spec("seqstep:C=2").nonnull_mean(&tri).unwrap();
        assert!((v - 0.5).abs() < 1e-9, "{v}");
    }

    #[test]
    fn nonnull_mean_under_z_alternative() {
        // mpmath quadrature in z-space, 30 digits
        let z2 = AlternativeDensity::two_sided_z(2.0).unwrap();
        let cases = [
            ("forwardstop", 0.229_808_406_327_326_36),
            ("seqstep:C=2", 0.177_517_665_712_123_14),
            ("hingeexp:C=2", 0.148_419_926_761_989_25),
        ];
        for (s, want) in cases {
            let v = spec(s).nonnull_mean(&z2).unwrap();
            assert!((v - want).abs() < 1e-8, "{s}: {v} vs {want}");
        }
    }

    #[test]
    fn text_round_trip() {
        for s in ["forwardstop", "seqstep:C=2", "hingeexp:C=2.5", "piecewise:0,0.5,0.4;0.5,1,1.6"] {
            assert_eq!(alloc::format!("{}", spec(s)), s);
        }
        assert_eq!(spec(" SeqStep:C=2 "), spec("seqstep:C=2"));
        assert!("seqstep".parse::<AccumulationSpec>().is_err());
        assert!("seqstep:c=2".parse::<AccumulationSpec>().is_err());
        assert!("bogus".parse::<AccumulationSpec>().is_err());
    }
}
