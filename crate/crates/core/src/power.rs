//! Asymptotic power under a limiting signal curve, the bounded-optimality
//! gap of the step function, and the random-walk envelope.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::accumfn::{AccumulationSpec, SINGULAR_EPS};
use crate::density::AlternativeDensity;
use crate::error::{bail, Error, Result};
use crate::piecewise::parse_f64;
use crate::quad::integrate_pieces;

/// Number of grid points used to validate a signal curve.
pub const CURVE_GRID: usize = 10_000;
/// Slack on finite-difference derivative checks.
pub const CURVE_SLACK: f64 = 1e-8;

/// Piecewise-linear limiting proportion of non-nulls f on [0, 1].
///
/// Text form: `f:t0,f0;t1,f1;...` with t0 = 0 < t1 < ... < tk = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalCurve {
    knots: Vec<(f64, f64)>,
    delta: f64,
}

impl SignalCurve {
    pub fn new(knots: Vec<(f64, f64)>, delta: f64) -> Result<Self> {
        if knots.len() < 2 {
            bail!(Validation, "signal curve needs at least two knots");
        }
        if knots[0].0 != 0.0 || knots[knots.len() - 1].0 != 1.0 {
            bail!(Validation, "signal curve knots must run from t = 0 to t = 1");
        }
        if knots.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            bail!(Validation, "signal curve knots must be strictly increasing in t");
        }
        if let Some((t, v)) = knots.iter().find(|(_, v)| !v.is_finite()) {
            bail!(Validation, "signal curve value at t = {t} is not finite: {v}");
        }
        if !(delta > 0.0) || !delta.is_finite() {
            bail!(Validation, "steepness delta must be positive, got {delta}");
        }
        Ok(Self { knots, delta })
    }

    /// f(t) = a + b·t.
    pub fn affine(a: f64, b: f64, delta: f64) -> Result<Self> {
        Self::new(alloc::vec![(0.0, a), (1.0, a + b)], delta)
    }

    pub fn constant(value: f64, delta: f64) -> Result<Self> {
        Self::affine(value, 0.0, delta)
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            bail!(Validation, "steepness delta must be positive, got {delta}");
        }
        self.delta = delta;
        Ok(self)
    }

    /// Linear interpolation; `t` is clamped to [0, 1].
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let j = self.knots.partition_point(|k| k.0 <= t);
        if j >= self.knots.len() {
            return self.knots[self.knots.len() - 1].1;
        }
        let (t0, f0) = self.knots[j - 1];
        let (t1, f1) = self.knots[j];
        f0 + (f1 - f0) * (t - t0) / (t1 - t0)
    }
}

impl fmt::Display for SignalCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("f:")?;
        for (i, (t, v)) in self.knots.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{t},{v}")?;
        }
        Ok(())
    }
}

/// Parses the knot list; δ defaults to 1e−6 (override with [`SignalCurve::with_delta`]).
impl FromStr for SignalCurve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let body = s.strip_prefix("f:").unwrap_or(s);
        let mut knots = Vec::new();
        for pair in body.split(';') {
            let (t, v) =
                pair.split_once(',').ok_or_else(|| Error::Parse(alloc::format!("knot `{pair}` must be `t,f(t)`")))?;
            knots.push((parse_f64("t", t)?, parse_f64("f(t)", v)?));
        }
        Self::new(knots, 1e-6)
    }
}

/// A condition on f checked by [`validate_signal_curve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Condition {
    /// f(t) ∈ [0, 1].
    Range,
    /// f′ ≤ 0.
    Nonincreasing,
    /// f′ ≤ −δ wherever f ≥ 1 − α.
    Steepness,
    /// t·f(t) nondecreasing.
    CountNondecreasing,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Range => "f must map [0,1] into [0,1]",
            Condition::Nonincreasing => "f must be nonincreasing",
            Condition::Steepness => "f' must be <= -delta where f >= 1 - alpha",
            Condition::CountNondecreasing => "t*f(t) must be nondecreasing",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub condition: Condition,
    /// First grid point where the condition fails.
    pub t: f64,
    /// The offending value: f(t) for range, otherwise the estimated slope.
    pub value: f64,
}

/// First violation of each condition, in condition order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveReport {
    pub violations: Vec<Violation>,
}

impl CurveReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, c: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == c)
    }

    /// The violation at the smallest t.
    pub fn first(&self) -> Option<&Violation> {
        self.violations.iter().min_by(|a, b| a.t.total_cmp(&b.t))
    }

    /// True when range, monotonicity or count monotonicity fails.
    pub fn structurally_invalid(&self) -> bool {
        self.violations.iter().any(|v| v.condition != Condition::Steepness)
    }
}

/// Checks the three shape conditions plus the range of f on a uniform grid,
/// using central differences (one-sided at the ends).
pub fn validate_signal_curve(curve: &SignalCurve, alpha: f64) -> CurveReport {
    let n = CURVE_GRID;
    let step = 1.0 / (n - 1) as f64;
    let grid = |i: usize| if i + 1 == n { 1.0 } else { i as f64 * step };
    let f: Vec<f64> = (0..n).map(|i| curve.eval(grid(i))).collect();
    let slope = |i: usize, g: &dyn Fn(usize) -> f64| {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(n - 1);
        (g(hi) - g(lo)) / (grid(hi) - grid(lo))
    };

    let mut found: [Option<Violation>; 4] = [None; 4];
    let mut note = |c: Condition, t: f64, value: f64| {
        let slot = &mut found[c as usize];
        if slot.is_none() {
            *slot = Some(Violation { condition: c, t, value });
        }
    };
    let fv = |i: usize| f[i];
    let count = |i: usize| grid(i) * f[i];
    for (i, &fi) in f.iter().enumerate() {
        let t = grid(i);
        if !(0.0..=1.0).contains(&fi) {
            note(Condition::Range, t, fi);
        }
        let d = slope(i, &fv);
        if d > CURVE_SLACK {
            note(Condition::Nonincreasing, t, d);
        }
        if fi >= 1.0 - alpha && d > -curve.delta + CURVE_SLACK {
            note(Condition::Steepness, t, d);
        }
        let dc = slope(i, &count);
        if dc < -CURVE_SLACK {
            note(Condition::CountNondecreasing, t, dc);
        }
    }
    CurveReport { violations: found.into_iter().flatten().collect() }
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu < 1.0) {
        bail!(Domain, "mu must lie in (0, 1), got {mu}");
    }
    Ok(())
}

fn describe(report: &CurveReport, keep: impl Fn(&Violation) -> bool) -> alloc::string::String {
    let mut out = alloc::string::String::new();
    for v in report.violations.iter().filter(|v| keep(v)) {
        if !out.is_empty() {
            out.push_str("; ");
        }
        out.push_str(&alloc::format!("{} (fails at t = {}, value {})", v.condition, v.t, v.value));
    }
    out
}

/// The limiting relative cutoff T.
///
/// Errors with a contract error when f fails range, monotonicity or count
/// monotonicity, or when T falls strictly inside (0, 1) and f is not
/// steep enough where f ≥ 1 − α. The steepness condition does not affect
/// the two boundary cases.
pub fn asymptotic_threshold(curve: &SignalCurve, alpha: f64, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    if !(0.0..=1.0).contains(&alpha) {
        bail!(Domain, "alpha must lie in [0, 1], got {alpha}");
    }
    let report = validate_signal_curve(curve, alpha);
    if report.structurally_invalid() {
        bail!(Contract, "signal curve is invalid: {}", describe(&report, |v| v.condition != Condition::Steepness));
    }
    let target = (1.0 - alpha) / (1.0 - mu);
    let (f0, f1) = (curve.eval(0.0), curve.eval(1.0));
    if target >= f0 {
        return Ok(0.0);
    }
    if target <= f1 {
        return Ok(1.0);
    }
    if report.violates(Condition::Steepness) {
        bail!(Contract, "signal curve is invalid: {}", describe(&report, |v| v.condition == Condition::Steepness));
    }
    // Largest t with f(t) ≥ target: invariant f(lo) ≥ target > f(hi).
    // Runs until the bracket holds adjacent doubles.
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if curve.eval(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Limiting power T·f(T)/f(1).
pub fn asymptotic_power(curve: &SignalCurve, alpha: f64, mu: f64) -> Result<f64> {
    let f1 = curve.eval(1.0);
    if f1 <= 0.0 {
        bail!(Contract, "limiting power is undefined when f(1) = 0");
    }
    let t = asymptotic_threshold(curve, alpha, mu)?;
    Ok(t * curve.eval(t) / f1)
}

/// E(t) = 1 − f(t)(1 − μ), the limiting estimated FDP at relative cutoff t.
pub fn expected_fdp_curve(curve: &SignalCurve, mu: f64, t: f64) -> f64 {
    1.0 - curve.eval(t) * (1.0 - mu)
}

/// The optimal c-bounded accumulation function c·1{t > 1 − 1/c}.
fn step_h0(c: f64, t: f64) -> f64 {
    if c == 1.0 || t > 1.0 - 1.0 / c {
        c
    } else {
        0.0
    }
}

/// E[h(p)] − E[h₀(p)] for p drawn from `density`, where h₀ is the step
/// function with bound `c`. Nonnegative whenever h ≤ c and the density is
/// nonincreasing.
pub fn lemma2_gap(spec: &AccumulationSpec, c: f64, density: &AlternativeDensity) -> Result<f64> {
    if !(c >= 1.0) || !c.is_finite() {
        bail!(Domain, "bound c must be finite and at least 1, got {c}");
    }
    let Some(sup) = spec.upper_bound() else {
        bail!(Contract, "accumulation function `{spec}` is unbounded");
    };
    if sup > c {
        bail!(Contract, "accumulation function `{spec}` exceeds the bound {c} (sup = {sup})");
    }
    density.validate()?;
    if !density.is_nonincreasing() {
        bail!(Contract, "alternative density must be nonincreasing");
    }

    let diff = |t: f64| spec.eval(t) - step_h0(c, t);
    let integrand = |t: f64| {
        let d = diff(t);
        if d == 0.0 {
            0.0
        } else {
            d * density.pdf(t)
        }
    };
    let singular = density.singular_at_zero();
    let lo = if singular { SINGULAR_EPS } else { 0.0 };
    let head = if singular { diff(0.0) * density.cdf(SINGULAR_EPS) } else { 0.0 };

    let mut breaks: Vec<f64> = alloc::vec![lo, 1.0];
    breaks.extend(spec.kinks());
    breaks.extend(density.breakpoints());
    if singular {
        breaks.extend([1e-10, 1e-8, 1e-6, 1e-4, 1e-2]);
    }
    if c > 1.0 {
        breaks.push(1.0 - 1.0 / c);
    }
    breaks.retain(|x| *x >= lo && *x <= 1.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    Ok(head + integrate_pieces(&integrand, &breaks, 1e-12)?)
}

/// √(2 log₂(4/ε)) · max{σ, b √(2 log₂(4/ε))} · √(t ln(1 + t)).
pub fn lemma5_envelope(sigma2: f64, b: f64, epsilon: f64, t: f64) -> Result<f64> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        bail!(Domain, "sigma^2 must be positive, got {sigma2}");
    }
    if !(b >= 0.0) || !b.is_finite() {
        bail!(Domain, "b must be nonnegative, got {b}");
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        bail!(Domain, "epsilon must lie in (0, 1], got {epsilon}");
    }
    if !(t >= 1.0) {
        bail!(Domain, "t must be at least 1, got {t}");
    }
    let r = libm::sqrt(2.0 * libm::log2(4.0 / epsilon));
    Ok(r * libm::sqrt(sigma2).max(b * r) * libm::sqrt(t * libm::log1p(t)))
}
