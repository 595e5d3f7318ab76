//! Estimated-FDP paths, adaptive cutoffs and ground-truth error metrics for
//! ordered hypothesis lists.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::accumfn::AccumulationSpec;
use crate::error::{bail, Error, Result};
use crate::piecewise::parse_f64;

/// p-values in rank order, optionally with the ground-truth null mask
/// (`true` ⇔ the hypothesis is null).
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedPValues {
    values: Vec<f64>,
    null_mask: Option<Vec<bool>>,
}

impl OrderedPValues {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, p)) = values.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            bail!(Validation, "p-value {p} at rank {} is outside [0, 1]", i + 1);
        }
        Ok(Self { values, null_mask: None })
    }

    pub fn with_mask(values: Vec<f64>, null_mask: Vec<bool>) -> Result<Self> {
        if values.len() != null_mask.len() {
            bail!(Validation, "null mask has {} entries but there are {} p-values", null_mask.len(), values.len());
        }
        let mut out = Self::new(values)?;
        out.null_mask = Some(null_mask);
        Ok(out)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn null_mask(&self) -> Option<&[bool]> {
        self.null_mask.as_deref()
    }

    /// The null mask, or a contract error when ground truth is absent.
    pub fn require_mask(&self) -> Result<&[bool]> {
        match &self.null_mask {
            Some(m) => Ok(m),
            None => bail!(Contract, "operation needs the ground-truth null mask"),
        }
    }

    pub fn into_parts(self) -> (Vec<f64>, Option<Vec<bool>>) {
        (self.values, self.null_mask)
    }
}

/// How the running sum is turned into an FDP estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    /// Σ_{i≤k} h(p_i) / k
    Plain,
    /// (c + Σ_{i≤k} h(p_i)) / (1 + k)
    PlusC(f64),
}

/// Output of an accumulation test.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffResult {
    pub k_hat: usize,
    /// Entry `k - 1` is the estimate at cutoff k.
    pub fdp_hat_path: Vec<f64>,
    pub rule: Rule,
    pub alpha: f64,
}

fn check_nonempty(pvals: &OrderedPValues) -> Result<()> {
    if pvals.is_empty() {
        bail!(Domain, "need at least one p-value");
    }
    Ok(())
}

/// FDP̂_h(k) = (1/k) Σ_{i≤k} h(p_i) for k = 1..n. Entries may be +∞.
pub fn estimated_fdp_path(pvals: &OrderedPValues, spec: &AccumulationSpec) -> Result<Vec<f64>> {
    check_nonempty(pvals)?;
    let mut sum = 0.0;
    Ok(pvals
        .values()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            sum += spec.eval(p);
            sum / (i + 1) as f64
        })
        .collect())
}

/// (c + Σ_{i≤k} h(p_i)) / (1 + k) for k = 1..n.
pub fn estimated_fdp_path_plus(pvals: &OrderedPValues, spec: &AccumulationSpec, c: f64) -> Result<Vec<f64>> {
    check_nonempty(pvals)?;
    if !(c > 0.0) || !c.is_finite() {
        bail!(Domain, "offset c must be positive and finite, got {c}");
    }
    let mut sum = c;
    Ok(pvals
        .values()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            sum += spec.eval(p);
            sum / (i + 2) as f64
        })
        .collect())
}

/// Path for either rule.
pub fn fdp_path(pvals: &OrderedPValues, spec: &AccumulationSpec, rule: Rule) -> Result<Vec<f64>> {
    match rule {
        Rule::Plain => estimated_fdp_path(pvals, spec),
        Rule::PlusC(c) => estimated_fdp_path_plus(pvals, spec, c),
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        bail!(Domain, "target level alpha must lie in (0, 1), got {alpha}");
    }
    Ok(())
}

/// max{k : path[k] ≤ α}, or 0 if no entry qualifies. Every k is
/// considered, not just the first crossing.
pub fn select_cutoff(path: &[f64], alpha: f64) -> Result<usize> {
    check_alpha(alpha)?;
    if path.is_empty() {
        bail!(Domain, "estimated-FDP path is empty");
    }
    Ok(path.iter().rposition(|&v| v <= alpha).map_or(0, |i| i + 1))
}

/// Runs the full test: path, then cutoff.
pub fn accumulation_test(
    pvals: &OrderedPValues,
    spec: &AccumulationSpec,
    rule: Rule,
    alpha: f64,
) -> Result<CutoffResult> {
    check_alpha(alpha)?;
    let fdp_hat_path = fdp_path(pvals, spec, rule)?;
    let k_hat = select_cutoff(&fdp_hat_path, alpha)?;
    Ok(CutoffResult { k_hat, fdp_hat_path, rule, alpha })
}

fn false_positives(k: usize, null_mask: &[bool]) -> Result<usize> {
    if k > null_mask.len() {
        bail!(Domain, "cutoff {k} exceeds list length {}", null_mask.len());
    }
    Ok(null_mask[..k].iter().filter(|&&null| null).count())
}

/// #{i ≤ k : i null} / max(1, k).
pub fn fdp(k: usize, null_mask: &[bool]) -> Result<f64> {
    let fp = false_positives(k, null_mask)?;
    Ok(fp as f64 / k.max(1) as f64)
}

/// #{i ≤ k : i null} / (c + k), with the value 0 at k = 0.
pub fn mfdp(k: usize, null_mask: &[bool], c: f64) -> Result<f64> {
    if !(c >= 0.0) {
        bail!(Domain, "mFDP offset must be nonnegative, got {c}");
    }
    let fp = false_positives(k, null_mask)?;
    if k == 0 {
        return Ok(0.0);
    }
    Ok(fp as f64 / (c + k as f64))
}

/// Fraction of all non-nulls found among the first k hypotheses.
pub fn power_of_cutoff(k: usize, null_mask: &[bool]) -> Result<f64> {
    let total = null_mask.iter().filter(|&&null| !null).count();
    if total == 0 {
        bail!(Contract, "power is undefined without non-null hypotheses");
    }
    let fp = false_positives(k, null_mask)?;
    Ok((k - fp) as f64 / total as f64)
}

/// Maps p-values on the grid {j/m : j = 1..m} to j/(m+1), so that no value
/// equals 1 and unbounded accumulation functions stay finite.
pub fn shift_discrete_pvalues(pvals: &OrderedPValues, grid_size: u64) -> Result<OrderedPValues> {
    if grid_size == 0 {
        bail!(Domain, "grid size must be positive");
    }
    let m = grid_size as f64;
    let mut out = Vec::with_capacity(pvals.len());
    for (i, &p) in pvals.values().iter().enumerate() {
        let j = libm::round(p * m);
        if !(j >= 1.0 && j <= m) || libm::fabs(p - j / m) > 1e-12 {
            bail!(Validation, "p-value {p} at rank {} is not on the grid k/{grid_size}", i + 1);
        }
        out.push(j / (m + 1.0));
    }
    Ok(OrderedPValues { values: out, null_mask: pvals.null_mask.clone() })
}

/// An accumulation function together with its cutoff rule.
///
/// Text form: the spec string for the plain rule (`hingeexp:C=2`); a `+`
/// after the family name selects the "+c" rule with c defaulting to C
/// (`seqstep+:C=2`); `@<c>` at the end sets c explicitly
/// (`forwardstop+@2`).
#[derive(Debug, Clone, PartialEq)]
pub struct Method {
    pub spec: AccumulationSpec,
    pub rule: Rule,
}

impl Method {
    pub fn plain(spec: AccumulationSpec) -> Self {
        Self { spec, rule: Rule::Plain }
    }

    pub fn plus(spec: AccumulationSpec, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            bail!(Domain, "offset c must be positive and finite, got {c}");
        }
        Ok(Self { spec, rule: Rule::PlusC(c) })
    }

    /// SeqStep, SeqStep+, ForwardStop and HingeExp, all with C = 2.
    pub fn standard_set() -> Vec<Method> {
        let seq = AccumulationSpec::seq_step(2.0).expect("C = 2 is valid");
        alloc::vec![
            Method::plain(seq.clone()),
            Method::plus(seq, 2.0).expect("c = 2 is valid"),
            Method::plain(AccumulationSpec::forward_stop()),
            Method::plain(AccumulationSpec::hinge_exp(2.0).expect("C = 2 is valid")),
        ]
    }

    pub fn path(&self, pvals: &OrderedPValues) -> Result<Vec<f64>> {
        fdp_path(pvals, &self.spec, self.rule)
    }

    pub fn run(&self, pvals: &OrderedPValues, alpha: f64) -> Result<CutoffResult> {
        accumulation_test(pvals, &self.spec, self.rule, alpha)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let spec = alloc::format!("{}", self.spec);
        match self.rule {
            Rule::Plain => f.write_str(&spec),
            Rule::PlusC(c) => {
                let (name, rest) = match spec.split_once(':') {
                    Some((n, r)) => (n, Some(r)),
                    None => (spec.as_str(), None),
                };
                write!(f, "{name}+")?;
                if let Some(r) = rest {
                    write!(f, ":{r}")?;
                }
                if self.spec.c_param() != Some(c) {
                    write!(f, "@{c}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (body, explicit_c) = match s.rsplit_once('@') {
            Some((b, c)) => (b, Some(parse_f64("c", c)?)),
            None => (s, None),
        };
        let (name, rest) = match body.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r)),
            None => (body.trim(), None),
        };
        let (name, plus) = match name.strip_suffix('+') {
            Some(n) => (n, true),
            None => (name, false),
        };
        let spec_text = match rest {
            Some(r) => alloc::format!("{name}:{r}"),
            None => alloc::string::String::from(name),
        };
        let spec: AccumulationSpec = spec_text.parse()?;
        if !plus {
            if explicit_c.is_some() {
                return Err(Error::Parse(alloc::format!("`@c` only applies to the + rule in `{s}`")));
            }
            return Ok(Method::plain(spec));
        }
        let c = explicit_c
            .or(spec.c_param())
            .ok_or_else(|| Error::Parse(alloc::format!("`{s}` needs an explicit offset, e.g. `{name}+@2`")))?;
        Method::plus(spec, c)
    }
}
