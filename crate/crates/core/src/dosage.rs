//! Dose-response screening: rank genes by high-dose evidence, then test
//! the low dose against control with sign-directed permutation p-values.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use itertools::Itertools;

use crate::baselines::{bh_select, storey_select, STOREY_LAMBDA};
use crate::error::{bail, Error, Result};
use crate::seqtest::{select_cutoff, shift_discrete_pvalues, Method, OrderedPValues};
use crate::welch::{welch_p_two_sided, welch_statistic, Alternative, Sign};

/// Largest number of partitions enumerated per gene.
pub const MAX_PARTITIONS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    Control,
    Low,
    High,
}

impl Group {
    /// `C*`, `L*` or `H*` (case-insensitive first letter).
    pub fn from_label(label: &str) -> Option<Self> {
        match label.trim().chars().next()?.to_ascii_uppercase() {
            'C' => Some(Group::Control),
            'L' => Some(Group::Low),
            'H' => Some(Group::High),
            _ => None,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::Control => "control",
            Group::Low => "low",
            Group::High => "high",
        })
    }
}

/// Genes × trials log-expression values.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionMatrix {
    gene_ids: Vec<String>,
    rows: Vec<Vec<f64>>,
    groups: Vec<Group>,
}

impl ExpressionMatrix {
    pub fn new(gene_ids: Vec<String>, rows: Vec<Vec<f64>>, groups: Vec<Group>) -> Result<Self> {
        if gene_ids.len() != rows.len() {
            bail!(Validation, "{} gene ids for {} rows", gene_ids.len(), rows.len());
        }
        if gene_ids.is_empty() {
            bail!(Validation, "expression matrix has no genes");
        }
        for g in [Group::Control, Group::Low, Group::High] {
            match groups.iter().filter(|&&x| x == g).count() {
                0 => bail!(Validation, "no trials in the {g} group"),
                1 => bail!(Validation, "the {g} group needs at least two trials for the t-test"),
                _ => {}
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != groups.len() {
                bail!(Validation, "gene `{}` has {} values, expected {}", gene_ids[i], row.len(), groups.len());
            }
            if let Some(j) = row.iter().position(|x| !x.is_finite()) {
                bail!(Validation, "gene `{}` has a non-finite value in trial column {}", gene_ids[i], j + 1);
            }
        }
        Ok(Self { gene_ids, rows, groups })
    }

    pub fn n_genes(&self) -> usize {
        self.rows.len()
    }

    pub fn gene_ids(&self) -> &[String] {
        &self.gene_ids
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn row(&self, gene: usize) -> &[f64] {
        &self.rows[gene]
    }

    pub fn group_size(&self, g: Group) -> usize {
        self.groups.iter().filter(|&&x| x == g).count()
    }

    /// Values of `gene` in the trials of group `g`, in column order.
    pub fn values(&self, gene: usize, g: Group) -> Vec<f64> {
        self.rows[gene].iter().zip(&self.groups).filter(|(_, &x)| x == g).map(|(v, _)| *v).collect()
    }
}

/// C(n, k), or `None` above `MAX_PARTITIONS`.
fn partition_count(n: usize, k: usize) -> Option<u64> {
    let k = k.min(n - k) as u64;
    let mut c: u64 = 1;
    for i in 0..k {
        c = c.checked_mul(n as u64 - i)? / (i + 1);
        if c > MAX_PARTITIONS {
            return None;
        }
    }
    Some(c)
}

/// Result of a permutation test: p = count / partitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermutationPValue {
    pub count: u64,
    pub partitions: u64,
    /// The Welch p-value under the true labels.
    pub p_init: f64,
}

impl PermutationPValue {
    pub fn value(&self) -> f64 {
        self.count as f64 / self.partitions as f64
    }
}

fn check_split(values: &[f64], m_c: usize, m_l: usize) -> Result<u64> {
    if m_c < 2 || m_l < 2 {
        bail!(Contract, "each group needs at least two trials, got {m_c} control and {m_l} low");
    }
    if values.len() != m_c + m_l {
        bail!(Contract, "expected {} values, got {}", m_c + m_l, values.len());
    }
    match partition_count(m_c + m_l, m_c) {
        Some(p) => Ok(p),
        None => bail!(Contract, "C({}, {m_c}) exceeds {MAX_PARTITIONS} partitions; subsample the trials", m_c + m_l),
    }
}

/// Welch p-values of low against control for every split of `values` into
/// a pseudo-control set of size m_C and a pseudo-low set of size m_L, with
/// pseudo-control index sets in lexicographic order. `values` holds the
/// m_C control values followed by the m_L low values, so entry 0 is the
/// true labelling.
pub fn partition_pvalues(values: &[f64], m_c: usize, m_l: usize, alt: Alternative) -> Result<Vec<f64>> {
    let partitions = check_split(values, m_c, m_l)?;
    let mut out = Vec::with_capacity(partitions as usize);
    let mut control = Vec::with_capacity(m_c);
    let mut low = Vec::with_capacity(m_l);
    for chosen in (0..m_c + m_l).combinations(m_c) {
        control.clear();
        low.clear();
        let mut next = chosen.iter().peekable();
        for (j, &v) in values.iter().enumerate() {
            if next.peek() == Some(&&j) {
                next.next();
                control.push(v);
            } else {
                low.push(v);
            }
        }
        out.push(welch_statistic(&low, &control)?.p_value(alt));
    }
    Ok(out)
}

/// Permutation p-value of the Welch test of low against control: the
/// fraction of splits whose p-value is at most the one under the true
/// labels. Lies on the grid k/P with k ≥ 1.
pub fn permutation_pvalue(values: &[f64], m_c: usize, m_l: usize, alt: Alternative) -> Result<PermutationPValue> {
    let all = partition_pvalues(values, m_c, m_l, alt)?;
    let p_init = all[0];
    let count = all.iter().filter(|&&p| p <= p_init).count() as u64;
    Ok(PermutationPValue { count, partitions: all.len() as u64, p_init })
}

/// Everything computed for one gene.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneRecord {
    pub original_index: usize,
    /// Two-sided Welch p-value, high against control ∪ low.
    pub p_high: f64,
    pub sign: Sign,
    /// Sign-directed Welch p-value, low against control.
    pub p_init: f64,
    /// Sign-directed permutation p-value, on the grid k/partitions.
    pub p_final: f64,
    pub partitions: u64,
    /// Two-sided Welch p-value, low against control.
    pub p_ttest: f64,
    /// Two-sided permutation p-value, low against control.
    pub p_perm: f64,
}

pub fn gene_record(matrix: &ExpressionMatrix, gene: usize) -> Result<GeneRecord> {
    let control = matrix.values(gene, Group::Control);
    let low = matrix.values(gene, Group::Low);
    let high = matrix.values(gene, Group::High);
    let mut pooled = control.clone();
    pooled.extend_from_slice(&low);

    let hs = welch_statistic(&high, &pooled)?;
    let sign = Sign::of(hs.mean_diff);
    let directed = permutation_pvalue(&pooled, control.len(), low.len(), sign.into())?;
    let two_sided = permutation_pvalue(&pooled, control.len(), low.len(), Alternative::TwoSided)?;
    Ok(GeneRecord {
        original_index: gene,
        p_high: hs.p_value(Alternative::TwoSided),
        sign,
        p_init: directed.p_init,
        p_final: directed.value(),
        partitions: directed.partitions,
        p_ttest: welch_p_two_sided(&low, &control)?,
        p_perm: two_sided.value(),
    })
}

/// Gene indices sorted by p_high ascending, ties by index.
pub fn high_dose_ordering(records: &[GeneRecord]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&i, &j| {
        records[i].p_high.total_cmp(&records[j].p_high).then(records[i].original_index.cmp(&records[j].original_index))
    });
    order
}

/// Which unordered p-values a baseline uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineInput {
    TTest,
    Permutation,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PipelineMethod {
    /// Accumulation test on the high-dose-ordered permutation p-values.
    Accumulation(Method),
    Bh(BaselineInput),
    Storey {
        input: BaselineInput,
        lambda: f64,
    },
}

impl PipelineMethod {
    /// SeqStep, SeqStep+, ForwardStop, HingeExp (C = 2) and the four
    /// BH/Storey baselines.
    pub fn default_set() -> Vec<Self> {
        let mut out: Vec<Self> = Method::standard_set().into_iter().map(Self::Accumulation).collect();
        for input in [BaselineInput::TTest, BaselineInput::Permutation] {
            out.push(Self::Bh(input));
        }
        for input in [BaselineInput::TTest, BaselineInput::Permutation] {
            out.push(Self::Storey { input, lambda: STOREY_LAMBDA });
        }
        out
    }
}

impl fmt::Display for PipelineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let input = |i: &BaselineInput| match i {
            BaselineInput::TTest => "ttest",
            BaselineInput::Permutation => "perm",
        };
        match self {
            Self::Accumulation(m) => write!(f, "{m}"),
            Self::Bh(i) => write!(f, "bh-{}", input(i)),
            Self::Storey { input: i, lambda } if *lambda == STOREY_LAMBDA => write!(f, "storey-{}", input(i)),
            Self::Storey { input: i, lambda } => write!(f, "storey-{}@{lambda}", input(i)),
        }
    }
}

/// `bh-ttest`, `bh-perm`, `storey-ttest`, `storey-perm` (optionally
/// `@<lambda>`), or any accumulation method string.
impl FromStr for PipelineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let lower = s.to_ascii_lowercase();
        let input = |x: &str| match x {
            "ttest" => Some(BaselineInput::TTest),
            "perm" => Some(BaselineInput::Permutation),
            _ => None,
        };
        if let Some(rest) = lower.strip_prefix("bh-") {
            return input(rest).map(Self::Bh).ok_or_else(|| Error::Parse(alloc::format!("unknown BH input `{rest}`")));
        }
        if let Some(rest) = lower.strip_prefix("storey-") {
            let (name, lambda) = match rest.split_once('@') {
                Some((n, l)) => (n, crate::piecewise::parse_f64("lambda", l)?),
                None => (rest, STOREY_LAMBDA),
            };
            if !(lambda > 0.0 && lambda < 1.0) {
                return Err(Error::Parse(alloc::format!("lambda must lie in (0, 1), got {lambda}")));
            }
            let i = input(name).ok_or_else(|| Error::Parse(alloc::format!("unknown Storey input `{name}`")))?;
            return Ok(Self::Storey { input: i, lambda });
        }
        Ok(Self::Accumulation(s.parse()?))
    }
}

/// Discoveries for one method at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveryRow {
    pub method: String,
    pub alpha: f64,
    pub discoveries: usize,
}

/// Applies every method at every level to precomputed gene records.
///
/// Accumulation tests run on p_final in high-dose order, shifted from the
/// grid k/P to k/(P + 1) when h is unbounded; α = 0 yields no discoveries.
/// Baselines use the unordered two-sided p-values.
pub fn discovery_table(
    records: &[GeneRecord],
    methods: &[PipelineMethod],
    alpha_grid: &[f64],
) -> Result<Vec<DiscoveryRow>> {
    if records.is_empty() {
        bail!(Domain, "no genes");
    }
    if let Some(a) = alpha_grid.iter().find(|a| !(**a >= 0.0 && **a < 1.0)) {
        bail!(Domain, "alpha {a} is outside [0, 1)");
    }
    let order = high_dose_ordering(records);
    let ordered = OrderedPValues::new(order.iter().map(|&i| records[i].p_final).collect())?;
    let partitions = records[0].partitions;
    if records.iter().any(|r| r.partitions != partitions) {
        bail!(Contract, "gene records disagree on the number of partitions");
    }
    let shifted = shift_discrete_pvalues(&ordered, partitions)?;
    let ttest: Vec<f64> = records.iter().map(|r| r.p_ttest).collect();
    let perm: Vec<f64> = records.iter().map(|r| r.p_perm).collect();
    let pick = |i: &BaselineInput| match i {
        BaselineInput::TTest => &ttest,
        BaselineInput::Permutation => &perm,
    };

    let mut rows = Vec::with_capacity(methods.len() * alpha_grid.len());
    for m in methods {
        let name = alloc::format!("{m}");
        let path = match m {
            PipelineMethod::Accumulation(acc) => {
                let input = if acc.spec.is_unbounded() { &shifted } else { &ordered };
                Some(acc.path(input)?)
            }
            _ => None,
        };
        for &alpha in alpha_grid {
            let discoveries = match m {
                PipelineMethod::Accumulation(_) if alpha == 0.0 => 0,
                PipelineMethod::Accumulation(_) => select_cutoff(path.as_ref().unwrap(), alpha)?,
                PipelineMethod::Bh(i) => bh_select(pick(i), alpha)?.count,
                PipelineMethod::Storey { input, lambda } => storey_select(pick(input), alpha, *lambda)?.count,
            };
            rows.push(DiscoveryRow { method: name.clone(), alpha, discoveries });
        }
    }
    Ok(rows)
}

/// Sequential end-to-end pipeline.
pub fn run_pipeline(
    matrix: &ExpressionMatrix,
    methods: &[PipelineMethod],
    alpha_grid: &[f64],
) -> Result<Vec<DiscoveryRow>> {
    let records = (0..matrix.n_genes()).map(|g| gene_record(matrix, g)).collect::<Result<Vec<_>>>()?;
    discovery_table(&records, methods, alpha_grid)
}
