//! Monte Carlo protocol for ordered testing with informative priors, plus
//! simulation checks of the supermartingale, envelope and subexponential
//! statements.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::accumfn::AccumulationSpec;
use crate::density::AlternativeDensity;
use crate::error::{bail, Result};
use crate::power::{lemma5_envelope, validate_signal_curve, SignalCurve};
use crate::rng::stream;
use crate::seqtest::{fdp, power_of_cutoff, Method, OrderedPValues};
use crate::special::two_sided_z_pvalue;
use crate::stats::{pairwise_sum, MeanSe};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub n_nonnull: usize,
    /// Mean of the prior score for non-nulls.
    pub mu1: f64,
    /// Mean of the test statistic for non-nulls.
    pub mu2: f64,
    pub alpha_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

/// 0.05, 0.075, ..., 0.25.
pub fn default_alpha_grid() -> Vec<f64> {
    (2..=10).map(|k| k as f64 / 40.0).collect()
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { n: 1000, n_nonnull: 100, mu1: 3.0, mu2: 3.0, alpha_grid: default_alpha_grid(), trials: 50, seed: 0 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_nonnull > 0 && self.n_nonnull < self.n) {
            bail!(Validation, "need 0 < n_nonnull < n, got n_nonnull = {} and n = {}", self.n_nonnull, self.n);
        }
        if !self.mu1.is_finite() || !self.mu2.is_finite() {
            bail!(Validation, "signal means must be finite");
        }
        if self.alpha_grid.is_empty() {
            bail!(Validation, "alpha grid is empty");
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            bail!(Validation, "alpha {a} is outside (0, 1)");
        }
        if self.trials == 0 {
            bail!(Validation, "need at least one trial");
        }
        Ok(())
    }
}

/// One trial: hypotheses ranked by a noisy prior score, with independent
/// two-sided z-test p-values. Hypotheses 0..n_nonnull are the non-nulls
/// before ranking.
pub fn generate_ranked_trial(config: &SimConfig, trial: u64) -> Result<OrderedPValues> {
    config.validate()?;
    let mut rng = stream(config.seed, trial);
    let n = config.n;
    let is_nonnull = |i: usize| i < config.n_nonnull;
    let mut draw = |mean: f64| -> f64 {
        let z: f64 = StandardNormal.sample(&mut rng);
        z + mean
    };
    let prior: Vec<f64> = (0..n).map(|i| draw(if is_nonnull(i) { config.mu1 } else { 0.0 })).collect();
    let stat: Vec<f64> = (0..n).map(|i| draw(if is_nonnull(i) { config.mu2 } else { 0.0 })).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| prior[j].abs().total_cmp(&prior[i].abs()).then(i.cmp(&j)));
    let values = order.iter().map(|&i| two_sided_z_pvalue(stat[i])).collect();
    let mask = order.iter().map(|&i| !is_nonnull(i)).collect();
    OrderedPValues::with_mask(values, mask)
}

/// Outcome of one method at one level in one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialCell {
    pub k_hat: usize,
    pub false_pos: usize,
    pub power: f64,
    pub fdp: f64,
}

impl TrialCell {
    /// FalsePos/(c + k̂), 0 when nothing is rejected.
    pub fn mfdp(&self, c: f64) -> f64 {
        if self.k_hat == 0 {
            0.0
        } else {
            self.false_pos as f64 / (c + self.k_hat as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialTable {
    /// `cells[m][a]` for method m and level alpha_grid[a].
    pub cells: Vec<Vec<TrialCell>>,
    /// Estimated-FDP path per method, when requested.
    pub fdp_hat_paths: Option<Vec<Vec<f64>>>,
    /// FDP(k) for k = 1..n, when paths are requested.
    pub fdp_true_path: Option<Vec<f64>>,
}

/// Applies every method at every level to one labelled sequence.
pub fn run_trial(
    pvals: &OrderedPValues,
    methods: &[Method],
    alpha_grid: &[f64],
    keep_paths: bool,
) -> Result<TrialTable> {
    let mask = pvals.require_mask()?;
    let mut cells = Vec::with_capacity(methods.len());
    let mut paths = Vec::new();
    for m in methods {
        let path = m.path(pvals)?;
        let mut row = Vec::with_capacity(alpha_grid.len());
        for &alpha in alpha_grid {
            let k_hat = crate::seqtest::select_cutoff(&path, alpha)?;
            let false_pos = mask[..k_hat].iter().filter(|&&null| null).count();
            row.push(TrialCell { k_hat, false_pos, power: power_of_cutoff(k_hat, mask)?, fdp: fdp(k_hat, mask)? });
        }
        cells.push(row);
        if keep_paths {
            paths.push(path);
        }
    }
    let fdp_true_path = keep_paths.then(|| {
        let mut fp = 0usize;
        mask.iter()
            .enumerate()
            .map(|(i, &null)| {
                fp += null as usize;
                fp as f64 / (i + 1) as f64
            })
            .collect()
    });
    Ok(TrialTable { cells, fdp_hat_paths: keep_paths.then_some(paths), fdp_true_path })
}

/// Generates and evaluates trial `trial` of `config`.
pub fn simulate_trial(config: &SimConfig, methods: &[Method], trial: u64, keep_paths: bool) -> Result<TrialTable> {
    let pvals = generate_ranked_trial(config, trial)?;
    run_trial(&pvals, methods, &config.alpha_grid, keep_paths)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCell {
    pub method: usize,
    pub alpha: f64,
    pub power: MeanSe,
    pub fdp: MeanSe,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub method_names: Vec<String>,
    pub alpha_grid: Vec<f64>,
    /// Method-major, then alpha.
    pub cells: Vec<AggregateCell>,
    /// Mean estimated-FDP path per method; empty when trials kept no paths.
    pub mean_fdp_hat: Vec<Vec<f64>>,
    pub mean_fdp_true: Vec<f64>,
}

impl AggregateResult {
    pub fn cell(&self, method: usize, alpha_index: usize) -> &AggregateCell {
        &self.cells[method * self.alpha_grid.len() + alpha_index]
    }
}

fn column_means(rows: &[&Vec<f64>]) -> Vec<f64> {
    let len = rows[0].len();
    let mut col = Vec::with_capacity(rows.len());
    (0..len)
        .map(|k| {
            col.clear();
            col.extend(rows.iter().map(|r| r[k]));
            pairwise_sum(&col) / rows.len() as f64
        })
        .collect()
}

/// Means and standard errors over trials, in trial order.
pub fn aggregate(tables: &[TrialTable], methods: &[Method], alpha_grid: &[f64]) -> Result<AggregateResult> {
    if tables.is_empty() {
        bail!(Contract, "nothing to aggregate");
    }
    for t in tables {
        if t.cells.len() != methods.len() || t.cells.iter().any(|r| r.len() != alpha_grid.len()) {
            bail!(Contract, "trial tables do not match the method and alpha layout");
        }
    }
    let mut cells = Vec::with_capacity(methods.len() * alpha_grid.len());
    let mut buf_p = Vec::with_capacity(tables.len());
    let mut buf_f = Vec::with_capacity(tables.len());
    for m in 0..methods.len() {
        for (a, &alpha) in alpha_grid.iter().enumerate() {
            buf_p.clear();
            buf_f.clear();
            for t in tables {
                buf_p.push(t.cells[m][a].power);
                buf_f.push(t.cells[m][a].fdp);
            }
            cells.push(AggregateCell { method: m, alpha, power: MeanSe::of(&buf_p), fdp: MeanSe::of(&buf_f) });
        }
    }

    let with_paths = tables.iter().filter(|t| t.fdp_hat_paths.is_some()).count();
    let (mean_fdp_hat, mean_fdp_true) = if with_paths == 0 {
        (Vec::new(), Vec::new())
    } else if with_paths != tables.len() {
        bail!(Contract, "only some trial tables carry paths");
    } else {
        let len = tables[0].fdp_true_path.as_ref().map_or(0, Vec::len);
        let consistent = tables.iter().all(|t| {
            t.fdp_true_path.as_ref().is_some_and(|p| p.len() == len)
                && t.fdp_hat_paths.as_ref().is_some_and(|ps| ps.iter().all(|p| p.len() == len))
        });
        if !consistent {
            bail!(Contract, "trial paths differ in length");
        }
        let hat = (0..methods.len())
            .map(|m| {
                let rows: Vec<&Vec<f64>> = tables.iter().map(|t| &t.fdp_hat_paths.as_ref().unwrap()[m]).collect();
                column_means(&rows)
            })
            .collect();
        let rows: Vec<&Vec<f64>> = tables.iter().map(|t| t.fdp_true_path.as_ref().unwrap()).collect();
        (hat, column_means(&rows))
    };

    Ok(AggregateResult {
        method_names: methods.iter().map(|m| alloc::format!("{m}")).collect(),
        alpha_grid: alpha_grid.to_vec(),
        cells,
        mean_fdp_hat,
        mean_fdp_true,
    })
}

/// Sequential reference driver: every trial in index order.
pub fn run_simulation(config: &SimConfig, methods: &[Method], keep_paths: bool) -> Result<AggregateResult> {
    config.validate()?;
    let tables = (0..config.trials as u64)
        .map(|t| simulate_trial(config, methods, t, keep_paths))
        .collect::<Result<Vec<_>>>()?;
    aggregate(&tables, methods, &config.alpha_grid)
}

/// Non-null layout whose running proportion tracks `curve`: position k
/// (1-based) is non-null iff N(k) > N(k − 1), with N(k) = ⌊k·f(k/n) + ½⌋.
/// Hence |N(k)/k − f(k/n)| ≤ 1/(2k).
pub fn nonnull_layout(curve: &SignalCurve, n: usize) -> Result<Vec<bool>> {
    let report = validate_signal_curve(curve, 0.0);
    if report.structurally_invalid() {
        let v = report.violations.iter().find(|v| v.condition != crate::power::Condition::Steepness);
        let v = v.expect("structural violation present");
        bail!(Contract, "signal curve cannot be realized: {} (at t = {})", v.condition, v.t);
    }
    let target = |k: usize| libm::floor(k as f64 * curve.eval(k as f64 / n as f64) + 0.5) as i64;
    let mut prev = 0i64;
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let cur = target(k);
        let step = cur - prev;
        if !(0..=1).contains(&step) {
            bail!(Contract, "signal curve changes too fast for n = {n} at k = {k}");
        }
        out.push(step == 1);
        prev = cur;
    }
    Ok(out)
}

/// Ordered p-values with non-nulls placed by [`nonnull_layout`], non-null
/// p-values drawn from `density` and null p-values uniform.
pub fn generate_from_curve(
    curve: &SignalCurve,
    n: usize,
    density: &AlternativeDensity,
    seed: u64,
) -> Result<OrderedPValues> {
    if n == 0 {
        bail!(Domain, "n must be positive");
    }
    density.validate()?;
    let nonnull = nonnull_layout(curve, n)?;
    let mut rng = stream(seed, 0);
    let values = nonnull.iter().map(|&s| if s { density.sample(&mut rng) } else { rng.random::<f64>() }).collect();
    OrderedPValues::with_mask(values, nonnull.iter().map(|s| !s).collect())
}

/// Per-k mean and standard error of M_k over replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioMartingale {
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
}

/// M_k = (1 + #{nulls ≤ k}) / (1 + Σ_{nulls ≤ k} B_i) with B_i ~ Bernoulli(ρ)
/// on nulls. Each replicate interleaves nulls at random positions, each
/// position being null with probability `null_fraction`.
pub fn ratio_martingale_simulation(
    n: usize,
    null_fraction: f64,
    rho: f64,
    replicates: usize,
    seed: u64,
) -> Result<RatioMartingale> {
    if n == 0 || replicates == 0 {
        bail!(Domain, "need n ≥ 1 and at least one replicate");
    }
    if !(rho > 0.0 && rho <= 1.0) {
        bail!(Domain, "rho must lie in (0, 1], got {rho}");
    }
    if !(0.0..=1.0).contains(&null_fraction) {
        bail!(Domain, "null fraction must lie in [0, 1], got {null_fraction}");
    }
    let mut by_k: Vec<Vec<f64>> = (0..n).map(|_| Vec::with_capacity(replicates)).collect();
    for r in 0..replicates {
        let mut rng = stream(seed, r as u64);
        let (mut nulls, mut hits) = (0u64, 0u64);
        for col in by_k.iter_mut() {
            if rng.random::<f64>() < null_fraction {
                nulls += 1;
                hits += (rng.random::<f64>() < rho) as u64;
            }
            col.push((1 + nulls) as f64 / (1 + hits) as f64);
        }
    }
    let stats: Vec<MeanSe> = by_k.iter().map(|c| MeanSe::of(c)).collect();
    Ok(RatioMartingale { mean: stats.iter().map(|s| s.mean).collect(), se: stats.iter().map(|s| s.se).collect() })
}

/// E[M] for N nulls: Σ_j C(N,j)ρ^j(1−ρ)^{N−j}(1+N)/(1+j) = (1 − (1−ρ)^{N+1})/ρ.
pub fn ratio_martingale_exact_mean(nulls: u64, rho: f64) -> f64 {
    (1.0 - libm::pow(1.0 - rho, (nulls + 1) as f64)) / rho
}

/// Law of the increments of a centered random walk.
#[derive(Debug, Clone, PartialEq)]
pub enum Increment {
    /// N(0, σ²).
    Gaussian { sigma: f64 },
    /// h(U) − 1 with U uniform.
    CenteredAccumulation(AccumulationSpec),
}

impl Increment {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Increment::Gaussian { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            }
            Increment::CenteredAccumulation(spec) => spec.eval(rng.random::<f64>()) - 1.0,
        }
    }
}

/// Fraction of walks of length `t_max` whose partial sums ever leave the
/// envelope of [`lemma5_envelope`].
pub fn envelope_exit_fraction(
    increment: &Increment,
    sigma2: f64,
    b: f64,
    epsilon: f64,
    t_max: usize,
    replicates: usize,
    seed: u64,
) -> Result<MeanSe> {
    if t_max == 0 || replicates == 0 {
        bail!(Domain, "need t_max ≥ 1 and at least one replicate");
    }
    let bound: Vec<f64> = (1..=t_max).map(|t| lemma5_envelope(sigma2, b, epsilon, t as f64)).collect::<Result<_>>()?;
    let exits: Vec<f64> = (0..replicates)
        .map(|r| {
            let mut rng = stream(seed, r as u64);
            let mut s = 0.0;
            let mut out = false;
            for env in &bound {
                s += increment.draw(&mut rng);
                out |= libm::fabs(s) > *env;
            }
            out as u64 as f64
        })
        .collect();
    Ok(MeanSe::of(&exits))
}

/// Monte Carlo estimate of E[exp(θ(X − EX))] against the bound exp(θ²σ²/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfPoint {
    pub theta: f64,
    pub estimate: MeanSe,
    pub bound: f64,
}

/// Evaluates the centered moment generating function of h(U), U uniform, at
/// each θ with |θ| ≤ 1/b.
pub fn subexponential_check(
    spec: &AccumulationSpec,
    sigma2: f64,
    b: f64,
    thetas: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<MgfPoint>> {
    if samples < 2 {
        bail!(Domain, "need at least two samples");
    }
    if let Some(t) = thetas.iter().find(|t| b > 0.0 && libm::fabs(**t) > 1.0 / b) {
        bail!(Domain, "theta {t} lies outside |theta| <= 1/b");
    }
    let mut rng = stream(seed, 0);
    let xs: Vec<f64> = (0..samples).map(|_| spec.eval(rng.random::<f64>()) - 1.0).collect();
    let mut buf = Vec::with_capacity(samples);
    Ok(thetas
        .iter()
        .map(|&theta| {
            buf.clear();
            buf.extend(xs.iter().map(|x| libm::exp(theta * x)));
            MgfPoint { theta, estimate: MeanSe::of(&buf), bound: libm::exp(0.5 * theta * theta * sigma2) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn small() -> SimConfig {
        SimConfig { n: 200, n_nonnull: 20, trials: 3, seed: 11, ..SimConfig::default() }
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().validate().is_ok());
        assert!(SimConfig { n_nonnull: 0, ..small() }.validate().is_err());
        assert!(SimConfig { alpha_grid: vec![0.0], ..small() }.validate().is_err());
        assert!(SimConfig { trials: 0, ..small() }.validate().is_err());
        assert_eq!(default_alpha_grid().len(), 9);
    }

    #[test]
    fn ranked_trial_is_deterministic() {
        let a = generate_ranked_trial(&small(), 4).unwrap();
        let b = generate_ranked_trial(&small(), 4).unwrap();
        let c = generate_ranked_trial(&small(), 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.null_mask().unwrap().iter().filter(|n| !**n).count(), 20);
    }

    #[test]
    fn perfect_separation_puts_nonnulls_first() {
        let cfg = SimConfig { mu1: 1e6, ..small() };
        let p = generate_ranked_trial(&cfg, 0).unwrap();
        let mask = p.null_mask().unwrap();
        assert!(mask[..20].iter().all(|n| !n) && mask[20..].iter().all(|n| *n));
    }

    #[test]
    fn run_trial_extremes() {
        let mask = vec![false, true, false, true, true];
        let zeros = OrderedPValues::with_mask(vec![0.0; 5], mask.clone()).unwrap();
        let methods = Method::standard_set();
        let plain: Vec<Method> = methods.iter().filter(|m| m.rule == crate::seqtest::Rule::Plain).cloned().collect();
        let t = run_trial(&zeros, &plain, &[0.1, 0.5], false).unwrap();
        for row in &t.cells {
            for c in row {
                assert_eq!((c.k_hat, c.power, c.fdp), (5, 1.0, 0.6));
            }
        }
        let ones = OrderedPValues::with_mask(vec![1.0; 5], mask).unwrap();
        let seq = vec![Method::plain(AccumulationSpec::seq_step(2.0).unwrap())];
        let c = run_trial(&ones, &seq, &[0.5], false).unwrap().cells[0][0];
        assert_eq!((c.k_hat, c.power, c.fdp), (0, 0.0, 0.0));
    }

    #[test]
    fn run_trial_on_hand_example() {
        // path (0, 1, 2/3, 1, 1.2): k̂ = 1 at α = 0.5; rank 1 is non-null, two non-nulls total
        let p =
            OrderedPValues::with_mask(vec![0.01, 0.95, 0.02, 0.8, 0.9], vec![false, true, false, true, true]).unwrap();
        let seq = vec![Method::plain(AccumulationSpec::seq_step(2.0).unwrap())];
        let c = run_trial(&p, &seq, &[0.5], false).unwrap().cells[0][0];
        assert_eq!(c.k_hat, 1);
        assert_eq!(c.power, 0.5);
        assert_eq!(c.fdp, 0.0);
        assert!(run_trial(&OrderedPValues::new(vec![0.1]).unwrap(), &seq, &[0.5], false).is_err());
    }

    #[test]
    fn aggregate_arithmetic() {
        let cell = |p: f64| TrialCell { k_hat: 1, false_pos: 0, power: p, fdp: 0.0 };
        let tables: Vec<TrialTable> = [0.2, 0.4]
            .iter()
            .map(|&p| TrialTable { cells: vec![vec![cell(p)]], fdp_hat_paths: None, fdp_true_path: None })
            .collect();
        let methods = vec![Method::plain(AccumulationSpec::forward_stop())];
        let agg = aggregate(&tables, &methods, &[0.1]).unwrap();
        assert!((agg.cell(0, 0).power.mean - 0.3).abs() < 1e-15);
        assert!((agg.cell(0, 0).power.se - 0.1).abs() < 1e-15);
        let one = aggregate(&tables[..1], &methods, &[0.1]).unwrap();
        assert_eq!(one.cell(0, 0).power.mean, 0.2);
        assert_eq!(one.cell(0, 0).power.se, 0.0);
        assert!(aggregate(&tables, &methods, &[0.1, 0.2]).is_err());
        assert!(aggregate(&[], &methods, &[0.1]).is_err());
    }

    #[test]
    fn simulation_with_paths() {
        let methods = Method::standard_set();
        let agg = run_simulation(&small(), &methods, true).unwrap();
        assert_eq!(agg.mean_fdp_hat.len(), 4);
        assert_eq!(agg.mean_fdp_true.len(), 200);
        assert!(agg.cells.iter().all(|c| (0.0..=1.0).contains(&c.power.mean) && c.power.se >= 0.0));
    }

    #[test]
    fn curve_layout_examples() {
        let zero = SignalCurve::constant(0.0, 0.1).unwrap();
        assert!(nonnull_layout(&zero, 50).unwrap().iter().all(|s| !s));
        let one = SignalCurve::constant(1.0, 0.1).unwrap();
        assert!(nonnull_layout(&one, 50).unwrap().iter().all(|s| *s));
        let lin = SignalCurve::affine(0.5, -0.2, 0.2).unwrap();
        let n = 10_000;
        let lay = nonnull_layout(&lin, n).unwrap();
        let mut count = 0usize;
        for (i, &s) in lay.iter().enumerate() {
            count += s as usize;
            let k = (i + 1) as f64;
            assert!((count as f64 / k - lin.eval(k / n as f64)).abs() <= 0.5 / k + 1e-12);
        }
        let bad = SignalCurve::affine(0.5, -0.5, 0.1).unwrap();
        assert!(matches!(nonnull_layout(&bad, 100), Err(crate::Error::Contract(_))));
    }

    #[test]
    fn ratio_martingale_exact_mean_matches_sum() {
        // direct binomial sum for N = 7, ρ = 0.3
        let (n, rho) = (7u64, 0.3f64);
        let mut direct = 0.0;
        let mut binom = 1.0;
        for j in 0..=n {
            if j > 0 {
                binom = binom * (n - j + 1) as f64 / j as f64;
            }
            direct += binom * rho.powi(j as i32) * (1.0 - rho).powi((n - j) as i32) * (1 + n) as f64 / (1 + j) as f64;
        }
        assert!((direct - ratio_martingale_exact_mean(n, rho)).abs() < 1e-14);
    }

    #[test]
    fn ratio_martingale_simulation_is_bounded() {
        let r = ratio_martingale_simulation(50, 1.0, 0.5, 2000, 3).unwrap();
        let exact = ratio_martingale_exact_mean(50, 0.5);
        assert!((r.mean[49] - exact).abs() < 4.0 * r.se[49]);
    }

    #[test]
    fn subexponential_forward_stop() {
        // h(U) − 1 ~ Exp(1) − 1: E e^{θX} = e^{−θ}/(1 − θ)
        let pts =
            subexponential_check(&AccumulationSpec::forward_stop(), 4.0, 2.0, &[-0.4, 0.2, 0.4], 200_000, 9).unwrap();
        for p in pts {
            let exact = libm::exp(-p.theta) / (1.0 - p.theta);
            assert!((p.estimate.mean - exact).abs() < 5.0 * p.estimate.se, "{p:?}");
            assert!(p.estimate.mean <= p.bound + 4.0 * p.estimate.se);
        }
    }
}
