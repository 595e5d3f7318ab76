//! Cross-checks against independent implementations and Monte Carlo.

use accumtest_core::dosage::permutation_pvalue;
use accumtest_core::rng::stream;
use accumtest_core::seqtest::{estimated_fdp_path, fdp, OrderedPValues};
use accumtest_core::simlab::{generate_ranked_trial, SimConfig};
use accumtest_core::special::{reg_inc_beta, student_t_sf};
use accumtest_core::stats::MeanSe;
use accumtest_core::welch::{welch_p_one_sided, welch_p_two_sided, Alternative, Sign};
use accumtest_core::{AccumulationSpec, AlternativeDensity};
use approx::assert_relative_eq;
use itertools::Itertools;
use rand::Rng;
use statrs::distribution::{Beta, ContinuousCDF, StudentsT};

#[test]
fn student_t_tail_matches_statrs() {
    for df in [1.0, 2.5, 4.0, 8.0, 30.0, 200.0] {
        let dist = StudentsT::new(0.0, 1.0, df).unwrap();
        for t in [-6.0, -2.0, -0.5, 0.0, 0.3, 1.0, 2.5, 7.0] {
            assert_relative_eq!(student_t_sf(t, df), dist.sf(t), epsilon = 1e-12, max_relative = 1e-9);
        }
    }
}

#[test]
fn incomplete_beta_matches_statrs() {
    for (a, b) in [(0.5, 0.5), (2.0, 3.0), (10.0, 1.5), (0.7, 12.0)] {
        let dist = Beta::new(a, b).unwrap();
        for x in [0.01, 0.2, 0.5, 0.8, 0.99] {
            assert_relative_eq!(reg_inc_beta(x, a, b), dist.cdf(x), epsilon = 1e-12);
        }
    }
}

#[test]
fn welch_matches_statrs_t_distribution() {
    // Welch statistic computed here by hand, tail probabilities from statrs
    let a = [2.1, 3.4, 1.9, 4.4, 3.0, 2.8];
    let b = [1.0, 0.7, 1.9, 1.2];
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let var = |x: &[f64]| {
        let m = mean(x);
        x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
    };
    let (qa, qb) = (var(&a) / 6.0, var(&b) / 4.0);
    let t = (mean(&a) - mean(&b)) / (qa + qb).sqrt();
    let df = (qa + qb).powi(2) / (qa * qa / 5.0 + qb * qb / 3.0);
    let dist = StudentsT::new(0.0, 1.0, df).unwrap();
    assert_relative_eq!(welch_p_two_sided(&a, &b).unwrap(), 2.0 * dist.sf(t.abs()), max_relative = 1e-9);
    assert_relative_eq!(welch_p_one_sided(&a, &b, Sign::Plus).unwrap(), dist.sf(t), max_relative = 1e-9);
}

/// Independent oracle: every ordering of the six labels, the first three
/// positions being control, divided by 6!.
fn brute_force_permutation_p(values: &[f64; 6], alt: Alternative) -> f64 {
    let p_of = |control: &[f64], low: &[f64]| {
        let s = match alt {
            Alternative::Plus => welch_p_one_sided(low, control, Sign::Plus),
            Alternative::Minus => welch_p_one_sided(low, control, Sign::Minus),
            Alternative::TwoSided => welch_p_two_sided(low, control),
        };
        s.unwrap()
    };
    let p_init = p_of(&values[..3], &values[3..]);
    let mut count = 0usize;
    let mut total = 0usize;
    for perm in (0..6).permutations(6) {
        let v: Vec<f64> = perm.iter().map(|&i| values[i]).collect();
        if p_of(&v[..3], &v[3..]) <= p_init {
            count += 1;
        }
        total += 1;
    }
    assert_eq!(total, 720);
    count as f64 / total as f64
}

#[test]
fn permutation_pvalue_matches_full_relabelling() {
    let mut rng = stream(2024, 0);
    for _ in 0..25 {
        let v: [f64; 6] = std::array::from_fn(|_| rng.random::<f64>() * 4.0 - 2.0);
        for alt in [Alternative::Plus, Alternative::Minus, Alternative::TwoSided] {
            let got = permutation_pvalue(&v, 3, 3, alt).unwrap();
            assert_eq!(got.partitions, 20);
            assert_eq!(got.value(), brute_force_permutation_p(&v, alt), "{v:?} {alt:?}");
        }
    }
}

#[test]
fn forward_stop_nonnull_mean_matches_monte_carlo() {
    let spec = AccumulationSpec::forward_stop();
    let d = AlternativeDensity::two_sided_z(2.0).unwrap();
    let mu = spec.nonnull_mean(&d).unwrap();
    // 30-digit reference for the same integral in z-space
    assert!((mu - 0.229_808_406_327_326_36).abs() < 1e-9, "{mu}");
    let mut rng = stream(5, 0);
    let draws: Vec<f64> = (0..200_000).map(|_| spec.evaluate(d.sample(&mut rng)).unwrap()).collect();
    let mc = MeanSe::of(&draws);
    assert!((mc.mean - mu).abs() <= 3.0 * mc.se, "{mc:?} vs {mu}");
}

#[test]
fn null_path_has_unit_expectation() {
    let specs = [
        AccumulationSpec::forward_stop(),
        AccumulationSpec::seq_step(2.0).unwrap(),
        AccumulationSpec::hinge_exp(2.0).unwrap(),
    ];
    let (n, reps) = (20, 4000);
    for spec in &specs {
        let mut at_k: Vec<Vec<f64>> = vec![Vec::new(); n];
        for r in 0..reps {
            let mut rng = stream(77, r);
            let p: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let path = estimated_fdp_path(&OrderedPValues::new(p).unwrap(), spec).unwrap();
            for (k, v) in path.into_iter().enumerate() {
                at_k[k].push(v);
            }
        }
        for k in [0, 4, 19] {
            let m = MeanSe::of(&at_k[k]);
            assert!((m.mean - 1.0).abs() <= 4.0 * m.se, "{spec} k={} {m:?}", k + 1);
        }
    }
}

#[test]
fn estimated_fdp_overestimates_true_fdp() {
    let cfg = SimConfig { n: 300, n_nonnull: 60, seed: 3, ..SimConfig::default() };
    let spec = AccumulationSpec::hinge_exp(2.0).unwrap();
    let ks = [10, 50, 100, 299];
    let mut hat: Vec<Vec<f64>> = vec![Vec::new(); ks.len()];
    let mut truth: Vec<Vec<f64>> = vec![Vec::new(); ks.len()];
    for t in 0..400 {
        let p = generate_ranked_trial(&cfg, t).unwrap();
        let path = estimated_fdp_path(&p, &spec).unwrap();
        for (j, &k) in ks.iter().enumerate() {
            hat[j].push(path[k - 1]);
            truth[j].push(fdp(k, p.null_mask().unwrap()).unwrap());
        }
    }
    for j in 0..ks.len() {
        let (h, f) = (MeanSe::of(&hat[j]), MeanSe::of(&truth[j]));
        assert!(h.mean >= f.mean - 4.0 * h.se.hypot(f.se), "k={} {h:?} {f:?}", ks[j]);
    }
}

#[test]
fn null_z_pvalues_are_uniform() {
    // one-sample Kolmogorov-Smirnov at the 1% level (critical 1.628/√n)
    let cfg = SimConfig { n: 1000, n_nonnull: 100, mu1: 3.0, mu2: 0.0, seed: 8, ..SimConfig::default() };
    let mut p: Vec<f64> = (0..100).flat_map(|t| generate_ranked_trial(&cfg, t).unwrap().values().to_vec()).collect();
    p.sort_by(f64::total_cmp);
    let n = p.len() as f64;
    let d = p.iter().enumerate().map(|(i, &x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n)).fold(0.0, f64::max);
    assert!(d < 1.628 / n.sqrt(), "D = {d}");
}
