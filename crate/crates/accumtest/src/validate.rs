//! Built-in invariant suite behind `accumtest validate`.

use accumtest_core::baselines::{bh_select, storey_null_estimate};
use accumtest_core::dosage::permutation_pvalue;
use accumtest_core::power::{asymptotic_power, asymptotic_threshold, lemma2_gap, SignalCurve};
use accumtest_core::seqtest::{estimated_fdp_path, select_cutoff, shift_discrete_pvalues, Method, OrderedPValues};
use accumtest_core::simlab::{run_simulation, SimConfig};
use accumtest_core::welch::{welch_p_one_sided, Alternative, Sign};
use accumtest_core::{AccumulationSpec, AlternativeDensity, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {}: {}", self.name, self.detail)
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn run(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

fn specs() -> Result<Vec<AccumulationSpec>> {
    let mut v = vec![AccumulationSpec::forward_stop()];
    for c in [2.0, 3.0, 5.0] {
        v.push(AccumulationSpec::seq_step(c)?);
        v.push(AccumulationSpec::hinge_exp(c)?);
    }
    v.push("piecewise:0,0.5,0.4;0.5,1,1.6".parse()?);
    Ok(v)
}

pub fn run_suite() -> Vec<Check> {
    vec![
        run("unit-integral", || {
            let worst = specs()?
                .iter()
                .map(|s| s.unit_integral().map(|v| (v - 1.0).abs()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok((worst <= 1e-9, format!("max |integral - 1| = {worst:e}")))
        }),
        run("forwardstop-path", || {
            let p = OrderedPValues::new(vec![0.1, 0.2, 0.3])?;
            let path = estimated_fdp_path(&p, &AccumulationSpec::forward_stop())?;
            let want = [0.105_360_515_657_826_28, 0.164_252_033_486_018, 0.228_393_003_636_922_83];
            let ok = path.iter().zip(want).all(|(a, b)| close(*a, b, 1e-12));
            Ok((ok && select_cutoff(&path, 0.25)? == 3, format!("{path:?}")))
        }),
        run("seqstep-cutoff", || {
            let p = OrderedPValues::new(vec![0.01, 0.95, 0.02, 0.8, 0.9])?;
            let path = estimated_fdp_path(&p, &AccumulationSpec::seq_step(2.0)?)?;
            let k = select_cutoff(&path, 0.5)?;
            Ok((k == 1, format!("k_hat = {k}")))
        }),
        run("plus-rule", || {
            let m: Method = "seqstep+:C=2".parse()?;
            let path = m.path(&OrderedPValues::new(vec![0.1, 0.2])?)?;
            Ok((close(path[0], 1.0, 1e-15) && close(path[1], 2.0 / 3.0, 1e-15), format!("{path:?}")))
        }),
        run("discrete-shift", || {
            let p = OrderedPValues::new(vec![0.25, 0.5, 1.0])?;
            let s = shift_discrete_pvalues(&p, 4)?;
            let ok = s.values().iter().zip([0.2, 0.4, 0.8]).all(|(a, b)| close(*a, b, 1e-15));
            Ok((ok, format!("{:?}", s.values())))
        }),
        run("bh-storey", || {
            let bh = bh_select(&[0.01, 0.02, 0.5], 0.05)?.count;
            let m0 = storey_null_estimate(&[0.01, 0.5, 0.95, 0.99], 0.9)?;
            Ok((bh == 2 && m0 == 4.0, format!("bh count {bh}, storey m0 {m0}")))
        }),
        run("asymptotic-power", || {
            let curve: SignalCurve = "f:0,0.5;1,0.3".parse()?;
            let t = asymptotic_threshold(&curve, 0.8, 0.5)?;
            let p = asymptotic_power(&curve, 0.8, 0.5)?;
            Ok((close(t, 0.5, 1e-9) && close(p, 2.0 / 3.0, 1e-8), format!("T = {t}, power = {p}")))
        }),
        run("step-function-optimal", || {
            let tri = AlternativeDensity::beta(1.0, 2.0)?;
            let step = lemma2_gap(&AccumulationSpec::seq_step(2.0)?, 2.0, &tri)?;
            let other = lemma2_gap(&"piecewise:0,0.5,0.4;0.5,1,1.6".parse()?, 2.0, &tri)?;
            Ok((step.abs() <= 1e-9 && other > 1e-6, format!("gaps {step:e}, {other:e}")))
        }),
        run("permutation-grid", || {
            let v = [0.3, 1.2, -0.4, 0.8, 0.1, 1.5];
            let r = permutation_pvalue(&v, 3, 3, Alternative::Plus)?;
            let k = r.value() * r.partitions as f64;
            Ok((r.partitions == 20 && k.fract() == 0.0 && k >= 1.0, format!("{}/{}", r.count, r.partitions)))
        }),
        run("welch-complement", || {
            let (a, b) = ([1.1, 2.3, 0.7, 4.2], [0.5, 0.1, -0.3, 0.2]);
            let s = welch_p_one_sided(&a, &b, Sign::Plus)? + welch_p_one_sided(&a, &b, Sign::Minus)?;
            Ok((close(s, 1.0, 1e-12), format!("sum of tails {s}")))
        }),
        run("simulation-determinism", || {
            let cfg = SimConfig { n: 200, n_nonnull: 20, trials: 3, seed: 7, ..SimConfig::default() };
            let methods = Method::standard_set();
            let a = run_simulation(&cfg, &methods, true)?;
            let b = run_simulation(&cfg, &methods, true)?;
            Ok((a == b, "two runs with seed 7 agree".into()))
        }),
    ]
}
