//! Data-parallel drivers. Work items are indexed and collected in index
//! order, so results never depend on the worker count.

use accumtest_core::dosage::{gene_record, ExpressionMatrix, GeneRecord};
use accumtest_core::seqtest::Method;
use accumtest_core::simlab::{aggregate, simulate_trial, AggregateResult, SimConfig, TrialTable};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

/// A rayon pool with `threads` workers; 0 means one per core.
pub fn pool(threads: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Numeric(format!("cannot start worker pool: {e}")))
}

/// Per-trial tables, indexed by trial.
pub fn trial_tables(
    config: &SimConfig,
    methods: &[Method],
    keep_paths: bool,
    threads: usize,
) -> CliResult<Vec<TrialTable>> {
    config.validate()?;
    Ok(pool(threads)?.install(|| {
        (0..config.trials as u64)
            .into_par_iter()
            .map(|t| simulate_trial(config, methods, t, keep_paths))
            .collect::<Result<Vec<_>, _>>()
    })?)
}

pub fn simulate(
    config: &SimConfig,
    methods: &[Method],
    keep_paths: bool,
    threads: usize,
) -> CliResult<AggregateResult> {
    let tables = trial_tables(config, methods, keep_paths, threads)?;
    Ok(aggregate(&tables, methods, &config.alpha_grid)?)
}

pub fn gene_records(matrix: &ExpressionMatrix, threads: usize) -> CliResult<Vec<GeneRecord>> {
    Ok(pool(threads)?.install(|| {
        (0..matrix.n_genes()).into_par_iter().map(|g| gene_record(matrix, g)).collect::<Result<Vec<_>, _>>()
    })?)
}
