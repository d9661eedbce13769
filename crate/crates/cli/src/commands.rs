use rayon::prelude::*;

use qrep_core::{enumerate_branches, run_chain, trial_seed, ChainResult};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::report::{
    amplitudes, emit, history_csv, to_json, EnumerationAggregate, EnumerationReport, PathRecord,
    RunAggregate, RunReport, TrialRecord,
};

fn trial_record(trial: u64, seed: u64, run: &ChainResult) -> TrialRecord {
    TrialRecord {
        trial,
        seed,
        results: run.results.clone(),
        ancilla_results: run.ancilla_results.clone(),
        deferred_exponent: run.deferred_exponent,
        noise: run.noise_applied.clone(),
        fidelity: run.fidelity_vs_initial,
    }
}

/// Runs `cfg.trials` independent chains in parallel. Trial `i` uses seed
/// `cfg.seed ^ i`; records are merged in trial order.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let psi0 = cfg.initial_state()?;
    let base = cfg.chain_config();

    let runs: Vec<(TrialRecord, Option<ChainResult>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(cfg.seed, trial);
            let run = run_chain(&base.clone().with_seed(seed), &psi0)?;
            let record = trial_record(trial, seed, &run);
            Ok((record, (trial == 0).then_some(run)))
        })
        .collect::<Result<_, qrep_core::Error>>()?;

    let mut histogram = vec![0u64; cfg.d.get()];
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for (rec, _) in &runs {
        for &r in &rec.results {
            histogram[r] += 1;
        }
        sum += rec.fidelity;
        min = min.min(rec.fidelity);
        max = max.max(rec.fidelity);
    }

    let history = match (&cfg.history, &runs[0].1) {
        (Some(path), Some(first)) => {
            emit(&history_csv(&first.history), Some(path))?;
            Some(path.display().to_string())
        }
        _ => None,
    };

    Ok(RunReport {
        command: "run".into(),
        config: cfg.to_document(),
        initial_state: amplitudes(&psi0),
        aggregate: RunAggregate {
            trials: cfg.trials,
            mean_fidelity: (sum / cfg.trials as f64).clamp(0.0, 1.0),
            min_fidelity: min,
            max_fidelity: max,
            histogram_total: histogram.iter().sum(),
            outcome_histogram: histogram,
        },
        trials: runs.into_iter().map(|(rec, _)| rec).collect(),
        history,
    })
}

/// Exact enumeration of every outcome path within `cfg.max_paths`.
pub fn cmd_enumerate(cfg: &ExperimentConfig) -> Result<EnumerationReport, CliError> {
    let psi0 = cfg.initial_state()?;
    let branches =
        enumerate_branches(&cfg.chain_config(), &psi0, cfg.max_paths).map_err(|e| match e {
            qrep_core::Error::Resource(msg) => qrep_core::Error::Resource(format!(
                "{msg}; use `qrep run --trials <N>` for a Monte Carlo estimate instead"
            )),
            other => other,
        })?;

    let paths: Vec<PathRecord> = branches
        .into_iter()
        .map(|b| PathRecord {
            results: b.outcomes,
            noise: b.noise,
            probability: b.probability,
            fidelity: b.fidelity,
        })
        .collect();
    let aggregate = EnumerationAggregate {
        paths: paths.len() as u64,
        probability_sum: paths.iter().map(|p| p.probability).sum(),
        min_fidelity: paths
            .iter()
            .map(|p| p.fidelity)
            .fold(f64::INFINITY, f64::min),
        mean_fidelity: paths.iter().map(|p| p.probability * p.fidelity).sum(),
    };
    Ok(EnumerationReport {
        command: "enumerate".into(),
        config: cfg.to_document(),
        initial_state: amplitudes(&psi0),
        aggregate,
        paths,
    })
}

/// `cmd_run` plus report output.
pub fn execute_run(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let report = cmd_run(cfg)?;
    emit(&to_json(&report), cfg.out.as_deref())?;
    Ok(report)
}

pub fn execute_enumerate(cfg: &ExperimentConfig) -> Result<EnumerationReport, CliError> {
    let report = cmd_enumerate(cfg)?;
    emit(&to_json(&report), cfg.out.as_deref())?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ConfigDocument, Overrides};

    fn cfg(json: &str) -> ExperimentConfig {
        ConfigDocument::from_json(json)
            .unwrap()
            .resolve(&Overrides::default())
            .unwrap()
    }

    #[test]
    fn noiseless_run_has_unit_fidelity() {
        for mode in ["local", "deferred"] {
            let c = cfg(&format!(
                r#"{{"d": 4, "n": 5, "mode": "{mode}", "trials": 40, "seed": 123, "initial_state": "random"}}"#
            ));
            let report = cmd_run(&c).unwrap();
            assert!((report.aggregate.min_fidelity - 1.0).abs() < 1e-12);
            assert_eq!(report.aggregate.histogram_total, 40 * 5);
            assert_eq!(report.trials.len(), 40);
            assert!(report
                .trials
                .iter()
                .enumerate()
                .all(|(i, t)| t.trial == i as u64 && t.seed == 123 ^ i as u64));
            assert_eq!(
                report.trials[0].deferred_exponent.is_some(),
                mode == "deferred"
            );
        }
    }

    #[test]
    fn run_is_deterministic() {
        let c = cfg(
            r#"{"d": 3, "n": 4, "noise": {"probs": [0.8, 0.1, 0.1]}, "trials": 64, "seed": 5}"#,
        );
        assert_eq!(
            to_json(&cmd_run(&c).unwrap()),
            to_json(&cmd_run(&c).unwrap())
        );
    }

    #[test]
    fn enumerate_examples() {
        let c = cfg(r#"{"d": 2, "n": 3}"#);
        let report = cmd_enumerate(&c).unwrap();
        assert_eq!(report.paths.len(), 8);
        assert!(report.paths.iter().all(|p| p.probability == 0.125));
        assert!(report
            .paths
            .iter()
            .all(|p| (p.fidelity - 1.0).abs() < 1e-12));
        assert!((report.aggregate.probability_sum - 1.0).abs() < 1e-12);

        let c = cfg(r#"{"d": 3, "n": 8}"#);
        let err = cmd_enumerate(&c).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_RESOURCE);
        assert!(err.to_string().contains("Monte Carlo"));
    }
}
