//! Embedded acceptance checks behind `qrep selftest`.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use qrep_core::chain::{seeded_rng, SeededRng};
use qrep_core::gates::{
    cnot, cnot_dagger, gate_power, hadamard, hadamard_inverse, pauli_x, pauli_z, pauli_z_power,
    swap,
};
use qrep_core::teleport::CircuitVariant;
use qrep_core::{
    deferred_exponent, enumerate_branches, eq11_oracle, fidelity, full_register_run, hop_circuit,
    prepare_hop, random_state, root_of_unity, run_chain, run_chain_forced, teleport_hop,
    trial_seed, uniform_superposition, ChainConfig, CorrectionMode, Dim, GateMatrix, HopSource,
    NoiseSpec, PureState,
};

use crate::commands::cmd_run;
use crate::config::{ConfigDocument, Overrides};
use crate::error::CliError;
use crate::report::to_json;

/// Elementwise tolerance for state and gate identities.
pub const TOL: f64 = 1e-12;
/// Tolerance for entropies that should vanish.
pub const ENTROPY_TOL: f64 = 1e-10;

/// Printed table of CNOT for d = 3; row index is the input `3a + b`.
pub const CNOT3_TABLE: [[u8; 9]; 9] = [
    [1, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, 0, 0, 0],
    [0, 0, 0, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 1],
    [0, 0, 0, 0, 0, 0, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 1, 0],
];

#[derive(Debug, Clone, Copy, Default)]
pub struct SelfTestOptions {
    /// Test hook: build the Fourier gate without its `1/√d` factor.
    pub corrupt_hadamard: bool,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub outcome: Result<(), String>,
    pub elapsed: Duration,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.outcome.is_ok()
    }

    pub fn line(&self) -> String {
        match &self.outcome {
            Ok(()) => format!("PASS {} ({:.2?})", self.name, self.elapsed),
            Err(detail) => format!("FAIL {}: {detail}", self.name),
        }
    }
}

type Check = fn(&SelfTestOptions) -> Result<(), String>;

const CHECKS: [(&str, Check); 9] = [
    ("cnot3_table", check_cnot3_table),
    ("direct_sum_law", check_direct_sum),
    ("circuit_oracle_equivalence", check_circuit_oracle),
    ("exact_recovery", check_exact_recovery),
    ("strategy_equivalence", check_strategy_equivalence),
    ("full_register_oracle", check_full_register),
    ("unitarity_sweep", check_unitarity),
    ("noise_sanity", check_noise),
    ("determinism", check_determinism),
];

pub fn run_selftest(opts: &SelfTestOptions) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|&(name, check)| {
            let start = Instant::now();
            let outcome = check(opts);
            CheckResult {
                name,
                outcome,
                elapsed: start.elapsed(),
            }
        })
        .collect()
}

/// Runs every check, printing one line each, and fails with the names of
/// the checks that did not pass.
pub fn cmd_selftest(opts: &SelfTestOptions) -> Result<(), CliError> {
    let results = run_selftest(opts);
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.name.to_string())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::SelfTest(failed))
    }
}

fn dim(d: usize) -> Dim {
    Dim::new(d).expect("dimension in range")
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn state_diff(x: &PureState, y: &PureState) -> Result<f64, String> {
    x.max_abs_diff(y).map_err(err)
}

fn matrix_diff(x: &DMatrix<Complex64>, y: &DMatrix<Complex64>) -> f64 {
    x.iter()
        .zip(y.iter())
        .map(|(p, q)| (p - q).norm())
        .fold(0.0, f64::max)
}

fn check_cnot3_table(_: &SelfTestOptions) -> Result<(), String> {
    let table = cnot(dim(3)).input_row_layout();
    for (i, row) in CNOT3_TABLE.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if table[(i, j)] != Complex64::new(v as f64, 0.0) {
                return Err(format!(
                    "entry ({i},{j}) is {}, expected {v}",
                    table[(i, j)]
                ));
            }
        }
    }
    Ok(())
}

fn check_direct_sum(_: &SelfTestOptions) -> Result<(), String> {
    for d in Dim::all() {
        let n = d.get();
        let m = cnot(d);
        for a in 0..n {
            for b in 0..n {
                let col = n * a + b;
                let target = n * a + (a + b) % n;
                for row in 0..n * n {
                    let expected = if row == target { 1.0 } else { 0.0 };
                    if m.matrix()[(row, col)] != Complex64::new(expected, 0.0) {
                        return Err(format!("d={d}: |{a},{b}> has weight on row {row}"));
                    }
                }
            }
        }
    }
    Ok(())
}

fn check_circuit_oracle(_: &SelfTestOptions) -> Result<(), String> {
    let mut rng = seeded_rng(0x5e1f_0003);
    for d in 2..=5 {
        for _ in 0..200 {
            let psi = random_state(dim(d), 1, &mut rng);
            let circuit = hop_circuit(&prepare_hop(&psi).map_err(err)?).map_err(err)?;
            let oracle = eq11_oracle(&psi).map_err(err)?;
            let diff = state_diff(&circuit, &oracle)?;
            if diff > TOL {
                return Err(format!("d={d}: max deviation {diff:e}"));
            }
        }
    }
    Ok(())
}

fn check_exact_recovery(_: &SelfTestOptions) -> Result<(), String> {
    let mut rng = seeded_rng(0x5e1f_0004);
    for d in 2..=8 {
        for _ in 0..50 {
            let psi = random_state(dim(d), 1, &mut rng);
            for a in 0..d {
                for b in 0..d {
                    let hop = teleport_hop(
                        &psi,
                        CorrectionMode::LocalEachHop,
                        HopSource::Forced { a, b },
                    )
                    .map_err(err)?;
                    let diff = state_diff(&hop.bob_post, &psi)?;
                    let f = fidelity(&psi, &hop.bob_post).map_err(err)?;
                    if diff > TOL || f < 1.0 - TOL {
                        return Err(format!(
                            "d={d} (a,b)=({a},{b}): deviation {diff:e}, fidelity {f}"
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

fn random_path(rng: &mut SeededRng, d: usize, n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .map(|_| (rng.random_range(0..d), rng.random_range(0..d)))
        .collect()
}

fn check_strategy_equivalence(_: &SelfTestOptions) -> Result<(), String> {
    let mut rng = seeded_rng(0x5e1f_0005);
    for d in 2..=5 {
        for n in 1..=10 {
            let local = ChainConfig::new(dim(d), n, CorrectionMode::LocalEachHop).map_err(err)?;
            let deferred =
                ChainConfig::new(dim(d), n, CorrectionMode::DeferredFinal).map_err(err)?;
            for _ in 0..50 {
                let psi = random_state(dim(d), 1, &mut rng);
                let path = random_path(&mut rng, d, n);
                let x = run_chain_forced(&local, &psi, &path, None).map_err(err)?;
                let y = run_chain_forced(&deferred, &psi, &path, None).map_err(err)?;
                let diff = state_diff(&x.final_state, &y.final_state)?;
                if diff > TOL {
                    return Err(format!("d={d} n={n}: strategies differ by {diff:e}"));
                }
                let mut sum = 0;
                for &(a, _) in &path {
                    sum += a;
                }
                let f = deferred_exponent(&y.results, dim(d)).map_err(err)?;
                if f != sum % d || y.deferred_exponent != Some(f) {
                    return Err(format!("d={d} n={n}: f={f}, expected {}", sum % d));
                }
            }
        }
    }
    Ok(())
}

/// Every `(a, b)` path of an `n`-hop chain, first hop slowest.
pub fn all_paths(d: usize, n: usize) -> Vec<Vec<(usize, usize)>> {
    let per_hop = d * d;
    (0..per_hop.pow(n as u32))
        .map(|mut k| {
            let mut path = vec![(0, 0); n];
            for slot in path.iter_mut().rev() {
                let p = k % per_hop;
                *slot = (p / d, p % d);
                k /= per_hop;
            }
            path
        })
        .collect()
}

fn check_full_register(_: &SelfTestOptions) -> Result<(), String> {
    let mut rng = seeded_rng(0x5e1f_0006);
    for (d, n) in [(2, 2), (2, 3), (3, 2)] {
        let psi = random_state(dim(d), 1, &mut rng);
        let cfg = ChainConfig::new(dim(d), n, CorrectionMode::LocalEachHop).map_err(err)?;
        for path in all_paths(d, n) {
            let chain = run_chain_forced(&cfg, &psi, &path, None).map_err(err)?;
            let full = full_register_run(n, dim(d), &psi, &path).map_err(err)?;
            let diff = state_diff(&chain.final_state, &full.final_state)?;
            if diff > TOL {
                return Err(format!("d={d} n={n} path {path:?}: deviation {diff:e}"));
            }
            let worst = full
                .boundary_entropy
                .iter()
                .chain(&full.bob_entropy)
                .fold(0.0f64, |m, &e| m.max(e.abs()));
            if worst > ENTROPY_TOL {
                return Err(format!("d={d} n={n} path {path:?}: entropy {worst:e}"));
            }
        }
    }
    Ok(())
}

fn fourier(d: Dim, opts: &SelfTestOptions) -> GateMatrix {
    let h = hadamard(d);
    if opts.corrupt_hadamard {
        let scaled = h.matrix() * Complex64::new((d.get() as f64).sqrt(), 0.0);
        GateMatrix::new_unchecked(d, 1, scaled).expect("shape unchanged")
    } else {
        h
    }
}

fn check_unitarity(opts: &SelfTestOptions) -> Result<(), String> {
    for d in Dim::all() {
        let gates = [
            ("Z", pauli_z(d)),
            ("X", pauli_x(d)),
            ("H", fourier(d, opts)),
            ("H_inv", hadamard_inverse(d)),
            ("CNOT", cnot(d)),
            ("CNOT_dagger", cnot_dagger(d)),
            ("SWAP", swap(d)),
        ];
        for (name, g) in &gates {
            if !g.is_unitary() {
                return Err(format!("{name} is not unitary for d={d}"));
            }
        }
        for r in 0..d.get() {
            if !pauli_z_power(d, r).is_unitary() {
                return Err(format!("Z^{r} is not unitary for d={d}"));
            }
        }
        let id = GateMatrix::identity(d, 1).map_err(err)?;
        for (name, g) in [("Z", pauli_z(d)), ("X", pauli_x(d))] {
            let diff = gate_power(&g, d.get()).max_abs_diff(&id);
            if diff > TOL {
                return Err(format!("{name}^{d} differs from I by {diff:e}"));
            }
        }
        let zx = pauli_z(d).compose(&pauli_x(d)).map_err(err)?;
        let xz = pauli_x(d).compose(&pauli_z(d)).map_err(err)?;
        let w = root_of_unity(d, 1).map_err(err)?;
        let diff = matrix_diff(zx.matrix(), &(xz.matrix() * w));
        if diff > TOL {
            return Err(format!("ZX - wXZ = {diff:e} for d={d}"));
        }
    }
    Ok(())
}

fn check_noise(_: &SelfTestOptions) -> Result<(), String> {
    let mut rng = seeded_rng(0x5e1f_0008);
    for (d, n) in [(2, 4), (3, 3), (5, 2)] {
        let cfg = ChainConfig::new(dim(d), n, CorrectionMode::DeferredFinal).map_err(err)?;
        let psi = random_state(dim(d), 1, &mut rng);
        for b in enumerate_branches(&cfg, &psi, 4096).map_err(err)? {
            if (b.fidelity - 1.0).abs() > TOL {
                return Err(format!(
                    "noiseless d={d} n={n} path {:?}: fidelity {}",
                    b.outcomes, b.fidelity
                ));
            }
        }
    }

    let d = dim(2);
    let noise = NoiseSpec::new(d, vec![0.5, 0.5]).map_err(err)?;
    let cfg = ChainConfig::new(d, 1, CorrectionMode::LocalEachHop)
        .and_then(|c| c.with_noise(noise))
        .map_err(err)?;
    let psi = uniform_superposition(d);
    let trials = 10_000u64;
    let mut sum = 0.0;
    for t in 0..trials {
        let run = run_chain(&cfg.clone().with_seed(trial_seed(2024, t)), &psi).map_err(err)?;
        sum += run.fidelity_vs_initial;
    }
    let mean = sum / trials as f64;
    if (mean - 0.5).abs() > 0.02 {
        return Err(format!("mean fidelity {mean} outside 0.50 +/- 0.02"));
    }
    Ok(())
}

fn check_determinism(_: &SelfTestOptions) -> Result<(), String> {
    let doc = ConfigDocument::from_json(
        r#"{"d": 3, "n": 4, "mode": "local", "noise": {"probs": [0.7, 0.2, 0.1]},
            "seed": 99, "trials": 200, "initial_state": "random"}"#,
    )
    .map_err(err)?;
    let cfg = doc.resolve(&Overrides::default()).map_err(err)?;
    let first = to_json(&cmd_run(&cfg).map_err(err)?);
    let second = to_json(&cmd_run(&cfg).map_err(err)?);
    if first != second {
        return Err("two identical runs produced different reports".into());
    }
    Ok(())
}

/// The DaggerForward variant is a documented alternative; it only agrees
/// with the closed form for qubits.
pub fn dagger_forward_matches_oracle(psi: &PureState) -> Result<bool, String> {
    let reg = prepare_hop(psi).map_err(err)?;
    let s = qrep_core::teleport::hop_circuit_variant(&reg, CircuitVariant::DaggerForward)
        .map_err(err)?;
    Ok(state_diff(&s, &eq11_oracle(psi).map_err(err)?)? <= TOL)
}
