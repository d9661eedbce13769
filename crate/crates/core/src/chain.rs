//! One-way repeater chain built from single-dit teleportation hops.
//!
//! A run performs exactly `n` hops. Hop `i` teleports the in-flight qudit,
//! passes it through the Z-type channel, appends `(state, r_i)` to the
//! history and, in local mode, applies `Z^{r_i}`. In deferred mode the
//! results are collected and a single `Z^f` with `f = Σ r_i mod d` is applied
//! at the last node.
//!
//! Seeded runs draw from one ChaCha8 stream in a fixed order per hop:
//! qudit-0 outcome, qudit-1 outcome, noise exponent.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::Dim;
use crate::error::{Error, Result};
use crate::gates::{apply_1q, apply_2q, cnot, hadamard, hadamard_inverse, pauli_z_power, swap};
use crate::state::{
    basis_state, inner_product, reduced_density_subsystem, tensor_product, BasisIndex, PureState,
};
use crate::teleport::{
    apply_correction, extract_qudit, measure_standard, sample_index, teleport_hop_with,
    CorrectionMode, HopOptions, HopSource, OutcomeSource,
};

/// Largest register `full_register_oracle` will allocate, in amplitudes.
pub const FULL_REGISTER_MAX_AMPS: usize = 1 << 24;

/// Default path budget for exhaustive enumeration.
pub const DEFAULT_MAX_PATHS: usize = 4096;

const NOISE_SUM_TOL: f64 = 1e-12;

/// Dephasing channel: `Z^k` is applied with probability `probs[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    probs: Vec<f64>,
}

impl NoiseSpec {
    pub fn new(d: Dim, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != d.get() {
            return Err(Error::Validation(format!(
                "noise needs {} probabilities, got {}",
                d,
                probs.len()
            )));
        }
        if let Some((k, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::Validation(format!(
                "noise probability p_{k} = {p} is invalid"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NOISE_SUM_TOL {
            return Err(Error::Validation(format!(
                "noise probabilities sum to {sum}, not 1"
            )));
        }
        Ok(NoiseSpec { probs })
    }

    pub fn noiseless(d: Dim) -> Self {
        let mut probs = vec![0.0; d.get()];
        probs[0] = 1.0;
        NoiseSpec { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn is_noiseless(&self) -> bool {
        self.probs[0] == 1.0
    }

    /// Exponents with nonzero probability.
    pub fn support(&self) -> Vec<usize> {
        (0..self.probs.len())
            .filter(|&k| self.probs[k] > 0.0)
            .collect()
    }
}

/// Applies `Z^k` with `k` drawn from `noise` (one uniform) or forced.
pub fn apply_phase_noise(
    s: &PureState,
    noise: &NoiseSpec,
    source: OutcomeSource<'_>,
) -> Result<(PureState, usize)> {
    let d = s.dim();
    if s.num_qudits() != 1 || noise.dim() != d.get() {
        return Err(Error::ShapeMismatch(format!(
            "noise over {} exponents applied to a {}-qudit d={d} state",
            noise.dim(),
            s.num_qudits()
        )));
    }
    let k = match source {
        OutcomeSource::Forced(k) => {
            d.check_dit("noise exponent", k)?;
            k
        }
        OutcomeSource::Sample(rng) => sample_index(noise.probs(), rng),
    };
    if k == 0 {
        return Ok((s.clone(), 0));
    }
    Ok((apply_1q(s, &pauli_z_power(d, k), 0)?, k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub dim: Dim,
    /// Number of repeaters (hops).
    pub n: usize,
    pub mode: CorrectionMode,
    pub noise: NoiseSpec,
    pub seed: u64,
    /// Record Bob's pre-measurement entropy at every hop.
    pub record_entropy: bool,
}

impl ChainConfig {
    pub fn new(dim: Dim, n: usize, mode: CorrectionMode) -> Result<Self> {
        let cfg = ChainConfig {
            dim,
            n,
            mode,
            noise: NoiseSpec::noiseless(dim),
            seed: 0,
            record_entropy: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_noise(mut self, noise: NoiseSpec) -> Result<Self> {
        self.noise = noise;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Validation(
                "repeater count n must be at least 1".into(),
            ));
        }
        if self.noise.dim() != self.dim.get() {
            return Err(Error::Validation(format!(
                "noise has {} probabilities for d={}",
                self.noise.dim(),
                self.dim
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub snapshot: PureState,
    pub r: usize,
}

/// `(snapshot, r)` log with `n + 1` entries. Entry 0 is `(ψ_0, 0)`; entry `i`
/// holds the state leaving hop `i` after the channel and before any local
/// correction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransmissionHistory {
    pub entries: Vec<HistoryEntry>,
}

impl TransmissionHistory {
    fn append(&mut self, snapshot: PureState, r: usize) {
        self.entries.push(HistoryEntry { snapshot, r });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainResult {
    /// State at the last node after every correction.
    pub final_state: PureState,
    /// `R = {r_1, …, r_n}`.
    pub results: Vec<usize>,
    /// Second-qudit outcomes; never used for correction.
    pub ancilla_results: Vec<usize>,
    /// Channel exponent drawn after each hop.
    pub noise_applied: Vec<usize>,
    pub history: TransmissionHistory,
    /// `⟨ψ_0|ψ_final⟩`.
    pub overlap: Complex64,
    /// `|⟨ψ_0|ψ_final⟩|²`.
    pub fidelity_vs_initial: f64,
    /// `f = Σ r_i mod d`; only in deferred mode.
    pub deferred_exponent: Option<usize>,
    /// Product of the hop outcome probabilities.
    pub path_probability: f64,
    pub bob_entropies: Vec<f64>,
}

/// `(Σ r_i) mod d`.
pub fn deferred_exponent(results: &[usize], d: Dim) -> Result<usize> {
    results.iter().try_fold(0usize, |acc, &r| {
        d.check_dit("r", r)?;
        Ok((acc + r) % d.get())
    })
}

/// Per-trial seed: `master ^ trial_index`.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    master ^ trial
}

/// Deterministic generator behind every seeded run.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs the chain, sampling every outcome from a ChaCha8 stream seeded with
/// `config.seed`.
pub fn run_chain(config: &ChainConfig, psi0: &PureState) -> Result<ChainResult> {
    let mut rng = seeded_rng(config.seed);
    run_chain_inner(config, psi0, |_| HopPlan::Sampled, &mut rng)
}

/// Runs the chain with forced `(a, b)` outcomes per hop. Noise exponents are
/// forced when `noise` is given, otherwise sampled from the seeded stream.
pub fn run_chain_forced(
    config: &ChainConfig,
    psi0: &PureState,
    outcomes: &[(usize, usize)],
    noise: Option<&[usize]>,
) -> Result<ChainResult> {
    if outcomes.len() != config.n {
        return Err(Error::ShapeMismatch(format!(
            "forced path has {} hops, chain has {}",
            outcomes.len(),
            config.n
        )));
    }
    if let Some(ks) = noise {
        if ks.len() != config.n {
            return Err(Error::ShapeMismatch(format!(
                "forced noise has {} entries, chain has {} hops",
                ks.len(),
                config.n
            )));
        }
    }
    let mut rng = seeded_rng(config.seed);
    run_chain_inner(
        config,
        psi0,
        |i| HopPlan::Forced {
            a: outcomes[i].0,
            b: outcomes[i].1,
            k: noise.map(|ks| ks[i]),
        },
        &mut rng,
    )
}

enum HopPlan {
    Sampled,
    Forced {
        a: usize,
        b: usize,
        k: Option<usize>,
    },
}

fn run_chain_inner(
    config: &ChainConfig,
    psi0: &PureState,
    plan: impl Fn(usize) -> HopPlan,
    rng: &mut dyn RngCore,
) -> Result<ChainResult> {
    config.validate()?;
    if psi0.dim() != config.dim || psi0.num_qudits() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "initial state ({} qudits, d={}) does not match a single d={} qudit",
            psi0.num_qudits(),
            psi0.dim(),
            config.dim
        )));
    }
    let opts = HopOptions {
        record_entropy: config.record_entropy,
        ..HopOptions::default()
    };

    let mut history = TransmissionHistory::default();
    history.append(psi0.clone(), 0);
    let mut results = Vec::with_capacity(config.n);
    let mut ancilla_results = Vec::with_capacity(config.n);
    let mut noise_applied = Vec::with_capacity(config.n);
    let mut bob_entropies = Vec::new();
    let mut path_probability = 1.0;
    let mut current = psi0.clone();

    for i in 0..config.n {
        let (hop, k_forced) = match plan(i) {
            HopPlan::Sampled => (
                teleport_hop_with(&current, config.mode, HopSource::Sample(&mut *rng), opts)?,
                None,
            ),
            HopPlan::Forced { a, b, k } => (
                teleport_hop_with(&current, config.mode, HopSource::Forced { a, b }, opts)?,
                k,
            ),
        };
        path_probability *= hop.prob;
        if let Some(e) = hop.bob_entropy {
            bob_entropies.push(e);
        }
        let noise_source = match k_forced {
            Some(k) => OutcomeSource::Forced(k),
            None => OutcomeSource::Sample(&mut *rng),
        };
        let (noisy, k) = apply_phase_noise(&hop.bob_pre, &config.noise, noise_source)?;
        history.append(noisy.clone(), hop.a);
        current = match config.mode {
            CorrectionMode::LocalEachHop => apply_correction(&noisy, hop.a)?,
            CorrectionMode::DeferredFinal => noisy,
        };
        results.push(hop.a);
        ancilla_results.push(hop.b);
        noise_applied.push(k);
    }

    let deferred = match config.mode {
        CorrectionMode::DeferredFinal => {
            let f = deferred_exponent(&results, config.dim)?;
            current = apply_correction(&current, f)?;
            Some(f)
        }
        CorrectionMode::LocalEachHop => None,
    };
    let overlap = inner_product(psi0, &current)?;
    Ok(ChainResult {
        fidelity_vs_initial: overlap.norm_sqr().min(1.0),
        overlap,
        final_state: current,
        results,
        ancilla_results,
        noise_applied,
        history,
        deferred_exponent: deferred,
        path_probability,
        bob_entropies,
    })
}

/// One exhaustively enumerated path.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// First-qudit outcome per hop.
    pub outcomes: Vec<usize>,
    /// Channel exponent per hop.
    pub noise: Vec<usize>,
    pub probability: f64,
    pub final_state: PureState,
    pub fidelity: f64,
}

fn checked_paths(config: &ChainConfig, support: usize) -> Option<usize> {
    let per_hop = config.dim.get().checked_mul(support)?;
    per_hop.checked_pow(config.n as u32)
}

/// Enumerates every outcome path with its exact probability. Second-qudit
/// outcomes are fixed to 0 since Bob's state does not depend on them; when
/// the channel is noisy every exponent with nonzero probability is
/// enumerated as well.
pub fn enumerate_branches(
    config: &ChainConfig,
    psi0: &PureState,
    max_paths: usize,
) -> Result<Vec<Branch>> {
    config.validate()?;
    let support = config.noise.support();
    let total = checked_paths(config, support.len()).filter(|&t| t <= max_paths);
    let Some(total) = total else {
        return Err(Error::Resource(format!(
            "enumerating d={} over n={} hops ({} noise exponents) exceeds the budget of {max_paths} paths",
            config.dim,
            config.n,
            support.len()
        )));
    };

    let d = config.dim.get();
    let n = config.n;
    let mut branches = Vec::with_capacity(total);
    let mut outcomes = vec![0usize; n];
    let mut noise_idx = vec![0usize; n];
    loop {
        let path: Vec<(usize, usize)> = outcomes.iter().map(|&a| (a, 0)).collect();
        let noise: Vec<usize> = noise_idx.iter().map(|&i| support[i]).collect();
        let run = run_chain_forced(config, psi0, &path, Some(&noise))?;
        // Each hop's first outcome has probability 1/d once b is marginalized.
        let probability = noise
            .iter()
            .map(|&k| config.noise.probs()[k] / d as f64)
            .product();
        branches.push(Branch {
            outcomes: outcomes.clone(),
            noise,
            probability,
            final_state: run.final_state,
            fidelity: run.fidelity_vs_initial,
        });
        if !odometer(&mut noise_idx, support.len()) && !odometer(&mut outcomes, d) {
            break;
        }
    }
    Ok(branches)
}

/// Increments a little-endian-in-hop-order counter (last hop fastest).
/// Returns false once it wraps back to all zeros.
fn odometer(digits: &mut [usize], base: usize) -> bool {
    for digit in digits.iter_mut().rev() {
        *digit += 1;
        if *digit < base {
            return true;
        }
        *digit = 0;
    }
    false
}

/// Final state and entanglement diagnostics of a full-register run.
#[derive(Debug, Clone, PartialEq)]
pub struct FullRegisterOutcome {
    pub final_state: PureState,
    /// Entropy across the cut between repeaters `0..=i` and `i+1..n`, taken
    /// right after repeater `i`'s measurements.
    pub boundary_entropy: Vec<f64>,
    /// Entropy of repeater `i`'s Bob qudit against the rest of the register
    /// after its measurements.
    pub bob_entropy: Vec<f64>,
}

/// Brute-force simulation of the whole `3·n`-qudit circuit as one register,
/// with forced measurements and local corrections. Returns the last qudit.
pub fn full_register_oracle(
    n: usize,
    d: Dim,
    psi0: &PureState,
    forced_path: &[(usize, usize)],
) -> Result<PureState> {
    Ok(full_register_run(n, d, psi0, forced_path)?.final_state)
}

/// Repeater `i` owns qudits `3i` (carrier), `3i+1` (ancilla) and `3i+2`
/// (Bob). After repeater `i` is measured and corrected its Bob qudit is
/// swapped into repeater `i+1`'s carrier slot.
pub fn full_register_run(
    n: usize,
    d: Dim,
    psi0: &PureState,
    forced_path: &[(usize, usize)],
) -> Result<FullRegisterOutcome> {
    if n == 0 {
        return Err(Error::Validation(
            "repeater count n must be at least 1".into(),
        ));
    }
    if psi0.dim() != d || psi0.num_qudits() != 1 {
        return Err(Error::ShapeMismatch(
            "initial state must be one qudit of dimension d".into(),
        ));
    }
    if forced_path.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "forced path has {} hops, expected {n}",
            forced_path.len()
        )));
    }
    let qudits = 3 * n;
    let amps = d.get().checked_pow(qudits as u32);
    if amps.is_none_or(|a| a > FULL_REGISTER_MAX_AMPS) {
        return Err(Error::Resource(format!(
            "a {qudits}-qudit register with d={d} exceeds {FULL_REGISTER_MAX_AMPS} amplitudes"
        )));
    }

    let rest = basis_state(d, qudits - 1, &BasisIndex::new(vec![0; qudits - 1]))?;
    let mut s = tensor_product(psi0, &rest)?;
    let cx = cnot(d);
    let h = hadamard(d);
    let hi = hadamard_inverse(d);
    let sw = swap(d);
    let mut boundary_entropy = Vec::with_capacity(n);
    let mut bob_entropy = Vec::with_capacity(n);

    for (i, &(a, b)) in forced_path.iter().enumerate() {
        let (carrier, ancilla, bob) = (3 * i, 3 * i + 1, 3 * i + 2);
        if i > 0 {
            s = apply_2q(&s, &sw, 3 * (i - 1) + 2, carrier)?;
        }
        s = apply_2q(&s, &cx, carrier, bob)?;
        s = apply_1q(&s, &hi, carrier)?;
        s = apply_1q(&s, &h, ancilla)?;
        s = measure_standard(&s, carrier, OutcomeSource::Forced(a))?.collapsed;
        s = measure_standard(&s, ancilla, OutcomeSource::Forced(b))?.collapsed;

        boundary_entropy.push(cut_entropy(&s, 3 * (i + 1))?);
        bob_entropy.push(reduced_density_subsystem(&s, &[bob])?.entropy());

        s = apply_1q(&s, &pauli_z_power(d, a), bob)?;
    }
    Ok(FullRegisterOutcome {
        final_state: extract_qudit(&s, qudits - 1)?,
        boundary_entropy,
        bob_entropy,
    })
}

/// Entropy between qudits `0..cut` and `cut..n`, computed on the smaller side.
fn cut_entropy(s: &PureState, cut: usize) -> Result<f64> {
    let n = s.num_qudits();
    if cut == 0 || cut >= n {
        return Ok(0.0);
    }
    let side: Vec<usize> = if cut <= n - cut {
        (0..cut).collect()
    } else {
        (cut..n).collect()
    };
    Ok(reduced_density_subsystem(s, &side)?.entropy())
}
