//! Single-dit teleportation with a `Z^r`-only correction.
//!
//! A hop works on a three-qudit register `|ψ, A, B⟩`:
//! qudit 0 carries the unknown state, qudit 1 is Alice's ancilla and qudit 2
//! is Bob's. After the hop circuit the register is
//!
//! ```text
//! (1/d) Σ_{a,b,j} ω^{F(a,j)} α_j |a, b, j⟩,    F(a, j) = (d − a·j) mod d
//! ```
//!
//! so measuring qudit 0 gives `r = a` and Bob holds `Σ_j ω^{−a·j} α_j |j⟩`,
//! which `Z^a` restores exactly. The second outcome `b` never enters the
//! correction.

use num_complex::Complex64;
use rand::{Rng, RngCore};

use crate::arith::{omega_pow, phase_exponent_f, Dim};
use crate::error::{Error, Result};
use crate::gates::{
    apply_1q, apply_2q, cnot, cnot_dagger, hadamard, hadamard_inverse, pauli_z_power,
};
use crate::state::{basis_state, reduced_density, tensor_product, BasisIndex, PureState};

pub const CARRIER: usize = 0;
pub const ANCILLA: usize = 1;
pub const BOB: usize = 2;

/// Forced outcomes below this Born probability are rejected.
pub const IMPOSSIBLE_PROB: f64 = 1e-15;

/// Where the per-hop correction `Z^r` is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorrectionMode {
    /// Each repeater applies `Z^{r_i}` to its output before forwarding.
    LocalEachHop,
    /// Repeaters forward uncorrected; the last node applies `Z^f`, `f = Σ r_i mod d`.
    DeferredFinal,
}

/// Gate sequence used for the hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CircuitVariant {
    /// `CNOT(0→2)`, `H†` on 0, `H` on 1.
    #[default]
    Canonical,
    /// `CNOT†(0→2)`, `H` on 0, `H` on 1. Agrees with the canonical circuit
    /// only for qubits; for `d ≥ 3` Bob's basis labels come out negated.
    DaggerForward,
}

/// Three-qudit register `|ψ, A, B⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct HopRegister {
    state: PureState,
}

impl HopRegister {
    pub fn state(&self) -> &PureState {
        &self.state
    }

    pub fn into_state(self) -> PureState {
        self.state
    }

    /// Accepts an arbitrary three-qudit state, e.g. for diagnostics.
    pub fn from_state(state: PureState) -> Result<Self> {
        if state.num_qudits() != 3 {
            return Err(Error::ShapeMismatch(format!(
                "hop register needs 3 qudits, got {}",
                state.num_qudits()
            )));
        }
        Ok(HopRegister { state })
    }

    pub fn dim(&self) -> Dim {
        self.state.dim()
    }
}

fn check_single(psi: &PureState) -> Result<()> {
    if psi.num_qudits() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "expected a single-qudit state, got {} qudits",
            psi.num_qudits()
        )));
    }
    Ok(())
}

/// `|ψ⟩ ⊗ |0⟩ ⊗ |0⟩`.
pub fn prepare_hop(psi: &PureState) -> Result<HopRegister> {
    check_single(psi)?;
    let zeros = basis_state(psi.dim(), 2, &BasisIndex::new(vec![0, 0]))?;
    Ok(HopRegister {
        state: tensor_product(psi, &zeros)?,
    })
}

/// Runs the canonical hop circuit, returning the pre-measurement register.
pub fn hop_circuit(reg: &HopRegister) -> Result<PureState> {
    hop_circuit_variant(reg, CircuitVariant::Canonical)
}

pub fn hop_circuit_variant(reg: &HopRegister, variant: CircuitVariant) -> Result<PureState> {
    let d = reg.dim();
    let s = &reg.state;
    let s = match variant {
        CircuitVariant::Canonical => {
            let s = apply_2q(s, &cnot(d), CARRIER, BOB)?;
            apply_1q(&s, &hadamard_inverse(d), CARRIER)?
        }
        CircuitVariant::DaggerForward => {
            let s = apply_2q(s, &cnot_dagger(d), CARRIER, BOB)?;
            apply_1q(&s, &hadamard(d), CARRIER)?
        }
    };
    apply_1q(&s, &hadamard(d), ANCILLA)
}

/// Writes the post-circuit register straight from the expanded formula
/// `Σ_{a,b,j} (1/d)·ω^{F(a,j)}·α_j·|a,b,j⟩`, without simulating any gate.
pub fn eq11_oracle(psi: &PureState) -> Result<PureState> {
    check_single(psi)?;
    let d = psi.dim();
    let n = d.get();
    let alpha = psi.amplitudes();
    let scale = 1.0 / n as f64;
    let mut amps = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for _b in 0..n {
            for (j, alpha_j) in alpha.iter().enumerate() {
                let f = phase_exponent_f(a, j, d)?;
                amps.push(omega_pow(d, f as i64) * alpha_j * scale);
            }
        }
    }
    Ok(PureState::from_parts(d, 3, amps))
}

/// Picks a measurement outcome: sampled from the Born rule or forced.
pub enum OutcomeSource<'a> {
    Sample(&'a mut dyn RngCore),
    Forced(usize),
}

/// Result of a projective standard-basis measurement of one qudit.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub outcome: usize,
    pub prob: f64,
    pub collapsed: PureState,
}

/// Born probabilities of each outcome on `target`.
pub fn outcome_probabilities(s: &PureState, target: usize) -> Result<Vec<f64>> {
    s.check_qudit("target", target)?;
    let d = s.dim().get();
    let stride = s.dim().pow(s.num_qudits() - 1 - target);
    let mut probs = vec![0.0; d];
    for (flat, amp) in s.amplitudes().iter().enumerate() {
        probs[(flat / stride) % d] += amp.norm_sqr();
    }
    Ok(probs)
}

/// Measures `target` in the standard basis. The collapsed state keeps all
/// qudits and is renormalized.
pub fn measure_standard(
    s: &PureState,
    target: usize,
    source: OutcomeSource<'_>,
) -> Result<Measurement> {
    let probs = outcome_probabilities(s, target)?;
    let d = s.dim();
    let outcome = match source {
        OutcomeSource::Forced(k) => {
            d.check_dit("forced outcome", k)?;
            if probs[k] < IMPOSSIBLE_PROB {
                return Err(Error::ImpossibleBranch {
                    target,
                    outcome: k,
                    prob: probs[k],
                });
            }
            k
        }
        OutcomeSource::Sample(rng) => sample_index(&probs, rng),
    };
    let stride = d.pow(s.num_qudits() - 1 - target);
    let amps = s
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(flat, &amp)| {
            if (flat / stride) % d.get() == outcome {
                amp
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(Measurement {
        outcome,
        prob: probs[outcome],
        collapsed: PureState::renormalized(d, s.num_qudits(), amps),
    })
}

/// Inverse-CDF sampling with one uniform draw. Zero-probability entries are
/// never returned.
pub(crate) fn sample_index(probs: &[f64], rng: &mut dyn RngCore) -> usize {
    let total: f64 = probs.iter().sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last_nonzero = k;
        acc += p;
        if u < acc {
            return k;
        }
    }
    last_nonzero
}

/// Pulls out the state of `target` when every other qudit sits in a single
/// basis configuration (e.g. after they have all been measured).
pub fn extract_qudit(s: &PureState, target: usize) -> Result<PureState> {
    s.check_qudit("target", target)?;
    let d = s.dim();
    let stride = d.pow(s.num_qudits() - 1 - target);
    let amps = s.amplitudes();
    let (best, best_weight) = (0..amps.len())
        .filter(|flat| (flat / stride).is_multiple_of(d.get()))
        .map(|base| {
            let w: f64 = (0..d.get())
                .map(|j| amps[base + j * stride].norm_sqr())
                .sum();
            (base, w)
        })
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .expect("register has at least one configuration");
    let total = s.norm_sqr();
    if best_weight < total * (1.0 - 1e-12) {
        return Err(Error::Validation(format!(
            "qudit {target} is not separable from an unmeasured remainder \
             (largest configuration weight {best_weight})"
        )));
    }
    let local = (0..d.get()).map(|j| amps[best + j * stride]).collect();
    Ok(PureState::renormalized(d, 1, local))
}

/// `Z^r` on a single-qudit state.
pub fn apply_correction(bob: &PureState, r: usize) -> Result<PureState> {
    check_single(bob)?;
    bob.dim().check_dit("r", r)?;
    apply_1q(bob, &pauli_z_power(bob.dim(), r), 0)
}

/// Outcome source for a whole hop.
pub enum HopSource<'a> {
    Sample(&'a mut dyn RngCore),
    Forced { a: usize, b: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HopOptions {
    pub variant: CircuitVariant,
    /// Record the entropy of Bob's qudit in the pre-measurement register.
    pub record_entropy: bool,
}

/// Per-repeater record.
#[derive(Debug, Clone, PartialEq)]
pub struct HopOutcome {
    /// First-qudit result; this is the correction exponent `r`.
    pub a: usize,
    /// Second-qudit result; recorded but never used for correction.
    pub b: usize,
    /// Joint Born probability of `(a, b)`.
    pub prob: f64,
    pub bob_pre: PureState,
    /// `Z^a · bob_pre` in local mode, `bob_pre` in deferred mode.
    pub bob_post: PureState,
    pub bob_entropy: Option<f64>,
}

impl HopOutcome {
    pub fn r(&self) -> usize {
        self.a
    }
}

pub fn teleport_hop(
    psi: &PureState,
    mode: CorrectionMode,
    source: HopSource<'_>,
) -> Result<HopOutcome> {
    teleport_hop_with(psi, mode, source, HopOptions::default())
}

/// Prepare, run the hop circuit, measure qudit 0 then qudit 1, hand Bob's
/// qudit over and correct it according to `mode`. A sampled hop draws exactly
/// two uniforms from the source, in that order.
pub fn teleport_hop_with(
    psi: &PureState,
    mode: CorrectionMode,
    source: HopSource<'_>,
    opts: HopOptions,
) -> Result<HopOutcome> {
    let reg = prepare_hop(psi)?;
    let s = hop_circuit_variant(&reg, opts.variant)?;
    let bob_entropy = if opts.record_entropy {
        Some(entanglement_entropy(&s, BOB)?)
    } else {
        None
    };
    let (first, second) = match source {
        HopSource::Forced { a, b } => {
            let m0 = measure_standard(&s, CARRIER, OutcomeSource::Forced(a))?;
            let m1 = measure_standard(&m0.collapsed, ANCILLA, OutcomeSource::Forced(b))?;
            (m0, m1)
        }
        HopSource::Sample(rng) => {
            let m0 = measure_standard(&s, CARRIER, OutcomeSource::Sample(&mut *rng))?;
            let m1 = measure_standard(&m0.collapsed, ANCILLA, OutcomeSource::Sample(rng))?;
            (m0, m1)
        }
    };
    let bob_pre = extract_qudit(&second.collapsed, BOB)?;
    let bob_post = match mode {
        CorrectionMode::LocalEachHop => apply_correction(&bob_pre, first.outcome)?,
        CorrectionMode::DeferredFinal => bob_pre.clone(),
    };
    Ok(HopOutcome {
        a: first.outcome,
        b: second.outcome,
        prob: first.prob * second.prob,
        bob_pre,
        bob_post,
        bob_entropy,
    })
}

/// Von Neumann entropy of one qudit's reduced state, in units of dits.
pub fn entanglement_entropy(s: &PureState, target: usize) -> Result<f64> {
    Ok(reduced_density(s, target)?.entropy())
}
