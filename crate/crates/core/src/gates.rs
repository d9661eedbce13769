//! Generalized Pauli, Fourier and controlled-shift gates, and their application
//! to register positions by index arithmetic.
//!
//! No full `d^n × d^n` operator is ever built; a gate touches only the
//! amplitudes that differ in the qudits it acts on.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::arith::{omega_pow, Dim};
use crate::error::{Error, Result};
use crate::state::{PureState, INTERNAL_TOL};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A unitary acting on one or two qudits.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    dim: Dim,
    arity: usize,
    mat: DMatrix<Complex64>,
}

impl GateMatrix {
    /// Wraps a `d^arity × d^arity` matrix, rejecting non-unitary input.
    pub fn new(dim: Dim, arity: usize, mat: DMatrix<Complex64>) -> Result<Self> {
        let g = GateMatrix::new_unchecked(dim, arity, mat)?;
        if !g.is_unitary() {
            return Err(Error::Validation(format!(
                "matrix is not unitary (max |GG† − I| = {:e})",
                unitarity_error(&g.mat)
            )));
        }
        Ok(g)
    }

    /// Shape-checked but not unitarity-checked. Used for diagnostics and
    /// negative controls; applying a non-unitary gate yields a non-normalized state.
    pub fn new_unchecked(dim: Dim, arity: usize, mat: DMatrix<Complex64>) -> Result<Self> {
        if !(1..=2).contains(&arity) {
            return Err(Error::ShapeMismatch(format!(
                "gate arity {arity} (expected 1 or 2)"
            )));
        }
        let side = dim.pow(arity);
        if mat.nrows() != side || mat.ncols() != side {
            return Err(Error::ShapeMismatch(format!(
                "{}×{} matrix for a {arity}-qudit gate with d={dim} (expected {side}×{side})",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(GateMatrix { dim, arity, mat })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Column convention: entry `(i, j)` is `⟨i|G|j⟩`, the amplitude of output
    /// `|i⟩` for input `|j⟩`.
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    /// The transpose of [`matrix`](Self::matrix): row `i` lists the image of
    /// input `|i⟩`. This is the layout of the printed qutrit CNOT table, whose
    /// rows are inputs (`|1,0⟩` in row 3 has its 1 in column 4, `|1,1⟩`).
    pub fn input_row_layout(&self) -> DMatrix<Complex64> {
        self.mat.transpose()
    }

    pub fn dagger(&self) -> GateMatrix {
        GateMatrix {
            dim: self.dim,
            arity: self.arity,
            mat: self.mat.adjoint(),
        }
    }

    /// `self · other` (apply `other` first).
    pub fn compose(&self, other: &GateMatrix) -> Result<GateMatrix> {
        if self.dim != other.dim || self.arity != other.arity {
            return Err(Error::ShapeMismatch(
                "composing gates of different shape".into(),
            ));
        }
        Ok(GateMatrix {
            dim: self.dim,
            arity: self.arity,
            mat: &self.mat * &other.mat,
        })
    }

    pub fn identity(dim: Dim, arity: usize) -> Result<GateMatrix> {
        let side = dim.pow(arity);
        GateMatrix::new_unchecked(dim, arity, DMatrix::identity(side, side))
    }

    pub fn is_unitary(&self) -> bool {
        is_unitary(&self.mat)
    }

    /// `max |a_ij − b_ij|`.
    pub fn max_abs_diff(&self, other: &GateMatrix) -> f64 {
        if self.mat.shape() != other.mat.shape() {
            return f64::INFINITY;
        }
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn unitarity_error(m: &DMatrix<Complex64>) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let prod = m * m.adjoint();
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

/// True iff `max |G·G† − I| ≤ 1e-12`.
pub fn is_unitary(m: &DMatrix<Complex64>) -> bool {
    unitarity_error(m) <= INTERNAL_TOL
}

fn diagonal(d: Dim, phases: impl Fn(usize) -> Complex64) -> GateMatrix {
    let n = d.get();
    let mut mat = DMatrix::zeros(n, n);
    for j in 0..n {
        mat[(j, j)] = phases(j);
    }
    GateMatrix {
        dim: d,
        arity: 1,
        mat,
    }
}

/// `Z|j⟩ = ω^j|j⟩`.
pub fn pauli_z(d: Dim) -> GateMatrix {
    diagonal(d, |j| omega_pow(d, j as i64))
}

/// `Z^r` built directly as `diag(ω^{r·j})`.
pub fn pauli_z_power(d: Dim, r: usize) -> GateMatrix {
    diagonal(d, |j| omega_pow(d, (r * j) as i64))
}

/// Cyclic shift `X|j⟩ = |j + 1 mod d⟩`.
pub fn pauli_x(d: Dim) -> GateMatrix {
    let n = d.get();
    let mut mat = DMatrix::zeros(n, n);
    for j in 0..n {
        mat[((j + 1) % n, j)] = ONE;
    }
    GateMatrix {
        dim: d,
        arity: 1,
        mat,
    }
}

/// Matrix power by repeated squaring; `r = 0` gives the identity.
pub fn gate_power(g: &GateMatrix, r: usize) -> GateMatrix {
    let side = g.mat.nrows();
    let mut result = DMatrix::identity(side, side);
    let mut base = g.mat.clone();
    let mut e = r;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    GateMatrix {
        dim: g.dim,
        arity: g.arity,
        mat: result,
    }
}

/// Quantum Fourier gate `H|j⟩ = (1/√d) Σ_k ω^{j·k}|k⟩`.
pub fn hadamard(d: Dim) -> GateMatrix {
    let n = d.get();
    let scale = 1.0 / (n as f64).sqrt();
    let mat = DMatrix::from_fn(n, n, |k, j| omega_pow(d, (j * k) as i64) * scale);
    GateMatrix {
        dim: d,
        arity: 1,
        mat,
    }
}

/// `H†`, the inverse Fourier gate.
pub fn hadamard_inverse(d: Dim) -> GateMatrix {
    hadamard(d).dagger()
}

/// `CNOT_d = I ⊕ X ⊕ X² ⊕ … ⊕ X^{d−1}`, i.e. `|a, b⟩ → |a, a + b mod d⟩`.
pub fn cnot(d: Dim) -> GateMatrix {
    let n = d.get();
    let x = pauli_x(d);
    let mut mat = DMatrix::zeros(n * n, n * n);
    for a in 0..n {
        let block = gate_power(&x, a);
        mat.view_mut((a * n, a * n), (n, n)).copy_from(&block.mat);
    }
    GateMatrix {
        dim: d,
        arity: 2,
        mat,
    }
}

/// `CNOT_d†`: `|a, b⟩ → |a, b − a mod d⟩`.
pub fn cnot_dagger(d: Dim) -> GateMatrix {
    cnot(d).dagger()
}

/// Exchanges two qudits.
pub fn swap(d: Dim) -> GateMatrix {
    let n = d.get();
    let mut mat = DMatrix::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            mat[(b * n + a, a * n + b)] = ONE;
        }
    }
    GateMatrix {
        dim: d,
        arity: 2,
        mat,
    }
}

fn check_gate(s: &PureState, g: &GateMatrix, arity: usize) -> Result<()> {
    if g.arity != arity {
        return Err(Error::ShapeMismatch(format!(
            "expected a {arity}-qudit gate, got arity {}",
            g.arity
        )));
    }
    if g.dim != s.dim() {
        return Err(Error::ShapeMismatch(format!(
            "gate d={} applied to state d={}",
            g.dim,
            s.dim()
        )));
    }
    Ok(())
}

fn stride(s: &PureState, q: usize) -> usize {
    s.dim().pow(s.num_qudits() - 1 - q)
}

/// Applies a one-qudit gate to `target`, identity elsewhere.
pub fn apply_1q(s: &PureState, g: &GateMatrix, target: usize) -> Result<PureState> {
    check_gate(s, g, 1)?;
    s.check_qudit("target", target)?;
    let d = s.dim().get();
    let st = stride(s, target);
    let src = s.amplitudes();
    let mut out = vec![ZERO; src.len()];
    let mut local = vec![ZERO; d];
    for block in (0..src.len()).step_by(st * d) {
        for inner in 0..st {
            let base = block + inner;
            for (j, v) in local.iter_mut().enumerate() {
                *v = src[base + j * st];
            }
            for k in 0..d {
                out[base + k * st] = (0..d).map(|j| g.mat[(k, j)] * local[j]).sum();
            }
        }
    }
    Ok(PureState::from_parts(s.dim(), s.num_qudits(), out))
}

/// Applies a two-qudit gate with its first slot bound to `control` and its
/// second to `target`. Positions need not be adjacent or ordered.
pub fn apply_2q(s: &PureState, g: &GateMatrix, control: usize, target: usize) -> Result<PureState> {
    check_gate(s, g, 2)?;
    s.check_qudit("control", control)?;
    s.check_qudit("target", target)?;
    if control == target {
        return Err(Error::ShapeMismatch(format!(
            "control and target are both qudit {control}"
        )));
    }
    let d = s.dim().get();
    let sc = stride(s, control);
    let stt = stride(s, target);
    let src = s.amplitudes();
    let mut out = vec![ZERO; src.len()];
    let mut local = vec![ZERO; d * d];
    for base in 0..src.len() {
        if !(base / sc).is_multiple_of(d) || !(base / stt).is_multiple_of(d) {
            continue;
        }
        for a in 0..d {
            for b in 0..d {
                local[a * d + b] = src[base + a * sc + b * stt];
            }
        }
        for a in 0..d {
            for b in 0..d {
                let row = a * d + b;
                out[base + a * sc + b * stt] =
                    (0..d * d).map(|col| g.mat[(row, col)] * local[col]).sum();
            }
        }
    }
    Ok(PureState::from_parts(s.dim(), s.num_qudits(), out))
}
