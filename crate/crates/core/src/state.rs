//! Multi-qudit pure states and reduced density matrices.
//!
//! Amplitudes are indexed big-endian: qudit 0 is the most significant base-`d`
//! digit of the flat index, so `|a, b⟩` lives at `a·d + b`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::arith::Dim;
use crate::error::{Error, Result};

/// Input normalization tolerance; deviations inside it are silently renormalized.
pub const INPUT_NORM_TOL: f64 = 1e-9;
/// Tolerance for internal consistency checks.
pub const INTERNAL_TOL: f64 = 1e-12;

/// Digits of a basis state, one per qudit, each in `[0, d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisIndex(pub Vec<usize>);

impl BasisIndex {
    pub fn new(digits: Vec<usize>) -> Self {
        BasisIndex(digits)
    }

    pub fn digits(&self) -> &[usize] {
        &self.0
    }

    pub fn to_flat(&self, d: Dim) -> Result<usize> {
        let mut flat = 0usize;
        for &digit in &self.0 {
            d.check_dit("digit", digit)?;
            flat = flat * d.get() + digit;
        }
        Ok(flat)
    }

    pub fn from_flat(flat: usize, d: Dim, num_qudits: usize) -> Result<Self> {
        let len = d.pow(num_qudits);
        if flat >= len {
            return Err(Error::out_of_range("flat index", flat, len));
        }
        let mut digits = vec![0; num_qudits];
        let mut rest = flat;
        for slot in digits.iter_mut().rev() {
            *slot = rest % d.get();
            rest /= d.get();
        }
        Ok(BasisIndex(digits))
    }
}

/// Normalized amplitude vector over `num_qudits` qudits of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dim: Dim,
    num_qudits: usize,
    amps: Vec<Complex64>,
}

impl PureState {
    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn num_qudits(&self) -> usize {
        self.num_qudits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn amplitude(&self, idx: &BasisIndex) -> Result<Complex64> {
        if idx.0.len() != self.num_qudits {
            return Err(Error::ShapeMismatch(format!(
                "index has {} digits, state has {} qudits",
                idx.0.len(),
                self.num_qudits
            )));
        }
        Ok(self.amps[idx.to_flat(self.dim)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    /// Largest elementwise distance `max_i |x_i − y_i|`.
    pub fn max_abs_diff(&self, other: &PureState) -> Result<f64> {
        check_same_shape(self, other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }

    pub(crate) fn check_qudit(&self, what: &'static str, q: usize) -> Result<()> {
        if q < self.num_qudits {
            Ok(())
        } else {
            Err(Error::out_of_range(what, q, self.num_qudits))
        }
    }

    /// Builds a state from amplitudes that are already normalized up to
    /// floating-point noise (e.g. the image of a unitary). No checks.
    pub(crate) fn from_parts(dim: Dim, num_qudits: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), dim.pow(num_qudits));
        PureState {
            dim,
            num_qudits,
            amps,
        }
    }

    /// Rescales amplitudes by `1/√norm`. Callers guarantee a nonzero norm.
    pub(crate) fn renormalized(dim: Dim, num_qudits: usize, mut amps: Vec<Complex64>) -> Self {
        let norm = amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        PureState::from_parts(dim, num_qudits, amps)
    }
}

fn check_same_shape(x: &PureState, y: &PureState) -> Result<()> {
    if x.dim != y.dim || x.num_qudits != y.num_qudits {
        return Err(Error::ShapeMismatch(format!(
            "({} qudits, d={}) vs ({} qudits, d={})",
            x.num_qudits, x.dim, y.num_qudits, y.dim
        )));
    }
    Ok(())
}

/// Standard-basis state with amplitude 1 at `idx`.
pub fn basis_state(d: Dim, n: usize, idx: &BasisIndex) -> Result<PureState> {
    if n == 0 || idx.0.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "basis index has {} digits, expected {n} (n ≥ 1)",
            idx.0.len()
        )));
    }
    let flat = idx.to_flat(d)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); d.pow(n)];
    amps[flat] = Complex64::new(1.0, 0.0);
    Ok(PureState::from_parts(d, n, amps))
}

/// Validates and stores a state. The qudit count is inferred from the length,
/// which must be `d^n` for some `n ≥ 1`.
pub fn make_state(d: Dim, amps: Vec<Complex64>) -> Result<PureState> {
    let num_qudits = qudits_for_len(d, amps.len())?;
    if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::Validation("amplitudes must be finite".into()));
    }
    let norm_sqr: f64 = amps.iter().map(Complex64::norm_sqr).sum();
    if norm_sqr == 0.0 {
        return Err(Error::Validation("all-zero amplitude vector".into()));
    }
    let deviation = (norm_sqr - 1.0).abs();
    if deviation > INPUT_NORM_TOL {
        return Err(Error::Validation(format!(
            "squared norm {norm_sqr} deviates from 1 by {deviation:e} (tolerance {INPUT_NORM_TOL:e})"
        )));
    }
    Ok(PureState::renormalized(d, num_qudits, amps))
}

fn qudits_for_len(d: Dim, len: usize) -> Result<usize> {
    let mut n = 0;
    let mut size = 1usize;
    while size < len {
        size = size.saturating_mul(d.get());
        n += 1;
    }
    if size != len || n == 0 {
        return Err(Error::ShapeMismatch(format!(
            "amplitude count {len} is not a positive power of d={d}"
        )));
    }
    Ok(n)
}

/// `(|0⟩ + … + |d−1⟩)/√d`.
pub fn uniform_superposition(d: Dim) -> PureState {
    let a = Complex64::new(1.0 / (d.get() as f64).sqrt(), 0.0);
    PureState::from_parts(d, 1, vec![a; d.get()])
}

/// Haar-distributed random state: i.i.d. complex Gaussian amplitudes, normalized.
pub fn random_state<R: Rng + ?Sized>(d: Dim, n: usize, rng: &mut R) -> PureState {
    assert!(n >= 1, "random_state needs at least one qudit");
    loop {
        let amps: Vec<Complex64> = (0..d.pow(n))
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if amps.iter().any(|a| a.norm_sqr() > 0.0) {
            return PureState::renormalized(d, n, amps);
        }
    }
}

/// `⟨x|y⟩ = Σ conj(x_i)·y_i`.
pub fn inner_product(x: &PureState, y: &PureState) -> Result<Complex64> {
    check_same_shape(x, y)?;
    Ok(x.amps.iter().zip(&y.amps).map(|(a, b)| a.conj() * b).sum())
}

/// Squared overlap `|⟨x|y⟩|²`.
pub fn fidelity(x: &PureState, y: &PureState) -> Result<f64> {
    Ok(inner_product(x, y)?.norm_sqr())
}

/// Kronecker product `x ⊗ y`; `x` occupies the leading qudits.
pub fn tensor_product(x: &PureState, y: &PureState) -> Result<PureState> {
    if x.dim != y.dim {
        return Err(Error::ShapeMismatch(format!(
            "cannot tensor d={} with d={}",
            x.dim, y.dim
        )));
    }
    let amps = x
        .amps
        .iter()
        .flat_map(|a| y.amps.iter().map(move |b| a * b))
        .collect();
    Ok(PureState::from_parts(
        x.dim,
        x.num_qudits + y.num_qudits,
        amps,
    ))
}

/// Reduced state of a subsystem of qudits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: Dim,
    num_qudits: usize,
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn num_qudits(&self) -> usize {
        self.num_qudits
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let adj = self.mat.adjoint();
        self.mat
            .iter()
            .zip(adj.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.mat.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Von Neumann entropy with logarithms in base `d`. Eigenvalues below
    /// `1e-14` are dropped.
    pub fn entropy(&self) -> f64 {
        let ln_d = (self.dim.get() as f64).ln();
        let s: f64 = self
            .eigenvalues()
            .into_iter()
            .filter(|&l| l > 1e-14)
            .map(|l| -l * l.ln() / ln_d)
            .sum();
        s.max(0.0)
    }
}

/// Single-qudit reduced density matrix of qudit `keep`.
pub fn reduced_density(s: &PureState, keep: usize) -> Result<DensityMatrix> {
    reduced_density_subsystem(s, &[keep])
}

/// Partial trace over every qudit not listed in `keep`. The kept qudits are
/// ordered as given.
pub fn reduced_density_subsystem(s: &PureState, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::ShapeMismatch("empty subsystem".into()));
    }
    for (i, &q) in keep.iter().enumerate() {
        s.check_qudit("keep", q)?;
        if keep[..i].contains(&q) {
            return Err(Error::ShapeMismatch(format!("qudit {q} listed twice")));
        }
    }
    let d = s.dim.get();
    let n = s.num_qudits;
    let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let keep_len = d.pow(keep.len() as u32);
    let rest_len = d.pow(rest.len() as u32);

    // M[k, r] = ψ(k ∪ r); ρ = M·M†.
    let mut m = DMatrix::<Complex64>::zeros(keep_len, rest_len);
    let strides: Vec<usize> = (0..n).map(|q| d.pow((n - 1 - q) as u32)).collect();
    for (flat, amp) in s.amps.iter().enumerate() {
        let digit = |q: usize| (flat / strides[q]) % d;
        let k = keep.iter().fold(0, |acc, &q| acc * d + digit(q));
        let r = rest.iter().fold(0, |acc, &q| acc * d + digit(q));
        m[(k, r)] = *amp;
    }
    let mat = &m * m.adjoint();
    Ok(DensityMatrix {
        dim: s.dim,
        num_qudits: keep.len(),
        mat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dim(d: usize) -> Dim {
        Dim::new(d).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ket(d: usize, digits: &[usize]) -> PureState {
        basis_state(dim(d), digits.len(), &BasisIndex::new(digits.to_vec())).unwrap()
    }

    #[test]
    fn basis_state_examples() {
        let s = ket(3, &[2]);
        assert_eq!(s.amplitudes(), &[c(0., 0.), c(0., 0.), c(1., 0.)]);
        let s = ket(2, &[0]);
        assert_eq!(s.amplitudes(), &[c(1., 0.), c(0., 0.)]);
        let s = ket(3, &[1, 0]);
        assert_eq!(s.amplitudes()[3], c(1., 0.));
        assert_eq!(s.norm_sqr(), 1.0);
        let err = basis_state(dim(3), 1, &BasisIndex::new(vec![3])).unwrap_err();
        assert!(err.is_domain());
    }

    #[test]
    fn flat_index_round_trip() {
        for d in 2..=5 {
            for n in 1..=4 {
                for flat in 0..dim(d).pow(n) {
                    let idx = BasisIndex::from_flat(flat, dim(d), n).unwrap();
                    assert_eq!(idx.to_flat(dim(d)).unwrap(), flat);
                    let s = basis_state(dim(d), n, &idx).unwrap();
                    assert_eq!(s.amplitudes()[flat], c(1., 0.));
                }
            }
        }
    }

    #[test]
    fn make_state_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = make_state(dim(2), vec![c(h, 0.), c(h, 0.)]).unwrap();
        assert_eq!(s.num_qudits(), 1);
        let mut amps = vec![c(0., 0.); 9];
        amps[0] = c(1., 0.);
        let s = make_state(dim(3), amps).unwrap();
        assert_eq!(s.num_qudits(), 2);
        let err = make_state(dim(2), vec![c(1., 0.), c(1., 0.)]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        let err = make_state(dim(2), vec![c(0., 0.), c(0., 0.)]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        let err = make_state(dim(3), vec![c(1., 0.), c(0., 0.)]).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
        let err = make_state(dim(2), vec![c(f64::NAN, 0.), c(0., 0.)]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn make_state_renormalizes_within_tolerance() {
        let s = make_state(dim(2), vec![c(1.0 + 1e-10, 0.), c(0., 0.)]).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(make_state(dim(2), vec![c(1.0 + 1e-8, 0.), c(0., 0.)]).is_err());
    }

    #[test]
    fn inner_product_and_fidelity_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let zero = ket(2, &[0]);
        let one = ket(2, &[1]);
        let plus = make_state(dim(2), vec![c(h, 0.), c(h, 0.)]).unwrap();
        assert_eq!(inner_product(&zero, &zero).unwrap(), c(1., 0.));
        assert_eq!(inner_product(&zero, &one).unwrap(), c(0., 0.));
        assert!((inner_product(&zero, &plus).unwrap() - c(h, 0.)).norm() < 1e-15);
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-15);
        assert!(inner_product(&zero, &ket(3, &[0])).unwrap_err().is_domain());
        assert!(inner_product(&zero, &ket(2, &[0, 0]))
            .unwrap_err()
            .is_domain());
    }

    #[test]
    fn tensor_product_examples() {
        let s = tensor_product(&ket(2, &[1]), &ket(2, &[0])).unwrap();
        assert_eq!(s.num_qudits(), 2);
        assert_eq!(s.amplitudes()[2], c(1., 0.));

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_state(dim(3), 1, &mut rng);
        let s = tensor_product(&x, &ket(3, &[0])).unwrap();
        for (j, a) in x.amplitudes().iter().enumerate() {
            assert_eq!(s.amplitudes()[3 * j], *a);
            assert_eq!(s.amplitudes()[3 * j + 1], c(0., 0.));
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(tensor_product(&x, &ket(2, &[0])).unwrap_err().is_domain());
    }

    #[test]
    fn reduced_density_product_state_is_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_state(dim(3), 1, &mut rng);
        let y = random_state(dim(3), 1, &mut rng);
        let s = tensor_product(&x, &y).unwrap();
        let rho = reduced_density(&s, 1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = y.amplitudes()[i] * y.amplitudes()[j].conj();
                assert!((rho.matrix()[(i, j)] - expected).norm() < 1e-12);
            }
        }
        assert!(rho.entropy() < 1e-12);
    }

    #[test]
    fn reduced_density_maximally_entangled() {
        for d in [2usize, 3] {
            let a = 1.0 / (d as f64).sqrt();
            let mut amps = vec![c(0., 0.); d * d];
            for j in 0..d {
                amps[j * d + j] = c(a, 0.);
            }
            let s = make_state(dim(d), amps).unwrap();
            for keep in 0..2 {
                let rho = reduced_density(&s, keep).unwrap();
                for i in 0..d {
                    for j in 0..d {
                        let expected = if i == j { 1.0 / d as f64 } else { 0.0 };
                        assert!((rho.matrix()[(i, j)] - c(expected, 0.)).norm() < 1e-12);
                    }
                }
                assert!((rho.entropy() - 1.0).abs() < 1e-12);
            }
        }
        assert!(reduced_density(&ket(2, &[0, 0]), 2)
            .unwrap_err()
            .is_domain());
    }

    #[test]
    fn subsystem_rejects_duplicates() {
        let s = ket(2, &[0, 1, 0]);
        assert!(reduced_density_subsystem(&s, &[1, 1]).is_err());
        assert!(reduced_density_subsystem(&s, &[]).is_err());
        let rho = reduced_density_subsystem(&s, &[2, 1]).unwrap();
        // qudit 2 = 0, qudit 1 = 1 → index 0·2 + 1
        assert!((rho.matrix()[(1, 1)] - c(1., 0.)).norm() < 1e-15);
    }

    #[test]
    fn reduced_density_invariants_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..1000 {
            let d = dim(2 + trial % 4);
            let n = 1 + (trial / 4) % 4;
            let s = random_state(d, n, &mut rng);
            assert!((inner_product(&s, &s).unwrap() - 1.0).norm() < 1e-12);
            let rho = reduced_density(&s, trial % n).unwrap();
            assert!((rho.trace() - 1.0).norm() < 1e-12);
            assert!(rho.hermiticity_error() < 1e-12);
            assert!(rho.eigenvalues()[0] >= -1e-12);
            let e = rho.entropy();
            assert!((-1e-12..=1.0 + 1e-12).contains(&e));
        }
    }

    proptest! {
        #[test]
        fn tensor_norm_is_multiplicative(seed in any::<u64>(), d in 2usize..=6, n1 in 1usize..=2, n2 in 1usize..=2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_state(dim(d), n1, &mut rng);
            let y = random_state(dim(d), n2, &mut rng);
            let s = tensor_product(&x, &y).unwrap();
            prop_assert_eq!(s.num_qudits(), n1 + n2);
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn self_overlap_is_one(seed in any::<u64>(), d in 2usize..=16) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_state(dim(d), 1, &mut rng);
            prop_assert!((inner_product(&s, &s).unwrap() - 1.0).norm() < 1e-12);
            let t = make_state(dim(d), s.amplitudes().to_vec()).unwrap();
            prop_assert!(t.max_abs_diff(&s).unwrap() < 1e-15);
        }
    }
}
