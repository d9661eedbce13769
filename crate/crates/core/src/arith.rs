//! Dits, modular arithmetic and roots of unity.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest supported qudit dimension.
pub const MIN_DIM: usize = 2;
/// Largest supported qudit dimension.
pub const MAX_DIM: usize = 16;

/// Number of basis states of a qudit (its freedom level).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dim(usize);

impl Dim {
    pub fn new(d: usize) -> Result<Self> {
        if (MIN_DIM..=MAX_DIM).contains(&d) {
            Ok(Dim(d))
        } else {
            Err(Error::InvalidDim(d))
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// `d^n`, the length of an `n`-qudit amplitude vector.
    pub fn pow(self, n: usize) -> usize {
        self.0.pow(n as u32)
    }

    /// Every supported dimension, in increasing order.
    pub fn all() -> impl Iterator<Item = Dim> {
        (MIN_DIM..=MAX_DIM).map(Dim)
    }

    pub(crate) fn check_dit(self, what: &'static str, value: usize) -> Result<()> {
        if value < self.0 {
            Ok(())
        } else {
            Err(Error::out_of_range(what, value, self.0))
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<usize> for Dim {
    type Error = Error;

    fn try_from(d: usize) -> Result<Self> {
        Dim::new(d)
    }
}

/// `e^{2πik/d}` for `0 ≤ k < d`.
pub fn root_of_unity(d: Dim, k: usize) -> Result<Complex64> {
    d.check_dit("k", k)?;
    Ok(omega_pow(d, k as i64))
}

/// `ω^e` for any integer exponent; the exponent is reduced mod `d` first so that
/// large or negative powers never accumulate rounding error.
pub(crate) fn omega_pow(d: Dim, e: i64) -> Complex64 {
    let d = d.get() as i64;
    let k = e.rem_euclid(d);
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    // Exact values where the angle lands on an axis.
    if 2 * k == d {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * k == d {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * k == 3 * d {
        return Complex64::new(0.0, -1.0);
    }
    let theta = 2.0 * PI * (k as f64) / (d as f64);
    Complex64::new(theta.cos(), theta.sin())
}

/// `(a + b) mod d` for dits `a, b`.
pub fn mod_add(a: usize, b: usize, d: Dim) -> Result<usize> {
    d.check_dit("a", a)?;
    d.check_dit("b", b)?;
    Ok((a + b) % d.get())
}

/// The teleportation phase exponent `F(a, b) = (d − a·b) mod d`.
pub fn phase_exponent_f(a: usize, b: usize, d: Dim) -> Result<usize> {
    d.check_dit("a", a)?;
    d.check_dit("b", b)?;
    let d = d.get();
    Ok((d - (a * b) % d) % d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(d: usize) -> Dim {
        Dim::new(d).unwrap()
    }

    #[test]
    fn dim_bounds() {
        assert_eq!(Dim::new(1), Err(Error::InvalidDim(1)));
        assert_eq!(Dim::new(17), Err(Error::InvalidDim(17)));
        assert!(Dim::new(2).is_ok() && Dim::new(16).is_ok());
        assert_eq!(Dim::all().count(), 15);
    }

    #[test]
    fn root_of_unity_examples() {
        let w = root_of_unity(dim(2), 1).unwrap();
        assert!((w - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        let w = root_of_unity(dim(4), 1).unwrap();
        assert!((w - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        // cos(2π/3) = -1/2 and sin(2π/3) = √3/2, exact closed forms.
        let w = root_of_unity(dim(3), 1).unwrap();
        let expected = Complex64::new(-0.5, 0.866_025_403_784_438_6);
        assert!((w - expected).norm() < 1e-15);
        assert!(root_of_unity(dim(3), 3).unwrap_err().is_domain());
    }

    #[test]
    fn roots_raise_to_one() {
        for d in Dim::all() {
            for k in 0..d.get() {
                let w = root_of_unity(d, k).unwrap();
                let p = w.powu(d.get() as u32);
                assert!((p - 1.0).norm() < 1e-12, "d={d} k={k}");
            }
        }
    }

    #[test]
    fn omega_pow_reduces_exponent() {
        let d = dim(5);
        for e in -12i64..12 {
            let direct = root_of_unity(d, e.rem_euclid(5) as usize).unwrap();
            assert_eq!(omega_pow(d, e), direct);
        }
    }

    #[test]
    fn mod_add_examples() {
        assert_eq!(mod_add(1, 2, dim(3)).unwrap(), 0);
        assert_eq!(mod_add(4, 5, dim(7)).unwrap(), 2);
        for b in 0..7 {
            assert_eq!(mod_add(0, b, dim(7)).unwrap(), b);
        }
        assert!(mod_add(3, 0, dim(3)).is_err());
    }

    #[test]
    fn mod_add_is_a_group() {
        for d in Dim::all() {
            let n = d.get();
            for a in 0..n {
                assert_eq!(mod_add(a, (n - a) % n, d).unwrap(), 0);
                for b in 0..n {
                    for c in 0..n {
                        let lhs = mod_add(mod_add(a, b, d).unwrap(), c, d).unwrap();
                        let rhs = mod_add(a, mod_add(b, c, d).unwrap(), d).unwrap();
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn phase_exponent_examples() {
        for d in [2, 3, 5, 9] {
            for b in 0..d {
                assert_eq!(phase_exponent_f(0, b, dim(d)).unwrap(), 0);
            }
            assert_eq!(phase_exponent_f(1, d - 1, dim(d)).unwrap(), 1);
        }
        assert_eq!(phase_exponent_f(1, 1, dim(3)).unwrap(), 2);
        assert_eq!(phase_exponent_f(2, 2, dim(5)).unwrap(), 1);
        assert!(phase_exponent_f(0, 5, dim(5)).is_err());
    }

    #[test]
    fn phase_exponent_range_and_symmetry() {
        for d in Dim::all() {
            let n = d.get();
            for a in 0..n {
                for b in 0..n {
                    let f = phase_exponent_f(a, b, d).unwrap();
                    assert!(f < n);
                    assert_eq!(f, phase_exponent_f(b, a, d).unwrap());
                    // F(a, b) ≡ −a·b (mod d)
                    assert_eq!((f + a * b) % n, 0);
                }
            }
        }
    }
}
