//! Pauli error labels and the two symplectic forms that classify them.
//!
//! A [`PauliVector`] `(a|b)` names `X^a Z^b` up to phase. Bits are packed as
//! X bits first (`0..n`), then Z bits (`n..2n`), qubit 0 least significant.
//!
//! The field form `B(x, y) = Tr(x · y^(2^(rs)))` on `GF(2^(2rs))` is pulled
//! back to the standard form by [`align_bases`], which runs a deterministic
//! symplectic Gram–Schmidt over the field's binary coordinates.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{self, parity, parse_hex, to_hex};
use crate::gf2e::{TowerElement, TowerField};
use crate::state::{check_dense_cap, CMatrix, ONE, ZERO};

/// Qubit limit imposed by the `u64` packing.
pub const MAX_PAULI_QUBITS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliVector {
    n: u32,
    bits: u64,
}

impl PauliVector {
    pub fn new(n: usize, bits: u64) -> Result<Self> {
        if n > MAX_PAULI_QUBITS {
            return Err(Error::CapExceeded {
                what: "Pauli qubit count",
                got: n,
                cap: MAX_PAULI_QUBITS,
            });
        }
        if 2 * n < 64 && bits >> (2 * n) != 0 {
            return Err(Error::SizeMismatch {
                expected: 2 * n,
                got: 64 - bits.leading_zeros() as usize,
            });
        }
        Ok(PauliVector { n: n as u32, bits })
    }

    pub fn from_parts(n: usize, x: u64, z: u64) -> Result<Self> {
        let mask = low_mask(n);
        if x & !mask != 0 || z & !mask != 0 {
            return Err(Error::SizeMismatch {
                expected: n,
                got: 64 - (x | z).leading_zeros() as usize,
            });
        }
        Self::new(n, x | (z << n))
    }

    pub fn identity(n: usize) -> Self {
        PauliVector {
            n: n as u32,
            bits: 0,
        }
    }

    pub fn n(self) -> usize {
        self.n as usize
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    /// The `a` part (X exponents).
    pub fn x_part(self) -> u64 {
        self.bits & low_mask(self.n())
    }

    /// The `b` part (Z exponents).
    pub fn z_part(self) -> u64 {
        self.bits >> self.n
    }

    pub fn is_identity(self) -> bool {
        self.bits == 0
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(self) -> u32 {
        (self.x_part() | self.z_part()).count_ones()
    }

    /// Every label on `n` qubits in ascending bit order, identity first.
    pub fn all(n: usize) -> impl Iterator<Item = PauliVector> {
        (0..1u64 << (2 * n)).map(move |bits| PauliVector { n: n as u32, bits })
    }

    pub fn to_hex(self) -> String {
        to_hex(self.bits, 2 * self.n())
    }

    pub fn from_hex(n: usize, s: &str) -> Result<Self> {
        Self::new(n, parse_hex(s)?)
    }
}

pub(crate) fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl Add for PauliVector {
    type Output = PauliVector;

    /// Product of the named operators, up to phase.
    fn add(self, rhs: PauliVector) -> PauliVector {
        assert_eq!(self.n, rhs.n, "Pauli labels on different qubit counts");
        PauliVector {
            n: self.n,
            bits: self.bits ^ rhs.bits,
        }
    }
}

impl fmt::Display for PauliVector {
    /// Text form over `{I, X, Z, Y}`, qubit 0 leftmost.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (x, z) = (self.x_part(), self.z_part());
        for q in 0..self.n() {
            let c = match ((x >> q) & 1, (z >> q) & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (0, 1) => 'Z',
                _ => 'Y',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (mut x, mut z) = (0u64, 0u64);
        let n = s.chars().count();
        if n > MAX_PAULI_QUBITS {
            return Err(Error::CapExceeded {
                what: "Pauli qubit count",
                got: n,
                cap: MAX_PAULI_QUBITS,
            });
        }
        for (q, c) in s.chars().enumerate() {
            match c.to_ascii_uppercase() {
                'I' => {}
                'X' => x |= 1 << q,
                'Z' => z |= 1 << q,
                'Y' => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                other => {
                    return Err(Error::Parse(format!(
                        "invalid Pauli character '{other}' in '{s}'"
                    )))
                }
            }
        }
        Self::from_parts(n, x, z)
    }
}

/// Standard symplectic product `a'·b + a·b'` over GF(2); zero iff the named
/// operators commute.
pub fn symplectic_standard(x: PauliVector, y: PauliVector) -> Result<u8> {
    if x.n != y.n {
        return Err(Error::SizeMismatch {
            expected: x.n(),
            got: y.n(),
        });
    }
    Ok(symplectic_bits(x.n(), x.bits, y.bits))
}

/// [`symplectic_standard`] on raw packed labels.
#[inline]
pub(crate) fn symplectic_bits(n: usize, x: u64, y: u64) -> u8 {
    let m = low_mask(n);
    let (a, b) = (x & m, x >> n);
    let (a2, b2) = (y & m, y >> n);
    parity((a2 & b) ^ (a & b2))
}

/// Field form `B(x, y) = Tr(x · y^(2^(rs)))`.
pub fn symplectic_field(tower: &TowerField, x: TowerElement, y: TowerElement) -> Result<u8> {
    tower.element(x.bits())?;
    tower.element(y.bits())?;
    let rs = tower.r() * tower.s();
    Ok(tower.trace(tower.mul(x, tower.frobenius(y, rs))))
}

/// Invertible change of coordinates taking field-form geometry to the
/// standard form: `B_field(u, v) = B_std(M u, M v)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymplecticBasisMap {
    n: usize,
    /// Rows of `M` (field coordinates -> standard `(a|b)` coordinates).
    to_standard: Vec<u64>,
    /// Rows of `M^-1`.
    to_field: Vec<u64>,
}

impl SymplecticBasisMap {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &[u64] {
        &self.to_standard
    }

    pub fn inverse_matrix(&self) -> &[u64] {
        &self.to_field
    }

    pub fn to_standard(&self, u: TowerElement) -> PauliVector {
        PauliVector {
            n: self.n as u32,
            bits: gf2::mat_vec(&self.to_standard, u.bits()),
        }
    }

    pub fn to_field(&self, p: PauliVector) -> TowerElement {
        TowerElement(gf2::mat_vec(&self.to_field, p.bits()))
    }
}

/// Gram matrix of the field form on the binary coordinate basis; row `i`
/// holds `B(e_i, e_j)` in bit `j`.
fn field_gram(tower: &TowerField) -> Vec<u64> {
    let dim = tower.bits() as usize;
    let rs = tower.r() * tower.s();
    let conj: Vec<TowerElement> = (0..dim)
        .map(|j| tower.frobenius(TowerElement(1 << j), rs))
        .collect();
    (0..dim)
        .map(|i| {
            let ei = TowerElement(1 << i);
            (0..dim).fold(0u64, |row, j| {
                row | (u64::from(tower.trace(tower.mul(ei, conj[j]))) << j)
            })
        })
        .collect()
}

#[inline]
fn gram_form(gram: &[u64], u: u64, v: u64) -> u8 {
    let mut acc = 0u8;
    let mut rest = u;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        acc ^= parity(gram[i] & v);
        rest &= rest - 1;
    }
    acc
}

/// Symplectic Gram–Schmidt: repeatedly take the lowest-index nonzero vector,
/// pair it with the lowest-index partner, and project the pair out of the
/// remaining vectors. Pair `i` becomes `(X_i, Z_i)`.
pub fn align_bases(tower: &TowerField) -> Result<SymplecticBasisMap> {
    let dim = tower.bits() as usize;
    let n = dim / 2;
    let gram = field_gram(tower);
    let mut pool: Vec<u64> = (0..dim).map(|i| 1u64 << i).collect();
    let mut xs = Vec::with_capacity(n);
    let mut zs = Vec::with_capacity(n);
    while let Some(ui) = pool.iter().position(|&v| v != 0) {
        let u = pool.remove(ui);
        let vi = pool
            .iter()
            .position(|&w| gram_form(&gram, u, w) == 1)
            .ok_or_else(|| Error::Internal("field form is degenerate".into()))?;
        let v = pool.remove(vi);
        for w in pool.iter_mut() {
            let (bu, bv) = (gram_form(&gram, *w, u), gram_form(&gram, *w, v));
            if bv == 1 {
                *w ^= u;
            }
            if bu == 1 {
                *w ^= v;
            }
        }
        xs.push(u);
        zs.push(v);
    }
    if xs.len() != n {
        return Err(Error::Internal(format!(
            "found {} hyperbolic pairs, expected {n}",
            xs.len()
        )));
    }
    // Columns of M^-1 are the pair vectors in (X_0..X_{n-1}, Z_0..Z_{n-1}) order.
    let columns: Vec<u64> = xs.into_iter().chain(zs).collect();
    let to_field = gf2::transpose(&columns, dim);
    let to_standard = gf2::inverse(&to_field, dim)
        .ok_or_else(|| Error::Internal("symplectic basis is singular".into()))?;
    Ok(SymplecticBasisMap {
        n,
        to_standard,
        to_field,
    })
}

/// Dense matrix of `X^a Z^b` (no phase correction), `n <= 12`.
pub fn pauli_to_dense(p: PauliVector) -> Result<CMatrix> {
    check_dense_cap(p.n())?;
    let dim = 1usize << p.n();
    let (a, b) = (p.x_part() as usize, p.z_part() as usize);
    let mut m = CMatrix::from_element(dim, dim, ZERO);
    for j in 0..dim {
        let sign = (b & j).count_ones() & 1;
        m[(j ^ a, j)] = if sign == 1 { -ONE } else { ONE };
    }
    Ok(m)
}

/// Dense Hermitian form `i^(a·b) X^a Z^b`, the observable used for
/// stabilizer and logical measurements.
pub fn pauli_to_dense_hermitian(p: PauliVector) -> Result<CMatrix> {
    let phase = crate::state::i_pow((p.x_part() & p.z_part()).count_ones());
    Ok(pauli_to_dense(p)? * phase)
}
