//! Stabilizer mechanics for one code: completion to a full symplectic basis,
//! syndromes, logical labels, and dense encoders with a chosen syndrome.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{self, parity, to_hex};
use crate::pauli::{low_mask, symplectic_bits, PauliVector};
use crate::ptcodes::{form_dual, CurveCode};
use crate::state::{
    apply_pauli_hermitian, check_dense_cap, CMatrix, CVector, DenseState, C64, ONE, STATE_TOL, ZERO,
};

/// Stabilizers `g`, destabilizers `d`, and logical pairs `(X̄, Z̄)` with
/// `B(g_i, d_j) = δ_ij`, `B(X̄_i, Z̄_j) = δ_ij`, and every other pair zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticCompletion {
    n: usize,
    stabilizers: Vec<u64>,
    destabilizers: Vec<u64>,
    logical_x: Vec<u64>,
    logical_z: Vec<u64>,
}

/// Hex form of a completion for export next to a family file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionRecord {
    pub stabilizers: Vec<String>,
    pub destabilizers: Vec<String>,
    pub logical_x: Vec<String>,
    pub logical_z: Vec<String>,
}

impl SymplecticCompletion {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.stabilizers.len()
    }

    /// Logical qubits.
    pub fn m(&self) -> usize {
        self.logical_x.len()
    }

    pub fn stabilizers(&self) -> &[u64] {
        &self.stabilizers
    }

    pub fn destabilizers(&self) -> &[u64] {
        &self.destabilizers
    }

    pub fn logical_x(&self) -> &[u64] {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &[u64] {
        &self.logical_z
    }

    /// All `2n` vectors in the order `g, d, X̄, Z̄`.
    pub fn all_vectors(&self) -> Vec<u64> {
        [
            &self.stabilizers[..],
            &self.destabilizers[..],
            &self.logical_x[..],
            &self.logical_z[..],
        ]
        .concat()
    }

    pub fn syndrome_of(&self, x: PauliVector) -> Result<Syndrome> {
        self.check_size(x)?;
        Ok(Syndrome {
            len: self.s(),
            bits: self.syndrome_bits(x.bits()),
        })
    }

    #[inline]
    pub(crate) fn syndrome_bits(&self, x: u64) -> u64 {
        self.stabilizers.iter().enumerate().fold(0, |acc, (i, &g)| {
            acc | (u64::from(symplectic_bits(self.n, g, x)) << i)
        })
    }

    /// Logical label of `x ∈ Q^⊥`: X bit `j` is `B(Z̄_j, x)`, Z bit `j` (at
    /// position `m + j`) is `B(X̄_j, x)`.
    pub fn logical_action(&self, x: PauliVector) -> Result<u64> {
        self.check_size(x)?;
        if self.syndrome_bits(x.bits()) != 0 {
            return Err(Error::Precondition(format!(
                "{x} has nonzero syndrome; logical action needs x in the dual"
            )));
        }
        Ok(self.logical_bits(x.bits()))
    }

    #[inline]
    pub(crate) fn logical_bits(&self, x: u64) -> u64 {
        let m = self.m();
        let mut label = 0u64;
        for j in 0..m {
            label |= u64::from(symplectic_bits(self.n, self.logical_z[j], x)) << j;
            label |= u64::from(symplectic_bits(self.n, self.logical_x[j], x)) << (m + j);
        }
        label
    }

    fn check_size(&self, x: PauliVector) -> Result<()> {
        if x.n() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                got: x.n(),
            });
        }
        Ok(())
    }

    pub fn to_record(&self) -> CompletionRecord {
        let hex = |v: &[u64]| v.iter().map(|&g| to_hex(g, 2 * self.n)).collect();
        CompletionRecord {
            stabilizers: hex(&self.stabilizers),
            destabilizers: hex(&self.destabilizers),
            logical_x: hex(&self.logical_x),
            logical_z: hex(&self.logical_z),
        }
    }
}

/// Syndrome bits; bit `i` belongs to generator `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Syndrome {
    len: usize,
    bits: u64,
}

impl Syndrome {
    pub fn new(len: usize, bits: u64) -> Result<Self> {
        if bits & !low_mask(len) != 0 {
            return Err(Error::SizeMismatch {
                expected: len,
                got: 64 - bits.leading_zeros() as usize,
            });
        }
        Ok(Syndrome { len, bits })
    }

    pub fn zero(len: usize) -> Self {
        Syndrome { len, bits: 0 }
    }

    pub fn len(self) -> usize {
        self.len
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }
}

impl std::ops::BitXor for Syndrome {
    type Output = Syndrome;

    fn bitxor(self, rhs: Syndrome) -> Syndrome {
        assert_eq!(self.len, rhs.len);
        Syndrome {
            len: self.len,
            bits: self.bits ^ rhs.bits,
        }
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", (self.bits >> i) & 1)?;
        }
        Ok(())
    }
}

pub fn syndrome_of(code: &CurveCode, x: PauliVector) -> Result<Syndrome> {
    if x.n() != code.n() {
        return Err(Error::SizeMismatch {
            expected: code.n(),
            got: x.n(),
        });
    }
    Ok(Syndrome {
        len: code.s(),
        bits: code.syndrome_bits(x.bits()),
    })
}

/// Deterministic completion: destabilizers from the linear system
/// `B(g_j, d_i) = δ_ij`, made mutually isotropic by adding stabilizers, then
/// a symplectic Gram–Schmidt on the joint kernel for the logical pairs.
pub fn complete_code(code: &CurveCode) -> Result<SymplecticCompletion> {
    let n = code.n();
    let s = code.s();
    let dim = 2 * n;
    let g: Vec<u64> = code.generators().to_vec();
    let g_checks: Vec<u64> = g.iter().map(|&v| form_dual(n, v)).collect();

    let mut d = Vec::with_capacity(s);
    for i in 0..s {
        let di = gf2::solve(&g_checks, 1 << i, dim)
            .ok_or_else(|| Error::Internal("destabilizer system is inconsistent".into()))?;
        d.push(di);
    }
    for i in 0..s {
        for j in 0..i {
            if symplectic_bits(n, d[i], d[j]) == 1 {
                d[i] ^= g[j];
            }
        }
    }

    let constraints: Vec<u64> = g_checks
        .iter()
        .copied()
        .chain(d.iter().map(|&v| form_dual(n, v)))
        .collect();
    let mut pool = gf2::kernel(&constraints, dim);
    let mut lx = Vec::new();
    let mut lz = Vec::new();
    while let Some(ui) = pool.iter().position(|&v| v != 0) {
        let u = pool.remove(ui);
        let vi = pool
            .iter()
            .position(|&w| symplectic_bits(n, u, w) == 1)
            .ok_or_else(|| Error::Internal("logical space is degenerate".into()))?;
        let v = pool.remove(vi);
        for w in pool.iter_mut() {
            let (bu, bv) = (symplectic_bits(n, *w, u), symplectic_bits(n, *w, v));
            if bv == 1 {
                *w ^= u;
            }
            if bu == 1 {
                *w ^= v;
            }
        }
        lx.push(u);
        lz.push(v);
    }

    let completion = SymplecticCompletion {
        n,
        stabilizers: g,
        destabilizers: d,
        logical_x: lx,
        logical_z: lz,
    };
    if completion.m() != n - s || !pairing_is_standard(&completion) {
        return Err(Error::Internal("symplectic completion failed".into()));
    }
    Ok(completion)
}

/// True iff the Gram matrix of `g, d, X̄, Z̄` is the standard block form.
pub fn pairing_is_standard(c: &SymplecticCompletion) -> bool {
    let (s, m) = (c.s(), c.m());
    let all = c.all_vectors();
    if gf2::rank(&all) != 2 * c.n {
        return false;
    }
    let partner = |i: usize| -> Option<usize> {
        if i < s {
            Some(i + s)
        } else if i < 2 * s {
            Some(i - s)
        } else if i < 2 * s + m {
            Some(i + m)
        } else {
            Some(i - m)
        }
    };
    for i in 0..all.len() {
        for j in 0..all.len() {
            let want = u8::from(partner(i) == Some(j));
            if parity(form_dual(c.n, all[i]) & all[j]) != want {
                return false;
            }
        }
    }
    true
}

/// Dense encoders `E_y` (columns `|ȳ, c⟩`) for every syndrome of one code.
#[derive(Clone, Debug)]
pub struct DenseCode {
    completion: SymplecticCompletion,
    encoders: Vec<CMatrix>,
}

fn apply_hermitian_label(n: usize, p: u64, v: &[C64]) -> Vec<C64> {
    apply_pauli_hermitian(p & low_mask(n), p >> n, v)
}

/// `v ← (v + sign · P v) / 2`.
fn project(n: usize, p: u64, negative: bool, v: &mut [C64]) {
    let pv = apply_hermitian_label(n, p, v);
    for (a, b) in v.iter_mut().zip(pv) {
        *a = if negative {
            (*a - b) * 0.5
        } else {
            (*a + b) * 0.5
        };
    }
}

impl DenseCode {
    pub fn new(code: &CurveCode) -> Result<Self> {
        Self::from_completion(complete_code(code)?)
    }

    pub fn from_completion(completion: SymplecticCompletion) -> Result<Self> {
        let n = completion.n();
        check_dense_cap(n)?;
        let encoders = (0..1u64 << completion.s())
            .map(|y| build_encoder(&completion, y))
            .collect::<Result<Vec<_>>>()?;
        Ok(DenseCode {
            completion,
            encoders,
        })
    }

    pub fn completion(&self) -> &SymplecticCompletion {
        &self.completion
    }

    pub fn n(&self) -> usize {
        self.completion.n
    }

    pub fn m(&self) -> usize {
        self.completion.m()
    }

    pub fn s(&self) -> usize {
        self.completion.s()
    }

    /// `2^n x 2^m` isometry onto the syndrome-`y` space.
    pub fn encoder(&self, y: Syndrome) -> Result<&CMatrix> {
        self.check_syndrome(y)?;
        Ok(&self.encoders[y.bits as usize])
    }

    fn check_syndrome(&self, y: Syndrome) -> Result<()> {
        if y.len != self.s() {
            return Err(Error::SizeMismatch {
                expected: self.s(),
                got: y.len,
            });
        }
        Ok(())
    }
}

/// `|ȳ, 0⟩` is the normalized projection of the lowest basis state with
/// nonzero overlap, phased to a positive amplitude there; `|ȳ, c⟩` applies
/// `X̄_j` for each set bit of `c`, ascending.
fn build_encoder(c: &SymplecticCompletion, y: u64) -> Result<CMatrix> {
    let n = c.n;
    let dim = 1usize << n;
    let mdim = 1usize << c.m();
    let mut seed = None;
    for j in 0..dim {
        let mut v = vec![ZERO; dim];
        v[j] = ONE;
        for (i, &g) in c.stabilizers.iter().enumerate() {
            project(n, g, (y >> i) & 1 == 1, &mut v);
        }
        for &z in &c.logical_z {
            project(n, z, false, &mut v);
        }
        let norm_sq: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq > 1e-6 {
            let phase = v[j] / v[j].norm();
            let scale = 1.0 / (norm_sq.sqrt() * phase);
            seed = Some(v.into_iter().map(|a| a * scale).collect::<Vec<_>>());
            break;
        }
    }
    let base = seed.ok_or_else(|| Error::Internal("empty syndrome space".into()))?;
    let mut enc = CMatrix::from_element(dim, mdim, ZERO);
    for col in 0..mdim {
        let mut v = base.clone();
        for (j, &x) in c.logical_x.iter().enumerate() {
            if (col >> j) & 1 == 1 {
                v = apply_hermitian_label(n, x, &v);
            }
        }
        enc.set_column(col, &CVector::from_vec(v));
    }
    Ok(enc)
}

pub fn encode_dense(code: &DenseCode, y: Syndrome, msg: &DenseState) -> Result<DenseState> {
    if msg.n() != code.m() {
        return Err(Error::SizeMismatch {
            expected: code.m(),
            got: msg.n(),
        });
    }
    DenseState::from_vector(code.encoder(y)? * msg.amps())
}

/// Projects onto the syndrome space of largest weight (ties to the smallest
/// syndrome), and returns its normalized logical content with the observed
/// syndrome.
pub fn decode_dense(code: &DenseCode, state: &DenseState) -> Result<(DenseState, Syndrome)> {
    if state.n() != code.n() {
        return Err(Error::SizeMismatch {
            expected: code.n(),
            got: state.n(),
        });
    }
    let mut best: Option<(f64, usize, CVector)> = None;
    for (y, enc) in code.encoders.iter().enumerate() {
        let v = enc.adjoint() * state.amps();
        let w = v.norm_squared();
        if best.as_ref().is_none_or(|(bw, _, _)| w > bw + STATE_TOL) {
            best = Some((w, y, v));
        }
    }
    let (_, y, v) = best.expect("at least one syndrome");
    Ok((
        DenseState::normalized(v)?,
        Syndrome {
            len: code.s(),
            bits: y as u64,
        },
    ))
}

/// Identifies a `2^m`-dimensional matrix as `phase · X^a Z^b`, returning the
/// label (X bits low, Z bits at `m..2m`) and the phase.
pub fn identify_logical_pauli(m: usize, op: &CMatrix) -> Option<(u64, C64)> {
    let dim = 1usize << m;
    if op.nrows() != dim || op.ncols() != dim {
        return None;
    }
    let a = (0..dim).find(|&i| op[(i, 0)].norm() > 0.5)? as u64;
    let mut b = 0u64;
    let phase = op[(a as usize, 0)];
    for q in 0..m {
        let col = 1usize << q;
        let entry = op[(col ^ a as usize, col)];
        if (entry + phase).norm() < 1e-6 {
            b |= 1 << q;
        }
    }
    let p = crate::pauli::pauli_to_dense(PauliVector::from_parts(m, a, b).ok()?).ok()?;
    if (op - &p * phase).camax() < 1e-8 {
        Some((a | (b << m), phase))
    } else {
        None
    }
}
