//! Dense pure states and density matrices for small qubit counts.
//!
//! Qubit `i` is bit `i` of the computational basis index, so qubit 0 is the
//! least significant. Tensor products place the left operand on the low
//! qubits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest qubit count handled by the dense layer.
pub const MAX_DENSE_QUBITS: usize = 12;
/// Tolerance on normalization, Hermiticity, trace and positivity checks.
pub const STATE_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

fn qubits_for_len(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidState(format!(
            "dimension {len} is not a power of two"
        )));
    }
    let n = len.trailing_zeros() as usize;
    if n > MAX_DENSE_QUBITS {
        return Err(Error::CapExceeded {
            what: "dense qubit count",
            got: n,
            cap: MAX_DENSE_QUBITS,
        });
    }
    Ok(n)
}

pub(crate) fn check_dense_cap(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::CapExceeded {
            what: "dense qubit count",
            got: n,
            cap: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

/// A normalized pure state on `n <= 12` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: CVector,
}

impl DenseState {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        Self::from_vector(CVector::from_vec(amps))
    }

    pub fn from_vector(amps: CVector) -> Result<Self> {
        let n = qubits_for_len(amps.len())?;
        let norm = amps.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "state norm {norm} differs from 1"
            )));
        }
        Ok(DenseState { n, amps })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if norm < 1e-300 {
            return Err(Error::InvalidState(
                "cannot normalize the zero vector".into(),
            ));
        }
        Self::from_vector(amps / C64::new(norm, 0.0))
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_dense_cap(n)?;
        if index >> n != 0 {
            return Err(Error::InvalidState(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amps = CVector::from_element(1 << n, ZERO);
        amps[index] = ONE;
        Ok(DenseState { n, amps })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    /// Haar-random state from normalized complex Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_dense_cap(n)?;
        let amps = CVector::from_fn(1 << n, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        Self::normalized(amps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &CVector {
        &self.amps
    }

    pub fn into_amps(self) -> CVector {
        self.amps
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &DenseState) -> Result<C64> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// `|<self|other>|^2`, which is 1 iff the states agree up to global phase.
    pub fn overlap_sq(&self, other: &DenseState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// `self ⊗ other`, with `self` on the low qubits.
    pub fn tensor(&self, other: &DenseState) -> Result<DenseState> {
        check_dense_cap(self.n + other.n)?;
        let lo = self.dim();
        let amps = CVector::from_fn(lo * other.dim(), |j, _| {
            self.amps[j % lo] * other.amps[j / lo]
        });
        Ok(DenseState {
            n: self.n + other.n,
            amps,
        })
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            m: &self.amps * self.amps.adjoint(),
        }
    }

    /// Interleaved little-endian `(re, im)` doubles in basis-index order.
    pub fn to_bytes(&self) -> Vec<u8> {
        complex_to_bytes(self.amps.iter())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::new(complex_from_bytes(bytes)?)
    }
}

pub(crate) fn complex_to_bytes<'a>(values: impl Iterator<Item = &'a C64>) -> Vec<u8> {
    let mut out = Vec::new();
    for c in values {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

pub(crate) fn complex_from_bytes(bytes: &[u8]) -> Result<Vec<C64>> {
    if !bytes.len().is_multiple_of(16) {
        return Err(Error::Parse(format!(
            "payload length {} is not a multiple of 16",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            C64::new(re, im)
        })
        .collect())
}

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidState("density matrix is not square".into()));
        }
        let herm_err = (&m - m.adjoint()).camax();
        if herm_err > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "matrix is not Hermitian (deviation {herm_err:e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let rho = DensityMatrix { m };
        let (vals, _) = rho.eigen();
        if let Some(&min) = vals.first() {
            if min < -STATE_TOL {
                return Err(Error::InvalidState(format!(
                    "matrix has negative eigenvalue {min:e}"
                )));
            }
        }
        Ok(rho)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            m: CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0),
        }
    }

    /// Random mixed state `G G† / Tr(G G†)` with `G` a complex Ginibre matrix.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let g = CMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let m = &g * g.adjoint();
        let tr = m.trace();
        DensityMatrix { m: m / tr }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// Eigenvalues in ascending order with matching eigenvector columns.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        hermitian_eigen(&self.m)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            m: kron(&other.m, &self.m),
        }
    }

    /// Traces out everything above the lowest `keep_qubits` qubits.
    pub fn partial_trace_high(&self, keep_qubits: usize) -> Result<DensityMatrix> {
        let keep = 1usize << keep_qubits;
        if !self.dim().is_multiple_of(keep) {
            return Err(Error::SizeMismatch {
                expected: keep,
                got: self.dim(),
            });
        }
        let rest = self.dim() / keep;
        let m = CMatrix::from_fn(keep, keep, |i, j| {
            (0..rest)
                .map(|h| self.m[(i + h * keep, j + h * keep)])
                .sum()
        });
        Ok(DensityMatrix { m })
    }

    /// Row-major interleaved little-endian doubles.
    pub fn to_bytes(&self) -> Vec<u8> {
        complex_to_bytes(self.m.transpose().iter())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let vals = complex_from_bytes(bytes)?;
        let dim = (vals.len() as f64).sqrt().round() as usize;
        if dim * dim != vals.len() {
            return Err(Error::Parse("payload is not a square matrix".into()));
        }
        Self::new(CMatrix::from_row_slice(dim, dim, &vals))
    }

    /// JSON export, limited to dimension 8.
    pub fn to_json(&self) -> Result<DensityMatrixJson> {
        if self.dim() > 8 {
            return Err(Error::CapExceeded {
                what: "JSON density matrix dimension",
                got: self.dim(),
                cap: 8,
            });
        }
        let rows = |f: fn(&C64) -> f64| {
            (0..self.dim())
                .map(|i| (0..self.dim()).map(|j| f(&self.m[(i, j)])).collect())
                .collect()
        };
        Ok(DensityMatrixJson {
            dim: self.dim(),
            re: rows(|c| c.re),
            im: rows(|c| c.im),
        })
    }

    pub fn from_json(j: &DensityMatrixJson) -> Result<Self> {
        if j.re.len() != j.dim || j.im.len() != j.dim {
            return Err(Error::Parse("row count does not match dim".into()));
        }
        let mut m = CMatrix::zeros(j.dim, j.dim);
        for i in 0..j.dim {
            if j.re[i].len() != j.dim || j.im[i].len() != j.dim {
                return Err(Error::Parse("column count does not match dim".into()));
            }
            for k in 0..j.dim {
                m[(i, k)] = C64::new(j.re[i][k], j.im[i][k]);
            }
        }
        Self::new(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (vals, vecs)
}

/// Kronecker product `a ⊗ b` in the usual matrix convention, so that `b`
/// acts on the low qubits.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Applies `X^a Z^b` to the low qubits of `v`.
pub fn apply_pauli_xz(a: u64, b: u64, v: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; v.len()];
    for (j, &amp) in v.iter().enumerate() {
        let sign = (b & j as u64).count_ones() & 1;
        let target = j ^ a as usize;
        out[target] = if sign == 1 { -amp } else { amp };
    }
    out
}

/// `i^k` for `k mod 4`.
pub(crate) fn i_pow(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Applies the Hermitian Pauli `i^(a·b) X^a Z^b` to the low qubits of `v`.
pub fn apply_pauli_hermitian(a: u64, b: u64, v: &[C64]) -> Vec<C64> {
    let phase = i_pow((a & b).count_ones());
    apply_pauli_xz(a, b, v)
        .into_iter()
        .map(|c| c * phase)
        .collect()
}

/// Applies `op` (a `2^out x 2^in` matrix) to the `in_bits` qubits starting at
/// qubit `offset`, replacing that register by an `out`-qubit register.
pub fn apply_block(op: &CMatrix, v: &[C64], offset: usize, in_bits: usize) -> Vec<C64> {
    let in_dim = 1usize << in_bits;
    assert_eq!(op.ncols(), in_dim);
    let out_dim = op.nrows();
    let out_bits = out_dim.trailing_zeros() as usize;
    let low_dim = 1usize << offset;
    let high_dim = v.len() / (low_dim * in_dim);
    let mut out = vec![ZERO; low_dim * out_dim * high_dim];
    for h in 0..high_dim {
        for mid in 0..in_dim {
            for lo in 0..low_dim {
                let amp = v[lo | (mid << offset) | (h << (offset + in_bits))];
                if amp == ZERO {
                    continue;
                }
                for o in 0..out_dim {
                    let c = op[(o, mid)];
                    if c != ZERO {
                        out[lo | (o << offset) | (h << (offset + out_bits))] += c * amp;
                    }
                }
            }
        }
    }
    out
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre
/// matrix, with the phases of `R`'s diagonal folded back into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            u[(i, j)] *= phase;
        }
    }
    u
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    u.is_square() && (u.adjoint() * u - CMatrix::identity(u.nrows(), u.ncols())).camax() <= tol
}
