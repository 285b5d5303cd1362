//! Exact key-averaged simulation of adversaries against the scheme, and the
//! small-dimension lower-bound demonstrations.
//!
//! Bob's channel measures the syndrome (every coset, not only the most
//! likely one), decodes, removes the pad, and writes the verdict into a flag
//! qubit `V` stored above the message register (`|acc⟩ = |0⟩`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::authproto::{
    auth_encode, auth_verify, qotp_raw, AttackOutcome, AuthKey, Scheme, Verdict,
};
use crate::error::{Error, Result};
use crate::pauli::PauliVector;
use crate::stabcode::identify_logical_pauli;
use crate::state::{
    apply_block, apply_pauli_xz, hermitian_eigen, is_unitary, kron, random_unitary, CMatrix,
    CVector, DenseState, DensityMatrix, C64, MAX_DENSE_QUBITS, ONE, STATE_TOL, ZERO,
};

/// Largest adversary ancilla register.
pub const MAX_ANCILLA: usize = 4;

/// An attack on the transmitted register: a Pauli, or a unitary on the
/// register plus an ancilla that starts in `|0…0⟩` and is traced out.
#[derive(Clone, Debug, PartialEq)]
pub enum AdversaryChannel {
    Pauli(PauliVector),
    Unitary {
        system: usize,
        ancilla: usize,
        u: CMatrix,
    },
}

impl AdversaryChannel {
    pub fn identity(system: usize) -> Self {
        AdversaryChannel::Pauli(PauliVector::identity(system))
    }

    pub fn unitary(system: usize, ancilla: usize, u: CMatrix) -> Result<Self> {
        if ancilla > MAX_ANCILLA {
            return Err(Error::CapExceeded {
                what: "adversary ancilla qubits",
                got: ancilla,
                cap: MAX_ANCILLA,
            });
        }
        if system + ancilla > MAX_DENSE_QUBITS {
            return Err(Error::CapExceeded {
                what: "dense qubit count",
                got: system + ancilla,
                cap: MAX_DENSE_QUBITS,
            });
        }
        let dim = 1usize << (system + ancilla);
        if u.shape() != (dim, dim) {
            return Err(Error::SizeMismatch {
                expected: dim,
                got: u.nrows(),
            });
        }
        if !is_unitary(&u, STATE_TOL) {
            return Err(Error::InvalidState(
                "adversary operator is not unitary".into(),
            ));
        }
        Ok(AdversaryChannel::Unitary { system, ancilla, u })
    }

    /// Haar-random unitary on `system + ancilla` qubits.
    pub fn random<R: Rng + ?Sized>(system: usize, ancilla: usize, rng: &mut R) -> Result<Self> {
        let dim = 1usize << (system + ancilla);
        Self::unitary(system, ancilla, random_unitary(dim, rng))
    }

    pub fn system_qubits(&self) -> usize {
        match self {
            AdversaryChannel::Pauli(p) => p.n(),
            AdversaryChannel::Unitary { system, .. } => *system,
        }
    }

    pub fn ancilla_qubits(&self) -> usize {
        match self {
            AdversaryChannel::Pauli(_) => 0,
            AdversaryChannel::Unitary { ancilla, .. } => *ancilla,
        }
    }

    /// Image of `v ⊗ |0…0⟩`, system on the low qubits.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        match self {
            AdversaryChannel::Pauli(p) => apply_pauli_xz(p.x_part(), p.z_part(), v),
            AdversaryChannel::Unitary { u, .. } => {
                let cols = u.columns(0, v.len());
                (cols * CVector::from_column_slice(v)).data.into()
            }
        }
    }
}

/// Seeded suite of random adversaries; ancilla sizes cycle through `0..=4`.
pub fn random_adversaries(system: usize, cases: usize, seed: u64) -> Result<Vec<AdversaryChannel>> {
    (0..cases)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(case_seed(seed, i as u64));
            let anc = (i % (MAX_ANCILLA + 1)).min(MAX_DENSE_QUBITS.saturating_sub(system));
            AdversaryChannel::random(system, anc, &mut rng)
        })
        .collect()
}

pub fn case_seed(seed: u64, case: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(case)
}

fn check_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::SizeMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| C64::new(v.max(0.0).sqrt(), 0.0)),
    ));
    &vecs * d * vecs.adjoint()
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Uhlmann root fidelity `Tr sqrt(sqrt(a) b sqrt(a))`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dims(a, b)?;
    let sa = psd_sqrt(a.matrix());
    let inner = hermitize(&(&sa * b.matrix() * &sa));
    let (vals, _) = hermitian_eigen(&inner);
    Ok(vals
        .iter()
        .map(|&v| v.max(0.0).sqrt())
        .sum::<f64>()
        .clamp(0.0, 1.0))
}

/// `½ Tr|a − b|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dims(a, b)?;
    let (vals, _) = hermitian_eigen(&hermitize(&(a.matrix() - b.matrix())));
    Ok((0.5 * vals.iter().map(|v| v.abs()).sum::<f64>()).clamp(0.0, 1.0))
}

/// Bob's key-averaged output for `t` independently keyed copies. Block
/// `p` is the unnormalized message state for verdict pattern `p`, where bit
/// `i` set means copy `i` rejected.
#[derive(Clone, Debug)]
pub struct BobOutput {
    m: usize,
    t: usize,
    blocks: Vec<CMatrix>,
}

impl BobOutput {
    pub fn copies(&self) -> usize {
        self.t
    }

    pub fn block(&self, pattern: usize) -> &CMatrix {
        &self.blocks[pattern]
    }

    /// Probability that every copy accepts.
    pub fn accept_probability(&self) -> f64 {
        self.blocks[0].trace().re
    }

    pub fn total_trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.trace().re).sum()
    }

    /// Joint state on `t·m` message qubits and `t` flag qubits above them.
    pub fn density(&self) -> Result<DensityMatrix> {
        let md = 1usize << (self.t * self.m);
        let dim = md << self.t;
        let mut rho = CMatrix::from_element(dim, dim, ZERO);
        for (p, b) in self.blocks.iter().enumerate() {
            rho.view_mut((p * md, p * md), (md, md)).copy_from(b);
        }
        DensityMatrix::new(hermitize(&rho))
    }

    /// `Tr((I − |Ψ⟩⟨Ψ|) ⊗ |acc…acc⟩⟨acc…acc| ρ)` for a product `Ψ`.
    pub fn corrupted_acceptance(&self, messages: &[DenseState]) -> Result<f64> {
        let psi = product_vector(messages)?;
        let b = &self.blocks[0];
        Ok(b.trace().re - psi.dotc(&(b * &psi)).re)
    }

    /// Single-copy hybrid terms: for each copy `i`, the weight of copy `i`
    /// accepting with a message orthogonal to `ψ_i`, other copies ignored.
    pub fn per_copy_corruption(&self, messages: &[DenseState]) -> Result<Vec<f64>> {
        let md = 1usize << self.m;
        (0..self.t)
            .map(|i| {
                let p = &messages[i].density();
                let proj = kron(
                    &kron(
                        &CMatrix::identity(
                            1 << ((self.t - 1 - i) * self.m),
                            1 << ((self.t - 1 - i) * self.m),
                        ),
                        p.matrix(),
                    ),
                    &CMatrix::identity(1 << (i * self.m), 1 << (i * self.m)),
                );
                debug_assert_eq!(proj.nrows(), md.pow(self.t as u32));
                let mut total = 0.0;
                for (pat, b) in self.blocks.iter().enumerate() {
                    if (pat >> i) & 1 == 0 {
                        total += b.trace().re - (&proj * b).trace().re;
                    }
                }
                Ok(total)
            })
            .collect()
    }
}

fn product_vector(messages: &[DenseState]) -> Result<CVector> {
    let mut it = messages.iter();
    let first = it
        .next()
        .ok_or_else(|| Error::InvalidParameter("no messages".into()))?
        .clone();
    Ok(it.try_fold(first, |acc, m| acc.tensor(m))?.into_amps())
}

/// Exact average over all joint keys of Bob's output when `messages[i]` is
/// sent under an independent key on copy `i` and `attack` acts on all copies.
pub fn bob_output(
    scheme: &Scheme,
    attack: &AdversaryChannel,
    messages: &[DenseState],
) -> Result<BobOutput> {
    let (n, m, s) = (scheme.n(), scheme.m(), scheme.s());
    let t = messages.len();
    if t == 0 {
        return Err(Error::InvalidParameter("no messages".into()));
    }
    if let Some(bad) = messages.iter().find(|psi| psi.n() != m) {
        return Err(Error::SizeMismatch {
            expected: m,
            got: bad.n(),
        });
    }
    if attack.system_qubits() != t * n {
        return Err(Error::SizeMismatch {
            expected: t * n,
            got: attack.system_qubits(),
        });
    }
    if t * n + attack.ancilla_qubits() > MAX_DENSE_QUBITS {
        return Err(Error::CapExceeded {
            what: "dense qubit count",
            got: t * n + attack.ancilla_qubits(),
            cap: MAX_DENSE_QUBITS,
        });
    }
    let dense = scheme.dense()?;
    let keys: Vec<AuthKey> = scheme.all_keys().collect();
    let sent: Vec<Vec<Vec<C64>>> = messages
        .iter()
        .map(|psi| {
            keys.iter()
                .map(|k| auth_encode(scheme, k, psi).map(|v| v.into_amps().data.into()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let decoders: Vec<Vec<CMatrix>> = dense
        .iter()
        .map(|dc| {
            (0..1u64 << s)
                .map(|y| {
                    dc.encoder(crate::stabcode::Syndrome::new(s, y).expect("in range"))
                        .map(|e| e.adjoint())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let nk = keys.len();
    let joint = nk
        .checked_pow(t as u32)
        .ok_or_else(|| Error::InvalidParameter(format!("{nk}^{t} joint keys overflow")))?;
    let md = 1usize << (t * m);
    let anc_dim = 1usize << attack.ancilla_qubits();
    let zero_blocks = || vec![CMatrix::from_element(md, md, ZERO); 1 << t];

    let term = |acc: &mut Vec<CMatrix>, idx: usize| {
        let ks: Vec<usize> = (0..t).map(|i| (idx / nk.pow(i as u32)) % nk).collect();
        let mut v = sent[0][ks[0]].clone();
        for i in 1..t {
            v = tensor_raw(&v, &sent[i][ks[i]]);
        }
        let attacked = attack.apply(&v);
        // Expand over every syndrome outcome, one copy at a time.
        let mut branches: Vec<(Vec<C64>, usize)> = vec![(attacked, 0)];
        for i in 0..t {
            let key = &keys[ks[i]];
            let mut next = Vec::with_capacity(branches.len() << s);
            for (vec, pattern) in branches {
                for (yp, dec) in decoders[key.k].iter().enumerate() {
                    let out = apply_block(dec, &vec, i * m, n);
                    let (a, b) = (key.x & crate::pauli::low_mask(m), key.x >> m);
                    let shifted = (a << (i * m)) | ((b << (i * m)) << (t * m));
                    let out = qotp_raw(t * m, shifted, &out);
                    let reject = (yp as u64 != key.y.bits()) as usize;
                    next.push((out, pattern | (reject << i)));
                }
            }
            branches = next;
        }
        for (vec, pattern) in branches {
            let phi = CMatrix::from_column_slice(md, anc_dim, &vec);
            acc[pattern] += &phi * phi.adjoint();
        }
    };
    let mut blocks = ordered_sum(joint, zero_blocks, term, |a, b| {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
    });
    let scale = C64::new(1.0 / joint as f64, 0.0);
    for b in blocks.iter_mut() {
        *b *= scale;
    }
    Ok(BobOutput { m, t, blocks })
}

const CHUNK: usize = 32;

/// Parallel sum over `0..count` whose rounding does not depend on thread
/// scheduling: fixed chunks are summed in order, then combined in order.
fn ordered_sum<T, Z, F, M>(count: usize, zero: Z, term: F, merge: M) -> T
where
    T: Send,
    Z: Fn() -> T + Sync,
    F: Fn(&mut T, usize) + Sync,
    M: Fn(&mut T, T),
{
    let partials: Vec<T> = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = zero();
            for i in c * CHUNK..((c + 1) * CHUNK).min(count) {
                term(&mut acc, i);
            }
            acc
        })
        .collect();
    let mut total = zero();
    for p in partials {
        merge(&mut total, p);
    }
    total
}

fn tensor_raw(low: &[C64], high: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(low.len() * high.len());
    for &h in high {
        out.extend(low.iter().map(|&l| l * h));
    }
    out
}

/// `|ψ⟩⟨ψ| ⊗ I_V + I_M ⊗ |rej⟩⟨rej| − |ψ⟩⟨ψ| ⊗ |rej⟩⟨rej|`, flag qubit high.
pub fn p1_projector(psi: &DenseState) -> CMatrix {
    let p = psi.density().matrix().clone();
    let dim = p.nrows();
    let rej = CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]);
    kron(&CMatrix::identity(2, 2), &p) + kron(&rej, &CMatrix::identity(dim, dim)) - kron(&rej, &p)
}

/// `Tr(P_1 ρ_Bob)` with exact key averaging.
pub fn soundness_measure(
    scheme: &Scheme,
    attack: &AdversaryChannel,
    psi: &DenseState,
) -> Result<f64> {
    let bob = bob_output(scheme, attack, std::slice::from_ref(psi))?;
    let rho = bob.density()?;
    Ok((p1_projector(psi) * rho.matrix()).trace().re)
}

/// Verdict and decoded logical Pauli of attack `e` under `key`, read off
/// the dense pipeline's images of the computational basis.
pub fn dense_pauli_outcome(
    scheme: &Scheme,
    key: &AuthKey,
    e: PauliVector,
) -> Result<AttackOutcome> {
    if e.n() != scheme.n() {
        return Err(Error::SizeMismatch {
            expected: scheme.n(),
            got: e.n(),
        });
    }
    let m = scheme.m();
    let dim = 1usize << m;
    let mut op = CMatrix::zeros(dim, dim);
    let mut verdicts = Vec::with_capacity(dim);
    for j in 0..dim {
        let sent = auth_encode(scheme, key, &DenseState::basis(m, j)?)?;
        let hit = DenseState::new(apply_pauli_xz(
            e.x_part(),
            e.z_part(),
            sent.amps().as_slice(),
        ))?;
        let (v, out) = auth_verify(scheme, key, &hit)?;
        verdicts.push(v);
        op.set_column(j, out.amps());
    }
    if verdicts.iter().any(|&v| v != verdicts[0]) {
        return Err(Error::Internal("verdict depends on the message".into()));
    }
    if verdicts[0] == Verdict::Reject {
        return Ok(AttackOutcome {
            verdict: Verdict::Reject,
            logical_effect: 0,
        });
    }
    let (label, _) = identify_logical_pauli(m, &op)
        .ok_or_else(|| Error::Internal("decoded operator is not a Pauli".into()))?;
    Ok(AttackOutcome {
        verdict: Verdict::Accept,
        logical_effect: label,
    })
}

/// Exact key average of the transmitted state. The message may carry
/// `reference` extra qubits above the `m` message qubits; they pass through
/// untouched and sit above the `n` transmitted qubits.
pub fn ciphertext_density_with_reference(
    scheme: &Scheme,
    msg: &DenseState,
    reference: usize,
) -> Result<DensityMatrix> {
    let (n, m) = (scheme.n(), scheme.m());
    if msg.n() != m + reference {
        return Err(Error::SizeMismatch {
            expected: m + reference,
            got: msg.n(),
        });
    }
    if n + reference > MAX_DENSE_QUBITS {
        return Err(Error::CapExceeded {
            what: "dense qubit count",
            got: n + reference,
            cap: MAX_DENSE_QUBITS,
        });
    }
    let dense = scheme.dense()?;
    let keys: Vec<AuthKey> = scheme.all_keys().collect();
    let dim = 1usize << (n + reference);
    let amps: Vec<C64> = msg.amps().iter().copied().collect();
    let encoders: Vec<&CMatrix> = keys
        .iter()
        .map(|key| dense[key.k].encoder(key.y))
        .collect::<Result<Vec<_>>>()?;
    let sum = ordered_sum(
        keys.len(),
        || CMatrix::from_element(dim, dim, ZERO),
        |acc, i| {
            let padded = qotp_raw(m, keys[i].x, &amps);
            let v = CVector::from_vec(apply_block(encoders[i], &padded, 0, m));
            *acc += &v * v.adjoint();
        },
        |a, b| *a += b,
    );
    DensityMatrix::new(hermitize(&(sum / C64::new(keys.len() as f64, 0.0))))
}

pub fn ciphertext_density(scheme: &Scheme, msg: &DenseState) -> Result<DensityMatrix> {
    ciphertext_density_with_reference(scheme, msg, 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseAttackResult {
    pub achieved: f64,
    pub floor: f64,
    pub p0: f64,
    pub p1: f64,
}

/// Canonical purification `Σ_j sqrt(λ_j) |e_j⟩|j⟩`, reference register high.
fn purify(rho: &DensityMatrix) -> CVector {
    let (vals, vecs) = rho.eigen();
    let d = rho.dim();
    let mut out = CVector::from_element(d * d, ZERO);
    for (j, &l) in vals.iter().enumerate() {
        let w = l.max(0.0).sqrt();
        for i in 0..d {
            out[i + j * d] += vecs[(i, j)] * w;
        }
    }
    out
}

/// Conditional phase flip on the negative eigenspace of `ρ0 − ρ1`, applied to
/// the purified superposition; reports the overlap with the purified
/// difference state and the floor `p0 + p1 − 1`.
pub fn phase_attack_demo(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<PhaseAttackResult> {
    check_dims(rho0, rho1)?;
    let d = rho0.dim();
    let (vals, vecs) = hermitian_eigen(&hermitize(&(rho0.matrix() - rho1.matrix())));
    let mut p_v0 = CMatrix::from_element(d, d, ZERO);
    for (j, &l) in vals.iter().enumerate() {
        if l >= -STATE_TOL {
            let v = vecs.column(j);
            p_v0 += v * v.adjoint();
        }
    }
    let p_v1 = CMatrix::identity(d, d) - &p_v0;
    let u = &p_v0 - &p_v1;
    let p0 = (&p_v0 * rho0.matrix()).trace().re;
    let p1 = (&p_v1 * rho1.matrix()).trace().re;
    let (t0, t1) = (purify(rho0), purify(rho1));
    let u_sys = kron(&CMatrix::identity(d, d), &u);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let attacked = &u_sys * (&t0 + &t1) * C64::new(h, 0.0);
    let target = (&t0 - &t1) * C64::new(h, 0.0);
    Ok(PhaseAttackResult {
        achieved: attacked.dotc(&target).norm(),
        floor: p0 + p1 - 1.0,
        p0,
        p1,
    })
}

/// Largest `dim^t` accepted by [`tensor_power_distance_demo`].
pub const MAX_TENSOR_DIM: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorPowerResult {
    pub t: u32,
    pub delta: f64,
    pub distance: f64,
    pub bound: f64,
}

impl TensorPowerResult {
    /// The bound is asserted only when positive.
    pub fn holds(&self, tol: f64) -> bool {
        self.bound <= 0.0 || self.distance >= self.bound - tol
    }
}

pub fn tensor_power(rho: &DensityMatrix, t: u32) -> Result<CMatrix> {
    if t == 0 {
        return Err(Error::InvalidParameter("t must be positive".into()));
    }
    let size = (rho.dim() as u128).pow(t);
    if size > MAX_TENSOR_DIM as u128 {
        return Err(Error::CapExceeded {
            what: "tensor power dimension",
            got: size.min(usize::MAX as u128) as usize,
            cap: MAX_TENSOR_DIM,
        });
    }
    let mut out = rho.matrix().clone();
    for _ in 1..t {
        out = kron(&out, rho.matrix());
    }
    Ok(out)
}

/// Exact `D(ρ0^⊗t, ρ1^⊗t)` and `1 − 2 exp(−t δ² / 2)`.
pub fn tensor_power_distance_demo(
    rho0: &DensityMatrix,
    rho1: &DensityMatrix,
    t: u32,
) -> Result<TensorPowerResult> {
    check_dims(rho0, rho1)?;
    let delta = trace_distance(rho0, rho1)?;
    let (a, b) = (tensor_power(rho0, t)?, tensor_power(rho1, t)?);
    let (vals, _) = hermitian_eigen(&hermitize(&(a - b)));
    let distance = 0.5 * vals.iter().map(|v| v.abs()).sum::<f64>();
    Ok(TensorPowerResult {
        t,
        delta,
        distance,
        bound: 1.0 - 2.0 * (-(t as f64) * delta * delta / 2.0).exp(),
    })
}

/// Below this acceptance probability the floor is reported as vacuous.
pub const MIN_ACCEPT_PROBABILITY: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityFloorReport {
    pub fidelity: Option<f64>,
    pub p_acc: f64,
    /// Largest `1 − Tr(P_1 ρ_Bob)` over the eigenvectors of the message.
    pub epsilon: f64,
    /// `1 − ε / p_acc`, or `None` when `p_acc` is below the threshold.
    pub floor: Option<f64>,
}

impl FidelityFloorReport {
    pub fn holds(&self, tol: f64) -> bool {
        match (self.fidelity, self.floor) {
            (Some(f), Some(fl)) => f >= fl - tol,
            _ => true,
        }
    }
}

/// Acceptance probability, post-selected fidelity, and the floor
/// `1 − ε / p_acc` for a mixed message.
pub fn fidelity_floor_check(
    scheme: &Scheme,
    attack: &AdversaryChannel,
    rho: &DensityMatrix,
) -> Result<FidelityFloorReport> {
    let md = 1usize << scheme.m();
    if rho.dim() != md {
        return Err(Error::SizeMismatch {
            expected: md,
            got: rho.dim(),
        });
    }
    let (vals, vecs) = rho.eigen();
    let mut acc = CMatrix::from_element(md, md, ZERO);
    let mut epsilon: f64 = 0.0;
    for (i, &p) in vals.iter().enumerate() {
        if p <= 1e-12 {
            continue;
        }
        let psi = DenseState::normalized(vecs.column(i).into_owned())?;
        let bob = bob_output(scheme, attack, std::slice::from_ref(&psi))?;
        let sound = (p1_projector(&psi) * bob.density()?.matrix()).trace().re;
        epsilon = epsilon.max(1.0 - sound);
        acc += bob.block(0) * C64::new(p, 0.0);
    }
    let p_acc = acc.trace().re;
    if p_acc < MIN_ACCEPT_PROBABILITY {
        return Ok(FidelityFloorReport {
            fidelity: None,
            p_acc,
            epsilon,
            floor: None,
        });
    }
    let rho_prime = DensityMatrix::new(hermitize(&(acc / C64::new(p_acc, 0.0))))?;
    Ok(FidelityFloorReport {
        fidelity: Some(fidelity(rho, &rho_prime)?),
        p_acc,
        epsilon,
        floor: Some(1.0 - epsilon / p_acc),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductSoundnessReport {
    pub copies: usize,
    /// `1 − Tr((I − |0…0⟩⟨0…0|) ⊗ |acc…⟩⟨acc…| ρ_Bob)`.
    pub value: f64,
    /// Per-copy single-copy corruption weights.
    pub per_copy: Vec<f64>,
}

impl ProductSoundnessReport {
    /// `1 − value ≤ Σ per_copy`.
    pub fn hybrid_holds(&self, tol: f64) -> bool {
        1.0 - self.value <= self.per_copy.iter().sum::<f64>() + tol
    }
}

/// Iterated scheme on `|0…0⟩` per copy, with independent keys.
pub fn product_state_soundness_demo(
    scheme: &Scheme,
    attack: &AdversaryChannel,
    t: usize,
) -> Result<ProductSoundnessReport> {
    if !(1..=2).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "t must be 1 or 2, got {t}"
        )));
    }
    let zero = DenseState::zero(scheme.m())?;
    let msgs = vec![zero; t];
    let bob = bob_output(scheme, attack, &msgs)?;
    Ok(ProductSoundnessReport {
        copies: t,
        value: 1.0 - bob.corrupted_acceptance(&msgs)?,
        per_copy: bob.per_copy_corruption(&msgs)?,
    })
}

/// One line of a demo report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoRecord {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl DemoRecord {
    /// Records `lhs >= rhs − tol`.
    pub fn at_least(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        DemoRecord {
            name: name.into(),
            lhs,
            rhs,
            pass: lhs >= rhs - tol,
        }
    }

    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// Random density matrix on one qubit pair, for the phase-attack suite.
pub fn random_density_pair(dim: usize, seed: u64) -> (DensityMatrix, DensityMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (
        DensityMatrix::random(dim, &mut rng),
        DensityMatrix::random(dim, &mut rng),
    )
}

/// Label whose syndrome is nonzero in every code, if one exists.
pub fn detected_everywhere(scheme: &Scheme) -> Option<PauliVector> {
    PauliVector::all(scheme.n()).find(|&e| {
        scheme
            .completions()
            .iter()
            .all(|c| c.syndrome_of(e).map(|y| !y.is_zero()).unwrap_or(false))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::authproto::soundness_exact;
    use approx::assert_abs_diff_eq;

    fn pure(v: &[C64]) -> DensityMatrix {
        DenseState::normalized(CVector::from_column_slice(v))
            .unwrap()
            .density()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn fidelity_examples() {
        let z0 = pure(&[c(1.0), c(0.0)]);
        let z1 = pure(&[c(0.0), c(1.0)]);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_abs_diff_eq!(fidelity(&z0, &z0).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fidelity(&z0, &z1).unwrap(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            fidelity(&z0, &mixed).unwrap(),
            0.5f64.sqrt(),
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            fidelity(&mixed, &z0).unwrap(),
            0.5f64.sqrt(),
            epsilon = 1e-10
        );
        assert!(fidelity(&z0, &DensityMatrix::maximally_mixed(4)).is_err());
    }

    #[test]
    fn trace_distance_examples() {
        let z0 = pure(&[c(1.0), c(0.0)]);
        let z1 = pure(&[c(0.0), c(1.0)]);
        let plus = pure(&[c(1.0), c(1.0)]);
        assert_abs_diff_eq!(trace_distance(&z0, &z0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trace_distance(&z0, &z1).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            trace_distance(&z0, &plus).unwrap(),
            0.5f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn metric_sanity_on_random_pairs() {
        for seed in 0..30 {
            let (a, b) = random_density_pair(4, seed);
            let (cc, _) = random_density_pair(4, seed + 1000);
            let (dab, dbc, dac) = (
                trace_distance(&a, &b).unwrap(),
                trace_distance(&b, &cc).unwrap(),
                trace_distance(&a, &cc).unwrap(),
            );
            assert!(dac <= dab + dbc + 1e-12);
            assert_abs_diff_eq!(dab, trace_distance(&b, &a).unwrap(), epsilon = 1e-12);
            let f = fidelity(&a, &b).unwrap();
            assert_abs_diff_eq!(f, fidelity(&b, &a).unwrap(), epsilon = 1e-8);
            assert!((0.0..=1.0).contains(&f));
            // Fuchs–van de Graaf.
            assert!(1.0 - f <= dab + 1e-9 && dab <= (1.0 - f * f).sqrt() + 1e-9);
            assert_abs_diff_eq!(fidelity(&a, &a).unwrap(), 1.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn identity_attack_is_perfect() {
        let sc = Scheme::build(2, 2).unwrap();
        let psi = crate::authproto::probe_state(2, 1).unwrap();
        let v = soundness_measure(&sc, &AdversaryChannel::identity(4), &psi).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
        let sc = Scheme::build(2, 1).unwrap();
        let psi = crate::authproto::probe_state(1, 2).unwrap();
        assert_abs_diff_eq!(
            soundness_measure(&sc, &AdversaryChannel::identity(2), &psi).unwrap(),
            1.0,
            epsilon = 1e-10
        );
    }

    /// For a Pauli attack the loss is the corruption weighted by how far
    /// each logical Pauli moves the message.
    #[test]
    fn pauli_attack_matches_symbolic_prediction() {
        let sc = Scheme::build(2, 2).unwrap();
        let psi = crate::authproto::probe_state(2, 77).unwrap();
        for bits in [1u64, 0x13, 0x5a, 0xff, 0x81] {
            let e = PauliVector::new(4, bits).unwrap();
            let v = soundness_measure(&sc, &AdversaryChannel::Pauli(e), &psi).unwrap();
            let rep = soundness_exact(&sc, e).unwrap();
            let mut loss = 0.0;
            for o in rep.outcomes.iter().filter(|o| o.corrupts()) {
                let l = PauliVector::new(2, o.logical_effect).unwrap();
                let moved = DenseState::new(apply_pauli_xz(
                    l.x_part(),
                    l.z_part(),
                    psi.amps().as_slice(),
                ))
                .unwrap();
                loss += 1.0 - moved.overlap_sq(&psi).unwrap();
            }
            let predicted = 1.0 - loss / sc.num_codes() as f64;
            assert_abs_diff_eq!(v, predicted, epsilon = 1e-9);
            let corr = *rep.corruption_probability.numer() as f64
                / *rep.corruption_probability.denom() as f64;
            assert!(v >= 1.0 - corr - 1e-9);
        }
    }

    #[test]
    fn ciphertext_is_maximally_mixed() {
        let sc = Scheme::build(2, 2).unwrap();
        let rho = ciphertext_density(&sc, &DenseState::zero(2).unwrap()).unwrap();
        assert!((rho.matrix() - DensityMatrix::maximally_mixed(16).matrix()).camax() < 1e-10);
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn phase_attack_examples() {
        let z0 = pure(&[c(1.0), c(0.0)]);
        let z1 = pure(&[c(0.0), c(1.0)]);
        let r = phase_attack_demo(&z0, &z1).unwrap();
        assert_abs_diff_eq!(r.achieved, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.floor, 1.0, epsilon = 1e-12);
        let (a, _) = random_density_pair(2, 3);
        let r = phase_attack_demo(&a, &a).unwrap();
        assert!(r.achieved >= r.floor - 1e-9);
        for seed in 0..20 {
            let (a, b) = random_density_pair(2, seed);
            let r = phase_attack_demo(&a, &b).unwrap();
            assert!(r.achieved >= r.floor - 1e-9, "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn tensor_power_examples() {
        let z0 = pure(&[c(1.0), c(0.0)]);
        let mixed = DensityMatrix::maximally_mixed(2);
        for t in 1..=6 {
            let r = tensor_power_distance_demo(&z0, &mixed, t).unwrap();
            assert_abs_diff_eq!(r.distance, 1.0 - 0.5f64.powi(t as i32), epsilon = 1e-10);
            assert!(r.holds(1e-12));
        }
        let r = tensor_power_distance_demo(&z0, &mixed, 1).unwrap();
        assert_abs_diff_eq!(r.distance, r.delta, epsilon = 1e-12);
        let r = tensor_power_distance_demo(&mixed, &mixed, 4).unwrap();
        assert_abs_diff_eq!(r.distance, 0.0, epsilon = 1e-12);
        assert!(r.bound <= 0.0);
        assert!(tensor_power_distance_demo(&z0, &mixed, 13).is_err());
    }

    #[test]
    fn fidelity_floor_examples() {
        let sc = Scheme::build(2, 2).unwrap();
        let rho = DensityMatrix::random(4, &mut ChaCha8Rng::seed_from_u64(4));
        let r = fidelity_floor_check(&sc, &AdversaryChannel::identity(4), &rho).unwrap();
        assert_abs_diff_eq!(r.p_acc, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.fidelity.unwrap(), 1.0, epsilon = 1e-7);
        let e = detected_everywhere(&sc).expect("some label is detected by every code");
        let r = fidelity_floor_check(&sc, &AdversaryChannel::Pauli(e), &rho).unwrap();
        assert!(r.p_acc < 1e-12);
        assert!(r.floor.is_none());
    }

    #[test]
    fn two_copy_identity_and_single_copy_reduction() {
        let sc = Scheme::build(2, 1).unwrap();
        let r = product_state_soundness_demo(&sc, &AdversaryChannel::identity(4), 2).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-10);
        let e = AdversaryChannel::Pauli(PauliVector::new(2, 0b0110).unwrap());
        let one = product_state_soundness_demo(&sc, &e, 1).unwrap();
        let direct = soundness_measure(&sc, &e, &DenseState::zero(1).unwrap()).unwrap();
        assert_abs_diff_eq!(one.value, direct, epsilon = 1e-10);
        assert!(product_state_soundness_demo(&sc, &e, 3).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let sc = Scheme::build(2, 2).unwrap();
        assert!(soundness_measure(
            &sc,
            &AdversaryChannel::identity(3),
            &DenseState::zero(2).unwrap()
        )
        .is_err());
        assert!(soundness_measure(
            &sc,
            &AdversaryChannel::identity(4),
            &DenseState::zero(3).unwrap()
        )
        .is_err());
        assert!(AdversaryChannel::unitary(4, 5, CMatrix::identity(512, 512)).is_err());
        let mut u = CMatrix::identity(16, 16);
        u[(0, 0)] = c(2.0);
        assert!(AdversaryChannel::unitary(4, 0, u).is_err());
    }
}
