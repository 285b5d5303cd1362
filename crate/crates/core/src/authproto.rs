//! The keyed authentication scheme and its Bell-frame purity test.
//!
//! A key `(k, x, y)` selects code `Q_k`, a one-time-pad key `x` on the `m`
//! message qubits, and the secret syndrome `y`. Encoding pads the message and
//! encodes it into the syndrome-`y` space of `Q_k`. Verification decodes,
//! accepts iff the observed syndrome is `y`, and removes the pad.

use std::sync::OnceLock;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gf2::{parse_hex, to_hex};
use crate::pauli::{low_mask, symplectic_standard, PauliVector};
use crate::ptcodes::{check_exhaustive_cap, rational_string, PurityTestingFamily, Rational};
use crate::stabcode::{
    complete_code, decode_dense, encode_dense, DenseCode, SymplecticCompletion, Syndrome,
};
use crate::state::{apply_pauli_xz, check_dense_cap, DenseState, C64};

/// Bits used to store the code index `k ∈ [0, 2^s]`: `ceil(log2(2^s + 1))`.
pub fn key_index_bits(s: u32) -> usize {
    let count = (1u64 << s) + 1;
    (u64::BITS - (count - 1).leading_zeros()) as usize
}

/// A family with its completions, plus dense encoders built on first use.
#[derive(Debug)]
pub struct Scheme {
    family: PurityTestingFamily,
    completions: Vec<SymplecticCompletion>,
    dense: OnceLock<Vec<DenseCode>>,
}

impl Scheme {
    pub fn new(family: PurityTestingFamily) -> Result<Self> {
        let completions = family
            .codes()
            .iter()
            .map(complete_code)
            .collect::<Result<Vec<_>>>()?;
        Ok(Scheme {
            family,
            completions,
            dense: OnceLock::new(),
        })
    }

    pub fn build(r: u32, s: u32) -> Result<Self> {
        Self::new(PurityTestingFamily::build(r, s)?)
    }

    pub fn family(&self) -> &PurityTestingFamily {
        &self.family
    }

    pub fn completions(&self) -> &[SymplecticCompletion] {
        &self.completions
    }

    pub fn completion(&self, k: usize) -> Result<&SymplecticCompletion> {
        self.family.code(k)?;
        Ok(&self.completions[k])
    }

    pub fn n(&self) -> usize {
        self.family.n()
    }

    pub fn m(&self) -> usize {
        self.family.m()
    }

    pub fn s(&self) -> usize {
        self.family.s() as usize
    }

    pub fn num_codes(&self) -> usize {
        self.family.len()
    }

    /// Dense encoders for every code; refuses above the dense cap.
    pub fn dense(&self) -> Result<&[DenseCode]> {
        check_dense_cap(self.n())?;
        if let Some(d) = self.dense.get() {
            return Ok(d);
        }
        let built = self
            .completions
            .iter()
            .cloned()
            .map(DenseCode::from_completion)
            .collect::<Result<Vec<_>>>()?;
        Ok(self.dense.get_or_init(|| built))
    }

    /// Number of keys `(2^s + 1) · 4^m · 2^s`.
    pub fn key_count(&self) -> u64 {
        self.num_codes() as u64 * (1u64 << (2 * self.m())) * (1u64 << self.s())
    }

    /// Every key, ordered by `k`, then `x`, then `y`.
    pub fn all_keys(&self) -> impl Iterator<Item = AuthKey> + '_ {
        let (m, s) = (self.m(), self.s());
        (0..self.num_codes()).flat_map(move |k| {
            (0..1u64 << (2 * m)).flat_map(move |x| {
                (0..1u64 << s).map(move |y| AuthKey {
                    k,
                    x,
                    y: Syndrome::new(s, y).expect("in range"),
                })
            })
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AuthKey {
    pub k: usize,
    /// Pad key: X bits `0..m`, Z bits `m..2m`.
    pub x: u64,
    pub y: Syndrome,
}

#[derive(Serialize, Deserialize)]
struct KeyFile {
    k: usize,
    x: String,
    y: String,
}

impl AuthKey {
    pub fn validate(&self, scheme: &Scheme) -> Result<()> {
        scheme.family.code(self.k)?;
        if self.x & !low_mask(2 * scheme.m()) != 0 {
            return Err(Error::InvalidParameter("pad key wider than 2m bits".into()));
        }
        if self.y.len() != scheme.s() {
            return Err(Error::SizeMismatch {
                expected: scheme.s(),
                got: self.y.len(),
            });
        }
        Ok(())
    }

    /// `k`, then `x`, then `y`, each least significant bit first.
    pub fn to_bitstring(&self, scheme: &Scheme) -> Result<String> {
        self.validate(scheme)?;
        let mut out = String::new();
        let mut push = |v: u64, len: usize| {
            for i in 0..len {
                out.push(if (v >> i) & 1 == 1 { '1' } else { '0' });
            }
        };
        push(self.k as u64, key_index_bits(scheme.family.s()));
        push(self.x, 2 * scheme.m());
        push(self.y.bits(), scheme.s());
        Ok(out)
    }

    pub fn from_bitstring(scheme: &Scheme, bits: &str) -> Result<Self> {
        let kb = key_index_bits(scheme.family.s());
        let (m, s) = (scheme.m(), scheme.s());
        if bits.len() != kb + 2 * m + s {
            return Err(Error::SizeMismatch {
                expected: kb + 2 * m + s,
                got: bits.len(),
            });
        }
        let read = |range: std::ops::Range<usize>| -> Result<u64> {
            bits[range]
                .chars()
                .enumerate()
                .try_fold(0u64, |acc, (i, c)| match c {
                    '0' => Ok(acc),
                    '1' => Ok(acc | (1 << i)),
                    _ => Err(Error::Parse(format!("bad key bit '{c}'"))),
                })
        };
        let key = AuthKey {
            k: read(0..kb)? as usize,
            x: read(kb..kb + 2 * m)?,
            y: Syndrome::new(s, read(kb + 2 * m..kb + 2 * m + s)?)?,
        };
        key.validate(scheme)?;
        Ok(key)
    }

    pub fn to_json(&self, scheme: &Scheme) -> Result<String> {
        self.validate(scheme)?;
        serde_json::to_string(&KeyFile {
            k: self.k,
            x: to_hex(self.x, 2 * scheme.m()),
            y: to_hex(self.y.bits(), scheme.s()),
        })
        .map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn from_json(scheme: &Scheme, text: &str) -> Result<Self> {
        let f: KeyFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("key file: {e}")))?;
        let key = AuthKey {
            k: f.k,
            x: parse_hex(&f.x)?,
            y: Syndrome::new(scheme.s(), parse_hex(&f.y)?)?,
        };
        key.validate(scheme)?;
        Ok(key)
    }
}

/// Draws a key from `rng`; `k` by rejection sampling on
/// `ceil(log2(2^s + 1))` bits.
pub fn keygen_from<R: RngCore + ?Sized>(scheme: &Scheme, rng: &mut R) -> AuthKey {
    let kb = key_index_bits(scheme.family.s());
    let count = scheme.num_codes() as u64;
    let k = loop {
        let v = rng.next_u64() & low_mask(kb);
        if v < count {
            break v as usize;
        }
    };
    let x = rng.next_u64() & low_mask(2 * scheme.m());
    let y = rng.next_u64() & low_mask(scheme.s());
    AuthKey {
        k,
        x,
        y: Syndrome::new(scheme.s(), y).expect("masked"),
    }
}

pub fn keygen(seed: u64, scheme: &Scheme) -> AuthKey {
    keygen_from(scheme, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Applies `Z^b X^a` with `a = x[0..m]`, `b = x[m..2m]`.
pub fn qotp_apply(x: u64, msg: &DenseState) -> Result<DenseState> {
    let m = msg.n();
    check_dense_cap(m)?;
    if x & !low_mask(2 * m) != 0 {
        return Err(Error::SizeMismatch {
            expected: 2 * m,
            got: 64 - x.leading_zeros() as usize,
        });
    }
    DenseState::new(qotp_raw(m, x, msg.amps().as_slice()))
}

pub(crate) fn qotp_raw(m: usize, x: u64, v: &[C64]) -> Vec<C64> {
    let (a, b) = (x & low_mask(m), x >> m);
    let out = apply_pauli_xz(a, b, v);
    if (a & b).count_ones() % 2 == 1 {
        out.into_iter().map(|c| -c).collect()
    } else {
        out
    }
}

pub fn auth_encode(scheme: &Scheme, key: &AuthKey, msg: &DenseState) -> Result<DenseState> {
    key.validate(scheme)?;
    let dense = scheme.dense()?;
    let padded = qotp_apply(key.x, msg)?;
    encode_dense(&dense[key.k], key.y, &padded)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    pub fn letter(self) -> char {
        match self {
            Verdict::Accept => 'A',
            Verdict::Reject => 'R',
        }
    }
}

/// Decodes, accepts iff the observed syndrome is `y`, and unpads. The
/// decoded content is returned in both cases.
pub fn auth_verify(
    scheme: &Scheme,
    key: &AuthKey,
    received: &DenseState,
) -> Result<(Verdict, DenseState)> {
    key.validate(scheme)?;
    let dense = scheme.dense()?;
    let (decoded, observed) = decode_dense(&dense[key.k], received)?;
    let verdict = if observed == key.y {
        Verdict::Accept
    } else {
        Verdict::Reject
    };
    Ok((verdict, qotp_apply(key.x, &decoded)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub verdict: Verdict,
    /// Logical label, X bits `0..m`, Z bits `m..2m`; zero on Reject.
    pub logical_effect: u64,
}

impl AttackOutcome {
    pub fn corrupts(&self) -> bool {
        self.verdict == Verdict::Accept && self.logical_effect != 0
    }
}

fn check_error_size(scheme: &Scheme, e: PauliVector) -> Result<()> {
    if e.n() != scheme.n() {
        return Err(Error::SizeMismatch {
            expected: scheme.n(),
            got: e.n(),
        });
    }
    Ok(())
}

/// Symbolic outcome of the attack `E_e`; only `k` matters, since the pad
/// maps a Pauli attack to itself up to sign.
pub fn pauli_attack_analyze(
    scheme: &Scheme,
    key: &AuthKey,
    e: PauliVector,
) -> Result<AttackOutcome> {
    key.validate(scheme)?;
    check_error_size(scheme, e)?;
    Ok(analyze_code(&scheme.completions[key.k], e.bits()))
}

#[inline]
fn analyze_code(c: &SymplecticCompletion, e: u64) -> AttackOutcome {
    if c.syndrome_bits(e) != 0 {
        AttackOutcome {
            verdict: Verdict::Reject,
            logical_effect: 0,
        }
    } else {
        AttackOutcome {
            verdict: Verdict::Accept,
            logical_effect: c.logical_bits(e),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoundnessReport {
    pub error: PauliVector,
    /// Entry `k` is the outcome under code `k`.
    pub outcomes: Vec<AttackOutcome>,
    pub corruption_probability: Rational,
}

impl SoundnessReport {
    pub fn corruption_string(&self) -> String {
        rational_string(&self.corruption_probability)
    }
}

/// Corruption probability of `E_e` over a uniform code index.
pub fn soundness_exact(scheme: &Scheme, e: PauliVector) -> Result<SoundnessReport> {
    check_error_size(scheme, e)?;
    let outcomes: Vec<AttackOutcome> = scheme
        .completions
        .iter()
        .map(|c| analyze_code(c, e.bits()))
        .collect();
    let bad = outcomes.iter().filter(|o| o.corrupts()).count() as u64;
    Ok(SoundnessReport {
        error: e,
        outcomes,
        corruption_probability: Rational::new(bad, scheme.num_codes() as u64),
    })
}

/// Largest corruption probability over all nonzero labels, with the lowest
/// label attaining it.
pub fn soundness_max(scheme: &Scheme, cap: usize) -> Result<(Rational, PauliVector)> {
    let n = scheme.n();
    check_exhaustive_cap(n, cap)?;
    let (count, label) = (1u64..1u64 << (2 * n))
        .into_par_iter()
        .map(|e| {
            let bad = scheme
                .completions
                .iter()
                .filter(|c| analyze_code(c, e).corrupts())
                .count();
            (bad, std::cmp::Reverse(e))
        })
        .max()
        .map(|(c, std::cmp::Reverse(e))| (c, e))
        .unwrap_or((0, 0));
    Ok((
        Rational::new(count as u64, scheme.num_codes() as u64),
        PauliVector::new(n, label)?,
    ))
}

/// Doubles a label on `n` qubits into `A ⊗ A` on `2n` qubits, Alice low.
fn doubled(n: usize, p: u64) -> Result<PauliVector> {
    let (a, b) = (p & low_mask(n), p >> n);
    PauliVector::from_parts(2 * n, a | (a << n), b | (b << n))
}

/// Bell-frame purity test on `n` EPR pairs with error `E_e ⊗ I`: both parties
/// measure the generators of `Q_k` on their halves and accept iff every
/// outcome agrees; the surviving logical error is read off the logical pair
/// parities.
pub fn purity_protocol_analyze(scheme: &Scheme, k: usize, e: PauliVector) -> Result<AttackOutcome> {
    check_error_size(scheme, e)?;
    let c = scheme.completion(k)?;
    let n = scheme.n();
    let frame = PauliVector::from_parts(2 * n, e.x_part(), e.z_part())?;
    // Agreement of outcome i is the parity of g_i ⊗ g_i on the pairs, which
    // the error flips iff it anticommutes with that joint observable.
    for &g in c.stabilizers() {
        if symplectic_standard(doubled(n, g)?, frame)? == 1 {
            return Ok(AttackOutcome {
                verdict: Verdict::Reject,
                logical_effect: 0,
            });
        }
    }
    let m = c.m();
    let mut effect = 0u64;
    for j in 0..m {
        let zz = doubled(n, c.logical_z()[j])?;
        let xx = doubled(n, c.logical_x()[j])?;
        effect |= u64::from(symplectic_standard(zz, frame)?) << j;
        effect |= u64::from(symplectic_standard(xx, frame)?) << (m + j);
    }
    Ok(AttackOutcome {
        verdict: Verdict::Accept,
        logical_effect: effect,
    })
}

/// CSV rows `error_hex, v_0 … v_K, corruption_probability`.
pub fn attack_table_csv(scheme: &Scheme, errors: &[PauliVector]) -> Result<String> {
    let mut out = String::from("error_hex");
    for k in 0..scheme.num_codes() {
        out.push_str(&format!(",k{k}"));
    }
    out.push_str(",corruption_probability\n");
    for &e in errors {
        let rep = soundness_exact(scheme, e)?;
        out.push_str(&e.to_hex());
        for o in &rep.outcomes {
            out.push(',');
            out.push(o.verdict.letter());
        }
        out.push(',');
        out.push_str(&rep.corruption_string());
        out.push('\n');
    }
    Ok(out)
}

/// Hex SHA-256 of the little-endian seed bytes.
pub fn seed_commitment(seed: u64) -> String {
    Sha256::digest(seed.to_le_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvelopeHeader {
    pub r: u32,
    pub s: u32,
    /// Zero qubits appended to the sender's message to reach `m`.
    pub pad: usize,
    pub seed_commitment: String,
}

/// One JSON header line, a newline, then the encoded state as interleaved
/// little-endian doubles.
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    pub header: EnvelopeHeader,
    pub payload: DenseState,
}

impl Envelope {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out =
            serde_json::to_vec(&self.header).map_err(|e| Error::Internal(e.to_string()))?;
        out.push(b'\n');
        out.extend(self.payload.to_bytes());
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let split = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Parse("envelope has no header line".into()))?;
        let header: EnvelopeHeader = serde_json::from_slice(&bytes[..split])
            .map_err(|e| Error::Parse(format!("envelope header: {e}")))?;
        let payload = DenseState::from_bytes(&bytes[split + 1..])?;
        if payload.n() != (header.r * header.s) as usize {
            return Err(Error::SizeMismatch {
                expected: (header.r * header.s) as usize,
                got: payload.n(),
            });
        }
        Ok(Envelope { header, payload })
    }
}

/// Appends `pad` zero qubits above a message of `m - pad` qubits.
pub fn pad_message(msg: &DenseState, m: usize) -> Result<(DenseState, usize)> {
    if msg.n() > m {
        return Err(Error::InvalidParameter(format!(
            "message has {} qubits, the code carries {m}",
            msg.n()
        )));
    }
    let pad = m - msg.n();
    Ok((msg.tensor(&DenseState::zero(pad)?)?, pad))
}

/// Inverse of [`pad_message`]: keeps the low `m - pad` qubits, requiring the
/// pad register to be in `|0…0⟩`.
pub fn unpad_message(msg: &DenseState, pad: usize) -> Result<DenseState> {
    if pad > msg.n() {
        return Err(Error::InvalidParameter("pad exceeds message".into()));
    }
    let keep = 1usize << (msg.n() - pad);
    let amps = msg.amps();
    let tail: f64 = amps.iter().skip(keep).map(|a| a.norm_sqr()).sum();
    if tail > 1e-10 {
        return Err(Error::InvalidState("pad register is not |0…0⟩".into()));
    }
    DenseState::normalized(amps.rows(0, keep).into_owned())
}

/// Uniform random key index counts, for frequency checks.
pub fn key_index_histogram(scheme: &Scheme, seed: u64, draws: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; scheme.num_codes()];
    for _ in 0..draws {
        counts[keygen_from(scheme, &mut rng).k] += 1;
    }
    counts
}

/// Seeded random state on `n` qubits, for probes.
pub fn probe_state(n: usize, seed: u64) -> Result<DenseState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let _: u64 = rng.random();
    DenseState::random(n, &mut rng)
}
