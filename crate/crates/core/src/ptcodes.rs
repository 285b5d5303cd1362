//! The curve family of purity-testing codes.
//!
//! Each point of the normal rational curve `[1 : y : … : y^(2r-1)]`,
//! `[0 : … : 0 : 1]` in `PG(2r-1, 2^s)` spans a one-dimensional
//! `GF(2^s)`-subspace of the tower, which is an `s`-dimensional binary
//! subspace `Q_k` once mapped to standard symplectic coordinates.

use std::fmt;

use itertools::Itertools;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gf2::{self, parse_hex, to_hex};
use crate::gf2e::{FieldDescriptor, TowerElement, TowerField};
use crate::pauli::{align_bases, low_mask, PauliVector, SymplecticBasisMap};

/// Default and hard cap on `n` for exhaustive enumeration of `4^n` labels.
pub const MAX_EXHAUSTIVE_N: usize = 12;

/// Exact rational used for error probabilities.
pub type Rational = Ratio<u64>;

/// Renders a rational as `p/q`, including when `q = 1`.
pub fn rational_string(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let (p, q) = s
        .split_once('/')
        .ok_or_else(|| Error::Parse(format!("expected p/q, got '{s}'")))?;
    let p: u64 = p
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad numerator in '{s}'")))?;
    let q: u64 = q
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad denominator in '{s}'")))?;
    if q == 0 {
        return Err(Error::Parse(format!("zero denominator in '{s}'")));
    }
    Ok(Rational::new(p, q))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurvePoint {
    index: usize,
    coords: Vec<u32>,
}

impl CurvePoint {
    pub fn index(&self) -> usize {
        self.index
    }

    /// Projective coordinates over `GF(2^s)`, first nonzero entry equal to 1.
    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn is_infinite(&self) -> bool {
        self.coords[0] == 0
    }
}

/// All `2^s + 1` curve points: finite points by ascending bit pattern of `y`,
/// then the point at infinity.
pub fn curve_points(tower: &TowerField) -> Vec<CurvePoint> {
    let base = tower.base();
    let len = 2 * tower.r() as usize;
    let mut pts: Vec<CurvePoint> = base
        .elements()
        .enumerate()
        .map(|(index, y)| CurvePoint {
            index,
            coords: (0..len).map(|i| base.pow(y, i as u64)).collect(),
        })
        .collect();
    let mut inf = vec![0u32; len];
    inf[len - 1] = 1;
    pts.push(CurvePoint {
        index: pts.len(),
        coords: inf,
    });
    pts
}

/// Classification of a Pauli label against one code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorClass {
    /// In `Q`: acts trivially on every codeword.
    Harmless,
    /// Outside `Q^⊥`: flips some syndrome bit.
    Detected,
    /// In `Q^⊥ − Q`: passes the syndrome check and corrupts the message.
    Undetected,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveCode {
    point: CurvePoint,
    n: usize,
    generators: Vec<u64>,
    checks: Vec<u64>,
}

/// Swaps the X and Z halves so that `B(g, x) = parity(swap(g) & x)`.
#[inline]
pub(crate) fn form_dual(n: usize, g: u64) -> u64 {
    (g >> n) | ((g & low_mask(n)) << n)
}

impl CurveCode {
    /// Wraps a generator set, which must be independent and isotropic.
    pub fn from_generators(point: CurvePoint, n: usize, rows: &[u64]) -> Result<Self> {
        let generators = gf2::rref(rows);
        if generators.len() != rows.len() {
            return Err(Error::InvalidParameter(
                "generators are linearly dependent".into(),
            ));
        }
        if 2 * n < 64 && rows.iter().any(|&g| g >> (2 * n) != 0) {
            return Err(Error::SizeMismatch {
                expected: 2 * n,
                got: 64,
            });
        }
        let checks: Vec<u64> = generators.iter().map(|&g| form_dual(n, g)).collect();
        for (i, &g) in generators.iter().enumerate() {
            if checks[..i].iter().any(|&c| gf2::parity(c & g) != 0) {
                return Err(Error::InvalidParameter(
                    "generators are not isotropic".into(),
                ));
            }
        }
        Ok(CurveCode {
            point,
            n,
            generators,
            checks,
        })
    }

    pub fn point(&self) -> &CurvePoint {
        &self.point
    }

    pub fn index(&self) -> usize {
        self.point.index
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of generators.
    pub fn s(&self) -> usize {
        self.generators.len()
    }

    /// Canonical generators: RREF rows in standard `(a|b)` coordinates.
    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> PauliVector {
        PauliVector::new(self.n, self.generators[i]).expect("generator fits")
    }

    pub fn contains(&self, x: PauliVector) -> bool {
        gf2::in_span(x.bits(), &self.generators)
    }

    /// Raw syndrome bits `B(g_i, x)` without a size check.
    #[inline]
    pub(crate) fn syndrome_bits(&self, x: u64) -> u64 {
        self.checks.iter().enumerate().fold(0u64, |acc, (i, &c)| {
            acc | (u64::from(gf2::parity(c & x)) << i)
        })
    }

    pub fn in_dual(&self, x: PauliVector) -> bool {
        self.syndrome_bits(x.bits()) == 0
    }

    /// Basis of `Q^⊥`.
    pub fn dual_basis(&self) -> Vec<u64> {
        gf2::kernel(&self.checks, 2 * self.n)
    }

    #[inline]
    pub(crate) fn classify_bits(&self, x: u64) -> ErrorClass {
        if self.syndrome_bits(x) != 0 {
            ErrorClass::Detected
        } else if gf2::in_span(x, &self.generators) {
            ErrorClass::Harmless
        } else {
            ErrorClass::Undetected
        }
    }
}

/// Maps `{α·z : α ∈ GF(2^s)}` for the point's field representative `z` to
/// standard coordinates and row-reduces.
pub fn code_from_point(
    tower: &TowerField,
    map: &SymplecticBasisMap,
    pt: &CurvePoint,
) -> Result<CurveCode> {
    let z = tower.assemble(&pt.coords)?;
    let rows: Vec<u64> = (0..tower.s())
        .map(|j| map.to_standard(tower.scale(1 << j, z)).bits())
        .collect();
    CurveCode::from_generators(pt.clone(), map.n(), &rows)
}

pub fn classify_error(code: &CurveCode, x: PauliVector) -> Result<ErrorClass> {
    if x.n() != code.n {
        return Err(Error::SizeMismatch {
            expected: code.n,
            got: x.n(),
        });
    }
    Ok(code.classify_bits(x.bits()))
}

#[derive(Clone, Debug)]
pub struct PurityTestingFamily {
    tower: TowerField,
    map: SymplecticBasisMap,
    codes: Vec<CurveCode>,
}

impl PurityTestingFamily {
    pub fn build(r: u32, s: u32) -> Result<Self> {
        if r == 0 || s == 0 {
            return Err(Error::InvalidParameter(format!(
                "r and s must be positive, got r={r}, s={s}"
            )));
        }
        let tower = TowerField::new(r, s)?;
        let map = align_bases(&tower)?;
        let codes = curve_points(&tower)
            .iter()
            .map(|pt| code_from_point(&tower, &map, pt))
            .collect::<Result<Vec<_>>>()?;
        Ok(PurityTestingFamily { tower, map, codes })
    }

    /// A family with caller-supplied codes over the same field; used to test
    /// the checks against families that are not built from the curve.
    pub fn with_codes(&self, codes: Vec<CurveCode>) -> Result<Self> {
        if codes
            .iter()
            .any(|c| c.n != self.n() || c.s() != self.s() as usize)
        {
            return Err(Error::InvalidParameter(
                "codes do not match the field".into(),
            ));
        }
        Ok(PurityTestingFamily {
            tower: self.tower.clone(),
            map: self.map.clone(),
            codes,
        })
    }

    pub fn r(&self) -> u32 {
        self.tower.r()
    }

    pub fn s(&self) -> u32 {
        self.tower.s()
    }

    /// Physical qubits `n = rs`.
    pub fn n(&self) -> usize {
        (self.r() * self.s()) as usize
    }

    /// Logical qubits `m = (r - 1)s`.
    pub fn m(&self) -> usize {
        ((self.r() - 1) * self.s()) as usize
    }

    pub fn tower(&self) -> &TowerField {
        &self.tower
    }

    pub fn basis_map(&self) -> &SymplecticBasisMap {
        &self.map
    }

    pub fn codes(&self) -> &[CurveCode] {
        &self.codes
    }

    pub fn code(&self, k: usize) -> Result<&CurveCode> {
        self.codes.get(k).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "code index {k} out of range 0..{}",
                self.codes.len()
            ))
        })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// `2r / (2^s + 1)`.
    pub fn epsilon_bound(&self) -> Rational {
        Rational::new(2 * u64::from(self.r()), (1u64 << self.s()) + 1)
    }

    /// Number of codes for which `x` is undetected.
    pub fn undetected_count(&self, x: PauliVector) -> Result<usize> {
        self.codes
            .iter()
            .map(|c| classify_error(c, x).map(|k| (k == ErrorClass::Undetected) as usize))
            .sum()
    }

    fn undetected_bits(&self, x: u64) -> u32 {
        self.codes
            .iter()
            .filter(|c| c.classify_bits(x) == ErrorClass::Undetected)
            .count() as u32
    }

    fn body(&self) -> FamilyBody {
        let nbits = 2 * self.n();
        FamilyBody {
            r: self.r(),
            s: self.s(),
            n: self.n(),
            m: self.m(),
            field: self.tower.descriptor(),
            epsilon_bound: rational_string(&self.epsilon_bound()),
            codes: self
                .codes
                .iter()
                .map(|c| CodeRecord {
                    index: c.index(),
                    point: c
                        .point
                        .coords
                        .iter()
                        .map(|&v| to_hex(u64::from(v), self.s() as usize))
                        .collect(),
                    generators: c.generators.iter().map(|&g| to_hex(g, nbits)).collect(),
                })
                .collect(),
        }
    }

    /// JSON with a SHA-256 checksum over the canonical body.
    pub fn to_json(&self) -> Result<String> {
        let body = self.body();
        let checksum = body_checksum(&body)?;
        serde_json::to_string_pretty(&FamilyFile { body, checksum })
            .map_err(|e| Error::Internal(e.to_string()))
    }

    /// Parses, verifies the checksum, rebuilds the family from `(r, s)` and
    /// the field moduli, and rejects any mismatch with the stored codes.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: FamilyFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("family file: {e}")))?;
        let expect = body_checksum(&file.body)?;
        if expect != file.checksum {
            return Err(Error::Parse(format!(
                "family checksum mismatch: stored {}, computed {expect}",
                file.checksum
            )));
        }
        let tower = TowerField::from_descriptor(&file.body.field)?;
        if tower.r() != file.body.r || tower.s() != file.body.s {
            return Err(Error::Parse("field descriptor disagrees with r, s".into()));
        }
        let family = Self::build(file.body.r, file.body.s)?;
        if family.tower.descriptor() != file.body.field {
            return Err(Error::Parse(
                "field moduli are not the canonical ones".into(),
            ));
        }
        if family.body() != file.body {
            return Err(Error::Parse(
                "stored codes disagree with the construction".into(),
            ));
        }
        Ok(family)
    }

    /// CSV of every nonzero label with its weight and undetected count.
    pub fn undetected_csv(&self, cap: usize) -> Result<String> {
        check_exhaustive_cap(self.n(), cap)?;
        let nbits = 2 * self.n();
        let mut out = String::from("error_hex,weight,undetected\n");
        for x in PauliVector::all(self.n()).skip(1) {
            out.push_str(&format!(
                "{},{},{}\n",
                to_hex(x.bits(), nbits),
                x.weight(),
                self.undetected_bits(x.bits())
            ));
        }
        Ok(out)
    }
}

fn body_checksum(body: &FamilyBody) -> Result<String> {
    let canon = serde_json::to_vec(body).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(Sha256::digest(&canon)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct CodeRecord {
    index: usize,
    point: Vec<String>,
    generators: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct FamilyBody {
    r: u32,
    s: u32,
    n: usize,
    m: usize,
    field: FieldDescriptor,
    epsilon_bound: String,
    codes: Vec<CodeRecord>,
}

#[derive(Serialize, Deserialize)]
struct FamilyFile {
    #[serde(flatten)]
    body: FamilyBody,
    checksum: String,
}

/// Parses a generator row stored in a family file.
pub fn parse_generator(hex: &str) -> Result<u64> {
    parse_hex(hex)
}

pub fn check_exhaustive_cap(n: usize, cap: usize) -> Result<()> {
    let cap = cap.min(MAX_EXHAUSTIVE_N);
    if n > cap {
        return Err(Error::CapExceeded {
            what: "n for exhaustive enumeration",
            got: n,
            cap,
        });
    }
    Ok(())
}

/// Result of the exhaustive scan over all nonzero labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsilonTable {
    pub epsilon: Rational,
    pub bound: Rational,
    /// Largest undetected count over all nonzero labels.
    pub max_undetected: u32,
    /// Lowest label reaching `max_undetected`.
    pub worst_error: PauliVector,
    /// Entry `w` is the largest undetected count among labels of weight `w`.
    pub per_weight: Vec<u32>,
    pub labels_scanned: u64,
}

impl EpsilonTable {
    pub fn passes(&self) -> bool {
        self.epsilon <= self.bound
    }
}

impl fmt::Display for EpsilonTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "epsilon_exact={} bound={} worst={}",
            rational_string(&self.epsilon),
            rational_string(&self.bound),
            self.worst_error
        )
    }
}

/// Exhaustive scan with the default cap.
pub fn epsilon_exact(family: &PurityTestingFamily) -> Result<Rational> {
    Ok(epsilon_table(family, MAX_EXHAUSTIVE_N)?.epsilon)
}

/// Max over `x != 0` of the undetected fraction, together with per-weight
/// maxima. Every label is visited.
pub fn epsilon_table(family: &PurityTestingFamily, cap: usize) -> Result<EpsilonTable> {
    let n = family.n();
    check_exhaustive_cap(n, cap)?;
    let total = 1u64 << (2 * n);
    let mask = low_mask(n);
    let (max, worst, per_weight) = (1..total)
        .into_par_iter()
        .fold(
            || (0u32, u64::MAX, vec![0u32; n + 1]),
            |(mut max, mut worst, mut pw), x| {
                let c = family.undetected_bits(x);
                let w = ((x & mask) | (x >> n)).count_ones() as usize;
                pw[w] = pw[w].max(c);
                if c > max || (c == max && x < worst) {
                    max = c;
                    worst = x;
                }
                (max, worst, pw)
            },
        )
        .reduce(
            || (0u32, u64::MAX, vec![0u32; n + 1]),
            |a, b| {
                let pw = a.2.iter().zip(&b.2).map(|(p, q)| *p.max(q)).collect();
                let (max, worst) = if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                    (a.0, a.1)
                } else {
                    (b.0, b.1)
                };
                (max, worst, pw)
            },
        );
    let worst = if worst == u64::MAX { 0 } else { worst };
    Ok(EpsilonTable {
        epsilon: Rational::new(u64::from(max), family.len() as u64),
        bound: family.epsilon_bound(),
        max_undetected: max,
        worst_error: PauliVector::new(n, worst)?,
        per_weight,
        labels_scanned: total - 1,
    })
}

/// Largest subset size tested: `2r`, or the whole family if it is smaller.
fn position_subset_size(family: &PurityTestingFamily) -> usize {
    (2 * family.r() as usize).min(family.len())
}

fn subset_independent(family: &PurityTestingFamily, subset: &[usize]) -> bool {
    let rows: Vec<u64> = subset
        .iter()
        .flat_map(|&k| family.codes[k].generators.iter().copied())
        .collect();
    gf2::rank(&rows) == rows.len()
}

/// True iff every `2r` codes together span a space of dimension `2rs`.
/// Exhaustive for `s <= 3`; 4096 seeded subsets otherwise. When the family
/// has fewer than `2r` codes the whole family is tested.
pub fn general_position_check(family: &PurityTestingFamily) -> bool {
    let size = position_subset_size(family);
    let len = family.len();
    if family.s() <= 3 {
        let subsets: Vec<Vec<usize>> = (0..len).combinations(size).collect();
        subsets
            .par_iter()
            .all(|sub| subset_independent(family, sub))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9_7f4a_7c15);
        (0..4096).all(|_| {
            let mut pick: Vec<usize> = Vec::with_capacity(size);
            while pick.len() < size {
                let k = rng.random_range(0..len);
                if !pick.contains(&k) {
                    pick.push(k);
                }
            }
            subset_independent(family, &pick)
        })
    }
}

/// Field elements of `Q_k` before mapping, for membership checks.
pub fn code_field_span(family: &PurityTestingFamily, k: usize) -> Result<Vec<TowerElement>> {
    let code = family.code(k)?;
    let z = family.tower.assemble(&code.point.coords)?;
    Ok(family
        .tower
        .base()
        .elements()
        .map(|a| family.tower.scale(a, z))
        .collect())
}
