//! Binary extension fields arranged as a two-level tower
//! `GF(2) -> GF(2^s) -> GF((2^s)^(2r))`.
//!
//! The top field is built as a polynomial extension of degree `2r` over the
//! base field, so an element is simultaneously a vector of `2r` base-field
//! coordinates and a `2rs`-bit binary vector. The binary layout concatenates
//! the `s`-bit base coordinates in ascending order: bit `i*s + j` of a
//! [`TowerElement`] is bit `j` of coordinate `i`.
//!
//! Moduli are the lexicographically smallest monic irreducible polynomials
//! of the required degree (see [`find_irreducible`]), so every field in this
//! crate is reproducible from `(r, s)` alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{parse_hex, to_hex};

/// Largest supported base degree `s`.
pub const MAX_BASE_DEGREE: u32 = 16;
/// Largest supported binary dimension `2rs` of the top field.
pub const MAX_TOWER_BITS: u32 = 64;

/// The field `GF(2^s)` in a polynomial basis over `GF(2)`.
///
/// Elements are `u32` bit patterns, bit `j` being the coefficient of `β^j`
/// where `β` is the class of `x` modulo the defining polynomial. For `s = 1`
/// the modulus is `x` itself and the field is `GF(2)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BaseField {
    s: u32,
    modulus: u64,
}

impl BaseField {
    /// `GF(2)`, with modulus `x`.
    pub fn gf2() -> Self {
        BaseField {
            s: 1,
            modulus: 0b10,
        }
    }

    pub fn new(s: u32) -> Result<Self> {
        if s == 0 || s > MAX_BASE_DEGREE {
            return Err(Error::InvalidParameter(format!(
                "base degree s must lie in 1..={MAX_BASE_DEGREE}, got {s}"
            )));
        }
        let coeffs = find_irreducible(s, &Self::gf2())?;
        let modulus = coeffs
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &c)| m | (u64::from(c) << i));
        Ok(BaseField { s, modulus })
    }

    /// Rebuilds a base field from a stored modulus, checking that it is monic
    /// of degree `s` and irreducible.
    pub fn from_modulus(s: u32, modulus: u64) -> Result<Self> {
        if s == 0 || s > MAX_BASE_DEGREE {
            return Err(Error::InvalidParameter(format!(
                "base degree s must lie in 1..={MAX_BASE_DEGREE}, got {s}"
            )));
        }
        if modulus >> s != 1 {
            return Err(Error::InvalidParameter(format!(
                "modulus {modulus:#x} is not monic of degree {s}"
            )));
        }
        let coeffs: Vec<u32> = (0..=s).map(|i| ((modulus >> i) & 1) as u32).collect();
        if !is_irreducible(&coeffs, &Self::gf2()) {
            return Err(Error::InvalidParameter(format!(
                "modulus {modulus:#x} is reducible over GF(2)"
            )));
        }
        Ok(BaseField { s, modulus })
    }

    pub fn degree(&self) -> u32 {
        self.s
    }

    pub fn order(&self) -> u64 {
        1u64 << self.s
    }

    /// Defining polynomial as an integer, bit `i` = coefficient of `x^i`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn contains(&self, a: u32) -> bool {
        u64::from(a) < self.order()
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.order() as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let (a, b) = (u64::from(a), u64::from(b));
        let mut prod = 0u64;
        for i in 0..self.s {
            if (b >> i) & 1 == 1 {
                prod ^= a << i;
            }
        }
        let mut bit = 2 * self.s;
        while bit > self.s {
            bit -= 1;
            if (prod >> bit) & 1 == 1 {
                prod ^= self.modulus << (bit - self.s);
            }
        }
        prod as u32
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut acc = 1u32;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(a, self.order() - 2))
    }

    /// Absolute trace `GF(2^s) -> GF(2)`.
    pub fn trace(&self, a: u32) -> u8 {
        let mut acc = 0u32;
        let mut p = a;
        for _ in 0..self.s {
            acc ^= p;
            p = self.mul(p, p);
        }
        debug_assert!(acc <= 1);
        acc as u8
    }
}

/// An element of a [`TowerField`], stored as its `2rs`-bit binary coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TowerElement(pub u64);

impl TowerElement {
    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// The field `GF(2^(2rs))` as a degree-`2r` extension of `GF(2^s)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TowerField {
    base: BaseField,
    r: u32,
    /// Monic modulus over the base field, low degree first, length `2r + 1`.
    modulus: Vec<u32>,
}

impl TowerField {
    pub fn new(r: u32, s: u32) -> Result<Self> {
        check_params(r, s)?;
        let base = BaseField::new(s)?;
        let modulus = find_irreducible(2 * r, &base)?;
        Ok(TowerField { base, r, modulus })
    }

    /// Rebuilds a tower from stored moduli, validating degree and irreducibility.
    pub fn from_parts(base: BaseField, r: u32, modulus: Vec<u32>) -> Result<Self> {
        check_params(r, base.degree())?;
        if modulus.len() != 2 * r as usize + 1 || modulus.last() != Some(&1) {
            return Err(Error::InvalidParameter(format!(
                "top modulus must be monic of degree {}",
                2 * r
            )));
        }
        if modulus.iter().any(|&c| !base.contains(c)) {
            return Err(Error::InvalidParameter(
                "top modulus coefficient outside the base field".into(),
            ));
        }
        if !is_irreducible(&modulus, &base) {
            return Err(Error::InvalidParameter(
                "top modulus is reducible over the base field".into(),
            ));
        }
        Ok(TowerField { base, r, modulus })
    }

    pub fn base(&self) -> &BaseField {
        &self.base
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn s(&self) -> u32 {
        self.base.degree()
    }

    /// Degree `2r` of the extension over the base field.
    pub fn extension_degree(&self) -> u32 {
        2 * self.r
    }

    /// Binary dimension `2rs`.
    pub fn bits(&self) -> u32 {
        2 * self.r * self.s()
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    fn mask(&self) -> u64 {
        if self.bits() == 64 {
            u64::MAX
        } else {
            (1u64 << self.bits()) - 1
        }
    }

    pub fn zero(&self) -> TowerElement {
        TowerElement(0)
    }

    pub fn one(&self) -> TowerElement {
        TowerElement(1)
    }

    /// Validates raw coordinates against this field's dimension.
    pub fn element(&self, bits: u64) -> Result<TowerElement> {
        if bits & !self.mask() != 0 {
            return Err(Error::DescriptorMismatch);
        }
        Ok(TowerElement(bits))
    }

    /// Iterates every element in ascending coordinate order. Only sensible for
    /// small towers.
    pub fn elements(&self) -> impl Iterator<Item = TowerElement> {
        (0..=self.mask()).map(TowerElement)
    }

    /// Coordinates over the base field, lowest power first.
    pub fn subfield_coords(&self, a: TowerElement) -> Vec<u32> {
        let s = self.s();
        let m = (1u64 << s) - 1;
        (0..self.extension_degree())
            .map(|i| ((a.0 >> (i * s)) & m) as u32)
            .collect()
    }

    /// Inverse of [`Self::subfield_coords`].
    pub fn assemble(&self, coords: &[u32]) -> Result<TowerElement> {
        if coords.len() != self.extension_degree() as usize {
            return Err(Error::SizeMismatch {
                expected: self.extension_degree() as usize,
                got: coords.len(),
            });
        }
        let s = self.s();
        let mut bits = 0u64;
        for (i, &c) in coords.iter().enumerate() {
            if !self.base.contains(c) {
                return Err(Error::DescriptorMismatch);
            }
            bits |= u64::from(c) << (i as u32 * s);
        }
        Ok(TowerElement(bits))
    }

    #[inline]
    pub fn add(&self, a: TowerElement, b: TowerElement) -> TowerElement {
        TowerElement(a.0 ^ b.0)
    }

    /// Multiplies by a base-field scalar coordinate-wise.
    pub fn scale(&self, alpha: u32, a: TowerElement) -> TowerElement {
        let coords: Vec<u32> = self
            .subfield_coords(a)
            .into_iter()
            .map(|c| self.base.mul(alpha, c))
            .collect();
        self.pack(&coords)
    }

    fn pack(&self, coords: &[u32]) -> TowerElement {
        let s = self.s();
        TowerElement(
            coords
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &c)| acc | (u64::from(c) << (i as u32 * s))),
        )
    }

    pub fn mul(&self, a: TowerElement, b: TowerElement) -> TowerElement {
        let d = self.extension_degree() as usize;
        let x = self.subfield_coords(a);
        let y = self.subfield_coords(b);
        let mut prod = vec![0u32; 2 * d - 1];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                prod[i + j] ^= self.base.mul(xi, yj);
            }
        }
        // The modulus is monic, so the leading term cancels exactly.
        for top in (d..prod.len()).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            for (k, &mk) in self.modulus[..d].iter().enumerate() {
                prod[top - d + k] ^= self.base.mul(c, mk);
            }
            prod[top] = 0;
        }
        self.pack(&prod[..d])
    }

    pub fn square(&self, a: TowerElement) -> TowerElement {
        self.mul(a, a)
    }

    pub fn pow(&self, a: TowerElement, mut e: u64) -> TowerElement {
        let mut acc = self.one();
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            e >>= 1;
        }
        acc
    }

    /// `a^(2^k)`.
    pub fn frobenius(&self, a: TowerElement, k: u32) -> TowerElement {
        (0..k).fold(a, |acc, _| self.square(acc))
    }

    pub fn inv(&self, a: TowerElement) -> Result<TowerElement> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        // a^(2^N - 2) with N = 2rs; the exponent is 2 + 4 + ... + 2^(N-1).
        let mut acc = self.one();
        let mut p = a;
        for _ in 1..self.bits() {
            p = self.square(p);
            acc = self.mul(acc, p);
        }
        Ok(acc)
    }

    /// Absolute trace to `GF(2)`: `Σ_{i < 2rs} z^(2^i)`.
    pub fn trace(&self, z: TowerElement) -> u8 {
        let mut acc = TowerElement(0);
        let mut p = z;
        for _ in 0..self.bits() {
            acc = self.add(acc, p);
            p = self.square(p);
        }
        debug_assert!(acc.0 <= 1, "absolute trace left GF(2)");
        acc.0 as u8
    }

    /// Relative trace down to the base field: `Σ_{i < 2r} z^(q^i)`, `q = 2^s`.
    pub fn relative_trace(&self, z: TowerElement) -> u32 {
        let mut acc = TowerElement(0);
        let mut p = z;
        for _ in 0..self.extension_degree() {
            acc = self.add(acc, p);
            p = self.frobenius(p, self.s());
        }
        debug_assert!(
            acc.0 < self.base.order(),
            "relative trace left the base field"
        );
        acc.0 as u32
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor {
            s: self.s(),
            r: self.r,
            base_modulus: to_hex(self.base.modulus(), self.s() as usize + 1),
            top_modulus: self
                .modulus
                .iter()
                .map(|&c| to_hex(u64::from(c), self.s() as usize))
                .collect(),
        }
    }

    pub fn from_descriptor(d: &FieldDescriptor) -> Result<Self> {
        let base = BaseField::from_modulus(d.s, parse_hex(&d.base_modulus)?)?;
        let modulus = d
            .top_modulus
            .iter()
            .map(|h| parse_hex(h).map(|v| v as u32))
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(base, d.r, modulus)
    }
}

fn check_params(r: u32, s: u32) -> Result<()> {
    if r == 0 || s == 0 {
        return Err(Error::InvalidParameter(format!(
            "r and s must be positive, got r={r}, s={s}"
        )));
    }
    if s > MAX_BASE_DEGREE || 2 * r * s > MAX_TOWER_BITS {
        return Err(Error::CapExceeded {
            what: "2rs",
            got: (2 * r * s) as usize,
            cap: MAX_TOWER_BITS as usize,
        });
    }
    Ok(())
}

/// Serializable form of a [`TowerField`]: `{s, r, moduli as hex}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub s: u32,
    pub r: u32,
    /// Base modulus over `GF(2)` as a hex integer (bit i = coefficient of `x^i`).
    pub base_modulus: String,
    /// Top modulus coefficients over `GF(2^s)`, lowest degree first.
    pub top_modulus: Vec<String>,
}

// Polynomials over a base field: coefficient vectors, lowest degree first,
// without trailing zeros (the zero polynomial is empty).

fn trim(mut p: Vec<u32>) -> Vec<u32> {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

fn poly_add(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = vec![0u32; a.len().max(b.len())];
    for (i, &c) in a.iter().enumerate() {
        out[i] ^= c;
    }
    for (i, &c) in b.iter().enumerate() {
        out[i] ^= c;
    }
    trim(out)
}

fn poly_rem(f: &BaseField, a: &[u32], m: &[u32]) -> Vec<u32> {
    let m = trim(m.to_vec());
    let dm = m.len() - 1;
    let lead_inv = f.inv(m[dm]).expect("nonzero leading coefficient");
    let mut r = trim(a.to_vec());
    while r.len() > dm {
        let top = r.len() - 1;
        let c = f.mul(r[top], lead_inv);
        for (k, &mk) in m.iter().enumerate() {
            r[top - dm + k] ^= f.mul(c, mk);
        }
        r = trim(r);
    }
    r
}

fn poly_mulmod(f: &BaseField, a: &[u32], b: &[u32], m: &[u32]) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] ^= f.mul(x, y);
        }
    }
    poly_rem(f, &prod, m)
}

fn poly_powmod(f: &BaseField, a: &[u32], mut e: u64, m: &[u32]) -> Vec<u32> {
    let mut acc = vec![1u32];
    let mut base = poly_rem(f, a, m);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(f, &acc, &base, m);
        }
        base = poly_mulmod(f, &base, &base, m);
        e >>= 1;
    }
    poly_rem(f, &acc, m)
}

fn poly_gcd(f: &BaseField, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(f, &a, &b);
        a = b;
        b = r;
    }
    a
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's irreducibility test for a monic polynomial over `ground`.
pub fn is_irreducible(poly: &[u32], ground: &BaseField) -> bool {
    let poly = trim(poly.to_vec());
    if poly.len() < 2 {
        return false;
    }
    let d = (poly.len() - 1) as u32;
    if d == 1 {
        return true;
    }
    let q = ground.order();
    let x = vec![0u32, 1];
    // frob[i] = x^(q^i) mod poly
    let mut frob = vec![poly_rem(ground, &x, &poly)];
    for _ in 0..d {
        let next = poly_powmod(ground, frob.last().unwrap(), q, &poly);
        frob.push(next);
    }
    if frob[d as usize] != poly_rem(ground, &x, &poly) {
        return false;
    }
    prime_factors(d).into_iter().all(|p| {
        let h = poly_add(&frob[(d / p) as usize], &x);
        poly_gcd(ground, &h, &poly).len() == 1
    })
}

/// Lexicographically smallest monic irreducible polynomial of `degree` over
/// `ground`, ordering candidates by their coefficient vector read as an
/// integer with the constant term in the low bits.
///
/// Returns the coefficients lowest degree first, including the leading 1.
pub fn find_irreducible(degree: u32, ground: &BaseField) -> Result<Vec<u32>> {
    if degree == 0 {
        return Err(Error::InvalidParameter(
            "irreducible polynomial degree must be at least 1".into(),
        ));
    }
    let s = ground.degree();
    if u64::from(degree) * u64::from(s) > 120 {
        return Err(Error::CapExceeded {
            what: "degree * s",
            got: (degree * s) as usize,
            cap: 120,
        });
    }
    let chunk = (1u128 << s) - 1;
    let count = 1u128 << (degree * s);
    for counter in 0..count {
        let mut poly: Vec<u32> = (0..degree)
            .map(|i| ((counter >> (i * s)) & chunk) as u32)
            .collect();
        poly.push(1);
        if is_irreducible(&poly, ground) {
            return Ok(poly);
        }
    }
    Err(Error::Internal(format!(
        "no irreducible polynomial of degree {degree} found"
    )))
}
