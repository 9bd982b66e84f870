//! Exact arithmetic in GF(p^m), polynomial basis.
//!
//! Binary fields store elements as packed bit vectors (bit `i` of word `i/64`
//! is the coefficient of `x^i`); odd characteristic stores one residue per
//! coefficient. Elements are plain values; all arithmetic goes through a
//! [`Field`] handle, which is cheap to clone.

pub(crate) mod gfp;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// A field element in polynomial basis. Only meaningful together with the
/// [`Field`] that produced it.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fe(SmallVec<[u64; 8]>);

impl Fe {
    pub fn words(&self) -> &[u64] {
        &self.0
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fe(")?;
        for (i, w) in self.0.iter().enumerate().rev() {
            if i + 1 != self.0.len() {
                write!(f, "_")?;
            }
            write!(f, "{w:x}")?;
        }
        write!(f, ")")
    }
}

/// Description of GF(p^m): characteristic, degree, monic irreducible
/// modulus (ascending coefficients, length `m + 1`) and the element used as
/// the primitive-element candidate `a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSpec {
    pub characteristic: u64,
    pub degree: usize,
    pub modulus: Vec<u64>,
    pub generator: Fe,
}

/// NIST binary field polynomials plus the usual degree-64 pentanomial,
/// as `(m, taps below m)`.
const VETTED_BINARY: &[(usize, &[usize])] = &[
    (64, &[4, 3, 1, 0]),
    (163, &[7, 6, 3, 0]),
    (233, &[74, 0]),
    (283, &[12, 7, 5, 0]),
    (409, &[87, 0]),
    (571, &[10, 5, 2, 0]),
];

fn vetted_modulus(p: u64, m: usize) -> Option<Vec<u64>> {
    let (_, taps) = VETTED_BINARY.iter().find(|(d, _)| p == 2 && *d == m)?;
    let mut f = vec![0u64; m + 1];
    f[m] = 1;
    for &t in *taps {
        f[t] = 1;
    }
    Some(f)
}

/// Degree of the default large binary field used for the (5,3,2) example.
pub const EXAMPLE_FIELD_DEGREE: usize = 409;

#[derive(Debug)]
enum Kind {
    Binary {
        words: usize,
        /// Exponents of the modulus below `m`, descending.
        taps: Vec<usize>,
        /// Full modulus as a bit pattern, when `m <= 64`.
        small_modulus: Option<u128>,
    },
    Odd {
        p: u64,
    },
}

#[derive(Debug)]
struct Inner {
    spec: FieldSpec,
    kind: Kind,
}

/// Handle to a finite field. Cloning shares the underlying tables.
#[derive(Clone, Debug)]
pub struct Field(Arc<Inner>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Eq for Field {}

impl Field {
    /// Builds a field from an explicit spec, verifying that the characteristic
    /// is prime, the modulus monic and irreducible, and the generator nonzero.
    pub fn new(spec: FieldSpec) -> Result<Self> {
        Self::check_shape(&spec)?;
        let vetted = vetted_modulus(spec.characteristic, spec.degree).is_some_and(|v| v == spec.modulus);
        if !vetted && !gfp::is_irreducible(&spec.modulus, spec.characteristic) {
            return Err(Error::InvalidField(format!(
                "modulus of degree {} is reducible over GF({})",
                spec.degree, spec.characteristic
            )));
        }
        Self::build(spec)
    }

    fn check_shape(spec: &FieldSpec) -> Result<()> {
        let p = spec.characteristic;
        if !gfp::is_prime(p) || p >= 1 << 32 {
            return Err(Error::InvalidField(format!(
                "characteristic {p} is not a prime below 2^32"
            )));
        }
        if spec.degree == 0 {
            return Err(Error::InvalidField("degree must be positive".into()));
        }
        if spec.modulus.len() != spec.degree + 1 || spec.modulus[spec.degree] != 1 {
            return Err(Error::InvalidField(format!(
                "modulus must be monic of degree {}",
                spec.degree
            )));
        }
        if spec.modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidField(
                "modulus coefficient out of range".into(),
            ));
        }
        Ok(())
    }

    fn build(spec: FieldSpec) -> Result<Self> {
        let m = spec.degree;
        let kind = if spec.characteristic == 2 {
            let mut taps: Vec<usize> = (0..m).filter(|&i| spec.modulus[i] == 1).collect();
            taps.reverse();
            let small_modulus = (m <= 64).then(|| {
                let mut bits = 1u128 << m;
                for &t in &taps {
                    bits |= 1u128 << t;
                }
                bits
            });
            Kind::Binary {
                words: m.div_ceil(64),
                taps,
                small_modulus,
            }
        } else {
            Kind::Odd {
                p: spec.characteristic,
            }
        };
        let field = Field(Arc::new(Inner {
            spec: spec.clone(),
            kind,
        }));
        let g = &spec.generator;
        if g.0.len() != field.width() || !field.is_valid(g) {
            return Err(Error::InvalidField("malformed generator candidate".into()));
        }
        if field.is_zero(g) {
            return Err(Error::InvalidField("generator candidate is zero".into()));
        }
        Ok(field)
    }

    /// Default GF(p^m): the vetted binary polynomial when one is tabulated,
    /// otherwise the lexicographically smallest monic irreducible. For
    /// `m = 1` the modulus is `x - g` with `g` the smallest primitive root, so
    /// that the candidate `x` is a generator of the multiplicative group.
    pub fn gf(p: u64, m: usize) -> Result<Self> {
        if !gfp::is_prime(p) || p >= 1 << 32 {
            return Err(Error::InvalidField(format!("{p} is not a prime below 2^32")));
        }
        if m == 0 {
            return Err(Error::InvalidField("degree must be positive".into()));
        }
        let modulus = if m == 1 {
            let g = smallest_primitive_root(p);
            vec![(p - g) % p, 1]
        } else if let Some(f) = vetted_modulus(p, m) {
            // Tabulated moduli are irreducible by construction; the unit tests
            // re-verify them.
            let mut generator = vec![0u64; m];
            generator[1] = 1;
            let spec = FieldSpec {
                characteristic: 2,
                degree: m,
                modulus: f,
                generator: Self::pack(2, m, &generator),
            };
            Self::check_shape(&spec)?;
            return Self::build(spec);
        } else {
            smallest_irreducible(p, m)
        };
        Self::from_modulus(p, modulus)
    }

    /// The same field with another primitive-element candidate.
    pub fn with_generator(&self, generator: Fe) -> Result<Self> {
        Self::build(FieldSpec {
            generator,
            ..self.spec().clone()
        })
    }

    /// Field with the given modulus and the default candidate `x mod f`.
    pub fn from_modulus(p: u64, modulus: Vec<u64>) -> Result<Self> {
        let m = modulus.len().saturating_sub(1);
        let mut generator_coeffs = vec![0u64; m];
        if m == 1 {
            generator_coeffs[0] = (p - modulus[0]) % p;
        } else if m > 1 {
            generator_coeffs[1] = 1;
        }
        let generator = Self::pack(p, m, &generator_coeffs);
        Self::new(FieldSpec {
            characteristic: p,
            degree: m,
            modulus,
            generator,
        })
    }

    /// GF(2^409) with the NIST trinomial `x^409 + x^87 + 1`.
    pub fn example_field() -> Self {
        static FIELD: OnceLock<Field> = OnceLock::new();
        FIELD
            .get_or_init(|| Self::gf(2, EXAMPLE_FIELD_DEGREE).expect("vetted modulus"))
            .clone()
    }

    /// A field of the same characteristic with at least 2^61 elements, used
    /// to evaluate structured minors at random points. Returns `self` when it
    /// is already large enough.
    pub fn auxiliary(&self) -> Field {
        if self.log2_size() >= 61.0 {
            return self.clone();
        }
        static CACHE: OnceLock<Mutex<HashMap<u64, Field>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let p = self.characteristic();
        let mut guard = cache.lock().expect("aux cache poisoned");
        guard
            .entry(p)
            .or_insert_with(|| {
                let m = (61.0 / (p as f64).log2()).ceil() as usize;
                let m = if p == 2 { 64 } else { m };
                Field::gf(p, m).expect("auxiliary field")
            })
            .clone()
    }

    fn pack(p: u64, m: usize, coeffs: &[u64]) -> Fe {
        if p == 2 {
            let mut w: SmallVec<[u64; 8]> = SmallVec::from_elem(0, m.div_ceil(64));
            for (i, &c) in coeffs.iter().enumerate() {
                if c & 1 == 1 {
                    w[i / 64] |= 1 << (i % 64);
                }
            }
            Fe(w)
        } else {
            Fe(coeffs.iter().copied().collect())
        }
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    pub fn characteristic(&self) -> u64 {
        self.0.spec.characteristic
    }

    pub fn degree(&self) -> usize {
        self.0.spec.degree
    }

    /// Number of machine words per element.
    fn width(&self) -> usize {
        match &self.0.kind {
            Kind::Binary { words, .. } => *words,
            Kind::Odd { .. } => self.degree(),
        }
    }

    pub fn log2_size(&self) -> f64 {
        self.degree() as f64 * (self.characteristic() as f64).log2()
    }

    /// Field order, if it fits in a `u128`.
    pub fn size(&self) -> Option<u128> {
        let p = self.characteristic() as u128;
        let mut acc: u128 = 1;
        for _ in 0..self.degree() {
            acc = acc.checked_mul(p)?;
        }
        Some(acc)
    }

    /// Short human-readable reference, e.g. `2^409`.
    pub fn reference(&self) -> String {
        format!("{}^{}", self.characteristic(), self.degree())
    }

    pub fn zero(&self) -> Fe {
        Fe(SmallVec::from_elem(0, self.width()))
    }

    pub fn one(&self) -> Fe {
        self.from_u64(1)
    }

    /// The candidate primitive element `a`.
    pub fn generator(&self) -> Fe {
        self.0.spec.generator.clone()
    }

    /// Image of the integer `n` in the prime subfield.
    pub fn from_u64(&self, n: u64) -> Fe {
        let mut z = self.zero();
        z.0[0] = n % self.characteristic();
        z
    }

    pub fn is_zero(&self, a: &Fe) -> bool {
        a.0.iter().all(|&w| w == 0)
    }

    pub fn is_one(&self, a: &Fe) -> bool {
        a.0[0] == 1 && a.0[1..].iter().all(|&w| w == 0)
    }

    fn is_valid(&self, a: &Fe) -> bool {
        match &self.0.kind {
            Kind::Binary { words, .. } => {
                let m = self.degree();
                a.0.len() == *words && (m % 64 == 0 || a.0[words - 1] >> (m % 64) == 0)
            }
            Kind::Odd { p } => a.0.len() == self.degree() && a.0.iter().all(|c| c < p),
        }
    }

    /// Coefficients in ascending powers, one per entry.
    pub fn coefficients(&self, a: &Fe) -> Vec<u64> {
        match &self.0.kind {
            Kind::Binary { .. } => (0..self.degree())
                .map(|i| (a.0[i / 64] >> (i % 64)) & 1)
                .collect(),
            Kind::Odd { .. } => a.0.to_vec(),
        }
    }

    pub fn from_coefficients(&self, coeffs: &[u64]) -> Result<Fe> {
        if coeffs.len() > self.degree() || coeffs.iter().any(|&c| c >= self.characteristic()) {
            return Err(Error::InvalidField("coefficient vector out of range".into()));
        }
        let mut full = coeffs.to_vec();
        full.resize(self.degree(), 0);
        Ok(Self::pack(self.characteristic(), self.degree(), &full))
    }

    pub fn add(&self, a: &Fe, b: &Fe) -> Fe {
        match &self.0.kind {
            Kind::Binary { .. } => Fe(a.0.iter().zip(&b.0).map(|(x, y)| x ^ y).collect()),
            Kind::Odd { p } => Fe(a.0.iter().zip(&b.0).map(|(x, y)| (x + y) % p).collect()),
        }
    }

    pub fn neg(&self, a: &Fe) -> Fe {
        match &self.0.kind {
            Kind::Binary { .. } => a.clone(),
            Kind::Odd { p } => Fe(a.0.iter().map(|x| (p - x) % p).collect()),
        }
    }

    pub fn sub(&self, a: &Fe, b: &Fe) -> Fe {
        match &self.0.kind {
            Kind::Binary { .. } => self.add(a, b),
            Kind::Odd { p } => Fe(a.0.iter().zip(&b.0).map(|(x, y)| (x + p - y) % p).collect()),
        }
    }

    pub fn mul(&self, a: &Fe, b: &Fe) -> Fe {
        match &self.0.kind {
            Kind::Binary {
                words,
                taps,
                small_modulus,
            } => {
                if let Some(modulus) = small_modulus {
                    let prod = clmul64(a.0[0], b.0[0]);
                    let mut single = SmallVec::new();
                    single.push(reduce_small(prod, *modulus, self.degree()));
                    Fe(single)
                } else {
                    Fe(self.binary_mul(a, b, *words, taps))
                }
            }
            Kind::Odd { p } => Fe(self.odd_mul(a, b, *p).into_iter().collect()),
        }
    }

    fn binary_mul(&self, a: &Fe, b: &Fe, w: usize, taps: &[usize]) -> SmallVec<[u64; 8]> {
        let mut prod: SmallVec<[u64; 16]> = SmallVec::from_elem(0, 2 * w + 1);
        for j in 0..w {
            let bj = b.0[j];
            if bj == 0 {
                continue;
            }
            let table = clmul_table(bj);
            for i in 0..w {
                let ai = a.0[i];
                if ai == 0 {
                    continue;
                }
                let r = clmul_with_table(ai, &table);
                prod[i + j] ^= r as u64;
                prod[i + j + 1] ^= (r >> 64) as u64;
            }
        }
        reduce_multiword(&mut prod, self.degree(), taps);
        prod[..w].iter().copied().collect()
    }

    fn odd_mul(&self, a: &Fe, b: &Fe, p: u64) -> Vec<u64> {
        let m = self.degree();
        let f = &self.0.spec.modulus;
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                if y != 0 {
                    prod[i + j] = (prod[i + j] + gfp::mul_mod_p(x, y, p)) % p;
                }
            }
        }
        for d in (m..2 * m - 1).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for i in 0..m {
                let t = gfp::mul_mod_p(c, f[i], p);
                prod[d - m + i] = (prod[d - m + i] + p - t) % p;
            }
        }
        prod.truncate(m);
        prod
    }

    pub fn inv(&self, a: &Fe) -> Result<Fe> {
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        match &self.0.kind {
            Kind::Binary { words, .. } => Ok(self.binary_inv(a, *words)),
            Kind::Odd { p } => {
                let inv = gfp::inv_mod_poly(&a.0, &self.0.spec.modulus, *p)
                    .expect("nonzero element of a field is invertible");
                let mut coeffs = inv;
                coeffs.resize(self.degree(), 0);
                Ok(Fe(coeffs.into_iter().collect()))
            }
        }
    }

    // Binary extended Euclid on packed polynomials (u, v, g1, g2 invariants:
    // a*g1 = u, a*g2 = v mod f).
    fn binary_inv(&self, a: &Fe, w: usize) -> Fe {
        let m = self.degree();
        let len = w + 1;
        let mut u: SmallVec<[u64; 10]> = SmallVec::from_elem(0, len);
        u[..w].copy_from_slice(&a.0);
        let mut v: SmallVec<[u64; 10]> = SmallVec::from_elem(0, len);
        for (i, &c) in self.0.spec.modulus.iter().enumerate() {
            if c == 1 {
                v[i / 64] |= 1 << (i % 64);
            }
        }
        let mut g1: SmallVec<[u64; 10]> = SmallVec::from_elem(0, len);
        g1[0] = 1;
        let mut g2: SmallVec<[u64; 10]> = SmallVec::from_elem(0, len);
        loop {
            let du = bit_degree(&u).expect("u stays nonzero");
            if du == 0 {
                break;
            }
            let dv = bit_degree(&v).expect("v stays nonzero");
            if du < dv {
                std::mem::swap(&mut u, &mut v);
                std::mem::swap(&mut g1, &mut g2);
            }
            let du = bit_degree(&u).unwrap();
            let dv = bit_degree(&v).unwrap();
            let j = du - dv;
            xor_shifted(&mut u, &v, j);
            xor_shifted(&mut g1, &g2, j);
        }
        debug_assert!(bit_degree(&g1).map_or(true, |d| d < m));
        Fe(g1[..w].iter().copied().collect())
    }

    pub fn div(&self, a: &Fe, b: &Fe) -> Result<Fe> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &Fe, mut e: u64) -> Fe {
        let mut result = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        result
    }

    /// Element whose base-`p` digits are its coefficients (ascending).
    pub fn from_index(&self, mut idx: u128) -> Fe {
        let p = self.characteristic() as u128;
        let mut coeffs = Vec::with_capacity(self.degree());
        for _ in 0..self.degree() {
            coeffs.push((idx % p) as u64);
            idx /= p;
        }
        Self::pack(self.characteristic(), self.degree(), &coeffs)
    }

    /// Inverse of [`Field::from_index`]; `None` if the order exceeds `u128`.
    pub fn to_index(&self, a: &Fe) -> Option<u128> {
        self.size()?;
        let p = self.characteristic() as u128;
        let coeffs = self.coefficients(a);
        Some(coeffs.iter().rev().fold(0u128, |acc, &c| acc * p + c as u128))
    }

    /// All field elements in index order. Only for small fields.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        let q = self.size().expect("field too large to enumerate");
        (0..q).map(move |i| self.from_index(i))
    }

    /// Uniform random element.
    pub fn random(&self, rng: &mut SplitMix64) -> Fe {
        match &self.0.kind {
            Kind::Binary { words, .. } => {
                let m = self.degree();
                let mut w: SmallVec<[u64; 8]> = (0..*words).map(|_| rng.next_u64()).collect();
                if m % 64 != 0 {
                    w[words - 1] &= (1u64 << (m % 64)) - 1;
                }
                Fe(w)
            }
            Kind::Odd { p } => Fe((0..self.degree()).map(|_| rng.below(*p)).collect()),
        }
    }

    pub fn random_nonzero(&self, rng: &mut SplitMix64) -> Fe {
        loop {
            let x = self.random(rng);
            if !self.is_zero(&x) {
                return x;
            }
        }
    }

    /// Number of hex digits used for element serialization.
    pub fn hex_digits(&self) -> usize {
        if self.characteristic() == 2 {
            self.degree().div_ceil(4).max(1)
        } else {
            let max = self.size().map(|q| q - 1).unwrap_or(u128::MAX);
            (128 - max.leading_zeros() as usize).div_ceil(4).max(1)
        }
    }

    /// Big-endian hex of the coefficient string (binary) or of the base-`p`
    /// index (odd characteristic), zero-padded to [`Field::hex_digits`].
    pub fn to_hex(&self, a: &Fe) -> String {
        let digits = self.hex_digits();
        if self.characteristic() == 2 {
            words_to_hex(&a.0, digits)
        } else {
            let idx = self.to_index(a).expect("odd field too large for hex encoding");
            format!("{idx:0digits$x}")
        }
    }

    pub fn from_hex(&self, s: &str) -> Result<Fe> {
        let bad = |msg: &str| Error::InvalidField(format!("bad element `{s}`: {msg}"));
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(bad("not a hex string"));
        }
        if self.characteristic() == 2 {
            let words = hex_to_words(s).ok_or_else(|| bad("not a hex string"))?;
            let w = self.width();
            if words[w.min(words.len())..].iter().any(|&x| x != 0) {
                return Err(bad("too many bits"));
            }
            let mut v: SmallVec<[u64; 8]> = SmallVec::from_elem(0, w);
            for (i, x) in words.into_iter().take(w).enumerate() {
                v[i] = x;
            }
            let fe = Fe(v);
            if !self.is_valid(&fe) {
                return Err(bad("degree exceeds field degree"));
            }
            Ok(fe)
        } else {
            let q = self.size().ok_or_else(|| bad("field too large"))?;
            let trimmed = s.trim_start_matches('0');
            if trimmed.len() > 32 {
                return Err(bad("out of range"));
            }
            let idx = if trimmed.is_empty() {
                0
            } else {
                u128::from_str_radix(trimmed, 16).map_err(|_| bad("not a hex string"))?
            };
            if idx >= q {
                return Err(bad("out of range"));
            }
            Ok(self.from_index(idx))
        }
    }
}

impl FieldSpec {
    /// Modulus as hex: the coefficient bitstring for `p = 2`, the base-`p`
    /// integer otherwise.
    pub fn modulus_hex(&self) -> String {
        if self.characteristic == 2 {
            let mut words = vec![0u64; (self.degree + 1).div_ceil(64)];
            for (i, &c) in self.modulus.iter().enumerate() {
                if c == 1 {
                    words[i / 64] |= 1 << (i % 64);
                }
            }
            words_to_hex(&words, (self.degree + 1).div_ceil(4))
        } else {
            let p = self.characteristic as u128;
            let v = self
                .modulus
                .iter()
                .rev()
                .try_fold(0u128, |acc, &c| acc.checked_mul(p)?.checked_add(c as u128))
                .expect("modulus too large for hex encoding");
            format!("{v:x}")
        }
    }

    /// Parses a modulus written by [`FieldSpec::modulus_hex`].
    pub fn modulus_from_hex(p: u64, m: usize, s: &str) -> Result<Vec<u64>> {
        let bad = || Error::InvalidField(format!("bad modulus `{s}`"));
        if p == 2 {
            let words = hex_to_words(s).ok_or_else(bad)?;
            let mut coeffs = vec![0u64; m + 1];
            for (i, c) in coeffs.iter_mut().enumerate() {
                *c = words.get(i / 64).map_or(0, |w| (w >> (i % 64)) & 1);
            }
            for i in m + 1..words.len() * 64 {
                if words[i / 64] >> (i % 64) & 1 == 1 {
                    return Err(bad());
                }
            }
            Ok(coeffs)
        } else {
            let mut v = u128::from_str_radix(s, 16).map_err(|_| bad())?;
            let mut coeffs = Vec::with_capacity(m + 1);
            for _ in 0..=m {
                coeffs.push((v % p as u128) as u64);
                v /= p as u128;
            }
            if v != 0 {
                return Err(bad());
            }
            Ok(coeffs)
        }
    }
}

fn smallest_primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let mut factors = Vec::new();
    let mut n = p - 1;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            factors.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    (2..p)
        .find(|&g| factors.iter().all(|&q| gfp::pow_mod_p(g, (p - 1) / q, p) != 1))
        .expect("primitive root exists")
}

fn smallest_irreducible(p: u64, m: usize) -> Vec<u64> {
    // Enumerate monic polynomials with nonzero constant term in index order.
    let mut idx: u128 = 1;
    loop {
        let mut f = Vec::with_capacity(m + 1);
        let mut t = idx;
        for _ in 0..m {
            f.push((t % p as u128) as u64);
            t /= p as u128;
        }
        f.push(1);
        if t == 0 && f[0] != 0 && gfp::is_irreducible(&f, p) {
            return f;
        }
        idx += 1;
    }
}

fn clmul_table(b: u64) -> [u128; 16] {
    let b = b as u128;
    let mut t = [0u128; 16];
    t[1] = b;
    for i in 2..16 {
        t[i] = if i % 2 == 0 { t[i / 2] << 1 } else { t[i - 1] ^ b };
    }
    t
}

fn clmul_with_table(a: u64, t: &[u128; 16]) -> u128 {
    let mut acc = 0u128;
    for k in (0..16).rev() {
        acc = (acc << 4) ^ t[((a >> (4 * k)) & 15) as usize];
    }
    acc
}

/// Carry-less 64x64 -> 128 multiplication.
pub(crate) fn clmul64(a: u64, b: u64) -> u128 {
    clmul_with_table(a, &clmul_table(b))
}

fn reduce_small(mut prod: u128, modulus: u128, m: usize) -> u64 {
    if prod >> m == 0 {
        return prod as u64;
    }
    let top = 127 - prod.leading_zeros() as usize;
    for bit in (m..=top).rev() {
        if (prod >> bit) & 1 == 1 {
            prod ^= modulus << (bit - m);
        }
    }
    prod as u64
}

fn reduce_multiword(prod: &mut [u64], m: usize, taps: &[usize]) {
    let len = prod.len();
    loop {
        let high = shr_bits(prod, m);
        if high.iter().all(|&w| w == 0) {
            break;
        }
        // clear bits >= m
        let (wi, bi) = (m / 64, m % 64);
        if wi < len {
            prod[wi] &= (1u64 << bi).wrapping_sub(1) & if bi == 0 { 0 } else { u64::MAX };
            for w in prod.iter_mut().skip(wi + 1) {
                *w = 0;
            }
        }
        for &t in taps {
            xor_shifted(prod, &high, t);
        }
    }
}

fn shr_bits(src: &[u64], n: usize) -> SmallVec<[u64; 16]> {
    let (ws, bs) = (n / 64, n % 64);
    let mut out: SmallVec<[u64; 16]> = SmallVec::from_elem(0, src.len());
    for i in 0..src.len().saturating_sub(ws) {
        let lo = src[i + ws] >> bs;
        let hi = if bs > 0 && i + ws + 1 < src.len() {
            src[i + ws + 1] << (64 - bs)
        } else {
            0
        };
        out[i] = lo | hi;
    }
    out
}

/// `dst ^= src << n`, truncated to `dst.len()` words.
fn xor_shifted(dst: &mut [u64], src: &[u64], n: usize) {
    let (ws, bs) = (n / 64, n % 64);
    for (i, &w) in src.iter().enumerate() {
        if w == 0 {
            continue;
        }
        let k = i + ws;
        if k < dst.len() {
            dst[k] ^= w << bs;
        }
        if bs > 0 && k + 1 < dst.len() {
            dst[k + 1] ^= w >> (64 - bs);
        }
    }
}

fn bit_degree(a: &[u64]) -> Option<usize> {
    a.iter()
        .rposition(|&w| w != 0)
        .map(|i| i * 64 + 63 - a[i].leading_zeros() as usize)
}

fn words_to_hex(words: &[u64], digits: usize) -> String {
    let mut s = String::with_capacity(digits);
    for d in (0..digits).rev() {
        let (wi, sh) = (d / 16, (d % 16) * 4);
        let nib = words.get(wi).map_or(0, |w| (w >> sh) & 15);
        s.push(char::from_digit(nib as u32, 16).unwrap());
    }
    s
}

fn hex_to_words(s: &str) -> Option<Vec<u64>> {
    let digits: Vec<u32> = s.chars().map(|c| c.to_digit(16)).collect::<Option<_>>()?;
    let mut words = vec![0u64; digits.len().div_ceil(16)];
    for (pos, &d) in digits.iter().rev().enumerate() {
        words[pos / 16] |= (d as u64) << ((pos % 16) * 4);
    }
    Some(words)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf8() -> Field {
        Field::gf(2, 3).unwrap()
    }

    #[test]
    fn gf8_uses_x3_x_1() {
        assert_eq!(gf8().spec().modulus, vec![1, 1, 0, 1]);
    }

    #[test]
    fn x_times_x_is_x_squared() {
        let f = gf8();
        let x = f.generator();
        assert_eq!(f.mul(&x, &x), f.from_coefficients(&[0, 0, 1]).unwrap());
    }

    #[test]
    fn x_cubed_reduces() {
        let f = gf8();
        assert_eq!(f.pow(&f.generator(), 3), f.from_coefficients(&[1, 1]).unwrap());
    }

    #[test]
    fn inverse_of_x_matches_table_oracle() {
        let f = gf8();
        let x = f.generator();
        // Oracle: search the multiplication table for the element y with x*y = 1.
        let oracle: Vec<Fe> = f.elements().filter(|y| f.is_one(&f.mul(&x, y))).collect();
        assert_eq!(oracle.len(), 1);
        assert_eq!(oracle[0], f.from_coefficients(&[1, 0, 1]).unwrap());
        assert_eq!(f.inv(&x).unwrap(), oracle[0]);
    }

    #[test]
    fn zero_has_no_inverse() {
        let f = gf8();
        assert_eq!(f.inv(&f.zero()), Err(Error::DivisionByZero));
    }

    #[test]
    fn inverses_exhaustive_small_fields() {
        for (p, m) in [(2, 1), (2, 2), (2, 4), (2, 8), (3, 1), (3, 2), (5, 2), (7, 1)] {
            let f = Field::gf(p, m).unwrap();
            for a in f.elements().skip(1) {
                assert!(f.is_one(&f.mul(&a, &f.inv(&a).unwrap())), "GF({p}^{m}) {a:?}");
            }
        }
    }

    #[test]
    fn prime_field_generator_is_primitive() {
        for p in [2u64, 3, 5, 7, 11, 13] {
            let f = Field::gf(p, 1).unwrap();
            let g = f.generator();
            let mut order = 1;
            let mut acc = g.clone();
            while !f.is_one(&acc) {
                acc = f.mul(&acc, &g);
                order += 1;
            }
            assert_eq!(order, p - 1);
        }
    }

    #[test]
    fn multiword_matches_bitwise_reference() {
        // Compare GF(2^163) against a slow shift-and-add reference.
        let f = Field::gf(2, 163).unwrap();
        let mut rng = SplitMix64::new(3);
        for _ in 0..50 {
            let a = f.random(&mut rng);
            let b = f.random(&mut rng);
            let mut acc = f.zero();
            let mut shifted = a.clone();
            let x = f.generator();
            for bit in f.coefficients(&b) {
                if bit == 1 {
                    acc = f.add(&acc, &shifted);
                }
                shifted = f.mul(&shifted, &x);
            }
            assert_eq!(f.mul(&a, &b), acc);
        }
    }

    #[test]
    fn vetted_moduli_are_irreducible() {
        for (m, _) in VETTED_BINARY {
            let f = Field::gf(2, *m).unwrap();
            assert!(gfp::is_irreducible(&f.spec().modulus, 2), "degree {m}");
        }
        assert_eq!(Field::example_field().degree(), 409);
    }

    #[test]
    fn auxiliary_field_is_large() {
        assert!(Field::gf(2, 2).unwrap().auxiliary().log2_size() >= 61.0);
        let aux3 = Field::gf(3, 1).unwrap().auxiliary();
        assert_eq!(aux3.characteristic(), 3);
        assert!(aux3.log2_size() >= 61.0);
    }

    #[test]
    fn hex_round_trip_and_padding() {
        let f = gf8();
        let x = f.generator();
        assert_eq!(f.to_hex(&x), "2");
        assert_eq!(f.from_hex("2").unwrap(), x);
        let big = Field::example_field();
        let h = big.to_hex(&big.one());
        assert_eq!(h.len(), 103);
        assert_eq!(big.from_hex(&h).unwrap(), big.one());
        assert!(f.from_hex("8").is_err());
        assert!(f.from_hex("zz").is_err());
        let f9 = Field::gf(3, 2).unwrap();
        for a in f9.elements() {
            assert_eq!(f9.from_hex(&f9.to_hex(&a)).unwrap(), a);
        }
    }

    #[test]
    fn modulus_hex_round_trip() {
        for f in [gf8(), Field::example_field(), Field::gf(3, 4).unwrap()] {
            let s = f.spec();
            let h = s.modulus_hex();
            let back = FieldSpec::modulus_from_hex(s.characteristic, s.degree, &h).unwrap();
            assert_eq!(back, s.modulus);
        }
        assert_eq!(gf8().spec().modulus_hex(), "b");
    }

    #[test]
    fn rejects_reducible_modulus() {
        assert!(Field::from_modulus(2, vec![1, 0, 0, 1]).is_err());
        assert!(Field::from_modulus(4, vec![1, 1]).is_err());
    }
}
