//! Dense polynomials over the prime field GF(p), one coefficient per word,
//! ascending powers. Used for modulus validation and odd-characteristic
//! inversion; not on any hot path for binary fields.

pub(crate) fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub(crate) fn degree(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub(crate) fn mul_mod_p(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn inv_mod_p(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    pow_mod_p(a, p - 2, p)
}

pub(crate) fn pow_mod_p(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod_p(r, a, p);
        }
        a = mul_mod_p(a, a, p);
        e >>= 1;
    }
    r
}

pub(crate) fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        out.push((x + p - y) % p);
    }
    trim(&mut out);
    out
}

pub(crate) fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod_p(x, y, p)) % p;
        }
    }
    trim(&mut out);
    out
}

/// Returns (quotient, remainder). `b` must be nonzero.
pub(crate) fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let db = degree(b).expect("division by zero polynomial");
    let lead_inv = inv_mod_p(b[db], p);
    let mut r: Vec<u64> = a.to_vec();
    trim(&mut r);
    let mut q = vec![0u64; r.len().saturating_sub(db).max(1)];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = mul_mod_p(r[dr], lead_inv, p);
        let shift = dr - db;
        q[shift] = c;
        for i in 0..=db {
            let t = mul_mod_p(c, b[i], p);
            r[shift + i] = (r[shift + i] + p - t) % p;
        }
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

pub(crate) fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    divrem(a, b, p).1
}

pub(crate) fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

/// Inverse of `a` modulo `f` via the extended Euclidean algorithm.
/// Returns `None` when `gcd(a, f) != 1`.
pub(crate) fn inv_mod_poly(a: &[u64], f: &[u64], p: u64) -> Option<Vec<u64>> {
    let mut r0 = f.to_vec();
    let mut r1 = rem(a, f, p);
    let mut s0: Vec<u64> = Vec::new();
    let mut s1: Vec<u64> = vec![1];
    trim(&mut r0);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p);
        let s = sub(&s0, &mul(&q, &s1, p), p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    if degree(&r0) != Some(0) {
        return None;
    }
    let c = inv_mod_p(r0[0], p);
    let mut out: Vec<u64> = s0.iter().map(|&x| mul_mod_p(x, c, p)).collect();
    trim(&mut out);
    Some(out)
}

fn mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    rem(&mul(a, b, p), f, p)
}

fn powmod(base: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut b = rem(base, f, p);
    while e > 0 {
        if e & 1 == 1 {
            result = mulmod(&result, &b, f, p);
        }
        e >>= 1;
        if e > 0 {
            b = mulmod(&b, &b, f, p);
        }
    }
    result
}

/// Ben-Or irreducibility test: `f` of degree `m` is irreducible over GF(p)
/// iff `gcd(f, x^(p^i) - x) = 1` for every `1 <= i <= m/2`.
pub(crate) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let m = match degree(f) {
        Some(d) => d,
        None => return false,
    };
    if m == 0 {
        return false;
    }
    if m == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    let mut xp = x.clone();
    for _ in 1..=m / 2 {
        xp = powmod(&xp, p, f, p);
        let g = gcd(f, &sub(&xp, &x, p), p);
        if degree(&g) != Some(0) {
            return false;
        }
    }
    true
}

pub(crate) fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
