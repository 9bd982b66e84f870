//! Univariate polynomials over a [`Field`] and determinants of polynomial
//! matrices.

use crate::error::{Error, Result};
use crate::field::{Fe, Field};

/// Polynomial with ascending coefficients, trimmed so the last one is nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    coeffs: Vec<Fe>,
}

impl Poly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(f: &Field, c: Fe) -> Self {
        Self::from_coeffs(f, vec![c])
    }

    pub fn from_coeffs(f: &Field, mut coeffs: Vec<Fe>) -> Self {
        while coeffs.last().is_some_and(|c| f.is_zero(c)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// `z - root`
    pub fn linear(f: &Field, root: &Fe) -> Self {
        Self::from_coeffs(f, vec![f.neg(root), f.one()])
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn coeff(&self, f: &Field, i: usize) -> Fe {
        self.coeffs.get(i).cloned().unwrap_or_else(|| f.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, f: &Field, x: &Fe) -> Fe {
        self.coeffs
            .iter()
            .rev()
            .fold(f.zero(), |acc, c| f.add(&f.mul(&acc, x), c))
    }

    pub fn add(&self, f: &Field, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::from_coeffs(f, (0..n).map(|i| f.add(&self.coeff(f, i), &o.coeff(f, i))).collect())
    }

    pub fn sub(&self, f: &Field, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::from_coeffs(f, (0..n).map(|i| f.sub(&self.coeff(f, i), &o.coeff(f, i))).collect())
    }

    pub fn neg(&self, f: &Field) -> Poly {
        Self::from_coeffs(f, self.coeffs.iter().map(|c| f.neg(c)).collect())
    }

    pub fn scale(&self, f: &Field, c: &Fe) -> Poly {
        Self::from_coeffs(f, self.coeffs.iter().map(|x| f.mul(x, c)).collect())
    }

    pub fn mul(&self, f: &Field, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![f.zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if f.is_zero(a) {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !f.is_zero(b) {
                    out[i + j] = f.add(&out[i + j], &f.mul(a, b));
                }
            }
        }
        Self::from_coeffs(f, out)
    }

    pub fn divrem(&self, f: &Field, d: &Poly) -> Result<(Poly, Poly)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let lead_inv = f.inv(&d.coeffs[dd])?;
        let mut r = self.coeffs.clone();
        let mut q = vec![f.zero(); r.len().saturating_sub(dd)];
        while r.len() > dd {
            let top = r.len() - 1;
            let c = f.mul(&r[top], &lead_inv);
            let shift = top - dd;
            for (i, dc) in d.coeffs.iter().enumerate() {
                r[shift + i] = f.sub(&r[shift + i], &f.mul(&c, dc));
            }
            q[shift] = c;
            while r.last().is_some_and(|x| f.is_zero(x)) {
                r.pop();
            }
        }
        Ok((Self::from_coeffs(f, q), Self::from_coeffs(f, r)))
    }

    pub fn monic(&self, f: &Field) -> Poly {
        match self.coeffs.last() {
            None => Poly::zero(),
            Some(lead) => self.scale(f, &f.inv(lead).expect("nonzero leading coefficient")),
        }
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, f: &Field, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(f, &b).expect("nonzero divisor").1;
            a = b;
            b = r;
        }
        a.monic(f)
    }
}

/// Square polynomial matrix as row vectors.
pub type PolyMatrix = Vec<Vec<Poly>>;

/// Determinant by fraction-free (Bareiss) elimination over F[z].
pub fn det_bareiss(f: &Field, m: &PolyMatrix) -> Poly {
    let n = m.len();
    if n == 0 {
        return Poly::constant(f, f.one());
    }
    let mut a = m.clone();
    let mut negate = false;
    let mut prev = Poly::constant(f, f.one());
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return Poly::zero();
            };
            a.swap(k, p);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j].mul(f, &a[k][k]).sub(f, &a[i][k].mul(f, &a[k][j]));
                let (q, r) = num.divrem(f, &prev).expect("previous pivot nonzero");
                debug_assert!(r.is_zero(), "Bareiss division must be exact");
                a[i][j] = q;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        d.neg(f)
    } else {
        d
    }
}

/// Lagrange interpolation through `(x_i, y_i)` with distinct abscissae.
pub fn interpolate(f: &Field, points: &[(Fe, Fe)]) -> Poly {
    let mut acc = Poly::zero();
    for (i, (xi, yi)) in points.iter().enumerate() {
        if f.is_zero(yi) {
            continue;
        }
        let mut basis = Poly::constant(f, f.one());
        let mut denom = f.one();
        for (j, (xj, _)) in points.iter().enumerate() {
            if i != j {
                basis = basis.mul(f, &Poly::linear(f, xj));
                denom = f.mul(&denom, &f.sub(xi, xj));
            }
        }
        let c = f.div(yi, &denom).expect("distinct abscissae");
        acc = acc.add(f, &basis.scale(f, &c));
    }
    acc
}

/// Determinant via evaluation at `degree_bound + 1` field points and
/// interpolation. `None` when the field has too few elements.
pub fn det_interpolate(f: &Field, m: &PolyMatrix, degree_bound: usize) -> Option<Poly> {
    let needed = degree_bound as u128 + 1;
    if f.size().is_some_and(|q| q < needed) {
        return None;
    }
    let n = m.len();
    let points: Vec<(Fe, Fe)> = (0..needed)
        .map(|t| {
            let x = f.from_index(t);
            let eval = crate::matrix::Matrix::from_fn(n, n, |i, j| m[i][j].eval(f, &x));
            let d = crate::matrix::det(f, &eval).expect("square");
            (x, d)
        })
        .collect();
    Some(interpolate(f, &points))
}

/// Determinant, by interpolation when the field is large enough for the
/// given degree bound, by fraction-free elimination otherwise.
pub fn det(f: &Field, m: &PolyMatrix, degree_bound: usize) -> Poly {
    det_interpolate(f, m, degree_bound).unwrap_or_else(|| det_bareiss(f, m))
}
