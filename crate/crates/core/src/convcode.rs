//! Polynomial generator matrices: encoding, degrees, column distances and
//! the MDP test on the sliding generator matrix.
//!
//! Coefficients are stored in ascending time order, `G(z) = Σ G_i z^i`, so
//! that block `t` of a codeword is `v_t = Σ_i G_i m_{t-i}`. The first `n-k`
//! rows of each `G_i` produce the outputs `y`, the last `k` the inputs `u`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::matrix::{combinations, rank, Matrix};
use crate::pattern::{census, BlockPattern, MinorScope};
use crate::poly::{self, Poly, PolyMatrix};
use crate::rng::SplitMix64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyGenerator {
    field: Field,
    n: usize,
    k: usize,
    coeffs: Vec<Matrix>,
}

impl PolyGenerator {
    /// Trailing zero coefficients are dropped. `G(z)` must have full column
    /// rank over `F(z)`.
    pub fn new(field: &Field, n: usize, k: usize, mut coeffs: Vec<Matrix>) -> Result<Self> {
        if k == 0 || n < k {
            return Err(Error::shape(format!("need n >= k >= 1, got n={n} k={k}")));
        }
        if coeffs.iter().any(|g| g.shape() != (n, k)) {
            return Err(Error::shape(format!("generator coefficients must be {n}x{k}")));
        }
        while coeffs.len() > 1 && coeffs.last().is_some_and(|g| g.is_zero(field)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Matrix::zeros(field, n, k));
        }
        let g = Self {
            field: field.clone(),
            n,
            k,
            coeffs,
        };
        if g.maximal_minors().iter().all(Poly::is_zero) {
            return Err(Error::shape("generator matrix lacks full column rank"));
        }
        Ok(g)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Memory μ, the largest coefficient index.
    pub fn mu(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Matrix] {
        &self.coeffs
    }

    /// `G_i`, zero beyond the memory.
    pub fn coeff(&self, i: usize) -> Matrix {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(&self.field, self.n, self.k))
    }

    pub fn poly_matrix(&self) -> PolyMatrix {
        (0..self.n)
            .map(|r| {
                (0..self.k)
                    .map(|c| {
                        let cs = self.coeffs.iter().map(|g| g.get(r, c).clone()).collect();
                        Poly::from_coeffs(&self.field, cs)
                    })
                    .collect()
            })
            .collect()
    }

    /// `G(z)` evaluated at a field element.
    pub fn eval(&self, z: &Fe) -> Matrix {
        let f = &self.field;
        let mut acc = Matrix::zeros(f, self.n, self.k);
        for g in self.coeffs.iter().rev() {
            acc = acc.scale(f, z).add(f, g).expect("same shape");
        }
        acc
    }

    /// Sliding generator matrix: block lower-triangular Toeplitz with
    /// `j + 1` block rows, block `(r, c)` equal to `G_{r-c}`.
    pub fn sliding(&self, j: usize) -> Matrix {
        let mut out = Matrix::zeros(&self.field, self.n * (j + 1), self.k * (j + 1));
        for r in 0..=j {
            for c in 0..=r {
                if let Some(g) = self.coeffs.get(r - c) {
                    out.set_block(r * self.n, c * self.k, g);
                }
            }
        }
        out
    }

    /// All `k x k` minors of `G(z)`, rows in lexicographic order.
    pub fn maximal_minors(&self) -> Vec<Poly> {
        let pm = self.poly_matrix();
        let (degrees, _) = column_degrees_and_reduced(self);
        let bound: usize = degrees.iter().sum();
        combinations(self.n, self.k)
            .map(|rows| {
                let sub: PolyMatrix = rows.iter().map(|&r| pm[r].clone()).collect();
                poly::det(&self.field, &sub, bound)
            })
            .collect()
    }
}

/// `L = ⌊δ/k⌋ + ⌊δ/(n-k)⌋`; the second term is dropped when `n = k`.
pub fn mdp_horizon(n: usize, k: usize, delta: usize) -> usize {
    delta / k + if n > k { delta / (n - k) } else { 0 }
}

/// Encodes `m_0..m_γ` into `v_0..v_{γ+μ}`.
pub fn encode(g: &PolyGenerator, message: &[Vec<Fe>]) -> Result<Vec<Vec<Fe>>> {
    if message.is_empty() {
        return Err(Error::EmptyMessage);
    }
    if let Some(m) = message.iter().find(|m| m.len() != g.k) {
        return Err(Error::shape(format!("message block has {} symbols, expected {}", m.len(), g.k)));
    }
    let f = &g.field;
    let len = message.len() + g.mu();
    let mut out = Vec::with_capacity(len);
    for t in 0..len {
        let mut v = vec![f.zero(); g.n];
        for (i, gi) in g.coeffs.iter().enumerate() {
            if i > t || t - i >= message.len() {
                continue;
            }
            let part = gi.mul_vec(f, &message[t - i])?;
            for (a, b) in v.iter_mut().zip(&part) {
                *a = f.add(a, b);
            }
        }
        out.push(v);
    }
    Ok(out)
}

/// Column degrees and whether the leading column coefficient matrix has
/// full rank.
pub fn column_degrees_and_reduced(g: &PolyGenerator) -> (Vec<usize>, bool) {
    let f = &g.field;
    let degrees: Vec<usize> = (0..g.k)
        .map(|c| {
            (0..g.coeffs.len())
                .rev()
                .find(|&i| (0..g.n).any(|r| !f.is_zero(g.coeffs[i].get(r, c))))
                .unwrap_or(0)
        })
        .collect();
    let lead = Matrix::from_fn(g.n, g.k, |r, c| g.coeffs[degrees[c]].get(r, c).clone());
    let reduced = rank(f, &lead) == g.k;
    (degrees, reduced)
}

/// Degree δ: the largest degree among the `k x k` minors.
pub fn code_degree(g: &PolyGenerator) -> usize {
    g.maximal_minors().iter().filter_map(Poly::degree).max().unwrap_or(0)
}

/// Whether the gcd of the `k x k` minors is a nonzero constant.
pub fn is_noncatastrophic(g: &PolyGenerator) -> bool {
    let f = &g.field;
    let gcd = g.maximal_minors().iter().fold(Poly::zero(), |acc, m| acc.gcd(f, m));
    gcd.degree() == Some(0)
}

/// `d_j^c` by enumerating all `m_0..m_j` with a nonzero first codeword block.
pub fn column_distance_bruteforce(g: &PolyGenerator, j: usize, budget: u128) -> Result<usize> {
    let f = &g.field;
    let dims = (g.k * (j + 1)) as u32;
    let needed = f
        .size()
        .and_then(|q| q.checked_pow(dims))
        .unwrap_or(u128::MAX);
    if needed > budget || needed > u64::MAX as u128 {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let q = f.size().expect("finite by budget check");
    let gc = g.sliding(j);
    let best = (0..needed as u64)
        .into_par_iter()
        .filter_map(|mut idx| {
            let m: Vec<Fe> = (0..dims)
                .map(|_| {
                    let e = f.from_index(idx as u128 % q);
                    idx = (idx as u128 / q) as u64;
                    e
                })
                .collect();
            let v = gc.mul_vec(f, &m).expect("shape");
            if v[..g.n].iter().all(|x| f.is_zero(x)) {
                return None;
            }
            Some(v.iter().filter(|x| !f.is_zero(x)).count())
        })
        .min();
    best.ok_or_else(|| Error::shape("no codeword with a nonzero first block"))
}

/// MDP test: every full-size minor of the sliding matrix `G_L^c` that is
/// not trivially zero must be nonzero.
pub fn mdp_check_minors(g: &PolyGenerator, budget: u128) -> Result<bool> {
    let (degrees, reduced) = column_degrees_and_reduced(g);
    if !reduced {
        return Err(Error::NotReduced);
    }
    let l = mdp_horizon(g.n, g.k, degrees.iter().sum());
    let pattern = BlockPattern::lower_toeplitz(l + 1, g.n, g.k);
    let c = census(&g.field, &pattern, &g.sliding(l), MinorScope::FullSize, budget)?;
    Ok(c.all_nontrivial_nonzero())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeProfile {
    pub n: usize,
    pub k: usize,
    pub delta: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub mu: usize,
    pub column_degrees: Vec<usize>,
    pub column_reduced: bool,
    pub noncatastrophic: bool,
    /// `None` when the code is not column reduced or the minor census is
    /// over budget.
    pub mdp: Option<bool>,
}

pub fn profile(g: &PolyGenerator, budget: u128) -> CodeProfile {
    let (column_degrees, column_reduced) = column_degrees_and_reduced(g);
    let delta = code_degree(g);
    CodeProfile {
        n: g.n,
        k: g.k,
        delta,
        l: mdp_horizon(g.n, g.k, delta),
        mu: g.mu(),
        column_degrees,
        column_reduced,
        noncatastrophic: is_noncatastrophic(g),
        mdp: mdp_check_minors(g, budget).ok(),
    }
}

/// Random generator with the given column degrees: each column's leading
/// coefficient is nonzero. Retries until `G(z)` has full column rank.
pub fn random_generator(
    f: &Field,
    n: usize,
    k: usize,
    degrees: &[usize],
    rng: &mut SplitMix64,
) -> Result<PolyGenerator> {
    if degrees.len() != k {
        return Err(Error::shape("one degree per column required"));
    }
    let mu = degrees.iter().copied().max().unwrap_or(0);
    loop {
        let mut coeffs = vec![Matrix::zeros(f, n, k); mu + 1];
        for (c, &d) in degrees.iter().enumerate() {
            for (i, g) in coeffs.iter_mut().enumerate().take(d + 1) {
                for r in 0..n {
                    g.set(r, c, f.random(rng));
                }
                if i == d && (0..n).all(|r| f.is_zero(g.get(r, c))) {
                    g.set(rng.below(n as u64) as usize, c, f.random_nonzero(rng));
                }
            }
        }
        if let Ok(g) = PolyGenerator::new(f, n, k, coeffs) {
            return Ok(g);
        }
    }
}

/// Seeded search for an MDP code with the given column degrees over
/// GF(2^2), GF(2^3), ... up to GF(2^max_degree).
pub fn search_mdp_code(
    n: usize,
    k: usize,
    degrees: &[usize],
    seed: u64,
    max_degree: usize,
    tries_per_field: usize,
) -> Result<PolyGenerator> {
    let mut rng = SplitMix64::new(seed);
    for m in 2..=max_degree {
        let f = Field::gf(2, m)?;
        for _ in 0..tries_per_field {
            let g = random_generator(&f, n, k, degrees, &mut rng)?;
            let (_, reduced) = column_degrees_and_reduced(&g);
            if reduced && rank(&f, &g.coeffs[0]) == k && mdp_check_minors(&g, u128::MAX)? {
                return Ok(g);
            }
        }
    }
    Err(Error::FieldTooSmall(format!(
        "no MDP ({n},{k}) code with column degrees {degrees:?} up to GF(2^{max_degree})"
    )))
}
