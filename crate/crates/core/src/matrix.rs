//! Dense matrices over a [`Field`] and exact elimination.
//!
//! Elimination picks as pivot the first nonzero entry at or below the current
//! row (lowest row index), which makes multiplication counts reproducible.
//! Multiplications by zero or one are skipped and not counted; an inversion
//! counts as one multiplication.

use crate::error::{Error, Result};
use crate::field::{Fe, Field};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

impl Matrix {
    pub fn zeros(f: &Field, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![f.zero(); rows * cols],
        }
    }

    pub fn identity(f: &Field, n: usize) -> Self {
        let mut m = Self::zeros(f, n, n);
        for i in 0..n {
            m.set(i, i, f.one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut entry: impl FnMut(usize, usize) -> Fe) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(entry(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from rows; `cols` is needed to give empty row lists a width.
    pub fn from_rows(rows: Vec<Vec<Fe>>, cols: usize) -> Result<Self> {
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::shape("ragged rows"));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn column(entries: Vec<Fe>) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &Fe {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Fe) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Fe] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Fe> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Fe>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self, f: &Field) -> bool {
        self.data.iter().all(|x| f.is_zero(x))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Submatrix on the given row and column indices (any order, repeats allowed).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let rows: Vec<usize> = (0..self.rows).collect();
        self.select(&rows, cols)
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.get(i, j).clone());
            }
        }
    }

    pub fn hstack(f: &Field, parts: &[&Matrix]) -> Result<Self> {
        let rows = parts.first().map_or(0, |m| m.rows);
        if parts.iter().any(|m| m.rows != rows) {
            return Err(Error::shape("hstack row mismatch"));
        }
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Self::zeros(f, rows, cols);
        let mut c0 = 0;
        for m in parts {
            out.set_block(0, c0, m);
            c0 += m.cols;
        }
        Ok(out)
    }

    pub fn vstack(f: &Field, parts: &[&Matrix]) -> Result<Self> {
        let cols = parts.first().map_or(0, |m| m.cols);
        if parts.iter().any(|m| m.cols != cols) {
            return Err(Error::shape("vstack column mismatch"));
        }
        let rows = parts.iter().map(|m| m.rows).sum();
        let mut out = Self::zeros(f, rows, cols);
        let mut r0 = 0;
        for m in parts {
            out.set_block(r0, 0, m);
            r0 += m.rows;
        }
        Ok(out)
    }

    pub fn mul(&self, f: &Field, rhs: &Matrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(f, self.rows, rhs.cols);
        for i in 0..self.rows {
            for t in 0..self.cols {
                let a = self.get(i, t);
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(t, j);
                    if !f.is_zero(b) {
                        let idx = i * out.cols + j;
                        out.data[idx] = f.add(&out.data[idx], &f.mul(a, b));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, f: &Field, v: &[Fe]) -> Result<Vec<Fe>> {
        if v.len() != self.cols {
            return Err(Error::shape("vector length mismatch"));
        }
        Ok((0..self.rows)
            .map(|i| dot(f, self.row(i), v))
            .collect())
    }

    pub fn add(&self, f: &Field, rhs: &Matrix) -> Result<Self> {
        self.zip(rhs, |a, b| f.add(a, b))
    }

    pub fn sub(&self, f: &Field, rhs: &Matrix) -> Result<Self> {
        self.zip(rhs, |a, b| f.sub(a, b))
    }

    fn zip(&self, rhs: &Matrix, op: impl Fn(&Fe, &Fe) -> Fe) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::shape("elementwise shape mismatch"));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| op(a, b)).collect(),
        })
    }

    pub fn scale(&self, f: &Field, c: &Fe) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| f.mul(a, c)).collect(),
        }
    }

    pub fn neg(&self, f: &Field) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| f.neg(a)).collect(),
        }
    }

    pub fn pow(&self, f: &Field, e: usize) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::shape("power of non-square matrix"));
        }
        let mut out = Self::identity(f, self.rows);
        for _ in 0..e {
            out = out.mul(f, self)?;
        }
        Ok(out)
    }
}

pub fn dot(f: &Field, a: &[Fe], b: &[Fe]) -> Fe {
    a.iter().zip(b).fold(f.zero(), |acc, (x, y)| {
        if f.is_zero(x) || f.is_zero(y) {
            acc
        } else {
            f.add(&acc, &f.mul(x, y))
        }
    })
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: Matrix,
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Gauss-Jordan elimination restricted to the first `pivot_cols` columns;
/// counts multiplications into `mults`.
fn eliminate(f: &Field, m: &mut Matrix, pivot_cols: usize, mults: &mut u64) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == m.rows {
            break;
        }
        let Some(p) = (r..m.rows).find(|&i| !f.is_zero(m.get(i, c))) else {
            continue;
        };
        if p != r {
            for j in 0..m.cols {
                m.data.swap(p * m.cols + j, r * m.cols + j);
            }
        }
        let pivot = m.get(r, c).clone();
        if !f.is_one(&pivot) {
            let inv = f.inv(&pivot).expect("pivot is nonzero");
            *mults += 1;
            for j in c..m.cols {
                let idx = r * m.cols + j;
                if !f.is_zero(&m.data[idx]) {
                    m.data[idx] = f.mul(&m.data[idx], &inv);
                    *mults += 1;
                }
            }
        }
        for i in 0..m.rows {
            if i == r {
                continue;
            }
            let factor = m.get(i, c).clone();
            if f.is_zero(&factor) {
                continue;
            }
            for j in c..m.cols {
                let pv = &m.data[r * m.cols + j];
                if f.is_zero(pv) {
                    continue;
                }
                let prod = if f.is_one(&factor) {
                    pv.clone()
                } else {
                    *mults += 1;
                    f.mul(&factor, pv)
                };
                let idx = i * m.cols + j;
                m.data[idx] = f.sub(&m.data[idx], &prod);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rref_counted(f: &Field, m: &Matrix, mults: &mut u64) -> Rref {
    let mut work = m.clone();
    let pivots = eliminate(f, &mut work, m.cols, mults);
    Rref {
        matrix: work,
        pivots,
    }
}

pub fn rref(f: &Field, m: &Matrix) -> Rref {
    rref_counted(f, m, &mut 0)
}

pub fn rank(f: &Field, m: &Matrix) -> usize {
    rref(f, m).rank()
}

pub fn rank_counted(f: &Field, m: &Matrix, mults: &mut u64) -> usize {
    rref_counted(f, m, mults).rank()
}

/// Basis of the right kernel `{x : M x = 0}`.
pub fn kernel(f: &Field, m: &Matrix) -> Vec<Vec<Fe>> {
    let r = rref(f, m);
    let free: Vec<usize> = (0..m.cols).filter(|c| !r.pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![f.zero(); m.cols];
            v[fc] = f.one();
            for (row, &pc) in r.pivots.iter().enumerate() {
                v[pc] = f.neg(r.matrix.get(row, fc));
            }
            v
        })
        .collect()
}

/// Status of one unknown after [`solve_determined`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Unknown {
    Determined(Fe),
    Underdetermined,
}

impl Unknown {
    pub fn value(&self) -> Option<&Fe> {
        match self {
            Unknown::Determined(v) => Some(v),
            Unknown::Underdetermined => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOutcome {
    pub unknowns: Vec<Unknown>,
    pub consistent: bool,
    pub mults: u64,
}

impl SolveOutcome {
    pub fn all_determined(&self) -> bool {
        self.unknowns.iter().all(|u| matches!(u, Unknown::Determined(_)))
    }
}

/// Solves `A x = b` and reports, for each unknown, whether its value is the
/// same across all solutions (its unit vector lies in the row space of `A`).
pub fn solve_determined(f: &Field, a: &Matrix, b: &[Fe]) -> Result<SolveOutcome> {
    if a.rows != b.len() {
        return Err(Error::shape(format!(
            "system has {} rows but right-hand side has {}",
            a.rows,
            b.len()
        )));
    }
    let n = a.cols;
    let mut aug = Matrix::zeros(f, a.rows, n + 1);
    aug.set_block(0, 0, a);
    for (i, v) in b.iter().enumerate() {
        aug.set(i, n, v.clone());
    }
    let mut mults = 0;
    let pivots = eliminate(f, &mut aug, n, &mut mults);
    let rank = pivots.len();
    let consistent = (rank..aug.rows).all(|i| f.is_zero(aug.get(i, n)));
    let mut unknowns = vec![Unknown::Underdetermined; n];
    if consistent {
        for (row, &pc) in pivots.iter().enumerate() {
            let alone = (0..n).all(|c| c == pc || f.is_zero(aug.get(row, c)));
            if alone {
                unknowns[pc] = Unknown::Determined(aug.get(row, n).clone());
            }
        }
    }
    Ok(SolveOutcome {
        unknowns,
        consistent,
        mults,
    })
}

/// Determinant by elimination with first-nonzero pivoting.
pub fn det(f: &Field, m: &Matrix) -> Result<Fe> {
    if m.rows != m.cols {
        return Err(Error::shape("determinant of non-square matrix"));
    }
    Ok(det_square(f, m.clone()))
}

fn det_square(f: &Field, mut m: Matrix) -> Fe {
    let n = m.rows;
    let mut acc = f.one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !f.is_zero(m.get(i, c))) else {
            return f.zero();
        };
        if p != c {
            for j in 0..n {
                m.data.swap(p * n + j, c * n + j);
            }
            acc = f.neg(&acc);
        }
        let pivot = m.get(c, c).clone();
        acc = f.mul(&acc, &pivot);
        let inv = f.inv(&pivot).expect("pivot is nonzero");
        for i in c + 1..n {
            let factor = m.get(i, c).clone();
            if f.is_zero(&factor) {
                continue;
            }
            let factor = f.mul(&factor, &inv);
            for j in c + 1..n {
                let pv = m.get(c, j);
                if !f.is_zero(pv) {
                    let idx = i * n + j;
                    m.data[idx] = f.sub(&m.data[idx], &f.mul(&factor, pv));
                }
            }
        }
    }
    acc
}

/// Determinant of the submatrix on strictly increasing `rows` x `cols`.
pub fn minor(f: &Field, m: &Matrix, rows: &[usize], cols: &[usize]) -> Result<Fe> {
    check_indices(rows, m.rows, "row")?;
    check_indices(cols, m.cols, "column")?;
    if rows.len() != cols.len() {
        return Err(Error::Index(format!(
            "{} row indices but {} column indices",
            rows.len(),
            cols.len()
        )));
    }
    Ok(det_square(f, m.select(rows, cols)))
}

fn check_indices(idx: &[usize], bound: usize, what: &str) -> Result<()> {
    if idx.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Index(format!("{what} indices not strictly increasing")));
    }
    if let Some(&last) = idx.last() {
        if last >= bound {
            return Err(Error::Index(format!("{what} index {last} out of range {bound}")));
        }
    }
    Ok(())
}

pub fn inverse(f: &Field, m: &Matrix) -> Result<Matrix> {
    if m.rows != m.cols {
        return Err(Error::shape("inverse of non-square matrix"));
    }
    let n = m.rows;
    let aug = Matrix::hstack(f, &[m, &Matrix::identity(f, n)])?;
    let mut work = aug;
    let pivots = eliminate(f, &mut work, n, &mut 0);
    if pivots.len() != n {
        return Err(Error::DivisionByZero);
    }
    Ok(work.block(0, n, n, n))
}

/// Iterator over all strictly increasing `k`-subsets of `0..n`.
pub fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = (k <= n).then(|| (0..k).collect());
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let c = cur.as_mut().unwrap();
        let mut i = k;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if c[i] < n - k + i {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}
