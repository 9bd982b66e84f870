//! Input-state-output representations `x_{t+1} = A x_t + B u_t`,
//! `y_t = C x_t + D u_t` of convolutional codes.
//!
//! Codewords are the trajectories `v_t = (y_t, u_t)` started from `x_0 = 0`
//! whose state eventually returns to zero. Outputs come first in every
//! block, inputs last.

use serde::{Deserialize, Serialize};

use crate::convcode::{code_degree, column_degrees_and_reduced, mdp_horizon, PolyGenerator};
use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::matrix::{binomial, combinations, inverse, kernel, rank, Matrix};
use crate::pattern::{census, BlockPattern, MinorScope};
use crate::rng::SplitMix64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSpace {
    field: Field,
    n: usize,
    k: usize,
    s: usize,
    a: Matrix,
    b: Matrix,
    c: Matrix,
    d: Matrix,
}

impl StateSpace {
    pub fn new(field: &Field, a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        let s = a.rows();
        let (p, k) = d.shape();
        if k == 0 {
            return Err(Error::shape("system needs at least one input"));
        }
        if a.cols() != s || b.shape() != (s, k) || c.shape() != (p, s) {
            return Err(Error::shape(format!(
                "inconsistent shapes A {:?}, B {:?}, C {:?}, D {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        Ok(Self {
            field: field.clone(),
            n: p + k,
            k,
            s,
            a,
            b,
            c,
            d,
        })
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

    /// Number of outputs, `n - k`.
    pub fn p(&self) -> usize {
        self.n - self.k
    }

    /// State dimension.
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    pub fn d(&self) -> &Matrix {
        &self.d
    }

    /// One time step: returns `(x_{t+1}, y_t)`.
    pub fn step(&self, x: &[Fe], u: &[Fe]) -> Result<(Vec<Fe>, Vec<Fe>)> {
        let f = &self.field;
        let ax = self.a.mul_vec(f, x)?;
        let bu = self.b.mul_vec(f, u)?;
        let cx = self.c.mul_vec(f, x)?;
        let du = self.d.mul_vec(f, u)?;
        let next = ax.iter().zip(&bu).map(|(p, q)| f.add(p, q)).collect();
        let y = cx.iter().zip(&du).map(|(p, q)| f.add(p, q)).collect();
        Ok((next, y))
    }

    pub fn zero_state(&self) -> Vec<Fe> {
        vec![self.field.zero(); self.s]
    }
}

/// Runs the system from `x0`. Returns the states `x_0..x_{T+1}` and the
/// outputs `y_0..y_T`.
pub fn simulate(sys: &StateSpace, x0: &[Fe], inputs: &[Vec<Fe>]) -> Result<(Vec<Vec<Fe>>, Vec<Vec<Fe>>)> {
    if x0.len() != sys.s {
        return Err(Error::shape("initial state has wrong length"));
    }
    let mut states = vec![x0.to_vec()];
    let mut outputs = Vec::with_capacity(inputs.len());
    for u in inputs {
        if u.len() != sys.k {
            return Err(Error::shape("input has wrong length"));
        }
        let (next, y) = sys.step(states.last().expect("nonempty"), u)?;
        states.push(next);
        outputs.push(y);
    }
    Ok((states, outputs))
}

/// `[B, AB, ..., A^{s-1}B]`.
pub fn reachability_matrix(sys: &StateSpace) -> Matrix {
    let f = &sys.field;
    let mut blocks = Vec::with_capacity(sys.s);
    let mut cur = sys.b.clone();
    for _ in 0..sys.s {
        let next = sys.a.mul(f, &cur).expect("shape");
        blocks.push(std::mem::replace(&mut cur, next));
    }
    if blocks.is_empty() {
        return Matrix::zeros(f, 0, 0);
    }
    Matrix::hstack(f, &blocks.iter().collect::<Vec<_>>()).expect("shape")
}

/// `[C; CA; ...; CA^j]`.
pub fn observability_stack(sys: &StateSpace, j: usize) -> Matrix {
    let f = &sys.field;
    let mut blocks = Vec::with_capacity(j + 1);
    let mut cur = sys.c.clone();
    for _ in 0..=j {
        let next = cur.mul(f, &sys.a).expect("shape");
        blocks.push(std::mem::replace(&mut cur, next));
    }
    Matrix::vstack(f, &blocks.iter().collect::<Vec<_>>()).expect("shape")
}

pub fn kalman_reachable(sys: &StateSpace) -> bool {
    sys.s == 0 || rank(&sys.field, &reachability_matrix(sys)) == sys.s
}

pub fn kalman_observable(sys: &StateSpace) -> bool {
    sys.s == 0 || rank(&sys.field, &observability_stack(sys, sys.s - 1)) == sys.s
}

/// A system with independently uniform entries.
pub fn random_system(f: &Field, n: usize, k: usize, s: usize, rng: &mut SplitMix64) -> Result<StateSpace> {
    if k == 0 || n <= k {
        return Err(Error::shape(format!("need 0 < k < n, got n = {n}, k = {k}")));
    }
    let mut r = |rows, cols| Matrix::from_fn(rows, cols, |_, _| f.random(rng));
    let (a, b, c, d) = (r(s, s), r(s, k), r(n - k, s), r(n - k, k));
    StateSpace::new(f, a, b, c, d)
}

/// Whether `v_0..v_N` (each `(y_t, u_t)`) is a trajectory of the system
/// from the zero state. With `terminated`, the word extended by zero blocks
/// must also be a trajectory whose state dies out, i.e. a full codeword.
pub fn membership_check(sys: &StateSpace, blocks: &[Vec<Fe>], terminated: bool) -> bool {
    let f = &sys.field;
    let p = sys.p();
    let mut x = sys.zero_state();
    for v in blocks {
        if v.len() != sys.n {
            return false;
        }
        let Ok((next, y)) = sys.step(&x, &v[p..]) else {
            return false;
        };
        if y != v[..p] {
            return false;
        }
        x = next;
    }
    if !terminated {
        return true;
    }
    for _ in 0..sys.s.max(1) {
        let y = sys.c.mul_vec(f, &x).expect("shape");
        if y.iter().any(|e| !f.is_zero(e)) {
            return false;
        }
        x = sys.a.mul_vec(f, &x).expect("shape");
    }
    x.iter().all(|e| f.is_zero(e))
}

/// Controller-form realization of a column reduced generator whose input
/// rows of `G_0` are invertible. The state holds, per column `c`, the last
/// `δ_c` message symbols `m_{c,t-1}, ..., m_{c,t-δ_c}`.
pub fn realize(g: &PolyGenerator) -> Result<StateSpace> {
    let f = g.field();
    let (n, k) = (g.n(), g.k());
    let p = n - k;
    let (degrees, reduced) = column_degrees_and_reduced(g);
    if !reduced {
        return Err(Error::NotReduced);
    }
    let g0 = g.coeff(0);
    let rows_y: Vec<usize> = (0..p).collect();
    let rows_u: Vec<usize> = (p..n).collect();
    let all_cols: Vec<usize> = (0..k).collect();
    let u0 = g0.select(&rows_u, &all_cols);
    let y0 = g0.select(&rows_y, &all_cols);
    let u0_inv = inverse(f, &u0)
        .map_err(|_| Error::NotRealizable("input rows of G_0 are singular".into()))?;

    let s: usize = degrees.iter().sum();
    let offsets: Vec<usize> = degrees
        .iter()
        .scan(0, |acc, &d| {
            let o = *acc;
            *acc += d;
            Some(o)
        })
        .collect();
    // P, Q: contributions of the stored messages to u_t and y_t.
    // S: shift within each column's register; E: feeds m_t into it.
    let mut pm = Matrix::zeros(f, k, s);
    let mut qm = Matrix::zeros(f, p, s);
    let mut shift = Matrix::zeros(f, s, s);
    let mut feed = Matrix::zeros(f, s, k);
    for c in 0..k {
        let o = offsets[c];
        for i in 1..=degrees[c] {
            let gi = g.coeff(i);
            for r in 0..p {
                qm.set(r, o + i - 1, gi.get(r, c).clone());
            }
            for r in 0..k {
                pm.set(r, o + i - 1, gi.get(p + r, c).clone());
            }
            if i >= 2 {
                shift.set(o + i - 1, o + i - 2, f.one());
            }
        }
        if degrees[c] > 0 {
            feed.set(o, c, f.one());
        }
    }
    let u0_inv_p = u0_inv.mul(f, &pm)?;
    let a = shift.sub(f, &feed.mul(f, &u0_inv_p)?)?;
    let b = feed.mul(f, &u0_inv)?;
    let c = qm.sub(f, &y0.mul(f, &u0_inv_p)?)?;
    let d = y0.mul(f, &u0_inv)?;
    StateSpace::new(f, a, b, c, d)
}

/// A minimal polynomial basis of the code, columns ordered by decreasing
/// degree. Degree-`d` basis vectors are found among input sequences
/// `u_0..u_d` that drive the state from zero back to zero
/// (`A^d B u_0 + ... + B u_d = 0`), beyond the span of shifts of the
/// vectors already chosen.
pub fn generator_of(sys: &StateSpace) -> Result<PolyGenerator> {
    let f = &sys.field;
    let k = sys.k;
    let mut chosen: Vec<Vec<Vec<Fe>>> = Vec::new();
    let mut powers_b = vec![sys.b.clone()];
    for d in 0..=sys.s {
        if chosen.len() == k {
            break;
        }
        if d > 0 {
            let next = sys.a.mul(f, powers_b.last().expect("nonempty"))?;
            powers_b.push(next);
        }
        // Columns for u_0..u_d: A^d B, ..., B.
        let blocks: Vec<&Matrix> = (0..=d).map(|i| &powers_b[d - i]).collect();
        let m = if sys.s == 0 {
            Matrix::zeros(f, 0, k * (d + 1))
        } else {
            Matrix::hstack(f, &blocks)?
        };
        let mut span: Vec<Vec<Fe>> = Vec::new();
        for g in &chosen {
            for e in 0..=(d + 1 - g.len()) {
                let mut v = vec![f.zero(); k * e];
                v.extend(g.iter().flatten().cloned());
                v.resize(k * (d + 1), f.zero());
                span.push(v);
            }
        }
        let mut current = rank_of_rows(f, &span, k * (d + 1));
        for cand in kernel(f, &m) {
            span.push(cand.clone());
            let r = rank_of_rows(f, &span, k * (d + 1));
            if r > current {
                current = r;
                chosen.push(cand.chunks(k).map(<[Fe]>::to_vec).collect());
                if chosen.len() == k {
                    break;
                }
            } else {
                span.pop();
            }
        }
    }
    if chosen.len() < k {
        return Err(Error::DegreeBound(format!(
            "found {} of {} basis vectors up to degree {}",
            chosen.len(),
            k,
            sys.s
        )));
    }
    chosen.sort_by_key(|g| std::cmp::Reverse(g.len()));
    let mu = chosen.iter().map(Vec::len).max().unwrap_or(1) - 1;
    let mut coeffs = vec![Matrix::zeros(f, sys.n, k); mu + 1];
    for (col, useq) in chosen.iter().enumerate() {
        let (_, ys) = simulate(sys, &sys.zero_state(), useq)?;
        for (t, (y, u)) in ys.iter().zip(useq).enumerate() {
            for (r, e) in y.iter().chain(u).enumerate() {
                coeffs[t].set(r, col, e.clone());
            }
        }
    }
    PolyGenerator::new(f, sys.n, k, coeffs)
}

fn rank_of_rows(f: &Field, rows: &[Vec<Fe>], cols: usize) -> usize {
    if rows.is_empty() {
        return 0;
    }
    rank(f, &Matrix::from_rows(rows.to_vec(), cols).expect("uniform rows"))
}

/// Code degree of the system's code: `s` for reachable systems.
pub fn system_degree(sys: &StateSpace) -> Result<usize> {
    if kalman_reachable(sys) {
        Ok(sys.s)
    } else {
        Ok(code_degree(&generator_of(sys)?))
    }
}

/// Matrices the decoder reuses within one session.
#[derive(Clone, Debug)]
pub struct StructuralCache {
    f_mats: Vec<Matrix>,
    obs: Vec<Matrix>,
    r: Vec<Matrix>,
    ell: isize,
    a_pow: Vec<Matrix>,
}

impl StructuralCache {
    /// Block lower-triangular Toeplitz matrix with `D` on the diagonal and
    /// `C A^{t-1} B` on the `t`-th subdiagonal, `j + 1` blocks square.
    pub fn f(&self, j: usize) -> &Matrix {
        &self.f_mats[j]
    }

    /// `[C; CA; ...; CA^j]`.
    pub fn obs(&self, j: usize) -> &Matrix {
        &self.obs[j]
    }

    /// `R_l = [A^{l-1}B ... B]` for `l >= 1`.
    pub fn r(&self, l: usize) -> Option<&Matrix> {
        l.checked_sub(1).and_then(|i| self.r.get(i))
    }

    /// Largest `l` with `R_l` of full column rank, `-1` when `B` is not.
    pub fn ell(&self) -> isize {
        self.ell
    }

    pub fn a_pow(&self, t: usize) -> &Matrix {
        &self.a_pow[t]
    }

    pub fn t_max(&self) -> usize {
        self.f_mats.len() - 1
    }
}

/// Termination constraints `E_w u = 0` for a frame of `horizon + 1` blocks.
#[derive(Clone, Debug)]
pub struct TerminationMatrix {
    horizon: usize,
    k: usize,
    e: Vec<Matrix>,
}

impl TerminationMatrix {
    /// `E_w`; block `(r, j)` is `C A^{horizon + r - j} B`.
    pub fn e(&self, w: usize) -> &Matrix {
        &self.e[w]
    }

    /// Number of available `w`, i.e. `w = 0..depth()`.
    pub fn depth(&self) -> usize {
        self.e.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Column of `E_w` multiplying component `comp` of `u_block`.
    pub fn column(&self, block: usize, comp: usize) -> usize {
        block * self.k + comp
    }
}

/// Builds `F_0..F_T`, the observability stacks up to `CA^T`, `R_1..R_s`,
/// `ℓ`, powers of `A` up to `horizon + 1`, and `E_w` for
/// `w = 0..max(s, 1) - 1`, where `horizon = γ + μ` is the last block index.
pub fn build_structurals(sys: &StateSpace, t: usize, horizon: usize) -> (StructuralCache, TerminationMatrix) {
    let f = &sys.field;
    let (p, k, s) = (sys.p(), sys.k, sys.s);
    let depth = s.max(1);
    let top = (horizon + depth).max(t) + 1;
    let mut a_pow = vec![Matrix::identity(f, s)];
    for i in 1..=top {
        let next = a_pow[i - 1].mul(f, &sys.a).expect("square");
        a_pow.push(next);
    }
    // markov[t] = C A^t B
    let markov: Vec<Matrix> = (0..=top)
        .map(|i| sys.c.mul(f, &a_pow[i]).and_then(|m| m.mul(f, &sys.b)).expect("shape"))
        .collect();
    let block = |i: usize| -> Matrix {
        if i == 0 {
            sys.d.clone()
        } else {
            markov[i - 1].clone()
        }
    };
    let f_mats = (0..=t)
        .map(|j| {
            let mut m = Matrix::zeros(f, p * (j + 1), k * (j + 1));
            for r in 0..=j {
                for c in 0..=r {
                    m.set_block(r * p, c * k, &block(r - c));
                }
            }
            m
        })
        .collect();
    let obs = (0..=t).map(|j| observability_stack(sys, j)).collect();
    let mut r = Vec::new();
    for l in 1..=s.max(1) {
        let blocks: Vec<Matrix> = (0..l)
            .map(|i| a_pow[l - 1 - i].mul(f, &sys.b).expect("shape"))
            .collect();
        r.push(Matrix::hstack(f, &blocks.iter().collect::<Vec<_>>()).expect("shape"));
    }
    let ell = if s == 0 || rank(f, &sys.b) < k {
        -1
    } else {
        r.iter()
            .enumerate()
            .take_while(|(_, m)| rank(f, m) == m.cols())
            .map(|(i, _)| i as isize + 1)
            .last()
            .unwrap_or(-1)
    };
    let e = (0..depth)
        .map(|w| {
            let mut m = Matrix::zeros(f, p * (w + 1), k * (horizon + 1));
            for row in 0..=w {
                for j in 0..=horizon {
                    m.set_block(row * p, j * k, &markov[horizon + row - j]);
                }
            }
            m
        })
        .collect();
    (
        StructuralCache {
            f_mats,
            obs,
            r,
            ell,
            a_pow,
        },
        TerminationMatrix { horizon, k, e },
    )
}

/// Pattern of `F_j`: free blocks `D, CB, CAB, ...` on the diagonals.
pub fn f_pattern(sys: &StateSpace, j: usize) -> BlockPattern {
    BlockPattern::lower_toeplitz(j + 1, sys.p(), sys.k)
}

/// Pattern of `[C; ...; CA^j | F_j]` with independent free blocks `CA^r`.
pub fn obs_f_pattern(sys: &StateSpace, j: usize) -> BlockPattern {
    let f = f_pattern(sys, j);
    if sys.s == 0 {
        return f;
    }
    let obs = BlockPattern::new(
        vec![sys.p(); j + 1],
        vec![sys.s],
        (0..=j).map(|r| vec![Some(r)]).collect(),
    )
    .expect("consistent");
    obs.beside(&f).expect("same rows")
}

/// MDP test: every minor of `F_L` that is not trivially zero is nonzero.
pub fn is_mdp_system(sys: &StateSpace, budget: u128) -> Result<bool> {
    let delta = system_degree(sys)?;
    let l = mdp_horizon(sys.n, sys.k, delta);
    let (cache, _) = build_structurals(sys, l, 0);
    let c = census(&sys.field, &f_pattern(sys, l), cache.f(l), MinorScope::All, budget)?;
    Ok(c.all_nontrivial_nonzero())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerminationQuality {
    pub w_max: usize,
    pub subsets: u64,
    pub independent: u64,
    pub exhaustive: bool,
}

impl TerminationQuality {
    pub fn fraction(&self) -> f64 {
        if self.subsets == 0 {
            1.0
        } else {
            self.independent as f64 / self.subsets as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub t: usize,
    pub gamma: usize,
    /// Entry `j - 1`: nontrivial minors of `F_j` nonzero; `None` over budget.
    pub property1: Vec<Option<bool>>,
    /// Entry `j - 1`: nontrivial minors of `[C; ...; CA^j | F_j]` nonzero.
    pub property2: Vec<Option<bool>>,
    pub termination: TerminationQuality,
    pub ell: isize,
}

/// Scores the four decoder-friendliness properties. Column subsets of the
/// termination matrix are independent for some `w <= δ-1` exactly when
/// they are independent in the largest `E_w`, which is what is counted.
pub fn quality_report(sys: &StateSpace, t: usize, gamma: usize, budget: u128) -> Result<QualityReport> {
    let f = &sys.field;
    let mu = generator_of(sys)?.mu();
    let horizon = gamma + mu;
    let (cache, term) = build_structurals(sys, t, horizon);
    let mut property1 = Vec::new();
    let mut property2 = Vec::new();
    for j in 1..=t {
        let c1 = census(f, &f_pattern(sys, j), cache.f(j), MinorScope::All, budget);
        property1.push(c1.ok().map(|c| c.all_nontrivial_nonzero()));
        let m = if sys.s == 0 {
            cache.f(j).clone()
        } else {
            Matrix::hstack(f, &[cache.obs(j), cache.f(j)])?
        };
        let c2 = census(f, &obs_f_pattern(sys, j), &m, MinorScope::All, budget);
        property2.push(c2.ok().map(|c| c.all_nontrivial_nonzero()));
    }
    let w_max = term.depth() - 1;
    let e = term.e(w_max);
    let max_size = e.rows().min(e.cols());
    let total: u128 = (1..=max_size).map(|r| binomial(e.cols(), r)).sum();
    let mut termination = TerminationQuality {
        w_max,
        subsets: 0,
        independent: 0,
        exhaustive: total <= budget,
    };
    let mut tally = |cols: &[usize]| {
        termination.subsets += 1;
        if rank(f, &e.select_cols(cols)) == cols.len() {
            termination.independent += 1;
        }
    };
    if total <= budget {
        for size in 1..=max_size {
            for cols in combinations(e.cols(), size) {
                tally(&cols);
            }
        }
    } else {
        let mut rng = SplitMix64::new(0x7465_726d);
        for _ in 0..budget {
            let size = 1 + rng.below(max_size as u64) as usize;
            let mut pool: Vec<usize> = (0..e.cols()).collect();
            for i in 0..size {
                let j = i + rng.below((pool.len() - i) as u64) as usize;
                pool.swap(i, j);
            }
            let mut cols = pool[..size].to_vec();
            cols.sort_unstable();
            tally(&cols);
        }
    }
    Ok(QualityReport {
        t,
        gamma,
        property1,
        property2,
        termination,
        ell: cache.ell(),
    })
}

/// Entries of the example's 4x8 matrix `[C D 0; CA CB D]` as powers of `a`;
/// `None` marks the structural zeros.
pub const EXAMPLE_EXPONENTS: [[Option<u64>; 8]; 4] = [
    [Some(8), Some(16), Some(1), Some(2), Some(4), None, None, None],
    [Some(16), Some(32), Some(2), Some(4), Some(8), None, None, None],
    [Some(64), Some(128), Some(8), Some(16), Some(32), Some(1), Some(2), Some(4)],
    [Some(128), Some(256), Some(16), Some(32), Some(64), Some(2), Some(4), Some(8)],
];

/// The example's superregular matrix evaluated at `a`.
pub fn example_superregular(f: &Field, a: &Fe) -> Matrix {
    Matrix::from_fn(4, 8, |r, c| match EXAMPLE_EXPONENTS[r][c] {
        Some(e) => f.pow(a, e),
        None => f.zero(),
    })
}

/// Block structure of `[C D 0; CA CB D]`: blocks `C`, `D`, `CA`, `CB`.
pub fn example_pattern() -> BlockPattern {
    BlockPattern::new(
        vec![2, 2],
        vec![2, 3, 3],
        vec![vec![Some(0), Some(1), None], vec![Some(2), Some(3), Some(1)]],
    )
    .expect("consistent")
}

/// The `(5,3,2)` example system over a field with more than `2^330`
/// elements, with `a` the field's generator candidate.
pub fn construct_example_532(f: &Field) -> Result<StateSpace> {
    if f.log2_size() <= 330.0 {
        return Err(Error::FieldTooSmall(format!(
            "example needs more than 2^330 elements, field has {}",
            f.reference()
        )));
    }
    let a = f.generator();
    let pw = |e: u64| f.pow(&a, e);
    let a8m1 = f.sub(&pw(8), &f.one());
    if f.is_zero(&a8m1) {
        return Err(Error::DegenerateField("a^8 = 1".into()));
    }
    let scale = f.inv(&a8m1)?;
    let c = Matrix::from_fn(2, 2, |r, col| pw(8 << (r + col)));
    let d = Matrix::from_fn(2, 3, |r, col| pw(1 << (r + col)));
    let zero = f.zero();
    let one = f.one();
    let b02 = f.neg(&f.mul(&pw(32), &f.add(&pw(8), &one)));
    let b12 = f.mul(&pw(16), &f.add(&f.add(&pw(16), &pw(8)), &one));
    let b = Matrix::from_rows(
        vec![vec![one.clone(), zero.clone(), b02], vec![zero, one, b12]],
        3,
    )?;
    let a_raw = [
        [f.sub(&pw(64), &pw(112)), f.sub(&pw(128), &pw(240))],
        [f.sub(&pw(104), &pw(48)), f.sub(&pw(232), &pw(112))],
    ];
    let a_mat = Matrix::from_fn(2, 2, |r, col| f.mul(&scale, &a_raw[r][col]));
    StateSpace::new(f, a_mat, b, c, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convcode::{encode, is_noncatastrophic, random_generator};

    fn m(f: &Field, rows: &[&[u128]]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        Matrix::from_rows(
            rows.iter().map(|r| r.iter().map(|&x| f.from_index(x)).collect()).collect(),
            cols,
        )
        .unwrap()
    }

    fn random_message(f: &Field, k: usize, len: usize, rng: &mut SplitMix64) -> Vec<Vec<Fe>> {
        (0..len).map(|_| (0..k).map(|_| f.random(rng)).collect()).collect()
    }

    #[test]
    fn memoryless_simulation() {
        let f = Field::gf(2, 3).unwrap();
        let sys = StateSpace::new(
            &f,
            Matrix::zeros(&f, 2, 2),
            m(&f, &[&[1, 2], &[3, 4]]),
            m(&f, &[&[5, 6]]),
            m(&f, &[&[7, 1]]),
        )
        .unwrap();
        let mut rng = SplitMix64::new(1);
        let inputs = random_message(&f, 2, 5, &mut rng);
        let (xs, ys) = simulate(&sys, &sys.zero_state(), &inputs).unwrap();
        for t in 0..5 {
            assert_eq!(xs[t + 1], sys.b().mul_vec(&f, &inputs[t]).unwrap());
            if t == 0 {
                assert_eq!(ys[0], sys.d().mul_vec(&f, &inputs[0]).unwrap());
            }
        }
        let zeros = vec![vec![f.zero(); 2]; 3];
        let (xs, ys) = simulate(&sys, &sys.zero_state(), &zeros).unwrap();
        assert!(xs.iter().chain(&ys).flatten().all(|e| f.is_zero(e)));
    }

    #[test]
    fn kalman_trivial_cases() {
        let f = Field::gf(2, 1).unwrap();
        let sys = StateSpace::new(&f, Matrix::zeros(&f, 2, 2), Matrix::identity(&f, 2), Matrix::zeros(&f, 1, 2), Matrix::zeros(&f, 1, 2)).unwrap();
        assert!(kalman_reachable(&sys));
        assert!(!kalman_observable(&sys));
    }

    /// Exhaustive oracles over GF(2): breadth-first search of reachable
    /// states, and zero-input orbits that never show in the output.
    fn brute_reachable(sys: &StateSpace) -> bool {
        let f = sys.field();
        let inputs: Vec<Vec<Fe>> = (0..1u128 << sys.k())
            .map(|i| (0..sys.k()).map(|b| f.from_index((i >> b) & 1)).collect())
            .collect();
        let mut seen = std::collections::HashSet::new();
        let mut frontier = vec![sys.zero_state()];
        seen.insert(sys.zero_state());
        for _ in 0..sys.s() {
            let mut next = Vec::new();
            for x in &frontier {
                for u in &inputs {
                    let (nx, _) = sys.step(x, u).unwrap();
                    if seen.insert(nx.clone()) {
                        next.push(nx);
                    }
                }
            }
            frontier = next;
        }
        seen.len() == 1 << sys.s()
    }

    fn brute_observable(sys: &StateSpace) -> bool {
        let f = sys.field();
        (1..1u128 << sys.s()).all(|i| {
            let mut x: Vec<Fe> = (0..sys.s()).map(|b| f.from_index((i >> b) & 1)).collect();
            let mut seen = std::collections::HashSet::new();
            while seen.insert(x.clone()) {
                if sys.c().mul_vec(f, &x).unwrap().iter().any(|e| !f.is_zero(e)) {
                    return true;
                }
                x = sys.a().mul_vec(f, &x).unwrap();
            }
            false
        })
    }

    fn random_system(f: &Field, n: usize, k: usize, s: usize, rng: &mut SplitMix64) -> StateSpace {
        super::random_system(f, n, k, s, rng).unwrap()
    }

    #[test]
    fn kalman_agrees_with_exhaustive_search() {
        let f = Field::gf(2, 1).unwrap();
        let mut rng = SplitMix64::new(99);
        let (mut reach, mut obs) = (0, 0);
        for trial in 0..300 {
            let s = 1 + trial % 3;
            let sys = random_system(&f, 2 + trial % 2, 1, s, &mut rng);
            assert_eq!(kalman_reachable(&sys), brute_reachable(&sys));
            assert_eq!(kalman_observable(&sys), brute_observable(&sys));
            reach += kalman_reachable(&sys) as usize;
            obs += kalman_observable(&sys) as usize;
        }
        assert!(reach > 30 && reach < 270 && obs > 30 && obs < 270);
    }

    #[test]
    fn membership_detects_flipped_symbol() {
        let f = Field::gf(2, 4).unwrap();
        let mut rng = SplitMix64::new(4);
        let g = random_generator(&f, 3, 2, &[1, 1], &mut rng).unwrap();
        let sys = realize(&g).unwrap();
        let word = encode(&g, &random_message(&f, 2, 4, &mut rng)).unwrap();
        assert!(membership_check(&sys, &word, true));
        assert!(membership_check(&sys, &vec![vec![f.zero(); 3]; 4], true));
        let mut bad = word.clone();
        bad[2][0] = f.add(&bad[2][0], &f.one());
        assert!(!membership_check(&sys, &bad, false));
        // A trajectory that stops mid-way is a prefix but not a codeword.
        let (_, ys) = simulate(&sys, &sys.zero_state(), &[vec![f.one(), f.zero()]]).unwrap();
        let prefix = vec![ys[0].iter().cloned().chain([f.one(), f.zero()]).collect::<Vec<_>>()];
        if !sys.b().mul_vec(&f, &[f.one(), f.zero()]).unwrap().iter().all(|e| f.is_zero(e)) {
            assert!(membership_check(&sys, &prefix, false));
            assert!(!membership_check(&sys, &prefix, true));
        }
    }

    #[test]
    fn realize_systematic_memoryless() {
        let f = Field::gf(3, 1).unwrap();
        let g0 = m(&f, &[&[1, 2], &[1, 0], &[0, 1]]);
        let g = PolyGenerator::new(&f, 3, 2, vec![g0]).unwrap();
        let sys = realize(&g).unwrap();
        assert_eq!(sys.s(), 0);
        assert_eq!(sys.d(), &m(&f, &[&[1, 2]]));
    }

    #[test]
    fn realize_small_binary_code_exhaustively() {
        // G(z) = (1 + z, 1)^T
        let f = Field::gf(2, 1).unwrap();
        let g = PolyGenerator::new(&f, 2, 1, vec![m(&f, &[&[1], &[1]]), m(&f, &[&[1], &[0]])]).unwrap();
        let sys = realize(&g).unwrap();
        assert_eq!(sys.s(), 1);
        assert!(kalman_reachable(&sys));
        for len in 1..=3 {
            for bits in 0..1u128 << len {
                let msg: Vec<Vec<Fe>> = (0..len).map(|t| vec![f.from_index((bits >> t) & 1)]).collect();
                assert!(membership_check(&sys, &encode(&g, &msg).unwrap(), true));
            }
        }
    }

    #[test]
    fn realize_rejects_bad_generators() {
        let f = Field::gf(2, 1).unwrap();
        // u-row of G_0 is zero: the output would precede the input.
        let g = PolyGenerator::new(&f, 2, 1, vec![m(&f, &[&[1], &[0]]), m(&f, &[&[0], &[1]])]).unwrap();
        assert!(matches!(realize(&g), Err(Error::NotRealizable(_))));
        let g = PolyGenerator::new(&f, 2, 2, vec![m(&f, &[&[1, 0], &[0, 1]]), m(&f, &[&[1, 1], &[1, 1]])]).unwrap();
        assert!(matches!(realize(&g), Err(Error::NotReduced)));
    }

    #[test]
    fn generator_of_memoryless_and_delay() {
        let f = Field::gf(2, 2).unwrap();
        let sys = StateSpace::new(&f, Matrix::zeros(&f, 0, 0), Matrix::zeros(&f, 0, 2), Matrix::zeros(&f, 1, 0), m(&f, &[&[2, 3]])).unwrap();
        let g = generator_of(&sys).unwrap();
        assert_eq!(g.mu(), 0);
        assert_eq!(g.coeff(0), m(&f, &[&[2, 3], &[1, 0], &[0, 1]]));

        // y_t = u_{t-1}: G(z) = (z, 1)^T.
        let one = m(&f, &[&[1]]);
        let sys = StateSpace::new(&f, m(&f, &[&[0]]), one.clone(), one, m(&f, &[&[0]])).unwrap();
        let g = generator_of(&sys).unwrap();
        assert_eq!(g.coeffs(), &[m(&f, &[&[0], &[1]]), m(&f, &[&[1], &[0]])]);
    }

    #[test]
    fn round_trips_on_random_codes_and_systems() {
        let f = Field::gf(2, 3).unwrap();
        let mut rng = SplitMix64::new(8);
        let mut done = 0;
        while done < 20 {
            let g = random_generator(&f, 4, 2, &[1, 1], &mut rng).unwrap();
            let Ok(sys) = realize(&g) else { continue };
            assert!(kalman_reachable(&sys));
            for _ in 0..5 {
                let w = encode(&g, &random_message(&f, 2, 3, &mut rng)).unwrap();
                assert!(membership_check(&sys, &w, true));
            }
            let h = generator_of(&sys).unwrap();
            for _ in 0..5 {
                let w = encode(&h, &random_message(&f, 2, 3, &mut rng)).unwrap();
                assert!(membership_check(&sys, &w, true));
            }
            assert_eq!(column_degrees_and_reduced(&h).1, true);
            assert_eq!(code_degree(&h), 2);
            assert_eq!(is_noncatastrophic(&h), kalman_observable(&sys));
            done += 1;
        }
    }

    #[test]
    fn structural_nesting_and_ell() {
        let f = Field::gf(2, 4).unwrap();
        let mut rng = SplitMix64::new(21);
        let sys = random_system(&f, 4, 2, 3, &mut rng);
        let (cache, term) = build_structurals(&sys, 3, 5);
        assert_eq!(cache.f(0), sys.d());
        for j in 0..3 {
            let big = cache.f(j + 1);
            let p = sys.p() * (j + 1);
            let k = sys.k() * (j + 1);
            assert_eq!(&big.block(0, 0, p, k), cache.f(j));
        }
        // Two inputs into three states: R_1 = B full column rank, R_2 not.
        assert_eq!(cache.ell(), 1);
        assert_eq!(term.depth(), 3);
        let cab = sys.c().mul(&f, &cache.a_pow(5)).unwrap().mul(&f, sys.b()).unwrap();
        assert_eq!(term.e(0).block(0, 0, 2, 2), cab);
    }

    #[test]
    fn companion_system_ell() {
        // Shift register fed by one input: R_3 = I up to ordering.
        let f = Field::gf(2, 1).unwrap();
        let a = m(&f, &[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0]]);
        let b = m(&f, &[&[1], &[0], &[0]]);
        let c = m(&f, &[&[0, 0, 1]]);
        let sys = StateSpace::new(&f, a, b, c, m(&f, &[&[1]])).unwrap();
        let (cache, _) = build_structurals(&sys, 1, 4);
        assert_eq!(cache.ell(), 3);
    }

    #[test]
    fn example_system_matches_display() {
        let f = Field::example_field();
        let sys = construct_example_532(&f).unwrap();
        let a = f.generator();
        let shown = example_superregular(&f, &a);
        let (cache, _) = build_structurals(&sys, 1, 4);
        let built = Matrix::hstack(&f, &[cache.obs(1), cache.f(1)]).unwrap();
        assert_eq!(built, shown);
        assert_eq!(cache.ell(), -1);
        let (xs, ys) = simulate(&sys, &sys.zero_state(), &[vec![f.one(), f.zero(), f.zero()]]).unwrap();
        assert_eq!(xs[1], vec![f.one(), f.zero()]);
        assert_eq!(ys[0], vec![a.clone(), f.pow(&a, 2)]);
        assert!(kalman_reachable(&sys) && kalman_observable(&sys));
    }

    #[test]
    fn example_needs_large_field() {
        let f = Field::gf(2, 8).unwrap();
        assert!(matches!(construct_example_532(&f), Err(Error::FieldTooSmall(_))));
    }

    #[test]
    fn example_matrix_is_superregular() {
        let f = Field::example_field();
        let shown = example_superregular(&f, &f.generator());
        let full = census(&f, &example_pattern(), &shown, MinorScope::FullSize, 1 << 20).unwrap();
        assert_eq!(full.total, 70);
        // A 4x4 minor vanishes identically iff it takes all of columns
        // 5, 6, 7, whose top two rows are zero.
        let oracle = combinations(8, 4).filter(|cs| cs.iter().filter(|&&c| c >= 5).count() >= 3).count();
        assert_eq!(full.trivially_zero, oracle as u64);
        assert!(full.all_nontrivial_nonzero());
        let all = census(&f, &example_pattern(), &shown, MinorScope::All, 1 << 20).unwrap();
        assert!(all.all_nontrivial_nonzero());
        let sys = construct_example_532(&f).unwrap();
        assert!(is_mdp_system(&sys, 1 << 20).unwrap());
        let g = generator_of(&sys).unwrap();
        assert_eq!(column_degrees_and_reduced(&g), (vec![1, 1, 0], true));
        assert_eq!(g.mu(), 1);
        assert_eq!(code_degree(&g), 2);
    }
}
