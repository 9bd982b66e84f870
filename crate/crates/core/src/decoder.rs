//! Erasure decoding on the state-space representation.
//!
//! [`Decoder::decode`] is the low-delay decoder: it recovers each block
//! from the smallest window that determines it, falls back to recovering a
//! later state when no window of at most `T + 1` blocks works, and uses the
//! termination constraints of the frame whenever they pin down every input
//! that is still unknown. [`Decoder::baseline`] always waits for the
//! largest window of `L + 1` blocks and has no fallback.
//!
//! Time is the index of the newest block the decoder has looked at. A
//! symbol's delay is the time it was resolved minus its block index; it is
//! negative when the termination constraints predict a block that has not
//! arrived yet.

use serde::{Deserialize, Serialize};

use crate::convcode::mdp_horizon;
use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::matrix::{rank, solve_determined, Matrix, SolveOutcome};
use crate::sysrep::{build_structurals, system_degree, StateSpace, StructuralCache, TerminationMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ErasureSymbol {
    Known(Fe),
    Erased,
}

impl ErasureSymbol {
    pub fn value(&self) -> Option<&Fe> {
        match self {
            ErasureSymbol::Known(v) => Some(v),
            ErasureSymbol::Erased => None,
        }
    }

    pub fn is_erased(&self) -> bool {
        matches!(self, ErasureSymbol::Erased)
    }
}

/// Blocks `v_0..v_{γ+μ}`, each ordered `(y, u)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReceivedStream {
    n: usize,
    k: usize,
    gamma: usize,
    blocks: Vec<Vec<ErasureSymbol>>,
}

impl ReceivedStream {
    pub fn new(n: usize, k: usize, gamma: usize, blocks: Vec<Vec<ErasureSymbol>>) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::shape(format!("need n >= k >= 1, got n={n} k={k}")));
        }
        if blocks.len() <= gamma {
            return Err(Error::shape(format!(
                "{} blocks cannot carry a message of degree {gamma}",
                blocks.len()
            )));
        }
        if let Some((t, b)) = blocks.iter().enumerate().find(|(_, b)| b.len() != n) {
            return Err(Error::shape(format!("block {t} has {} symbols, expected {n}", b.len())));
        }
        Ok(Self { n, k, gamma, blocks })
    }

    /// A stream with every symbol received.
    pub fn clean(n: usize, k: usize, gamma: usize, codeword: &[Vec<Fe>]) -> Result<Self> {
        let blocks = codeword
            .iter()
            .map(|b| b.iter().cloned().map(ErasureSymbol::Known).collect())
            .collect();
        Self::new(n, k, gamma, blocks)
    }

    /// Erases the symbols where `mask` is true.
    pub fn masked(n: usize, k: usize, gamma: usize, codeword: &[Vec<Fe>], mask: &[Vec<bool>]) -> Result<Self> {
        if mask.len() != codeword.len() || mask.iter().zip(codeword).any(|(m, b)| m.len() != b.len()) {
            return Err(Error::Pattern("mask does not match the frame".into()));
        }
        let blocks = codeword
            .iter()
            .zip(mask)
            .map(|(b, m)| {
                b.iter()
                    .zip(m)
                    .map(|(v, &e)| if e { ErasureSymbol::Erased } else { ErasureSymbol::Known(v.clone()) })
                    .collect()
            })
            .collect();
        Self::new(n, k, gamma, blocks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    /// Index of the last block, `γ + μ`.
    pub fn horizon(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn blocks(&self) -> &[Vec<ErasureSymbol>] {
        &self.blocks
    }

    pub fn erasure_count(&self) -> usize {
        self.blocks.iter().flatten().filter(|s| s.is_erased()).count()
    }

    pub fn mask(&self) -> Vec<Vec<bool>> {
        self.blocks.iter().map(|b| b.iter().map(ErasureSymbol::is_erased).collect()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SymbolStatus {
    ReceivedClean,
    Recovered { time: i64 },
    Lost,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Event {
    Window { i: usize, j: usize, time: i64, success: bool, recovered: usize },
    State { i: usize, l: usize, j: usize, time: i64, success: bool, recovered: usize },
    Backfill { i: usize, l: usize, inputs_recovered: bool, lost: usize },
    Terminal { time: i64, w: usize, unknowns: usize, recovered: usize },
    GiveUp { i: usize, time: i64, lost: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    LowDelay,
    Baseline,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeReport {
    pub decoder: DecoderKind,
    pub n: usize,
    pub k: usize,
    pub gamma: usize,
    /// Delay bound for the low-delay decoder, window `L` for the baseline.
    pub window: usize,
    pub symbols: Vec<Vec<SymbolStatus>>,
    pub mults: u64,
    pub windows_attempted: u64,
    pub windows_solved: u64,
    pub state_recoveries: u64,
    pub termination_used: bool,
    pub events: Vec<Event>,
    #[serde(skip)]
    pub values: Vec<Vec<Option<Fe>>>,
}

impl DecodeReport {
    pub fn delay(&self, block: usize, comp: usize) -> Option<i64> {
        match self.symbols[block][comp] {
            SymbolStatus::ReceivedClean => Some(0),
            SymbolStatus::Recovered { time } => Some(time - block as i64),
            SymbolStatus::Lost => None,
        }
    }

    pub fn lost_count(&self) -> usize {
        self.symbols.iter().flatten().filter(|s| **s == SymbolStatus::Lost).count()
    }

    pub fn recovered(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        self.symbols.iter().enumerate().flat_map(|(t, b)| {
            b.iter().enumerate().filter_map(move |(c, s)| match s {
                SymbolStatus::Recovered { time } => Some((t, c, time - t as i64)),
                _ => None,
            })
        })
    }

    pub fn is_complete(&self) -> bool {
        self.lost_count() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderConfig {
    /// Maximum delay `T` for forward recovery.
    pub delay: usize,
    /// Upper bound on how far ahead (`l`) a state may be recovered;
    /// unbounded when `None`.
    pub max_lookahead: Option<usize>,
}

impl DecoderConfig {
    pub fn new(delay: usize) -> Self {
        Self {
            delay,
            max_lookahead: None,
        }
    }
}

/// `x_i` from fully known inputs `u_0..u_{i-1}`.
pub fn state_from_prefix(sys: &StateSpace, inputs: &[Vec<Option<Fe>>]) -> Result<Vec<Fe>> {
    let mut x = sys.zero_state();
    for (t, u) in inputs.iter().enumerate() {
        let u: Vec<Fe> = u.iter().cloned().collect::<Option<_>>().ok_or(Error::PrefixUnknown(t))?;
        x = sys.step(&x, &u)?.0;
    }
    Ok(x)
}

/// Decoder for one system and one frame length; reusable across streams.
#[derive(Clone, Debug)]
pub struct Decoder {
    sys: StateSpace,
    config: DecoderConfig,
    horizon: usize,
    big_window: usize,
    cache: StructuralCache,
    term: TerminationMatrix,
    /// `rank E_w`; no restriction with more columns can have full rank.
    term_ranks: Vec<usize>,
}

impl Decoder {
    pub fn new(sys: &StateSpace, config: DecoderConfig, horizon: usize) -> Result<Self> {
        let delta = system_degree(sys)?;
        let big_window = mdp_horizon(sys.n(), sys.k(), delta);
        let (cache, term) = build_structurals(sys, config.delay.max(big_window), horizon);
        let term_ranks = (0..term.depth()).map(|w| rank(sys.field(), term.e(w))).collect();
        Ok(Self {
            sys: sys.clone(),
            config,
            horizon,
            big_window,
            cache,
            term,
            term_ranks,
        })
    }

    pub fn system(&self) -> &StateSpace {
        &self.sys
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `L`, the baseline's window.
    pub fn big_window(&self) -> usize {
        self.big_window
    }

    pub fn session(&self, stream: &ReceivedStream) -> Result<Session<'_>> {
        if stream.n != self.sys.n() || stream.k != self.sys.k() {
            return Err(Error::shape(format!(
                "stream is ({}, {}) but code is ({}, {})",
                stream.n,
                stream.k,
                self.sys.n(),
                self.sys.k()
            )));
        }
        if stream.horizon() != self.horizon {
            return Err(Error::shape(format!(
                "stream has {} blocks, decoder expects {}",
                stream.blocks.len(),
                self.horizon + 1
            )));
        }
        Ok(Session::new(self, stream))
    }

    pub fn decode(&self, stream: &ReceivedStream) -> Result<DecodeReport> {
        let mut s = self.session(stream)?;
        s.run_low_delay()?;
        Ok(s.finish(DecoderKind::LowDelay, self.config.delay))
    }

    pub fn baseline(&self, stream: &ReceivedStream) -> Result<DecodeReport> {
        let mut s = self.session(stream)?;
        s.run_baseline()?;
        Ok(s.finish(DecoderKind::Baseline, self.big_window))
    }
}

pub fn decode(sys: &StateSpace, stream: &ReceivedStream, config: &DecoderConfig) -> Result<DecodeReport> {
    Decoder::new(sys, config.clone(), stream.horizon())?.decode(stream)
}

pub fn baseline_decode(sys: &StateSpace, stream: &ReceivedStream, config: &DecoderConfig) -> Result<DecodeReport> {
    Decoder::new(sys, config.clone(), stream.horizon())?.baseline(stream)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Clean,
    Pending,
    Recovered(i64),
    Lost,
}

/// A variable of a window system: a state coordinate or a symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Var {
    State(usize),
    Symbol(usize, usize),
}

/// Mutable decoding state over one stream.
pub struct Session<'a> {
    dec: &'a Decoder,
    field: Field,
    gamma: usize,
    values: Vec<Vec<Option<Fe>>>,
    slots: Vec<Vec<Slot>>,
    /// Newest block looked at so far.
    time: i64,
    mults: u64,
    windows_attempted: u64,
    windows_solved: u64,
    state_recoveries: u64,
    termination_used: bool,
    events: Vec<Event>,
}

impl<'a> Session<'a> {
    fn new(dec: &'a Decoder, stream: &ReceivedStream) -> Self {
        let values = stream
            .blocks
            .iter()
            .map(|b| b.iter().map(|s| s.value().cloned()).collect())
            .collect();
        let slots = stream
            .blocks
            .iter()
            .map(|b| b.iter().map(|s| if s.is_erased() { Slot::Pending } else { Slot::Clean }).collect())
            .collect();
        Self {
            dec,
            field: dec.sys.field().clone(),
            gamma: stream.gamma,
            values,
            slots,
            time: -1,
            mults: 0,
            windows_attempted: 0,
            windows_solved: 0,
            state_recoveries: 0,
            termination_used: false,
            events: Vec::new(),
        }
    }

    fn p(&self) -> usize {
        self.dec.sys.p()
    }

    /// Blocks past the horizon are known zero once the horizon is reached.
    fn reach(&mut self, block: usize) {
        self.time = self.time.max(block.min(self.dec.horizon) as i64);
    }

    fn block_pending(&self, t: usize) -> bool {
        self.slots[t].iter().any(|s| *s == Slot::Pending)
    }

    fn unresolved(&self, t: usize, c: usize) -> bool {
        matches!(self.slots[t][c], Slot::Pending | Slot::Lost)
    }

    fn input(&self, t: usize) -> Option<Vec<Fe>> {
        self.values[t][self.p()..].iter().cloned().collect()
    }

    fn resolve(&mut self, t: usize, c: usize, v: Fe) {
        self.values[t][c] = Some(v);
        self.slots[t][c] = Slot::Recovered(self.time);
    }

    /// Builds the equations `O_j x - y + F_j u = 0` over blocks
    /// `start..=start+j`, with the state either known or unknown, and
    /// solves for the unknown state and every symbol not yet known. Blocks
    /// past the horizon are zero in a terminated frame.
    fn solve_window(&mut self, start: usize, j: usize, x: Option<&[Fe]>) -> Result<(Vec<Var>, SolveOutcome)> {
        let f = self.field.clone();
        let (p, k, s) = (self.p(), self.dec.sys.k(), self.dec.sys.s());
        let obs = self.dec.cache.obs(j);
        let fj = self.dec.cache.f(j);
        let rows = p * (j + 1);
        let mut vars = Vec::new();
        let mut columns: Vec<Vec<Fe>> = Vec::new();
        let mut rhs = vec![f.zero(); rows];
        let mut absorb = |col: Vec<Fe>, value: Option<&Fe>, var: Var, vars: &mut Vec<Var>| match value {
            Some(v) => {
                for (acc, a) in rhs.iter_mut().zip(&col) {
                    *acc = f.sub(acc, &f.mul(a, v));
                }
            }
            None => {
                vars.push(var);
                columns.push(col);
            }
        };
        for c in 0..s {
            absorb(obs.col(c), x.map(|x| &x[c]), Var::State(c), &mut vars);
        }
        for q in 0..=j {
            let t = start + q;
            if t > self.dec.horizon {
                continue;
            }
            for r in 0..p {
                let mut col = vec![f.zero(); rows];
                col[q * p + r] = f.neg(&f.one());
                absorb(col, self.values[t][r].as_ref(), Var::Symbol(t, r), &mut vars);
            }
            for c in 0..k {
                absorb(fj.col(q * k + c), self.values[t][p + c].as_ref(), Var::Symbol(t, p + c), &mut vars);
            }
        }
        let a = Matrix::from_fn(rows, vars.len(), |r, c| columns[c][r].clone());
        let out = solve_determined(&f, &a, &rhs)?;
        self.mults += out.mults;
        if !out.consistent {
            return Err(Error::Integrity(format!(
                "received symbols in blocks {start}..={} are not a code trajectory",
                start + j
            )));
        }
        Ok((vars, out))
    }

    /// Writes back every determined symbol; returns how many were new.
    fn commit(&mut self, vars: &[Var], out: &SolveOutcome) -> usize {
        let mut count = 0;
        for (var, u) in vars.iter().zip(&out.unknowns) {
            if let (Var::Symbol(t, c), Some(v)) = (var, u.value()) {
                if self.slots[*t][*c] == Slot::Pending {
                    self.resolve(*t, *c, v.clone());
                    count += 1;
                }
            }
        }
        count
    }

    /// Forward recovery of `v_i` from blocks `i..=i+j` given the state
    /// `x_i`. Every determined erasure in the window is written back; the
    /// result says whether all erasures of `v_i` were determined.
    pub fn recover_window(&mut self, i: usize, j: usize, x_i: &[Fe]) -> Result<bool> {
        self.reach(i + j);
        self.windows_attempted += 1;
        let (vars, out) = self.solve_window(i, j, Some(x_i))?;
        let recovered = self.commit(&vars, &out);
        let success = !self.block_pending(i);
        if success {
            self.windows_solved += 1;
        }
        self.events.push(Event::Window {
            i,
            j,
            time: self.time,
            success,
            recovered,
        });
        Ok(success)
    }

    /// Recovers `x_{i+l}` from blocks `i+l..=i+l+j` alone, writing back
    /// every determined erasure in those blocks.
    pub fn recover_state(&mut self, i: usize, l: usize, j: usize) -> Result<Option<Vec<Fe>>> {
        let start = i + l;
        self.reach(start + j);
        let (vars, out) = self.solve_window(start, j, None)?;
        let recovered = self.commit(&vars, &out);
        let s = self.dec.sys.s();
        let state: Option<Vec<Fe>> = (0..s)
            .map(|c| {
                let pos = vars.iter().position(|v| *v == Var::State(c)).expect("state is unknown");
                out.unknowns[pos].value().cloned()
            })
            .collect();
        if state.is_some() {
            self.state_recoveries += 1;
        }
        self.events.push(Event::State {
            i,
            l,
            j,
            time: self.time,
            success: state.is_some(),
            recovered,
        });
        Ok(state)
    }

    /// Given `x_i` and `x_{i+l}`, recovers `u_i..u_{i+l-1}` from
    /// `x_{i+l} - A^l x_i = R_l (u_i; ...; u_{i+l-1})` when `l <= ℓ`, then the
    /// outputs; otherwise declares the erasures of `v_i..v_{i+l-1}` lost.
    pub fn backfill_inputs(&mut self, i: usize, l: usize, x_i: &[Fe], x_il: &[Fe]) -> Result<bool> {
        let f = self.field.clone();
        let dec = self.dec;
        let sys = &dec.sys;
        let (p, k) = (sys.p(), sys.k());
        let ell = dec.cache.ell();
        if ell >= 1 && l as isize <= ell {
            let r = dec.cache.r(l).expect("l <= s");
            let ax = dec.cache.a_pow(l).mul_vec(&f, x_i)?;
            let b: Vec<Fe> = x_il.iter().zip(&ax).map(|(a, c)| f.sub(a, c)).collect();
            let out = solve_determined(&f, r, &b)?;
            self.mults += out.mults;
            if !out.consistent || !out.all_determined() {
                return Err(Error::Integrity(format!("state difference over blocks {i}..{} is inconsistent", i + l)));
            }
            let mut x = x_i.to_vec();
            for q in 0..l {
                let t = i + q;
                let u: Vec<Fe> = (0..k).map(|c| out.unknowns[q * k + c].value().expect("determined").clone()).collect();
                let (next, y) = sys.step(&x, &u)?;
                for (c, v) in y.into_iter().chain(u).enumerate() {
                    match self.slots[t][c] {
                        Slot::Pending => self.resolve(t, c, v),
                        _ if self.values[t][c].as_ref() != Some(&v) => {
                            return Err(Error::Integrity(format!("block {t} contradicts the recovered state")))
                        }
                        _ => {}
                    }
                }
                x = next;
            }
            if x != x_il {
                return Err(Error::Integrity(format!("inputs of blocks {i}..{} do not reach the recovered state", i + l)));
            }
            self.events.push(Event::Backfill {
                i,
                l,
                inputs_recovered: true,
                lost: 0,
            });
            return Ok(true);
        }
        let mut lost = 0;
        for t in i..i + l {
            for c in 0..p + k {
                if self.slots[t][c] == Slot::Pending {
                    self.slots[t][c] = Slot::Lost;
                    lost += 1;
                }
            }
        }
        self.events.push(Event::Backfill {
            i,
            l,
            inputs_recovered: false,
            lost,
        });
        Ok(false)
    }

    /// Whether the termination check has anything to act on: an erasure
    /// anywhere in the frame that is still unresolved.
    fn terminal_wanted(&self) -> bool {
        self.slots.iter().flatten().any(|s| matches!(s, Slot::Pending | Slot::Lost))
    }

    /// Solves `E_w u = 0` for every input not known at the current time
    /// (unresolved arrived inputs and all inputs of future blocks), at the
    /// first `w` where the restricted matrix has full column rank. On
    /// success all inputs and then all outputs are filled in.
    pub fn terminal_check_and_solve(&mut self) -> Result<bool> {
        let f = self.field.clone();
        let (p, k) = (self.p(), self.dec.sys.k());
        let horizon = self.dec.horizon;
        let future = |t: usize| t as i64 > self.time;
        let mut unknown = Vec::new();
        let mut known = Vec::new();
        for t in 0..=horizon {
            for c in 0..k {
                if future(t) || self.unresolved(t, p + c) {
                    unknown.push((t, c));
                } else {
                    known.push((t, c));
                }
            }
        }
        for w in 0..self.dec.term.depth() {
            let e = self.dec.term.e(w);
            if unknown.len() > self.dec.term_ranks[w] {
                continue;
            }
            let cols: Vec<usize> = unknown.iter().map(|&(t, c)| self.dec.term.column(t, c)).collect();
            let a = e.select_cols(&cols);
            let mut rhs = vec![f.zero(); e.rows()];
            for &(t, c) in &known {
                let v = self.values[t][p + c].as_ref().expect("known input");
                if f.is_zero(v) {
                    continue;
                }
                let col = self.dec.term.column(t, c);
                for (r, acc) in rhs.iter_mut().enumerate() {
                    *acc = f.sub(acc, &f.mul(e.get(r, col), v));
                }
            }
            let out = solve_determined(&f, &a, &rhs)?;
            self.mults += out.mults;
            if !out.consistent {
                return Err(Error::Integrity("received inputs violate the termination constraints".into()));
            }
            if !out.all_determined() {
                continue;
            }
            let mut inputs: Vec<Vec<Fe>> = (0..=horizon)
                .map(|t| (0..k).map(|c| self.values[t][p + c].clone().unwrap_or_else(|| f.zero())).collect())
                .collect();
            for (&(t, c), u) in unknown.iter().zip(&out.unknowns) {
                inputs[t][c] = u.value().expect("determined").clone();
            }
            let mut recovered = 0;
            let mut x = self.dec.sys.zero_state();
            for (t, u) in inputs.iter().enumerate() {
                let (next, y) = self.dec.sys.step(&x, u)?;
                for (c, v) in y.into_iter().chain(u.iter().cloned()).enumerate() {
                    if self.unresolved(t, c) {
                        self.resolve(t, c, v);
                        recovered += 1;
                    } else if self.values[t][c].as_ref() != Some(&v) {
                        return Err(Error::Integrity(format!("block {t} contradicts the terminated codeword")));
                    }
                }
                x = next;
            }
            self.termination_used = true;
            self.events.push(Event::Terminal {
                time: self.time,
                w,
                unknowns: unknown.len(),
                recovered,
            });
            return Ok(true);
        }
        Ok(false)
    }

    fn give_up(&mut self, i: usize) {
        self.reach(self.dec.horizon);
        let mut lost = 0;
        for b in &mut self.slots[i..] {
            for s in b.iter_mut().filter(|s| **s == Slot::Pending) {
                *s = Slot::Lost;
                lost += 1;
            }
        }
        self.events.push(Event::GiveUp {
            i,
            time: self.time,
            lost,
        });
    }

    fn advance(&self, x: &[Fe], t: usize) -> Result<Vec<Fe>> {
        let u = self.input(t).ok_or(Error::PrefixUnknown(t))?;
        Ok(self.dec.sys.step(x, &u)?.0)
    }

    fn run_low_delay(&mut self) -> Result<()> {
        let horizon = self.dec.horizon;
        let t_max = self.dec.config.delay;
        let mut x = self.dec.sys.zero_state();
        let mut i = 0;
        while i <= horizon {
            self.reach(i);
            if self.terminal_wanted() && self.terminal_check_and_solve()? {
                return Ok(());
            }
            if !self.block_pending(i) {
                x = self.advance(&x, i)?;
                i += 1;
                continue;
            }
            let mut forward = false;
            for j in 0..=t_max {
                if self.recover_window(i, j, &x)? {
                    forward = true;
                    break;
                }
            }
            if forward {
                continue;
            }
            let max_l = self.dec.config.max_lookahead.unwrap_or(usize::MAX).min(horizon - i);
            let mut found = None;
            'scan: for l in 1..=max_l {
                for j in 0..=t_max {
                    if let Some(x_il) = self.recover_state(i, l, j)? {
                        found = Some((l, x_il));
                        break 'scan;
                    }
                }
            }
            match found {
                Some((l, x_il)) => {
                    self.backfill_inputs(i, l, &x, &x_il)?;
                    x = x_il;
                    i += l;
                }
                None => {
                    self.give_up(i);
                    break;
                }
            }
        }
        self.reach(horizon);
        if self.terminal_wanted() {
            self.terminal_check_and_solve()?;
        }
        Ok(())
    }

    /// Tries the window of `L + 1` blocks first and shrinks it until every
    /// erasure inside is determined; stops at the first block it cannot
    /// recover.
    fn run_baseline(&mut self) -> Result<()> {
        let horizon = self.dec.horizon;
        let big = self.dec.big_window;
        let mut x = self.dec.sys.zero_state();
        let mut i = 0;
        while i <= horizon {
            self.reach(i);
            if !self.block_pending(i) {
                x = self.advance(&x, i)?;
                i += 1;
                continue;
            }
            let top = big;
            self.reach(i + top);
            let mut ok = false;
            for j in (0..=top).rev() {
                self.windows_attempted += 1;
                let (vars, out) = self.solve_window(i, j, Some(&x))?;
                let success = out.all_determined();
                let recovered = if success { self.commit(&vars, &out) } else { 0 };
                self.events.push(Event::Window {
                    i,
                    j,
                    time: self.time,
                    success,
                    recovered,
                });
                if success {
                    self.windows_solved += 1;
                    ok = true;
                    break;
                }
            }
            if !ok {
                self.give_up(i);
                break;
            }
        }
        Ok(())
    }

    fn finish(self, decoder: DecoderKind, window: usize) -> DecodeReport {
        let symbols = self
            .slots
            .iter()
            .map(|b| {
                b.iter()
                    .map(|s| match s {
                        Slot::Clean => SymbolStatus::ReceivedClean,
                        Slot::Recovered(t) => SymbolStatus::Recovered { time: *t },
                        Slot::Pending | Slot::Lost => SymbolStatus::Lost,
                    })
                    .collect()
            })
            .collect();
        let values = self
            .values
            .into_iter()
            .zip(&self.slots)
            .map(|(b, sl)| {
                b.into_iter()
                    .zip(sl)
                    .map(|(v, s)| if matches!(s, Slot::Pending | Slot::Lost) { None } else { v })
                    .collect()
            })
            .collect();
        DecodeReport {
            decoder,
            n: self.dec.sys.n(),
            k: self.dec.sys.k(),
            gamma: self.gamma,
            window,
            symbols,
            mults: self.mults,
            windows_attempted: self.windows_attempted,
            windows_solved: self.windows_solved,
            state_recoveries: self.state_recoveries,
            termination_used: self.termination_used,
            events: self.events,
            values,
        }
    }
}
