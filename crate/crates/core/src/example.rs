//! The (5,3,2) example code with `T = L = 1`, `γ = 3`, and an end-to-end
//! check of everything claimed about it.

use serde::{Deserialize, Serialize};

use crate::convcode::{code_degree, column_degrees_and_reduced, encode};
use crate::decoder::{DecodeReport, Decoder, DecoderConfig, Event, ReceivedStream, SymbolStatus};
use crate::error::Result;
use crate::field::{Fe, Field};
use crate::matrix::{combinations, det, rank, Matrix};
use crate::pattern::{census, MinorScope, DEFAULT_MINOR_BUDGET};
use crate::rng::SplitMix64;
use crate::sysrep::{
    build_structurals, construct_example_532, example_pattern, example_superregular, generator_of, is_mdp_system,
    quality_report, StateSpace, EXAMPLE_EXPONENTS,
};

pub const EXAMPLE_GAMMA: usize = 3;
pub const EXAMPLE_DELAY: usize = 1;
pub const EXAMPLE_SEED: u64 = 532;

/// Erasure pattern of the example, `true` = erased, blocks `(y0 y1 u0 u1 u2)`.
pub fn example_mask() -> Vec<Vec<bool>> {
    let (e, r) = (true, false);
    vec![
        vec![e, e, r, r, r],
        vec![e, e, e, r, r],
        vec![e, e, r, r, r],
        vec![r, r, r, r, r],
        vec![e, e, e, e, e],
    ]
}

/// A fixed message for the example frame.
pub fn example_message(f: &Field) -> Vec<Vec<Fe>> {
    let mut rng = SplitMix64::new(EXAMPLE_SEED);
    (0..=EXAMPLE_GAMMA).map(|_| (0..3).map(|_| f.random(&mut rng)).collect()).collect()
}

/// The example system, its codeword for [`example_message`], and the
/// received stream with [`example_mask`] applied.
pub fn example_frame(f: &Field) -> Result<(StateSpace, Vec<Vec<Fe>>, ReceivedStream)> {
    let sys = construct_example_532(f)?;
    let g = generator_of(&sys)?;
    let word = encode(&g, &example_message(f))?;
    let stream = ReceivedStream::masked(5, 3, EXAMPLE_GAMMA, &word, &example_mask())?;
    Ok((sys, word, stream))
}

/// Whether a minor vanishes for every choice of values at the nonzero
/// positions, i.e. the bipartite graph of nonzero entries has no perfect
/// matching.
pub fn structurally_zero(nonzero: &[Vec<bool>], rows: &[usize], cols: &[usize]) -> bool {
    fn augment(r: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &c in &adj[r] {
            if !seen[c] {
                seen[c] = true;
                if owner[c].is_none_or(|o| augment(o, adj, seen, owner)) {
                    owner[c] = Some(r);
                    return true;
                }
            }
        }
        false
    }
    let adj: Vec<Vec<usize>> = rows
        .iter()
        .map(|&r| (0..cols.len()).filter(|&c| nonzero[r][cols[c]]).collect())
        .collect();
    let mut owner = vec![None; cols.len()];
    !(0..rows.len()).all(|r| augment(r, &adj, &mut vec![false; cols.len()], &mut owner))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExampleVerification {
    pub field: String,
    pub checks: Vec<Check>,
    pub decode: DecodeReport,
    pub baseline: DecodeReport,
}

impl ExampleVerification {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.0.push(Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }
}

/// The narrative the decoder must follow on the example stream.
pub fn expected_events() -> Vec<Event> {
    vec![
        Event::Window { i: 0, j: 0, time: 0, success: true, recovered: 2 },
        Event::Window { i: 1, j: 0, time: 1, success: false, recovered: 0 },
        Event::Window { i: 1, j: 1, time: 2, success: false, recovered: 0 },
        Event::State { i: 1, l: 1, j: 0, time: 2, success: false, recovered: 0 },
        Event::State { i: 1, l: 1, j: 1, time: 3, success: true, recovered: 2 },
        Event::Backfill { i: 1, l: 1, inputs_recovered: false, lost: 3 },
        Event::Terminal { time: 3, w: 1, unknowns: 4, recovered: 8 },
    ]
}

/// Expected resolution time of every symbol; `None` for received symbols.
pub fn expected_times() -> Vec<Vec<Option<i64>>> {
    let (c, r0, r3) = (None, Some(0), Some(3));
    vec![
        vec![r0, r0, c, c, c],
        vec![r3, r3, r3, c, c],
        vec![r3, r3, c, c, c],
        vec![c, c, c, c, c],
        vec![r3, r3, r3, r3, r3],
    ]
}

/// Rank of the coefficient matrix of `u_1[0]` and `u_4` in all equations
/// available at time 3: the received or recovered `y_0, y_2, y_3` and the
/// zero state after the last block.
fn time3_information_rank(sys: &StateSpace) -> Result<usize> {
    let f = sys.field();
    let unknowns = [(1, 0), (4, 0), (4, 1), (4, 2)];
    let apow = |e: usize| sys.a().pow(f, e);
    let col = |c: usize| Matrix::column(sys.b().col(c));
    let mut parts = Vec::new();
    for t in [0, 2, 3] {
        let mut rows = Matrix::zeros(f, sys.p(), unknowns.len());
        for (x, &(j, c)) in unknowns.iter().enumerate() {
            let coeff = match j.cmp(&t) {
                std::cmp::Ordering::Less => sys.c().mul(f, &apow(t - 1 - j)?)?.mul(f, &col(c))?,
                std::cmp::Ordering::Equal => Matrix::column(sys.d().col(c)),
                std::cmp::Ordering::Greater => Matrix::zeros(f, sys.p(), 1),
            };
            rows.set_block(0, x, &coeff);
        }
        parts.push(rows);
    }
    let mut end = Matrix::zeros(f, sys.s(), unknowns.len());
    for (x, &(j, c)) in unknowns.iter().enumerate() {
        end.set_block(0, x, &apow(4 - j)?.mul(f, &col(c))?);
    }
    parts.push(end);
    let refs: Vec<&Matrix> = parts.iter().collect();
    Ok(rank(f, &Matrix::vstack(f, &refs)?))
}

/// Rebuilds the example over `f` and checks matrices, superregularity,
/// code parameters and the decoding narrative.
pub fn verify_example(f: &Field) -> Result<ExampleVerification> {
    let mut checks = Checks(Vec::new());
    let (sys, word, stream) = example_frame(f)?;
    let a = f.generator();
    let pw = |e: u64| f.pow(&a, e);

    let shown = example_superregular(f, &a);
    let (cache, term) = build_structurals(&sys, EXAMPLE_DELAY, EXAMPLE_GAMMA + 1);
    let built = Matrix::hstack(f, &[cache.obs(1), cache.f(1)])?;
    checks.add("matrices", built == shown, "[C D 0; CA CB D] rebuilt from A, B, C, D equals the displayed matrix");
    let b_ok = sys.b().get(0, 0) == &f.one()
        && sys.b().get(1, 1) == &f.one()
        && f.is_zero(sys.b().get(0, 1))
        && f.is_zero(sys.b().get(1, 0));
    let cb = sys.c().mul(f, sys.b())?;
    let ca = sys.c().mul(f, sys.a())?;
    let blocks_ok = cb == Matrix::from_fn(2, 3, |r, c| pw(8 << (r + c)))
        && ca == Matrix::from_fn(2, 2, |r, c| pw(64 << (r + c)))
        && sys.c().get(0, 0) == &pw(8);
    checks.add("closed_forms", b_ok && blocks_ok, "B has identity columns; C B and C A match the display");

    let full = census(f, &example_pattern(), &shown, MinorScope::FullSize, DEFAULT_MINOR_BUDGET)?;
    let nonzero: Vec<Vec<bool>> = EXAMPLE_EXPONENTS.iter().map(|r| r.iter().map(Option::is_some).collect()).collect();
    let rows: Vec<usize> = (0..4).collect();
    let structural = combinations(8, 4).filter(|cs| structurally_zero(&nonzero, &rows, cs)).count() as u64;
    checks.add(
        "full_size_minors",
        full.total == 70 && full.trivially_zero == structural && full.all_nontrivial_nonzero(),
        format!(
            "{} full-size minors, {} trivially zero (zero pattern: {}), {} vanishing nontrivial",
            full.total, full.trivially_zero, structural, full.failures
        ),
    );
    let all = census(f, &example_pattern(), &shown, MinorScope::All, DEFAULT_MINOR_BUDGET)?;
    checks.add(
        "superregular",
        all.all_nontrivial_nonzero(),
        format!("{} minors of all sizes, {} trivially zero, {} vanishing nontrivial", all.total, all.trivially_zero, all.failures),
    );
    checks.add("mdp", is_mdp_system(&sys, DEFAULT_MINOR_BUDGET)?, "every nontrivial minor of F_L is nonzero");

    let g = generator_of(&sys)?;
    let (degrees, reduced) = column_degrees_and_reduced(&g);
    checks.add(
        "generator",
        degrees == [1, 1, 0] && reduced && g.mu() == 1 && code_degree(&g) == 2,
        format!("column degrees {degrees:?}, memory {}, degree {}", g.mu(), code_degree(&g)),
    );

    let q = quality_report(&sys, EXAMPLE_DELAY, EXAMPLE_GAMMA, DEFAULT_MINOR_BUDGET)?;
    checks.add(
        "properties",
        q.property1 == [Some(true)] && q.property2 == [Some(true)] && q.ell == -1,
        format!("property 1 {:?}, property 2 {:?}, ell {}", q.property1, q.property2, q.ell),
    );
    let cols = [term.column(1, 0), term.column(4, 0), term.column(4, 1), term.column(4, 2)];
    let tilde = term.e(1).select_cols(&cols);
    let tilde_rank = rank(f, &tilde);
    checks.add(
        "termination_matrix",
        !f.is_zero(&det(f, &tilde)?),
        format!("E_1 restricted to u_1[0] and u_4 has rank {tilde_rank} of 4"),
    );
    let bound_ok = (0..term.depth()).all(|w| rank(f, term.e(w)) <= sys.s());
    checks.add(
        "termination_rank_bound",
        bound_ok,
        format!("E_w = [C; ..; C A^w] [A^4 B .. B] has rank at most s = {} for every w", sys.s()),
    );
    let info_rank = time3_information_rank(&sys)?;
    checks.add(
        "time3_information",
        info_rank < 4,
        format!("every equation known at time 3 constrains u_1[0], u_4 with rank {info_rank} of 4"),
    );

    let dec = Decoder::new(&sys, DecoderConfig::new(EXAMPLE_DELAY), stream.horizon())?;
    let decode = dec.decode(&stream)?;
    let baseline = dec.baseline(&stream)?;
    let expected = expected_events();
    let forward = expected.len() - 1;
    checks.add(
        "narrative_forward",
        decode.events.len() >= forward && decode.events[..forward] == expected[..forward],
        "window, state recovery and backfill steps up to time 3",
    );
    checks.add(
        "narrative",
        decode.events == expected,
        format!("{} decoding steps, last {:?}", decode.events.len(), decode.events.last()),
    );
    let times: Vec<Vec<Option<i64>>> = decode
        .symbols
        .iter()
        .map(|b| {
            b.iter()
                .map(|s| match s {
                    SymbolStatus::Recovered { time } => Some(*time),
                    _ => None,
                })
                .collect()
        })
        .collect();
    let received_clean = decode
        .symbols
        .iter()
        .flatten()
        .zip(stream.mask().iter().flatten())
        .all(|(s, &erased)| erased || *s == SymbolStatus::ReceivedClean);
    checks.add(
        "delays",
        times == expected_times() && received_clean,
        "y_0 delay 0; y_1, u_1[0] delay 2; y_2 delay 1; v_4 delay -1",
    );
    let sound = decode
        .values
        .iter()
        .zip(&word)
        .all(|(got, want)| got.iter().zip(want).all(|(g, w)| g.as_ref().is_none_or(|g| g == w)));
    checks.add("sound", sound, "every recovered symbol equals the transmitted one");
    checks.add(
        "complete",
        decode.is_complete(),
        format!("{} symbols lost", decode.lost_count()),
    );
    checks.add(
        "baseline",
        baseline.delay(0, 0) == Some(1) && baseline.delay(0, 1) == Some(1),
        format!("baseline resolves y_0 with delay {:?}", baseline.delay(0, 0)),
    );

    Ok(ExampleVerification {
        field: f.reference(),
        checks: checks.0,
        decode,
        baseline,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structural_zero_oracle() {
        let nz = vec![vec![true, false], vec![true, false]];
        assert!(structurally_zero(&nz, &[0, 1], &[0, 1]));
        let nz = vec![vec![true, false], vec![true, true]];
        assert!(!structurally_zero(&nz, &[0, 1], &[0, 1]));
    }

    #[test]
    fn example_verifies_up_to_termination() {
        let v = verify_example(&Field::example_field()).unwrap();
        let unattainable = ["termination_matrix", "narrative", "delays", "complete"];
        for c in &v.checks {
            assert_eq!(c.pass, !unattainable.contains(&c.name.as_str()), "{}: {}", c.name, c.detail);
        }
        assert!(matches!(v.decode.events.last(), Some(Event::GiveUp { i: 4, .. })));
    }
}
