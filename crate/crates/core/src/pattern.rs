//! Structured matrices and the "not trivially zero" minor test.
//!
//! A [`BlockPattern`] records which blocks of a matrix are structurally zero
//! and which are free (possibly repeated, as in block Toeplitz matrices). A
//! minor is trivially zero when it vanishes for every choice of the free
//! blocks. That is decided by evaluating the same minor on 8 random
//! instances of the pattern over a field of the same characteristic with at
//! least 2^61 elements: all eight zero means trivially zero. A nonzero
//! polynomial of degree `d` vanishes at a random point with probability at
//! most `d / 2^61`, so the misclassification rate is far below 2^-50 at the
//! sizes used here.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{binomial, combinations, det, Matrix};
use crate::rng::SplitMix64;

const INSTANCES: usize = 8;
const INSTANCE_SEED: u64 = 0x7269_7669_616c_7a65;

/// Default cap on the number of minors a single census may enumerate.
pub const DEFAULT_MINOR_BUDGET: u128 = 4_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPattern {
    row_heights: Vec<usize>,
    col_widths: Vec<usize>,
    cells: Vec<Vec<Option<usize>>>,
    block_shapes: Vec<(usize, usize)>,
}

impl BlockPattern {
    pub fn new(
        row_heights: Vec<usize>,
        col_widths: Vec<usize>,
        cells: Vec<Vec<Option<usize>>>,
    ) -> Result<Self> {
        if cells.len() != row_heights.len() || cells.iter().any(|r| r.len() != col_widths.len()) {
            return Err(Error::shape("pattern grid does not match block sizes"));
        }
        let nblocks = cells.iter().flatten().flatten().map(|&b| b + 1).max().unwrap_or(0);
        let mut block_shapes: Vec<Option<(usize, usize)>> = vec![None; nblocks];
        for (r, row) in cells.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                if let Some(b) = *cell {
                    let shape = (row_heights[r], col_widths[c]);
                    match block_shapes[b] {
                        None => block_shapes[b] = Some(shape),
                        Some(s) if s != shape => {
                            return Err(Error::shape(format!("block {b} used with two shapes")))
                        }
                        _ => {}
                    }
                }
            }
        }
        let block_shapes = block_shapes
            .into_iter()
            .map(|s| s.ok_or_else(|| Error::shape("unused block id")))
            .collect::<Result<_>>()?;
        Ok(Self {
            row_heights,
            col_widths,
            cells,
            block_shapes,
        })
    }

    /// Block lower-triangular Toeplitz pattern with `n` block rows/columns:
    /// cell `(r, c)` holds free block `r - c` when `r >= c`.
    pub fn lower_toeplitz(n: usize, block_rows: usize, block_cols: usize) -> Self {
        let cells = (0..n)
            .map(|r| (0..n).map(|c| (r >= c).then(|| r - c)).collect())
            .collect();
        Self::new(vec![block_rows; n], vec![block_cols; n], cells).expect("consistent")
    }

    /// Horizontal concatenation; block ids of `right` are shifted past `self`'s.
    pub fn beside(&self, right: &BlockPattern) -> Result<Self> {
        if self.row_heights != right.row_heights {
            return Err(Error::shape("row partitions differ"));
        }
        let off = self.block_shapes.len();
        let cells = self
            .cells
            .iter()
            .zip(&right.cells)
            .map(|(a, b)| a.iter().copied().chain(b.iter().map(|c| c.map(|x| x + off))).collect())
            .collect();
        let mut widths = self.col_widths.clone();
        widths.extend(&right.col_widths);
        Self::new(self.row_heights.clone(), widths, cells)
    }

    pub fn rows(&self) -> usize {
        self.row_heights.iter().sum()
    }

    pub fn cols(&self) -> usize {
        self.col_widths.iter().sum()
    }

    pub fn block_count(&self) -> usize {
        self.block_shapes.len()
    }

    /// Assembles a concrete matrix from one matrix per free block.
    pub fn instantiate(&self, f: &Field, blocks: &[Matrix]) -> Result<Matrix> {
        if blocks.len() != self.block_shapes.len()
            || blocks.iter().zip(&self.block_shapes).any(|(m, s)| m.shape() != *s)
        {
            return Err(Error::shape("blocks do not match pattern"));
        }
        let mut out = Matrix::zeros(f, self.rows(), self.cols());
        let mut r0 = 0;
        for (r, row) in self.cells.iter().enumerate() {
            let mut c0 = 0;
            for (c, cell) in row.iter().enumerate() {
                if let Some(b) = cell {
                    out.set_block(r0, c0, &blocks[*b]);
                }
                c0 += self.col_widths[c];
            }
            r0 += self.row_heights[r];
        }
        Ok(out)
    }

    pub fn random_instance(&self, f: &Field, rng: &mut SplitMix64) -> Matrix {
        let blocks: Vec<Matrix> = self
            .block_shapes
            .iter()
            .map(|&(r, c)| Matrix::from_fn(r, c, |_, _| f.random(rng)))
            .collect();
        self.instantiate(f, &blocks).expect("shapes match")
    }
}

/// Which minors a census enumerates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinorScope {
    /// Square submatrices of size `min(rows, cols)`.
    FullSize,
    /// Square submatrices of every size.
    All,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MinorCensus {
    pub total: u64,
    pub trivially_zero: u64,
    pub nonzero: u64,
    /// Minors that are not trivially zero but vanish on the instance.
    pub failures: u64,
    pub first_failure: Option<(Vec<usize>, Vec<usize>)>,
}

impl MinorCensus {
    /// Every minor that is not trivially zero is nonzero.
    pub fn all_nontrivial_nonzero(&self) -> bool {
        self.failures == 0
    }
}

pub fn minor_count(rows: usize, cols: usize, scope: MinorScope) -> u128 {
    match scope {
        MinorScope::FullSize => {
            let s = rows.min(cols);
            binomial(rows, s) * binomial(cols, s)
        }
        MinorScope::All => (1..=rows.min(cols))
            .map(|s| binomial(rows, s) * binomial(cols, s))
            .sum(),
    }
}

/// Classifies every minor in `scope` of `actual`, whose structure is `pattern`.
pub fn census(
    f: &Field,
    pattern: &BlockPattern,
    actual: &Matrix,
    scope: MinorScope,
    budget: u128,
) -> Result<MinorCensus> {
    if actual.shape() != (pattern.rows(), pattern.cols()) {
        return Err(Error::shape("instance does not match pattern"));
    }
    let (rows, cols) = actual.shape();
    let needed = minor_count(rows, cols, scope);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let aux = f.auxiliary();
    let mut rng = SplitMix64::new(INSTANCE_SEED);
    let instances: Vec<Matrix> = (0..INSTANCES)
        .map(|_| pattern.random_instance(&aux, &mut rng))
        .collect();
    let sizes: Vec<usize> = match scope {
        MinorScope::FullSize => vec![rows.min(cols)],
        MinorScope::All => (1..=rows.min(cols)).collect(),
    };
    let mut out = MinorCensus::default();
    for size in sizes {
        for rs in combinations(rows, size) {
            for cs in combinations(cols, size) {
                out.total += 1;
                let value = det(f, &actual.select(&rs, &cs))?;
                if !f.is_zero(&value) {
                    out.nonzero += 1;
                    continue;
                }
                let trivial = instances
                    .iter()
                    .all(|m| aux.is_zero(&det(&aux, &m.select(&rs, &cs)).expect("square")));
                if trivial {
                    out.trivially_zero += 1;
                } else {
                    out.failures += 1;
                    if out.first_failure.is_none() {
                        out.first_failure = Some((rs.clone(), cs.clone()));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Whether a single minor is trivially zero for the pattern.
pub fn is_trivially_zero(f: &Field, pattern: &BlockPattern, rows: &[usize], cols: &[usize]) -> bool {
    let aux = f.auxiliary();
    let mut rng = SplitMix64::new(INSTANCE_SEED);
    (0..INSTANCES).all(|_| {
        let m = pattern.random_instance(&aux, &mut rng);
        aux.is_zero(&det(&aux, &m.select(rows, cols)).expect("square"))
    })
}
