//! Reference Gaussian elimination and the masked solver built from the row
//! gadgets.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::{Elem, FieldSpec};
use crate::masking::{
    b2minv, bool_share, bool_unshare, full_add, sec_nonzero, sec_not, strong_refresh, BoolSharing,
    MaskingContext,
};
use crate::probe::Recorder;
use crate::rowops::{sec_cond_add, sec_mult_sub, sec_scalar_mult, SharedRow};

/// A square system `A x = b` over a binary field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    pub field: FieldSpec,
    pub a: Vec<Vec<Elem>>,
    pub b: Vec<Elem>,
}

impl LinearSystem {
    pub fn new(field: FieldSpec, a: Vec<Vec<Elem>>, b: Vec<Elem>) -> Result<Self> {
        let m = a.len();
        if m == 0 {
            return Err(Error::Shape("empty system".into()));
        }
        if let Some(row) = a.iter().find(|r| r.len() != m) {
            return Err(Error::Shape(format!("row of length {} in a {m}x{m} matrix", row.len())));
        }
        if b.len() != m {
            return Err(Error::Shape(format!("b has {} entries, expected {m}", b.len())));
        }
        let q = field.q();
        if let Some(&v) = a.iter().flatten().chain(&b).find(|&&v| !field.contains(v as u32)) {
            return Err(Error::NotInField { value: v as u32, q });
        }
        Ok(LinearSystem { field, a, b })
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    /// `A x`.
    pub fn apply(&self, x: &[Elem]) -> Vec<Elem> {
        self.a
            .iter()
            .map(|row| {
                row.iter()
                    .zip(x)
                    .fold(0, |acc, (&a, &v)| acc ^ self.field.mul(a, v))
            })
            .collect()
    }

    /// `[A | b]` as rows of length `m + 1`.
    pub fn augmented(&self) -> Vec<Vec<Elem>> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, &bi)| {
                let mut r = row.clone();
                r.push(bi);
                r
            })
            .collect()
    }

    /// Uniformly random `A` and `b`; may be singular.
    pub fn random(field: &FieldSpec, m: usize, rng: &mut impl Rng) -> Self {
        let q = field.q();
        let mut draw = || rng.random_range(0..q) as Elem;
        let a = (0..m).map(|_| (0..m).map(|_| draw()).collect()).collect();
        let b = (0..m).map(|_| draw()).collect();
        LinearSystem {
            field: field.clone(),
            a,
            b,
        }
    }

    /// Random invertible `A` (by rejection) and random `b`.
    pub fn random_invertible(field: &FieldSpec, m: usize, rng: &mut impl Rng) -> Self {
        loop {
            let sys = Self::random(field, m, rng);
            if rank(field, &sys.a) == m {
                return sys;
            }
        }
    }

    /// `A = B C` with inner dimension `m - 1`, so `rank(A) < m`.
    pub fn random_singular(field: &FieldSpec, m: usize, rng: &mut impl Rng) -> Self {
        let q = field.q();
        let r = m.saturating_sub(1);
        let mut draw = || rng.random_range(0..q) as Elem;
        let bm: Vec<Vec<Elem>> = (0..m).map(|_| (0..r).map(|_| draw()).collect()).collect();
        let cm: Vec<Vec<Elem>> = (0..r).map(|_| (0..m).map(|_| draw()).collect()).collect();
        let a = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| (0..r).fold(0, |acc, k| acc ^ field.mul(bm[i][k], cm[k][j])))
                    .collect()
            })
            .collect();
        let b = (0..m).map(|_| draw()).collect();
        LinearSystem {
            field: field.clone(),
            a,
            b,
        }
    }
}

/// Rank by plain elimination with row swaps; used only to build test inputs.
pub fn rank(field: &FieldSpec, a: &[Vec<Elem>]) -> usize {
    let mut t: Vec<Vec<Elem>> = a.to_vec();
    let rows = t.len();
    let cols = t.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| t[i][c] != 0) else {
            continue;
        };
        t.swap(r, p);
        let inv = field.inv_nonzero(t[r][c]);
        for i in 0..rows {
            if i != r && t[i][c] != 0 {
                let f = field.mul(t[i][c], inv);
                for k in c..cols {
                    let v = field.mul(f, t[r][k]);
                    t[i][k] ^= v;
                }
            }
        }
        r += 1;
    }
    r
}

/// How many rows below the pivot Step 1 may add into the pivot row.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PivotTries {
    /// Every row below, as in the full algorithm.
    #[default]
    All,
    /// Only the next `k` rows. Cheaper, but fails on some invertible inputs.
    Limit(usize),
}

impl PivotTries {
    fn end(self, j: usize, m: usize) -> usize {
        match self {
            PivotTries::All => m,
            PivotTries::Limit(k) => (j + 1 + k).min(m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Solved { x: Vec<Elem> },
    /// The pivot in column `at` (0-based) stayed zero.
    Singular { at: usize },
}

impl SolveOutcome {
    /// The public pivot flags: all set on success, otherwise set up to the
    /// failing column, which is clear.
    pub fn pivot_flags(&self, m: usize) -> Vec<bool> {
        match self {
            SolveOutcome::Solved { .. } => vec![true; m],
            SolveOutcome::Singular { at } => (0..=*at).map(|j| j < *at).collect(),
        }
    }
}

/// Unmasked Gaussian elimination with back substitution.
pub fn gaussian_elimination(sys: &LinearSystem, tries: PivotTries) -> SolveOutcome {
    ge_impl(sys, tries, None)
}

/// As [`gaussian_elimination`], recording every intermediate value with the
/// same data-independent layout a masked run would have for an invertible
/// input. Used to show that the leakage tests can detect unmasked leakage.
pub fn gaussian_elimination_traced(
    sys: &LinearSystem,
    tries: PivotTries,
    rec: &mut Recorder,
) -> SolveOutcome {
    ge_impl(sys, tries, Some(rec))
}

fn ge_impl(sys: &LinearSystem, tries: PivotTries, mut rec: Option<&mut Recorder>) -> SolveOutcome {
    let f = &sys.field;
    let m = sys.m();
    let mut t = sys.augmented();
    let mut note = |tag: &'static str, idx: &[usize], v: Elem| {
        if let Some(r) = rec.as_deref_mut() {
            r.record(tag, idx, v);
        }
    };
    for j in 0..m {
        for k in j + 1..tries.end(j, m) {
            note("pivot", &[j, k], t[j][j]);
            if t[j][j] == 0 {
                for c in j..=m {
                    t[j][c] ^= t[k][c];
                }
            }
            for c in j..=m {
                note("row", &[j, k, c], t[j][c]);
            }
        }
        if t[j][j] == 0 {
            return SolveOutcome::Singular { at: j };
        }
        let p = f.inv_nonzero(t[j][j]);
        note("inv", &[j], p);
        for c in j..=m {
            t[j][c] = f.mul(p, t[j][c]);
            note("scaled", &[j, c], t[j][c]);
        }
        for k in j + 1..m {
            let s = t[k][j];
            note("factor", &[j, k], s);
            for c in j..=m {
                let v = f.mul(s, t[j][c]);
                t[k][c] ^= v;
                note("elim", &[j, k, c], t[k][c]);
            }
        }
    }
    for j in (1..m).rev() {
        for k in 0..j {
            let v = f.mul(t[k][j], t[j][m]);
            t[k][m] ^= v;
            note("back", &[j, k], t[k][m]);
        }
    }
    SolveOutcome::Solved {
        x: t.iter().map(|row| row[m]).collect(),
    }
}

/// Boolean sharing of an augmented `m x (m + 1)` system, one dense row-major
/// matrix per share.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedMatrix {
    pub m: usize,
    pub shares: Vec<Vec<Elem>>,
}

impl SharedMatrix {
    pub fn share(sys: &LinearSystem, ctx: &mut MaskingContext) -> Self {
        let m = sys.m();
        let n = ctx.n();
        let mut shares = vec![Vec::with_capacity(m * (m + 1)); n];
        for row in sys.augmented() {
            for v in row {
                let s = bool_share(v, ctx);
                for (dst, src) in shares.iter_mut().zip(s.shares) {
                    dst.push(src);
                }
            }
        }
        SharedMatrix { m, shares }
    }

    pub fn n(&self) -> usize {
        self.shares.len()
    }

    fn width(&self) -> usize {
        self.m + 1
    }

    fn check(&self, n: usize) -> Result<()> {
        let cells = self.m * self.width();
        if self.m == 0 || self.shares.len() != n || self.shares.iter().any(|s| s.len() != cells) {
            return Err(Error::Shape(format!(
                "expected {n} shares of a {}x{} matrix",
                self.m,
                self.width()
            )));
        }
        Ok(())
    }

    /// Recombined augmented matrix. Test and oracle use only.
    pub fn unshare(&self) -> Vec<Vec<Elem>> {
        (0..self.m)
            .map(|r| (0..self.width()).map(|c| bool_unshare(&self.cell(r, c))).collect())
            .collect()
    }

    pub fn cell(&self, r: usize, c: usize) -> BoolSharing {
        let idx = r * self.width() + c;
        BoolSharing::from_shares(self.shares.iter().map(|s| s[idx]).collect())
    }

    /// Row `r` from column `from` through the augmented column.
    pub fn row_tail(&self, r: usize, from: usize) -> SharedRow {
        let lo = r * self.width() + from;
        let hi = (r + 1) * self.width();
        SharedRow {
            shares: self.shares.iter().map(|s| s[lo..hi].to_vec()).collect(),
        }
    }

    pub fn set_row_tail(&mut self, r: usize, from: usize, row: &SharedRow) {
        let lo = r * self.width() + from;
        for (dst, src) in self.shares.iter_mut().zip(&row.shares) {
            dst[lo..lo + src.len()].copy_from_slice(src);
        }
    }
}

/// Masked reduction to row-echelon form with unit pivots.
///
/// Returns the public pivot flags. On a zero pivot the flags end with
/// `false` and the matrix is left partially reduced; no further work is done.
pub fn sec_row_ech(
    t: &mut SharedMatrix,
    tries: PivotTries,
    ctx: &mut MaskingContext,
) -> Result<Vec<bool>> {
    t.check(ctx.n())?;
    let m = t.m;
    let mut flags = Vec::with_capacity(m);
    for j in 0..m {
        ctx.enter("col", j);
        for k in j + 1..tries.end(j, m) {
            ctx.enter("try", k);
            let z = sec_nonzero(&t.cell(j, j), ctx);
            let z = sec_not(&z, ctx);
            let s = sec_cond_add(&t.row_tail(j, j), &t.row_tail(k, j), &z, ctx)?;
            t.set_row_tail(j, j, &s);
            ctx.leave();
        }

        let nz = sec_nonzero(&t.cell(j, j), ctx);
        let c = full_add(&nz, ctx);
        ctx.charge(1);
        flags.push(c != 0);
        if c == 0 {
            ctx.leave();
            return Ok(flags);
        }

        let p = b2minv(&t.cell(j, j), ctx);
        let pivot_row = sec_scalar_mult(&t.row_tail(j, j), &p, ctx)?;
        t.set_row_tail(j, j, &pivot_row);

        for k in j + 1..m {
            ctx.enter("elim", k);
            let s = strong_refresh(&t.cell(k, j), ctx);
            let r = sec_mult_sub(&pivot_row, &t.row_tail(k, j), &s, ctx)?;
            t.set_row_tail(k, j, &r);
            ctx.leave();
        }
        ctx.leave();
    }
    Ok(flags)
}

/// Masked back substitution on a reduced system. Each solution entry is
/// released through `full_add` and then used publicly.
pub fn sec_back_sub(t: &SharedMatrix, ctx: &mut MaskingContext) -> Result<Vec<Elem>> {
    t.check(ctx.n())?;
    let m = t.m;
    let n = ctx.n();
    let f = ctx.field().clone();
    let mut b: Vec<BoolSharing> = (0..m).map(|k| t.cell(k, m)).collect();
    let mut x = vec![0; m];
    for j in (1..m).rev() {
        ctx.enter("back", j);
        x[j] = full_add(&b[j], ctx);
        for (k, bk) in b.iter_mut().enumerate().take(j) {
            let a = t.cell(k, j);
            for i in 0..n {
                let v = f.mul(x[j], a.shares[i]);
                ctx.probe("xa", &[k, i], v);
                bk.shares[i] ^= v;
                ctx.probe("b", &[k, i], bk.shares[i]);
            }
            ctx.charge(2 * n as u64);
        }
        ctx.leave();
    }
    ctx.enter("back", 0);
    x[0] = full_add(&b[0], ctx);
    ctx.leave();
    Ok(x)
}

/// Shares the system, reduces it, and back-substitutes.
pub fn masked_solve(
    sys: &LinearSystem,
    tries: PivotTries,
    ctx: &mut MaskingContext,
) -> Result<SolveOutcome> {
    if ctx.field() != &sys.field {
        return Err(Error::Shape(format!(
            "system over GF({}) but context over GF({})",
            sys.field.q(),
            ctx.field().q()
        )));
    }
    let mut t = SharedMatrix::share(sys, ctx);
    let flags = sec_row_ech(&mut t, tries, ctx)?;
    if flags.last() == Some(&false) {
        return Ok(SolveOutcome::Singular {
            at: flags.len() - 1,
        });
    }
    Ok(SolveOutcome::Solved {
        x: sec_back_sub(&t, ctx)?,
    })
}
