//! Share-level gadgets on single coefficients.
//!
//! Every gadget charges its unit operations to the context and reports each
//! freshly assigned share value to the attached recorder, if any. Plain share
//! copies are charged where the cost derivations charge them but not probed:
//! a copy carries no value that was not already observable.

use crate::gf::{Elem, FieldSpec};
use crate::masking::{BoolSharing, MaskingContext, MultSharing};

#[inline]
fn width_mask(width: u32) -> Elem {
    ((1u16 << width) - 1) as Elem
}

/// Number of halving steps SecNonzero needs on a `w`-bit word.
pub fn nonzero_folds(w: u32) -> u32 {
    w.next_power_of_two().trailing_zeros()
}

pub(crate) fn refresh_in(y: &mut [Elem], ctx: &mut MaskingContext) {
    let n = y.len();
    ctx.charge(n as u64);
    for i in 1..n {
        let r = ctx.draw();
        ctx.probe("r", &[i], r);
        y[0] ^= r;
        ctx.probe("y0", &[i], y[0]);
        y[i] ^= r;
        ctx.probe("y", &[i], y[i]);
        ctx.charge(2);
    }
}

/// Re-randomizes a sharing with `n - 1` fresh masks, all absorbed by share 0.
pub fn refresh(s: &BoolSharing, ctx: &mut MaskingContext) -> BoolSharing {
    let mut y = s.shares.clone();
    ctx.enter("refresh", 0);
    refresh_in(&mut y, ctx);
    ctx.leave();
    BoolSharing { shares: y }
}

/// One fresh mask per share pair, on `width`-bit words.
pub(crate) fn strong_refresh_in(y: &mut [Elem], width: u32, ctx: &mut MaskingContext) {
    let n = y.len();
    for i in 0..n {
        for j in i + 1..n {
            let r = ctx.draw_bits(width);
            ctx.probe("r", &[i, j], r);
            y[i] ^= r;
            ctx.probe("yi", &[i, j], y[i]);
            y[j] ^= r;
            ctx.probe("yj", &[i, j], y[j]);
            ctx.charge(2);
        }
    }
}

pub fn strong_refresh(s: &BoolSharing, ctx: &mut MaskingContext) -> BoolSharing {
    let mut y = s.shares.clone();
    let w = ctx.w();
    ctx.enter("srefresh", 0);
    strong_refresh_in(&mut y, w, ctx);
    ctx.leave();
    BoolSharing { shares: y }
}

/// Unmasks a sharing after a strong refresh. The result is public.
pub fn full_add(s: &BoolSharing, ctx: &mut MaskingContext) -> Elem {
    let mut y = s.shares.clone();
    let w = ctx.w();
    ctx.enter("fulladd", 0);
    strong_refresh_in(&mut y, w, ctx);
    let n = y.len();
    let mut acc = y[0];
    for (i, &v) in y.iter().enumerate().skip(1) {
        acc ^= v;
        // the last partial sum is the public output itself
        if i + 1 < n {
            ctx.probe("acc", &[i], acc);
        }
    }
    ctx.charge(n as u64 - 1);
    ctx.leave();
    acc
}

/// ISW product of two sharings under `prod`, with `width`-bit masks.
pub(crate) fn isw(
    a: &[Elem],
    b: &[Elem],
    width: u32,
    prod: impl Fn(Elem, Elem) -> Elem,
    ctx: &mut MaskingContext,
) -> Vec<Elem> {
    let n = a.len();
    debug_assert_eq!(n, b.len());
    let mut c = Vec::with_capacity(n);
    for i in 0..n {
        let v = prod(a[i], b[i]);
        ctx.probe("aibi", &[i], v);
        c.push(v);
    }
    ctx.charge(n as u64);
    for i in 0..n {
        for j in i + 1..n {
            let r = ctx.draw_bits(width);
            ctx.probe("r", &[i, j], r);
            let p = prod(a[i], b[j]);
            ctx.probe("aibj", &[i, j], p);
            let t = r ^ p;
            ctx.probe("t", &[i, j], t);
            let q = prod(a[j], b[i]);
            ctx.probe("ajbi", &[i, j], q);
            let rji = t ^ q;
            ctx.probe("rji", &[i, j], rji);
            c[i] ^= r;
            ctx.probe("ci", &[i, j], c[i]);
            c[j] ^= rji;
            ctx.probe("cj", &[i, j], c[j]);
            ctx.charge(6);
        }
    }
    c
}

/// Masked field multiplication.
pub fn sec_mult(x: &BoolSharing, y: &BoolSharing, ctx: &mut MaskingContext) -> BoolSharing {
    let f = ctx.field().clone();
    let w = f.w();
    ctx.enter("secmult", 0);
    let c = isw(&x.shares, &y.shares, w, |a, b| f.mul(a, b), ctx);
    ctx.leave();
    BoolSharing { shares: c }
}

/// Masked bitwise AND of `w`-bit words.
pub fn sec_and(x: &BoolSharing, y: &BoolSharing, ctx: &mut MaskingContext) -> BoolSharing {
    let w = ctx.w();
    ctx.enter("secand", 0);
    let c = isw(&x.shares, &y.shares, w, |a, b| a & b, ctx);
    ctx.leave();
    BoolSharing { shares: c }
}

/// Complements the encoded bit by flipping the low bit of share 0.
pub fn sec_not(x: &BoolSharing, ctx: &mut MaskingContext) -> BoolSharing {
    let mut y = x.shares.clone();
    y[0] ^= 1;
    ctx.charge(1);
    ctx.probe("not", &[0], y[0]);
    BoolSharing { shares: y }
}

/// OR as NOT(AND(NOT a, NOT b)) on `width`-bit words.
pub(crate) fn sec_or_in(a: &[Elem], b: &[Elem], width: u32, ctx: &mut MaskingContext) -> Vec<Elem> {
    let n = a.len();
    let m = width_mask(width);
    let mut na = a.to_vec();
    na[0] ^= m;
    ctx.probe("na", &[0], na[0]);
    let mut nb = b.to_vec();
    nb[0] ^= m;
    ctx.probe("nb", &[0], nb[0]);
    ctx.charge(2 * n as u64);
    let mut c = isw(&na, &nb, width, |u, v| u & v, ctx);
    c[0] ^= m;
    ctx.probe("or", &[0], c[0]);
    ctx.charge(1);
    c
}

pub fn sec_or(x: &BoolSharing, y: &BoolSharing, ctx: &mut MaskingContext) -> BoolSharing {
    let w = ctx.w();
    ctx.enter("secor", 0);
    let c = sec_or_in(&x.shares, &y.shares, w, ctx);
    ctx.leave();
    BoolSharing { shares: c }
}

/// One-bit sharing of `[x != 0]`, by OR-folding the word in halves.
///
/// Odd widths are zero-padded to the next power of two. Each fold refreshes
/// and ORs words of the halved width only.
pub fn sec_nonzero(x: &BoolSharing, ctx: &mut MaskingContext) -> BoolSharing {
    let n = x.n();
    ctx.enter("secnz", 0);
    let mut t = x.shares.clone();
    ctx.charge(n as u64 + 1);
    let mut len = ctx.w().next_power_of_two() / 2;
    let mut level = 0;
    while len >= 1 {
        ctx.enter("fold", level);
        let m = width_mask(len);
        let mut l: Vec<Elem> = t.iter().map(|&v| v >> len).collect();
        strong_refresh_in(&mut l, len, ctx);
        let r: Vec<Elem> = t.iter().map(|&v| v & m).collect();
        for (i, &v) in r.iter().enumerate() {
            ctx.probe("low", &[i], v);
        }
        ctx.charge(n as u64);
        t = sec_or_in(&l, &r, len, ctx);
        len /= 2;
        ctx.charge(1);
        ctx.leave();
        level += 1;
    }
    ctx.leave();
    BoolSharing { shares: t }
}

/// Shared core of B2M and B2Minv: replaces the additive shares one at a
/// time by multiplicative masks `mu_2..mu_n`, accumulating the masked value in
/// share 0. Returns `(x * prod mu, [mu_2..mu_n])`.
fn b2m_core(x: &BoolSharing, ctx: &mut MaskingContext) -> (Elem, Vec<Elem>) {
    let f: FieldSpec = ctx.field().clone();
    let n = x.n();
    let mut xs = x.shares.clone();
    let mut acc = xs[0];
    ctx.charge(1);
    let mut mus = Vec::with_capacity(n - 1);
    for j in 1..n {
        let mu = ctx.draw_nonzero();
        ctx.probe("mu", &[j], mu);
        acc = f.mul(acc, mu);
        ctx.probe("acc", &[j], acc);
        ctx.charge(1);
        // shares 1..n-j are folded in and re-randomized
        for k in 1..n - j {
            let r = ctx.draw();
            ctx.probe("r", &[j, k], r);
            xs[k] = f.mul(mu, xs[k]);
            ctx.probe("xk", &[j, k], xs[k]);
            xs[k] ^= r;
            ctx.probe("xkr", &[j, k], xs[k]);
            acc ^= xs[k];
            ctx.probe("acck", &[j, k], acc);
            xs[k] = r;
            ctx.charge(4);
        }
        let last = n - j;
        xs[last] = f.mul(xs[last], mu);
        ctx.probe("xl", &[j], xs[last]);
        acc ^= xs[last];
        ctx.probe("accl", &[j], acc);
        ctx.charge(2);
        mus.push(mu);
    }
    debug_assert!(acc != 0, "B2M on a sharing of zero");
    (acc, mus)
}

/// Boolean to multiplicative conversion. The input must encode a nonzero
/// value; this is the caller's obligation and is only checked in debug builds.
pub fn b2m(x: &BoolSharing, ctx: &mut MaskingContext) -> MultSharing {
    let f = ctx.field().clone();
    ctx.enter("b2m", 0);
    let (acc, mus) = b2m_core(x, ctx);
    let mut out = Vec::with_capacity(x.n());
    out.push(acc);
    for (j, &mu) in mus.iter().enumerate() {
        let p = f.inv_nonzero(mu);
        ctx.probe("p", &[j + 1], p);
        out.push(p);
    }
    ctx.charge(mus.len() as u64);
    ctx.leave();
    MultSharing { shares: out }
}

/// Multiplicative sharing of the inverse of a nonzero Boolean-shared value.
///
/// Fused form: the masks themselves become shares `2..n` and only the
/// accumulated share is inverted.
pub fn b2minv(x: &BoolSharing, ctx: &mut MaskingContext) -> MultSharing {
    let f = ctx.field().clone();
    ctx.enter("b2minv", 0);
    let (acc, mus) = b2m_core(x, ctx);
    ctx.charge(mus.len() as u64);
    let p0 = f.inv_nonzero(acc);
    ctx.probe("p0", &[0], p0);
    ctx.charge(1);
    let mut out = Vec::with_capacity(x.n());
    out.push(p0);
    out.extend_from_slice(&mus);
    ctx.leave();
    MultSharing { shares: out }
}
