//! Row-level gadgets: conditional addition, scalar multiplication by a
//! multiplicatively shared scalar, and multiply-and-subtract.
//!
//! Coefficients are processed in ascending order so that a fixed random tape
//! always produces the same execution.

use crate::error::{Error, Result};
use crate::gf::Elem;
use crate::masking::{
    bool_share, bool_unshare, isw, refresh_in, strong_refresh_in, BoolSharing, MaskingContext,
    MultSharing,
};

/// Boolean sharing of a row vector, stored share-major: `shares[i][j]` is
/// share `i` of coefficient `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedRow {
    pub shares: Vec<Vec<Elem>>,
}

impl SharedRow {
    pub fn from_shares(shares: Vec<Vec<Elem>>) -> Result<Self> {
        let l = shares.first().map_or(0, Vec::len);
        if let Some(bad) = shares.iter().find(|s| s.len() != l) {
            return Err(Error::LengthMismatch {
                left: l,
                right: bad.len(),
            });
        }
        Ok(SharedRow { shares })
    }

    pub fn share(values: &[Elem], ctx: &mut MaskingContext) -> Self {
        let n = ctx.n();
        let mut shares = vec![Vec::with_capacity(values.len()); n];
        for &v in values {
            let s = bool_share(v, ctx);
            for (dst, src) in shares.iter_mut().zip(s.shares) {
                dst.push(src);
            }
        }
        SharedRow { shares }
    }

    /// Recombined values. Test and oracle use only.
    pub fn unshare(&self) -> Vec<Elem> {
        (0..self.len())
            .map(|j| bool_unshare(&self.column(j)))
            .collect()
    }

    pub fn n(&self) -> usize {
        self.shares.len()
    }

    pub fn len(&self) -> usize {
        self.shares.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sharing of coefficient `j`.
    pub fn column(&self, j: usize) -> BoolSharing {
        BoolSharing::from_shares(self.shares.iter().map(|s| s[j]).collect())
    }

    fn column_vec(&self, j: usize) -> Vec<Elem> {
        self.shares.iter().map(|s| s[j]).collect()
    }

    fn set_column(&mut self, j: usize, col: &[Elem]) {
        for (s, &v) in self.shares.iter_mut().zip(col) {
            s[j] = v;
        }
    }
}

fn check_rows(x: &SharedRow, y: &SharedRow) -> Result<()> {
    if x.n() != y.n() {
        return Err(Error::ShareCount(y.n()));
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(())
}

/// `x + b*y` coefficient-wise, where `b` is a shared bit.
///
/// Each share of `b` is sign-extended to a full word locally; the extended
/// shares still XOR to the all-zero or all-one word.
pub fn sec_cond_add(
    x: &SharedRow,
    y: &SharedRow,
    b: &BoolSharing,
    ctx: &mut MaskingContext,
) -> Result<SharedRow> {
    check_rows(x, y)?;
    if b.n() != x.n() {
        return Err(Error::ShareCount(b.n()));
    }
    let n = x.n();
    let w = ctx.w();
    let mask = ctx.field().mask();
    ctx.enter("condadd", 0);
    let ext: Vec<Elem> = b
        .shares
        .iter()
        .map(|&s| (0 as Elem).wrapping_sub(s & 1) & mask)
        .collect();
    for (i, &e) in ext.iter().enumerate() {
        ctx.probe("bext", &[i], e);
    }
    let mut out = x.clone();
    for j in 0..x.len() {
        ctx.enter("coef", j);
        let t = isw(&ext, &y.column_vec(j), w, |u, v| u & v, ctx);
        let mut s = x.column_vec(j);
        for i in 0..n {
            s[i] ^= t[i];
            ctx.probe("s", &[i], s[i]);
        }
        ctx.charge(n as u64);
        strong_refresh_in(&mut s, w, ctx);
        out.set_column(j, &s);
        ctx.leave();
    }
    ctx.leave();
    Ok(out)
}

/// `p * x` coefficient-wise, multiplying by one share of `p` at a time and
/// refreshing after each round.
pub fn sec_scalar_mult(
    x: &SharedRow,
    p: &MultSharing,
    ctx: &mut MaskingContext,
) -> Result<SharedRow> {
    if x.is_empty() {
        return Err(Error::LengthZero);
    }
    if p.n() != x.n() {
        return Err(Error::ShareCount(p.n()));
    }
    let n = x.n();
    let f = ctx.field().clone();
    ctx.enter("scalarmult", 0);
    let mut z = x.clone();
    for (i, &pi) in p.shares.iter().enumerate() {
        for j in 0..z.len() {
            ctx.enter("round", i * z.len() + j);
            let mut col = z.column_vec(j);
            for (k, v) in col.iter_mut().enumerate() {
                *v = f.mul(pi, *v);
                ctx.probe("pz", &[k], *v);
            }
            ctx.charge(n as u64);
            refresh_in(&mut col, ctx);
            z.set_column(j, &col);
            ctx.leave();
        }
    }
    ctx.leave();
    Ok(z)
}

/// `y - c*x` coefficient-wise (XOR in characteristic two). `c` may be zero.
pub fn sec_mult_sub(
    x: &SharedRow,
    y: &SharedRow,
    c: &BoolSharing,
    ctx: &mut MaskingContext,
) -> Result<SharedRow> {
    check_rows(x, y)?;
    if c.n() != x.n() {
        return Err(Error::ShareCount(c.n()));
    }
    let n = x.n();
    let f = ctx.field().clone();
    let w = f.w();
    ctx.enter("multsub", 0);
    let mut out = y.clone();
    for j in 0..x.len() {
        ctx.enter("coef", j);
        let t = isw(&c.shares, &x.column_vec(j), w, |u, v| f.mul(u, v), ctx);
        let mut z = y.column_vec(j);
        for i in 0..n {
            z[i] ^= t[i];
            ctx.probe("z", &[i], z[i]);
        }
        ctx.charge(n as u64);
        out.set_column(j, &z);
        ctx.leave();
    }
    ctx.leave();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldSpec;
    use crate::masking::{bool_share_bit, mult_share};

    fn delta<R>(c: &mut MaskingContext, op: impl FnOnce(&mut MaskingContext) -> R) -> (u64, u64) {
        let before = c.counters();
        op(c);
        let d = c.counters().delta(&before);
        (d.ops, d.rng_bits)
    }

    #[test]
    fn frozen_counter_examples() {
        let f = FieldSpec::gf256();
        let mut c = MaskingContext::new(2, f.clone(), 1).unwrap();
        let x = SharedRow::share(&[7], &mut c);
        let y = SharedRow::share(&[9], &mut c);
        let b = bool_share_bit(true, &mut c);
        assert_eq!(delta(&mut c, |c| sec_cond_add(&x, &y, &b, c).unwrap()), (14, 16));
        let s = bool_share(3, &mut c);
        assert_eq!(delta(&mut c, |c| sec_mult_sub(&x, &y, &s, c).unwrap()).0, 11);

        let mut c = MaskingContext::new(3, f.clone(), 2).unwrap();
        let x = SharedRow::share(&[1, 2, 3, 4, 5], &mut c);
        let p = mult_share(0x53, &mut c);
        assert_eq!(delta(&mut c, |c| sec_scalar_mult(&x, &p, c).unwrap()).1, 240);
    }

    #[test]
    fn errors() {
        let f = FieldSpec::gf16();
        let mut c = MaskingContext::new(2, f, 3).unwrap();
        let x = SharedRow::share(&[1, 2], &mut c);
        let y = SharedRow::share(&[1], &mut c);
        let b = bool_share_bit(false, &mut c);
        assert_eq!(
            sec_cond_add(&x, &y, &b, &mut c).unwrap_err(),
            Error::LengthMismatch { left: 2, right: 1 }
        );
        assert!(matches!(
            sec_mult_sub(&x, &y, &b, &mut c),
            Err(Error::LengthMismatch { .. })
        ));
        let empty = SharedRow::share(&[], &mut c);
        let p = mult_share(1, &mut c);
        assert_eq!(sec_scalar_mult(&empty, &p, &mut c).unwrap_err(), Error::LengthZero);
        assert!(SharedRow::from_shares(vec![vec![1, 2], vec![3]]).is_err());
    }

    #[test]
    fn edge_cases() {
        let f = FieldSpec::gf256();
        let mut c = MaskingContext::new(3, f.clone(), 4).unwrap();
        let xv = [0x10, 0xFF, 0x00, 0x37];
        let yv = [0x01, 0x0F, 0xAA, 0x37];
        let x = SharedRow::share(&xv, &mut c);
        let y = SharedRow::share(&yv, &mut c);
        let xor: Vec<Elem> = xv.iter().zip(&yv).map(|(a, b)| a ^ b).collect();

        let b0 = bool_share_bit(false, &mut c);
        let b1 = bool_share_bit(true, &mut c);
        assert_eq!(sec_cond_add(&x, &y, &b0, &mut c).unwrap().unshare(), xv);
        assert_eq!(sec_cond_add(&x, &y, &b1, &mut c).unwrap().unshare(), xor);

        let c0 = bool_share(0, &mut c);
        let c1 = bool_share(1, &mut c);
        assert_eq!(sec_mult_sub(&x, &y, &c0, &mut c).unwrap().unshare(), yv);
        assert_eq!(sec_mult_sub(&x, &y, &c1, &mut c).unwrap().unshare(), xor);

        let one = MultSharing::from_shares(vec![1; 3]);
        assert_eq!(sec_scalar_mult(&x, &one, &mut c).unwrap().unshare(), xv);
        let p = mult_share(0xCA, &mut c);
        let want: Vec<Elem> = xv.iter().map(|&v| f.mul(0xCA, v)).collect();
        assert_eq!(sec_scalar_mult(&x, &p, &mut c).unwrap().unshare(), want);
    }
}
