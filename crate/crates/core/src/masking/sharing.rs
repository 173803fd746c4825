use crate::gf::{Elem, FieldSpec};
use crate::masking::MaskingContext;

/// Boolean (XOR) sharing of one field element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolSharing {
    pub shares: Vec<Elem>,
}

/// Multiplicative sharing of a nonzero field element: the product of the
/// shares is the encoded value, and every share is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultSharing {
    pub shares: Vec<Elem>,
}

impl BoolSharing {
    pub fn from_shares(shares: Vec<Elem>) -> Self {
        BoolSharing { shares }
    }

    pub fn n(&self) -> usize {
        self.shares.len()
    }
}

impl MultSharing {
    pub fn from_shares(shares: Vec<Elem>) -> Self {
        debug_assert!(shares.iter().all(|&s| s != 0));
        MultSharing { shares }
    }

    pub fn n(&self) -> usize {
        self.shares.len()
    }
}

/// Encodes `x` with `n - 1` uniform shares and a final share fixing the XOR.
pub fn bool_share(x: Elem, ctx: &mut MaskingContext) -> BoolSharing {
    let n = ctx.n();
    let mut shares = Vec::with_capacity(n);
    let mut last = x;
    for _ in 1..n {
        let r = ctx.draw();
        last ^= r;
        shares.push(r);
    }
    ctx.charge(n as u64 - 1);
    shares.push(last);
    BoolSharing { shares }
}

/// Encodes a single bit with one-bit shares.
pub fn bool_share_bit(bit: bool, ctx: &mut MaskingContext) -> BoolSharing {
    let n = ctx.n();
    let mut shares = Vec::with_capacity(n);
    let mut last = bit as Elem;
    for _ in 1..n {
        let r = ctx.draw_bits(1);
        last ^= r;
        shares.push(r);
    }
    ctx.charge(n as u64 - 1);
    shares.push(last);
    BoolSharing { shares }
}

/// Recombines a Boolean sharing. Test and oracle use only: the masked paths
/// release values exclusively through [`full_add`](crate::masking::full_add).
pub fn bool_unshare(s: &BoolSharing) -> Elem {
    s.shares.iter().fold(0, |acc, &v| acc ^ v)
}

/// Encodes nonzero `x` with `n - 1` uniform nonzero shares.
pub fn mult_share(x: Elem, ctx: &mut MaskingContext) -> MultSharing {
    assert!(x != 0, "multiplicative sharing of zero");
    let n = ctx.n();
    let mut shares = Vec::with_capacity(n);
    let mut prod = 1;
    for _ in 1..n {
        let r = ctx.draw_nonzero();
        prod = ctx.field().mul(prod, r);
        shares.push(r);
    }
    let last = ctx.field().mul(x, ctx.field().inv_nonzero(prod));
    ctx.charge(2 * (n as u64 - 1) + 1);
    shares.push(last);
    MultSharing { shares }
}

/// Product of the shares.
pub fn mult_unshare(m: &MultSharing, field: &FieldSpec) -> Elem {
    m.shares.iter().fold(1, |acc, &v| field.mul(acc, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unshare_examples() {
        assert_eq!(bool_unshare(&BoolSharing::from_shares(vec![3, 6])), 5);
        assert_eq!(bool_unshare(&BoolSharing::from_shares(vec![0x2A, 0x2A])), 0);
        assert_eq!(bool_unshare(&BoolSharing::from_shares(vec![7, 0, 0])), 7);
        let f = FieldSpec::gf16();
        assert_eq!(mult_unshare(&MultSharing::from_shares(vec![1, 1]), &f), 1);
        assert_eq!(mult_unshare(&MultSharing::from_shares(vec![2, 9]), &f), 1);
        assert_eq!(mult_unshare(&MultSharing::from_shares(vec![0xB]), &f), 0xB);
    }

    #[test]
    fn zero_encodes_as_equal_shares() {
        let mut ctx = MaskingContext::new(2, FieldSpec::gf256(), 3).unwrap();
        let s = bool_share(0, &mut ctx);
        assert_eq!(s.shares[0], s.shares[1]);
    }

    #[test]
    fn roundtrips() {
        let f = FieldSpec::gf256();
        for n in 2..=5 {
            let mut ctx = MaskingContext::new(n, f.clone(), n as u64).unwrap();
            for x in 0..=255u8 {
                let s = bool_share(x, &mut ctx);
                assert_eq!(s.n(), n);
                assert_eq!(bool_unshare(&s), x);
                if x != 0 {
                    let m = mult_share(x, &mut ctx);
                    assert!(m.shares.iter().all(|&v| v != 0));
                    assert_eq!(mult_unshare(&m, &f), x);
                }
            }
            for bit in [false, true] {
                let b = bool_share_bit(bit, &mut ctx);
                assert!(b.shares.iter().all(|&v| v <= 1));
                assert_eq!(bool_unshare(&b), bit as u8);
            }
        }
    }
}
