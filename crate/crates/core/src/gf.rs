//! Arithmetic in the binary extension fields GF(2^w), 1 <= w <= 8.
//!
//! Elements are plain `u8` values in `[0, 2^w)`. Addition is XOR; multiplication
//! is a carryless product reduced modulo the field polynomial. A [`FieldSpec`]
//! validates its polynomial once and then serves multiplication and inversion
//! from precomputed tables, so it is cheap to clone and share between threads.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A field element. Always `< q` for the field it belongs to.
pub type Elem = u8;

/// x^8 + x^4 + x^3 + x + 1
pub const POLY_GF256: u16 = 0x11B;
/// x^4 + x + 1
pub const POLY_GF16: u16 = 0x13;
/// x^3 + x + 1
pub const POLY_GF8: u16 = 0xB;
/// x^5 + x^2 + 1
pub const POLY_GF32: u16 = 0x25;
/// x^7 + x + 1
pub const POLY_GF128: u16 = 0x83;

struct Tables {
    mul: Vec<u8>,
    inv: Vec<u8>,
}

/// A validated binary field GF(2^w).
#[derive(Clone)]
pub struct FieldSpec {
    w: u32,
    poly: u16,
    tables: Arc<Tables>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("w", &self.w)
            .field("poly", &format_args!("{:#x}", self.poly))
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.w == other.w && self.poly == other.poly
    }
}

impl Eq for FieldSpec {}

fn degree(p: u32) -> i32 {
    31 - p.leading_zeros() as i32
}

/// Remainder of `a` modulo `b` as polynomials over GF(2).
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=deg/2.
fn is_irreducible(poly: u32) -> bool {
    let d = degree(poly);
    if d < 1 {
        return false;
    }
    for divisor in 2u32..(1 << (d / 2 + 1)) {
        if degree(divisor) >= 1 && degree(divisor) <= d / 2 && poly_rem(poly, divisor) == 0 {
            return false;
        }
    }
    true
}

/// Carryless product of two field elements followed by reduction.
fn clmul_reduce(a: u8, b: u8, poly: u16) -> u8 {
    let mut prod: u32 = 0;
    for bit in 0..8 {
        if (b >> bit) & 1 == 1 {
            prod ^= (a as u32) << bit;
        }
    }
    poly_rem(prod, poly as u32) as u8
}

impl FieldSpec {
    /// Builds GF(2^w) with the given reduction polynomial (bit `w` must be set).
    pub fn new(w: u32, poly: u16) -> Result<Self> {
        if !(1..=8).contains(&w) {
            return Err(Error::WidthOutOfRange(w));
        }
        if degree(poly as u32) != w as i32 {
            return Err(Error::PolynomialDegree { w, poly });
        }
        if !is_irreducible(poly as u32) {
            return Err(Error::ReduciblePolynomial(poly));
        }
        let q = 1usize << w;
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            for b in a..q {
                let p = clmul_reduce(a as u8, b as u8, poly);
                mul[a * q + b] = p;
                mul[b * q + a] = p;
            }
        }
        let mut spec = FieldSpec {
            w,
            poly,
            tables: Arc::new(Tables { mul, inv: Vec::new() }),
        };
        let inv = (0..q as u16)
            .map(|a| if a == 0 { 0 } else { spec.pow(a as u8, (q - 2) as u32) })
            .collect();
        Arc::get_mut(&mut spec.tables).expect("fresh tables").inv = inv;
        Ok(spec)
    }

    /// GF(2^8) with the AES / UOV polynomial.
    pub fn gf256() -> Self {
        Self::new(8, POLY_GF256).expect("built-in polynomial is irreducible")
    }

    /// GF(2^4) with x^4 + x + 1.
    pub fn gf16() -> Self {
        Self::new(4, POLY_GF16).expect("built-in polynomial is irreducible")
    }

    /// The default polynomial for each supported width.
    pub fn default_poly(w: u32) -> Option<u16> {
        match w {
            1 => Some(0x3),
            2 => Some(0x7),
            3 => Some(POLY_GF8),
            4 => Some(POLY_GF16),
            5 => Some(POLY_GF32),
            6 => Some(0x43),
            7 => Some(POLY_GF128),
            8 => Some(POLY_GF256),
            _ => None,
        }
    }

    pub fn with_width(w: u32) -> Result<Self> {
        let poly = Self::default_poly(w).ok_or(Error::WidthOutOfRange(w))?;
        Self::new(w, poly)
    }

    /// Field for a modulus given as `q = 2^w`.
    pub fn for_order(q: u32) -> Result<Self> {
        if !q.is_power_of_two() || q < 2 {
            return Err(Error::UnsupportedOrder(q));
        }
        Self::with_width(q.trailing_zeros())
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    pub fn poly(&self) -> u16 {
        self.poly
    }

    pub fn q(&self) -> u32 {
        1 << self.w
    }

    /// All-ones word of width `w`.
    pub fn mask(&self) -> u8 {
        ((1u16 << self.w) - 1) as u8
    }

    pub fn contains(&self, x: u32) -> bool {
        x < self.q()
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.tables.mul[((a as usize) << self.w) | b as usize]
    }

    pub fn pow(&self, a: Elem, mut e: u32) -> Elem {
        let mut base = a;
        let mut acc = 1u8;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.tables.inv[a as usize])
    }

    /// Inverse for callers that already guarantee `a != 0`.
    #[inline]
    pub(crate) fn inv_nonzero(&self, a: Elem) -> Elem {
        debug_assert!(a != 0);
        self.tables.inv[a as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(FieldSpec::new(0, 0x1).unwrap_err(), Error::WidthOutOfRange(0));
        assert_eq!(FieldSpec::new(9, 0x211).unwrap_err(), Error::WidthOutOfRange(9));
        assert!(matches!(
            FieldSpec::new(4, 0x11B),
            Err(Error::PolynomialDegree { .. })
        ));
        // x^4 + 1 = (x + 1)^4
        assert_eq!(FieldSpec::new(4, 0x11).unwrap_err(), Error::ReduciblePolynomial(0x11));
    }

    #[test]
    fn defaults_are_irreducible() {
        for w in 1..=8 {
            let f = FieldSpec::with_width(w).unwrap();
            assert_eq!(f.q(), 1 << w);
        }
    }

    #[test]
    fn add_examples() {
        let f = FieldSpec::gf256();
        assert_eq!(f.add(0x53, 0x53), 0);
        assert_eq!(f.add(0x53, 0), 0x53);
        assert_eq!(FieldSpec::gf16().add(0x9, 0x3), 0xA);
    }

    #[test]
    fn mul_and_inv_examples() {
        let f16 = FieldSpec::gf16();
        let f256 = FieldSpec::gf256();
        assert_eq!(f16.mul(0x2, 0x9), 0x1);
        assert_eq!(f256.mul(0x53, 0xCA), 0x01);
        assert_eq!(f256.mul(0xAB, 1), 0xAB);
        assert_eq!(f16.inv(1), Ok(1));
        assert_eq!(f16.inv(0x2), Ok(0x9));
        assert_eq!(f16.inv(0), Err(Error::ZeroInverse));
    }

    #[test]
    fn for_order_maps_powers_of_two() {
        assert_eq!(FieldSpec::for_order(16).unwrap(), FieldSpec::gf16());
        assert_eq!(FieldSpec::for_order(31).unwrap_err(), Error::UnsupportedOrder(31));
    }
}
