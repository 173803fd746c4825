use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{Elem, FieldSpec};
use crate::probe::Recorder;

/// A source of uniform randomness for the gadgets.
pub trait RandomSource: Send {
    /// A uniform value of `width` bits (`1 <= width <= 8`).
    fn bits(&mut self, width: u32) -> u8;

    /// A uniform value in `[1, 2^width)`.
    fn nonzero(&mut self, width: u32) -> u8;
}

/// ChaCha8 keystream keyed by a 64-bit seed. Distinct `stream` values give
/// independent sequences for the same seed.
pub struct SeededSource {
    rng: ChaCha8Rng,
}

impl SeededSource {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        SeededSource { rng }
    }
}

impl RandomSource for SeededSource {
    fn bits(&mut self, width: u32) -> u8 {
        (self.rng.next_u32() & ((1u32 << width) - 1)) as u8
    }

    fn nonzero(&mut self, width: u32) -> u8 {
        self.rng.random_range(1..(1u32 << width)) as u8
    }
}

/// Unit-cost operation and randomness tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CostCounters {
    pub ops: u64,
    pub rng_draws: u64,
    pub rng_bits: u64,
}

impl CostCounters {
    pub fn delta(&self, since: &CostCounters) -> CostCounters {
        CostCounters {
            ops: self.ops - since.ops,
            rng_draws: self.rng_draws - since.rng_draws,
            rng_bits: self.rng_bits - since.rng_bits,
        }
    }
}

/// Share count, field, randomness and counters for one masked computation.
///
/// Every random draw is charged one op plus its width in bits. Gadgets charge
/// their remaining unit operations explicitly.
pub struct MaskingContext {
    n: usize,
    field: FieldSpec,
    source: Box<dyn RandomSource>,
    counters: CostCounters,
    recorder: Option<Recorder>,
    last_draw: Elem,
}

impl MaskingContext {
    pub fn new(n: usize, field: FieldSpec, seed: u64) -> Result<Self> {
        Self::with_source(n, field, Box::new(SeededSource::new(seed)))
    }

    pub fn with_source(n: usize, field: FieldSpec, source: Box<dyn RandomSource>) -> Result<Self> {
        if n < 2 {
            return Err(Error::ShareCount(n));
        }
        Ok(Self::build(n, field, source))
    }

    /// A one-share context. It offers no protection; used to check that the
    /// leakage tests have power.
    pub fn single_share(field: FieldSpec, source: Box<dyn RandomSource>) -> Self {
        Self::build(1, field, source)
    }

    fn build(n: usize, field: FieldSpec, source: Box<dyn RandomSource>) -> Self {
        MaskingContext {
            n,
            field,
            source,
            counters: CostCounters::default(),
            recorder: None,
            last_draw: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn w(&self) -> u32 {
        self.field.w()
    }

    pub fn counters(&self) -> CostCounters {
        self.counters
    }

    pub fn attach_recorder(&mut self, recorder: Recorder) {
        self.recorder = Some(recorder);
    }

    pub fn take_recorder(&mut self) -> Option<Recorder> {
        self.recorder.take()
    }

    pub fn recorder_mut(&mut self) -> Option<&mut Recorder> {
        self.recorder.as_mut()
    }

    /// Replaces the randomness source, keeping counters.
    pub fn set_source(&mut self, source: Box<dyn RandomSource>) {
        self.source = source;
    }

    #[inline]
    pub(crate) fn charge(&mut self, ops: u64) {
        self.counters.ops += ops;
    }

    /// Uniform draw of `width` bits.
    #[inline]
    pub(crate) fn draw_bits(&mut self, width: u32) -> Elem {
        let r = self.source.bits(width);
        self.counters.ops += 1;
        self.counters.rng_draws += 1;
        self.counters.rng_bits += width as u64;
        self.last_draw = r;
        r
    }

    /// Uniform field element.
    #[inline]
    pub(crate) fn draw(&mut self) -> Elem {
        self.draw_bits(self.field.w())
    }

    /// Uniform nonzero field element, charged as one w-bit draw.
    pub(crate) fn draw_nonzero(&mut self) -> Elem {
        let w = self.field.w();
        let r = self.source.nonzero(w);
        self.counters.ops += 1;
        self.counters.rng_draws += 1;
        self.counters.rng_bits += w as u64;
        self.last_draw = r;
        r
    }

    /// The value returned by the most recent draw. Only the deliberately
    /// broken gadget variants use this.
    pub(crate) fn last_draw(&self) -> Elem {
        self.last_draw
    }

    #[inline]
    pub(crate) fn probe(&mut self, tag: &'static str, index: &[usize], value: Elem) {
        if let Some(rec) = self.recorder.as_mut() {
            rec.record(tag, index, value);
        }
    }

    #[inline]
    pub(crate) fn enter(&mut self, scope: &'static str, idx: usize) {
        if let Some(rec) = self.recorder.as_mut() {
            rec.enter(scope, idx as u32);
        }
    }

    #[inline]
    pub(crate) fn leave(&mut self) {
        if let Some(rec) = self.recorder.as_mut() {
            rec.leave();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_charged() {
        let mut ctx = MaskingContext::new(2, FieldSpec::gf256(), 1).unwrap();
        ctx.draw();
        ctx.draw_bits(3);
        ctx.draw_nonzero();
        let c = ctx.counters();
        assert_eq!(c.rng_draws, 3);
        assert_eq!(c.rng_bits, 8 + 3 + 8);
        assert_eq!(c.ops, 3);
    }

    #[test]
    fn rejects_single_share() {
        assert!(matches!(
            MaskingContext::new(1, FieldSpec::gf16(), 0),
            Err(Error::ShareCount(1))
        ));
    }

    #[test]
    fn seeded_source_is_reproducible_and_streams_differ() {
        let mut a = SeededSource::new(7);
        let mut b = SeededSource::new(7);
        let mut c = SeededSource::with_stream(7, 1);
        let xa: Vec<u8> = (0..32).map(|_| a.bits(8)).collect();
        let xb: Vec<u8> = (0..32).map(|_| b.bits(8)).collect();
        let xc: Vec<u8> = (0..32).map(|_| c.bits(8)).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        assert!((0..1000).all(|_| a.nonzero(4) != 0 && a.bits(3) < 8));
    }
}
