//! Exact first-order check: every random tape is enumerated, so each probe's
//! value distribution is computed exactly for every secret.

use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gf::{Elem, FieldSpec};
use crate::masking::{MaskingContext, RandomSource};
use crate::probe::{run_case, GadgetCase, LeakVerdict, PointVerdict, RecordMode, Recorder};

/// Upper bound on the number of executions per secret.
pub const ENUMERATION_LIMIT: u128 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Draw {
    Bits(u32),
    Nonzero(u32),
}

impl Draw {
    fn domain(self) -> u64 {
        match self {
            Draw::Bits(w) => 1 << w,
            Draw::Nonzero(w) => (1 << w) - 1,
        }
    }

    fn value(self, digit: u64) -> Elem {
        match self {
            Draw::Bits(_) => digit as Elem,
            Draw::Nonzero(_) => (digit + 1) as Elem,
        }
    }
}

/// Returns the lowest value of each domain and logs what was asked for.
struct DiscoverySource {
    log: Arc<Mutex<Vec<Draw>>>,
}

impl RandomSource for DiscoverySource {
    fn bits(&mut self, width: u32) -> u8 {
        self.log.lock().expect("log").push(Draw::Bits(width));
        0
    }

    fn nonzero(&mut self, width: u32) -> u8 {
        self.log.lock().expect("log").push(Draw::Nonzero(width));
        1
    }
}

/// Replays a fixed tape.
struct TapeSource {
    tape: Vec<Elem>,
    pos: usize,
}

impl TapeSource {
    fn next(&mut self) -> Elem {
        let v = self.tape[self.pos];
        self.pos += 1;
        v
    }
}

impl RandomSource for TapeSource {
    fn bits(&mut self, _width: u32) -> u8 {
        self.next()
    }

    fn nonzero(&mut self, _width: u32) -> u8 {
        self.next()
    }
}

fn context(field: &FieldSpec, n: usize, source: Box<dyn RandomSource>) -> Result<MaskingContext> {
    if n == 1 {
        Ok(MaskingContext::single_share(field.clone(), source))
    } else {
        MaskingContext::with_source(n, field.clone(), source)
    }
}

fn discover(case: GadgetCase, field: &FieldSpec, n: usize, secrets: &[Elem]) -> Result<Vec<Draw>> {
    let log = Arc::new(Mutex::new(Vec::new()));
    let mut ctx = context(field, n, Box::new(DiscoverySource { log: log.clone() }))?;
    run_case(case, secrets, &mut ctx)?;
    let draws = log.lock().expect("log").clone();
    Ok(draws)
}

/// Product of the draw domains, i.e. executions per secret.
pub fn enumeration_size(case: GadgetCase, field: &FieldSpec, n: usize, secrets: &[Elem]) -> Result<u128> {
    let draws = discover(case, field, n, secrets)?;
    Ok(draws.iter().map(|d| d.domain() as u128).product())
}

const BINS: usize = 256;

/// Exact value histograms of every probe point for one secret.
fn histograms(
    case: GadgetCase,
    field: &FieldSpec,
    n: usize,
    secrets: &[Elem],
    draws: &[Draw],
    points: usize,
) -> Result<Vec<u64>> {
    let total: u64 = draws.iter().map(|d| d.domain()).product();
    let run = |idx: u64, hist: &mut Vec<u64>| -> Result<()> {
        let mut rest = idx;
        let tape = draws
            .iter()
            .map(|d| {
                let digit = rest % d.domain();
                rest /= d.domain();
                d.value(digit)
            })
            .collect();
        let mut ctx = context(field, n, Box::new(TapeSource { tape, pos: 0 }))?;
        ctx.attach_recorder(Recorder::new(RecordMode::ValuesOnly));
        run_case(case, secrets, &mut ctx)?;
        let rec = ctx.take_recorder().expect("recorder attached");
        let values = rec.values();
        if values.len() != points {
            return Err(Error::Shape(format!(
                "{case}: trace length {} differs from {points}",
                values.len()
            )));
        }
        for (p, &v) in values.iter().enumerate() {
            hist[p * BINS + v as usize] += 1;
        }
        Ok(())
    };
    (0..total)
        .into_par_iter()
        .try_fold(
            || vec![0u64; points * BINS],
            |mut hist, idx| {
                run(idx, &mut hist)?;
                Ok(hist)
            },
        )
        .try_reduce(
            || vec![0u64; points * BINS],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )
}

/// Checks that every probe of `case` has the same exact value distribution
/// for all `secrets`, enumerating every random tape.
pub fn exhaustive_first_order(
    case: GadgetCase,
    field: &FieldSpec,
    n: usize,
    secrets: &[Vec<Elem>],
) -> Result<LeakVerdict> {
    let first = secrets
        .first()
        .ok_or_else(|| Error::Shape("no secrets given".into()))?;
    let draws = discover(case, field, n, first)?;
    let size: u128 = draws.iter().map(|d| d.domain() as u128).product();
    if size > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge(size));
    }
    for s in &secrets[1..] {
        if discover(case, field, n, s)? != draws {
            return Err(Error::Shape(format!("{case}: randomness use depends on the secret")));
        }
    }

    let mut ctx = context(field, n, Box::new(DiscoverySource { log: Arc::default() }))?;
    ctx.attach_recorder(Recorder::new(RecordMode::Full));
    run_case(case, first, &mut ctx)?;
    let points = ctx.take_recorder().expect("recorder attached").into_trace().points;

    let hists: Vec<Vec<u64>> = secrets
        .iter()
        .map(|s| histograms(case, field, n, s, &draws, points.len()))
        .collect::<Result<_>>()?;

    let total = size as u64;
    let verdicts = points
        .iter()
        .enumerate()
        .map(|(p, point)| {
            let reference = &hists[0][p * BINS..(p + 1) * BINS];
            let mut worst = 0u64;
            for h in &hists[1..] {
                let other = &h[p * BINS..(p + 1) * BINS];
                let diff: u64 = reference.iter().zip(other).map(|(a, b)| a.abs_diff(*b)).sum();
                worst = worst.max(diff);
            }
            PointVerdict {
                point_id: point.to_string(),
                mode: "exhaustive",
                // total variation distance to the first secret, worst case
                statistic: worst as f64 / (2 * total) as f64,
                samples: total * secrets.len() as u64,
                pass: worst == 0,
            }
        })
        .collect();
    Ok(LeakVerdict::new(format!("exhaustive/{case}/n={n}"), verdicts))
}
