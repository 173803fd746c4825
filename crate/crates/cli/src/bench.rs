use std::time::{Duration, Instant};

use maskge::cost::{find_preset, pipeline_cost};
use maskge::linalg::{gaussian_elimination, masked_solve, LinearSystem, PivotTries, SolveOutcome};
use maskge::masking::MaskingContext;
use maskge::FieldSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{BenchArgs, Outcome, EXIT_OK};

#[derive(Debug, Serialize)]
struct BenchRecord {
    param: &'static str,
    q: u32,
    m: u32,
    n: usize,
    iters: usize,
    /// Counted on the masked run, input sharing included (identical for
    /// every iteration).
    ops_total: u64,
    rand_bits: u64,
    formula_ops_total: u64,
    formula_rand_bits: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    unmasked_median_ns: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    masked_median_ns: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort_unstable();
    v[v.len() / 2]
}

pub fn run(args: &BenchArgs, seed: u64) -> Outcome {
    let p = find_preset(&args.param)?;
    if !p.q.is_power_of_two() {
        return Err(format!(
            "{} works over GF({}); only binary fields can be solved (the cost table still covers it)",
            p.preset, p.q
        )
        .into());
    }
    if args.iters == 0 {
        return Err("--iters must be positive".into());
    }
    if let Some(&n) = args.shares.iter().find(|&&n| n < 2) {
        return Err(format!("masked solving needs at least 2 shares, got {n}").into());
    }
    let field = FieldSpec::for_order(p.q)?;
    let m = p.m as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sys = LinearSystem::random_invertible(&field, m, &mut rng);

    let mut records = Vec::new();
    for &n in &args.shares {
        let mut plain = Vec::with_capacity(args.iters);
        let mut masked = Vec::with_capacity(args.iters);
        let mut counters = None;
        for it in 0..args.iters {
            let t = Instant::now();
            let reference = gaussian_elimination(&sys, PivotTries::All);
            plain.push(t.elapsed());

            let mut ctx = MaskingContext::new(n, field.clone(), seed.wrapping_add(it as u64))?;
            let t = Instant::now();
            let got = masked_solve(&sys, PivotTries::All, &mut ctx)?;
            masked.push(t.elapsed());
            if got != reference || !matches!(got, SolveOutcome::Solved { .. }) {
                return Err(format!("masked and reference solutions differ for n={n}").into());
            }
            counters.get_or_insert(ctx.counters());
        }
        let c = counters.expect("at least one iteration");
        let (f_ops, f_bits) = pipeline_cost(n as u64, p.m as u64, p.w_eff());
        let (um, mm) = (median(plain), median(masked));
        let timing = !args.no_timing;
        records.push(BenchRecord {
            param: p.preset,
            q: p.q,
            m: p.m,
            n,
            iters: args.iters,
            ops_total: c.ops,
            rand_bits: c.rng_bits,
            formula_ops_total: f_ops,
            formula_rand_bits: f_bits,
            unmasked_median_ns: timing.then_some(um.as_nanos()),
            masked_median_ns: timing.then_some(mm.as_nanos()),
            ratio: timing.then(|| mm.as_secs_f64() / um.as_secs_f64().max(1e-9)),
        });
    }
    println!("{}", serde_json::to_string_pretty(&records)?);
    Ok(EXIT_OK)
}
