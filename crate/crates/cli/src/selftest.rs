//! Built-in invariant suites. Each returns a one-line summary or the name of
//! the invariant that broke.

use maskge::cost::{
    self, counter_vs_formula, find_preset, measure, pipeline_cost, pipeline_itemized,
    sec_nonzero_itemized_r, sec_nonzero_itemized_t, Gadget, ORDERS,
};
use maskge::linalg::{gaussian_elimination, masked_solve, LinearSystem, PivotTries};
use maskge::masking::{
    b2m, b2minv, bool_share, bool_unshare, full_add, mult_unshare, refresh, sec_and, sec_mult,
    sec_nonzero, sec_not, sec_or, strong_refresh, MaskingContext,
};
use maskge::probe::{exhaustive_first_order, record_trace, GadgetCase};
use maskge::rowops::{sec_cond_add, sec_mult_sub, sec_scalar_mult, SharedRow};
use maskge::{Elem, FieldSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Outcome, SelftestArgs, EXIT_OK, EXIT_SELFTEST};

struct Opts {
    seed: u64,
    exhaustive: bool,
}

type SuiteResult = Result<String, String>;
type Suite = fn(&Opts) -> SuiteResult;

const SUITES: [(&str, Suite); 12] = [
    ("gf", gf),
    ("poly", poly),
    ("sharing", sharing),
    ("rowops", rowops),
    ("solver", solver),
    ("counters", counters),
    ("pipeline-counters", pipeline_counters),
    ("probe-shape", probe_shape),
    ("first-order", first_order),
    ("fault-injection", fault_injection),
    ("costmodel", costmodel),
    ("determinism", determinism),
];

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

fn slow_mul(a: u32, b: u32, w: u32, poly: u32) -> u32 {
    let mut acc = 0;
    for i in 0..w {
        if b >> i & 1 == 1 {
            acc ^= a << i;
        }
    }
    for i in (w..2 * w).rev() {
        if acc >> i & 1 == 1 {
            acc ^= poly << (i - w);
        }
    }
    acc
}

fn gf(o: &Opts) -> SuiteResult {
    let widths: Vec<u32> = if o.exhaustive { (1..=8).collect() } else { vec![4] };
    let mut pairs = 0u64;
    for w in widths {
        let f = FieldSpec::with_width(w).map_err(|e| e.to_string())?;
        let q = f.q();
        for a in 0..q {
            for b in 0..q {
                let got = f.mul(a as Elem, b as Elem) as u32;
                ensure!(got == slow_mul(a, b, w, f.poly() as u32), "mul in GF({q}): {a}*{b}");
                pairs += 1;
            }
            if a != 0 {
                let inv = f.inv(a as Elem).map_err(|e| e.to_string())?;
                ensure!(f.mul(a as Elem, inv) == 1, "inverse in GF({q}) of {a}");
            }
        }
    }
    Ok(format!("{pairs} products and all inverses checked"))
}

fn poly(_: &Opts) -> SuiteResult {
    // number of irreducible binary polynomials of degree 2..=8
    const COUNTS: [usize; 7] = [1, 2, 3, 6, 9, 18, 30];
    for (w, &want) in (2u32..=8).zip(&COUNTS) {
        let got = (0u16..1 << w).filter(|low| FieldSpec::new(w, low | 1 << w).is_ok()).count();
        ensure!(got == want, "degree {w}: {got} polynomials accepted, expected {want}");
        ensure!(FieldSpec::with_width(w).is_ok(), "default polynomial of degree {w}");
    }
    Ok("accepted moduli match the irreducible counts for degrees 2..8".into())
}

fn sharing(o: &Opts) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let mut trials = 0;
    for f in [FieldSpec::gf16(), FieldSpec::gf256()] {
        for n in 2..=5 {
            let mut c = MaskingContext::new(n, f.clone(), o.seed).map_err(|e| e.to_string())?;
            for _ in 0..200 {
                let a = rng.random::<Elem>() & f.mask();
                let b = rng.random::<Elem>() & f.mask();
                let x = bool_share(a, &mut c);
                let y = bool_share(b, &mut c);
                ensure!(bool_unshare(&refresh(&x, &mut c)) == a, "refresh n={n}");
                ensure!(bool_unshare(&strong_refresh(&x, &mut c)) == a, "strong_refresh n={n}");
                ensure!(full_add(&x, &mut c) == a, "full_add n={n}");
                ensure!(bool_unshare(&sec_mult(&x, &y, &mut c)) == f.mul(a, b), "sec_mult n={n}");
                ensure!(bool_unshare(&sec_and(&x, &y, &mut c)) == a & b, "sec_and n={n}");
                ensure!(bool_unshare(&sec_nonzero(&x, &mut c)) == (a != 0) as Elem, "sec_nonzero n={n} x={a}");
                let (bx, by) = (bool_share(a & 1, &mut c), bool_share(b & 1, &mut c));
                ensure!(bool_unshare(&sec_not(&bx, &mut c)) == (a & 1) ^ 1, "sec_not n={n}");
                ensure!(bool_unshare(&sec_or(&bx, &by, &mut c)) == (a | b) & 1, "sec_or n={n}");
                if a != 0 {
                    ensure!(mult_unshare(&b2m(&x, &mut c), &f) == a, "b2m n={n}");
                    let inv = f.inv(a).map_err(|e| e.to_string())?;
                    ensure!(mult_unshare(&b2minv(&x, &mut c), &f) == inv, "b2minv n={n}");
                }
                trials += 1;
            }
        }
    }
    Ok(format!("{trials} random inputs through every sharing gadget"))
}

fn rowops(o: &Opts) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed ^ 1);
    let f = FieldSpec::gf256();
    let mut trials = 0;
    for n in 2..=4 {
        let mut c = MaskingContext::new(n, f.clone(), o.seed).map_err(|e| e.to_string())?;
        for len in [1usize, 2, 7] {
            for _ in 0..20 {
                let xv: Vec<Elem> = (0..len).map(|_| rng.random()).collect();
                let yv: Vec<Elem> = (0..len).map(|_| rng.random()).collect();
                let s: Elem = rng.random_range(1..=255);
                let bit = rng.random_bool(0.5);
                let x = SharedRow::share(&xv, &mut c);
                let y = SharedRow::share(&yv, &mut c);
                let b = bool_share(bit as Elem, &mut c);
                let ss = bool_share(s, &mut c);
                let p = b2m(&ss, &mut c);
                let err = |e: maskge::Error| e.to_string();
                let added = sec_cond_add(&x, &y, &b, &mut c).map_err(err)?.unshare();
                let want: Vec<Elem> = xv.iter().zip(&yv).map(|(&u, &v)| if bit { u ^ v } else { u }).collect();
                ensure!(added == want, "sec_cond_add n={n} len={len}");
                let scaled = sec_scalar_mult(&x, &p, &mut c).map_err(err)?.unshare();
                ensure!(scaled.iter().zip(&xv).all(|(&z, &u)| z == f.mul(s, u)), "sec_scalar_mult n={n} len={len}");
                let sub = sec_mult_sub(&x, &y, &ss, &mut c).map_err(err)?.unshare();
                ensure!(
                    sub.iter().zip(xv.iter().zip(&yv)).all(|(&z, (&u, &v))| z == v ^ f.mul(s, u)),
                    "sec_mult_sub n={n} len={len}"
                );
                trials += 1;
            }
        }
    }
    Ok(format!("{trials} random row triples through every row gadget"))
}

fn solver(o: &Opts) -> SuiteResult {
    let f = FieldSpec::gf16();
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed ^ 2);
    let count = if o.exhaustive { 1000 } else { 150 };
    for i in 0..count {
        let m = 1 + i % 7;
        let sys = if i % 3 == 2 && m > 1 {
            LinearSystem::random_singular(&f, m, &mut rng)
        } else {
            LinearSystem::random(&f, m, &mut rng)
        };
        let tries = if i % 4 == 3 { PivotTries::Limit(1) } else { PivotTries::All };
        let mut c = MaskingContext::new(2 + i % 2, f.clone(), o.seed.wrapping_add(i as u64)).map_err(|e| e.to_string())?;
        let got = masked_solve(&sys, tries, &mut c).map_err(|e| e.to_string())?;
        ensure!(got == gaussian_elimination(&sys, tries), "masked solve differs from reference on system {i}");
    }
    Ok(format!("{count} systems (random, singular, limited pivots) match the reference"))
}

fn counters(_: &Opts) -> SuiteResult {
    let mut lines = Vec::new();
    for g in Gadget::units() {
        let mut cases = 0;
        for n in 2..=5usize {
            for w in [4, 8] {
                for l in [1usize, 2, 10] {
                    if g == Gadget::SecNonzero {
                        let c = measure(g, n, 1, w, 5).map_err(|e| e.to_string())?;
                        let want = (sec_nonzero_itemized_t(n as u64, w), sec_nonzero_itemized_r(n as u64, w));
                        ensure!((c.ops, c.rng_bits) == want, "secnonzero n={n} w={w}: counters {c:?} vs itemized {want:?}");
                    } else {
                        let d = counter_vs_formula(g, n, l, w, 5).map_err(|e| e.to_string())?;
                        ensure!(d.is_exact(), "{g} n={n} l={l} w={w}: {d:?}");
                    }
                    cases += 1;
                    if !g.is_row() {
                        break;
                    }
                }
            }
        }
        lines.push(format!("{g} {cases}"));
    }
    let printed = cost::t_cost(Gadget::SecNonzero, 2, 1, 8);
    Ok(format!(
        "exact in all cases ({}); secnonzero matched against its itemized count, the printed form is {printed} ops at n=2, w=8 vs {} itemized",
        lines.join(", "),
        sec_nonzero_itemized_t(2, 8)
    ))
}

fn pipeline_counters(o: &Opts) -> SuiteResult {
    let f = FieldSpec::gf256();
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed ^ 3);
    for m in [1usize, 2, 4, 9] {
        for n in 2..=3usize {
            let sys = LinearSystem::random_invertible(&f, m, &mut rng);
            let mut c = MaskingContext::new(n, f.clone(), o.seed).map_err(|e| e.to_string())?;
            let mut t = maskge::linalg::SharedMatrix::share(&sys, &mut c);
            let before = c.counters();
            maskge::linalg::sec_row_ech(&mut t, PivotTries::All, &mut c).map_err(|e| e.to_string())?;
            maskge::linalg::sec_back_sub(&t, &mut c).map_err(|e| e.to_string())?;
            let d = c.counters().delta(&before);
            let want = pipeline_itemized(n as u64, m as u64, 8);
            ensure!((d.ops, d.rng_bits) == want, "m={m} n={n}: counters ({}, {}) vs itemized {want:?}", d.ops, d.rng_bits);
        }
    }
    Ok("solver counters equal the itemized loop sums".into())
}

fn probe_shape(_: &Opts) -> SuiteResult {
    let f = FieldSpec::gf16();
    for case in GadgetCase::SECURE {
        for n in 2..=3 {
            let secrets = case.default_secrets(&f);
            let mut shape = None;
            for (i, s) in secrets.iter().enumerate() {
                let mut c = MaskingContext::new(n, f.clone(), i as u64).map_err(|e| e.to_string())?;
                let t = record_trace(case, s, &mut c).map_err(|e| e.to_string())?;
                match &shape {
                    None => shape = Some(t.points),
                    Some(p) => ensure!(*p == t.points, "{case} n={n}: trace shape depends on the secret"),
                }
            }
        }
    }
    Ok(format!("{} gadgets have secret-independent traces", GadgetCase::SECURE.len()))
}

fn first_order(o: &Opts) -> SuiteResult {
    let f = FieldSpec::gf16();
    let cases: Vec<GadgetCase> = if o.exhaustive {
        GadgetCase::SECURE.to_vec()
    } else {
        vec![GadgetCase::Refresh, GadgetCase::StrongRefresh, GadgetCase::SecMult, GadgetCase::B2Minv]
    };
    let mut points = 0;
    for &case in &cases {
        let v = exhaustive_first_order(case, &f, 2, &case.default_secrets(&f)).map_err(|e| e.to_string())?;
        if let Some(p) = v.failing().next() {
            return Err(format!("{case}: point {} leaks", p.point_id));
        }
        points += v.points.len();
    }
    Ok(format!("{} gadgets, {points} probe points, no first-order leakage at n=2", cases.len()))
}

fn fault_injection(_: &Opts) -> SuiteResult {
    let f = FieldSpec::gf16();
    for case in GadgetCase::BROKEN {
        let v = exhaustive_first_order(case, &f, 2, &case.default_secrets(&f)).map_err(|e| e.to_string())?;
        ensure!(!v.pass(), "{case} went undetected");
    }
    Ok(format!("{} broken variants detected", GadgetCase::BROKEN.len()))
}

fn costmodel(_: &Opts) -> SuiteResult {
    let r = |p: &str, n| find_preset(p).map(|p| cost::cost_report(&p, n)).map_err(|e| e.to_string());
    ensure!(r("uov-ip", 2)?.rand_scaled == 742, "uov-ip n=2 randomness");
    ensure!(r("uov-ip", 2)?.ops_scaled == 105, "uov-ip n=2 operations");
    ensure!(r("mayo-i", 2)?.ops_scaled == 300, "mayo-i n=2 operations");
    let rows = cost::cost_table(&cost::param_sets().collect::<Vec<_>>(), &ORDERS).len();
    ensure!(rows == 93, "table has {rows} rows");
    for n in ORDERS {
        let (a, b) = (find_preset("mayo-iii").unwrap(), find_preset("uov-iii").unwrap());
        let ratio = pipeline_cost(n, a.m as u64, a.w_eff()).0 as f64 / pipeline_cost(n, b.m as u64, b.w_eff()).0 as f64;
        let close = (ratio - 2.3).abs() <= 0.1;
        ensure!(close, "mayo-iii/uov-iii ops ratio {ratio:.3} at n={n}");
    }
    Ok("anchors, row count and MAYO/UOV ratio hold".into())
}

fn determinism(o: &Opts) -> SuiteResult {
    let f = FieldSpec::gf256();
    let run = || -> Result<(Vec<Elem>, maskge::masking::CostCounters), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
        let sys = LinearSystem::random_invertible(&f, 6, &mut rng);
        let mut c = MaskingContext::new(3, f.clone(), o.seed).map_err(|e| e.to_string())?;
        let t = record_trace(GadgetCase::SecCondAdd, &[7, 9, 1], &mut c).map_err(|e| e.to_string())?;
        masked_solve(&sys, PivotTries::All, &mut c).map_err(|e| e.to_string())?;
        Ok((t.values, c.counters()))
    };
    ensure!(run()? == run()?, "two runs with seed {} differ", o.seed);
    Ok("identical seed gives identical traces and counters".into())
}

pub fn run(args: &SelftestArgs, seed: u64) -> Outcome {
    if args.list {
        for (name, _) in SUITES {
            println!("{name}");
        }
        return Ok(EXIT_OK);
    }
    let wanted: Vec<String> = args.suite.iter().map(|s| s.to_ascii_lowercase()).collect();
    if let Some(bad) = wanted.iter().find(|w| !SUITES.iter().any(|(n, _)| n == w)) {
        return Err(format!("unknown suite `{bad}` (try --list)").into());
    }
    let opts = Opts { seed, exhaustive: args.exhaustive };
    let mut failed = Vec::new();
    let mut ran = 0;
    for (name, suite) in SUITES {
        if !wanted.is_empty() && !wanted.iter().any(|w| w == name) {
            continue;
        }
        ran += 1;
        match suite(&opts) {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                println!("[FAIL] {name}: {why}");
                failed.push(name);
            }
        }
    }
    println!("selftest: {}/{ran} suites passed", ran - failed.len());
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("failed suites: {}", failed.join(", "));
        Ok(EXIT_SELFTEST)
    }
}
