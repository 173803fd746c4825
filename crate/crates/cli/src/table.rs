use maskge::cost::{cost_table, param_sets, scheme_params, verify, ParamSet};

use crate::{sink, Outcome, TableArgs, EXIT_OK, EXIT_TABLE};

fn selected(schemes: &[String]) -> maskge::Result<Vec<ParamSet>> {
    if schemes.iter().any(|s| s.eq_ignore_ascii_case("all")) {
        return Ok(param_sets().collect());
    }
    let mut out = Vec::new();
    for s in schemes {
        out.extend(scheme_params(s)?);
    }
    Ok(out)
}

pub fn run(args: &TableArgs) -> Outcome {
    if args.orders.iter().any(|&n| n < 2) {
        return Err("orders must be at least 2".into());
    }
    let params = selected(&args.schemes)?;
    let reports = cost_table(&params, &args.orders);

    let mut w = csv::Writer::from_writer(sink(&args.output)?);
    for r in &reports {
        w.serialize(r)?;
    }
    w.flush()?;

    if !args.verify {
        return Ok(EXIT_OK);
    }
    let bad = verify(&reports);
    for m in &bad {
        eprintln!(
            "MISMATCH {} n={} {}: printed {} computed {} (tolerance {})",
            m.preset, m.n, m.column, m.printed, m.computed, m.tolerance
        );
    }
    eprintln!("verify: {} cells out of tolerance", bad.len());
    Ok(if bad.is_empty() { EXIT_OK } else { EXIT_TABLE })
}
