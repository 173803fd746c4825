use std::io::Write;

use maskge::probe::{
    exhaustive_first_order, sampled_second_order, statistical_fixed_vs_random, GadgetCase, LeakVerdict,
    PipelineSpec, PipelineTarget, PointVerdict,
};

use crate::{sink, LeakArgs, LeakMode, Outcome, Target, EXIT_LEAK, EXIT_OK};

fn cases(name: &str) -> maskge::Result<Vec<GadgetCase>> {
    if name.eq_ignore_ascii_case("all") {
        Ok(GadgetCase::SECURE.to_vec())
    } else {
        Ok(vec![name.parse()?])
    }
}

fn gadget_verdict(case: GadgetCase, args: &LeakArgs, seed: u64) -> maskge::Result<LeakVerdict> {
    let secrets = case.default_secrets(&args.field);
    match args.mode {
        LeakMode::Exhaustive => exhaustive_first_order(case, &args.field, args.shares, &secrets),
        LeakMode::SecondOrder => {
            let last = secrets.last().expect("default secrets are non-empty");
            sampled_second_order(
                case,
                &args.field,
                args.shares,
                [&secrets[0], last],
                args.pairs,
                args.samples,
                args.alpha,
                seed,
            )
        }
    }
}

pub fn run(args: &LeakArgs, seed: u64) -> Outcome {
    let verdicts: Vec<LeakVerdict> = if args.pipeline.is_some() {
        let target = match args.target {
            Target::Masked => PipelineTarget::Masked,
            Target::Unmasked => PipelineTarget::Unmasked,
            Target::SingleShare => PipelineTarget::SingleShare,
        };
        if target == PipelineTarget::Masked && args.shares < 2 {
            return Err("the masked pipeline needs at least 2 shares".into());
        }
        let mut spec = PipelineSpec::new(args.field.clone(), args.m, args.shares, args.samples, seed);
        spec.threshold = args.threshold;
        spec.target = target;
        vec![statistical_fixed_vs_random(&spec)?]
    } else {
        let name = args.gadget.as_deref().expect("clap requires --gadget without --pipeline");
        if args.shares < 2 {
            return Err("gadget checks need at least 2 shares".into());
        }
        cases(name)?
            .into_iter()
            .map(|c| gadget_verdict(c, args, seed))
            .collect::<maskge::Result<_>>()?
    };

    for v in &verdicts {
        eprintln!(
            "{}: {} of {} points fail{}",
            v.label,
            v.failing().count(),
            v.points.len(),
            v.failing().next().map(|p| format!(" (first: {})", p.point_id)).unwrap_or_default()
        );
    }
    let points: Vec<&PointVerdict> = verdicts.iter().flat_map(|v| &v.points).collect();
    let mut out = sink(&args.output)?;
    serde_json::to_writer_pretty(&mut out, &points)?;
    writeln!(out)?;
    Ok(if verdicts.iter().all(LeakVerdict::pass) { EXIT_OK } else { EXIT_LEAK })
}
