use std::fs;
use std::io::{self, Read};

use maskge::linalg::{gaussian_elimination, masked_solve, LinearSystem, PivotTries, SolveOutcome};
use maskge::masking::MaskingContext;
use maskge::{Elem, FieldSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::{Outcome, SolveArgs, EXIT_OK, EXIT_SELFTEST, EXIT_SINGULAR};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    q: u32,
    m: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<u32>>,
    b: Vec<u32>,
}

fn to_elems(field: &FieldSpec, v: &[u32]) -> Result<Vec<Elem>, String> {
    v.iter()
        .map(|&x| {
            if field.contains(x) {
                Ok(x as Elem)
            } else {
                Err(format!("entry {x} is not in GF({})", field.q()))
            }
        })
        .collect()
}

pub fn parse_system(text: &str) -> Result<LinearSystem, Box<dyn std::error::Error>> {
    let f: SystemFile = serde_json::from_str(text)?;
    let field = FieldSpec::for_order(f.q)?;
    if f.a.len() != f.m || f.b.len() != f.m {
        return Err(format!("m = {} but A has {} rows and b has {} entries", f.m, f.a.len(), f.b.len()).into());
    }
    let a = f.a.iter().map(|r| to_elems(&field, r)).collect::<Result<Vec<_>, _>>()?;
    let b = to_elems(&field, &f.b)?;
    Ok(LinearSystem::new(field, a, b)?)
}

fn render(out: &SolveOutcome) -> String {
    match out {
        SolveOutcome::Solved { x } => serde_json::to_string(x).expect("vector serializes"),
        SolveOutcome::Singular { .. } => "singular".to_string(),
    }
}

pub fn run(args: &SolveArgs, seed: u64) -> Outcome {
    if !args.unmasked && args.shares < 2 {
        return Err(format!("masked solving needs at least 2 shares, got {}", args.shares).into());
    }
    let tries = match args.pivot_tries {
        Some(0) => return Err("--pivot-tries must be at least 1".into()),
        Some(k) => PivotTries::Limit(k),
        None => PivotTries::All,
    };
    let systems = match (&args.input, args.random) {
        (Some(path), _) => {
            let text = if path.as_os_str() == "-" {
                let mut s = String::new();
                io::stdin().read_to_string(&mut s)?;
                s
            } else {
                fs::read_to_string(path)?
            };
            vec![parse_system(&text)?]
        }
        (None, Some(count)) => {
            if args.m == 0 {
                return Err("--m must be positive".into());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| LinearSystem::random(&args.field, args.m, &mut rng)).collect()
        }
        (None, None) => return Err("give an input file or --random COUNT".into()),
    };

    let masked = |i: usize, sys: &LinearSystem| -> Result<SolveOutcome, maskge::Error> {
        let mut ctx = MaskingContext::new(args.shares, sys.field.clone(), seed.wrapping_add(i as u64))?;
        masked_solve(sys, tries, &mut ctx)
    };

    if args.compare {
        let mut agree = 0;
        for (i, sys) in systems.iter().enumerate() {
            let reference = gaussian_elimination(sys, tries);
            let got = masked(i, sys)?;
            if got == reference {
                agree += 1;
            } else {
                eprintln!("system {i}: masked {} vs reference {}", render(&got), render(&reference));
            }
        }
        let word = if agree == systems.len() { "MATCH" } else { "MISMATCH" };
        println!("{word} {agree}/{}", systems.len());
        return Ok(if agree == systems.len() { EXIT_OK } else { EXIT_SELFTEST });
    }

    let mut code = EXIT_OK;
    for (i, sys) in systems.iter().enumerate() {
        let out = if args.unmasked {
            gaussian_elimination(sys, tries)
        } else {
            masked(i, sys)?
        };
        if let SolveOutcome::Singular { at } = out {
            eprintln!("system {i}: no pivot in column {at}");
            code = EXIT_SINGULAR;
        }
        println!("{}", render(&out));
    }
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_validates() {
        let s = parse_system(r#"{"q":16,"m":2,"A":[[1,0],[0,1]],"b":[3,4]}"#).unwrap();
        assert_eq!(s.b, vec![3, 4]);
        assert!(parse_system(r#"{"q":16,"m":3,"A":[[1,0],[0,1]],"b":[3,4]}"#).is_err());
        assert!(parse_system(r#"{"q":16,"m":2,"A":[[1,0],[0,16]],"b":[3,4]}"#).is_err());
        assert!(parse_system(r#"{"q":7,"m":1,"A":[[1]],"b":[1]}"#).is_err());
        assert!(parse_system(r#"{"q":16,"m":1,"A":[[1]],"b":[1],"c":0}"#).is_err());
    }
}
