use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::cost::Gadget;
use crate::error::{Error, Result};
use crate::gf::{Elem, FieldSpec};
use crate::masking::{
    self, bool_share, bool_share_bit, mult_share, BoolSharing, MaskingContext,
};
use crate::probe::{ProbeTrace, RecordMode, Recorder};
use crate::rowops::{self, SharedRow};

/// A gadget call the probing checks know how to set up, including three
/// deliberately broken variants used to confirm the checks have power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GadgetCase {
    Refresh,
    StrongRefresh,
    FullAdd,
    SecMult,
    SecAnd,
    SecNot,
    SecOr,
    SecNonzero,
    B2M,
    B2Minv,
    SecCondAdd,
    SecScalarMult,
    SecMultSub,
    /// Refresh that reuses the previous draw instead of drawing a new mask.
    RefreshReused,
    /// Squaring through ISW with both operands the same sharing, i.e. with
    /// the refresh of one operand dropped.
    SecMultNoRefresh,
    /// Refresh that recombines its input in an intermediate.
    Unmasked,
}

impl GadgetCase {
    pub const SECURE: [GadgetCase; 13] = [
        GadgetCase::Refresh,
        GadgetCase::StrongRefresh,
        GadgetCase::FullAdd,
        GadgetCase::SecMult,
        GadgetCase::SecAnd,
        GadgetCase::SecNot,
        GadgetCase::SecOr,
        GadgetCase::SecNonzero,
        GadgetCase::B2M,
        GadgetCase::B2Minv,
        GadgetCase::SecCondAdd,
        GadgetCase::SecScalarMult,
        GadgetCase::SecMultSub,
    ];

    pub const BROKEN: [GadgetCase; 3] = [
        GadgetCase::RefreshReused,
        GadgetCase::SecMultNoRefresh,
        GadgetCase::Unmasked,
    ];

    pub fn is_broken(self) -> bool {
        Self::BROKEN.contains(&self)
    }

    pub fn name(self) -> &'static str {
        match self {
            GadgetCase::RefreshReused => "refresh-broken",
            GadgetCase::SecMultNoRefresh => "secmult-norefresh",
            GadgetCase::Unmasked => "unmasked",
            other => Gadget::try_from(other).expect("secure case").name(),
        }
    }

    /// Number of secret inputs.
    pub fn arity(self) -> usize {
        match self {
            GadgetCase::SecMult | GadgetCase::SecAnd | GadgetCase::SecOr | GadgetCase::SecScalarMult => 2,
            GadgetCase::SecCondAdd | GadgetCase::SecMultSub => 3,
            _ => 1,
        }
    }

    /// At least eight secret assignments, covering zero and all-ones words
    /// where the gadget admits them.
    pub fn default_secrets(self, field: &FieldSpec) -> Vec<Vec<Elem>> {
        let top = field.mask();
        let mid = 1 << (field.w() - 1);
        let singles: Vec<Elem> = [0, 1, 2, 3, mid, top ^ 1, top, 5 & top].to_vec();
        let nonzero: Vec<Elem> = [1, 2, 3, mid, top, top ^ 1, 6 & top | 1, 9 & top | 1].to_vec();
        let pairs = |a: &[Elem], b: &[Elem]| -> Vec<Vec<Elem>> {
            a.iter().zip(b.iter().cycle().skip(3)).map(|(&x, &y)| vec![x, y]).collect()
        };
        match self {
            GadgetCase::SecNot => vec![vec![0], vec![1]],
            GadgetCase::B2M | GadgetCase::B2Minv => nonzero.into_iter().map(|x| vec![x]).collect(),
            GadgetCase::SecMult | GadgetCase::SecAnd | GadgetCase::SecOr => {
                let mut v = pairs(&singles, &singles);
                v.extend([vec![0, 0], vec![top, top], vec![0, top]]);
                v
            }
            GadgetCase::SecScalarMult => {
                let mut v = pairs(&singles, &nonzero);
                v.push(vec![top, 1]);
                v
            }
            GadgetCase::SecCondAdd => {
                let mut v = Vec::new();
                for (i, p) in pairs(&singles, &singles).into_iter().enumerate() {
                    v.push(vec![p[0], p[1], (i % 2) as Elem]);
                }
                v.extend([vec![0, 0, 0], vec![0, 0, 1], vec![top, top, 1], vec![1, top, 0]]);
                v
            }
            GadgetCase::SecMultSub => {
                let mut v: Vec<Vec<Elem>> = pairs(&singles, &singles)
                    .into_iter()
                    .zip(singles.iter().cycle().skip(5))
                    .map(|(p, &c)| vec![p[0], p[1], c])
                    .collect();
                v.extend([vec![0, 0, 0], vec![top, 0, 1], vec![top, top, top]]);
                v
            }
            _ => singles.into_iter().map(|x| vec![x]).collect(),
        }
    }

    fn validate(self, field: &FieldSpec, secrets: &[Elem]) -> Result<()> {
        if secrets.len() != self.arity() {
            return Err(Error::Shape(format!(
                "{} takes {} secrets, got {}",
                self.name(),
                self.arity(),
                secrets.len()
            )));
        }
        if let Some(&v) = secrets.iter().find(|&&v| !field.contains(v as u32)) {
            return Err(Error::NotInField { value: v as u32, q: field.q() });
        }
        let bit_ok = |b: Elem| b <= 1;
        match self {
            GadgetCase::SecNot if !bit_ok(secrets[0]) => Err(Error::Shape("secnot takes a bit".into())),
            GadgetCase::SecCondAdd if !bit_ok(secrets[2]) => {
                Err(Error::Shape("the condition of seccondadd is a bit".into()))
            }
            GadgetCase::B2M | GadgetCase::B2Minv if secrets[0] == 0 => Err(Error::ZeroInverse),
            GadgetCase::SecScalarMult if secrets[1] == 0 => Err(Error::ZeroInverse),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for GadgetCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl TryFrom<Gadget> for GadgetCase {
    type Error = Error;

    fn try_from(g: Gadget) -> Result<Self> {
        Ok(match g {
            Gadget::Refresh => GadgetCase::Refresh,
            Gadget::StrongRefresh => GadgetCase::StrongRefresh,
            Gadget::FullAdd => GadgetCase::FullAdd,
            Gadget::SecMult => GadgetCase::SecMult,
            Gadget::SecAnd => GadgetCase::SecAnd,
            Gadget::SecNot => GadgetCase::SecNot,
            Gadget::SecOr => GadgetCase::SecOr,
            Gadget::SecNonzero => GadgetCase::SecNonzero,
            Gadget::B2M => GadgetCase::B2M,
            Gadget::B2Minv => GadgetCase::B2Minv,
            Gadget::SecCondAdd => GadgetCase::SecCondAdd,
            Gadget::SecScalarMult => GadgetCase::SecScalarMult,
            Gadget::SecMultSub => GadgetCase::SecMultSub,
            Gadget::SecRowEch | Gadget::SecBackSub => {
                return Err(Error::UnsupportedGadget(g.name().to_string()))
            }
        })
    }
}

impl TryFrom<GadgetCase> for Gadget {
    type Error = Error;

    fn try_from(c: GadgetCase) -> Result<Self> {
        Gadget::ALL
            .into_iter()
            .find(|&g| GadgetCase::try_from(g).ok() == Some(c))
            .ok_or_else(|| Error::UnsupportedGadget(format!("{c:?}")))
    }
}

impl FromStr for GadgetCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase();
        match key.as_str() {
            "refresh-broken" | "refresh-reused" => return Ok(GadgetCase::RefreshReused),
            "secmult-norefresh" | "secmult-broken" => return Ok(GadgetCase::SecMultNoRefresh),
            "unmasked" | "unmasked-intermediate" => return Ok(GadgetCase::Unmasked),
            _ => {}
        }
        match s.parse::<Gadget>() {
            Ok(g) => GadgetCase::try_from(g),
            Err(_) => Err(Error::UnknownGadget(s.to_string())),
        }
    }
}

fn refresh_reused(s: &BoolSharing, ctx: &mut MaskingContext) -> BoolSharing {
    let mut y = s.shares.clone();
    ctx.enter("refresh", 0);
    for i in 1..y.len() {
        let r = ctx.last_draw();
        y[0] ^= r;
        ctx.probe("y0", &[i], y[0]);
        y[i] ^= r;
        ctx.probe("y", &[i], y[i]);
    }
    ctx.leave();
    BoolSharing { shares: y }
}

fn unmasked_refresh(s: &BoolSharing, ctx: &mut MaskingContext) -> BoolSharing {
    ctx.enter("refresh", 0);
    let mut acc = 0;
    for (i, &v) in s.shares.iter().enumerate() {
        acc ^= v;
        ctx.probe("sum", &[i], acc);
    }
    let out = bool_share(acc, ctx);
    ctx.leave();
    out
}

/// Encodes `secrets` with fresh randomness from `ctx` and runs the gadget.
/// Row gadgets run on rows of length one.
pub fn run_case(case: GadgetCase, secrets: &[Elem], ctx: &mut MaskingContext) -> Result<()> {
    case.validate(ctx.field(), secrets)?;
    let one = |v: Elem, ctx: &mut MaskingContext| SharedRow::share(&[v], ctx);
    match case {
        GadgetCase::Refresh => drop(masking::refresh(&bool_share(secrets[0], ctx), ctx)),
        GadgetCase::StrongRefresh => drop(masking::strong_refresh(&bool_share(secrets[0], ctx), ctx)),
        GadgetCase::FullAdd => drop(masking::full_add(&bool_share(secrets[0], ctx), ctx)),
        GadgetCase::SecNot => drop(masking::sec_not(&bool_share_bit(secrets[0] == 1, ctx), ctx)),
        GadgetCase::SecNonzero => drop(masking::sec_nonzero(&bool_share(secrets[0], ctx), ctx)),
        GadgetCase::B2M => drop(masking::b2m(&bool_share(secrets[0], ctx), ctx)),
        GadgetCase::B2Minv => drop(masking::b2minv(&bool_share(secrets[0], ctx), ctx)),
        GadgetCase::SecMult | GadgetCase::SecAnd | GadgetCase::SecOr => {
            let a = bool_share(secrets[0], ctx);
            let b = bool_share(secrets[1], ctx);
            let f = match case {
                GadgetCase::SecMult => masking::sec_mult,
                GadgetCase::SecAnd => masking::sec_and,
                _ => masking::sec_or,
            };
            drop(f(&a, &b, ctx));
        }
        GadgetCase::SecCondAdd => {
            let x = one(secrets[0], ctx);
            let y = one(secrets[1], ctx);
            let b = bool_share_bit(secrets[2] == 1, ctx);
            rowops::sec_cond_add(&x, &y, &b, ctx)?;
        }
        GadgetCase::SecScalarMult => {
            let x = one(secrets[0], ctx);
            let p = mult_share(secrets[1], ctx);
            rowops::sec_scalar_mult(&x, &p, ctx)?;
        }
        GadgetCase::SecMultSub => {
            let x = one(secrets[0], ctx);
            let y = one(secrets[1], ctx);
            let c = bool_share(secrets[2], ctx);
            rowops::sec_mult_sub(&x, &y, &c, ctx)?;
        }
        GadgetCase::RefreshReused => drop(refresh_reused(&bool_share(secrets[0], ctx), ctx)),
        GadgetCase::SecMultNoRefresh => {
            let a = bool_share(secrets[0], ctx);
            drop(masking::sec_mult(&a, &a, ctx));
        }
        GadgetCase::Unmasked => drop(unmasked_refresh(&bool_share(secrets[0], ctx), ctx)),
    }
    Ok(())
}

/// Runs one case with a full recorder attached and returns its trace. Input
/// encoding is not part of the trace.
pub fn record_trace(case: GadgetCase, secrets: &[Elem], ctx: &mut MaskingContext) -> Result<ProbeTrace> {
    let saved = ctx.take_recorder();
    ctx.attach_recorder(Recorder::new(RecordMode::Full));
    let res = run_case(case, secrets, ctx);
    let rec = ctx.take_recorder().expect("recorder attached");
    if let Some(r) = saved {
        ctx.attach_recorder(r);
    }
    res.map(|_| rec.into_trace())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for c in GadgetCase::SECURE.into_iter().chain(GadgetCase::BROKEN) {
            assert_eq!(c.name().parse::<GadgetCase>().unwrap(), c);
        }
        assert!(matches!("secrowech".parse::<GadgetCase>(), Err(Error::UnsupportedGadget(_))));
        assert!(matches!("bogus".parse::<GadgetCase>(), Err(Error::UnknownGadget(_))));
    }

    #[test]
    fn secrets_are_valid_and_plentiful() {
        for f in [FieldSpec::gf16(), FieldSpec::gf256()] {
            for c in GadgetCase::SECURE.into_iter().chain(GadgetCase::BROKEN) {
                let s = c.default_secrets(&f);
                if c != GadgetCase::SecNot {
                    assert!(s.len() >= 8, "{c}");
                }
                for v in &s {
                    c.validate(&f, v).unwrap();
                }
            }
        }
    }

    #[test]
    fn trace_examples() {
        let f = FieldSpec::gf16();
        let mut ctx = MaskingContext::new(2, f, 1).unwrap();
        assert_eq!(record_trace(GadgetCase::Refresh, &[5], &mut ctx).unwrap().len(), 3);
        assert_eq!(record_trace(GadgetCase::SecNot, &[1], &mut ctx).unwrap().len(), 1);
        let t0 = record_trace(GadgetCase::SecCondAdd, &[3, 4, 0], &mut ctx).unwrap();
        let t1 = record_trace(GadgetCase::SecCondAdd, &[3, 4, 1], &mut ctx).unwrap();
        assert_eq!(t0.points, t1.points);
        assert!(!t0.is_empty());
        assert_eq!(t0.points[0].to_string(), "condadd0/bext[0]");
    }

    #[test]
    fn rejects_bad_secrets() {
        let mut ctx = MaskingContext::new(2, FieldSpec::gf16(), 1).unwrap();
        assert_eq!(run_case(GadgetCase::B2M, &[0], &mut ctx).unwrap_err(), Error::ZeroInverse);
        assert!(matches!(run_case(GadgetCase::SecMult, &[1], &mut ctx), Err(Error::Shape(_))));
        assert!(matches!(
            run_case(GadgetCase::Refresh, &[16], &mut ctx),
            Err(Error::NotInField { .. })
        ));
    }
}
