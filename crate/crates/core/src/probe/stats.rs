//! Sampled leakage checks: fixed-vs-random Welch t-tests on solver traces,
//! and chi-square tests on joint distributions of probe pairs.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::gf::{Elem, FieldSpec};
use crate::linalg::{gaussian_elimination_traced, masked_solve, LinearSystem, PivotTries};
use crate::masking::{MaskingContext, SeededSource};
use crate::probe::{run_case, GadgetCase, LeakVerdict, PointVerdict, ProbePoint, RecordMode, Recorder};

/// Default |t| threshold.
pub const T_THRESHOLD: f64 = 4.5;

/// Running first and second moments of each probe, exact in integers so
/// partial sums from parallel workers merge without rounding.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Moments {
    pub count: u64,
    pub sum: Vec<u64>,
    pub sum_sq: Vec<u64>,
}

impl Moments {
    pub fn add(&mut self, values: &[Elem]) {
        if self.sum.is_empty() {
            self.sum = vec![0; values.len()];
            self.sum_sq = vec![0; values.len()];
        }
        assert_eq!(values.len(), self.sum.len(), "trace shape changed");
        for (i, &v) in values.iter().enumerate() {
            let v = v as u64;
            self.sum[i] += v;
            self.sum_sq[i] += v * v;
        }
        self.count += 1;
    }

    pub fn merge(mut self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        assert_eq!(self.sum.len(), other.sum.len(), "trace shape changed");
        self.count += other.count;
        self.sum.iter_mut().zip(&other.sum).for_each(|(a, b)| *a += b);
        self.sum_sq.iter_mut().zip(&other.sum_sq).for_each(|(a, b)| *a += b);
        self
    }

    fn mean_var(&self, i: usize) -> (f64, f64) {
        let n = self.count as f64;
        let mean = self.sum[i] as f64 / n;
        // n * sum_sq - sum^2 is exact in integers
        let num = self.count as i128 * self.sum_sq[i] as i128 - (self.sum[i] as i128).pow(2);
        (mean, num as f64 / (n * (n - 1.0)))
    }
}

/// Welch's t for point `i`. Zero when both populations are constant and
/// equal; infinite when they are constant and differ.
pub fn welch_t(a: &Moments, b: &Moments, i: usize) -> f64 {
    let (ma, va) = a.mean_var(i);
    let (mb, vb) = b.mean_var(i);
    let se = (va / a.count as f64 + vb / b.count as f64).sqrt();
    if se == 0.0 {
        if ma == mb {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (ma - mb) / se
    }
}

/// Which implementation a fixed-vs-random campaign traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineTarget {
    /// The masked solver with the spec's share count.
    Masked,
    /// The unmasked reference, traced at every intermediate.
    Unmasked,
    /// The masked solver with a single share, i.e. no masking at all.
    SingleShare,
}

#[derive(Debug, Clone)]
pub struct PipelineSpec {
    pub field: FieldSpec,
    pub m: usize,
    pub n: usize,
    /// Traces per class.
    pub samples: usize,
    pub threshold: f64,
    pub seed: u64,
    pub target: PipelineTarget,
}

impl PipelineSpec {
    pub fn new(field: FieldSpec, m: usize, n: usize, samples: usize, seed: u64) -> Self {
        PipelineSpec {
            field,
            m,
            n,
            samples,
            threshold: T_THRESHOLD,
            seed,
            target: PipelineTarget::Masked,
        }
    }
}

/// `b = A x` for the public solution `x`.
fn system_for(field: &FieldSpec, a: Vec<Vec<Elem>>, x: &[Elem]) -> LinearSystem {
    let mut sys = LinearSystem {
        field: field.clone(),
        a,
        b: vec![],
    };
    sys.b = sys.apply(x);
    sys
}

fn pipeline_trace(spec: &PipelineSpec, sys: &LinearSystem, stream: u64, mode: RecordMode) -> Result<Recorder> {
    let mut rec = Recorder::new(mode);
    match spec.target {
        PipelineTarget::Unmasked => {
            gaussian_elimination_traced(sys, PivotTries::All, &mut rec);
        }
        PipelineTarget::Masked | PipelineTarget::SingleShare => {
            let source = Box::new(SeededSource::with_stream(spec.seed, stream));
            let mut ctx = match spec.target {
                PipelineTarget::Masked => MaskingContext::with_source(spec.n, spec.field.clone(), source)?,
                _ => MaskingContext::single_share(spec.field.clone(), source),
            };
            ctx.attach_recorder(rec);
            masked_solve(sys, PivotTries::All, &mut ctx)?;
            rec = ctx.take_recorder().expect("recorder attached");
        }
    }
    Ok(rec)
}

/// Fixed-vs-random test on solver traces.
///
/// Both classes share one public solution `x`; the fixed class always
/// solves the same invertible `A`, the random class a fresh invertible `A`
/// per trace, with `b = A x` in both. Invertibility keeps the public pivot
/// flags, and with them the trace layout, identical across classes. The
/// public outputs are never probed, so they do not enter the verdict.
pub fn statistical_fixed_vs_random(spec: &PipelineSpec) -> Result<LeakVerdict> {
    if spec.m == 0 {
        return Err(Error::Shape("m must be positive".into()));
    }
    let mut setup = ChaCha8Rng::seed_from_u64(spec.seed);
    let q = spec.field.q();
    let x: Vec<Elem> = (0..spec.m).map(|_| setup.random_range(0..q) as Elem).collect();
    let fixed = LinearSystem::random_invertible(&spec.field, spec.m, &mut setup);
    let fixed = system_for(&spec.field, fixed.a, &x);

    let points: Vec<ProbePoint> = pipeline_trace(spec, &fixed, u64::MAX, RecordMode::Full)?
        .into_trace()
        .points;

    let total = 2 * spec.samples as u64;
    let (mf, mr) = (0..total)
        .into_par_iter()
        .try_fold(
            || (Moments::default(), Moments::default()),
            |(mut mf, mut mr), i| -> Result<_> {
                if i % 2 == 0 {
                    let rec = pipeline_trace(spec, &fixed, i, RecordMode::ValuesOnly)?;
                    mf.add(rec.values());
                } else {
                    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                    rng.set_stream(i);
                    let a = LinearSystem::random_invertible(&spec.field, spec.m, &mut rng).a;
                    let sys = system_for(&spec.field, a, &x);
                    let rec = pipeline_trace(spec, &sys, i, RecordMode::ValuesOnly)?;
                    mr.add(rec.values());
                }
                Ok((mf, mr))
            },
        )
        .try_reduce(
            || (Moments::default(), Moments::default()),
            |a, b| Ok((a.0.merge(b.0), a.1.merge(b.1))),
        )?;

    if mf.sum.len() != points.len() || mr.sum.len() != points.len() {
        return Err(Error::Shape("trace layout differs between classes".into()));
    }
    let verdicts = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let t = welch_t(&mf, &mr, i);
            PointVerdict {
                point_id: p.to_string(),
                mode: "fixed-vs-random",
                statistic: t,
                samples: total,
                pass: t.abs() < spec.threshold,
            }
        })
        .collect();
    let label = match spec.target {
        PipelineTarget::Masked => format!("fixed-vs-random/solve/m={}/n={}", spec.m, spec.n),
        PipelineTarget::Unmasked => format!("fixed-vs-random/unmasked/m={}", spec.m),
        PipelineTarget::SingleShare => format!("fixed-vs-random/solve/m={}/n=1", spec.m),
    };
    Ok(LeakVerdict::new(label, verdicts))
}

/// Chi-square test of homogeneity on a 2 x K table; returns the statistic
/// and its p-value. Columns empty in both rows are dropped.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> (f64, f64) {
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let total = (na + nb) as f64;
    let mut stat = 0.0;
    let mut cols = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        cols += 1;
        let ea = col * na as f64 / total;
        let eb = col * nb as f64 / total;
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    if cols < 2 {
        return (0.0, 1.0);
    }
    let p = ChiSquared::new((cols - 1) as f64)
        .expect("positive degrees of freedom")
        .sf(stat);
    (stat, p)
}

/// Sampled second-order check: for random pairs of probe points, compares
/// the joint value distribution under two secrets with a chi-square test.
/// A pair fails when its p-value is below `alpha / pairs` (Bonferroni).
///
/// This is evidence, not proof: only some pairs are tested, on samples.
#[allow(clippy::too_many_arguments)]
pub fn sampled_second_order(
    case: GadgetCase,
    field: &FieldSpec,
    n: usize,
    secrets: [&[Elem]; 2],
    pairs: usize,
    samples: usize,
    alpha: f64,
    seed: u64,
) -> Result<LeakVerdict> {
    let trace_of = |s: &[Elem], stream: u64, mode| -> Result<Recorder> {
        let mut ctx =
            MaskingContext::with_source(n, field.clone(), Box::new(SeededSource::with_stream(seed, stream)))?;
        ctx.attach_recorder(Recorder::new(mode));
        run_case(case, s, &mut ctx)?;
        Ok(ctx.take_recorder().expect("recorder attached"))
    };
    let points = trace_of(secrets[0], u64::MAX, RecordMode::Full)?.into_trace().points;
    let np = points.len();
    let all_pairs = np * np.saturating_sub(1) / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen: Vec<(usize, usize)> = if all_pairs <= pairs {
        (0..np).flat_map(|i| (i + 1..np).map(move |j| (i, j))).collect()
    } else {
        let mut seen = std::collections::BTreeSet::new();
        while seen.len() < pairs {
            let v = sample(&mut rng, np, 2);
            let (i, j) = (v.index(0).min(v.index(1)), v.index(0).max(v.index(1)));
            seen.insert((i, j));
        }
        seen.into_iter().collect()
    };
    if chosen.is_empty() {
        return Ok(LeakVerdict::new(format!("second-order/{case}/n={n}"), vec![]));
    }

    let bins = field.q() as usize;
    let hist = |which: usize| -> Result<Vec<u64>> {
        (0..samples as u64)
            .into_par_iter()
            .try_fold(
                || vec![0u64; chosen.len() * bins * bins],
                |mut h, k| -> Result<_> {
                    let rec = trace_of(secrets[which], 2 * k + which as u64, RecordMode::ValuesOnly)?;
                    let v = rec.values();
                    for (c, &(i, j)) in chosen.iter().enumerate() {
                        h[(c * bins + v[i] as usize) * bins + v[j] as usize] += 1;
                    }
                    Ok(h)
                },
            )
            .try_reduce(
                || vec![0u64; chosen.len() * bins * bins],
                |mut a, b| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    Ok(a)
                },
            )
    };
    let (ha, hb) = (hist(0)?, hist(1)?);
    let cut = alpha / chosen.len() as f64;
    let verdicts = chosen
        .iter()
        .enumerate()
        .map(|(c, &(i, j))| {
            let span = c * bins * bins..(c + 1) * bins * bins;
            let (stat, p) = chi_square_homogeneity(&ha[span.clone()], &hb[span]);
            PointVerdict {
                point_id: format!("{} & {}", points[i], points[j]),
                mode: "second-order",
                statistic: stat,
                samples: 2 * samples as u64,
                pass: p >= cut,
            }
        })
        .collect();
    Ok(LeakVerdict::new(format!("second-order/{case}/n={n}"), verdicts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welch_examples() {
        let mut a = Moments::default();
        let mut b = Moments::default();
        for v in [1u8, 2, 3, 4] {
            a.add(&[v, 7]);
            b.add(&[v + 1, 7]);
        }
        // means 2.5 vs 3.5, both variances 5/3
        let t = welch_t(&a, &b, 0);
        assert!((t + 1.0 / (2.0 * 5.0 / 12.0f64).sqrt()).abs() < 1e-12);
        assert_eq!(welch_t(&a, &b, 1), 0.0);
        let mut c = Moments::default();
        for _ in 0..4 {
            c.add(&[0, 8]);
        }
        assert!(welch_t(&a, &c, 1).is_infinite());
    }

    #[test]
    fn merge_is_associative() {
        let mut parts = vec![Moments::default(); 3];
        for (i, v) in [3u8, 9, 1, 0, 4, 4, 2].iter().enumerate() {
            parts[i % 3].add(&[*v]);
        }
        let [p0, p1, p2]: [Moments; 3] = parts.try_into().unwrap();
        let left = p0.clone().merge(p1.clone()).merge(p2.clone());
        let right = p0.merge(p1.merge(p2));
        assert_eq!(left, right);
        assert_eq!(left.count, 7);
        assert_eq!(left.sum, vec![23]);
    }

    #[test]
    fn chi_square_examples() {
        let (s, p) = chi_square_homogeneity(&[50, 50], &[50, 50]);
        assert_eq!(s, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
        let (_, p) = chi_square_homogeneity(&[100, 0], &[0, 100]);
        assert!(p < 1e-10);
        assert_eq!(chi_square_homogeneity(&[5, 0], &[7, 0]), (0.0, 1.0));
    }
}
