use maskge::linalg::{gaussian_elimination, masked_solve, LinearSystem, PivotTries};
use maskge::masking::{
    b2m, b2minv, bool_share, bool_unshare, full_add, mult_unshare, refresh, sec_and, sec_mult,
    sec_nonzero, sec_not, sec_or, strong_refresh, MaskingContext,
};
use maskge::probe::{record_trace, GadgetCase};
use maskge::rowops::{sec_cond_add, sec_mult_sub, sec_scalar_mult, SharedRow};
use maskge::{Elem, FieldSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Carry-less multiply then reduce, bit by bit.
fn slow_mul(a: u32, b: u32, w: u32, poly: u32) -> u32 {
    let mut acc = 0u32;
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

fn poly_mod(mut a: u32, b: u32) -> u32 {
    let db = 31 - b.leading_zeros();
    while a != 0 && 31 - a.leading_zeros() >= db {
        a ^= b << (31 - a.leading_zeros() - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=deg/2.
fn irreducible(p: u32) -> bool {
    let deg = 31 - p.leading_zeros();
    (2u32..1 << (deg / 2 + 1)).all(|d| poly_mod(p, d) != 0)
}

fn field_and_elems() -> impl Strategy<Value = (FieldSpec, Elem, Elem, Elem)> {
    (1u32..=8).prop_flat_map(|w| {
        let q = 1u16 << w;
        (Just(FieldSpec::with_width(w).unwrap()), 0..q, 0..q, 0..q)
            .prop_map(|(f, a, b, c)| (f, a as Elem, b as Elem, c as Elem))
    })
}

fn ctx(n: usize, f: &FieldSpec, seed: u64) -> MaskingContext {
    MaskingContext::new(n, f.clone(), seed).unwrap()
}

proptest! {
    #[test]
    fn table_mul_matches_shift_and_add((f, a, b, _) in field_and_elems()) {
        prop_assert_eq!(f.mul(a, b) as u32, slow_mul(a as u32, b as u32, f.w(), f.poly() as u32));
    }

    #[test]
    fn wrong_degree_is_rejected(w in 1u32..=8, poly in 0u16..512) {
        prop_assume!(poly >> w != 1);
        prop_assert!(FieldSpec::new(w, poly).is_err());
    }

    #[test]
    fn field_axioms((f, a, b, c) in field_and_elems()) {
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        } else {
            prop_assert!(f.inv(0).is_err());
        }
    }

    #[test]
    fn constructor_accepts_exactly_irreducible(w in 2u32..=8, low in 0u16..256) {
        let poly = (low & ((1 << w) - 1)) | 1 << w;
        let accepted = FieldSpec::new(w, poly).is_ok();
        prop_assert_eq!(accepted, irreducible(poly as u32), "w={} poly={:#x}", w, poly);
    }

    #[test]
    fn sharing_gadgets_preserve_values(
        (f, a, b, _) in field_and_elems(),
        n in 2usize..=5,
        seed in any::<u64>(),
    ) {
        let mut c = ctx(n, &f, seed);
        let x = bool_share(a, &mut c);
        let y = bool_share(b, &mut c);
        prop_assert!(x.shares.iter().all(|&s| f.contains(s as u32)));
        prop_assert_eq!(bool_unshare(&refresh(&x, &mut c)), a);
        prop_assert_eq!(bool_unshare(&strong_refresh(&x, &mut c)), a);
        prop_assert_eq!(full_add(&x, &mut c), a);
        prop_assert_eq!(bool_unshare(&sec_mult(&x, &y, &mut c)), f.mul(a, b));
        prop_assert_eq!(bool_unshare(&sec_and(&x, &y, &mut c)), a & b);
        prop_assert_eq!(bool_unshare(&sec_nonzero(&x, &mut c)), (a != 0) as Elem);
        if a != 0 {
            prop_assert_eq!(mult_unshare(&b2m(&x, &mut c), &f), a);
            prop_assert_eq!(mult_unshare(&b2minv(&x, &mut c), &f), f.inv(a).unwrap());
        }
    }

    #[test]
    fn bit_gadgets_are_boolean(bits in (any::<bool>(), any::<bool>()), n in 2usize..=5, seed in any::<u64>()) {
        let f = FieldSpec::gf16();
        let mut c = ctx(n, &f, seed);
        let x = bool_share(bits.0 as Elem, &mut c);
        let y = bool_share(bits.1 as Elem, &mut c);
        prop_assert_eq!(bool_unshare(&sec_not(&x, &mut c)), !bits.0 as Elem);
        prop_assert_eq!(bool_unshare(&sec_or(&x, &y, &mut c)), (bits.0 | bits.1) as Elem);
    }

    #[test]
    fn row_gadgets_compute_row_operations(
        rows in prop::collection::vec((0u8..16, 0u8..16), 1..8),
        scalar in 1u8..16,
        bit in any::<bool>(),
        n in 2usize..=4,
        seed in any::<u64>(),
    ) {
        let f = FieldSpec::gf16();
        let mut c = ctx(n, &f, seed);
        let (xv, yv): (Vec<Elem>, Vec<Elem>) = rows.into_iter().unzip();
        let x = SharedRow::share(&xv, &mut c);
        let y = SharedRow::share(&yv, &mut c);
        let b = bool_share(bit as Elem, &mut c);
        let s = bool_share(scalar, &mut c);
        let p = b2m(&s, &mut c);

        let added = sec_cond_add(&x, &y, &b, &mut c).unwrap().unshare();
        let want: Vec<Elem> = xv.iter().zip(&yv).map(|(&u, &v)| if bit { u ^ v } else { u }).collect();
        prop_assert_eq!(added, want);

        let scaled = sec_scalar_mult(&x, &p, &mut c).unwrap().unshare();
        prop_assert_eq!(scaled, xv.iter().map(|&u| f.mul(scalar, u)).collect::<Vec<_>>());

        let sub = sec_mult_sub(&x, &y, &s, &mut c).unwrap().unshare();
        let want: Vec<Elem> = xv.iter().zip(&yv).map(|(&u, &v)| v ^ f.mul(scalar, u)).collect();
        prop_assert_eq!(sub, want);
    }

    #[test]
    fn counters_do_not_depend_on_secrets(a in 0u8..=255, b in 0u8..=255, n in 2usize..=4) {
        let f = FieldSpec::gf256();
        let run = |v: Elem| {
            let mut c = ctx(n, &f, 1);
            let x = bool_share(v, &mut c);
            let z = sec_nonzero(&x, &mut c);
            let _ = sec_mult(&x, &z, &mut c);
            c.counters()
        };
        prop_assert_eq!(run(a), run(b));
    }

    #[test]
    fn trace_shape_is_secret_independent(
        case_idx in 0usize..GadgetCase::SECURE.len(),
        seed in any::<u64>(),
        pick in any::<[u8; 3]>(),
    ) {
        let case = GadgetCase::SECURE[case_idx];
        let f = FieldSpec::gf16();
        let secrets = case.default_secrets(&f);
        let s0 = &secrets[pick[0] as usize % secrets.len()];
        let s1 = &secrets[pick[1] as usize % secrets.len()];
        let t0 = record_trace(case, s0, &mut ctx(2 + pick[2] as usize % 2, &f, seed)).unwrap();
        let t1 = record_trace(case, s1, &mut ctx(2 + pick[2] as usize % 2, &f, seed ^ 1)).unwrap();
        prop_assert_eq!(t0.points, t1.points);
    }

    #[test]
    fn masked_solver_agrees_with_reference(
        m in 1usize..=6,
        n in 2usize..=3,
        seed in any::<u64>(),
        singular in any::<bool>(),
        limit in prop::option::of(1usize..=3),
    ) {
        let f = FieldSpec::gf16();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = if singular && m > 1 {
            LinearSystem::random_singular(&f, m, &mut rng)
        } else {
            LinearSystem::random(&f, m, &mut rng)
        };
        let tries = limit.map_or(PivotTries::All, PivotTries::Limit);
        let got = masked_solve(&sys, tries, &mut ctx(n, &f, seed)).unwrap();
        prop_assert_eq!(got, gaussian_elimination(&sys, tries));
    }
}

#[test]
fn strong_refresh_marginals_are_uniform() {
    let f = FieldSpec::gf16();
    let n = 3;
    let samples = 100_000;
    let mut c = ctx(n, &f, 99);
    let x = bool_share(7, &mut c);
    let mut hist = vec![[0u64; 16]; n];
    for _ in 0..samples {
        let y = strong_refresh(&x, &mut c);
        for (i, &s) in y.shares.iter().enumerate() {
            hist[i][s as usize] += 1;
        }
    }
    let expected = samples as f64 / 16.0;
    let chi = ChiSquared::new(15.0).unwrap();
    for (i, h) in hist.iter().enumerate() {
        let stat: f64 = h.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        let p = chi.sf(stat);
        assert!(p > 1e-3, "share {i}: chi2 {stat:.1}, p {p:.2e}");
    }
}
