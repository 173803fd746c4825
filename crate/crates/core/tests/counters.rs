use maskge::cost::{
    counter_vs_formula, measure, pipeline_itemized, sec_nonzero_itemized_r,
    sec_nonzero_itemized_t, Gadget,
};

const SIZES: [usize; 3] = [1, 2, 10];

#[test]
fn unit_gadgets_match_printed_forms() {
    for g in Gadget::units() {
        if g == Gadget::SecNonzero {
            continue;
        }
        for n in 2..=5 {
            for w in [4, 8] {
                for l in SIZES {
                    let d = counter_vs_formula(g, n, l, w, 7).unwrap();
                    assert!(d.is_exact(), "{d:?}");
                    if !g.is_row() {
                        break;
                    }
                }
            }
        }
    }
}

#[test]
fn sec_nonzero_matches_itemized_form() {
    for n in 2..=5usize {
        for w in 1..=8 {
            let c = measure(Gadget::SecNonzero, n, 1, w, 3).unwrap();
            assert_eq!(c.ops, sec_nonzero_itemized_t(n as u64, w), "n={n} w={w}");
            assert_eq!(c.rng_bits, sec_nonzero_itemized_r(n as u64, w), "n={n} w={w}");
        }
    }
}

#[test]
fn pipeline_matches_itemized_form() {
    for n in 2..=4usize {
        for (m, w) in [(1, 8), (2, 4), (4, 4), (7, 8), (12, 3)] {
            let a = measure(Gadget::SecRowEch, n, m, w, 1).unwrap();
            let b = measure(Gadget::SecBackSub, n, m, w, 1).unwrap();
            assert_eq!(
                (a.ops + b.ops, a.rng_bits + b.rng_bits),
                pipeline_itemized(n as u64, m as u64, w),
                "n={n} m={m} w={w}"
            );
        }
    }
}
