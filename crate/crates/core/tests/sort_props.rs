use bops_core::workloads::{
    generate, multiset_checksum, run_sort, sort_counted, sort_uncounted, Mode, RunConfig,
};
use bops_core::TallySource;
use proptest::prelude::*;

fn is_sorted(v: &[i64]) -> bool {
    v.windows(2).all(|w| w[0] <= w[1])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn counted_sort_sorts_and_permutes(n in 2u64..40_000, seed in any::<u64>(), threads in 1u32..9) {
        let mut v = generate(n, seed, threads).unwrap();
        let before = multiset_checksum(&v);
        let mut expected = v.clone();
        expected.sort_unstable();
        let counts = sort_counted(&mut v, threads).unwrap();
        prop_assert_eq!(&v, &expected);
        prop_assert_eq!(multiset_checksum(&v), before);
        prop_assert_eq!(counts.bytes_accessed, 8.0 * counts.tally.addressing as f64);
    }

    #[test]
    fn uncounted_sort_matches_counted(n in 2u64..20_000, seed in any::<u64>(), threads in 1u32..9) {
        let mut a = generate(n, seed, threads).unwrap();
        let mut b = a.clone();
        sort_counted(&mut a, threads).unwrap();
        sort_uncounted(&mut b, threads).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn data_is_independent_of_thread_count(n in 1u64..300_000, seed in any::<u64>(), t in 2u32..16) {
        prop_assert_eq!(generate(n, seed, 1).unwrap(), generate(n, seed, t).unwrap());
    }

    #[test]
    fn counting_is_deterministic(n in 2u64..10_000, seed in any::<u64>(), threads in 1u32..5) {
        let a = sort_counted(&mut generate(n, seed, threads).unwrap(), threads).unwrap();
        let b = sort_counted(&mut generate(n, seed, threads).unwrap(), threads).unwrap();
        prop_assert_eq!(a.tally, b.tally);
    }
}

#[test]
fn adversarial_inputs_sort() {
    let n = 50_000i64;
    let inputs: Vec<Vec<i64>> = vec![
        (0..n).collect(),
        (0..n).rev().collect(),
        vec![7; n as usize],
        (0..n).map(|i| i % 3).collect(),
        (0..n)
            .map(|i| if i % 2 == 0 { i64::MIN } else { i64::MAX })
            .collect(),
        (0..n).map(|i| (i * 7919) % 1013 - 500).collect(),
    ];
    for input in inputs {
        for threads in [1, 3, 8] {
            let mut v = input.clone();
            sort_counted(&mut v, threads).unwrap();
            assert!(is_sorted(&v));
            assert_eq!(multiset_checksum(&v), multiset_checksum(&input));
        }
    }
}

#[test]
fn class_ordering_at_scale() {
    for (n, threads) in [(10_000, 1), (100_000, 4), (300_000, 2)] {
        let t = sort_counted(&mut generate(n, 5, threads).unwrap(), threads)
            .unwrap()
            .tally;
        assert!(t.addressing > t.arithmetic, "{n}: {t:?}");
        assert!(t.arithmetic > t.comparing, "{n}: {t:?}");
    }
}

#[test]
fn run_sort_modes() {
    let counting = run_sort(&RunConfig::sort(10_000, 1, 2, Mode::Counting)).unwrap();
    assert_eq!(counting.tally_source, TallySource::Counted);
    assert!(counting.bytes_accessed > 0.0);
    let timing = run_sort(&RunConfig::sort(10_000, 1, 2, Mode::Timing)).unwrap();
    assert_eq!(timing.tally_source, TallySource::Absent);
    assert!(timing.tally.is_zero());
    let merged = timing.with_counts_from(&counting);
    assert_eq!(merged.tally, counting.tally);
    assert_eq!(merged.tally_source, TallySource::Copied);
    assert!(run_sort(&RunConfig::sort(1, 1, 1, Mode::Counting)).is_err());
    assert!(run_sort(&RunConfig::sort(100, 1, 0, Mode::Counting)).is_err());
}
