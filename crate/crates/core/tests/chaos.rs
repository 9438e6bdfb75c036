use celm_core::chaos::*;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn iterates_stay_in_open_interval() {
    let s = LogisticMapStream::new(7, DEFAULT_BURN_IN);
    for (i, x) in s.take(1_000_000).enumerate() {
        assert!(x > 0.0 && x < 1.0, "iterate {i} = {x}");
    }
}

#[test]
fn same_seed_same_stream() {
    let a: Vec<f64> = LogisticMapStream::new(3, 100).take(1000).collect();
    let b: Vec<f64> = LogisticMapStream::new(3, 100).take(1000).collect();
    assert_eq!(a, b);
    let c: Vec<f64> = LogisticMapStream::new(4, 100).take(1000).collect();
    assert_ne!(a, c);
}

#[test]
fn nearby_orbits_separate() {
    let mut diverged = 0;
    for seed in 0..1000u64 {
        let x0 = LogisticMapStream::new(seed, 0).state();
        let y0 = if x0 < 0.5 { x0 + 1e-10 } else { x0 - 1e-10 };
        let a = LogisticMapStream::from_state(x0).unwrap();
        let b = LogisticMapStream::from_state(y0).unwrap();
        if a.zip(b).take(60).any(|(x, y)| (x - y).abs() > 0.1) {
            diverged += 1;
        }
    }
    assert!(diverged >= 950, "only {diverged}/1000 orbits separated");
}

#[test]
fn histogram_is_not_uniform() {
    let bins = 20;
    let n = 100_000;
    let mut counts = vec![0f64; bins];
    for x in LogisticMapStream::new(11, DEFAULT_BURN_IN).take(n) {
        counts[((x * bins as f64) as usize).min(bins - 1)] += 1.0;
    }
    let expected = n as f64 / bins as f64;
    let stat: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
    let p = ChiSquared::new((bins - 1) as f64).unwrap().sf(stat);
    assert!(p < 0.01, "chi-square {stat}, p = {p}");
    // mass piles up at the edges
    assert!(counts[0] > 2.0 * counts[bins / 2]);
}

#[test]
fn degenerate_starts_rejected() {
    for x in [0.0, 0.25, 0.5, 0.75, 1.0, -0.1, 1.5, f64::NAN] {
        assert!(LogisticMapStream::from_state(x).is_err(), "{x}");
    }
    assert!(LogisticMapStream::from_state(0.3).is_ok());
}

#[test]
fn fixed_point_is_absorbing_without_clamp() {
    // 0.75 is a fixed point of the map, which is why it is refused as a start
    assert_eq!(LOGISTIC_R * 0.75 * 0.25, 0.75);
}

#[test]
fn param_shapes_and_ranges() {
    let (w, b) = generate_chaotic_params(8, 3, 5).unwrap();
    assert_eq!(w.shape(), (3, 8));
    assert_eq!(b.len(), 3);
    assert!(w.iter().chain(b.iter()).all(|&v| v > 0.0 && v < 1.0));

    let (u, c) = generate_uniform_params(8, 3, 5).unwrap();
    assert_eq!(u.shape(), (3, 8));
    assert_eq!(c.len(), 3);
    assert!(u.iter().chain(c.iter()).all(|&v| (0.0..1.0).contains(&v)));

    assert!(generate_chaotic_params(0, 3, 1).is_err());
    assert!(generate_uniform_params(2, 0, 1).is_err());
}

#[test]
fn weights_then_biases_from_one_stream() {
    let (w, b) = generate_chaotic_params_with(2, 3, 9, 50).unwrap();
    let s: Vec<f64> = LogisticMapStream::new(9, 50).take(9).collect();
    assert_eq!(w.row(0).iter().copied().collect::<Vec<_>>(), s[0..2]);
    assert_eq!(w.row(2).iter().copied().collect::<Vec<_>>(), s[4..6]);
    assert_eq!(b.as_slice(), &s[6..9]);
}

proptest! {
    #[test]
    fn stream_is_deterministic_and_bounded(seed in any::<u64>(), burn in 0usize..200) {
        let a: Vec<f64> = LogisticMapStream::new(seed, burn).take(200).collect();
        let b: Vec<f64> = LogisticMapStream::new(seed, burn).take(200).collect();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn step_follows_the_map(x0 in 0.001f64..0.999) {
        prop_assume!(LogisticMapStream::from_state(x0).is_ok());
        let mut s = LogisticMapStream::from_state(x0).unwrap();
        let x1 = s.next().unwrap();
        prop_assert!((x1 - 4.0 * x0 * (1.0 - x0)).abs() < 1e-15);
    }
}
