use celm_core::elm::*;
use celm_core::CoreError;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn random_matrix(r: usize, c: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn penrose_residuals(a: &DMatrix<f64>) -> [f64; 4] {
    let p = moore_penrose(a);
    let ap = a * &p;
    let pa = &p * a;
    [rel(&(&ap * a), a), rel(&(&pa * &p), &p), rel(&ap.transpose(), &ap), rel(&pa.transpose(), &pa)]
}

#[test]
fn penrose_conditions_hold() {
    for (i, (r, c)) in [(10, 3), (3, 10), (8, 8)].into_iter().enumerate() {
        for trial in 0..20 {
            let a = random_matrix(r, c, 100 * i as u64 + trial);
            for (k, res) in penrose_residuals(&a).into_iter().enumerate() {
                assert!(res < 1e-8, "{r}x{c} trial {trial} condition {}: {res:e}", k + 1);
            }
        }
    }
}

#[test]
fn penrose_conditions_hold_rank_deficient() {
    // rank 2 in a 6x4 shape
    let a = random_matrix(6, 2, 1) * random_matrix(2, 4, 2);
    for res in penrose_residuals(&a) {
        assert!(res < 1e-8, "{res:e}");
    }
    let z = DMatrix::<f64>::zeros(3, 2);
    assert_eq!(moore_penrose(&z), DMatrix::zeros(2, 3));
}

#[test]
fn pseudoinverse_of_invertible_is_inverse() {
    let a = random_matrix(5, 5, 9);
    let inv = a.clone().try_inverse().unwrap();
    assert!(rel(&moore_penrose(&a), &inv) < 1e-10);
}

#[test]
fn as_many_nodes_as_samples_fits_exactly() {
    let n = 12;
    let x = random_matrix(n, 4, 3);
    let w = random_matrix(n, 4, 4).map(|v| v.abs());
    let b = DVector::from_fn(n, |i, _| (i as f64 + 0.5) / n as f64);
    let t = DVector::from_fn(n, |i, _| (i % 2) as f64);
    let mut m = ElmModel::new(w, b, Activation::Sigmoid).unwrap();
    m.fit(&x, &t).unwrap();
    let err = (m.predict_scores(&x).unwrap() - &t).amax();
    assert!(err < 1e-6, "training error {err:e}");
}

#[test]
fn least_squares_oracle() {
    // overdetermined: β must satisfy the normal equations
    let h = random_matrix(30, 4, 5);
    let t = DVector::from_fn(30, |i, _| (i % 3) as f64);
    let beta = solve_output_weights(&h, &t).unwrap();
    let normal = h.transpose() * (&h * &beta - &t);
    assert!(normal.amax() < 1e-10);
    assert!(matches!(solve_output_weights(&h, &DVector::zeros(3)), Err(CoreError::Shape(_))));
}

#[test]
fn cubic_tracks_sigmoid_within_bound() {
    let (mut worst, mut at) = (0.0f64, 0.0);
    for i in 0..=10_000 {
        let x = -5.0 + i as f64 * 1e-3;
        let e = (poly_sigmoid(x) - exact_sigmoid(x)).abs();
        if e > worst {
            worst = e;
            at = x;
        }
    }
    assert!(worst <= 0.06, "max error {worst} at {at}");
    assert!((3.5..=4.5).contains(&at.abs()), "max error at {at}");
    assert_eq!(poly_sigmoid(0.0), 0.5);
    // odd symmetry around (0, 0.5)
    assert!((poly_sigmoid(2.0) + poly_sigmoid(-2.0) - 1.0).abs() < 1e-15);
}

#[test]
fn hidden_matrix_matches_definition() {
    let x = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.0, 0.5]);
    let w = DMatrix::from_row_slice(2, 3, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
    let b = DVector::from_vec(vec![0.1, -0.2]);
    let h = hidden_matrix(&x, &w, &b, Activation::PolySigmoid).unwrap();
    assert_eq!(h.shape(), (2, 2));
    let z10 = -1.0 * 0.4 + 0.0 * 0.5 + 0.5 * 0.6 - 0.2;
    assert!((h[(1, 1)] - poly_sigmoid(z10)).abs() < 1e-15);
    assert!(hidden_matrix(&x, &w.columns(0, 2).into(), &b, Activation::Sigmoid).is_err());
    assert!(hidden_matrix(&x, &w, &DVector::zeros(3), Activation::Sigmoid).is_err());
}

#[test]
fn model_errors() {
    let w = DMatrix::from_element(2, 3, 0.5);
    assert!(ElmModel::new(w.clone(), DVector::zeros(3), Activation::Sigmoid).is_err());
    let m = ElmModel::new(w, DVector::zeros(2), Activation::Sigmoid).unwrap();
    assert!(matches!(m.predict_scores(&DMatrix::zeros(1, 3)), Err(CoreError::NotFit)));
}

#[test]
fn output_modes() {
    let s = [0.7, 0.3, -0.1, 0.5];
    assert_eq!(classify(&s, OutputMode::Linear), vec![1, 0, 0, 0]);
    assert_eq!(classify(&s, OutputMode::Sigmoid), vec![1, 1, 0, 1]);
    assert_eq!(accuracy(&[1, 0, 1], &[1, 1, 1]).unwrap(), 2.0 / 3.0);
    assert!(accuracy(&[], &[]).is_err());
    assert_eq!(OutputMode::parse("Sigmoid").unwrap(), OutputMode::Sigmoid);
    assert!(OutputMode::parse("tanh").is_err());
}

proptest! {
    #[test]
    fn penrose_on_random_shapes(r in 1usize..9, c in 1usize..9, seed in any::<u64>()) {
        let a = random_matrix(r, c, seed);
        for res in penrose_residuals(&a) {
            prop_assert!(res < 1e-8);
        }
    }

    #[test]
    fn accuracy_in_unit_interval(labels in proptest::collection::vec(0u8..2, 1..50), seed in any::<u64>()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let pred: Vec<u8> = labels.iter().map(|_| rng.random_range(0..2)).collect();
        let a = accuracy(&pred, &labels).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert_eq!(accuracy(&labels, &labels).unwrap(), 1.0);
    }
}
