use kstab::bergman::*;
use kstab::chow::{moment_matrix, pairing, trace_norm, HermitianForm};
use kstab::quad::Adaptive;
use proptest::prelude::*;

fn quad() -> Adaptive {
    default_quad()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn density_of_states_integrates_to_dimension(
        eps in -0.15f64..0.15,
        c in prop::collection::vec(-1.0f64..1.0, 1..4),
        extra in 0u32..2,
        k in 1usize..40,
    ) {
        let power = c.len() as u32 + extra;
        let m = match RadialMetric::new(eps, c, power) {
            Ok(m) => m,
            Err(_) => return Ok(()),
        };
        let g = gram(&m, k, &quad()).unwrap();
        prop_assert!(g.norms.iter().all(|n| *n > 0.0));
        let (v, _) = rho_integral(&m, &g, &quad());
        prop_assert!((v - (k as f64 + 1.0)).abs() < 1e-8, "{}", v);
        prop_assert!((fs_area(&m, &g, &quad()) - 1.0).abs() < 1e-8);
        prop_assert!(theta_total_variation(&m, &g, &quad()).unwrap().signed.abs() < 1e-10);
    }

    #[test]
    fn round_density_is_constant(k in 1usize..64) {
        let m = RadialMetric::round();
        let g = gram(&m, k, &quad()).unwrap();
        let want = (k as f64 + 1.0) / (2.0 * std::f64::consts::PI * k as f64);
        for r in rho(&m, &g, &sphere_grid(100)) {
            prop_assert!((r - want).abs() < 1e-9);
        }
    }
}

#[test]
fn fitted_coefficient_is_half_the_scalar_curvature() {
    let m = RadialMetric::bumped(0.1).unwrap();
    let grid = sphere_grid(40);
    let s = scalar_curvature(&m, &grid).unwrap();
    let fit = expansion_fit(&m, &[16, 32, 64], &grid, &quad()).unwrap();
    for ((a, s), x) in fit.a1.iter().zip(&s).zip(&grid) {
        assert!((a - s / 2.0).abs() <= 0.05 * (s / 2.0).abs(), "s = {x}: a1 = {a}, S/2 = {}", s / 2.0);
    }
    let round = expansion_fit(&RadialMetric::round(), &[16, 24, 32, 48, 64], &grid, &quad()).unwrap();
    assert!(round.a1.iter().all(|a| (a - 1.0).abs() < 1e-8));
}

#[test]
fn fitted_coefficient_is_stable_under_refinement() {
    let m = RadialMetric::bumped(0.1).unwrap();
    let grid = sphere_grid(16);
    let base = expansion_fit(&m, &[16, 32, 64], &grid, &quad()).unwrap();
    let finer = expansion_fit(&m, &[16, 32, 64], &grid, &Adaptive { order: 32, ..quad() }).unwrap();
    let window = expansion_fit(&m, &[24, 32, 48, 64], &grid, &quad()).unwrap();
    for i in 0..grid.len() {
        assert!((base.a1[i] - finer.a1[i]).abs() <= 0.005 * base.a1[i].abs());
        assert!((base.a1[i] - window.a1[i]).abs() <= 0.005 * base.a1[i].abs());
    }
}

#[test]
fn remainder_stays_bounded() {
    let m = RadialMetric::bumped(0.1).unwrap();
    let fit = expansion_fit(&m, &[8, 16, 32, 64], &sphere_grid(30), &quad()).unwrap();
    let bound = fit.remainder_bound();
    let worst = bound.iter().copied().fold(0.0, f64::max);
    assert!(worst < 1.0, "{worst}");
    // the largest level contributes no more than the smallest
    let first: f64 = fit.remainder[0].iter().map(|v| v.abs()).fold(0.0, f64::max);
    let last: f64 = fit.remainder[3].iter().map(|v| v.abs()).fold(0.0, f64::max);
    assert!(last <= 1.5 * first, "{first} {last}");
}

#[test]
fn pullback_density_is_positive() {
    let m = RadialMetric::bumped(0.1).unwrap();
    let g = gram(&m, 32, &quad()).unwrap();
    assert!(fs_pullback_form(&m, &g, &sphere_grid(200)).unwrap().iter().all(|d| *d > 0.0));
}

#[test]
fn theta_decreases_at_first_order() {
    let q = quad();
    let m = RadialMetric::bumped(0.1).unwrap();
    let limit = curvature_deviation(&m, &q);
    let mut prev = f64::INFINITY;
    let mut prev_rem = f64::INFINITY;
    for k in [8, 16, 32, 64, 128] {
        let g = gram(&m, k, &q).unwrap();
        let t = theta_total_variation(&m, &g, &q).unwrap().value;
        assert!(t < prev);
        prev = t;
        // k ∫|Θ_k| tends to ∫|S/2 - 1| ω
        assert!((k as f64 * t / limit - 1.0).abs() < 0.04, "k = {k}");
        let r = theta_remainder_variation(&m, &g, &q).unwrap().value;
        assert!(r < prev_rem && r < t);
        prev_rem = r;
    }
}

#[test]
fn moments_agree_with_the_image_curve() {
    let m = RadialMetric::bumped(0.1).unwrap();
    let chow_quad = Adaptive { order: 16, tol: 1e-10, max_depth: 12 };
    for k in [2, 3, 4] {
        let g = gram(&m, k, &quad()).unwrap();
        let (diag, _) = bergman_moment(&m, &g, &quad()).unwrap();
        let mm = moment_matrix(&embedding_curve(&g), &chow_quad).unwrap().matrix;
        for a in 0..=k {
            for b in 0..=k {
                let want = if a == b { diag[a] } else { 0.0 };
                assert!((mm.0[(a, b)].re - want).abs() < 1e-6 && mm.0[(a, b)].im.abs() < 1e-6);
            }
        }
        if k == 3 {
            let a = [1.0, 0.0, 0.0, -1.0];
            let p = moment_from_bergman(&m, &g, &a, &quad()).unwrap();
            assert!((p - pairing(&mm, &a).unwrap()).abs() < 1e-6);
        }
        let shifted: Vec<f64> = (0..=k).map(|_| 2.5).collect();
        assert!(moment_from_bergman(&m, &g, &shifted, &quad()).unwrap().abs() < 1e-12);
    }
}

#[test]
fn round_embeddings_are_balanced() {
    let m = RadialMetric::round();
    for k in [2, 5, 8, 16, 32] {
        let g = gram(&m, k, &quad()).unwrap();
        let (diag, _) = bergman_moment(&m, &g, &quad()).unwrap();
        assert!(trace_norm(&HermitianForm::diagonal(&diag)) <= 1e-10, "k = {k}");
        let a: Vec<f64> = (0..=k).map(|j| j as f64 - k as f64 / 2.0).collect();
        assert!(moment_from_bergman(&m, &g, &a, &quad()).unwrap().abs() < 1e-8);
    }
}

#[test]
fn metric_json_round_trips() {
    let v = serde_json::json!({"epsilon": 0.1, "bump": {"type": "rational", "coeffs": [0, 1]}});
    let m = RadialMetric::from_json(&v).unwrap();
    assert_eq!(m.power, 2);
    let again = RadialMetric::from_json(&m.to_json()).unwrap();
    assert_eq!(again.coeffs, m.coeffs);
    let bad = serde_json::json!({"epsilon": 0.1, "bump": {"type": "rational", "coeffs": [0, "x"]}});
    let e = RadialMetric::from_json(&bad).unwrap_err().to_string();
    assert!(e.contains("bump.coeffs[1]"), "{e}");
}
