use kstab::chow::{
    chow_weight, conic_inequality, moment_matrix, pairing, rational_normal_curve, standard_conic, trace_norm,
    HermitianForm, HypersurfaceForm, ProjectiveCycle,
};
use kstab::laurent::{LaurentMatrix, LaurentPoly};
use kstab::quad::Adaptive;
use kstab::rational::{rat, ratio};
use kstab::weights::{chow_k, gap, tau_poly, SignConvention, WeightSystem};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex64;

fn quad() -> Adaptive {
    Adaptive { order: 16, tol: 1e-11, max_depth: 10 }
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianForm {
    let x = DMatrix::from_fn(n, n, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    HermitianForm::symmetrize(&x)
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C> {
    let x = DMatrix::from_fn(n, n, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    x.qr().q()
}

/// Lower unipotent `R` respecting the degree bound for nonincreasing `w`.
fn admissible_r(rng: &mut ChaCha8Rng, w: &[i64]) -> LaurentMatrix {
    let n = w.len();
    let mut r = LaurentMatrix::identity(n);
    for a in 0..n {
        for b in 0..a {
            let gap = w[b] - w[a];
            let mut p = LaurentPoly::zero();
            for e in 0..gap {
                p.add_term(e, rat(rng.gen_range(-3..=3)));
            }
            r.set(a, b, p);
        }
    }
    r
}

fn random_smooth_conic(rng: &mut ChaCha8Rng) -> HypersurfaceForm {
    loop {
        let mut terms = Vec::new();
        for e in [[2, 0, 0], [0, 2, 0], [0, 0, 2], [1, 1, 0], [1, 0, 1], [0, 1, 1]] {
            terms.push((e.to_vec(), rat(rng.gen_range(-2..=2))));
        }
        let q = |i: usize, j: usize| -> f64 {
            let mut e = [0u32; 3];
            e[i] += 1;
            e[j] += 1;
            let c = terms.iter().find(|(x, _)| x[..] == e[..]).map_or(0, |t| t.1.to_integer().try_into().unwrap());
            if i == j { c as f64 } else { c as f64 / 2.0 }
        };
        let m = nalgebra::Matrix3::from_fn(q);
        if m.determinant().abs() > 1e-9 {
            return HypersurfaceForm::from_rational(3, terms).unwrap();
        }
    }
}

#[test]
fn trace_norm_bounds_pairing() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..200 {
        let n = rng.gen_range(2..=6);
        let m = random_hermitian(&mut rng, n).trace_free();
        let a: Vec<i64> = (0..n).map(|_| rng.gen_range(-5..=5)).collect();
        let af: Vec<f64> = a.iter().map(|&x| x as f64).collect();
        let lhs = pairing(&m, &af).unwrap().abs();
        let rhs = 2.0 * gap(&a).unwrap() as f64 * trace_norm(&m);
        assert!(lhs <= rhs + 1e-12, "{lhs} > {rhs}");
    }
}

#[test]
fn moment_matrix_is_unitarily_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        C::new(2.0, 0.0),
        C::new(1.0, 0.5),
        C::new(0.7, 0.0),
        C::new(1.0, 0.0),
    ]));
    let z = rational_normal_curve(3).transform(&d).unwrap();
    let m = moment_matrix(&z, &quad()).unwrap();
    for _ in 0..5 {
        let u = random_unitary(&mut rng, 4);
        let mu = moment_matrix(&z.transform(&u).unwrap(), &quad()).unwrap();
        let expected = HermitianForm(&u * &m.matrix.0 * u.adjoint());
        assert!(mu.matrix.max_abs_diff(&expected) < 1e-10);
        assert!(mu.matrix.trace().abs() < 1e-12);
    }
}

#[test]
fn chow_weight_of_diagonal_loops_matches_weight_polynomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..30 {
        let f = random_smooth_conic(&mut rng);
        let w: Vec<i64> = (0..3).map(|_| rng.gen_range(-3..=3)).collect();
        let g = LaurentMatrix::t_pow_diag(&w);
        let ch = chow_weight(&f, &g, &rat(2), 2, SignConvention::Calibrated).unwrap();
        let ws = WeightSystem::hypersurface(w.clone(), 2, f.max_monomial_weight(&w)).unwrap();
        let tau = tau_poly(&ws, SignConvention::Calibrated, 1).unwrap();
        assert_eq!(ch, chow_k(&tau, 1), "weights {w:?}");
    }
}

#[test]
fn conic_equivariant_equality() {
    let f = standard_conic();
    let g = LaurentMatrix::t_pow_diag(&[0, 0, 1]);
    assert_eq!(chow_weight(&f, &g, &rat(2), 2, SignConvention::Calibrated).unwrap(), ratio(1, 12));
    let r = conic_inequality(&f, &g, &quad(), 1e-6).unwrap();
    assert!(r.equivariant);
    assert!(r.slack.abs() <= 1e-6 && r.quadrature_error <= 1e-8, "{r:?}");
}

#[test]
fn perturbed_loops_respect_the_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut strict = 0;
    for trial in 0..50 {
        let f = if trial % 2 == 0 { standard_conic() } else { random_smooth_conic(&mut rng) };
        let mut w: Vec<i64> = (0..3).map(|_| rng.gen_range(-2..=2)).collect();
        w.sort_by(|a, b| b.cmp(a));
        let g = kstab::laurent::multiply(&LaurentMatrix::t_pow_diag(&w), &admissible_r(&mut rng, &w)).unwrap();
        let r = conic_inequality(&f, &g, &quad(), 1e-6).unwrap();
        assert!(r.holds, "trial {trial}: {r:?}");
        if r.slack > 1e-6 {
            strict += 1;
        }
    }
    eprintln!("strict inequalities: {strict}/50");
}

#[test]
fn forms_are_not_moment_inputs() {
    let z = ProjectiveCycle::Hypersurface(standard_conic());
    assert!(moment_matrix(&z, &quad()).is_err());
}
