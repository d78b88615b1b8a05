use loewner_lab::inequality::{
    check_key_lemma, check_operator_ssa, check_operator_wm, check_renyi, coarse_graining_isometry,
    single_term_spectrum, DEFAULT_TOL,
};
use loewner_lab::linalg::{hermitian_eig, kron, matrix_fn, operator_norm};
use loewner_lab::search::StateParams;
use loewner_lab::state::{random_density_from, trial_rng};
use loewner_lab::tensor::{embed, partial_trace, permute_systems};
use loewner_lab::{ComplexMatrix, DensityMatrix, MatrixFunction, SystemShape, C64};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian(seed: u64, rows: usize, cols: usize) -> ComplexMatrix {
    let mut rng = trial_rng(seed, 7);
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn hermitian(seed: u64, n: usize) -> ComplexMatrix {
    let g = gaussian(seed, n, n);
    (&g + &g.adjoint()).scale(0.5)
}

fn state(seed: u64, dims: &[usize]) -> DensityMatrix {
    let shape = SystemShape::lettered(dims).unwrap();
    random_density_from(&mut trial_rng(seed, 0), &shape, None).unwrap()
}

fn pair(seed: u64, dims: [usize; 3]) -> (DensityMatrix, DensityMatrix) {
    let mut rng = trial_rng(seed, 1);
    let ab = SystemShape::new([("A", dims[0]), ("B", dims[1])]).unwrap();
    let bc = SystemShape::new([("B", dims[1]), ("C", dims[2])]).unwrap();
    (
        random_density_from(&mut rng, &ab, None).unwrap(),
        random_density_from(&mut rng, &bc, None).unwrap(),
    )
}

fn dim3() -> impl Strategy<Value = [usize; 3]> {
    [1usize..=3, 1usize..=3, 1usize..=3]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_is_associative(seed: u64, d in dim3()) {
        let (a, b, c) = (gaussian(seed, d[0], d[1]), gaussian(seed ^ 1, d[2], d[0]), gaussian(seed ^ 2, d[1], d[2]));
        let left = kron(&kron(&a, &b).unwrap(), &c).unwrap();
        let right = kron(&a, &kron(&b, &c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) <= 1e-12 * (1.0 + left.max_abs()));
    }

    #[test]
    fn kron_trace_and_mixed_product(seed: u64, m in 1usize..=3, n in 1usize..=3) {
        let (a, b) = (gaussian(seed, m, m), gaussian(seed ^ 3, n, n));
        let (c, d) = (gaussian(seed ^ 4, m, m), gaussian(seed ^ 5, n, n));
        let k = kron(&a, &b).unwrap();
        prop_assert!((k.trace() - a.trace() * b.trace()).norm() <= 1e-12 * (1.0 + k.frobenius_norm()));
        let lhs = k.matmul(&kron(&c, &d).unwrap()).unwrap();
        let rhs = kron(&a.matmul(&c).unwrap(), &b.matmul(&d).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-11 * (1.0 + lhs.max_abs()));
    }

    #[test]
    fn eig_reconstructs_and_orders(seed: u64, n in 1usize..=8) {
        let h = hermitian(seed, n);
        let eig = hermitian_eig(&h).unwrap();
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(eig.reconstruct().max_abs_diff(&h) <= 1e-12 * (1.0 + h.max_abs()));
        let tr: f64 = eig.eigenvalues.iter().sum();
        prop_assert!((tr - h.trace().re).abs() <= 1e-11 * (1.0 + h.frobenius_norm()));
    }

    #[test]
    fn powers_add(seed: u64, n in 1usize..=5, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let rho = state(seed, &[n]);
        let p = |t| matrix_fn(rho.data(), MatrixFunction::Power(t)).unwrap();
        let lhs = p(a).matmul(&p(b)).unwrap();
        let rhs = p(a + b);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-8 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn exp_inverts_log(seed: u64, n in 1usize..=5) {
        let rho = state(seed, &[n]);
        let back = matrix_fn(&matrix_fn(rho.data(), MatrixFunction::Log).unwrap(), MatrixFunction::Exp).unwrap();
        prop_assert!(back.max_abs_diff(rho.data()) <= 1e-10);
    }

    #[test]
    fn operator_norm_is_submultiplicative(seed: u64, n in 1usize..=4) {
        let (a, b) = (gaussian(seed, n, n), gaussian(seed ^ 9, n, n));
        let ab = operator_norm(&a.matmul(&b).unwrap()).unwrap();
        prop_assert!(ab <= operator_norm(&a).unwrap() * operator_norm(&b).unwrap() * (1.0 + 1e-12));
        let k = operator_norm(&kron(&a, &b).unwrap()).unwrap();
        let prod = operator_norm(&a).unwrap() * operator_norm(&b).unwrap();
        prop_assert!((k - prod).abs() <= 1e-10 * (1.0 + prod));
    }

    #[test]
    fn partial_trace_of_embedding(seed: u64, d in dim3(), mask in 1u8..7) {
        let full = SystemShape::lettered(&d).unwrap();
        let labels = full.labels();
        let support: Vec<&str> = (0..3).filter(|k| mask >> k & 1 == 1).map(|k| labels[k]).collect();
        let rest = full.complement(&support);
        let s: usize = support.iter().map(|l| full.dim_of(l).unwrap()).product();
        let r: usize = rest.iter().map(|l| full.dim_of(l).unwrap()).product();
        let m = gaussian(seed, s, s);
        let back = partial_trace(&embed(&m, &support, &full).unwrap(), &full, &rest).unwrap();
        prop_assert!(back.max_abs_diff(&m.scale(r as f64)) <= 1e-12 * (1.0 + r as f64 * m.max_abs()));
    }

    #[test]
    fn partial_trace_keeps_trace_and_hermiticity(seed: u64, d in dim3(), mask in 0u8..8) {
        let full = SystemShape::lettered(&d).unwrap();
        let labels = full.labels();
        let traced: Vec<&str> = (0..3).filter(|k| mask >> k & 1 == 1).map(|k| labels[k]).collect();
        let h = hermitian(seed, full.total_dim());
        let t = partial_trace(&h, &full, &traced).unwrap();
        prop_assert!((t.trace() - h.trace()).norm() <= 1e-12 * (1.0 + h.frobenius_norm()));
        prop_assert!(t.hermitian_defect() <= 1e-12 * (1.0 + t.frobenius_norm()));
    }

    #[test]
    fn permutation_round_trip(seed: u64, d in dim3()) {
        let full = SystemShape::lettered(&d).unwrap();
        let op = gaussian(seed, full.total_dim(), full.total_dim());
        let there = permute_systems(&op, &full, &["C", "A", "B"]).unwrap();
        let moved = full.reordered(&["C", "A", "B"]).unwrap();
        let back = permute_systems(&there, &moved, &["A", "B", "C"]).unwrap();
        prop_assert_eq!(back, op);
    }

    #[test]
    fn marginals_are_states(seed: u64, d in dim3()) {
        let rho = state(seed, &d);
        for keep in [&["A"][..], &["B", "C"], &["A", "C"]] {
            let m = rho.marginal(keep).unwrap();
            prop_assert!((m.data().trace().re - 1.0).abs() <= 1e-12);
            prop_assert!(m.lambda_min() >= 0.0);
        }
    }

    #[test]
    fn regularize_lifts_spectrum(seed: u64, n in 1usize..=6, e1 in 1e-6f64..0.5, e2 in 1e-6f64..0.5) {
        let shape = SystemShape::lettered(&[n]).unwrap();
        let rho = random_density_from(&mut trial_rng(seed, 2), &shape, Some(1)).unwrap();
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = rho.regularize(lo).unwrap();
        let b = rho.regularize(hi).unwrap();
        prop_assert!(a.lambda_min() <= b.lambda_min() + 1e-15);
        prop_assert!(b.lambda_min() >= hi / n as f64 * (1.0 - 1e-9));
        prop_assert!((b.data().trace().re - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn entropy_is_bounded(seed: u64, n in 1usize..=8) {
        let s = state(seed, &[n]).von_neumann_entropy().unwrap();
        prop_assert!(s >= -1e-12 && s <= (n as f64).ln() + 1e-12);
    }

    #[test]
    fn purification_round_trip(seed: u64, a in 1usize..=3, b in 1usize..=3) {
        let rho = state(seed, &[a, b]);
        let pure = rho.purify("R").unwrap();
        let back = pure.marginal(&["A", "B"]).unwrap();
        prop_assert!(back.data().max_abs_diff(rho.data()) <= 1e-10);
    }

    #[test]
    fn density_json_round_trip(seed: u64, d in dim3()) {
        let rho = state(seed, &d);
        prop_assert_eq!(DensityMatrix::from_json(&rho.to_json().unwrap()).unwrap(), rho);
    }

    #[test]
    fn decode_is_always_a_state(raw in proptest::collection::vec(-3.0f64..3.0, 32)) {
        let shape = SystemShape::lettered(&[2, 2]).unwrap();
        if let Ok(rho) = StateParams::new(shape, raw).unwrap().decode() {
            prop_assert!(rho.lambda_min() > 0.0);
            prop_assert!((rho.data().trace().re - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn isometries_are_isometric(seed: u64, d in dim3()) {
        let (rho, sigma) = pair(seed, d);
        prop_assert!(coarse_graining_isometry(&rho, "B").unwrap().defect <= 1e-10);
        prop_assert!(coarse_graining_isometry(&sigma, "B").unwrap().defect <= 1e-10);
    }

    #[test]
    fn operator_inequalities_hold(seed: u64, d in dim3(), alpha in 0.0f64..=1.0) {
        let (rho, sigma) = pair(seed, d);
        let thr = |scale: f64| -DEFAULT_TOL * (1.0 + scale);
        let key = check_key_lemma(&rho, &sigma, DEFAULT_TOL).unwrap();
        prop_assert!(key.slack_min_eig >= thr(key.scale));
        let wm = check_operator_wm(&rho, &sigma, DEFAULT_TOL).unwrap();
        prop_assert!(wm.slack_min_eig >= thr(wm.scale));
        let renyi = check_renyi(&rho, &sigma, alpha, DEFAULT_TOL).unwrap();
        prop_assert!(renyi.slack_min_eig >= thr(renyi.scale));
        let ssa = check_operator_ssa(&state(seed, &d), DEFAULT_TOL).unwrap();
        prop_assert!(ssa.slack_min_eig >= thr(ssa.scale));
    }

    #[test]
    fn single_term_vanishes_on_products(seed: u64, a in 1usize..=3, b in 1usize..=3) {
        let rho_a = state(seed, &[a]);
        let rho_b = state(seed ^ 1, &[b]).with_labels(&["B"]).unwrap();
        let eigs = single_term_spectrum(&rho_a.tensor(&rho_b).unwrap()).unwrap();
        prop_assert!(*eigs.last().unwrap() <= 1e-9);
    }
}
