use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synbreak::colorings::{axial_values, enumerate_axial, Axis, Coloring};
use synbreak::experiments::Scenario;
use synbreak::integrator::{integrate, numerical_jacobian, random_near_origin, IntegratorConfig};
use synbreak::linalg::{cluster_real, spectrum};
use synbreak::model::{
    analytic_eigenvalues, coefficients_from_gains, gains_from_coefficients, irrep_project, vector_field, GainParams,
    Irrep, ModelConfig, SigmoidParams,
};
use synbreak::patterns::{analyze_state, color_complementary, color_isomorphic, PatternClass};
use synbreak::{NetworkShape, Permutation, ValueMatrix};

fn shape(m: usize, n: usize) -> NetworkShape {
    NetworkShape::new(m, n).unwrap()
}

fn shuffled(len: usize, rng: &mut ChaCha8Rng) -> Permutation {
    let mut v: Vec<usize> = (0..len).collect();
    v.shuffle(rng);
    Permutation::from_images(v).unwrap()
}

fn config(s: NetworkShape, seed: u64) -> ModelConfig<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gains = GainParams::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let sig = SigmoidParams::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)).unwrap();
    ModelConfig::new(s, gains, sig, rng.gen_range(0.1..2.0)).unwrap()
}

fn arb_shape() -> impl Strategy<Value = NetworkShape> {
    (2usize..=5, 2usize..=6).prop_map(|(m, n)| shape(m, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vector_field_is_equivariant(s in arb_shape(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = config(s, seed);
        let z = ValueMatrix::from_fn(s, |_, _| rng.gen_range(-3.0..3.0));
        let (a, b) = (shuffled(s.m, &mut rng), shuffled(s.n, &mut rng));
        let lhs = vector_field(&z.permuted(&a, &b), &cfg).unwrap();
        let rhs = vector_field(&z, &cfg).unwrap().permuted(&a, &b);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn linearization_matches_analytic_spectrum(s in arb_shape(), seed in any::<u64>()) {
        let cfg = config(s, seed);
        let jac = numerical_jacobian(&ValueMatrix::zeros(s), &cfg, 1e-6).unwrap();
        let got: Vec<f64> = spectrum(&jac).unwrap().iter().map(|e| e.re).collect();
        let want = analytic_eigenvalues(&coefficients_from_gains(&cfg.gains, s), cfg.lambda, s);
        let mut expected: Vec<f64> = want.iter().flat_map(|e| std::iter::repeat(e.value).take(e.multiplicity)).collect();
        let clusters = cluster_real(&got, 1e-6);
        let mut listed: Vec<f64> = clusters.iter().flat_map(|&(v, k)| std::iter::repeat(v).take(k)).collect();
        expected.sort_by(f64::total_cmp);
        listed.sort_by(f64::total_cmp);
        prop_assert_eq!(listed.len(), expected.len());
        for (x, y) in listed.iter().zip(&expected) {
            prop_assert!((x - y).abs() < 1e-6, "{} vs {}", x, y);
        }
    }

    #[test]
    fn projections_form_a_resolution_of_identity(s in arb_shape(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = ValueMatrix::from_fn(s, |_, _| rng.gen_range(-3.0..3.0));
        let d = irrep_project(&z);
        prop_assert!(d.recombine().distance(&z) < 1e-12);
        for w in Irrep::ALL {
            let p = d.component(w);
            prop_assert!(irrep_project(p).component(w).distance(p) < 1e-12);
            for v in Irrep::ALL.iter().filter(|&&v| v != w) {
                prop_assert!(f64::abs(p.dot(d.component(*v))) < 1e-12);
            }
        }
    }

    #[test]
    fn class_is_conjugation_invariant(s in arb_shape(), seed in any::<u64>(), levels in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = ValueMatrix::from_fn(s, |_, _| rng.gen_range(0..levels) as f64);
        let (a, b) = (shuffled(s.m, &mut rng), shuffled(s.n, &mut rng));
        let (c, r) = analyze_state(&z, 1e-6).unwrap();
        let (_, r2) = analyze_state(&z.permuted(&a, &b), 1e-6).unwrap();
        prop_assert_eq!(r.class, r2.class);
        // agent clusters are exactly the classes of identical rows
        for i in 0..s.m {
            for k in 0..s.m {
                let together = r.agent_clusters.iter().any(|cl| cl.contains(&i) && cl.contains(&k));
                prop_assert_eq!(together, c.row(i) == c.row(k));
                if c.row(i) == c.row(k) {
                    prop_assert!(color_isomorphic(&c, Axis::Rows, i, k) && color_complementary(&c, Axis::Rows, i, k));
                }
            }
        }
    }
}

#[test]
fn l_round_trip_all_small_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for m in 2..=8 {
        for n in 2..=8 {
            let s = shape(m, n);
            let g = GainParams::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let back = gains_from_coefficients(&coefficients_from_gains(&g, s), s);
            let c = coefficients_from_gains(&g, s);
            let again = coefficients_from_gains(&gains_from_coefficients(&c, s), s);
            for (x, y) in g.to_vec().into_iter().zip(back.to_vec()).chain(c.to_vec().into_iter().zip(again.to_vec())) {
                assert!(f64::abs(x - y) < 1e-12, "{m}x{n}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn integration_is_deterministic() {
    let s = shape(3, 4);
    let cfg = config(s, 8);
    let icfg = IntegratorConfig { t_max: 20.0, ..IntegratorConfig::default() };
    let z0 = random_near_origin(s, 0.1, 5).unwrap();
    let (a, ra) = integrate(&z0, &cfg, &icfg).unwrap();
    let (b, rb) = integrate(&z0, &cfg, &icfg).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(ra.final_state, rb.final_state);
}

#[test]
fn flow_transports_under_symmetry() {
    let scenario = Scenario::by_name("dissensus-exotic-4x6").unwrap();
    let cfg = scenario.model(1.2).unwrap();
    let icfg = IntegratorConfig { t_max: 60.0, equilibrium_tol: 1e-14, ..IntegratorConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let z0 = random_near_origin(cfg.shape, 0.1, 3).unwrap();
    let (a, b) = (shuffled(4, &mut rng), shuffled(6, &mut rng));
    let (t1, _) = integrate(&z0, &cfg, &icfg).unwrap();
    let (t2, _) = integrate(&z0.permuted(&a, &b), &cfg, &icfg).unwrap();
    assert_eq!(t1.times, t2.times);
    for (x, y) in t1.states.iter().zip(&t2.states) {
        assert!(x.permuted(&a, &b).distance(y) <= 1e-9);
    }
}

#[test]
fn balanced_synchrony_subspace_is_invariant_along_trajectories() {
    let c: Coloring = "0 1 0 0 1 1\n0 1 1 1 0 0\n1 0 0 0 1 1\n1 0 1 1 0 0".parse().unwrap();
    let scenario = Scenario::by_name("dissensus-exotic-4x6").unwrap();
    let cfg = scenario.model(1.05).unwrap();
    let icfg = IntegratorConfig { t_max: 400.0, ..IntegratorConfig::default() };
    let z0 = ValueMatrix::from_fn(cfg.shape, |i, j| if c.get(i, j) == 0 { 0.011 } else { -0.007 });
    let (traj, _) = integrate(&z0, &cfg, &icfg).unwrap();
    for z in &traj.states {
        for class in c.color_classes() {
            let (i0, j0) = class[0];
            assert!(class.iter().all(|&(i, j)| (z.get(i, j) - z.get(i0, j0)).abs() <= 1e-9));
        }
    }
}

#[test]
fn step_halving_changes_little() {
    for name in Scenario::builtin_names() {
        let s = Scenario::by_name(name).unwrap();
        let cfg = s.model(s.lambda().unwrap()).unwrap();
        let z0 = random_near_origin(s.shape, s.radius, 0).unwrap();
        let coarse = IntegratorConfig { record_stride: 100, ..IntegratorConfig::default() };
        let fine = IntegratorConfig { step: 0.005, record_stride: 200, ..coarse };
        let (_, a) = integrate(&z0, &cfg, &coarse).unwrap();
        let (_, b) = integrate(&z0, &cfg, &fine).unwrap();
        assert!(a.converged && b.converged, "{name}");
        let d = a.final_state.distance(&b.final_state);
        assert!(d <= 1e-6, "{name}: final states differ by {d}");
    }
}

#[test]
fn axial_value_patterns_classify_as_dissensus() {
    for (m, n) in [(2, 4), (3, 4), (3, 6), (4, 6)] {
        for a in enumerate_axial(shape(m, n)).unwrap() {
            let z: ValueMatrix<f64> = axial_values(&a, 0.8).unwrap();
            let (_, r) = analyze_state(&z, 1e-9).unwrap();
            assert_eq!(r.class, PatternClass::Dissensus, "{}", a.coloring);
        }
    }
}
