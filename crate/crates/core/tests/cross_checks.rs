use num_traits::Zero;
use proptest::prelude::*;
use quadctrl::chain::controllable_subspace;
use quadctrl::lie::{c0_oracle, OracleOptions};
use quadctrl::linalg::{convert_vec, ivec, Rational, Scalar, Subspace, Tolerance, Vector};
use quadctrl::models;
use quadctrl::sim::{reachable_cloud, CloudOptions};
use quadctrl::stlc::{stlc_verdict, validate_certificate};
use quadctrl::{accessibility_verdict, s_chain, QuadraticSystem, Rule, VerdictTag};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = Rational;

fn random_system(r: &mut ChaCha8Rng, n: usize, k: usize, zero_p: f64) -> QuadraticSystem<Q> {
    let entry = |r: &mut ChaCha8Rng| if r.random_bool(zero_p) { Q::zero() } else { Q::int(r.random_range(-2..=2)) };
    let l = (0..n).map(|_| (0..n).map(|_| entry(r)).collect()).collect();
    let a = (0..n).map(|_| entry(r)).collect();
    let b = (0..n).map(|_| entry(r)).collect();
    let c = (0..n).map(|_| entry(r)).collect();
    loop {
        let fs: Vec<Vector<Q>> = (0..n - k).map(|_| (0..n).map(|_| entry(r)).collect()).collect();
        if Subspace::span(n, &fs, Tolerance::Default).unwrap().rank() == n - k {
            return QuadraticSystem::new(l, a, b, c, fs).unwrap();
        }
    }
}

fn systems(seed: u64, count: usize) -> Vec<QuadraticSystem<Q>> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = 2 + i % 4;
            let k = 1 + (i / 4) % (n - 1);
            random_system(&mut r, n, k, [0.2, 0.5, 0.75][i % 3])
        })
        .collect()
}

#[test]
fn certificates_validate_on_random_systems() {
    for (i, sys) in systems(11, 300).iter().enumerate() {
        let v = stlc_verdict(sys);
        validate_certificate(sys, &v).unwrap_or_else(|e| panic!("system {i}: {e} ({:?})", v.rule));
        let acc = accessibility_verdict(sys);
        validate_certificate(sys, &acc).unwrap_or_else(|e| panic!("system {i}: {e}"));
    }
}

#[test]
fn float_mode_agrees_with_exact_mode() {
    for (i, sys) in systems(12, 300).iter().enumerate() {
        let exact = stlc_verdict(sys);
        let fsys = sys.convert::<f64>();
        let float = stlc_verdict(&fsys);
        assert_eq!(exact.tag, float.tag, "system {i}");
        assert_eq!(exact.rule, float.rule, "system {i}");
        assert_eq!(s_chain(sys).dims, s_chain(&fsys).dims, "system {i}");
        validate_certificate(&fsys, &float).unwrap_or_else(|e| panic!("system {i}: {e}"));
    }
}

/// `k = 1` with `S₀ = span{e₁,…,e_{n−1}}` L-invariant, so linearization never
/// decides; `Φ(eᵢ) ∈ S₀` for every control when `phi_in_s0`.
fn rank_one_system(r: &mut ChaCha8Rng, n: usize, phi_in_s0: bool) -> QuadraticSystem<Q> {
    let int = |r: &mut ChaCha8Rng| Q::int(r.random_range(-2..=2));
    let l = (0..n).map(|i| (0..n).map(|j| if i == n - 1 && j < n - 1 { Q::zero() } else { int(r) }).collect()).collect();
    let mut a: Vector<Q> = (0..n).map(|_| int(r)).collect();
    let mut b: Vector<Q> = (0..n).map(|_| int(r)).collect();
    let c = (0..n).map(|_| int(r)).collect();
    if phi_in_s0 {
        a[n - 1] = Q::zero();
        b[n - 1] = Q::zero();
    }
    let controls = (0..n - 1).map(|i| (0..n).map(|j| if j == i { Q::int(1) } else { Q::zero() }).collect()).collect();
    QuadraticSystem::new(l, a, b, c, controls).unwrap()
}

#[test]
fn rank_one_verdicts_follow_s1() {
    let mut r = ChaCha8Rng::seed_from_u64(13);
    let mut decided = 0;
    for i in 0..200 {
        let n = 2 + i % 4;
        let sys = rank_one_system(&mut r, n, i % 2 == 0);
        let v = stlc_verdict(&sys);
        let chain = s_chain(&sys);
        if v.rule == Some(Rule::RankOneUnderactuation) {
            // With one missing direction a proper S_1 equals S_0, so the chain is
            // already stationary and accessibility decides first.
            decided += 1;
            assert_eq!(v.tag, VerdictTag::Stlc, "system {i}");
            assert_eq!(chain.dims[1], n, "system {i}");
        }
        if v.tag == VerdictTag::Stlc {
            assert!(chain.last().is_full(), "system {i}");
        }
        validate_certificate(&sys, &v).unwrap_or_else(|e| panic!("system {i}: {e}"));
    }
    assert!(decided > 20, "rank-one rule decided {decided} systems");
}

#[test]
fn sprott_accessibility_off_the_diagonal() {
    let mut r = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..500 {
        let mu = Q::int(r.random_range(-3..=3)) / Q::int(r.random_range(1..=3));
        let f: Vector<Q> = loop {
            let f: Vector<Q> = (0..3).map(|_| Q::int(r.random_range(-2..=2))).collect();
            if f.iter().any(|x| !x.is_zero()) {
                break f;
            }
        };
        let on_diagonal = f[0] == f[1] && f[1] == f[2];
        let sys = models::sprott(mu.clone(), vec![f.clone()]).unwrap();
        assert_eq!(accessibility_verdict(&sys).tag == VerdictTag::NotAccessible, on_diagonal, "mu {mu}, f {f:?}");
        let closed = models::sprott_single_input_stlc(mu, f.clone()).unwrap();
        assert_eq!(stlc_verdict(&sys).tag == VerdictTag::Stlc, closed.tag == VerdictTag::Stlc, "f {f:?}");
    }
}

#[test]
fn linear_systems_oracle_is_krylov() {
    let mut r = ChaCha8Rng::seed_from_u64(15);
    for i in 0..100 {
        let n = 2 + i % 4;
        let k = 1 + (i / 4) % (n - 1);
        let mut sys = random_system(&mut r, n, k, 0.5);
        let z = vec![Q::zero(); n];
        sys = QuadraticSystem::new(sys.l().clone(), z.clone(), z.clone(), z, sys.controls().to_vec()).unwrap();
        let span = c0_oracle(&sys, OracleOptions::default()).unwrap().span;
        let krylov = controllable_subspace(sys.l(), sys.controls(), Tolerance::Default).unwrap();
        assert!(span.same_span(&krylov).unwrap(), "system {i}");
    }
}

#[test]
fn every_bracket_value_lies_in_sk() {
    for (i, sys) in systems(16, 60).iter().enumerate() {
        let run = c0_oracle(sys, OracleOptions { max_len: 6, record_forest: true, ..OracleOptions::default() }).unwrap();
        let sk = s_chain(sys).last().clone();
        for entry in &run.forest {
            assert!(sk.contains(&entry.value).unwrap(), "system {i}: {} escapes S_k", entry.word);
        }
    }
}

#[test]
fn crouch_probe_set_matches_dense_sampling() {
    // Sample omega = a b1 + b b2 on a grid; the three probes must see the same span.
    let mut r = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let xi: Vector<Q> = (0..3).map(|_| Q::int(r.random_range(1..=3))).collect();
        let (b1, b2): (Vector<Q>, Vector<Q>) = loop {
            let b1: Vector<Q> = (0..3).map(|_| Q::int(r.random_range(-1..=1))).collect();
            let b2: Vector<Q> = (0..3).map(|_| Q::int(r.random_range(-1..=1))).collect();
            if Subspace::span(3, &[b1.clone(), b2.clone()], Tolerance::Default).unwrap().rank() == 2 {
                break (b1, b2);
            }
        };
        let mut vs = vec![b1.clone(), b2.clone()];
        for a in -2..=2 {
            for b in -2..=2 {
                let w: Vector<Q> = b1.iter().zip(&b2).map(|(x, y)| Q::int(a) * x + Q::int(b) * y).collect();
                let scaled = models::scale_torque(&xi, &w);
                // S(w) Δ_{1/ξ} w = (Δ_{1/ξ} w) × w
                vs.push(vec![
                    &scaled[1] * &w[2] - &scaled[2] * &w[1],
                    &scaled[2] * &w[0] - &scaled[0] * &w[2],
                    &scaled[0] * &w[1] - &scaled[1] * &w[0],
                ]);
            }
        }
        let dense = Subspace::span(3, &vs, Tolerance::Default).unwrap().is_full();
        assert_eq!(models::crouch_condition(&xi, &b1, &b2).unwrap(), dense);
    }
}

#[test]
fn cloud_rank_never_exceeds_degree() {
    for (i, sys) in systems(18, 24).iter().enumerate() {
        let fsys = sys.convert::<f64>();
        let degree = s_chain(sys).degree_of_reachability;
        let opts = CloudOptions { samples: 150, horizon: 0.2, seed: i as u64, ..CloudOptions::default() };
        let stats = reachable_cloud(&fsys, &opts, None).unwrap();
        assert!(stats.empirical_rank <= degree, "system {i}: cloud rank {} > degree {degree}", stats.empirical_rank);
    }
}

#[test]
fn clouds_do_not_depend_on_thread_count() {
    let sys = models::sprott(1.0, vec![vec![1.0, 0.0, 0.0]]).unwrap();
    let opts = CloudOptions { samples: 300, seed: 5, ..CloudOptions::default() };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| reachable_cloud(&sys, &opts, None).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.endpoints, four.endpoints);
    assert_eq!(one.singular_values, four.singular_values);
}

fn small_int() -> impl Strategy<Value = i64> {
    -3i64..=3
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn phi_is_homogeneous_in_float_mode(
        a in prop::collection::vec(small_int(), 4),
        x in prop::collection::vec(-1.0f64..1.0, 4),
        lambda in -2.0f64..2.0,
    ) {
        let z = vec![0.0; 4];
        let af: Vec<f64> = a.iter().map(|&v| v as f64).collect();
        let sys = QuadraticSystem::new(vec![z.clone(); 4], af.clone(), af.iter().rev().copied().collect(), af, vec![vec![1.0, 0.0, 0.0, 0.0]]).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| lambda * v).collect();
        let lhs = sys.phi(&scaled).unwrap();
        let rhs = sys.phi(&x).unwrap();
        for (l, r) in lhs.iter().zip(rhs) {
            prop_assert!((l - lambda * lambda * r).abs() <= 1e-12);
        }
    }

    #[test]
    fn spec_round_trip_preserves_the_system(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system(&mut r, 4, 2, 0.3);
        let json = serde_json::to_string(&sys.to_spec()).unwrap();
        let back: quadctrl::SystemSpec = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.build::<Q>().unwrap(), sys);
    }

    #[test]
    fn chain_is_invariant_under_control_rescaling(seed in any::<u64>(), s in 1i64..5) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system(&mut r, 4, 2, 0.4);
        let scaled: Vec<Vector<Q>> = sys.controls().iter().map(|f| f.iter().map(|x| x * Q::int(s)).collect()).collect();
        let other = sys.with_controls(scaled).unwrap();
        prop_assert!(s_chain(&sys).last().same_span(s_chain(&other).last()).unwrap());
    }
}

#[test]
fn exact_rational_inputs_round_trip_through_f64() {
    let v: Vector<Q> = ivec(&[1, -2, 3]);
    let back: Vector<Q> = convert_vec(&convert_vec::<Q, f64>(&v));
    assert_eq!(v, back);
}
