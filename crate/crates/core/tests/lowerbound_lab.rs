use cdslab::exec::Exec;
use cdslab::lowerbound::{
    build_two_prover_proof, complementary_sweep, gamma_threshold, honest_acceptance, message_orthogonality_check,
    one_way_sweep, quantize_state, required_digits, soundness_bound, two_prover_lab,
};
use cdslab::protocol::types::PromiseFunction;
use cdslab::qcore::layout::Layout;
use cdslab::qcore::linalg;
use cdslab::qcore::DensityMatrix;
use cdslab::quantum::toys::{DEPOLARIZING_P, LEAK_Q};
use cdslab::quantum::{depolarized, leaky_and, lifted_neq, teleport_and_toy};
use cdslab::verifier::cdqs_verify;
use rand::SeedableRng;

#[test]
fn one_way_reduction_decides_every_input() {
    for (p, f) in [(lifted_neq().unwrap(), PromiseFunction::neq(2)), (teleport_and_toy().unwrap(), PromiseFunction::and())] {
        let rep = one_way_sweep(&p, &f, Exec::default()).unwrap();
        let want = required_digits(rep.q_b, rep.e, gamma_threshold(rep.epsilon_hat, rep.delta_hat, rep.d_q).unwrap()).unwrap();
        assert_eq!(rep.digits, want);
        assert_eq!(rep.decisions.len(), f.promise_inputs().len());
        for d in &rep.decisions {
            assert_eq!(d.decided, d.f, "{} at ({}, {}): distance {}", rep.protocol, d.x, d.y, d.distance);
            assert!(d.bounds.holds(), "{:?}", d.bounds);
            assert!(d.reconstruction_error <= d.bounds.trace_norm + 1e-12);
        }
        assert!(rep.all_correct && rep.chain_holds);
    }
}

#[test]
fn quantization_chain_on_random_states() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    for d in [2usize, 3, 4, 8] {
        for k in [1u32, 4, 7, 12] {
            let rho = DensityMatrix::new(linalg::random_density(d, d, &mut rng), Layout::single("S", d)).unwrap();
            let q = quantize_state(&rho, k).unwrap();
            let b = q.bounds(rho.entries()).unwrap();
            assert!(b.holds(), "d={d} k={k}: {b:?}");
        }
    }
}

#[test]
fn two_prover_perfect_toy_k1_to_3() {
    let p = teleport_and_toy().unwrap();
    let f = PromiseFunction::and();
    for k in 1..=3 {
        let rep = two_prover_lab(&p, &f, k, Exec::default()).unwrap();
        let bound = soundness_bound(k as f64, 0.0).unwrap();
        for e in &rep.entries {
            if let Some(h) = &e.honest {
                assert!(h.per_secret.iter().all(|a| (a - 1.0).abs() < 1e-9), "k={k}: {h:?}");
                assert!(h.spread <= 1e-9);
            }
            if let Some(c) = &e.cheat {
                assert!(c.p_pass <= bound + 1e-6, "k={k}: {c:?}");
                assert!(c.p_pass <= c.ensemble_bound + 1e-9);
                assert!(c.unconstrained_p_pass > bound);
            }
            if let Some(m) = e.max_fidelity {
                assert!(m <= 1e-9);
            }
        }
        assert!(rep.cost.env_bounds_hold);
        assert!(rep.passed, "{}", rep.to_text());
    }
}

#[test]
fn two_prover_lifted_neq() {
    let rep = two_prover_lab(&lifted_neq().unwrap(), &PromiseFunction::neq(2), 1, Exec::default()).unwrap();
    for e in &rep.entries {
        if let Some(h) = &e.honest {
            assert!(h.mean >= 1.0 - 1e-9);
        }
        if let Some(c) = &e.cheat {
            assert!(c.p_pass <= 0.7072);
        }
    }
    assert!(rep.passed);
}

#[test]
fn two_prover_noisy_variants() {
    let f = PromiseFunction::and();
    let leaky = leaky_and(LEAK_Q).unwrap();
    for k in 1..=2 {
        let rep = two_prover_lab(&leaky, &f, k, Exec::default()).unwrap();
        let bound = soundness_bound(k as f64, rep.base_delta_hat).unwrap();
        for e in &rep.entries {
            if let Some(c) = &e.cheat {
                assert!(c.p_pass <= bound + 1e-6);
            }
            if let Some(m) = e.max_fidelity {
                assert!(m <= 4.0 * rep.delta_hat.sqrt() + 1e-9);
            }
        }
        assert!(rep.passed, "{}", rep.to_text());
    }
    // Depolarizing the secret lowers honest acceptance but not below 1 - 2√ε̂.
    let dep = depolarized(&teleport_and_toy().unwrap(), DEPOLARIZING_P).unwrap();
    let eps = cdqs_verify(&dep, &f).unwrap().epsilon_hat;
    let tp = build_two_prover_proof(&dep, 1).unwrap();
    let h = honest_acceptance(&tp, &f, 1, 1).unwrap();
    assert!(h.mean >= 1.0 - 2.0 * eps.sqrt());
    assert!(h.mean < 1.0 - 1e-3);
    assert!(message_orthogonality_check(&tp, &f, 0, 0).unwrap() <= 1e-9);
}

#[test]
fn complementary_decoding() {
    let f = PromiseFunction::and();
    let perfect = complementary_sweep(&teleport_and_toy().unwrap(), &f, Exec::default()).unwrap();
    assert!(perfect.fits.iter().all(|r| r.achieved_error <= 1e-6), "{perfect:?}");
    let neq = complementary_sweep(&lifted_neq().unwrap(), &PromiseFunction::neq(2), Exec::default()).unwrap();
    assert!(neq.fits.iter().all(|r| r.achieved_error <= 1e-6), "{neq:?}");
    let dep = complementary_sweep(&depolarized(&teleport_and_toy().unwrap(), DEPOLARIZING_P).unwrap(), &f, Exec::default()).unwrap();
    assert!(dep.passed, "{dep:?}");
    let leaky = complementary_sweep(&leaky_and(LEAK_Q).unwrap(), &f, Exec::default()).unwrap();
    assert!(leaky.passed, "{leaky:?}");
    assert_eq!(leaky.fits.len(), 3);
}
