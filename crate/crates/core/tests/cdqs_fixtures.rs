use rand::SeedableRng;
use cdslab::protocol::cdqs::{mid_protocol_state, parallel_repeat, run_cdqs, MA, MB, Q, QBAR};
use cdslab::protocol::types::PromiseFunction;
use cdslab::qcore::layout::Layout;
use cdslab::qcore::linalg::{self, cr};
use cdslab::qcore::{DensityMatrix, StateVector};
use cdslab::quantum::toys::{DEPOLARIZING_P, LEAK_Q};
use cdslab::quantum::{depolarized, shipped_fixtures, teleport_and_toy};
use cdslab::verifier::{cdqs_verify, productness_check};

#[test]
fn verifier_reproduces_designed_values() {
    for fx in shipped_fixtures().unwrap() {
        let r = cdqs_verify(&fx.protocol, &fx.function).unwrap();
        let name = &fx.protocol.name;
        assert!((r.epsilon_hat - fx.epsilon).abs() < 1e-9, "{name}: eps {}", r.epsilon_hat);
        assert!((r.delta_hat_lower - fx.delta_lower).abs() < 1e-9, "{name}: delta {}", r.delta_hat_lower);
        assert!((r.delta_hat_upper - fx.delta_upper).abs() < 1e-9, "{name}: delta+ {}", r.delta_hat_upper);
        assert_eq!(r.inputs.len(), fx.function.promise_inputs().len());
        if fx.perfect_security {
            assert!(r.metrics["spanning_set_max"] < 1e-9, "{name}");
        }
        for e in productness_check(&fx.protocol, &fx.function).unwrap() {
            assert!(e.holds(&r, 1e-9), "{name}: {e:?}");
        }
    }
}

#[test]
fn depolarized_fidelity_matches_closed_form() {
    // Decoded mid state is (1-p)Φ+ + p I/4, fidelity 1 - 3p/4.
    let p = depolarized(&teleport_and_toy().unwrap(), DEPOLARIZING_P).unwrap();
    let e = productness_check(&p, &PromiseFunction::and()).unwrap();
    let at11 = e.iter().find(|e| e.f).unwrap();
    assert!((at11.value - (1.0 - 0.75 * DEPOLARIZING_P)).abs() < 1e-12);
}

#[test]
fn leaky_distance_matches_closed_form() {
    let fx = shipped_fixtures().unwrap();
    let leaky = fx.iter().find(|f| f.protocol.name.starts_with("leaky")).unwrap();
    let e = productness_check(&leaky.protocol, &leaky.function).unwrap();
    let at01 = e.iter().find(|e| (e.x, e.y) == (0, 1)).unwrap();
    assert!((at01.value - 1.5 * LEAK_Q).abs() < 1e-12);
    let at10 = e.iter().find(|e| (e.x, e.y) == (1, 0)).unwrap();
    assert!(at10.value < 1e-12);
}

#[test]
fn teleportation_delivers_secret() {
    let p = teleport_and_toy().unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let v = linalg::random_vector(2, &mut rng);
    let rho = DensityMatrix::new(linalg::projector(&v), Layout::single("S", 2)).unwrap();
    let out = run_cdqs(&p, 1, 1, &rho).unwrap();
    let dec = p.decoder_channel(1, 1).unwrap().apply(&out).unwrap();
    assert!(linalg::max_abs_diff(dec.entries(), rho.entries()) < 1e-12);
}

#[test]
fn repeated_toy_stays_perfect() {
    let p2 = parallel_repeat(&teleport_and_toy().unwrap(), 2).unwrap();
    let r = cdqs_verify(&p2, &PromiseFunction::and()).unwrap();
    assert!(r.epsilon_hat < 1e-9 && r.delta_hat_upper < 1e-9);
    assert_eq!(r.cost.qubits, 6);
}

#[test]
fn mid_state_is_product_when_secure() {
    let p = teleport_and_toy().unwrap();
    let rho = mid_protocol_state(&p, 0, 1).unwrap();
    let m = rho.partial_trace(&[MA, MB]).unwrap();
    let q = rho.partial_trace(&[QBAR]).unwrap();
    let prod = q.tensor(&m).unwrap();
    assert!(linalg::max_abs_diff(rho.entries(), prod.entries()) < 1e-12);
    let phi = StateVector::max_entangled(QBAR, Q, 2).unwrap();
    assert!((phi.amplitudes()[0] - cr(1.0 / 2f64.sqrt())).norm() < 1e-15);
}
