use cdslab::qcore::layout::Layout;
use cdslab::qcore::linalg::{self, CMatrix};
use cdslab::qcore::optimize::ensemble_sqrt_fidelity_check;
use cdslab::qcore::DensityMatrix;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 100, rng_seed: RngSeed::Fixed(0x0DD5_EED5), failure_persistence: None, ..ProptestConfig::default() }
}

fn state(d: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let rank = rng.random_range(1..=d);
    DensityMatrix::new(linalg::random_density(d, rank, rng), Layout::single("S", d)).unwrap()
}

fn half_trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    0.5 * a.trace_distance_raw(b).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn fuchs_van_de_graaf(d in 2usize..=8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (state(d, &mut rng), state(d, &mut rng));
        let f = a.fidelity(&b).unwrap();
        let t = half_trace_distance(&a, &b);
        prop_assert!(1.0 - f.sqrt() <= t + TOL, "F={f} T={t}");
        prop_assert!(t <= (1.0 - f).max(0.0).sqrt() + TOL, "F={f} T={t}");
    }

    #[test]
    fn ensemble_fidelity_bound(d in 2usize..=8, m in 2usize..=5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let ensemble: Vec<(f64, DensityMatrix)> = raw.iter().map(|p| (p / total, state(d, &mut rng))).collect();
        let mut mean = CMatrix::zeros(d, d);
        for (p, r) in &ensemble {
            mean += r.entries() * linalg::cr(*p);
        }
        let mut candidates: Vec<DensityMatrix> = ensemble.iter().map(|e| e.1.clone()).collect();
        candidates.push(DensityMatrix::new(mean, Layout::single("S", d)).unwrap());
        for _ in 0..4 {
            candidates.push(state(d, &mut rng));
        }
        let (lhs, rhs) = ensemble_sqrt_fidelity_check(&ensemble, &candidates).unwrap();
        prop_assert!(lhs <= rhs + TOL, "lhs={lhs} rhs={rhs}");
    }

    #[test]
    fn pure_state_fidelity_is_overlap(d in 2usize..=8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (u, v) = (linalg::random_vector(d, &mut rng), linalg::random_vector(d, &mut rng));
        let l = Layout::single("S", d);
        let a = DensityMatrix::new(linalg::projector(&u), l.clone()).unwrap();
        let b = DensityMatrix::new(linalg::projector(&v), l).unwrap();
        let overlap = u.dotc(&v).norm_sqr();
        prop_assert!((a.fidelity(&b).unwrap() - overlap).abs() <= TOL);
        // Pure states: T = √(1 − F) exactly.
        prop_assert!((half_trace_distance(&a, &b) - (1.0 - overlap).sqrt()).abs() <= 1e-8);
    }

    #[test]
    fn trace_norm_properties(d in 2usize..=8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (state(d, &mut rng), state(d, &mut rng), state(d, &mut rng));
        prop_assert!((linalg::trace_norm(a.entries()).unwrap() - 1.0).abs() <= TOL);
        let ab = a.trace_distance_raw(&b).unwrap();
        let bc = b.trace_distance_raw(&c).unwrap();
        let ac = a.trace_distance_raw(&c).unwrap();
        prop_assert!(ac <= ab + bc + TOL);
        prop_assert!(ab <= 2.0 + TOL);
        let u = linalg::random_unitary(d, &mut rng);
        let rot = |m: &CMatrix| &u * m * u.adjoint();
        let turned = linalg::trace_norm(&(rot(a.entries()) - rot(b.entries()))).unwrap();
        prop_assert!((turned - ab).abs() <= 1e-8);
        prop_assert!((a.fidelity(&b).unwrap() - b.fidelity(&a).unwrap()).abs() <= TOL);
    }
}
