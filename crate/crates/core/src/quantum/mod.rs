//! Quantum protocols: DJ shortening, the hybrid promise-NEQ protocol, the
//! BHM PSQM, and small CDQS fixtures.

pub mod bhm;
pub mod dj;
pub mod hybrid;
pub mod toys;

pub use bhm::{bhm_instance, bhm_instance_with_weight, bhm_psqm, bhm_verify, inner_layer_check, BhmInstance, BhmPsqm};
pub use dj::{bits_of, dj_shorten, DjDistribution};
pub use hybrid::{hybrid_verify, hybrid_verify_inputs, neq_promise_cdqs, sample_promise_inputs, CostTable, HybridNeq};
pub use toys::{depolarized, forwarding, leaky_and, lifted_neq, shipped_fixtures, teleport_and_toy, Fixture};
