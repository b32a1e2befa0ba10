//! Protocol records, exact execution, cost accounting and combinators.

pub mod cdqs;
pub mod combinators;
pub mod enumerate;
pub mod types;

pub use cdqs::{
    classical_to_quantum_lift, mid_protocol_state, parallel_repeat, protocol_cost, run_cdqs,
    CdqsProtocol,
};
pub use combinators::psm_to_cds;
pub use enumerate::{enumerate_message_distribution, enumerate_psm_distribution, MessageDistribution};
pub use types::{
    CdsProtocol, CostReport, PromiseFunction, ProtocolDescriptor, ProtocolKind, PsmProtocol,
};
