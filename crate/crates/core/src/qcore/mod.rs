//! Small-dimension quantum states, channels and distance measures.

pub mod channel;
pub mod io;
pub mod layout;
pub mod linalg;
pub mod optimize;
pub mod state;

pub use channel::{diamond_distance_bounds, Isometry, QuantumChannel};
pub use layout::{Layout, Subsystem};
pub use optimize::{ensemble_sqrt_fidelity_check, find_best_decoder, DecoderFit};
pub use state::{fidelity, trace_norm, DensityMatrix, StateVector};
