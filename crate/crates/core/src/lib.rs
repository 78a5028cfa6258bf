//! Sequential entanglement witnessing by two independent chains of unsharp
//! observers sharing one two-qubit state.
//!
//! Alice-side observers act on the first qubit and Bob-side observers on the
//! second. Each observer measures X and Y with sharpness `lambda` and Z
//! sharply, then passes the post-measurement state on.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod measurement;
pub mod qcore;
pub mod sequences;
pub mod witness;

pub use error::{Error, Result};
pub use experiments::{run_scenario, ExperimentReport, ScenarioConfig, Strategy};
pub use measurement::{luders_channel, Side, SideSharpness};
pub use qcore::{initial_state, InitialStateSpec, TwoQubitState};
pub use sequences::{
    find_theta, pandit_sequence, theta_sequence, SequenceParams, SharpnessProfile,
};
pub use witness::{difference_gap, witness_expectation, CorrelatorTriple, WitnessParams};
