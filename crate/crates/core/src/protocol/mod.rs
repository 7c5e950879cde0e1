//! The two-party commitment session and the machinery it shares with the
//! chain protocol.

mod behavior;
mod calibration;
mod config;
mod engine;
mod message;
mod physics;
mod session;

pub use behavior::{Behavior, CommitView, GuessView, Honest};
pub use calibration::{draw_paulis, noise_suppress, pauli_twirl, tomography, TomographyReport};
pub use config::{AxisMode, Calibration, PauliWeights, SessionConfig};
pub(crate) use config::EngineConfig;
pub use engine::{verify_singlets, CheckResult, CommitterRecord, ReceiverRecord, RunRecord};
pub(crate) use engine::run as run_engine;
pub use message::{validate, AbortReason, Entry, Message, MessageKind, Naming, Party, Transcript};
pub use physics::{Backend, LabelBackend, MatrixBackend, PairBackend};
pub use session::{
    batch_inputs, run_batch, run_batch_with, run_session, run_session_with, BatchResult, InputSource,
    SessionResult,
};
