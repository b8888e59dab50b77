//! Path simulation of `(X, L)`: Euler-Maruyama steps spliced with switch
//! events, an exact event-driven scheme for state-independent rates, the
//! K-truncated process and shared-noise coupling.

mod config;
mod coupling;
mod euler;
mod integrator;
mod scheme;
mod trajectory;

pub use config::{RecordMode, SchemeKind, SimConfig};
pub use coupling::{coupled_simulate, separation_time, CoupledPaths};
pub use euler::{step_euler, BLOWUP_NORM};
pub use integrator::{sample_skeleton, MAX_SKELETON_JUMPS, STIFF_STEP_THRESHOLD};
pub(crate) use integrator::{checked_exit_rate, select_target};
pub use scheme::{
    scheme, scheme_by_name, scheme_names, simulate, simulate_frozen_regime, simulate_path, simulate_state_independent, simulate_truncated,
    EventDriven, FrozenRate, Scheme,
};
pub use trajectory::{read_binary, BinaryLog, JumpRecord, SampleKind, Trajectory, BINARY_MAGIC, BINARY_VERSION};
