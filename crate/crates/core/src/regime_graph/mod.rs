//! Rate-matrix algebra: the interval layout behind the jump function, the
//! K-truncation, the comparison chain `xi^K` and a uniformization oracle
//! for finite chains.

mod partition;
mod qmatrix;
mod truncation;
mod uniformization;
mod xi;

pub use partition::{
    build_partition, h_eval, h_lp_distance, row_block, row_displacement_bound, Interval, IntervalPartition,
};
pub use qmatrix::{is_irreducible, ConstantRates, QMatrixSpec, SwitchingRates};
pub use truncation::{cutoff, smooth_step, truncate_q};
pub(crate) use truncation::norm;
pub use uniformization::{transition_matrix, transition_matrix_capped, DEFAULT_DIMENSION_CAP};
pub use xi::{xi_generator, XiChainSpec};
