//! Learning layer: sparse rewards, a discretized observation space, six
//! temporally extended options that delegate to the helm, and tabular double
//! Q-learning over them.

pub mod obs;
pub mod options;
pub mod qlearn;
pub mod reward;
pub mod train;

pub use obs::{discretize_observation, ObservationFeatures};
pub use options::OptionId;
pub use qlearn::{double_q_update, select_option, QTables, Transition};
pub use reward::{compute_reward, RewardPair, RewardTable};
pub use train::{train, TrainingConfig, TrainingOutput};
