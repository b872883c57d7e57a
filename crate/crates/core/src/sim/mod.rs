//! AWGN Monte-Carlo link simulation: BLER estimation and required-SNR search.

mod bler;
mod channel;
mod search;

pub use bler::{run_bler, run_point, trial_rng, wilson_half_width, SimResult, SimSettings};
pub use channel::{awgn, db_to_linear, linear_to_db, ChannelSample};
pub use search::{required_snr, sweep_shaping_bits, RequiredSnr, SearchSettings};
