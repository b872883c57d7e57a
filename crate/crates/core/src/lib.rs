//! 5G NR control-channel polar coding with integrated probabilistic
//! amplitude shaping.
//!
//! * [`polar`]: polar transform and SCL decoding.
//! * [`nr`]: the standard coding and modulation steps (CRC, interleavers,
//!   rate matching, scrambling, Gray QAM).
//! * [`shaping`]: shaping-bit precoding, the modified code-bit interleaver,
//!   S↔p calibration and the complete transmit/receive codec.
//! * [`analysis`]: shaped PMF, entropies, power and BMD achievable rates.
//! * [`sim`]: AWGN Monte-Carlo BLER simulation.

pub mod analysis;
pub mod bits;
pub mod error;
pub mod nr;
pub mod polar;
pub mod shaping;
pub mod sim;

pub use bits::{BitVector, LlrVector, LLR_CAP};
pub use error::{Error, Result};
