//! Polar transform, successive cancellation list decoding and CRC-aided
//! candidate selection.
//!
//! The same decoder serves the receiver (length `N`) and the transmitter-side
//! shaping precoder (length `N/(M/2)`).

mod frozen;
mod scl;
mod select;
mod transform;

pub use frozen::FrozenPattern;
pub use scl::{scl_decode, DecodeCandidate, SclDecoder};
pub use select::{crc_select, Selected};
pub use transform::{polar_transform, polar_transform_in_place};
