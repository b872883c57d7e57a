//! The fixed stages of the 5G NR polar chain: CRC, tables, interleavers,
//! rate matching, scrambling and QAM.

pub mod config;
pub mod construction;
pub mod crc;
pub mod interleave;
pub mod qam;
pub mod rate_match;
pub mod scramble;
pub mod tables;

pub use config::CodeConfig;
pub use construction::{build_frozen_pattern, InfoPlacement};
pub use crc::{crc24c, crc_attach, crc_check, CRC_LEN};
pub use interleave::{
    polar_interleaver, subblock_interleaver, triangular_interleaver, Permutation,
};
pub use qam::Constellation;
pub use rate_match::{BitSelection, SelectionMode};
pub use scramble::{scramble, Scrambler};
pub use tables::{PolarInterleaverPattern, ReliabilitySequence, SubblockPattern, Tables};
