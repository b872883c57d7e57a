//! Probabilistic amplitude shaping inside the polar code: shaping bits on
//! reliable positions of the last sub-codeword are chosen by an SCL
//! precoder so that the bits landing on the amplitude-class levels are
//! biased towards zero.

pub mod calibration;
pub mod codec;
pub mod interleaver;
pub mod precoder;

pub use calibration::{calibrate_s_to_p, prior_for, CalibrationRow, CalibrationTable};
pub use codec::{Codec, Decoded, Transmission};
pub use interleaver::{d_origin, equivalent_scrambler, is_shaped_level, modified_cb_interleaver};
pub use precoder::{precode_shaping, shaped_region, shaping_set, Precoder, ShapedPlacement};
