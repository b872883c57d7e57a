//! Complete transmitter and receiver for one code configuration.

use num_complex::Complex64;

use crate::analysis::{shaped_pmf, ShapedPmf};
use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::nr::config::CodeConfig;
use crate::nr::crc::{crc_attach, crc_check};
use crate::nr::interleave::{polar_interleaver, subblock_interleaver, triangular_interleaver, Permutation};
use crate::nr::qam::Constellation;
use crate::nr::rate_match::BitSelection;
use crate::nr::scramble::scramble;
use crate::nr::tables::Tables;
use crate::polar::{crc_select, polar_transform, FrozenPattern, SclDecoder};

use super::calibration::prior_for;
use super::interleaver::{d_origin, equivalent_scrambler, modified_cb_interleaver};
use super::precoder::{Precoder, ShapedPlacement};

/// Realizations used when no bundled calibration covers a configuration.
pub const FALLBACK_CALIBRATION_REALIZATIONS: usize = 200;

/// Every intermediate vector of one encoding, for inspection and tests.
#[derive(Clone, Debug, PartialEq)]
pub struct Transmission {
    /// Payload with CRC, `K` bits.
    pub c: BitVector,
    /// After the polar interleaver.
    pub c_prime: BitVector,
    pub shaping_bits: BitVector,
    /// Polar transform input.
    pub u: BitVector,
    /// Polar codeword.
    pub d: BitVector,
    /// Scrambled, interleaved, rate-matched bits fed to the mapper.
    pub mapped_bits: BitVector,
    pub symbols: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    /// Payload of the first list candidate passing the CRC.
    pub payload: Option<BitVector>,
    /// Position of that candidate in the metric-sorted list.
    pub list_rank: Option<usize>,
    /// Recomputed shaping bits match the decoded ones (`None` if not checked).
    pub shaping_check: Option<bool>,
}

impl Decoded {
    pub fn crc_pass(&self) -> bool {
        self.payload.is_some()
    }

    /// CRC pass, AND-ed with the shaping recheck when it ran.
    pub fn detected_ok(&self) -> bool {
        self.crc_pass() && self.shaping_check.unwrap_or(true)
    }
}

/// Transmit and receive chain; holds decoder scratch, so give each thread its own clone.
#[derive(Clone, Debug)]
pub struct Codec {
    config: CodeConfig,
    prior: ShapedPmf,
    constellation: Constellation,
    placement: ShapedPlacement,
    decoder_pattern: FrozenPattern,
    polar_il: Permutation,
    subblock: Permutation,
    selection: BitSelection,
    cb: Permutation,
    v: BitVector,
    v_bar: BitVector,
    precoder: Option<Precoder>,
    decoder: SclDecoder,
}

impl Codec {
    /// Standard tables; the shaped prior comes from the calibration.
    pub fn new(config: CodeConfig) -> Result<Self> {
        config.validate()?;
        let p = prior_for(
            config.n,
            config.bits_per_symbol,
            config.shaping_bits,
            config.precoder_list_size,
            FALLBACK_CALIBRATION_REALIZATIONS,
        )?;
        Self::with_prior(config, &Tables::standard(), p)
    }

    /// Explicit tables and ones-probability `p` of the amplitude-class bits.
    /// `p` sets the demapper prior and the transmit power; it is ignored
    /// (uniform) when the configuration has no shaping bits.
    pub fn with_prior(config: CodeConfig, tables: &Tables, p: f64) -> Result<Self> {
        config.validate()?;
        let (n, e, m) = (config.n, config.e, config.bits_per_symbol);
        let k = config.k();
        let prior = if config.is_shaped() {
            shaped_pmf(m, p)?
        } else {
            ShapedPmf::uniform(m)?
        };
        let subblock = subblock_interleaver(n, tables.subblock)?;
        let selection = BitSelection::new(n, e, k)?;
        let placement = ShapedPlacement::new(n, e, m, k, config.shaping_bits, tables.reliability, &subblock)?;
        let standard_cb = triangular_interleaver(e);
        let cb = if config.is_shaped() {
            modified_cb_interleaver(&standard_cb, m, &d_origin(&subblock, &selection, placement.region()))?
        } else {
            standard_cb
        };
        let v = config.scrambler.generate(e);
        let v_bar = if config.is_shaped() {
            equivalent_scrambler(&v, &subblock, &cb)?
        } else {
            BitVector::zeros(n)
        };
        let precoder = if config.is_shaped() {
            Some(Precoder::new(placement.region().len(), config.precoder_list_size)?)
        } else {
            None
        };
        Ok(Self {
            constellation: Constellation::new(m)?,
            decoder_pattern: placement.decoder_pattern(),
            polar_il: polar_interleaver(k, tables.polar_interleaver),
            decoder: SclDecoder::new(n, config.list_size)?,
            config,
            prior,
            placement,
            subblock,
            selection,
            cb,
            v,
            v_bar,
            precoder,
        })
    }

    pub fn config(&self) -> &CodeConfig {
        &self.config
    }

    pub fn prior(&self) -> &ShapedPmf {
        &self.prior
    }

    /// `E|X|²` under the configured prior.
    pub fn avg_power(&self) -> f64 {
        self.prior.avg_power()
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn placement(&self) -> &ShapedPlacement {
        &self.placement
    }

    pub fn subblock_interleaver(&self) -> &Permutation {
        &self.subblock
    }

    pub fn cb_interleaver(&self) -> &Permutation {
        &self.cb
    }

    pub fn scrambling_sequence(&self) -> &BitVector {
        &self.v
    }

    /// Pre-interleaver image `v̄` of the scrambler (zeros without shaping).
    pub fn equivalent_scrambler(&self) -> &BitVector {
        &self.v_bar
    }

    pub fn encode(&mut self, a: &BitVector) -> Result<Vec<Complex64>> {
        Ok(self.transmit(a)?.symbols)
    }

    pub fn transmit(&mut self, a: &BitVector) -> Result<Transmission> {
        let (c, c_prime) = self.attach(a)?;
        let s = self.shaping_bits_for(&c_prime)?;
        self.finish(c, c_prime, s)
    }

    /// Same chain with the precoder replaced by fixed shaping bits `s`.
    pub fn transmit_with_shaping_bits(&self, a: &BitVector, s: &BitVector) -> Result<Transmission> {
        let (c, c_prime) = self.attach(a)?;
        self.finish(c, c_prime, s.clone())
    }

    fn attach(&self, a: &BitVector) -> Result<(BitVector, BitVector)> {
        if a.len() != self.config.payload_bits {
            return Err(Error::LengthMismatch {
                expected: self.config.payload_bits,
                actual: a.len(),
            });
        }
        let c = crc_attach(a)?;
        let c_prime = self.polar_il.apply_bits(&c)?;
        Ok((c, c_prime))
    }

    fn shaping_bits_for(&mut self, c_prime: &BitVector) -> Result<BitVector> {
        let Some(pre) = self.precoder.as_mut() else {
            return Ok(BitVector::default());
        };
        let region = self.placement.region();
        let u_prime = self.placement.u_prime(c_prime)?;
        let u_hat = BitVector::new(u_prime.as_slice()[region.clone()].to_vec())?;
        let v_bar_d = BitVector::new(self.v_bar.as_slice()[region].to_vec())?;
        pre.shaping_bits(&u_hat, &self.placement.local_holes(), &v_bar_d, self.prior.p())
    }

    fn finish(&self, c: BitVector, c_prime: BitVector, s: BitVector) -> Result<Transmission> {
        let (_, u) = self.placement.insert_shaping(&c_prime, &s)?;
        let d = polar_transform(&u)?;
        let y = self.subblock.apply_bits(&d)?;
        let e = self.selection.select_bits(&y)?;
        let f = self.cb.apply_bits(&e)?;
        let mapped_bits = scramble(&f, &self.v)?;
        let symbols = self.constellation.map(&mapped_bits)?;
        Ok(Transmission {
            c,
            c_prime,
            shaping_bits: s,
            u,
            d,
            mapped_bits,
            symbols,
        })
    }

    /// Demaps with the shaped prior, undoes scrambling and interleaving, runs
    /// CRC-aided SCL over the `K + S` free positions and strips CRC and
    /// shaping bits. `recheck` re-runs the precoder on the decoded payload.
    pub fn receive(&mut self, r: &[Complex64], noise_var: f64, recheck: bool) -> Result<Decoded> {
        if r.len() != self.config.symbols() {
            return Err(Error::LengthMismatch {
                expected: self.config.symbols(),
                actual: r.len(),
            });
        }
        let mut llr = self.constellation.demap(r, noise_var, &self.prior)?.into_inner();
        for (l, &v) in llr.iter_mut().zip(self.v.as_slice()) {
            if v == 1 {
                *l = -*l;
            }
        }
        let llr_e = self.cb.invert(&llr)?;
        let llr_y = self.selection.recover(&llr_e)?;
        let llr_d = self.subblock.invert(&llr_y)?;
        let candidates = self.decoder.decode(&llr_d, &self.decoder_pattern)?;
        let polar_il = &self.polar_il;
        let selected = crc_select(&candidates, self.placement.info_positions(), |c_prime| {
            polar_il.invert_bits(c_prime).map(|c| crc_check(&c)).unwrap_or(false)
        });
        let Some(sel) = selected else {
            return Ok(Decoded {
                payload: None,
                list_rank: None,
                shaping_check: None,
            });
        };
        let c = self.polar_il.invert_bits(&sel.info)?;
        let payload = c.select(&(0..self.config.payload_bits).collect::<Vec<_>>());
        let shaping_check = if recheck && self.config.is_shaped() {
            let decoded_s = candidates[sel.rank].u_hat.select(self.placement.holes());
            Some(self.shaping_bits_for(&sel.info)? == decoded_s)
        } else {
            None
        };
        Ok(Decoded {
            payload: Some(payload),
            list_rank: Some(sel.rank),
            shaping_check,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::shaped_pmf;
    use crate::nr::construction::build_frozen_pattern;
    use crate::nr::scramble::Scrambler;
    use crate::shaping::interleaver::is_shaped_level;
    use crate::shaping::CalibrationTable;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gold(config: CodeConfig) -> CodeConfig {
        CodeConfig {
            scrambler: Scrambler::Gold { c_init: 0x1234 },
            ..config
        }
    }

    /// Conventional chain assembled directly from the standard stages.
    fn conventional(config: &CodeConfig, payload: &BitVector) -> (BitVector, Vec<Complex64>) {
        let t = Tables::standard();
        let sb = subblock_interleaver(config.n, t.subblock).unwrap();
        let placement = build_frozen_pattern(config.n, config.k(), config.e, t.reliability, &sb).unwrap();
        let c = polar_interleaver(config.k(), t.polar_interleaver)
            .apply_bits(&crc_attach(payload).unwrap())
            .unwrap();
        let mut u = vec![0u8; config.n];
        for (&pos, &b) in placement.info_positions.iter().zip(c.as_slice()) {
            u[pos] = b;
        }
        let d = polar_transform(&BitVector::new(u).unwrap()).unwrap();
        let e = BitSelection::new(config.n, config.e, config.k())
            .unwrap()
            .select_bits(&sb.apply_bits(&d).unwrap())
            .unwrap();
        let f = triangular_interleaver(config.e).apply_bits(&e).unwrap();
        let g = scramble(&f, &config.scrambler.generate(config.e)).unwrap();
        let x = Constellation::new(config.bits_per_symbol).unwrap().map(&g).unwrap();
        (g, x)
    }

    #[test]
    fn unshaped_codec_is_the_conventional_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for config in [
            gold(CodeConfig::new(768, 1024, 8, 0)),
            gold(CodeConfig::new(100, 256, 4, 0)),
            CodeConfig { e: 200, ..gold(CodeConfig::new(60, 256, 2, 0)) },
            CodeConfig { e: 204, ..gold(CodeConfig::new(140, 256, 6, 0)) },
            gold(CodeConfig::new(40, 64, 2, 0)),
        ] {
            let mut codec = Codec::new(config.clone()).unwrap();
            let a = BitVector::random(config.payload_bits, &mut rng);
            let tx = codec.transmit(&a).unwrap();
            let (g, x) = conventional(&config, &a);
            assert_eq!(tx.mapped_bits, g, "{config:?}");
            assert_eq!(tx.symbols, x);
        }
    }

    #[test]
    fn shaped_chain_is_transparent_to_the_shaping_bits() {
        // With s fixed, the chain is the standard one carrying c'' on the
        // information-plus-shaping positions.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let config = gold(CodeConfig::new(200, 512, 8, 40));
        let codec = Codec::with_prior(config.clone(), &Tables::standard(), 0.3).unwrap();
        let a = BitVector::random(200, &mut rng);
        let s = BitVector::random(40, &mut rng);
        let tx = codec.transmit_with_shaping_bits(&a, &s).unwrap();
        let p = codec.placement();
        assert_eq!(tx.u.select(p.info_positions()), tx.c_prime);
        assert_eq!(tx.u.select(p.holes()), s);
        let free: Vec<usize> = p.info_positions().iter().chain(p.holes()).copied().collect();
        let c2 = tx.c_prime.concat(&s);
        let mut u = vec![0u8; 512];
        for (&pos, &b) in free.iter().zip(c2.as_slice()) {
            u[pos] = b;
        }
        let d = polar_transform(&BitVector::new(u).unwrap()).unwrap();
        let f = codec.cb_interleaver().apply_bits(&codec.subblock_interleaver().apply_bits(&d).unwrap()).unwrap();
        assert_eq!(scramble(&f, codec.scrambling_sequence()).unwrap(), tx.mapped_bits);
    }

    #[test]
    fn amplitude_levels_carry_the_scrambled_sub_codeword() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let config = gold(CodeConfig::new(768, 1024, 8, 64));
        let mut codec = Codec::new(config).unwrap();
        let tx = codec.transmit(&BitVector::random(768, &mut rng)).unwrap();
        let region = codec.placement().region();
        let shaped: BitVector = BitVector::new(
            tx.d.as_slice()[region.clone()]
                .iter()
                .zip(&codec.equivalent_scrambler().as_slice()[region])
                .map(|(a, b)| a ^ b)
                .collect(),
        )
        .unwrap();
        let at_levels: Vec<u8> = (0..1024)
            .filter(|&k| is_shaped_level(k, 8))
            .map(|k| tx.mapped_bits[k])
            .collect();
        let mut sorted_levels = at_levels.clone();
        sorted_levels.sort_unstable();
        let mut sorted_shaped = shaped.into_inner();
        sorted_shaped.sort_unstable();
        assert_eq!(sorted_levels, sorted_shaped);
    }

    #[test]
    fn noiseless_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for config in [
            gold(CodeConfig::new(768, 1024, 8, 64)),
            gold(CodeConfig::new(640, 1024, 4, 96)),
            gold(CodeConfig::new(100, 256, 4, 30)),
            gold(CodeConfig::new(50, 128, 8, 10)),
            CodeConfig { e: 180, ..gold(CodeConfig::new(50, 256, 6, 0)) },
        ] {
            let mut codec = Codec::new(config.clone()).unwrap();
            for _ in 0..5 {
                let a = BitVector::random(config.payload_bits, &mut rng);
                let x = codec.encode(&a).unwrap();
                let out = codec.receive(&x, 1e-3, true).unwrap();
                assert_eq!(out.payload.as_ref(), Some(&a), "{config:?}");
                assert!(out.detected_ok());
                assert_eq!(out.shaping_check, config.is_shaped().then_some(true));
            }
        }
    }

    #[test]
    fn shaped_stream_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let config = gold(CodeConfig::new(768, 1024, 8, 64));
        let p_hat = CalibrationTable::bundled(1024, 8, 8).unwrap().p_hat(64).unwrap();
        let mut codec = Codec::new(config).unwrap();
        let (mut ones, mut bits, mut power) = (0usize, 0usize, 0.0);
        let mut hist = vec![0usize; 256];
        let c = codec.constellation().clone();
        let trials = 300;
        for _ in 0..trials {
            let tx = codec.transmit(&BitVector::random(768, &mut rng)).unwrap();
            for k in (0..1024).filter(|&k| is_shaped_level(k, 8)) {
                ones += tx.mapped_bits[k] as usize;
                bits += 1;
            }
            for sym in tx.mapped_bits.as_slice().chunks(8) {
                hist[c.label_of(sym)] += 1;
            }
            power += tx.symbols.iter().map(|x| x.norm_sqr()).sum::<f64>();
        }
        let frac = ones as f64 / bits as f64;
        assert!((frac - p_hat).abs() < 0.02, "ones fraction {frac} vs p̂ {p_hat}");
        let power = power / (trials * 128) as f64;
        assert!(power < 170.0 * 0.9, "{power}");
        let pmf = shaped_pmf(8, p_hat).unwrap();
        let total = (trials * 128) as f64;
        let tv: f64 = 0.5 * (0..256).map(|l| (hist[l] as f64 / total - pmf.prob(l)).abs()).sum::<f64>();
        // Sampling alone gives TV ≈ 0.03 at this count.
        assert!(tv < 0.06, "{tv}");
    }

    #[test]
    fn argument_errors() {
        let mut codec = Codec::new(CodeConfig::new(100, 256, 4, 0)).unwrap();
        assert!(codec.encode(&BitVector::zeros(99)).is_err());
        assert!(codec.receive(&[Complex64::new(0.0, 0.0); 3], 1.0, false).is_err());
        let x = codec.encode(&BitVector::zeros(100)).unwrap();
        assert!(codec.receive(&x, 0.0, false).is_err());
        assert!(Codec::new(CodeConfig { e: 200, ..CodeConfig::new(100, 256, 4, 8) }).is_err());
    }
}
