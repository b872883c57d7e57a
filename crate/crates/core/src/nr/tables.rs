//! Standard index tables shipped as plain-text assets (one 0-based index
//! per line), validated as permutations when loaded.

use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const Q_SEQUENCE: &str = include_str!("../../assets/q_sequence.txt");
const SUBBLOCK_PATTERN: &str = include_str!("../../assets/subblock_pattern.txt");
const POLAR_INTERLEAVER: &str = include_str!("../../assets/polar_interleaver.txt");

pub const Q_MAX_LEN: usize = 1024;
pub const SUBBLOCKS: usize = 32;
/// Largest `K` the polar interleaver pattern covers.
pub const K_IL_MAX: usize = 164;

fn asset_error(asset: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Asset {
        asset: asset.to_string(),
        line,
        message: message.into(),
    }
}

/// Parses one index per line (blank lines and `#` comments skipped) and
/// checks that the result is a permutation of `0..expected_len`.
pub fn parse_permutation(text: &str, asset: &str, expected_len: Option<usize>) -> Result<Vec<usize>> {
    let mut entries: Vec<(usize, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v = line
            .parse::<usize>()
            .map_err(|_| asset_error(asset, i + 1, format!("not a non-negative integer: {line:?}")))?;
        entries.push((i + 1, v));
    }
    let len = expected_len.unwrap_or(entries.len());
    if entries.len() != len {
        let line = entries.last().map_or(0, |e| e.0);
        return Err(asset_error(asset, line, format!("expected {len} entries, found {}", entries.len())));
    }
    let mut seen = vec![None; len];
    for &(line, v) in &entries {
        if v >= len {
            return Err(asset_error(asset, line, format!("index {v} out of range 0..{len}")));
        }
        if let Some(first) = seen[v] {
            return Err(asset_error(asset, line, format!("duplicate index {v} (first on line {first})")));
        }
        seen[v] = Some(line);
    }
    Ok(entries.into_iter().map(|e| e.1).collect())
}

/// Polar sub-channel indices in ascending reliability order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReliabilitySequence {
    order: Vec<usize>,
}

impl ReliabilitySequence {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let text: String = order.iter().map(|v| format!("{v}\n")).collect();
        parse_permutation(&text, "reliability sequence", Some(order.len()))?;
        Ok(Self { order })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let order = parse_permutation(text, "q_sequence.txt", None)?;
        if !order.len().is_power_of_two() {
            return Err(asset_error("q_sequence.txt", 0, "length must be a power of two"));
        }
        Ok(Self { order })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn standard() -> &'static Self {
        static CELL: OnceLock<ReliabilitySequence> = OnceLock::new();
        CELL.get_or_init(|| {
            let s = Self::parse(Q_SEQUENCE).expect("bundled reliability sequence is valid");
            assert_eq!(s.len(), Q_MAX_LEN);
            s
        })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    /// Indices below `n`, least reliable first.
    pub fn restricted(&self, n: usize) -> impl DoubleEndedIterator<Item = usize> + '_ {
        self.order.iter().copied().filter(move |&i| i < n)
    }

    /// The `count` most reliable indices below `n` accepted by `keep`, most reliable first.
    pub fn most_reliable(&self, n: usize, count: usize, keep: impl Fn(usize) -> bool) -> Vec<usize> {
        self.restricted(n).rev().filter(|&i| keep(i)).take(count).collect()
    }
}

/// The 32-entry sub-block interleaver pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubblockPattern([usize; SUBBLOCKS]);

impl SubblockPattern {
    pub fn parse(text: &str) -> Result<Self> {
        let v = parse_permutation(text, "subblock_pattern.txt", Some(SUBBLOCKS))?;
        Ok(Self(v.try_into().expect("length checked")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn standard() -> &'static Self {
        static CELL: OnceLock<SubblockPattern> = OnceLock::new();
        CELL.get_or_init(|| Self::parse(SUBBLOCK_PATTERN).expect("bundled sub-block pattern is valid"))
    }

    /// The identity pattern, for test rigs.
    pub fn identity() -> Self {
        Self(std::array::from_fn(|i| i))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// Interleaving pattern for `K = K_IL_MAX`; shorter `K` use a filtered copy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarInterleaverPattern(Vec<usize>);

impl PolarInterleaverPattern {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self(parse_permutation(text, "polar_interleaver.txt", Some(K_IL_MAX))?))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn standard() -> &'static Self {
        static CELL: OnceLock<PolarInterleaverPattern> = OnceLock::new();
        CELL.get_or_init(|| Self::parse(POLAR_INTERLEAVER).expect("bundled polar interleaver is valid"))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| asset_error(&path.display().to_string(), 0, e.to_string()))
}

/// The standard tables bundled together.
#[derive(Clone, Copy, Debug)]
pub struct Tables {
    pub reliability: &'static ReliabilitySequence,
    pub subblock: &'static SubblockPattern,
    pub polar_interleaver: &'static PolarInterleaverPattern,
}

impl Tables {
    pub fn standard() -> Self {
        Self {
            reliability: ReliabilitySequence::standard(),
            subblock: SubblockPattern::standard(),
            polar_interleaver: PolarInterleaverPattern::standard(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_assets_are_permutations() {
        let q = ReliabilitySequence::standard();
        let mut sorted = q.as_slice().to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..1024).collect::<Vec<_>>());
        assert_eq!(&q.as_slice()[..8], &[0, 1, 2, 4, 8, 16, 32, 3]);
        assert_eq!(&q.as_slice()[1020..], &[1019, 1021, 1022, 1023]);

        let p = SubblockPattern::standard().as_slice();
        assert_eq!(&p[..8], &[0, 1, 2, 4, 3, 5, 6, 7]);
        let mut tail = p[24..].to_vec();
        tail.sort_unstable();
        assert_eq!(tail, (24..32).collect::<Vec<_>>());

        let il = PolarInterleaverPattern::standard().as_slice();
        assert_eq!(il.len(), 164);
        assert_eq!(&il[..6], &[0, 2, 4, 7, 9, 14]);
    }

    #[test]
    fn restriction_keeps_relative_order() {
        let q = ReliabilitySequence::standard();
        let r: Vec<usize> = q.restricted(8).collect();
        assert_eq!(r, vec![0, 1, 2, 4, 3, 5, 6, 7]);
        assert_eq!(q.restricted(512).count(), 512);
    }

    #[test]
    fn validation_reports_line_numbers() {
        let err = parse_permutation("0\n1\n1\n", "t", None).unwrap_err();
        assert!(matches!(err, Error::Asset { line: 3, .. }), "{err}");
        let err = parse_permutation("0\nx\n", "t", None).unwrap_err();
        assert!(matches!(err, Error::Asset { line: 2, .. }));
        let err = parse_permutation("0\n5\n", "t", None).unwrap_err();
        assert!(matches!(err, Error::Asset { line: 2, .. }));
        let err = SubblockPattern::parse("0\n1\n").unwrap_err();
        assert!(err.to_string().contains("expected 32 entries"));
        assert!(ReliabilitySequence::parse("0\n2\n1\n").is_err());
    }
}
