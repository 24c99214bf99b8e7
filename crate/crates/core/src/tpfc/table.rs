//! Transformations of data memory, `T: S_data → S_data`.
//!
//! A data state is a list of `2^k` words of `l` bits. It is identified with
//! its rank `Σ w_j · 2^(l·j)`, word 0 least significant, and a table stores
//! the rank of the image of every rank.

use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

/// Largest supported data memory, in bits.
pub const MAX_TABLE_DMS: u32 = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("data memory of {0} bits is too large to tabulate (limit {MAX_TABLE_DMS})")]
    TooLarge(u64),
    #[error("word length must be at least 1")]
    ZeroWordLength,
    #[error("table has {actual} entries, expected {expected}")]
    WrongSize { expected: u64, actual: u64 },
    #[error("image {value} of state {state} is out of range")]
    ValueOutOfRange { state: u64, value: u64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TransformationTable {
    k: u32,
    l: u32,
    images: Vec<u64>,
}

fn dms_of(k: u32, l: u32) -> Result<u32, TransformError> {
    if l == 0 {
        return Err(TransformError::ZeroWordLength);
    }
    let dms = (1u64 << k.min(63)).saturating_mul(u64::from(l));
    if k > 20 || dms > u64::from(MAX_TABLE_DMS) {
        return Err(TransformError::TooLarge(dms));
    }
    Ok(dms as u32)
}

impl TransformationTable {
    pub fn new(k: u32, l: u32, images: Vec<u64>) -> Result<Self, TransformError> {
        let dms = dms_of(k, l)?;
        let states = 1u64 << dms;
        if images.len() as u64 != states {
            return Err(TransformError::WrongSize {
                expected: states,
                actual: images.len() as u64,
            });
        }
        if let Some((state, &value)) = images.iter().enumerate().find(|(_, &v)| v >= states) {
            return Err(TransformError::ValueOutOfRange {
                state: state as u64,
                value,
            });
        }
        Ok(TransformationTable { k, l, images })
    }

    /// Tabulates a function on word lists.
    pub fn from_fn(k: u32, l: u32, f: impl Fn(&[u64]) -> Vec<u64>) -> Result<Self, TransformError> {
        let dms = dms_of(k, l)?;
        let shell = TransformationTable {
            k,
            l,
            images: Vec::new(),
        };
        let images = (0..1u64 << dms).map(|r| shell.rank(&f(&shell.unrank(r)))).collect();
        Self::new(k, l, images)
    }

    pub fn identity(k: u32, l: u32) -> Result<Self, TransformError> {
        let dms = dms_of(k, l)?;
        Self::new(k, l, (0..1u64 << dms).collect())
    }

    /// The `index`-th of all `(2^dms)^(2^dms)` tables, reading `index` in
    /// base `2^dms` with the image of state 0 as least significant digit.
    pub fn nth(k: u32, l: u32, index: u128) -> Result<Self, TransformError> {
        let dms = dms_of(k, l)?;
        let base = 1u128 << dms;
        let mut rest = index;
        let images = (0..1u64 << dms)
            .map(|_| {
                let digit = rest % base;
                rest /= base;
                digit as u64
            })
            .collect();
        Self::new(k, l, images)
    }

    /// The `index`-th map from data states to external states, extended to
    /// a table that leaves the internal half unchanged.
    pub fn nth_effective(k: u32, l: u32, index: u128) -> Result<Self, TransformError> {
        assert!(k >= 1, "effective maps need an internal half");
        let dms = dms_of(k, l)?;
        let ems = dms / 2;
        let base = 1u128 << ems;
        let mut rest = index;
        let images = (0..1u64 << dms)
            .map(|r| {
                let digit = (rest % base) as u64;
                rest /= base;
                (r >> ems << ems) | digit
            })
            .collect();
        Self::new(k, l, images)
    }

    /// `(2^dms)^(2^dms)`, if it fits.
    pub fn count_all(k: u32, l: u32) -> Option<u128> {
        let dms = dms_of(k, l).ok()?;
        let exp = u128::from(dms).checked_mul(1u128 << dms)?;
        (exp < 128).then(|| 1u128 << exp)
    }

    /// `(2^ems)^(2^dms)`, if it fits.
    pub fn count_effective(k: u32, l: u32) -> Option<u128> {
        let dms = dms_of(k, l).ok()?;
        let exp = u128::from(dms / 2).checked_mul(1u128 << dms)?;
        (k >= 1 && exp < 128).then(|| 1u128 << exp)
    }

    /// A uniformly random table.
    pub fn random<R: Rng + ?Sized>(k: u32, l: u32, rng: &mut R) -> Result<Self, TransformError> {
        let dms = dms_of(k, l)?;
        let states = 1u64 << dms;
        let images = (0..states).map(|_| rng.random_range(0..states)).collect();
        Self::new(k, l, images)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn words(&self) -> usize {
        1 << self.k
    }

    pub fn dms(&self) -> u32 {
        self.words() as u32 * self.l
    }

    pub fn state_count(&self) -> u64 {
        self.images.len() as u64
    }

    pub fn images(&self) -> &[u64] {
        &self.images
    }

    pub fn rank(&self, words: &[u64]) -> u64 {
        words.iter().rev().fold(0u64, |acc, &w| (acc << self.l) | w)
    }

    pub fn unrank(&self, rank: u64) -> Vec<u64> {
        let mask = (1u64 << self.l) - 1;
        (0..self.words())
            .map(|j| (rank >> (j as u32 * self.l)) & mask)
            .collect()
    }

    pub fn apply_rank(&self, rank: u64) -> u64 {
        self.images[rank as usize]
    }

    pub fn apply(&self, words: &[u64]) -> Vec<u64> {
        self.unrank(self.apply_rank(self.rank(words)))
    }

    /// Text form: a `k=<n> l=<n>` header, then one `w0,w1,... -> w0',...`
    /// line per data state in rank order, decimal words.
    pub fn to_text(&self) -> String {
        let mut out = format!("k={} l={}\n", self.k, self.l);
        let join = |ws: Vec<u64>| ws.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        for (r, &img) in self.images.iter().enumerate() {
            let _ = writeln!(out, "{} -> {}", join(self.unrank(r as u64)), join(self.unrank(img)));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, TransformError> {
        let perr = |line: usize, message: String| TransformError::Parse { line, message };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines
            .next()
            .ok_or_else(|| perr(1, "missing `k=<n> l=<n>` header".into()))?;
        let (mut k, mut l) = (None, None);
        for token in header.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| perr(hline, format!("expected key=value, found `{token}`")))?;
            let n: u32 = value
                .parse()
                .map_err(|_| perr(hline, format!("`{value}` is not a natural number")))?;
            let slot = match key {
                "k" => &mut k,
                "l" => &mut l,
                _ => return Err(perr(hline, format!("unknown header key `{key}`"))),
            };
            if slot.replace(n).is_some() {
                return Err(perr(hline, format!("`{key}` given twice")));
            }
        }
        let (k, l) = match (k, l) {
            (Some(k), Some(l)) => (k, l),
            _ => return Err(perr(hline, "header must give both k and l".into())),
        };
        let dms = dms_of(k, l).map_err(|e| perr(hline, e.to_string()))?;
        let shell = TransformationTable {
            k,
            l,
            images: Vec::new(),
        };
        let mut images: Vec<Option<u64>> = vec![None; 1 << dms];
        let words = |line: usize, side: &str| -> Result<u64, TransformError> {
            let ws: Vec<u64> = side
                .split(',')
                .map(|w| {
                    let w = w.trim();
                    w.parse::<u64>()
                        .ok()
                        .filter(|&v| v < 1u64 << l)
                        .ok_or_else(|| perr(line, format!("`{w}` is not an {l}-bit word")))
                })
                .collect::<Result<_, _>>()?;
            if ws.len() != shell.words() {
                return Err(perr(
                    line,
                    format!("expected {} words, found {}", shell.words(), ws.len()),
                ));
            }
            Ok(shell.rank(&ws))
        };
        for (line, body) in lines {
            let (lhs, rhs) = body
                .split_once("->")
                .ok_or_else(|| perr(line, "entry needs `->`".into()))?;
            let from = words(line, lhs)?;
            let to = words(line, rhs)?;
            if images[from as usize].replace(to).is_some() {
                return Err(perr(line, format!("state `{}` is listed twice", lhs.trim())));
            }
        }
        let last = text.lines().count();
        let images = images
            .into_iter()
            .enumerate()
            .map(|(r, img)| {
                img.ok_or_else(|| {
                    let ws: Vec<String> = shell.unrank(r as u64).iter().map(u64::to_string).collect();
                    perr(last, format!("no entry for state {}", ws.join(",")))
                })
            })
            .collect::<Result<_, _>>()?;
        Self::new(k, l, images)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ranks_put_word_zero_lowest() {
        let t = TransformationTable::identity(1, 3).unwrap();
        assert_eq!(t.rank(&[5, 2]), 5 + (2 << 3));
        assert_eq!(t.unrank(21), vec![5, 2]);
        assert_eq!(t.state_count(), 64);
    }

    #[test]
    fn counts() {
        assert_eq!(TransformationTable::count_all(1, 1), Some(256));
        assert_eq!(TransformationTable::count_all(0, 2), Some(256));
        assert_eq!(TransformationTable::count_all(0, 1), Some(4));
        assert_eq!(TransformationTable::count_effective(1, 1), Some(16));
        assert_eq!(TransformationTable::count_all(2, 2), None);
    }

    #[test]
    fn nth_enumerates_distinct_tables() {
        let all: std::collections::HashSet<_> = (0..256).map(|i| TransformationTable::nth(1, 1, i).unwrap()).collect();
        assert_eq!(all.len(), 256);
        let eff: std::collections::HashSet<_> = (0..16)
            .map(|i| TransformationTable::nth_effective(1, 1, i).unwrap())
            .collect();
        assert_eq!(eff.len(), 16);
        for t in &eff {
            for r in 0..4u64 {
                // internal word kept
                assert_eq!(t.apply_rank(r) >> 1, r >> 1);
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (k, l) in [(0, 1), (1, 1), (1, 2), (2, 1)] {
            let t = TransformationTable::random(k, l, &mut rng).unwrap();
            assert_eq!(TransformationTable::parse(&t.to_text()).unwrap(), t);
        }
        let swap = TransformationTable::from_fn(1, 1, |w| vec![w[1], w[0]]).unwrap();
        assert_eq!(
            swap.to_text(),
            "k=1 l=1\n0,0 -> 0,0\n1,0 -> 0,1\n0,1 -> 1,0\n1,1 -> 1,1\n"
        );
    }

    #[test]
    fn parse_errors() {
        assert!(TransformationTable::parse("").is_err());
        assert!(TransformationTable::parse("k=0 l=1\n0 -> 1\n").is_err());
        assert!(TransformationTable::parse("k=0 l=1\n0 -> 1\n1 -> 2\n").is_err());
        assert!(TransformationTable::parse("k=0 l=1\n0 -> 1\n0 -> 0\n").is_err());
        assert!(TransformationTable::parse("k=0 l=1\n0,0 -> 1\n1 -> 0\n").is_err());
        assert!(TransformationTable::parse("k=0\n").is_err());
        assert!(TransformationTable::parse("k=0 l=1\n0 -> 1\n1 -> 0\n").is_ok());
    }
}
