//! Exact nonnegative integers that stay small when they are huge powers of
//! two.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// Counts above this many bits are never expanded into a plain integer.
pub const MAX_EXPAND_BITS: u64 = 1 << 20;

/// `odd · 2^exp`, with `odd` odd (or the pair `(0, 0)` for zero).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Count {
    odd: BigUint,
    exp: BigUint,
}

impl Count {
    pub fn zero() -> Self {
        Count {
            odd: BigUint::zero(),
            exp: BigUint::zero(),
        }
    }

    pub fn one() -> Self {
        Self::pow2(0u32)
    }

    pub fn pow2(exp: impl Into<BigUint>) -> Self {
        Count {
            odd: BigUint::one(),
            exp: exp.into(),
        }
    }

    pub fn from_biguint(n: BigUint) -> Self {
        match n.trailing_zeros() {
            None => Self::zero(),
            Some(tz) => Count {
                odd: n >> tz,
                exp: BigUint::from(tz),
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.odd.is_zero()
    }

    /// The exponent if this is a power of two.
    pub fn log2_exact(&self) -> Option<&BigUint> {
        self.odd.is_one().then_some(&self.exp)
    }

    /// Number of binary digits.
    pub fn bits(&self) -> BigUint {
        if self.is_zero() {
            BigUint::zero()
        } else {
            BigUint::from(self.odd.bits()) + &self.exp
        }
    }

    pub fn mul(&self, other: &Count) -> Count {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        Count {
            odd: &self.odd * &other.odd,
            exp: &self.exp + &other.exp,
        }
    }

    /// `self^e`. Only powers of two (and zero or one) may be raised to
    /// exponents beyond `u32`.
    pub fn pow(&self, e: &BigUint) -> Option<Count> {
        if e.is_zero() {
            return Some(Self::one());
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let odd = if self.odd.is_one() {
            BigUint::one()
        } else {
            self.odd.pow(e.to_u32()?)
        };
        Some(Count {
            odd,
            exp: &self.exp * e,
        })
    }

    pub fn to_biguint(&self) -> Option<BigUint> {
        let bits = self.bits().to_u64()?;
        (bits <= MAX_EXPAND_BITS).then(|| &self.odd << self.exp.to_u64().expect("bounded by bits"))
    }
}

impl From<u64> for Count {
    fn from(n: u64) -> Self {
        Self::from_biguint(BigUint::from(n))
    }
}

impl From<BigUint> for Count {
    fn from(n: BigUint) -> Self {
        Self::from_biguint(n)
    }
}

impl Ord for Count {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        match self.bits().cmp(&other.bits()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        // equal length: the exponent gap is below the odd parts' length
        if self.exp >= other.exp {
            let shift = (&self.exp - &other.exp).to_u64().expect("gap bounded by bit length");
            (&self.odd << shift).cmp(&other.odd)
        } else {
            let shift = (&other.exp - &self.exp).to_u64().expect("gap bounded by bit length");
            self.odd.cmp(&(&other.odd << shift))
        }
    }
}

impl PartialOrd for Count {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Count {
    /// Decimal up to 128 bits, `2^e` for larger powers of two, otherwise
    /// decimal while the exponent stays moderate.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let small = self.bits() <= BigUint::from(128u32);
        if !small && self.odd.is_one() {
            return write!(f, "2^{}", self.exp);
        }
        match self.to_biguint() {
            Some(n) if small || self.exp <= BigUint::from(4096u32) => write!(f, "{n}"),
            _ => write!(f, "{}*2^{}", self.odd, self.exp),
        }
    }
}
