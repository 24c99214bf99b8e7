//! Exact counting bounds behind incompleteness, and a classifier that says
//! which known result (if any) decides completeness at a parameter point.
//!
//! Nothing here uses floating point. Quantities such as
//! `(2^ems)^(2^ems)` are kept as [`Count`]s, which stay compact for huge
//! powers of two.

mod count;

use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{CheckedSub, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::thread::{enumerate_threads, raw_search_space, ActionId};

pub use count::{Count, MAX_EXPAND_BITS};

/// Exact thread counting refuses to walk more raw graphs than this.
pub const ENUMERATION_CAP: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountingError {
    #[error("ems={0} is odd; only the symbolic predicate is available")]
    OddEms(u64),
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("enumeration would visit {raw} raw graphs (cap {cap})")]
    EnumerationTooLarge { raw: BigUint, cap: u64 },
}

/// `2^bits`.
pub fn state_count(bits: u64) -> Count {
    Count::pow2(bits)
}

fn even_ems(ems: u64) -> Result<(), CountingError> {
    if ems == 0 {
        return Err(CountingError::PreconditionViolation("ems must be at least 2".into()));
    }
    if ems % 2 == 1 {
        return Err(CountingError::OddEms(ems));
    }
    Ok(())
}

/// `((2^(ems/2))^(2^(ems/2)))^(2^(ems/2)) · 2^ems`: how many transformations
/// of external memory a small operating unit can reach, times the number of
/// threads allowed.
pub fn small_unit_lhs(ems: u64) -> Result<Count, CountingError> {
    even_ems(ems)?;
    let x = state_count(ems / 2);
    let x_big = x.to_biguint().unwrap_or_else(|| BigUint::one() << (ems / 2));
    let per_instruction = x.pow(&x_big).expect("power of two");
    let per_thread = per_instruction.pow(&x_big).expect("power of two");
    Ok(per_thread.mul(&state_count(ems)))
}

/// `(2^ems)^(2^ems)`: all transformations of external memory.
pub fn all_transformations(ems: u64) -> Result<Count, CountingError> {
    even_ems(ems)?;
    Ok(state_count(ems).pow(&(BigUint::one() << ems)).expect("power of two"))
}

/// Exact comparison `small_unit_lhs(ems) < all_transformations(ems)`.
pub fn small_unit_inequality_exact(ems: u64) -> Result<bool, CountingError> {
    Ok(small_unit_lhs(ems)? < all_transformations(ems)?)
}

/// The symbolic form of the same inequality. With `x = 2^(ems/2)` it reduces
/// to `(x² − 2)·log₂x > 0`, which holds exactly when `x > √2`, that is
/// `ems > 1`. Defined for every positive rational `ems`.
pub fn small_unit_inequality_holds(ems: &BigRational) -> Result<bool, CountingError> {
    if !ems.is_positive() {
        return Err(CountingError::PreconditionViolation("ems must be positive".into()));
    }
    Ok(*ems > BigRational::one())
}

/// `((d+w)·e²+2)^e`: raw thread graphs with `e` states over `d+w`
/// instructions.
pub fn thread_count_bound(d: u64, w: u64, e: u64) -> Result<Count, CountingError> {
    if d == 0 || w == 0 || e == 0 {
        return Err(CountingError::PreconditionViolation(
            "d, w and e must be at least 1".into(),
        ));
    }
    let base = BigUint::from(d + w) * BigUint::from(e) * BigUint::from(e) + 2u32;
    let e32 = u32::try_from(e).map_err(|_| CountingError::PreconditionViolation("e is too large".into()))?;
    Ok(Count::from(base.pow(e32)))
}

/// Number of distinct threads (up to bisimulation) with at most `e` states
/// over `alphabet_size` actions, by enumeration.
pub fn exact_thread_count(alphabet_size: usize, e: usize) -> Result<Count, CountingError> {
    let raw = raw_search_space(alphabet_size, e);
    if raw > BigUint::from(ENUMERATION_CAP) {
        return Err(CountingError::EnumerationTooLarge {
            raw,
            cap: ENUMERATION_CAP,
        });
    }
    let alphabet: Vec<ActionId> = (0..alphabet_size).map(|i| ActionId::indexed("a", i as u32)).collect();
    Ok(Count::from(enumerate_threads(&alphabet, e).count() as u64))
}

/// Parameter point for the classifier. `ims` is the number of bits of
/// internal data memory the threads use as working area.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RegimeParams {
    pub k: u32,
    pub l: u32,
    pub m: u64,
    pub d: u64,
    pub e: u64,
    pub f: bool,
    pub u: u64,
    pub v: u64,
    pub ims: u64,
}

impl RegimeParams {
    pub fn w(&self) -> u64 {
        self.u + self.v
    }

    pub fn dms(&self) -> BigUint {
        BigUint::from(self.l) << self.k
    }

    /// `dms / 2`, meaningful for `k ≥ 1`.
    pub fn ems(&self) -> BigUint {
        self.dms() >> 1u32
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// Complete: operating unit of `dms + k + 1` bits, 5 instructions,
    /// `6 + w` thread states.
    CompleteFullUnit,
    /// Complete with flag `T`: operating unit of `ems + k` bits.
    CompleteHalfUnit,
    /// Not complete: `d ≤ 2^l − w − 1` and `e ≤ 2^(k−2)` leave too few
    /// threads.
    IncompleteFewThreads,
    /// Not complete: the operating unit plus used internal memory is at most
    /// `ems/2` bits.
    IncompleteSmallUnit,
    Unknown,
}

impl Verdict {
    pub fn is_complete(&self) -> bool {
        matches!(self, Verdict::CompleteFullUnit | Verdict::CompleteHalfUnit)
    }

    pub fn is_incomplete(&self) -> bool {
        matches!(self, Verdict::IncompleteFewThreads | Verdict::IncompleteSmallUnit)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::CompleteFullUnit => "complete (full-size operating unit)",
            Verdict::CompleteHalfUnit => "complete (half-size operating unit, f=T)",
            Verdict::IncompleteFewThreads => "not complete (too few threads)",
            Verdict::IncompleteSmallUnit => "not complete (operating unit too small)",
            Verdict::Unknown => "unknown (no result applies)",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Premise {
    pub verdict: Verdict,
    pub statement: String,
    pub holds: bool,
    /// Set when the premise is checked through a sufficient condition only.
    pub sufficient_only: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegimeVerdict {
    pub verdict: Verdict,
    pub checklist: Vec<Premise>,
}

impl fmt::Display for RegimeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict)?;
        for p in &self.checklist {
            writeln!(
                f,
                "  [{}] {:<40} {}{}",
                if p.holds { "x" } else { " " },
                p.statement,
                p.verdict,
                if p.sufficient_only { " (sufficient check)" } else { "" }
            )?;
        }
        Ok(())
    }
}

struct Checklist {
    items: Vec<Premise>,
}

impl Checklist {
    fn check(&mut self, verdict: Verdict, statement: String, holds: bool) -> bool {
        self.items.push(Premise {
            verdict,
            statement,
            holds,
            sufficient_only: false,
        });
        holds
    }
}

/// Picks the first result whose premises all hold, in the order: full-size
/// unit, half-size unit, too few threads, unit too small.
pub fn classify_regime(p: &RegimeParams) -> Result<RegimeVerdict, CountingError> {
    if p.l == 0 || p.d == 0 || p.e == 0 {
        return Err(CountingError::PreconditionViolation(
            "l, d and e must be positive".into(),
        ));
    }
    if p.u == 0 || p.v == 0 {
        return Err(CountingError::PreconditionViolation(
            "u and v must be at least 1".into(),
        ));
    }
    if p.k == 0 && p.f {
        return Err(CountingError::PreconditionViolation("f=T requires k >= 1".into()));
    }
    if p.k > 64 {
        return Err(CountingError::PreconditionViolation(
            "k above 64 is not supported".into(),
        ));
    }
    let (m, d, e, w, k, l) = (
        BigUint::from(p.m),
        BigUint::from(p.d),
        BigUint::from(p.e),
        BigUint::from(p.w()),
        p.k,
        p.l,
    );
    let (dms, ems) = (p.dms(), p.ems());
    let mut c = Checklist { items: Vec::new() };

    use Verdict::*;
    let full = [
        c.check(
            CompleteFullUnit,
            format!("m = dms+k+1 ({} = {})", m, &dms + k + 1u32),
            m == &dms + k + 1u32,
        ),
        c.check(CompleteFullUnit, format!("d = 5 ({d})"), p.d == 5),
        c.check(
            CompleteFullUnit,
            format!("e = 6+w ({} = {})", e, &w + 6u32),
            e == &w + 6u32,
        ),
    ];

    let half = [
        c.check(CompleteHalfUnit, "f = T".into(), p.f),
        c.check(CompleteHalfUnit, format!("k >= 1 ({k})"), k >= 1),
        c.check(
            CompleteHalfUnit,
            format!("m = ems+k ({} = {})", m, &ems + k),
            k >= 1 && m == &ems + k,
        ),
        c.check(CompleteHalfUnit, format!("d = 5 ({d})"), p.d == 5),
        c.check(
            CompleteHalfUnit,
            format!("e = 6+w ({} = {})", e, &w + 6u32),
            e == &w + 6u32,
        ),
    ];

    // m + ims <= ems/2, compared as 2(m + ims) <= ems
    let used = BigUint::from(p.m) + p.ims;
    let small_unit = k >= 1 && (&used << 1u32) <= ems;
    let unit_statement = format!("m+ims <= ems/2 ({} <= {}/2)", used, ems);

    let two_l = BigUint::one() << l;
    let few = [
        c.check(IncompleteFewThreads, "f = T".into(), p.f),
        c.check(IncompleteFewThreads, format!("k > 2 ({k})"), k > 2),
        c.check(IncompleteFewThreads, format!("l > 1 ({l})"), l > 1),
        c.check(IncompleteFewThreads, format!("e > 1 ({e})"), p.e > 1),
        c.check(IncompleteFewThreads, unit_statement.clone(), small_unit),
        c.check(
            IncompleteFewThreads,
            format!("d <= 2^l-w-1 ({d} <= 2^{l}-{w}-1)"),
            &d + &w < two_l,
        ),
        c.check(
            IncompleteFewThreads,
            format!("e <= 2^(k-2) ({e} <= 2^({k}-2))"),
            k >= 2 && e <= BigUint::one() << (k - 2),
        ),
    ];

    // d <= 2^(ems/2), compared as d^2 <= 2^ems; the thread count premise is
    // only checked through the raw graph bound
    let ems_count = ems.to_u64().map(state_count);
    let d_small = ems_count
        .as_ref()
        .is_some_and(|two_ems| Count::from(&d * &d) <= *two_ems);
    let threads_few = match (&ems_count, thread_count_bound(p.d, p.w(), p.e)) {
        (Some(two_ems), Ok(bound)) => bound <= *two_ems,
        _ => false,
    };
    let small = [
        c.check(IncompleteSmallUnit, "f = T".into(), p.f),
        c.check(IncompleteSmallUnit, format!("k > 1 ({k})"), k > 1),
        c.check(IncompleteSmallUnit, unit_statement, small_unit),
        c.check(
            IncompleteSmallUnit,
            format!("d <= 2^(ems/2) ({d} <= 2^({ems}/2))"),
            d_small,
        ),
        {
            c.items.push(Premise {
                verdict: IncompleteSmallUnit,
                statement: format!("threads <= 2^ems via ((d+w)e^2+2)^e <= 2^{ems}"),
                holds: threads_few,
                sufficient_only: true,
            });
            threads_few
        },
    ];

    let verdict = if full.iter().all(|&b| b) {
        CompleteFullUnit
    } else if half.iter().all(|&b| b) {
        CompleteHalfUnit
    } else if few.iter().all(|&b| b) {
        IncompleteFewThreads
    } else if small.iter().all(|&b| b) {
        IncompleteSmallUnit
    } else {
        Unknown
    };
    Ok(RegimeVerdict {
        verdict,
        checklist: c.items,
    })
}

/// One inequality of the thread-count argument, evaluated exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Link {
    pub statement: String,
    pub lhs: Count,
    pub rhs: Count,
    pub strict: bool,
    pub holds: bool,
}

impl Link {
    fn new(statement: &str, lhs: Count, rhs: Count, strict: bool) -> Self {
        let holds = if strict { lhs < rhs } else { lhs <= rhs };
        Link {
            statement: statement.to_string(),
            lhs,
            rhs,
            strict,
            holds,
        }
    }
}

/// The chain `((d+w)e²+2)^e < ((d+w)e²+e²)^e ≤ 2^ems` and the step
/// `2^l − w − 1 < 2^(ems/2)`, with the side conditions the argument relies
/// on, including `l ≥ 2k − 4`, which the incompleteness statement itself
/// does not list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainReport {
    pub k: u32,
    pub l: u32,
    pub d: u64,
    pub e: u64,
    pub w: u64,
    pub side_conditions: Vec<(String, bool)>,
    pub links: Vec<Link>,
}

impl ChainReport {
    pub fn links_hold(&self) -> bool {
        self.links.iter().all(|l| l.holds)
    }

    pub fn side_conditions_hold(&self) -> bool {
        self.side_conditions.iter().all(|(_, h)| *h)
    }
}

impl fmt::Display for ChainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "k={} l={} d={} e={} w={}", self.k, self.l, self.d, self.e, self.w)?;
        for (s, h) in &self.side_conditions {
            writeln!(f, "  side  {:<28} {}", s, if *h { "holds" } else { "FAILS" })?;
        }
        for link in &self.links {
            writeln!(
                f,
                "  link  {:<28} {} {} {}  {}",
                link.statement,
                link.lhs,
                if link.strict { "<" } else { "<=" },
                link.rhs,
                if link.holds { "holds" } else { "FAILS" }
            )?;
        }
        Ok(())
    }
}

pub fn verify_thread_bound_chain(k: u32, l: u32, d: u64, e: u64, w: u64) -> Result<ChainReport, CountingError> {
    if k == 0 || k > 32 || l == 0 {
        return Err(CountingError::PreconditionViolation(
            "need 1 <= k <= 32 and l >= 1".into(),
        ));
    }
    let ems = (u64::from(l) << k) / 2;
    let first = thread_count_bound(d, w, e)?;
    let e2 = BigUint::from(e) * e;
    let e32 = u32::try_from(e).map_err(|_| CountingError::PreconditionViolation("e is too large".into()))?;
    let middle = Count::from((BigUint::from(d + w) * &e2 + &e2).pow(e32));
    let two_ems = state_count(ems);
    let two_l = Count::from(BigUint::one() << l);
    // 2^l - w - 1 may be negative; then it is below anything
    let budget = (BigUint::one() << l)
        .checked_sub(&BigUint::from(w + 1))
        .map(Count::from);
    let sqrt_ok = match &budget {
        None => true,
        // a < 2^(ems/2)  iff  a^2 < 2^ems
        Some(a) => a.mul(a) < two_ems,
    };
    let links = vec![
        Link::new("((d+w)e^2+2)^e < ((d+w)e^2+e^2)^e", first, middle.clone(), true),
        Link::new("((d+w)e^2+e^2)^e <= 2^ems", middle, two_ems.clone(), false),
        Link {
            statement: "2^l < 2^(ems/2)".into(),
            lhs: two_l.clone(),
            rhs: two_ems.clone(),
            strict: true,
            holds: two_l.mul(&two_l) < two_ems,
        },
        Link {
            statement: "2^l-w-1 < 2^(ems/2)".into(),
            lhs: budget.unwrap_or_else(Count::zero),
            rhs: two_ems,
            strict: true,
            holds: sqrt_ok,
        },
    ];
    let side_conditions = vec![
        (format!("k > 2 ({k})"), k > 2),
        (format!("l >= 2 ({l})"), l >= 2),
        (format!("e > 1 ({e})"), e > 1),
        (
            format!("l >= 2k-4 ({l} >= {})", (2 * i64::from(k) - 4)),
            i64::from(l) >= 2 * i64::from(k) - 4,
        ),
    ];
    Ok(ChainReport {
        k,
        l,
        d,
        e,
        w,
        side_conditions,
        links,
    })
}

/// Chain reports over a grid, each at the largest `d` and `e` the
/// incompleteness premises allow (`d = 2^l − w − 1`, `e = 2^(k−2)`).
/// Points where no positive `d` is allowed are skipped.
pub fn scan_thread_bound_chain(ks: RangeInclusive<u32>, ls: RangeInclusive<u32>, w: u64) -> Vec<ChainReport> {
    let mut out = Vec::new();
    for k in ks {
        for l in ls.clone() {
            if k < 2 || l >= 63 {
                continue;
            }
            let d = (1u64 << l).saturating_sub(w + 1);
            if d == 0 {
                continue;
            }
            let e = 1u64 << (k - 2);
            if let Ok(r) = verify_thread_bound_chain(k, l, d, e, w) {
                out.push(r);
            }
        }
    }
    out
}

/// Rational `ems` from text such as `3/2` or `2`.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigUint>().ok()?, d.trim().parse::<BigUint>().ok()?),
        None => (text.trim().parse::<BigUint>().ok()?, BigUint::one()),
    };
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n.into(), d.into()))
}

#[cfg(test)]
mod tests;
