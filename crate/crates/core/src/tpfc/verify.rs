//! Completeness sweeps: synthesize a witness for many transformations and
//! check each one.

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::{
    check_membership, synthesize_lean, synthesize_wide, Membership, TpfcParams, TransformError, TransformationTable,
};

/// Exhaustive sweeps refuse to run over more transformations than this.
pub const EXHAUSTIVE_SWEEP_CAP: u128 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Synthesizer {
    Lean,
    Wide,
}

impl fmt::Display for Synthesizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Synthesizer::Lean => "lean",
            Synthesizer::Wide => "wide",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    Exhaustive,
    /// `n` uniformly random tables drawn from ChaCha8 seeded with `seed`.
    Sample {
        n: u64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("exhaustive sweep needs {required} transformations, cap is {cap}")]
    CapExceeded { required: String, cap: u128 },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Table(#[from] TransformError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepFailure {
    pub index: u64,
    pub table: TransformationTable,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletenessReport {
    pub synthesizer: Synthesizer,
    pub mode: SweepMode,
    /// The class every accepted witness belongs to.
    pub certified: TpfcParams,
    pub total: u64,
    pub realized: u64,
    pub failures: Vec<SweepFailure>,
    /// Longest run of each witness, as a histogram.
    pub trace_lengths: BTreeMap<usize, u64>,
    /// Runs performed over all membership checks.
    pub runs: u64,
}

impl CompletenessReport {
    pub fn complete(&self) -> bool {
        self.failures.is_empty() && self.realized == self.total
    }
}

impl fmt::Display for CompletenessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}/{} realized", self.realized, self.total)?;
        writeln!(f, "synthesizer: {}", self.synthesizer)?;
        match self.mode {
            SweepMode::Exhaustive => writeln!(f, "mode: exhaustive")?,
            SweepMode::Sample { n, seed } => writeln!(f, "mode: sample n={n} seed={seed} (ChaCha8)")?,
        }
        writeln!(f, "class: {}", self.certified)?;
        writeln!(f, "runs checked: {}", self.runs)?;
        let lengths: Vec<String> = self.trace_lengths.iter().map(|(len, n)| format!("{len}:{n}")).collect();
        writeln!(f, "longest run per witness (steps:count): {}", lengths.join(" "))?;
        for fail in &self.failures {
            writeln!(f, "FAILED #{}: {}", fail.index, fail.reason)?;
        }
        Ok(())
    }
}

/// Synthesizes and checks a witness for every transformation (or a seeded
/// sample). With `f = T` an exhaustive sweep ranges over maps into the
/// external half only.
pub fn verify_completeness(
    k: u32,
    l: u32,
    f: bool,
    synthesizer: Synthesizer,
    mode: SweepMode,
) -> Result<CompletenessReport, VerifyError> {
    let certified = match synthesizer {
        Synthesizer::Lean => TpfcParams::lean(k, l, f),
        Synthesizer::Wide if !f => {
            return Err(VerifyError::Unsupported(
                "the wide construction only realizes f=T".into(),
            ))
        }
        Synthesizer::Wide => TpfcParams::wide(k, l),
    }
    .map_err(|e| VerifyError::Unsupported(e.to_string()))?;
    // validates k and l
    TransformationTable::identity(k, l)?;

    let tables: Vec<TransformationTable> = match mode {
        SweepMode::Exhaustive => {
            let count = if f {
                TransformationTable::count_effective(k, l)
            } else {
                TransformationTable::count_all(k, l)
            };
            let count = match count {
                Some(n) if n <= EXHAUSTIVE_SWEEP_CAP => n,
                Some(n) => {
                    return Err(VerifyError::CapExceeded {
                        required: n.to_string(),
                        cap: EXHAUSTIVE_SWEEP_CAP,
                    })
                }
                None => {
                    let dms = (1u64 << k) * u64::from(l);
                    let bits = if f { dms / 2 } else { dms };
                    return Err(VerifyError::CapExceeded {
                        required: format!("2^{}", bits << dms),
                        cap: EXHAUSTIVE_SWEEP_CAP,
                    });
                }
            };
            (0..count)
                .map(|i| {
                    if f {
                        TransformationTable::nth_effective(k, l, i)
                    } else {
                        TransformationTable::nth(k, l, i)
                    }
                })
                .collect::<Result<_, _>>()?
        }
        SweepMode::Sample { n, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| TransformationTable::random(k, l, &mut rng))
                .collect::<Result<_, _>>()?
        }
    };

    let outcomes: Vec<Result<(usize, u64), String>> = tables
        .par_iter()
        .map(|t| {
            let witness = match synthesizer {
                Synthesizer::Lean => synthesize_lean(t, f),
                Synthesizer::Wide => synthesize_wide(t),
            }
            .map_err(|e| format!("synthesis failed: {e}"))?;
            match check_membership(t, &certified, &witness) {
                Ok(Membership::Accepted(cov)) => Ok((cov.longest, cov.runs)),
                Ok(Membership::Rejected(r)) => Err(format!("rejected ({:?}): {}", r.clause, r.detail)),
                Err(e) => Err(format!("check failed: {e}")),
            }
        })
        .collect();

    let mut report = CompletenessReport {
        synthesizer,
        mode,
        certified,
        total: tables.len() as u64,
        realized: 0,
        failures: Vec::new(),
        trace_lengths: BTreeMap::new(),
        runs: 0,
    };
    for (i, (outcome, table)) in outcomes.into_iter().zip(tables).enumerate() {
        match outcome {
            Ok((longest, runs)) => {
                report.realized += 1;
                report.runs += runs;
                *report.trace_lengths.entry(longest).or_default() += 1;
            }
            Err(reason) => report.failures.push(SweepFailure {
                index: i as u64,
                table,
                reason,
            }),
        }
    }
    Ok(report)
}
