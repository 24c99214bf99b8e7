//! Thread powered function classes: membership checking, witness synthesis
//! and completeness sweeps.
//!
//! A transformation `t` of data memory belongs to `TPFC(k,l,m,d,e,f)` when
//! some strict load/store ISA with an `m` bit operating unit and `d`
//! non-load/store instructions, together with a thread of at most `e`
//! states, turns every machine state `S` into a state whose data memory is
//! `t(S ↾ data)`. With `f = T` only the external half (the first `2^(k-1)`
//! words) has to match.

mod synth;
mod table;
mod verify;

use std::fmt;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::apply::{for_each_case, resolve, run, ApplyError, PartialState, SplitError};
use crate::machine::MachineState;
use crate::sls::{unpack_data_state, write_data, SlsMachine};
use crate::thread::{distinct_states, ThreadGraph};

pub use synth::{straight_line, synthesize_lean, synthesize_wide, SynthError};
pub use table::{TransformError, TransformationTable, MAX_TABLE_DMS};
pub use verify::{
    verify_completeness, CompletenessReport, SweepFailure, SweepMode, Synthesizer, VerifyError, EXHAUSTIVE_SWEEP_CAP,
};

/// Machines with at most this many states are checked state by state;
/// larger ones by case splitting.
pub const EXHAUSTIVE_STATE_LIMIT: u128 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TpfcParams {
    pub k: u32,
    pub l: u32,
    pub m: usize,
    pub d: usize,
    pub e: usize,
    pub f: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TpfcError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

impl TpfcParams {
    pub fn new(k: u32, l: u32, m: usize, d: usize, e: usize, f: bool) -> Result<Self, TpfcError> {
        if l == 0 || d == 0 || e == 0 {
            return Err(TpfcError::InvalidParams("l, d and e must be positive".into()));
        }
        if k == 0 && f {
            return Err(TpfcError::InvalidParams("f=T requires k >= 1".into()));
        }
        Ok(TpfcParams { k, l, m, d, e, f })
    }

    /// `(k, l, dms+k+1, 5, 6+w, f)` with `w = 2`.
    pub fn lean(k: u32, l: u32, f: bool) -> Result<Self, TpfcError> {
        let dms = (1usize << k) * l as usize;
        Self::new(k, l, dms + k as usize + 1, 5, 8, f)
    }

    /// `(k, l, ems+k, 5, 6+w, T)` with `w = 2^k + 2^(k-1)`.
    pub fn wide(k: u32, l: u32) -> Result<Self, TpfcError> {
        if k == 0 {
            return Err(TpfcError::InvalidParams("the wide construction needs k >= 1".into()));
        }
        let ems = (1usize << k) * l as usize / 2;
        let w = (1usize << k) + (1usize << (k - 1));
        Self::new(k, l, ems + k as usize, 5, 6 + w, true)
    }

    /// Words compared by the membership clause.
    pub fn compared_words(&self) -> usize {
        if self.f {
            1 << (self.k - 1)
        } else {
            1 << self.k
        }
    }
}

impl fmt::Display for TpfcParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "TPFC(k={}, l={}, m={}, d={}, e={}, f={})",
            self.k,
            self.l,
            self.m,
            self.d,
            self.e,
            if self.f { "T" } else { "F" }
        )
    }
}

/// A machine and a thread claimed to realize a transformation.
#[derive(Clone, Debug)]
pub struct Witness {
    pub machine: SlsMachine,
    pub thread: ThreadGraph,
}

/// How the universal quantification over machine states was discharged.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantifier {
    /// One run per machine state.
    Exhaustive,
    /// One run per data state, splitting on every other cell the run reads.
    CaseSplit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Coverage {
    pub quantifier: Quantifier,
    /// Runs performed: machine states or cases.
    pub runs: u64,
    /// Longest run, in actions.
    pub longest: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clause {
    OperatingUnitSize,
    InstructionCount,
    StateBudget,
    Undefined,
    WrongResult,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    pub clause: Clause,
    pub detail: String,
    pub counterexample: Option<MachineState>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Accepted(Coverage),
    Rejected(Rejection),
}

impl Membership {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Membership::Accepted(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MembershipError {
    #[error("parameter mismatch: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Run(#[from] SplitError),
}

impl From<ApplyError> for MembershipError {
    fn from(e: ApplyError) -> Self {
        MembershipError::Run(e.into())
    }
}

/// Visits one run per machine state, or one per case, reporting the
/// initial state, the data memory afterwards (`None` if undefined) and the
/// run length.
fn for_each_run<B>(
    w: &Witness,
    quantifier: Quantifier,
    mut visit: impl FnMut(&MachineState, Option<Vec<u64>>, usize) -> ControlFlow<B>,
) -> Result<ControlFlow<B, Coverage>, SplitError> {
    let m = &w.machine;
    let cells = &m.cells;
    let mut cov = Coverage {
        quantifier,
        runs: 0,
        longest: 0,
    };
    match quantifier {
        Quantifier::Exhaustive => {
            let steps = resolve(&w.thread, &m.machine)?;
            for s in m.layout().states() {
                let (result, n) = run(&steps, w.thread.entry(), s.clone())?;
                cov.runs += 1;
                cov.longest = cov.longest.max(n);
                let data = result.state().map(|r| unpack_data_state(cells, r));
                if let ControlFlow::Break(b) = visit(&s, data, n) {
                    return Ok(ControlFlow::Break(b));
                }
            }
        }
        Quantifier::CaseSplit => {
            let l = m.params.l;
            let words = m.params.words();
            let mut base = m.layout().min_state();
            for rank in 0..1u64 << (words as u32 * l) {
                let ws: Vec<u64> = (0..words).map(|j| (rank >> (j as u32 * l)) & ((1 << l) - 1)).collect();
                write_data(cells, &mut base, &ws).expect("words fit");
                let start = PartialState::from_state(m.layout(), &base, cells.data.clone());
                let flow = for_each_case(&w.thread, &m.machine, start, |case| {
                    cov.runs += 1;
                    cov.longest = cov.longest.max(case.steps);
                    let data = case.result.map(|r| {
                        cells
                            .data
                            .clone()
                            .map(|c| u64::from(r.value(c).expect("data cells stay known")))
                            .collect()
                    });
                    visit(&case.initial.witness(), data, case.steps)
                })?;
                if let ControlFlow::Break(b) = flow {
                    return Ok(ControlFlow::Break(b));
                }
            }
        }
    }
    Ok(ControlFlow::Continue(cov))
}

fn auto_quantifier(w: &Witness) -> Quantifier {
    match w.machine.layout().state_count() {
        Some(n) if n <= EXHAUSTIVE_STATE_LIMIT => Quantifier::Exhaustive,
        _ => Quantifier::CaseSplit,
    }
}

fn format_words(ws: &[u64]) -> String {
    ws.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

pub fn check_membership(
    t: &TransformationTable,
    params: &TpfcParams,
    w: &Witness,
) -> Result<Membership, MembershipError> {
    check_membership_with(t, params, w, auto_quantifier(w))
}

/// Decides whether `w` shows `t ∈ TPFC(params)`. Case splitting is exact
/// as long as every instruction's declared regions contain its true ones.
pub fn check_membership_with(
    t: &TransformationTable,
    params: &TpfcParams,
    w: &Witness,
    quantifier: Quantifier,
) -> Result<Membership, MembershipError> {
    TpfcParams::new(params.k, params.l, params.m, params.d, params.e, params.f)
        .map_err(|e| MembershipError::Mismatch(e.to_string()))?;
    let mp = &w.machine.params;
    if (t.k(), t.l()) != (mp.k, mp.l) || (t.k(), t.l()) != (params.k, params.l) {
        return Err(MembershipError::Mismatch(format!(
            "transformation has k={} l={}, machine k={} l={}, class k={} l={}",
            t.k(),
            t.l(),
            mp.k,
            mp.l,
            params.k,
            params.l
        )));
    }
    let reject = |clause, detail: String, counterexample| {
        Ok(Membership::Rejected(Rejection {
            clause,
            detail,
            counterexample,
        }))
    };
    if mp.m != params.m {
        return reject(
            Clause::OperatingUnitSize,
            format!("operating unit has {} bits, class requires m={}", mp.m, params.m),
            None,
        );
    }
    if w.machine.d() != params.d {
        return reject(
            Clause::InstructionCount,
            format!(
                "machine has {} instructions besides loads and stores, class requires d={}",
                w.machine.d(),
                params.d
            ),
            None,
        );
    }
    let states = distinct_states(&w.thread);
    if states > params.e {
        return reject(
            Clause::StateBudget,
            format!("thread has {states} states, class allows e={}", params.e),
            None,
        );
    }
    let compared = params.compared_words();
    let flow = for_each_run(w, quantifier, |s, data, _| {
        let input = unpack_data_state(&w.machine.cells, s);
        let Some(out) = data else {
            return ControlFlow::Break((Clause::Undefined, "run is undefined".to_string(), s.clone()));
        };
        let expected = t.apply(&input);
        if out[..compared] != expected[..compared] {
            return ControlFlow::Break((
                Clause::WrongResult,
                format!(
                    "data {} became {}, expected {}",
                    format_words(&input),
                    format_words(&out[..compared]),
                    format_words(&expected[..compared])
                ),
                s.clone(),
            ));
        }
        ControlFlow::Continue(())
    })?;
    Ok(match flow {
        ControlFlow::Continue(cov) => Membership::Accepted(cov),
        ControlFlow::Break((clause, detail, s)) => Membership::Rejected(Rejection {
            clause,
            detail,
            counterexample: Some(s),
        }),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InducedError {
    #[error("states {first:?} and {second:?} agree on data memory but end with different data")]
    NotFunctional { first: MachineState, second: MachineState },
    #[error("the run from {0:?} is undefined")]
    UndefinedOnSomeState(MachineState),
    #[error(transparent)]
    Run(#[from] SplitError),
    #[error(transparent)]
    Table(#[from] TransformError),
}

/// The transformation of data memory a witness performs, if its result on
/// data memory depends on data memory alone.
pub fn induced_transformation(w: &Witness) -> Result<TransformationTable, InducedError> {
    induced_transformation_with(w, auto_quantifier(w))
}

pub fn induced_transformation_with(w: &Witness, quantifier: Quantifier) -> Result<TransformationTable, InducedError> {
    let p = &w.machine.params;
    let shell = TransformationTable::identity(p.k, p.l)?;
    let mut images: Vec<Option<(u64, MachineState)>> = vec![None; shell.state_count() as usize];
    let flow = for_each_run(w, quantifier, |s, data, _| {
        let Some(out) = data else {
            return ControlFlow::Break(InducedError::UndefinedOnSomeState(s.clone()));
        };
        let from = shell.rank(&unpack_data_state(&w.machine.cells, s));
        let to = shell.rank(&out);
        match &images[from as usize] {
            None => images[from as usize] = Some((to, s.clone())),
            Some((prev, _)) if *prev == to => {}
            Some((_, first)) => {
                return ControlFlow::Break(InducedError::NotFunctional {
                    first: first.clone(),
                    second: s.clone(),
                })
            }
        }
        ControlFlow::Continue(())
    })?;
    if let ControlFlow::Break(e) = flow {
        return Err(e);
    }
    let images = images
        .into_iter()
        .map(|x| x.expect("every data state is covered").0)
        .collect();
    Ok(TransformationTable::new(p.k, p.l, images)?)
}
