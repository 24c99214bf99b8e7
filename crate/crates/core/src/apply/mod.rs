//! The apply operator `p •_H S`: run a thread on a Maurer machine from a
//! state until it terminates, deadlocks or provably diverges.
//!
//! A run is a walk through configurations `(node, state)`. Both components
//! range over finite sets, so a run that never reaches `S` or `D` revisits a
//! configuration; Brent's cycle detection finds the repeat with constant
//! memory and the run is reported as [`ApplyResult::Undefined`].

mod split;

use std::fmt;

use thiserror::Error;

use crate::machine::{Interpretation, MachineState, MaurerMachine, F, T};
use crate::thread::{ActionId, Node, ThreadGraph};

pub use split::{for_each_case, Case, CaseStats, PartialState, SplitError};

/// A machine state or the undefined state `↑`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ApplyResult {
    Defined(MachineState),
    Undefined,
}

impl ApplyResult {
    pub fn state(&self) -> Option<&MachineState> {
        match self {
            ApplyResult::Defined(s) => Some(s),
            ApplyResult::Undefined => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("action {0} is not interpreted by the machine")]
    UnknownAction(ActionId),
    #[error("action {action} left non-boolean value {value} in its reply cell")]
    NonBooleanReply { action: ActionId, value: u32 },
}

/// What each node of a thread does on a given machine.
#[derive(Clone, Copy)]
pub(crate) enum Step<'a> {
    Stop,
    Dead,
    Tau {
        on_true: usize,
    },
    Act {
        action: &'a ActionId,
        interp: &'a Interpretation,
        on_true: usize,
        on_false: usize,
    },
}

pub(crate) fn resolve<'a>(p: &'a ThreadGraph, h: &'a MaurerMachine) -> Result<Vec<Step<'a>>, ApplyError> {
    p.nodes()
        .iter()
        .map(|n| match n {
            Node::Stop => Ok(Step::Stop),
            Node::Dead => Ok(Step::Dead),
            Node::Post {
                action,
                on_true,
                on_false,
            } if action.is_tau() => {
                let _ = on_false;
                Ok(Step::Tau { on_true: *on_true })
            }
            Node::Post {
                action,
                on_true,
                on_false,
            } => {
                let interp = h
                    .interpretation(action)
                    .ok_or_else(|| ApplyError::UnknownAction(action.clone()))?;
                Ok(Step::Act {
                    action,
                    interp,
                    on_true: *on_true,
                    on_false: *on_false,
                })
            }
        })
        .collect()
}

pub(crate) fn branch(action: &ActionId, reply: u32, on_true: usize, on_false: usize) -> Result<usize, ApplyError> {
    match reply {
        T => Ok(on_true),
        F => Ok(on_false),
        value => Err(ApplyError::NonBooleanReply {
            action: action.clone(),
            value,
        }),
    }
}

/// Brent's cycle detector over configurations.
#[derive(Clone)]
pub(crate) struct CycleDetector<C> {
    saved: C,
    power: u64,
    lam: u64,
}

impl<C: PartialEq + Clone> CycleDetector<C> {
    pub(crate) fn new(start: C) -> Self {
        CycleDetector {
            saved: start,
            power: 1,
            lam: 0,
        }
    }

    /// Records one more configuration; true if it closes a cycle.
    pub(crate) fn repeats(&mut self, current: &C) -> bool {
        if *current == self.saved {
            return true;
        }
        self.lam += 1;
        if self.lam == self.power {
            self.saved = current.clone();
            self.power *= 2;
            self.lam = 0;
        }
        false
    }
}

/// `p •_H s`.
pub fn apply(p: &ThreadGraph, h: &MaurerMachine, s: ApplyResult) -> Result<ApplyResult, ApplyError> {
    let steps = resolve(p, h)?;
    let ApplyResult::Defined(state) = s else {
        return Ok(ApplyResult::Undefined);
    };
    Ok(run(&steps, p.entry(), state)?.0)
}

/// Runs resolved steps from `node`; also returns the number of actions
/// performed.
pub(crate) fn run(
    steps: &[Step<'_>],
    mut node: usize,
    mut state: MachineState,
) -> Result<(ApplyResult, usize), ApplyError> {
    let mut count = 0;
    let mut cycle = CycleDetector::new((node, state.clone()));
    loop {
        node = match steps[node] {
            Step::Stop => return Ok((ApplyResult::Defined(state), count)),
            Step::Dead => return Ok((ApplyResult::Undefined, count)),
            Step::Tau { on_true } => on_true,
            Step::Act {
                action,
                interp,
                on_true,
                on_false,
            } => {
                interp.operation.apply_in_place(&mut state);
                branch(action, state.get(interp.reply_cell), on_true, on_false)?
            }
        };
        count += 1;
        // compare without cloning: the detector only clones on checkpoints
        let config = (node, state);
        if cycle.repeats(&config) {
            return Ok((ApplyResult::Undefined, count));
        }
        state = config.1;
    }
}

/// `p •_H s` together with the number of actions performed before the run
/// ended (terminated, deadlocked or closed a cycle).
pub fn apply_counted(p: &ThreadGraph, h: &MaurerMachine, s: MachineState) -> Result<(ApplyResult, usize), ApplyError> {
    let steps = resolve(p, h)?;
    run(&steps, p.entry(), s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub node: usize,
    pub action: ActionId,
    pub reply: bool,
    /// FNV-1a digest of the state after the step.
    pub digest: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEnd {
    Finished(ApplyResult),
    Truncated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub end: TraceEnd,
    /// Set when a `tau` step ran; `tau` is executed as the identity with
    /// reply `T`.
    pub used_tau: bool,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "node {:>3}  {:<12} reply={}  state#{:016x}",
            self.node,
            self.action.to_string(),
            if self.reply { "T" } else { "F" },
            self.digest
        )
    }
}

pub fn state_digest(s: &MachineState) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for v in s.values() {
        for b in v.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(PRIME);
        }
    }
    h
}

/// Step-by-step record of the run `apply` performs, without cycle
/// detection, cut off after `max_steps` actions.
pub fn trace(
    p: &ThreadGraph,
    h: &MaurerMachine,
    s: ApplyResult,
    max_steps: usize,
) -> Result<(Trace, Option<MachineState>), ApplyError> {
    let steps = resolve(p, h)?;
    let mut out = Trace {
        steps: Vec::new(),
        end: TraceEnd::Finished(ApplyResult::Undefined),
        used_tau: false,
    };
    let ApplyResult::Defined(mut state) = s else {
        return Ok((out, None));
    };
    let mut node = p.entry();
    loop {
        let (action, next, reply) = match steps[node] {
            Step::Stop => {
                out.end = TraceEnd::Finished(ApplyResult::Defined(state.clone()));
                return Ok((out, Some(state)));
            }
            Step::Dead => {
                out.end = TraceEnd::Finished(ApplyResult::Undefined);
                return Ok((out, Some(state)));
            }
            _ if out.steps.len() >= max_steps => {
                out.end = TraceEnd::Truncated;
                return Ok((out, Some(state)));
            }
            Step::Tau { on_true } => {
                out.used_tau = true;
                (ActionId::tau(), on_true, true)
            }
            Step::Act {
                action,
                interp,
                on_true,
                on_false,
            } => {
                interp.operation.apply_in_place(&mut state);
                let reply = state.get(interp.reply_cell);
                let next = branch(action, reply, on_true, on_false)?;
                (action.clone(), next, reply == T)
            }
        };
        out.steps.push(TraceStep {
            node,
            action,
            reply,
            digest: state_digest(&state),
        });
        node = next;
    }
}
