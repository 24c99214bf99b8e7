//! Runs from partially known states.
//!
//! Cells start out known or unknown. Before an action executes, every
//! unknown cell in its declared input region (and its reply cell, when the
//! action does not write it) is split: the run forks once per value of that
//! cell. Cells the action writes become known. The resulting cases cover
//! every total initial state agreeing with the start on the known cells, and
//! each case is exact for all of them, provided every operation's declared
//! input region contains its true input region and its declared output
//! region contains its true output region. The latter is checked on the fly.

use std::ops::ControlFlow;

use thiserror::Error;

use super::{branch, resolve, ApplyError, CycleDetector, Step};
use crate::machine::{MachineState, MaurerMachine, MemoryLayout};
use crate::thread::{ActionId, ThreadGraph};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialState {
    values: Vec<u32>,
    known: Vec<bool>,
}

impl PartialState {
    /// Nothing known.
    pub fn unknown(layout: &MemoryLayout) -> Self {
        PartialState {
            values: layout.min_state().values().to_vec(),
            known: vec![false; layout.cell_count()],
        }
    }

    /// `state` restricted to `cells`.
    pub fn from_state(layout: &MemoryLayout, state: &MachineState, cells: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::unknown(layout);
        for c in cells {
            p.set(c, state.get(c));
        }
        p
    }

    pub fn is_known(&self, cell: usize) -> bool {
        self.known[cell]
    }

    pub fn value(&self, cell: usize) -> Option<u32> {
        self.known[cell].then(|| self.values[cell])
    }

    pub fn set(&mut self, cell: usize, value: u32) {
        self.values[cell] = value;
        self.known[cell] = true;
    }

    pub fn known_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.known.iter().enumerate().filter(|(_, k)| **k).map(|(c, _)| c)
    }

    /// A total state: known cells as recorded, unknown ones at their
    /// domain minimum.
    pub fn witness(&self) -> MachineState {
        MachineState::from_raw(self.values.clone())
    }
}

/// One branch of a split run. `result` is `None` when the run is
/// undefined.
#[derive(Clone, Debug)]
pub struct Case {
    pub initial: PartialState,
    pub result: Option<PartialState>,
    pub steps: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CaseStats {
    pub cases: u64,
    pub longest: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error(transparent)]
    Apply(#[from] ApplyError),
    #[error("action {action} wrote cell {cell}, which is outside its declared output region")]
    UndeclaredWrite { action: ActionId, cell: usize },
}

#[derive(Clone)]
struct Config {
    node: usize,
    current: PartialState,
    initial: PartialState,
    cycle: CycleDetector<(usize, PartialState)>,
    steps: usize,
}

/// Visits every case of running `p` from `start`; stops early when `visit`
/// breaks.
pub fn for_each_case<B>(
    p: &ThreadGraph,
    h: &MaurerMachine,
    start: PartialState,
    mut visit: impl FnMut(Case) -> ControlFlow<B>,
) -> Result<ControlFlow<B, CaseStats>, SplitError> {
    let steps = resolve(p, h)?;
    let layout = h.layout();
    let mut stats = CaseStats::default();
    let mut stack = vec![Config {
        node: p.entry(),
        cycle: CycleDetector::new((p.entry(), start.clone())),
        current: start.clone(),
        initial: start,
        steps: 0,
    }];
    'configs: while let Some(mut cfg) = stack.pop() {
        let result = loop {
            let next = match steps[cfg.node] {
                Step::Stop => break Some(cfg.current),
                Step::Dead => break None,
                Step::Tau { on_true } => on_true,
                Step::Act {
                    action,
                    interp,
                    on_true,
                    on_false,
                } => {
                    let op = &interp.operation;
                    let reply_read = (!op.declared_or().contains(&interp.reply_cell)).then_some(interp.reply_cell);
                    let unknown = op
                        .declared_ir()
                        .iter()
                        .copied()
                        .chain(reply_read)
                        .find(|&c| !cfg.current.is_known(c));
                    if let Some(c) = unknown {
                        // fork; values pushed in reverse so the smallest runs first
                        for v in layout.domain(c).values().collect::<Vec<_>>().into_iter().rev() {
                            let mut fork = cfg.clone();
                            fork.current.set(c, v);
                            fork.initial.set(c, v);
                            stack.push(fork);
                        }
                        continue 'configs;
                    }
                    let before = cfg.current.witness();
                    let after = op.evaluate(&before);
                    for (c, (&b, &a)) in before.values().iter().zip(after.values()).enumerate() {
                        if b != a && !op.declared_or().contains(&c) {
                            return Err(SplitError::UndeclaredWrite {
                                action: action.clone(),
                                cell: c,
                            });
                        }
                    }
                    for &c in op.declared_or() {
                        cfg.current.set(c, after.get(c));
                    }
                    branch(action, after.get(interp.reply_cell), on_true, on_false)?
                }
            };
            cfg.node = next;
            cfg.steps += 1;
            if cfg.cycle.repeats(&(cfg.node, cfg.current.clone())) {
                break None;
            }
        };
        stats.cases += 1;
        stats.longest = stats.longest.max(cfg.steps);
        if let ControlFlow::Break(b) = visit(Case {
            initial: cfg.initial,
            result,
            steps: cfg.steps,
        }) {
            return Ok(ControlFlow::Break(b));
        }
    }
    Ok(ControlFlow::Continue(stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apply::{apply, ApplyResult};
    use crate::dsl::parse_threads;
    use crate::machine::{Domain, Interpretation, Operation, Region, F, T};
    use crate::thread::solve;
    use std::sync::Arc;

    fn machine() -> MaurerMachine {
        // x, y: 2-bit words; rr reply
        let layout = Arc::new(
            MemoryLayout::new(vec![
                Region::new("x", 1, Domain::bits(2)),
                Region::new("y", 1, Domain::bits(2)),
                Region::new("rr", 1, Domain::Bool),
            ])
            .unwrap(),
        );
        let ops = [
            (
                "copy",
                Operation::from_fn("copy", [0], [1, 2], |s| {
                    s.set(1, s.get(0));
                    s.set(2, T);
                }),
            ),
            (
                "dec",
                Operation::from_fn("dec", [1], [1, 2], |s| {
                    let y = s.get(1);
                    s.set(1, y.saturating_sub(1));
                    s.set(2, if y > 1 { T } else { F });
                }),
            ),
            ("test", Operation::from_fn("test", [], [], |_| {})),
            ("sneaky", Operation::from_fn("sneaky", [], [2], |s| s.set(0, 3))),
        ];
        MaurerMachine::new(
            layout,
            ops.into_iter().map(|(n, op)| {
                (
                    ActionId::named(n),
                    Interpretation {
                        operation: op,
                        reply_cell: 2,
                    },
                )
            }),
        )
        .unwrap()
    }

    /// Every case agrees with a direct run from every total state it covers.
    fn check_against_exhaustive(src: &str) -> CaseStats {
        let h = machine();
        let g = solve(&parse_threads(src).unwrap()).unwrap();
        let l = h.layout();
        let mut covered = 0u64;
        let flow = for_each_case(&g, &h, PartialState::unknown(l), |case| {
            for s in l.states() {
                let agrees = case
                    .initial
                    .known_cells()
                    .all(|c| Some(s.get(c)) == case.initial.value(c));
                if !agrees {
                    continue;
                }
                covered += 1;
                let direct = apply(&g, &h, ApplyResult::Defined(s.clone())).unwrap();
                match (&case.result, direct) {
                    (None, ApplyResult::Undefined) => {}
                    (Some(r), ApplyResult::Defined(t)) => {
                        for c in 0..l.cell_count() {
                            match r.value(c) {
                                Some(v) => assert_eq!(v, t.get(c)),
                                None => assert_eq!(s.get(c), t.get(c)),
                            }
                        }
                    }
                    (r, d) => panic!("case {r:?} disagrees with {d:?}"),
                }
            }
            ControlFlow::<()>::Continue(())
        })
        .unwrap();
        let ControlFlow::Continue(stats) = flow else {
            unreachable!()
        };
        // the cases partition the state space
        assert_eq!(covered, l.state_count().unwrap() as u64);
        stats
    }

    #[test]
    fn cases_match_direct_runs() {
        let stats = check_against_exhaustive("X = copy ; Y\nY = dec ? Y : S");
        assert_eq!(stats.cases, 4);
        check_against_exhaustive("X = test ? S : D");
        check_against_exhaustive("X = dec ? X : Y\nY = test ? Y : S");
        check_against_exhaustive("X = tau ? Y : D\nY = test ? Y : S");
    }

    #[test]
    fn undeclared_writes_are_caught() {
        let h = machine();
        let g = solve(&parse_threads("X = sneaky ; S").unwrap()).unwrap();
        let err = for_each_case(&g, &h, PartialState::unknown(h.layout()), |_| {
            ControlFlow::<()>::Continue(())
        })
        .unwrap_err();
        assert!(matches!(err, SplitError::UndeclaredWrite { cell: 0, .. }));
    }

    #[test]
    fn early_exit() {
        let h = machine();
        let g = solve(&parse_threads("X = dec ? X : S").unwrap()).unwrap();
        let flow = for_each_case(&g, &h, PartialState::unknown(h.layout()), |c| {
            if c.initial.value(1) == Some(2) {
                ControlFlow::Break(c.steps)
            } else {
                ControlFlow::Continue(())
            }
        })
        .unwrap();
        assert_eq!(flow, ControlFlow::Break(2));
    }
}
