//! Input and output regions by exhaustive enumeration.
//!
//! `OR(O)` is the set of cells some state changes; `IR(O)` is the set of
//! cells whose value, varied alone, changes the result somewhere in `OR(O)`.
//! Both quantify over the whole state space, so they are only computed when
//! the space is below a cap.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{MachineState, MemoryLayout, Operation};

pub const DEFAULT_STATE_CAP: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("state space of {} states exceeds the cap of {cap}", states.map_or("more than 2^128".to_string(), |n| n.to_string()))]
    StateSpaceTooLarge { states: Option<u128>, cap: u128 },
}

fn guard(layout: &MemoryLayout, cap: u128) -> Result<(), RegionError> {
    match layout.state_count() {
        Some(n) if n <= cap => Ok(()),
        states => Err(RegionError::StateSpaceTooLarge { states, cap }),
    }
}

/// States agreeing with `base` outside `cells`, every combination of values
/// on `cells`.
fn subspace<'a>(
    layout: &'a MemoryLayout,
    base: MachineState,
    cells: &'a [usize],
) -> impl Iterator<Item = MachineState> + 'a {
    let mut next = Some(base);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        for &c in cells {
            let d = layout.domain(c);
            if succ.get(c) < d.max() {
                succ.set(c, succ.get(c) + 1);
                next = Some(succ);
                return Some(current);
            }
            succ.set(c, d.min());
        }
        Some(current)
    })
}

fn or_over(op: &Operation, states: impl Iterator<Item = MachineState>, n: usize) -> BTreeSet<usize> {
    let mut or = BTreeSet::new();
    for s in states {
        let t = op.evaluate(&s);
        or.extend((0..n).filter(|&c| s.get(c) != t.get(c)));
        if or.len() == n {
            break;
        }
    }
    or
}

fn ir_over(
    op: &Operation,
    layout: &MemoryLayout,
    states: impl Iterator<Item = MachineState>,
    candidates: &[usize],
    or: &BTreeSet<usize>,
) -> BTreeSet<usize> {
    let mut ir = BTreeSet::new();
    if or.is_empty() {
        return ir;
    }
    for s1 in states {
        let r1 = op.evaluate(&s1);
        for &x in candidates {
            if ir.contains(&x) {
                continue;
            }
            let d = layout.domain(x);
            for v in s1.get(x) + 1..=d.max() {
                let mut s2 = s1.clone();
                s2.set(x, v);
                let r2 = op.evaluate(&s2);
                if or.iter().any(|&y| r1.get(y) != r2.get(y)) {
                    ir.insert(x);
                    break;
                }
            }
        }
        if ir.len() == candidates.len() {
            break;
        }
    }
    ir
}

pub fn output_region(op: &Operation, layout: &MemoryLayout) -> Result<BTreeSet<usize>, RegionError> {
    output_region_capped(op, layout, DEFAULT_STATE_CAP)
}

pub fn output_region_capped(op: &Operation, layout: &MemoryLayout, cap: u128) -> Result<BTreeSet<usize>, RegionError> {
    guard(layout, cap)?;
    Ok(or_over(op, layout.states(), layout.cell_count()))
}

pub fn input_region(op: &Operation, layout: &MemoryLayout) -> Result<BTreeSet<usize>, RegionError> {
    input_region_capped(op, layout, DEFAULT_STATE_CAP)
}

pub fn input_region_capped(op: &Operation, layout: &MemoryLayout, cap: u128) -> Result<BTreeSet<usize>, RegionError> {
    let or = output_region_capped(op, layout, cap)?;
    let all: Vec<usize> = (0..layout.cell_count()).collect();
    Ok(ir_over(op, layout, layout.states(), &all, &or))
}

/// `(IR, OR)` computed on the subspace where only `support` varies and
/// every other cell sits at its domain minimum.
///
/// This equals the full-space answer whenever the operation reads only
/// `support` and writes only `support`, which holds by construction for
/// table operations with `support` = inputs ∪ outputs.
pub fn regions_on_support(
    op: &Operation,
    layout: &MemoryLayout,
    support: &[usize],
) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let base = layout.min_state();
    let or = or_over(op, subspace(layout, base.clone(), support), layout.cell_count());
    let ir = ir_over(op, layout, subspace(layout, base, support), support, &or);
    (ir, or)
}
