//! Strict load/store Maurer ISAs.
//!
//! The memory is split into data memory, an operating unit, load and store
//! data/address registers and the reply register `rr`. Only `load:n` and
//! `store:n` touch data memory; every other instruction (the set `A'`) must
//! read only the operating unit and load data registers and write only the
//! operating unit, store registers, load address registers and `rr`.
//!
//! Address maps are the identity on offsets: address `n` is `data[n]`,
//! register pair `n` is `ld[n]`/`la[n]` (or `sd[n]`/`sa[n]`).

mod file;

use std::collections::BTreeSet;
use std::ops::Range;
use std::sync::Arc;

use thiserror::Error;

use crate::machine::{
    input_region_capped, output_region_capped, regions_on_support, Domain, Interpretation, MachineError, MachineState,
    MaurerMachine, MemoryLayout, Operation, Region, RegionError, DEFAULT_STATE_CAP, T,
};
use crate::thread::ActionId;

pub use file::{parse_machine_file, write_machine_file, MachineFileError};

/// Largest supported address width; data memory has `2^k` cells.
pub const MAX_ADDRESS_WIDTH: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SlsParams {
    /// Address width in bits.
    pub k: u32,
    /// Word length in bits.
    pub l: u32,
    /// Operating unit size in bits.
    pub m: usize,
    /// Load register pairs.
    pub u: usize,
    /// Store register pairs.
    pub v: usize,
}

impl SlsParams {
    pub fn new(k: u32, l: u32, m: usize, u: usize, v: usize) -> Result<Self, SlsError> {
        let p = SlsParams { k, l, m, u, v };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SlsError> {
        if self.k > MAX_ADDRESS_WIDTH {
            return Err(SlsError::InvalidParams(format!(
                "k={} exceeds {MAX_ADDRESS_WIDTH}",
                self.k
            )));
        }
        if self.l == 0 || self.l > 32 {
            return Err(SlsError::InvalidParams(format!("l={} must be in 1..=32", self.l)));
        }
        if self.u == 0 || self.v == 0 {
            return Err(SlsError::InvalidParams("u and v must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of load and store instructions, `u + v`.
    pub fn w(&self) -> usize {
        self.u + self.v
    }

    /// Number of data cells, `2^k`.
    pub fn words(&self) -> usize {
        1 << self.k
    }

    /// Data memory size in bits, `2^k · l`.
    pub fn dms(&self) -> u64 {
        (1u64 << self.k) * u64::from(self.l)
    }

    /// External memory size, `dms / 2`; only defined for `k ≥ 1`.
    pub fn ems(&self) -> Option<u64> {
        (self.k >= 1).then(|| self.dms() / 2)
    }
}

/// Cell indices of the seven regions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlsLayout {
    pub layout: Arc<MemoryLayout>,
    pub data: Range<usize>,
    pub ou: Range<usize>,
    pub ld: Range<usize>,
    pub sd: Range<usize>,
    pub la: Range<usize>,
    pub sa: Range<usize>,
    pub rr: usize,
}

impl SlsLayout {
    pub fn new(p: &SlsParams) -> Result<Self, SlsError> {
        p.validate()?;
        let word = Domain::bits(p.l);
        let addr = Domain::Range {
            lo: 0,
            hi: (p.words() - 1) as u32,
        };
        let mut regions = vec![Region::new("data", p.words(), word)];
        if p.m > 0 {
            regions.push(Region::new("ou", p.m, Domain::bits(1)));
        }
        regions.extend([
            Region::new("ld", p.u, word),
            Region::new("sd", p.v, word),
            Region::new("la", p.u, addr),
            Region::new("sa", p.v, addr),
            Region::new("rr", 1, Domain::Bool),
        ]);
        let layout = MemoryLayout::new(regions).expect("fixed region names are valid");
        Ok(SlsLayout {
            data: layout.cells_of("data"),
            ou: layout.cells_of("ou"),
            ld: layout.cells_of("ld"),
            sd: layout.cells_of("sd"),
            la: layout.cells_of("la"),
            sa: layout.cells_of("sa"),
            rr: layout.cell("rr", 0).expect("rr exists"),
            layout: Arc::new(layout),
        })
    }

    /// `M_ou ∪ M_ld`.
    pub fn allowed_ir(&self) -> BTreeSet<usize> {
        self.ou.clone().chain(self.ld.clone()).collect()
    }

    /// `M_ou ∪ M_sd ∪ M_la ∪ M_sa ∪ {rr}`.
    pub fn allowed_or(&self) -> BTreeSet<usize> {
        self.ou
            .clone()
            .chain(self.sd.clone())
            .chain(self.la.clone())
            .chain(self.sa.clone())
            .chain([self.rr])
            .collect()
    }

    /// Everything outside data memory.
    pub fn non_data(&self) -> Range<usize> {
        self.data.end..self.layout.cell_count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SlsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("instruction name `{0}` clashes with a load, store or reserved name")]
    NameClash(String),
    #[error("operation {name}: {reason}")]
    DomainMismatch { name: String, reason: String },
    #[error(transparent)]
    Machine(#[from] MachineError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DataError {
    #[error("expected {expected} words, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("word {value} at address {address} does not fit in the word length")]
    ValueOutOfRange { address: usize, value: u64 },
}

/// A strict load/store Maurer ISA.
#[derive(Clone, Debug)]
pub struct SlsMachine {
    pub params: SlsParams,
    pub cells: SlsLayout,
    pub machine: MaurerMachine,
    /// The `A'` actions, in declaration order.
    pub data_manip: Vec<ActionId>,
}

impl SlsMachine {
    pub fn layout(&self) -> &MemoryLayout {
        self.machine.layout()
    }

    /// `d`: the number of instructions other than loads and stores.
    pub fn d(&self) -> usize {
        self.data_manip.len()
    }
}

pub fn load_action(n: usize) -> ActionId {
    ActionId::indexed("load", n as u32)
}

pub fn store_action(n: usize) -> ActionId {
    ActionId::indexed("store", n as u32)
}

fn load_op(c: &SlsLayout, n: usize) -> Operation {
    let (la, ld, data, rr) = (c.la.start + n, c.ld.start + n, c.data.start, c.rr);
    Operation::from_fn(format!("load:{n}"), c.data.clone().chain([la]), [ld, rr], move |s| {
        let v = s.get(data + s.get(la) as usize);
        s.set(ld, v);
        s.set(rr, T);
    })
}

fn store_op(c: &SlsLayout, n: usize) -> Operation {
    let (sa, sd, data, rr) = (c.sa.start + n, c.sd.start + n, c.data.start, c.rr);
    Operation::from_fn(
        format!("store:{n}"),
        c.data.clone().chain([sa, sd]),
        c.data.clone().chain([rr]),
        move |s| {
            let v = s.get(sd);
            s.set(data + s.get(sa) as usize, v);
            s.set(rr, T);
        },
    )
}

fn check_operation(layout: &MemoryLayout, name: &str, op: &Operation) -> Result<(), SlsError> {
    let mismatch = |reason: String| SlsError::DomainMismatch {
        name: name.to_string(),
        reason,
    };
    let n = layout.cell_count();
    if let Some(&c) = op.declared_ir().iter().chain(op.declared_or()).find(|&&c| c >= n) {
        return Err(mismatch(format!("cell index {c} is outside the memory")));
    }
    if let Some(table) = op.projection() {
        for (ins, outs) in table.rows() {
            for (&c, &v) in table.inputs().iter().zip(&ins).chain(table.outputs().iter().zip(outs)) {
                if !layout.domain(c).contains(v) {
                    return Err(mismatch(format!(
                        "value {v} is outside the domain of {}",
                        layout.cell_name(c)
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Builds the ISA with `load:0..u`, `store:0..v` and the given `A'`
/// instructions. Every reply cell is `rr`.
pub fn build_sls(params: SlsParams, data_manip: Vec<(String, Operation)>) -> Result<SlsMachine, SlsError> {
    let cells = SlsLayout::new(&params)?;
    let mut actions = Vec::new();
    for n in 0..params.u {
        actions.push((load_action(n), load_op(&cells, n)));
    }
    for n in 0..params.v {
        actions.push((store_action(n), store_op(&cells, n)));
    }
    let mut names = Vec::new();
    for (name, op) in data_manip {
        let id: ActionId = name.parse().map_err(|_| SlsError::NameClash(name.clone()))?;
        if id.is_tau() || id.name() == "load" || id.name() == "store" || names.contains(&id) {
            return Err(SlsError::NameClash(name));
        }
        check_operation(&cells.layout, &name, &op)?;
        names.push(id.clone());
        actions.push((id, op));
    }
    let rr = cells.rr;
    let machine = MaurerMachine::new(
        Arc::clone(&cells.layout),
        actions.into_iter().map(|(a, operation)| {
            (
                a,
                Interpretation {
                    operation,
                    reply_cell: rr,
                },
            )
        }),
    )?;
    Ok(SlsMachine {
        params,
        cells,
        machine,
        data_manip: names,
    })
}

/// Writes `words` into data memory of `base`.
pub fn write_data(cells: &SlsLayout, base: &mut MachineState, words: &[u64]) -> Result<(), DataError> {
    let expected = cells.data.len();
    if words.len() != expected {
        return Err(DataError::LengthMismatch {
            expected,
            actual: words.len(),
        });
    }
    for (address, &w) in words.iter().enumerate() {
        let cell = cells.data.start + address;
        let ok = u32::try_from(w).is_ok_and(|v| cells.layout.domain(cell).contains(v));
        if !ok {
            return Err(DataError::ValueOutOfRange { address, value: w });
        }
        base.set(cell, w as u32);
    }
    Ok(())
}

/// The state holding `words` in data memory and the minimum everywhere
/// else.
pub fn pack_data_state(cells: &SlsLayout, words: &[u64]) -> Result<MachineState, DataError> {
    let mut s = cells.layout.min_state();
    write_data(cells, &mut s, words)?;
    Ok(s)
}

/// `S ↾ M_data` as a list of words, address 0 first.
pub fn unpack_data_state(cells: &SlsLayout, state: &MachineState) -> Vec<u64> {
    cells.data.clone().map(|c| u64::from(state.get(c))).collect()
}

/// How the regions of an instruction were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionSource {
    /// Brute force over the full state space.
    Computed,
    /// Brute force over the table's own cells.
    Support,
    /// The operation's declared regions, taken on trust.
    Declared,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    /// `IR(O_a) ⊆ M_ou ∪ M_ld`.
    InputRegion,
    /// `OR(O_a) ⊆ M_ou ∪ M_sd ∪ M_la ∪ M_sa ∪ {rr}`.
    OutputRegion,
    /// The frame conditions of `load:n` and `store:n`.
    LoadStoreFrame,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrictnessViolation {
    pub action: ActionId,
    pub cell: String,
    pub constraint: Constraint,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionCheck {
    pub action: ActionId,
    pub source: RegionSource,
    pub ir: BTreeSet<usize>,
    pub or: BTreeSet<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StrictnessReport {
    pub regions: Vec<RegionCheck>,
    /// Number of states the load/store frame check ran over; `None` when
    /// the state space exceeded the cap and the built-in definitions were
    /// trusted.
    pub frame_states: Option<u128>,
    pub violations: Vec<StrictnessViolation>,
}

impl StrictnessReport {
    pub fn is_strict(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_strictness(m: &SlsMachine) -> StrictnessReport {
    validate_strictness_capped(m, DEFAULT_STATE_CAP)
}

pub fn validate_strictness_capped(m: &SlsMachine, cap: u128) -> StrictnessReport {
    let layout = m.layout();
    let allowed_ir = m.cells.allowed_ir();
    let allowed_or = m.cells.allowed_or();
    let mut report = StrictnessReport::default();
    for a in &m.data_manip {
        let op = &m.machine.interpretation(a).expect("A' action is interpreted").operation;
        let (ir, or, source) = match (
            input_region_capped(op, layout, cap),
            output_region_capped(op, layout, cap),
        ) {
            (Ok(ir), Ok(or)) => (ir, or, RegionSource::Computed),
            _ => match op.projection() {
                Some(t) => {
                    let support: Vec<usize> = t
                        .inputs()
                        .iter()
                        .chain(t.outputs())
                        .copied()
                        .collect::<BTreeSet<_>>()
                        .into_iter()
                        .collect();
                    let (ir, or) = regions_on_support(op, layout, &support);
                    (ir, or, RegionSource::Support)
                }
                None => (
                    op.declared_ir().clone(),
                    op.declared_or().clone(),
                    RegionSource::Declared,
                ),
            },
        };
        for &c in ir.difference(&allowed_ir) {
            report.violations.push(StrictnessViolation {
                action: a.clone(),
                cell: layout.cell_name(c),
                constraint: Constraint::InputRegion,
                detail: format!("{} reads {}", a, layout.cell_name(c)),
            });
        }
        for &c in or.difference(&allowed_or) {
            report.violations.push(StrictnessViolation {
                action: a.clone(),
                cell: layout.cell_name(c),
                constraint: Constraint::OutputRegion,
                detail: format!("{} writes {}", a, layout.cell_name(c)),
            });
        }
        report.regions.push(RegionCheck {
            action: a.clone(),
            source,
            ir,
            or,
        });
    }
    if let Ok(frames) = check_load_store_frames(m, cap) {
        report.frame_states = Some(frames.states);
        report.violations.extend(frames.violations);
    }
    report
}

/// Result of checking the load/store frame conditions on every state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameReport {
    pub states: u128,
    pub checks: u128,
    pub violations: Vec<StrictnessViolation>,
}

/// Checks on every state that `load:n` sets `ld[n] := data[la[n]]`,
/// `store:n` sets `data[sa[n]] := sd[n]`, both set `rr := T` and nothing
/// else changes.
pub fn check_load_store_frames(m: &SlsMachine, cap: u128) -> Result<FrameReport, RegionError> {
    let layout = m.layout();
    let states = match layout.state_count() {
        Some(n) if n <= cap => n,
        states => return Err(RegionError::StateSpaceTooLarge { states, cap }),
    };
    let c = &m.cells;
    let mut report = FrameReport {
        states,
        checks: 0,
        violations: Vec::new(),
    };
    let mut fail = |action: &ActionId, cell: usize, detail: String| {
        report.violations.push(StrictnessViolation {
            action: action.clone(),
            cell: layout.cell_name(cell),
            constraint: Constraint::LoadStoreFrame,
            detail,
        });
    };
    let mut checks = 0u128;
    for s in layout.states() {
        let expectations = (0..m.params.u)
            .map(|n| {
                let target = c.ld.start + n;
                let value = s.get(c.data.start + s.get(c.la.start + n) as usize);
                (load_action(n), target, value)
            })
            .chain((0..m.params.v).map(|n| {
                let target = c.data.start + s.get(c.sa.start + n) as usize;
                (store_action(n), target, s.get(c.sd.start + n))
            }));
        for (a, target, value) in expectations {
            checks += 1;
            let after = m.machine.interpretation(&a).expect("built in").operation.evaluate(&s);
            if after.get(c.rr) != T {
                fail(
                    &a,
                    c.rr,
                    format!(
                        "{a} left rr={} from {}",
                        layout.domain(c.rr).format(after.get(c.rr)),
                        layout.format_state(&s)
                    ),
                );
            }
            if after.get(target) != value {
                fail(
                    &a,
                    target,
                    format!("{a} wrote the wrong value from {}", layout.format_state(&s)),
                );
            }
            for cell in (0..layout.cell_count()).filter(|&x| x != target && x != c.rr) {
                if after.get(cell) != s.get(cell) {
                    fail(
                        &a,
                        cell,
                        format!("{a} changed a cell outside its frame from {}", layout.format_state(&s)),
                    );
                }
            }
        }
    }
    report.checks = checks;
    Ok(report)
}
