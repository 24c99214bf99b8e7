//! Maurer machines over finite, product-form memories.
//!
//! A [`MemoryLayout`] fixes the memory `M` as a list of named regions, each
//! with its own value domain; a [`MachineState`] assigns a value to every
//! element. Because the state space is the full product of the per-cell
//! domains, patching two states together always yields a state and any two
//! states differ in finitely many cells. Only the reply-cell condition needs
//! checking (see [`validate_machine`]).

mod regions;
mod table;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::thread::ActionId;

pub use regions::{
    input_region, input_region_capped, output_region, output_region_capped, regions_on_support, RegionError,
    DEFAULT_STATE_CAP,
};
pub use table::{tabulate_operation, ProjectionTable, TableError, TabulateError};

/// Encoding of the reply `T` in a boolean cell.
pub const T: u32 = 1;
/// Encoding of the reply `F` in a boolean cell.
pub const F: u32 = 0;

/// Value domain of one region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    /// `{T, F}`, encoded as [`T`] and [`F`].
    Bool,
    /// The integer interval `[lo, hi]`.
    Range { lo: u32, hi: u32 },
}

impl Domain {
    pub fn bits(width: u32) -> Domain {
        assert!(width <= 32, "at most 32-bit cells are supported");
        let hi = if width == 32 { u32::MAX } else { (1u32 << width) - 1 };
        Domain::Range { lo: 0, hi }
    }

    pub fn min(&self) -> u32 {
        match self {
            Domain::Bool => F,
            Domain::Range { lo, .. } => *lo,
        }
    }

    pub fn max(&self) -> u32 {
        match self {
            Domain::Bool => T,
            Domain::Range { hi, .. } => *hi,
        }
    }

    pub fn size(&self) -> u64 {
        u64::from(self.max() - self.min()) + 1
    }

    pub fn contains(&self, v: u32) -> bool {
        self.min() <= v && v <= self.max()
    }

    pub fn values(&self) -> impl Iterator<Item = u32> {
        self.min()..=self.max()
    }

    /// `T`/`F` for booleans, binary digits padded to the width of the
    /// largest value otherwise.
    pub fn format(&self, v: u32) -> String {
        match self {
            Domain::Bool => if v == T { "T" } else { "F" }.to_string(),
            Domain::Range { hi, .. } => {
                let width = (32 - hi.leading_zeros()).max(1) as usize;
                format!("{v:0width$b}")
            }
        }
    }

    pub fn parse(&self, text: &str) -> Option<u32> {
        let v = match self {
            Domain::Bool => match text {
                "T" => T,
                "F" => F,
                _ => return None,
            },
            Domain::Range { .. } => {
                if text.is_empty() || !text.bytes().all(|b| b == b'0' || b == b'1') {
                    return None;
                }
                u32::from_str_radix(text, 2).ok()?
            }
        };
        self.contains(v).then_some(v)
    }
}

/// A memory element, addressed as `(region, offset)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MemoryElementId {
    pub region: String,
    pub offset: usize,
}

impl MemoryElementId {
    pub fn new(region: impl Into<String>, offset: usize) -> Self {
        MemoryElementId {
            region: region.into(),
            offset,
        }
    }
}

impl fmt::Display for MemoryElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.region, self.offset)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub name: String,
    pub count: usize,
    pub domain: Domain,
}

impl Region {
    pub fn new(name: impl Into<String>, count: usize, domain: Domain) -> Self {
        Region {
            name: name.into(),
            count,
            domain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("region name `{0}` must be an identifier not ending in a digit")]
    BadName(String),
    #[error("region `{0}` is declared twice")]
    DuplicateRegion(String),
    #[error("region `{0}` has no elements")]
    EmptyRegion(String),
    #[error("region `{0}` has an empty value domain")]
    EmptyDomain(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("state has {actual} cells, layout has {expected}")]
    WrongSize { expected: usize, actual: usize },
    #[error("value {value} of cell {cell} is outside its domain")]
    OutOfDomain { cell: String, value: u32 },
    #[error("unknown cell `{0}`")]
    UnknownCell(String),
    #[error("malformed assignment `{0}`")]
    Malformed(String),
    #[error("cell `{0}` is assigned twice")]
    Repeated(String),
}

/// The memory `M` of a machine with per-region value domains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoryLayout {
    regions: Vec<Region>,
    bases: Vec<usize>,
    domains: Vec<Domain>,
}

impl MemoryLayout {
    pub fn new(regions: Vec<Region>) -> Result<Self, LayoutError> {
        let mut bases = Vec::with_capacity(regions.len());
        let mut domains = Vec::new();
        for (i, r) in regions.iter().enumerate() {
            let valid = r
                .name
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && r.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                && !r.name.ends_with(|c: char| c.is_ascii_digit());
            if !valid {
                return Err(LayoutError::BadName(r.name.clone()));
            }
            if regions[..i].iter().any(|o| o.name == r.name) {
                return Err(LayoutError::DuplicateRegion(r.name.clone()));
            }
            if r.count == 0 {
                return Err(LayoutError::EmptyRegion(r.name.clone()));
            }
            if let Domain::Range { lo, hi } = r.domain {
                if lo > hi {
                    return Err(LayoutError::EmptyDomain(r.name.clone()));
                }
            }
            bases.push(domains.len());
            domains.extend(std::iter::repeat_n(r.domain, r.count));
        }
        Ok(MemoryLayout {
            regions,
            bases,
            domains,
        })
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn cell_count(&self) -> usize {
        self.domains.len()
    }

    pub fn domain(&self, cell: usize) -> Domain {
        self.domains[cell]
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    /// Flat index of `region[offset]`.
    pub fn cell(&self, region: &str, offset: usize) -> Option<usize> {
        let i = self.regions.iter().position(|r| r.name == region)?;
        (offset < self.regions[i].count).then(|| self.bases[i] + offset)
    }

    pub fn index_of(&self, id: &MemoryElementId) -> Option<usize> {
        self.cell(&id.region, id.offset)
    }

    pub fn cells_of(&self, region: &str) -> std::ops::Range<usize> {
        match self.regions.iter().position(|r| r.name == region) {
            Some(i) => self.bases[i]..self.bases[i] + self.regions[i].count,
            None => 0..0,
        }
    }

    pub fn element(&self, cell: usize) -> MemoryElementId {
        let i = self.bases.partition_point(|&b| b <= cell) - 1;
        MemoryElementId::new(self.regions[i].name.clone(), cell - self.bases[i])
    }

    /// Textual cell name: `data3`, or the bare region name for
    /// single-element regions such as `rr`.
    pub fn cell_name(&self, cell: usize) -> String {
        let i = self.bases.partition_point(|&b| b <= cell) - 1;
        let r = &self.regions[i];
        if r.count == 1 {
            r.name.clone()
        } else {
            format!("{}{}", r.name, cell - self.bases[i])
        }
    }

    /// Inverse of [`cell_name`](Self::cell_name); also accepts `rr0` style
    /// names for single-element regions.
    pub fn find_cell(&self, name: &str) -> Option<usize> {
        let split = name.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (region, digits) = name.split_at(split);
        let offset = if digits.is_empty() {
            let i = self.regions.iter().position(|r| r.name == region)?;
            if self.regions[i].count != 1 {
                return None;
            }
            0
        } else {
            if digits.len() > 1 && digits.starts_with('0') {
                return None;
            }
            digits.parse().ok()?
        };
        self.cell(region, offset)
    }

    /// Size of the state space, or `None` if it exceeds `u128`.
    pub fn state_count(&self) -> Option<u128> {
        self.domains
            .iter()
            .try_fold(1u128, |acc, d| acc.checked_mul(u128::from(d.size())))
    }

    /// The state with every cell at the minimum of its domain.
    pub fn min_state(&self) -> MachineState {
        MachineState {
            values: self.domains.iter().map(Domain::min).collect(),
        }
    }

    /// Every state, in odometer order with the first cell varying fastest.
    pub fn states(&self) -> StateIter<'_> {
        StateIter {
            domains: &self.domains,
            next: Some(self.min_state()),
        }
    }

    pub fn check_state(&self, state: &MachineState) -> Result<(), StateError> {
        if state.values.len() != self.domains.len() {
            return Err(StateError::WrongSize {
                expected: self.domains.len(),
                actual: state.values.len(),
            });
        }
        for (i, (&v, d)) in state.values.iter().zip(&self.domains).enumerate() {
            if !d.contains(v) {
                return Err(StateError::OutOfDomain {
                    cell: self.cell_name(i),
                    value: v,
                });
            }
        }
        Ok(())
    }

    pub fn state(&self, values: Vec<u32>) -> Result<MachineState, StateError> {
        let s = MachineState { values };
        self.check_state(&s)?;
        Ok(s)
    }

    pub fn format_cells(&self, state: &MachineState, cells: impl IntoIterator<Item = usize>) -> String {
        cells
            .into_iter()
            .map(|c| format!("{}={}", self.cell_name(c), self.domains[c].format(state.values[c])))
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn format_state(&self, state: &MachineState) -> String {
        self.format_cells(state, 0..self.cell_count())
    }

    /// Parses `cell=value` pairs separated by commas into `(cell, value)`
    /// assignments.
    pub fn parse_assignments(&self, text: &str) -> Result<Vec<(usize, u32)>, StateError> {
        let mut out: Vec<(usize, u32)> = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| StateError::Malformed(part.to_string()))?;
            let (name, value) = (name.trim(), value.trim());
            let cell = self
                .find_cell(name)
                .ok_or_else(|| StateError::UnknownCell(name.to_string()))?;
            let v = self.domains[cell]
                .parse(value)
                .ok_or_else(|| StateError::Malformed(part.to_string()))?;
            if out.iter().any(|&(c, _)| c == cell) {
                return Err(StateError::Repeated(name.to_string()));
            }
            out.push((cell, v));
        }
        Ok(out)
    }

    /// A state literal such as `data0=1, data1=0, rr=T`; unlisted cells take
    /// the minimum of their domain.
    pub fn parse_state(&self, text: &str) -> Result<MachineState, StateError> {
        let mut s = self.min_state();
        for (cell, v) in self.parse_assignments(text)? {
            s.values[cell] = v;
        }
        Ok(s)
    }
}

pub struct StateIter<'a> {
    domains: &'a [Domain],
    next: Option<MachineState>,
}

impl Iterator for StateIter<'_> {
    type Item = MachineState;

    fn next(&mut self) -> Option<MachineState> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carried = true;
        for (v, d) in succ.values.iter_mut().zip(self.domains) {
            if *v < d.max() {
                *v += 1;
                carried = false;
                break;
            }
            *v = d.min();
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(current)
    }
}

/// A total assignment of values to memory elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MachineState {
    values: Vec<u32>,
}

impl MachineState {
    pub fn get(&self, cell: usize) -> u32 {
        self.values[cell]
    }

    pub fn set(&mut self, cell: usize, value: u32) {
        self.values[cell] = value;
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub(crate) fn from_raw(values: Vec<u32>) -> Self {
        MachineState { values }
    }
}

type Evaluator = dyn Fn(&mut MachineState) + Send + Sync;

/// An operation `O: S → S` together with the input and output regions it
/// claims. Claims are checked by the brute-force region computations, not
/// trusted.
#[derive(Clone)]
pub struct Operation {
    name: String,
    eval: Arc<Evaluator>,
    declared_ir: BTreeSet<usize>,
    declared_or: BTreeSet<usize>,
    projection: Option<Arc<ProjectionTable>>,
}

impl fmt::Debug for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operation")
            .field("name", &self.name)
            .field("declared_ir", &self.declared_ir)
            .field("declared_or", &self.declared_or)
            .finish_non_exhaustive()
    }
}

impl Operation {
    /// An operation that updates a state in place.
    pub fn from_fn(
        name: impl Into<String>,
        declared_ir: impl IntoIterator<Item = usize>,
        declared_or: impl IntoIterator<Item = usize>,
        f: impl Fn(&mut MachineState) + Send + Sync + 'static,
    ) -> Self {
        Operation {
            name: name.into(),
            eval: Arc::new(f),
            declared_ir: declared_ir.into_iter().collect(),
            declared_or: declared_or.into_iter().collect(),
            projection: None,
        }
    }

    pub fn identity(name: impl Into<String>) -> Self {
        Self::from_fn(name, [], [], |_| {})
    }

    /// An operation defined by a table over its input and output cells; all
    /// other cells are left unchanged.
    pub fn from_projection(name: impl Into<String>, table: ProjectionTable) -> Self {
        let table = Arc::new(table);
        let lookup = Arc::clone(&table);
        Operation {
            name: name.into(),
            declared_ir: table.inputs().iter().copied().collect(),
            declared_or: table.outputs().iter().copied().collect(),
            eval: Arc::new(move |s: &mut MachineState| lookup.apply(s)),
            projection: Some(table),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn declared_ir(&self) -> &BTreeSet<usize> {
        &self.declared_ir
    }

    pub fn declared_or(&self) -> &BTreeSet<usize> {
        &self.declared_or
    }

    pub fn projection(&self) -> Option<&ProjectionTable> {
        self.projection.as_deref()
    }

    pub fn evaluate(&self, state: &MachineState) -> MachineState {
        let mut next = state.clone();
        (self.eval)(&mut next);
        next
    }

    pub fn apply_in_place(&self, state: &mut MachineState) {
        (self.eval)(state)
    }

    pub(crate) fn with_declared(mut self, ir: BTreeSet<usize>, or: BTreeSet<usize>) -> Self {
        self.declared_ir = ir;
        self.declared_or = or;
        self
    }
}

/// `⟦a⟧ = (O_a, m_a)`.
#[derive(Clone, Debug)]
pub struct Interpretation {
    pub operation: Operation,
    pub reply_cell: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("`tau` cannot be a basic action of a machine")]
    TauAction,
    #[error("action {action} has reply cell {cell} outside the memory")]
    BadReplyCell { action: ActionId, cell: usize },
    #[error("action {0} is interpreted twice")]
    DuplicateAction(ActionId),
}

/// A Maurer machine `(M, B, S, O, A, ⟦_⟧)` with product-form states.
#[derive(Clone, Debug)]
pub struct MaurerMachine {
    layout: Arc<MemoryLayout>,
    actions: IndexMap<ActionId, Interpretation>,
}

impl MaurerMachine {
    pub fn new(
        layout: Arc<MemoryLayout>,
        actions: impl IntoIterator<Item = (ActionId, Interpretation)>,
    ) -> Result<Self, MachineError> {
        let mut map = IndexMap::new();
        for (a, interp) in actions {
            if a.is_tau() {
                return Err(MachineError::TauAction);
            }
            if interp.reply_cell >= layout.cell_count() {
                return Err(MachineError::BadReplyCell {
                    action: a,
                    cell: interp.reply_cell,
                });
            }
            if map.contains_key(&a) {
                return Err(MachineError::DuplicateAction(a));
            }
            map.insert(a, interp);
        }
        Ok(MaurerMachine { layout, actions: map })
    }

    pub fn layout(&self) -> &MemoryLayout {
        &self.layout
    }

    pub fn shared_layout(&self) -> Arc<MemoryLayout> {
        Arc::clone(&self.layout)
    }

    pub fn actions(&self) -> &IndexMap<ActionId, Interpretation> {
        &self.actions
    }

    pub fn interpretation(&self, a: &ActionId) -> Option<&Interpretation> {
        self.actions.get(a)
    }
}

/// The three closure conditions a Maurer machine must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// Patching two states along any subset of `M` yields a state.
    PatchClosure,
    /// Any two states differ at finitely many elements.
    FiniteDifference,
    /// Every reply cell holds `T` or `F` in every state.
    BooleanReply,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    SatisfiedByConstruction,
    Satisfied,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub condition: Condition,
    pub action: Option<ActionId>,
    pub status: Status,
    pub message: String,
}

pub fn validate_machine(m: &MaurerMachine) -> Vec<Diagnostic> {
    let mut out = vec![
        Diagnostic {
            condition: Condition::PatchClosure,
            action: None,
            status: Status::SatisfiedByConstruction,
            message: "states are the full product of per-cell domains".into(),
        },
        Diagnostic {
            condition: Condition::FiniteDifference,
            action: None,
            status: Status::SatisfiedByConstruction,
            message: "memory is finite".into(),
        },
    ];
    let mut any_violation = false;
    for (a, interp) in &m.actions {
        if m.layout.domain(interp.reply_cell) != Domain::Bool {
            any_violation = true;
            out.push(Diagnostic {
                condition: Condition::BooleanReply,
                action: Some(a.clone()),
                status: Status::Violated,
                message: format!(
                    "reply cell {} of {a} does not have domain {{T,F}}",
                    m.layout.cell_name(interp.reply_cell)
                ),
            });
        }
    }
    if !any_violation {
        out.push(Diagnostic {
            condition: Condition::BooleanReply,
            action: None,
            status: Status::Satisfied,
            message: format!("all {} reply cells have domain {{T,F}}", m.actions.len()),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny_layout() -> MemoryLayout {
        MemoryLayout::new(vec![
            Region::new("c", 2, Domain::bits(1)),
            Region::new("w", 1, Domain::Range { lo: 0, hi: 3 }),
            Region::new("rr", 1, Domain::Bool),
        ])
        .unwrap()
    }

    #[test]
    fn layout_addressing() {
        let l = tiny_layout();
        assert_eq!(l.cell_count(), 4);
        assert_eq!(l.cell("w", 0), Some(2));
        assert_eq!(l.cell("c", 2), None);
        assert_eq!(l.element(1), MemoryElementId::new("c", 1));
        assert_eq!(l.cell_name(3), "rr");
        assert_eq!(l.cell_name(1), "c1");
        assert_eq!(l.find_cell("rr"), Some(3));
        assert_eq!(l.find_cell("rr0"), Some(3));
        assert_eq!(l.find_cell("c"), None);
        assert_eq!(l.find_cell("c01"), None);
        assert_eq!(l.state_count(), Some(2 * 2 * 4 * 2));
        assert_eq!(l.states().count(), 32);
    }

    #[test]
    fn layout_validation() {
        assert!(matches!(
            MemoryLayout::new(vec![Region::new("x1", 1, Domain::Bool)]),
            Err(LayoutError::BadName(_))
        ));
        assert!(matches!(
            MemoryLayout::new(vec![
                Region::new("x", 1, Domain::Bool),
                Region::new("x", 2, Domain::Bool)
            ]),
            Err(LayoutError::DuplicateRegion(_))
        ));
        assert!(matches!(
            MemoryLayout::new(vec![Region::new("x", 0, Domain::Bool)]),
            Err(LayoutError::EmptyRegion(_))
        ));
        assert!(matches!(
            MemoryLayout::new(vec![Region::new("x", 1, Domain::Range { lo: 2, hi: 1 })]),
            Err(LayoutError::EmptyDomain(_))
        ));
    }

    #[test]
    fn state_literals() {
        let l = tiny_layout();
        let s = l.parse_state("c1=1, w=11, rr=T").unwrap();
        assert_eq!(s.values(), &[0, 1, 3, T]);
        assert_eq!(l.format_state(&s), "c0=0, c1=1, w=11, rr=T");
        assert_eq!(l.parse_state(&l.format_state(&s)).unwrap(), s);
        assert_eq!(l.parse_state("").unwrap(), l.min_state());
        assert!(matches!(l.parse_state("q=1"), Err(StateError::UnknownCell(_))));
        assert!(matches!(l.parse_state("c0=2"), Err(StateError::Malformed(_))));
        assert!(matches!(l.parse_state("rr=1"), Err(StateError::Malformed(_))));
        assert!(matches!(l.parse_state("c0=1,c0=0"), Err(StateError::Repeated(_))));
        assert!(matches!(l.state(vec![0, 0, 4, 0]), Err(StateError::OutOfDomain { .. })));
    }

    fn machine_with_reply(domain: Domain) -> MaurerMachine {
        let layout = Arc::new(
            MemoryLayout::new(vec![Region::new("c", 1, Domain::bits(1)), Region::new("rr", 1, domain)]).unwrap(),
        );
        let op = Operation::from_fn("set", [], [1], |s| s.set(1, T));
        MaurerMachine::new(
            layout,
            [(
                ActionId::named("set"),
                Interpretation {
                    operation: op,
                    reply_cell: 1,
                },
            )],
        )
        .unwrap()
    }

    #[test]
    fn validation_reports_conditions() {
        let ok = validate_machine(&machine_with_reply(Domain::Bool));
        assert!(ok.iter().all(|d| d.status != Status::Violated));
        assert_eq!(ok.len(), 3);

        let bad = validate_machine(&machine_with_reply(Domain::Range { lo: 0, hi: 3 }));
        let v: Vec<_> = bad.iter().filter(|d| d.status == Status::Violated).collect();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].condition, Condition::BooleanReply);
        assert_eq!(v[0].action, Some(ActionId::named("set")));

        let empty = MaurerMachine::new(Arc::new(tiny_layout()), []).unwrap();
        assert!(validate_machine(&empty).iter().all(|d| d.status != Status::Violated));
    }

    #[test]
    fn machine_rejects_tau_and_bad_reply() {
        let layout = Arc::new(tiny_layout());
        let interp = Interpretation {
            operation: Operation::identity("id"),
            reply_cell: 3,
        };
        assert_eq!(
            MaurerMachine::new(layout.clone(), [(ActionId::tau(), interp.clone())]).unwrap_err(),
            MachineError::TauAction
        );
        let far = Interpretation {
            reply_cell: 9,
            ..interp
        };
        assert!(matches!(
            MaurerMachine::new(layout, [(ActionId::named("x"), far)]),
            Err(MachineError::BadReplyCell { .. })
        ));
    }
}
