use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use super::regions::{input_region_capped, output_region_capped, RegionError, DEFAULT_STATE_CAP};
use super::{Domain, MachineState, MemoryLayout, Operation, StateError};

/// Largest number of rows a projection table may have.
pub const MAX_TABLE_ROWS: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("cell index {0} is outside the memory")]
    CellOutOfRange(usize),
    #[error("cell {0} appears twice in a table header")]
    RepeatedCell(String),
    #[error("row has {actual} values where {expected} are required")]
    Arity { expected: usize, actual: usize },
    #[error("value {value} is outside the domain of {cell}")]
    OutOfDomain { cell: String, value: u32 },
    #[error("no entry for inputs {0}")]
    MissingEntry(String),
    #[error("inputs {0} are listed twice")]
    DuplicateEntry(String),
    #[error("table would need {0} rows")]
    TooLarge(u128),
}

/// An operation given extensionally on a few cells: each assignment of the
/// input cells determines the values of the output cells; all other cells
/// are unchanged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionTable {
    inputs: Vec<usize>,
    input_domains: Vec<Domain>,
    outputs: Vec<usize>,
    values: Vec<u32>,
}

fn check_cells(layout: &MemoryLayout, cells: &[usize]) -> Result<(), TableError> {
    for (i, &c) in cells.iter().enumerate() {
        if c >= layout.cell_count() {
            return Err(TableError::CellOutOfRange(c));
        }
        if cells[..i].contains(&c) {
            return Err(TableError::RepeatedCell(layout.cell_name(c)));
        }
    }
    Ok(())
}

fn row_count(layout: &MemoryLayout, inputs: &[usize]) -> Result<usize, TableError> {
    let n = inputs
        .iter()
        .try_fold(1u128, |acc, &c| acc.checked_mul(u128::from(layout.domain(c).size())))
        .unwrap_or(u128::MAX);
    if n > MAX_TABLE_ROWS as u128 {
        return Err(TableError::TooLarge(n));
    }
    Ok(n as usize)
}

impl ProjectionTable {
    /// Builds a table by evaluating `f` on every assignment of `inputs`.
    pub fn build(
        layout: &MemoryLayout,
        inputs: Vec<usize>,
        outputs: Vec<usize>,
        f: impl Fn(&[u32]) -> Vec<u32>,
    ) -> Result<Self, TableError> {
        check_cells(layout, &inputs)?;
        check_cells(layout, &outputs)?;
        let rows = row_count(layout, &inputs)?;
        let input_domains: Vec<Domain> = inputs.iter().map(|&c| layout.domain(c)).collect();
        let mut values = Vec::with_capacity(rows * outputs.len());
        let mut assignment: Vec<u32> = input_domains.iter().map(Domain::min).collect();
        for _ in 0..rows {
            let out = f(&assignment);
            push_row(layout, &outputs, &out, &mut values)?;
            for (v, d) in assignment.iter_mut().zip(&input_domains) {
                if *v < d.max() {
                    *v += 1;
                    break;
                }
                *v = d.min();
            }
        }
        Ok(ProjectionTable {
            inputs,
            input_domains,
            outputs,
            values,
        })
    }

    /// Builds a table from explicit rows, which must cover every assignment
    /// of `inputs` exactly once.
    pub fn from_rows(
        layout: &MemoryLayout,
        inputs: Vec<usize>,
        outputs: Vec<usize>,
        rows: impl IntoIterator<Item = (Vec<u32>, Vec<u32>)>,
    ) -> Result<Self, TableError> {
        check_cells(layout, &inputs)?;
        check_cells(layout, &outputs)?;
        let count = row_count(layout, &inputs)?;
        let input_domains: Vec<Domain> = inputs.iter().map(|&c| layout.domain(c)).collect();
        let mut slots: Vec<Option<Vec<u32>>> = vec![None; count];
        let shell = ProjectionTable {
            inputs,
            input_domains,
            outputs,
            values: Vec::new(),
        };
        for (ins, outs) in rows {
            if ins.len() != shell.inputs.len() {
                return Err(TableError::Arity {
                    expected: shell.inputs.len(),
                    actual: ins.len(),
                });
            }
            for (&c, &v) in shell.inputs.iter().zip(&ins) {
                if !layout.domain(c).contains(v) {
                    return Err(TableError::OutOfDomain {
                        cell: layout.cell_name(c),
                        value: v,
                    });
                }
            }
            let r = shell.rank_of(&ins);
            if slots[r].is_some() {
                return Err(TableError::DuplicateEntry(describe(layout, &shell.inputs, &ins)));
            }
            let mut checked = Vec::new();
            push_row(layout, &shell.outputs, &outs, &mut checked)?;
            slots[r] = Some(checked);
        }
        let mut values = Vec::with_capacity(count * shell.outputs.len());
        for (r, slot) in slots.into_iter().enumerate() {
            match slot {
                Some(v) => values.extend(v),
                None => {
                    let ins = shell.assignment_of(r);
                    return Err(TableError::MissingEntry(describe(layout, &shell.inputs, &ins)));
                }
            }
        }
        Ok(ProjectionTable { values, ..shell })
    }

    /// Tabulates `op` over its declared regions. Exact when the declared
    /// regions contain the true ones.
    pub fn of_operation(layout: &MemoryLayout, op: &Operation) -> Result<Self, TableError> {
        let inputs: Vec<usize> = op.declared_ir().iter().copied().collect();
        let outputs: Vec<usize> = op.declared_or().iter().copied().collect();
        let base = layout.min_state();
        Self::build(layout, inputs.clone(), outputs.clone(), |ins| {
            let mut s = base.clone();
            for (&c, &v) in inputs.iter().zip(ins) {
                s.set(c, v);
            }
            op.apply_in_place(&mut s);
            outputs.iter().map(|&c| s.get(c)).collect()
        })
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        if self.outputs.is_empty() {
            self.row_total()
        } else {
            self.values.len() / self.outputs.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn row_total(&self) -> usize {
        self.input_domains.iter().map(|d| d.size() as usize).product()
    }

    fn rank_of(&self, ins: &[u32]) -> usize {
        let mut rank = 0usize;
        for (v, d) in ins.iter().zip(&self.input_domains).rev() {
            rank = rank * d.size() as usize + (v - d.min()) as usize;
        }
        rank
    }

    fn assignment_of(&self, mut rank: usize) -> Vec<u32> {
        self.input_domains
            .iter()
            .map(|d| {
                let size = d.size() as usize;
                let v = d.min() + (rank % size) as u32;
                rank /= size;
                v
            })
            .collect()
    }

    /// Every row as `(input values, output values)`, in rank order.
    pub fn rows(&self) -> impl Iterator<Item = (Vec<u32>, &[u32])> + '_ {
        let width = self.outputs.len();
        (0..self.row_total()).map(move |r| (self.assignment_of(r), &self.values[r * width..(r + 1) * width]))
    }

    pub(crate) fn apply(&self, s: &mut MachineState) {
        let mut rank = 0usize;
        for (&c, d) in self.inputs.iter().zip(&self.input_domains).rev() {
            rank = rank * d.size() as usize + (s.get(c) - d.min()) as usize;
        }
        let width = self.outputs.len();
        for (&c, &v) in self.outputs.iter().zip(&self.values[rank * width..]) {
            s.set(c, v);
        }
    }
}

fn push_row(layout: &MemoryLayout, outputs: &[usize], out: &[u32], values: &mut Vec<u32>) -> Result<(), TableError> {
    if out.len() != outputs.len() {
        return Err(TableError::Arity {
            expected: outputs.len(),
            actual: out.len(),
        });
    }
    for (&c, &v) in outputs.iter().zip(out) {
        if !layout.domain(c).contains(v) {
            return Err(TableError::OutOfDomain {
                cell: layout.cell_name(c),
                value: v,
            });
        }
        values.push(v);
    }
    Ok(())
}

fn describe(layout: &MemoryLayout, cells: &[usize], values: &[u32]) -> String {
    cells
        .iter()
        .zip(values)
        .map(|(&c, &v)| format!("{}={}", layout.cell_name(c), layout.domain(c).format(v)))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TabulateError {
    #[error("table has no entry for state {0:?}")]
    MissingEntry(MachineState),
    #[error(transparent)]
    InvalidState(#[from] StateError),
    #[error(transparent)]
    Region(#[from] RegionError),
}

/// An operation given by a table over full states. Its declared regions are
/// the brute-force input and output regions.
pub fn tabulate_operation(
    name: impl Into<String>,
    table: HashMap<MachineState, MachineState>,
    layout: &MemoryLayout,
) -> Result<Operation, TabulateError> {
    match layout.state_count() {
        Some(n) if n <= DEFAULT_STATE_CAP => {}
        states => {
            return Err(RegionError::StateSpaceTooLarge {
                states,
                cap: DEFAULT_STATE_CAP,
            }
            .into())
        }
    }
    for s in layout.states() {
        match table.get(&s) {
            Some(image) => layout.check_state(image)?,
            None => return Err(TabulateError::MissingEntry(s)),
        }
    }
    let table = Arc::new(table);
    let op = Operation::from_fn("", [], [], move |s: &mut MachineState| {
        *s = table[&*s].clone();
    });
    let or = output_region_capped(&op, layout, DEFAULT_STATE_CAP)?;
    let ir = input_region_capped(&op, layout, DEFAULT_STATE_CAP)?;
    let mut op = op.with_declared(ir, or);
    op.name = name.into();
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::super::{Region, T};
    use super::*;
    use std::collections::BTreeSet;

    fn layout() -> MemoryLayout {
        MemoryLayout::new(vec![
            Region::new("c", 2, Domain::bits(1)),
            Region::new("rr", 1, Domain::Bool),
        ])
        .unwrap()
    }

    #[test]
    fn identity_table() {
        let l = layout();
        let table: HashMap<_, _> = l.states().map(|s| (s.clone(), s)).collect();
        let op = tabulate_operation("id", table, &l).unwrap();
        assert_eq!(op.name(), "id");
        assert!(op.declared_or().is_empty());
        assert!(op.declared_ir().is_empty());
        let s = l.parse_state("c0=1").unwrap();
        assert_eq!(op.evaluate(&s), s);
    }

    #[test]
    fn not_table() {
        let l = layout();
        let table: HashMap<_, _> = l
            .states()
            .map(|s| {
                let mut t = s.clone();
                t.set(0, 1 - s.get(0));
                (s, t)
            })
            .collect();
        let op = tabulate_operation("not", table, &l).unwrap();
        assert_eq!(op.declared_or(), &BTreeSet::from([0]));
    }

    #[test]
    fn partial_table() {
        let l = layout();
        let mut table: HashMap<_, _> = l.states().map(|s| (s.clone(), s)).collect();
        let missing = l.parse_state("c1=1,rr=T").unwrap();
        table.remove(&missing);
        assert_eq!(
            tabulate_operation("p", table, &l).unwrap_err(),
            TabulateError::MissingEntry(missing)
        );
    }

    #[test]
    fn projection_rows_and_lookup() {
        let l = layout();
        let t = ProjectionTable::build(&l, vec![0, 1], vec![2], |ins| {
            vec![if ins[0] == ins[1] { T } else { 0 }]
        })
        .unwrap();
        assert_eq!(t.len(), 4);
        let rows: Vec<_> = t.rows().map(|(i, o)| (i, o.to_vec())).collect();
        assert_eq!(rows[1], (vec![1, 0], vec![0]));
        let explicit = ProjectionTable::from_rows(&l, vec![0, 1], vec![2], rows.iter().rev().cloned()).unwrap();
        assert_eq!(explicit, t);
        let op = Operation::from_projection("eq", t);
        let mut s = l.parse_state("c0=1,c1=1").unwrap();
        op.apply_in_place(&mut s);
        assert_eq!(s.get(2), T);
    }

    #[test]
    fn projection_errors() {
        let l = layout();
        let rows = vec![(vec![0], vec![1]), (vec![0], vec![0])];
        assert!(matches!(
            ProjectionTable::from_rows(&l, vec![0], vec![1], rows),
            Err(TableError::DuplicateEntry(_))
        ));
        assert!(matches!(
            ProjectionTable::from_rows(&l, vec![0], vec![1], vec![(vec![0], vec![1])]),
            Err(TableError::MissingEntry(_))
        ));
        assert!(matches!(
            ProjectionTable::from_rows(&l, vec![0], vec![1], vec![(vec![0], vec![2])]),
            Err(TableError::OutOfDomain { .. })
        ));
        assert!(matches!(
            ProjectionTable::build(&l, vec![0, 0], vec![], |_| vec![]),
            Err(TableError::RepeatedCell(_))
        ));
        assert!(matches!(
            ProjectionTable::build(&l, vec![7], vec![], |_| vec![]),
            Err(TableError::CellOutOfRange(7))
        ));
    }

    #[test]
    fn constant_table_without_inputs() {
        let l = layout();
        let t = ProjectionTable::build(&l, vec![], vec![2], |_| vec![T]).unwrap();
        assert_eq!(t.len(), 1);
        let mut s = l.min_state();
        Operation::from_projection("set", t).apply_in_place(&mut s);
        assert_eq!(s.get(2), T);
    }
}
