//! Basic thread algebra: terms, guarded recursive specifications and their
//! solutions as finite pointed graphs.
//!
//! A [`ThreadGraph`] is the finite-state form of a (possibly infinite)
//! thread. Every node is one state of the thread; the nodes reachable from
//! the entry are exactly its residual states. Two graphs denote the same
//! thread iff they are bisimilar, which for these deterministic structures
//! is decided by a pairwise walk.

mod enumerate;
pub mod sample;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use thiserror::Error;

pub use enumerate::{enumerate_threads, raw_search_space, ThreadEnumerator};

/// Name of the internal action that always replies `T`.
pub const TAU: &str = "tau";

/// A basic action such as `post` or `load:0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId {
    name: String,
    index: Option<u32>,
}

impl ActionId {
    /// # Panics
    ///
    /// Panics if `name` is empty.
    pub fn named(name: impl Into<String>) -> Self {
        let name = name.into();
        assert!(!name.is_empty(), "action names must be nonempty");
        ActionId { name, index: None }
    }

    /// # Panics
    ///
    /// Panics if `name` is empty.
    pub fn indexed(name: impl Into<String>, index: u32) -> Self {
        let mut id = Self::named(name);
        id.index = Some(index);
        id
    }

    pub fn tau() -> Self {
        Self::named(TAU)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn index(&self) -> Option<u32> {
        self.index
    }

    pub fn is_tau(&self) -> bool {
        self.name == TAU && self.index.is_none()
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{}:{}", self.name, i),
            None => f.write_str(&self.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid action identifier `{0}`")]
pub struct ActionParseError(pub String);

impl FromStr for ActionId {
    type Err = ActionParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ActionParseError(s.to_string());
        let (name, index) = match s.split_once(':') {
            Some((name, idx)) => (name, Some(idx.parse::<u32>().map_err(|_| bad())?)),
            None => (s, None),
        };
        let mut chars = name.chars();
        let head_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
        if !head_ok || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(bad());
        }
        Ok(ActionId {
            name: name.to_string(),
            index,
        })
    }
}

/// A term over the thread signature, possibly mentioning recursion variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ThreadTerm {
    Stop,
    Dead,
    Var(String),
    /// `on_true ⊴ action ⊵ on_false`.
    Post {
        action: ActionId,
        on_true: Box<ThreadTerm>,
        on_false: Box<ThreadTerm>,
    },
}

impl ThreadTerm {
    pub fn var(name: impl Into<String>) -> Self {
        ThreadTerm::Var(name.into())
    }

    pub fn post(action: ActionId, on_true: ThreadTerm, on_false: ThreadTerm) -> Self {
        ThreadTerm::Post {
            action,
            on_true: Box::new(on_true),
            on_false: Box::new(on_false),
        }
    }

    /// Action prefix `a ∘ t`, stored as `t ⊴ a ⊵ t`.
    pub fn prefix(action: ActionId, then: ThreadTerm) -> Self {
        Self::post(action, then.clone(), then)
    }

    fn visit_vars<'a>(&'a self, out: &mut impl FnMut(&'a str)) {
        match self {
            ThreadTerm::Stop | ThreadTerm::Dead => {}
            ThreadTerm::Var(v) => out(v),
            ThreadTerm::Post { on_true, on_false, .. } => {
                on_true.visit_vars(out);
                on_false.visit_vars(out);
            }
        }
    }

    /// Number of proper subterms.
    pub fn proper_subterms(&self) -> usize {
        match self {
            ThreadTerm::Post { on_true, on_false, .. } => 2 + on_true.proper_subterms() + on_false.proper_subterms(),
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("specification has no equations")]
    Empty,
    #[error("variable `{0}` is declared twice")]
    DuplicateVariable(String),
    #[error("`{0}` is reserved and cannot name a variable")]
    ReservedName(String),
    #[error("root variable `{0}` has no equation")]
    UnknownRoot(String),
    #[error("variable `{var}` used in the equation for `{equation}` is not declared")]
    UndeclaredVariable { var: String, equation: String },
}

/// A recursive specification `{X_i = t_i}` with a designated root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecSpec {
    equations: IndexMap<String, ThreadTerm>,
    root: String,
}

impl RecSpec {
    pub fn new(
        equations: impl IntoIterator<Item = (String, ThreadTerm)>,
        root: impl Into<String>,
    ) -> Result<Self, SpecError> {
        let mut map = IndexMap::new();
        for (name, term) in equations {
            if name == "S" || name == "D" {
                return Err(SpecError::ReservedName(name));
            }
            if map.contains_key(&name) {
                return Err(SpecError::DuplicateVariable(name));
            }
            map.insert(name, term);
        }
        if map.is_empty() {
            return Err(SpecError::Empty);
        }
        let root = root.into();
        if !map.contains_key(&root) {
            return Err(SpecError::UnknownRoot(root));
        }
        for (name, term) in &map {
            let mut missing = None;
            term.visit_vars(&mut |v| {
                if missing.is_none() && !map.contains_key(v) {
                    missing = Some(v.to_string());
                }
            });
            if let Some(var) = missing {
                return Err(SpecError::UndeclaredVariable {
                    var,
                    equation: name.clone(),
                });
            }
        }
        Ok(RecSpec { equations: map, root })
    }

    /// Builds a specification rooted at its first equation.
    pub fn from_equations(equations: impl IntoIterator<Item = (String, ThreadTerm)>) -> Result<Self, SpecError> {
        let equations: Vec<_> = equations.into_iter().collect();
        let root = equations.first().map(|(n, _)| n.clone()).ok_or(SpecError::Empty)?;
        Self::new(equations, root)
    }

    pub fn equations(&self) -> &IndexMap<String, ThreadTerm> {
        &self.equations
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn with_root(&self, root: &str) -> Result<Self, SpecError> {
        Self::new(self.equations.clone(), root)
    }

    /// Equations plus proper subterms: an upper bound on solution states.
    pub fn size_bound(&self) -> usize {
        self.equations.len() + self.equations.values().map(ThreadTerm::proper_subterms).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("equation for `{variable}` is not guarded: its right-hand side must be S, D or a postconditional")]
pub struct GuardednessError {
    pub variable: String,
}

/// Accepts a specification iff every right-hand side is `S`, `D` or a
/// postconditional composition.
pub fn check_guarded(spec: &RecSpec) -> Result<(), GuardednessError> {
    match spec.equations.iter().find(|(_, t)| matches!(t, ThreadTerm::Var(_))) {
        Some((name, _)) => Err(GuardednessError { variable: name.clone() }),
        None => Ok(()),
    }
}

/// One state of a thread graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Stop,
    Dead,
    Post {
        action: ActionId,
        on_true: usize,
        on_false: usize,
    },
}

impl Node {
    fn successors(&self) -> Option<(usize, usize)> {
        match self {
            Node::Post { on_true, on_false, .. } => Some((*on_true, *on_false)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no nodes")]
    Empty,
    #[error("node {node} refers to missing node {target}")]
    DanglingEdge { node: usize, target: usize },
    #[error("entry {0} is out of range")]
    BadEntry(usize),
}

/// A finite pointed graph denoting one thread. Every node is reachable from
/// the entry.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ThreadGraph {
    nodes: Vec<Node>,
    entry: usize,
}

impl ThreadGraph {
    /// Validates edges and drops nodes unreachable from `entry`, keeping the
    /// relative order of the rest.
    pub fn new(nodes: Vec<Node>, entry: usize) -> Result<Self, GraphError> {
        if nodes.is_empty() {
            return Err(GraphError::Empty);
        }
        if entry >= nodes.len() {
            return Err(GraphError::BadEntry(entry));
        }
        for (i, n) in nodes.iter().enumerate() {
            if let Some((t, f)) = n.successors() {
                for target in [t, f] {
                    if target >= nodes.len() {
                        return Err(GraphError::DanglingEdge { node: i, target });
                    }
                }
            }
        }
        Ok(Self::trimmed(nodes, entry))
    }

    fn trimmed(nodes: Vec<Node>, entry: usize) -> Self {
        let reach = reachable(&nodes, entry);
        if reach.len() == nodes.len() {
            return ThreadGraph { nodes, entry };
        }
        let mut remap = vec![usize::MAX; nodes.len()];
        for (new, &old) in reach.iter().enumerate() {
            remap[old] = new;
        }
        let nodes = reach
            .iter()
            .map(|&old| match &nodes[old] {
                Node::Post {
                    action,
                    on_true,
                    on_false,
                } => Node::Post {
                    action: action.clone(),
                    on_true: remap[*on_true],
                    on_false: remap[*on_false],
                },
                other => other.clone(),
            })
            .collect();
        ThreadGraph {
            nodes,
            entry: remap[entry],
        }
    }

    pub fn stop() -> Self {
        ThreadGraph {
            nodes: vec![Node::Stop],
            entry: 0,
        }
    }

    pub fn dead() -> Self {
        ThreadGraph {
            nodes: vec![Node::Dead],
            entry: 0,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> &Node {
        &self.nodes[idx]
    }

    pub fn entry(&self) -> usize {
        self.entry
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// All actions labelling some node.
    pub fn actions(&self) -> BTreeSet<&ActionId> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Post { action, .. } => Some(action),
                _ => None,
            })
            .collect()
    }

    /// Renders the graph as a specification with one equation per
    /// postconditional node; `S` and `D` leaves are inlined unless they are
    /// the entry.
    pub fn to_spec(&self) -> RecSpec {
        let names: Vec<String> = (0..self.nodes.len()).map(|i| format!("X{}", i + 1)).collect();
        let leaf = |idx: usize| match &self.nodes[idx] {
            Node::Stop => ThreadTerm::Stop,
            Node::Dead => ThreadTerm::Dead,
            Node::Post { .. } => ThreadTerm::Var(names[idx].clone()),
        };
        let mut order: Vec<usize> = vec![self.entry];
        order.extend((0..self.nodes.len()).filter(|&i| i != self.entry));
        let equations = order.into_iter().filter_map(|i| {
            let rhs = match &self.nodes[i] {
                Node::Post {
                    action,
                    on_true,
                    on_false,
                } => ThreadTerm::post(action.clone(), leaf(*on_true), leaf(*on_false)),
                Node::Stop if i == self.entry => ThreadTerm::Stop,
                Node::Dead if i == self.entry => ThreadTerm::Dead,
                _ => return None,
            };
            Some((names[i].clone(), rhs))
        });
        RecSpec::from_equations(equations).expect("graph renders to a well-formed spec")
    }
}

fn reachable(nodes: &[Node], entry: usize) -> Vec<usize> {
    let mut seen = vec![false; nodes.len()];
    let mut stack = vec![entry];
    seen[entry] = true;
    while let Some(i) = stack.pop() {
        if let Some((t, f)) = nodes[i].successors() {
            for s in [f, t] {
                if !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
    }
    (0..nodes.len()).filter(|&i| seen[i]).collect()
}

/// Solutions of every variable of a specification, sharing one node pool.
#[derive(Clone, Debug)]
pub struct SpecSolution {
    nodes: Vec<Node>,
    entries: IndexMap<String, usize>,
}

impl SpecSolution {
    /// The solution `⟨X|E⟩` as a trimmed graph.
    ///
    /// # Panics
    ///
    /// Panics if `var` is not a variable of the solved specification.
    pub fn graph_for(&self, var: &str) -> ThreadGraph {
        ThreadGraph::trimmed(self.nodes.clone(), self.entries[var])
    }
}

struct Builder<'a> {
    spec: &'a RecSpec,
    nodes: Vec<Option<Node>>,
    entries: IndexMap<String, usize>,
    stop: Option<usize>,
    dead: Option<usize>,
}

impl<'a> Builder<'a> {
    fn new(spec: &'a RecSpec, order: &[usize]) -> Self {
        let mut b = Builder {
            spec,
            nodes: Vec::new(),
            entries: IndexMap::new(),
            stop: None,
            dead: None,
        };
        for &i in order {
            let (name, _) = spec.equations.get_index(i).expect("order index in range");
            let slot = b.alloc();
            b.entries.insert(name.clone(), slot);
        }
        b
    }

    fn alloc(&mut self) -> usize {
        self.nodes.push(None);
        self.nodes.len() - 1
    }

    fn fill_equations(&mut self, order: &[usize]) {
        for &i in order {
            let (name, rhs) = self.spec.equations.get_index(i).expect("order index in range");
            let slot = self.entries[name.as_str()];
            let node = self.top(rhs);
            self.nodes[slot] = Some(node);
        }
    }

    /// Node for a guarded right-hand side.
    fn top(&mut self, term: &ThreadTerm) -> Node {
        match term {
            ThreadTerm::Stop => Node::Stop,
            ThreadTerm::Dead => Node::Dead,
            ThreadTerm::Var(_) => unreachable!("guardedness checked before building"),
            ThreadTerm::Post {
                action,
                on_true,
                on_false,
            } => {
                let t = self.sub(on_true);
                let f = self.sub(on_false);
                Node::Post {
                    action: action.clone(),
                    on_true: t,
                    on_false: f,
                }
            }
        }
    }

    /// Node index for an argument position.
    fn sub(&mut self, term: &ThreadTerm) -> usize {
        match term {
            ThreadTerm::Var(v) => self.entries[v.as_str()],
            ThreadTerm::Stop => match self.stop {
                Some(i) => i,
                None => {
                    let i = self.alloc();
                    self.nodes[i] = Some(Node::Stop);
                    self.stop = Some(i);
                    i
                }
            },
            ThreadTerm::Dead => match self.dead {
                Some(i) => i,
                None => {
                    let i = self.alloc();
                    self.nodes[i] = Some(Node::Dead);
                    self.dead = Some(i);
                    i
                }
            },
            ThreadTerm::Post { .. } => {
                let i = self.alloc();
                let node = self.top(term);
                self.nodes[i] = Some(node);
                i
            }
        }
    }

    fn finish(self) -> SpecSolution {
        SpecSolution {
            nodes: self
                .nodes
                .into_iter()
                .map(|n| n.expect("every allocated node is filled"))
                .collect(),
            entries: self.entries,
        }
    }
}

/// Solves every equation of a guarded specification.
pub fn solve_all(spec: &RecSpec) -> Result<SpecSolution, GuardednessError> {
    let order: Vec<usize> = (0..spec.equations.len()).collect();
    solve_all_in_order(spec, &order)
}

fn solve_all_in_order(spec: &RecSpec, order: &[usize]) -> Result<SpecSolution, GuardednessError> {
    check_guarded(spec)?;
    let mut b = Builder::new(spec, order);
    b.fill_equations(order);
    Ok(b.finish())
}

/// The solution `⟨root|E⟩` of a guarded specification.
pub fn solve(spec: &RecSpec) -> Result<ThreadGraph, GuardednessError> {
    Ok(solve_all(spec)?.graph_for(spec.root()))
}

/// Like [`solve`], but allocates and fills equations in `order` (a
/// permutation of equation indices), giving a differently numbered graph.
///
/// # Panics
///
/// Panics if `order` is not a permutation of `0..spec.equations().len()`.
pub fn solve_in_order(spec: &RecSpec, order: &[usize]) -> Result<ThreadGraph, GuardednessError> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    assert!(
        sorted.iter().copied().eq(0..spec.equations.len()),
        "order must be a permutation of the equation indices"
    );
    Ok(solve_all_in_order(spec, order)?.graph_for(spec.root()))
}

/// One-step unfolding of the root: a fresh copy of the root's right-hand
/// side whose variables point at their solutions.
pub fn unfold_root(spec: &RecSpec) -> Result<ThreadGraph, GuardednessError> {
    let solution = solve_all(spec)?;
    let stop = solution.nodes.iter().position(|n| *n == Node::Stop);
    let dead = solution.nodes.iter().position(|n| *n == Node::Dead);
    let mut b = Builder {
        spec,
        nodes: solution.nodes.into_iter().map(Some).collect(),
        entries: solution.entries,
        stop,
        dead,
    };
    let top = b.alloc();
    let node = b.top(&spec.equations[spec.root()]);
    b.nodes[top] = Some(node);
    let pool = b.finish();
    Ok(ThreadGraph::trimmed(pool.nodes, top))
}

/// The residual states of `g`: the entry, closed under taking both branches
/// of every postconditional node.
pub fn residual_states(g: &ThreadGraph) -> BTreeSet<usize> {
    reachable(&g.nodes, g.entry).into_iter().collect()
}

/// Number of distinct threads among the residual states (states of the
/// bisimulation quotient).
pub fn distinct_states(g: &ThreadGraph) -> usize {
    minimize(g).len()
}

/// Decides bisimilarity. With `collapse_tau`, every `tau` node is compared as
/// if its negative branch were its positive one.
pub fn bisimilar(g1: &ThreadGraph, g2: &ThreadGraph, collapse_tau: bool) -> bool {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([(g1.entry, g2.entry)]);
    seen.insert((g1.entry, g2.entry));
    while let Some((a, b)) = queue.pop_front() {
        let next = match (&g1.nodes[a], &g2.nodes[b]) {
            (Node::Stop, Node::Stop) | (Node::Dead, Node::Dead) => continue,
            (
                Node::Post {
                    action: x,
                    on_true: t1,
                    on_false: f1,
                },
                Node::Post {
                    action: y,
                    on_true: t2,
                    on_false: f2,
                },
            ) if x == y => {
                if collapse_tau && x.is_tau() {
                    [(*t1, *t2), (*t1, *t2)]
                } else {
                    [(*t1, *t2), (*f1, *f2)]
                }
            }
            _ => return false,
        };
        for pair in next {
            if seen.insert(pair) {
                queue.push_back(pair);
            }
        }
    }
    true
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Label<'a> {
    Stop,
    Dead,
    Post(&'a ActionId),
}

/// Bisimulation partition of the nodes of `g`: block id per node.
fn partition(g: &ThreadGraph) -> (Vec<usize>, usize) {
    let mut labels = HashMap::new();
    let mut block: Vec<usize> = g
        .nodes
        .iter()
        .map(|n| {
            let label = match n {
                Node::Stop => Label::Stop,
                Node::Dead => Label::Dead,
                Node::Post { action, .. } => Label::Post(action),
            };
            let next = labels.len();
            *labels.entry(label).or_insert(next)
        })
        .collect();
    let mut count = labels.len();
    loop {
        let mut sigs = HashMap::new();
        let refined: Vec<usize> = g
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let succ = n.successors().map(|(t, f)| (block[t], block[f]));
                let next = sigs.len();
                *sigs.entry((block[i], succ)).or_insert(next)
            })
            .collect();
        let refined_count = sigs.len();
        block = refined;
        if refined_count == count {
            return (block, count);
        }
        count = refined_count;
    }
}

/// Bisimulation quotient of `g`.
pub fn minimize(g: &ThreadGraph) -> ThreadGraph {
    let (block, count) = partition(g);
    let mut nodes: Vec<Option<Node>> = vec![None; count];
    for (i, n) in g.nodes.iter().enumerate() {
        if nodes[block[i]].is_none() {
            nodes[block[i]] = Some(match n {
                Node::Post {
                    action,
                    on_true,
                    on_false,
                } => Node::Post {
                    action: action.clone(),
                    on_true: block[*on_true],
                    on_false: block[*on_false],
                },
                other => other.clone(),
            });
        }
    }
    ThreadGraph::trimmed(nodes.into_iter().map(Option::unwrap).collect(), block[g.entry])
}

/// Canonical representative of the bisimulation class of `g`: the quotient,
/// renumbered in breadth-first order from the entry (positive branch
/// first). Two graphs are bisimilar iff their canonical forms are equal.
pub fn canonical(g: &ThreadGraph) -> ThreadGraph {
    let min = minimize(g);
    let mut order = Vec::with_capacity(min.len());
    let mut remap = vec![usize::MAX; min.len()];
    let mut queue = VecDeque::from([min.entry]);
    remap[min.entry] = 0;
    while let Some(i) = queue.pop_front() {
        order.push(i);
        if let Some((t, f)) = min.nodes[i].successors() {
            for s in [t, f] {
                if remap[s] == usize::MAX {
                    remap[s] = order.len() + queue.len();
                    queue.push_back(s);
                }
            }
        }
    }
    let nodes = order
        .iter()
        .map(|&old| match &min.nodes[old] {
            Node::Post {
                action,
                on_true,
                on_false,
            } => Node::Post {
                action: action.clone(),
                on_true: remap[*on_true],
                on_false: remap[*on_false],
            },
            other => other.clone(),
        })
        .collect();
    ThreadGraph { nodes, entry: 0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(name: &str) -> ActionId {
        ActionId::named(name)
    }

    fn spec(eqs: Vec<(&str, ThreadTerm)>) -> RecSpec {
        RecSpec::from_equations(eqs.into_iter().map(|(n, t)| (n.to_string(), t))).unwrap()
    }

    #[test]
    fn action_ids_parse_and_print() {
        let load: ActionId = "load:0".parse().unwrap();
        assert_eq!(load, ActionId::indexed("load", 0));
        assert_eq!(load.to_string(), "load:0");
        assert!("".parse::<ActionId>().is_err());
        assert!("load:x".parse::<ActionId>().is_err());
        assert!(ActionId::tau().is_tau());
        assert!(!ActionId::indexed("tau", 1).is_tau());
    }

    #[test]
    fn guardedness() {
        assert!(check_guarded(&spec(vec![("X", ThreadTerm::Stop)])).is_ok());
        let err = check_guarded(&spec(vec![("X", ThreadTerm::var("X"))])).unwrap_err();
        assert_eq!(err.variable, "X");
        let looped = spec(vec![(
            "X",
            ThreadTerm::post(a("a"), ThreadTerm::var("X"), ThreadTerm::Stop),
        )]);
        assert!(check_guarded(&looped).is_ok());
        // first offender in declaration order
        let two = spec(vec![
            ("X", ThreadTerm::Stop),
            ("Y", ThreadTerm::var("Z")),
            ("Z", ThreadTerm::var("X")),
        ]);
        assert_eq!(check_guarded(&two).unwrap_err().variable, "Y");
    }

    #[test]
    fn spec_validation() {
        assert_eq!(
            RecSpec::from_equations(vec![("X".into(), ThreadTerm::var("Y"))]).unwrap_err(),
            SpecError::UndeclaredVariable {
                var: "Y".into(),
                equation: "X".into()
            }
        );
        assert!(matches!(
            RecSpec::new(vec![("X".into(), ThreadTerm::Stop)], "Y"),
            Err(SpecError::UnknownRoot(_))
        ));
        assert!(matches!(
            RecSpec::from_equations(vec![("X".into(), ThreadTerm::Stop), ("X".into(), ThreadTerm::Dead)]),
            Err(SpecError::DuplicateVariable(_))
        ));
        assert!(matches!(
            RecSpec::from_equations(vec![("S".into(), ThreadTerm::Stop)]),
            Err(SpecError::ReservedName(_))
        ));
    }

    #[test]
    fn solve_constant() {
        let g = solve(&spec(vec![("X", ThreadTerm::Stop)])).unwrap();
        assert_eq!(g, ThreadGraph::stop());
    }

    #[test]
    fn solve_self_loop() {
        let g = solve(&spec(vec![(
            "X",
            ThreadTerm::post(a("a"), ThreadTerm::var("X"), ThreadTerm::Stop),
        )]))
        .unwrap();
        assert_eq!(g.len(), 2);
        let e = g.entry();
        match g.node(e) {
            Node::Post {
                action,
                on_true,
                on_false,
            } => {
                assert_eq!(action, &a("a"));
                assert_eq!(*on_true, e);
                assert_eq!(g.node(*on_false), &Node::Stop);
            }
            other => panic!("unexpected entry {other:?}"),
        }
        assert_eq!(residual_states(&g).len(), 2);
    }

    #[test]
    fn solve_two_cycle() {
        let g = solve(&spec(vec![
            ("X", ThreadTerm::prefix(a("a"), ThreadTerm::var("Y"))),
            ("Y", ThreadTerm::prefix(a("b"), ThreadTerm::var("X"))),
        ]))
        .unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.nodes().iter().all(|n| matches!(n, Node::Post { .. })));
        let Node::Post { on_true, .. } = g.node(g.entry()) else {
            unreachable!()
        };
        let Node::Post { on_true: back, .. } = g.node(*on_true) else {
            panic!("second node must be a postconditional")
        };
        assert_eq!(*back, g.entry());
    }

    #[test]
    fn residuals_of_prefix() {
        let g = solve(&spec(vec![("X", ThreadTerm::prefix(a("a"), ThreadTerm::Stop))])).unwrap();
        assert_eq!(residual_states(&g).len(), 2);
        assert_eq!(residual_states(&ThreadGraph::stop()).len(), 1);
    }

    #[test]
    fn rsp_unused_equation() {
        let g1 = solve(&spec(vec![(
            "X",
            ThreadTerm::post(a("a"), ThreadTerm::var("X"), ThreadTerm::Stop),
        )]))
        .unwrap();
        let g2 = solve(&spec(vec![
            ("Y", ThreadTerm::post(a("a"), ThreadTerm::var("Y"), ThreadTerm::Stop)),
            ("Z", ThreadTerm::Stop),
        ]))
        .unwrap();
        assert!(bisimilar(&g1, &g2, false));
    }

    #[test]
    fn distinct_actions_not_bisimilar() {
        let g1 = solve(&spec(vec![("X", ThreadTerm::prefix(a("a"), ThreadTerm::Stop))])).unwrap();
        let g2 = solve(&spec(vec![("X", ThreadTerm::prefix(a("b"), ThreadTerm::Stop))])).unwrap();
        assert!(!bisimilar(&g1, &g2, false));
        assert!(!bisimilar(&g1, &ThreadGraph::stop(), false));
        assert!(!bisimilar(&ThreadGraph::dead(), &ThreadGraph::stop(), false));
    }

    #[test]
    fn tau_branches_collapse() {
        let x = ThreadTerm::prefix(a("a"), ThreadTerm::Stop);
        let y = ThreadTerm::Dead;
        let lhs = solve(&spec(vec![("X", ThreadTerm::post(ActionId::tau(), x.clone(), y))])).unwrap();
        let rhs = solve(&spec(vec![("X", ThreadTerm::post(ActionId::tau(), x.clone(), x))])).unwrap();
        assert!(bisimilar(&lhs, &rhs, true));
        assert!(!bisimilar(&lhs, &rhs, false));
    }

    #[test]
    fn unfolding_is_bisimilar() {
        let s = spec(vec![
            ("X", ThreadTerm::post(a("a"), ThreadTerm::var("Y"), ThreadTerm::Dead)),
            ("Y", ThreadTerm::prefix(a("b"), ThreadTerm::var("X"))),
        ]);
        let sol = solve(&s).unwrap();
        let unfolded = unfold_root(&s).unwrap();
        assert_eq!(unfolded.len(), sol.len() + 1);
        assert!(bisimilar(&sol, &unfolded, false));
    }

    #[test]
    fn minimize_merges_unrolled_loop() {
        // X = a;Y, Y = a;X is the same thread as Z = a;Z
        let unrolled = solve(&spec(vec![
            ("X", ThreadTerm::prefix(a("a"), ThreadTerm::var("Y"))),
            ("Y", ThreadTerm::prefix(a("a"), ThreadTerm::var("X"))),
        ]))
        .unwrap();
        assert_eq!(residual_states(&unrolled).len(), 2);
        assert_eq!(distinct_states(&unrolled), 1);
        let tight = solve(&spec(vec![("Z", ThreadTerm::prefix(a("a"), ThreadTerm::var("Z")))])).unwrap();
        assert_eq!(canonical(&unrolled), canonical(&tight));
    }

    #[test]
    fn graph_validation() {
        assert_eq!(ThreadGraph::new(vec![], 0), Err(GraphError::Empty));
        assert_eq!(ThreadGraph::new(vec![Node::Stop], 1), Err(GraphError::BadEntry(1)));
        let dangling = vec![Node::Post {
            action: a("a"),
            on_true: 0,
            on_false: 3,
        }];
        assert!(matches!(
            ThreadGraph::new(dangling, 0),
            Err(GraphError::DanglingEdge { .. })
        ));
        let g = ThreadGraph::new(vec![Node::Dead, Node::Stop], 1).unwrap();
        assert_eq!(g, ThreadGraph::stop());
    }

    #[test]
    fn to_spec_round_trips_through_solve() {
        let s = spec(vec![
            ("X", ThreadTerm::post(a("a"), ThreadTerm::var("Y"), ThreadTerm::Stop)),
            ("Y", ThreadTerm::prefix(a("b"), ThreadTerm::var("X"))),
        ]);
        let g = solve(&s).unwrap();
        let back = solve(&g.to_spec()).unwrap();
        assert!(bisimilar(&g, &back, false));
        assert_eq!(solve(&ThreadGraph::dead().to_spec()).unwrap(), ThreadGraph::dead());
    }
}
