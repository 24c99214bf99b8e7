//! Witness construction.
//!
//! The lean construction uses one load and one store register pair. Its
//! operating unit holds a mirror of data memory plus a `k+1` bit counter:
//! the thread copies memory into the mirror word by word, applies the
//! transformation inside the operating unit, then copies the mirror back.
//!
//! The wide construction spends registers instead of operating unit bits:
//! `2^k` load pairs hold all of data memory at once and `2^(k-1)` store
//! pairs write the external half back.

use std::sync::Arc;

use thiserror::Error;

use super::{TransformationTable, Witness};
use crate::dsl::parse_threads;
use crate::machine::{MachineState, Operation, F, T};
use crate::sls::{build_sls, load_action, store_action, SlsError, SlsLayout, SlsParams};
use crate::thread::{solve, ActionId, Node, ThreadGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("flag f=T needs an internal half of data memory (k >= 1)")]
    NoInternalHalf,
    #[error(transparent)]
    Sls(#[from] SlsError),
}

/// Cell positions used by the lean instructions.
#[derive(Clone, Copy)]
struct Lean {
    mirror: usize,
    dms: usize,
    l: usize,
    counter: usize,
    counter_bits: usize,
    words: u32,
    ld0: usize,
    sd0: usize,
    la0: usize,
    sa0: usize,
    rr: usize,
}

impl Lean {
    fn counter(&self, s: &MachineState) -> u32 {
        (0..self.counter_bits).fold(0, |acc, b| acc | (s.get(self.counter + b) << b))
    }

    fn set_counter(&self, s: &mut MachineState, v: u32) {
        for b in 0..self.counter_bits {
            s.set(self.counter + b, (v >> b) & 1);
        }
    }

    fn word(&self, s: &MachineState, j: usize) -> u32 {
        (0..self.l).fold(0, |acc, b| acc | (s.get(self.mirror + j * self.l + b) << b))
    }

    fn set_word(&self, s: &mut MachineState, j: usize, v: u32) {
        for b in 0..self.l {
            s.set(self.mirror + j * self.l + b, (v >> b) & 1);
        }
    }

    fn mirror_rank(&self, s: &MachineState) -> u64 {
        (0..self.dms).fold(0, |acc, i| acc | (u64::from(s.get(self.mirror + i)) << i))
    }

    fn set_mirror_rank(&self, s: &mut MachineState, r: u64) {
        for i in 0..self.dms {
            s.set(self.mirror + i, ((r >> i) & 1) as u32);
        }
    }

    fn mirror_cells(&self) -> std::ops::Range<usize> {
        self.mirror..self.mirror + self.dms
    }

    fn counter_cells(&self) -> std::ops::Range<usize> {
        self.counter..self.counter + self.counter_bits
    }
}

const LEAN_THREAD: &str = "\
X1 = init ; X2
X2 = preload ? X3 : X5
X3 = load:0 ; X4
X4 = postload ; X2
X5 = xform ; X6
X6 = prestore ? X7 : S
X7 = store:0 ; X6
";

/// The lean witness: `u = v = 1`, `m = dms + k + 1`, five instructions and
/// eight thread states.
pub fn synthesize_lean(t: &TransformationTable, f: bool) -> Result<Witness, SynthError> {
    let (k, l) = (t.k(), t.l());
    if f && k == 0 {
        return Err(SynthError::NoInternalHalf);
    }
    let dms = t.dms() as usize;
    let params = SlsParams::new(k, l, dms + k as usize + 1, 1, 1)?;
    let c = SlsLayout::new(&params)?;
    let p = Lean {
        mirror: c.ou.start,
        dms,
        l: l as usize,
        counter: c.ou.start + dms,
        counter_bits: k as usize + 1,
        words: 1 << k,
        ld0: c.ld.start,
        sd0: c.sd.start,
        la0: c.la.start,
        sa0: c.sa.start,
        rr: c.rr,
    };
    let counter_and_rr = || p.counter_cells().chain([p.rr]);

    let init = Operation::from_fn("init", [], counter_and_rr(), move |s| {
        p.set_counter(s, 0);
        s.set(p.rr, T);
    });
    let preload = Operation::from_fn("preload", p.counter_cells(), [p.la0, p.rr], move |s| {
        let n = p.counter(s);
        if n < p.words {
            s.set(p.la0, n);
            s.set(p.rr, T);
        } else {
            s.set(p.la0, 0);
            s.set(p.rr, F);
        }
    });
    let postload = Operation::from_fn(
        "postload",
        p.mirror_cells().chain(p.counter_cells()).chain([p.ld0]),
        p.mirror_cells().chain(counter_and_rr()),
        move |s| {
            let n = p.counter(s);
            if n < p.words {
                p.set_word(s, n as usize, s.get(p.ld0));
            }
            p.set_counter(s, (n + 1) % (2 * p.words));
            s.set(p.rr, T);
        },
    );
    let table = Arc::new(t.clone());
    let xform = Operation::from_fn(
        "xform",
        p.mirror_cells(),
        p.mirror_cells().chain(counter_and_rr()),
        move |s| {
            let image = table.apply_rank(p.mirror_rank(s));
            p.set_mirror_rank(s, image);
            p.set_counter(s, 0);
            s.set(p.rr, T);
        },
    );
    let prestore = Operation::from_fn(
        "prestore",
        p.mirror_cells().chain(p.counter_cells()),
        [p.sd0, p.sa0].into_iter().chain(counter_and_rr()),
        move |s| {
            let n = p.counter(s);
            if n < p.words {
                s.set(p.sa0, n);
                s.set(p.sd0, p.word(s, n as usize));
                p.set_counter(s, n + 1);
                s.set(p.rr, T);
            } else {
                s.set(p.sa0, 0);
                s.set(p.sd0, 0);
                s.set(p.rr, F);
            }
        },
    );
    let machine = build_sls(
        params,
        vec![
            ("init".into(), init),
            ("preload".into(), preload),
            ("postload".into(), postload),
            ("prestore".into(), prestore),
            ("xform".into(), xform),
        ],
    )?;
    let thread = solve(&parse_threads(LEAN_THREAD).expect("fixed thread parses")).expect("fixed thread is guarded");
    Ok(Witness { machine, thread })
}

/// A thread performing `actions` in sequence, then terminating.
pub fn straight_line(actions: impl IntoIterator<Item = ActionId>) -> ThreadGraph {
    let mut nodes: Vec<Node> = actions
        .into_iter()
        .enumerate()
        .map(|(i, action)| Node::Post {
            action,
            on_true: i + 1,
            on_false: i + 1,
        })
        .collect();
    nodes.push(Node::Stop);
    ThreadGraph::new(nodes, 0).expect("chain is well formed")
}

/// The wide witness for flag `T`: `u = 2^k`, `v = 2^(k-1)`, `m = ems + k`,
/// five instructions (two working, three padding) and `3 + w` thread
/// states.
pub fn synthesize_wide(t: &TransformationTable) -> Result<Witness, SynthError> {
    let (k, l) = (t.k(), t.l());
    if k == 0 {
        return Err(SynthError::NoInternalHalf);
    }
    let words = 1usize << k;
    let half = words / 2;
    let ems = t.dms() as usize / 2;
    let params = SlsParams::new(k, l, ems + k as usize, words, half)?;
    let c = SlsLayout::new(&params)?;
    let (la, ld, sd, sa, rr) = (c.la.start, c.ld.start, c.sd.start, c.sa.start, c.rr);

    let init = Operation::from_fn("init", [], c.la.clone().chain([rr]), move |s| {
        for n in 0..words {
            s.set(la + n, n as u32);
        }
        s.set(rr, T);
    });
    let table = Arc::new(t.clone());
    let xform = Operation::from_fn(
        "xform",
        c.ld.clone(),
        c.sd.clone().chain(c.sa.clone()).chain([rr]),
        move |s| {
            let loaded: Vec<u64> = (0..words).map(|n| u64::from(s.get(ld + n))).collect();
            let image = table.apply(&loaded);
            for (j, &w) in image.iter().enumerate().take(half) {
                s.set(sd + j, w as u32);
                s.set(sa + j, j as u32);
            }
            s.set(rr, T);
        },
    );
    let mut ops = vec![("init".to_string(), init), ("xform".to_string(), xform)];
    for i in 0..3 {
        let name = format!("nop:{i}");
        ops.push((name.clone(), Operation::from_fn(name, [], [rr], move |s| s.set(rr, T))));
    }
    let machine = build_sls(params, ops)?;
    let thread = straight_line(
        std::iter::once(ActionId::named("init"))
            .chain((0..words).map(load_action))
            .chain([ActionId::named("xform")])
            .chain((0..half).map(store_action)),
    );
    Ok(Witness { machine, thread })
}
