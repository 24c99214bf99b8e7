use num_bigint::BigUint;

use super::{canonical, ActionId, Node, ThreadGraph};

/// Streams one canonical graph per bisimulation class of threads over
/// `alphabet` with at most `max_states` distinct states.
///
/// Raw graphs with `n` nodes are generated in odometer order; a raw graph is
/// yielded exactly when it already is its own canonical form, so every
/// class appears once and no deduplication table is kept.
#[derive(Debug, Clone)]
pub struct ThreadEnumerator {
    alphabet: Vec<ActionId>,
    max_states: usize,
    size: usize,
    digits: Vec<usize>,
    exhausted: bool,
}

pub fn enumerate_threads(alphabet: &[ActionId], max_states: usize) -> ThreadEnumerator {
    let mut alphabet = alphabet.to_vec();
    alphabet.sort();
    alphabet.dedup();
    ThreadEnumerator {
        alphabet,
        max_states,
        size: 1,
        digits: vec![0],
        exhausted: max_states == 0,
    }
}

/// Number of raw graphs the enumerator walks through for the given
/// alphabet size and state bound.
pub fn raw_search_space(alphabet_size: usize, max_states: usize) -> BigUint {
    (1..=max_states)
        .map(|n| BigUint::from(2 + alphabet_size * n * n).pow(n as u32))
        .sum()
}

impl ThreadEnumerator {
    fn choices(&self) -> usize {
        2 + self.alphabet.len() * self.size * self.size
    }

    fn decode(&self) -> ThreadGraph {
        let n = self.size;
        let nodes = self
            .digits
            .iter()
            .map(|&d| match d {
                0 => Node::Stop,
                1 => Node::Dead,
                d => {
                    let d = d - 2;
                    let (a, rest) = (d / (n * n), d % (n * n));
                    Node::Post {
                        action: self.alphabet[a].clone(),
                        on_true: rest / n,
                        on_false: rest % n,
                    }
                }
            })
            .collect();
        ThreadGraph { nodes, entry: 0 }
    }

    fn advance(&mut self) {
        let base = self.choices();
        for d in self.digits.iter_mut() {
            *d += 1;
            if *d < base {
                return;
            }
            *d = 0;
        }
        self.size += 1;
        if self.size > self.max_states {
            self.exhausted = true;
        } else {
            self.digits = vec![0; self.size];
        }
    }
}

impl Iterator for ThreadEnumerator {
    type Item = ThreadGraph;

    fn next(&mut self) -> Option<ThreadGraph> {
        while !self.exhausted {
            let raw = self.decode();
            self.advance();
            // unreachable nodes would be trimmed away, so such graphs are
            // never canonical at this size
            if super::reachable(&raw.nodes, 0).len() != raw.nodes.len() {
                continue;
            }
            if canonical(&raw) == raw {
                return Some(raw);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thread::{bisimilar, distinct_states};

    fn alphabet(n: usize) -> Vec<ActionId> {
        (0..n).map(|i| ActionId::named(format!("a{i}"))).collect()
    }

    /// Independent oracle: enumerate every raw graph, keep one per
    /// bisimulation class by pairwise comparison.
    fn brute_force_classes(n_actions: usize, e: usize) -> Vec<ThreadGraph> {
        let acts = alphabet(n_actions);
        let mut classes: Vec<ThreadGraph> = Vec::new();
        for n in 1..=e {
            let base = 2 + n_actions * n * n;
            let total = base.pow(n as u32);
            for code in 0..total {
                let mut c = code;
                let mut nodes = Vec::with_capacity(n);
                for _ in 0..n {
                    let d = c % base;
                    c /= base;
                    nodes.push(match d {
                        0 => Node::Stop,
                        1 => Node::Dead,
                        d => {
                            let d = d - 2;
                            Node::Post {
                                action: acts[d / (n * n)].clone(),
                                on_true: (d % (n * n)) / n,
                                on_false: d % n,
                            }
                        }
                    });
                }
                let g = ThreadGraph::new(nodes, 0).unwrap();
                if distinct_states(&g) > e {
                    continue;
                }
                if !classes.iter().any(|h| bisimilar(h, &g, false)) {
                    classes.push(g);
                }
            }
        }
        classes
    }

    #[test]
    fn single_action_single_state() {
        let got: Vec<_> = enumerate_threads(&alphabet(1), 1).collect();
        assert_eq!(got.len(), 3);
        assert!(got.contains(&ThreadGraph::stop()));
        assert!(got.contains(&ThreadGraph::dead()));
    }

    #[test]
    fn empty_alphabet_yields_constants() {
        assert_eq!(enumerate_threads(&[], 5).count(), 2);
        assert_eq!(enumerate_threads(&alphabet(2), 0).count(), 0);
    }

    #[test]
    fn matches_brute_force_oracle() {
        for (n, e) in [(1, 1), (1, 2), (2, 2), (1, 3)] {
            let fast: Vec<_> = enumerate_threads(&alphabet(n), e).collect();
            let oracle = brute_force_classes(n, e);
            assert_eq!(fast.len(), oracle.len(), "alphabet {n}, e {e}");
            for (i, g) in fast.iter().enumerate() {
                for h in &fast[i + 1..] {
                    assert!(!bisimilar(g, h, false));
                }
            }
        }
    }

    #[test]
    fn count_within_formula_bound() {
        let count = enumerate_threads(&alphabet(3), 2).count();
        assert!(count <= 196, "{count}");
        assert_eq!(raw_search_space(3, 2), BigUint::from(5u32 + 196));
    }
}
