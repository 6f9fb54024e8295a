//! Random workflow nets for property and acceptance tests.
//!
//! Every generator builds a net with one source and one sink in which every
//! node lies on a source-to-sink path. Labels are unique.

use rand::seq::IndexedRandom;
use rand::{Rng, RngExt};

use crate::LabeledNet;

struct Builder {
    net: LabeledNet,
}

impl Builder {
    fn new(id: &str) -> Self {
        Self {
            net: LabeledNet {
                id: id.to_string(),
                ..LabeledNet::default()
            },
        }
    }

    fn place(&mut self) -> String {
        let n = self.net.places.len();
        let id = format!("p{n}");
        self.net.places.push((id.clone(), format!("state {n}")));
        id
    }

    fn transition(&mut self, inputs: &[&str], outputs: &[&str]) -> String {
        let n = self.net.transitions.len();
        let id = format!("t{n}");
        self.net.transitions.push((id.clone(), format!("event {n}")));
        for p in inputs {
            self.net.arcs.push((p.to_string(), id.clone()));
        }
        for p in outputs {
            self.net.arcs.push((id.clone(), p.to_string()));
        }
        id
    }

    /// Chain of `steps` transitions from `from` to `to`.
    fn chain(&mut self, from: &str, to: &str, steps: usize) {
        let mut current = from.to_string();
        for i in 0..steps {
            let next = if i + 1 == steps { to.to_string() } else { self.place() };
            self.transition(&[&current], &[&next]);
            current = next;
        }
    }
}

/// Sequence of `places` places (at least 2) joined by transitions.
pub fn linear_net(places: usize) -> LabeledNet {
    assert!(places >= 2);
    let mut b = Builder::new("linear");
    let first = b.place();
    let mut last = first;
    for _ in 1..places {
        let next = b.place();
        b.transition(&[&last], &[&next]);
        last = next;
    }
    b.net
}

/// A prefix chain, one exclusive choice between branches that are chains
/// of their own, a merge place, and a suffix chain. At most `max_places`
/// places (at least 3).
pub fn single_or_split_net<R: Rng>(rng: &mut R, max_places: usize) -> LabeledNet {
    assert!(max_places >= 3);
    let mut b = Builder::new("choice");
    // Budget: source (or prefix places up to the split) + merge place.
    let mut budget = max_places - 2;
    let prefix = rng.random_range(0..=budget.min(2));
    budget -= prefix;
    let source = b.place();
    let mut split = source.clone();
    for _ in 0..prefix {
        let next = b.place();
        b.transition(&[&split], &[&next]);
        split = next;
    }
    let merge = b.place();
    let suffix = if budget > 0 {
        rng.random_range(0..=budget.min(2))
    } else {
        0
    };
    budget -= suffix;
    let branches = rng.random_range(2..=3);
    for _ in 0..branches {
        // A branch of n transitions uses n - 1 internal places.
        let internal = if budget > 0 {
            rng.random_range(0..=budget.min(2))
        } else {
            0
        };
        budget -= internal;
        b.chain(&split, &merge, internal + 1);
    }
    let mut last = merge;
    for _ in 0..suffix {
        let next = b.place();
        b.transition(&[&last], &[&next]);
        last = next;
    }
    b.net
}

/// `k` choices in a row, each between two one-step alternatives.
pub fn choice_ladder(k: usize) -> LabeledNet {
    let mut b = Builder::new("ladder");
    let mut current = b.place();
    for _ in 0..k {
        let next = b.place();
        b.transition(&[&current], &[&next]);
        b.transition(&[&current], &[&next]);
        current = next;
    }
    let end = b.place();
    b.transition(&[&current], &[&end]);
    b.net
}

/// Block-structured net grown from a single transition by `refinements`
/// random rewrites: sequence, choice, parallel fork/join, and a loop through
/// an inner place. Such nets are sound workflow nets.
pub fn block_net<R: Rng>(rng: &mut R, refinements: usize) -> LabeledNet {
    let mut b = Builder::new("block");
    let i = b.place();
    let o = b.place();
    b.transition(&[&i], &[&o]);
    let mut loops = 0;
    for _ in 0..refinements {
        let (tid, _) = b.net.transitions.choose(rng).cloned().expect("non-empty");
        let inputs: Vec<String> = b
            .net
            .arcs
            .iter()
            .filter(|(_, t)| *t == tid)
            .map(|(p, _)| p.clone())
            .collect();
        let outputs: Vec<String> = b
            .net
            .arcs
            .iter()
            .filter(|(t, _)| *t == tid)
            .map(|(_, p)| p.clone())
            .collect();
        let inputs: Vec<&str> = inputs.iter().map(String::as_str).collect();
        let outputs: Vec<&str> = outputs.iter().map(String::as_str).collect();
        match rng.random_range(0..4) {
            0 => {
                // t: I -> O becomes t: I -> m, t': m -> O
                let m = b.place();
                b.net.arcs.retain(|(s, _)| *s != tid);
                b.net.arcs.push((tid.clone(), m.clone()));
                b.transition(&[&m], &outputs);
            }
            1 => {
                b.transition(&inputs, &outputs);
            }
            2 => {
                // t: I -> O becomes t: I -> {x, y}, x -> x', y -> y', {x', y'} -> O
                let (x, y, x2, y2) = (b.place(), b.place(), b.place(), b.place());
                b.net.arcs.retain(|(s, _)| *s != tid);
                b.net.arcs.push((tid.clone(), x.clone()));
                b.net.arcs.push((tid.clone(), y.clone()));
                b.transition(&[&x], &[&x2]);
                b.transition(&[&y], &[&y2]);
                b.transition(&[&x2, &y2], &outputs);
            }
            _ => {
                // Loop on an output place that is not the sink: redo via a
                // fresh place. At most two loops keep enumeration small.
                let inner = outputs.iter().find(|p| **p != o);
                match inner {
                    Some(p) if loops < 2 => {
                        let p = p.to_string();
                        let back = b.place();
                        b.transition(&[&p], &[&back]);
                        b.transition(&[&back], &[&p]);
                        loops += 1;
                    }
                    _ => {
                        b.transition(&inputs, &outputs);
                    }
                }
            }
        }
    }
    b.net
}
