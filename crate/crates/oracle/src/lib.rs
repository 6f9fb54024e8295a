//! Brute-force reference implementations for checking the engine.
//!
//! Everything here works on plain strings and dense vectors and shares no code
//! with `bldd-core`: a bug in the engine's sparse markings, adjacency index or
//! enumeration cannot leak into these answers.

use std::collections::{BTreeMap, BTreeSet, HashSet};

pub mod gen;

/// Sparse marking used at the API boundary: place id to nonzero count.
pub type RefMarking = BTreeMap<String, u32>;

#[derive(Debug, Clone)]
pub struct RefNet {
    places: Vec<String>,
    transitions: Vec<String>,
    /// pre[t][p], post[t][p]
    pre: Vec<Vec<u32>>,
    post: Vec<Vec<u32>>,
}

impl RefNet {
    /// `arcs` are (source id, target id, weight). Ids are looked up in the
    /// place and transition lists to decide the arc direction.
    pub fn new(places: &[String], transitions: &[String], arcs: &[(String, String, u32)]) -> Self {
        let mut pre = vec![vec![0; places.len()]; transitions.len()];
        let mut post = vec![vec![0; places.len()]; transitions.len()];
        let place_idx = |id: &str| places.iter().position(|p| p == id);
        let trans_idx = |id: &str| transitions.iter().position(|t| t == id);
        for (source, target, weight) in arcs {
            if let (Some(p), Some(t)) = (place_idx(source), trans_idx(target)) {
                pre[t][p] += weight;
            } else if let (Some(t), Some(p)) = (trans_idx(source), place_idx(target)) {
                post[t][p] += weight;
            } else {
                panic!("arc {source}->{target} is not place/transition");
            }
        }
        Self {
            places: places.to_vec(),
            transitions: transitions.to_vec(),
            pre,
            post,
        }
    }

    fn dense(&self, marking: &RefMarking) -> Vec<u32> {
        let mut v = vec![0; self.places.len()];
        for (place, count) in marking {
            let i = self.places.iter().position(|p| p == place).expect("known place");
            v[i] = *count;
        }
        v
    }

    fn sparse(&self, dense: &[u32]) -> RefMarking {
        self.places
            .iter()
            .zip(dense)
            .filter(|(_, n)| **n > 0)
            .map(|(p, n)| (p.clone(), *n))
            .collect()
    }

    fn enabled_dense(&self, m: &[u32]) -> Vec<usize> {
        (0..self.transitions.len())
            .filter(|&t| self.pre[t].iter().zip(m).all(|(need, have)| have >= need))
            .collect()
    }

    fn fire_dense(&self, m: &[u32], t: usize) -> Vec<u32> {
        m.iter()
            .enumerate()
            .map(|(p, n)| n - self.pre[t][p] + self.post[t][p])
            .collect()
    }

    /// Enabled transition ids, sorted.
    pub fn enabled(&self, marking: &RefMarking) -> Vec<String> {
        let m = self.dense(marking);
        let mut ids: Vec<String> = self
            .enabled_dense(&m)
            .into_iter()
            .map(|t| self.transitions[t].clone())
            .collect();
        ids.sort();
        ids
    }

    /// Successor marking, or `None` if the transition is not enabled.
    pub fn fire(&self, marking: &RefMarking, transition: &str) -> Option<RefMarking> {
        let t = self.transitions.iter().position(|x| x == transition)?;
        let m = self.dense(marking);
        if !self.enabled_dense(&m).contains(&t) {
            return None;
        }
        Some(self.sparse(&self.fire_dense(&m, t)))
    }

    /// Every reachable marking (set semantics) and whether `bound` was hit.
    pub fn reachable(&self, start: &RefMarking, bound: usize) -> (BTreeSet<RefMarking>, bool) {
        let start = self.dense(start);
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        seen.insert(start.clone());
        let mut stack = vec![start];
        while let Some(m) = stack.pop() {
            for t in self.enabled_dense(&m) {
                let next = self.fire_dense(&m, t);
                if !seen.contains(&next) {
                    if seen.len() >= bound {
                        return (seen.iter().map(|d| self.sparse(d)).collect(), true);
                    }
                    seen.insert(next.clone());
                    stack.push(next);
                }
            }
        }
        (seen.iter().map(|d| self.sparse(d)).collect(), false)
    }

    /// All firing sequences (every interleaving) from `start` that reach
    /// exactly `end`, with no sequence longer than `max_len`.
    pub fn complete_runs(&self, start: &RefMarking, end: &RefMarking, max_len: usize) -> Vec<Vec<String>> {
        let end = self.dense(end);
        let mut runs = Vec::new();
        let mut path = Vec::new();
        self.runs_from(&self.dense(start), &end, max_len, &mut path, &mut runs);
        runs
    }

    fn runs_from(&self, m: &[u32], end: &[u32], max_len: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<String>>) {
        if m == end {
            out.push(path.iter().map(|&t| self.transitions[t].clone()).collect());
            return;
        }
        if path.len() == max_len {
            return;
        }
        for t in self.enabled_dense(m) {
            path.push(t);
            self.runs_from(&self.fire_dense(m, t), end, max_len, path, out);
            path.pop();
        }
    }

    fn neighbourhood(&self, t: usize) -> Vec<usize> {
        (0..self.places.len())
            .filter(|&p| self.pre[t][p] > 0 || self.post[t][p] > 0)
            .collect()
    }

    /// Two transitions are dependent when they touch a common place.
    pub fn dependent(&self, a: &str, b: &str) -> bool {
        let ia = self.transitions.iter().position(|x| x == a).expect("known");
        let ib = self.transitions.iter().position(|x| x == b).expect("known");
        if ia == ib {
            return true;
        }
        let na = self.neighbourhood(ia);
        self.neighbourhood(ib).iter().any(|p| na.contains(p))
    }

    /// Lexicographically least linearisation of the trace-equivalence class
    /// of `run` (repeatedly pull forward the smallest id that commutes with
    /// everything before it).
    pub fn lex_normal_form(&self, run: &[String]) -> Vec<String> {
        let mut rest: Vec<String> = run.to_vec();
        let mut out = Vec::with_capacity(rest.len());
        while !rest.is_empty() {
            let mut best: Option<usize> = None;
            for i in 0..rest.len() {
                let free = (0..i).all(|j| !self.dependent(&rest[j], &rest[i]));
                if free && best.is_none_or(|b| rest[i] < rest[b]) {
                    best = Some(i);
                }
            }
            out.push(rest.remove(best.expect("first element is always free")));
        }
        out
    }
}

/// Nodes lying on some directed path from `source` to `sink`, found by DFS
/// forward from the source and DFS backward from the sink. `edges` are
/// (from, to) node-id pairs.
pub fn nodes_on_source_sink_paths(edges: &[(String, String)], source: &str, sink: &str) -> BTreeSet<String> {
    fn dfs(start: &str, edges: &[(String, String)], forward: bool) -> BTreeSet<String> {
        let mut seen = BTreeSet::from([start.to_string()]);
        let mut stack = vec![start.to_string()];
        while let Some(n) = stack.pop() {
            for (a, b) in edges {
                let (from, to) = if forward { (a, b) } else { (b, a) };
                if *from == n && seen.insert(to.clone()) {
                    stack.push(to.clone());
                }
            }
        }
        seen
    }
    let fwd = dfs(source, edges, true);
    let bwd = dfs(sink, edges, false);
    fwd.intersection(&bwd).cloned().collect()
}

/// (in-degree, out-degree) per node id from an edge list.
pub fn degree_counts(edges: &[(String, String)]) -> BTreeMap<String, (usize, usize)> {
    let mut deg: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let unique: BTreeSet<&(String, String)> = edges.iter().collect();
    for (a, b) in unique {
        deg.entry(a.clone()).or_default().1 += 1;
        deg.entry(b.clone()).or_default().0 += 1;
    }
    deg
}

/// Net as plain lists: (id, label) nodes and (source, target) arcs of
/// weight one.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledNet {
    pub id: String,
    pub places: Vec<(String, String)>,
    pub transitions: Vec<(String, String)>,
    pub arcs: Vec<(String, String)>,
}

impl LabeledNet {
    pub fn ref_net(&self) -> RefNet {
        let places: Vec<String> = self.places.iter().map(|(id, _)| id.clone()).collect();
        let transitions: Vec<String> = self.transitions.iter().map(|(id, _)| id.clone()).collect();
        let arcs: Vec<(String, String, u32)> = self.arcs.iter().map(|(a, b)| (a.clone(), b.clone(), 1)).collect();
        RefNet::new(&places, &transitions, &arcs)
    }
}

/// Whether some bijection of places preserving labels makes the two nets'
/// transitions match as (label, input places, output places) multisets.
/// Exhaustive search over label-respecting place bijections.
pub fn label_isomorphic(a: &LabeledNet, b: &LabeledNet) -> bool {
    if a.places.len() != b.places.len() || a.transitions.len() != b.transitions.len() || a.arcs.len() != b.arcs.len() {
        return false;
    }
    let mut la: Vec<&String> = a.places.iter().map(|(_, l)| l).collect();
    let mut lb: Vec<&String> = b.places.iter().map(|(_, l)| l).collect();
    la.sort();
    lb.sort();
    if la != lb {
        return false;
    }

    // (label, sorted input ids, sorted output ids) per transition.
    fn signatures(net: &LabeledNet, rename: &dyn Fn(&str) -> String) -> Vec<(String, Vec<String>, Vec<String>)> {
        let mut out: Vec<_> = net
            .transitions
            .iter()
            .map(|(id, label)| {
                let mut ins: Vec<String> = net
                    .arcs
                    .iter()
                    .filter(|(_, t)| t == id)
                    .map(|(p, _)| rename(p))
                    .collect();
                let mut outs: Vec<String> = net
                    .arcs
                    .iter()
                    .filter(|(t, _)| t == id)
                    .map(|(_, p)| rename(p))
                    .collect();
                ins.sort();
                outs.sort();
                (label.clone(), ins, outs)
            })
            .collect();
        out.sort();
        out
    }
    let target = signatures(b, &|p| p.to_string());

    fn search(
        a: &LabeledNet,
        b: &LabeledNet,
        index: usize,
        mapping: &mut BTreeMap<String, String>,
        used: &mut HashSet<String>,
        target: &[(String, Vec<String>, Vec<String>)],
    ) -> bool {
        if index == a.places.len() {
            return signatures(a, &|p| mapping[p].clone()) == target;
        }
        let (pa, label) = &a.places[index];
        for (pb, lb) in &b.places {
            if lb != label || used.contains(pb) {
                continue;
            }
            mapping.insert(pa.clone(), pb.clone());
            used.insert(pb.clone());
            if search(a, b, index + 1, mapping, used, target) {
                return true;
            }
            used.remove(pb);
            mapping.remove(pa);
        }
        false
    }
    search(a, b, 0, &mut BTreeMap::new(), &mut HashSet::new(), &target)
}
