//! Chip-firing games on directed multigraphs: the firing rule, closed
//! components, exhaustive configuration-space generation with shot-vectors,
//! and the text formats for graphs and configurations.

use std::collections::{BTreeSet, HashMap};

use crate::lattice::CoverDag;
use crate::{Error, Result};

/// A directed multigraph with edge multiplicities. Vertices are ordered
/// lexicographically by name; loops are allowed. A vertex whose only
/// out-edges are loops is a sink and never fires.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    names: Vec<String>,
    mult: Vec<Vec<u64>>,
    outdeg: Vec<u64>,
    indeg: Vec<u64>,
}

impl MultiGraph {
    /// Builds a graph from `(from, to, multiplicity)` triples; repeated
    /// pairs accumulate. `extra` declares vertices with no edges.
    pub fn from_edges(edges: &[(&str, &str, u64)], extra: &[&str]) -> MultiGraph {
        let mut names: BTreeSet<&str> = extra.iter().copied().collect();
        for &(u, v, _) in edges {
            names.insert(u);
            names.insert(v);
        }
        let names: Vec<String> = names.into_iter().map(|s| s.to_string()).collect();
        let index: HashMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let n = names.len();
        let mut mult = vec![vec![0u64; n]; n];
        for &(u, v, k) in edges {
            mult[index[u]][index[v]] += k;
        }
        let outdeg = (0..n).map(|v| mult[v].iter().sum()).collect();
        let indeg = (0..n).map(|v| (0..n).map(|u| mult[u][v]).sum()).collect();
        MultiGraph {
            names,
            mult,
            outdeg,
            indeg,
        }
    }

    /// Parses the graph text format: lines `U V K` with multiplicity
    /// K >= 1; a single-token line declares an isolated vertex; `#` starts
    /// a comment.
    pub fn parse(text: &str) -> Result<MultiGraph> {
        let mut edges = Vec::new();
        let mut extra = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens.len() {
                0 => continue,
                1 => extra.push(tokens[0]),
                3 => {
                    let k: u64 = tokens[2].parse().map_err(|_| Error::Parse {
                        line: lineno + 1,
                        msg: format!("bad multiplicity `{}`", tokens[2]),
                    })?;
                    if k == 0 {
                        return Err(Error::Parse {
                            line: lineno + 1,
                            msg: "multiplicity must be >= 1".into(),
                        });
                    }
                    edges.push((tokens[0], tokens[1], k));
                }
                n => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("expected `U V K`, found {n} tokens"),
                    })
                }
            }
        }
        Ok(Self::from_edges(&edges, &extra))
    }

    /// One `U V K` line per nonzero multiplicity, in vertex order, plus
    /// declarations for isolated vertices.
    pub fn dump(&self) -> String {
        let mut lines = Vec::new();
        let n = self.len();
        let mut mentioned = vec![false; n];
        for u in 0..n {
            for v in 0..n {
                if self.mult[u][v] > 0 {
                    lines.push(format!("{} {} {}", self.names[u], self.names[v], self.mult[u][v]));
                    mentioned[u] = true;
                    mentioned[v] = true;
                }
            }
        }
        for v in 0..n {
            if !mentioned[v] {
                lines.push(self.names[v].clone());
            }
        }
        lines.join("\n")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.names
            .binary_search_by(|probe| probe.as_str().cmp(name))
            .map_err(|_| Error::UnknownVertex(name.to_string()))
    }

    pub fn mult(&self, u: usize, v: usize) -> u64 {
        self.mult[u][v]
    }

    pub fn out_degree(&self, v: usize) -> u64 {
        self.outdeg[v]
    }

    pub fn in_degree(&self, v: usize) -> u64 {
        self.indeg[v]
    }

    /// A sink has no outgoing edge besides loops.
    pub fn is_sink(&self, v: usize) -> bool {
        self.outdeg[v] == self.mult[v][v]
    }

    /// Strongly connected components of size >= 2 with no edge leaving
    /// them; their absence guarantees a unique fixed point.
    pub fn closed_components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        // Kosaraju: forward finish order, then reverse reachability.
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            // Iterative post-order DFS.
            let mut stack = vec![(start, 0usize)];
            seen[start] = true;
            while let Some((u, next)) = stack.pop() {
                let mut advanced = false;
                for v in next..n {
                    if self.mult[u][v] > 0 && !seen[v] {
                        stack.push((u, v + 1));
                        stack.push((v, 0));
                        seen[v] = true;
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    order.push(u);
                }
            }
        }
        let mut comp = vec![usize::MAX; n];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &start in order.iter().rev() {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = groups.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut head = 0;
            while head < members.len() {
                let u = members[head];
                head += 1;
                for v in 0..n {
                    if self.mult[v][u] > 0 && comp[v] == usize::MAX {
                        comp[v] = id;
                        members.push(v);
                    }
                }
            }
            members.sort_unstable();
            groups.push(members);
        }
        let mut closed: Vec<Vec<usize>> = groups
            .into_iter()
            .filter(|members| members.len() >= 2)
            .filter(|members| {
                members.iter().all(|&u| {
                    (0..n).all(|v| self.mult[u][v] == 0 || members.contains(&v))
                })
            })
            .collect();
        closed.sort();
        closed
    }
}

/// Chips per vertex, aligned with a graph's vertex order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    chips: Vec<u64>,
}

impl Configuration {
    pub fn from_pairs(g: &MultiGraph, pairs: &[(&str, u64)]) -> Result<Configuration> {
        let mut chips = vec![0u64; g.len()];
        for &(name, n) in pairs {
            chips[g.index(name)?] += n;
        }
        Ok(Configuration { chips })
    }

    /// Parses the configuration text format: lines `V N`; vertices not
    /// mentioned hold zero chips.
    pub fn parse(g: &MultiGraph, text: &str) -> Result<Configuration> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens.len() {
                0 => continue,
                2 => {
                    let n: u64 = tokens[1].parse().map_err(|_| Error::Parse {
                        line: lineno + 1,
                        msg: format!("bad chip count `{}`", tokens[1]),
                    })?;
                    pairs.push((tokens[0].to_string(), n));
                }
                n => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("expected `V N`, found {n} tokens"),
                    })
                }
            }
        }
        let borrowed: Vec<(&str, u64)> = pairs.iter().map(|(s, n)| (s.as_str(), *n)).collect();
        Self::from_pairs(g, &borrowed)
    }

    pub fn dump(&self, g: &MultiGraph) -> String {
        self.chips
            .iter()
            .enumerate()
            .map(|(v, n)| format!("{} {}", g.name(v), n))
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn chips(&self) -> &[u64] {
        &self.chips
    }

    pub fn get(&self, v: usize) -> u64 {
        self.chips[v]
    }

    pub fn total(&self) -> u64 {
        self.chips.iter().sum()
    }
}

/// A vertex is firable when it has an outgoing non-loop edge and holds at
/// least out-degree many chips (loops included in the threshold).
pub fn firable(g: &MultiGraph, c: &Configuration, v: usize) -> bool {
    !g.is_sink(v) && c.chips[v] >= g.out_degree(v)
}

/// Sends one chip along each outgoing edge of `v`; loop chips return.
/// Panics if `v` is not firable: callers check first.
pub fn fire(g: &MultiGraph, c: &Configuration, v: usize) -> Configuration {
    assert!(firable(g, c, v), "fire() on a non-firable vertex");
    let mut chips = c.chips.clone();
    chips[v] -= g.out_degree(v) - g.mult(v, v);
    for u in 0..g.len() {
        if u != v {
            chips[u] += g.mult(v, u);
        }
    }
    let next = Configuration { chips };
    // Chips are conserved exactly: they only move along edges.
    assert_eq!(next.total(), c.total(), "chip conservation violated");
    next
}

/// The exhaustive configuration space reachable from an initial
/// configuration, deduplicated by chip vector, with fired-vertex labels on
/// covers and per-configuration shot-vectors.
#[derive(Debug, Clone)]
pub struct LabeledSpace {
    graph: MultiGraph,
    configs: Vec<Configuration>,
    shots: Vec<Vec<u64>>,
    covers: Vec<(usize, usize, usize)>,
    index: HashMap<Vec<u64>, usize>,
    top: usize,
}

/// Breadth-first closure of the reachable configurations. Refuses graphs
/// with a closed component (termination is not guaranteed there) and
/// stops with an error when more than `cap` configurations appear.
pub fn generate_space(g: &MultiGraph, o: &Configuration, cap: usize) -> Result<LabeledSpace> {
    assert!(cap > 0, "cap must be positive");
    assert_eq!(o.chips.len(), g.len(), "configuration/graph mismatch");
    let closed = g.closed_components();
    if let Some(comp) = closed.first() {
        return Err(Error::ClosedComponent(
            comp.iter().map(|&v| g.name(v).to_string()).collect(),
        ));
    }
    let nv = g.len();
    let mut configs = vec![o.clone()];
    let mut shots = vec![vec![0u64; nv]];
    let mut covers = Vec::new();
    let mut index = HashMap::new();
    index.insert(o.chips.clone(), 0usize);
    let mut head = 0;
    while head < configs.len() {
        let cur = head;
        head += 1;
        for v in 0..nv {
            if !firable(g, &configs[cur], v) {
                continue;
            }
            let next = fire(g, &configs[cur], v);
            let mut shot = shots[cur].clone();
            shot[v] += 1;
            let target = match index.get(&next.chips) {
                Some(&existing) => {
                    // Shot-vectors are execution-order independent; a
                    // rediscovery must agree with the stored vector.
                    if shots[existing] != shot {
                        return Err(Error::Internal(format!(
                            "shot-vector mismatch at rediscovered configuration {existing}"
                        )));
                    }
                    existing
                }
                None => {
                    if configs.len() == cap {
                        return Err(Error::CapExceeded(cap));
                    }
                    index.insert(next.chips.clone(), configs.len());
                    configs.push(next);
                    shots.push(shot);
                    configs.len() - 1
                }
            };
            covers.push((cur, target, v));
        }
    }
    let fixed: Vec<usize> = (0..configs.len())
        .filter(|&i| (0..nv).all(|v| !firable(g, &configs[i], v)))
        .collect();
    if fixed.len() != 1 {
        return Err(Error::Internal(format!(
            "expected a unique fixed point, found {}",
            fixed.len()
        )));
    }
    Ok(LabeledSpace {
        graph: g.clone(),
        configs,
        shots,
        covers,
        index,
        top: fixed[0],
    })
}

impl LabeledSpace {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn graph(&self) -> &MultiGraph {
        &self.graph
    }

    pub fn config(&self, i: usize) -> &Configuration {
        &self.configs[i]
    }

    pub fn shot(&self, i: usize) -> &[u64] {
        &self.shots[i]
    }

    /// Covers as `(lower, upper, fired vertex)` index triples.
    pub fn covers(&self) -> &[(usize, usize, usize)] {
        &self.covers
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn index_of(&self, c: &Configuration) -> Option<usize> {
        self.index.get(&c.chips).copied()
    }

    /// True iff no vertex fires more than once on the way to the fixed
    /// point.
    pub fn is_simple(&self) -> bool {
        self.shots[self.top].iter().all(|&s| s <= 1)
    }

    /// Vertices fired to reach configuration `i`.
    pub fn fired_set(&self, i: usize) -> BTreeSet<usize> {
        self.shots[i]
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s > 0)
            .map(|(v, _)| v)
            .collect()
    }

    /// Reachability between two configurations of the space, decided by
    /// the componentwise shot-vector order. The answer is cross-checked
    /// against cover-graph reachability; the two always agree.
    pub fn reachable(&self, c1: &Configuration, c2: &Configuration) -> Result<bool> {
        let i = self.index_of(c1).ok_or(Error::UnknownConfiguration)?;
        let j = self.index_of(c2).ok_or(Error::UnknownConfiguration)?;
        let by_shots = self.shots[i]
            .iter()
            .zip(&self.shots[j])
            .all(|(a, b)| a <= b);
        let by_covers = self.reaches(i, j);
        if by_shots != by_covers {
            return Err(Error::Internal(format!(
                "shot-vector order and cover reachability disagree on ({i}, {j})"
            )));
        }
        Ok(by_shots)
    }

    fn reaches(&self, from: usize, to: usize) -> bool {
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); self.configs.len()];
        for &(a, b, _) in &self.covers {
            succ[a].push(b);
        }
        let mut seen = vec![false; self.configs.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            if u == to {
                return true;
            }
            for &v in &succ[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        false
    }

    /// Deterministic element names for the configurations, usable as
    /// lattice element ids: discovery index, zero-padded so lexicographic
    /// order equals discovery order.
    pub fn element_names(&self) -> Vec<String> {
        let width = (self.configs.len().max(2) - 1).to_string().len();
        (0..self.configs.len())
            .map(|i| format!("n{i:0width$}"))
            .collect()
    }

    /// The space as a cover dag over `element_names`.
    pub fn to_cover_dag(&self) -> Result<CoverDag> {
        let names = self.element_names();
        let covers: Vec<(&str, &str)> = self
            .covers
            .iter()
            .map(|&(a, b, _)| (names[a].as_str(), names[b].as_str()))
            .collect();
        let all: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let dag = CoverDag::from_covers(&covers, &all)?;
        debug_assert!(dag.warnings().is_empty(), "space covers are irredundant");
        Ok(dag)
    }

    /// Cover list with fired-vertex labels, one `lower upper vertex` line
    /// per cover.
    pub fn dump_cover_list(&self) -> String {
        let names = self.element_names();
        let mut lines: Vec<String> = self
            .covers
            .iter()
            .map(|&(a, b, v)| format!("{} {} {}", names[a], names[b], self.graph.name(v)))
            .collect();
        if self.configs.len() == 1 {
            lines.push(names[0].clone());
        }
        lines.join("\n")
    }
}
