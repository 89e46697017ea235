//! Membership deciders for the three game-generated lattice classes, with
//! witness synthesis.
//!
//! Acceptance always means: the per-meet-irreducible systems (or their
//! joint symmetric variant) admit nonnegative integer solutions, and the
//! solutions are turned into a support graph whose vertices are the
//! meet-irreducibles plus a sink. The acyclic-support class is decided on
//! top of the general one through the auxiliary digraph on the
//! meet-irreducibles.
//!
//! The correspondence underneath: in any generating game each
//! meet-irreducible stands for a vertex *paired with one of its firing
//! ordinals* (the engine's shot-vectors carry exactly this bookkeeping).
//! The games synthesized here are simple, every ordinal is one, and the
//! pairing collapses to naming witness vertices by the meet-irreducibles
//! themselves — which is what makes the round-trip isomorphism check a
//! direct set-system comparison.

use std::collections::{BTreeMap, BTreeSet};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, ToPrimitive, Zero};

use crate::engine::{Configuration, MultiGraph};
use crate::feasibility::{
    build_e, build_e_prime, build_omega, integerize, solve_nonneg, Feasibility, IneqSystem,
    Solution, VarId,
};
use crate::lattice::{IrreducibleContext, Lattice, UldCertificate};
use crate::{Error, Result, SINK_ID};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Cfg,
    Asm,
    Acfg,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Cfg => "cfg",
            Model::Asm => "asm",
            Model::Acfg => "acfg",
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A synthesized game: the support graph, its initial configuration, and
/// the per-meet-irreducible integer solutions that produced it.
#[derive(Debug, Clone)]
pub struct GameWitness {
    pub model: Model,
    pub graph: MultiGraph,
    pub initial: Configuration,
    pub solutions: BTreeMap<String, Solution>,
}

/// Machine-checkable reason for a rejection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejection {
    /// The activation system of this meet-irreducible is infeasible.
    SystemInfeasible { m: String },
    /// The joint symmetric system is infeasible.
    OmegaInfeasible,
    /// The auxiliary digraph on the meet-irreducibles has a cycle.
    ScriptGCycle { cycle: Vec<String> },
}

impl Rejection {
    pub fn describe(&self) -> String {
        match self {
            Rejection::SystemInfeasible { m } => format!("E({m}) infeasible"),
            Rejection::OmegaInfeasible => "Omega infeasible".to_string(),
            Rejection::ScriptGCycle { cycle } => {
                format!("script-G cycle: {}", cycle.join(" "))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum Recognition {
    Accepted(Box<GameWitness>),
    Rejected(Rejection),
}

impl Recognition {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Recognition::Accepted(_))
    }

    pub fn witness(&self) -> Option<&GameWitness> {
        match self {
            Recognition::Accepted(w) => Some(w),
            Recognition::Rejected(_) => None,
        }
    }
}

fn to_u64(value: &BigInt) -> Result<u64> {
    value
        .to_u64()
        .ok_or_else(|| Error::Internal(format!("value {value} out of u64 range")))
}

fn empty_witness(model: Model) -> GameWitness {
    let graph = MultiGraph::from_edges(&[], &[SINK_ID]);
    let initial = Configuration::from_pairs(&graph, &[]).expect("sink only");
    GameWitness {
        model,
        graph,
        initial,
        solutions: BTreeMap::new(),
    }
}

/// Solves every per-m system, returning integerized solutions (and the
/// strict systems they satisfy) or the first infeasible meet-irreducible.
fn solve_per_m(
    lat: &Lattice,
    ctx: &IrreducibleContext,
) -> Result<std::result::Result<Vec<(IneqSystem, Solution)>, String>> {
    let mut out = Vec::new();
    for &m_elem in lat.meet_irreducibles() {
        let strict = build_e(lat, ctx, m_elem)?;
        let weak = build_e_prime(&strict);
        match solve_nonneg(&weak)? {
            Feasibility::Infeasible => {
                return Ok(Err(lat.name(m_elem).to_string()));
            }
            Feasibility::Feasible(sol) => {
                let int_sol = integerize(&sol, &strict)?;
                out.push((strict, int_sol));
            }
        }
    }
    Ok(Ok(out))
}

/// Builds the support graph and initial configuration from per-m integer
/// solutions, following the general construction: each edge variable adds
/// in-edges to its meet-irreducible, every vertex keeps enough sink edges
/// to dominate its in-degree.
fn build_cfg_witness(
    lat: &Lattice,
    model: Model,
    solutions: Vec<(IneqSystem, Solution)>,
) -> Result<GameWitness> {
    let m_names: Vec<String> = lat
        .meet_irreducibles()
        .iter()
        .map(|&m| lat.name(m).to_string())
        .collect();
    let mut edges: Vec<(String, String, u64)> = Vec::new();
    let mut w_of: BTreeMap<String, BigInt> = BTreeMap::new();
    for (name, (strict, sol)) in m_names.iter().zip(&solutions) {
        let mut into_m = BigInt::zero();
        for var in strict.vars() {
            if let VarId::E { from, into } = var {
                debug_assert_eq!(into, name);
                let k = sol.int(var);
                into_m += &k;
                let k = to_u64(&k)?;
                if k > 0 {
                    edges.push((from.clone(), name.clone(), k));
                }
            }
        }
        let w = sol.int(&VarId::W(name.clone()));
        let sink = to_u64(&(&w + &into_m))?;
        if sink == 0 {
            return Err(Error::Internal(format!(
                "vertex {name} would have no sink edge"
            )));
        }
        edges.push((name.clone(), SINK_ID.to_string(), sink));
        w_of.insert(name.clone(), w);
    }
    let borrowed: Vec<(&str, &str, u64)> = edges
        .iter()
        .map(|(a, b, k)| (a.as_str(), b.as_str(), *k))
        .collect();
    let graph = MultiGraph::from_edges(&borrowed, &[SINK_ID]);

    let mut chips: Vec<(String, u64)> = Vec::new();
    for v in 0..graph.len() {
        let name = graph.name(v);
        if name == SINK_ID {
            continue;
        }
        let deg = BigInt::from(graph.out_degree(v));
        let amount = if graph.in_degree(v) == 0 {
            deg
        } else {
            let need = &deg - &w_of[name];
            if need.is_negative() {
                return Err(Error::Internal(format!(
                    "initial chips at {name} would be negative"
                )));
            }
            need
        };
        chips.push((name.to_string(), to_u64(&amount)?));
    }
    let pairs: Vec<(&str, u64)> = chips.iter().map(|(s, n)| (s.as_str(), *n)).collect();
    let initial = Configuration::from_pairs(&graph, &pairs)?;
    let solutions = m_names
        .into_iter()
        .zip(solutions)
        .map(|(name, (_, sol))| (name, sol))
        .collect();
    Ok(GameWitness {
        model,
        graph,
        initial,
        solutions,
    })
}

/// Decides membership in the general class: every per-m system must have a
/// nonnegative integer solution, and then the solutions assemble into a
/// simple game generating the lattice.
pub fn recognize_cfg(
    lat: &Lattice,
    _cert: &UldCertificate,
    ctx: &IrreducibleContext,
) -> Result<Recognition> {
    if lat.len() == 1 {
        return Ok(Recognition::Accepted(Box::new(empty_witness(Model::Cfg))));
    }
    match solve_per_m(lat, ctx)? {
        Err(m) => Ok(Recognition::Rejected(Rejection::SystemInfeasible { m })),
        Ok(solutions) => {
            let witness = build_cfg_witness(lat, Model::Cfg, solutions)?;
            Ok(Recognition::Accepted(Box::new(witness)))
        }
    }
}

/// Decides membership in the sandpile (undirected) class through the joint
/// symmetric system.
pub fn recognize_asm(
    lat: &Lattice,
    _cert: &UldCertificate,
    ctx: &IrreducibleContext,
) -> Result<Recognition> {
    if lat.len() == 1 {
        return Ok(Recognition::Accepted(Box::new(empty_witness(Model::Asm))));
    }
    let strict = build_omega(lat, ctx)?;
    let weak = build_e_prime(&strict);
    let sol = match solve_nonneg(&weak)? {
        Feasibility::Infeasible => {
            return Ok(Recognition::Rejected(Rejection::OmegaInfeasible));
        }
        Feasibility::Feasible(sol) => integerize(&sol, &strict)?,
    };

    let m_names: Vec<String> = lat
        .meet_irreducibles()
        .iter()
        .map(|&m| lat.name(m).to_string())
        .collect();
    // Symmetric edges between meet-irreducibles; the equality constraints
    // make the two orientations of a registered pair agree.
    let mut pair_mult: BTreeMap<(String, String), u64> = BTreeMap::new();
    for (i, m1) in m_names.iter().enumerate() {
        for m2 in m_names.iter().skip(i + 1) {
            let fwd = sol.get(&VarId::E {
                from: m1.clone(),
                into: m2.clone(),
            });
            let bwd = sol.get(&VarId::E {
                from: m2.clone(),
                into: m1.clone(),
            });
            let k = match (fwd, bwd) {
                (Some(a), Some(b)) => {
                    if a != b {
                        return Err(Error::Internal(format!(
                            "asymmetric solution between {m1} and {m2}"
                        )));
                    }
                    a.to_integer()
                }
                (Some(a), None) | (None, Some(a)) => a.to_integer(),
                (None, None) => BigInt::zero(),
            };
            let k = to_u64(&k)?;
            if k > 0 {
                pair_mult.insert((m1.clone(), m2.clone()), k);
            }
        }
    }
    let mut edges: Vec<(String, String, u64)> = Vec::new();
    let mut incoming: BTreeMap<String, u64> = m_names.iter().map(|m| (m.clone(), 0)).collect();
    for ((m1, m2), k) in &pair_mult {
        edges.push((m1.clone(), m2.clone(), *k));
        edges.push((m2.clone(), m1.clone(), *k));
        *incoming.get_mut(m1).unwrap() += k;
        *incoming.get_mut(m2).unwrap() += k;
    }
    for name in &m_names {
        let w = sol.int(&VarId::W(name.clone()));
        let sink = to_u64(&w)? + incoming[name];
        debug_assert!(sink > 0);
        edges.push((name.clone(), SINK_ID.to_string(), sink));
    }
    let borrowed: Vec<(&str, &str, u64)> = edges
        .iter()
        .map(|(a, b, k)| (a.as_str(), b.as_str(), *k))
        .collect();
    let graph = MultiGraph::from_edges(&borrowed, &[SINK_ID]);

    let mut chips: Vec<(String, u64)> = Vec::new();
    for (pos, name) in m_names.iter().enumerate() {
        let v = graph.index(name)?;
        let deg = BigInt::from(graph.out_degree(v));
        let amount = if ctx.u_is_bottom(pos, lat) {
            deg
        } else {
            let need = &deg - sol.int(&VarId::W(name.clone()));
            if need.is_negative() {
                return Err(Error::Internal(format!(
                    "initial chips at {name} would be negative"
                )));
            }
            need
        };
        chips.push((name.clone(), to_u64(&amount)?));
    }
    let pairs: Vec<(&str, u64)> = chips.iter().map(|(s, n)| (s.as_str(), *n)).collect();
    let initial = Configuration::from_pairs(&graph, &pairs)?;

    // Split the joint solution into per-m pieces for the report.
    let mut solutions: BTreeMap<String, Solution> = BTreeMap::new();
    for name in &m_names {
        solutions.insert(name.clone(), Solution::new());
    }
    for (var, value) in sol.iter() {
        let owner = match var {
            VarId::W(m) => m,
            VarId::E { into, .. } => into,
        };
        solutions
            .get_mut(owner)
            .expect("every variable belongs to a meet-irreducible")
            .insert(var.clone(), value.clone());
    }
    Ok(Recognition::Accepted(Box::new(GameWitness {
        model: Model::Asm,
        graph,
        initial,
        solutions,
    })))
}

/// The auxiliary digraph on the meet-irreducibles: an edge (m1, m2) says
/// that m1 must fire before m2 can become active.
#[derive(Debug, Clone)]
pub struct ScriptG {
    names: Vec<String>,
    edges: Vec<(usize, usize)>,
}

pub fn build_script_g(lat: &Lattice, ctx: &IrreducibleContext) -> ScriptG {
    let meet = lat.meet_irreducibles();
    let names: Vec<String> = meet.iter().map(|&m| lat.name(m).to_string()).collect();
    let mut edges = Vec::new();
    for (p2, _) in meet.iter().enumerate() {
        let mut sources: BTreeSet<usize> = BTreeSet::new();
        for &a in ctx.u_set(p2) {
            sources.extend(ctx.outside(a).iter().copied());
        }
        for p1 in sources {
            debug_assert_ne!(p1, p2);
            edges.push((p1, p2));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    ScriptG { names, edges }
}

impl ScriptG {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Some cycle, if the digraph has one; `None` means acyclic.
    pub fn find_cycle(&self) -> Option<Vec<String>> {
        let n = self.names.len();
        let mut succ = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for &(a, b) in &self.edges {
            succ[a].push(b);
            indeg[b] += 1;
        }
        let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut removed = 0;
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            removed += 1;
            for &v in &succ[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push(v);
                }
            }
        }
        if removed == n {
            return None;
        }
        let stuck: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] > 0).collect();
        let start = *stuck.iter().next().unwrap();
        let mut path = Vec::new();
        let mut pos = BTreeMap::new();
        let mut cur = start;
        loop {
            if let Some(&at) = pos.get(&cur) {
                let cycle: Vec<String> = path[at..]
                    .iter()
                    .map(|&v: &usize| self.names[v].clone())
                    .collect();
                return Some(cycle);
            }
            pos.insert(cur, path.len());
            path.push(cur);
            cur = *succ[cur]
                .iter()
                .find(|v| stuck.contains(v))
                .expect("stuck vertex keeps a stuck successor");
        }
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }
}

/// Decides membership in the acyclic-support class: the lattice must be in
/// the general class and the auxiliary digraph must be acyclic; the
/// witness keeps only the activation-derived edge variables, which confines
/// the support graph to the auxiliary digraph plus sink edges.
pub fn recognize_acfg(
    lat: &Lattice,
    _cert: &UldCertificate,
    ctx: &IrreducibleContext,
) -> Result<Recognition> {
    if lat.len() == 1 {
        return Ok(Recognition::Accepted(Box::new(empty_witness(Model::Acfg))));
    }
    let solutions = match solve_per_m(lat, ctx)? {
        Err(m) => return Ok(Recognition::Rejected(Rejection::SystemInfeasible { m })),
        Ok(s) => s,
    };
    let script = build_script_g(lat, ctx);
    if let Some(cycle) = script.find_cycle() {
        return Ok(Recognition::Rejected(Rejection::ScriptGCycle { cycle }));
    }
    // Zero the variables that only came from the blocking side, then
    // re-tighten each threshold to the minimum activation sum.
    let meet = lat.meet_irreducibles();
    let mut reduced = Vec::with_capacity(solutions.len());
    for (pos, (strict, sol)) in solutions.into_iter().enumerate() {
        let m_name = lat.name(meet[pos]).to_string();
        let mut keep: BTreeSet<String> = BTreeSet::new();
        for &a in ctx.u_set(pos) {
            for &p in ctx.outside(a) {
                keep.insert(lat.name(meet[p]).to_string());
            }
        }
        let mut modified = Solution::new();
        for (var, value) in sol.iter() {
            let value = match var {
                VarId::E { from, .. } if !keep.contains(from) => BigRational::zero(),
                _ => value.clone(),
            };
            modified.insert(var.clone(), value);
        }
        if !ctx.u_is_bottom(pos, lat) {
            let mut best: Option<BigInt> = None;
            for &a in ctx.u_set(pos) {
                let sum: BigInt = ctx
                    .outside(a)
                    .iter()
                    .map(|&p| {
                        modified.int(&VarId::E {
                            from: lat.name(meet[p]).to_string(),
                            into: m_name.clone(),
                        })
                    })
                    .sum();
                best = Some(match best {
                    Some(b) => b.min(sum),
                    None => sum,
                });
            }
            let w = best.expect("nonempty activation family");
            modified.insert(VarId::W(m_name.clone()), BigRational::from_integer(w));
        }
        if let Err(violated) = strict.check(&modified)? {
            return Err(Error::Internal(format!(
                "reduced solution violates `{violated}`"
            )));
        }
        reduced.push((strict, modified));
    }
    let witness = build_cfg_witness(lat, Model::Acfg, reduced)?;
    if let Some(cycle) = support_cycle(&witness.graph) {
        return Err(Error::Internal(format!(
            "acyclic witness has a cycle through {}",
            cycle.join(" ")
        )));
    }
    Ok(Recognition::Accepted(Box::new(witness)))
}

/// Some directed cycle of the support graph (loops included), or `None`.
pub fn support_cycle(g: &MultiGraph) -> Option<Vec<String>> {
    let n = g.len();
    for v in 0..n {
        if g.mult(v, v) > 0 {
            return Some(vec![g.name(v).to_string()]);
        }
    }
    let mut indeg = vec![0usize; n];
    for u in 0..n {
        for v in 0..n {
            if u != v && g.mult(u, v) > 0 {
                indeg[v] += 1;
            }
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut head = 0;
    let mut removed = 0;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        removed += 1;
        for v in 0..n {
            if v != u && g.mult(u, v) > 0 {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push(v);
                }
            }
        }
    }
    if removed == n {
        return None;
    }
    let stuck: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] > 0).collect();
    let mut path = Vec::new();
    let mut pos = BTreeMap::new();
    let mut cur = *stuck.iter().next().unwrap();
    loop {
        if let Some(&at) = pos.get(&cur) {
            return Some(
                path[at..]
                    .iter()
                    .map(|&v: &usize| g.name(v).to_string())
                    .collect(),
            );
        }
        pos.insert(cur, path.len());
        path.push(cur);
        cur = (0..n)
            .find(|&v| v != cur && g.mult(cur, v) > 0 && stuck.contains(&v))
            .expect("stuck vertex keeps a stuck successor");
    }
}

/// Sufficient condition that every generating game is simple: the
/// conflict graph pairing the labels of sibling covers must be complete.
pub fn simple_only_sufficient(lat: &Lattice, cert: &UldCertificate) -> bool {
    let m_count = lat.meet_irreducibles().len();
    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for x in 0..lat.len() {
        let ups = lat.upper_covers(x);
        for (i, &y1) in ups.iter().enumerate() {
            for &y2 in ups.iter().skip(i + 1) {
                let l1 = cert.label(x, y1).expect("certified cover");
                let l2 = cert.label(x, y2).expect("certified cover");
                debug_assert_ne!(l1, l2);
                pairs.insert((l1.min(l2), l1.max(l2)));
            }
        }
    }
    pairs.len() == m_count * m_count.saturating_sub(1) / 2
}
