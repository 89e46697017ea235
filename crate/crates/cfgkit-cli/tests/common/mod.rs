//! Shared fixtures and helpers for the CLI and acceptance suites.
#![allow(dead_code)]

use cfgkit::engine::{Configuration, MultiGraph};
use cfgkit::feasibility::{BigInt, BigRational, IneqSystem, Relation, Solution, VarId};

pub const RUNNING_LATTICE: &str = include_str!("../fixtures/running.lat");

pub fn w(m: &str) -> VarId {
    VarId::W(m.to_string())
}

pub fn e(from: &str, into: &str) -> VarId {
    VarId::E {
        from: from.to_string(),
        into: into.to_string(),
    }
}

/// The joint symmetric system of the six-meet-irreducible lattice known to
/// lie outside the sandpile class, transcribed constraint by constraint
/// (nineteen lines, including the repeated symmetry equality).
pub fn omega_c32_c37() -> IneqSystem {
    let mut sys = IneqSystem::new();
    let var = |sys: &mut IneqSystem, v: VarId| sys.add_var(v);

    let w32 = var(&mut sys, w("c32"));
    let w33 = var(&mut sys, w("c33"));
    let w37 = var(&mut sys, w("c37"));
    let w34 = var(&mut sys, w("c34"));
    let e32_34 = var(&mut sys, e("c32", "c34"));
    let e36_34 = var(&mut sys, e("c36", "c34"));
    let e37_34 = var(&mut sys, e("c37", "c34"));
    let e33_34 = var(&mut sys, e("c33", "c34"));
    let e35_34 = var(&mut sys, e("c35", "c34"));
    let w35 = var(&mut sys, w("c35"));
    let e33_35 = var(&mut sys, e("c33", "c35"));
    let e34_35 = var(&mut sys, e("c34", "c35"));
    let e37_35 = var(&mut sys, e("c37", "c35"));
    let e32_35 = var(&mut sys, e("c32", "c35"));
    let e36_35 = var(&mut sys, e("c36", "c35"));
    let w36 = var(&mut sys, w("c36"));
    let e32_36 = var(&mut sys, e("c32", "c36"));
    let e33_36 = var(&mut sys, e("c33", "c36"));
    let e35_36 = var(&mut sys, e("c35", "c36"));
    let e34_36 = var(&mut sys, e("c34", "c36"));
    let e37_36 = var(&mut sys, e("c37", "c36"));

    sys.push(vec![(w32, 1)], Relation::Ge, 1);
    sys.push(vec![(w33, 1)], Relation::Ge, 1);
    sys.push(vec![(w37, 1)], Relation::Ge, 1);
    // w34 strictly dominates one blocked sum and is capped by three
    // activation sums.
    sys.push(
        vec![(e32_34, 1), (e36_34, 1), (e37_34, 1), (w34, -1)],
        Relation::Lt,
        0,
    );
    sys.push(vec![(w34, 1), (e33_34, -1)], Relation::Le, 0);
    sys.push(vec![(w34, 1), (e32_34, -1), (e35_34, -1)], Relation::Le, 0);
    sys.push(
        vec![(w34, 1), (e35_34, -1), (e36_34, -1), (e37_34, -1)],
        Relation::Le,
        0,
    );
    sys.push(
        vec![(e33_35, 1), (e34_35, 1), (e37_35, 1), (w35, -1)],
        Relation::Lt,
        0,
    );
    sys.push(vec![(w35, 1), (e32_35, -1)], Relation::Le, 0);
    sys.push(
        vec![(w35, 1), (e33_35, -1), (e34_35, -1), (e36_35, -1)],
        Relation::Le,
        0,
    );
    sys.push(vec![(w35, 1), (e36_35, -1), (e37_35, -1)], Relation::Le, 0);
    sys.push(
        vec![(e32_36, 1), (e33_36, 1), (e35_36, 1), (w36, -1)],
        Relation::Lt,
        0,
    );
    sys.push(vec![(w36, 1), (e33_36, -1), (e34_36, -1)], Relation::Le, 0);
    sys.push(
        vec![(w36, 1), (e32_36, -1), (e34_36, -1), (e35_36, -1)],
        Relation::Le,
        0,
    );
    sys.push(vec![(w36, 1), (e37_36, -1)], Relation::Le, 0);
    sys.push(vec![(e34_35, 1), (e35_34, -1)], Relation::Eq, 0);
    sys.push(vec![(e34_36, 1), (e36_34, -1)], Relation::Eq, 0);
    sys.push(vec![(e35_36, 1), (e36_35, -1)], Relation::Eq, 0);
    sys.push(vec![(e34_36, 1), (e36_34, -1)], Relation::Eq, 0);
    sys
}

/// The printed integer solution of the running lattice's joint system:
/// every variable 1 except the two pair variables that vanish.
pub fn running_omega_solution() -> Solution {
    let mut sol = Solution::new();
    let one = BigRational::from_integer(BigInt::from(1));
    let zero = BigRational::from_integer(BigInt::from(0));
    for m in ["c6", "c7", "c8", "c9"] {
        sol.insert(w(m), one.clone());
    }
    sol.insert(e("c8", "c6"), one.clone());
    sol.insert(e("c7", "c6"), one.clone());
    sol.insert(e("c9", "c6"), zero.clone());
    sol.insert(e("c9", "c7"), one.clone());
    sol.insert(e("c6", "c7"), one.clone());
    sol.insert(e("c8", "c7"), zero);
    sol
}

/// Splits a joint symmetric system into its per-meet-irreducible blocks
/// (symmetry equalities dropped): each non-equality constraint belongs to
/// the meet-irreducible of its threshold variable.
pub fn omega_blocks(omega: &IneqSystem) -> Vec<(String, IneqSystem)> {
    let mut order: Vec<String> = Vec::new();
    let mut rows: std::collections::BTreeMap<String, Vec<&cfgkit::feasibility::LinearConstraint>> =
        Default::default();
    for c in omega.constraints() {
        let owner = c.coeffs.iter().find_map(|&(ix, _)| match &omega.vars()[ix] {
            VarId::W(m) => Some(m.clone()),
            VarId::E { .. } => None,
        });
        let Some(owner) = owner else { continue };
        if !rows.contains_key(&owner) {
            order.push(owner.clone());
        }
        rows.entry(owner).or_default().push(c);
    }
    order
        .into_iter()
        .map(|m| {
            let mut sys = IneqSystem::new();
            let mut vars: Vec<VarId> = rows[&m]
                .iter()
                .flat_map(|c| c.coeffs.iter().map(|&(ix, _)| omega.vars()[ix].clone()))
                .collect();
            vars.sort();
            vars.dedup();
            for v in vars {
                sys.add_var(v);
            }
            for c in &rows[&m] {
                let coeffs: Vec<(usize, i64)> = c
                    .coeffs
                    .iter()
                    .map(|&(ix, k)| (sys.var_index(&omega.vars()[ix]).unwrap(), k))
                    .collect();
                sys.push(coeffs, c.relation, c.rhs);
            }
            (m, sys)
        })
        .collect()
}

/// The general game construction from independent block solutions: each
/// edge variable contributes in-edges to its meet-irreducible, every
/// vertex gets sink edges for its threshold plus its in-degree, and the
/// initial configuration is the out-degree minus the threshold wherever
/// the vertex has in-edges.
pub fn cfg_from_blocks(blocks: &[(String, IneqSystem)]) -> (MultiGraph, Configuration) {
    use cfgkit::feasibility::{build_e_prime, integerize, solve_nonneg, Feasibility};
    let mut edges: Vec<(String, String, u64)> = Vec::new();
    let mut w_of: std::collections::BTreeMap<String, u64> = Default::default();
    let value = |sol: &Solution, v: &VarId| -> u64 {
        let r = sol.get(v).expect("solved variable");
        assert!(r.is_integer());
        r.to_integer().try_into().expect("fixture-sized values")
    };
    for (m, strict) in blocks {
        let Feasibility::Feasible(sol) = solve_nonneg(&build_e_prime(strict)).unwrap() else {
            panic!("block {m} must be feasible");
        };
        let sol = integerize(&sol, strict).unwrap();
        let mut incoming = 0u64;
        for var in strict.vars() {
            if let VarId::E { from, .. } = var {
                let k = value(&sol, var);
                incoming += k;
                if k > 0 {
                    edges.push((from.clone(), m.clone(), k));
                }
            }
        }
        let w_val = value(&sol, &w(m));
        edges.push((m.clone(), cfgkit::SINK_ID.to_string(), w_val + incoming));
        w_of.insert(m.clone(), w_val);
    }
    let borrowed: Vec<(&str, &str, u64)> = edges
        .iter()
        .map(|(a, b, k)| (a.as_str(), b.as_str(), *k))
        .collect();
    let graph = MultiGraph::from_edges(&borrowed, &[cfgkit::SINK_ID]);
    let chips: Vec<(String, u64)> = w_of
        .iter()
        .map(|(m, w_val)| {
            let v = graph.index(m).unwrap();
            let amount = if graph.in_degree(v) == 0 {
                graph.out_degree(v)
            } else {
                graph.out_degree(v) - w_val
            };
            (m.clone(), amount)
        })
        .collect();
    let pairs: Vec<(&str, u64)> = chips.iter().map(|(s, n)| (s.as_str(), *n)).collect();
    let initial = Configuration::from_pairs(&graph, &pairs).unwrap();
    (graph, initial)
}

/// The symmetric-game construction: pair variables become edges in both
/// directions, each vertex gets sink edges covering its threshold plus its
/// in-degree, and the initial configuration leaves each vertex exactly its
/// threshold short (vertices active at the bottom start full).
pub fn asm_from_solution(
    m_names: &[&str],
    u_bottom: &[&str],
    sol: &Solution,
) -> (MultiGraph, Configuration) {
    let value = |v: &VarId| -> u64 {
        sol.get(v)
            .map(|r| {
                assert!(r.is_integer());
                r.to_integer().try_into().expect("small fixture values")
            })
            .unwrap_or(0)
    };
    let mut edges: Vec<(String, String, u64)> = Vec::new();
    let mut incoming = vec![0u64; m_names.len()];
    for (i, m1) in m_names.iter().enumerate() {
        for (j, m2) in m_names.iter().enumerate().skip(i + 1) {
            let fwd = value(&e(m1, m2));
            let bwd = value(&e(m2, m1));
            let k = fwd.max(bwd);
            if fwd > 0 && bwd > 0 {
                assert_eq!(fwd, bwd, "symmetry constraint");
            }
            if k > 0 {
                edges.push((m1.to_string(), m2.to_string(), k));
                edges.push((m2.to_string(), m1.to_string(), k));
                incoming[i] += k;
                incoming[j] += k;
            }
        }
    }
    for (i, m) in m_names.iter().enumerate() {
        edges.push((
            m.to_string(),
            cfgkit::SINK_ID.to_string(),
            value(&w(m)) + incoming[i],
        ));
    }
    let borrowed: Vec<(&str, &str, u64)> = edges
        .iter()
        .map(|(a, b, k)| (a.as_str(), b.as_str(), *k))
        .collect();
    let graph = MultiGraph::from_edges(&borrowed, &[cfgkit::SINK_ID]);
    let chips: Vec<(String, u64)> = m_names
        .iter()
        .map(|m| {
            let v = graph.index(m).unwrap();
            let deg = graph.out_degree(v);
            let amount = if u_bottom.contains(m) {
                deg
            } else {
                deg - value(&w(m))
            };
            (m.to_string(), amount)
        })
        .collect();
    let pairs: Vec<(&str, u64)> = chips.iter().map(|(s, n)| (s.as_str(), *n)).collect();
    let initial = Configuration::from_pairs(&graph, &pairs).unwrap();
    (graph, initial)
}
