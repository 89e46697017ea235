//! The per-meet-irreducible inequality systems and their exact solver.
//!
//! For a meet-irreducible m the system couples an activation threshold `w`
//! with edge-count variables `e[x->m]`: every minimal element where the
//! m-step becomes possible must supply at least `w`, every maximal element
//! where it is still impossible must supply strictly less. Nonnegative
//! integer solvability of these systems is exactly membership in the
//! game-generated classes, so feasibility is decided with exact rational
//! arithmetic and solutions are integerized by the floor-scaling rule.

mod simplex;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num::{Integer, One, Signed, Zero};
pub use num::{bigint::BigInt, rational::BigRational};

use crate::lattice::{IrreducibleContext, Lattice};
use crate::{Error, Result};

/// A system variable: the threshold `w` of meet-irreducible m, or the edge
/// count from x into m.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarId {
    W(String),
    E { from: String, into: String },
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::W(m) => write!(f, "w[{m}]"),
            VarId::E { from, into } => write!(f, "e[{from}->{into}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Lt,
    Ge,
    Eq,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

/// `sum(coeff * var) REL rhs` with exact integer coefficients. Coefficient
/// pairs are kept sorted by variable index.
#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub coeffs: Vec<(usize, i64)>,
    pub relation: Relation,
    pub rhs: i64,
}

/// Named-variable constraints over implicitly nonnegative variables.
#[derive(Debug, Clone, Default)]
pub struct IneqSystem {
    vars: Vec<VarId>,
    index: HashMap<VarId, usize>,
    constraints: Vec<LinearConstraint>,
}

impl IneqSystem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a variable, returning its index; idempotent.
    pub fn add_var(&mut self, var: VarId) -> usize {
        if let Some(&ix) = self.index.get(&var) {
            return ix;
        }
        let ix = self.vars.len();
        self.index.insert(var.clone(), ix);
        self.vars.push(var);
        ix
    }

    pub fn var_index(&self, var: &VarId) -> Option<usize> {
        self.index.get(var).copied()
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn push(&mut self, mut coeffs: Vec<(usize, i64)>, relation: Relation, rhs: i64) {
        coeffs.sort_unstable_by_key(|&(ix, _)| ix);
        debug_assert!(coeffs.iter().all(|&(ix, _)| ix < self.vars.len()));
        debug_assert!(!coeffs.is_empty());
        self.constraints.push(LinearConstraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn has_strict(&self) -> bool {
        self.constraints
            .iter()
            .any(|c| c.relation == Relation::Lt)
    }

    /// Checks a solution against every constraint under exact arithmetic.
    /// Returns the rendering of the first violated constraint.
    pub fn check(&self, sol: &Solution) -> Result<std::result::Result<(), String>> {
        for c in &self.constraints {
            let mut lhs = BigRational::zero();
            for &(ix, k) in &c.coeffs {
                let var = &self.vars[ix];
                let value = sol
                    .get(var)
                    .ok_or_else(|| Error::UnregisteredVariable(var.to_string()))?;
                lhs += BigRational::from_integer(BigInt::from(k)) * value;
            }
            let rhs = BigRational::from_integer(BigInt::from(c.rhs));
            let ok = match c.relation {
                Relation::Le => lhs <= rhs,
                Relation::Lt => lhs < rhs,
                Relation::Ge => lhs >= rhs,
                Relation::Eq => lhs == rhs,
            };
            if !ok {
                return Ok(Err(self.render(c)));
            }
        }
        Ok(Ok(()))
    }

    fn render(&self, c: &LinearConstraint) -> String {
        let term = |k: i64, ix: usize| {
            if k == 1 {
                self.vars[ix].to_string()
            } else {
                format!("{k}*{}", self.vars[ix])
            }
        };
        let mut left: Vec<String> = Vec::new();
        let mut right: Vec<String> = Vec::new();
        for &(ix, k) in &c.coeffs {
            if k > 0 {
                left.push(term(k, ix));
            } else if k < 0 {
                right.push(term(-k, ix));
            }
        }
        if c.rhs < 0 {
            left.push((-c.rhs).to_string());
        } else if c.rhs > 0 {
            right.push(c.rhs.to_string());
        }
        let fold = |side: Vec<String>| {
            if side.is_empty() {
                "0".to_string()
            } else {
                side.join(" + ")
            }
        };
        format!("{} {} {}", fold(left), c.relation.as_str(), fold(right))
    }

    /// One constraint per line, in system order.
    pub fn dump(&self) -> String {
        self.constraints
            .iter()
            .map(|c| self.render(c))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// The same system with every variable name mapped through `rename`.
    /// Variables are re-registered in the canonical order of their new
    /// names (thresholds first, then edge variables), so dumps are
    /// comparable across renamings.
    pub fn renamed(&self, rename: &BTreeMap<String, String>) -> IneqSystem {
        let map = |s: &String| rename.get(s).unwrap_or(s).clone();
        let mapped: Vec<VarId> = self
            .vars
            .iter()
            .map(|var| match var {
                VarId::W(m) => VarId::W(map(m)),
                VarId::E { from, into } => VarId::E {
                    from: map(from),
                    into: map(into),
                },
            })
            .collect();
        let mut out = IneqSystem::new();
        let mut sorted = mapped.clone();
        sorted.sort();
        for var in sorted {
            out.add_var(var);
        }
        for c in &self.constraints {
            let coeffs: Vec<(usize, i64)> = c
                .coeffs
                .iter()
                .map(|&(ix, k)| (out.var_index(&mapped[ix]).expect("mapped var"), k))
                .collect();
            out.push(coeffs, c.relation, c.rhs);
        }
        out
    }
}

/// An exact assignment of nonnegative rationals to variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Solution {
    values: BTreeMap<VarId, BigRational>,
}

impl Solution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, var: VarId, value: BigRational) {
        self.values.insert(var, value);
    }

    pub fn get(&self, var: &VarId) -> Option<&BigRational> {
        self.values.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarId, &BigRational)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_integral(&self) -> bool {
        self.values.values().all(|v| v.is_integer())
    }

    /// Integer value of a variable; panics on fractional values.
    pub fn int(&self, var: &VarId) -> BigInt {
        let v = &self.values[var];
        assert!(v.is_integer(), "{var} = {v} is not integral");
        v.to_integer()
    }
}

#[derive(Debug, Clone)]
pub enum Feasibility {
    Feasible(Solution),
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// Builds the activation system of meet-irreducible `m_elem`.
///
/// When the m-step is possible straight from the bottom the system is just
/// `w >= 1`. Otherwise each element of 𝔘_m contributes
/// `w <= sum e[x->m]` over M \ M_a, and each element of 𝔏_m contributes
/// `sum e[x->m] < w`.
pub fn build_e(lat: &Lattice, ctx: &IrreducibleContext, m_elem: usize) -> Result<IneqSystem> {
    let m_pos = lat
        .m_position(m_elem)
        .ok_or_else(|| Error::NotMeetIrreducible(lat.name(m_elem).to_string()))?;
    let m_name = lat.name(m_elem).to_string();
    let mut sys = IneqSystem::new();
    let w = sys.add_var(VarId::W(m_name.clone()));
    if ctx.u_is_bottom(m_pos, lat) {
        sys.push(vec![(w, 1)], Relation::Ge, 1);
        return Ok(sys);
    }
    let mut positions: BTreeSet<usize> = BTreeSet::new();
    for &a in ctx.u_set(m_pos).iter().chain(ctx.l_set(m_pos)) {
        positions.extend(ctx.outside(a).iter().copied());
    }
    let mut e_ix = BTreeMap::new();
    for &p in &positions {
        let from = lat.name(lat.meet_irreducibles()[p]).to_string();
        debug_assert_ne!(from, m_name);
        let ix = sys.add_var(VarId::E {
            from,
            into: m_name.clone(),
        });
        e_ix.insert(p, ix);
    }
    for &a in ctx.u_set(m_pos) {
        let mut coeffs = vec![(w, 1)];
        coeffs.extend(ctx.outside(a).iter().map(|p| (e_ix[p], -1)));
        sys.push(coeffs, Relation::Le, 0);
    }
    for &a in ctx.l_set(m_pos) {
        let mut coeffs: Vec<(usize, i64)> =
            ctx.outside(a).iter().map(|p| (e_ix[p], 1)).collect();
        coeffs.push((w, -1));
        sys.push(coeffs, Relation::Lt, 0);
    }
    Ok(sys)
}

/// Eliminates strict constraints: `sum < w` becomes `sum + 1 <= w`. Weak
/// constraints pass through unchanged.
pub fn build_e_prime(sys: &IneqSystem) -> IneqSystem {
    let mut out = sys.clone();
    for c in &mut out.constraints {
        if c.relation == Relation::Lt {
            c.relation = Relation::Le;
            c.rhs -= 1;
        }
    }
    out
}

/// Builds the joint system for the undirected model: the union of every
/// per-m system (whose variables already carry their m) plus the symmetry
/// equalities `e[m1->m2] = e[m2->m1]` whenever both occur.
pub fn build_omega(lat: &Lattice, ctx: &IrreducibleContext) -> Result<IneqSystem> {
    let mut omega = IneqSystem::new();
    for &m_elem in lat.meet_irreducibles() {
        let sub = build_e(lat, ctx, m_elem)?;
        let mut remap = Vec::with_capacity(sub.vars.len());
        for var in &sub.vars {
            remap.push(omega.add_var(var.clone()));
        }
        for c in &sub.constraints {
            let coeffs = c
                .coeffs
                .iter()
                .map(|&(ix, k)| (remap[ix], k))
                .collect::<Vec<_>>();
            omega.push(coeffs, c.relation, c.rhs);
        }
    }
    let names: Vec<String> = lat
        .meet_irreducibles()
        .iter()
        .map(|&m| lat.name(m).to_string())
        .collect();
    for (i, m1) in names.iter().enumerate() {
        for m2 in names.iter().skip(i + 1) {
            let fwd = VarId::E {
                from: m1.clone(),
                into: m2.clone(),
            };
            let bwd = VarId::E {
                from: m2.clone(),
                into: m1.clone(),
            };
            if let (Some(a), Some(b)) = (omega.var_index(&fwd), omega.var_index(&bwd)) {
                omega.push(vec![(a, 1), (b, -1)], Relation::Eq, 0);
            }
        }
    }
    Ok(omega)
}

/// Decides nonnegative feasibility exactly and returns a satisfying
/// assignment when one exists. Strict constraints must have been
/// eliminated first.
///
/// The method is a complete phase-one simplex over exact rationals,
/// chosen for exactness at this problem size; no claims are made about
/// worst-case running time in the encoding size.
pub fn solve_nonneg(sys: &IneqSystem) -> Result<Feasibility> {
    if sys.has_strict() {
        return Err(Error::StrictConstraint);
    }
    let n = sys.vars.len();
    let rows = sys
        .constraints
        .iter()
        .map(|c| {
            let mut coeffs = vec![BigRational::zero(); n];
            for &(ix, k) in &c.coeffs {
                coeffs[ix] = BigRational::from_integer(BigInt::from(k));
            }
            simplex::Row {
                coeffs,
                rel: match c.relation {
                    Relation::Le => simplex::Rel::Le,
                    Relation::Ge => simplex::Rel::Ge,
                    Relation::Eq => simplex::Rel::Eq,
                    Relation::Lt => unreachable!("strict constraints rejected above"),
                },
                rhs: BigRational::from_integer(BigInt::from(c.rhs)),
            }
        })
        .collect();
    let Some(point) = simplex::feasible_point(n, rows) else {
        return Ok(Feasibility::Infeasible);
    };
    let mut sol = Solution::new();
    for (var, value) in sys.vars.iter().zip(point) {
        debug_assert!(!value.is_negative());
        sol.insert(var.clone(), value);
    }
    if let Err(violated) = sys.check(&sol)? {
        return Err(Error::Internal(format!(
            "solver returned an assignment violating `{violated}`"
        )));
    }
    Ok(Feasibility::Feasible(sol))
}

/// Converts a rational solution of the weak system into an integer solution
/// of the strict one: edge variables are scaled by 2N and floored (N = the
/// number of edge variables), each threshold is recomputed as the minimum
/// of its upper-bounding sums. The result is substitution-checked against
/// `strict`; a failure there means a bug, not bad input.
pub fn integerize(sol: &Solution, strict: &IneqSystem) -> Result<Solution> {
    let e_count = strict
        .vars
        .iter()
        .filter(|v| matches!(v, VarId::E { .. }))
        .count();
    let scale = BigRational::from_integer(BigInt::from(2 * e_count as i64));
    let floor_scaled = |v: &BigRational| (v * &scale).floor().to_integer();
    let exact = |v: &BigRational, d: &BigInt| {
        let scaled = v * BigRational::from_integer(d.clone());
        debug_assert!(scaled.is_integer());
        scaled.to_integer()
    };

    let attempt = |edge: &dyn Fn(&BigRational) -> BigInt,
                   w_fallback: &dyn Fn(&BigRational) -> BigInt|
     -> Result<Solution> {
        let mut out = Solution::new();
        for var in &strict.vars {
            if matches!(var, VarId::E { .. }) {
                let value = sol
                    .get(var)
                    .ok_or_else(|| Error::UnregisteredVariable(var.to_string()))?;
                out.insert(var.clone(), BigRational::from_integer(edge(value)));
            }
        }
        for (ix, var) in strict.vars.iter().enumerate() {
            let VarId::W(_) = var else { continue };
            let value = sol
                .get(var)
                .ok_or_else(|| Error::UnregisteredVariable(var.to_string()))?;
            // Upper-bounding rows of this threshold: `w - sum e <= 0`.
            let mut best: Option<BigInt> = None;
            for c in &strict.constraints {
                if c.relation != Relation::Le || !c.coeffs.contains(&(ix, 1)) {
                    continue;
                }
                let sum: BigInt = c
                    .coeffs
                    .iter()
                    .filter(|&&(j, k)| k < 0 && j != ix)
                    .map(|&(j, k)| out.int(&strict.vars[j]) * BigInt::from(-k))
                    .sum();
                best = Some(match best {
                    Some(b) => b.min(sum),
                    None => sum,
                });
            }
            let w_value = match best {
                Some(min_sum) => min_sum,
                None => w_fallback(value),
            };
            out.insert(var.clone(), BigRational::from_integer(w_value));
        }
        Ok(out)
    };

    let first = attempt(&floor_scaled, &|_| BigInt::one())?;
    if strict.check(&first)?.is_ok() {
        return Ok(first);
    }
    // Fallback: clear all denominators at once, which is exact.
    let denom = strict
        .vars
        .iter()
        .filter_map(|v| sol.get(v))
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let second = attempt(&|v| exact(v, &denom), &|v| exact(v, &denom))?;
    match strict.check(&second)? {
        Ok(()) => Ok(second),
        Err(violated) => Err(Error::Internal(format!(
            "integerized solution violates `{violated}`"
        ))),
    }
}
