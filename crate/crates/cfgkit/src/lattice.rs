//! Finite posets given by their cover relation: lattice validation, the
//! upper-locally-distributive certificate, and the per-meet-irreducible
//! context sets that drive the constraint systems.
//!
//! Element ids are arbitrary whitespace-free strings. The deterministic
//! total order used everywhere (element indices, iteration, tie-breaking)
//! is the lexicographic order on ids.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use fixedbitset::FixedBitSet;

use crate::{Error, Result, SINK_ID};

/// A validated cover relation: acyclic and transitively reduced.
#[derive(Debug, Clone)]
pub struct CoverDag {
    names: Vec<String>,
    covers: Vec<(usize, usize)>,
    warnings: Vec<String>,
}

impl CoverDag {
    /// Parses the cover-list text format: one cover `X Y` (meaning X ≺ Y)
    /// per line, `#` starts a comment, blank lines are ignored. A line with
    /// a single id declares an element with no covers (needed to express
    /// the one-element lattice).
    pub fn parse(text: &str) -> Result<CoverDag> {
        let mut elements = BTreeSet::new();
        let mut pairs = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens.len() {
                0 => continue,
                1 => {
                    check_id(tokens[0], lineno + 1)?;
                    elements.insert(tokens[0].to_string());
                }
                2 => {
                    check_id(tokens[0], lineno + 1)?;
                    check_id(tokens[1], lineno + 1)?;
                    elements.insert(tokens[0].to_string());
                    elements.insert(tokens[1].to_string());
                    pairs.insert((tokens[0].to_string(), tokens[1].to_string()));
                }
                n => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("expected `X Y`, found {n} tokens"),
                    })
                }
            }
        }
        let covers: Vec<(&str, &str)> = pairs
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let singles: Vec<&str> = elements.iter().map(|s| s.as_str()).collect();
        Self::from_covers(&covers, &singles)
    }

    /// Builds a dag from explicit covers plus extra isolated elements.
    /// Duplicates collapse; transitive edges are dropped with a warning;
    /// cycles are an error.
    pub fn from_covers(covers: &[(&str, &str)], elements: &[&str]) -> Result<CoverDag> {
        let mut names: BTreeSet<&str> = elements.iter().copied().collect();
        for &(a, b) in covers {
            names.insert(a);
            names.insert(b);
        }
        for name in &names {
            if *name == SINK_ID {
                return Err(Error::ReservedId(SINK_ID.to_string()));
            }
        }
        let names: Vec<String> = names.into_iter().map(|s| s.to_string()).collect();
        let index: HashMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
        for &(a, b) in covers {
            let (ia, ib) = (index[a], index[b]);
            if ia == ib {
                return Err(Error::CoverCycle(vec![a.to_string()]));
            }
            edges.insert((ia, ib));
        }
        let n = names.len();
        let succ = adjacency(n, edges.iter().copied());
        let order = toposort(n, &succ).map_err(|cycle| {
            Error::CoverCycle(cycle.into_iter().map(|i| names[i].clone()).collect())
        })?;

        // Strict "above" sets, used to drop transitive edges: (u, v) is
        // redundant iff some other successor of u already reaches v.
        let above = strict_reach(n, &succ, &order);
        let mut kept = Vec::new();
        let mut warnings = Vec::new();
        for &(u, v) in &edges {
            let redundant = succ[u].iter().any(|&w| w != v && above[w].contains(v));
            if redundant {
                warnings.push(format!(
                    "dropped transitive edge ({}, {})",
                    names[u], names[v]
                ));
            } else {
                kept.push((u, v));
            }
        }
        Ok(CoverDag {
            names,
            covers: kept,
            warnings,
        })
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

    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    /// Normalization notices produced while building (dropped transitive
    /// edges).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

fn check_id(id: &str, line: usize) -> Result<()> {
    if id == SINK_ID {
        return Err(Error::Parse {
            line,
            msg: format!("reserved id `{SINK_ID}` may not appear in a lattice"),
        });
    }
    Ok(())
}

fn adjacency<I: Iterator<Item = (usize, usize)>>(n: usize, edges: I) -> Vec<Vec<usize>> {
    let mut succ = vec![Vec::new(); n];
    for (u, v) in edges {
        succ[u].push(v);
    }
    for list in &mut succ {
        list.sort_unstable();
        list.dedup();
    }
    succ
}

/// Kahn topological sort; on failure returns the vertices of one cycle.
fn toposort(n: usize, succ: &[Vec<usize>]) -> std::result::Result<Vec<usize>, Vec<usize>> {
    let mut indeg = vec![0usize; n];
    for list in succ {
        for &v in list {
            indeg[v] += 1;
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    let mut head = 0;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        order.push(u);
        for &v in &succ[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                queue.push(v);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Walk forward among the leftover vertices until one repeats.
    let stuck: Vec<usize> = (0..n).filter(|&v| indeg[v] > 0).collect();
    let in_stuck: BTreeSet<usize> = stuck.iter().copied().collect();
    let mut path = Vec::new();
    let mut seen = BTreeMap::new();
    let mut cur = stuck[0];
    loop {
        if let Some(&pos) = seen.get(&cur) {
            return Err(path[pos..].to_vec());
        }
        seen.insert(cur, path.len());
        path.push(cur);
        cur = *succ[cur]
            .iter()
            .find(|v| in_stuck.contains(v))
            .expect("stuck vertex must have a stuck successor");
    }
}

/// For each vertex, the set of vertices strictly reachable from it.
fn strict_reach(n: usize, succ: &[Vec<usize>], topo: &[usize]) -> Vec<FixedBitSet> {
    let mut reach = vec![FixedBitSet::with_capacity(n); n];
    for &u in topo.iter().rev() {
        let mut set = FixedBitSet::with_capacity(n);
        for &v in &succ[u] {
            set.insert(v);
            set.union_with(&reach[v]);
        }
        reach[u] = set;
    }
    reach
}

/// A validated finite lattice with its irreducible machinery.
#[derive(Debug, Clone)]
pub struct Lattice {
    dag: CoverDag,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    /// up[x] = { y : x ≤ y } (includes x).
    up: Vec<FixedBitSet>,
    /// down[x] = { y : y ≤ x } (includes x).
    down: Vec<FixedBitSet>,
    bottom: usize,
    top: usize,
    /// Meet-irreducibles (exactly one upper cover), ascending element index.
    meet_irr: Vec<usize>,
    /// Join-irreducibles (exactly one lower cover), ascending element index.
    join_irr: Vec<usize>,
    /// m_pos[x] = position of x within `meet_irr`, if meet-irreducible.
    m_pos: Vec<Option<usize>>,
    /// m_set[x] = { positions p : x ≤ meet_irr[p] }.
    m_set: Vec<FixedBitSet>,
}

/// Checks that every pair of elements has a unique meet and join, and
/// computes the irreducibles. Fails with a witness pair otherwise.
pub fn validate_lattice(dag: CoverDag) -> Result<Lattice> {
    let n = dag.len();
    if n == 0 {
        return Err(Error::EmptyPoset);
    }
    let succ = adjacency(n, dag.covers.iter().copied());
    let pred = adjacency(n, dag.covers.iter().map(|&(u, v)| (v, u)));
    let topo = toposort(n, &succ).expect("CoverDag is acyclic");

    let mut up = vec![FixedBitSet::with_capacity(n); n];
    for &u in topo.iter().rev() {
        let mut set = FixedBitSet::with_capacity(n);
        set.insert(u);
        for &v in &succ[u] {
            set.union_with(&up[v]);
        }
        up[u] = set;
    }
    let mut down = vec![FixedBitSet::with_capacity(n); n];
    for &u in topo.iter() {
        let mut set = FixedBitSet::with_capacity(n);
        set.insert(u);
        for &v in &pred[u] {
            set.union_with(&down[v]);
        }
        down[u] = set;
    }

    // Unique meet and join for every pair. Scanning in index order makes
    // the reported witness pair deterministic.
    let names = dag.names();
    let mut scratch = FixedBitSet::with_capacity(n);
    for x in 0..n {
        for y in (x + 1)..n {
            if unique_extremum(&down, x, y, &mut scratch).is_none() {
                let ws = extreme_candidates(&down, &up, x, y);
                return Err(Error::NotALattice {
                    x: names[x].clone(),
                    y: names[y].clone(),
                    bound: "lower",
                    witnesses: ws.into_iter().map(|z| names[z].clone()).collect(),
                });
            }
            if unique_extremum(&up, x, y, &mut scratch).is_none() {
                let ws = extreme_candidates(&up, &down, x, y);
                return Err(Error::NotALattice {
                    x: names[x].clone(),
                    y: names[y].clone(),
                    bound: "upper",
                    witnesses: ws.into_iter().map(|z| names[z].clone()).collect(),
                });
            }
        }
    }
    let bottom = (0..n)
        .find(|&v| pred[v].is_empty())
        .expect("nonempty dag has a minimal element");
    let top = (0..n)
        .find(|&v| succ[v].is_empty())
        .expect("nonempty dag has a maximal element");

    let meet_irr: Vec<usize> = (0..n).filter(|&v| succ[v].len() == 1).collect();
    let join_irr: Vec<usize> = (0..n).filter(|&v| pred[v].len() == 1).collect();
    let mut m_pos = vec![None; n];
    for (p, &m) in meet_irr.iter().enumerate() {
        m_pos[m] = Some(p);
    }
    let mut m_set = Vec::with_capacity(n);
    for x in 0..n {
        let mut set = FixedBitSet::with_capacity(meet_irr.len());
        for (p, &m) in meet_irr.iter().enumerate() {
            if up[x].contains(m) {
                set.insert(p);
            }
        }
        m_set.push(set);
    }

    Ok(Lattice {
        dag,
        succ,
        pred,
        up,
        down,
        bottom,
        top,
        meet_irr,
        join_irr,
        m_pos,
        m_set,
    })
}

/// The unique extremum of `side_a[x] ∩ side_a[y]` (meet when side_a is the
/// down-sets, join when it is the up-sets), or `None` when it does not
/// exist. The intersection is down-closed (resp. up-closed), so it has a
/// maximum iff its largest member dominates every other: one argmax scan
/// plus one subset test decide it without allocating.
fn unique_extremum(
    side_a: &[FixedBitSet],
    x: usize,
    y: usize,
    scratch: &mut FixedBitSet,
) -> Option<usize> {
    scratch.clear();
    scratch.union_with(&side_a[x]);
    scratch.intersect_with(&side_a[y]);
    let best = scratch
        .ones()
        .max_by_key(|&z| side_a[z].count_ones(..))?;
    if scratch.is_subset(&side_a[best]) {
        Some(best)
    } else {
        None
    }
}

/// Slow path for error reporting: the extreme elements of the common-bound
/// set (several when the extremum is missing).
fn extreme_candidates(
    side_a: &[FixedBitSet],
    side_b: &[FixedBitSet],
    x: usize,
    y: usize,
) -> Vec<usize> {
    let mut common = side_a[x].clone();
    common.intersect_with(&side_a[y]);
    common
        .ones()
        .filter(|&z| {
            let mut beyond = side_b[z].clone();
            beyond.intersect_with(&common);
            beyond.count_ones(..) == 1
        })
        .collect()
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.dag.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dag(&self) -> &CoverDag {
        &self.dag
    }

    pub fn name(&self, x: usize) -> &str {
        &self.dag.names[x]
    }

    pub fn names(&self) -> &[String] {
        self.dag.names()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.dag
            .names
            .binary_search_by(|probe| probe.as_str().cmp(name))
            .ok()
    }

    pub fn covers(&self) -> &[(usize, usize)] {
        self.dag.covers()
    }

    pub fn upper_covers(&self, x: usize) -> &[usize] {
        &self.succ[x]
    }

    pub fn lower_covers(&self, x: usize) -> &[usize] {
        &self.pred[x]
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.up[x].contains(y)
    }

    pub fn up_set(&self, x: usize) -> &FixedBitSet {
        &self.up[x]
    }

    pub fn down_set(&self, x: usize) -> &FixedBitSet {
        &self.down[x]
    }

    pub fn meet(&self, x: usize, y: usize) -> usize {
        let mut scratch = FixedBitSet::with_capacity(self.len());
        unique_extremum(&self.down, x, y, &mut scratch).expect("validated lattice has all meets")
    }

    pub fn join(&self, x: usize, y: usize) -> usize {
        let mut scratch = FixedBitSet::with_capacity(self.len());
        unique_extremum(&self.up, x, y, &mut scratch).expect("validated lattice has all joins")
    }

    /// Meet-irreducible elements, ascending index (= lexicographic by name).
    pub fn meet_irreducibles(&self) -> &[usize] {
        &self.meet_irr
    }

    pub fn join_irreducibles(&self) -> &[usize] {
        &self.join_irr
    }

    /// Position of x within the meet-irreducible list, if any.
    pub fn m_position(&self, x: usize) -> Option<usize> {
        self.m_pos[x]
    }

    /// M_x as a bitset over meet-irreducible positions.
    pub fn m_set(&self, x: usize) -> &FixedBitSet {
        &self.m_set[x]
    }

    /// M \ M_x as ascending meet-irreducible positions.
    pub fn outside_m(&self, x: usize) -> Vec<usize> {
        (0..self.meet_irr.len())
            .filter(|&p| !self.m_set[x].contains(p))
            .collect()
    }

    fn fmt_m_set(&self, set: &FixedBitSet) -> Vec<String> {
        set.ones()
            .map(|p| self.name(self.meet_irr[p]).to_string())
            .collect()
    }
}

/// The 𝔪-labeling of covers witnessing upper local distributivity.
#[derive(Debug, Clone)]
pub struct UldCertificate {
    /// Label of each cover, aligned with `Lattice::covers()`, as a
    /// meet-irreducible position.
    labels: Vec<usize>,
    label_of: HashMap<(usize, usize), usize>,
    height: usize,
}

impl UldCertificate {
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Label of the cover (x, y), as a meet-irreducible position.
    pub fn label(&self, x: usize, y: usize) -> Option<usize> {
        self.label_of.get(&(x, y)).copied()
    }

    pub fn height(&self) -> usize {
        self.height
    }
}

/// Checks the cover criterion for upper local distributivity: every cover
/// (x, y) must remove exactly one meet-irreducible, which becomes its
/// label. Fails with the first violating cover in index order.
pub fn check_uld(lat: &Lattice) -> Result<UldCertificate> {
    let mut labels = Vec::with_capacity(lat.covers().len());
    let mut label_of = HashMap::new();
    for &(x, y) in lat.covers() {
        let mut diff = lat.m_set[x].clone();
        diff.difference_with(&lat.m_set[y]);
        let subset = lat.m_set[y].is_subset(&lat.m_set[x]);
        if !subset || diff.count_ones(..) != 1 {
            return Err(Error::NotUld {
                lower: lat.name(x).to_string(),
                upper: lat.name(y).to_string(),
                m_lower: lat.fmt_m_set(&lat.m_set[x]),
                m_upper: lat.fmt_m_set(&lat.m_set[y]),
            });
        }
        let m = diff.ones().next().unwrap();
        labels.push(m);
        label_of.insert((x, y), m);
    }
    // Every maximal chain removes one meet-irreducible per step, so all
    // paths from bottom to top have length |M|.
    let (shortest, longest) = chain_lengths(lat);
    let height = lat.meet_irr.len();
    if shortest != height || longest != height {
        return Err(Error::Internal(format!(
            "chain lengths {shortest}..{longest} disagree with |M| = {height}"
        )));
    }
    Ok(UldCertificate {
        labels,
        label_of,
        height,
    })
}

fn chain_lengths(lat: &Lattice) -> (usize, usize) {
    let n = lat.len();
    let topo = toposort(n, &lat.succ).expect("lattice dag is acyclic");
    let mut short = vec![usize::MAX; n];
    let mut long = vec![0usize; n];
    short[lat.bottom] = 0;
    for &u in &topo {
        if short[u] == usize::MAX {
            continue;
        }
        for &v in &lat.succ[u] {
            short[v] = short[v].min(short[u] + 1);
            long[v] = long[v].max(long[u] + 1);
        }
    }
    (short[lat.top], long[lat.top])
}

/// Per-meet-irreducible context: the minimal elements where the m-labeled
/// step becomes possible (𝔘) and the maximal elements below all of them
/// (𝔏), plus the cached complements M \ M_a feeding the constraint
/// systems.
#[derive(Debug, Clone)]
pub struct IrreducibleContext {
    /// u_sets[p] / l_sets[p]: ascending element indices, per
    /// meet-irreducible position p.
    u_sets: Vec<Vec<usize>>,
    l_sets: Vec<Vec<usize>>,
    /// outside[x] = M \ M_x for every x occurring in some 𝔘 ∪ 𝔏.
    outside: BTreeMap<usize, Vec<usize>>,
}

impl IrreducibleContext {
    pub fn u_set(&self, m_pos: usize) -> &[usize] {
        &self.u_sets[m_pos]
    }

    pub fn l_set(&self, m_pos: usize) -> &[usize] {
        &self.l_sets[m_pos]
    }

    /// M \ M_a as meet-irreducible positions, for a ∈ 𝔘_m ∪ 𝔏_m.
    pub fn outside(&self, a: usize) -> &[usize] {
        &self.outside[&a]
    }

    /// True iff 𝔘_m = {bottom}, the case whose system degenerates to
    /// `w >= 1`.
    pub fn u_is_bottom(&self, m_pos: usize, lat: &Lattice) -> bool {
        self.u_sets[m_pos] == [lat.bottom()]
    }
}

/// Computes 𝔘_m and 𝔏_m for every meet-irreducible. 𝔘_m is also derived
/// independently from the join-irreducibles (the predecessors of the
/// join-irreducibles that are minimal outside m's down-set) and the two
/// computations must agree; a mismatch is an internal error, not bad
/// input. The dual relation pairing join-irreducibles with maximal
/// elements outside their up-sets exists but feeds no construction here,
/// so it is not represented.
pub fn compute_context(lat: &Lattice, cert: &UldCertificate) -> Result<IrreducibleContext> {
    let n = lat.len();
    let m_count = lat.meet_irr.len();
    let mut fires: Vec<Vec<usize>> = vec![Vec::new(); m_count];
    for (&(x, _), &m) in lat.covers().iter().zip(cert.labels()) {
        fires[m].push(x);
    }
    let mut u_sets = Vec::with_capacity(m_count);
    let mut l_sets = Vec::with_capacity(m_count);
    let mut outside = BTreeMap::new();
    for (p, candidates) in fires.iter().enumerate() {
        let mut in_f = FixedBitSet::with_capacity(n);
        for &x in candidates {
            in_f.insert(x);
        }
        let u: Vec<usize> = in_f
            .ones()
            .filter(|&x| {
                let mut below = lat.down[x].clone();
                below.intersect_with(&in_f);
                below.count_ones(..) == 1
            })
            .collect();

        // Complement of the union of up-sets of 𝔘_m; its maximal elements
        // form 𝔏_m.
        let mut shadow = FixedBitSet::with_capacity(n);
        for &a in &u {
            shadow.union_with(&lat.up[a]);
        }
        let l: Vec<usize> = (0..n)
            .filter(|&x| !shadow.contains(x))
            .filter(|&x| lat.succ[x].iter().all(|&y| shadow.contains(y)))
            .collect();

        // Independent derivation of 𝔘_m from the join-irreducibles.
        let m_elem = lat.meet_irr[p];
        let mut from_j: Vec<usize> = lat
            .join_irr
            .iter()
            .copied()
            .filter(|&j| !lat.leq(j, m_elem) && lat.leq(lat.pred[j][0], m_elem))
            .map(|j| lat.pred[j][0])
            .collect();
        from_j.sort_unstable();
        from_j.dedup();
        if from_j != u {
            return Err(Error::Internal(format!(
                "U_{} disagrees with its join-irreducible derivation: {:?} vs {:?}",
                lat.name(m_elem),
                u.iter().map(|&x| lat.name(x)).collect::<Vec<_>>(),
                from_j.iter().map(|&x| lat.name(x)).collect::<Vec<_>>(),
            )));
        }
        for &a in u.iter().chain(&l) {
            // Elements of 𝔘_m ∪ 𝔏_m lie below m, so m never indexes its
            // own variables.
            if !lat.leq(a, m_elem) {
                return Err(Error::Internal(format!(
                    "{} in U/L of {} is not below it",
                    lat.name(a),
                    lat.name(m_elem)
                )));
            }
            outside.entry(a).or_insert_with(|| lat.outside_m(a));
        }
        u_sets.push(u);
        l_sets.push(l);
    }
    Ok(IrreducibleContext {
        u_sets,
        l_sets,
        outside,
    })
}

/// Tests the distributive identity x ∧ (y ∨ z) = (x ∧ y) ∨ (x ∧ z) over
/// all triples (its dual is equivalent).
pub fn is_distributive(lat: &Lattice) -> bool {
    let n = lat.len();
    let mut meet = vec![vec![0usize; n]; n];
    let mut join = vec![vec![0usize; n]; n];
    for x in 0..n {
        for y in x..n {
            let m = lat.meet(x, y);
            let j = lat.join(x, y);
            meet[x][y] = m;
            meet[y][x] = m;
            join[x][y] = j;
            join[y][x] = j;
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if meet[x][join[y][z]] != join[meet[x][y]][meet[x][z]] {
                    return false;
                }
            }
        }
    }
    true
}
