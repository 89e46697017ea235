//! Certification of recognizer outputs: canonical encodings of certified
//! lattices, labeled isomorphism between a generated space and a lattice,
//! and the staged witness round-trip check.

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::{generate_space, LabeledSpace};
use crate::lattice::{check_uld, validate_lattice, Lattice, UldCertificate};
use crate::recognize::{support_cycle, GameWitness, Model};
use crate::Result;

/// Maps every element x to the set of meet-irreducibles *not* above it.
/// The map is injective, sends bottom to ∅ and top to M, and embeds the
/// order into set inclusion; for a simple game it is exactly the
/// fired-vertex labeling of the configurations.
#[derive(Debug, Clone)]
pub struct CanonicalEncoding {
    sets: Vec<BTreeSet<String>>,
}

pub fn canonical_encoding(lat: &Lattice, _cert: &UldCertificate) -> CanonicalEncoding {
    let mut sets = Vec::with_capacity(lat.len());
    for x in 0..lat.len() {
        let set: BTreeSet<String> = lat
            .outside_m(x)
            .into_iter()
            .map(|p| lat.name(lat.meet_irreducibles()[p]).to_string())
            .collect();
        sets.push(set);
    }
    let distinct: BTreeSet<&BTreeSet<String>> = sets.iter().collect();
    assert_eq!(distinct.len(), sets.len(), "canonical encoding is injective");
    CanonicalEncoding { sets }
}

impl CanonicalEncoding {
    pub fn set(&self, x: usize) -> &BTreeSet<String> {
        &self.sets[x]
    }

    pub fn sets(&self) -> &[BTreeSet<String>] {
        &self.sets
    }
}

#[derive(Debug, Clone)]
pub enum IsoOutcome {
    /// Element name of the lattice paired with the configuration index of
    /// the space.
    Isomorphic(Vec<(String, usize)>),
    NotIsomorphic(String),
    /// Only possible on foreign-labeled spaces with more than eight
    /// meet-irreducibles and ambiguous label signatures.
    Indeterminate,
}

impl IsoOutcome {
    pub fn is_isomorphic(&self) -> bool {
        matches!(self, IsoOutcome::Isomorphic(_))
    }
}

/// Decides whether a generated space realizes the lattice.
///
/// When the space comes from a simple game whose fired vertices are named
/// by the lattice's meet-irreducibles, the fired-set labeling must equal
/// the canonical encoding outright. Otherwise the space is re-analyzed as
/// a lattice of its own and the two canonical set systems are compared up
/// to a bijection of label sets.
pub fn spaces_isomorphic(
    space: &LabeledSpace,
    lat: &Lattice,
    cert: &UldCertificate,
) -> IsoOutcome {
    if space.len() != lat.len() {
        return IsoOutcome::NotIsomorphic(format!(
            "element counts differ: space has {}, lattice has {}",
            space.len(),
            lat.len()
        ));
    }
    let m_names: BTreeSet<String> = lat
        .meet_irreducibles()
        .iter()
        .map(|&m| lat.name(m).to_string())
        .collect();
    let mut fired_names: BTreeSet<String> = BTreeSet::new();
    for &(_, _, v) in space.covers() {
        fired_names.insert(space.graph().name(v).to_string());
    }
    if space.is_simple() && fired_names.is_subset(&m_names) {
        direct_comparison(space, lat, cert)
    } else {
        relabeled_comparison(space, lat, cert)
    }
}

fn direct_comparison(space: &LabeledSpace, lat: &Lattice, cert: &UldCertificate) -> IsoOutcome {
    let enc = canonical_encoding(lat, cert);
    let mut by_fired: BTreeMap<BTreeSet<String>, usize> = BTreeMap::new();
    for i in 0..space.len() {
        let fired: BTreeSet<String> = space
            .fired_set(i)
            .into_iter()
            .map(|v| space.graph().name(v).to_string())
            .collect();
        if by_fired.insert(fired, i).is_some() {
            return IsoOutcome::NotIsomorphic("duplicate fired set in space".into());
        }
    }
    let mut mapping = Vec::with_capacity(lat.len());
    let mut to_config = vec![0usize; lat.len()];
    for x in 0..lat.len() {
        match by_fired.get(enc.set(x)) {
            Some(&i) => {
                to_config[x] = i;
                mapping.push((lat.name(x).to_string(), i));
            }
            None => {
                return IsoOutcome::NotIsomorphic(format!(
                    "no configuration fires exactly {{{}}}",
                    enc.set(x)
                        .iter()
                        .cloned()
                        .collect::<Vec<_>>()
                        .join(" ")
                ));
            }
        }
    }
    if space.covers().len() != lat.covers().len() {
        return IsoOutcome::NotIsomorphic(format!(
            "cover counts differ: space has {}, lattice has {}",
            space.covers().len(),
            lat.covers().len()
        ));
    }
    let space_covers: BTreeSet<(usize, usize, String)> = space
        .covers()
        .iter()
        .map(|&(a, b, v)| (a, b, space.graph().name(v).to_string()))
        .collect();
    for (&(x, y), &label) in lat.covers().iter().zip(cert.labels()) {
        let name = lat.name(lat.meet_irreducibles()[label]).to_string();
        let key = (to_config[x], to_config[y], name);
        if !space_covers.contains(&key) {
            return IsoOutcome::NotIsomorphic(format!(
                "cover ({}, {}) has no counterpart fired by {}",
                lat.name(x),
                lat.name(y),
                key.2
            ));
        }
    }
    IsoOutcome::Isomorphic(mapping)
}

fn relabeled_comparison(space: &LabeledSpace, lat: &Lattice, cert: &UldCertificate) -> IsoOutcome {
    let dag = match space.to_cover_dag() {
        Ok(dag) => dag,
        Err(e) => return IsoOutcome::NotIsomorphic(format!("space is not a cover dag: {e}")),
    };
    let space_lat = match validate_lattice(dag) {
        Ok(l) => l,
        Err(e) => return IsoOutcome::NotIsomorphic(format!("space is not a lattice: {e}")),
    };
    let space_cert = match check_uld(&space_lat) {
        Ok(c) => c,
        Err(e) => return IsoOutcome::NotIsomorphic(format!("space is not ULD: {e}")),
    };
    let enc_lat = canonical_encoding(lat, cert);
    let enc_spc = canonical_encoding(&space_lat, &space_cert);
    let labels_lat = label_list(&enc_lat);
    let labels_spc = label_list(&enc_spc);
    if labels_lat.len() != labels_spc.len() {
        return IsoOutcome::NotIsomorphic(format!(
            "meet-irreducible counts differ: {} vs {}",
            labels_lat.len(),
            labels_spc.len()
        ));
    }

    // Label usage signatures: the multiset of sizes of the encoding sets
    // containing the label. A bijection must respect them.
    let sig = |enc: &CanonicalEncoding, label: &String| -> Vec<usize> {
        let mut sizes: Vec<usize> = enc
            .sets()
            .iter()
            .filter(|s| s.contains(label))
            .map(|s| s.len())
            .collect();
        sizes.sort_unstable();
        sizes
    };
    let mut groups: BTreeMap<Vec<usize>, (Vec<String>, Vec<String>)> = BTreeMap::new();
    for l in &labels_lat {
        groups.entry(sig(&enc_lat, l)).or_default().0.push(l.clone());
    }
    for l in &labels_spc {
        groups.entry(sig(&enc_spc, l)).or_default().1.push(l.clone());
    }
    for (s, (a, b)) in &groups {
        if a.len() != b.len() {
            return IsoOutcome::NotIsomorphic(format!(
                "label signature {s:?} occurs {} vs {} times",
                a.len(),
                b.len()
            ));
        }
    }
    let ambiguous = groups.values().any(|(a, _)| a.len() > 1);
    if ambiguous && labels_lat.len() > 8 {
        return IsoOutcome::Indeterminate;
    }

    let spc_sets: BTreeSet<&BTreeSet<String>> = enc_spc.sets().iter().collect();
    let group_list: Vec<(&Vec<String>, &Vec<String>)> =
        groups.values().map(|(a, b)| (a, b)).collect();
    let mut perms: Vec<Vec<usize>> = group_list
        .iter()
        .map(|(a, _)| (0..a.len()).collect())
        .collect();
    loop {
        let mut bijection: BTreeMap<&String, &String> = BTreeMap::new();
        for ((a, b), perm) in group_list.iter().zip(&perms) {
            for (i, &j) in perm.iter().enumerate() {
                bijection.insert(&a[i], &b[j]);
            }
        }
        let ok = enc_lat.sets().iter().all(|set| {
            let mapped: BTreeSet<String> =
                set.iter().map(|l| bijection[l].clone()).collect();
            spc_sets.contains(&mapped)
        });
        if ok {
            // Elements with equal (mapped) encodings correspond; encode the
            // result as lattice-element -> configuration index.
            let mut spc_index: BTreeMap<&BTreeSet<String>, usize> = BTreeMap::new();
            for (i, s) in enc_spc.sets().iter().enumerate() {
                spc_index.insert(s, i);
            }
            let mut mapping = Vec::with_capacity(lat.len());
            for x in 0..lat.len() {
                let mapped: BTreeSet<String> = enc_lat
                    .set(x)
                    .iter()
                    .map(|l| bijection[l].clone())
                    .collect();
                mapping.push((lat.name(x).to_string(), spc_index[&mapped]));
            }
            return IsoOutcome::Isomorphic(mapping);
        }
        if !next_permutation_product(&mut perms) {
            return IsoOutcome::NotIsomorphic(
                "no label bijection matches the canonical encodings".into(),
            );
        }
    }
}

fn label_list(enc: &CanonicalEncoding) -> Vec<String> {
    let mut labels: BTreeSet<String> = BTreeSet::new();
    for s in enc.sets() {
        labels.extend(s.iter().cloned());
    }
    labels.into_iter().collect()
}

/// Advances a product of per-group permutations to the next combination in
/// lexicographic order; false when exhausted.
fn next_permutation_product(perms: &mut [Vec<usize>]) -> bool {
    for perm in perms.iter_mut().rev() {
        if next_permutation(perm) {
            return true;
        }
        // wrapped: reset and carry to previous group
        perm.sort_unstable();
    }
    false
}

fn next_permutation(perm: &mut [usize]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct StageReport {
    pub name: &'static str,
    pub status: StageStatus,
    pub detail: String,
}

/// Outcome of the four-stage witness check: structural invariants of the
/// model tag, terminating generation, simplicity, isomorphism. On success
/// the element bijection is included as id pairs (lattice element,
/// configuration).
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub stages: Vec<StageReport>,
    pub bijection: Vec<(String, String)>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.stages.iter().all(|s| s.status == StageStatus::Pass)
    }

    pub fn first_failure(&self) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.status != StageStatus::Pass)
    }
}

/// Runs the full round-trip certification of a witness against a certified
/// lattice. Failures never panic; they land in the report.
pub fn verify_witness(
    witness: &GameWitness,
    lat: &Lattice,
    cert: &UldCertificate,
    cap: usize,
) -> Result<VerificationReport> {
    let mut stages = Vec::with_capacity(4);
    let structure = check_structure(witness);
    let structure_ok = structure.is_ok();
    stages.push(StageReport {
        name: "structure",
        status: if structure_ok {
            StageStatus::Pass
        } else {
            StageStatus::Fail
        },
        detail: structure.err().unwrap_or_else(|| "ok".into()),
    });

    let space = match generate_space(&witness.graph, &witness.initial, cap) {
        Ok(space) => {
            stages.push(StageReport {
                name: "generation",
                status: StageStatus::Pass,
                detail: format!("{} configurations", space.len()),
            });
            Some(space)
        }
        Err(e) => {
            stages.push(StageReport {
                name: "generation",
                status: StageStatus::Fail,
                detail: e.to_string(),
            });
            None
        }
    };

    let mut bijection = Vec::new();
    match &space {
        Some(space) => {
            let simple = space.is_simple();
            stages.push(StageReport {
                name: "simplicity",
                status: if simple {
                    StageStatus::Pass
                } else {
                    StageStatus::Fail
                },
                detail: if simple {
                    "every vertex fires at most once".into()
                } else {
                    "some vertex fires more than once".into()
                },
            });
            let outcome = spaces_isomorphic(space, lat, cert);
            let (status, detail) = match outcome {
                IsoOutcome::Isomorphic(mapping) => {
                    let names = space.element_names();
                    bijection = mapping
                        .into_iter()
                        .map(|(element, config)| (element, names[config].clone()))
                        .collect();
                    (StageStatus::Pass, "spaces isomorphic".to_string())
                }
                IsoOutcome::NotIsomorphic(reason) => (StageStatus::Fail, reason),
                IsoOutcome::Indeterminate => (StageStatus::Fail, "indeterminate".to_string()),
            };
            stages.push(StageReport {
                name: "isomorphism",
                status,
                detail,
            });
        }
        None => {
            for name in ["simplicity", "isomorphism"] {
                stages.push(StageReport {
                    name,
                    status: StageStatus::Skipped,
                    detail: "not run".into(),
                });
            }
        }
    }
    Ok(VerificationReport { stages, bijection })
}

fn check_structure(witness: &GameWitness) -> std::result::Result<(), String> {
    let g = &witness.graph;
    let n = g.len();
    match witness.model {
        Model::Cfg | Model::Acfg => {
            for v in 0..n {
                if g.mult(v, v) > 0 {
                    return Err(format!("loop at {}", g.name(v)));
                }
            }
            for v in 0..n {
                if g.is_sink(v) {
                    continue;
                }
                let reaches_sink = (0..n).any(|s| g.is_sink(s) && g.mult(v, s) > 0);
                if !reaches_sink {
                    return Err(format!("{} has no edge to a sink", g.name(v)));
                }
            }
            if witness.model == Model::Acfg {
                if let Some(cycle) = support_cycle(g) {
                    return Err(format!("support cycle: {}", cycle.join(" ")));
                }
            }
            Ok(())
        }
        Model::Asm => {
            for u in 0..n {
                for v in (u + 1)..n {
                    if g.is_sink(u) || g.is_sink(v) {
                        continue;
                    }
                    if g.mult(u, v) != g.mult(v, u) {
                        return Err(format!(
                            "asymmetric multiplicities between {} and {}",
                            g.name(u),
                            g.name(v)
                        ));
                    }
                }
            }
            Ok(())
        }
    }
}
