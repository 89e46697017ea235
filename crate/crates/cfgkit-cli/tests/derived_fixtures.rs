//! Fixtures obtained by construction rather than by hand: the lattice
//! outside the sandpile class is rebuilt from its joint system's
//! per-meet-irreducible blocks via the general construction.

mod common;

use std::collections::BTreeSet;

use cfgkit::engine::generate_space;
use cfgkit::feasibility::build_omega;
use cfgkit::lattice::{check_uld, compute_context, validate_lattice};
use cfgkit::recognize::{recognize_asm, recognize_cfg, Recognition, Rejection};
use cfgkit::verify::verify_witness;

use common::{cfg_from_blocks, omega_blocks, omega_c32_c37};

pub const CFG_NOT_ASM_LATTICE: &str = include_str!("fixtures/cfg_not_asm.lat");

#[test]
fn derive_the_lattice_outside_the_sandpile_class() {
    // The blocks of the transcribed joint system are the independent
    // activation systems of the six meet-irreducibles; solving them and
    // running the general construction yields a game that generates the
    // very lattice the joint system came from.
    let omega = omega_c32_c37();
    let blocks = omega_blocks(&omega);
    assert_eq!(blocks.len(), 6);
    let (graph, initial) = cfg_from_blocks(&blocks);
    let space = generate_space(&graph, &initial, 100_000).unwrap();
    let lat = validate_lattice(space.to_cover_dag().unwrap()).unwrap();
    let cert = check_uld(&lat).unwrap();
    let ctx = compute_context(&lat, &cert).unwrap();
    assert_eq!(lat.meet_irreducibles().len(), 6);

    // It is recognized as game-generated and the witness round-trips.
    let rec = recognize_cfg(&lat, &cert, &ctx).unwrap();
    let witness = rec.witness().expect("derived lattice is game-generated");
    let report = verify_witness(witness, &lat, &cert, 100_000).unwrap();
    assert!(report.passed(), "{:?}", report.first_failure());

    // Its joint symmetric system is infeasible.
    match recognize_asm(&lat, &cert, &ctx).unwrap() {
        Recognition::Rejected(Rejection::OmegaInfeasible) => {}
        other => panic!("expected the joint system to be infeasible, got {other:?}"),
    }

    // The sibling-cover conflict graph is complete here, so only simple
    // games can generate this lattice.
    assert!(cfgkit::recognize::simple_only_sufficient(&lat, &cert));

    // The joint system rebuilt from the derived lattice equals the
    // transcription after the meet-irreducibles get their reference names
    // back (cover labels name the fired vertices).
    let mut rename: std::collections::BTreeMap<String, String> = Default::default();
    for &m in lat.meet_irreducibles() {
        let y = lat.upper_covers(m)[0];
        let (_, _, v) = *space
            .covers()
            .iter()
            .find(|&&(a, b, _)| a == m && b == y)
            .expect("element indices equal configuration indices");
        rename.insert(lat.name(m).to_string(), space.graph().name(v).to_string());
    }
    let rebuilt = build_omega(&lat, &ctx).unwrap().renamed(&rename).dump();
    let transcribed = omega.dump();
    let rebuilt_lines: BTreeSet<String> = rebuilt.lines().map(canonical_line).collect();
    let transcribed_lines: BTreeSet<String> = transcribed.lines().map(canonical_line).collect();
    assert_eq!(rebuilt_lines, transcribed_lines);

    // The frozen fixture file is this lattice, element for element.
    let frozen = validate_lattice(cfgkit::lattice::CoverDag::parse(CFG_NOT_ASM_LATTICE).unwrap())
        .unwrap();
    let frozen_cert = check_uld(&frozen).unwrap();
    assert!(
        cfgkit::verify::spaces_isomorphic(&space, &frozen, &frozen_cert).is_isomorphic(),
        "frozen fixture diverged from its derivation"
    );
}

/// Order-insensitive rendering of a dumped constraint: terms within each
/// side sorted, and the two sides of an equality ordered.
fn canonical_line(line: &str) -> String {
    for rel in ["<=", ">=", "=", "<"] {
        let pattern = format!(" {rel} ");
        if let Some(pos) = line.find(&pattern) {
            let sort_terms = |side: &str| {
                let mut terms: Vec<&str> = side.split(" + ").collect();
                terms.sort_unstable();
                terms.join(" + ")
            };
            let left = sort_terms(&line[..pos]);
            let right = sort_terms(&line[pos + pattern.len()..]);
            if rel == "=" && right < left {
                return format!("{right} {rel} {left}");
            }
            return format!("{left} {rel} {right}");
        }
    }
    line.to_string()
}

