//! Acceptance suite: one test per criterion, each printing a pass line.
//! Every tolerance here is exact (integer/rational arithmetic); runtime
//! bounds are asserted with wall clocks.

mod common;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use cfgkit::engine::{fire, firable, generate_space, Configuration, MultiGraph};
use cfgkit::feasibility::{build_e, build_e_prime, build_omega, integerize, solve_nonneg, Feasibility};
use cfgkit::lattice::{
    check_uld, compute_context, is_distributive, validate_lattice, CoverDag, IrreducibleContext,
    Lattice, UldCertificate,
};
use cfgkit::recognize::{
    build_script_g, recognize_acfg, recognize_asm, recognize_cfg, Recognition, Rejection,
};
use cfgkit::verify::{spaces_isomorphic, verify_witness};
use cfgkit_cli::gen::{random_simple_game, GenParams};

use common::{asm_from_solution, omega_c32_c37, running_omega_solution, RUNNING_LATTICE};

struct Certified {
    lat: Lattice,
    cert: UldCertificate,
    ctx: IrreducibleContext,
}

fn certify_text(text: &str) -> Certified {
    let lat = validate_lattice(CoverDag::parse(text).unwrap()).unwrap();
    let cert = check_uld(&lat).unwrap();
    let ctx = compute_context(&lat, &cert).unwrap();
    Certified { lat, cert, ctx }
}

fn certify_space(space: &cfgkit::engine::LabeledSpace) -> Certified {
    let lat = validate_lattice(space.to_cover_dag().unwrap()).unwrap();
    let cert = check_uld(&lat).unwrap();
    let ctx = compute_context(&lat, &cert).unwrap();
    Certified { lat, cert, ctx }
}

fn assert_runtime(criterion: u32, elapsed: Duration, bound: Duration) {
    assert!(
        elapsed <= bound,
        "criterion {criterion} exceeded its runtime bound: {elapsed:?} > {bound:?}"
    );
}

/// Criterion 1: rebuild the symmetric game from the reference joint-system
/// solution, simulate it, and check every expected fact about the
/// resulting lattice (sizes, context sets, and the per-meet-irreducible
/// systems after the vertex renaming).
#[test]
fn criterion_1_running_example_round_trip() {
    let start = Instant::now();
    let (graph, initial) = asm_from_solution(
        &["c6", "c7", "c8", "c9"],
        &["c8", "c9"],
        &running_omega_solution(),
    );
    let space = generate_space(&graph, &initial, 10_000).unwrap();
    assert_eq!(space.len(), 11, "eleven configurations");
    let c = certify_space(&space);
    assert_eq!(c.lat.meet_irreducibles().len(), 4, "|M| = 4");
    assert_eq!(c.cert.height(), 4);

    // kappa: each meet-irreducible corresponds to the vertex fired at its
    // unique upper cover.
    let mut kappa: std::collections::BTreeMap<String, usize> = Default::default();
    for &m in c.lat.meet_irreducibles() {
        let y = c.lat.upper_covers(m)[0];
        let (_, _, v) = *space
            .covers()
            .iter()
            .find(|&&(a, b, _)| a == m && b == y)
            .expect("element indices equal configuration indices");
        kappa.insert(space.graph().name(v).to_string(), m);
    }
    let kappa_names: Vec<&String> = kappa.keys().collect();
    assert_eq!(kappa_names, ["c6", "c7", "c8", "c9"]);

    let pos = |vertex: &str| c.lat.m_position(kappa[vertex]).unwrap();
    assert_eq!(c.ctx.u_set(pos("c6")).len(), 2, "U_c6 has two elements");
    assert_eq!(c.ctx.u_set(pos("c7")).len(), 2, "U_c7 has two elements");
    assert_eq!(c.ctx.u_set(pos("c8")), &[c.lat.bottom()], "U_c8 = {{0}}");
    assert_eq!(c.ctx.u_set(pos("c9")), &[c.lat.bottom()], "U_c9 = {{0}}");
    assert_eq!(c.ctx.l_set(pos("c6")).len(), 1, "L_c6 is a singleton");
    assert_eq!(c.ctx.l_set(pos("c7")).len(), 1, "L_c7 is a singleton");
    assert!(c.ctx.l_set(pos("c8")).is_empty());
    assert!(c.ctx.l_set(pos("c9")).is_empty());

    // The systems match the reference displays after renaming through
    // kappa.
    let rename: std::collections::BTreeMap<String, String> = kappa
        .iter()
        .map(|(vertex, &m)| (c.lat.name(m).to_string(), vertex.clone()))
        .collect();
    let dump = |vertex: &str| {
        build_e(&c.lat, &c.ctx, kappa[vertex])
            .unwrap()
            .renamed(&rename)
            .dump()
    };
    assert_eq!(dump("c8"), "w[c8] >= 1");
    assert_eq!(dump("c9"), "w[c9] >= 1");
    assert_eq!(
        dump("c6"),
        "w[c6] <= e[c8->c6]\nw[c6] <= e[c7->c6] + e[c9->c6]\ne[c9->c6] < w[c6]"
    );
    assert_eq!(
        dump("c7"),
        "w[c7] <= e[c9->c7]\nw[c7] <= e[c6->c7] + e[c8->c7]\ne[c8->c7] < w[c7]"
    );

    // The frozen fixture file is the same lattice: the simulated space
    // matches it element for element under the identity labeling.
    let fixture = certify_text(RUNNING_LATTICE);
    assert!(
        spaces_isomorphic(&space, &fixture.lat, &fixture.cert).is_isomorphic(),
        "reconstruction matches the frozen fixture"
    );

    let elapsed = start.elapsed();
    assert_runtime(1, elapsed, Duration::from_secs(1));
    println!("[criterion 1] PASS: running-example round trip in {elapsed:?}");
}

/// Criterion 2: the transcribed nineteen-constraint joint system has no
/// nonnegative solution after strict elimination.
#[test]
fn criterion_2_asm_strictness_system_infeasible() {
    let start = Instant::now();
    let omega = omega_c32_c37();
    assert_eq!(omega.constraints().len(), 19);
    let weak = build_e_prime(&omega);
    assert!(!weak.has_strict());
    match solve_nonneg(&weak).unwrap() {
        Feasibility::Infeasible => {}
        Feasibility::Feasible(sol) => panic!("expected infeasibility, got {sol:?}"),
    }
    let elapsed = start.elapsed();
    assert_runtime(2, elapsed, Duration::from_secs(1));
    println!("[criterion 2] PASS: transcribed joint system infeasible in {elapsed:?}");
}

/// Criterion 3: on the running fixture the auxiliary digraph is cyclic, so
/// the acyclic-support recognizer rejects while the symmetric one accepts.
#[test]
fn criterion_3_acfg_strictly_inside_asm() {
    let start = Instant::now();
    let c = certify_text(RUNNING_LATTICE);
    let script = build_script_g(&c.lat, &c.ctx);
    assert!(!script.is_acyclic(), "auxiliary digraph is cyclic");
    match recognize_acfg(&c.lat, &c.cert, &c.ctx).unwrap() {
        Recognition::Rejected(Rejection::ScriptGCycle { .. }) => {}
        other => panic!("expected cycle rejection, got {other:?}"),
    }
    let asm = recognize_asm(&c.lat, &c.cert, &c.ctx).unwrap();
    let witness = asm.witness().expect("fixture is sandpile-generated");
    let report = verify_witness(witness, &c.lat, &c.cert, 100_000).unwrap();
    assert!(report.passed(), "{:?}", report.first_failure());
    let elapsed = start.elapsed();
    assert_runtime(3, elapsed, Duration::from_secs(1));
    println!("[criterion 3] PASS: acyclic-support rejection with symmetric acceptance in {elapsed:?}");
}

/// Criterion 4: two hundred seeded random simple games round-trip through
/// recognition and certification.
#[test]
fn criterion_4_random_round_trip_suite() {
    let start = Instant::now();
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xCF61);
    let params = GenParams {
        max_vertices: 5,
        max_mult: 3,
        cap: 100_000,
    };
    for i in 0..200 {
        let (_, _, space) = random_simple_game(&mut rng, &params);
        let c = certify_space(&space);
        let rec = recognize_cfg(&c.lat, &c.cert, &c.ctx).unwrap();
        let witness = rec
            .witness()
            .unwrap_or_else(|| panic!("game {i}: space must be recognized"));
        let report = verify_witness(witness, &c.lat, &c.cert, 100_000).unwrap();
        assert!(
            report.passed(),
            "game {i}: round trip failed at {:?}",
            report.first_failure()
        );
    }
    let elapsed = start.elapsed();
    assert_runtime(4, elapsed, Duration::from_secs(60));
    println!("[criterion 4] PASS: 200 random simple games round-tripped in {elapsed:?}");
}

/// Criterion 5: exhaustive enumeration of games on at most three non-sink
/// vertices (multiplicities <= 2, chips <= 3): every generated lattice is
/// accepted and round-trips.
#[test]
fn criterion_5_exhaustive_small_game_soundness() {
    let start = Instant::now();
    let names = ["v1", "v2", "v3"];
    let mut games = 0usize;
    let mut seen: HashSet<(usize, Vec<(u16, u16)>)> = HashSet::new();
    let mut lattices = 0usize;
    for nv in 1..=3usize {
        let pair_slots: Vec<(usize, usize)> = (0..nv)
            .flat_map(|i| (0..nv).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        let slots = pair_slots.len() + nv; // plus one sink slot per vertex
        for code in 0..3u64.pow(slots as u32) {
            let mut c = code;
            let mut edges: Vec<(&str, &str, u64)> = Vec::new();
            for &(i, j) in &pair_slots {
                let k = c % 3;
                c /= 3;
                if k > 0 {
                    edges.push((names[i], names[j], k));
                }
            }
            for name in names.iter().take(nv) {
                let k = c % 3;
                c /= 3;
                if k > 0 {
                    edges.push((name, "zz", k));
                }
            }
            let mut extra = vec!["zz"];
            extra.extend(names.iter().take(nv));
            let g = MultiGraph::from_edges(&edges, &extra);
            if !g.closed_components().is_empty() {
                continue;
            }
            for chip_code in 0..4u64.pow(nv as u32) {
                let mut cc = chip_code;
                let mut pairs = Vec::new();
                for name in names.iter().take(nv) {
                    pairs.push((*name, cc % 4));
                    cc /= 4;
                }
                let o = Configuration::from_pairs(&g, &pairs).unwrap();
                games += 1;
                let space = generate_space(&g, &o, 100_000).unwrap();
                let key = (
                    space.len(),
                    space
                        .covers()
                        .iter()
                        .map(|&(a, b, _)| (a as u16, b as u16))
                        .collect::<Vec<_>>(),
                );
                if !seen.insert(key) {
                    continue;
                }
                lattices += 1;
                let c = certify_space(&space);
                let rec = recognize_cfg(&c.lat, &c.cert, &c.ctx).unwrap();
                let witness = rec.witness().unwrap_or_else(|| {
                    panic!(
                        "false rejection on the space of\n{}\nwith\n{}",
                        g.dump(),
                        o.dump(&g)
                    )
                });
                let report = verify_witness(witness, &c.lat, &c.cert, 100_000).unwrap();
                assert!(
                    report.passed(),
                    "round trip failed at {:?} for\n{}\nwith\n{}",
                    report.first_failure(),
                    g.dump(),
                    o.dump(&g)
                );
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(games > 1_000_000, "enumeration covered {games} games");
    assert_runtime(5, elapsed, Duration::from_secs(300));
    println!(
        "[criterion 5] PASS: {games} games, {lattices} distinct lattices, all accepted and round-tripped in {elapsed:?}"
    );
}

/// Criterion 6: chains and Boolean lattices are accepted by all three
/// recognizers with singleton activation families; the two canonical
/// non-ULD lattices are rejected at the gate.
#[test]
fn criterion_6_distributive_corollaries() {
    let start = Instant::now();
    let mut fixtures: Vec<(String, String)> = Vec::new();
    for n in 2..=6usize {
        let covers: Vec<String> = (0..n - 1).map(|i| format!("x{i} x{}", i + 1)).collect();
        fixtures.push((format!("C{n}"), covers.join("\n")));
    }
    for k in 1..=4usize {
        let mut covers = Vec::new();
        for set in 0usize..(1 << k) {
            for bit in 0..k {
                if set & (1 << bit) == 0 {
                    covers.push(format!("{set:0k$b} {:0k$b}", set | (1 << bit)));
                }
            }
        }
        fixtures.push((format!("B{k}"), covers.join("\n")));
    }
    for (name, text) in &fixtures {
        let c = certify_text(text);
        assert!(is_distributive(&c.lat), "{name} is distributive");
        for p in 0..c.lat.meet_irreducibles().len() {
            assert_eq!(c.ctx.u_set(p).len(), 1, "{name}: |U_m| = 1");
        }
        for (model, rec) in [
            ("cfg", recognize_cfg(&c.lat, &c.cert, &c.ctx).unwrap()),
            ("asm", recognize_asm(&c.lat, &c.cert, &c.ctx).unwrap()),
            ("acfg", recognize_acfg(&c.lat, &c.cert, &c.ctx).unwrap()),
        ] {
            let witness = rec
                .witness()
                .unwrap_or_else(|| panic!("{name} rejected by {model}"));
            let report = verify_witness(witness, &c.lat, &c.cert, 1 << 20).unwrap();
            assert!(report.passed(), "{name}/{model}: {:?}", report.first_failure());
        }
    }
    for text in ["0 a\n0 b\n0 c\na 1\nb 1\nc 1", "0 a\na b\nb 1\n0 c\nc 1"] {
        let lat = validate_lattice(CoverDag::parse(text).unwrap()).unwrap();
        assert!(check_uld(&lat).is_err(), "non-ULD input must be rejected");
    }
    let elapsed = start.elapsed();
    assert_runtime(6, elapsed, Duration::from_secs(10));
    println!("[criterion 6] PASS: chains, Boolean lattices, and ULD gate in {elapsed:?}");
}

/// Criterion 7: the engine invariants. Chip conservation and shot-vector
/// consistency are always-on assertions inside the engine; here they are
/// driven explicitly, together with pairwise commutation, the dual
/// reachability computations, and height = |M|.
#[test]
fn criterion_7_engine_invariants() {
    let start = Instant::now();
    let (graph, initial) = asm_from_solution(
        &["c6", "c7", "c8", "c9"],
        &["c8", "c9"],
        &running_omega_solution(),
    );
    let mut spaces = vec![generate_space(&graph, &initial, 10_000).unwrap()];
    {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let params = GenParams::default();
        for _ in 0..20 {
            let (_, _, space) = random_simple_game(&mut rng, &params);
            spaces.push(space);
        }
    }
    for space in &spaces {
        let g = space.graph();
        // Chip conservation on every cover (asserted inside fire as well).
        for &(a, _, v) in space.covers() {
            let before = space.config(a);
            let after = fire(g, before, v);
            assert_eq!(before.total(), after.total());
        }
        // Pairwise commutation wherever two vertices are firable.
        for i in 0..space.len() {
            let c = space.config(i);
            let firables: Vec<usize> = (0..g.len()).filter(|&v| firable(g, c, v)).collect();
            for (ai, &u) in firables.iter().enumerate() {
                for &v in firables.iter().skip(ai + 1) {
                    assert_eq!(fire(g, &fire(g, c, u), v), fire(g, &fire(g, c, v), u));
                }
            }
        }
        // The two reachability computations agree on every pair (the
        // method errors if they ever disagree).
        for i in 0..space.len() {
            for j in 0..space.len() {
                space
                    .reachable(space.config(i), space.config(j))
                    .expect("shot order and cover reachability agree");
            }
        }
        // Height equals the number of meet-irreducibles.
        let lat = validate_lattice(space.to_cover_dag().unwrap()).unwrap();
        let cert = check_uld(&lat).unwrap();
        assert_eq!(cert.height(), lat.meet_irreducibles().len());
    }
    let elapsed = start.elapsed();
    println!("[criterion 7] PASS: engine invariants over {} spaces in {elapsed:?}", spaces.len());
}

/// Criterion 8: every feasible weak system solved across the fixture
/// corpus integerizes into a solution of its strict counterpart. The
/// substitution check is explicit here; zero failures are tolerated.
#[test]
fn criterion_8_integerization_soundness() {
    let start = Instant::now();
    let mut corpus: Vec<Certified> = Vec::new();
    corpus.push(certify_text(RUNNING_LATTICE));
    corpus.push(certify_text("0 a\n0 b\na 1\nb 1"));
    for n in 2..=6usize {
        let covers: Vec<String> = (0..n - 1).map(|i| format!("x{i} x{}", i + 1)).collect();
        corpus.push(certify_text(&covers.join("\n")));
    }
    {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x1A77);
        let params = GenParams::default();
        for _ in 0..40 {
            let (_, _, space) = random_simple_game(&mut rng, &params);
            corpus.push(certify_space(&space));
        }
    }
    let mut solved = 0usize;
    let mut failures = 0usize;
    for c in &corpus {
        for &m in c.lat.meet_irreducibles() {
            let strict = build_e(&c.lat, &c.ctx, m).unwrap();
            if let Feasibility::Feasible(sol) = solve_nonneg(&build_e_prime(&strict)).unwrap() {
                solved += 1;
                match integerize(&sol, &strict) {
                    Ok(int) => {
                        if strict.check(&int).unwrap().is_err() {
                            failures += 1;
                        }
                    }
                    Err(_) => failures += 1,
                }
            }
        }
        let omega = build_omega(&c.lat, &c.ctx).unwrap();
        if let Feasibility::Feasible(sol) = solve_nonneg(&build_e_prime(&omega)).unwrap() {
            solved += 1;
            match integerize(&sol, &omega) {
                Ok(int) => {
                    if omega.check(&int).unwrap().is_err() {
                        failures += 1;
                    }
                }
                Err(_) => failures += 1,
            }
        }
    }
    assert!(solved > 100, "corpus exercised {solved} systems");
    assert_eq!(failures, 0, "integerization must never fail the strict check");
    let elapsed = start.elapsed();
    println!(
        "[criterion 8] PASS: {solved} integerizations substitution-checked, zero failures in {elapsed:?}"
    );
}
