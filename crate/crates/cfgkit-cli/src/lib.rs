//! Command implementations behind the `cfgkit` binary. Each command takes
//! file *contents* and returns the text to print plus the process exit
//! code; reading and writing files stays in `main`.
//!
//! Exit codes: 0 accepted/true, 1 rejected/false (certificate on stdout),
//! 2 invalid input, 3 internal assertion failure.

pub mod gen;

use std::fmt::Write as _;

use cfgkit::engine::{generate_space, Configuration, LabeledSpace, MultiGraph};
use cfgkit::feasibility::{build_e, build_omega};
use cfgkit::lattice::{
    check_uld, compute_context, validate_lattice, CoverDag, IrreducibleContext, Lattice,
    UldCertificate,
};
use cfgkit::recognize::{
    recognize_acfg, recognize_asm, recognize_cfg, GameWitness, Model, Recognition,
};
use cfgkit::verify::{verify_witness, StageStatus, VerificationReport};
use cfgkit::{Error, Result};

pub const DEFAULT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Machine,
    Dot,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub stdout: String,
}

impl Outcome {
    pub fn ok(stdout: String) -> Outcome {
        Outcome {
            exit_code: 0,
            stdout,
        }
    }
}

fn certified(lattice_text: &str) -> Result<(Lattice, UldCertificate, IrreducibleContext)> {
    let dag = CoverDag::parse(lattice_text)?;
    let lat = validate_lattice(dag)?;
    let cert = check_uld(&lat)?;
    let ctx = compute_context(&lat, &cert)?;
    Ok((lat, cert, ctx))
}

fn meet_irr_names(lat: &Lattice) -> Vec<String> {
    lat.meet_irreducibles()
        .iter()
        .map(|&m| lat.name(m).to_string())
        .collect()
}

fn indent(text: &str, out: &mut String) {
    for line in text.lines() {
        out.push_str("  ");
        out.push_str(line);
        out.push('\n');
    }
}

pub fn run_check_uld(lattice_text: &str, format: Format) -> Result<Outcome> {
    let dag = CoverDag::parse(lattice_text)?;
    let warnings = dag.warnings().to_vec();
    let lat = validate_lattice(dag)?;
    let cert = check_uld(&lat)?;
    let mut out = String::new();
    match format {
        Format::Machine => {
            out.push_str("command: check-uld\nuld: yes\n");
            writeln!(out, "elements: {}", lat.len()).unwrap();
            writeln!(out, "height: {}", cert.height()).unwrap();
            writeln!(out, "meet-irreducibles: {}", meet_irr_names(&lat).join(" ")).unwrap();
            out.push_str("cover-labels:\n");
            for (&(x, y), &m) in lat.covers().iter().zip(cert.labels()) {
                writeln!(
                    out,
                    "  {} {} {}",
                    lat.name(x),
                    lat.name(y),
                    lat.name(lat.meet_irreducibles()[m])
                )
                .unwrap();
            }
            for w in &warnings {
                writeln!(out, "warning: {w}").unwrap();
            }
        }
        _ => {
            writeln!(
                out,
                "ULD lattice: {} elements, height {}, meet-irreducibles {{{}}}",
                lat.len(),
                cert.height(),
                meet_irr_names(&lat).join(" ")
            )
            .unwrap();
            for w in &warnings {
                writeln!(out, "note: {w}").unwrap();
            }
        }
    }
    Ok(Outcome::ok(out))
}

pub fn run_irreducibles(lattice_text: &str, format: Format) -> Result<Outcome> {
    let (lat, _cert, ctx) = certified(lattice_text)?;
    let mut out = String::new();
    let join_names: Vec<String> = lat
        .join_irreducibles()
        .iter()
        .map(|&j| lat.name(j).to_string())
        .collect();
    if format == Format::Machine {
        out.push_str("command: irreducibles\n");
        writeln!(out, "elements: {}", lat.len()).unwrap();
    }
    writeln!(out, "meet-irreducibles: {}", meet_irr_names(&lat).join(" ")).unwrap();
    writeln!(out, "join-irreducibles: {}", join_names.join(" ")).unwrap();
    for (p, &m) in lat.meet_irreducibles().iter().enumerate() {
        writeln!(out, "m: {}", lat.name(m)).unwrap();
        let names = |set: &[usize]| {
            set.iter()
                .map(|&x| lat.name(x).to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(out, "  U: {}", names(ctx.u_set(p))).unwrap();
        writeln!(out, "  L: {}", names(ctx.l_set(p))).unwrap();
    }
    Ok(Outcome::ok(out))
}

pub fn run_systems(lattice_text: &str, format: Format) -> Result<Outcome> {
    let (lat, _cert, ctx) = certified(lattice_text)?;
    let mut out = String::new();
    if format == Format::Machine {
        out.push_str("command: systems\n");
        writeln!(out, "elements: {}", lat.len()).unwrap();
    }
    for &m in lat.meet_irreducibles() {
        let sys = build_e(&lat, &ctx, m)?;
        writeln!(out, "system[{}]:", lat.name(m)).unwrap();
        indent(&sys.dump(), &mut out);
    }
    let omega = build_omega(&lat, &ctx)?;
    out.push_str("system[omega]:\n");
    indent(&omega.dump(), &mut out);
    Ok(Outcome::ok(out))
}

fn run_model(
    lat: &Lattice,
    cert: &UldCertificate,
    ctx: &IrreducibleContext,
    model: Model,
) -> Result<Recognition> {
    match model {
        Model::Cfg => recognize_cfg(lat, cert, ctx),
        Model::Asm => recognize_asm(lat, cert, ctx),
        Model::Acfg => recognize_acfg(lat, cert, ctx),
    }
}

fn witness_dot(w: &GameWitness) -> String {
    let mut out = String::from("digraph witness {\n");
    let g = &w.graph;
    for v in 0..g.len() {
        writeln!(out, "  \"{}\" [label=\"{} ({})\"];", g.name(v), g.name(v), w.initial.get(v))
            .unwrap();
    }
    for u in 0..g.len() {
        for v in 0..g.len() {
            if g.mult(u, v) > 0 {
                writeln!(
                    out,
                    "  \"{}\" -> \"{}\" [label=\"{}\"];",
                    g.name(u),
                    g.name(v),
                    g.mult(u, v)
                )
                .unwrap();
            }
        }
    }
    out.push_str("}\n");
    out
}

fn verification_line(report: &VerificationReport) -> String {
    report
        .stages
        .iter()
        .map(|s| {
            format!(
                "{}={}",
                s.name,
                match s.status {
                    StageStatus::Pass => "pass",
                    StageStatus::Fail => "fail",
                    StageStatus::Skipped => "skipped",
                }
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Runs one or all recognizers. With a single model the exit code reports
/// that model's decision; with `models` covering all three, exit 0 means
/// the lattice is game-generated at all (the general model accepts).
pub fn run_recognize(
    lattice_text: &str,
    models: &[Model],
    format: Format,
    cap: usize,
) -> Result<Outcome> {
    let (lat, cert, ctx) = certified(lattice_text)?;
    let mut out = String::new();
    if format == Format::Machine {
        out.push_str("command: recognize\n");
        writeln!(out, "elements: {}", lat.len()).unwrap();
    }
    let mut decisions = Vec::new();
    for (i, &model) in models.iter().enumerate() {
        if i > 0 && format != Format::Dot {
            out.push('\n');
        }
        let recognition = run_model(&lat, &cert, &ctx, model)?;
        match &recognition {
            Recognition::Accepted(witness) => {
                // The construction's guarantees are re-checked here; a
                // failure is a bug in this crate, not bad input.
                let report = verify_witness(witness, &lat, &cert, cap)?;
                if !report.passed() {
                    let stage = report.first_failure().expect("failed report has a stage");
                    return Err(Error::Internal(format!(
                        "accepted witness failed verification at {}: {}",
                        stage.name, stage.detail
                    )));
                }
                match format {
                    Format::Dot => {
                        out.push_str(&witness_dot(witness));
                    }
                    Format::Machine => {
                        writeln!(out, "model: {model}").unwrap();
                        out.push_str("decision: accept\n");
                        out.push_str("graph:\n");
                        indent(&witness.graph.dump(), &mut out);
                        out.push_str("chips:\n");
                        indent(&witness.initial.dump(&witness.graph), &mut out);
                        for (m, sol) in &witness.solutions {
                            writeln!(out, "solution[{m}]:").unwrap();
                            for (var, value) in sol.iter() {
                                writeln!(out, "  {var}: {value}").unwrap();
                            }
                        }
                        writeln!(out, "verification: {}", verification_line(&report)).unwrap();
                    }
                    Format::Text => {
                        writeln!(out, "model {model}: accepted").unwrap();
                        out.push_str("witness graph:\n");
                        out.push_str(&witness.graph.dump());
                        out.push_str("\ninitial configuration:\n");
                        out.push_str(&witness.initial.dump(&witness.graph));
                        out.push('\n');
                        writeln!(out, "verification: {}", verification_line(&report)).unwrap();
                    }
                }
                decisions.push((model, true));
            }
            Recognition::Rejected(rejection) => {
                match format {
                    Format::Machine => {
                        writeln!(out, "model: {model}").unwrap();
                        out.push_str("decision: reject\n");
                        writeln!(out, "certificate: {}", rejection.describe()).unwrap();
                    }
                    _ => {
                        writeln!(out, "model {model}: rejected — {}", rejection.describe())
                            .unwrap();
                    }
                }
                decisions.push((model, false));
            }
        }
    }
    let accepted_any = decisions.iter().any(|&(_, ok)| ok);
    Ok(Outcome {
        exit_code: if accepted_any { 0 } else { 1 },
        stdout: out,
    })
}

fn space_dot(space: &LabeledSpace) -> String {
    let names = space.element_names();
    let mut out = String::from("digraph space {\n");
    for name in &names {
        writeln!(out, "  \"{name}\";").unwrap();
    }
    for &(a, b, v) in space.covers() {
        writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\"];",
            names[a],
            names[b],
            space.graph().name(v)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn run_simulate(
    graph_text: &str,
    chips_text: &str,
    format: Format,
    cap: usize,
) -> Result<Outcome> {
    let graph = MultiGraph::parse(graph_text)?;
    let initial = Configuration::parse(&graph, chips_text)?;
    let space = generate_space(&graph, &initial, cap)?;
    let mut out = String::new();
    match format {
        Format::Dot => out.push_str(&space_dot(&space)),
        Format::Machine => {
            out.push_str("command: simulate\n");
            writeln!(out, "configurations: {}", space.len()).unwrap();
            writeln!(out, "covers: {}", space.covers().len()).unwrap();
            writeln!(out, "simple: {}", if space.is_simple() { "yes" } else { "no" }).unwrap();
            let names = space.element_names();
            writeln!(out, "top: {}", names[space.top()]).unwrap();
            for (i, name) in names.iter().enumerate() {
                writeln!(out, "config[{name}]:").unwrap();
                indent(&space.config(i).dump(space.graph()), &mut out);
            }
            out.push_str("covers-list:\n");
            indent(&space.dump_cover_list(), &mut out);
        }
        Format::Text => {
            let names = space.element_names();
            writeln!(
                out,
                "# {} configurations, top {}, simple: {}",
                space.len(),
                names[space.top()],
                if space.is_simple() { "yes" } else { "no" }
            )
            .unwrap();
            out.push_str(&space.dump_cover_list());
            out.push('\n');
        }
    }
    Ok(Outcome::ok(out))
}

pub fn run_verify(
    lattice_text: &str,
    graph_text: &str,
    chips_text: &str,
    model: Model,
    format: Format,
    cap: usize,
) -> Result<Outcome> {
    let (lat, cert, _ctx) = certified(lattice_text)?;
    let graph = MultiGraph::parse(graph_text)?;
    let initial = Configuration::parse(&graph, chips_text)?;
    let witness = GameWitness {
        model,
        graph,
        initial,
        solutions: Default::default(),
    };
    let report = verify_witness(&witness, &lat, &cert, cap)?;
    let mut out = String::new();
    if format == Format::Machine {
        out.push_str("command: verify\n");
        writeln!(out, "model: {model}").unwrap();
    }
    for stage in &report.stages {
        let status = match stage.status {
            StageStatus::Pass => "pass",
            StageStatus::Fail => "fail",
            StageStatus::Skipped => "skipped",
        };
        writeln!(out, "stage[{}]: {} ({})", stage.name, status, stage.detail).unwrap();
    }
    if format == Format::Machine && !report.bijection.is_empty() {
        out.push_str("bijection:\n");
        for (element, config) in &report.bijection {
            writeln!(out, "  {element} {config}").unwrap();
        }
    }
    writeln!(
        out,
        "verdict: {}",
        if report.passed() { "pass" } else { "fail" }
    )
    .unwrap();
    Ok(Outcome {
        exit_code: if report.passed() { 0 } else { 1 },
        stdout: out,
    })
}

/// Generates `count` random simple games and returns `(file name, lattice
/// file)` pairs.
pub fn run_gen_random(
    seed: u64,
    count: usize,
    params: &gen::GenParams,
) -> Vec<(String, String)> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let (graph, initial, space) = gen::random_simple_game(&mut rng, params);
            (
                format!("gen-{seed}-{i}.lat"),
                gen::lattice_file(&graph, &initial, &space),
            )
        })
        .collect()
}
