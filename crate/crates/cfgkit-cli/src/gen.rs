//! Seeded generator of random simple games, used by `gen-random` and by the
//! round-trip property suites. Every non-sink vertex keeps at least one
//! edge to the sink, so closed components cannot occur; non-simple draws
//! are rejected and resampled.

use cfgkit::engine::{generate_space, Configuration, LabeledSpace, MultiGraph};
use rand::Rng;

#[derive(Debug, Clone)]
pub struct GenParams {
    /// Maximum number of non-sink vertices (the draw picks 1..=this).
    pub max_vertices: usize,
    pub max_mult: u64,
    pub cap: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            max_vertices: 5,
            max_mult: 3,
            cap: 100_000,
        }
    }
}

/// Draws games until one is simple and returns it with its generated
/// space. Initial chips are bounded by twice the out-degree.
pub fn random_simple_game(
    rng: &mut impl Rng,
    params: &GenParams,
) -> (MultiGraph, Configuration, LabeledSpace) {
    loop {
        let nv = rng.gen_range(1..=params.max_vertices);
        let names: Vec<String> = (1..=nv).map(|i| format!("v{i}")).collect();
        let mut edges: Vec<(String, String, u64)> = Vec::new();
        for i in 0..nv {
            for j in 0..nv {
                if i != j && rng.gen_bool(0.5) {
                    edges.push((
                        names[i].clone(),
                        names[j].clone(),
                        rng.gen_range(1..=params.max_mult),
                    ));
                }
            }
            edges.push((names[i].clone(), "s".to_string(), rng.gen_range(1..=params.max_mult)));
        }
        let borrowed: Vec<(&str, &str, u64)> = edges
            .iter()
            .map(|(a, b, k)| (a.as_str(), b.as_str(), *k))
            .collect();
        let graph = MultiGraph::from_edges(&borrowed, &[]);
        let chips: Vec<(String, u64)> = names
            .iter()
            .map(|name| {
                let v = graph.index(name).expect("generator vertex");
                (name.clone(), rng.gen_range(0..=2 * graph.out_degree(v)))
            })
            .collect();
        let pairs: Vec<(&str, u64)> = chips.iter().map(|(s, n)| (s.as_str(), *n)).collect();
        let initial = Configuration::from_pairs(&graph, &pairs).expect("generator chips");
        let space = generate_space(&graph, &initial, params.cap)
            .expect("sink-connected games terminate");
        if space.is_simple() {
            return (graph, initial, space);
        }
    }
}

/// Renders a generated space as a lattice file, with the game recorded in
/// comments.
pub fn lattice_file(graph: &MultiGraph, initial: &Configuration, space: &LabeledSpace) -> String {
    let mut out = String::new();
    out.push_str("# generated by cfgkit gen-random\n# graph:\n");
    for line in graph.dump().lines() {
        out.push_str("#   ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("# chips:\n");
    for line in initial.dump(graph).lines() {
        out.push_str("#   ");
        out.push_str(line);
        out.push('\n');
    }
    let names = space.element_names();
    if space.covers().is_empty() {
        out.push_str(&names[0]);
        out.push('\n');
    }
    for &(a, b, _) in space.covers() {
        out.push_str(&format!("{} {}\n", names[a], names[b]));
    }
    out
}
