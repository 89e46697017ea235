use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cfgkit::recognize::Model;
use cfgkit_cli::{
    gen::GenParams, run_check_uld, run_gen_random, run_irreducibles, run_recognize, run_simulate,
    run_systems, run_verify, Format, Outcome, DEFAULT_CAP,
};

#[derive(Parser)]
#[command(
    name = "cfgkit",
    version,
    about = "Decide whether a finite lattice is generated by a chip-firing game"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Machine,
}

#[derive(Clone, Copy, ValueEnum)]
enum WideFormatArg {
    Text,
    Machine,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Cfg,
    Asm,
    Acfg,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum SingleModelArg {
    Cfg,
    Asm,
    Acfg,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Machine => Format::Machine,
        }
    }
}

impl From<WideFormatArg> for Format {
    fn from(f: WideFormatArg) -> Format {
        match f {
            WideFormatArg::Text => Format::Text,
            WideFormatArg::Machine => Format::Machine,
            WideFormatArg::Dot => Format::Dot,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check that the input is an upper locally distributive lattice.
    CheckUld {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// List irreducibles and the per-meet-irreducible context sets.
    Irreducibles {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Dump the activation systems and their joint symmetric variant.
    Systems {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Decide class membership and synthesize a certified witness game.
    Recognize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "cfg")]
        model: ModelArg,
        #[arg(long, value_enum, default_value = "text")]
        format: WideFormatArg,
        /// Configuration-space bound (default 1000000; CFGKIT_CAP overrides).
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Play a game to its fixed point and emit the labeled cover list.
    Simulate {
        /// Support graph file (`U V K` lines).
        #[arg(long)]
        input: PathBuf,
        /// Initial configuration file (`V N` lines).
        #[arg(long)]
        chips: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: WideFormatArg,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Certify a game against a lattice: structure, termination,
    /// simplicity, isomorphism.
    Verify {
        /// Lattice file (cover list).
        #[arg(long)]
        input: PathBuf,
        /// Support graph file.
        #[arg(long)]
        graph: PathBuf,
        /// Initial configuration file.
        #[arg(long)]
        chips: PathBuf,
        #[arg(long, value_enum, default_value = "cfg")]
        model: SingleModelArg,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate lattices of random simple games for test corpora.
    GenRandom {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Maximum number of non-sink vertices.
        #[arg(long, default_value_t = 5)]
        vertices: usize,
        #[arg(long, default_value_t = 3)]
        max_mult: u64,
        #[arg(long)]
        cap: Option<usize>,
        /// Directory for the generated files; required when count > 1.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn resolve_cap(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("CFGKIT_CAP")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(DEFAULT_CAP)
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn models(arg: ModelArg) -> Vec<Model> {
    match arg {
        ModelArg::Cfg => vec![Model::Cfg],
        ModelArg::Asm => vec![Model::Asm],
        ModelArg::Acfg => vec![Model::Acfg],
        ModelArg::All => vec![Model::Cfg, Model::Asm, Model::Acfg],
    }
}

fn dispatch(cli: Cli) -> Result<(Outcome, Option<PathBuf>), (String, u8)> {
    let lib = |e: cfgkit::Error| {
        let code = if e.is_internal() { 3 } else { 2 };
        (format!("error: {e}"), code)
    };
    let io = |msg: String| (format!("error: {msg}"), 2);
    match cli.command {
        Command::CheckUld {
            input,
            format,
            output,
        } => {
            let text = read(&input).map_err(io)?;
            run_check_uld(&text, format.into())
                .map(|o| (o, output))
                .map_err(lib)
        }
        Command::Irreducibles {
            input,
            format,
            output,
        } => {
            let text = read(&input).map_err(io)?;
            run_irreducibles(&text, format.into())
                .map(|o| (o, output))
                .map_err(lib)
        }
        Command::Systems {
            input,
            format,
            output,
        } => {
            let text = read(&input).map_err(io)?;
            run_systems(&text, format.into())
                .map(|o| (o, output))
                .map_err(lib)
        }
        Command::Recognize {
            input,
            model,
            format,
            cap,
            output,
        } => {
            let text = read(&input).map_err(io)?;
            run_recognize(&text, &models(model), format.into(), resolve_cap(cap))
                .map(|o| (o, output))
                .map_err(lib)
        }
        Command::Simulate {
            input,
            chips,
            format,
            cap,
            output,
        } => {
            let graph = read(&input).map_err(io)?;
            let conf = read(&chips).map_err(io)?;
            run_simulate(&graph, &conf, format.into(), resolve_cap(cap))
                .map(|o| (o, output))
                .map_err(lib)
        }
        Command::Verify {
            input,
            graph,
            chips,
            model,
            format,
            cap,
            output,
        } => {
            let lattice = read(&input).map_err(io)?;
            let graph = read(&graph).map_err(io)?;
            let conf = read(&chips).map_err(io)?;
            let model = match model {
                SingleModelArg::Cfg => Model::Cfg,
                SingleModelArg::Asm => Model::Asm,
                SingleModelArg::Acfg => Model::Acfg,
            };
            run_verify(
                &lattice,
                &graph,
                &conf,
                model,
                format.into(),
                resolve_cap(cap),
            )
            .map(|o| (o, output))
            .map_err(lib)
        }
        Command::GenRandom {
            seed,
            count,
            vertices,
            max_mult,
            cap,
            output,
        } => {
            let params = GenParams {
                max_vertices: vertices.max(1),
                max_mult: max_mult.max(1),
                cap: resolve_cap(cap),
            };
            let files = run_gen_random(seed, count, &params);
            match output {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)
                        .map_err(|e| io(format!("cannot create {}: {e}", dir.display())))?;
                    let mut listing = String::new();
                    for (name, content) in &files {
                        let path = dir.join(name);
                        std::fs::write(&path, content)
                            .map_err(|e| io(format!("cannot write {}: {e}", path.display())))?;
                        listing.push_str(name);
                        listing.push('\n');
                    }
                    Ok((Outcome::ok(listing), None))
                }
                None if count <= 1 => {
                    let content = files.into_iter().next().map(|(_, c)| c).unwrap_or_default();
                    Ok((Outcome::ok(content), None))
                }
                None => Err(io("--output DIR is required when count > 1".to_string())),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = std::panic::catch_unwind(|| dispatch(cli));
    match result {
        Err(_) => {
            eprintln!("error: internal assertion failure");
            ExitCode::from(3)
        }
        Ok(Err((message, code))) => {
            eprintln!("{message}");
            ExitCode::from(code)
        }
        Ok(Ok((outcome, output))) => {
            match output {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, &outcome.stdout) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{}", outcome.stdout),
            }
            ExitCode::from(outcome.exit_code as u8)
        }
    }
}
