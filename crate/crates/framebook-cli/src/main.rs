//! `framebook` command line tool.
//!
//! Exit codes: 0 success, 1 semantic failure (crossings, bound exceeded,
//! algorithm error), 2 input error.

use clap::{Parser, Subcommand};
use framebook::generator::{gen_kframed, gen_witness, GenParams};
use framebook::io::{
    bound, from_json, render_svg, to_json, EmbedMode, EmbeddingDocument, InstanceDocument, IoError, ValidatorStatus,
    WitnessDocument,
};
use framebook::kframed::{augment_cliques, KFramedDrawing};
use framebook::mapgraph::{framed_to_map, map_to_framed};
use framebook::multi_level::{embed, GoodChecks, MultiLevelOptions};
use framebook::oracle::{exact_book_thickness, validate, BookEmbedding};
use framebook::two_level::embed_two_level_drawing;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "framebook", version, about = "Book embeddings of k-framed graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute a book embedding of an instance.
    Embed {
        instance: PathBuf,
        /// Use the two-level construction (at most 3*ceil(k/2)+2 pages).
        #[arg(long)]
        two_level_only: bool,
        /// Check the good-embedding properties after every insertion.
        #[arg(long)]
        debug_good_checks: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check an embedding against an instance.
    Validate { embedding: PathBuf, instance: PathBuf },
    /// Exact book thickness of a small instance.
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value_t = 9)]
        max_n: usize,
    },
    /// Generate a random instance, or a map witness with --witness.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        /// Pentagon faces, every bounded face fully diagonalized (k = 5).
        #[arg(long)]
        pentagon: bool,
        #[arg(long)]
        two_level: bool,
        #[arg(long)]
        witness: bool,
        #[arg(long, default_value_t = 8)]
        nations: usize,
        #[arg(long, default_value_t = 4)]
        points: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Map witness to a 2k-framed instance.
    Map2framed {
        witness: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Instance to a map witness. Faces are completed to cliques first, so
    /// the witness half-square contains the instance graph.
    Framed2map {
        instance: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Arc diagram of an embedding as SVG.
    Render {
        embedding: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Failure with its exit code.
struct Fail {
    code: u8,
    msg: String,
}

fn input(msg: impl std::fmt::Display) -> Fail {
    Fail { code: 2, msg: msg.to_string() }
}
fn semantic(msg: impl std::fmt::Display) -> Fail {
    Fail { code: 1, msg: msg.to_string() }
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Fail> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> Result<KFramedDrawing, Fail> {
    let doc: InstanceDocument = from_json(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    doc.to_drawing().map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_embedding(path: &Path) -> Result<(EmbeddingDocument, BookEmbedding), Fail> {
    let doc: EmbeddingDocument = from_json(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let e = doc.to_embedding().map_err(|e: IoError| input(format!("{}: {e}", path.display())))?;
    Ok((doc, e))
}

fn run(cli: Cli) -> Result<(), Fail> {
    match cli.cmd {
        Cmd::Embed { instance, two_level_only, debug_good_checks, output } => {
            let d = load_instance(&instance)?;
            let (e, mode, repaired, limit) = if two_level_only {
                let (e, _) = embed_two_level_drawing(&d).map_err(semantic)?;
                (e, EmbedMode::TwoLevel, None, 3 * d.k.div_ceil(2) + 2)
            } else {
                let good_checks = if debug_good_checks { GoodChecks::EveryInsertion } else { GoodChecks::Off };
                let (e, r) = embed(&d, MultiLevelOptions { good_checks, ..Default::default() }).map_err(semantic)?;
                for v in &r.violations {
                    eprintln!("good check: {v}");
                }
                if !r.violations.is_empty() {
                    return Err(semantic(format!("{} good-embedding violations", r.violations.len())));
                }
                (e, EmbedMode::MultiLevel, Some(r.stats.repaired_pairs), bound(d.k))
            };
            let crossings = validate(&e, &d.input_edge_pairs()).map_err(semantic)?;
            let status = if crossings.is_empty() { ValidatorStatus::Valid } else { ValidatorStatus::Invalid };
            let mut doc = EmbeddingDocument::from_embedding(&e, status);
            doc.metadata.mode = Some(mode);
            doc.metadata.repaired_pairs = repaired;
            write_out(output.as_deref(), &to_json(&doc))?;
            eprintln!("pages used: {} (limit {limit})", doc.metadata.pages_used);
            if let Some(c) = crossings.first() {
                return Err(semantic(format!(
                    "{} crossing pairs, first {:?} x {:?}",
                    crossings.len(),
                    c.first,
                    c.second
                )));
            }
            if doc.metadata.pages_used > limit {
                return Err(semantic(format!("{} pages exceed the limit {limit}", doc.metadata.pages_used)));
            }
            Ok(())
        }
        Cmd::Validate { embedding, instance } => {
            let (_, e) = load_embedding(&embedding)?;
            let d = load_instance(&instance)?;
            let crossings = validate(&e, &d.input_edge_pairs()).map_err(semantic)?;
            for c in &crossings {
                println!(
                    "crossing on {}: ({}, {}) x ({}, {})",
                    e.registry.name(c.page),
                    c.first.0,
                    c.first.1,
                    c.second.0,
                    c.second.1
                );
            }
            let used = e.pages_used();
            println!("pages used: {used}, bound {}", bound(d.k));
            if !crossings.is_empty() {
                return Err(semantic(format!("{} crossing pairs", crossings.len())));
            }
            if used > bound(d.k) {
                return Err(semantic("bound exceeded"));
            }
            println!("valid");
            Ok(())
        }
        Cmd::Oracle { instance, max_n } => {
            let d = load_instance(&instance)?;
            let sol = exact_book_thickness(d.n(), &d.input_edge_pairs(), max_n).map_err(input)?;
            println!("{}", sol.thickness);
            Ok(())
        }
        Cmd::Generate { seed, k, n, depth, density, pentagon, two_level, witness, nations, points, output } => {
            let text = if witness {
                let w = gen_witness(seed, nations, points, k).map_err(input)?;
                to_json(&WitnessDocument::from_witness(&w))
            } else {
                let p = GenParams { seed, k, n, depth, density, pentagon, two_level };
                let d = gen_kframed(&p).map_err(input)?;
                to_json(&InstanceDocument::from_drawing(&d))
            };
            write_out(output.as_deref(), &text)
        }
        Cmd::Map2framed { witness, output } => {
            let doc: WitnessDocument =
                from_json(&read(&witness)?).map_err(|e| input(format!("{}: {e}", witness.display())))?;
            let w = doc.to_witness().map_err(|e| input(format!("{}: {e}", witness.display())))?;
            let d = map_to_framed(&w).map_err(semantic)?;
            write_out(output.as_deref(), &to_json(&InstanceDocument::from_drawing(&d)))
        }
        Cmd::Framed2map { instance, output } => {
            let d = augment_cliques(&load_instance(&instance)?);
            let w = framed_to_map(&d).map_err(semantic)?;
            write_out(output.as_deref(), &to_json(&WitnessDocument::from_witness(&w)))
        }
        Cmd::Render { embedding, output } => {
            let (_, e) = load_embedding(&embedding)?;
            write_out(Some(&output), &render_svg(&e))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
