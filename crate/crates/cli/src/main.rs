//! Command line front end: verify instances, kernelize them, generate
//! labeled families, and benchmark the backends.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use layered_assign_core::generate::{
    gen_and_cross, gen_conp_instance, gen_mcis_instance, gen_or_cross, gen_random, ColoredGraph,
    Digraph, Label, LabeledInstance,
};
use layered_assign_core::kernel::{kernelize, KernelResult};
use layered_assign_core::model::{parse_instance, serialize_instance};
use layered_assign_core::verify::VerifyError;
use layered_assign_core::{check_witness, render_verdict, verify, Algo, Instance, Notion};

#[derive(Parser)]
#[command(name = "layered-assign", about = "Verify assignments under layered preferences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide optimality of an instance file; exit 0 = optimal, 1 = not
    /// optimal, 2 = error.
    Verify {
        #[arg(long, value_enum)]
        notion: NotionArg,
        #[arg(long, value_enum, default_value_t = AlgoArg::Auto)]
        algo: AlgoArg,
        /// Print the witness lines for not-optimal verdicts.
        #[arg(long)]
        witness: bool,
        file: PathBuf,
    },
    /// Strip unallocated agents and items; prints the reduced instance on
    /// stdout and a removal summary on stderr. Exit 1 means preprocessing
    /// already settled the verdict as not optimal.
    Kernelize {
        #[arg(long, value_enum, default_value_t = NotionArg::Oa)]
        notion: NotionArg,
        file: PathBuf,
    },
    /// Emit a generated instance with a trailing `# label:` comment.
    Generate {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, value_enum, default_value_t = NotionArg::Oa)]
        notion: NotionArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Digraph file (`n` line, then 1-indexed `u v` lines); repeat for
        /// the cross families. Random digraphs are drawn when absent.
        #[arg(long = "digraph")]
        digraphs: Vec<PathBuf>,
        /// Vertex count for generated digraphs and colored graphs.
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Number of composed digraphs for the cross families.
        #[arg(long, default_value_t = 2)]
        t: usize,
        /// Color count for the independent-set family.
        #[arg(long, default_value_t = 3)]
        colors: usize,
        /// Item count for the random family.
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        layers: usize,
        #[arg(long, default_value_t = 3)]
        d_max: usize,
        #[arg(long, default_value_t = 0.5)]
        fraction: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time one backend across a size grid; tab-separated rows, breached
    /// resource caps marked TIMEOUT.
    Bench {
        #[arg(long, value_enum)]
        family: Family,
        /// Comma-separated sizes, e.g. `12,14,16`.
        #[arg(long, default_value = "")]
        grid: String,
        #[arg(long, value_enum, default_value_t = NotionArg::Oa)]
        notion: NotionArg,
        #[arg(long, value_enum, default_value_t = AlgoArg::Auto)]
        algo: AlgoArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        layers: usize,
        #[arg(long, default_value_t = 2)]
        t: usize,
        #[arg(long, default_value_t = 3)]
        colors: usize,
        /// Override the instance parameter k (random family default: 2).
        #[arg(long)]
        k: Option<u32>,
        /// Override the instance parameter alpha (random family default:
        /// half the layers, rounded up).
        #[arg(long)]
        alpha: Option<u32>,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum NotionArg {
    Oa,
    Uoa,
    Soa,
}

impl From<NotionArg> for Notion {
    fn from(v: NotionArg) -> Notion {
        match v {
            NotionArg::Oa => Notion::Oa,
            NotionArg::Uoa => Notion::Uoa,
            NotionArg::Soa => Notion::Soa,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Auto,
    Oracle,
    Dp,
    Xp,
    Dk,
    Poly,
}

impl From<AlgoArg> for Algo {
    fn from(v: AlgoArg) -> Algo {
        match v {
            AlgoArg::Auto => Algo::Auto,
            AlgoArg::Oracle => Algo::Oracle,
            AlgoArg::Dp => Algo::Dp,
            AlgoArg::Xp => Algo::Xp,
            AlgoArg::Dk => Algo::Dk,
            AlgoArg::Poly => Algo::Poly,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Family {
    Conp,
    Mcis,
    AndCc,
    OrCc,
    Random,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Verify { notion, algo, witness, file } => cmd_verify(notion.into(), algo.into(), witness, &file),
        Command::Kernelize { notion, file } => cmd_kernelize(notion.into(), &file),
        Command::Generate {
            family,
            notion,
            seed,
            digraphs,
            n,
            t,
            colors,
            m,
            layers,
            d_max,
            fraction,
            out,
        } => cmd_generate(GenerateConfig {
            family,
            notion: notion.into(),
            seed,
            digraphs,
            n,
            t,
            colors,
            m,
            layers,
            d_max,
            fraction,
            out,
        }),
        Command::Bench { family, grid, notion, algo, seed, layers, t, colors, k, alpha } => {
            let cfg = BenchConfig { family, notion: notion.into(), algo: algo.into(), seed, layers, t, colors, k, alpha };
            cmd_bench(&grid, cfg)
        }
    }
}

fn load_instance(file: &PathBuf) -> Result<Instance> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let inst = parse_instance(&text).with_context(|| format!("parsing {}", file.display()))?;
    let report = inst.validate();
    if !report.is_valid() {
        for problem in &report.errors {
            eprintln!("invalid: {problem}");
        }
        bail!("instance failed validation");
    }
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(inst)
}

fn cmd_verify(notion: Notion, algo: Algo, witness: bool, file: &PathBuf) -> Result<u8> {
    let inst = load_instance(file)?;
    let verdict = verify(&inst, notion, algo)?;
    if !verdict.optimal && !check_witness(&inst, notion, &verdict) {
        bail!("internal error: witness failed its self-check");
    }
    print!("{}", render_verdict(&inst, &verdict, witness));
    Ok(u8::from(!verdict.optimal))
}

fn cmd_kernelize(notion: Notion, file: &PathBuf) -> Result<u8> {
    let inst = load_instance(file)?;
    match kernelize(&inst, notion) {
        KernelResult::Reduced(kernel) => {
            print!("{}", serialize_instance(&kernel.instance));
            eprintln!("removed: {} agents, {} items", kernel.removed_agents.len(), kernel.removed_items.len());
            Ok(0)
        }
        KernelResult::Rejected { agent, loops } => {
            eprintln!(
                "rejected: agent {} has self loops in {} layers",
                inst.agent_name(agent),
                loops.len()
            );
            Ok(1)
        }
    }
}

struct GenerateConfig {
    family: Family,
    notion: Notion,
    seed: u64,
    digraphs: Vec<PathBuf>,
    n: usize,
    t: usize,
    colors: usize,
    m: usize,
    layers: usize,
    d_max: usize,
    fraction: f64,
    out: Option<PathBuf>,
}

fn load_digraphs(paths: &[PathBuf], want: usize, n: usize, seed: u64) -> Result<Vec<Digraph>> {
    if paths.is_empty() {
        return Ok((0..want).map(|i| Digraph::random(n, 0.5, seed.wrapping_add(i as u64))).collect());
    }
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Digraph::from_text(&text).with_context(|| format!("parsing {}", p.display()))
        })
        .collect()
}

fn cmd_generate(cfg: GenerateConfig) -> Result<u8> {
    let mut metadata = Vec::new();
    let generated = match cfg.family {
        Family::Conp => {
            let g = load_digraphs(&cfg.digraphs, 1, cfg.n, cfg.seed)?;
            if g.len() != 1 {
                bail!("this family takes exactly one digraph");
            }
            metadata.push(format!("# max-out-degree: {}", g[0].max_out_degree()));
            gen_conp_instance(&g[0], cfg.notion)
        }
        Family::Mcis => {
            if cfg.colors < 2 || cfg.colors > cfg.n {
                bail!("color count must lie in 2..=n");
            }
            let g = ColoredGraph::random(cfg.n, cfg.colors, 0.4, cfg.seed);
            gen_mcis_instance(&g)?
        }
        Family::AndCc => {
            let gs = load_digraphs(&cfg.digraphs, cfg.t, cfg.n, cfg.seed)?;
            let degree = gs.iter().map(Digraph::max_out_degree).max().unwrap_or(0);
            metadata.push(format!("# max-out-degree: {degree}"));
            gen_and_cross(&gs, cfg.notion)?
        }
        Family::OrCc => {
            let gs = load_digraphs(&cfg.digraphs, cfg.t, cfg.n, cfg.seed)?;
            let degree = gs.iter().map(Digraph::max_out_degree).max().unwrap_or(0);
            metadata.push(format!("# max-out-degree: {degree}"));
            gen_or_cross(&gs, cfg.notion)?
        }
        Family::Random => {
            let instance =
                gen_random(cfg.n, cfg.m, cfg.layers, cfg.d_max.min(cfg.m), cfg.fraction, cfg.seed);
            LabeledInstance { instance, label: Label::Unknown }
        }
    };

    let mut doc = serialize_instance(&generated.instance);
    for line in metadata {
        doc.push_str(&line);
        doc.push('\n');
    }
    doc.push_str(&format!("# label: {}\n", generated.label));
    match &cfg.out {
        Some(path) => fs::write(path, doc).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{doc}"),
    }
    Ok(0)
}

struct BenchConfig {
    family: Family,
    notion: Notion,
    algo: Algo,
    seed: u64,
    layers: usize,
    t: usize,
    colors: usize,
    k: Option<u32>,
    alpha: Option<u32>,
}

fn cmd_bench(grid: &str, cfg: BenchConfig) -> Result<u8> {
    let sizes: Vec<usize> = grid
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().with_context(|| format!("bad grid entry {s:?}")))
        .collect::<Result<_>>()?;
    println!("family\tsize\tnotion\talgo\toutcome\tms\tsubsets\tcycles\ttable_bits");
    for size in sizes {
        if size < 2 && cfg.family != Family::Random {
            bail!("grid sizes must be at least 2 for this family");
        }
        let seed = cfg.seed;
        let mut instance = match cfg.family {
            Family::Conp => gen_conp_instance(&Digraph::random(size, 0.5, seed), cfg.notion).instance,
            Family::Mcis => {
                gen_mcis_instance(&ColoredGraph::random(size, cfg.colors.clamp(2, size), 0.4, seed))?
                    .instance
            }
            Family::AndCc => {
                let gs: Vec<_> = (0..cfg.t)
                    .map(|i| Digraph::random(size, 0.5, seed.wrapping_add(i as u64)))
                    .collect();
                gen_and_cross(&gs, cfg.notion)?.instance
            }
            Family::OrCc => {
                let gs: Vec<_> = (0..cfg.t)
                    .map(|i| Digraph::random(size, 0.5, seed.wrapping_add(i as u64)))
                    .collect();
                gen_or_cross(&gs, cfg.notion)?.instance
            }
            Family::Random => {
                let inst = gen_random(size, size, cfg.layers, 4.min(size), 1.0, seed);
                let alpha = (cfg.layers as u32).div_ceil(2);
                inst.with_params(2, alpha)
            }
        };
        if cfg.k.is_some() || cfg.alpha.is_some() {
            instance = instance
                .with_params(cfg.k.unwrap_or(instance.k()), cfg.alpha.unwrap_or(instance.alpha()));
        }
        let started = Instant::now();
        let outcome = verify(&instance, cfg.notion, cfg.algo);
        let ms = started.elapsed().as_millis();
        let family_tag = family_tag(cfg.family);
        let notion = cfg.notion;
        match outcome {
            Ok(v) => println!(
                "{family_tag}\t{size}\t{notion}\t{}\t{}\t{ms}\t{}\t{}\t{}",
                v.algorithm,
                if v.optimal { "optimal" } else { "not-optimal" },
                v.stats.subsets_examined,
                v.stats.cycles_enumerated,
                v.stats.table_bits,
            ),
            Err(VerifyError::ResourceLimit(_)) => {
                println!("{family_tag}\t{size}\t{notion}\t{}\tTIMEOUT\t{ms}\t0\t0\t0", cfg.algo);
            }
            Err(VerifyError::InapplicableBackend { .. }) => {
                println!("{family_tag}\t{size}\t{notion}\t{}\tSKIPPED\t{ms}\t0\t0\t0", cfg.algo);
            }
        }
    }
    Ok(0)
}

fn family_tag(family: Family) -> &'static str {
    match family {
        Family::Conp => "conp",
        Family::Mcis => "mcis",
        Family::AndCc => "and-cc",
        Family::OrCc => "or-cc",
        Family::Random => "random",
    }
}
