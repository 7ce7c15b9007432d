use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tsproject_core::diophantine::{has_nonneg_solution, SolvabilityInstance};
use tsproject_core::finite_projection::m_separated;
use tsproject_core::oracle_testkit::window_common_ancestor;
use tsproject_core::{
    canonical_ts_dag, cutoff_bound, marginal_ts_admg_with, marginal_ts_dmag_with, parse_template, verify,
    CommonAncestorSolver, ConeTuple, FiniteMixedGraph, Method, ProjectionOptions, TsGraphTemplate, Vertex,
};

/// Finite-window projections of stationary time-series causal graphs.
///
/// `--window p` always means the window t-p ..= t, i.e. p+1 time steps.
#[derive(Parser)]
#[command(name = "tsproject", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Marginal ts-ADMG on the observed variables over t-p ..= t
    ProjectAdmg(ProjectArgs),
    /// Marginal ts-DMAG on the observed variables over t-p ..= t
    ProjectDmag(ProjectArgs),
    /// Whether (i, t-tau) and (j, t) have a common ancestor
    Ancestor(AncestorArgs),
    /// m-separation query on a finite graph file
    Msep(MsepArgs),
    /// Cutoff quantities K, L, M and p_cut
    Cutoff(CutoffArgs),
    /// Solvability of `a0 + sum n a = b0 + sum m b` over non-negative integers
    Dioph(DiophArgs),
    /// Run the seeded oracle-equivalence suites
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Dioph,
    Window,
    Auto,
}

impl MethodArg {
    fn resolve(self) -> Method {
        match self {
            MethodArg::Window => Method::Window,
            MethodArg::Dioph | MethodArg::Auto => Method::Dioph,
        }
    }
}

#[derive(Args)]
struct ProjectArgs {
    /// Template JSON file
    #[arg(long)]
    graph: PathBuf,
    /// Comma-separated observed variables (default: all)
    #[arg(long, value_delimiter = ',')]
    observed: Vec<String>,
    /// Window length p; the window has p+1 time steps
    #[arg(long)]
    window: u64,
    #[arg(long, value_enum, default_value = "dioph")]
    method: MethodArg,
    /// Write JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a DOT rendering
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Worker threads for the vertex-pair scan
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Print cycle classes and graph of cycles to stderr
    #[arg(long)]
    explain: bool,
}

#[derive(Args)]
struct AncestorArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    i: String,
    #[arg(long)]
    tau: u64,
    #[arg(long)]
    j: String,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    /// Print a JSON trace of paths, monoids and cone tuples
    #[arg(long)]
    explain: bool,
}

#[derive(Args)]
struct MsepArgs {
    /// Finite graph JSON file
    #[arg(long)]
    marginal: PathBuf,
    /// Comma-separated vertices such as `X[t-1]`
    #[arg(long, value_delimiter = ',', required = true)]
    x: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    y: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    z: Vec<String>,
}

#[derive(Args)]
struct CutoffArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    window: u64,
}

#[derive(Args)]
struct DiophArgs {
    /// Left tuple, e.g. `0;2,3`
    lhs: String,
    /// Right tuple, e.g. `1;2,3`
    rhs: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, env = "TSPROJECT_SEED", default_value_t = 0)]
    seed: u64,
    /// Percentage of the default suite sizes
    #[arg(long, default_value_t = 100)]
    scale: usize,
}

fn read_template(path: &Path) -> Result<TsGraphTemplate> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_template(&text).with_context(|| format!("invalid template {}", path.display()))
}

fn variable(tpl: &TsGraphTemplate, name: &str) -> Result<usize> {
    Ok(tpl.index_of(name)?)
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn project(args: &ProjectArgs, dmag: bool) -> Result<()> {
    let tpl = read_template(&args.graph)?;
    let observed: Vec<usize> = if args.observed.is_empty() {
        (0..tpl.n_vars()).collect()
    } else {
        args.observed.iter().map(|n| variable(&tpl, n)).collect::<Result<_>>()?
    };
    let opts = ProjectionOptions { method: args.method.resolve(), jobs: args.jobs };
    if args.explain {
        let solver = CommonAncestorSolver::new(&canonical_ts_dag(&tpl))?;
        let names = solver.summary().nodes();
        let classes: Vec<serde_json::Value> = solver
            .classes()
            .iter()
            .map(|c| {
                serde_json::json!({
                    "cycle": c.representative.iter().map(|&v| &names[v]).collect::<Vec<_>>(),
                    "weights": c.weights,
                })
            })
            .collect();
        let trace = serde_json::json!({
            "cycle_classes": classes,
            "graph_of_cycles": solver.graph_of_cycles().adjacency,
        });
        eprintln!("{trace}");
    }
    let g = if dmag {
        marginal_ts_dmag_with(&tpl, &observed, args.window, &opts)?
    } else {
        marginal_ts_admg_with(&tpl, &observed, args.window, &opts)?
    };
    write_or_print(args.out.as_deref(), &g.to_json())?;
    if let Some(dot) = &args.dot {
        fs::write(dot, g.to_dot()).with_context(|| format!("writing {}", dot.display()))?;
    }
    Ok(())
}

fn ancestor(args: &AncestorArgs) -> Result<()> {
    let tpl = canonical_ts_dag(&read_template(&args.graph)?);
    let (i, j) = (variable(&tpl, &args.i)?, variable(&tpl, &args.j)?);
    let solver = CommonAncestorSolver::new(&tpl)?;
    if args.explain {
        println!("{}", serde_json::to_string_pretty(&solver.explain(i, args.tau, j)?)?);
        return Ok(());
    }
    let answer = match args.method.resolve() {
        Method::Dioph => solver.query(i, args.tau, j)?,
        Method::Window => {
            let w = cutoff_bound(&tpl, args.tau)?.p_cut;
            window_common_ancestor(&tpl, i, args.tau, j, w)?
        }
    };
    println!("{answer}");
    Ok(())
}

fn vertex_set(g: &FiniteMixedGraph, labels: &[String]) -> Result<BTreeSet<Vertex>> {
    labels
        .iter()
        .filter(|l| !l.trim().is_empty())
        .map(|l| g.parse_label(l).with_context(|| format!("vertex `{l}`")))
        .collect()
}

fn msep(args: &MsepArgs) -> Result<()> {
    let text = fs::read_to_string(&args.marginal).with_context(|| format!("reading {}", args.marginal.display()))?;
    let g = FiniteMixedGraph::from_json(&text).with_context(|| format!("invalid graph {}", args.marginal.display()))?;
    let (x, y, z) = (vertex_set(&g, &args.x)?, vertex_set(&g, &args.y)?, vertex_set(&g, &args.z)?);
    println!("{}", m_separated(&g, &x, &y, &z)?);
    Ok(())
}

fn cutoff(args: &CutoffArgs) -> Result<()> {
    let tpl = canonical_ts_dag(&read_template(&args.graph)?);
    let c = cutoff_bound(&tpl, args.window)?;
    println!("K={} L={} M={} p_cut={}", c.k, c.l, c.m, c.p_cut);
    Ok(())
}

fn dioph(args: &DiophArgs) -> Result<()> {
    let lhs: ConeTuple = args.lhs.parse()?;
    let rhs: ConeTuple = args.rhs.parse()?;
    println!("{}", has_nonneg_solution(&SolvabilityInstance::new(lhs, rhs))?);
    Ok(())
}

fn run_verify(args: &VerifyArgs) -> Result<()> {
    let reports = verify::run_all(args.seed, args.scale)?;
    for r in &reports {
        println!("{r}");
    }
    if reports.iter().any(|r| !r.passed()) {
        bail!("oracle mismatches found (seed {})", args.seed);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::ProjectAdmg(a) => project(a, false),
        Command::ProjectDmag(a) => project(a, true),
        Command::Ancestor(a) => ancestor(a),
        Command::Msep(a) => msep(a),
        Command::Cutoff(a) => cutoff(a),
        Command::Dioph(a) => dioph(a),
        Command::Verify(a) => run_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
