use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cyclelab::embedder::{self, LargeOptions};
use cyclelab::experiments::{self, parse_rational, ExperimentConfig, Kind};
use cyclelab::expander::{self, CleanupParams};
use cyclelab::extremal::{self, ExtremalQuery};
use cyclelab::generators::{self, UniformityForm};
use cyclelab::oracle;
use cyclelab::ramsey::{self, ColoringPattern};
use cyclelab::regularity::{self, Budget, Policy};
use cyclelab::spectral;
use cyclelab::stitcher::{self, FindConfig};
use cyclelab::verdict::Mode;
use cyclelab::{Error, Graph, Rational, RngStream};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "cyclelab", version, about = "Cycles of prescribed length in random graphs")]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "CYCLELAB_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a random graph.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Pseudo-randomness checks.
    #[command(subcommand)]
    Check(CheckCmd),
    /// Cluster graph with the epsilon-property on a random equipartition.
    Sgraph(SgraphArgs),
    /// Tree embeddings into a bipartite pair.
    #[command(subcommand)]
    Embed(EmbedCmd),
    /// Expander cleanup and DFS partitions.
    #[command(subcommand)]
    Expander(ExpanderCmd),
    /// Search for a cycle of length exactly t.
    FindCycle(FindArgs),
    /// CSV rows of the extremal functions.
    Extremal(ExtremalArgs),
    /// Exact cycle oracles for small graphs.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Edge colourings.
    #[command(subcommand)]
    Ramsey(RamseyCmd),
    /// Batch experiment from a JSON config.
    Experiment(ExperimentArgs),
}

#[derive(Subcommand)]
enum GenCmd {
    /// Binomial random graph G(n, p).
    Gnp {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random d-regular graph.
    Regular {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CheckCmd {
    /// `(p, eta)`-upper-uniformity.
    Uniformity {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = rational)]
        p: Rational,
        #[arg(long, value_parser = rational)]
        eta: Rational,
        #[arg(long, default_value = "pair", value_parser = form)]
        form: UniformityForm,
        #[arg(long, default_value = "exact", value_parser = mode)]
        mode: Mode,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Expander mixing inequality with an estimated (or given) lambda.
    Mixing {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct SgraphArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, value_parser = rational)]
    eps: Rational,
    #[arg(long, default_value = "auto", value_parser = policy)]
    policy: Policy,
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// The pair is `V1 = [0, split)` and `V2 = [split, n)`.
#[derive(Args)]
struct PairArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Defaults to n/2.
    #[arg(long)]
    split: Option<usize>,
    #[arg(long, value_parser = rational)]
    eps: Rational,
    /// Defaults to the smaller side.
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Subcommand)]
enum EmbedCmd {
    /// Embed `T^(r,h)_ell` into a bipartite pair.
    Trhl {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        ell: usize,
        /// Small trees (cleanup then whole embedding) instead of large ones.
        #[arg(long)]
        small: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum ExpanderCmd {
    /// Remove poorly expanding sets from a pair.
    Cleanup {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_parser = rational)]
        a: Rational,
        #[arg(long, value_parser = rational)]
        b: Rational,
        #[arg(long, default_value = "exact", value_parser = mode)]
        mode: Mode,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// DFS split into S, T and a path U.
    DfsPartition {
        #[arg(long = "in")]
        input: PathBuf,
        /// Shuffle adjacency lists with this seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct FindArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    t: usize,
    #[arg(long, default_value = "1/10", value_parser = rational)]
    beta: Rational,
    #[arg(long, value_parser = rational)]
    gamma: Option<Rational>,
    #[arg(long, default_value = "1/20", value_parser = rational)]
    eps: Rational,
    #[arg(long, default_value_t = 12)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_depth: Option<usize>,
    /// Write the certificate here on success.
    #[arg(long)]
    cert: Option<PathBuf>,
}

#[derive(Args)]
struct ExtremalArgs {
    #[arg(long)]
    n: usize,
    /// Single t; all t in [3, n] when omitted.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, default_value = "1/5", value_parser = rational)]
    gamma: Rational,
}

#[derive(Subcommand)]
enum OracleCmd {
    /// All cycle lengths (exact, small graphs only).
    Spectrum {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Whether a cycle of length t exists.
    HasCycle {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        t: usize,
    },
}

#[derive(Subcommand)]
enum RamseyCmd {
    /// Colour the edges and search for a long monochromatic odd cycle.
    MonoOdd {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to 1/(r 2^(r+2)).
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value = "random", value_parser = pattern)]
        coloring: ColoringPattern,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_parser = kind)]
    kind: Kind,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn policy(s: &str) -> Result<Policy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn pattern(s: &str) -> Result<ColoringPattern, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn kind(s: &str) -> Result<Kind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn form(s: &str) -> Result<UniformityForm, String> {
    match s {
        "pair" => Ok(UniformityForm::Pair),
        "induced" => Ok(UniformityForm::Induced),
        other => Err(format!("unknown form {other:?}")),
    }
}

/// Writes a line to stdout; a closed pipe (`| head`) is not an error.
fn out_line(s: &str) -> cyclelab::Result<()> {
    match writeln!(std::io::stdout().lock(), "{s}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn print_json<T: Serialize>(v: &T) -> cyclelab::Result<()> {
    out_line(&serde_json::to_string_pretty(v)?)
}

fn emit(g: &Graph, out: Option<&Path>) -> cyclelab::Result<()> {
    match out {
        Some(p) => g.save(p),
        None => match g.write_text(std::io::stdout().lock()) {
            Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r,
        },
    }
}

fn split_pair(g: &Graph, pair: &PairArgs) -> cyclelab::Result<(Vec<usize>, Vec<usize>, usize)> {
    let n = g.n();
    let split = pair.split.unwrap_or(n / 2);
    if split == 0 || split >= n {
        return Err(Error::InvalidParameter(format!("split {split} must lie in (0, {n})")));
    }
    let v1: Vec<usize> = (0..split).collect();
    let v2: Vec<usize> = (split..n).collect();
    let m = pair.m.unwrap_or(split.min(n - split));
    Ok((v1, v2, m))
}

fn run(cli: Cli) -> cyclelab::Result<()> {
    match cli.cmd {
        Cmd::Gen(GenCmd::Gnp { n, p, seed, out }) => {
            let g = generators::sample_gnp(n, p, &mut RngStream::new(seed, 0).rng())?;
            emit(&g, out.as_deref())
        }
        Cmd::Gen(GenCmd::Regular { n, d, seed, out }) => {
            let g = generators::random_regular(n, d, &mut RngStream::new(seed, 0).rng())?;
            emit(&g, out.as_deref())
        }
        Cmd::Check(CheckCmd::Uniformity {
            input,
            p,
            eta,
            form,
            mode,
            budget,
            seed,
        }) => {
            let g = Graph::load(input)?;
            let v = generators::check_upper_uniform(&g, &p, &eta, form, mode, budget, &mut RngStream::new(seed, 0).rng())?;
            print_json(&v)
        }
        Cmd::Check(CheckCmd::Mixing {
            input,
            lambda,
            samples,
            seed,
        }) => {
            let g = Graph::load(input)?;
            let d = g.regular_degree().ok_or(Error::NotRegular)?;
            let lambda = match lambda {
                Some(l) => l,
                None => spectral::estimate_lambda::<f64>(&g)?,
            };
            let v = spectral::mixing_lemma_check(&g, d, &lambda, samples, &mut RngStream::new(seed, 0).rng())?;
            print_json(&serde_json::json!({ "d": d, "lambda": lambda, "verdict": v }))
        }
        Cmd::Sgraph(a) => {
            let g = Graph::load(a.input)?;
            let s = RngStream::new(a.seed, 0);
            let part = regularity::equipartition(g.n(), a.k, &mut s.child(0).rng())?;
            let budget = Budget::new(a.budget);
            let sg = regularity::build_epsilon_graph(&g, &part, &a.eps, a.policy, budget, s.child(1))?;
            print_json(&serde_json::json!({ "partition": part, "sgraph": sg }))
        }
        Cmd::Embed(EmbedCmd::Trhl { pair, ell, small, seed }) => {
            let g = Graph::load(&pair.input)?;
            let (v1, v2, m) = split_pair(&g, &pair)?;
            let res = if small {
                embedder::embed_small_trhl(&g, &v1, &v2, &pair.eps, m, ell)
            } else {
                let opts = LargeOptions::new(RngStream::new(seed, 0));
                embedder::embed_large_trhl(&g, &v1, &v2, &pair.eps, m, ell, cyclelab::graph::Side::Left, opts)
            };
            match res {
                Ok(e) => {
                    let verified = e.verify(&g, &v1, &v2).is_ok();
                    print_json(&serde_json::json!({ "outcome": "success", "verified": verified, "embedding": e }))
                }
                Err(e) => print_json(&serde_json::json!({ "outcome": "failure", "stage": e.stage(), "error": e })),
            }
        }
        Cmd::Expander(ExpanderCmd::Cleanup {
            pair,
            a,
            b,
            mode,
            budget,
            seed,
        }) => {
            let g = Graph::load(&pair.input)?;
            let (v1, v2, m) = split_pair(&g, &pair)?;
            let params = CleanupParams::new(pair.eps, m, a, b)?;
            let tr = expander::cleanup_to_expander(&g, &v1, &v2, &params, Some((mode, budget, RngStream::new(seed, 0))))?;
            let verified = tr.verify(&g, &v1, &v2, &params);
            print_json(&serde_json::json!({ "verified": verified, "trace": tr }))
        }
        Cmd::Expander(ExpanderCmd::DfsPartition { input, seed }) => {
            let g = Graph::load(input)?;
            let part = expander::dfs_path_partition(&g, seed.map(|s| RngStream::new(s, 0)));
            print_json(&serde_json::json!({ "verified": part.verify(&g), "partition": part }))
        }
        Cmd::FindCycle(a) => {
            let g = Graph::load(&a.input)?;
            if a.t < 3 || a.t > g.n() || a.k == 0 || a.k > g.n().min(stitcher::S_EXACT_CAP) {
                return Err(Error::InvalidParameter(format!(
                    "need 3 <= t <= n and 1 <= k <= min(n, {}); got t = {}, k = {}, n = {}",
                    stitcher::S_EXACT_CAP,
                    a.t,
                    a.k,
                    g.n()
                )));
            }
            let mut cfg = FindConfig::new(a.beta, a.eps, a.k);
            cfg.gamma = a.gamma;
            cfg.max_depth = a.max_depth;
            match stitcher::find_cycle_of_length(&g, a.t, &cfg, None, RngStream::new(a.seed, 0)) {
                Ok(cert) => {
                    let verified = cert.verify(&g);
                    if let Some(p) = &a.cert {
                        std::fs::write(p, cert.to_json()? + "\n")?;
                    }
                    print_json(&serde_json::json!({
                        "outcome": "success",
                        "t": a.t,
                        "verified": verified,
                        "branch": cert.plan.branch,
                        "b": cert.plan.b,
                        "cycle": cert.cycle,
                    }))
                }
                Err(f) => print_json(&serde_json::json!({
                    "outcome": "failure",
                    "t": a.t,
                    "stage": f.stage(),
                    "reason": f.reason,
                })),
            }
        }
        Cmd::Extremal(a) => {
            out_line(extremal::CSV_HEADER)?;
            let ts: Vec<usize> = match a.t {
                Some(t) => vec![t],
                None => (3..=a.n).collect(),
            };
            for t in ts {
                out_line(&extremal::csv_row(&ExtremalQuery::new(a.n, t, a.gamma)?)?)?;
            }
            Ok(())
        }
        Cmd::Oracle(OracleCmd::Spectrum { input }) => {
            let g = Graph::load(input)?;
            let s = oracle::cycle_spectrum_exact(&g)?;
            print_json(&serde_json::json!({
                "lengths": s.present,
                "girth": s.girth(),
                "circumference": s.circumference(),
                "longest_odd": s.longest_odd(),
            }))
        }
        Cmd::Oracle(OracleCmd::HasCycle { input, t }) => {
            let g = Graph::load(input)?;
            out_line(&oracle::has_cycle_of_length(&g, t)?.to_string())
        }
        Cmd::Ramsey(RamseyCmd::MonoOdd {
            input,
            r,
            seed,
            eps,
            coloring,
        }) => {
            let g = Graph::load(input)?;
            let s = RngStream::new(seed, 0);
            let col = ramsey::pattern_coloring(&g, coloring, r, &mut s.child(0).rng())?;
            let eps = eps.unwrap_or_else(|| ramsey::default_eps(r));
            let rep = ramsey::monochromatic_odd_cycle(&g, &col, eps, s.child(1))?;
            let verified = match (rep.color, &rep.cycle) {
                (Some(c), Some(cert)) => Some(cert.verify(&ramsey::color_class(&g, &col, c)?)),
                _ => None,
            };
            print_json(&serde_json::json!({ "verified": verified, "report": rep }))
        }
        Cmd::Experiment(a) => {
            let cfg = ExperimentConfig::load(&a.config)?;
            let rep = experiments::run(a.kind, &cfg)?;
            rep.write(&a.out)?;
            let groups = rep.groups();
            for g in &groups {
                eprintln!("{} t={} {}/{}", g.scenario, g.t, g.successes, g.runs);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Parse { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
