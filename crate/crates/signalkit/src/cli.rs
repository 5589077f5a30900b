//! Command-line surface. Every subcommand reads envelopes produced by `io`,
//! prints a canonical JSON report on stdout (so runs with the same inputs and
//! seed are byte-identical), and optionally writes its primary artifact to
//! `--out`. Exit codes: 0 success, 1 contract violation or computation
//! failure, 2 usage error.

use crate::io::{self, Envelope, GraphDoc, IoError};
use crate::pclique::{
    build_hardness_game, check_cover_condition, clique_cover_scheme, extract_clusters,
    gen_pcover, recover_clique, HardnessGameParams, PlantedGraph,
};
use crate::routing::{
    full_revelation_routing, mix_latencies, nash_flow, optimal_flow, price_of_anarchy,
    routing_scheme_value, scheme_from_tolls, tolls_from_scheme, tolls_gadget, total_latency,
    RoutingError, RoutingInstance,
};
use crate::security::{
    bcbs_extract, bcbs_gadget, bcbs_identity_exact, bimatrix_extract, bimatrix_gadget,
    vc_principal_value, vc_scheme_value, vertex_cover_gadget, ExtendedSecurityGame,
};
use crate::signaling::{
    dual_oracle_grid, ellipsoid_signaling, max_prior_grid, optimal_signaling_dnet,
    DualCase, GridDualOracle, SignalingError,
};
use crate::zerosum::{
    baseline_scheme, mix_payoffs, validate_scheme, BaselineMode, BayesianGame, GameError,
    Posterior, SignalingScheme,
};
use crate::graph::{BipartiteGraph, GraphError, UndirectedGraph};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Signaling(#[from] SignalingError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("validation failed: {0}")]
    Contract(String),
}

#[derive(Debug, Parser)]
#[command(name = "signalkit", version, about = "Signaling schemes for Bayesian games")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Args, Clone)]
struct Common {
    /// Seed recorded in reports and used by randomized subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the primary artifact (scheme, game, graph, instance) here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Numerical tolerance for solvers that accept one.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Report format (only json is supported).
    #[arg(long, global = true, default_value = "json")]
    format: String,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Minimax value and equilibrium of the mixed game at a posterior.
    Value {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        posterior: String,
    },
    /// The mixed payoff matrix A^μ.
    Mix {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        posterior: String,
    },
    #[command(subcommand)]
    Signal(SignalCmd),
    #[command(subcommand)]
    Esg(EsgCmd),
    #[command(subcommand)]
    Gadget(GadgetCmd),
    #[command(subcommand)]
    Pclique(PcliqueCmd),
    #[command(subcommand)]
    Routing(RoutingCmd),
}

#[derive(Debug, Subcommand)]
enum SignalCmd {
    /// Optimal scheme over the δ-grid of posteriors.
    Dnet {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        delta: f64,
    },
    /// Ellipsoid pipeline with the grid dual oracle; value ≥ grid optimum − 5ε.
    Ellipsoid {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        eps: f64,
    },
    /// One dual-oracle query: find a grid posterior with w·μ < val(μ) − ε.
    DualOracle {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        w: String,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Grid prior maximizing the grid-optimal signaling value.
    MaxPrior {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        delta: f64,
    },
    /// Full-revelation scheme.
    Full {
        #[arg(long)]
        game: PathBuf,
    },
    /// No-signaling scheme (single signal at the prior).
    None {
        #[arg(long)]
        game: PathBuf,
    },
    /// Check that a scheme decomposes the game's prior.
    Validate {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        scheme: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum EsgCmd {
    /// Expand the compact (Ā, B, D) form into a dense game.
    Expand {
        #[arg(long)]
        esg: PathBuf,
    },
    /// Value of the compact game at a posterior.
    Val {
        #[arg(long)]
        esg: PathBuf,
        #[arg(long)]
        posterior: String,
    },
}

#[derive(Debug, Subcommand)]
enum GadgetCmd {
    #[command(subcommand)]
    Bcbs(BcbsCmd),
    #[command(subcommand)]
    Bimatrix(BimatrixCmd),
    #[command(subcommand)]
    Vc(VcCmd),
}

#[derive(Debug, Subcommand)]
enum BcbsCmd {
    /// Gadget on the complete bipartite graph K_{left,right}.
    Build {
        #[arg(long)]
        left: usize,
        #[arg(long)]
        right: usize,
        #[arg(long)]
        r: usize,
    },
    /// Biclique sides recovered from a posterior (row strategy from the LP).
    Extract {
        #[arg(long)]
        left: usize,
        #[arg(long)]
        right: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        posterior: String,
    },
    /// Exact-rational check of the parameter identity 1 − ρ/r = η + ε.
    Verify {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        r: u64,
    },
}

#[derive(Debug, Subcommand)]
enum BimatrixCmd {
    /// Gadget from row/column payoff matrices (JSON nested arrays).
    Build {
        #[arg(long)]
        rmat: String,
        #[arg(long)]
        cmat: String,
        #[arg(long)]
        eps: f64,
    },
    /// Strategy pair extracted from a posterior, with its Nash residual.
    Extract {
        #[arg(long)]
        rmat: String,
        #[arg(long)]
        cmat: String,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        posterior: String,
    },
}

#[derive(Debug, Subcommand)]
enum VcCmd {
    /// Gadget from an undirected graph given as "u-v,u-v,...".
    Build {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        edges: String,
    },
    /// Principal's value (0/1) and witness at a posterior.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        edges: String,
        #[arg(long)]
        posterior: String,
    },
    /// Expected principal value of a scheme.
    Extract {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        edges: String,
        #[arg(long)]
        scheme: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum PcliqueCmd {
    /// Random graph with r planted k-cliques.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
    },
    /// Hardness game over the graph; reports dimensions (expand with --dense).
    BuildGame {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 20.0)]
        z: f64,
        #[arg(long, default_value_t = 8)]
        c2: usize,
        #[arg(long, default_value_t = 2000)]
        ncols: usize,
        #[arg(long, default_value_t = false)]
        dense: bool,
    },
    /// Completeness scheme: one signal per (peeled) planted clique.
    Scheme {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        min_frac: f64,
    },
    /// Clusters of high-response rows from the high-value signals.
    Extract {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 20.0)]
        z: f64,
        #[arg(long, default_value_t = 8)]
        c2: usize,
        #[arg(long, default_value_t = 2000)]
        ncols: usize,
        #[arg(long, default_value_t = 0.03)]
        eps: f64,
        #[arg(long, default_value_t = 0.5)]
        min_frac: f64,
        #[arg(long, default_value_t = 1)]
        c3: usize,
    },
    /// Rebuild a clique from a cluster hint (default: first planted set).
    Recover {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1)]
        c3: usize,
    },
}

#[derive(Debug, Subcommand)]
enum RoutingCmd {
    /// Wardrop flow at a posterior (default: the prior).
    Nash {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        posterior: Option<String>,
    },
    /// System-optimal flow at a posterior (default: the prior).
    Opt {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        posterior: Option<String>,
    },
    /// Price of anarchy at a posterior (default: the prior).
    Poa {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        posterior: Option<String>,
    },
    /// Full-revelation scheme and its expected Nash latency.
    Reveal {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Two-copy tolls gadget from a single-state base instance.
    Gadget {
        #[arg(long)]
        base: PathBuf,
        #[arg(long, default_value = "")]
        kstar: String,
    },
    /// Tolls extracted from a scheme on the gadget (default: the gadget's
    /// own two-signal scheme).
    Tolls {
        #[arg(long)]
        base: PathBuf,
        #[arg(long, default_value = "")]
        kstar: String,
        #[arg(long)]
        scheme: Option<PathBuf>,
    },
}

pub struct CliOutcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// In-process entry point; the binary is a thin wrapper around this.
pub fn run_command<I, S>(argv: I) -> CliOutcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap treats --help/--version as "errors" with zero exit code.
            let code = if e.use_stderr() { 2 } else { 0 };
            return CliOutcome {
                exit_code: code,
                stdout: String::new(),
                stderr: e.to_string(),
            };
        }
    };
    if cli.common.format != "json" {
        return CliOutcome {
            exit_code: 2,
            stdout: String::new(),
            stderr: format!("unsupported --format {:?}\n", cli.common.format),
        };
    }
    match dispatch(&cli.common, &cli.cmd) {
        Ok(Output { report, artifact, summary }) => {
            let mut env = Envelope::new("report", report).with_seed(cli.common.seed);
            env.provenance = Some(command_name(&cli.cmd));
            let stdout = env.to_canonical_json();
            if let Some(path) = &cli.common.out {
                if let Err(e) = io::write_file(path, &artifact.unwrap_or_else(|| stdout.clone())) {
                    return CliOutcome {
                        exit_code: 1,
                        stdout,
                        stderr: format!("error: {e}\n"),
                    };
                }
            }
            CliOutcome {
                exit_code: 0,
                stdout,
                stderr: format!("{summary}\n"),
            }
        }
        Err(CliError::Usage(msg)) => CliOutcome {
            exit_code: 2,
            stdout: String::new(),
            stderr: format!("usage error: {msg}\n"),
        },
        Err(e) => CliOutcome {
            exit_code: 1,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

struct Output {
    report: serde_json::Value,
    /// Canonical bytes of the primary artifact for --out (report if none).
    artifact: Option<String>,
    summary: String,
}

fn command_name(cmd: &Cmd) -> String {
    match cmd {
        Cmd::Value { .. } => "value",
        Cmd::Mix { .. } => "mix",
        Cmd::Signal(c) => match c {
            SignalCmd::Dnet { .. } => "signal dnet",
            SignalCmd::Ellipsoid { .. } => "signal ellipsoid",
            SignalCmd::DualOracle { .. } => "signal dual-oracle",
            SignalCmd::MaxPrior { .. } => "signal max-prior",
            SignalCmd::Full { .. } => "signal full",
            SignalCmd::None { .. } => "signal none",
            SignalCmd::Validate { .. } => "signal validate",
        },
        Cmd::Esg(c) => match c {
            EsgCmd::Expand { .. } => "esg expand",
            EsgCmd::Val { .. } => "esg val",
        },
        Cmd::Gadget(c) => match c {
            GadgetCmd::Bcbs(b) => match b {
                BcbsCmd::Build { .. } => "gadget bcbs build",
                BcbsCmd::Extract { .. } => "gadget bcbs extract",
                BcbsCmd::Verify { .. } => "gadget bcbs verify",
            },
            GadgetCmd::Bimatrix(b) => match b {
                BimatrixCmd::Build { .. } => "gadget bimatrix build",
                BimatrixCmd::Extract { .. } => "gadget bimatrix extract",
            },
            GadgetCmd::Vc(v) => match v {
                VcCmd::Build { .. } => "gadget vc build",
                VcCmd::Verify { .. } => "gadget vc verify",
                VcCmd::Extract { .. } => "gadget vc extract",
            },
        },
        Cmd::Pclique(c) => match c {
            PcliqueCmd::Gen { .. } => "pclique gen",
            PcliqueCmd::BuildGame { .. } => "pclique build-game",
            PcliqueCmd::Scheme { .. } => "pclique scheme",
            PcliqueCmd::Extract { .. } => "pclique extract",
            PcliqueCmd::Recover { .. } => "pclique recover",
        },
        Cmd::Routing(c) => match c {
            RoutingCmd::Nash { .. } => "routing nash",
            RoutingCmd::Opt { .. } => "routing opt",
            RoutingCmd::Poa { .. } => "routing poa",
            RoutingCmd::Reveal { .. } => "routing reveal",
            RoutingCmd::Gadget { .. } => "routing gadget",
            RoutingCmd::Tolls { .. } => "routing tolls",
        },
    }
    .to_string()
}

fn parse_floats(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("bad number {t:?}: {e}")))
        })
        .collect()
}

fn parse_usizes(s: &str) -> Result<Vec<usize>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| CliError::Usage(format!("bad index {t:?}: {e}")))
        })
        .collect()
}

fn parse_posterior(s: &str) -> Result<Posterior, CliError> {
    Ok(Posterior::new(parse_floats(s)?)?)
}

fn parse_edges(s: &str) -> Result<Vec<(usize, usize)>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            let (a, b) = t
                .trim()
                .split_once('-')
                .ok_or_else(|| CliError::Usage(format!("bad edge {t:?}, expected u-v")))?;
            Ok((
                a.parse::<usize>()
                    .map_err(|e| CliError::Usage(format!("bad edge {t:?}: {e}")))?,
                b.parse::<usize>()
                    .map_err(|e| CliError::Usage(format!("bad edge {t:?}: {e}")))?,
            ))
        })
        .collect()
}

fn parse_matrix(s: &str) -> Result<Vec<Vec<f64>>, CliError> {
    serde_json::from_str(s).map_err(|e| CliError::Usage(format!("bad matrix JSON: {e}")))
}

fn load_game(path: &PathBuf) -> Result<BayesianGame, CliError> {
    Ok(io::parse_game(&io::read_file(path)?)?.body)
}

fn load_esg(path: &PathBuf) -> Result<ExtendedSecurityGame, CliError> {
    Ok(io::parse_esg(&io::read_file(path)?)?.body)
}

fn load_scheme(path: &PathBuf) -> Result<SignalingScheme, CliError> {
    Ok(io::parse_scheme(&io::read_file(path)?)?.body)
}

fn load_routing(path: &PathBuf) -> Result<RoutingInstance, CliError> {
    Ok(io::parse_routing(&io::read_file(path)?)?.body)
}

fn load_graph(path: &PathBuf) -> Result<PlantedGraph, CliError> {
    Ok(io::parse_graph(&io::read_file(path)?)?.1)
}

fn scheme_json(scheme: &SignalingScheme) -> serde_json::Value {
    serde_json::to_value(scheme).expect("serializable scheme")
}

fn scheme_artifact(scheme: &SignalingScheme, seed: Option<u64>) -> String {
    Envelope::new("scheme", scheme.clone())
        .with_seed(seed)
        .to_canonical_json()
}

fn dispatch(common: &Common, cmd: &Cmd) -> Result<Output, CliError> {
    match cmd {
        Cmd::Value { game, posterior } => {
            let g = load_game(game)?;
            let mu = parse_posterior(posterior)?;
            let eq = crate::zerosum::game_value(&mix_payoffs(&g, &mu)?)?;
            Ok(Output {
                report: json!({
                    "value": eq.value,
                    "row_strategy": eq.row_strategy,
                    "col_strategy": eq.col_strategy,
                }),
                artifact: None,
                summary: format!("val(mu) = {}", eq.value),
            })
        }
        Cmd::Mix { game, posterior } => {
            let g = load_game(game)?;
            let mu = parse_posterior(posterior)?;
            let a = mix_payoffs(&g, &mu)?;
            Ok(Output {
                report: json!({ "matrix": a }),
                artifact: None,
                summary: format!("{}x{} mixed matrix", a.len(), a.first().map_or(0, |r| r.len())),
            })
        }
        Cmd::Signal(sub) => signal_cmd(common, sub),
        Cmd::Esg(sub) => esg_cmd(common, sub),
        Cmd::Gadget(sub) => gadget_cmd(common, sub),
        Cmd::Pclique(sub) => pclique_cmd(common, sub),
        Cmd::Routing(sub) => routing_cmd(common, sub),
    }
}

fn signal_cmd(common: &Common, cmd: &SignalCmd) -> Result<Output, CliError> {
    match cmd {
        SignalCmd::Dnet { game, delta } => {
            let g = load_game(game)?;
            let sol = optimal_signaling_dnet(&g, *delta)?;
            Ok(Output {
                report: json!({
                    "value": sol.value,
                    "delta": delta,
                    "num_signals": sol.scheme.signals.len(),
                    "scheme": scheme_json(&sol.scheme),
                }),
                artifact: Some(scheme_artifact(&sol.scheme, common.seed)),
                summary: format!("grid optimum {} with {} signals", sol.value, sol.scheme.signals.len()),
            })
        }
        SignalCmd::Ellipsoid { game, eps } => {
            let g = load_game(game)?;
            let delta = {
                let raw = eps / (g.num_states() as f64 * g.payoff_bound);
                1.0 / (1.0 / raw).ceil()
            };
            let oracle = GridDualOracle::for_game(&g, delta)?;
            let res = ellipsoid_signaling(&g, *eps, &oracle)?;
            Ok(Output {
                report: json!({
                    "value": res.value,
                    "nu_star": res.nu_star,
                    "eps": eps,
                    "delta": res.delta,
                    "oracle_queries": res.oracle_queries,
                    "cut_points": res.cut_points,
                    "scheme": scheme_json(&res.scheme),
                }),
                artifact: Some(scheme_artifact(&res.scheme, common.seed)),
                summary: format!("ellipsoid value {} after {} oracle queries", res.value, res.oracle_queries),
            })
        }
        SignalCmd::DualOracle { game, w, eps, delta } => {
            let g = load_game(game)?;
            let w = parse_floats(w)?;
            let ans = dual_oracle_grid(&g, &w, *eps, *delta)?;
            let witness = ans.witness.as_ref().map(|p| p.0.clone());
            let summary = match ans.case {
                DualCase::Empty => "no violated posterior".to_string(),
                DualCase::Witness => format!("witness with slack {}", ans.slack),
            };
            Ok(Output {
                report: json!({ "witness": witness, "slack": ans.slack }),
                artifact: None,
                summary,
            })
        }
        SignalCmd::MaxPrior { game, delta } => {
            let g = load_game(game)?;
            let (prior, value) = max_prior_grid(&g, *delta)?;
            Ok(Output {
                report: json!({ "prior": prior.0, "value": value, "delta": delta }),
                artifact: None,
                summary: format!("best grid prior has value {value}"),
            })
        }
        SignalCmd::Full { game } | SignalCmd::None { game } => {
            let g = load_game(game)?;
            let mode = if matches!(cmd, SignalCmd::Full { .. }) {
                BaselineMode::Full
            } else {
                BaselineMode::None
            };
            let scheme = baseline_scheme(&g, mode);
            let value = crate::zerosum::scheme_value(&g, &scheme)?;
            Ok(Output {
                report: json!({
                    "value": value,
                    "num_signals": scheme.signals.len(),
                    "scheme": scheme_json(&scheme),
                }),
                artifact: Some(scheme_artifact(&scheme, common.seed)),
                summary: format!("baseline scheme value {value}"),
            })
        }
        SignalCmd::Validate { game, scheme } => {
            let g = load_game(game)?;
            let s = load_scheme(scheme)?;
            let report = validate_scheme(&g, &s, common.tol.max(1e-8));
            if !report.ok {
                return Err(CliError::Contract(format!(
                    "scheme does not decompose the prior: residual {}, weight sum {}",
                    report.max_residual, report.weight_sum
                )));
            }
            let value = crate::zerosum::scheme_value(&g, &s)?;
            Ok(Output {
                report: json!({
                    "ok": true,
                    "max_residual": report.max_residual,
                    "weight_sum": report.weight_sum,
                    "value": value,
                }),
                artifact: None,
                summary: format!("ok: residual {}", report.max_residual),
            })
        }
    }
}

fn esg_cmd(common: &Common, cmd: &EsgCmd) -> Result<Output, CliError> {
    match cmd {
        EsgCmd::Expand { esg } => {
            let e = load_esg(esg)?;
            let g = e.expand()?;
            Ok(Output {
                report: json!({
                    "num_states": g.num_states(),
                    "rows": g.num_rows(),
                    "cols": g.num_cols(),
                    "payoff_bound": g.payoff_bound,
                }),
                artifact: Some(
                    Envelope::new("game", g.clone())
                        .with_seed(common.seed)
                        .to_canonical_json(),
                ),
                summary: format!("{} states, {}x{}", g.num_states(), g.num_rows(), g.num_cols()),
            })
        }
        EsgCmd::Val { esg, posterior } => {
            let e = load_esg(esg)?;
            let mu = parse_posterior(posterior)?;
            let eq = e.val_compact(&mu)?;
            Ok(Output {
                report: json!({
                    "value": eq.value,
                    "row_strategy": eq.row_strategy,
                    "col_strategy": eq.col_strategy,
                }),
                artifact: None,
                summary: format!("val(mu) = {}", eq.value),
            })
        }
    }
}

fn gadget_cmd(common: &Common, cmd: &GadgetCmd) -> Result<Output, CliError> {
    match cmd {
        GadgetCmd::Bcbs(sub) => match sub {
            BcbsCmd::Build { left, right, r } => {
                let graph = BipartiteGraph::complete(*left, *right);
                let g = bcbs_gadget(&graph, *r);
                Ok(Output {
                    report: json!({
                        "n": g.n,
                        "r": g.r,
                        "eps": g.eps,
                        "eta": g.eta,
                        "rho": g.rho,
                    }),
                    artifact: Some(
                        Envelope::new("esg", g.game.clone())
                            .with_seed(common.seed)
                            .to_canonical_json(),
                    ),
                    summary: format!("gadget on {} vertices, rho {}", g.n, g.rho),
                })
            }
            BcbsCmd::Extract { left, right, r, posterior } => {
                let graph = BipartiteGraph::complete(*left, *right);
                let g = bcbs_gadget(&graph, *r);
                let mu = parse_posterior(posterior)?;
                let eq = g.game.val_compact(&mu)?;
                let ex = bcbs_extract(&g, &mu, &eq.row_strategy);
                Ok(Output {
                    report: json!({
                        "value": eq.value,
                        "v_prime": ex.v_prime,
                        "w_prime": ex.w_prime,
                        "is_biclique": ex.is_biclique,
                        "big_enough": ex.big_enough,
                    }),
                    artifact: None,
                    summary: format!(
                        "sides {}/{}, biclique: {}",
                        ex.v_prime.len(),
                        ex.w_prime.len(),
                        ex.is_biclique
                    ),
                })
            }
            BcbsCmd::Verify { n, r } => {
                let (eps, eta, rho, holds) = bcbs_identity_exact(*n, *r);
                if !holds {
                    return Err(CliError::Contract("parameter identity failed".into()));
                }
                Ok(Output {
                    report: json!({
                        "eps": eps.to_string(),
                        "eta": eta.to_string(),
                        "rho": rho.to_string(),
                        "identity_holds": holds,
                    }),
                    artifact: None,
                    summary: "identity holds exactly".to_string(),
                })
            }
        },
        GadgetCmd::Bimatrix(sub) => match sub {
            BimatrixCmd::Build { rmat, cmat, eps } => {
                let r = parse_matrix(rmat)?;
                let c = parse_matrix(cmat)?;
                let g = bimatrix_gadget(&r, &c, *eps)?;
                Ok(Output {
                    report: json!({
                        "num_states": g.num_states(),
                        "rows": g.num_rows(),
                        "cols": g.num_cols(),
                        "payoff_bound": g.payoff_bound,
                    }),
                    artifact: Some(
                        Envelope::new("esg", g.clone())
                            .with_seed(common.seed)
                            .to_canonical_json(),
                    ),
                    summary: format!("{} states, bound {}", g.num_states(), g.payoff_bound),
                })
            }
            BimatrixCmd::Extract { rmat, cmat, eps, posterior } => {
                let r = parse_matrix(rmat)?;
                let c = parse_matrix(cmat)?;
                let mu = parse_posterior(posterior)?;
                let ex = bimatrix_extract(&r, &c, *eps, &mu)?;
                Ok(Output {
                    report: json!({
                        "x": ex.x,
                        "mu": ex.mu,
                        "welfare": ex.welfare,
                        "nash_residual": ex.nash_residual,
                        "gadget_value": ex.gadget_value,
                    }),
                    artifact: None,
                    summary: format!("welfare {}, residual {}", ex.welfare, ex.nash_residual),
                })
            }
        },
        GadgetCmd::Vc(sub) => {
            let (n, edges) = match sub {
                VcCmd::Build { n, edges } | VcCmd::Verify { n, edges, .. } | VcCmd::Extract { n, edges, .. } => {
                    (*n, parse_edges(edges)?)
                }
            };
            let graph = UndirectedGraph::new(n, edges)?;
            let g = vertex_cover_gadget(&graph)?;
            match sub {
                VcCmd::Build { .. } => Ok(Output {
                    report: json!({
                        "num_states": g.game.num_states(),
                        "rows": g.game.num_rows(),
                        "cols": g.game.num_cols(),
                        "s_col": g.s_col,
                    }),
                    artifact: Some(
                        Envelope::new("game", g.game.clone())
                            .with_seed(common.seed)
                            .to_canonical_json(),
                    ),
                    summary: format!("gadget with {} columns", g.game.num_cols()),
                }),
                VcCmd::Verify { posterior, .. } => {
                    let mu = parse_posterior(posterior)?;
                    let verdict = vc_principal_value(&g, &mu)?;
                    Ok(Output {
                        report: json!({
                            "value": verdict.value,
                            "witness": verdict.witness,
                        }),
                        artifact: None,
                        summary: format!("principal value {}", verdict.value),
                    })
                }
                VcCmd::Extract { scheme, .. } => {
                    let s = load_scheme(scheme)?;
                    let value = vc_scheme_value(&g, &s)?;
                    Ok(Output {
                        report: json!({ "value": value }),
                        artifact: None,
                        summary: format!("scheme value {value}"),
                    })
                }
            }
        }
    }
}

fn pclique_cmd(common: &Common, cmd: &PcliqueCmd) -> Result<Output, CliError> {
    let seed = common.seed.unwrap_or(0);
    match cmd {
        PcliqueCmd::Gen { n, p, k, r } => {
            let g = gen_pcover(*n, *p, *k, *r, seed);
            Ok(Output {
                report: json!({
                    "n": n,
                    "edges": g.background_edges.len() + g.clique_edges.len(),
                    "planted_sets": g.planted_sets,
                }),
                artifact: Some(
                    Envelope::new("graph", GraphDoc::from(&g))
                        .with_seed(Some(seed))
                        .to_canonical_json(),
                ),
                summary: format!(
                    "graph on {} vertices with {} planted {}-cliques",
                    n, r, k
                ),
            })
        }
        PcliqueCmd::BuildGame { graph, z, c2, ncols, dense } => {
            let g = load_graph(graph)?;
            let params = HardnessGameParams {
                z: *z,
                c2_scaled: *c2,
                n_scaled: *ncols,
                seed,
            };
            let game = build_hardness_game(&g, &params)?;
            let artifact = if *dense {
                Some(
                    Envelope::new("game", game.expand_dense()?)
                        .with_seed(Some(seed))
                        .to_canonical_json(),
                )
            } else {
                None
            };
            Ok(Output {
                report: json!({
                    "n": game.n,
                    "cols": game.num_cols(),
                    "z": game.z,
                    "random_cols": game.n_rand_cols,
                }),
                artifact,
                summary: format!("hardness game {}x{}", game.n, game.num_cols()),
            })
        }
        PcliqueCmd::Scheme { graph, min_frac } => {
            let g = load_graph(graph)?;
            let scheme = clique_cover_scheme(&g, *min_frac)?;
            Ok(Output {
                report: json!({
                    "num_signals": scheme.signals.len(),
                    "scheme": scheme_json(&scheme),
                }),
                artifact: Some(scheme_artifact(&scheme, Some(seed))),
                summary: format!("{} signals", scheme.signals.len()),
            })
        }
        PcliqueCmd::Extract { graph, z, c2, ncols, eps, min_frac, c3 } => {
            let g = load_graph(graph)?;
            let params = HardnessGameParams {
                z: *z,
                c2_scaled: *c2,
                n_scaled: *ncols,
                seed,
            };
            let game = build_hardness_game(&g, &params)?;
            let scheme = clique_cover_scheme(&g, *min_frac)?;
            let clusters = extract_clusters(&game, &scheme, *eps)?;
            let fraction = check_cover_condition(&clusters, &g.planted_sets, *eps, *c3, g.n);
            Ok(Output {
                report: json!({
                    "clusters": clusters,
                    "cover_fraction": fraction,
                }),
                artifact: None,
                summary: format!("{} clusters, cover fraction {fraction}", clusters.len()),
            })
        }
        PcliqueCmd::Recover { graph, t, k, c3 } => {
            let g = load_graph(graph)?;
            let hint: Vec<usize> = match t {
                Some(s) => parse_usizes(s)?,
                None => g
                    .planted_sets
                    .first()
                    .cloned()
                    .ok_or_else(|| CliError::Usage("graph has no planted sets; pass --t".into()))?,
            };
            let k = k.unwrap_or(g.k);
            let outcome = recover_clique(&g, &hint, k, *c3, seed);
            Ok(Output {
                report: json!({
                    "clique": outcome.clique,
                    "subsets_tried": outcome.subsets_tried,
                }),
                artifact: None,
                summary: match &outcome.clique {
                    Some(c) => format!("recovered a {}-clique after {} subsets", c.len(), outcome.subsets_tried),
                    None => format!("no clique within budget ({} subsets)", outcome.subsets_tried),
                },
            })
        }
    }
}

fn routing_cmd(common: &Common, cmd: &RoutingCmd) -> Result<Output, CliError> {
    let tol = common.tol.min(1e-6);
    let posterior_or_prior = |inst: &RoutingInstance, p: &Option<String>| -> Result<Posterior, CliError> {
        match p {
            Some(s) => parse_posterior(s),
            None => Ok(Posterior(inst.prior.clone())),
        }
    };
    match cmd {
        RoutingCmd::Nash { instance, posterior } | RoutingCmd::Opt { instance, posterior } => {
            let inst = load_routing(instance)?;
            let mu = posterior_or_prior(&inst, posterior)?;
            let lat = mix_latencies(&inst, &mu)?;
            let flow = if matches!(cmd, RoutingCmd::Nash { .. }) {
                nash_flow(&inst.network, &lat, &inst.commodities, tol)?
            } else {
                optimal_flow(&inst.network, &lat, &inst.commodities, tol)?
            };
            let cost = total_latency(&lat, &flow);
            Ok(Output {
                report: json!({
                    "total_latency": cost,
                    "edge_flow": flow.total,
                }),
                artifact: None,
                summary: format!("total latency {cost}"),
            })
        }
        RoutingCmd::Poa { instance, posterior } => {
            let inst = load_routing(instance)?;
            let mu = posterior_or_prior(&inst, posterior)?;
            let lat = mix_latencies(&inst, &mu)?;
            let poa = price_of_anarchy(&inst.network, &lat, &inst.commodities, tol)?;
            Ok(Output {
                report: json!({ "price_of_anarchy": poa }),
                artifact: None,
                summary: format!("price of anarchy {poa}"),
            })
        }
        RoutingCmd::Reveal { instance } => {
            let inst = load_routing(instance)?;
            let (scheme, value) = full_revelation_routing(&inst, tol)?;
            Ok(Output {
                report: json!({
                    "value": value,
                    "num_signals": scheme.signals.len(),
                    "scheme": scheme_json(&scheme),
                }),
                artifact: Some(scheme_artifact(&scheme, common.seed)),
                summary: format!("full revelation latency {value}"),
            })
        }
        RoutingCmd::Gadget { base, kstar } => {
            let b = load_routing(base)?;
            let ks = parse_usizes(kstar)?;
            let g = tolls_gadget(&b, &ks)?;
            Ok(Output {
                report: json!({
                    "m": g.m,
                    "l_nash": g.l_nash,
                    "l_star": g.l_star,
                    "states": g.inst.prior.len(),
                }),
                artifact: Some(
                    Envelope::new("routing", g.inst.clone())
                        .with_seed(common.seed)
                        .to_canonical_json(),
                ),
                summary: format!("gadget with L = {}, L* = {}", g.l_nash, g.l_star),
            })
        }
        RoutingCmd::Tolls { base, kstar, scheme } => {
            let b = load_routing(base)?;
            let ks = parse_usizes(kstar)?;
            let g = tolls_gadget(&b, &ks)?;
            let s = match scheme {
                Some(path) => load_scheme(path)?,
                None => scheme_from_tolls(&g)?,
            };
            let value = routing_scheme_value(&g.inst, &s, tol)?;
            let tolls = tolls_from_scheme(&g, &s, tol)?;
            Ok(Output {
                report: json!({
                    "scheme_value": value,
                    "tolls": tolls,
                    "l_nash": g.l_nash,
                }),
                artifact: None,
                summary: format!("scheme value {value}, {} tolls", tolls.len()),
            })
        }
    }
}
