//! Canonical JSON file formats. Every artifact on disk is an envelope with a
//! format version, a kind tag, a kind-specific body, and optional seed and
//! provenance notes. Parsing rejects unknown fields and reports the JSON path
//! of the first offending value; serialization is deterministic, so goldens
//! can be compared byte for byte.

use crate::pclique::PlantedGraph;
use crate::routing::{RoutingInstance, RoutingError};
use crate::security::ExtendedSecurityGame;
use crate::zerosum::{BayesianGame, GameError, SignalingScheme};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("json error at {path}: {message}")]
    Json { path: String, message: String },
    #[error("unsupported format_version {found:?} (expected {FORMAT_VERSION:?})")]
    Version { found: String },
    #[error("kind mismatch: expected {expected:?}, found {found:?}")]
    Kind { expected: &'static str, found: String },
    #[error("invalid {kind} body: {message}")]
    Invalid { kind: &'static str, message: String },
    #[error(transparent)]
    File(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope<T> {
    pub format_version: String,
    pub kind: String,
    pub body: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(kind: &str, body: T) -> Envelope<T> {
        Envelope {
            format_version: FORMAT_VERSION.to_string(),
            kind: kind.to_string(),
            body,
            seed: None,
            provenance: None,
        }
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Envelope<T> {
        self.seed = seed;
        self
    }

    /// Canonical bytes: pretty-printed JSON plus a trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable envelope");
        s.push('\n');
        s
    }
}

fn deserialize_tracked<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, IoError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(&mut de).map_err(|e| IoError::Json {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

fn parse_envelope<T: DeserializeOwned>(
    bytes: &[u8],
    expected_kind: &'static str,
) -> Result<Envelope<T>, IoError> {
    let env: Envelope<T> = deserialize_tracked(bytes)?;
    if env.format_version != FORMAT_VERSION {
        return Err(IoError::Version {
            found: env.format_version,
        });
    }
    if env.kind != expected_kind {
        return Err(IoError::Kind {
            expected: expected_kind,
            found: env.kind,
        });
    }
    Ok(env)
}

fn invalid(kind: &'static str, e: impl std::fmt::Display) -> IoError {
    IoError::Invalid {
        kind,
        message: e.to_string(),
    }
}

pub fn parse_game(bytes: &[u8]) -> Result<Envelope<BayesianGame>, IoError> {
    let env = parse_envelope::<BayesianGame>(bytes, "game")?;
    let g = &env.body;
    BayesianGame::new(g.payoffs.clone(), g.prior.clone(), g.payoff_bound)
        .map_err(|e| invalid("game", e))?;
    Ok(env)
}

pub fn parse_esg(bytes: &[u8]) -> Result<Envelope<ExtendedSecurityGame>, IoError> {
    let env = parse_envelope::<ExtendedSecurityGame>(bytes, "esg")?;
    env.body.check_dims().map_err(|e| invalid("esg", e))?;
    Ok(env)
}

pub fn parse_routing(bytes: &[u8]) -> Result<Envelope<RoutingInstance>, IoError> {
    let env = parse_envelope::<RoutingInstance>(bytes, "routing")?;
    env.body.validate().map_err(|e| invalid("routing", e))?;
    Ok(env)
}

pub fn parse_scheme(bytes: &[u8]) -> Result<Envelope<SignalingScheme>, IoError> {
    let env = parse_envelope::<SignalingScheme>(bytes, "scheme")?;
    SignalingScheme::new(env.body.signals.clone()).map_err(|e| invalid("scheme", e))?;
    Ok(env)
}

/// Wire form of a planted graph: sorted edge lists (background and
/// clique-phase additions kept apart) plus the planted sets and generator
/// parameters. The adjacency matrix is rebuilt on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub n: usize,
    pub p: f64,
    pub k: usize,
    pub r: usize,
    pub seed: u64,
    pub planted_sets: Vec<Vec<usize>>,
    pub background_edges: Vec<(usize, usize)>,
    pub clique_edges: Vec<(usize, usize)>,
}

impl From<&PlantedGraph> for GraphDoc {
    fn from(g: &PlantedGraph) -> GraphDoc {
        GraphDoc {
            n: g.n,
            p: g.p,
            k: g.k,
            r: g.r,
            seed: g.seed,
            planted_sets: g.planted_sets.clone(),
            background_edges: g.background_edges.clone(),
            clique_edges: g.clique_edges.clone(),
        }
    }
}

impl GraphDoc {
    pub fn to_graph(&self) -> Result<PlantedGraph, IoError> {
        let check = |edges: &[(usize, usize)], label: &str| -> Result<(), IoError> {
            for w in edges.windows(2) {
                if w[0] >= w[1] {
                    return Err(invalid("graph", format!("{label} edges not sorted/unique")));
                }
            }
            for &(u, v) in edges {
                if u >= v || v >= self.n {
                    return Err(invalid(
                        "graph",
                        format!("{label} edge ({u},{v}) out of range"),
                    ));
                }
            }
            Ok(())
        };
        check(&self.background_edges, "background")?;
        check(&self.clique_edges, "clique")?;
        for s in &self.planted_sets {
            if s.iter().any(|&v| v >= self.n) {
                return Err(invalid("graph", "planted vertex out of range"));
            }
        }
        let mut adjacency = vec![vec![false; self.n]; self.n];
        for &(u, v) in self.background_edges.iter().chain(&self.clique_edges) {
            if adjacency[u][v] {
                return Err(invalid("graph", format!("duplicate edge ({u},{v})")));
            }
            adjacency[u][v] = true;
            adjacency[v][u] = true;
        }
        Ok(PlantedGraph {
            n: self.n,
            adjacency,
            planted_sets: self.planted_sets.clone(),
            background_edges: self.background_edges.clone(),
            clique_edges: self.clique_edges.clone(),
            p: self.p,
            k: self.k,
            r: self.r,
            seed: self.seed,
        })
    }
}

pub fn parse_graph(bytes: &[u8]) -> Result<(Envelope<GraphDoc>, PlantedGraph), IoError> {
    let env = parse_envelope::<GraphDoc>(bytes, "graph")?;
    let graph = env.body.to_graph()?;
    Ok((env, graph))
}

/// Any envelope, dispatched on the kind tag.
#[derive(Debug)]
pub enum ParsedInstance {
    Game(Envelope<BayesianGame>),
    Esg(Envelope<ExtendedSecurityGame>),
    Routing(Envelope<RoutingInstance>),
    Graph(Envelope<GraphDoc>, PlantedGraph),
    Scheme(Envelope<SignalingScheme>),
    Report(Envelope<serde_json::Value>),
}

pub fn parse_instance(bytes: &[u8]) -> Result<ParsedInstance, IoError> {
    let header: Envelope<serde_json::Value> = deserialize_tracked(bytes)?;
    if header.format_version != FORMAT_VERSION {
        return Err(IoError::Version {
            found: header.format_version,
        });
    }
    match header.kind.as_str() {
        "game" => Ok(ParsedInstance::Game(parse_game(bytes)?)),
        "esg" => Ok(ParsedInstance::Esg(parse_esg(bytes)?)),
        "routing" => Ok(ParsedInstance::Routing(parse_routing(bytes)?)),
        "graph" => {
            let (env, graph) = parse_graph(bytes)?;
            Ok(ParsedInstance::Graph(env, graph))
        }
        "scheme" => Ok(ParsedInstance::Scheme(parse_scheme(bytes)?)),
        "report" => Ok(ParsedInstance::Report(header)),
        other => Err(IoError::Kind {
            expected: "game|esg|routing|graph|scheme|report",
            found: other.to_string(),
        }),
    }
}

pub fn read_file(path: &std::path::Path) -> Result<Vec<u8>, IoError> {
    Ok(std::fs::read(path)?)
}

pub fn write_file(path: &std::path::Path, contents: &str) -> Result<(), IoError> {
    Ok(std::fs::write(path, contents)?)
}

// Keep semantic-validation errors convertible where callers mix layers.
impl From<GameError> for IoError {
    fn from(e: GameError) -> IoError {
        invalid("game", e)
    }
}

impl From<RoutingError> for IoError {
    fn from(e: RoutingError) -> IoError {
        invalid("routing", e)
    }
}
