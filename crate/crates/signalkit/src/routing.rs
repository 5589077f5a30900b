//! Bayesian selfish routing with affine edge latencies: Wardrop (Nash) and
//! system-optimal flows via Frank-Wolfe, signaling-scheme evaluation, full
//! revelation, price of anarchy, and the two-copy tolls gadget that converts
//! between signaling schemes and edge tolls.

use crate::parallel::parallel_map;
use crate::signaling::{concavify_on_points, delta_net, SignalingError};
use crate::zerosum::{GameError, Posterior, SignalingScheme};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RoutingError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("latency coefficients must be finite and nonnegative")]
    BadLatency,
    #[error("commodity {0} has no source-sink path")]
    Disconnected(usize),
    #[error("price of anarchy undefined: optimal latency is zero")]
    ZeroOptimum,
    #[error("Frank-Wolfe did not reach the requested gap in {0} iterations")]
    NoConvergence(usize),
    #[error("no posterior qualifies for toll extraction: {0}")]
    ContractViolation(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Signaling(#[from] SignalingError),
}

/// l(x) = slope·x + intercept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineLatency {
    pub slope: f64,
    pub intercept: f64,
}

impl AffineLatency {
    pub fn at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Commodity {
    pub source: usize,
    pub sink: usize,
    pub demand: f64,
}

/// Directed graph topology shared by all states.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    pub num_nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoutingInstance {
    pub network: Network,
    /// latencies[state][edge].
    pub latencies: Vec<Vec<AffineLatency>>,
    pub commodities: Vec<Commodity>,
    pub prior: Vec<f64>,
}

impl RoutingInstance {
    pub fn validate(&self) -> Result<(), RoutingError> {
        let m = self.network.edges.len();
        if self.latencies.len() != self.prior.len() {
            return Err(RoutingError::Dimension(format!(
                "{} latency states vs {} prior entries",
                self.latencies.len(),
                self.prior.len()
            )));
        }
        for (u, v) in &self.network.edges {
            if *u >= self.network.num_nodes || *v >= self.network.num_nodes {
                return Err(RoutingError::Dimension("edge endpoint out of range".into()));
            }
        }
        for state in &self.latencies {
            if state.len() != m {
                return Err(RoutingError::Dimension(format!(
                    "state with {} latencies vs {} edges",
                    state.len(),
                    m
                )));
            }
            for l in state {
                if !(l.slope.is_finite() && l.intercept.is_finite())
                    || l.slope < 0.0
                    || l.intercept < 0.0
                {
                    return Err(RoutingError::BadLatency);
                }
            }
        }
        let psum: f64 = self.prior.iter().sum();
        if self.prior.iter().any(|&p| !(0.0..=1.0 + 1e-12).contains(&p))
            || (psum - 1.0).abs() > 1e-9
        {
            return Err(RoutingError::Dimension("prior is not a distribution".into()));
        }
        let unit = vec![
            AffineLatency {
                slope: 0.0,
                intercept: 1.0
            };
            m
        ];
        for (i, c) in self.commodities.iter().enumerate() {
            if c.source >= self.network.num_nodes || c.sink >= self.network.num_nodes {
                return Err(RoutingError::Dimension("commodity endpoint out of range".into()));
            }
            if shortest_path(&self.network, &unit, c.source, c.sink).is_none() {
                return Err(RoutingError::Disconnected(i));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Flow {
    /// per_commodity[i][e].
    pub per_commodity: Vec<Vec<f64>>,
    /// Aggregate per edge.
    pub total: Vec<f64>,
}

impl Flow {
    fn zero(num_commodities: usize, num_edges: usize) -> Flow {
        Flow {
            per_commodity: vec![vec![0.0; num_edges]; num_commodities],
            total: vec![0.0; num_edges],
        }
    }

    /// Worst conservation violation over nodes and commodities.
    pub fn conservation_residual(&self, net: &Network, commodities: &[Commodity]) -> f64 {
        let mut worst: f64 = 0.0;
        for (flows, c) in self.per_commodity.iter().zip(commodities) {
            let mut net_out = vec![0.0; net.num_nodes];
            for (e, &(u, v)) in net.edges.iter().enumerate() {
                net_out[u] += flows[e];
                net_out[v] -= flows[e];
            }
            for (v, &x) in net_out.iter().enumerate() {
                let expected = if v == c.source {
                    c.demand
                } else if v == c.sink {
                    -c.demand
                } else {
                    0.0
                };
                worst = worst.max((x - expected).abs());
            }
        }
        worst
    }
}

/// Coefficientwise convex combination of the per-state latencies.
pub fn mix_latencies(inst: &RoutingInstance, mu: &Posterior) -> Result<Vec<AffineLatency>, RoutingError> {
    if mu.len() != inst.latencies.len() {
        return Err(RoutingError::Dimension(format!(
            "posterior length {} vs {} states",
            mu.len(),
            inst.latencies.len()
        )));
    }
    let m = inst.network.edges.len();
    let mut out = vec![
        AffineLatency {
            slope: 0.0,
            intercept: 0.0
        };
        m
    ];
    for (state, &w) in inst.latencies.iter().zip(mu.0.iter()) {
        for (acc, l) in out.iter_mut().zip(state) {
            acc.slope += w * l.slope;
            acc.intercept += w * l.intercept;
        }
    }
    Ok(out)
}

/// Label-correcting shortest path with nonnegative edge weights; returns
/// (distance, predecessor-edge per node) or None if the sink is unreachable.
fn shortest_path(
    net: &Network,
    weights: &[AffineLatency],
    source: usize,
    sink: usize,
) -> Option<(f64, Vec<Option<usize>>)> {
    let n = net.num_nodes;
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    dist[source] = 0.0;
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &(u, _)) in net.edges.iter().enumerate() {
        out_edges[u].push(e);
    }
    let mut queue = std::collections::VecDeque::new();
    let mut queued = vec![false; n];
    queue.push_back(source);
    queued[source] = true;
    while let Some(u) = queue.pop_front() {
        queued[u] = false;
        for &e in &out_edges[u] {
            let v = net.edges[e].1;
            let nd = dist[u] + weights[e].intercept;
            if nd < dist[v] - 1e-15 {
                dist[v] = nd;
                pred[v] = Some(e);
                if !queued[v] {
                    queue.push_back(v);
                    queued[v] = true;
                }
            }
        }
    }
    if dist[sink].is_finite() {
        Some((dist[sink], pred))
    } else {
        None
    }
}

/// All-or-nothing assignment of every commodity along its shortest path for
/// the given (constant) edge weights.
fn all_or_nothing(
    net: &Network,
    weights: &[AffineLatency],
    commodities: &[Commodity],
) -> Result<Flow, RoutingError> {
    let mut flow = Flow::zero(commodities.len(), net.edges.len());
    for (i, c) in commodities.iter().enumerate() {
        let (_, pred) =
            shortest_path(net, weights, c.source, c.sink).ok_or(RoutingError::Disconnected(i))?;
        let mut v = c.sink;
        while v != c.source {
            let e = pred[v].expect("path edge");
            flow.per_commodity[i][e] += c.demand;
            flow.total[e] += c.demand;
            v = net.edges[e].0;
        }
    }
    Ok(flow)
}

const FW_CAP: usize = 100_000;

/// Pairwise Frank-Wolfe on Σ_e (q_e·f_e² + c_e·f_e): keeps the active set of
/// all-or-nothing atoms and each step moves mass from the costliest active
/// atom toward the current shortest-path atom, with exact line search on the
/// quadratic. Stops at relative duality gap ≤ tol.
fn frank_wolfe(
    net: &Network,
    quad: &[f64],
    lin: &[f64],
    commodities: &[Commodity],
    tol: f64,
    start: Option<Flow>,
) -> Result<Flow, RoutingError> {
    let m = net.edges.len();
    let start = match start {
        Some(s) => s,
        None => {
            let w: Vec<AffineLatency> = lin
                .iter()
                .map(|&c| AffineLatency {
                    slope: 0.0,
                    intercept: c,
                })
                .collect();
            all_or_nothing(net, &w, commodities)?
        }
    };
    let mut f = start.clone();
    // Active convex decomposition of f. The starting point counts as an
    // atom even when it isn't a vertex; convexity keeps everything feasible.
    let mut atoms: Vec<(f64, Flow)> = vec![(1.0, start)];
    for _ in 0..FW_CAP {
        let g: Vec<f64> = (0..m).map(|e| 2.0 * quad[e] * f.total[e] + lin[e]).collect();
        let weights: Vec<AffineLatency> = g
            .iter()
            .map(|&c| AffineLatency {
                slope: 0.0,
                intercept: c,
            })
            .collect();
        let y = all_or_nothing(net, &weights, commodities)?;
        let gf: f64 = (0..m).map(|e| g[e] * f.total[e]).sum();
        let gy: f64 = (0..m).map(|e| g[e] * y.total[e]).sum();
        if gf - gy <= tol * gf.abs().max(1.0) {
            return Ok(f);
        }
        // Away atom: the active atom the gradient likes least.
        let away = atoms
            .iter()
            .enumerate()
            .max_by(|(_, (_, p)), (_, (_, q))| {
                let cp: f64 = (0..m).map(|e| g[e] * p.total[e]).sum();
                let cq: f64 = (0..m).map(|e| g[e] * q.total[e]).sum();
                cp.total_cmp(&cq)
            })
            .map(|(i, _)| i)
            .expect("nonempty active set");
        let cap = atoms[away].0;
        let d: Vec<f64> = (0..m)
            .map(|e| y.total[e] - atoms[away].1.total[e])
            .collect();
        let mut a = 0.0;
        let mut b = 0.0;
        for e in 0..m {
            a += quad[e] * d[e] * d[e];
            b += g[e] * d[e];
        }
        let gamma = if a > 1e-300 {
            (-b / (2.0 * a)).clamp(0.0, cap)
        } else if b < 0.0 {
            cap
        } else {
            0.0
        };
        for i in 0..f.per_commodity.len() {
            for e in 0..m {
                f.per_commodity[i][e] +=
                    gamma * (y.per_commodity[i][e] - atoms[away].1.per_commodity[i][e]);
            }
        }
        for e in 0..m {
            f.total[e] += gamma * (y.total[e] - atoms[away].1.total[e]);
        }
        atoms[away].0 -= gamma;
        if let Some(existing) = atoms.iter_mut().find(|(_, p)| p.total == y.total) {
            existing.0 += gamma;
        } else {
            atoms.push((gamma, y));
        }
        atoms.retain(|(w, _)| *w > 1e-15);
    }
    Err(RoutingError::NoConvergence(FW_CAP))
}

fn check_latencies(latencies: &[AffineLatency]) -> Result<(), RoutingError> {
    for l in latencies {
        if !(l.slope.is_finite() && l.intercept.is_finite()) || l.slope < 0.0 || l.intercept < 0.0
        {
            return Err(RoutingError::BadLatency);
        }
    }
    Ok(())
}

/// Wardrop equilibrium: minimizes the Beckmann potential Σ ∫₀^{f_e} l_e.
pub fn nash_flow(
    net: &Network,
    latencies: &[AffineLatency],
    commodities: &[Commodity],
    tol: f64,
) -> Result<Flow, RoutingError> {
    check_latencies(latencies)?;
    let quad: Vec<f64> = latencies.iter().map(|l| l.slope / 2.0).collect();
    let lin: Vec<f64> = latencies.iter().map(|l| l.intercept).collect();
    frank_wolfe(net, &quad, &lin, commodities, tol, None)
}

/// System optimum: minimizes total latency Σ f_e·l_e(f_e).
pub fn optimal_flow(
    net: &Network,
    latencies: &[AffineLatency],
    commodities: &[Commodity],
    tol: f64,
) -> Result<Flow, RoutingError> {
    check_latencies(latencies)?;
    let quad: Vec<f64> = latencies.iter().map(|l| l.slope).collect();
    let lin: Vec<f64> = latencies.iter().map(|l| l.intercept).collect();
    frank_wolfe(net, &quad, &lin, commodities, tol, None)
}

/// C(l; f) = Σ_e f_e·l_e(f_e).
pub fn total_latency(latencies: &[AffineLatency], flow: &Flow) -> f64 {
    latencies
        .iter()
        .zip(flow.total.iter())
        .map(|(l, &x)| x * l.at(x))
        .sum()
}

/// Worst excess of a flow-carrying edge over the shortest-path potential,
/// with edge weights fixed at the given per-unit costs. With actual
/// latencies this is the Wardrop residual; with marginal costs 2a·f+b it is
/// the optimality (KKT) residual.
pub fn path_gap_residual(
    net: &Network,
    weights: &[AffineLatency],
    commodities: &[Commodity],
    flow: &Flow,
) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, c) in commodities.iter().enumerate() {
        let Some((_, _)) = shortest_path(net, weights, c.source, c.sink) else {
            return f64::INFINITY;
        };
        // Recompute all distances from the source.
        let n = net.num_nodes;
        let mut dist = vec![f64::INFINITY; n];
        dist[c.source] = 0.0;
        for _ in 0..n {
            for (e, &(u, v)) in net.edges.iter().enumerate() {
                if dist[u] + weights[e].intercept < dist[v] {
                    dist[v] = dist[u] + weights[e].intercept;
                }
            }
        }
        for (e, &(u, v)) in net.edges.iter().enumerate() {
            if flow.per_commodity[i][e] > 1e-9 && dist[u].is_finite() {
                worst = worst.max(dist[u] + weights[e].intercept - dist[v]);
            }
        }
    }
    worst
}

/// Wardrop residual of a candidate equilibrium under the actual latencies.
pub fn wardrop_residual(
    net: &Network,
    latencies: &[AffineLatency],
    commodities: &[Commodity],
    flow: &Flow,
) -> f64 {
    let at_flow: Vec<AffineLatency> = latencies
        .iter()
        .zip(flow.total.iter())
        .map(|(l, &x)| AffineLatency {
            slope: 0.0,
            intercept: l.at(x),
        })
        .collect();
    path_gap_residual(net, &at_flow, commodities, flow)
}

pub fn price_of_anarchy(
    net: &Network,
    latencies: &[AffineLatency],
    commodities: &[Commodity],
    tol: f64,
) -> Result<f64, RoutingError> {
    let nash = nash_flow(net, latencies, commodities, tol)?;
    let opt = optimal_flow(net, latencies, commodities, tol)?;
    let c_opt = total_latency(latencies, &opt);
    if c_opt <= 0.0 {
        return Err(RoutingError::ZeroOptimum);
    }
    Ok(total_latency(latencies, &nash) / c_opt)
}

/// Expected Nash latency of a scheme: Σ_σ α_σ · C(l^{μ_σ}; f^{μ_σ}).
pub fn routing_scheme_value(
    inst: &RoutingInstance,
    scheme: &SignalingScheme,
    tol: f64,
) -> Result<f64, RoutingError> {
    let residual = scheme.decomposition_residual(&inst.prior);
    if residual > 1e-6 {
        return Err(GameError::InvalidScheme { residual }.into());
    }
    let per_signal = parallel_map(&scheme.signals, |(w, mu)| -> Result<f64, RoutingError> {
        let l = mix_latencies(inst, mu)?;
        let f = nash_flow(&inst.network, &l, &inst.commodities, tol)?;
        Ok(w * total_latency(&l, &f))
    });
    let mut sum = 0.0;
    for v in per_signal {
        sum += v?;
    }
    Ok(sum)
}

/// The scheme that announces the state, and its expected Nash latency
/// Σ_θ λ_θ · C(l^θ; f^θ).
pub fn full_revelation_routing(
    inst: &RoutingInstance,
    tol: f64,
) -> Result<(SignalingScheme, f64), RoutingError> {
    let m = inst.prior.len();
    let signals: Vec<(f64, Posterior)> = inst
        .prior
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(theta, &w)| (w, Posterior::point_mass(theta, m)))
        .collect();
    let scheme = SignalingScheme::new(signals).map_err(RoutingError::Game)?;
    let value = routing_scheme_value(inst, &scheme, tol)?;
    Ok((scheme, value))
}

/// Best scheme supported on the δ-grid of posteriors: the lower convex
/// envelope of the per-posterior Nash latency, evaluated at the prior.
pub fn grid_routing_scheme(
    inst: &RoutingInstance,
    delta: f64,
    tol: f64,
) -> Result<(SignalingScheme, f64), RoutingError> {
    let net = delta_net(inst.prior.len(), delta)?;
    let values = parallel_map(&net.points, |mu| -> Result<f64, RoutingError> {
        let l = mix_latencies(inst, mu)?;
        let f = nash_flow(&inst.network, &l, &inst.commodities, tol)?;
        Ok(total_latency(&l, &f))
    });
    let mut negated = Vec::with_capacity(values.len());
    for v in values {
        negated.push(-v?);
    }
    let sol = concavify_on_points(&net.points, &negated, &inst.prior)?;
    Ok((sol.scheme, -sol.value))
}

/// Two-copy tolls gadget built from a single-commodity, single-state base
/// instance and a candidate removal set K*.
#[derive(Debug, Clone)]
pub struct TollsGadget {
    pub inst: RoutingInstance,
    /// Base edge count m.
    pub m: usize,
    /// Base-edge indices whose removal the gadget encodes.
    pub k_star: Vec<usize>,
    /// Base Nash latency L.
    pub l_nash: f64,
    /// Nash latency of the base with K* removed (the target L*).
    pub l_star: f64,
    /// Demand of the base before normalization to 1.
    pub demand_scale: f64,
    /// For each state, the gadget edge it perturbs.
    pub state_edge: Vec<usize>,
}

/// Build the gadget: two copies G₁, G₂ of the base graph, a shared source s
/// feeding s₁ and s₂ and a shared sink t fed by t₁, t₂ over zero-latency
/// connectors. States are E₁ ∪ E₂ ∪ {(s,s₁), (s,s₂)}: prior 1/m² on each
/// copy edge, the remaining 1 − 2/m split over the two source links. State θ
/// adds 8m³L to the intercept of its own edge and nothing else.
pub fn tolls_gadget(base: &RoutingInstance, k_star: &[usize]) -> Result<TollsGadget, RoutingError> {
    base.validate()?;
    if base.latencies.len() != 1 || base.commodities.len() != 1 {
        return Err(RoutingError::Dimension(
            "gadget base must have one state and one commodity".into(),
        ));
    }
    let m = base.network.edges.len();
    if m < 2 {
        return Err(RoutingError::Dimension("gadget base needs at least 2 edges".into()));
    }
    if k_star.iter().any(|&e| e >= m) {
        return Err(RoutingError::Dimension("removal set out of range".into()));
    }

    // Normalize demand to 1 by scaling slopes.
    let demand_scale = base.commodities[0].demand;
    let base_lat: Vec<AffineLatency> = base.latencies[0]
        .iter()
        .map(|l| AffineLatency {
            slope: l.slope * demand_scale,
            intercept: l.intercept,
        })
        .collect();
    let commodity = Commodity {
        source: base.commodities[0].source,
        sink: base.commodities[0].sink,
        demand: 1.0,
    };
    let tol = 1e-9;
    let nash = nash_flow(&base.network, &base_lat, &[commodity], tol)?;
    let l_nash = total_latency(&base_lat, &nash);

    // L*: base with K* removed.
    let keep: Vec<usize> = (0..m).filter(|e| !k_star.contains(e)).collect();
    let pruned = Network {
        num_nodes: base.network.num_nodes,
        edges: keep.iter().map(|&e| base.network.edges[e]).collect(),
    };
    let pruned_lat: Vec<AffineLatency> = keep.iter().map(|&e| base_lat[e]).collect();
    let pruned_nash = nash_flow(&pruned, &pruned_lat, &[commodity], tol)?;
    let l_star = total_latency(&pruned_lat, &pruned_nash);

    // Copies: nodes 0..n are G₁, n..2n are G₂, then s, t.
    let n = base.network.num_nodes;
    let s = 2 * n;
    let t = 2 * n + 1;
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(2 * m + 4);
    for &(u, v) in &base.network.edges {
        edges.push((u, v));
    }
    for &(u, v) in &base.network.edges {
        edges.push((u + n, v + n));
    }
    let e_s1 = edges.len();
    edges.push((s, commodity.source));
    let e_s2 = edges.len();
    edges.push((s, commodity.source + n));
    edges.push((commodity.sink, t));
    edges.push((commodity.sink + n, t));
    let network = Network {
        num_nodes: 2 * n + 2,
        edges,
    };

    let zero = AffineLatency {
        slope: 0.0,
        intercept: 0.0,
    };
    let mut h = Vec::with_capacity(2 * m + 4);
    h.extend(base_lat.iter().copied());
    h.extend(base_lat.iter().copied());
    h.extend([zero; 4]);

    let mf = m as f64;
    let bump = 8.0 * mf.powi(3) * l_nash;
    let state_edge: Vec<usize> = (0..2 * m).chain([e_s1, e_s2]).collect();
    let mut latencies = Vec::with_capacity(state_edge.len());
    let mut prior = Vec::with_capacity(state_edge.len());
    for (idx, &e) in state_edge.iter().enumerate() {
        let mut lat = h.clone();
        lat[e].intercept += bump;
        latencies.push(lat);
        prior.push(if idx < 2 * m {
            1.0 / (mf * mf)
        } else {
            (1.0 - 2.0 / mf) / 2.0
        });
    }

    let inst = RoutingInstance {
        network,
        latencies,
        commodities: vec![Commodity {
            source: s,
            sink: t,
            demand: 1.0,
        }],
        prior,
    };
    inst.validate()?;
    Ok(TollsGadget {
        inst,
        m,
        k_star: k_star.to_vec(),
        l_nash,
        l_star,
        demand_scale,
        state_edge,
    })
}

/// The two-signal scheme of the completeness direction: μ¹ puts 2/m² on
/// K₁ ∪ (E₂ ∖ K₂) and the rest on (s,s₂), so the cheap surviving edges are
/// exactly G₁ ∖ K₁; μ² is the mirror image. Their average is the prior.
pub fn scheme_from_tolls(gadget: &TollsGadget) -> Result<SignalingScheme, RoutingError> {
    let m = gadget.m;
    let num_states = 2 * m + 2;
    let in_k = |e: usize| gadget.k_star.contains(&e);
    let mut mu1 = vec![0.0; num_states];
    let mut mu2 = vec![0.0; num_states];
    let w = 2.0 / (m as f64 * m as f64);
    for e in 0..m {
        if in_k(e) {
            mu1[e] = w; // K₁
            mu2[m + e] = w; // K₂
        } else {
            mu1[m + e] = w; // E₂ ∖ K₂
            mu2[e] = w; // E₁ ∖ K₁
        }
    }
    mu1[2 * m + 1] = 1.0 - 2.0 / m as f64; // (s,s₂)
    mu2[2 * m] = 1.0 - 2.0 / m as f64; // (s,s₁)
    SignalingScheme::new(vec![(0.5, Posterior(mu1)), (0.5, Posterior(mu2))])
        .map_err(RoutingError::Game)
}

/// Soundness direction: find a posterior carrying source-link mass ≥ 1/m
/// whose Nash latency is within the L′/(1−4/m) budget, and read tolls
/// τ_e = μ′_e·8m³L off the copy the flow avoids. Returns per-base-edge
/// tolls; a scheme no better than the no-toll baseline yields τ = 0.
pub fn tolls_from_scheme(
    gadget: &TollsGadget,
    scheme: &SignalingScheme,
    tol: f64,
) -> Result<Vec<f64>, RoutingError> {
    let m = gadget.m;
    let mf = m as f64;
    let l_prime = routing_scheme_value(&gadget.inst, scheme, tol)?;
    if l_prime > gadget.l_nash {
        return Ok(vec![0.0; m]);
    }
    let budget = l_prime / (1.0 - 4.0 / mf);
    let mut best: Option<(f64, &Posterior)> = None;
    for (_, mu) in &scheme.signals {
        if mu.0[2 * m] + mu.0[2 * m + 1] < 1.0 / mf {
            continue;
        }
        let l = mix_latencies(&gadget.inst, mu)?;
        let f = nash_flow(&gadget.inst.network, &l, &gadget.inst.commodities, tol)?;
        let v = total_latency(&l, &f);
        if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
            best = Some((v, mu));
        }
    }
    let Some((v, mu)) = best else {
        return Err(RoutingError::ContractViolation(
            "no posterior with source-link mass 1/m".into(),
        ));
    };
    if v > budget + tol.max(1e-9) * (1.0 + budget.abs()) {
        return Err(RoutingError::ContractViolation(format!(
            "best qualifying posterior has latency {v}, budget {budget}"
        )));
    }
    // Flow avoids the copy whose source link is expensive.
    let bump = 8.0 * mf.powi(3) * gadget.l_nash;
    let copy_offset = if mu.0[2 * m] >= 1.0 / (2.0 * mf) {
        m // (s,s₁) deleted → flow on G₂
    } else {
        0 // flow on G₁
    };
    Ok((0..m).map(|e| mu.0[copy_offset + e] * bump).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pigou() -> (Network, Vec<AffineLatency>, Vec<Commodity>) {
        let net = Network {
            num_nodes: 2,
            edges: vec![(0, 1), (0, 1)],
        };
        let lat = vec![
            AffineLatency {
                slope: 0.0,
                intercept: 1.0,
            },
            AffineLatency {
                slope: 1.0,
                intercept: 0.0,
            },
        ];
        let com = vec![Commodity {
            source: 0,
            sink: 1,
            demand: 1.0,
        }];
        (net, lat, com)
    }

    /// Braess diamond: s=0, v=1, w=2, t=3; edges (s,v)=x, (v,t)=1, (s,w)=1,
    /// (w,t)=x, shortcut (v,w)=0.
    fn braess() -> RoutingInstance {
        let net = Network {
            num_nodes: 4,
            edges: vec![(0, 1), (1, 3), (0, 2), (2, 3), (1, 2)],
        };
        let x = AffineLatency {
            slope: 1.0,
            intercept: 0.0,
        };
        let one = AffineLatency {
            slope: 0.0,
            intercept: 1.0,
        };
        let zero = AffineLatency {
            slope: 0.0,
            intercept: 0.0,
        };
        RoutingInstance {
            network: net,
            latencies: vec![vec![x, one, one, x, zero]],
            commodities: vec![Commodity {
                source: 0,
                sink: 3,
                demand: 1.0,
            }],
            prior: vec![1.0],
        }
    }

    #[test]
    fn pigou_nash_and_optimal() {
        let (net, lat, com) = pigou();
        let nash = nash_flow(&net, &lat, &com, 1e-9).unwrap();
        assert!((total_latency(&lat, &nash) - 1.0).abs() < 1e-6);
        assert!(nash.total[1] > 1.0 - 1e-6, "all flow on the x edge");
        let opt = optimal_flow(&net, &lat, &com, 1e-9).unwrap();
        assert!((total_latency(&lat, &opt) - 0.75).abs() < 1e-6);
        assert!((opt.total[1] - 0.5).abs() < 1e-4);
        let poa = price_of_anarchy(&net, &lat, &com, 1e-9).unwrap();
        assert!((poa - 4.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn symmetric_links_split_evenly() {
        let net = Network {
            num_nodes: 2,
            edges: vec![(0, 1), (0, 1)],
        };
        let x = AffineLatency {
            slope: 1.0,
            intercept: 0.0,
        };
        let com = vec![Commodity {
            source: 0,
            sink: 1,
            demand: 1.0,
        }];
        let nash = nash_flow(&net, &[x, x], &com, 1e-10).unwrap();
        assert!((nash.total[0] - 0.5).abs() < 1e-5);
        assert!((nash.total[1] - 0.5).abs() < 1e-5);
    }

    #[test]
    fn braess_paradox() {
        let inst = braess();
        let lat = &inst.latencies[0];
        let nash = nash_flow(&inst.network, lat, &inst.commodities, 1e-9).unwrap();
        assert!((total_latency(lat, &nash) - 2.0).abs() < 1e-4);
        // Removing the shortcut improves the equilibrium to 3/2.
        let pruned = Network {
            num_nodes: 4,
            edges: inst.network.edges[..4].to_vec(),
        };
        let nash2 = nash_flow(&pruned, &lat[..4], &inst.commodities, 1e-9).unwrap();
        assert!((total_latency(&lat[..4], &nash2) - 1.5).abs() < 1e-4);
    }

    #[test]
    fn mixing_is_linear_in_the_posterior() {
        let mut inst = braess();
        let mut state2 = inst.latencies[0].clone();
        for l in &mut state2 {
            l.intercept += 2.0;
            l.slope *= 3.0;
        }
        inst.latencies.push(state2);
        inst.prior = vec![0.5, 0.5];
        let l0 = mix_latencies(&inst, &Posterior::point_mass(0, 2)).unwrap();
        assert_eq!(l0, inst.latencies[0]);
        let mid = mix_latencies(&inst, &Posterior(vec![0.5, 0.5])).unwrap();
        for (e, l) in mid.iter().enumerate() {
            assert!((l.intercept - (inst.latencies[0][e].intercept + 1.0)).abs() < 1e-12);
            assert!((l.slope - 2.0 * inst.latencies[0][e].slope).abs() < 1e-12);
        }
    }

    #[test]
    fn conservation_and_wardrop_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            // Random 5-node layered graph with both serial and parallel routes.
            let mut edges = vec![(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (0, 3), (1, 2)];
            edges.push((2, 4));
            let net = Network {
                num_nodes: 5,
                edges,
            };
            let lat: Vec<AffineLatency> = (0..net.edges.len())
                .map(|_| AffineLatency {
                    slope: rng.gen_range(0.1..2.0),
                    intercept: rng.gen_range(0.0..2.0),
                })
                .collect();
            let com = vec![
                Commodity {
                    source: 0,
                    sink: 4,
                    demand: 1.0,
                },
                Commodity {
                    source: 1,
                    sink: 4,
                    demand: 0.5,
                },
            ];
            let nash = nash_flow(&net, &lat, &com, 1e-8).unwrap();
            assert!(nash.conservation_residual(&net, &com) < 1e-9);
            assert!(wardrop_residual(&net, &lat, &com, &nash) < 1e-4);
            let opt = optimal_flow(&net, &lat, &com, 1e-8).unwrap();
            // Marginal-cost (KKT) residual for the optimum.
            let marginal: Vec<AffineLatency> = lat
                .iter()
                .zip(opt.total.iter())
                .map(|(l, &x)| AffineLatency {
                    slope: 0.0,
                    intercept: 2.0 * l.slope * x + l.intercept,
                })
                .collect();
            assert!(path_gap_residual(&net, &marginal, &com, &opt) < 1e-4);
            // Nash is feasible for the optimum.
            assert!(total_latency(&lat, &opt) <= total_latency(&lat, &nash) + 1e-6);
            let poa = price_of_anarchy(&net, &lat, &com, 1e-8).unwrap();
            assert!((1.0 - 1e-9..=4.0 / 3.0 + 1e-4).contains(&poa), "poa {poa}");
        }
    }

    #[test]
    fn nash_latency_is_restart_invariant() {
        let (net, lat, com) = pigou();
        let quad: Vec<f64> = lat.iter().map(|l| l.slope / 2.0).collect();
        let lin: Vec<f64> = lat.iter().map(|l| l.intercept).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let reference = total_latency(&lat, &nash_flow(&net, &lat, &com, 1e-8).unwrap());
        for _ in 0..5 {
            // Random feasible start: split demand across the two links.
            let q: f64 = rng.gen_range(0.0..1.0);
            let start = Flow {
                per_commodity: vec![vec![q, 1.0 - q]],
                total: vec![q, 1.0 - q],
            };
            let f = frank_wolfe(&net, &quad, &lin, &com, 1e-8, Some(start)).unwrap();
            assert!((total_latency(&lat, &f) - reference).abs() < 2e-8 + 1e-6);
        }
    }

    #[test]
    fn scheme_values_and_full_revelation() {
        let mut inst = braess();
        let mut state2 = inst.latencies[0].clone();
        for l in &mut state2 {
            l.intercept = l.intercept * 0.5 + 0.2;
        }
        inst.latencies.push(state2);
        inst.prior = vec![0.6, 0.4];

        let (scheme, value) = full_revelation_routing(&inst, 1e-8).unwrap();
        // Matches the state-by-state sum.
        let mut manual = 0.0;
        for (theta, &w) in inst.prior.iter().enumerate() {
            let l = &inst.latencies[theta];
            let f = nash_flow(&inst.network, l, &inst.commodities, 1e-8).unwrap();
            manual += w * total_latency(l, &f);
        }
        assert!((value - manual).abs() < 1e-6);
        assert_eq!(scheme.signals.len(), 2);

        // No-signaling scheme on the prior.
        let flat = SignalingScheme::new(vec![(1.0, Posterior(inst.prior.clone()))]).unwrap();
        let flat_value = routing_scheme_value(&inst, &flat, 1e-8).unwrap();
        // Any scheme is within the 4/3 price-of-anarchy factor of full
        // revelation (latency is minimized, so schemes can beat it but not
        // by more than the PoA).
        assert!(flat_value >= value / (4.0 / 3.0) - 1e-6);

        // Grid-certified best scheme is at least as good as both.
        let (_, best) = grid_routing_scheme(&inst, 1.0 / 16.0, 1e-8).unwrap();
        assert!(best <= value + 1e-6);
        assert!(best <= flat_value + 1e-6);
        assert!(value <= 4.0 / 3.0 * best + 1e-2);
    }

    #[test]
    fn single_state_scheme_value_is_nash_latency() {
        let inst = braess();
        let scheme = SignalingScheme::new(vec![(1.0, Posterior(vec![1.0]))]).unwrap();
        let v = routing_scheme_value(&inst, &scheme, 1e-8).unwrap();
        assert!((v - 2.0).abs() < 1e-4);
    }

    #[test]
    fn braess_tolls_gadget_construction() {
        let gadget = tolls_gadget(&braess(), &[4]).unwrap();
        assert_eq!(gadget.m, 5);
        assert!((gadget.l_nash - 2.0).abs() < 1e-6);
        assert!((gadget.l_star - 1.5).abs() < 1e-6);
        assert_eq!(gadget.inst.prior.len(), 12); // 2m + 2 states
        assert_eq!(gadget.inst.network.edges.len(), 14); // 2m + 4 edges
        // Zero-latency connectors.
        for e in 10..14 {
            let l = gadget.inst.latencies[0][e];
            // Connector intercepts are zero except when the state bumps them.
            if gadget.state_edge[0] != e {
                assert_eq!(l.slope, 0.0);
                assert_eq!(l.intercept, 0.0);
            }
        }
        // Prior: 1/m² on copy edges, (1 − 2/m)/2 on source links.
        for p in &gadget.inst.prior[..10] {
            assert!((p - 0.04).abs() < 1e-12);
        }
        for p in &gadget.inst.prior[10..] {
            assert!((p - 0.3).abs() < 1e-12);
        }
        // State θ bumps exactly its own edge by 8m³L.
        let base = braess();
        let bump = 8.0 * 125.0 * gadget.l_nash;
        for (theta, &bumped) in gadget.state_edge.iter().enumerate() {
            for (edge, l) in gadget.inst.latencies[theta].iter().enumerate() {
                let unbumped = if edge < 10 {
                    base.latencies[0][edge % 5].intercept
                } else {
                    0.0
                };
                let want = unbumped + if edge == bumped { bump } else { 0.0 };
                assert!((l.intercept - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn scheme_from_tolls_hits_l_star() {
        let gadget = tolls_gadget(&braess(), &[4]).unwrap();
        let scheme = scheme_from_tolls(&gadget).unwrap();
        // (μ¹+μ²)/2 equals the prior exactly.
        assert!(scheme.decomposition_residual(&gadget.inst.prior) < 1e-12);
        let v = routing_scheme_value(&gadget.inst, &scheme, 1e-9).unwrap();
        assert!((v - gadget.l_star).abs() < 1e-4, "value {v}");
    }

    #[test]
    fn empty_removal_set_keeps_nash_latency() {
        let gadget = tolls_gadget(&braess(), &[]).unwrap();
        let scheme = scheme_from_tolls(&gadget).unwrap();
        for (_, mu) in &scheme.signals {
            let l = mix_latencies(&gadget.inst, mu).unwrap();
            let f = nash_flow(&gadget.inst.network, &l, &gadget.inst.commodities, 1e-9).unwrap();
            assert!((total_latency(&l, &f) - gadget.l_nash).abs() < 1e-4);
        }
    }

    #[test]
    fn tolls_round_trip_on_braess() {
        let gadget = tolls_gadget(&braess(), &[4]).unwrap();
        let scheme = scheme_from_tolls(&gadget).unwrap();
        let tau = tolls_from_scheme(&gadget, &scheme, 1e-9).unwrap();
        // Tolls are supported on K* (the shortcut).
        for (e, &t) in tau.iter().enumerate() {
            if e == 4 {
                assert!(t > 1.0, "shortcut toll {t}");
            } else {
                assert_eq!(t, 0.0, "edge {e} tolled");
            }
        }
        // Nash cost of the tolled base is within the promised budget.
        let base = braess();
        let tolled: Vec<AffineLatency> = base.latencies[0]
            .iter()
            .zip(&tau)
            .map(|(l, &t)| AffineLatency {
                slope: l.slope,
                intercept: l.intercept + t,
            })
            .collect();
        let f = nash_flow(&base.network, &tolled, &base.commodities, 1e-9).unwrap();
        let cost = total_latency(&tolled, &f);
        let l_prime = routing_scheme_value(&gadget.inst, &scheme, 1e-9).unwrap();
        assert!(cost <= l_prime / (1.0 - 4.0 / 5.0) + 1e-4, "cost {cost}");
    }

    #[test]
    fn trivial_scheme_gives_zero_tolls() {
        let gadget = tolls_gadget(&braess(), &[]).unwrap();
        let scheme =
            SignalingScheme::new(vec![(1.0, Posterior(gadget.inst.prior.clone()))]).unwrap();
        let tau = tolls_from_scheme(&gadget, &scheme, 1e-9).unwrap();
        assert_eq!(tau, vec![0.0; 5]);
    }

    #[test]
    fn validation_catches_bad_instances() {
        let mut inst = braess();
        inst.latencies[0][0].slope = -1.0;
        assert!(matches!(inst.validate(), Err(RoutingError::BadLatency)));

        let mut inst = braess();
        inst.network.edges.retain(|&(u, _)| u != 0);
        inst.latencies[0].truncate(inst.network.edges.len());
        assert!(matches!(
            inst.validate(),
            Err(RoutingError::Disconnected(0))
        ));
    }
}
