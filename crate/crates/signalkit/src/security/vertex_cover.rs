//! Balanced-vertex-cover gadget: a Bayesian zero-sum game plus a principal
//! objective tensor whose signaling value is ½ exactly when the graph has a
//! vertex cover on half its vertices. The principal scores only when the
//! column player can be induced to play the special strategy `s`.

use crate::graph::UndirectedGraph;
use crate::lp::{solve_lp, LinearProgram, LpStatus, RowSense, Sense};
use crate::zerosum::{BayesianGame, GameError, Posterior, SignalingScheme};
use serde::{Deserialize, Serialize};

/// Principal's payoff per (state, row strategy, column strategy).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectiveTensor {
    pub entries: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone)]
pub struct VcGadget {
    pub graph: UndirectedGraph,
    pub game: BayesianGame,
    pub tensor: ObjectiveTensor,
    /// Column layout: vertices, then edges in graph order, then `s` last.
    pub s_col: usize,
}

/// Column player's payoff for strategy:
///   vertex v: n/(n−2) if v ∉ {θ, v₁}, else 0;
///   edge e:   n/(n−2) if e is not incident to θ, else 0;
///   s:        1.
/// The zero-sum carrier stores the row player's payoffs (their negatives).
/// Prior is uniform; principal tensor is 1 on (⋅, ⋅, s).
pub fn vertex_cover_gadget(graph: &UndirectedGraph) -> Result<VcGadget, GameError> {
    let n = graph.n;
    if n < 3 {
        return Err(GameError::Dimension(
            "vertex cover gadget needs n >= 3".into(),
        ));
    }
    let scale = n as f64 / (n as f64 - 2.0);
    let n_cols = n + graph.edges.len() + 1;
    let s_col = n_cols - 1;

    let mut payoffs = Vec::with_capacity(n);
    for theta in 0..n {
        let mut a = vec![vec![0.0; n_cols]; n];
        for (v1, row) in a.iter_mut().enumerate() {
            for v in 0..n {
                row[v] = if v != theta && v != v1 { -scale } else { 0.0 };
            }
            for (ei, &(u, w)) in graph.edges.iter().enumerate() {
                row[n + ei] = if u != theta && w != theta { -scale } else { 0.0 };
            }
            row[s_col] = -1.0;
        }
        payoffs.push(a);
    }
    let game = BayesianGame::new(payoffs, vec![1.0 / n as f64; n], scale)?;

    let mut entries = vec![vec![vec![0.0; n_cols]; n]; n];
    for state in entries.iter_mut() {
        for row in state.iter_mut() {
            row[s_col] = 1.0;
        }
    }

    Ok(VcGadget {
        graph: graph.clone(),
        game,
        tensor: ObjectiveTensor { entries },
        s_col,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VcVerdict {
    /// 1.0 when some row mix sustains `s` as a best response, else 0.0.
    pub value: f64,
    pub witness: Option<Vec<f64>>,
}

/// Principal's value at μ: 1 if the column player can be held at `s` by some
/// row strategy x — the feasibility system
///   (n/(n−2))(1−x_v)(1−μ_v) ≤ 1   for every vertex v,
///   (n/(n−2))(1−μ_u−μ_v)   ≤ 1   for every edge (u,v),
/// — and 0 otherwise. Edge rows do not involve x; vertex rows become lower
/// bounds on x_v, so feasibility is an LP over the simplex.
pub fn vc_principal_value(gadget: &VcGadget, mu: &Posterior) -> Result<VcVerdict, GameError> {
    let n = gadget.graph.n;
    if mu.len() != n {
        return Err(GameError::Dimension(format!(
            "posterior length {} vs {} vertices",
            mu.len(),
            n
        )));
    }
    let cap = (n as f64 - 2.0) / n as f64;
    for &(u, v) in &gadget.graph.edges {
        if 1.0 - mu.0[u] - mu.0[v] > cap + 1e-9 {
            return Ok(VcVerdict {
                value: 0.0,
                witness: None,
            });
        }
    }
    let mut lp = LinearProgram::<f64>::new(Sense::Maximize, vec![0.0; n]);
    for (v, lb) in lp.lower_bounds.iter_mut().enumerate() {
        let rest = 1.0 - mu.0[v];
        // (1 − x_v)·rest ≤ cap  ⇔  x_v ≥ 1 − cap/rest (when rest > 0).
        let need = if rest > 1e-12 { 1.0 - cap / rest } else { 0.0 };
        *lb = Some(need.max(0.0));
    }
    lp.add_row(vec![1.0; n], RowSense::Eq, 1.0);
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(VcVerdict {
            value: 1.0,
            witness: Some(sol.primal),
        }),
        LpStatus::Infeasible => Ok(VcVerdict {
            value: 0.0,
            witness: None,
        }),
        other => Err(GameError::LpStatus(other)),
    }
}

/// Principal's expected value of a scheme: weighted share of posteriors that
/// sustain `s`.
pub fn vc_scheme_value(gadget: &VcGadget, scheme: &SignalingScheme) -> Result<f64, GameError> {
    let residual = scheme.decomposition_residual(&gadget.game.prior);
    if residual > 1e-6 {
        return Err(GameError::InvalidScheme { residual });
    }
    let mut total = 0.0;
    for (w, p) in &scheme.signals {
        total += w * vc_principal_value(gadget, p)?.value;
    }
    Ok(total)
}
