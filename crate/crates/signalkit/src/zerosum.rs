//! Bayesian zero-sum games: payoff mixing, minimax values, and evaluation of
//! signaling schemes (convex decompositions of the prior into posteriors).

use crate::lp::{solve_lp, LinearProgram, LpError, LpStatus, RowSense, Sense};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid probability vector: {0}")]
    Probability(String),
    #[error("payoff entry {value} exceeds declared bound {bound}")]
    PayoffBound { value: f64, bound: f64 },
    #[error("scheme does not decompose the prior (residual {residual:.3e})")]
    InvalidScheme { residual: f64 },
    #[error("LP solver failed with status {0:?}")]
    LpStatus(LpStatus),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// A zero-sum game with payoffs depending on a hidden state. The row player
/// maximizes; entries of every state matrix lie in `[-payoff_bound,
/// payoff_bound]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BayesianGame {
    pub payoffs: Vec<Vec<Vec<f64>>>,
    pub prior: Vec<f64>,
    pub payoff_bound: f64,
}

impl BayesianGame {
    pub fn new(
        payoffs: Vec<Vec<Vec<f64>>>,
        prior: Vec<f64>,
        payoff_bound: f64,
    ) -> Result<Self, GameError> {
        if payoffs.is_empty() {
            return Err(GameError::Dimension("no states".into()));
        }
        if payoffs.len() != prior.len() {
            return Err(GameError::Dimension(format!(
                "{} payoff matrices but prior has length {}",
                payoffs.len(),
                prior.len()
            )));
        }
        let r = payoffs[0].len();
        let c = payoffs[0].first().map_or(0, |row| row.len());
        if r == 0 || c == 0 {
            return Err(GameError::Dimension("empty payoff matrix".into()));
        }
        for (theta, a) in payoffs.iter().enumerate() {
            if a.len() != r || a.iter().any(|row| row.len() != c) {
                return Err(GameError::Dimension(format!(
                    "state {theta} matrix is not {r}x{c}"
                )));
            }
            for row in a {
                for &v in row {
                    if !v.is_finite() {
                        return Err(GameError::Dimension("non-finite payoff".into()));
                    }
                    if v.abs() > payoff_bound + 1e-12 {
                        return Err(GameError::PayoffBound {
                            value: v,
                            bound: payoff_bound,
                        });
                    }
                }
            }
        }
        check_distribution(&prior, 1e-12, "prior")?;
        Ok(BayesianGame {
            payoffs,
            prior,
            payoff_bound,
        })
    }

    pub fn num_states(&self) -> usize {
        self.payoffs.len()
    }

    pub fn num_rows(&self) -> usize {
        self.payoffs[0].len()
    }

    pub fn num_cols(&self) -> usize {
        self.payoffs[0][0].len()
    }
}

fn check_distribution(p: &[f64], tol: f64, what: &str) -> Result<(), GameError> {
    if p.iter().any(|&v| !v.is_finite() || v < -tol) {
        return Err(GameError::Probability(format!("{what} has negative entry")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > tol {
        return Err(GameError::Probability(format!(
            "{what} sums to {s}, expected 1"
        )));
    }
    Ok(())
}

/// A point of the state simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posterior(pub Vec<f64>);

impl Posterior {
    pub fn new(p: Vec<f64>) -> Result<Self, GameError> {
        check_distribution(&p, 1e-12, "posterior")?;
        Ok(Posterior(p))
    }

    pub fn point_mass(theta: usize, num_states: usize) -> Self {
        let mut p = vec![0.0; num_states];
        p[theta] = 1.0;
        Posterior(p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A signaling scheme: positive weights on posteriors whose weighted average
/// reproduces the prior of the game it is used with.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalingScheme {
    pub signals: Vec<(f64, Posterior)>,
}

impl SignalingScheme {
    /// Prunes weights at or below 1e-12 and renormalizes, rejecting inputs
    /// whose weight sum is off by more than 1e-8.
    pub fn new(signals: Vec<(f64, Posterior)>) -> Result<Self, GameError> {
        let mut kept: Vec<(f64, Posterior)> = signals
            .into_iter()
            .filter(|(w, _)| *w > 1e-12)
            .collect();
        if kept.is_empty() {
            return Err(GameError::Probability("scheme has no signals".into()));
        }
        let m = kept[0].1.len();
        if kept.iter().any(|(_, p)| p.len() != m) {
            return Err(GameError::Dimension(
                "posteriors of differing lengths".into(),
            ));
        }
        let s: f64 = kept.iter().map(|(w, _)| *w).sum();
        if (s - 1.0).abs() > 1e-8 {
            return Err(GameError::Probability(format!(
                "signal weights sum to {s}"
            )));
        }
        for (w, _) in kept.iter_mut() {
            *w /= s;
        }
        Ok(SignalingScheme { signals: kept })
    }

    /// Largest componentwise gap between the weighted posterior average and
    /// the given prior.
    pub fn decomposition_residual(&self, prior: &[f64]) -> f64 {
        let mut avg = vec![0.0; prior.len()];
        for (w, p) in &self.signals {
            for (a, &v) in avg.iter_mut().zip(&p.0) {
                *a += w * v;
            }
        }
        avg.iter()
            .zip(prior)
            .map(|(a, l)| (a - l).abs())
            .fold(0.0, f64::max)
    }
}

/// Minimax solution of a single matrix: `min_j (xᵀA)_j = v = max_i (Ay)_i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Equilibrium {
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
}

/// `A^μ = Σ_θ μ_θ A^θ`, the payoff matrix under posterior μ.
pub fn mix_payoffs(game: &BayesianGame, mu: &Posterior) -> Result<Vec<Vec<f64>>, GameError> {
    if mu.len() != game.num_states() {
        return Err(GameError::Dimension(format!(
            "posterior length {} vs {} states",
            mu.len(),
            game.num_states()
        )));
    }
    let (r, c) = (game.num_rows(), game.num_cols());
    let mut out = vec![vec![0.0; c]; r];
    for (theta, a) in game.payoffs.iter().enumerate() {
        let w = mu.0[theta];
        if w == 0.0 {
            continue;
        }
        for (out_row, a_row) in out.iter_mut().zip(a) {
            for (o, &v) in out_row.iter_mut().zip(a_row) {
                *o += w * v;
            }
        }
    }
    Ok(out)
}

/// Solve `max_x min_j (xᵀA)_j` and the symmetric column problem. Both sides
/// are solved as separate LPs rather than trusting dual extraction for the
/// opponent's strategy.
pub fn game_value(a: &[Vec<f64>]) -> Result<Equilibrium, GameError> {
    let r = a.len();
    let c = a.first().map_or(0, |row| row.len());
    if r == 0 || c == 0 {
        return Err(GameError::Dimension("empty matrix".into()));
    }
    if a.iter().any(|row| row.len() != c) {
        return Err(GameError::Dimension("ragged matrix".into()));
    }

    // Row player: variables (x_1..x_r, v); maximize v subject to
    // Σx = 1 and xᵀA_j − v ≥ 0 for every column j.
    let mut obj = vec![0.0; r + 1];
    obj[r] = 1.0;
    let mut lp = LinearProgram::<f64>::new(Sense::Maximize, obj);
    lp.free_variable(r);
    let mut ones = vec![1.0; r];
    ones.push(0.0);
    lp.add_row(ones, RowSense::Eq, 1.0);
    for j in 0..c {
        let mut row: Vec<f64> = a.iter().map(|ar| ar[j]).collect();
        row.push(-1.0);
        lp.add_row(row, RowSense::Ge, 0.0);
    }
    let row_sol = solve_lp(&lp)?;
    if row_sol.status != LpStatus::Optimal {
        return Err(GameError::LpStatus(row_sol.status));
    }

    // Column player: variables (y_1..y_c, u); minimize u subject to
    // Σy = 1 and (Ay)_i − u ≤ 0 for every row i.
    let mut obj = vec![0.0; c + 1];
    obj[c] = 1.0;
    let mut lp = LinearProgram::<f64>::new(Sense::Minimize, obj);
    lp.free_variable(c);
    let mut ones = vec![1.0; c];
    ones.push(0.0);
    lp.add_row(ones, RowSense::Eq, 1.0);
    for a_row in a {
        let mut row = a_row.clone();
        row.push(-1.0);
        lp.add_row(row, RowSense::Le, 0.0);
    }
    let col_sol = solve_lp(&lp)?;
    if col_sol.status != LpStatus::Optimal {
        return Err(GameError::LpStatus(col_sol.status));
    }

    let value = row_sol.primal[r];
    let mut x = row_sol.primal[..r].to_vec();
    let mut y = col_sol.primal[..c].to_vec();
    // The LP can leave tiny negative dust on the strategies; clean it.
    for v in x.iter_mut().chain(y.iter_mut()) {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(Equilibrium {
        value,
        row_strategy: x,
        col_strategy: y,
    })
}

/// `val(μ)`: minimax value of the mixed matrix `A^μ`.
pub fn val(game: &BayesianGame, mu: &Posterior) -> Result<f64, GameError> {
    Ok(game_value(&mix_payoffs(game, mu)?)?.value)
}

/// Quality `Σ_σ α_σ val(μ^σ)` of a scheme. Rejects schemes whose posterior
/// average strays from the prior by more than 1e-6.
pub fn scheme_value(game: &BayesianGame, scheme: &SignalingScheme) -> Result<f64, GameError> {
    let residual = scheme.decomposition_residual(&game.prior);
    if residual > 1e-6 {
        return Err(GameError::InvalidScheme { residual });
    }
    let mut total = 0.0;
    for (w, p) in &scheme.signals {
        total += w * val(game, p)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMode {
    Full,
    None,
}

/// The two trivial schemes: reveal the state exactly, or say nothing.
pub fn baseline_scheme(game: &BayesianGame, mode: BaselineMode) -> SignalingScheme {
    let m = game.num_states();
    let signals = match mode {
        BaselineMode::None => vec![(1.0, Posterior(game.prior.clone()))],
        BaselineMode::Full => game
            .prior
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 1e-12)
            .map(|(theta, &w)| (w, Posterior::point_mass(theta, m)))
            .collect(),
    };
    SignalingScheme::new(signals).expect("baseline schemes are always valid")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeReport {
    pub max_residual: f64,
    pub weight_sum: f64,
    pub ok: bool,
}

/// Diagnostic check of the scheme invariants at the given tolerance.
pub fn validate_scheme(game: &BayesianGame, scheme: &SignalingScheme, tol: f64) -> SchemeReport {
    let weight_sum: f64 = scheme.signals.iter().map(|(w, _)| *w).sum();
    let mut max_residual = scheme.decomposition_residual(&game.prior);
    max_residual = max_residual.max((weight_sum - 1.0).abs());
    let mut ok = max_residual <= tol;
    for (w, p) in &scheme.signals {
        if *w <= 0.0 || p.len() != game.num_states() {
            ok = false;
        }
        let psum: f64 = p.0.iter().sum();
        if (psum - 1.0).abs() > tol || p.0.iter().any(|&v| v < -tol) {
            ok = false;
        }
    }
    SchemeReport {
        max_residual,
        weight_sum,
        ok,
    }
}
