//! Optimal and approximate signaling schemes.
//!
//! Exact optimization discretizes the posterior simplex with a uniform grid
//! and solves the concavification LP over it. The approximate pipeline runs
//! the ellipsoid method on the dual of that LP, driven by a dual-signaling
//! oracle, and recovers a scheme from the compact LP over the cut set.

use crate::lp::{
    ellipsoid_feasibility, solve_lp, Cut, EllipsoidError, LinearProgram, LpError, LpStatus,
    RowSense, SeparationAnswer, Sense,
};
use crate::parallel::parallel_map;
use crate::zerosum::{val, BayesianGame, GameError, Posterior, SignalingScheme};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard ceiling on grid enumeration, so exhaustive searches fail loudly
/// instead of stalling.
pub const NET_CAP: usize = 2_000_000;

#[derive(Debug, Error)]
pub enum SignalingError {
    #[error("1/delta = {0} is not an integer")]
    NonIntegralDelta(f64),
    #[error("grid with {points} points exceeds cap of {cap}")]
    NetTooLarge { points: u128, cap: usize },
    #[error("dual oracle violated its contract: {0}")]
    OracleContract(String),
    #[error("binary search could not bracket the optimum in [-{0}, {0}]")]
    BracketFailure(f64),
    #[error("LP returned status {0:?}")]
    LpStatus(LpStatus),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Ellipsoid(#[from] EllipsoidError),
}

/// The uniform grid on the simplex: all distributions whose coordinates are
/// integer multiples of `delta`.
#[derive(Debug, Clone)]
pub struct DeltaNet {
    pub delta: f64,
    pub resolution: u64,
    pub points: Vec<Posterior>,
}

fn resolution_of(delta: f64) -> Result<u64, SignalingError> {
    let inv = 1.0 / delta;
    let k = inv.round();
    if delta <= 0.0 || !inv.is_finite() || (inv - k).abs() > 1e-9 || k < 1.0 {
        return Err(SignalingError::NonIntegralDelta(inv));
    }
    Ok(k as u64)
}

/// Number of grid points: C(M−1+1/δ, M−1).
fn net_size(m: usize, k: u64) -> u128 {
    let mut count: u128 = 1;
    for i in 1..=(m as u128 - 1) {
        count = count.saturating_mul(k as u128 + i) / i;
    }
    count
}

pub fn delta_net(m: usize, delta: f64) -> Result<DeltaNet, SignalingError> {
    delta_net_capped(m, delta, NET_CAP)
}

pub fn delta_net_capped(m: usize, delta: f64, cap: usize) -> Result<DeltaNet, SignalingError> {
    assert!(m >= 1);
    let k = resolution_of(delta)?;
    let points = net_size(m, k);
    if points > cap as u128 {
        return Err(SignalingError::NetTooLarge { points, cap });
    }
    let mut out = Vec::with_capacity(points as usize);
    let mut counts = vec![0u64; m];
    enumerate_compositions(k, m, 0, &mut counts, &mut out);
    debug_assert_eq!(out.len() as u128, points);
    Ok(DeltaNet {
        delta: 1.0 / k as f64,
        resolution: k,
        points: out,
    })
}

fn enumerate_compositions(
    remaining: u64,
    m: usize,
    idx: usize,
    counts: &mut Vec<u64>,
    out: &mut Vec<Posterior>,
) {
    if idx == m - 1 {
        counts[idx] = remaining;
        let k = counts.iter().sum::<u64>() as f64;
        out.push(Posterior(counts.iter().map(|&c| c as f64 / k).collect()));
        return;
    }
    for c in 0..=remaining {
        counts[idx] = c;
        enumerate_compositions(remaining - c, m, idx + 1, counts, out);
    }
}

/// Snap `mu` to the grid, moving each coordinate by at most `delta` and
/// minimizing `w · result` among all such grid points.
pub fn round_to_net(mu: &Posterior, delta: f64, w: &[f64]) -> Result<Posterior, SignalingError> {
    let k = resolution_of(delta)?;
    let m = mu.len();
    assert_eq!(w.len(), m);
    let kf = k as f64;
    let mut lo = vec![0u64; m];
    let mut hi = vec![0u64; m];
    // Candidates are the cell corners: each coordinate rounds down or up to
    // the nearest grid multiple. These are exactly the grid points carrying
    // the convex decomposition of `mu`, and all lie within `delta` of it.
    for (theta, &p) in mu.0.iter().enumerate() {
        let t = p * kf;
        lo[theta] = (t + 1e-9).floor().max(0.0) as u64;
        hi[theta] = ((t - 1e-9).ceil().max(0.0).min(kf)) as u64;
    }
    let mut m_units = lo.clone();
    let placed: u64 = lo.iter().sum();
    let mut remaining = k
        .checked_sub(placed)
        .expect("lower bounds cannot exceed the grid resolution");
    // Hand the remaining units to the cheapest coordinates first.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap().then(a.cmp(&b)));
    for theta in order {
        if remaining == 0 {
            break;
        }
        let room = hi[theta] - m_units[theta];
        let take = room.min(remaining);
        m_units[theta] += take;
        remaining -= take;
    }
    assert_eq!(remaining, 0, "grid neighborhood always has enough room");
    Ok(Posterior(
        m_units.iter().map(|&c| c as f64 / kf).collect(),
    ))
}

/// Result of the grid concavification LP.
#[derive(Debug, Clone)]
pub struct DnetSolution {
    pub scheme: SignalingScheme,
    pub value: f64,
    /// Optimal dual weights w: the tight threshold function on states.
    pub dual_weights: Vec<f64>,
    pub dual_value: f64,
    pub net_size: usize,
}

/// Best scheme supported on the `delta` grid: maximize `Σ α_μ val(μ)` over
/// decompositions `Σ α_μ μ = prior`. Value is within `M·δ·payoff_bound` of
/// the unrestricted optimum.
pub fn optimal_signaling_dnet(
    game: &BayesianGame,
    delta: f64,
) -> Result<DnetSolution, SignalingError> {
    let net = delta_net(game.num_states(), delta)?;
    let vals = net_values(game, &net)?;
    concavify_on_points(&net.points, &vals, &game.prior)
}

/// `val` at every grid point (evaluations are independent; run in parallel).
pub fn net_values(game: &BayesianGame, net: &DeltaNet) -> Result<Vec<f64>, SignalingError> {
    let results = parallel_map(&net.points, |p| val(game, p));
    results
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(Into::into)
}

/// Concavification LP over an explicit point set.
pub fn concavify_on_points(
    points: &[Posterior],
    values: &[f64],
    prior: &[f64],
) -> Result<DnetSolution, SignalingError> {
    assert_eq!(points.len(), values.len());
    let m = prior.len();
    let mut lp = LinearProgram::<f64>::new(Sense::Maximize, values.to_vec());
    for theta in 0..m {
        let row: Vec<f64> = points.iter().map(|p| p.0[theta]).collect();
        lp.add_row(row, RowSense::Eq, prior[theta]);
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(SignalingError::LpStatus(sol.status));
    }
    let signals: Vec<(f64, Posterior)> = sol
        .primal
        .iter()
        .zip(points)
        .filter(|(&a, _)| a > 1e-12)
        .map(|(&a, p)| (a, p.clone()))
        .collect();
    let scheme = SignalingScheme::new(signals)?;
    Ok(DnetSolution {
        scheme,
        value: sol.value,
        dual_weights: sol.dual.clone(),
        dual_value: sol.dual_value,
        net_size: points.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualCase {
    Witness,
    Empty,
}

/// Answer to a dual-signaling query at weights `w` and precision `ε`:
/// either a posterior whose value beats its threshold `w·μ` up to ε, or a
/// certificate that no posterior does.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualOracleAnswer {
    pub case: DualCase,
    pub witness: Option<Posterior>,
    /// `val(witness) − w·witness` for the returned witness (≥ −ε), or the
    /// best such gap found when the answer is `Empty` (< 0 on the grid).
    pub slack: f64,
}

pub trait DualOracle {
    fn num_states(&self) -> usize;
    fn query(&self, w: &[f64], eps: f64) -> Result<DualOracleAnswer, SignalingError>;
}

/// Exhaustive dual oracle over a fixed grid with precomputed values.
/// Exact on the grid; for games whose value is γ-Lipschitz in the posterior
/// the answer extends to the whole simplex at precision `γ·δ`.
pub struct GridDualOracle {
    pub net: DeltaNet,
    pub values: Vec<f64>,
}

impl GridDualOracle {
    pub fn for_game(game: &BayesianGame, delta: f64) -> Result<Self, SignalingError> {
        let net = delta_net(game.num_states(), delta)?;
        let values = net_values(game, &net)?;
        Ok(GridDualOracle { net, values })
    }

    pub fn from_values(net: DeltaNet, values: Vec<f64>) -> Self {
        assert_eq!(net.points.len(), values.len());
        GridDualOracle { net, values }
    }
}

impl DualOracle for GridDualOracle {
    fn num_states(&self) -> usize {
        self.net.points.first().map_or(0, |p| p.len())
    }

    fn query(&self, w: &[f64], _eps: f64) -> Result<DualOracleAnswer, SignalingError> {
        let mut best_idx = 0usize;
        let mut best = f64::NEG_INFINITY;
        for (i, (p, &v)) in self.net.points.iter().zip(&self.values).enumerate() {
            let dot: f64 = w.iter().zip(&p.0).map(|(a, b)| a * b).sum();
            let gap = v - dot;
            if gap > best {
                best = gap;
                best_idx = i;
            }
        }
        if best >= 0.0 {
            Ok(DualOracleAnswer {
                case: DualCase::Witness,
                witness: Some(self.net.points[best_idx].clone()),
                slack: best,
            })
        } else {
            Ok(DualOracleAnswer {
                case: DualCase::Empty,
                witness: None,
                slack: best,
            })
        }
    }
}

/// One-shot exhaustive dual query for a game on a fresh `delta` grid.
pub fn dual_oracle_grid(
    game: &BayesianGame,
    w: &[f64],
    eps: f64,
    delta: f64,
) -> Result<DualOracleAnswer, SignalingError> {
    GridDualOracle::for_game(game, delta)?.query(w, eps)
}

#[derive(Debug, Clone)]
pub struct EllipsoidSignalingResult {
    pub scheme: SignalingScheme,
    pub value: f64,
    /// Smallest dual threshold the binary search found feasible.
    pub nu_star: f64,
    pub oracle_queries: usize,
    pub cut_points: usize,
    pub delta: f64,
}

/// Approximate signaling via the ellipsoid method on the dual LP
/// `min w·λ  s.t.  w·μ ≥ val(μ) ∀μ` on the `δ = ε/(M·payoff_bound)` grid.
///
/// Binary-search the smallest ν such that thresholds with `w·λ ≤ ν` can
/// dominate all posterior values; every infeasibility run emits the violated
/// constraints, and the scheme is read off the compact concavification LP
/// over those cut posteriors. Guarantee: value ≥ grid optimum − 5ε.
pub fn ellipsoid_signaling<O: DualOracle>(
    game: &BayesianGame,
    eps: f64,
    oracle: &O,
) -> Result<EllipsoidSignalingResult, SignalingError> {
    assert!(eps > 0.0);
    let m = game.num_states();
    let bound = game.payoff_bound;
    let delta = eps / (m as f64 * bound);
    // Snap δ down so 1/δ is integral.
    let k = (1.0 / delta).ceil();
    let delta = 1.0 / k;

    if m == 1 {
        let scheme = SignalingScheme::new(vec![(1.0, Posterior(vec![1.0]))])?;
        let value = val(game, &scheme.signals[0].1)?;
        return Ok(EllipsoidSignalingResult {
            scheme,
            value,
            nu_star: value,
            oracle_queries: 0,
            cut_points: 1,
            delta,
        });
    }

    // Any optimal dual weight vector is bounded by payoff magnitudes; an
    // ∞-ball of radius M·bound in w-space is safely inside this Euclidean
    // ball.
    let radius = 2.0 * (m as f64) * bound * (m as f64).sqrt();
    let volume_tol = (eps * 1e-3).min(1e-4);

    let mut cut_posteriors: Vec<Posterior> = (0..m).map(|t| Posterior::point_mass(t, m)).collect();
    let mut queries = 0usize;

    let run_at = |nu: f64,
                      cut_posteriors: &mut Vec<Posterior>,
                      queries: &mut usize|
     -> Result<bool, SignalingError> {
        let mut oracle_failure: Option<SignalingError> = None;
        let outcome = ellipsoid_feasibility(m, &vec![0.0; m], radius, volume_tol, |w| {
            let wl: f64 = w.iter().zip(&game.prior).map(|(a, b)| a * b).sum();
            if wl > nu {
                return SeparationAnswer::Cut(Cut {
                    normal: game.prior.clone(),
                    offset: nu,
                });
            }
            *queries += 1;
            let answer = match oracle.query(w, eps) {
                Ok(a) => a,
                Err(e) => {
                    oracle_failure = Some(e);
                    // Dummy inside answer; the stored error aborts below.
                    return SeparationAnswer::Inside;
                }
            };
            match answer.case {
                DualCase::Empty => SeparationAnswer::Inside,
                DualCase::Witness => {
                    let mu = answer.witness.expect("witness case carries a posterior");
                    let w_mu: f64 = w.iter().zip(&mu.0).map(|(a, b)| a * b).sum();
                    let val_mu = answer.slack + w_mu;
                    let mu_hat = match round_to_net(&mu, delta, w) {
                        Ok(p) => p,
                        Err(e) => {
                            oracle_failure = Some(e);
                            return SeparationAnswer::Inside;
                        }
                    };
                    let val_hat = match val(game, &mu_hat) {
                        Ok(v) => v,
                        Err(e) => {
                            oracle_failure = Some(e.into());
                            return SeparationAnswer::Inside;
                        }
                    };
                    // Rounding moved the point by ≤ δ, so the violation
                    // grew by at most M·δ·bound = ε on top of the oracle's
                    // ε: the halfspace w·μ̂ ≥ val(μ̂) + 2ε still excludes w.
                    debug_assert!(val_hat >= val_mu - (m as f64) * delta * bound - 1e-7);
                    let w_mu_hat: f64 = w.iter().zip(&mu_hat.0).map(|(a, b)| a * b).sum();
                    debug_assert!(
                        w_mu_hat - val_hat <= 2.0 * eps + 1e-7,
                        "cut point fails its violation recheck: {} > 2ε",
                        w_mu_hat - val_hat
                    );
                    cut_posteriors.push(mu_hat.clone());
                    let normal: Vec<f64> = mu_hat.0.iter().map(|v| -v).collect();
                    // Tiny slack keeps the cut violated under fp error.
                    let offset = -(val_hat + 2.0 * eps) + 1e-12;
                    SeparationAnswer::Cut(Cut { normal, offset })
                }
            }
        })?;
        if let Some(e) = oracle_failure {
            return Err(e);
        }
        Ok(outcome.point.is_some())
    };

    // Bracket. The optimum can sit exactly at ±bound, where the dual set
    // has zero volume, so the top end gets 2ε of headroom: w = (bound+ε)·𝟙
    // dominates every value with strict slack and satisfies w·λ ≤ bound+2ε
    // with room to spare.
    let mut lo = -bound;
    let mut hi = bound + 2.0 * eps;
    if !run_at(hi, &mut cut_posteriors, &mut queries)? {
        return Err(SignalingError::BracketFailure(bound));
    }
    if run_at(lo, &mut cut_posteriors, &mut queries)? {
        // Everything down to −bound is feasible; the optimum is pinned at
        // the bottom of the payoff range and the cut set already collected
        // (plus vertices) supports a scheme.
        hi = lo;
    }
    while hi - lo > eps / 4.0 {
        let mid = 0.5 * (lo + hi);
        if run_at(mid, &mut cut_posteriors, &mut queries)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    // Compact primal over every posterior that ever appeared in a cut; the
    // emptiness certificates make its optimum ≥ lo − 2ε, and feasibility is
    // guaranteed by the simplex vertices seeded above.
    let values: Vec<f64> = cut_posteriors
        .iter()
        .map(|p| val(game, p))
        .collect::<Result<_, _>>()?;
    let sol = concavify_on_points(&cut_posteriors, &values, &game.prior)?;

    Ok(EllipsoidSignalingResult {
        scheme: sol.scheme,
        value: sol.value,
        nu_star: hi,
        oracle_queries: queries,
        cut_points: cut_posteriors.len(),
        delta,
    })
}

/// Exhaustive maximum-prior search: the grid point (as prior) with the best
/// grid-optimal signaling value.
pub fn max_prior_grid(
    game: &BayesianGame,
    delta: f64,
) -> Result<(Posterior, f64), SignalingError> {
    let net = delta_net(game.num_states(), delta)?;
    let vals = net_values(game, &net)?;
    let mut best: Option<(Posterior, f64)> = None;
    for prior in &net.points {
        let sol = concavify_on_points(&net.points, &vals, &prior.0)?;
        if best.as_ref().is_none_or(|(_, bv)| sol.value > *bv) {
            best = Some((prior.clone(), sol.value));
        }
    }
    Ok(best.expect("net is nonempty"))
}

/// Certified Lipschitz bound for `x ↦ xᵀA` on the simplex in ∞-norm:
/// `max_j (r/2)·(max_i A_ij − min_i A_ij)`. Conservative (uses
/// ‖x−x′‖₁ ≤ r‖x−x′‖∞ after centering each column) but never violated.
pub fn lipschitz_bound(a: &[Vec<f64>]) -> f64 {
    let r = a.len();
    if r == 0 {
        return 0.0;
    }
    let c = a[0].len();
    let mut best = 0.0f64;
    for j in 0..c {
        let mut mx = f64::NEG_INFINITY;
        let mut mn = f64::INFINITY;
        for a_row in a {
            mx = mx.max(a_row[j]);
            mn = mn.min(a_row[j]);
        }
        best = best.max((r as f64 / 2.0) * (mx - mn));
    }
    best
}
