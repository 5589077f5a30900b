//! Planted clique cover lab: seeded graph generation, the hardness-game
//! construction that ties signaling value to clique structure, the
//! clique-cover completeness scheme, cluster extraction from high-value
//! signals, and a recovery routine that rebuilds a planted clique from a
//! cluster hint.

use crate::zerosum::{BayesianGame, GameError, Posterior, SignalingScheme};
use crate::lp::{solve_lp, LinearProgram, LpStatus, RowSense, Sense};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Entry cap for dense expansion of a hardness game (n·n·(2N+1) f64 cells).
const EXPAND_CAP: usize = 20_000_000;

#[derive(Debug, Clone)]
pub struct PlantedGraph {
    pub n: usize,
    /// Symmetric; diagonal false.
    pub adjacency: Vec<Vec<bool>>,
    pub planted_sets: Vec<Vec<usize>>,
    /// Edges from the background phase, u < v, sorted.
    pub background_edges: Vec<(usize, usize)>,
    /// Clique edges not already present after the background phase.
    pub clique_edges: Vec<(usize, usize)>,
    pub p: f64,
    pub k: usize,
    pub r: usize,
    pub seed: u64,
}

impl PlantedGraph {
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut all: Vec<(usize, usize)> = self
            .background_edges
            .iter()
            .chain(self.clique_edges.iter())
            .copied()
            .collect();
        all.sort_unstable();
        all
    }

    /// Adjacency of the background phase alone.
    pub fn background_adjacency(&self) -> Vec<Vec<bool>> {
        let mut adj = vec![vec![false; self.n]; self.n];
        for &(u, v) in &self.background_edges {
            adj[u][v] = true;
            adj[v][u] = true;
        }
        adj
    }

    /// Adjacency of planted set `i` as a clique (diagonal false).
    pub fn clique_adjacency(&self, i: usize) -> Vec<Vec<bool>> {
        let mut adj = vec![vec![false; self.n]; self.n];
        for (a, &u) in self.planted_sets[i].iter().enumerate() {
            for &v in &self.planted_sets[i][a + 1..] {
                adj[u][v] = true;
                adj[v][u] = true;
            }
        }
        adj
    }
}

/// Two-phase generator: background edges first (each pair independently with
/// probability p, pairs visited in lexicographic order on RNG stream 0), then
/// r planted k-sets drawn uniformly without replacement on stream 1, with all
/// internal edges added. Identical arguments give a bit-identical graph.
pub fn gen_pcover(n: usize, p: f64, k: usize, r: usize, seed: u64) -> PlantedGraph {
    assert!((0.0..=1.0).contains(&p), "edge probability out of range");
    assert!(k <= n, "clique size exceeds vertex count");
    let mut adjacency = vec![vec![false; n]; n];
    let mut background_edges = Vec::new();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                adjacency[u][v] = true;
                adjacency[v][u] = true;
                background_edges.push((u, v));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut planted_sets = Vec::with_capacity(r);
    let mut clique_edges = Vec::new();
    for _ in 0..r {
        let mut set = rand::seq::index::sample(&mut rng, n, k).into_vec();
        set.sort_unstable();
        for (a, &u) in set.iter().enumerate() {
            for &v in &set[a + 1..] {
                if !adjacency[u][v] {
                    adjacency[u][v] = true;
                    adjacency[v][u] = true;
                    clique_edges.push((u, v));
                }
            }
        }
        planted_sets.push(set);
    }
    clique_edges.sort_unstable();
    clique_edges.dedup();

    PlantedGraph {
        n,
        adjacency,
        planted_sets,
        background_edges,
        clique_edges,
        p,
        k,
        r,
        seed,
    }
}

/// Fraction of ordered pairs (u, v) ∈ S×T that are edges. Self-pairs count
/// as non-edges (the diagonal is empty).
pub fn bi_density(
    adjacency: &[Vec<bool>],
    s: &[usize],
    t: &[usize],
) -> Result<f64, GameError> {
    if s.is_empty() || t.is_empty() {
        return Err(GameError::Dimension("bi-density of an empty set".into()));
    }
    let mut hits = 0usize;
    for &u in s {
        for &v in t {
            if adjacency[u][v] {
                hits += 1;
            }
        }
    }
    Ok(hits as f64 / (s.len() * t.len()) as f64)
}

#[derive(Debug, Clone)]
pub struct HardnessGameParams {
    pub z: f64,
    pub c2_scaled: usize,
    pub n_scaled: usize,
    pub seed: u64,
}

impl Default for HardnessGameParams {
    fn default() -> Self {
        HardnessGameParams {
            z: 20.0,
            c2_scaled: 8,
            n_scaled: 2000,
            seed: 0,
        }
    }
}

/// Hardness game in compact form. Per state θ (a vertex), the dense payoff
/// matrix is [a^θ  B  𝟙(d^θ)ᵀ]: column 0 is the θ-th adjacency column,
/// the next N columns are the state-independent matrix B, and the last N
/// columns are constant rows repeating d^θ. B and D entries are 2−Z with
/// probability 3/(4Z) and 2 otherwise.
#[derive(Debug, Clone)]
pub struct HardnessGame {
    pub adjacency: Vec<Vec<bool>>,
    /// n×N, indexed [row][column].
    pub b: Vec<Vec<f64>>,
    /// n×N, row θ is d^θ.
    pub d: Vec<Vec<f64>>,
    pub z: f64,
    pub prior: Vec<f64>,
    pub n: usize,
    pub n_rand_cols: usize,
}

/// RNG stream rule for the random blocks, seeded by `params.seed`:
/// column j of B uses stream 2j, column j of D uses stream 2j+1, entries
/// generated top row first. Any single column is reproducible in isolation.
pub fn build_hardness_game(
    graph: &PlantedGraph,
    params: &HardnessGameParams,
) -> Result<HardnessGame, GameError> {
    if params.z <= 2.0 || params.n_scaled == 0 {
        return Err(GameError::Dimension(
            "hardness game needs Z > 2 and at least one random column".into(),
        ));
    }
    let n = graph.n;
    let big_n = params.n_scaled;
    let low = 2.0 - params.z;
    let p_low = 3.0 / (4.0 * params.z);
    let mut b = vec![vec![0.0; big_n]; n];
    let mut d = vec![vec![0.0; big_n]; n];
    for j in 0..big_n {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(2 * j as u64);
        for row in b.iter_mut() {
            row[j] = if rng.gen::<f64>() < p_low { low } else { 2.0 };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(2 * j as u64 + 1);
        for row in d.iter_mut() {
            row[j] = if rng.gen::<f64>() < p_low { low } else { 2.0 };
        }
    }
    Ok(HardnessGame {
        adjacency: graph.adjacency.clone(),
        b,
        d,
        z: params.z,
        prior: vec![1.0 / n as f64; n],
        n,
        n_rand_cols: big_n,
    })
}

impl HardnessGame {
    pub fn num_cols(&self) -> usize {
        2 * self.n_rand_cols + 1
    }

    /// Column 0 of the mixed matrix: (A_G μ)_i.
    pub fn adjacency_column(&self, mu: &Posterior) -> Vec<f64> {
        let mut c0 = vec![0.0; self.n];
        for (theta, &m) in mu.0.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            for (i, c) in c0.iter_mut().enumerate() {
                if self.adjacency[i][theta] {
                    *c += m;
                }
            }
        }
        c0
    }

    /// Game value at posterior μ. The D block does not depend on the row
    /// player, so val(μ) = min(min_j (μᵀD)_j, w) where w is the max-min over
    /// column 0 and the B columns. The latter LP is solved by column
    /// generation: B columns are priced in only when they beat the current
    /// guarantee.
    pub fn val(&self, mu: &Posterior) -> Result<f64, GameError> {
        if mu.len() != self.n {
            return Err(GameError::Dimension(format!(
                "posterior length {} vs {} states",
                mu.len(),
                self.n
            )));
        }
        let support: Vec<usize> = (0..self.n).filter(|&t| mu.0[t] != 0.0).collect();
        let mut d_min = f64::INFINITY;
        for j in 0..self.n_rand_cols {
            let v: f64 = support.iter().map(|&t| mu.0[t] * self.d[t][j]).sum();
            d_min = d_min.min(v);
        }

        let c0 = self.adjacency_column(mu);
        let mut working: Vec<usize> = Vec::new();
        let mut in_working = vec![false; self.n_rand_cols];
        loop {
            // max t  s.t.  t ≤ d_min, xᵀc0 − t ≥ 0, xᵀB_j − t ≥ 0 (j in the
            // working set), Σx = 1. Capping t at the D-block minimum keeps
            // the working set small: pricing stops once every B column
            // clears d_min rather than the (higher) unconstrained max-min.
            let mut obj = vec![0.0; self.n + 1];
            obj[self.n] = 1.0;
            let mut lp = LinearProgram::<f64>::new(Sense::Maximize, obj);
            lp.free_variable(self.n);
            let mut cap_row = vec![0.0; self.n + 1];
            cap_row[self.n] = 1.0;
            lp.add_row(cap_row, RowSense::Le, d_min);
            let mut row0 = c0.clone();
            row0.push(-1.0);
            lp.add_row(row0, RowSense::Ge, 0.0);
            for &j in &working {
                let mut row: Vec<f64> = (0..self.n).map(|i| self.b[i][j]).collect();
                row.push(-1.0);
                lp.add_row(row, RowSense::Ge, 0.0);
            }
            let mut simplex_row = vec![1.0; self.n];
            simplex_row.push(0.0);
            lp.add_row(simplex_row, RowSense::Eq, 1.0);
            let sol = solve_lp(&lp)?;
            if sol.status != LpStatus::Optimal {
                return Err(GameError::LpStatus(sol.status));
            }
            let t = sol.value;
            let x = &sol.primal[..self.n];

            let mut best = (f64::INFINITY, usize::MAX);
            for j in 0..self.n_rand_cols {
                let v: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(i, &xi)| xi * self.b[i][j])
                    .sum();
                if v < best.0 {
                    best = (v, j);
                }
            }
            if best.0 < t - 1e-9 && !in_working[best.1] {
                in_working[best.1] = true;
                working.push(best.1);
            } else {
                return Ok(t);
            }
        }
    }

    /// Dense per-state payoff matrices, guarded against blowup.
    pub fn expand_dense(&self) -> Result<BayesianGame, GameError> {
        let entries = self.n * self.n * self.num_cols();
        if entries > EXPAND_CAP {
            return Err(GameError::Dimension(format!(
                "dense expansion needs {entries} entries, cap is {EXPAND_CAP}"
            )));
        }
        let big_n = self.n_rand_cols;
        let mut payoffs = Vec::with_capacity(self.n);
        for theta in 0..self.n {
            let mut a = vec![vec![0.0; self.num_cols()]; self.n];
            for (i, row) in a.iter_mut().enumerate() {
                row[0] = if self.adjacency[i][theta] { 1.0 } else { 0.0 };
                row[1..1 + big_n].copy_from_slice(&self.b[i]);
                row[1 + big_n..].copy_from_slice(&self.d[theta]);
            }
            payoffs.push(a);
        }
        BayesianGame::new(payoffs, self.prior.clone(), self.z)
    }
}

/// Completeness scheme: peel the planted sets into disjoint remainders
/// S_i′ = S_i ∖ (earlier sets), keep those with |S_i′| ≥ min_frac·k as
/// uniform-posterior signals weighted |S_i′|/n, and lump everything else
/// into one residual signal.
pub fn clique_cover_scheme(
    graph: &PlantedGraph,
    min_frac: f64,
) -> Result<SignalingScheme, GameError> {
    let n = graph.n;
    let cutoff = min_frac * graph.k as f64;
    let mut used = vec![false; n];
    let mut signals = Vec::new();
    let mut covered = vec![false; n];
    for set in &graph.planted_sets {
        let fresh: Vec<usize> = set.iter().copied().filter(|&v| !used[v]).collect();
        for &v in set {
            used[v] = true;
        }
        if (fresh.len() as f64) < cutoff || fresh.is_empty() {
            continue;
        }
        let mut post = vec![0.0; n];
        for &v in &fresh {
            post[v] = 1.0 / fresh.len() as f64;
            covered[v] = true;
        }
        signals.push((fresh.len() as f64 / n as f64, Posterior(post)));
    }
    let rest: Vec<usize> = (0..n).filter(|&v| !covered[v]).collect();
    if !rest.is_empty() {
        let mut post = vec![0.0; n];
        for &v in &rest {
            post[v] = 1.0 / rest.len() as f64;
        }
        signals.push((rest.len() as f64 / n as f64, Posterior(post)));
    }
    SignalingScheme::new(signals)
}

/// Keep signals whose value reaches 1 − √ε and, for each, collect the rows
/// whose adjacency response (A_G μ)_i reaches 1 − Z√ε/(Z−2).
pub fn extract_clusters(
    game: &HardnessGame,
    scheme: &SignalingScheme,
    eps: f64,
) -> Result<Vec<Vec<usize>>, GameError> {
    let val_cut = 1.0 - eps.sqrt();
    let row_cut = 1.0 - game.z * eps.sqrt() / (game.z - 2.0);
    let mut family = Vec::new();
    for (_, mu) in &scheme.signals {
        if game.val(mu)? < val_cut {
            continue;
        }
        let c0 = game.adjacency_column(mu);
        let t: Vec<usize> = (0..game.n).filter(|&i| c0[i] >= row_cut).collect();
        family.push(t);
    }
    Ok(family)
}

#[derive(Debug, Clone)]
pub struct RecoveryOutcome {
    /// A recovered k-clique, or None if no sampled subset produced one.
    pub clique: Option<Vec<usize>>,
    pub subsets_tried: usize,
}

const RECOVERY_BUDGET: usize = 200;
/// Matches the cluster-quality threshold used by `check_cover_condition`.
const RECOVERY_EPS: f64 = 0.03;

/// Rebuild a planted clique from a cluster hint T: sample a pool of about
/// (c₃ ln n)/ε vertices from T, and for random c₃ ln n-sized subsets R of
/// the pool take S′ = common neighbors of R and keep the vertices of S′
/// with at least k−1 neighbors in S′. A candidate is accepted when it is a
/// k-clique; running out of budget is a result, not an error.
pub fn recover_clique(
    graph: &PlantedGraph,
    t: &[usize],
    k: usize,
    c3_scaled: usize,
    seed: u64,
) -> RecoveryOutcome {
    let n = graph.n;
    let r_size = ((c3_scaled as f64 * (n as f64).ln()).ceil() as usize)
        .max(1)
        .min(t.len());
    let pool_size = ((r_size as f64 / RECOVERY_EPS).ceil() as usize).min(t.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<usize> = rand::seq::index::sample(&mut rng, t.len(), pool_size)
        .into_iter()
        .map(|i| t[i])
        .collect();

    for tried in 1..=RECOVERY_BUDGET {
        let r: Vec<usize> = rand::seq::index::sample(&mut rng, pool.len(), r_size)
            .into_iter()
            .map(|i| pool[i])
            .collect();
        // Common neighbors; membership in R itself is not disqualifying.
        let s_prime: Vec<usize> = (0..n)
            .filter(|&v| r.iter().all(|&u| u == v || graph.adjacency[u][v]))
            .collect();
        if s_prime.len() < k {
            continue;
        }
        let in_sp: Vec<bool> = {
            let mut f = vec![false; n];
            for &v in &s_prime {
                f[v] = true;
            }
            f
        };
        let s_hat: Vec<usize> = s_prime
            .iter()
            .copied()
            .filter(|&v| {
                let deg = (0..n)
                    .filter(|&u| in_sp[u] && graph.adjacency[u][v])
                    .count();
                deg >= k - 1
            })
            .collect();
        let is_clique = s_hat.len() == k
            && s_hat
                .iter()
                .enumerate()
                .all(|(a, &u)| s_hat[a + 1..].iter().all(|&v| graph.adjacency[u][v]));
        if is_clique {
            return RecoveryOutcome {
                clique: Some(s_hat),
                subsets_tried: tried,
            };
        }
    }
    RecoveryOutcome {
        clique: None,
        subsets_tried: RECOVERY_BUDGET,
    }
}

/// Fraction of planted sets having some cluster T in the family with
/// |T ∩ S_i| ≥ max(ε|T|, c₃ ln n).
pub fn check_cover_condition(
    family: &[Vec<usize>],
    planted_sets: &[Vec<usize>],
    eps: f64,
    c3_scaled: usize,
    n: usize,
) -> f64 {
    if planted_sets.is_empty() {
        return 1.0;
    }
    let log_term = c3_scaled as f64 * (n as f64).ln();
    let mut satisfied = 0usize;
    for set in planted_sets {
        let in_set: Vec<bool> = {
            let mut f = vec![false; n];
            for &v in set {
                f[v] = true;
            }
            f
        };
        let ok = family.iter().any(|t| {
            let overlap = t.iter().filter(|&&v| in_set[v]).count() as f64;
            overlap >= (eps * t.len() as f64).max(log_term)
        });
        if ok {
            satisfied += 1;
        }
    }
    satisfied as f64 / planted_sets.len() as f64
}
