//! Extended security games: zero-sum games whose state payoffs decompose as
//! `A^θ = Ā + b^θ·𝟙ᵀ + 𝟙·(d^θ)ᵀ`, making the minimax value computable from
//! an LP with one variable per row strategy instead of per matrix entry.

use crate::graph::UndirectedGraph;
use crate::lp::{solve_lp, LinearProgram, LpStatus, RowSense, Sense};
use crate::signaling::lipschitz_bound;
use crate::zerosum::{BayesianGame, Equilibrium, GameError, Posterior};
use serde::{Deserialize, Serialize};

/// Compact form: `abar` is r×c, `b` is r×M (column θ = b^θ), `d` is c×M
/// (column θ = d^θ).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendedSecurityGame {
    pub abar: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
    pub prior: Vec<f64>,
    pub payoff_bound: f64,
}

impl ExtendedSecurityGame {
    pub fn num_rows(&self) -> usize {
        self.abar.len()
    }

    pub fn num_cols(&self) -> usize {
        self.abar.first().map_or(0, |r| r.len())
    }

    pub fn num_states(&self) -> usize {
        self.prior.len()
    }

    pub fn check_dims(&self) -> Result<(), GameError> {
        let (r, c, m) = (self.num_rows(), self.num_cols(), self.num_states());
        if r == 0 || c == 0 || m == 0 {
            return Err(GameError::Dimension("empty security game".into()));
        }
        if self.abar.iter().any(|row| row.len() != c) {
            return Err(GameError::Dimension("ragged abar".into()));
        }
        if self.b.len() != r || self.b.iter().any(|row| row.len() != m) {
            return Err(GameError::Dimension(format!("b must be {r}x{m}")));
        }
        if self.d.len() != c || self.d.iter().any(|row| row.len() != m) {
            return Err(GameError::Dimension(format!("d must be {c}x{m}")));
        }
        Ok(())
    }

    /// Dense entry `A^θ[i][j] = Ā[i][j] + b[i][θ] + d[j][θ]`.
    pub fn dense_entry(&self, theta: usize, i: usize, j: usize) -> f64 {
        self.abar[i][j] + self.b[i][theta] + self.d[j][theta]
    }

    /// Materialize the dense Bayesian game.
    pub fn expand(&self) -> Result<BayesianGame, GameError> {
        self.check_dims()?;
        let (r, c, m) = (self.num_rows(), self.num_cols(), self.num_states());
        let payoffs = (0..m)
            .map(|theta| {
                (0..r)
                    .map(|i| (0..c).map(|j| self.dense_entry(theta, i, j)).collect())
                    .collect()
            })
            .collect();
        BayesianGame::new(payoffs, self.prior.clone(), self.payoff_bound)
    }

    /// Minimax value under posterior μ from the compact LP
    /// `max_x  xᵀBμ + min_j (xᵀĀ + μᵀDᵀ)_j`.
    pub fn val_compact(&self, mu: &Posterior) -> Result<Equilibrium, GameError> {
        self.check_dims()?;
        let (r, c, m) = (self.num_rows(), self.num_cols(), self.num_states());
        if mu.len() != m {
            return Err(GameError::Dimension(format!(
                "posterior length {} vs {} states",
                mu.len(),
                m
            )));
        }
        let bmu: Vec<f64> = self
            .b
            .iter()
            .map(|row| row.iter().zip(&mu.0).map(|(a, w)| a * w).sum())
            .collect();
        let dmu: Vec<f64> = self
            .d
            .iter()
            .map(|row| row.iter().zip(&mu.0).map(|(a, w)| a * w).sum())
            .collect();

        // Variables (x_1..x_r, t): maximize xᵀ(Bμ) + t subject to Σx = 1
        // and xᵀĀ_j − t ≥ −(Dμ)_j for every column j.
        let mut obj = bmu.clone();
        obj.push(1.0);
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize, obj);
        lp.free_variable(r);
        let mut ones = vec![1.0; r];
        ones.push(0.0);
        lp.add_row(ones, RowSense::Eq, 1.0);
        for j in 0..c {
            let mut row: Vec<f64> = self.abar.iter().map(|ar| ar[j]).collect();
            row.push(-1.0);
            lp.add_row(row, RowSense::Ge, -dmu[j]);
        }
        let sol = solve_lp(&lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(GameError::LpStatus(sol.status));
        }
        let mut x = sol.primal[..r].to_vec();
        for v in x.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        // Column strategy: duals of the min-constraints. In this solver's
        // convention they come out nonpositive for ≥ rows of a max problem.
        let mut y: Vec<f64> = sol.dual[1..=c].iter().map(|&d| (-d).max(0.0)).collect();
        let ysum: f64 = y.iter().sum();
        if ysum > 1e-12 {
            for v in y.iter_mut() {
                *v /= ysum;
            }
        }
        Ok(Equilibrium {
            value: sol.value,
            row_strategy: x,
            col_strategy: y,
        })
    }
}

/// The attacker/defender game on a graph: states and both players' pure
/// strategies are vertices, `B` is the adjacency matrix, and `Ā = Dᵀ = −ρI`,
/// so the attacker earns 1 for hitting a neighbor of the true state, less ρ
/// for each of {state, attacked vertex} the defender covers.
pub fn network_security_game(graph: &UndirectedGraph, rho: f64) -> ExtendedSecurityGame {
    let n = graph.n;
    let adj = graph.adjacency_matrix();
    let mut neg_rho_eye = vec![vec![0.0; n]; n];
    for (i, row) in neg_rho_eye.iter_mut().enumerate() {
        row[i] = -rho;
    }
    ExtendedSecurityGame {
        abar: neg_rho_eye.clone(),
        b: adj,
        d: neg_rho_eye,
        prior: vec![1.0 / n as f64; n],
        payoff_bound: 1.0 + 2.0 * rho,
    }
}

/// Certified Lipschitz constant of the game value in the posterior: the
/// bound for `μ ↦ μᵀDᵀ` (the only μ-dependence inside the min).
pub fn esg_lipschitz_bound(esg: &ExtendedSecurityGame) -> f64 {
    // Dᵀ is M×c; build its rows from the stored c×M `d`.
    let m = esg.num_states();
    let c = esg.num_cols();
    let dt: Vec<Vec<f64>> = (0..m)
        .map(|theta| (0..c).map(|j| esg.d[j][theta]).collect())
        .collect();
    lipschitz_bound(&dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zerosum::{game_value, mix_payoffs, val};
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_posterior(rng: &mut ChaCha8Rng, m: usize) -> Posterior {
        let mut p: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
        let s: f64 = p.iter().sum();
        for v in p.iter_mut() {
            *v /= s;
        }
        Posterior(p)
    }

    fn random_esg(rng: &mut ChaCha8Rng, r: usize, c: usize, m: usize) -> ExtendedSecurityGame {
        let abar = (0..r)
            .map(|_| (0..c).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let b = (0..r)
            .map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let d = (0..c)
            .map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let mut prior: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..1.0)).collect();
        let s: f64 = prior.iter().sum();
        for v in prior.iter_mut() {
            *v /= s;
        }
        let s: f64 = prior.iter().sum();
        prior[0] += 1.0 - s;
        ExtendedSecurityGame {
            abar,
            b,
            d,
            prior,
            payoff_bound: 3.0,
        }
    }

    #[test]
    fn zero_b_and_d_reduce_to_the_base_matrix() {
        let esg = ExtendedSecurityGame {
            abar: vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
            b: vec![vec![0.0; 2]; 2],
            d: vec![vec![0.0; 2]; 2],
            prior: vec![0.5, 0.5],
            payoff_bound: 1.0,
        };
        let dense = esg.expand().unwrap();
        for theta in 0..2 {
            assert_eq!(dense.payoffs[theta], esg.abar);
        }
        let base = game_value(&esg.abar).unwrap().value;
        for p in [vec![1.0, 0.0], vec![0.3, 0.7]] {
            let eq = esg.val_compact(&Posterior(p)).unwrap();
            assert!((eq.value - base).abs() < 1e-9);
        }
    }

    #[test]
    fn compact_value_matches_dense_on_random_games() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let r = rng.gen_range(2..6);
            let c = rng.gen_range(2..6);
            let m = rng.gen_range(2..6);
            let esg = random_esg(&mut rng, r, c, m);
            let dense = esg.expand().unwrap();
            for _ in 0..3 {
                let mu = random_posterior(&mut rng, m);
                let compact = esg.val_compact(&mu).unwrap();
                let dense_val = val(&dense, &mu).unwrap();
                assert!(
                    (compact.value - dense_val).abs() < 1e-7,
                    "compact {} dense {}",
                    compact.value,
                    dense_val
                );
                // Compact strategies are mutual best responses in the dense
                // mixed matrix.
                let a_mu = mix_payoffs(&dense, &mu).unwrap();
                for j in 0..c {
                    let xa: f64 = (0..r).map(|i| compact.row_strategy[i] * a_mu[i][j]).sum();
                    assert!(xa >= compact.value - 1e-7);
                }
                for a_row in &a_mu {
                    let ay: f64 = a_row
                        .iter()
                        .zip(&compact.col_strategy)
                        .map(|(v, y)| v * y)
                        .sum();
                    assert!(ay <= compact.value + 1e-7, "ay {} v {}", ay, compact.value);
                }
            }
        }
    }

    #[test]
    fn network_game_entries_and_trivia() {
        // Lone vertex with ρ = 0: everything is zero.
        let g1 = UndirectedGraph::new(1, vec![]).unwrap();
        let esg = network_security_game(&g1, 0.0);
        assert!(
            (esg.val_compact(&Posterior(vec![1.0])).unwrap().value).abs() < 1e-12
        );

        // Triangle with ρ = 0: the attacker always finds a neighbor.
        let tri = UndirectedGraph::cycle(3);
        let esg = network_security_game(&tri, 0.0);
        for theta in 0..3 {
            let v = esg
                .val_compact(&Posterior::point_mass(theta, 3))
                .unwrap()
                .value;
            assert!((v - 1.0).abs() < 1e-9);
        }

        // Structure and the dense payoff formula
        // e_aᵀBe_θ − ρ(e_aᵀ + e_θᵀ)e_d.
        let rho = 0.25;
        let esg = network_security_game(&tri, rho);
        let adj = tri.adjacency_matrix();
        for i in 0..3 {
            for j in 0..3 {
                let eye = if i == j { -rho } else { 0.0 };
                assert_eq!(esg.abar[i][j], eye);
                assert_eq!(esg.d[i][j], eye);
            }
        }
        for theta in 0..3 {
            for a in 0..3 {
                for d in 0..3 {
                    let expect = adj[a][theta]
                        - rho * ((a == d) as u8 as f64 + (theta == d) as u8 as f64);
                    assert!((esg.dense_entry(theta, a, d) - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lipschitz_bound_of_the_network_game_scales_with_rho() {
        let g = UndirectedGraph::cycle(4);
        let esg = network_security_game(&g, 0.5);
        // Columns of Dᵀ have spread ρ and there are M = 4 rows.
        assert!((esg_lipschitz_bound(&esg) - 4.0 / 2.0 * 0.5).abs() < 1e-12);
    }
}
