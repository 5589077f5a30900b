//! Reduction from balanced complete bipartite subgraph (BCBS) detection to
//! threshold signaling on a network security game: the graph contains a
//! K_{r,r} exactly when some posterior pushes the game value past the
//! threshold η, and the heavy coordinates of a high-value posterior/strategy
//! pair spell out the biclique.

use super::esg::{network_security_game, ExtendedSecurityGame};
use crate::graph::BipartiteGraph;
use crate::zerosum::Posterior;
use crate::Rational;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BcbsGadget {
    pub game: ExtendedSecurityGame,
    pub graph: BipartiteGraph,
    pub eta: f64,
    pub eps: f64,
    pub rho: f64,
    pub n: usize,
    pub r: usize,
}

/// Parameters: ε = 1/(2n⁸), η = 1 − (2n+1)ε, ρ = 2rnε, carrier game is the
/// network security game on the flattened bipartite graph.
pub fn bcbs_gadget(graph: &BipartiteGraph, r: usize) -> BcbsGadget {
    let n = graph.num_vertices();
    assert!(n >= 2, "gadget needs at least two vertices");
    let eps = 0.5 / (n as f64).powi(8);
    let eta = 1.0 - (2 * n + 1) as f64 * eps;
    let rho = 2.0 * (r * n) as f64 * eps;
    let game = network_security_game(&graph.to_graph(), rho);
    BcbsGadget {
        game,
        graph: graph.clone(),
        eta,
        eps,
        rho,
        n,
        r,
    }
}

/// Exact-rational check of the completeness identity `1 − ρ/r = η + ε`,
/// which float arithmetic cannot certify once ε = 1/(2n⁸) underflows the
/// gaps of interest. Returns the exact (ε, η, ρ) triple.
pub fn bcbs_identity_exact(n: u64, r: u64) -> (Rational, Rational, Rational, bool) {
    let one = Rational::from_integer(1.into());
    let eps = Rational::new(1.into(), (2 * n.pow(8)).into());
    let eta = &one - Rational::from_integer((2 * n + 1).into()) * &eps;
    let rho = Rational::from_integer((2 * r * n).into()) * &eps;
    let lhs = &one - &rho / Rational::from_integer(r.into());
    let rhs = &eta + &eps;
    let holds = lhs == rhs;
    (eps, eta, rho, holds)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BcbsExtraction {
    /// Vertices with μ_v ≥ 1/n³ (flattened indices).
    pub v_prime: Vec<usize>,
    /// Vertices with x_v ≥ 1/n³ (flattened indices).
    pub w_prime: Vec<usize>,
    /// All pairs across the two sets are adjacent.
    pub is_biclique: bool,
    /// Both sides reached size r.
    pub big_enough: bool,
}

/// Threshold extraction from a posterior/attacker pair. The caller is
/// responsible for the precondition val ≥ η − ε; the sets are returned
/// regardless, with the verdict flags doing the diagnosis.
pub fn bcbs_extract(gadget: &BcbsGadget, mu: &Posterior, x: &[f64]) -> BcbsExtraction {
    let n = gadget.n;
    let cutoff = 1.0 / (n as f64).powi(3);
    let v_prime: Vec<usize> = (0..n).filter(|&v| mu.0[v] >= cutoff).collect();
    let w_prime: Vec<usize> = (0..n).filter(|&v| x[v] >= cutoff).collect();
    let g = gadget.graph.to_graph();
    let mut is_biclique = true;
    for &a in &v_prime {
        for &b in &w_prime {
            if !g.has_edge(a, b) {
                is_biclique = false;
            }
        }
    }
    let big_enough = v_prime.len() >= gadget.r && w_prime.len() >= gadget.r;
    BcbsExtraction {
        v_prime,
        w_prime,
        is_biclique,
        big_enough,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signaling::{delta_net, DualCase, GridDualOracle, DualOracle};
    use crate::zerosum::val;

    fn uniform_on(indices: &[usize], n: usize) -> Vec<f64> {
        let mut p = vec![0.0; n];
        for &i in indices {
            p[i] = 1.0 / indices.len() as f64;
        }
        p
    }

    #[test]
    fn parameter_formulas_at_n4() {
        let g = BipartiteGraph::complete(2, 2);
        let gadget = bcbs_gadget(&g, 2);
        let eps = 1.0 / (2.0 * 4f64.powi(8));
        assert_eq!(gadget.eps, eps);
        assert_eq!(gadget.eta, 1.0 - 9.0 * eps);
        assert_eq!(gadget.rho, 2.0 * 2.0 * 4.0 * eps);
    }

    #[test]
    fn completeness_identity_is_exact_for_small_n() {
        for n in 2..=8u64 {
            for r in 1..=n / 2 + 1 {
                let (_, _, _, holds) = bcbs_identity_exact(n, r);
                assert!(holds, "identity fails at n={n} r={r}");
            }
        }
    }

    #[test]
    fn planted_biclique_beats_the_threshold() {
        // K_{2,2} with r = 2: the uniform posterior on one side and uniform
        // attack on the other achieve val ≥ 1 − ρ/r = η + ε.
        let g = BipartiteGraph::complete(2, 2);
        let gadget = bcbs_gadget(&g, 2);
        let mu = Posterior(uniform_on(&[0, 1], 4));
        let eq = gadget.game.val_compact(&mu).unwrap();
        assert!(
            eq.value >= 1.0 - gadget.rho / gadget.r as f64 - 1e-12,
            "value {} threshold {}",
            eq.value,
            1.0 - gadget.rho / gadget.r as f64
        );
        assert!(eq.value >= gadget.eta - gadget.eps);
    }

    #[test]
    fn threshold_oracle_finds_a_witness_on_k22() {
        let g = BipartiteGraph::complete(2, 2);
        let gadget = bcbs_gadget(&g, 2);
        let dense = gadget.game.expand().unwrap();
        let w = vec![gadget.eta; 4];
        // A quarter-resolution grid contains the uniform-side posterior.
        let oracle = GridDualOracle::for_game(&dense, 0.25).unwrap();
        let ans = oracle.query(&w, gadget.eps).unwrap();
        assert_eq!(ans.case, DualCase::Witness);
        let mu = ans.witness.unwrap();
        let v = val(&dense, &mu).unwrap();
        assert!(v >= gadget.eta - gadget.eps);
    }

    #[test]
    fn no_biclique_means_no_witness_on_fine_grid() {
        // K_{1,3} has no K_{2,2}; exhaustive δ = 1/8 search over Δ₄ finds no
        // posterior with val ≥ η − ε.
        let g = BipartiteGraph::new(1, 3, vec![(0, 0), (0, 1), (0, 2)]).unwrap();
        let gadget = bcbs_gadget(&g, 2);
        let net = delta_net(4, 1.0 / 8.0).unwrap();
        for p in &net.points {
            let v = gadget.game.val_compact(p).unwrap().value;
            assert!(
                v < gadget.eta - gadget.eps,
                "unexpected witness {:?} with value {}",
                p,
                v
            );
        }
    }

    #[test]
    fn extraction_recovers_the_planted_sides() {
        let g = BipartiteGraph::complete(2, 2);
        let gadget = bcbs_gadget(&g, 2);
        let mu = Posterior(uniform_on(&[0, 1], 4));
        let x = uniform_on(&[2, 3], 4);
        let out = bcbs_extract(&gadget, &mu, &x);
        assert_eq!(out.v_prime, vec![0, 1]);
        assert_eq!(out.w_prime, vec![2, 3]);
        assert!(out.is_biclique && out.big_enough);

        // Perturbing by ±1/n⁴ leaves the 1/n³ thresholds untouched.
        let d = 1.0 / 4f64.powi(4);
        let mu2 = Posterior(vec![0.5 + d, 0.5 - d, 0.0, 0.0]);
        let x2 = vec![0.0, 0.0, 0.5 - d, 0.5 + d];
        let out = bcbs_extract(&gadget, &mu2, &x2);
        assert_eq!(out.v_prime, vec![0, 1]);
        assert_eq!(out.w_prime, vec![2, 3]);
        assert!(out.is_biclique && out.big_enough);
    }

    #[test]
    fn extraction_flags_missing_edges() {
        // Path a₀−b₀, a₁−b₀ only: {a₀,a₁}×{b₀,b₁} is not a biclique.
        let g = BipartiteGraph::new(2, 2, vec![(0, 0), (1, 0)]).unwrap();
        let gadget = bcbs_gadget(&g, 2);
        let mu = Posterior(uniform_on(&[0, 1], 4));
        let x = uniform_on(&[2, 3], 4);
        let out = bcbs_extract(&gadget, &mu, &x);
        assert!(!out.is_biclique);
    }
}
