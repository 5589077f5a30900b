//! Central-cut ellipsoid method for feasibility, driven by a separation
//! oracle. Used where the constraint set is only accessible through an
//! oracle (one inequality per posterior on an exponentially large net).

use thiserror::Error;

/// A halfspace `normal · x ≤ offset` that is valid for the feasible set but
/// violated (or tight) at the queried point.
#[derive(Debug, Clone)]
pub struct Cut {
    pub normal: Vec<f64>,
    pub offset: f64,
}

pub enum SeparationAnswer {
    Inside,
    Cut(Cut),
}

#[derive(Debug, Clone)]
pub struct EllipsoidOutcome {
    /// A feasible point if one was found; `None` certifies (up to the volume
    /// tolerance) that the feasible set misses the starting ball.
    pub point: Option<Vec<f64>>,
    /// Every cut the oracle returned, in query order.
    pub cuts: Vec<Cut>,
    pub iterations: usize,
}

#[derive(Debug, Error)]
pub enum EllipsoidError {
    #[error("separation oracle returned a cut not violated at the query point (slack {slack:.3e})")]
    ContractViolation { slack: f64 },
    #[error("cut normal has wrong dimension: got {got}, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("ellipsoid degenerated (gᵀEg = {0:.3e})")]
    Degenerate(f64),
}

/// Shrink an ellipsoid around `center` with radius `radius` until the oracle
/// reports a feasible point or the enclosed ball radius drops below
/// `volume_tol`.
pub fn ellipsoid_feasibility<F>(
    dim: usize,
    center: &[f64],
    radius: f64,
    volume_tol: f64,
    mut oracle: F,
) -> Result<EllipsoidOutcome, EllipsoidError>
where
    F: FnMut(&[f64]) -> SeparationAnswer,
{
    assert!(dim > 0 && center.len() == dim);
    assert!(radius > 0.0 && volume_tol > 0.0 && volume_tol < radius);

    let mut cuts = Vec::new();

    if dim == 1 {
        // One dimension: cuts are interval endpoints, so bisect directly.
        let mut lo = center[0] - radius;
        let mut hi = center[0] + radius;
        let mut iterations = 0usize;
        while hi - lo >= volume_tol {
            iterations += 1;
            let x = 0.5 * (lo + hi);
            match oracle(&[x]) {
                SeparationAnswer::Inside => {
                    return Ok(EllipsoidOutcome {
                        point: Some(vec![x]),
                        cuts,
                        iterations,
                    });
                }
                SeparationAnswer::Cut(cut) => {
                    if cut.normal.len() != 1 {
                        return Err(EllipsoidError::Dimension {
                            got: cut.normal.len(),
                            expected: 1,
                        });
                    }
                    let g = cut.normal[0];
                    let slack = cut.offset - g * x;
                    if slack > 1e-9 * (1.0 + g.abs() * x.abs()) {
                        return Err(EllipsoidError::ContractViolation { slack });
                    }
                    if g > 0.0 {
                        hi = hi.min(cut.offset / g);
                    } else if g < 0.0 {
                        lo = lo.max(cut.offset / g);
                    } else {
                        // Zero normal with offset < 0 excludes everything.
                        hi = lo;
                    }
                    cuts.push(cut);
                }
            }
        }
        return Ok(EllipsoidOutcome {
            point: None,
            cuts,
            iterations,
        });
    }

    let d = dim as f64;
    let max_iters =
        (2.0 * d * (d + 1.0) * (radius / volume_tol).ln()).ceil() as usize + dim;

    let mut x: Vec<f64> = center.to_vec();
    // Shape matrix E of the ellipsoid {y : (y−x)ᵀ E⁻¹ (y−x) ≤ 1}.
    let mut e = vec![vec![0.0f64; dim]; dim];
    for (i, row) in e.iter_mut().enumerate() {
        row[i] = radius * radius;
    }

    for it in 0..max_iters {
        match oracle(&x) {
            SeparationAnswer::Inside => {
                return Ok(EllipsoidOutcome {
                    point: Some(x),
                    cuts,
                    iterations: it + 1,
                });
            }
            SeparationAnswer::Cut(cut) => {
                if cut.normal.len() != dim {
                    return Err(EllipsoidError::Dimension {
                        got: cut.normal.len(),
                        expected: dim,
                    });
                }
                let g = &cut.normal;
                let gx: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
                let gscale: f64 = g.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
                let slack = cut.offset - gx;
                if slack > 1e-9 * gscale * (1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max))
                {
                    return Err(EllipsoidError::ContractViolation { slack });
                }

                // eg = E g, gamma = gᵀ E g.
                let eg: Vec<f64> = e
                    .iter()
                    .map(|row| row.iter().zip(g).map(|(a, b)| a * b).sum())
                    .collect();
                let gamma: f64 = g.iter().zip(&eg).map(|(a, b)| a * b).sum();
                if !gamma.is_finite() {
                    return Err(EllipsoidError::Degenerate(gamma));
                }
                // Repeated rank-one updates eventually lose positive
                // definiteness to rounding; by then the ellipsoid extent
                // along g is numerically zero, which is a convergence
                // signal, not an error.
                let g_norm2: f64 = g.iter().map(|v| v * v).sum();
                let e_scale: f64 = (0..dim).map(|i| e[i][i].abs()).fold(0.0, f64::max);
                if gamma <= 1e-13 * g_norm2 * e_scale.max(volume_tol * volume_tol) {
                    cuts.push(cut);
                    return Ok(EllipsoidOutcome {
                        point: None,
                        cuts,
                        iterations: it + 1,
                    });
                }
                let sqrt_gamma = gamma.sqrt();

                for i in 0..dim {
                    x[i] -= eg[i] / ((d + 1.0) * sqrt_gamma);
                }
                let scale = d * d / (d * d - 1.0);
                let coef = 2.0 / (d + 1.0) / gamma;
                for i in 0..dim {
                    for j in 0..dim {
                        e[i][j] = scale * (e[i][j] - coef * eg[i] * eg[j]);
                    }
                }
                // Keep E symmetric against fp drift.
                for i in 0..dim {
                    for j in 0..i {
                        let avg = 0.5 * (e[i][j] + e[j][i]);
                        e[i][j] = avg;
                        e[j][i] = avg;
                    }
                }
                cuts.push(cut);
            }
        }
    }

    Ok(EllipsoidOutcome {
        point: None,
        cuts,
        iterations: max_iters,
    })
}
