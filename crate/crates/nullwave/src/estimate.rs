//! Balance bookkeeping for the marched reductions.
//!
//! Every run integrates the flux form of the system over its hyper-prism:
//! the weighted final-surface norm must equal the initial-surface flux,
//! plus the prescribed (incoming) part of the data-boundary flux, minus
//! the outgoing part, plus the interior divergence term. The associated
//! a-priori estimate bounds the final norm by growth * (initial flux +
//! twice the incoming boundary flux); its margin is the estimate slack.

#[derive(Clone, Copy, Debug)]
pub struct BalanceTally {
    /// Weighted norm of the marched fields on the final surface.
    pub norm_final: f64,
    /// Flux through the initial characteristic surface (data).
    pub flux_initial: f64,
    /// Prescribed part of the data-boundary flux (data).
    pub flux_bound_in: f64,
    /// Outgoing part of the data-boundary flux (marched values).
    pub flux_bound_out: f64,
    /// Interior divergence contribution; zero for flat reductions.
    pub volume: f64,
    /// Growth factor allowed by the lower-order couplings (1 when none).
    pub growth: f64,
}

impl BalanceTally {
    /// Defect of the balance identity; converges at the scheme order.
    pub fn residual(&self) -> f64 {
        self.norm_final
            - (self.flux_initial + self.flux_bound_in - self.flux_bound_out + self.volume)
    }

    /// Right side of the energy estimate.
    pub fn estimate_rhs(&self) -> f64 {
        self.growth * (self.flux_initial + 2.0 * self.flux_bound_in)
    }

    /// Estimate slack; non-negative up to discretization error.
    pub fn margin(&self) -> f64 {
        self.estimate_rhs() - self.norm_final
    }

    /// Margin predicted by the balance identity itself.
    pub fn margin_expected(&self) -> f64 {
        (self.growth - 1.0) * (self.flux_initial + 2.0 * self.flux_bound_in)
            + self.flux_bound_in
            + self.flux_bound_out
            - self.volume
    }
}

/// Largest pointwise defect of diagonal-surface fields against a
/// reference evaluated at (u, c0, c1, c2) with u = t_final - (c0 - c0_min).
pub fn diagonal_error(
    grid: &crate::grid::GridSpec,
    diagonal: &[ndarray::Array3<f64>],
    exact: impl Fn(f64, f64, f64, f64) -> Vec<f64>,
) -> f64 {
    let c0 = grid.axis(0).coords();
    let c1 = grid.axis(1).coords();
    let c2 = grid.axis(2).coords();
    let origin = c0[0];
    let mut err: f64 = 0.0;
    for (j, &z) in c0.iter().enumerate() {
        let u = grid.t_final - (z - origin);
        for (a, &x) in c1.iter().enumerate() {
            for (b, &y) in c2.iter().enumerate() {
                let ex = exact(u, z, x, y);
                for (k, d) in diagonal.iter().enumerate() {
                    err = err.max((d[[j, a, b]] - ex[k]).abs());
                }
            }
        }
    }
    err
}

/// Error ratios between successive refinement levels.
pub fn convergence_ratios(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| w[0] / w[1]).collect()
}

/// Observed order from the finest pair of levels.
pub fn observed_order(errors: &[f64]) -> f64 {
    assert!(errors.len() >= 2);
    let n = errors.len();
    (errors[n - 2] / errors[n - 1]).log2()
}
