//! Periodic-box evolution of the first-order wave system.
//!
//! v = (U, P, Q, R) marches in t through
//!
//!   U_t = P_x + Q_y + R_z
//!   P_t = U_x,   Q_t = U_y,   R_t = U_z
//!
//! with the scalar psi carried alongside via psi_t = U. Every spatial
//! axis is periodic, so all semi-discrete operators commute: the volume
//! integral of U^2+P^2+Q^2+R^2 is conserved up to the step rule's own
//! defect and the dissipation sink, and the constraints P - psi_x,
//! Q - psi_y, R - psi_z obey a pure heat-like decay once seeded.

use crate::error::{NullwaveError, Result};
use crate::field::{rk_step, State};
use crate::grid::{Geometry, GridSpec};
use crate::ops::{deriv, dissipation, quadrature_slice};
use ndarray::Array3;

/// Initial data provider: the scalar and the four evolved fields at t=0.
pub trait CauchySource {
    fn psi0(&self, x: f64, y: f64, z: f64) -> f64;
    /// (U, P, Q, R) at t=0; P,Q,R must be the gradient of psi0 up to the
    /// scheme's own accuracy for the constraint checks to mean anything.
    fn fields0(&self, x: f64, y: f64, z: f64) -> [f64; 4];
}

impl CauchySource for crate::oracle::CauchyWave {
    fn psi0(&self, x: f64, y: f64, z: f64) -> f64 {
        self.psi(0.0, x, y, z)
    }
    fn fields0(&self, x: f64, y: f64, z: f64) -> [f64; 4] {
        self.fields(0.0, x, y, z)
    }
}

impl CauchySource for crate::datagen::ZeroData {
    fn psi0(&self, _x: f64, _y: f64, _z: f64) -> f64 {
        0.0
    }
    fn fields0(&self, _x: f64, _y: f64, _z: f64) -> [f64; 4] {
        [0.0; 4]
    }
}

impl CauchySource for crate::datagen::RandomCauchyData {
    fn psi0(&self, x: f64, y: f64, z: f64) -> f64 {
        self.psi0(x, y, z)
    }
    fn fields0(&self, x: f64, y: f64, z: f64) -> [f64; 4] {
        self.fields0(x, y, z)
    }
}

#[derive(Debug, Clone)]
pub struct CauchyState {
    pub u: Array3<f64>,
    pub p: Array3<f64>,
    pub q: Array3<f64>,
    pub r: Array3<f64>,
    pub psi: Option<Array3<f64>>,
}

fn ensure_cauchy(grid: &GridSpec) -> Result<()> {
    match grid.geometry {
        Geometry::Cauchy { .. } => Ok(()),
        _ => Err(NullwaveError::Grid(
            "this solver needs the periodic-box geometry".into(),
        )),
    }
}

impl CauchyState {
    pub fn init(grid: &GridSpec, src: &dyn CauchySource) -> Result<CauchyState> {
        ensure_cauchy(grid)?;
        let mut fields: Vec<Array3<f64>> = (0..4).map(|_| grid.zero_slice()).collect();
        let mut psi = grid.zero_slice();
        let c0 = grid.axis(0).coords();
        let c1 = grid.axis(1).coords();
        let c2 = grid.axis(2).coords();
        for (i, &x) in c0.iter().enumerate() {
            for (j, &y) in c1.iter().enumerate() {
                for (k, &z) in c2.iter().enumerate() {
                    let v = src.fields0(x, y, z);
                    for (f, &vk) in fields.iter_mut().zip(v.iter()) {
                        f[[i, j, k]] = vk;
                    }
                    psi[[i, j, k]] = src.psi0(x, y, z);
                }
            }
        }
        let r = fields.pop().unwrap();
        let q = fields.pop().unwrap();
        let p = fields.pop().unwrap();
        let u = fields.pop().unwrap();
        Ok(CauchyState { u, p, q, r, psi: Some(psi) })
    }

    fn to_state(&self) -> State {
        let mut v = vec![self.u.clone(), self.p.clone(), self.q.clone(), self.r.clone()];
        if let Some(psi) = &self.psi {
            v.push(psi.clone());
        }
        v
    }

    fn from_state(mut v: State) -> CauchyState {
        let psi = if v.len() == 5 { v.pop() } else { None };
        let r = v.pop().unwrap();
        let q = v.pop().unwrap();
        let p = v.pop().unwrap();
        let u = v.pop().unwrap();
        CauchyState { u, p, q, r, psi }
    }
}

/// Principal-part time derivative, no dissipation.
pub fn cauchy_rhs(grid: &GridSpec, state: &CauchyState) -> Result<CauchyState> {
    ensure_cauchy(grid)?;
    let mut u_t = deriv(&state.p, 0, grid);
    u_t += &deriv(&state.q, 1, grid);
    u_t += &deriv(&state.r, 2, grid);
    Ok(CauchyState {
        u: u_t,
        p: deriv(&state.u, 0, grid),
        q: deriv(&state.u, 1, grid),
        r: deriv(&state.u, 2, grid),
        psi: state.psi.as_ref().map(|_| state.u.clone()),
    })
}

fn march_rhs(grid: &GridSpec, v: &State) -> State {
    let mut u_t = deriv(&v[1], 0, grid);
    u_t += &deriv(&v[2], 1, grid);
    u_t += &deriv(&v[3], 2, grid);
    u_t += &dissipation(&v[0], grid);
    let mut out = vec![u_t];
    for axis in 0..3 {
        let mut k = deriv(&v[0], axis, grid);
        k += &dissipation(&v[axis + 1], grid);
        out.push(k);
    }
    if v.len() == 5 {
        let mut k = v[0].clone();
        k += &dissipation(&v[4], grid);
        out.push(k);
    }
    out
}

/// One explicit step of grid.du(). The dissipation operator is applied
/// to every field, psi included, so the discrete constraints keep
/// commuting with the step.
pub fn cauchy_step(grid: &GridSpec, state: &CauchyState) -> Result<CauchyState> {
    ensure_cauchy(grid)?;
    let v = state.to_state();
    let next = rk_step(&v, grid.du(), grid.order, |y, _| march_rhs(grid, y));
    Ok(CauchyState::from_state(next))
}

/// L2 norms of (P - psi_x, Q - psi_y, R - psi_z).
pub fn constraint_residual(grid: &GridSpec, state: &CauchyState) -> Result<[f64; 3]> {
    ensure_cauchy(grid)?;
    let psi = state.psi.as_ref().ok_or_else(|| {
        NullwaveError::CheckFailed("constraint residual needs the evolved scalar".into())
    })?;
    let mut out = [0.0; 3];
    for (axis, field) in [(0, &state.p), (1, &state.q), (2, &state.r)] {
        let mut c = field.clone();
        c -= &deriv(psi, axis, grid);
        out[axis] = quadrature_slice(&c.mapv(|v| v * v), grid).sqrt();
    }
    Ok(out)
}

/// Volume integral of U^2 + P^2 + Q^2 + R^2 (psi excluded).
pub fn cauchy_norm(grid: &GridSpec, state: &CauchyState) -> f64 {
    let mut sq = &state.u * &state.u;
    sq += &(&state.p * &state.p);
    sq += &(&state.q * &state.q);
    sq += &(&state.r * &state.r);
    quadrature_slice(&sq, grid)
}

#[derive(Debug)]
pub struct CauchyRun {
    /// cauchy_norm at every whole step, n_march + 1 entries
    pub norm_series: Vec<f64>,
    /// |norm(T) - norm(0)| / norm(0)
    pub drift_final: f64,
    /// max over the series of the relative departure from norm(0)
    pub drift_max: f64,
    pub constraints_initial: [f64; 3],
    pub constraints_final: [f64; 3],
    /// max |psi(T) - psi(0) - time-quadrature of U|
    pub psi_defect: f64,
    pub state: CauchyState,
}

/// March from t=0 to t=T recording the norm series, the constraint
/// residuals at both ends and the defect of rebuilding psi(T) from the
/// time quadrature of U.
pub fn run_cauchy(grid: &GridSpec, src: &dyn CauchySource) -> Result<CauchyRun> {
    let mut state = CauchyState::init(grid, src)?;
    let constraints_initial = constraint_residual(grid, &state)?;
    let psi0 = state.psi.clone().expect("init always carries psi");

    let norm0 = cauchy_norm(grid, &state);
    let mut norm_series = Vec::with_capacity(grid.n_march + 1);
    norm_series.push(norm0);

    // running plain sum of U over stations; Gregory end corrections are
    // applied from the retained first and last three slices
    let mut u_sum = state.u.clone();
    let mut head: Vec<Array3<f64>> = vec![state.u.clone()];
    let mut tail: std::collections::VecDeque<Array3<f64>> = [state.u.clone()].into();

    for step in 0..grid.n_march {
        state = cauchy_step(grid, &state)?;
        for f in [&state.u, &state.p, &state.q, &state.r] {
            if !f.iter().all(|v| v.is_finite()) {
                return Err(NullwaveError::NonFinite { context: "periodic march".into(), step });
            }
        }
        norm_series.push(cauchy_norm(grid, &state));
        u_sum += &state.u;
        if head.len() < 3 {
            head.push(state.u.clone());
        }
        tail.push_back(state.u.clone());
        if tail.len() > 3 {
            tail.pop_front();
        }
    }

    let mut rebuilt = psi0;
    if grid.order == 2 {
        u_sum.scaled_add(-0.5, &head[0]);
        u_sum.scaled_add(-0.5, &tail[tail.len() - 1]);
    } else {
        let edge = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
        for (i, w) in edge.iter().enumerate() {
            u_sum.scaled_add(w - 1.0, &head[i]);
            u_sum.scaled_add(w - 1.0, &tail[tail.len() - 1 - i]);
        }
    }
    rebuilt.scaled_add(grid.du(), &u_sum);

    let psi_defect = state
        .psi
        .as_ref()
        .expect("psi evolved through the whole run")
        .iter()
        .zip(rebuilt.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);

    let constraints_final = constraint_residual(grid, &state)?;
    // relative drifts; identically-zero data reads as zero drift
    let scale = if norm0 > 0.0 { norm0 } else { 1.0 };
    let drift_final = (norm_series[grid.n_march] - norm0).abs() / scale;
    let drift_max = norm_series
        .iter()
        .map(|n| (n - norm0).abs() / scale)
        .fold(0.0_f64, f64::max);

    Ok(CauchyRun {
        norm_series,
        drift_final,
        drift_max,
        constraints_initial,
        constraints_final,
        psi_defect,
        state,
    })
}

/// Defect between differentiating the evolved solution along one axis
/// and evolving the differentiated data. Both runs share every discrete
/// operator, so the result probes pure operator commutation and sits at
/// rounding level.
pub fn derivative_commutation(grid: &GridSpec, src: &dyn CauchySource, axis: usize) -> Result<f64> {
    let mut main = CauchyState::init(grid, src)?;
    let mut diff = CauchyState {
        u: deriv(&main.u, axis, grid),
        p: deriv(&main.p, axis, grid),
        q: deriv(&main.q, axis, grid),
        r: deriv(&main.r, axis, grid),
        psi: None,
    };
    for _ in 0..grid.n_march {
        main = cauchy_step(grid, &main)?;
        diff = cauchy_step(grid, &diff)?;
    }
    let mut worst = 0.0_f64;
    for (evolved, differentiated) in [
        (&diff.u, deriv(&main.u, axis, grid)),
        (&diff.p, deriv(&main.p, axis, grid)),
        (&diff.q, deriv(&main.q, axis, grid)),
        (&diff.r, deriv(&main.r, axis, grid)),
    ] {
        worst = evolved
            .iter()
            .zip(differentiated.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(worst, f64::max);
    }
    Ok(worst)
}
