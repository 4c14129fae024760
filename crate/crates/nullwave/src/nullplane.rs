//! Marching on null-plane slices.
//!
//! Coordinates (u = t - z; z, x, y), slice axes (z, x, y). The scalar
//! reduction marches R = psi_z and rebuilds P = psi_x, Q = psi_y on each
//! slice from the z = 0 boundary values:
//!
//!   2 R_u = P_x + Q_y + R_z,   P_z = R_x,   Q_z = R_y.
//!
//! The first-derivative reduction marches (w1, w2, w3) = (R_x, R_y, R_z)
//! and rebuilds (w4, ..., w7) = (P_x, Q_x, P_y, Q_y):
//!
//!   2 w1_u = (w3 + w4)_x + w5_y      w4_z = w1_x     w5_z = w1_y
//!   2 w2_u = w3_y + w6_x + w7_y      w6_z = w2_x     w7_z = w2_y
//!   2 w3_u = w3_z + w1_x + w2_y
//!
//! The z-transport rows pair off-diagonal entries symmetrically
//! (w5 from w1_y, not the equivalent w2_x), which is what makes the
//! quadratic flux an exact divergence even for incompatible data.
//!
//! R (and w3) has an incoming direction at the far edge z = z_top, so the
//! strip marches with the far-edge row injected from data. Runs extract
//! fields on the diagonal z = t_final - u, which the injected edge cannot
//! influence: its domain of influence recedes at half the diagonal's
//! closing speed. Balance integrals live on the triangular prism below
//! the diagonal.
//!
//! The final surface carries weight A^u + A^z, the identity for the
//! scalar reduction and diag(2,2,1,1,1,1,1) for the derivative one.

use crate::error::{NullwaveError, Result};
use crate::estimate::BalanceTally;
use crate::field::{check_finite, rk_step, DiagonalRecord, State};
use crate::grid::{Geometry, GridSpec};
use crate::ops::{cumint, deriv, dissipation, quadrature_plane, quadrature_slice, quadrature_volume};
use crate::oracle::PlaneWave;
use ndarray::{Array2, Array3, Axis as NdAxis};

/// Data for a scalar null-plane run.
pub trait PlaneSource {
    /// R on the initial slice u = 0.
    fn initial(&self, z: f64, x: f64, y: f64) -> f64;
    /// (P, Q) on the boundary z = 0.
    fn boundary(&self, u: f64, x: f64, y: f64) -> [f64; 2];
    /// R on the far edge z = z_top (exact for references, frozen for
    /// random data).
    fn far_edge(&self, u: f64, ztop: f64, x: f64, y: f64) -> f64;
}

/// Data for a derivative-set null-plane run.
pub trait PlaneWSource {
    /// (w1, w2, w3) on the initial slice.
    fn initial(&self, z: f64, x: f64, y: f64) -> [f64; 3];
    /// (w4, w5, w6, w7) on the boundary z = 0.
    fn boundary(&self, u: f64, x: f64, y: f64) -> [f64; 4];
    /// w3 on the far edge.
    fn far_edge(&self, u: f64, ztop: f64, x: f64, y: f64) -> f64;
}

impl PlaneSource for PlaneWave {
    fn initial(&self, z: f64, x: f64, y: f64) -> f64 {
        self.fields(0.0, z, x, y)[0]
    }
    fn boundary(&self, u: f64, x: f64, y: f64) -> [f64; 2] {
        let f = self.fields(u, 0.0, x, y);
        [f[1], f[2]]
    }
    fn far_edge(&self, u: f64, ztop: f64, x: f64, y: f64) -> f64 {
        self.fields(u, ztop, x, y)[0]
    }
}

impl PlaneWSource for PlaneWave {
    fn initial(&self, z: f64, x: f64, y: f64) -> [f64; 3] {
        let w = self.wfields(0.0, z, x, y);
        [w[0], w[1], w[2]]
    }
    fn boundary(&self, u: f64, x: f64, y: f64) -> [f64; 4] {
        let w = self.wfields(u, 0.0, x, y);
        [w[3], w[4], w[5], w[6]]
    }
    fn far_edge(&self, u: f64, ztop: f64, x: f64, y: f64) -> f64 {
        self.wfields(u, ztop, x, y)[2]
    }
}

impl PlaneSource for crate::datagen::ZeroData {
    fn initial(&self, _z: f64, _x: f64, _y: f64) -> f64 {
        0.0
    }
    fn boundary(&self, _u: f64, _x: f64, _y: f64) -> [f64; 2] {
        [0.0; 2]
    }
    fn far_edge(&self, _u: f64, _ztop: f64, _x: f64, _y: f64) -> f64 {
        0.0
    }
}

impl PlaneWSource for crate::datagen::ZeroData {
    fn initial(&self, _z: f64, _x: f64, _y: f64) -> [f64; 3] {
        [0.0; 3]
    }
    fn boundary(&self, _u: f64, _x: f64, _y: f64) -> [f64; 4] {
        [0.0; 4]
    }
    fn far_edge(&self, _u: f64, _ztop: f64, _x: f64, _y: f64) -> f64 {
        0.0
    }
}

impl PlaneSource for crate::datagen::RandomPlaneData {
    fn initial(&self, z: f64, x: f64, y: f64) -> f64 {
        self.initial_value(z, x, y)
    }
    fn boundary(&self, u: f64, x: f64, y: f64) -> [f64; 2] {
        [self.boundary_value(0, u, x, y), self.boundary_value(1, u, x, y)]
    }
    fn far_edge(&self, _u: f64, ztop: f64, x: f64, y: f64) -> f64 {
        self.initial_value(ztop, x, y)
    }
}

impl PlaneWSource for crate::datagen::RandomPlaneWData {
    fn initial(&self, z: f64, x: f64, y: f64) -> [f64; 3] {
        [
            self.initial_value(0, z, x, y),
            self.initial_value(1, z, x, y),
            self.initial_value(2, z, x, y),
        ]
    }
    fn boundary(&self, u: f64, x: f64, y: f64) -> [f64; 4] {
        std::array::from_fn(|k| self.boundary_value(k, u, x, y))
    }
    fn far_edge(&self, _u: f64, ztop: f64, x: f64, y: f64) -> f64 {
        self.initial_value(2, ztop, x, y)
    }
}

pub struct PlaneRun {
    pub tally: BalanceTally,
    /// (R, P, Q) on the final surface, indexed by the z node.
    pub diagonal: Vec<Array3<f64>>,
}

pub struct PlaneWRun {
    pub tally: BalanceTally,
    /// (w1, ..., w7) on the final surface.
    pub diagonal: Vec<Array3<f64>>,
}

fn ensure_plane(grid: &GridSpec) -> Result<()> {
    match grid.geometry {
        Geometry::Plane { .. } => Ok(()),
        _ => Err(NullwaveError::Grid(
            "null-plane run requires plane-slab geometry".into(),
        )),
    }
}

fn plane_square_integral(grid: &GridSpec, planes: &[&Array2<f64>]) -> f64 {
    let mut sq = Array2::zeros(planes[0].raw_dim());
    for p in planes {
        sq.zip_mut_with(*p, |acc, &v| *acc += v * v);
    }
    quadrature_plane(&sq.view(), grid)
}

/// Rebuild a slice field from its z rate and boundary plane.
fn lift_from_boundary(
    grid: &GridSpec,
    rate: &Array3<f64>,
    boundary: &Array2<f64>,
) -> Array3<f64> {
    let mut f = cumint(rate, 0, grid.axis(0).spacing(), grid.order);
    for mut plane in f.axis_iter_mut(NdAxis(0)) {
        plane += boundary;
    }
    f
}

pub fn run_scalar(grid: &GridSpec, src: &dyn PlaneSource) -> Result<PlaneRun> {
    run_scalar_observed(grid, src, |_, _, _, _| {})
}

/// Scalar run with an observer called after every whole step with the
/// current slice fields (R, P, Q).
pub fn run_scalar_observed(
    grid: &GridSpec,
    src: &dyn PlaneSource,
    mut observe: impl FnMut(usize, &Array3<f64>, &Array3<f64>, &Array3<f64>),
) -> Result<PlaneRun> {
    ensure_plane(grid)?;
    let [nz, _, _] = grid.slice_shape();
    let du = grid.du();
    let ztop = grid.t_final;

    let pb = grid.half_station_planes(|u, x, y| src.boundary(u, x, y)[0]);
    let qb = grid.half_station_planes(|u, x, y| src.boundary(u, x, y)[1]);
    let far = grid.half_station_planes(|u, x, y| src.far_edge(u, ztop, x, y));

    let r0 = grid.fill_slice(|z, x, y| src.initial(z, x, y));
    let flux_initial = 2.0 * quadrature_slice(&r0.mapv(|v| v * v), grid);

    let reconstruct = |r: &Array3<f64>, idx: usize| -> (Array3<f64>, Array3<f64>) {
        let rx = deriv(r, 1, grid);
        let ry = deriv(r, 2, grid);
        (
            lift_from_boundary(grid, &rx, &pb[idx]),
            lift_from_boundary(grid, &ry, &qb[idx]),
        )
    };
    let inject = |r: &mut Array3<f64>, idx: usize| {
        r.index_axis_mut(NdAxis(0), nz - 1).assign(&far[idx]);
    };

    let mut rec = DiagonalRecord::new(grid.axis(0).cells, grid.station_stride(), 3);
    let mut series_in = Vec::with_capacity(grid.n_march + 1);
    let mut series_out = Vec::with_capacity(grid.n_march + 1);

    let mut bookkeep = |step: usize, r: &Array3<f64>, rec: &mut DiagonalRecord| {
        let idx = 2 * step;
        series_in.push(plane_square_integral(grid, &[&pb[idx], &qb[idx]]));
        let edge = r.index_axis(NdAxis(0), 0).to_owned();
        series_out.push(plane_square_integral(grid, &[&edge]));
        let (p, q) = reconstruct(r, idx);
        rec.capture(step, &[r, &p, &q]);
        observe(step, r, &p, &q);
    };

    bookkeep(0, &r0, &mut rec);
    let mut state: State = vec![r0];
    for n in 0..grid.n_march {
        let base = 2 * n;
        state = rk_step(&state, du, grid.order, |s, off| {
            let idx = base + off;
            let mut r = s[0].clone();
            inject(&mut r, idx);
            let (p, q) = reconstruct(&r, idx);
            let mut k = deriv(&p, 1, grid);
            k += &deriv(&q, 2, grid);
            k += &deriv(&r, 0, grid);
            k *= 0.5;
            k += &dissipation(&r, grid);
            vec![k]
        });
        inject(&mut state[0], base + 2);
        check_finite(&state, "null-plane scalar march", n + 1)?;
        bookkeep(n + 1, &state[0], &mut rec);
    }

    let rd = rec.assemble(0)?;
    let pd = rec.assemble(1)?;
    let qd = rec.assemble(2)?;
    let mut norm = rd.mapv(|v| v * v);
    norm.zip_mut_with(&pd, |a, &v| *a += v * v);
    norm.zip_mut_with(&qd, |a, &v| *a += v * v);

    let tally = BalanceTally {
        norm_final: quadrature_slice(&norm, grid),
        flux_initial,
        flux_bound_in: quadrature_volume(&series_in, du, grid.order),
        flux_bound_out: quadrature_volume(&series_out, du, grid.order),
        volume: 0.0,
        growth: 1.0,
    };
    Ok(PlaneRun { tally, diagonal: vec![rd, pd, qd] })
}

pub fn run_derivative(grid: &GridSpec, src: &dyn PlaneWSource) -> Result<PlaneWRun> {
    run_derivative_observed(grid, src, |_, _| {})
}

/// Derivative-set run with an observer called on every diagonal station
/// with the current step and the seven slice fields.
pub fn run_derivative_observed(
    grid: &GridSpec,
    src: &dyn PlaneWSource,
    mut observe: impl FnMut(usize, &[&Array3<f64>; 7]),
) -> Result<PlaneWRun> {
    ensure_plane(grid)?;
    let [nz, _, _] = grid.slice_shape();
    let du = grid.du();
    let ztop = grid.t_final;

    let wb: Vec<Vec<Array2<f64>>> = (0..4)
        .map(|k| grid.half_station_planes(|u, x, y| src.boundary(u, x, y)[k]))
        .collect();
    let far = grid.half_station_planes(|u, x, y| src.far_edge(u, ztop, x, y));

    let w10 = grid.fill_slice(|z, x, y| src.initial(z, x, y)[0]);
    let w20 = grid.fill_slice(|z, x, y| src.initial(z, x, y)[1]);
    let w30 = grid.fill_slice(|z, x, y| src.initial(z, x, y)[2]);
    let mut init_sq = w10.mapv(|v| v * v);
    init_sq.zip_mut_with(&w20, |a, &v| *a += v * v);
    init_sq.zip_mut_with(&w30, |a, &v| *a += v * v);
    let flux_initial = 2.0 * quadrature_slice(&init_sq, grid);

    let reconstruct = |w1: &Array3<f64>, w2: &Array3<f64>, idx: usize| -> [Array3<f64>; 4] {
        [
            lift_from_boundary(grid, &deriv(w1, 1, grid), &wb[0][idx]),
            lift_from_boundary(grid, &deriv(w1, 2, grid), &wb[1][idx]),
            lift_from_boundary(grid, &deriv(w2, 1, grid), &wb[2][idx]),
            lift_from_boundary(grid, &deriv(w2, 2, grid), &wb[3][idx]),
        ]
    };
    let inject = |w3: &mut Array3<f64>, idx: usize| {
        w3.index_axis_mut(NdAxis(0), nz - 1).assign(&far[idx]);
    };

    let mut rec = DiagonalRecord::new(grid.axis(0).cells, grid.station_stride(), 7);
    let mut series_in = Vec::with_capacity(grid.n_march + 1);
    let mut series_out = Vec::with_capacity(grid.n_march + 1);

    let mut bookkeep = |step: usize,
                        w1: &Array3<f64>,
                        w2: &Array3<f64>,
                        w3: &Array3<f64>,
                        rec: &mut DiagonalRecord| {
        let idx = 2 * step;
        series_in.push(plane_square_integral(
            grid,
            &[&wb[0][idx], &wb[1][idx], &wb[2][idx], &wb[3][idx]],
        ));
        let edge = w3.index_axis(NdAxis(0), 0).to_owned();
        series_out.push(plane_square_integral(grid, &[&edge]));
        let [w4, w5, w6, w7] = reconstruct(w1, w2, idx);
        let all = [w1, w2, w3, &w4, &w5, &w6, &w7];
        if rec.capture(step, &all) {
            observe(step, &all);
        }
    };

    bookkeep(0, &w10, &w20, &w30, &mut rec);
    let mut state: State = vec![w10, w20, w30];
    for n in 0..grid.n_march {
        let base = 2 * n;
        state = rk_step(&state, du, grid.order, |s, off| {
            let idx = base + off;
            let w1 = &s[0];
            let w2 = &s[1];
            let mut w3 = s[2].clone();
            inject(&mut w3, idx);
            let [w4, w5, w6, w7] = reconstruct(w1, w2, idx);

            let mut k1 = deriv(&w3, 1, grid);
            k1 += &deriv(&w4, 1, grid);
            k1 += &deriv(&w5, 2, grid);
            k1 *= 0.5;
            k1 += &dissipation(w1, grid);

            let mut k2 = deriv(&w3, 2, grid);
            k2 += &deriv(&w6, 1, grid);
            k2 += &deriv(&w7, 2, grid);
            k2 *= 0.5;
            k2 += &dissipation(w2, grid);

            let mut k3 = deriv(&w3, 0, grid);
            k3 += &deriv(w1, 1, grid);
            k3 += &deriv(w2, 2, grid);
            k3 *= 0.5;
            k3 += &dissipation(&w3, grid);

            vec![k1, k2, k3]
        });
        inject(&mut state[2], base + 2);
        check_finite(&state, "null-plane derivative march", n + 1)?;
        let (w1, rest) = state.split_first().unwrap();
        bookkeep(n + 1, w1, &rest[0], &rest[1], &mut rec);
    }

    let diagonal: Vec<Array3<f64>> = (0..7).map(|k| rec.assemble(k)).collect::<Result<_>>()?;
    // final-surface weights: 2 on the marched pair w1, w2; 1 elsewhere
    let mut norm = grid.zero_slice();
    for (k, d) in diagonal.iter().enumerate() {
        let w = if k < 2 { 2.0 } else { 1.0 };
        norm.zip_mut_with(d, |a, &v| *a += w * v * v);
    }

    let tally = BalanceTally {
        norm_final: quadrature_slice(&norm, grid),
        flux_initial,
        flux_bound_in: quadrature_volume(&series_in, du, grid.order),
        flux_bound_out: quadrature_volume(&series_out, du, grid.order),
        volume: 0.0,
        growth: 1.0,
    };
    Ok(PlaneWRun { tally, diagonal })
}

/// Rebuild the marching rate of P from the derivative set and compare it
/// with the reference on the extraction diagonal:
///
///   P_u(z) = P_u(0) + (1/2) d_x integral_0^z (w3 + w4 + w7) dz'.
///
/// Returns the largest pointwise defect; shrinks at the scheme order.
pub fn transverse_rate_check(grid: &GridSpec, wave: &PlaneWave) -> Result<f64> {
    ensure_plane(grid)?;
    let stride = grid.station_stride();
    let cells = grid.axis(0).cells;
    let du = grid.du();
    let zs = grid.axis(0).coords();
    let xs = grid.axis(1).coords();
    let ys = grid.axis(2).coords();
    let mut max_err: f64 = 0.0;
    run_derivative_observed(grid, wave, |step, w| {
        let u = step as f64 * du;
        let j = cells - step / stride;
        let mut sum = w[2].clone();
        sum += w[3];
        sum += w[6];
        let integ = cumint(&sum, 0, grid.axis(0).spacing(), grid.order);
        let dx = deriv(&integ, 1, grid);
        for (a, &x) in xs.iter().enumerate() {
            for (b, &y) in ys.iter().enumerate() {
                let rebuilt = 0.5 * dx[[j, a, b]] + wave.p_rate(u, 0.0, x, y);
                let exact = wave.p_rate(u, zs[j], x, y);
                max_err = max_err.max((rebuilt - exact).abs());
            }
        }
    })?;
    Ok(max_err)
}

/// Solve the marching rates of P and Q by quadrature on one interior
/// slice and compare with direct u-differencing of the marched fields:
///
///   P_u(z) = P_u(0) + (1/2) d_x integral_0^z (P_x + Q_y + R_z) dz'
///   Q_u(z) = Q_u(0) + (1/2) d_y integral_0^z (P_x + Q_y + R_z) dz'
///
/// The boundary rates come from differencing the prescribed z=0 planes,
/// so both sides are fully discrete. Returns the worst defect over the
/// wedge rows of the mid-march slice.
pub fn rate_quadrature_check(grid: &GridSpec, wave: &PlaneWave) -> Result<f64> {
    ensure_plane(grid)?;
    let du = grid.du();
    let hz = grid.axis(0).spacing();
    let mid = grid.n_march / 2;
    let reach = if grid.order == 2 { 1 } else { 2 };
    if mid < reach || mid + reach > grid.n_march {
        return Err(NullwaveError::Grid(
            "rate check needs at least four marching steps".into(),
        ));
    }

    let mut snaps: Vec<Option<(Array3<f64>, Array3<f64>, Array3<f64>)>> =
        vec![None; 2 * reach + 1];
    run_scalar_observed(grid, wave, |step, r, p, q| {
        if step + reach >= mid && step <= mid + reach {
            snaps[step + reach - mid] = Some((r.clone(), p.clone(), q.clone()));
        }
    })?;
    let snap = |k: i64| -> &(Array3<f64>, Array3<f64>, Array3<f64>) {
        snaps[(k + reach as i64) as usize].as_ref().expect("captured around mid")
    };

    // direct u-derivatives of the marched null fields at the mid station
    let (direct_p, direct_q) = if grid.order == 2 {
        (
            (&snap(1).1 - &snap(-1).1) / (2.0 * du),
            (&snap(1).2 - &snap(-1).2) / (2.0 * du),
        )
    } else {
        let stencil = |pick: &dyn Fn(&(Array3<f64>, Array3<f64>, Array3<f64>)) -> &Array3<f64>| {
            let mut d = pick(snap(-2)) - pick(snap(2));
            d.scaled_add(8.0, pick(snap(1)));
            d.scaled_add(-8.0, pick(snap(-1)));
            d / (12.0 * du)
        };
        (stencil(&|s| &s.1), stencil(&|s| &s.2))
    };

    // boundary rates from the prescribed half-station planes
    let pb = grid.half_station_planes(|u, x, y| wave.fields(u, 0.0, x, y)[1]);
    let qb = grid.half_station_planes(|u, x, y| wave.fields(u, 0.0, x, y)[2]);
    let h = 2 * mid;
    let edge_rate = |planes: &[Array2<f64>]| -> Array2<f64> {
        if grid.order == 2 {
            (&planes[h + 1] - &planes[h - 1]) / du
        } else {
            let mut d = &planes[h - 2] - &planes[h + 2];
            d.scaled_add(8.0, &planes[h + 1]);
            d.scaled_add(-8.0, &planes[h - 1]);
            d / (6.0 * du)
        }
    };
    let pbu = edge_rate(&pb);
    let qbu = edge_rate(&qb);

    let (r, p, q) = snap(0);
    let mut sum = deriv(p, 1, grid);
    sum += &deriv(q, 2, grid);
    sum += &deriv(r, 0, grid);
    let integ = cumint(&sum, 0, hz, grid.order);
    let rebuilt_p = deriv(&integ, 1, grid) * 0.5;
    let rebuilt_q = deriv(&integ, 2, grid) * 0.5;

    let u_mid = mid as f64 * du;
    let j_max = ((grid.t_final - u_mid) / hz + 1e-9).floor() as usize;
    let mut worst: f64 = 0.0;
    for (rebuilt, direct, edge) in
        [(&rebuilt_p, &direct_p, &pbu), (&rebuilt_q, &direct_q, &qbu)]
    {
        for j in 0..=j_max {
            for ((rb, dir), eb) in rebuilt
                .index_axis(NdAxis(0), j)
                .iter()
                .zip(direct.index_axis(NdAxis(0), j).iter())
                .zip(edge.iter())
            {
                worst = worst.max((rb + eb - dir).abs());
            }
        }
    }
    Ok(worst)
}

/// Defect between transverse derivatives of the scalar-run diagonal and
/// the derivative-run diagonal: d_x R against R_x and d_y R against R_y.
pub fn transverse_cross_check(grid: &GridSpec, wave: &PlaneWave) -> Result<f64> {
    let scalar = run_scalar(grid, wave)?;
    let derived = run_derivative(grid, wave)?;
    let dx = deriv(&scalar.diagonal[0], 1, grid);
    let dy = deriv(&scalar.diagonal[0], 2, grid);
    let mut worst: f64 = 0.0;
    for (got, want) in [(&dx, &derived.diagonal[0]), (&dy, &derived.diagonal[1])] {
        worst = got
            .iter()
            .zip(want.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(worst, f64::max);
    }
    Ok(worst)
}
