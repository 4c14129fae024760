//! Marching on null-cone slices.
//!
//! Coordinates (u = t - r; r, s = cos theta, phi) on r >= r0 > 0, with
//! g = r psi and lam = sqrt(1 - s^2). The scalar reduction marches
//! R = g_r and rebuilds P = g_s lam / r, Q = g_phi / (lam r):
//!
//!   2 R_u = R_r + (lam/r) P_s + Q_phi/(r lam) - s P/(r lam)
//!   P_r + P/r = (lam/r) R_s
//!   Q_r + Q/r = R_phi/(r lam)
//!
//! The derivative reduction marches (w1, w2, w3) and rebuilds w4..w7
//! through radial transport with 2/r attenuation; see the reference
//! module for the variable scalings. The angular factors keep every
//! coefficient matrix symmetric, at the price of lower-order couplings
//! with 1/lam growth toward the axis; the s axis is cell-centred so no
//! node touches it.
//!
//! Both runs integrate over the wedge prism r0 <= r <= r0 + T - u. The
//! scalar divergence integrand is -(2/r)(P^2 + Q^2), non-positive by
//! construction, so the scalar estimate needs no growth factor. The
//! derivative couplings are bounded by the largest coefficient of the
//! divergence form, giving an exp(c T) growth factor.

use crate::error::{NullwaveError, Result};
use crate::estimate::BalanceTally;
use crate::field::{check_finite, rk_step, DiagonalRecord, State};
use crate::grid::{Geometry, GridSpec};
use crate::ops::{
    cumint, deriv, dissipation, quadrature_plane, quadrature_slice, quadrature_slice_partial,
    quadrature_volume,
};
use crate::oracle::{DipoleWave, IngoingPulse};
use ndarray::{Array2, Array3, Axis as NdAxis};

/// Data for a scalar null-cone run.
pub trait ConeSource {
    /// R on the initial cone u = 0.
    fn initial(&self, r: f64, s: f64, phi: f64) -> f64;
    /// (P, Q) on the inner tube r = r0.
    fn boundary(&self, u: f64, r0: f64, s: f64, phi: f64) -> [f64; 2];
    /// R on the far edge r = r0 + T.
    fn far_edge(&self, u: f64, rtop: f64, s: f64, phi: f64) -> f64;
}

/// Data for a derivative-set null-cone run.
pub trait ConeWSource {
    fn initial(&self, r: f64, s: f64, phi: f64) -> [f64; 3];
    fn boundary(&self, u: f64, r0: f64, s: f64, phi: f64) -> [f64; 4];
    fn far_edge(&self, u: f64, rtop: f64, s: f64, phi: f64) -> f64;
}

impl ConeSource for IngoingPulse {
    fn initial(&self, r: f64, s: f64, phi: f64) -> f64 {
        self.fields(0.0, r, s, phi)[0]
    }
    fn boundary(&self, u: f64, r0: f64, s: f64, phi: f64) -> [f64; 2] {
        let f = self.fields(u, r0, s, phi);
        [f[1], f[2]]
    }
    fn far_edge(&self, u: f64, rtop: f64, s: f64, phi: f64) -> f64 {
        self.fields(u, rtop, s, phi)[0]
    }
}

impl ConeWSource for IngoingPulse {
    fn initial(&self, r: f64, s: f64, phi: f64) -> [f64; 3] {
        let w = self.wfields(0.0, r, s, phi);
        [w[0], w[1], w[2]]
    }
    fn boundary(&self, u: f64, r0: f64, s: f64, phi: f64) -> [f64; 4] {
        let w = self.wfields(u, r0, s, phi);
        [w[3], w[4], w[5], w[6]]
    }
    fn far_edge(&self, u: f64, rtop: f64, s: f64, phi: f64) -> f64 {
        self.wfields(u, rtop, s, phi)[2]
    }
}

impl ConeSource for DipoleWave {
    fn initial(&self, r: f64, s: f64, phi: f64) -> f64 {
        self.fields(0.0, r, s, phi)[0]
    }
    fn boundary(&self, u: f64, r0: f64, s: f64, phi: f64) -> [f64; 2] {
        let f = self.fields(u, r0, s, phi);
        [f[1], f[2]]
    }
    fn far_edge(&self, u: f64, rtop: f64, s: f64, phi: f64) -> f64 {
        self.fields(u, rtop, s, phi)[0]
    }
}

impl ConeWSource for DipoleWave {
    fn initial(&self, r: f64, s: f64, phi: f64) -> [f64; 3] {
        let w = self.wfields(0.0, r, s, phi);
        [w[0], w[1], w[2]]
    }
    fn boundary(&self, u: f64, r0: f64, s: f64, phi: f64) -> [f64; 4] {
        let w = self.wfields(u, r0, s, phi);
        [w[3], w[4], w[5], w[6]]
    }
    fn far_edge(&self, u: f64, rtop: f64, s: f64, phi: f64) -> f64 {
        self.wfields(u, rtop, s, phi)[2]
    }
}

impl ConeSource for crate::datagen::ZeroData {
    fn initial(&self, _r: f64, _s: f64, _phi: f64) -> f64 {
        0.0
    }
    fn boundary(&self, _u: f64, _r0: f64, _s: f64, _phi: f64) -> [f64; 2] {
        [0.0; 2]
    }
    fn far_edge(&self, _u: f64, _rtop: f64, _s: f64, _phi: f64) -> f64 {
        0.0
    }
}

impl ConeWSource for crate::datagen::ZeroData {
    fn initial(&self, _r: f64, _s: f64, _phi: f64) -> [f64; 3] {
        [0.0; 3]
    }
    fn boundary(&self, _u: f64, _r0: f64, _s: f64, _phi: f64) -> [f64; 4] {
        [0.0; 4]
    }
    fn far_edge(&self, _u: f64, _rtop: f64, _s: f64, _phi: f64) -> f64 {
        0.0
    }
}

impl ConeSource for crate::datagen::RandomConeData {
    fn initial(&self, r: f64, s: f64, phi: f64) -> f64 {
        self.initial_value(r, s, phi)
    }
    fn boundary(&self, u: f64, _r0: f64, s: f64, phi: f64) -> [f64; 2] {
        [self.boundary_value(0, u, s, phi), self.boundary_value(1, u, s, phi)]
    }
    fn far_edge(&self, _u: f64, rtop: f64, s: f64, phi: f64) -> f64 {
        self.initial_value(rtop, s, phi)
    }
}

impl ConeWSource for crate::datagen::RandomConeWData {
    fn initial(&self, r: f64, s: f64, phi: f64) -> [f64; 3] {
        std::array::from_fn(|k| self.initial_value(k, r, s, phi))
    }
    fn boundary(&self, u: f64, _r0: f64, s: f64, phi: f64) -> [f64; 4] {
        std::array::from_fn(|k| self.boundary_value(k, u, s, phi))
    }
    fn far_edge(&self, _u: f64, rtop: f64, s: f64, phi: f64) -> f64 {
        self.initial_value(2, rtop, s, phi)
    }
}

pub struct ConeRun {
    pub tally: BalanceTally,
    /// (R, P, Q) on the final surface, indexed by the r node.
    pub diagonal: Vec<Array3<f64>>,
    /// Largest divergence-integrand value seen over the wedge; the scalar
    /// form is a negated sum of squares, so this cannot exceed zero.
    pub volume_integrand_max: f64,
}

pub struct ConeWRun {
    pub tally: BalanceTally,
    /// (w1, ..., w7) on the final surface.
    pub diagonal: Vec<Array3<f64>>,
    /// Coupling bound c with growth = exp(c T).
    pub bound: f64,
}

fn cone_radius(grid: &GridSpec) -> Result<f64> {
    match grid.geometry {
        Geometry::Cone { r0 } => Ok(r0),
        _ => Err(NullwaveError::Grid("null-cone run requires cone geometry".into())),
    }
}

/// Coordinate factors on the (r, s) plane, shaped for broadcast over phi.
///
/// Angular terms are differenced in the combinations d_s(lam^k f): the
/// lam^k weight keeps the differentiated product polynomial in s where
/// the bare field carries inverse powers of lam near the axis, so the
/// stencil error stays uniform over the cells.
struct Factors {
    /// lam / r
    a: Array3<f64>,
    /// 1 / (r lam)
    b: Array3<f64>,
    /// s / (r lam)
    sb: Array3<f64>,
    /// 2 / r
    inv2r: Array3<f64>,
    /// 1 / r
    inv_r: Array3<f64>,
    /// lam
    lam: Array3<f64>,
    /// lam^2
    lam2: Array3<f64>,
    /// 1 / lam
    inv_lam: Array3<f64>,
}

fn factors(grid: &GridSpec) -> Factors {
    let rs = grid.axis(0).coords();
    let ss = grid.axis(1).coords();
    let shape = (rs.len(), ss.len(), 1);
    let build = |f: &dyn Fn(f64, f64) -> f64| {
        let mut m = Array3::zeros(shape);
        for (j, &r) in rs.iter().enumerate() {
            for (a, &s) in ss.iter().enumerate() {
                m[[j, a, 0]] = f(r, s);
            }
        }
        m
    };
    Factors {
        a: build(&|r, s| (1.0 - s * s).sqrt() / r),
        b: build(&|r, s| 1.0 / (r * (1.0 - s * s).sqrt())),
        sb: build(&|r, s| s / (r * (1.0 - s * s).sqrt())),
        inv2r: build(&|r, _| 2.0 / r),
        inv_r: build(&|r, _| 1.0 / r),
        lam: build(&|_, s| (1.0 - s * s).sqrt()),
        lam2: build(&|_, s| 1.0 - s * s),
        inv_lam: build(&|_, s| 1.0 / (1.0 - s * s).sqrt()),
    }
}

/// Largest coefficient of the derivative-set divergence form over the
/// grid nodes; the growth factor is exp of this times the depth.
pub fn dtilde_bound(grid: &GridSpec) -> f64 {
    let rs = grid.axis(0).coords();
    let ss = grid.axis(1).coords();
    let mut c: f64 = 0.0;
    for &r in &rs {
        for &s in &ss {
            let lam = (1.0 - s * s).sqrt();
            c = c.max(3.0 * s.abs() / (r * lam)).max(4.0 / r);
        }
    }
    c
}

fn plane_square_integral(grid: &GridSpec, planes: &[&Array2<f64>]) -> f64 {
    let mut sq = Array2::zeros(planes[0].raw_dim());
    for p in planes {
        sq.zip_mut_with(*p, |acc, &v| *acc += v * v);
    }
    quadrature_plane(&sq.view(), grid)
}

pub fn run_scalar(grid: &GridSpec, src: &dyn ConeSource) -> Result<ConeRun> {
    let r0 = cone_radius(grid)?;
    let rtop = r0 + grid.t_final;
    let rs = grid.axis(0).coords();
    let hr = grid.axis(0).spacing();
    let du = grid.du();
    let stride = grid.station_stride();
    let cells = grid.axis(0).cells;
    let nr = grid.slice_shape()[0];
    let fac = factors(grid);

    let pb = grid.half_station_planes(|u, s, phi| src.boundary(u, r0, s, phi)[0]);
    let qb = grid.half_station_planes(|u, s, phi| src.boundary(u, r0, s, phi)[1]);
    let far = grid.half_station_planes(|u, s, phi| src.far_edge(u, rtop, s, phi));
    // radial transport of the lam-weighted fields: lam is constant along r,
    // and d_s acts on lam^2 R, polynomial near the axis cells
    let pbl: Vec<Array2<f64>> = pb
        .iter()
        .map(|p| {
            let mut w = p.clone();
            for (a, &s) in grid.axis(1).coords().iter().enumerate() {
                let lam = (1.0 - s * s).sqrt();
                w.index_axis_mut(NdAxis(0), a).mapv_inplace(|v| v * lam);
            }
            w
        })
        .collect();
    let qbl: Vec<Array2<f64>> = qb
        .iter()
        .map(|p| {
            let mut w = p.clone();
            for (a, &s) in grid.axis(1).coords().iter().enumerate() {
                let lam = (1.0 - s * s).sqrt();
                w.index_axis_mut(NdAxis(0), a).mapv_inplace(|v| v * lam);
            }
            w
        })
        .collect();

    let r_init = grid.fill_slice(|r, s, phi| src.initial(r, s, phi));
    let flux_initial = 2.0 * quadrature_slice(&r_init.mapv(|v| v * v), grid);

    // (lam P)' + (lam P)/r = lam^2 R_s / r
    // (lam Q)' + (lam Q)/r = R_phi / r
    // the nodal lam^2 factor scales the edge-stencil defect by the cell
    // distance to the pole, which keeps P = F/lam clean there
    let reconstruct = |r: &Array3<f64>, idx: usize| -> (Array3<f64>, Array3<f64>) {
        let sp = &(&deriv(r, 1, grid) * &fac.lam2) * &fac.inv_r;
        let sq = &deriv(r, 2, grid) * &fac.inv_r;
        let fp = crate::ops::attenuated_solve(&pbl[idx].view(), &sp, &rs, hr, 1, grid.order);
        let fq = crate::ops::attenuated_solve(&qbl[idx].view(), &sq, &rs, hr, 1, grid.order);
        (&fp * &fac.inv_lam, &fq * &fac.inv_lam)
    };
    let inject = |r: &mut Array3<f64>, idx: usize| {
        r.index_axis_mut(NdAxis(0), nr - 1).assign(&far[idx]);
    };

    let mut rec = DiagonalRecord::new(cells, stride, 3);
    let mut series_in = Vec::with_capacity(grid.n_march + 1);
    let mut series_out = Vec::with_capacity(grid.n_march + 1);
    let mut series_vol = Vec::with_capacity(cells + 1);
    let mut integrand_max = f64::NEG_INFINITY;

    let mut bookkeep = |step: usize, r: &Array3<f64>, rec: &mut DiagonalRecord| {
        let idx = 2 * step;
        series_in.push(plane_square_integral(grid, &[&pb[idx], &qb[idx]]));
        let edge = r.index_axis(NdAxis(0), 0).to_owned();
        series_out.push(plane_square_integral(grid, &[&edge]));
        let (p, q) = reconstruct(r, idx);
        if step % stride == 0 {
            let mut sq = &p * &p;
            sq += &(&q * &q);
            let integrand = -(&sq * &fac.inv2r);
            let k = step / stride;
            series_vol.push(quadrature_slice_partial(&integrand, grid, cells - k));
            for j in 0..=(cells - k) {
                for &v in integrand.index_axis(NdAxis(0), j).iter() {
                    integrand_max = integrand_max.max(v);
                }
            }
        }
        rec.capture(step, &[r, &p, &q]);
    };

    bookkeep(0, &r_init, &mut rec);
    let mut state: State = vec![r_init];
    for n in 0..grid.n_march {
        let base = 2 * n;
        state = rk_step(&state, du, grid.order, |s, off| {
            let idx = base + off;
            let mut r = s[0].clone();
            inject(&mut r, idx);
            let (p, q) = reconstruct(&r, idx);
            // (lam/r) P_s - (s/(r lam)) P = d_s(lam P) / r
            let mut k = deriv(&r, 0, grid);
            k += &(&deriv(&(&p * &fac.lam), 1, grid) * &fac.inv_r);
            k += &(&deriv(&q, 2, grid) * &fac.b);
            k *= 0.5;
            k += &dissipation(&r, grid);
            vec![k]
        });
        inject(&mut state[0], base + 2);
        check_finite(&state, "null-cone scalar march", n + 1)?;
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
        volume: quadrature_volume(&series_vol, hr, grid.order),
        growth: 1.0,
    };
    Ok(ConeRun { tally, diagonal: vec![rd, pd, qd], volume_integrand_max: integrand_max })
}

pub fn run_derivative(grid: &GridSpec, src: &dyn ConeWSource) -> Result<ConeWRun> {
    run_derivative_observed(grid, src, |_, _| {})
}

/// Derivative-set run with an observer called on every diagonal station
/// with the current step and the seven slice fields.
pub fn run_derivative_observed(
    grid: &GridSpec,
    src: &dyn ConeWSource,
    mut observe: impl FnMut(usize, &[&Array3<f64>; 7]),
) -> Result<ConeWRun> {
    let r0 = cone_radius(grid)?;
    let rtop = r0 + grid.t_final;
    let rs = grid.axis(0).coords();
    let hr = grid.axis(0).spacing();
    let du = grid.du();
    let stride = grid.station_stride();
    let cells = grid.axis(0).cells;
    let nr = grid.slice_shape()[0];
    let fac = factors(grid);

    let wb: Vec<Vec<Array2<f64>>> = (0..4)
        .map(|k| grid.half_station_planes(|u, s, phi| src.boundary(u, r0, s, phi)[k]))
        .collect();
    let far = grid.half_station_planes(|u, s, phi| src.far_edge(u, rtop, s, phi));

    let w10 = grid.fill_slice(|r, s, phi| src.initial(r, s, phi)[0]);
    let w20 = grid.fill_slice(|r, s, phi| src.initial(r, s, phi)[1]);
    let w30 = grid.fill_slice(|r, s, phi| src.initial(r, s, phi)[2]);
    let mut init_sq = w10.mapv(|v| v * v);
    init_sq.zip_mut_with(&w20, |a, &v| *a += v * v);
    init_sq.zip_mut_with(&w30, |a, &v| *a += v * v);
    let flux_initial = 2.0 * quadrature_slice(&init_sq, grid);

    // radial transport with 2/r attenuation:
    //   w4' + 2w4/r = d_s(lam w1)/r
    //   w5' + 2w5/r = d_s(lam w2)/r
    //   w6' + 2w6/r = (w1_phi/lam + (s/lam) w2)/r
    //   w7' + 2w7/r = (w2_phi/lam)/r
    let reconstruct = |w1: &Array3<f64>, w2: &Array3<f64>, idx: usize| -> [Array3<f64>; 4] {
        let s4 = &deriv(&(w1 * &fac.lam), 1, grid) * &fac.inv_r;
        let s5 = &deriv(&(w2 * &fac.lam), 1, grid) * &fac.inv_r;
        let mut s6 = &deriv(w1, 2, grid) * &fac.b;
        s6 += &(w2 * &fac.sb);
        let s7 = &deriv(w2, 2, grid) * &fac.b;
        [
            crate::ops::attenuated_solve(&wb[0][idx].view(), &s4, &rs, hr, 2, grid.order),
            crate::ops::attenuated_solve(&wb[1][idx].view(), &s5, &rs, hr, 2, grid.order),
            crate::ops::attenuated_solve(&wb[2][idx].view(), &s6, &rs, hr, 2, grid.order),
            crate::ops::attenuated_solve(&wb[3][idx].view(), &s7, &rs, hr, 2, grid.order),
        ]
    };
    let inject = |w3: &mut Array3<f64>, idx: usize| {
        w3.index_axis_mut(NdAxis(0), nr - 1).assign(&far[idx]);
    };

    let mut rec = DiagonalRecord::new(cells, stride, 7);
    let mut series_in = Vec::with_capacity(grid.n_march + 1);
    let mut series_out = Vec::with_capacity(grid.n_march + 1);
    let mut series_vol = Vec::with_capacity(cells + 1);

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
        if step % stride == 0 {
            // divergence form: cross couplings through s/(r lam), plus the
            // strictly dissipative -(4/r) block on the rebuilt fields
            let mut cross = w1 * &w7;
            cross -= &(&(w2 * &w5) * 2.0);
            cross += &(w2 * &w6);
            let mut integrand = &cross * &(&fac.sb * 2.0);
            let mut block = &w4 * &w4;
            block += &(&w5 * &w5);
            block += &(&w6 * &w6);
            block += &(&w7 * &w7);
            block += &(w3 * &w4);
            block += &(w3 * &w7);
            integrand -= &(&block * &(&fac.inv2r * 2.0));
            let k = step / stride;
            series_vol.push(quadrature_slice_partial(&integrand, grid, cells - k));
        }
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

            let mut t1 = deriv(&w3, 1, grid);
            t1 += &deriv(&w4, 1, grid);
            let mut k1 = &t1 * &fac.a;
            k1 += &(&deriv(&w6, 2, grid) * &fac.b);
            k1 += &(&w7 * &fac.sb);
            k1 *= 0.5;
            k1 += &dissipation(w1, grid);

            // lam/r w5_s - 2 s/(r lam) w5 = d_s(lam^2 w5) / (r lam)
            let mut t2 = deriv(&w3, 2, grid);
            t2 += &deriv(&w7, 2, grid);
            t2 += &deriv(&(&w5 * &fac.lam2), 1, grid);
            let mut k2 = &t2 * &fac.b;
            k2 *= 0.5;
            k2 += &dissipation(w2, grid);

            // lam/r w1_s - s/(r lam) w1 = d_s(lam w1) / r
            let mut k3 = deriv(&w3, 0, grid);
            k3 += &(&deriv(&(w1 * &fac.lam), 1, grid) * &fac.inv_r);
            k3 += &(&deriv(w2, 2, grid) * &fac.b);
            let mut wsum = w4.clone();
            wsum += &w7;
            k3 -= &(&wsum * &fac.inv2r);
            k3 *= 0.5;
            k3 += &dissipation(&w3, grid);

            vec![k1, k2, k3]
        });
        inject(&mut state[2], base + 2);
        check_finite(&state, "null-cone derivative march", n + 1)?;
        let (w1, rest) = state.split_first().unwrap();
        bookkeep(n + 1, w1, &rest[0], &rest[1], &mut rec);
    }

    let diagonal: Vec<Array3<f64>> = (0..7).map(|k| rec.assemble(k)).collect::<Result<_>>()?;
    let mut norm = grid.zero_slice();
    for (k, d) in diagonal.iter().enumerate() {
        let w = if k < 2 { 2.0 } else { 1.0 };
        norm.zip_mut_with(d, |a, &v| *a += w * v * v);
    }

    let bound = dtilde_bound(grid);
    let tally = BalanceTally {
        norm_final: quadrature_slice(&norm, grid),
        flux_initial,
        flux_bound_in: quadrature_volume(&series_in, du, grid.order),
        flux_bound_out: quadrature_volume(&series_out, du, grid.order),
        volume: quadrature_volume(&series_vol, hr, grid.order),
        growth: (bound * grid.t_final).exp(),
    };
    Ok(ConeWRun { tally, diagonal, bound })
}

/// Discrete residual of all seven derivative-set equations on exact
/// oracle fields: the three marching rows are differenced in u with the
/// scheme's own step, the four intra-surface rows in r with the slice
/// operators. Dissipation is excluded; the result shrinks at the scheme
/// order for data whose angular modes are smooth on the s chart.
pub fn derivative_pde_residual(
    grid: &GridSpec,
    exact: impl Fn(f64, f64, f64, f64) -> [f64; 7],
) -> Result<f64> {
    cone_radius(grid)?;
    let fac = factors(grid);
    let du = grid.du();
    let u0 = 0.5 * grid.t_final;
    let slab = |u: f64, k: usize| grid.fill_slice(|r, s, phi| exact(u, r, s, phi)[k]);

    let w: Vec<Array3<f64>> = (0..7).map(|k| slab(u0, k)).collect();
    let rate = |k: usize| -> Array3<f64> {
        if grid.order == 2 {
            (&slab(u0 + du, k) - &slab(u0 - du, k)) / (2.0 * du)
        } else {
            let mut d = &slab(u0 - 2.0 * du, k) - &slab(u0 + 2.0 * du, k);
            d.scaled_add(8.0, &slab(u0 + du, k));
            d.scaled_add(-8.0, &slab(u0 - du, k));
            d / (12.0 * du)
        }
    };

    let mut t1 = deriv(&w[2], 1, grid);
    t1 += &deriv(&w[3], 1, grid);
    let mut rhs1 = &t1 * &fac.a;
    rhs1 += &(&deriv(&w[5], 2, grid) * &fac.b);
    rhs1 += &(&w[6] * &fac.sb);

    let mut t2 = deriv(&w[2], 2, grid);
    t2 += &deriv(&w[6], 2, grid);
    t2 += &deriv(&(&w[4] * &fac.lam2), 1, grid);
    let rhs2 = &t2 * &fac.b;

    let mut rhs3 = deriv(&w[2], 0, grid);
    rhs3 += &(&deriv(&(&w[0] * &fac.lam), 1, grid) * &fac.inv_r);
    rhs3 += &(&deriv(&w[1], 2, grid) * &fac.b);
    let mut wsum = w[3].clone();
    wsum += &w[6];
    rhs3 -= &(&wsum * &fac.inv2r);

    let mut worst: f64 = 0.0;
    for (k, rhs) in [rhs1, rhs2, rhs3].into_iter().enumerate() {
        let mut res = rate(k);
        res *= 2.0;
        res -= &rhs;
        worst = res.iter().fold(worst, |a, v| a.max(v.abs()));
    }

    let s4 = &deriv(&(&w[0] * &fac.lam), 1, grid) * &fac.inv_r;
    let s5 = &deriv(&(&w[1] * &fac.lam), 1, grid) * &fac.inv_r;
    let mut s6 = &deriv(&w[0], 2, grid) * &fac.b;
    s6 += &(&w[1] * &fac.sb);
    let s7 = &deriv(&w[1], 2, grid) * &fac.b;
    for (k, src) in [s4, s5, s6, s7].into_iter().enumerate() {
        let mut res = deriv(&w[3 + k], 0, grid);
        res += &(&w[3 + k] * &fac.inv2r);
        res -= &src;
        worst = res.iter().fold(worst, |a, v| a.max(v.abs()));
    }
    Ok(worst)
}

/// Rebuild the marching rate of P from the derivative set and compare it
/// with the reference on the extraction diagonal:
///
///   P_u(r) = (r0/r) P_u(r0) + (lam/2r) d_s integral_r0^r (w3 + w4 + w7).
///
/// Returns the largest pointwise defect; shrinks at the scheme order.
pub fn transverse_rate_check(grid: &GridSpec, wave: &DipoleWave) -> Result<f64> {
    let r0 = cone_radius(grid)?;
    let stride = grid.station_stride();
    let cells = grid.axis(0).cells;
    let du = grid.du();
    let rs = grid.axis(0).coords();
    let ss = grid.axis(1).coords();
    let ps = grid.axis(2).coords();
    let mut max_err: f64 = 0.0;
    run_derivative_observed(grid, wave, |step, w| {
        let u = step as f64 * du;
        let j = cells - step / stride;
        let r = rs[j];
        let mut sum = w[2].clone();
        sum += w[3];
        sum += w[6];
        let integ = cumint(&sum, 0, grid.axis(0).spacing(), grid.order);
        let ds = deriv(&integ, 1, grid);
        for (a, &s) in ss.iter().enumerate() {
            for (b, &phi) in ps.iter().enumerate() {
                let lam = (1.0 - s * s).sqrt();
                let rebuilt =
                    (r0 / r) * wave.p_rate(u, r0, s, phi) + 0.5 * lam / r * ds[[j, a, b]];
                let exact = wave.p_rate(u, r, s, phi);
                max_err = max_err.max((rebuilt - exact).abs());
            }
        }
    })?;
    Ok(max_err)
}
