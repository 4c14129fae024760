//! Grid descriptions for the three problem families.
//!
//! A slice is always a dense 3-d array over the non-marching coordinates:
//!
//! * Cauchy box: axes (x, y, z), all periodic, marched in t.
//! * Null plane: axes (z, x, y); z bounded on [0, T], x and y periodic,
//!   marched in retarded time u = t - z.
//! * Null cone: axes (r, s, phi); r bounded on [r0, r0 + T], s = cos(theta)
//!   cell-centred on (-1, 1) so the poles carry no sample, phi periodic,
//!   marched in u = t - r.
//!
//! Bounded axes hold `cells + 1` samples including both ends; cell-centred
//! axes hold `cells` midpoints; periodic axes hold `cells` samples without
//! the duplicate endpoint.

use crate::error::{NullwaveError, Result};
use ndarray::{Array2, Array3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Cauchy { lx: f64, ly: f64, lz: f64 },
    Plane { lx: f64, ly: f64 },
    Cone { r0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    Periodic,
    Bounded,
    CellCentered,
}

#[derive(Debug, Clone, Copy)]
pub struct Axis {
    pub kind: AxisKind,
    pub cells: usize,
    pub origin: f64,
    pub extent: f64,
}

impl Axis {
    pub fn samples(&self) -> usize {
        match self.kind {
            AxisKind::Bounded => self.cells + 1,
            _ => self.cells,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.cells as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        let h = self.spacing();
        match self.kind {
            AxisKind::CellCentered => self.origin + (i as f64 + 0.5) * h,
            _ => self.origin + i as f64 * h,
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.samples()).map(|i| self.coord(i)).collect()
    }
}

/// Fully-validated discretisation of one run.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub geometry: Geometry,
    pub t_final: f64,
    /// marching steps from 0 to t_final
    pub n_march: usize,
    /// scheme order p, 2 or 4: stencils, slice solves and quadratures all match
    pub order: usize,
    pub cfl: f64,
    /// strength of the order-scaled damping term added to marched equations
    pub dissipation: f64,
    axes: [Axis; 3],
}

impl GridSpec {
    /// `shape` counts cells per slice axis in storage order.
    /// `n_march = None` picks the smallest step count that satisfies the
    /// step restriction (and, for characteristic grids, keeps every
    /// diagonal station on a slice node).
    pub fn new(
        geometry: Geometry,
        t_final: f64,
        shape: [usize; 3],
        n_march: Option<usize>,
        order: usize,
        cfl: f64,
        dissipation: f64,
    ) -> Result<Self> {
        if order != 2 && order != 4 {
            return Err(NullwaveError::Grid(format!(
                "scheme order must be 2 or 4, got {order}"
            )));
        }
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(NullwaveError::Grid(format!(
                "t_final must be positive and finite, got {t_final}"
            )));
        }
        if !(cfl > 0.0) || !cfl.is_finite() {
            return Err(NullwaveError::Grid(format!(
                "cfl factor must be positive, got {cfl}"
            )));
        }
        if !(dissipation >= 0.0) || !dissipation.is_finite() {
            return Err(NullwaveError::Grid(format!(
                "dissipation must be non-negative, got {dissipation}"
            )));
        }
        for (k, n) in shape.iter().enumerate() {
            if *n < 4 {
                return Err(NullwaveError::Grid(format!(
                    "axis {k} needs at least 4 cells, got {n}"
                )));
            }
        }

        let axes = match geometry {
            Geometry::Cauchy { lx, ly, lz } => {
                for (name, l) in [("lx", lx), ("ly", ly), ("lz", lz)] {
                    if !(l > 0.0) || !l.is_finite() {
                        return Err(NullwaveError::Grid(format!(
                            "{name} must be positive, got {l}"
                        )));
                    }
                }
                [
                    Axis { kind: AxisKind::Periodic, cells: shape[0], origin: 0.0, extent: lx },
                    Axis { kind: AxisKind::Periodic, cells: shape[1], origin: 0.0, extent: ly },
                    Axis { kind: AxisKind::Periodic, cells: shape[2], origin: 0.0, extent: lz },
                ]
            }
            Geometry::Plane { lx, ly } => {
                for (name, l) in [("lx", lx), ("ly", ly)] {
                    if !(l > 0.0) || !l.is_finite() {
                        return Err(NullwaveError::Grid(format!(
                            "{name} must be positive, got {l}"
                        )));
                    }
                }
                [
                    Axis { kind: AxisKind::Bounded, cells: shape[0], origin: 0.0, extent: t_final },
                    Axis { kind: AxisKind::Periodic, cells: shape[1], origin: 0.0, extent: lx },
                    Axis { kind: AxisKind::Periodic, cells: shape[2], origin: 0.0, extent: ly },
                ]
            }
            Geometry::Cone { r0 } => {
                if !(r0 > 0.0) || !r0.is_finite() {
                    return Err(NullwaveError::Grid(format!(
                        "worldtube radius r0 must be positive, got {r0}"
                    )));
                }
                [
                    Axis { kind: AxisKind::Bounded, cells: shape[0], origin: r0, extent: t_final },
                    Axis { kind: AxisKind::CellCentered, cells: shape[1], origin: -1.0, extent: 2.0 },
                    Axis {
                        kind: AxisKind::Periodic,
                        cells: shape[2],
                        origin: 0.0,
                        extent: 2.0 * std::f64::consts::PI,
                    },
                ]
            }
        };

        if order == 4 {
            // boundary-corrected quadrature weights span 7 nodes
            for (k, ax) in axes.iter().enumerate() {
                if ax.kind != AxisKind::Periodic && ax.cells < 8 {
                    return Err(NullwaveError::Grid(format!(
                        "axis {k} needs at least 8 cells at order 4, got {}",
                        ax.cells
                    )));
                }
            }
        }

        let characteristic = !matches!(geometry, Geometry::Cauchy { .. });
        let limit_spacing = if characteristic {
            axes[0].spacing()
        } else {
            axes.iter().map(Axis::spacing).fold(f64::INFINITY, f64::min)
        };

        let n_march = match n_march {
            Some(n) => {
                if n == 0 {
                    return Err(NullwaveError::Grid("n_march must be positive".into()));
                }
                if characteristic && n % shape[0] != 0 {
                    return Err(NullwaveError::Grid(format!(
                        "n_march ({n}) must be a multiple of the axis-0 cell count \
                         ({}) so diagonal stations land on slice nodes",
                        shape[0]
                    )));
                }
                n
            }
            None => {
                if characteristic {
                    let m = (1.0 / cfl).ceil().max(1.0) as usize;
                    m * shape[0]
                } else {
                    (t_final / (cfl * limit_spacing)).ceil().max(1.0) as usize
                }
            }
        };

        let du = t_final / n_march as f64;
        if du > cfl * limit_spacing * (1.0 + 1e-12) {
            return Err(NullwaveError::Grid(format!(
                "marching step {du:.6e} exceeds cfl limit {:.6e} (cfl = {cfl})",
                cfl * limit_spacing
            )));
        }

        Ok(GridSpec { geometry, t_final, n_march, order, cfl, dissipation, axes })
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn slice_shape(&self) -> [usize; 3] {
        [self.axes[0].samples(), self.axes[1].samples(), self.axes[2].samples()]
    }

    pub fn zero_slice(&self) -> Array3<f64> {
        let s = self.slice_shape();
        Array3::zeros((s[0], s[1], s[2]))
    }

    pub fn du(&self) -> f64 {
        self.t_final / self.n_march as f64
    }

    /// Marching steps between consecutive diagonal stations.
    pub fn station_stride(&self) -> usize {
        debug_assert!(!matches!(self.geometry, Geometry::Cauchy { .. }));
        self.n_march / self.axes[0].cells
    }

    /// Largest slice spacing; the scale in tolerance(grid) = C * max^p.
    pub fn max_spacing(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).fold(self.du(), f64::max)
    }

    pub fn is_characteristic(&self) -> bool {
        !matches!(self.geometry, Geometry::Cauchy { .. })
    }

    /// Evaluate a pointwise function of the slice coordinates.
    pub fn fill_slice(&self, f: impl Fn(f64, f64, f64) -> f64) -> Array3<f64> {
        let mut a = self.zero_slice();
        let c0 = self.axes[0].coords();
        let c1 = self.axes[1].coords();
        let c2 = self.axes[2].coords();
        for ((i, j, k), v) in a.indexed_iter_mut() {
            *v = f(c0[i], c1[j], c2[k]);
        }
        a
    }

    /// Prescribed boundary values over the transverse plane on every half
    /// station of the march (Runge-Kutta stages land on these).
    pub fn half_station_planes(
        &self,
        f: impl Fn(f64, f64, f64) -> f64,
    ) -> Vec<Array2<f64>> {
        let c1 = self.axes[1].coords();
        let c2 = self.axes[2].coords();
        (0..=2 * self.n_march)
            .map(|i| {
                let u = 0.5 * self.du() * i as f64;
                let mut p = Array2::zeros((c1.len(), c2.len()));
                for (a, &x) in c1.iter().enumerate() {
                    for (b, &y) in c2.iter().enumerate() {
                        p[[a, b]] = f(u, x, y);
                    }
                }
                p
            })
            .collect()
    }
}
