//! Multi-field slice states, explicit step rules and the diagonal record.
//!
//! A state is the set of fields advanced in the marching coordinate; the
//! remaining fields of each reduction are reconstructed per slice and do
//! not appear here. Stage callbacks receive the stage offset in half
//! steps (0, 1 or 2 past the current station) so externally prescribed
//! boundary values can be sampled at the matching time.

use crate::error::{NullwaveError, Result};
use ndarray::{Array2, Array3};

pub type State = Vec<Array3<f64>>;

pub fn state_axpy(y: &State, a: f64, k: &State) -> State {
    y.iter()
        .zip(k.iter())
        .map(|(yi, ki)| {
            let mut out = yi.clone();
            out.scaled_add(a, ki);
            out
        })
        .collect()
}

fn state_add_scaled(acc: &mut State, a: f64, k: &State) {
    for (ai, ki) in acc.iter_mut().zip(k.iter()) {
        ai.scaled_add(a, ki);
    }
}

/// One explicit step of size `dt`: Heun at order 2 (stages on whole
/// stations), the classical four-stage rule at order 4 (stages on half
/// stations). `rhs(fields, half_steps)` evaluates the marching rate.
pub fn rk_step(
    y: &State,
    dt: f64,
    order: usize,
    mut rhs: impl FnMut(&State, usize) -> State,
) -> State {
    match order {
        2 => {
            let k1 = rhs(y, 0);
            let y1 = state_axpy(y, dt, &k1);
            let k2 = rhs(&y1, 2);
            let mut out = state_axpy(y, 0.5 * dt, &k1);
            state_add_scaled(&mut out, 0.5 * dt, &k2);
            out
        }
        4 => {
            let k1 = rhs(y, 0);
            let k2 = rhs(&state_axpy(y, 0.5 * dt, &k1), 1);
            let k3 = rhs(&state_axpy(y, 0.5 * dt, &k2), 1);
            let k4 = rhs(&state_axpy(y, dt, &k3), 2);
            let mut out = state_axpy(y, dt / 6.0, &k1);
            state_add_scaled(&mut out, dt / 3.0, &k2);
            state_add_scaled(&mut out, dt / 3.0, &k3);
            state_add_scaled(&mut out, dt / 6.0, &k4);
            out
        }
        _ => panic!("unsupported step order {order}"),
    }
}

pub fn check_finite(fields: &[Array3<f64>], context: &str, step: usize) -> Result<()> {
    for f in fields {
        if !f.iter().all(|v| v.is_finite()) {
            return Err(NullwaveError::NonFinite { context: context.to_string(), step });
        }
    }
    Ok(())
}

/// Collects field values along the outgoing diagonal of the marching
/// prism. The diagonal crosses grid nodes only on whole stations that are
/// multiples of the station stride; at step `stride * k` it sits on axis-0
/// node `cells - k`. Once marching reaches step `stride * cells` every
/// node has been captured and the diagonal slice can be assembled.
pub struct DiagonalRecord {
    cells: usize,
    stride: usize,
    nfields: usize,
    planes: Vec<Option<Vec<Array2<f64>>>>,
}

impl DiagonalRecord {
    pub fn new(cells: usize, stride: usize, nfields: usize) -> Self {
        DiagonalRecord {
            cells,
            stride,
            nfields,
            planes: (0..=cells).map(|_| None).collect(),
        }
    }

    /// Record the diagonal node for `step` if one is crossed. Fields are
    /// sampled on their current slice; returns true when a capture happened.
    pub fn capture(&mut self, step: usize, fields: &[&Array3<f64>]) -> bool {
        assert_eq!(fields.len(), self.nfields);
        if step % self.stride != 0 {
            return false;
        }
        let k = step / self.stride;
        if k > self.cells {
            return false;
        }
        let j = self.cells - k;
        let grabbed = fields
            .iter()
            .map(|f| f.index_axis(ndarray::Axis(0), j).to_owned())
            .collect();
        self.planes[j] = Some(grabbed);
        true
    }

    pub fn complete(&self) -> bool {
        self.planes.iter().all(|p| p.is_some())
    }

    /// Assemble field `k` on the diagonal as a slice-shaped array indexed
    /// by the axis-0 node the diagonal crossed.
    pub fn assemble(&self, k: usize) -> Result<Array3<f64>> {
        if !self.complete() {
            return Err(NullwaveError::Grid(
                "diagonal record incomplete; marching did not reach the last station".into(),
            ));
        }
        let first = self.planes[0].as_ref().unwrap()[k].view();
        let (n1, n2) = first.dim();
        let mut out = Array3::zeros((self.cells + 1, n1, n2));
        for (j, p) in self.planes.iter().enumerate() {
            out.index_axis_mut(ndarray::Axis(0), j)
                .assign(&p.as_ref().unwrap()[k]);
        }
        Ok(out)
    }
}
