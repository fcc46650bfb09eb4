//! Gridded time-dependent control fields and the feedback relation
//! `u = (1/nu) d_v q`.

use crate::domain::{GridField, GridSpec};
use crate::error::{Error, Result};

/// Control values `u[k][i][j]` for `k = 0..=n_t`, plus their time average.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlField {
    steps: Vec<GridField>,
    mean: GridField,
}

impl ControlField {
    /// Builds a field from per-step values and computes the time average.
    pub fn from_steps(steps: Vec<GridField>) -> Result<Self> {
        let mean = time_average_control(&steps)?;
        Ok(Self { steps, mean })
    }

    /// Builds a field with an explicitly given average (used when reading
    /// files, which store both).
    pub fn from_parts(steps: Vec<GridField>, mean: GridField) -> Result<Self> {
        let first = steps
            .first()
            .ok_or_else(|| Error::DimensionMismatch("control needs at least one step".into()))?;
        let (n_x, n_v) = (first.n_x(), first.n_v());
        if steps.iter().any(|s| s.n_x() != n_x || s.n_v() != n_v) || mean.n_x() != n_x || mean.n_v() != n_v {
            return Err(Error::DimensionMismatch("control steps differ in shape".into()));
        }
        Ok(Self { steps, mean })
    }

    pub fn zeros(n_t: usize, grid: &GridSpec) -> Self {
        Self::stationary(GridField::zeros_like(grid), n_t)
    }

    /// The same field at every step `0..=n_t`.
    pub fn stationary(field: GridField, n_t: usize) -> Self {
        Self {
            steps: vec![field.clone(); n_t + 1],
            mean: field,
        }
    }

    /// Number of macro steps; the field holds `n_t + 1` time levels.
    pub fn n_t(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn n_x(&self) -> usize {
        self.mean.n_x()
    }

    pub fn n_v(&self) -> usize {
        self.mean.n_v()
    }

    pub fn step(&self, k: usize) -> &GridField {
        &self.steps[k]
    }

    pub fn steps(&self) -> &[GridField] {
        &self.steps
    }

    /// Time average `u_bar`.
    pub fn mean(&self) -> &GridField {
        &self.mean
    }

    pub fn matches(&self, grid: &GridSpec) -> bool {
        self.mean.matches(grid)
    }

    /// The stationary feedback law: `u_bar` at every step.
    pub fn averaged(&self) -> Self {
        Self::stationary(self.mean.clone(), self.n_t())
    }
}

/// `u_bar[i][j] = 1/(n_t+1) * sum_k u[k][i][j]`.
pub fn time_average_control(steps: &[GridField]) -> Result<GridField> {
    let first = steps
        .first()
        .ok_or_else(|| Error::DimensionMismatch("cannot average an empty control".into()))?;
    let mut acc = GridField::zeros(first.n_x(), first.n_v());
    for step in steps {
        if step.n_x() != first.n_x() || step.n_v() != first.n_v() {
            return Err(Error::DimensionMismatch("control steps differ in shape".into()));
        }
        for (a, &u) in acc.values_mut().iter_mut().zip(step.values()) {
            *a += u;
        }
    }
    let n = steps.len() as f64;
    acc.values_mut().iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

/// Finite-difference velocity derivative of a gridded field: central
/// differences inside, one-sided differences in the first and last velocity
/// cells.
pub fn velocity_gradient(q: &GridField, dv: f64) -> GridField {
    let n_v = q.n_v();
    let mut grad = GridField::zeros(q.n_x(), n_v);
    for i in 0..q.n_x() {
        let row = q.row(i);
        let out = grad.row_mut(i);
        out[0] = (row[1] - row[0]) / dv;
        for j in 1..n_v - 1 {
            out[j] = (row[j + 1] - row[j - 1]) / (2.0 * dv);
        }
        out[n_v - 1] = (row[n_v - 1] - row[n_v - 2]) / dv;
    }
    grad
}

/// Feedback control `u = (1/nu) d_v q~` from a smoothed adjoint histogram.
///
/// # Panics
/// If `nu <= 0`.
pub fn extract_control(q_tilde: &GridField, nu: f64, dv: f64) -> GridField {
    assert!(nu > 0.0, "control weight must be positive, got {nu}");
    let mut u = velocity_gradient(q_tilde, dv);
    u.values_mut().iter_mut().for_each(|g| *g /= nu);
    u
}
