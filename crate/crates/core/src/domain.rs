//! Phase-space geometry: the position/velocity window, the cell mesh laid
//! over it, particles, and box-counting deposition onto the mesh.
//!
//! Cell indices are zero-based: cell `(0, 0)` is the lower-left cell whose
//! center sits at `(dx/2, dv/2 - v_max)`.

use crate::error::{Error, Result};

/// The physical box `[0, p_max]` in position and the numerical velocity
/// window `[-v_max, v_max]`, plus the wall reflection probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDomain {
    p_max: f64,
    v_max: f64,
    alpha: f64,
}

impl PhaseDomain {
    pub fn new(p_max: f64, v_max: f64, alpha: f64) -> Result<Self> {
        if !(p_max > 0.0 && p_max.is_finite()) {
            return Err(Error::invalid("p_max", format!("must be positive, got {p_max}")));
        }
        if !(v_max > 0.0 && v_max.is_finite()) {
            return Err(Error::invalid("v_max", format!("must be positive, got {v_max}")));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid("alpha", format!("must lie in [0, 1], got {alpha}")));
        }
        Ok(Self { p_max, v_max, alpha })
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    /// Probability that a particle hitting a wall is reflected.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn contains_position(&self, x: f64) -> bool {
        (0.0..=self.p_max).contains(&x)
    }

    pub fn contains_velocity(&self, v: f64) -> bool {
        v.abs() <= self.v_max
    }

    pub fn contains(&self, x: f64, v: f64) -> bool {
        self.contains_position(x) && self.contains_velocity(v)
    }
}

/// Uniform cell-centred mesh over a [`PhaseDomain`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n_x: usize,
    n_v: usize,
    dx: f64,
    dv: f64,
    p_max: f64,
    v_max: f64,
}

impl GridSpec {
    pub fn new(n_x: usize, n_v: usize, domain: &PhaseDomain) -> Result<Self> {
        if n_x < 2 {
            return Err(Error::invalid("n_x", format!("need at least 2 cells, got {n_x}")));
        }
        if n_v < 2 {
            return Err(Error::invalid("n_v", format!("need at least 2 cells, got {n_v}")));
        }
        Ok(Self {
            n_x,
            n_v,
            dx: domain.p_max() / n_x as f64,
            dv: 2.0 * domain.v_max() / n_v as f64,
            p_max: domain.p_max(),
            v_max: domain.v_max(),
        })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dv(&self) -> f64 {
        self.dv
    }

    pub fn cell_count(&self) -> usize {
        self.n_x * self.n_v
    }

    /// Cell containing `(x, v)`, or `None` outside the window.
    ///
    /// Points on an interior cell edge belong to the higher-index cell; the
    /// upper domain edges `x = p_max`, `v = v_max` belong to the last cell.
    pub fn cell_of(&self, x: f64, v: f64) -> Option<(usize, usize)> {
        if !(0.0..=self.p_max).contains(&x) || !(-self.v_max..=self.v_max).contains(&v) {
            return None;
        }
        let i = ((x / self.dx).floor() as usize).min(self.n_x - 1);
        let j = (((v + self.v_max) / self.dv).floor() as usize).min(self.n_v - 1);
        Some((i, j))
    }

    /// Center `(x_i, v_j)` of cell `(i, j)`.
    ///
    /// # Panics
    /// If either index is out of range.
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        assert!(
            i < self.n_x && j < self.n_v,
            "cell ({i}, {j}) outside a {}x{} grid",
            self.n_x,
            self.n_v
        );
        ((i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dv - self.v_max)
    }

    /// Lower-left corner of cell `(i, j)`.
    pub fn cell_origin(&self, i: usize, j: usize) -> (f64, f64) {
        let (x, v) = self.cell_center(i, j);
        (x - 0.5 * self.dx, v - 0.5 * self.dv)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_v + j
    }
}

/// One sample point in phase space.
///
/// `t_elapsed` is the sub-step clock measured from the start of the current
/// macro step; `prev_dt` is the length of the previous Verlet sub-step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub id: u64,
    pub x: f64,
    pub v: f64,
    pub t_elapsed: f64,
    pub prev_dt: f64,
    /// True when the last free flight ended in a collision, which is then
    /// carried out at the start of the next sub-step. False for fresh
    /// particles and after a flight cut short by the sub-step cap.
    pub collision_due: bool,
}

impl Particle {
    pub fn new(id: u64, x: f64, v: f64) -> Self {
        Self {
            id,
            x,
            v,
            t_elapsed: 0.0,
            prev_dt: 0.0,
            collision_due: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    Forward,
    Adjoint,
}

/// A particle cloud representing either the density `f` or the adjoint `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    pub kind: EnsembleKind,
    pub particles: Vec<Particle>,
}

impl ParticleEnsemble {
    pub fn new(kind: EnsembleKind, particles: Vec<Particle>) -> Self {
        Self { kind, particles }
    }

    pub fn empty(kind: EnsembleKind) -> Self {
        Self::new(kind, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Particle> {
        self.particles.iter()
    }

    /// One past the largest particle id, i.e. the next free id.
    pub fn next_id(&self) -> u64 {
        self.particles.iter().map(|p| p.id + 1).max().unwrap_or(0)
    }
}

/// Cell-centred scalar values on the mesh, stored row-major as `[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    n_x: usize,
    n_v: usize,
    values: Vec<f64>,
}

impl GridField {
    pub fn zeros(n_x: usize, n_v: usize) -> Self {
        Self {
            n_x,
            n_v,
            values: vec![0.0; n_x * n_v],
        }
    }

    pub fn zeros_like(grid: &GridSpec) -> Self {
        Self::zeros(grid.n_x(), grid.n_v())
    }

    pub fn from_values(n_x: usize, n_v: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_x * n_v {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {n_x}x{n_v} field",
                values.len()
            )));
        }
        Ok(Self { n_x, n_v, values })
    }

    /// Field with `f(x_i, v_j)` evaluated at every cell center.
    pub fn from_fn(grid: &GridSpec, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut field = Self::zeros_like(grid);
        for i in 0..grid.n_x() {
            for j in 0..grid.n_v() {
                let (x, v) = grid.cell_center(i, j);
                field.set(i, j, f(x, v));
            }
        }
        field
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn matches(&self, grid: &GridSpec) -> bool {
        self.n_x == grid.n_x() && self.n_v == grid.n_v()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_v + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.values[i * self.n_v + j] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// The velocity profile at position cell `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_v..(i + 1) * self.n_v]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.n_v..(i + 1) * self.n_v]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.n_v)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Value of the cell containing `(x, v)`; zero outside the window.
    pub fn lookup(&self, grid: &GridSpec, x: f64, v: f64) -> f64 {
        grid.cell_of(x, v).map_or(0.0, |(i, j)| self.get(i, j))
    }
}

/// Box-counting histogram: each cell holds the number of particles inside
/// it. Particles outside the window are ignored.
pub fn deposit(ensemble: &ParticleEnsemble, grid: &GridSpec) -> GridField {
    let mut counts = vec![0u64; grid.cell_count()];
    for p in ensemble.iter() {
        if let Some((i, j)) = grid.cell_of(p.x, p.v) {
            counts[grid.index(i, j)] += 1;
        }
    }
    GridField {
        n_x: grid.n_x(),
        n_v: grid.n_v(),
        values: counts.into_iter().map(|c| c as f64).collect(),
    }
}
