//! Half-line discretizations and the field containers living on them.
//!
//! Fields in the odd sector are stored on `[0, X_max]` only; the node at the
//! origin carries the Dirichlet zero that makes the parity exact. Full-line
//! integrals of even integrands are twice the half-line trapezoid.

use crate::error::{Error, Result};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateKind {
    /// Uniform nodes in `x = arcsinh r`.
    XUniform,
    /// Same nodes, but the field is interpreted as a function of `r = sinh x`.
    RMapped,
}

/// Uniform half-line grid `x_i = i dx`, `i = 0..n_points`, with the mapped
/// nodes `r_i = sinh x_i` and Jacobian `dr/dx = cosh x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    coordinate_kind: CoordinateKind,
    half_extent: f64,
    spacing: f64,
    node_x: Vec<f64>,
    node_r: Vec<f64>,
    jacobian: Vec<f64>,
}

impl Grid1D {
    pub const MIN_POINTS: usize = 16;

    /// Grid on `[0, half_extent]` with spacing as close to `dx` as possible
    /// while landing exactly on `half_extent`.
    pub fn new(kind: CoordinateKind, half_extent: f64, dx: f64) -> Result<Self> {
        if !(half_extent > 0.0 && half_extent.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half extent must be positive, got {half_extent}"
            )));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "spacing must be positive, got {dx}"
            )));
        }
        let cells = (half_extent / dx).round().max(1.0) as usize;
        Self::with_points(kind, half_extent, cells + 1)
    }

    pub fn with_points(kind: CoordinateKind, half_extent: f64, n_points: usize) -> Result<Self> {
        if n_points < Self::MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {} points, got {n_points}",
                Self::MIN_POINTS
            )));
        }
        if !(half_extent > 0.0 && half_extent.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half extent must be positive, got {half_extent}"
            )));
        }
        let spacing = half_extent / (n_points - 1) as f64;
        let node_x: Vec<f64> = (0..n_points).map(|i| i as f64 * spacing).collect();
        let node_r: Vec<f64> = node_x.iter().map(|x| x.sinh()).collect();
        let jacobian: Vec<f64> = node_x.iter().map(|x| x.cosh()).collect();
        Ok(Self {
            coordinate_kind: kind,
            half_extent,
            spacing,
            node_x,
            node_r,
            jacobian,
        })
    }

    pub fn coordinate_kind(&self) -> CoordinateKind {
        self.coordinate_kind
    }
    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }
    pub fn n_points(&self) -> usize {
        self.node_x.len()
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn node_x(&self) -> &[f64] {
        &self.node_x
    }
    pub fn node_r(&self) -> &[f64] {
        &self.node_r
    }
    pub fn jacobian(&self) -> &[f64] {
        &self.jacobian
    }

    /// Index of the last node with `x <= x_max`.
    pub fn index_at_or_below(&self, x_max: f64) -> usize {
        let i = (x_max / self.spacing + 1e-9).floor();
        (i.max(0.0) as usize).min(self.n_points() - 1)
    }

    /// Full-line trapezoid of an even integrand sampled on the half line.
    pub fn integrate_even(&self, integrand: &[f64]) -> f64 {
        2.0 * self.trapezoid(integrand)
    }

    /// Half-line trapezoid `∫_0^{X_max} g dx`.
    pub fn trapezoid(&self, integrand: &[f64]) -> f64 {
        trapezoid_uniform(integrand, self.spacing)
    }
}

pub(crate) fn trapezoid_uniform(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Odd,
    Even,
    None,
}

/// Values of one scalar function on the half-line nodes of a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<Grid1D>,
    values: Vec<f64>,
    parity: Parity,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid1D>, values: Vec<f64>, parity: Parity) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                found: values.len(),
            });
        }
        if parity == Parity::Odd && values[0] != 0.0 {
            return Err(Error::NotOdd(values[0]));
        }
        Ok(Self {
            grid,
            values,
            parity,
        })
    }

    pub fn zeros(grid: Arc<Grid1D>, parity: Parity) -> Self {
        let n = grid.n_points();
        Self {
            grid,
            values: vec![0.0; n],
            parity,
        }
    }

    pub fn from_fn(grid: Arc<Grid1D>, parity: Parity, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values: Vec<f64> = grid.node_x().iter().map(|&x| f(x)).collect();
        if parity == Parity::Odd {
            values[0] = 0.0;
        }
        Self::new(grid, values, parity)
    }

    pub fn grid(&self) -> &Arc<Grid1D> {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn parity(&self) -> Parity {
        self.parity
    }
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// `(v1, v2)`: perturbation of the kink, `u = H + v1`.
    V,
    /// `(w1, w2) = (1+r^2)^{1/4} (v1, v2)`.
    W,
    /// `(u1, u2) = S_eps (w1, w2)`.
    U,
}

/// A position/velocity pair at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub frame: Frame,
    pub pos: ScalarField,
    pub vel: ScalarField,
    pub time: f64,
}

impl WaveState {
    pub fn new(frame: Frame, pos: ScalarField, vel: ScalarField, time: f64) -> Result<Self> {
        if !Arc::ptr_eq(pos.grid(), vel.grid()) && pos.grid() != vel.grid() {
            return Err(Error::InvalidGrid(
                "position and velocity live on different grids".into(),
            ));
        }
        Ok(Self {
            frame,
            pos,
            vel,
            time,
        })
    }

    pub fn zero(frame: Frame, grid: Arc<Grid1D>) -> Self {
        Self {
            frame,
            pos: ScalarField::zeros(grid.clone(), Parity::Odd),
            vel: ScalarField::zeros(grid, Parity::Odd),
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<Grid1D> {
        self.pos.grid()
    }

    pub fn is_odd(&self) -> bool {
        self.pos.parity() == Parity::Odd
            && self.vel.parity() == Parity::Odd
            && self.pos.values()[0] == 0.0
            && self.vel.values()[0] == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants() {
        let g = Grid1D::new(CoordinateKind::XUniform, 20.0, 0.01).unwrap();
        assert_eq!(g.node_x()[0], 0.0);
        assert_eq!(g.n_points(), 2001);
        for w in g.node_x().windows(2) {
            assert!((w[1] - w[0] - g.spacing()).abs() < 1e-12);
        }
        for (r, j) in g.node_r().iter().zip(g.jacobian()) {
            assert!(((1.0 + r * r).sqrt() - j).abs() <= 1e-15 * j);
        }
    }

    #[test]
    fn too_few_points_rejected() {
        assert!(Grid1D::with_points(CoordinateKind::XUniform, 1.0, 15).is_err());
        assert!(Grid1D::new(CoordinateKind::XUniform, -1.0, 0.1).is_err());
    }

    #[test]
    fn odd_field_needs_zero_at_origin() {
        let g = Arc::new(Grid1D::new(CoordinateKind::XUniform, 1.0, 0.05).unwrap());
        let mut v = vec![0.0; g.n_points()];
        v[0] = 1e-3;
        assert!(matches!(
            ScalarField::new(g.clone(), v, Parity::Odd),
            Err(Error::NotOdd(_))
        ));
        let f = ScalarField::from_fn(g, Parity::Odd, |x| x.cos()).unwrap();
        assert_eq!(f.values()[0], 0.0);
    }

    #[test]
    fn trapezoid_of_linear_is_exact() {
        let g = Grid1D::new(CoordinateKind::XUniform, 2.0, 0.1).unwrap();
        let vals: Vec<f64> = g.node_x().iter().map(|x| 3.0 * x + 1.0).collect();
        assert!((g.trapezoid(&vals) - 8.0).abs() < 1e-12);
    }
}
