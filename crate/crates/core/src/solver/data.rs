use crate::error::{Error, Result};
use crate::grid::{Frame, Grid1D, Parity, ScalarField, WaveState};
use std::sync::Arc;

/// Tolerance for the oddness check on user tables.
const ODD_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFamily {
    OddGaussianBump,
    OddVelocityBump,
    CustomTable,
}

/// Samples of `(v1, v2)` at symmetric full-line abscissae, linearly
/// interpolated onto the grid and zero beyond the last sample.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomTable {
    pub x: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

impl CustomTable {
    fn check(&self) -> Result<()> {
        let n = self.x.len();
        if n < 3 || self.v1.len() != n || self.v2.len() != n {
            return Err(Error::InvalidParameter(
                "custom table needs >= 3 rows with x, v1 and v2".into(),
            ));
        }
        if self.x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("custom table x must increase".into()));
        }
        for i in 0..n {
            let j = n - 1 - i;
            if (self.x[i] + self.x[j]).abs() > ODD_TOLERANCE * (1.0 + self.x[i].abs()) {
                return Err(Error::InvalidParameter(
                    "custom table x must be symmetric about 0".into(),
                ));
            }
            for col in [&self.v1, &self.v2] {
                if (col[i] + col[j]).abs() > ODD_TOLERANCE * (1.0 + col[i].abs()) {
                    return Err(Error::NotOdd(col[i] + col[j]));
                }
            }
        }
        Ok(())
    }

    fn support_radius(&self) -> f64 {
        self.x.last().copied().unwrap_or(0.0)
    }

    fn interpolate(&self, col: &[f64], x: f64) -> f64 {
        let n = self.x.len();
        if x < self.x[0] || x > self.x[n - 1] {
            return 0.0;
        }
        let k = self.x.partition_point(|&xi| xi <= x).clamp(1, n - 1);
        let (x0, x1) = (self.x[k - 1], self.x[k]);
        let t = (x - x0) / (x1 - x0);
        col[k - 1] * (1.0 - t) + col[k] * t
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialDataSpec {
    pub family: DataFamily,
    pub amplitude: f64,
    pub width: f64,
    pub center_offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<CustomTable>,
}

impl Default for InitialDataSpec {
    fn default() -> Self {
        Self::gaussian(0.05, 1.0)
    }
}

impl InitialDataSpec {
    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        Self {
            family: DataFamily::OddGaussianBump,
            amplitude,
            width,
            center_offset: 0.0,
            table: None,
        }
    }

    pub fn velocity(amplitude: f64, width: f64) -> Self {
        Self {
            family: DataFamily::OddVelocityBump,
            ..Self::gaussian(amplitude, width)
        }
    }

    pub fn table(table: CustomTable) -> Self {
        Self {
            family: DataFamily::CustomTable,
            amplitude: 1.0,
            width: 1.0,
            center_offset: 0.0,
            table: Some(table),
        }
    }

    pub fn with_center(mut self, center_offset: f64) -> Self {
        self.center_offset = center_offset;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() || !self.center_offset.is_finite() {
            return Err(Error::InvalidParameter("amplitude and center must be finite".into()));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::InvalidParameter("width must be positive".into()));
        }
        match (self.family, &self.table) {
            (DataFamily::CustomTable, Some(t)) => t.check(),
            (DataFamily::CustomTable, None) => Err(Error::InvalidParameter(
                "custom_table family needs a table".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Radius beyond which the data is below roundoff.
    pub fn support_radius(&self) -> f64 {
        match (self.family, &self.table) {
            (DataFamily::CustomTable, Some(t)) => t.support_radius(),
            _ => self.center_offset.abs() + 7.0 * self.width,
        }
    }

    /// The odd bump profile, before scaling by the amplitude.
    pub fn profile(&self, x: f64) -> f64 {
        let w2 = self.width * self.width;
        let c = self.center_offset;
        if c == 0.0 {
            x.sinh() * (-x * x / w2).exp()
        } else {
            (-(x - c).powi(2) / w2).exp() - (-(x + c).powi(2) / w2).exp()
        }
    }
}

/// Odd `(v1, v2)` in the v frame at `t = 0`.
pub fn make_initial_data(spec: &InitialDataSpec, grid: Arc<Grid1D>) -> Result<WaveState> {
    spec.validate()?;
    let a = spec.amplitude;
    let (pos, vel) = match spec.family {
        DataFamily::OddGaussianBump => (
            ScalarField::from_fn(grid.clone(), Parity::Odd, |x| a * spec.profile(x))?,
            ScalarField::zeros(grid.clone(), Parity::Odd),
        ),
        DataFamily::OddVelocityBump => (
            ScalarField::zeros(grid.clone(), Parity::Odd),
            ScalarField::from_fn(grid.clone(), Parity::Odd, |x| a * spec.profile(x))?,
        ),
        DataFamily::CustomTable => {
            let t = spec.table.as_ref().expect("validated");
            (
                ScalarField::from_fn(grid.clone(), Parity::Odd, |x| a * t.interpolate(&t.v1, x))?,
                ScalarField::from_fn(grid.clone(), Parity::Odd, |x| a * t.interpolate(&t.v2, x))?,
            )
        }
    };
    let mut state = WaveState::new(Frame::V, pos, vel, 0.0)?;
    let n = grid.n_points();
    state.pos.values_mut()[n - 1] = 0.0;
    state.vel.values_mut()[n - 1] = 0.0;
    Ok(state)
}

/// `∫ v1_x^2 + cosh^2 x v2^2 + v1^2 dx` over the full line, i.e. the
/// r-form `∫ (v2^2 + v1_r^2 + v1^2/(1+r^2)) (1+r^2)^{1/2} dr`.
/// Gradients are cell differences; the rest is the trapezoid rule.
pub fn weighted_data_norm(state: &WaveState) -> f64 {
    let grid = state.grid();
    let dx = grid.spacing();
    let v1 = state.pos.values();
    let v2 = state.vel.values();
    let nodal: Vec<f64> = grid
        .node_x()
        .iter()
        .zip(v1.iter().zip(v2))
        .map(|(&x, (&a, &b))| {
            let c = x.cosh();
            c * c * b * b + a * a
        })
        .collect();
    let grad: f64 = v1.windows(2).map(|w| (w[1] - w[0]).powi(2) / dx).sum();
    grid.integrate_even(&nodal) + 2.0 * grad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CoordinateKind;

    fn grid() -> Arc<Grid1D> {
        Arc::new(Grid1D::new(CoordinateKind::XUniform, 15.0, 0.01).unwrap())
    }

    #[test]
    fn zero_amplitude_gives_zero_state() {
        for spec in [InitialDataSpec::gaussian(0.0, 1.0), InitialDataSpec::velocity(0.0, 1.0)] {
            let s = make_initial_data(&spec, grid()).unwrap();
            assert_eq!(s.pos.max_abs(), 0.0);
            assert_eq!(s.vel.max_abs(), 0.0);
            assert_eq!(weighted_data_norm(&s), 0.0);
        }
    }

    #[test]
    fn origin_is_exactly_zero() {
        let table = CustomTable {
            x: vec![-1.0, 0.0, 1.0],
            v1: vec![-0.5, 0.0, 0.5],
            v2: vec![0.25, 0.0, -0.25],
        };
        for spec in [
            InitialDataSpec::gaussian(0.3, 1.2),
            InitialDataSpec::gaussian(0.3, 0.7).with_center(2.5),
            InitialDataSpec::velocity(0.2, 1.0).with_center(1.0),
            InitialDataSpec::table(table),
        ] {
            let s = make_initial_data(&spec, grid()).unwrap();
            assert_eq!(s.pos.values()[0], 0.0);
            assert_eq!(s.vel.values()[0], 0.0);
            assert!(s.is_odd());
        }
    }

    #[test]
    fn norm_is_quadratic_in_amplitude() {
        for base in [InitialDataSpec::gaussian(1.0, 1.0), InitialDataSpec::velocity(1.0, 0.8)] {
            let n1 = weighted_data_norm(&make_initial_data(&base, grid()).unwrap());
            let n3 = weighted_data_norm(
                &make_initial_data(&InitialDataSpec { amplitude: 3.0, ..base.clone() }, grid()).unwrap(),
            );
            assert!(n1 > 0.0);
            assert!((n3 / n1 - 9.0).abs() < 1e-12);
        }
    }

    #[test]
    fn velocity_norm_matches_quadrature_of_closed_form() {
        // v2 = exp(-(x-c)^2) - exp(-(x+c)^2) with large c: norm ≈ 2∫cosh^2 x e^{-2(x-c)^2} dx
        let c = 4.0;
        let s = make_initial_data(&InitialDataSpec::velocity(1.0, 1.0).with_center(c), grid()).unwrap();
        let pi = std::f64::consts::PI;
        // ∫cosh^2 x e^{-2(x-c)^2} = (1/4)∫(e^{2x}+e^{-2x}+2)e^{-2(x-c)^2}
        let g = |k: f64| (pi / 2.0).sqrt() * (k * c + k * k / 8.0).exp();
        let exact = 2.0 * 0.25 * (g(2.0) + g(-2.0) + 2.0 * (pi / 2.0).sqrt());
        let n = weighted_data_norm(&s);
        assert!((n / exact - 1.0).abs() < 1e-6, "{n} {exact}");
    }

    #[test]
    fn non_odd_table_rejected() {
        let t = CustomTable {
            x: vec![-1.0, 0.0, 1.0],
            v1: vec![0.5, 0.0, 0.5],
            v2: vec![0.0; 3],
        };
        let err = make_initial_data(&InitialDataSpec::table(t), grid()).unwrap_err();
        assert!(matches!(err, Error::NotOdd(_)));
        let t = CustomTable {
            x: vec![-1.0, 0.0, 1.0],
            v1: vec![-0.5, 0.1, 0.5],
            v2: vec![0.0; 3],
        };
        assert!(make_initial_data(&InitialDataSpec::table(t), grid()).is_err());
    }

    #[test]
    fn invalid_width_rejected() {
        assert!(make_initial_data(&InitialDataSpec::gaussian(1.0, 0.0), grid()).is_err());
    }
}
