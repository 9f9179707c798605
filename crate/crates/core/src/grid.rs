//! Uniform periodic grids and nodal fields.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid size {0} must be a power of two and at least 16")]
    BadSize(usize),
    #[error("grid length must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("field has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field contains a non-finite value at node {0}")]
    NonFinite(usize),
}

/// `n` uniform nodes `x_j = origin + j * length / n` on one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n: usize,
    length: f64,
    origin: f64,
}

impl Grid1D {
    pub fn new(n: usize, length: f64) -> Result<Self, GridError> {
        Self::with_origin(n, length, 0.0)
    }

    pub fn with_origin(n: usize, length: f64, origin: f64) -> Result<Self, GridError> {
        if n < 16 || !n.is_power_of_two() {
            return Err(GridError::BadSize(n));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(GridError::BadLength(length));
        }
        Ok(Self { n, length, origin })
    }

    /// Smallest power-of-two grid with spacing exactly `h`, centred on zero
    /// and covering at least `[-half_extent, half_extent]`.
    pub fn centered_with_spacing(h: f64, half_extent: f64) -> Result<Self, GridError> {
        let needed = (2.0 * half_extent / h).ceil().max(16.0) as usize;
        let n = needed.next_power_of_two();
        let length = n as f64 * h;
        Self::with_origin(n, length, -0.5 * length)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.node(j))
    }

    /// Samples `f` at every node.
    pub fn sample<F: FnMut(f64) -> f64>(&self, mut f: F) -> Field {
        Field(self.nodes().map(&mut f).collect())
    }
}

/// Real nodal data aligned with a [`Grid1D`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field(pub Vec<f64>);

impl Field {
    pub fn zeros(n: usize) -> Self {
        Field(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check(&self, grid: &Grid1D) -> Result<(), GridError> {
        if self.0.len() != grid.n() {
            return Err(GridError::LengthMismatch { expected: grid.n(), got: self.0.len() });
        }
        match self.0.iter().position(|v| !v.is_finite()) {
            Some(j) => Err(GridError::NonFinite(j)),
            None => Ok(()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max_j |v_j + v_{n-j}|`: zero for data odd about both `x_0` and the
    /// half-period node.
    pub fn oddness_residual(&self) -> f64 {
        let n = self.0.len();
        (0..n).map(|j| (self.0[j] + self.0[(n - j) % n]).abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(Grid1D::new(8, 1.0), Err(GridError::BadSize(8)));
        assert_eq!(Grid1D::new(48, 1.0), Err(GridError::BadSize(48)));
        assert!(matches!(Grid1D::new(16, 0.0), Err(GridError::BadLength(_))));
    }

    #[test]
    fn centered_grid_has_exact_spacing() {
        let g = Grid1D::centered_with_spacing(1e-3, 1.1).unwrap();
        assert_eq!(g.n(), 4096);
        assert!((g.spacing() - 1e-3).abs() < 1e-18);
        assert!(g.node(0) <= -1.1 && g.node(g.n() - 1) >= 1.1 - 1e-3);
    }

    #[test]
    fn oddness_of_sine() {
        let g = Grid1D::new(32, 2.0 * std::f64::consts::PI).unwrap();
        let f = g.sample(f64::sin);
        assert!(f.oddness_residual() < 1e-14);
        let c = g.sample(f64::cos);
        assert!(c.oddness_residual() > 1.0);
    }

    #[test]
    fn field_check() {
        let g = Grid1D::new(16, 1.0).unwrap();
        assert!(Field::zeros(16).check(&g).is_ok());
        assert!(matches!(Field::zeros(15).check(&g), Err(GridError::LengthMismatch { .. })));
        let mut f = Field::zeros(16);
        f.0[3] = f64::NAN;
        assert_eq!(f.check(&g), Err(GridError::NonFinite(3)));
    }
}
