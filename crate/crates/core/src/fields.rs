//! Uniform 1-D grids and real fields sampled on them.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Uniform grid with both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::InvalidGrid(format!(
                "need finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {n_points}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }
}

/// Real values on a [`Grid`] at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    time: f64,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::FieldMismatch(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::FieldMismatch(format!(
                "non-finite value {} at x = {}",
                values[i],
                grid.point(i)
            )));
        }
        Ok(Self { grid, values, time })
    }

    /// Samples `f(x, t)` at every grid point, in parallel.
    pub fn sample<F>(grid: Grid, time: f64, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.point(i), time))
            .collect();
        Self::new(grid, values, time)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Largest absolute value.
    pub fn peak(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoid-rule integral over the whole grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.grid.dx())
    }

    /// Linear interpolation; `None` outside the grid.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        if !self.grid.contains(x) {
            return None;
        }
        let s = (x - self.grid.x_min()) / self.grid.dx();
        let i = (s.floor() as usize).min(self.grid.len() - 2);
        let w = s - i as f64;
        Some(self.values[i] * (1.0 - w) + self.values[i + 1] * w)
    }

    /// Trapezoid integral of the piecewise-linear interpolant over `[a, b]`,
    /// clipped to the grid. Returns a negative value when `b < a`.
    pub fn integral_between(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integral_between(b, a);
        }
        let a = a.max(self.grid.x_min());
        let b = b.min(self.grid.x_max());
        if b <= a {
            return 0.0;
        }
        let dx = self.grid.dx();
        let cell = |x: f64| {
            (((x - self.grid.x_min()) / dx).floor() as usize).min(self.grid.len() - 2)
        };
        let (ia, ib) = (cell(a), cell(b));
        let va = self.value_at(a).unwrap_or(0.0);
        let vb = self.value_at(b).unwrap_or(0.0);
        if ia == ib {
            return 0.5 * (va + vb) * (b - a);
        }
        let mut sum = 0.5 * (va + self.values[ia + 1]) * (self.grid.point(ia + 1) - a);
        for i in ia + 1..ib {
            sum += 0.5 * (self.values[i] + self.values[i + 1]) * dx;
        }
        sum + 0.5 * (self.values[ib] + vb) * (b - self.grid.point(ib))
    }

    /// Rescales so the trapezoid integral is one.
    pub fn normalized(&self) -> Result<Self> {
        let mass = self.integral();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::ZeroField);
        }
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v / mass).collect(),
            time: self.time,
        })
    }
}

pub(crate) fn trapezoid(values: &[f64], dx: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => dx * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points() {
        let g = Grid::new(-1.0, 1.0, 3).unwrap();
        assert_eq!(g.points().collect::<Vec<_>>(), vec![-1.0, 0.0, 1.0]);
        let g = Grid::new(0.0, 10.0, 11).unwrap();
        assert_eq!(g.dx(), 1.0);
        assert_eq!(g.point(10), 10.0);
    }

    #[test]
    fn grid_rejects_empty_interval() {
        assert!(Grid::new(1.0, 1.0, 2).is_err());
        assert!(Grid::new(0.0, 1.0, 1).is_err());
        assert!(Grid::new(2.0, 1.0, 5).is_err());
    }

    #[test]
    fn grid_point_rounding() {
        let g = Grid::new(-15.0, 15.0, 4096).unwrap();
        let scale = 15.0 * f64::EPSILON;
        for i in 0..g.len() {
            let direct = -15.0 + i as f64 * (30.0 / 4095.0);
            assert!((g.point(i) - direct).abs() <= 2.0 * scale);
        }
        assert!(g.points().zip(g.points().skip(1)).all(|(a, b)| b > a));
    }

    #[test]
    fn field_validates_length_and_finiteness() {
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        assert!(ScalarField::new(g, vec![1.0, 2.0], 0.0).is_err());
        assert!(ScalarField::new(g, vec![1.0, f64::NAN, 0.0], 0.0).is_err());
    }

    #[test]
    fn partial_integrals_add_up() {
        let g = Grid::new(-3.0, 3.0, 61).unwrap();
        let f = ScalarField::sample(g, 0.0, |x, _| 1.0 + x * x).unwrap();
        let whole = f.integral();
        let split = f.integral_between(-3.0, 0.37) + f.integral_between(0.37, 3.0);
        assert!((whole - split).abs() < 1e-12);
        // exact for linear pieces inside one cell
        let lin = ScalarField::sample(g, 0.0, |x, _| 2.0 * x).unwrap();
        assert!((lin.integral_between(0.01, 0.07) - (0.07f64.powi(2) - 0.01f64.powi(2))).abs() < 1e-14);
        assert_eq!(f.integral_between(0.5, 0.5), 0.0);
    }

    #[test]
    fn zero_field_cannot_normalize() {
        let g = Grid::new(0.0, 1.0, 5).unwrap();
        let f = ScalarField::new(g, vec![0.0; 5], 0.0).unwrap();
        assert_eq!(f.normalized().unwrap_err(), Error::ZeroField);
    }
}
