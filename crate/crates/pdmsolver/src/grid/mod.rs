//! Uniform-grid sampling, cumulative quadrature, finite differences and an
//! independent Runge-Kutta oracle for the mass-dependent Schrodinger ODE.
//!
//! Everything downstream moves through [`Samples`]: a real field on a
//! uniform [`Grid`] with a per-point validity mask. Isolated domain
//! failures mask points instead of aborting; norms and residuals then run
//! over the valid subset.

mod fd;
mod ode;
mod quadrature;

pub use fd::DerivOrder;
pub use ode::{ode_oracle, OdeSolution};

use crate::expr::{EvalError, Expr, Params};

/// Fraction of invalid points above which a sampled profile is rejected.
const MAX_INVALID_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("grid bounds must satisfy x_min < x_max (got {x_min} .. {x_max})")]
    InvalidBounds { x_min: f64, x_max: f64 },
    #[error("grid n must be odd and at least 9 (got {n})")]
    BadPointCount { n: usize },
    #[error("profile unusable on this grid: {invalid} of {total} points invalid (first failure: {first})")]
    TooManyInvalid {
        invalid: usize,
        total: usize,
        first: String,
    },
    #[error("operation requires fully valid samples ({invalid} invalid points present)")]
    InvalidPointsPresent { invalid: usize },
    #[error("unbound parameter `{0}`")]
    UnboundParam(String),
    #[error("initial-value integration diverged at grid index {last_valid} (|psi| > 1e300)")]
    Diverged { last_valid: usize },
    #[error("mass must be strictly positive for the ODE oracle (m({x}) = {value})")]
    NonPositiveMass { x: f64, value: f64 },
}

/// Uniform 1D grid. `n` is odd and at least 9 so composite Simpson pairing
/// and the five/six-point boundary stencils always apply.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Grid, GridError> {
        if !x_min.is_finite() || !x_max.is_finite() || x_min >= x_max {
            return Err(GridError::InvalidBounds { x_min, x_max });
        }
        if n < 9 || n.is_multiple_of(2) {
            return Err(GridError::BadPointCount { n });
        }
        Ok(Grid { x_min, x_max, n })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing h = (x_max - x_min)/(n - 1).
    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    /// Abscissa of point `i`.
    pub fn x(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        self.x_min + self.spacing() * i as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }
}

/// A real-valued field sampled on a [`Grid`], with a validity mask.
/// Masked-invalid points carry the canonical value 0.0 so that emitted
/// artifacts stay byte-deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    grid: Grid,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl Samples {
    pub fn new(grid: Grid, values: Vec<f64>) -> Samples {
        assert_eq!(values.len(), grid.len(), "values.len() must equal grid.n");
        let mask = vec![true; values.len()];
        Samples { grid, values, mask }
    }

    pub fn constant(grid: Grid, value: f64) -> Samples {
        Samples::new(grid, vec![value; grid.len()])
    }

    /// Build from a plain function of x (used heavily in tests).
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Samples {
        let values = grid.points().map(f).collect();
        Samples::new(grid, values)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.mask[i]
    }

    /// Mark point `i` invalid. Invalid points always hold 0.0.
    pub fn invalidate(&mut self, i: usize) {
        self.mask[i] = false;
        self.values[i] = 0.0;
    }

    /// Overwrite the value at a (valid) point.
    pub(crate) fn set_value(&mut self, i: usize, v: f64) {
        self.values[i] = v;
    }

    pub fn invalid_count(&self) -> usize {
        self.mask.iter().filter(|m| !**m).count()
    }

    pub fn is_fully_valid(&self) -> bool {
        self.mask.iter().all(|m| *m)
    }

    pub fn valid_fraction(&self) -> f64 {
        1.0 - self.invalid_count() as f64 / self.len() as f64
    }

    fn require_fully_valid(&self) -> Result<(), GridError> {
        let invalid = self.invalid_count();
        if invalid == 0 {
            Ok(())
        } else {
            Err(GridError::InvalidPointsPresent { invalid })
        }
    }

    /// Max |value| over valid points; 0.0 when nothing is valid.
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.mask)
            .filter(|(_, m)| **m)
            .fold(0.0f64, |acc, (v, _)| acc.max(v.abs()))
    }

    /// Pointwise map over valid points; invalid points stay invalid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Samples {
        let mut out = self.clone();
        for i in 0..out.len() {
            if out.mask[i] {
                out.values[i] = f(out.values[i]);
            }
        }
        out
    }

    /// Pointwise combination; a point is valid only if valid in both.
    /// Panics if the grids differ (programming error by contract).
    pub fn zip_with(&self, other: &Samples, f: impl Fn(f64, f64) -> f64) -> Samples {
        assert_eq!(
            self.grid, other.grid,
            "arithmetic between Samples requires identical grids"
        );
        let mut values = Vec::with_capacity(self.len());
        let mut mask = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let ok = self.mask[i] && other.mask[i];
            mask.push(ok);
            values.push(if ok { f(self.values[i], other.values[i]) } else { 0.0 });
        }
        Samples {
            grid: self.grid,
            values,
            mask,
        }
    }

    pub fn scale(&self, c: f64) -> Samples {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Samples) -> Samples {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Samples) -> Samples {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Samples) -> Samples {
        self.zip_with(other, |a, b| a * b)
    }

    /// Cumulative integral anchored at `base_index`: the returned field F
    /// satisfies F(x_i) ~ integral of self from x_base to x_i, with
    /// F(x_base) = 0 exactly. Composite Simpson on point pairs with a
    /// three-point correction on the trailing half-interval; fourth-order
    /// accurate for smooth integrands.
    pub fn cumulative_integral(&self, base_index: usize) -> Result<Samples, GridError> {
        quadrature::cumulative(self, base_index)
    }

    /// Definite integral over the whole grid (composite Simpson).
    pub fn integral(&self) -> Result<f64, GridError> {
        quadrature::definite(self)
    }

    /// Finite-difference derivative: 4th-order central stencils in the
    /// interior, one-sided 4th-order at the boundaries. Requires fully
    /// valid samples.
    pub fn derivative_fd(&self, order: DerivOrder) -> Result<Samples, GridError> {
        self.require_fully_valid()?;
        Ok(fd::derivative_masked(self, order))
    }

    /// Mask-aware finite differences: points whose stencil touches an
    /// invalid point are masked in the output instead of failing.
    pub fn derivative_fd_masked(&self, order: DerivOrder) -> Samples {
        fd::derivative_masked(self, order)
    }
}

/// Sample an expression on a grid. Domain errors at isolated points mask
/// those points; more than 10% invalid rejects the profile. Unbound
/// parameters always fail.
pub fn sample(expr: &Expr, grid: Grid, params: &Params) -> Result<Samples, GridError> {
    let mut values = Vec::with_capacity(grid.len());
    let mut mask = Vec::with_capacity(grid.len());
    let mut invalid = 0usize;
    let mut first_failure: Option<String> = None;
    for x in grid.points() {
        match expr.eval(x, params) {
            Ok(v) => {
                values.push(v);
                mask.push(true);
            }
            Err(EvalError::UnboundParam(name)) => return Err(GridError::UnboundParam(name)),
            Err(err) => {
                invalid += 1;
                if first_failure.is_none() {
                    first_failure = Some(format!("x = {x}: {err}"));
                }
                values.push(0.0);
                mask.push(false);
            }
        }
    }
    if invalid as f64 > MAX_INVALID_FRACTION * grid.len() as f64 {
        return Err(GridError::TooManyInvalid {
            invalid,
            total: grid.len(),
            first: first_failure.unwrap_or_default(),
        });
    }
    Ok(Samples {
        grid,
        values,
        mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.0, 1.0, 9).is_ok());
        assert!(matches!(
            Grid::new(1.0, 0.0, 9),
            Err(GridError::InvalidBounds { .. })
        ));
        assert!(matches!(
            Grid::new(0.0, 1.0, 8),
            Err(GridError::BadPointCount { n: 8 })
        ));
        assert!(matches!(
            Grid::new(0.0, 1.0, 7),
            Err(GridError::BadPointCount { n: 7 })
        ));
    }

    #[test]
    fn sample_parabola_on_nine_points() {
        let grid = Grid::new(-1.0, 1.0, 9).unwrap();
        let s = sample(&parse("x^2").unwrap(), grid, &Params::new()).unwrap();
        let want = [1.0, 0.5625, 0.25, 0.0625, 0.0, 0.0625, 0.25, 0.5625, 1.0];
        assert!(s.is_fully_valid());
        for (got, want) in s.values().iter().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn sample_log_rejects_half_negative_grid() {
        let grid = Grid::new(-1.0, 1.0, 9).unwrap();
        let err = sample(&parse("ln(x)").unwrap(), grid, &Params::new()).unwrap_err();
        assert!(matches!(err, GridError::TooManyInvalid { .. }));
    }

    #[test]
    fn sample_sech_squared_peaks_at_origin() {
        let grid = Grid::new(-4.0, 4.0, 4001).unwrap();
        let s = sample(&parse("sech(x)^2").unwrap(), grid, &Params::new()).unwrap();
        assert!(s.is_fully_valid());
        let max = s.max_abs();
        assert!((max - 1.0).abs() < 1e-15);
        assert_eq!(s.value(2000), 1.0); // x = 0 is the middle point
    }

    #[test]
    fn sample_masks_isolated_singularity() {
        // 1/x on a grid that contains x = 0 exactly: one masked point
        let grid = Grid::new(-1.0, 1.0, 21).unwrap();
        let s = sample(&parse("1/x").unwrap(), grid, &Params::new()).unwrap();
        assert_eq!(s.invalid_count(), 1);
        assert!(!s.is_valid(10));
        assert_eq!(s.value(10), 0.0);
    }

    #[test]
    fn zip_with_masks_union() {
        let grid = Grid::new(-1.0, 1.0, 21).unwrap();
        let a = sample(&parse("1/x").unwrap(), grid, &Params::new()).unwrap();
        let b = Samples::constant(grid, 2.0);
        let c = a.mul(&b);
        assert_eq!(c.invalid_count(), 1);
        assert_eq!(c.value(0), -2.0);
    }
}
