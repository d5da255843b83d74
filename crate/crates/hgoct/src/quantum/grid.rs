use num_traits::Float;

use crate::{scalar, Real};

/// Uniform periodic spatial grid on the half-open interval `[x_min, x_max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid<R: Real> {
    pub x_min: R,
    pub x_max: R,
    pub n_x: usize,
}

impl<R: Real> SpatialGrid<R> {
    pub fn new(x_min: R, x_max: R, n_x: usize) -> Self {
        assert!(n_x > 0 && x_max > x_min);
        Self { x_min, x_max, n_x }
    }

    pub fn spacing(&self) -> R {
        (self.x_max - self.x_min) / scalar::<R>(self.n_x as f64)
    }

    /// Grid point `x_j = x_min + j * spacing`.
    pub fn point(&self, j: usize) -> R {
        self.x_min + scalar::<R>(j as f64) * self.spacing()
    }

    pub fn points(&self) -> Vec<R> {
        (0..self.n_x).map(|j| self.point(j)).collect()
    }

    /// Sample a function of position on the grid.
    pub fn sample(&self, f: impl Fn(R) -> R) -> Vec<R> {
        self.points().into_iter().map(f).collect()
    }

    /// Wavenumbers in FFT ordering: `2*pi*m / (n_x * spacing)` with
    /// `m = 0, 1, .., n/2, -(n/2-1), .., -1`.
    pub fn wavenumbers(&self) -> Vec<R> {
        let dk = scalar::<R>(2.0) * R::PI() / (self.x_max - self.x_min);
        (0..self.n_x)
            .map(|j| {
                let m = if j <= self.n_x / 2 {
                    j as f64
                } else {
                    j as f64 - self.n_x as f64
                };
                scalar::<R>(m) * dk
            })
            .collect()
    }
}

/// Midpoint time grid on `[0, T]`: nodes `t_j = (j + 1/2) * dt`, `dt = T / n_t`.
///
/// The midpoint placement pairs exactly with the type-II cosine transform
/// used on the conjugate frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid<R: Real> {
    pub total_time: R,
    pub n_t: usize,
}

impl<R: Real> TimeGrid<R> {
    pub fn new(total_time: R, n_t: usize) -> Self {
        assert!(n_t > 0 && total_time > R::zero());
        Self { total_time, n_t }
    }

    pub fn dt(&self) -> R {
        self.total_time / scalar::<R>(self.n_t as f64)
    }

    /// Node `t_j = (j + 1/2) * dt`, strictly inside `(0, T)`.
    pub fn node(&self, j: usize) -> R {
        (scalar::<R>(j as f64) + scalar::<R>(0.5)) * self.dt()
    }

    pub fn nodes(&self) -> Vec<R> {
        (0..self.n_t).map(|j| self.node(j)).collect()
    }

    /// Index of the node nearest to `t` (clamped to the grid).
    pub fn nearest_node(&self, t: R) -> usize {
        let x = t / self.dt() - scalar::<R>(0.5);
        let j = Float::round(x).to_f64().unwrap_or(0.0).max(0.0) as usize;
        j.min(self.n_t - 1)
    }
}
