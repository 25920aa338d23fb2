//! Uniform square grids on the z-plane.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Core-size margin kept between the zeros of H and the edge of the box.
pub const ROOT_MARGIN: f64 = 3.0;

/// Square [−L, L]² sampled with N points per side (N odd, so z = 0 is a node).
///
/// Node (i, j) sits at x = −L + i h, y = −L + j h and is stored at `i * N + j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    half_width: f64,
    points: usize,
}

impl GridSpec {
    pub const DEFAULT_POINTS: usize = 513;

    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid half-width must be positive, got {half_width}"
            )));
        }
        if points < 5 || points.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "points per side must be odd and >= 5, got {points}"
            )));
        }
        Ok(GridSpec {
            half_width,
            points,
        })
    }

    /// Default box for a set of zeros: L = max(6, 2 max|root| + 3).
    pub fn for_roots(roots: &[C64], points: usize) -> Result<Self> {
        let rmax = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Self::new((2.0 * rmax + ROOT_MARGIN).max(6.0), points)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points * self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn point(&self, i: usize, j: usize) -> C64 {
        C64::new(self.coord(i), self.coord(j))
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.points + j
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.points - 1 || j == self.points - 1
    }

    /// Trapezoidal quadrature weight of node (i, j), including h².
    pub fn trapezoid_weight(&self, i: usize, j: usize) -> f64 {
        let h = self.spacing();
        let edge = |k: usize| if k == 0 || k == self.points - 1 { 0.5 } else { 1.0 };
        edge(i) * edge(j) * h * h
    }

    /// Every node position in storage order.
    pub fn points_iter(&self) -> impl Iterator<Item = C64> + '_ {
        (0..self.points).flat_map(move |i| (0..self.points).map(move |j| self.point(i, j)))
    }

    /// Checks that every zero lies within |Re z|, |Im z| ≤ L − 3.
    pub fn check_margin(&self, zeros: &[C64]) -> Result<()> {
        let limit = self.half_width - ROOT_MARGIN;
        for z in zeros {
            if z.re.abs() > limit || z.im.abs() > limit {
                return Err(Error::Domain(format!(
                    "zero {z} is closer than {ROOT_MARGIN} to the edge of the box of half-width {}",
                    self.half_width
                )));
            }
        }
        Ok(())
    }
}
