//! Space forms `N^{m+1}(c)` realized inside flat coordinate spaces.
//!
//! * `c = 0`: Euclidean `ℝ^{m+1}`.
//! * `c = 1`: the unit sphere in `ℝ^{m+2}`.
//! * `c = −1`: the upper sheet of `⟨x,x⟩ = −1` in Minkowski `ℝ^{m+2}_1`,
//!   with the time-like coordinate first.

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Curvature {
    Hyperbolic,
    Flat,
    Spherical,
}

impl Curvature {
    pub fn value(self) -> f64 {
        match self {
            Curvature::Hyperbolic => -1.0,
            Curvature::Flat => 0.0,
            Curvature::Spherical => 1.0,
        }
    }

    pub fn from_value(c: f64) -> Result<Curvature> {
        match c {
            -1.0 => Ok(Curvature::Hyperbolic),
            0.0 => Ok(Curvature::Flat),
            1.0 => Ok(Curvature::Spherical),
            _ => Err(Error::Spec(format!("curvature must be -1, 0 or 1, got {c}"))),
        }
    }
}

const POINT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientSpace {
    curvature: Curvature,
    hypersurface_dim: usize,
}

impl AmbientSpace {
    pub fn new(curvature: Curvature, hypersurface_dim: usize) -> Result<AmbientSpace> {
        if hypersurface_dim < 2 {
            return Err(Error::Spec(format!(
                "hypersurface dimension must be at least 2, got {hypersurface_dim}"
            )));
        }
        Ok(AmbientSpace {
            curvature,
            hypersurface_dim,
        })
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    pub fn c(&self) -> f64 {
        self.curvature.value()
    }

    pub fn hypersurface_dim(&self) -> usize {
        self.hypersurface_dim
    }

    pub fn ambient_coord_dim(&self) -> usize {
        match self.curvature {
            Curvature::Flat => self.hypersurface_dim + 1,
            _ => self.hypersurface_dim + 2,
        }
    }

    /// Diagonal of the flat model metric.
    pub fn signature(&self, k: usize) -> f64 {
        if self.curvature == Curvature::Hyperbolic && k == 0 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn ambient_inner(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        let n = self.ambient_coord_dim();
        if u.len() != n || v.len() != n {
            return arg(format!(
                "ambient vectors must have length {n}, got {} and {}",
                u.len(),
                v.len()
            ));
        }
        Ok(u
            .iter()
            .zip(v)
            .enumerate()
            .map(|(k, (a, b))| self.signature(k) * a * b)
            .sum())
    }

    /// Whether `p` lies on the model manifold (tolerance 1e-10).
    pub fn validate_point(&self, p: &[f64]) -> bool {
        let Ok(q) = self.ambient_inner(p, p) else {
            return false;
        };
        match self.curvature {
            Curvature::Flat => true,
            Curvature::Spherical => (q - 1.0).abs() <= POINT_TOL,
            Curvature::Hyperbolic => (q + 1.0).abs() <= POINT_TOL && p[0] > 0.0,
        }
    }
}
