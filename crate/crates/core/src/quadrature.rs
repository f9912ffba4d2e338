//! Tensor-product quadrature against the Riemannian volume `√det g du`.
//!
//! Periodic axes use the equispaced trapezoid rule. Interval axes use
//! Gauss–Legendre. A polar axis of resolution `n` uses `n − 2`
//! Gauss–Legendre nodes on `[δ, π−δ]` plus one node on each excised edge:
//! near a pole the integrand behaves like `F(δ)(t/δ)^k`, so the cap of
//! width `δ` contributes `F(δ)·δ/(k+1)`.
//!
//! Node evaluation runs on the current rayon pool; sums are accumulated
//! in node order with Neumaier compensation, so results do not depend on
//! the thread count.

use rayon::prelude::*;

use crate::error::{arg, Error, Result};
use crate::hypersurface::{AxisKind, ChartMap, PointGeometry};
use crate::jets::MAX_ORDER;
use crate::tensor_calculus::{scalar_jet, ScalarFieldId};

pub const MIN_RESOLUTION: usize = 8;

/// Gauss–Legendre nodes and weights on `[−1, 1]`, by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// One-dimensional rule for an axis.
pub fn axis_rule(kind: AxisKind, lo: f64, hi: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let gl = |k: usize| {
        let (x, w) = gauss_legendre(k);
        (
            x.iter().map(|t| mid + half * t).collect::<Vec<_>>(),
            w.iter().map(|v| half * v).collect::<Vec<_>>(),
        )
    };
    match kind {
        AxisKind::Periodic => {
            let h = (hi - lo) / n as f64;
            ((0..n).map(|k| lo + k as f64 * h).collect(), vec![h; n])
        }
        AxisKind::Interval => gl(n),
        AxisKind::Polar { collapse } => {
            let (mut x, mut w) = gl(n - 2);
            // caps [0, lo] and [hi, π] have width lo
            let cap = lo / (collapse as f64 + 1.0);
            x.insert(0, lo);
            w.insert(0, cap);
            x.push(hi);
            w.push(cap);
            (x, w)
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub resolution: Vec<usize>,
    /// Chart points.
    pub nodes: Vec<Vec<f64>>,
    /// Coordinate weights; multiply by the density for the volume weight.
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(chart: &ChartMap, resolution: &[usize]) -> Result<QuadratureGrid> {
        let res = expand_resolution(resolution, chart.dim())?;
        Ok(QuadratureGrid::build(chart, res))
    }

    /// Half-resolution companion grid used for error estimates.
    pub fn coarse(&self, chart: &ChartMap) -> QuadratureGrid {
        QuadratureGrid::build(chart, half_resolution(&self.resolution))
    }

    fn build(chart: &ChartMap, res: Vec<usize>) -> QuadratureGrid {
        let rules: Vec<(Vec<f64>, Vec<f64>)> = chart
            .axes()
            .iter()
            .zip(&res)
            .map(|(a, &n)| axis_rule(a.kind, a.lo, a.hi, n))
            .collect();
        let total: usize = res.iter().product();
        let mut nodes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; res.len()];
        for _ in 0..total {
            nodes.push(idx.iter().zip(&rules).map(|(&i, r)| r.0[i]).collect());
            weights.push(idx.iter().zip(&rules).map(|(&i, r)| r.1[i]).product());
            for d in (0..idx.len()).rev() {
                idx[d] += 1;
                if idx[d] < res[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        QuadratureGrid {
            resolution: res,
            nodes,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Broadcasts a single resolution to every axis and validates the minimum.
pub fn expand_resolution(resolution: &[usize], dim: usize) -> Result<Vec<usize>> {
    let res = match resolution.len() {
        1 => vec![resolution[0]; dim],
        n if n == dim => resolution.to_vec(),
        n => return arg(format!("grid has {n} resolutions for a {dim}-dimensional chart")),
    };
    if let Some(&bad) = res.iter().find(|&&n| n < MIN_RESOLUTION) {
        return arg(format!("grid resolution must be at least {MIN_RESOLUTION}, got {bad}"));
    }
    Ok(res)
}

/// Resolution used for the error estimate.
pub fn half_resolution(res: &[usize]) -> Vec<usize> {
    res.iter().map(|&n| (n / 2).max(4)).collect()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
}

/// Evaluates `field` at every node of a grid (in parallel) and returns the
/// volume-weighted sums, one per output component.
pub fn weighted_sums<F>(chart: &ChartMap, grid: &QuadratureGrid, outputs: usize, field: &F) -> Result<Vec<f64>>
where
    F: Fn(&PointGeometry) -> Result<Vec<f64>> + Sync,
{
    let values: Vec<Result<(f64, Vec<f64>)>> = grid
        .nodes
        .par_iter()
        .map(|u| {
            let geom = PointGeometry::new(chart, u, MAX_ORDER)?;
            let density = geom.g().determinant().sqrt();
            Ok((density, field(&geom)?))
        })
        .collect();
    let mut sums = vec![CompensatedSum::default(); outputs];
    for (v, w) in values.into_iter().zip(&grid.weights) {
        let (density, vals) = v?;
        if vals.len() != outputs {
            return arg(format!("integrand returned {} values, expected {outputs}", vals.len()));
        }
        for (s, x) in sums.iter_mut().zip(vals) {
            s.add(w * density * x);
        }
    }
    Ok(sums.iter().map(CompensatedSum::value).collect())
}

/// Integrates several scalar integrands at once; the error estimate of
/// each is its change against the half-resolution grid.
pub fn integrate_many<F>(chart: &ChartMap, resolution: &[usize], outputs: usize, field: F) -> Result<Vec<Integral>>
where
    F: Fn(&PointGeometry) -> Result<Vec<f64>> + Sync,
{
    if !chart.is_compact() {
        return Err(Error::Unsupported(
            "integration needs a compact model without boundary".into(),
        ));
    }
    let fine = QuadratureGrid::new(chart, resolution)?;
    let coarse = fine.coarse(chart);
    let hi = weighted_sums(chart, &fine, outputs, &field)?;
    let lo = weighted_sums(chart, &coarse, outputs, &field)?;
    Ok(hi
        .iter()
        .zip(&lo)
        .map(|(&value, &coarse)| Integral {
            value,
            error_estimate: (value - coarse).abs(),
        })
        .collect())
}

pub fn integrate<F>(chart: &ChartMap, resolution: &[usize], field: F) -> Result<Integral>
where
    F: Fn(&PointGeometry) -> Result<f64> + Sync,
{
    Ok(integrate_many(chart, resolution, 1, |g| Ok(vec![field(g)?]))?[0])
}

/// `∫_M s v_g` for a named scalar field.
pub fn integrate_field(chart: &ChartMap, resolution: &[usize], field: &ScalarFieldId) -> Result<Integral> {
    integrate(chart, resolution, |g| Ok(scalar_jet(g, field)?.value()))
}

/// Volume of the model.
pub fn area(chart: &ChartMap, resolution: &[usize]) -> Result<Integral> {
    integrate(chart, resolution, |_| Ok(1.0))
}
