//! Compact model hypersurfaces with explicit charts and, where available,
//! closed-form principal curvatures.
//!
//! Sphere-type charts use the angles `(θ₁, …, θ_{k−1}, φ)`:
//! `σ = (S cos φ, S sin φ, …, sin θ₁ cos θ₂, cos θ₁)` with
//! `S = sin θ₁ ⋯ sin θ_{k−1}`. Polar angles live on `[δ, π−δ]` with
//! `δ = POLAR_OFFSET`; the excised caps are handled by the quadrature.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypersurface::{Axis, ChartMap, PointGeometry};
use crate::jets::{TaylorJet, MAX_DIM};
use crate::space_form::{AmbientSpace, Curvature};

pub const POLAR_OFFSET: f64 = 1e-3;

/// `|f|` below which a model counts as minimal for orientation purposes.
const MINIMAL_F: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialTerm {
    pub coef: f64,
    /// Index of the unit-sphere coordinate `σ_axis`.
    pub axis: usize,
    pub power: u32,
}

/// Declarative description of a catalog hypersurface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    /// Geodesic sphere in `N^{m+1}(c)`; `radius` is the Euclidean radius
    /// of its flat-model image.
    Sphere { curvature: f64, dim: usize, radius: f64 },
    /// `S^{m1}(r1) × S^{m2}(r2) ⊂ S^{m1+m2+1}`.
    ProductSpheres { m1: usize, m2: usize, r1: f64, r2: f64 },
    /// Torus of revolution in `ℝ³`.
    Torus { major: f64, minor: f64 },
    /// `Σ x_i² / a_i² = 1` in `ℝ^{m+1}`.
    Ellipsoid { axes: Vec<f64> },
    /// `x = ρ(σ) σ` over the unit sphere, `ρ = base + Σ coef · σ_axis^power`.
    RadialGraph { dim: usize, base: f64, terms: Vec<RadialTerm> },
    /// Flat square `[−w, w]^m × {0}`; not compact.
    Plane { dim: usize, half_width: f64 },
}

/// Closed-form pointwise data for comparison with the numeric frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedFrame {
    /// Principal curvatures with multiplicity, ascending.
    pub lambda: Vec<f64>,
    pub f: f64,
    pub norm_a2: f64,
    pub trace_a3: f64,
    pub m2f2: f64,
}

impl ExpectedFrame {
    fn from_lambda(mut lambda: Vec<f64>) -> ExpectedFrame {
        let m = lambda.len() as f64;
        let sum: f64 = lambda.iter().sum();
        if sum / m < -MINIMAL_F {
            lambda.iter_mut().for_each(|l| *l = -*l);
        }
        lambda.sort_by(f64::total_cmp);
        let f = lambda.iter().sum::<f64>() / m;
        ExpectedFrame {
            f,
            norm_a2: lambda.iter().map(|l| l * l).sum(),
            trace_a3: lambda.iter().map(|l| l.powi(3)).sum(),
            m2f2: m * m * f * f,
            lambda,
        }
    }
}

pub fn model_names() -> &'static [&'static str] {
    &["sphere", "product_spheres", "torus", "ellipsoid", "radial_graph", "plane"]
}

fn spec_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Spec(msg.into()))
}

fn take(params: &mut BTreeMap<String, f64>, keys: &[&str]) -> Option<f64> {
    keys.iter().find_map(|k| params.remove(*k))
}

fn as_count(v: f64, what: &str) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        spec_err(format!("{what} must be a non-negative integer, got {v}"))
    }
}

impl ModelSpec {
    /// Builds a model from its catalog name and `key=value` overrides on
    /// the default parameters.
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
        let mut p = params.clone();
        let spec = match name {
            "sphere" => {
                let curvature = take(&mut p, &["curvature", "c"]).unwrap_or(0.0);
                let dim = as_count(take(&mut p, &["dim", "m"]).unwrap_or(2.0), "dim")?;
                let radius = take(&mut p, &["r", "radius"]).unwrap_or(match curvature {
                    c if c > 0.0 => 0.8,
                    _ => 1.0,
                });
                ModelSpec::Sphere { curvature, dim, radius }
            }
            "product_spheres" | "product" => {
                let m1 = as_count(take(&mut p, &["m1"]).unwrap_or(1.0), "m1")?;
                let m2 = as_count(take(&mut p, &["m2"]).unwrap_or(2.0), "m2")?;
                let r1 = take(&mut p, &["r1"]).unwrap_or(0.6);
                let r2 = take(&mut p, &["r2"]).unwrap_or_else(|| (1.0 - r1 * r1).max(0.0).sqrt());
                ModelSpec::ProductSpheres { m1, m2, r1, r2 }
            }
            "torus" => ModelSpec::Torus {
                major: take(&mut p, &["R", "major"]).unwrap_or(2.0),
                minor: take(&mut p, &["r", "minor"]).unwrap_or(1.0),
            },
            "ellipsoid" => {
                let mut axes = Vec::new();
                let letters = ["a", "b", "c", "d", "e", "g", "h", "i", "j"];
                for (k, letter) in letters.iter().enumerate() {
                    let numbered = format!("a{}", k + 1);
                    match take(&mut p, &[letter, numbered.as_str()]) {
                        Some(v) => axes.push(v),
                        None => break,
                    }
                }
                if axes.is_empty() {
                    axes = vec![2.0, 1.0, 1.0];
                }
                ModelSpec::Ellipsoid { axes }
            }
            "radial_graph" => {
                let dim = as_count(take(&mut p, &["dim", "m"]).unwrap_or(2.0), "dim")?;
                let base = take(&mut p, &["base", "rho0"]).unwrap_or(1.0);
                let top = dim;
                let terms = vec![
                    RadialTerm { coef: take(&mut p, &["c1"]).unwrap_or(0.2), axis: top, power: 2 },
                    RadialTerm { coef: take(&mut p, &["c2"]).unwrap_or(0.1), axis: 0, power: 1 },
                    RadialTerm { coef: take(&mut p, &["c3"]).unwrap_or(0.05), axis: 1, power: 3 },
                ];
                ModelSpec::RadialGraph { dim, base, terms }
            }
            "plane" => ModelSpec::Plane {
                dim: as_count(take(&mut p, &["dim", "m"]).unwrap_or(2.0), "dim")?,
                half_width: take(&mut p, &["w", "half_width"]).unwrap_or(1.0),
            },
            other => {
                return spec_err(format!(
                    "unknown model '{other}'; valid models: {}",
                    model_names().join(", ")
                ))
            }
        };
        if let Some(k) = p.keys().next() {
            return spec_err(format!("unknown parameter '{k}' for model '{name}'"));
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::Sphere { dim, .. } | ModelSpec::RadialGraph { dim, .. } | ModelSpec::Plane { dim, .. } => {
                *dim
            }
            ModelSpec::ProductSpheres { m1, m2, .. } => m1 + m2,
            ModelSpec::Torus { .. } => 2,
            ModelSpec::Ellipsoid { axes } => axes.len().saturating_sub(1),
        }
    }

    pub fn curvature(&self) -> f64 {
        match self {
            ModelSpec::Sphere { curvature, .. } => *curvature,
            ModelSpec::ProductSpheres { .. } => 1.0,
            _ => 0.0,
        }
    }

    /// Short identifier used in reports.
    pub fn id(&self) -> String {
        match self {
            ModelSpec::Sphere { curvature, dim, radius } => {
                format!("sphere(c={curvature},m={dim},r={radius})")
            }
            ModelSpec::ProductSpheres { m1, m2, r1, r2 } => {
                format!("product_spheres(m1={m1},m2={m2},r1={r1},r2={r2})")
            }
            ModelSpec::Torus { major, minor } => format!("torus(R={major},r={minor})"),
            ModelSpec::Ellipsoid { axes } => format!(
                "ellipsoid({})",
                axes.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
            ),
            ModelSpec::RadialGraph { dim, base, terms } => format!(
                "radial_graph(m={dim},base={base},terms={})",
                terms.len()
            ),
            ModelSpec::Plane { dim, half_width } => format!("plane(m={dim},w={half_width})"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.dim();
        if !(2..=MAX_DIM).contains(&m) {
            return spec_err(format!("hypersurface dimension must be in 2..={MAX_DIM}, got {m}"));
        }
        match self {
            ModelSpec::Sphere { curvature, radius, .. } => {
                Curvature::from_value(*curvature)?;
                if !(*radius > 0.0 && radius.is_finite()) {
                    return spec_err(format!("sphere radius must be positive, got {radius}"));
                }
                if *curvature == 1.0 && *radius > 1.0 {
                    return spec_err(format!("a sphere in S^(m+1) needs radius ≤ 1, got {radius}"));
                }
            }
            ModelSpec::ProductSpheres { m1, m2, r1, r2 } => {
                if *m1 < 1 || *m2 < 1 {
                    return spec_err("product factors need dimension ≥ 1");
                }
                if !(*r1 > 0.0 && *r2 > 0.0) {
                    return spec_err("product radii must be positive");
                }
                if (r1 * r1 + r2 * r2 - 1.0).abs() > 1e-12 {
                    return spec_err(format!(
                        "product radii must satisfy r1² + r2² = 1, got {}",
                        r1 * r1 + r2 * r2
                    ));
                }
            }
            ModelSpec::Torus { major, minor } => {
                if !(*minor > 0.0 && minor < major) {
                    return spec_err(format!("torus needs 0 < r < R, got R={major}, r={minor}"));
                }
            }
            ModelSpec::Ellipsoid { axes } => {
                if axes.iter().any(|a| !(*a > 0.0)) {
                    return spec_err("ellipsoid semi-axes must be positive");
                }
            }
            ModelSpec::RadialGraph { dim, base, terms } => {
                if terms.iter().any(|t| t.axis > *dim) {
                    return spec_err("radial term axis exceeds the ambient dimension");
                }
                let slack = base - terms.iter().map(|t| t.coef.abs()).sum::<f64>();
                if !(slack > 0.0) {
                    return spec_err(format!(
                        "radial function may vanish: base − Σ|coef| = {slack}"
                    ));
                }
            }
            ModelSpec::Plane { half_width, .. } => {
                if !(*half_width > 0.0) {
                    return spec_err("plane half width must be positive");
                }
            }
        }
        Ok(())
    }

    /// Closed-form data at chart point `u`.
    pub fn expected_frame(&self, u: &[f64]) -> Result<ExpectedFrame> {
        let m = self.dim();
        Ok(match self {
            ModelSpec::Sphere { curvature, radius, .. } => {
                let r = *radius;
                let l = match Curvature::from_value(*curvature)? {
                    Curvature::Flat => 1.0 / r,
                    Curvature::Spherical => (1.0 - r * r).max(0.0).sqrt() / r,
                    Curvature::Hyperbolic => (1.0 + r * r).sqrt() / r,
                };
                ExpectedFrame::from_lambda(vec![l; m])
            }
            ModelSpec::ProductSpheres { m1, m2, r1, r2 } => {
                let mut lambda = vec![-r2 / r1; *m1];
                lambda.extend(std::iter::repeat_n(r1 / r2, *m2));
                ExpectedFrame::from_lambda(lambda)
            }
            ModelSpec::Torus { major, minor } => {
                let v = u.get(1).copied().unwrap_or(0.0);
                ExpectedFrame::from_lambda(vec![v.cos() / (major + minor * v.cos()), 1.0 / minor])
            }
            ModelSpec::Plane { .. } => ExpectedFrame::from_lambda(vec![0.0; m]),
            ModelSpec::Ellipsoid { .. } | ModelSpec::RadialGraph { .. } => {
                return Err(Error::Unsupported(format!(
                    "{} has no closed-form frame",
                    self.id()
                )))
            }
        })
    }

    /// Point at which `f ≥ 0` fixes the normal. The torus box midpoint lies
    /// on the inner equator where `f = 0`, so it uses the outer one.
    pub fn orientation_point(&self, chart: &ChartMap) -> Vec<f64> {
        match self {
            ModelSpec::Torus { .. } => vec![PI, 0.0],
            _ => chart.reference_point(),
        }
    }

    /// Builds the chart, with the normal oriented so that `f ≥ 0` at the
    /// chart's reference point.
    pub fn instantiate(&self) -> Result<ChartMap> {
        self.validate()?;
        let m = self.dim();
        let chart = match self.clone() {
            ModelSpec::Sphere { curvature, radius, .. } => {
                let kind = Curvature::from_value(curvature)?;
                let space = AmbientSpace::new(kind, m)?;
                ChartMap::new(space, sphere_axes(m), move |v| {
                    let s = unit_sphere(v)?;
                    let mut out: Vec<TaylorJet> = s.iter().map(|x| x.scale(radius)).collect();
                    let lift = match kind {
                        Curvature::Flat => None,
                        Curvature::Spherical => Some((1.0 - radius * radius).max(0.0).sqrt()),
                        Curvature::Hyperbolic => Some((1.0 + radius * radius).sqrt()),
                    };
                    if let Some(h) = lift {
                        out.insert(0, TaylorJet::constant(h, v[0].dim(), v[0].order())?);
                    }
                    Ok(out)
                })?
            }
            ModelSpec::ProductSpheres { m1, m2, r1, r2 } => {
                let space = AmbientSpace::new(Curvature::Spherical, m)?;
                let mut axes = sphere_axes(m1);
                axes.extend(sphere_axes(m2));
                let chart = ChartMap::new(space, axes, move |v| {
                    let mut out: Vec<TaylorJet> =
                        unit_sphere(&v[..m1])?.iter().map(|x| x.scale(r1)).collect();
                    out.extend(unit_sphere(&v[m1..])?.iter().map(|x| x.scale(r2)));
                    Ok(out)
                })?;
                // Normal (r2 σ₁, −r1 σ₂) gives A = (−r2/r1, r1/r2).
                let u0 = chart.reference_point();
                let p = chart.position(&u0)?;
                let target: Vec<f64> = p
                    .iter()
                    .enumerate()
                    .map(|(k, x)| if k <= m1 { x * r2 / r1 } else { -x * r1 / r2 })
                    .collect();
                let eta = PointGeometry::new(&chart, &u0, 3)?.frame()?.eta;
                let dot: f64 = eta.iter().zip(&target).map(|(a, b)| a * b).sum();
                let sign = if dot < 0.0 { -1.0 } else { 1.0 };
                chart.with_orientation(sign)
            }
            ModelSpec::Torus { major, minor } => {
                let space = AmbientSpace::new(Curvature::Flat, 2)?;
                ChartMap::new(space, vec![Axis::periodic(0.0, TAU), Axis::periodic(0.0, TAU)], move |v| {
                    let ring = v[1].cos().scale(minor).add_scalar(major);
                    Ok(vec![&ring * &v[0].cos(), &ring * &v[0].sin(), v[1].sin().scale(minor)])
                })?
            }
            ModelSpec::Ellipsoid { axes } => {
                let space = AmbientSpace::new(Curvature::Flat, m)?;
                ChartMap::new(space, sphere_axes(m), move |v| {
                    Ok(unit_sphere(v)?
                        .iter()
                        .zip(&axes)
                        .map(|(x, a)| x.scale(*a))
                        .collect())
                })?
            }
            ModelSpec::RadialGraph { base, terms, .. } => {
                let space = AmbientSpace::new(Curvature::Flat, m)?;
                ChartMap::new(space, sphere_axes(m), move |v| {
                    let s = unit_sphere(v)?;
                    let mut rho = TaylorJet::constant(base, v[0].dim(), v[0].order())?;
                    for t in &terms {
                        rho = &rho + &s[t.axis].powi(t.power as i32)?.scale(t.coef);
                    }
                    Ok(s.iter().map(|x| x * &rho).collect())
                })?
            }
            ModelSpec::Plane { half_width, .. } => {
                let space = AmbientSpace::new(Curvature::Flat, m)?;
                ChartMap::new(space, vec![Axis::interval(-half_width, half_width); m], move |v| {
                    let mut out = v.to_vec();
                    out.push(v[0].scale(0.0));
                    Ok(out)
                })?
            }
        };
        let u0 = self.orientation_point(&chart);
        let f = PointGeometry::new(&chart, &u0, 3)?.f().value();
        Ok(if f < -MINIMAL_F {
            let flipped = -chart.orientation();
            chart.with_orientation(flipped)
        } else {
            chart
        })
    }
}

/// Axes of the unit `k`-sphere chart: `k−1` polar angles then the azimuth.
pub fn sphere_axes(k: usize) -> Vec<Axis> {
    let mut axes: Vec<Axis> = (1..k)
        .map(|j| Axis::polar(POLAR_OFFSET, PI - POLAR_OFFSET, k - j))
        .collect();
    axes.push(Axis::periodic(0.0, TAU));
    axes
}

/// Jets of the unit `k`-sphere embedding in `ℝ^{k+1}`, `k = v.len()`.
pub fn unit_sphere(v: &[TaylorJet]) -> Result<Vec<TaylorJet>> {
    let k = v.len();
    if k == 0 {
        return Err(Error::Argument("sphere chart needs at least one angle".into()));
    }
    let phi = &v[k - 1];
    // tail[j] = cos θ_{j+1} · Π_{i≤j} sin θ_i, built from the pole down
    let mut out_rev = Vec::with_capacity(k + 1);
    let mut prefix = TaylorJet::constant(1.0, phi.dim(), phi.order())?;
    for theta in &v[..k - 1] {
        out_rev.push(&prefix * &theta.cos());
        prefix = &prefix * &theta.sin();
    }
    let mut out = vec![&prefix * &phi.cos(), &prefix * &phi.sin()];
    out.extend(out_rev.into_iter().rev());
    Ok(out)
}

/// Default models for listings and the acceptance suite.
pub fn default_models() -> Vec<ModelSpec> {
    vec![
        ModelSpec::Sphere { curvature: 0.0, dim: 2, radius: 1.0 },
        ModelSpec::Sphere { curvature: 1.0, dim: 3, radius: 0.8 },
        ModelSpec::ProductSpheres { m1: 1, m2: 2, r1: 0.6, r2: 0.8 },
        ModelSpec::Torus { major: 2.0, minor: 1.0 },
        ModelSpec::Ellipsoid { axes: vec![2.0, 1.0, 1.0] },
        ModelSpec::RadialGraph {
            dim: 2,
            base: 1.0,
            terms: vec![
                RadialTerm { coef: 0.2, axis: 2, power: 2 },
                RadialTerm { coef: 0.1, axis: 0, power: 1 },
                RadialTerm { coef: 0.05, axis: 1, power: 3 },
            ],
        },
        ModelSpec::Sphere { curvature: -1.0, dim: 2, radius: 0.7 },
    ]
}
