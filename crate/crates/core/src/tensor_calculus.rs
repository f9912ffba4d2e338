//! Covariant calculus in the coordinate frame of a chart.
//!
//! Conventions: vectors carry an upper index; Hessians are covariant
//! `Hess_{ij} = ∂_i∂_j s − Γ^k_{ij} ∂_k s`; the Laplacian is
//! `Δs = g^{ij} Hess_{ij}` (so `Δ(|x|²/2) = m` on flat space).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::hypersurface::{ChartMap, PointGeometry, Tensor3};
use crate::jets::{TaylorJet, MAX_ORDER};
use crate::tensors::{tensor_jet, TensorFieldId};

/// Scalar fields that can be differentiated on a hypersurface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarFieldId {
    F,
    FSquared,
    NormA2,
    TraceA3,
    /// Restriction of the ambient coordinate function `x_i`.
    Coordinate(usize),
    Custom(Box<ScalarExpr>),
}

/// Expression tree over the base scalar fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarExpr {
    Field(ScalarFieldId),
    Const(f64),
    Add(Box<ScalarExpr>, Box<ScalarExpr>),
    Sub(Box<ScalarExpr>, Box<ScalarExpr>),
    Mul(Box<ScalarExpr>, Box<ScalarExpr>),
    Scale(f64, Box<ScalarExpr>),
    Pow(Box<ScalarExpr>, i32),
}

impl ScalarFieldId {
    pub fn name(&self) -> String {
        match self {
            ScalarFieldId::F => "f".into(),
            ScalarFieldId::FSquared => "f2".into(),
            ScalarFieldId::NormA2 => "norm_a2".into(),
            ScalarFieldId::TraceA3 => "trace_a3".into(),
            ScalarFieldId::Coordinate(i) => format!("x{i}"),
            ScalarFieldId::Custom(_) => "custom".into(),
        }
    }

    pub fn parse(s: &str) -> Option<ScalarFieldId> {
        match s {
            "f" => Some(ScalarFieldId::F),
            "f2" | "f_squared" => Some(ScalarFieldId::FSquared),
            "norm_a2" | "normA2" => Some(ScalarFieldId::NormA2),
            "trace_a3" | "traceA3" => Some(ScalarFieldId::TraceA3),
            _ => s
                .strip_prefix('x')
                .or_else(|| s.strip_prefix("coordinate"))
                .and_then(|i| i.trim_matches(|c| c == '(' || c == ')').parse().ok())
                .map(ScalarFieldId::Coordinate),
        }
    }
}

fn expr_jet(geom: &PointGeometry, e: &ScalarExpr) -> Result<TaylorJet> {
    Ok(match e {
        ScalarExpr::Field(id) => scalar_jet(geom, id)?,
        ScalarExpr::Const(v) => TaylorJet::constant(*v, geom.dim(), MAX_ORDER)?,
        ScalarExpr::Add(a, b) => expr_jet(geom, a)?.try_add(&expr_jet(geom, b)?)?,
        ScalarExpr::Sub(a, b) => expr_jet(geom, a)?.try_sub(&expr_jet(geom, b)?)?,
        ScalarExpr::Mul(a, b) => expr_jet(geom, a)?.try_mul(&expr_jet(geom, b)?)?,
        ScalarExpr::Scale(s, a) => expr_jet(geom, a)?.scale(*s),
        ScalarExpr::Pow(a, n) => expr_jet(geom, a)?.powi(*n)?,
    })
}

/// Jet of a scalar field at the point of `geom`.
pub fn scalar_jet(geom: &PointGeometry, field: &ScalarFieldId) -> Result<TaylorJet> {
    Ok(match field {
        ScalarFieldId::F => geom.f().clone(),
        ScalarFieldId::FSquared => geom.f() * geom.f(),
        ScalarFieldId::NormA2 => geom.norm_a2().clone(),
        ScalarFieldId::TraceA3 => geom.trace_a3().clone(),
        ScalarFieldId::Coordinate(i) => match geom.position().get(*i) {
            Some(x) => x.clone(),
            None => {
                return arg(format!(
                    "coordinate index {i} out of range for {} ambient coordinates",
                    geom.position().len()
                ))
            }
        },
        ScalarFieldId::Custom(e) => expr_jet(geom, e)?,
    })
}

#[derive(Debug, Clone)]
pub struct ScalarDerivatives {
    pub value: f64,
    /// Components `∂_i s`.
    pub differential: Vec<f64>,
    /// `grad^i = g^{ij} ∂_j s`.
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
    pub laplacian: f64,
}

/// Value, differential and raised gradient from a jet of order ≥ 1.
pub fn gradient_of(geom: &PointGeometry, s: &TaylorJet) -> Result<(Vec<f64>, Vec<f64>)> {
    if s.order() < 1 {
        return arg("gradient needs a jet of order at least 1; raise the chart jet order");
    }
    let m = geom.dim();
    let ds: Vec<f64> = (0..m).map(|i| s.d1(i)).collect();
    Ok((ds.clone(), raise(geom, &ds)))
}

/// Full second-order data of a scalar jet (needs jet order ≥ 2).
pub fn derivatives_of(geom: &PointGeometry, s: &TaylorJet) -> Result<ScalarDerivatives> {
    if s.order() < 2 {
        return arg(
            "Hessian needs a jet of order at least 2; use chart jet order 4 for curvature fields",
        );
    }
    let m = geom.dim();
    let (ds, grad) = gradient_of(geom, s)?;
    let hess = DMatrix::from_fn(m, m, |i, j| {
        let mut v = s.d2(i, j);
        for (k, dk) in ds.iter().enumerate() {
            v -= geom.gamma(k, i, j) * dk;
        }
        v
    });
    let hess = (&hess + hess.transpose()) * 0.5;
    let laplacian = geom.g_inv().component_mul(&hess).sum();
    Ok(ScalarDerivatives {
        value: s.value(),
        differential: ds,
        grad,
        hess,
        laplacian,
    })
}

pub fn scalar_derivatives_at(geom: &PointGeometry, field: &ScalarFieldId) -> Result<ScalarDerivatives> {
    derivatives_of(geom, &scalar_jet(geom, field)?)
}

/// Chart-level entry point; evaluates the geometry with order-4 jets.
pub fn scalar_derivatives(chart: &ChartMap, u: &[f64], field: &ScalarFieldId) -> Result<ScalarDerivatives> {
    scalar_derivatives_at(&PointGeometry::new(chart, u, MAX_ORDER)?, field)
}

/// `v^i = g^{ij} w_j`.
pub fn raise(geom: &PointGeometry, w: &[f64]) -> Vec<f64> {
    let gi = geom.g_inv();
    (0..w.len())
        .map(|i| (0..w.len()).map(|j| gi[(i, j)] * w[j]).sum())
        .collect()
}

/// `g(v, w)`.
pub fn inner(geom: &PointGeometry, v: &[f64], w: &[f64]) -> f64 {
    let g = geom.g();
    let mut acc = 0.0;
    for i in 0..v.len() {
        for j in 0..w.len() {
            acc += g[(i, j)] * v[i] * w[j];
        }
    }
    acc
}

pub fn norm(geom: &PointGeometry, v: &[f64]) -> f64 {
    inner(geom, v, v).max(0.0).sqrt()
}

/// `(T v)^i = T^i_j v^j`.
pub fn apply(t: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..t.nrows())
        .map(|i| (0..t.ncols()).map(|j| t[(i, j)] * v[j]).sum())
        .collect()
}

/// `⟨T, H⟩ = T^i_j g^{jk} H_{ki}` for a (1,1) tensor `T` and a covariant 2-tensor `H`.
pub fn contract_11_02(geom: &PointGeometry, t: &DMatrix<f64>, h: &DMatrix<f64>) -> f64 {
    (t * geom.g_inv() * h).trace()
}

/// Full metric norm squared of a (1,2) tensor stored as `(i, k, j)`.
pub fn norm2_12(geom: &PointGeometry, t: &Tensor3) -> f64 {
    let m = t.dim();
    let g = geom.g();
    let gi = geom.g_inv();
    let mut acc = 0.0;
    for i in 0..m {
        for a in 0..m {
            for k in 0..m {
                for b in 0..m {
                    for j in 0..m {
                        for c in 0..m {
                            acc += g[(i, a)] * gi[(k, b)] * gi[(j, c)] * t.get(i, k, j) * t.get(a, b, c);
                        }
                    }
                }
            }
        }
    }
    acc
}

/// `Div T = trace (∇T)(·,·)`: `(Div T)^i = g^{kj} (∇T)^i_{kj}`.
pub fn divergence_of(geom: &PointGeometry, nabla_t: &Tensor3) -> Vec<f64> {
    let m = nabla_t.dim();
    let gi = geom.g_inv();
    (0..m)
        .map(|i| {
            let mut v = 0.0;
            for k in 0..m {
                for j in 0..m {
                    v += gi[(k, j)] * nabla_t.get(i, k, j);
                }
            }
            v
        })
        .collect()
}

pub fn divergence_11_at(geom: &PointGeometry, field: &TensorFieldId) -> Result<Vec<f64>> {
    let t = tensor_jet(geom, field)?;
    Ok(divergence_of(geom, &geom.nabla_11(&t)?))
}

/// Divergence of a cataloged (1,1) field, as a coordinate-frame vector.
pub fn divergence_11(chart: &ChartMap, u: &[f64], field: &TensorFieldId) -> Result<Vec<f64>> {
    divergence_11_at(&PointGeometry::new(chart, u, MAX_ORDER)?, field)
}

pub fn cheng_yau_apply_at(
    geom: &PointGeometry,
    phi_field: &TensorFieldId,
    gamma: &ScalarFieldId,
) -> Result<f64> {
    let phi = tensor_jet(geom, phi_field)?.values();
    let d = scalar_derivatives_at(geom, gamma)?;
    Ok(contract_11_02(geom, &phi, &d.hess))
}

/// Cheng–Yau operator `□γ = ⟨Φ, Hess γ⟩`.
pub fn cheng_yau_apply(
    chart: &ChartMap,
    u: &[f64],
    phi_field: &TensorFieldId,
    gamma: &ScalarFieldId,
) -> Result<f64> {
    cheng_yau_apply_at(&PointGeometry::new(chart, u, MAX_ORDER)?, phi_field, gamma)
}
