//! Named (1,1) tensors built from the shape operator, and the
//! biconservativity residuals.
//!
//! With `m` the dimension, `f` the mean curvature and `A` the shape operator:
//!
//! | id  | tensor |
//! |-----|--------|
//! | `s2`  | `−(m²/2) f² Id + 2m f A` (stress-bienergy tensor of a hypersurface) |
//! | `t1`  | `½ m(m−1) R Id − Ric`, with `Ric = (m−1)c Id + m f A − A²` |
//! | `t2`  | `m f Id − A` |
//! | `t3`  | `f² A` |
//! | `phi` | `ψ₃ Id − ψ₂ A + m f A² − A³` |
//!
//! where `ψ₂ = ½(m²f² − |A|²)` and `ψ₃ = ⅙m³f³ + ⅓ tr A³ − ½ m f |A|²`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hypersurface::{ChartMap, GeometryFrame, PointGeometry};
use crate::jet_matrix::JetMatrix;
use crate::jets::{TaylorJet, MAX_ORDER};
use crate::tensor_calculus::{apply, divergence_11_at, gradient_of, norm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TensorFieldId {
    Identity,
    A,
    A2,
    A3,
    S2,
    T1,
    T2,
    /// `f² A`.
    T3,
    Phi,
    Custom(Vec<(f64, TensorFieldId)>),
}

impl TensorFieldId {
    pub fn name(&self) -> String {
        match self {
            TensorFieldId::Identity => "identity".into(),
            TensorFieldId::A => "a".into(),
            TensorFieldId::A2 => "a2".into(),
            TensorFieldId::A3 => "a3".into(),
            TensorFieldId::S2 => "s2".into(),
            TensorFieldId::T1 => "t1".into(),
            TensorFieldId::T2 => "t2".into(),
            TensorFieldId::T3 => "t3".into(),
            TensorFieldId::Phi => "phi".into(),
            TensorFieldId::Custom(terms) => terms
                .iter()
                .map(|(c, t)| format!("{c}*{}", t.name()))
                .collect::<Vec<_>>()
                .join("+"),
        }
    }

    pub fn parse(s: &str) -> Option<TensorFieldId> {
        Some(match s.to_ascii_lowercase().as_str() {
            "identity" | "id" => TensorFieldId::Identity,
            "a" => TensorFieldId::A,
            "a2" => TensorFieldId::A2,
            "a3" => TensorFieldId::A3,
            "s2" => TensorFieldId::S2,
            "t1" => TensorFieldId::T1,
            "t2" => TensorFieldId::T2,
            "t3" | "f2a" => TensorFieldId::T3,
            "phi" => TensorFieldId::Phi,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiCoefficients {
    pub psi2: f64,
    pub psi3: f64,
}

impl PsiCoefficients {
    pub fn new(m: usize, f: f64, norm_a2: f64, trace_a3: f64) -> PsiCoefficients {
        let m = m as f64;
        PsiCoefficients {
            psi2: 0.5 * (m * m * f * f - norm_a2),
            psi3: m.powi(3) * f.powi(3) / 6.0 + trace_a3 / 3.0 - 0.5 * m * f * norm_a2,
        }
    }
}

/// Ricci operator from the contracted Gauss equation.
pub fn ricci(frame: &GeometryFrame, c: f64) -> DMatrix<f64> {
    let m = frame.dim();
    let id = DMatrix::<f64>::identity(m, m);
    &id * ((m as f64 - 1.0) * c) + &frame.a * (m as f64 * frame.f) - &frame.a * &frame.a
}

/// Coordinate-frame matrix of a named tensor at a frame.
pub fn build_tensor(frame: &GeometryFrame, c: f64, id: &TensorFieldId) -> DMatrix<f64> {
    let m = frame.dim();
    let mf = m as f64;
    let id_m = DMatrix::<f64>::identity(m, m);
    let a = &frame.a;
    let a2 = a * a;
    let f = frame.f;
    match id {
        TensorFieldId::Identity => id_m,
        TensorFieldId::A => a.clone(),
        TensorFieldId::A2 => a2,
        TensorFieldId::A3 => &a2 * a,
        TensorFieldId::S2 => &id_m * (-0.5 * mf * mf * f * f) + a * (2.0 * mf * f),
        TensorFieldId::T1 => {
            let scal = mf * (mf - 1.0) * c + mf * mf * f * f - frame.norm_a2;
            &id_m * (0.5 * scal) - ricci(frame, c)
        }
        TensorFieldId::T2 => &id_m * (mf * f) - a,
        TensorFieldId::T3 => a * (f * f),
        TensorFieldId::Phi => {
            let psi = PsiCoefficients::new(m, f, frame.norm_a2, frame.trace_a3);
            &id_m * psi.psi3 - a * psi.psi2 + &a2 * (mf * f) - &a2 * a
        }
        TensorFieldId::Custom(terms) => {
            let mut acc = DMatrix::<f64>::zeros(m, m);
            for (w, t) in terms {
                acc += build_tensor(frame, c, t) * *w;
            }
            acc
        }
    }
}

/// Jet-valued version of [`build_tensor`], for covariant differentiation.
pub fn tensor_jet(geom: &PointGeometry, id: &TensorFieldId) -> Result<JetMatrix> {
    let m = geom.dim();
    let mf = m as f64;
    let c = geom.c();
    let a = geom.shape_operator();
    let order = a.order();
    let f = geom.f();
    let ident = JetMatrix::identity(m, m, order);
    let konst = |v: f64| TaylorJet::constant(v, m, MAX_ORDER);
    Ok(match id {
        TensorFieldId::Identity => ident,
        TensorFieldId::A => a.clone(),
        TensorFieldId::A2 => a.mul(a),
        TensorFieldId::A3 => a.mul(a).mul(a),
        TensorFieldId::S2 => {
            let f2 = f * f;
            JetMatrix::scalar_identity(m, &f2.scale(-0.5 * mf * mf)).add(&a.scale_jet(&f.scale(2.0 * mf)))
        }
        TensorFieldId::T1 => {
            let f2 = f * f;
            let scal = (&f2.scale(mf * mf) - geom.norm_a2()).add_scalar(mf * (mf - 1.0) * c);
            let ric = JetMatrix::scalar_identity(m, &konst((mf - 1.0) * c)?)
                .add(&a.scale_jet(&f.scale(mf)))
                .sub(&a.mul(a));
            JetMatrix::scalar_identity(m, &scal.scale(0.5)).sub(&ric)
        }
        TensorFieldId::T2 => JetMatrix::scalar_identity(m, &f.scale(mf)).sub(a),
        TensorFieldId::T3 => a.scale_jet(&(f * f)),
        TensorFieldId::Phi => {
            let f2 = f * f;
            let psi2 = (&f2.scale(mf * mf) - geom.norm_a2()).scale(0.5);
            let psi3 = &(&(&f2 * f).scale(mf.powi(3) / 6.0) + &geom.trace_a3().scale(1.0 / 3.0))
                - &(f * geom.norm_a2()).scale(0.5 * mf);
            let a2 = a.mul(a);
            JetMatrix::scalar_identity(m, &psi3)
                .sub(&a.scale_jet(&psi2))
                .add(&a2.scale_jet(&f.scale(mf)))
                .sub(&a2.mul(a))
        }
        TensorFieldId::Custom(terms) => {
            let mut acc = JetMatrix::scalar_identity(m, &konst(0.0)?);
            for (w, t) in terms {
                acc = acc.add(&tensor_jet(geom, t)?.scale(*w));
            }
            acc
        }
    })
}

/// `A(grad f) + (m/2) f grad f`, which vanishes exactly on biconservative
/// hypersurfaces.
pub fn biconservativity_vector(geom: &PointGeometry) -> Result<Vec<f64>> {
    let (_, grad_f) = gradient_of(geom, geom.f())?;
    let a = geom.shape_operator().values();
    let half_mf = 0.5 * geom.dim() as f64 * geom.f().value();
    Ok(apply(&a, &grad_f)
        .iter()
        .zip(&grad_f)
        .map(|(x, y)| x + half_mf * y)
        .collect())
}

pub fn biconservativity_residual(chart: &ChartMap, u: &[f64]) -> Result<Vec<f64>> {
    biconservativity_vector(&PointGeometry::new(chart, u, MAX_ORDER)?)
}

/// `‖f·Div S₂ − m·Div(f²A)‖`; zero on every hypersurface.
pub fn stress_equivalence_of(geom: &PointGeometry) -> Result<f64> {
    let f = geom.f().value();
    let m = geom.dim() as f64;
    let div_s2 = divergence_11_at(geom, &TensorFieldId::S2)?;
    let div_t3 = divergence_11_at(geom, &TensorFieldId::T3)?;
    let diff: Vec<f64> = div_s2
        .iter()
        .zip(&div_t3)
        .map(|(s, t)| f * s - m * t)
        .collect();
    Ok(norm(geom, &diff))
}

pub fn stress_equivalence_residual(chart: &ChartMap, u: &[f64]) -> Result<f64> {
    stress_equivalence_of(&PointGeometry::new(chart, u, MAX_ORDER)?)
}
