//! Check registry: every identity as a named residual, evaluated over a
//! quadrature grid and collected into a [`VerificationReport`].
//!
//! Pointwise residuals are evaluated at every grid node. Integral
//! residuals are `|∫ integrand v_g|` with the half-grid error estimate.

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::hypersurface::{ChartMap, GeometryFrame, PointGeometry, Tensor3};
use crate::jet_matrix::JetMatrix;
use crate::quadrature::{CompensatedSum, QuadratureGrid};
use crate::tensor_calculus::{
    apply, contract_11_02, derivatives_of, divergence_of, gradient_of, inner, norm, norm2_12,
    scalar_derivatives_at, ScalarFieldId,
};
use crate::tensors::{biconservativity_vector, stress_equivalence_of, tensor_jet, TensorFieldId};

#[derive(Debug, Clone, PartialEq)]
pub enum CheckId {
    Codazzi,
    Gauss,
    TraceNablaA,
    ScalarCurv,
    GradTracePower(u8),
    NablaPowerRecursion(u8),
    DivA2,
    DivA3,
    DivPhi,
    DivT1,
    DivT2,
    DivT3,
    Kato,
    Simons,
    StressEquiv,
    Biconservativity,
    PointwiseInt1,
    PointwiseInt2,
    BoxZero { tensor: TensorFieldId, field: ScalarFieldId },
    /// `|∫ γ □θ − θ □γ|`.
    BoxSelfAdjoint { tensor: TensorFieldId, gamma: ScalarFieldId, theta: ScalarFieldId },
    IntF2A2,
    IntFA3,
    IntF2ASimons,
    IntFA2HessF,
    IntMaster,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Pointwise,
    Integral,
}

impl CheckId {
    pub fn name(&self) -> String {
        match self {
            CheckId::Codazzi => "codazzi".into(),
            CheckId::Gauss => "gauss".into(),
            CheckId::TraceNablaA => "trace_nablaA".into(),
            CheckId::ScalarCurv => "scalar_curv".into(),
            CheckId::GradTracePower(n) => format!("grad_trace_power({n})"),
            CheckId::NablaPowerRecursion(n) => format!("nabla_power_recursion({n})"),
            CheckId::DivA2 => "div_A2".into(),
            CheckId::DivA3 => "div_A3".into(),
            CheckId::DivPhi => "div_phi".into(),
            CheckId::DivT1 => "div_t1".into(),
            CheckId::DivT2 => "div_t2".into(),
            CheckId::DivT3 => "div_t3".into(),
            CheckId::Kato => "kato".into(),
            CheckId::Simons => "simons".into(),
            CheckId::StressEquiv => "stress_equiv".into(),
            CheckId::Biconservativity => "biconservativity".into(),
            CheckId::PointwiseInt1 => "pointwise_int1".into(),
            CheckId::PointwiseInt2 => "pointwise_int2".into(),
            CheckId::BoxZero { tensor, field } => format!("box_zero({},{})", tensor.name(), field.name()),
            CheckId::BoxSelfAdjoint { tensor, gamma, theta } => {
                format!("box_selfadjoint({},{},{})", tensor.name(), gamma.name(), theta.name())
            }
            CheckId::IntF2A2 => "int_f2A2".into(),
            CheckId::IntFA3 => "int_fA3".into(),
            CheckId::IntF2ASimons => "int_f2a_simons".into(),
            CheckId::IntFA2HessF => "int_fA2hessf".into(),
            CheckId::IntMaster => "int_master".into(),
        }
    }

    /// Accepts canonical names, case-insensitively, with `name(args)` or
    /// `name_args` for parametrized checks.
    pub fn parse(s: &str) -> Option<CheckId> {
        let lower = s.trim().to_ascii_lowercase();
        let (head, args): (&str, Vec<&str>) = match lower.find('(') {
            Some(p) if lower.ends_with(')') => (
                &lower[..p],
                lower[p + 1..lower.len() - 1].split(',').map(str::trim).collect(),
            ),
            _ => (lower.as_str(), Vec::new()),
        };
        let power = |prefix: &str| -> Option<u8> {
            let n: u8 = match args.as_slice() {
                [a] => a.parse().ok()?,
                [] => head.strip_prefix(prefix)?.trim_start_matches('_').parse().ok()?,
                _ => return None,
            };
            (2..=3).contains(&n).then_some(n)
        };
        if head.starts_with("grad_trace_power") {
            return power("grad_trace_power").map(CheckId::GradTracePower);
        }
        if head.starts_with("nabla_power_recursion") {
            return power("nabla_power_recursion").map(CheckId::NablaPowerRecursion);
        }
        if head == "box_zero" {
            let tensor = TensorFieldId::parse(args.first().copied().unwrap_or("phi"))?;
            let field = ScalarFieldId::parse(args.get(1).copied().unwrap_or("f"))?;
            return (args.len() <= 2).then_some(CheckId::BoxZero { tensor, field });
        }
        if head == "box_selfadjoint" {
            let tensor = TensorFieldId::parse(args.first().copied().unwrap_or("phi"))?;
            let gamma = ScalarFieldId::parse(args.get(1).copied().unwrap_or("f"))?;
            let theta = ScalarFieldId::parse(args.get(2).copied().unwrap_or("x0"))?;
            return (args.len() <= 3).then_some(CheckId::BoxSelfAdjoint { tensor, gamma, theta });
        }
        if !args.is_empty() {
            return None;
        }
        Some(match head {
            "codazzi" => CheckId::Codazzi,
            "gauss" => CheckId::Gauss,
            "trace_nablaa" | "trace_nabla_a" => CheckId::TraceNablaA,
            "scalar_curv" => CheckId::ScalarCurv,
            "div_a2" => CheckId::DivA2,
            "div_a3" => CheckId::DivA3,
            "div_phi" => CheckId::DivPhi,
            "div_t1" => CheckId::DivT1,
            "div_t2" => CheckId::DivT2,
            "div_t3" => CheckId::DivT3,
            "kato" => CheckId::Kato,
            "simons" => CheckId::Simons,
            "stress_equiv" => CheckId::StressEquiv,
            "biconservativity" => CheckId::Biconservativity,
            "pointwise_int1" => CheckId::PointwiseInt1,
            "pointwise_int2" => CheckId::PointwiseInt2,
            "int_f2a2" => CheckId::IntF2A2,
            "int_fa3" => CheckId::IntFA3,
            "int_f2a_simons" => CheckId::IntF2ASimons,
            "int_fa2hessf" => CheckId::IntFA2HessF,
            "int_master" => CheckId::IntMaster,
            _ => return None,
        })
    }

    pub fn kind(&self) -> CheckKind {
        match self {
            CheckId::BoxZero { .. }
            | CheckId::BoxSelfAdjoint { .. }
            | CheckId::IntF2A2
            | CheckId::IntFA3
            | CheckId::IntF2ASimons
            | CheckId::IntFA2HessF
            | CheckId::IntMaster => CheckKind::Integral,
            _ => CheckKind::Pointwise,
        }
    }

    /// Checks whose identity only holds on biconservative hypersurfaces.
    pub fn biconservative_only(&self) -> bool {
        matches!(
            self,
            CheckId::Biconservativity
                | CheckId::DivT3
                | CheckId::PointwiseInt1
                | CheckId::PointwiseInt2
                | CheckId::IntF2A2
                | CheckId::IntFA3
                | CheckId::IntF2ASimons
                | CheckId::IntFA2HessF
        )
    }

    /// Residuals that depend on fourth chart derivatives.
    pub fn fourth_order(&self) -> bool {
        matches!(
            self,
            CheckId::Gauss | CheckId::ScalarCurv | CheckId::Simons | CheckId::PointwiseInt1 | CheckId::PointwiseInt2
        )
    }

    /// Human-readable statement of the identity behind the check.
    pub fn anchor(&self) -> String {
        match self {
            CheckId::Codazzi => "Codazzi: ⟨(∇A)(X,Y),Z⟩ totally symmetric".into(),
            CheckId::Gauss => "Gauss equation: R_ijji = c(g_ii g_jj − g_ij²) + h_ii h_jj − h_ij²".into(),
            CheckId::TraceNablaA => "trace (∇A)(·,·) = m grad f".into(),
            CheckId::ScalarCurv => "scalar curvature: m(m−1)(R − c) = m²f² − |A|²".into(),
            CheckId::GradTracePower(n) => {
                format!("(1/{n}) grad tr A^{n} = trace (∇A)(·, A^{}·)", n - 1)
            }
            CheckId::NablaPowerRecursion(n) => format!(
                "(∇A^{n})(X,Y) = (∇A)(X, A^{}Y) + A((∇A^{})(X,Y))",
                n - 1,
                n - 1
            ),
            CheckId::DivA2 => "Div A² = ½ grad|A|² + m A(grad f)".into(),
            CheckId::DivA3 => "Div A³ = ⅓ grad tr A³ + ½ A(grad|A|²) + m A²(grad f)".into(),
            CheckId::DivPhi => "Div φ = 0, φ = ψ₃Id − ψ₂A + mfA² − A³ (any hypersurface)".into(),
            CheckId::DivT1 => "Div(½m(m−1)R Id − Ric) = 0 (contracted Bianchi)".into(),
            CheckId::DivT2 => "Div(mf Id − A) = 0".into(),
            CheckId::DivT3 => "Div(f²A) = 0 on biconservative hypersurfaces".into(),
            CheckId::Kato => "¼|grad|A|²|² ≤ |A|²|∇A|²".into(),
            CheckId::Simons => "½Δ|A|² = |∇A|² + ⟨A, Hess mf⟩ + ½Σ(λi−λj)²(c+λiλj)".into(),
            CheckId::StressEquiv => "f Div S₂ = m Div(f²A)".into(),
            CheckId::Biconservativity => "A(grad f) = −(m/2) f grad f".into(),
            CheckId::PointwiseInt1 => {
                "½⟨grad f², grad|A|²⟩ = (m²f²/2)|grad f|² − f²⟨A, Hess mf⟩ − 2f⟨A², Hess f⟩".into()
            }
            CheckId::PointwiseInt2 => {
                "⅓⟨grad f, grad tr A³⟩ = −(m³f²/8)|grad f|² − (m/2)f⟨A², Hess f⟩ − ⟨A³, Hess f⟩".into()
            }
            CheckId::BoxZero { tensor, field } => {
                format!("∫ ⟨{}, Hess {}⟩ v_g = 0 for divergence-free Φ", tensor.name(), field.name())
            }
            CheckId::BoxSelfAdjoint { tensor, .. } => {
                format!("∫ γ□θ = ∫ θ□γ for □ = ⟨{}, Hess ·⟩", tensor.name())
            }
            CheckId::IntF2A2 => "−½∫f²Δ|A|² = ∫(m²f²/2)|grad f|² − 2f⟨A², Hess f⟩".into(),
            CheckId::IntFA3 => {
                "⅓∫fΔ tr A³ = ∫(m³f²/8)|grad f|² + (m/2)f⟨A², Hess f⟩ + ⟨A³, Hess f⟩".into()
            }
            CheckId::IntF2ASimons => "½∫f²Δ|A|² = ∫f²(|∇A|² + ½Σ(λi−λj)²(c+λiλj))".into(),
            CheckId::IntFA2HessF => {
                "∫2f⟨A², Hess f⟩ = ∫(m²f²/2)|grad f|² + f²(|∇A|² + ½Σ(λi−λj)²(c+λiλj))".into()
            }
            CheckId::IntMaster => "∫⟨φ, Hess f⟩ = 0 expanded into six integrated terms".into(),
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Every check in registry order.
pub fn all_checks() -> Vec<CheckId> {
    let mut out = vec![
        CheckId::Codazzi,
        CheckId::Gauss,
        CheckId::TraceNablaA,
        CheckId::ScalarCurv,
        CheckId::GradTracePower(2),
        CheckId::GradTracePower(3),
        CheckId::NablaPowerRecursion(2),
        CheckId::NablaPowerRecursion(3),
        CheckId::DivA2,
        CheckId::DivA3,
        CheckId::DivPhi,
        CheckId::DivT1,
        CheckId::DivT2,
        CheckId::DivT3,
        CheckId::Kato,
        CheckId::Simons,
        CheckId::StressEquiv,
        CheckId::Biconservativity,
        CheckId::PointwiseInt1,
        CheckId::PointwiseInt2,
    ];
    for tensor in [TensorFieldId::T1, TensorFieldId::T2, TensorFieldId::Phi] {
        for field in [ScalarFieldId::F, ScalarFieldId::Coordinate(0)] {
            out.push(CheckId::BoxZero { tensor: tensor.clone(), field });
        }
        out.push(CheckId::BoxSelfAdjoint {
            tensor,
            gamma: ScalarFieldId::F,
            theta: ScalarFieldId::Coordinate(0),
        });
    }
    out.extend([
        CheckId::IntF2A2,
        CheckId::IntFA3,
        CheckId::IntF2ASimons,
        CheckId::IntFA2HessF,
        CheckId::IntMaster,
    ]);
    out
}

pub fn check_names() -> Vec<String> {
    all_checks().iter().map(CheckId::name).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub pointwise: f64,
    pub fourth_order: f64,
    pub integral_floor: f64,
    /// Integral tolerance is `max(integral_floor, integral_factor × error estimate)`.
    pub integral_factor: f64,
    /// Largest biconservativity residual for a model to count as biconservative.
    pub biconservative: f64,
}

impl Default for Tolerances {
    fn default() -> Tolerances {
        Tolerances {
            pointwise: 1e-6,
            fourth_order: 1e-5,
            integral_floor: 1e-5,
            integral_factor: 3.0,
            biconservative: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.pointwise,
            self.fourth_order,
            self.integral_floor,
            self.integral_factor,
            self.biconservative,
        ];
        if all.iter().all(|t| *t > 0.0 && t.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config("tolerances must be positive and finite".into()))
        }
    }

    pub fn pointwise_for(&self, id: &CheckId) -> f64 {
        match id {
            CheckId::Kato => 0.0,
            CheckId::Biconservativity => self.biconservative,
            id if id.fourth_order() => self.fourth_order,
            _ => self.pointwise,
        }
    }

    pub fn integral_for(&self, error_estimate: f64) -> f64 {
        self.integral_floor.max(self.integral_factor * error_estimate)
    }
}

fn sigma_sum(c: f64, lambda: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &li in lambda {
        for &lj in lambda {
            acc += (li - lj).powi(2) * crate::hypersurface::sectional_principal(c, li, lj);
        }
    }
    acc
}

fn a_power(geom: &PointGeometry, n: u8) -> JetMatrix {
    let a = geom.shape_operator();
    (1..n).fold(a.clone(), |acc, _| acc.mul(a))
}

fn trace_power_jet(geom: &PointGeometry, n: u8) -> &crate::jets::TaylorJet {
    if n == 2 {
        geom.norm_a2()
    } else {
        geom.trace_a3()
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `|b|` for the biconservativity vector `b = A(grad f) + (m/2) f grad f`.
pub fn biconservativity_norm(geom: &PointGeometry) -> Result<f64> {
    Ok(norm(geom, &biconservativity_vector(geom)?))
}

/// `⟨R(∂i,∂j)∂j, ∂i⟩` from the intrinsic curvature.
fn intrinsic_sectional(geom: &PointGeometry, r: &[f64], i: usize, j: usize) -> f64 {
    let m = geom.dim();
    let g = geom.g();
    (0..m).map(|l| g[(i, l)] * r[((l * m + j) * m + i) * m + j]).sum()
}

/// Residual of a pointwise check at an evaluated point. With
/// `enforce_preconditions` false the biconservative-only identities are
/// evaluated regardless (used for negative controls).
pub fn pointwise_residual(
    geom: &PointGeometry,
    frame: &GeometryFrame,
    id: &CheckId,
    enforce_preconditions: bool,
) -> Result<f64> {
    let m = geom.dim();
    let mf = m as f64;
    let c = geom.c();
    let f = frame.f;
    Ok(match id {
        CheckId::Codazzi => {
            let mut d = Tensor3::zeros(m);
            for i in 0..m {
                for k in 0..m {
                    for j in 0..m {
                        d.set(i, k, j, frame.nabla_a.get(i, k, j) - frame.nabla_a.get(i, j, k));
                    }
                }
            }
            norm2_12(geom, &d).max(0.0).sqrt()
        }
        CheckId::Gauss => {
            let r = geom.riemann()?;
            let (g, h) = (&frame.g, &frame.h);
            let mut worst: f64 = 0.0;
            for i in 0..m {
                for j in (i + 1)..m {
                    let lhs = intrinsic_sectional(geom, &r, i, j);
                    let rhs = c * (g[(i, i)] * g[(j, j)] - g[(i, j)].powi(2)) + h[(i, i)] * h[(j, j)]
                        - h[(i, j)].powi(2);
                    worst = worst.max((lhs - rhs).abs() / (g[(i, i)] * g[(j, j)]));
                }
            }
            worst
        }
        CheckId::TraceNablaA => {
            let (_, grad_f) = gradient_of(geom, geom.f())?;
            norm(geom, &sub(&divergence_of(geom, &frame.nabla_a), &scaled(&grad_f, mf)))
        }
        CheckId::ScalarCurv => {
            let r = geom.riemann()?;
            let gi = &frame.g_inv;
            let mut scal = 0.0;
            for k in 0..m {
                for j in 0..m {
                    let ric: f64 = (0..m).map(|i| r[((i * m + k) * m + i) * m + j]).sum();
                    scal += gi[(k, j)] * ric;
                }
            }
            let rhs = mf * (mf - 1.0) * c + mf * mf * f * f - frame.norm_a2;
            (scal - rhs).abs() / (1.0 + (mf * (mf - 1.0) * c).abs() + mf * mf * f * f + frame.norm_a2)
        }
        CheckId::GradTracePower(n) => {
            let (_, grad) = gradient_of(geom, trace_power_jet(geom, *n))?;
            let b = a_power(geom, n - 1).values();
            let gi = &frame.g_inv;
            let w: Vec<f64> = (0..m)
                .map(|p| {
                    let mut acc = 0.0;
                    for k in 0..m {
                        for j in 0..m {
                            for q in 0..m {
                                acc += gi[(k, j)] * frame.nabla_a.get(p, k, q) * b[(q, j)];
                            }
                        }
                    }
                    acc
                })
                .collect();
            norm(geom, &sub(&scaled(&grad, 1.0 / *n as f64), &w))
        }
        CheckId::NablaPowerRecursion(n) => {
            let an = a_power(geom, *n);
            let prev = a_power(geom, n - 1);
            let nab_n = geom.nabla_11(&an)?;
            let nab_prev = if *n == 2 { frame.nabla_a.clone() } else { geom.nabla_11(&prev)? };
            let (b, a) = (prev.values(), &frame.a);
            let mut worst: f64 = 0.0;
            for k in 0..m {
                for j in 0..m {
                    let v: Vec<f64> = (0..m)
                        .map(|p| {
                            let mut acc = nab_n.get(p, k, j);
                            for q in 0..m {
                                acc -= frame.nabla_a.get(p, k, q) * b[(q, j)];
                                acc -= a[(p, q)] * nab_prev.get(q, k, j);
                            }
                            acc
                        })
                        .collect();
                    let scale = (frame.g[(k, k)] * frame.g[(j, j)]).sqrt();
                    worst = worst.max(norm(geom, &v) / scale);
                }
            }
            worst
        }
        CheckId::DivA2 => {
            let div = divergence_of(geom, &geom.nabla_11(&a_power(geom, 2))?);
            let (_, grad_f) = gradient_of(geom, geom.f())?;
            let (_, grad_a2) = gradient_of(geom, geom.norm_a2())?;
            let rhs: Vec<f64> = grad_a2
                .iter()
                .zip(apply(&frame.a, &grad_f))
                .map(|(x, y)| 0.5 * x + mf * y)
                .collect();
            norm(geom, &sub(&div, &rhs))
        }
        CheckId::DivA3 => {
            let div = divergence_of(geom, &geom.nabla_11(&a_power(geom, 3))?);
            let (_, grad_f) = gradient_of(geom, geom.f())?;
            let (_, grad_a2) = gradient_of(geom, geom.norm_a2())?;
            let (_, grad_a3) = gradient_of(geom, geom.trace_a3())?;
            let a2 = &frame.a * &frame.a;
            let t1 = apply(&frame.a, &grad_a2);
            let t2 = apply(&a2, &grad_f);
            let rhs: Vec<f64> = (0..m)
                .map(|i| grad_a3[i] / 3.0 + 0.5 * t1[i] + mf * t2[i])
                .collect();
            norm(geom, &sub(&div, &rhs))
        }
        CheckId::DivPhi => div_norm(geom, &TensorFieldId::Phi)?,
        CheckId::DivT1 => div_norm(geom, &TensorFieldId::T1)?,
        CheckId::DivT2 => div_norm(geom, &TensorFieldId::T2)?,
        CheckId::DivT3 => div_norm(geom, &TensorFieldId::T3)?,
        CheckId::Kato => {
            let (_, grad_a2) = gradient_of(geom, geom.norm_a2())?;
            let lhs = 0.25 * inner(geom, &grad_a2, &grad_a2);
            let rhs = frame.norm_a2 * norm2_12(geom, &frame.nabla_a);
            (lhs - rhs - 1e-12 * (1.0 + rhs.abs())).max(0.0)
        }
        CheckId::Simons => {
            let da2 = derivatives_of(geom, geom.norm_a2())?;
            let df = derivatives_of(geom, geom.f())?;
            let rhs = norm2_12(geom, &frame.nabla_a)
                + mf * contract_11_02(geom, &frame.a, &df.hess)
                + 0.5 * sigma_sum(c, &frame.lambda);
            (0.5 * da2.laplacian - rhs).abs()
        }
        CheckId::StressEquiv => stress_equivalence_of(geom)?,
        CheckId::Biconservativity => biconservativity_norm(geom)?,
        CheckId::PointwiseInt1 | CheckId::PointwiseInt2 => {
            if enforce_preconditions {
                let b = biconservativity_norm(geom)?;
                if b > Tolerances::default().biconservative {
                    return Err(Error::Precondition {
                        message: format!("{} needs a biconservative point", id.name()),
                        value: b,
                    });
                }
            }
            let df = derivatives_of(geom, geom.f())?;
            let a2 = &frame.a * &frame.a;
            let a2_hess = contract_11_02(geom, &a2, &df.hess);
            let grad_f2 = inner(geom, &df.grad, &df.grad);
            if *id == CheckId::PointwiseInt1 {
                let (_, grad_na2) = gradient_of(geom, geom.norm_a2())?;
                let lhs = f * inner(geom, &df.grad, &grad_na2);
                let rhs = 0.5 * mf * mf * f * f * grad_f2
                    - f * f * mf * contract_11_02(geom, &frame.a, &df.hess)
                    - 2.0 * f * a2_hess;
                (lhs - rhs).abs()
            } else {
                let (_, grad_ta3) = gradient_of(geom, geom.trace_a3())?;
                let lhs = inner(geom, &df.grad, &grad_ta3) / 3.0;
                let rhs = -mf.powi(3) * f * f / 8.0 * grad_f2
                    - 0.5 * mf * f * a2_hess
                    - contract_11_02(geom, &(&a2 * &frame.a), &df.hess);
                (lhs - rhs).abs()
            }
        }
        other => return arg(format!("{} is an integral check", other.name())),
    })
}

fn div_norm(geom: &PointGeometry, t: &TensorFieldId) -> Result<f64> {
    let nab = geom.nabla_11(&tensor_jet(geom, t)?)?;
    Ok(norm(geom, &divergence_of(geom, &nab)))
}

/// Pointwise check at a chart point, with preconditions enforced.
pub fn run_pointwise_check(chart: &ChartMap, u: &[f64], id: &CheckId) -> Result<f64> {
    let geom = PointGeometry::new(chart, u, crate::jets::MAX_ORDER)?;
    let frame = geom.frame()?;
    pointwise_residual(&geom, &frame, id, true)
}

fn box_value(geom: &PointGeometry, phi: &DMatrix<f64>, field: &ScalarFieldId) -> Result<f64> {
    let d = scalar_derivatives_at(geom, field)?;
    Ok(contract_11_02(geom, phi, &d.hess))
}

/// Integrand whose integral vanishes for an integral check.
pub fn integrand(geom: &PointGeometry, frame: &GeometryFrame, id: &CheckId) -> Result<f64> {
    let m = geom.dim() as f64;
    let c = geom.c();
    let f = frame.f;
    let needs_f = !matches!(id, CheckId::BoxZero { .. } | CheckId::BoxSelfAdjoint { .. });
    let (df, da2, da3) = if needs_f {
        (
            Some(derivatives_of(geom, geom.f())?),
            Some(derivatives_of(geom, geom.norm_a2())?),
            Some(derivatives_of(geom, geom.trace_a3())?),
        )
    } else {
        (None, None, None)
    };
    let parts = || {
        let df = df.as_ref().expect("computed");
        let a2 = &frame.a * &frame.a;
        let a3 = &a2 * &frame.a;
        let grad_f2 = inner(geom, &df.grad, &df.grad);
        let nabla2 = norm2_12(geom, &frame.nabla_a);
        let curv = nabla2 + 0.5 * sigma_sum(c, &frame.lambda);
        (
            grad_f2,
            contract_11_02(geom, &a2, &df.hess),
            contract_11_02(geom, &a3, &df.hess),
            curv,
        )
    };
    Ok(match id {
        CheckId::BoxZero { tensor, field } => {
            let phi = tensor_jet(geom, tensor)?.values();
            box_value(geom, &phi, field)?
        }
        CheckId::BoxSelfAdjoint { tensor, gamma, theta } => {
            let phi = tensor_jet(geom, tensor)?.values();
            let g = crate::tensor_calculus::scalar_jet(geom, gamma)?.value();
            let t = crate::tensor_calculus::scalar_jet(geom, theta)?.value();
            g * box_value(geom, &phi, theta)? - t * box_value(geom, &phi, gamma)?
        }
        CheckId::IntF2A2 => {
            let (grad_f2, a2h, _, _) = parts();
            let lap = da2.as_ref().expect("computed").laplacian;
            -0.5 * f * f * lap - 0.5 * m * m * f * f * grad_f2 + 2.0 * f * a2h
        }
        CheckId::IntFA3 => {
            let (grad_f2, a2h, a3h, _) = parts();
            let lap = da3.as_ref().expect("computed").laplacian;
            f * lap / 3.0 - m.powi(3) * f * f / 8.0 * grad_f2 - 0.5 * m * f * a2h - a3h
        }
        CheckId::IntF2ASimons => {
            let (_, _, _, curv) = parts();
            let lap = da2.as_ref().expect("computed").laplacian;
            0.5 * f * f * lap - f * f * curv
        }
        CheckId::IntFA2HessF => {
            let (grad_f2, a2h, _, curv) = parts();
            2.0 * f * a2h - 0.5 * m * m * f * f * grad_f2 - f * f * curv
        }
        CheckId::IntMaster => {
            let (grad_f2, a2h, a3h, curv) = parts();
            let lap2 = da2.as_ref().expect("computed");
            let lap3 = da3.as_ref().expect("computed").laplacian;
            let grad_na2 = inner(geom, &lap2.grad, &lap2.grad);
            let psi = m * m * f * f - frame.norm_a2;
            -0.5 * m * psi * grad_f2 + f * lap3 / 3.0 - 0.5 * m * f * f * lap2.laplacian
                - grad_na2 / (4.0 * m)
                + psi / (2.0 * m) * curv
                + m * f * a2h
                - a3h
        }
        other => return arg(format!("{} is a pointwise check", other.name())),
    })
}

/// `|∫ integrand v_g|` with its quadrature error estimate. Biconservative-only
/// integrals first verify the model over the grid.
pub fn run_integral_check(chart: &ChartMap, grid: &[usize], id: &CheckId) -> Result<crate::quadrature::Integral> {
    if id.kind() != CheckKind::Integral {
        return arg(format!("{} is a pointwise check", id.name()));
    }
    if id.biconservative_only() {
        let fine = QuadratureGrid::new(chart, grid)?;
        let worst = fine
            .nodes
            .par_iter()
            .map(|u| biconservativity_norm(&PointGeometry::new(chart, u, crate::jets::MAX_ORDER)?))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if worst > Tolerances::default().biconservative {
            return Err(Error::Precondition {
                message: format!("{} needs a biconservative model", id.name()),
                value: worst,
            });
        }
    }
    let out = crate::quadrature::integrate(chart, grid, |g| integrand(g, &g.frame()?, id))?;
    Ok(crate::quadrature::Integral {
        value: out.value.abs(),
        error_estimate: out.error_estimate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skip,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
            Status::Error => "ERROR",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub model: String,
    pub grid: Vec<usize>,
    pub residual_max: f64,
    /// Root mean square over the evaluated points (pointwise checks) or
    /// the integral residual itself.
    pub residual_l2: f64,
    pub tol: f64,
    pub status: Status,
    pub points: usize,
    pub error_estimate: Option<f64>,
    pub anchor: String,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub jet_order: usize,
    /// Derivatives come from Taylor jets, so no finite-difference step.
    pub fd_step: Option<f64>,
    pub timestamp: Option<String>,
    pub tolerances: Tolerances,
    pub conventions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub metadata: ReportMetadata,
    pub checks: Vec<CheckResult>,
}

pub fn convention_notes() -> Vec<String> {
    vec![
        "Laplacian: Δ = +trace Hess; the Simons identity reads ½Δ|A|² = |∇A|² + ⟨A, Hess mf⟩ + ½Σ(λi−λj)²(c+λiλj), i.e. the rough-Laplacian form −½Δ|A|² with Δ = −trace Hess".into(),
        "Simons identity: the left-hand side is ½Δ|A|²".into(),
        "scalar curvature: m(m−1)(R − c) = m²f² − |A|², with the ambient curvature c rather than 1".into(),
        "Hess(mf) is evaluated as m·Hess f".into(),
        "Div(f²A) = 2f·(A(grad f) + (m/2) f grad f); its norm is 2|f| times the biconservativity residual".into(),
        "normal oriented so that f ≥ 0 at the model's reference point".into(),
    ]
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| matches!(c.status, Status::Pass | Status::Skip))
    }

    pub fn any_failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn any_error(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Error)
    }

    pub fn get(&self, check: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check == check)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<VerificationReport> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    /// CSV projection: `check,model,grid,residual_max,residual_l2,tol,status,note`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Config(e.to_string());
        w.write_record(["check", "model", "grid", "residual_max", "residual_l2", "tol", "status", "note"])
            .map_err(io)?;
        for c in &self.checks {
            w.write_record([
                c.check.clone(),
                c.model.clone(),
                grid_label(&c.grid),
                format!("{:e}", c.residual_max),
                format!("{:e}", c.residual_l2),
                format!("{:e}", c.tol),
                c.status.to_string(),
                c.note.clone(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fixed-width table with the statement of each identity.
    pub fn to_pretty(&self) -> String {
        let mut out = format!(
            "{:<28} {:<6} {:>11} {:>11} {:>9}  {}\n",
            "check", "status", "max", "rms", "tol", "identity"
        );
        for c in &self.checks {
            out.push_str(&format!(
                "{:<28} {:<6} {:>11.3e} {:>11.3e} {:>9.1e}  {}\n",
                c.check, c.status, c.residual_max, c.residual_l2, c.tol, c.anchor
            ));
            if !c.note.is_empty() {
                out.push_str(&format!("{:<28} {}\n", "", c.note));
            }
        }
        out
    }
}

pub fn grid_label(grid: &[usize]) -> String {
    grid.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub jet_order: usize,
    pub tolerances: Tolerances,
    /// Empty means every registered check.
    pub checks: Vec<CheckId>,
    pub timestamp: Option<String>,
}

impl Default for SuiteConfig {
    fn default() -> SuiteConfig {
        SuiteConfig {
            jet_order: crate::jets::MAX_ORDER,
            tolerances: Tolerances::default(),
            checks: Vec::new(),
            timestamp: None,
        }
    }
}

/// Fourth-order checks skip chart nodes whose coordinate scales
/// `max g_ii / min g_ii` exceed this: round-off there grows like the ratio
/// squared, e.g. where two polar angles sit on their caps at once.
pub const SCALE_RATIO_LIMIT: f64 = 1e10;

/// `max g_ii / min g_ii` at a point.
pub fn coordinate_scale_ratio(g: &nalgebra::DMatrix<f64>) -> f64 {
    let d = g.diagonal();
    d.max() / d.min()
}

struct NodeOutput {
    density: f64,
    ill_conditioned: bool,
    bicons: Result<f64>,
    pointwise: Vec<Result<f64>>,
    integrands: Vec<Result<f64>>,
}

fn evaluate_node(chart: &ChartMap, u: &[f64], order: usize, pointwise: &[&CheckId], integrals: &[&CheckId]) -> Result<NodeOutput> {
    let geom = PointGeometry::new(chart, u, order)?;
    let frame = geom.frame()?;
    Ok(NodeOutput {
        density: frame.g.determinant().sqrt(),
        ill_conditioned: coordinate_scale_ratio(&frame.g) > SCALE_RATIO_LIMIT,
        bicons: biconservativity_norm(&geom),
        pointwise: pointwise
            .iter()
            .map(|id| pointwise_residual(&geom, &frame, id, false))
            .collect(),
        integrands: integrals.iter().map(|id| integrand(&geom, &frame, id)).collect(),
    })
}

fn evaluate_grid(
    chart: &ChartMap,
    grid: &QuadratureGrid,
    order: usize,
    pointwise: &[&CheckId],
    integrals: &[&CheckId],
) -> Vec<Result<NodeOutput>> {
    grid.nodes
        .par_iter()
        .map(|u| evaluate_node(chart, u, order, pointwise, integrals))
        .collect()
}

fn first_error<'a>(mut errs: impl Iterator<Item = &'a Error>) -> Option<String> {
    errs.next().map(|e| e.to_string())
}

/// Runs the selected checks over the quadrature grid of `resolution`.
pub fn run_suite(chart: &ChartMap, model_id: &str, resolution: &[usize], config: &SuiteConfig) -> VerificationReport {
    let checks = if config.checks.is_empty() { all_checks() } else { config.checks.clone() };
    let metadata = ReportMetadata {
        jet_order: config.jet_order,
        fd_step: None,
        timestamp: config.timestamp.clone(),
        tolerances: config.tolerances,
        conventions: convention_notes(),
    };
    let tol = &config.tolerances;
    let row = |id: &CheckId, grid: &[usize]| CheckResult {
        check: id.name(),
        model: model_id.to_string(),
        grid: grid.to_vec(),
        residual_max: 0.0,
        residual_l2: 0.0,
        tol: 0.0,
        status: Status::Pass,
        points: 0,
        error_estimate: None,
        anchor: id.anchor(),
        note: String::new(),
    };
    let fail_all = |msg: String| VerificationReport {
        metadata: metadata.clone(),
        checks: checks
            .iter()
            .map(|id| CheckResult {
                status: Status::Error,
                note: msg.clone(),
                ..row(id, resolution)
            })
            .collect(),
    };
    if !(3..=crate::jets::MAX_ORDER).contains(&config.jet_order) {
        return fail_all(format!("jet order must be 3 or 4, got {}", config.jet_order));
    }
    let fine = match QuadratureGrid::new(chart, resolution) {
        Ok(g) => g,
        Err(e) => return fail_all(e.to_string()),
    };
    let res = fine.resolution.clone();
    let pointwise: Vec<&CheckId> = checks.iter().filter(|c| c.kind() == CheckKind::Pointwise).collect();
    let compact = chart.is_compact();
    let integrals: Vec<&CheckId> = if compact {
        checks.iter().filter(|c| c.kind() == CheckKind::Integral).collect()
    } else {
        Vec::new()
    };

    let nodes = evaluate_grid(chart, &fine, config.jet_order, &pointwise, &integrals);
    let coarse_nodes = if integrals.is_empty() {
        None
    } else {
        let g = fine.coarse(chart);
        Some((evaluate_grid(chart, &g, config.jet_order, &[], &integrals), g))
    };

    let node_errors: Vec<&Error> = nodes.iter().filter_map(|n| n.as_ref().err()).collect();
    let bicons_max = nodes
        .iter()
        .filter_map(|n| n.as_ref().ok())
        .filter_map(|n| n.bicons.as_ref().ok())
        .fold(0.0f64, |a, &b| a.max(b));
    let bicons_known = node_errors.is_empty()
        && nodes.iter().all(|n| n.as_ref().map(|n| n.bicons.is_ok()).unwrap_or(false));
    let biconservative = bicons_known && bicons_max <= tol.biconservative;

    let mut out = Vec::with_capacity(checks.len());
    for id in &checks {
        let mut r = row(id, &res);
        if let Some(msg) = first_error(node_errors.iter().copied()) {
            r.status = Status::Error;
            r.note = format!("{} of {} points failed: {msg}", node_errors.len(), fine.len());
            out.push(r);
            continue;
        }
        if id.biconservative_only() && !biconservative {
            r.status = Status::Skip;
            r.note = if bicons_known {
                format!("model is not biconservative: max residual {bicons_max:.3e}")
            } else {
                "biconservativity could not be evaluated".into()
            };
            if *id == CheckId::Biconservativity {
                r.residual_max = bicons_max;
                r.tol = tol.biconservative;
            }
            out.push(r);
            continue;
        }
        match id.kind() {
            CheckKind::Pointwise => {
                let k = pointwise.iter().position(|c| c == &id).expect("registered");
                let vals: Vec<&Result<f64>> = nodes
                    .iter()
                    .map(|n| n.as_ref().expect("checked"))
                    .filter(|n| !(id.fourth_order() && n.ill_conditioned))
                    .map(|n| &n.pointwise[k])
                    .collect();
                r.points = vals.len();
                if vals.len() < nodes.len() {
                    r.note = format!(
                        "{} nodes with coordinate scale ratio above {SCALE_RATIO_LIMIT:e} skipped",
                        nodes.len() - vals.len()
                    );
                }
                r.tol = tol.pointwise_for(id);
                if let Some(msg) = first_error(vals.iter().filter_map(|v| v.as_ref().err())) {
                    r.status = Status::Error;
                    r.note = msg;
                } else {
                    let xs: Vec<f64> = vals.iter().map(|v| *v.as_ref().expect("ok")).collect();
                    r.residual_max = xs.iter().fold(0.0f64, |a, &b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) });
                    let mut s = CompensatedSum::default();
                    xs.iter().for_each(|x| s.add(x * x));
                    r.residual_l2 = (s.value() / xs.len().max(1) as f64).sqrt();
                    r.status = if r.residual_max <= r.tol { Status::Pass } else { Status::Fail };
                }
            }
            CheckKind::Integral => {
                if !compact {
                    r.status = Status::Skip;
                    r.note = "integral checks need a compact model".into();
                    out.push(r);
                    continue;
                }
                let k = integrals.iter().position(|c| c == &id).expect("registered");
                let sum = |nodes: &[Result<NodeOutput>], grid: &QuadratureGrid| -> Result<f64> {
                    let mut s = CompensatedSum::default();
                    for (n, w) in nodes.iter().zip(&grid.weights) {
                        let n = n.as_ref().map_err(Clone::clone)?;
                        s.add(w * n.density * n.integrands[k].clone()?);
                    }
                    Ok(s.value())
                };
                let value = sum(&nodes, &fine);
                let coarse = match &coarse_nodes {
                    Some((cn, cg)) => sum(cn, cg),
                    None => Err(Error::Argument("coarse grid unavailable".into())),
                };
                match (value, coarse) {
                    (Ok(v), Ok(cv)) => {
                        let err = (v - cv).abs();
                        r.points = fine.len();
                        r.residual_max = v.abs();
                        r.residual_l2 = v.abs();
                        r.error_estimate = Some(err);
                        r.tol = tol.integral_for(err);
                        r.status = if r.residual_max <= r.tol { Status::Pass } else { Status::Fail };
                    }
                    (Err(e), _) | (_, Err(e)) => {
                        r.status = Status::Error;
                        r.note = e.to_string();
                    }
                }
            }
        }
        out.push(r);
    }
    VerificationReport { metadata, checks: out }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for id in all_checks() {
            assert_eq!(CheckId::parse(&id.name()), Some(id.clone()), "{}", id.name());
        }
        assert_eq!(CheckId::parse("grad_trace_power_3"), Some(CheckId::GradTracePower(3)));
        assert_eq!(CheckId::parse("grad_trace_power(4)"), None);
        assert_eq!(CheckId::parse("bogus"), None);
    }

    #[test]
    fn integral_tolerance_tracks_error_estimate() {
        let t = Tolerances::default();
        assert_eq!(t.integral_for(0.0), 1e-5);
        assert_eq!(t.integral_for(1e-4), 3.0 * 1e-4);
    }
}
