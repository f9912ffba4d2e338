//! Arithmetic behind the rigidity theorems: hypothesis predicates, the
//! Okumura-type bound, the two-curvature branch and the admissible region
//! of product spheres.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::hypersurface::{sectional_principal, ChartMap, GeometryFrame, PointGeometry};
use crate::quadrature::QuadratureGrid;

/// Slack for strict and non-strict comparisons.
pub const SLACK: f64 = 1e-12;

/// Outcome of a comparison that may sit on its boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    True,
    False,
    Boundary,
}

impl Verdict {
    /// Classifies `lhs < rhs`; values within [`SLACK`] are a boundary.
    pub fn strict_less(lhs: f64, rhs: f64) -> Verdict {
        if (lhs - rhs).abs() <= SLACK {
            Verdict::Boundary
        } else if lhs < rhs {
            Verdict::True
        } else {
            Verdict::False
        }
    }

    pub fn holds(self) -> bool {
        self == Verdict::True
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::True => "true",
            Verdict::False => "false",
            Verdict::Boundary => "boundary",
        }
    }
}

/// `|A|² ≤ m²f²/6`.
pub fn sixth_bound_hypothesis(f: f64, norm_a2: f64, m: usize) -> bool {
    let m = m as f64;
    norm_a2 <= m * m * f * f / 6.0 + SLACK
}

/// `m ≥ 7` and `|A|² ≤ m²f²/(m−1)`.
pub fn flat_okumura_hypothesis(f: f64, norm_a2: f64, m: usize) -> bool {
    if m < 7 {
        return false;
    }
    let mf2 = (m * m) as f64 * f * f;
    let bound = mf2 / (m - 1) as f64;
    debug_assert!(bound <= mf2 / 6.0 + SLACK * mf2.max(1.0));
    norm_a2 <= bound + SLACK
}

/// Right-hand side of the Okumura-type bound on `|A|²`.
pub fn okumura_bound(c: f64, f: f64, m: usize) -> Result<f64> {
    if m < 2 {
        return arg(format!("dimension must be at least 2, got {m}"));
    }
    if c < 0.0 && c + f * f < 0.0 {
        return Err(Error::Precondition {
            message: "c + f² must be non-negative when c < 0".into(),
            value: c + f * f,
        });
    }
    let mm = m as f64;
    let inner = mm * mm * f * f + 4.0 * (mm - 1.0) * c;
    if f * f * inner < 0.0 {
        return Err(Error::Precondition {
            message: "negative discriminant m²f⁴ + 4(m−1)cf²".into(),
            value: f * f * inner,
        });
    }
    // m²f²/(m−1) + mc(q − (m−4)|f|)/(m|f| + q) with q = √(m²f² + 4(m−1)c);
    // the correction vanishes identically at c = 0
    let q = inner.max(0.0).sqrt();
    let base = (m * m) as f64 * f * f / (m - 1) as f64;
    let den = mm * f.abs() + q;
    if den == 0.0 {
        return Ok(base);
    }
    Ok(base + mm * c * (q - (mm - 4.0) * f.abs()) / den)
}

pub fn okumura_bound_holds(c: f64, f: f64, norm_a2: f64, m: usize) -> Result<bool> {
    Ok(norm_a2 <= okumura_bound(c, f, m)? + SLACK)
}

/// `Σ_{i≠j} (λᵢ−λⱼ)²(c + λᵢλⱼ)`.
pub fn okumura_conclusion_sample(c: f64, lambda: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (i, &li) in lambda.iter().enumerate() {
        for (j, &lj) in lambda.iter().enumerate() {
            if i != j {
                acc += (li - lj).powi(2) * sectional_principal(c, li, lj);
            }
        }
    }
    acc
}

/// Mean curvature and `|A|²` of a principal curvature vector.
pub fn invariants(lambda: &[f64]) -> (f64, f64) {
    let m = lambda.len() as f64;
    (lambda.iter().sum::<f64>() / m, lambda.iter().map(|l| l * l).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductQuery {
    pub m: usize,
    pub m1: usize,
    pub r1: f64,
}

impl ProductQuery {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return arg(format!("m must be at least 2, got {}", self.m));
        }
        if self.m1 < 1 || self.m1 >= self.m {
            return arg(format!("m1 must lie in [1, {}], got {}", self.m - 1, self.m1));
        }
        if !(self.r1 > 0.0 && self.r1 < 1.0) {
            return arg(format!("r1 must lie in (0, 1), got {}", self.r1));
        }
        Ok(())
    }

    pub fn r2(&self) -> f64 {
        (1.0 - self.r1 * self.r1).sqrt()
    }

    /// Principal curvatures `r₂/r₁` (multiplicity m1) and `−r₁/r₂`.
    pub fn principal(&self) -> (f64, f64) {
        (self.r2() / self.r1, -self.r1 / self.r2())
    }

    /// `(f, |A|²)` of `S^{m1}(r1) × S^{m−m1}(r2)` in the unit sphere.
    pub fn invariants(&self) -> (f64, f64) {
        let (l1, l2) = self.principal();
        let (m1, m2) = (self.m1 as f64, (self.m - self.m1) as f64);
        ((m1 * l1 + m2 * l2) / self.m as f64, m1 * l1 * l1 + m2 * l2 * l2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductDetails {
    pub status: Verdict,
    /// `√(1/m)`.
    pub threshold: f64,
    /// `(1/r₁² − 1)²`.
    pub r1_relation: f64,
    /// `(m−1)²`.
    pub r1_relation_bound: f64,
    /// `5(r₂/r₁)² − (m−7)(m−1)(r₁/r₂)²`, for m1 = 1.
    pub chain_partial: Option<f64>,
    /// `5(r₂/r₁)² + 2(m−1) − (m−7)(m−1)(r₁/r₂)²`, for m1 = 1; `≤ 0` is the hypothesis.
    pub chain_full: Option<f64>,
    pub norm_a2: f64,
    pub m2f2_over_6: f64,
    pub hypothesis: bool,
}

/// `r₁ > √(1/m)`; a boundary hit is not admissible.
pub fn product_admissible(q: &ProductQuery) -> Result<(bool, ProductDetails)> {
    q.validate()?;
    let m = q.m as f64;
    let threshold = (1.0 / m).sqrt();
    let status = Verdict::strict_less(threshold, q.r1);
    let x = (q.r2() / q.r1).powi(2);
    let (chain_partial, chain_full) = if q.m1 == 1 {
        let p = 5.0 * x - (m - 7.0) * (m - 1.0) / x;
        (Some(p), Some(p + 2.0 * (m - 1.0)))
    } else {
        (None, None)
    };
    let (f, norm_a2) = q.invariants();
    let details = ProductDetails {
        status,
        threshold,
        r1_relation: (1.0 / (q.r1 * q.r1) - 1.0).powi(2),
        r1_relation_bound: (m - 1.0).powi(2),
        chain_partial,
        chain_full,
        norm_a2,
        m2f2_over_6: m * m * f * f / 6.0,
        hypothesis: sixth_bound_hypothesis(f, norm_a2, q.m),
    };
    Ok((status.holds(), details))
}

/// One row of a product scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub r1: f64,
    pub norm_a2: f64,
    pub m2f2_over_6: f64,
    pub hypothesis: bool,
    pub admissible: Verdict,
    pub chain_partial: Option<f64>,
    pub chain_full: Option<f64>,
}

/// Scans `r1 = r1_min + k·step` up to `r1_max`.
pub fn scan_products(m: usize, m1: usize, r1_min: f64, r1_max: f64, step: f64) -> Result<Vec<ScanRow>> {
    if !(step > 0.0) || !step.is_finite() {
        return arg(format!("step must be positive, got {step}"));
    }
    if !(r1_min > 0.0 && r1_max < 1.0 && r1_min <= r1_max) {
        return arg(format!("need 0 < r1-min ≤ r1-max < 1, got [{r1_min}, {r1_max}]"));
    }
    let count = ((r1_max - r1_min) / step + 1e-9).floor() as usize + 1;
    ProductQuery { m, m1, r1: r1_min }.validate()?;
    (0..count)
        .into_par_iter()
        .map(|k| {
            let q = ProductQuery { m, m1, r1: r1_min + k as f64 * step };
            let (_, d) = product_admissible(&q)?;
            Ok(ScanRow {
                r1: q.r1,
                norm_a2: d.norm_a2,
                m2f2_over_6: d.m2f2_over_6,
                hypothesis: d.hypothesis,
                admissible: d.status,
                chain_partial: d.chain_partial,
                chain_full: d.chain_full,
            })
        })
        .collect()
}

/// Mean curvature of the non-umbilical branch `λ₁ = −mf/2` (once),
/// `λ₂ = 3mf/(2(m−1))`, which needs `c = 3m²f²/(4(m−1))`. None when `c ≤ 0`
/// or `m < 3`.
pub fn two_curvature_branch(c: f64, m: usize) -> Option<f64> {
    if m < 3 || c <= 0.0 {
        return None;
    }
    let m = m as f64;
    Some((4.0 * (m - 1.0) * c / 3.0).sqrt() / m)
}

/// `c + λ₁λ₂`, zero whenever two distinct principal curvatures satisfy the
/// pairwise relation.
pub fn two_curvature_relation(c: f64, l1: f64, l2: f64) -> f64 {
    c + l1 * l2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MasterTerms {
    /// `(m/2)|A|²‖grad f‖²`.
    pub term1: f64,
    /// `(mf²/4 − 3|A|²/(2m))|∇A|²`.
    pub term2: f64,
    /// `(mf²/4 − |A|²/(2m))·½Σ(λᵢ−λⱼ)²(c+λᵢλⱼ)`.
    pub term3: f64,
    pub coef2: f64,
    pub coef3: f64,
}

/// Summands of the master integral inequality at a point.
pub fn master_inequality_integrand(frame: &GeometryFrame, c: f64) -> MasterTerms {
    let m = frame.g.nrows();
    let mf = m as f64;
    let t = &frame.nabla_a;
    let df: Vec<f64> = (0..m).map(|k| (0..m).map(|i| t.get(i, k, i)).sum::<f64>() / mf).collect();
    let mut grad2 = 0.0;
    let mut nabla2 = 0.0;
    for k in 0..m {
        for q in 0..m {
            grad2 += frame.g_inv[(k, q)] * df[k] * df[q];
        }
    }
    for i in 0..m {
        for a in 0..m {
            for k in 0..m {
                for b in 0..m {
                    for j in 0..m {
                        for cc in 0..m {
                            nabla2 += frame.g[(i, a)]
                                * frame.g_inv[(k, b)]
                                * frame.g_inv[(j, cc)]
                                * t.get(i, k, j)
                                * t.get(a, b, cc);
                        }
                    }
                }
            }
        }
    }
    let f2 = frame.f * frame.f;
    let coef2 = mf * f2 / 4.0 - 1.5 * frame.norm_a2 / mf;
    let coef3 = mf * f2 / 4.0 - 0.5 * frame.norm_a2 / mf;
    MasterTerms {
        term1: 0.5 * mf * frame.norm_a2 * grad2,
        term2: coef2 * nabla2,
        term3: coef3 * 0.5 * okumura_conclusion_sample(c, &frame.lambda),
        coef2,
        coef3,
    }
}

/// Theorem predicates evaluated over the nodes of a model grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremSummary {
    pub model: String,
    pub curvature: f64,
    pub dim: usize,
    pub points: usize,
    /// Nodes where each hypothesis holds.
    pub sixth_bound_points: usize,
    pub flat_okumura_points: usize,
    pub okumura_points: usize,
    /// Smallest Okumura conclusion sum among nodes satisfying the bound.
    pub okumura_conclusion_min: Option<f64>,
    /// Smallest `m²f²/6 − |A|²`.
    pub sixth_bound_margin_min: f64,
    pub master_coef2_min: f64,
    pub master_coef3_min: f64,
    pub two_curvature_branch: Option<f64>,
    /// Okumura preconditions or chart failures, first message.
    pub note: Option<String>,
}

impl TheoremSummary {
    /// True when the Okumura-type conclusion held wherever the bound did.
    pub fn consistent(&self) -> bool {
        self.okumura_conclusion_min.is_none_or(|v| v >= -1e-10)
    }
}

pub fn evaluate_model(chart: &ChartMap, model_id: &str, resolution: &[usize]) -> Result<TheoremSummary> {
    let grid = QuadratureGrid::new(chart, resolution)?;
    let c = chart.space().c();
    let m = chart.dim();
    let frames: Vec<Result<GeometryFrame>> = grid
        .nodes
        .par_iter()
        .map(|u| PointGeometry::new(chart, u, 3)?.frame())
        .collect();
    let mut s = TheoremSummary {
        model: model_id.to_string(),
        curvature: c,
        dim: m,
        points: 0,
        sixth_bound_points: 0,
        flat_okumura_points: 0,
        okumura_points: 0,
        okumura_conclusion_min: None,
        sixth_bound_margin_min: f64::INFINITY,
        master_coef2_min: f64::INFINITY,
        master_coef3_min: f64::INFINITY,
        two_curvature_branch: two_curvature_branch(c, m),
        note: None,
    };
    for fr in frames {
        let fr = fr?;
        s.points += 1;
        let (f, a2) = (fr.f, fr.norm_a2);
        s.sixth_bound_points += sixth_bound_hypothesis(f, a2, m) as usize;
        s.flat_okumura_points += flat_okumura_hypothesis(f, a2, m) as usize;
        s.sixth_bound_margin_min = s.sixth_bound_margin_min.min((m * m) as f64 * f * f / 6.0 - a2);
        match okumura_bound_holds(c, f, a2, m) {
            Ok(true) => {
                s.okumura_points += 1;
                let v = okumura_conclusion_sample(c, &fr.lambda);
                s.okumura_conclusion_min = Some(s.okumura_conclusion_min.map_or(v, |x: f64| x.min(v)));
            }
            Ok(false) => {}
            Err(e) => {
                s.note.get_or_insert_with(|| e.to_string());
            }
        }
        let t = master_inequality_integrand(&fr, c);
        s.master_coef2_min = s.master_coef2_min.min(t.coef2);
        s.master_coef3_min = s.master_coef3_min.min(t.coef3);
    }
    Ok(s)
}
