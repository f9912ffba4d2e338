//! Pointwise geometry of a parametrized hypersurface `φ: U ⊂ ℝ^m → N^{m+1}(c)`.
//!
//! [`PointGeometry`] keeps every quantity as a Taylor jet in the chart
//! variables, so derivatives of the metric, the shape operator and the
//! curvature scalars are exact through the jet order. [`GeometryFrame`] is
//! its numeric snapshot.
//!
//! Orders, for a position jet of order `K`:
//! tangents, metric, inverse metric and normal carry `K−1`; second
//! derivatives, `h`, `A`, Christoffel symbols and the curvature scalars
//! carry `K−2`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{arg, Error, Result};
use crate::jet_matrix::JetMatrix;
use crate::jets::{TaylorJet, MAX_ORDER};
use crate::space_form::{AmbientSpace, Curvature};

/// Normalized Gram determinant below which a chart point is not an
/// immersion. The determinant is taken over unit-length tangents so the
/// test does not depend on how fast the chart parameters move.
pub const GRAM_DET_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisKind {
    /// Equispaced, wraps around.
    Periodic,
    /// Plain bounded interval with boundary.
    Interval,
    /// Polar angle whose endpoints are excised caps. Near either endpoint
    /// the volume density vanishes like `t^collapse`.
    Polar { collapse: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub kind: AxisKind,
}

impl Axis {
    pub fn periodic(lo: f64, hi: f64) -> Axis {
        Axis {
            lo,
            hi,
            kind: AxisKind::Periodic,
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Axis {
        Axis {
            lo,
            hi,
            kind: AxisKind::Interval,
        }
    }

    pub fn polar(lo: f64, hi: f64, collapse: usize) -> Axis {
        Axis {
            lo,
            hi,
            kind: AxisKind::Polar { collapse },
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        match self.kind {
            AxisKind::Periodic => t.is_finite(),
            _ => t >= self.lo && t <= self.hi,
        }
    }
}

/// Jet-level chart map: receives one seeded jet per chart variable and
/// returns one jet per ambient coordinate.
pub type ChartFn = dyn Fn(&[TaylorJet]) -> Result<Vec<TaylorJet>> + Send + Sync;

#[derive(Clone)]
pub struct ChartMap {
    space: AmbientSpace,
    axes: Vec<Axis>,
    map: Arc<ChartFn>,
    orientation: f64,
}

impl fmt::Debug for ChartMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartMap")
            .field("space", &self.space)
            .field("axes", &self.axes)
            .field("orientation", &self.orientation)
            .finish_non_exhaustive()
    }
}

impl ChartMap {
    pub fn new(
        space: AmbientSpace,
        axes: Vec<Axis>,
        map: impl Fn(&[TaylorJet]) -> Result<Vec<TaylorJet>> + Send + Sync + 'static,
    ) -> Result<ChartMap> {
        if axes.len() != space.hypersurface_dim() {
            return arg(format!(
                "chart has {} axes for a {}-dimensional hypersurface",
                axes.len(),
                space.hypersurface_dim()
            ));
        }
        Ok(ChartMap {
            space,
            axes,
            map: Arc::new(map),
            orientation: 1.0,
        })
    }

    pub fn space(&self) -> &AmbientSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.hypersurface_dim()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn with_orientation(mut self, sign: f64) -> ChartMap {
        self.orientation = if sign < 0.0 { -1.0 } else { 1.0 };
        self
    }

    /// Fixes the normal so that the mean curvature is non-negative at `u`.
    pub fn oriented_at(self, u: &[f64]) -> Result<ChartMap> {
        let f = PointGeometry::new(&self, u, 3)?.f().value();
        Ok(if f < 0.0 {
            let sign = -self.orientation;
            self.with_orientation(sign)
        } else {
            self
        })
    }

    /// Compact when every axis either wraps or closes at a pole.
    pub fn is_compact(&self) -> bool {
        self.axes.iter().all(|a| a.kind != AxisKind::Interval)
    }

    /// Midpoint of the chart box.
    pub fn reference_point(&self) -> Vec<f64> {
        self.axes.iter().map(|a| 0.5 * (a.lo + a.hi)).collect()
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.axes.len() && self.axes.iter().zip(u).all(|(a, &t)| a.contains(t))
    }

    /// Jets of the ambient coordinates at `u`.
    pub fn evaluate(&self, u: &[f64], order: usize) -> Result<Vec<TaylorJet>> {
        if u.len() != self.dim() {
            return arg(format!(
                "chart point has {} coordinates, expected {}",
                u.len(),
                self.dim()
            ));
        }
        let seeds = TaylorJet::seed_point(u, order)?;
        let out = (self.map)(&seeds)?;
        if out.len() != self.space.ambient_coord_dim() {
            return Err(Error::Spec(format!(
                "chart produced {} ambient coordinates, expected {}",
                out.len(),
                self.space.ambient_coord_dim()
            )));
        }
        if self.space.curvature() != Curvature::Flat {
            let p: Vec<f64> = out.iter().map(TaylorJet::value).collect();
            if !self.space.validate_point(&p) {
                return Err(Error::Spec(format!(
                    "chart point {u:?} maps off the model space form"
                )));
            }
        }
        Ok(out)
    }

    pub fn position(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(self.evaluate(u, 0)?.iter().map(TaylorJet::value).collect())
    }
}

/// Dense `n×n×n` array, indexed `(a, b, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Tensor3 {
        Tensor3 {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + c]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        self.data[(a * self.n + b) * self.n + c] = v;
    }
}

/// Numeric snapshot of the hypersurface at one chart point.
#[derive(Debug, Clone)]
pub struct GeometryFrame {
    pub u: Vec<f64>,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// `gamma[k][(i, j)] = Γ^k_{ij}`.
    pub gamma: Vec<DMatrix<f64>>,
    pub eta: Vec<f64>,
    pub h: DMatrix<f64>,
    /// `A^i_j = g^{ik} h_{kj}`.
    pub a: DMatrix<f64>,
    pub f: f64,
    pub norm_a2: f64,
    pub trace_a3: f64,
    /// Principal curvatures, ascending.
    pub lambda: Vec<f64>,
    /// `(∇A)^i_{kj}` stored at `(i, k, j)`.
    pub nabla_a: Tensor3,
    pub jet_order: usize,
}

impl GeometryFrame {
    pub fn dim(&self) -> usize {
        self.u.len()
    }
}

/// Jet-level geometry at one chart point.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    space: AmbientSpace,
    u: Vec<f64>,
    order: usize,
    position: Vec<TaylorJet>,
    tangents: Vec<Vec<TaylorJet>>,
    g: JetMatrix,
    g_inv: JetMatrix,
    gamma: Vec<JetMatrix>,
    eta: Vec<TaylorJet>,
    h: JetMatrix,
    a: JetMatrix,
    f: TaylorJet,
    norm_a2: TaylorJet,
    trace_a3: TaylorJet,
    g_val: DMatrix<f64>,
    g_inv_val: DMatrix<f64>,
    gamma_val: Vec<DMatrix<f64>>,
}

fn ambient_dot(space: &AmbientSpace, u: &[TaylorJet], v: &[TaylorJet]) -> TaylorJet {
    let mut acc = &u[0] * &v[0];
    if space.signature(0) < 0.0 {
        acc = -&acc;
    }
    for k in 1..u.len() {
        acc = &acc + &(&u[k] * &v[k]);
    }
    acc
}

/// Euclidean generalized cross product of `N−1` vectors in `ℝ^N`.
fn cross_product(vectors: &[Vec<f64>]) -> Vec<f64> {
    let n = vectors.len() + 1;
    (0..n)
        .map(|k| {
            let minor = DMatrix::from_fn(n - 1, n - 1, |r, c| {
                let col = if c < k { c } else { c + 1 };
                vectors[r][col]
            });
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * minor.determinant()
        })
        .collect()
}

impl PointGeometry {
    pub fn new(chart: &ChartMap, u: &[f64], order: usize) -> Result<PointGeometry> {
        if !(3..=MAX_ORDER).contains(&order) {
            return arg(format!("jet order must be in 3..={MAX_ORDER}, got {order}"));
        }
        if !chart.contains(u) {
            return arg(format!("chart point {u:?} outside the chart domain"));
        }
        let space = *chart.space();
        let m = space.hypersurface_dim();
        let n = space.ambient_coord_dim();
        let c = space.c();

        let position = chart.evaluate(u, order)?;
        let tangents: Vec<Vec<TaylorJet>> = (0..m)
            .map(|i| position.iter().map(|x| x.derivative(i)).collect())
            .collect::<Result<_>>()?;

        let g = JetMatrix::from_fn(m, m, |i, j| ambient_dot(&space, &tangents[i], &tangents[j]));
        let g_val = g.values();
        let diag: f64 = (0..m).map(|i| g_val[(i, i)]).product();
        let gram_det = g_val.determinant() / diag;
        if !(gram_det > GRAM_DET_MIN) {
            return Err(Error::Immersion {
                point: u.to_vec(),
                gram_det,
            });
        }
        let g_inv = g.inverse()?;
        let g_inv_val = g_inv.values();

        // Orientation from the cross product of (position,) tangents; the
        // normal jet is the normalized projection of that fixed vector
        // onto the normal line, which equals the smooth normal field.
        let mut spanning: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
        if space.curvature() != Curvature::Flat {
            spanning.push(position.iter().map(TaylorJet::value).collect());
        }
        for t in &tangents {
            spanning.push(t.iter().map(TaylorJet::value).collect());
        }
        let mut n0 = cross_product(&spanning);
        n0[0] *= space.signature(0);
        let norm0 = space.ambient_inner(&n0, &n0)?.sqrt();
        let n0: Vec<f64> = n0.iter().map(|x| chart.orientation() * x / norm0).collect();

        let jo = order - 1;
        let e: Vec<TaylorJet> = n0
            .iter()
            .map(|&x| TaylorJet::constant(x, m, jo))
            .collect::<Result<_>>()?;
        let t_dot_e: Vec<TaylorJet> = tangents.iter().map(|t| ambient_dot(&space, t, &e)).collect();
        let mut w = e.clone();
        for i in 0..m {
            let mut coef = g_inv.get(i, 0) * &t_dot_e[0];
            for j in 1..m {
                coef = &coef + &(g_inv.get(i, j) * &t_dot_e[j]);
            }
            for (wk, tk) in w.iter_mut().zip(&tangents[i]) {
                *wk = &*wk - &(tk * &coef);
            }
        }
        if space.curvature() != Curvature::Flat {
            let p_dot_e = ambient_dot(&space, &position, &e).scale(c);
            for (wk, pk) in w.iter_mut().zip(&position) {
                *wk = &*wk - &(pk * &p_dot_e);
            }
        }
        let inv_len = ambient_dot(&space, &w, &w).sqrt()?.recip()?;
        let eta: Vec<TaylorJet> = w.iter().map(|x| x * &inv_len).collect();

        let h = JetMatrix::try_from_fn(m, m, |i, j| {
            let second: Vec<TaylorJet> = tangents[j]
                .iter()
                .map(|x| x.derivative(i))
                .collect::<Result<_>>()?;
            Ok(ambient_dot(&space, &second, &eta))
        })?;
        let a = g_inv.mul(&h);

        let dg: Vec<JetMatrix> = (0..m).map(|l| g.derivative(l)).collect::<Result<_>>()?;
        let gamma: Vec<JetMatrix> = (0..m)
            .map(|k| {
                JetMatrix::from_fn(m, m, |i, j| {
                    let mut acc: Option<TaylorJet> = None;
                    for l in 0..m {
                        let bracket = &(dg[i].get(j, l) + dg[j].get(i, l)) - dg[l].get(i, j);
                        let term = g_inv.get(k, l) * &bracket;
                        acc = Some(match acc {
                            None => term,
                            Some(s) => &s + &term,
                        });
                    }
                    acc.expect("m >= 2").scale(0.5)
                })
            })
            .collect();
        let gamma_val = gamma.iter().map(JetMatrix::values).collect();

        let a2 = a.mul(&a);
        let f = a.trace().scale(1.0 / m as f64);
        let norm_a2 = a2.trace();
        let trace_a3 = a2.mul(&a).trace();

        Ok(PointGeometry {
            space,
            u: u.to_vec(),
            order,
            position,
            tangents,
            g,
            g_inv,
            gamma,
            eta,
            h,
            a,
            f,
            norm_a2,
            trace_a3,
            g_val,
            g_inv_val,
            gamma_val,
        })
    }

    pub fn space(&self) -> &AmbientSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.hypersurface_dim()
    }

    pub fn c(&self) -> f64 {
        self.space.c()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn position(&self) -> &[TaylorJet] {
        &self.position
    }

    pub fn tangents(&self) -> &[Vec<TaylorJet>] {
        &self.tangents
    }

    pub fn metric(&self) -> &JetMatrix {
        &self.g
    }

    pub fn inverse_metric(&self) -> &JetMatrix {
        &self.g_inv
    }

    pub fn christoffel(&self) -> &[JetMatrix] {
        &self.gamma
    }

    pub fn normal(&self) -> &[TaylorJet] {
        &self.eta
    }

    pub fn second_fundamental_form(&self) -> &JetMatrix {
        &self.h
    }

    pub fn shape_operator(&self) -> &JetMatrix {
        &self.a
    }

    pub fn f(&self) -> &TaylorJet {
        &self.f
    }

    pub fn norm_a2(&self) -> &TaylorJet {
        &self.norm_a2
    }

    pub fn trace_a3(&self) -> &TaylorJet {
        &self.trace_a3
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g_val
    }

    pub fn g_inv(&self) -> &DMatrix<f64> {
        &self.g_inv_val
    }

    /// `Γ^k_{ij}` at the point.
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma_val[k][(i, j)]
    }

    /// Covariant derivative of a (1,1) tensor given by its jet matrix:
    /// `(∇T)^i_{kj} = ∂_k T^i_j + Γ^i_{kl} T^l_j − Γ^l_{kj} T^i_l`.
    pub fn nabla_11(&self, t: &JetMatrix) -> Result<Tensor3> {
        let m = self.dim();
        let tv = t.values();
        let dt: Vec<DMatrix<f64>> = (0..m)
            .map(|k| t.derivative(k).map(|d| d.values()))
            .collect::<Result<_>>()?;
        let mut out = Tensor3::zeros(m);
        for i in 0..m {
            for k in 0..m {
                for j in 0..m {
                    let mut v = dt[k][(i, j)];
                    for l in 0..m {
                        v += self.gamma(i, k, l) * tv[(l, j)] - self.gamma(l, k, j) * tv[(i, l)];
                    }
                    out.set(i, k, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Principal curvatures, ascending: eigenvalues of `h` relative to `g`.
    pub fn principal_curvatures(&self) -> Vec<f64> {
        g_eigenvalues(&self.g_val, &self.h.values())
    }

    /// Intrinsic curvature `R^l_{kij}` from the Christoffel jets, stored as
    /// `r[l][k][i][j]` flattened.
    pub fn riemann(&self) -> Result<Vec<f64>> {
        let m = self.dim();
        let dgamma: Vec<Vec<DMatrix<f64>>> = (0..m)
            .map(|d| {
                self.gamma
                    .iter()
                    .map(|gk| gk.derivative(d).map(|x| x.values()))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        // dgamma[d][l][(a, b)] = ∂_d Γ^l_{ab}
        let mut r = vec![0.0; m * m * m * m];
        for l in 0..m {
            for k in 0..m {
                for i in 0..m {
                    for j in 0..m {
                        let mut v = dgamma[i][l][(j, k)] - dgamma[j][l][(i, k)];
                        for p in 0..m {
                            v += self.gamma(l, i, p) * self.gamma(p, j, k)
                                - self.gamma(l, j, p) * self.gamma(p, i, k);
                        }
                        r[((l * m + k) * m + i) * m + j] = v;
                    }
                }
            }
        }
        Ok(r)
    }

    pub fn frame(&self) -> Result<GeometryFrame> {
        Ok(GeometryFrame {
            u: self.u.clone(),
            g: self.g_val.clone(),
            g_inv: self.g_inv_val.clone(),
            gamma: self.gamma_val.clone(),
            eta: self.eta.iter().map(TaylorJet::value).collect(),
            h: self.h.values(),
            a: self.a.values(),
            f: self.f.value(),
            norm_a2: self.norm_a2.value(),
            trace_a3: self.trace_a3.value(),
            lambda: self.principal_curvatures(),
            nabla_a: self.nabla_11(&self.a)?,
            jet_order: self.order,
        })
    }
}

/// Eigenvalues of the `g`-self-adjoint operator `g⁻¹ s`, ascending.
pub fn g_eigenvalues(g: &DMatrix<f64>, s: &DMatrix<f64>) -> Vec<f64> {
    let sym = (s + s.transpose()) * 0.5;
    let l = g
        .clone()
        .cholesky()
        .expect("metric is positive definite")
        .l();
    let l_inv = l.try_inverse().expect("Cholesky factor is invertible");
    let reduced = &l_inv * sym * l_inv.transpose();
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(reduced).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Evaluates the complete numeric frame at `u`.
pub fn frame_at(chart: &ChartMap, u: &[f64], order: usize) -> Result<GeometryFrame> {
    PointGeometry::new(chart, u, order)?.frame()
}

/// Default eigenvalue clustering tolerance `1e-6·(1 + |A|)`.
pub fn default_cluster_tol(frame: &GeometryFrame) -> f64 {
    1e-6 * (1.0 + frame.norm_a2.max(0.0).sqrt())
}

/// Distinct principal curvatures with multiplicities. A cluster's spread
/// (largest minus smallest member) never exceeds `cluster_tol`; the
/// reported value is the cluster mean.
pub fn principal_decomposition(frame: &GeometryFrame, cluster_tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut start = f64::NAN;
    let mut sum = 0.0;
    for &l in &frame.lambda {
        if out.is_empty() || l - start > cluster_tol {
            out.push((l, 1));
            start = l;
            sum = l;
        } else {
            let last = out.last_mut().expect("non-empty");
            last.1 += 1;
            sum += l;
            last.0 = sum / last.1 as f64;
        }
    }
    out
}

/// `R_{ijij} = c + λ_i λ_j` in a principal orthonormal frame.
pub fn sectional_principal(c: f64, li: f64, lj: f64) -> f64 {
    c + li * lj
}
