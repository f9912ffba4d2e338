//! Truncated multivariate Taylor arithmetic.
//!
//! A [`TaylorJet`] stores the coefficients `∂^α f(u₀) / α!` for every
//! multi-index `|α| ≤ order` in graded-lexicographic order. Because the
//! ordering is graded, the coefficients of an order-`k` jet are a prefix of
//! the order-`k+1` layout, so truncation is a slice and every order shares
//! one static table per chart dimension.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use crate::error::{arg, Error, Result};

pub const MAX_ORDER: usize = 4;
pub const MAX_DIM: usize = 8;

const NONE: u16 = u16::MAX;

type MultiIndex = [u8; MAX_DIM];

struct Layout {
    exps: Vec<MultiIndex>,
    /// Number of coefficients of total degree ≤ k.
    len_upto: [usize; MAX_ORDER + 1],
    /// `(a, b, c)` with `exps[a] + exps[b] == exps[c]`, sorted by the degree of `c`.
    triples: Vec<(u16, u16, u16)>,
    triples_upto: [usize; MAX_ORDER + 1],
    /// `shift[p][i]` is the index of `exps[p] + e_i`, or `NONE` past `MAX_ORDER`.
    shift: Vec<[u16; MAX_DIM]>,
    alpha_factorial: Vec<f64>,
}

fn degree(e: &MultiIndex) -> usize {
    e.iter().map(|&x| x as usize).sum()
}

/// Multi-indices of exactly `deg` in `dim` variables, lexicographically
/// descending (`(2,0) , (1,1), (0,2)`).
fn indices_of_degree(dim: usize, deg: usize) -> Vec<MultiIndex> {
    fn rec(dim: usize, pos: usize, left: usize, cur: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
        if pos + 1 == dim {
            cur[pos] = left as u8;
            out.push(*cur);
            cur[pos] = 0;
            return;
        }
        for v in (0..=left).rev() {
            cur[pos] = v as u8;
            rec(dim, pos + 1, left - v, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    let mut cur = [0u8; MAX_DIM];
    rec(dim, 0, deg, &mut cur, &mut out);
    out
}

impl Layout {
    fn build(dim: usize) -> Layout {
        let mut exps = Vec::new();
        let mut len_upto = [0; MAX_ORDER + 1];
        for (d, slot) in len_upto.iter_mut().enumerate() {
            exps.extend(indices_of_degree(dim, d));
            *slot = exps.len();
        }
        let lookup: std::collections::HashMap<MultiIndex, u16> =
            exps.iter().enumerate().map(|(i, e)| (*e, i as u16)).collect();

        let mut triples = Vec::new();
        for (c, ec) in exps.iter().enumerate() {
            for (a, ea) in exps.iter().enumerate() {
                if (0..dim).any(|i| ea[i] > ec[i]) {
                    continue;
                }
                let mut eb = [0u8; MAX_DIM];
                for i in 0..dim {
                    eb[i] = ec[i] - ea[i];
                }
                triples.push((a as u16, lookup[&eb], c as u16));
            }
        }
        // exps is graded, so triples are already sorted by degree of c
        let mut triples_upto = [0; MAX_ORDER + 1];
        for (d, slot) in triples_upto.iter_mut().enumerate() {
            *slot = triples
                .iter()
                .take_while(|t| degree(&exps[t.2 as usize]) <= d)
                .count();
        }

        let shift = exps
            .iter()
            .map(|e| {
                let mut row = [NONE; MAX_DIM];
                for (i, slot) in row.iter_mut().enumerate().take(dim) {
                    let mut s = *e;
                    s[i] += 1;
                    if let Some(&idx) = lookup.get(&s) {
                        *slot = idx;
                    }
                }
                row
            })
            .collect();

        let alpha_factorial = exps
            .iter()
            .map(|e| e.iter().map(|&k| factorial(k as usize)).product())
            .collect();

        Layout {
            exps,
            len_upto,
            triples,
            triples_upto,
            shift,
            alpha_factorial,
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn layout(dim: usize) -> &'static Layout {
    static LAYOUTS: [OnceLock<Layout>; MAX_DIM] = [const { OnceLock::new() }; MAX_DIM];
    LAYOUTS[dim - 1].get_or_init(|| Layout::build(dim))
}

/// Number of coefficients of a jet: `C(dim + order, order)`.
pub fn coeff_count(dim: usize, order: usize) -> usize {
    layout(dim).len_upto[order]
}

fn check_shape(dim: usize, order: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return arg(format!("jet dimension {dim} outside 1..={MAX_DIM}"));
    }
    if order > MAX_ORDER {
        return arg(format!("jet order {order} exceeds {MAX_ORDER}"));
    }
    Ok(())
}

/// Truncated Taylor expansion of a scalar function of `dim` chart variables.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorJet {
    dim: usize,
    order: usize,
    coeffs: Vec<f64>,
}

/// Elementary operations accepted by [`jet_apply`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
    Sin,
    Cos,
    Exp,
    Sqrt,
    PowInt(i32),
    Scale(f64),
}

impl TaylorJet {
    pub fn constant(value: f64, dim: usize, order: usize) -> Result<TaylorJet> {
        check_shape(dim, order)?;
        let mut coeffs = vec![0.0; coeff_count(dim, order)];
        coeffs[0] = value;
        Ok(TaylorJet { dim, order, coeffs })
    }

    /// Jet of the coordinate function `u_i` expanded at `u_i = value`.
    pub fn seed_variable(i: usize, value: f64, dim: usize, order: usize) -> Result<TaylorJet> {
        check_shape(dim, order)?;
        if i >= dim {
            return arg(format!("variable index {i} out of range for dim {dim}"));
        }
        let mut jet = TaylorJet::constant(value, dim, order)?;
        if order >= 1 {
            jet.coeffs[1 + i] = 1.0;
        }
        Ok(jet)
    }

    /// Seeds every chart variable at the point `u`.
    pub fn seed_point(u: &[f64], order: usize) -> Result<Vec<TaylorJet>> {
        (0..u.len())
            .map(|i| TaylorJet::seed_variable(i, u[i], u.len(), order))
            .collect()
    }

    /// Builds a jet from raw graded-lex coefficients.
    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Result<TaylorJet> {
        check_shape(dim, order)?;
        if coeffs.len() != coeff_count(dim, order) {
            return arg(format!(
                "expected {} coefficients, got {}",
                coeff_count(dim, order),
                coeffs.len()
            ));
        }
        Ok(TaylorJet { dim, order, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Multi-indices of the stored coefficients, in storage order.
    pub fn multi_indices(&self) -> Vec<Vec<usize>> {
        layout(self.dim).exps[..self.coeffs.len()]
            .iter()
            .map(|e| e[..self.dim].iter().map(|&k| k as usize).collect())
            .collect()
    }

    fn index_of(&self, alpha: &[usize]) -> Result<usize> {
        if alpha.len() != self.dim {
            return arg(format!(
                "multi-index has {} entries, jet has dim {}",
                alpha.len(),
                self.dim
            ));
        }
        let total: usize = alpha.iter().sum();
        if total > self.order {
            return arg(format!(
                "multi-index degree {total} exceeds jet order {}",
                self.order
            ));
        }
        let lay = layout(self.dim);
        let mut idx = 0usize;
        for (i, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                idx = lay.shift[idx][i] as usize;
            }
        }
        Ok(idx)
    }

    /// Taylor coefficient `∂^α f / α!`.
    pub fn coeff(&self, alpha: &[usize]) -> Result<f64> {
        Ok(self.coeffs[self.index_of(alpha)?])
    }

    /// Partial derivative `∂^α f` at the expansion point.
    pub fn partial(&self, alpha: &[usize]) -> Result<f64> {
        let idx = self.index_of(alpha)?;
        Ok(layout(self.dim).alpha_factorial[idx] * self.coeffs[idx])
    }

    /// First partial `∂_i f`.
    pub fn d1(&self, i: usize) -> f64 {
        debug_assert!(self.order >= 1 && i < self.dim);
        self.coeffs[1 + i]
    }

    /// Second partial `∂_i ∂_j f`.
    pub fn d2(&self, i: usize, j: usize) -> f64 {
        debug_assert!(self.order >= 2);
        let lay = layout(self.dim);
        let idx = lay.shift[lay.shift[0][i] as usize][j] as usize;
        lay.alpha_factorial[idx] * self.coeffs[idx]
    }

    /// Jet of `∂_i f`, one order lower.
    pub fn derivative(&self, i: usize) -> Result<TaylorJet> {
        if i >= self.dim {
            return arg(format!("variable index {i} out of range for dim {}", self.dim));
        }
        if self.order == 0 {
            return arg("cannot differentiate an order-0 jet");
        }
        let lay = layout(self.dim);
        let n = lay.len_upto[self.order - 1];
        let coeffs = (0..n)
            .map(|p| {
                let q = lay.shift[p][i] as usize;
                (lay.exps[p][i] as f64 + 1.0) * self.coeffs[q]
            })
            .collect();
        Ok(TaylorJet {
            dim: self.dim,
            order: self.order - 1,
            coeffs,
        })
    }

    pub fn truncate(&self, order: usize) -> TaylorJet {
        let order = order.min(self.order);
        TaylorJet {
            dim: self.dim,
            order,
            coeffs: self.coeffs[..coeff_count(self.dim, order)].to_vec(),
        }
    }

    fn joint_order(&self, other: &TaylorJet) -> Result<usize> {
        if self.dim != other.dim {
            return arg(format!("jet dims differ: {} vs {}", self.dim, other.dim));
        }
        Ok(self.order.min(other.order))
    }

    pub fn try_add(&self, other: &TaylorJet) -> Result<TaylorJet> {
        let order = self.joint_order(other)?;
        let n = coeff_count(self.dim, order);
        let coeffs = (0..n).map(|k| self.coeffs[k] + other.coeffs[k]).collect();
        Ok(TaylorJet {
            dim: self.dim,
            order,
            coeffs,
        })
    }

    pub fn try_sub(&self, other: &TaylorJet) -> Result<TaylorJet> {
        let order = self.joint_order(other)?;
        let n = coeff_count(self.dim, order);
        let coeffs = (0..n).map(|k| self.coeffs[k] - other.coeffs[k]).collect();
        Ok(TaylorJet {
            dim: self.dim,
            order,
            coeffs,
        })
    }

    /// Truncated Cauchy product.
    pub fn try_mul(&self, other: &TaylorJet) -> Result<TaylorJet> {
        let order = self.joint_order(other)?;
        let lay = layout(self.dim);
        let mut coeffs = vec![0.0; lay.len_upto[order]];
        for &(a, b, c) in &lay.triples[..lay.triples_upto[order]] {
            coeffs[c as usize] += self.coeffs[a as usize] * other.coeffs[b as usize];
        }
        Ok(TaylorJet {
            dim: self.dim,
            order,
            coeffs,
        })
    }

    pub fn try_div(&self, other: &TaylorJet) -> Result<TaylorJet> {
        self.try_mul(&other.recip()?)
    }

    pub fn scale(&self, s: f64) -> TaylorJet {
        TaylorJet {
            dim: self.dim,
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> TaylorJet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// `Σ_n derivs[n] / n! · (self − self(0))^n`: the jet of `g ∘ self`
    /// given the derivatives of `g` at the constant term.
    fn compose(&self, derivs: &[f64]) -> TaylorJet {
        let mut nil = self.clone();
        nil.coeffs[0] = 0.0;
        let mut out = TaylorJet {
            dim: self.dim,
            order: self.order,
            coeffs: vec![0.0; self.coeffs.len()],
        };
        out.coeffs[0] = derivs[0];
        let mut power = nil.clone();
        for (n, &d) in derivs.iter().enumerate().take(self.order + 1).skip(1) {
            if n > 1 {
                power = &power * &nil;
            }
            let w = d / factorial(n);
            for (o, p) in out.coeffs.iter_mut().zip(&power.coeffs) {
                *o += w * p;
            }
        }
        out
    }

    pub fn sin(&self) -> TaylorJet {
        let (s, c) = self.value().sin_cos();
        let derivs: Vec<f64> = (0..=self.order)
            .map(|n| [s, c, -s, -c][n % 4])
            .collect();
        self.compose(&derivs)
    }

    pub fn cos(&self) -> TaylorJet {
        let (s, c) = self.value().sin_cos();
        let derivs: Vec<f64> = (0..=self.order)
            .map(|n| [c, -s, -c, s][n % 4])
            .collect();
        self.compose(&derivs)
    }

    pub fn exp(&self) -> TaylorJet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order + 1])
    }

    /// Jet of `self^p` for real `p`, via the falling factorial derivatives.
    fn powf_at_nonzero(&self, p: f64) -> TaylorJet {
        let a = self.value();
        let mut derivs = Vec::with_capacity(self.order + 1);
        let mut falling = 1.0;
        for n in 0..=self.order {
            derivs.push(falling * a.powf(p - n as f64));
            falling *= p - n as f64;
        }
        self.compose(&derivs)
    }

    pub fn sqrt(&self) -> Result<TaylorJet> {
        let a = self.value();
        if !(a > 0.0) {
            return Err(Error::Singularity(format!(
                "sqrt of jet with constant term {a:e}"
            )));
        }
        Ok(self.powf_at_nonzero(0.5))
    }

    pub fn recip(&self) -> Result<TaylorJet> {
        let a = self.value();
        if a == 0.0 || !a.is_finite() {
            return Err(Error::Singularity(format!(
                "division by jet with constant term {a:e}"
            )));
        }
        Ok(self.powf_at_nonzero(-1.0))
    }

    /// Integer power by repeated truncated multiplication, so zero and
    /// negative bases are fine for `n ≥ 0`.
    pub fn powi(&self, n: i32) -> Result<TaylorJet> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut out = TaylorJet::constant(1.0, self.dim, self.order)?;
        for _ in 0..n.unsigned_abs() {
            out = &out * &base;
        }
        Ok(out)
    }
}

/// Applies an elementary operation to jets sharing one chart dimension.
/// Binary operations truncate to the lower of the two orders.
pub fn jet_apply(op: JetOp, args: &[TaylorJet]) -> Result<TaylorJet> {
    let arity = match op {
        JetOp::Add | JetOp::Sub | JetOp::Mul | JetOp::Div => 2,
        _ => 1,
    };
    if args.len() != arity {
        return arg(format!("{op:?} takes {arity} argument(s), got {}", args.len()));
    }
    let x = &args[0];
    match op {
        JetOp::Add => x.try_add(&args[1]),
        JetOp::Sub => x.try_sub(&args[1]),
        JetOp::Mul => x.try_mul(&args[1]),
        JetOp::Div => {
            x.joint_order(&args[1])?;
            x.try_div(&args[1])
        }
        JetOp::Sin => Ok(x.sin()),
        JetOp::Cos => Ok(x.cos()),
        JetOp::Exp => Ok(x.exp()),
        JetOp::Sqrt => x.sqrt(),
        JetOp::PowInt(n) => x.powi(n),
        JetOp::Scale(s) => Ok(x.scale(s)),
    }
}

// Operator sugar for internal pipelines. Shapes are fixed by construction
// there, so a dimension mismatch is a programming error and panics.

impl Add for &TaylorJet {
    type Output = TaylorJet;
    fn add(self, rhs: &TaylorJet) -> TaylorJet {
        self.try_add(rhs).expect("jet add")
    }
}

impl Sub for &TaylorJet {
    type Output = TaylorJet;
    fn sub(self, rhs: &TaylorJet) -> TaylorJet {
        self.try_sub(rhs).expect("jet sub")
    }
}

impl Mul for &TaylorJet {
    type Output = TaylorJet;
    fn mul(self, rhs: &TaylorJet) -> TaylorJet {
        self.try_mul(rhs).expect("jet mul")
    }
}

impl Mul<f64> for &TaylorJet {
    type Output = TaylorJet;
    fn mul(self, rhs: f64) -> TaylorJet {
        self.scale(rhs)
    }
}

impl Neg for &TaylorJet {
    type Output = TaylorJet;
    fn neg(self) -> TaylorJet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn seed_variable_layout() {
        let x = TaylorJet::seed_variable(0, 2.0, 2, 2).unwrap();
        assert_eq!(x.coeffs(), &[2.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(x.coeff(&[1, 0]).unwrap(), 1.0);
        assert_eq!(
            TaylorJet::seed_variable(0, 0.3, 3, 4).unwrap().coeffs().len(),
            35
        );
    }

    #[test]
    fn seed_variable_rejects_bad_index_and_order() {
        assert!(matches!(
            TaylorJet::seed_variable(1, 0.0, 1, 2),
            Err(Error::Argument(_))
        ));
        assert!(TaylorJet::seed_variable(0, 0.0, 1, 5).is_err());
        assert!(TaylorJet::seed_variable(0, 0.0, 9, 1).is_err());
    }

    #[test]
    fn coefficient_counts_are_binomial() {
        assert_eq!(coeff_count(8, 4), 495);
        assert_eq!(coeff_count(2, 4), 15);
        assert_eq!(coeff_count(1, 3), 4);
    }

    #[test]
    fn sin_series() {
        let x = TaylorJet::seed_variable(0, 0.0, 1, 3).unwrap();
        let s = jet_apply(JetOp::Sin, &[x]).unwrap();
        let expect = [0.0, 1.0, 0.0, -1.0 / 6.0];
        for (a, b) in s.coeffs().iter().zip(expect) {
            assert!(close(*a, b, 1e-15));
        }
        assert!(close(s.partial(&[3]).unwrap(), -1.0, 1e-15));
    }

    #[test]
    fn square_expansion() {
        let x = TaylorJet::seed_variable(0, 3.0, 1, 2).unwrap();
        let sq = jet_apply(JetOp::Mul, &[x.clone(), x]).unwrap();
        assert_eq!(sq.coeffs(), &[9.0, 6.0, 1.0]);
        assert_eq!(sq.partial(&[2]).unwrap(), 2.0);
        assert_eq!(sq.partial(&[0]).unwrap(), 9.0);
    }

    #[test]
    fn partial_rejects_excess_degree() {
        let x = TaylorJet::seed_variable(0, 3.0, 1, 2).unwrap();
        assert!(x.partial(&[3]).is_err());
    }

    #[test]
    fn division_by_zero_constant_is_singular() {
        let x = TaylorJet::seed_variable(0, 0.0, 1, 2).unwrap();
        let one = TaylorJet::constant(1.0, 1, 2).unwrap();
        assert!(matches!(
            jet_apply(JetOp::Div, &[one, x.clone()]),
            Err(Error::Singularity(_))
        ));
        assert!(matches!(x.sqrt(), Err(Error::Singularity(_))));
    }

    #[test]
    fn mismatched_dims_rejected() {
        let x = TaylorJet::seed_variable(0, 0.0, 1, 2).unwrap();
        let y = TaylorJet::seed_variable(0, 0.0, 2, 2).unwrap();
        assert!(matches!(
            jet_apply(JetOp::Add, &[x, y]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn pow_int_handles_zero_and_negative_base() {
        let x = TaylorJet::seed_variable(0, -2.0, 1, 4).unwrap();
        let cube = x.powi(3).unwrap();
        // (x)^3 at -2: -8, 12, -6, 1, 0
        assert_eq!(cube.coeffs(), &[-8.0, 12.0, -6.0, 1.0, 0.0]);
        let z = TaylorJet::seed_variable(0, 0.0, 1, 4).unwrap();
        assert_eq!(z.powi(2).unwrap().coeffs(), &[0.0, 0.0, 1.0, 0.0, 0.0]);
        let inv = x.powi(-1).unwrap();
        assert!(close(inv.value(), -0.5, 1e-15));
        assert!(close(inv.partial(&[1]).unwrap(), -0.25, 1e-15));
    }

    #[test]
    fn derivative_shifts_coefficients() {
        let u = TaylorJet::seed_variable(0, 0.4, 2, 4).unwrap();
        let v = TaylorJet::seed_variable(1, 1.1, 2, 4).unwrap();
        let f = &u.exp() * &v.cos();
        let du = f.derivative(0).unwrap();
        assert_eq!(du.order(), 3);
        for alpha in du.multi_indices() {
            let mut shifted = alpha.clone();
            shifted[0] += 1;
            assert!(close(
                du.partial(&alpha).unwrap(),
                f.partial(&shifted).unwrap(),
                1e-14
            ));
        }
    }

    #[test]
    fn mixed_orders_truncate_to_lower() {
        let a = TaylorJet::seed_variable(0, 1.0, 2, 4).unwrap();
        let b = TaylorJet::seed_variable(1, 2.0, 2, 2).unwrap();
        assert_eq!((&a * &b).order(), 2);
        assert_eq!((&a + &b).coeffs().len(), 6);
    }
}
