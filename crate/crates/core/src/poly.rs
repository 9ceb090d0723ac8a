//! Dense complex polynomials.
//!
//! Coefficients are stored in ascending order, `coeffs[k]` multiplying `z^k`.
//! Every polynomial also carries a *formal degree*, the `n` used by the
//! reversal `p*(z) = z^n conj(p(1/conj(z)))`. Arithmetic only trims exact
//! trailing zeros, so numerically tiny leading terms survive and the formal
//! degree of a product or sum is the one implied by the operands.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use thiserror::Error;

pub type Complex = Complex64;

/// Sweep cap for the simultaneous iteration.
pub const MAX_SWEEPS: usize = 200;
/// Default scaled-residual tolerance for [`ComplexPoly::roots`].
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
/// Default half-width of the annulus around the unit circle treated as ambiguous.
pub const DEFAULT_DISK_GUARD: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("reversal degree {requested} is below the actual degree {actual}")]
    ReversalDegree { requested: usize, actual: usize },
    #[error("the zero polynomial has no well-defined roots")]
    ZeroPolynomial,
    #[error("root iteration did not converge; worst scaled residual {worst:e}")]
    NoConvergence { worst: f64, residuals: Vec<f64> },
    #[error("power series division needs a nonzero constant term in the denominator")]
    SingularDenominator,
}

#[derive(Clone, PartialEq)]
pub struct ComplexPoly {
    coeffs: Vec<Complex>,
    formal_degree: usize,
}

impl fmt::Debug for ComplexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexPoly(deg* {}) {:?}", self.formal_degree, self.coeffs)
    }
}

fn trim(coeffs: &mut Vec<Complex>) {
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| *c == Complex::new(0.0, 0.0)) {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        coeffs.push(Complex::new(0.0, 0.0));
    }
}

impl ComplexPoly {
    /// Builds a polynomial whose formal degree equals its actual degree.
    pub fn new(mut coeffs: Vec<Complex>) -> Self {
        trim(&mut coeffs);
        let formal_degree = coeffs.len() - 1;
        Self { coeffs, formal_degree }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::new(vec![Complex::new(0.0, 0.0)])
    }

    pub fn one() -> Self {
        Self::constant(Complex::new(1.0, 0.0))
    }

    pub fn constant(c: Complex) -> Self {
        Self::new(vec![c])
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![Complex::new(0.0, 0.0); k + 1];
        coeffs[k] = Complex::new(1.0, 0.0);
        Self::new(coeffs)
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex]) -> Self {
        roots.iter().fold(Self::one(), |acc, &r| {
            &acc * &Self::new(vec![-r, Complex::new(1.0, 0.0)])
        })
    }

    /// Overrides the formal degree used by [`ComplexPoly::reversed`].
    pub fn with_formal_degree(mut self, n: usize) -> Result<Self, PolyError> {
        if n < self.degree() {
            return Err(PolyError::ReversalDegree { requested: n, actual: self.degree() });
        }
        self.formal_degree = n;
        Ok(self)
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex> {
        self.coeffs
    }

    /// Coefficient of `z^k`, zero beyond the stored range.
    pub fn coeff(&self, k: usize) -> Complex {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Index of the last nonzero coefficient (0 for constants and the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn formal_degree(&self) -> usize {
        self.formal_degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == Complex::new(0.0, 0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex) -> Complex {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value together with `sum |c_k| |z|^k`, the natural scale for residuals.
    pub fn eval_with_scale(&self, z: Complex) -> (Complex, f64) {
        let r = z.norm();
        let mut value = Complex::new(0.0, 0.0);
        let mut scale = 0.0;
        for &c in self.coeffs.iter().rev() {
            value = value * z + c;
            scale = scale * r + c.norm();
        }
        (value, scale)
    }

    /// `z^n conj(p(1/conj(z)))`, i.e. `q[k] = conj(p[n - k])`.
    pub fn reverse(&self, n: usize) -> Result<Self, PolyError> {
        if n < self.degree() {
            return Err(PolyError::ReversalDegree { requested: n, actual: self.degree() });
        }
        let coeffs = (0..=n).map(|k| self.coeff(n - k).conj()).collect();
        let mut q = Self::new(coeffs);
        q.formal_degree = n;
        Ok(q)
    }

    /// Reversal at the formal degree.
    pub fn reversed(&self) -> Self {
        self.reverse(self.formal_degree)
            .expect("formal degree never drops below the actual degree")
    }

    pub fn scale(&self, c: Complex) -> Self {
        let mut q = Self::new(self.coeffs.iter().map(|&a| a * c).collect());
        q.formal_degree = self.formal_degree;
        q
    }

    /// Multiplication by `z^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            let mut q = Self::zero();
            q.formal_degree = self.formal_degree + k;
            return q;
        }
        let mut coeffs = vec![Complex::new(0.0, 0.0); k];
        coeffs.extend_from_slice(&self.coeffs);
        let mut q = Self::new(coeffs);
        q.formal_degree = self.formal_degree + k;
        q
    }

    /// Drops the constant term and divides by `z`.
    ///
    /// This is exact division only when the constant term is zero; callers
    /// use it where that zero is forced algebraically.
    pub fn shift_down(&self) -> Self {
        let coeffs = if self.coeffs.len() > 1 { self.coeffs[1..].to_vec() } else { vec![] };
        let mut q = Self::new(coeffs);
        q.formal_degree = self.formal_degree.saturating_sub(1).max(q.degree());
        q
    }

    /// Drops leading coefficients whose magnitude is at most `rel * scale`.
    pub fn truncate_negligible(&self, rel: f64, scale: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() <= rel * scale) {
            coeffs.pop();
        }
        Self::new(coeffs)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Synthetic division by `(z - r)`; returns quotient and remainder.
    pub fn deflate(&self, r: Complex) -> (Self, Complex) {
        let n = self.coeffs.len();
        if n == 1 {
            return (Self::zero(), self.coeffs[0]);
        }
        let mut quot = vec![Complex::new(0.0, 0.0); n - 1];
        let mut carry = self.coeffs[n - 1];
        for k in (0..n - 1).rev() {
            quot[k] = carry;
            carry = self.coeffs[k] + carry * r;
        }
        (Self::new(quot), carry)
    }

    /// Quotient of division by `z - r` for a root `r`, the remainder dropped.
    ///
    /// Runs from the leading coefficient down for `|r| <= 1` and from the
    /// constant term up otherwise, so the recurrence never amplifies by `|r| > 1`.
    pub fn divide_root(&self, r: Complex) -> Self {
        let n = self.coeffs.len();
        if n == 1 || r.norm() <= 1.0 {
            return self.deflate(r).0;
        }
        let inv = Complex::new(1.0, 0.0) / r;
        let mut quot = vec![Complex::new(0.0, 0.0); n - 1];
        let mut prev = Complex::new(0.0, 0.0);
        for (q, &c) in quot.iter_mut().zip(&self.coeffs) {
            *q = (prev - c) * inv;
            prev = *q;
        }
        Self::new(quot)
    }

    /// All roots with multiplicity.
    ///
    /// Roots at the origin are split off exactly; the rest come from
    /// Aberth-Ehrlich simultaneous iteration, falling back to the eigenvalues
    /// of the companion matrix when the sweep cap is hit. Every returned root
    /// satisfies `|p(r)| <= tol * sum |c_k| |r|^k` for the monic-normalized
    /// polynomial.
    pub fn roots(&self, tol: f64) -> Result<Vec<Complex>, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let zeros_at_origin = self
            .coeffs
            .iter()
            .take_while(|c| **c == Complex::new(0.0, 0.0))
            .count();
        let mut roots = vec![Complex::new(0.0, 0.0); zeros_at_origin];
        let rest = &self.coeffs[zeros_at_origin..];
        let degree = rest.len() - 1;
        if degree == 0 {
            return Ok(roots);
        }
        let lead = rest[degree];
        let monic: Vec<Complex> = rest.iter().map(|&c| c / lead).collect();
        if degree == 1 {
            roots.push(-monic[0]);
            return Ok(roots);
        }
        let monic = Self::new(monic);

        let mut found = initial_guesses(&monic);
        let converged = aberth_sweeps(&monic, &mut found, MAX_SWEEPS, tol);
        if !converged {
            log::debug!("aberth sweep cap reached at degree {degree}; using companion matrix");
            found = companion_eigenvalues(&monic);
            aberth_sweeps(&monic, &mut found, 20, tol);
        }
        let residuals: Vec<f64> = found.iter().map(|&z| scaled_residual(&monic, z)).collect();
        let worst = residuals.iter().copied().fold(0.0, f64::max);
        if worst.is_nan() || worst > tol {
            return Err(PolyError::NoConvergence { worst, residuals });
        }
        roots.extend(found);
        Ok(roots)
    }
}

fn scaled_residual(p: &ComplexPoly, z: Complex) -> f64 {
    let (v, s) = p.eval_with_scale(z);
    if s == 0.0 {
        0.0
    } else {
        v.norm() / s
    }
}

fn initial_guesses(monic: &ComplexPoly) -> Vec<Complex> {
    let d = monic.degree();
    let c = monic.coeffs();
    let center = -c[d - 1] / d as f64;
    // Geometric mean of root moduli about the centroid.
    let shifted = shift_origin(monic, center);
    let radius = {
        let c0 = shifted.coeff(0).norm();
        if c0 > 0.0 {
            c0.powf(1.0 / d as f64)
        } else {
            1.0
        }
    };
    (0..d)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / d as f64 + 0.4;
            center + Complex::from_polar(radius, theta)
        })
        .collect()
}

/// Coefficients of `p(z + a)`.
fn shift_origin(p: &ComplexPoly, a: Complex) -> ComplexPoly {
    let mut coeffs = p.coeffs().to_vec();
    let n = coeffs.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let next = coeffs[j + 1];
            coeffs[j] += a * next;
        }
    }
    ComplexPoly::new(coeffs)
}

/// Gauss-Seidel Aberth updates. Returns true once every root meets `tol`.
fn aberth_sweeps(p: &ComplexPoly, z: &mut [Complex], max_sweeps: usize, tol: f64) -> bool {
    let dp = p.derivative();
    let mut polish = 0;
    for _ in 0..max_sweeps {
        let mut all_small = true;
        for i in 0..z.len() {
            let (v, s) = p.eval_with_scale(z[i]);
            if v.norm() <= f64::EPSILON * s {
                continue;
            }
            let dv = dp.eval(z[i]);
            let mut sum = Complex::new(0.0, 0.0);
            for j in 0..z.len() {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        sum += diff.inv();
                    }
                }
            }
            let ratio = v / dv;
            let step = if ratio.is_finite() {
                let w = ratio / (Complex::new(1.0, 0.0) - ratio * sum);
                if w.is_finite() {
                    w
                } else {
                    ratio
                }
            } else {
                // Stationary point of p: nudge off it.
                Complex::new(1e-3, 1e-3) * (1.0 + z[i].norm())
            };
            z[i] -= step;
            if step.norm() > 4.0 * f64::EPSILON * z[i].norm().max(f64::MIN_POSITIVE) {
                all_small = false;
            }
        }
        let done = z.iter().all(|&r| scaled_residual(p, r) <= tol);
        if done {
            polish += 1;
            if all_small || polish > 8 {
                return true;
            }
        }
    }
    z.iter().all(|&r| scaled_residual(p, r) <= tol)
}

fn companion_eigenvalues(monic: &ComplexPoly) -> Vec<Complex> {
    let d = monic.degree();
    let c = monic.coeffs();
    let mut m = DMatrix::<Complex>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = Complex::new(1.0, 0.0);
    }
    for i in 0..d {
        m[(i, d - 1)] = -c[i];
    }
    let schur = Schur::new(m);
    let (_, t) = schur.unpack();
    (0..d).map(|i| t[(i, i)]).collect()
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;
    fn add(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut q = ComplexPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect());
        q.formal_degree = self.formal_degree.max(rhs.formal_degree);
        q
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;
    fn sub(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut q = ComplexPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect());
        q.formal_degree = self.formal_degree.max(rhs.formal_degree);
        q
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;
    fn mul(self, rhs: &ComplexPoly) -> ComplexPoly {
        let mut coeffs = vec![Complex::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        let mut q = ComplexPoly::new(coeffs);
        q.formal_degree = (self.formal_degree + rhs.formal_degree).max(q.degree());
        q
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;
    fn neg(self) -> ComplexPoly {
        self.scale(Complex::new(-1.0, 0.0))
    }
}

/// First `order + 1` Maclaurin coefficients of `num / den`.
pub fn series_div(
    num: &ComplexPoly,
    den: &ComplexPoly,
    order: usize,
) -> Result<Vec<Complex>, PolyError> {
    let d0 = den.coeff(0);
    if d0 == Complex::new(0.0, 0.0) {
        return Err(PolyError::SingularDenominator);
    }
    let mut out: Vec<Complex> = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut acc = num.coeff(k);
        for i in 1..=k.min(den.degree()) {
            acc -= den.coeff(i) * out[k - i];
        }
        out.push(acc / d0);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiskCount {
    pub count: usize,
    pub ambiguous: Vec<Complex>,
}

impl DiskCount {
    pub fn is_clean(&self) -> bool {
        self.ambiguous.is_empty()
    }
}

/// Counts roots with `|r| <= 1 - guard`; the open annulus of half-width
/// `guard` around the unit circle is reported rather than classified.
pub fn count_in_disk(roots: &[Complex], guard: f64) -> DiskCount {
    let mut count = 0;
    let mut ambiguous = Vec::new();
    for &r in roots {
        let m = r.norm();
        if m <= 1.0 - guard {
            count += 1;
        } else if m < 1.0 + guard {
            ambiguous.push(r);
        }
    }
    DiskCount { count, ambiguous }
}
