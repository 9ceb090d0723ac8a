//! Verblunsky coefficient sequences and the polynomial families they generate.
//!
//! A sequence stores finitely many coefficients; every later coefficient is
//! zero. Coefficients may lie outside the closed disk as long as none sits
//! on the unit circle, and the smallest `N` after which all stored
//! coefficients are inside the disk is computed by
//! [`VerblunskySequence::classical_start`].

use std::f64::consts::TAU;

use thiserror::Error;

use crate::poly::{Complex, ComplexPoly};

/// Minimum allowed distance of `|alpha_j|` from 1.
pub const DEFAULT_GUARD_UNIT: f64 = 1e-8;

/// Relative residual above which the Wall cross-checks are treated as a bug.
pub const WALL_CHECK_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequenceError {
    #[error("index {index} on unit circle (|alpha| = {modulus})")]
    OnUnitCircle { index: usize, modulus: f64 },
    #[error("index {index} is not a finite complex number")]
    NonFinite { index: usize },
    #[error("guard_unit must be positive and finite, got {0}")]
    InvalidGuard(f64),
    #[error("index {n} is out of range for {len} stored coefficients")]
    IndexOutOfRange { n: usize, len: usize },
    #[error("{identity} cross-check failed with relative residual {residual:e}")]
    IdentityCheck { identity: &'static str, residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerblunskySequence {
    alphas: Vec<Complex>,
    guard_unit: f64,
}

impl VerblunskySequence {
    pub fn new(alphas: Vec<Complex>) -> Result<Self, SequenceError> {
        Self::with_guard(alphas, DEFAULT_GUARD_UNIT)
    }

    pub fn with_guard(alphas: Vec<Complex>, guard_unit: f64) -> Result<Self, SequenceError> {
        if !(guard_unit > 0.0 && guard_unit.is_finite()) {
            return Err(SequenceError::InvalidGuard(guard_unit));
        }
        for (index, a) in alphas.iter().enumerate() {
            if !a.is_finite() {
                return Err(SequenceError::NonFinite { index });
            }
            let modulus = a.norm();
            if (modulus - 1.0).abs() < guard_unit {
                return Err(SequenceError::OnUnitCircle { index, modulus });
            }
        }
        Ok(Self { alphas, guard_unit })
    }

    pub fn from_real(alphas: &[f64]) -> Result<Self, SequenceError> {
        Self::new(alphas.iter().map(|&a| Complex::new(a, 0.0)).collect())
    }

    pub fn alphas(&self) -> &[Complex] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn guard_unit(&self) -> f64 {
        self.guard_unit
    }

    /// `alpha_j`, zero past the stored range.
    pub fn alpha(&self, j: usize) -> Complex {
        self.alphas.get(j).copied().unwrap_or_default()
    }

    /// One past the last index with `|alpha| > 1`, or 0 when there is none.
    pub fn classical_start(&self) -> usize {
        self.alphas
            .iter()
            .rposition(|a| a.norm() > 1.0)
            .map_or(0, |j| j + 1)
    }

    pub fn is_classical(&self) -> bool {
        self.classical_start() == 0
    }

    /// Coefficients `alpha_0 .. alpha_{N-1}`.
    pub fn head(&self) -> &[Complex] {
        &self.alphas[..self.classical_start()]
    }

    /// Stored coefficients from index `n` on (empty past the end).
    pub fn tail_from(&self, n: usize) -> &[Complex] {
        &self.alphas[n.min(self.alphas.len())..]
    }

    /// The sequence `{-alpha_j}` that generates the second kind polynomials.
    pub fn negated(&self) -> Self {
        Self {
            alphas: self.alphas.iter().map(|a| -a).collect(),
            guard_unit: self.guard_unit,
        }
    }

    /// `prod_{j < count} (1 - |alpha_j|^2)` as sign and log-magnitude.
    pub fn partial_omega(&self, count: usize) -> SignedLog {
        (0..count).fold(SignedLog::ONE, |acc, j| {
            acc.times(1.0 - self.alpha(j).norm_sqr())
        })
    }

    /// `omega_n = prod_{j=0}^{n} (1 - |alpha_j|^2)`.
    pub fn omega(&self, n: usize) -> f64 {
        self.partial_omega_value(n + 1)
    }

    /// Direct product of the first `count` factors, switching to the
    /// sign/log form only when the running product leaves the normal range.
    pub fn partial_omega_value(&self, count: usize) -> f64 {
        let direct: f64 = (0..count).map(|j| 1.0 - self.alpha(j).norm_sqr()).product();
        if direct.is_normal() {
            direct
        } else {
            self.partial_omega(count).value()
        }
    }

    /// `Phi_n` and `Phi_n^*` from the Szego recursion started at `Phi_0 = 1`.
    pub fn szego_polys(&self, n: usize) -> PolyPair {
        let mut pair = PolyPair::initial();
        for k in 0..n {
            pair = pair.step(self.alpha(k));
        }
        pair
    }

    /// `Phi_0 .. Phi_{n_max}` in one pass.
    pub fn szego_family(&self, n_max: usize) -> Vec<PolyPair> {
        let mut out = Vec::with_capacity(n_max + 1);
        let mut pair = PolyPair::initial();
        for k in 0..n_max {
            let next = pair.step(self.alpha(k));
            out.push(pair);
            pair = next;
        }
        out.push(pair);
        out
    }

    /// `Psi_n` and `Psi_n^*`: the Szego recursion driven by `{-alpha_j}`.
    pub fn second_kind_polys(&self, n: usize) -> PolyPair {
        let mut pair = PolyPair::initial();
        for k in 0..n {
            pair = pair.step(-self.alpha(k));
        }
        pair
    }

    /// Wall polynomials `A_n`, `B_n`, cross-checked against the Pinter-Nevai
    /// formula and the circle identity `|B_n|^2 - |A_n|^2 = omega_n`.
    pub fn wall_polys(&self, n: usize) -> Result<WallPair, SequenceError> {
        if n >= self.len() {
            return Err(SequenceError::IndexOutOfRange { n, len: self.len() });
        }
        let pair = WallPair::from_transfer(&TransferMatrix::product(&self.alphas[..=n]), n);

        let phi = self.szego_polys(n + 1);
        let (pn_phi, pn_phi_star) = pair.pinter_nevai_residuals(&phi);
        let pn = pn_phi.max(pn_phi_star);
        if pn.is_nan() || pn > WALL_CHECK_TOL {
            return Err(SequenceError::IdentityCheck { identity: "Pinter-Nevai", residual: pn });
        }
        let omega = self.omega(n);
        let wall = pair.circle_residual(omega, 64);
        if wall.is_nan() || wall > WALL_CHECK_TOL {
            return Err(SequenceError::IdentityCheck { identity: "Wall circle", residual: wall });
        }
        Ok(pair)
    }

    /// Maximum relative deviations of the Wall, Pinter-Nevai and
    /// `Phi Psi^* + Phi^* Psi = 2 z^{n+1} omega_n` identities at index `n`.
    pub fn verify_identities(&self, n: usize, grid: usize) -> Result<IdentityReport, SequenceError> {
        if n >= self.len() {
            return Err(SequenceError::IndexOutOfRange { n, len: self.len() });
        }
        let pair = WallPair::from_transfer(&TransferMatrix::product(&self.alphas[..=n]), n);
        let omega = self.omega(n);
        let phi = self.szego_polys(n + 1);
        let psi = self.second_kind_polys(n + 1);
        let (pn_phi, pn_phi_star) = pair.pinter_nevai_residuals(&phi);
        Ok(IdentityReport {
            n,
            omega,
            wall_on_circle: pair.circle_residual(omega, grid),
            pinter_nevai: pn_phi.max(pn_phi_star),
            liouville: liouville_residual(&phi, &psi, n + 1, omega),
        })
    }
}

/// Product of positive and negative reals kept as sign and `ln |x|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub sign: f64,
    pub log_abs: f64,
}

impl SignedLog {
    pub const ONE: SignedLog = SignedLog { sign: 1.0, log_abs: 0.0 };

    pub fn times(self, x: f64) -> Self {
        if x == 0.0 {
            return SignedLog { sign: 0.0, log_abs: f64::NEG_INFINITY };
        }
        SignedLog {
            sign: self.sign * x.signum(),
            log_abs: self.log_abs + x.abs().ln(),
        }
    }

    pub fn value(self) -> f64 {
        self.sign * self.log_abs.exp()
    }
}

/// A polynomial and its reversal at the same formal degree.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyPair {
    pub poly: ComplexPoly,
    pub reversed: ComplexPoly,
}

impl PolyPair {
    fn initial() -> Self {
        Self { poly: ComplexPoly::one(), reversed: ComplexPoly::one() }
    }

    pub fn degree(&self) -> usize {
        self.poly.formal_degree()
    }

    fn step(&self, alpha: Complex) -> Self {
        let z_poly = self.poly.shift_up(1);
        let poly = &z_poly - &self.reversed.scale(alpha.conj());
        let reversed = &self.reversed - &z_poly.scale(alpha);
        let n = self.degree() + 1;
        Self {
            poly: poly.with_formal_degree(n).expect("degree grows by one"),
            reversed: reversed.with_formal_degree(n).expect("degree grows by one"),
        }
    }
}

/// 2x2 matrix of polynomials, the ordered product of the per-step Mobius
/// matrices `[[z, a], [conj(a) z, 1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub entries: [[ComplexPoly; 2]; 2],
}

impl TransferMatrix {
    pub fn identity() -> Self {
        Self {
            entries: [
                [ComplexPoly::one(), ComplexPoly::zero()],
                [ComplexPoly::zero(), ComplexPoly::one()],
            ],
        }
    }

    pub fn step(alpha: Complex) -> Self {
        Self {
            entries: [
                [ComplexPoly::monomial(1), ComplexPoly::constant(alpha)],
                [ComplexPoly::new(vec![Complex::new(0.0, 0.0), alpha.conj()]), ComplexPoly::one()],
            ],
        }
    }

    pub fn product(alphas: &[Complex]) -> Self {
        alphas
            .iter()
            .fold(Self::identity(), |acc, &a| acc.mul(&Self::step(a)))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let e = |i: usize, j: usize| {
            &(&self.entries[i][0] * &rhs.entries[0][j]) + &(&self.entries[i][1] * &rhs.entries[1][j])
        };
        Self { entries: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
    }

    /// `(top_left w + top_right) / (bottom_left w + bottom_right)` at `z`.
    pub fn apply(&self, z: Complex, w: Complex) -> (Complex, Complex) {
        let [[tl, tr], [bl, br]] = &self.entries;
        (tl.eval(z) * w + tr.eval(z), bl.eval(z) * w + br.eval(z))
    }
}

/// Wall polynomials `A_n` (numerator) and `B_n` (denominator).
#[derive(Debug, Clone, PartialEq)]
pub struct WallPair {
    pub a: ComplexPoly,
    pub b: ComplexPoly,
    pub n: usize,
}

impl WallPair {
    fn from_transfer(t: &TransferMatrix, n: usize) -> Self {
        let a = t.entries[0][1].clone().with_formal_degree(n).expect("deg A_n <= n");
        let b = t.entries[1][1].clone().with_formal_degree(n).expect("deg B_n <= n");
        Self { a, b, n }
    }

    pub fn a_star(&self) -> ComplexPoly {
        self.a.reversed()
    }

    pub fn b_star(&self) -> ComplexPoly {
        self.b.reversed()
    }

    /// Relative residuals of `Phi_{n+1} = z B^* - A^*` and `Phi^*_{n+1} = B - z A`.
    fn pinter_nevai_residuals(&self, phi: &PolyPair) -> (f64, f64) {
        let lhs_phi = &self.b_star().shift_up(1) - &self.a_star();
        let lhs_star = &self.b - &self.a.shift_up(1);
        (
            coefficient_residual(&lhs_phi, &phi.poly),
            coefficient_residual(&lhs_star, &phi.reversed),
        )
    }

    fn circle_residual(&self, omega: f64, grid: usize) -> f64 {
        (0..grid.max(1))
            .map(|k| {
                let z = Complex::from_polar(1.0, TAU * k as f64 / grid.max(1) as f64);
                let b2 = self.b.eval(z).norm_sqr();
                let a2 = self.a.eval(z).norm_sqr();
                ((b2 - a2) - omega).abs() / (b2 + a2).max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    pub n: usize,
    pub omega: f64,
    /// `max | |B|^2 - |A|^2 - omega | / max(1, |B|^2 + |A|^2)` over the grid.
    pub wall_on_circle: f64,
    pub pinter_nevai: f64,
    pub liouville: f64,
}

impl IdentityReport {
    pub fn worst(&self) -> f64 {
        self.wall_on_circle.max(self.pinter_nevai).max(self.liouville)
    }
}

/// `max_k |p_k - q_k| / max(1, max |p_k|, max |q_k|)`.
pub(crate) fn coefficient_residual(p: &ComplexPoly, q: &ComplexPoly) -> f64 {
    let n = p.coeffs().len().max(q.coeffs().len());
    let scale = p.max_abs_coeff().max(q.max_abs_coeff()).max(1.0);
    (0..n)
        .map(|k| (p.coeff(k) - q.coeff(k)).norm())
        .fold(0.0, f64::max)
        / scale
}

fn liouville_residual(phi: &PolyPair, psi: &PolyPair, m: usize, omega: f64) -> f64 {
    let t1 = &phi.poly * &psi.reversed;
    let t2 = &phi.reversed * &psi.poly;
    let lhs = &t1 + &t2;
    let rhs = ComplexPoly::monomial(m).scale(Complex::new(2.0 * omega, 0.0));
    let scale = t1.max_abs_coeff().max(t2.max_abs_coeff()).max(1.0);
    let n = lhs.coeffs().len().max(rhs.coeffs().len());
    (0..n)
        .map(|k| (lhs.coeff(k) - rhs.coeff(k)).norm())
        .fold(0.0, f64::max)
        / scale
}
