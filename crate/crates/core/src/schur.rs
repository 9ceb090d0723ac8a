//! Rational Schur functions, the Caratheodory-type function `F`, and the
//! inverse Schur algorithm that reads coefficients back off `F`.

use thiserror::Error;

use crate::poly::{Complex, ComplexPoly, PolyError, DEFAULT_ROOT_TOL};
use crate::verblunsky::{PolyPair, SequenceError, TransferMatrix, VerblunskySequence};

/// Roots of numerator and denominator closer than this are cancelled.
pub const COMMON_ROOT_TOL: f64 = 1e-9;
/// Relative size of a denominator treated as a pole during evaluation.
pub const POLE_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchurError {
    #[error("denominator vanishes at 0")]
    PoleAtZero,
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("evaluation at a pole near {0}")]
    Pole(Complex),
    #[error("coefficient {index} of the tail has modulus {modulus} >= 1")]
    NotClassicalTail { index: usize, modulus: f64 },
    #[error("F(0) = 0, the Mobius seed is undefined")]
    VanishingAtZero,
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `gain * num / den` with `den(0) = 1`.
///
/// Near-common roots of `num` and `den` are divided out at construction and
/// kept in [`RationalFn::cancelled`].
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFn {
    num: ComplexPoly,
    den: ComplexPoly,
    gain: Complex,
    cancelled: Vec<Complex>,
}

impl RationalFn {
    pub fn new(num: ComplexPoly, den: ComplexPoly) -> Result<Self, SchurError> {
        if den.is_zero() {
            return Err(SchurError::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let (mut num, mut den) = (num, den);
        // Common powers of z.
        while num.coeff(0) == Complex::default() && den.coeff(0) == Complex::default() {
            num = num.shift_down();
            den = den.shift_down();
        }
        if den.coeff(0) == Complex::default() {
            return Err(SchurError::PoleAtZero);
        }
        let cancelled = cancel_common_roots(&mut num, &mut den);
        let d0 = den.coeff(0);
        let inv = Complex::new(1.0, 0.0) / d0;
        let (num, den) = if d0 == Complex::new(1.0, 0.0) {
            (num, den)
        } else {
            let mut d = den.scale(inv).into_coeffs();
            d[0] = Complex::new(1.0, 0.0);
            (num.scale(inv), ComplexPoly::new(d))
        };
        Ok(Self { num, den, gain: Complex::new(1.0, 0.0), cancelled })
    }

    pub fn constant(c: Complex) -> Self {
        Self {
            num: ComplexPoly::constant(c),
            den: ComplexPoly::one(),
            gain: Complex::new(1.0, 0.0),
            cancelled: Vec::new(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(Complex::default())
    }

    pub fn num(&self) -> &ComplexPoly {
        &self.num
    }

    pub fn den(&self) -> &ComplexPoly {
        &self.den
    }

    pub fn gain(&self) -> Complex {
        self.gain
    }

    pub fn cancelled(&self) -> &[Complex] {
        &self.cancelled
    }

    /// Numerator with the gain folded in.
    pub fn scaled_num(&self) -> ComplexPoly {
        if self.gain == Complex::new(1.0, 0.0) {
            self.num.clone()
        } else {
            self.num.scale(self.gain)
        }
    }

    /// `c * self`; only the gain changes.
    pub fn scaled(&self, c: Complex) -> Self {
        Self { gain: self.gain * c, ..self.clone() }
    }

    pub fn at_zero(&self) -> Complex {
        self.gain * self.num.coeff(0)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.num.is_zero() || self.gain == Complex::default()
    }

    pub fn eval(&self, z: Complex) -> Result<Complex, SchurError> {
        let (d, scale) = self.den.eval_with_scale(z);
        if d.norm() <= POLE_TOL * scale {
            return Err(SchurError::Pole(z));
        }
        Ok(self.gain * self.num.eval(z) / d)
    }

    /// Evaluation without the pole check.
    pub fn eval_raw(&self, z: Complex) -> Complex {
        self.gain * self.num.eval(z) / self.den.eval(z)
    }
}

fn cancel_common_roots(num: &mut ComplexPoly, den: &mut ComplexPoly) -> Vec<Complex> {
    if num.degree() == 0 || den.degree() == 0 {
        return Vec::new();
    }
    let (num_roots, den_roots) = match (num.roots(DEFAULT_ROOT_TOL), den.roots(DEFAULT_ROOT_TOL)) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => {
            log::warn!(
                "skipping common-root cancellation: {:?} / {:?}",
                a.err(),
                b.err()
            );
            return Vec::new();
        }
    };
    let mut used = vec![false; num_roots.len()];
    let mut cancelled = Vec::new();
    for &r in &den_roots {
        let hit = num_roots
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, &s)| (i, (s - r).norm()))
            .filter(|&(_, d)| d <= COMMON_ROOT_TOL)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((i, _)) = hit {
            used[i] = true;
            let root = (r + num_roots[i]) * 0.5;
            *num = num.divide_root(root);
            *den = den.divide_root(root);
            cancelled.push(root);
        }
    }
    if !cancelled.is_empty() {
        log::debug!("cancelled common roots {cancelled:?}");
    }
    cancelled
}

/// The Schur function `f_n` of the classical tail `alpha_n, alpha_{n+1}, ...`
/// as the finite Wall ratio `A / B` (the iterate past the stored range is 0).
pub fn tail_schur(seq: &VerblunskySequence, n: usize) -> Result<RationalFn, SchurError> {
    let tail = seq.tail_from(n);
    if let Some((k, a)) = tail.iter().enumerate().find(|(_, a)| a.norm() >= 1.0) {
        return Err(SchurError::NotClassicalTail { index: n + k, modulus: a.norm() });
    }
    if tail.is_empty() {
        return Ok(RationalFn::zero());
    }
    let t = TransferMatrix::product(tail);
    let [_, [_, b]] = &t.entries;
    let a = &t.entries[0][1];
    RationalFn::new(a.clone(), b.clone())
}

/// Everything needed to evaluate `f` and `F` for one sequence, split at an
/// index `n` past which the coefficients are classical.
#[derive(Debug, Clone)]
pub struct CaratheodoryModel {
    split: usize,
    head: TransferMatrix,
    phi: PolyPair,
    psi: PolyPair,
    tail: RationalFn,
}

impl CaratheodoryModel {
    /// Splits at the smallest valid index.
    pub fn new(seq: &VerblunskySequence) -> Result<Self, SchurError> {
        Self::split_at(seq, seq.classical_start())
    }

    /// Splits at any `n >= N`.
    pub fn split_at(seq: &VerblunskySequence, n: usize) -> Result<Self, SchurError> {
        let tail = tail_schur(seq, n)?;
        let head_len = n.min(seq.len());
        Ok(Self {
            split: n,
            head: TransferMatrix::product(&seq.alphas()[..head_len]),
            phi: seq.szego_polys(n),
            psi: seq.second_kind_polys(n),
            tail,
        })
    }

    pub fn split(&self) -> usize {
        self.split
    }

    pub fn phi(&self) -> &PolyPair {
        &self.phi
    }

    pub fn psi(&self) -> &PolyPair {
        &self.psi
    }

    pub fn tail(&self) -> &RationalFn {
        &self.tail
    }

    fn tail_value(&self, z: Complex) -> Result<Complex, SchurError> {
        self.tail.eval(z)
    }

    /// `f(z) = (A + z B^* f_n) / (B + z A^* f_n)`.
    pub fn eval_f(&self, z: Complex) -> Result<Complex, SchurError> {
        let w = self.tail_value(z)?;
        let (num, den) = self.head.apply(z, w);
        let [_, [bl, br]] = &self.head.entries;
        let scale = (bl.eval(z) * w).norm() + br.eval(z).norm();
        if den.norm() <= POLE_TOL * scale {
            return Err(SchurError::Pole(z));
        }
        Ok(num / den)
    }

    /// `F = (Psi_n^* + z Psi_n f_n) / (Phi_n^* - z Phi_n f_n)`.
    pub fn eval_caratheodory(&self, z: Complex) -> Result<Complex, SchurError> {
        let w = self.tail_value(z)?;
        let zw = z * w;
        let num = self.psi.reversed.eval(z) + zw * self.psi.poly.eval(z);
        let a = self.phi.reversed.eval(z);
        let b = zw * self.phi.poly.eval(z);
        let den = a - b;
        if den.norm() <= POLE_TOL * (a.norm() + b.norm()) {
            return Err(SchurError::Pole(z));
        }
        Ok(num / den)
    }

    /// `F = (1 + z f) / (1 - z f)` through the head Mobius map.
    pub fn eval_caratheodory_via_f(&self, z: Complex) -> Result<Complex, SchurError> {
        let zf = z * self.eval_f(z)?;
        let den = Complex::new(1.0, 0.0) - zf;
        if den.norm() <= POLE_TOL * (1.0 + zf.norm()) {
            return Err(SchurError::Pole(z));
        }
        Ok((Complex::new(1.0, 0.0) + zf) / den)
    }

    /// Cleared-denominator form of `F`.
    pub fn rational(&self) -> Result<RationalFn, SchurError> {
        let at = self.tail.scaled_num();
        let bt = self.tail.den();
        let num = &(&self.psi.reversed * bt) + &(&self.psi.poly * &at).shift_up(1);
        let den = &(&self.phi.reversed * bt) - &(&self.phi.poly * &at).shift_up(1);
        RationalFn::new(num, den)
    }
}

pub fn eval_f(seq: &VerblunskySequence, z: Complex) -> Result<Complex, SchurError> {
    CaratheodoryModel::new(seq)?.eval_f(z)
}

pub fn eval_caratheodory(seq: &VerblunskySequence, z: Complex) -> Result<Complex, SchurError> {
    CaratheodoryModel::new(seq)?.eval_caratheodory(z)
}

pub fn caratheodory_rational(seq: &VerblunskySequence) -> Result<RationalFn, SchurError> {
    CaratheodoryModel::new(seq)?.rational()
}

/// One step of the inverse Schur algorithm.
#[derive(Debug, Clone, PartialEq)]
pub enum SchurStep {
    /// `alpha = f(0)` and `f_next = (f - alpha) / (z (1 - conj(alpha) f))`.
    Continue { alpha: Complex, next: RationalFn },
    /// `|f(0)|` is within the guard of 1: the next iterate would have a pole at 0.
    Terminal { alpha: Complex },
}

pub fn inverse_schur_step(f: &RationalFn, guard: f64) -> Result<SchurStep, SchurError> {
    let alpha = f.at_zero();
    if (alpha.norm() - 1.0).abs() < guard {
        return Ok(SchurStep::Terminal { alpha });
    }
    let num = f.scaled_num();
    let den = f.den();
    // The constant term of num - alpha den is zero by construction of alpha.
    let forced = &num - &den.scale(alpha);
    let next_num = forced.shift_down();
    let next_den = den - &num.scale(alpha.conj());
    let next = RationalFn::new(next_num, next_den)?;
    Ok(SchurStep::Continue { alpha, next })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// `|f_index(0)|` fell within the guard of the unit circle.
    UnitModulus { index: usize, alpha: Complex },
    /// `f_index` has a pole at 0.
    PoleAtZero { index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub alphas: Vec<Complex>,
    pub termination: Option<Termination>,
}

/// `f_0 = (F - F(0)) / (z (F + F(0)))`; depends on `F` only through `F / F(0)`.
pub fn mobius_seed(fstar: &RationalFn) -> Result<RationalFn, SchurError> {
    let p = fstar.num();
    let p0 = p.coeff(0);
    if p0 == Complex::default() || fstar.gain() == Complex::default() {
        return Err(SchurError::VanishingAtZero);
    }
    let q = fstar.den().scale(p0);
    RationalFn::new((p - &q).shift_down(), p + &q)
}

/// `{f_n(0)}` for `n < max_n`, iterating the inverse Schur step from the
/// Mobius seed of `F_*`.
pub fn recover_coefficients(
    fstar: &RationalFn,
    max_n: usize,
    guard: f64,
) -> Result<Recovery, SchurError> {
    let mut f = mobius_seed(fstar)?;
    let mut alphas = Vec::with_capacity(max_n);
    for index in 0..max_n {
        match inverse_schur_step(&f, guard)? {
            SchurStep::Continue { alpha, next } => {
                alphas.push(alpha);
                f = next;
            }
            SchurStep::Terminal { alpha } => {
                alphas.push(alpha);
                return Ok(Recovery {
                    alphas,
                    termination: Some(Termination::UnitModulus { index, alpha }),
                });
            }
        }
    }
    Ok(Recovery { alphas, termination: None })
}

/// Recovery from raw numerator and denominator coefficients; a pole of
/// `F_*` at 0 yields an empty, terminated recovery.
pub fn recover_from_parts(
    num: ComplexPoly,
    den: ComplexPoly,
    max_n: usize,
    guard: f64,
) -> Result<Recovery, SchurError> {
    match RationalFn::new(num, den) {
        Ok(f) => recover_coefficients(&f, max_n, guard),
        Err(SchurError::PoleAtZero) => Ok(Recovery {
            alphas: Vec::new(),
            termination: Some(Termination::PoleAtZero { index: 0 }),
        }),
        Err(e) => Err(e),
    }
}
