//! Theorem-level computations: Khrushchev's formula on the circle, the pole
//! set of `F`, the Szego identity with poles, Boyd's integral, zero-count
//! traces, zero migration and moment growth.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{count_in_disk, series_div, Complex, PolyError, DEFAULT_DISK_GUARD, DEFAULT_ROOT_TOL};
use crate::schur::{tail_schur, CaratheodoryModel, RationalFn, SchurError};
use crate::verblunsky::{PolyPair, SequenceError, VerblunskySequence};

pub const DEFAULT_QUAD_TOL: f64 = 1e-11;
pub const DEFAULT_MAX_POINTS: usize = 1 << 20;
pub const MIN_QUAD_POINTS: usize = 64;
/// Denominator roots closer than this are merged into one pole.
pub const POLE_CLUSTER_TOL: f64 = 1e-7;
/// Relative guard on `|Phi_n^* - z Phi_n f_n|` in Khrushchev's formula.
pub const KHRUSHCHEV_GUARD: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("ambiguous roots within the guard of the unit circle: {0:?}")]
    Ambiguous(Vec<Complex>),
    #[error("integrand is not finite at theta = {theta}")]
    Singular { theta: f64 },
    #[error("quadrature did not converge with {points} points (last change {change:e})")]
    NoConvergence { points: usize, change: f64 },
    #[error("index {n} is below the classical start {start}")]
    BelowClassicalStart { n: usize, start: usize },
    #[error("Khrushchev denominator vanishes at theta = {theta}")]
    DenominatorVanishes { theta: f64 },
    #[error(transparent)]
    Schur(#[from] SchurError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

/// A complex number as it appears in reports: `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex> for ComplexValue {
    fn from(z: Complex) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexValue> for Complex {
    fn from(z: ComplexValue) -> Self {
        Complex::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadOptions {
    pub tol: f64,
    pub max_points: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_QUAD_TOL, max_points: DEFAULT_MAX_POINTS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Integrand evaluations, over both stages when refinement ran.
    pub points: usize,
    pub converged: bool,
    /// Last change between trapezoid grids, or the summed error estimate
    /// after refinement.
    pub last_change: f64,
    /// The trapezoid stage ran out of points and adaptive refinement ran.
    pub refined: bool,
}

/// `(1/2pi) * integral of g over [0, 2pi)` by the trapezoidal rule on nested
/// equispaced grids, doubling from 64 points until two successive values
/// differ by less than `tol` or the next grid would exceed `max_points`.
///
/// A non-finite sample restarts the whole run once with the grid shifted by
/// half a step. When the grids run out, adaptive Gauss-Kronrod subdivision
/// takes over with a further budget of `max_points` evaluations; it resolves
/// singularities close to the circle that a uniform grid cannot.
pub fn circle_quadrature<G>(g: G, tol: f64, max_points: usize) -> Result<Quadrature, AnalysisError>
where
    G: Fn(f64) -> f64,
{
    let trap = match trapezoid_run(&g, 0.0, tol, max_points) {
        Ok(q) => q,
        Err((theta, m)) => {
            log::debug!("non-finite sample at theta = {theta}; shifting grid");
            trapezoid_run(&g, std::f64::consts::PI / m as f64, tol, max_points)
                .map_err(|(theta, _)| AnalysisError::Singular { theta })?
        }
    };
    if trap.converged {
        return Ok(trap);
    }
    log::warn!(
        "trapezoid grids exhausted at {} points (change {:e}); refining adaptively",
        trap.points,
        trap.last_change
    );
    let ad = adaptive_kronrod(&g, tol, max_points)?;
    Ok(Quadrature {
        value: ad.value,
        points: trap.points + ad.points,
        converged: ad.converged,
        last_change: ad.last_change,
        refined: true,
    })
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights at the odd-indexed Kronrod nodes.
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel on `[a, b]`: `(estimate, |Kronrod - Gauss|)`,
/// both normalized by `2 pi`.
fn kronrod_panel<G>(g: &G, a: f64, b: f64) -> Result<(f64, f64), AnalysisError>
where
    G: Fn(f64) -> f64,
{
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let sample = |t: f64| {
        let v = g(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(AnalysisError::Singular { theta: t })
        }
    };
    let fc = sample(mid)?;
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = half * KRONROD_NODES[i];
        let pair = sample(mid - dx)? + sample(mid + dx)?;
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    let scale = half / TAU;
    Ok((kronrod * scale, ((kronrod - gauss) * scale).abs()))
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Bisects the panel with the largest error estimate until the summed
/// estimate drops below `tol` or `max_points` evaluations are spent.
fn adaptive_kronrod<G>(g: &G, tol: f64, max_points: usize) -> Result<Quadrature, AnalysisError>
where
    G: Fn(f64) -> f64,
{
    const START: usize = 16;
    let mut heap = std::collections::BinaryHeap::new();
    for k in 0..START {
        let (a, b) = (TAU * k as f64 / START as f64, TAU * (k + 1) as f64 / START as f64);
        let (value, error) = kronrod_panel(g, a, b)?;
        heap.push(Panel { a, b, value, error });
    }
    let mut points = 15 * START;
    loop {
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if error < tol || points + 30 > max_points {
            let value = heap.iter().map(|p| p.value).sum();
            return Ok(Quadrature { value, points, converged: error < tol, last_change: error, refined: true });
        }
        let worst = heap.pop().expect("panels are never exhausted");
        let mid = 0.5 * (worst.a + worst.b);
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = kronrod_panel(g, a, b)?;
            heap.push(Panel { a, b, value, error });
        }
        points += 30;
    }
}

fn trapezoid_run<G>(g: &G, offset: f64, tol: f64, max_points: usize) -> Result<Quadrature, (f64, usize)>
where
    G: Fn(f64) -> f64,
{
    let sample = |theta: f64, m: usize| -> Result<f64, (f64, usize)> {
        let v = g(theta);
        if v.is_finite() {
            Ok(v)
        } else {
            Err((theta, m))
        }
    };
    let mut m = MIN_QUAD_POINTS;
    let mut sum = 0.0;
    for k in 0..m {
        sum += sample(offset + TAU * k as f64 / m as f64, m)?;
    }
    let mut value = sum / m as f64;
    let mut last_change = f64::INFINITY;
    while 2 * m <= max_points.max(MIN_QUAD_POINTS) {
        let fine = 2 * m;
        for k in 0..m {
            sum += sample(offset + TAU * (2 * k + 1) as f64 / fine as f64, fine)?;
        }
        m = fine;
        let next = sum / m as f64;
        last_change = (next - value).abs();
        value = next;
        if last_change < tol {
            return Ok(Quadrature { value, points: m, converged: true, last_change, refined: false });
        }
    }
    Ok(Quadrature { value, points: m, converged: false, last_change, refined: false })
}

/// Khrushchev's representation of `Re F` on the circle, for a fixed split
/// index `n >= N`:
/// `Re F = omega_{n-1} (1 - |f_n|^2) / |Phi_n^* - z Phi_n f_n|^2`.
#[derive(Debug, Clone)]
pub struct Khrushchev {
    n: usize,
    omega: f64,
    phi: PolyPair,
    tail: RationalFn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KhrushchevParts {
    pub omega: f64,
    /// `1 - |f_n|^2`
    pub tail_term: f64,
    /// `|Phi_n^* - z Phi_n f_n|^2`
    pub denominator: f64,
}

impl KhrushchevParts {
    pub fn value(&self) -> f64 {
        self.omega * self.tail_term / self.denominator
    }

    pub fn log_abs(&self) -> f64 {
        self.omega.abs().ln() + self.tail_term.ln() - self.denominator.ln()
    }
}

impl Khrushchev {
    pub fn new(seq: &VerblunskySequence, n: usize) -> Result<Self, AnalysisError> {
        let start = seq.classical_start();
        if n < start {
            return Err(AnalysisError::BelowClassicalStart { n, start });
        }
        Ok(Self {
            n,
            omega: seq.partial_omega_value(n),
            phi: seq.szego_polys(n),
            tail: tail_schur(seq, n)?,
        })
    }

    pub fn index(&self) -> usize {
        self.n
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn parts(&self, theta: f64) -> Result<KhrushchevParts, AnalysisError> {
        let z = Complex::from_polar(1.0, theta);
        let f = self.tail.eval(z)?;
        let a = self.phi.reversed.eval(z);
        let b = z * self.phi.poly.eval(z) * f;
        let r = a - b;
        if r.norm() <= KHRUSHCHEV_GUARD * (a.norm() + b.norm()) {
            return Err(AnalysisError::DenominatorVanishes { theta });
        }
        Ok(KhrushchevParts {
            omega: self.omega,
            tail_term: 1.0 - f.norm_sqr(),
            denominator: r.norm_sqr(),
        })
    }

    pub fn re_f(&self, theta: f64) -> Result<f64, AnalysisError> {
        Ok(self.parts(theta)?.value())
    }
}

pub fn re_f_khrushchev(seq: &VerblunskySequence, n: usize, theta: f64) -> Result<f64, AnalysisError> {
    Khrushchev::new(seq, n)?.re_f(theta)
}

/// A pole of `F` in the disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

impl Pole {
    pub fn value(&self) -> Complex {
        Complex::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    pub poles: Vec<Pole>,
    /// Zeros of `Phi_N^*` in the disk, the upper bound on the pole count.
    pub phi_star_zeros: usize,
}

impl PoleSet {
    /// Poles counted with multiplicity.
    pub fn count(&self) -> usize {
        self.poles.iter().map(|p| p.multiplicity).sum()
    }

    /// Each pole repeated by its multiplicity.
    pub fn listed(&self) -> Vec<Complex> {
        self.poles
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.value(), p.multiplicity))
            .collect()
    }

    /// `prod |lambda_j|^{-2}` with multiplicity.
    pub fn inverse_square_product(&self) -> f64 {
        self.poles
            .iter()
            .map(|p| p.value().norm().powi(-2 * p.multiplicity as i32))
            .product()
    }

    pub fn min_modulus(&self) -> Option<f64> {
        self.poles.iter().map(|p| p.value().norm()).min_by(f64::total_cmp)
    }
}

fn cluster(roots: &[Complex], tol: f64) -> Vec<Pole> {
    let mut groups: Vec<(Complex, usize)> = Vec::new();
    for &r in roots {
        match groups.iter_mut().find(|(c, k)| (*c / *k as f64 - r).norm() <= tol) {
            Some((c, k)) => {
                *c += r;
                *k += 1;
            }
            None => groups.push((r, 1)),
        }
    }
    groups
        .into_iter()
        .map(|(sum, k)| {
            let v = sum / k as f64;
            Pole { re: v.re, im: v.im, multiplicity: k }
        })
        .collect()
}

fn roots_in_disk(p: &crate::poly::ComplexPoly, guard: f64) -> Result<Vec<Complex>, AnalysisError> {
    if p.degree() == 0 {
        return Ok(Vec::new());
    }
    let roots = p.roots(DEFAULT_ROOT_TOL)?;
    let dc = count_in_disk(&roots, guard);
    if !dc.is_clean() {
        return Err(AnalysisError::Ambiguous(dc.ambiguous));
    }
    Ok(roots.into_iter().filter(|r| r.norm() <= 1.0 - guard).collect())
}

/// Poles of `F` in the disk: zeros there of the cleared denominator
/// `Phi_N^* B_t - z Phi_N A_t`, after common-root cancellation.
pub fn pole_set(seq: &VerblunskySequence, guard: f64) -> Result<PoleSet, AnalysisError> {
    let model = CaratheodoryModel::new(seq)?;
    let rational = model.rational()?;
    let inside = roots_in_disk(rational.den(), guard)?;
    let phi_star_zeros = roots_in_disk(&model.phi().reversed, guard)?.len();
    Ok(PoleSet { poles: cluster(&inside, POLE_CLUSTER_TOL), phi_star_zeros })
}

/// `prod_j (1 - |alpha_j|^2)` over the stored coefficients.
pub fn szego_lhs(seq: &VerblunskySequence) -> f64 {
    seq.partial_omega_value(seq.len())
}

/// Right side of the Szego identity, assembled with its ingredients.
#[derive(Debug, Clone, PartialEq)]
pub struct SzegoRhs {
    pub poles: PoleSet,
    pub epsilon: f64,
    pub pole_factor: f64,
    pub log_integral: f64,
    pub rhs: f64,
    pub quad_points: usize,
    pub warnings: Vec<String>,
}

/// `epsilon_{N-1} * prod |lambda_j|^{-2} * exp( (1/2pi) int log |Re F| )`
/// with `Re F` from Khrushchev's formula at the classical start.
pub fn szego_rhs(
    seq: &VerblunskySequence,
    quad: QuadOptions,
    guard: f64,
) -> Result<SzegoRhs, AnalysisError> {
    let poles = pole_set(seq, guard)?;
    let n = seq.classical_start();
    let k = Khrushchev::new(seq, n)?;
    let epsilon = k.omega().signum();
    let q = circle_quadrature(
        |theta| k.parts(theta).map(|p| p.log_abs()).unwrap_or(f64::NAN),
        quad.tol,
        quad.max_points,
    )?;
    if !q.converged {
        return Err(AnalysisError::NoConvergence { points: q.points, change: q.last_change });
    }
    let mut warnings = Vec::new();
    if q.refined {
        warnings.push(format!("trapezoid grids exhausted; adaptive refinement used {} evaluations", q.points));
    }
    if poles.count() > poles.phi_star_zeros {
        warnings.push(format!(
            "{} poles exceed the {} zeros of Phi_N^* in the disk",
            poles.count(),
            poles.phi_star_zeros
        ));
    }
    let pole_factor = poles.inverse_square_product();
    Ok(SzegoRhs {
        epsilon,
        pole_factor,
        log_integral: q.value,
        rhs: epsilon * pole_factor * q.value.exp(),
        quad_points: q.points,
        warnings,
        poles,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SzegoReport {
    pub lhs: f64,
    pub poles: Vec<Pole>,
    pub epsilon: f64,
    pub log_integral: f64,
    pub rhs: f64,
    pub rel_error: f64,
    pub quad_points: usize,
    pub warnings: Vec<String>,
    pub classical_start: usize,
    pub pole_factor: f64,
}

pub fn szego_verify(
    seq: &VerblunskySequence,
    quad: QuadOptions,
    guard: f64,
) -> Result<SzegoReport, AnalysisError> {
    let lhs = szego_lhs(seq);
    let r = szego_rhs(seq, quad, guard)?;
    let rel_error = (lhs - r.rhs).abs() / lhs.abs().max(r.rhs.abs()).max(1e-300);
    Ok(SzegoReport {
        lhs,
        poles: r.poles.poles,
        epsilon: r.epsilon,
        log_integral: r.log_integral,
        rhs: r.rhs,
        rel_error,
        quad_points: r.quad_points,
        warnings: r.warnings,
        classical_start: seq.classical_start(),
        pole_factor: r.pole_factor,
    })
}

/// `(1/2pi) int log(1 - |f_n|^2)` for the classical tail from index `n`.
pub fn boyd_integral(seq: &VerblunskySequence, n: usize, quad: QuadOptions) -> Result<f64, AnalysisError> {
    let f = tail_schur(seq, n)?;
    let q = circle_quadrature(
        |theta| {
            let w = f.eval_raw(Complex::from_polar(1.0, theta));
            (1.0 - w.norm_sqr()).ln()
        },
        quad.tol,
        quad.max_points,
    )?;
    if !q.converged {
        return Err(AnalysisError::NoConvergence { points: q.points, change: q.last_change });
    }
    Ok(q.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub phi_predicted: usize,
    pub phi_actual: usize,
    pub phi_star_predicted: usize,
    pub phi_star_actual: usize,
}

impl TraceRow {
    pub fn matches(&self) -> bool {
        self.phi_predicted == self.phi_actual && self.phi_star_predicted == self.phi_star_actual
    }
}

/// Zeros of `Phi_k` and `Phi_k^*` in the disk for `k = 0..=n_max`, next to
/// the counts predicted step by step: a classical step adds one zero, a
/// step with `|alpha| > 1` takes the count of `Phi_k^*`, which is `k`
/// minus the count of `Phi_k`.
pub fn zero_count_trace(
    seq: &VerblunskySequence,
    n_max: usize,
    guard: f64,
) -> Result<Vec<TraceRow>, AnalysisError> {
    let family = seq.szego_family(n_max);
    let mut rows = Vec::with_capacity(n_max + 1);
    let mut predicted = 0usize;
    for (k, pair) in family.iter().enumerate() {
        if k > 0 {
            let prev = predicted;
            predicted = if seq.alpha(k - 1).norm() < 1.0 { prev + 1 } else { (k - 1) - prev };
        }
        let phi_actual = roots_in_disk(&pair.poly, guard)?.len();
        let phi_star_actual = roots_in_disk(&pair.reversed, guard)?.len();
        rows.push(TraceRow {
            k,
            phi_predicted: predicted,
            phi_actual,
            phi_star_predicted: k - predicted,
            phi_star_actual,
        });
    }
    Ok(rows)
}

/// Zero counts of `Phi_m^*` in the disk for each `m` in the range.
pub fn phi_star_zero_counts(
    seq: &VerblunskySequence,
    range: std::ops::RangeInclusive<usize>,
    guard: f64,
) -> Result<Vec<usize>, AnalysisError> {
    let family = seq.szego_family(*range.end());
    range
        .map(|m| Ok(roots_in_disk(&family[m].reversed, guard)?.len()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroEntry {
    pub re: f64,
    pub im: f64,
    /// Distance to the nearest pole of `F`, absent when `F` has none.
    pub pole_distance: Option<f64>,
    pub circle_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MigrationRow {
    pub n: usize,
    pub zeros: Vec<ZeroEntry>,
    /// Zeros in `|z| <= compact_radius` farther than `pole_radius` from every pole.
    pub stray_in_compact: usize,
    /// For each pole, the zeros within `pole_radius` of it.
    pub near_pole: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MigrationTable {
    pub poles: Vec<Pole>,
    pub compact_radius: f64,
    pub pole_radius: f64,
    pub rows: Vec<MigrationRow>,
}

impl MigrationTable {
    /// The last row has one zero near each simple pole and no stray zeros in
    /// the compact disk.
    pub fn settled(&self) -> bool {
        self.rows.last().is_none_or(|row| {
            row.stray_in_compact == 0
                && row
                    .near_pole
                    .iter()
                    .zip(&self.poles)
                    .all(|(&k, p)| k == p.multiplicity)
        })
    }

    /// Zeros in the compact disk never exceed the pole count plus one.
    pub fn within_count_bound(&self) -> bool {
        let m: usize = self.poles.iter().map(|p| p.multiplicity).sum();
        self.rows.iter().all(|row| {
            row.zeros
                .iter()
                .filter(|z| Complex::new(z.re, z.im).norm() <= self.compact_radius)
                .count()
                <= m + 1
        })
    }
}

pub const MIGRATION_COMPACT_RADIUS: f64 = 0.9;
pub const MIGRATION_POLE_RADIUS: f64 = 0.05;

/// Zeros of `Phi_n^*` in the disk for each `n` in the range, annotated with
/// their distances to the poles of `F` and to the circle.
pub fn zero_migration(
    seq: &VerblunskySequence,
    range: std::ops::RangeInclusive<usize>,
    guard: f64,
) -> Result<MigrationTable, AnalysisError> {
    let poles = pole_set(seq, guard)?.poles;
    let family = seq.szego_family(*range.end());
    let mut rows = Vec::new();
    for n in range {
        let zeros_in = roots_in_disk(&family[n].reversed, guard)?;
        let mut near_pole = vec![0usize; poles.len()];
        let mut stray_in_compact = 0;
        let zeros = zeros_in
            .iter()
            .map(|&z| {
                let nearest = poles
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i, (p.value() - z).norm()))
                    .min_by(|a, b| a.1.total_cmp(&b.1));
                match nearest {
                    Some((i, d)) if d <= MIGRATION_POLE_RADIUS => near_pole[i] += 1,
                    _ if z.norm() <= MIGRATION_COMPACT_RADIUS => stray_in_compact += 1,
                    _ => {}
                }
                ZeroEntry {
                    re: z.re,
                    im: z.im,
                    pole_distance: nearest.map(|(_, d)| d),
                    circle_distance: 1.0 - z.norm(),
                }
            })
            .collect();
        rows.push(MigrationRow { n, zeros, stray_in_compact, near_pole });
    }
    Ok(MigrationTable {
        poles,
        compact_radius: MIGRATION_COMPACT_RADIUS,
        pole_radius: MIGRATION_POLE_RADIUS,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub m: usize,
    pub order: usize,
    /// `c_1 .. c_J`.
    pub moments: Vec<ComplexValue>,
    /// `max_{J/2 <= j <= J} |c_j|^{1/j}`.
    pub growth_rate: f64,
    /// `(max_{hi} |c_j| / max_{lo} |c_j|)^{1/w}` over the adjacent windows
    /// `lo = [J-2w+1, J-w]`, `hi = [J-w+1, J]`, `w = max(1, J/4)`; free of
    /// the constant `C` in `|c_j| ~ C r^j`. Absent below two moments or when
    /// only the lower window vanishes.
    pub ratio_rate: Option<f64>,
    /// `1 / min |lambda_j|` over the poles of `F`, or 1 without poles.
    pub predicted_rate: f64,
}

impl MomentReport {
    pub fn moment(&self, j: usize) -> Complex {
        self.moments[j - 1].into()
    }
}

/// Half the Maclaurin coefficients of `Psi_m^* / Phi_m^*` with two growth
/// estimates: the root test and a window ratio free of the constant factor
/// in `|c_j| ~ C r^j`.
pub fn moments(
    seq: &VerblunskySequence,
    m: usize,
    order: usize,
    guard: f64,
) -> Result<MomentReport, AnalysisError> {
    let phi = seq.szego_polys(m);
    let psi = seq.second_kind_polys(m);
    let g = series_div(&psi.reversed, &phi.reversed, order)?;
    let c: Vec<Complex> = g.iter().skip(1).map(|v| v * 0.5).collect();
    let lo = order.div_ceil(2).max(1);
    let growth_rate = (lo..=order)
        .map(|j| c[j - 1].norm().powf(1.0 / j as f64))
        .fold(0.0, f64::max);
    let ratio_rate = window_ratio_rate(&c);
    let poles = pole_set(seq, guard)?;
    let predicted_rate = poles.min_modulus().map_or(1.0, |r| 1.0 / r);
    Ok(MomentReport {
        m,
        order,
        moments: c.iter().map(|&v| v.into()).collect(),
        growth_rate,
        ratio_rate,
        predicted_rate,
    })
}

fn window_ratio_rate(c: &[Complex]) -> Option<f64> {
    let order = c.len();
    if order < 2 {
        return None;
    }
    let w = (order / 4).max(1);
    let peak = |from: usize, to: usize| c[from - 1..to].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let hi = peak(order - w + 1, order);
    let lo = peak(order - 2 * w + 1, order - w);
    match (lo > 0.0, hi > 0.0) {
        (_, false) => Some(0.0),
        (false, true) => None,
        (true, true) => Some((hi / lo).powf(1.0 / w as f64)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSplit {
    /// Max over the grid of `|log|Re F| - (log|omega| + log(1-|f_n|^2) - log|R_n|^2)|`.
    pub pointwise_residual: f64,
    /// `(1/2pi) int log |Phi_n^* - z Phi_n f_n|^2`.
    pub third_integral: f64,
    pub pole_factor: f64,
    /// `|exp(third_integral) - pole_factor| / pole_factor`.
    pub jensen_residual: f64,
}

impl LogSplit {
    pub fn max_residual(&self) -> f64 {
        self.pointwise_residual.max(self.jensen_residual)
    }
}

/// Checks the three-term split of `log |Re F|` pointwise on `grid` points,
/// with `Re F` from the cleared rational form, and that the exponential of the
/// denominator integral equals `prod |lambda_j|^{-2}`.
pub fn log_split_check(
    seq: &VerblunskySequence,
    n: usize,
    quad: QuadOptions,
    grid: usize,
    guard: f64,
) -> Result<LogSplit, AnalysisError> {
    let k = Khrushchev::new(seq, n)?;
    let model = CaratheodoryModel::new(seq)?;
    let mut pointwise_residual: f64 = 0.0;
    for j in 0..grid {
        let theta = TAU * j as f64 / grid as f64;
        let direct = model.eval_caratheodory(Complex::from_polar(1.0, theta))?.re;
        let parts = k.parts(theta)?;
        pointwise_residual = pointwise_residual.max((direct.abs().ln() - parts.log_abs()).abs());
    }
    let q = circle_quadrature(
        |theta| k.parts(theta).map(|p| p.denominator.ln()).unwrap_or(f64::NAN),
        quad.tol,
        quad.max_points,
    )?;
    if !q.converged {
        return Err(AnalysisError::NoConvergence { points: q.points, change: q.last_change });
    }
    let pole_factor = pole_set(seq, guard)?.inverse_square_product();
    Ok(LogSplit {
        pointwise_residual,
        third_integral: q.value,
        pole_factor,
        jensen_residual: (q.value.exp() - pole_factor).abs() / pole_factor,
    })
}

/// Max over `grid` circle points of `|Khrushchev - Re F| / max(1, |Re F|)`,
/// with `Re F` from the cleared rational form.
pub fn khrushchev_deviation(
    seq: &VerblunskySequence,
    n: usize,
    grid: usize,
) -> Result<f64, AnalysisError> {
    let k = Khrushchev::new(seq, n)?;
    let model = CaratheodoryModel::new(seq)?;
    let mut worst: f64 = 0.0;
    for j in 0..grid {
        let theta = TAU * j as f64 / grid as f64;
        let direct = model.eval_caratheodory(Complex::from_polar(1.0, theta))?.re;
        let formula = k.re_f(theta)?;
        worst = worst.max((formula - direct).abs() / direct.abs().max(1.0));
    }
    Ok(worst)
}

/// `min over the grid of epsilon_{N-1} Re F(e^{i theta})`.
pub fn min_signed_real_part(seq: &VerblunskySequence, grid: usize) -> Result<f64, AnalysisError> {
    let k = Khrushchev::new(seq, seq.classical_start())?;
    let eps = k.omega().signum();
    let model = CaratheodoryModel::new(seq)?;
    let mut lo = f64::INFINITY;
    for j in 0..grid {
        let theta = TAU * j as f64 / grid as f64;
        let v = model.eval_caratheodory(Complex::from_polar(1.0, theta))?.re;
        lo = lo.min(eps * v);
    }
    Ok(lo)
}

/// Default disk guard, re-exported for callers that only use this module.
pub const DISK_GUARD: f64 = DEFAULT_DISK_GUARD;

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn seq(a: &[f64]) -> VerblunskySequence {
        VerblunskySequence::from_real(a).unwrap()
    }

    fn quad() -> QuadOptions {
        QuadOptions::default()
    }

    #[test]
    fn quadrature_examples() {
        let q = circle_quadrature(|_| 1.0, 1e-12, 1 << 12).unwrap();
        assert!(q.converged && (q.value - 1.0).abs() < 1e-15);
        let q = circle_quadrature(f64::cos, 1e-12, 1 << 12).unwrap();
        assert!(q.value.abs() < 1e-15);
        // (1/2pi) int log|1 - 2e^{it}|^2 = 2 log 2
        let q = circle_quadrature(
            |t| (Complex::new(1.0, 0.0) - Complex::from_polar(2.0, t)).norm_sqr().ln(),
            1e-13,
            1 << 16,
        )
        .unwrap();
        assert!((q.value - 2.0 * 2f64.ln()).abs() < 1e-12, "{}", q.value);
    }

    #[test]
    fn quadrature_shifts_off_singular_sample() {
        // log|1 - e^{it}|^2 is singular at 0 but integrates to 0.
        let q = circle_quadrature(
            |t| (Complex::new(1.0, 0.0) - Complex::from_polar(1.0, t)).norm_sqr().ln(),
            1e-3,
            1 << 12,
        )
        .unwrap();
        assert!(q.value.abs() < 0.05, "{q:?}");
        let always_bad = circle_quadrature(|_| f64::NAN, 1e-3, 1 << 10);
        assert!(matches!(always_bad, Err(AnalysisError::Singular { .. })));
    }

    #[test]
    fn quadrature_flags_non_convergence() {
        let q = circle_quadrature(|t| (50.0 * t.sin()).tanh().abs().sqrt(), 1e-15, 256).unwrap();
        assert!(!q.converged && q.refined);
        assert!(q.points <= 512);
    }

    #[test]
    fn refinement_resolves_root_near_circle() {
        // Root 1e-6 outside the circle: (1/2pi) int log|e^{it} - r|^2 = 2 log r.
        let r = Complex::new(1.0 + 1e-6, 0.0);
        let g = |t: f64| (Complex::from_polar(1.0, t) - r).norm_sqr().ln();
        let q = circle_quadrature(g, 1e-11, 1 << 14).unwrap();
        assert!(q.refined && q.converged, "{q:?}");
        assert!((q.value - 2.0 * r.re.ln()).abs() < 1e-10, "{}", q.value);
    }

    #[test]
    fn kronrod_panel_is_exact_on_low_degree() {
        let (v, e) = kronrod_panel(&|t: f64| t.powi(6), 0.0, 2.0).unwrap();
        assert!((v * TAU - 2f64.powi(7) / 7.0).abs() < 1e-12 && e < 1e-12);
    }

    #[test]
    fn khrushchev_examples() {
        assert!((re_f_khrushchev(&seq(&[2.0]), 1, PI / 2.0).unwrap() + 0.6).abs() < 1e-15);
        assert!((re_f_khrushchev(&seq(&[0.5]), 1, 0.0).unwrap() - 3.0).abs() < 1e-15);
        assert_eq!(re_f_khrushchev(&seq(&[]), 0, 1.234).unwrap(), 1.0);
        assert_eq!(
            re_f_khrushchev(&seq(&[2.0]), 0, 0.0).unwrap_err(),
            AnalysisError::BelowClassicalStart { n: 0, start: 1 }
        );
        // n = 0 for the classical [0.5] is the tail-only form.
        assert!((re_f_khrushchev(&seq(&[0.5]), 0, 0.0).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn pole_set_examples() {
        let p = pole_set(&seq(&[2.0]), DISK_GUARD).unwrap();
        assert_eq!(p.count(), 1);
        assert!((p.poles[0].value() - 0.5).norm() < 1e-14);
        assert_eq!(p.phi_star_zeros, 1);
        assert_eq!(pole_set(&seq(&[0.7, 0.2]), DISK_GUARD).unwrap().count(), 0);
        let p = pole_set(&seq(&[2.0, 0.5]), DISK_GUARD).unwrap();
        assert_eq!(p.count(), 1);
        assert!((p.poles[0].value() - (3f64.sqrt() - 1.0)).norm() < 1e-14);
    }

    #[test]
    fn pole_clustering_merges_multiplicity() {
        let roots = [Complex::new(0.3, 0.0), Complex::new(0.3 + 1e-9, 0.0), Complex::new(-0.2, 0.1)];
        let poles = cluster(&roots, POLE_CLUSTER_TOL);
        assert_eq!(poles.len(), 2);
        assert_eq!(poles[0].multiplicity, 2);
    }

    #[test]
    fn lhs_examples() {
        assert!((szego_lhs(&seq(&[2.0, 0.5])) + 2.25).abs() < 1e-15);
        assert_eq!(szego_lhs(&seq(&[0.5])), 0.75);
        assert_eq!(szego_lhs(&seq(&[])), 1.0);
    }

    #[test]
    fn rhs_examples() {
        let r = szego_rhs(&seq(&[2.0]), quad(), DISK_GUARD).unwrap();
        assert_eq!(r.epsilon, -1.0);
        assert!((r.pole_factor - 4.0).abs() < 1e-13);
        assert!((r.log_integral - 0.75f64.ln()).abs() < 1e-11);
        assert!((r.rhs + 3.0).abs() < 1e-10);

        let r = szego_rhs(&seq(&[0.5]), quad(), DISK_GUARD).unwrap();
        assert!(r.poles.poles.is_empty());
        assert!((r.log_integral - 0.75f64.ln()).abs() < 1e-11);
        assert!((r.rhs - 0.75).abs() < 1e-10);

        let r = szego_rhs(&seq(&[]), quad(), DISK_GUARD).unwrap();
        assert_eq!(r.rhs, 1.0);
    }

    #[test]
    fn verify_examples() {
        let r = szego_verify(&seq(&[2.0, 0.5]), quad(), DISK_GUARD).unwrap();
        assert!(r.rel_error < 1e-8, "{r:?}");
        assert!((r.lhs + 2.25).abs() < 1e-15);

        let s = VerblunskySequence::new(vec![Complex::new(0.3, 0.0), Complex::new(0.0, -0.4)]).unwrap();
        let r = szego_verify(&s, quad(), DISK_GUARD).unwrap();
        assert!(r.rel_error < 1e-10);
        assert!((r.lhs - 0.91 * 0.84).abs() < 1e-15);
        assert!(r.poles.is_empty());

        let r = szego_verify(&seq(&[2.0]), quad(), DISK_GUARD).unwrap();
        assert!((r.lhs + 3.0).abs() < 1e-15 && (r.rhs + 3.0).abs() < 1e-10);
    }

    #[test]
    fn boyd_examples() {
        assert!((boyd_integral(&seq(&[0.5]), 0, quad()).unwrap() - 0.75f64.ln()).abs() < 1e-12);
        assert_eq!(boyd_integral(&seq(&[]), 0, quad()).unwrap(), 0.0);
        let v = boyd_integral(&seq(&[0.5, 0.3]), 0, quad()).unwrap();
        assert!((v - (0.75f64 * 0.91).ln()).abs() < 1e-10);
        assert!(boyd_integral(&seq(&[2.0, 0.5]), 0, quad()).is_err());
    }

    #[test]
    fn trace_examples() {
        let t = zero_count_trace(&seq(&[2.0, 0.5]), 2, DISK_GUARD).unwrap();
        assert_eq!((t[1].phi_predicted, t[1].phi_actual), (0, 0));
        assert_eq!((t[2].phi_predicted, t[2].phi_actual), (1, 1));
        let t = zero_count_trace(&seq(&[0.5, 0.5, 0.5]), 3, DISK_GUARD).unwrap();
        for row in &t {
            assert_eq!(row.phi_actual, row.k);
            assert!(row.matches());
        }
        let t = zero_count_trace(&seq(&[2.0]), 1, DISK_GUARD).unwrap();
        assert_eq!(t[1].phi_star_actual, 1);
        assert!(t[1].matches());
    }

    #[test]
    fn migration_examples() {
        let t = zero_migration(&seq(&[2.0]), 1..=5, DISK_GUARD).unwrap();
        for row in &t.rows {
            assert_eq!(row.zeros.len(), 1);
            assert!(row.zeros[0].pole_distance.unwrap() < 1e-14);
        }
        assert!(t.settled() && t.within_count_bound());

        let t = zero_migration(&seq(&[2.0, 0.5]), 2..=6, DISK_GUARD).unwrap();
        for row in &t.rows {
            assert_eq!(row.zeros.len(), 1);
            assert!((Complex::new(row.zeros[0].re, row.zeros[0].im) - (3f64.sqrt() - 1.0)).norm() < 1e-12);
        }
        assert!(t.settled());

        let t = zero_migration(&seq(&[0.5, 0.3]), 0..=6, DISK_GUARD).unwrap();
        assert!(t.rows.iter().all(|r| r.zeros.is_empty()));
    }

    #[test]
    fn moment_examples() {
        let r = moments(&seq(&[2.0]), 1, 5, DISK_GUARD).unwrap();
        let c: Vec<f64> = (1..=5).map(|j| r.moment(j).re).collect();
        assert_eq!(c, vec![2.0, 4.0, 8.0, 16.0, 32.0]);
        assert!((r.growth_rate - 2.0).abs() < 1e-12);
        assert!((r.ratio_rate.unwrap() - 2.0).abs() < 1e-12);
        assert!((r.predicted_rate - 2.0).abs() < 1e-12);

        let r = moments(&seq(&[0.5]), 1, 4, DISK_GUARD).unwrap();
        for j in 1..=4 {
            assert!((r.moment(j).re - 0.5f64.powi(j as i32)).abs() < 1e-15);
        }
        assert!(r.growth_rate < 1.0);

        let r = moments(&seq(&[]), 0, 3, DISK_GUARD).unwrap();
        assert!(r.moments.iter().all(|c| c.re == 0.0 && c.im == 0.0));
    }

    #[test]
    fn window_ratio_removes_constant_factor() {
        let c: Vec<Complex> = (1..=40).map(|j| Complex::new(7.0 * 1.6f64.powi(j), 0.0)).collect();
        assert!((window_ratio_rate(&c).unwrap() - 1.6).abs() < 1e-12);
        let root = c[20..].iter().enumerate().map(|(i, v)| v.norm().powf(1.0 / (i + 21) as f64)).fold(0.0, f64::max);
        assert!(root > 1.7);
        assert_eq!(window_ratio_rate(&[Complex::default(); 8]), Some(0.0));
        assert_eq!(window_ratio_rate(&[Complex::new(1.0, 0.0)]), None);
    }

    #[test]
    fn moments_stable_past_stored_length() {
        let s = seq(&[2.0, -0.4, 1.6]);
        let a = moments(&s, 3, 12, DISK_GUARD).unwrap();
        let b = moments(&s, 7, 12, DISK_GUARD).unwrap();
        assert_eq!(a.moments, b.moments);
    }

    #[test]
    fn log_split_examples() {
        let r = log_split_check(&seq(&[2.0]), 1, quad(), 256, DISK_GUARD).unwrap();
        assert!((r.third_integral.exp() - 4.0).abs() < 1e-9);
        assert!(r.pointwise_residual < 1e-12);
        let r = log_split_check(&seq(&[0.5]), 1, quad(), 256, DISK_GUARD).unwrap();
        assert!((r.third_integral.exp() - 1.0).abs() < 1e-9);
        let r = log_split_check(&seq(&[2.0, 0.5]), 2, quad(), 256, DISK_GUARD).unwrap();
        let want = (3f64.sqrt() - 1.0).powi(-2);
        assert!((r.third_integral.exp() - want).abs() < 1e-9 * want);
        assert!((want - 1.8660).abs() < 1e-4);
    }

    #[test]
    fn sign_theorem_examples() {
        assert!(min_signed_real_part(&seq(&[2.0]), 64).unwrap() > 0.0);
        assert!(min_signed_real_part(&seq(&[2.0, 0.5, -1.3]), 256).unwrap() > 0.0);
    }
}
