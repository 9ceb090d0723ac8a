//! Case generators and pointwise oracles shared by the integration targets.
#![allow(dead_code)]

use std::f64::consts::TAU;

use num_complex::Complex64 as Complex;
use opuc::verblunsky::VerblunskySequence;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn polar(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Complex {
    Complex::from_polar(rng.gen_range(lo..hi), rng.gen_range(0.0..TAU))
}

/// `|alpha| in (0, 0.95)` or `(1.05, 3)` with equal odds.
pub fn head_alpha(rng: &mut ChaCha8Rng) -> Complex {
    if rng.gen_bool(0.5) {
        polar(rng, 1.05, 3.0)
    } else {
        polar(rng, 0.0, 0.95)
    }
}

/// Length `0..=max_len`, `|alpha| <= r`.
pub fn classical(rng: &mut ChaCha8Rng, max_len: usize, r: f64) -> VerblunskySequence {
    let n = rng.gen_range(0..=max_len);
    VerblunskySequence::new((0..n).map(|_| polar(rng, 0.0, r)).collect()).unwrap()
}

/// Head of length `1..=max_head` holding at least one `|alpha| > 1.05`,
/// followed by a classical tail of length `0..=max_tail` with `|alpha| < 0.8`.
pub fn nonclassical(rng: &mut ChaCha8Rng, max_head: usize, max_tail: usize) -> VerblunskySequence {
    let h = rng.gen_range(1..=max_head);
    let mut a: Vec<Complex> = (0..h).map(|_| head_alpha(rng)).collect();
    if a.iter().all(|x| x.norm() < 1.0) {
        let i = rng.gen_range(0..h);
        a[i] = polar(rng, 1.05, 3.0);
    }
    let t = rng.gen_range(0..=max_tail);
    a.extend((0..t).map(|_| polar(rng, 0.0, 0.8)));
    VerblunskySequence::new(a).unwrap()
}

/// Head of length `0..=max_head` from [`head_alpha`], tail `0..=max_tail`
/// with `|alpha| < 0.8`.
pub fn admissible(rng: &mut ChaCha8Rng, max_head: usize, max_tail: usize) -> VerblunskySequence {
    let h = rng.gen_range(0..=max_head);
    let t = rng.gen_range(0..=max_tail);
    let mut a: Vec<Complex> = (0..h).map(|_| head_alpha(rng)).collect();
    a.extend((0..t).map(|_| polar(rng, 0.0, 0.8)));
    VerblunskySequence::new(a).unwrap()
}

/// `F(z) = Psi_m^*(z) / Phi_m^*(z)` at `m` = stored length, by running the
/// scalar recurrences at the point `z`.
pub fn oracle_f(alphas: &[Complex], z: Complex) -> Complex {
    let (mut phi, mut phi_s) = (Complex::new(1.0, 0.0), Complex::new(1.0, 0.0));
    let (mut psi, mut psi_s) = (Complex::new(1.0, 0.0), Complex::new(1.0, 0.0));
    for &a in alphas {
        let next = z * phi - a.conj() * phi_s;
        phi_s -= a * z * phi;
        phi = next;
        let next = z * psi + a.conj() * psi_s;
        psi_s += a * z * psi;
        psi = next;
    }
    psi_s / phi_s
}

/// `prod_{j < count} (1 - |alpha_j|^2)`.
pub fn oracle_omega(alphas: &[Complex], count: usize) -> f64 {
    alphas[..count].iter().map(|a| 1.0 - a.norm_sqr()).product()
}

pub fn theta(k: usize, m: usize) -> f64 {
    TAU * k as f64 / m as f64
}
