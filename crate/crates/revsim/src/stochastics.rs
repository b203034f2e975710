//! Beta-distribution kernel and seeded random streams.
//!
//! Every probability the simulation evaluates reduces to three primitives:
//! the beta density, the regularized incomplete beta function (the CDF), and
//! the wraparound window density: the probability mass a beta distribution
//! places on a width-`2h` window around a point, with the window wrapping
//! circularly at 0 and 1 so extreme topics are not penalized.
//!
//! All randomness flows through [`RngStream`], a ChaCha8 stream with
//! stateless SplitMix64 seed derivation, so a run is reproducible bit-exact
//! from one master seed.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

/// Errors from kernel argument validation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StochasticsError {
    #[error("beta shape parameters must be positive and finite, got alpha={alpha}, beta={beta}")]
    InvalidShape { alpha: f64, beta: f64 },
    #[error("argument {x} outside [0, 1]")]
    OutOfDomain { x: f64 },
    #[error("window halfwidth {halfwidth} outside (0, 0.5)")]
    InvalidHalfwidth { halfwidth: f64 },
}

/// Shape parameters of a beta distribution on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    alpha: f64,
    beta: f64,
}

impl BetaParams {
    /// Both shapes must be positive and finite.
    pub fn new(alpha: f64, beta: f64) -> Result<Self, StochasticsError> {
        if alpha <= 0.0 || beta <= 0.0 || !alpha.is_finite() || !beta.is_finite()
            || alpha.is_nan() || beta.is_nan()
        {
            return Err(StochasticsError::InvalidShape { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// alpha / (alpha + beta), always in (0, 1).
    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// Density at `x`. Diverging corners (e.g. alpha < 1 at x = 0) return
    /// `f64::INFINITY`.
    pub fn pdf(&self, x: f64) -> Result<f64, StochasticsError> {
        check_unit(x)?;
        if x == 0.0 {
            return Ok(if self.alpha < 1.0 {
                f64::INFINITY
            } else if self.alpha == 1.0 {
                self.beta
            } else {
                0.0
            });
        }
        if x == 1.0 {
            return Ok(if self.beta < 1.0 {
                f64::INFINITY
            } else if self.beta == 1.0 {
                self.alpha
            } else {
                0.0
            });
        }
        let ln_pdf = (self.alpha - 1.0) * x.ln() + (self.beta - 1.0) * (1.0 - x).ln()
            - ln_beta(self.alpha, self.beta);
        Ok(ln_pdf.exp())
    }

    /// Regularized incomplete beta I_x(alpha, beta).
    pub fn cdf(&self, x: f64) -> Result<f64, StochasticsError> {
        check_unit(x)?;
        Ok(reg_inc_beta(self.alpha, self.beta, x))
    }

    /// One draw from Beta(alpha, beta).
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        let dist = rand_distr::Beta::new(self.alpha, self.beta)
            .expect("shape parameters validated at construction");
        dist.sample(rng)
    }
}

fn check_unit(x: f64) -> Result<(), StochasticsError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(StochasticsError::OutOfDomain { x });
    }
    Ok(())
}

/// Smallest window density ever reported. The true mass is strictly
/// positive, but for far-tail windows it underflows past f64; the floor
/// keeps the (0, 1] contract and keeps the derived error half-width
/// (1 - z)/2 strictly below 1/2.
pub const WINDOW_DENSITY_FLOOR: f64 = 1e-12;

/// Probability mass of `p` on a window of total width `2 * halfwidth`
/// centered at `x`, wrapping circularly at the boundaries:
///
/// * interior (`h <= x <= 1-h`): integral over `[x-h, x+h]`;
/// * `x > 1-h`: integral over `[x-h, 1] ∪ [0, x+h-1]`;
/// * `x < h`: integral over `[0, x+h] ∪ [x+1-h, 1]`.
///
/// The window always has measure exactly `2h`, so the uniform distribution
/// scores `2h` at every `x` (0.2 at the default halfwidth). Results are
/// clamped to `[WINDOW_DENSITY_FLOOR, 1]`.
pub fn window_density(p: &BetaParams, x: f64, halfwidth: f64) -> Result<f64, StochasticsError> {
    check_unit(x)?;
    if !(halfwidth > 0.0 && halfwidth < 0.5) {
        return Err(StochasticsError::InvalidHalfwidth { halfwidth });
    }
    let z = if x < halfwidth {
        p.cdf(x + halfwidth)? + (1.0 - p.cdf(x + 1.0 - halfwidth)?)
    } else if x > 1.0 - halfwidth {
        (1.0 - p.cdf(x - halfwidth)?) + p.cdf(x + halfwidth - 1.0)?
    } else {
        p.cdf(x + halfwidth)? - p.cdf(x - halfwidth)?
    };
    Ok(z.clamp(WINDOW_DENSITY_FLOOR, 1.0))
}

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Lanczos approximation (g = 7, 9 terms), ~1e-13 relative accuracy.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection; only hit for x in (0, 0.5).
        let pi = std::f64::consts::PI;
        pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + 7.5;
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Regularized incomplete beta via Lentz's continued fraction.
fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    // Closed forms; keeps the uniform case exact.
    if a == 1.0 && b == 1.0 {
        return x;
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    let front = ln_front.exp();
    let value = if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cont_frac(a, b, x) / a
    } else {
        1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b
    };
    value.clamp(0.0, 1.0)
}

fn beta_cont_frac(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 3e-16;
    const FPMIN: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m_f = m as f64;
        let m2 = 2.0 * m_f;
        let numer = m_f * (b - m_f) * x / ((qam + m2) * (a + m2));
        d = 1.0 + numer * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + numer / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let numer = -(a + m_f) * (qab + m_f) * x / ((a + m2) * (qap + m2));
        d = 1.0 + numer * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + numer / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stateless sub-seed derivation: the `index`-th output of a SplitMix64
/// generator seeded with `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// A seeded ChaCha8 stream. Single-owner: one stream must never be drawn
/// from by two concurrent activities.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream number `index` under `master`.
    pub fn substream(master: u64, index: u64) -> Self {
        Self::from_seed(derive_seed(master, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw in [0, 1).
    pub fn u01(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform draw in [lo, hi].
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo <= hi);
        lo + (hi - lo) * self.u01()
    }

    /// Bernoulli event: draws u and reports u <= p. Always consumes exactly
    /// one draw so the stream stays aligned whatever `p` is; p = 0 is never
    /// a success, p = 1 always is.
    pub fn chance(&mut self, p: f64) -> bool {
        let u = self.u01();
        p > 0.0 && u <= p
    }

    /// `amount` distinct indices from `0..length`, order as sampled.
    pub fn sample_indices(&mut self, length: usize, amount: usize) -> Vec<usize> {
        rand::seq::index::sample(&mut self.rng, length, amount).into_vec()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp(a: f64, b: f64) -> BetaParams {
        BetaParams::new(a, b).unwrap()
    }

    #[test]
    fn rejects_nonpositive_shapes() {
        assert!(BetaParams::new(0.0, 1.0).is_err());
        assert!(BetaParams::new(1.0, -2.0).is_err());
        assert!(BetaParams::new(f64::NAN, 1.0).is_err());
        assert!(BetaParams::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn pdf_uniform_is_one() {
        let got = bp(1.0, 1.0).pdf(0.37).unwrap();
        assert!((got - 1.0).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn pdf_matches_analytic_quadratic() {
        // Beta(2,2): 6 x (1-x); at 0.5 -> 1.5.
        let got = bp(2.0, 2.0).pdf(0.5).unwrap();
        assert!((got - 1.5).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn pdf_linear_vanishes_at_zero() {
        assert_eq!(bp(2.0, 1.0).pdf(0.0).unwrap(), 0.0);
    }

    #[test]
    fn pdf_rejects_out_of_domain() {
        assert!(bp(2.0, 2.0).pdf(-0.1).is_err());
        assert!(bp(2.0, 2.0).pdf(1.5).is_err());
    }

    #[test]
    fn cdf_uniform_is_identity() {
        assert_eq!(bp(1.0, 1.0).cdf(0.3).unwrap(), 0.3);
        assert_eq!(bp(1.0, 1.0).cdf(0.0).unwrap(), 0.0);
        assert_eq!(bp(1.0, 1.0).cdf(1.0).unwrap(), 1.0);
    }

    #[test]
    fn cdf_matches_analytic_square() {
        // Beta(2,1): CDF x^2; at 0.5 -> 0.25.
        let got = bp(2.0, 1.0).cdf(0.5).unwrap();
        assert!((got - 0.25).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn cdf_symmetric_at_half() {
        let got = bp(2.0, 2.0).cdf(0.5).unwrap();
        assert!((got - 0.5).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn cdf_analytic_cubic_family() {
        // Beta(2,2): CDF 3x^2 - 2x^3.
        for &x in &[0.1, 0.25, 0.4, 0.6, 0.9] {
            let got = bp(2.0, 2.0).cdf(x).unwrap();
            let want = 3.0 * x * x - 2.0 * x * x * x;
            assert!((got - want).abs() < 1e-12, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn cdf_rejects_out_of_domain() {
        assert!(bp(2.0, 2.0).cdf(1.0001).is_err());
    }

    #[test]
    fn sample_uniform_mean_within_three_sigma() {
        let p = bp(1.0, 1.0);
        let mut rng = RngStream::from_seed(7);
        let n = 10_000;
        let mean = (0..n).map(|_| p.sample(&mut rng)).sum::<f64>() / n as f64;
        // var of U[0,1] = 1/12; sigma of the mean = sqrt(1/12/n)
        let sigma = (1.0 / 12.0 / n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn sample_skewed_mean_within_three_sigma() {
        let p = bp(50.0, 5.0);
        let mut rng = RngStream::from_seed(11);
        let n = 10_000;
        let mean = (0..n).map(|_| p.sample(&mut rng)).sum::<f64>() / n as f64;
        let want = 50.0 / 55.0;
        let var = 50.0 * 5.0 / (55.0_f64.powi(2) * 56.0);
        let sigma = (var / n as f64).sqrt();
        assert!((mean - want).abs() < 3.0 * sigma, "mean {mean} want {want}");
    }

    #[test]
    fn same_seed_same_sequence() {
        let p = bp(3.0, 4.0);
        let mut a = RngStream::from_seed(99);
        let mut b = RngStream::from_seed(99);
        for _ in 0..100 {
            assert_eq!(p.sample(&mut a).to_bits(), p.sample(&mut b).to_bits());
        }
    }

    #[test]
    fn window_uniform_is_point_two_everywhere() {
        let p = bp(1.0, 1.0);
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let z = window_density(&p, x, 0.1).unwrap();
            assert!((z - 0.2).abs() < 1e-12, "x={x}: z={z}");
        }
    }

    #[test]
    fn window_interior_matches_analytic() {
        // Beta(2,2) over [0.4, 0.6]: (3x^2-2x^3) delta = 0.296.
        let z = window_density(&bp(2.0, 2.0), 0.5, 0.1).unwrap();
        assert!((z - 0.296).abs() < 1e-12, "z={z}");
    }

    #[test]
    fn window_wraps_at_high_end() {
        // Uniform at 0.95: [0.85,1] ∪ [0,0.05] = 0.2.
        let z = window_density(&bp(1.0, 1.0), 0.95, 0.1).unwrap();
        assert!((z - 0.2).abs() < 1e-12, "z={z}");
    }

    #[test]
    fn window_continuous_at_branch_points() {
        let p = bp(3.0, 5.0);
        for &x in &[0.1, 0.9] {
            let inner = window_density(&p, x, 0.1).unwrap();
            let below = window_density(&p, x - 1e-12, 0.1).unwrap();
            let above = window_density(&p, x + 1e-12, 0.1).unwrap();
            assert!((inner - below).abs() < 1e-9, "x={x}");
            assert!((inner - above).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn window_rejects_bad_arguments() {
        let p = bp(2.0, 2.0);
        assert!(window_density(&p, -0.01, 0.1).is_err());
        assert!(window_density(&p, 0.5, 0.0).is_err());
        assert!(window_density(&p, 0.5, 0.5).is_err());
    }

    #[test]
    fn derive_seed_is_stateless_and_spread() {
        assert_eq!(derive_seed(42, 0), derive_seed(42, 0));
        let seeds: std::collections::HashSet<u64> =
            (0..100).map(|i| derive_seed(42, i)).collect();
        assert_eq!(seeds.len(), 100);
    }

    #[test]
    fn chance_edge_probabilities() {
        let mut rng = RngStream::from_seed(1);
        for _ in 0..1000 {
            assert!(!rng.chance(0.0));
        }
        for _ in 0..1000 {
            assert!(rng.chance(1.0));
        }
    }

    #[test]
    fn sample_indices_distinct_and_deterministic() {
        let mut a = RngStream::from_seed(5);
        let mut b = RngStream::from_seed(5);
        let ia = a.sample_indices(20, 3);
        let ib = b.sample_indices(20, 3);
        assert_eq!(ia, ib);
        assert_eq!(ia.len(), 3);
        let set: std::collections::HashSet<usize> = ia.iter().copied().collect();
        assert_eq!(set.len(), 3);
        assert!(ia.iter().all(|&i| i < 20));
    }
}
