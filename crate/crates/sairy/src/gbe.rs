//! The tridiagonal Gaussian β-ensemble and its characteristic polynomial.
//!
//! The n×n matrix has independent entries
//!
//! ```text
//!   H[i][i]   = b_i / (2√(Nβ)),   b_i ~ N(0, 2),
//!   H[i+1][i] = a_i / (2√(Nβ)),   a_i ~ χ_{βi},
//! ```
//!
//! so its spectrum concentrates on [−1, 1] and the soft edge sits at ±1
//! with fluctuations of order N^{−2/3}. Characteristic polynomials of the
//! principal minors obey a three-term transfer recurrence whose expectation
//! is a rescaled Hermite polynomial; both recurrences overflow f64 long
//! before the dimensions of interest, so values are carried with an explicit
//! power-of-two exponent ([`Scaled`]).

use crate::eigen::SymTridiag;
use crate::rng::{sample_chi, sample_gaussian, CounterRng, Seed};
use crate::{domain_err, Result};

/// Number with an explicit binary exponent: `mantissa` × 2^`exp2`.
#[derive(Clone, Copy, Debug)]
pub struct Scaled {
    pub mantissa: f64,
    pub exp2: i64,
}

impl Scaled {
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.abs().ln() + self.exp2 as f64 * std::f64::consts::LN_2
    }

    pub fn signum(&self) -> f64 {
        self.mantissa.signum() * f64::from(self.mantissa != 0.0)
    }

    /// Collapse to f64; overflows to ±∞ and underflows to 0 as usual.
    pub fn to_f64(&self) -> f64 {
        self.mantissa * (self.exp2 as f64).exp2()
    }
}

// Renormalization threshold for the two-term recurrences: once the leading
// value passes 2^±512 both carried values shift together, keeping their
// ratio exact.
pub(crate) const RENORM_EXP: i64 = 512;
pub(crate) const RENORM_UP: f64 = 1.340780792994260e154; // 2^512
pub(crate) const RENORM_DOWN: f64 = 7.458340731200207e-155; // 2^-512

/// Run x_n = A_n x_{n−1} + B_n x_{n−2}, x_0 = 1, for n = 1..=len, returning
/// all values with per-index exponents.
fn two_term_scaled(
    len: usize,
    a: impl Fn(usize) -> f64,
    b: impl Fn(usize) -> f64,
) -> (Vec<f64>, Vec<i64>) {
    let mut values = Vec::with_capacity(len + 1);
    let mut exps = Vec::with_capacity(len + 1);
    values.push(1.0);
    exps.push(0);
    let mut prev2 = 1.0f64; // x_{n−2} at current common exponent
    let mut prev = a(1); // x_{n−1}
    let mut exp_common = 0i64;
    if len >= 1 {
        values.push(prev);
        exps.push(0);
    }
    for n in 2..=len {
        let mut next = a(n) * prev + b(n) * prev2;
        prev2 = prev;
        prev = next;
        let m = prev.abs().max(prev2.abs());
        if m > RENORM_UP {
            prev *= RENORM_DOWN;
            prev2 *= RENORM_DOWN;
            exp_common += RENORM_EXP;
        } else if m != 0.0 && m < RENORM_DOWN {
            prev *= RENORM_UP;
            prev2 *= RENORM_UP;
            exp_common -= RENORM_EXP;
        }
        next = prev;
        values.push(next);
        exps.push(exp_common);
    }
    (values, exps)
}

/// Draw the n×n tridiagonal ensemble matrix with scale parameter `big_n`.
///
/// The stream order is fixed: b_1, then (a_1, b_2), (a_2, b_3), … so a given
/// seed always produces the same matrix regardless of dimension prefix.
pub fn sample_tridiag(seed: Seed, n: usize, big_n: usize, beta: f64) -> Result<SymTridiag> {
    if n == 0 || big_n == 0 {
        return domain_err("sample_tridiag: dimensions must be positive");
    }
    if !(beta > 0.0) {
        return domain_err(format!("sample_tridiag: beta = {beta} must be positive"));
    }
    let s = 0.5 / (big_n as f64 * beta).sqrt();
    let mut rng = CounterRng::new(seed);
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n - 1);
    diag.push(s * sample_gaussian(&mut rng, 0.0, std::f64::consts::SQRT_2));
    for i in 1..n {
        off.push(s * sample_chi(&mut rng, beta * i as f64)?);
        diag.push(s * sample_gaussian(&mut rng, 0.0, std::f64::consts::SQRT_2));
    }
    SymTridiag::new(diag, off)
}

/// Characteristic polynomials det(zI − H_n) of all principal minors,
/// n = 0..=dim, in scaled form.
pub fn char_poly_table(m: &SymTridiag, z: f64) -> (Vec<f64>, Vec<i64>) {
    two_term_scaled(
        m.dim(),
        |n| z - m.diag[n - 1],
        |n| -m.off[n - 2] * m.off[n - 2],
    )
}

/// det(zI − H) for the full matrix.
pub fn char_poly(m: &SymTridiag, z: f64) -> Scaled {
    let (values, exps) = char_poly_table(m, z);
    Scaled { mantissa: *values.last().unwrap(), exp2: *exps.last().unwrap() }
}

/// Monic-type Hermite polynomial π_n(z) from
/// π_n = z π_{n−1} − ((n−1)/4N) π_{n−2}; equals the expectation of the
/// ensemble characteristic polynomial at every n.
pub fn hermite_pi(n: usize, big_n: usize, z: f64) -> Scaled {
    let (values, exps) = two_term_scaled(n, |_| z, |k| -((k - 1) as f64) / (4.0 * big_n as f64));
    Scaled { mantissa: values[n], exp2: exps[n] }
}

/// log of the normalizing weight w_n(z) that makes w_n π_n order one at the
/// spectral edge:
///
/// ```text
///   log w_n = −[ ln(2π)/4 + Nz² − n ln 2 − ln(Nz²)/12 + (ln n! − n ln N)/2 ]
/// ```
pub fn log_weight(n: usize, big_n: usize, z: f64) -> Result<f64> {
    if z == 0.0 || big_n == 0 {
        return domain_err("log_weight: needs z != 0 and N > 0");
    }
    let nf = big_n as f64;
    let nz2 = nf * z * z;
    let ln_fact = statrs::function::gamma::ln_gamma(n as f64 + 1.0);
    Ok(-((2.0 * std::f64::consts::PI).ln() / 4.0 + nz2
        - n as f64 * std::f64::consts::LN_2
        - nz2.ln() / 12.0
        + (ln_fact - n as f64 * nf.ln()) / 2.0))
}

/// w_N(z) π_N(z): the deterministic edge profile. Near z = 1 + λ/(2N^{2/3})
/// this converges to Ai(λ).
pub fn weighted_hermite(n: usize, big_n: usize, z: f64) -> Result<f64> {
    let pi = hermite_pi(n, big_n, z);
    let lw = log_weight(n, big_n, z)?;
    Ok(pi.signum() * (pi.ln_abs() + lw).exp())
}

/// Edge rescaling: eigenvalue x near +1 ↦ λ = (x − 1)·2N^{2/3}.
pub fn rescale_to_edge(x: f64, big_n: usize) -> f64 {
    (x - 1.0) * 2.0 * (big_n as f64).powf(2.0 / 3.0)
}

/// Monte Carlo mean and standard error of Φ_n(z) over `m` independent
/// matrices (unscaled; meant for dimensions where Φ stays in f64 range).
pub fn mean_char_poly(
    seed: Seed,
    n: usize,
    big_n: usize,
    beta: f64,
    z: f64,
    m: usize,
) -> Result<(f64, f64)> {
    if m < 2 {
        return domain_err("mean_char_poly: need at least two samples");
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for rep in 0..m {
        let mut rng = CounterRng::new(seed.child(rep as u64));
        let s = 0.5 / (big_n as f64 * beta).sqrt();
        let mut prev2 = 1.0;
        let mut prev = z - s * sample_gaussian(&mut rng, 0.0, std::f64::consts::SQRT_2);
        for i in 1..n {
            let a = s * sample_chi(&mut rng, beta * i as f64)?;
            let d = s * sample_gaussian(&mut rng, 0.0, std::f64::consts::SQRT_2);
            let next = (z - d) * prev - a * a * prev2;
            prev2 = prev;
            prev = next;
        }
        let delta = prev - mean;
        mean += delta / (rep + 1) as f64;
        m2 += delta * (prev - mean);
    }
    let var = m2 / (m as f64 - 1.0);
    Ok((mean, (var / m as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense determinant by Gaussian elimination with partial pivoting —
    /// an independent route to det(zI − H).
    fn dense_det(m: &SymTridiag, z: f64) -> f64 {
        let n = m.dim();
        let mut a = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            a[i][i] = z - m.diag[i];
            if i + 1 < n {
                a[i][i + 1] = -m.off[i];
                a[i + 1][i] = -m.off[i];
            }
        }
        let mut det = 1.0;
        for col in 0..n {
            let piv = (col..n).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).unwrap();
            if a[piv][col] == 0.0 {
                return 0.0;
            }
            if piv != col {
                a.swap(piv, col);
                det = -det;
            }
            det *= a[col][col];
            for row in col + 1..n {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
        det
    }

    #[test]
    fn transfer_recurrence_matches_dense_determinant() {
        let mut case = 0u64;
        for &beta in &[1.0, 2.0, 4.0] {
            for &n in &[1usize, 2, 5, 8] {
                for &z in &[-1.2, -0.3, 0.45, 1.3] {
                    case += 1;
                    let m = sample_tridiag(Seed::new(900).child(case), n, n, beta).unwrap();
                    let got = char_poly(&m, z).to_f64();
                    let want = dense_det(&m, z);
                    let rel = (got - want).abs() / want.abs().max(1e-30);
                    assert!(rel < 1e-11, "n={n} z={z}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn char_poly_vanishes_at_eigenvalues() {
        let m = sample_tridiag(Seed::new(17), 60, 60, 2.0).unwrap();
        let evs = m.eigenvalues(1e-12).unwrap();
        for &ev in [evs[0], evs[29], evs[59]].iter() {
            let lo = char_poly(&m, ev - 1e-7);
            let hi = char_poly(&m, ev + 1e-7);
            assert!(
                lo.signum() * hi.signum() < 0.0,
                "no sign change across eigenvalue {ev}"
            );
        }
    }

    #[test]
    fn hermite_matches_frozen_values() {
        // tools/oracles.py
        let cases = [
            (8usize, 10usize, 0.9, 0.139297025625),
            (12, 25, -0.35, 1.8065690063476563e-07),
            (5, 4, 1.1, 0.843088125),
        ];
        for &(n, big_n, z, want) in &cases {
            let got = hermite_pi(n, big_n, z).to_f64();
            assert!(
                (got - want).abs() < 1e-12 * want.abs().max(1e-7),
                "pi_{n}({z}; N={big_n}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn hermite_matches_explicit_degree_four() {
        // He_4(x) = x⁴ − 6x² + 3 under x = z√(4N) and the (4N)^{-n/2} scaling
        for &(big_n, z) in &[(7usize, 0.6f64), (40, -1.1)] {
            let nn = 4.0 * big_n as f64;
            let want = z.powi(4) - 6.0 * z * z / nn + 3.0 / (nn * nn);
            let got = hermite_pi(4, big_n, z).to_f64();
            assert!((got - want).abs() < 1e-14 * want.abs().max(1.0));
        }
    }

    #[test]
    fn log_weight_matches_frozen_values() {
        // tools/oracles.py
        let cases = [
            (6usize, 10usize, 0.7, 2.5499797568274705),
            (300, 200, 1.0, 95.2208913582651),
            (4000, 4000, 1.0, 770.2874316832263),
        ];
        for &(n, big_n, z, want) in &cases {
            let got = log_weight(n, big_n, z).unwrap();
            assert!(
                (got - want).abs() < 1e-10 * want.abs(),
                "log w_{n}({z}; N={big_n}) = {got}, want {want}"
            );
        }
        assert!(log_weight(5, 10, 0.0).is_err());
    }

    #[test]
    fn weighted_profile_approaches_airy_at_edge() {
        // coarse check at modest N; the N=4000 2% gate lives in acceptance
        let big_n = 2000usize;
        for &lam in &[-1.0f64, 0.0, 1.0] {
            let z = 1.0 + lam / (2.0 * (big_n as f64).powf(2.0 / 3.0));
            let got = weighted_hermite(big_n, big_n, z).unwrap();
            let want = crate::airy::ai(lam);
            assert!((got - want).abs() < 0.05, "lambda={lam}: {got} vs {want}");
        }
    }

    #[test]
    fn ensemble_moments_match_semicircle() {
        // E tr H = 0; E tr H² = 1/(2β) + (N−1)/4
        let n = 200usize;
        let beta = 2.0;
        let reps = 400;
        let mut tr = Vec::with_capacity(reps);
        let mut tr2 = Vec::with_capacity(reps);
        for rep in 0..reps as u64 {
            let m = sample_tridiag(Seed::new(5).child(rep), n, n, beta).unwrap();
            tr.push(m.diag.iter().sum::<f64>());
            tr2.push(
                m.diag.iter().map(|x| x * x).sum::<f64>()
                    + 2.0 * m.off.iter().map(|x| x * x).sum::<f64>(),
            );
        }
        let (m1, se1) = crate::stats::moment_band(&tr, 1);
        assert!(m1.abs() < 4.0 * se1, "tr: {m1} ± {se1}");
        let want = 1.0 / (2.0 * beta) + (n as f64 - 1.0) / 4.0;
        let (m2, se2) = crate::stats::moment_band(&tr2, 1);
        assert!((m2 - want).abs() < 4.0 * se2, "tr²: {m2} vs {want} ± {se2}");
    }

    #[test]
    fn char_poly_mean_is_hermite() {
        let (n, big_n, beta, z) = (8usize, 10usize, 1.0, 0.9);
        let (mean, se) = mean_char_poly(Seed::new(31), n, big_n, beta, z, 40_000).unwrap();
        let want = hermite_pi(n, big_n, z).to_f64();
        assert!((mean - want).abs() < 3.5 * se, "{mean} ± {se} vs {want}");
    }

    #[test]
    fn scaled_values_survive_huge_degree() {
        let m = sample_tridiag(Seed::new(77), 4000, 4000, 2.0).unwrap();
        // far outside the spectrum the polynomial overflows f64 (ln ~ +2400)
        let big = char_poly(&m, 2.0);
        assert!(big.mantissa.is_finite() && big.mantissa != 0.0);
        assert!(big.ln_abs() > 1000.0, "ln|phi(2)| = {}", big.ln_abs());
        // just past the edge the log-potential is negative: a tiny value that
        // exercises the downward renormalization (ln ≈ −450 ⇒ below 2^−512)
        let small = char_poly(&m, 1.05);
        assert!(small.mantissa.is_finite() && small.mantissa != 0.0);
        assert!(small.ln_abs() < -100.0 && small.ln_abs() > -1500.0,
                "ln|phi(1.05)| = {}", small.ln_abs());
        let (vals, _) = char_poly_table(&m, 2.0);
        assert!(vals.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn rescale_inverts_edge_position() {
        let lam = -1.3;
        let big_n = 2000usize;
        let z = 1.0 + lam / (2.0 * (big_n as f64).powf(2.0 / 3.0));
        assert!((rescale_to_edge(z, big_n) - lam).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(sample_tridiag(Seed::new(1), 0, 5, 2.0).is_err());
        assert!(sample_tridiag(Seed::new(1), 5, 5, 0.0).is_err());
        assert!(sample_tridiag(Seed::new(1), 5, 5, -1.0).is_err());
    }
}
