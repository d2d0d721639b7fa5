//! Coupling between the G(β)E characteristic polynomial and the stochastic
//! Airy equation: shared-noise runs, the Gaussian field 𝔤, the planar ratio
//! and Υ diagnostics, Ψ-vs-SAi error profiles, and the edge CLT.
//!
//! Everything runs off a single noise stream per ensemble. Step k yields
//! (X_k, Y_k) — the centred diagonal entry and the normalized χ² step — and
//! the walks, the edge Brownian path, the transfer recurrence, and the field
//! 𝔤 all re-stream the same sequence, so any two quantities derived from one
//! [`JacobiEnsemble`] are coupled exactly (the stream is counter-based, so a
//! re-stream is free).
//!
//! The transfer recurrence is run in the scale-normalized form
//!
//!   Ψ̃_n = 2(z√(N/n) − X_n/√(2nβ))·Ψ̃_{n−1} − (√((n−1)/n) + √(2/(βn))·Y_n)·Ψ̃_{n−2},
//!
//! where Ψ̃_n = Φ_n/s_n, s_n = 2^{−n}√(n!/N^n). The weighted polynomial is
//! then Ψ_n = Ψ̃_n·e^{−lnC} with lnC = ln(2π)/4 + Nz² − ln(Nz²)/12: the
//! n-dependent part of the weight cancels s_n exactly, so the normalizer is
//! a single n-free constant per z.

use num_complex::Complex64;
use rand_distr::Distribution;
use rayon::prelude::*;
use statrs::distribution::ContinuousCDF;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::eigen::SymTridiag;
use crate::gbe::{RENORM_DOWN, RENORM_EXP, RENORM_UP};
use crate::rng::{edge_brownian_from_walk, sample_gaussian, BrownianPath, CounterRng, Seed};
use crate::sai::{mean_correction, noise_integrals, MeanCorrection, NoiseIntegrals};
use crate::{airy, domain_err, sai, stats, Error, Result};

// ensemble and noise stream

/// A G(β)E noise source: `n` is the matrix size N, and `coupled` selects the
/// quantile-coupled χ² steps (the construction every shared-noise comparison
/// rests on) over direct Gamma sampling (identical law, about 5× faster;
/// used by the Monte Carlo layers where only the law matters).
#[derive(Clone, Debug)]
pub struct JacobiEnsemble {
    pub seed: Seed,
    pub n: usize,
    pub beta: f64,
    pub coupled: bool,
}

impl JacobiEnsemble {
    pub fn new(seed: Seed, n: usize, beta: f64, coupled: bool) -> Result<JacobiEnsemble> {
        if n < 2 {
            return domain_err(format!("ensemble: size {n} < 2"));
        }
        if !(beta > 0.0) {
            return domain_err(format!("ensemble: beta = {beta} must be positive"));
        }
        Ok(JacobiEnsemble { seed, n, beta, coupled })
    }

    /// β = ∞ surrogate: every noise variable is zero.
    pub fn noise_free(n: usize) -> JacobiEnsemble {
        JacobiEnsemble { seed: Seed::new(0), n, beta: f64::INFINITY, coupled: false }
    }

    pub fn is_noise_free(&self) -> bool {
        !self.beta.is_finite()
    }

    pub fn stream(&self) -> NoiseStream {
        NoiseStream { rng: CounterRng::new(self.seed), k: 0, beta: self.beta, coupled: self.coupled }
    }

    /// Materialize the leading `dim`×`dim` block of the tridiagonal matrix
    /// this stream describes: diag s√2·X_k, off-diag s·a_k with
    /// a_k² = βk + √(2βk)·Y_{k+1} and s = 1/(2√(Nβ)).
    pub fn to_tridiag(&self, dim: usize) -> Result<SymTridiag> {
        if dim < 1 || dim > self.n {
            return domain_err(format!("to_tridiag: dim {dim} outside 1..={}", self.n));
        }
        let nf = self.n as f64;
        let mut diag = Vec::with_capacity(dim);
        let mut off = Vec::with_capacity(dim.saturating_sub(1));
        let mut stream = self.stream();
        for k in 1..=dim {
            let (x, y) = stream.next_pair()?;
            if self.is_noise_free() {
                diag.push(0.0);
                if k >= 2 {
                    off.push(0.5 * ((k - 1) as f64 / nf).sqrt());
                }
            } else {
                let s = 0.5 / (nf * self.beta).sqrt();
                diag.push(s * 2.0_f64.sqrt() * x);
                if k >= 2 {
                    let nu = self.beta * (k - 1) as f64;
                    let a2 = nu + (2.0 * nu).sqrt() * y;
                    off.push(s * a2.max(0.0).sqrt());
                }
            }
        }
        SymTridiag::new(diag, off)
    }
}

/// Sequential (X_k, Y_k) pairs, k = 1, 2, …; Y_1 = 0 by convention.
pub struct NoiseStream {
    rng: CounterRng,
    k: usize,
    beta: f64,
    coupled: bool,
}

impl NoiseStream {
    #[inline]
    pub fn next_pair(&mut self) -> Result<(f64, f64)> {
        self.k += 1;
        if !self.beta.is_finite() {
            return Ok((0.0, 0.0));
        }
        let x = sample_gaussian(&mut self.rng, 0.0, 1.0);
        let y = if self.k == 1 {
            0.0
        } else if self.coupled {
            let u = self.rng.uniform().max(1e-300);
            std_chi2_quantile(self.beta * (self.k - 1) as f64, u)?
        } else {
            let nu = self.beta * (self.k - 1) as f64;
            let gamma = rand_distr::Gamma::new(nu / 2.0, 2.0)
                .map_err(|e| Error::Domain(format!("noise stream: {e}")))?;
            let a2: f64 = gamma.sample(&mut self.rng);
            (a2 - nu) / (2.0 * nu).sqrt()
        };
        Ok((x, y))
    }
}

/// Standardized χ²_ν quantile (Q_ν(u) − ν)/√(2ν): a Wilson–Hilferty (or, in
/// the deep left tail, leading-series) start polished by Newton in log x on
/// the regularized incomplete gamma. A handful of P(a,·) evaluations instead
/// of the reference engine's bisection search, and no NaN corner: the
/// series start covers the region where the bisection engine fails.
fn std_chi2_quantile(nu: f64, u: f64) -> Result<f64> {
    if !(nu > 0.0) || !(0.0..1.0).contains(&u) || u == 0.0 {
        return domain_err(format!("chi2 quantile: nu = {nu}, u = {u}"));
    }
    let x = gamma_p_inverse(0.5 * nu, u);
    Ok((2.0 * x - nu) / (2.0 * nu).sqrt())
}

/// Regularized lower incomplete gamma P(a, x). The library routine snaps
/// x ≲ 10⁻¹⁵ to zero, which poisons deep-left-tail inversion at small shape;
/// below x = 1/2 this evaluates the power series directly instead.
fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x > 0.5 {
        return gamma_lr(a, x);
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= x / (a + k as f64);
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    (a * x.ln() - x - ln_gamma(a + 1.0)).exp() * sum
}

/// x with P(a, x) = u for the regularized lower incomplete gamma P.
fn gamma_p_inverse(a: f64, u: f64) -> f64 {
    let lg1 = ln_gamma(a + 1.0);
    let z = statrs::distribution::Normal::standard().inverse_cdf(u);
    let c = 1.0 / (9.0 * a);
    let t = 1.0 - c + z * c.sqrt();
    let mut lx = if a > 0.6 && t > 0.1 {
        (a * t * t * t).ln()
    } else {
        // P(a, x) ≈ x^a/Γ(a+1) as x → 0, inverted in log space
        (u.ln() + lg1) / a
    };
    for _ in 0..48 {
        let x = lx.exp();
        // dP/d(ln x) = x·pdf(x) = exp(a·ln x − x − ln Γ(a))
        let dp = (a * lx - x - lg1).exp() * a;
        if !(dp > 0.0) {
            break; // flat tail at fp resolution; the start value stands
        }
        let step = ((gamma_p(a, x) - u) / dp).clamp(-1.0, 1.0);
        lx -= step;
        if step.abs() <= 1e-13 * lx.abs().max(1.0) {
            break;
        }
    }
    lx.exp()
}

// the normalized transfer recurrence

/// lnC(z): the n-free part of the weight, ln(2π)/4 + Nz² − ln(Nz²)/12.
fn ln_psi_norm(big_n: f64, z: f64) -> Result<f64> {
    let nz2 = big_n * z * z;
    if !(nz2 > 0.0) {
        return domain_err(format!("weight normalizer undefined at z = {z}"));
    }
    Ok(0.25 * (2.0 * std::f64::consts::PI).ln() + nz2 - nz2.ln() / 12.0)
}

/// Run the Ψ̃ recurrence for `steps` steps at fixed z, drawing (X, Y) pairs
/// from `next`, recording (mantissa, exponent) at each index in `capture`
/// (non-decreasing, entries ≤ steps). The carried pair is renormalized
/// jointly so its ratio stays exact.
fn scan_with<F>(
    mut next: F,
    big_n: f64,
    beta: f64,
    steps: usize,
    z: f64,
    capture: &[usize],
) -> Result<Vec<(f64, i64)>>
where
    F: FnMut() -> Result<(f64, f64)>,
{
    if capture.windows(2).any(|w| w[0] > w[1]) || capture.last().is_some_and(|&c| c > steps) {
        return Err(Error::Grid("transfer scan: capture list not sorted or out of range".into()));
    }
    let noise_free = !beta.is_finite();
    let mut out = vec![(0.0, 0i64); capture.len()];
    let mut cap = 0usize;
    while cap < capture.len() && capture[cap] == 0 {
        out[cap] = (1.0, 0);
        cap += 1;
    }
    let (mut prev2, mut prev) = (0.0_f64, 1.0_f64);
    let mut exp_common: i64 = 0;
    for n in 1..=steps {
        let (x, y) = next()?;
        let nf = n as f64;
        let a = if noise_free {
            2.0 * z * (big_n / nf).sqrt()
        } else {
            2.0 * (z * (big_n / nf).sqrt() - x / (2.0 * nf * beta).sqrt())
        };
        let b = if n == 1 {
            0.0
        } else if noise_free {
            -((nf - 1.0) / nf).sqrt()
        } else {
            -(((nf - 1.0) / nf).sqrt() + (2.0 / (beta * nf)).sqrt() * y)
        };
        let next = a * prev + b * prev2;
        prev2 = prev;
        prev = next;
        let m = prev.abs().max(prev2.abs());
        if m > RENORM_UP {
            prev *= RENORM_DOWN;
            prev2 *= RENORM_DOWN;
            exp_common += RENORM_EXP;
        } else if m < RENORM_DOWN && m > 0.0 {
            prev *= RENORM_UP;
            prev2 *= RENORM_UP;
            exp_common -= RENORM_EXP;
        }
        while cap < capture.len() && capture[cap] == n {
            out[cap] = (prev, exp_common);
            cap += 1;
        }
    }
    Ok(out)
}

fn transfer_scan(
    ens: &JacobiEnsemble,
    steps: usize,
    z: f64,
    capture: &[usize],
) -> Result<Vec<(f64, i64)>> {
    let mut stream = ens.stream();
    scan_with(|| stream.next_pair(), ens.n as f64, ens.beta, steps, z, capture)
}

fn ln_abs_of(m: f64, e: i64, ln_c: f64) -> f64 {
    m.abs().ln() + e as f64 * std::f64::consts::LN_2 - ln_c
}

fn psi_of(m: f64, e: i64, ln_c: f64) -> f64 {
    if m == 0.0 {
        0.0
    } else {
        m.signum() * ln_abs_of(m, e, ln_c).exp()
    }
}

// the coupled run

/// A shared-noise run at base point z0: the parabolic window
/// [N_H, N_p], N_p = ⌊N·z0²⌋, N_H = N_p − ⌈N_p^{1/3}·T⌉, T = (log N)^{1−ε},
/// together with the edge Brownian path built from the same noise.
#[derive(Clone, Debug)]
pub struct CoupledRun {
    pub ens: JacobiEnsemble,
    pub z0: f64,
    pub n_p: usize,
    pub n_h: usize,
    /// requested window length T
    pub t_window: f64,
    /// the SAi anchor time: a few multiples of T below the handoff, so the
    /// Airy-seeded backward sweep picks up the tail noise on [T, t_anchor]
    /// (seeding at T itself truncates an O(T^{−1/2}) random factor); capped so
    /// the walk indices stay in the edge regime
    pub t_anchor: f64,
    /// walk mesh N_p^{−1/3}; the edge path lives on mesh/refine
    pub mesh: f64,
    pub edge_path: BrownianPath,
    /// the (X_k, Y_k) pairs, k = 1..=N_p, cached so the per-λ passes replay
    /// them as pure arithmetic (empty when noise-free)
    noise: Vec<(f64, f64)>,
}

/// λ-free integrals of one run's edge path: 𝔛 and its mean compensator,
/// plus the grid index of the handoff time (the prefactor integrals stop
/// there, not at the deeper SAi anchor). Computed once, shared across λ.
pub struct EdgeIntegrals {
    pub ni: NoiseIntegrals,
    pub mc: MeanCorrection,
    pub anchor: usize,
}

impl CoupledRun {
    /// `eps` is the window exponent (T = (log N)^{1−ε}); `refine` subdivides
    /// the walk mesh for the edge path (Brownian-bridge fill).
    pub fn new(ens: JacobiEnsemble, z0: f64, eps: f64, refine: usize) -> Result<CoupledRun> {
        if !(z0.abs() > 0.0 && z0.abs() <= 1.0) {
            return domain_err(format!("coupled run: z0 = {z0} outside [−1, 0) ∪ (0, 1]"));
        }
        if !(0.0..1.0).contains(&eps) {
            return domain_err(format!("coupled run: eps = {eps} outside [0, 1)"));
        }
        if refine == 0 {
            return domain_err("coupled run: refine must be at least 1");
        }
        let big_n = ens.n as f64;
        let t_window = big_n.ln().powf(1.0 - eps);
        let n_p = (big_n * z0 * z0).floor() as usize;
        let mesh = (n_p as f64).powf(-1.0 / 3.0);
        let span = ((n_p as f64).powf(1.0 / 3.0) * t_window).ceil() as usize;
        if span + 2 > n_p {
            return domain_err(format!("coupled run: window T = {t_window} swallows N_p = {n_p}"));
        }
        let n_h = n_p - span;
        // SAi anchor depth: up to 6T, kept inside the edge regime
        // (T_deep ≪ N_p^{2/3}) and below the step-bias ceiling of the sweep
        // (h²·T_deep^{5/2}/30 ≲ 0.5%, h the refined mesh)
        let h = mesh / refine as f64;
        let t_deep = (6.0 * t_window)
            .min(0.04 * (n_p as f64).powf(2.0 / 3.0))
            .min((0.15 / (h * h)).powf(0.4))
            .max(t_window);
        let span_deep = ((t_deep / mesh).ceil() as usize).clamp(span, n_p - 2);
        let t_anchor = span_deep as f64 * mesh;
        // one noise pass: cache the pairs and accumulate the walks, then
        // rescale into the edge path
        let mut noise = Vec::with_capacity(if ens.is_noise_free() { 0 } else { n_p });
        let mut xwalk = Vec::with_capacity(n_p + 1);
        let mut ywalk = Vec::with_capacity(n_p + 1);
        xwalk.push(0.0);
        ywalk.push(0.0);
        let mut stream = ens.stream();
        for _ in 1..=n_p {
            let (x, y) = stream.next_pair()?;
            if !ens.is_noise_free() {
                noise.push((x, y));
            }
            xwalk.push(xwalk.last().unwrap() + x);
            ywalk.push(ywalk.last().unwrap() + y);
        }
        let edge_path = edge_brownian_from_walk(
            &xwalk,
            &ywalk,
            n_p,
            ens.beta,
            z0.signum(),
            mesh / refine as f64,
            t_anchor,
            ens.seed.child(0xED6E),
        )?;
        Ok(CoupledRun { ens, z0, n_p, n_h, t_window, t_anchor, mesh, edge_path, noise })
    }

    /// Replay of the cached noise (zeros when noise-free).
    fn replay(&self) -> impl FnMut() -> Result<(f64, f64)> + '_ {
        let mut i = 0usize;
        move || {
            if self.noise.is_empty() {
                return Ok((0.0, 0.0));
            }
            let p = self.noise[i];
            i += 1;
            Ok(p)
        }
    }

    /// z(λ) = z0·(1 + λ/(2N_p^{2/3})).
    pub fn z_of(&self, lambda: f64) -> f64 {
        self.z0 * (1.0 + lambda / (2.0 * (self.n_p as f64).powf(2.0 / 3.0)))
    }

    /// Exact time of index n in the window, (N_p − n)·mesh.
    pub fn t_of(&self, n: usize) -> f64 {
        (self.n_p - n) as f64 * self.mesh
    }

    pub fn integrals(&self) -> Result<EdgeIntegrals> {
        let ni = noise_integrals(&self.edge_path)?;
        let mc = mean_correction(self.edge_path.dt, self.t_anchor + self.edge_path.dt)?;
        let anchor = self
            .edge_path
            .grid_index(self.t_of(self.n_h))
            .ok_or_else(|| Error::Numerics("handoff time off the edge-path grid".into()))?;
        Ok(EdgeIntegrals { ni, mc, anchor })
    }

    /// Ψ values at the window indices ⌊N_p − N_p^{1/3}·t⌋ for each requested
    /// t, reported at the exact index times, plus the handoff pair and edge
    /// statistics. One streaming pass.
    pub fn psi_profile(&self, lambda: f64, t_req: &[f64]) -> Result<PsiProfile> {
        let z = self.z_of(lambda);
        let ln_c = ln_psi_norm(self.ens.n as f64, z)?;
        let t_hand = self.t_of(self.n_h);
        let mut n_of = Vec::with_capacity(t_req.len());
        for &t in t_req {
            if !(0.0..=t_hand + 1e-9).contains(&t) {
                return domain_err(format!("psi_profile: t = {t} outside [0, {t_hand}]"));
            }
            let n = ((self.n_p as f64) - t / self.mesh + 1e-9).floor() as usize;
            let n = n.min(self.n_p);
            if n < self.n_h {
                return domain_err(format!("psi_profile: t = {t} reaches below N_H"));
            }
            n_of.push(n);
        }
        let mut caps: Vec<usize> = n_of.clone();
        caps.push(self.n_h - 1);
        caps.push(self.n_h);
        caps.push(self.n_p);
        caps.sort_unstable();
        caps.dedup();
        let raw = scan_with(self.replay(), self.ens.n as f64, self.ens.beta, self.n_p, z, &caps)?;
        let find = |n: usize| raw[caps.binary_search(&n).expect("captured index")];
        let psi: Vec<f64> = n_of.iter().map(|&n| { let (m, e) = find(n); psi_of(m, e, ln_c) }).collect();
        let t: Vec<f64> = n_of.iter().map(|&n| self.t_of(n)).collect();
        let (hm, he) = find(self.n_h);
        let (hm1, he1) = find(self.n_h - 1);
        let (em, ee) = find(self.n_p);
        Ok(PsiProfile {
            lambda,
            z,
            t,
            n: n_of,
            psi,
            handoff: (psi_of(hm, he, ln_c), psi_of(hm1, he1, ln_c)),
            ln_abs_edge: ln_abs_of(em, ee, ln_c),
            sign_edge: em.signum(),
        })
    }

    /// 𝔮_N(λ) = √(2/β)·𝔤_{t_H}(z(λ)) and its variance (2/β)·Var 𝔤 by
    /// quadrature; (0, 0) for the noise-free surrogate.
    pub fn gaf_q(&self, lambda: f64) -> Result<(f64, f64)> {
        if self.ens.is_noise_free() {
            return Ok((0.0, 0.0));
        }
        let t_h = self.n_h as f64 / self.ens.n as f64;
        let g = gaf_with(
            self.replay(),
            self.ens.n as f64,
            t_h,
            Complex64::new(self.z_of(lambda), 0.0),
        )?;
        let su = 2.0 / self.ens.beta;
        Ok((su.sqrt() * g.value.re, su * g.variance))
    }

    /// The scalar comparison prefactor, from its definition:
    /// e^{𝔮+∫𝔛}/E[e^{𝔮+∫𝔛}] with E e^𝔮 = e^{Var 𝔮/2} and E e^{∫𝔛} = e^{∫M},
    /// the integrals taken over [0, T] up to the handoff. Exactly 1 when
    /// noise-free.
    pub fn prefactor(&self, ints: &EdgeIntegrals, lambda: f64) -> Result<f64> {
        let (q, var_q) = self.gaf_q(lambda)?;
        let int_x = ints.ni.int_x[ints.anchor];
        let over_beta = if self.ens.beta.is_finite() { 4.0 / self.ens.beta } else { 0.0 };
        Ok((q + int_x - 0.5 * var_q - over_beta * ints.mc.int_m[ints.anchor]).exp())
    }
}

/// Ψ values along the window, with the handoff pair (Ψ_{N_H}, Ψ_{N_H−1})
/// and the edge (t = 0) value in log form.
#[derive(Clone, Debug)]
pub struct PsiProfile {
    pub lambda: f64,
    pub z: f64,
    pub t: Vec<f64>,
    pub n: Vec<usize>,
    pub psi: Vec<f64>,
    pub handoff: (f64, f64),
    pub ln_abs_edge: f64,
    pub sign_edge: f64,
}

// the Gaussian field 𝔤

/// One evaluation of 𝔤_t(z) with its quadrature variance E|𝔤_t(z)|².
#[derive(Clone, Debug)]
pub struct GafSample {
    pub t: f64,
    pub z: Complex64,
    pub value: Complex64,
    pub variance: f64,
}

/// J(w) = w − √(w²−1) on the branch with |J| ≤ 1 (the conformal map to the
/// unit disk; JJ⁻¹ = (w−s)(w+s) = 1).
fn j_map(w: Complex64) -> Complex64 {
    let s = (w * w - Complex64::new(1.0, 0.0)).sqrt();
    let j = w - s;
    if j.norm_sqr() > 1.0 {
        w + s
    } else {
        j
    }
}

fn gaf_with<F>(mut next: F, big_n: f64, t: f64, z: Complex64) -> Result<GafSample>
where
    F: FnMut() -> Result<(f64, f64)>,
{
    if !(0.0..1.0 + 1e-12).contains(&t) {
        return domain_err(format!("gaf_g: t = {t} outside [0, 1]"));
    }
    if z.im == 0.0 && z.re.abs() <= t.sqrt() {
        return domain_err(format!("gaf_g: z = {} on the cut [−√t, √t]", z.re));
    }
    let m = (t * big_n + 1e-9).floor() as usize;
    let z2 = z * z;
    let mut value = Complex64::new(0.0, 0.0);
    let mut variance = 0.0;
    for k in 1..=m {
        let (x, y) = next()?;
        let u = k as f64 / big_n;
        let root = (z2 - u).sqrt();
        let j = j_map(z / u.sqrt());
        value += (x + j * y) / root;
        variance += (1.0 + j.norm_sqr()) / (z2 - u).norm();
    }
    let scale = -0.5 / big_n.sqrt();
    Ok(GafSample { t, z, value: scale * value, variance: variance / (4.0 * big_n) })
}

/// 𝔤_t(z) = −(1/2)∫_0^t (d𝐗_u + J(z/√u)·d𝐘_u)/√(z²−u) as a
/// Riemann–Stieltjes sum against the walks on mesh 1/N, u_k = k/N;
/// the variance is the deterministic quadrature of the squared integrand.
pub fn gaf_g(ens: &JacobiEnsemble, t: f64, z: Complex64) -> Result<GafSample> {
    let mut stream = ens.stream();
    gaf_with(|| stream.next_pair(), ens.n as f64, t, z)
}

// planar ratio

/// |ratio − 1| per z for the deformed planar identity
/// Φ_N(z)·E[e^{√(2/β)𝔤_1}] / (π_N(z)·e^{√(2/β)𝔤_1}) ≈ 1, real z, |z| > 1.
/// Φ/π is taken in the normalized recurrence (the weight cancels), and
/// E[e^{·}] = e^{(2/β)·Var 𝔤/2} from the quadrature variance.
pub fn planar_ratio_check(ens: &JacobiEnsemble, z_list: &[f64]) -> Result<Vec<f64>> {
    let surrogate = JacobiEnsemble::noise_free(ens.n);
    let mut out = Vec::with_capacity(z_list.len());
    for &z in z_list {
        if !(z.abs() > 1.0) {
            return domain_err(format!("planar ratio: z = {z} inside the support [−1, 1]"));
        }
        let cap = [ens.n];
        let (pm, pe) = transfer_scan(ens, ens.n, z, &cap)?[0];
        let (qm, qe) = transfer_scan(&surrogate, ens.n, z, &cap)?[0];
        if pm == 0.0 || qm == 0.0 {
            return Err(Error::Numerics(format!("planar ratio: vanishing polynomial at z = {z}")));
        }
        let su = if ens.is_noise_free() { 0.0 } else { 2.0 / ens.beta };
        let g = gaf_g(ens, 1.0, Complex64::new(z, 0.0))?;
        let ln_ratio =
            (pm.abs().ln() + pe as f64 * std::f64::consts::LN_2)
                - (qm.abs().ln() + qe as f64 * std::f64::consts::LN_2)
                + 0.5 * su * g.variance
                - su.sqrt() * g.value.re;
        let ratio = pm.signum() * qm.signum() * ln_ratio.exp();
        out.push((ratio - 1.0).abs());
    }
    Ok(out)
}

// Υ diagnostics

/// (Υ1, Υ2) per λ: e^{Υ1} = Ψ_{N_H−1}·E[e^𝔮]/(Ai(λ+T₁)·e^𝔮) and
/// e^{Υ2} = N_p^{1/3}(Ψ_{N_H−1} − Ψ_{N_H})·E[e^𝔮]/(Ai′(λ+T₂)·e^𝔮), evaluated
/// in log space (no underflow at large T). The Airy factors are taken at the
/// exact grid times: T₁ the time of index N_H−1, T₂ the midpoint of the
/// difference quotient.
pub fn upsilon_diagnostic(run: &CoupledRun, lambda_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let np13 = (run.n_p as f64).powf(1.0 / 3.0);
    let t1 = run.t_of(run.n_h - 1);
    let t2 = 0.5 * (t1 + run.t_of(run.n_h));
    let mut out = Vec::with_capacity(lambda_grid.len());
    for &lam in lambda_grid {
        let z = run.z_of(lam);
        let ln_c = ln_psi_norm(run.ens.n as f64, z)?;
        let caps = [run.n_h - 1, run.n_h];
        let raw = scan_with(run.replay(), run.ens.n as f64, run.ens.beta, run.n_h, z, &caps)?;
        let (m1, e1) = raw[0];
        let (m0, e0) = raw[1];
        let (q, var_q) = run.gaf_q(lam)?;
        let ai = airy::airy(lam + t1)?;
        if m1.signum() * ai.ai.signum() <= 0.0 {
            return Err(Error::Numerics(format!(
                "upsilon: handoff value and Ai disagree in sign at λ = {lam}"
            )));
        }
        let ups1 = ln_abs_of(m1, e1, ln_c) - ai.ai.abs().ln() + 0.5 * var_q - q;
        // difference on a common exponent (exponents differ by at most one
        // renormalization; scale toward the larger, away from overflow)
        let e = e1.max(e0);
        let d = m1 * f64::exp2((e1 - e) as f64) - m0 * f64::exp2((e0 - e) as f64);
        let aip = airy::airy(lam + t2)?.ai_prime;
        if d.signum() * aip.signum() <= 0.0 {
            return Err(Error::Numerics(format!(
                "upsilon: handoff difference and Ai′ disagree in sign at λ = {lam}"
            )));
        }
        let ups2 =
            (np13 * d.abs()).ln() + e as f64 * std::f64::consts::LN_2 - ln_c - aip.abs().ln()
                + 0.5 * var_q
                - q;
        out.push((ups1, ups2));
    }
    Ok(out)
}

// Ψ vs SAi on shared noise

/// Sup and mean absolute deviation of Ψ·(prefactor)⁻¹ − SAi over a grid.
#[derive(Clone, Debug)]
pub struct DeviationReport {
    pub sup: f64,
    pub mean_abs: f64,
}

/// Compare the windowed Ψ profile against the backward-constructed SAi on
/// the run's own edge path, per λ; the prefactor comes from its definition
/// ([`CoupledRun::prefactor`]), never from a fit. Requested times snap to
/// exact window-index times, so both sides are evaluated at identical t.
pub fn psi_vs_sai(run: &CoupledRun, t_grid: &[f64], lambda_grid: &[f64]) -> Result<DeviationReport> {
    let ints = run.integrals()?;
    let mut sup = 0.0_f64;
    let mut acc = 0.0_f64;
    let mut count = 0usize;
    for &lam in lambda_grid {
        let prof = run.psi_profile(lam, t_grid)?;
        let sai_path = sai::sai_backward_with(&run.edge_path, &ints.ni, &ints.mc, lam, run.t_anchor)?;
        let pref = run.prefactor(&ints, lam)?;
        for (j, &tj) in prof.t.iter().enumerate() {
            let d = (prof.psi[j] / pref - sai_path.phi_at(tj)?).abs();
            sup = sup.max(d);
            acc += d;
            count += 1;
        }
    }
    Ok(DeviationReport { sup, mean_abs: acc / count.max(1) as f64 })
}

/// Largest `k` zeros of λ ↦ Ψ_{N_p}(λ) (the t = 0 edge column), by downward
/// scan from `lambda_hi` in steps of `grid` and bisection to `tol`.
pub fn psi_lambda_zeros(
    run: &CoupledRun,
    k: usize,
    lambda_hi: f64,
    grid: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    if k == 0 || !(grid > 0.0) || !(tol > 0.0) {
        return domain_err("psi_lambda_zeros: need k ≥ 1 and positive grid, tol");
    }
    let sign_at = |lam: f64| -> Result<f64> {
        let z = run.z_of(lam);
        let raw = scan_with(run.replay(), run.ens.n as f64, run.ens.beta, run.n_p, z, &[run.n_p])?;
        Ok(raw[0].0.signum())
    };
    let floor = lambda_hi - 30.0;
    let mut zeros = Vec::with_capacity(k);
    let mut hi = lambda_hi;
    let mut s_hi = sign_at(hi)?;
    while zeros.len() < k {
        let lo = hi - grid;
        if lo < floor {
            return Err(Error::Numerics(format!(
                "psi_lambda_zeros: fewer than {k} sign changes above λ = {floor}"
            )));
        }
        let s_lo = sign_at(lo)?;
        if s_lo * s_hi < 0.0 {
            let (mut a, mut b) = (lo, hi);
            let mut s_a = s_lo;
            while b - a > tol {
                let mid = 0.5 * (a + b);
                let s_mid = sign_at(mid)?;
                if s_mid * s_a <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    s_a = s_mid;
                }
            }
            zeros.push(0.5 * (a + b));
        }
        hi = lo;
        s_hi = s_lo;
    }
    Ok(zeros)
}

// edge CLT

/// Monte Carlo sample of the edge CLT statistic at λ = 0, z0 = 1.
#[derive(Clone, Debug)]
pub struct CltReport {
    /// (ln|Ψ_N(0)| + lnN/(3β)) / √((2/(3β))·lnN), per run
    pub standardized: Vec<f64>,
    /// KS distance of `standardized` to the standard normal CDF
    pub ks_standardized: f64,
    /// KS distance after removing the sample mean and variance (the
    /// location shift is O(1) in the theorem, so the shape test is run on
    /// the studentized sample)
    pub ks_studentized: f64,
    pub mean_log: f64,
    pub var_log: f64,
}

/// M independent runs of ln|Ψ_N(0)| (direct Gamma noise — only the law
/// matters here), standardized by the theoretical mean and variance.
pub fn clt_statistic(seed: Seed, big_n: usize, beta: f64, m: usize) -> Result<CltReport> {
    if m < 2 {
        return domain_err("clt_statistic: need at least two runs");
    }
    let ln_n = (big_n as f64).ln();
    let ln_c = ln_psi_norm(big_n as f64, 1.0)?;
    let logs: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let ens = JacobiEnsemble::new(seed.child(i as u64), big_n, beta, false)?;
            let (mant, exp) = transfer_scan(&ens, big_n, 1.0, &[big_n])?[0];
            Ok(ln_abs_of(mant, exp, ln_c))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mu = ln_n / (3.0 * beta);
    let sd = (2.0 * ln_n / (3.0 * beta)).sqrt();
    let standardized: Vec<f64> = logs.iter().map(|l| (l + mu) / sd).collect();
    let mean_log = stats::mean(&logs);
    let var_log = stats::variance(&logs);
    let studentized: Vec<f64> = logs.iter().map(|l| (l - mean_log) / var_log.sqrt()).collect();
    let ks_standardized = stats::ks_one_sample(&standardized, stats::normal_cdf);
    let ks_studentized = stats::ks_one_sample(&studentized, stats::normal_cdf);
    Ok(CltReport { standardized, ks_standardized, ks_studentized, mean_log, var_log })
}
