//! Counter-based randomness and Brownian paths.
//!
//! Every stochastic object in the crate is a pure function of a [`Seed`].
//! The generator is a keyed splitmix-style counter hash, so streams can be
//! split (`Seed::with_stream`, `Seed::child`) without any shared state and
//! parallel drivers produce identical output at any worker count.

use crate::{domain_err, Result};
use rand::RngCore;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::distribution::ContinuousCDF;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identity of a random stream: a user-facing seed plus a stream index used
/// to split independent substreams (one per Monte Carlo replica, bridge cell,
/// …) deterministically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Seed {
    pub value: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(value: u64) -> Self {
        Seed { value, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Seed { value: self.value, stream }
    }

    /// Derived seed for an independent child stream (labelled substream).
    pub fn child(self, tag: u64) -> Self {
        Seed {
            value: mix64(self.value ^ mix64(tag.wrapping_add(GOLDEN))),
            stream: self.stream,
        }
    }
}

/// Keyed counter generator: `out_i = mix(key + i·golden)`.
///
/// Stateless apart from the counter, so any position in the stream can be
/// reached in O(1) (`at`), and two generators with the same key always agree.
#[derive(Clone, Debug)]
pub struct CounterRng {
    key: u64,
    ctr: u64,
}

impl CounterRng {
    pub fn new(seed: Seed) -> Self {
        let key = mix64(seed.value ^ mix64(seed.stream ^ 0x6A09_E667_F3BC_C909));
        CounterRng { key, ctr: 0 }
    }

    /// Generator positioned at counter `ctr`.
    pub fn at(seed: Seed, ctr: u64) -> Self {
        let mut r = CounterRng::new(seed);
        r.ctr = ctr;
        r
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Uniform on [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        let z = self.key.wrapping_add(self.ctr.wrapping_mul(GOLDEN));
        self.ctr = self.ctr.wrapping_add(1);
        mix64(z)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let v = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&v[..chunk.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

/// N(mean, sd²) draw.
#[inline]
pub fn sample_gaussian(rng: &mut CounterRng, mean: f64, sd: f64) -> f64 {
    let g: f64 = StandardNormal.sample(rng);
    mean + sd * g
}

/// χ_α draw (the square root of a χ²_α = Gamma(α/2, scale 2) variable), α > 0.
pub fn sample_chi(rng: &mut CounterRng, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return domain_err(format!("sample_chi: alpha = {alpha} must be positive"));
    }
    let gamma = Gamma::new(alpha / 2.0, 2.0)
        .map_err(|e| crate::Error::Domain(format!("sample_chi: {e}")))?;
    Ok(gamma.sample(rng).sqrt())
}

/// Comonotone coupling of the normalized χ² step with its Gaussian surrogate:
/// one uniform `u` feeds both quantile functions. Returns
/// `(Y_k, g_k)` where `Y_k = (Q_{χ²_{β(k−1)}}(u) − β(k−1))/√(2β(k−1))` and
/// `g_k = Φ⁻¹(u)`; requires k ≥ 2.
pub fn quantile_couple_gamma(rng: &mut CounterRng, k: usize, beta: f64) -> Result<(f64, f64)> {
    let u = rng.uniform().max(1e-300);
    quantile_couple_gamma_at(u, k, beta)
}

/// Deterministic part of [`quantile_couple_gamma`] at an explicit uniform.
pub fn quantile_couple_gamma_at(u: f64, k: usize, beta: f64) -> Result<(f64, f64)> {
    if k < 2 {
        return domain_err("quantile_couple_gamma: k must be at least 2");
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return domain_err(format!("quantile_couple_gamma: beta = {beta}"));
    }
    let nu = beta * (k - 1) as f64;
    let gamma = statrs::distribution::Gamma::new(nu / 2.0, 0.5)
        .map_err(|e| crate::Error::Domain(format!("quantile_couple_gamma: {e}")))?;
    let y = (gamma.inverse_cdf(u) - nu) / (2.0 * nu).sqrt();
    let g = statrs::distribution::Normal::standard().inverse_cdf(u);
    Ok((y, g))
}

/// A Brownian path with variance rate 4/β, stored on a uniform grid.
///
/// `values[origin] = 0` exactly: forward paths are anchored at `t0`,
/// two-sided edge paths at t = 0. `beta = f64::INFINITY` (or the [`zero`]
/// constructor) gives the noise-free path used by deterministic reductions.
///
/// [`zero`]: BrownianPath::zero
#[derive(Clone, Debug)]
pub struct BrownianPath {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
    pub beta: f64,
    origin: usize,
    /// Keys any deterministic refinement of this path (sub-step bridges).
    pub refine_key: u64,
}

impl BrownianPath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.dt * (self.values.len() - 1) as f64
    }

    pub fn origin_index(&self) -> usize {
        self.origin
    }

    /// Grid index of time `t` if `t` lies on the mesh (within 1e-9·dt).
    pub fn grid_index(&self, t: f64) -> Option<usize> {
        let x = (t - self.t0) / self.dt;
        let k = x.round();
        if (x - k).abs() < 1e-6 && k >= 0.0 && (k as usize) < self.values.len() {
            Some(k as usize)
        } else {
            None
        }
    }

    /// B(t) by linear interpolation; `t` must lie inside the stored domain.
    pub fn value(&self, t: f64) -> Result<f64> {
        let x = (t - self.t0) / self.dt;
        if x < -1e-9 || x > (self.values.len() - 1) as f64 + 1e-9 {
            return domain_err(format!(
                "BrownianPath::value: t = {t} outside [{}, {}]",
                self.t0,
                self.t_end()
            ));
        }
        let x = x.clamp(0.0, (self.values.len() - 1) as f64);
        let k = (x.floor() as usize).min(self.values.len() - 2);
        let frac = x - k as f64;
        Ok(self.values[k] * (1.0 - frac) + self.values[k + 1] * frac)
    }

    /// The noise-free path (B ≡ 0, β = ∞).
    pub fn zero(t0: f64, t1: f64, dt: f64) -> Result<BrownianPath> {
        let n = steps(t0, t1, dt)?;
        Ok(BrownianPath {
            t0,
            dt,
            values: vec![0.0; n + 1],
            beta: f64::INFINITY,
            origin: 0,
            refine_key: 0,
        })
    }
}

fn steps(t0: f64, t1: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || t1 <= t0 {
        return domain_err(format!("invalid grid: t0 = {t0}, t1 = {t1}, dt = {dt}"));
    }
    Ok(((t1 - t0) / dt - 1e-9).ceil() as usize)
}

/// Forward Brownian path on [t0, t1] with B(t0) = 0 and Var(B(t)−B(s)) = (4/β)|t−s|.
pub fn sample_brownian_path(seed: Seed, beta: f64, t0: f64, t1: f64, dt: f64) -> Result<BrownianPath> {
    if !(beta > 0.0) {
        return domain_err(format!("sample_brownian_path: beta = {beta}"));
    }
    let n = steps(t0, t1, dt)?;
    let mut rng = CounterRng::new(seed);
    let sd = (4.0 / beta * dt).sqrt();
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    let mut b = 0.0;
    for _ in 0..n {
        b += sample_gaussian(&mut rng, 0.0, sd);
        values.push(b);
    }
    Ok(BrownianPath {
        t0,
        dt,
        values,
        beta,
        origin: 0,
        refine_key: rng.key(),
    })
}

/// Edge Brownian path built from ensemble walks.
///
/// `xwalk[k]` and `ywalk[k]` are the cumulative walks X̂_k, Ŷ_k for
/// k = 0..=np (with X̂_0 = 0). The path is
///
/// B(t) = √(2/β)·np^{−1/6}·( sign·(X̂(np − t·np^{1/3}) − X̂(np)) + Ŷ(np − t·np^{1/3}) − Ŷ(np) ),
///
/// linear in t between walk points, so at walk mesh times it is an exact
/// function of the ensemble noise. When `dt_out` is finer than the walk mesh
/// np^{−1/3}, interior points are filled with Brownian-bridge noise keyed by
/// `seed` and the cell index (deterministic, independent of evaluation order).
pub fn edge_brownian_from_walk(
    xwalk: &[f64],
    ywalk: &[f64],
    np: usize,
    beta: f64,
    sign: f64,
    dt_out: f64,
    t_max: f64,
    seed: Seed,
) -> Result<BrownianPath> {
    if xwalk.len() < np + 1 || ywalk.len() < np + 1 {
        return domain_err("edge_brownian_from_walk: walks shorter than np + 1");
    }
    if !(beta > 0.0) {
        return domain_err(format!("edge_brownian_from_walk: beta = {beta}"));
    }
    let np_f = np as f64;
    let mesh = np_f.powf(-1.0 / 3.0);
    if t_max / mesh > np_f + 1e-9 {
        return domain_err("edge_brownian_from_walk: t_max reaches below the first walk entry");
    }
    let n = steps(0.0, t_max, dt_out)?;
    let pref = (2.0 / beta).sqrt() * np_f.powf(-1.0 / 6.0);
    let walk_at = |nu: f64| -> f64 {
        let k = (nu.floor() as usize).min(np - 1);
        let frac = nu - k as f64;
        let x = xwalk[k] * (1.0 - frac) + xwalk[k + 1] * frac;
        let y = ywalk[k] * (1.0 - frac) + ywalk[k + 1] * frac;
        pref * (sign * (x - xwalk[np]) + (y - ywalk[np]))
    };
    let mut values = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let t = j as f64 * dt_out;
        values.push(walk_at(np_f - t / mesh));
    }
    // bridge fill inside each walk cell if the output mesh is finer
    if dt_out < mesh - 1e-12 {
        let var_rate = 4.0 / beta;
        let n_cells = (t_max / mesh).ceil() as usize;
        for cell in 0..n_cells {
            let ta = cell as f64 * mesh;
            let tb = ((cell + 1) as f64 * mesh).min(n as f64 * dt_out);
            // interior output indices strictly inside (ta, tb)
            let j_lo = (ta / dt_out + 1.0 - 1e-9).ceil() as usize;
            let j_hi = ((tb / dt_out - 1e-9).floor() as usize).min(n);
            if j_lo > j_hi {
                continue;
            }
            let mut rng = CounterRng::new(seed.child(cell as u64));
            let end_val = walk_at(np_f - tb / mesh);
            let mut prev_t = ta;
            let mut prev_v = walk_at(np_f - ta / mesh);
            for j in j_lo..=j_hi {
                let t = j as f64 * dt_out;
                let h = t - prev_t;
                let l = tb - prev_t;
                let mean = prev_v + (end_val - prev_v) * h / l;
                let sd = (var_rate * h * (l - h) / l).max(0.0).sqrt();
                let v = sample_gaussian(&mut rng, mean, sd);
                values[j] = v;
                prev_t = t;
                prev_v = v;
            }
        }
    }
    Ok(BrownianPath {
        t0: 0.0,
        dt: dt_out,
        values,
        beta,
        origin: 0,
        refine_key: CounterRng::new(seed.child(0xB41D_6E)).key(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counter_stream_is_reproducible_and_jumpable() {
        let seed = Seed::new(7).with_stream(3);
        let mut a = CounterRng::new(seed);
        let first: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let mut b = CounterRng::new(seed);
        let again: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        assert_eq!(first, again);
        let mut c = CounterRng::at(seed, 5);
        assert_eq!(c.next_u64(), first[5]);
    }

    #[test]
    fn streams_and_children_differ() {
        let s = Seed::new(42);
        let a = CounterRng::new(s).next_u64();
        let b = CounterRng::new(s.with_stream(1)).next_u64();
        let c = CounterRng::new(s.child(1)).next_u64();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(b, c);
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = CounterRng::new(Seed::new(11));
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_gaussian(&mut rng, 0.0, 1.0)).collect();
        let mean = crate::stats::mean(&xs);
        let var = crate::stats::variance(&xs);
        assert!(mean.abs() < 3.0 / (n as f64).sqrt(), "mean = {mean}");
        assert!((var - 1.0).abs() < 0.02, "var = {var}");
        // normality screen: skewness and excess kurtosis within 4.5 standard
        // errors (√(6/n) and √(24/n) under the null)
        let skew = xs.iter().map(|x| x.powi(3)).sum::<f64>() / n as f64;
        let kurt = xs.iter().map(|x| x.powi(4)).sum::<f64>() / n as f64;
        let zs = skew / (6.0 / n as f64).sqrt();
        let zk = (kurt - 3.0) / (24.0 / n as f64).sqrt();
        assert!(zs.abs() < 4.5, "skew z = {zs}");
        assert!(zk.abs() < 4.5, "kurtosis z = {zk}");
    }

    #[test]
    fn chi_matches_moments() {
        // E[χ²_α] = α, Var(χ²_α) = 2α
        let mut rng = CounterRng::new(Seed::new(19));
        let alpha = 7.5;
        let n = 100_000;
        let sq: Vec<f64> = (0..n)
            .map(|_| sample_chi(&mut rng, alpha).unwrap().powi(2))
            .collect();
        let mean = crate::stats::mean(&sq);
        let var = crate::stats::variance(&sq);
        assert!((mean - alpha).abs() < 4.0 * (2.0 * alpha / n as f64).sqrt(), "mean = {mean}");
        assert!((var / (2.0 * alpha) - 1.0).abs() < 0.05, "var = {var}");
        assert!(sample_chi(&mut rng, 0.0).is_err());
    }

    #[test]
    fn brownian_path_anchoring_and_interpolation() {
        let p = sample_brownian_path(Seed::new(3), 2.0, -1.0, 2.0, 0.125).unwrap();
        assert_eq!(p.values[0], 0.0);
        assert_eq!(p.value(-1.0).unwrap(), 0.0);
        let mid = 0.5 * (p.values[4] + p.values[5]);
        assert!((p.value(-1.0 + 4.5 * 0.125).unwrap() - mid).abs() < 1e-12);
        assert!(p.value(5.0).is_err());
        assert!(p.value(-1.5).is_err());
    }

    #[test]
    fn brownian_increment_variance() {
        let beta = 3.0;
        let m = 4000;
        let t = 0.75;
        let xs: Vec<f64> = (0..m)
            .map(|i| {
                sample_brownian_path(Seed::new(101).with_stream(i), beta, 0.0, 1.0, 0.25)
                    .unwrap()
                    .value(t)
                    .unwrap()
            })
            .collect();
        let var = crate::stats::variance(&xs);
        let want = 4.0 / beta * t;
        // SE of a variance estimate is var·√(2/m)
        assert!((var - want).abs() < 4.0 * want * (2.0 / m as f64).sqrt(), "var = {var}");
    }

    #[test]
    fn zero_path_is_noise_free() {
        let p = BrownianPath::zero(0.0, 10.0, 0.5).unwrap();
        assert!(p.values.iter().all(|&v| v == 0.0));
        assert!(p.beta.is_infinite());
    }

    #[test]
    fn edge_path_exact_at_walk_points() {
        // iid N(0,1) walks: at walk mesh points the path must be the exact formula
        let np = 1000usize;
        let beta = 2.0;
        let mut rng = CounterRng::new(Seed::new(5));
        let mut xw = vec![0.0];
        let mut yw = vec![0.0];
        for _ in 0..np {
            xw.push(xw.last().unwrap() + sample_gaussian(&mut rng, 0.0, 1.0));
            yw.push(yw.last().unwrap() + sample_gaussian(&mut rng, 0.0, 1.0));
        }
        let mesh = (np as f64).powf(-1.0 / 3.0);
        let p = edge_brownian_from_walk(&xw, &yw, np, beta, 1.0, mesh / 8.0, 2.0, Seed::new(77)).unwrap();
        assert_eq!(p.value(0.0).unwrap(), 0.0);
        let pref = (2.0f64 / beta).sqrt() * (np as f64).powf(-1.0 / 6.0);
        for k in [1usize, 5, 17] {
            let t = k as f64 * mesh;
            let idx = np - k;
            let want = pref * ((xw[idx] - xw[np]) + (yw[idx] - yw[np]));
            let got = p.value(t).unwrap();
            assert!((got - want).abs() < 1e-10, "walk point {k}: {got} vs {want}");
        }
    }

    #[test]
    fn edge_path_bridge_variance() {
        // across many ensembles, Var B(t) = (4/β)t at and between walk points
        let np = 512usize;
        let beta = 2.0;
        let m = 3000;
        let mesh = (np as f64).powf(-1.0 / 3.0);
        let t_probe = 1.37 * mesh; // strictly inside a bridge cell
        let xs: Vec<f64> = (0..m)
            .map(|i| {
                let mut rng = CounterRng::new(Seed::new(400).with_stream(i));
                let mut xw = vec![0.0];
                let mut yw = vec![0.0];
                for _ in 0..np {
                    xw.push(xw.last().unwrap() + sample_gaussian(&mut rng, 0.0, 1.0));
                    yw.push(yw.last().unwrap() + sample_gaussian(&mut rng, 0.0, 1.0));
                }
                edge_brownian_from_walk(&xw, &yw, np, beta, 1.0, mesh / 6.0, 1.0, Seed::new(9).with_stream(i))
                    .unwrap()
                    .value(t_probe)
                    .unwrap()
            })
            .collect();
        let var = crate::stats::variance(&xs);
        let want = 4.0 / beta * t_probe;
        assert!((var - want).abs() < 5.0 * want * (2.0 / m as f64).sqrt(), "var = {var}, want = {want}");
    }

    #[test]
    fn quantile_coupling_median_and_law() {
        // u = 1/2 maps to (normalized χ² median, 0)
        let (y, g) = quantile_couple_gamma_at(0.5, 4, 2.0).unwrap();
        assert_eq!(g, 0.0);
        // χ²₆ median (tools/oracles.py): 5.348120627447116
        let want = (5.348120627447116 - 6.0) / 12.0f64.sqrt();
        assert!((y - want).abs() < 1e-9, "y = {y}");
        // monotone in u
        let (y1, g1) = quantile_couple_gamma_at(0.31, 9, 1.0).unwrap();
        let (y2, g2) = quantile_couple_gamma_at(0.64, 9, 1.0).unwrap();
        assert!(y1 < y2 && g1 < g2);
        // marginal law matches the χ sampling route
        let k = 6usize;
        let beta = 2.0;
        let m = 2000;
        let mut rng = CounterRng::new(Seed::new(23));
        let nu = beta * (k - 1) as f64;
        let via_chi: Vec<f64> = (0..m)
            .map(|_| (sample_chi(&mut rng, nu).unwrap().powi(2) - nu) / (2.0 * nu).sqrt())
            .collect();
        let via_quantile: Vec<f64> = (0..m)
            .map(|_| quantile_couple_gamma(&mut rng, k, beta).unwrap().0)
            .collect();
        let d = crate::stats::ks_two_sample(&via_chi, &via_quantile);
        assert!(d < crate::stats::ks_critical_two(m), "ks = {d}");
    }

    #[test]
    fn coupling_discrepancy_shrinks_with_k() {
        // |Y_k − g_k| is the KMT-style coupling error; it should drop like k^{-1/2}
        let beta = 2.0;
        let m = 400;
        let gap = |k: usize| -> f64 {
            let mut rng = CounterRng::new(Seed::new(55).child(k as u64));
            (0..m)
                .map(|_| {
                    let (y, g) = quantile_couple_gamma(&mut rng, k, beta).unwrap();
                    (y - g).abs()
                })
                .sum::<f64>()
                / m as f64
        };
        let g10 = gap(10);
        let g1000 = gap(1000);
        assert!(g1000 < 0.4 * g10, "gap(10) = {g10}, gap(1000) = {g1000}");
    }
}
