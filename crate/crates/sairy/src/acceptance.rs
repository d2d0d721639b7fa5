//! The acceptance gates: one function per criterion, each returning a
//! self-describing result record.
//!
//! Everything here is a deterministic gate — fixed seeds, pinned
//! tolerances — so a failure is a regression, never a re-roll. The
//! statistical criteria state their critical values from the sample sizes
//! actually used; the `Quick` profile shrinks the Monte Carlo layers for an
//! interactive pass and adjusts those critical values accordingly, while
//! `Full` runs the sizes the gates were calibrated at.
//!
//! The reproducibility criterion (two invocations of the batch driver
//! producing byte-identical files) needs a binary to spawn, so it lives
//! with the driver; everything else is in-process and collected by
//! [`run_all`].

use rayon::prelude::*;

use crate::edgecouple::{clt_statistic, planar_ratio_check, psi_vs_sai, CoupledRun, JacobiEnsemble};
use crate::rng::{sample_brownian_path, BrownianPath, Seed};
use crate::{airy, gbe, riccati, sae, sai, stats, Result};

/// Monte Carlo sizing for the suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// Interactive sizes, minutes in total; critical values rescale with M.
    Quick,
    /// Calibrated sizes; the gates quoted in the documentation.
    Full,
}

/// Outcome of one criterion: what was measured, what was required, and
/// whether the requirement held.
#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub index: usize,
    pub name: &'static str,
    /// measured quantities, human-readable
    pub metric: String,
    /// the inequality that was tested
    pub gate: String,
    pub pass: bool,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{:>2}  {:<22} {}  {}  [{}]  ({:.1} s)",
            self.index,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.metric,
            self.gate,
            self.seconds
        )
    }
}

/// Number of in-process criteria (the reproducibility check is the
/// driver's, and brings the documented total to 13).
pub const COUNT: usize = 12;

/// Run criteria 1–12 in order. Never panics on a numerical error: a failed
/// construction is reported as a failing criterion with the error text in
/// the metric field.
pub fn run_all(profile: Profile) -> Vec<CriterionResult> {
    (1..=COUNT).map(|i| criterion(i, profile)).collect()
}

/// Run a single criterion by its 1-based index.
pub fn criterion(index: usize, profile: Profile) -> CriterionResult {
    let started = std::time::Instant::now();
    let body: fn(Profile) -> Result<(String, String, bool)> = match index {
        1 => c01_airy_reduction,
        2 => c02_wronskian_kernel,
        3 => c03_recurrence_determinant,
        4 => c04_plancherel_rotach,
        5 => c05_mean_char_poly,
        6 => c06_edge_clt,
        7 => c07_counting_equivalence,
        8 => c08_tracy_widom,
        9 => c09_envelope,
        10 => c10_coupling_trend,
        11 => c11_planar_ratio,
        12 => c12_shift_invariance,
        _ => |_| Ok((String::from("no such criterion"), String::new(), false)),
    };
    let name = NAMES.get(index.wrapping_sub(1)).copied().unwrap_or("unknown");
    let (metric, gate, pass) = match body(profile) {
        Ok(r) => r,
        Err(e) => (format!("error: {e}"), String::from("construction must succeed"), false),
    };
    CriterionResult { index, name, metric, gate, pass, seconds: started.elapsed().as_secs_f64() }
}

const NAMES: [&str; COUNT] = [
    "airy-reduction",
    "wronskian-kernel",
    "recurrence-det",
    "plancherel-rotach",
    "mean-char-poly",
    "edge-clt",
    "counting-equiv",
    "tracy-widom",
    "envelope",
    "coupling-trend",
    "planar-ratio",
    "shift-invariance",
];

// 1. noise-free solver reproduces Ai over a long window

fn c01_airy_reduction(_: Profile) -> Result<(String, String, bool)> {
    let dt = 1e-4;
    let path = BrownianPath::zero(-5.0, 8.0, dt)?;
    let top = airy::airy(8.0)?;
    let sol = sae::solve_ivp(&path, 0.0, 8.0, top.ai, top.ai_prime, -5.0, 8.0)?;
    let mut sup = 0.0f64;
    for i in (0..sol.len()).step_by(10) {
        let t = -5.0 + dt * i as f64;
        sup = sup.max((sol.phi[i] - airy::airy(t)?.ai).abs());
    }
    Ok((format!("sup |φ − Ai| = {sup:.2e} on [−5, 8], dt = 1e−4"), "< 1e-3".into(), sup < 1e-3))
}

// 2. Wronskian ≡ 1 and the two-point kernel identities, random data

fn c02_wronskian_kernel(_: Profile) -> Result<(String, String, bool)> {
    let dt = 1e-3;
    let mut worst_w = 0.0f64;
    let mut worst_rel = 0.0f64;
    let mut draw = crate::rng::CounterRng::new(Seed::new(7102));
    for rep in 0..20u64 {
        let lambda = 4.0 * draw.uniform() - 2.0;
        let beta = 0.5 + 3.5 * draw.uniform();
        let path = sample_brownian_path(Seed::new(7100).child(rep), beta, -2.0, 2.0, dt)?;
        let pair = sae::fundamental_pair(&path, lambda, 0.5, -2.0, 2.0)?;
        for i in (0..pair.f.len()).step_by(40) {
            let t = -2.0 + dt * i as f64;
            worst_w = worst_w.max((pair.wronskian_at(t)? - 1.0).abs());
        }
        // base-point independence of the kernel, and the derivative
        // identities tying it to fresh fundamental pairs
        let other = sae::fundamental_pair(&path, lambda, -1.0, -2.0, 2.0)?;
        for &(t, u) in &[(1.5, -0.9), (-1.3, 1.1), (1.9, 0.4)] {
            let a = pair.kernel(t, u)?;
            let b = other.kernel(t, u)?;
            worst_rel = worst_rel.max((a - b).abs() / a.abs().max(1e-3));

            let at_u = sae::fundamental_pair(&path, lambda, u, -2.0, 2.0)?;
            let du = pair.kernel_du(t, u)?;
            worst_rel =
                worst_rel.max((du - at_u.f.phi_at(t)?).abs() / at_u.f.phi_at(t)?.abs().max(1e-3));
            let dtdu = pair.kernel_dtdu(t, u)?;
            worst_rel = worst_rel
                .max((dtdu - at_u.f.dphi_at(t)?).abs() / at_u.f.dphi_at(t)?.abs().max(1e-3));
            let at_t = sae::fundamental_pair(&path, lambda, t, -2.0, 2.0)?;
            let dtk = pair.kernel_dt(t, u)?;
            worst_rel =
                worst_rel.max((dtk + at_t.f.phi_at(u)?).abs() / at_t.f.phi_at(u)?.abs().max(1e-3));
        }
    }
    let pass = worst_w < 10.0 * dt && worst_rel < 1e-6;
    Ok((
        format!("max |𝒲 − 1| = {worst_w:.2e}, worst identity rel. err = {worst_rel:.2e}"),
        format!("𝒲 within {:.0e}, identities within 1e-6", 10.0 * dt),
        pass,
    ))
}

// 3. transfer recurrence vs dense determinant, then vs eigenvalues

/// Dense determinant by LU with partial pivoting — the independent oracle
/// for the recurrence at toy sizes.
fn dense_det(a: &mut [Vec<f64>]) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

fn c03_recurrence_determinant(_: Profile) -> Result<(String, String, bool)> {
    // toy sizes against the dense determinant
    let mut worst_rel = 0.0f64;
    for n in 2..=8usize {
        let m = gbe::sample_tridiag(Seed::new(7300 + n as u64), n, n, 2.0)?;
        for &z in &[-1.6, -0.4, 0.2, 0.9, 1.8] {
            let rec = gbe::char_poly(&m, z).to_f64();
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                dense[i][i] = z - m.diag[i];
                if i + 1 < n {
                    dense[i][i + 1] = -m.off[i];
                    dense[i + 1][i] = -m.off[i];
                }
            }
            let det = dense_det(&mut dense);
            worst_rel = worst_rel.max((rec - det).abs() / det.abs().max(1e-300));
        }
    }

    // recurrence zeros against the Sturm-bisection eigenvalues at N = 2000
    let n = 2000;
    let m = gbe::sample_tridiag(Seed::new(7333), n, n, 2.0)?;
    let eigs = m.eigenvalues(1e-13)?;
    let mut worst_zero = 0.0f64;
    for &e in &eigs {
        let f = |z: f64| gbe::char_poly(&m, z).signum();
        let (lo, hi) = (e - 1e-6, e + 1e-6);
        if f(lo) == f(hi) {
            worst_zero = f64::INFINITY;
            break;
        }
        let root = stats::bisect(f, lo, hi, 1e-12, 80)?;
        worst_zero = worst_zero.max((root - e).abs());
    }
    let pass = worst_rel < 1e-10 && worst_zero < 1e-8;
    Ok((
        format!(
            "dense-det rel. err = {worst_rel:.2e} (N ≤ 8), worst zero gap = {worst_zero:.2e} (N = 2000)"
        ),
        "rel < 1e-10, zeros within 1e-8".into(),
        pass,
    ))
}

// 4. Plancherel–Rotach edge asymptotics of the weighted Hermite polynomial

fn c04_plancherel_rotach(_: Profile) -> Result<(String, String, bool)> {
    let n = 4000;
    let scale = 2.0 * (n as f64).powf(2.0 / 3.0);
    let mut sup = 0.0f64;
    let mut lam = -2.0;
    while lam <= 2.0 + 1e-9 {
        let z = 1.0 + lam / scale;
        let v = gbe::weighted_hermite(n, n, z)?;
        sup = sup.max((v - airy::airy(lam)?.ai).abs());
        lam += 0.05;
    }
    Ok((
        format!("sup |w·π − Ai| = {sup:.2e} over λ ∈ [−2, 2], N = 4000"),
        "< 0.02".into(),
        sup < 0.02,
    ))
}

// 5. the martingale identity E Φ = π at three (N, z)

fn c05_mean_char_poly(profile: Profile) -> Result<(String, String, bool)> {
    let m = match profile {
        Profile::Quick => 20_000,
        Profile::Full => 100_000,
    };
    // z well outside the support keeps log Φ's variance ~0.5, so the
    // t-statistic is close to normal and a 3-SE gate is stable; close to the
    // edge the ratio is nearly lognormal and 3 SE becomes a coin flip
    let mut worst_pull = 0.0f64;
    for (i, &(n, z)) in [(30usize, 1.5f64), (100, 1.3), (250, 1.2)].iter().enumerate() {
        let (mean, se) = gbe::mean_char_poly(Seed::new(7500).child(i as u64), n, n, 2.0, z, m)?;
        let pi = gbe::hermite_pi(n, n, z).to_f64();
        worst_pull = worst_pull.max((mean - pi).abs() / se);
    }
    Ok((
        format!("max |mean Φ − π| / SE = {worst_pull:.2} at M = {m}"),
        "≤ 3 standard errors".into(),
        worst_pull <= 3.0,
    ))
}

// 6. the edge CLT for log |Ψ_N(0)|

fn c06_edge_clt(profile: Profile) -> Result<(String, String, bool)> {
    let (m, n) = match profile {
        Profile::Quick => (2_000, 100_000),
        Profile::Full => (10_000, 100_000),
    };
    let want_var = (n as f64).ln() / 3.0;
    let two = clt_statistic(Seed::new(7600), n, 2.0, m)?;
    let one = clt_statistic(Seed::new(7601), n, 1.0, m)?;
    let ratio = one.var_log / two.var_log;
    // the location of log |Ψ| carries an O(1) shift the theorem does not
    // pin down, so the shape gate runs on the studentized sample
    let ks_gate = (0.05f64).max(stats::ks_critical_one(m));
    let pass = two.ks_studentized < ks_gate
        && (two.var_log - want_var).abs() < 0.15 * want_var
        && (1.7..=2.3).contains(&ratio);
    Ok((
        format!(
            "KS = {:.4}, var = {:.2} (target {want_var:.2}), β-ratio = {ratio:.2}, M = {m}",
            two.ks_studentized, two.var_log
        ),
        format!("KS < {ks_gate:.3}, var within 15%, ratio in [1.7, 2.3]"),
        pass,
    ))
}

// 7. the Riccati count and the SAi λ-zero scan locate the same points

fn c07_counting_equivalence(_: Profile) -> Result<(String, String, bool)> {
    let reps = 100u64;
    let results: Vec<(f64, usize)> = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<(f64, usize)> {
            // the scan's backward construction seeds at λ + t_from, and the
            // third point reaches λ ≈ −7, so t_from = 8 would leave an
            // e^{−(4/3)(λ+T)^{3/2}} ≈ 1e-2 seeding bias on deep points
            let path = sample_brownian_path(Seed::new(7700).child(rep), 2.0, 0.0, 12.0, 5e-4)?;
            let r = riccati::sample_airy_beta(&path, 3, 1e-5)?;
            let s = sai::sai_zero_scan(&path, 10.0, 4.0, 3, 0.25, 1e-6)?;
            let mut gap = 0.0f64;
            let mut viol = 0usize;
            for j in 0..3 {
                gap = gap.max((r[j] - s[j]).abs());
                if j + 1 < 3 && (r[j] <= r[j + 1] || s[j] <= s[j + 1]) {
                    viol += 1;
                }
            }
            Ok((gap, viol))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = results.iter().map(|r| r.0).fold(0.0f64, f64::max);
    let viols: usize = results.iter().map(|r| r.1).sum();
    Ok((
        format!("worst top-3 gap = {worst:.2e}, ordering violations = {viols} over {reps} runs"),
        "gap < 1e-2, zero violations".into(),
        worst < 1e-2 && viols == 0,
    ))
}

// 8. Tracy–Widom cross-check: Riccati route vs the tridiagonal eigensolver

fn c08_tracy_widom(profile: Profile) -> Result<(String, String, bool)> {
    let m = match profile {
        Profile::Quick => 2_000,
        Profile::Full => 10_000,
    };
    let n = 2000;
    let riccati_pts: Vec<f64> = (0..m as u64)
        .into_par_iter()
        .map(|rep| riccati::largest_point(Seed::new(7800).child(rep), 2.0, 12.0, 1e-3, 1e-4))
        .collect::<Result<Vec<_>>>()?;
    let eig_pts: Vec<f64> = (0..m as u64)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let ens = JacobiEnsemble::new(Seed::new(7801).child(rep), n, 2.0, false)?;
            Ok(gbe::rescale_to_edge(ens.to_tridiag(n)?.largest(1e-11)?, n))
        })
        .collect::<Result<Vec<_>>>()?;
    let ks = stats::ks_two_sample(&riccati_pts, &eig_pts);
    let gate = (0.03f64).max(stats::ks_critical_two(m));
    Ok((
        format!("two-sample KS = {ks:.4} at M = {m}, N = {n}"),
        format!("< {gate:.3}"),
        ks < gate,
    ))
}

// 9. the envelope identity concentrates, with the frozen tail constant

fn c09_envelope(profile: Profile) -> Result<(String, String, bool)> {
    let reps = match profile {
        Profile::Quick => 300,
        Profile::Full => 1_000,
    };
    // one noise window per seed, seeded at its end (t = 12); the three
    // T_from values share the construction and differ only in where the sup
    // starts, exactly as the tail bound quantifies over t ≥ T
    let devs: Vec<[f64; 3]> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| -> Result<[f64; 3]> {
            let path = sample_brownian_path(Seed::new(7900).child(rep), 2.0, 0.0, 12.0, 1e-3)?;
            Ok([
                sai::envelope_sup_deviation(&path, 0.0, 6.0, 0)?,
                sai::envelope_sup_deviation(&path, 0.0, 8.0, 0)?,
                sai::envelope_sup_deviation(&path, 0.0, 10.0, 0)?,
            ])
        })
        .collect::<Result<_>>()?;
    let band = (8.0f64).powf(-0.5);
    let inside = devs.iter().filter(|d| d[1] < band).count();
    let column = |j: usize| stats::median(&devs.iter().map(|d| d[j]).collect::<Vec<_>>());
    let (m6, m8, m10) = (column(0), column(1), column(2));
    let pass = inside * 100 >= reps * 99 && m6 > m8 && m8 > m10;
    Ok((
        format!(
            "{inside}/{reps} inside the T^(−1/2) band at T = 8; medians {m6:.3} → {m8:.3} → {m10:.3}"
        ),
        format!("≥ 99% inside {band:.3}, medians strictly decreasing over T ∈ {{6, 8, 10}}"),
        pass,
    ))
}

// 10. the coupled pipeline: monotone deviation trend plus deterministic floor

fn c10_coupling_trend(profile: Profile) -> Result<(String, String, bool)> {
    let m = match profile {
        Profile::Quick => 512,
        Profile::Full => 2_048,
    };
    let t_grid: Vec<f64> = (0..=12).map(|j| 0.25 * j as f64).collect();
    let lambda_grid = [-1.0, 0.0, 1.0];
    let mut medians = Vec::new();
    for &n in &[100_000usize, 400_000, 800_000] {
        let mut sups: Vec<f64> = (0..m as u64)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let ens = JacobiEnsemble::new(Seed::new(4200 + i), n, 2.0, false)?;
                let run = CoupledRun::new(ens, 1.0, 0.1, 2)?;
                Ok(psi_vs_sai(&run, &t_grid, &lambda_grid)?.sup)
            })
            .collect::<Result<Vec<_>>>()?;
        sups.sort_by(f64::total_cmp);
        medians.push(sups[m / 2]);
    }
    let floor = {
        let run = CoupledRun::new(JacobiEnsemble::noise_free(100_000), 1.0, 0.1, 2)?;
        psi_vs_sai(&run, &t_grid, &lambda_grid)?.sup
    };
    let monotone = medians[0] > medians[1] && medians[1] > medians[2];
    let ratio = medians[2] / medians[0];
    let pass = monotone && ratio < 0.95 && floor < 0.02;
    Ok((
        format!(
            "medians {:.4} → {:.4} → {:.4} (ratio {ratio:.2}), noise-free floor {floor:.4}, M = {m}",
            medians[0], medians[1], medians[2]
        ),
        "strictly decreasing, ratio < 0.95, floor < 0.02".into(),
        pass,
    ))
}

// 11. the planar martingale ratio concentrates at 1, tighter as N grows

fn c11_planar_ratio(profile: Profile) -> Result<(String, String, bool)> {
    let m = match profile {
        Profile::Quick => 300,
        Profile::Full => 1_000,
    };
    let median_at = |n: usize, seed: u64| -> Result<f64> {
        let devs: Vec<f64> = (0..m as u64)
            .into_par_iter()
            .map(|rep| -> Result<f64> {
                let ens = JacobiEnsemble::new(Seed::new(seed).child(rep), n, 2.0, false)?;
                Ok(planar_ratio_check(&ens, &[1.5])?[0])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(stats::median(&devs))
    };
    let small = median_at(10_000, 7910)?;
    let large = median_at(20_000, 7911)?;
    let pass = small < 0.1 && large < small;
    Ok((
        format!("median |ratio − 1| = {small:.4} at N = 1e4, {large:.4} at N = 2e4, M = {m}"),
        "< 0.1 and decreasing in N".into(),
        pass,
    ))
}

// 12. restriction + shift leaves the top point's law alone

fn c12_shift_invariance(profile: Profile) -> Result<(String, String, bool)> {
    let m = match profile {
        Profile::Quick => 3_000,
        Profile::Full => 10_000,
    };
    let sigma = 1.0;
    let plain: Vec<f64> = (0..m as u64)
        .into_par_iter()
        .map(|rep| riccati::largest_point(Seed::new(7950).child(rep), 2.0, 12.0, 2e-3, 1e-3))
        .collect::<Result<Vec<_>>>()?;
    let shifted: Vec<f64> = (0..m as u64)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let path =
                sample_brownian_path(Seed::new(7951).child(rep), 2.0, sigma, sigma + 12.0, 2e-3)?;
            Ok(riccati::sample_airy_beta(&path, 1, 1e-3)?[0] + sigma)
        })
        .collect::<Result<Vec<_>>>()?;
    let ks = stats::ks_two_sample(&plain, &shifted);
    let gate = stats::ks_critical_two(m);
    Ok((
        format!("two-sample KS = {ks:.4} at σ = 1, M = {m}"),
        format!("< {gate:.4} (1% critical)"),
        ks < gate,
    ))
}
