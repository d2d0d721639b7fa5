//! Reference Airy functions Ai, Bi and derivatives on the real line.
//!
//! Power series with compensated (double-double) accumulation for |x| ≤ 9,
//! asymptotic expansions beyond. The split point keeps the worst-case series
//! cancellation (e^{2ξ} ≈ e^{36} at x = 9) far below the compensated
//! precision while the asymptotic series' smallest term there is ~2e-16.

use crate::{domain_err, Result};

/// Values of the Airy pair at a point.
///
/// `bi`/`bi_prime` overflow for x ≳ 104; in the asymptotic regime the log
/// forms are always provided and remain finite up to the domain edge.
#[derive(Clone, Copy, Debug)]
pub struct AiryValue {
    pub x: f64,
    pub ai: f64,
    pub ai_prime: f64,
    pub bi: f64,
    pub bi_prime: f64,
    pub ln_bi: Option<f64>,
    pub ln_bi_prime: Option<f64>,
}

const DOMAIN: f64 = 1.0e4;
const CROSSOVER: f64 = 9.0;

// double-double constants (tools/oracles.py)
const AI0: Dd = Dd { hi: 0.3550280538878172, lo: 2.0523363243621184e-17 };
const AIP0: Dd = Dd { hi: -0.2588194037928068, lo: 2.5222431116108315e-17 };
const BI0: Dd = Dd { hi: 0.6149266274460007, lo: 5.0899207794891435e-17 };
const BIP0: Dd = Dd { hi: 0.4482883573538264, lo: -2.5363237774417287e-17 };

/// Evaluate Ai, Ai′, Bi, Bi′ at `x`, |x| ≤ 10⁴.
pub fn airy(x: f64) -> Result<AiryValue> {
    if !x.is_finite() || x.abs() > DOMAIN {
        return domain_err(format!("airy: x = {x} outside |x| <= {DOMAIN}"));
    }
    if x.abs() <= CROSSOVER {
        Ok(series(x))
    } else if x > 0.0 {
        Ok(asymptotic_pos(x))
    } else {
        Ok(asymptotic_neg(x))
    }
}

pub(crate) fn ai(x: f64) -> f64 {
    airy(x).unwrap().ai
}

pub(crate) fn aip(x: f64) -> f64 {
    airy(x).unwrap().ai_prime
}

/// ln Bi(x) for x in the growing regime (finite even where Bi overflows).
pub(crate) fn ln_bi(x: f64) -> f64 {
    let v = airy(x).unwrap();
    v.ln_bi.unwrap_or_else(|| v.bi.ln())
}

fn series(x: f64) -> AiryValue {
    // f″ = xf with (1,0) data, g″ = xg with (0,1); all four sums share x³ terms
    let x3 = Dd::from(x).mul(Dd::from(x)).mul(Dd::from(x));
    let mut f = Dd::from(1.0);
    let mut fp = Dd::from(0.0);
    let mut g = Dd::from(x);
    let mut gp = Dd::from(1.0);
    let mut tf = Dd::from(1.0); // a_k x^{3k}
    let mut tfp = Dd::from(0.5 * x * x); // a_k·3k·x^{3k−1}, first term k = 1
    let mut tg = Dd::from(x); // b_k x^{3k+1}
    let mut tgp = Dd::from(1.0); // b_k(3k+1)x^{3k}
    fp = fp.add(tfp);
    for k in 0u32..64 {
        let kf = k as f64;
        tf = tf.mul(x3).div_f64((3.0 * kf + 2.0) * (3.0 * kf + 3.0));
        tg = tg.mul(x3).div_f64((3.0 * kf + 3.0) * (3.0 * kf + 4.0));
        tgp = tgp.mul(x3).div_f64((3.0 * kf + 3.0) * (3.0 * kf + 1.0));
        if k >= 1 {
            tfp = tfp.mul(x3).div_f64((3.0 * kf + 2.0) * 3.0 * kf);
        }
        f = f.add(tf);
        g = g.add(tg);
        gp = gp.add(tgp);
        if k >= 1 {
            fp = fp.add(tfp);
        }
        let biggest = tf.hi.abs().max(tg.hi.abs()).max(tgp.hi.abs()).max(tfp.hi.abs());
        if biggest < 1e-40 * (1.0 + f.hi.abs() + g.hi.abs()) {
            break;
        }
    }
    let ai = AI0.mul(f).add(AIP0.mul(g)).to_f64();
    let aip = AI0.mul(fp).add(AIP0.mul(gp)).to_f64();
    let bi = BI0.mul(f).add(BIP0.mul(g)).to_f64();
    let bip = BI0.mul(fp).add(BIP0.mul(gp)).to_f64();
    AiryValue {
        x,
        ai,
        ai_prime: aip,
        bi,
        bi_prime: bip,
        ln_bi: (bi > 0.0).then(|| bi.ln()),
        ln_bi_prime: (bip > 0.0).then(|| bip.ln()),
    }
}

/// Σ (±1)^k u_k ξ^{−k} and the v-analogue, truncated at the smallest term.
fn asymp_sums(xi: f64, alternating: bool) -> (f64, f64) {
    let mut su = 1.0;
    let mut sv = 1.0;
    let mut u = 1.0;
    let mut last = f64::INFINITY;
    for k in 1u32..=40 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / (216.0 * kf * (2.0 * kf - 1.0));
        let term = u / xi.powi(k as i32);
        if term.abs() >= last {
            break; // divergent tail reached
        }
        last = term.abs();
        let s = if alternating && k % 2 == 1 { -1.0 } else { 1.0 };
        su += s * term;
        sv += s * term * (-(6.0 * kf + 1.0) / (6.0 * kf - 1.0));
        if term.abs() < 1e-18 {
            break;
        }
    }
    (su, sv)
}

fn asymptotic_pos(x: f64) -> AiryValue {
    let xi = 2.0 / 3.0 * x.powf(1.5);
    let (su_m, sv_m) = asymp_sums(xi, true);
    let (su_p, sv_p) = asymp_sums(xi, false);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let root4 = x.powf(0.25);
    let ai = (-xi).exp() * su_m / (2.0 * sqrt_pi * root4);
    let aip = -(-xi).exp() * sv_m * root4 / (2.0 * sqrt_pi);
    let ln_bi = xi + (su_p / (sqrt_pi * root4)).ln();
    let ln_bip = xi + (sv_p * root4 / sqrt_pi).ln();
    AiryValue {
        x,
        ai,
        ai_prime: aip,
        bi: ln_bi.exp(),
        bi_prime: ln_bip.exp(),
        ln_bi: Some(ln_bi),
        ln_bi_prime: Some(ln_bip),
    }
}

fn asymptotic_neg(x: f64) -> AiryValue {
    let z = -x;
    let om = 2.0 / 3.0 * z.powf(1.5);
    // split u/v sums into even and odd parts with alternating signs
    let mut se_u = 1.0;
    let mut so_u = 0.0;
    let mut se_v = 1.0;
    let mut so_v = 0.0;
    let mut u = 1.0;
    let mut last = f64::INFINITY;
    for k in 1u32..=40 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / (216.0 * kf * (2.0 * kf - 1.0));
        let term = u / om.powi(k as i32);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        let v_term = term * (-(6.0 * kf + 1.0) / (6.0 * kf - 1.0));
        let sign = if (k / 2) % 2 == 1 { -1.0 } else { 1.0 }; // (−1)^{k/2}
        if k % 2 == 0 {
            se_u += sign * term;
            se_v += sign * v_term;
        } else {
            so_u += sign * term;
            so_v += sign * v_term;
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    let chi = om + std::f64::consts::FRAC_PI_4;
    let (sin, cos) = chi.sin_cos();
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let root4 = z.powf(0.25);
    let ai = (sin * se_u - cos * so_u) / (sqrt_pi * root4);
    let bi = (cos * se_u + sin * so_u) / (sqrt_pi * root4);
    let aip = -(cos * se_v + sin * so_v) * root4 / sqrt_pi;
    let bip = (sin * se_v - cos * so_v) * root4 / sqrt_pi;
    AiryValue {
        x,
        ai,
        ai_prime: aip,
        bi,
        bi_prime: bip,
        ln_bi: None,
        ln_bi_prime: None,
    }
}

// ---- minimal double-double arithmetic (enough for the series) ----

#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e2) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e2 + f);
        Dd { hi, lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let (p, e) = two_prod(q1, d);
        let r = (self.hi - p) + (self.lo - e);
        let (hi, lo) = quick_two_sum(q1, r / d);
        Dd { hi, lo }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // (x, Ai, Ai', Bi, Bi') — tools/oracles.py
    const TABLE: [(f64, f64, f64, f64, f64); 19] = [
        (-9999.5, 0.013085787097520297, 5.487978116202853, -0.054881149936308785, 1.308544622778196),
        (-5000.25, 0.045422988004773894, -3.4916614565050876, 0.049378347544025904, 3.2119730490444436),
        (-100.0, 0.1767533932395529, -0.2422970316605838, 0.02427388768016013, 1.7675948932340608),
        (-12.0, -0.06655517505437313, 1.0231104533679707, -0.2957199120780731, -0.23673219783112331),
        (-7.25, 0.32374057321118616, -0.30022899504735406, 0.11559126100955656, 0.8760287141075456),
        (-5.0, 0.35076100902411433, 0.32719281855444315, -0.13836913490160058, 0.7784117730018992),
        (-2.338107410459767, 2.743319340666283e-17, 0.7012108227206914, -0.45394320205833577, -0.04598212182185804),
        (-1.0, 0.5355608832923521, -0.01016056711664521, 0.1039973894969446, 0.5923756264227924),
        (-0.5, 0.4757280916105396, -0.20408167033954738, 0.38035265975105387, 0.5059337136238472),
        (0.0, 0.3550280538878172, -0.2588194037928068, 0.6149266274460007, 0.4482883573538264),
        (0.5, 0.23169360648083348, -0.2249105326646839, 0.8542770431031554, 0.5445725641405923),
        (1.0, 0.13529241631288141, -0.1591474412967932, 1.2074235949528713, 0.9324359333927756),
        (2.5, 0.01572592338047049, -0.026250881035903232, 6.481660738460579, 9.421423317334302),
        (5.5, 3.368531190859981e-05, -8.046339130556515e-05, 2016.5800386595313, 4632.553733139042),
        (8.0, 4.6922076160992316e-08, -1.3414392979067865e-07, 1199586.00412446, 3354342.3127445388),
        (9.0, 2.47116843087249e-09, -7.480641389658946e-09, 21472868.891435347, 63807489.78090821),
        (10.5, 2.2022745192834015e-11, -7.187696781451567e-11, 2230554441.1366954, 7173692245.283299),
        (12.5, 2.39682782607805e-14, -8.521346564673856e-14, 1878291935622.0518, 6602648681364.295),
        (20.0, 1.6916728686705404e-27, -7.586391625748354e-27, 2.103765049651104e+25, 9.381839336133965e+25),
    ];

    fn check(got: f64, want: f64, scale: f64, rel: f64, what: &str) {
        let err = (got - want).abs() / want.abs().max(scale);
        assert!(err < rel, "{what}: got {got}, want {want} (err {err:.2e})");
    }

    #[test]
    fn matches_reference_table() {
        for &(x, ai, aip, bi, bip) in &TABLE {
            let v = airy(x).unwrap();
            // interior points are solid to ~1e-14; far-oscillatory rows lose
            // digits to phase roundoff in (2/3)|x|^{3/2}
            let rel = if x.abs() > 30.0 { 2e-9 } else { 5e-13 };
            check(v.ai, ai, 1e-3, rel, "ai");
            check(v.ai_prime, aip, 1e-3, rel, "ai'");
            check(v.bi, bi, 1e-3, rel, "bi");
            check(v.bi_prime, bip, 1e-3, rel, "bi'");
        }
    }

    #[test]
    fn wronskian_is_one_over_pi() {
        // Ai·Bi' − Ai'·Bi = 1/π, |x| ≤ 20
        let want = 1.0 / std::f64::consts::PI;
        let mut x = -20.0;
        while x <= 20.0 {
            let v = airy(x).unwrap();
            let w = v.ai * v.bi_prime - v.ai_prime * v.bi;
            assert!((w - want).abs() < 1e-12, "x = {x}: wronskian {w}");
            x += 0.03125;
        }
    }

    #[test]
    fn branches_agree_at_crossover() {
        for &x in &[9.0, -9.0] {
            let s = series(x);
            let a = if x > 0.0 { asymptotic_pos(x) } else { asymptotic_neg(x) };
            check(a.ai, s.ai, 1e-300, 1e-13, "ai crossover");
            check(a.ai_prime, s.ai_prime, 1e-300, 1e-13, "ai' crossover");
            check(a.bi, s.bi, 1e-300, 1e-13, "bi crossover");
            check(a.bi_prime, s.bi_prime, 1e-300, 1e-13, "bi' crossover");
        }
    }

    #[test]
    fn locates_first_zeros() {
        // a_k from tools/oracles.py
        let zeros = [2.338107410459767, 4.08794944413097, 5.520559828095551, 6.786708090071759];
        for (k, &a) in zeros.iter().enumerate() {
            let r = crate::stats::bisect(|x| ai(x), -a - 0.4, -a + 0.4, 1e-14, 200).unwrap();
            assert!((r + a).abs() < 1e-12, "zero {k}: {r}");
        }
    }

    #[test]
    fn log_form_at_large_x() {
        // (x, log Bi, log Bi') — tools/oracles.py; Bi itself overflows past ~104
        for &(x, lb, lbp) in &[
            (110.0, 767.379093972531, 769.7291173183309),
            (400.0, 5331.263115275686, 5334.258816296309),
            (1000.0, 21079.55176732064, 21083.00563705425),
            (10000.0, 666663.7917167349, 666668.3968866708),
        ] {
            let v = airy(x).unwrap();
            assert!(v.bi.is_infinite());
            assert!((v.ln_bi.unwrap() - lb).abs() / lb < 1e-12, "ln_bi({x})");
            assert!((v.ln_bi_prime.unwrap() - lbp).abs() / lbp < 1e-12, "ln_bi'({x})");
        }
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(airy(1.5e4).is_err());
        assert!(airy(f64::NAN).is_err());
    }

    #[test]
    fn ai_decays_and_alternates_signs_left() {
        // sanity on the oscillatory tail: sign changes roughly every π/√|x|
        let v1 = airy(-50.0).unwrap();
        let v2 = airy(-50.0 + std::f64::consts::PI / 50.0f64.sqrt()).unwrap();
        assert!(v1.ai * v2.ai < 0.0);
    }
}
