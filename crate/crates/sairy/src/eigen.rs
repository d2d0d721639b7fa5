//! Eigenvalues of symmetric tridiagonal matrices by Sturm counting.
//!
//! Bisection on the Sturm count is slower than QL/QR for full spectra but
//! needs no workspace, never loses monotonicity, and extracts a single
//! eigenvalue (we mostly want the largest) in O(n log 1/tol).

use crate::{domain_err, Error, Result};

/// Symmetric tridiagonal matrix: `diag` of length n, `off` of length n−1.
#[derive(Clone, Debug)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

// Smallest pivot magnitude admitted in the Sturm recurrence; a vanishing
// pivot is replaced by -PIVMIN, the downward limit.
const PIVMIN: f64 = 1e-300;

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<SymTridiag> {
        if diag.is_empty() {
            return domain_err("tridiag: empty diagonal");
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::Grid(format!(
                "tridiag: {} off-diagonal entries for dimension {}",
                off.len(),
                diag.len()
            )));
        }
        Ok(SymTridiag { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x` (Sturm count via the LDLᵀ
    /// pivots of A − xI).
    pub fn count_below(&self, x: f64) -> usize {
        let mut d = self.diag[0] - x;
        if d.abs() < PIVMIN {
            d = -PIVMIN;
        }
        let mut count = usize::from(d < 0.0);
        for i in 1..self.diag.len() {
            d = (self.diag[i] - x) - self.off[i - 1] * self.off[i - 1] / d;
            if d.abs() < PIVMIN {
                d = -PIVMIN;
            }
            count += usize::from(d < 0.0);
        }
        count
    }

    /// Gershgorin bounds: every eigenvalue lies in `[lo, hi]`.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// k-th eigenvalue in ascending order (0-indexed), to absolute
    /// tolerance `tol`.
    pub fn eigenvalue(&self, k: usize, tol: f64) -> Result<f64> {
        let (lo, hi) = self.bounds();
        self.eigenvalue_in(k, lo, hi, tol)
    }

    fn eigenvalue_in(&self, k: usize, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
        if k >= self.dim() {
            return domain_err(format!("eigenvalue index {k} for dimension {}", self.dim()));
        }
        if !(tol > 0.0) {
            return domain_err("eigenvalue: tol must be positive");
        }
        // widen so the counts at the ends are unambiguous
        let pad = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        lo -= pad;
        hi += pad;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) >= k + 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Largest eigenvalue.
    pub fn largest(&self, tol: f64) -> Result<f64> {
        self.eigenvalue(self.dim() - 1, tol)
    }

    /// Full ascending spectrum. Each eigenvalue reuses the previous one as
    /// its lower bracket, so the whole sweep is O(n² log(range/tol)).
    pub fn eigenvalues(&self, tol: f64) -> Result<Vec<f64>> {
        let (lo, hi) = self.bounds();
        let mut out = Vec::with_capacity(self.dim());
        let mut floor = lo;
        for k in 0..self.dim() {
            let ev = self.eigenvalue_in(k, floor, hi, tol)?;
            // brackets of later eigenvalues may start at the current value
            floor = ev - tol;
            out.push(ev);
        }
        Ok(out)
    }
}
