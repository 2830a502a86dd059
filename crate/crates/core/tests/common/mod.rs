#![allow(dead_code)]
//! Oracles evaluated directly in `q` and `r`, independent of the library's reciprocal forms.

/// `((pq−n)r − pq) / (q[(p−1)r − (p−2)])` with its limits at `q = ∞` or `r = ∞`.
pub fn alpha_pp(p: f64, n: f64, q: f64, r: f64) -> f64 {
    match (q.is_infinite(), r.is_infinite()) {
        (false, false) => ((p * q - n) * r - p * q) / (q * ((p - 1.0) * r - (p - 2.0))),
        (false, true) => (p * q - n) / (q * (p - 1.0)),
        (true, false) => p * (r - 1.0) / ((p - 1.0) * r - (p - 2.0)),
        (true, true) => p / (p - 1.0),
    }
}

/// `m[(2q−n)r − 2q] / (q[mr − (m−1)])`.
pub fn pme_bound(m: f64, n: f64, q: f64, r: f64) -> f64 {
    match (q.is_infinite(), r.is_infinite()) {
        (false, false) => m * ((2.0 * q - n) * r - 2.0 * q) / (q * (m * r - (m - 1.0))),
        (false, true) => (2.0 * q - n) / q,
        (true, false) => 2.0 * m * (r - 1.0) / (m * r - (m - 1.0)),
        (true, true) => 2.0,
    }
}

/// `β = [(pq−n)r − pq] / (q[(r−1)(m+p−2) + 1])`, the source-limited doubly nonlinear
/// space exponent (bound times `(p−1)/(m+p−2)`).
pub fn dnl_beta(p: f64, m: f64, n: f64, q: f64, r: f64) -> f64 {
    let s = m + p - 2.0;
    match (q.is_infinite(), r.is_infinite()) {
        (false, false) => ((p * q - n) * r - p * q) / (q * ((r - 1.0) * s + 1.0)),
        (false, true) => (p * q - n) / (q * s),
        (true, false) => p * (r - 1.0) / ((r - 1.0) * s + 1.0),
        (true, true) => p / s,
    }
}

/// Midpoint-rule `∫_{-R}^{R} |g|^p dx` on `cells` cells.
pub fn midpoint_lp(g: impl Fn(f64) -> f64, radius: f64, p: f64, cells: usize) -> f64 {
    let h = 2.0 * radius / cells as f64;
    (0..cells)
        .map(|i| g(-radius + (i as f64 + 0.5) * h).abs().powf(p) * h)
        .sum()
}
