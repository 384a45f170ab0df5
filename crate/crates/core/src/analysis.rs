//! Ordered-statistics error bound for flip decoding, diversity estimation
//! and coding-gain extraction from BER curves.
//!
//! Bound arithmetic runs in the log domain: the products of near-unity
//! factors and the high powers of `1 / rho` underflow otherwise.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("order index r = {r} outside 1..={n}")]
    OrderOutOfRange { r: usize, n: usize },
    #[error("error count v = {v} outside 1..={d}")]
    ErrorCountOutOfRange { v: usize, d: usize },
    #[error("invalid bound input: {0}")]
    InvalidBoundInput(String),
    #[error("invalid BER curve {label:?}: {reason}")]
    InvalidCurve { label: String, reason: String },
    #[error("window holds {points} usable points, need at least 2")]
    TooFewPoints { points: usize },
    #[error("target BER {target:e} is not bracketed by curve {label:?}")]
    TargetOutOfRange { label: String, target: f64 },
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

fn ln_qbar(n: usize, r: usize, rho: f64) -> f64 {
    (0..r)
        .map(|j| ((n - j) as f64).ln() - (rho + (n - j) as f64).ln())
        .sum()
}

/// Expected Chernoff surrogate `E[exp(-rho_(r))]` of the `r`-th smallest of
/// `n` i.i.d. exponential SNRs with mean `rho_c_bar`:
/// `nPr / prod_{j<r} (rho_c_bar + n - j)`.
pub fn qbar_r(n: usize, r: usize, rho_c_bar: f64) -> Result<f64, AnalysisError> {
    if r == 0 || r > n {
        return Err(AnalysisError::OrderOutOfRange { r, n });
    }
    Ok(ln_qbar(n, r, rho_c_bar).exp())
}

fn check_nd(n: usize, d: usize) -> Result<(), AnalysisError> {
    if d == 0 || d >= n {
        return Err(AnalysisError::InvalidBoundInput(format!(
            "need 1 <= d < n, got d = {d}, n = {n}"
        )));
    }
    Ok(())
}

/// Factor `1 / prod_{k<n} (rho_c_bar + n - k)` used for the all-correct
/// term of the window bound. It is `qbar_r(n, n, .)` without the `n!`
/// numerator; being smaller, `(1 - x)^{n-v}` stays an upper bound.
fn last_order_factor(n: usize, rho: f64) -> f64 {
    (-(0..n).map(|k| (rho + (n - k) as f64).ln()).sum::<f64>()).exp()
}

/// Bound on the probability of exactly `v <= d` errors with at least one
/// outside the `d` least reliable positions.
pub fn pe_v_bound(n: usize, d: usize, v: usize, rho_c_bar: f64) -> Result<f64, AnalysisError> {
    check_nd(n, d)?;
    if v == 0 || v > d {
        return Err(AnalysisError::ErrorCountOutOfRange { v, d });
    }
    let ln_q1 = ln_qbar(n, 1, rho_c_bar);
    let ln_qd1 = ln_qbar(n, d + 1, rho_c_bar);
    let ln_keep = (-last_order_factor(n, rho_c_bar)).ln_1p() * (n - v) as f64;
    let total = (1..=v)
        .map(|vm| {
            let vn = v - vm;
            (ln_binomial(n - d, vm)
                + ln_binomial(d, vn)
                + vm as f64 * ln_qd1
                + vn as f64 * ln_q1
                + ln_keep)
                .exp()
        })
        .sum();
    Ok(total)
}

/// Probability of more than `d` errors among `n` bits each in error with
/// probability `1 / (1 + rho_c_bar)`.
pub fn pe_tail(n: usize, d: usize, rho_c_bar: f64) -> f64 {
    let ln_p = -(1.0 + rho_c_bar).ln();
    let ln_q = if rho_c_bar > 0.0 {
        rho_c_bar.ln() - (1.0 + rho_c_bar).ln()
    } else {
        f64::NEG_INFINITY
    };
    (d + 1..=n)
        .map(|m| {
            let ln_rest = if m == n { 0.0 } else { (n - m) as f64 * ln_q };
            (ln_binomial(n, m) + m as f64 * ln_p + ln_rest).exp()
        })
        .sum()
}

/// Flip-decoder bound inputs: code length, minimum distance and an SNR grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundInput {
    n: usize,
    d_min: usize,
    grid: Vec<f64>,
}

impl BoundInput {
    pub fn new(n: usize, d_min: usize, grid: Vec<f64>) -> Result<Self, AnalysisError> {
        if d_min < 2 {
            return Err(AnalysisError::InvalidBoundInput(format!(
                "d_min must be at least 2, got {d_min}"
            )));
        }
        check_nd(n, d_min - 1)?;
        if grid.is_empty() {
            return Err(AnalysisError::InvalidBoundInput("empty SNR grid".into()));
        }
        if grid.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return Err(AnalysisError::InvalidBoundInput(
                "SNR grid values must be positive".into(),
            ));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AnalysisError::InvalidBoundInput(
                "SNR grid must be increasing".into(),
            ));
        }
        Ok(Self { n, d_min, grid })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d_min(&self) -> usize {
        self.d_min
    }

    pub fn d(&self) -> usize {
        self.d_min - 1
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
}

/// Bound value at one SNR, split into the window-miss term and the tail term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub rho: f64,
    pub window_term: f64,
    pub tail_term: f64,
    pub bound: f64,
}

pub fn pfd_bound_at(n: usize, d: usize, rho: f64) -> Result<BoundPoint, AnalysisError> {
    let mut window_term = 0.0;
    for v in 1..=d {
        window_term += pe_v_bound(n, d, v, rho)?;
    }
    let tail_term = pe_tail(n, d, rho);
    Ok(BoundPoint {
        rho,
        window_term,
        tail_term,
        bound: window_term + tail_term,
    })
}

/// Upper bound on the flip decoder's word-error probability over the grid.
pub fn pfd_bound(input: &BoundInput) -> Vec<BoundPoint> {
    input
        .grid
        .iter()
        .map(|&rho| pfd_bound_at(input.n, input.d(), rho).expect("validated bound input"))
        .collect()
}

/// BER samples of one (code, decoder) pair, indexed by `E_b/N_0` in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    label: String,
    points: Vec<(f64, f64)>,
}

impl BerCurve {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self, AnalysisError> {
        let label = label.into();
        let bad = |reason: &str| AnalysisError::InvalidCurve {
            label: label.clone(),
            reason: reason.to_string(),
        };
        if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(bad("E_b/N_0 values must be strictly increasing"));
        }
        if points.iter().any(|&(_, b)| !(b > 0.0 && b <= 1.0)) {
            return Err(bad("BER values must lie in (0, 1]"));
        }
        Ok(Self { label, points })
    }

    /// Like [`BerCurve::new`], first dropping points with zero BER.
    pub fn resolved(
        label: impl Into<String>,
        points: Vec<(f64, f64)>,
    ) -> Result<Self, AnalysisError> {
        Self::new(
            label,
            points.into_iter().filter(|&(_, b)| b > 0.0).collect(),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// `E_b/N_0` where the curve first crosses `target`, by linear
    /// interpolation of `log10(ber)` against dB.
    pub fn ebno_at(&self, target: f64) -> Result<f64, AnalysisError> {
        let out = || AnalysisError::TargetOutOfRange {
            label: self.label.clone(),
            target,
        };
        if !(target > 0.0) {
            return Err(out());
        }
        let lt = target.log10();
        for w in self.points.windows(2) {
            let (x0, b0) = w[0];
            let (x1, b1) = w[1];
            let (l0, l1) = (b0.log10(), b1.log10());
            if l0 == lt {
                return Ok(x0);
            }
            if (l0 - lt) * (l1 - lt) <= 0.0 {
                return Ok(x0 + (lt - l0) * (x1 - x0) / (l1 - l0));
            }
        }
        match self.points.last() {
            Some(&(x, b)) if b == target => Ok(x),
            _ => Err(out()),
        }
    }
}

/// Least-squares slope of `-log10(ber)` against `log10` of the linear SNR,
/// over the points with `E_b/N_0` inside `[lo_db, hi_db]`.
pub fn estimate_diversity(curve: &BerCurve, window: (f64, f64)) -> Result<f64, AnalysisError> {
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|&&(x, _)| x >= window.0 && x <= window.1)
        .map(|&(x, b)| (x / 10.0, -b.log10()))
        .collect();
    if pts.len() < 2 {
        return Err(AnalysisError::TooFewPoints { points: pts.len() });
    }
    Ok(least_squares_slope(&pts))
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `E_b/N_0` gap between `reference` and `coded` at `target_ber`, in dB.
pub fn coding_gain(
    coded: &BerCurve,
    reference: &BerCurve,
    target_ber: f64,
) -> Result<f64, AnalysisError> {
    let c = coded.ebno_at(target_ber)?;
    let r = reference.ebno_at(target_ber)?;
    Ok(r - c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::db_to_linear;
    use statrs::distribution::{Binomial, DiscreteCDF};

    fn log_grid(lo_db: f64, hi_db: f64, steps: usize) -> Vec<f64> {
        (0..=steps)
            .map(|i| db_to_linear(lo_db + (hi_db - lo_db) * i as f64 / steps as f64))
            .collect()
    }

    fn slope(f: impl Fn(f64) -> f64, lo_db: f64, hi_db: f64) -> f64 {
        let pts: Vec<(f64, f64)> = log_grid(lo_db, hi_db, 10)
            .into_iter()
            .map(|rho| (rho.log10(), -f(rho).log10()))
            .collect();
        least_squares_slope(&pts)
    }

    #[test]
    fn qbar_closed_forms() {
        let (n, rho) = (15, 7.3);
        assert!((qbar_r(n, 1, rho).unwrap() - n as f64 / (n as f64 + rho)).abs() < 1e-15);
        // the r = n case carries the n! numerator
        let prod: f64 = (0..n).map(|k| rho + (n - k) as f64).product();
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        assert!((qbar_r(n, n, rho).unwrap() / (fact / prod) - 1.0).abs() < 1e-12);
        for r in 1..=n {
            assert!((qbar_r(n, r, 0.0).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(qbar_r(n, 0, 1.0).is_err());
        assert!(qbar_r(n, 16, 1.0).is_err());
    }

    #[test]
    fn qbar_is_nonincreasing_in_order() {
        for n in [2usize, 7, 15, 31, 63] {
            for rho in log_grid(-10.0, 60.0, 9) {
                let q: Vec<f64> = (1..=n).map(|r| qbar_r(n, r, rho).unwrap()).collect();
                assert!(
                    q.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)),
                    "n={n} rho={rho}"
                );
            }
        }
    }

    #[test]
    fn qbar_matches_numeric_integration() {
        // E[exp(-Y_(r))] with the order-statistic density written in t = y / rho
        fn integrate(n: usize, r: usize, rho: f64) -> f64 {
            let ln_a = ln_binomial(n, r) + (r as f64).ln();
            let rate = rho + (n - r + 1) as f64;
            let upper = 60.0 / rate;
            let steps = 400_000;
            let h = upper / steps as f64;
            let f = |t: f64| {
                let one_minus = -(-t).exp_m1();
                let growth = if r == 1 {
                    0.0
                } else {
                    (r - 1) as f64 * one_minus.ln()
                };
                (ln_a - (n - r + 1) as f64 * t + growth - rho * t).exp()
            };
            let mut sum = f(0.0) + f(upper);
            for i in 1..steps {
                sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            sum * h / 3.0
        }
        for (n, r) in [(15, 1), (15, 5), (15, 15)] {
            for rho in [1.0, 10.0, 100.0] {
                let exact = qbar_r(n, r, rho).unwrap();
                let numeric = integrate(n, r, rho);
                assert!(
                    (numeric / exact - 1.0).abs() < 1e-6,
                    "n={n} r={r} rho={rho}: {numeric} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn single_error_bound_collapses() {
        let (n, d, rho) = (15, 4, 50.0);
        let q_d1 = qbar_r(n, d + 1, rho).unwrap();
        let q_n = 1.0 / (0..n).map(|k| rho + (n - k) as f64).product::<f64>();
        let want = (n - d) as f64 * q_d1 * (1.0 - q_n).powi(n as i32 - 1);
        assert!((pe_v_bound(n, d, 1, rho).unwrap() / want - 1.0).abs() < 1e-12);
        assert!(pe_v_bound(n, d, 0, rho).is_err());
        assert!(pe_v_bound(n, d, 5, rho).is_err());
    }

    #[test]
    fn pe_v_bound_nonincreasing_and_finite() {
        let (n, d) = (15, 4);
        for v in 1..=d {
            let vals: Vec<f64> = log_grid(0.0, 40.0, 40)
                .into_iter()
                .map(|rho| pe_v_bound(n, d, v, rho).unwrap())
                .collect();
            assert!(vals.iter().all(|x| x.is_finite() && *x >= 0.0));
            assert!(vals.windows(2).all(|w| w[1] <= w[0]), "v={v}");
        }
    }

    #[test]
    fn tail_matches_binomial_cdf() {
        let mut state = 17u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let n = 2 + (next() * 60.0) as usize;
            let d = 1 + (next() * (n - 1) as f64) as usize;
            let rho = db_to_linear(next() * 30.0 - 5.0);
            let oracle = 1.0
                - Binomial::new(1.0 / (1.0 + rho), n as u64)
                    .unwrap()
                    .cdf(d as u64);
            let got = pe_tail(n, d, rho);
            assert!(
                (got - oracle).abs() <= 1e-12 + 1e-9 * oracle,
                "n={n} d={d} rho={rho}: {got} vs {oracle}"
            );
        }
        assert!((pe_tail(15, 4, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tail_slope_is_d_plus_one() {
        let s = slope(|rho| pe_tail(15, 4, rho), 50.0, 60.0);
        assert!((s - 5.0).abs() < 0.1, "{s}");
    }

    #[test]
    fn bound_slope_and_dominance() {
        let input = BoundInput::new(15, 5, log_grid(50.0, 60.0, 10)).unwrap();
        let pts = pfd_bound(&input);
        assert!(pts
            .iter()
            .all(|p| p.bound.is_finite() && p.bound >= p.tail_term));
        let s = slope(|rho| pfd_bound_at(15, 4, rho).unwrap().bound, 50.0, 60.0);
        assert!((4.7..=5.3).contains(&s), "{s}");
    }

    #[test]
    fn window_to_tail_ratio_tends_to_a_constant() {
        // both terms fall as rho^-(d+1); their ratio tends to
        // (n-d) nP(d+1) / C(n, d+1)
        let (n, d) = (15usize, 4usize);
        let npd1: f64 = (0..=d).map(|j| (n - j) as f64).product();
        let limit = (n - d) as f64 * npd1 / ln_binomial(n, d + 1).exp();
        let p = pfd_bound_at(n, d, db_to_linear(60.0)).unwrap();
        let ratio = p.window_term / p.tail_term;
        assert!((ratio / limit - 1.0).abs() < 0.01, "{ratio} vs {limit}");
        let s = slope(
            |rho| pfd_bound_at(n, d, rho).unwrap().window_term,
            50.0,
            60.0,
        );
        assert!((s - 5.0).abs() < 0.1, "{s}");
    }

    #[test]
    fn bound_input_validation() {
        assert!(BoundInput::new(15, 1, vec![1.0]).is_err());
        assert!(BoundInput::new(15, 5, vec![]).is_err());
        assert!(BoundInput::new(15, 5, vec![2.0, 1.0]).is_err());
        assert!(BoundInput::new(15, 5, vec![0.0]).is_err());
        assert_eq!(
            pfd_bound(&BoundInput::new(15, 5, vec![3.0]).unwrap()).len(),
            1
        );
    }

    fn power_law(c: f64, order: f64) -> BerCurve {
        let pts = (0..=10)
            .map(|i| {
                let db = 10.0 + i as f64;
                (db, c / db_to_linear(db).powf(order))
            })
            .collect();
        BerCurve::new("synthetic", pts).unwrap()
    }

    #[test]
    fn diversity_of_power_laws() {
        assert!(
            (estimate_diversity(&power_law(0.3, 2.0), (10.0, 20.0)).unwrap() - 2.0).abs() < 1e-9
        );
        assert!(
            (estimate_diversity(&power_law(5.0, 5.0), (10.0, 20.0)).unwrap() - 5.0).abs() < 1e-9
        );
        assert!(matches!(
            estimate_diversity(&power_law(1.0, 2.0), (10.5, 10.9)),
            Err(AnalysisError::TooFewPoints { points: 0 })
        ));
    }

    #[test]
    fn gain_between_curves() {
        let a = power_law(0.5, 1.0);
        assert_eq!(coding_gain(&a, &a, 1e-2).unwrap(), 0.0);
        let b = BerCurve::new("b", vec![(10.0, 1e-3), (20.0, 1e-7)]).unwrap();
        let r = BerCurve::new("ref", vec![(30.0, 1e-3), (40.0, 1e-5)]).unwrap();
        assert!((coding_gain(&b, &r, 1e-5).unwrap() - 25.0).abs() < 1e-9);
        let err = coding_gain(&b, &r, 1e-8).unwrap_err();
        assert!(err.to_string().contains("\"b\""), "{err}");
        let err = coding_gain(&b, &r, 1e-6).unwrap_err();
        assert!(err.to_string().contains("\"ref\""), "{err}");
    }

    #[test]
    fn curve_validation() {
        assert!(BerCurve::new("x", vec![(1.0, 0.1), (1.0, 0.01)]).is_err());
        assert!(BerCurve::new("x", vec![(1.0, 0.0)]).is_err());
        assert_eq!(
            BerCurve::resolved("x", vec![(1.0, 0.1), (2.0, 0.0)])
                .unwrap()
                .points()
                .len(),
            1
        );
    }
}
