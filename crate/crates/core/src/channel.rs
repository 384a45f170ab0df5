//! BPSK over i.i.d. Rayleigh fading with complex AWGN, hard decisions and
//! SNR bookkeeping.
//!
//! Calibration: with unit symbol energy the real noise component has
//! variance `1 / (4 rho_c_bar)`, so the per-bit detection SNR is
//! `gamma_j = 2 h_j^2 rho_c_bar` and the average is `gamma_bar = 2 rho_c_bar`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use thiserror::Error;

use crate::bits::BitWord;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("SNR must be positive, got rho_c_bar = {0}")]
    NonPositiveSnr(f64),
    #[error("code rate must lie in (0, 1], got {0}")]
    InvalidRate(f64),
    #[error("E_b/N_0 must be a finite number, got {0}")]
    InvalidEbNo(f64),
}

/// One operating point: `rho_c_bar = rate * 10^(ebno_db / 10)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPoint {
    ebno_db: f64,
    rate: f64,
    rho_c_bar: f64,
}

impl SnrPoint {
    pub fn new(ebno_db: f64, rate: f64) -> Result<Self, ChannelError> {
        if !ebno_db.is_finite() {
            return Err(ChannelError::InvalidEbNo(ebno_db));
        }
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(ChannelError::InvalidRate(rate));
        }
        Ok(Self {
            ebno_db,
            rate,
            rho_c_bar: rate * db_to_linear(ebno_db),
        })
    }

    /// Noise-free limit; hard decisions reproduce the transmitted symbols.
    pub fn noiseless(rate: f64) -> Self {
        Self {
            ebno_db: f64::INFINITY,
            rate,
            rho_c_bar: f64::INFINITY,
        }
    }

    pub fn ebno_db(&self) -> f64 {
        self.ebno_db
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Average SNR per coded bit, linear.
    pub fn rho_c_bar(&self) -> f64 {
        self.rho_c_bar
    }

    /// Average detection SNR per coded bit, `2 rho_c_bar`.
    pub fn effective_snr(&self) -> f64 {
        2.0 * self.rho_c_bar
    }

    /// Standard deviation of each real noise component.
    pub fn noise_sigma(&self) -> f64 {
        (0.25 / self.rho_c_bar).sqrt()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Received samples together with the fading magnitudes known at the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelObservation {
    pub y: Vec<Complex64>,
    pub h: Vec<f64>,
    pub rho_c_bar: f64,
}

impl ChannelObservation {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            y: Vec::with_capacity(n),
            h: Vec::with_capacity(n),
            rho_c_bar: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Bit 0 maps to `+1`, bit 1 to `-1`.
pub fn modulate_bpsk(c: &BitWord) -> Vec<f64> {
    c.iter().map(|b| if b { -1.0 } else { 1.0 }).collect()
}

pub fn apply_channel<R: Rng + ?Sized>(
    s: &[f64],
    snr: &SnrPoint,
    rng: &mut R,
) -> Result<ChannelObservation, ChannelError> {
    let mut obs = ChannelObservation::with_capacity(s.len());
    apply_channel_into(s, snr, rng, &mut obs)?;
    Ok(obs)
}

/// As [`apply_channel`], reusing the buffers of `obs`.
pub fn apply_channel_into<R: Rng + ?Sized>(
    s: &[f64],
    snr: &SnrPoint,
    rng: &mut R,
    obs: &mut ChannelObservation,
) -> Result<(), ChannelError> {
    let rho = snr.rho_c_bar();
    if !(rho > 0.0) {
        return Err(ChannelError::NonPositiveSnr(rho));
    }
    let sigma = snr.noise_sigma();
    obs.y.clear();
    obs.h.clear();
    obs.rho_c_bar = rho;
    for &sj in s {
        // |h|^2 ~ Exp(1) gives a Rayleigh magnitude with unit second moment
        let h2: f64 = rng.sample(Exp1);
        let h = h2.sqrt();
        let wr: f64 = rng.sample(StandardNormal);
        let wi: f64 = rng.sample(StandardNormal);
        obs.h.push(h);
        obs.y.push(Complex64::new(h * sj + sigma * wr, sigma * wi));
    }
    Ok(())
}

/// `r_j = 1` iff `Re(y_j) < 0`; an exact zero decides bit 0.
pub fn hard_decision(obs: &ChannelObservation) -> (BitWord, &[f64]) {
    let mut r = BitWord::zeros(obs.y.len());
    for (j, y) in obs.y.iter().enumerate() {
        if y.re < 0.0 {
            r.set(j, true);
        }
    }
    (r, &obs.h)
}

/// Average BPSK bit-error probability over Rayleigh fading at mean detection SNR `gamma_bar`.
pub fn rayleigh_bpsk_ber(gamma_bar: f64) -> f64 {
    if gamma_bar <= 0.0 {
        return 0.5;
    }
    if gamma_bar.is_infinite() {
        return 0.0;
    }
    // 1 - sqrt(g/(1+g)) rewritten to avoid cancellation at high SNR
    let a = (gamma_bar / (1.0 + gamma_bar)).sqrt();
    0.5 * (1.0 / (1.0 + gamma_bar)) / (1.0 + a)
}

/// Uncoded BPSK bit-error probability at `ebno_db`.
pub fn uncoded_ber(ebno_db: f64) -> f64 {
    rayleigh_bpsk_ber(2.0 * db_to_linear(ebno_db))
}

/// Inverse of [`uncoded_ber`]: the `E_b/N_0` in dB giving bit-error probability `p`.
pub fn uncoded_ebno_for_ber(p: f64) -> Option<f64> {
    if !(p > 0.0 && p < 0.5) {
        return None;
    }
    let a = 1.0 - 2.0 * p;
    let gamma_bar = a * a / (1.0 - a * a);
    Some(linear_to_db(gamma_bar / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn bpsk_mapping() {
        assert_eq!(modulate_bpsk(&BitWord::from_bits(&[0]).unwrap()), vec![1.0]);
        assert_eq!(
            modulate_bpsk(&BitWord::from_bits(&[1]).unwrap()),
            vec![-1.0]
        );
        assert_eq!(modulate_bpsk(&BitWord::zeros(9)), vec![1.0; 9]);
    }

    #[test]
    fn snr_point_bookkeeping() {
        let p = SnrPoint::new(10.0, 0.5).unwrap();
        assert!((p.rho_c_bar() - 5.0).abs() < 1e-12);
        assert!((p.effective_snr() - 10.0).abs() < 1e-12);
        assert!(SnrPoint::new(10.0, 0.0).is_err());
        assert!(SnrPoint::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn hard_decision_thresholds() {
        let obs = ChannelObservation {
            y: vec![
                Complex64::new(2.0, 0.0),
                Complex64::new(-0.1, 3.0),
                Complex64::new(0.0, -1.0),
            ],
            h: vec![1.0, 0.5, 0.2],
            rho_c_bar: 1.0,
        };
        let (r, h) = hard_decision(&obs);
        assert_eq!(r.to_string(), "010");
        assert_eq!(h, &[1.0, 0.5, 0.2]);
    }

    #[test]
    fn noiseless_limit_recovers_symbols() {
        let mut rng = stream_rng(1, 0, 0);
        let c = BitWord::from_bits(&[1, 0, 1, 1, 0, 0, 1]).unwrap();
        let obs = apply_channel(&modulate_bpsk(&c), &SnrPoint::noiseless(1.0), &mut rng).unwrap();
        assert_eq!(hard_decision(&obs).0, c);
    }

    #[test]
    fn rejects_nonpositive_snr() {
        let mut rng = stream_rng(1, 0, 0);
        let snr = SnrPoint::new(-f64::MAX, 1.0).unwrap();
        assert!(matches!(
            apply_channel(&[1.0], &snr, &mut rng),
            Err(ChannelError::NonPositiveSnr(_))
        ));
    }

    #[test]
    fn fading_second_moment_is_one() {
        let mut rng = stream_rng(2, 0, 0);
        let snr = SnrPoint::new(10.0, 1.0).unwrap();
        let obs = apply_channel(&vec![1.0; 1_000_000], &snr, &mut rng).unwrap();
        let m2 = obs.h.iter().map(|h| h * h).sum::<f64>() / obs.h.len() as f64;
        assert!((0.99..=1.01).contains(&m2), "E[h^2] = {m2}");
    }

    #[test]
    fn lag_one_autocorrelation_is_negligible() {
        let mut rng = stream_rng(3, 0, 0);
        let snr = SnrPoint::new(0.0, 1.0).unwrap();
        let obs = apply_channel(&vec![1.0; 1_000_000], &snr, &mut rng).unwrap();
        let corr = |x: &[f64]| {
            let n = x.len() as f64;
            let mean = x.iter().sum::<f64>() / n;
            let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let cov = x
                .windows(2)
                .map(|w| (w[0] - mean) * (w[1] - mean))
                .sum::<f64>()
                / (n - 1.0);
            cov / var
        };
        let h2: Vec<f64> = obs.h.iter().map(|h| h * h).collect();
        let noise: Vec<f64> = obs.y.iter().zip(&obs.h).map(|(y, h)| y.re - h).collect();
        assert!(corr(&h2).abs() < 0.01);
        assert!(corr(&noise).abs() < 0.01);
    }

    #[test]
    fn reproducible_for_fixed_stream() {
        let snr = SnrPoint::new(5.0, 0.5).unwrap();
        let s = vec![1.0, -1.0, 1.0, 1.0];
        let a = apply_channel(&s, &snr, &mut stream_rng(9, 1, 2)).unwrap();
        let b = apply_channel(&s, &snr, &mut stream_rng(9, 1, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn closed_form_limits() {
        assert_eq!(rayleigh_bpsk_ber(0.0), 0.5);
        assert_eq!(rayleigh_bpsk_ber(f64::INFINITY), 0.0);
        assert!(uncoded_ber(80.0) < 1e-8);
        let direct = |g: f64| 0.5 * (1.0 - (g / (1.0 + g)).sqrt());
        for g in [0.1, 1.0, 10.0, 100.0] {
            assert!((rayleigh_bpsk_ber(g) - direct(g)).abs() < 1e-12);
        }
    }

    #[test]
    fn uncoded_anchor() {
        let at = uncoded_ebno_for_ber(1e-5).unwrap();
        assert!((40.7..=42.1).contains(&at), "{at}");
        assert!((uncoded_ber(at) - 1e-5).abs() < 1e-12);
    }

    #[test]
    fn simulated_raw_ber_matches_closed_form() {
        // rate 1, gamma_bar = 250 gives roughly 1e-3
        let ebno_db = linear_to_db(125.0);
        let snr = SnrPoint::new(ebno_db, 1.0).unwrap();
        let p = uncoded_ber(ebno_db);
        let n = 2_000_000usize;
        let mut rng = stream_rng(4, 0, 0);
        let obs = apply_channel(&vec![1.0; n], &snr, &mut rng).unwrap();
        let errors = hard_decision(&obs).0.weight() as f64;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (errors - n as f64 * p).abs() < 3.0 * sd,
            "errors {errors}, expected {}",
            n as f64 * p
        );
    }
}
