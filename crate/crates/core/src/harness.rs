//! Monte-Carlo BER/WER sweeps.
//!
//! Each sweep point is split into chunks of words; chunk `c` of point `p`
//! draws from the stream keyed `(seed, p, c)`. Chunks run in batches on a
//! worker pool and are folded in chunk order, with the stopping rule checked
//! after every chunk, so results do not depend on the worker count. The
//! stream key ignores the decoder, so every decoder at a given point sees the
//! same messages, fades and noise.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitWord;
use crate::channel::{ChannelError, SnrPoint};
use crate::codes::{CodeError, CodeSpec, LinearCode};
use crate::decode::{DecodeError, DecodeLimits, Decoder, DecoderSpec, Received};
use crate::rng::{stream_rng, StreamRng};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// When to stop a sweep point: once at least `min_bits` message bits were
/// sent and either `min_word_errors` word errors were seen or `max_words`
/// words were sent. Checked at chunk boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub min_bits: u64,
    pub min_word_errors: u64,
    pub max_words: u64,
    pub chunk_words: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            min_bits: 1_000_000,
            min_word_errors: 100,
            max_words: 100_000_000,
            chunk_words: 10_000,
        }
    }
}

impl StoppingRule {
    pub fn validate(&self, n: usize) -> Result<(), HarnessError> {
        if self.min_bits < n as u64 {
            return Err(HarnessError::InvalidConfig(format!(
                "min_bits = {} is below the block length {n}",
                self.min_bits
            )));
        }
        if self.chunk_words == 0 || self.max_words == 0 {
            return Err(HarnessError::InvalidConfig(
                "chunk_words and max_words must be positive".into(),
            ));
        }
        Ok(())
    }

    fn done(&self, bits: u64, words: u64, word_errors: u64) -> bool {
        bits >= self.min_bits && (word_errors >= self.min_word_errors || words >= self.max_words)
    }
}

/// One (code, decoder, `E_b/N_0`) result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub code: String,
    pub decoder: String,
    pub ebno_db: f64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub words_sent: u64,
    pub word_errors: u64,
    pub wer: f64,
    pub avg_queries: f64,
    pub max_queries: u64,
    #[serde(rename = "abandoned")]
    pub abandoned_count: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub code: CodeSpec,
    pub decoders: Vec<DecoderSpec>,
    pub ebno_db: Vec<f64>,
    pub stopping: StoppingRule,
    pub seed: u64,
    pub workers: usize,
    pub limits: DecodeLimits,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct ChunkStats {
    words: u64,
    bit_errors: u64,
    word_errors: u64,
    queries: u64,
    max_queries: u64,
    abandoned: u64,
}

impl ChunkStats {
    fn absorb(&mut self, o: &ChunkStats) {
        self.words += o.words;
        self.bit_errors += o.bit_errors;
        self.word_errors += o.word_errors;
        self.queries += o.queries;
        self.max_queries = self.max_queries.max(o.max_queries);
        self.abandoned += o.abandoned;
    }
}

/// Runs chunk jobs in batches of `workers`, folding results in chunk order
/// until `stop` says enough has been accumulated.
fn drive_chunks<T, J, S>(workers: usize, job: J, mut stop: S) -> Result<(), HarnessError>
where
    T: Send,
    J: Fn(u32) -> Result<T, HarnessError> + Sync,
    S: FnMut(T) -> bool,
{
    let workers = workers.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let mut next = 0u32;
    loop {
        let batch: Vec<u32> = (next..next.saturating_add(workers as u32)).collect();
        next = next.saturating_add(workers as u32);
        let results: Vec<Result<T, HarnessError>> = if workers == 1 {
            batch.iter().map(|&c| job(c)).collect()
        } else {
            pool.install(|| batch.par_iter().map(|&c| job(c)).collect())
        };
        for r in results {
            if stop(r?) {
                return Ok(());
            }
        }
        if next == u32::MAX {
            return Err(HarnessError::InvalidConfig(
                "chunk index space exhausted".into(),
            ));
        }
    }
}

/// Draws a random message of `k` bits.
fn random_message(rng: &mut StreamRng, k: usize, limbs: &mut Vec<u64>) -> BitWord {
    limbs.clear();
    limbs.extend((0..k.div_ceil(64)).map(|_| rng.random::<u64>()));
    BitWord::from_words(limbs, k)
}

/// Fills `y`, `h` for codeword `c`: `h_j^2 ~ scale_j * Exp(1)`, complex noise
/// with per-component deviation `sigma`. Returns the hard decisions.
fn transmit(
    rng: &mut StreamRng,
    c: &BitWord,
    sigma: f64,
    y: &mut Vec<Complex64>,
    h: &mut Vec<f64>,
    fade_scale: Option<&[f64]>,
) -> BitWord {
    y.clear();
    h.clear();
    let mut r = BitWord::zeros(c.len());
    for j in 0..c.len() {
        let e: f64 = rng.sample(Exp1);
        let hj = (e * fade_scale.map_or(1.0, |s| s[j])).sqrt();
        let wr: f64 = rng.sample(StandardNormal);
        let wi: f64 = rng.sample(StandardNormal);
        let s = if c.get(j) { -1.0 } else { 1.0 };
        let yj = Complex64::new(hj * s + sigma * wr, sigma * wi);
        if yj.re < 0.0 {
            r.set(j, true);
        }
        h.push(hj);
        y.push(yj);
    }
    r
}

fn snr_for(ebno_db: f64, rate: f64) -> Result<SnrPoint, HarnessError> {
    if ebno_db == f64::INFINITY {
        Ok(SnrPoint::noiseless(rate))
    } else {
        Ok(SnrPoint::new(ebno_db, rate)?)
    }
}

fn run_chunk(
    code: &LinearCode,
    decoder: &Decoder,
    snr: &SnrPoint,
    words: u64,
    mut rng: StreamRng,
) -> Result<ChunkStats, HarnessError> {
    let (n, k) = (code.n(), code.k());
    let sigma = snr.noise_sigma();
    let mut stats = ChunkStats::default();
    let mut y = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    let mut limbs = Vec::new();
    for _ in 0..words {
        let msg = random_message(&mut rng, k, &mut limbs);
        let c = code.encode(&msg)?;
        let r = transmit(&mut rng, &c, sigma, &mut y, &mut h, None);
        let out = decoder.decode(
            code,
            &Received {
                r: &r,
                h: &h,
                y: &y,
                ebno_db: snr.ebno_db(),
            },
        )?;
        let errs = out.codeword.prefix(k).distance(&msg) as u64;
        stats.words += 1;
        stats.bit_errors += errs;
        stats.word_errors += u64::from(errs > 0);
        stats.queries += out.queries;
        stats.max_queries = stats.max_queries.max(out.queries);
        stats.abandoned += u64::from(out.abandoned);
    }
    Ok(stats)
}

/// Simulates one sweep point. `point` selects the random streams; runs that
/// share `(seed, point)` see identical channel realizations.
#[allow(clippy::too_many_arguments)]
pub fn run_point(
    code: &LinearCode,
    decoder: &Decoder,
    ebno_db: f64,
    stopping: &StoppingRule,
    seed: u64,
    point: u32,
    workers: usize,
) -> Result<SweepRow, HarnessError> {
    stopping.validate(code.n())?;
    let snr = snr_for(ebno_db, code.rate())?;
    let k = code.k() as u64;
    let mut total = ChunkStats::default();
    drive_chunks(
        workers,
        |chunk| {
            run_chunk(
                code,
                decoder,
                &snr,
                stopping.chunk_words,
                stream_rng(seed, point, chunk),
            )
        },
        |s| {
            total.absorb(&s);
            stopping.done(total.words * k, total.words, total.word_errors)
        },
    )?;
    let bits = total.words * k;
    Ok(SweepRow {
        code: code.name().to_string(),
        decoder: decoder.spec().to_string(),
        ebno_db,
        bits_sent: bits,
        bit_errors: total.bit_errors,
        ber: total.bit_errors as f64 / bits as f64,
        words_sent: total.words,
        word_errors: total.word_errors,
        wer: total.word_errors as f64 / total.words as f64,
        avg_queries: total.queries as f64 / total.words as f64,
        max_queries: total.max_queries,
        abandoned_count: total.abandoned,
        seed,
    })
}

/// Runs every (decoder, `E_b/N_0`) pair of the configuration. The code and
/// all decoders are validated before any trial runs.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>, HarnessError> {
    if config.ebno_db.is_empty() {
        return Err(HarnessError::InvalidConfig("empty E_b/N_0 grid".into()));
    }
    if config.decoders.is_empty() {
        return Err(HarnessError::InvalidConfig("no decoders given".into()));
    }
    if let Some(x) = config
        .ebno_db
        .iter()
        .find(|x| x.is_nan() || **x == f64::NEG_INFINITY)
    {
        return Err(HarnessError::InvalidConfig(format!(
            "invalid E_b/N_0 value {x}"
        )));
    }
    let code = config.code.build()?;
    config.stopping.validate(code.n())?;
    let decoders = config
        .decoders
        .iter()
        .map(|spec| Decoder::prepare(spec, &code, &config.limits))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::with_capacity(decoders.len() * config.ebno_db.len());
    for decoder in &decoders {
        for (i, &ebno) in config.ebno_db.iter().enumerate() {
            rows.push(run_point(
                &code,
                decoder,
                ebno,
                &config.stopping,
                config.seed,
                i as u32,
                config.workers,
            )?);
        }
    }
    Ok(rows)
}

/// Importance-sampling settings for deep-tail error rates.
///
/// Fades are drawn from a mixture: with probability `alpha` all `|h_j|^2`
/// are nominal `Exp(1)`; otherwise a uniformly chosen set of `fades`
/// positions has `|h_j|^2 ~ Exp(mu)` with `mu = fade_snr / gamma_bar`, so
/// those bits sit near detection SNR `fade_snr`. Noise and messages keep
/// their nominal laws. Every word is weighted by the likelihood ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImportanceConfig {
    pub alpha: f64,
    /// Size of the faded set; `None` uses the code's `d_min`.
    pub fades: Option<usize>,
    pub fade_snr: f64,
    pub min_events: u64,
    pub target_rel_err: f64,
    pub max_words: u64,
    pub chunk_words: u64,
}

impl Default for ImportanceConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            fades: None,
            fade_snr: 1.0,
            min_events: 100,
            target_rel_err: 0.1,
            max_words: 50_000_000,
            chunk_words: 20_000,
        }
    }
}

/// Weighted error-rate estimate from [`run_point_importance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEstimate {
    pub ebno_db: f64,
    pub words: u64,
    /// Words with at least one message-bit error (unweighted count).
    pub events: u64,
    pub ber: f64,
    pub ber_rel_err: f64,
    pub wer: f64,
    pub wer_rel_err: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct WeightedStats {
    words: u64,
    events: u64,
    ber_sum: f64,
    ber_sq: f64,
    wer_sum: f64,
    wer_sq: f64,
}

impl WeightedStats {
    fn absorb(&mut self, o: &WeightedStats) {
        self.words += o.words;
        self.events += o.events;
        self.ber_sum += o.ber_sum;
        self.ber_sq += o.ber_sq;
        self.wer_sum += o.wer_sum;
        self.wer_sq += o.wer_sq;
    }

    fn mean_and_rel_err(sum: f64, sq: f64, n: u64) -> (f64, f64) {
        let n = n as f64;
        let mean = sum / n;
        let var = (sq / n - mean * mean).max(0.0) / n;
        let rel = if mean > 0.0 {
            var.sqrt() / mean
        } else {
            f64::INFINITY
        };
        (mean, rel)
    }
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

/// Elementary symmetric polynomial `e_s(r)`.
fn elementary_symmetric(r: &[f64], s: usize) -> f64 {
    let mut e = vec![0.0; s + 1];
    e[0] = 1.0;
    for &x in r {
        for t in (1..=s).rev() {
            e[t] += e[t - 1] * x;
        }
    }
    e[s]
}

fn run_weighted_chunk(
    code: &LinearCode,
    decoder: &Decoder,
    snr: &SnrPoint,
    cfg: &ImportanceConfig,
    fades: usize,
    words: u64,
    mut rng: StreamRng,
) -> Result<WeightedStats, HarnessError> {
    let (n, k) = (code.n(), code.k());
    let sigma = snr.noise_sigma();
    let mu = (cfg.fade_snr / snr.effective_snr()).min(1.0);
    let binom = ln_binomial(n, fades).exp();
    let mut stats = WeightedStats::default();
    let mut y = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    let mut limbs = Vec::new();
    let mut scale = vec![1.0; n];
    let mut idx: Vec<usize> = (0..n).collect();
    let mut ratio = vec![0.0; n];
    for _ in 0..words {
        scale.fill(1.0);
        if rng.random::<f64>() >= cfg.alpha {
            // partial Fisher-Yates picks the faded set
            for i in 0..fades {
                let j = rng.random_range(i..n);
                idx.swap(i, j);
                scale[idx[i]] = mu;
            }
        }
        let msg = random_message(&mut rng, k, &mut limbs);
        let c = code.encode(&msg)?;
        let r = transmit(&mut rng, &c, sigma, &mut y, &mut h, Some(&scale));
        // likelihood ratio of the mixture against the nominal law, per position
        for (rj, hj) in ratio.iter_mut().zip(&h) {
            let x = hj * hj;
            *rj = (-x * (1.0 / mu - 1.0)).exp() / mu;
        }
        let weight =
            1.0 / (cfg.alpha + (1.0 - cfg.alpha) * elementary_symmetric(&ratio, fades) / binom);
        let out = decoder.decode(
            code,
            &Received {
                r: &r,
                h: &h,
                y: &y,
                ebno_db: snr.ebno_db(),
            },
        )?;
        let errs = out.codeword.prefix(k).distance(&msg);
        stats.words += 1;
        if errs > 0 {
            stats.events += 1;
            let b = weight * errs as f64 / k as f64;
            stats.ber_sum += b;
            stats.ber_sq += b * b;
            stats.wer_sum += weight;
            stats.wer_sq += weight * weight;
        }
    }
    Ok(stats)
}

/// Importance-sampled BER/WER at one point, for error rates far below what
/// direct simulation can reach. Stops once `min_events` error words were
/// seen and the BER relative standard error is at most `target_rel_err`,
/// or after `max_words`.
pub fn run_point_importance(
    code: &LinearCode,
    decoder: &Decoder,
    ebno_db: f64,
    cfg: &ImportanceConfig,
    seed: u64,
    point: u32,
    workers: usize,
) -> Result<ImportanceEstimate, HarnessError> {
    let fades = cfg.fades.unwrap_or(code.d_min()).min(code.n());
    if !(0.0..=1.0).contains(&cfg.alpha) || cfg.alpha == 0.0 {
        return Err(HarnessError::InvalidConfig(format!(
            "mixture weight alpha = {} must lie in (0, 1]",
            cfg.alpha
        )));
    }
    if !(cfg.fade_snr > 0.0) || fades == 0 || cfg.chunk_words == 0 {
        return Err(HarnessError::InvalidConfig(
            "fade_snr, fades and chunk_words must be positive".into(),
        ));
    }
    let snr = SnrPoint::new(ebno_db, code.rate())?;
    let mut total = WeightedStats::default();
    drive_chunks(
        workers,
        |chunk| {
            run_weighted_chunk(
                code,
                decoder,
                &snr,
                cfg,
                fades,
                cfg.chunk_words,
                stream_rng(seed, point, chunk),
            )
        },
        |s| {
            total.absorb(&s);
            let (_, rel) =
                WeightedStats::mean_and_rel_err(total.ber_sum, total.ber_sq, total.words);
            (total.events >= cfg.min_events && rel <= cfg.target_rel_err)
                || total.words >= cfg.max_words
        },
    )?;
    let (ber, ber_rel_err) =
        WeightedStats::mean_and_rel_err(total.ber_sum, total.ber_sq, total.words);
    let (wer, wer_rel_err) =
        WeightedStats::mean_and_rel_err(total.wer_sum, total.wer_sq, total.words);
    Ok(ImportanceEstimate {
        ebno_db,
        words: total.words,
        events: total.events,
        ber,
        ber_rel_err,
        wer,
        wer_rel_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::uncoded_ber;
    use crate::codes::{make_hamming, make_parity_check};

    fn rule(min_bits: u64, min_word_errors: u64, max_words: u64, chunk_words: u64) -> StoppingRule {
        StoppingRule {
            min_bits,
            min_word_errors,
            max_words,
            chunk_words,
        }
    }

    fn prepare(spec: &str, code: &LinearCode) -> Decoder {
        Decoder::prepare(&spec.parse().unwrap(), code, &DecodeLimits::default()).unwrap()
    }

    #[test]
    fn elementary_symmetric_small_cases() {
        let r = [1.0, 2.0, 3.0];
        assert_eq!(elementary_symmetric(&r, 1), 6.0);
        assert_eq!(elementary_symmetric(&r, 2), 11.0);
        assert_eq!(elementary_symmetric(&r, 3), 6.0);
    }

    #[test]
    fn noiseless_point_is_error_free() {
        let code = make_hamming(3).unwrap();
        let dec = prepare("dfd", &code);
        let row = run_point(
            &code,
            &dec,
            f64::INFINITY,
            &rule(4000, 100, 1000, 100),
            1,
            0,
            1,
        )
        .unwrap();
        assert_eq!((row.bit_errors, row.word_errors), (0, 0));
        assert_eq!(row.avg_queries, 1.0);
        assert_eq!(row.words_sent, 1000);
    }

    #[test]
    fn stopping_rule_is_respected() {
        let code = make_parity_check(4).unwrap();
        let dec = prepare("dfd", &code);
        let row = run_point(&code, &dec, 5.0, &rule(3000, 50, 1_000_000, 100), 2, 0, 1).unwrap();
        assert!(row.bits_sent >= 3000);
        assert!(row.word_errors >= 50);
        // the previous chunk boundary had not met the rule
        assert!(row.word_errors < 50 + 100 || row.bits_sent < 3000 + 300);
        assert_eq!(row.words_sent % 100, 0);
        assert!((row.ber - row.bit_errors as f64 / row.bits_sent as f64).abs() < 1e-15);
        assert!(row.max_queries as f64 >= row.avg_queries && row.avg_queries >= 1.0);
    }

    #[test]
    fn rejects_small_min_bits() {
        let code = make_hamming(3).unwrap();
        let dec = prepare("dfd", &code);
        assert!(matches!(
            run_point(&code, &dec, 5.0, &rule(3, 1, 10, 10), 1, 0, 1),
            Err(HarnessError::InvalidConfig(_))
        ));
    }

    #[test]
    fn same_seed_same_row_for_any_worker_count() {
        let code = make_hamming(3).unwrap();
        let dec = prepare("grand", &code);
        let r = rule(20_000, 30, 200_000, 500);
        let a = run_point(&code, &dec, 8.0, &r, 42, 3, 1).unwrap();
        let b = run_point(&code, &dec, 8.0, &r, 42, 3, 1).unwrap();
        let c = run_point(&code, &dec, 8.0, &r, 42, 3, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn sweep_validates_before_running() {
        let cfg = SweepConfig {
            code: "bch:127,113".parse().unwrap(),
            decoders: vec![DecoderSpec::Dfd, DecoderSpec::SoftMl],
            ebno_db: vec![10.0],
            stopping: StoppingRule::default(),
            seed: 1,
            workers: 1,
            limits: DecodeLimits::default(),
        };
        assert!(matches!(
            run_sweep(&cfg),
            Err(HarnessError::Decode(DecodeError::LimitExceeded { .. }))
        ));
    }

    #[test]
    fn uncoded_simulation_matches_closed_form() {
        let code = crate::codes::make_uncoded(64).unwrap();
        let dec = prepare("hdd", &code);
        for ebno in [5.0, 15.0] {
            let row = run_point(&code, &dec, ebno, &rule(2_000_000, 0, 1, 1000), 5, 0, 1).unwrap();
            let p = uncoded_ber(ebno);
            let sd = (p * (1.0 - p) / row.bits_sent as f64).sqrt();
            assert!(
                (row.ber - p).abs() < 3.0 * sd,
                "{ebno} dB: {} vs {p}",
                row.ber
            );
        }
    }

    #[test]
    fn importance_estimate_agrees_with_direct_simulation() {
        let code = make_parity_check(4).unwrap();
        let dec = prepare("dfd", &code);
        let ebno = 14.0;
        let direct = run_point(
            &code,
            &dec,
            ebno,
            &rule(100_000, 2000, 50_000_000, 20_000),
            7,
            0,
            1,
        )
        .unwrap();
        let cfg = ImportanceConfig {
            target_rel_err: 0.03,
            ..ImportanceConfig::default()
        };
        let is = run_point_importance(&code, &dec, ebno, &cfg, 8, 0, 1).unwrap();
        let sd_direct = direct.ber * (1.0 / direct.bit_errors as f64).sqrt();
        let sd = (sd_direct.powi(2) + (is.ber * is.ber_rel_err).powi(2)).sqrt();
        assert!(
            (is.ber - direct.ber).abs() < 4.0 * sd,
            "IS {} vs direct {}",
            is.ber,
            direct.ber
        );
    }
}
