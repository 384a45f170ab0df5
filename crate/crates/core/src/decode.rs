//! Decoder selection, shared outcome type and a prepared-decoder dispatcher.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::baseline::{
    fading_grand_over, grand_decode, orbgrand_decode, reliability_ranks, soft_ml_decode,
    GrandConfig, SyndromeTable, DEFAULT_ABANDONMENT,
};
use crate::bits::{BitError, BitWord};
use crate::codes::LinearCode;
use crate::flip::{cached_phi, cached_phi_e, flip_decode, FlipPatternSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("{what} has length {actual}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("CSI value {value} at position {position} is not a nonnegative number")]
    InvalidCsi { position: usize, value: f64 },
    #[error("flip decoding needs d_min >= 2, got {0}")]
    DistanceTooSmall(usize),
    #[error("flip window of {window} positions exceeds {n}")]
    WindowTooLarge { window: usize, n: usize },
    #[error("{what} = {value} exceeds {decoder} limit of {limit}")]
    LimitExceeded {
        decoder: &'static str,
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("reliability ranks are not a permutation of 1..={n}")]
    InvalidRanks { n: usize },
    #[error("abandonment threshold must be at least 1")]
    InvalidAbandonment,
    #[error("malformed decoder spec {spec:?}: {reason}")]
    Spec { spec: String, reason: String },
    #[error(transparent)]
    Bits(#[from] BitError),
}

/// Result of one decoding attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub codeword: BitWord,
    /// Syndrome evaluations (codebook queries), including the initial check.
    pub queries: u64,
    /// The returned word passed the parity check.
    pub found_valid: bool,
    /// Weight of the accepted error pattern, 0 when none was accepted.
    pub flips_applied: usize,
    /// The query budget ran out before any pattern was accepted.
    pub abandoned: bool,
}

impl DecodeOutcome {
    pub fn valid(codeword: BitWord, queries: u64, flips_applied: usize) -> Self {
        Self {
            codeword,
            queries,
            found_valid: true,
            flips_applied,
            abandoned: false,
        }
    }

    /// Search exhausted without a hit; the received word is returned.
    pub fn fallback(r: BitWord, queries: u64) -> Self {
        Self {
            codeword: r,
            queries,
            found_valid: false,
            flips_applied: 0,
            abandoned: false,
        }
    }

    pub fn abandoned(r: BitWord, queries: u64) -> Self {
        Self {
            codeword: r,
            queries,
            found_valid: false,
            flips_applied: 0,
            abandoned: true,
        }
    }
}

/// Decoder descriptor: `dfd`, `edfd:ε`, `hdd`, `softml`, `grand`,
/// `orbgrand`, `fading-grand:m,b`.
#[derive(Debug, Clone, PartialEq)]
pub enum DecoderSpec {
    Dfd,
    Edfd { epsilon: usize },
    Hdd,
    SoftMl,
    Grand,
    OrbGrand,
    FadingGrand { slope: f64, intercept: f64 },
}

impl DecoderSpec {
    /// Needs the complex samples, not only hard decisions and CSI.
    pub fn uses_soft_values(&self) -> bool {
        matches!(self, Self::SoftMl | Self::OrbGrand)
    }
}

impl fmt::Display for DecoderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dfd => f.write_str("dfd"),
            Self::Edfd { epsilon } => write!(f, "edfd:{epsilon}"),
            Self::Hdd => f.write_str("hdd"),
            Self::SoftMl => f.write_str("softml"),
            Self::Grand => f.write_str("grand"),
            Self::OrbGrand => f.write_str("orbgrand"),
            Self::FadingGrand { slope, intercept } => write!(f, "fading-grand:{slope},{intercept}"),
        }
    }
}

impl FromStr for DecoderSpec {
    type Err = DecodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason: String| DecodeError::Spec {
            spec: s.to_string(),
            reason,
        };
        let (name, args) = match s.trim().split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (s.trim(), None),
        };
        let no_args = |spec: DecoderSpec| match args {
            None => Ok(spec),
            Some(_) => Err(bad(format!("{name} takes no parameters"))),
        };
        match name {
            "dfd" => no_args(Self::Dfd),
            "hdd" => no_args(Self::Hdd),
            "softml" => no_args(Self::SoftMl),
            "grand" => no_args(Self::Grand),
            "orbgrand" => no_args(Self::OrbGrand),
            "edfd" => {
                let a = args
                    .ok_or_else(|| bad("expected edfd:epsilon".into()))?
                    .trim();
                let epsilon = a
                    .parse()
                    .map_err(|_| bad(format!("epsilon {a:?} is not a nonnegative integer")))?;
                Ok(Self::Edfd { epsilon })
            }
            "fading-grand" => {
                let a = args.ok_or_else(|| bad("expected fading-grand:slope,intercept".into()))?;
                let parts: Vec<&str> = a.split(',').map(str::trim).collect();
                if parts.len() != 2 {
                    return Err(bad("expected two parameters".into()));
                }
                let num = |p: &str| -> Result<f64, DecodeError> {
                    p.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| bad(format!("{p:?} is not a finite number")))
                };
                Ok(Self::FadingGrand {
                    slope: num(parts[0])?,
                    intercept: num(parts[1])?,
                })
            }
            other => Err(bad(format!("unknown decoder {other:?}"))),
        }
    }
}

/// Size limits for the exhaustive baselines and the GRAND query budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeLimits {
    pub soft_ml_max_k: usize,
    pub hdd_max_redundancy: usize,
    pub abandonment: u64,
}

impl Default for DecodeLimits {
    fn default() -> Self {
        Self {
            soft_ml_max_k: 20,
            hdd_max_redundancy: 20,
            abandonment: DEFAULT_ABANDONMENT,
        }
    }
}

/// One received word with everything a decoder might look at.
#[derive(Debug, Clone, Copy)]
pub struct Received<'a> {
    pub r: &'a BitWord,
    pub h: &'a [f64],
    pub y: &'a [Complex64],
    pub ebno_db: f64,
}

#[derive(Debug, Clone)]
enum Prepared {
    Flip(Arc<FlipPatternSet>),
    Hdd(Arc<SyndromeTable>),
    SoftMl,
    Grand(GrandConfig),
    OrbGrand(GrandConfig),
    FadingGrand(GrandConfig),
}

/// A decoder bound to one code, with any tables built up front.
#[derive(Debug, Clone)]
pub struct Decoder {
    spec: DecoderSpec,
    prepared: Prepared,
}

impl Decoder {
    /// Validates the decoder against the code and builds its tables.
    pub fn prepare(
        spec: &DecoderSpec,
        code: &LinearCode,
        limits: &DecodeLimits,
    ) -> Result<Self, DecodeError> {
        let grand_cfg = |fading: Option<(f64, f64)>| -> Result<GrandConfig, DecodeError> {
            let mut cfg = GrandConfig::new(limits.abandonment)?;
            if let Some((m, b)) = fading {
                cfg = cfg.with_fading(m, b);
            }
            Ok(cfg)
        };
        let prepared = match spec {
            DecoderSpec::Dfd => Prepared::Flip(cached_phi(code.d_min(), code.n())?),
            DecoderSpec::Edfd { epsilon } => {
                Prepared::Flip(cached_phi_e(code.d_min(), *epsilon, code.n())?)
            }
            DecoderSpec::Hdd => Prepared::Hdd(Arc::new(SyndromeTable::build(
                code,
                limits.hdd_max_redundancy,
            )?)),
            DecoderSpec::SoftMl => {
                if code.k() > limits.soft_ml_max_k {
                    return Err(DecodeError::LimitExceeded {
                        decoder: "soft-ML",
                        what: "k",
                        value: code.k(),
                        limit: limits.soft_ml_max_k,
                    });
                }
                Prepared::SoftMl
            }
            DecoderSpec::Grand => Prepared::Grand(grand_cfg(None)?),
            DecoderSpec::OrbGrand => Prepared::OrbGrand(grand_cfg(None)?),
            DecoderSpec::FadingGrand { slope, intercept } => {
                Prepared::FadingGrand(grand_cfg(Some((*slope, *intercept)))?)
            }
        };
        Ok(Self {
            spec: spec.clone(),
            prepared,
        })
    }

    pub fn spec(&self) -> &DecoderSpec {
        &self.spec
    }

    pub fn decode(
        &self,
        code: &LinearCode,
        rx: &Received<'_>,
    ) -> Result<DecodeOutcome, DecodeError> {
        match &self.prepared {
            Prepared::Flip(set) => flip_decode(code, rx.r, rx.h, set),
            Prepared::Hdd(table) => table.decode(code, rx.r),
            Prepared::SoftMl => soft_ml_decode(code, rx.y, rx.h, usize::MAX),
            Prepared::Grand(cfg) => grand_decode(code, rx.r, cfg),
            Prepared::OrbGrand(cfg) => {
                let ranks = reliability_ranks(rx.y, rx.h)?;
                orbgrand_decode(code, rx.r, &ranks, cfg)
            }
            Prepared::FadingGrand(cfg) => fading_grand_over(code, rx.r, rx.h, rx.ebno_db, cfg),
        }
    }
}
