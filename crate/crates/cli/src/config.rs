//! Simulation manifests.
//!
//! ```toml
//! seed = 7
//!
//! [code]
//! spec = "bch:15,7"
//!
//! [decoders]
//! list = ["dfd", "edfd:3"]
//!
//! [channel]
//! ebno_db = [10.0, 12.0, 14.0]   # or: start = 10.0, stop = 14.0, step = 2.0
//!
//! [stopping]
//! min_bits = 1000000
//! min_word_errors = 100
//!
//! [output]
//! path = "bch15.csv"
//! ```

use std::ops::Range;
use std::path::{Path, PathBuf};

use flipdec::{CodeSpec, DecodeLimits, DecoderSpec, StoppingRule, SweepConfig};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub seed: u64,
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
    pub code: CodeSection,
    pub decoders: DecoderSection,
    pub channel: ChannelSection,
    #[serde(default)]
    pub stopping: StoppingSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSection {
    pub spec: Spanned<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderSection {
    pub list: Vec<Spanned<String>>,
    pub soft_ml_max_k: Option<usize>,
    pub hdd_max_redundancy: Option<usize>,
    pub abandonment: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub ebno_db: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoppingSection {
    pub min_bits: u64,
    pub min_word_errors: u64,
    pub max_words: u64,
    pub chunk_words: u64,
}

impl Default for StoppingSection {
    fn default() -> Self {
        let r = StoppingRule::default();
        Self {
            min_bits: r.min_bits,
            min_word_errors: r.min_word_errors,
            max_words: r.max_words,
            chunk_words: r.chunk_words,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
}

fn line_of(text: &str, span: &Range<usize>) -> usize {
    text[..span.start.min(text.len())].matches('\n').count() + 1
}

impl Manifest {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string().trim_end().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok((Self::parse(&text, path)?, text))
    }

    /// Validates field contents against the source text they came from.
    pub fn to_sweep(&self, text: &str, path: &Path, workers: usize) -> Result<SweepConfig> {
        let err = |line: Option<usize>, field: &str, message: String| CliError::Config {
            path: path.to_path_buf(),
            message: match line {
                Some(l) => format!("line {l}, field `{field}`: {message}"),
                None => format!("field `{field}`: {message}"),
            },
        };
        let code: CodeSpec =
            self.code
                .spec
                .get_ref()
                .parse()
                .map_err(|e: flipdec::CodeError| {
                    err(
                        Some(line_of(text, &self.code.spec.span())),
                        "code.spec",
                        e.to_string(),
                    )
                })?;
        if self.decoders.list.is_empty() {
            return Err(err(
                None,
                "decoders.list",
                "at least one decoder is required".into(),
            ));
        }
        let decoders = self
            .decoders
            .list
            .iter()
            .map(|d| {
                d.get_ref().parse::<DecoderSpec>().map_err(|e| {
                    err(
                        Some(line_of(text, &d.span())),
                        "decoders.list",
                        e.to_string(),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let ebno_db = match (
            &self.channel.ebno_db,
            self.channel.start,
            self.channel.stop,
            self.channel.step,
        ) {
            (Some(list), None, None, None) => list.clone(),
            (None, Some(start), Some(stop), Some(step)) => {
                if !(step > 0.0) || !(stop >= start) {
                    return Err(err(
                        None,
                        "channel",
                        format!("need step > 0 and stop >= start, got {start}..{stop} by {step}"),
                    ));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|i| start + i as f64 * step).collect()
            }
            _ => {
                return Err(err(
                    None,
                    "channel",
                    "give either `ebno_db = [...]` or all of `start`, `stop`, `step`".into(),
                ))
            }
        };
        if ebno_db.is_empty() {
            return Err(err(None, "channel.ebno_db", "the grid is empty".into()));
        }
        let mut limits = DecodeLimits::default();
        if let Some(k) = self.decoders.soft_ml_max_k {
            limits.soft_ml_max_k = k;
        }
        if let Some(r) = self.decoders.hdd_max_redundancy {
            limits.hdd_max_redundancy = r;
        }
        if let Some(a) = self.decoders.abandonment {
            limits.abandonment = a;
        }
        let s = self.stopping;
        Ok(SweepConfig {
            code,
            decoders,
            ebno_db,
            stopping: StoppingRule {
                min_bits: s.min_bits,
                min_word_errors: s.min_word_errors,
                max_words: s.max_words,
                chunk_words: s.chunk_words,
            },
            seed: self.seed,
            workers,
            limits,
        })
    }

    /// Canonical TOML form, without the worker count.
    pub fn canonical(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }
}
