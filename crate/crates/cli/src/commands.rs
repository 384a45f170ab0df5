use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use flipdec::analysis::{coding_gain, pfd_bound, BerCurve, BoundInput};
use flipdec::channel::{db_to_linear, uncoded_ebno_for_ber};
use flipdec::harness::run_sweep;
use flipdec::{
    BitWord, CodeSpec, DecodeLimits, Decoder, DecoderSpec, LinearCode, Received, SweepRow,
};
use num_complex::Complex64;

use crate::config::Manifest;
use crate::csvio::{self, BoundRow};
use crate::error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Code families offered by `codes`.
pub const LISTED_CODES: &[&str] = &[
    "pc:4",
    "pc:12",
    "pc:64",
    "pc:128",
    "pc:256",
    "hamming:3",
    "hamming:4",
    "hamming:5",
    "hamming:6",
    "hamming:7",
    "hamming:8",
    "bch:15,7",
    "bch:15,5",
    "bch:31,21",
    "bch:31,16",
    "bch:31,11",
    "bch:63,51",
    "bch:127,113",
    "bch:255,239",
    "polar:128,120",
    "polar:128,113",
    "polar:128,106",
    "polar:128,99",
];

pub fn cmd_codes() -> Result<String> {
    let mut out = String::new();
    for s in LISTED_CODES {
        let spec: CodeSpec = s.parse()?;
        let code = spec.build()?;
        writeln!(
            out,
            "{spec}  d_min={}  rate={:.4}  n={}  k={}  ({})",
            code.d_min(),
            code.rate(),
            code.n(),
            code.k(),
            code.provenance()
        )
        .expect("write to string");
    }
    Ok(out)
}

/// Reads `@path` as the file's contents, anything else verbatim.
fn inline_or_file(value: &str) -> Result<String> {
    match value.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::io(path, e)),
        None => Ok(value.to_string()),
    }
}

fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
}

pub fn parse_bits(flag: &str, value: &str) -> Result<Vec<u8>> {
    let text = inline_or_file(value)?;
    tokens(&text)
        .enumerate()
        .map(|(i, t)| match t {
            "0" => Ok(0),
            "1" => Ok(1),
            _ => Err(CliError::Usage(format!(
                "{flag}: token {} (`{t}`) is not 0 or 1",
                i + 1
            ))),
        })
        .collect()
}

pub fn parse_reals(flag: &str, value: &str) -> Result<Vec<f64>> {
    let text = inline_or_file(value)?;
    tokens(&text)
        .enumerate()
        .map(|(i, t)| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "{flag}: token {} (`{t}`) is not a finite number",
                        i + 1
                    ))
                })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct DecodeRequest {
    pub code: String,
    pub decoder: String,
    pub r: String,
    pub h: String,
    /// In-phase matched-filter outputs; synthesized as `h_j (1 - 2 r_j)` when absent.
    pub y: Option<String>,
    pub ebno_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeReport {
    pub codeword: BitWord,
    pub message: BitWord,
    pub queries: u64,
    pub flips: BitWord,
    /// 1-based index of the accepted flip pattern, for flip decoders.
    pub pattern: Option<u64>,
    pub found_valid: bool,
    pub abandoned: bool,
}

impl std::fmt::Display for DecodeReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "codeword: {}", self.codeword)?;
        writeln!(f, "message: {}", self.message)?;
        writeln!(f, "queries: {}", self.queries)?;
        writeln!(f, "flips: {}", self.flips)?;
        if let Some(p) = self.pattern {
            writeln!(f, "pattern: {p}")?;
        }
        writeln!(f, "found_valid: {}", self.found_valid)?;
        writeln!(f, "abandoned: {}", self.abandoned)
    }
}

fn check_len(flag: &str, got: usize, n: usize) -> Result<()> {
    if got != n {
        return Err(CliError::Usage(format!(
            "{flag}: expected {n} values, got {got}"
        )));
    }
    Ok(())
}

pub fn cmd_decode(req: &DecodeRequest) -> Result<DecodeReport> {
    let code: LinearCode = req.code.parse::<CodeSpec>()?.build()?;
    let spec: DecoderSpec = req.decoder.parse()?;
    let n = code.n();
    let bits = parse_bits("--r", &req.r)?;
    check_len("--r", bits.len(), n)?;
    let h = parse_reals("--h", &req.h)?;
    check_len("--h", h.len(), n)?;
    let r = BitWord::from_bits(&bits)?;
    let y: Vec<Complex64> = match &req.y {
        Some(v) => {
            let re = parse_reals("--y", v)?;
            check_len("--y", re.len(), n)?;
            re.into_iter().map(|x| Complex64::new(x, 0.0)).collect()
        }
        None => h
            .iter()
            .zip(&bits)
            .map(|(&hj, &b)| Complex64::new(if b == 1 { -hj } else { hj }, 0.0))
            .collect(),
    };
    let ebno_db = match (&spec, req.ebno_db) {
        (DecoderSpec::FadingGrand { .. }, None) => {
            return Err(CliError::Usage("--ebno is required by fading-grand".into()));
        }
        (_, e) => e.unwrap_or(0.0),
    };
    let decoder = Decoder::prepare(&spec, &code, &DecodeLimits::default())?;
    let out = decoder.decode(
        &code,
        &Received {
            r: &r,
            h: &h,
            y: &y,
            ebno_db,
        },
    )?;
    let pattern = match spec {
        DecoderSpec::Dfd | DecoderSpec::Edfd { .. } if out.found_valid && out.queries > 1 => {
            Some(out.queries - 1)
        }
        _ => None,
    };
    Ok(DecodeReport {
        message: code.message_of(&out.codeword),
        flips: out.codeword.xor(&r),
        codeword: out.codeword,
        queries: out.queries,
        pattern,
        found_valid: out.found_valid,
        abandoned: out.abandoned,
    })
}

#[derive(Debug, Clone, Default)]
pub struct SimulateRequest {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

pub fn cmd_simulate(req: &SimulateRequest) -> Result<(PathBuf, Vec<SweepRow>)> {
    let (mut manifest, text) = Manifest::load(&req.config)?;
    let workers = req.workers.or(manifest.workers).unwrap_or(1).max(1);
    let sweep = manifest.to_sweep(&text, &req.config, workers)?;
    let sweep = match req.seed {
        Some(seed) => {
            manifest.seed = seed;
            flipdec::SweepConfig { seed, ..sweep }
        }
        None => sweep,
    };
    let out = req
        .out
        .clone()
        .or_else(|| manifest.output.path.clone())
        .ok_or_else(|| CliError::Usage("no output path: pass --out or set [output] path".into()))?;
    manifest.output.path = Some(out.clone());
    let rows = run_sweep(&sweep)?;
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let comments = vec![
        format!("flipdec {VERSION}"),
        format!("generated_unix_s = {stamp}"),
        manifest.canonical(),
    ];
    write_csv_file(&out, |f| csvio::write_sweep(f, &comments, &rows))?;
    Ok((out, rows))
}

fn write_csv_file(
    path: &Path,
    write: impl FnOnce(BufWriter<File>) -> Result<(), csv::Error>,
) -> Result<()> {
    let f = File::create(path).map_err(|e| CliError::io(path, e))?;
    write(BufWriter::new(f)).map_err(|source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

/// `E_b/N_0` grid from an explicit list or an inclusive `start..=stop` range.
pub fn ebno_grid(list: Option<&str>, range: Option<(f64, f64, f64)>) -> Result<Vec<f64>> {
    match (list, range) {
        (Some(l), None) => parse_reals("--ebno", l),
        (None, Some((start, stop, step))) => {
            if !(step > 0.0) || !(stop >= start) {
                return Err(CliError::Usage(format!(
                    "need step > 0 and stop >= start, got {start}..{stop} by {step}"
                )));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(CliError::Usage(
            "give either --ebno or all of --start, --stop, --step".into(),
        )),
    }
}

/// Bound rows over an `E_b/N_0` grid; `k` sets the rate used to convert to
/// per-symbol SNR and defaults to `n`.
pub fn cmd_bound(
    n: usize,
    d_min: usize,
    k: Option<usize>,
    ebno_db: &[f64],
) -> Result<Vec<BoundRow>> {
    let k = k.unwrap_or(n);
    if k == 0 || k > n {
        return Err(CliError::Usage(format!("--k must lie in 1..={n}, got {k}")));
    }
    let rate = k as f64 / n as f64;
    let rho_c_bar: Vec<f64> = ebno_db.iter().map(|&e| rate * db_to_linear(e)).collect();
    let input = BoundInput::new(n, d_min, rho_c_bar.iter().map(|r| 2.0 * r).collect())?;
    Ok(pfd_bound(&input)
        .into_iter()
        .zip(ebno_db.iter().zip(&rho_c_bar))
        .map(|(p, (&ebno_db, &rho_c_bar))| BoundRow {
            ebno_db,
            rho_c_bar,
            bound: p.bound,
        })
        .collect())
}

pub fn write_bound(path: Option<&Path>, rows: &[BoundRow]) -> Result<Option<String>> {
    let comments = vec![format!("flipdec {VERSION}")];
    match path {
        Some(p) => write_csv_file(p, |f| csvio::write_rows(f, &comments, rows)).map(|_| None),
        None => {
            let mut buf = Vec::new();
            csvio::write_rows(&mut buf, &comments, rows).map_err(|source| CliError::Csv {
                path: "-".into(),
                source,
            })?;
            Ok(Some(String::from_utf8_lossy(&buf).into_owned()))
        }
    }
}

/// BER curve of one (code, decoder) group in a sweep CSV.
pub fn curve_from_csv(path: &Path, decoder: Option<&str>) -> Result<BerCurve> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    let rows = csvio::read_sweep(f).map_err(|source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let rows: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| decoder.is_none_or(|d| r.decoder == d))
        .collect();
    let Some(first) = rows.first() else {
        return Err(CliError::Usage(format!(
            "{}: no matching rows",
            path.display()
        )));
    };
    if rows
        .iter()
        .any(|r| r.code != first.code || r.decoder != first.decoder)
    {
        return Err(CliError::Usage(format!(
            "{}: several code/decoder groups, select one with --decoder",
            path.display()
        )));
    }
    let mut pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.ebno_db, r.ber)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(BerCurve::resolved(
        format!("{} {}", first.code, first.decoder),
        pts,
    )?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainReport {
    pub coded_ebno_db: f64,
    pub reference_ebno_db: f64,
    pub gain_db: f64,
}

/// Coding gain of `coded` over `reference` at `target`. The reference
/// `uncoded` uses the closed-form uncoded curve.
pub fn cmd_gain(
    coded: &Path,
    reference: &str,
    target: f64,
    decoder: Option<&str>,
) -> Result<GainReport> {
    let c = curve_from_csv(coded, decoder)?;
    let coded_ebno_db = c.ebno_at(target)?;
    let reference_ebno_db = if reference == "uncoded" {
        uncoded_ebno_for_ber(target)
            .ok_or_else(|| CliError::Usage(format!("target BER {target} is outside (0, 0.5)")))?
    } else {
        let r = curve_from_csv(Path::new(reference), None)?;
        let g = coding_gain(&c, &r, target)?;
        return Ok(GainReport {
            coded_ebno_db,
            reference_ebno_db: coded_ebno_db + g,
            gain_db: g,
        });
    };
    Ok(GainReport {
        coded_ebno_db,
        reference_ebno_db,
        gain_db: reference_ebno_db - coded_ebno_db,
    })
}
