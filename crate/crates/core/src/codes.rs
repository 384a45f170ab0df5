//! Code families: single parity check, Hamming, binary BCH and polar codes.
//!
//! Every [`LinearCode`] is stored in systematic form `G = [I_k | P]` with
//! `H = [Pᵀ | I_{n-k}]`, so the message occupies the first `k` positions of
//! each codeword. Family definitions that are not systematic on their first
//! `k` coordinates are column-permuted during construction.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bits::{parity_from_systematic, syndrome, to_systematic, BitError, BitMatrix, BitWord};
use crate::gf2m::{BinaryPolynomial, FieldError, GF2mField};

/// Largest dimension for which codeword enumeration is attempted by default.
pub const DEFAULT_BRUTE_FORCE_LIMIT: usize = 20;

/// Default Bhattacharyya initialization for polar construction.
pub const DEFAULT_POLAR_DESIGN: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodeError {
    #[error("invalid code parameters: {0}")]
    InvalidParameters(String),
    #[error("brute-force minimum distance refused: k = {k} exceeds the limit {limit}")]
    BruteForceLimit { k: usize, limit: usize },
    #[error("message length {actual} does not match code dimension {expected}")]
    MessageLength { expected: usize, actual: usize },
    #[error("malformed code spec {spec:?}: {reason}")]
    Spec { spec: String, reason: String },
    #[error(transparent)]
    Bits(#[from] BitError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceProvenance {
    Computed,
    Designed,
    Supplied,
}

impl fmt::Display for DistanceProvenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Computed => "computed",
            Self::Designed => "designed",
            Self::Supplied => "supplied",
        })
    }
}

/// A binary linear block code in systematic form.
#[derive(Debug, Clone)]
pub struct LinearCode {
    name: String,
    n: usize,
    k: usize,
    generator: BitMatrix,
    parity_check: BitMatrix,
    d_min: usize,
    provenance: DistanceProvenance,
    /// Column `j` of `H`, i.e. the syndrome of the unit vector `e_j`.
    column_syndromes: Vec<BitWord>,
}

impl LinearCode {
    /// Builds a code from any full-rank generator. The generator is reduced
    /// to systematic form; the column permutation is discarded.
    pub fn from_generator(
        name: impl Into<String>,
        g: &BitMatrix,
        d_min: usize,
        provenance: DistanceProvenance,
    ) -> Result<Self, CodeError> {
        let (g_sys, _perm) = to_systematic(g)?;
        let h = parity_from_systematic(&g_sys)?;
        let n = g_sys.cols();
        let k = g_sys.rows();
        if k == 0 || k > n {
            return Err(CodeError::InvalidParameters(format!(
                "need 1 <= k <= n, got k={k}, n={n}"
            )));
        }
        if d_min == 0 {
            return Err(CodeError::InvalidParameters(
                "d_min must be positive".into(),
            ));
        }
        let column_syndromes = (0..n).map(|j| h.column(j)).collect();
        Ok(Self {
            name: name.into(),
            n,
            k,
            generator: g_sys,
            parity_check: h,
            d_min,
            provenance,
            column_syndromes,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn redundancy(&self) -> usize {
        self.n - self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn d_min(&self) -> usize {
        self.d_min
    }

    pub fn provenance(&self) -> DistanceProvenance {
        self.provenance
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    pub fn parity_check(&self) -> &BitMatrix {
        &self.parity_check
    }

    pub fn column_syndrome(&self, j: usize) -> &BitWord {
        &self.column_syndromes[j]
    }

    pub fn syndrome(&self, v: &BitWord) -> Result<BitWord, BitError> {
        syndrome(&self.parity_check, v)
    }

    pub fn is_codeword(&self, v: &BitWord) -> bool {
        self.syndrome(v).map(|s| s.is_zero()).unwrap_or(false)
    }

    /// Systematic encoding: the first `k` bits of the codeword are the message.
    pub fn encode(&self, message: &BitWord) -> Result<BitWord, CodeError> {
        if message.len() != self.k {
            return Err(CodeError::MessageLength {
                expected: self.k,
                actual: message.len(),
            });
        }
        Ok(self.generator.left_mul(message)?)
    }

    pub fn message_of(&self, codeword: &BitWord) -> BitWord {
        codeword.prefix(self.k)
    }

    /// Replaces `d_min` with the exact value found by enumerating the codebook.
    pub fn with_computed_distance(mut self, limit: usize) -> Result<Self, CodeError> {
        self.d_min = min_distance_bruteforce(&self, limit)?;
        self.provenance = DistanceProvenance::Computed;
        Ok(self)
    }

    /// Overrides `d_min` with an externally known value.
    pub fn with_supplied_distance(mut self, d_min: usize) -> Self {
        self.d_min = d_min;
        self.provenance = DistanceProvenance::Supplied;
        self
    }
}

/// Exact minimum weight over the `2^k - 1` nonzero codewords, visited in Gray-code order.
pub fn min_distance_bruteforce(code: &LinearCode, limit: usize) -> Result<usize, CodeError> {
    let k = code.k();
    if k > limit || k >= 63 {
        return Err(CodeError::BruteForceLimit { k, limit });
    }
    let mut word = BitWord::zeros(code.n());
    let mut best = usize::MAX;
    for i in 1u64..(1u64 << k) {
        let row = i.trailing_zeros() as usize;
        word.xor_assign(code.generator().row(row));
        best = best.min(word.weight());
    }
    Ok(best)
}

/// The `(n, n-1)` single parity check code.
pub fn make_parity_check(n: usize) -> Result<LinearCode, CodeError> {
    if n < 2 {
        return Err(CodeError::InvalidParameters(format!(
            "parity check code needs n >= 2, got {n}"
        )));
    }
    let mut g = BitMatrix::zeros(n - 1, n);
    for i in 0..n - 1 {
        g.set(i, i, true);
        g.set(i, n - 1, true);
    }
    LinearCode::from_generator(format!("pc:{n}"), &g, 2, DistanceProvenance::Designed)
}

/// The `(n, n)` identity code: no redundancy, every word valid. Serves as
/// the uncoded reference in simulations.
pub fn make_uncoded(n: usize) -> Result<LinearCode, CodeError> {
    if n == 0 {
        return Err(CodeError::InvalidParameters(
            "uncoded block needs n >= 1".into(),
        ));
    }
    LinearCode::from_generator(
        format!("uncoded:{n}"),
        &BitMatrix::identity(n),
        1,
        DistanceProvenance::Designed,
    )
}

/// The `(2^m - 1, 2^m - 1 - m)` Hamming code.
///
/// `H = [A | I_m]` where the columns of `A` are the m-bit values of weight
/// at least two in ascending order.
pub fn make_hamming(m: usize) -> Result<LinearCode, CodeError> {
    if !(2..=16).contains(&m) {
        return Err(CodeError::InvalidParameters(format!(
            "Hamming code needs 2 <= m <= 16, got {m}"
        )));
    }
    let n = (1usize << m) - 1;
    let k = n - m;
    let columns: Vec<usize> = (1..=n).filter(|v| v.count_ones() >= 2).collect();
    debug_assert_eq!(columns.len(), k);
    // G = [I_k | Aᵀ]: row i carries the bits of column value i of A.
    let mut g = BitMatrix::zeros(k, n);
    for (i, &v) in columns.iter().enumerate() {
        g.set(i, i, true);
        for b in 0..m {
            if v >> b & 1 == 1 {
                g.set(i, k + b, true);
            }
        }
    }
    LinearCode::from_generator(format!("hamming:{m}"), &g, 3, DistanceProvenance::Designed)
}

/// Generator polynomial of the narrow-sense primitive BCH code with
/// designed distance `2t + 1`: the product of the distinct minimal
/// polynomials of `alpha, alpha^2, ..., alpha^{2t}`.
pub fn bch_generator_polynomial(
    field: &GF2mField,
    t: usize,
) -> Result<BinaryPolynomial, CodeError> {
    let mut seen = Vec::<BinaryPolynomial>::new();
    let mut g = BinaryPolynomial::one();
    for i in 1..=2 * t {
        let mp = field.minimal_polynomial(field.alpha_pow(i as i64))?;
        if !seen.contains(&mp) {
            g = g.mul(&mp);
            seen.push(mp);
        }
    }
    Ok(g)
}

/// Narrow-sense primitive binary BCH code of length `2^m - 1` correcting `t` errors.
///
/// Codeword position `p` holds the coefficient of `x^{n-1-p}`, so the
/// message occupies the high-degree coefficients and the code is
/// systematic on its first `k` positions without any permutation.
pub fn make_bch(m: u32, t: usize) -> Result<LinearCode, CodeError> {
    if m < 3 {
        return Err(CodeError::InvalidParameters(format!(
            "BCH code needs m >= 3, got {m}"
        )));
    }
    let field = GF2mField::new(m)?;
    let n = field.order();
    if t == 0 || 2 * t + 1 > n {
        return Err(CodeError::InvalidParameters(format!(
            "designed distance 2t+1 = {} out of range for n = {n}",
            2 * t + 1
        )));
    }
    let g = bch_generator_polynomial(&field, t)?;
    let deg = g.degree().unwrap_or(0);
    if deg >= n {
        return Err(CodeError::InvalidParameters(format!(
            "t = {t} leaves no message bits for n = {n}"
        )));
    }
    let k = n - deg;
    let mut gm = BitMatrix::zeros(k, n);
    for i in 0..k {
        // row i is x^{k-1-i} g(x)
        for e in 0..=deg {
            if g.coeff(e) {
                gm.set(i, n - k + i - e, true);
            }
        }
    }
    let code = LinearCode::from_generator(
        format!("bch:{n},{k}"),
        &gm,
        2 * t + 1,
        DistanceProvenance::Designed,
    )?;
    if k <= DEFAULT_BRUTE_FORCE_LIMIT {
        code.with_computed_distance(DEFAULT_BRUTE_FORCE_LIMIT)
    } else {
        Ok(code)
    }
}

/// Finds the `t` for which the length-`n` BCH code has dimension exactly `k`.
pub fn make_bch_nk(n: usize, k: usize) -> Result<LinearCode, CodeError> {
    if n < 7 || !(n + 1).is_power_of_two() {
        return Err(CodeError::InvalidParameters(format!(
            "BCH length must be 2^m - 1 with m >= 3, got {n}"
        )));
    }
    let m = (n + 1).trailing_zeros();
    let field = GF2mField::new(m)?;
    for t in 1..=(n - 1) / 2 {
        let deg = bch_generator_polynomial(&field, t)?.degree().unwrap_or(0);
        if deg >= n || n - deg < k {
            break;
        }
        if n - deg == k {
            return make_bch(m, t);
        }
    }
    Err(CodeError::InvalidParameters(format!(
        "no narrow-sense BCH code with n = {n}, k = {k}"
    )))
}

/// Bhattacharyya parameters of the `n` synthetic channels, starting from `z0`.
/// Index `i` corresponds to row `i` of the Kronecker power `F^{⊗log2 n}`.
pub fn bhattacharyya_parameters(n: usize, z0: f64) -> Vec<f64> {
    let mut z = vec![z0];
    while z.len() < n {
        z = z.iter().flat_map(|&x| [2.0 * x - x * x, x * x]).collect();
    }
    z
}

/// Polar code with the `k` most reliable rows of `F^{⊗log2 n}`,
/// `F = [[1, 0], [1, 1]]`, ranked by a Bhattacharyya recursion starting at
/// `design`. `d_min` is the smallest selected row weight.
pub fn make_polar(n: usize, k: usize, design: f64) -> Result<LinearCode, CodeError> {
    if n < 2 || !n.is_power_of_two() {
        return Err(CodeError::InvalidParameters(format!(
            "polar length must be a power of two, got {n}"
        )));
    }
    if k == 0 || k > n {
        return Err(CodeError::InvalidParameters(format!(
            "need 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    if !(design > 0.0 && design < 1.0) {
        return Err(CodeError::InvalidParameters(format!(
            "design parameter must lie in (0, 1), got {design}"
        )));
    }
    let z = bhattacharyya_parameters(n, design);
    let mut order: Vec<usize> = (0..n).collect();
    // smallest Z first; ties go to the higher index
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(b.cmp(&a)));
    let mut info: Vec<usize> = order[..k].to_vec();
    info.sort_unstable();
    let mut g = BitMatrix::zeros(k, n);
    for (r, &i) in info.iter().enumerate() {
        for j in 0..n {
            if j & i == j {
                g.set(r, j, true);
            }
        }
    }
    let d_min = info
        .iter()
        .map(|&i| 1usize << i.count_ones())
        .min()
        .unwrap_or(1);
    LinearCode::from_generator(
        format!("polar:{n},{k}"),
        &g,
        d_min,
        DistanceProvenance::Designed,
    )
}

/// Compact code descriptor: `pc:n`, `hamming:m`, `bch:n,k`,
/// `polar:n,k[,design]`, `uncoded:n`.
#[derive(Debug, Clone, PartialEq)]
pub enum CodeSpec {
    Uncoded { n: usize },
    ParityCheck { n: usize },
    Hamming { m: usize },
    Bch { n: usize, k: usize },
    Polar { n: usize, k: usize, design: f64 },
}

impl CodeSpec {
    pub fn build(&self) -> Result<LinearCode, CodeError> {
        match *self {
            Self::Uncoded { n } => make_uncoded(n),
            Self::ParityCheck { n } => make_parity_check(n),
            Self::Hamming { m } => make_hamming(m),
            Self::Bch { n, k } => make_bch_nk(n, k),
            Self::Polar { n, k, design } => make_polar(n, k, design),
        }
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Uncoded { n } => write!(f, "uncoded:{n}"),
            Self::ParityCheck { n } => write!(f, "pc:{n}"),
            Self::Hamming { m } => write!(f, "hamming:{m}"),
            Self::Bch { n, k } => write!(f, "bch:{n},{k}"),
            Self::Polar { n, k, design } if design == DEFAULT_POLAR_DESIGN => {
                write!(f, "polar:{n},{k}")
            }
            Self::Polar { n, k, design } => write!(f, "polar:{n},{k},{design}"),
        }
    }
}

impl FromStr for CodeSpec {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason: &str| CodeError::Spec {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let (family, args) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| bad("expected family:params"))?;
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        let int = |i: usize| -> Result<usize, CodeError> {
            parts
                .get(i)
                .ok_or_else(|| bad("missing parameter"))?
                .parse()
                .map_err(|_| bad(&format!("parameter {:?} is not an integer", parts[i])))
        };
        let arity = |expected: &[usize]| -> Result<(), CodeError> {
            if expected.contains(&parts.len()) {
                Ok(())
            } else {
                Err(bad(&format!(
                    "wrong number of parameters ({})",
                    parts.len()
                )))
            }
        };
        match family.trim() {
            "uncoded" => {
                arity(&[1])?;
                Ok(Self::Uncoded { n: int(0)? })
            }
            "pc" => {
                arity(&[1])?;
                Ok(Self::ParityCheck { n: int(0)? })
            }
            "hamming" => {
                arity(&[1])?;
                Ok(Self::Hamming { m: int(0)? })
            }
            "bch" => {
                arity(&[2])?;
                Ok(Self::Bch {
                    n: int(0)?,
                    k: int(1)?,
                })
            }
            "polar" => {
                arity(&[2, 3])?;
                let design = match parts.get(2) {
                    Some(p) => p
                        .parse()
                        .map_err(|_| bad(&format!("design parameter {p:?} is not a number")))?,
                    None => DEFAULT_POLAR_DESIGN,
                };
                Ok(Self::Polar {
                    n: int(0)?,
                    k: int(1)?,
                    design,
                })
            }
            other => Err(bad(&format!("unknown family {other:?}"))),
        }
    }
}
