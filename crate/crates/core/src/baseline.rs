//! Reference decoders: coset-leader syndrome decoding, exhaustive soft ML,
//! GRAND with abandonment, ORBGRAND and fading-GRAND.

use std::cmp::Ordering;
use std::ops::ControlFlow;

use num_complex::Complex64;

use crate::bits::BitWord;
use crate::codes::LinearCode;
use crate::decode::{DecodeError, DecodeOutcome};
use crate::flip::{for_each_combination, Support};

/// Query budget used when none is configured.
pub const DEFAULT_ABANDONMENT: u64 = 1_000_000;

/// Coset leaders indexed by syndrome value.
#[derive(Debug, Clone)]
pub struct SyndromeTable {
    n: usize,
    leaders: Vec<Support>,
}

impl SyndromeTable {
    /// Fills the table with minimum-weight leaders, visiting patterns by
    /// weight and then lexicographic support, so the first pattern to reach
    /// a coset is its leader.
    pub fn build(code: &LinearCode, max_redundancy: usize) -> Result<Self, DecodeError> {
        let m = code.redundancy();
        if m > max_redundancy || m > 30 {
            return Err(DecodeError::LimitExceeded {
                decoder: "syndrome-table",
                what: "n - k",
                value: m,
                limit: max_redundancy.min(30),
            });
        }
        let n = code.n();
        let size = 1usize << m;
        let mut filled = vec![false; size];
        let mut leaders = vec![Support::new(); size];
        filled[0] = true;
        let mut remaining = size - 1;
        let cols: Vec<u64> = (0..n).map(|j| pack(code.column_syndrome(j))).collect();
        for w in 1..=n {
            if remaining == 0 {
                break;
            }
            for_each_combination(n, w, |c| {
                let s = c.iter().fold(0u64, |acc, &j| acc ^ cols[j]) as usize;
                if !filled[s] {
                    filled[s] = true;
                    leaders[s] = c.iter().map(|&j| j as u16).collect();
                    remaining -= 1;
                }
                remaining > 0
            });
        }
        Ok(Self { n, leaders })
    }

    pub fn len(&self) -> usize {
        self.leaders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaders.is_empty()
    }

    /// Coset leader for a syndrome.
    pub fn leader(&self, syndrome: &BitWord) -> BitWord {
        let support: Vec<usize> = self.leaders[pack(syndrome) as usize]
            .iter()
            .map(|&j| j as usize)
            .collect();
        BitWord::from_support(self.n, &support)
    }

    /// Minimum-distance decoding: `r` plus the leader of its coset.
    pub fn decode(&self, code: &LinearCode, r: &BitWord) -> Result<DecodeOutcome, DecodeError> {
        check_len(code, r)?;
        let s = code.syndrome(r)?;
        let leader = &self.leaders[pack(&s) as usize];
        let mut c = r.clone();
        for &j in leader {
            c.flip(j as usize);
        }
        Ok(DecodeOutcome::valid(c, 1, leader.len()))
    }
}

fn pack(s: &BitWord) -> u64 {
    if s.is_empty() {
        0
    } else {
        s.to_u64()
    }
}

fn check_len(code: &LinearCode, r: &BitWord) -> Result<(), DecodeError> {
    if r.len() != code.n() {
        return Err(DecodeError::LengthMismatch {
            what: "received word",
            expected: code.n(),
            actual: r.len(),
        });
    }
    Ok(())
}

/// Hard-decision syndrome decoding with a freshly built table.
pub fn hdd_decode(code: &LinearCode, r: &BitWord) -> Result<DecodeOutcome, DecodeError> {
    SyndromeTable::build(code, 20)?.decode(code, r)
}

/// Coherent correlation `Σ h_j Re(y_j) (-1)^{c_j}`.
pub fn correlation_metric(c: &BitWord, y: &[Complex64], h: &[f64]) -> f64 {
    c.iter()
        .zip(y.iter().zip(h))
        .map(|(b, (yj, hj))| {
            let a = hj * yj.re;
            if b {
                -a
            } else {
                a
            }
        })
        .sum()
}

/// Exhaustive maximum-likelihood decoding over all `2^k` codewords.
///
/// Messages are visited in Gray-code order with the metric updated
/// incrementally; near-ties are settled with exact recomputation, then by
/// the lexicographically smaller codeword.
pub fn soft_ml_decode(
    code: &LinearCode,
    y: &[Complex64],
    h: &[f64],
    max_k: usize,
) -> Result<DecodeOutcome, DecodeError> {
    let (n, k) = (code.n(), code.k());
    if y.len() != n {
        return Err(DecodeError::LengthMismatch {
            what: "received samples",
            expected: n,
            actual: y.len(),
        });
    }
    if h.len() != n {
        return Err(DecodeError::LengthMismatch {
            what: "CSI",
            expected: n,
            actual: h.len(),
        });
    }
    let limit = max_k.min(40);
    if k > limit {
        return Err(DecodeError::LimitExceeded {
            decoder: "soft-ML",
            what: "k",
            value: k,
            limit,
        });
    }
    let a: Vec<f64> = y.iter().zip(h).map(|(yj, hj)| hj * yj.re).collect();
    let scale = a
        .iter()
        .map(|v| v.abs())
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    let tol = 1e-9 * scale;
    let mut c = BitWord::zeros(n);
    let mut metric: f64 = a.iter().sum();
    let mut best = c.clone();
    let mut best_metric = metric;
    for i in 1u64..(1u64 << k) {
        let row = code.generator().row(i.trailing_zeros() as usize);
        for j in row.ones() {
            // flipping bit j changes its sign in the sum
            metric += if c.get(j) { 2.0 * a[j] } else { -2.0 * a[j] };
            c.flip(j);
        }
        if metric > best_metric + tol {
            best.clone_from(&c);
            best_metric = metric;
        } else if metric >= best_metric - tol {
            let exact_new = correlation_metric(&c, y, h);
            let exact_best = correlation_metric(&best, y, h);
            let better = match exact_new.total_cmp(&exact_best) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => c.lex_cmp(&best) == Ordering::Less,
            };
            if better {
                best.clone_from(&c);
                best_metric = exact_new;
            } else {
                best_metric = exact_best;
            }
            metric = exact_new;
        }
    }
    Ok(DecodeOutcome::valid(best, 1u64 << k, 0))
}

/// Abandonment threshold and, for fading-GRAND, the linear rule for the
/// reliability threshold `Δ = slope * ebno_db + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrandConfig {
    abandonment: u64,
    fading: Option<(f64, f64)>,
}

impl GrandConfig {
    pub fn new(abandonment: u64) -> Result<Self, DecodeError> {
        if abandonment == 0 {
            return Err(DecodeError::InvalidAbandonment);
        }
        Ok(Self {
            abandonment,
            fading: None,
        })
    }

    pub fn unbounded() -> Self {
        Self {
            abandonment: u64::MAX,
            fading: None,
        }
    }

    pub fn with_fading(mut self, slope: f64, intercept: f64) -> Self {
        self.fading = Some((slope, intercept));
        self
    }

    pub fn abandonment(&self) -> u64 {
        self.abandonment
    }

    pub fn fading(&self) -> Option<(f64, f64)> {
        self.fading
    }
}

impl Default for GrandConfig {
    fn default() -> Self {
        Self {
            abandonment: DEFAULT_ABANDONMENT,
            fading: None,
        }
    }
}

/// Shared query loop: tests the zero pattern, then every pattern produced
/// by `schedule` (as positions of `r`), until a zero syndrome or the budget
/// runs out. A schedule that ends without a hit also counts as abandonment.
fn guess<F>(
    code: &LinearCode,
    r: &BitWord,
    budget: u64,
    schedule: F,
) -> Result<DecodeOutcome, DecodeError>
where
    F: FnOnce(&mut dyn FnMut(&[usize]) -> ControlFlow<()>),
{
    check_len(code, r)?;
    let s0 = code.syndrome(r)?;
    if s0.is_zero() {
        return Ok(DecodeOutcome::valid(r.clone(), 1, 0));
    }
    let mut queries = 1u64;
    let mut hit: Option<Vec<usize>> = None;
    let mut s = s0.clone();
    schedule(&mut |pattern: &[usize]| {
        if queries >= budget {
            return ControlFlow::Break(());
        }
        queries += 1;
        s.clone_from(&s0);
        for &j in pattern {
            s.xor_assign(code.column_syndrome(j));
        }
        if s.is_zero() {
            hit = Some(pattern.to_vec());
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    });
    Ok(match hit {
        Some(pattern) => {
            let mut c = r.clone();
            for &j in &pattern {
                c.flip(j);
            }
            DecodeOutcome::valid(c, queries, pattern.len())
        }
        None => DecodeOutcome::abandoned(r.clone(), queries),
    })
}

/// Patterns over `positions` by ascending weight, then lexicographic support.
fn weight_schedule(positions: &[usize], visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>) {
    let mut buf = Vec::with_capacity(positions.len());
    for w in 1..=positions.len() {
        let finished = for_each_combination(positions.len(), w, |c| {
            buf.clear();
            buf.extend(c.iter().map(|&i| positions[i]));
            visit(&buf).is_continue()
        });
        if !finished {
            return;
        }
    }
}

/// Hard-decision GRAND.
pub fn grand_decode(
    code: &LinearCode,
    r: &BitWord,
    cfg: &GrandConfig,
) -> Result<DecodeOutcome, DecodeError> {
    let positions: Vec<usize> = (0..code.n()).collect();
    guess(code, r, cfg.abandonment, |visit| {
        weight_schedule(&positions, visit)
    })
}

/// Reliability threshold of fading-GRAND.
pub fn fading_threshold(slope: f64, intercept: f64, ebno_db: f64) -> f64 {
    slope * ebno_db + intercept
}

/// GRAND restricted to positions whose CSI lies below `Δ = slope * ebno_db + intercept`.
pub fn fading_grand_decode(
    code: &LinearCode,
    r: &BitWord,
    h: &[f64],
    ebno_db: f64,
    cfg: &GrandConfig,
) -> Result<DecodeOutcome, DecodeError> {
    fading_grand_over(code, r, h, ebno_db, cfg)
}

pub(crate) fn fading_grand_over(
    code: &LinearCode,
    r: &BitWord,
    h: &[f64],
    ebno_db: f64,
    cfg: &GrandConfig,
) -> Result<DecodeOutcome, DecodeError> {
    if h.len() != code.n() {
        return Err(DecodeError::LengthMismatch {
            what: "CSI",
            expected: code.n(),
            actual: h.len(),
        });
    }
    let (slope, intercept) = cfg.fading.unwrap_or((0.0, f64::INFINITY));
    let delta = fading_threshold(slope, intercept, ebno_db);
    let positions: Vec<usize> = (0..code.n()).filter(|&j| !(h[j] >= delta)).collect();
    guess(code, r, cfg.abandonment, |visit| {
        weight_schedule(&positions, visit)
    })
}

/// Ranks by reliability `|h_j Re(y_j)|`: rank 1 is the least reliable bit,
/// ties broken by lower index. `ranks[j]` is the rank of position `j`.
pub fn reliability_ranks(y: &[Complex64], h: &[f64]) -> Result<Vec<usize>, DecodeError> {
    if y.len() != h.len() {
        return Err(DecodeError::LengthMismatch {
            what: "received samples",
            expected: h.len(),
            actual: y.len(),
        });
    }
    let rel: Vec<f64> = y.iter().zip(h).map(|(yj, hj)| (hj * yj.re).abs()).collect();
    let mut order: Vec<usize> = (0..rel.len()).collect();
    order.sort_by(|&a, &b| rel[a].total_cmp(&rel[b]));
    let mut ranks = vec![0; rel.len()];
    for (i, &j) in order.iter().enumerate() {
        ranks[j] = i + 1;
    }
    Ok(ranks)
}

/// Logistic weight of a set of flipped ranks.
pub fn logistic_weight(ranks: &[usize]) -> usize {
    ranks.iter().sum()
}

/// Sets of distinct ranks in `1..=n`, ordered by logistic weight, then
/// size, then lexicographically, for weights `1..=max_weight`. Each set is
/// passed to `visit` in ascending rank order.
pub fn orbgrand_schedule(
    n: usize,
    max_weight: usize,
    visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
) {
    let mut parts = Vec::new();
    for w in 1..=max_weight {
        for size in 1..=n {
            // smallest sum of `size` distinct positive parts
            if size * (size + 1) / 2 > w {
                break;
            }
            if partitions(w, size, 1, n, &mut parts, visit).is_break() {
                return;
            }
        }
    }
}

/// Strictly increasing parts `>= lo`, `<= hi`, `size` of them, summing to `w`.
fn partitions(
    w: usize,
    size: usize,
    lo: usize,
    hi: usize,
    parts: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if size == 0 {
        return if w == 0 {
            visit(parts)
        } else {
            ControlFlow::Continue(())
        };
    }
    for first in lo..=hi {
        // remaining size-1 parts are at least first+1 .. first+size-1
        let min_rest = (size - 1) * (2 * first + size) / 2;
        if first + min_rest > w {
            break;
        }
        // and at most hi, hi-1, ...
        let max_rest = (size - 1) * (2 * hi + 2 - size) / 2;
        if first + max_rest < w {
            continue;
        }
        parts.push(first);
        let flow = partitions(w - first, size - 1, first + 1, hi, parts, visit);
        parts.pop();
        flow?;
    }
    ControlFlow::Continue(())
}

/// ORBGRAND over the given reliability ranks.
pub fn orbgrand_decode(
    code: &LinearCode,
    r: &BitWord,
    ranks: &[usize],
    cfg: &GrandConfig,
) -> Result<DecodeOutcome, DecodeError> {
    let n = code.n();
    if ranks.len() != n {
        return Err(DecodeError::LengthMismatch {
            what: "reliability ranks",
            expected: n,
            actual: ranks.len(),
        });
    }
    let mut position_of = vec![usize::MAX; n];
    for (j, &rank) in ranks.iter().enumerate() {
        if rank == 0 || rank > n || position_of[rank - 1] != usize::MAX {
            return Err(DecodeError::InvalidRanks { n });
        }
        position_of[rank - 1] = j;
    }
    let mut buf = Vec::new();
    guess(code, r, cfg.abandonment, |visit| {
        orbgrand_schedule(n, n * (n + 1) / 2, &mut |set| {
            buf.clear();
            buf.extend(set.iter().map(|&rank| position_of[rank - 1]));
            visit(&buf)
        })
    })
}
