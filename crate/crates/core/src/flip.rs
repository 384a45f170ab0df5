//! Flip-pattern sets and the diversity flip decoders.
//!
//! Both decoders sort the CSI, take the `d + epsilon` least reliable
//! positions as a window and try flip patterns on that window in a fixed
//! order until the syndrome vanishes. DFD uses the counting-order set `Φ`
//! over `d = d_min - 1` positions; EDFD uses the weight-ordered set `Φ_e`
//! over a window widened by `epsilon`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use smallvec::SmallVec;

use crate::bits::BitWord;
use crate::codes::LinearCode;
use crate::decode::{DecodeError, DecodeOutcome};

/// Support of one flip pattern, as positions inside the sorted window.
pub type Support = SmallVec<[u16; 8]>;

/// Largest window the DFD counting set is built for (`2^d - 1` patterns).
pub const MAX_WINDOW: usize = 24;

/// Ordered list of flip vectors for a given `(d, epsilon, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipPatternSet {
    d: usize,
    epsilon: usize,
    n: usize,
    supports: Vec<Support>,
}

impl FlipPatternSet {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn epsilon(&self) -> usize {
        self.epsilon
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of leading sorted positions the patterns may touch.
    pub fn window(&self) -> usize {
        self.d + self.epsilon
    }

    pub fn len(&self) -> usize {
        self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }

    pub fn supports(&self) -> &[Support] {
        &self.supports
    }

    /// Pattern `i` (0-based) as a length-`n` flip vector in sorted coordinates.
    pub fn pattern(&self, i: usize) -> BitWord {
        let support: Vec<usize> = self.supports[i].iter().map(|&p| p as usize).collect();
        BitWord::from_support(self.n, &support)
    }

    pub fn patterns(&self) -> Vec<BitWord> {
        (0..self.len()).map(|i| self.pattern(i)).collect()
    }
}

fn check_window(d_min: usize, epsilon: usize, n: usize) -> Result<usize, DecodeError> {
    if d_min < 2 {
        return Err(DecodeError::DistanceTooSmall(d_min));
    }
    let d = d_min - 1;
    if d + epsilon > n {
        return Err(DecodeError::WindowTooLarge {
            window: d + epsilon,
            n,
        });
    }
    if d + epsilon > MAX_WINDOW {
        return Err(DecodeError::WindowTooLarge {
            window: d + epsilon,
            n: MAX_WINDOW,
        });
    }
    Ok(d)
}

/// `Φ`: pattern `i = 1 .. 2^d - 1` is the binary expansion of `i` over `d`
/// positions, least significant bit first.
pub fn build_phi(d_min: usize, n: usize) -> Result<FlipPatternSet, DecodeError> {
    let d = check_window(d_min, 0, n)?;
    let supports = (1u32..(1u32 << d))
        .map(|i| (0..d as u16).filter(|&b| i >> b & 1 == 1).collect())
        .collect();
    Ok(FlipPatternSet {
        d,
        epsilon: 0,
        n,
        supports,
    })
}

/// `Φ_e`: every pattern of weight `1..=d` over a window of `d + epsilon`
/// positions, by ascending weight, then lexicographic support.
pub fn build_phi_e(d_min: usize, epsilon: usize, n: usize) -> Result<FlipPatternSet, DecodeError> {
    let d = check_window(d_min, epsilon, n)?;
    let w = d + epsilon;
    let mut supports = Vec::new();
    for weight in 1..=d {
        for_each_combination(w, weight, |c| {
            supports.push(c.iter().map(|&p| p as u16).collect());
            true
        });
    }
    Ok(FlipPatternSet {
        d,
        epsilon,
        n,
        supports,
    })
}

/// Visits the `k`-subsets of `0..n` in lexicographic order until `f` returns false.
/// Returns false if stopped early.
pub(crate) fn for_each_combination(
    n: usize,
    k: usize,
    mut f: impl FnMut(&[usize]) -> bool,
) -> bool {
    if k > n {
        return true;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        if !f(&c) {
            return false;
        }
        // rightmost position that can still advance
        let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
            return true;
        };
        c[i] += 1;
        for j in i + 1..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

type CacheKey = (usize, usize, usize, bool);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<FlipPatternSet>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<FlipPatternSet>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn cached(
    d_min: usize,
    epsilon: usize,
    n: usize,
    extended: bool,
) -> Result<Arc<FlipPatternSet>, DecodeError> {
    let key = (d_min, epsilon, n, extended);
    if let Some(set) = cache().lock().expect("pattern cache poisoned").get(&key) {
        return Ok(Arc::clone(set));
    }
    let set = Arc::new(if extended {
        build_phi_e(d_min, epsilon, n)?
    } else {
        build_phi(d_min, n)?
    });
    cache()
        .lock()
        .expect("pattern cache poisoned")
        .entry(key)
        .or_insert_with(|| Arc::clone(&set));
    Ok(set)
}

/// Shared copy of `Φ` for `(d_min, n)`.
pub fn cached_phi(d_min: usize, n: usize) -> Result<Arc<FlipPatternSet>, DecodeError> {
    cached(d_min, 0, n, false)
}

/// Shared copy of `Φ_e` for `(d_min, epsilon, n)`.
pub fn cached_phi_e(
    d_min: usize,
    epsilon: usize,
    n: usize,
) -> Result<Arc<FlipPatternSet>, DecodeError> {
    cached(d_min, epsilon, n, true)
}

/// Stable ascending sort of the CSI. `perm[i]` is the original index of the
/// `i`-th smallest value.
pub fn sort_csi(h: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut perm: Vec<usize> = (0..h.len()).collect();
    perm.sort_by(|&a, &b| h[a].total_cmp(&h[b]));
    let sorted = perm.iter().map(|&i| h[i]).collect();
    (sorted, perm)
}

/// Original indices of the `w` smallest CSI values, in ascending order,
/// ties by lower index. Agrees with the first `w` entries of [`sort_csi`].
pub fn least_reliable(h: &[f64], w: usize) -> Vec<usize> {
    let key = |&i: &usize| (h[i], i);
    let cmp = |a: &usize, b: &usize| {
        let (ha, ia) = key(a);
        let (hb, ib) = key(b);
        ha.total_cmp(&hb).then(ia.cmp(&ib))
    };
    let mut idx: Vec<usize> = (0..h.len()).collect();
    if w == 0 {
        return Vec::new();
    }
    if w < idx.len() {
        idx.select_nth_unstable_by(w - 1, cmp);
        idx.truncate(w);
    }
    idx.sort_unstable_by(cmp);
    idx
}

fn check_inputs(code: &LinearCode, r: &BitWord, h: &[f64]) -> Result<(), DecodeError> {
    if r.len() != code.n() {
        return Err(DecodeError::LengthMismatch {
            what: "received word",
            expected: code.n(),
            actual: r.len(),
        });
    }
    if h.len() != code.n() {
        return Err(DecodeError::LengthMismatch {
            what: "CSI",
            expected: code.n(),
            actual: h.len(),
        });
    }
    if let Some(j) = h.iter().position(|v| !(*v >= 0.0)) {
        return Err(DecodeError::InvalidCsi {
            position: j,
            value: h[j],
        });
    }
    Ok(())
}

/// Runs the flip loop of either decoder over `set`.
///
/// The syndrome of each candidate is the syndrome of `r` plus the column
/// syndromes of the flipped positions, so no candidate word is materialized.
pub fn flip_decode(
    code: &LinearCode,
    r: &BitWord,
    h: &[f64],
    set: &FlipPatternSet,
) -> Result<DecodeOutcome, DecodeError> {
    check_inputs(code, r, h)?;
    if set.n() != code.n() {
        return Err(DecodeError::LengthMismatch {
            what: "flip pattern set",
            expected: code.n(),
            actual: set.n(),
        });
    }
    let s0 = code.syndrome(r)?;
    if s0.is_zero() {
        return Ok(DecodeOutcome::valid(r.clone(), 1, 0));
    }
    let window = least_reliable(h, set.window());
    let mut queries = 1u64;
    let mut s = s0.clone();
    for support in set.supports() {
        queries += 1;
        s.clone_from(&s0);
        for &p in support {
            s.xor_assign(code.column_syndrome(window[p as usize]));
        }
        if s.is_zero() {
            let mut c = r.clone();
            for &p in support {
                c.flip(window[p as usize]);
            }
            return Ok(DecodeOutcome::valid(c, queries, support.len()));
        }
    }
    Ok(DecodeOutcome::fallback(r.clone(), queries))
}

/// Diversity flip decoder.
pub fn dfd_decode(code: &LinearCode, r: &BitWord, h: &[f64]) -> Result<DecodeOutcome, DecodeError> {
    let set = cached_phi(code.d_min(), code.n())?;
    flip_decode(code, r, h, &set)
}

/// Extended diversity flip decoder with window extension `epsilon`.
pub fn edfd_decode(
    code: &LinearCode,
    r: &BitWord,
    h: &[f64],
    epsilon: usize,
) -> Result<DecodeOutcome, DecodeError> {
    let set = cached_phi_e(code.d_min(), epsilon, code.n())?;
    flip_decode(code, r, h, &set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{make_bch, make_hamming, make_parity_check};
    use proptest::prelude::*;

    fn lcg(state: &mut u64) -> f64 {
        *state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (*state >> 11) as f64 / (1u64 << 53) as f64
    }

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn sort_csi_small_example() {
        let h = [0.82, 1.3, 1.08, 0.09, 0.43, 1.8, 0.32];
        let (sorted, perm) = sort_csi(&h);
        assert_eq!(sorted, vec![0.09, 0.32, 0.43, 0.82, 1.08, 1.3, 1.8]);
        let one_based: Vec<usize> = perm.iter().map(|i| i + 1).collect();
        assert_eq!(one_based, vec![4, 7, 5, 1, 3, 2, 6]);
    }

    #[test]
    fn sort_csi_identity_cases() {
        assert_eq!(sort_csi(&[0.1, 0.2, 0.3]).1, vec![0, 1, 2]);
        assert_eq!(sort_csi(&[0.5; 6]).1, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn least_reliable_agrees_with_full_sort() {
        let mut state = 5u64;
        for n in [1usize, 7, 15, 63] {
            for _ in 0..50 {
                // coarse values force ties
                let h: Vec<f64> = (0..n)
                    .map(|_| (lcg(&mut state) * 8.0).floor() / 4.0)
                    .collect();
                let perm = sort_csi(&h).1;
                for w in 0..=n.min(10) {
                    assert_eq!(least_reliable(&h, w), perm[..w].to_vec());
                }
            }
        }
    }

    #[test]
    fn phi_counting_order() {
        let set = build_phi(5, 15).unwrap();
        assert_eq!(set.len(), 15);
        assert_eq!(set.pattern(2).to_string(), "110000000000000");
        assert_eq!(
            build_phi(2, 9).unwrap().patterns(),
            vec![BitWord::from_support(9, &[0])]
        );
        assert!(matches!(
            build_phi(1, 9),
            Err(DecodeError::DistanceTooSmall(1))
        ));
    }

    #[test]
    fn phi_e_sizes_and_order() {
        assert_eq!(build_phi_e(5, 2, 15).unwrap().len(), 56);
        for d_min in 2..=6 {
            for eps in 0..=3 {
                let set = build_phi_e(d_min, eps, 15).unwrap();
                let d = d_min - 1;
                assert_eq!(set.len(), (1..=d).map(|i| binom(d + eps, i)).sum::<usize>());
                let weights: Vec<usize> = set.supports().iter().map(|s| s.len()).collect();
                assert!(weights.windows(2).all(|w| w[0] <= w[1]));
                assert!(set
                    .supports()
                    .iter()
                    .flatten()
                    .all(|&p| (p as usize) < d + eps));
            }
        }
        assert!(matches!(
            build_phi_e(5, 12, 15),
            Err(DecodeError::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn phi_e_without_extension_covers_phi() {
        for d_min in 2..=7 {
            let mut a = build_phi(d_min, 10).unwrap().patterns();
            let mut b = build_phi_e(d_min, 0, 10).unwrap().patterns();
            a.sort_by(|x, y| x.lex_cmp(y));
            b.sort_by(|x, y| x.lex_cmp(y));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn cache_returns_shared_sets() {
        let a = cached_phi(4, 12).unwrap();
        let b = cached_phi(4, 12).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(*a, build_phi(4, 12).unwrap());
        assert_ne!(*cached_phi_e(4, 0, 12).unwrap(), *a);
    }

    #[test]
    fn valid_input_costs_one_query() {
        let code = make_hamming(3).unwrap();
        let c = code
            .encode(&BitWord::from_bits(&[1, 0, 1, 1]).unwrap())
            .unwrap();
        let h = [0.3, 0.2, 1.0, 0.9, 0.1, 2.0, 0.5];
        for out in [
            dfd_decode(&code, &c, &h).unwrap(),
            edfd_decode(&code, &c, &h, 2).unwrap(),
        ] {
            assert_eq!(out.codeword, c);
            assert_eq!(out.queries, 1);
            assert!(out.found_valid);
            assert_eq!(out.flips_applied, 0);
        }
    }

    #[test]
    fn length_mismatch_is_reported() {
        let code = make_hamming(3).unwrap();
        let r = BitWord::zeros(6);
        assert!(matches!(
            dfd_decode(&code, &r, &[1.0; 7]),
            Err(DecodeError::LengthMismatch { .. })
        ));
        assert!(matches!(
            dfd_decode(&code, &BitWord::zeros(7), &[1.0; 6]),
            Err(DecodeError::LengthMismatch { .. })
        ));
        assert!(matches!(
            dfd_decode(
                &code,
                &BitWord::zeros(7),
                &[1.0, 1.0, -1.0, 1.0, 1.0, 1.0, 1.0]
            ),
            Err(DecodeError::InvalidCsi { position: 2, .. })
        ));
    }

    /// Every nonzero error confined to the `d` least reliable positions is removed.
    fn assert_window_errors_corrected(code: &LinearCode, draws: usize, seed: u64) {
        let d = code.d_min() - 1;
        let mut state = seed;
        for _ in 0..draws {
            let msg = BitWord::from_bools((0..code.k()).map(|_| lcg(&mut state) < 0.5));
            let c = code.encode(&msg).unwrap();
            let h: Vec<f64> = (0..code.n()).map(|_| lcg(&mut state) * 3.0).collect();
            let window = sort_csi(&h).1;
            for e in 1u32..(1 << d) {
                let mut r = c.clone();
                for (b, &p) in window.iter().take(d).enumerate() {
                    if e >> b & 1 == 1 {
                        r.flip(p);
                    }
                }
                let out = dfd_decode(code, &r, &h).unwrap();
                assert_eq!(out.codeword, c, "{} pattern {e}", code.name());
                assert!(out.found_valid);
                assert_eq!(out.queries, 1 + e as u64);
            }
        }
    }

    #[test]
    fn corrects_window_errors_on_small_codes() {
        assert_window_errors_corrected(&make_parity_check(12).unwrap(), 100, 1);
        assert_window_errors_corrected(&make_hamming(3).unwrap(), 100, 2);
        assert_window_errors_corrected(&make_hamming(4).unwrap(), 100, 3);
        assert_window_errors_corrected(&make_bch(4, 2).unwrap(), 100, 4);
    }

    #[test]
    fn query_bound_is_attained_on_hamming_7_4() {
        let code = make_hamming(3).unwrap();
        let h = [0.7, 0.1, 0.4, 1.2, 0.3, 0.9, 2.0];
        let mut worst = 0;
        for v in 0u64..128 {
            let out = dfd_decode(&code, &BitWord::from_u64(v, 7), &h).unwrap();
            assert!(out.queries <= 4);
            worst = worst.max(out.queries);
        }
        assert_eq!(worst, 4);
    }

    #[test]
    fn output_is_valid_or_the_input() {
        let code = make_bch(4, 2).unwrap();
        let mut state = 77u64;
        for _ in 0..2000 {
            let r = BitWord::from_bools((0..15).map(|_| lcg(&mut state) < 0.3));
            let h: Vec<f64> = (0..15).map(|_| lcg(&mut state)).collect();
            for out in [
                dfd_decode(&code, &r, &h).unwrap(),
                edfd_decode(&code, &r, &h, 2).unwrap(),
            ] {
                if out.found_valid {
                    assert!(code.is_codeword(&out.codeword));
                    assert_eq!(out.codeword.distance(&r), out.flips_applied);
                } else {
                    assert_eq!(out.codeword, r);
                    assert!(!out.abandoned);
                }
            }
        }
    }

    #[test]
    fn extended_without_extension_matches_dfd() {
        let code = make_bch(4, 2).unwrap();
        let mut state = 99u64;
        for _ in 0..10_000 {
            let r = BitWord::from_bools((0..15).map(|_| lcg(&mut state) < 0.2));
            let h: Vec<f64> = (0..15).map(|_| lcg(&mut state)).collect();
            let a = dfd_decode(&code, &r, &h).unwrap();
            let b = edfd_decode(&code, &r, &h, 0).unwrap();
            assert_eq!(a.found_valid, b.found_valid);
            assert_eq!(a.codeword, b.codeword);
        }
    }

    #[test]
    fn extended_hit_is_within_error_weight() {
        let code = make_bch(4, 2).unwrap();
        let mut state = 123u64;
        for eps in 0..=3 {
            for _ in 0..500 {
                let msg = BitWord::from_bools((0..7).map(|_| lcg(&mut state) < 0.5));
                let c = code.encode(&msg).unwrap();
                let h: Vec<f64> = (0..15).map(|_| lcg(&mut state)).collect();
                let window = sort_csi(&h).1;
                let w = 1 + (lcg(&mut state) * 4.0) as usize;
                let mut r = c.clone();
                let mut placed = 0;
                while placed < w {
                    let p = window[(lcg(&mut state) * (4 + eps) as f64) as usize];
                    if r.get(p) == c.get(p) {
                        r.flip(p);
                        placed += 1;
                    }
                }
                let out = edfd_decode(&code, &r, &h, eps).unwrap();
                assert!(out.found_valid);
                assert!(out.codeword.distance(&r) <= w);
            }
        }
    }

    proptest! {
        #[test]
        fn permutation_is_coherent(h in proptest::collection::vec(0.0f64..4.0, 1..40), bits in any::<u64>()) {
            let n = h.len();
            let r = BitWord::from_u64(bits & ((1u64 << n.min(63)) - 1), n);
            let perm = sort_csi(&h).1;
            prop_assert_eq!(r.permuted(&perm).unpermuted(&perm), r);
        }

        #[test]
        fn sorted_csi_is_ascending(h in proptest::collection::vec(0.0f64..4.0, 0..40)) {
            let (sorted, perm) = sort_csi(&h);
            prop_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
            for (i, &p) in perm.iter().enumerate() {
                prop_assert_eq!(sorted[i], h[p]);
            }
        }
    }
}
