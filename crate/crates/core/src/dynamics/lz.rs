//! Lempel-Ziv (1976) complexity of the median-binarised signal.

use crate::math;

/// Binarises by the median: 1 where the sample is at or above it, else 0.
pub fn binarize_median(signal: &[f64]) -> Vec<u8> {
    let med = math::median(signal);
    signal.iter().map(|&s| u8::from(s >= med)).collect()
}

/// Number of phrases in the LZ76 exhaustive-history parsing (Kaspar-Schuster
/// scan). Each new phrase is the shortest extension not reproducible from the
/// preceding history.
pub fn lz76_phrases(s: &[u8]) -> usize {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    if n == 1 {
        return 1;
    }
    let (mut i, mut k, mut l, mut k_max) = (0usize, 1usize, 1usize, 1usize);
    let mut c = 1;
    loop {
        if s[i + k - 1] == s[l + k - 1] {
            k += 1;
            if l + k > n {
                c += 1;
                break;
            }
        } else {
            k_max = k_max.max(k);
            i += 1;
            if i == l {
                c += 1;
                l += k_max;
                if l + 1 > n {
                    break;
                }
                i = 0;
                k = 1;
                k_max = 1;
            } else {
                k = 1;
            }
        }
    }
    c
}

pub fn lempel_ziv(signal: &[f64]) -> usize {
    lz76_phrases(&binarize_median(signal))
}
