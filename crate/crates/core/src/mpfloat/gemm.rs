//! Block floating-point complex matrix product.
//!
//! Each row of `a` and each column of `b` shares one binary exponent, so
//! entries become fixed-point integers split into signed 56-bit limbs. A dot
//! product is then a sum of `i64 × i64 → i128` limb products with no carry
//! handling until the very end, and the complex product takes three real
//! products instead of four. Limb products below position `D - 2` are never
//! formed; with the alignment shifts this keeps the error within a few units
//! of `2^(-64N)` times `k · max|a_i·| · max|b_·j|`, the normwise bound the
//! naive product obeys.

use super::{MpFloat, MAX_LIMBS};
use num_complex::Complex;

const LIMB_BITS: u32 = 56;
/// Limb count bound over every supported `N`.
const MAX_D: usize = (64 * MAX_LIMBS + 55) / 56;
/// Largest inner dimension whose column sums provably fit in `i128`.
pub(crate) const MAX_INNER: usize = 1 << 10;

struct Layout<const N: usize>;

impl<const N: usize> Layout<N> {
    /// Signed limbs per fixed-point value.
    const D: usize = (64 * N + 55) / 56;
}

/// Splits `x / 2^scale`, a value below one in magnitude, into `D` signed
/// limbs: `x = Σ_u d_u 2^(56u) / 2^(64N) · 2^scale`.
fn limbs<const N: usize>(x: &MpFloat<N>, scale: i64, out: &mut [i64]) {
    out.fill(0);
    if x.is_zero() {
        return;
    }
    let shift = (scale - x.exp) as u64;
    if shift >= 64 * N as u64 {
        return;
    }
    let bit = |i: u64| -> u64 {
        // bit i of mant >> shift
        let j = i + shift;
        if j >= 64 * N as u64 {
            0
        } else {
            x.mant[(j / 64) as usize] >> (j % 64) & 1
        }
    };
    for (u, d) in out.iter_mut().enumerate() {
        let lo = u as u64 * LIMB_BITS as u64;
        let word_lo = lo + shift;
        // fast path: the 56 bits sit inside at most two mantissa words
        let v = if word_lo + LIMB_BITS as u64 <= 64 * N as u64 {
            let (q, r) = ((word_lo / 64) as usize, (word_lo % 64) as u32);
            let low = x.mant[q] >> r;
            let high = if r == 0 || q + 1 >= N { 0 } else { x.mant[q + 1] << (64 - r) };
            (low | high) & ((1u64 << LIMB_BITS) - 1)
        } else {
            (0..LIMB_BITS as u64).fold(0u64, |acc, b| acc | bit(lo + b) << b)
        };
        *d = if x.neg { -(v as i64) } else { v as i64 };
    }
}

/// Column sums `Σ_p Σ_u a_p[u] b_p[col - u]` for `col = D-2 ..= 2D-2`.
#[inline(always)]
fn column_sums<const N: usize>(a: &[i64], b: &[i64], out: &mut [i128; MAX_D + 1]) {
    let d = Layout::<N>::D;
    let mut acc = [0i128; MAX_D + 1];
    for (ap, bp) in a.chunks_exact(d).zip(b.chunks_exact(d)) {
        for u in 0..d {
            let x = ap[u] as i128;
            // v ranges so that u + v >= d - 2
            for v in (d - 2).saturating_sub(u)..d {
                acc[u + v + 2 - d] += x * bp[v] as i128;
            }
        }
    }
    *out = acc;
}

/// Rounds `Σ_s sums[s] 2^(56 s) · 2^(scale')` to `MpFloat`, where the
/// exponent offset folds the dropped low columns and the fixed-point scales.
fn finish<const N: usize>(sums: &[i128; MAX_D + 1], d: usize, scale: i64) -> MpFloat<N> {
    // two's-complement accumulator of W limbs
    const W: usize = MAX_D + 6;
    let w = (LIMB_BITS as usize * d + 192) / 64 + 1;
    let mut acc = [0u64; W];
    for (s, &v) in sums[..=d].iter().enumerate() {
        if v == 0 {
            continue;
        }
        let off = LIMB_BITS as usize * s;
        let (q, r) = (off / 64, (off % 64) as u32);
        // v << r as a sign-extended 3-limb value
        let ext = if v < 0 { u64::MAX } else { 0 };
        let words = [v as u64, (v >> 64) as u64, ext];
        let shifted = if r == 0 {
            words
        } else {
            [
                words[0] << r,
                (words[1] << r) | (words[0] >> (64 - r)),
                (words[2] << r) | (words[1] >> (64 - r)),
            ]
        };
        let mut carry = 0u64;
        for k in q..w {
            let add = if k - q < 3 { shifted[k - q] } else { ext };
            let (x, c1) = acc[k].overflowing_add(add);
            let (x, c2) = x.overflowing_add(carry);
            acc[k] = x;
            carry = (c1 as u64) + (c2 as u64);
        }
    }
    let neg = acc[w - 1] >> 63 == 1;
    let mut mag = [0u64; W];
    if neg {
        let mut carry = 1u64;
        for k in 0..w {
            let (x, c) = (!acc[k]).overflowing_add(carry);
            mag[k] = x;
            carry = c as u64;
        }
    } else {
        mag = acc;
    }
    let Some(top) = (0..w).rev().find(|&k| mag[k] != 0) else {
        return MpFloat::ZERO;
    };
    let top_bit = 64 * top as i64 + 63 - mag[top].leading_zeros() as i64;
    // bit `top_bit` becomes the leading mantissa bit
    let get = |i: i64| -> u64 {
        if i < 0 || i >= 64 * w as i64 {
            0
        } else {
            mag[(i / 64) as usize] >> (i % 64) & 1
        }
    };
    let word_at = |lo: i64| -> u64 {
        // 64 bits of mag starting at bit `lo` (may be negative)
        if lo >= 0 {
            let (q, r) = ((lo / 64) as usize, (lo % 64) as u32);
            let low = mag[q] >> r;
            let high = if r == 0 || q + 1 >= w { 0 } else { mag[q + 1] << (64 - r) };
            low | high
        } else {
            (0..64).fold(0u64, |acc, b| acc | get(lo + b) << b)
        }
    };
    let mut mant = [0u64; N];
    for (k, m) in mant.iter_mut().enumerate() {
        *m = word_at(top_bit + 1 - 64 * (N - k) as i64);
    }
    let guard = get(top_bit - 64 * N as i64);
    let mut x = MpFloat {
        mant,
        exp: top_bit + 1 + scale,
        neg,
    };
    if guard == 1 {
        x.round_up();
    }
    x
}

fn exponent_of<const N: usize>(zs: impl Iterator<Item = Complex<MpFloat<N>>>) -> Option<i64> {
    zs.flat_map(|z| [z.re, z.im])
        .filter(|x| !x.is_zero())
        .map(|x| x.exp)
        .max()
}

/// `a (m×k) · b (k×n)`, row-major. Requires `k <= MAX_INNER`.
pub(crate) fn cgemm<const N: usize>(
    a: &[Complex<MpFloat<N>>],
    b: &[Complex<MpFloat<N>>],
    m: usize,
    k: usize,
    n: usize,
) -> Vec<Complex<MpFloat<N>>> {
    assert!(N >= 2 && k <= MAX_INNER);
    let d = Layout::<N>::D;
    let row_exp: Vec<Option<i64>> = (0..m)
        .map(|i| exponent_of(a[i * k..(i + 1) * k].iter().copied()))
        .collect();
    let col_exp: Vec<Option<i64>> = (0..n)
        .map(|j| exponent_of((0..k).map(|p| b[p * n + j])))
        .collect();
    // per row of a: planes re, im, re + im, each k × d
    let mut fa = vec![0i64; m * 3 * k * d];
    for i in 0..m {
        let Some(e) = row_exp[i] else { continue };
        let base = i * 3 * k * d;
        for p in 0..k {
            let z = a[i * k + p];
            let (re, rest) = fa[base..base + 3 * k * d].split_at_mut(k * d);
            let (im, sum) = rest.split_at_mut(k * d);
            let r = &mut re[p * d..(p + 1) * d];
            let s = &mut im[p * d..(p + 1) * d];
            limbs(&z.re, e, r);
            limbs(&z.im, e, s);
            for ((t, x), y) in sum[p * d..(p + 1) * d].iter_mut().zip(r.iter()).zip(s.iter()) {
                *t = x + y;
            }
        }
    }
    // per column of b: planes re, im - re, re + im
    let mut fb = vec![0i64; n * 3 * k * d];
    let mut re = vec![0i64; d];
    let mut im = vec![0i64; d];
    for j in 0..n {
        let Some(e) = col_exp[j] else { continue };
        let base = j * 3 * k * d;
        for p in 0..k {
            let z = b[p * n + j];
            limbs(&z.re, e, &mut re);
            limbs(&z.im, e, &mut im);
            for u in 0..d {
                fb[base + p * d + u] = re[u];
                fb[base + k * d + p * d + u] = im[u] - re[u];
                fb[base + 2 * k * d + p * d + u] = re[u] + im[u];
            }
        }
    }
    let zero = Complex::new(MpFloat::ZERO, MpFloat::ZERO);
    let mut out = vec![zero; m * n];
    let (mut k1, mut k2, mut k3) = ([0i128; MAX_D + 1], [0i128; MAX_D + 1], [0i128; MAX_D + 1]);
    let plane = k * d;
    for i in 0..m {
        let Some(ei) = row_exp[i] else { continue };
        let ar = &fa[i * 3 * plane..];
        let (a_re, a_im, a_sum) = (&ar[..plane], &ar[plane..2 * plane], &ar[2 * plane..3 * plane]);
        for j in 0..n {
            let Some(fj) = col_exp[j] else { continue };
            let bc = &fb[j * 3 * plane..];
            let (b_re, b_diff, b_sum) = (&bc[..plane], &bc[plane..2 * plane], &bc[2 * plane..3 * plane]);
            // k1 = br (ar + ai), k2 = ar (bi - br), k3 = ai (br + bi)
            column_sums::<N>(a_sum, b_re, &mut k1);
            column_sums::<N>(a_re, b_diff, &mut k2);
            column_sums::<N>(a_im, b_sum, &mut k3);
            let mut re_s = [0i128; MAX_D + 1];
            let mut im_s = [0i128; MAX_D + 1];
            for s in 0..=d {
                re_s[s] = k1[s] - k3[s];
                im_s[s] = k1[s] + k2[s];
            }
            // value = Σ sums[s] 2^(56 (s + d - 2)) / 2^(128 N) · 2^(ei + fj)
            let scale = ei + fj + LIMB_BITS as i64 * (d as i64 - 2) - 128 * N as i64;
            out[i * n + j] = Complex::new(finish(&re_s, d, scale), finish(&im_s, d, scale));
        }
    }
    out
}
