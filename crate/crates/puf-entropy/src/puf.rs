//! PUF evaluation and Chow parameters.
//!
//! A PUF of size `n` is the sign function `f_w(c) = sign(c . w)` over
//! challenges `c` in `{-1,+1}^n`, with real weights `w`. Its Chow parameters
//! are the componentwise sum of all challenges mapped to +1; they identify
//! the function uniquely (Chow 1961), are even for n >= 2, and transform
//! like the weights under coordinate permutations and sign flips. Sorting
//! the absolute weights therefore yields a canonical class representative.

use crate::error::{Error, Result};

/// Largest supported PUF size. Above ~16 the `2^n` challenge enumeration
/// gets slow; 24 keeps response vectors and orbit sizes comfortably in
/// fixed-width integers.
pub const MAX_N: usize = 24;

/// Delay-difference weights; one realization of the i.i.d. symmetric model.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Vec<f64>,
}

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.len() > MAX_N {
            return Err(Error::UnsupportedN {
                n: w.len(),
                max: MAX_N,
            });
        }
        if let Some(bad) = w.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "weight {bad} is not finite"
            )));
        }
        Ok(Self { w })
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }
}

/// One challenge, packed as an n-bit word: bit `i` = 0 encodes `c_{i+1} = +1`
/// and bit `i` = 1 encodes `c_{i+1} = -1`. This encoding is part of the
/// response-vector file contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Challenge {
    n: usize,
    bits: u32,
}

impl Challenge {
    pub fn new(n: usize, bits: u32) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::UnsupportedN { n, max: MAX_N });
        }
        if u64::from(bits) >= 1u64 << n {
            return Err(Error::InvalidArgument(format!(
                "challenge bits {bits:#x} out of range for n={n}"
            )));
        }
        Ok(Self { n, bits })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Decoded component `c_{i+1}`, exactly +1 or -1 (0-based index).
    pub fn component(&self, i: usize) -> i8 {
        debug_assert!(i < self.n);
        if self.bits >> i & 1 == 0 {
            1
        } else {
            -1
        }
    }

    /// The antipodal challenge `-c`.
    pub fn complement(&self) -> Self {
        let mask = ((1u64 << self.n) - 1) as u32;
        Self {
            n: self.n,
            bits: self.bits ^ mask,
        }
    }
}

/// Truth table of a self-dual Boolean function: bit at challenge index `c`
/// is 1 iff `f(c) = +1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResponseVector {
    n: usize,
    bits: Vec<u64>,
}

impl ResponseVector {
    /// Builds a response vector from raw table words, enforcing self-duality
    /// `f(-c) = -f(c)` and zeroed padding bits.
    pub fn from_bits(n: usize, bits: Vec<u64>) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::UnsupportedN { n, max: MAX_N });
        }
        let words = Self::word_count(n);
        if bits.len() != words {
            return Err(Error::InvalidArgument(format!(
                "expected {words} table words for n={n}, got {}",
                bits.len()
            )));
        }
        let rv = Self { n, bits };
        if n < 6 {
            let used = 1u64 << n;
            if rv.bits[0] >> used != 0 {
                return Err(Error::InvalidArgument(
                    "nonzero padding bits in response table".into(),
                ));
            }
        }
        if !rv.is_self_dual() {
            return Err(Error::InvalidArgument(
                "response table is not self-dual".into(),
            ));
        }
        Ok(rv)
    }

    pub(crate) fn zeroed(n: usize) -> Self {
        Self {
            n,
            bits: vec![0; Self::word_count(n)],
        }
    }

    fn word_count(n: usize) -> usize {
        (1usize << n).div_ceil(64)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_challenges(&self) -> usize {
        1 << self.n
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    /// `true` iff `f(c) = +1` for the challenge with the given packed bits.
    pub fn get(&self, challenge_bits: u32) -> bool {
        let idx = challenge_bits as usize;
        debug_assert!(idx < self.num_challenges());
        self.bits[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub(crate) fn set(&mut self, challenge_bits: u32, positive: bool) {
        let idx = challenge_bits as usize;
        if positive {
            self.bits[idx / 64] |= 1 << (idx % 64);
        } else {
            self.bits[idx / 64] &= !(1 << (idx % 64));
        }
    }

    pub fn is_self_dual(&self) -> bool {
        let mask = (1u32 << self.n) - 1;
        (0..self.num_challenges() as u32).all(|c| self.get(c) != self.get(c ^ mask))
    }
}

/// Chow parameters: the componentwise sum of challenges mapped to +1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChowVector {
    p: Vec<i64>,
}

impl ChowVector {
    pub fn new(p: Vec<i64>) -> Self {
        Self { p }
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.p
    }

    /// Checks the structural invariants every genuine Chow vector satisfies:
    /// `|p_i| <= 2^(n-1)` and, for n >= 2, every entry even.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 || n > MAX_N {
            return Err(Error::UnsupportedN { n, max: MAX_N });
        }
        let bound = 1i64 << (n - 1);
        for &v in &self.p {
            if v.abs() > bound {
                return Err(Error::Integrity(format!(
                    "chow entry {v} exceeds bound {bound} for n={n}"
                )));
            }
            if n >= 2 && v % 2 != 0 {
                return Err(Error::Integrity(format!(
                    "chow entry {v} is odd at n={n}"
                )));
            }
        }
        Ok(())
    }
}

/// Canonical class representative: a Chow vector sorted non-increasing with
/// all entries non-negative. One key per equivalence class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassKey {
    p: Vec<i64>,
}

impl ClassKey {
    /// Canonicalizes an arbitrary Chow vector: absolute values sorted
    /// non-increasing. This is exactly the group element that sorts the
    /// weights, carried over to the Chow side.
    pub fn from_chow(p: &ChowVector) -> Self {
        let mut k: Vec<i64> = p.entries().iter().map(|v| v.abs()).collect();
        k.sort_unstable_by(|a, b| b.cmp(a));
        Self { p: k }
    }

    /// Wraps an already-canonical vector, validating canonicality, evenness
    /// and the `2^(n-1)` bound.
    pub fn try_new(p: Vec<i64>) -> Result<Self> {
        let chow = ChowVector::new(p);
        chow.validate()?;
        if !is_canonical(&chow) {
            return Err(Error::Integrity(format!(
                "class key {:?} is not canonical",
                chow.entries()
            )));
        }
        Ok(Self {
            p: chow.p,
        })
    }

    pub(crate) fn from_sorted_unchecked(p: Vec<i64>) -> Self {
        debug_assert!(p.windows(2).all(|w| w[0] >= w[1]) && *p.last().unwrap() >= 0);
        Self { p }
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.p
    }

    /// Key of the dictator class `(2^(n-1), 0, ..., 0)`.
    pub fn dictator(n: usize) -> Self {
        let mut p = vec![0i64; n];
        p[0] = 1i64 << (n - 1);
        Self { p }
    }
}

impl std::borrow::Borrow<[i64]> for ClassKey {
    fn borrow(&self) -> &[i64] {
        &self.p
    }
}

/// Sign of `c . w`. The exact-zero case is an error by contract: it signals
/// that the weight vector is not a valid PUF realization and must be
/// resampled upstream.
pub fn eval(w: &WeightVector, c: &Challenge) -> Result<i8> {
    if w.n() != c.n() {
        return Err(Error::DimensionMismatch {
            left: w.n(),
            right: c.n(),
        });
    }
    let mut dot = 0.0;
    for (i, &wi) in w.as_slice().iter().enumerate() {
        if c.bits >> i & 1 == 0 {
            dot += wi;
        } else {
            dot -= wi;
        }
    }
    sign_of(dot)
}

fn sign_of(dot: f64) -> Result<i8> {
    if dot > 0.0 {
        Ok(1)
    } else if dot < 0.0 {
        Ok(-1)
    } else {
        Err(Error::ZeroDotProduct)
    }
}

/// Materializes the full truth table of `f_w` over all `2^n` challenges.
pub fn response_vector(w: &WeightVector) -> Result<ResponseVector> {
    let n = w.n();
    let mut rv = ResponseVector::zeroed(n);
    for bits in 0..(1u64 << n) as u32 {
        let c = Challenge { n, bits };
        if eval(w, &c)? == 1 {
            rv.set(bits, true);
        }
    }
    Ok(rv)
}

/// Chow parameters straight from a truth table: `p = sum of c over f(c)=+1`.
pub fn chow_from_response(rv: &ResponseVector) -> ChowVector {
    let n = rv.n();
    let mut p = vec![0i64; n];
    for bits in 0..rv.num_challenges() as u32 {
        if rv.get(bits) {
            for (i, pi) in p.iter_mut().enumerate() {
                *pi += if bits >> i & 1 == 0 { 1 } else { -1 };
            }
        }
    }
    ChowVector::new(p)
}

/// Reference Chow extraction: re-evaluates the dot product from scratch for
/// every one of the `2^n` challenges. Kept as the independent slow path that
/// pins the Gray-code implementation.
pub fn chow_naive(w: &WeightVector) -> Result<ChowVector> {
    let n = w.n();
    let mut p = vec![0i64; n];
    for bits in 0..(1u64 << n) as u32 {
        let mut dot = 0.0;
        for (i, &wi) in w.as_slice().iter().enumerate() {
            if bits >> i & 1 == 0 {
                dot += wi;
            } else {
                dot -= wi;
            }
        }
        if sign_of(dot)? == 1 {
            for (i, pi) in p.iter_mut().enumerate() {
                *pi += if bits >> i & 1 == 0 { 1 } else { -1 };
            }
        }
    }
    Ok(ChowVector::new(p))
}

/// Chow parameters of `f_w` via the half-space Gray-code walk.
///
/// One-off convenience wrapper; hot loops should hold a [`ChowKernel`] to
/// amortize the mask precomputation.
pub fn chow(w: &WeightVector) -> Result<ChowVector> {
    let mut kernel = ChowKernel::new(w.n())?;
    let p = kernel.compute(w.as_slice())?;
    Ok(ChowVector::new(p.to_vec()))
}

/// Absolute values sorted non-increasing: the weight vector of the canonical
/// class representative. Ties may sort in any order; equal weights produce
/// equal Chow components, so the class key is unaffected.
pub fn canonicalize_weights(w: &WeightVector) -> WeightVector {
    let mut v: Vec<f64> = w.as_slice().iter().map(|x| x.abs()).collect();
    v.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    WeightVector { w: v }
}

/// `true` iff the entries are non-increasing with the last entry >= 0.
pub fn is_canonical(p: &ChowVector) -> bool {
    let e = p.entries();
    e.windows(2).all(|w| w[0] >= w[1]) && e.last().is_none_or(|&last| last >= 0)
}

/// Reusable engine for Chow extraction.
///
/// Only the half-space `{c : c_1 = +1}` is walked, in binary-reflected
/// Gray-code order, so each step updates the running dot product with a
/// single add or subtract. Self-duality `f(-c) = -f(c)` pairs each skipped
/// challenge with a walked one, giving `p = sum over the half-space of
/// f(c) * c`; that sum is recovered from the sign bitmap with one XOR +
/// popcount per coordinate.
pub struct ChowKernel {
    n: usize,
    half: usize,
    /// `masks[i]` bit `m` is set iff component `c_{i+1} = +1` at walk step `m`.
    masks: Vec<Vec<u64>>,
    signs: Vec<u64>,
    p: Vec<i64>,
}

impl ChowKernel {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::UnsupportedN { n, max: MAX_N });
        }
        let half = 1usize << (n - 1);
        let words = half.div_ceil(64);
        let mut masks = vec![vec![0u64; words]; n];
        for m in 0..half {
            let gray = (m ^ (m >> 1)) as u32;
            let challenge = gray << 1; // bit 0 clear: c_1 = +1 on the half-space
            for (i, mask) in masks.iter_mut().enumerate() {
                if challenge >> i & 1 == 0 {
                    mask[m / 64] |= 1 << (m % 64);
                }
            }
        }
        Ok(Self {
            n,
            half,
            masks,
            signs: vec![0; words],
            p: vec![0; n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Computes the Chow parameters of `f_w`, leaving them in an internal
    /// buffer valid until the next call.
    pub fn compute(&mut self, w: &[f64]) -> Result<&[i64]> {
        if w.len() != self.n {
            return Err(Error::DimensionMismatch {
                left: w.len(),
                right: self.n,
            });
        }
        self.signs.iter_mut().for_each(|x| *x = 0);
        let mut dot: f64 = w.iter().sum();
        let mut gray: usize = 0;
        for m in 0..self.half {
            if dot > 0.0 {
                self.signs[m / 64] |= 1 << (m % 64);
            } else if !(dot < 0.0) {
                // exactly zero (or NaN from overflowing inputs): not a PUF
                return Err(Error::ZeroDotProduct);
            }
            let next = m + 1;
            if next < self.half {
                // Walk step m -> m+1 flips Gray bit tz(m+1); challenge bit is
                // one higher because bit 0 is pinned to c_1 = +1.
                let b = next.trailing_zeros() as usize + 1;
                gray ^= 1 << b;
                if gray >> b & 1 == 1 {
                    dot -= 2.0 * w[b];
                } else {
                    dot += 2.0 * w[b];
                }
            }
        }
        let half = self.half as i64;
        for i in 0..self.n {
            let mismatches: u32 = self
                .signs
                .iter()
                .zip(&self.masks[i])
                .map(|(s, m)| (s ^ m).count_ones())
                .sum();
            self.p[i] = half - 2 * i64::from(mismatches);
        }
        Ok(&self.p)
    }
}
