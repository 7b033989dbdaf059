//! The hyperoctahedral group `G_n = S_n x {-1,+1}^n` acting on weights,
//! challenges and Chow vectors, plus the orbit-stabilizer class size.
//!
//! Because the weight components are i.i.d. and symmetric, the PUF
//! distribution is invariant under this action; orbits are exactly the
//! equiprobable equivalence classes.

use crate::error::{Error, Result};
use crate::puf::{Challenge, ChowVector, ClassKey, ResponseVector, WeightVector};
use itertools::Itertools;
use rand::Rng;

/// A permutation paired with per-coordinate signs: `(g.x)_i = s_i * x_{perm(i)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupElement {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

impl GroupElement {
    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let n = perm.len();
        if signs.len() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: signs.len(),
            });
        }
        let mut seen = vec![false; n];
        for &j in &perm {
            if j >= n || seen[j] {
                return Err(Error::InvalidArgument(format!(
                    "{perm:?} is not a permutation of 0..{n}"
                )));
            }
            seen[j] = true;
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument("signs must be +1 or -1".into()));
        }
        Ok(Self { perm, signs })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            signs: vec![1; n],
        }
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Group product: `compose(a, b)` acts as first `b`, then `a`
    /// (`(a*b).x = a.(b.x)`).
    pub fn compose(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n(), other.n());
        let n = self.n();
        let mut perm = vec![0; n];
        let mut signs = vec![1i8; n];
        for i in 0..n {
            perm[i] = other.perm[self.perm[i]];
            signs[i] = self.signs[i] * other.signs[self.perm[i]];
        }
        Self { perm, signs }
    }

    pub fn inverse(&self) -> Self {
        let n = self.n();
        let mut perm = vec![0; n];
        let mut signs = vec![1i8; n];
        for i in 0..n {
            perm[self.perm[i]] = i;
            signs[self.perm[i]] = self.signs[i];
        }
        Self { perm, signs }
    }

    /// Applies the action to a weight vector.
    pub fn act(&self, w: &WeightVector) -> WeightVector {
        let src = w.as_slice();
        let out: Vec<f64> = (0..self.n())
            .map(|i| f64::from(self.signs[i]) * src[self.perm[i]])
            .collect();
        WeightVector::new(out).expect("action preserves validity")
    }

    /// Same action formula on the Chow side (the action commutes with Chow
    /// extraction).
    pub fn act_chow(&self, p: &ChowVector) -> ChowVector {
        let src = p.entries();
        ChowVector::new(
            (0..self.n())
                .map(|i| i64::from(self.signs[i]) * src[self.perm[i]])
                .collect(),
        )
    }

    /// Action on a packed challenge: `(g.c)_i = s_i * c_{perm(i)}`.
    pub fn act_challenge(&self, c: &Challenge) -> Challenge {
        let mut bits = 0u32;
        for i in 0..self.n() {
            let negative = (c.bits() >> self.perm[i] & 1 == 1) != (self.signs[i] == -1);
            if negative {
                bits |= 1 << i;
            }
        }
        Challenge::new(self.n(), bits).expect("action preserves validity")
    }

    /// Action on a truth table: `(g.f)(c) = f(g^{-1}.c)`.
    pub fn act_response(&self, rv: &ResponseVector) -> ResponseVector {
        let inv = self.inverse();
        let n = rv.n();
        let mut out = ResponseVector::zeroed(n);
        for bits in 0..rv.num_challenges() as u32 {
            let c = Challenge::new(n, bits).unwrap();
            let pre = inv.act_challenge(&c);
            out.set(bits, rv.get(pre.bits()));
        }
        out
    }

    /// Uniformly random element, handy for randomized property checks.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        // Fisher-Yates
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            perm.swap(i, j);
        }
        let signs = (0..n)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        Self { perm, signs }
    }
}

/// All `2^n * n!` elements of `G_n`. Intended for small n (the oracle uses
/// n <= 5).
pub fn enumerate_group(n: usize) -> Vec<GroupElement> {
    let mut out = Vec::with_capacity((1usize << n) * (1..=n).product::<usize>());
    for perm in (0..n).permutations(n) {
        for sign_bits in 0..1u32 << n {
            let signs = (0..n)
                .map(|i| if sign_bits >> i & 1 == 0 { 1 } else { -1 })
                .collect();
            out.push(GroupElement {
                perm: perm.clone(),
                signs,
            });
        }
    }
    out
}

/// Exact equivalence-class size via orbit-stabilizer:
/// `2^n n! / (2^{m(0)} * prod_k m(k)!)` where `m(k)` is the multiplicity of
/// the value `k` in the canonical key. Exact integer arithmetic throughout;
/// `2^24 * 24!` still fits in a u128.
pub fn orbit_size(key: &ClassKey) -> u128 {
    let n = key.n();
    let mut numerator: u128 = 1u128 << n;
    for k in 2..=n as u128 {
        numerator *= k;
    }
    let mut denominator: u128 = 1;
    let entries = key.entries();
    let mut i = 0;
    while i < entries.len() {
        let mut run = 1usize;
        while i + run < entries.len() && entries[i + run] == entries[i] {
            run += 1;
        }
        for r in 2..=run as u128 {
            denominator *= r;
        }
        if entries[i] == 0 {
            denominator <<= run;
        }
        i += run;
    }
    debug_assert_eq!(numerator % denominator, 0);
    numerator / denominator
}
