//! Ground truth at small n.
//!
//! Enumerates every self-dual threshold function for n <= 5 by walking all
//! `2^(2^(n-1))` self-dual assignments, deciding threshold membership with
//! an exact rational LP (fast integer witnesses pre-screen the positives),
//! and reducing to canonical class keys. Also provides the exact n=3
//! Gaussian class probabilities by deterministic quadrature, used to check
//! estimator unbiasedness without Monte-Carlo noise.

mod simplex;

use std::collections::BTreeSet;

use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::group::{enumerate_group, orbit_size};
use crate::puf::{chow_from_response, is_canonical, ClassKey, ResponseVector};
use simplex::{rat, LpResult, Rat};

/// Total number of PUFs of size n = 1..=10: the census of self-dual
/// threshold functions of n variables, equal to the number of linearly
/// separable Boolean functions of n-1 variables (OEIS A000609; enumerated
/// through n=10 by Gruzling, "Linear separability of the vertices of an
/// n-dimensional hypercube", 2008).
pub const KNOWN_PUF_COUNTS: [u64; 10] = [
    2,
    4,
    14,
    104,
    1882,
    94572,
    15_028_134,
    8_378_070_864,
    17_561_539_552_946,
    144_130_531_453_121_108,
];

/// Largest n the exhaustive census supports (65536 candidates at n=5).
pub const MAX_CENSUS_N: usize = 5;

/// One equivalence class in an exact census.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusEntry {
    pub key: ClassKey,
    pub orbit_size: u128,
    /// The canonical PUF of the class (its Chow vector equals the key).
    pub representative: ResponseVector,
}

/// Extends an assignment on the half-space `{c : c_1 = +1}` to a full
/// self-dual truth table. Bit j of `assignment` is `f` at challenge word
/// `2j`; the antipodal word gets the complement.
fn extend_self_dual(n: usize, assignment: u64) -> ResponseVector {
    let mut rv = ResponseVector::zeroed(n);
    let mask = (1u32 << n) - 1;
    for j in 0..1u32 << (n - 1) {
        let word = j << 1;
        let positive = assignment >> j & 1 == 1;
        rv.set(word, positive);
        rv.set(word ^ mask, !positive);
    }
    rv
}

/// Integer dot product `c . w` for a packed challenge word.
fn int_dot(word: u32, w: &[i64]) -> i64 {
    w.iter()
        .enumerate()
        .map(|(i, &wi)| if word >> i & 1 == 0 { wi } else { -wi })
        .sum()
}

/// Checks whether integer weights witness the table exactly:
/// `sign(c . w) = f(c)` with no zero dot products, over the half-space
/// (self-duality covers the rest).
fn is_exact_witness(rv: &ResponseVector, w: &[i64]) -> bool {
    let n = rv.n();
    (0..1u32 << (n - 1)).all(|j| {
        let word = j << 1;
        let dot = int_dot(word, w);
        dot != 0 && (dot > 0) == rv.get(word)
    })
}

/// Classic perceptron over the half-space constraints. Returns integer
/// witness weights when it converges within the iteration budget; thin
/// separating cones fall through to the LP.
fn perceptron_witness(rv: &ResponseVector) -> Option<Vec<i64>> {
    const MAX_PASSES: usize = 200;
    let n = rv.n();
    let half = 1u32 << (n - 1);
    let mut w = vec![0i64; n];
    for _ in 0..MAX_PASSES {
        let mut updated = false;
        for j in 0..half {
            let word = j << 1;
            let f: i64 = if rv.get(word) { 1 } else { -1 };
            if f * int_dot(word, &w) <= 0 {
                for (i, wi) in w.iter_mut().enumerate() {
                    let ci: i64 = if word >> i & 1 == 0 { 1 } else { -1 };
                    *wi += f * ci;
                }
                updated = true;
            }
        }
        if !updated {
            return Some(w);
        }
    }
    None
}

/// Margin LP deciding threshold membership exactly: maximize t subject to
/// `f(c) * (c . w) >= t` over the half-space and `|w_i| <= 1`, in rational
/// arithmetic (variables shifted to `v = w + 1 >= 0`). The table is a
/// threshold function iff the optimal margin is strictly positive.
fn margin_lp(rv: &ResponseVector) -> (Rat, Vec<Rat>) {
    let n = rv.n();
    let nv = n + 1; // v_1..v_n, t
    let mut constraints: Vec<(Vec<Rat>, Rat)> = Vec::with_capacity((1 << (n - 1)) + n);
    for j in 0..1u32 << (n - 1) {
        let word = j << 1;
        let f: i64 = if rv.get(word) { 1 } else { -1 };
        let mut row = vec![rat(0); nv];
        let mut csum = 0i64;
        for (i, coeff) in row.iter_mut().take(n).enumerate() {
            let ci: i64 = if word >> i & 1 == 0 { 1 } else { -1 };
            csum += ci;
            *coeff = rat(-f * ci);
        }
        row[n] = rat(1);
        constraints.push((row, rat(-f * csum)));
    }
    for i in 0..n {
        let mut row = vec![rat(0); nv];
        row[i] = rat(1);
        constraints.push((row, rat(2)));
    }
    let mut objective = vec![rat(0); nv];
    objective[n] = rat(1);
    match simplex::maximize(&objective, &constraints) {
        LpResult::Optimal { objective, x } => {
            let weights = x[..n].iter().map(|v| v - rat(1)).collect();
            (objective, weights)
        }
        // v = 1, t = 0 is always feasible and t is boxed above.
        other => unreachable!("margin LP cannot be {other:?}"),
    }
}

/// Exact threshold-membership test for a self-dual table.
pub fn is_threshold(rv: &ResponseVector) -> bool {
    threshold_witness(rv).is_some()
}

/// Produces separating weights when the table is a threshold function.
///
/// Tries the table's own Chow vector as weights, then a perceptron, both
/// verified exactly in integer arithmetic; only unresolved tables reach the
/// rational LP.
pub fn threshold_witness(rv: &ResponseVector) -> Option<Vec<f64>> {
    let p = chow_from_response(rv);
    if is_exact_witness(rv, p.entries()) {
        return Some(p.entries().iter().map(|&v| v as f64).collect());
    }
    if let Some(w) = perceptron_witness(rv) {
        debug_assert!(is_exact_witness(rv, &w));
        return Some(w.iter().map(|&v| v as f64).collect());
    }
    let (margin, weights) = margin_lp(rv);
    use num_traits::Signed;
    if margin.is_positive() {
        Some(weights.iter().map(rational_to_f64).collect())
    } else {
        None
    }
}

fn rational_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("small rationals convert exactly enough")
}

/// Runs the margin LP directly, bypassing the integer fast paths. Mainly a
/// verification surface: the LP is what certifies the negatives, and this
/// lets tests exercise its positive side too.
pub fn lp_margin_witness(rv: &ResponseVector) -> Option<Vec<f64>> {
    use num_traits::Signed;
    let (margin, weights) = margin_lp(rv);
    margin
        .is_positive()
        .then(|| weights.iter().map(rational_to_f64).collect())
}

/// Exhaustive census of all PUF equivalence classes for `1 <= n <= 5`,
/// sorted by key in descending lexicographic order.
///
/// Only candidates whose Chow vector is already canonical are tested: each
/// threshold class contains exactly one canonical PUF, so this visits every
/// class once and never twice.
pub fn enumerate_pufs(n: usize) -> Result<Vec<CensusEntry>> {
    if n == 0 || n > MAX_CENSUS_N {
        return Err(Error::UnsupportedN {
            n,
            max: MAX_CENSUS_N,
        });
    }
    let candidates = 1u64 << (1u32 << (n - 1));
    let mut entries: Vec<CensusEntry> = (0..candidates)
        .into_par_iter()
        .filter_map(|assignment| {
            let rv = extend_self_dual(n, assignment);
            let p = chow_from_response(&rv);
            if !is_canonical(&p) || !is_threshold(&rv) {
                return None;
            }
            let key = ClassKey::try_new(p.entries().to_vec())
                .expect("canonical chow vectors are valid keys");
            let orbit_size = orbit_size(&key);
            Some(CensusEntry {
                key,
                orbit_size,
                representative: rv,
            })
        })
        .collect();
    entries.sort_by(|a, b| b.key.cmp(&a.key));
    Ok(entries)
}

/// All distinct images of a table under the group action.
pub fn expand_orbit(rv: &ResponseVector) -> BTreeSet<ResponseVector> {
    enumerate_group(rv.n())
        .iter()
        .map(|g| g.act_response(rv))
        .collect()
}

/// Every individual PUF of size `n <= 4`, materialized by expanding the
/// census orbits.
pub fn all_pufs(n: usize) -> Result<Vec<ResponseVector>> {
    if n == 0 || n > 4 {
        return Err(Error::UnsupportedN { n, max: 4 });
    }
    let mut all = BTreeSet::new();
    for entry in enumerate_pufs(n)? {
        let orbit = expand_orbit(&entry.representative);
        debug_assert_eq!(orbit.len() as u128, entry.orbit_size);
        all.extend(orbit);
    }
    Ok(all.into_iter().collect())
}

/// Checks that distinct enumerated PUFs have distinct Chow vectors
/// (Chow's uniqueness theorem, verified by brute force for n <= 4).
pub fn verify_chow_injectivity(n: usize) -> Result<bool> {
    let pufs = all_pufs(n)?;
    let mut seen = BTreeSet::new();
    for rv in &pufs {
        if !seen.insert(chow_from_response(rv).entries().to_vec()) {
            return Ok(false);
        }
    }
    Ok(true)
}

const QUAD_TAIL: f64 = 12.0;

fn gaussian_density(x: f64) -> f64 {
    (-(x * x) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Upper tail of the standard normal, via the complementary error function.
fn gaussian_upper_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Recursive adaptive Simpson quadrature with Richardson acceptance.
fn adaptive_simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        m: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let lm = (a + m) / 2.0;
        let rm = (m + b) / 2.0;
        let left = simpson(f, a, lm, m);
        let right = simpson(f, m, rm, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, lm, m, left, tol / 2.0, depth - 1)
                + recurse(f, m, rm, b, right, tol / 2.0, depth - 1)
        }
    }
    let m = (a + b) / 2.0;
    recurse(&f, a, m, b, simpson(&f, a, m, b), tol, 48)
}

/// `P(X1 > |X2| + |X3|)` for i.i.d. standard normals: the probability of
/// one specific dictator PUF at n=3, computed to about 1e-10 absolute error
/// by iterated adaptive quadrature of the closed-form inner tail.
pub fn dictator_puf_probability_n3() -> f64 {
    let inner = |u: f64| {
        adaptive_simpson(
            move |v: f64| gaussian_density(v) * gaussian_upper_tail(u + v),
            0.0,
            QUAD_TAIL,
            1e-13,
        )
    };
    4.0 * adaptive_simpson(
        move |u: f64| gaussian_density(u) * inner(u),
        0.0,
        QUAD_TAIL,
        1e-12,
    )
}

/// Exact Gaussian class probabilities at n=3: the dictator class
/// `(4,0,0)` (6 PUFs) and the majority class `(2,2,2)` (8 PUFs).
pub fn exact_class_probabilities_n3() -> Vec<(ClassKey, f64)> {
    let q = dictator_puf_probability_n3();
    vec![
        (ClassKey::try_new(vec![4, 0, 0]).unwrap(), 6.0 * q),
        (ClassKey::try_new(vec![2, 2, 2]).unwrap(), 1.0 - 6.0 * q),
    ]
}

/// Exact power-sum `sum_f P(f)^2` over all n=3 PUFs under Gaussian weights.
pub fn exact_power_sum_n3() -> f64 {
    let q = dictator_puf_probability_n3();
    let r = (1.0 - 6.0 * q) / 8.0;
    6.0 * q * q + 8.0 * r * r
}

/// Exact (H1, H2, Hinf) in bits at n=3 under Gaussian weights, straight
/// from the class probabilities.
pub fn exact_renyi_entropies_n3() -> (f64, f64, f64) {
    let q = dictator_puf_probability_n3();
    let class_dict = 6.0 * q;
    let class_maj = 1.0 - 6.0 * q;
    let h1 = -(class_dict * class_dict.log2() + class_maj * class_maj.log2())
        + class_dict * 6f64.log2()
        + class_maj * 8f64.log2();
    let h2 = -exact_power_sum_n3().log2();
    let hinf = -q.log2();
    (h1, h2, hinf)
}
