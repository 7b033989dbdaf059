//! Renyi-entropy estimators over class maps.
//!
//! All entropies are in bits. H0 is a coverage lower bound, H1 is the
//! plug-in estimator split into class entropy plus mean log class size
//! (Student-t interval on the size term, Paninski-style bias bound on the
//! plug-in term), H2 is the unbiased Poissonized power-sum estimator with a
//! batch-replication interval, and H-infinity comes from the Wilson score
//! interval on the class of the most likely PUF.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::group::orbit_size;
use crate::oracle::KNOWN_PUF_COUNTS;
use crate::sampler::ClassMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntropyOrder {
    H0,
    H1,
    H2,
    HInf,
}

impl std::fmt::Display for EntropyOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::H0 => "h0",
            Self::H1 => "h1",
            Self::H2 => "h2",
            Self::HInf => "hinf",
        })
    }
}

/// A point estimate with its confidence interval and method metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyEstimate {
    pub order: EntropyOrder,
    pub value_bits: f64,
    pub ci_low_bits: f64,
    pub ci_high_bits: f64,
    pub confidence: f64,
    pub sample_size: u64,
    pub method: String,
    pub bias_bound_bits: Option<f64>,
}

fn check_confidence(confidence: f64) -> Result<()> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    Ok(())
}

fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(p)
}

/// Two-sided Student-t critical value; indistinguishable from the normal
/// one at the sample sizes the sampler produces, which also keeps the
/// inverse-CDF numerics out of trouble.
fn t_quantile(p: f64, df: f64) -> f64 {
    if df >= 1e6 {
        normal_quantile(p)
    } else {
        StudentsT::new(0.0, 1.0, df).unwrap().inverse_cdf(p)
    }
}

fn log2_u128(x: u128) -> f64 {
    (x as f64).log2()
}

/// Observed class support and whether it is provably complete (the covered
/// orbits add up to the published census total for this n).
fn support(map: &ClassMap) -> (u64, bool) {
    let m = map.counts().len() as u64;
    let exact = KNOWN_PUF_COUNTS
        .get(map.n() - 1)
        .is_some_and(|&known| map.covered_pufs() == u128::from(known));
    (m, exact)
}

/// Max-entropy lower bound: log2 of the number of PUFs covered by the
/// observed classes. Equals the exact H0 once every class has been seen.
pub fn h0_lower(map: &ClassMap) -> Result<EntropyEstimate> {
    if map.is_empty() {
        return Err(Error::EmptyMap);
    }
    let covered = map.covered_pufs();
    let value = log2_u128(covered);
    let (_, exact) = support(map);
    Ok(EntropyEstimate {
        order: EntropyOrder::H0,
        value_bits: value,
        ci_low_bits: value,
        ci_high_bits: (map.n() * map.n()) as f64,
        confidence: 0.95,
        sample_size: map.rounds(),
        method: format!(
            "coverage-lower-bound;classes={};complete={}",
            map.counts().len(),
            exact
        ),
        bias_bound_bits: None,
    })
}

/// Paninski-style plug-in bias bound `log2(1 + (m-1)/N)` in bits, with m the
/// class support. The observed class count is a lower bound on the support;
/// it is exact whenever coverage is complete against the published totals.
pub fn h1_bias_bound(map: &ClassMap) -> Result<f64> {
    if map.is_empty() {
        return Err(Error::EmptyMap);
    }
    let (m, _) = support(map);
    let n_samples = map.rounds() as f64;
    Ok((1.0 + (m as f64 - 1.0) / n_samples).log2())
}

/// Plug-in Shannon entropy: class entropy plus mean log class size.
///
/// The size term is an ordinary sample mean, so it carries a Student-t
/// interval; the class-entropy term is biased low, so the interval is
/// widened upward by the bias bound.
pub fn h1_plugin(map: &ClassMap, confidence: f64) -> Result<EntropyEstimate> {
    check_confidence(confidence)?;
    if map.is_empty() {
        return Err(Error::EmptyMap);
    }
    if map.rounds() < 2 {
        return Err(Error::InvalidArgument(
            "h1 needs at least 2 samples".into(),
        ));
    }
    let n_samples = map.rounds() as f64;
    let mut class_entropy = 0.0;
    let mut size_mean = 0.0;
    let mut size_sq = 0.0;
    for (key, &count) in map.counts() {
        let q = count as f64 / n_samples;
        class_entropy -= q * q.log2();
        let log_size = log2_u128(orbit_size(key));
        size_mean += q * log_size;
        size_sq += q * log_size * log_size;
    }
    let variance = ((size_sq - size_mean * size_mean) * n_samples / (n_samples - 1.0)).max(0.0);
    let stderr = (variance / n_samples).sqrt();
    let t = t_quantile((1.0 + confidence) / 2.0, n_samples - 1.0);
    let bias = h1_bias_bound(map)?;
    let (m, exact) = support(map);
    let value = class_entropy + size_mean;
    Ok(EntropyEstimate {
        order: EntropyOrder::H1,
        value_bits: value,
        ci_low_bits: value - t * stderr,
        ci_high_bits: value + t * stderr + bias,
        confidence,
        sample_size: map.rounds(),
        method: format!(
            "plugin+size-term-t;support={}{}",
            m,
            if exact { ";support-exact" } else { ";support-observed" }
        ),
        bias_bound_bits: Some(bias),
    })
}

/// One batch's unbiased power-sum estimate
/// `sum_k count_k (count_k - 1) / (orbit_k * N^2)` with N the Poisson
/// parameter of the run.
pub fn h2_power_sum_batch(map: &ClassMap) -> Result<f64> {
    let lambda = map.poisson_param().ok_or(Error::NonPoissonizedInput)?;
    if lambda == 0 {
        return Err(Error::InvalidArgument(
            "batch Poisson parameter must be positive".into(),
        ));
    }
    let n2 = (lambda as f64) * (lambda as f64);
    let mut sum = 0.0;
    for (key, &count) in map.counts() {
        let c = count as f64;
        sum += c * (c - 1.0) / (orbit_size(key) as f64 * n2);
    }
    Ok(sum)
}

/// Collision entropy from Poissonized batches: mean of the per-batch
/// power-sum estimates mapped through -log2, with a Student-t interval on
/// the batch values (interval endpoints swap under the decreasing map).
pub fn h2_unbiased(maps: &[ClassMap], confidence: f64) -> Result<EntropyEstimate> {
    check_confidence(confidence)?;
    if maps.is_empty() {
        return Err(Error::EmptyMap);
    }
    let first = &maps[0];
    for map in maps {
        if map.n() != first.n() || map.distribution() != first.distribution() {
            return Err(Error::IncompatibleMaps(
                "h2 batches must share n and distribution".into(),
            ));
        }
    }
    let batches: Vec<f64> = maps.iter().map(h2_power_sum_batch).collect::<Result<_>>()?;
    if batches.len() < 2 {
        return Err(Error::InvalidArgument(
            "h2 needs at least 2 Poissonized batches for a confidence interval".into(),
        ));
    }
    let b = batches.len() as f64;
    let mean = batches.iter().sum::<f64>() / b;
    if mean <= 0.0 {
        return Err(Error::UndefinedEstimate(format!(
            "batch power-sum mean {mean} is not positive; increase the Poisson parameter"
        )));
    }
    let variance = batches.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (b - 1.0);
    let stderr = (variance / b).sqrt();
    let t = t_quantile((1.0 + confidence) / 2.0, b - 1.0);
    let upper_bound = (first.n() * first.n()) as f64;
    let low_s = mean - t * stderr;
    let high_s = mean + t * stderr;
    let ci_low = (-high_s.log2()).max(0.0);
    let clamped = low_s <= 0.0;
    let ci_high = if clamped { upper_bound } else { -low_s.log2() };
    Ok(EntropyEstimate {
        order: EntropyOrder::H2,
        value_bits: -mean.log2(),
        ci_low_bits: ci_low,
        ci_high_bits: ci_high.min(upper_bound),
        confidence,
        sample_size: maps.iter().map(|m| m.rounds()).sum(),
        method: format!(
            "poissonized-power-sum;batches={}{}",
            batches.len(),
            if clamped { ";upper-clamped" } else { "" }
        ),
        bias_bound_bits: None,
    })
}

/// Wilson score interval for a binomial proportion at critical value `z`.
pub fn wilson_interval(successes: u64, total: u64, z: f64) -> (f64, f64) {
    assert!(total > 0, "wilson interval needs at least one trial");
    let n = total as f64;
    let p_hat = (successes.min(total)) as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = p_hat + z2 / (2.0 * n);
    let margin = z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt();
    (
        ((center - margin) / denom).clamp(0.0, 1.0),
        ((center + margin) / denom).clamp(0.0, 1.0),
    )
}

/// Min-entropy from the most likely PUF: every PUF in a class is
/// equiprobable, so the empirical per-PUF probability of a class is its
/// frequency divided by its size, and the argmax class is the one
/// containing the most likely PUF. That class frequency gets a Wilson
/// interval, and the class size divides out of both endpoints. Flags
/// whether the argmax is the dictator class, which it is expected to be
/// under Gaussian weights.
pub fn hinf_wilson(map: &ClassMap, confidence: f64) -> Result<EntropyEstimate> {
    check_confidence(confidence)?;
    if map.is_empty() {
        return Err(Error::EmptyMap);
    }
    let per_puf = |key: &crate::puf::ClassKey, count: u64| count as f64 / orbit_size(key) as f64;
    let (key, &count) = map
        .counts()
        .iter()
        .max_by(|a, b| {
            per_puf(a.0, *a.1)
                .partial_cmp(&per_puf(b.0, *b.1))
                .unwrap()
                .then_with(|| a.0.cmp(b.0))
        })
        .expect("non-empty map");
    let total = map.rounds();
    let size = orbit_size(key) as f64;
    let log_size = size.log2();
    let p_hat = count as f64 / total as f64;
    let z = normal_quantile((1.0 + confidence) / 2.0);
    let (p_low, p_high) = wilson_interval(count, total, z);
    let is_dictator = key.entries() == crate::puf::ClassKey::dictator(map.n()).entries();
    let key_str = key
        .entries()
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    Ok(EntropyEstimate {
        order: EntropyOrder::HInf,
        value_bits: -p_hat.log2() + log_size,
        ci_low_bits: -p_high.log2() + log_size,
        ci_high_bits: -p_low.log2() + log_size,
        confidence,
        sample_size: total,
        method: format!(
            "wilson;argmax=({key_str});dictator-class={is_dictator}"
        ),
        bias_bound_bits: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::puf::ClassKey;
    use crate::sampler::WeightDistribution;
    use std::collections::BTreeMap;

    fn map_n3(dict: u64, maj: u64, poisson: Option<u64>) -> ClassMap {
        let mut counts = BTreeMap::new();
        if dict > 0 {
            counts.insert(ClassKey::try_new(vec![4, 0, 0]).unwrap(), dict);
        }
        if maj > 0 {
            counts.insert(ClassKey::try_new(vec![2, 2, 2]).unwrap(), maj);
        }
        ClassMap::from_parts(
            3,
            WeightDistribution::Gaussian,
            0,
            1,
            dict + maj,
            poisson,
            0,
            counts,
        )
        .unwrap()
    }

    fn map_n2(count: u64, poisson: Option<u64>) -> ClassMap {
        let mut counts = BTreeMap::new();
        counts.insert(ClassKey::try_new(vec![2, 0]).unwrap(), count);
        ClassMap::from_parts(
            2,
            WeightDistribution::Gaussian,
            0,
            1,
            count,
            poisson,
            0,
            counts,
        )
        .unwrap()
    }

    #[test]
    fn h0_full_coverage_n3() {
        let est = h0_lower(&map_n3(650, 350, None)).unwrap();
        assert!((est.value_bits - 14f64.log2()).abs() < 1e-12);
        assert_eq!(est.ci_low_bits, est.value_bits);
        assert_eq!(est.ci_high_bits, 9.0);
        assert!(est.method.contains("complete=true"));
    }

    #[test]
    fn h0_full_coverage_n4() {
        let mut counts = BTreeMap::new();
        counts.insert(ClassKey::try_new(vec![8, 0, 0, 0]).unwrap(), 1);
        counts.insert(ClassKey::try_new(vec![6, 2, 2, 2]).unwrap(), 1);
        counts.insert(ClassKey::try_new(vec![4, 4, 4, 0]).unwrap(), 1);
        let map = ClassMap::from_parts(
            4,
            WeightDistribution::Gaussian,
            0,
            1,
            3,
            None,
            0,
            counts,
        )
        .unwrap();
        let est = h0_lower(&map).unwrap();
        assert!((est.value_bits - 104f64.log2()).abs() < 1e-12);
        assert!((est.value_bits - 6.7004).abs() < 1e-4);
    }

    #[test]
    fn h0_partial_coverage_is_a_lower_bound() {
        let est = h0_lower(&map_n3(1000, 0, None)).unwrap();
        assert!((est.value_bits - 6f64.log2()).abs() < 1e-12);
        assert!(est.method.contains("complete=false"));
    }

    #[test]
    fn h0_rejects_empty() {
        let empty = ClassMap::from_parts(
            3,
            WeightDistribution::Gaussian,
            0,
            1,
            0,
            None,
            0,
            BTreeMap::new(),
        )
        .unwrap();
        assert!(matches!(h0_lower(&empty), Err(Error::EmptyMap)));
    }

    #[test]
    fn h1_single_class_is_exactly_log_size() {
        let est = h1_plugin(&map_n2(1_000_000, None), 0.95).unwrap();
        assert_eq!(est.value_bits, 2.0);
        assert_eq!(est.ci_low_bits, 2.0); // zero-width size term
        assert!(est.ci_high_bits >= 2.0);
        assert!(est.bias_bound_bits.unwrap() == 0.0);
    }

    #[test]
    fn h1_matches_direct_formula_evaluation() {
        let est = h1_plugin(&map_n3(650_000, 350_000, None), 0.95).unwrap();
        let expected = -(0.65f64 * 0.65f64.log2() + 0.35 * 0.35f64.log2())
            + 0.65 * 6f64.log2()
            + 0.35 * 8f64.log2();
        assert!((est.value_bits - expected).abs() < 1e-12);
        assert!(est.ci_low_bits <= est.value_bits && est.value_bits <= est.ci_high_bits);
        assert!(est.method.contains("support-exact"));
    }

    #[test]
    fn bias_bound_examples() {
        let two_classes = map_n3(500_000, 500_000, None);
        let bound = h1_bias_bound(&two_classes).unwrap();
        assert!((bound - (1.0 + 1e-6f64).log2()).abs() < 1e-15);
        assert!(bound < 0.01);
        let one_class = map_n2(100, None);
        assert_eq!(h1_bias_bound(&one_class).unwrap(), 0.0);
    }

    #[test]
    fn h2_batch_formula() {
        // count 3 in the size-6 class, count 1 in the size-8 class, N = 4:
        // 3*2/(6*16) + 0 = 1/16
        let batch = map_n3(3, 1, Some(4));
        assert_eq!(h2_power_sum_batch(&batch).unwrap(), 0.0625);
    }

    #[test]
    fn h2_requires_poissonized_batches() {
        let plain = map_n3(10, 10, None);
        assert!(matches!(
            h2_power_sum_batch(&plain),
            Err(Error::NonPoissonizedInput)
        ));
        let one = map_n3(10, 10, Some(20));
        assert!(matches!(
            h2_unbiased(&[one], 0.95),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn h2_interval_endpoints_swap() {
        let a = map_n3(400, 600, Some(1000));
        let b = map_n3(420, 580, Some(1000));
        let est = h2_unbiased(&[a.clone(), b.clone()], 0.95).unwrap();
        let sa = h2_power_sum_batch(&a).unwrap();
        let sb = h2_power_sum_batch(&b).unwrap();
        let mean = (sa + sb) / 2.0;
        assert!((est.value_bits + mean.log2()).abs() < 1e-12);
        assert!(est.ci_low_bits <= est.value_bits);
        assert!(est.value_bits <= est.ci_high_bits);
        assert!(est.ci_high_bits <= 9.0);
    }

    #[test]
    fn wilson_closed_form_values() {
        let (low, high) = wilson_interval(500, 1000, 1.96);
        // Independent evaluation of the closed form at p_hat = 1/2.
        let z2 = 1.96f64 * 1.96;
        let denom = 1.0 + z2 / 1000.0;
        let center = 0.5 + z2 / 2000.0;
        let margin = 1.96 * (0.25 / 1000.0 + z2 / 4e6).sqrt();
        assert!((low - (center - margin) / denom).abs() < 1e-12);
        assert!((high - (center + margin) / denom).abs() < 1e-12);
        assert!((low - 0.4690).abs() < 1e-4, "low = {low}");
        assert!((high - 0.5310).abs() < 1e-4, "high = {high}");
    }

    #[test]
    fn hinf_single_class_is_exact() {
        let est = hinf_wilson(&map_n2(5000, None), 0.95).unwrap();
        assert_eq!(est.value_bits, 2.0);
        assert_eq!(est.ci_low_bits, 2.0);
        assert!(est.ci_high_bits >= 2.0);
    }

    #[test]
    fn hinf_identifies_the_dictator_class() {
        let est = hinf_wilson(&map_n3(650, 350, None), 0.95).unwrap();
        assert!(est.method.contains("argmax=(4 0 0)"));
        assert!(est.method.contains("dictator-class=true"));
        let value = -(650f64 / 1000.0).log2() + 6f64.log2();
        assert!((est.value_bits - value).abs() < 1e-12);
    }

    #[test]
    fn hinf_uses_per_puf_probability_not_class_frequency() {
        // At n=4 the (6,2,2,2) class (64 PUFs) dominates by class frequency,
        // but the dictator class (8 PUFs) holds the most likely single PUF.
        let mut counts = BTreeMap::new();
        counts.insert(ClassKey::try_new(vec![8, 0, 0, 0]).unwrap(), 333);
        counts.insert(ClassKey::try_new(vec![6, 2, 2, 2]).unwrap(), 667);
        let map = ClassMap::from_parts(
            4,
            WeightDistribution::Gaussian,
            0,
            1,
            1000,
            None,
            0,
            counts,
        )
        .unwrap();
        let est = hinf_wilson(&map, 0.95).unwrap();
        assert!(est.method.contains("argmax=(8 0 0 0)"));
        assert!(est.method.contains("dictator-class=true"));
        let expected = -(333f64 / 1000.0).log2() + 3.0;
        assert!((est.value_bits - expected).abs() < 1e-12);
    }

    #[test]
    fn confidence_is_validated() {
        let m = map_n3(10, 10, None);
        assert!(h1_plugin(&m, 1.5).is_err());
        assert!(h1_plugin(&m, 0.0).is_err());
        assert!(hinf_wilson(&m, -0.5).is_err());
    }
}
