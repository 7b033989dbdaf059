//! Monte-Carlo sampling of weight vectors, reduced to canonical Chow classes.
//!
//! Each sample draws n weights, sorts their absolute values, computes the
//! Chow parameters of the sorted vector and increments that class key. The
//! random streams are counter-based: sample index j belongs to a fixed-size
//! chunk, and the chunk index selects an independent ChaCha stream derived
//! from the seed alone. Counts are therefore a pure function of
//! (seed, n, distribution, rounds) -- independent of shard count and thread
//! scheduling -- and a run is exactly the merge of its shards.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::orbit_size;
use crate::oracle::KNOWN_PUF_COUNTS;
use crate::puf::{ChowKernel, ClassKey, WeightVector, MAX_N};

/// Samples per random stream. Small enough that partial trailing chunks are
/// cheap, large enough to amortize stream setup.
const CHUNK_SAMPLES: u64 = 1024;

/// Stream index reserved for the Poisson round-count draw.
const POISSON_STREAM: u64 = u64::MAX;

/// Symmetric single-coordinate weight laws supported by the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightDistribution {
    /// Standard normal N(0, 1).
    Gaussian,
    /// Uniform on (-1, 1).
    Uniform,
    /// Laplace with unit scale.
    Laplace,
}

impl WeightDistribution {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Uniform => "uniform",
            Self::Laplace => "laplace",
        }
    }
}

impl std::fmt::Display for WeightDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for WeightDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "uniform" => Ok(Self::Uniform),
            "laplace" => Ok(Self::Laplace),
            other => Err(Error::InvalidArgument(format!(
                "unknown distribution {other:?} (expected gaussian, uniform or laplace)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplerConfig {
    pub n: usize,
    /// Total samples; the Poisson parameter when `poissonized` is set.
    pub rounds: u64,
    pub seed: u64,
    pub shards: u32,
    pub distribution: WeightDistribution,
    pub poissonized: bool,
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_N {
            return Err(Error::UnsupportedN {
                n: self.n,
                max: MAX_N,
            });
        }
        if self.rounds == 0 {
            return Err(Error::InvalidArgument("rounds must be >= 1".into()));
        }
        if self.shards == 0 {
            return Err(Error::InvalidArgument("shards must be >= 1".into()));
        }
        Ok(())
    }
}

/// Observed class counts plus the run metadata needed to interpret and merge
/// them. The Monte-Carlo sufficient statistic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMap {
    n: usize,
    distribution: WeightDistribution,
    seed: u64,
    shards: u32,
    rounds: u64,
    poisson_param: Option<u64>,
    rejected_zero_count: u64,
    counts: BTreeMap<ClassKey, u64>,
}

impl ClassMap {
    /// Assembles a map from raw parts, enforcing every invariant: key
    /// dimensions, evenness, bounds, canonicality, count conservation, and
    /// (where the census total is known) that the covered classes cannot
    /// exceed the true PUF count.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        n: usize,
        distribution: WeightDistribution,
        seed: u64,
        shards: u32,
        rounds: u64,
        poisson_param: Option<u64>,
        rejected_zero_count: u64,
        counts: BTreeMap<ClassKey, u64>,
    ) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::UnsupportedN { n, max: MAX_N });
        }
        let mut total: u64 = 0;
        let mut covered: u128 = 0;
        for (key, &count) in &counts {
            if key.n() != n {
                return Err(Error::Integrity(format!(
                    "key {:?} has dimension {}, map has n={n}",
                    key.entries(),
                    key.n()
                )));
            }
            ClassKey::try_new(key.entries().to_vec())?;
            total = total
                .checked_add(count)
                .ok_or_else(|| Error::Integrity("count sum overflows u64".into()))?;
            covered += orbit_size(key);
        }
        if total != rounds {
            return Err(Error::Integrity(format!(
                "counts sum to {total} but rounds-performed is {rounds}"
            )));
        }
        if let Some(&known) = KNOWN_PUF_COUNTS.get(n.wrapping_sub(1)) {
            if covered > u128::from(known) {
                return Err(Error::Integrity(format!(
                    "covered orbits total {covered} PUFs, exceeding the census count {known} for n={n}"
                )));
            }
        }
        Ok(Self {
            n,
            distribution,
            seed,
            shards,
            rounds,
            poisson_param,
            rejected_zero_count,
            counts,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn distribution(&self) -> WeightDistribution {
        self.distribution
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn shards(&self) -> u32 {
        self.shards
    }

    /// Rounds actually performed (the realized count for Poissonized runs).
    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn poisson_param(&self) -> Option<u64> {
        self.poisson_param
    }

    pub fn rejected_zero_count(&self) -> u64 {
        self.rejected_zero_count
    }

    pub fn counts(&self) -> &BTreeMap<ClassKey, u64> {
        &self.counts
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Number of PUFs covered by the observed classes (sum of orbit sizes).
    pub fn covered_pufs(&self) -> u128 {
        self.counts.keys().map(orbit_size).sum()
    }
}

/// A deterministic weight-vector stream: draw j of stream k is a pure
/// function of (seed, k, j).
pub struct WeightStream {
    rng: ChaCha8Rng,
}

impl WeightStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            rng: stream_rng(seed, stream),
        }
    }

    pub fn draw(&mut self, distribution: WeightDistribution, n: usize) -> Result<WeightVector> {
        if n == 0 || n > MAX_N {
            return Err(Error::UnsupportedN { n, max: MAX_N });
        }
        let mut buf = vec![0.0; n];
        draw_into(&mut self.rng, distribution, &mut buf);
        WeightVector::new(buf)
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(expand_seed(seed));
    rng.set_stream(stream);
    rng
}

/// SplitMix64 expansion of the 64-bit user seed into a ChaCha key.
fn expand_seed(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut out = [0u8; 32];
    for word in 0..4 {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut x = state;
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^= x >> 31;
        out[word * 8..][..8].copy_from_slice(&x.to_le_bytes());
    }
    out
}

fn draw_into<R: Rng>(rng: &mut R, distribution: WeightDistribution, buf: &mut [f64]) {
    match distribution {
        WeightDistribution::Gaussian => {
            for x in buf.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
        }
        WeightDistribution::Uniform => {
            for x in buf.iter_mut() {
                *x = rng.random_range(-1.0..1.0);
            }
        }
        WeightDistribution::Laplace => {
            for x in buf.iter_mut() {
                let magnitude: f64 = rng.sample(Exp1);
                *x = if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                };
            }
        }
    }
}

fn poisson_count(seed: u64, lambda: u64) -> u64 {
    if lambda == 0 {
        return 0;
    }
    let mut rng = stream_rng(seed, POISSON_STREAM);
    let draw: f64 = Poisson::new(lambda as f64)
        .expect("lambda is positive and finite")
        .sample(&mut rng);
    draw as u64
}

/// Accumulates the samples of chunk range `[chunk_lo, chunk_hi)` given the
/// total round count. Zero-dot draws resample the whole vector from the same
/// stream and bump the rejection counter.
fn run_chunk_range(
    cfg: &SamplerConfig,
    total_rounds: u64,
    chunk_lo: u64,
    chunk_hi: u64,
) -> (BTreeMap<ClassKey, u64>, u64) {
    let mut counts: BTreeMap<ClassKey, u64> = BTreeMap::new();
    let mut rejected = 0u64;
    let mut kernel = ChowKernel::new(cfg.n).expect("config validated");
    let mut weights = vec![0.0f64; cfg.n];
    for chunk in chunk_lo..chunk_hi {
        let lo = chunk * CHUNK_SAMPLES;
        let hi = ((chunk + 1) * CHUNK_SAMPLES).min(total_rounds);
        let mut rng = stream_rng(cfg.seed, chunk);
        for _ in lo..hi {
            loop {
                draw_into(&mut rng, cfg.distribution, &mut weights);
                for x in weights.iter_mut() {
                    *x = x.abs();
                }
                weights.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
                match kernel.compute(&weights) {
                    Ok(p) => {
                        if let Some(c) = counts.get_mut(p) {
                            *c += 1;
                        } else {
                            counts.insert(ClassKey::from_sorted_unchecked(p.to_vec()), 1);
                        }
                        break;
                    }
                    Err(_) => rejected += 1,
                }
            }
        }
    }
    (counts, rejected)
}

fn chunk_bounds(total_rounds: u64) -> u64 {
    total_rounds.div_ceil(CHUNK_SAMPLES)
}

fn shard_chunk_range(total_chunks: u64, shards: u32, shard: u32) -> (u64, u64) {
    let s = u64::from(shards);
    let k = u64::from(shard);
    (total_chunks * k / s, total_chunks * (k + 1) / s)
}

/// Runs one shard of a (non-Poissonized) configuration. The full run is the
/// merge of `run_shard(cfg, k)` for `k in 0..cfg.shards`.
pub fn run_shard(cfg: &SamplerConfig, shard: u32) -> Result<ClassMap> {
    cfg.validate()?;
    if cfg.poissonized {
        return Err(Error::InvalidArgument(
            "poissonized runs shard internally; call run or run_poissonized".into(),
        ));
    }
    if shard >= cfg.shards {
        return Err(Error::InvalidArgument(format!(
            "shard index {shard} out of range 0..{}",
            cfg.shards
        )));
    }
    let total_chunks = chunk_bounds(cfg.rounds);
    let (lo, hi) = shard_chunk_range(total_chunks, cfg.shards, shard);
    let (counts, rejected) = run_chunk_range(cfg, cfg.rounds, lo, hi);
    let first = (lo * CHUNK_SAMPLES).min(cfg.rounds);
    let last = (hi * CHUNK_SAMPLES).min(cfg.rounds);
    ClassMap::from_parts(
        cfg.n,
        cfg.distribution,
        cfg.seed,
        cfg.shards,
        last - first,
        None,
        rejected,
        counts,
    )
}

fn run_with_rounds(cfg: &SamplerConfig, realized: u64, poisson_param: Option<u64>) -> ClassMap {
    let total_chunks = chunk_bounds(realized);
    let parts: Vec<(BTreeMap<ClassKey, u64>, u64)> = (0..cfg.shards)
        .into_par_iter()
        .map(|shard| {
            let (lo, hi) = shard_chunk_range(total_chunks, cfg.shards, shard);
            run_chunk_range(cfg, realized, lo, hi)
        })
        .collect();
    let mut counts: BTreeMap<ClassKey, u64> = BTreeMap::new();
    let mut rejected = 0u64;
    for (part, rej) in parts {
        rejected += rej;
        for (key, count) in part {
            *counts.entry(key).or_insert(0) += count;
        }
    }
    ClassMap::from_parts(
        cfg.n,
        cfg.distribution,
        cfg.seed,
        cfg.shards,
        realized,
        poisson_param,
        rejected,
        counts,
    )
    .expect("sampled counts satisfy the invariants by construction")
}

/// Runs the full configuration: `rounds` samples (Poissonized if the config
/// says so), fanned out over `shards` workers.
pub fn run(cfg: &SamplerConfig) -> Result<ClassMap> {
    cfg.validate()?;
    if cfg.poissonized {
        return run_poissonized(cfg, cfg.rounds);
    }
    Ok(run_with_rounds(cfg, cfg.rounds, None))
}

/// Draws the round count from Poisson(`lambda`), then samples exactly as
/// [`run`]. The map records both the parameter and the realized count.
pub fn run_poissonized(cfg: &SamplerConfig, lambda: u64) -> Result<ClassMap> {
    let plain = SamplerConfig {
        poissonized: false,
        rounds: lambda.max(1),
        ..cfg.clone()
    };
    plain.validate()?;
    let realized = poisson_count(cfg.seed, lambda);
    Ok(run_with_rounds(&plain, realized, Some(lambda)))
}

/// Key-wise sum of compatible maps. Maps must share n and distribution;
/// seeds and shard counts may differ (metadata is kept when unanimous).
/// Poisson parameters add, matching the additivity of Poisson sampling;
/// mixing Poissonized and plain maps is rejected.
pub fn merge(maps: &[ClassMap]) -> Result<ClassMap> {
    let first = maps.first().ok_or(Error::EmptyMap)?;
    let mut counts: BTreeMap<ClassKey, u64> = BTreeMap::new();
    let mut rounds: u64 = 0;
    let mut rejected: u64 = 0;
    let mut poisson: Option<u64> = Some(0);
    let mut seed = Some(first.seed);
    let mut shards_if_equal = Some(first.shards);
    let mut shards_sum: u64 = 0;
    for map in maps {
        if map.n != first.n {
            return Err(Error::IncompatibleMaps(format!(
                "n differs: {} vs {}",
                first.n, map.n
            )));
        }
        if map.distribution != first.distribution {
            return Err(Error::IncompatibleMaps(format!(
                "distribution differs: {} vs {}",
                first.distribution, map.distribution
            )));
        }
        match (map.poisson_param, &mut poisson) {
            (Some(p), Some(acc)) => *acc += p,
            (None, _) if maps.iter().all(|m| m.poisson_param.is_none()) => poisson = None,
            _ => {
                return Err(Error::IncompatibleMaps(
                    "cannot merge Poissonized and plain maps".into(),
                ))
            }
        }
        rounds = rounds
            .checked_add(map.rounds)
            .ok_or_else(|| Error::Integrity("merged rounds overflow u64".into()))?;
        rejected = rejected
            .checked_add(map.rejected_zero_count)
            .ok_or_else(|| Error::Integrity("merged rejection count overflows u64".into()))?;
        if seed != Some(map.seed) {
            seed = None;
        }
        if shards_if_equal != Some(map.shards) {
            shards_if_equal = None;
        }
        shards_sum += u64::from(map.shards);
        for (key, &count) in &map.counts {
            let slot = counts.entry(key.clone()).or_insert(0);
            *slot = slot
                .checked_add(count)
                .ok_or_else(|| Error::Integrity("merged count overflows u64".into()))?;
        }
    }
    ClassMap::from_parts(
        first.n,
        first.distribution,
        seed.unwrap_or(0),
        shards_if_equal.unwrap_or_else(|| shards_sum.min(u64::from(u32::MAX)) as u32),
        rounds,
        poisson,
        rejected,
        counts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, rounds: u64, seed: u64) -> SamplerConfig {
        SamplerConfig {
            n,
            rounds,
            seed,
            shards: 2,
            distribution: WeightDistribution::Gaussian,
            poissonized: false,
        }
    }

    #[test]
    fn weight_stream_is_reproducible() {
        let mut a = WeightStream::new(1, 0);
        let mut b = WeightStream::new(1, 0);
        for _ in 0..10 {
            let wa = a.draw(WeightDistribution::Gaussian, 5).unwrap();
            let wb = b.draw(WeightDistribution::Gaussian, 5).unwrap();
            assert_eq!(wa.as_slice(), wb.as_slice());
        }
        // distinct streams from the same seed disagree
        let mut c = WeightStream::new(1, 1);
        let w0 = WeightStream::new(1, 0)
            .draw(WeightDistribution::Gaussian, 5)
            .unwrap();
        let w1 = c.draw(WeightDistribution::Gaussian, 5).unwrap();
        assert_ne!(w0.as_slice(), w1.as_slice());
    }

    #[test]
    fn coordinate_statistics_match_the_model() {
        for dist in [
            WeightDistribution::Gaussian,
            WeightDistribution::Uniform,
            WeightDistribution::Laplace,
        ] {
            let sigma = match dist {
                WeightDistribution::Gaussian => 1.0f64,
                WeightDistribution::Uniform => (1.0f64 / 3.0).sqrt(),
                WeightDistribution::Laplace => 2.0f64.sqrt(),
            };
            let draws = 1_000_000usize;
            let mut stream = WeightStream::new(42, 7);
            let mut sum = 0.0;
            let mut positive = 0u64;
            for _ in 0..draws / 4 {
                let w = stream.draw(dist, 4).unwrap();
                for &x in w.as_slice() {
                    sum += x;
                    if x > 0.0 {
                        positive += 1;
                    }
                }
            }
            let mean = sum / draws as f64;
            assert!(
                mean.abs() < 5.0 * sigma / (draws as f64).sqrt(),
                "{dist}: mean {mean} too far from 0"
            );
            let frac = positive as f64 / draws as f64;
            let ci = 5.0 * 0.5 / (draws as f64).sqrt();
            assert!(
                (frac - 0.5).abs() < ci,
                "{dist}: sign frequency {frac} outside CI"
            );
        }
    }

    #[test]
    fn n1_collapses_to_the_single_class() {
        let map = run(&cfg(1, 5000, 3)).unwrap();
        assert_eq!(map.counts().len(), 1);
        let (key, &count) = map.counts().iter().next().unwrap();
        assert_eq!(key.entries(), &[1]);
        assert_eq!(count, 5000);
    }

    #[test]
    fn n2_collapses_to_the_single_class() {
        let map = run(&cfg(2, 100_000, 4)).unwrap();
        assert_eq!(map.counts().len(), 1);
        let (key, &count) = map.counts().iter().next().unwrap();
        assert_eq!(key.entries(), &[2, 0]);
        assert_eq!(count, 100_000);
        assert_eq!(map.rounds(), 100_000);
    }

    #[test]
    fn n3_dictator_frequency_is_near_exact_value() {
        let map = run(&cfg(3, 1_000_000, 5)).unwrap();
        assert_eq!(map.counts().len(), 2);
        let dict = map.counts().get([4i64, 0, 0].as_slice()).copied().unwrap();
        let p_hat = dict as f64 / map.rounds() as f64;
        // exact class probability 6*P(X1 > |X2|+|X3|) = 0.64904..., 4-sigma slack
        let p = 0.6490406;
        let sigma = (p * (1.0 - p) / map.rounds() as f64).sqrt();
        assert!(
            (p_hat - p).abs() < 4.0 * sigma,
            "dictator frequency {p_hat} vs exact {p}"
        );
    }

    #[test]
    fn identical_configs_give_identical_maps() {
        let a = run(&cfg(4, 20_000, 9)).unwrap();
        let b = run(&cfg(4, 20_000, 9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn counts_are_invariant_under_shard_count() {
        let mut one = cfg(3, 50_000, 11);
        one.shards = 1;
        let mut eight = cfg(3, 50_000, 11);
        eight.shards = 8;
        let a = run(&one).unwrap();
        let b = run(&eight).unwrap();
        assert_eq!(a.counts(), b.counts());
        assert_eq!(a.rounds(), b.rounds());
    }

    #[test]
    fn run_equals_merge_of_its_shards() {
        let config = SamplerConfig {
            shards: 8,
            ..cfg(3, 30_000, 13)
        };
        let whole = run(&config).unwrap();
        let parts: Vec<ClassMap> = (0..8).map(|k| run_shard(&config, k).unwrap()).collect();
        assert_eq!(
            parts.iter().map(|m| m.rounds()).sum::<u64>(),
            whole.rounds()
        );
        let merged = merge(&parts).unwrap();
        assert_eq!(merged, whole);
    }

    #[test]
    fn poissonized_round_count_concentrates() {
        let config = cfg(3, 1, 17);
        let lambda = 1_000_000u64;
        let map = run_poissonized(&config, lambda).unwrap();
        assert_eq!(map.poisson_param(), Some(lambda));
        let slack = 5.0 * (lambda as f64).sqrt();
        let realized = map.rounds() as f64;
        assert!(
            (realized - lambda as f64).abs() < slack,
            "realized {realized} too far from {lambda}"
        );
        assert_eq!(map.counts().values().sum::<u64>(), map.rounds());
    }

    #[test]
    fn poissonized_zero_lambda_gives_empty_map() {
        let map = run_poissonized(&cfg(3, 1, 18), 0).unwrap();
        assert!(map.is_empty());
        assert_eq!(map.rounds(), 0);
        assert_eq!(map.poisson_param(), Some(0));
    }

    #[test]
    fn merge_identity_and_commutativity() {
        let a = run(&cfg(3, 10_000, 19)).unwrap();
        let empty = ClassMap::from_parts(
            3,
            WeightDistribution::Gaussian,
            a.seed(),
            a.shards(),
            0,
            None,
            0,
            BTreeMap::new(),
        )
        .unwrap();
        let with_empty = merge(&[a.clone(), empty]).unwrap();
        assert_eq!(with_empty.counts(), a.counts());
        assert_eq!(with_empty.rounds(), a.rounds());

        let b = run(&cfg(3, 10_000, 20)).unwrap();
        let ab = merge(&[a.clone(), b.clone()]).unwrap();
        let ba = merge(&[b, a]).unwrap();
        assert_eq!(ab.counts(), ba.counts());
        assert_eq!(ab.rounds(), ba.rounds());
    }

    #[test]
    fn merge_rejects_incompatible_maps() {
        let a = run(&cfg(3, 1000, 1)).unwrap();
        let b = run(&cfg(4, 1000, 1)).unwrap();
        assert!(matches!(
            merge(&[a.clone(), b]),
            Err(Error::IncompatibleMaps(_))
        ));
        let mut c = cfg(3, 1000, 1);
        c.distribution = WeightDistribution::Uniform;
        let c = run(&c).unwrap();
        assert!(matches!(
            merge(&[a.clone(), c]),
            Err(Error::IncompatibleMaps(_))
        ));
        let p = run_poissonized(&cfg(3, 1, 2), 1000).unwrap();
        assert!(matches!(
            merge(&[a, p]),
            Err(Error::IncompatibleMaps(_))
        ));
    }

    #[test]
    fn merge_sums_poisson_parameters() {
        let a = run_poissonized(&cfg(3, 1, 30), 5_000).unwrap();
        let b = run_poissonized(&cfg(3, 1, 31), 7_000).unwrap();
        let m = merge(&[a, b]).unwrap();
        assert_eq!(m.poisson_param(), Some(12_000));
    }

    #[test]
    fn merge_overflow_is_an_integrity_error() {
        let big = |seed| {
            let mut counts = BTreeMap::new();
            counts.insert(ClassKey::try_new(vec![1]).unwrap(), u64::MAX / 2 + 1);
            ClassMap::from_parts(
                1,
                WeightDistribution::Gaussian,
                seed,
                1,
                u64::MAX / 2 + 1,
                None,
                0,
                counts,
            )
            .unwrap()
        };
        assert!(matches!(
            merge(&[big(1), big(2)]),
            Err(Error::Integrity(_))
        ));
    }

    #[test]
    fn from_parts_enforces_conservation() {
        let mut counts = BTreeMap::new();
        counts.insert(ClassKey::try_new(vec![4, 0, 0]).unwrap(), 10);
        let err = ClassMap::from_parts(
            3,
            WeightDistribution::Gaussian,
            0,
            1,
            11,
            None,
            0,
            counts,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Integrity(_)));
    }

    #[test]
    fn from_parts_rejects_overfull_coverage() {
        // (4,0,0) + (2,2,2) + (2,2,0) would cover 6+8+12 = 26 > 14 PUFs at n=3.
        let mut counts = BTreeMap::new();
        counts.insert(ClassKey::try_new(vec![4, 0, 0]).unwrap(), 1);
        counts.insert(ClassKey::try_new(vec![2, 2, 2]).unwrap(), 1);
        counts.insert(ClassKey::try_new(vec![2, 2, 0]).unwrap(), 1);
        let err = ClassMap::from_parts(
            3,
            WeightDistribution::Gaussian,
            0,
            1,
            3,
            None,
            0,
            counts,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Integrity(_)));
    }
}
