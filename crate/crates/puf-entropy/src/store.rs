//! Durable text format for class maps and exact censuses.
//!
//! Line-oriented UTF-8, diff-able and mergeable with standard tooling:
//!
//! ```text
//! #pufclassmap v1
//! n=3
//! dist=gaussian
//! seed=7
//! shards=8
//! rounds=1000000
//! poisson_n=1000000     (only for Poissonized runs)
//! rejected=0
//! exact=true            (only for census files, with dist=exact)
//! 4 0 0 650042
//! 2 2 2 349958
//! ```
//!
//! Body lines are `<p1> ... <pn> <count>`, strictly sorted in descending
//! lexicographic key order. Loading re-validates every invariant before a
//! map is handed back.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::group::orbit_size;
use crate::oracle::CensusEntry;
use crate::puf::ClassKey;
use crate::sampler::{merge, ClassMap, WeightDistribution};

const MAGIC: &str = "#pufclassmap";
const VERSION: &str = "v1";
/// Distribution field used by exact census files.
const EXACT_DIST: &str = "exact";

/// An exact census as stored on disk: counts are orbit sizes, rounds is the
/// total number of PUFs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Census {
    pub n: usize,
    pub classes: Vec<(ClassKey, u64)>,
}

impl Census {
    pub fn total_pufs(&self) -> u64 {
        self.classes.iter().map(|(_, size)| size).sum()
    }
}

#[allow(clippy::too_many_arguments)]
fn write_header<W: Write>(
    out: &mut W,
    n: usize,
    dist: &str,
    seed: u64,
    shards: u32,
    rounds: u64,
    poisson: Option<u64>,
    rejected: u64,
    exact: bool,
) -> Result<()> {
    writeln!(out, "{MAGIC} {VERSION}")?;
    writeln!(out, "n={n}")?;
    writeln!(out, "dist={dist}")?;
    writeln!(out, "seed={seed}")?;
    writeln!(out, "shards={shards}")?;
    writeln!(out, "rounds={rounds}")?;
    if let Some(p) = poisson {
        writeln!(out, "poisson_n={p}")?;
    }
    writeln!(out, "rejected={rejected}")?;
    if exact {
        writeln!(out, "exact=true")?;
    }
    Ok(())
}

fn write_body_line<W: Write>(out: &mut W, key: &ClassKey, count: u64) -> Result<()> {
    for v in key.entries() {
        write!(out, "{v} ")?;
    }
    writeln!(out, "{count}")?;
    Ok(())
}

/// Writes a class map in the versioned text format. Deterministic: the same
/// map always produces the same bytes.
pub fn save<P: AsRef<Path>>(map: &ClassMap, path: P) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_header(
        &mut out,
        map.n(),
        map.distribution().name(),
        map.seed(),
        map.shards(),
        map.rounds(),
        map.poisson_param(),
        map.rejected_zero_count(),
        false,
    )?;
    for (key, &count) in map.counts().iter().rev() {
        write_body_line(&mut out, key, count)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes an exact census in the same format, flagged `exact=true` with
/// `dist=exact`; the count column holds orbit sizes.
pub fn save_census<P: AsRef<Path>>(n: usize, entries: &[CensusEntry], path: P) -> Result<()> {
    let total: u128 = entries.iter().map(|e| e.orbit_size).sum();
    let total: u64 = total
        .try_into()
        .map_err(|_| Error::Integrity("census total exceeds u64".into()))?;
    let mut out = BufWriter::new(File::create(path)?);
    write_header(&mut out, n, EXACT_DIST, 0, 1, total, None, 0, true)?;
    for entry in entries {
        write_body_line(&mut out, &entry.key, entry.orbit_size as u64)?;
    }
    out.flush()?;
    Ok(())
}

struct RawFile {
    n: usize,
    dist: String,
    seed: u64,
    shards: u32,
    rounds: u64,
    poisson: Option<u64>,
    rejected: u64,
    exact: bool,
    body: Vec<(Vec<i64>, u64)>,
}

fn format_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Format {
        line,
        msg: msg.into(),
    }
}

fn parse_kv<'a>(line: &'a str, key: &str, lineno: usize) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| format_err(lineno, format!("expected `{key}=<value>`, got {line:?}")))
}

fn parse_raw<P: AsRef<Path>>(path: P) -> Result<RawFile> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();
    let mut next_line = || -> Result<Option<(usize, String)>> {
        match lines.next() {
            Some((i, line)) => Ok(Some((i + 1, line?))),
            None => Ok(None),
        }
    };

    let (no, magic) = next_line()?.ok_or_else(|| format_err(1, "empty file"))?;
    match magic.strip_prefix(MAGIC).map(str::trim) {
        Some(VERSION) => {}
        Some(other) => return Err(Error::Version(other.to_string())),
        None => return Err(format_err(no, format!("missing `{MAGIC}` magic"))),
    }

    let mut need = |key: &str| -> Result<(usize, String)> {
        let (no, line) = next_line()?.ok_or_else(|| format_err(0, "truncated header"))?;
        Ok((no, parse_kv(&line, key, no)?.to_string()))
    };
    let (no_n, n_str) = need("n")?;
    let n: usize = n_str
        .parse()
        .map_err(|_| format_err(no_n, format!("bad n {n_str:?}")))?;
    let (_, dist) = need("dist")?;
    let (no_s, seed_str) = need("seed")?;
    let seed: u64 = seed_str
        .parse()
        .map_err(|_| format_err(no_s, format!("bad seed {seed_str:?}")))?;
    let (no_h, shards_str) = need("shards")?;
    let shards: u32 = shards_str
        .parse()
        .map_err(|_| format_err(no_h, format!("bad shards {shards_str:?}")))?;
    let (no_r, rounds_str) = need("rounds")?;
    let rounds: u64 = rounds_str
        .parse()
        .map_err(|_| format_err(no_r, format!("bad rounds {rounds_str:?}")))?;

    let mut poisson = None;
    let mut exact = false;
    let mut body: Vec<(Vec<i64>, u64)> = Vec::new();

    let (no_next, line) = next_line()?.ok_or_else(|| format_err(0, "truncated header"))?;
    let rejected_line = if let Ok(v) = parse_kv(&line, "poisson_n", no_next) {
        poisson = Some(
            v.parse::<u64>()
                .map_err(|_| format_err(no_next, format!("bad poisson_n {v:?}")))?,
        );
        next_line()?.ok_or_else(|| format_err(0, "truncated header"))?
    } else {
        (no_next, line)
    };
    let (no_rej, rej_line) = rejected_line;
    let rejected: u64 = parse_kv(&rej_line, "rejected", no_rej)?
        .parse()
        .map_err(|_| format_err(no_rej, "bad rejected count"))?;

    while let Some((no, line)) = next_line()? {
        if line.is_empty() {
            return Err(format_err(no, "unexpected blank line"));
        }
        if let Some(rest) = line.strip_prefix("exact=") {
            if !body.is_empty() {
                return Err(format_err(no, "exact flag must precede the body"));
            }
            match rest {
                "true" => exact = true,
                other => return Err(format_err(no, format!("bad exact flag {other:?}"))),
            }
            continue;
        }
        let tokens: Vec<&str> = line.split(' ').collect();
        if tokens.len() != n + 1 {
            return Err(format_err(
                no,
                format!("expected {} fields, got {}", n + 1, tokens.len()),
            ));
        }
        let mut key = Vec::with_capacity(n);
        for t in &tokens[..n] {
            key.push(
                t.parse::<i64>()
                    .map_err(|_| format_err(no, format!("bad chow entry {t:?}")))?,
            );
        }
        let count: u64 = tokens[n]
            .parse()
            .map_err(|_| format_err(no, format!("bad count {:?}", tokens[n])))?;
        body.push((key, count));
    }

    Ok(RawFile {
        n,
        dist,
        seed,
        shards,
        rounds,
        poisson,
        rejected,
        exact,
        body,
    })
}

fn validated_keys(raw: &RawFile) -> Result<Vec<(ClassKey, u64)>> {
    let mut out = Vec::with_capacity(raw.body.len());
    let mut previous: Option<&[i64]> = None;
    for (entries, count) in &raw.body {
        let key = ClassKey::try_new(entries.clone())
            .map_err(|e| Error::Integrity(format!("invalid class key {entries:?}: {e}")))?;
        if let Some(prev) = previous {
            if entries.as_slice() >= prev {
                return Err(Error::Integrity(format!(
                    "body keys not strictly descending at {entries:?}"
                )));
            }
        }
        previous = Some(entries.as_slice());
        out.push((key, *count));
    }
    Ok(out)
}

/// Loads a sampling class map, validating every invariant (evenness,
/// bounds, canonicality, sorted unique keys, count conservation, coverage).
pub fn load<P: AsRef<Path>>(path: P) -> Result<ClassMap> {
    let raw = parse_raw(path)?;
    if raw.exact || raw.dist == EXACT_DIST {
        return Err(Error::Integrity(
            "file is an exact census, not a sampling map".into(),
        ));
    }
    let dist: WeightDistribution = raw
        .dist
        .parse()
        .map_err(|_| Error::Integrity(format!("unknown distribution {:?}", raw.dist)))?;
    let keys = validated_keys(&raw)?;
    let mut counts = BTreeMap::new();
    for (key, count) in keys {
        counts.insert(key, count);
    }
    ClassMap::from_parts(
        raw.n,
        dist,
        raw.seed,
        raw.shards,
        raw.rounds,
        raw.poisson,
        raw.rejected,
        counts,
    )
}

/// Loads an exact census file, checking that counts are genuine orbit sizes
/// and sum to the declared total.
pub fn load_census<P: AsRef<Path>>(path: P) -> Result<Census> {
    let raw = parse_raw(path)?;
    if !raw.exact || raw.dist != EXACT_DIST {
        return Err(Error::Integrity(
            "file is a sampling map, not an exact census".into(),
        ));
    }
    let classes = validated_keys(&raw)?;
    let mut total: u64 = 0;
    for (key, size) in &classes {
        if orbit_size(key) != u128::from(*size) {
            return Err(Error::Integrity(format!(
                "census size {size} does not match the orbit of {:?}",
                key.entries()
            )));
        }
        total = total
            .checked_add(*size)
            .ok_or_else(|| Error::Integrity("census total overflows u64".into()))?;
    }
    if total != raw.rounds {
        return Err(Error::Integrity(format!(
            "census sizes sum to {total}, header says {}",
            raw.rounds
        )));
    }
    Ok(Census {
        n: raw.n,
        classes,
    })
}

/// Loads, merges and saves in one pass. Headers must be compatible (same n
/// and distribution; seeds and shard counts may differ).
pub fn merge_files<P: AsRef<Path>, Q: AsRef<Path>>(paths: &[P], out_path: Q) -> Result<()> {
    let maps: Vec<ClassMap> = paths.iter().map(load).collect::<Result<_>>()?;
    let merged = merge(&maps)?;
    save(&merged, out_path)
}
