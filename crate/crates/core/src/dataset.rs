//! Datasets: synthetic generators and the on-disk formats.
//!
//! Binary layout, little-endian:
//!
//! ```text
//! magic "PGMD" | version u16 | key type u8 | payload_size u16 | count u64
//! then count keys of 8 bytes, then count * payload_size payload bytes
//! ```
//!
//! The text format holds one decimal key per line in sorted order. Weighted
//! key files hold `key<TAB>weight` per line; weights are normalized on load.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Zipf};

use crate::dist_aware::QueryDistribution;
use crate::key::{validate_sorted, Key, KeyType};
use crate::{Error, Result};

pub const DATASET_MAGIC: [u8; 4] = *b"PGMD";
pub const DATASET_VERSION: u16 = 1;
pub const DATASET_HEADER_BYTES: usize = 17;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<K> {
    pub keys: Vec<K>,
    /// Bytes of payload per key, 0 for none.
    pub payload_size: u16,
    pub payloads: Vec<u8>,
    /// Where the keys came from. Not stored in either file format.
    pub note: String,
}

impl<K: Key> Dataset<K> {
    pub fn new(keys: Vec<K>) -> Result<Self> {
        validate_sorted(&keys)?;
        Ok(Self {
            keys,
            payload_size: 0,
            payloads: Vec::new(),
            note: String::new(),
        })
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn with_payloads(mut self, payload_size: u16, payloads: Vec<u8>) -> Result<Self> {
        if payloads.len() != self.keys.len() * payload_size as usize {
            return Err(Error::InvalidRequest(format!(
                "{} payload bytes for {} keys of {payload_size} bytes",
                payloads.len(),
                self.keys.len()
            )));
        }
        self.payload_size = payload_size;
        self.payloads = payloads;
        Ok(self)
    }

    /// Attaches seeded random payloads of `payload_size` bytes per key.
    pub fn with_random_payloads(self, payload_size: u16, seed: u64) -> Self {
        let mut bytes = vec![0u8; self.keys.len() * payload_size as usize];
        ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15).fill_bytes(&mut bytes);
        self.with_payloads(payload_size, bytes).unwrap()
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(DATASET_HEADER_BYTES + 8 * self.keys.len() + self.payloads.len());
        out.extend_from_slice(&DATASET_MAGIC);
        out.extend_from_slice(&DATASET_VERSION.to_le_bytes());
        out.push(K::KEY_TYPE.tag());
        out.extend_from_slice(&self.payload_size.to_le_bytes());
        out.extend_from_slice(&(self.keys.len() as u64).to_le_bytes());
        for k in &self.keys {
            out.extend_from_slice(&k.to_bits().to_le_bytes());
        }
        out.extend_from_slice(&self.payloads);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let h = read_dataset_header(bytes)?;
        if h.key_type != K::KEY_TYPE {
            return Err(Error::KeyTypeMismatch {
                expected: K::KEY_TYPE.tag(),
                found: h.key_type.tag(),
            });
        }
        let body = &bytes[DATASET_HEADER_BYTES..];
        let count = usize::try_from(h.count).map_err(|_| Error::Corrupt("key count too large".into()))?;
        let key_bytes = count.checked_mul(8).ok_or(Error::Truncated)?;
        let payload_bytes = count
            .checked_mul(h.payload_size as usize)
            .ok_or(Error::Truncated)?;
        let need = key_bytes.checked_add(payload_bytes).ok_or(Error::Truncated)?;
        if body.len() < need {
            return Err(Error::Truncated);
        }
        if body.len() > need {
            return Err(Error::Corrupt("trailing bytes".into()));
        }
        let keys: Vec<K> = body[..key_bytes]
            .chunks_exact(8)
            .map(|c| K::from_bits(u64::from_le_bytes(c.try_into().unwrap())))
            .collect();
        validate_sorted(&keys)?;
        Ok(Self {
            keys,
            payload_size: h.payload_size,
            payloads: body[key_bytes..].to_vec(),
            note: String::new(),
        })
    }

    /// One key per line.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.keys.len() * 12);
        for k in &self.keys {
            writeln!(s, "{k}").unwrap();
        }
        s
    }

    /// Parses one key per line. Blank lines are skipped; payloads are not
    /// representable in text.
    pub fn from_text(text: &str) -> Result<Self> {
        Self::new(parse_key_lines(text)?)
    }
}

fn parse_key_lines<K: Key>(text: &str) -> Result<Vec<K>> {
    let mut keys = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        keys.push(parse_key(t, i + 1)?);
    }
    Ok(keys)
}

fn parse_key<K: Key>(t: &str, line: usize) -> Result<K> {
    let k = K::from_str(t).map_err(|_| Error::Parse {
        line,
        msg: format!("not a {:?} key: {t:?}", K::KEY_TYPE),
    })?;
    if !k.is_valid() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite key {t:?}"),
        });
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetHeader {
    pub key_type: KeyType,
    pub payload_size: u16,
    pub count: u64,
}

pub fn read_dataset_header(bytes: &[u8]) -> Result<DatasetHeader> {
    if bytes.len() < 4 {
        return Err(Error::Truncated);
    }
    if bytes[..4] != DATASET_MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < DATASET_HEADER_BYTES {
        return Err(Error::Truncated);
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != DATASET_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let key_type = KeyType::from_tag(bytes[6])
        .ok_or_else(|| Error::Corrupt(format!("unknown key type tag {}", bytes[6])))?;
    Ok(DatasetHeader {
        key_type,
        payload_size: u16::from_le_bytes([bytes[7], bytes[8]]),
        count: u64::from_le_bytes(bytes[9..17].try_into().unwrap()),
    })
}

/// A dataset whose key type is known only at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyDataset {
    U64(Dataset<u64>),
    F64(Dataset<f64>),
}

impl AnyDataset {
    /// Reads the binary format if `bytes` starts with the dataset magic,
    /// otherwise the text format with keys of type `text_key_type`.
    pub fn load(bytes: &[u8], text_key_type: KeyType) -> Result<Self> {
        if bytes.starts_with(&DATASET_MAGIC) {
            return match read_dataset_header(bytes)?.key_type {
                KeyType::U64 => Ok(AnyDataset::U64(Dataset::from_bytes(bytes)?)),
                KeyType::F64 => Ok(AnyDataset::F64(Dataset::from_bytes(bytes)?)),
            };
        }
        let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
            line: 0,
            msg: format!("not utf-8 text: {e}"),
        })?;
        match text_key_type {
            KeyType::U64 => Ok(AnyDataset::U64(Dataset::from_text(text)?)),
            KeyType::F64 => Ok(AnyDataset::F64(Dataset::from_text(text)?)),
        }
    }

    pub fn key_type(&self) -> KeyType {
        match self {
            AnyDataset::U64(_) => KeyType::U64,
            AnyDataset::F64(_) => KeyType::F64,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AnyDataset::U64(d) => d.len(),
            AnyDataset::F64(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            AnyDataset::U64(d) => d.to_bytes(),
            AnyDataset::F64(d) => d.to_bytes(),
        }
    }
}

/// Synthetic key distributions, all producing `u64` keys.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenKind {
    /// Gaps uniform in `[1, 100]`.
    UniformGaps,
    /// Gaps drawn from a Zipf law with exponent 1.2 over `[1, 10⁶]`.
    ZipfGaps,
    /// `segments` linear runs of different slopes, each key displaced by at
    /// most `noise` ranks from its run's line.
    PiecewiseLinear { segments: usize, noise: f64 },
    /// Gaps `1 + ⌊X⌋` with `X` log-normal (μ = 0, σ = 2).
    LognormalGaps,
}

impl GenKind {
    pub const NAMES: [&'static str; 4] = [
        "uniform_gaps",
        "zipf_gaps",
        "piecewise_linear",
        "lognormal_gaps",
    ];

    /// `segments` and `noise` are only read for `piecewise_linear`.
    pub fn parse(name: &str, segments: usize, noise: f64) -> Result<Self> {
        match name {
            "uniform_gaps" => Ok(GenKind::UniformGaps),
            "zipf_gaps" => Ok(GenKind::ZipfGaps),
            "piecewise_linear" => Ok(GenKind::PiecewiseLinear { segments, noise }),
            "lognormal_gaps" => Ok(GenKind::LognormalGaps),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GenKind::UniformGaps => "uniform_gaps",
            GenKind::ZipfGaps => "zipf_gaps",
            GenKind::PiecewiseLinear { .. } => "piecewise_linear",
            GenKind::LognormalGaps => "lognormal_gaps",
        }
    }
}

impl FromStr for GenKind {
    type Err = Error;

    /// Accepts the plain names, and `piecewise_linear:<segments>:<noise>`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("piecewise_linear:") {
            let (seg, noise) = rest
                .split_once(':')
                .ok_or_else(|| Error::UnknownKind(s.to_string()))?;
            let segments = seg.parse().map_err(|_| Error::UnknownKind(s.to_string()))?;
            let noise = noise.parse().map_err(|_| Error::UnknownKind(s.to_string()))?;
            return Ok(GenKind::PiecewiseLinear { segments, noise });
        }
        GenKind::parse(s, 1, 0.0)
    }
}

fn cumulative(n: usize, mut gap: impl FnMut() -> u64) -> Vec<u64> {
    let mut k = 0u64;
    (0..n)
        .map(|_| {
            k = k.saturating_add(gap());
            k
        })
        .collect()
}

/// Deterministic per `(kind, n, seed)`.
pub fn gen_dataset(kind: GenKind, n: usize, seed: u64) -> Result<Dataset<u64>> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys = match kind {
        GenKind::UniformGaps => cumulative(n, || rng.random_range(1..=100)),
        GenKind::ZipfGaps => {
            let z = Zipf::new(1e6, 1.2).expect("valid zipf parameters");
            cumulative(n, || z.sample(&mut rng) as u64)
        }
        GenKind::LognormalGaps => {
            let d = LogNormal::new(0.0, 2.0).expect("valid log-normal parameters");
            cumulative(n, || 1 + (d.sample(&mut rng) as u64).min(1_000_000_000))
        }
        GenKind::PiecewiseLinear { segments, noise } => piecewise_linear(n, segments, noise, &mut rng)?,
    };
    let note = match kind {
        GenKind::PiecewiseLinear { segments, noise } => {
            format!("piecewise_linear segments={segments} noise={noise} n={n} seed={seed}")
        }
        k => format!("{} n={n} seed={seed}", k.name()),
    };
    Ok(Dataset::new(keys)?.with_note(note))
}

fn piecewise_linear(n: usize, segments: usize, noise: f64, rng: &mut ChaCha8Rng) -> Result<Vec<u64>> {
    if segments == 0 || segments > n {
        return Err(Error::InvalidRequest(format!(
            "piecewise_linear needs 1..={n} segments, got {segments}"
        )));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidRequest(format!("noise must be finite and >= 0, got {noise}")));
    }
    let slopes: Vec<f64> = (0..segments).map(|_| rng.random_range(1..=1000) as f64).collect();
    let mut keys = Vec::with_capacity(n);
    let mut base = (slopes[0] * noise).ceil();
    for (j, &g) in slopes.iter().enumerate() {
        let len = n / segments + usize::from(j < n % segments);
        let start = keys.len();
        for i in 0..len {
            let d = if noise > 0.0 { rng.random_range(-noise..=noise) } else { 0.0 };
            keys.push((base + g * (i as f64 + d)).floor().max(0.0) as u64);
        }
        // Sorting perturbed points keeps each within `noise` ranks of the line.
        keys[start..].sort_unstable();
        if let Some(&next) = slopes.get(j + 1) {
            base += g * (len as f64 - 1.0 + noise) + next * (noise + 1.0);
            base = base.ceil();
        }
    }
    Ok(keys)
}

/// Zipf popularity weights `1/(r+1)^s` over `n` keys, assigned to keys in a
/// seeded random order so that popularity does not follow key order.
pub fn zipf_popularity(n: usize, s: f64, seed: u64) -> Vec<f64> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut w = vec![0.0; n];
    for (rank, &pos) in perm.iter().enumerate() {
        w[pos] = 1.0 / ((rank + 1) as f64).powf(s);
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Parses `key<TAB>weight` lines into a normalized distribution. Keys must
/// be strictly increasing and weights positive.
pub fn parse_weighted_text<K: Key>(text: &str) -> Result<QueryDistribution<K>> {
    let mut keys = Vec::new();
    let mut weights = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let (k, w) = t.split_once('\t').ok_or_else(|| Error::Parse {
            line: i + 1,
            msg: "expected key<TAB>weight".into(),
        })?;
        keys.push(parse_key::<K>(k.trim(), i + 1)?);
        let w: f64 = w.trim().parse().map_err(|_| Error::Parse {
            line: i + 1,
            msg: format!("not a weight: {w:?}"),
        })?;
        weights.push(w);
    }
    QueryDistribution::from_weights(keys, &weights)
}

pub fn to_weighted_text<K: Key>(dist: &QueryDistribution<K>) -> String {
    let mut s = String::new();
    for (k, p) in dist.keys().iter().zip(dist.probs()) {
        writeln!(s, "{k}\t{p}").unwrap();
    }
    s
}
