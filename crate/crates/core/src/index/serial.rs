//! Binary layout of a model, little-endian throughout:
//!
//! ```text
//! magic "PGMI" | version u16 | key type u8 | router u8 | eps_last u32
//! | eps_internal u32 | key_count u64 | level_count u16
//! then per level, top first: segment_count u64, segments of 24 bytes each
//! (first_key bits u64, slope f64, intercept f64)
//! ```
//!
//! For the multiway router the `eps_internal` field holds the fanout.

use super::{PgmModel, Router};
use crate::key::{Key, KeyType};
use crate::pla::{PlaModel, Segment};
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"PGMI";
pub const VERSION: u16 = 1;
pub const HEADER_BYTES: usize = 26;
pub const SEGMENT_BYTES: usize = 24;
const LEVEL_HEADER_BYTES: usize = 8;

pub(super) fn serialized_len(segments_per_level: &[usize]) -> u64 {
    (HEADER_BYTES
        + segments_per_level
            .iter()
            .map(|m| LEVEL_HEADER_BYTES + SEGMENT_BYTES * m)
            .sum::<usize>()) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexHeader {
    pub key_type: KeyType,
    pub router: Router,
    pub eps_last: u32,
    pub eps_internal: u32,
    pub key_count: u64,
    pub level_count: u16,
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        if self.buf.len() < N {
            return Err(Error::Truncated);
        }
        let (head, rest) = self.buf.split_at(N);
        self.buf = rest;
        Ok(head.try_into().unwrap())
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take()?))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

fn parse_header(r: &mut Reader<'_>) -> Result<IndexHeader> {
    if r.take::<4>()? != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let key_tag = r.u8()?;
    let key_type = KeyType::from_tag(key_tag)
        .ok_or_else(|| Error::Corrupt(format!("unknown key type tag {key_tag}")))?;
    let router_tag = r.u8()?;
    let eps_last = r.u32()?;
    let eps_internal = r.u32()?;
    let router = match router_tag {
        0 => Router::Binary,
        1 => Router::Multiway {
            fanout: eps_internal,
        },
        2 => Router::Recursive,
        3 => Router::DistributionAware,
        t => return Err(Error::UnknownRouter(t)),
    };
    Ok(IndexHeader {
        key_type,
        router,
        eps_last,
        eps_internal,
        key_count: r.u64()?,
        level_count: r.u16()?,
    })
}

/// Parses only the fixed-size header.
pub fn read_header(bytes: &[u8]) -> Result<IndexHeader> {
    parse_header(&mut Reader { buf: bytes })
}

impl<K: Key> PgmModel<K> {
    pub fn serialize(&self) -> Vec<u8> {
        let sizes: Vec<usize> = self.levels.iter().map(|l| l.len()).collect();
        let mut out = Vec::with_capacity(serialized_len(&sizes) as usize);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(K::KEY_TYPE.tag());
        out.push(self.router.tag());
        out.extend_from_slice(&self.eps_last.to_le_bytes());
        out.extend_from_slice(&self.eps_internal.to_le_bytes());
        out.extend_from_slice(&(self.key_count as u64).to_le_bytes());
        out.extend_from_slice(&(self.levels.len() as u16).to_le_bytes());
        for level in &self.levels {
            out.extend_from_slice(&(level.len() as u64).to_le_bytes());
            for s in level.segments() {
                out.extend_from_slice(&s.first_key.to_bits().to_le_bytes());
                out.extend_from_slice(&s.slope.to_le_bytes());
                out.extend_from_slice(&s.intercept.to_le_bytes());
            }
        }
        out
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes };
        let h = parse_header(&mut r)?;
        if h.key_type != K::KEY_TYPE {
            return Err(Error::KeyTypeMismatch {
                expected: K::KEY_TYPE.tag(),
                found: h.key_type.tag(),
            });
        }
        let corrupt = |msg: &str| Error::Corrupt(msg.to_string());
        if h.eps_last == 0 || h.eps_internal == 0 {
            return Err(corrupt("zero epsilon"));
        }
        if h.key_count == 0 {
            return Err(corrupt("empty key set"));
        }
        let levels_ok = match h.router {
            Router::Binary => h.level_count == 1,
            Router::Multiway { fanout } => h.level_count == 1 && fanout >= 2,
            Router::Recursive | Router::DistributionAware => h.level_count >= 2,
        };
        if !levels_ok {
            return Err(corrupt("level count does not match the router"));
        }

        let mut raw_levels: Vec<Vec<Segment<K>>> = Vec::with_capacity(h.level_count as usize);
        for _ in 0..h.level_count {
            let m = r.u64()?;
            if m == 0 {
                return Err(corrupt("empty level"));
            }
            if (r.buf.len() as u64) / (SEGMENT_BYTES as u64) < m {
                return Err(Error::Truncated);
            }
            let mut segs = Vec::with_capacity(m as usize);
            for _ in 0..m {
                let first_key = K::from_bits(r.u64()?);
                let slope = r.f64()?;
                let intercept = r.f64()?;
                if !first_key.is_valid() || !slope.is_finite() || !intercept.is_finite() {
                    return Err(corrupt("non-finite segment field"));
                }
                if segs.last().is_some_and(|p: &Segment<K>| !(p.first_key < first_key)) {
                    return Err(corrupt("segment keys not increasing"));
                }
                segs.push(Segment::new(first_key, slope, intercept));
            }
            raw_levels.push(segs);
        }
        if !r.buf.is_empty() {
            return Err(corrupt("trailing bytes"));
        }
        if matches!(h.router, Router::Recursive | Router::DistributionAware)
            && raw_levels[0].len() != 1
        {
            return Err(corrupt("root level must hold one segment"));
        }

        let n_levels = raw_levels.len();
        let sizes: Vec<usize> = raw_levels.iter().map(Vec::len).collect();
        let levels = raw_levels
            .into_iter()
            .enumerate()
            .map(|(i, segs)| {
                let last = i + 1 == n_levels;
                let (eps, n) = if last {
                    (h.eps_last, h.key_count as usize)
                } else {
                    (h.eps_internal, sizes[i + 1])
                };
                PlaModel::from_parts(segs, eps, n)
            })
            .collect();
        Self::from_levels(levels, h.eps_last, h.eps_internal, h.router)
    }
}

#[cfg(test)]
mod tests {
    use super::super::IndexConfig;
    use super::*;

    fn sample() -> PgmModel<u64> {
        let keys: Vec<u64> = (0..20_000u64).map(|i| i * i / 3 + i).collect();
        PgmModel::build(&keys, &IndexConfig::recursive(8)).unwrap()
    }

    #[test]
    fn round_trip_and_size() {
        let m = sample();
        let bytes = m.serialize();
        assert_eq!(bytes.len() as u64, m.stats().bytes);
        assert_eq!(PgmModel::<u64>::deserialize(&bytes).unwrap(), m);
        let h = read_header(&bytes).unwrap();
        assert_eq!(h.router, Router::Recursive);
        assert_eq!(h.level_count as usize, m.levels().len());
    }

    #[test]
    fn load_errors_are_distinct() {
        let bytes = sample().serialize();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(PgmModel::<u64>::deserialize(&bad), Err(Error::BadMagic));
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert_eq!(
            PgmModel::<u64>::deserialize(&bad),
            Err(Error::UnsupportedVersion(2))
        );
        assert_eq!(
            PgmModel::<u64>::deserialize(&bytes[..bytes.len() - 5]),
            Err(Error::Truncated)
        );
        assert_eq!(PgmModel::<u64>::deserialize(&bytes[..10]), Err(Error::Truncated));
        assert!(matches!(
            PgmModel::<f64>::deserialize(&bytes),
            Err(Error::KeyTypeMismatch { .. })
        ));
        let mut bad = bytes.clone();
        bad[7] = 9;
        assert_eq!(PgmModel::<u64>::deserialize(&bad), Err(Error::UnknownRouter(9)));
        let mut bad = bytes;
        bad.push(0);
        assert!(matches!(
            PgmModel::<u64>::deserialize(&bad),
            Err(Error::Corrupt(_))
        ));
    }
}
