//! Counter-based random streams.
//!
//! Every random quantity in the crate is a pure function of a 128-bit
//! [`StreamKey`] and an integer counter, evaluated with the Philox4x64-10
//! block function. Nothing carries mutable generator state across threads,
//! so results never depend on scheduling.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

const PHILOX_M0: u64 = 0xD2E7_470E_E14C_6C93;
const PHILOX_M1: u64 = 0xCA5A_8263_9512_1157;
const PHILOX_W0: u64 = 0x9E37_79B9_7F4A_7C15;
const PHILOX_W1: u64 = 0xBB67_AE85_84CA_A73B;

#[inline(always)]
fn mulhilo(a: u64, b: u64) -> (u64, u64) {
    let prod = (a as u128) * (b as u128);
    ((prod >> 64) as u64, prod as u64)
}

/// Philox4x64 with 10 rounds.
#[inline]
pub fn philox4x64(key: [u64; 2], ctr: [u64; 4]) -> [u64; 4] {
    let [mut k0, mut k1] = key;
    let mut c = ctr;
    for round in 0..10 {
        if round > 0 {
            k0 = k0.wrapping_add(PHILOX_W0);
            k1 = k1.wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0];
    }
    c
}

/// Maps 64 random bits to a uniform in the open interval (0, 1).
#[inline(always)]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Box–Muller transform of two uniform words; the cosine branch is returned.
#[inline(always)]
pub fn box_muller(w0: u64, w1: u64) -> f64 {
    let u1 = open_unit(w0);
    let u2 = open_unit(w1);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// 128-bit identifier of an independent random stream.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct StreamKey(pub u128);

// Domain separators so that derived keys, sequential streams and tensor
// entries never share a counter.
const DOMAIN_DERIVE: u64 = 0x6465_7269_7665_0001;
const DOMAIN_SEQUENCE: u64 = 0x7365_7175_656e_0002;

impl StreamKey {
    pub fn new(key: u128) -> Self {
        StreamKey(key)
    }

    pub fn from_seed(seed: u64) -> Self {
        StreamKey(seed as u128)
    }

    #[inline(always)]
    pub fn words(self) -> [u64; 2] {
        [self.0 as u64, (self.0 >> 64) as u64]
    }

    /// Derives a child key from this key and a path of words.
    ///
    /// Distinct paths (including paths of different lengths) give
    /// unrelated keys.
    pub fn derive(self, path: &[u64]) -> StreamKey {
        let key = self.words();
        let mut state = philox4x64(key, [DOMAIN_DERIVE, path.len() as u64, 0, 0]);
        for chunk in path.chunks(3) {
            let mut ctr = state;
            for (slot, w) in ctr[1..].iter_mut().zip(chunk) {
                *slot ^= *w;
            }
            state = philox4x64(key, ctr);
        }
        StreamKey((state[0] as u128) | ((state[1] as u128) << 64))
    }

    /// Derives a child key from a string label (e.g. an experiment id).
    pub fn derive_label(self, label: &str) -> StreamKey {
        let words: Vec<u64> = label
            .as_bytes()
            .chunks(8)
            .map(|c| {
                let mut buf = [0u8; 8];
                buf[..c.len()].copy_from_slice(c);
                u64::from_le_bytes(buf)
            })
            .collect();
        self.derive(&words).derive(&[label.len() as u64])
    }

    /// Two uniform words addressed by an index tuple.
    ///
    /// Tuples of length at most four are used directly as the Philox
    /// counter; longer tuples are absorbed four words at a time.
    #[inline]
    pub fn tuple_words(self, idx: &[usize]) -> (u64, u64) {
        let key = self.words();
        let mut ctr = [0u64; 4];
        let mut out = [0u64; 4];
        let mut first = true;
        for chunk in idx.chunks(4) {
            if !first {
                ctr = out;
            }
            for (slot, &i) in ctr.iter_mut().zip(chunk) {
                *slot ^= i as u64;
            }
            out = philox4x64(key, ctr);
            first = false;
        }
        if first {
            out = philox4x64(key, ctr);
        }
        (out[0], out[1])
    }

    /// Standard normal deviate addressed by an index tuple.
    #[inline]
    pub fn normal_at(self, idx: &[usize]) -> f64 {
        let (w0, w1) = self.tuple_words(idx);
        box_muller(w0, w1)
    }

    /// A sequential generator over this key.
    pub fn sequence(self) -> CounterRng {
        CounterRng::new(self)
    }
}

impl fmt::Debug for StreamKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StreamKey({:032x})", self.0)
    }
}

impl fmt::Display for StreamKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:032x}", self.0)
    }
}

impl FromStr for StreamKey {
    type Err = String;

    /// Accepts a decimal integer or a `0x`-prefixed hex string.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parsed = if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            u128::from_str_radix(hex, 16)
        } else {
            s.parse::<u128>()
        };
        parsed
            .map(StreamKey)
            .map_err(|e| format!("invalid seed {s:?}: {e}"))
    }
}

impl Serialize for StreamKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for StreamKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(u64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Int(v) => Ok(StreamKey(v as u128)),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Sequential generator: block `i` is `philox(key, [i, 0, 0, DOMAIN])`.
#[derive(Clone, Debug)]
pub struct CounterRng {
    key: [u64; 2],
    block: u64,
    buf: [u64; 4],
    used: usize,
}

impl CounterRng {
    pub fn new(key: StreamKey) -> Self {
        CounterRng {
            key: key.words(),
            block: 0,
            buf: [0; 4],
            used: 4,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        if self.used == 4 {
            self.buf = philox4x64(self.key, [self.block, 0, 0, DOMAIN_SEQUENCE]);
            self.block += 1;
            self.used = 0;
        }
        let v = self.buf[self.used];
        self.used += 1;
        v
    }

    pub fn next_f64(&mut self) -> f64 {
        open_unit(self.next_u64())
    }

    pub fn next_normal(&mut self) -> f64 {
        let a = self.next_u64();
        let b = self.next_u64();
        box_muller(a, b)
    }

    /// Uniform integer in `[0, bound)` by rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound) - 1;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % bound;
            }
        }
    }

    /// Uniformly random `k`-subset of `[lo, lo + len)` (Floyd's algorithm),
    /// returned in ascending order.
    pub fn subset(&mut self, lo: usize, len: usize, k: usize) -> Vec<usize> {
        assert!(k <= len);
        let mut chosen = std::collections::BTreeSet::new();
        for j in (len - k)..len {
            let t = self.below(j as u64 + 1) as usize;
            if !chosen.insert(t) {
                chosen.insert(j);
            }
        }
        chosen.into_iter().map(|x| x + lo).collect()
    }
}
