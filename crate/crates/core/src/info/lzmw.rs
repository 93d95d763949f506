//! LZMW (Miller–Wegman) dictionary coder.
//!
//! Each new dictionary entry is the concatenation of the previous two parsed
//! phrases, so periodic inputs are absorbed in a logarithmic number of
//! phrases. Codes are written with the smallest width that can address the
//! current dictionary. The stream starts with a 32-bit big-endian length.

use std::collections::HashMap;

use bitstream_io::{BigEndian, BitRead, BitReader, BitWrite, BitWriter};

use super::{Compressed, Compressor, InfoError};

const HEADER_BITS: u64 = 32;
const NO_ENTRY: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lzmw {
    max_code_bits: u32,
}

impl Default for Lzmw {
    fn default() -> Self {
        Self { max_code_bits: 20 }
    }
}

impl Lzmw {
    /// Caps the dictionary at `2^max_code_bits` entries. Must be in 9..=24.
    pub fn with_max_code_bits(max_code_bits: u32) -> Result<Self, InfoError> {
        if !(9..=24).contains(&max_code_bits) {
            return Err(InfoError::InvalidInput(format!("max code width must be in 9..=24, got {max_code_bits}")));
        }
        Ok(Self { max_code_bits })
    }

    fn capacity(&self) -> u32 {
        1 << self.max_code_bits
    }
}

fn code_width(entries: u32) -> u32 {
    (32 - (entries - 1).leading_zeros()).max(8)
}

/// Byte trie shared by both directions. Node 0 is the root and node `1 + b`
/// is the single byte `b`, which is also entry `b`.
struct Dictionary {
    children: HashMap<(u32, u8), u32>,
    entry_of_node: Vec<u32>,
    node_of_entry: Vec<u32>,
    capacity: u32,
}

impl Dictionary {
    fn new(capacity: u32) -> Self {
        let mut children = HashMap::with_capacity(4096);
        let mut entry_of_node = vec![NO_ENTRY];
        let mut node_of_entry = Vec::with_capacity(4096);
        for b in 0..=255u8 {
            let node = u32::from(b) + 1;
            children.insert((0, b), node);
            entry_of_node.push(u32::from(b));
            node_of_entry.push(node);
        }
        Self { children, entry_of_node, node_of_entry, capacity }
    }

    fn len(&self) -> u32 {
        self.node_of_entry.len() as u32
    }

    /// Longest entry that prefixes `data`: (node, length). `data` must be
    /// non-empty.
    fn longest_match(&self, data: &[u8]) -> (u32, usize) {
        let mut node = 0;
        let mut best = (0, 0);
        for (j, &b) in data.iter().enumerate() {
            match self.children.get(&(node, b)) {
                Some(&child) => {
                    node = child;
                    if self.entry_of_node[child as usize] != NO_ENTRY {
                        best = (child, j + 1);
                    }
                }
                None => break,
            }
        }
        best
    }

    /// Registers `prefix ⧺ suffix` where `prefix` is the string at `from`.
    /// Returns the new entry id, or `None` when it already exists or the
    /// dictionary is full.
    fn extend(&mut self, from: u32, suffix: &[u8]) -> Option<u32> {
        if self.len() >= self.capacity {
            return None;
        }
        let mut node = from;
        for &b in suffix {
            node = match self.children.get(&(node, b)) {
                Some(&c) => c,
                None => {
                    let c = self.entry_of_node.len() as u32;
                    self.entry_of_node.push(NO_ENTRY);
                    self.children.insert((node, b), c);
                    c
                }
            };
        }
        if self.entry_of_node[node as usize] != NO_ENTRY {
            return None;
        }
        let id = self.len();
        self.entry_of_node[node as usize] = id;
        self.node_of_entry.push(node);
        Some(id)
    }
}

impl Compressor for Lzmw {
    fn id(&self) -> String {
        format!("lzmw-{}", self.max_code_bits)
    }

    /// # Panics
    /// On payloads of 4 GiB or more.
    fn compress(&self, data: &[u8]) -> Compressed {
        let len = u32::try_from(data.len()).expect("payload must be shorter than 4 GiB");
        let mut w = BitWriter::endian(Vec::new(), BigEndian);
        w.write::<32, u32>(len).expect("writing to a Vec cannot fail");
        let mut bits = HEADER_BITS;
        let mut dict = Dictionary::new(self.capacity());
        let mut prev: Option<u32> = None;
        let mut i = 0;
        while i < data.len() {
            let (node, n) = dict.longest_match(&data[i..]);
            let width = code_width(dict.len());
            w.write_var(width, dict.entry_of_node[node as usize]).expect("writing to a Vec cannot fail");
            bits += u64::from(width);
            if let Some(p) = prev {
                dict.extend(p, &data[i..i + n]);
            }
            prev = Some(node);
            i += n;
        }
        w.byte_align().expect("writing to a Vec cannot fail");
        Compressed { bits, bytes: w.into_writer() }
    }

    fn decompress(&self, data: &[u8]) -> Result<Vec<u8>, InfoError> {
        let truncated = |_| InfoError::Corrupt("stream ends early".into());
        let mut r = BitReader::endian(data, BigEndian);
        let len = r.read::<32, u32>().map_err(truncated)? as usize;
        let mut out: Vec<u8> = Vec::with_capacity(len.min(1 << 24));
        // (start, length) of every entry inside `out`
        let mut spans: Vec<(usize, usize)> = Vec::new();
        let mut dict = Dictionary::new(self.capacity());
        let mut prev: Option<u32> = None;
        while out.len() < len {
            let width = code_width(dict.len());
            let code: u32 = r.read_var(width).map_err(truncated)?;
            if code >= dict.len() {
                return Err(InfoError::Corrupt(format!("code {code} outside a dictionary of {}", dict.len())));
            }
            let start = out.len();
            if code < 256 {
                out.push(code as u8);
            } else {
                let (s, n) = spans[code as usize - 256];
                out.extend_from_within(s..s + n);
            }
            if out.len() > len {
                return Err(InfoError::Corrupt("phrase overruns the declared length".into()));
            }
            let node = dict.node_of_entry[code as usize];
            if let Some(p) = prev {
                let prev_start = start - phrase_len(&dict, &spans, p);
                if dict.extend(p, &out[start..]).is_some() {
                    spans.push((prev_start, out.len() - prev_start));
                }
            }
            prev = Some(node);
        }
        Ok(out)
    }
}

/// Length of the string at trie node `node`, which must be an entry.
fn phrase_len(dict: &Dictionary, spans: &[(usize, usize)], node: u32) -> usize {
    let id = dict.entry_of_node[node as usize];
    if id < 256 {
        1
    } else {
        spans[id as usize - 256].1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn round_trip(c: &Lzmw, data: &[u8]) -> Compressed {
        let z = c.compress(data);
        assert_eq!(z.bytes.len() as u64, z.bits.div_ceil(8));
        assert_eq!(c.decompress(&z.bytes).unwrap(), data);
        z
    }

    #[test]
    fn empty_payload_is_header_only() {
        let z = round_trip(&Lzmw::default(), &[]);
        assert_eq!(z.bits, 32);
        assert_eq!(z.bytes, vec![0; 4]);
    }

    #[test]
    fn repetitive_input_shrinks() {
        let data = vec![b'x'; 10_000];
        let z = round_trip(&Lzmw::default(), &data);
        assert!((z.bits as f64) < 0.05 * 80_000.0, "{} bits", z.bits);
    }

    #[test]
    fn random_input_does_not() {
        let mut data = vec![0u8; 10_000];
        ChaCha8Rng::seed_from_u64(11).fill_bytes(&mut data);
        let z = round_trip(&Lzmw::default(), &data);
        assert!(z.bits as f64 >= 0.99 * 80_000.0, "{} bits", z.bits);
    }

    #[test]
    fn small_dictionary_fills_and_keeps_working() {
        let mut data = vec![0u8; 20_000];
        ChaCha8Rng::seed_from_u64(3).fill_bytes(&mut data);
        data.iter_mut().for_each(|b| *b %= 4);
        let c = Lzmw::with_max_code_bits(9).unwrap();
        round_trip(&c, &data);
        assert!(Lzmw::with_max_code_bits(8).is_err());
    }

    #[test]
    fn code_widths() {
        assert_eq!(code_width(256), 8);
        assert_eq!(code_width(257), 9);
        assert_eq!(code_width(512), 9);
        assert_eq!(code_width(513), 10);
    }

    #[test]
    fn damaged_streams_are_rejected() {
        let c = Lzmw::default();
        let z = c.compress(b"abracadabra abracadabra");
        assert!(c.decompress(&z.bytes[..z.bytes.len() - 3]).is_err());
        assert!(c.decompress(&[0, 0]).is_err());
        // header promises 5 bytes, a single 8-bit code of 0xff follows, then nothing
        assert!(c.decompress(&[0, 0, 0, 5, 0xff]).is_err());
    }

    proptest! {
        #[test]
        fn round_trips(data in proptest::collection::vec(0u8..6, 0..3000)) {
            let c = Lzmw::default();
            prop_assert_eq!(c.decompress(&c.compress(&data).bytes).unwrap(), data);
        }

        #[test]
        fn round_trips_with_a_full_dictionary(data in proptest::collection::vec(any::<u8>(), 0..3000)) {
            let c = Lzmw::with_max_code_bits(9).unwrap();
            prop_assert_eq!(c.decompress(&c.compress(&data).bytes).unwrap(), data);
        }
    }
}
