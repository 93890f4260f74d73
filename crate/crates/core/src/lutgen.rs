//! Velocity-factor math and grouped LUT construction.
//!
//! The velocity factor `f(a) = (1 - tanh a) / (1 + tanh a) = e^(-2a)` turns
//! the tanh addition law into a product, so the factor of an input
//! magnitude is the product of per-bit factors. Bits are grouped into
//! small LUTs that store the product for every combination of their bits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fxnum::{quantize, Fx, QFormat, RoundMode};

/// `(1 - tanh a) / (1 + tanh a)`, in `(0, 1]` for `a >= 0`.
pub fn velocity_factor(a: f64) -> f64 {
    let t = a.tanh();
    (1.0 - t) / (1.0 + t)
}

/// `(1 + tanh a) / (1 - tanh a)`, the reciprocal convention (values `>= 1`).
pub fn velocity_factor_original(a: f64) -> f64 {
    let t = a.tanh();
    (1.0 + t) / (1.0 - t)
}

pub fn tanh_from_factor(f: f64) -> f64 {
    (1.0 - f) / (1.0 + f)
}

pub fn tanh_from_factor_original(f: f64) -> f64 {
    (f - 1.0) / (f + 1.0)
}

/// How input bits are assigned to LUT addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupingScheme {
    group_width: u32,
    shuffle: bool,
}

impl GroupingScheme {
    pub fn new(group_width: u32, shuffle: bool) -> Result<Self> {
        if !matches!(group_width, 1 | 2 | 4) {
            return Err(Error::GroupWidth(group_width));
        }
        Ok(Self { group_width, shuffle })
    }

    pub fn group_width(&self) -> u32 {
        self.group_width
    }

    pub fn shuffle(&self) -> bool {
        self.shuffle
    }
}

impl Default for GroupingScheme {
    fn default() -> Self {
        Self {
            group_width: 4,
            shuffle: true,
        }
    }
}

/// Partitions bit indices `0..magnitude_bits` (0 = least significant) into
/// LUT address groups, each sorted ascending.
///
/// Without shuffling the groups are consecutive runs. With shuffling, the
/// `B - B mod k` outer indices are dealt from both ends of each half so that
/// every group mixes large and small weights: for `B = 16, k = 4` group `j`
/// is `{j, 7-j, 8+j, 15-j}`, and for `k = 2` it is `{j, B-1-j}`. Leftover
/// middle indices form a final partial group.
pub fn shuffle_map(magnitude_bits: u32, scheme: GroupingScheme) -> Result<Vec<Vec<u32>>> {
    let k = scheme.group_width;
    if !matches!(k, 1 | 2 | 4) {
        return Err(Error::GroupWidth(k));
    }
    if magnitude_bits == 0 {
        return Err(Error::Config("no magnitude bits to group".into()));
    }
    let b = magnitude_bits;
    if !scheme.shuffle || k == 1 {
        let groups = (0..b)
            .step_by(k as usize)
            .map(|start| (start..(start + k).min(b)).collect())
            .collect();
        return Ok(groups);
    }

    let full = b / k;
    let dealt = full * k;
    let half = dealt / 2;
    let rest = b - dealt;
    let outer: Vec<u32> = (0..half).chain(half + rest..b).collect();

    let mut groups: Vec<Vec<u32>> = (0..full as usize)
        .map(|j| {
            let n = dealt as usize;
            let h = half as usize;
            let mut g = if k == 4 {
                vec![outer[j], outer[h - 1 - j], outer[h + j], outer[n - 1 - j]]
            } else {
                vec![outer[j], outer[n - 1 - j]]
            };
            g.sort_unstable();
            g
        })
        .collect();
    if rest > 0 {
        groups.push((half..half + rest).collect());
    }
    Ok(groups)
}

/// One ROM: the product of velocity factors for every combination of the
/// covered input bits. Address bit `i` selects `bit_indices[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VelocityLut {
    bit_indices: Vec<u32>,
    entry_fmt: QFormat,
    entries: Vec<Fx>,
}

impl VelocityLut {
    pub fn new(bit_indices: Vec<u32>, entries: Vec<Fx>) -> Result<Self> {
        let entry_fmt = entries
            .first()
            .map(Fx::fmt)
            .ok_or_else(|| Error::LutMismatch("LUT has no entries".into()))?;
        if !entry_fmt.is_unsigned_fraction() {
            return Err(Error::RequiresUnsignedFraction(entry_fmt));
        }
        if entries.len() != 1usize << bit_indices.len() {
            return Err(Error::LutMismatch(format!(
                "{} entries for {} address bits",
                entries.len(),
                bit_indices.len()
            )));
        }
        if let Some(e) = entries.iter().find(|e| e.fmt() != entry_fmt) {
            return Err(Error::FormatMismatch {
                expected: entry_fmt,
                found: e.fmt(),
            });
        }
        Ok(Self {
            bit_indices,
            entry_fmt,
            entries,
        })
    }

    pub fn bit_indices(&self) -> &[u32] {
        &self.bit_indices
    }

    pub fn entry_fmt(&self) -> QFormat {
        self.entry_fmt
    }

    pub fn entries(&self) -> &[Fx] {
        &self.entries
    }

    pub fn address_bits(&self) -> u32 {
        self.bit_indices.len() as u32
    }

    /// Gathers the covered bits of a magnitude code into a LUT address.
    pub fn address(&self, magnitude_code: u64) -> usize {
        self.bit_indices.iter().enumerate().fold(0, |addr, (i, &bit)| {
            addr | ((((magnitude_code >> bit) & 1) as usize) << i)
        })
    }

    pub fn entry(&self, addr: usize) -> Fx {
        self.entries[addr]
    }
}

fn bit_weight_exponent(bit: u32, input_fmt: QFormat) -> i32 {
    bit as i32 - input_fmt.frac_bits() as i32
}

/// Builds one LUT per address group of the input word.
///
/// The groups span the full input width: the top index carries weight
/// `2^int_bits`, which a saturated magnitude never sets. Address 0 (exact
/// 1.0) is stored as the all-ones code; the datapath bypasses it. Entries
/// are rounded to nearest-even and never stored as zero.
pub fn build_luts(input_fmt: QFormat, scheme: GroupingScheme, entry_fmt: QFormat) -> Result<Vec<VelocityLut>> {
    if !input_fmt.is_signed() {
        return Err(Error::RequiresSigned(input_fmt));
    }
    if !entry_fmt.is_unsigned_fraction() {
        return Err(Error::RequiresUnsignedFraction(entry_fmt));
    }
    shuffle_map(input_fmt.width(), scheme)?
        .into_iter()
        .map(|bits| {
            let factors: Vec<f64> = bits
                .iter()
                .map(|&b| velocity_factor(f64::from(bit_weight_exponent(b, input_fmt)).exp2()))
                .collect();
            let entries = (0..1usize << bits.len())
                .map(|addr| {
                    if addr == 0 {
                        return Fx::max(entry_fmt);
                    }
                    let product: f64 = factors
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| addr >> i & 1 == 1)
                        .map(|(_, f)| f)
                        .product();
                    let q = quantize(product, entry_fmt, RoundMode::NearestEven);
                    if q.is_zero() {
                        Fx::new(1, entry_fmt).expect("code 1 fits")
                    } else {
                        q
                    }
                })
                .collect();
            VelocityLut::new(bits, entries)
        })
        .collect()
}

fn hex_digits(fmt: QFormat) -> usize {
    fmt.width().div_ceil(4) as usize
}

/// ROM image: one zero-padded lowercase hex word per line, ascending address.
pub fn export_memh(lut: &VelocityLut) -> String {
    let digits = hex_digits(lut.entry_fmt);
    lut.entries.iter().fold(String::new(), |mut out, e| {
        let _ = writeln!(out, "{:0digits$x}", e.code());
        out
    })
}

/// Parses a ROM image written by [`export_memh`].
pub fn parse_memh(text: &str, entry_fmt: QFormat) -> Result<Vec<Fx>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let word = line.trim();
            let code = i64::from_str_radix(word, 16).map_err(|e| Error::Memh {
                line: n + 1,
                msg: format!("`{word}`: {e}"),
            })?;
            Fx::new(code, entry_fmt).map_err(|e| Error::Memh {
                line: n + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}

/// One line per LUT: `<index> <comma-separated bit indices> <entry format>`.
pub fn manifest(luts: &[VelocityLut]) -> String {
    luts.iter().enumerate().fold(String::new(), |mut out, (j, lut)| {
        let bits: Vec<String> = lut.bit_indices.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "{j} {} {}", bits.join(","), lut.entry_fmt);
        out
    })
}

pub const MANIFEST_FILE: &str = "manifest.txt";

pub fn memh_file_name(index: usize) -> String {
    format!("lut{index}.memh")
}

/// Writes `lut<j>.memh` for every LUT plus the manifest into `dir`.
pub fn write_rom_images(dir: &Path, luts: &[VelocityLut]) -> Result<Vec<PathBuf>> {
    let images: Vec<(PathBuf, String)> = luts
        .iter()
        .enumerate()
        .map(|(j, lut)| (dir.join(memh_file_name(j)), export_memh(lut)))
        .chain(std::iter::once((dir.join(MANIFEST_FILE), manifest(luts))))
        .collect();
    fs::create_dir_all(dir)?;
    for (path, text) in &images {
        fs::write(path, text)?;
    }
    Ok(images.into_iter().map(|(p, _)| p).collect())
}

/// Reads back a directory produced by [`write_rom_images`].
pub fn read_rom_images(dir: &Path) -> Result<Vec<VelocityLut>> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let bad = |msg: &str| Error::Memh {
                line: n + 1,
                msg: format!("{MANIFEST_FILE}: {msg}"),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [index, bits, fmt] = fields[..] else {
                return Err(bad("expected `<index> <bits> <format>`"));
            };
            let index: usize = index.parse().map_err(|_| bad("bad index"))?;
            let bits = bits
                .split(',')
                .map(|b| b.parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad("bad bit list"))?;
            let fmt: QFormat = fmt.parse()?;
            let image = fs::read_to_string(dir.join(memh_file_name(index)))?;
            VelocityLut::new(bits, parse_memh(&image, fmt)?)
        })
        .collect()
}
