//! Q-format export of trained weights and an integer-only reference inference.
//!
//! File layout mirrors the float format with header `ANNQ1 5 <H> 4 <frac_bits>`
//! and signed 16-bit integers (`round(weight · 2^frac_bits)`).

use thiserror::Error;

use super::network::{Network, N_IN, N_OUT};
use super::weights::{assemble, content_lines, parse_body, parse_header};
use super::{AnnError, Classification, Decision};
use crate::sensor::ObstacleBits;
use crate::Scalar;

pub const FIXED_MAGIC: &str = "ANNQ1";

/// Tanh table resolution: 2^LUT_SHIFT entries per unit of pre-activation.
const LUT_SHIFT: u32 = 6;
/// Tanh table covers pre-activations in `[0, LUT_SPAN]` and saturates beyond.
const LUT_SPAN: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum FixedError {
    #[error("frac_bits must be in 1..=14, got {0}")]
    FracBits(u32),
    #[error("weight {value} (parameter {index}) overflows Q{int_bits}.{frac_bits}")]
    Overflow { index: usize, value: f64, int_bits: u32, frac_bits: u32 },
    #[error(transparent)]
    Format(#[from] AnnError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedNetwork {
    frac_bits: u32,
    w: Vec<[i16; N_IN]>,
    bw: Vec<i16>,
    u: Vec<[i16; N_OUT]>,
    bu: [i16; N_OUT],
}

fn check_frac_bits(frac_bits: u32) -> Result<(), FixedError> {
    if (1..=14).contains(&frac_bits) {
        Ok(())
    } else {
        Err(FixedError::FracBits(frac_bits))
    }
}

impl FixedNetwork {
    /// Rounds every weight to the nearest multiple of `2^-frac_bits`.
    pub fn quantize<T: Scalar>(net: &Network<T>, frac_bits: u32) -> Result<Self, FixedError> {
        check_frac_bits(frac_bits)?;
        let scale = (1u32 << frac_bits) as f64;
        let limit = (1u32 << (15 - frac_bits)) as f64;
        let q = net
            .params()
            .enumerate()
            .map(|(index, v)| {
                let v = v.to_f64_lossy();
                let r = (v * scale).round();
                if v.abs() >= limit || r < i16::MIN as f64 || r > i16::MAX as f64 {
                    return Err(FixedError::Overflow { index, value: v, int_bits: 15 - frac_bits, frac_bits });
                }
                Ok(r as i16)
            })
            .collect::<Result<Vec<_>, _>>()?;

        let h = net.hidden();
        let mut rows = Vec::new();
        let mut rest = q.as_slice();
        for width in super::weights::row_widths(h) {
            let (row, tail) = rest.split_at(width);
            rows.push(row.to_vec());
            rest = tail;
        }
        let (w, bw, u, bu) = assemble(rows, h);
        Ok(Self { frac_bits, w, bw, u, bu })
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn hidden(&self) -> usize {
        self.w.len()
    }

    pub fn params(&self) -> impl Iterator<Item = i16> + '_ {
        self.w.iter().flatten().chain(&self.bw).chain(self.u.iter().flatten()).chain(&self.bu).copied()
    }

    /// Real value represented by each stored integer, in parameter order.
    pub fn dequantized(&self) -> Vec<f64> {
        let scale = (1u32 << self.frac_bits) as f64;
        self.params().map(|q| q as f64 / scale).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{FIXED_MAGIC} {N_IN} {} {N_OUT} {}\n", self.hidden(), self.frac_bits);
        let mut push = |row: &[i16]| {
            let cells: Vec<String> = row.iter().map(i16::to_string).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        };
        self.w.iter().for_each(|r| push(r));
        push(&self.bw);
        self.u.iter().for_each(|r| push(r));
        push(&self.bu);
        out
    }

    pub fn parse(text: &str) -> Result<Self, FixedError> {
        let mut lines = content_lines(text);
        let (line, tokens) = lines.next().ok_or(AnnError::Parse { line: 1, msg: "empty fixed-point file".into() })?;
        let (hidden, extra) = parse_header(line, &tokens, FIXED_MAGIC, 1)?;
        let frac_bits: u32 =
            extra[0].parse().map_err(|_| AnnError::Parse { line, msg: format!("bad frac_bits `{}`", extra[0]) })?;
        check_frac_bits(frac_bits)?;
        let rows = parse_body(&mut lines, hidden, |t| t.parse::<i16>().ok())?;
        let (w, bw, u, bu) = assemble(rows, hidden);
        Ok(Self { frac_bits, w, bw, u, bu })
    }
}

/// Integer-only inference tables for one `frac_bits` and activation threshold.
///
/// Built once (the floating point here runs at table-generation time, like a
/// firmware build step); [`FixedInference::classify`] itself only touches
/// integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedInference {
    frac_bits: u32,
    /// tanh(n / 2^LUT_SHIFT) in Q(frac_bits) for n in 0..=LUT_SPAN·2^LUT_SHIFT.
    tanh_lut: Vec<i32>,
    /// Output pre-activations in Q(2·frac_bits) at or above this clear the threshold.
    cutoff: i64,
}

impl FixedInference {
    pub fn new(frac_bits: u32, activation_threshold: f64) -> Result<Self, FixedError> {
        check_frac_bits(frac_bits)?;
        let one = (1u64 << frac_bits) as f64;
        let steps = (1usize << LUT_SHIFT) as f64;
        let tanh_lut = (0..=LUT_SPAN << LUT_SHIFT).map(|n| ((n as f64 / steps).tanh() * one).round() as i32).collect();
        // tanh is monotone, so out >= threshold  <=>  z >= atanh(threshold).
        let cutoff = (activation_threshold.atanh() * one * one).ceil() as i64;
        Ok(Self { frac_bits, tanh_lut, cutoff })
    }

    /// tanh of a Q(frac_bits) value, by table lookup with linear interpolation.
    pub fn tanh_q(&self, z: i32) -> i32 {
        let f = self.frac_bits;
        let scaled = (z.unsigned_abs() as u64) << LUT_SHIFT;
        let idx = (scaled >> f) as usize;
        let last = self.tanh_lut.len() - 1;
        let mag = if idx >= last {
            self.tanh_lut[last]
        } else {
            let rem = (scaled & ((1u64 << f) - 1)) as i64;
            let lo = self.tanh_lut[idx] as i64;
            let hi = self.tanh_lut[idx + 1] as i64;
            (lo + (((hi - lo) * rem + (1i64 << (f - 1))) >> f)) as i32
        };
        if z < 0 {
            -mag
        } else {
            mag
        }
    }

    /// Output pre-activations in Q(2·frac_bits).
    pub fn output_preactivations(&self, net: &FixedNetwork, bits: ObstacleBits) -> [i64; N_OUT] {
        assert_eq!(net.frac_bits, self.frac_bits, "inference tables built for a different Q format");
        let mut z = net.bu.map(|b| (b as i64) << self.frac_bits);
        for ((row, bw), urow) in net.w.iter().zip(&net.bw).zip(&net.u) {
            let pre = row.iter().zip(bits.0).filter(|(_, on)| *on).fold(*bw as i32, |acc, (w, _)| acc + *w as i32);
            let h = self.tanh_q(pre) as i64;
            for (zk, u) in z.iter_mut().zip(urow) {
                *zk += h * *u as i64;
            }
        }
        z
    }

    pub fn classify(&self, net: &FixedNetwork, bits: ObstacleBits) -> Classification {
        let z = self.output_preactivations(net, bits);
        let mut hot = (0..N_OUT).filter(|k| z[*k] >= self.cutoff);
        match (hot.next(), hot.next()) {
            (Some(k), None) => Classification::Decided(Decision::ALL[k]),
            _ => Classification::Undecided,
        }
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn single(value: f64) -> Network<f64> {
        let mut net = Network::zeros(1);
        net.set_param(0, value);
        net
    }

    #[test]
    fn q_format_definition() {
        assert_eq!(FixedNetwork::quantize(&single(1.0), 12).unwrap().params().next(), Some(4096));
        assert_eq!(FixedNetwork::quantize(&single(-0.5), 12).unwrap().params().next(), Some(-2048));
    }

    #[test]
    fn overflow_and_frac_bits_errors() {
        assert!(matches!(
            FixedNetwork::quantize(&single(8.0), 12),
            Err(FixedError::Overflow { index: 0, int_bits: 3, .. })
        ));
        assert!(FixedNetwork::quantize(&single(7.99), 12).is_ok());
        // Rounds up to 2^15, one past i16::MAX.
        assert!(FixedNetwork::quantize(&single(7.99995), 12).is_err());
        assert_eq!(FixedNetwork::quantize(&single(0.0), 0), Err(FixedError::FracBits(0)));
        assert_eq!(FixedNetwork::quantize(&single(0.0), 15), Err(FixedError::FracBits(15)));
    }

    #[test]
    fn text_round_trip_and_header() {
        let fixed = FixedNetwork::quantize(&Network::<f64>::random(3, 2.0, 5), 10).unwrap();
        let text = fixed.to_text();
        assert!(text.starts_with("ANNQ1 5 3 4 10\n"));
        assert_eq!(FixedNetwork::parse(&text).unwrap(), fixed);
        assert!(FixedNetwork::parse("ANNQ1 5 3 4\n").is_err());
        assert!(FixedNetwork::parse(&text.replacen("10\n", "0\n", 1)).is_err());
        assert!(FixedNetwork::parse(&text.replace("ANNQ1 5 3 4 10\n", "ANNQ1 5 3 4 10\n40000 ")).is_err());
    }

    #[test]
    fn tanh_table_accuracy() {
        let inf = FixedInference::new(12, 0.8).unwrap();
        for z in (-40_000..40_000).step_by(37) {
            let exact = (z as f64 / 4096.0).tanh();
            let approx = inf.tanh_q(z) as f64 / 4096.0;
            assert!((exact - approx).abs() < 4e-4, "z={z}: {exact} vs {approx}");
        }
        assert_eq!(inf.tanh_q(0), 0);
        assert_eq!(inf.tanh_q(i32::MAX), 4096);
        assert_eq!(inf.tanh_q(-100_000), -4096);
    }

    #[test]
    fn zero_network_is_undecided() {
        let fixed = FixedNetwork::quantize(&Network::<f64>::zeros(4), 12).unwrap();
        let inf = FixedInference::new(12, 0.8).unwrap();
        assert!(ObstacleBits::all().all(|b| inf.classify(&fixed, b) == Classification::Undecided));
    }

    proptest! {
        #[test]
        fn quantization_error_within_half_lsb(h in 1usize..6, seed in any::<u64>(), frac in 1u32..=14) {
            let limit = (1u32 << (15 - frac)) as f64;
            let net = Network::<f64>::random(h, limit * 0.999, seed);
            let fixed = FixedNetwork::quantize(&net, frac).unwrap();
            let half_lsb = 0.5 / (1u32 << frac) as f64;
            for (orig, q) in net.params().zip(fixed.dequantized()) {
                prop_assert!((orig - q).abs() <= half_lsb);
            }
        }
    }
}
