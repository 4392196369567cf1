use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest representable code at `bits`: the range is symmetric, so the
/// most negative code `-2^(bits-1)` is never produced.
pub const fn code_max(bits: u8) -> i32 {
    (1 << (bits - 1)) - 1
}

/// Per-tensor symmetric integer codes with one shared scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedTensor {
    pub values: Vec<i8>,
    pub scale: f64,
    pub bits: u8,
}

/// Fixed-point replacement for a float rescale: `value * multiplier >> shift`.
///
/// `multiplier` always fits 31 bits, so `i32 * multiplier` stays inside i64.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequantParams {
    pub multiplier: u32,
    pub shift: u8,
}

fn check_bits(bits: u8) -> Result<()> {
    if bits == 4 || bits == 8 {
        Ok(())
    } else {
        Err(Error::UnsupportedBits(bits))
    }
}

/// Symmetric max-abs quantization: `scale = max|x| / code_max`, codes are
/// `round(x/scale)` with halves away from zero, clipped to the symmetric
/// range. An all-zero tensor gets scale 1.
pub fn quantize(data: &[f32], bits: u8) -> Result<QuantizedTensor> {
    check_bits(bits)?;
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "quantize input" });
    }
    let qmax = code_max(bits);
    let max_abs = data.iter().fold(0.0f32, |m, v| m.max(v.abs()));
    let scale = if max_abs == 0.0 { 1.0 } else { max_abs as f64 / qmax as f64 };
    let values = data
        .iter()
        .map(|&v| (v as f64 / scale).round().clamp(-qmax as f64, qmax as f64) as i8)
        .collect();
    Ok(QuantizedTensor { values, scale, bits })
}

/// Maps codes back to floats: `value * scale`.
pub fn dequantize(q: &QuantizedTensor) -> Vec<f32> {
    q.values.iter().map(|&v| (v as f64 * q.scale) as f32).collect()
}

impl QuantizedTensor {
    pub fn dequantize(&self) -> Vec<f32> {
        dequantize(self)
    }
}

/// Derives the fixed-point factors realizing `s_in * s_w / s_out`.
///
/// The shift is the largest one for which the rounded multiplier still fits
/// 31 bits, which keeps the relative error of the approximation below 2^-30.
pub fn derive_requant(s_in: f64, s_w: f64, s_out: f64) -> Result<RequantParams> {
    let ratio = s_in * s_w / s_out;
    if !ratio.is_finite() || ratio <= 0.0 {
        return Err(Error::RequantRange(ratio));
    }
    // Normalize ratio = m * 2^e with m in [0.5, 1); halving/doubling is exact.
    let mut m = ratio;
    let mut e = 0i32;
    while m >= 1.0 {
        m /= 2.0;
        e += 1;
    }
    while m < 0.5 {
        m *= 2.0;
        e -= 1;
    }
    let mut shift = 31 - e;
    let mut multiplier = (m * (1u64 << 31) as f64).round() as u64;
    if multiplier == 1 << 31 {
        // m rounded up to 1.0; ratio is an exact power of two away.
        multiplier = 1 << 30;
        shift -= 1;
    }
    if shift < 0 {
        return Err(Error::RequantOverflow(ratio));
    }
    if shift > 62 {
        return Err(Error::RequantRange(ratio));
    }
    Ok(RequantParams { multiplier: multiplier as u32, shift: shift as u8 })
}

/// Applies the fixed-point rescale to an accumulator, rounding halves away
/// from zero. The result is still unclipped.
pub fn requantize(acc: i32, p: &RequantParams) -> i64 {
    let prod = acc as i64 * p.multiplier as i64;
    if p.shift == 0 {
        return prod;
    }
    let half = 1i64 << (p.shift - 1);
    if prod >= 0 {
        (prod + half) >> p.shift
    } else {
        -((-prod + half) >> p.shift)
    }
}

/// Saturates a requantized value to the symmetric code range.
pub fn clip_to_bits(v: i64, bits: u8) -> i8 {
    let qmax = code_max(bits) as i64;
    v.clamp(-qmax, qmax) as i8
}
