//! Canonical-embedding encoder: real vectors to scaled ring elements and back.

use num_complex::Complex64;

use crate::context::CkksContext;
use crate::error::CkksError;
use crate::rns::RnsPoly;

/// An encoded message in transform form over `q_0..q_level`.
#[derive(Clone, Debug, PartialEq)]
pub struct Plaintext {
    pub(crate) poly: RnsPoly,
    pub(crate) level: usize,
    pub(crate) scale: f64,
}

impl Plaintext {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn poly(&self) -> &RnsPoly {
        &self.poly
    }
}

fn bit_reverse_in_place(v: &mut [Complex64]) {
    let n = v.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            v.swap(i, j);
        }
    }
}

/// `v_j ← Σ_k v_k ζ^(k·5^j)` for `ζ = exp(πi/N)`.
pub(crate) fn special_fft(ctx: &CkksContext, v: &mut [Complex64]) {
    let size = v.len();
    let m = 2 * ctx.degree();
    bit_reverse_in_place(v);
    let mut len = 2;
    while len <= size {
        let lenh = len >> 1;
        let lenq = len << 2;
        let gap = m / lenq;
        for i in (0..size).step_by(len) {
            for j in 0..lenh {
                let idx = (ctx.rot_group[j] % lenq) * gap;
                let u = v[i + j];
                let w = v[i + j + lenh] * ctx.ksi_pows[idx];
                v[i + j] = u + w;
                v[i + j + lenh] = u - w;
            }
        }
        len <<= 1;
    }
}

pub(crate) fn special_fft_inv(ctx: &CkksContext, v: &mut [Complex64]) {
    let size = v.len();
    let m = 2 * ctx.degree();
    let mut len = size;
    while len >= 2 {
        let lenh = len >> 1;
        let lenq = len << 2;
        let gap = m / lenq;
        for i in (0..size).step_by(len) {
            for j in 0..lenh {
                let idx = (lenq - ctx.rot_group[j] % lenq) * gap;
                let u = v[i + j] + v[i + j + lenh];
                let w = (v[i + j] - v[i + j + lenh]) * ctx.ksi_pows[idx];
                v[i + j] = u;
                v[i + j + lenh] = w;
            }
        }
        len >>= 1;
    }
    bit_reverse_in_place(v);
    let s = size as f64;
    for x in v.iter_mut() {
        *x /= s;
    }
}

fn check_level(ctx: &CkksContext, level: usize) -> Result<(), CkksError> {
    if level > ctx.max_level() {
        Err(CkksError::InvalidLevel(level))
    } else {
        Ok(())
    }
}

fn from_coefficients(
    ctx: &CkksContext,
    coeffs: &[f64],
    scale: f64,
    level: usize,
) -> Result<Plaintext, CkksError> {
    let bound = ctx.primes()[0] as f64 / 2.0;
    let magnitude = coeffs.iter().fold(scale, |a, &c| a.max(c.abs()));
    if magnitude >= bound {
        return Err(CkksError::ScaleTooLarge { magnitude, bound });
    }
    let ints: Vec<i64> = coeffs.iter().map(|&c| c as i64).collect();
    let poly = ctx.poly_from_signed(&ints, &ctx.basis(level, false));
    Ok(Plaintext { poly, level, scale })
}

/// Encodes up to `slots` reals at `scale` (a power of two) on the top level.
pub fn encode(ctx: &CkksContext, values: &[f64], scale: f64) -> Result<Plaintext, CkksError> {
    encode_at(ctx, values, scale, ctx.max_level())
}

pub fn encode_at(ctx: &CkksContext, values: &[f64], scale: f64, level: usize) -> Result<Plaintext, CkksError> {
    let exp = scale.log2();
    if !(scale.is_finite() && scale >= 1.0 && exp == exp.round()) {
        return Err(CkksError::InvalidScale(scale));
    }
    encode_with_scale(ctx, values, scale, level)
}

/// Like [`encode_at`] but accepts any positive finite scale.
pub fn encode_with_scale(
    ctx: &CkksContext,
    values: &[f64],
    scale: f64,
    level: usize,
) -> Result<Plaintext, CkksError> {
    check_level(ctx, level)?;
    let slots = ctx.slots();
    if values.len() > slots {
        return Err(CkksError::TooManyValues { len: values.len(), slots });
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(CkksError::InvalidScale(scale));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CkksError::NonFinite);
    }
    let mut z = vec![Complex64::new(0.0, 0.0); slots];
    for (d, &v) in z.iter_mut().zip(values) {
        d.re = v;
    }
    special_fft_inv(ctx, &mut z);
    let n = ctx.degree();
    let mut coeffs = vec![0f64; n];
    for (i, c) in z.iter().enumerate() {
        coeffs[i] = (c.re * scale).round();
        coeffs[i + slots] = (c.im * scale).round();
    }
    from_coefficients(ctx, &coeffs, scale, level)
}

/// The constant `value` in every slot: `round(value·scale)` in the constant coefficient.
pub fn encode_constant(ctx: &CkksContext, value: f64, scale: f64, level: usize) -> Result<Plaintext, CkksError> {
    check_level(ctx, level)?;
    if !(scale.is_finite() && scale > 0.0) {
        return Err(CkksError::InvalidScale(scale));
    }
    if !value.is_finite() {
        return Err(CkksError::NonFinite);
    }
    let mut coeffs = vec![0f64; ctx.degree()];
    coeffs[0] = (value * scale).round();
    from_coefficients(ctx, &coeffs, scale, level)
}

/// Decodes the real parts of all slots.
pub fn decode(ctx: &CkksContext, pt: &Plaintext) -> Vec<f64> {
    let basis = ctx.basis(pt.level, false);
    let coeff = ctx.to_coeff(&pt.poly, &basis);
    let lifted = ctx.lift_centered(&coeff, pt.level);
    let slots = ctx.slots();
    let mut z: Vec<Complex64> = (0..slots)
        .map(|i| Complex64::new(lifted[i] / pt.scale, lifted[i + slots] / pt.scale))
        .collect();
    special_fft(ctx, &mut z);
    z.into_iter().map(|c| c.re).collect()
}
