//! Homomorphic operations. Nothing here takes a secret key.

use crate::context::CkksContext;
use crate::encoding::{encode_constant, Plaintext};
use crate::encryptor::Ciphertext;
use crate::error::CkksError;
use crate::keys::{GaloisKeys, RelinKey};

/// Relative difference below which two scales count as equal.
pub const SCALE_TOLERANCE: f64 = 1e-6;

fn scales_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= SCALE_TOLERANCE * a.abs().max(b.abs())
}

#[derive(Clone, Copy)]
pub struct Evaluator<'a> {
    ctx: &'a CkksContext,
}

impl<'a> Evaluator<'a> {
    pub fn new(ctx: &'a CkksContext) -> Self {
        Self { ctx }
    }

    pub fn context(&self) -> &'a CkksContext {
        self.ctx
    }

    fn check(&self, ct: &Ciphertext) -> Result<(), CkksError> {
        if ct.parts.len() != 2 {
            return Err(CkksError::PartCount(ct.parts.len()));
        }
        if ct.level > self.ctx.max_level() {
            return Err(CkksError::InvalidLevel(ct.level));
        }
        Ok(())
    }

    /// Drops primes above `level` without changing the scale.
    pub fn mod_switch_to(&self, ct: &Ciphertext, level: usize) -> Result<Ciphertext, CkksError> {
        if level > ct.level {
            return Err(CkksError::InvalidLevel(level));
        }
        let mut out = ct.clone();
        for p in &mut out.parts {
            p.truncate(level + 1);
        }
        out.level = level;
        Ok(out)
    }

    fn plain_at(&self, pt: &Plaintext, level: usize) -> Result<Plaintext, CkksError> {
        if pt.level < level {
            return Err(CkksError::InvalidLevel(pt.level));
        }
        let mut p = pt.clone();
        p.poly.truncate(level + 1);
        p.level = level;
        Ok(p)
    }

    /// Brings `hi` (the operand on the higher level) to `lo`'s level and scale.
    /// A scale mismatch is absorbed by multiplying with an encoded one at the
    /// scale that makes the following rescale land on `lo`'s scale.
    fn lower_onto(&self, hi: &Ciphertext, lo_level: usize, lo_scale: f64) -> Result<Ciphertext, CkksError> {
        if scales_match(hi.scale, lo_scale) {
            return self.mod_switch_to(hi, lo_level);
        }
        let q = self.ctx.primes()[hi.level] as f64;
        let t = (lo_scale * q / hi.scale).round();
        if t < 2.0 {
            return Err(CkksError::ScaleMismatch(hi.scale, lo_scale));
        }
        let one = encode_constant(self.ctx, 1.0, t, hi.level)?;
        let adjusted = self.rescale(&self.mul_plain(hi, &one)?)?;
        self.mod_switch_to(&adjusted, lo_level)
    }

    fn align(&self, a: &Ciphertext, b: &Ciphertext) -> Result<(Ciphertext, Ciphertext), CkksError> {
        self.check(a)?;
        self.check(b)?;
        let (a, b) = if a.level > b.level {
            (self.lower_onto(a, b.level, b.scale)?, b.clone())
        } else if b.level > a.level {
            (a.clone(), self.lower_onto(b, a.level, a.scale)?)
        } else {
            (a.clone(), b.clone())
        };
        if !scales_match(a.scale, b.scale) {
            return Err(CkksError::ScaleMismatch(a.scale, b.scale));
        }
        Ok((a, b))
    }

    pub fn add_ct(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, CkksError> {
        let (mut a, b) = self.align(a, b)?;
        let basis = self.ctx.basis(a.level, false);
        for (x, y) in a.parts.iter_mut().zip(&b.parts) {
            self.ctx.add_assign(x, y, &basis);
        }
        Ok(a)
    }

    pub fn sub_ct(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, CkksError> {
        let (mut a, b) = self.align(a, b)?;
        let basis = self.ctx.basis(a.level, false);
        for (x, y) in a.parts.iter_mut().zip(&b.parts) {
            self.ctx.sub_assign(x, y, &basis);
        }
        Ok(a)
    }

    pub fn negate(&self, a: &Ciphertext) -> Result<Ciphertext, CkksError> {
        self.check(a)?;
        let mut out = a.clone();
        let basis = self.ctx.basis(a.level, false);
        for p in &mut out.parts {
            self.ctx.neg_assign(p, &basis);
        }
        Ok(out)
    }

    /// Adds a plaintext of matching scale; the plaintext is dropped to the ciphertext's level.
    pub fn add_plain(&self, a: &Ciphertext, pt: &Plaintext) -> Result<Ciphertext, CkksError> {
        self.check(a)?;
        if !scales_match(a.scale, pt.scale) {
            return Err(CkksError::ScaleMismatch(a.scale, pt.scale));
        }
        let (mut out, pt) = if pt.level >= a.level {
            (a.clone(), self.plain_at(pt, a.level)?)
        } else {
            (self.mod_switch_to(a, pt.level)?, pt.clone())
        };
        self.ctx.add_assign(&mut out.parts[0], &pt.poly, &self.ctx.basis(out.level, false));
        Ok(out)
    }

    fn check_product(&self, level: usize, scale: f64) -> Result<(), CkksError> {
        if level == 0 {
            return Err(CkksError::LevelExhausted);
        }
        let log_q: f64 = self.ctx.primes()[..=level].iter().map(|&q| (q as f64).log2()).sum();
        if scale.log2() >= log_q - 1.0 {
            return Err(CkksError::ScaleTooLarge { magnitude: scale, bound: 2f64.powf(log_q - 1.0) });
        }
        Ok(())
    }

    pub fn mul_plain(&self, a: &Ciphertext, pt: &Plaintext) -> Result<Ciphertext, CkksError> {
        self.check(a)?;
        let (a, pt) = if pt.level >= a.level {
            (a.clone(), self.plain_at(pt, a.level)?)
        } else {
            (self.mod_switch_to(a, pt.level)?, pt.clone())
        };
        let scale = a.scale * pt.scale;
        self.check_product(a.level, scale)?;
        let basis = self.ctx.basis(a.level, false);
        let parts = a.parts.iter().map(|p| self.ctx.mul(p, &pt.poly, &basis)).collect();
        Ok(Ciphertext { parts, level: a.level, scale })
    }

    /// Multiplies every slot by `value`, encoded at `scale`.
    pub fn mul_const(&self, a: &Ciphertext, value: f64, scale: f64) -> Result<Ciphertext, CkksError> {
        let pt = encode_constant(self.ctx, value, scale, a.level)?;
        self.mul_plain(a, &pt)
    }

    /// Tensor product followed by relinearization; the scale is the product of scales.
    pub fn mul_ct(&self, a: &Ciphertext, b: &Ciphertext, relin: &RelinKey) -> Result<Ciphertext, CkksError> {
        self.check(a)?;
        self.check(b)?;
        let level = a.level.min(b.level);
        let a = self.mod_switch_to(a, level)?;
        let b = self.mod_switch_to(b, level)?;
        let scale = a.scale * b.scale;
        self.check_product(level, scale)?;
        let ctx = self.ctx;
        let basis = ctx.basis(level, false);
        let mut d0 = ctx.mul(&a.parts[0], &b.parts[0], &basis);
        let mut d1 = ctx.mul(&a.parts[0], &b.parts[1], &basis);
        ctx.mul_add_assign(&mut d1, &a.parts[1], &b.parts[0], &basis);
        let d2 = ctx.mul(&a.parts[1], &b.parts[1], &basis);
        let (k0, k1) = ctx.key_switch(&d2, level, &relin.0);
        ctx.add_assign(&mut d0, &k0, &basis);
        ctx.add_assign(&mut d1, &k1, &basis);
        Ok(Ciphertext { parts: vec![d0, d1], level, scale })
    }

    pub fn square(&self, a: &Ciphertext, relin: &RelinKey) -> Result<Ciphertext, CkksError> {
        self.mul_ct(a, a, relin)
    }

    /// Divides by the top prime of the current level.
    pub fn rescale(&self, a: &Ciphertext) -> Result<Ciphertext, CkksError> {
        self.check(a)?;
        if a.level == 0 {
            return Err(CkksError::LevelExhausted);
        }
        let q = self.ctx.primes()[a.level] as f64;
        let parts = a.parts.iter().map(|p| self.ctx.rescale_poly(p, a.level)).collect();
        Ok(Ciphertext { parts, level: a.level - 1, scale: a.scale / q })
    }

    fn rotate_by_element(&self, a: &Ciphertext, g: u64, keys: &GaloisKeys) -> Result<Ciphertext, CkksError> {
        let key = keys.keys.get(&g).ok_or(CkksError::MissingGaloisKey(g))?;
        let ctx = self.ctx;
        let mut c0 = ctx.apply_galois(&a.parts[0], g)?;
        let c1 = ctx.apply_galois(&a.parts[1], g)?;
        let (k0, k1) = ctx.key_switch(&c1, a.level, key);
        ctx.add_assign(&mut c0, &k0, &ctx.basis(a.level, false));
        Ok(Ciphertext { parts: vec![c0, k1], level: a.level, scale: a.scale })
    }

    /// Cyclic left rotation: slot `i` receives slot `i + k`.
    pub fn rotate(&self, a: &Ciphertext, k: i64, keys: &GaloisKeys) -> Result<Ciphertext, CkksError> {
        self.check(a)?;
        let slots = self.ctx.slots() as i64;
        let mut k = k.rem_euclid(slots) as u64;
        let mut out = a.clone();
        let mut step = 1u64;
        while k > 0 {
            if k & 1 == 1 {
                out = self.rotate_by_element(&out, self.ctx.galois_element(step as i64), keys)?;
            }
            k >>= 1;
            step <<= 1;
        }
        Ok(out)
    }

    /// Slot 0 receives the sum of slots `0..n`, assuming slots `n..n.next_power_of_two()` are zero.
    pub fn sum_slots(&self, a: &Ciphertext, n: usize, keys: &GaloisKeys) -> Result<Ciphertext, CkksError> {
        self.check(a)?;
        if n == 0 || n > self.ctx.slots() {
            return Err(CkksError::TooManyValues { len: n, slots: self.ctx.slots() });
        }
        let span = n.next_power_of_two();
        let mut acc = a.clone();
        let mut step = 1;
        while step < span {
            let r = self.rotate(&acc, step as i64, keys)?;
            acc = self.add_ct(&acc, &r)?;
            step <<= 1;
        }
        Ok(acc)
    }

    /// Inner product of the first `n` slots, landing in slot 0 one level down.
    pub fn dot_product(
        &self,
        a: &Ciphertext,
        b: &Ciphertext,
        n: usize,
        relin: &RelinKey,
        galois: &GaloisKeys,
    ) -> Result<Ciphertext, CkksError> {
        let prod = self.mul_ct(a, b, relin)?;
        let summed = self.sum_slots(&prod, n, galois)?;
        self.rescale(&summed)
    }
}
