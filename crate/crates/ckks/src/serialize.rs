//! Length-prefixed little-endian binary encoding.
//!
//! Every object starts with a version byte, a kind byte and the 32-byte
//! parameter digest, so bytes from one context are refused by another.

use std::collections::BTreeMap;

use crate::context::CkksContext;
use crate::encoding::Plaintext;
use crate::encryptor::Ciphertext;
use crate::error::CkksError;
use crate::keys::{EvaluationKeys, GaloisKeys, KeySwitchKey, PublicKey, RelinKey, SecretKey};
use crate::rns::RnsPoly;

pub const FORMAT_VERSION: u8 = 1;

#[repr(u8)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Ciphertext = 1,
    Plaintext = 2,
    PublicKey = 3,
    SecretKey = 4,
    EvaluationKeys = 5,
    CiphertextList = 6,
}

struct Writer(Vec<u8>);

impl Writer {
    fn new(ctx: &CkksContext, kind: Kind) -> Self {
        let mut w = Writer(Vec::new());
        w.0.push(FORMAT_VERSION);
        w.0.push(kind as u8);
        w.0.extend_from_slice(&ctx.params_digest());
        w
    }

    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn poly(&mut self, p: &RnsPoly) {
        self.u32(p.count() as u32);
        self.u32(p.degree() as u32);
        for &x in p.data() {
            self.u64(x);
        }
    }

    fn ksk(&mut self, k: &KeySwitchKey) {
        self.u32(k.digits.len() as u32);
        for (b, a) in &k.digits {
            self.poly(b);
            self.poly(a);
        }
    }

    fn ciphertext(&mut self, ct: &Ciphertext) {
        self.u32(ct.level as u32);
        self.u64(ct.scale.to_bits());
        self.u32(ct.parts.len() as u32);
        for p in &ct.parts {
            self.poly(p);
        }
    }
}

struct Reader<'b> {
    buf: &'b [u8],
    pos: usize,
    degree: usize,
}

fn bad(msg: impl Into<String>) -> CkksError {
    CkksError::Deserialize(msg.into())
}

impl<'b> Reader<'b> {
    fn new(ctx: &CkksContext, buf: &'b [u8], kind: Kind) -> Result<Self, CkksError> {
        if buf.len() < 34 {
            return Err(bad("truncated header"));
        }
        if buf[0] != FORMAT_VERSION {
            return Err(bad(format!("unsupported version {}", buf[0])));
        }
        if buf[1] != kind as u8 {
            return Err(bad(format!("expected kind {}, found {}", kind as u8, buf[1])));
        }
        if buf[2..34] != ctx.params_digest() {
            return Err(CkksError::ParamsMismatch);
        }
        Ok(Self { buf, pos: 34, degree: ctx.degree() })
    }

    fn take(&mut self, n: usize) -> Result<&'b [u8], CkksError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| bad("truncated body"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CkksError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CkksError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn poly(&mut self, expect_count: usize) -> Result<RnsPoly, CkksError> {
        let count = self.u32()? as usize;
        let degree = self.u32()? as usize;
        if degree != self.degree || count != expect_count {
            return Err(bad(format!("polynomial shape {count}x{degree}")));
        }
        let bytes = self.take(count * degree * 8)?;
        let data = bytes.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(RnsPoly::from_components(degree, data).unwrap())
    }

    fn ksk(&mut self, ctx: &CkksContext) -> Result<KeySwitchKey, CkksError> {
        let n = self.u32()? as usize;
        if n != ctx.max_level() + 1 {
            return Err(bad("digit count"));
        }
        let k = ctx.key_basis().len();
        let digits = (0..n).map(|_| Ok((self.poly(k)?, self.poly(k)?))).collect::<Result<_, CkksError>>()?;
        Ok(KeySwitchKey { digits })
    }

    fn ciphertext(&mut self, ctx: &CkksContext) -> Result<Ciphertext, CkksError> {
        let level = self.u32()? as usize;
        if level > ctx.max_level() {
            return Err(CkksError::InvalidLevel(level));
        }
        let scale = f64::from_bits(self.u64()?);
        if !(scale.is_finite() && scale > 0.0) {
            return Err(bad("scale"));
        }
        let parts = self.u32()? as usize;
        if parts != 2 {
            return Err(CkksError::PartCount(parts));
        }
        let parts = (0..parts).map(|_| self.poly(level + 1)).collect::<Result<_, _>>()?;
        Ok(Ciphertext { parts, level, scale })
    }

    fn finish(self) -> Result<(), CkksError> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(bad("trailing bytes"))
        }
    }
}

pub fn serialize_ciphertext(ctx: &CkksContext, ct: &Ciphertext) -> Vec<u8> {
    let mut w = Writer::new(ctx, Kind::Ciphertext);
    w.ciphertext(ct);
    w.0
}

pub fn deserialize_ciphertext(ctx: &CkksContext, bytes: &[u8]) -> Result<Ciphertext, CkksError> {
    let mut r = Reader::new(ctx, bytes, Kind::Ciphertext)?;
    let ct = r.ciphertext(ctx)?;
    r.finish()?;
    Ok(ct)
}

pub fn serialize_ciphertexts(ctx: &CkksContext, cts: &[Ciphertext]) -> Vec<u8> {
    let mut w = Writer::new(ctx, Kind::CiphertextList);
    w.u64(cts.len() as u64);
    for ct in cts {
        w.ciphertext(ct);
    }
    w.0
}

pub fn deserialize_ciphertexts(ctx: &CkksContext, bytes: &[u8]) -> Result<Vec<Ciphertext>, CkksError> {
    let mut r = Reader::new(ctx, bytes, Kind::CiphertextList)?;
    let n = r.u64()? as usize;
    if n > bytes.len() {
        return Err(bad("list length"));
    }
    let cts = (0..n).map(|_| r.ciphertext(ctx)).collect::<Result<_, _>>()?;
    r.finish()?;
    Ok(cts)
}

pub fn serialize_plaintext(ctx: &CkksContext, pt: &Plaintext) -> Vec<u8> {
    let mut w = Writer::new(ctx, Kind::Plaintext);
    w.u32(pt.level as u32);
    w.u64(pt.scale.to_bits());
    w.poly(&pt.poly);
    w.0
}

pub fn deserialize_plaintext(ctx: &CkksContext, bytes: &[u8]) -> Result<Plaintext, CkksError> {
    let mut r = Reader::new(ctx, bytes, Kind::Plaintext)?;
    let level = r.u32()? as usize;
    if level > ctx.max_level() {
        return Err(CkksError::InvalidLevel(level));
    }
    let scale = f64::from_bits(r.u64()?);
    let poly = r.poly(level + 1)?;
    r.finish()?;
    Ok(Plaintext { poly, level, scale })
}

pub fn serialize_public_key(ctx: &CkksContext, pk: &PublicKey) -> Vec<u8> {
    let mut w = Writer::new(ctx, Kind::PublicKey);
    w.poly(&pk.b);
    w.poly(&pk.a);
    w.0
}

pub fn deserialize_public_key(ctx: &CkksContext, bytes: &[u8]) -> Result<PublicKey, CkksError> {
    let mut r = Reader::new(ctx, bytes, Kind::PublicKey)?;
    let k = ctx.key_basis().len();
    let pk = PublicKey { b: r.poly(k)?, a: r.poly(k)? };
    r.finish()?;
    Ok(pk)
}

pub fn serialize_secret_key(ctx: &CkksContext, sk: &SecretKey) -> Vec<u8> {
    let mut w = Writer::new(ctx, Kind::SecretKey);
    w.poly(&sk.poly);
    w.0
}

pub fn deserialize_secret_key(ctx: &CkksContext, bytes: &[u8]) -> Result<SecretKey, CkksError> {
    let mut r = Reader::new(ctx, bytes, Kind::SecretKey)?;
    let sk = SecretKey { poly: r.poly(ctx.key_basis().len())? };
    r.finish()?;
    Ok(sk)
}

pub fn serialize_evaluation_keys(ctx: &CkksContext, keys: &EvaluationKeys) -> Vec<u8> {
    let mut w = Writer::new(ctx, Kind::EvaluationKeys);
    w.poly(&keys.public.b);
    w.poly(&keys.public.a);
    w.ksk(&keys.relin.0);
    w.u32(keys.galois.keys.len() as u32);
    for (&g, k) in &keys.galois.keys {
        w.u64(g);
        w.ksk(k);
    }
    w.0
}

pub fn deserialize_evaluation_keys(ctx: &CkksContext, bytes: &[u8]) -> Result<EvaluationKeys, CkksError> {
    let mut r = Reader::new(ctx, bytes, Kind::EvaluationKeys)?;
    let k = ctx.key_basis().len();
    let public = PublicKey { b: r.poly(k)?, a: r.poly(k)? };
    let relin = RelinKey(r.ksk(ctx)?);
    let n = r.u32()? as usize;
    let mut keys = BTreeMap::new();
    for _ in 0..n {
        let g = r.u64()?;
        keys.insert(g, r.ksk(ctx)?);
    }
    r.finish()?;
    Ok(EvaluationKeys { public, relin, galois: GaloisKeys { keys } })
}
