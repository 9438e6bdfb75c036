//! Key generation. Switching keys use one RNS digit per chain prime and the
//! special prime `P`; they serve every level by ignoring the dropped primes.

use std::collections::BTreeMap;

use rand::{Rng, RngCore};

use crate::context::CkksContext;
use crate::error::CkksError;
use crate::ring::{sample_error, sample_sparse_ternary, sample_ternary};
use crate::rns::RnsPoly;

/// Ternary secret `s`, held in transform form over the full key basis.
pub struct SecretKey {
    pub(crate) poly: RnsPoly,
}

impl std::fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

/// `(b, a)` with `b = -a·s + e` over the key basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PublicKey {
    pub(crate) b: RnsPoly,
    pub(crate) a: RnsPoly,
}

/// Digits `(b_i, a_i)` with `b_i = -a_i·s + e_i + [i = j]·P·s'` in component `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct KeySwitchKey {
    pub(crate) digits: Vec<(RnsPoly, RnsPoly)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelinKey(pub(crate) KeySwitchKey);

/// Switching keys for `s(X^g) → s`, keyed by Galois element `g`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct GaloisKeys {
    pub(crate) keys: BTreeMap<u64, KeySwitchKey>,
}

impl GaloisKeys {
    pub fn elements(&self) -> impl Iterator<Item = u64> + '_ {
        self.keys.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// Everything a party without the secret needs to encrypt and evaluate.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationKeys {
    pub public: PublicKey,
    pub relin: RelinKey,
    pub galois: GaloisKeys,
}

#[derive(Debug)]
pub struct KeySet {
    pub secret: SecretKey,
    pub public: PublicKey,
    pub relin: RelinKey,
    pub galois: GaloisKeys,
}

impl KeySet {
    pub fn split(self) -> (SecretKey, EvaluationKeys) {
        (self.secret, EvaluationKeys { public: self.public, relin: self.relin, galois: self.galois })
    }
}

fn uniform_poly<R: RngCore + ?Sized>(ctx: &CkksContext, basis: &[usize], rng: &mut R) -> RnsPoly {
    let mut p = RnsPoly::zero(ctx.degree(), basis.len());
    for (c, &idx) in basis.iter().enumerate() {
        let q = ctx.primes()[idx];
        for x in p.component_mut(c) {
            *x = rng.random_range(0..q);
        }
    }
    p
}

pub(crate) fn error_poly<R: RngCore + ?Sized>(
    ctx: &CkksContext,
    basis: &[usize],
    rng: &mut R,
) -> Result<RnsPoly, CkksError> {
    let e = sample_error(ctx.params().degree_log2, ctx.params().error_stddev, rng)?;
    Ok(ctx.poly_from_signed(&e, basis))
}

fn switching_key<R: RngCore + ?Sized>(
    ctx: &CkksContext,
    s: &RnsPoly,
    s_new: &RnsPoly,
    rng: &mut R,
) -> Result<KeySwitchKey, CkksError> {
    let basis = ctx.key_basis();
    let p_mod = ctx.special_mod();
    let mut digits = Vec::with_capacity(ctx.max_level() + 1);
    for i in 0..=ctx.max_level() {
        let a = uniform_poly(ctx, &basis, rng);
        let mut b = error_poly(ctx, &basis, rng)?;
        let as_ = ctx.mul(&a, s, &basis);
        ctx.sub_assign(&mut b, &as_, &basis);
        let m = ctx.tables(i).modulus();
        let w = p_mod[i];
        let src = s_new.component(i).to_vec();
        for (x, y) in b.component_mut(i).iter_mut().zip(src) {
            *x = m.add(*x, m.mul(y, w));
        }
        digits.push((b, a));
    }
    Ok(KeySwitchKey { digits })
}

/// Generates a secret, public key, relinearization key and power-of-two rotation keys.
pub fn keygen<R: RngCore + ?Sized>(ctx: &CkksContext, rng: &mut R) -> Result<KeySet, CkksError> {
    let params = ctx.params();
    let basis = ctx.key_basis();
    let s_coeffs = match params.secret_weight {
        Some(h) => sample_sparse_ternary(params.degree_log2, h, rng)?,
        None => sample_ternary(params.degree_log2, rng),
    };
    let s = ctx.poly_from_signed(&s_coeffs, &basis);

    let a = uniform_poly(ctx, &basis, rng);
    let mut b = error_poly(ctx, &basis, rng)?;
    ctx.sub_assign(&mut b, &ctx.mul(&a, &s, &basis), &basis);
    let public = PublicKey { b, a };

    let s2 = ctx.mul(&s, &s, &basis);
    let relin = RelinKey(switching_key(ctx, &s, &s2, rng)?);

    let mut galois = GaloisKeys::default();
    for step in ctx.rotation_steps() {
        let g = ctx.galois_element(step as i64);
        let sg = ctx.apply_galois(&s, g)?;
        galois.keys.insert(g, switching_key(ctx, &s, &sg, rng)?);
    }
    Ok(KeySet { secret: SecretKey { poly: s }, public, relin, galois })
}
