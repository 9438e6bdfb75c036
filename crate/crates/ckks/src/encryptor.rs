use rand::{Rng, RngCore};

use crate::context::CkksContext;
use crate::encoding::Plaintext;
use crate::error::CkksError;
use crate::keys::{error_poly, PublicKey, SecretKey};
use crate::rns::RnsPoly;

/// Two polynomials `(c0, c1)` with `c0 + c1·s ≈ Δ·m` over `q_0..q_level`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ciphertext {
    pub(crate) parts: Vec<RnsPoly>,
    pub(crate) level: usize,
    pub(crate) scale: f64,
}

impl Ciphertext {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn parts(&self) -> &[RnsPoly] {
        &self.parts
    }

    pub fn from_parts(parts: Vec<RnsPoly>, level: usize, scale: f64) -> Self {
        Self { parts, level, scale }
    }
}

/// Public-key encryption at the plaintext's level.
///
/// The masking terms are drawn modulo `Q·P` and divided by `P`, which leaves
/// only rounding noise next to the message.
pub fn encrypt<R: RngCore + ?Sized>(
    ctx: &CkksContext,
    pt: &Plaintext,
    pk: &PublicKey,
    rng: &mut R,
) -> Result<Ciphertext, CkksError> {
    let basis = ctx.key_basis();
    let top = ctx.max_level();
    let v: Vec<i64> = (0..ctx.degree()).map(|_| rng.random_range(-1i64..=1)).collect();
    let v = ctx.poly_from_signed(&v, &basis);
    let mut c0 = ctx.mul(&v, &pk.b, &basis);
    ctx.add_assign(&mut c0, &error_poly(ctx, &basis, rng)?, &basis);
    let mut c1 = ctx.mul(&v, &pk.a, &basis);
    ctx.add_assign(&mut c1, &error_poly(ctx, &basis, rng)?, &basis);
    let mut c0 = ctx.mod_down(&c0, top);
    let mut c1 = ctx.mod_down(&c1, top);
    c0.truncate(pt.level + 1);
    c1.truncate(pt.level + 1);
    ctx.add_assign(&mut c0, &pt.poly, &ctx.basis(pt.level, false));
    Ok(Ciphertext { parts: vec![c0, c1], level: pt.level, scale: pt.scale })
}

/// `Σ c_i·s^i`.
pub fn decrypt(ctx: &CkksContext, ct: &Ciphertext, sk: &SecretKey) -> Plaintext {
    let basis = ctx.basis(ct.level, false);
    let mut s = sk.poly.clone();
    s.truncate(ct.level + 1);
    let mut acc = ct.parts[0].clone();
    let mut s_pow = s.clone();
    for (i, part) in ct.parts.iter().enumerate().skip(1) {
        ctx.mul_add_assign(&mut acc, part, &s_pow, &basis);
        if i + 1 < ct.parts.len() {
            s_pow = ctx.mul(&s_pow, &s, &basis);
        }
    }
    Plaintext { poly: acc, level: ct.level, scale: ct.scale }
}
