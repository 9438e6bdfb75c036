//! Modulus chain, transform tables and the RNS primitives built on them.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::CkksError;
use crate::params::CkksParams;
use crate::ring::{make_ntt_tables, ntt_primes_below, Modulus, NttTables};
use crate::rns::RnsPoly;

#[derive(Debug)]
pub struct CkksContext {
    params: CkksParams,
    digest: [u8; 32],
    primes: Vec<u64>,
    tables: Vec<NttTables>,
    max_level: usize,
    /// `q_l^{-1} mod q_j` for `j < l`.
    rescale_inv: Vec<Vec<u64>>,
    /// `P^{-1} mod q_j`.
    special_inv: Vec<u64>,
    /// `P mod q_j`.
    special_mod: Vec<u64>,
    /// `(q_0 ⋯ q_{j-1}) mod q_i` for `j ≤ i`.
    garner_prefix: Vec<Vec<u64>>,
    /// `(q_0 ⋯ q_{i-1})^{-1} mod q_i`.
    garner_inv: Vec<u64>,
    /// Slot permutations in transform order, keyed by Galois element.
    galois_perms: HashMap<u64, Vec<usize>>,
    pub(crate) rot_group: Vec<usize>,
    pub(crate) ksi_pows: Vec<num_complex::Complex64>,
}

/// Validates parameters, finds the primes and precomputes everything derived from them.
pub fn build_context(params: &CkksParams) -> Result<Arc<CkksContext>, CkksError> {
    CkksContext::new(params.clone()).map(Arc::new)
}

fn select_primes(bits: &[u32], two_n: u64) -> Result<Vec<u64>, CkksError> {
    let mut pools: HashMap<u32, std::vec::IntoIter<u64>> = HashMap::new();
    for &b in bits {
        if !pools.contains_key(&b) {
            let need = bits.iter().filter(|&&x| x == b).count();
            let found = ntt_primes_below(b, two_n, need);
            if found.len() < need {
                return Err(CkksError::NotEnoughPrimes { bits: b, two_n, needed: need, found: found.len() });
            }
            pools.insert(b, found.into_iter());
        }
    }
    Ok(bits.iter().map(|b| pools.get_mut(b).unwrap().next().unwrap()).collect())
}

impl CkksContext {
    pub fn new(params: CkksParams) -> Result<Self, CkksError> {
        params.validate()?;
        let n = params.degree();
        let two_n = 2 * n as u64;
        let primes = select_primes(&params.coeff_modulus_bits, two_n)?;
        let tables = primes
            .iter()
            .map(|&p| make_ntt_tables(p, params.degree_log2))
            .collect::<Result<Vec<_>, _>>()?;
        let k = primes.len();
        let max_level = k - 2;
        let special = primes[k - 1];
        let mods: Vec<Modulus> = primes.iter().map(|&p| Modulus::new(p)).collect();

        let rescale_inv = (0..=max_level)
            .map(|l| (0..l).map(|j| mods[j].inv(primes[l]).unwrap()).collect())
            .collect();
        let special_inv = (0..=max_level).map(|j| mods[j].inv(special).unwrap()).collect();
        let special_mod = (0..=max_level).map(|j| special % primes[j]).collect();
        let mut garner_prefix = Vec::with_capacity(max_level + 1);
        let mut garner_inv = Vec::with_capacity(max_level + 1);
        for i in 0..=max_level {
            let mut row = Vec::with_capacity(i + 1);
            let mut acc = 1 % primes[i];
            for j in 0..=i {
                row.push(acc);
                if j < i {
                    acc = mods[i].mul(acc, primes[j] % primes[i]);
                }
            }
            garner_inv.push(if i == 0 { 1 } else { mods[i].inv(row[i]).unwrap() });
            garner_prefix.push(row);
        }

        let slots = n / 2;
        let m = 2 * n;
        let mut rot_group = Vec::with_capacity(slots);
        let mut g = 1usize;
        for _ in 0..slots {
            rot_group.push(g);
            g = g * 5 % m;
        }
        let ksi_pows = (0..=m)
            .map(|j| num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / m as f64))
            .collect();

        let mut ctx = Self {
            digest: params.digest(),
            params,
            primes,
            tables,
            max_level,
            rescale_inv,
            special_inv,
            special_mod,
            garner_prefix,
            garner_inv,
            galois_perms: HashMap::new(),
            rot_group,
            ksi_pows,
        };
        for step in ctx.rotation_steps() {
            let g = ctx.galois_element(step as i64);
            let perm = ctx.compute_galois_perm(g);
            ctx.galois_perms.insert(g, perm);
        }
        Ok(ctx)
    }

    pub fn params(&self) -> &CkksParams {
        &self.params
    }

    pub fn params_digest(&self) -> [u8; 32] {
        self.digest
    }

    pub fn degree(&self) -> usize {
        self.params.degree()
    }

    pub fn slots(&self) -> usize {
        self.params.slots()
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn default_scale(&self) -> f64 {
        self.params.scale()
    }

    /// All primes, the special prime last.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn special_prime(&self) -> u64 {
        self.primes[self.primes.len() - 1]
    }

    pub fn special_index(&self) -> usize {
        self.primes.len() - 1
    }

    pub fn tables(&self, index: usize) -> &NttTables {
        &self.tables[index]
    }

    /// Power-of-two rotation steps covered by Galois keys.
    pub fn rotation_steps(&self) -> Vec<usize> {
        let mut v = Vec::new();
        let mut s = 1;
        while s < self.slots() {
            v.push(s);
            s <<= 1;
        }
        v
    }

    /// `5^k mod 2N`, for a left rotation by `k` slots.
    pub fn galois_element(&self, step: i64) -> u64 {
        let slots = self.slots() as i64;
        let k = step.rem_euclid(slots.max(1)) as u64;
        Modulus::new(2 * self.degree() as u64).pow(5, k)
    }

    fn compute_galois_perm(&self, g: u64) -> Vec<usize> {
        let n = self.degree();
        let logn = self.params.degree_log2;
        let two_n = 2 * n as u64;
        (0..n)
            .map(|j| {
                let e = (2 * crate::ring::bit_reverse(j, logn) + 1) as u64;
                let t = e * g % two_n;
                crate::ring::bit_reverse(((t - 1) / 2) as usize, logn)
            })
            .collect()
    }

    pub(crate) fn galois_perm(&self, g: u64) -> Result<&[usize], CkksError> {
        self.galois_perms.get(&g).map(|v| v.as_slice()).ok_or(CkksError::MissingGaloisKey(g))
    }

    /// Table indices `0..=level`, plus the special prime when `special` is set.
    pub(crate) fn basis(&self, level: usize, special: bool) -> Vec<usize> {
        let mut b: Vec<usize> = (0..=level).collect();
        if special {
            b.push(self.special_index());
        }
        b
    }

    pub(crate) fn key_basis(&self) -> Vec<usize> {
        self.basis(self.max_level, true)
    }

    // ---- RNS primitives; every polynomial is in transform form unless stated ----

    pub(crate) fn poly_from_signed(&self, coeffs: &[i64], basis: &[usize]) -> RnsPoly {
        let n = self.degree();
        let mut out = RnsPoly::zero(n, basis.len());
        for (c, &idx) in basis.iter().enumerate() {
            let m = self.tables[idx].modulus();
            let dst = out.component_mut(c);
            for (d, &x) in dst.iter_mut().zip(coeffs) {
                *d = m.from_i64(x);
            }
            self.tables[idx].forward_inplace(dst);
        }
        out
    }

    pub(crate) fn add_assign(&self, a: &mut RnsPoly, b: &RnsPoly, basis: &[usize]) {
        for (c, &idx) in basis.iter().enumerate() {
            let m = self.tables[idx].modulus();
            for (x, &y) in a.component_mut(c).iter_mut().zip(b.component(c)) {
                *x = m.add(*x, y);
            }
        }
    }

    pub(crate) fn sub_assign(&self, a: &mut RnsPoly, b: &RnsPoly, basis: &[usize]) {
        for (c, &idx) in basis.iter().enumerate() {
            let m = self.tables[idx].modulus();
            for (x, &y) in a.component_mut(c).iter_mut().zip(b.component(c)) {
                *x = m.sub(*x, y);
            }
        }
    }

    pub(crate) fn neg_assign(&self, a: &mut RnsPoly, basis: &[usize]) {
        for (c, &idx) in basis.iter().enumerate() {
            let m = self.tables[idx].modulus();
            for x in a.component_mut(c).iter_mut() {
                *x = m.neg(*x);
            }
        }
    }

    pub(crate) fn mul(&self, a: &RnsPoly, b: &RnsPoly, basis: &[usize]) -> RnsPoly {
        let mut out = RnsPoly::zero(self.degree(), basis.len());
        for (c, &idx) in basis.iter().enumerate() {
            let m = self.tables[idx].modulus();
            for ((d, &x), &y) in out.component_mut(c).iter_mut().zip(a.component(c)).zip(b.component(c)) {
                *d = m.mul(x, y);
            }
        }
        out
    }

    /// `acc += a ⊙ b` componentwise.
    pub(crate) fn mul_add_assign(&self, acc: &mut RnsPoly, a: &RnsPoly, b: &RnsPoly, basis: &[usize]) {
        for (c, &idx) in basis.iter().enumerate() {
            let m = self.tables[idx].modulus();
            for ((d, &x), &y) in acc.component_mut(c).iter_mut().zip(a.component(c)).zip(b.component(c)) {
                *d = m.add(*d, m.mul(x, y));
            }
        }
    }

    pub(crate) fn to_coeff(&self, a: &RnsPoly, basis: &[usize]) -> RnsPoly {
        let mut out = a.clone();
        for (c, &idx) in basis.iter().enumerate() {
            self.tables[idx].inverse_inplace(out.component_mut(c));
        }
        out
    }

    pub(crate) fn apply_galois(&self, a: &RnsPoly, g: u64) -> Result<RnsPoly, CkksError> {
        let perm = self.galois_perm(g)?;
        let mut out = RnsPoly::zero(self.degree(), a.count());
        for c in 0..a.count() {
            let src = a.component(c);
            for (d, &k) in out.component_mut(c).iter_mut().zip(perm) {
                *d = src[k];
            }
        }
        Ok(out)
    }

    /// Divides by the top prime `q_level` with rounding; the result lives at `level - 1`.
    pub(crate) fn rescale_poly(&self, a: &RnsPoly, level: usize) -> RnsPoly {
        let n = self.degree();
        let mut top = a.component(level).to_vec();
        self.tables[level].inverse_inplace(&mut top);
        let qt = self.tables[level].modulus();
        let mut out = RnsPoly::zero(n, level);
        let mut tmp = vec![0u64; n];
        for j in 0..level {
            let m = self.tables[j].modulus();
            for (t, &x) in tmp.iter_mut().zip(&top) {
                *t = m.from_i64(qt.center(x));
            }
            self.tables[j].forward_inplace(&mut tmp);
            let inv = self.rescale_inv[level][j];
            let inv_s = m.shoup(inv);
            for ((d, &x), &t) in out.component_mut(j).iter_mut().zip(a.component(j)).zip(&tmp) {
                *d = m.mul_shoup(m.sub(x, t), inv, inv_s);
            }
        }
        out
    }

    /// Divides a polynomial over `q_0..q_level, P` by `P` with rounding.
    pub(crate) fn mod_down(&self, a: &RnsPoly, level: usize) -> RnsPoly {
        let n = self.degree();
        let sp = self.special_index();
        let mut top = a.component(level + 1).to_vec();
        self.tables[sp].inverse_inplace(&mut top);
        let pm = self.tables[sp].modulus();
        let mut out = RnsPoly::zero(n, level + 1);
        let mut tmp = vec![0u64; n];
        for j in 0..=level {
            let m = self.tables[j].modulus();
            for (t, &x) in tmp.iter_mut().zip(&top) {
                *t = m.from_i64(pm.center(x));
            }
            self.tables[j].forward_inplace(&mut tmp);
            let inv = self.special_inv[j];
            let inv_s = m.shoup(inv);
            for ((d, &x), &t) in out.component_mut(j).iter_mut().zip(a.component(j)).zip(&tmp) {
                *d = m.mul_shoup(m.sub(x, t), inv, inv_s);
            }
        }
        out
    }

    /// `P mod q_j` for each chain prime.
    pub(crate) fn special_mod(&self) -> &[u64] {
        &self.special_mod
    }

    /// Key switching by RNS digits: returns `(d0, d1)` at `level` with
    /// `d0 + d1·s ≈ c·s'` where the key encrypts `s'` under `s`.
    pub(crate) fn key_switch(
        &self,
        c: &RnsPoly,
        level: usize,
        key: &crate::keys::KeySwitchKey,
    ) -> (RnsPoly, RnsPoly) {
        let n = self.degree();
        let ext = self.basis(level, true);
        let key_idx: Vec<usize> = {
            let mut v: Vec<usize> = (0..=level).collect();
            v.push(self.max_level + 1);
            v
        };
        let mut acc0 = vec![0u128; n * ext.len()];
        let mut acc1 = vec![0u128; n * ext.len()];
        let mut digit = vec![0u64; n];
        let mut lifted = vec![0u64; n];
        for i in 0..=level {
            digit.copy_from_slice(c.component(i));
            self.tables[i].inverse_inplace(&mut digit);
            let qi = self.tables[i].modulus();
            let (k0, k1) = &key.digits[i];
            for (e, &idx) in ext.iter().enumerate() {
                let src: &[u64] = if idx == i {
                    c.component(i)
                } else {
                    let m = self.tables[idx].modulus();
                    for (d, &x) in lifted.iter_mut().zip(&digit) {
                        *d = m.from_i64(qi.center(x));
                    }
                    self.tables[idx].forward_inplace(&mut lifted);
                    &lifted
                };
                let kc = key_idx[e];
                let a0 = &mut acc0[e * n..(e + 1) * n];
                let a1 = &mut acc1[e * n..(e + 1) * n];
                for (((s0, s1), &x), (&y0, &y1)) in a0
                    .iter_mut()
                    .zip(a1.iter_mut())
                    .zip(src)
                    .zip(k0.component(kc).iter().zip(k1.component(kc)))
                {
                    *s0 += x as u128 * y0 as u128;
                    *s1 += x as u128 * y1 as u128;
                }
            }
        }
        let reduce = |acc: Vec<u128>| {
            let mut p = RnsPoly::zero(n, ext.len());
            for (e, &idx) in ext.iter().enumerate() {
                let m = self.tables[idx].modulus();
                for (d, &x) in p.component_mut(e).iter_mut().zip(&acc[e * n..(e + 1) * n]) {
                    *d = m.reduce_u128(x);
                }
            }
            self.mod_down(&p, level)
        };
        (reduce(acc0), reduce(acc1))
    }

    /// Exact centered lift of a coefficient-form polynomial over `q_0..q_level`, as `f64`.
    pub(crate) fn lift_centered(&self, coeff: &RnsPoly, level: usize) -> Vec<f64> {
        let n = self.degree();
        let mods: Vec<Modulus> = (0..=level).map(|i| *self.tables[i].modulus()).collect();
        let mut digits = vec![0i64; level + 1];
        (0..n)
            .map(|k| {
                for i in 0..=level {
                    let m = &mods[i];
                    let mut acc = 0u64;
                    for j in 0..i {
                        let d = m.from_i64(digits[j]);
                        acc = m.add(acc, m.mul(d, self.garner_prefix[i][j]));
                    }
                    let x = coeff.component(i)[k];
                    let d = m.mul(m.sub(x, acc), self.garner_inv[i]);
                    digits[i] = m.center(d);
                }
                let mut v = 0f64;
                for i in (0..=level).rev() {
                    v = v * self.primes[i] as f64 + digits[i] as f64;
                }
                v
            })
            .collect()
    }
}
