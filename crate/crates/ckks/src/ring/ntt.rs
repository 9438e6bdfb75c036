//! Negacyclic number-theoretic transform over `Z_p[X]/(X^N + 1)`.
//!
//! Forward is Cooley-Tukey with bit-reversed powers of a primitive 2N-th root ψ,
//! inverse is Gentleman-Sande. Evaluation slot `j` of the forward output holds
//! `a(ψ^(2·brv(j)+1))`.

use super::modulus::Modulus;
use super::primes::{is_prime, primitive_root_of_unity};
use super::RingError;

pub const MAX_DEGREE_LOG2: u32 = 17;

#[derive(Clone, Debug)]
pub struct NttTables {
    modulus: Modulus,
    degree_log2: u32,
    root: u64,
    forward_twiddles: Vec<u64>,
    forward_shoup: Vec<u64>,
    inverse_twiddles: Vec<u64>,
    inverse_shoup: Vec<u64>,
    n_inverse: u64,
    n_inverse_shoup: u64,
}

pub fn bit_reverse(x: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        x.reverse_bits() >> (usize::BITS - bits)
    }
}

/// Builds tables for prime `p` and ring degree `2^degree_log2`.
pub fn make_ntt_tables(p: u64, degree_log2: u32) -> Result<NttTables, RingError> {
    if degree_log2 == 0 || degree_log2 > MAX_DEGREE_LOG2 {
        return Err(RingError::InvalidDegree(degree_log2));
    }
    if p < 3 || p >= (1u64 << 61) || !is_prime(p) {
        return Err(RingError::NotPrime(p));
    }
    let n = 1usize << degree_log2;
    let two_n = 2 * n as u64;
    if p % two_n != 1 {
        return Err(RingError::NoRootOfUnity { p, two_n });
    }
    let m = Modulus::new(p);
    let psi = primitive_root_of_unity(p, two_n).ok_or(RingError::NoRootOfUnity { p, two_n })?;
    let psi_inv = m.inv(psi).expect("root is a unit");
    let mut fwd = vec![0u64; n];
    let mut inv = vec![0u64; n];
    let (mut pw, mut pw_inv) = (1u64, 1u64);
    for i in 0..n {
        let r = bit_reverse(i, degree_log2);
        fwd[r] = pw;
        inv[r] = pw_inv;
        pw = m.mul(pw, psi);
        pw_inv = m.mul(pw_inv, psi_inv);
    }
    let forward_shoup = fwd.iter().map(|&w| m.shoup(w)).collect();
    let inverse_shoup = inv.iter().map(|&w| m.shoup(w)).collect();
    let n_inverse = m.inv(n as u64).expect("n is a unit");
    Ok(NttTables {
        modulus: m,
        degree_log2,
        root: psi,
        forward_twiddles: fwd,
        forward_shoup,
        inverse_twiddles: inv,
        inverse_shoup,
        n_inverse,
        n_inverse_shoup: m.shoup(n_inverse),
    })
}

impl NttTables {
    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn prime(&self) -> u64 {
        self.modulus.value()
    }

    pub fn degree_log2(&self) -> u32 {
        self.degree_log2
    }

    pub fn degree(&self) -> usize {
        1 << self.degree_log2
    }

    /// The primitive 2N-th root ψ the tables were built from.
    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn n_inverse(&self) -> u64 {
        self.n_inverse
    }

    /// Exponent `e` such that forward slot `j` evaluates at `ψ^e`.
    pub fn slot_exponent(&self, j: usize) -> usize {
        2 * bit_reverse(j, self.degree_log2) + 1
    }

    pub fn forward_inplace(&self, a: &mut [u64]) {
        let n = self.degree();
        assert_eq!(a.len(), n);
        let m = &self.modulus;
        let p = m.value();
        let two_p = 2 * p;
        // lazy butterflies keep values below 4p; inputs must be below p
        let mut t = n;
        let mut groups = 1;
        while groups < n {
            t >>= 1;
            for i in 0..groups {
                let w = self.forward_twiddles[groups + i];
                let ws = self.forward_shoup[groups + i];
                let j1 = 2 * i * t;
                let (lo, hi) = a[j1..j1 + 2 * t].split_at_mut(t);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let u = (*x).min(x.wrapping_sub(two_p));
                    let v = m.mul_shoup_lazy(*y, w, ws);
                    *x = u + v;
                    *y = u + two_p - v;
                }
            }
            groups <<= 1;
        }
        for x in a.iter_mut() {
            let r = (*x).min(x.wrapping_sub(two_p));
            *x = r.min(r.wrapping_sub(p));
        }
    }

    pub fn inverse_inplace(&self, a: &mut [u64]) {
        let n = self.degree();
        assert_eq!(a.len(), n);
        let m = &self.modulus;
        let two_p = 2 * m.value();
        // values stay below 2p between stages
        let mut t = 1;
        let mut groups = n;
        while groups > 1 {
            let h = groups >> 1;
            for i in 0..h {
                let w = self.inverse_twiddles[h + i];
                let ws = self.inverse_shoup[h + i];
                let j1 = 2 * i * t;
                let (lo, hi) = a[j1..j1 + 2 * t].split_at_mut(t);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (u, v) = (*x, *y);
                    let s = u + v;
                    *x = s.min(s.wrapping_sub(two_p));
                    *y = m.mul_shoup_lazy(u + two_p - v, w, ws);
                }
            }
            t <<= 1;
            groups = h;
        }
        for x in a.iter_mut() {
            *x = m.mul_shoup(*x, self.n_inverse, self.n_inverse_shoup);
        }
    }
}
