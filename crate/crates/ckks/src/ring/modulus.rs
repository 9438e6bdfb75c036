//! Word-sized modular arithmetic with Barrett and Shoup reduction.
//!
//! Conditional subtractions are written as `x.min(x - p)` with wrapping, which
//! compiles to a branch-free select.

/// An odd modulus below 2^62 with a precomputed Barrett ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Modulus {
    value: u64,
    ratio_hi: u64,
    ratio_lo: u64,
}

impl Modulus {
    /// Panics if `p < 2` or `p >= 2^62`.
    pub fn new(p: u64) -> Self {
        assert!(p >= 2 && p < (1u64 << 62), "modulus out of range: {p}");
        // floor((2^128 - 1) / p) equals floor(2^128 / p) for any p that is not a power of two
        let ratio = u128::MAX / p as u128;
        Self { value: p, ratio_hi: (ratio >> 64) as u64, ratio_lo: ratio as u64 }
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        s.min(s.wrapping_sub(self.value))
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        let d = a.wrapping_sub(b);
        d.min(d.wrapping_add(self.value))
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.value - a
        }
    }

    /// Reduces any `x < 2^124`.
    #[inline]
    pub fn reduce_u128(&self, x: u128) -> u64 {
        let x_lo = x as u64 as u128;
        let x_hi = (x >> 64) as u64 as u128;
        let r_lo = self.ratio_lo as u128;
        let r_hi = self.ratio_hi as u128;
        let carry = (x_lo * r_lo) >> 64;
        let mid = x_hi * r_lo + x_lo * r_hi + carry;
        let q = x_hi * r_hi + (mid >> 64);
        let mut r = (x - q * self.value as u128) as u64;
        r = r.min(r.wrapping_sub(self.value));
        while r >= self.value {
            r -= self.value;
        }
        r
    }

    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        if a < self.value {
            a
        } else {
            self.reduce_u128(a as u128)
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce_u128(a as u128 * b as u128)
    }

    /// Shoup companion of a fixed multiplicand `w < p`.
    #[inline]
    pub fn shoup(&self, w: u64) -> u64 {
        (((w as u128) << 64) / self.value as u128) as u64
    }

    /// `a·w mod p` up to one extra `p`: the result lies in `[0, 2p)` for any `a`.
    #[inline]
    pub fn mul_shoup_lazy(&self, a: u64, w: u64, w_shoup: u64) -> u64 {
        let q = ((a as u128 * w_shoup as u128) >> 64) as u64;
        a.wrapping_mul(w).wrapping_sub(q.wrapping_mul(self.value))
    }

    #[inline]
    pub fn mul_shoup(&self, a: u64, w: u64, w_shoup: u64) -> u64 {
        let r = self.mul_shoup_lazy(a, w, w_shoup);
        r.min(r.wrapping_sub(self.value))
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.value;
        base = self.reduce(base);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse by Fermat's little theorem, so `p` must be prime.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = self.reduce(a);
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.value - 2))
        }
    }

    #[inline]
    pub fn from_i64(&self, x: i64) -> u64 {
        let m = x.unsigned_abs() % self.value;
        if x < 0 {
            self.neg(m)
        } else {
            m
        }
    }

    /// Centered representative in `(-p/2, p/2]`.
    #[inline]
    pub fn center(&self, a: u64) -> i64 {
        if a > self.value / 2 {
            a as i64 - self.value as i64
        } else {
            a as i64
        }
    }
}
