use super::modulus::Modulus;

const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller-Rabin, exact for every `u64` below 2^62.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    if n >= (1u64 << 62) {
        return false;
    }
    let m = Modulus::new(n);
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = m.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = m.mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Scans down from `2^bits` for `count` primes `p ≡ 1 (mod two_n)` with exactly `bits` bits.
pub fn ntt_primes_below(bits: u32, two_n: u64, count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    if bits < 2 || bits > 61 || two_n == 0 {
        return out;
    }
    let upper = 1u64 << bits;
    let lower = 1u64 << (bits - 1);
    let mut k = (upper - 1) / two_n;
    while out.len() < count && k > 0 {
        let p = k * two_n + 1;
        if p <= lower {
            break;
        }
        if p < upper && is_prime(p) {
            out.push(p);
        }
        k -= 1;
    }
    out
}

fn factor_distinct(mut n: u64) -> Vec<u64> {
    let mut f = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            f.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        f.push(n);
    }
    f
}

/// Smallest primitive `two_n`-th root of unity modulo the prime `p`, if one exists.
pub fn primitive_root_of_unity(p: u64, two_n: u64) -> Option<u64> {
    if two_n == 0 || (p - 1) % two_n != 0 {
        return None;
    }
    let m = Modulus::new(p);
    let cofactor = (p - 1) / two_n;
    let factors = factor_distinct(p - 1);
    // a generator of the full group, raised to the cofactor
    let g = (2..p).find(|&g| factors.iter().all(|&q| m.pow(g, (p - 1) / q) != 1))?;
    let root = m.pow(g, cofactor);
    // pick the smallest power of `root` that is still primitive, for reproducible tables
    let mut best = root;
    let mut cur = root;
    for e in 1..two_n {
        if e % 2 == 1 && cur < best {
            best = cur;
        }
        cur = m.mul(cur, root);
    }
    Some(best)
}
