use super::ntt::NttTables;
use super::RingError;

/// A polynomial in `Z_p[X]/(X^N + 1)`, coefficients in `[0, p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingPoly {
    coeffs: Vec<u64>,
    degree_log2: u32,
    modulus: u64,
}

impl RingPoly {
    pub fn new(coeffs: Vec<u64>, modulus: u64) -> Result<Self, RingError> {
        let n = coeffs.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(RingError::InvalidLength(n));
        }
        if modulus < 2 {
            return Err(RingError::NotPrime(modulus));
        }
        if let Some(&c) = coeffs.iter().find(|&&c| c >= modulus) {
            return Err(RingError::CoefficientOutOfRange { value: c, modulus });
        }
        Ok(Self { coeffs, degree_log2: n.trailing_zeros(), modulus })
    }

    pub fn zero(degree_log2: u32, modulus: u64) -> Self {
        Self { coeffs: vec![0; 1 << degree_log2], degree_log2, modulus }
    }

    /// Reduces signed coefficients into `[0, p)`.
    pub fn from_signed(coeffs: &[i64], modulus: u64) -> Result<Self, RingError> {
        let p = modulus as i128;
        let c = coeffs.iter().map(|&x| (x as i128).rem_euclid(p) as u64).collect();
        Self::new(c, modulus)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u64> {
        self.coeffs
    }

    pub fn degree_log2(&self) -> u32 {
        self.degree_log2
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

fn check_pair(a: &RingPoly, b: &RingPoly) -> Result<(), RingError> {
    if a.modulus != b.modulus {
        return Err(RingError::ModulusMismatch(a.modulus, b.modulus));
    }
    if a.degree_log2 != b.degree_log2 {
        return Err(RingError::DegreeMismatch(a.degree(), b.degree()));
    }
    Ok(())
}

fn check_tables(a: &RingPoly, t: &NttTables) -> Result<(), RingError> {
    if a.modulus != t.prime() {
        return Err(RingError::ModulusMismatch(a.modulus, t.prime()));
    }
    if a.degree_log2 != t.degree_log2() {
        return Err(RingError::DegreeMismatch(a.degree(), t.degree()));
    }
    Ok(())
}

pub fn poly_add(a: &RingPoly, b: &RingPoly) -> Result<RingPoly, RingError> {
    check_pair(a, b)?;
    let p = a.modulus;
    let coeffs = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(&x, &y)| if x + y >= p { x + y - p } else { x + y })
        .collect();
    Ok(RingPoly { coeffs, ..*a })
}

pub fn poly_sub(a: &RingPoly, b: &RingPoly) -> Result<RingPoly, RingError> {
    check_pair(a, b)?;
    let p = a.modulus;
    let coeffs = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(&x, &y)| if x >= y { x - y } else { x + p - y })
        .collect();
    Ok(RingPoly { coeffs, ..*a })
}

pub fn poly_scalar_mul(a: &RingPoly, c: u64) -> RingPoly {
    let p = a.modulus as u128;
    let c = c as u128 % p;
    let coeffs = a.coeffs.iter().map(|&x| (x as u128 * c % p) as u64).collect();
    RingPoly { coeffs, ..*a }
}

/// Forward transform into evaluation form.
pub fn ntt_forward(a: &RingPoly, tables: &NttTables) -> Result<Vec<u64>, RingError> {
    check_tables(a, tables)?;
    let mut v = a.coeffs.clone();
    tables.forward_inplace(&mut v);
    Ok(v)
}

pub fn ntt_inverse(evals: &[u64], tables: &NttTables) -> Result<RingPoly, RingError> {
    if evals.len() != tables.degree() {
        return Err(RingError::DegreeMismatch(evals.len(), tables.degree()));
    }
    let mut v = evals.to_vec();
    tables.inverse_inplace(&mut v);
    RingPoly::new(v, tables.prime())
}

/// Product modulo `X^N + 1` through the transform.
pub fn negacyclic_mul(a: &RingPoly, b: &RingPoly, tables: &NttTables) -> Result<RingPoly, RingError> {
    check_pair(a, b)?;
    let fa = ntt_forward(a, tables)?;
    let fb = ntt_forward(b, tables)?;
    let m = tables.modulus();
    let prod: Vec<u64> = fa.iter().zip(&fb).map(|(&x, &y)| m.mul(x, y)).collect();
    ntt_inverse(&prod, tables)
}
