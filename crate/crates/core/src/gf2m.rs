//! Arithmetic in GF(2^m) and binary polynomials, enough to build BCH codes.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("no default primitive polynomial for m = {0} (supported: 3..=8)")]
    UnsupportedDegree(u32),
    #[error("polynomial {poly:#b} is not primitive of degree {m}")]
    NotPrimitive { m: u32, poly: u32 },
    #[error("the zero element has no minimal polynomial")]
    ZeroElement,
}

/// Default primitive polynomials, bit `i` is the coefficient of `x^i`.
pub fn default_primitive_polynomial(m: u32) -> Result<u32, FieldError> {
    Ok(match m {
        3 => 0b1011,      // x^3 + x + 1
        4 => 0b10011,     // x^4 + x + 1
        5 => 0b100101,    // x^5 + x^2 + 1
        6 => 0b1000011,   // x^6 + x + 1
        7 => 0b10001001,  // x^7 + x^3 + 1
        8 => 0b100011101, // x^8 + x^4 + x^3 + x^2 + 1
        _ => return Err(FieldError::UnsupportedDegree(m)),
    })
}

/// GF(2^m) with log/antilog tables. Elements are integers in `0..2^m`
/// holding polynomial-basis coordinates.
#[derive(Debug, Clone)]
pub struct GF2mField {
    m: u32,
    primitive_polynomial: u32,
    antilog: Vec<u16>,
    log: Vec<u16>,
}

impl GF2mField {
    pub fn new(m: u32) -> Result<Self, FieldError> {
        Self::with_polynomial(m, default_primitive_polynomial(m)?)
    }

    pub fn with_polynomial(m: u32, poly: u32) -> Result<Self, FieldError> {
        if !(2..=16).contains(&m) || poly >> m != 1 {
            return Err(FieldError::NotPrimitive { m, poly });
        }
        let order = (1usize << m) - 1;
        let mut antilog = vec![0u16; order];
        let mut log = vec![0u16; order + 1];
        let mut x: u32 = 1;
        for (i, slot) in antilog.iter_mut().enumerate() {
            // alpha^i must not revisit 1 before i = order
            if i > 0 && x == 1 {
                return Err(FieldError::NotPrimitive { m, poly });
            }
            *slot = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x >> m & 1 == 1 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(FieldError::NotPrimitive { m, poly });
        }
        Ok(Self {
            m,
            primitive_polynomial: poly,
            antilog,
            log,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn primitive_polynomial(&self) -> u32 {
        self.primitive_polynomial
    }

    /// Multiplicative group order, `2^m - 1`.
    pub fn order(&self) -> usize {
        self.antilog.len()
    }

    /// `alpha^e` for any integer exponent.
    pub fn alpha_pow(&self, e: i64) -> u16 {
        let order = self.order() as i64;
        self.antilog[e.rem_euclid(order) as usize]
    }

    pub fn log(&self, x: u16) -> Option<usize> {
        (x != 0).then(|| self.log[x as usize] as usize)
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = self.log[a as usize] as usize + self.log[b as usize] as usize;
        self.antilog[s % self.order()]
    }

    pub fn square(&self, a: u16) -> u16 {
        self.mul(a, a)
    }

    /// Minimal polynomial of a nonzero element: the product of `x - beta^(2^i)`
    /// over the conjugacy class of `beta`.
    pub fn minimal_polynomial(&self, element: u16) -> Result<BinaryPolynomial, FieldError> {
        if element == 0 {
            return Err(FieldError::ZeroElement);
        }
        let mut conjugates = vec![element];
        let mut c = self.square(element);
        while c != element {
            conjugates.push(c);
            c = self.square(c);
        }
        // coefficients in GF(2^m), lowest degree first
        let mut poly: Vec<u16> = vec![1];
        for &root in &conjugates {
            let mut next = vec![0u16; poly.len() + 1];
            for (i, &coef) in poly.iter().enumerate() {
                next[i + 1] ^= coef;
                next[i] ^= self.mul(coef, root);
            }
            poly = next;
        }
        let coeffs = poly
            .iter()
            .map(|&c| {
                debug_assert!(c <= 1, "minimal polynomial has a non-binary coefficient");
                c == 1
            })
            .collect();
        Ok(BinaryPolynomial::from_coeffs(coeffs))
    }
}

/// Polynomial over GF(2); `coeffs[i]` is the coefficient of `x^i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryPolynomial {
    coeffs: Vec<bool>,
}

impl BinaryPolynomial {
    pub fn from_coeffs(mut coeffs: Vec<bool>) -> Self {
        while coeffs.last() == Some(&false) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// From a bit mask, bit `i` being the coefficient of `x^i`.
    pub fn from_mask(mask: u64) -> Self {
        Self::from_coeffs((0..64).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn one() -> Self {
        Self { coeffs: vec![true] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.coeffs.get(i).copied().unwrap_or(false)
    }

    pub fn coeffs(&self) -> &[bool] {
        &self.coeffs
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self { coeffs: Vec::new() };
        }
        let mut out = vec![false; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a {
                for (j, &b) in other.coeffs.iter().enumerate() {
                    out[i + j] ^= b;
                }
            }
        }
        Self::from_coeffs(out)
    }

    /// Remainder of division by a nonzero divisor.
    pub fn rem(&self, divisor: &Self) -> Self {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let mut r = self.coeffs.clone();
        while r.len() > dd {
            let top = r.len() - 1;
            if r[top] {
                let shift = top - dd;
                for (j, &b) in divisor.coeffs.iter().enumerate() {
                    r[shift + j] ^= b;
                }
            }
            r.pop();
        }
        Self::from_coeffs(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_antilog_round_trip() {
        for m in 3..=8 {
            let f = GF2mField::new(m).unwrap();
            for x in 1..(1u16 << m) {
                let l = f.log(x).unwrap();
                assert_eq!(f.alpha_pow(l as i64), x);
            }
            assert_eq!(f.alpha_pow(f.order() as i64), 1);
        }
    }

    #[test]
    fn rejects_non_primitive_polynomial() {
        // x^4 + x^3 + x^2 + x + 1 has order 5
        assert!(matches!(
            GF2mField::with_polynomial(4, 0b11111),
            Err(FieldError::NotPrimitive { .. })
        ));
    }

    #[test]
    fn minimal_polynomial_of_one() {
        let f = GF2mField::new(4).unwrap();
        assert_eq!(
            f.minimal_polynomial(1).unwrap(),
            BinaryPolynomial::from_mask(0b11)
        );
    }

    #[test]
    fn minimal_polynomial_of_alpha_is_the_primitive_polynomial() {
        let f = GF2mField::new(4).unwrap();
        let alpha = f.alpha_pow(1);
        assert_eq!(
            f.minimal_polynomial(alpha).unwrap(),
            BinaryPolynomial::from_mask(0b10011)
        );
    }

    #[test]
    fn zero_has_no_minimal_polynomial() {
        let f = GF2mField::new(5).unwrap();
        assert_eq!(f.minimal_polynomial(0), Err(FieldError::ZeroElement));
    }

    #[test]
    fn minimal_polynomial_degree_divides_m() {
        let mut state = 12345u32;
        for m in 3..=8u32 {
            let f = GF2mField::new(m).unwrap();
            for _ in 0..100 {
                state = state.wrapping_mul(1103515245).wrapping_add(12345);
                let x = ((state >> 8) % ((1 << m) - 1)) as u16 + 1;
                let p = f.minimal_polynomial(x).unwrap();
                let deg = p.degree().unwrap() as u32;
                assert_eq!(m % deg, 0, "deg {deg} does not divide {m}");
                // the element is a root
                let mut acc = 0u16;
                let mut pw = 1u16;
                for &c in p.coeffs() {
                    if c {
                        acc ^= pw;
                    }
                    pw = f.mul(pw, x);
                }
                assert_eq!(acc, 0);
            }
        }
    }

    #[test]
    fn polynomial_remainder() {
        // (x^2 + 1) = (x + 1)^2
        let a = BinaryPolynomial::from_mask(0b101);
        let b = BinaryPolynomial::from_mask(0b11);
        assert!(a.rem(&b).is_zero());
        assert_eq!(b.mul(&b), a);
        assert_eq!(
            BinaryPolynomial::from_mask(0b111).rem(&b),
            BinaryPolynomial::one()
        );
    }
}
