//! Finite fields `F_{q^d}` with `q = p^e`, and binomial coefficients mod `p`.
//!
//! Elements are packed as base-`p` integers over the power basis of a fixed
//! monic irreducible modulus; multiplication goes through log/exp tables of a
//! primitive element. The modulus is the smallest one in packed order, so
//! every serialized element means the same thing on every run.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest field order we build tables for.
pub const MAX_ORDER: u64 = 1 << 20;

/// `C(i, n) mod p` by Lucas' theorem. Zero when `n > i`.
pub fn binom_mod_p(mut i: u64, mut n: u64, p: u32) -> u32 {
    let p64 = p as u64;
    let mut acc: u64 = 1;
    while n > 0 || i > 0 {
        let (id, nd) = (i % p64, n % p64);
        if nd > id {
            return 0;
        }
        acc = acc * small_binom(id, nd, p64) % p64;
        i /= p64;
        n /= p64;
    }
    acc as u32
}

/// `C(a, n) mod p` for any integer `a`, using `C(-j, n) = (-1)^n C(j + n - 1, n)`.
pub fn binom_signed_mod_p(a: i64, n: u64, p: u32) -> u32 {
    if a >= 0 {
        return binom_mod_p(a as u64, n, p);
    }
    let c = binom_mod_p((-a) as u64 + n - 1, n, p);
    if n % 2 == 1 && c != 0 {
        p - c
    } else {
        c
    }
}

// digits are < p, so the naive product stays small
fn small_binom(i: u64, n: u64, p: u64) -> u64 {
    let mut num = 1u64;
    let mut den = 1u64;
    for k in 0..n {
        num = num * ((i - k) % p) % p;
        den = den * ((k + 1) % p) % p;
    }
    num * pow_mod(den, p - 2, p) % p
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// Splits a prime power `q` into `(p, e)`.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while !q.is_multiple_of(p) {
        p += 1;
    }
    let (mut r, mut e) = (q, 0);
    while r % p == 0 {
        r /= p;
        e += 1;
    }
    (r == 1).then_some((p as u32, e))
}

/// Parameters of `F_{q^d}`: `q = p^e`, and a monic irreducible modulus of
/// degree `e*d` over `F_p` given low-to-high.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldParams {
    pub p: u32,
    pub e: u32,
    pub d: u32,
    pub modulus: Vec<u32>,
}

impl FieldParams {
    /// Picks the smallest monic irreducible modulus of degree `e*d`.
    pub fn new(p: u32, e: u32, d: u32) -> Result<Self> {
        Self::check_shape(p, e, d)?;
        let deg = (e * d) as usize;
        let count = (p as u64).pow(deg as u32);
        for packed in 0..count {
            let mut poly = unpack(packed, p, deg);
            poly.push(1);
            if is_irreducible(&poly, p) {
                return Ok(FieldParams { p, e, d, modulus: poly });
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    pub fn for_q(q: u64, d: u32) -> Result<Self> {
        let (p, e) =
            prime_power(q).ok_or_else(|| Error::InvalidField(format!("q = {q} is not a prime power")))?;
        Self::new(p, e, d)
    }

    fn check_shape(p: u32, e: u32, d: u32) -> Result<()> {
        if !is_prime(p as u64) {
            return Err(Error::InvalidField(format!("p = {p} is not prime")));
        }
        if e == 0 || d == 0 {
            return Err(Error::InvalidField("e and d must be at least 1".into()));
        }
        let order = (p as u64).checked_pow(e * d).filter(|&o| o <= MAX_ORDER);
        if order.is_none() {
            return Err(Error::InvalidField(format!(
                "field of order {p}^{} exceeds {MAX_ORDER}",
                e * d
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        Self::check_shape(self.p, self.e, self.d)?;
        let deg = (self.e * self.d) as usize;
        if self.modulus.len() != deg + 1 || self.modulus[deg] != 1 {
            return Err(Error::InvalidField(format!("modulus must be monic of degree {deg}")));
        }
        if self.modulus.iter().any(|&c| c >= self.p) {
            return Err(Error::InvalidField("modulus coefficient out of range".into()));
        }
        if !is_irreducible(&self.modulus, self.p) {
            return Err(Error::InvalidField("modulus is reducible".into()));
        }
        Ok(())
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.e)
    }

    pub fn order(&self) -> u64 {
        (self.p as u64).pow(self.e * self.d)
    }
}

fn unpack(mut packed: u64, p: u32, len: usize) -> Vec<u32> {
    let mut v = Vec::with_capacity(len + 1);
    for _ in 0..len {
        v.push((packed % p as u64) as u32);
        packed /= p as u64;
    }
    v
}

// Dense polynomials over F_p, low-to-high, used only for table setup.
fn poly_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = poly_trim(a.to_vec());
    let dm = m.len() - 1;
    let inv_lead = pow_mod(m[dm] as u64, p as u64 - 2, p as u64) as u32;
    while r.len() > dm {
        let shift = r.len() - 1 - dm;
        let c = (r[r.len() - 1] as u64 * inv_lead as u64 % p as u64) as u32;
        for (i, &mi) in m.iter().enumerate() {
            let idx = i + shift;
            r[idx] = ((r[idx] as u64 + (p - c) as u64 * mi as u64) % p as u64) as u32;
        }
        r = poly_trim(r);
    }
    r
}

fn poly_mul_mod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    poly_rem(&out.into_iter().map(|c| c as u32).collect::<Vec<_>>(), m, p)
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    for dd in 1..=deg / 2 {
        let count = (p as u64).pow(dd as u32);
        for packed in 0..count {
            let mut f = unpack(packed, p, dd);
            f.push(1);
            if poly_rem(poly, &f, p).is_empty() {
                return false;
            }
        }
    }
    deg >= 1
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            out.push(k);
            while n.is_multiple_of(k) {
                n /= k;
            }
        }
        k += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Element of a [`GaloisField`], packed as `sum c_i p^i`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem(u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn packed(self) -> u32 {
        self.0
    }
}

/// Shared handle to a field; series and matrices carry one of these.
pub type Field = Arc<GaloisField>;

pub struct GaloisField {
    params: FieldParams,
    q: u64,
    order: u64,
    deg: usize,
    // exp[i] = g^i for i in 0..order-1; log[x] for x != 0
    exp: Vec<u32>,
    log: Vec<u32>,
    // powers of p, one per digit
    place: Vec<u32>,
}

impl fmt::Debug for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{}) with q = {}", self.params.p, self.deg, self.q)
    }
}

impl PartialEq for GaloisField {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
    }
}

impl GaloisField {
    pub fn new(params: FieldParams) -> Result<Field> {
        params.validate()?;
        let p = params.p;
        let deg = params.modulus.len() - 1;
        let order = params.order();
        let q = params.q();
        let place: Vec<u32> = (0..deg).map(|i| p.pow(i as u32)).collect();

        let pack = |v: &[u32]| -> u32 { v.iter().zip(&place).map(|(&c, &w)| c * w).sum() };
        let factors = prime_factors(order - 1);
        let is_generator = |g: &[u32]| -> bool {
            factors.iter().all(|&r| {
                let x = poly_pow_mod(g, (order - 1) / r, &params.modulus, p);
                x != [1]
            })
        };

        let mut exp = vec![0u32; (order - 1) as usize];
        let mut log = vec![0u32; order as usize];
        if order == 2 {
            exp[0] = 1;
        } else {
            let generator = (1..order)
                .map(|c| poly_trim(unpack(c, p, deg)))
                .find(|g| !g.is_empty() && is_generator(g))
                .expect("multiplicative group of a finite field is cyclic");
            let mut x = vec![1u32];
            for slot in exp.iter_mut() {
                *slot = pack(&x);
                x = poly_mul_mod(&x, &generator, &params.modulus, p);
            }
        }
        for (i, &e) in exp.iter().enumerate() {
            log[e as usize] = i as u32;
        }
        Ok(Arc::new(GaloisField { params, q, order, deg, exp, log, place }))
    }

    /// `F_{q^d}` with the default modulus.
    pub fn for_q(q: u64, d: u32) -> Result<Field> {
        Self::new(FieldParams::for_q(q, d)?)
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    pub fn p(&self) -> u32 {
        self.params.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// `Q = q^d`, the number of elements.
    pub fn order(&self) -> u64 {
        self.order
    }

    /// Extension degree over `F_q`.
    pub fn d(&self) -> u32 {
        self.params.d
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem(0)
    }

    pub fn one(&self) -> FieldElem {
        FieldElem(1)
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, n: i64) -> FieldElem {
        FieldElem(n.rem_euclid(self.p() as i64) as u32)
    }

    pub fn from_packed(&self, packed: u32) -> Result<FieldElem> {
        if (packed as u64) < self.order {
            Ok(FieldElem(packed))
        } else {
            Err(Error::InvalidField(format!("packed element {packed} out of range")))
        }
    }

    /// Builds an element from power-basis coordinates (low-to-high, length `e*d`).
    pub fn from_coords(&self, coords: &[u32]) -> Result<FieldElem> {
        if coords.len() != self.deg || coords.iter().any(|&c| c >= self.p()) {
            return Err(Error::InvalidField(format!(
                "element needs {} coordinates in 0..{}",
                self.deg,
                self.p()
            )));
        }
        Ok(FieldElem(coords.iter().zip(&self.place).map(|(&c, &w)| c * w).sum()))
    }

    pub fn coords(&self, x: FieldElem) -> Vec<u32> {
        unpack(x.0 as u64, self.p(), self.deg)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.order as u32).map(FieldElem)
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let p = self.p();
        if p == 2 {
            return FieldElem(a.0 ^ b.0);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0;
        for &w in &self.place {
            let s = (x % p + y % p) % p;
            out += s * w;
            x /= p;
            y /= p;
        }
        FieldElem(out)
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        let p = self.p();
        if p == 2 {
            return a;
        }
        let mut x = a.0;
        let mut out = 0;
        for &w in &self.place {
            out += ((p - x % p) % p) * w;
            x /= p;
        }
        FieldElem(out)
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 == 0 || b.0 == 0 {
            return FieldElem(0);
        }
        let n = self.order - 1;
        let s = (self.log[a.0 as usize] as u64 + self.log[b.0 as usize] as u64) % n;
        FieldElem(self.exp[s as usize])
    }

    pub fn inv(&self, a: FieldElem) -> Option<FieldElem> {
        if a.0 == 0 {
            return None;
        }
        let n = self.order - 1;
        let l = self.log[a.0 as usize] as u64;
        Some(FieldElem(self.exp[((n - l) % n) as usize]))
    }

    /// `a^e` for a signed exponent; `0^e` is 0 for `e != 0`.
    pub fn pow(&self, a: FieldElem, e: i64) -> FieldElem {
        if e == 0 {
            return self.one();
        }
        if a.0 == 0 {
            return FieldElem(0);
        }
        let n = (self.order - 1) as i128;
        let l = self.log[a.0 as usize] as i128;
        FieldElem(self.exp[(l * e as i128).rem_euclid(n) as usize])
    }

    /// `x^(q^k)`; negative `k` applies the inverse Frobenius.
    pub fn frobenius(&self, x: FieldElem, k: i64) -> FieldElem {
        if x.0 == 0 || k == 0 {
            return x;
        }
        let d = self.params.d as i64;
        let kk = k.rem_euclid(d) as u32;
        let n = self.order - 1;
        let mut l = self.log[x.0 as usize] as u64;
        for _ in 0..kk {
            l = l * self.q % n;
        }
        FieldElem(self.exp[l as usize])
    }

    /// The unique `y` with `y^q = x`, computed as `x^(Q/q)`.
    pub fn qth_root(&self, x: FieldElem) -> FieldElem {
        let e = (self.order / self.q) as i64;
        self.pow(x, e)
    }

    /// `x^(p^s)`.
    pub fn pth_power(&self, x: FieldElem, s: u32) -> FieldElem {
        let mut y = x;
        for _ in 0..s {
            y = self.pow(y, self.p() as i64);
        }
        y
    }

    /// Whether `x` lies in the subfield `F_q`.
    pub fn in_base_field(&self, x: FieldElem) -> bool {
        self.frobenius(x, 1) == x
    }

    /// Degree over `F_q` of the minimal polynomial of `x`.
    pub fn degree_over_base(&self, x: FieldElem) -> u32 {
        let mut y = self.frobenius(x, 1);
        let mut d = 1;
        while y != x {
            y = self.frobenius(y, 1);
            d += 1;
        }
        d
    }
}

fn poly_pow_mod(base: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
    let mut r = vec![1u32];
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            r = poly_mul_mod(&r, &b, m, p);
        }
        b = poly_mul_mod(&b, &b, m, p);
        e >>= 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_binom(i: u64, n: u64) -> u128 {
        if n > i {
            return 0;
        }
        let mut r: u128 = 1;
        for k in 0..n {
            r = r * (i - k) as u128 / (k + 1) as u128;
        }
        r
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binom_mod_p(5, 2, 2), 0);
        assert_eq!(binom_mod_p(7, 0, 3), 1);
        assert_eq!(binom_mod_p(4, 2, 2), 0);
        assert_eq!(binom_mod_p(5, 1, 2), 1);
        assert_eq!(binom_mod_p(2, 5, 3), 0);
    }

    #[test]
    fn lucas_matches_integer_binomial() {
        for p in [2u32, 3, 5, 7] {
            for i in 0..=64u64 {
                for n in 0..=i {
                    assert_eq!(
                        binom_mod_p(i, n, p) as u128,
                        int_binom(i, n) % p as u128,
                        "C({i},{n}) mod {p}"
                    );
                }
            }
        }
    }

    #[test]
    fn vandermonde_mod_p() {
        for p in [2u32, 3] {
            for a in 0..=32u64 {
                for b in 0..=32u64 {
                    for n in 0..=32u64 {
                        let lhs: u32 = (0..=n)
                            .map(|j| binom_mod_p(a, j, p) * binom_mod_p(b, n - j, p))
                            .sum::<u32>()
                            % p;
                        assert_eq!(lhs, binom_mod_p(a + b, n, p));
                    }
                }
            }
        }
    }

    #[test]
    fn negative_binomial() {
        // (1 + X)^(-1) = 1 - X + X^2 - ...
        for n in 0..10 {
            let expect = if n % 2 == 0 { 1 } else { 2 };
            assert_eq!(binom_signed_mod_p(-1, n, 3), expect);
        }
        // C(-2, 3) = -4
        assert_eq!(binom_signed_mod_p(-2, 3, 5), 1);
    }

    #[test]
    fn default_moduli() {
        assert_eq!(FieldParams::new(2, 1, 2).unwrap().modulus, vec![1, 1, 1]);
        assert_eq!(FieldParams::new(2, 1, 3).unwrap().modulus, vec![1, 1, 0, 1]);
        assert_eq!(FieldParams::new(3, 1, 1).unwrap().modulus, vec![0, 1]);
        let json = serde_json::to_string(&FieldParams::new(2, 1, 2).unwrap()).unwrap();
        assert_eq!(json, r#"{"p":2,"e":1,"d":2,"modulus":[1,1,1]}"#);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(FieldParams::new(4, 1, 1).is_err());
        assert!(FieldParams::new(2, 0, 1).is_err());
        assert!(FieldParams::new(2, 1, 21).is_err());
        let reducible = FieldParams { p: 2, e: 1, d: 2, modulus: vec![1, 0, 1] };
        assert!(GaloisField::new(reducible).is_err());
        assert!(prime_power(12).is_none());
        assert_eq!(prime_power(9), Some((3, 2)));
    }

    fn small_fields() -> Vec<Field> {
        vec![
            GaloisField::for_q(2, 1).unwrap(),
            GaloisField::for_q(2, 2).unwrap(),
            GaloisField::for_q(3, 2).unwrap(),
            GaloisField::for_q(4, 2).unwrap(),
            GaloisField::for_q(9, 2).unwrap(),
            GaloisField::for_q(3, 4).unwrap(),
        ]
    }

    #[test]
    fn qth_root_exhaustive() {
        for f in small_fields() {
            assert!(f.order() <= 81);
            assert_eq!(f.qth_root(f.zero()), f.zero());
            assert_eq!(f.qth_root(f.one()), f.one());
            for x in f.elements() {
                let y = f.qth_root(x);
                assert_eq!(f.pow(y, f.q() as i64), x);
                assert_eq!(f.pow(x, f.order() as i64), x);
            }
        }
    }

    #[test]
    fn frobenius_pairs_and_fixed_field() {
        for f in small_fields() {
            for x in f.elements() {
                assert_eq!(f.frobenius(x, 0), x);
                assert_eq!(f.frobenius(f.frobenius(x, 1), -1), x);
                assert_eq!(f.frobenius(x, 1), f.pow(x, f.q() as i64));
                if f.in_base_field(x) {
                    for k in -3..4 {
                        assert_eq!(f.frobenius(x, k), x);
                    }
                }
            }
            let base = f.elements().filter(|&x| f.in_base_field(x)).count() as u64;
            assert_eq!(base, f.q());
        }
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for f in small_fields().into_iter().take(3) {
            let els: Vec<_> = f.elements().collect();
            for &a in &els {
                assert_eq!(f.add(a, f.neg(a)), f.zero());
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
                }
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for &c in &els {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
                    }
                }
            }
        }
    }

    #[test]
    fn coordinates_round_trip() {
        let f = GaloisField::for_q(3, 3).unwrap();
        for x in f.elements() {
            assert_eq!(f.from_coords(&f.coords(x)).unwrap(), x);
        }
        assert!(f.from_coords(&[0, 3, 0]).is_err());
        assert!(f.from_coords(&[0, 1]).is_err());
    }

    #[test]
    fn degrees_over_base() {
        let f = GaloisField::for_q(2, 2).unwrap();
        let degs: Vec<u32> = f.elements().map(|x| f.degree_over_base(x)).collect();
        assert_eq!(degs.iter().filter(|&&d| d == 2).count(), 2);
        let f = GaloisField::for_q(2, 6).unwrap();
        let deg3 = f.elements().filter(|&x| f.degree_over_base(x) == 3).count();
        assert_eq!(deg3, 6);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn random_triples_satisfy_field_axioms(a in 0u32..625, b in 0u32..625, c in 0u32..625) {
            let f = GaloisField::for_q(5, 4).unwrap();
            let (a, b, c) = (FieldElem(a), FieldElem(b), FieldElem(c));
            prop_assert_eq!(f.mul(f.add(a, b), c), f.add(f.mul(a, c), f.mul(b, c)));
            prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            prop_assert_eq!(f.sub(f.add(a, b), b), a);
            if !a.is_zero() {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
            }
        }
    }
}
