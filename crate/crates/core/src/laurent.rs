//! Truncated Laurent series in the uniformizer `u = 1/λ`, where `λ^(q-1) = -θ`.
//!
//! Values carry an absolute precision: every coefficient of `u^m` with
//! `m < prec` is known, everything from `u^prec` on is unknown. Exact values
//! (polynomials in `θ` and `λ`) use the [`EXACT`] sentinel.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldElem};

/// Precision marker for exactly known values.
pub const EXACT: i64 = i64::MAX;

const FINITE_MAX: i64 = i64::MAX / 4;
const FINITE_MIN: i64 = i64::MIN / 4;

/// `a + b` on precisions, `EXACT` absorbing.
pub(crate) fn prec_add(a: i64, b: i64) -> i64 {
    if a == EXACT || b == EXACT {
        EXACT
    } else {
        (a as i128 + b as i128).clamp(FINITE_MIN as i128, FINITE_MAX as i128) as i64
    }
}

fn prec_scale(a: i64, factor: u64) -> i64 {
    if a == EXACT {
        EXACT
    } else {
        (a as i128 * factor as i128).clamp(FINITE_MIN as i128, FINITE_MAX as i128) as i64
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

#[derive(Clone)]
pub struct LaurentU {
    field: Field,
    lead: i64,
    // first and last entries nonzero; empty means no known nonzero digit
    coeffs: Vec<FieldElem>,
    prec: i64,
}

impl LaurentU {
    /// Builds `sum coeffs[i] u^(lead+i) + O(u^prec)`, dropping digits at or past `prec`.
    pub fn from_parts(field: &Field, lead: i64, mut coeffs: Vec<FieldElem>, prec: i64) -> Self {
        if prec != EXACT {
            let keep = (prec as i128 - lead as i128).clamp(0, coeffs.len() as i128) as usize;
            coeffs.truncate(keep);
        }
        let mut x = LaurentU { field: field.clone(), lead, coeffs, prec };
        x.normalize();
        x
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let skip = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if skip > 0 {
            self.coeffs.drain(..skip);
            self.lead += skip as i64;
        }
        if self.coeffs.is_empty() {
            self.lead = if self.prec == EXACT { 0 } else { self.prec };
        }
    }

    pub fn zero(field: &Field) -> Self {
        Self::from_parts(field, 0, Vec::new(), EXACT)
    }

    /// `O(u^prec)`.
    pub fn zero_to(field: &Field, prec: i64) -> Self {
        Self::from_parts(field, prec, Vec::new(), prec)
    }

    pub fn one(field: &Field) -> Self {
        Self::constant(field, field.one())
    }

    pub fn constant(field: &Field, c: FieldElem) -> Self {
        Self::monomial(field, c, 0)
    }

    pub fn from_int(field: &Field, n: i64) -> Self {
        Self::constant(field, field.from_int(n))
    }

    /// `c u^exp`, exact.
    pub fn monomial(field: &Field, c: FieldElem, exp: i64) -> Self {
        Self::from_parts(field, exp, vec![c], EXACT)
    }

    pub fn u(field: &Field) -> Self {
        Self::monomial(field, field.one(), 1)
    }

    /// `λ = u^-1`.
    pub fn lambda(field: &Field) -> Self {
        Self::monomial(field, field.one(), -1)
    }

    /// `θ = -λ^(q-1)`.
    pub fn theta(field: &Field) -> Self {
        let q = field.q() as i64;
        Self::monomial(field, field.from_int(-1), -(q - 1))
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec == EXACT
    }

    /// u-adic valuation of the first known nonzero digit; `None` when no digit is known nonzero.
    pub fn valuation(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.lead)
    }

    /// Valuation, or the precision for values indistinguishable from zero.
    pub(crate) fn val_floor(&self) -> i64 {
        self.valuation().unwrap_or(self.prec)
    }

    /// True when no known digit is nonzero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty() && self.prec == EXACT
    }

    pub fn coeff(&self, exp: i64) -> FieldElem {
        if exp < self.lead {
            return FieldElem::ZERO;
        }
        self.coeffs.get((exp - self.lead) as usize).copied().unwrap_or(FieldElem::ZERO)
    }

    /// Nonzero digits as `(exponent, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, FieldElem)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, &c)| (self.lead + i as i64, c))
    }

    fn nonzero_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    fn same_field(&self, other: &Self) {
        debug_assert!(
            Arc::ptr_eq(&self.field, &other.field) || *self.field == *other.field,
            "operands live in different fields"
        );
    }

    /// Forgets every digit from `u^prec` on.
    pub fn truncate(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        Self::from_parts(&self.field, self.lead, self.coeffs.clone(), prec)
    }

    /// Multiplication by `u^k`.
    pub fn shift(&self, k: i64) -> Self {
        let mut out = self.clone();
        out.prec = prec_add(self.prec, k);
        if !out.coeffs.is_empty() {
            out.lead += k;
        } else if out.prec != EXACT {
            out.lead = out.prec;
        }
        out
    }

    pub fn scale(&self, c: FieldElem) -> Self {
        if c.is_zero() {
            return Self::zero(&self.field);
        }
        let f = &self.field;
        let coeffs = self.coeffs.iter().map(|&x| f.mul(x, c)).collect();
        Self::from_parts(f, self.lead, coeffs, self.prec)
    }

    fn add_impl(&self, other: &Self, negate: bool) -> Self {
        self.same_field(other);
        let f = &self.field;
        let prec = self.prec.min(other.prec);
        let (a, b) = (self, other);
        if a.coeffs.is_empty() && b.coeffs.is_empty() {
            return Self::zero_to(f, prec);
        }
        let lo = match (a.coeffs.is_empty(), b.coeffs.is_empty()) {
            (true, _) => b.lead,
            (_, true) => a.lead,
            _ => a.lead.min(b.lead),
        };
        let end_a = if a.coeffs.is_empty() { lo } else { a.lead + a.coeffs.len() as i64 };
        let end_b = if b.coeffs.is_empty() { lo } else { b.lead + b.coeffs.len() as i64 };
        let hi = end_a.max(end_b).min(prec.max(lo));
        if hi <= lo {
            return Self::zero_to(f, prec);
        }
        let mut out = vec![FieldElem::ZERO; (hi - lo) as usize];
        for (e, c) in a.terms() {
            if e < hi {
                out[(e - lo) as usize] = c;
            }
        }
        for (e, c) in b.terms() {
            if e < hi {
                let slot = &mut out[(e - lo) as usize];
                let c = if negate { f.neg(c) } else { c };
                *slot = f.add(*slot, c);
            }
        }
        Self::from_parts(f, lo, out, prec)
    }

    fn mul_impl(&self, other: &Self) -> Self {
        self.same_field(other);
        let f = &self.field;
        if self.is_exact_zero() || other.is_exact_zero() {
            return Self::zero(f);
        }
        let prec = prec_add(self.prec, other.val_floor()).min(prec_add(other.prec, self.val_floor()));
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero_to(f, prec);
        }
        let lo = self.lead + other.lead;
        let full_hi = lo + (self.coeffs.len() + other.coeffs.len() - 1) as i64;
        let hi = full_hi.min(prec);
        if hi <= lo {
            return Self::zero_to(f, prec);
        }
        let len = (hi - lo) as usize;
        let mut out = vec![FieldElem::ZERO; len];
        // iterate over the sparser operand
        let (sparse, dense) = if self.nonzero_count() <= other.nonzero_count() {
            (self, other)
        } else {
            (other, self)
        };
        let p2 = f.p() == 2;
        for (i, &c) in sparse.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if i >= len {
                break;
            }
            let room = (len - i).min(dense.coeffs.len());
            let dst = &mut out[i..i + room];
            if c == f.one() && p2 {
                for (slot, &y) in dst.iter_mut().zip(&dense.coeffs[..room]) {
                    *slot = f.add(*slot, y);
                }
            } else {
                for (slot, &y) in dst.iter_mut().zip(&dense.coeffs[..room]) {
                    if !y.is_zero() {
                        *slot = f.add(*slot, f.mul(c, y));
                    }
                }
            }
        }
        Self::from_parts(f, lo, out, prec)
    }

    /// Inverse at the precision the input supports: `prec - 2 v(x)`.
    ///
    /// Exact monomials invert exactly; other exact values need [`LaurentU::inv_to`].
    pub fn inv(&self) -> Result<Self> {
        self.inv_capped(None)
    }

    /// Inverse truncated at `cap` (exact monomials stay exact).
    pub fn inv_to(&self, cap: i64) -> Result<Self> {
        self.inv_capped(Some(cap))
    }

    fn inv_capped(&self, cap: Option<i64>) -> Result<Self> {
        let f = &self.field;
        let v = self.valuation().ok_or(Error::InversionOfZero)?;
        let a0_inv = f.inv(self.coeffs[0]).expect("leading digit is nonzero");
        if self.coeffs.len() == 1 && self.is_exact() {
            return Ok(Self::monomial(f, a0_inv, -v));
        }
        let natural = if self.is_exact() { None } else { Some(prec_add(self.prec, -2 * v)) };
        let prec = match (natural, cap) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => return Err(Error::UnboundedInverse),
        };
        let len = (prec as i128 + v as i128).max(0) as usize;
        let neg_a0_inv = f.neg(a0_inv);
        let tail: Vec<(usize, FieldElem)> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, &c)| (i, c))
            .collect();
        let mut y = vec![FieldElem::ZERO; len];
        if len > 0 {
            y[0] = a0_inv;
        }
        for k in 1..len {
            let mut s = FieldElem::ZERO;
            for &(i, a) in &tail {
                if i > k {
                    break;
                }
                let yk = y[k - i];
                if !yk.is_zero() {
                    s = f.add(s, f.mul(a, yk));
                }
            }
            y[k] = f.mul(neg_a0_inv, s);
        }
        Ok(Self::from_parts(f, -v, y, prec))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(&self.field);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `x^(p^s)` through the Frobenius of `F_{q^d}((u))`; precision scales by `p^s`.
    pub fn pth_power(&self, s: u32) -> Self {
        let f = &self.field;
        let factor = (f.p() as u64).pow(s);
        let terms = self.terms().map(|(e, c)| (e * factor as i64, f.pth_power(c, s)));
        Self::from_sparse(f, terms, prec_scale(self.prec, factor))
    }

    fn from_sparse(field: &Field, terms: impl Iterator<Item = (i64, FieldElem)>, prec: i64) -> Self {
        let terms: Vec<_> = terms.collect();
        if terms.is_empty() {
            return if prec == EXACT { Self::zero(field) } else { Self::zero_to(field, prec) };
        }
        let lo = terms.iter().map(|t| t.0).min().unwrap();
        let hi = terms.iter().map(|t| t.0).max().unwrap();
        let mut coeffs = vec![FieldElem::ZERO; (hi - lo + 1) as usize];
        for (e, c) in terms {
            coeffs[(e - lo) as usize] = c;
        }
        Self::from_parts(field, lo, coeffs, prec)
    }

    /// `x^(q^k)` as an element of `F_{q^d}((u))`: exponents scale by `q^k`
    /// and digits go through `Frobenius^k`. For `k < 0` the input must be a
    /// `q^|k|`-th power at its tracked precision.
    pub fn coeff_twist(&self, k: i32) -> Result<Self> {
        let f = &self.field;
        let q = f.q();
        if k == 0 {
            return Ok(self.clone());
        }
        let power = q.pow(k.unsigned_abs());
        if k > 0 {
            let terms = self.terms().map(|(e, c)| (e * power as i64, f.frobenius(c, k as i64)));
            return Ok(Self::from_sparse(f, terms, prec_scale(self.prec, power)));
        }
        let pw = power as i64;
        let mut terms = Vec::with_capacity(self.coeffs.len() / power as usize + 1);
        for (e, c) in self.terms() {
            if e.rem_euclid(pw) != 0 {
                return Err(Error::PrecisionLoss { exponent: e, power: k.unsigned_abs() });
            }
            terms.push((e / pw, f.frobenius(c, k as i64)));
        }
        let prec = if self.prec == EXACT { EXACT } else { div_ceil(self.prec, pw) };
        Ok(Self::from_sparse(f, terms.into_iter(), prec))
    }

    /// Whether `self - other` vanishes at the common precision.
    pub fn agrees(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }

    /// Absolute u-adic residual `(valuation, precision)` of `self - other`.
    pub fn residual(&self, other: &Self) -> (Option<i64>, i64) {
        let d = self - other;
        (d.valuation(), d.prec)
    }

    pub fn to_json(&self) -> LaurentJson {
        LaurentJson {
            lead: self.lead,
            prec: (self.prec != EXACT).then_some(self.prec),
            coeffs: self.coeffs.iter().map(|&c| self.field.coords(c)).collect(),
        }
    }

    pub fn from_json(field: &Field, json: &LaurentJson) -> Result<Self> {
        let prec = json.prec.unwrap_or(EXACT);
        if prec != EXACT && !(FINITE_MIN..=FINITE_MAX).contains(&prec) {
            return Err(Error::Invalid("precision out of range".into()));
        }
        if !(FINITE_MIN..=FINITE_MAX).contains(&json.lead) {
            return Err(Error::Invalid("leading exponent out of range".into()));
        }
        if prec != EXACT && json.lead as i128 + json.coeffs.len() as i128 > prec as i128 {
            return Err(Error::Invalid("digits stored past the precision".into()));
        }
        let coeffs = json.coeffs.iter().map(|c| field.from_coords(c)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_parts(field, json.lead, coeffs, prec))
    }
}

/// Wire form: `{"lead":-2,"prec":64,"coeffs":[[...],...]}`, `prec` null when exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaurentJson {
    pub lead: i64,
    pub prec: Option<i64>,
    pub coeffs: Vec<Vec<u32>>,
}

impl fmt::Debug for LaurentU {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LaurentU {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c == self.field.one() {
                write!(f, "u^{e}")?;
            } else {
                write!(f, "{}*u^{e}", c.packed())?;
            }
        }
        if self.prec != EXACT {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "O(u^{})", self.prec)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl PartialEq for LaurentU {
    fn eq(&self, other: &Self) -> bool {
        self.prec == other.prec && self.coeffs == other.coeffs && (self.coeffs.is_empty() || self.lead == other.lead)
    }
}

impl<'a> Add<&'a LaurentU> for &'a LaurentU {
    type Output = LaurentU;
    fn add(self, rhs: &LaurentU) -> LaurentU {
        self.add_impl(rhs, false)
    }
}

impl<'a> Sub<&'a LaurentU> for &'a LaurentU {
    type Output = LaurentU;
    fn sub(self, rhs: &LaurentU) -> LaurentU {
        self.add_impl(rhs, true)
    }
}

impl<'a> Mul<&'a LaurentU> for &'a LaurentU {
    type Output = LaurentU;
    fn mul(self, rhs: &LaurentU) -> LaurentU {
        self.mul_impl(rhs)
    }
}

impl Neg for &LaurentU {
    type Output = LaurentU;
    fn neg(self) -> LaurentU {
        self.scale(self.field.from_int(-1))
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use crate::field::GaloisField;
    use proptest::prelude::*;

    fn arb_laurent(q: u64) -> impl Strategy<Value = LaurentU> {
        let f = GaloisField::for_q(q, 2).unwrap();
        let order = f.order() as u32;
        (-6i64..6, prop::collection::vec(0..order, 1..12), 10i64..40).prop_map(move |(lead, cs, extra)| {
            let coeffs = cs.into_iter().map(|c| f.from_packed(c).unwrap()).collect::<Vec<_>>();
            let prec = lead + coeffs.len() as i64 + extra;
            LaurentU::from_parts(&f, lead, coeffs, prec)
        })
    }

    proptest! {
        #[test]
        fn ring_axioms_to_precision(x in arb_laurent(3), y in arb_laurent(3), z in arb_laurent(3)) {
            prop_assert!((&(&x + &y) + &z).agrees(&(&x + &(&y + &z))));
            prop_assert!((&x * &(&y + &z)).agrees(&(&(&x * &y) + &(&x * &z))));
            prop_assert!((&(&x * &y) * &z).agrees(&(&x * &(&y * &z))));
        }

        #[test]
        fn valuation_is_additive(x in arb_laurent(2), y in arb_laurent(2)) {
            if let (Some(a), Some(b)) = (x.valuation(), y.valuation()) {
                prop_assert_eq!((&x * &y).valuation(), Some(a + b));
            }
        }

        #[test]
        fn twist_is_multiplicative(x in arb_laurent(3), y in arb_laurent(3), k in 1i32..3) {
            let lhs = (&x * &y).coeff_twist(k).unwrap();
            let rhs = &x.coeff_twist(k).unwrap() * &y.coeff_twist(k).unwrap();
            prop_assert!(lhs.agrees(&rhs));
            prop_assert_eq!(x.coeff_twist(k).unwrap().coeff_twist(-k).unwrap(), x.clone());
        }

        #[test]
        fn normalization_is_idempotent(x in arb_laurent(2)) {
            let again = LaurentU::from_parts(x.field(), x.lead, x.coeffs.clone(), x.prec);
            prop_assert_eq!(again, x);
        }

        #[test]
        fn inverse_to_precision(x in arb_laurent(3)) {
            if x.valuation().is_some() {
                let inv = x.inv().unwrap();
                prop_assert!((&x * &inv).agrees(&LaurentU::one(x.field())));
            }
        }
    }
}
