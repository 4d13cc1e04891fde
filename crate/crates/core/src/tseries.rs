//! Polynomials and truncated power series in `t` with [`LaurentU`] coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{binom_mod_p, Field, FieldElem};
use crate::laurent::{prec_add, LaurentJson, LaurentU, EXACT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Polynomial,
    Series,
}

/// Linear lower bound on the u-valuations of the true t-coefficients:
/// `v(x_m) >= floor + slope * (m - from)` for every `m >= from`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailCert {
    pub from: usize,
    pub floor: i64,
    pub slope: i64,
}

impl TailCert {
    /// Bound valid from `at` on, for `at >= from`.
    pub fn floor_at(&self, at: usize) -> i64 {
        self.floor.saturating_add(self.slope.saturating_mul((at - self.from) as i64))
    }

    /// Weakest common bound of two certificates.
    pub fn meet(a: TailCert, b: TailCert) -> TailCert {
        let from = a.from.max(b.from);
        TailCert { from, floor: a.floor_at(from).min(b.floor_at(from)), slope: a.slope.min(b.slope) }
    }
}

#[derive(Clone, PartialEq)]
pub struct TSeries {
    field: Field,
    coeffs: Vec<LaurentU>,
    // series: coeffs.len() == tprec; polynomial: coeffs.len(), trailing exact zeros trimmed
    tprec: usize,
    kind: Kind,
    cert: Option<TailCert>,
}

impl TSeries {
    pub fn polynomial(field: &Field, mut coeffs: Vec<LaurentU>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_exact_zero()) {
            coeffs.pop();
        }
        TSeries { field: field.clone(), tprec: coeffs.len(), coeffs, kind: Kind::Polynomial, cert: None }
    }

    /// Series known modulo `t^len`, with no claim on the omitted tail.
    pub fn series(field: &Field, coeffs: Vec<LaurentU>) -> Self {
        TSeries { field: field.clone(), tprec: coeffs.len(), coeffs, kind: Kind::Series, cert: None }
    }

    pub fn with_cert(mut self, cert: TailCert) -> Self {
        if self.kind == Kind::Series {
            self.cert = Some(cert);
        }
        self
    }

    pub fn zero(field: &Field) -> Self {
        Self::polynomial(field, Vec::new())
    }

    pub fn one(field: &Field) -> Self {
        Self::constant(LaurentU::one(field))
    }

    pub fn constant(c: LaurentU) -> Self {
        let f = c.field().clone();
        Self::polynomial(&f, vec![c])
    }

    pub fn t(field: &Field) -> Self {
        Self::polynomial(field, vec![LaurentU::zero(field), LaurentU::one(field)])
    }

    /// `t - c`.
    pub fn t_minus(c: &LaurentU) -> Self {
        let f = c.field().clone();
        Self::polynomial(&f, vec![-c, LaurentU::one(&f)])
    }

    pub fn t_minus_theta(field: &Field) -> Self {
        Self::t_minus(&LaurentU::theta(field))
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn is_polynomial(&self) -> bool {
        self.kind == Kind::Polynomial
    }

    /// t-adic truncation order; for polynomials the number of stored coefficients.
    pub fn tprec(&self) -> usize {
        self.tprec
    }

    pub fn cert(&self) -> Option<TailCert> {
        self.cert
    }

    pub fn coeffs(&self) -> &[LaurentU] {
        &self.coeffs
    }

    /// Coefficient of `t^m`; `None` past the truncation of a series.
    pub fn coeff(&self, m: usize) -> Option<LaurentU> {
        match self.coeffs.get(m) {
            Some(c) => Some(c.clone()),
            None if self.is_polynomial() => Some(LaurentU::zero(&self.field)),
            None => None,
        }
    }

    /// Smallest u-precision among stored coefficients.
    pub fn min_prec(&self) -> i64 {
        self.coeffs.iter().map(|c| c.prec()).min().unwrap_or(EXACT)
    }

    fn known_len(&self) -> Option<usize> {
        match self.kind {
            Kind::Polynomial => None,
            Kind::Series => Some(self.tprec),
        }
    }

    /// Drops to a series known modulo `t^m`.
    pub fn truncate_t(&self, m: usize) -> Self {
        let m = self.known_len().map_or(m, |k| k.min(m));
        let coeffs = (0..m).map(|i| self.coeff(i).unwrap()).collect();
        let cert = match self.kind {
            Kind::Series => self.cert,
            Kind::Polynomial => Some(self.poly_cert()),
        };
        let mut out = Self::series(&self.field, coeffs);
        out.cert = cert;
        out
    }

    /// Forgets every u-digit from `u^prec` on.
    pub fn truncate_u(&self, prec: i64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = c.truncate(prec);
        }
        out
    }

    pub fn map_coeffs(&self, f: impl Fn(&LaurentU) -> LaurentU) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = f(c);
        }
        if out.is_polynomial() {
            return Self::polynomial(&self.field, out.coeffs);
        }
        out
    }

    pub fn scale(&self, c: &LaurentU) -> Self {
        let mut out = self.map_coeffs(|x| x * c);
        if let Some(cert) = out.cert.as_mut() {
            let v = c.val_floor();
            cert.floor = prec_add(cert.floor, v).min(EXACT / 4);
        }
        out
    }

    pub fn scale_elem(&self, c: FieldElem) -> Self {
        self.map_coeffs(|x| x.scale(c))
    }

    fn poly_cert(&self) -> TailCert {
        TailCert { from: self.coeffs.len(), floor: EXACT / 4, slope: EXACT / 4 }
    }

    fn add_impl(&self, other: &Self, negate: bool) -> Self {
        let f = &self.field;
        let len = match (self.known_len(), other.known_len()) {
            (None, None) => self.coeffs.len().max(other.coeffs.len()),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (Some(a), Some(b)) => a.min(b),
        };
        let coeffs = (0..len)
            .map(|m| {
                let a = self.coeff(m).unwrap();
                let b = other.coeff(m).unwrap();
                if negate {
                    &a - &b
                } else {
                    &a + &b
                }
            })
            .collect();
        if self.is_polynomial() && other.is_polynomial() {
            return Self::polynomial(f, coeffs);
        }
        let ca = if self.is_polynomial() { Some(self.poly_cert()) } else { self.cert };
        let cb = if other.is_polynomial() { Some(other.poly_cert()) } else { other.cert };
        let mut out = Self::series(f, coeffs);
        out.cert = match (ca, cb) {
            (Some(a), Some(b)) => Some(TailCert::meet(a, b)),
            _ => None,
        };
        out
    }

    fn mul_impl(&self, other: &Self) -> Self {
        let f = &self.field;
        let both_poly = self.is_polynomial() && other.is_polynomial();
        let len = match (self.known_len(), other.known_len()) {
            (None, None) if self.coeffs.is_empty() || other.coeffs.is_empty() => 0,
            (None, None) => self.coeffs.len() + other.coeffs.len() - 1,
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (Some(a), Some(b)) => a.min(b),
        };
        let (la, lb) = (self.coeffs.len(), other.coeffs.len());
        let coeff = |m: usize| {
            let mut acc = LaurentU::zero(f);
            if la == 0 || lb == 0 {
                return acc;
            }
            let lo = (m + 1).saturating_sub(lb);
            for i in lo..=m.min(la - 1) {
                let (a, b) = (&self.coeffs[i], &other.coeffs[m - i]);
                if a.is_exact_zero() || b.is_exact_zero() {
                    continue;
                }
                acc = &acc + &(a * b);
            }
            acc
        };
        let coeffs: Vec<LaurentU> =
            if len > 24 { (0..len).into_par_iter().map(coeff).collect() } else { (0..len).map(coeff).collect() };
        if both_poly {
            return Self::polynomial(f, coeffs);
        }
        let mut out = Self::series(f, coeffs);
        out.cert = match (self.kind, other.kind) {
            (Kind::Polynomial, Kind::Series) => other.cert.map(|c| poly_times_cert(self, c)),
            (Kind::Series, Kind::Polynomial) => self.cert.map(|c| poly_times_cert(other, c)),
            _ => None,
        };
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(&self.field);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Hasse derivative `∂^n`.
    pub fn hyperderive(&self, n: usize) -> Self {
        let f = &self.field;
        let p = f.p();
        let len = self.coeffs.len().saturating_sub(n);
        let coeffs: Vec<LaurentU> = (0..len)
            .map(|m| {
                let c = binom_mod_p((m + n) as u64, n as u64, p);
                match c {
                    0 => LaurentU::zero(f),
                    1 => self.coeffs[m + n].clone(),
                    c => self.coeffs[m + n].scale(f.from_int(c as i64)),
                }
            })
            .collect();
        match self.kind {
            Kind::Polynomial => Self::polynomial(f, coeffs),
            Kind::Series => {
                let mut out = Self::series(f, coeffs);
                out.cert = self.cert.map(|c| {
                    if c.from >= n {
                        TailCert { from: c.from - n, ..c }
                    } else {
                        TailCert { from: 0, floor: c.floor_at(n), slope: c.slope }
                    }
                });
                out
            }
        }
    }

    /// Coefficient-wise `τ^k`; `t` is fixed.
    pub fn twist(&self, k: i32) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(|c| c.coeff_twist(k)).collect::<Result<Vec<_>>>()?;
        let q = self.field.q() as i64;
        let factor = q.pow(k.unsigned_abs());
        let mut out = self.clone();
        out.coeffs = coeffs;
        out.cert = self.cert.map(|c| {
            if k >= 0 {
                TailCert {
                    floor: c.floor.saturating_mul(factor),
                    slope: c.slope.saturating_mul(factor),
                    ..c
                }
            } else {
                TailCert { floor: c.floor.div_euclid(factor), slope: c.slope.div_euclid(factor), ..c }
            }
        });
        Ok(out)
    }

    /// Inverse of a series whose constant term is invertible, modulo `t^m`.
    pub fn inv(&self, m: usize) -> Result<Self> {
        let f = &self.field;
        let m = self.known_len().map_or(m, |k| k.min(m));
        let a0 = self.coeff(0).unwrap_or_else(|| LaurentU::zero_to(f, EXACT / 4));
        let a0_inv = match a0.inv() {
            Err(Error::UnboundedInverse) => a0.inv_to(self.min_prec().min(EXACT / 4)),
            r => r,
        }?;
        let neg_inv = -&a0_inv;
        let tail: Vec<(usize, &LaurentU)> =
            self.coeffs.iter().enumerate().skip(1).filter(|(_, c)| !c.is_exact_zero()).collect();
        let mut out: Vec<LaurentU> = Vec::with_capacity(m);
        if m > 0 {
            out.push(a0_inv);
        }
        for k in 1..m {
            let mut s = LaurentU::zero(f);
            for &(i, a) in &tail {
                if i > k {
                    break;
                }
                s = &s + &(a * &out[k - i]);
            }
            out.push(&neg_inv * &s);
        }
        Ok(Self::series(f, out))
    }

    /// `f(θ)`. The omitted tail is bounded by `tail_bound` when given,
    /// otherwise by the certificate (exact for polynomials).
    pub fn eval_at_theta(&self, tail_bound: Option<i64>) -> Result<LaurentU> {
        let f = &self.field;
        let q1 = f.q() as i64 - 1;
        let mut acc = LaurentU::zero(f);
        let mut vals = Vec::with_capacity(self.coeffs.len());
        for (m, c) in self.coeffs.iter().enumerate() {
            let mut term = c.shift(-q1 * m as i64);
            if m % 2 == 1 && f.p() != 2 {
                term = -&term;
            }
            vals.push(term.valuation());
            acc = &acc + &term;
        }
        if self.is_polynomial() {
            return Ok(match tail_bound {
                Some(b) => acc.truncate(b),
                None => acc,
            });
        }
        let tail = match tail_bound {
            Some(b) => {
                let visible: Vec<Option<i64>> = vals.iter().map(|v| v.filter(|&v| v < b)).collect();
                check_convergence(&visible, f.q() as usize)?;
                b
            }
            None => {
                let cert = self.cert.ok_or(Error::MissingTailBound)?;
                if cert.from > self.tprec {
                    return Err(Error::MissingTailBound);
                }
                if cert.slope <= q1 {
                    return Err(Error::DivergentEvaluation(format!(
                        "tail slope {} does not beat θ growth {}",
                        cert.slope, q1
                    )));
                }
                prec_add(cert.floor_at(self.tprec), -q1 * self.tprec as i64)
            }
        };
        Ok(acc.truncate(tail))
    }

    /// `f(ζ)` for a constant `ζ`.
    pub fn eval_at_zeta(&self, zeta: FieldElem, tail_bound: Option<i64>) -> Result<LaurentU> {
        let f = &self.field;
        let mut acc = LaurentU::zero(f);
        let mut pw = f.one();
        for c in &self.coeffs {
            if !pw.is_zero() {
                acc = &acc + &c.scale(pw);
            }
            pw = f.mul(pw, zeta);
        }
        if self.is_polynomial() {
            return Ok(match tail_bound {
                Some(b) => acc.truncate(b),
                None => acc,
            });
        }
        let tail = match tail_bound {
            Some(b) => b,
            None => {
                let cert = self.cert.ok_or(Error::MissingTailBound)?;
                if cert.from > self.tprec {
                    return Err(Error::MissingTailBound);
                }
                if cert.slope <= 0 {
                    return Err(Error::DivergentEvaluation("tail valuations do not grow".into()));
                }
                cert.floor_at(self.tprec)
            }
        };
        Ok(acc.truncate(tail))
    }

    /// Laurent coefficients `c_{-pole}, ..., c_{terms-pole-1}` of `f` around `t = θ`.
    ///
    /// `regular_cert` is a tail certificate for `(t-θ)^pole f`; the one
    /// propagated from `f` is used when absent.
    pub fn recenter_at_theta(
        &self,
        pole_order: usize,
        terms: usize,
        regular_cert: Option<TailCert>,
    ) -> Result<Vec<LaurentU>> {
        let mut g = &Self::t_minus_theta(&self.field).pow(pole_order as u32) * self;
        if let Some(c) = regular_cert {
            g = g.with_cert(c);
        }
        (0..terms).map(|j| g.hyperderive(j).eval_at_theta(None)).collect()
    }

    /// Smallest u-valuation among coefficients of `self - other`, over the common t-range.
    pub fn residual(&self, other: &Self) -> (Option<i64>, i64) {
        let d = self - other;
        let v = d.coeffs.iter().filter_map(|c| c.valuation()).min();
        (v, d.min_prec())
    }

    /// Whether `self - other` vanishes at the tracked precision.
    pub fn agrees(&self, other: &Self) -> bool {
        self.residual(other).0.is_none()
    }

    pub fn to_json(&self) -> TSeriesJson {
        TSeriesJson {
            tprec: self.tprec,
            kind: self.kind,
            coeffs: self.coeffs.iter().map(|c| c.to_json()).collect(),
            cert: self.cert,
        }
    }

    pub fn from_json(field: &Field, json: &TSeriesJson) -> Result<Self> {
        if json.tprec != json.coeffs.len() {
            return Err(Error::Invalid("tprec must equal the number of stored coefficients".into()));
        }
        let coeffs = json.coeffs.iter().map(|c| LaurentU::from_json(field, c)).collect::<Result<Vec<_>>>()?;
        Ok(match json.kind {
            Kind::Polynomial => {
                if json.cert.is_some() {
                    return Err(Error::Invalid("polynomials carry no tail certificate".into()));
                }
                Self::polynomial(field, coeffs)
            }
            Kind::Series => {
                let mut s = Self::series(field, coeffs);
                s.cert = json.cert;
                s
            }
        })
    }
}

fn poly_times_cert(poly: &TSeries, c: TailCert) -> TailCert {
    let deg = poly.coeffs.len().saturating_sub(1);
    let s = c.slope;
    let shift = poly
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let v = b.val_floor().min(EXACT / 4);
            if c.from == 0 {
                v.saturating_sub(s.saturating_mul(i as i64))
            } else {
                v.saturating_add(s.saturating_mul((deg - i) as i64))
            }
        })
        .min()
        .unwrap_or(EXACT / 4);
    let from = if c.from == 0 { 0 } else { c.from + deg };
    TailCert { from, floor: c.floor.saturating_add(shift).min(EXACT / 4), slope: s }
}

/// Guards a caller-supplied tail bound against series whose terms stop
/// gaining valuation: the smallest known valuation among the last `q`
/// nonzero increments must exceed the smallest among the `q` before them.
fn check_convergence(vals: &[Option<i64>], q: usize) -> Result<()> {
    let known: Vec<i64> = vals.iter().filter_map(|v| *v).collect();
    if known.len() < 2 * q {
        return Ok(());
    }
    let n = known.len();
    let last = known[n - q..].iter().min().unwrap();
    let before = known[n - 2 * q..n - q].iter().min().unwrap();
    if last <= before {
        return Err(Error::DivergentEvaluation(format!(
            "increment valuations stalled: {before} then {last}"
        )));
    }
    Ok(())
}

/// Wire form: `{"tprec":M,"kind":"series","coeffs":[...]}` with an optional `"cert"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TSeriesJson {
    pub tprec: usize,
    pub kind: Kind,
    pub coeffs: Vec<LaurentJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cert: Option<TailCert>,
}

impl fmt::Debug for TSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TSeries({:?}, tprec {}, [", self.kind, self.tprec)?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "t^{i}: {c}")?;
        }
        write!(f, "])")
    }
}

impl fmt::Display for TSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_exact_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*t")?,
                _ => write!(f, "({c})*t^{i}")?,
            }
        }
        match self.kind {
            Kind::Polynomial if first => write!(f, "0"),
            Kind::Polynomial => Ok(()),
            Kind::Series if first => write!(f, "O(t^{})", self.tprec),
            Kind::Series => write!(f, " + O(t^{})", self.tprec),
        }
    }
}

impl<'a> Add<&'a TSeries> for &'a TSeries {
    type Output = TSeries;
    fn add(self, rhs: &TSeries) -> TSeries {
        self.add_impl(rhs, false)
    }
}

impl<'a> Sub<&'a TSeries> for &'a TSeries {
    type Output = TSeries;
    fn sub(self, rhs: &TSeries) -> TSeries {
        self.add_impl(rhs, true)
    }
}

impl<'a> Mul<&'a TSeries> for &'a TSeries {
    type Output = TSeries;
    fn mul(self, rhs: &TSeries) -> TSeries {
        self.mul_impl(rhs)
    }
}

impl Neg for &TSeries {
    type Output = TSeries;
    fn neg(self) -> TSeries {
        self.map_coeffs(|c| -c)
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use crate::field::{binom_mod_p, GaloisField};
    use proptest::prelude::*;

    fn arb_poly(q: u64, max_deg: usize) -> impl Strategy<Value = TSeries> {
        let f = GaloisField::for_q(q, 1).unwrap();
        let order = f.order() as u32;
        prop::collection::vec(prop::collection::vec(0..order, 0..4), 0..=max_deg + 1).prop_map(move |cs| {
            let coeffs = cs
                .into_iter()
                .enumerate()
                .map(|(i, digits)| {
                    let d = digits.into_iter().map(|c| f.from_packed(c).unwrap()).collect();
                    LaurentU::from_parts(&f, i as i64 - 2, d, EXACT)
                })
                .collect();
            TSeries::polynomial(&f, coeffs)
        })
    }

    proptest! {
        #[test]
        fn leibniz(a in arb_poly(2, 6), b in arb_poly(2, 6), n in 0usize..7) {
            let lhs = (&a * &b).hyperderive(n);
            let mut rhs = TSeries::zero(a.field());
            for i in 0..=n {
                rhs = &rhs + &(&a.hyperderive(i) * &b.hyperderive(n - i));
            }
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn composition(a in arb_poly(3, 12), n in 0usize..7, m in 0usize..7) {
            let lhs = a.hyperderive(m).hyperderive(n);
            let c = binom_mod_p((n + m) as u64, n as u64, 3);
            let rhs = a.hyperderive(n + m).scale_elem(a.field().from_int(c as i64));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn twist_commutes_with_hyperderive(a in arb_poly(3, 8), n in 0usize..5) {
            prop_assert_eq!(a.twist(1).unwrap().hyperderive(n), a.hyperderive(n).twist(1).unwrap());
        }

        #[test]
        fn twist_is_multiplicative(a in arb_poly(2, 5), b in arb_poly(2, 5)) {
            prop_assert_eq!((&a * &b).twist(1).unwrap(), &a.twist(1).unwrap() * &b.twist(1).unwrap());
            prop_assert_eq!(a.twist(1).unwrap().twist(-1).unwrap(), a);
        }

        #[test]
        fn taylor_expansion(a in arb_poly(3, 8), x in -3i64..3) {
            // f(t + X) with X = u^x
            let f = a.field().clone();
            let shift = TSeries::polynomial(&f, vec![LaurentU::monomial(&f, f.one(), x), LaurentU::one(&f)]);
            let mut composed = TSeries::zero(&f);
            for (i, c) in a.coeffs().iter().enumerate() {
                composed = &composed + &shift.pow(i as u32).scale(c);
            }
            let xx = LaurentU::monomial(&f, f.one(), x);
            let mut taylor = TSeries::zero(&f);
            for n in 0..=a.coeffs().len() {
                taylor = &taylor + &a.hyperderive(n).scale(&xx.pow(n as u32));
            }
            prop_assert_eq!(composed, taylor);
        }

        #[test]
        fn frobenius_power_collapse(a in arb_poly(2, 4), j in 0usize..12) {
            let f4 = a.pow(4);
            let d = f4.hyperderive(j);
            if j % 4 != 0 {
                prop_assert_eq!(d, TSeries::zero(a.field()));
            } else {
                let e = a.hyperderive(j / 4);
                prop_assert_eq!(d, e.pow(4));
            }
        }
    }
}
