//! Period-lattice coordinates of the `n`-th tensor power of the Carlitz module.
//!
//! Two routes produce `z_1, ..., z_n`:
//! - from `Ω^{-n}`: `z_i = (-1)^n ∂^{n-i}(Ω^{-n})|_{t=θ}`;
//! - from the Laurent expansion of `ω` around `t = θ`, raised to the `n`-th
//!   power: `z_i = (-1)^n c_{-i}` where `ω^n = Σ c_j (t-θ)^j`.

use num_integer::Integer;
use serde::Serialize;

use crate::check::{Residual, Status};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::laurent::LaurentU;
use crate::matrix::{rho, toeplitz_upper, BlockMat, ValueMat};
use crate::special_fn::SpecialFns;
use crate::tseries::TSeries;

/// Relative precision a normalized period must reach.
pub const NORMALIZATION_DIGITS: i64 = 80;

#[derive(Clone, Debug)]
pub struct PeriodVector {
    pub n: u32,
    /// `z[i-1] = z_i`.
    pub z: Vec<LaurentU>,
    /// `z_n` agrees with `π̃^n` to [`NORMALIZATION_DIGITS`] relative digits.
    pub normalized: Status,
}

fn sign(field: &Field, n: u32) -> LaurentU {
    LaurentU::from_int(field, if n.is_multiple_of(2) { 1 } else { -1 })
}

/// Largest power of `p` dividing `n`, as `(s, p^s)`.
pub fn p_part(n: u32, p: u32) -> (u32, u32) {
    let (mut s, mut ps) = (0, 1);
    if n == 0 {
        return (s, ps);
    }
    while n.is_multiple_of(ps * p) {
        s += 1;
        ps *= p;
    }
    (s, ps)
}

/// `z_n / π̃^n = 1` to [`NORMALIZATION_DIGITS`] digits.
pub fn normalization(z_n: &LaurentU, pi_n: &LaurentU) -> Status {
    let ratio = match pi_n.inv() {
        Ok(inv) => z_n * &inv,
        Err(e) => return Status::from_error(&e),
    };
    let one = LaurentU::one(z_n.field());
    if !ratio.agrees(&one) {
        return Status::Fail;
    }
    if ratio.prec() >= NORMALIZATION_DIGITS {
        Status::Pass
    } else {
        Status::Exhausted
    }
}

/// Coordinates through `Ω^{-n}`.
pub fn period_coordinates(fns: &SpecialFns, n: u32) -> Result<PeriodVector> {
    if n == 0 {
        return Err(Error::Invalid("tensor power must be positive".into()));
    }
    let f = fns.field();
    let inv_pow = fns.omega_big_pow(-(n as i64));
    let sgn = sign(f, n);
    let z = (1..=n)
        .map(|i| Ok(&sgn * &inv_pow.hyperderive((n - i) as usize).eval_at_theta(None)?))
        .collect::<Result<Vec<_>>>()?;
    let normalized = normalization(&z[n as usize - 1], &fns.pi_tilde().pow(n));
    Ok(PeriodVector { n, z, normalized })
}

/// Coordinates through the Laurent expansion of `ω` at `θ`.
pub fn period_coordinates_recentered(fns: &SpecialFns, n: u32) -> Result<Vec<LaurentU>> {
    if n == 0 {
        return Err(Error::Invalid("tensor power must be positive".into()));
    }
    let f = fns.field();
    let cert = fns.omega_big_pow(-1).cert();
    // c_{-1}, ..., c_{n-2} of ω; as a polynomial in s = t - θ they give (t-θ)ω
    let c = fns.omega_small().recenter_at_theta(1, n as usize, cert)?;
    let regular = TSeries::polynomial(f, c);
    let mut pw = TSeries::one(f);
    for _ in 0..n {
        pw = &pw * &regular;
        pw = TSeries::polynomial(f, pw.coeffs().iter().take(n as usize).cloned().collect());
    }
    let sgn = sign(f, n);
    Ok((1..=n).map(|i| &sgn * &pw.coeff((n - i) as usize).unwrap()).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct RouteAgreement {
    pub n: u32,
    /// Per coordinate: digits on which the two routes agree, out of those tracked.
    pub agreed: Vec<(i64, i64)>,
    pub status: Status,
}

/// The two routes agree on at least 80% of the tracked digits of every coordinate.
pub fn route_agreement(fns: &SpecialFns, n: u32) -> Result<RouteAgreement> {
    let a = period_coordinates(fns, n)?.z;
    let b = period_coordinates_recentered(fns, n)?;
    let mut status = Status::Pass;
    let mut agreed = Vec::with_capacity(a.len());
    for (x, y) in a.iter().zip(&b) {
        let common = x.prec().min(y.prec());
        let (diff_v, _) = x.residual(y);
        let lead = x.valuation().or(y.valuation());
        let (got, tracked) = match lead {
            // both vanish to their precision
            None => (common, common),
            Some(v) => (diff_v.unwrap_or(common) - v, common - v),
        };
        if diff_v.is_some() && (got * 5 < tracked * 4) {
            status = Status::Fail;
        }
        agreed.push((got, tracked));
    }
    Ok(RouteAgreement { n, agreed, status })
}

#[derive(Clone, Debug, Serialize)]
pub struct ToeplitzReport {
    pub n: u32,
    pub residual: Residual,
}

/// `(ρ_[n-1](Ω^n)|_{t=θ})^{-1} = (-1)^n · Toeplitz(z_n, ..., z_1)`.
pub fn toeplitz_inverse_identity(fns: &SpecialFns, n: u32, z: &[LaurentU]) -> Result<ToeplitzReport> {
    let f = fns.field();
    if z.len() != n as usize || n == 0 {
        return Err(Error::ShapeMismatch(format!("{} coordinates for n = {n}", z.len())));
    }
    let jets: BlockMat = rho(&fns.omega_big_pow(n as i64), n as usize - 1);
    let at_theta: ValueMat = jets.eval_at_theta()?;
    let inv = at_theta.inverse()?;
    let sgn = sign(f, n);
    let row: Vec<LaurentU> = z.iter().rev().map(|x| &sgn * x).collect();
    let rhs = toeplitz_upper(f, &row);
    let (v, p) = inv.residual(&rhs)?;
    Ok(ToeplitzReport { n, residual: Residual::new(v, p, fns.config().n) })
}

#[derive(Clone, Debug, Serialize)]
pub struct VanishingReport {
    pub n: u32,
    /// `p^s`, the largest power of the characteristic dividing `n`.
    pub p_power: u32,
    /// Indices expected to vanish that do, within the zero threshold.
    pub zeros: Status,
    /// Remaining coordinates are nonzero and equal `z_m(n/p^s)^{p^s}`.
    pub powers: Status,
    pub status: Status,
}

/// `z_i = 0` exactly when `p^s ∤ i`, and `z_{p^s m}(n) = z_m(n/p^s)^{p^s}`.
pub fn vanishing_pattern(fns: &SpecialFns, n: u32) -> Result<VanishingReport> {
    let f = fns.field();
    let q1 = f.q() as i64 - 1;
    let (s, ps) = p_part(n, f.p());
    let threshold = fns.config().n - q1 * n as i64;
    let z = period_coordinates(fns, n)?.z;
    let mut zeros = Status::Pass;
    for (idx, zi) in z.iter().enumerate() {
        let i = idx as u32 + 1;
        if i.is_multiple_of(ps) {
            continue;
        }
        zeros = zeros.and(match zi.valuation() {
            Some(v) if v > threshold => Status::Pass,
            Some(_) => Status::Fail,
            None if zi.prec() > threshold => Status::Pass,
            None => Status::Exhausted,
        });
    }
    let mut powers = Status::Pass;
    if ps > 1 {
        let base = period_coordinates(fns, n / ps)?.z;
        for (m, zm) in base.iter().enumerate() {
            let lhs = &z[(m + 1) * ps as usize - 1];
            let rhs = zm.pth_power(s);
            powers = powers.and(if lhs.valuation().is_none() {
                Status::Exhausted
            } else {
                Status::from_bool(lhs.agrees(&rhs))
            });
        }
    } else {
        for zi in &z {
            if zi.valuation().is_none() {
                powers = powers.and(Status::Exhausted);
            }
        }
    }
    Ok(VanishingReport { n, p_power: ps, zeros, powers, status: zeros.and(powers) })
}

#[derive(Clone, Debug, Serialize)]
pub struct FrobeniusLemmaReport {
    pub s: u32,
    pub a: i64,
    pub b: i64,
    /// `ρ_[k](f^{p^s})` is scalar.
    pub scalar: bool,
    pub residual: Residual,
}

/// `ρ_[k](f) = (f^{p^s})^a · ρ_[k](f^n)^b` with `a p^s + b n = 1`, `p^s > k`,
/// for a unit series `f`, checked modulo `t^m`.
pub fn frobenius_power_lemma_check(f: &TSeries, n: u32, k: usize, m: usize) -> Result<FrobeniusLemmaReport> {
    let field = f.field();
    let p = field.p();
    if n == 0 || n.is_multiple_of(p) {
        return Err(Error::Invalid(format!("n = {n} must be prime to the characteristic")));
    }
    let mut s = 0;
    let mut ps: u64 = 1;
    while ps <= k as u64 {
        s += 1;
        ps *= p as u64;
    }
    let g = (ps as i64).extended_gcd(&(n as i64));
    debug_assert_eq!(g.gcd, 1);
    let (a, b) = (g.x, g.y);
    let series = f.truncate_t(m);
    let unit_pow = |e: i64, x: &TSeries| -> Result<TSeries> {
        let pw = x.pow(e.unsigned_abs() as u32);
        if e < 0 {
            pw.inv(m)
        } else {
            Ok(pw)
        }
    };
    let f_ps = series.pow(ps as u32);
    let rho_ps = rho(&f_ps, k);
    let scalar = (0..=k).all(|i| (0..=k).all(|j| i == j || rho_ps.get(i, j).agrees(&TSeries::zero(field))));
    let scalar_part = unit_pow(a, &f_ps)?;
    let rho_n = rho(&series.pow(n), k);
    let rho_n_b = if b >= 0 { rho_n.pow(b as u32)? } else { rho_n.inverse()?.pow(b.unsigned_abs() as u32)? };
    let rhs = rho_n_b.scale(&scalar_part);
    let lhs = rho(&series, k);
    let (v, prec) = lhs.residual(&rhs)?;
    Ok(FrobeniusLemmaReport {
        s,
        a,
        b,
        scalar,
        residual: Residual::new(v, prec, 0),
    })
}

impl PeriodVector {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "z": self.z.iter().map(|x| x.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// Every coordinate has a definite valuation.
pub fn nonvanishing(z: &[LaurentU]) -> Status {
    if z.iter().all(|x| x.valuation().is_some()) {
        Status::Pass
    } else {
        Status::Exhausted
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GaloisField;
    use crate::special_fn::SpecialFnConfig;

    fn fns(q: u64, n: i64, n_max: u32) -> SpecialFns {
        let f = GaloisField::for_q(q, 1).unwrap();
        let m = SpecialFnConfig::m_for_theta(q, n, n_max);
        SpecialFns::new(&f, SpecialFnConfig::auto(q, m, n)).unwrap()
    }

    #[test]
    fn first_coordinate_is_the_period() {
        for q in [2, 3] {
            let s = fns(q, 96, 1);
            let pv = period_coordinates(&s, 1).unwrap();
            assert!(pv.z[0].agrees(s.pi_tilde()));
            assert_eq!(pv.normalized, Status::Pass);
        }
    }

    #[test]
    fn q2_n2_has_vanishing_first_coordinate() {
        let s = fns(2, 96, 2);
        let pv = period_coordinates(&s, 2).unwrap();
        assert_eq!(pv.z[0].valuation(), None);
        assert!(pv.z[0].prec() >= 96);
        assert!(pv.z[1].agrees(&s.pi_tilde().pow(2)));
    }

    #[test]
    fn q3_n2_routes_agree() {
        let s = fns(3, 96, 2);
        let pv = period_coordinates(&s, 2).unwrap();
        assert!(pv.z[0].valuation().is_some());
        assert_eq!(pv.normalized, Status::Pass);
        let r = route_agreement(&s, 2).unwrap();
        assert_eq!(r.status, Status::Pass, "{r:?}");
    }

    #[test]
    fn toeplitz_identity_and_control() {
        let s = fns(3, 96, 2);
        for n in 1..=2 {
            let z = period_coordinates(&s, n).unwrap().z;
            let rep = toeplitz_inverse_identity(&s, n, &z).unwrap();
            assert!(rep.residual.pass(), "{rep:?}");
        }
        let mut z = period_coordinates(&s, 2).unwrap().z;
        z[0] = &z[0] + &LaurentU::one(s.field());
        assert_eq!(toeplitz_inverse_identity(&s, 2, &z).unwrap().residual.status(), Status::Fail);
    }

    #[test]
    fn p_parts() {
        assert_eq!(p_part(6, 2), (1, 2));
        assert_eq!(p_part(4, 2), (2, 4));
        assert_eq!(p_part(5, 3), (0, 1));
        assert_eq!(p_part(9, 3), (2, 9));
    }

    #[test]
    fn frobenius_lemma_on_omega() {
        let s = fns(3, 48, 2);
        let rep = frobenius_power_lemma_check(s.omega_small(), 2, 2, 12).unwrap();
        assert!(rep.scalar);
        assert_eq!(rep.a * 3 + rep.b * 2, 1);
        assert!(rep.residual.pass(), "{rep:?}");
        let trivial = frobenius_power_lemma_check(s.omega_small(), 2, 0, 12).unwrap();
        assert!(trivial.residual.pass());
    }
}
