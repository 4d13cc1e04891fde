//! The Anderson-Thakur function `ω`, its companion `Ω`, the Carlitz period `π̃`,
//! and the torsion polynomials `β`, `ξ_n`.
//!
//! `Ω = λ^{-q} ∏_{j≥1} (1 - t/θ^{q^j})` and `π̃ = λθ ∏_{j≥1} (1 - θ^{1-q^j})^{-1}` are
//! computed from their truncated products; `ω = 1/((t-θ)Ω)` by series inversion.

use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::laurent::LaurentU;
use crate::check::Residual;
use crate::tseries::{TSeries, TailCert};

/// Largest valuation bound a certificate ever claims; keeps the arithmetic in range.
const CERT_CAP: i64 = 1 << 24;

/// Truncation parameters. `n` is the u-adic precision targeted for evaluated
/// values; coefficients are carried at the larger [`SpecialFnConfig::working_prec`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialFnConfig {
    #[serde(rename = "J")]
    pub j: u32,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: i64,
}

fn qpow(q: u64, e: u32) -> i64 {
    (q as i128).checked_pow(e).map_or(i64::MAX, |v| v.min(i64::MAX as i128) as i64)
}

impl SpecialFnConfig {
    pub fn new(q: u64, j: u32, m: usize, n: i64) -> Result<Self> {
        let cfg = SpecialFnConfig { j, m, n };
        cfg.validate(q)?;
        Ok(cfg)
    }

    /// Smallest admissible cutoff that leaves every stored digit unaffected.
    pub fn auto(q: u64, m: usize, n: i64) -> Self {
        let mut cfg = SpecialFnConfig { j: 1, m, n };
        let w = cfg.working_prec(q);
        while qpow(q, cfg.j) < (m as i64).saturating_add(n)
            || omega_trunc_error(q, cfg.j) < w
            || pi_trunc_error(q, cfg.j) < w
        {
            cfg.j += 1;
        }
        cfg
    }

    pub fn validate(&self, q: u64) -> Result<()> {
        if self.m == 0 || self.n <= 0 || self.j == 0 {
            return Err(Error::Config("J, M and N must be positive".into()));
        }
        if self.n > 1 << 20 || self.m > 1 << 16 {
            return Err(Error::Config("precision request too large".into()));
        }
        let need = self.m as i128 + (self.n as i128 + q as i128 - 2) / (q as i128 - 1);
        if (qpow(q, self.j) as i128) < need {
            return Err(Error::Config(format!("q^J = {q}^{} must be at least M + N/(q-1) = {need}", self.j)));
        }
        Ok(())
    }

    /// Number of t-terms needed to evaluate `∂^i Ω^{-n}` at `θ` to `n` digits for `n <= n_max`.
    pub fn m_for_theta(q: u64, n: i64, n_max: u32) -> usize {
        let q = q as i64;
        let gain = (q - 1) * (q - 1);
        ((n + q * n_max as i64 + gain - 1) / gain + q + 2) as usize
    }

    /// Number of t-terms needed to evaluate `∂^i ω` at a root of unity of degree `d` to `n` digits.
    pub fn m_for_zeta(q: u64, d: u32, n: i64, n_max: u32) -> usize {
        let q = q as i64;
        ((n + qpow(q as u64, d) + 2 + q - 2) / (q - 1) + n_max as i64 + 2) as usize
    }

    /// u-precision at which series coefficients are carried.
    pub fn working_prec(&self, q: u64) -> i64 {
        let q = q as i64;
        q * (self.n + (q - 1) * self.m as i64) + 2 * q + 8
    }
}

/// Valuation of `Ω - Ω_J` coefficient-wise.
fn omega_trunc_error(q: u64, j: u32) -> i64 {
    (q as i64).saturating_add((q as i64 - 1).saturating_mul(qpow(q, j + 1)))
}

/// Valuation of `π̃ - π̃_J`.
fn pi_trunc_error(q: u64, j: u32) -> i64 {
    (q as i64 - 1).saturating_mul(qpow(q, j + 1).saturating_sub(1)).saturating_sub(q as i64)
}

/// Lower bound for `v((Ω^n)_m)`: `qn + (q-1) Σ_{i=1}^m q^{⌈i/n⌉}`, capped.
pub fn omega_pow_bound(q: u64, n: u32, m: usize) -> i64 {
    let mut b = (q as i64) * n as i64;
    for i in 1..=m {
        let e = (i as u32).div_ceil(n);
        b = b.saturating_add((q as i64 - 1).saturating_mul(qpow(q, e)));
        if b >= CERT_CAP {
            return CERT_CAP;
        }
    }
    b
}

/// Certificate for `Ω^n` truncated at `m` terms.
fn omega_pow_cert(q: u64, n: u32, m: usize) -> TailCert {
    let mut from = 0;
    while from < m / 2 && omega_pow_bound(q, n, from) < CERT_CAP {
        from += 1;
    }
    let step = (q as i64 - 1).saturating_mul(qpow(q, (from as u32 + 1).div_ceil(n)));
    TailCert { from, floor: omega_pow_bound(q, n, from), slope: step.min(CERT_CAP) }
}

/// `x_j = θ^{-q^j} = (-u^{q-1})^{q^j}`.
fn inv_theta_pow(field: &Field, j: u32) -> LaurentU {
    let q = field.q();
    let e = (q as i64 - 1) * qpow(q, j);
    let sign = if q % 2 == 1 { -1 } else { 1 };
    LaurentU::monomial(field, field.from_int(sign), e)
}

/// `β = ∏_{h<d} (t - θ^{q^h})`.
pub fn beta(field: &Field, d: u32) -> TSeries {
    let theta = LaurentU::theta(field);
    let mut acc = TSeries::one(field);
    for h in 0..d {
        acc = &acc * &TSeries::t_minus(&theta.coeff_twist(h as i32).expect("positive twist"));
    }
    acc
}

/// Special functions for one field and truncation, built on first use.
pub struct SpecialFns {
    field: Field,
    cfg: SpecialFnConfig,
    omega_big: OnceLock<TSeries>,
    omega_small: OnceLock<TSeries>,
    pi: OnceLock<LaurentU>,
    powers: Mutex<BTreeMap<i64, TSeries>>,
}

impl SpecialFns {
    pub fn new(field: &Field, cfg: SpecialFnConfig) -> Result<Self> {
        cfg.validate(field.q())?;
        Ok(SpecialFns {
            field: field.clone(),
            cfg,
            omega_big: OnceLock::new(),
            omega_small: OnceLock::new(),
            pi: OnceLock::new(),
            powers: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn config(&self) -> SpecialFnConfig {
        self.cfg
    }

    /// u-precision carried by the coefficients of `Ω`.
    pub fn omega_prec(&self) -> i64 {
        let q = self.field.q();
        self.cfg.working_prec(q).min(omega_trunc_error(q, self.cfg.j))
    }

    /// `Ω` modulo `t^M`.
    pub fn omega_big(&self) -> &TSeries {
        self.omega_big.get_or_init(|| {
            let f = &self.field;
            let q = f.q();
            let w = self.omega_prec();
            let mut prod = TSeries::constant(LaurentU::monomial(f, f.one(), q as i64));
            for j in 1..=self.cfg.j {
                let factor =
                    TSeries::polynomial(f, vec![LaurentU::one(f), -&inv_theta_pow(f, j)]);
                prod = (&prod * &factor).truncate_u(w);
            }
            let coeffs = (0..self.cfg.m)
                .map(|m| prod.coeffs().get(m).map_or_else(|| LaurentU::zero_to(f, w), |c| c.truncate(w)))
                .collect();
            TSeries::series(f, coeffs).with_cert(omega_pow_cert(q, 1, self.cfg.m))
        })
    }

    /// `ω = 1/((t-θ)Ω)` modulo `t^M`; `v(ω_m) >= -1 + (q-1)m`.
    pub fn omega_small(&self) -> &TSeries {
        self.omega_small.get_or_init(|| {
            let f = &self.field;
            let q1 = f.q() as i64 - 1;
            let prod = &TSeries::t_minus_theta(f) * self.omega_big();
            prod.inv(self.cfg.m)
                .expect("constant term of (t-θ)Ω is u")
                .with_cert(TailCert { from: 0, floor: -1, slope: q1 })
        })
    }

    /// `Ω^n` for `n > 0`, `Ω^{-|n|}` for `n < 0`, modulo `t^M`.
    pub fn omega_big_pow(&self, n: i64) -> TSeries {
        if let Some(s) = self.powers.lock().unwrap().get(&n) {
            return s.clone();
        }
        let f = &self.field;
        let q = f.q();
        let out = match n {
            0 => TSeries::one(f).truncate_t(self.cfg.m),
            1 => self.omega_big().clone(),
            n if n > 1 => {
                let prev = self.omega_big_pow(n - 1);
                (&prev * self.omega_big()).with_cert(omega_pow_cert(q, n as u32, self.cfg.m))
            }
            n => {
                let k = -n;
                // v((Ω^{-k})_m) >= -qk + q(q-1)m
                let qi = q as i64;
                self.omega_big_pow(k)
                    .inv(self.cfg.m)
                    .expect("constant term of Ω^k is u^{qk}")
                    .with_cert(TailCert { from: 0, floor: -qi * k, slope: qi * (qi - 1) })
            }
        };
        self.powers.lock().unwrap().insert(n, out.clone());
        out
    }

    /// `π̃`, with `v(π̃) = -q`.
    pub fn pi_tilde(&self) -> &LaurentU {
        self.pi.get_or_init(|| {
            let f = &self.field;
            let q = f.q();
            let prec = self.cfg.working_prec(q).min(pi_trunc_error(q, self.cfg.j));
            let theta = LaurentU::theta(f);
            // λθ = -u^{-q}
            let mut acc = LaurentU::monomial(f, f.from_int(-1), -(q as i64)).truncate(prec);
            for j in 1..=self.cfg.j {
                let factor = &LaurentU::one(f) - &(&theta * &inv_theta_pow(f, j));
                let inv = factor.inv_to(prec + q as i64).expect("unit factor");
                acc = &acc * &inv;
            }
            acc.truncate(prec)
        })
    }

    /// `ξ_n = Σ_{l=1}^n ∂^l β · ∂^{n-l} ω`.
    pub fn xi(&self, n: usize, d: u32) -> TSeries {
        let f = &self.field;
        let b = beta(f, d);
        let w = self.omega_small();
        let mut acc = TSeries::zero(f);
        for l in 1..=n {
            let db = b.hyperderive(l);
            if db.coeffs().is_empty() {
                continue;
            }
            acc = &acc + &(&db * &w.hyperderive(n - l));
        }
        if acc.is_polynomial() {
            // every ∂^l β vanished: ξ_n is the zero series
            acc = acc.truncate_t(self.cfg.m.saturating_sub(n));
        }
        acc
    }
}

/// Residuals of `σ(Ω) - (t-θ)Ω` and `τ(ω) - (t-θ)ω`.
pub fn difference_equations(fns: &SpecialFns) -> Result<(Residual, Residual)> {
    let f = fns.field();
    let tt = TSeries::t_minus_theta(f);
    let big = fns.omega_big();
    let (v1, p1) = big.twist(-1)?.residual(&(big * &tt));
    let small = fns.omega_small();
    let (v2, p2) = small.twist(1)?.residual(&(&tt * small));
    let n = fns.config().n;
    Ok((Residual::new(v1, p1, n), Residual::new(v2, p2, n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GaloisField;

    fn fns(q: u64, d: u32, m: usize, n: i64) -> SpecialFns {
        let f = GaloisField::for_q(q, d).unwrap();
        SpecialFns::new(&f, SpecialFnConfig::auto(q, m, n)).unwrap()
    }

    /// Every stored coefficient respects the certificate it carries.
    fn assert_cert_holds(s: &TSeries) {
        let c = s.cert().expect("certificate");
        for (m, x) in s.coeffs().iter().enumerate().skip(c.from) {
            if let Some(v) = x.valuation() {
                assert!(v >= c.floor_at(m), "t^{m}: v = {v} below {}", c.floor_at(m));
            }
        }
    }

    #[test]
    fn config_invariant() {
        assert!(SpecialFnConfig::new(2, 3, 24, 96).is_err());
        let cfg = SpecialFnConfig::auto(3, 24, 96);
        assert!(cfg.validate(3).is_ok());
        assert!(3i64.pow(cfg.j) >= 24 + 96);
        assert!(SpecialFnConfig::new(3, cfg.j, 0, 96).is_err());
    }

    #[test]
    fn omega_constant_term() {
        for q in [2, 3] {
            let s = fns(q, 1, 20, 96);
            let f = s.field().clone();
            let lam_mq = LaurentU::lambda(&f).pow(q as u32).inv().unwrap();
            assert!(s.omega_big().coeff(0).unwrap().agrees(&lam_mq));
            assert_cert_holds(s.omega_big());
        }
    }

    #[test]
    fn difference_equations() {
        for q in [2, 3] {
            let s = fns(q, 1, 30, 96);
            let f = s.field().clone();
            let tt = TSeries::t_minus_theta(&f);
            let big = s.omega_big();
            let (v, p) = big.twist(-1).unwrap().residual(&(big * &tt));
            assert_eq!(v, None);
            assert!(p >= 96, "precision {p}");
            let small = s.omega_small();
            let (v, p) = small.twist(1).unwrap().residual(&(&tt * small));
            assert_eq!(v, None);
            assert!(p >= 96, "precision {p}");
            assert!((&(&tt * small) * big).agrees(&TSeries::one(&f)));
        }
    }

    #[test]
    fn omega_at_theta_is_minus_inverse_period() {
        for q in [2, 3] {
            let s = fns(q, 1, 24, 96);
            let f = s.field().clone();
            let val = s.omega_big().eval_at_theta(None).unwrap();
            let prod = &val * s.pi_tilde();
            assert!(prod.agrees(&LaurentU::from_int(&f, -1)));
            assert!(prod.prec() >= 96);
            assert_eq!(s.pi_tilde().valuation(), Some(-(q as i64)));
        }
    }

    #[test]
    fn regular_part_of_omega_at_theta() {
        let s = fns(3, 1, 30, 96);
        let f = s.field().clone();
        let reg = &TSeries::t_minus_theta(&f) * s.omega_small();
        let cert = s.omega_big_pow(-1).cert().unwrap();
        let val = reg.with_cert(cert).eval_at_theta(None).unwrap();
        assert!(val.agrees(&-s.pi_tilde()));
        assert!(val.prec() >= 96);
    }

    #[test]
    fn pi_is_cutoff_stable() {
        let f = GaloisField::for_q(2, 1).unwrap();
        let base = SpecialFnConfig::auto(2, 8, 32);
        let a = SpecialFns::new(&f, base).unwrap();
        let b = SpecialFns::new(&f, SpecialFnConfig { j: base.j + 1, ..base }).unwrap();
        assert!(a.pi_tilde().agrees(b.pi_tilde()));
        // π̃ / (λθ) is the partial product
        let lt = &LaurentU::lambda(&f) * &LaurentU::theta(&f);
        let mut partial = LaurentU::one(&f);
        for j in 1..=base.j {
            let factor = &LaurentU::one(&f) - &(&LaurentU::theta(&f) * &inv_theta_pow(&f, j));
            partial = &partial * &factor.inv_to(200).unwrap();
        }
        assert!((&lt.inv().unwrap() * a.pi_tilde()).agrees(&partial));
    }

    #[test]
    fn powers_and_certificates() {
        let s = fns(2, 1, 40, 64);
        let f = s.field().clone();
        for n in 1..=4 {
            let pos = s.omega_big_pow(n);
            let neg = s.omega_big_pow(-n);
            assert_cert_holds(&pos);
            assert_cert_holds(&neg);
            assert!((&pos * &neg).agrees(&TSeries::one(&f)));
        }
        assert_cert_holds(s.omega_small());
    }

    #[test]
    fn omega_pow_bound_matches_small_cases() {
        // Ω = u^q (1 - x_1 t)(1 - x_2 t)...: v(Ω_1) = q + (q-1)q
        assert_eq!(omega_pow_bound(3, 1, 1), 3 + 2 * 3);
        assert_eq!(omega_pow_bound(2, 1, 3), 16);
        assert_eq!(omega_pow_bound(2, 2, 2), 4 + 2 + 2);
    }

    #[test]
    fn beta_and_xi() {
        let f = GaloisField::for_q(2, 2).unwrap();
        assert_eq!(beta(&f, 1), TSeries::t_minus_theta(&f));
        let b = beta(&f, 2);
        assert_eq!(b.coeffs().len(), 3);
        for l in 3..6 {
            assert!(b.hyperderive(l).coeffs().is_empty());
        }
        let s = SpecialFns::new(&f, SpecialFnConfig::auto(2, 16, 32)).unwrap();
        let xi1 = s.xi(1, 2);
        assert!(xi1.agrees(&(&b.hyperderive(1) * s.omega_small())));
    }

    #[test]
    fn omega_power_difference_equation() {
        let s = fns(3, 1, 12, 48);
        let f = s.field().clone();
        let w2 = s.omega_small().pow(2);
        let tt2 = TSeries::t_minus_theta(&f).pow(2);
        assert!(w2.twist(1).unwrap().agrees(&(&tt2 * &w2)));
    }
}
