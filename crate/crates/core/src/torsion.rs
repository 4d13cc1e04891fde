//! Values of `ω` and its hyperderivatives at roots of unity `ζ`, and the root
//! relations `ω(ζ)^{q^d-1} = β(ζ)` and `Y^{q^d} - β(ζ)Y - ξ_n(ζ) = 0` for `Y = ∂^n ω(ζ)`.

use serde::Serialize;

use crate::check::Residual;
use crate::error::{Error, Result};
use crate::field::{Field, FieldElem};
use crate::laurent::LaurentU;
use crate::special_fn::{beta, SpecialFns};

/// Nonzero elements of exact degree `d` over `F_q`.
pub fn roots_of_degree(field: &Field, d: u32) -> Vec<FieldElem> {
    field.elements().filter(|&z| !z.is_zero() && field.degree_over_base(z) == d).collect()
}

fn check_zeta(field: &Field, zeta: FieldElem, d: u32) -> Result<()> {
    if zeta.is_zero() || field.degree_over_base(zeta) != d {
        return Err(Error::Invalid(format!("ζ = {} is not a nonzero element of degree {d}", zeta.packed())));
    }
    Ok(())
}

/// `∂^n ω (ζ)`.
pub fn hyper_omega_at_zeta(fns: &SpecialFns, zeta: FieldElem, n: usize) -> Result<LaurentU> {
    fns.omega_small().hyperderive(n).eval_at_zeta(zeta, None)
}

/// `X^{q^d}`, exact in precision through the Frobenius of the coefficient field.
fn frob_power(x: &LaurentU, d: u32) -> LaurentU {
    x.coeff_twist(d as i32).expect("positive twist")
}

/// `ω(ζ)^{q^d - 1} - β(ζ)`.
pub fn omega_at_zeta_relation(fns: &SpecialFns, zeta: FieldElem, d: u32) -> Result<Residual> {
    omega_relation_with(fns, zeta, d, 0)
}

fn omega_relation_with(fns: &SpecialFns, zeta: FieldElem, d: u32, beta_shift: i64) -> Result<Residual> {
    let f = fns.field();
    check_zeta(f, zeta, d)?;
    let x = hyper_omega_at_zeta(fns, zeta, 0)?;
    let lhs = &frob_power(&x, d) * &x.inv()?;
    let b = &beta(f, d).eval_at_zeta(zeta, None)? + &LaurentU::from_int(f, beta_shift);
    let (v, p) = lhs.residual(&b);
    Ok(Residual::new(v, p, fns.config().n))
}

/// Negative control: `β` replaced by `β + 1` must leave a residual of valuation `≈ 0`.
pub fn omega_relation_control(fns: &SpecialFns, zeta: FieldElem, d: u32) -> Result<Residual> {
    omega_relation_with(fns, zeta, d, 1)
}

/// `(∂^n ω)(ζ)^{q^d} - β(ζ) (∂^n ω)(ζ) - ξ_n(ζ)`.
pub fn hyper_omega_at_zeta_relation(fns: &SpecialFns, zeta: FieldElem, n: usize, d: u32) -> Result<Residual> {
    let f = fns.field();
    check_zeta(f, zeta, d)?;
    if n == 0 {
        return Err(Error::Invalid("the hyperderivative relation needs n >= 1".into()));
    }
    let y = hyper_omega_at_zeta(fns, zeta, n)?;
    let b = beta(f, d).eval_at_zeta(zeta, None)?;
    let xi = fns.xi(n, d).eval_at_zeta(zeta, None)?;
    let lhs = &(&frob_power(&y, d) - &(&b * &y)) - &xi;
    let (v, p) = lhs.residual(&LaurentU::zero(f));
    Ok(Residual::new(v, p, fns.config().n))
}

/// `L(X) = X^{q^d} - β(ζ) X` is `F_q`-linear: checked on `ω(ζ)`, `∂ω(ζ)` and a scalar.
pub fn additivity_check(fns: &SpecialFns, zeta: FieldElem, d: u32) -> Result<Residual> {
    let f = fns.field();
    check_zeta(f, zeta, d)?;
    let b = beta(f, d).eval_at_zeta(zeta, None)?;
    let l = |x: &LaurentU| &frob_power(x, d) - &(&b * x);
    let x = hyper_omega_at_zeta(fns, zeta, 0)?;
    let y = hyper_omega_at_zeta(fns, zeta, 1)?;
    let c = LaurentU::from_int(f, -1);
    let sum = &l(&(&x + &y)) - &(&l(&x) + &l(&y));
    let scaled = &l(&(&c * &x)) - &(&c * &l(&x));
    let (v1, p1) = sum.residual(&LaurentU::zero(f));
    let (v2, p2) = scaled.residual(&LaurentU::zero(f));
    Ok(Residual::new(v1.or(v2), p1.min(p2), fns.config().n))
}

#[derive(Clone, Debug, Serialize)]
pub struct TorsionRow {
    pub zeta: Vec<u32>,
    pub d: u32,
    /// `None` for the `ω(ζ)^{q^d-1} = β(ζ)` relation.
    pub n: Option<usize>,
    pub residual: Residual,
}

/// Both relations for every root of exact degree `d` and `n = 1..=n_max`.
pub fn torsion_table(fns: &SpecialFns, d: u32, n_max: usize) -> Result<Vec<TorsionRow>> {
    let f = fns.field();
    let mut rows = Vec::new();
    for zeta in roots_of_degree(f, d) {
        let coords = f.coords(zeta);
        rows.push(TorsionRow { zeta: coords.clone(), d, n: None, residual: omega_at_zeta_relation(fns, zeta, d)? });
        for n in 1..=n_max {
            rows.push(TorsionRow {
                zeta: coords.clone(),
                d,
                n: Some(n),
                residual: hyper_omega_at_zeta_relation(fns, zeta, n, d)?,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::Status;
    use crate::field::GaloisField;
    use crate::special_fn::SpecialFnConfig;

    fn fns(q: u64, d: u32, n: i64, n_max: u32) -> SpecialFns {
        let f = GaloisField::for_q(q, d).unwrap();
        let m = SpecialFnConfig::m_for_zeta(q, d, n, n_max);
        SpecialFns::new(&f, SpecialFnConfig::auto(q, m, n)).unwrap()
    }

    #[test]
    fn q2_d2_omega_relation() {
        let s = fns(2, 2, 96, 1);
        let roots = roots_of_degree(s.field(), 2);
        assert_eq!(roots.len(), 2);
        for z in roots {
            let r = omega_at_zeta_relation(&s, z, 2).unwrap();
            assert_eq!(r.status(), Status::Pass, "{r:?}");
            let c = omega_relation_control(&s, z, 2).unwrap();
            assert_eq!(c.status(), Status::Fail);
            assert!(c.valuation.unwrap() <= 0);
        }
    }

    #[test]
    fn q3_d1_square_is_zeta_minus_theta() {
        let s = fns(3, 1, 96, 1);
        for z in roots_of_degree(s.field(), 1) {
            let x = hyper_omega_at_zeta(&s, z, 0).unwrap();
            let rhs = &LaurentU::constant(s.field(), z) - &LaurentU::theta(s.field());
            assert!((&x * &x).agrees(&rhs));
            assert!(omega_at_zeta_relation(&s, z, 1).unwrap().pass());
        }
    }

    #[test]
    fn hyperderivative_relations() {
        let s = fns(2, 1, 96, 1);
        let one = s.field().one();
        assert!(hyper_omega_at_zeta_relation(&s, one, 1, 1).unwrap().pass());
        let s = fns(2, 2, 96, 2);
        for z in roots_of_degree(s.field(), 2) {
            let r = hyper_omega_at_zeta_relation(&s, z, 2, 2).unwrap();
            assert!(r.pass(), "{r:?}");
            assert!(additivity_check(&s, z, 2).unwrap().pass());
        }
    }

    #[test]
    fn rejects_wrong_degree() {
        let s = fns(2, 2, 32, 1);
        assert!(omega_at_zeta_relation(&s, s.field().one(), 2).is_err());
        assert!(omega_at_zeta_relation(&s, s.field().zero(), 1).is_err());
    }
}
