//! t-motives, dual t-motives and t-modules by their action matrices, and
//! their prolongations.

use serde::{Deserialize, Serialize};

use crate::check::Residual;
use crate::error::{Error, Result};
use crate::field::{binom_signed_mod_p, Field, FieldParams, GaloisField};
use crate::laurent::{LaurentJson, LaurentU};
use crate::matrix::{rho_mat, BlockMat, ValueMat};
use crate::special_fn::SpecialFns;
use crate::tseries::{TSeries, TSeriesJson};

/// Largest rank or dimension a descriptor may declare.
pub const MAX_RANK: usize = 32;

/// Abelian t-motive: `τ(e) = e·Θ` with `Θ` over `K[t]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MotiveDesc {
    pub theta: BlockMat,
    /// Exponent `ℓ` with `(t-θ)^ℓ M ⊆ K[t]·τ(M)`, when known.
    pub ell: Option<u32>,
}

/// Dual t-motive: `σ(e) = e·Θ̃`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualMotiveDesc {
    pub theta_tilde: BlockMat,
    pub ell: Option<u32>,
}

/// t-module `Φ_t = A_0 + A_1 τ + ... + A_s τ^s`.
#[derive(Clone, Debug, PartialEq)]
pub struct TModuleDesc {
    pub a: Vec<ValueMat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// `Θ·Υ^τ = Υ`.
    Tau,
    /// `Ψ·Θ̃ = Ψ^σ`.
    Sigma,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trivialization {
    pub matrix: BlockMat,
    pub flavor: Flavor,
}

fn require_polynomial(m: &BlockMat) -> Result<()> {
    if m.entries().iter().all(|e| e.is_polynomial()) {
        Ok(())
    } else {
        Err(Error::Invalid("action matrices must have polynomial entries".into()))
    }
}

impl MotiveDesc {
    pub fn new(theta: BlockMat, ell: Option<u32>) -> Result<Self> {
        require_polynomial(&theta)?;
        Ok(MotiveDesc { theta, ell })
    }

    pub fn rank(&self) -> usize {
        self.theta.n()
    }
}

impl DualMotiveDesc {
    pub fn new(theta_tilde: BlockMat, ell: Option<u32>) -> Result<Self> {
        require_polynomial(&theta_tilde)?;
        Ok(DualMotiveDesc { theta_tilde, ell })
    }

    pub fn rank(&self) -> usize {
        self.theta_tilde.n()
    }
}

impl TModuleDesc {
    pub fn new(a: Vec<ValueMat>) -> Result<Self> {
        let d = a.first().map(|m| m.n()).ok_or_else(|| Error::Invalid("t-module needs A_0".into()))?;
        if d == 0 || a.iter().any(|m| m.n() != d) {
            return Err(Error::ShapeMismatch("all A_i must be square of the same size".into()));
        }
        let desc = TModuleDesc { a };
        if !desc.nilpotent() {
            return Err(Error::Invalid("A_0 - θ is not nilpotent".into()));
        }
        Ok(desc)
    }

    pub fn dim(&self) -> usize {
        self.a[0].n()
    }

    /// `(A_0 - θ)^dim = 0`.
    pub fn nilpotent(&self) -> bool {
        let a0 = &self.a[0];
        let f = a0.field();
        let shifted = a0.sub(&ValueMat::scalar(f, a0.n(), &LaurentU::theta(f))).expect("square");
        shifted.pow(a0.n() as u32).is_ok_and(|p| p.entries().iter().all(|e| e.is_exact_zero()))
    }
}

/// `C^{⊗n}`: `Θ = (t-θ)^n`.
pub fn carlitz_motive(field: &Field, n: u32) -> MotiveDesc {
    let theta = BlockMat::scalar(field, 1, &TSeries::t_minus_theta(field).pow(n));
    MotiveDesc { theta, ell: Some(n) }
}

/// Dual Carlitz tensor power: `Θ̃ = (t-θ)^n`.
pub fn carlitz_dual(field: &Field, n: u32) -> DualMotiveDesc {
    let theta_tilde = BlockMat::scalar(field, 1, &TSeries::t_minus_theta(field).pow(n));
    DualMotiveDesc { theta_tilde, ell: Some(n) }
}

/// Carlitz module `φ_t = θ + τ`.
pub fn carlitz_tmodule(field: &Field) -> TModuleDesc {
    TModuleDesc { a: vec![ValueMat::scalar(field, 1, &LaurentU::theta(field)), ValueMat::identity(field, 1)] }
}

/// `ρ_[k](ω^{-n}) = ρ_[k](((t-θ)Ω)^n)`, trivializing the prolonged `C^{⊗n}`.
pub fn carlitz_trivialization(fns: &SpecialFns, n: u32) -> Trivialization {
    let f = fns.field();
    let base = (&TSeries::t_minus_theta(f) * fns.omega_big()).pow(n);
    Trivialization { matrix: BlockMat::scalar(f, 1, &base), flavor: Flavor::Tau }
}

/// `Ω^n`, trivializing the dual Carlitz tensor power.
pub fn carlitz_dual_trivialization(fns: &SpecialFns, n: u32) -> Trivialization {
    let f = fns.field();
    Trivialization { matrix: BlockMat::scalar(f, 1, &fns.omega_big_pow(n as i64)), flavor: Flavor::Sigma }
}

pub fn prolong_motive(m: &MotiveDesc, k: usize) -> MotiveDesc {
    MotiveDesc { theta: rho_mat(&m.theta, k), ell: m.ell.map(|l| l * (k as u32 + 1)) }
}

pub fn prolong_dual(m: &DualMotiveDesc, k: usize) -> DualMotiveDesc {
    DualMotiveDesc { theta_tilde: rho_mat(&m.theta_tilde, k), ell: m.ell.map(|l| l * (k as u32 + 1)) }
}

/// `A_0` on the block diagonal with `-1_d` below it; `A_i` block-diagonal for `i >= 1`.
pub fn prolong_tmodule(e: &TModuleDesc, k: usize) -> TModuleDesc {
    let d = e.dim();
    let f = e.a[0].field().clone();
    let minus_one = LaurentU::from_int(&f, -1);
    let a = e
        .a
        .iter()
        .enumerate()
        .map(|(i, ai)| {
            ValueMat::from_fn(&f, d * (k + 1), |r, c| {
                let (br, bc) = (r / d, c / d);
                if br == bc {
                    ai.get(r % d, c % d).clone()
                } else if i == 0 && br == bc + 1 && r % d == c % d {
                    minus_one.clone()
                } else {
                    LaurentU::zero(&f)
                }
            })
        })
        .collect();
    TModuleDesc { a }
}

/// The t-action on the dual basis of the prolonged motive: `Φ_t^T` blocks on
/// the diagonal and `-1_d` above them, one matrix per power of `τ`.
pub fn prolonged_motive_action(e: &TModuleDesc, k: usize) -> Vec<ValueMat> {
    let d = e.dim();
    let f = e.a[0].field().clone();
    e.a.iter()
        .enumerate()
        .map(|(i, ai)| {
            let at = ai.transpose();
            let blocks: Vec<Vec<ValueMat>> = (0..=k)
                .map(|br| {
                    (0..=k)
                        .map(|bc| {
                            if br == bc {
                                at.clone()
                            } else if i == 0 && bc == br + 1 {
                                ValueMat::identity(&f, d).neg()
                            } else {
                                ValueMat::zero(&f, d)
                            }
                        })
                        .collect()
                })
                .collect();
            ValueMat::from_blocks(&f, &blocks).expect("uniform blocks")
        })
        .collect()
}

pub fn prolong_trivialization(t: &Trivialization, k: usize) -> Trivialization {
    Trivialization { matrix: rho_mat(&t.matrix, k), flavor: t.flavor }
}

/// Residual of `Θ·Υ^τ - Υ`.
pub fn verify_motive_trivialization(m: &MotiveDesc, t: &Trivialization, required: i64) -> Result<Residual> {
    if t.flavor != Flavor::Tau || t.matrix.n() != m.rank() {
        return Err(Error::ShapeMismatch("tau-side trivialization of matching rank expected".into()));
    }
    let lhs = m.theta.mul(&t.matrix.twist(1)?)?;
    let (v, p) = lhs.residual(&t.matrix)?;
    Ok(Residual::new(v, p, required))
}

/// Residual of `Ψ·Θ̃ - Ψ^σ`.
pub fn verify_dual_trivialization(m: &DualMotiveDesc, t: &Trivialization, required: i64) -> Result<Residual> {
    if t.flavor != Flavor::Sigma || t.matrix.n() != m.rank() {
        return Err(Error::ShapeMismatch("sigma-side trivialization of matching rank expected".into()));
    }
    let lhs = t.matrix.mul(&m.theta_tilde)?;
    let (v, p) = lhs.residual(&t.matrix.twist(-1)?)?;
    Ok(Residual::new(v, p, required))
}

pub fn verify_trivialization(d: &Descriptor, t: &Trivialization, required: i64) -> Result<Residual> {
    match d {
        Descriptor::Motive(m) => verify_motive_trivialization(m, t, required),
        Descriptor::Dual(m) => verify_dual_trivialization(m, t, required),
        Descriptor::TModule(_) => Err(Error::ShapeMismatch("t-modules carry no trivialization".into())),
    }
}

/// `t^{-u} ∂^n (t^u x)` for `x = Σ x_j t^{-j}`, i.e. `Σ C(u-j, n) x_j t^{-j-n}`,
/// returned as a series in `1/t` with the smallest `1/t`-exponent that
/// carries a nonzero coefficient. Positive powers of `t` only show up in
/// that exponent.
fn twisted_hyperderivative(x: &TSeries, u: i64, n: usize) -> (TSeries, Option<i64>) {
    let f = x.field();
    let p = f.p();
    let mut terms: Vec<(i64, LaurentU)> = Vec::new();
    for (j, c) in x.coeffs().iter().enumerate() {
        let e = u - j as i64;
        let b = binom_signed_mod_p(e, n as u64, p);
        if b != 0 && !c.is_zero() {
            // t^e -> C(e, n) t^{e-n} -> times t^{-u}
            terms.push((u + n as i64 - e, c.scale(f.from_int(b as i64))));
        }
    }
    let min = terms.iter().map(|(s, _)| *s).min();
    let len = if x.is_polynomial() {
        terms.iter().map(|(s, _)| *s).max().map_or(0, |s| s.max(-1) + 1) as usize
    } else {
        x.tprec() + n
    };
    let mut coeffs = vec![LaurentU::zero(f); len];
    for (s, c) in terms {
        if s >= 0 && (s as usize) < len {
            coeffs[s as usize] = c;
        }
    }
    let out = if x.is_polynomial() { TSeries::polynomial(f, coeffs) } else { TSeries::series(f, coeffs) };
    (out, min)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PurityReport {
    /// Smallest `1/t`-valuation over all blocks `t^{-u} ∂^n(t^u A)`.
    pub min_valuation: Option<i64>,
    /// Constant part of the block matrix is invertible.
    pub invertible: bool,
    /// Its determinant equals `det(A_0)^{k+1}`.
    pub det_matches: bool,
    pub weight: (i64, i64),
    pub pass: bool,
}

/// For `A ∈ GL_r(K[[1/t]])`, given as series in `s = 1/t`, checks that every
/// block `t^{-u}∂^n(t^u A)` lies in `K[[1/t]]` and that the block upper
/// triangular matrix they form is invertible over `K[[1/t]]`.
pub fn purity_prolong_check(a: &BlockMat, u: i64, v: i64, k: usize) -> Result<PurityReport> {
    let f = a.field().clone();
    let r = a.n();
    let mut min_val: Option<i64> = None;
    let mut blocks: Vec<BlockMat> = Vec::with_capacity(k + 1);
    for n in 0..=k {
        let mut entries = Vec::with_capacity(r * r);
        for entry in a.entries() {
            let (series, v) = twisted_hyperderivative(entry, u, n);
            if let Some(v) = v {
                min_val = Some(min_val.map_or(v, |m| m.min(v)));
            }
            entries.push(series);
        }
        blocks.push(BlockMat::from_fn(&f, r, |i, j| entries[i * r + j].clone()));
    }
    let grid: Vec<Vec<BlockMat>> = (0..=k)
        .map(|bi| (0..=k).map(|bj| if bj >= bi { blocks[bj - bi].clone() } else { BlockMat::zero(&f, r) }).collect())
        .collect();
    let full = BlockMat::from_blocks(&f, &grid)?;
    let constant = full.map(|e| e.coeff(0).unwrap_or_else(|| LaurentU::zero(&f)));
    let det = constant.det();
    let invertible = det.valuation().is_some();
    let a0 = a.map(|e| e.coeff(0).unwrap_or_else(|| LaurentU::zero(&f)));
    let det_matches = det.agrees(&a0.det().pow(k as u32 + 1));
    let pass = min_val.is_none_or(|m| m >= 0) && invertible && det_matches;
    Ok(PurityReport { min_valuation: min_val, invertible, det_matches, weight: (u, v), pass })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Descriptor {
    Motive(MotiveDesc),
    Dual(DualMotiveDesc),
    TModule(TModuleDesc),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotiveJson {
    pub field: FieldParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<TSeriesJson>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TModuleJson {
    pub field: FieldParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<Vec<LaurentJson>>>>,
}

/// Fixture form: `{"type":"motive"|"dual"|"tmodule","field":{...},...}` with
/// either explicit matrices or `"family":"carlitz"` (plus `"n"` for tensor powers).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DescriptorJson {
    Motive(MotiveJson),
    Dual(MotiveJson),
    Tmodule(TModuleJson),
}

const MAX_TENSOR_POWER: u32 = 64;

fn family_power(family: &Option<String>, n: Option<u32>) -> Result<Option<u32>> {
    match family.as_deref() {
        None => Ok(None),
        Some("carlitz") => {
            let n = n.unwrap_or(1);
            if n == 0 || n > MAX_TENSOR_POWER {
                return Err(Error::Invalid(format!("tensor power {n} outside 1..={MAX_TENSOR_POWER}")));
            }
            Ok(Some(n))
        }
        Some(other) => Err(Error::Invalid(format!("unknown family {other:?}"))),
    }
}

fn decode_block(field: &Field, m: &Option<Vec<Vec<TSeriesJson>>>) -> Result<BlockMat> {
    let rows = m.as_ref().ok_or_else(|| Error::Invalid("need a matrix or a family".into()))?;
    if rows.is_empty() || rows.len() > MAX_RANK {
        return Err(Error::ShapeMismatch(format!("rank must be in 1..={MAX_RANK}")));
    }
    BlockMat::from_json(field, rows)
}

impl Descriptor {
    pub fn from_json(json: &DescriptorJson) -> Result<(Field, Descriptor)> {
        match json {
            DescriptorJson::Motive(m) | DescriptorJson::Dual(m) => {
                let field = GaloisField::new(m.field.clone())?;
                let dual = matches!(json, DescriptorJson::Dual(_));
                if m.family.is_some() && m.matrix.is_some() {
                    return Err(Error::Invalid("give either a matrix or a family".into()));
                }
                let d = match (family_power(&m.family, m.n)?, dual) {
                    (Some(n), false) => Descriptor::Motive(carlitz_motive(&field, n)),
                    (Some(n), true) => Descriptor::Dual(carlitz_dual(&field, n)),
                    (None, false) => Descriptor::Motive(MotiveDesc::new(decode_block(&field, &m.matrix)?, m.ell)?),
                    (None, true) => Descriptor::Dual(DualMotiveDesc::new(decode_block(&field, &m.matrix)?, m.ell)?),
                };
                Ok((field, d))
            }
            DescriptorJson::Tmodule(t) => {
                let field = GaloisField::new(t.field.clone())?;
                if t.family.is_some() && t.a.is_some() {
                    return Err(Error::Invalid("give either matrices or a family".into()));
                }
                if family_power(&t.family, None)?.is_some() {
                    return Ok((field.clone(), Descriptor::TModule(carlitz_tmodule(&field))));
                }
                let mats = t.a.as_ref().ok_or_else(|| Error::Invalid("need A_i or a family".into()))?;
                if mats.is_empty() || mats.len() > MAX_RANK || mats.iter().any(|m| m.len() > MAX_RANK) {
                    return Err(Error::ShapeMismatch("bad t-module matrix list".into()));
                }
                let a = mats.iter().map(|m| ValueMat::from_json(&field, m)).collect::<Result<Vec<_>>>()?;
                Ok((field, Descriptor::TModule(TModuleDesc::new(a)?)))
            }
        }
    }

    pub fn from_json_str(s: &str) -> Result<(Field, Descriptor)> {
        let json: DescriptorJson = serde_json::from_str(s)?;
        Self::from_json(&json)
    }

    /// Explicit-matrix wire form.
    pub fn to_json(&self) -> DescriptorJson {
        match self {
            Descriptor::Motive(m) => DescriptorJson::Motive(MotiveJson {
                field: m.theta.field().params().clone(),
                family: None,
                n: None,
                matrix: Some(m.theta.to_json()),
                ell: m.ell,
            }),
            Descriptor::Dual(m) => DescriptorJson::Dual(MotiveJson {
                field: m.theta_tilde.field().params().clone(),
                family: None,
                n: None,
                matrix: Some(m.theta_tilde.to_json()),
                ell: m.ell,
            }),
            Descriptor::TModule(t) => DescriptorJson::Tmodule(TModuleJson {
                field: t.a[0].field().params().clone(),
                family: None,
                a: Some(t.a.iter().map(|m| m.to_json()).collect()),
            }),
        }
    }

    pub fn prolong(&self, k: usize) -> Descriptor {
        match self {
            Descriptor::Motive(m) => Descriptor::Motive(prolong_motive(m, k)),
            Descriptor::Dual(m) => Descriptor::Dual(prolong_dual(m, k)),
            Descriptor::TModule(t) => Descriptor::TModule(prolong_tmodule(t, k)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrivializationJson {
    pub flavor: Flavor,
    pub matrix: Vec<Vec<TSeriesJson>>,
}

impl Trivialization {
    pub fn from_json(field: &Field, json: &TrivializationJson) -> Result<Self> {
        Ok(Trivialization { matrix: decode_block(field, &Some(json.matrix.clone()))?, flavor: json.flavor })
    }

    pub fn from_json_str(field: &Field, s: &str) -> Result<Self> {
        let json: TrivializationJson = serde_json::from_str(s)?;
        Self::from_json(field, &json)
    }

    pub fn to_json(&self) -> TrivializationJson {
        TrivializationJson { flavor: self.flavor, matrix: self.matrix.to_json() }
    }
}

/// `n` when the action matrix is the 1×1 matrix `(t-θ)^n`.
pub fn carlitz_power(theta: &BlockMat) -> Option<u32> {
    if theta.n() != 1 {
        return None;
    }
    let e = theta.get(0, 0);
    let n = u32::try_from(e.coeffs().len().checked_sub(1)?).ok()?;
    (n >= 1 && *e == TSeries::t_minus_theta(e.field()).pow(n)).then_some(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{block_structure_check, rho};
    use crate::special_fn::SpecialFnConfig;

    fn field(q: u64) -> Field {
        GaloisField::for_q(q, 1).unwrap()
    }

    fn fns(q: u64, m: usize, n: i64) -> SpecialFns {
        SpecialFns::new(&field(q), SpecialFnConfig::auto(q, m, n)).unwrap()
    }

    #[test]
    fn prolong_carlitz_examples() {
        let f = field(2);
        let c = carlitz_motive(&f, 1);
        assert_eq!(prolong_motive(&c, 0), c);
        let p1 = prolong_motive(&c, 1);
        assert_eq!(p1.theta, rho(&TSeries::t_minus_theta(&f), 1));
        for k in 0..4 {
            assert_eq!(prolong_motive(&carlitz_motive(&f, 2), k).rank(), k + 1);
        }
        let d = carlitz_dual(&f, 3);
        let pd = prolong_dual(&d, 2);
        assert_eq!(pd.theta_tilde, rho(&TSeries::t_minus_theta(&f), 2).pow(3).unwrap());
        let twice = prolong_dual(&pd, 1);
        assert!(block_structure_check(&twice.theta_tilde, 3, 1, 0).unwrap().sub);
    }

    #[test]
    fn determinant_growth() {
        let f = field(3);
        for n in 1..=3 {
            for k in 0..=3 {
                let p = prolong_dual(&carlitz_dual(&f, n), k);
                assert_eq!(p.theta_tilde.det(), TSeries::t_minus_theta(&f).pow(n * (k as u32 + 1)));
            }
        }
    }

    #[test]
    fn carlitz_tmodule_prolongation() {
        let f = field(2);
        let e = carlitz_tmodule(&f);
        assert_eq!(prolong_tmodule(&e, 0), e);
        for k in 0..=3 {
            let p = prolong_tmodule(&e, k);
            let theta = LaurentU::theta(&f);
            let expected0 = ValueMat::from_fn(&f, k + 1, |i, j| {
                if i == j {
                    theta.clone()
                } else if i == j + 1 {
                    LaurentU::from_int(&f, -1)
                } else {
                    LaurentU::zero(&f)
                }
            });
            assert_eq!(p.a[0], expected0);
            assert_eq!(p.a[1], ValueMat::identity(&f, k + 1));
            assert!(p.nilpotent());
            let dual_side = prolonged_motive_action(&e, k);
            for (x, y) in p.a.iter().zip(&dual_side) {
                assert_eq!(&x.transpose(), y);
            }
        }
    }

    #[test]
    fn trivializations_pass_and_perturbation_fails() {
        let s = fns(3, 10, 48);
        let f = s.field().clone();
        let r = verify_motive_trivialization(&carlitz_motive(&f, 1), &carlitz_trivialization(&s, 1), 48).unwrap();
        assert_eq!(r.valuation, None);
        assert!(r.precision >= 48);
        let d = carlitz_dual(&f, 2);
        let psi = prolong_trivialization(&carlitz_dual_trivialization(&s, 2), 1);
        let r = verify_dual_trivialization(&prolong_dual(&d, 1), &psi, 48).unwrap();
        assert_eq!(r.valuation, None);
        let mut bad = carlitz_dual_trivialization(&s, 1);
        let entry = bad.matrix.get(0, 0).clone();
        let mut coeffs = entry.coeffs().to_vec();
        coeffs[1] = &coeffs[1] + &LaurentU::monomial(&f, f.one(), 6);
        bad.matrix.set(0, 0, TSeries::series(&f, coeffs));
        let r = verify_dual_trivialization(&carlitz_dual(&f, 1), &bad, 48).unwrap();
        assert!(r.valuation.is_some());
    }

    #[test]
    fn purity_examples() {
        let f = field(2);
        let one = BlockMat::identity(&f, 1);
        let rep = purity_prolong_check(&one, 1, 1, 2).unwrap();
        assert!(rep.pass, "{rep:?}");
        let th = LaurentU::theta(&f);
        let a = BlockMat::from_fn(&f, 2, |i, j| {
            let c: Vec<LaurentU> =
                (0..4).map(|m| if i == j && m == 0 { LaurentU::one(&f) } else { th.pow((i + j + m) as u32) }).collect();
            TSeries::polynomial(&f, c)
        });
        let rep = purity_prolong_check(&a, 3, 1, 2).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.min_valuation.unwrap() >= 0);
        assert!(purity_prolong_check(&a, 0, 1, 3).unwrap().pass);
        let singular = BlockMat::zero(&f, 1);
        assert!(!purity_prolong_check(&singular, 1, 1, 1).unwrap().pass);
    }

    #[test]
    fn descriptor_json() {
        let s = r#"{"type":"dual","field":{"p":2,"e":1,"d":1,"modulus":[1,1]},"family":"carlitz","n":2}"#;
        let (f, d) = Descriptor::from_json_str(s).unwrap();
        assert_eq!(d, Descriptor::Dual(carlitz_dual(&f, 2)));
        let explicit = serde_json::to_string(&d.to_json()).unwrap();
        let (_, back) = Descriptor::from_json_str(&explicit).unwrap();
        assert_eq!(back, d);
        let t = r#"{"type":"tmodule","field":{"p":3,"e":1,"d":1,"modulus":[0,1]},"family":"carlitz"}"#;
        let (f3, d3) = Descriptor::from_json_str(t).unwrap();
        assert_eq!(d3, Descriptor::TModule(carlitz_tmodule(&f3)));
        let round = serde_json::to_string(&d3.to_json()).unwrap();
        assert_eq!(Descriptor::from_json_str(&round).unwrap().1, d3);
        assert!(Descriptor::from_json_str(r#"{"type":"motive","field":{"p":2,"e":1,"d":1,"modulus":[1,1]}}"#).is_err());
        assert!(Descriptor::from_json_str(
            r#"{"type":"motive","field":{"p":2,"e":1,"d":1,"modulus":[1,1]},"family":"carlitz","n":0}"#
        )
        .is_err());
        assert!(Descriptor::from_json_str(
            r#"{"type":"motive","field":{"p":2,"e":1,"d":1,"modulus":[1,1]},"family":"carlitz","bogus":1}"#
        )
        .is_err());
    }

    #[test]
    fn trivialization_json_and_detection() {
        let s = fns(2, 8, 32);
        let f = s.field().clone();
        let t = carlitz_dual_trivialization(&s, 2);
        let text = serde_json::to_string(&t.to_json()).unwrap();
        assert_eq!(Trivialization::from_json_str(&f, &text).unwrap(), t);
        assert_eq!(carlitz_power(&carlitz_motive(&f, 3).theta), Some(3));
        assert_eq!(carlitz_power(&prolong_motive(&carlitz_motive(&f, 3), 1).theta), None);
        assert_eq!(carlitz_power(&BlockMat::identity(&f, 1)), None);
    }

    #[test]
    fn non_nilpotent_tmodule_rejected() {
        let f = field(3);
        let a0 = ValueMat::scalar(&f, 1, &LaurentU::one(&f));
        assert!(TModuleDesc::new(vec![a0]).is_err());
    }
}
