//! Run configuration, the full verification suite, and JSON/CSV report output.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::check::{Residual, Status};
use crate::error::{Error, Result};
use crate::field::{binom_mod_p, Field, GaloisField};
use crate::laurent::{LaurentU, EXACT};
use crate::matrix::{block_structure_check, rho_mat, BlockMat};
use crate::motives::{self, Descriptor, Flavor, TModuleDesc};
use crate::periods;
use crate::special_fn::{difference_equations, SpecialFnConfig, SpecialFns};
use crate::torsion;
use crate::tseries::TSeries;

/// Overrides `N` from the config file.
pub const PRECISION_ENV: &str = "CARLITZ_PRECISION_OVERRIDE";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_EXHAUSTED: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Pass => EXIT_PASS,
        Status::Fail => EXIT_FAIL,
        Status::Exhausted => EXIT_EXHAUSTED,
    }
}

fn default_d() -> u32 {
    1
}

fn default_seed() -> u64 {
    20_240_601
}

fn default_cases() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub q: u64,
    /// Torsion relations are checked for every degree `1..=d`.
    #[serde(default = "default_d")]
    pub d: u32,
    pub n_list: Vec<u32>,
    pub k_list: Vec<usize>,
    #[serde(rename = "N")]
    pub n: i64,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub j: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Random cases per property family.
    #[serde(default = "default_cases")]
    pub cases: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            q: 2,
            d: 1,
            n_list: vec![1, 2, 3, 4],
            k_list: vec![0, 1, 2],
            n: 96,
            m: None,
            j: None,
            out: None,
            csv: None,
            seed: default_seed(),
            cases: default_cases(),
        }
    }
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    /// Applies [`PRECISION_ENV`] when set.
    pub fn with_env_override(mut self) -> Result<Self> {
        if let Ok(v) = std::env::var(PRECISION_ENV) {
            self.n = v.trim().parse().map_err(|_| Error::Config(format!("{PRECISION_ENV}={v:?} is not an integer")))?;
            self.validate()?;
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if GaloisField::for_q(self.q, self.d).is_err() {
            return bad("q must be a prime power and q^d a supported field order");
        }
        if self.q > 64 {
            return bad("q must be at most 64");
        }
        if self.d == 0 || self.d > 4 {
            return bad("d must be in 1..=4");
        }
        if self.n_list.is_empty() || self.n_list.iter().any(|&n| n == 0 || n > 16) {
            return bad("n_list must be nonempty with entries in 1..=16");
        }
        if self.k_list.is_empty() || self.k_list.iter().any(|&k| k > 8) {
            return bad("k_list must be nonempty with entries in 0..=8");
        }
        if self.n <= 0 || self.n > 4096 {
            return bad("N must be in 1..=4096");
        }
        if self.cases > 10_000 {
            return bad("cases must be at most 10000");
        }
        if let Some(m) = self.m {
            if m == 0 || m > 4096 {
                return bad("M must be in 1..=4096");
            }
        }
        if let Some(j) = self.j {
            if j == 0 || j > 32 {
                return bad("J must be in 1..=32");
            }
        }
        Ok(())
    }

    pub fn n_max(&self) -> u32 {
        self.n_list.iter().copied().max().unwrap_or(1)
    }

    pub fn k_max(&self) -> usize {
        self.k_list.iter().copied().max().unwrap_or(0)
    }

    /// Truncation for evaluations at `θ`.
    pub fn theta_config(&self) -> Result<SpecialFnConfig> {
        let m = self.m.unwrap_or_else(|| SpecialFnConfig::m_for_theta(self.q, self.n, self.n_max()));
        self.finish(m)
    }

    /// Truncation for evaluations at roots of unity of degree `d`.
    pub fn zeta_config(&self, d: u32) -> Result<SpecialFnConfig> {
        let m = self.m.unwrap_or_else(|| SpecialFnConfig::m_for_zeta(self.q, d, self.n, self.n_max()));
        self.finish(m)
    }

    fn finish(&self, m: usize) -> Result<SpecialFnConfig> {
        match self.j {
            Some(j) => SpecialFnConfig::new(self.q, j, m, self.n),
            None => Ok(SpecialFnConfig::auto(self.q, m, self.n)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub section: String,
    pub label: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<Residual>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

impl CheckRow {
    pub fn new(section: &str, label: impl Into<String>, status: Status) -> Self {
        CheckRow { section: section.into(), label: label.into(), status, residual: None, detail: Value::Null }
    }

    pub fn residual(section: &str, label: impl Into<String>, r: Residual) -> Self {
        CheckRow { residual: Some(r), ..Self::new(section, label, r.status()) }
    }

    pub fn error(section: &str, label: impl Into<String>, e: &Error) -> Self {
        CheckRow { detail: json!({ "error": e.to_string() }), ..Self::new(section, label, Status::from_error(e)) }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }
}

fn row_or_error(section: &str, label: String, r: Result<CheckRow>) -> CheckRow {
    r.unwrap_or_else(|e| CheckRow::error(section, label, &e))
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub exhausted: usize,
    pub status: Status,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub special_fn: SpecialFnConfig,
    pub checks: Vec<CheckRow>,
    pub summary: Summary,
}

impl Report {
    pub fn new(config: RunConfig, special_fn: SpecialFnConfig, checks: Vec<CheckRow>) -> Self {
        let count = |s| checks.iter().filter(|c| c.status == s).count();
        let status = checks.iter().fold(Status::Pass, |acc, c| acc.and(c.status));
        let summary =
            Summary { pass: count(Status::Pass), fail: count(Status::Fail), exhausted: count(Status::Exhausted), status };
        Report { config, special_fn, checks, summary }
    }

    pub fn exit_code(&self) -> i32 {
        exit_code(self.summary.status)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// One line per check that carries a residual.
    pub fn to_csv(&self) -> Result<String> {
        #[derive(Serialize)]
        struct CsvRow<'a> {
            section: &'a str,
            label: &'a str,
            status: &'a str,
            residual_valuation: String,
            precision: String,
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.checks {
            let Some(r) = c.residual else { continue };
            w.serialize(CsvRow {
                section: &c.section,
                label: &c.label,
                status: c.status.as_str(),
                residual_valuation: r.valuation.map_or("infinity".into(), |v| v.to_string()),
                precision: if r.precision == EXACT { "exact".into() } else { r.precision.to_string() },
            })
            .map_err(|e| Error::Invalid(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    /// Writes the report and CSV table to the paths named in the config.
    pub fn write_outputs(&self) -> Result<()> {
        if let Some(out) = &self.config.out {
            std::fs::write(out, self.to_json_string())?;
        }
        if let Some(csv) = &self.config.csv {
            std::fs::write(csv, self.to_csv()?)?;
        }
        Ok(())
    }
}

fn random_laurent(f: &Field, rng: &mut ChaCha8Rng, prec: i64) -> LaurentU {
    let len = rng.gen_range(0..4);
    let digits = (0..len).map(|_| f.from_packed(rng.gen_range(0..f.order() as u32)).unwrap()).collect();
    let lead = rng.gen_range(-2..3);
    LaurentU::from_parts(f, lead, digits, prec)
}

/// Polynomial in `t` of degree below `len` with exact coefficients.
pub fn random_polynomial(f: &Field, rng: &mut ChaCha8Rng, len: usize) -> TSeries {
    TSeries::polynomial(f, (0..len).map(|_| random_laurent(f, rng, EXACT)).collect())
}

/// Series with `len` coefficients known to u-precision `prec`.
pub fn random_series(f: &Field, rng: &mut ChaCha8Rng, len: usize, prec: i64) -> TSeries {
    TSeries::series(f, (0..len).map(|_| random_laurent(f, rng, prec)).collect())
}

fn compare(lhs: &BlockMat, rhs: &BlockMat, exact: bool) -> Status {
    match lhs.residual(rhs) {
        Ok((Some(_), _)) => Status::Fail,
        Ok((None, p)) if exact && p != EXACT => Status::Fail,
        Ok((None, _)) => Status::Pass,
        Err(e) => Status::from_error(&e),
    }
}

/// `ρ(fg) = ρ(f)ρ(g)` and `ρ(f^τ) = ρ(f)^τ` on seeded random inputs: scalars
/// and 2×2 matrices, polynomials (exactly) and series (to precision).
pub fn rho_homomorphism_suite(f: &Field, k_list: &[usize], cases: usize, seed: u64) -> Vec<CheckRow> {
    const SECTION: &str = "rho_homomorphism";
    let mut rows = Vec::new();
    for &k in k_list {
        for (size, label) in [(1, "scalar"), (2, "matrix")] {
            for (exact, kind) in [(true, "polynomial"), (false, "series")] {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((k as u64) << 8) ^ ((size as u64) << 4) ^ exact as u64);
                let gen = |rng: &mut ChaCha8Rng| {
                    let entries = (0..size * size)
                        .map(|_| if exact { random_polynomial(f, rng, 5) } else { random_series(f, rng, 8, 24) })
                        .collect();
                    BlockMat::new(f, size, entries).expect("square")
                };
                let (mut mult, mut twist) = (Status::Pass, Status::Pass);
                for _ in 0..cases {
                    let a = gen(&mut rng);
                    let b = gen(&mut rng);
                    let prod = a.mul(&b).expect("same size");
                    let lhs = rho_mat(&prod, k);
                    let rhs = rho_mat(&a, k).mul(&rho_mat(&b, k)).expect("same size");
                    mult = mult.and(compare(&lhs, &rhs, exact));
                    twist = twist.and(match (a.twist(1), rho_mat(&a, k).twist(1)) {
                        (Ok(at), Ok(rt)) => compare(&rho_mat(&at, k), &rt, exact),
                        (Err(e), _) | (_, Err(e)) => Status::from_error(&e),
                    });
                }
                let tag = format!("k={k} {label} {kind}");
                rows.push(CheckRow::new(SECTION, format!("{tag} multiplicative"), mult).with_detail(json!({ "cases": cases })));
                rows.push(CheckRow::new(SECTION, format!("{tag} twist"), twist).with_detail(json!({ "cases": cases })));
            }
        }
    }
    rows
}

/// Leibniz rule, composition `∂^m ∂^n = C(n+m, n) ∂^{n+m}` and the collapse
/// `∂^j(f^{p^s}) = (∂^{j/p^s} f)^{p^s}` (zero unless `p^s | j`), for `n, m <= n_max`.
pub fn hyperderivative_suite(f: &Field, n_max: usize, cases: usize, seed: u64) -> Vec<CheckRow> {
    const SECTION: &str = "hyperderivative";
    let p = f.p();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x4879));
    let (mut leibniz, mut composition, mut collapse) = (Status::Pass, Status::Pass, Status::Pass);
    for _ in 0..cases {
        let a = random_polynomial(f, &mut rng, 7);
        let b = random_polynomial(f, &mut rng, 7);
        let ab = &a * &b;
        for n in 0..=n_max {
            let mut rhs = TSeries::zero(f);
            for i in 0..=n {
                rhs = &rhs + &(&a.hyperderive(i) * &b.hyperderive(n - i));
            }
            leibniz = leibniz.and(Status::from_bool(ab.hyperderive(n) == rhs));
            for m in 0..=n_max {
                let c = binom_mod_p((n + m) as u64, n as u64, p);
                let rhs = a.hyperderive(n + m).scale_elem(f.from_int(c as i64));
                composition = composition.and(Status::from_bool(a.hyperderive(n).hyperderive(m) == rhs));
            }
        }
        let mut ps = p as usize;
        while ps <= n_max {
            let power = a.pow(ps as u32);
            for j in 0..=n_max {
                let rhs = if j % ps == 0 { a.hyperderive(j / ps).pow(ps as u32) } else { TSeries::zero(f) };
                collapse = collapse.and(Status::from_bool(power.hyperderive(j) == rhs));
            }
            ps *= p as usize;
        }
    }
    let detail = json!({ "cases": cases, "n_max": n_max });
    vec![
        CheckRow::new(SECTION, "leibniz", leibniz).with_detail(detail.clone()),
        CheckRow::new(SECTION, "composition", composition).with_detail(detail.clone()),
        CheckRow::new(SECTION, "power collapse", collapse).with_detail(detail),
    ]
}

pub fn difference_equation_checks(fns: &SpecialFns) -> Vec<CheckRow> {
    const SECTION: &str = "difference_equations";
    match difference_equations(fns) {
        Ok((big, small)) => vec![
            CheckRow::residual(SECTION, "sigma(Omega) = (t-theta) Omega", big),
            CheckRow::residual(SECTION, "tau(omega) = (t-theta) omega", small),
        ],
        Err(e) => vec![CheckRow::error(SECTION, "difference equations", &e)],
    }
}

/// Carlitz tensor powers and their duals: prolonged trivializations, block
/// structure, determinant growth.
pub fn trivialization_checks(fns: &SpecialFns, n_list: &[u32], k_list: &[usize]) -> Vec<CheckRow> {
    const SECTION: &str = "trivializations";
    let f = fns.field();
    let required = fns.config().n;
    let mut rows = Vec::new();
    for &n in n_list {
        let motive = motives::carlitz_motive(f, n);
        let dual = motives::carlitz_dual(f, n);
        let upsilon = motives::carlitz_trivialization(fns, n);
        let psi = motives::carlitz_dual_trivialization(fns, n);
        for &k in k_list {
            let pm = Descriptor::Motive(motives::prolong_motive(&motive, k));
            let pd = Descriptor::Dual(motives::prolong_dual(&dual, k));
            for (desc, triv, side) in [(&pm, &upsilon, "motive"), (&pd, &psi, "dual")] {
                let label = format!("{side} n={n} k={k}");
                let pt = motives::prolong_trivialization(triv, k);
                let r = motives::verify_trivialization(desc, &pt, required).map(|r| {
                    let unit = pt.matrix.det().coeff(0).and_then(|c| c.valuation()).is_some();
                    let row = CheckRow::residual(SECTION, label.clone(), r);
                    let flavor = if triv.flavor == Flavor::Tau { "tau" } else { "sigma" };
                    if unit {
                        row.with_detail(json!({ "flavor": flavor }))
                    } else {
                        CheckRow { status: Status::Fail, ..row }.with_detail(json!({ "flavor": flavor, "singular": true }))
                    }
                });
                rows.push(row_or_error(SECTION, label, r));
            }
            let Descriptor::Dual(d) = &pd else { unreachable!() };
            let expected = TSeries::t_minus_theta(f).pow(n * (k as u32 + 1));
            rows.push(
                CheckRow::new(SECTION, format!("det n={n} k={k}"), Status::from_bool(d.theta_tilde.det() == expected))
                    .with_detail(json!({ "exponent": n * (k as u32 + 1) })),
            );
            if k >= 1 {
                let twice = motives::prolong_dual(&motives::prolong_dual(&dual, k), 1);
                let once = motives::prolong_dual(&dual, k);
                let ok = (0..k)
                    .map(|l| block_structure_check(&once.theta_tilde, 1, k, l))
                    .chain([block_structure_check(&twice.theta_tilde, k + 1, 1, 0)])
                    .try_fold(true, |acc, b| b.map(|b| acc && b.sub && b.quotient));
                rows.push(match ok {
                    Ok(ok) => CheckRow::new(SECTION, format!("block structure n={n} k={k}"), Status::from_bool(ok)),
                    Err(e) => CheckRow::error(SECTION, format!("block structure n={n} k={k}"), &e),
                });
            }
        }
    }
    rows
}

/// Carlitz t-module prolongations: explicit matrices, nilpotency, transpose duality.
pub fn tmodule_checks(f: &Field, k_list: &[usize]) -> Vec<CheckRow> {
    const SECTION: &str = "tmodule";
    let e = motives::carlitz_tmodule(f);
    let theta = LaurentU::theta(f);
    let mut rows = Vec::new();
    for &k in k_list {
        let p = motives::prolong_tmodule(&e, k);
        let a0 = crate::matrix::ValueMat::from_fn(f, k + 1, |i, j| {
            if i == j {
                theta.clone()
            } else if i == j + 1 {
                LaurentU::from_int(f, -1)
            } else {
                LaurentU::zero(f)
            }
        });
        let explicit = p.a.len() == 2 && p.a[0] == a0 && p.a[1] == crate::matrix::ValueMat::identity(f, k + 1);
        rows.push(CheckRow::new(SECTION, format!("matrix k={k}"), Status::from_bool(explicit)));
        rows.push(CheckRow::new(SECTION, format!("nilpotent k={k}"), Status::from_bool(p.nilpotent())));
        let dual_side = motives::prolonged_motive_action(&e, k);
        let transposed = p.a.iter().zip(&dual_side).all(|(x, y)| &x.transpose() == y);
        rows.push(CheckRow::new(SECTION, format!("transpose duality k={k}"), Status::from_bool(transposed)));
        rows.push(CheckRow::new(SECTION, format!("valid descriptor k={k}"), Status::from_bool(TModuleDesc::new(p.a).is_ok())));
    }
    rows
}

/// Purity of prolongations on the Carlitz weight and a seeded unit matrix.
pub fn purity_checks(f: &Field, k_list: &[usize], seed: u64) -> Vec<CheckRow> {
    const SECTION: &str = "purity";
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5075));
    let entries = (0..4)
        .map(|idx| {
            let mut c: Vec<LaurentU> = (0..4).map(|_| random_laurent(f, &mut rng, EXACT)).collect();
            c[0] = if idx % 3 == 0 { LaurentU::one(f) } else { LaurentU::zero(f) };
            TSeries::polynomial(f, c)
        })
        .collect();
    let unit = BlockMat::new(f, 2, entries).expect("square");
    let mut rows = Vec::new();
    for &k in k_list {
        for (a, u, v, name) in [(BlockMat::identity(f, 1), 1, 1, "carlitz"), (unit.clone(), 3, 1, "unit")] {
            let label = format!("{name} u={u} k={k}");
            rows.push(row_or_error(
                SECTION,
                label.clone(),
                motives::purity_prolong_check(&a, u, v, k).map(|rep| {
                    CheckRow::new(SECTION, label, Status::from_bool(rep.pass)).with_detail(serde_json::to_value(rep).unwrap())
                }),
            ));
        }
    }
    rows
}

pub fn period_checks(fns: &SpecialFns, n_list: &[u32]) -> Vec<CheckRow> {
    const SECTION: &str = "periods";
    let mut rows = Vec::new();
    for &n in n_list {
        let label = format!("n={n}");
        match periods::period_coordinates(fns, n) {
            Ok(pv) => {
                rows.push(CheckRow::new(SECTION, format!("normalization {label}"), pv.normalized).with_detail(pv.to_json()));
                rows.push(row_or_error(
                    SECTION,
                    format!("toeplitz {label}"),
                    periods::toeplitz_inverse_identity(fns, n, &pv.z)
                        .map(|t| CheckRow::residual(SECTION, format!("toeplitz {label}"), t.residual)),
                ));
            }
            Err(e) => rows.push(CheckRow::error(SECTION, format!("normalization {label}"), &e)),
        }
        rows.push(row_or_error(
            SECTION,
            format!("routes {label}"),
            periods::route_agreement(fns, n).map(|r| {
                CheckRow::new(SECTION, format!("routes {label}"), r.status)
                    .with_detail(json!({ "agreed": r.agreed }))
            }),
        ));
        rows.push(row_or_error(
            SECTION,
            format!("vanishing {label}"),
            periods::vanishing_pattern(fns, n).map(|v| {
                CheckRow::new(SECTION, format!("vanishing {label}"), v.status).with_detail(serde_json::to_value(&v).unwrap())
            }),
        ));
    }
    rows
}

/// `ρ_[k](ω) = (ω^{p^s})^a ρ_[k](ω^n)^b` for `n` prime to `p`, modulo `t^12`.
pub fn frobenius_lemma_checks(fns: &SpecialFns, n_list: &[u32], k_list: &[usize]) -> Vec<CheckRow> {
    const SECTION: &str = "frobenius_lemma";
    let p = fns.field().p();
    let m = fns.config().m.min(12);
    let mut rows = Vec::new();
    for &n in n_list.iter().filter(|&&n| n % p != 0) {
        for &k in k_list {
            let label = format!("n={n} k={k}");
            rows.push(row_or_error(
                SECTION,
                label.clone(),
                periods::frobenius_power_lemma_check(fns.omega_small(), n, k, m).map(|rep| {
                    let status = Status::from_bool(rep.scalar).and(rep.residual.status());
                    CheckRow { residual: Some(rep.residual), ..CheckRow::new(SECTION, label, status) }
                        .with_detail(json!({ "s": rep.s, "a": rep.a, "b": rep.b }))
                }),
            ));
        }
    }
    rows
}

/// Torsion root relations for every `ζ` of degree `d`, `n <= n_max`, plus the
/// `β + 1` control (expected to fail) and additivity.
pub fn torsion_checks(fns: &SpecialFns, d: u32, n_max: usize) -> Vec<CheckRow> {
    const SECTION: &str = "torsion";
    let f = fns.field();
    let mut rows = Vec::new();
    match torsion::torsion_table(fns, d, n_max) {
        Ok(table) => {
            for row in table {
                let label = match row.n {
                    None => format!("d={d} zeta={:?} omega", row.zeta),
                    Some(n) => format!("d={d} zeta={:?} n={n}", row.zeta),
                };
                rows.push(CheckRow::residual(SECTION, label, row.residual));
            }
        }
        Err(e) => rows.push(CheckRow::error(SECTION, format!("d={d} table"), &e)),
    }
    for zeta in torsion::roots_of_degree(f, d) {
        let z = f.coords(zeta);
        let label = format!("d={d} zeta={z:?} control");
        rows.push(row_or_error(
            SECTION,
            label.clone(),
            torsion::omega_relation_control(fns, zeta, d).map(|r| {
                let refuted = r.valuation.is_some_and(|v| v <= 0);
                CheckRow::new(SECTION, label, Status::from_bool(refuted)).with_detail(serde_json::to_value(r).unwrap())
            }),
        ));
        let label = format!("d={d} zeta={z:?} additivity");
        rows.push(row_or_error(
            SECTION,
            label.clone(),
            torsion::additivity_check(fns, zeta, d).map(|r| CheckRow::residual(SECTION, label, r)),
        ));
    }
    rows
}

fn agree_row(section: &str, label: String, a: &LaurentU, b: &LaurentU) -> CheckRow {
    CheckRow::new(section, label, Status::from_bool(a.agrees(b)))
}

/// Raising `J` by one or `N` by 16 changes no digit of `π̃`, of the period
/// coordinates, or of the torsion values within the original precision.
pub fn stability_checks(cfg: &RunConfig) -> Vec<CheckRow> {
    const SECTION: &str = "stability";
    let run = || -> Result<Vec<CheckRow>> {
        let f = GaloisField::for_q(cfg.q, 1)?;
        let base_cfg = cfg.theta_config()?;
        let more_j = SpecialFnConfig { j: base_cfg.j + 1, ..base_cfg };
        let wider = RunConfig { n: cfg.n + 16, m: cfg.m, j: cfg.j.map(|j| j + 1), ..cfg.clone() };
        let more_n = wider.theta_config()?;
        let base = SpecialFns::new(&f, base_cfg)?;
        let mut rows = Vec::new();
        for (variant, other_cfg) in [("J+1", more_j), ("N+16", more_n)] {
            let other = SpecialFns::new(&f, other_cfg)?;
            rows.push(agree_row(SECTION, format!("{variant} pi"), base.pi_tilde(), other.pi_tilde()));
            for &n in &cfg.n_list {
                let a = periods::period_coordinates(&base, n)?.z;
                let b = periods::period_coordinates(&other, n)?.z;
                let ok = a.iter().zip(&b).all(|(x, y)| x.agrees(y));
                rows.push(CheckRow::new(SECTION, format!("{variant} periods n={n}"), Status::from_bool(ok)));
            }
        }
        let fd = GaloisField::for_q(cfg.q, cfg.d)?;
        let zb = SpecialFns::new(&fd, cfg.zeta_config(cfg.d)?)?;
        let zcfg = zb.config();
        let zeta_variants =
            [("J+1", SpecialFnConfig { j: zcfg.j + 1, ..zcfg }), ("N+16", wider.zeta_config(cfg.d)?)];
        for (variant, other_cfg) in zeta_variants {
            let other = SpecialFns::new(&fd, other_cfg)?;
            let mut ok = true;
            for zeta in torsion::roots_of_degree(&fd, cfg.d) {
                for n in 0..=cfg.n_max().min(3) as usize {
                    let a = torsion::hyper_omega_at_zeta(&zb, zeta, n)?;
                    let b = torsion::hyper_omega_at_zeta(&other, zeta, n)?;
                    ok &= a.agrees(&b);
                }
            }
            rows.push(CheckRow::new(SECTION, format!("{variant} torsion values d={}", cfg.d), Status::from_bool(ok)));
        }
        Ok(rows)
    };
    run().unwrap_or_else(|e| vec![CheckRow::error(SECTION, "stability", &e)])
}

type Task<'a> = Box<dyn Fn() -> Vec<CheckRow> + Send + Sync + 'a>;

/// Every verifier for one configuration. Sections run in parallel; rows are
/// assembled in a fixed order.
pub fn run_suite(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let f = GaloisField::for_q(cfg.q, 1)?;
    let theta_cfg = cfg.theta_config()?;
    let fns = SpecialFns::new(&f, theta_cfg)?;
    let zeta_fns = (1..=cfg.d)
        .map(|d| {
            let fd = GaloisField::for_q(cfg.q, d)?;
            SpecialFns::new(&fd, cfg.zeta_config(d)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let n_max = cfg.n_max() as usize;
    let k_list = &cfg.k_list;
    let mut tasks: Vec<Task> = vec![
        Box::new(|| difference_equation_checks(&fns)),
        Box::new(|| rho_homomorphism_suite(&f, k_list, cfg.cases, cfg.seed)),
        Box::new(|| hyperderivative_suite(&f, 6, cfg.cases, cfg.seed)),
        Box::new(|| trivialization_checks(&fns, &cfg.n_list, k_list)),
        Box::new(|| tmodule_checks(&f, k_list)),
        Box::new(|| purity_checks(&f, k_list, cfg.seed)),
        Box::new(|| period_checks(&fns, &cfg.n_list)),
        Box::new(|| frobenius_lemma_checks(&fns, &cfg.n_list, k_list)),
    ];
    for (i, zf) in zeta_fns.iter().enumerate() {
        tasks.push(Box::new(move || torsion_checks(zf, i as u32 + 1, n_max)));
    }
    tasks.push(Box::new(|| stability_checks(cfg)));
    let checks: Vec<CheckRow> = tasks.par_iter().map(|t| t()).collect::<Vec<_>>().into_iter().flatten().collect();
    Ok(Report::new(cfg.clone(), theta_cfg, checks))
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<PathBuf> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value).expect("fixture serializes") + "\n";
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Golden files for the config: descriptors of the Carlitz family and their
/// prolongations, special-function values and period coordinates.
pub fn emit_fixtures(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let f = GaloisField::for_q(cfg.q, 1)?;
    let fns = SpecialFns::new(&f, cfg.theta_config()?)?;
    let mut written = Vec::new();
    let q = cfg.q;
    for &n in &cfg.n_list {
        for &k in &cfg.k_list {
            let m = Descriptor::Motive(motives::carlitz_motive(&f, n)).prolong(k);
            written.push(write_json(dir, &format!("motive_q{q}_n{n}_k{k}.json"), &m.to_json())?);
            let d = Descriptor::Dual(motives::carlitz_dual(&f, n)).prolong(k);
            written.push(write_json(dir, &format!("dual_q{q}_n{n}_k{k}.json"), &d.to_json())?);
        }
    }
    for &k in &cfg.k_list {
        let t = Descriptor::TModule(motives::carlitz_tmodule(&f)).prolong(k);
        written.push(write_json(dir, &format!("tmodule_q{q}_k{k}.json"), &t.to_json())?);
    }
    let special = json!({
        "config": fns.config(),
        "pi_tilde": fns.pi_tilde().to_json(),
        "omega_big": fns.omega_big().truncate_t(4).to_json(),
    });
    written.push(write_json(dir, &format!("specialfn_q{q}.json"), &special)?);
    let mut pv = Vec::new();
    for &n in &cfg.n_list {
        pv.push(periods::period_coordinates(&fns, n)?.to_json());
    }
    written.push(write_json(dir, &format!("periods_q{q}.json"), &pv)?);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig { n_list: vec![1, 2], k_list: vec![0, 1], n: 96, cases: 8, ..RunConfig::default() }
    }

    #[test]
    fn config_parsing() {
        let cfg = RunConfig::from_json_str(r#"{"q":3,"n_list":[1],"k_list":[0],"N":64}"#).unwrap();
        assert_eq!(cfg.d, 1);
        assert_eq!(cfg.seed, default_seed());
        assert!(RunConfig::from_json_str(r#"{"q":3,"n_list":[1],"k_list":[0],"N":64,"x":1}"#).is_err());
        assert!(RunConfig::from_json_str(r#"{"q":6,"n_list":[1],"k_list":[0],"N":64}"#).is_err());
        assert!(RunConfig::from_json_str(r#"{"q":2,"n_list":[],"k_list":[0],"N":64}"#).is_err());
        assert!(RunConfig::from_json_str(r#"{"q":2,"n_list":[1],"k_list":[0]}"#).is_err());
    }

    #[test]
    fn small_suite_passes_and_is_deterministic() {
        let a = run_suite(&small()).unwrap();
        assert_eq!(a.exit_code(), EXIT_PASS, "{}", a.to_json_string());
        let b = run_suite(&small()).unwrap();
        assert_eq!(a.to_json_string(), b.to_json_string());
        assert!(a.to_csv().unwrap().starts_with("section,label,status,residual_valuation,precision\n"));
    }

    #[test]
    fn starved_precision_is_exhausted() {
        let cfg = RunConfig { n: 8, ..small() };
        let r = run_suite(&cfg).unwrap();
        assert_eq!(r.exit_code(), EXIT_EXHAUSTED, "{}", r.to_json_string());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(Status::Pass), 0);
        assert_eq!(exit_code(Status::Fail), 1);
        assert_eq!(exit_code(Status::Exhausted), 2);
    }
}
